//! One-sided trigonometric approximation of periodized Gaussians (theta
//! functions) and their subordinated combinations, with respect to an even
//! probability measure on `ℝ/ℤ`.

use crate::error::{Error, Result};
use crate::quad::{self, Tolerance};
use crate::subordination::SubordinationMeasure;
use crate::Side;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// `Σ_j e^{−πλ(j−x)²}` by direct summation.
pub fn theta3_direct(x: f64, lambda: f64) -> (f64, f64) {
    let x = x - x.floor();
    let term = |j: f64| {
        let t = x - j;
        let e = (-PI * lambda * t * t).exp();
        (e, -2.0 * PI * lambda * t * e)
    };
    let (mut v, mut d) = (0.0, 0.0);
    for j in [0.0, 1.0] {
        let (e, de) = term(j);
        v += e;
        d += de;
    }
    let mut k = 1.0;
    loop {
        let (a, da) = term(-k);
        let (b, db) = term(1.0 + k);
        v += a + b;
        d += da + db;
        if a + b <= 1e-17 * v || k > 1e6 {
            break;
        }
        k += 1.0;
    }
    (v, d)
}

/// The same sum through its Fourier series
/// `λ^{−1/2}(1 + 2Σ_{n≥1} e^{−πn²/λ} cos 2πnx)`.
pub fn theta3_dual(x: f64, lambda: f64) -> (f64, f64) {
    let (mut v, mut d) = (1.0, 0.0);
    let mut n = 1.0;
    loop {
        let e = (-PI * n * n / lambda).exp();
        v += 2.0 * e * (2.0 * PI * n * x).cos();
        d -= 4.0 * PI * n * e * (2.0 * PI * n * x).sin();
        if 2.0 * e <= 1e-17 * v.abs() || e == 0.0 {
            break;
        }
        n += 1.0;
    }
    let s = lambda.powf(-0.5);
    (s * v, s * d)
}

/// `λ^{−1/2} θ₃(x, iλ^{−1})` and its `x`-derivative.
pub fn theta3_with_derivative(x: f64, lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    let (v, d) = if lambda >= 1.0 { theta3_direct(x, lambda) } else { theta3_dual(x, lambda) };
    // exact zeros of the odd derivative
    let r = 2.0 * (x - x.floor());
    Ok((v, if r == 0.0 || r == 1.0 { 0.0 } else { d }))
}

/// `λ^{−1/2} θ₃(x, iλ^{−1}) = Σ_j e^{−πλ(j−x)²}`.
pub fn theta3(x: f64, lambda: f64) -> Result<f64> {
    Ok(theta3_with_derivative(x, lambda)?.0)
}

#[derive(Clone)]
pub enum CircleRepr {
    Lebesgue,
    /// Density on `[0, 1)`, normalized internally.
    Density(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Moments `c_m = ∫ cos(2πmx) dϑ(x)` for `m = 0, 1, …`.
    Moments(Vec<f64>),
}

impl fmt::Debug for CircleRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircleRepr::Lebesgue => f.write_str("Lebesgue"),
            CircleRepr::Density(_) => f.write_str("Density(..)"),
            CircleRepr::Moments(c) => f.debug_tuple("Moments").field(c).finish(),
        }
    }
}

/// Even probability measure on `ℝ/ℤ`.
#[derive(Debug, Clone)]
pub struct EvenCircleMeasure {
    pub repr: CircleRepr,
    /// Largest usable moment order.
    pub degree_support: usize,
    mass: f64,
}

impl EvenCircleMeasure {
    pub fn lebesgue() -> Self {
        EvenCircleMeasure { repr: CircleRepr::Lebesgue, degree_support: usize::MAX, mass: 1.0 }
    }

    pub fn from_density<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Result<Self> {
        for i in 0..97 {
            let x = (i as f64 + 0.5) / 97.0;
            let (a, b) = (f(x), f(1.0 - x));
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::InvalidParameter(format!("density is negative or undefined at {x}")));
            }
            if (a - b).abs() > 1e-10 * a.abs().max(b.abs()).max(1e-300) {
                return Err(Error::InvalidParameter(format!("density is not even: f({x}) = {a}, f({}) = {b}", 1.0 - x)));
            }
        }
        let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(f);
        let g = f.clone();
        let mass = quad::adaptive_fn(move |x| g(x), 0.0, 1.0, Tolerance { rel: 1e-14, ..Default::default() })?.value;
        if !(mass > 0.0) {
            return Err(Error::InvalidParameter("density has zero mass".into()));
        }
        Ok(EvenCircleMeasure { repr: CircleRepr::Density(f), degree_support: usize::MAX, mass })
    }

    /// Weights on the uniform grid `x_i = i/len`; moments by the periodic
    /// trapezoid rule.
    pub fn from_samples(weights: &[f64]) -> Result<Self> {
        let n = weights.len();
        if n < 4 {
            return Err(Error::InvalidParameter("need at least 4 density samples".into()));
        }
        let total: f64 = weights.iter().sum();
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("density sample {i} is {w}")));
            }
            let mirror = weights[(n - i) % n];
            if (w - mirror).abs() > 1e-9 * total / n as f64 {
                return Err(Error::InvalidParameter(format!("density samples are not even at index {i}")));
            }
        }
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("density has zero mass".into()));
        }
        let support = n / 2;
        let moments = (0..=support)
            .map(|m| {
                weights.iter().enumerate().map(|(i, w)| w * (2.0 * PI * (m * i) as f64 / n as f64).cos()).sum::<f64>()
                    / total
            })
            .collect();
        Self::from_moments(moments)
    }

    pub fn from_moments(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() || (c[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("moment c_0 must equal 1".into()));
        }
        if c.iter().any(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12) {
            return Err(Error::InvalidParameter("moments must be finite with |c_m| <= 1".into()));
        }
        let support = c.len() - 1;
        Ok(EvenCircleMeasure { repr: CircleRepr::Moments(c), degree_support: support, mass: 1.0 })
    }

    /// `c_m = ∫ cos(2πmx) dϑ(x)`.
    pub fn moment(&self, m: usize) -> Result<f64> {
        match &self.repr {
            CircleRepr::Lebesgue => Ok(if m == 0 { 1.0 } else { 0.0 }),
            CircleRepr::Moments(c) => c.get(m).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("moment {m} requested, only {} available", c.len() - 1))
            }),
            CircleRepr::Density(f) => {
                let panels = 4 * (m + 1);
                let tol = Tolerance { rel: 1e-14, abs: 1e-16, ..Default::default() };
                let mut s = 0.0;
                for k in 0..panels {
                    let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
                    s += quad::adaptive_fn(|x| f(x) * (2.0 * PI * m as f64 * x).cos(), a, b, tol)?.value;
                }
                Ok(s / self.mass)
            }
        }
    }

    /// `∫ f dϑ` for a trigonometric polynomial.
    pub fn integrate(&self, p: &TrigPolynomial) -> Result<f64> {
        let mut s = p.coeffs[p.degree].re;
        for k in 1..=p.degree {
            let (c, _) = p.cos_sin(k);
            if c != 0.0 {
                s += c * self.moment(k)?;
            }
        }
        Ok(s)
    }
}

/// Real trigonometric polynomial `Σ_{k=−n}^{n} a_k e^{2πikx}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPolynomial {
    pub degree: usize,
    /// `a_{−n}, …, a_n`.
    pub coeffs: Vec<Complex64>,
}

impl TrigPolynomial {
    /// From `c_0 + Σ_{k≥1} (c_k cos 2πkx + s_k sin 2πkx)`.
    pub fn from_cos_sin(c0: f64, c: &[f64], s: &[f64]) -> Self {
        let n = c.len();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * n + 1];
        coeffs[n] = Complex64::new(c0, 0.0);
        for k in 1..=n {
            coeffs[n + k] = Complex64::new(0.5 * c[k - 1], -0.5 * s[k - 1]);
            coeffs[n - k] = Complex64::new(0.5 * c[k - 1], 0.5 * s[k - 1]);
        }
        TrigPolynomial { degree: n, coeffs }
    }

    pub fn coefficient(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.degree {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.degree as i64) as usize]
    }

    /// `(c_k, s_k)` for `k ≥ 1`.
    pub fn cos_sin(&self, k: usize) -> (f64, f64) {
        let a = self.coefficient(k as i64);
        (2.0 * a.re, -2.0 * a.im)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.coeffs[self.degree].re;
        for k in 1..=self.degree {
            let (c, s) = self.cos_sin(k);
            let t = 2.0 * PI * k as f64 * x;
            v += c * t.cos() + s * t.sin();
        }
        v
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let mut v = 0.0;
        for k in 1..=self.degree {
            let (c, s) = self.cos_sin(k);
            let w = 2.0 * PI * k as f64;
            v += w * (s * (w * x).cos() - c * (w * x).sin());
        }
        v
    }

    fn scaled_add(&self, w: f64, other: &TrigPolynomial) -> TrigPolynomial {
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + w * b).collect();
        TrigPolynomial { degree: self.degree, coeffs }
    }
}

/// Orthonormal polynomials `φ_0, …, φ_{n+1}` of an even measure and the
/// node sets of `A_{n+1} = (φ* + φ)/2`, `B_{n+1} = i(φ* − φ)/2`.
#[derive(Debug, Clone)]
pub struct OpucBasis {
    pub n: usize,
    /// Coefficients of `φ_k`, `k = 0..=n+1`, in increasing powers.
    pub family: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
    pub phi_star: Vec<f64>,
    /// `A_{n+1}` coefficients (real).
    pub a_poly: Vec<f64>,
    /// `B_{n+1} = i·Σ b_j z^j`; this holds the real `b_j`.
    pub b_poly: Vec<f64>,
    pub nodes_a: Vec<f64>,
    pub nodes_b: Vec<f64>,
    /// Moments `c_0..c_n` used by the integrals.
    pub moments: Vec<f64>,
}

fn poly_eval(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &v| acc * z + v)
}

/// Gram–Cholesky orthonormalization of `1, z, …, z^{n+1}`.
pub fn opuc(m: &EvenCircleMeasure, n: usize) -> Result<OpucBasis> {
    if n + 1 > m.degree_support {
        return Err(Error::InvalidParameter(format!(
            "degree {n} needs moments up to {}, measure supports {}",
            n + 1,
            m.degree_support
        )));
    }
    let size = n + 2;
    let c: Vec<f64> = (0..size).map(|k| m.moment(k)).collect::<Result<_>>()?;
    let gram = DMatrix::from_fn(size, size, |i, j| c[i.abs_diff(j)]);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::IllConditioned("moment Gram matrix is not positive definite".into()))?;
    let l = chol.l();
    let diag_min = (0..size).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    let diag_max = (0..size).map(|i| l[(i, i)]).fold(0.0, f64::max);
    if diag_min < 1e-7 * diag_max {
        return Err(Error::IllConditioned(format!(
            "moment Gram matrix nearly singular (pivot ratio {:e})",
            diag_min / diag_max
        )));
    }
    let inv = l
        .solve_lower_triangular(&DMatrix::identity(size, size))
        .ok_or_else(|| Error::IllConditioned("triangular inverse failed".into()))?;
    let family: Vec<Vec<f64>> = (0..size).map(|k| (0..=k).map(|j| inv[(k, j)]).collect()).collect();
    let phi = family[n + 1].clone();
    let phi_star: Vec<f64> = phi.iter().rev().cloned().collect();
    let a_poly: Vec<f64> = (0..size).map(|j| 0.5 * (phi_star[j] + phi[j])).collect();
    let b_poly: Vec<f64> = (0..size).map(|j| 0.5 * (phi_star[j] - phi[j])).collect();
    let half = 0.5 * (n + 1) as f64;
    let fa = {
        let a = a_poly.clone();
        move |x: f64| a.iter().enumerate().map(|(j, v)| v * (2.0 * PI * (j as f64 - half) * x).cos()).sum::<f64>()
    };
    let fb = {
        let b = b_poly.clone();
        move |x: f64| -b.iter().enumerate().map(|(j, v)| v * (2.0 * PI * (j as f64 - half) * x).sin()).sum::<f64>()
    };
    let nodes_a = circle_roots(&fa, n + 1)?;
    let nodes_b = circle_roots(&fb, n + 1)?;
    if nodes_b[0] != 0.0 {
        return Err(Error::Consistency("0 is not a zero of B_{n+1}".into()));
    }
    Ok(OpucBasis { n, family, phi, phi_star, a_poly, b_poly, nodes_a, nodes_b, moments: c[..=n].to_vec() })
}

/// All zeros in `[0, 1)` of a real function known to have exactly `count`
/// simple zeros per unit period (up to sign, `f(x+1) = ±f(x)`).
fn circle_roots<F: Fn(f64) -> f64>(f: &F, count: usize) -> Result<Vec<f64>> {
    // irrational offset keeps grid points away from rational nodes
    const OFFSET: f64 = std::f64::consts::FRAC_1_PI;
    let mut grid = (64 * count).max(512);
    for _ in 0..6 {
        let mut roots = Vec::with_capacity(count);
        let x = |k: usize| (k as f64 + OFFSET) / grid as f64;
        let mut prev = f(x(0));
        for k in 1..=grid {
            let xk = x(k);
            let cur = f(xk);
            if prev == 0.0 {
                roots.push(x(k - 1));
            } else if prev.signum() != cur.signum() && cur != 0.0 {
                roots.push(bisect(f, x(k - 1), xk, prev));
            }
            prev = cur;
        }
        if roots.len() == count {
            let mut r: Vec<f64> = roots
                .into_iter()
                .map(|v| {
                    let v = v - v.floor();
                    if !(1e-13..=1.0 - 1e-13).contains(&v) {
                        0.0
                    } else {
                        v
                    }
                })
                .collect();
            r.sort_by(f64::total_cmp);
            return Ok(symmetrize(r));
        }
        grid *= 4;
    }
    Err(Error::IllConditioned(format!("could not isolate {count} nodes on the circle")))
}

/// Node sets of even measures are invariant under `ξ ↦ 1 − ξ`; enforce
/// it exactly, with `1/2` snapped when present.
fn symmetrize(mut r: Vec<f64>) -> Vec<f64> {
    let len = r.len();
    let start = usize::from(r.first() == Some(&0.0));
    let (mut i, mut j) = (start, len.saturating_sub(1));
    while i < j {
        let a = 0.5 * (r[i] + 1.0 - r[j]);
        r[i] = a;
        r[j] = 1.0 - a;
        i += 1;
        j -= 1;
    }
    if i == j && i >= start && i < len && (r[i] - 0.5).abs() < 1e-10 {
        r[i] = 0.5;
    }
    r
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let sa = fa.signum();
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-15 || m <= a || m >= b {
            break;
        }
        let v = f(m);
        if v == 0.0 {
            return m;
        }
        if v.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

impl OpucBasis {
    pub fn nodes(&self, side: Side) -> &[f64] {
        match side {
            Side::Minus => &self.nodes_a,
            Side::Plus => &self.nodes_b,
        }
    }

    /// `K_n(w, z) = Σ_{k≤n} φ_k(z) conj(φ_k(w))`.
    pub fn kernel_sum(&self, w: Complex64, z: Complex64) -> Complex64 {
        self.family[..=self.n].iter().map(|c| poly_eval(c, z) * poly_eval(c, w).conj()).sum()
    }

    /// Christoffel–Darboux form
    /// `(φ*(z) conj φ*(w) − φ(z) conj φ(w)) / (1 − conj(w) z)`, for `w̄z ≠ 1`.
    pub fn kernel_cd(&self, w: Complex64, z: Complex64) -> Complex64 {
        let num = poly_eval(&self.phi_star, z) * poly_eval(&self.phi_star, w).conj()
            - poly_eval(&self.phi, z) * poly_eval(&self.phi, w).conj();
        num / (1.0 - w.conj() * z)
    }
}

fn unit(xi: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * xi)
}

/// `K_n(e^{2πiξ}, e^{2πiξ}) = Σ_{k≤n} |φ_k(e^{2πiξ})|²`.
pub fn kernel_diag_circle(b: &OpucBasis, xi: f64) -> f64 {
    let z = unit(xi);
    b.family[..=b.n].iter().map(|c| poly_eval(c, z).norm_sqr()).sum()
}

/// Optimal one-sided polynomial with its certificates.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicExtremal {
    pub side: Side,
    pub poly: TrigPolynomial,
    pub nodes: Vec<f64>,
    /// `∫ P dϑ`.
    pub integral: f64,
    /// `Σ_ξ h(ξ)/K_n(ξ, ξ)` over the nodes of the side.
    pub value_formula: f64,
    /// Largest residual among the kept interpolation equations.
    pub kept_residual: f64,
    /// Residual of the equation left out of the square system.
    pub dropped_residual: f64,
    /// `min sign·(h − P)` over the verification grid.
    pub min_slack: f64,
}

/// Number of grid points used for the built-in one-sidedness check.
pub const VERIFY_GRID: usize = 10_000;

/// Solves the Hermite system `P(ξ) = v`, `P′(ξ) = d` at the nodes of
/// `side`, with `2n+1` unknowns and one derivative equation left out.
/// Returns the polynomial and the residuals (kept, dropped).
pub fn hermite_fit(basis: &OpucBasis, side: Side, values: &[f64], derivs: &[f64]) -> Result<(TrigPolynomial, f64, f64)> {
    let n = basis.n;
    let nodes = basis.nodes(side);
    if values.len() != nodes.len() || derivs.len() != nodes.len() {
        return Err(Error::InvalidParameter("one value and derivative per node required".into()));
    }
    let dropped = match side {
        Side::Minus => nodes.len() - 1,
        Side::Plus => 0,
    };
    let size = 2 * n + 1;
    let value_row = |x: f64| -> Vec<f64> {
        let mut r = vec![1.0];
        r.extend((1..=n).map(|k| (2.0 * PI * k as f64 * x).cos()));
        r.extend((1..=n).map(|k| (2.0 * PI * k as f64 * x).sin()));
        r
    };
    let deriv_row = |x: f64| -> Vec<f64> {
        let mut r = vec![0.0];
        r.extend((1..=n).map(|k| -2.0 * PI * k as f64 * (2.0 * PI * k as f64 * x).sin()));
        r.extend((1..=n).map(|k| 2.0 * PI * k as f64 * (2.0 * PI * k as f64 * x).cos()));
        r
    };
    let mut rows = Vec::with_capacity(size);
    let mut rhs = Vec::with_capacity(size);
    for (i, &x) in nodes.iter().enumerate() {
        rows.push(value_row(x));
        rhs.push(values[i]);
        if i != dropped {
            rows.push(deriv_row(x));
            rhs.push(derivs[i]);
        }
    }
    let mat = DMatrix::from_fn(size, size, |i, j| rows[i][j]);
    let sv = mat.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::IllConditioned(format!("Hermite system condition number {:e}", smax / smin)));
    }
    let b = DVector::from_vec(rhs.clone());
    let sol = mat
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::IllConditioned("Hermite system is singular".into()))?;
    let poly = TrigPolynomial::from_cos_sin(sol[0], &sol.as_slice()[1..=n], &sol.as_slice()[n + 1..]);
    let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let kept = (&mat * &sol - &b).amax() / scale;
    let dropped_res = (poly.derivative(nodes[dropped]) - derivs[dropped]).abs() / scale;
    Ok((poly, kept, dropped_res))
}

/// Even target and even measure force an even optimum; the sine part
/// left by the asymmetric dropped equation is roundoff and is removed.
fn even_part(mut poly: TrigPolynomial) -> Result<TrigPolynomial> {
    let scale = poly.coeffs.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let odd = poly.coeffs.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if odd > 1e-9 * scale.max(1e-300) {
        return Err(Error::Consistency(format!("optimal polynomial has an odd part of size {odd:e}")));
    }
    for c in &mut poly.coeffs {
        c.im = 0.0;
    }
    Ok(poly)
}

#[allow(clippy::too_many_arguments)]
fn finish<H: FnMut(f64) -> Result<f64>>(
    m: &EvenCircleMeasure,
    basis: &OpucBasis,
    side: Side,
    poly: TrigPolynomial,
    node_values: &[f64],
    kept: f64,
    dropped: f64,
    mut target: H,
    grid: usize,
) -> Result<PeriodicExtremal> {
    let nodes = basis.nodes(side).to_vec();
    let poly = even_part(poly)?;
    let value_formula = nodes.iter().zip(node_values).map(|(&x, v)| v / kernel_diag_circle(basis, x)).sum();
    let integral = m.integrate(&poly)?;
    let sign = match side {
        Side::Minus => 1.0,
        Side::Plus => -1.0,
    };
    let mut min_slack = f64::INFINITY;
    let mut scale = 1.0f64;
    for i in 0..grid {
        let x = i as f64 / grid as f64;
        let h = target(x)?;
        scale = scale.max(h.abs());
        min_slack = min_slack.min(sign * (h - poly.eval(x)));
    }
    if min_slack < -1e-8 * scale {
        return Err(Error::Consistency(format!("one-sidedness violated by {:e}", -min_slack)));
    }
    Ok(PeriodicExtremal { side, poly, nodes, integral, value_formula, kept_residual: kept, dropped_residual: dropped, min_slack })
}

/// Optimal degree-`n` minorant (`Minus`) or majorant (`Plus`) of
/// `x ↦ λ^{−1/2} θ₃(x, iλ^{−1})` in `L¹(dϑ)`.
pub fn gaussian_periodic_extremal(m: &EvenCircleMeasure, n: usize, lambda: f64, side: Side) -> Result<PeriodicExtremal> {
    check_lambda(lambda)?;
    let basis = opuc(m, n)?;
    gaussian_periodic_with_basis(m, &basis, lambda, side)
}

pub fn gaussian_periodic_with_basis(
    m: &EvenCircleMeasure,
    basis: &OpucBasis,
    lambda: f64,
    side: Side,
) -> Result<PeriodicExtremal> {
    check_lambda(lambda)?;
    let nodes = basis.nodes(side);
    let vd: Vec<(f64, f64)> = nodes.iter().map(|&x| theta3_with_derivative(x, lambda)).collect::<Result<_>>()?;
    let values: Vec<f64> = vd.iter().map(|v| v.0).collect();
    let derivs: Vec<f64> = vd.iter().map(|v| v.1).collect();
    let (poly, kept, dropped) = hermite_fit(basis, side, &values, &derivs)?;
    finish(m, basis, side, poly, &values, kept, dropped, |x| theta3(x, lambda), VERIFY_GRID)
}

/// `h_λ(x) = θ(x, λ) − θ(1/2, λ)` and its derivative, written in
/// `t = x − 1/2` without cancellation near `t = 0`.
pub fn h_lambda(x: f64, lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    let t = x - x.floor() - 0.5;
    let (mut h, mut d) = (0.0, 0.0);
    if lambda >= 1.0 {
        // Gaussians at j and 1 − j paired: 2e^{−πλc²}(e^{−πλt²}cosh(2πλct) − 1), c = j − 1/2
        let a = PI * lambda * t * t;
        let ea = (-a).exp();
        let em1 = (-a).exp_m1();
        let mut c = 0.5;
        loop {
            let e = (-PI * lambda * c * c).exp();
            let b = 2.0 * PI * lambda * c * t;
            let (ch, sh, hv) = if b.abs() < 1.0 {
                let (ch, sh) = (b.cosh(), b.sinh());
                let s2 = (0.5 * b).sinh();
                (e * ea * ch, e * ea * sh, e * (em1 * ch + 2.0 * s2 * s2))
            } else {
                let (m, p) = ((-PI * lambda * (t - c).powi(2)).exp(), (-PI * lambda * (t + c).powi(2)).exp());
                (0.5 * (m + p), 0.5 * (m - p), 0.5 * (m + p) - e)
            };
            h += 2.0 * hv;
            d += 2.0 * (2.0 * PI * lambda * c * sh - 2.0 * PI * lambda * t * ch);
            if e <= 1e-18 * (1.0 + h.abs()) && c > 1.0 + t.abs() {
                break;
            }
            c += 1.0;
        }
    } else {
        let s = lambda.powf(-0.5);
        let mut n = 1.0f64;
        let mut sign = -1.0;
        loop {
            let e = (-PI * n * n / lambda).exp();
            let sn = (PI * n * t).sin();
            h -= 4.0 * s * sign * e * sn * sn;
            d -= 4.0 * PI * n * s * sign * e * (2.0 * PI * n * t).sin();
            if e <= 1e-18 || e == 0.0 {
                break;
            }
            n += 1.0;
            sign = -sign;
        }
    }
    Ok((h, d))
}

/// `h_ς(x) = ∫ {θ(x, λ) − θ(1/2, λ)} dς(λ)`.
pub fn h_varsigma(vs: &SubordinationMeasure, x: f64) -> Result<f64> {
    Ok(h_varsigma_with_derivative(vs, x, false)?.0)
}

fn h_varsigma_with_derivative(vs: &SubordinationMeasure, x: f64, deriv: bool) -> Result<(f64, f64)> {
    let map = |e: Error| match e {
        Error::Divergent(msg) => Error::Domain(format!("h diverges at x = {x}: {msg}")),
        e => e,
    };
    let v = vs.integrate(|l| Ok(h_lambda(x, l)?.0)).map_err(map)?.value;
    let d = if deriv { vs.integrate(|l| Ok(h_lambda(x, l)?.1)).map_err(map)?.value } else { 0.0 };
    Ok((v, d))
}

/// Grid size for the one-sidedness check of subordinated polynomials.
pub const SUBORDINATED_VERIFY_GRID: usize = 1000;

/// Optimal degree-`n` one-sided polynomial for `h_ς`. The coefficients
/// are `∫ a_k(n, λ) dς(λ)`; since the Hermite matrix does not depend on λ
/// this integrates the right-hand side.
pub fn subordinated_periodic_extremal(
    m: &EvenCircleMeasure,
    n: usize,
    vs: &SubordinationMeasure,
    side: Side,
) -> Result<PeriodicExtremal> {
    let basis = opuc(m, n)?;
    subordinated_periodic_with_basis(m, &basis, vs, side, SUBORDINATED_VERIFY_GRID)
}

pub fn subordinated_periodic_with_basis(
    m: &EvenCircleMeasure,
    basis: &OpucBasis,
    vs: &SubordinationMeasure,
    side: Side,
    grid: usize,
) -> Result<PeriodicExtremal> {
    let nodes = basis.nodes(side).to_vec();
    let mut values = Vec::with_capacity(nodes.len());
    let mut derivs = Vec::with_capacity(nodes.len());
    for (i, &x) in nodes.iter().enumerate() {
        let skip_derivative = side == Side::Plus && i == 0;
        let (v, d) = h_varsigma_with_derivative(vs, x, !skip_derivative)?;
        values.push(v);
        derivs.push(d);
    }
    let (poly, kept, dropped) = hermite_fit(basis, side, &values, &derivs)?;
    let target = |x: f64| -> Result<f64> {
        if side == Side::Minus && (x - x.round()).abs() < 1e-12 {
            // h may be +∞ at the integers; a minorant is unconstrained there
            return Ok(f64::INFINITY);
        }
        h_varsigma(vs, x)
    };
    let mut r = finish(m, basis, side, poly, &values, kept, dropped, target, grid)?;
    if side == Side::Minus && r.min_slack.is_infinite() {
        r.min_slack = f64::INFINITY;
    }
    Ok(r)
}

/// Linear combination `Σ w_i P_i` of polynomials of the same degree.
pub fn combine(parts: &[(f64, &TrigPolynomial)]) -> Result<TrigPolynomial> {
    let (_, first) = parts.first().ok_or_else(|| Error::InvalidParameter("nothing to combine".into()))?;
    let mut acc = TrigPolynomial { degree: first.degree, coeffs: vec![Complex64::new(0.0, 0.0); first.coeffs.len()] };
    for (w, p) in parts {
        if p.degree != acc.degree {
            return Err(Error::InvalidParameter("degrees differ".into()));
        }
        acc = acc.scaled_add(*w, p);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    // mpmath: Σ e^{−πn²}, 2Σ e^{−π(n+1/2)²}, Σ e^{−π(n+1/4)²}
    const THETA_0: f64 = 1.08643481121330801457531612151;
    const THETA_HALF: f64 = 0.913579138156116821906885410893;
    const THETA_QUARTER: f64 = 0.999993025315287907290153958546;

    fn test_density() -> EvenCircleMeasure {
        EvenCircleMeasure::from_density(|x| 1.0 + 0.3 * (2.0 * PI * x).cos()).unwrap()
    }

    #[test]
    fn theta_reference_values() {
        assert!((theta3(0.0, 1.0).unwrap() - THETA_0).abs() < 1e-15);
        assert!((theta3(0.5, 1.0).unwrap() - THETA_HALF).abs() < 1e-15);
        assert!((theta3(0.25, 1.0).unwrap() - THETA_QUARTER).abs() < 1e-15);
        assert!((theta3(0.25, 1.0).unwrap() - theta3(-0.25, 1.0).unwrap()).abs() < 1e-16);
        assert!((theta3(1.25, 1.0).unwrap() - THETA_QUARTER).abs() < 1e-15);
    }

    #[test]
    fn theta_series_agree_at_the_seam() {
        for lambda in [0.7, 1.0, 1.4] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let (a, da) = theta3_direct(x, lambda);
                let (b, db) = theta3_dual(x, lambda);
                assert!((a - b).abs() < 1e-13, "{lambda} {x}");
                assert!((da - db).abs() < 1e-12, "{lambda} {x}");
            }
        }
    }

    #[test]
    fn theta_mean_is_gaussian_mass() {
        for lambda in [0.3, 4.0] {
            let q = quad::adaptive_fn(|x| theta3(x, lambda).unwrap(), 0.0, 1.0, Tolerance::default()).unwrap();
            assert!((q.value - lambda.powf(-0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn theta_derivative_by_differences() {
        let h = 1e-6;
        for (x, l) in [(0.1, 0.5), (0.37, 2.0), (0.8, 9.0)] {
            let fd = (theta3(x + h, l).unwrap() - theta3(x - h, l).unwrap()) / (2.0 * h);
            let d = theta3_with_derivative(x, l).unwrap().1;
            assert!((fd - d).abs() < 1e-7 * d.abs().max(1.0));
        }
    }

    #[test]
    fn lebesgue_basis_is_monomial() {
        for n in [0, 1, 3, 6] {
            let b = opuc(&EvenCircleMeasure::lebesgue(), n).unwrap();
            for (j, v) in b.phi.iter().enumerate() {
                let e = if j == n + 1 { 1.0 } else { 0.0 };
                assert!((v - e).abs() < 1e-14);
            }
            let m = (n + 1) as f64;
            for (k, x) in b.nodes_a.iter().enumerate() {
                assert!((x - (2 * k + 1) as f64 / (2.0 * m)).abs() < 1e-14);
            }
            for (k, x) in b.nodes_b.iter().enumerate() {
                assert!((x - k as f64 / m).abs() < 1e-14);
            }
            for xi in [0.0, 0.17, 0.5] {
                assert!((kernel_diag_circle(&b, xi) - m).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn density_basis_properties() {
        let m = test_density();
        let b = opuc(&m, 4).unwrap();
        // orthonormality through the moments
        let c: Vec<f64> = (0..=6).map(|k| m.moment(k).unwrap()).collect();
        assert!((c[1] - 0.15).abs() < 1e-13 && c[2].abs() < 1e-13);
        for (i, p) in b.family.iter().enumerate() {
            for (j, q) in b.family.iter().enumerate() {
                let mut s = 0.0;
                for (a, u) in p.iter().enumerate() {
                    for (bb, v) in q.iter().enumerate() {
                        s += u * v * c[a.abs_diff(bb)];
                    }
                }
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-12, "{i} {j}: {s}");
            }
            assert!(p.last().unwrap() > &0.0);
        }
        assert_eq!(b.nodes_a.len(), 5);
        assert_eq!(b.nodes_b.len(), 5);
        assert_eq!(b.nodes_b[0], 0.0);
        for x in &b.nodes_a {
            assert!(b.nodes_b.iter().all(|y| (x - y).abs() > 1e-6));
        }
        // symmetric under ξ ↦ 1 − ξ
        for x in &b.nodes_a {
            assert!(b.nodes_a.iter().any(|y| (1.0 - x - y).abs() < 1e-12));
        }
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            assert!(kernel_diag_circle(&b, rng.random::<f64>()) > 0.0);
        }
        for (w, z) in [(0.1, 0.3), (0.45, 0.9), (0.0, 0.77)] {
            let (w, z) = (unit(w), unit(z) * 0.9);
            let a = b.kernel_cd(w, z);
            let s = b.kernel_sum(w, z);
            assert!((a - s).norm() < 1e-10 * s.norm().max(1.0));
        }
    }

    #[test]
    fn nodes_for_many_degrees() {
        let m = test_density();
        for n in [0, 1, 2, 5, 12, 20, 32] {
            let b = opuc(&m, n).unwrap();
            assert_eq!(b.nodes_a.len(), n + 1);
            assert_eq!(b.nodes_b.len(), n + 1);
            for x in &b.nodes_a {
                assert!(b.nodes_b.iter().all(|y| (x - y).abs() > 1e-9));
            }
        }
    }

    #[test]
    fn lebesgue_degree_one_values() {
        let m = EvenCircleMeasure::lebesgue();
        let lo = gaussian_periodic_extremal(&m, 1, 1.0, Side::Minus).unwrap();
        assert!((lo.integral - THETA_QUARTER).abs() < 1e-12, "{}", lo.integral);
        let hi = gaussian_periodic_extremal(&m, 1, 1.0, Side::Plus).unwrap();
        assert!((hi.integral - 0.5 * (THETA_0 + THETA_HALF)).abs() < 1e-12, "{}", hi.integral);
        assert!(lo.min_slack >= -1e-10 && hi.min_slack >= -1e-10);
        assert!(lo.kept_residual < 1e-10 && hi.kept_residual < 1e-10);
        assert_eq!(hi.poly.coefficient(2), Complex64::new(0.0, 0.0));
        for k in -1i64..=1 {
            assert_eq!(lo.poly.coefficient(k).im, 0.0);
            assert_eq!(lo.poly.coefficient(k), lo.poly.coefficient(-k));
        }
    }

    #[test]
    fn value_formula_matches_integral() {
        let measures = [EvenCircleMeasure::lebesgue(), test_density()];
        for m in &measures {
            for n in [1, 2, 4, 7] {
                for lambda in [0.2, 1.0, 5.0] {
                    for side in [Side::Minus, Side::Plus] {
                        let r = gaussian_periodic_extremal(m, n, lambda, side).unwrap();
                        assert!((r.integral - r.value_formula).abs() < 1e-10, "n={n} λ={lambda} {side:?}");
                        assert!(r.min_slack >= -1e-10);
                        assert!(r.kept_residual < 1e-10);
                        assert!(r.dropped_residual < 1e-8, "dropped {}", r.dropped_residual);
                    }
                }
            }
        }
    }

    #[test]
    fn perturbed_competitors_are_worse() {
        let m = test_density();
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        for side in [Side::Minus, Side::Plus] {
            let opt = gaussian_periodic_extremal(&m, 3, 1.5, side).unwrap();
            for _ in 0..20 {
                let c: Vec<f64> = (0..3).map(|_| rng.random_range(-0.02..0.02)).collect();
                let s: Vec<f64> = (0..3).map(|_| rng.random_range(-0.02..0.02)).collect();
                let r = TrigPolynomial::from_cos_sin(0.0, &c, &s);
                let q = combine(&[(1.0, &opt.poly), (1.0, &r)]).unwrap();
                // shift to feasibility on a fine grid
                let mut worst = f64::NEG_INFINITY;
                for i in 0..4000 {
                    let x = i as f64 / 4000.0;
                    let d = q.eval(x) - theta3(x, 1.5).unwrap();
                    worst = worst.max(if side == Side::Minus { d } else { -d });
                }
                let shift = if side == Side::Minus { -worst.max(0.0) } else { worst.max(0.0) };
                let val = m.integrate(&q).unwrap() + shift;
                match side {
                    Side::Minus => assert!(val <= opt.integral + 1e-12),
                    Side::Plus => assert!(val >= opt.integral - 1e-12),
                }
            }
        }
    }

    #[test]
    fn samples_and_moments_constructors() {
        let w: Vec<f64> = (0..64).map(|i| 1.0 + 0.3 * (2.0 * PI * i as f64 / 64.0).cos()).collect();
        let m = EvenCircleMeasure::from_samples(&w).unwrap();
        assert!((m.moment(1).unwrap() - 0.15).abs() < 1e-14);
        let mut odd = w.clone();
        odd[3] += 0.5;
        assert!(EvenCircleMeasure::from_samples(&odd).is_err());
        assert!(EvenCircleMeasure::from_moments(vec![0.5]).is_err());
        let short = EvenCircleMeasure::from_moments(vec![1.0, 0.1]).unwrap();
        assert!(opuc(&short, 1).is_err());
        assert!(EvenCircleMeasure::from_density(|x| 1.0 + x).is_err());
    }

    #[test]
    fn h_lambda_matches_difference() {
        for lambda in [0.05, 0.6, 1.0, 2.5, 40.0] {
            let c = theta3(0.5, lambda).unwrap();
            for i in 0..40 {
                let x = -1.3 + i as f64 * 0.0917;
                let (h, d) = h_lambda(x, lambda).unwrap();
                let (v, dv) = theta3_with_derivative(x, lambda).unwrap();
                assert!((h - (v - c)).abs() < 1e-14 * c.max(1.0), "λ={lambda} x={x}: {h} {}", v - c);
                assert!((d - dv).abs() < 1e-12 * lambda.max(1.0), "λ={lambda} x={x}: {d} {dv}");
            }
            // second-order behaviour at 1/2
            let eps = 1e-9;
            let (h, _) = h_lambda(0.5 + eps, lambda).unwrap();
            let (h2, _) = h_lambda(0.5 + 2.0 * eps, lambda).unwrap();
            assert!(h > 0.0 && (h2 / h - 4.0).abs() < 1e-6, "λ={lambda}: {h} {h2}");
        }
    }

    #[test]
    fn h_varsigma_basics() {
        let pt = SubordinationMeasure::point_mass(1.0).unwrap();
        for x in [0.1, 0.3, 0.5, 0.8] {
            let h = h_varsigma(&pt, x).unwrap();
            assert!((h - (theta3(x, 1.0).unwrap() - THETA_HALF)).abs() < 1e-15);
            assert!((h - h_varsigma(&pt, -x).unwrap()).abs() < 1e-15);
        }
        let pw = SubordinationMeasure::power(1.0).unwrap();
        assert_eq!(h_varsigma(&pw, 0.5).unwrap(), 0.0);
        assert!((h_varsigma(&pw, 0.2).unwrap() - h_varsigma(&pw, -0.2).unwrap()).abs() < 1e-12);
        // λ^{-3/2}: h(0) = ∫ (θ(0,λ) − θ(1/2,λ)) λ^{-3/2} dλ is finite
        assert!(h_varsigma(&pw, 0.0).unwrap().is_finite());
        // λ^{-1/2} has infinite mass at ∞, so h(0) diverges
        let heavy = SubordinationMeasure::power(-1.0).unwrap();
        assert!(matches!(h_varsigma(&heavy, 0.0), Err(Error::Domain(_))));
        assert!(h_varsigma(&heavy, 0.25).unwrap().is_finite());
    }

    #[test]
    fn subordinated_point_mass_and_linearity() {
        let m = test_density();
        let basis = opuc(&m, 2).unwrap();
        for side in [Side::Minus, Side::Plus] {
            let pt = SubordinationMeasure::point_mass(0.7).unwrap();
            let s = subordinated_periodic_with_basis(&m, &basis, &pt, side, 200).unwrap();
            let g = gaussian_periodic_with_basis(&m, &basis, 0.7, side).unwrap();
            let shift = theta3(0.5, 0.7).unwrap();
            assert!((s.poly.coeffs[2].re - (g.poly.coeffs[2].re - shift)).abs() < 1e-12);
            for k in [1i64, 2] {
                assert!((s.poly.coefficient(k) - g.poly.coefficient(k)).norm() < 1e-12);
            }
            let two = SubordinationMeasure::finite_table(vec![(0.7, 0.25), (3.0, 2.0)]).unwrap();
            let s2 = subordinated_periodic_with_basis(&m, &basis, &two, side, 200).unwrap();
            let g2 = gaussian_periodic_with_basis(&m, &basis, 3.0, side).unwrap();
            let expect = combine(&[(0.25, &g.poly), (2.0, &g2.poly)]).unwrap();
            let c0 = 0.25 * shift + 2.0 * theta3(0.5, 3.0).unwrap();
            for k in -2i64..=2 {
                let mut e = expect.coefficient(k);
                if k == 0 {
                    e -= c0;
                }
                assert!((s2.poly.coefficient(k) - e).norm() < 1e-12, "{side:?} k={k}");
            }
        }
    }

    #[test]
    fn subordinated_value_identity() {
        let m = EvenCircleMeasure::lebesgue();
        let pw = SubordinationMeasure::power(1.0).unwrap();
        for side in [Side::Minus, Side::Plus] {
            let r = subordinated_periodic_extremal(&m, 2, &pw, side).unwrap();
            assert!((r.integral - r.value_formula).abs() < 1e-8, "{side:?}: {} vs {}", r.integral, r.value_formula);
            assert!(r.min_slack >= -1e-9, "{side:?}: {}", r.min_slack);
        }
    }
}
