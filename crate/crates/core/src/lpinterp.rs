//! Laguerre–Pólya interpolation: frequency functions `g`, the transform
//! `𝒜(F, λ′, z)` and the Gaussian minorant / majorant evaluators built from
//! `F = A_ν(√·)²` and `F = B_ν(√·)²`.
//!
//! For `F(s) = s^k Π(1 − s/ξ_j)` the frequency function satisfies
//! `1/F(s) = ∫ g(t) e^{−st} dt` on the strip containing `0⁻`, and
//! `g(t) = −Σ Res_{s=ξ} e^{st}/F(s)` for `t < 0`, `g = 0` for `t > 0`.
//! Every evaluator is stored as that residue sum.

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{self, HomogeneousParameter, Scalar, ZeroKind};
use crate::Side;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default number of distinct zeros kept in a squared structure profile.
pub const DEFAULT_TRUNCATION: usize = 64;

/// One residue contribution `e^{rate·t}(c0 + c1·t)` to `g(t)` for `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueTerm {
    pub rate: f64,
    pub c0: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Finite,
    Squared { param: HomogeneousParameter, kind: ZeroKind, companion: Vec<f64> },
}

/// `F(s) = s^k Π_j (1 − s/ξ_j)` with a finite list of positive zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct LaguerrePolyaProfile {
    pub origin_order: u8,
    /// Zeros with multiplicity, nondecreasing.
    pub zeros: Vec<f64>,
    /// Number of distinct zeros.
    pub truncation_count: usize,
    /// Bound on `Σ 1/ξ_j` over the zeros that are not stored.
    pub reciprocal_tail: f64,
    source: Source,
}

impl LaguerrePolyaProfile {
    /// Profile given by an explicit zero list (entire, nothing omitted).
    pub fn finite(origin_order: u8, zeros: Vec<f64>) -> Result<Self> {
        if origin_order > 1 {
            return Err(Error::InvalidParameter("origin order must be 0 or 1".into()));
        }
        if zeros.iter().any(|z| !(z.is_finite() && *z > 0.0)) {
            return Err(Error::InvalidParameter("profile zeros must be positive and finite".into()));
        }
        if zeros.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("profile zeros must be nondecreasing".into()));
        }
        let truncation_count = distinct(&zeros).len();
        Ok(LaguerrePolyaProfile { origin_order, zeros, truncation_count, reciprocal_tail: 0.0, source: Source::Finite })
    }

    /// `A_ν(√s)²` (minorant, `k = 0`) or `B_ν(√s)²` (majorant, `k = 1`)
    /// with the first `m` distinct zeros stored.
    pub fn squared_structure(p: &HomogeneousParameter, side: Side, m: usize) -> Result<Self> {
        let kind = match side {
            Side::Minus => ZeroKind::A,
            Side::Plus => ZeroKind::B,
        };
        let table = specfun::zeros(p, kind, m)?;
        let companion: Vec<f64> = table
            .zeros
            .iter()
            .map(|&x| {
                let v = specfun::structure_real(p, x);
                match kind {
                    ZeroKind::A => v.b,
                    ZeroKind::B => v.a,
                }
            })
            .collect();
        let mut zeros = Vec::with_capacity(2 * m);
        for &x in &table.zeros {
            zeros.push(x * x);
            zeros.push(x * x);
        }
        // Σ 1/j_{μ,k}² = 1/(4(μ+1))
        let mu = match kind {
            ZeroKind::A => p.nu,
            ZeroKind::B => p.nu + 1.0,
        };
        let stored: f64 = table.zeros.iter().map(|x| 1.0 / (x * x)).sum();
        let reciprocal_tail = (2.0 * (0.25 / (mu + 1.0) - stored)).max(0.0);
        Ok(LaguerrePolyaProfile {
            origin_order: if side == Side::Minus { 0 } else { 1 },
            zeros,
            truncation_count: m,
            reciprocal_tail,
            source: Source::Squared { param: *p, kind, companion },
        })
    }

    /// `ε = +1` for `k = 0`, `−1` for `k = 1`.
    pub fn sign(&self) -> f64 {
        if self.origin_order == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Number of zeros counted with multiplicity, the origin included.
    pub fn degree(&self) -> usize {
        self.zeros.len() + self.origin_order as usize
    }

    /// Smallest positive zero.
    pub fn smallest_zero(&self) -> f64 {
        self.zeros[0]
    }

    pub fn is_structure(&self) -> bool {
        matches!(self.source, Source::Squared { .. })
    }

    /// `F(s)`; for structure profiles this is the full entire function.
    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        match &self.source {
            Source::Finite => {
                let mut v = if self.origin_order == 1 { s } else { Complex64::new(1.0, 0.0) };
                for &x in &self.zeros {
                    v *= 1.0 - s / x;
                }
                Ok(v)
            }
            Source::Squared { param, kind, .. } => {
                let v = specfun::structure_complex(param, s.sqrt())?;
                let f = match kind {
                    ZeroKind::A => v.a,
                    ZeroKind::B => v.b,
                };
                Ok(f * f)
            }
        }
    }

    /// `F(w)` for real `w`.
    pub fn eval_real(&self, w: f64) -> Result<f64> {
        match &self.source {
            Source::Squared { param, kind, .. } if w >= 0.0 => {
                let v = specfun::structure_real(param, w.sqrt());
                let f = match kind {
                    ZeroKind::A => v.a,
                    ZeroKind::B => v.b,
                };
                Ok(f * f)
            }
            _ => Ok(self.eval(Complex64::new(w, 0.0))?.re),
        }
    }

    /// Residue representation of `g` for `t < 0`.
    pub fn residues(&self) -> Result<Vec<ResidueTerm>> {
        if self.degree() < 2 {
            return Err(Error::UnsupportedDegree(self.degree()));
        }
        match &self.source {
            Source::Finite => finite_residues(self),
            Source::Squared { param, kind, companion } => {
                let nu1 = param.nu + 1.0;
                let mut out = Vec::with_capacity(companion.len() + 1);
                if *kind == ZeroKind::B {
                    out.push(ResidueTerm { rate: 0.0, c0: -4.0 * nu1 * nu1, c1: 0.0 });
                }
                for (j, s) in companion.iter().enumerate() {
                    let xi = self.zeros[2 * j];
                    let s2 = s * s;
                    out.push(ResidueTerm { rate: xi, c0: -4.0 * nu1 / s2, c1: -4.0 * xi / s2 });
                }
                Ok(out)
            }
        }
    }
}

fn distinct(zeros: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for &z in zeros {
        match out.last_mut() {
            Some((v, m)) if *v == z => *m += 1,
            _ => out.push((z, 1)),
        }
    }
    out
}

fn finite_residues(f: &LaguerrePolyaProfile) -> Result<Vec<ResidueTerm>> {
    let groups = distinct(&f.zeros);
    let k = f.origin_order as f64;
    let mut out = Vec::with_capacity(groups.len() + 1);
    if f.origin_order == 1 {
        out.push(ResidueTerm { rate: 0.0, c0: -1.0, c1: 0.0 });
    }
    for (j, &(xi, mult)) in groups.iter().enumerate() {
        // R(s) = s^{-k} Π_{i≠j} (1 − s/ξ_i)^{−m_i}
        let mut ln_abs = -k * xi.ln();
        let mut sign = 1.0;
        let mut dlog = -k / xi;
        for (i, &(xi_i, m_i)) in groups.iter().enumerate() {
            if i == j {
                continue;
            }
            let factor = 1.0 - xi / xi_i;
            ln_abs -= m_i as f64 * factor.abs().ln();
            if factor < 0.0 && m_i % 2 == 1 {
                sign = -sign;
            }
            dlog += m_i as f64 / (xi_i - xi);
        }
        let r = sign * ln_abs.exp();
        match mult {
            1 => out.push(ResidueTerm { rate: xi, c0: xi * r, c1: 0.0 }),
            2 => out.push(ResidueTerm { rate: xi, c0: -xi * xi * r * dlog, c1: -xi * xi * r }),
            m => return Err(Error::UnsupportedMultiplicity(m)),
        }
    }
    Ok(out)
}

/// How `g` is evaluated pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqMethod {
    /// Residue sum.
    PartialFraction,
    /// Numerical inversion along `Re s = −ρ`.
    Contour,
}

/// The frequency function `g_{0−}` of a profile.
#[derive(Debug, Clone)]
pub struct FrequencyFunction {
    pub profile: LaguerrePolyaProfile,
    pub method: FreqMethod,
    /// `ε`: `g` has the sign of `ε`.
    pub sign: f64,
    terms: Vec<ResidueTerm>,
    /// `g` is identically 0 on `(−flat_cut, 0)`.
    flat_cut: f64,
}

/// Width of the region next to `0⁻` where the structure frequency
/// functions are below `e^{-50}` of their peak: `g(t) ≍ |t|^{-β} e^{-1/|t|}`
/// with `β = 2ν + 5/2`.
pub fn flat_cut_for(nu: f64) -> f64 {
    let beta = 2.0 * nu + 2.5;
    let mut s = 64.0f64;
    while beta * (s / beta).ln() - s + beta > -50.0 {
        s += 1.0;
    }
    1.0 / s
}

/// Number of distinct zeros needed so that the omitted residues are below
/// `e^{−60}` on `t ≤ −τ`.
pub fn required_truncation(nu: f64) -> usize {
    let tau = flat_cut_for(nu);
    let a = (60.0 / tau).sqrt();
    ((a / PI).ceil() as usize + 4).max(DEFAULT_TRUNCATION)
}

impl FrequencyFunction {
    pub fn new(profile: LaguerrePolyaProfile, method: FreqMethod) -> Result<Self> {
        let terms = profile.residues()?;
        let flat_cut = match &profile.source {
            Source::Finite => 0.0,
            Source::Squared { param, .. } => {
                let tau = flat_cut_for(param.nu);
                let last = *profile.zeros.last().unwrap();
                tau.max(60.0 / last)
            }
        };
        let sign = profile.sign();
        Ok(FrequencyFunction { profile, method, sign, terms, flat_cut })
    }

    /// Frequency function of `A_ν(√s)²` or `B_ν(√s)²`.
    pub fn structure(p: &HomogeneousParameter, side: Side, m: usize) -> Result<Self> {
        Self::new(LaguerrePolyaProfile::squared_structure(p, side, m)?, FreqMethod::PartialFraction)
    }

    pub fn terms(&self) -> &[ResidueTerm] {
        &self.terms
    }

    pub fn flat_cut(&self) -> f64 {
        self.flat_cut
    }

    /// `g(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self.method {
            FreqMethod::PartialFraction => Ok(self.eval_residues(t)),
            FreqMethod::Contour => self.eval_contour(t),
        }
    }

    fn eval_residues(&self, t: f64) -> f64 {
        if t >= 0.0 || t > -self.flat_cut {
            return 0.0;
        }
        let mut s = 0.0;
        for r in &self.terms {
            s += (r.rate * t).exp() * (r.c0 + r.c1 * t);
        }
        if self.sign > 0.0 {
            s.max(0.0)
        } else {
            s.min(0.0)
        }
    }

    /// `g(t) = (e^{ct}/π) Re ∫_0^∞ e^{iyt}/F(c+iy) dy`, `c = −min(ξ_1/2, 1/|t|)`.
    fn eval_contour(&self, t: f64) -> Result<f64> {
        if t >= 0.0 {
            return Ok(0.0);
        }
        // e^{ct} amplifies rounding for large |t|, so |c t| is kept ≤ 1
        let c = -(0.5 * self.profile.smallest_zero()).min(1.0 / t.abs());
        let mut fmax = self.profile.eval(Complex64::new(c, 0.0))?.norm().recip();
        let mut ymax = 8.0 * c.abs().max(1.0);
        loop {
            let fy = self.profile.eval(Complex64::new(c, ymax))?.norm().recip();
            fmax = fmax.max(fy);
            if fy * ymax <= 1e-15 * fmax || ymax > 1e7 {
                break;
            }
            ymax *= 2.0;
        }
        let h = (PI / t.abs()).min(2.0).min(c.abs().max(0.05));
        let panels = (ymax / h).ceil() as usize;
        let rule = quad::rule32();
        let mut acc = 0.0;
        for k in 0..panels {
            let a = k as f64 * h;
            acc += rule.try_integrate(
                |y| {
                    let f = self.profile.eval(Complex64::new(c, y))?;
                    Ok((Complex64::new(0.0, y * t).exp() / f).re)
                },
                a,
                a + h,
            )?;
        }
        Ok((c * t).exp() / PI * acc)
    }

    /// `∫_0^{λ′} g(u − λ′) e^{−wu} du`.
    pub fn window_integral<T: Scalar>(&self, lambda_p: f64, w: T) -> Result<T> {
        match self.method {
            FreqMethod::PartialFraction => Ok(self.window_closed_form(lambda_p, w)),
            FreqMethod::Contour => self.window_panels(lambda_p, w),
        }
    }

    fn window_closed_form<T: Scalar>(&self, lambda_p: f64, w: T) -> T {
        let t1 = -self.flat_cut;
        let t0 = -lambda_p;
        if t0 >= t1 {
            return T::lift(0.0);
        }
        let delta = t1 - t0;
        let shift = w * T::lift(-lambda_p);
        let mut acc = T::lift(0.0);
        for r in &self.terms {
            let rr = T::lift(r.rate) - w;
            let c0 = T::lift(r.c0);
            let c1 = T::lift(r.c1);
            let d = T::lift(delta);
            acc = acc
                + if rr.re() >= 0.0 {
                    let x = -rr * d;
                    (rr * T::lift(t1) + shift).exp()
                        * ((c0 + c1 * T::lift(t1)) * d * phi1(x) - c1 * d * d * psi(x))
                } else {
                    let x = rr * d;
                    (rr * T::lift(t0) + shift).exp()
                        * ((c0 + c1 * T::lift(t0)) * d * phi1(x) + c1 * d * d * psi(x))
                };
        }
        acc
    }

    /// Composite Gauss–Legendre evaluation of the window integral, panels
    /// split geometrically toward `u = λ′`.
    pub fn window_panels<T: Scalar>(&self, lambda_p: f64, w: T) -> Result<T> {
        let rule = quad::rule32();
        let mut edges = vec![0.0];
        for j in 1..=40 {
            edges.push(lambda_p * (1.0 - 0.5f64.powi(j)));
        }
        edges.push(lambda_p);
        let per = (w.abs().max(1.0) * lambda_p / 4.0).ceil().max(1.0);
        let mut re = 0.0;
        let mut im = 0.0;
        for e in edges.windows(2) {
            let width = e[1] - e[0];
            let pieces = ((width / lambda_p) * per).ceil().max(1.0) as usize;
            let h = width / pieces as f64;
            for k in 0..pieces {
                let a = e[0] + k as f64 * h;
                let mut err = None;
                let mut f = |u: f64, part: usize| -> f64 {
                    match self.eval(u - lambda_p) {
                        Ok(g) => {
                            let v = T::lift(g) * (w * T::lift(-u)).exp();
                            if part == 0 {
                                v.re()
                            } else {
                                v.im()
                            }
                        }
                        Err(e) => {
                            err = Some(e);
                            0.0
                        }
                    }
                };
                re += rule.integrate(|u| f(u, 0), a, a + h);
                im += rule.integrate(|u| f(u, 1), a, a + h);
                if let Some(e) = err {
                    return Err(e);
                }
            }
        }
        let i = T::lift(-1.0).sqrt();
        let v = T::lift(re);
        // for real T the imaginary part is identically zero
        Ok(if im == 0.0 { v } else { v + i * T::lift(im) })
    }

    /// `∫_{−∞}^0 g(u − λ′) e^{−wu} du` for `Re w < 0`.
    fn left_integral(&self, lambda_p: f64, w: Complex64) -> Complex64 {
        let tu = (-lambda_p).min(-self.flat_cut);
        let mut acc = Complex64::new(0.0, 0.0);
        for r in &self.terms {
            let rr = r.rate - w;
            acc += (rr * tu - w * lambda_p).exp() * ((r.c0 + r.c1 * tu) / rr - r.c1 / (rr * rr));
        }
        acc
    }

    /// `𝒜(F, λ′, z) = e^{−λ′z} − F(z) ∫_0^{λ′} g(u−λ′) e^{−zu} du`,
    /// through the left-tail representation when `Re z < −1/4`.
    pub fn interp_transform(&self, lambda_p: f64, z: Complex64) -> Result<Complex64> {
        if !(lambda_p > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda' must be > 0, got {lambda_p}")));
        }
        let f = self.profile.eval(z)?;
        if z.re >= -0.25 || self.method == FreqMethod::Contour {
            Ok((-lambda_p * z).exp() - f * self.window_integral(lambda_p, z)?)
        } else {
            Ok(f * self.left_integral(lambda_p, z))
        }
    }

    /// `e^{−λ′x} − 𝒜(F, λ′, x) = F(x)·∫_0^{λ′} g(u−λ′)e^{−xu}du` for real `x`,
    /// with the integral clamped to the sign of `g`.
    pub fn interp_gap(&self, lambda_p: f64, x: f64) -> Result<f64> {
        let i = self.window_integral(lambda_p, x)?;
        let i = if self.sign > 0.0 { i.max(0.0) } else { i.min(0.0) };
        Ok(self.profile.eval_real(x)? * i)
    }
}

/// `∫_0^1 e^{xu} du`.
fn phi1<T: Scalar>(x: T) -> T {
    if x.abs() < 2.0 {
        let mut term = T::lift(1.0);
        let mut sum = term;
        for k in 1..60 {
            term = term * x / T::lift((k + 1) as f64);
            sum = sum + term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (x.exp() - T::lift(1.0)) / x
    }
}

/// `∫_0^1 u e^{xu} du`.
fn psi<T: Scalar>(x: T) -> T {
    if x.abs() < 2.0 {
        // Σ x^k / (k! (k+2))
        let mut fact = T::lift(1.0);
        let mut sum = T::lift(0.5);
        for k in 1..60 {
            fact = fact * x / T::lift(k as f64);
            let term = fact / T::lift((k + 2) as f64);
            sum = sum + term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (x.exp() * (x - T::lift(1.0)) + T::lift(1.0)) / (x * x)
    }
}

pub fn freq_eval(f: &FrequencyFunction, t: f64) -> Result<f64> {
    f.eval(t)
}

pub fn interp_transform(f: &FrequencyFunction, lambda_p: f64, z: Complex64) -> Result<Complex64> {
    f.interp_transform(lambda_p, z)
}

/// Pointwise minorant `L(A_ν², λ, ·)` or majorant `M(B_ν², λ, ·)` of
/// `e^{−πλx²}` of exponential type 2.
#[derive(Debug, Clone)]
pub struct ExtremalEvaluator {
    pub side: Side,
    pub lambda: f64,
    pub param: HomogeneousParameter,
    freq: Arc<FrequencyFunction>,
}

impl ExtremalEvaluator {
    pub fn new(p: &HomogeneousParameter, lambda: f64, side: Side) -> Result<Self> {
        Self::with_truncation(p, lambda, side, required_truncation(p.nu))
    }

    pub fn with_truncation(p: &HomogeneousParameter, lambda: f64, side: Side, m: usize) -> Result<Self> {
        let freq = Arc::new(FrequencyFunction::structure(p, side, m)?);
        Self::from_frequency(freq, lambda)
    }

    /// Reuse a structure frequency function; it does not depend on `λ`.
    pub fn from_frequency(freq: Arc<FrequencyFunction>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        let (param, side) = match &freq.profile.source {
            Source::Squared { param, kind, .. } => {
                (*param, if *kind == ZeroKind::A { Side::Minus } else { Side::Plus })
            }
            Source::Finite => {
                return Err(Error::InvalidParameter("evaluator needs a squared structure profile".into()))
            }
        };
        Ok(ExtremalEvaluator { side, lambda, param, freq })
    }

    pub fn frequency(&self) -> &Arc<FrequencyFunction> {
        &self.freq
    }

    pub fn gaussian(&self, x: f64) -> f64 {
        (-PI * self.lambda * x * x).exp()
    }

    /// `|e^{−πλx²} − E(x)|`, computed without cancellation. Vanishes at the
    /// interpolation nodes through the factor `A_ν(x)²` or `B_ν(x)²`.
    pub fn gap(&self, x: f64) -> f64 {
        let v = specfun::structure_real(&self.param, x);
        let s = match self.side {
            Side::Minus => v.a,
            Side::Plus => v.b,
        };
        let i = self.freq.window_closed_form(PI * self.lambda, x * x);
        match self.side {
            Side::Minus => s * s * i.max(0.0),
            Side::Plus => -s * s * i.min(0.0),
        }
    }

    /// The extremal function at real `x`.
    pub fn eval(&self, x: f64) -> f64 {
        match self.side {
            Side::Minus => self.gaussian(x) - self.gap(x),
            Side::Plus => self.gaussian(x) + self.gap(x),
        }
    }

    /// The extremal function at complex `z`.
    pub fn eval_complex(&self, z: Complex64) -> Result<Complex64> {
        let v = specfun::structure_complex(&self.param, z)?;
        let s = match self.side {
            Side::Minus => v.a,
            Side::Plus => v.b,
        };
        let w = z * z;
        let lp = PI * self.lambda;
        if w.re >= -0.25 {
            Ok((-lp * w).exp() - s * s * self.freq.window_closed_form(lp, w))
        } else {
            Ok(s * s * self.freq.left_integral(lp, w))
        }
    }
}

pub fn minorant_eval(p: &HomogeneousParameter, lambda: f64, x: f64, m: usize) -> Result<f64> {
    Ok(ExtremalEvaluator::with_truncation(p, lambda, Side::Minus, m)?.eval(x))
}

pub fn majorant_eval(p: &HomogeneousParameter, lambda: f64, x: f64, m: usize) -> Result<f64> {
    Ok(ExtremalEvaluator::with_truncation(p, lambda, Side::Plus, m)?.eval(x))
}

/// Largest relative change of the evaluator at five probe points when the
/// truncation is doubled from `m` to `2m`.
pub fn truncation_certificate(p: &HomogeneousParameter, lambda: f64, side: Side, m: usize) -> Result<f64> {
    let e1 = ExtremalEvaluator::with_truncation(p, lambda, side, m)?;
    let e2 = ExtremalEvaluator::with_truncation(p, lambda, side, 2 * m)?;
    let mut worst = 0.0f64;
    for x in [0.0, 0.37, 1.9, 4.4, 11.3] {
        let (a, b) = (e1.eval(x), e2.eval(x));
        worst = worst.max((a - b).abs() / b.abs().max(1e-300));
    }
    Ok(worst)
}
