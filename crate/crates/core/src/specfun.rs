//! Structure functions `A_ν`, `B_ν`, their zeros and the reproducing kernel
//! diagonal of the homogeneous de Branges space.
//!
//! `A_ν(z) = Γ(ν+1)(z/2)^{-ν} J_ν(z)` and `B_ν(z) = Γ(ν+1)(z/2)^{-ν} J_{ν+1}(z)`.
//! Small and moderate arguments use the normalized functions
//! `a_n(z) = Γ(ν+n+1)(z/2)^{-ν-n} J_{ν+n}(z)`, which satisfy
//! `a_{n-1} = a_n - (z²/4) a_{n+1} / ((ν+n)(ν+n+1))`; the recurrence is run
//! downward from an index where the power series is benign. Large arguments
//! use the Hankel expansion.

use crate::error::{Error, Result};
use num_complex::{Complex64, ComplexFloat};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `Γ(x)`; finite at negative non-integers.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `ln |Γ(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// The index ν of the homogeneous space and its derived constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousParameter {
    pub nu: f64,
    /// `π 2^{-2ν-1} Γ(ν+1)^{-2}`.
    pub c_nu: f64,
    /// `⌈2ν+2⌉`.
    pub big_n_nu: u32,
    gamma_nu1: f64,
    hankel_radius: f64,
}

impl HomogeneousParameter {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= -1.0 {
            return Err(Error::InvalidParameter(format!("nu must be > -1, got {nu}")));
        }
        let c_nu = (PI.ln() - (2.0 * nu + 1.0) * std::f64::consts::LN_2 - 2.0 * ln_gamma(nu + 1.0)).exp();
        let big_n_nu = (2.0 * nu + 2.0).ceil() as u32;
        Ok(HomogeneousParameter {
            nu,
            c_nu,
            big_n_nu,
            gamma_nu1: gamma(nu + 1.0),
            hankel_radius: 25f64.max(1.5 * (nu + 1.0) * (nu + 1.0)),
        })
    }

    /// `Γ(ν+1)`.
    pub fn gamma_nu1(&self) -> f64 {
        self.gamma_nu1
    }

    /// `A_ν(x)` for real `x`.
    pub fn a(&self, x: f64) -> f64 {
        structure_real(self, x).a
    }

    /// `B_ν(x)` for real `x`.
    pub fn b(&self, x: f64) -> f64 {
        structure_real(self, x).b
    }
}

/// `A_ν`, `B_ν` and the regular quotient `B_ν(z)/z` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureValues<T> {
    pub a: T,
    pub b: T,
    pub b_over_z: T,
}

/// Real or complex double-precision scalar.
pub trait Scalar: ComplexFloat<Real = f64> + From<f64> {
    fn lift(x: f64) -> Self {
        <Self as From<f64>>::from(x)
    }
}
impl<T: ComplexFloat<Real = f64> + From<f64>> Scalar for T {}

/// `Σ_k (-q)^k / (k! (s)_k)`.
fn series<T: Scalar>(s: f64, q: T) -> T {
    let mut term = T::lift(1.0);
    let mut sum = term;
    let qa = q.abs();
    for k in 1..2000 {
        let kf = k as f64;
        term = term * (-q) / T::lift(kf * (s + kf - 1.0));
        sum = sum + term;
        if kf > qa && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `(a_0(z), a_1(z))`.
fn normalized_pair<T: Scalar>(nu: f64, z: T) -> (T, T) {
    let q = z * z * T::lift(0.25);
    let rq = q.abs();
    if rq <= 1.0 {
        return (series(nu + 1.0, q), series(nu + 2.0, q));
    }
    let top = rq.ceil() as usize + 8;
    let mut above = series(nu + top as f64 + 2.0, q);
    let mut cur = series(nu + top as f64 + 1.0, q);
    for n in (1..=top).rev() {
        let mu = nu + n as f64;
        let prev = cur - q * above / T::lift(mu * (mu + 1.0));
        above = cur;
        cur = prev;
    }
    (cur, above)
}

/// Hankel's `P_μ(z)`, `Q_μ(z)` with optimal truncation.
fn hankel_pq<T: Scalar>(mu: f64, z: T) -> (T, T) {
    let four_mu2 = 4.0 * mu * mu;
    let mut p = T::lift(1.0);
    let mut q = T::lift(0.0);
    let mut term = T::lift(1.0);
    let mut last = f64::INFINITY;
    for k in 1..400usize {
        let odd = (2 * k - 1) as f64;
        term = term * T::lift((four_mu2 - odd * odd) / (8.0 * k as f64)) / z;
        let ta = term.abs();
        if ta > last {
            break;
        }
        match k % 4 {
            0 => p = p + term,
            1 => q = q + term,
            2 => p = p - term,
            _ => q = q - term,
        }
        last = ta;
        if ta <= 1e-17 * (p.abs() + q.abs()) {
            break;
        }
    }
    (p, q)
}

/// `sqrt(2/(πz)) (P cos ω − Q sin ω)` with `ω = z − (μ/2 + 1/4)π`.
fn hankel_j<T: Scalar>(mu: f64, z: T) -> T {
    let (p, q) = hankel_pq(mu, z);
    let w = z - T::lift((0.5 * mu + 0.25) * PI);
    (T::lift(2.0 / PI) / z).sqrt() * (p * w.cos() - q * w.sin())
}

fn structure<T: Scalar>(p: &HomogeneousParameter, z: T) -> StructureValues<T> {
    let nu = p.nu;
    let flip = z.re() < 0.0 || (z.re() == 0.0 && z.im() < 0.0);
    let zz = if flip { -z } else { z };
    let r = zz.abs();
    let (a, b, b_over_z) = if r < p.hankel_radius {
        let (a0, a1) = normalized_pair(nu, zz);
        let bz = a1 * T::lift(0.5 / (nu + 1.0));
        (a0, zz * bz, bz)
    } else {
        let pref = T::lift(p.gamma_nu1) * (zz * T::lift(0.5)).powf(-nu);
        let a = pref * hankel_j(nu, zz);
        let b = pref * hankel_j(nu + 1.0, zz);
        (a, b, b / zz)
    };
    StructureValues { a, b: if flip { -b } else { b }, b_over_z }
}

/// `A_ν(x)`, `B_ν(x)`, `B_ν(x)/x` for real `x`. Parity is exact: the
/// evaluation always happens at `|x|`.
pub fn structure_real(p: &HomogeneousParameter, x: f64) -> StructureValues<f64> {
    structure(p, x)
}

/// `A_ν(z)`, `B_ν(z)`, `B_ν(z)/z` for complex `z`.
pub fn structure_complex(p: &HomogeneousParameter, z: Complex64) -> Result<StructureValues<Complex64>> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite argument {z}")));
    }
    if z.im.abs() > 700.0 {
        return Err(Error::Range(format!("|Im z| = {} overflows e^|Im z|", z.im.abs())));
    }
    let v = structure(p, z);
    for c in [v.a, v.b, v.b_over_z] {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Range(format!("structure functions overflow at z = {z}")));
        }
    }
    Ok(v)
}

pub fn eval_a(p: &HomogeneousParameter, z: Complex64) -> Result<Complex64> {
    Ok(structure_complex(p, z)?.a)
}

pub fn eval_b(p: &HomogeneousParameter, z: Complex64) -> Result<Complex64> {
    Ok(structure_complex(p, z)?.b)
}

/// `E_ν(z) = A_ν(z) − i B_ν(z)`.
pub fn eval_e(p: &HomogeneousParameter, z: Complex64) -> Result<Complex64> {
    let v = structure_complex(p, z)?;
    Ok(v.a - Complex64::i() * v.b)
}

/// `J_μ(x)` for real `x ≥ 0` and `μ > −1`, through `A_μ`.
pub fn bessel_j(mu: f64, x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain("bessel_j needs x >= 0".into()));
    }
    let p = HomogeneousParameter::new(mu)?;
    if x == 0.0 {
        return Ok(if mu == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(p.a(x) * (0.5 * x).powf(mu) / p.gamma_nu1)
}

/// `K_ν(ξ, ξ) = (A² + B² − (2ν+1) A B/ξ)/π`.
pub fn kernel_diag(p: &HomogeneousParameter, xi: f64) -> f64 {
    if xi == 0.0 {
        return 1.0 / (2.0 * PI * (p.nu + 1.0));
    }
    let v = structure_real(p, xi.abs());
    (v.a * v.a + v.b * v.b - (2.0 * p.nu + 1.0) * v.a * v.b_over_z) / PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ZeroKind {
    A,
    B,
}

impl ZeroKind {
    pub fn name(self) -> &'static str {
        match self {
            ZeroKind::A => "A",
            ZeroKind::B => "B",
        }
    }
}

/// The first positive zeros of `A_ν` or `B_ν`, with the quadrature weights
/// `1/(c_ν K_ν(ξ,ξ))` attached. The zero of `B_ν` at the origin is not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroTable {
    pub nu: f64,
    pub kind: ZeroKind,
    pub zeros: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ZeroTable {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// Bound on `Σ_{|ξ| beyond the stored zeros} e^{−πλξ²}/(c K(ξ,ξ))`,
    /// both signs of ξ included.
    pub fn tail_estimate(&self, lambda: f64) -> f64 {
        self.tail_after(self.zeros.len(), lambda)
    }

    /// Same bound for the zeros with index ≥ `used` (0-based), i.e. the
    /// terms left out when only the first `used` zeros are summed.
    pub fn tail_after(&self, used: usize, lambda: f64) -> f64 {
        let m = self.zeros.len();
        if used == 0 || m < 2 {
            return f64::INFINITY;
        }
        // The bound below integrates from the last zero that was summed
        // (or the last stored zero) outward.
        let k = used.min(m) - 1;
        let x0 = self.zeros[k];
        let nu = self.nu;
        let s = nu + 1.0;
        let y = PI * lambda * x0 * x0;
        // x^{2ν+1} e^{−πλx²} must be decreasing beyond x0
        if y <= nu + 0.5 {
            return f64::INFINITY;
        }
        let h = if k >= 1 { (self.zeros[k] - self.zeros[k - 1]).min(PI) } else { x0.min(PI) };
        let ratio = self.weights[k] / (PI * x0.powf(2.0 * nu + 1.0));
        let envelope = 1.25 * ratio.max(1.0);
        // Γ(s, y) ≤ y^{s−1} e^{−y} / (1 − max(s−1,0)/y)
        let sm1 = (s - 1.0).max(0.0);
        if y <= sm1 + 1.0 {
            return f64::INFINITY;
        }
        let ln_upper = (s - 1.0) * y.ln() - y - (1.0 - sm1 / y).ln();
        let ln_int = ln_upper - std::f64::consts::LN_2 - s * (PI * lambda).ln();
        let tail = 2.0 * envelope * (PI / h) * ln_int.exp();
        if used > m {
            f64::INFINITY
        } else {
            tail
        }
    }
}

struct Refine<'a> {
    p: &'a HomogeneousParameter,
    kind: ZeroKind,
}

impl Refine<'_> {
    fn value(&self, x: f64) -> f64 {
        let v = structure_real(self.p, x);
        match self.kind {
            ZeroKind::A => v.a,
            ZeroKind::B => v.b,
        }
    }

    fn value_and_derivative(&self, x: f64) -> (f64, f64) {
        let v = structure_real(self.p, x);
        match self.kind {
            ZeroKind::A => (v.a, -v.b),
            ZeroKind::B => (v.b, v.a - (2.0 * self.p.nu + 1.0) * v.b_over_z),
        }
    }

    fn newton(&self, mut lo: f64, mut hi: f64, guess: f64, index: usize) -> Result<f64> {
        let sign_lo = self.value(lo).signum();
        let mut x = if guess > lo && guess < hi { guess } else { 0.5 * (lo + hi) };
        for _ in 0..200 {
            let (fx, dfx) = self.value_and_derivative(x);
            if fx == 0.0 {
                return Ok(x);
            }
            if fx.signum() == sign_lo {
                lo = x;
            } else {
                hi = x;
            }
            let mut next = x - fx / dfx;
            if !next.is_finite() || next <= lo || next >= hi {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.max(1.0) || hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(next);
            }
            x = next;
        }
        Err(Error::ZeroNotConverged { kind: self.kind.name(), index })
    }
}

/// First `count` positive zeros of `A_ν` (kind A) or `B_ν` (kind B).
///
/// Zeros are bracketed by a forward sign-change scan and polished by
/// Newton's method started at McMahon's estimate, with bisection whenever
/// the Newton step leaves the bracket.
pub fn zeros(p: &HomogeneousParameter, kind: ZeroKind, count: usize) -> Result<ZeroTable> {
    if count == 0 {
        return Err(Error::InvalidParameter("zero count must be >= 1".into()));
    }
    let r = Refine { p, kind };
    let mu = match kind {
        ZeroKind::A => p.nu,
        ZeroKind::B => p.nu + 1.0,
    };
    let mut out = Vec::with_capacity(count);
    let (mut x0, mut h) = match kind {
        ZeroKind::A => (0.0, 0.05f64.min(0.25 * (p.nu + 1.0).sqrt())),
        ZeroKind::B => (1.0, 0.05),
    };
    let mut f0 = r.value(x0);
    let mut steps = 0usize;
    while out.len() < count {
        let x1 = x0 + h;
        let f1 = r.value(x1);
        steps += 1;
        if steps > 100_000 + 200 * count {
            return Err(Error::ZeroNotConverged { kind: kind.name(), index: out.len() + 1 });
        }
        if f1 == 0.0 || f0.signum() != f1.signum() {
            let m = out.len() + 1;
            let beta = (m as f64 + 0.5 * mu - 0.25) * PI;
            let guess = beta - (4.0 * mu * mu - 1.0) / (8.0 * beta);
            let z = if f1 == 0.0 { x1 } else { r.newton(x0, x1, guess, m)? };
            out.push(z);
            h = 0.1;
            x0 = x1;
            f0 = r.value(x0);
            if f0 == 0.0 {
                x0 += 1e-9;
                f0 = r.value(x0);
            }
            continue;
        }
        x0 = x1;
        f0 = f1;
    }
    let weights = out.iter().map(|&z| 1.0 / (p.c_nu * kernel_diag(p, z))).collect();
    Ok(ZeroTable { nu: p.nu, kind, zeros: out, weights })
}
