//! Optimal values `U_ν^{N±}(δ, λ)` as sums over the zeros of `A_ν`, `B_ν`,
//! their scaling laws, and an independent weighted-quadrature check.

use crate::error::{Error, Result};
use crate::lpinterp::{required_truncation, ExtremalEvaluator};
use crate::quad::{self, Estimate, Tolerance};
use crate::specfun::{self, HomogeneousParameter, ZeroKind, ZeroTable};
use crate::Side;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalValue {
    pub nu: f64,
    pub dim: u32,
    pub delta: f64,
    pub lambda: f64,
    pub side: Side,
    pub value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadScheme {
    GaussLegendrePanels,
    TanhSinh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub scheme: QuadScheme,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { scheme: QuadScheme::GaussLegendrePanels, rel_tol: 1e-6, max_panels: 4000 }
    }
}

/// `∫ e^{−πλx²} |x|^{2ν+1} dx = Γ(ν+1)/(πλ)^{ν+1}`.
pub fn gaussian_weighted_norm(p: &HomogeneousParameter, lambda: f64) -> f64 {
    p.gamma_nu1() / (PI * lambda).powf(p.nu + 1.0)
}

fn kind_for(side: Side) -> ZeroKind {
    match side {
        Side::Minus => ZeroKind::A,
        Side::Plus => ZeroKind::B,
    }
}

/// Number of zeros after which `e^{−πλξ²}` weights drop below `e^{−50}`.
pub fn zeros_needed(nu: f64, lambda: f64) -> usize {
    let mut xi = (50.0 / (PI * lambda)).sqrt();
    for _ in 0..3 {
        let extra = ((2.0 * nu + 1.0) * xi.max(1.0).ln()).max(0.0);
        xi = ((50.0 + extra) / (PI * lambda)).sqrt();
    }
    (xi / PI).ceil() as usize + 4
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    Ok(())
}

/// `U_ν^{1±}(2, λ)`.
pub fn value_one_dim(p: &HomogeneousParameter, lambda: f64, side: Side) -> Result<ExtremalValue> {
    check_lambda(lambda)?;
    let mut count = zeros_needed(p.nu, lambda).max(8);
    loop {
        let table = specfun::zeros(p, kind_for(side), count)?;
        match value_with_table(p, lambda, side, &table) {
            Err(Error::NeedMoreZeros { .. }) if count < 1 << 20 => count *= 2,
            other => return other,
        }
    }
}

/// `U_ν^{1±}(2, λ)` using a precomputed zero table of the matching kind.
pub fn value_with_table(p: &HomogeneousParameter, lambda: f64, side: Side, table: &ZeroTable) -> Result<ExtremalValue> {
    check_lambda(lambda)?;
    if table.kind != kind_for(side) || table.nu != p.nu {
        return Err(Error::InvalidParameter("zero table does not match parameter and side".into()));
    }
    let norm = gaussian_weighted_norm(p, lambda);
    let mut sum = 0.0;
    let mut terms_used = 0;
    if side == Side::Plus {
        // ξ = 0 with 1/(c K(0,0)) = 2π(ν+1)/c
        sum += 2.0 * PI * (p.nu + 1.0) / p.c_nu;
        terms_used += 1;
    }
    let mut tail = f64::INFINITY;
    for (j, (xi, w)) in table.zeros.iter().zip(&table.weights).enumerate() {
        let arg = PI * lambda * xi * xi;
        let t = 2.0 * w * (-arg).exp();
        sum += t;
        terms_used += 1;
        if arg > p.nu + 0.5 && t <= 1e-14 * sum {
            tail = table.tail_after(j + 1, lambda);
            let value = (sum - norm).abs();
            if tail <= 1e-10 * value.max(1.0) {
                break;
            }
        }
    }
    let value = match side {
        Side::Minus => norm - sum,
        Side::Plus => sum - norm,
    };
    if !(tail <= 1e-10 * value.abs().max(1.0)) {
        return Err(Error::NeedMoreZeros { available: table.len(), tail });
    }
    let value = if value < 0.0 {
        if -value <= 1e-12 * norm.max(1.0) + tail {
            0.0
        } else {
            return Err(Error::Consistency(format!("negative optimal value {value:e}")));
        }
    } else {
        value
    };
    Ok(ExtremalValue { nu: p.nu, dim: 1, delta: 2.0, lambda, side, value, terms_used, tail_bound: tail })
}

/// `½ ω_{N−1} = π^{N/2}/Γ(N/2)`.
pub fn half_sphere_area(n: u32) -> f64 {
    PI.powf(0.5 * n as f64) / specfun::gamma(0.5 * n as f64)
}

fn check_scaled(delta: f64, n: u32) -> Result<()> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(())
}

/// `U_ν^{N±}(δ, λ) = ½ω_{N−1} (2/δ)^{2ν+2} U_ν^{1±}(2, (2/δ)²λ)`.
pub fn value_scaled(p: &HomogeneousParameter, delta: f64, lambda: f64, n: u32, side: Side) -> Result<ExtremalValue> {
    check_scaled(delta, n)?;
    check_lambda(lambda)?;
    let kappa = 2.0 / delta;
    let base = value_one_dim(p, kappa * kappa * lambda, side)?;
    Ok(rescale(p, base, delta, lambda, n))
}

pub(crate) fn rescale(p: &HomogeneousParameter, base: ExtremalValue, delta: f64, lambda: f64, n: u32) -> ExtremalValue {
    let kappa = 2.0 / delta;
    let factor = kappa.powf(2.0 * p.nu + 2.0) * half_sphere_area(n);
    ExtremalValue {
        dim: n,
        delta,
        lambda,
        value: base.value * factor,
        tail_bound: base.tail_bound * factor,
        ..base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    /// Analytic contribution beyond the last panel.
    pub tail: f64,
    pub panels: usize,
    /// Smallest integrand value met at any node (nonnegative by construction).
    pub min_integrand: f64,
}

/// Number of zero-to-zero panels integrated explicitly before the analytic
/// tail takes over (the last panel ends near x ≈ 1000).
const QUAD_PANELS: usize = 320;

/// `∫_ℝ |e^{−πλx²} − E(x)| |x|^{2ν+1} dx` for the extremal function `E`,
/// integrated panel by panel between consecutive zeros of the interpolating
/// structure function.
pub fn l1_error_quadrature(
    p: &HomogeneousParameter,
    lambda: f64,
    side: Side,
    q: &QuadratureSpec,
    m: usize,
) -> Result<QuadratureResult> {
    check_lambda(lambda)?;
    if !(q.rel_tol > 0.0 && q.rel_tol <= 1e-3) {
        return Err(Error::InvalidParameter(format!("rel_tol must be in (0, 1e-3], got {}", q.rel_tol)));
    }
    let e = ExtremalEvaluator::with_truncation(p, lambda, side, m)?;
    let table = specfun::zeros(p, kind_for(side), QUAD_PANELS)?;
    let scale = gaussian_weighted_norm(p, lambda);
    let s = 2.0 * p.nu + 2.0;
    let mut min_integrand = f64::INFINITY;
    let mut total = Estimate::ZERO;
    let tol = Tolerance {
        rel: 1e-3 * q.rel_tol,
        abs: 1e-4 * q.rel_tol * scale / QUAD_PANELS as f64,
        max_intervals: q.max_panels,
    };
    let mut lo = 0.0;
    for &hi in &table.zeros {
        let est = if lo == 0.0 && s < 1.0 {
            // u = x^{2ν+2}
            let f = |u: f64| {
                let v = 2.0 * e.gap(u.powf(1.0 / s)) / s;
                min_integrand = min_integrand.min(v);
                Ok(v)
            };
            match q.scheme {
                QuadScheme::GaussLegendrePanels => quad::adaptive(f, 0.0, hi.powf(s), tol)?,
                QuadScheme::TanhSinh => quad::tanh_sinh(f, 0.0, hi.powf(s), tol.rel)?,
            }
        } else {
            let f = |x: f64| {
                let v = 2.0 * e.gap(x) * x.powf(2.0 * p.nu + 1.0);
                min_integrand = min_integrand.min(v);
                Ok(v)
            };
            match q.scheme {
                QuadScheme::GaussLegendrePanels => quad::adaptive(f, lo, hi, tol)?,
                QuadScheme::TanhSinh => quad::tanh_sinh(f, lo, hi, tol.rel)?,
            }
        };
        total = total + est;
        lo = hi;
    }
    // Beyond the last zero X: S(x)² x^{2ν+1} averages to Γ(ν+1)² 2^{2ν}/π and
    // the oscillating remainder integrates to O(X^{−3}) between zeros.
    let x_end = lo;
    let lp = PI * lambda;
    let mut window = 0.0;
    for r in e.frequency().terms() {
        if r.rate * lp > 700.0 {
            continue;
        }
        if r.rate >= 0.9 * x_end * x_end {
            return Err(Error::NeedMoreZeros { available: table.len(), tail: f64::INFINITY });
        }
        let (f0, f1) = inverse_square_tails(x_end, r.rate);
        window += (-r.rate * lp).exp() * ((r.c0 - r.c1 * lp) * f0 + r.c1 * f1);
    }
    let amp = (2.0 * specfun::ln_gamma(p.nu + 1.0) + 2.0 * p.nu * std::f64::consts::LN_2).exp();
    let tail = 2.0 * amp / PI * window.abs();
    let mu = match side {
        Side::Minus => p.nu,
        Side::Plus => p.nu + 1.0,
    };
    let tail_error = tail * ((4.0 * mu * mu - 1.0).abs() + 1.0) / (x_end * x_end);
    let value = total.value + tail;
    let error_estimate = total.error + tail_error;
    if error_estimate > q.rel_tol * value.abs() {
        return Err(Error::Quadrature { value, estimate: error_estimate });
    }
    Ok(QuadratureResult { value, error_estimate, tail, panels: total.intervals, min_integrand })
}

/// `(∫_X^∞ dx/(x²−ξ), ∫_X^∞ dx/(x²−ξ)²)` for `0 ≤ ξ < X²`.
fn inverse_square_tails(x: f64, xi: f64) -> (f64, f64) {
    let q = xi / (x * x);
    if q < 0.25 {
        let (mut f0, mut f1) = (0.0, 0.0);
        let mut qk = 1.0;
        for k in 0..60 {
            let kf = k as f64;
            f0 += qk / (2.0 * kf + 1.0);
            f1 += (kf + 1.0) * qk / (2.0 * kf + 3.0);
            qk *= q;
        }
        (f0 / x, f1 / (x * x * x))
    } else {
        let s = xi.sqrt();
        let f0 = (s / x).atanh() / s;
        let f1 = (x / ((x * x - xi) * s) - (s / x).atanh() / xi) / (2.0 * s);
        (f0, f1)
    }
}

/// Radial lift of the extremal function of type `δ` to `ℝ^N`.
#[derive(Debug, Clone)]
pub struct RadialExtremal {
    pub dim: u32,
    pub delta: f64,
    evaluator: ExtremalEvaluator,
}

impl RadialExtremal {
    pub fn new(p: &HomogeneousParameter, n: u32, delta: f64, lambda: f64, side: Side) -> Result<Self> {
        check_scaled(delta, n)?;
        check_lambda(lambda)?;
        let kappa = 2.0 / delta;
        let evaluator = ExtremalEvaluator::with_truncation(p, kappa * kappa * lambda, side, required_truncation(p.nu))?;
        Ok(RadialExtremal { dim: n, delta, evaluator })
    }

    /// Value at a point of `ℝ^N`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim as usize {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.dim
            )));
        }
        let r = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(self.evaluator.eval(0.5 * self.delta * r))
    }

    /// `e^{−πλ|x|²}` at the same point.
    pub fn target(&self, point: &[f64]) -> f64 {
        let r2: f64 = point.iter().map(|v| v * v).sum();
        let kappa = 2.0 / self.delta;
        (-PI * self.evaluator.lambda / (kappa * kappa) * r2).exp()
    }
}

pub fn multi_eval(
    p: &HomogeneousParameter,
    n: u32,
    delta: f64,
    lambda: f64,
    point: &[f64],
    side: Side,
) -> Result<f64> {
    RadialExtremal::new(p, n, delta, lambda, side)?.eval(point)
}
