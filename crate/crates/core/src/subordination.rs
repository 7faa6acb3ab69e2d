//! Gaussian subordination: radial targets `g_μ(r) = ∫ e^{−πλr²} dμ(λ)`,
//! their optimal values `∫ U(δ, λ) dμ(λ)` and the extremal functions
//! `g_μ ∓ ∫ |e^{−πλr²} − E_λ(r)| dμ(λ)`.

use crate::error::{Error, Result};
use crate::extremal::{half_sphere_area, value_with_table, zeros_needed};
use crate::lpinterp::{flat_cut_for, required_truncation, ExtremalEvaluator, FrequencyFunction};
use crate::quad::{self, Estimate, Tolerance};
use crate::specfun::{self, HomogeneousParameter, ZeroKind, ZeroTable};
use crate::Side;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

/// Relative accuracy requested from every λ-integral.
pub const LAMBDA_REL_TOL: f64 = 1e-10;

/// Largest log-variable reached before an integral is declared divergent.
const LOG_LIMIT: f64 = 700.0;

#[derive(Clone)]
pub struct DensityFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for DensityFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("DensityFn(..)")
    }
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    PointMass { lambda0: f64 },
    /// `λ^{−σ/2−1} dλ`.
    Power { sigma: f64 },
    /// `Σ w_i (τ_i/2π) e^{−τ_i²/(4πλ)} λ^{−3/2} dλ` from rows `(τ_i, w_i)`.
    ExpSubordination { table: Vec<(f64, f64)> },
    /// `Σ w_i δ_{λ_i}` from rows `(λ_i, w_i)`.
    FiniteTable { table: Vec<(f64, f64)> },
    Density(DensityFn),
}

/// A nonnegative measure on `(0, ∞)`, possibly dilated: the dilation `κ`
/// represents `μ_κ(X) = μ(κX)`.
#[derive(Debug, Clone)]
pub struct SubordinationMeasure {
    pub kind: MeasureKind,
    dilation: f64,
    pub minus_admissible_k: Option<u32>,
    pub plus_admissible_k: Option<u32>,
}

fn check_table(table: &[(f64, f64)], what: &str) -> Result<()> {
    if table.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} table is empty")));
    }
    for &(x, w) in table {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::InvalidParameter(format!("{what} abscissa must be > 0, got {x}")));
        }
        if !(w >= 0.0 && w.is_finite()) {
            return Err(Error::InvalidParameter(format!("{what} weight must be >= 0, got {w}")));
        }
    }
    Ok(())
}

impl SubordinationMeasure {
    fn from_kind(kind: MeasureKind) -> Self {
        SubordinationMeasure { kind, dilation: 1.0, minus_admissible_k: None, plus_admissible_k: None }
    }

    pub fn point_mass(lambda0: f64) -> Result<Self> {
        check_table(&[(lambda0, 1.0)], "point mass")?;
        Ok(Self::from_kind(MeasureKind::PointMass { lambda0 }))
    }

    pub fn power(sigma: f64) -> Result<Self> {
        if !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma must be finite, got {sigma}")));
        }
        Ok(Self::from_kind(MeasureKind::Power { sigma }))
    }

    pub fn exp_subordination(table: Vec<(f64, f64)>) -> Result<Self> {
        check_table(&table, "exponential subordination")?;
        Ok(Self::from_kind(MeasureKind::ExpSubordination { table }))
    }

    pub fn finite_table(table: Vec<(f64, f64)>) -> Result<Self> {
        check_table(&table, "finite measure")?;
        Ok(Self::from_kind(MeasureKind::FiniteTable { table }))
    }

    /// Absolutely continuous measure; the density is checked for sign at
    /// integration time.
    pub fn density<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::from_kind(MeasureKind::Density(DensityFn(Arc::new(f))))
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    /// `μ_κ` with `∫ f dμ_κ = ∫ f(λ/κ) dμ(λ)`.
    pub fn dilate(&self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation must be > 0, got {kappa}")));
        }
        Ok(SubordinationMeasure { dilation: self.dilation * kappa, ..self.clone() })
    }

    /// Atoms `(λ, w)` after dilation, for discrete measures.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        let k = self.dilation;
        match &self.kind {
            MeasureKind::PointMass { lambda0 } => Some(vec![(lambda0 / k, 1.0)]),
            MeasureKind::FiniteTable { table } => Some(table.iter().map(|&(l, w)| (l / k, w)).collect()),
            _ => None,
        }
    }

    pub fn is_finite_support(&self) -> bool {
        self.atoms().is_some()
    }

    fn base_density(&self, lambda: f64) -> f64 {
        match &self.kind {
            MeasureKind::Power { sigma } => lambda.powf(-0.5 * sigma - 1.0),
            MeasureKind::ExpSubordination { table } => table
                .iter()
                .map(|&(tau, w)| w * tau / (2.0 * PI) * (-tau * tau / (4.0 * PI * lambda)).exp() * lambda.powf(-1.5))
                .sum(),
            MeasureKind::Density(f) => (f.0)(lambda),
            _ => 0.0,
        }
    }

    /// Density of the dilated measure, `κ m(κλ)`; zero for discrete measures.
    pub fn density_at(&self, lambda: f64) -> f64 {
        self.dilation * self.base_density(self.dilation * lambda)
    }

    /// `∫ f dμ`. Continuous measures are integrated in `u = ±ln λ` over
    /// doubling blocks on each side of `λ = 1`.
    pub fn integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F) -> Result<Estimate> {
        if let Some(atoms) = self.atoms() {
            let mut total = Estimate::ZERO;
            for (l, w) in atoms {
                if w > 0.0 {
                    total.value += w * f(l)?;
                    total.intervals += 1;
                }
            }
            return Ok(total);
        }
        let mut g = |l: f64| -> Result<f64> {
            let m = self.density_at(l);
            if !(m >= 0.0) {
                return Err(Error::InvalidParameter(format!("density is negative or undefined at {l}: {m}")));
            }
            if m == 0.0 {
                return Ok(0.0);
            }
            Ok(f(l)? * m)
        };
        let small = log_half(&mut g, -1.0)?;
        let large = log_half(&mut g, 1.0)?;
        Ok(small + large)
    }
}

/// `∫_0^∞ g(e^{su}) e^{su} du` for `s = ±1`.
fn log_half<G: FnMut(f64) -> Result<f64>>(g: &mut G, s: f64) -> Result<Estimate> {
    let mut total = Estimate::ZERO;
    let (mut a, mut b) = (0.0, 1.0);
    loop {
        let tol = Tolerance { rel: LAMBDA_REL_TOL, abs: 0.1 * LAMBDA_REL_TOL * total.value.abs(), max_intervals: 2000 };
        let mut peak = 0.0f64;
        let block = quad::adaptive(
            |u| {
                let l = (s * u).exp();
                let v = g(l)? * l;
                if !v.is_finite() {
                    return Err(Error::Divergent(format!("integrand not finite at lambda = {l:e}")));
                }
                peak = peak.max(v.abs());
                Ok(v)
            },
            a,
            b,
            tol,
        );
        let block = match block {
            Ok(b) => b,
            // cancellation noise around a vanishing integral
            Err(Error::Quadrature { value, estimate }) if estimate <= 1e-13 * peak * (b - a) => {
                Estimate { value, error: estimate, intervals: 0 }
            }
            Err(Error::Divergent(msg)) => {
                return Err(Error::Divergent(format!("{msg}; partial sum {:e}", total.value)));
            }
            Err(e) => return Err(e),
        };
        total = total + block;
        if b >= 4.0 && block.value.abs() <= 1e-13 * total.value.abs() {
            return Ok(total);
        }
        if b >= LOG_LIMIT {
            if total.value == 0.0 {
                return Ok(total);
            }
            return Err(Error::Divergent(format!(
                "lambda integral not settled at |ln lambda| = {LOG_LIMIT}; partial sum {:e}, last block {:e}",
                total.value, block.value
            )));
        }
        a = b;
        b = (2.0 * b).min(LOG_LIMIT);
    }
}

fn admissibility_weight(nu: f64, side: Side, k: u32, lambda: f64) -> f64 {
    let lk = lambda.powi(k as i32);
    match side {
        Side::Minus => lk / (1.0 + lambda.powf(nu + k as f64 + 1.0)),
        Side::Plus => lk / (1.0 + lk),
    }
}

/// Smallest `k ≤ k_max` for which `∫ λ^k/(1+λ^{ν+k+1}) dμ` (minorant) or
/// `∫ λ^k/(1+λ^k) dμ` (majorant) is finite.
pub fn admissibility_check(
    m: &SubordinationMeasure,
    p: &HomogeneousParameter,
    side: Side,
    k_max: u32,
) -> Result<Option<u32>> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    for k in 1..=k_max {
        match m.integrate(|l| Ok(admissibility_weight(p.nu, side, k, l))) {
            Ok(_) => return Ok(Some(k)),
            Err(Error::Divergent(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

impl SubordinationMeasure {
    /// Runs the admissibility check for both sides and records the result.
    pub fn with_admissibility(mut self, p: &HomogeneousParameter, k_max: u32) -> Result<Self> {
        self.minus_admissible_k = admissibility_check(&self, p, Side::Minus, k_max)?;
        self.plus_admissible_k = admissibility_check(&self, p, Side::Plus, k_max)?;
        Ok(self)
    }

    fn require_admissible(&self, p: &HomogeneousParameter, side: Side) -> Result<()> {
        let known = match side {
            Side::Minus => self.minus_admissible_k,
            Side::Plus => self.plus_admissible_k,
        };
        if known.is_some() {
            return Ok(());
        }
        match admissibility_check(self, p, side, 8)? {
            Some(_) => Ok(()),
            None => Err(Error::Domain(format!("measure is not admissible for the {side} problem"))),
        }
    }
}

/// `γ(s) = π^{−s/2} Γ(s/2)`.
pub fn gamma_normalizer(s: f64) -> Result<f64> {
    if s <= 0.0 && (0.5 * s).fract() == 0.0 {
        return Err(Error::Domain(format!("gamma(s) has a pole at s = {s}")));
    }
    Ok(PI.powf(-0.5 * s) * specfun::gamma(0.5 * s))
}

/// `γ(−σ) r^σ`.
pub fn power_target(sigma: f64, r: f64) -> Result<f64> {
    let g = gamma_normalizer(-sigma)?;
    let r = r.abs();
    if r == 0.0 {
        return if sigma > 0.0 {
            Ok(0.0)
        } else {
            Err(Error::Domain(format!("power target with sigma = {sigma} is infinite at the origin")))
        };
    }
    Ok(g * r.powf(sigma))
}

type RadialFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Closed form of the even target `g_μ` on `[0, ∞)`.
#[derive(Clone)]
pub struct RadialFunctionSpec {
    pub label: String,
    pub dim: u32,
    f: RadialFn,
}

impl fmt::Debug for RadialFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunctionSpec").field("label", &self.label).field("dim", &self.dim).finish()
    }
}

impl RadialFunctionSpec {
    pub fn custom<F: Fn(f64) -> Result<f64> + Send + Sync + 'static>(label: &str, dim: u32, f: F) -> Self {
        RadialFunctionSpec { label: label.to_string(), dim, f: Arc::new(f) }
    }

    pub fn power(sigma: f64, dim: u32) -> Result<Self> {
        gamma_normalizer(-sigma)?;
        Ok(Self::custom(&format!("power(sigma={sigma})"), dim, move |r| power_target(sigma, r)))
    }

    /// `Σ w e^{−πλr²}`.
    pub fn gaussian_mixture(atoms: Vec<(f64, f64)>, dim: u32) -> Self {
        Self::custom("gaussian mixture", dim, move |r| {
            Ok(atoms.iter().map(|&(l, w)| w * (-PI * l * r * r).exp()).sum())
        })
    }

    /// `Σ w (e^{−τr} − e^{−τ})`.
    pub fn exp_subordination(table: Vec<(f64, f64)>, dim: u32) -> Self {
        Self::custom("exponential subordination", dim, move |r| {
            Ok(table.iter().map(|&(t, w)| w * ((-t * r).exp() - (-t).exp())).sum())
        })
    }

    /// The target attached to a catalog measure; dilation acts as
    /// `g_{μ_κ}(r) = g_μ(r/√κ)`.
    pub fn for_measure(m: &SubordinationMeasure, dim: u32) -> Result<Self> {
        let base = match &m.kind {
            MeasureKind::PointMass { lambda0 } => Self::gaussian_mixture(vec![(*lambda0, 1.0)], dim),
            MeasureKind::FiniteTable { table } => Self::gaussian_mixture(table.clone(), dim),
            MeasureKind::Power { sigma } => Self::power(*sigma, dim)?,
            MeasureKind::ExpSubordination { table } => Self::exp_subordination(table.clone(), dim),
            MeasureKind::Density(_) => {
                return Err(Error::InvalidParameter("density measures need an explicit target".into()));
            }
        };
        if m.dilation == 1.0 {
            return Ok(base);
        }
        let s = m.dilation.sqrt();
        let f = base.f.clone();
        Ok(Self::custom(&base.label, dim, move |r| f(r / s)))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        (self.f)(r.abs())
    }
}

/// `U_ν^{1±}(2, λ)` over many λ with one shared zero table. For
/// `πλ ≤ τ` (the flat region of the frequency function) the value is 0.
pub struct ValueCache {
    param: HomogeneousParameter,
    side: Side,
    table: ZeroTable,
    flat: f64,
}

impl ValueCache {
    pub fn new(p: &HomogeneousParameter, side: Side) -> Result<Self> {
        let flat = flat_cut_for(p.nu);
        let kind = match side {
            Side::Minus => ZeroKind::A,
            Side::Plus => ZeroKind::B,
        };
        let table = specfun::zeros(p, kind, zeros_needed(p.nu, flat / PI).max(16))?;
        Ok(ValueCache { param: *p, side, table, flat })
    }

    pub fn value(&mut self, lambda: f64) -> Result<f64> {
        if PI * lambda <= self.flat {
            return Ok(0.0);
        }
        loop {
            match value_with_table(&self.param, lambda, self.side, &self.table) {
                Ok(v) => return Ok(v.value),
                Err(Error::NeedMoreZeros { .. }) if self.table.len() < 1 << 20 => {
                    self.table = specfun::zeros(&self.param, self.table.kind, 2 * self.table.len())?;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SubordinatedValue {
    pub value: f64,
    pub error_estimate: f64,
    /// Quadrature panels (or atoms) used for the λ-integral.
    pub intervals: usize,
}

/// `U_ν^{N±}(δ, μ) = ½ω_{N−1} ∫ U_ν^{1±}(δ, λ) dμ(λ)`.
pub fn subordinate_value(
    p: &HomogeneousParameter,
    n: u32,
    delta: f64,
    m: &SubordinationMeasure,
    side: Side,
) -> Result<SubordinatedValue> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    m.require_admissible(p, side)?;
    let kappa = 2.0 / delta;
    let mut cache = ValueCache::new(p, side)?;
    let est = m.integrate(|l| cache.value(kappa * kappa * l))?;
    let factor = half_sphere_area(n) * kappa.powf(2.0 * p.nu + 2.0);
    Ok(SubordinatedValue { value: est.value * factor, error_estimate: est.error * factor, intervals: est.intervals })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SubordinatedPoint {
    pub value: f64,
    pub target: f64,
    /// `∫ |e^{−πλ|x|²} − E_λ(x)| dμ(λ) ≥ 0`.
    pub deficit: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Subordinated extremal function `g_μ ∓ D^±` of type `δ` on `ℝ^N`.
#[derive(Debug, Clone)]
pub struct SubordinatedExtremal {
    pub param: HomogeneousParameter,
    pub dim: u32,
    pub delta: f64,
    pub side: Side,
    measure: SubordinationMeasure,
    spec: RadialFunctionSpec,
    freq: Arc<FrequencyFunction>,
}

impl SubordinatedExtremal {
    pub fn new(
        p: &HomogeneousParameter,
        n: u32,
        delta: f64,
        m: &SubordinationMeasure,
        spec: RadialFunctionSpec,
        side: Side,
    ) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta must be > 0, got {delta}")));
        }
        if n < 1 || spec.dim != n {
            return Err(Error::InvalidParameter(format!("dimension {n} does not match target dimension {}", spec.dim)));
        }
        m.require_admissible(p, side)?;
        let freq = Arc::new(FrequencyFunction::structure(p, side, required_truncation(p.nu))?);
        Ok(SubordinatedExtremal { param: *p, dim: n, delta, side, measure: m.clone(), spec, freq })
    }

    /// `D^±(r)` at radius `r`.
    pub fn deficit(&self, r: f64) -> Result<Estimate> {
        let kappa = 2.0 / self.delta;
        let y = 0.5 * self.delta * r.abs();
        let flat = self.freq.flat_cut();
        let est = self.measure.integrate(|l| {
            let lp = kappa * kappa * l;
            if PI * lp <= flat {
                return Ok(0.0);
            }
            Ok(ExtremalEvaluator::from_frequency(self.freq.clone(), lp)?.gap(y))
        });
        match est {
            Err(Error::Divergent(msg)) => Err(Error::Domain(format!("deficit diverges at r = {r}: {msg}"))),
            other => other,
        }
    }

    pub fn eval_radius(&self, r: f64) -> Result<SubordinatedPoint> {
        let target = self.spec.eval(r)?;
        let d = self.deficit(r)?;
        let value = match self.side {
            Side::Minus => target - d.value,
            Side::Plus => target + d.value,
        };
        Ok(SubordinatedPoint { value, target, deficit: d.value, error_estimate: d.error, intervals: d.intervals })
    }

    pub fn eval(&self, point: &[f64]) -> Result<SubordinatedPoint> {
        if point.len() != self.dim as usize {
            return Err(Error::InvalidParameter(format!(
                "point has {} coordinates, expected {}",
                point.len(),
                self.dim
            )));
        }
        self.eval_radius(point.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}

pub fn subordinate_eval(
    p: &HomogeneousParameter,
    n: u32,
    delta: f64,
    m: &SubordinationMeasure,
    spec: RadialFunctionSpec,
    point: &[f64],
    side: Side,
) -> Result<SubordinatedPoint> {
    SubordinatedExtremal::new(p, n, delta, m, spec, side)?.eval(point)
}

/// `Q_μ(y) = ∫ λ^{−N/2} e^{−π|y|²/λ} dμ(λ)`.
pub fn q_kernel(m: &SubordinationMeasure, n: u32, y: &[f64]) -> Result<f64> {
    if n < 1 || y.len() != n as usize {
        return Err(Error::InvalidParameter(format!("vector has {} coordinates, expected {n}", y.len())));
    }
    let r2: f64 = y.iter().map(|v| v * v).sum();
    q_kernel_radius(m, n, r2.sqrt())
}

pub fn q_kernel_radius(m: &SubordinationMeasure, n: u32, r: f64) -> Result<f64> {
    let r2 = r * r;
    let half = 0.5 * n as f64;
    match m.integrate(|l| Ok(l.powf(-half) * (-PI * r2 / l).exp())) {
        Ok(e) => Ok(e.value),
        Err(Error::Divergent(msg)) => Err(Error::Domain(format!("Q diverges at |y| = {r}: {msg}"))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::{value_one_dim, value_scaled};

    fn par(nu: f64) -> HomogeneousParameter {
        HomogeneousParameter::new(nu).unwrap()
    }

    #[test]
    fn power_target_values() {
        assert!((power_target(1.0, 1.0).unwrap() + 2.0 * PI).abs() < 1e-13);
        assert_eq!(power_target(1.0, 0.0).unwrap(), 0.0);
        assert!((power_target(-1.0, 2.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(power_target(2.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(power_target(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(power_target(-1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn admissibility_examples() {
        let p0 = par(0.0);
        let pw = SubordinationMeasure::power(1.0).unwrap();
        assert_eq!(admissibility_check(&pw, &p0, Side::Minus, 4).unwrap(), Some(1));
        let pt = SubordinationMeasure::point_mass(1.0).unwrap();
        assert_eq!(admissibility_check(&pt, &p0, Side::Minus, 4).unwrap(), Some(1));
        assert_eq!(admissibility_check(&pt, &p0, Side::Plus, 4).unwrap(), Some(1));
        let neg = SubordinationMeasure::power(-1.0).unwrap();
        assert_eq!(admissibility_check(&neg, &p0, Side::Plus, 4).unwrap(), None);
        assert_eq!(admissibility_check(&neg, &p0, Side::Minus, 4).unwrap(), Some(1));
        // λ^{−3} dλ near 0 needs k = 2 for the majorant
        let steep = SubordinationMeasure::power(4.0).unwrap();
        assert_eq!(admissibility_check(&steep, &p0, Side::Plus, 4).unwrap(), Some(3));
        assert!(admissibility_check(&pt, &p0, Side::Plus, 0).is_err());
    }

    #[test]
    fn point_mass_reduces_to_scaled_value() {
        let p = par(0.3);
        let m = SubordinationMeasure::point_mass(1.7).unwrap();
        for side in [Side::Minus, Side::Plus] {
            let a = subordinate_value(&p, 2, 3.0, &m, side).unwrap().value;
            let b = value_scaled(&p, 3.0, 1.7, 2, side).unwrap().value;
            assert!((a - b).abs() < 1e-13 * b);
        }
    }

    #[test]
    fn finite_table_linearity() {
        let p = par(-0.5);
        let m = SubordinationMeasure::finite_table(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let v = subordinate_value(&p, 1, 2.0, &m, Side::Minus).unwrap().value;
        let a = value_one_dim(&p, 1.0, Side::Minus).unwrap().value;
        let b = value_one_dim(&p, 2.0, Side::Minus).unwrap().value;
        assert!((v - 0.5 * (a + b)).abs() < 1e-12);
    }

    #[test]
    fn dilation_scaling_law() {
        let p = par(0.4);
        let m = SubordinationMeasure::finite_table(vec![(0.3, 1.0), (2.5, 0.25)]).unwrap();
        let kappa: f64 = 2.0;
        let dilated = m.dilate(kappa.powi(-2)).unwrap();
        for side in [Side::Minus, Side::Plus] {
            for delta in [1.0, 2.0] {
                let a = subordinate_value(&p, 1, delta, &m, side).unwrap().value;
                let b = subordinate_value(&p, 1, kappa * delta, &dilated, side).unwrap().value;
                let law = kappa.powf(2.0 * p.nu + 2.0) * b;
                assert!((a - law).abs() < 1e-10 * a, "{side:?} {delta}: {a} vs {law}");
            }
        }
    }

    #[test]
    fn dilated_density_integrates_like_pushforward() {
        let m = SubordinationMeasure::exp_subordination(vec![(1.0, 1.0)]).unwrap();
        let d = m.dilate(3.0).unwrap();
        let f = |l: f64| (-l).exp() / (1.0 + l);
        let a = d.integrate(|l| Ok(f(l))).unwrap().value;
        let b = m.integrate(|l| Ok(f(l / 3.0))).unwrap().value;
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn q_kernel_power_closed_form() {
        for (n, sigma) in [(1u32, 1.0), (2, 1.0), (3, -0.5)] {
            let m = SubordinationMeasure::power(sigma).unwrap();
            for r in [0.1, 0.5, 1.0, 3.0, 10.0] {
                let mut y = vec![0.0; n as usize];
                y[0] = r;
                let q = q_kernel(&m, n, &y).unwrap();
                let exact = gamma_normalizer(n as f64 + sigma).unwrap() * r.powf(-(n as f64) - sigma);
                assert!((q - exact).abs() < 1e-8 * exact, "N={n} sigma={sigma} r={r}: {q} vs {exact}");
            }
        }
        let m = SubordinationMeasure::power(1.0).unwrap();
        assert!((q_kernel(&m, 1, &[1.0]).unwrap() - 1.0 / PI).abs() < 1e-9);
        assert!(matches!(q_kernel(&m, 1, &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn q_kernel_point_and_exponential() {
        let pt = SubordinationMeasure::point_mass(1.0).unwrap();
        assert_eq!(q_kernel(&pt, 1, &[0.0]).unwrap(), 1.0);
        let tau = 1.3;
        let m = SubordinationMeasure::exp_subordination(vec![(tau, 1.0)]).unwrap();
        for n in [1u32, 2, 3] {
            let cn = 2f64.powi(n as i32) * PI.powf(0.5 * (n as f64 - 1.0)) * specfun::gamma(0.5 * (n as f64 + 1.0));
            for r in [0.0, 0.2, 1.0, 4.0] {
                let mut y = vec![0.0; n as usize];
                y[n as usize - 1] = r;
                let q = q_kernel(&m, n, &y).unwrap();
                let exact = cn * tau / (tau * tau + 4.0 * PI * PI * r * r).powf(0.5 * (n as f64 + 1.0));
                assert!((q - exact).abs() < 1e-8 * exact, "N={n} r={r}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn exponential_identity() {
        // e^{−τr} = ∫ e^{−πλr²} dμ for the subordinating density of τ
        let tau = 1.0;
        let m = SubordinationMeasure::exp_subordination(vec![(tau, 1.0)]).unwrap();
        for r in [0.0, 0.3, 1.0, 2.5, 7.0] {
            let v = m.integrate(|l| Ok((-PI * l * r * r).exp())).unwrap().value;
            assert!((v - (-tau * r).exp()).abs() < 1e-9, "r={r}: {v}");
        }
    }

    #[test]
    fn exponential_target_one_sided() {
        let p = par(-0.5);
        let table = vec![(1.0, 1.0)];
        let m = SubordinationMeasure::exp_subordination(table.clone()).unwrap();
        let spec = RadialFunctionSpec::exp_subordination(table, 1);
        let lo = SubordinatedExtremal::new(&p, 1, 2.0, &m, spec.clone(), Side::Minus).unwrap();
        let hi = SubordinatedExtremal::new(&p, 1, 2.0, &m, spec, Side::Plus).unwrap();
        for i in 0..40 {
            let r = 0.01 + 0.25 * i as f64;
            let target = (-r).exp() - (-1f64).exp();
            let a = lo.eval(&[r]).unwrap();
            let b = hi.eval(&[-r]).unwrap();
            assert!((a.target - target).abs() < 1e-15);
            assert!(a.value <= target + 1e-12 && b.value >= target - 1e-12, "r={r}");
        }
        // interpolation at the zeros of the structure functions
        let a = specfun::zeros(&p, ZeroKind::A, 3).unwrap();
        for xi in a.zeros {
            assert!(lo.eval(&[xi]).unwrap().deficit < 1e-12);
        }
        let b = specfun::zeros(&p, ZeroKind::B, 3).unwrap();
        for xi in b.zeros {
            assert!(hi.eval(&[xi]).unwrap().deficit < 1e-12);
        }
    }

    #[test]
    fn point_mass_eval_matches_single_gaussian() {
        let p = par(0.0);
        let m = SubordinationMeasure::point_mass(0.8).unwrap();
        let spec = RadialFunctionSpec::for_measure(&m, 2).unwrap();
        let s = SubordinatedExtremal::new(&p, 2, 4.0, &m, spec, Side::Plus).unwrap();
        let direct = crate::extremal::RadialExtremal::new(&p, 2, 4.0, 0.8, Side::Plus).unwrap();
        for x in [[0.0, 0.0], [0.3, 0.1], [1.0, -2.0]] {
            let a = s.eval(&x).unwrap().value;
            let b = direct.eval(&x).unwrap();
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn minorant_origin_domain_error() {
        let p = par(-0.5);
        let m = SubordinationMeasure::power(-0.5).unwrap();
        let spec = RadialFunctionSpec::power(-0.5, 1).unwrap();
        let s = SubordinatedExtremal::new(&p, 1, 2.0, &m, spec, Side::Minus).unwrap();
        assert!(matches!(s.eval(&[0.0]), Err(Error::Domain(_))));
        assert!(s.eval(&[0.5]).is_ok());
    }

    #[test]
    fn rejects_inadmissible_and_bad_tables() {
        let p = par(0.0);
        let m = SubordinationMeasure::power(-1.0).unwrap();
        assert!(matches!(subordinate_value(&p, 1, 2.0, &m, Side::Plus), Err(Error::Domain(_))));
        assert!(SubordinationMeasure::finite_table(vec![(1.0, -1.0)]).is_err());
        assert!(SubordinationMeasure::finite_table(vec![]).is_err());
        assert!(SubordinationMeasure::point_mass(0.0).is_err());
    }
}
