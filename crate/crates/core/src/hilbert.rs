//! Hilbert-type inequalities for well-spaced points:
//! `−U⁻(2πδ, μ) Σ|a|² ≤ Σ_{j≠l} a_j ā_l Q_μ(y_j − y_l) ≤ U⁺(2πδ, μ) Σ|a|²`
//! with `2ν + 2 = N`.

use crate::error::{Error, Result};
use crate::specfun::HomogeneousParameter;
use crate::subordination::{gamma_normalizer, q_kernel_radius, subordinate_value, SubordinationMeasure};
use crate::Side;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration {
    pub dim: u32,
    pub points: Vec<Vec<f64>>,
    pub min_spacing: f64,
}

impl PointConfiguration {
    /// Validates that all points have `dim` coordinates and that distinct
    /// points are at least `min_spacing` apart.
    pub fn new(dim: u32, points: Vec<Vec<f64>>, min_spacing: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(min_spacing > 0.0 && min_spacing.is_finite()) {
            return Err(Error::InvalidParameter(format!("spacing must be > 0, got {min_spacing}")));
        }
        if points.is_empty() {
            return Err(Error::InvalidParameter("no points".into()));
        }
        for (j, p) in points.iter().enumerate() {
            if p.len() != dim as usize || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("point {j} is not a finite vector in R^{dim}")));
            }
        }
        let cfg = PointConfiguration { dim, points, min_spacing };
        for j in 0..cfg.len() {
            for l in 0..j {
                let d = cfg.distance(j, l);
                if d < min_spacing {
                    return Err(Error::InvalidParameter(format!(
                        "points {l} and {j} are {d} apart, below the spacing {min_spacing}"
                    )));
                }
            }
        }
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn distance(&self, j: usize, l: usize) -> f64 {
        self.points[j].iter().zip(&self.points[l]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// `ν = N/2 − 1`.
    pub fn parameter(&self) -> Result<HomogeneousParameter> {
        HomogeneousParameter::new(0.5 * self.dim as f64 - 1.0)
    }

    /// Real symmetric matrix with zero diagonal and entries `Q_μ(y_j − y_l)`.
    pub fn gram(&self, m: &SubordinationMeasure) -> Result<DMatrix<f64>> {
        let n = self.len();
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for l in 0..j {
                let q = q_kernel_radius(m, self.dim, self.distance(j, l))?;
                g[(j, l)] = q;
                g[(l, j)] = q;
            }
        }
        Ok(g)
    }
}

/// `Σ_{j≠l} a_j ā_l Q_μ(y_j − y_l)`.
pub fn offdiag_form(cfg: &PointConfiguration, coeffs: &[Complex64], m: &SubordinationMeasure) -> Result<f64> {
    if coeffs.len() != cfg.len() {
        return Err(Error::InvalidParameter(format!(
            "{} coefficients for {} points",
            coeffs.len(),
            cfg.len()
        )));
    }
    let g = cfg.gram(m)?;
    Ok(form_with_gram(&g, coeffs))
}

pub fn form_with_gram(g: &DMatrix<f64>, coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    let mut s = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for l in 0..n {
            if j != l {
                s += coeffs[j] * coeffs[l].conj() * g[(j, l)];
            }
        }
    }
    s.re
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `−U^{N−}(2πδ, μ)`.
    pub lower: Option<f64>,
    /// `U^{N+}(2πδ, μ)`.
    pub upper: Option<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
    /// Largest value of the form over unit coefficient vectors.
    pub max_offdiag_form: f64,
    pub margin_lower: Option<f64>,
    pub margin_upper: Option<f64>,
    pub error_estimate: f64,
}

impl BoundReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.margin_lower.is_none_or(|m| m >= -slack) && self.margin_upper.is_none_or(|m| m >= -slack)
    }
}

/// Extreme eigenvalues of the off-diagonal Gram matrix against the optimal
/// values at type `2πδ`. `sides` selects which inequalities are checked.
pub fn bound_check(cfg: &PointConfiguration, m: &SubordinationMeasure, sides: &[Side]) -> Result<BoundReport> {
    let p = cfg.parameter()?;
    let g = cfg.gram(m)?;
    let (min_eig, max_eig) = if g.nrows() == 1 {
        (0.0, 0.0)
    } else {
        let eig = SymmetricEigen::try_new(g, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::IllConditioned("symmetric eigensolver did not converge".into()))?;
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let mut report = BoundReport {
        lower: None,
        upper: None,
        min_eig,
        max_eig,
        max_offdiag_form: max_eig,
        margin_lower: None,
        margin_upper: None,
        error_estimate: 0.0,
    };
    let delta = 2.0 * PI * cfg.min_spacing;
    for &side in sides {
        let u = subordinate_value(&p, cfg.dim, delta, m, side)?;
        report.error_estimate += u.error_estimate;
        match side {
            Side::Minus => {
                report.lower = Some(-u.value);
                report.margin_lower = Some(min_eig + u.value);
            }
            Side::Plus => {
                report.upper = Some(u.value);
                report.margin_upper = Some(u.value - max_eig);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HlsConstants {
    pub lower: f64,
    /// Present for `σ > 0`.
    pub upper: Option<f64>,
    pub error_estimate: f64,
}

/// Constants `∓U^{N∓}(2πδ, μ_σ)/γ(N+σ)` of the discrete
/// Hardy–Littlewood–Sobolev inequality for `|y_j − y_l|^{−N−σ}`.
pub fn hls_constants(n: u32, sigma: f64, delta: f64) -> Result<HlsConstants> {
    if n < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(sigma > -(n as f64)) {
        return Err(Error::Domain(format!("sigma must exceed -N = -{n}, got {sigma}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("spacing must be > 0, got {delta}")));
    }
    let p = HomogeneousParameter::new(0.5 * n as f64 - 1.0)?;
    let m = SubordinationMeasure::power(sigma)?;
    let norm = gamma_normalizer(n as f64 + sigma)?;
    let lo = subordinate_value(&p, n, 2.0 * PI * delta, &m, Side::Minus)?;
    let mut err = lo.error_estimate / norm;
    let upper = if sigma > 0.0 {
        let hi = subordinate_value(&p, n, 2.0 * PI * delta, &m, Side::Plus)?;
        err += hi.error_estimate / norm;
        Some(hi.value / norm)
    } else {
        None
    };
    Ok(HlsConstants { lower: -lo.value / norm, upper, error_estimate: err })
}
