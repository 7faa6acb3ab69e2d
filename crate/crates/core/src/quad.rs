//! Gauss–Legendre rules and a globally adaptive integrator.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Rule { nodes, weights }
    }

    /// Apply the rule on `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    pub fn try_integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        let h = 0.5 * (b - a);
        let c = 0.5 * (b + a);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x)?;
        }
        Ok(s * h)
    }
}

fn rule_pair() -> &'static (Rule, Rule) {
    static PAIR: OnceLock<(Rule, Rule)> = OnceLock::new();
    PAIR.get_or_init(|| (Rule::new(10), Rule::new(21)))
}

/// 32-point rule used for composite panels.
pub fn rule32() -> &'static Rule {
    static R: OnceLock<Rule> = OnceLock::new();
    R.get_or_init(|| Rule::new(32))
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-11, abs: 1e-300, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
            intervals: self.intervals + o.intervals,
        }
    }
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0, intervals: 0 };
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn piece<F: FnMut(f64) -> Result<f64>>(f: &mut F, a: f64, b: f64) -> Result<Piece> {
    let (lo, hi) = rule_pair();
    let mut cache = Vec::with_capacity(31);
    let h = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let mut s_hi = 0.0;
    for (x, w) in hi.nodes.iter().zip(&hi.weights) {
        let v = f(c + h * x)?;
        if !v.is_finite() {
            return Err(Error::Quadrature { value: v, estimate: f64::INFINITY });
        }
        cache.push(v);
        s_hi += w * v;
    }
    let mut s_lo = 0.0;
    for (x, w) in lo.nodes.iter().zip(&lo.weights) {
        let v = f(c + h * x)?;
        if !v.is_finite() {
            return Err(Error::Quadrature { value: v, estimate: f64::INFINITY });
        }
        s_lo += w * v;
    }
    let value = s_hi * h;
    let error = ((s_hi - s_lo) * h).abs();
    // roundoff floor
    let scale: f64 = cache.iter().map(|v| v.abs()).sum::<f64>() * h.abs() / cache.len() as f64;
    Ok(Piece { a, b, value, error: error.max(scale * 1e-15) })
}

/// Globally adaptive integration of `f` over `[a, b]`: the piece with the
/// largest error estimate is bisected until the total error meets `tol`.
pub fn adaptive<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let mut pieces = vec![piece(&mut f, a, b)?];
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if error <= tol.abs.max(tol.rel * value.abs()) {
            return Ok(Estimate { value, error, intervals: pieces.len() });
        }
        if pieces.len() >= tol.max_intervals {
            return Err(Error::Quadrature { value, estimate: error });
        }
        let (k, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .unwrap();
        let p = pieces.swap_remove(k);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
            return Err(Error::Quadrature { value, estimate: error });
        }
        pieces.push(piece(&mut f, p.a, m)?);
        pieces.push(piece(&mut f, m, p.b)?);
    }
}

/// Infallible convenience wrapper around [`adaptive`].
pub fn adaptive_fn<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    adaptive(|x| Ok(f(x)), a, b, tol)
}

/// Tanh–sinh quadrature on `[a, b]`; levels are refined until two
/// successive estimates agree to `rel`. Tolerates integrable endpoint
/// singularities.
pub fn tanh_sinh<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, rel: f64) -> Result<Estimate> {
    use std::f64::consts::FRAC_PI_2;
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let tmax = 4.5;
    let mut h = 0.5;
    let mut sum = {
        let v = f(c)?;
        v * FRAC_PI_2
    };
    let add = |f: &mut F, t: f64| -> Result<f64> {
        let s = FRAC_PI_2 * t.sinh();
        let ch = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance to the endpoints, computed without cancellation
        let d = 1.0 / (s.exp() * ch);
        let mut acc = 0.0;
        let xl = a + hw * d;
        let xr = b - hw * d;
        if xl > a && xl < b {
            acc += w * f(xl)?;
        }
        if xr > a && xr < b {
            acc += w * f(xr)?;
        }
        Ok(acc)
    };
    let mut k = 1;
    while (k as f64) * h <= tmax {
        sum += add(&mut f, k as f64 * h)?;
        k += 1;
    }
    let mut prev = sum * h * hw;
    let mut err = f64::INFINITY;
    for _level in 0..10 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= tmax {
            sum += add(&mut f, k as f64 * h)?;
            k += 2;
        }
        let cur = sum * h * hw;
        err = (cur - prev).abs();
        if err <= rel * cur.abs() {
            return Ok(Estimate { value: cur, error: err, intervals: 1 });
        }
        prev = cur;
    }
    Err(Error::Quadrature { value: prev, estimate: err })
}
