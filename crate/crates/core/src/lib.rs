//! One-sided approximation of Gaussians by functions of exponential type.
//!
//! The library evaluates the homogeneous de Branges structure functions
//! `A_ν`, `B_ν`, builds the extremal minorants and majorants of
//! `e^{-πλx²}` in the metric `|x|^{2ν+1} dx`, integrates them against
//! measures on the Gaussian parameter, and covers the periodic analogue
//! with orthogonal polynomials on the unit circle.

// NaN must fail parameter checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extremal;
pub mod hilbert;
pub mod lpinterp;
pub mod periodic;
pub mod quad;
pub mod specfun;
pub mod subordination;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Which one-sided problem is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Minorant, deficit `∫(G − L)`.
    Minus,
    /// Majorant, excess `∫(M − G)`.
    Plus,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" | "minorant" | "-" => Ok(Side::Minus),
            "plus" | "majorant" | "+" => Ok(Side::Plus),
            _ => Err(Error::InvalidParameter(format!("unknown side `{s}`"))),
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
