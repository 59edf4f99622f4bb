//! Validated L^p exponents with their conjugate and `p*` companions.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("exponent must be a finite real > 1, got {0}")]
    OutOfRange(f64),
}

/// An exponent `p > 1` together with the conjugate `p' = p/(p-1)` and
/// `p* = max(p, p')`, so that `p* - 1` is Burkholder's subordination
/// constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponent {
    p: f64,
    conjugate: f64,
    p_star: f64,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, ExponentError> {
        if !p.is_finite() || p <= 1.0 {
            return Err(ExponentError::OutOfRange(p));
        }
        let conjugate = p / (p - 1.0);
        if !conjugate.is_finite() || conjugate <= 1.0 {
            // p so large that p/(p-1) rounds to 1
            return Err(ExponentError::OutOfRange(p));
        }
        Ok(Exponent {
            p,
            conjugate,
            p_star: p.max(conjugate),
        })
    }

    pub fn value(&self) -> f64 {
        self.p
    }

    /// `p' = p/(p-1)`, satisfying `1/p + 1/p' = 1`.
    pub fn conjugate(&self) -> f64 {
        self.conjugate
    }

    /// `p* = max(p, p')`.
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    /// The conjugate as a validated exponent in its own right.
    pub fn conjugate_exponent(&self) -> Result<Exponent, ExponentError> {
        Exponent::new(self.conjugate)
    }
}
