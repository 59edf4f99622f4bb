//! Assembles every constant of interest into tables: the closed-form
//! reference constants, the sharp constants computed from certified Laguerre
//! roots, and the scan of the conjectured root relation
//! `z_{p'}/(sqrt(2)(1 - z_{p'})) = sqrt(2)(1 - z_p)/z_p` between conjugate
//! exponents.

use crate::exponent::{Exponent, ExponentError};
use crate::laguerre::{least_positive_root, LaguerreBranch, LaguerreError, RootCertificate};
use thiserror::Error;

/// Interpolation coefficient of the best published Beurling-Ahlfors bound
/// `1.575 (p* - 1)`.
pub const BA_INTERP_COEFFICIENT: f64 = 1.575;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{0}")]
    Exponent(#[from] ExponentError),
    #[error("{0}")]
    Laguerre(#[from] LaguerreError),
    #[error("c_left requires 1 < p' <= 2, got {0}")]
    LeftRange(f64),
    #[error("c_right requires p >= 2, got {0}")]
    RightRange(f64),
    #[error("invalid grid: p_min {p_min}, p_max {p_max}, step {step}")]
    InvalidGrid { p_min: f64, p_max: f64, step: f64 },
}

/// Closed-form constants evaluated directly at `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceConstants {
    /// Burkholder's subordination constant `p* - 1`.
    pub burkholder: f64,
    /// `sqrt((p^2 - p)/2)`: left-side orthogonality, `2 <= p`.
    pub thm1_left: f64,
    /// `sqrt(2/(p^2 - p))`: right-side orthogonality, `1 < p <= 2`.
    pub thm1_right: f64,
    /// `sqrt(2(p^2 - p))`: the Beurling-Ahlfors estimate before interpolation.
    pub ba_sqrt: f64,
    /// `1.575 (p* - 1)`: the interpolated Beurling-Ahlfors estimate.
    pub ba_interp: f64,
}

/// Direct transcription of the closed-form constants.
pub fn reference_constants(p: &Exponent) -> ReferenceConstants {
    let pv = p.value();
    ReferenceConstants {
        burkholder: p.p_star() - 1.0,
        thm1_left: ((pv * pv - pv) / 2.0).sqrt(),
        thm1_right: (2.0 / (pv * pv - pv)).sqrt(),
        ba_sqrt: (2.0 * (pv * pv - pv)).sqrt(),
        ba_interp: BA_INTERP_COEFFICIENT * (p.p_star() - 1.0),
    }
}

/// `C_{p'} = z_{p'} / (sqrt(2) (1 - z_{p'}))` for `1 < p' <= 2`.
pub fn c_left(p_prime: &Exponent, tol: f64) -> Result<f64, AnalysisError> {
    c_left_on_branch(p_prime, tol, LaguerreBranch::Regular).map(|(c, _)| c)
}

/// `C_p = sqrt(2) (1 - z_p) / z_p` for `p >= 2`.
pub fn c_right(p: &Exponent, tol: f64) -> Result<f64, AnalysisError> {
    c_right_on_branch(p, tol, LaguerreBranch::Regular).map(|(c, _)| c)
}

fn c_left_from_root(z: f64) -> f64 {
    z / (2.0f64.sqrt() * (1.0 - z))
}

fn c_right_from_root(z: f64) -> f64 {
    2.0f64.sqrt() * (1.0 - z) / z
}

fn c_left_on_branch(
    p_prime: &Exponent,
    tol: f64,
    branch: LaguerreBranch,
) -> Result<(f64, RootCertificate), AnalysisError> {
    if p_prime.value() > 2.0 {
        return Err(AnalysisError::LeftRange(p_prime.value()));
    }
    let cert = least_positive_root(p_prime, tol, branch)?;
    Ok((c_left_from_root(cert.root), cert))
}

fn c_right_on_branch(
    p: &Exponent,
    tol: f64,
    branch: LaguerreBranch,
) -> Result<(f64, RootCertificate), AnalysisError> {
    if p.value() < 2.0 {
        return Err(AnalysisError::RightRange(p.value()));
    }
    let cert = least_positive_root(p, tol, branch)?;
    Ok((c_right_from_root(cert.root), cert))
}

/// `|C_p - C_{p'}|` with both roots certified to `tol`, regular branch.
pub fn conjecture_residual(p: &Exponent, tol: f64) -> Result<f64, AnalysisError> {
    let row = conjecture_row(p, tol, LaguerreBranch::Regular)?;
    Ok(row.residual)
}

/// One evaluation of the conjectured identity at conjugate exponents.
#[derive(Clone, Debug)]
pub struct ConjectureRow {
    pub p: f64,
    pub p_prime: f64,
    pub branch: LaguerreBranch,
    pub z_p: f64,
    pub z_p_prime: f64,
    pub c_right: f64,
    pub c_left_at_conjugate: f64,
    pub residual: f64,
    /// First-order bound on the residual error from the certified bracket
    /// widths: `|dC/dz|` at each root times its bracket width.
    pub error_bound: f64,
}

/// Evaluate both sides of the conjecture at `p >= 2` on one branch.
pub fn conjecture_row(
    p: &Exponent,
    tol: f64,
    branch: LaguerreBranch,
) -> Result<ConjectureRow, AnalysisError> {
    if p.value() < 2.0 {
        return Err(AnalysisError::RightRange(p.value()));
    }
    let conj = p.conjugate_exponent()?;
    let (right, cert_p) = c_right_on_branch(p, tol, branch)?;
    let (left, cert_conj) = c_left_on_branch(&conj, tol, branch)?;
    let dz_right = 2.0f64.sqrt() / (cert_p.root * cert_p.root);
    let dz_left = 1.0 / (2.0f64.sqrt() * (1.0 - cert_conj.root) * (1.0 - cert_conj.root));
    Ok(ConjectureRow {
        p: p.value(),
        p_prime: conj.value(),
        branch,
        z_p: cert_p.root,
        z_p_prime: cert_conj.root,
        c_right: right,
        c_left_at_conjugate: left,
        residual: (right - left).abs(),
        error_bound: dz_right * cert_p.width() + dz_left * cert_conj.width(),
    })
}

/// Scan the conjecture on a uniform grid of `p`.
pub fn conjecture_scan(
    p_min: f64,
    p_max: f64,
    step: f64,
    tol: f64,
    branch: LaguerreBranch,
) -> Result<Vec<ConjectureRow>, AnalysisError> {
    grid(p_min, p_max, step, 2.0)?
        .into_iter()
        .map(|pv| conjecture_row(&Exponent::new(pv)?, tol, branch))
        .collect()
}

/// Every constant of record at one exponent `p >= 2`.
#[derive(Clone, Copy, Debug)]
pub struct ConstantsRow {
    pub p: f64,
    pub p_prime: f64,
    pub burkholder: f64,
    pub thm1_left: f64,
    /// `sqrt(2/(p'^2 - p'))` at the conjugate exponent.
    pub thm1_right: f64,
    pub z_p: f64,
    pub z_p_prime: f64,
    pub c_right: f64,
    pub c_left_at_conjugate: f64,
    pub conjecture_residual: f64,
    pub ba_sqrt: f64,
    pub ba_interp: f64,
}

/// Compute the full constants row at one grid point.
pub fn constants_row(p: &Exponent, tol: f64) -> Result<ConstantsRow, AnalysisError> {
    let refs = reference_constants(p);
    let conj = p.conjugate_exponent()?;
    let conj_refs = reference_constants(&conj);
    let row = conjecture_row(p, tol, LaguerreBranch::Regular)?;
    debug_assert!(row.c_right > 0.0 && row.c_left_at_conjugate > 0.0);
    Ok(ConstantsRow {
        p: p.value(),
        p_prime: conj.value(),
        burkholder: refs.burkholder,
        thm1_left: refs.thm1_left,
        thm1_right: conj_refs.thm1_right,
        z_p: row.z_p,
        z_p_prime: row.z_p_prime,
        c_right: row.c_right,
        c_left_at_conjugate: row.c_left_at_conjugate,
        conjecture_residual: row.residual,
        ba_sqrt: refs.ba_sqrt,
        ba_interp: refs.ba_interp,
    })
}

/// One row per grid point of `[p_min, p_max]` in steps of `step`.
pub fn constants_table(
    p_min: f64,
    p_max: f64,
    step: f64,
    tol: f64,
) -> Result<Vec<ConstantsRow>, AnalysisError> {
    grid(p_min, p_max, step, 2.0)?
        .into_iter()
        .map(|pv| constants_row(&Exponent::new(pv)?, tol))
        .collect()
}

fn grid(p_min: f64, p_max: f64, step: f64, floor: f64) -> Result<Vec<f64>, AnalysisError> {
    if !(p_min >= floor && p_min <= p_max && step > 0.0)
        || !p_min.is_finite()
        || !p_max.is_finite()
        || !step.is_finite()
    {
        return Err(AnalysisError::InvalidGrid { p_min, p_max, step });
    }
    let count = ((p_max - p_min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| p_min + i as f64 * step).collect())
}
