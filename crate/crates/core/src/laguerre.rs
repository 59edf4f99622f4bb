//! The Laguerre function L_p and certified brackets for its least positive
//! root z_p in (0, 1).
//!
//! L_p solves `s L'' + (1 - s) L' + p L = 0`. For the `Regular` branch we sum
//! the power series `sum c_k s^k` with `c_0 = 1` and
//! `c_{k+1} = c_k (k - p) / (k + 1)^2`, which is analytic (hence bounded) at
//! `s = 0` and reduces to the Laguerre polynomial for integer `p`. The
//! linearly independent `Second` branch carries a logarithmic singularity at
//! zero and is produced by integrating the ODE away from `s = 1` with initial
//! data orthogonalized against the regular solution; it exists only to let
//! callers probe which branch the root conjecture is about.

use crate::exponent::Exponent;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LaguerreError {
    #[error("{what} out of range: {value}")]
    Domain { what: &'static str, value: f64 },
    #[error("series did not reach the tail bound within {max_terms} terms (p={p}, s={s})")]
    NonConvergence { p: f64, s: f64, max_terms: usize },
    #[error("root tolerance must be >= 1e-14, got {0}")]
    InvalidTolerance(f64),
    #[error("root certification supports p in (1.01, 64], got {0}")]
    UnsupportedExponent(f64),
    #[error("no sign change of the {branch:?} branch found on (0, 1) for p = {p}")]
    NoSignChange { p: f64, branch: LaguerreBranch },
}

/// Which solution of the Laguerre ODE to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LaguerreBranch {
    /// Power-series solution, value 1 at s = 0.
    Regular,
    /// Independent Frobenius solution, logarithmic at s = 0.
    Second,
}

/// Certified bracket around the least positive root of a Laguerre branch.
#[derive(Clone, Debug)]
pub struct RootCertificate {
    pub p: Exponent,
    pub branch: LaguerreBranch,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub root: f64,
    pub tolerance: f64,
}

impl RootCertificate {
    pub fn width(&self) -> f64 {
        self.bracket_hi - self.bracket_lo
    }
}

/// Largest admissible argument for evaluation.
pub const S_MAX: f64 = 2.0;
/// Term cap for the power series.
const MAX_TERMS: usize = 200;
/// Stop once the geometric tail bound falls below this.
const TAIL_BOUND: f64 = 1e-15;
/// Grid resolution of the sign-change scan on (0, 1).
const SCAN_POINTS: usize = 2048;
const SCAN_LO: f64 = 1e-6;
const SCAN_HI: f64 = 1.0 - 1e-6;
/// Relative step of the geometric ODE integrator for the second branch.
const ODE_STEP: f64 = 1e-3;

/// Value, first and second derivative of the regular power series.
///
/// Terms are summed until the running term magnitude times the geometric
/// factor `1/(1 - s/(k+1))` is below [`TAIL_BOUND`]; past `k > 2s + p` the
/// term ratio `|k-p| s/(k+1)^2` is below `s/(k+1) < 1`, which makes the
/// factor a valid tail bound.
fn series_eval(p: f64, s: f64) -> Result<(f64, f64, f64), LaguerreError> {
    let mut value = 0.0;
    let mut deriv = 0.0;
    let mut deriv2 = 0.0;
    let mut coeff = 1.0; // c_k
    let mut pow = 1.0; // s^k
    let mut pow_m1 = 0.0; // s^(k-1)
    let mut pow_m2 = 0.0; // s^(k-2)

    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let term = coeff * pow;
        value += term;
        let dterm = kf * coeff * pow_m1;
        deriv += dterm;
        let d2term = kf * (kf - 1.0) * coeff * pow_m2;
        deriv2 += d2term;

        if kf > 2.0 * s + p + 2.0 {
            let q = s / (kf + 1.0);
            let tail = term.abs().max(dterm.abs()).max(d2term.abs()) / (1.0 - q);
            if tail < TAIL_BOUND {
                return Ok((value, deriv, deriv2));
            }
        }

        coeff *= (kf - p) / ((kf + 1.0) * (kf + 1.0));
        pow_m2 = pow_m1;
        pow_m1 = pow;
        pow *= s;
    }
    Err(LaguerreError::NonConvergence {
        p,
        s,
        max_terms: MAX_TERMS,
    })
}

fn check_eval_domain(p: f64, s: f64, branch: LaguerreBranch) -> Result<(), LaguerreError> {
    if !p.is_finite() || p <= 0.0 {
        return Err(LaguerreError::Domain {
            what: "p",
            value: p,
        });
    }
    if !s.is_finite() || !(0.0..=S_MAX).contains(&s) {
        return Err(LaguerreError::Domain {
            what: "s",
            value: s,
        });
    }
    if branch == LaguerreBranch::Second && s == 0.0 {
        return Err(LaguerreError::Domain {
            what: "s (second branch is singular at 0)",
            value: s,
        });
    }
    Ok(())
}

/// L_p(s) on the chosen branch.
pub fn laguerre_eval(p: f64, s: f64, branch: LaguerreBranch) -> Result<f64, LaguerreError> {
    check_eval_domain(p, s, branch)?;
    match branch {
        LaguerreBranch::Regular => Ok(series_eval(p, s)?.0),
        LaguerreBranch::Second => Ok(second_branch_eval(p, s)?.0),
    }
}

/// dL_p/ds on the chosen branch.
pub fn laguerre_eval_derivative(
    p: f64,
    s: f64,
    branch: LaguerreBranch,
) -> Result<f64, LaguerreError> {
    check_eval_domain(p, s, branch)?;
    match branch {
        LaguerreBranch::Regular => Ok(series_eval(p, s)?.1),
        LaguerreBranch::Second => Ok(second_branch_eval(p, s)?.1),
    }
}

/// d^2 L_p/ds^2, from the twice term-wise differentiated series (regular) or
/// the ODE itself (second branch, s > 0).
pub fn laguerre_eval_second_derivative(
    p: f64,
    s: f64,
    branch: LaguerreBranch,
) -> Result<f64, LaguerreError> {
    check_eval_domain(p, s, branch)?;
    match branch {
        LaguerreBranch::Regular => Ok(series_eval(p, s)?.2),
        LaguerreBranch::Second => {
            let (value, deriv) = second_branch_eval(p, s)?;
            Ok(((s - 1.0) * deriv - p * value) / s)
        }
    }
}

/// Right-hand side of the first-order system for (L, L').
#[inline]
fn ode_rhs(p: f64, s: f64, l: f64, dl: f64) -> (f64, f64) {
    (dl, ((s - 1.0) * dl - p * l) / s)
}

#[inline]
fn rk4_step(p: f64, s: f64, l: f64, dl: f64, h: f64) -> (f64, f64) {
    let (k1l, k1d) = ode_rhs(p, s, l, dl);
    let (k2l, k2d) = ode_rhs(p, s + 0.5 * h, l + 0.5 * h * k1l, dl + 0.5 * h * k1d);
    let (k3l, k3d) = ode_rhs(p, s + 0.5 * h, l + 0.5 * h * k2l, dl + 0.5 * h * k2d);
    let (k4l, k4d) = ode_rhs(p, s + h, l + h * k3l, dl + h * k3d);
    (
        l + h / 6.0 * (k1l + 2.0 * k2l + 2.0 * k3l + k4l),
        dl + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Initial data for the second branch at s = 1: the unit vector in the
/// (L, L') phase plane orthogonal to the regular solution there.
fn second_branch_init(p: f64) -> Result<(f64, f64), LaguerreError> {
    let (l1, d1, _) = series_eval(p, 1.0)?;
    let norm = l1.hypot(d1);
    Ok((-d1 / norm, l1 / norm))
}

/// Integrate the ODE from s = 1 to `target` in geometric steps proportional
/// to the current s, so the step shrinks with the 1/s singularity.
fn second_branch_eval(p: f64, target: f64) -> Result<(f64, f64), LaguerreError> {
    let (mut l, mut dl) = second_branch_init(p)?;
    let mut s = 1.0;
    if target == 1.0 {
        return Ok((l, dl));
    }
    let downward = target < 1.0;
    loop {
        let h_full = if downward { -ODE_STEP * s } else { ODE_STEP * s };
        let remaining = target - s;
        if remaining.abs() <= h_full.abs() {
            let (nl, ndl) = rk4_step(p, s, l, dl, remaining);
            return Ok((nl, ndl));
        }
        let (nl, ndl) = rk4_step(p, s, l, dl, h_full);
        l = nl;
        dl = ndl;
        s += h_full;
    }
}

/// Values of the chosen branch on the scan grid, cheapest route per branch.
///
/// The second branch is integrated in one downward sweep that lands on every
/// grid point, rather than restarting from s = 1 for each of the 2048 points.
fn grid_values(p: f64, branch: LaguerreBranch, grid: &[f64]) -> Result<Vec<f64>, LaguerreError> {
    match branch {
        LaguerreBranch::Regular => grid.iter().map(|&s| Ok(series_eval(p, s)?.0)).collect(),
        LaguerreBranch::Second => {
            let (mut l, mut dl) = second_branch_init(p)?;
            let mut s = 1.0;
            let mut out = vec![0.0; grid.len()];
            for (slot, &target) in out.iter_mut().zip(grid.iter()).rev() {
                loop {
                    let h_full = -ODE_STEP * s;
                    let remaining = target - s;
                    if remaining.abs() <= h_full.abs() {
                        let (nl, _) = rk4_step(p, s, l, dl, remaining);
                        *slot = nl;
                        break;
                    }
                    let (nl, ndl) = rk4_step(p, s, l, dl, h_full);
                    l = nl;
                    dl = ndl;
                    s += h_full;
                }
            }
            Ok(out)
        }
    }
}

/// Certify the least positive root of the chosen branch in (0, 1).
///
/// Scans a uniform grid for the first sign change, bisects the bracket to
/// the requested width, then Newton-polishes the midpoint (kept strictly
/// inside the bracket). Supported exponents are p in (1.01, 64]: nearer to 1
/// the root approaches the boundary of (0, 1) and conditioning degrades.
pub fn least_positive_root(
    p: &Exponent,
    tolerance: f64,
    branch: LaguerreBranch,
) -> Result<RootCertificate, LaguerreError> {
    if !tolerance.is_finite() || tolerance < 1e-14 {
        return Err(LaguerreError::InvalidTolerance(tolerance));
    }
    let pv = p.value();
    if pv <= 1.01 || pv > 64.0 {
        return Err(LaguerreError::UnsupportedExponent(pv));
    }

    let eval = |s: f64| -> Result<f64, LaguerreError> { laguerre_eval(pv, s, branch) };
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| SCAN_LO + (SCAN_HI - SCAN_LO) * i as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values = grid_values(pv, branch, &grid)?;

    let mut bracket = None;
    for i in 0..SCAN_POINTS - 1 {
        let (a, b) = (values[i], values[i + 1]);
        if a == 0.0 {
            // exact zero on a grid point: certify a symmetric bracket around it
            let half = 0.5 * (SCAN_HI - SCAN_LO) / (SCAN_POINTS - 1) as f64;
            let (lo, hi) = (grid[i] - half, grid[i] + half);
            if lo > 0.0 && eval(lo)? * eval(hi)? < 0.0 {
                bracket = Some((lo, hi));
                break;
            }
            continue;
        }
        if a * b < 0.0 {
            bracket = Some((grid[i], grid[i + 1]));
            break;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or(LaguerreError::NoSignChange { p: pv, branch })?;

    // Bisection re-evaluates the endpoints so all sign logic uses one
    // consistent evaluation path.
    let mut f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    debug_assert!(f_lo * f_hi < 0.0);
    let lo_positive = f_lo > 0.0;
    for _ in 0..200 {
        if hi - lo <= tolerance {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // bracket is at floating-point resolution
        }
        let f_mid = eval(mid)?;
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let _ = f_lo;

    // Newton polish from the midpoint, never leaving the open bracket.
    let mut root = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = eval(root)?;
        let df = laguerre_eval_derivative(pv, root, branch)?;
        if df == 0.0 {
            break;
        }
        let next = root - f / df;
        if next <= lo || next >= hi {
            break;
        }
        root = next;
    }

    Ok(RootCertificate {
        p: *p,
        branch,
        bracket_lo: lo,
        bracket_hi: hi,
        root,
        tolerance,
    })
}
