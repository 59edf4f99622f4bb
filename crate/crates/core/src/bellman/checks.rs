//! Randomized property suites over the Bellman function machinery.
//!
//! Every suite draws its samples from counter-based streams keyed by
//! `(seed, sample index)`, so a run is reproducible from its seed alone and
//! the offending sample of any failure can be regenerated from its index.

use super::{
    ab_terms, diagonal_negativity, g_second_analytic, half_projection, ito_trace_with_step,
    majorization_gap, subordination_budget, u_value, v_value, BellmanSample, BrownianCoordinate,
    Point2x2, DEFAULT_FD_STEP,
};
use crate::exponent::Exponent;
use crate::geom::{DirectionMatrix, Vec2};
use crate::rng::CounterRng;
use rayon::prelude::*;

/// Relative floor for the majorization gap.
pub const MAJORIZATION_TOL: f64 = 1e-12;
/// Scaled ceiling for the Ito trace on admissible samples.
pub const TRACE_TOL: f64 = 1e-6;
/// Scaled ceiling for |finite difference - analytic| second derivatives.
pub const FD_ORACLE_TOL: f64 = 1e-6;
/// Floor for the recovered C term.
pub const C_TERM_TOL: f64 = -1e-8;
/// Ceiling for the half-projection identity defect.
pub const HALF_PROJECTION_TOL: f64 = 1e-12;

/// Direction of a property bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    AtMost,
    AtLeast,
}

/// Outcome of one randomized suite.
#[derive(Clone, Debug)]
pub struct PropertyReport {
    pub name: &'static str,
    pub samples: usize,
    pub failures: usize,
    /// Most adverse value of the checked quantity across all samples.
    pub worst: f64,
    /// Bound the quantity must respect, in the direction of `sense`.
    pub limit: f64,
    pub sense: Sense,
    /// Debug form of the worst sample, for reproduction.
    pub worst_case: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

// Distinct stream ids so suites draw uncorrelated samples from one seed.
const STREAM_MAJORIZATION: u64 = 0x10;
const STREAM_DIAGONAL: u64 = 0x11;
const STREAM_TRACE: u64 = 0x12;
const STREAM_FD_ORACLE: u64 = 0x13;
const STREAM_ABC: u64 = 0x14;
const STREAM_HALF_PROJ: u64 = 0x15;
const STREAM_P2: u64 = 0x16;

fn point_in_box(rng: &mut CounterRng) -> Point2x2 {
    Point2x2::new(
        Vec2(rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)),
        Vec2(rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)),
    )
}

/// Random conformal matrix: a scaled rotation, reflected half the time.
pub fn sample_conformal(rng: &mut CounterRng) -> DirectionMatrix {
    let scale = rng.uniform_in(0.3, 2.0);
    let theta = rng.uniform_in(0.0, std::f64::consts::TAU);
    let m = DirectionMatrix::rotation(theta).scaled(scale);
    if rng.uniform() < 0.5 {
        DirectionMatrix::from_columns(m.column(0), -m.column(1))
    } else {
        m
    }
}

/// Random matrix inside the subordination ball `|K|_F^2 <= factor |H|_F^2`,
/// pushed onto the boundary a fifth of the time to stress the tight cases.
pub fn sample_subordinate(
    rng: &mut CounterRng,
    h: &DirectionMatrix,
    factor: f64,
) -> DirectionMatrix {
    let raw = DirectionMatrix::new([
        [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)],
        [rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0)],
    ]);
    let raw_sq = raw.frobenius_sq();
    let u = rng.uniform();
    if raw_sq == 0.0 {
        return DirectionMatrix::ZERO;
    }
    let fraction = if u > 0.8 { 1.0 } else { u / 0.8 };
    raw.scaled(fraction * (factor * h.frobenius_sq() / raw_sq).sqrt())
}

/// A point away from the non-smooth sets: `|x|` bounded below both
/// relatively and absolutely, `|y|` kept clear of the radial kink at y = 0,
/// and the contact ray `|y| = (p* - 1)|x|` excluded by a relative margin.
fn point_away_from_kinks(rng: &mut CounterRng, p: &Exponent, fd_step: f64) -> Point2x2 {
    let beta = p.p_star() - 1.0;
    for _ in 0..10_000 {
        let point = point_in_box(rng);
        let r = point.x.norm();
        let rho = point.y.norm();
        let sigma = r + rho;
        if r >= 1e-3 * sigma
            && r > 20.0 * fd_step
            && rho >= 0.05
            && (rho - beta * r).abs() >= 1e-6 * sigma
        {
            return point;
        }
    }
    unreachable!("rejection sampling starved");
}

/// Admissible sample for the concavity diagnostics: conformal `H`,
/// subordinate `K`, point away from the kinks.
pub fn sample_admissible(seed: u64, index: u64, p: &Exponent, fd_step: f64) -> BellmanSample {
    let mut rng = CounterRng::new(seed, index, STREAM_TRACE);
    let point = point_away_from_kinks(&mut rng, p, fd_step);
    let h = sample_conformal(&mut rng);
    let k = sample_subordinate(&mut rng, &h, subordination_budget(p));
    BellmanSample {
        point,
        h,
        k,
        p: *p,
    }
}

/// Magnitude of the Hessian quadratic form plus the finite-difference noise
/// floor; the scaled tolerances divide by this.
fn hessian_scale(sample: &BellmanSample) -> f64 {
    let p = &sample.p;
    let pv = p.value();
    let sigma = sample.point.x.norm() + sample.point.y.norm();
    (1.0 + sample.h.frobenius_sq() + sample.k.frobenius_sq())
        * (1.0 + p.p_star() - 1.0)
        * (1.0 + sigma.powf(pv - 2.0) + sigma.powf(pv))
}

fn summarize(
    name: &'static str,
    samples: usize,
    limit: f64,
    sense: Sense,
    results: Vec<(f64, bool)>,
    describe: impl Fn(usize) -> String,
) -> PropertyReport {
    let mut worst = match sense {
        Sense::AtMost => f64::NEG_INFINITY,
        Sense::AtLeast => f64::INFINITY,
    };
    let mut worst_index = 0usize;
    let mut failures = 0usize;
    for (i, &(value, failed)) in results.iter().enumerate() {
        let more_adverse = match sense {
            Sense::AtMost => value > worst,
            Sense::AtLeast => value < worst,
        };
        if more_adverse {
            worst = value;
            worst_index = i;
        }
        if failed {
            failures += 1;
        }
    }
    PropertyReport {
        name,
        samples,
        failures,
        worst,
        limit,
        sense,
        worst_case: if samples > 0 {
            Some(describe(worst_index))
        } else {
            None
        },
    }
}

/// `u - v >= -1e-12` relative, on unrestricted random points.
pub fn check_majorization(p: &Exponent, samples: usize, seed: u64) -> PropertyReport {
    let point_at = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_MAJORIZATION);
        point_in_box(&mut rng)
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let point = point_at(i);
            let gap = majorization_gap(&point, p).expect("p <= 2");
            let u = u_value(&point, p).expect("p <= 2");
            let v = v_value(&point, p);
            let rel = gap / (1.0 + u.abs() + v.abs());
            (rel, rel < -MAJORIZATION_TOL)
        })
        .collect();
    summarize(
        "majorization",
        samples,
        -MAJORIZATION_TOL,
        Sense::AtLeast,
        results,
        |i| format!("{:?} at p = {}", point_at(i), p.value()),
    )
}

/// `u <= 1e-12` whenever `|y| <= |x|`.
pub fn check_diagonal_negativity(p: &Exponent, samples: usize, seed: u64) -> PropertyReport {
    let point_at = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_DIAGONAL);
        let x = Vec2(rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0));
        let direction = rng.uniform_in(0.0, std::f64::consts::TAU);
        let len = x.norm() * rng.uniform();
        Point2x2::new(x, Vec2(direction.cos() * len, direction.sin() * len))
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let point = point_at(i);
            let ok = diagonal_negativity(&point, p).expect("|y| <= |x| by construction");
            let u = u_value(&point, p).expect("p <= 2");
            (u, !ok)
        })
        .collect();
    summarize(
        "diagonal-negativity",
        samples,
        super::DIAGONAL_TOL,
        Sense::AtMost,
        results,
        |i| format!("{:?} at p = {}", point_at(i), p.value()),
    )
}

/// Ito trace nonpositive (scaled) on admissible samples.
pub fn check_concavity_trace(
    p: &Exponent,
    samples: usize,
    seed: u64,
    fd_step: f64,
) -> PropertyReport {
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let sample = sample_admissible(seed, i as u64, p, fd_step);
            let trace = ito_trace_with_step(&sample, fd_step).expect("sample is admissible");
            let scaled = trace / hessian_scale(&sample);
            (scaled, scaled > TRACE_TOL)
        })
        .collect();
    summarize(
        "concavity-trace",
        samples,
        TRACE_TOL,
        Sense::AtMost,
        results,
        |i| format!("{:?}", sample_admissible(seed, i as u64, p, fd_step)),
    )
}

/// Finite-difference `G''` against the closed-form chain rule, per column.
pub fn check_fd_oracle(p: &Exponent, samples: usize, seed: u64, fd_step: f64) -> PropertyReport {
    let sample_at = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_FD_ORACLE);
        let point = point_away_from_kinks(&mut rng, p, fd_step);
        let h = sample_conformal(&mut rng);
        let k = sample_subordinate(&mut rng, &h, subordination_budget(p));
        BellmanSample {
            point,
            h,
            k,
            p: *p,
        }
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let sample = sample_at(i);
            let mut worst = 0.0f64;
            for j in BrownianCoordinate::BOTH {
                let h = sample.h.column(j.index());
                let k = sample.k.column(j.index());
                let analytic =
                    g_second_analytic(&sample.point, h, k, p).expect("point off the kinks");
                let coarse = super::g_second_fd(&sample, j, fd_step).expect("admissible");
                let fine = super::g_second_fd(&sample, j, fd_step / 2.0).expect("admissible");
                let fd = (4.0 * fine - coarse) / 3.0;
                worst = worst.max((fd - analytic).abs() / hessian_scale(&sample));
            }
            (worst, worst > FD_ORACLE_TOL)
        })
        .collect();
    summarize(
        "fd-vs-analytic",
        samples,
        FD_ORACLE_TOL,
        Sense::AtMost,
        results,
        |i| format!("{:?}", sample_at(i)),
    )
}

/// The recovered `C` term stays nonnegative (above -1e-8 scaled) on
/// admissible samples, including points with small `|y|`.
pub fn check_abc_nonnegativity(p: &Exponent, samples: usize, seed: u64) -> PropertyReport {
    let beta = p.p_star() - 1.0;
    let sample_at = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_ABC);
        let point = loop {
            let candidate = point_in_box(&mut rng);
            let r = candidate.x.norm();
            let rho = candidate.y.norm();
            let sigma = r + rho;
            // analytic route: only |x| and |y| conditioning floors apply
            if r >= 1e-3 * sigma && r >= 1e-3 && rho >= 1e-3 {
                let _ = beta;
                break candidate;
            }
        };
        let h = sample_conformal(&mut rng);
        let k = sample_subordinate(&mut rng, &h, subordination_budget(p));
        BellmanSample {
            point,
            h,
            k,
            p: *p,
        }
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let sample = sample_at(i);
            let terms = ab_terms(&sample).expect("|x| > 0");
            let scaled = terms.c / hessian_scale(&sample);
            (scaled, scaled < C_TERM_TOL)
        })
        .collect();
    summarize(
        "abc-c-nonnegative",
        samples,
        C_TERM_TOL,
        Sense::AtLeast,
        results,
        |i| format!("{:?}", sample_at(i)),
    )
}

/// `(e.H_1)^2 + (e.H_2)^2 = |H|_F^2 / 2` for conformal `H` and unit `e`.
pub fn check_half_projection(samples: usize, seed: u64) -> PropertyReport {
    let draw = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_HALF_PROJ);
        let h = sample_conformal(&mut rng);
        let theta = rng.uniform_in(0.0, std::f64::consts::TAU);
        (h, Vec2(theta.cos(), theta.sin()))
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let (h, e) = draw(i);
            let defect =
                (half_projection(e, &h).expect("unit e") - 0.5 * h.frobenius_sq()).abs();
            (defect, defect > HALF_PROJECTION_TOL)
        })
        .collect();
    summarize(
        "half-projection",
        samples,
        HALF_PROJECTION_TOL,
        Sense::AtMost,
        results,
        |i| format!("{:?}", draw(i)),
    )
}

/// At p = 2 the machinery collapses to closed forms: `u = |y|^2 - |x|^2`
/// identically equal to `v`, and `G'' = 2(|k|^2 - |h|^2)`.
pub fn check_p2_closed_forms(samples: usize, seed: u64) -> PropertyReport {
    let p = Exponent::new(2.0).expect("2 is a valid exponent");
    let sample_at = |i: usize| {
        let mut rng = CounterRng::new(seed, i as u64, STREAM_P2);
        let point = point_away_from_kinks(&mut rng, &p, DEFAULT_FD_STEP);
        let h = sample_conformal(&mut rng);
        let k = sample_subordinate(&mut rng, &h, subordination_budget(&p));
        BellmanSample { point, h, k, p }
    };
    let results: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let sample = sample_at(i);
            let point = &sample.point;
            let u = u_value(point, &p).expect("p = 2");
            let closed = point.y.norm_sq() - point.x.norm_sq();
            let scale = 1.0 + closed.abs();
            let mut worst = ((u - closed) / scale).abs() / 1e-6;
            let gap = (u - v_value(point, &p)).abs() / scale / 1e-6;
            worst = worst.max(gap);
            for j in BrownianCoordinate::BOTH {
                let h = sample.h.column(j.index());
                let k = sample.k.column(j.index());
                let fd = super::g_second_fd(&sample, j, DEFAULT_FD_STEP).expect("admissible");
                let expected = 2.0 * (k.norm_sq() - h.norm_sq());
                worst = worst.max((fd - expected).abs() / hessian_scale(&sample) / 1e-6);
            }
            // worst is in units of the per-part tolerance
            (worst * 1e-6, worst * 1e-6 > 1e-6)
        })
        .collect();
    summarize(
        "p2-closed-forms",
        samples,
        1e-6,
        Sense::AtMost,
        results,
        |i| format!("{:?}", sample_at(i)),
    )
}

/// The full battery at one exponent.
pub fn run_standard(p: &Exponent, samples: usize, seed: u64, fd_step: f64) -> Vec<PropertyReport> {
    let mut reports = vec![
        check_majorization(p, samples, seed),
        check_diagonal_negativity(p, samples, seed),
        check_concavity_trace(p, samples, seed, fd_step),
        check_fd_oracle(p, samples, seed, fd_step),
        check_abc_nonnegativity(p, samples, seed),
        check_half_projection(samples.min(10_000), seed),
    ];
    if p.value() == 2.0 {
        reports.push(check_p2_closed_forms(samples.min(10_000), seed));
    }
    reports
}
