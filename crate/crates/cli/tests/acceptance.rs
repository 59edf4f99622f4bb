//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its headline numbers (visible with `--nocapture`). Criteria 7, 8 and 10
//! are statistical and pinned to [`SEED`]; everything else is deterministic
//! outright.
//!
//! Run with `cargo test -p omlab-cli --test acceptance`.

use omlab_core::analysis;
use omlab_core::bellman::{self, checks};
use omlab_core::exponent::Exponent;
use omlab_core::geom::Vec2;
use omlab_core::laguerre::{least_positive_root, LaguerreBranch};
use omlab_core::rng::CounterRng;
use omlab_core::simulator::{
    estimate_norms, estimate_norms_with_moments, supermartingale_track, SimConfig, Strategy,
};
use std::collections::BTreeMap;
use std::process::Command;

const SEED: u64 = 20260808;
const P_GRID: [f64; 5] = [1.1, 1.25, 1.5, 1.75, 2.0];
const STRATEGIES: [&str; 5] = [
    "constant",
    "angle-chase",
    "equalize",
    "random-adapted",
    "freeze-after-hit",
];

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).unwrap()
}

fn strategy(name: &str) -> Strategy {
    Strategy::by_name(name, &BTreeMap::new()).unwrap()
}

#[test]
fn criterion_01_p2_anchor() {
    let p2 = exponent(2.0);
    let cert = least_positive_root(&p2, 1e-12, LaguerreBranch::Regular).unwrap();
    let z2 = 2.0 - 2.0f64.sqrt();
    assert!((cert.root - z2).abs() < 1e-10, "z_2 = {}", cert.root);

    let c_right = analysis::c_right(&p2, 1e-12).unwrap();
    let c_left = analysis::c_left(&p2, 1e-12).unwrap();
    assert!((c_right - 1.0).abs() < 1e-9, "c_right(2) = {c_right}");
    assert!((c_left - 1.0).abs() < 1e-9, "c_left(2) = {c_left}");

    let refs = analysis::reference_constants(&p2);
    assert!((refs.thm1_left - 1.0).abs() < 1e-14);
    assert!((refs.thm1_right - 1.0).abs() < 1e-14);

    println!(
        "PASS criterion 1: z_2 = {:.12} (|err| {:.1e}), c_right(2) = c_left(2) = 1 within 1e-9",
        cert.root,
        (cert.root - z2).abs()
    );
}

#[test]
fn criterion_02_integer_root_oracle() {
    // independent oracle: explicit polynomial coefficients + plain bisection
    let polys: [(f64, &[f64]); 3] = [
        (3.0, &[1.0, -3.0, 1.5, -1.0 / 6.0]),
        (4.0, &[1.0, -4.0, 3.0, -2.0 / 3.0, 1.0 / 24.0]),
        (5.0, &[1.0, -5.0, 5.0, -5.0 / 3.0, 5.0 / 24.0, -1.0 / 120.0]),
    ];
    let eval = |coeffs: &[f64], s: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c);
    // oracle outputs computed before the build, frozen:
    let frozen = [0.4157745568, 0.3225476896, 0.2635603197];

    for ((pv, coeffs), frozen_root) in polys.iter().zip(frozen) {
        let (mut lo, mut hi) = (1e-6, 0.9);
        assert!(eval(coeffs, lo) * eval(coeffs, hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if eval(coeffs, lo) * eval(coeffs, mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!(
            (oracle - frozen_root).abs() < 1e-9,
            "oracle drifted from its frozen value at p = {pv}"
        );
        let cert = least_positive_root(&exponent(*pv), 1e-10, LaguerreBranch::Regular).unwrap();
        assert!(
            (cert.root - oracle).abs() < 1e-8,
            "p = {pv}: {} vs oracle {oracle}",
            cert.root
        );
    }
    println!("PASS criterion 2: certified roots match polynomial-bisection oracles at p = 3, 4, 5 within 1e-8");
}

#[test]
fn criterion_03_constants_transcription() {
    for pv in [2.0, 3.0, 4.0] {
        let p = exponent(pv);
        let refs = analysis::reference_constants(&p);
        let p_star = if pv >= 2.0 { pv } else { pv / (pv - 1.0) };
        assert!((refs.burkholder - (p_star - 1.0)).abs() < 1e-14);
        assert!((refs.ba_sqrt - (2.0 * (pv * pv - pv)).sqrt()).abs() < 1e-14);
        assert!((refs.ba_interp - 1.575 * (p_star - 1.0)).abs() < 1e-14);
    }
    println!("PASS criterion 3: p*-1, sqrt(2(p^2-p)), 1.575(p*-1) reproduce direct arithmetic at p = 2, 3, 4 to 1e-14");
}

#[test]
fn criterion_04_majorization() {
    let mut worst = f64::INFINITY;
    for pv in P_GRID {
        let report = checks::check_majorization(&exponent(pv), 100_000, SEED);
        assert!(
            report.passed(),
            "majorization failed at p = {pv}: {:?}",
            report.worst_case
        );
        worst = worst.min(report.worst);
    }
    // p = 2: u and v coincide identically
    let p2 = exponent(2.0);
    let mut rng = CounterRng::new(SEED, 0, 0x41);
    let mut max_gap = 0.0f64;
    for _ in 0..100_000 {
        let point = bellman::Point2x2::new(
            Vec2(rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)),
            Vec2(rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)),
        );
        let u = bellman::u_value(&point, &p2).unwrap();
        let v = bellman::v_value(&point, &p2);
        max_gap = max_gap.max((u - v).abs() / (1.0 + u.abs() + v.abs()));
    }
    assert!(max_gap < 1e-12, "p = 2 identity violated: {max_gap}");
    println!(
        "PASS criterion 4: u - v >= -1e-12 on 1e5 points for each p (worst rel gap {worst:.3e}); |u - v| < 1e-12 at p = 2 (max {max_gap:.3e})"
    );
}

#[test]
fn criterion_05_concavity_trace() {
    let mut worst_trace = f64::NEG_INFINITY;
    let mut worst_c = f64::INFINITY;
    let mut worst_fd = 0.0f64;
    for pv in P_GRID {
        let p = exponent(pv);
        let trace = checks::check_concavity_trace(&p, 100_000, SEED, bellman::DEFAULT_FD_STEP);
        assert!(
            trace.passed(),
            "trace positive at p = {pv}: worst {} ({:?})",
            trace.worst,
            trace.worst_case
        );
        worst_trace = worst_trace.max(trace.worst);

        let abc = checks::check_abc_nonnegativity(&p, 100_000, SEED);
        assert!(
            abc.passed(),
            "C < -1e-8 at p = {pv}: worst {} ({:?})",
            abc.worst,
            abc.worst_case
        );
        worst_c = worst_c.min(abc.worst);

        let fd = checks::check_fd_oracle(&p, 100_000, SEED, bellman::DEFAULT_FD_STEP);
        assert!(
            fd.passed(),
            "fd mismatch at p = {pv}: worst {} ({:?})",
            fd.worst,
            fd.worst_case
        );
        worst_fd = worst_fd.max(fd.worst);
    }
    println!(
        "PASS criterion 5: trace <= 1e-6 (worst {worst_trace:.3e}), C >= -1e-8 (worst {worst_c:.3e}), |fd - analytic| <= 1e-6 (worst {worst_fd:.3e}) on 1e5 samples per p"
    );
}

/// Second derivative of `t -> u(x + ht, y + kt)` through the full Hessian of
/// `u` in the four coordinates; an algebraic route independent of the
/// library's chain rule through `(|x+th|, |y+tk|)`.
fn hessian_oracle(x: Vec2, y: Vec2, h: Vec2, k: Vec2, p: &Exponent) -> f64 {
    let pv = p.value();
    let beta = p.p_star() - 1.0;
    let alpha = bellman::alpha(p).unwrap();
    let (r, rho) = (x.norm(), y.norm());
    let sigma = r + rho;
    let (s1, s2, s3) = (
        sigma.powf(pv - 1.0),
        sigma.powf(pv - 2.0),
        sigma.powf(pv - 3.0),
    );
    let w = rho - beta * r;
    let f_r = alpha * (-beta * s1 + w * (pv - 1.0) * s2);
    let f_rho = alpha * (s1 + w * (pv - 1.0) * s2);
    let f_rr = alpha * (-2.0 * beta * (pv - 1.0) * s2 + w * (pv - 1.0) * (pv - 2.0) * s3);
    let f_rhorho = alpha * (2.0 * (pv - 1.0) * s2 + w * (pv - 1.0) * (pv - 2.0) * s3);
    let f_rrho = alpha * ((1.0 - beta) * (pv - 1.0) * s2 + w * (pv - 1.0) * (pv - 2.0) * s3);
    let a = x.dot(h) / r;
    let b = y.dot(k) / rho;
    f_rr * a * a
        + f_r * (h.norm_sq() - a * a) / r
        + 2.0 * f_rrho * a * b
        + f_rhorho * b * b
        + f_rho * (k.norm_sq() - b * b) / rho
}

#[test]
fn criterion_05b_symbolic_oracle_agreement() {
    // the pinned sample: G'' < 0, frozen from the oracle before the build
    let p = exponent(1.5);
    let x = Vec2(1.0, 0.0);
    let y = Vec2(0.3, 0.2);
    let h = Vec2(0.6, 0.8);
    let k = Vec2::ZERO;
    let oracle = hessian_oracle(x, y, h, k, &p);
    assert!((oracle - (-3.021556624915)).abs() < 1e-9, "oracle = {oracle}");
    let analytic =
        bellman::g_second_analytic(&bellman::Point2x2::new(x, y), h, k, &p).unwrap();
    assert!((analytic - oracle).abs() < 1e-12);

    // and on random smooth samples for every p in the grid
    for pv in P_GRID {
        let p = exponent(pv);
        let mut rng = CounterRng::new(SEED, 1, 0x42);
        for _ in 0..2_000 {
            let x = Vec2(rng.uniform_in(0.2, 2.0), rng.uniform_in(-2.0, 2.0));
            let y = Vec2(rng.uniform_in(0.2, 2.0), rng.uniform_in(-2.0, 2.0));
            let h = Vec2(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0));
            let k = Vec2(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0));
            let oracle = hessian_oracle(x, y, h, k, &p);
            let analytic =
                bellman::g_second_analytic(&bellman::Point2x2::new(x, y), h, k, &p).unwrap();
            assert!(
                (analytic - oracle).abs() <= 1e-10 * (1.0 + oracle.abs()),
                "p = {pv}: {analytic} vs {oracle} at x={x:?} y={y:?}"
            );
        }
    }
    println!("PASS criterion 5b: chain-rule G'' agrees with the independent Hessian oracle (pinned value -3.021556624915)");
}

#[test]
fn criterion_06_half_projection() {
    let report = checks::check_half_projection(10_000, SEED);
    assert!(report.passed(), "worst defect {}", report.worst);
    println!(
        "PASS criterion 6: half-projection identity exact to 1e-12 on 1e4 conformal matrices (worst {:.3e})",
        report.worst
    );
}

#[test]
fn criterion_07_simulation_bound() {
    let mut lines = Vec::new();
    for pv in P_GRID {
        let p = exponent(pv);
        for name in STRATEGIES {
            let mut config = SimConfig::new(p, SEED);
            config.paths = 100_000;
            config.steps = 1_000;
            let (report, moments) =
                estimate_norms_with_moments(&config, &strategy(name)).unwrap();
            let three_sigma = 3.0 * (report.stderr_x + report.stderr_y);
            assert!(
                report.ratio <= report.bound + three_sigma,
                "{name} at p = {pv}: ratio {} > bound {} + {three_sigma}",
                report.ratio,
                report.bound
            );
            // martingale property: E X_T = X_0 componentwise within 3 se
            assert!(
                moments.mean_x.0.abs() <= 3.0 * moments.se_x.0
                    && moments.mean_x.1.abs() <= 3.0 * moments.se_x.1,
                "{name} at p = {pv}: mean X_T = {:?}",
                moments.mean_x
            );
            // Ito isometry: E|X_T|^2 = |X_0|^2 + E<X> within 3 se
            assert!(
                (moments.mean_norm_x_sq - moments.mean_qv_x).abs()
                    <= 3.0 * moments.se_norm_x_sq,
                "{name} at p = {pv}: isometry {} vs {}",
                moments.mean_norm_x_sq,
                moments.mean_qv_x
            );
            lines.push(format!(
                "  p={pv:<5} {name:<17} ratio {:.6} <= bound {:.6} + {three_sigma:.6}",
                report.ratio, report.bound
            ));
        }
    }
    // frozen regression number for the adversarial probe
    let mut config = SimConfig::new(exponent(1.5), SEED);
    config.paths = 100_000;
    config.steps = 1_000;
    let report = estimate_norms(&config, &strategy("angle-chase")).unwrap();
    assert!(
        (report.ratio - 0.9552701595568586).abs() < 1e-9,
        "angle-chase regression moved: {}",
        report.ratio
    );
    println!("PASS criterion 7: ratio <= bound + 3 sigma, martingale mean and Ito isometry within 3 sigma for 5 strategies x 5 exponents (1e5 paths x 1e3 steps)");
    for line in lines {
        println!("{line}");
    }
}

#[test]
fn criterion_08_supermartingale() {
    for pv in P_GRID {
        let p = exponent(pv);
        for name in ["angle-chase", "random-adapted"] {
            let mut config = SimConfig::new(p, SEED);
            config.paths = 20_000;
            config.steps = 500;
            config.subordination_factor = SimConfig::proof_factor(&p);
            let track = supermartingale_track(&config, &strategy(name), 8).unwrap();
            for point in &track {
                assert!(
                    point.mean_u <= 3.0 * point.half_width,
                    "{name} at p = {pv}, t = {}: mean u = {} (se {})",
                    point.t,
                    point.mean_u,
                    point.half_width
                );
            }
            for pair in track.windows(2) {
                assert!(
                    pair[1].mean_u
                        <= pair[0].mean_u + 3.0 * (pair[0].half_width + pair[1].half_width),
                    "{name} at p = {pv}: mean u increased beyond noise"
                );
            }
        }
    }
    println!("PASS criterion 8: E u(X_t, Y_t) <= 3 sigma and nonincreasing within noise at the proof factor p/(2(p-1))");
}

#[test]
fn criterion_09_conjecture_scan() {
    let anchor = analysis::conjecture_residual(&exponent(2.0), 1e-12).unwrap();
    assert!(anchor < 1e-9, "p = 2 residual = {anchor}");

    println!("PASS criterion 9: residual(2) = {anchor:.3e} < 1e-9; scan of p in [2, 8] step 0.25 on both branches (reported, not asserted):");
    for branch in [LaguerreBranch::Regular, LaguerreBranch::Second] {
        let rows = analysis::conjecture_scan(2.0, 8.0, 0.25, 1e-12, branch).unwrap();
        assert_eq!(rows.len(), 25);
        for row in &rows {
            assert!(row.residual.is_finite() && row.error_bound.is_finite());
            println!(
                "  {:?} p={:<5} z_p={:.12} z_p'={:.12} c_right={:.9} c_left={:.9} residual={:.6e} (err bound {:.1e})",
                branch,
                row.p,
                row.z_p,
                row.z_p_prime,
                row.c_right,
                row.c_left_at_conjugate,
                row.residual,
                row.error_bound
            );
        }
    }
}

#[test]
fn criterion_10_determinism() {
    let run = |args: &[&str], threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_omlab"))
            .args(args)
            .env("OMLAB_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{args:?}");
        out.stdout
    };
    let simulate = [
        "simulate", "--p", "1.25", "--strategy", "random-adapted", "--paths", "6000", "--steps",
        "80", "--seed", "314159", "--format", "json",
    ];
    let a = run(&simulate, "1");
    let b = run(&simulate, "1");
    let c = run(&simulate, "3");
    assert_eq!(a, b, "rerun changed simulate output");
    assert_eq!(a, c, "OMLAB_THREADS changed simulate output");

    let check = [
        "bellman-check", "--p", "1.75", "--samples", "4000", "--seed", "271828", "--format",
        "json",
    ];
    let a = run(&check, "1");
    let b = run(&check, "2");
    assert_eq!(a, b, "OMLAB_THREADS changed bellman-check output");

    let constants = ["constants", "--p-min", "2", "--p-max", "3", "--step", "0.25"];
    let a = run(&constants, "2");
    let b = run(&constants, "1");
    assert_eq!(a, b, "constants output not stable");

    println!("PASS criterion 10: stochastic commands byte-identical across reruns and OMLAB_THREADS settings");
}
