//! Root certification against an independent series-bisection oracle.
//!
//! The oracle sums a fixed 400 terms of the defining series with Kahan
//! compensation and brackets the root by plain bisection; it shares no code
//! with the production evaluator (adaptive truncation, grid scan, Newton
//! polish). Oracle outputs are also frozen below as literals, so a
//! regression in either side breaks the test.

use omlab_core::exponent::Exponent;
use omlab_core::laguerre::{laguerre_eval, least_positive_root, LaguerreBranch};

fn oracle_series(p: f64, s: f64) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut coeff = 1.0f64;
    let mut pow = 1.0f64;
    for k in 0..400 {
        let term = coeff * pow;
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let kf = k as f64;
        coeff *= (kf - p) / ((kf + 1.0) * (kf + 1.0));
        pow *= s;
    }
    sum
}

fn oracle_bisect(p: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(oracle_series(p, lo) * oracle_series(p, hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if oracle_series(p, lo) * oracle_series(p, mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

// Oracle outputs, frozen.
const ORACLE_Z_1_5: f64 = 0.737684874000983;
const ORACLE_Z_3: f64 = 0.415774556783479;
const ORACLE_Z_4: f64 = 0.322547689619392;
const ORACLE_Z_5: f64 = 0.263560319718141;

#[test]
fn oracle_reproduces_its_frozen_values() {
    assert!((oracle_bisect(1.5, 0.5, 0.9) - ORACLE_Z_1_5).abs() < 1e-13);
    assert!((oracle_bisect(3.0, 0.2, 0.6) - ORACLE_Z_3).abs() < 1e-13);
    assert!((oracle_bisect(4.0, 0.2, 0.6) - ORACLE_Z_4).abs() < 1e-13);
    assert!((oracle_bisect(5.0, 0.1, 0.4) - ORACLE_Z_5).abs() < 1e-13);
}

#[test]
fn certified_roots_match_the_oracle() {
    for (pv, frozen) in [
        (1.5, ORACLE_Z_1_5),
        (3.0, ORACLE_Z_3),
        (4.0, ORACLE_Z_4),
        (5.0, ORACLE_Z_5),
    ] {
        let p = Exponent::new(pv).unwrap();
        let cert = least_positive_root(&p, 1e-10, LaguerreBranch::Regular).unwrap();
        assert!(
            (cert.root - frozen).abs() < 1e-9,
            "p = {pv}: {} vs oracle {frozen}",
            cert.root
        );
        assert!(cert.width() <= 1e-10);
    }
}

#[test]
fn production_series_agrees_with_oracle_series() {
    for pv in [1.2f64, 1.5, 2.7, 4.9, 7.3] {
        for i in 0..40 {
            let s = 0.05 * (i as f64 + 0.5);
            let ours = laguerre_eval(pv, s, LaguerreBranch::Regular).unwrap();
            let oracle = oracle_series(pv, s);
            assert!(
                (ours - oracle).abs() < 1e-12 * (1.0 + ours.abs()),
                "p = {pv}, s = {s}: {ours} vs {oracle}"
            );
        }
    }
}

#[test]
fn p2_root_has_closed_form() {
    let p = Exponent::new(2.0).unwrap();
    let cert = least_positive_root(&p, 1e-12, LaguerreBranch::Regular).unwrap();
    assert!((cert.root - (2.0 - 2f64.sqrt())).abs() < 1e-12);
}
