//! Discrete-time Monte Carlo engine for pairs (X, Y) of martingales on a
//! two-dimensional Brownian filtration, with X orthogonal (conformal
//! integrand) and Y differentially subordinate.
//!
//! Over a uniform grid with spacing `dt`, a path evolves by
//!
//! ```text
//! x += H dW,   y += K dW,   qv_x += |H|_F^2 dt,   qv_y += |K|_F^2 dt
//! ```
//!
//! with `dW` a pair of independent N(0, dt) draws and `(H, K)` chosen by a
//! predictable [`Strategy`] before each increment. Integrands are piecewise
//! constant over the grid, so the discrete stochastic integral is exact in
//! distribution for the built-in strategies.
//!
//! Reproducibility: every Gaussian is a pure function of
//! `(seed, path, step)` through counter-based streams, paths are reduced in
//! fixed-size blocks combined by pairwise summation in index order, and the
//! worker pool (capped by the `OMLAB_THREADS` environment variable) never
//! influences results. Identical configurations produce bit-identical
//! reports at any thread count.

pub mod strategy;

pub use strategy::{builtin_strategies, Strategy, StrategyInfo};

use crate::bellman::{u_value, Point2x2};
use crate::exponent::Exponent;
use crate::geom::{DirectionMatrix, Vec2};
use crate::rng::{CounterRng, RngStream};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("H is not conformal at step {step}")]
    Conformality { step: usize },
    #[error("subordination violated at step {step}: |K|_F^2 = {k_sq} > budget {budget}")]
    Subordination { step: usize, k_sq: f64, budget: f64 },
    #[error("run needs {needed} scalar draws, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("path index {index} out of range (paths = {paths})")]
    PathIndexOutOfRange { index: u64, paths: u64 },
    #[error("unknown strategy `{name}`; available: {catalog:?}")]
    UnknownStrategy {
        name: String,
        catalog: Vec<&'static str>,
    },
}

/// Stream id for the Brownian increments of a path.
const STREAM_INCREMENTS: u64 = 0;
/// Per-step strategy streams live at `STRATEGY_STREAM_BASE + step`.
const STRATEGY_STREAM_BASE: u64 = 1 << 32;
/// Paths per reduction block; block sums are combined pairwise in index
/// order, independent of scheduling.
const BLOCK: usize = 1024;

/// Simulation configuration. Fields are public; [`SimConfig::validate`]
/// runs before every engine entry point.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub p: Exponent,
    /// Total time horizon (> 0).
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub initial_x: Vec2,
    pub initial_y: Vec2,
    /// `|K|_F^2 <= subordination_factor * |H|_F^2` at every step. 1 is the
    /// theorem normalization; `p/(2(p-1))` is the proof-internal one.
    pub subordination_factor: f64,
    /// Cap on total scalar Gaussian draws (2 per step per path).
    pub draw_budget: u64,
}

impl SimConfig {
    pub fn new(p: Exponent, seed: u64) -> Self {
        SimConfig {
            p,
            horizon: 1.0,
            steps: 1_000,
            paths: 10_000,
            seed,
            initial_x: Vec2::ZERO,
            initial_y: Vec2::ZERO,
            subordination_factor: 1.0,
            draw_budget: 1_000_000_000,
        }
    }

    /// The proof-internal subordination budget `p/(2(p-1))`.
    pub fn proof_factor(p: &Exponent) -> f64 {
        let pv = p.value();
        pv / (2.0 * (pv - 1.0))
    }

    /// Norm bound implied for this configuration:
    /// `sqrt(subordination_factor * 2/(p^2 - p))`, which is
    /// `sqrt(2/(p^2-p))` at factor 1 and `p* - 1` at the proof factor.
    pub fn bound(&self) -> f64 {
        let pv = self.p.value();
        (self.subordination_factor * 2.0 / (pv * pv - pv)).sqrt()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.p.value() > 2.0 {
            return fail(format!("simulation requires 1 < p <= 2, got {}", self.p.value()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("horizon must be > 0, got {}", self.horizon));
        }
        if self.steps == 0 || self.paths == 0 {
            return fail("steps and paths must be >= 1".to_string());
        }
        if !self.initial_x.is_finite() || !self.initial_y.is_finite() {
            return fail("initial conditions must be finite".to_string());
        }
        if self.initial_y.norm() > self.initial_x.norm() {
            return fail(format!(
                "|Y_0| = {} must not exceed |X_0| = {}",
                self.initial_y.norm(),
                self.initial_x.norm()
            ));
        }
        if !(self.subordination_factor > 0.0 && self.subordination_factor.is_finite()) {
            return fail(format!(
                "subordination factor must be > 0, got {}",
                self.subordination_factor
            ));
        }
        let needed = 2u128 * self.steps as u128 * self.paths as u128;
        if needed > self.draw_budget as u128 {
            return Err(SimError::BudgetExceeded {
                needed,
                budget: self.draw_budget,
            });
        }
        Ok(())
    }
}

/// Running state of one path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathState {
    pub x: Vec2,
    pub y: Vec2,
    pub qv_x: f64,
    pub qv_y: f64,
    pub t: f64,
}

impl PathState {
    pub fn initial(config: &SimConfig) -> Self {
        PathState {
            x: config.initial_x,
            y: config.initial_y,
            qv_x: 0.0,
            qv_y: 0.0,
            t: 0.0,
        }
    }
}

/// One increment: validates the direction matrices, then advances the state.
pub fn step(
    state: &PathState,
    h: &DirectionMatrix,
    k: &DirectionMatrix,
    dw: Vec2,
    dt: f64,
    subordination_factor: f64,
    step_index: usize,
) -> Result<PathState, SimError> {
    if !h.is_conformal() {
        return Err(SimError::Conformality { step: step_index });
    }
    let h_sq = h.frobenius_sq();
    let k_sq = k.frobenius_sq();
    let budget = subordination_factor * h_sq;
    if k_sq > budget * (1.0 + 1e-9) {
        return Err(SimError::Subordination {
            step: step_index,
            k_sq,
            budget,
        });
    }
    let next = PathState {
        x: state.x + h.apply(dw),
        y: state.y + k.apply(dw),
        qv_x: state.qv_x + h_sq * dt,
        qv_y: state.qv_y + k_sq * dt,
        t: state.t + dt,
    };
    debug_assert!(
        next.qv_y <= subordination_factor * next.qv_x + 1e-12 * (1.0 + next.qv_x),
        "quadratic variation ledger violated: {} > {} * {}",
        next.qv_y,
        subordination_factor,
        next.qv_x
    );
    Ok(next)
}

fn simulate_path(
    config: &SimConfig,
    strategy: &Strategy,
    path_index: u64,
    mut observe: impl FnMut(usize, &PathState),
) -> Result<PathState, SimError> {
    let dt = config.horizon / config.steps as f64;
    let sqrt_dt = dt.sqrt();
    let increments = RngStream::new(config.seed, path_index, STREAM_INCREMENTS);
    let mut state = PathState::initial(config);
    for i in 0..config.steps {
        let mut strategy_rng =
            CounterRng::new(config.seed, path_index, STRATEGY_STREAM_BASE + i as u64);
        let (h, k) = strategy.directions(&state, &mut strategy_rng, config.subordination_factor);
        let dw = Vec2(
            increments.normal_at(2 * i as u64) * sqrt_dt,
            increments.normal_at(2 * i as u64 + 1) * sqrt_dt,
        );
        state = step(&state, &h, &k, dw, dt, config.subordination_factor, i)?;
        observe(i, &state);
    }
    Ok(state)
}

/// Run one path to its terminal state. A pure function of
/// `(config.seed, path_index)`: execution order and worker count never
/// matter.
pub fn run_path(
    config: &SimConfig,
    strategy: &Strategy,
    path_index: u64,
) -> Result<PathState, SimError> {
    config.validate()?;
    if path_index >= config.paths as u64 {
        return Err(SimError::PathIndexOutOfRange {
            index: path_index,
            paths: config.paths as u64,
        });
    }
    simulate_path(config, strategy, path_index, |_, _| {})
}

/// Monte Carlo estimates of the terminal `L^p` norms and their ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct SimReport {
    pub norm_x_p: f64,
    pub norm_y_p: f64,
    pub ratio: f64,
    pub stderr_x: f64,
    pub stderr_y: f64,
    /// `sqrt(subordination_factor * 2/(p^2 - p))`.
    pub bound: f64,
    pub paths_used: usize,
    pub u_track: Option<Vec<TrackPoint>>,
}

/// Mean of `u(X_t, Y_t)` at one checkpoint; `half_width` is one standard
/// error of the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackPoint {
    pub t: f64,
    pub mean_u: f64,
    pub half_width: f64,
}

/// Terminal moments used by the martingale-mean and Ito-isometry checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminalMoments {
    pub mean_x: Vec2,
    pub se_x: Vec2,
    pub mean_norm_x_sq: f64,
    pub se_norm_x_sq: f64,
    pub mean_qv_x: f64,
}

#[derive(Clone)]
struct BlockSums {
    paths: usize,
    xp: f64,
    xp2: f64,
    yp: f64,
    yp2: f64,
    x1: f64,
    x2: f64,
    x1_sq: f64,
    x2_sq: f64,
    xnorm_sq: f64,
    xnorm_4: f64,
    qv_x: f64,
    u_sum: Vec<f64>,
    u_sq_sum: Vec<f64>,
}

impl BlockSums {
    fn zero(checkpoints: usize) -> Self {
        BlockSums {
            paths: 0,
            xp: 0.0,
            xp2: 0.0,
            yp: 0.0,
            yp2: 0.0,
            x1: 0.0,
            x2: 0.0,
            x1_sq: 0.0,
            x2_sq: 0.0,
            xnorm_sq: 0.0,
            xnorm_4: 0.0,
            qv_x: 0.0,
            u_sum: vec![0.0; checkpoints],
            u_sq_sum: vec![0.0; checkpoints],
        }
    }

    fn merge(mut self, other: &BlockSums) -> Self {
        self.paths += other.paths;
        self.xp += other.xp;
        self.xp2 += other.xp2;
        self.yp += other.yp;
        self.yp2 += other.yp2;
        self.x1 += other.x1;
        self.x2 += other.x2;
        self.x1_sq += other.x1_sq;
        self.x2_sq += other.x2_sq;
        self.xnorm_sq += other.xnorm_sq;
        self.xnorm_4 += other.xnorm_4;
        self.qv_x += other.qv_x;
        for (a, b) in self.u_sum.iter_mut().zip(&other.u_sum) {
            *a += b;
        }
        for (a, b) in self.u_sq_sum.iter_mut().zip(&other.u_sq_sum) {
            *a += b;
        }
        self
    }
}

/// Pairwise combination in index order; deterministic for any worker count.
fn pairwise_merge(mut blocks: Vec<BlockSums>, checkpoints: usize) -> BlockSums {
    if blocks.is_empty() {
        return BlockSums::zero(checkpoints);
    }
    while blocks.len() > 1 {
        blocks = blocks
            .chunks(2)
            .map(|pair| {
                if pair.len() == 2 {
                    pair[0].clone().merge(&pair[1])
                } else {
                    pair[0].clone()
                }
            })
            .collect();
    }
    blocks.pop().expect("nonempty")
}

fn thread_pool() -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("OMLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        builder = builder.num_threads(n);
    }
    builder.build().expect("worker pool")
}

/// Checkpoint step indices: `checkpoints` evenly spaced steps ending at the
/// horizon, skipping t = 0.
fn checkpoint_steps(steps: usize, checkpoints: usize) -> Vec<usize> {
    (1..=checkpoints)
        .map(|c| ((c * steps) as f64 / checkpoints as f64).round() as usize - 1)
        .collect()
}

fn run_ensemble(
    config: &SimConfig,
    strategy: &Strategy,
    checkpoints: Option<usize>,
) -> Result<(SimReport, TerminalMoments), SimError> {
    config.validate()?;
    let n_checks = checkpoints.unwrap_or(0);
    if n_checks > config.steps {
        return Err(SimError::InvalidConfig(format!(
            "{n_checks} checkpoints exceed {} steps",
            config.steps
        )));
    }
    let check_steps = checkpoint_steps(config.steps, n_checks);
    let pv = config.p.value();
    let n_blocks = config.paths.div_ceil(BLOCK);

    let block_results: Result<Vec<BlockSums>, SimError> = thread_pool().install(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let lo = b * BLOCK;
                let hi = ((b + 1) * BLOCK).min(config.paths);
                let mut sums = BlockSums::zero(n_checks);
                for path in lo..hi {
                    let mut check_cursor = 0usize;
                    let terminal =
                        simulate_path(config, strategy, path as u64, |i, state| {
                            while check_cursor < check_steps.len()
                                && check_steps[check_cursor] == i
                            {
                                let u = u_value(
                                    &Point2x2::new(state.x, state.y),
                                    &config.p,
                                )
                                .expect("config guarantees p <= 2");
                                sums.u_sum[check_cursor] += u;
                                sums.u_sq_sum[check_cursor] += u * u;
                                check_cursor += 1;
                            }
                        })?;
                    debug_assert_eq!(check_cursor, check_steps.len());
                    let nx = terminal.x.norm();
                    let ny = terminal.y.norm();
                    let wx = nx.powf(pv);
                    let wy = ny.powf(pv);
                    sums.paths += 1;
                    sums.xp += wx;
                    sums.xp2 += wx * wx;
                    sums.yp += wy;
                    sums.yp2 += wy * wy;
                    sums.x1 += terminal.x.0;
                    sums.x2 += terminal.x.1;
                    sums.x1_sq += terminal.x.0 * terminal.x.0;
                    sums.x2_sq += terminal.x.1 * terminal.x.1;
                    sums.xnorm_sq += nx * nx;
                    sums.xnorm_4 += nx * nx * nx * nx;
                    sums.qv_x += terminal.qv_x;
                }
                Ok(sums)
            })
            .collect()
    });
    let total = pairwise_merge(block_results?, n_checks);
    let n = total.paths as f64;

    // delta method: se of m^(1/p) is m^(1/p - 1)/p times the se of m
    let se_mean = |sum: f64, sum_sq: f64| -> f64 {
        if total.paths < 2 {
            return 0.0;
        }
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    };
    let norm_and_se = |sum: f64, sum_sq: f64| -> (f64, f64) {
        let mean = sum / n;
        if mean <= 0.0 {
            return (0.0, 0.0);
        }
        let norm = mean.powf(1.0 / pv);
        let se = se_mean(sum, sum_sq) * norm / (pv * mean);
        (norm, se)
    };
    let (norm_x_p, stderr_x) = norm_and_se(total.xp, total.xp2);
    let (norm_y_p, stderr_y) = norm_and_se(total.yp, total.yp2);

    let dt = config.horizon / config.steps as f64;
    let u_track = checkpoints.map(|_| {
        check_steps
            .iter()
            .enumerate()
            .map(|(c, &s)| TrackPoint {
                t: (s + 1) as f64 * dt,
                mean_u: total.u_sum[c] / n,
                half_width: se_mean(total.u_sum[c], total.u_sq_sum[c]),
            })
            .collect()
    });

    let report = SimReport {
        norm_x_p,
        norm_y_p,
        ratio: if norm_x_p > 0.0 {
            norm_y_p / norm_x_p
        } else {
            0.0
        },
        stderr_x,
        stderr_y,
        bound: config.bound(),
        paths_used: total.paths,
        u_track,
    };
    let moments = TerminalMoments {
        mean_x: Vec2(total.x1 / n, total.x2 / n),
        se_x: Vec2(
            se_mean(total.x1, total.x1_sq),
            se_mean(total.x2, total.x2_sq),
        ),
        mean_norm_x_sq: total.xnorm_sq / n,
        se_norm_x_sq: se_mean(total.xnorm_sq, total.xnorm_4),
        mean_qv_x: total.qv_x / n,
    };
    Ok((report, moments))
}

/// Estimate `|X_T|_p`, `|Y_T|_p`, their ratio, and standard errors.
pub fn estimate_norms(config: &SimConfig, strategy: &Strategy) -> Result<SimReport, SimError> {
    run_ensemble(config, strategy, None).map(|(report, _)| report)
}

/// As [`estimate_norms`], also returning the terminal moments for
/// martingale-mean and Ito-isometry checks.
pub fn estimate_norms_with_moments(
    config: &SimConfig,
    strategy: &Strategy,
) -> Result<(SimReport, TerminalMoments), SimError> {
    run_ensemble(config, strategy, None)
}

/// Full report including the `E u(X_t, Y_t)` checkpoint series.
pub fn estimate_with_track(
    config: &SimConfig,
    strategy: &Strategy,
    checkpoints: usize,
) -> Result<SimReport, SimError> {
    require_proof_budget(config)?;
    run_ensemble(config, strategy, Some(checkpoints)).map(|(report, _)| report)
}

/// Mean of `u(X_t, Y_t)` at evenly spaced checkpoints; the sequence starts
/// nonpositive (up to noise) and stays so when the subordination factor is
/// within the proof budget `p/(2(p-1))`.
pub fn supermartingale_track(
    config: &SimConfig,
    strategy: &Strategy,
    checkpoints: usize,
) -> Result<Vec<TrackPoint>, SimError> {
    require_proof_budget(config)?;
    run_ensemble(config, strategy, Some(checkpoints))
        .map(|(report, _)| report.u_track.expect("requested"))
}

fn require_proof_budget(config: &SimConfig) -> Result<(), SimError> {
    let budget = SimConfig::proof_factor(&config.p);
    if config.subordination_factor > budget * (1.0 + 1e-12) {
        return Err(SimError::InvalidConfig(format!(
            "supermartingale tracking needs subordination factor <= p/(2(p-1)) = {budget}, got {}",
            config.subordination_factor
        )));
    }
    Ok(())
}
