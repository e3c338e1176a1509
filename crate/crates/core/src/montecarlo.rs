//! Seeded Monte Carlo simulation of repeated plays.
//!
//! Draws are produced by a counter-based generator keyed by
//! `(seed, episode, stage, draw index)`, so every episode owns its own
//! substream: results are bit-identical across runs and independent of any
//! execution order. Aggregation uses a fixed pairwise reduction over episode
//! order for the same reason.

use serde::Serialize;

use crate::gametree::{realize_stage, BehavioralStrategy, StageOutcome};
use crate::equilibrium::Stage;
use crate::model::{ContractParams, GameConfig};

/// A reproducible simulation request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSpec {
    pub episodes: u64,
    pub seed: u64,
    pub strategy: BehavioralStrategy,
}

/// Aggregates over all episodes. Standard errors are sample standard
/// deviations divided by the square root of the episode count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub episodes: u64,
    pub sensor_mean: f64,
    pub operator_mean: f64,
    pub sensor_se: f64,
    pub operator_se: f64,
    /// Empirical truthful-report frequency per stage.
    pub truth_freq: [f64; 2],
    /// Empirical verification frequency per stage.
    pub verify_freq: [f64; 2],
}

// ---------------------------------------------------------------------------
// Counter-based RNG
// ---------------------------------------------------------------------------

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` from the `(seed, episode, stage, index)` key.
pub fn draw_unit(seed: u64, episode: u64, stage: u32, index: u32) -> f64 {
    let mut z = seed ^ 0x9E37_79B9_7F4A_7C15;
    z = mix64(z.wrapping_add(mix64(episode)));
    z = mix64(z ^ ((u64::from(stage) << 32) | u64::from(index)));
    // top 53 bits
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic balanced pairwise summation (fixed reduction tree over the
/// input order; power-of-two counts of identical values sum exactly).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

fn play_episode(
    cfg: &GameConfig,
    contract: &ContractParams,
    strategy: &BehavioralStrategy,
    seed: u64,
    episode: u64,
) -> (StageOutcome, StageOutcome) {
    let truthful1 = draw_unit(seed, episode, 1, 0) < strategy.stage1.truth_prob;
    let verified1 = draw_unit(seed, episode, 1, 1) < strategy.verify1;
    let first = realize_stage(
        cfg,
        contract,
        Stage::One,
        0.0,
        truthful1,
        verified1,
        strategy.stage1.effort,
    );
    let plan2 = match strategy.stage2 {
        crate::gametree::Stage2Policy::Fixed(plan) => plan,
        crate::gametree::Stage2Policy::ByOutcome(map) => {
            let pick = |t: bool, v: bool| match (t, v) {
                (true, true) => map.verified_truthful,
                (true, false) => map.trusted_truthful,
                (false, true) => map.verified_falsified,
                (false, false) => map.trusted_falsified,
            };
            pick(truthful1, verified1)
        }
    };
    let truthful2 = draw_unit(seed, episode, 2, 0) < plan2.truth_prob;
    let verified2 = draw_unit(seed, episode, 2, 1) < strategy.verify2;
    let second = realize_stage(
        cfg,
        contract,
        Stage::Two,
        first.assessed_reputation,
        truthful2,
        verified2,
        plan2.effort,
    );
    (first, second)
}

/// Runs the simulation. Episode utilities use stage weights `(1, δ)`.
pub fn simulate(
    cfg: &GameConfig,
    contract: &ContractParams,
    spec: &SimulationSpec,
) -> SimulationResult {
    assert!(spec.episodes >= 1, "at least one episode");
    let n = spec.episodes;
    let mut sensor = Vec::with_capacity(n as usize);
    let mut operator = Vec::with_capacity(n as usize);
    let mut truth_counts = [0u64; 2];
    let mut verify_counts = [0u64; 2];

    for episode in 0..n {
        let (first, second) = play_episode(cfg, contract, &spec.strategy, spec.seed, episode);
        sensor.push(first.sensor_utility + cfg.discount * second.sensor_utility);
        operator.push(first.operator_utility + cfg.discount * second.operator_utility);
        truth_counts[0] += u64::from(first.truthful);
        truth_counts[1] += u64::from(second.truthful);
        verify_counts[0] += u64::from(first.verified);
        verify_counts[1] += u64::from(second.verified);
    }

    let count = n as f64;
    let sensor_mean = pairwise_sum(&sensor) / count;
    let operator_mean = pairwise_sum(&operator) / count;
    let se = |values: &[f64], mean: f64| {
        if values.len() < 2 {
            return 0.0;
        }
        let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let variance = pairwise_sum(&sq) / (count - 1.0);
        (variance / count).sqrt()
    };

    SimulationResult {
        episodes: n,
        sensor_mean,
        operator_mean,
        sensor_se: se(&sensor, sensor_mean),
        operator_se: se(&operator, operator_mean),
        truth_freq: [truth_counts[0] as f64 / count, truth_counts[1] as f64 / count],
        verify_freq: [verify_counts[0] as f64 / count, verify_counts[1] as f64 / count],
    }
}

// ---------------------------------------------------------------------------
// Trajectory log
// ---------------------------------------------------------------------------

/// One stage of one episode, in the documented CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub episode: u64,
    pub stage: u32,
    pub truthful: bool,
    pub verified: bool,
    pub effort: f64,
    pub report: f64,
    /// Reputation assessed for the stage.
    pub reputation: f64,
    pub payment: f64,
    pub u_sensor: f64,
    pub u_operator: f64,
}

/// Per-stage records of the first `max_episodes` episodes; replays the same
/// substreams as [`simulate`], so the log always matches the aggregates.
pub fn trajectory_log(
    cfg: &GameConfig,
    contract: &ContractParams,
    spec: &SimulationSpec,
    max_episodes: u64,
) -> Vec<TrajectoryRecord> {
    assert!(
        max_episodes <= spec.episodes,
        "log bound exceeds episode count"
    );
    let mut records = Vec::with_capacity((2 * max_episodes) as usize);
    for episode in 0..max_episodes {
        let (first, second) = play_episode(cfg, contract, &spec.strategy, spec.seed, episode);
        for (stage, outcome) in [(1u32, first), (2u32, second)] {
            records.push(TrajectoryRecord {
                episode,
                stage,
                truthful: outcome.truthful,
                verified: outcome.verified,
                effort: outcome.effort,
                report: outcome.report,
                reputation: outcome.assessed_reputation,
                payment: outcome.payment,
                u_sensor: outcome.sensor_utility,
                u_operator: outcome.operator_utility,
            });
        }
    }
    records
}
