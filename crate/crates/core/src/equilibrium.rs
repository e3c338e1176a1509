//! Stage payoffs, pure and mixed equilibria, and closed-form expected
//! utilities of the two-stage game.
//!
//! Each stage is a 2×2 simultaneous game: the sensor reports truthfully (`T`)
//! or falsifies to the cap (`NT`, zero effort, report `x̄`), the operator
//! verifies (`V`) at cost `C` or trusts the report (`NV`). Second-stage
//! payments mix carried and current reputation with weight `ω` on the current
//! stage. The mixed strategies below make each side exactly indifferent, and
//! the expected-utility closed forms are the backward-induction values under
//! those strategies — the game-tree module re-derives all of them by brute
//! force.

use serde::Serialize;
use thiserror::Error;

use crate::model::{ContractParams, GameConfig, ModelError};

/// Errors from equilibrium computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    /// The stage-two mixed equilibrium needs `ω > 0` (existence requires
    /// `ω·h > C`, impossible at `ω = 0`).
    #[error("reputation weight omega must be positive: stage-2 mixing requires omega*h > C")]
    ZeroReputationWeight,
    /// `h + γ = 0`: no payment spread to randomize over.
    #[error("degenerate contract: h + gamma must be positive")]
    DegenerateContract,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Total payment weight carried by first-stage reputation: the current
/// payment plus the discounted carried share, `1 + (1 − ω)·δ`.
///
/// Always at least `ω`, with equality only at `ω = 1`.
pub fn effw(omega: f64, delta: f64) -> f64 {
    1.0 + (1.0 - omega) * delta
}

// ---------------------------------------------------------------------------
// Actions and stages
// ---------------------------------------------------------------------------

/// Sensor stage action: report the true effort, or exert nothing and claim
/// the cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorAction {
    Truthful,
    Falsify,
}

/// Operator stage action: audit the report, or trust it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorAction {
    Verify,
    Trust,
}

impl std::fmt::Display for SensorAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SensorAction::Truthful => "T",
            SensorAction::Falsify => "NT",
        })
    }
}

impl std::fmt::Display for OperatorAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OperatorAction::Verify => "V",
            OperatorAction::Trust => "NV",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stage {
    One,
    Two,
}

impl Stage {
    pub fn index(self) -> usize {
        match self {
            Stage::One => 1,
            Stage::Two => 2,
        }
    }
}

/// Payment structure of a stage: `payment = base + own · assessed_reputation`.
/// Stage one pays assessed reputation directly; stage two pays the carried
/// share plus the ω-weighted current assessment.
pub(crate) fn stage_payment_weights(
    contract: &ContractParams,
    stage: Stage,
    carried_reputation: f64,
) -> (f64, f64) {
    match stage {
        Stage::One => (0.0, 1.0),
        Stage::Two => (
            (1.0 - contract.reputation_weight) * carried_reputation,
            contract.reputation_weight,
        ),
    }
}

/// Reputation assessed for the stage, given what happened.
pub(crate) fn assessed_reputation(
    cfg: &GameConfig,
    contract: &ContractParams,
    truthful: bool,
    verified: bool,
    effort: f64,
) -> f64 {
    match (truthful, verified) {
        (true, true) => contract.reputation(cfg, effort) + contract.truth_boost,
        (true, false) => contract.reputation(cfg, effort),
        // detected falsification drops to the floor
        (false, true) => contract.reputation_floor,
        // an unverified falsifier claimed the cap
        (false, false) => contract.max_reputation,
    }
}

// ---------------------------------------------------------------------------
// Stage payoff matrix
// ---------------------------------------------------------------------------

/// The 2×2 stage game at a given truthful effort level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StagePayoffMatrix {
    pub stage: Stage,
    /// Effort the sensor exerts when truthful.
    pub effort: f64,
    /// Carried first-stage reputation (zero at stage one).
    pub carried_reputation: f64,
    /// `[sensor action][operator action]` → (sensor, operator) utilities.
    entries: [[(f64, f64); 2]; 2],
}

impl StagePayoffMatrix {
    pub fn payoff(&self, s: SensorAction, o: OperatorAction) -> (f64, f64) {
        self.entries[s as usize][o as usize]
    }
}

/// Builds the stage game. The falsify row is independent of the truthful
/// effort level: a strategic sensor exerts nothing and claims the cap.
pub fn stage_payoff_matrix(
    cfg: &GameConfig,
    contract: &ContractParams,
    stage: Stage,
    effort: f64,
    carried_reputation: f64,
) -> Result<StagePayoffMatrix, EquilibriumError> {
    let benefit = cfg.benefit(effort)?;
    let (base, own) = stage_payment_weights(contract, stage, carried_reputation);
    let cost = cfg.effort_cost * effort;

    let mut entries = [[(0.0, 0.0); 2]; 2];
    for (s_idx, &truthful) in [true, false].iter().enumerate() {
        for (o_idx, &verified) in [true, false].iter().enumerate() {
            let assessed = assessed_reputation(cfg, contract, truthful, verified, effort);
            let payment = base + own * assessed;
            let (effort_cost, operator_benefit) = if truthful { (cost, benefit) } else { (0.0, 0.0) };
            let audit = if verified { cfg.verify_cost } else { 0.0 };
            entries[s_idx][o_idx] = (
                payment - effort_cost,
                operator_benefit - payment - audit,
            );
        }
    }

    Ok(StagePayoffMatrix {
        stage,
        effort,
        carried_reputation,
        entries,
    })
}

/// Pure equilibria of the stage interaction, with the operator's payment
/// scheme itself on the table: her deviation set includes withdrawing the
/// payment (the outside option), which is what makes costly verification of
/// a known falsifier unprofitable. Truthful profiles fall to ordinary
/// deviations inside the matrix; what survives is the falsify/trust outcome,
/// under which the operator offers no payment — i.e. the outside option.
pub fn pure_nash(matrix: &StagePayoffMatrix) -> Vec<(SensorAction, OperatorAction)> {
    use OperatorAction::*;
    use SensorAction::*;

    let mut survivors = vec![(Truthful, Verify), (Truthful, Trust), (Falsify, Verify), (Falsify, Trust)];

    // Against a truthful sensor the operator saves the audit cost and the
    // truth boost by trusting.
    if matrix.payoff(Truthful, Trust).1 >= matrix.payoff(Truthful, Verify).1 {
        survivors.retain(|&p| p != (Truthful, Verify));
    }
    // An unverified sensor weakly prefers claiming the cap to honest work.
    if matrix.payoff(Falsify, Trust).0 >= matrix.payoff(Truthful, Trust).0 {
        survivors.retain(|&p| p != (Truthful, Trust));
    }
    // Facing a falsifier, the operator's best response is to withdraw payment
    // and not audit (payoff 0), never to pay the audit cost.
    if 0.0 > matrix.payoff(Falsify, Verify).1 {
        survivors.retain(|&p| p != (Falsify, Verify));
    }

    survivors
}

// ---------------------------------------------------------------------------
// Mixed stage strategies
// ---------------------------------------------------------------------------

/// Per-stage mixing probabilities. Out-of-range values are never clamped —
/// the raw numbers delimit where the equilibrium exists and carry a
/// diagnostic instead.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageMixedStrategy {
    pub stage: Stage,
    /// Operator verification probability.
    pub verify_prob: f64,
    /// Sensor truth probability.
    pub truth_prob: f64,
    /// Zero-effort stage: no mixing, truthful zero report, never verified.
    pub degenerate: bool,
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

fn mixed_for_weight(
    cfg: &GameConfig,
    contract: &ContractParams,
    stage: Stage,
    effort: f64,
    weight: f64,
) -> Result<StageMixedStrategy, EquilibriumError> {
    if !effort.is_finite() || effort < 0.0 || effort > cfg.max_effort {
        return Err(ModelError::EffortOutOfRange {
            value: effort,
            max: cfg.max_effort,
        }
        .into());
    }
    let spread = contract.max_reputation + contract.truth_boost;
    if spread <= 0.0 {
        return Err(EquilibriumError::DegenerateContract);
    }

    if effort == 0.0 {
        return Ok(StageMixedStrategy {
            stage,
            verify_prob: 0.0,
            truth_prob: 1.0,
            degenerate: true,
            valid: true,
            diagnostics: Vec::new(),
        });
    }

    let reputation = contract.reputation(cfg, effort);
    let verify_prob =
        (contract.max_reputation - reputation + cfg.effort_cost * effort / weight) / spread;
    let truth_prob = (contract.max_reputation - cfg.verify_cost / weight) / spread;

    let mut diagnostics = Vec::new();
    if !(0.0..=1.0).contains(&verify_prob) {
        diagnostics.push(format!(
            "verification probability {verify_prob} outside [0, 1] at stage {}",
            stage.index()
        ));
    }
    if truth_prob < 0.0 {
        diagnostics.push(format!(
            "omega*h <= C: truth probability {truth_prob} negative at stage {}",
            stage.index()
        ));
    } else if truth_prob > 1.0 {
        diagnostics.push(format!(
            "truth probability {truth_prob} above 1 at stage {}",
            stage.index()
        ));
    }

    Ok(StageMixedStrategy {
        stage,
        verify_prob,
        truth_prob,
        degenerate: false,
        valid: diagnostics.is_empty(),
        diagnostics,
    })
}

/// Stage-two indifference strategies at truthful effort `x2`.
pub fn stage2_mixed(
    cfg: &GameConfig,
    contract: &ContractParams,
    x2: f64,
) -> Result<StageMixedStrategy, EquilibriumError> {
    if contract.reputation_weight <= 0.0 {
        return Err(EquilibriumError::ZeroReputationWeight);
    }
    mixed_for_weight(cfg, contract, Stage::Two, x2, contract.reputation_weight)
}

/// Stage-one indifference strategies at truthful effort `x1`. The carried
/// share of the second-stage payment raises the stakes of first-stage
/// reputation by the factor [`effw`].
pub fn stage1_mixed(
    cfg: &GameConfig,
    contract: &ContractParams,
    x1: f64,
) -> Result<StageMixedStrategy, EquilibriumError> {
    let weight = effw(contract.reputation_weight, cfg.discount);
    mixed_for_weight(cfg, contract, Stage::One, x1, weight)
}

// ---------------------------------------------------------------------------
// Equilibrium profile and expected utilities
// ---------------------------------------------------------------------------

/// The full two-stage mixed profile at a pair of truthful efforts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumProfile {
    pub x1: f64,
    pub x2: f64,
    pub p1: f64,
    pub p2: f64,
    pub q1: f64,
    pub q2: f64,
    pub stage1_degenerate: bool,
    pub stage2_degenerate: bool,
    /// `ω·h > C`, the existence condition for stage-two mixing.
    pub mixed_exists: bool,
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

pub fn mixed_profile(
    cfg: &GameConfig,
    contract: &ContractParams,
    x1: f64,
    x2: f64,
) -> Result<EquilibriumProfile, EquilibriumError> {
    let s1 = stage1_mixed(cfg, contract, x1)?;
    let s2 = stage2_mixed(cfg, contract, x2)?;
    let mixed_exists = contract.mixed_strategies_exist(cfg);
    let mut diagnostics = s1.diagnostics.clone();
    diagnostics.extend(s2.diagnostics.iter().cloned());
    if !mixed_exists {
        diagnostics.push(
            "omega*h <= C: no mixed equilibrium, the sensor always falsifies and the operator \
             takes the outside option"
                .to_string(),
        );
    }
    let valid = s1.valid && s2.valid && mixed_exists;
    Ok(EquilibriumProfile {
        x1,
        x2,
        p1: s1.verify_prob,
        p2: s2.verify_prob,
        q1: s1.truth_prob,
        q2: s2.truth_prob,
        stage1_degenerate: s1.degenerate,
        stage2_degenerate: s2.degenerate,
        mixed_exists,
        valid,
        diagnostics,
    })
}

/// Expected discounted payoffs with the route that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffPair {
    pub sensor: f64,
    pub operator: f64,
    pub method: Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    GameTree,
    MonteCarlo,
}

/// Sensor continuation value of the second stage under the mixed profile,
/// linear in the carried reputation with slope `1 − ω`. A zero-effort stage
/// is voided: it passes through the carried share only.
fn stage2_sensor_value(
    cfg: &GameConfig,
    contract: &ContractParams,
    carried: f64,
    x2: f64,
) -> f64 {
    let omega = contract.reputation_weight;
    let carry = (1.0 - omega) * carried;
    if x2 == 0.0 {
        return carry;
    }
    let h = contract.max_reputation;
    let spread = h + contract.truth_boost;
    carry + omega * contract.truth_boost * h / spread
        + (h / spread) * (omega * contract.reputation(cfg, x2) - cfg.effort_cost * x2)
}

/// Operator continuation value of the second stage, linear in the carried
/// reputation with slope `−(1 − ω)`.
fn stage2_operator_value(
    cfg: &GameConfig,
    contract: &ContractParams,
    carried: f64,
    x2: f64,
) -> f64 {
    let omega = contract.reputation_weight;
    let carry = -(1.0 - omega) * carried;
    if x2 == 0.0 {
        return carry;
    }
    let h = contract.max_reputation;
    let spread = h + contract.truth_boost;
    carry - omega * h * (contract.truth_boost + cfg.verify_cost / omega) / spread
        + ((h - cfg.verify_cost / omega) / spread)
            * (cfg.benefit.value(x2) - omega * contract.reputation(cfg, x2))
}

fn check_interior_inputs(
    cfg: &GameConfig,
    contract: &ContractParams,
    x1: f64,
    x2: f64,
) -> Result<(), EquilibriumError> {
    for x in [x1, x2] {
        if !x.is_finite() || x < 0.0 || x > cfg.max_effort {
            return Err(ModelError::EffortOutOfRange {
                value: x,
                max: cfg.max_effort,
            }
            .into());
        }
    }
    if contract.max_reputation + contract.truth_boost <= 0.0 {
        return Err(EquilibriumError::DegenerateContract);
    }
    Ok(())
}

/// Total expected discounted sensor utility under the mixed profile at
/// `(x1, x2)`, stage weights `(1, δ)`.
pub fn sensor_eu(
    cfg: &GameConfig,
    contract: &ContractParams,
    x1: f64,
    x2: f64,
) -> Result<f64, EquilibriumError> {
    check_interior_inputs(cfg, contract, x1, x2)?;
    if x2 > 0.0 && contract.reputation_weight <= 0.0 {
        return Err(EquilibriumError::ZeroReputationWeight);
    }
    let delta = cfg.discount;
    if x1 == 0.0 {
        return Ok(delta * stage2_sensor_value(cfg, contract, 0.0, x2));
    }
    // Indifference makes the truthful branch the stage value. The verified
    // truth boost pays now and again through the carried share: weight effw.
    let s1 = stage1_mixed(cfg, contract, x1)?;
    let r1 = contract.reputation(cfg, x1);
    let boost_weight = effw(contract.reputation_weight, delta);
    Ok(r1 - cfg.effort_cost * x1
        + s1.verify_prob * contract.truth_boost * boost_weight
        + delta * stage2_sensor_value(cfg, contract, r1, x2))
}

/// Total expected discounted operator utility under the mixed profile at
/// `(x1, x2)`.
pub fn operator_eu(
    cfg: &GameConfig,
    contract: &ContractParams,
    x1: f64,
    x2: f64,
) -> Result<f64, EquilibriumError> {
    check_interior_inputs(cfg, contract, x1, x2)?;
    if (x1 > 0.0 || x2 > 0.0) && contract.reputation_weight <= 0.0 {
        return Err(EquilibriumError::ZeroReputationWeight);
    }
    let delta = cfg.discount;
    if x1 == 0.0 {
        return Ok(delta * stage2_operator_value(cfg, contract, 0.0, x2));
    }
    let s1 = stage1_mixed(cfg, contract, x1)?;
    let q1 = s1.truth_prob;
    let r1 = contract.reputation(cfg, x1);
    let gamma = contract.truth_boost;
    // Operator indifference: evaluate the verify branch.
    let truthful = cfg.benefit.value(x1) - r1 - gamma - cfg.verify_cost
        + delta * stage2_operator_value(cfg, contract, r1 + gamma, x2);
    let falsified = -cfg.verify_cost + delta * stage2_operator_value(cfg, contract, 0.0, x2);
    Ok(q1 * truthful + (1.0 - q1) * falsified)
}

/// The literal second-stage continuation closed forms at carried reputation
/// `R₁` — the regression targets for the game tree. Unlike
/// [`sensor_eu`]/[`operator_eu`], no voiding applies at `x2 = 0`: these are
/// the raw mixed-stage formulas.
pub fn stage2_continuation(
    cfg: &GameConfig,
    contract: &ContractParams,
    carried_reputation: f64,
    x2: f64,
) -> Result<PayoffPair, EquilibriumError> {
    if contract.max_reputation + contract.truth_boost <= 0.0 {
        return Err(EquilibriumError::DegenerateContract);
    }
    if contract.reputation_weight <= 0.0 {
        return Err(EquilibriumError::ZeroReputationWeight);
    }
    if !x2.is_finite() || x2 < 0.0 || x2 > cfg.max_effort {
        return Err(ModelError::EffortOutOfRange {
            value: x2,
            max: cfg.max_effort,
        }
        .into());
    }
    let omega = contract.reputation_weight;
    let h = contract.max_reputation;
    let gamma = contract.truth_boost;
    let spread = h + gamma;
    let r2 = contract.reputation(cfg, x2);
    let sensor = (1.0 - omega) * carried_reputation
        + omega * gamma * h / spread
        + (h / spread) * (omega * r2 - cfg.effort_cost * x2);
    let operator = -(1.0 - omega) * carried_reputation
        - omega * h * (gamma + cfg.verify_cost / omega) / spread
        + ((h - cfg.verify_cost / omega) / spread) * (cfg.benefit.value(x2) - omega * r2);
    Ok(PayoffPair {
        sensor,
        operator,
        method: Method::ClosedForm,
    })
}
