//! Exact brute-force evaluation of the two-stage game.
//!
//! The tree is fixed: two stages, each with a truthful/falsify draw for the
//! sensor and a verify/trust draw for the operator — sixteen outcome paths.
//! Enumerating them gives expected payoffs exact to rounding, independently
//! of every closed form in [`crate::equilibrium`]. Best-response search and
//! deviation checks on top of the enumeration are the oracle that certifies
//! the mixed profiles and the optimal contract.

use serde::Serialize;

use crate::equilibrium::{
    assessed_reputation, stage_payment_weights, EquilibriumProfile, Method, PayoffPair, Stage,
};
use crate::model::{ContractParams, GameConfig};

/// Default number of points in the effort search grid.
pub const DEFAULT_EFFORT_GRID_POINTS: usize = 51;

/// Default absolute tolerance for equilibrium certification.
pub const DEFAULT_CERTIFICATION_TOL: f64 = 1e-9;

/// Evenly spaced grid over `[lo, hi]` with `n >= 2` points.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// The default effort search grid: 51 points on `[0, x̄]` plus the
/// cost-matching effort, so every effort level the closed forms distinguish
/// is present.
pub fn default_effort_grid(cfg: &GameConfig) -> Vec<f64> {
    let mut grid = linear_grid(0.0, cfg.max_effort, DEFAULT_EFFORT_GRID_POINTS);
    let star = cfg.effort_star().value;
    if !grid.iter().any(|&x| x == star) {
        grid.push(star);
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    grid
}

// ---------------------------------------------------------------------------
// Behavioral strategies
// ---------------------------------------------------------------------------

/// Sensor behavior at one stage: the effort exerted when truthful, and the
/// probability of being truthful.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagePlan {
    pub effort: f64,
    pub truth_prob: f64,
}

/// One entry per realized first-stage outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeMap<T> {
    pub verified_truthful: T,
    pub trusted_truthful: T,
    pub verified_falsified: T,
    pub trusted_falsified: T,
}

impl<T: Copy> OutcomeMap<T> {
    pub fn uniform(value: T) -> Self {
        OutcomeMap {
            verified_truthful: value,
            trusted_truthful: value,
            verified_falsified: value,
            trusted_falsified: value,
        }
    }

    fn get(&self, truthful: bool, verified: bool) -> T {
        match (truthful, verified) {
            (true, true) => self.verified_truthful,
            (true, false) => self.trusted_truthful,
            (false, true) => self.verified_falsified,
            (false, false) => self.trusted_falsified,
        }
    }
}

/// Second-stage sensor behavior, optionally conditioned on the public
/// first-stage outcome (equivalently, on the carried reputation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Stage2Policy {
    Fixed(StagePlan),
    ByOutcome(OutcomeMap<StagePlan>),
}

impl Stage2Policy {
    fn resolve(&self, truthful: bool, verified: bool) -> StagePlan {
        match self {
            Stage2Policy::Fixed(plan) => *plan,
            Stage2Policy::ByOutcome(map) => map.get(truthful, verified),
        }
    }
}

/// Arbitrary (possibly off-equilibrium) play of both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BehavioralStrategy {
    pub stage1: StagePlan,
    /// Operator verification probability at stage one.
    pub verify1: f64,
    pub stage2: Stage2Policy,
    /// Operator verification probability at stage two (unconditional).
    pub verify2: f64,
}

impl BehavioralStrategy {
    pub fn from_profile(profile: &EquilibriumProfile) -> Self {
        BehavioralStrategy {
            stage1: StagePlan {
                effort: profile.x1,
                truth_prob: profile.q1,
            },
            verify1: profile.p1,
            stage2: Stage2Policy::Fixed(StagePlan {
                effort: profile.x2,
                truth_prob: profile.q2,
            }),
            verify2: profile.p2,
        }
    }
}

// ---------------------------------------------------------------------------
// Outcome realization
// ---------------------------------------------------------------------------

/// Everything that happened at one stage of one path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageOutcome {
    pub truthful: bool,
    pub verified: bool,
    /// Effort actually exerted (zero under falsification).
    pub effort: f64,
    /// Effort the sensor reported (the cap under falsification).
    pub report: f64,
    /// Reputation assessed for this stage.
    pub assessed_reputation: f64,
    pub payment: f64,
    pub sensor_utility: f64,
    pub operator_utility: f64,
}

/// Plays out one stage. `carried_reputation` is ignored at stage one.
pub(crate) fn realize_stage(
    cfg: &GameConfig,
    contract: &ContractParams,
    stage: Stage,
    carried_reputation: f64,
    truthful: bool,
    verified: bool,
    effort_if_truthful: f64,
) -> StageOutcome {
    let (effort, report) = if truthful {
        (effort_if_truthful, effort_if_truthful)
    } else {
        (0.0, cfg.max_effort)
    };
    let assessed = assessed_reputation(cfg, contract, truthful, verified, effort);
    let (base, own) = stage_payment_weights(contract, stage, carried_reputation);
    let payment = base + own * assessed;
    let audit = if verified { cfg.verify_cost } else { 0.0 };
    StageOutcome {
        truthful,
        verified,
        effort,
        report,
        assessed_reputation: assessed,
        payment,
        sensor_utility: payment - cfg.effort_cost * effort,
        operator_utility: cfg.benefit.value(effort) - payment - audit,
    }
}

/// One fully realized play of the two-stage game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomePath {
    pub stage1: StageOutcome,
    pub stage2: StageOutcome,
    /// First-stage assessed reputation carried into the second-stage payment.
    pub carried_reputation: f64,
    pub probability: f64,
    /// Discounted totals with stage weights `(1, δ)`.
    pub sensor_total: f64,
    pub operator_total: f64,
}

/// Enumerates all sixteen (truthful?, verified?) × (truthful?, verified?)
/// paths under the strategy. Path probabilities sum to one.
pub fn enumerate_paths(
    cfg: &GameConfig,
    contract: &ContractParams,
    strategy: &BehavioralStrategy,
) -> Vec<OutcomePath> {
    let mut paths = Vec::with_capacity(16);
    for (t1, pt1) in branch(strategy.stage1.truth_prob) {
        for (v1, pv1) in branch(strategy.verify1) {
            let first = realize_stage(
                cfg,
                contract,
                Stage::One,
                0.0,
                t1,
                v1,
                strategy.stage1.effort,
            );
            let carried = first.assessed_reputation;
            let plan2 = strategy.stage2.resolve(t1, v1);
            for (t2, pt2) in branch(plan2.truth_prob) {
                for (v2, pv2) in branch(strategy.verify2) {
                    let second =
                        realize_stage(cfg, contract, Stage::Two, carried, t2, v2, plan2.effort);
                    let probability = pt1 * pv1 * pt2 * pv2;
                    paths.push(OutcomePath {
                        stage1: first,
                        stage2: second,
                        carried_reputation: carried,
                        probability,
                        sensor_total: first.sensor_utility
                            + cfg.discount * second.sensor_utility,
                        operator_total: first.operator_utility
                            + cfg.discount * second.operator_utility,
                    });
                }
            }
        }
    }
    paths
}

fn branch(prob: f64) -> [(bool, f64); 2] {
    [(true, prob), (false, 1.0 - prob)]
}

/// Probability-weighted expected payoffs over the full enumeration; exact to
/// floating-point rounding.
pub fn exact_payoffs(
    cfg: &GameConfig,
    contract: &ContractParams,
    strategy: &BehavioralStrategy,
) -> PayoffPair {
    let mut sensor = 0.0;
    let mut operator = 0.0;
    for path in enumerate_paths(cfg, contract, strategy) {
        sensor += path.probability * path.sensor_total;
        operator += path.probability * path.operator_total;
    }
    PayoffPair {
        sensor,
        operator,
        method: Method::GameTree,
    }
}

// ---------------------------------------------------------------------------
// Sensor best response
// ---------------------------------------------------------------------------

/// A pure sensor stage plan: truthful at a grid effort, or falsify.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PlanChoice {
    Truthful(f64),
    Falsify,
}

impl PlanChoice {
    fn as_plan(&self) -> StagePlan {
        match *self {
            PlanChoice::Truthful(effort) => StagePlan {
                effort,
                truth_prob: 1.0,
            },
            PlanChoice::Falsify => StagePlan {
                effort: 0.0,
                truth_prob: 0.0,
            },
        }
    }

    fn describe(&self) -> String {
        match self {
            PlanChoice::Truthful(e) => format!("T at effort {e}"),
            PlanChoice::Falsify => "NT".to_string(),
        }
    }
}

/// The sensor's best pure plan against fixed verification probabilities,
/// with the second stage conditioned on every possible first-stage outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub stage1: PlanChoice,
    pub stage2: OutcomeMap<PlanChoice>,
    pub value: f64,
}

/// Expected sensor utility of a pure stage-2 plan given the carried
/// reputation and the verification probability.
fn stage2_plan_value(
    cfg: &GameConfig,
    contract: &ContractParams,
    carried: f64,
    verify_prob: f64,
    choice: PlanChoice,
) -> f64 {
    let plan = choice.as_plan();
    let truthful = matches!(choice, PlanChoice::Truthful(_));
    let v = realize_stage(cfg, contract, Stage::Two, carried, truthful, true, plan.effort);
    let t = realize_stage(cfg, contract, Stage::Two, carried, truthful, false, plan.effort);
    verify_prob * v.sensor_utility + (1.0 - verify_prob) * t.sensor_utility
}

/// Best pure stage-2 plan at a carried reputation. Ties break to the
/// smallest effort with truthful before falsify.
fn best_stage2_plan(
    cfg: &GameConfig,
    contract: &ContractParams,
    carried: f64,
    verify_prob: f64,
    effort_grid: &[f64],
) -> (PlanChoice, f64) {
    let mut best = (
        PlanChoice::Truthful(effort_grid[0]),
        f64::NEG_INFINITY,
    );
    for &e in effort_grid {
        let value = stage2_plan_value(cfg, contract, carried, verify_prob, PlanChoice::Truthful(e));
        if value > best.1 {
            best = (PlanChoice::Truthful(e), value);
        }
    }
    let value = stage2_plan_value(cfg, contract, carried, verify_prob, PlanChoice::Falsify);
    if value > best.1 {
        best = (PlanChoice::Falsify, value);
    }
    best
}

/// Backward-induction search over pure sensor plans against fixed operator
/// verification probabilities `(p1, p2)`. The effort grid should include 0
/// and the cap. Ties break to the smallest effort, truthful before falsify.
pub fn sensor_best_response(
    cfg: &GameConfig,
    contract: &ContractParams,
    verify_probs: (f64, f64),
    effort_grid: &[f64],
) -> BestResponse {
    assert!(!effort_grid.is_empty(), "effort grid must be non-empty");
    let (p1, p2) = verify_probs;
    let delta = cfg.discount;

    let stage1_value = |choice: PlanChoice| -> (f64, OutcomeMap<PlanChoice>) {
        let plan = choice.as_plan();
        let truthful = matches!(choice, PlanChoice::Truthful(_));
        let verified = realize_stage(cfg, contract, Stage::One, 0.0, truthful, true, plan.effort);
        let trusted = realize_stage(cfg, contract, Stage::One, 0.0, truthful, false, plan.effort);
        // optimal continuation for each stage-1 outcome, reachable or not
        let map = OutcomeMap {
            verified_truthful: best_stage2_plan(
                cfg,
                contract,
                contract.reputation(cfg, plan.effort) + contract.truth_boost,
                p2,
                effort_grid,
            ),
            trusted_truthful: best_stage2_plan(
                cfg,
                contract,
                contract.reputation(cfg, plan.effort),
                p2,
                effort_grid,
            ),
            verified_falsified: best_stage2_plan(
                cfg,
                contract,
                contract.reputation_floor,
                p2,
                effort_grid,
            ),
            trusted_falsified: best_stage2_plan(
                cfg,
                contract,
                contract.max_reputation,
                p2,
                effort_grid,
            ),
        };
        let continued = |outcome: &StageOutcome, entry: (PlanChoice, f64)| {
            outcome.sensor_utility + delta * entry.1
        };
        let value = if truthful {
            p1 * continued(&verified, map.verified_truthful)
                + (1.0 - p1) * continued(&trusted, map.trusted_truthful)
        } else {
            p1 * continued(&verified, map.verified_falsified)
                + (1.0 - p1) * continued(&trusted, map.trusted_falsified)
        };
        (
            value,
            OutcomeMap {
                verified_truthful: map.verified_truthful.0,
                trusted_truthful: map.trusted_truthful.0,
                verified_falsified: map.verified_falsified.0,
                trusted_falsified: map.trusted_falsified.0,
            },
        )
    };

    let mut best: Option<BestResponse> = None;
    let mut consider = |choice: PlanChoice| {
        let (value, stage2) = stage1_value(choice);
        if best.as_ref().map_or(true, |b| value > b.value) {
            best = Some(BestResponse {
                stage1: choice,
                stage2,
                value,
            });
        }
    };
    for &e in effort_grid {
        consider(PlanChoice::Truthful(e));
    }
    consider(PlanChoice::Falsify);
    best.expect("non-empty grid")
}

// ---------------------------------------------------------------------------
// Equilibrium certification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Sensor,
    Operator,
}

/// Best deviation found for one player at one stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationFinding {
    pub player: Player,
    pub stage: usize,
    /// Human-readable plan, e.g. "T at effort 1" or "NT".
    pub plan: String,
    pub gain: f64,
}

/// Deviation audit of a profile against the exact game tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub baseline: PayoffPair,
    pub findings: Vec<DeviationFinding>,
    /// Gain of the sensor's unrestricted (jointly deviating, outcome-
    /// conditioned) best response.
    pub sensor_best_response_gain: f64,
    pub max_gain: f64,
    pub certified: bool,
    pub tol: f64,
}

/// Searches all sensor deviations on the effort grid and all operator pure
/// verification switches; the profile is certified when no deviation gains
/// more than `tol`.
pub fn check_equilibrium(
    cfg: &GameConfig,
    contract: &ContractParams,
    profile: &EquilibriumProfile,
    effort_grid: &[f64],
    tol: f64,
) -> DeviationReport {
    let strategy = BehavioralStrategy::from_profile(profile);
    let baseline = exact_payoffs(cfg, contract, &strategy);
    let mut findings = Vec::new();

    // Sensor, stage 1: pure stage-1 plans with the profile's stage-2 behavior.
    {
        let mut best: Option<(PlanChoice, f64)> = None;
        let mut consider = |choice: PlanChoice| {
            let mut deviant = strategy;
            deviant.stage1 = choice.as_plan();
            // keep the profile's stage-1 effort when falsifying: it is unused
            let value = exact_payoffs(cfg, contract, &deviant).sensor;
            if best.as_ref().map_or(true, |b| value > b.1) {
                best = Some((choice, value));
            }
        };
        for &e in effort_grid {
            consider(PlanChoice::Truthful(e));
        }
        consider(PlanChoice::Falsify);
        let (choice, value) = best.expect("non-empty grid");
        findings.push(DeviationFinding {
            player: Player::Sensor,
            stage: 1,
            plan: choice.describe(),
            gain: value - baseline.sensor,
        });
    }

    // Sensor, stage 2: profile stage-1 behavior, best outcome-conditioned
    // pure stage-2 plans.
    {
        let mut map = OutcomeMap::uniform(StagePlan {
            effort: profile.x2,
            truth_prob: profile.q2,
        });
        let mut improvement = f64::NEG_INFINITY;
        let mut label = String::new();
        for (truthful, verified) in [(true, true), (true, false), (false, true), (false, false)] {
            let effort = if truthful { profile.x1 } else { 0.0 };
            let carried = assessed_reputation(cfg, contract, truthful, verified, effort);
            let (choice, value) = best_stage2_plan(cfg, contract, carried, profile.p2, effort_grid);
            let current = profile.q2
                * stage2_plan_value(cfg, contract, carried, profile.p2, PlanChoice::Truthful(profile.x2))
                + (1.0 - profile.q2)
                    * stage2_plan_value(cfg, contract, carried, profile.p2, PlanChoice::Falsify);
            if value - current > improvement {
                improvement = value - current;
                label = choice.describe();
            }
            let plan = choice.as_plan();
            match (truthful, verified) {
                (true, true) => map.verified_truthful = plan,
                (true, false) => map.trusted_truthful = plan,
                (false, true) => map.verified_falsified = plan,
                (false, false) => map.trusted_falsified = plan,
            }
        }
        let mut deviant = strategy;
        deviant.stage2 = Stage2Policy::ByOutcome(map);
        let value = exact_payoffs(cfg, contract, &deviant).sensor;
        findings.push(DeviationFinding {
            player: Player::Sensor,
            stage: 2,
            plan: label,
            gain: value - baseline.sensor,
        });
    }

    // Operator: pure verification switches per stage.
    for (stage, current) in [(1usize, profile.p1), (2usize, profile.p2)] {
        let mut best_gain = f64::NEG_INFINITY;
        let mut best_plan = String::new();
        for (p, name) in [(1.0, "V"), (0.0, "NV")] {
            if p == current {
                continue;
            }
            let mut deviant = strategy;
            match stage {
                1 => deviant.verify1 = p,
                _ => deviant.verify2 = p,
            }
            let value = exact_payoffs(cfg, contract, &deviant).operator;
            let gain = value - baseline.operator;
            if gain > best_gain {
                best_gain = gain;
                best_plan = name.to_string();
            }
        }
        if best_gain == f64::NEG_INFINITY {
            // profile already pure in both directions cannot happen; p is a
            // probability so at least one corner differs unless p in {0,1}
            // and equals both, which is impossible
            best_gain = 0.0;
        }
        findings.push(DeviationFinding {
            player: Player::Operator,
            stage,
            plan: best_plan,
            gain: best_gain,
        });
    }

    let joint = sensor_best_response(cfg, contract, (profile.p1, profile.p2), effort_grid);
    let sensor_best_response_gain = joint.value - baseline.sensor;

    let max_gain = findings
        .iter()
        .map(|f| f.gain)
        .chain(std::iter::once(sensor_best_response_gain))
        .fold(0.0_f64, f64::max);

    DeviationReport {
        baseline,
        findings,
        sensor_best_response_gain,
        max_gain,
        certified: max_gain <= tol,
        tol,
    }
}

// ---------------------------------------------------------------------------
// Indifference gaps
// ---------------------------------------------------------------------------

/// Per-stage indifference gaps under a profile, computed from exact
/// whole-game evaluations: each gap is the payoff difference between the two
/// pure actions at that stage with everything else held at the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndifferenceGaps {
    pub sensor_stage1: f64,
    pub sensor_stage2: f64,
    pub operator_stage1: f64,
    pub operator_stage2: f64,
    /// A zero-effort (never-verified) stage carries no indifference claim.
    pub stage1_degenerate: bool,
    pub stage2_degenerate: bool,
}

impl IndifferenceGaps {
    pub fn max_gap(&self) -> f64 {
        self.sensor_stage1
            .max(self.sensor_stage2)
            .max(self.operator_stage1)
            .max(self.operator_stage2)
    }
}

pub fn indifference_gaps(
    cfg: &GameConfig,
    contract: &ContractParams,
    profile: &EquilibriumProfile,
) -> IndifferenceGaps {
    let strategy = BehavioralStrategy::from_profile(profile);

    let sensor_with = |q1: Option<f64>, q2: Option<f64>| {
        let mut s = strategy;
        if let Some(q) = q1 {
            s.stage1.truth_prob = q;
        }
        if let Some(q) = q2 {
            s.stage2 = Stage2Policy::Fixed(StagePlan {
                effort: profile.x2,
                truth_prob: q,
            });
        }
        exact_payoffs(cfg, contract, &s).sensor
    };
    let operator_with = |p1: Option<f64>, p2: Option<f64>| {
        let mut s = strategy;
        if let Some(p) = p1 {
            s.verify1 = p;
        }
        if let Some(p) = p2 {
            s.verify2 = p;
        }
        exact_payoffs(cfg, contract, &s).operator
    };

    IndifferenceGaps {
        sensor_stage1: (sensor_with(Some(1.0), None) - sensor_with(Some(0.0), None)).abs(),
        sensor_stage2: (sensor_with(None, Some(1.0)) - sensor_with(None, Some(0.0))).abs(),
        operator_stage1: (operator_with(Some(1.0), None) - operator_with(Some(0.0), None)).abs(),
        operator_stage2: (operator_with(None, Some(1.0)) - operator_with(None, Some(0.0))).abs(),
        stage1_degenerate: profile.stage1_degenerate,
        stage2_degenerate: profile.stage2_degenerate,
    }
}
