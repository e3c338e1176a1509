//! Optimal contract selection: the payment-cap case analysis, the
//! closed-form optimum for a given reputation weight, the weight sweep, and
//! a brute-force lattice search that cross-validates the closed forms
//! against the game tree.

use serde::Serialize;
use thiserror::Error;

use crate::equilibrium::{
    effw, mixed_profile, sensor_eu, EquilibriumError, EquilibriumProfile,
};
use crate::gametree::{exact_payoffs, BehavioralStrategy};
use crate::model::{ContractParams, GameConfig, ModelError};

/// Default number of points for the reputation-weight sweep.
pub const DEFAULT_OMEGA_GRID_POINTS: usize = 101;

/// Relative tolerance for classifying a cap exactly on a case boundary.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("reputation weight omega must lie in (0, 1], got {0}")]
    InvalidOmega(f64),
    #[error("grid must be non-empty: {0}")]
    EmptyGrid(&'static str),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_omega(omega: f64) -> Result<(), DesignError> {
    if omega.is_finite() && omega > 0.0 && omega <= 1.0 {
        Ok(())
    } else {
        Err(DesignError::InvalidOmega(omega))
    }
}

fn regime_holds(cfg: &GameConfig) -> bool {
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    cap_wage > (cfg.verify_cost * cfg.benefit.value(cfg.max_effort)).sqrt()
}

// ---------------------------------------------------------------------------
// Case analysis over the payment cap
// ---------------------------------------------------------------------------

/// Which effort pair a payment cap `h` incentivizes, relative to the two
/// thresholds `b·x̄/effw` (first stage) and `b·x̄/ω` (second stage).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// Below both thresholds: no effort, the outside option.
    I,
    /// Exactly at the first-stage threshold: stage-one effort indifference.
    II,
    /// Strictly between the thresholds: full first-stage effort only.
    III,
    /// Exactly at the second-stage threshold: stage-two effort indifference.
    IV,
    /// Above both thresholds: full effort in both stages.
    V,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseLabel::I => "I",
            CaseLabel::II => "II",
            CaseLabel::III => "III",
            CaseLabel::IV => "IV",
            CaseLabel::V => "V",
        })
    }
}

/// Classification of a cap value with the efforts it induces and the
/// operator's value, both at the given cap and at the case's optimal cap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseAnalysis {
    pub label: CaseLabel,
    /// Human-readable bracket of the cap region.
    pub h_range: String,
    /// Efforts the sensor realizes; indifference resolves to the
    /// operator-preferred level.
    pub efforts: (f64, f64),
    /// Operator value at the given cap.
    pub value_at_h: f64,
    /// Slope of the operator value in the cap, where it varies (III and V).
    pub dvalue_dh: Option<f64>,
    /// Cap attaining the case's optimum (open regions reduce to their
    /// boundary case).
    pub optimum_h: f64,
    pub optimum_value: f64,
}

fn value_case_ii(cfg: &GameConfig) -> f64 {
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let star = cfg.effort_star().value;
    -cfg.verify_cost
        + (1.0 - cfg.verify_cost / cap_wage)
            * (cfg.benefit.value(star) - cfg.effort_cost * star)
}

fn value_case_iii(cfg: &GameConfig, omega: f64, h: f64) -> f64 {
    let w = effw(omega, cfg.discount);
    -cfg.verify_cost
        + (1.0 - cfg.verify_cost / (w * h)) * (cfg.benefit.value(cfg.max_effort) - w * h)
}

fn slope_case_iii(cfg: &GameConfig, omega: f64, h: f64) -> f64 {
    let w = effw(omega, cfg.discount);
    cfg.verify_cost * cfg.benefit.value(cfg.max_effort) / (w * h * h) - w
}

fn value_case_v(cfg: &GameConfig, omega: f64, h: f64) -> f64 {
    let w = effw(omega, cfg.discount);
    let cap_benefit = cfg.benefit.value(cfg.max_effort);
    let c = cfg.verify_cost;
    -(1.0 + cfg.discount) * c
        + (1.0 - c / (w * h)) * (cap_benefit - w * h)
        + cfg.discount * (1.0 - c / (omega * h)) * (cap_benefit - omega * h)
}

fn slope_case_v(cfg: &GameConfig, omega: f64, h: f64) -> f64 {
    let w = effw(omega, cfg.discount);
    let cap_benefit = cfg.benefit.value(cfg.max_effort);
    let c = cfg.verify_cost;
    (c * cap_benefit / (w * h * h) - w) + cfg.discount * (c * cap_benefit / (omega * h * h) - omega)
}

/// Classifies a cap into its incentive case and evaluates the operator.
pub fn case_analysis(cfg: &GameConfig, omega: f64, h: f64) -> Result<CaseAnalysis, DesignError> {
    check_omega(omega)?;
    if !h.is_finite() || h < 0.0 {
        return Err(ModelError::OutOfRange {
            field: "h",
            range: "[0, inf)",
            value: h,
        }
        .into());
    }
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let h_stage1 = cap_wage / effw(omega, cfg.discount);
    let h_stage2 = cap_wage / omega;
    let near = |x: f64, boundary: f64| (x - boundary).abs() <= BOUNDARY_TOL * boundary.abs().max(1.0);

    let star = cfg.effort_star().value;
    let x_bar = cfg.max_effort;
    let iv_value = omega_objective(cfg, omega)?;

    // At ω = 1 the two thresholds coincide; the coinciding boundary counts
    // as the second-stage case.
    let analysis = if near(h, h_stage2) {
        CaseAnalysis {
            label: CaseLabel::IV,
            h_range: format!("h = {h_stage2} (second-stage threshold)"),
            efforts: (x_bar, star),
            value_at_h: iv_value,
            dvalue_dh: None,
            optimum_h: h_stage2,
            optimum_value: iv_value,
        }
    } else if near(h, h_stage1) {
        let value = value_case_ii(cfg);
        CaseAnalysis {
            label: CaseLabel::II,
            h_range: format!("h = {h_stage1} (first-stage threshold)"),
            efforts: (star, 0.0),
            value_at_h: value,
            dvalue_dh: None,
            optimum_h: h_stage1,
            optimum_value: value,
        }
    } else if h < h_stage1 {
        CaseAnalysis {
            label: CaseLabel::I,
            h_range: format!("h < {h_stage1}"),
            efforts: (0.0, 0.0),
            value_at_h: 0.0,
            dvalue_dh: None,
            optimum_h: h,
            optimum_value: 0.0,
        }
    } else if h < h_stage2 {
        CaseAnalysis {
            label: CaseLabel::III,
            h_range: format!("{h_stage1} < h < {h_stage2}"),
            efforts: (x_bar, 0.0),
            value_at_h: value_case_iii(cfg, omega, h),
            dvalue_dh: Some(slope_case_iii(cfg, omega, h)),
            // decreasing in h under the regime condition: reduces to II
            optimum_h: h_stage1,
            optimum_value: value_case_ii(cfg),
        }
    } else {
        CaseAnalysis {
            label: CaseLabel::V,
            h_range: format!("h > {h_stage2}"),
            efforts: (x_bar, x_bar),
            value_at_h: value_case_v(cfg, omega, h),
            dvalue_dh: Some(slope_case_v(cfg, omega, h)),
            // decreasing in h: reduces to IV
            optimum_h: h_stage2,
            optimum_value: iv_value,
        }
    };
    Ok(analysis)
}

// ---------------------------------------------------------------------------
// Weight objective and optimal contract
// ---------------------------------------------------------------------------

/// Operator value of the optimal contract (`γ = 0`, cap at the second-stage
/// threshold, efforts `(x̄, x*)`) as a function of the reputation weight.
pub fn omega_objective(cfg: &GameConfig, omega: f64) -> Result<f64, DesignError> {
    check_omega(omega)?;
    let delta = cfg.discount;
    let w = effw(omega, delta);
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let c = cfg.verify_cost;
    let star = cfg.effort_star().value;
    Ok(-(1.0 + delta) * c
        + (1.0 - (omega / w) * (c / cap_wage))
            * (cfg.benefit.value(cfg.max_effort) - cap_wage * w / omega)
        + delta * (1.0 - c / cap_wage) * (cfg.benefit.value(star) - cfg.effort_cost * star))
}

/// Analytic derivative of [`omega_objective`] in the weight. Positive
/// everywhere in the regime `b·x̄ > sqrt(C·S(x̄))`.
pub fn omega_objective_derivative(cfg: &GameConfig, omega: f64) -> Result<f64, DesignError> {
    check_omega(omega)?;
    let delta = cfg.discount;
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let f = effw(omega, delta) / omega;
    let f_prime = -(1.0 + delta) / (omega * omega);
    let ratio = cfg.verify_cost * cfg.benefit.value(cfg.max_effort) / (f * f * cap_wage * cap_wage);
    Ok(-cap_wage * f_prime * (1.0 - ratio))
}

/// The optimal contract for a given reputation weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalContract {
    pub contract: ContractParams,
    /// Incentivized efforts. At full weight the sensor is indifferent across
    /// all efforts and realizes the cost-matching level in both stages.
    pub efforts: (f64, f64),
    pub profile: EquilibriumProfile,
    /// Closed-form operator value of the cap contract (the case-IV value).
    pub operator_value: f64,
    pub sensor_value: f64,
    pub regime_ok: bool,
    /// Operator participation: value at least the outside option.
    pub ir_ok: bool,
    pub case: CaseLabel,
}

/// Builds the cap contract `γ = 0`, `h = b·x̄/ω` with its equilibrium
/// profile. Out-of-regime configurations are still computed, flagged with
/// `regime_ok = false`.
pub fn optimal_contract_given_omega(
    cfg: &GameConfig,
    omega: f64,
) -> Result<OptimalContract, DesignError> {
    check_omega(omega)?;
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let contract = ContractParams::new(cap_wage / omega, 0.0, omega)?;
    let star = cfg.effort_star().value;
    let efforts = if omega == 1.0 {
        (star, star)
    } else {
        (cfg.max_effort, star)
    };
    let profile = mixed_profile(cfg, &contract, efforts.0, efforts.1)?;
    let operator_value = omega_objective(cfg, omega)?;
    let sensor_value = sensor_eu(cfg, &contract, efforts.0, efforts.1)?;
    let case = case_analysis(cfg, omega, contract.max_reputation)?.label;
    Ok(OptimalContract {
        contract,
        efforts,
        profile,
        operator_value,
        sensor_value,
        regime_ok: regime_holds(cfg),
        ir_ok: operator_value >= 0.0,
        case,
    })
}

// ---------------------------------------------------------------------------
// Weight sweep
// ---------------------------------------------------------------------------

/// Full sweep of the cap contract over a weight grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSweep {
    pub omega_star: f64,
    pub regime_ok: bool,
    pub rows: Vec<OptimalContract>,
}

/// Sweeps `ω = i/n` for `i = 1..=n` and returns the argmax row. Under the
/// regime condition the objective increases in the weight, so the argmax is
/// the grid's largest weight.
pub fn optimal_omega(cfg: &GameConfig, grid_n: usize) -> Result<OmegaSweep, DesignError> {
    if grid_n == 0 {
        return Err(DesignError::EmptyGrid("omega grid"));
    }
    let mut rows = Vec::with_capacity(grid_n);
    let mut omega_star = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 1..=grid_n {
        let omega = i as f64 / grid_n as f64;
        let row = optimal_contract_given_omega(cfg, omega)?;
        if row.operator_value >= best {
            best = row.operator_value;
            omega_star = omega;
        }
        rows.push(row);
    }
    Ok(OmegaSweep {
        omega_star,
        regime_ok: regime_holds(cfg),
        rows,
    })
}

// ---------------------------------------------------------------------------
// Lattice search (independent validation of the closed-form optimum)
// ---------------------------------------------------------------------------

/// Explicit grids for the lattice search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub max_reputation: Vec<f64>,
    pub truth_boost: Vec<f64>,
    pub reputation_weight: Vec<f64>,
    pub efforts: Vec<f64>,
}

/// Lattice maximizer of the operator's value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSearchOutcome {
    pub max_reputation: f64,
    pub truth_boost: f64,
    pub reputation_weight: f64,
    pub efforts: (f64, f64),
    pub value: f64,
    /// No feasible mixed play at the maximizer: the operator walks away.
    pub outside_option: bool,
    pub profile: Option<EquilibriumProfile>,
    pub lattice_points: usize,
}

/// Brute-force search over contract lattice points. At each point the
/// sensor's best-response effort pair is found by evaluating his exact
/// game-tree value under the indifference profile of every feasible pair;
/// indifference across pairs resolves in the operator's favour (the sensor
/// takes the action preferred by the operator), smallest pair first on exact
/// ties. The point's value is the operator's exact game-tree value at the
/// designated pair, or the outside option when no mixed play exists.
pub fn grid_search_contract(
    cfg: &GameConfig,
    grids: &GridSpec,
) -> Result<GridSearchOutcome, DesignError> {
    if grids.max_reputation.is_empty() {
        return Err(DesignError::EmptyGrid("max_reputation"));
    }
    if grids.truth_boost.is_empty() {
        return Err(DesignError::EmptyGrid("truth_boost"));
    }
    if grids.reputation_weight.is_empty() {
        return Err(DesignError::EmptyGrid("reputation_weight"));
    }
    if grids.efforts.is_empty() {
        return Err(DesignError::EmptyGrid("efforts"));
    }

    let mut best: Option<GridSearchOutcome> = None;
    let mut lattice_points = 0;
    for &h in &grids.max_reputation {
        for &gamma in &grids.truth_boost {
            for &omega in &grids.reputation_weight {
                check_omega(omega)?;
                let contract = ContractParams::new(h, gamma, omega)?;
                lattice_points += 1;
                let candidate = evaluate_lattice_point(cfg, &contract, &grids.efforts)?;
                let replace = best
                    .as_ref()
                    .map_or(true, |b| candidate.value > b.value);
                if replace {
                    best = Some(candidate);
                }
            }
        }
    }
    let mut outcome = best.expect("non-empty lattice");
    outcome.lattice_points = lattice_points;
    Ok(outcome)
}

fn evaluate_lattice_point(
    cfg: &GameConfig,
    contract: &ContractParams,
    effort_grid: &[f64],
) -> Result<GridSearchOutcome, DesignError> {
    let outside = GridSearchOutcome {
        max_reputation: contract.max_reputation,
        truth_boost: contract.truth_boost,
        reputation_weight: contract.reputation_weight,
        efforts: (0.0, 0.0),
        value: 0.0,
        outside_option: true,
        profile: None,
        lattice_points: 0,
    };
    if !contract.mixed_strategies_exist(cfg) {
        return Ok(outside);
    }

    struct Pair {
        x1: f64,
        x2: f64,
        sensor: f64,
        operator: f64,
        profile: EquilibriumProfile,
    }
    let mut feasible = Vec::new();
    for &x1 in effort_grid {
        for &x2 in effort_grid {
            let profile = mixed_profile(cfg, contract, x1, x2)?;
            if !profile.valid {
                continue;
            }
            let pay = exact_payoffs(cfg, contract, &BehavioralStrategy::from_profile(&profile));
            feasible.push(Pair {
                x1,
                x2,
                sensor: pay.sensor,
                operator: pay.operator,
                profile,
            });
        }
    }
    if feasible.is_empty() {
        return Ok(outside);
    }

    let best_sensor = feasible
        .iter()
        .map(|p| p.sensor)
        .fold(f64::NEG_INFINITY, f64::max);
    let tie_tol = 1e-9 * best_sensor.abs().max(1.0);
    let designated = feasible
        .iter()
        .filter(|p| p.sensor >= best_sensor - tie_tol)
        .reduce(|best, p| if p.operator > best.operator { p } else { best })
        .expect("non-empty best-response set");

    Ok(GridSearchOutcome {
        max_reputation: contract.max_reputation,
        truth_boost: contract.truth_boost,
        reputation_weight: contract.reputation_weight,
        efforts: (designated.x1, designated.x2),
        value: designated.operator,
        outside_option: false,
        profile: Some(designated.profile.clone()),
        lattice_points: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gametree::linear_grid;
    use crate::model::BenefitSpec;

    fn reference_config() -> GameConfig {
        GameConfig::new(
            2.0,
            1.0,
            0.2,
            0.9,
            BenefitSpec::Power {
                scale: 2.0,
                exponent: 0.5,
            },
        )
        .unwrap()
    }

    #[test]
    fn case_classification_reference() {
        let cfg = reference_config();
        let a = case_analysis(&cfg, 0.5, 1.0).unwrap();
        assert_eq!(a.label, CaseLabel::I);
        assert_eq!(a.value_at_h, 0.0);

        let a = case_analysis(&cfg, 0.5, 2.0).unwrap();
        assert_eq!(a.label, CaseLabel::III);
        assert_eq!(a.efforts, (1.0, 0.0));

        let a = case_analysis(&cfg, 0.5, 5.0).unwrap();
        assert_eq!(a.label, CaseLabel::V);
        assert!(a.dvalue_dh.unwrap() < 0.0);

        // boundaries hit exactly
        let a = case_analysis(&cfg, 0.5, 2.0 / 1.45).unwrap();
        assert_eq!(a.label, CaseLabel::II);
        let a = case_analysis(&cfg, 0.5, 4.0).unwrap();
        assert_eq!(a.label, CaseLabel::IV);

        // at full weight the thresholds coincide and resolve to IV
        let a = case_analysis(&cfg, 1.0, 2.0).unwrap();
        assert_eq!(a.label, CaseLabel::IV);
    }

    #[test]
    fn case_slopes_match_finite_differences() {
        let cfg = reference_config();
        for &(omega, h, label) in &[
            (0.5, 5.0, CaseLabel::V),
            (0.5, 4.5, CaseLabel::V),
            (0.5, 2.0, CaseLabel::III),
            (0.5, 3.0, CaseLabel::III),
            (0.8, 3.5, CaseLabel::V),
        ] {
            let a = case_analysis(&cfg, omega, h).unwrap();
            assert_eq!(a.label, label);
            let slope = a.dvalue_dh.unwrap();
            let dh = 1e-6 * h;
            let up = case_analysis(&cfg, omega, h + dh).unwrap().value_at_h;
            let down = case_analysis(&cfg, omega, h - dh).unwrap().value_at_h;
            let fd = (up - down) / (2.0 * dh);
            assert!(
                (fd - slope).abs() <= 1e-6 * slope.abs().max(1.0),
                "case {label:?} at h={h}: fd={fd} slope={slope}"
            );
        }
    }

    #[test]
    fn cases_partition_the_cap_axis() {
        let cfg = reference_config();
        for i in 0..200 {
            let h = 0.05 + i as f64 * 0.05;
            let a = case_analysis(&cfg, 0.5, h).unwrap();
            let h1 = 2.0 / 1.45;
            let h2 = 4.0;
            let expected = if (h - h1).abs() <= 1e-12 {
                CaseLabel::II
            } else if (h - h2).abs() <= 1e-12 {
                CaseLabel::IV
            } else if h < h1 {
                CaseLabel::I
            } else if h < h2 {
                CaseLabel::III
            } else {
                CaseLabel::V
            };
            assert_eq!(a.label, expected, "h = {h}");
        }
    }

    #[test]
    fn omega_objective_reference_values() {
        let cfg = reference_config();
        assert!((omega_objective(&cfg, 1.0).unwrap() - 0.025).abs() < 1e-12);
        assert!((omega_objective(&cfg, 0.5).unwrap() - -3.6439655172413794).abs() < 1e-9);
        assert!(omega_objective(&cfg, 0.25).unwrap() < omega_objective(&cfg, 0.5).unwrap());
        assert!(omega_objective(&cfg, 0.0).is_err());
    }

    #[test]
    fn objective_matches_closed_form_operator_value() {
        use crate::equilibrium::operator_eu;
        let cfg = reference_config();
        for i in 1..=20 {
            let omega = i as f64 / 20.0;
            let h = cfg.effort_cost * cfg.max_effort / omega;
            let contract = ContractParams::new(h, 0.0, omega).unwrap();
            let star = cfg.effort_star().value;
            let direct = operator_eu(&cfg, &contract, cfg.max_effort, star).unwrap();
            let objective = omega_objective(&cfg, omega).unwrap();
            assert!(
                (direct - objective).abs() < 1e-12,
                "omega={omega}: {direct} vs {objective}"
            );
        }
    }

    #[test]
    fn optimal_contract_reference_half_weight() {
        let cfg = reference_config();
        let opt = optimal_contract_given_omega(&cfg, 0.5).unwrap();
        assert_eq!(opt.contract.max_reputation, 4.0);
        assert_eq!(opt.contract.truth_boost, 0.0);
        assert_eq!(opt.efforts, (1.0, 0.25));
        assert!((opt.profile.p1 - 0.344828).abs() < 1e-6);
        assert!((opt.profile.p2 - 1.0).abs() < 1e-12);
        assert!((opt.profile.q1 - 0.965517).abs() < 1e-6);
        assert!((opt.profile.q2 - 0.9).abs() < 1e-12);
        assert!((opt.operator_value - -3.643966).abs() < 1e-6);
        assert!((opt.sensor_value - 3.8).abs() < 1e-9);
        assert_eq!(opt.case, CaseLabel::IV);
        assert!(opt.regime_ok);
        assert!(!opt.ir_ok);
    }

    #[test]
    fn optimal_contract_full_weight() {
        let cfg = reference_config();
        let opt = optimal_contract_given_omega(&cfg, 1.0).unwrap();
        assert_eq!(opt.contract.max_reputation, 2.0);
        assert_eq!(opt.efforts, (0.25, 0.25));
        assert_eq!(
            (opt.profile.p1, opt.profile.p2, opt.profile.q1, opt.profile.q2),
            (1.0, 1.0, 0.9, 0.9)
        );
        assert!((opt.operator_value - 0.025).abs() < 1e-12);
        assert!(opt.sensor_value.abs() < 1e-12);
        assert!(opt.ir_ok);

        assert!(optimal_contract_given_omega(&cfg, 0.0).is_err());
    }

    #[test]
    fn optimal_contract_value_equals_case_iv() {
        let cfg = reference_config();
        for i in 1..=10 {
            let omega = i as f64 / 10.0;
            let opt = optimal_contract_given_omega(&cfg, omega).unwrap();
            let case = case_analysis(&cfg, omega, opt.contract.max_reputation).unwrap();
            assert_eq!(case.label, CaseLabel::IV);
            assert!((opt.operator_value - case.optimum_value).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_verification_cost_is_degenerate_truthful() {
        let cfg = GameConfig::new(
            2.0,
            1.0,
            0.0,
            0.9,
            BenefitSpec::Power {
                scale: 2.0,
                exponent: 0.5,
            },
        )
        .unwrap();
        let opt = optimal_contract_given_omega(&cfg, 1.0).unwrap();
        assert_eq!(opt.profile.q1, 1.0);
        assert_eq!(opt.profile.q2, 1.0);
        assert!(opt.profile.mixed_exists);
    }

    #[test]
    fn omega_sweep_reference() {
        let cfg = reference_config();
        let sweep = optimal_omega(&cfg, 101).unwrap();
        assert_eq!(sweep.omega_star, 1.0);
        assert_eq!(sweep.rows.len(), 101);
        for pair in sweep.rows.windows(2) {
            assert!(pair[1].operator_value > pair[0].operator_value);
        }

        let tiny = optimal_omega(&cfg, 1).unwrap();
        assert_eq!(tiny.rows.len(), 1);
        assert_eq!(tiny.omega_star, 1.0);
        let two = optimal_omega(&cfg, 2).unwrap();
        assert_eq!(two.rows.len(), 2);
        assert_eq!(two.omega_star, 1.0);
    }

    #[test]
    fn omega_sweep_out_of_regime_still_reports() {
        let cfg = GameConfig::new(
            0.5,
            1.0,
            0.2,
            0.9,
            BenefitSpec::Power {
                scale: 2.0,
                exponent: 0.5,
            },
        )
        .unwrap();
        let sweep = optimal_omega(&cfg, 11).unwrap();
        assert!(!sweep.regime_ok);
        assert!(sweep.omega_star > 0.0);
    }

    #[test]
    fn grid_search_reference_lattice() {
        let cfg = reference_config();
        let grids = GridSpec {
            max_reputation: vec![1.6, 1.8, 2.0, 2.2, 2.4],
            truth_boost: vec![0.0, 0.5],
            reputation_weight: vec![0.5, 0.75, 1.0],
            efforts: linear_grid(0.0, 1.0, 21),
        };
        let outcome = grid_search_contract(&cfg, &grids).unwrap();
        assert_eq!(outcome.max_reputation, 2.0);
        assert_eq!(outcome.truth_boost, 0.0);
        assert_eq!(outcome.reputation_weight, 1.0);
        assert_eq!(outcome.efforts, (0.25, 0.25));
        assert!((outcome.value - 0.475).abs() < 1e-9);
        assert_eq!(outcome.lattice_points, 30);
    }

    #[test]
    fn grid_search_singleton_and_infeasible() {
        let cfg = reference_config();
        let single = GridSpec {
            max_reputation: vec![4.0],
            truth_boost: vec![0.0],
            reputation_weight: vec![0.5],
            efforts: vec![0.0, 1.0],
        };
        let outcome = grid_search_contract(&cfg, &single).unwrap();
        assert_eq!(outcome.max_reputation, 4.0);
        assert_eq!(outcome.efforts.0, 1.0);

        // ω·h <= C on the whole lattice
        let infeasible = GridSpec {
            max_reputation: vec![0.5, 1.0],
            truth_boost: vec![0.0],
            reputation_weight: vec![0.1],
            efforts: vec![0.0, 0.5, 1.0],
        };
        let outcome = grid_search_contract(&cfg, &infeasible).unwrap();
        assert!(outcome.outside_option);
        assert_eq!(outcome.value, 0.0);

        let empty = GridSpec {
            max_reputation: vec![],
            truth_boost: vec![0.0],
            reputation_weight: vec![0.5],
            efforts: vec![0.0],
        };
        assert!(grid_search_contract(&cfg, &empty).is_err());
    }

    #[test]
    fn derivative_positive_in_regime_and_matches_fd() {
        let cfg = reference_config();
        for i in 1..=50 {
            let omega = 0.02 * i as f64;
            let omega = omega.min(1.0);
            let d = omega_objective_derivative(&cfg, omega).unwrap();
            assert!(d > 0.0, "omega = {omega}");
            if omega > 0.05 && omega < 0.999 {
                let h = 1e-7;
                let fd = (omega_objective(&cfg, omega + h).unwrap()
                    - omega_objective(&cfg, omega - h).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - d).abs() <= 1e-5 * d.abs().max(1.0),
                    "omegaced {omega}: fd {fd} vs {d}"
                );
            }
        }
    }
}
