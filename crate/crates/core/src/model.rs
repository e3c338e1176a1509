//! Environment and contract primitives shared by every other module.
//!
//! A system operator hires a sensor to exert costly effort. The operator
//! derives a benefit `S(x)` from true effort `x`, pays the sensor through a
//! reputation-indexed payment scheme, and may audit the sensor's report at a
//! fixed cost. [`GameConfig`] carries the environment (cost rate, effort cap,
//! verification cost, discounting, benefit function); [`ContractParams`]
//! carries the operator's design variables (payment cap, truth boost,
//! reputation weight).

use serde::Serialize;
use thiserror::Error;

/// Resolution of the sampled shape check on the benefit function.
pub const BENEFIT_GRID_POINTS: usize = 1000;

/// Errors from constructing or validating model primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite, got {value}")]
    NonFinite { field: &'static str, value: f64 },
    #[error("{field} must lie in {range}, got {value}")]
    OutOfRange {
        field: &'static str,
        range: &'static str,
        value: f64,
    },
    #[error("effort {value} outside [0, {max}]")]
    EffortOutOfRange { value: f64, max: f64 },
    #[error("marginal benefit of the power family is unbounded at zero effort")]
    UnboundedDerivative,
    #[error("benefit shape violation: {0}")]
    BenefitShape(String),
}

fn check_finite(field: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::NonFinite { field, value })
    }
}

fn check_positive(field: &'static str, value: f64) -> Result<(), ModelError> {
    check_finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::NonPositive { field, value })
    }
}

// ---------------------------------------------------------------------------
// Benefit function families
// ---------------------------------------------------------------------------

/// Parametric family for the operator's benefit `S`.
///
/// All three families are increasing and strictly concave on the effort
/// domain with `S(0) = 0`, and admit closed-form derivatives, so the
/// cost-matching effort level is computable exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BenefitSpec {
    /// `S(x) = scale · x^exponent`, exponent in (0, 1).
    Power { scale: f64, exponent: f64 },
    /// `S(x) = scale · ln(1 + x)`.
    Log { scale: f64 },
    /// `S(x) = scale · (1 − e^(−rate·x))`.
    SatExp { scale: f64, rate: f64 },
}

impl BenefitSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match *self {
            BenefitSpec::Power { scale, exponent } => {
                check_positive("benefit.a", scale)?;
                check_finite("benefit.shape", exponent)?;
                if exponent <= 0.0 || exponent >= 1.0 {
                    return Err(ModelError::OutOfRange {
                        field: "benefit.shape",
                        range: "(0, 1)",
                        value: exponent,
                    });
                }
                Ok(())
            }
            BenefitSpec::Log { scale } => check_positive("benefit.a", scale),
            BenefitSpec::SatExp { scale, rate } => {
                check_positive("benefit.a", scale)?;
                check_positive("benefit.shape", rate)
            }
        }
    }

    /// `S(x)` without domain checks; callers go through [`GameConfig::benefit`].
    pub(crate) fn value(&self, x: f64) -> f64 {
        match *self {
            BenefitSpec::Power { scale, exponent } => {
                if x == 0.0 {
                    0.0
                } else {
                    scale * x.powf(exponent)
                }
            }
            BenefitSpec::Log { scale } => scale * x.ln_1p(),
            BenefitSpec::SatExp { scale, rate } => scale * (-(-rate * x).exp_m1()),
        }
    }

    /// `S'(x)`. For the power family the derivative diverges at 0; for the
    /// saturating exponential the value at 0 is the right limit `scale·rate`.
    pub(crate) fn slope(&self, x: f64) -> Result<f64, ModelError> {
        match *self {
            BenefitSpec::Power { scale, exponent } => {
                if x <= 0.0 {
                    Err(ModelError::UnboundedDerivative)
                } else {
                    Ok(scale * exponent * x.powf(exponent - 1.0))
                }
            }
            BenefitSpec::Log { scale } => Ok(scale / (1.0 + x)),
            BenefitSpec::SatExp { scale, rate } => Ok(scale * rate * (-rate * x).exp()),
        }
    }
}

// ---------------------------------------------------------------------------
// Game configuration
// ---------------------------------------------------------------------------

/// Environment primitives: everything outside the operator's control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameConfig {
    /// Cost per unit of sensor effort (the `b` coefficient of the linear cost).
    pub effort_cost: f64,
    /// Maximum effort the sensor can exert.
    pub max_effort: f64,
    /// Operator's cost of one verification.
    pub verify_cost: f64,
    /// Discount factor on second-stage payoffs, in (0, 1].
    pub discount: f64,
    /// Benefit the operator derives from true effort.
    pub benefit: BenefitSpec,
}

impl GameConfig {
    pub fn new(
        effort_cost: f64,
        max_effort: f64,
        verify_cost: f64,
        discount: f64,
        benefit: BenefitSpec,
    ) -> Result<Self, ModelError> {
        let cfg = GameConfig {
            effort_cost,
            max_effort,
            verify_cost,
            discount,
            benefit,
        };
        cfg.check_fields()?;
        Ok(cfg)
    }

    fn check_fields(&self) -> Result<(), ModelError> {
        check_positive("b", self.effort_cost)?;
        check_positive("x_bar", self.max_effort)?;
        check_finite("C", self.verify_cost)?;
        if self.verify_cost < 0.0 {
            return Err(ModelError::OutOfRange {
                field: "C",
                range: "[0, inf)",
                value: self.verify_cost,
            });
        }
        check_finite("delta", self.discount)?;
        if self.discount <= 0.0 || self.discount > 1.0 {
            return Err(ModelError::OutOfRange {
                field: "delta",
                range: "(0, 1]",
                value: self.discount,
            });
        }
        self.benefit.validate()
    }

    /// Benefit `S(x)` for effort in `[0, max_effort]`.
    pub fn benefit(&self, x: f64) -> Result<f64, ModelError> {
        if !x.is_finite() || x < 0.0 || x > self.max_effort {
            return Err(ModelError::EffortOutOfRange {
                value: x,
                max: self.max_effort,
            });
        }
        Ok(self.benefit.value(x))
    }

    /// Marginal benefit `S'(x)`.
    ///
    /// Domain is `(0, max_effort]` for the power family (unbounded at 0) and
    /// `[0, max_effort]` otherwise; the saturating-exponential value at 0 is
    /// the right limit.
    pub fn benefit_derivative(&self, x: f64) -> Result<f64, ModelError> {
        if !x.is_finite() || x < 0.0 || x > self.max_effort {
            return Err(ModelError::EffortOutOfRange {
                value: x,
                max: self.max_effort,
            });
        }
        self.benefit.slope(x)
    }

    /// Effort at which marginal benefit equals marginal cost, clamped to
    /// `[0, max_effort]`.
    pub fn effort_star(&self) -> EffortStar {
        let b = self.effort_cost;
        // Marginal benefit is strictly decreasing in every family, so compare
        // the endpoints first and fall back to the closed-form root.
        let slope_at_cap = self
            .benefit
            .slope(self.max_effort)
            .expect("cap is interior for every family");
        if slope_at_cap >= b {
            return EffortStar {
                value: self.max_effort,
                bound: EffortBound::Cap,
            };
        }
        let root = match self.benefit {
            BenefitSpec::Power { scale, exponent } => {
                // scale·exponent·x^(exponent−1) = b
                Some((scale * exponent / b).powf(1.0 / (1.0 - exponent)))
            }
            BenefitSpec::Log { scale } => {
                if scale <= b {
                    None
                } else {
                    Some(scale / b - 1.0)
                }
            }
            BenefitSpec::SatExp { scale, rate } => {
                if scale * rate <= b {
                    None
                } else {
                    Some((scale * rate / b).ln() / rate)
                }
            }
        };
        match root {
            Some(x) if x > 0.0 => EffortStar {
                value: x.min(self.max_effort),
                bound: EffortBound::Interior,
            },
            _ => EffortStar {
                value: 0.0,
                bound: EffortBound::Floor,
            },
        }
    }
}

/// Cost-matching effort level together with which bound (if any) clamped it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffortStar {
    pub value: f64,
    pub bound: EffortBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortBound {
    /// Marginal benefit never reaches the cost rate; zero effort.
    Floor,
    /// Interior solution of `S'(x) = b`.
    Interior,
    /// Marginal benefit still exceeds the cost rate at the cap.
    Cap,
}

// ---------------------------------------------------------------------------
// Contract parameters
// ---------------------------------------------------------------------------

/// Operator design variables for the reputation-indexed payment scheme.
///
/// Reputation is linear in assessed effort, `R(z) = max_reputation · z / x̄`,
/// a verified-truthful report earns an extra `truth_boost`, and a detected
/// falsification drops reputation to the floor (fixed at zero). The
/// second-stage payment mixes carried and current reputation with weight
/// `reputation_weight` on the current stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractParams {
    /// Reputation (and hence payment) of a full-effort report, `R(x̄)`.
    pub max_reputation: f64,
    /// Reputation boost for a verified truthful report.
    pub truth_boost: f64,
    /// Weight of the current stage in the second-stage payment, in [0, 1].
    pub reputation_weight: f64,
    /// Reputation after a detected falsification. Fixed at zero.
    pub reputation_floor: f64,
}

impl ContractParams {
    pub fn new(
        max_reputation: f64,
        truth_boost: f64,
        reputation_weight: f64,
    ) -> Result<Self, ModelError> {
        check_finite("h", max_reputation)?;
        if max_reputation < 0.0 {
            return Err(ModelError::OutOfRange {
                field: "h",
                range: "[0, inf)",
                value: max_reputation,
            });
        }
        check_finite("gamma", truth_boost)?;
        if truth_boost < 0.0 {
            return Err(ModelError::OutOfRange {
                field: "gamma",
                range: "[0, inf)",
                value: truth_boost,
            });
        }
        check_finite("omega", reputation_weight)?;
        if !(0.0..=1.0).contains(&reputation_weight) {
            return Err(ModelError::OutOfRange {
                field: "omega",
                range: "[0, 1]",
                value: reputation_weight,
            });
        }
        Ok(ContractParams {
            max_reputation,
            truth_boost,
            reputation_weight,
            reputation_floor: 0.0,
        })
    }

    /// Linear reputation of an assessed effort level.
    pub fn reputation(&self, cfg: &GameConfig, assessed_effort: f64) -> f64 {
        self.max_reputation * assessed_effort / cfg.max_effort
    }

    /// Existence condition for the stage-two mixed equilibrium: the
    /// current-stage payment share at the cap must exceed the audit cost.
    pub fn mixed_strategies_exist(&self, cfg: &GameConfig) -> bool {
        self.reputation_weight * self.max_reputation > cfg.verify_cost
    }
}

// ---------------------------------------------------------------------------
// Validation report
// ---------------------------------------------------------------------------

/// Config-level feasibility flags with per-field diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    /// `b·x̄ > sqrt(C·S(x̄))`: the regime in which the optimal-contract and
    /// weight-monotonicity results hold.
    pub regime_ok: bool,
    /// `b·x̄ > C`: the cap payment covers one verification, so the truthful
    /// mixing probabilities at the optimal contract are positive.
    pub cap_payment_covers_cost: bool,
    /// Named violations, empty when the shape checks pass.
    pub diagnostics: Vec<String>,
}

/// Validates a configuration: field signs, then a sampled shape check of the
/// benefit function (strictly increasing, concave secants, `S(0)=0` exact),
/// then the regime flags.
pub fn validate_config(cfg: &GameConfig) -> Result<ValidityReport, ModelError> {
    cfg.check_fields()?;

    let mut diagnostics = Vec::new();
    let n = BENEFIT_GRID_POINTS;
    let step = cfg.max_effort / (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| cfg.benefit.value(step * i as f64)).collect();
    if values[0] != 0.0 {
        diagnostics.push(format!("S(0) = {} (expected exactly 0)", values[0]));
    }
    let mut prev_secant = f64::INFINITY;
    for (i, pair) in values.windows(2).enumerate() {
        let secant = (pair[1] - pair[0]) / step;
        if secant <= 0.0 {
            diagnostics.push(format!("S not strictly increasing near x = {}", step * i as f64));
            break;
        }
        // allow rounding-level slack on the concavity comparison
        if secant > prev_secant + 1e-9 * prev_secant.abs().max(1.0) {
            diagnostics.push(format!("S not concave near x = {}", step * i as f64));
            break;
        }
        prev_secant = secant;
    }
    if !diagnostics.is_empty() {
        return Err(ModelError::BenefitShape(diagnostics.join("; ")));
    }

    let cap_benefit = cfg.benefit.value(cfg.max_effort);
    let cap_wage = cfg.effort_cost * cfg.max_effort;
    let regime_ok = cap_wage > (cfg.verify_cost * cap_benefit).sqrt();
    let cap_payment_covers_cost = cap_wage > cfg.verify_cost;
    if !regime_ok {
        diagnostics.push(format!(
            "regime condition fails: b*x_bar = {} <= sqrt(C*S(x_bar)) = {}",
            cap_wage,
            (cfg.verify_cost * cap_benefit).sqrt()
        ));
    }
    if !cap_payment_covers_cost {
        diagnostics.push(format!(
            "cap payment does not cover verification: b*x_bar = {} <= C = {}",
            cap_wage, cfg.verify_cost
        ));
    }

    Ok(ValidityReport {
        regime_ok,
        cap_payment_covers_cost,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn reference_config() -> GameConfig {
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
    fn benefit_examples() {
        let cfg = reference_config();
        assert_eq!(cfg.benefit(0.0).unwrap(), 0.0);
        assert!((cfg.benefit(0.25).unwrap() - 1.0).abs() < 1e-12);

        let log = GameConfig::new(2.0, 2.0, 0.2, 0.9, BenefitSpec::Log { scale: 1.0 }).unwrap();
        assert!((log.benefit(std::f64::consts::E - 1.0).unwrap() - 1.0).abs() < 1e-12);

        assert!(cfg.benefit(-0.1).is_err());
        assert!(cfg.benefit(1.5).is_err());
    }

    #[test]
    fn derivative_examples() {
        let cfg = reference_config();
        assert!((cfg.benefit_derivative(0.25).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(
            cfg.benefit_derivative(0.0),
            Err(ModelError::UnboundedDerivative)
        ));

        let log = GameConfig::new(2.0, 2.0, 0.2, 0.9, BenefitSpec::Log { scale: 1.0 }).unwrap();
        assert!((log.benefit_derivative(1.0).unwrap() - 0.5).abs() < 1e-12);

        let satexp = GameConfig::new(
            0.5,
            1.0,
            0.0,
            1.0,
            BenefitSpec::SatExp {
                scale: 1.0,
                rate: 1.0,
            },
        )
        .unwrap();
        assert!((satexp.benefit_derivative(0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let configs = [
            reference_config(),
            GameConfig::new(1.0, 2.0, 0.1, 0.8, BenefitSpec::Log { scale: 3.0 }).unwrap(),
            GameConfig::new(
                0.7,
                1.5,
                0.05,
                0.95,
                BenefitSpec::SatExp {
                    scale: 2.0,
                    rate: 1.3,
                },
            )
            .unwrap(),
        ];
        for cfg in &configs {
            for i in 1..=100 {
                let x = cfg.max_effort * i as f64 / 102.0 + cfg.max_effort * 0.005;
                let h = cfg.max_effort * 1e-6;
                let fd = (cfg.benefit.value(x + h) - cfg.benefit.value(x - h)) / (2.0 * h);
                let exact = cfg.benefit_derivative(x).unwrap();
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1e-12),
                    "family {:?} at x={x}: fd={fd} exact={exact}",
                    cfg.benefit
                );
            }
        }
    }

    #[test]
    fn effort_star_examples() {
        let cfg = reference_config();
        let star = cfg.effort_star();
        assert!((star.value - 0.25).abs() < 1e-12);
        assert_eq!(star.bound, EffortBound::Interior);

        // marginal benefit exactly b at the cap
        let clamped = GameConfig::new(1.0, 1.0, 0.2, 0.9, cfg.benefit).unwrap();
        let star = clamped.effort_star();
        assert_eq!(star.value, 1.0);
        assert_eq!(star.bound, EffortBound::Cap);

        // marginal benefit below b everywhere
        let flat = GameConfig::new(2.0, 1.0, 0.2, 0.9, BenefitSpec::Log { scale: 1.0 }).unwrap();
        let star = flat.effort_star();
        assert_eq!(star.value, 0.0);
        assert_eq!(star.bound, EffortBound::Floor);
    }

    #[test]
    fn effort_star_marginal_condition_holds_interior() {
        let configs = [
            reference_config(),
            GameConfig::new(1.0, 3.0, 0.1, 0.8, BenefitSpec::Log { scale: 3.0 }).unwrap(),
            GameConfig::new(
                1.0,
                4.0,
                0.05,
                0.95,
                BenefitSpec::SatExp {
                    scale: 3.0,
                    rate: 0.9,
                },
            )
            .unwrap(),
        ];
        for cfg in &configs {
            let star = cfg.effort_star();
            if star.bound == EffortBound::Interior {
                let slope = cfg.benefit_derivative(star.value).unwrap();
                assert!((slope - cfg.effort_cost).abs() <= 1e-8, "{:?}", cfg.benefit);
            }
        }
    }

    #[test]
    fn validate_config_flags_regime() {
        let report = validate_config(&reference_config()).unwrap();
        assert!(report.regime_ok); // 2 > sqrt(0.2·2) ≈ 0.6325
        assert!(report.cap_payment_covers_cost);

        let weak = GameConfig::new(
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
        let report = validate_config(&weak).unwrap();
        assert!(!report.regime_ok); // 0.5 < 0.6325
        assert!(report.diagnostics.iter().any(|d| d.contains("regime")));
    }

    #[test]
    fn validate_config_rejects_bad_fields() {
        let err = GameConfig::new(
            0.0,
            1.0,
            0.2,
            0.9,
            BenefitSpec::Power {
                scale: 2.0,
                exponent: 0.5,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains('b'));

        assert!(GameConfig::new(2.0, -1.0, 0.2, 0.9, BenefitSpec::Log { scale: 1.0 }).is_err());
        assert!(GameConfig::new(2.0, 1.0, -0.1, 0.9, BenefitSpec::Log { scale: 1.0 }).is_err());
        assert!(GameConfig::new(2.0, 1.0, 0.2, 0.0, BenefitSpec::Log { scale: 1.0 }).is_err());
        assert!(GameConfig::new(2.0, 1.0, 0.2, 1.5, BenefitSpec::Log { scale: 1.0 }).is_err());
        assert!(GameConfig::new(2.0, 1.0, 0.2, f64::NAN, BenefitSpec::Log { scale: 1.0 }).is_err());
        assert!(GameConfig::new(
            2.0,
            1.0,
            0.2,
            0.9,
            BenefitSpec::Power {
                scale: 2.0,
                exponent: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn contract_params_validation() {
        let c = ContractParams::new(2.0, 0.0, 1.0).unwrap();
        assert_eq!(c.reputation_floor, 0.0);
        assert!(ContractParams::new(-1.0, 0.0, 1.0).is_err());
        assert!(ContractParams::new(2.0, -0.5, 1.0).is_err());
        assert!(ContractParams::new(2.0, 0.0, 1.1).is_err());
    }

    #[test]
    fn mixed_existence_condition() {
        let cfg = reference_config();
        assert!(ContractParams::new(2.0, 0.0, 1.0)
            .unwrap()
            .mixed_strategies_exist(&cfg));
        // ω·h = 0.1 <= C = 0.2
        assert!(!ContractParams::new(1.0, 0.0, 0.1)
            .unwrap()
            .mixed_strategies_exist(&cfg));
    }
}
