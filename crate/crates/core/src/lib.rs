//! A two-stage contracting game between a system operator and a strategic
//! sensor, with costly stochastic verification and reputation-indexed
//! payments.
//!
//! The sensor privately chooses how much effort to exert and may misreport
//! it; the operator audits reports with some probability and pays according
//! to assessed reputation, optionally carrying part of the first-stage
//! assessment into the second-stage payment. This crate provides:
//!
//! - [`model`]: environment and contract parameters, benefit families,
//!   feasibility checks;
//! - [`equilibrium`]: stage payoff matrices, pure and mixed equilibria, and
//!   closed-form expected utilities;
//! - [`design`]: the optimal contract for a given reputation weight, the
//!   weight sweep, the payment-cap case analysis, and a brute-force lattice
//!   search;
//! - [`gametree`]: exact enumeration of all outcome paths — the independent
//!   oracle behind every closed form;
//! - [`montecarlo`]: seeded, reproducible stochastic simulation.

pub mod design;
pub mod equilibrium;
pub mod gametree;
pub mod model;
pub mod montecarlo;

pub use design::{
    case_analysis, grid_search_contract, omega_objective, omega_objective_derivative,
    optimal_contract_given_omega, optimal_omega, CaseAnalysis, CaseLabel, DesignError,
    GridSearchOutcome, GridSpec, OmegaSweep, OptimalContract,
};
pub use equilibrium::{
    effw, mixed_profile, operator_eu, pure_nash, sensor_eu, stage1_mixed, stage2_continuation,
    stage2_mixed, stage_payoff_matrix, EquilibriumError, EquilibriumProfile, Method,
    OperatorAction, PayoffPair, SensorAction, Stage, StageMixedStrategy, StagePayoffMatrix,
};
pub use gametree::{
    check_equilibrium, default_effort_grid, enumerate_paths, exact_payoffs, indifference_gaps,
    linear_grid, sensor_best_response, BehavioralStrategy, BestResponse, DeviationFinding,
    DeviationReport, IndifferenceGaps, OutcomeMap, OutcomePath, PlanChoice, Player, Stage2Policy,
    StageOutcome, StagePlan, DEFAULT_CERTIFICATION_TOL, DEFAULT_EFFORT_GRID_POINTS,
};
pub use model::{
    validate_config, BenefitSpec, ContractParams, EffortBound, EffortStar, GameConfig, ModelError,
    ValidityReport,
};
pub use montecarlo::{
    draw_unit, pairwise_sum, simulate, trajectory_log, SimulationResult, SimulationSpec,
    TrajectoryRecord,
};
