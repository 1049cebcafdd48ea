//! Explicit Runge-Kutta integration with local error control by local
//! extrapolation, instrumented to show how the global error behaves.
//!
//! A lower-order method (order `z`) and a higher-order method (order `z + r`)
//! are both advanced from the propagated higher-order value. Their difference
//! estimates the lower method's local error; the controller keeps that estimate
//! below an absolute tolerance `delta`. When the problem has an exact solution,
//! every accepted step also records:
//!
//! * the true local error of the lower method,
//! * the global errors of both propagated values,
//! * the propagation term `alpha * delta_higher`, which closes
//!   `delta_lower = eps_lower + alpha * delta_higher` exactly,
//! * the breakdown condition `|beta_z| h^{z+1} > i |mean beta_{z+r}| h^{z+2}`,
//! * the bound `(sigma^{z+1} + sigma^{z+r+1}) delta`.
//!
//! ```
//! use rk_error_lab::{integrate, ControllerConfig, IVProblem, MethodPair};
//!
//! let pair = MethodPair::builtin("rk3_rk4").unwrap();
//! let problem = IVProblem::builtin("decay").unwrap();
//! let cfg = ControllerConfig::for_problem(&problem, 1e-8);
//! let trace = integrate(&pair, &problem, &cfg).unwrap();
//! assert_eq!(trace.summary.final_x, 10.0);
//! ```

// `!(a > b)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod controller;
pub mod error;
pub mod problems;
pub mod report;
pub mod state;
pub mod tableau;

pub use analysis::{
    alpha_propagation_term, bound_coefficient, condition_check, empirical_order, estimate_beta,
    find_crossing, local_error_exact, mean_beta_higher, sigma_bound, BetaTracker, ConditionCheck,
    Crossing, OrderMode, StepRecord,
};
pub use controller::{
    attempt_step, integrate, propose_stepsize, ControllerConfig, StepAttempt, StepPolicy, Trace,
    TraceSummary,
};
pub use error::{Error, Result};
pub use problems::{builtin, reference_solution, IVProblem};
pub use tableau::{
    increment_function, rk_step, validate_tableau, ButcherTableau, MethodPair, ValidationOptions,
};
