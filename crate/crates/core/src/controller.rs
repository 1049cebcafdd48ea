//! Adaptive integration with absolute local error control via local extrapolation.
//!
//! Each attempt advances the same input (the propagated higher-order value) with
//! both methods of the pair. The step is rejected when the estimated lower-order
//! local error `|beta| h^{z+1}` reaches the tolerance; otherwise the higher-order
//! value becomes the next input.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    alpha_propagation_term, bound_coefficient, condition_check, estimate_beta, find_crossing,
    mean_beta_higher, BetaTracker, Crossing, StepRecord, ORACLE_TOL,
};
use crate::error::{Error, Result};
use crate::problems::{reference_solution, IVProblem};
use crate::state::{all_finite, dominant, inf_norm, sub};
use crate::tableau::{rk_step, MethodPair};

/// How the stepsize evolves after an accepted step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepPolicy {
    /// Re-propose from the accepted step's error estimate (may grow up to `h_max`).
    #[default]
    Proportional,
    /// Keep the stepsize; shrink only on rejection.
    RejectOnly,
}

impl StepPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            StepPolicy::Proportional => "proportional",
            StepPolicy::RejectOnly => "reject-only",
        }
    }
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StepPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "proportional" => Ok(StepPolicy::Proportional),
            "reject-only" => Ok(StepPolicy::RejectOnly),
            other => Err(format!(
                "unknown policy `{other}` (expected proportional or reject-only)"
            )),
        }
    }
}

pub const DEFAULT_SIGMA: f64 = 0.8;
pub const DEFAULT_MAX_REJECTS: usize = 20;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Absolute local error tolerance.
    pub delta: f64,
    /// Safety factor in `(0, 1]`.
    pub sigma: f64,
    /// First stepsize; `None` probes one attempt at `(x_end - x0) / 100`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub policy: StepPolicy,
    pub max_steps: usize,
    /// Consecutive rejections allowed on one step.
    pub max_rejects: usize,
}

impl ControllerConfig {
    /// Defaults scaled to the problem's interval.
    pub fn for_problem(p: &IVProblem, delta: f64) -> Self {
        let span = p.x_end() - p.x0();
        Self {
            delta,
            sigma: DEFAULT_SIGMA,
            h_init: None,
            h_min: 1e-12 * span,
            h_max: span / 10.0,
            policy: StepPolicy::Proportional,
            max_steps: DEFAULT_MAX_STEPS,
            max_rejects: DEFAULT_MAX_REJECTS,
        }
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_policy(mut self, policy: StepPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_h_init(mut self, h_init: f64) -> Self {
        self.h_init = Some(h_init);
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if !(self.sigma > 0.0 && self.sigma <= 1.0) {
            return bad(format!("sigma must lie in (0, 1], got {}", self.sigma));
        }
        if !(self.h_min > 0.0 && self.h_min <= self.h_max) || !self.h_max.is_finite() {
            return bad(format!(
                "need 0 < h_min <= h_max, got h_min = {}, h_max = {}",
                self.h_min, self.h_max
            ));
        }
        if let Some(h) = self.h_init {
            if !(h >= self.h_min && h <= self.h_max) {
                return bad(format!(
                    "h_init = {h} outside [h_min, h_max] = [{}, {}]",
                    self.h_min, self.h_max
                ));
            }
        }
        if self.max_steps == 0 || self.max_rejects == 0 {
            return bad("max_steps and max_rejects must be at least 1".into());
        }
        Ok(())
    }
}

/// Unclamped proposal `sigma (delta / beta)^{1/(z+1)}`; infinite for `beta = 0`.
fn raw_stepsize(beta_norm: f64, cfg: &ControllerConfig, z: u32) -> f64 {
    if beta_norm == 0.0 {
        return f64::INFINITY;
    }
    cfg.sigma * (cfg.delta / beta_norm).powf(1.0 / f64::from(z + 1))
}

/// Stepsize making the estimated local error `sigma^{z+1} delta`, clamped to
/// `[h_min, h_max]`. A zero estimate returns `h_max`.
pub fn propose_stepsize(beta_norm: f64, cfg: &ControllerConfig, z: u32) -> f64 {
    raw_stepsize(beta_norm, cfg, z).clamp(cfg.h_min, cfg.h_max)
}

/// Both candidates of one trial step and the lower-order error coefficient estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct StepAttempt {
    pub w_lower: Vec<f64>,
    pub w_higher: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Advances `w_higher_in` by `h` with both methods of the pair.
pub fn attempt_step<F>(
    pair: &MethodPair,
    f: &F,
    x: f64,
    w_higher_in: &[f64],
    h: f64,
) -> Result<StepAttempt>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    let w_lower = rk_step(pair.lower(), f, x, w_higher_in, h)?;
    let w_higher = rk_step(pair.higher(), f, x, w_higher_in, h)?;
    let beta = estimate_beta(&w_lower, &w_higher, h, pair.lower().order())?;
    Ok(StepAttempt {
        w_lower,
        w_higher,
        beta,
    })
}

/// Run totals; serialized as the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub final_x: f64,
    pub final_delta_lower: Option<f64>,
    pub crossing_index: Option<usize>,
    pub crossing_x: Option<f64>,
    pub condition_violation_index: Option<usize>,
    pub bound_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub problem: String,
    pub delta: f64,
    pub records: Vec<StepRecord>,
    pub summary: TraceSummary,
}

impl Trace {
    pub fn crossing(&self) -> Option<Crossing> {
        match (self.summary.crossing_index, self.summary.crossing_x) {
            (Some(index), Some(x)) => Some(Crossing { index, x }),
            _ => None,
        }
    }

    pub fn has_diagnostics(&self) -> bool {
        self.records
            .first()
            .is_some_and(StepRecord::has_diagnostics)
    }

    /// Final `|delta_lower| / delta`.
    pub fn final_error_ratio(&self) -> Option<f64> {
        self.summary.final_delta_lower.map(|d| d.abs() / self.delta)
    }
}

struct Oracle<'a> {
    problem: &'a IVProblem,
    tracker: BetaTracker,
}

impl Oracle<'_> {
    /// Fills the oracle fields of `rec`; `x` is the step's input abscissa.
    fn annotate(
        &mut self,
        pair: &MethodPair,
        rec: &mut StepRecord,
        x: f64,
        w_in: &[f64],
    ) -> Result<()> {
        let p = self.problem;
        let h = rec.h;
        let y_in = reference_solution(p, x, ORACLE_TOL)?;
        let y_out = reference_solution(p, rec.x, ORACLE_TOL)?;
        let from_exact = rk_step(pair.lower(), p.rhs(), x, &y_in, h)?;
        rec.eps_lower = Some(sub(&from_exact, &y_out));
        rec.alpha_term = Some(alpha_propagation_term(
            pair.lower(),
            p.rhs(),
            x,
            &y_in,
            w_in,
            h,
        )?);
        rec.delta_lower = Some(sub(&rec.w_lower, &y_out));
        rec.delta_higher = Some(sub(&rec.w_higher, &y_out));

        self.tracker = mean_beta_higher(self.tracker, pair.higher(), p, x, h)?;
        let check = condition_check(
            rec.i,
            inf_norm(&rec.beta_lower),
            &self.tracker,
            h,
            pair.lower().order(),
        );
        rec.cond_lhs = Some(check.lhs);
        rec.cond_rhs = Some(check.rhs);
        rec.cond_holds = Some(check.holds);
        Ok(())
    }
}

/// Integrates `p` from `x0` to `x_end`, propagating the higher-order solution and
/// recording every accepted step. Diagnostics are filled in when `p` has an exact
/// solution.
pub fn integrate(pair: &MethodPair, p: &IVProblem, cfg: &ControllerConfig) -> Result<Trace> {
    cfg.validate()?;
    let f = p.rhs();
    let z = pair.lower().order();
    let (x0, x_end) = (p.x0(), p.x_end());
    let bound_coef = bound_coefficient(cfg.sigma, z, pair.gap());
    let bound = bound_coef * cfg.delta;

    let mut h = match cfg.h_init {
        Some(h) => h,
        None => {
            let probe = attempt_step(pair, f, x0, p.y0(), (x_end - x0) / 100.0)?;
            propose_stepsize(inf_norm(&probe.beta), cfg, z)
        }
    };

    let mut oracle = p.has_exact().then(|| Oracle {
        problem: p,
        tracker: BetaTracker::new(),
    });
    let mut x = x0;
    let mut w = p.y0().to_vec();
    let mut records: Vec<StepRecord> = Vec::new();
    let mut rejected = 0usize;

    while x < x_end {
        if records.len() >= cfg.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: cfg.max_steps,
                x,
            });
        }

        let mut rejects = 0usize;
        let (attempt, h_used, clamped) = loop {
            let remaining = x_end - x;
            let lands = h >= remaining || remaining - h < cfg.h_min;
            let h_try = if lands { remaining } else { h };
            let attempt = attempt_step(pair, f, x, &w, h_try)?;
            let beta_norm = inf_norm(&attempt.beta);
            if beta_norm * h_try.powi(z as i32 + 1) < cfg.delta {
                break (attempt, h_try, lands && h_try != h);
            }

            rejects += 1;
            rejected += 1;
            if rejects > cfg.max_rejects {
                return Err(Error::MaxRejectsExceeded {
                    max_rejects: cfg.max_rejects,
                    x,
                });
            }
            let required = raw_stepsize(beta_norm, cfg, z);
            if required < cfg.h_min {
                return Err(Error::StepsizeUnderflow {
                    x,
                    required,
                    h_min: cfg.h_min,
                });
            }
            h = propose_stepsize(beta_norm, cfg, z);
        };

        if !all_finite(&attempt.w_lower) || !all_finite(&attempt.w_higher) {
            return Err(Error::NonFiniteState { x });
        }

        let x_next = if h_used == x_end - x {
            x_end
        } else {
            x + h_used
        };
        let beta_norm = inf_norm(&attempt.beta);
        let mut rec = StepRecord {
            i: records.len() + 1,
            x: x_next,
            h: h_used,
            rejects,
            w_lower: attempt.w_lower,
            w_higher: attempt.w_higher,
            eps_lower: None,
            beta_lower: attempt.beta,
            delta_lower: None,
            delta_higher: None,
            alpha_term: None,
            cond_lhs: None,
            cond_rhs: None,
            cond_holds: None,
            bound,
            clamped,
        };
        if let Some(oracle) = oracle.as_mut() {
            oracle.annotate(pair, &mut rec, x, &w)?;
        }

        x = x_next;
        w.clone_from(&rec.w_higher);
        records.push(rec);

        if cfg.policy == StepPolicy::Proportional {
            h = propose_stepsize(beta_norm, cfg, z);
        }
    }

    let crossing = find_crossing(&records, cfg.delta);
    let summary = TraceSummary {
        accepted: records.len(),
        rejected,
        final_x: x,
        final_delta_lower: records
            .last()
            .and_then(|r| r.delta_lower.as_deref())
            .map(dominant),
        crossing_index: crossing.map(|c| c.index),
        crossing_x: crossing.map(|c| c.x),
        condition_violation_index: records
            .iter()
            .find(|r| r.cond_holds == Some(false))
            .map(|r| r.i),
        bound_coefficient: bound_coef,
    };
    Ok(Trace {
        problem: p.name().to_string(),
        delta: cfg.delta,
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{builtin, exponential_rate};

    fn cfg(delta: f64) -> ControllerConfig {
        ControllerConfig {
            delta,
            sigma: 1.0,
            h_init: None,
            h_min: 1e-12,
            h_max: 1e3,
            policy: StepPolicy::Proportional,
            max_steps: 10,
            max_rejects: 5,
        }
    }

    #[test]
    fn proposal_examples() {
        let c = cfg(1e-8);
        assert!((raw_stepsize(1e-8, &c, 3) - 1.0).abs() <= 1e-15);
        let h = propose_stepsize(1.0 / 24.0, &c, 3);
        // verify the root by raising it back to the fourth power
        assert!((h.powi(4) - 2.4e-7).abs() <= 1e-20);
        assert!((h - 0.02213).abs() <= 1e-5);
        let h08 = propose_stepsize(1.0 / 24.0, &c.clone().with_sigma(0.8), 3);
        assert!((h08 - 0.8 * h).abs() <= 1e-16);
        assert!((h08 - 0.01771).abs() <= 1e-5);
    }

    #[test]
    fn proposal_clamps() {
        let c = cfg(1e-8);
        assert_eq!(propose_stepsize(0.0, &c, 3), c.h_max);
        assert_eq!(propose_stepsize(1e300, &c, 3), c.h_min);
        assert_eq!(propose_stepsize(1e-300, &c, 3), c.h_max);
    }

    #[test]
    fn policy_names_round_trip() {
        for p in [StepPolicy::Proportional, StepPolicy::RejectOnly] {
            assert_eq!(p.to_string().parse::<StepPolicy>().unwrap(), p);
        }
        assert!("pid".parse::<StepPolicy>().is_err());
    }

    #[test]
    fn config_validation() {
        let p = builtin("decay").unwrap();
        let base = ControllerConfig::for_problem(&p, 1e-8);
        assert!(base.validate().is_ok());
        assert_eq!(base.sigma, 0.8);
        assert_eq!(base.h_max, 1.0);
        assert!((base.h_min - 1e-11).abs() <= 1e-25);
        for broken in [
            ControllerConfig {
                delta: -1.0,
                ..base.clone()
            },
            ControllerConfig {
                sigma: 1.5,
                ..base.clone()
            },
            ControllerConfig {
                sigma: 0.0,
                ..base.clone()
            },
            ControllerConfig {
                h_min: 2.0,
                ..base.clone()
            },
            ControllerConfig {
                h_init: Some(5.0),
                ..base.clone()
            },
            ControllerConfig {
                max_rejects: 0,
                ..base.clone()
            },
        ] {
            assert!(
                matches!(broken.validate(), Err(Error::InvalidConfig(_))),
                "{broken:?}"
            );
        }
    }

    #[test]
    fn zero_field_attempt() {
        let p = builtin("zero").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let a = attempt_step(&pair, p.rhs(), 0.0, &[2.0], 0.3).unwrap();
        assert_eq!(
            (a.w_lower, a.w_higher, a.beta),
            (vec![2.0], vec![2.0], vec![0.0])
        );
    }

    #[test]
    fn exponential_attempt_beta() {
        let p = builtin("paper_exponential").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let a = attempt_step(&pair, p.rhs(), 0.0, &[1.0], 0.1).unwrap();
        let rate = exponential_rate();
        let expected = -rate.powi(4) / 24.0;
        assert!(((a.beta[0] - expected) / expected).abs() <= 0.03);
        assert!((a.beta[0] + 9.49e-7).abs() <= 1e-9);
    }

    #[test]
    fn zero_field_integration() {
        let p = builtin("zero").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let trace = integrate(&pair, &p, &ControllerConfig::for_problem(&p, 1e-8)).unwrap();
        assert!(!trace.records.is_empty());
        assert_eq!(trace.summary.final_x, 1.0);
        assert!(trace
            .records
            .iter()
            .all(|r| r.abs_delta_lower() == Some(0.0) && r.abs_eps_lower() == Some(0.0)));
        assert_eq!(trace.crossing(), None);
        assert_eq!(trace.summary.rejected, 0);
    }

    #[test]
    fn step_cap() {
        let p = builtin("decay").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let c = ControllerConfig::for_problem(&p, 1e-10).with_max_steps(3);
        assert!(matches!(
            integrate(&pair, &p, &c),
            Err(Error::MaxStepsExceeded { max_steps: 3, .. })
        ));
    }

    #[test]
    fn reject_cap() {
        // The jump at x = 0.3 makes the local error scale like h, so beta grows as
        // the step shrinks and the retry is rejected again.
        let p = IVProblem::new(
            "jump",
            |x, y, d| d[0] = if x > 0.3 { 3.0 * y[0] } else { y[0] },
            0.0,
            vec![1.0],
            1.0,
        )
        .unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let c = ControllerConfig {
            h_init: Some(0.1),
            max_rejects: 1,
            ..ControllerConfig::for_problem(&p, 1e-12)
        };
        let r = integrate(&pair, &p, &c);
        assert!(
            matches!(r, Err(Error::MaxRejectsExceeded { max_rejects: 1, .. })),
            "{r:?}"
        );
    }

    #[test]
    fn stepsize_underflow() {
        let p = builtin("decay").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let c = ControllerConfig {
            h_init: Some(1.0),
            h_min: 0.5,
            ..ControllerConfig::for_problem(&p, 1e-8)
        };
        assert!(matches!(
            integrate(&pair, &p, &c),
            Err(Error::StepsizeUnderflow { .. })
        ));
    }

    #[test]
    fn blowup_is_reported() {
        let p =
            IVProblem::new("blowup", |_x, y, d| d[0] = y[0] * y[0], 0.0, vec![1.0], 2.0).unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let c = ControllerConfig::for_problem(&p, 1e-6);
        assert!(integrate(&pair, &p, &c).is_err());
    }

    #[test]
    fn no_oracle_leaves_diagnostics_empty() {
        let p = builtin("unit_slope").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let trace = integrate(&pair, &p, &ControllerConfig::for_problem(&p, 1e-8)).unwrap();
        assert!(!trace.has_diagnostics());
        assert!(trace
            .records
            .iter()
            .all(|r| r.eps_lower.is_none() && r.cond_holds.is_none()));
        assert_eq!(trace.summary.final_delta_lower, None);
        assert_eq!(trace.summary.crossing_index, None);
        assert!((trace.records.last().unwrap().w_higher[0] - 2.0).abs() <= 1e-14);
    }

    #[test]
    fn final_step_lands_on_x_end() {
        let p = builtin("decay").unwrap();
        let pair = MethodPair::builtin("rk3_rk4").unwrap();
        let trace = integrate(&pair, &p, &ControllerConfig::for_problem(&p, 1e-6)).unwrap();
        let last = trace.records.last().unwrap();
        assert_eq!(last.x, 10.0);
        assert!(trace
            .records
            .windows(2)
            .all(|w| w[1].x > w[0].x && w[1].i == w[0].i + 1));
        assert_eq!(trace.records[0].i, 1);
    }
}
