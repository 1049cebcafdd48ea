//! Local and global error bookkeeping for local extrapolation.
//!
//! With a pair of orders `z` and `z + r`, the propagated lower-order value
//! `w_lower` is produced from the higher-order value `w_higher` of the previous
//! node. Its global error splits exactly into
//!
//! ```text
//! delta_lower(i+1) = eps_lower(i+1) + alpha(i) * delta_higher(i)
//! ```
//!
//! where `eps_lower` is the one-step error launched from the true solution and
//! `alpha * delta = delta + h [F(x, y + delta) - F(x, y)]` is evaluated directly,
//! without forming `F_y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{reference_solution, IVProblem, MIN_REFERENCE_TOL};
use crate::state::{inf_norm, sub};
use crate::tableau::{increment_function, rk_step, ButcherTableau};

/// Accuracy target used whenever the analysis needs the true solution.
pub const ORACLE_TOL: f64 = MIN_REFERENCE_TOL;

/// One accepted step with its diagnostics.
///
/// `i` is 1-based and counts the step from `x_{i-1}` to `x_i`. Oracle-derived
/// fields are `None` when the problem has no exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub i: usize,
    pub x: f64,
    pub h: f64,
    pub rejects: usize,
    pub w_lower: Vec<f64>,
    pub w_higher: Vec<f64>,
    pub eps_lower: Option<Vec<f64>>,
    pub beta_lower: Vec<f64>,
    pub delta_lower: Option<Vec<f64>>,
    pub delta_higher: Option<Vec<f64>>,
    pub alpha_term: Option<Vec<f64>>,
    pub cond_lhs: Option<f64>,
    pub cond_rhs: Option<f64>,
    pub cond_holds: Option<bool>,
    pub bound: f64,
    pub clamped: bool,
}

impl StepRecord {
    pub fn has_diagnostics(&self) -> bool {
        self.delta_lower.is_some()
    }

    /// `|delta_lower|`, infinity norm.
    pub fn abs_delta_lower(&self) -> Option<f64> {
        self.delta_lower.as_deref().map(inf_norm)
    }

    pub fn abs_eps_lower(&self) -> Option<f64> {
        self.eps_lower.as_deref().map(inf_norm)
    }

    pub fn abs_alpha_term(&self) -> Option<f64> {
        self.alpha_term.as_deref().map(inf_norm)
    }

    /// Residual of the exact split `delta_lower - (eps_lower + alpha_term)`.
    pub fn closure_residual(&self) -> Option<f64> {
        let d = self.delta_lower.as_ref()?;
        let e = self.eps_lower.as_ref()?;
        let a = self.alpha_term.as_ref()?;
        Some(
            d.iter()
                .zip(e)
                .zip(a)
                .map(|((d, e), a)| (d - (e + a)).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Running mean of `|beta|` samples of the higher-order method.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BetaTracker {
    pub count: usize,
    pub mean_abs: f64,
    pub last: f64,
}

impl BetaTracker {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the tracker with one more sample folded in.
    #[must_use]
    pub fn push(self, beta: f64) -> Self {
        let count = self.count + 1;
        let mean_abs = self.mean_abs + (beta.abs() - self.mean_abs) / count as f64;
        Self {
            count,
            mean_abs,
            last: beta,
        }
    }
}

/// Outcome of the breakdown test `|beta_z| h^{z+1} > i |mean beta_{z+r}| h^{z+2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `lhs / (mean_abs h^{z+2})`; the condition holds exactly while `i` is below it.
    /// `+inf` when no higher-order error has been seen.
    pub m_ratio: f64,
}

/// First record whose propagated global error exceeds the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// The record's step index `i`.
    pub index: usize,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderMode {
    /// One step from `(x0, y0)`.
    Local,
    /// Fixed-step integration to `x_end`.
    Global,
}

fn powi_checked(h: f64, power: u32) -> Result<f64> {
    let hp = h.powi(power as i32);
    if hp == 0.0 || !hp.is_finite() {
        return Err(Error::StepUnderflow { h, power });
    }
    Ok(hp)
}

/// `[y(x) + h F(x, y(x))] - y(x + h)` with the true solution from the oracle.
pub fn local_error_exact(t: &ButcherTableau, p: &IVProblem, x: f64, h: f64) -> Result<Vec<f64>> {
    let y = reference_solution(p, x, ORACLE_TOL)?;
    let y_next = reference_solution(p, x + h, ORACLE_TOL)?;
    let w = rk_step(t, p.rhs(), x, &y, h)?;
    Ok(sub(&w, &y_next))
}

/// Local-extrapolation estimate `(w_lower - w_higher) / h^{z+1}`, componentwise.
pub fn estimate_beta(w_lower: &[f64], w_higher: &[f64], h: f64, z: u32) -> Result<Vec<f64>> {
    let scale = powi_checked(h, z + 1)?;
    Ok(w_lower
        .iter()
        .zip(w_higher)
        .map(|(lo, hi)| (lo - hi) / scale)
        .collect())
}

/// `alpha * delta_higher` for the lower method started from `w_higher` instead of
/// `y_exact`: `delta + h [F(x, w_higher) - F(x, y_exact)]` with `delta = w_higher - y_exact`.
pub fn alpha_propagation_term<F>(
    t_lower: &ButcherTableau,
    f: &F,
    x: f64,
    y_exact: &[f64],
    w_higher: &[f64],
    h: f64,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    let from_w = increment_function(t_lower, f, x, w_higher, h)?;
    let from_y = increment_function(t_lower, f, x, y_exact, h)?;
    Ok(w_higher
        .iter()
        .zip(y_exact)
        .zip(from_w.iter().zip(&from_y))
        .map(|((w, y), (fw, fy))| (w - y) + h * (fw - fy))
        .collect())
}

/// Samples `beta = eps_higher / h^{z_higher + 1}` at `x` from the true solution and
/// folds `|beta|` into the tracker.
pub fn mean_beta_higher(
    tracker: BetaTracker,
    t_higher: &ButcherTableau,
    p: &IVProblem,
    x: f64,
    h: f64,
) -> Result<BetaTracker> {
    let scale = powi_checked(h, t_higher.order() + 1)?;
    let eps = local_error_exact(t_higher, p, x, h)?;
    let beta = crate::state::dominant(&eps) / scale;
    Ok(tracker.push(beta))
}

/// Evaluates the breakdown condition at step `i` for a lower method of order `z`.
pub fn condition_check(
    i: usize,
    beta_lower: f64,
    tracker: &BetaTracker,
    h: f64,
    z: u32,
) -> ConditionCheck {
    let lhs = beta_lower.abs() * h.powi(z as i32 + 1);
    let per_step = tracker.mean_abs * h.powi(z as i32 + 2);
    let rhs = i as f64 * per_step;
    let m_ratio = if per_step > 0.0 {
        lhs / per_step
    } else {
        f64::INFINITY
    };
    ConditionCheck {
        lhs,
        rhs,
        holds: lhs > rhs,
        m_ratio,
    }
}

/// `sigma^{z+1} + sigma^{z+r+1}`.
pub fn bound_coefficient(sigma: f64, z: u32, r: u32) -> f64 {
    sigma.powi(z as i32 + 1) + sigma.powi((z + r) as i32 + 1)
}

/// Global-error bound `(sigma^{z+1} + sigma^{z+r+1}) delta`, valid only while the
/// breakdown condition holds.
pub fn sigma_bound(sigma: f64, z: u32, r: u32, delta: f64) -> f64 {
    bound_coefficient(sigma, z, r) * delta
}

/// First record (in trace order) with `|delta_lower| > delta`. Records without
/// diagnostics are skipped.
pub fn find_crossing(records: &[StepRecord], delta: f64) -> Option<Crossing> {
    records.iter().find_map(|r| match r.abs_delta_lower() {
        Some(d) if d > delta => Some(Crossing { index: r.i, x: r.x }),
        _ => None,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Error of `t` on `p` for stepsize `h`, with the stepsize actually used.
fn measured_error(
    t: &ButcherTableau,
    p: &IVProblem,
    mode: OrderMode,
    h: f64,
) -> Result<(f64, f64, f64)> {
    match mode {
        OrderMode::Local => {
            let err = inf_norm(&local_error_exact(t, p, p.x0(), h)?);
            let scale = inf_norm(&reference_solution(p, p.x0() + h, ORACLE_TOL)?);
            Ok((h, err, scale))
        }
        OrderMode::Global => {
            let span = p.x_end() - p.x0();
            let n = (span / h).round().max(1.0) as usize;
            let h_eff = span / n as f64;
            let mut y = p.y0().to_vec();
            for j in 0..n {
                y = rk_step(t, p.rhs(), p.x0() + j as f64 * h_eff, &y, h_eff)?;
            }
            let y_ref = reference_solution(p, p.x_end(), ORACLE_TOL)?;
            Ok((h_eff, inf_norm(&sub(&y, &y_ref)), inf_norm(&y_ref)))
        }
    }
}

/// Fitted log-log slope of error against stepsize. For an order-`z` method the
/// local slope is about `z + 1` and the global slope about `z`.
pub fn empirical_order(
    t: &ButcherTableau,
    p: &IVProblem,
    mode: OrderMode,
    h_set: &[f64],
) -> Result<f64> {
    if h_set.len() < 4 {
        return Err(Error::InvalidFit(format!(
            "need at least 4 stepsizes, got {}",
            h_set.len()
        )));
    }
    for (k, h) in h_set.iter().enumerate() {
        if !(*h > 0.0) || h_set[..k].contains(h) {
            return Err(Error::InvalidFit(format!(
                "stepsize {h} is non-positive or repeated"
            )));
        }
    }

    let mut log_h = Vec::with_capacity(h_set.len());
    let mut log_err = Vec::with_capacity(h_set.len());
    for &h in h_set {
        let (h_used, err, scale) = measured_error(t, p, mode, h)?;
        if !(err >= 1e2 * f64::EPSILON * scale.max(1.0)) {
            return Err(Error::DegenerateFit {
                h: h_used,
                error: err,
            });
        }
        log_h.push(h_used.ln());
        log_err.push(err.ln());
    }
    Ok(fit_slope(&log_h, &log_err))
}
