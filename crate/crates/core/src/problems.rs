//! Initial-value problems `y' = f(x, y), y(x0) = y0` on `[x0, x_end]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::{inf_norm, sub};
use crate::tableau::{rk_step, ButcherTableau};

/// Right-hand side `f(x, y)` written into the output slice.
pub type Rhs = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
pub type RhsFn = Arc<Rhs>;
/// Closed-form solution `x -> y(x)`.
pub type ExactFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// Smallest accuracy target accepted by [`reference_solution`].
pub const MIN_REFERENCE_TOL: f64 = 1e-13;
/// Refinement budget of the step-halving oracle.
pub const MAX_HALVINGS: u32 = 24;

/// Growth rate of the `paper_exponential` problem, `ln(1000) / 100`.
pub fn exponential_rate() -> f64 {
    1000.0_f64.ln() / 100.0
}

#[derive(Clone)]
pub struct IVProblem {
    name: String,
    rhs: RhsFn,
    x0: f64,
    y0: Vec<f64>,
    x_end: f64,
    exact: Option<ExactFn>,
}

impl fmt::Debug for IVProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IVProblem")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .field("y0", &self.y0)
            .field("x_end", &self.x_end)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl IVProblem {
    pub fn new<F>(
        name: impl Into<String>,
        rhs: F,
        x0: f64,
        y0: Vec<f64>,
        x_end: f64,
    ) -> Result<Self>
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        let name = name.into();
        if !(x_end > x0) || !x0.is_finite() || !x_end.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "`{name}`: need finite x0 < x_end, got [{x0}, {x_end}]"
            )));
        }
        if y0.is_empty() {
            return Err(Error::InvalidProblem(format!(
                "`{name}`: empty initial state"
            )));
        }
        Ok(Self {
            name,
            rhs: Arc::new(rhs),
            x0,
            y0,
            x_end,
            exact: None,
        })
    }

    /// Attaches a closed-form solution. It must reproduce `y0` at `x0`.
    pub fn with_exact<E>(mut self, exact: E) -> Result<Self>
    where
        E: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        let at_start = exact(self.x0);
        if at_start.len() != self.y0.len() {
            return Err(Error::InvalidProblem(format!(
                "`{}`: exact solution has dimension {}, state has {}",
                self.name,
                at_start.len(),
                self.y0.len()
            )));
        }
        for (e, y) in at_start.iter().zip(&self.y0) {
            if !((e - y).abs() <= 1e-14 * (1.0 + y.abs())) {
                return Err(Error::InvalidProblem(format!(
                    "`{}`: exact(x0) = {e} disagrees with y0 = {y}",
                    self.name
                )));
            }
        }
        self.exact = Some(Arc::new(exact));
        Ok(self)
    }

    /// Same problem on a different final abscissa.
    pub fn with_x_end(mut self, x_end: f64) -> Result<Self> {
        if !(x_end > self.x0) || !x_end.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "`{}`: x_end = {x_end} must exceed x0 = {}",
                self.name, self.x0
            )));
        }
        self.x_end = x_end;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn x_end(&self) -> f64 {
        self.x_end
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn rhs(&self) -> &Rhs {
        self.rhs.as_ref()
    }

    /// Evaluates `f(x, y)` into a fresh vector.
    pub fn eval(&self, x: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        (self.rhs)(x, y, &mut out);
        out
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self, x: f64) -> Option<Vec<f64>> {
        self.exact.as_ref().map(|e| e(x))
    }

    /// Looks up a registry entry.
    pub fn builtin(name: &str) -> Result<Self> {
        let p = match name {
            "paper_exponential" => {
                let rate = exponential_rate();
                Self::new(
                    name,
                    move |_x, y, d| d[0] = rate * y[0],
                    0.0,
                    vec![1.0],
                    100.0,
                )?
                .with_exact(move |x| vec![(rate * x).exp()])?
            }
            "decay" => Self::new(name, |_x, y, d| d[0] = -y[0], 0.0, vec![1.0], 10.0)?
                .with_exact(|x| vec![(-x).exp()])?,
            "riccati_simple" => {
                Self::new(name, |_x, y, d| d[0] = -y[0] * y[0], 0.0, vec![1.0], 5.0)?
                    .with_exact(|x| vec![1.0 / (1.0 + x)])?
            }
            "zero" => Self::new(name, |_x, _y, d| d.fill(0.0), 0.0, vec![1.0], 1.0)?
                .with_exact(|_x| vec![1.0])?,
            // deliberately registered without a closed form
            "unit_slope" => Self::new(name, |_x, _y, d| d.fill(1.0), 0.0, vec![0.0], 2.0)?,
            _ => return Err(Error::UnknownProblem(name.to_string())),
        };
        Ok(p)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &[
            "paper_exponential",
            "decay",
            "riccati_simple",
            "zero",
            "unit_slope",
        ]
    }
}

/// `builtin` as a free function.
pub fn builtin(name: &str) -> Result<IVProblem> {
    IVProblem::builtin(name)
}

/// True solution at `x`: the closed form when registered, otherwise a fixed-step
/// classical RK4 solve from `x0` with the step halved until two successive
/// refinements differ by at most `tol` (infinity norm). Returns the finer result.
pub fn reference_solution(p: &IVProblem, x: f64, tol: f64) -> Result<Vec<f64>> {
    if let Some(y) = p.exact(x) {
        return Ok(y);
    }
    if !(tol >= MIN_REFERENCE_TOL) {
        return Err(Error::InvalidConfig(format!(
            "reference tolerance {tol:e} is below {MIN_REFERENCE_TOL:e}"
        )));
    }
    if !(x >= p.x0 && x <= p.x_end) {
        return Err(Error::InvalidProblem(format!(
            "x = {x} outside [{}, {}]",
            p.x0, p.x_end
        )));
    }
    if x == p.x0 {
        return Ok(p.y0.clone());
    }

    let rk4 = ButcherTableau::classic4();
    let solve = |n: usize| -> Result<Vec<f64>> {
        let h = (x - p.x0) / n as f64;
        let mut y = p.y0.clone();
        for j in 0..n {
            y = rk_step(&rk4, p.rhs(), p.x0 + j as f64 * h, &y, h)?;
        }
        Ok(y)
    };

    let mut n = 1usize;
    let mut prev = solve(n)?;
    let mut change = f64::INFINITY;
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let cur = solve(n)?;
        change = inf_norm(&sub(&cur, &prev));
        if change <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::OracleDivergence {
        halvings: MAX_HALVINGS,
        last_change: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_entries() {
        let p = builtin("paper_exponential").unwrap();
        assert_eq!((p.x0(), p.x_end(), p.y0()), (0.0, 100.0, &[1.0][..]));
        assert!((p.exact(100.0).unwrap()[0] - 1000.0).abs() <= 1e-9);
        assert_eq!(builtin("decay").unwrap().exact(0.0).unwrap(), vec![1.0]);
        assert!((builtin("riccati_simple").unwrap().exact(1.0).unwrap()[0] - 0.5).abs() <= 1e-15);
        assert!(!builtin("unit_slope").unwrap().has_exact());
        for name in IVProblem::builtin_names() {
            assert_eq!(builtin(name).unwrap().name(), *name);
        }
    }

    #[test]
    fn unknown_problem() {
        assert_eq!(
            builtin("lorenz").unwrap_err(),
            Error::UnknownProblem("lorenz".into())
        );
    }

    #[test]
    fn rate_is_full_precision() {
        let rate = exponential_rate();
        assert_eq!(rate, 0.069_077_552_789_821_36);
        assert!((rate - 0.069_077_552_789_821_37).abs() <= 1e-16);
    }

    #[test]
    fn invalid_construction() {
        let f = |_x: f64, _y: &[f64], d: &mut [f64]| d.fill(0.0);
        assert!(IVProblem::new("bad", f, 1.0, vec![0.0], 1.0).is_err());
        assert!(IVProblem::new("bad", f, 0.0, vec![], 1.0).is_err());
        let p = IVProblem::new("ok", f, 0.0, vec![1.0], 1.0).unwrap();
        assert!(p.clone().with_exact(|_x| vec![1.1]).is_err());
        assert!(p.clone().with_exact(|_x| vec![1.0, 1.0]).is_err());
        assert!(p.clone().with_x_end(-1.0).is_err());
        assert_eq!(p.with_x_end(3.0).unwrap().x_end(), 3.0);
    }

    #[test]
    fn reference_uses_exact_bitwise() {
        let p = builtin("paper_exponential").unwrap();
        let y = reference_solution(&p, 50.0, 1e-12).unwrap();
        assert_eq!(y, p.exact(50.0).unwrap());
        assert!((y[0] - 10f64.powf(1.5)).abs() <= 1e-11);
    }

    #[test]
    fn reference_at_start_is_initial_state() {
        let p = builtin("unit_slope").unwrap();
        assert_eq!(reference_solution(&p, 0.0, 1e-12).unwrap(), vec![0.0]);
    }

    #[test]
    fn reference_integrates_constant() {
        let p = builtin("unit_slope").unwrap();
        let y = reference_solution(&p, 2.0, 1e-12).unwrap();
        assert!((y[0] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn reference_refines_nonlinear_problem() {
        // riccati with its closed form stripped off; 1/(1+x) is the independent check.
        let p = IVProblem::new(
            "riccati_blind",
            |_x, y, d| d[0] = -y[0] * y[0],
            0.0,
            vec![1.0],
            5.0,
        )
        .unwrap();
        let y = reference_solution(&p, 3.0, 1e-11).unwrap();
        assert!((y[0] - 0.25).abs() <= 1e-10);
    }

    #[test]
    fn reference_rejects_bad_inputs() {
        let p = builtin("unit_slope").unwrap();
        assert!(matches!(
            reference_solution(&p, 2.0, 1e-14),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            reference_solution(&p, 2.5, 1e-12),
            Err(Error::InvalidProblem(_))
        ));
    }

    #[test]
    fn reference_reports_divergence() {
        // y' = y^2 from y0 = 1 blows up at x = 1; the fixed-step solve cannot settle.
        let p =
            IVProblem::new("blowup", |_x, y, d| d[0] = y[0] * y[0], 0.0, vec![1.0], 2.0).unwrap();
        assert!(reference_solution(&p, 1.5, 1e-12).is_err());
    }

    #[test]
    fn exact_solutions_satisfy_their_odes() {
        let step = 1e-6;
        for name in ["paper_exponential", "decay", "riccati_simple", "zero"] {
            let p = builtin(name).unwrap();
            for j in 1..=20 {
                let x = p.x0() + (p.x_end() - p.x0()) * j as f64 / 21.0;
                let fd =
                    (p.exact(x + step).unwrap()[0] - p.exact(x - step).unwrap()[0]) / (2.0 * step);
                let f = p.eval(x, &p.exact(x).unwrap())[0];
                let rel = (fd - f).abs() / f.abs().max(1e-300);
                assert!(
                    f == 0.0 && fd == 0.0 || rel <= 1e-6,
                    "{name} at {x}: fd {fd} vs f {f}"
                );
            }
        }
    }
}
