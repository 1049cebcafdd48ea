//! Explicit Runge-Kutta methods as Butcher tableaus.
//!
//! A method with `m` stages advances `w` by
//!
//! ```text
//! k_p     = f(x + c_p h, w + h * sum_{q<p} a_pq k_q)     p = 1..m
//! w_next  = w + h * sum_p b_p k_p
//! ```
//!
//! The weighted stage sum `F = sum_p b_p k_p` is the increment function.
//! Only explicit methods (strictly lower-triangular `a`) are supported.

use crate::error::{Error, Result};
use crate::state::all_finite;

/// Tolerance for the weight-sum and row-sum checks.
pub const CONSISTENCY_TOL: f64 = 1e-12;

/// Coefficients of one explicit Runge-Kutta method plus its classical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    name: String,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: u32,
}

/// Switches for [`validate_tableau`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Skip the `c_p = sum_q a_pq` row-sum check.
    pub allow_nonstandard_abscissae: bool,
}

impl ButcherTableau {
    /// Builds a candidate tableau without checking it. Call [`ButcherTableau::validate`]
    /// (or [`validate_tableau`]) before stepping with untrusted coefficients.
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: u32,
    ) -> Self {
        Self {
            name: name.into(),
            a,
            b,
            c,
            order,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of stages.
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Classical order `z`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn validate(self) -> Result<Self> {
        validate_tableau(self, ValidationOptions::default())
    }

    /// Heun's second-order method (explicit trapezoid).
    pub fn heun2() -> Self {
        Self::new(
            "heun2",
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![0.5, 0.5],
            vec![0.0, 1.0],
            2,
        )
    }

    /// Kutta's third-order method.
    pub fn kutta3() -> Self {
        Self::new(
            "kutta3",
            vec![
                vec![0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0],
                vec![-1.0, 2.0, 0.0],
            ],
            vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 1.0],
            3,
        )
    }

    /// The classical fourth-order method.
    pub fn classic4() -> Self {
        Self::new(
            "classic4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
            4,
        )
    }

    /// Looks up a built-in tableau by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "heun2" => Some(Self::heun2()),
            "kutta3" => Some(Self::kutta3()),
            "classic4" => Some(Self::classic4()),
            _ => None,
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["heun2", "kutta3", "classic4"]
    }

    /// Evaluates the increment function `F = sum_p b_p k_p` at `(x, y)` with step `h`.
    pub fn increment<F>(&self, f: &F, x: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        increment_function(self, f, x, y, h)
    }

    /// One step `y + h F(x, y)`.
    pub fn step<F>(&self, f: &F, x: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
    where
        F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
    {
        rk_step(self, f, x, y, h)
    }
}

/// Checks dimensions, explicitness, weight consistency and (unless disabled) the
/// abscissa row-sum convention. Returns the tableau unchanged when it passes.
pub fn validate_tableau(t: ButcherTableau, opts: ValidationOptions) -> Result<ButcherTableau> {
    let m = t.b.len();
    let dim = |detail: String| Error::DimensionMismatch {
        name: t.name.clone(),
        detail,
    };
    if m == 0 {
        return Err(dim("tableau has no stages".into()));
    }
    if t.order == 0 {
        return Err(dim("order must be at least 1".into()));
    }
    if t.c.len() != m {
        return Err(dim(format!("c has {} entries, expected {m}", t.c.len())));
    }
    if t.a.len() != m {
        return Err(dim(format!("a has {} rows, expected {m}", t.a.len())));
    }
    if let Some((p, row)) = t.a.iter().enumerate().find(|(_, row)| row.len() != m) {
        return Err(dim(format!(
            "a row {} has {} entries, expected {m}",
            p + 1,
            row.len()
        )));
    }

    for (p, row) in t.a.iter().enumerate() {
        for (q, &value) in row.iter().enumerate().skip(p) {
            if value != 0.0 {
                return Err(Error::ExplicitnessViolation {
                    name: t.name.clone(),
                    row: p + 1,
                    col: q + 1,
                    value,
                });
            }
        }
    }

    let weight_residual = (t.b.iter().sum::<f64>() - 1.0).abs();
    if !(weight_residual <= CONSISTENCY_TOL) {
        return Err(Error::ConsistencyViolation {
            name: t.name.clone(),
            condition: "weight sum",
            residual: weight_residual,
        });
    }

    if !opts.allow_nonstandard_abscissae {
        for (row, &c) in t.a.iter().zip(&t.c) {
            let residual = (row.iter().sum::<f64>() - c).abs();
            if !(residual <= CONSISTENCY_TOL) {
                return Err(Error::ConsistencyViolation {
                    name: t.name.clone(),
                    condition: "abscissa row sum",
                    residual,
                });
            }
        }
    }

    Ok(t)
}

/// Weighted stage sum `sum_p b_p k_p`. Stages are computed in ascending index order.
pub fn increment_function<F>(
    t: &ButcherTableau,
    f: &F,
    x: f64,
    y: &[f64],
    h: f64,
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    let n = y.len();
    let m = t.stages();
    let mut stages: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut arg = vec![0.0; n];

    for p in 0..m {
        for (j, slot) in arg.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (q, k) in stages.iter().enumerate() {
                acc += t.a[p][q] * k[j];
            }
            *slot = y[j] + h * acc;
        }
        let xp = x + t.c[p] * h;
        let mut k = vec![0.0; n];
        f(xp, &arg, &mut k);
        if !all_finite(&k) {
            return Err(Error::NonFiniteStage {
                stage: p + 1,
                x: xp,
            });
        }
        stages.push(k);
    }

    let mut out = vec![0.0; n];
    for (j, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (b, k) in t.b.iter().zip(&stages) {
            acc += b * k[j];
        }
        *slot = acc;
    }
    Ok(out)
}

/// `y + h * increment_function(t, f, x, y, h)`.
pub fn rk_step<F>(t: &ButcherTableau, f: &F, x: f64, y: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) + ?Sized,
{
    let inc = increment_function(t, f, x, y, h)?;
    Ok(y.iter().zip(&inc).map(|(yj, fj)| yj + h * fj).collect())
}

/// A lower-order method paired with a higher-order one for local extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodPair {
    lower: ButcherTableau,
    higher: ButcherTableau,
}

impl MethodPair {
    pub fn new(lower: ButcherTableau, higher: ButcherTableau) -> Result<Self> {
        if higher.order <= lower.order {
            return Err(Error::InvalidPair {
                lower: lower.order,
                higher: higher.order,
            });
        }
        Ok(Self { lower, higher })
    }

    pub fn lower(&self) -> &ButcherTableau {
        &self.lower
    }

    pub fn higher(&self) -> &ButcherTableau {
        &self.higher
    }

    /// Order gap `r = higher.z - lower.z`.
    pub fn gap(&self) -> u32 {
        self.higher.order - self.lower.order
    }

    /// Built-in pairs: `rk3_rk4` (Kutta 3 + classical 4), `rk2_rk3`, `rk2_rk4`.
    pub fn builtin(name: &str) -> Result<Self> {
        let (lower, higher) = match name {
            "rk3_rk4" => (ButcherTableau::kutta3(), ButcherTableau::classic4()),
            "rk2_rk3" => (ButcherTableau::heun2(), ButcherTableau::kutta3()),
            "rk2_rk4" => (ButcherTableau::heun2(), ButcherTableau::classic4()),
            _ => return Err(Error::UnknownPair(name.to_string())),
        };
        Self::new(lower, higher)
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["rk3_rk4", "rk2_rk3", "rk2_rk4"]
    }

    /// Validates both tableaus with the given options.
    pub fn validated(self, opts: ValidationOptions) -> Result<Self> {
        let lower = validate_tableau(self.lower, opts)?;
        let higher = validate_tableau(self.higher, opts)?;
        Self::new(lower, higher)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(_x: f64, _y: &[f64], d: &mut [f64]) {
        d.fill(0.0);
    }

    fn growth(_x: f64, y: &[f64], d: &mut [f64]) {
        d[0] = y[0];
    }

    /// Truncated exponential series: the stability polynomial of an m-stage
    /// order-m explicit method for m <= 4.
    fn taylor_poly(z: f64, order: u32) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..=order {
            term *= z / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn builtins_validate() {
        for name in ButcherTableau::builtin_names() {
            ButcherTableau::builtin(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn classic4_sums_by_hand() {
        let t = ButcherTableau::classic4();
        assert_eq!(t.c(), &[0.0, 0.5, 0.5, 1.0]);
        // 1/6 + 1/3 + 1/3 + 1/6 = 1
        assert!((t.b().iter().sum::<f64>() - 1.0).abs() <= 1e-15);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn kutta3_sums_by_hand() {
        let t = ButcherTableau::kutta3();
        // row 3: -1 + 2 = 1 = c_3
        assert_eq!(t.a()[2][0] + t.a()[2][1], t.c()[2]);
        assert!(t.validate().is_ok());
    }

    #[test]
    fn diagonal_entry_is_implicit() {
        let mut t = ButcherTableau::classic4();
        t.a[0][0] = 0.5;
        match t.validate() {
            Err(Error::ExplicitnessViolation {
                row: 1,
                col: 1,
                value,
                ..
            }) => assert_eq!(value, 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn upper_entry_is_implicit() {
        let mut t = ButcherTableau::kutta3();
        t.a[1][2] = 1e-3;
        assert!(matches!(
            t.validate(),
            Err(Error::ExplicitnessViolation { row: 2, col: 3, .. })
        ));
    }

    #[test]
    fn bad_weights_rejected() {
        let mut t = ButcherTableau::kutta3();
        t.b[0] += 1e-9;
        assert!(matches!(
            t.validate(),
            Err(Error::ConsistencyViolation {
                condition: "weight sum",
                ..
            })
        ));
    }

    #[test]
    fn row_sum_check_can_be_disabled() {
        let mut t = ButcherTableau::heun2();
        t.c[1] = 0.75;
        assert!(matches!(
            t.clone().validate(),
            Err(Error::ConsistencyViolation {
                condition: "abscissa row sum",
                ..
            })
        ));
        let opts = ValidationOptions {
            allow_nonstandard_abscissae: true,
        };
        assert!(validate_tableau(t, opts).is_ok());
    }

    #[test]
    fn dimension_errors() {
        let t = ButcherTableau::new("short_c", vec![vec![0.0]], vec![1.0], vec![], 1);
        assert!(matches!(t.validate(), Err(Error::DimensionMismatch { .. })));
        let t = ButcherTableau::new(
            "ragged",
            vec![vec![0.0, 0.0], vec![1.0]],
            vec![0.5, 0.5],
            vec![0.0, 1.0],
            2,
        );
        assert!(matches!(t.validate(), Err(Error::DimensionMismatch { .. })));
        let t = ButcherTableau::new("empty", vec![], vec![], vec![], 1);
        assert!(matches!(t.validate(), Err(Error::DimensionMismatch { .. })));
        let t = ButcherTableau::new("euler0", vec![vec![0.0]], vec![1.0], vec![0.0], 0);
        assert!(matches!(t.validate(), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_field_gives_zero_increment() {
        for name in ButcherTableau::builtin_names() {
            let t = ButcherTableau::builtin(name).unwrap();
            assert_eq!(
                t.increment(&zero, 1.3, &[2.0, -1.0], 0.7).unwrap(),
                vec![0.0, 0.0]
            );
            assert_eq!(t.step(&zero, 0.0, &[3.5], 0.25).unwrap(), vec![3.5]);
        }
    }

    #[test]
    fn constant_field_gives_unit_slope() {
        let one = |_x: f64, _y: &[f64], d: &mut [f64]| d[0] = 1.0;
        for name in ButcherTableau::builtin_names() {
            let t = ButcherTableau::builtin(name).unwrap();
            let inc = t.increment(&one, 0.0, &[0.0], 0.3).unwrap();
            assert!((inc[0] - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn classic4_growth_matches_stability_polynomial() {
        let t = ButcherTableau::classic4();
        let inc = t.increment(&growth, 0.0, &[1.0], 0.1).unwrap();
        let expected = (taylor_poly(0.1, 4) - 1.0) / 0.1;
        assert!((inc[0] - expected).abs() <= 1e-14);
        assert!((inc[0] - 1.051_708_333_333_333).abs() <= 1e-12);

        let next = t.step(&growth, 0.0, &[1.0], 0.1).unwrap();
        assert!((next[0] - taylor_poly(0.1, 4)).abs() <= 1e-15);
        assert!((next[0] - 1.105_170_833_333_333_4).abs() <= 1e-15);
    }

    #[test]
    fn kutta3_growth_matches_cubic() {
        let next = ButcherTableau::kutta3()
            .step(&growth, 0.0, &[1.0], 0.1)
            .unwrap();
        assert!((next[0] - taylor_poly(0.1, 3)).abs() <= 1e-15);
        assert!((next[0] - 1.105_166_666_666_666_7).abs() <= 1e-15);
    }

    #[test]
    fn non_finite_stage_is_reported() {
        let blowup = |x: f64, _y: &[f64], d: &mut [f64]| d[0] = 1.0 / (x - 0.5);
        let err = ButcherTableau::classic4()
            .step(&blowup, 0.0, &[0.0], 1.0)
            .unwrap_err();
        assert_eq!(err, Error::NonFiniteStage { stage: 2, x: 0.5 });
    }

    #[test]
    fn pair_gap_and_registry() {
        let p = MethodPair::builtin("rk3_rk4").unwrap();
        assert_eq!(p.lower().order(), 3);
        assert_eq!(p.higher().order(), 4);
        assert_eq!(p.gap(), 1);
        assert_eq!(MethodPair::builtin("rk2_rk4").unwrap().gap(), 2);
        assert!(matches!(
            MethodPair::builtin("nope"),
            Err(Error::UnknownPair(_))
        ));
        assert!(matches!(
            MethodPair::new(ButcherTableau::classic4(), ButcherTableau::kutta3()),
            Err(Error::InvalidPair {
                lower: 4,
                higher: 3
            })
        ));
    }
}
