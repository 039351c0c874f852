//! Ordinary least squares with coefficient inference and AIC-based stepwise
//! model selection.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::student_t_two_sided_p;

/// Named predictors plus a response; the intercept is implicit.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    response: Vec<f64>,
    response_name: String,
}

impl DesignMatrix {
    pub fn new(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        response: Vec<f64>,
        response_name: impl Into<String>,
    ) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidDesign(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = response.len();
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::InvalidDesign(format!(
                    "column {name} has {} rows, response has {n}",
                    col.len()
                )));
            }
            if !col.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidDesign(format!(
                    "column {name} contains non-finite values"
                )));
            }
        }
        if !response.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDesign(
                "response contains non-finite values".into(),
            ));
        }
        // Residual degrees of freedom ≥ 1 with the implicit intercept.
        if n <= names.len() + 1 {
            return Err(Error::InvalidDesign(format!(
                "need more than {} rows for {} predictors plus intercept, got {n}",
                names.len() + 1,
                names.len()
            )));
        }
        // Constant columns duplicate the intercept.
        for (name, col) in names.iter().zip(&columns) {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                return Err(Error::InvalidDesign(format!("column {name} is constant")));
            }
        }
        // Exactly collinear column pairs are a data bug, not a fit problem.
        for i in 0..columns.len() {
            for j in i + 1..columns.len() {
                if exactly_proportional(&columns[i], &columns[j]) {
                    return Err(Error::InvalidDesign(format!(
                        "columns {} and {} are exactly collinear",
                        names[i], names[j]
                    )));
                }
            }
        }
        Ok(Self {
            names,
            columns,
            response,
            response_name: response_name.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// A design restricted to the named predictor subset (in this design's
    /// column order).
    pub fn subset(&self, keep: &[String]) -> Result<Self> {
        let mut names = Vec::new();
        let mut columns = Vec::new();
        for (name, col) in self.names.iter().zip(&self.columns) {
            if keep.contains(name) {
                names.push(name.clone());
                columns.push(col.clone());
            }
        }
        if names.len() != keep.len() {
            let missing: Vec<&String> = keep.iter().filter(|k| !self.names.contains(k)).collect();
            return Err(Error::InvalidDesign(format!(
                "unknown predictors {missing:?}"
            )));
        }
        Ok(Self {
            names,
            columns,
            response: self.response.clone(),
            response_name: self.response_name.clone(),
        })
    }
}

fn exactly_proportional(a: &[f64], b: &[f64]) -> bool {
    // b = c·a for one fixed c, bitwise-exact on every element.
    let mut ratio: Option<f64> = None;
    for (&x, &y) in a.iter().zip(b) {
        match (x == 0.0, y == 0.0) {
            (true, true) => continue,
            (true, false) | (false, true) => return false,
            (false, false) => {
                let r = y / x;
                match ratio {
                    None => ratio = Some(r),
                    Some(prev) if prev == r => {}
                    Some(_) => return false,
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

/// One fitted model: per-coefficient inference plus model-level diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    /// Intercept first, then predictors in design column order.
    pub coefficients: Vec<Coefficient>,
    pub rss: f64,
    pub df_resid: usize,
    pub aic: f64,
    /// Set when RSS underflowed to zero and `aic` is the -inf sentinel.
    pub zero_rss: bool,
    pub n: usize,
    pub predictor_names: Vec<String>,
    pub response_name: String,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    /// Fitted value for one row of named predictor values.
    pub fn predict(&self, values: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let mut acc = 0.0;
        for c in &self.coefficients {
            if c.name == "(Intercept)" {
                acc += c.estimate;
            } else {
                let v = values(&c.name).ok_or_else(|| Error::MissingFeature(c.name.clone()))?;
                acc += c.estimate * v;
            }
        }
        Ok(acc)
    }
}

/// AIC in the stepwise-selection convention: n·ln(RSS/n) + 2·k, where k
/// counts every estimated coefficient including the intercept. Zero RSS
/// yields the -inf sentinel (pair it with [`FitResult::zero_rss`]).
pub fn aic(n: usize, rss: f64, k: usize) -> f64 {
    if rss <= 0.0 {
        return f64::NEG_INFINITY;
    }
    n as f64 * (rss / n as f64).ln() + 2.0 * k as f64
}

/// Fit by QR decomposition with a rank check; inference from
/// σ̂²·(XᵀX)⁻¹ with σ̂² = RSS/(n−k) and two-sided Student-t p-values.
pub fn ols_fit(design: &DesignMatrix) -> Result<FitResult> {
    let n = design.n_rows();
    let k = design.names.len() + 1; // + intercept
    if n <= k {
        return Err(Error::InvalidDesign(format!(
            "insufficient rows: {n} for {k} coefficients"
        )));
    }

    let mut x = DMatrix::zeros(n, k);
    for r in 0..n {
        x[(r, 0)] = 1.0;
    }
    for (j, col) in design.columns.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            x[(r, j + 1)] = v;
        }
    }
    let y = DVector::from_column_slice(&design.response);

    let qr = x.clone().qr();
    let r = qr.r();
    // Rank check on the R diagonal.
    let max_diag = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let tol = max_diag * 1e-10 * (n.max(k) as f64);
    let deficient: Vec<String> = (0..k)
        .filter(|&i| r[(i, i)].abs() <= tol)
        .map(|i| {
            if i == 0 {
                "(Intercept)".to_string()
            } else {
                design.names[i - 1].clone()
            }
        })
        .collect();
    if !deficient.is_empty() {
        return Err(Error::RankDeficient { columns: deficient });
    }

    let qty = qr.q().transpose() * &y;
    let beta = r
        .clone()
        .solve_upper_triangular(&qty.rows(0, k).into_owned())
        .ok_or_else(|| Error::RankDeficient {
            columns: vec!["(unknown)".to_string()],
        })?;

    let residuals = &y - &x * &beta;
    let rss: f64 = residuals.iter().map(|v| v * v).sum();
    let df = n - k;
    let sigma2 = rss / df as f64;

    // (XᵀX)⁻¹ = R⁻¹ R⁻ᵀ; diagonal from the rows of R⁻¹.
    let r_inv = r
        .rows(0, k)
        .into_owned()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient {
            columns: vec!["(unknown)".to_string()],
        })?;
    let zero_rss = rss <= 0.0 || rss < 1e-300;
    let mut coefficients = Vec::with_capacity(k);
    for i in 0..k {
        let xtx_inv_ii: f64 = (0..k).map(|j| r_inv[(i, j)] * r_inv[(i, j)]).sum();
        let se = (sigma2 * xtx_inv_ii).sqrt();
        let est = beta[i];
        let t = if se > 0.0 {
            est / se
        } else if est == 0.0 {
            0.0
        } else {
            f64::INFINITY * est.signum()
        };
        let p = student_t_two_sided_p(t, df as f64);
        coefficients.push(Coefficient {
            name: if i == 0 {
                "(Intercept)".to_string()
            } else {
                design.names[i - 1].clone()
            },
            estimate: est,
            std_error: se,
            t_value: t,
            p_value: p,
        });
    }

    Ok(FitResult {
        coefficients,
        rss,
        df_resid: df,
        aic: aic(n, rss, k),
        zero_rss,
        n,
        predictor_names: design.names.clone(),
        response_name: design.response_name.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepDirection {
    Backward,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub enum StepMove {
    Drop(String),
    Add(String),
    Stop,
}

/// One stepwise iteration: every candidate move with its AIC, plus the move
/// taken.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub current_predictors: Vec<String>,
    pub current_aic: f64,
    pub candidates: Vec<(StepMove, f64)>,
    pub chosen: StepMove,
}

/// Greedy AIC descent over single-term deletions (and re-additions for
/// [`StepDirection::Both`]). The intercept is never dropped. Returns the
/// final fit and the full selection trace.
pub fn stepwise_select(
    design: &DesignMatrix,
    direction: StepDirection,
) -> Result<(FitResult, Vec<StepRecord>)> {
    let all: Vec<String> = design.names.clone();
    let mut current: Vec<String> = all.clone();
    let mut current_fit = ols_fit(design)?;
    let mut trace = Vec::new();

    loop {
        let mut candidates: Vec<(StepMove, f64)> = Vec::new();
        for name in &current {
            let keep: Vec<String> = current.iter().filter(|n| *n != name).cloned().collect();
            let fit = ols_fit(&design.subset(&keep)?)?;
            candidates.push((StepMove::Drop(name.clone()), fit.aic));
        }
        if direction == StepDirection::Both {
            for name in &all {
                if current.contains(name) {
                    continue;
                }
                let mut keep = current.clone();
                keep.push(name.clone());
                // Preserve design column order.
                let keep: Vec<String> =
                    all.iter().filter(|n| keep.contains(n)).cloned().collect();
                let fit = ols_fit(&design.subset(&keep)?)?;
                candidates.push((StepMove::Add(name.clone()), fit.aic));
            }
        }

        // Best move: largest AIC decrease; ties (within 1e-9) resolved by the
        // predictor latest in column order, for determinism.
        let column_rank = |mv: &StepMove| -> usize {
            let name = match mv {
                StepMove::Drop(n) | StepMove::Add(n) => n,
                StepMove::Stop => return usize::MAX,
            };
            all.iter().position(|n| n == name).unwrap_or(usize::MAX)
        };
        let mut best: Option<usize> = None;
        for (i, (mv, a)) in candidates.iter().enumerate() {
            match best {
                None => best = Some(i),
                Some(b) => {
                    let (bmv, ba) = &candidates[b];
                    if *a < ba - 1e-9 || ((a - ba).abs() <= 1e-9 && column_rank(mv) > column_rank(bmv))
                    {
                        best = Some(i);
                    }
                }
            }
        }

        let (chosen, improved) = match best {
            Some(i) if candidates[i].1 < current_fit.aic - 1e-12 => {
                (candidates[i].0.clone(), true)
            }
            _ => (StepMove::Stop, false),
        };
        trace.push(StepRecord {
            current_predictors: current.clone(),
            current_aic: current_fit.aic,
            candidates: candidates.clone(),
            chosen: chosen.clone(),
        });
        if !improved {
            break;
        }
        match chosen {
            StepMove::Drop(name) => current.retain(|n| *n != name),
            StepMove::Add(name) => {
                current.push(name);
                current = all.iter().filter(|n| current.contains(n)).cloned().collect();
            }
            StepMove::Stop => unreachable!(),
        }
        current_fit = ols_fit(&design.subset(&current)?)?;
    }
    Ok((current_fit, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn design(
        names: &[&str],
        cols: Vec<Vec<f64>>,
        y: Vec<f64>,
    ) -> DesignMatrix {
        DesignMatrix::new(
            names.iter().map(|s| s.to_string()).collect(),
            cols,
            y,
            "y",
        )
        .unwrap()
    }

    #[test]
    fn exact_line_perfect_fit() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v).collect();
        let fit = ols_fit(&design(&["x"], vec![x], y)).unwrap();
        assert_abs_diff_eq!(fit.coefficients[0].estimate, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coefficients[1].estimate, 2.0, epsilon = 1e-10);
        assert!(fit.rss <= 1e-18);
        assert!(fit.zero_rss || fit.rss < 1e-18);
    }

    #[test]
    fn three_point_hand_solved() {
        // (0,0), (1,1), (2,3): normal equations give β = (−1/6, 3/2).
        let fit = ols_fit(&design(
            &["x"],
            vec![vec![0.0, 1.0, 2.0]],
            vec![0.0, 1.0, 3.0],
        ))
        .unwrap();
        assert_abs_diff_eq!(fit.coefficients[0].estimate, -1.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.coefficients[1].estimate, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn residual_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 0.5 + cols[0][i] - 2.0 * cols[2][i] + rng.gen_range(-0.3..0.3))
            .collect();
        let d = design(&["a", "b", "c"], cols.clone(), y.clone());
        let fit = ols_fit(&d).unwrap();
        let fitted: Vec<f64> = (0..n)
            .map(|i| {
                fit.coefficients[0].estimate
                    + fit.coefficients[1].estimate * cols[0][i]
                    + fit.coefficients[2].estimate * cols[1][i]
                    + fit.coefficients[3].estimate * cols[2][i]
            })
            .collect();
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        for col in std::iter::once(&vec![1.0; n]).chain(cols.iter()) {
            let dot: f64 = (0..n).map(|i| col[i] * (y[i] - fitted[i])).sum();
            assert!(dot.abs() <= 1e-8 * y_norm, "Xᵀ(y − ŷ) = {dot}");
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 50;
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 2.0 * a[i] - b[i] + rng.gen_range(-0.1..0.1))
            .collect();
        let base = ols_fit(&design(&["a", "b"], vec![a.clone(), b.clone()], y.clone())).unwrap();
        let c = 7.5;
        let scaled_col: Vec<f64> = a.iter().map(|v| c * v).collect();
        let scaled = ols_fit(&design(&["a", "b"], vec![scaled_col, b], y)).unwrap();
        assert_abs_diff_eq!(
            scaled.coefficients[1].estimate,
            base.coefficients[1].estimate / c,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            scaled.coefficients[1].std_error,
            base.coefficients[1].std_error / c,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            scaled.coefficients[1].t_value,
            base.coefficients[1].t_value,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            scaled.coefficients[1].p_value,
            base.coefficients[1].p_value,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(scaled.aic, base.aic, epsilon = 1e-9);
    }

    #[test]
    fn aic_plug_in() {
        assert_abs_diff_eq!(aic(100, 100.0, 3), 6.0, epsilon = 1e-12);
        assert_eq!(aic(10, 0.0, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn rank_deficiency_names_columns() {
        // b is a near-exact linear combination via a shared column copy with
        // jitter-free duplication hidden from the exact pairwise check:
        // a + b duplicates the span of (a, b, sum).
        let n = 12;
        let a: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| (i * i) as f64).collect();
        let sum: Vec<f64> = (0..n).map(|i| a[i] + b[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 + 1.0).collect();
        let d = design(&["a", "b", "sum"], vec![a, b, sum], y);
        match ols_fit(&d) {
            Err(Error::RankDeficient { columns }) => assert!(!columns.is_empty()),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn constant_and_collinear_columns_rejected() {
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert!(DesignMatrix::new(
            vec!["c".into()],
            vec![vec![2.0; 6]],
            y.clone(),
            "y"
        )
        .is_err());
        let a = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let double: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        assert!(DesignMatrix::new(
            vec!["a".into(), "a2".into()],
            vec![a, double],
            y,
            "y"
        )
        .is_err());
    }

    #[test]
    fn stepwise_single_strong_predictor_retained() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v + rng.gen_range(-0.05..0.05)).collect();
        let d = design(&["x"], vec![x], y);
        let (fit, trace) = stepwise_select(&d, StepDirection::Backward).unwrap();
        assert_eq!(fit.predictor_names, vec!["x".to_string()]);
        assert_eq!(trace.len(), 1);
        assert!(matches!(trace[0].chosen, StepMove::Stop));
    }

    #[test]
    fn stepwise_never_increases_aic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200;
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        // Pure-noise response.
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let names: Vec<&str> = vec!["p1", "p2", "p3", "p4", "p5", "p6"];
        let d = design(&names, cols, y);
        let full = ols_fit(&d).unwrap();
        let (fit, trace) = stepwise_select(&d, StepDirection::Backward).unwrap();
        assert!(fit.aic <= full.aic + 1e-12);
        let mut prev = f64::INFINITY;
        for rec in &trace {
            assert!(rec.current_aic <= prev + 1e-9);
            prev = rec.current_aic;
        }
    }

    /// Exhaustive best-subset oracle over all 2^k predictor subsets.
    fn exhaustive_best(d: &DesignMatrix) -> (f64, Vec<String>) {
        let names = d.predictor_names().to_vec();
        let k = names.len();
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 0..(1u32 << k) {
            let keep: Vec<String> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| names[i].clone())
                .collect();
            let fit = ols_fit(&d.subset(&keep).unwrap()).unwrap();
            if fit.aic < best.0 {
                best = (fit.aic, keep);
            }
        }
        best
    }

    #[test]
    fn stepwise_matches_exhaustive_on_planted_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 120;
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        // True model uses predictors 1 and 4 with small noise.
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * cols[0][i] - 1.5 * cols[3][i] + rng.gen_range(-0.05..0.05))
            .collect();
        let names: Vec<&str> = vec!["p1", "p2", "p3", "p4", "p5", "p6"];
        let d = design(&names, cols, y);
        let (fit, _) = stepwise_select(&d, StepDirection::Both).unwrap();
        let (oracle_aic, oracle_set) = exhaustive_best(&d);
        assert_abs_diff_eq!(fit.aic, oracle_aic, epsilon = 1e-9);
        assert_eq!(fit.predictor_names, oracle_set);
        // The planted predictors always survive selection.
        for name in ["p1", "p4"] {
            assert!(fit.predictor_names.iter().any(|n| n == name));
        }
    }

    #[test]
    fn predict_consistency_with_fitted_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 30;
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = a.iter().map(|v| 0.3 - 0.8 * v + rng.gen_range(-0.1..0.1)).collect();
        let d = design(&["a"], vec![a.clone()], y);
        let fit = ols_fit(&d).unwrap();
        for &av in &a {
            let pred = fit
                .predict(&|name| if name == "a" { Some(av) } else { None })
                .unwrap();
            let manual = fit.coefficients[0].estimate + fit.coefficients[1].estimate * av;
            assert_abs_diff_eq!(pred, manual, epsilon = 1e-12);
        }
    }
}
