//! Dense two-phase simplex and the compatibility LP over the weight simplex.
//!
//! Programs are small (a handful of rows, at most a few thousand columns),
//! so a dense tableau is adequate. Pivoting uses Dantzig's rule and falls
//! back to Bland's rule after a run of degenerate pivots, which keeps the
//! solver deterministic and cycle-free.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{PerformanceMatrix, PreferenceInfo, WeightVector};

/// Feasibility tolerance for the post-solve audit.
pub const AUDIT_TOL: f64 = 1e-7;
/// `ε*` must exceed this to count as compatible.
pub const COMPATIBILITY_EPS: f64 = 1e-6;

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-10;
const PHASE1_TOL: f64 = 1e-8;
const DEGENERATE_STREAK: usize = 50;

/// `max objective · x` subject to equality rows, `≤` rows and lower bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_constraints: Vec<(Vec<f64>, f64)>,
    pub ineq_constraints: Vec<(Vec<f64>, f64)>,
    /// `None` marks a free variable.
    pub lower_bounds: Vec<Option<f64>>,
}

impl LinearProgram {
    /// A program over `n` non-negative variables.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, lower_bounds: vec![Some(0.0); n], ..Self::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.eq_constraints.push((coeffs, rhs));
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.ineq_constraints.push((coeffs, rhs));
    }

    /// `coeffs · x ≥ rhs`.
    pub fn add_ge(&mut self, coeffs: Vec<f64>, rhs: f64) {
        self.ineq_constraints.push((coeffs.into_iter().map(|c| -c).collect(), -rhs));
    }

    fn check_dims(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower_bounds.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.lower_bounds.len() });
        }
        for (row, _) in self.eq_constraints.iter().chain(&self.ineq_constraints) {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let mut worst = 0.0f64;
        for (r, b) in &self.eq_constraints {
            worst = worst.max((dot(r) - b).abs());
        }
        for (r, b) in &self.ineq_constraints {
            worst = worst.max(dot(r) - b);
        }
        for (xi, lb) in x.iter().zip(&self.lower_bounds) {
            if let Some(l) = lb {
                worst = worst.max(l - xi);
            }
        }
        worst
    }

    /// Human-readable dump, one row per constraint.
    pub fn to_lp_text(&self) -> String {
        let fmt_row = |r: &[f64]| {
            r.iter().map(|c| format!("{c:+.6}")).collect::<Vec<_>>().join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "max: {}", fmt_row(&self.objective));
        for (i, (r, b)) in self.eq_constraints.iter().enumerate() {
            let _ = writeln!(s, "e{}: {} = {b}", i + 1, fmt_row(r));
        }
        for (i, (r, b)) in self.ineq_constraints.iter().enumerate() {
            let _ = writeln!(s, "c{}: {} <= {b}", i + 1, fmt_row(r));
        }
        for (j, lb) in self.lower_bounds.iter().enumerate() {
            match lb {
                Some(l) => {
                    let _ = writeln!(s, "x{} >= {l}", j + 1);
                }
                None => {
                    let _ = writeln!(s, "x{} free", j + 1);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective: Option<f64>,
}

impl LpOutcome {
    fn without_solution(status: LpStatus) -> Self {
        Self { status, solution: None, objective: None }
    }
}

/// How an original variable maps onto standard-form columns.
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`; last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, cost: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        let f = cost[c];
        if f != 0.0 {
            for (x, y) in cost.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Maximizes the objective encoded in `cost` (reduced costs, with the
    /// negated objective value in the last slot) over columns `< allowed`.
    fn optimize(&mut self, cost: &mut [f64], allowed: usize) -> Result<bool> {
        let max_iter = 50_000 + 100 * (self.rows + self.cols);
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_STREAK;
            let entering = if bland {
                (0..allowed).find(|&j| cost[j] > COST_TOL)
            } else {
                let mut best = None;
                let mut best_val = COST_TOL;
                for (j, &cj) in cost.iter().enumerate().take(allowed) {
                    if cj > best_val {
                        best_val = cj;
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aic = self.at(i, c);
                if aic > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aic;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, r)) => {
                            if ratio < r - 1e-12
                                || (ratio <= r + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, r))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c, cost);
        }
        Err(Error::Numerical("simplex iteration limit reached".into()))
    }
}

/// Solves `lp`. Optimal solutions are re-audited against the original
/// constraints; a failed audit is reported as a numerical error.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.check_dims()?;
    let n = lp.num_vars();

    // Standard form: y >= 0.
    let mut maps = Vec::with_capacity(n);
    let mut ny = 0usize;
    for lb in &lp.lower_bounds {
        match lb {
            Some(l) => {
                maps.push(VarMap::Shifted { col: ny, lower: *l });
                ny += 1;
            }
            None => {
                maps.push(VarMap::Split { pos: ny, neg: ny + 1 });
                ny += 2;
            }
        }
    }
    let to_std = |row: &[f64], rhs: f64| -> (Vec<f64>, f64) {
        let mut out = vec![0.0; ny];
        let mut b = rhs;
        for (j, m) in maps.iter().enumerate() {
            match *m {
                VarMap::Shifted { col, lower } => {
                    out[col] = row[j];
                    b -= row[j] * lower;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] = row[j];
                    out[neg] = -row[j];
                }
            }
        }
        (out, b)
    };

    let n_eq = lp.eq_constraints.len();
    let n_le = lp.ineq_constraints.len();
    let rows = n_eq + n_le;
    // Columns: y | slacks (one per <= row) | artificials (one per row needing it).
    let mut std_rows = Vec::with_capacity(rows);
    for (r, b) in &lp.eq_constraints {
        std_rows.push((to_std(r, *b), None));
    }
    for (k, (r, b)) in lp.ineq_constraints.iter().enumerate() {
        std_rows.push((to_std(r, *b), Some(ny + k)));
    }
    let slack_end = ny + n_le;
    let mut needs_art = Vec::with_capacity(rows);
    for ((_, b), slack) in &std_rows {
        needs_art.push(slack.is_none() || *b < 0.0);
    }
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let cols = slack_end + n_art;
    let w = cols + 1;
    let mut t = Tableau { rows, cols, a: vec![0.0; rows * w], basis: vec![0; rows] };
    let mut art = slack_end;
    for (i, ((coeffs, b), slack)) in std_rows.iter().enumerate() {
        let sign = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, c) in coeffs.iter().enumerate() {
            t.a[i * w + j] = sign * c;
        }
        if let Some(s) = slack {
            t.a[i * w + s] = sign;
        }
        t.a[i * w + cols] = sign * b;
        if needs_art[i] {
            t.a[i * w + art] = 1.0;
            t.basis[i] = art;
            art += 1;
        } else {
            t.basis[i] = slack.expect("row without artificial has a slack");
        }
    }

    // Phase 1: maximize -sum(artificials).
    if n_art > 0 {
        let mut cost = vec![0.0; w];
        for i in 0..rows {
            if t.basis[i] >= slack_end {
                for j in 0..w {
                    cost[j] += t.a[i * w + j];
                }
            }
        }
        for c in cost.iter_mut().take(cols).skip(slack_end) {
            *c = 0.0;
        }
        t.optimize(&mut cost, cols)?;
        let infeas: f64 = (0..rows).filter(|&i| t.basis[i] >= slack_end).map(|i| t.rhs(i)).sum();
        if infeas > PHASE1_TOL {
            return Ok(LpOutcome::without_solution(LpStatus::Infeasible));
        }
        // Drive remaining zero-level artificials out of the basis.
        for i in 0..rows {
            if t.basis[i] >= slack_end {
                if let Some(c) = (0..slack_end).find(|&j| t.at(i, j).abs() > 1e-9) {
                    t.pivot(i, c, &mut cost);
                }
            }
        }
    }

    // Phase 2.
    let mut cost = vec![0.0; w];
    for (j, m) in maps.iter().enumerate() {
        match *m {
            VarMap::Shifted { col, .. } => cost[col] = lp.objective[j],
            VarMap::Split { pos, neg } => {
                cost[pos] = lp.objective[j];
                cost[neg] = -lp.objective[j];
            }
        }
    }
    for i in 0..rows {
        let cb = cost[t.basis[i]];
        if cb != 0.0 {
            for j in 0..w {
                cost[j] -= cb * t.a[i * w + j];
            }
        }
    }
    if !t.optimize(&mut cost, slack_end)? {
        return Ok(LpOutcome::without_solution(LpStatus::Unbounded));
    }

    let mut y = vec![0.0; cols];
    for i in 0..rows {
        y[t.basis[i]] = t.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shifted { col, lower } => lower + y[col].max(0.0),
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let violation = lp.max_violation(&x);
    if violation > AUDIT_TOL {
        return Err(Error::Numerical(format!("solution violates constraints by {violation:e}")));
    }
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome { status: LpStatus::Optimal, solution: Some(x), objective: Some(objective) })
}

/// Outcome of the compatibility LP over certain statements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compatibility {
    pub epsilon_star: f64,
    /// The ε-maximizing ("most discriminant") weight vector.
    pub weights: WeightVector,
}

fn diff_row(perf: &PerformanceMatrix, a: usize, b: usize) -> Vec<f64> {
    perf.row(a).iter().zip(perf.row(b)).map(|(x, y)| x - y).collect()
}

/// Builds `max ε` over the weight simplex subject to the certain statements.
/// Variables are `w_1..w_n` followed by the free `ε ≤ 1`.
pub fn compatibility_program(perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> LinearProgram {
    let n = perf.num_criteria();
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::new(obj);
    lp.lower_bounds[n] = None;
    let with_eps = |mut r: Vec<f64>, e: f64| {
        r.push(e);
        r
    };
    for &(a, b) in &prefs.certain_strict {
        // U(a) - U(b) - ε >= 0
        lp.add_ge(with_eps(diff_row(perf, a, b), -1.0), 0.0);
    }
    for &(a, b) in &prefs.certain_indiff {
        lp.add_eq(with_eps(diff_row(perf, a, b), 0.0), 0.0);
    }
    for &((a, b), (c, d)) in &prefs.certain_intensity {
        let ab = diff_row(perf, a, b);
        let cd = diff_row(perf, c, d);
        let both: Vec<f64> = ab.iter().zip(&cd).map(|(x, y)| x - y).collect();
        lp.add_ge(with_eps(both, -1.0), 0.0);
        lp.add_ge(with_eps(cd, -1.0), 0.0);
    }
    lp.add_eq(with_eps(vec![1.0; n], 0.0), 1.0);
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    lp.add_le(cap, 1.0);
    lp
}

/// Solves the compatibility LP. Returns `Error::Incompatible` (carrying the
/// optimal ε, or `-inf` when infeasible) when no weight vector represents
/// the certain statements strictly.
pub fn compatibility_check(perf: &PerformanceMatrix, prefs: &PreferenceInfo) -> Result<Compatibility> {
    prefs.validate(perf.num_alternatives())?;
    let lp = compatibility_program(perf, prefs);
    let out = solve(&lp)?;
    match out.status {
        LpStatus::Optimal => {
            let x = out.solution.expect("optimal outcome has a solution");
            let n = perf.num_criteria();
            let eps = x[n];
            if eps <= COMPATIBILITY_EPS {
                return Err(Error::Incompatible { epsilon_star: eps });
            }
            let weights = WeightVector::from_sampled(x[..n].to_vec());
            Ok(Compatibility { epsilon_star: eps, weights })
        }
        LpStatus::Infeasible => Err(Error::Incompatible { epsilon_star: f64::NEG_INFINITY }),
        LpStatus::Unbounded => Err(Error::Numerical("compatibility LP reported unbounded".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_nondominated_matrix;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_programs() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], 3.0);
        let out = solve(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_relative_eq!(out.solution.unwrap()[0], 3.0);

        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_le(vec![1.0], -1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_le(vec![1.0, 1.0], 1.0);
        assert_relative_eq!(solve(&lp).unwrap().objective.unwrap(), 1.0);
    }

    #[test]
    fn unbounded_and_free_variables() {
        let lp = LinearProgram::new(vec![1.0]);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);

        // max -x with x free, x >= -2 expressed as a row.
        let mut lp = LinearProgram::new(vec![-1.0]);
        lp.lower_bounds[0] = None;
        lp.add_ge(vec![1.0], -2.0);
        let out = solve(&lp).unwrap();
        assert_relative_eq!(out.solution.unwrap()[0], -2.0, epsilon = 1e-12);

        // Shifted lower bound.
        let mut lp = LinearProgram::new(vec![-1.0, -1.0]);
        lp.lower_bounds = vec![Some(1.5), Some(-0.5)];
        let out = solve(&lp).unwrap();
        assert_relative_eq!(out.objective.unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn equality_and_degenerate_rows() {
        // max x + 2y s.t. x + y = 1, x - y <= 0, y <= 1, duplicated row.
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_eq(vec![1.0, 1.0], 1.0);
        lp.add_eq(vec![2.0, 2.0], 2.0);
        lp.add_le(vec![1.0, -1.0], 0.0);
        lp.add_le(vec![0.0, 1.0], 1.0);
        let out = solve(&lp).unwrap();
        let x = out.solution.unwrap();
        assert_relative_eq!(x[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(out.objective.unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn random_programs_agree_with_vertex_enumeration() {
        // 2-variable programs: the optimum is attained at a pairwise
        // intersection of constraint lines (or axes).
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let c = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let mut lp = LinearProgram::new(c.to_vec());
            let mut lines: Vec<([f64; 2], f64)> = vec![([-1.0, 0.0], 0.0), ([0.0, -1.0], 0.0)];
            for _ in 0..4 {
                let a = [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)];
                let b = rng.gen_range(0.5..2.0);
                lp.add_le(a.to_vec(), b);
                lines.push((a, b));
            }
            let mut best = f64::NEG_INFINITY;
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a1, b1) = lines[i];
                    let (a2, b2) = lines[j];
                    let det = a1[0] * a2[1] - a1[1] * a2[0];
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = [(b1 * a2[1] - b2 * a1[1]) / det, (a1[0] * b2 - a2[0] * b1) / det];
                    if lines.iter().all(|(a, b)| a[0] * x[0] + a[1] * x[1] <= b + 1e-9) {
                        best = best.max(c[0] * x[0] + c[1] * x[1]);
                    }
                }
            }
            let out = solve(&lp).unwrap();
            assert_relative_eq!(out.objective.unwrap(), best, epsilon = 1e-9);
            let again = solve(&lp).unwrap();
            assert_eq!(out, again);
        }
    }

    fn two_alternatives() -> PerformanceMatrix {
        PerformanceMatrix::unchecked(
            vec![vec![1.0, 1.0], vec![0.0, 0.0]],
            vec!["a".into(), "b".into()],
            vec!["g1".into(), "g2".into()],
        )
        .unwrap()
    }

    #[test]
    fn compatibility_examples() {
        let perf = two_alternatives();
        let prefs = PreferenceInfo { certain_strict: vec![(0, 1)], ..Default::default() };
        let c = compatibility_check(&perf, &prefs).unwrap();
        assert_relative_eq!(c.epsilon_star, 1.0, epsilon = 1e-12);
        let u = perf.utilities(&c.weights);
        assert_relative_eq!(u[0] - u[1], 1.0, epsilon = 1e-12);

        let prefs = PreferenceInfo { certain_strict: vec![(1, 0)], ..Default::default() };
        assert!(matches!(compatibility_check(&perf, &prefs), Err(Error::Incompatible { .. })));
    }

    #[test]
    fn compatibility_with_intensity_reproduces_statements() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut checked = 0;
        for _ in 0..40 {
            let perf = random_nondominated_matrix(5, 3, &mut rng).unwrap();
            // Orient statements with a hidden weight vector so the instance is compatible.
            let hidden = crate::model::random_simplex_point(3, &mut rng);
            let u = perf.utilities(&hidden);
            let mut order: Vec<usize> = (0..5).collect();
            order.sort_by(|&x, &y| u[y].total_cmp(&u[x]));
            let (a, b, c, d) = (order[0], order[4], order[1], order[2]);
            let prefs = PreferenceInfo {
                certain_strict: vec![(a, b)],
                certain_intensity: vec![((a, b), (c, d))],
                ..Default::default()
            };
            let Ok(res) = compatibility_check(&perf, &prefs) else { continue };
            checked += 1;
            let v = perf.utilities(&res.weights);
            assert!(v[a] - v[b] >= res.epsilon_star - 1e-9);
            assert!(v[a] - v[b] >= v[c] - v[d] + res.epsilon_star - 1e-9);
            assert!(v[c] - v[d] >= res.epsilon_star - 1e-9);
            assert!(res.epsilon_star > 0.0);
        }
        assert!(checked > 20);
    }

    #[test]
    fn lp_text_dump_lists_rows() {
        let mut lp = LinearProgram::new(vec![1.0, 0.0]);
        lp.add_le(vec![1.0, 1.0], 2.0);
        lp.add_eq(vec![1.0, -1.0], 0.0);
        lp.lower_bounds[1] = None;
        let txt = lp.to_lp_text();
        assert!(txt.contains("c1: +1.000000 +1.000000 <= 2"));
        assert!(txt.contains("e1: +1.000000 -1.000000 = 0"));
        assert!(txt.contains("x2 free"));
    }
}
