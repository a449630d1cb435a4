//! Small dense linear programs: a two-phase tableau simplex with Bland's rule.
//!
//! Problems here are tiny (tens of variables, at most a few hundred rows),
//! so a dense tableau is both the simplest and the fastest choice. Every
//! solve is deterministic: identical problems give bit-identical answers.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarBound {
    #[default]
    Free,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// Minimize `objective · x` subject to the constraints and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl LpProblem {
    /// A problem with `num_vars` free variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            constraints: Vec::new(),
            bounds: vec![VarBound::Free; num_vars],
        }
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Self {
        self.objective = objective;
        self
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        let check_len = |got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(Error::Dimension { expected: n, got })
            }
        };
        check_len(self.objective.len())?;
        check_len(self.bounds.len())?;
        for c in &self.constraints {
            check_len(c.coeffs.len())?;
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid("non-finite constraint entry".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite objective entry".into()));
        }
        Ok(())
    }

    /// Largest constraint violation of `x`, scaled by `1 + |rhs|`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match c.relation {
                Relation::Ge => c.rhs - lhs,
                Relation::Le => lhs - c.rhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v / (1.0 + c.rhs.abs()));
        }
        for (b, &v) in self.bounds.iter().zip(x) {
            if *b == VarBound::NonNegative {
                worst = worst.max(-v);
            }
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Feasibility tolerance on constraint residuals and the phase-1 objective.
    pub feas_tol: f64,
    /// Smallest magnitude accepted as a pivot element.
    pub pivot_tol: f64,
    /// Hard cap on simplex pivots across both phases.
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            pivot_tol: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal solution; empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

/// Anything that can solve an [`LpProblem`].
pub trait LpBackend: Sync {
    fn solve(&self, problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution>;
}

/// The bundled dense two-phase simplex.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSimplex;

impl LpBackend for DenseSimplex {
    fn solve(&self, problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
        solve(problem, opts)
    }
}

/// Solves `problem` with the dense simplex.
pub fn solve(problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution> {
    problem.validate()?;
    let sf = StandardForm::build(problem);
    let mut t = Tableau::new(&sf);
    let mut iterations = 0;

    if sf.num_artificial > 0 {
        t.set_phase1_objective(&sf);
        match t.run(sf.total_cols(), opts, &mut iterations)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => return Err(Error::Numerical("phase 1 reported unbounded".into())),
        }
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if -t.objective_rhs() > opts.feas_tol * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective_value: f64::NAN,
                iterations,
            });
        }
        t.drive_out_artificials(&sf, opts);
    }

    t.set_phase2_objective(&sf);
    match t.run(sf.first_artificial, opts, &mut iterations)? {
        Outcome::Optimal => {}
        Outcome::Unbounded => {
            return Ok(LpSolution {
                status: LpStatus::Unbounded,
                x: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                iterations,
            })
        }
    }

    let values = t.polished_basic_values(&sf);
    let x = sf.recover(&values);
    let violation = problem.max_violation(&x);
    if violation > opts.feas_tol {
        return Err(Error::Certification {
            detail: format!("simplex solution violates a constraint by {violation:e}"),
            feas_tol: opts.feas_tol,
            tol: violation,
        });
    }
    let objective_value = problem.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective_value,
        iterations,
    })
}

/// Result of [`l1_minimize`].
#[derive(Debug, Clone, PartialEq)]
pub enum L1Outcome {
    Optimal { u: Vec<f64>, norm: f64 },
    Infeasible,
}

impl L1Outcome {
    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            L1Outcome::Optimal { u, .. } => Some(u),
            L1Outcome::Infeasible => None,
        }
    }
}

/// `min ‖u‖₁` subject to `row · u ≥ rhs` for every row.
pub fn l1_minimize(rows: &[Vec<f64>], rhs: &[f64], opts: &SolverOptions) -> Result<L1Outcome> {
    l1_minimize_with(&DenseSimplex, rows, rhs, opts)
}

/// [`l1_minimize`] on an arbitrary backend.
///
/// Each coordinate is split as `u = u⁺ - u⁻` with `u⁺, u⁻ ≥ 0`.
pub fn l1_minimize_with(
    backend: &dyn LpBackend,
    rows: &[Vec<f64>],
    rhs: &[f64],
    opts: &SolverOptions,
) -> Result<L1Outcome> {
    let p = row_width(rows, rhs)?;
    let mut lp = LpProblem::new(2 * p).with_objective(vec![1.0; 2 * p]);
    lp.bounds = vec![VarBound::NonNegative; 2 * p];
    for (row, &b) in rows.iter().zip(rhs) {
        let mut coeffs = row.clone();
        coeffs.extend(row.iter().map(|v| -v));
        lp.add(coeffs, Relation::Ge, b);
    }
    let sol = backend.solve(&lp, opts)?;
    match sol.status {
        LpStatus::Infeasible => Ok(L1Outcome::Infeasible),
        LpStatus::Unbounded => Err(Error::Numerical("L1 objective reported unbounded".into())),
        LpStatus::Optimal => {
            let u: Vec<f64> = (0..p).map(|i| sol.x[i] - sol.x[p + i]).collect();
            let norm = u.iter().map(|v| v.abs()).sum();
            Ok(L1Outcome::Optimal { u, norm })
        }
    }
}

/// Any `u` with `row · u ≥ rhs` for every row, or `None` if there is none.
///
/// Runs phase 1 only (zero objective), which is all a yes/no question needs.
pub fn find_feasible(rows: &[Vec<f64>], rhs: &[f64], opts: &SolverOptions) -> Result<Option<Vec<f64>>> {
    let p = row_width(rows, rhs)?;
    let mut lp = LpProblem::new(p);
    for (row, &b) in rows.iter().zip(rhs) {
        lp.add(row.clone(), Relation::Ge, b);
    }
    let sol = solve(&lp, opts)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.x),
        _ => None,
    })
}

fn row_width(rows: &[Vec<f64>], rhs: &[f64]) -> Result<usize> {
    if rows.len() != rhs.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            got: rhs.len(),
        });
    }
    let p = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::Dimension {
            expected: p,
            got: bad.len(),
        });
    }
    Ok(p)
}

/// `A z = b`, `z ≥ 0`, `b ≥ 0`, with columns ordered
/// `[structural | slack | artificial]`.
struct StandardForm {
    rows: usize,
    /// Dense `rows × first_artificial` matrix, row-major (artificials are implicit identity columns).
    a: Vec<f64>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    /// For each original variable: (positive column, optional negative column).
    var_cols: Vec<(usize, Option<usize>)>,
    first_artificial: usize,
    num_artificial: usize,
    /// Initial basis column for each row.
    initial_basis: Vec<usize>,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let mut var_cols = Vec::with_capacity(p.num_vars);
        let mut next = 0;
        for b in &p.bounds {
            match b {
                VarBound::NonNegative => {
                    var_cols.push((next, None));
                    next += 1;
                }
                VarBound::Free => {
                    var_cols.push((next, Some(next + 1)));
                    next += 2;
                }
            }
        }
        let structural = next;
        // Normalize signs so every rhs is non-negative.
        let normalized: Vec<(f64, Relation, f64)> = p
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let rel = match c.relation {
                        Relation::Ge => Relation::Le,
                        Relation::Le => Relation::Ge,
                        Relation::Eq => Relation::Eq,
                    };
                    (-1.0, rel, -c.rhs)
                } else {
                    (1.0, c.relation, c.rhs)
                }
            })
            .collect();
        let num_slack = normalized.iter().filter(|c| c.1 != Relation::Eq).count();
        let num_artificial = normalized.iter().filter(|c| c.1 != Relation::Le).count();
        let first_artificial = structural + num_slack;
        let rows = p.constraints.len();
        let mut a = vec![0.0; rows * first_artificial];
        let mut rhs = Vec::with_capacity(rows);
        let mut initial_basis = Vec::with_capacity(rows);
        let (mut slack, mut art) = (structural, first_artificial);
        for (r, (c, &(sign, rel, b))) in p.constraints.iter().zip(&normalized).enumerate() {
            let row = &mut a[r * first_artificial..(r + 1) * first_artificial];
            for (j, &v) in c.coeffs.iter().enumerate() {
                let (pos, neg) = var_cols[j];
                row[pos] = sign * v;
                if let Some(neg) = neg {
                    row[neg] = -sign * v;
                }
            }
            rhs.push(b);
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    initial_basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    initial_basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    initial_basis.push(art);
                    art += 1;
                }
            }
        }
        let mut cost = vec![0.0; first_artificial];
        for (j, &c) in p.objective.iter().enumerate() {
            let (pos, neg) = var_cols[j];
            cost[pos] = c;
            if let Some(neg) = neg {
                cost[neg] = -c;
            }
        }
        Self {
            rows,
            a,
            rhs,
            cost,
            var_cols,
            first_artificial,
            num_artificial,
            initial_basis,
        }
    }

    fn total_cols(&self) -> usize {
        self.first_artificial + self.num_artificial
    }

    /// Column `j` of the full standard-form matrix, entry at row `r`.
    fn entry(&self, r: usize, j: usize) -> f64 {
        if j < self.first_artificial {
            self.a[r * self.first_artificial + j]
        } else if self.initial_basis[r] == j {
            1.0
        } else {
            0.0
        }
    }

    fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.var_cols
            .iter()
            .map(|&(pos, neg)| z[pos] - neg.map_or(0.0, |c| z[c]))
            .collect()
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    /// Columns plus the rhs column.
    width: usize,
    /// `(rows + 1) × width`; the last row holds reduced costs and `-z`.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(sf: &StandardForm) -> Self {
        let cols = sf.total_cols();
        let width = cols + 1;
        let mut t = vec![0.0; (sf.rows + 1) * width];
        for r in 0..sf.rows {
            let row = &mut t[r * width..(r + 1) * width];
            row[..sf.first_artificial]
                .copy_from_slice(&sf.a[r * sf.first_artificial..(r + 1) * sf.first_artificial]);
            if sf.initial_basis[r] >= sf.first_artificial {
                row[sf.initial_basis[r]] = 1.0;
            }
            row[cols] = sf.rhs[r];
        }
        Self {
            rows: sf.rows,
            width,
            t,
            basis: sf.initial_basis.clone(),
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn objective_rhs(&self) -> f64 {
        self.at(self.rows, self.rhs_col())
    }

    fn set_phase1_objective(&mut self, sf: &StandardForm) {
        let w = self.width;
        let obj = self.rows * w;
        self.t[obj..obj + w].fill(0.0);
        for r in 0..self.rows {
            if self.basis[r] >= sf.first_artificial {
                for c in 0..w {
                    if c < sf.first_artificial || c == w - 1 {
                        self.t[obj + c] -= self.t[r * w + c];
                    }
                }
            }
        }
    }

    fn set_phase2_objective(&mut self, sf: &StandardForm) {
        let w = self.width;
        let obj = self.rows * w;
        self.t[obj..obj + w].fill(0.0);
        self.t[obj..obj + sf.first_artificial].copy_from_slice(&sf.cost);
        for r in 0..self.rows {
            let cb = sf.cost.get(self.basis[r]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for c in 0..w {
                    self.t[obj + c] -= cb * self.t[r * w + c];
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        for c in 0..w {
            self.t[pr * w + c] *= inv;
        }
        self.t[pr * w + pc] = 1.0;
        let (before, rest) = self.t.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        }
        for r in 0..self.rows {
            let b = &mut self.t[r * w + w - 1];
            if *b < 0.0 && *b > -1e-12 {
                *b = 0.0;
            }
        }
        self.basis[pr] = pc;
    }

    /// Simplex iterations with Bland's rule over columns `< allowed`.
    fn run(&mut self, allowed: usize, opts: &SolverOptions, iterations: &mut usize) -> Result<Outcome> {
        let rhs = self.rhs_col();
        loop {
            let obj = self.rows;
            let Some(pc) = (0..allowed).find(|&c| self.at(obj, c) < -opts.feas_tol) else {
                return Ok(Outcome::Optimal);
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > opts.pivot_tol {
                    let ratio = self.at(r, rhs).max(0.0) / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                            if tie {
                                self.basis[r] < bb
                            } else {
                                ratio < br
                            }
                        }
                    };
                    if better {
                        best = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            let Some((_, pr, _)) = best else {
                return Ok(Outcome::Unbounded);
            };
            if *iterations >= opts.max_iterations {
                return Err(Error::IterationLimit(opts.max_iterations));
            }
            *iterations += 1;
            self.pivot(pr, pc);
        }
    }

    /// Pivots zero-valued artificials out of the basis where possible.
    /// Rows where that is impossible are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self, sf: &StandardForm, opts: &SolverOptions) {
        for r in 0..self.rows {
            if self.basis[r] < sf.first_artificial {
                continue;
            }
            let mut pick: Option<(usize, f64)> = None;
            for c in 0..sf.first_artificial {
                let a = self.at(r, c).abs();
                if a > opts.pivot_tol && pick.is_none_or(|(_, b)| a > b) {
                    pick = Some((c, a));
                }
            }
            if let Some((c, _)) = pick {
                self.pivot(r, c);
            }
        }
    }

    /// Basic variable values recomputed from the original data by solving
    /// `B z_B = b` with partial pivoting, which removes drift accumulated
    /// over many tableau updates. Falls back to the tableau values if `B`
    /// is numerically singular.
    fn polished_basic_values(&self, sf: &StandardForm) -> Vec<f64> {
        let mut z = vec![0.0; sf.total_cols()];
        let k = self.rows;
        let mut m: Vec<f64> = Vec::with_capacity(k * (k + 1));
        for r in 0..k {
            for &col in &self.basis {
                m.push(sf.entry(r, col));
            }
            m.push(sf.rhs[r]);
        }
        match gauss_solve(&mut m, k) {
            Some(sol) => {
                for (&col, v) in self.basis.iter().zip(sol) {
                    z[col] = v;
                }
            }
            None => {
                for (r, &col) in self.basis.iter().enumerate() {
                    z[col] = self.at(r, self.rhs_col());
                }
            }
        }
        z
    }
}

/// Solves the `k × k` system stored as an augmented row-major `k × (k+1)` matrix.
fn gauss_solve(m: &mut [f64], k: usize) -> Option<Vec<f64>> {
    let w = k + 1;
    for col in 0..k {
        let piv = (col..k).max_by(|&a, &b| m[a * w + col].abs().total_cmp(&m[b * w + col].abs()))?;
        if m[piv * w + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for c in 0..w {
                m.swap(piv * w + c, col * w + c);
            }
        }
        for r in col + 1..k {
            let f = m[r * w + col] / m[col * w + col];
            if f != 0.0 {
                for c in col..w {
                    m[r * w + c] -= f * m[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let mut acc = m[r * w + k];
        for c in r + 1..k {
            acc -= m[r * w + c] * x[c];
        }
        x[r] = acc / m[r * w + r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn single_lower_bound() {
        let mut lp = LpProblem::new(1).with_objective(vec![1.0]);
        lp.add(vec![1.0], Relation::Ge, 3.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LpProblem::new(1);
        lp.add(vec![1.0], Relation::Ge, 1.0);
        lp.add(vec![-1.0], Relation::Ge, 0.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_objective() {
        let mut lp = LpProblem::new(1).with_objective(vec![-1.0]);
        lp.add(vec![1.0], Relation::Ge, 0.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_le_constraints() {
        // max x + y s.t. x + 2y <= 4, x - y = 1, x, y >= 0  ->  x = 2, y = 1
        let mut lp = LpProblem::new(2).with_objective(vec![-1.0, -1.0]);
        lp.bounds = vec![VarBound::NonNegative; 2];
        lp.add(vec![1.0, 2.0], Relation::Le, 4.0);
        lp.add(vec![1.0, -1.0], Relation::Eq, 1.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LpProblem::new(2).with_objective(vec![1.0, 1.0]);
        lp.bounds = vec![VarBound::NonNegative; 2];
        lp.add(vec![1.0, 1.0], Relation::Eq, 2.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 4.0);
        let s = solve(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn l1_single_constraint() {
        match l1_minimize(&[vec![1.0, 0.0]], &[1.0], &opts()).unwrap() {
            L1Outcome::Optimal { u, norm } => {
                assert_eq!(u, vec![1.0, 0.0]);
                assert_eq!(norm, 1.0);
            }
            L1Outcome::Infeasible => panic!("feasible"),
        }
    }

    #[test]
    fn l1_copy_system() {
        // Rows over (h, W) for the identity gate on one spin.
        let rows = vec![vec![2.0, -2.0], vec![-2.0, -2.0]];
        match l1_minimize(&rows, &[1.0, 1.0], &opts()).unwrap() {
            L1Outcome::Optimal { u, norm } => {
                assert!((norm - 0.5).abs() < 1e-12);
                assert!(u[0].abs() < 1e-12 && (u[1] + 0.5).abs() < 1e-12);
            }
            L1Outcome::Infeasible => panic!("feasible"),
        }
    }

    #[test]
    fn iteration_cap_is_an_error() {
        let rows = vec![vec![2.0, -2.0], vec![-2.0, -2.0]];
        let tight = SolverOptions {
            max_iterations: 0,
            ..opts()
        };
        assert!(matches!(
            l1_minimize(&rows, &[1.0, 1.0], &tight),
            Err(Error::IterationLimit(0))
        ));
    }

    #[test]
    fn feasibility_only() {
        let rows = vec![vec![1.0], vec![-1.0]];
        assert!(find_feasible(&rows, &[1.0, 0.0], &opts()).unwrap().is_none());
        let x = find_feasible(&rows, &[1.0, -5.0], &opts()).unwrap().unwrap();
        assert!(x[0] >= 1.0 - 1e-9 && x[0] <= 5.0 + 1e-9);
    }

    #[test]
    fn dimension_errors() {
        assert!(l1_minimize(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 1.0], &opts()).is_err());
        assert!(l1_minimize(&[vec![1.0]], &[1.0, 1.0], &opts()).is_err());
    }

    fn arb_rows() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
        (1usize..=5, 1usize..=8).prop_flat_map(|(p, k)| {
            (
                proptest::collection::vec(proptest::collection::vec(-4i32..=4, p), k),
                proptest::collection::vec(-2i32..=2, k),
            )
                .prop_map(|(rows, rhs)| {
                    (
                        rows.into_iter()
                            .map(|r| r.into_iter().map(f64::from).collect())
                            .collect(),
                        rhs.into_iter().map(f64::from).collect(),
                    )
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn solver_is_deterministic((rows, rhs) in arb_rows()) {
            let a = l1_minimize(&rows, &rhs, &opts()).unwrap();
            let b = l1_minimize(&rows, &rhs, &opts()).unwrap();
            match (a, b) {
                (L1Outcome::Optimal { u: ua, norm: na }, L1Outcome::Optimal { u: ub, norm: nb }) => {
                    prop_assert_eq!(na.to_bits(), nb.to_bits());
                    prop_assert!(ua.iter().zip(&ub).all(|(x, y)| x.to_bits() == y.to_bits()));
                }
                (L1Outcome::Infeasible, L1Outcome::Infeasible) => {}
                _ => prop_assert!(false, "status differs"),
            }
        }

        #[test]
        fn optimum_is_feasible_and_locally_optimal((rows, rhs) in arb_rows()) {
            if let L1Outcome::Optimal { u, norm } = l1_minimize(&rows, &rhs, &opts()).unwrap() {
                let feasible = |v: &[f64], tol: f64| rows.iter().zip(&rhs).all(|(r, &b)| {
                    r.iter().zip(v).map(|(a, x)| a * x).sum::<f64>() >= b - tol
                });
                prop_assert!(feasible(&u, 1e-9));
                let step = 1e-6;
                for i in 0..u.len() {
                    for dir in [-1.0, 1.0] {
                        let mut v = u.clone();
                        v[i] += dir * step;
                        let n: f64 = v.iter().map(|x| x.abs()).sum();
                        if feasible(&v, 1e-12) {
                            prop_assert!(n >= norm - 1e-9, "improving step at {} {}", i, dir);
                        }
                    }
                }
            }
        }

        #[test]
        fn infeasibility_agrees_with_phase_one((rows, rhs) in arb_rows()) {
            let l1 = l1_minimize(&rows, &rhs, &opts()).unwrap();
            let f = find_feasible(&rows, &rhs, &opts()).unwrap();
            prop_assert_eq!(matches!(l1, L1Outcome::Infeasible), f.is_none());
        }
    }
}
