//! Dense primal-dual interior-point method for [`ConicProblem`]s.
//!
//! Inequalities are turned into equalities with nonnegative slack variables,
//! giving the standard form `min c·x  s.t.  A x = b,  x ∈ K` with `K` a
//! product of a nonnegative orthant and complex Hermitian PSD cones. The
//! method works on the homogeneous self-dual embedding
//!
//! ```text
//!   A x − b τ = 0,   Aᵀy + s − c τ = 0,   b·y − c·x − κ = 0,
//!   x, s ∈ K,  τ, κ ≥ 0
//! ```
//!
//! from the infeasible start `x = s = I`, `y = 0`, `τ = κ = 1`. Search
//! directions use the HKM linearization `ΔX + sym(X ΔS S⁻¹) = R` with a
//! Mehrotra predictor-corrector. The Schur complement is assembled from
//! low-rank factorizations of the constraint matrices, which keeps the
//! rank-one QoS rows and single-entry power rows cheap.

use nalgebra::{DMatrix, DVector};

use super::problem::{BlockKind, BlockValue, Coefficient, ConicProblem, Sense};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, re_inner, real, CMat, CVec};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Residual bound required for an `Optimal` status.
    pub feasibility_tol: f64,
    /// Relative gap bound required for an `Optimal` status.
    pub gap_tol: f64,
    /// Iteration continues until residuals and gap fall below this, or until
    /// progress stalls.
    pub target_tol: f64,
    /// Threshold on the normalized Farkas residual for infeasibility.
    pub infeasibility_tol: f64,
    /// Ruiz equilibration of rows and blocks before solving.
    pub equilibrate: bool,
    /// Multiplier on the identity starting point.
    pub initial_scale: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            step_fraction: 0.99,
            feasibility_tol: 1e-8,
            gap_tol: 1e-6,
            target_tol: 1e-10,
            infeasibility_tol: 1e-8,
            equilibrate: true,
            initial_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// Primal infeasible; `multipliers` hold a Farkas certificate.
    Infeasible,
    /// Dual infeasible; `primal` holds an improving ray.
    Unbounded,
    NumericalFailure,
}

/// Residuals of the returned iterate, measured on the equilibrated data.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: Status,
    pub primal: Vec<BlockValue>,
    pub dual_slack: Vec<BlockValue>,
    /// One multiplier per constraint, signed so that inequality multipliers
    /// are nonnegative at optimality.
    pub multipliers: Vec<f64>,
    /// Constraint slacks at `primal` (see [`ConicProblem::slacks`]).
    pub slacks: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
}

impl ConicSolution {
    /// Lagrange multiplier of constraint `index`. Inequality multipliers are
    /// clamped at zero.
    pub fn extract_duals(&self, index: usize) -> Result<f64> {
        if self.status != Status::Optimal {
            return Err(Error::State(format!("multipliers requested from a {:?} solution", self.status)));
        }
        self.multipliers.get(index).copied().ok_or_else(|| Error::InvalidInput(format!("constraint {index} does not exist")))
    }

    pub fn psd_block(&self, block: usize) -> Option<&CMat> {
        self.primal.get(block).and_then(BlockValue::as_psd)
    }

    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs() / self.primal_objective.abs().max(self.dual_objective.abs()).max(1e-300)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.status {
            Status::NumericalFailure => Err(Error::NumericalFailure {
                iterations: self.iterations,
                primal_residual: self.residuals.primal,
                dual_residual: self.residuals.dual,
                gap: self.residuals.gap,
            }),
            _ => Ok(self),
        }
    }
}

/// Solves `problem`; never returns an uncertified `Optimal`.
pub fn solve(problem: &ConicProblem, options: &SolverOptions) -> Result<ConicSolution> {
    problem.validate()?;
    let mut std = StandardForm::build(problem, options.equilibrate);
    let mut outcome = Ipm { sf: &std, opts: options }.run();
    // The gap test is absolute below unit objective magnitude. When the
    // optimum is tiny in scaled units, lift the objective and solve again.
    for _ in 0..2 {
        if outcome.status != Status::Optimal || !options.equilibrate {
            break;
        }
        let magnitude = std.c.dot(&outcome.x).abs().max(dot(&std.b, &outcome.y).abs()) / outcome.tau;
        if !(magnitude > 0.0 && magnitude < OBJECTIVE_FLOOR) {
            break;
        }
        let mut lifted = std.clone();
        lifted.rescale_objective(1.0 / magnitude);
        let retry = Ipm { sf: &lifted, opts: options }.run();
        if retry.status != Status::Optimal {
            break;
        }
        std = lifted;
        outcome = retry;
    }
    Ok(std.recover(problem, outcome))
}

/// Scaled objective magnitude below which the objective is rescaled.
const OBJECTIVE_FLOOR: f64 = 1e-3;

// ---------------------------------------------------------------------------
// Cone vectors

#[derive(Debug, Clone)]
struct ConeVec {
    lp: Vec<f64>,
    psd: Vec<CMat>,
}

impl ConeVec {
    fn zeros(lp: usize, dims: &[usize]) -> Self {
        Self { lp: vec![0.0; lp], psd: dims.iter().map(|&n| CMat::zeros(n, n)).collect() }
    }

    fn identity(lp: usize, dims: &[usize], scale: f64) -> Self {
        Self { lp: vec![scale; lp], psd: dims.iter().map(|&n| CMat::identity(n, n) * real(scale)).collect() }
    }

    fn dot(&self, other: &Self) -> f64 {
        let lp: f64 = self.lp.iter().zip(&other.lp).map(|(a, b)| a * b).sum();
        lp + self.psd.iter().zip(&other.psd).map(|(a, b)| re_inner(a, b)).sum::<f64>()
    }

    fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `self += alpha * other`
    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.lp.iter_mut().zip(&other.lp) {
            *a += alpha * b;
        }
        for (a, b) in self.psd.iter_mut().zip(&other.psd) {
            a.zip_apply(b, |x, y| *x += y * alpha);
        }
    }

    fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.lp.iter_mut().for_each(|v| *v *= alpha);
        out.psd.iter_mut().for_each(|m| *m *= real(alpha));
        out
    }

    fn lin(alpha: f64, a: &Self, beta: f64, b: &Self) -> Self {
        let mut out = a.scaled(alpha);
        out.axpy(beta, b);
        out
    }
}

// ---------------------------------------------------------------------------
// Standard form with equilibration

#[derive(Debug, Clone, Copy)]
enum Slot {
    Lp(usize),
    Psd(usize),
}

/// Constraint data of one PSD block as `Σₜ wₜ vₜ vₜᴴ` terms tagged by row.
#[derive(Debug, Clone)]
struct PsdRows {
    rows: Vec<usize>,
    weights: Vec<f64>,
    factors: CMat,
}

#[derive(Clone)]
struct StandardForm {
    m: usize,
    lp_dim: usize,
    psd_dims: Vec<usize>,
    lp_cols: Vec<Vec<(usize, f64)>>,
    psd_rows: Vec<PsdRows>,
    b: Vec<f64>,
    c: ConeVec,
    /// Where each user block lives.
    slots: Vec<Slot>,
    row_scale: Vec<f64>,
    lp_scale: Vec<f64>,
    psd_scale: Vec<f64>,
    b_scale: f64,
    c_scale: f64,
}

fn factor_coefficient(coef: &Coefficient, dim: usize) -> Vec<(f64, CVec)> {
    match coef {
        Coefficient::Entries(_) => Vec::new(),
        Coefficient::Diagonal(entries) => entries
            .iter()
            .filter(|(_, v)| *v != 0.0)
            .map(|&(i, v)| {
                let mut e = CVec::zeros(dim);
                e[i] = real(1.0);
                (v, e)
            })
            .collect(),
        Coefficient::LowRank(terms) => terms.iter().filter(|(w, _)| *w != 0.0).cloned().collect(),
        Coefficient::Dense(m) => {
            let (values, vectors) = hermitian_eigen(m);
            let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            values.iter().enumerate().filter(|(_, v)| v.abs() > 1e-15 * scale).map(|(k, &v)| (v, vectors.column(k).into_owned())).collect()
        }
    }
}

/// Frobenius norm of `Σ wₜ vₜ vₜᴴ`.
fn lowrank_fro(weights: &[f64], vecs: &[&CVec]) -> f64 {
    let mut acc = 0.0;
    for (t, vt) in vecs.iter().enumerate() {
        for (u, vu) in vecs.iter().enumerate() {
            acc += weights[t] * weights[u] * vt.dotc(vu).norm_sqr();
        }
    }
    acc.max(0.0).sqrt()
}

impl StandardForm {
    fn build(problem: &ConicProblem, equilibrate: bool) -> Self {
        let m = problem.constraints.len();
        let mut slots = Vec::with_capacity(problem.blocks.len());
        let mut lp_dim = 0;
        let mut psd_dims = Vec::new();
        for block in &problem.blocks {
            match block.kind {
                BlockKind::NonNeg => {
                    slots.push(Slot::Lp(lp_dim));
                    lp_dim += block.dim;
                }
                BlockKind::Psd => {
                    slots.push(Slot::Psd(psd_dims.len()));
                    psd_dims.push(block.dim);
                }
            }
        }
        let mut slack_of_row = vec![None; m];
        for (i, c) in problem.constraints.iter().enumerate() {
            if c.sense != Sense::Eq {
                slack_of_row[i] = Some(lp_dim);
                lp_dim += 1;
            }
        }

        let mut lp_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp_dim];
        let mut psd_terms: Vec<Vec<(usize, f64, CVec)>> = vec![Vec::new(); psd_dims.len()];
        for (i, con) in problem.constraints.iter().enumerate() {
            for term in &con.terms {
                match (slots[term.block], &term.coef) {
                    (Slot::Lp(off), Coefficient::Entries(entries)) => {
                        for &(k, v) in entries {
                            if v != 0.0 {
                                lp_cols[off + k].push((i, v));
                            }
                        }
                    }
                    (Slot::Psd(p), coef) => {
                        for (w, v) in factor_coefficient(coef, psd_dims[p]) {
                            psd_terms[p].push((i, w, v));
                        }
                    }
                    _ => unreachable!("validated"),
                }
            }
            if let Some(s) = slack_of_row[i] {
                let sign = if con.sense == Sense::Ge { -1.0 } else { 1.0 };
                lp_cols[s].push((i, sign));
            }
        }
        // Merge duplicate rows within an LP column.
        for col in &mut lp_cols {
            col.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for &(i, v) in col.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == i => last.1 += v,
                    _ => merged.push((i, v)),
                }
            }
            *col = merged;
        }
        for terms in &mut psd_terms {
            terms.sort_by_key(|t| t.0);
        }

        let mut c = ConeVec::zeros(lp_dim, &psd_dims);
        for term in &problem.objective {
            match slots[term.block] {
                Slot::Lp(off) => {
                    if let Coefficient::Entries(entries) = &term.coef {
                        for &(k, v) in entries {
                            c.lp[off + k] += v;
                        }
                    }
                }
                Slot::Psd(p) => c.psd[p] += term.coef.to_dense(psd_dims[p]),
            }
        }
        let b: Vec<f64> = problem.constraints.iter().map(|c| c.rhs).collect();

        // Ruiz equilibration on (row, column-unit) norms, where a column unit is
        // an LP variable or a whole PSD block.
        let mut row_scale = vec![1.0; m];
        let mut lp_scale = vec![1.0; lp_dim];
        let mut psd_scale = vec![1.0; psd_dims.len()];
        if equilibrate && m > 0 {
            let mut entries: Vec<(usize, Slot, f64)> = Vec::new();
            for (v, col) in lp_cols.iter().enumerate() {
                for &(i, a) in col {
                    entries.push((i, Slot::Lp(v), a.abs()));
                }
            }
            for (p, terms) in psd_terms.iter().enumerate() {
                let mut start = 0;
                while start < terms.len() {
                    let row = terms[start].0;
                    let mut end = start;
                    while end < terms.len() && terms[end].0 == row {
                        end += 1;
                    }
                    let weights: Vec<f64> = terms[start..end].iter().map(|t| t.1).collect();
                    let vecs: Vec<&CVec> = terms[start..end].iter().map(|t| &t.2).collect();
                    let norm = lowrank_fro(&weights, &vecs);
                    if norm > 0.0 {
                        entries.push((row, Slot::Psd(p), norm));
                    }
                    start = end;
                }
            }
            for _ in 0..20 {
                let mut row_max = vec![0.0_f64; m];
                for &(i, slot, a) in &entries {
                    let d = match slot {
                        Slot::Lp(v) => lp_scale[v],
                        Slot::Psd(p) => psd_scale[p],
                    };
                    row_max[i] = row_max[i].max(row_scale[i] * d * a);
                }
                for (r, mx) in row_scale.iter_mut().zip(&row_max) {
                    if *mx > 0.0 {
                        *r /= mx.sqrt();
                    }
                }
                let mut lp_max = vec![0.0_f64; lp_dim];
                let mut psd_max = vec![0.0_f64; psd_dims.len()];
                for &(i, slot, a) in &entries {
                    match slot {
                        Slot::Lp(v) => lp_max[v] = lp_max[v].max(row_scale[i] * lp_scale[v] * a),
                        Slot::Psd(p) => psd_max[p] = psd_max[p].max(row_scale[i] * psd_scale[p] * a),
                    }
                }
                for (d, mx) in lp_scale.iter_mut().zip(&lp_max) {
                    if *mx > 0.0 {
                        *d /= mx.sqrt();
                    }
                }
                for (d, mx) in psd_scale.iter_mut().zip(&psd_max) {
                    if *mx > 0.0 {
                        *d /= mx.sqrt();
                    }
                }
            }
        }

        for (v, col) in lp_cols.iter_mut().enumerate() {
            for e in col.iter_mut() {
                e.1 *= row_scale[e.0] * lp_scale[v];
            }
            c.lp[v] *= lp_scale[v];
        }
        let psd_rows: Vec<PsdRows> = psd_terms
            .into_iter()
            .enumerate()
            .map(|(p, terms)| {
                let n = psd_dims[p];
                let mut factors = CMat::zeros(n, terms.len());
                let mut rows = Vec::with_capacity(terms.len());
                let mut weights = Vec::with_capacity(terms.len());
                for (t, (i, w, v)) in terms.into_iter().enumerate() {
                    factors.set_column(t, &v);
                    rows.push(i);
                    weights.push(w * row_scale[i] * psd_scale[p]);
                }
                PsdRows { rows, weights, factors }
            })
            .collect();
        for (p, cm) in c.psd.iter_mut().enumerate() {
            *cm *= real(psd_scale[p]);
        }
        let mut b: Vec<f64> = b.iter().zip(&row_scale).map(|(v, r)| v * r).collect();

        let b_max = b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let b_scale = if equilibrate && b_max > 0.0 { 1.0 / b_max } else { 1.0 };
        b.iter_mut().for_each(|v| *v *= b_scale);
        let c_max =
            c.lp.iter()
                .map(|v| v.abs())
                .chain(c.psd.iter().map(|m| m.iter().fold(0.0_f64, |a, z| a.max(z.norm()))))
                .fold(0.0_f64, f64::max);
        let c_scale = if equilibrate && c_max > 0.0 { 1.0 / c_max } else { 1.0 };
        let c = c.scaled(c_scale);

        Self { m, lp_dim, psd_dims, lp_cols, psd_rows, b, c, slots, row_scale, lp_scale, psd_scale, b_scale, c_scale }
    }

    fn rescale_objective(&mut self, factor: f64) {
        self.c = self.c.scaled(factor);
        self.c_scale *= factor;
    }

    fn degree(&self) -> f64 {
        (self.lp_dim + self.psd_dims.iter().sum::<usize>()) as f64
    }

    fn apply_a(&self, x: &ConeVec) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (v, col) in self.lp_cols.iter().enumerate() {
            let xv = x.lp[v];
            for &(i, a) in col {
                out[i] += a * xv;
            }
        }
        for (p, blk) in self.psd_rows.iter().enumerate() {
            if blk.rows.is_empty() {
                continue;
            }
            let xv = &x.psd[p] * &blk.factors;
            for t in 0..blk.rows.len() {
                let q = blk.factors.column(t).dotc(&xv.column(t)).re;
                out[blk.rows[t]] += blk.weights[t] * q;
            }
        }
        out
    }

    fn apply_at(&self, y: &[f64]) -> ConeVec {
        let lp = self.lp_cols.iter().map(|col| col.iter().map(|&(i, a)| a * y[i]).sum()).collect();
        let psd = self
            .psd_rows
            .iter()
            .zip(&self.psd_dims)
            .map(|(blk, &n)| {
                if blk.rows.is_empty() {
                    return CMat::zeros(n, n);
                }
                let mut scaled = blk.factors.clone();
                for t in 0..blk.rows.len() {
                    let f = blk.weights[t] * y[blk.rows[t]];
                    scaled.column_mut(t).iter_mut().for_each(|z| *z *= f);
                }
                &scaled * blk.factors.adjoint()
            })
            .collect();
        ConeVec { lp, psd }
    }

    fn recover(&self, problem: &ConicProblem, out: IpmOutcome) -> ConicSolution {
        let IpmOutcome { status, x, s, y, tau, iterations, residuals } = out;
        // Optimal: divide by τ. Certificates: normalize the ray instead.
        let (xdiv, ydiv) = match status {
            Status::Infeasible => {
                let by: f64 = self.b.iter().zip(&y).map(|(a, b)| a * b).sum();
                (1.0, by.abs().max(1e-300))
            }
            Status::Unbounded => {
                let cx = self.c.dot(&x);
                (cx.abs().max(1e-300), 1.0)
            }
            _ => (tau, tau),
        };
        let unscale_x = |slot: Slot, dim: usize| -> BlockValue {
            match slot {
                Slot::Lp(off) => BlockValue::NonNeg(DVector::from_iterator(
                    dim,
                    (0..dim).map(|k| x.lp[off + k] * self.lp_scale[off + k] / (xdiv * self.b_scale)),
                )),
                Slot::Psd(p) => {
                    BlockValue::Psd(crate::linalg::hermitian_part(&(&x.psd[p] * real(self.psd_scale[p] / (xdiv * self.b_scale)))))
                }
            }
        };
        let unscale_s = |slot: Slot, dim: usize| -> BlockValue {
            match slot {
                Slot::Lp(off) => BlockValue::NonNeg(DVector::from_iterator(
                    dim,
                    (0..dim).map(|k| s.lp[off + k] / (self.lp_scale[off + k] * ydiv * self.c_scale)),
                )),
                Slot::Psd(p) => {
                    BlockValue::Psd(crate::linalg::hermitian_part(&(&s.psd[p] * real(1.0 / (self.psd_scale[p] * ydiv * self.c_scale)))))
                }
            }
        };
        let primal: Vec<BlockValue> = self.slots.iter().zip(&problem.blocks).map(|(&slot, blk)| unscale_x(slot, blk.dim)).collect();
        let dual_slack: Vec<BlockValue> = self.slots.iter().zip(&problem.blocks).map(|(&slot, blk)| unscale_s(slot, blk.dim)).collect();
        let y_orig: Vec<f64> = y.iter().zip(&self.row_scale).map(|(v, r)| v * r / (ydiv * self.c_scale)).collect();
        let multipliers: Vec<f64> = problem
            .constraints
            .iter()
            .zip(&y_orig)
            .map(|(c, &v)| match (c.sense, status) {
                (Sense::Ge, Status::Optimal) => v.max(0.0),
                (Sense::Le, Status::Optimal) => (-v).max(0.0),
                (Sense::Le, _) => -v,
                _ => v,
            })
            .collect();
        let slacks = problem.slacks(&primal);
        let primal_objective = problem.objective_value(&primal);
        let dual_objective: f64 = problem.constraints.iter().zip(&y_orig).map(|(c, v)| c.rhs * v).sum();
        ConicSolution { status, primal, dual_slack, multipliers, slacks, primal_objective, dual_objective, iterations, residuals }
    }
}

// ---------------------------------------------------------------------------
// Interior-point iteration

struct IpmOutcome {
    status: Status,
    x: ConeVec,
    s: ConeVec,
    y: Vec<f64>,
    tau: f64,
    iterations: usize,
    residuals: Residuals,
}

struct Ipm<'a> {
    sf: &'a StandardForm,
    opts: &'a SolverOptions,
}

/// Per-iteration factorizations.
struct Scaling {
    lp_ratio: Vec<f64>,
    x_chol: Vec<CMat>,
    s_chol: Vec<CMat>,
    s_inv: Vec<CMat>,
    x: Vec<CMat>,
}

#[derive(Clone)]
struct Direction {
    x: ConeVec,
    s: ConeVec,
    y: Vec<f64>,
    tau: f64,
    kappa: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn lower_cholesky(m: &CMat) -> Option<CMat> {
    m.clone().cholesky().map(|c| c.l())
}

/// Largest `α` with `L Lᴴ + α D ⪰ 0`.
fn psd_step(l: &CMat, d: &CMat) -> f64 {
    let Some(t) = l.solve_lower_triangular(d) else { return 0.0 };
    let Some(g) = l.solve_lower_triangular(&t.adjoint()) else { return 0.0 };
    let lam = hermitian_eigenvalues(&g)[0];
    if lam < 0.0 {
        -1.0 / lam
    } else {
        f64::INFINITY
    }
}

fn sym(m: &CMat) -> CMat {
    (m + m.adjoint()) * real(0.5)
}

struct Rhs {
    r1: Vec<f64>,
    r2: ConeVec,
    r3: f64,
    /// Complementarity right-hand side `R` with `Δx + 𝓗(Δs) = R`.
    rc: ConeVec,
    r5: f64,
}

impl<'a> Ipm<'a> {
    fn hkm(&self, sc: &Scaling, d: &ConeVec) -> ConeVec {
        ConeVec {
            lp: d.lp.iter().zip(&sc.lp_ratio).map(|(a, r)| a * r).collect(),
            psd: d.psd.iter().enumerate().map(|(p, dm)| sym(&(&sc.x[p] * dm * &sc.s_inv[p]))).collect(),
        }
    }

    fn schur(&self, sc: &Scaling) -> DMatrix<f64> {
        let m = self.sf.m;
        let mut mm = DMatrix::<f64>::zeros(m, m);
        for (v, col) in self.sf.lp_cols.iter().enumerate() {
            let r = sc.lp_ratio[v];
            for &(i, a) in col {
                for &(j, b) in col {
                    mm[(i, j)] += r * a * b;
                }
            }
        }
        for (p, blk) in self.sf.psd_rows.iter().enumerate() {
            let t_count = blk.rows.len();
            if t_count == 0 {
                continue;
            }
            let vh = blk.factors.adjoint();
            let pm = &vh * (&sc.x[p] * &blk.factors);
            let qm = &vh * (&sc.s_inv[p] * &blk.factors);
            for t in 0..t_count {
                for u in 0..t_count {
                    let val = (pm[(t, u)] * qm[(t, u)].conj()).re;
                    mm[(blk.rows[t], blk.rows[u])] += blk.weights[t] * blk.weights[u] * val;
                }
            }
        }
        mm
    }

    fn scaling(&self, x: &ConeVec, s: &ConeVec) -> Option<Scaling> {
        let lp_ratio = x.lp.iter().zip(&s.lp).map(|(a, b)| a / b).collect();
        let mut x_chol = Vec::with_capacity(x.psd.len());
        let mut s_chol = Vec::with_capacity(x.psd.len());
        let mut s_inv = Vec::with_capacity(x.psd.len());
        for (xm, sm) in x.psd.iter().zip(&s.psd) {
            x_chol.push(lower_cholesky(xm)?);
            let ch = sm.clone().cholesky()?;
            s_inv.push(sym(&ch.inverse()));
            s_chol.push(ch.l());
        }
        Some(Scaling { lp_ratio, x_chol, s_chol, s_inv, x: x.psd.clone() })
    }

    fn max_step(&self, sc: &Scaling, x: &ConeVec, s: &ConeVec, tau: f64, kappa: f64, d: &Direction) -> f64 {
        let mut alpha = f64::INFINITY;
        for (v, dv) in x.lp.iter().zip(&d.x.lp) {
            if *dv < 0.0 {
                alpha = alpha.min(-v / dv);
            }
        }
        for (v, dv) in s.lp.iter().zip(&d.s.lp) {
            if *dv < 0.0 {
                alpha = alpha.min(-v / dv);
            }
        }
        for p in 0..x.psd.len() {
            alpha = alpha.min(psd_step(&sc.x_chol[p], &d.x.psd[p]));
            alpha = alpha.min(psd_step(&sc.s_chol[p], &d.s.psd[p]));
        }
        if d.tau < 0.0 {
            alpha = alpha.min(-tau / d.tau);
        }
        if d.kappa < 0.0 {
            alpha = alpha.min(-kappa / d.kappa);
        }
        alpha
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        sc: &Scaling,
        chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
        v2: &[f64],
        dx2: &ConeVec,
        tau: f64,
        kappa: f64,
        rhs: Rhs,
    ) -> Direction {
        let sf = self.sf;
        // dx = T1 + 𝓗(Aᵀ dy) − dτ 𝓗(c), with T1 = R − 𝓗(r2)
        let h_r2 = self.hkm(sc, &rhs.r2);
        let t1 = ConeVec::lin(1.0, &rhs.rc, -1.0, &h_r2);
        let at1 = sf.apply_a(&t1);
        let rhs1: Vec<f64> = rhs.r1.iter().zip(&at1).map(|(a, b)| a - b).collect();
        let v1: Vec<f64> = if sf.m > 0 { chol.solve(&DVector::from_vec(rhs1)).iter().copied().collect() } else { Vec::new() };
        let mut dx1 = self.hkm(sc, &sf.apply_at(&v1));
        dx1.axpy(1.0, &t1);

        let num = rhs.r3 + sf.c.dot(&dx1) - dot(&sf.b, &v1) + rhs.r5 / tau;
        let den = -sf.c.dot(dx2) + dot(&sf.b, v2) + kappa / tau;
        let dtau = num / den;

        let dy: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| a + dtau * b).collect();
        let mut dx = dx1;
        dx.axpy(dtau, dx2);
        let mut ds = ConeVec::lin(1.0, &rhs.r2, -1.0, &sf.apply_at(&dy));
        ds.axpy(dtau, &sf.c);
        let dkappa = (rhs.r5 - kappa * dtau) / tau;
        Direction { x: dx, s: ds, y: dy, tau: dtau, kappa: dkappa }
    }

    fn run(&self) -> IpmOutcome {
        let sf = self.sf;
        let opts = self.opts;
        let nu = sf.degree();
        let scale0 = opts.initial_scale;
        let mut x = ConeVec::identity(sf.lp_dim, &sf.psd_dims, scale0);
        let mut s = ConeVec::identity(sf.lp_dim, &sf.psd_dims, scale0);
        let mut y = vec![0.0; sf.m];
        let mut tau = 1.0;
        let mut kappa = 1.0;
        let b_norm = norm(&sf.b);
        let c_norm = sf.c.norm();

        let mut best: Option<(f64, ConeVec, ConeVec, Vec<f64>, f64, Residuals, usize)> = None;
        let mut last = Residuals::default();
        let mut stalls = 0;

        for iter in 0..=opts.max_iterations {
            let ax = sf.apply_a(&x);
            let rp: Vec<f64> = sf.b.iter().zip(&ax).map(|(b, a)| b * tau - a).collect();
            let aty = sf.apply_at(&y);
            let mut rd = sf.c.scaled(tau);
            rd.axpy(-1.0, &aty);
            rd.axpy(-1.0, &s);
            let cx = sf.c.dot(&x);
            let by = dot(&sf.b, &y);
            let rg = cx - by + kappa;
            let mu = (x.dot(&s) + tau * kappa) / (nu + 1.0);

            let pres = norm(&rp) / tau / (1.0 + b_norm);
            let dres = rd.norm() / tau / (1.0 + c_norm);
            let pobj = cx / tau;
            let dobj = by / tau;
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs().min(dobj.abs()));
            let res = Residuals { primal: pres, dual: dres, gap };
            last = res;
            if !(pres.is_finite() && dres.is_finite() && gap.is_finite() && mu.is_finite()) {
                break;
            }

            let merit = (pres / opts.feasibility_tol).max(dres / opts.feasibility_tol).max(gap / opts.gap_tol);
            if merit <= 1.0 && best.as_ref().map_or(true, |b| merit < b.0) {
                best = Some((merit, x.clone(), s.clone(), y.clone(), tau, res, iter));
            }
            if pres <= opts.target_tol && dres <= opts.target_tol && gap <= opts.target_tol {
                return IpmOutcome { status: Status::Optimal, x, s, y, tau, iterations: iter, residuals: res };
            }
            // Farkas certificates.
            if by > 0.0 {
                let mut ray = aty.clone();
                ray.axpy(1.0, &s);
                if ray.norm() / by <= opts.infeasibility_tol && tau / by < 1e-2 {
                    return IpmOutcome { status: Status::Infeasible, x, s, y, tau, iterations: iter, residuals: res };
                }
            }
            if cx < 0.0 {
                if norm(&ax) / (-cx) <= opts.infeasibility_tol && tau / -cx < 1e-2 {
                    return IpmOutcome { status: Status::Unbounded, x, s, y, tau, iterations: iter, residuals: res };
                }
            }
            if iter == opts.max_iterations {
                break;
            }

            let Some(sc) = self.scaling(&x, &s) else { break };
            let mut schur = self.schur(&sc);
            let chol = if sf.m > 0 {
                let mut chol = schur.clone().cholesky();
                let mut reg = 1e-15 * schur.diagonal().max().max(1e-300);
                while chol.is_none() && reg < 1e-2 {
                    for i in 0..sf.m {
                        schur[(i, i)] += reg;
                    }
                    chol = schur.clone().cholesky();
                    reg *= 100.0;
                }
                match chol {
                    Some(c) => c,
                    None => break,
                }
            } else {
                DMatrix::<f64>::identity(1, 1).cholesky().expect("1x1 identity")
            };

            // Terms shared by predictor and corrector.
            let h_c = self.hkm(&sc, &sf.c);
            let ah_c = sf.apply_a(&h_c);
            let rhs2: Vec<f64> = ah_c.iter().zip(&sf.b).map(|(a, b)| a + b).collect();
            let v2: Vec<f64> = if sf.m > 0 { chol.solve(&DVector::from_vec(rhs2)).iter().copied().collect() } else { Vec::new() };
            let mut dx2 = self.hkm(&sc, &sf.apply_at(&v2));
            dx2.axpy(-1.0, &h_c);

            let build_rhs = |eta: f64, sigma: f64, corr: Option<&Direction>| -> Rhs {
                let r1 = rp.iter().map(|v| eta * v).collect();
                let r2 = rd.scaled(eta);
                let r3 = eta * rg;
                let mut rc = ConeVec {
                    lp: x.lp.iter().zip(&s.lp).map(|(xv, sv)| sigma * mu / sv - xv).collect(),
                    psd: x.psd.iter().zip(&sc.s_inv).map(|(xm, si)| si * real(sigma * mu) - xm).collect(),
                };
                let mut r5 = sigma * mu - tau * kappa;
                if let Some(d) = corr {
                    for (k, v) in rc.lp.iter_mut().enumerate() {
                        *v -= d.x.lp[k] * d.s.lp[k] / s.lp[k];
                    }
                    for (p, m) in rc.psd.iter_mut().enumerate() {
                        *m -= sym(&(&d.x.psd[p] * &d.s.psd[p] * &sc.s_inv[p]));
                    }
                    r5 -= d.tau * d.kappa;
                }
                Rhs { r1, r2, r3, rc, r5 }
            };

            let pred = self.direction(&sc, &chol, &v2, &dx2, tau, kappa, build_rhs(1.0, 0.0, None));
            let alpha_aff = self.max_step(&sc, &x, &s, tau, kappa, &pred).min(1.0);
            let mut xa = x.clone();
            xa.axpy(alpha_aff, &pred.x);
            let mut sa = s.clone();
            sa.axpy(alpha_aff, &pred.s);
            let mu_aff = (xa.dot(&sa) + (tau + alpha_aff * pred.tau) * (kappa + alpha_aff * pred.kappa)) / (nu + 1.0);
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let dir = self.direction(&sc, &chol, &v2, &dx2, tau, kappa, build_rhs(1.0 - sigma, sigma, Some(&pred)));
            let alpha_max = self.max_step(&sc, &x, &s, tau, kappa, &dir);
            let alpha = (opts.step_fraction * alpha_max).min(1.0);
            if !alpha.is_finite() || alpha <= 0.0 {
                break;
            }
            x.axpy(alpha, &dir.x);
            s.axpy(alpha, &dir.s);
            for (a, b) in y.iter_mut().zip(&dir.y) {
                *a += alpha * b;
            }
            tau += alpha * dir.tau;
            kappa += alpha * dir.kappa;
            if tau <= 0.0 || kappa <= 0.0 {
                break;
            }
            if alpha < 1e-8 {
                stalls += 1;
                if stalls >= 3 {
                    break;
                }
            } else {
                stalls = 0;
            }
            // Rescale the homogeneous iterate to keep magnitudes moderate.
            let norm_all = (x.dot(&x) + s.dot(&s) + dot(&y, &y) + tau * tau + kappa * kappa).sqrt();
            if norm_all > 1e12 {
                let f = 1.0 / norm_all;
                x = x.scaled(f);
                s = s.scaled(f);
                y.iter_mut().for_each(|v| *v *= f);
                tau *= f;
                kappa *= f;
            }
        }

        match best {
            Some((_, bx, bs, by, btau, res, it)) => {
                IpmOutcome { status: Status::Optimal, x: bx, s: bs, y: by, tau: btau, iterations: it, residuals: res }
            }
            None => IpmOutcome { status: Status::NumericalFailure, x, s, y, tau, iterations: opts.max_iterations, residuals: last },
        }
    }
}
