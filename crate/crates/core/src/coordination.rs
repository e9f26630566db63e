//! Optimal multiflow coordination through the semidefinite relaxation.
//!
//! The master problem minimizes `Σ_j ρ_j Σ_k ‖w_kj‖²` subject to
//! `log2(1 + SINR_k) ≥ γ_k` and the per-transmitter power constraints. With
//! `W_kj = w_kj w_kjᴴ` and the rank constraints dropped it becomes
//!
//! ```text
//! minimize    Σ_j ρ_j Σ_k tr(W_kj)
//! subject to  Σ_j h_kjᴴ [W_kj/γ̃_k − Σ_{i≠k} W_ij] h_kj ≥ σ_k²   (γ_k > 0)
//!             Σ_k tr(Q_jℓ W_kj) ≤ q_jℓ
//!             W_kj ⪰ 0
//! ```
//!
//! whose optimum always admits a rank-one solution. QoS rows are divided by
//! `σ_k²` and power rows by `q_jℓ` before solving, so the solver multiplier
//! of a QoS row is directly the uplink power `λ_k` of the dual network.

use std::fmt::Write as _;

use crate::conic::{solve, Coefficient, ConicProblem, ConicSolution, Sense, SolverOptions, Status, Term};
use crate::error::{invalid, Error, Result};
use crate::evaluation::sinr;
use nalgebra::{DMatrix, DVector};

use crate::linalg::{abs2_dot, hermitian_eigen, hermitian_part, min_eigenvalue, quad_form, real, trace_re, CMat, CVec};
use crate::power::{constraint_slacks, HardwareProfile, Weighting, DEFAULT_ACTIVITY_TOL};
use crate::scenario::{ChannelSet, ScenarioConfig};
use crate::solution::{BeamformingSolution, DEFAULT_SERVING_TOL};

/// Default bound on `λ₂/λ₁` below which a block counts as rank one.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;
/// Default relative tolerance of the uplink SINR identity.
pub const DEFAULT_DUALITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationProblem {
    pub channels: ChannelSet,
    pub hw: HardwareProfile,
    /// Rate targets in bits/s/Hz.
    pub gamma: Vec<f64>,
}

impl CoordinationProblem {
    pub fn new(channels: ChannelSet, hw: HardwareProfile, gamma: Vec<f64>) -> Result<Self> {
        let p = Self { channels, hw, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn num_users(&self) -> usize {
        self.channels.num_users()
    }

    pub fn num_transmitters(&self) -> usize {
        self.hw.num_transmitters()
    }

    /// SINR targets `2^γ − 1`.
    pub fn gtilde(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| g.exp2() - 1.0).collect()
    }

    /// Users that carry a QoS constraint.
    pub fn constrained(&self, k: usize) -> bool {
        self.gamma[k] > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        self.channels.validate()?;
        self.hw.validate()?;
        if self.channels.num_transmitters() != self.hw.num_transmitters() {
            return invalid(format!(
                "channels cover {} transmitters, hardware {}",
                self.channels.num_transmitters(),
                self.hw.num_transmitters()
            ));
        }
        for (k, row) in self.channels.h.iter().enumerate() {
            for (j, h) in row.iter().enumerate() {
                if h.len() != self.hw.antennas[j] {
                    return invalid(format!("channel ({k},{j}) has {} entries for {} antennas", h.len(), self.hw.antennas[j]));
                }
            }
        }
        if self.gamma.len() != self.num_users() {
            return invalid(format!("{} QoS targets for {} users", self.gamma.len(), self.num_users()));
        }
        if self.gamma.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return invalid("QoS targets must be finite and nonnegative");
        }
        Ok(())
    }

    /// Realization `trial` of a scenario with its hardware and targets.
    pub fn from_scenario(config: &ScenarioConfig, trial: u64) -> Result<Self> {
        let channels = crate::scenario::realize(config, trial)?;
        Self::new(channels, config.hardware_profile(), config.qos_per_user())
    }

    /// Copy with only the listed transmitters.
    pub fn restrict(&self, transmitters: &[usize]) -> Self {
        Self { channels: self.channels.restrict(transmitters), hw: self.hw.restrict(transmitters), gamma: self.gamma.clone() }
    }
}

/// The relaxation together with the location of every variable and row.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub conic: ConicProblem,
    /// Block index of `W_kj`.
    pub blocks: Vec<Vec<usize>>,
    pub qos_rows: Vec<Option<usize>>,
    pub power_rows: Vec<Vec<usize>>,
}

pub fn build_relaxation(problem: &CoordinationProblem) -> Result<Relaxation> {
    problem.validate()?;
    let gt = problem.gtilde();
    let (nk, nt) = (problem.num_users(), problem.num_transmitters());
    let hw = &problem.hw;
    let ch = &problem.channels;

    let mut conic = ConicProblem::new();
    let blocks: Vec<Vec<usize>> = (0..nk).map(|_| (0..nt).map(|j| conic.add_psd_block(hw.antennas[j])).collect()).collect();
    for row in &blocks {
        for (j, &b) in row.iter().enumerate() {
            conic.add_objective(b, Coefficient::scaled_identity(hw.antennas[j], hw.rho[j]));
        }
    }

    let mut qos_rows = vec![None; nk];
    for k in 0..nk {
        if !problem.constrained(k) {
            continue;
        }
        if !(gt[k] > 0.0) {
            return invalid(format!("user {k} has a nonpositive SINR target"));
        }
        let s2 = ch.sigma2[k];
        let mut terms = Vec::with_capacity(nk * nt);
        for (i, row) in blocks.iter().enumerate() {
            for (j, &b) in row.iter().enumerate() {
                let weight = if i == k { 1.0 / (gt[k] * s2) } else { -1.0 / s2 };
                terms.push(Term { block: b, coef: Coefficient::outer(weight, ch.h[k][j].clone()) });
            }
        }
        qos_rows[k] = Some(conic.add_constraint(terms, Sense::Ge, 1.0));
    }

    let mut power_rows = Vec::with_capacity(nt);
    for (j, cons) in hw.constraints.iter().enumerate() {
        let mut rows = Vec::with_capacity(cons.len());
        for c in cons {
            let scale = if c.limit > 0.0 { 1.0 / c.limit } else { 1.0 };
            let coef = scale_coefficient(c.weighting.coefficient(), scale);
            let terms = blocks.iter().map(|row| Term { block: row[j], coef: coef.clone() }).collect();
            rows.push(conic.add_constraint(terms, Sense::Le, c.limit * scale));
        }
        power_rows.push(rows);
    }
    Ok(Relaxation { conic, blocks, qos_rows, power_rows })
}

fn scale_coefficient(coef: Coefficient, s: f64) -> Coefficient {
    match coef {
        Coefficient::Entries(e) => Coefficient::Entries(e.into_iter().map(|(i, v)| (i, v * s)).collect()),
        Coefficient::Diagonal(e) => Coefficient::Diagonal(e.into_iter().map(|(i, v)| (i, v * s)).collect()),
        Coefficient::LowRank(t) => Coefficient::LowRank(t.into_iter().map(|(w, v)| (w * s, v)).collect()),
        Coefficient::Dense(m) => Coefficient::Dense(m * real(s)),
    }
}

/// Lagrange multipliers of the relaxation in the units of the original
/// constraints: `λ_k` (scaled by `σ_k²`) and `μ_jℓ` per mW.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate {
    pub lambda: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    /// `max |multiplier · slack| / (1 + |objective|)` on the solved rows.
    pub complementary_slackness: f64,
}

impl DualCertificate {
    /// Diagonal blocks of `A_k`: `h_kj h_kjᴴ / (σ_k² ρ_j)`.
    pub fn a_blocks(problem: &CoordinationProblem, k: usize) -> Vec<CMat> {
        let ch = &problem.channels;
        ch.h[k].iter().zip(&problem.hw.rho).map(|(h, rho)| h * h.adjoint() * real(1.0 / (ch.sigma2[k] * rho))).collect()
    }

    /// Diagonal blocks of `B_k = Σ_{i≠k} λ_i A_i + Σ_jℓ μ_jℓ Q_jℓ/ρ_j + I`.
    pub fn b_blocks(&self, problem: &CoordinationProblem, k: usize) -> Vec<CMat> {
        let hw = &problem.hw;
        (0..problem.num_transmitters())
            .map(|j| {
                let n = hw.antennas[j];
                let mut b = CMat::identity(n, n);
                for (i, &lam) in self.lambda.iter().enumerate() {
                    if i != k && lam != 0.0 {
                        let h = &problem.channels.h[i][j];
                        b.gerc(real(lam / (problem.channels.sigma2[i] * hw.rho[j])), h, h, real(1.0));
                    }
                }
                for (c, &mu) in hw.constraints[j].iter().zip(&self.mu[j]) {
                    if mu != 0.0 {
                        b += c.weighting.to_dense(n) * real(mu / hw.rho[j]);
                    }
                }
                b
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationOptions {
    pub solver: SolverOptions,
    pub rank_tol: f64,
    pub serving_tol: f64,
}

impl Default for CoordinationOptions {
    fn default() -> Self {
        // Tighter than the solver default: small QoS multipliers need the
        // extra digits for the uplink SINR identity.
        let solver = SolverOptions { target_tol: 1e-12, ..SolverOptions::default() };
        Self { solver, rank_tol: DEFAULT_RANK_TOL, serving_tol: DEFAULT_SERVING_TOL }
    }
}

#[derive(Debug, Clone)]
pub struct OptimalSolution {
    pub solution: BeamformingSolution,
    pub certificate: DualCertificate,
    /// Optimal value of the relaxation (dynamic power, mW).
    pub relaxation_objective: f64,
    /// Blocks that needed the replacement problem.
    pub repaired: Vec<(usize, usize)>,
    pub iterations: usize,
}

/// The relaxation, and hence the master problem, has no feasible point.
#[derive(Debug, Clone)]
pub struct Infeasibility {
    /// Farkas multipliers, one per relaxation row.
    pub certificate: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Solved(Box<OptimalSolution>),
    Infeasible(Infeasibility),
}

impl Outcome {
    pub fn solved(&self) -> Option<&OptimalSolution> {
        match self {
            Outcome::Solved(s) => Some(s),
            Outcome::Infeasible(_) => None,
        }
    }

    pub fn into_solved(self) -> Option<OptimalSolution> {
        match self {
            Outcome::Solved(s) => Some(*s),
            Outcome::Infeasible(_) => None,
        }
    }
}

pub fn solve_optimal(problem: &CoordinationProblem) -> Result<Outcome> {
    solve_optimal_with(problem, &CoordinationOptions::default())
}

pub fn solve_optimal_with(problem: &CoordinationProblem, options: &CoordinationOptions) -> Result<Outcome> {
    problem.validate()?;
    let (nk, nt) = (problem.num_users(), problem.num_transmitters());
    if (0..nk).all(|k| !problem.constrained(k)) {
        let solution = BeamformingSolution::zeros(nk, &problem.hw);
        let certificate = DualCertificate {
            lambda: vec![0.0; nk],
            mu: problem.hw.constraints.iter().map(|c| vec![0.0; c.len()]).collect(),
            complementary_slackness: 0.0,
        };
        return Ok(Outcome::Solved(Box::new(OptimalSolution {
            solution,
            certificate,
            relaxation_objective: 0.0,
            repaired: Vec::new(),
            iterations: 0,
        })));
    }

    let relax = build_relaxation(problem)?;
    let sol = solve(&relax.conic, &options.solver)?.into_result()?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(Outcome::Infeasible(Infeasibility { certificate: sol.multipliers, iterations: sol.iterations })),
        Status::Unbounded | Status::NumericalFailure => {
            return Err(Error::NumericalFailure {
                iterations: sol.iterations,
                primal_residual: sol.residuals.primal,
                dual_residual: sol.residuals.dual,
                gap: sol.residuals.gap,
            })
        }
    }

    let certificate = certificate_from(&sol, &relax, problem, nt);
    let mut w: Vec<Vec<CMat>> =
        relax.blocks.iter().map(|row| row.iter().map(|&b| hermitian_part(sol.psd_block(b).expect("PSD block"))).collect()).collect();
    let gt = problem.gtilde();
    for (k, row) in w.iter_mut().enumerate() {
        let total: f64 = row.iter().map(trace_re).sum();
        let mut b_blocks = None;
        for (j, wkj) in row.iter_mut().enumerate() {
            let tr = trace_re(wkj);
            if !problem.constrained(k) || tr <= options.serving_tol * total {
                wkj.fill(real(0.0));
                continue;
            }
            // Interior-point residue: a small block whose reduced cost is
            // clearly positive definite is zero at the exact optimum.
            if tr <= DUST_FRACTION * total {
                let b = b_blocks.get_or_insert_with(|| certificate.b_blocks(problem, k));
                let a = &DualCertificate::a_blocks(problem, k)[j];
                let z = &b[j] - a * real(certificate.lambda[k] / gt[k]);
                if min_eigenvalue(&z) > DUST_MARGIN {
                    wkj.fill(real(0.0));
                }
            }
        }
    }

    let mut repair = repair_rank(&w, problem, options.rank_tol)?;
    if let Some(t) = qos_scaling(&repair.beamformers, problem) {
        for (k, tk) in t.iter().enumerate() {
            let f = real(tk.sqrt());
            repair.beamformers[k].iter_mut().for_each(|v| *v *= f);
            repair.covariances[k].iter_mut().for_each(|m| *m *= real(*tk));
        }
    }
    let mut solution = BeamformingSolution::from_beamformers(repair.beamformers, &problem.hw, options.serving_tol)?;
    solution.covariances = Some(repair.covariances);

    Ok(Outcome::Solved(Box::new(OptimalSolution {
        solution,
        certificate,
        relaxation_objective: sol.primal_objective,
        repaired: repair.repaired,
        iterations: sol.iterations,
    })))
}

/// Largest share of a user's power that may be treated as solver residue.
const DUST_FRACTION: f64 = 1e-2;
/// Smallest eigenvalue of the normalized reduced cost that proves a block
/// inactive.
const DUST_MARGIN: f64 = 1e-4;

/// Per-user power factors `t_k` that meet every QoS target with equality for
/// fixed beam directions, or `None` when the system is singular or a factor
/// comes out nonpositive.
pub(crate) fn qos_scaling(w: &[Vec<CVec>], problem: &CoordinationProblem) -> Option<Vec<f64>> {
    let nk = problem.num_users();
    let gt = problem.gtilde();
    let ch = &problem.channels;
    let mut m = DMatrix::<f64>::zeros(nk, nk);
    let mut rhs = DVector::<f64>::zeros(nk);
    for k in 0..nk {
        // Rows of users without a target keep their factor at one.
        if !problem.constrained(k) || w[k].iter().all(|v| v.norm_squared() == 0.0) {
            m[(k, k)] = 1.0;
            rhs[k] = 1.0;
            continue;
        }
        for (i, row) in w.iter().enumerate() {
            let g: f64 = row.iter().zip(&ch.h[k]).map(|(v, h)| abs2_dot(h, v)).sum();
            m[(k, i)] = if i == k { g } else { -gt[k] * g };
        }
        rhs[k] = gt[k] * ch.sigma2[k];
    }
    let t = m.lu().solve(&rhs)?;
    if t.iter().all(|v| v.is_finite() && *v > 0.0) {
        Some(t.iter().copied().collect())
    } else {
        None
    }
}

fn certificate_from(sol: &ConicSolution, relax: &Relaxation, problem: &CoordinationProblem, nt: usize) -> DualCertificate {
    let lambda = relax.qos_rows.iter().map(|r| r.map_or(0.0, |i| sol.multipliers[i])).collect();
    let mu = (0..nt)
        .map(|j| {
            relax.power_rows[j]
                .iter()
                .zip(&problem.hw.constraints[j])
                .map(|(&r, c)| if c.limit > 0.0 { sol.multipliers[r] / c.limit } else { sol.multipliers[r] })
                .collect()
        })
        .collect();
    let scale = 1.0 + sol.primal_objective.abs();
    let complementary_slackness = sol.multipliers.iter().zip(&sol.slacks).map(|(m, s)| (m * s).abs() / scale).fold(0.0, f64::max);
    DualCertificate { lambda, mu, complementary_slackness }
}

#[derive(Debug, Clone)]
pub struct RankRepair {
    pub covariances: Vec<Vec<CMat>>,
    pub beamformers: Vec<Vec<CVec>>,
    pub repaired: Vec<(usize, usize)>,
}

fn eigen_ratio(w: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(w);
    if vals.len() < 2 || vals[0] <= 0.0 {
        return 0.0;
    }
    vals[1].max(0.0) / vals[0]
}

fn dominant(w: &CMat) -> CVec {
    let (vals, vecs) = hermitian_eigen(w);
    if vals.is_empty() || vals[0] <= 0.0 {
        return CVec::zeros(w.nrows());
    }
    vecs.column(0) * real(vals[0].sqrt())
}

/// Rank-one beamformers from relaxation blocks `w[k][j]`. Blocks with
/// `λ₂/λ₁ > tol` are first replaced by the solution of the replacement
/// problem, then every block is truncated to its dominant eigenpair.
pub fn repair_rank(w: &[Vec<CMat>], problem: &CoordinationProblem, tol: f64) -> Result<RankRepair> {
    let mut cov: Vec<Vec<CMat>> = w.to_vec();
    let mut repaired = Vec::new();
    for k in 0..cov.len() {
        for j in 0..cov[k].len() {
            if trace_re(&cov[k][j]) <= 0.0 || eigen_ratio(&cov[k][j]) <= tol {
                continue;
            }
            let others: Vec<CVec> = (0..cov.len()).filter(|&i| i != k).map(|i| problem.channels.h[i][j].clone()).collect();
            let weightings: Vec<Weighting> = problem.hw.constraints[j].iter().map(|c| c.weighting.clone()).collect();
            cov[k][j] = replacement_block(&cov[k][j], &problem.channels.h[k][j], &others, &weightings)?;
            repaired.push((k, j));
        }
    }
    let beamformers: Vec<Vec<CVec>> = cov.iter().map(|row| row.iter().map(dominant).collect()).collect();
    let covariances = beamformers.iter().map(|row| row.iter().map(|v| v * v.adjoint()).collect()).collect();
    Ok(RankRepair { covariances, beamformers, repaired })
}

/// Maximizes `hᴴVh` over `V ⪰ 0` with `tr V ≤ tr W`, `tr(Q V) ≤ tr(Q W)` for
/// every weighting, and `gᴴVg ≤ gᴴWg` for every `g` in `others`.
pub fn replacement_block(w: &CMat, h: &CVec, others: &[CVec], weightings: &[Weighting]) -> Result<CMat> {
    let n = w.nrows();
    let t = trace_re(w);
    let hn = h.norm();
    if t <= 0.0 || hn == 0.0 {
        return Ok(w.clone());
    }
    // Work with V' = V / tr W and unit-norm channels.
    let mut p = ConicProblem::new();
    let b = p.add_psd_block(n);
    p.add_objective(b, Coefficient::outer(-1.0, h / real(hn)));
    p.add_constraint(vec![Term { block: b, coef: Coefficient::scaled_identity(n, 1.0) }], Sense::Le, 1.0);
    for q in weightings {
        p.add_constraint(vec![Term { block: b, coef: q.coefficient() }], Sense::Le, q.trace_with(w) / t);
    }
    for g in others {
        let gn = g.norm();
        if gn == 0.0 {
            continue;
        }
        let g = g / real(gn);
        let rhs = quad_form(&g, w) / t;
        p.add_constraint(vec![Term { block: b, coef: Coefficient::outer(1.0, g) }], Sense::Le, rhs.max(0.0));
    }
    let sol = solve(&p, &SolverOptions::default())?;
    if sol.status != Status::Optimal {
        return Err(Error::NumericalFailure {
            iterations: sol.iterations,
            primal_residual: sol.residuals.primal,
            dual_residual: sol.residuals.dual,
            gap: sol.residuals.gap,
        });
    }
    Ok(hermitian_part(sol.psd_block(b).expect("PSD block")) * real(t))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Assignment {
    /// No transmitter serves the user (zero target).
    Unserved,
    BsOnly,
    /// Served by exactly one SCA (transmitter index ≥ 1).
    SingleSca(usize),
    Multiflow(Vec<usize>),
}

impl Assignment {
    pub fn label(&self) -> String {
        match self {
            Assignment::Unserved => "unserved".into(),
            Assignment::BsOnly => "bs_only".into(),
            Assignment::SingleSca(j) => format!("sca_{j}"),
            Assignment::Multiflow(_) => "multiflow".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserAssignment {
    pub case: Assignment,
    /// Active power constraints `(j, ℓ)` at serving transmitters, listed for
    /// multiflow users.
    pub active_constraints: Vec<(usize, usize)>,
    /// Multiflow without any active constraint: the solution is not accurate
    /// enough, or the optimum is degenerate.
    pub consistency_violation: bool,
}

/// Serving case of every user. `tol` is the relative serving threshold and
/// also the activity tolerance of power constraints.
pub fn classify_assignment(
    solution: &BeamformingSolution,
    certificate: &DualCertificate,
    hw: &HardwareProfile,
    tol: f64,
) -> Result<Vec<UserAssignment>> {
    if certificate.lambda.len() != solution.num_users() {
        return invalid("certificate does not match the solution");
    }
    let slacks = constraint_slacks(&solution.beamformers, hw, tol)?;
    let serving = crate::solution::serving_sets(&solution.powers, tol);
    Ok(serving
        .into_iter()
        .map(|s| {
            let case = match s.as_slice() {
                [] => Assignment::Unserved,
                [0] => Assignment::BsOnly,
                [j] => Assignment::SingleSca(*j),
                _ => Assignment::Multiflow(s.clone()),
            };
            let mut active_constraints = Vec::new();
            if let Assignment::Multiflow(tx) = &case {
                for c in slacks.iter().filter(|c| c.active && tx.contains(&c.transmitter)) {
                    active_constraints.push((c.transmitter, c.index));
                }
            }
            let consistency_violation = matches!(case, Assignment::Multiflow(_)) && active_constraints.is_empty();
            UserAssignment { case, active_constraints, consistency_violation }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkSinr {
    /// `λ_k uᴴA_k u / uᴴB_k u`.
    pub uplink: f64,
    pub target: f64,
    pub relative_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityReport {
    /// `None` for users with zero beamformers.
    pub per_user: Vec<Option<UplinkSinr>>,
    pub max_relative_residual: f64,
    pub passed: bool,
}

/// Checks the uplink-downlink SINR identity for every served user, with
/// `u_k = [√ρ_j w_kj]_j` normalized.
pub fn verify_duality(
    solution: &BeamformingSolution,
    certificate: Option<&DualCertificate>,
    problem: &CoordinationProblem,
    tol: f64,
) -> Result<DualityReport> {
    let cert = certificate.ok_or_else(|| Error::State("no dual certificate available".into()))?;
    if cert.lambda.len() != problem.num_users() || solution.num_users() != problem.num_users() {
        return invalid("certificate, solution and problem sizes disagree");
    }
    let gt = problem.gtilde();
    let ch = &problem.channels;
    let hw = &problem.hw;
    let mut per_user = Vec::with_capacity(problem.num_users());
    let mut worst: f64 = 0.0;
    for k in 0..problem.num_users() {
        let w = &solution.beamformers[k];
        let norm2: f64 = w.iter().zip(&hw.rho).map(|(v, r)| r * v.norm_squared()).sum();
        if norm2 == 0.0 {
            per_user.push(None);
            continue;
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for (j, wkj) in w.iter().enumerate() {
            let u = wkj * real((hw.rho[j] / norm2).sqrt());
            num += abs2_dot(&ch.h[k][j], &u) / (ch.sigma2[k] * hw.rho[j]);
            den += u.norm_squared();
            for (i, &lam) in cert.lambda.iter().enumerate() {
                if i != k {
                    den += lam * abs2_dot(&ch.h[i][j], &u) / (ch.sigma2[i] * hw.rho[j]);
                }
            }
            for (c, &mu) in hw.constraints[j].iter().zip(&cert.mu[j]) {
                den += mu * c.weighting.quad(&u) / hw.rho[j];
            }
        }
        let uplink = cert.lambda[k] * num / den;
        let target = gt[k];
        let relative_residual = (uplink - target).abs() / target.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(relative_residual);
        per_user.push(Some(UplinkSinr { uplink, target, relative_residual }));
    }
    Ok(DualityReport { per_user, max_relative_residual: worst, passed: worst <= tol })
}

/// One row per (user, transmitter): `user,transmitter,emitted_mw,sinr,case`.
pub fn solution_csv(solution: &BeamformingSolution, channels: &ChannelSet, cases: &[UserAssignment]) -> Result<String> {
    let s = sinr(&solution.beamformers, channels)?;
    let mut out = String::from("user,transmitter,emitted_mw,sinr,case\n");
    for (k, row) in solution.powers.iter().enumerate() {
        let case = cases.get(k).map_or_else(String::new, |c| c.case.label());
        for (j, p) in row.iter().enumerate() {
            let _ = writeln!(out, "{k},{j},{p:e},{:e},{case}", s[k]);
        }
    }
    Ok(out)
}

/// Default activity tolerance used by [`classify_assignment`] callers.
pub const DEFAULT_CLASSIFY_TOL: f64 = DEFAULT_ACTIVITY_TOL;
