//! Multiflow-RZF: fixed regularized zero-forcing directions per transmitter
//! and a linear program for the powers.
//!
//! Each transmitter `j` computes, from its local channels only,
//!
//! ```text
//! u_kj ∝ (Σ_i h_ij h_ijᴴ / σ_i² + K/(γ̃_k q_j) I)⁻¹ h_kj
//! ```
//!
//! and forwards the scalars `g_ikj = |h_ijᴴ u_kj|²` and `u_kjᴴ Q_jℓ u_kj` to a
//! central unit that solves the power allocation LP.

use crate::conic::{solve, Coefficient, ConicProblem, Sense, SolverOptions, Status, Term};
use crate::coordination::{qos_scaling, CoordinationProblem};
use crate::error::{invalid, Error, Result};
use crate::linalg::{abs2_dot, hpd_solve, real, CMat, CVec};
use crate::power::HardwareProfile;
use crate::scenario::ChannelSet;
use crate::solution::{BeamformingSolution, DEFAULT_SERVING_TOL};

/// Gains below this fraction of the largest gain are not exchanged.
pub const GAIN_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RzfIntermediate {
    /// Unit-norm directions `u[k][j]`.
    pub u: Vec<Vec<CVec>>,
    /// `g[i][k][j] = |h_ijᴴ u_kj|²` after the cutoff.
    pub g: Vec<Vec<Vec<f64>>>,
    /// `qscal[j][ℓ][k] = u_kjᴴ Q_jℓ u_kj`.
    pub qscal: Vec<Vec<Vec<f64>>>,
}

impl RzfIntermediate {
    /// Nonzero scalars forwarded by each transmitter.
    pub fn exchanged_scalars(&self) -> Vec<usize> {
        let nt = self.qscal.len();
        (0..nt)
            .map(|j| {
                let gains = self.g.iter().flatten().filter(|row| row[j] > 0.0).count();
                let weights = self.qscal[j].iter().flatten().filter(|&&v| v > 0.0).count();
                gains + weights
            })
            .collect()
    }
}

/// RZF directions and the derived scalars. Users with `γ̃_k = 0` get
/// matched-filter directions, the limit of an infinite regularizer.
pub fn rzf_directions(channels: &ChannelSet, hw: &HardwareProfile, gtilde: &[f64]) -> Result<RzfIntermediate> {
    let nk = channels.num_users();
    let nt = hw.num_transmitters();
    if gtilde.len() != nk || channels.num_transmitters() != nt {
        return invalid("RZF inputs have inconsistent sizes");
    }
    if gtilde.iter().any(|g| !(*g >= 0.0)) {
        return invalid("SINR targets must be nonnegative");
    }
    let mut u = vec![Vec::with_capacity(nt); nk];
    for j in 0..nt {
        let n = hw.antennas[j];
        let qj = hw.per_antenna_limit[j];
        if n > 0 && !(qj > 0.0) {
            return invalid(format!("transmitter {j} has a zero per-antenna limit"));
        }
        let mut gram = CMat::zeros(n, n);
        for i in 0..nk {
            let h = &channels.h[i][j];
            gram.gerc(real(1.0 / channels.sigma2[i]), h, h, real(1.0));
        }
        for k in 0..nk {
            let h = &channels.h[k][j];
            let dir = if h.norm() == 0.0 {
                None
            } else if gtilde[k] > 0.0 {
                let reg = nk as f64 / (gtilde[k] * qj);
                let m = &gram + CMat::identity(n, n) * real(reg);
                hpd_solve(&m, h)
            } else {
                Some(h.clone())
            };
            let dir = match dir {
                Some(v) if v.norm() > 0.0 => v.unscale(v.norm()),
                _ => {
                    let mut e = CVec::zeros(n);
                    if n > 0 {
                        e[0] = real(1.0);
                    }
                    e
                }
            };
            u[k].push(dir);
        }
    }

    let mut g: Vec<Vec<Vec<f64>>> =
        (0..nk).map(|i| (0..nk).map(|k| (0..nt).map(|j| abs2_dot(&channels.h[i][j], &u[k][j])).collect()).collect()).collect();
    let g_max = g.iter().flatten().flatten().fold(0.0_f64, |a, &b| a.max(b));
    for v in g.iter_mut().flatten().flatten() {
        if *v < GAIN_CUTOFF * g_max {
            *v = 0.0;
        }
    }
    let qscal =
        (0..nt).map(|j| hw.constraints[j].iter().map(|c| (0..nk).map(|k| c.weighting.quad(&u[k][j])).collect()).collect()).collect();
    Ok(RzfIntermediate { u, g, qscal })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Allocation {
    /// `p[k][j]` in mW.
    Powers(Vec<Vec<f64>>),
    /// The fixed directions cannot meet the targets.
    Infeasible,
}

/// Solves the power allocation LP for fixed directions.
pub fn allocate_power(inter: &RzfIntermediate, hw: &HardwareProfile, gtilde: &[f64], sigma2: &[f64]) -> Result<Allocation> {
    let nk = inter.u.len();
    let nt = hw.num_transmitters();
    if gtilde.len() != nk || sigma2.len() != nk {
        return invalid("allocation inputs have inconsistent sizes");
    }
    if nk == 0 || gtilde.iter().all(|&g| g == 0.0) {
        return Ok(Allocation::Powers(vec![vec![0.0; nt]; nk]));
    }
    let idx = |k: usize, j: usize| k * nt + j;
    let mut lp = ConicProblem::new();
    let x = lp.add_nonneg_block(nk * nt);
    lp.add_objective(x, Coefficient::Entries((0..nk).flat_map(|k| (0..nt).map(move |j| (idx(k, j), hw.rho[j]))).collect()));
    for k in 0..nk {
        if !(gtilde[k] > 0.0) {
            continue;
        }
        let mut entries = Vec::new();
        for i in 0..nk {
            for j in 0..nt {
                let gk = inter.g[k][i][j];
                let mut v = -gk;
                if i == k {
                    v += gk * (1.0 + 1.0 / gtilde[k]);
                }
                if v != 0.0 {
                    entries.push((idx(i, j), v / sigma2[k]));
                }
            }
        }
        lp.add_constraint(vec![Term { block: x, coef: Coefficient::Entries(entries) }], Sense::Ge, 1.0);
    }
    for j in 0..nt {
        for (l, c) in hw.constraints[j].iter().enumerate() {
            let scale = if c.limit > 0.0 { 1.0 / c.limit } else { 1.0 };
            let entries = (0..nk).filter(|&k| inter.qscal[j][l][k] > 0.0).map(|k| (idx(k, j), inter.qscal[j][l][k] * scale)).collect();
            lp.add_constraint(vec![Term { block: x, coef: Coefficient::Entries(entries) }], Sense::Le, c.limit * scale);
        }
    }
    let sol = solve(&lp, &SolverOptions::default())?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => return Ok(Allocation::Infeasible),
        _ => {
            return Err(Error::NumericalFailure {
                iterations: sol.iterations,
                primal_residual: sol.residuals.primal,
                dual_residual: sol.residuals.dual,
                gap: sol.residuals.gap,
            })
        }
    }
    let p = sol.primal[x].as_nonneg().expect("nonnegative block");
    let s = sol.dual_slack[x].as_nonneg().expect("nonnegative block");
    let mut powers: Vec<Vec<f64>> = (0..nk).map(|k| (0..nt).map(|j| p[idx(k, j)].max(0.0)).collect()).collect();
    for k in 0..nk {
        let total: f64 = powers[k].iter().sum();
        for j in 0..nt {
            let v = powers[k][j];
            // Residue of the interior-point method on a column whose reduced
            // cost is clearly positive.
            let dust = v <= DEFAULT_SERVING_TOL * total || (v <= 1e-2 * total && s[idx(k, j)] > 1e-4 * hw.rho[j]);
            if gtilde[k] == 0.0 || dust {
                powers[k][j] = 0.0;
            }
        }
    }
    Ok(Allocation::Powers(powers))
}

#[derive(Debug, Clone)]
pub struct RzfSolution {
    pub solution: BeamformingSolution,
    pub intermediate: RzfIntermediate,
    /// Nonzero scalars forwarded per transmitter.
    pub exchanged: Vec<usize>,
}

impl RzfSolution {
    /// Scalars forwarded by the SCAs (transmitters 1..).
    pub fn exchanged_by_scas(&self) -> usize {
        self.exchanged.iter().skip(1).sum()
    }
}

#[derive(Debug, Clone)]
pub enum RzfOutcome {
    Solved(Box<RzfSolution>),
    Infeasible,
}

impl RzfOutcome {
    pub fn solved(&self) -> Option<&RzfSolution> {
        match self {
            RzfOutcome::Solved(s) => Some(s),
            RzfOutcome::Infeasible => None,
        }
    }
}

/// `w_kj = √p_kj u_kj` with the LP powers.
pub fn rzf_solve(problem: &CoordinationProblem) -> Result<RzfOutcome> {
    problem.validate()?;
    let gt: Vec<f64> = problem.gtilde().into_iter().zip(&problem.gamma).map(|(g, &raw)| if raw > 0.0 { g } else { 0.0 }).collect();
    let inter = rzf_directions(&problem.channels, &problem.hw, &gt)?;
    let powers = match allocate_power(&inter, &problem.hw, &gt, &problem.channels.sigma2)? {
        Allocation::Powers(p) => p,
        Allocation::Infeasible => return Ok(RzfOutcome::Infeasible),
    };
    let mut w: Vec<Vec<CVec>> =
        powers.iter().zip(&inter.u).map(|(pk, uk)| pk.iter().zip(uk).map(|(p, u)| u * real(p.sqrt())).collect()).collect();
    if let Some(t) = qos_scaling(&w, problem) {
        for (row, tk) in w.iter_mut().zip(t) {
            row.iter_mut().for_each(|v| *v *= real(tk.sqrt()));
        }
    }
    let solution = BeamformingSolution::from_beamformers(w, &problem.hw, DEFAULT_SERVING_TOL)?;
    let exchanged = inter.exchanged_scalars();
    Ok(RzfOutcome::Solved(Box::new(RzfSolution { solution, intermediate: inter, exchanged })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::HardwareParams;
    use nalgebra::Complex;

    fn channels(h: Vec<Vec<CVec>>, sigma2: f64) -> ChannelSet {
        let k = h.len();
        ChannelSet { h, r: vec![], sigma2: vec![sigma2; k], user_positions: vec![] }
    }

    #[test]
    fn single_user_gets_matched_filter() {
        let h = CVec::from_vec(vec![Complex::new(0.3, 0.1), Complex::new(-0.2, 0.7), Complex::new(0.0, 0.4)]);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 3, 0, 0, 600);
        let inter = rzf_directions(&channels(vec![vec![h.clone()]], 1e-3), &hw, &[3.0]).unwrap();
        let u = &inter.u[0][0];
        assert!((u.norm() - 1.0).abs() < 1e-12);
        assert!((h.dotc(u).norm() - h.norm()).abs() < 1e-12);
        assert!((inter.g[0][0][0] - h.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_users_keep_their_channels() {
        let e = |i: usize| CVec::from_fn(2, |r, _| real(if r == i { 2.0 } else { 0.0 }));
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 2, 0, 0, 600);
        let inter = rzf_directions(&channels(vec![vec![e(0)], vec![e(1)]], 1.0), &hw, &[1.0, 3.0]).unwrap();
        assert!((inter.u[0][0][0].norm() - 1.0).abs() < 1e-12);
        assert!((inter.u[1][0][1].norm() - 1.0).abs() < 1e-12);
        assert_eq!(inter.g[0][1][0], 0.0);
    }

    #[test]
    fn gains_obey_cauchy_schwarz() {
        let h0 = CVec::from_vec(vec![Complex::new(1.0, 0.0), Complex::new(0.5, -0.5)]);
        let h1 = CVec::from_vec(vec![Complex::new(0.2, 0.3), Complex::new(1.0, 0.1)]);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 2, 0, 0, 600);
        let inter = rzf_directions(&channels(vec![vec![h0.clone()], vec![h1.clone()]], 0.1), &hw, &[3.0, 3.0]).unwrap();
        assert!(inter.g[0][0][0] <= h0.norm_squared() * (1.0 + 1e-12));
        assert!(inter.g[1][1][0] <= h1.norm_squared() * (1.0 + 1e-12));
        assert!(inter.g[0][0][0] < h0.norm_squared());
    }

    #[test]
    fn scalar_lp_matches_hand_reduction() {
        let inter =
            RzfIntermediate { u: vec![vec![CVec::from_element(1, real(1.0))]], g: vec![vec![vec![1.0]]], qscal: vec![vec![vec![1.0]]] };
        let params = HardwareParams { q_bs_mw: 100.0, ..HardwareParams::default() };
        let hw = HardwareProfile::per_antenna(&params, 1, 0, 0, 600);
        let Allocation::Powers(p) = allocate_power(&inter, &hw, &[3.0], &[1.0]).unwrap() else { panic!() };
        assert!((p[0][0] - 3.0).abs() < 3e-6);
        let Allocation::Powers(p2) = allocate_power(&inter, &hw, &[3.0], &[2.0]).unwrap() else { panic!() };
        assert!((p2[0][0] - 6.0).abs() < 6e-6);
        let tight = HardwareProfile::per_antenna(&HardwareParams { q_bs_mw: 2.0, ..params }, 1, 0, 0, 600);
        assert_eq!(allocate_power(&inter, &tight, &[3.0], &[1.0]).unwrap(), Allocation::Infeasible);
    }

    #[test]
    fn zero_channel_falls_back_to_first_antenna() {
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 2, 0, 0, 600);
        let inter = rzf_directions(&channels(vec![vec![CVec::zeros(2)]], 1.0), &hw, &[1.0]).unwrap();
        assert_eq!(inter.u[0][0][0], real(1.0));
        assert_eq!(inter.g[0][0][0], 0.0);
    }
}
