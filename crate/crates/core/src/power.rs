//! Power consumption model and per-transmitter power constraints.
//!
//! All bookkeeping is in mW; dBm appears only at I/O boundaries.

use serde::{Deserialize, Serialize};

use crate::conic::Coefficient;
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_deviation, min_eigenvalue, quad_form, re_inner, CMat, CVec};
use crate::solution::BeamformingSolution;

/// Default relative tolerance for flagging a power constraint as active.
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-6;

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Hardware constants shared by all transmitters of one kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HardwareParams {
    /// Amplifier inefficiency `ρ ≥ 1` of the macro BS.
    pub rho_bs: f64,
    /// Amplifier inefficiency of every SCA.
    pub rho_sca: f64,
    /// Circuit power per BS antenna (mW).
    pub eta_bs_mw: f64,
    /// Circuit power per SCA antenna (mW).
    pub eta_sca_mw: f64,
    /// Per-antenna power limit at the BS (mW).
    pub q_bs_mw: f64,
    /// Per-antenna power limit at each SCA (mW).
    pub q_sca_mw: f64,
}

impl Default for HardwareParams {
    fn default() -> Self {
        Self { rho_bs: 1.0 / 0.388, rho_sca: 1.0 / 0.052, eta_bs_mw: 189.0, eta_sca_mw: 5.6, q_bs_mw: 66.0, q_sca_mw: 0.08 }
    }
}

impl HardwareParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.rho_bs, self.rho_sca, self.eta_bs_mw, self.eta_sca_mw, self.q_bs_mw, self.q_sca_mw];
        if finite.iter().any(|v| !v.is_finite()) {
            return invalid("hardware parameters must be finite");
        }
        if self.rho_bs < 1.0 || self.rho_sca < 1.0 {
            return invalid("amplifier inefficiency rho must be >= 1");
        }
        if self.eta_bs_mw < 0.0 || self.eta_sca_mw < 0.0 || self.q_bs_mw < 0.0 || self.q_sca_mw < 0.0 {
            return invalid("circuit powers and power limits must be nonnegative");
        }
        Ok(())
    }

    /// `(η_BS·N_BS + S·η_SCA·N_SCA) / C` in mW.
    pub fn static_power(&self, n_bs: usize, n_sca: usize, num_scas: usize, num_subcarriers: usize) -> f64 {
        static_power(self.eta_bs_mw, self.eta_sca_mw, n_bs, n_sca, num_scas, num_subcarriers)
    }
}

/// Static circuit power per subcarrier (mW).
pub fn static_power(eta_bs: f64, eta_sca: f64, n_bs: usize, n_sca: usize, num_scas: usize, num_subcarriers: usize) -> f64 {
    (eta_bs * n_bs as f64 + num_scas as f64 * eta_sca * n_sca as f64) / num_subcarriers as f64
}

/// Weighting matrix `Q` of one power constraint `Σₖ wₖᴴ Q wₖ ≤ q`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Single-entry diagonal matrix selecting one antenna.
    Antenna(usize),
    /// General Hermitian PSD matrix.
    Matrix(CMat),
}

impl Weighting {
    /// `wᴴ Q w`.
    pub fn quad(&self, w: &CVec) -> f64 {
        match self {
            Weighting::Antenna(l) => w[*l].norm_sqr(),
            Weighting::Matrix(q) => quad_form(w, q),
        }
    }

    /// `tr(Q W)`.
    pub fn trace_with(&self, w: &CMat) -> f64 {
        match self {
            Weighting::Antenna(l) => w[(*l, *l)].re,
            Weighting::Matrix(q) => re_inner(q, w),
        }
    }

    pub fn coefficient(&self) -> Coefficient {
        match self {
            Weighting::Antenna(l) => Coefficient::Diagonal(vec![(*l, 1.0)]),
            Weighting::Matrix(q) => Coefficient::Dense(q.clone()),
        }
    }

    pub fn to_dense(&self, dim: usize) -> CMat {
        self.coefficient().to_dense(dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerConstraint {
    pub weighting: Weighting,
    /// Limit `q` in mW.
    pub limit: f64,
}

/// Hardware of a concrete topology: transmitter 0 is the BS, 1..=S the SCAs.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareProfile {
    pub rho: Vec<f64>,
    pub eta: Vec<f64>,
    pub num_subcarriers: usize,
    pub antennas: Vec<usize>,
    /// Per-antenna limit `q_j` used by the RZF regularizer.
    pub per_antenna_limit: Vec<f64>,
    pub constraints: Vec<Vec<PowerConstraint>>,
}

impl HardwareProfile {
    /// Per-antenna constraints: `L_j = N_j` rows with `Q_{j,ℓ} = e_ℓ e_ℓᵀ`.
    pub fn per_antenna(params: &HardwareParams, n_bs: usize, n_sca: usize, num_scas: usize, num_subcarriers: usize) -> Self {
        let mut hw = Self {
            rho: vec![params.rho_bs],
            eta: vec![params.eta_bs_mw],
            num_subcarriers,
            antennas: vec![n_bs],
            per_antenna_limit: vec![params.q_bs_mw],
            constraints: vec![Self::antenna_rows(n_bs, params.q_bs_mw)],
        };
        for _ in 0..num_scas {
            hw.rho.push(params.rho_sca);
            hw.eta.push(params.eta_sca_mw);
            hw.antennas.push(n_sca);
            hw.per_antenna_limit.push(params.q_sca_mw);
            hw.constraints.push(Self::antenna_rows(n_sca, params.q_sca_mw));
        }
        hw
    }

    fn antenna_rows(n: usize, q: f64) -> Vec<PowerConstraint> {
        (0..n).map(|l| PowerConstraint { weighting: Weighting::Antenna(l), limit: q }).collect()
    }

    pub fn num_transmitters(&self) -> usize {
        self.antennas.len()
    }

    pub fn num_scas(&self) -> usize {
        self.antennas.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.antennas.len();
        if t == 0 {
            return invalid("hardware profile has no transmitters");
        }
        if self.rho.len() != t || self.eta.len() != t || self.constraints.len() != t || self.per_antenna_limit.len() != t {
            return invalid("hardware profile vectors disagree on the transmitter count");
        }
        if self.num_subcarriers == 0 {
            return invalid("num_subcarriers must be >= 1");
        }
        for j in 0..t {
            if !(self.rho[j] >= 1.0) || !(self.eta[j] >= 0.0) || !(self.per_antenna_limit[j] >= 0.0) {
                return invalid(format!("transmitter {j}: rho must be >= 1 and eta, q nonnegative"));
            }
            for (l, c) in self.constraints[j].iter().enumerate() {
                if !(c.limit >= 0.0) || !c.limit.is_finite() {
                    return invalid(format!("constraint ({j},{l}) has a negative or non-finite limit"));
                }
                match &c.weighting {
                    Weighting::Antenna(a) if *a >= self.antennas[j] => {
                        return invalid(format!("constraint ({j},{l}) selects a missing antenna"));
                    }
                    Weighting::Matrix(q) => {
                        let n = self.antennas[j];
                        if q.nrows() != n || q.ncols() != n {
                            return invalid(format!("constraint ({j},{l}) has a wrongly sized weighting"));
                        }
                        if hermitian_deviation(q) > 1e-12 * q.norm().max(1.0) || min_eigenvalue(q) < -1e-10 * q.norm() {
                            return invalid(format!("constraint ({j},{l}) weighting is not Hermitian PSD"));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// `Σ_j η_j N_j / C`.
    pub fn static_power(&self) -> f64 {
        self.eta.iter().zip(&self.antennas).map(|(e, &n)| e * n as f64).sum::<f64>() / self.num_subcarriers as f64
    }

    /// Keeps only the listed transmitters, in order.
    pub fn restrict(&self, transmitters: &[usize]) -> Self {
        Self {
            rho: transmitters.iter().map(|&j| self.rho[j]).collect(),
            eta: transmitters.iter().map(|&j| self.eta[j]).collect(),
            num_subcarriers: self.num_subcarriers,
            antennas: transmitters.iter().map(|&j| self.antennas[j]).collect(),
            per_antenna_limit: transmitters.iter().map(|&j| self.per_antenna_limit[j]).collect(),
            constraints: transmitters.iter().map(|&j| self.constraints[j].clone()).collect(),
        }
    }

    /// Copy with every power limit multiplied by `factor`.
    pub fn with_scaled_limits(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.per_antenna_limit.iter_mut().for_each(|q| *q *= factor);
        for row in &mut out.constraints {
            row.iter_mut().for_each(|c| c.limit *= factor);
        }
        out
    }
}

fn check_dimensions(beamformers: &[Vec<CVec>], hw: &HardwareProfile) -> Result<()> {
    for (k, row) in beamformers.iter().enumerate() {
        if row.len() != hw.num_transmitters() {
            return invalid(format!("user {k} has {} beamformers for {} transmitters", row.len(), hw.num_transmitters()));
        }
        for (j, w) in row.iter().enumerate() {
            if w.len() != hw.antennas[j] {
                return invalid(format!("beamformer ({k},{j}) has length {} but transmitter has {} antennas", w.len(), hw.antennas[j]));
            }
        }
    }
    Ok(())
}

/// `Σ_j ρ_j Σ_k ‖w_{k,j}‖²` in mW.
pub fn dynamic_power(solution: &BeamformingSolution, hw: &HardwareProfile) -> Result<f64> {
    dynamic_power_of(&solution.beamformers, hw)
}

pub fn dynamic_power_of(beamformers: &[Vec<CVec>], hw: &HardwareProfile) -> Result<f64> {
    check_dimensions(beamformers, hw)?;
    Ok(beamformers.iter().map(|row| row.iter().zip(&hw.rho).map(|(w, rho)| rho * w.norm_squared()).sum::<f64>()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSlack {
    pub transmitter: usize,
    pub index: usize,
    pub limit: f64,
    /// `q − Σ_k wᴴ Q w`.
    pub slack: f64,
    pub active: bool,
    pub violated: bool,
}

/// Slack of every power constraint; `tol` is relative to each limit.
pub fn check_power_constraints(solution: &BeamformingSolution, hw: &HardwareProfile, tol: f64) -> Result<Vec<ConstraintSlack>> {
    constraint_slacks(&solution.beamformers, hw, tol)
}

pub fn constraint_slacks(beamformers: &[Vec<CVec>], hw: &HardwareProfile, tol: f64) -> Result<Vec<ConstraintSlack>> {
    check_dimensions(beamformers, hw)?;
    let mut out = Vec::new();
    for (j, rows) in hw.constraints.iter().enumerate() {
        for (l, c) in rows.iter().enumerate() {
            let used: f64 = beamformers.iter().map(|row| c.weighting.quad(&row[j])).sum();
            let slack = c.limit - used;
            out.push(ConstraintSlack {
                transmitter: j,
                index: l,
                limit: c.limit,
                slack,
                active: slack.abs() <= tol * c.limit,
                violated: slack < -tol * c.limit,
            });
        }
    }
    Ok(out)
}
