use crate::error::Result;
use crate::linalg::{CMat, CVec};
use crate::power::{dynamic_power_of, mw_to_dbm, HardwareProfile};

/// Default relative threshold below which a transmitter is considered not to
/// serve a user.
pub const DEFAULT_SERVING_TOL: f64 = 1e-6;

/// Beamformers `w[k][j]` for user `k` and transmitter `j` (0 = BS) with the
/// derived power bookkeeping, all in mW.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub beamformers: Vec<Vec<CVec>>,
    /// Covariance matrices `W[k][j]` when produced by the relaxation.
    pub covariances: Option<Vec<Vec<CMat>>>,
    /// Emitted power `‖w[k][j]‖²`.
    pub powers: Vec<Vec<f64>>,
    pub p_dynamic: f64,
    pub p_static: f64,
    pub p_total: f64,
    /// Transmitters serving each user.
    pub serving: Vec<Vec<usize>>,
}

impl BeamformingSolution {
    pub fn from_beamformers(beamformers: Vec<Vec<CVec>>, hw: &HardwareProfile, serving_tol: f64) -> Result<Self> {
        let p_dynamic = dynamic_power_of(&beamformers, hw)?;
        let p_static = hw.static_power();
        let powers: Vec<Vec<f64>> = beamformers.iter().map(|row| row.iter().map(|w| w.norm_squared()).collect()).collect();
        let serving = serving_sets(&powers, serving_tol);
        Ok(Self { beamformers, covariances: None, powers, p_dynamic, p_static, p_total: p_dynamic + p_static, serving })
    }

    /// All-zero beamformers for the given topology.
    pub fn zeros(num_users: usize, hw: &HardwareProfile) -> Self {
        let w = (0..num_users).map(|_| hw.antennas.iter().map(|&n| CVec::zeros(n)).collect()).collect();
        Self::from_beamformers(w, hw, DEFAULT_SERVING_TOL).expect("dimensions consistent by construction")
    }

    pub fn num_users(&self) -> usize {
        self.beamformers.len()
    }

    pub fn total_dbm(&self) -> f64 {
        mw_to_dbm(self.p_total)
    }

    pub fn is_multiflow(&self, user: usize) -> bool {
        self.serving[user].len() > 1
    }
}

/// User `k` is served by `j` iff `p[k][j] > tol · Σ_j p[k][j]`.
pub fn serving_sets(powers: &[Vec<f64>], tol: f64) -> Vec<Vec<usize>> {
    powers
        .iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                return Vec::new();
            }
            row.iter().enumerate().filter(|(_, &p)| p > tol * total).map(|(j, _)| j).collect()
        })
        .collect()
}
