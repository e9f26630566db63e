//! Independent check of a [`BeamformingSolution`] against the channels.

use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::linalg::{abs2_dot, quad_form, CMat, CVec};
use crate::power::{constraint_slacks, dynamic_power_of, mw_to_dbm, ConstraintSlack, HardwareProfile, DEFAULT_ACTIVITY_TOL};
use crate::scenario::ChannelSet;
use crate::solution::{serving_sets, BeamformingSolution, DEFAULT_SERVING_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub sinr: Vec<f64>,
    /// `log2(1 + sinr)` in bits/s/Hz.
    pub rate: Vec<f64>,
    pub qos_target: Vec<f64>,
    /// `rate − target`.
    pub qos_margin: Vec<f64>,
    pub slacks: Vec<ConstraintSlack>,
    pub p_dynamic: f64,
    pub p_static: f64,
    pub p_total: f64,
    pub p_dynamic_dbm: f64,
    pub p_total_dbm: f64,
    pub serving: Vec<Vec<usize>>,
    pub multiflow: Vec<bool>,
    /// Largest relative disagreement between the vector and matrix forms of
    /// the SINR terms.
    pub matrix_form_deviation: f64,
}

impl EvaluationReport {
    /// QoS margins and power slacks within `tol` (relative to each limit).
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.qos_margin.iter().all(|&m| m >= -tol) && self.slacks.iter().all(|s| s.slack >= -tol * s.limit)
    }

    pub fn min_qos_margin(&self) -> f64 {
        self.qos_margin.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// One row per user and a closing summary row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "row,user,sinr,rate,qos_target,qos_margin,serving,multiflow,p_dynamic_mw,p_static_mw,p_total_mw,p_total_dbm,min_power_slack_mw\n",
        );
        for k in 0..self.sinr.len() {
            let serving: Vec<String> = self.serving[k].iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "user,{k},{:e},{:e},{:e},{:e},{},{},,,,,",
                self.sinr[k],
                self.rate[k],
                self.qos_target[k],
                self.qos_margin[k],
                serving.join(";"),
                self.multiflow[k] as u8,
            );
        }
        let min_slack = self.slacks.iter().map(|s| s.slack).fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            out,
            "summary,,,,,{:e},,{},{:e},{:e},{:e},{:.6},{:e}",
            self.min_qos_margin(),
            self.multiflow.iter().filter(|&&m| m).count(),
            self.p_dynamic,
            self.p_static,
            self.p_total,
            self.p_total_dbm,
            min_slack,
        );
        out
    }
}

fn check_dimensions(beamformers: &[Vec<CVec>], channels: &ChannelSet) -> Result<()> {
    if beamformers.len() != channels.num_users() {
        return invalid(format!("{} beamformer rows for {} users", beamformers.len(), channels.num_users()));
    }
    for (k, row) in beamformers.iter().enumerate() {
        if row.len() != channels.num_transmitters() {
            return invalid(format!("user {k} has {} beamformers", row.len()));
        }
        for (j, w) in row.iter().enumerate() {
            if w.len() != channels.h[k][j].len() {
                return invalid(format!("beamformer ({k},{j}) has the wrong length"));
            }
        }
    }
    Ok(())
}

/// Useful and interference power `(Σ_j |h_kjᴴ w_kj|², Σ_j Σ_{i≠k} |h_kjᴴ w_ij|²)`.
pub fn link_powers(beamformers: &[Vec<CVec>], channels: &ChannelSet, k: usize) -> (f64, f64) {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, row) in beamformers.iter().enumerate() {
        for (j, w) in row.iter().enumerate() {
            let g = abs2_dot(&channels.h[k][j], w);
            if i == k {
                signal += g;
            } else {
                interference += g;
            }
        }
    }
    (signal, interference)
}

/// Aggregate SINR of every user with non-coherent multiflow reception.
pub fn sinr(beamformers: &[Vec<CVec>], channels: &ChannelSet) -> Result<Vec<f64>> {
    check_dimensions(beamformers, channels)?;
    Ok((0..channels.num_users())
        .map(|k| {
            let (s, i) = link_powers(beamformers, channels, k);
            s / (i + channels.sigma2[k])
        })
        .collect())
}

/// The same SINR from covariance matrices via `h_kjᴴ W_ij h_kj`.
pub fn sinr_from_covariances(covariances: &[Vec<CMat>], channels: &ChannelSet) -> Vec<f64> {
    (0..channels.num_users())
        .map(|k| {
            let mut signal = 0.0;
            let mut interference = 0.0;
            for (i, row) in covariances.iter().enumerate() {
                for (j, w) in row.iter().enumerate() {
                    let g = quad_form(&channels.h[k][j], w);
                    if i == k {
                        signal += g;
                    } else {
                        interference += g;
                    }
                }
            }
            signal / (interference + channels.sigma2[k])
        })
        .collect()
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Evaluates `solution` with `gamma` in bits/s/Hz.
pub fn evaluate(solution: &BeamformingSolution, channels: &ChannelSet, hw: &HardwareProfile, gamma: &[f64]) -> Result<EvaluationReport> {
    channels.validate()?;
    check_dimensions(&solution.beamformers, channels)?;
    if gamma.len() != channels.num_users() {
        return invalid(format!("{} QoS targets for {} users", gamma.len(), channels.num_users()));
    }
    let w = &solution.beamformers;
    let sinr = sinr(w, channels)?;

    let outer: Vec<Vec<CMat>> = w.iter().map(|row| row.iter().map(|v| v * v.adjoint()).collect()).collect();
    let matrix_form_deviation =
        sinr.iter().zip(sinr_from_covariances(&outer, channels)).map(|(&a, b)| relative_deviation(a, b)).fold(0.0, f64::max);

    let rate: Vec<f64> = sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let qos_margin = rate.iter().zip(gamma).map(|(r, g)| r - g).collect();
    let slacks = constraint_slacks(w, hw, DEFAULT_ACTIVITY_TOL)?;
    let p_dynamic = dynamic_power_of(w, hw)?;
    let p_static = hw.static_power();
    let p_total = p_dynamic + p_static;
    let powers: Vec<Vec<f64>> = w.iter().map(|row| row.iter().map(|v| v.norm_squared()).collect()).collect();
    let serving = serving_sets(&powers, DEFAULT_SERVING_TOL);
    let multiflow = serving.iter().map(|s| s.len() > 1).collect();
    Ok(EvaluationReport {
        sinr,
        rate,
        qos_target: gamma.to_vec(),
        qos_margin,
        slacks,
        p_dynamic,
        p_static,
        p_total,
        p_dynamic_dbm: mw_to_dbm(p_dynamic),
        p_total_dbm: mw_to_dbm(p_total),
        serving,
        multiflow,
        matrix_form_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real;
    use crate::power::HardwareParams;
    use nalgebra::Complex;

    fn single_user(h: CVec, sigma2: f64) -> ChannelSet {
        let n = h.len();
        ChannelSet { h: vec![vec![h]], r: vec![vec![CMat::identity(n, n)]], sigma2: vec![sigma2], user_positions: vec![] }
    }

    #[test]
    fn mrt_single_user() {
        let h = CVec::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let ch = single_user(h.clone(), 1.0);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 2, 0, 0, 600);
        let w = &h * real(3f64.sqrt());
        let sol = BeamformingSolution::from_beamformers(vec![vec![w]], &hw, DEFAULT_SERVING_TOL).unwrap();
        let rep = evaluate(&sol, &ch, &hw, &[2.0]).unwrap();
        assert!((rep.sinr[0] - 3.0).abs() < 1e-12);
        assert!((rep.rate[0] - 2.0).abs() < 1e-12);
        assert!(rep.matrix_form_deviation <= 1e-10);
        assert!(rep.is_feasible(1e-6));
    }

    #[test]
    fn zero_beamformers_have_zero_rate() {
        let ch = single_user(CVec::from_element(2, real(1.0)), 1.0);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 2, 0, 0, 600);
        let sol = BeamformingSolution::zeros(1, &hw);
        let rep = evaluate(&sol, &ch, &hw, &[0.0]).unwrap();
        assert_eq!(rep.sinr, vec![0.0]);
        assert_eq!(rep.rate, vec![0.0]);
        assert_eq!(rep.p_total, rep.p_static);
    }

    #[test]
    fn orthogonal_users_do_not_interact() {
        let e = |i: usize| CVec::from_fn(2, |r, _| real(if r == i { 1.0 } else { 0.0 }));
        let ch = ChannelSet { h: vec![vec![e(0)], vec![e(1)]], r: vec![], sigma2: vec![1.0, 1.0], user_positions: vec![] };
        let s1 = sinr(&[vec![e(0) * real(2.0)], vec![e(1)]], &ch).unwrap();
        let s2 = sinr(&[vec![e(0) * real(2.0)], vec![e(1) * real(5.0)]], &ch).unwrap();
        assert_eq!(s1[0], s2[0]);
        assert_eq!(s1[0], 4.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let ch = single_user(CVec::from_element(2, real(1.0)), 1.0);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 3, 0, 0, 600);
        let sol = BeamformingSolution::zeros(1, &hw);
        assert!(evaluate(&sol, &ch, &hw, &[1.0]).is_err());
    }

    #[test]
    fn csv_has_user_rows_and_summary() {
        let ch = single_user(CVec::from_element(1, real(1.0)), 1.0);
        let hw = HardwareProfile::per_antenna(&HardwareParams::default(), 1, 0, 0, 600);
        let sol = BeamformingSolution::from_beamformers(vec![vec![CVec::from_element(1, real(1.0))]], &hw, DEFAULT_SERVING_TOL).unwrap();
        let csv = evaluate(&sol, &ch, &hw, &[1.0]).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("user,0,"));
        assert!(lines[2].starts_with("summary,"));
        let cols = lines[0].split(',').count();
        assert!(lines.iter().all(|l| l.split(',').count() == cols));
    }
}
