//! Random scenario realizations: user drops, large-scale fading and
//! correlated Rayleigh small-scale fading.
//!
//! # Random streams
//!
//! Every realization is a pure function of `(seed, trial)`. Each stage of the
//! generator owns a ChaCha8 stream keyed by `seed` with stream id
//! `4·trial + stage`:
//!
//! | stage | draws |
//! |-------|-------|
//! | 0 | user positions |
//! | 1 | log-normal shadowing, one per (user, BS or configured SCA) |
//! | 2 | small-scale fading of the BS links |
//! | 3 | small-scale fading of the SCA links |
//!
//! Keeping stages on separate streams means the BS channels of a trial do not
//! change when only the SCA antenna count changes, and vice versa.

use std::f64::consts::PI;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_deviation, min_eigenvalue, psd_sqrt, real, trace_re, CMat, CVec};
use crate::power::{dbm_to_mw, HardwareParams, HardwareProfile};

/// Distance below which path loss is evaluated at the clamp (km).
pub const MIN_DISTANCE_KM: f64 = 0.001;
/// Radius around an SCA where the near-SCA path loss applies (km).
pub const NEAR_SCA_RADIUS_KM: f64 = 0.04;
/// Half-width of the angular spread of the BS correlation surrogate (degrees).
pub const BS_ANGULAR_SPREAD_DEG: f64 = 10.0;

const MAX_REJECTIONS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, azimuth_deg: f64) -> Self {
        let a = azimuth_deg.to_radians();
        Self { x: radius * a.cos(), y: radius * a.sin() }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn azimuth(&self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Self { x: v[0], y: v[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// One drop of the macro cell.
///
/// Lengths in km. `carrier_freq` (GHz) is carried for reports only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cell_radius: f64,
    pub num_users_uniform: usize,
    pub sca_positions: Vec<Point>,
    pub users_per_sca: usize,
    pub sca_user_radius: f64,
    pub n_bs: usize,
    pub n_sca: usize,
    pub carrier_freq: f64,
    pub num_subcarriers: usize,
    pub shadowing_stddev: f64,
    pub noise_variance_dbm: f64,
    pub hardware: HardwareParams,
    pub seed: u64,
    /// Rate targets in bits/s/Hz: one per user, or a single value for all.
    pub qos_targets: Vec<f64>,
}

impl Default for ScenarioConfig {
    /// Desk-scale setup: 4 uniform users, 2 SCAs with one user each,
    /// 16 BS antennas, single-antenna SCAs, 2 bits/s/Hz.
    fn default() -> Self {
        Self {
            cell_radius: 0.5,
            num_users_uniform: 4,
            sca_positions: vec![Point::polar(0.3, 45.0), Point::polar(0.3, 225.0)],
            users_per_sca: 1,
            sca_user_radius: NEAR_SCA_RADIUS_KM,
            n_bs: 16,
            n_sca: 1,
            carrier_freq: 2.0,
            num_subcarriers: 600,
            shadowing_stddev: 7.0,
            noise_variance_dbm: -127.0,
            hardware: HardwareParams::default(),
            seed: 0,
            qos_targets: vec![2.0],
        }
    }
}

impl ScenarioConfig {
    /// Full macro-cell setup: 0.5 km radius, 4 SCAs at 0.3 km on the
    /// diagonals, 6 uniform users plus one per SCA, 50 BS antennas and
    /// 2-antenna SCAs.
    pub fn large_setup() -> Self {
        Self {
            num_users_uniform: 6,
            sca_positions: [45.0, 135.0, 225.0, 315.0].iter().map(|&a| Point::polar(0.3, a)).collect(),
            n_bs: 50,
            n_sca: 2,
            ..Self::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn num_users(&self) -> usize {
        self.num_users_uniform + self.users_per_sca * self.sca_positions.len()
    }

    /// SCAs that transmit: none when they carry no antennas.
    pub fn num_active_scas(&self) -> usize {
        if self.n_sca == 0 {
            0
        } else {
            self.sca_positions.len()
        }
    }

    pub fn noise_variance_mw(&self) -> f64 {
        dbm_to_mw(self.noise_variance_dbm)
    }

    /// Per-user targets with a single value broadcast to every user.
    pub fn qos_per_user(&self) -> Vec<f64> {
        match self.qos_targets.as_slice() {
            [one] => vec![*one; self.num_users()],
            many => many.to_vec(),
        }
    }

    pub fn hardware_profile(&self) -> HardwareProfile {
        HardwareProfile::per_antenna(&self.hardware, self.n_bs, self.n_sca, self.num_active_scas(), self.num_subcarriers)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cell_radius > 0.0) || !self.cell_radius.is_finite() {
            return invalid("cell_radius must be positive");
        }
        for (i, p) in self.sca_positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) || p.norm() >= self.cell_radius {
                return invalid(format!("SCA {i} is not strictly inside the cell"));
            }
        }
        if !(self.sca_user_radius > 0.0) || !self.sca_user_radius.is_finite() {
            return invalid("sca_user_radius must be positive");
        }
        if self.n_bs == 0 {
            return invalid("n_bs must be >= 1");
        }
        if self.num_subcarriers == 0 {
            return invalid("num_subcarriers must be >= 1");
        }
        if !(self.shadowing_stddev >= 0.0) || !self.shadowing_stddev.is_finite() {
            return invalid("shadowing_stddev must be nonnegative");
        }
        if !self.noise_variance_dbm.is_finite() {
            return invalid("noise_variance_dbm must be finite");
        }
        if self.num_users() == 0 {
            return invalid("the scenario has no users");
        }
        let k = self.num_users();
        if self.qos_targets.len() != 1 && self.qos_targets.len() != k {
            return invalid(format!("qos_targets must have 1 or {k} entries"));
        }
        if self.qos_targets.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return invalid("qos_targets must be finite and nonnegative");
        }
        // Guard against absurd sizes coming from untrusted config files.
        if self.n_bs > 4096 || self.n_sca > 4096 || k > 4096 || self.sca_positions.len() > 1024 {
            return invalid("scenario dimensions exceed supported limits");
        }
        self.hardware.validate()
    }
}

/// Per-user channels `h[k][j]` with covariances `r[k][j]` (transmitter 0 is the
/// BS), noise powers in mW and the user positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h: Vec<Vec<CVec>>,
    pub r: Vec<Vec<CMat>>,
    pub sigma2: Vec<f64>,
    pub user_positions: Vec<Point>,
}

impl ChannelSet {
    pub fn num_users(&self) -> usize {
        self.h.len()
    }

    pub fn num_transmitters(&self) -> usize {
        self.h.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.h.len();
        if self.sigma2.len() != k || (!self.r.is_empty() && self.r.len() != k) {
            return invalid("channel set sizes disagree");
        }
        if self.sigma2.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return invalid("noise variances must be positive");
        }
        let t = self.num_transmitters();
        for (i, row) in self.h.iter().enumerate() {
            if row.len() != t {
                return invalid(format!("user {i} has {} channels, expected {t}", row.len()));
            }
            for (j, h) in row.iter().enumerate() {
                if h.len() != self.h[0][j].len() {
                    return invalid(format!("channel ({i},{j}) has the wrong length"));
                }
                if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return invalid(format!("channel ({i},{j}) is not finite"));
                }
            }
        }
        Ok(())
    }

    /// Keeps only the listed transmitters, in order.
    pub fn restrict(&self, transmitters: &[usize]) -> Self {
        Self {
            h: self.h.iter().map(|row| transmitters.iter().map(|&j| row[j].clone()).collect()).collect(),
            r: self.r.iter().map(|row| transmitters.iter().map(|&j| row[j].clone()).collect()).collect(),
            sigma2: self.sigma2.clone(),
            user_positions: self.user_positions.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    /// `148.1 + 37.6 log10(d)`
    Macro,
    /// `127 + 30 log10(d)`, within 40 m of an SCA.
    ScaNear,
}

/// Path and penetration loss in dB at `distance_km`.
pub fn path_loss_db(distance_km: f64, kind: LinkKind) -> Result<f64> {
    if !(distance_km > 0.0) || !distance_km.is_finite() {
        return invalid(format!("distance must be positive, got {distance_km}"));
    }
    let d = distance_km.max(MIN_DISTANCE_KM);
    Ok(match kind {
        LinkKind::Macro => 148.1 + 37.6 * d.log10(),
        LinkKind::ScaNear => 127.0 + 30.0 * d.log10(),
    })
}

/// RNG for one generator stage of one trial.
pub fn stage_rng(seed: u64, trial: u64, stage: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(4).wrapping_add(stage));
    rng
}

fn uniform_in_disc<R: Rng + ?Sized>(center: Point, radius: f64, rng: &mut R) -> Result<Point> {
    for _ in 0..MAX_REJECTIONS {
        let x = rng.random_range(-radius..=radius);
        let y = rng.random_range(-radius..=radius);
        if x * x + y * y <= radius * radius {
            return Ok(Point::new(center.x + x, center.y + y));
        }
    }
    Err(Error::Internal("rejection sampler exceeded its iteration bound".into()))
}

/// Uniform users on the cell disc, then `users_per_sca` users on the disc
/// around each SCA (grouped by SCA).
pub fn drop_users<R: Rng + ?Sized>(config: &ScenarioConfig, rng: &mut R) -> Result<Vec<Point>> {
    let mut users = Vec::with_capacity(config.num_users());
    for _ in 0..config.num_users_uniform {
        users.push(uniform_in_disc(Point::ORIGIN, config.cell_radius, rng)?);
    }
    for sca in &config.sca_positions {
        for _ in 0..config.users_per_sca {
            let mut p = uniform_in_disc(*sca, config.sca_user_radius, rng)?;
            // Keep hotspot users inside the macro cell.
            let mut tries = 0;
            while p.norm() > config.cell_radius {
                p = uniform_in_disc(*sca, config.sca_user_radius, rng)?;
                tries += 1;
                if tries > MAX_REJECTIONS {
                    return Err(Error::Internal("no SCA user position inside the cell".into()));
                }
            }
            users.push(p);
        }
    }
    Ok(users)
}

/// Shadowing in dB for every (user, transmitter) link, transmitters being the
/// BS and all configured SCA positions.
pub fn draw_shadowing<R: Rng + ?Sized>(config: &ScenarioConfig, num_users: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let links = 1 + config.sca_positions.len();
    (0..num_users)
        .map(|_| {
            (0..links)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    config.shadowing_stddev * z
                })
                .collect()
        })
        .collect()
}

/// Uniform linear array correlation with half-wavelength spacing, averaged
/// over `2n` angles evenly spread within ±`spread_deg` of `azimuth`, with
/// trace `n`.
pub fn ula_correlation(n: usize, azimuth: f64, spread_deg: f64) -> CMat {
    let angles = 2 * n;
    let spread = spread_deg.to_radians();
    let mut r = CMat::zeros(n, n);
    for m in 0..angles {
        let theta = if angles == 1 { azimuth } else { azimuth - spread + 2.0 * spread * m as f64 / (angles - 1) as f64 };
        let phase = PI * theta.sin();
        let a = CVec::from_fn(n, |i, _| Complex::from_polar(1.0, -phase * i as f64));
        r.gerc(real(1.0 / angles as f64), &a, &a, real(1.0));
    }
    crate::linalg::hermitian_part(&r)
}

/// Large-scale gain (linear) of a link.
fn link_gain(distance: f64, kind: LinkKind, shadow_db: f64) -> Result<f64> {
    let pl = path_loss_db(distance.max(MIN_DISTANCE_KM), kind)?;
    Ok(10f64.powf(-(pl - shadow_db) / 10.0))
}

/// Covariances `R[k][j]` for the BS and every active SCA.
pub fn build_correlation(config: &ScenarioConfig, positions: &[Point], shadowing: &[Vec<f64>]) -> Result<Vec<Vec<CMat>>> {
    let active = config.num_active_scas();
    positions
        .iter()
        .zip(shadowing)
        .map(|(user, shadow)| {
            let mut row = Vec::with_capacity(1 + active);
            let g_bs = link_gain(user.norm(), LinkKind::Macro, shadow[0])?;
            let r_bs = ula_correlation(config.n_bs, user.azimuth(), BS_ANGULAR_SPREAD_DEG);
            let tr = trace_re(&r_bs);
            row.push(r_bs * real(g_bs * config.n_bs as f64 / tr));
            for (s, sca) in config.sca_positions.iter().enumerate().take(active) {
                let d = user.distance(sca);
                let kind = if d <= NEAR_SCA_RADIUS_KM { LinkKind::ScaNear } else { LinkKind::Macro };
                let g = link_gain(d, kind, shadow[1 + s])?;
                row.push(CMat::identity(config.n_sca, config.n_sca) * real(g));
            }
            Ok(row)
        })
        .collect()
}

fn circular_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(s * re, s * im)
    })
}

/// `h = R^{1/2} z` with `z ~ CN(0, I)`, for one list of covariances.
pub fn draw_link<R: Rng + ?Sized>(r: &CMat, rng: &mut R) -> CVec {
    let z = circular_gaussian(r.nrows(), rng);
    psd_sqrt(r) * z
}

/// Draws all channels: BS links from `bs_rng`, SCA links from `sca_rng`.
pub fn draw_channels<R: Rng + ?Sized>(r: &[Vec<CMat>], bs_rng: &mut R, sca_rng: &mut R) -> Vec<Vec<CVec>> {
    let bs: Vec<CVec> = r.iter().map(|row| draw_link(&row[0], bs_rng)).collect();
    r.iter()
        .zip(bs)
        .map(|(row, h0)| {
            let mut out = vec![h0];
            out.extend(row[1..].iter().map(|rj| draw_link(rj, sca_rng)));
            out
        })
        .collect()
}

/// Full realization for trial `trial` of `config`.
pub fn realize(config: &ScenarioConfig, trial: u64) -> Result<ChannelSet> {
    config.validate()?;
    let positions = drop_users(config, &mut stage_rng(config.seed, trial, 0))?;
    let shadowing = draw_shadowing(config, positions.len(), &mut stage_rng(config.seed, trial, 1));
    let r = build_correlation(config, &positions, &shadowing)?;
    let h = draw_channels(&r, &mut stage_rng(config.seed, trial, 2), &mut stage_rng(config.seed, trial, 3));
    let sigma2 = vec![config.noise_variance_mw(); positions.len()];
    Ok(ChannelSet { h, r, sigma2, user_positions: positions })
}

/// Checks the Hermitian/PSD invariant of a covariance.
pub fn covariance_ok(r: &CMat) -> bool {
    let tr = trace_re(r);
    hermitian_deviation(r) <= 1e-12 * tr.max(f64::MIN_POSITIVE).max(1.0) && min_eigenvalue(r) >= -1e-10 * tr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(0.1, LinkKind::Macro).unwrap() - 110.5).abs() < 1e-9);
        assert!((path_loss_db(0.04, LinkKind::ScaNear).unwrap() - 85.062).abs() < 1e-3);
        assert!((path_loss_db(1.0, LinkKind::Macro).unwrap() - 148.1).abs() < 1e-12);
        assert!(path_loss_db(0.0, LinkKind::Macro).is_err());
        assert!(path_loss_db(-1.0, LinkKind::Macro).is_err());
        assert_eq!(path_loss_db(1e-5, LinkKind::ScaNear).unwrap(), path_loss_db(MIN_DISTANCE_KM, LinkKind::ScaNear).unwrap());
    }

    #[test]
    fn users_stay_in_their_discs() {
        let cfg = ScenarioConfig { seed: 11, ..ScenarioConfig::default() };
        for trial in 0..50 {
            let users = drop_users(&cfg, &mut stage_rng(cfg.seed, trial, 0)).unwrap();
            assert_eq!(users.len(), cfg.num_users());
            assert!(users.iter().all(|p| p.norm() <= cfg.cell_radius));
            for (s, sca) in cfg.sca_positions.iter().enumerate() {
                let u = users[cfg.num_users_uniform + s];
                assert!(u.distance(sca) <= NEAR_SCA_RADIUS_KM);
            }
        }
    }

    #[test]
    fn sca_user_lands_near_its_sca() {
        let cfg = ScenarioConfig {
            num_users_uniform: 0,
            sca_positions: vec![Point::new(0.3, 0.0)],
            users_per_sca: 1,
            ..ScenarioConfig::default()
        };
        let users = drop_users(&cfg, &mut stage_rng(3, 0, 0)).unwrap();
        assert!(users[0].distance(&Point::new(0.3, 0.0)) <= 0.04);
    }

    #[test]
    fn near_sca_covariance_is_scaled_identity() {
        let cfg = ScenarioConfig { num_users_uniform: 0, sca_positions: vec![Point::new(0.3, 0.0)], n_sca: 2, ..ScenarioConfig::default() };
        let user = Point::new(0.3, 0.04);
        let r = build_correlation(&cfg, &[user], &[vec![0.0, 0.0]]).unwrap();
        let expected = 10f64.powf(-85.062 / 10.0);
        assert!((r[0][1][(0, 0)].re - expected).abs() < 1e-4 * expected);
        assert!((r[0][1][(1, 1)].re - expected).abs() < 1e-4 * expected);
        assert_eq!(r[0][1][(0, 1)], real(0.0));
    }

    #[test]
    fn covariances_are_normalized_and_psd() {
        let cfg = ScenarioConfig { seed: 5, n_sca: 2, ..ScenarioConfig::default() };
        let set = realize(&cfg, 0).unwrap();
        let shadow = draw_shadowing(&cfg, set.user_positions.len(), &mut stage_rng(cfg.seed, 0, 1));
        for (k, row) in set.r.iter().enumerate() {
            for (j, r) in row.iter().enumerate() {
                assert!(covariance_ok(r));
                let n = r.nrows() as f64;
                let d = if j == 0 { set.user_positions[k].norm() } else { set.user_positions[k].distance(&cfg.sca_positions[j - 1]) };
                let kind = if j > 0 && d <= NEAR_SCA_RADIUS_KM { LinkKind::ScaNear } else { LinkKind::Macro };
                let g = link_gain(d, kind, shadow[k][j]).unwrap();
                assert!((trace_re(r) - n * g).abs() <= 1e-9 * n * g);
            }
        }
    }

    #[test]
    fn bs_surrogate_is_rank_deficient() {
        let r = ula_correlation(16, 0.3, BS_ANGULAR_SPREAD_DEG);
        let ev = crate::linalg::hermitian_eigenvalues(&r);
        let strong = ev.iter().filter(|&&v| v > 1e-3 * ev[ev.len() - 1]).count();
        assert!(strong < 16, "{strong}");
        assert!((trace_re(&r) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn zero_covariance_gives_zero_channel() {
        let mut rng = stage_rng(1, 0, 2);
        assert_eq!(draw_link(&CMat::zeros(3, 3), &mut rng), CVec::zeros(3));
    }

    #[test]
    fn empirical_covariance_matches() {
        let r = CMat::from_row_slice(2, 2, &[real(2.0), Complex::new(0.5, 0.3), Complex::new(0.5, -0.3), real(1.0)]);
        let mut rng = stage_rng(99, 0, 2);
        let mut acc = CMat::zeros(2, 2);
        let draws = 10_000;
        for _ in 0..draws {
            let h = draw_link(&r, &mut rng);
            acc += &h * h.adjoint();
        }
        acc /= real(draws as f64);
        assert!((acc - &r).norm() <= 0.05 * r.norm());
    }

    #[test]
    fn realization_is_deterministic() {
        let cfg = ScenarioConfig { seed: 42, ..ScenarioConfig::default() };
        let a = realize(&cfg, 7).unwrap();
        let b = realize(&cfg, 7).unwrap();
        assert_eq!(a, b);
        let c = realize(&cfg, 8).unwrap();
        assert_ne!(a.h, c.h);
    }

    #[test]
    fn bs_channels_do_not_depend_on_sca_antennas() {
        let one = ScenarioConfig { seed: 4, n_sca: 1, ..ScenarioConfig::default() };
        let two = ScenarioConfig { n_sca: 2, ..one.clone() };
        let a = realize(&one, 3).unwrap();
        let b = realize(&two, 3).unwrap();
        for k in 0..a.num_users() {
            assert_eq!(a.h[k][0], b.h[k][0]);
        }
    }

    #[test]
    fn noise_is_minus_127_dbm() {
        let set = realize(&ScenarioConfig::default(), 0).unwrap();
        assert!(set.sigma2.iter().all(|&s| s == 10f64.powf(-12.7)));
    }

    #[test]
    fn macro_only_topology() {
        let cfg = ScenarioConfig { n_sca: 0, ..ScenarioConfig::default() };
        let set = realize(&cfg, 0).unwrap();
        assert_eq!(set.num_transmitters(), 1);
        assert_eq!(cfg.hardware_profile().num_transmitters(), 1);
    }

    #[test]
    fn config_rejects_sca_outside_cell() {
        let cfg = ScenarioConfig { sca_positions: vec![Point::new(0.6, 0.0)], ..ScenarioConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ScenarioConfig::large_setup();
        let text = cfg.to_toml_string();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
        let partial = ScenarioConfig::from_toml_str("n_bs = 8\nqos_targets = [1.5]\n[hardware]\nq_sca_mw = 0.1\n").unwrap();
        assert_eq!(partial.n_bs, 8);
        assert_eq!(partial.hardware.q_sca_mw, 0.1);
        assert_eq!(partial.hardware.eta_bs_mw, 189.0);
        assert!(ScenarioConfig::from_toml_str("bogus_key = 1").is_err());
    }
}
