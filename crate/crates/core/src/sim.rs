//! Monte Carlo sweeps over one scenario parameter.
//!
//! Every `(axis value, trial)` pair draws its realization from the streams of
//! `(seed, trial)`, so all axis values and algorithms see the same user drops
//! and fading. Records are sorted before output, which makes the CSV
//! independent of the worker count.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::coordination::{solve_optimal, CoordinationProblem, Outcome};
use crate::error::{invalid, Error, Result};
use crate::power::mw_to_dbm;
use crate::rzf::{rzf_solve, RzfOutcome};
use crate::scenario::ScenarioConfig;
use crate::solution::BeamformingSolution;

pub const RECORD_HEADER: &str = "axis_value,algorithm,trial,status,p_dynamic_mw,p_static_mw,total_mw,total_dbm,n_multiflow_users,n_bs_only,n_single_sca,infeasible,wall_ms,exchanged_scalars_total";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    NBs,
    NSca,
    Qos,
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "n_bs" => Ok(Axis::NBs),
            "n_sca" => Ok(Axis::NSca),
            "qos" => Ok(Axis::Qos),
            other => Err(Error::Parse(format!("unknown sweep axis '{other}' (expected n_bs, n_sca or qos)"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::NBs => "n_bs",
            Axis::NSca => "n_sca",
            Axis::Qos => "qos",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Optimal,
    Rzf,
    /// Optimal coordination with the SCAs switched off.
    BsOnly,
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "optimal" => Ok(Algorithm::Optimal),
            "rzf" => Ok(Algorithm::Rzf),
            "bs_only" => Ok(Algorithm::BsOnly),
            other => Err(Error::Parse(format!("unknown algorithm '{other}' (expected optimal, rzf or bs_only)"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Optimal => "optimal",
            Algorithm::Rzf => "rzf",
            Algorithm::BsOnly => "bs_only",
        })
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse(format!("'{v}' is not a finite number")))
        })
        .collect()
}

/// Parses a comma-separated list of algorithms without duplicates.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    let mut out: Vec<Algorithm> = Vec::new();
    for part in s.split(',') {
        let a: Algorithm = part.parse()?;
        if out.contains(&a) {
            return Err(Error::Parse(format!("algorithm '{a}' listed twice")));
        }
        out.push(a);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    pub base: ScenarioConfig,
    pub workers: usize,
    /// Use the optimal solution when the RZF allocation is infeasible.
    pub rzf_fallback: bool,
    /// Write measured times to `wall_ms` (otherwise 0, keeping output
    /// reproducible).
    pub record_timing: bool,
}

impl SweepSpec {
    pub fn new(axis: Axis, values: Vec<f64>, trials: usize, algorithms: Vec<Algorithm>, base: ScenarioConfig) -> Self {
        Self { axis, values, trials, algorithms, base, workers: 1, rzf_fallback: false, record_timing: false }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return invalid("sweep values must not be empty");
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("sweep values must be strictly increasing");
        }
        if self.trials == 0 {
            return invalid("trials must be >= 1");
        }
        if self.algorithms.is_empty() {
            return invalid("at least one algorithm is required");
        }
        if self.workers == 0 {
            return invalid("workers must be >= 1");
        }
        if matches!(self.axis, Axis::NBs | Axis::NSca) && self.values.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            return invalid("antenna counts must be nonnegative integers");
        }
        for &v in &self.values {
            self.config_for(v).validate()?;
        }
        Ok(())
    }

    /// Base configuration with the axis set to `value`.
    pub fn config_for(&self, value: f64) -> ScenarioConfig {
        let mut cfg = self.base.clone();
        match self.axis {
            Axis::NBs => cfg.n_bs = value as usize,
            Axis::NSca => cfg.n_sca = value as usize,
            Axis::Qos => cfg.qos_targets = vec![value],
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    Infeasible,
    /// RZF was infeasible and the optimal solution was used instead.
    Fallback,
    /// The solver failed; the message is not kept in the record.
    Error,
}

impl fmt::Display for TrialStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::Fallback => "fallback",
            TrialStatus::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub trial: usize,
    pub status: TrialStatus,
    /// `None` unless a solution exists.
    pub p_dynamic: Option<f64>,
    pub p_static: f64,
    pub num_users: usize,
    pub n_multiflow: usize,
    pub n_bs_only: usize,
    pub n_single_sca: usize,
    /// SCAs that serve more than one user.
    pub n_sca_multi_user: usize,
    pub num_scas: usize,
    pub wall_ms: f64,
    /// Scalars forwarded per SCA (RZF only).
    pub exchanged_per_sca: Vec<usize>,
}

impl TrialRecord {
    pub fn total_mw(&self) -> Option<f64> {
        self.p_dynamic.map(|p| p + self.p_static)
    }

    pub fn total_dbm(&self) -> Option<f64> {
        self.total_mw().map(mw_to_dbm)
    }

    pub fn feasible(&self) -> bool {
        self.p_dynamic.is_some()
    }

    pub fn exchanged_total(&self) -> usize {
        self.exchanged_per_sca.iter().sum()
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.axis_value,
            self.algorithm,
            self.trial,
            self.status,
            opt(self.p_dynamic),
            self.p_static,
            opt(self.total_mw()),
            self.total_dbm().map_or_else(String::new, |x| format!("{x:.6}")),
            self.n_multiflow,
            self.n_bs_only,
            self.n_single_sca,
            u8::from(!self.feasible()),
            self.wall_ms,
            self.exchanged_total(),
        )
    }
}

fn sort_key(r: &TrialRecord) -> (f64, Algorithm, usize) {
    (r.axis_value, r.algorithm, r.trial)
}

/// Records as CSV with [`RECORD_HEADER`].
pub fn records_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(128 * (records.len() + 1));
    out.push_str(RECORD_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

struct Cases {
    multiflow: usize,
    bs_only: usize,
    single_sca: usize,
    sca_multi_user: usize,
}

fn count_cases(solution: &BeamformingSolution, num_scas: usize) -> Cases {
    let mut c = Cases { multiflow: 0, bs_only: 0, single_sca: 0, sca_multi_user: 0 };
    for s in &solution.serving {
        match s.as_slice() {
            [] => {}
            [0] => c.bs_only += 1,
            [_] => c.single_sca += 1,
            _ => c.multiflow += 1,
        }
    }
    c.sca_multi_user = (1..=num_scas).filter(|j| solution.serving.iter().filter(|s| s.contains(j)).count() > 1).count();
    c
}

fn record_from(
    value: f64,
    algorithm: Algorithm,
    trial: usize,
    status: TrialStatus,
    solution: Option<&BeamformingSolution>,
    problem: &CoordinationProblem,
    exchanged_per_sca: Vec<usize>,
) -> TrialRecord {
    let num_scas = problem.num_transmitters() - 1;
    let cases = solution.map(|s| count_cases(s, num_scas));
    TrialRecord {
        axis_value: value,
        algorithm,
        trial,
        status,
        p_dynamic: solution.map(|s| s.p_dynamic),
        p_static: problem.hw.static_power(),
        num_users: problem.num_users(),
        n_multiflow: cases.as_ref().map_or(0, |c| c.multiflow),
        n_bs_only: cases.as_ref().map_or(0, |c| c.bs_only),
        n_single_sca: cases.as_ref().map_or(0, |c| c.single_sca),
        n_sca_multi_user: cases.as_ref().map_or(0, |c| c.sca_multi_user),
        num_scas,
        wall_ms: 0.0,
        exchanged_per_sca,
    }
}

/// Runs every requested algorithm on one realization.
pub fn run_trial(spec: &SweepSpec, value: f64, trial: usize) -> Vec<TrialRecord> {
    let cfg = spec.config_for(value);
    let problem = match CoordinationProblem::from_scenario(&cfg, trial as u64) {
        Ok(p) => p,
        Err(_) => {
            let hw = cfg.hardware_profile();
            return spec
                .algorithms
                .iter()
                .map(|&a| TrialRecord {
                    axis_value: value,
                    algorithm: a,
                    trial,
                    status: TrialStatus::Error,
                    p_dynamic: None,
                    p_static: hw.static_power(),
                    num_users: cfg.num_users(),
                    n_multiflow: 0,
                    n_bs_only: 0,
                    n_single_sca: 0,
                    n_sca_multi_user: 0,
                    num_scas: hw.num_scas(),
                    wall_ms: 0.0,
                    exchanged_per_sca: Vec::new(),
                })
                .collect();
        }
    };
    let num_scas = problem.num_transmitters() - 1;
    let mut optimal_cache: Option<Result<Outcome>> = None;
    let mut out = Vec::with_capacity(spec.algorithms.len());
    for &alg in &spec.algorithms {
        let start = Instant::now();
        let mut rec = match alg {
            Algorithm::Optimal => {
                let res = optimal_cache.get_or_insert_with(|| solve_optimal(&problem));
                optimal_record(value, alg, trial, res, &problem)
            }
            Algorithm::BsOnly => {
                let restricted = problem.restrict(&[0]);
                optimal_record(value, alg, trial, &solve_optimal(&restricted), &restricted)
            }
            Algorithm::Rzf => match rzf_solve(&problem) {
                Ok(RzfOutcome::Solved(r)) => {
                    let exchanged = r.exchanged.iter().skip(1).copied().collect();
                    record_from(value, alg, trial, TrialStatus::Ok, Some(&r.solution), &problem, exchanged)
                }
                Ok(RzfOutcome::Infeasible) if spec.rzf_fallback => {
                    let res = optimal_cache.get_or_insert_with(|| solve_optimal(&problem));
                    let mut rec = optimal_record(value, alg, trial, res, &problem);
                    if rec.feasible() {
                        rec.status = TrialStatus::Fallback;
                    }
                    rec
                }
                Ok(RzfOutcome::Infeasible) => record_from(value, alg, trial, TrialStatus::Infeasible, None, &problem, vec![0; num_scas]),
                Err(_) => record_from(value, alg, trial, TrialStatus::Error, None, &problem, vec![0; num_scas]),
            },
        };
        if spec.record_timing {
            rec.wall_ms = (start.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3;
        }
        out.push(rec);
    }
    out
}

fn optimal_record(value: f64, alg: Algorithm, trial: usize, res: &Result<Outcome>, problem: &CoordinationProblem) -> TrialRecord {
    let num_scas = problem.num_transmitters() - 1;
    match res {
        Ok(Outcome::Solved(s)) => record_from(value, alg, trial, TrialStatus::Ok, Some(&s.solution), problem, vec![0; num_scas]),
        Ok(Outcome::Infeasible(_)) => record_from(value, alg, trial, TrialStatus::Infeasible, None, problem, vec![0; num_scas]),
        Err(_) => record_from(value, alg, trial, TrialStatus::Error, None, problem, vec![0; num_scas]),
    }
}

/// Runs the sweep on `spec.workers` threads; records come back sorted by
/// (axis value, algorithm, trial).
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let tasks: Vec<(f64, usize)> = spec.values.iter().flat_map(|&v| (0..spec.trials).map(move |t| (v, t))).collect();
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(spec.workers).build().map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let mut records: Vec<TrialRecord> = pool.install(|| tasks.par_iter().flat_map_iter(|&(v, t)| run_trial(spec, v, t)).collect());
    records.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).expect("finite axis values"));
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub trials: usize,
    pub feasible: usize,
    pub mean_total_dbm: f64,
    pub std_total_dbm: f64,
    pub se_total_dbm: f64,
    pub mean_total_mw: f64,
    /// Multiflow users over all users of feasible trials.
    pub multiflow_fraction: f64,
    /// SCAs serving more than one user over all SCAs of feasible trials.
    pub sca_multi_user_fraction: f64,
    pub mean_exchanged_total: f64,
    /// Mean scalars forwarded by each SCA.
    pub mean_exchanged_per_sca: Vec<f64>,
}

impl SummaryRow {
    pub fn feasibility_fraction(&self) -> f64 {
        self.feasible as f64 / self.trials as f64
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups records by (axis value, algorithm). Power statistics use feasible
/// trials only.
pub fn aggregate(records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return invalid("no records to aggregate");
    }
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| sort_key(a).partial_cmp(&sort_key(b)).expect("finite axis values"));
    let max_scas = records.iter().map(|r| r.exchanged_per_sca.len()).max().unwrap_or(0);
    let mut rows = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let key = (sorted[start].axis_value, sorted[start].algorithm);
        let mut end = start;
        while end < sorted.len() && (sorted[end].axis_value, sorted[end].algorithm) == key {
            end += 1;
        }
        let group = &sorted[start..end];
        let feasible: Vec<&&TrialRecord> = group.iter().filter(|r| r.feasible()).collect();
        let dbm: Vec<f64> = feasible.iter().filter_map(|r| r.total_dbm()).collect();
        let mw: Vec<f64> = feasible.iter().filter_map(|r| r.total_mw()).collect();
        let (mean_dbm, std_dbm) = mean_std(&dbm);
        let users: usize = feasible.iter().map(|r| r.num_users).sum();
        let scas: usize = feasible.iter().map(|r| r.num_scas).sum();
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let nf = feasible.len().max(1) as f64;
        let mean_exchanged_per_sca = (0..max_scas)
            .map(|s| feasible.iter().map(|r| r.exchanged_per_sca.get(s).copied().unwrap_or(0) as f64).sum::<f64>() / nf)
            .collect();
        rows.push(SummaryRow {
            axis_value: key.0,
            algorithm: key.1,
            trials: group.len(),
            feasible: feasible.len(),
            mean_total_dbm: mean_dbm,
            std_total_dbm: std_dbm,
            se_total_dbm: std_dbm / (dbm.len() as f64).sqrt(),
            mean_total_mw: mean_std(&mw).0,
            multiflow_fraction: ratio(feasible.iter().map(|r| r.n_multiflow).sum(), users),
            sca_multi_user_fraction: ratio(feasible.iter().map(|r| r.n_sca_multi_user).sum(), scas),
            mean_exchanged_total: feasible.iter().map(|r| r.exchanged_total() as f64).sum::<f64>() / nf,
            mean_exchanged_per_sca,
        });
        start = end;
    }
    Ok(rows)
}

/// Summary CSV with one `exchanged_scalars_sca_<j>` column per SCA.
pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let max_scas = rows.iter().map(|r| r.mean_exchanged_per_sca.len()).max().unwrap_or(0);
    let mut out = String::from(
        "axis_value,algorithm,trials,feasible,feasibility_fraction,mean_total_dbm,std_total_dbm,se_total_dbm,mean_total_mw,multiflow_fraction,sca_multi_user_fraction,exchanged_scalars_total",
    );
    for j in 1..=max_scas {
        let _ = write!(out, ",exchanged_scalars_sca_{j}");
    }
    out.push('\n');
    let num = |x: f64| if x.is_finite() { format!("{x:.6}") } else { String::new() };
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis_value,
            r.algorithm,
            r.trials,
            r.feasible,
            num(r.feasibility_fraction()),
            num(r.mean_total_dbm),
            num(r.std_total_dbm),
            num(r.se_total_dbm),
            num(r.mean_total_mw),
            num(r.multiflow_fraction),
            num(r.sca_multi_user_fraction),
            num(r.mean_exchanged_total),
        );
        for j in 0..max_scas {
            let _ = write!(out, ",{}", num(r.mean_exchanged_per_sca.get(j).copied().unwrap_or(0.0)));
        }
        out.push('\n');
    }
    out
}
