//! Monte Carlo sweeps: one axis of the config varied over a value list,
//! every scheme solved on the same channel draws, per-point statistics
//! written as CSV together with plot-ready tables and a run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netmodel::{generate_channels, NetworkConfig};
use crate::sca::{solve_scheme, ScaSettings, Scheme};

pub const VERSION: &str = concat!("crsma ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    BsPowerDbm,
    CcuPowerDbm,
    SiGainDb,
    /// δ_w of the first CEU; the others stay at their base values.
    DisparityW,
    FronthaulBpshz,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::BsPowerDbm => "bs_power_dbm",
            Axis::CcuPowerDbm => "ccu_power_dbm",
            Axis::SiGainDb => "si_gain_db",
            Axis::DisparityW => "disparity_w",
            Axis::FronthaulBpshz => "fronthaul_bpshz",
        }
    }

    pub fn apply(self, cfg: &mut NetworkConfig, value: f64) {
        match self {
            Axis::BsPowerDbm => cfg.bs_power_dbm = value,
            Axis::CcuPowerDbm => cfg.ccu_power_dbm = value,
            Axis::SiGainDb => cfg.si_gain_db = value,
            Axis::DisparityW => {
                if let Some(d) = cfg.disparity_w.first_mut() {
                    *d = value;
                }
            }
            Axis::FronthaulBpshz => cfg.fronthaul_bpshz = value,
        }
    }
}

fn default_trials() -> usize {
    100
}

fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Stem of the output files.
    pub name: String,
    pub base: NetworkConfig,
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub spec: ExperimentSpec,
}

impl ExperimentSpec {
    /// Accepts either a bare spec or a manifest written by [`report`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Manifest(Manifest),
            Spec(ExperimentSpec),
        }
        let spec = match serde_json::from_str::<Either>(text) {
            Ok(Either::Manifest(m)) => m.spec,
            Ok(Either::Spec(s)) => s,
            // Re-parse as a bare spec for a precise error message.
            Err(_) => serde_json::from_str::<ExperimentSpec>(text)?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidExperiment(msg));
        if self.schemes.is_empty() {
            return bad("scheme subset is empty".into());
        }
        if self.values.is_empty() {
            return bad("sweep value list is empty".into());
        }
        if self.values.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.n_trials == 0 {
            return bad("n_trials must be at least 1".into());
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("unusable experiment name {:?}", self.name));
        }
        for &v in &self.values {
            self.config_at(v).validate()?;
        }
        Ok(())
    }

    pub fn config_at(&self, value: f64) -> NetworkConfig {
        let mut cfg = self.base.clone();
        self.axis.apply(&mut cfg, value);
        cfg
    }
}

/// Seed of trial `trial`. Every sweep point and scheme reuses the same
/// draws, so differences between points are paired.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = master ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub value: f64,
    pub scheme: Scheme,
    pub trial: usize,
    pub seed: u64,
    /// `None` when the SCA failed for every start.
    pub rate: Option<f64>,
    pub max_residual: Option<f64>,
    /// Time fraction picked by the HD grid search.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_param: String,
    pub value: f64,
    pub scheme: Scheme,
    pub mean_rate_bpshz: f64,
    pub std_rate_bpshz: f64,
    pub n_ok: usize,
    pub n_fail: usize,
    pub master_seed: u64,
}

impl ResultRow {
    pub fn std_error(&self) -> f64 {
        if self.n_ok == 0 {
            f64::NAN
        } else {
            self.std_rate_bpshz / (self.n_ok as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub trials: Vec<TrialRecord>,
}

impl ResultTable {
    pub fn row(&self, value: f64, scheme: Scheme) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.value == value && r.scheme == scheme)
    }

    /// Per-trial rates in trial order; failed trials are `None`.
    pub fn rates(&self, value: f64, scheme: Scheme) -> Vec<Option<f64>> {
        self.trials
            .iter()
            .filter(|t| t.value == value && t.scheme == scheme)
            .map(|t| t.rate)
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

pub fn run(spec: &ExperimentSpec, settings: &ScaSettings) -> Result<ResultTable> {
    spec.validate()?;
    let jobs: Vec<(f64, Scheme, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| {
            spec.schemes
                .iter()
                .flat_map(move |&s| (0..spec.n_trials).map(move |t| (v, s, t)))
        })
        .collect();
    info!("{}: {} solves", spec.name, jobs.len());
    let trials: Vec<TrialRecord> = jobs
        .par_iter()
        .map(|&(value, scheme, trial)| {
            let cfg = spec.config_at(value);
            let seed = trial_seed(spec.master_seed, trial);
            let outcome = generate_channels(&cfg, seed).and_then(|chan| solve_scheme(scheme, &chan, &cfg, settings));
            let (rate, max_residual, theta) = match outcome {
                Ok(o) => (Some(o.max_min()), Some(o.report.max_residual()), Some(o.theta)),
                Err(e) => {
                    warn!("{} = {value}, {}, trial {trial}: {e}", spec.axis.name(), scheme.name());
                    (None, None, None)
                }
            };
            TrialRecord {
                value,
                scheme,
                trial,
                seed,
                rate,
                max_residual,
                theta,
            }
        })
        .collect();

    let mut rows = Vec::new();
    for chunk in trials.chunks(spec.n_trials) {
        let ok: Vec<f64> = chunk.iter().filter_map(|t| t.rate).collect();
        let (mean, std) = mean_std(&ok);
        rows.push(ResultRow {
            sweep_param: spec.axis.name().into(),
            value: chunk[0].value,
            scheme: chunk[0].scheme,
            mean_rate_bpshz: mean,
            std_rate_bpshz: std,
            n_ok: ok.len(),
            n_fail: chunk.len() - ok.len(),
            master_seed: spec.master_seed,
        });
    }
    Ok(ResultTable {
        spec: spec.clone(),
        rows,
        trials,
    })
}

/// Files written by [`report`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub table: PathBuf,
    pub plot: PathBuf,
    pub manifest: PathBuf,
}

/// Writes the result table, a plot table (one row per sweep value, mean and
/// standard deviation per scheme) and the manifest.
pub fn report(table: &ResultTable, dir: &Path) -> Result<ReportFiles> {
    if table.rows.is_empty() {
        return Err(Error::InvalidExperiment("empty result table".into()));
    }
    fs::create_dir_all(dir)?;
    let name = &table.spec.name;
    let files = ReportFiles {
        table: dir.join(format!("{name}.csv")),
        plot: dir.join(format!("{name}_plot.csv")),
        manifest: dir.join(format!("{name}_manifest.json")),
    };

    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    fs::write(&files.table, buf)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![table.spec.axis.name().to_string()];
    for s in &table.spec.schemes {
        header.push(format!("{}_mean", s.name()));
        header.push(format!("{}_std", s.name()));
    }
    w.write_record(&header)?;
    for &v in &table.spec.values {
        let mut rec = vec![v.to_string()];
        for &s in &table.spec.schemes {
            let row = table.row(v, s).expect("row for every point and scheme");
            rec.push(row.mean_rate_bpshz.to_string());
            rec.push(row.std_rate_bpshz.to_string());
        }
        w.write_record(&rec)?;
    }
    fs::write(&files.plot, w.into_inner().map_err(|e| e.into_error())?)?;

    let manifest = Manifest {
        version: VERSION.into(),
        spec: table.spec.clone(),
    };
    fs::write(&files.manifest, serde_json::to_string_pretty(&manifest)?)?;
    Ok(files)
}
