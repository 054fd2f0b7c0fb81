//! Monte Carlo driver: configuration, reproducible parallel trials, CSV and
//! manifest output, and threshold estimation from error-rate curves.

use crate::contraction::{ContractionConfig, Engine};
use crate::ec::{run_round, EcError};
use crate::layout::{build_layout, LayoutError};
use crate::noise::{make_channel, Approximation, Channel, NoiseError, NoiseModel};
use crate::peps::build_bell_density_network;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{width}x{length}: {source}")]
    Round { width: usize, length: usize, source: EcError },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("insufficient data: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Channel sweep: kind, strength values, approximation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub approx: Approximation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub width: usize,
    pub length: usize,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub engine: ContractionConfig,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples < 1 {
            return Err(ExperimentError::Config("samples must be at least 1".into()));
        }
        if self.channel.values.is_empty() {
            return Err(ExperimentError::Config("channel.values is empty".into()));
        }
        self.engine.validate().map_err(|e| ExperimentError::Config(e.to_string()))?;
        for &v in &self.channel.values {
            make_channel::<f64>(&NoiseModel::from_name(&self.channel.kind, v)?)?;
        }
        Ok(())
    }

    /// Stable identifier of the configuration and seed.
    pub fn run_id(&self) -> String {
        let text = serde_json::to_string(&(self, self.seed)).unwrap_or_default();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run_id: String,
    #[serde(rename = "W")]
    pub width: usize,
    #[serde(rename = "L")]
    pub length: usize,
    pub channel: String,
    pub param: f64,
    pub approx: String,
    pub engine: String,
    pub chi: usize,
    pub trial: u64,
    pub syndrome_hex: String,
    pub correction: String,
    pub err2: f64,
    pub errdiamond: f64,
    /// Wall time of the trial; the only field that is not reproducible.
    pub ms: f64,
}

/// Per-trial generator: the master seed with a stream selected by sweep
/// point and trial index, independent of scheduling.
pub fn trial_rng(seed: u64, point: usize, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 40) | trial);
    rng
}

/// The simulated channel for one sweep value.
pub fn channel_for(spec: &ChannelSpec, value: f64) -> Result<Channel<f64>, ExperimentError> {
    let exact = make_channel::<f64>(&NoiseModel::from_name(&spec.kind, value)?)?;
    Ok(spec.approx.apply(&exact)?)
}

const CHUNK: usize = 256;

/// Runs `samples` rounds per sweep value, calling `sink` with records in
/// (value, trial) order as chunks complete.
pub fn run_trials(cfg: &ExperimentConfig, mut sink: impl FnMut(&TrialRecord) -> Result<(), ExperimentError>) -> Result<(), ExperimentError> {
    cfg.validate()?;
    let layout = build_layout(cfg.width, cfg.length)?;
    let template = build_bell_density_network::<f64>(&layout);
    let run_id = cfg.run_id();
    let chi = if cfg.engine.engine == Engine::BoundaryMps { cfg.engine.chi } else { 0 };
    for (point, &value) in cfg.channel.values.iter().enumerate() {
        let channel = channel_for(&cfg.channel, value)?;
        let mut start = 0usize;
        while start < cfg.samples {
            let end = (start + CHUNK).min(cfg.samples);
            let chunk: Vec<Result<TrialRecord, ExperimentError>> = (start..end)
                .into_par_iter()
                .map(|trial| {
                    let t0 = Instant::now();
                    let mut rng = trial_rng(cfg.seed, point, trial as u64);
                    let r = run_round(&template, &channel, &mut rng, &cfg.engine).map_err(|source| ExperimentError::Round {
                        width: cfg.width,
                        length: cfg.length,
                        source,
                    })?;
                    Ok(TrialRecord {
                        run_id: run_id.clone(),
                        width: cfg.width,
                        length: cfg.length,
                        channel: cfg.channel.kind.clone(),
                        param: value,
                        approx: cfg.channel.approx.name().to_string(),
                        engine: cfg.engine.engine.name().to_string(),
                        chi,
                        trial: trial as u64,
                        syndrome_hex: r.syndrome.to_hex(),
                        correction: r.correction.to_string(),
                        err2: r.error_2norm,
                        errdiamond: r.error_diamond,
                        ms: t0.elapsed().as_secs_f64() * 1e3,
                    })
                })
                .collect();
            for rec in chunk {
                sink(&rec?)?;
            }
            start = end;
        }
    }
    Ok(())
}

/// Collects all records of a run in memory.
pub fn collect_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut out = Vec::new();
    run_trials(cfg, |r| {
        out.push(r.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Run manifest written next to the CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    pub honesty_sample_version: u32,
    pub csv: String,
    pub records: usize,
    pub wall_seconds: f64,
}

/// Runs `cfg`, streaming records to `csv_path` and writing
/// `<csv_path>.manifest.json`.
pub fn run_to_csv(cfg: &ExperimentConfig, csv_path: &Path) -> Result<RunManifest, ExperimentError> {
    let t0 = Instant::now();
    let mut w = csv::Writer::from_path(csv_path)?;
    let mut n = 0usize;
    run_trials(cfg, |r| {
        w.serialize(r)?;
        n += 1;
        Ok(())
    })?;
    w.flush()?;
    let manifest = RunManifest {
        run_id: cfg.run_id(),
        config: cfg.clone(),
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        honesty_sample_version: crate::noise::HONESTY_SAMPLE_VERSION,
        csv: csv_path.display().to_string(),
        records: n,
        wall_seconds: t0.elapsed().as_secs_f64(),
    };
    let mpath = manifest_path(csv_path);
    std::fs::write(&mpath, serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

pub fn manifest_path(csv_path: &Path) -> std::path::PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".manifest.json");
    s.into()
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, ExperimentError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Mean logical error of one lattice size at one parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub width: usize,
    pub length: usize,
    pub param: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl CurvePoint {
    pub fn from_samples(width: usize, length: usize, param: f64, errors: &[f64]) -> Self {
        let n = errors.len();
        let mean = errors.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { width, length, param, mean, stderr: (var / n as f64).sqrt(), samples: n }
    }
}

/// Groups records into curves of mean diamond error.
pub fn curves_from_records(records: &[TrialRecord]) -> Vec<CurvePoint> {
    let mut groups: BTreeMap<(usize, usize, u64), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.width, r.length, r.param.to_bits())).or_default().push(r.errdiamond);
    }
    let mut out: Vec<CurvePoint> =
        groups.into_iter().map(|((w, l, p), e)| CurvePoint::from_samples(w, l, f64::from_bits(p), &e)).collect();
    out.sort_by(|a, b| (a.width * a.length, a.width, a.param).partial_cmp(&(b.width * b.length, b.width, b.param)).unwrap());
    out
}

/// Crossing of one (smaller, larger) size pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub small: (usize, usize),
    pub large: (usize, usize),
    /// Roots where the larger lattice goes from better to worse.
    pub upward: Vec<f64>,
    /// Roots in the opposite direction.
    pub downward: Vec<f64>,
    pub value: Option<f64>,
    pub uncertainty: Option<f64>,
    /// True when the larger lattice is better at every point.
    pub larger_always_better: bool,
    pub larger_always_worse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThresholdOutcome {
    Crossing { value: f64, uncertainty: f64 },
    /// No consistent crossing; optional bounds on the threshold when every
    /// size pair agrees on one side of the swept range.
    NoClearTransition { lower: Option<f64>, upper: Option<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub outcome: ThresholdOutcome,
    pub pairs: Vec<PairCrossing>,
    pub curves: Vec<CurvePoint>,
}

fn pair_crossing(small: &[&CurvePoint], large: &[&CurvePoint]) -> PairCrossing {
    let mut pts = Vec::new();
    for s in small {
        if let Some(l) = large.iter().find(|l| l.param == s.param) {
            pts.push((s.param, l.mean - s.mean, (l.stderr.powi(2) + s.stderr.powi(2)).sqrt()));
        }
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut upward = Vec::new();
    let mut downward = Vec::new();
    let mut sigmas = Vec::new();
    for win in pts.windows(2) {
        let ((p1, d1, s1), (p2, d2, s2)) = (win[0], win[1]);
        let h = p2 - p1;
        if (d1 < 0.0 && d2 >= 0.0) || (d1 > 0.0 && d2 <= 0.0) {
            let t = d1 / (d1 - d2);
            let x = p1 + t * h;
            let denom = (d1 - d2).powi(2);
            let g1 = h * (-d2) / denom;
            let g2 = h * d1 / denom;
            let stat = ((g1 * s1).powi(2) + (g2 * s2).powi(2)).sqrt();
            let interp = h / 12f64.sqrt();
            if d1 < 0.0 {
                upward.push(x);
                sigmas.push((stat.powi(2) + interp.powi(2)).sqrt());
            } else {
                downward.push(x);
            }
        }
    }
    let (value, uncertainty) = if !upward.is_empty() && downward.len() + 1 >= upward.len() && downward.len() <= upward.len() {
        let v = upward.iter().sum::<f64>() / upward.len() as f64;
        let all: Vec<f64> = upward.iter().chain(&downward).copied().collect();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sig = sigmas.iter().map(|s| s * s).sum::<f64>().sqrt() / sigmas.len() as f64;
        (Some(v), Some((sig.powi(2) + ((hi - lo) / 2.0).powi(2)).sqrt()))
    } else {
        (None, None)
    };
    PairCrossing {
        small: (small[0].width, small[0].length),
        large: (large[0].width, large[0].length),
        larger_always_better: !pts.is_empty() && pts.iter().all(|p| p.1 < 0.0),
        larger_always_worse: !pts.is_empty() && pts.iter().all(|p| p.1 > 0.0),
        upward,
        downward,
        value,
        uncertainty,
    }
}

/// Threshold from curves of at least two sizes with at least three sweep
/// points each.
///
/// Every (smaller, larger) pair is crossed by linear interpolation of the
/// error difference. Pair uncertainty combines propagated standard errors
/// with the interpolation error `h/√12` of the sweep spacing `h`, and grows
/// to cover multiple roots. The pairs are consistent when every two crossings
/// agree within three combined standard deviations; otherwise, or when a
/// pair has no upward crossing, the outcome is "no clear transition".
pub fn estimate_threshold(points: &[CurvePoint]) -> Result<ThresholdEstimate, ExperimentError> {
    let mut by_size: BTreeMap<(usize, usize, usize), Vec<&CurvePoint>> = BTreeMap::new();
    for p in points {
        by_size.entry((p.width * p.length, p.width, p.length)).or_default().push(p);
    }
    if by_size.len() < 2 {
        return Err(ExperimentError::Data("threshold estimation needs at least two lattice sizes".into()));
    }
    if let Some((k, v)) = by_size.iter().find(|(_, v)| v.len() < 3) {
        return Err(ExperimentError::Data(format!("size {}x{} has only {} sweep points", k.1, k.2, v.len())));
    }
    let sizes: Vec<&Vec<&CurvePoint>> = by_size.values().collect();
    let mut pairs = Vec::new();
    for i in 0..sizes.len() {
        for j in i + 1..sizes.len() {
            pairs.push(pair_crossing(sizes[i], sizes[j]));
        }
    }
    let outcome = if pairs.iter().all(|p| p.value.is_some()) {
        let xs: Vec<(f64, f64)> = pairs.iter().map(|p| (p.value.unwrap(), p.uncertainty.unwrap())).collect();
        let consistent = xs
            .iter()
            .enumerate()
            .all(|(i, a)| xs[i + 1..].iter().all(|b| (a.0 - b.0).abs() <= 3.0 * (a.1.powi(2) + b.1.powi(2)).sqrt()));
        if consistent {
            let value = xs.iter().map(|x| x.0).sum::<f64>() / xs.len() as f64;
            let rms = (xs.iter().map(|x| x.1 * x.1).sum::<f64>() / xs.len() as f64).sqrt();
            let lo = xs.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            let hi = xs.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
            ThresholdOutcome::Crossing { value, uncertainty: (rms.powi(2) + ((hi - lo) / 2.0).powi(2)).sqrt() }
        } else {
            ThresholdOutcome::NoClearTransition { lower: None, upper: None }
        }
    } else {
        let pmin = points.iter().map(|p| p.param).fold(f64::INFINITY, f64::min);
        let pmax = points.iter().map(|p| p.param).fold(f64::NEG_INFINITY, f64::max);
        let lower = pairs.iter().all(|p| p.larger_always_better).then_some(pmax);
        let upper = pairs.iter().all(|p| p.larger_always_worse).then_some(pmin);
        ThresholdOutcome::NoClearTransition { lower, upper }
    };
    Ok(ThresholdEstimate { outcome, pairs, curves: points.to_vec() })
}
