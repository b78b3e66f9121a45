//! Experiment configuration, Monte-Carlo sweeps, assignment-based scoring and
//! CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DoaError, Result};
use crate::fusion::{optimal_assignment, MISS_PENALTY_DEG};
use crate::geometry::UlaConfig;
use crate::pipelines::{run_method, FrontEnd, Method, MethodOutput, MethodParams};
use crate::simulate::{gen_source, random_angles, synthesize, MultichannelRecording, NoiseKind, Scene, SceneSource, SourceKind};

/// Array geometry section of a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub num_mics: usize,
    pub subarray_size: usize,
    pub mic_spacing: f64,
    pub speed_of_sound: f64,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            num_mics: 16,
            subarray_size: 6,
            mic_spacing: 0.02,
            speed_of_sound: 340.0,
        }
    }
}

impl ArraySection {
    pub fn build(&self) -> Result<UlaConfig<f64>> {
        UlaConfig::new(self.num_mics, self.subarray_size, self.mic_spacing, self.speed_of_sound)
    }
}

/// Base scene shared by all trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub sample_rate: f64,
    pub duration: f64,
    pub source_kind: SourceKind,
    pub noise_kind: NoiseKind,
    /// SNR used by the snapshot sweep and single-scene commands; absent
    /// means noiseless.
    pub snr_db: Option<f64>,
    pub sir_db: f64,
    pub min_separation: f64,
    /// Fixed DOAs for the single-scene commands; drawn at random otherwise.
    pub angles: Option<Vec<f64>>,
}

impl Default for SceneSection {
    fn default() -> Self {
        Self {
            sample_rate: 16000.0,
            duration: 1.0,
            source_kind: SourceKind::White,
            noise_kind: NoiseKind::White,
            snr_db: Some(5.0),
            sir_db: 0.0,
            min_separation: 5.0,
            angles: None,
        }
    }
}

/// Sweep axes and bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub methods: Vec<Method>,
    pub snr_db: Vec<f64>,
    pub snapshots: Vec<usize>,
    pub sources: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            snapshots: vec![11, 21, 31, 41, 51],
            sources: vec![2],
            trials: 20,
            master_seed: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: SweepSection,
    pub array: ArraySection,
    pub scene: SceneSection,
    pub params: MethodParams,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| DoaError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config; a relative `output_dir` resolves against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| DoaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.experiment.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.experiment.output_dir = dir.join(&cfg.experiment.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        let bad = |what: &str| Err(DoaError::InvalidConfig(what.to_string()));
        if e.trials == 0 {
            return bad("trials must be at least 1");
        }
        if e.methods.is_empty() || e.snr_db.is_empty() || e.snapshots.is_empty() || e.sources.is_empty() {
            return bad("every sweep axis needs at least one value");
        }
        if e.sources.iter().any(|&q| q == 0 || q > 4) {
            return bad("source counts must be in 1..=4");
        }
        if e.snapshots.contains(&0) {
            return bad("snapshot counts must be positive");
        }
        let s = &self.scene;
        if !(s.sample_rate > 0.0 && s.duration > 0.0 && s.min_separation >= 0.0) {
            return bad("scene sample_rate and duration must be positive");
        }
        if let Some(a) = &s.angles {
            if a.is_empty() || a.iter().any(|x| !(0.0..=180.0).contains(x)) {
                return bad("scene angles must lie in [0, 180]");
            }
        }
        let cfg = self.array.build()?;
        if e.sources.iter().chain(s.angles.iter().map(Vec::len).collect::<Vec<_>>().iter()).any(|&q| q >= cfg.subarray_size()) {
            return bad("source count must be below the sub-array size");
        }
        self.params.validate()
    }
}

/// Per-source errors after optimal assignment, each capped at the miss
/// penalty; unmatched truths score the penalty.
pub fn match_and_score(estimates: &[f64], truth: &[f64]) -> Vec<f64> {
    optimal_assignment(estimates, truth)
        .into_iter()
        .enumerate()
        .map(|(q, e)| match e {
            Some(i) => (estimates[i] - truth[q]).abs().min(MISS_PENALTY_DEG),
            None => MISS_PENALTY_DEG,
        })
        .collect()
}

/// `sqrt(mean(e^2))`.
pub fn rmse(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}

/// Which sweep a report row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Snr,
    Snapshots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseRow {
    pub axis: Axis,
    pub method: Method,
    pub sources: usize,
    pub snr_db: Option<f64>,
    pub snapshots: usize,
    pub rmse: f64,
    pub detection_rate: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RmseReport {
    pub rows: Vec<RmseRow>,
}

impl RmseReport {
    pub fn rows_for(&self, axis: Axis) -> impl Iterator<Item = &RmseRow> {
        self.rows.iter().filter(move |r| r.axis == axis)
    }
}

/// Deterministic seed for trial `trial` of a cell with `sources` sources.
/// Independent of SNR and snapshot count, so sweeps share scenes.
pub fn trial_seed(master: u64, sources: usize, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((sources as u64) << 32) | trial as u64);
    rng.random()
}

/// Builds the scene of one trial: random (or fixed) angles and per-source
/// waveforms derived from `seed`.
pub fn trial_scene(section: &SceneSection, sources: usize, snr_db: Option<f64>, seed: u64) -> Result<Scene<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = match &section.angles {
        Some(a) => a.clone(),
        None => random_angles(sources, section.min_separation, &mut rng),
    };
    let sources = angles
        .iter()
        .enumerate()
        .map(|(q, &angle)| {
            Ok(SceneSource {
                angle,
                waveform: gen_source(&section.source_kind, section.duration, section.sample_rate, seed.wrapping_add(1 + q as u64))?,
                kind: section.source_kind.tag(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scene {
        sample_rate: section.sample_rate,
        sources,
        noise_kind: section.noise_kind,
        snr_db,
        sir_db: section.sir_db,
        seed: rng.random(),
    })
}

/// Score of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub errors: Vec<f64>,
    pub detected: usize,
}

/// A failed method counts as detecting nothing.
fn score(estimates: &[f64], truth: &[f64]) -> TrialScore {
    let errors = match_and_score(estimates, truth);
    let detected = errors.iter().filter(|&&e| e < MISS_PENALTY_DEG).count();
    TrialScore { errors, detected }
}

/// Runs `methods` on one synthesized recording with `snapshots` frames.
pub fn run_trial(
    rec: &MultichannelRecording<f64>,
    cfg: &UlaConfig<f64>,
    params: &MethodParams,
    snapshots: usize,
    methods: &[Method],
) -> Vec<TrialScore> {
    let truth = rec.ground_truth.as_ref().map(|g| g.angles.clone()).unwrap_or_default();
    let params = MethodParams {
        snapshots,
        sources: truth.len(),
        ..params.clone()
    };
    match FrontEnd::prepare(rec, cfg, &params) {
        Ok(fe) => methods
            .iter()
            .map(|&m| score(&run_method(m, &fe).map(|o| o.estimates).unwrap_or_default(), &truth))
            .collect(),
        Err(_) => methods.iter().map(|_| score(&[], &truth)).collect(),
    }
}

/// Aggregates trials into one row per method.
fn aggregate(axis: Axis, methods: &[Method], sources: usize, snr_db: Option<f64>, snapshots: usize, trials: &[Vec<TrialScore>]) -> Vec<RmseRow> {
    methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let errors: Vec<f64> = trials.iter().flat_map(|t| t[i].errors.iter().copied()).collect();
            let detected: usize = trials.iter().map(|t| t[i].detected).sum();
            RmseRow {
                axis,
                method,
                sources,
                snr_db,
                snapshots,
                rmse: rmse(&errors),
                detection_rate: if errors.is_empty() { 0.0 } else { detected as f64 / errors.len() as f64 },
                trials: trials.len(),
            }
        })
        .collect()
}

/// Runs `trials` seeded scenes of one cell in parallel; results come back in
/// trial order.
fn run_cell(config: &ExperimentConfig, cfg: &UlaConfig<f64>, sources: usize, snr_db: Option<f64>, snapshots: usize) -> Result<Vec<Vec<TrialScore>>> {
    let e = &config.experiment;
    (0..e.trials)
        .into_par_iter()
        .map(|t| {
            let scene = trial_scene(&config.scene, sources, snr_db, trial_seed(e.master_seed, sources, t))?;
            let rec = synthesize(&scene, cfg)?;
            Ok(run_trial(&rec, cfg, &config.params, snapshots, &e.methods))
        })
        .collect()
}

/// Both sweeps: SNR at the configured snapshot count, and snapshot count at
/// the scene SNR.
pub fn evaluate(config: &ExperimentConfig) -> Result<RmseReport> {
    config.validate()?;
    let cfg = config.array.build()?;
    let e = &config.experiment;
    let mut rows = Vec::new();
    for &q in &e.sources {
        for &snr in &e.snr_db {
            let trials = run_cell(config, &cfg, q, Some(snr), config.params.snapshots)?;
            rows.extend(aggregate(Axis::Snr, &e.methods, q, Some(snr), config.params.snapshots, &trials));
        }
        for &j in &e.snapshots {
            let trials = run_cell(config, &cfg, q, config.scene.snr_db, j)?;
            rows.extend(aggregate(Axis::Snapshots, &e.methods, q, config.scene.snr_db, j, &trials));
        }
    }
    Ok(RmseReport { rows })
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..9).contains(&exp) {
        trim(format!("{x:.*}", (8 - exp).max(0) as usize))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DoaError + '_ {
    move |source| DoaError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_rmse_csv(path: &Path, report: &RmseReport, axis: Axis) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["method", "sources", "snr_db", "snapshots", "rmse_deg", "detection_rate", "trials"])?;
    for r in report.rows_for(axis) {
        w.write_record([
            r.method.tag().to_string(),
            r.sources.to_string(),
            opt(r.snr_db),
            r.snapshots.to_string(),
            fmt_sig(r.rmse),
            fmt_sig(r.detection_rate),
            r.trials.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_spectrum_csv(path: &Path, outputs: &[MethodOutput<f64>]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["method", "angle_deg", "normalized_spectrum"])?;
    for o in outputs {
        for (a, v) in o.spectrum.angles.iter().zip(&o.spectrum.values) {
            w.write_record([o.method.tag().to_string(), fmt_sig(*a), fmt_sig(*v)])?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// One row per (iteration, source, window).
pub fn write_trace_csv(path: &Path, output: Option<&MethodOutput<f64>>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "source", "theta_c", "window", "ref_bin_hz", "e_overall"])?;
    if let Some(it) = output.and_then(|o| o.iteration.as_ref()) {
        for rec in &it.trace {
            for (q, theta) in rec.corrected.iter().enumerate() {
                for (win, f) in rec.ref_freqs.iter().enumerate() {
                    w.write_record([
                        rec.iteration.to_string(),
                        q.to_string(),
                        opt(*theta),
                        win.to_string(),
                        opt(*f),
                        opt(rec.overall_error),
                    ])?;
                }
            }
        }
    }
    w.flush().map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// The single scene used by `spectrum` and `simulate`: fixed angles if
/// configured, else the first trial's draw for the first source count.
pub fn showcase_recording(config: &ExperimentConfig) -> Result<MultichannelRecording<f64>> {
    let cfg = config.array.build()?;
    let sources = config.scene.angles.as_ref().map_or(config.experiment.sources[0], Vec::len);
    let seed = trial_seed(config.experiment.master_seed, sources, 0);
    let scene = trial_scene(&config.scene, sources, config.scene.snr_db, seed)?;
    synthesize(&scene, &cfg)
}

/// Runs every configured method on the showcase scene.
pub fn showcase_outputs(config: &ExperimentConfig) -> Result<Vec<MethodOutput<f64>>> {
    let cfg = config.array.build()?;
    let rec = showcase_recording(config)?;
    let truth = rec.ground_truth.as_ref().map_or(0, |g| g.angles.len());
    let params = MethodParams {
        sources: truth,
        ..config.params.clone()
    };
    let fe = FrontEnd::prepare(&rec, &cfg, &params)?;
    config.experiment.methods.iter().map(|&m| run_method(m, &fe)).collect()
}

/// Writes `music_spectrum.csv` and `iteration_trace.csv` for the showcase
/// scene.
pub fn write_spectrum_outputs(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.experiment.output_dir;
    ensure_dir(dir)?;
    let outputs = showcase_outputs(config)?;
    let spectrum = dir.join("music_spectrum.csv");
    let trace = dir.join("iteration_trace.csv");
    write_spectrum_csv(&spectrum, &outputs)?;
    write_trace_csv(&trace, outputs.iter().find(|o| o.method == Method::SsppWemFss))?;
    Ok(vec![spectrum, trace])
}

/// Full experiment: both RMSE sweeps plus the showcase spectrum and trace.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(RmseReport, Vec<PathBuf>)> {
    let dir = &config.experiment.output_dir;
    ensure_dir(dir)?;
    let report = evaluate(config)?;
    let snr = dir.join("rmse_vs_snr.csv");
    let snaps = dir.join("rmse_vs_snapshots.csv");
    write_rmse_csv(&snr, &report, Axis::Snr)?;
    write_rmse_csv(&snaps, &report, Axis::Snapshots)?;
    let mut files = vec![snr, snaps];
    files.extend(write_spectrum_outputs(config)?);
    Ok((report, files))
}

/// Writes the showcase recording as one multichannel WAV plus per-mic files.
pub fn export_simulation(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &config.experiment.output_dir;
    ensure_dir(dir)?;
    let rec = showcase_recording(config)?;
    let all = dir.join("array.wav");
    crate::wav::write_multichannel(&all, &rec)?;
    let mics = dir.join("mics");
    ensure_dir(&mics)?;
    crate::wav::write_per_mic(&mics, &rec)?;
    Ok(vec![all, mics])
}
