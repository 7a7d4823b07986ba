//! Matched-seed solver comparisons with persisted traces.
//!
//! Repetition `r` generates its instance from `derive_seed(gen.seed, r)` and
//! runs every method with solver seed `derive_seed(cfg.seed, r)`, so methods
//! that share a base seed also share their sketch, clustering and paving
//! streams within a repetition.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::{gen_clustered_system, GenSpec, GeneratedSystem};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::solvers::{read_trace_csv, solve, write_trace_csv, SolverConfig, TraceRecord};
use crate::stats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub gen: GenSpec,
    pub methods: Vec<SolverConfig>,
    pub repetitions: usize,
    pub output_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.gen.validate()?;
        if self.repetitions == 0 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidArgument("at least one method is required".into()));
        }
        Ok(())
    }

    /// Run labels: the method name, suffixed with the position when a method
    /// appears more than once.
    pub fn labels(&self) -> Vec<String> {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for m in &self.methods {
            *counts.entry(m.method.name()).or_default() += 1;
        }
        self.methods
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let name = m.method.name();
                if counts[name] > 1 {
                    format!("{name}-{i}")
                } else {
                    name.to_string()
                }
            })
            .collect()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// The instance of repetition `rep`.
pub fn instance_for_rep(gen: &GenSpec, rep: usize) -> Result<GeneratedSystem> {
    gen_clustered_system(&GenSpec {
        seed: derive_seed(gen.seed, rep as u64),
        ..gen.clone()
    })
}

/// Solver configuration of repetition `rep`.
pub fn config_for_rep(cfg: &SolverConfig, rep: usize) -> SolverConfig {
    SolverConfig {
        seed: derive_seed(cfg.seed, rep as u64),
        ..cfg.clone()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iters: usize,
    /// First traced iteration with residual at or below the tolerance.
    pub iters_to_tol: Option<usize>,
    pub final_residual: f64,
    pub final_error: Option<f64>,
    pub total_rows_touched: u64,
    pub wall_nanos: u64,
}

impl RunSummary {
    pub fn from_trace(trace: &[TraceRecord], tol: f64) -> Result<Self> {
        let last = trace
            .last()
            .ok_or_else(|| Error::Parse("empty trace".into()))?;
        Ok(Self {
            iters: last.iteration,
            iters_to_tol: trace.iter().find(|r| r.residual <= tol).map(|r| r.iteration),
            final_residual: last.residual,
            final_error: last.error_to_truth,
            total_rows_touched: last.rows_touched,
            wall_nanos: last.wall_nanos,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub label: String,
    pub method: String,
    pub repetition: usize,
    pub seed: u64,
    pub trace_path: PathBuf,
    pub summary: Option<RunSummary>,
    /// `ok`, `resumed`, or the error message of a failed run.
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BenchOptions {
    pub resume: bool,
    /// Keep wall-clock times in the outputs (otherwise written as 0).
    pub timing: bool,
}

#[derive(Debug, Clone)]
pub struct BenchOutcome {
    pub records: Vec<RunRecord>,
    pub summary_path: PathBuf,
    pub curve_paths: Vec<PathBuf>,
}

impl BenchOutcome {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.summary.is_none()).count()
    }
}

fn trace_path(dir: &Path, label: &str, rep: usize) -> PathBuf {
    dir.join("traces").join(format!("{label}_rep{rep:03}.csv"))
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("csv.partial");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Runs every method on every repetition, writing
/// `traces/<label>_repNNN.csv`, `summary.csv` and `curves/<label>.csv`.
/// A failed run is recorded with its error and the bench continues.
pub fn run_bench(spec: &ExperimentSpec, opts: BenchOptions) -> Result<BenchOutcome> {
    spec.validate()?;
    let dir = &spec.output_dir;
    for sub in ["traces", "curves"] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let labels = spec.labels();
    let mut records = Vec::new();
    let mut traces: Vec<Vec<Vec<TraceRecord>>> = vec![Vec::new(); spec.methods.len()];
    for rep in 0..spec.repetitions {
        let mut instance: Option<std::result::Result<GeneratedSystem, String>> = None;
        for (mi, (cfg, label)) in spec.methods.iter().zip(&labels).enumerate() {
            let cfg = config_for_rep(cfg, rep);
            let path = trace_path(dir, label, rep);
            let mut record = RunRecord {
                label: label.clone(),
                method: cfg.method.name().to_string(),
                repetition: rep,
                seed: cfg.seed,
                trace_path: path.clone(),
                summary: None,
                status: String::new(),
            };
            if opts.resume && path.exists() {
                let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
                match read_trace_csv(file) {
                    Ok(trace) if !trace.is_empty() => {
                        record.summary = Some(RunSummary::from_trace(&trace, cfg.residual_tol)?);
                        record.status = "resumed".into();
                        traces[mi].push(trace);
                        records.push(record);
                        continue;
                    }
                    _ => log::warn!("{}: unreadable trace, rerunning", path.display()),
                }
            }
            let inst = instance.get_or_insert_with(|| instance_for_rep(&spec.gen, rep).map_err(|e| e.to_string()));
            let result = match inst {
                Ok(g) => solve(&g.system, &cfg).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            match result {
                Ok(state) => {
                    let mut trace = state.trace;
                    if !opts.timing {
                        trace.iter_mut().for_each(|r| r.wall_nanos = 0);
                    }
                    let mut buf = Vec::new();
                    write_trace_csv(&trace, &mut buf, true)?;
                    write_atomically(&path, &buf)?;
                    record.summary = Some(RunSummary::from_trace(&trace, cfg.residual_tol)?);
                    record.status = "ok".into();
                    traces[mi].push(trace);
                }
                Err(msg) => {
                    log::warn!("{label} repetition {rep} failed: {msg}");
                    record.status = msg;
                }
            }
            records.push(record);
        }
    }
    records.sort_by(|a, b| {
        let ia = labels.iter().position(|l| *l == a.label);
        let ib = labels.iter().position(|l| *l == b.label);
        ia.cmp(&ib).then(a.repetition.cmp(&b.repetition))
    });

    let summary_path = dir.join("summary.csv");
    write_summary(&summary_path, &records)?;
    let mut curve_paths = Vec::new();
    for (label, runs) in labels.iter().zip(&traces) {
        let path = dir.join("curves").join(format!("{label}.csv"));
        write_curve(&path, &median_curve(runs))?;
        curve_paths.push(path);
    }
    Ok(BenchOutcome {
        records,
        summary_path,
        curve_paths,
    })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

pub fn write_summary(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "label",
        "method",
        "repetition",
        "seed",
        "trace",
        "iters",
        "iters_to_tol",
        "final_residual",
        "final_error",
        "total_rows_touched",
        "wall_nanos",
        "status",
    ])?;
    for r in records {
        let s = r.summary.as_ref();
        let trace = r
            .trace_path
            .strip_prefix(r.trace_path.parent().and_then(Path::parent).unwrap_or(Path::new("")))
            .unwrap_or(&r.trace_path)
            .display()
            .to_string();
        w.write_record([
            r.label.clone(),
            r.method.clone(),
            r.repetition.to_string(),
            r.seed.to_string(),
            trace,
            opt(&s.map(|s| s.iters)),
            opt(&s.and_then(|s| s.iters_to_tol)),
            opt(&s.map(|s| s.final_residual)),
            opt(&s.and_then(|s| s.final_error)),
            opt(&s.map(|s| s.total_rows_touched)),
            opt(&s.map(|s| s.wall_nanos)),
            r.status.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub iteration: usize,
    pub median_residual: f64,
    /// Runs still active at this iteration.
    pub runs: usize,
}

/// Median residual across runs at each traced iteration. A run that stopped
/// early contributes its final residual to later iterations.
pub fn median_curve(runs: &[Vec<TraceRecord>]) -> Vec<CurvePoint> {
    let mut iters: Vec<usize> = runs.iter().flatten().map(|r| r.iteration).collect();
    iters.sort_unstable();
    iters.dedup();
    let mut cursor = vec![0usize; runs.len()];
    iters
        .into_iter()
        .map(|it| {
            let mut vals = Vec::with_capacity(runs.len());
            let mut active = 0;
            for (run, c) in runs.iter().zip(cursor.iter_mut()) {
                while *c + 1 < run.len() && run[*c + 1].iteration <= it {
                    *c += 1;
                }
                if run.is_empty() || run[*c].iteration > it {
                    continue;
                }
                if run.last().unwrap().iteration >= it {
                    active += 1;
                }
                vals.push(run[*c].residual);
            }
            CurvePoint {
                iteration: it,
                median_residual: stats::median(&vals),
                runs: active,
            }
        })
        .collect()
}

pub fn write_curve(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iteration", "median_residual", "runs"])?;
    for p in curve {
        w.write_record([p.iteration.to_string(), p.median_residual.to_string(), p.runs.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Residual plateau of a run: the median residual over the last
/// `tail_fraction` of its trace.
pub fn residual_floor(trace: &[TraceRecord], tail_fraction: f64) -> f64 {
    let n = trace.len();
    let tail = ((n as f64 * tail_fraction).ceil() as usize).clamp(1, n.max(1));
    let vals: Vec<f64> = trace[n - tail..].iter().map(|r| r.residual).collect();
    stats::median(&vals)
}

/// First traced iteration whose residual is at or below `level`.
pub fn iterations_to_level(trace: &[TraceRecord], level: f64) -> Option<usize> {
    trace.iter().find(|r| r.residual <= level).map(|r| r.iteration)
}
