//! The Kaczmarz family behind one driver.
//!
//! Every method is a [`Solver`] that advances one iteration per [`Solver::step`]
//! call. Residuals are evaluated (and the stopping rule checked) at trace
//! points, every `trace_every` iterations and at the last iteration.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_rows, RowClustering};
use crate::error::{Error, Result};
use crate::linalg::{self, axpy, dot, DenseMatrix};
use crate::paving::{build_cluster_paving, build_random_paving, BlockSpectrum, RowPaving};
use crate::rng::{derive_seed, rng_for, stream, Rng};
use crate::sketch::{default_sketch_dim, JlSketch};
use crate::system::LinearSystem;

const BLOCK_RESAMPLE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Classical,
    Rka,
    RkaJl,
    RkaClusterJl,
    RkaBlock,
    RkaClusterBlock,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Classical,
        Method::Rka,
        Method::RkaJl,
        Method::RkaClusterJl,
        Method::RkaBlock,
        Method::RkaClusterBlock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::Rka => "rka",
            Method::RkaJl => "rka-jl",
            Method::RkaClusterJl => "rka-cluster-jl",
            Method::RkaBlock => "rka-block",
            Method::RkaClusterBlock => "rka-cluster-block",
        }
    }

    /// Methods that project onto one hyperplane per iteration.
    pub fn is_single_row(self) -> bool {
        !matches!(self, Method::RkaBlock | Method::RkaClusterBlock)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown method {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// How the sketched methods pick the row that guards against a poor
/// sketched choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardRule {
    /// A fresh norm-weighted draw each iteration.
    #[default]
    Sampled,
    /// Always the first nonzero row of `A`.
    FixedFirstRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub method: Method,
    pub max_iters: usize,
    /// Stop once `‖Ax − b‖ / ‖b‖ <= residual_tol`.
    pub residual_tol: f64,
    /// Rows compared per sketched selection; `p` (capped at `n`) when unset.
    pub sample_count: Option<usize>,
    /// Sketch dimension; `max(10, ⌈4 ln p⌉)` when unset.
    pub jl_dim: Option<usize>,
    pub cluster_count: usize,
    pub cluster_max_iters: usize,
    pub block_size: usize,
    pub seed: u64,
    pub trace_every: usize,
    pub guard: GuardRule,
    /// Starting point; the zero vector when unset.
    pub x0: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::new(Method::Rka)
    }
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            max_iters: 10_000,
            residual_tol: 1e-8,
            sample_count: None,
            jl_dim: None,
            cluster_count: 4,
            cluster_max_iters: 100,
            block_size: 4,
            seed: 0,
            trace_every: 1,
            guard: GuardRule::Sampled,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub residual: f64,
    pub error_to_truth: Option<f64>,
    /// Cumulative scalar reads of `A` (and of the sketch) so far.
    pub rows_touched: u64,
    /// Row index for single-row methods, block id for block methods.
    pub selected: Option<usize>,
    pub wall_nanos: u64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub iteration: usize,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    /// Block spectra of the paving used by the block methods.
    pub block_spectra: Option<Vec<BlockSpectrum>>,
}

impl SolverState {
    pub fn final_record(&self) -> &TraceRecord {
        self.trace.last().expect("trace always holds the initial record")
    }
}

/// One projection onto `{x : ⟨A_i, x⟩ = b_i}`.
pub fn kaczmarz_step(x: &[f64], row: &[f64], b_i: f64) -> Result<Vec<f64>> {
    if x.len() != row.len() {
        return Err(Error::Arity(format!(
            "iterate has length {}, row has length {}",
            x.len(),
            row.len()
        )));
    }
    let nrm_sq = dot(row, row);
    if nrm_sq == 0.0 {
        return Err(Error::DegenerateRow(0));
    }
    let mut out = x.to_vec();
    project_in_place(&mut out, row, b_i, nrm_sq);
    Ok(out)
}

#[inline]
fn project_in_place(x: &mut [f64], row: &[f64], b_i: f64, nrm_sq: f64) {
    let t = (b_i - dot(row, x)) / nrm_sq;
    axpy(t, row, x);
}

/// `x + A_τ† (b_τ − A_τ x)`.
pub fn block_step(x: &[f64], a_tau: &DenseMatrix, b_tau: &[f64]) -> Result<Vec<f64>> {
    if b_tau.len() != a_tau.n_rows() {
        return Err(Error::Arity(format!(
            "block has {} rows but {} right-hand sides",
            a_tau.n_rows(),
            b_tau.len()
        )));
    }
    let ax = a_tau.matvec(x)?;
    let r: Vec<f64> = b_tau.iter().zip(&ax).map(|(b, v)| b - v).collect();
    let dz = linalg::least_norm_solve(a_tau, &r)?;
    Ok(x.iter().zip(&dz).map(|(a, b)| a + b).collect())
}

/// Norm-weighted sampler over a fixed list of rows.
#[derive(Debug, Clone)]
struct RowSampler {
    rows: Vec<usize>,
    dist: WeightedIndex<f64>,
}

impl RowSampler {
    fn new(rows: Vec<usize>, row_norms_sq: &[f64]) -> Result<Self> {
        let weights: Vec<f64> = rows.iter().map(|&i| row_norms_sq[i]).collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|_| Error::DegenerateSystem("every candidate row has zero norm".into()))?;
        Ok(Self { rows, dist })
    }

    #[inline]
    fn sample(&self, rng: &mut Rng) -> usize {
        self.rows[self.dist.sample(rng)]
    }
}

struct Sketched {
    sketch: JlSketch,
    global: RowSampler,
    sample_count: usize,
    clusters: Option<(RowClustering, Vec<RowSampler>)>,
}

struct PreparedBlock {
    a: DenseMatrix,
    b: Vec<f64>,
    pinv: Option<DenseMatrix>,
}

enum Strategy {
    Cyclic { next: usize },
    Random { sampler: RowSampler },
    Sketched(Box<Sketched>),
    Block { paving: RowPaving, blocks: Vec<PreparedBlock> },
}

/// An in-progress solve. Borrowing the system keeps it immutable for the
/// lifetime of the run.
pub struct Solver<'a> {
    sys: &'a LinearSystem,
    cfg: SolverConfig,
    strategy: Strategy,
    row_norms_sq: Vec<f64>,
    first_nonzero_row: usize,
    x: Vec<f64>,
    iteration: usize,
    rows_touched: u64,
    cost_per_iter: u64,
    trace: Vec<TraceRecord>,
    rng: Rng,
    started: Instant,
    done: bool,
    converged: bool,
}

impl<'a> Solver<'a> {
    pub fn new(sys: &'a LinearSystem, cfg: &SolverConfig) -> Result<Self> {
        Self::build(sys, cfg, None)
    }

    /// Block methods on a caller-supplied paving instead of building one.
    pub fn with_paving(sys: &'a LinearSystem, cfg: &SolverConfig, paving: RowPaving) -> Result<Self> {
        if cfg.method.is_single_row() {
            return Err(Error::InvalidArgument(format!(
                "{} does not use a paving",
                cfg.method
            )));
        }
        Self::build(sys, cfg, Some(paving))
    }

    fn build(sys: &'a LinearSystem, cfg: &SolverConfig, paving: Option<RowPaving>) -> Result<Self> {
        let started = Instant::now();
        let (n, p) = sys.a().shape();
        if cfg.max_iters == 0 || cfg.trace_every == 0 {
            return Err(Error::InvalidArgument(
                "max_iters and trace_every must be positive".into(),
            ));
        }
        if !(cfg.residual_tol > 0.0) {
            return Err(Error::InvalidArgument("residual_tol must be positive".into()));
        }
        let row_norms_sq: Vec<f64> = sys.a().rows().map(|r| dot(r, r)).collect();
        let first_nonzero_row = row_norms_sq
            .iter()
            .position(|&v| v > 0.0)
            .ok_or_else(|| Error::DegenerateSystem("every row of A is zero".into()))?;
        let x = match &cfg.x0 {
            Some(x0) if x0.len() != p => {
                return Err(Error::Arity(format!("x0 has length {}, expected {p}", x0.len())))
            }
            Some(x0) => x0.clone(),
            None => vec![0.0; p],
        };

        let p64 = p as u64;
        let (strategy, cost_per_iter) = match cfg.method {
            Method::Classical => (Strategy::Cyclic { next: 0 }, p64),
            Method::Rka => {
                let sampler = RowSampler::new((0..n).collect(), &row_norms_sq)?;
                (Strategy::Random { sampler }, p64)
            }
            Method::RkaJl | Method::RkaClusterJl => {
                let d = cfg.jl_dim.unwrap_or_else(|| default_sketch_dim(p));
                let sample_count = match cfg.sample_count {
                    Some(0) => {
                        return Err(Error::InvalidArgument("sample_count must be positive".into()))
                    }
                    Some(s) if s > n => {
                        return Err(Error::InvalidArgument(format!(
                            "sample_count {s} exceeds the number of rows {n}"
                        )))
                    }
                    Some(s) => s,
                    None => p.min(n),
                };
                let sketch = JlSketch::build(sys.a(), d, derive_seed(cfg.seed, stream::SKETCH))?;
                let global = RowSampler::new((0..n).collect(), &row_norms_sq)?;
                let mut cost = (sample_count * d) as u64 + 2 * p64;
                let clusters = if cfg.method == Method::RkaClusterJl {
                    let clustering = cluster_rows(
                        sys.a(),
                        sys.b(),
                        cfg.cluster_count,
                        derive_seed(cfg.seed, stream::CLUSTERING),
                        cfg.cluster_max_iters,
                    )?;
                    let samplers = (0..clustering.k())
                        .map(|l| RowSampler::new(clustering.members(l), &row_norms_sq))
                        .collect::<Result<Vec<_>>>()?;
                    cost += clustering.k() as u64 * p64;
                    Some((clustering, samplers))
                } else {
                    None
                };
                (
                    Strategy::Sketched(Box::new(Sketched {
                        sketch,
                        global,
                        sample_count,
                        clusters,
                    })),
                    cost,
                )
            }
            Method::RkaBlock | Method::RkaClusterBlock => {
                if cfg.block_size > p {
                    log::warn!(
                        "block size {} exceeds the column count {p}; blocks will be rank deficient",
                        cfg.block_size
                    );
                }
                let paving = match paving {
                    Some(pv) => pv,
                    None if cfg.method == Method::RkaBlock => build_random_paving(
                        sys.a(),
                        cfg.block_size.min(n),
                        derive_seed(cfg.seed, stream::PAVING),
                    )?,
                    None => {
                        let clustering = cluster_rows(
                            sys.a(),
                            sys.b(),
                            cfg.cluster_count,
                            derive_seed(cfg.seed, stream::CLUSTERING),
                            cfg.cluster_max_iters,
                        )?;
                        build_cluster_paving(
                            sys.a(),
                            &clustering,
                            derive_seed(cfg.seed, stream::PAVING),
                        )?
                    }
                };
                if paving.blocks().iter().flatten().any(|&i| i >= n) || paving.blocks().iter().map(Vec::len).sum::<usize>() != n {
                    return Err(Error::DegeneratePaving("paving does not match the system".into()));
                }
                let blocks = paving
                    .blocks()
                    .iter()
                    .map(|rows| {
                        let a = sys.a().select_rows(rows);
                        let b = rows.iter().map(|&i| sys.b()[i]).collect();
                        let pinv = match linalg::pseudo_inverse(&a) {
                            Ok(m) => Some(m),
                            Err(e) => {
                                log::warn!("block {rows:?} has no usable pseudo-inverse: {e}");
                                None
                            }
                        };
                        PreparedBlock { a, b, pinv }
                    })
                    .collect::<Vec<_>>();
                if blocks.iter().all(|b| b.pinv.is_none()) {
                    return Err(Error::Computation("no block admits a pseudo-inverse".into()));
                }
                // Cost is charged per selected block in `step`.
                (Strategy::Block { paving, blocks }, 0)
            }
        };

        let mut solver = Self {
            sys,
            cfg: cfg.clone(),
            strategy,
            row_norms_sq,
            first_nonzero_row,
            x,
            iteration: 0,
            rows_touched: 0,
            cost_per_iter,
            trace: Vec::new(),
            rng: rng_for(cfg.seed, stream::SAMPLING),
            started,
            done: false,
            converged: false,
        };
        solver.record(None);
        Ok(solver)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn paving(&self) -> Option<&RowPaving> {
        match &self.strategy {
            Strategy::Block { paving, .. } => Some(paving),
            _ => None,
        }
    }

    pub fn clustering(&self) -> Option<&RowClustering> {
        match &self.strategy {
            Strategy::Sketched(s) => s.clusters.as_ref().map(|(c, _)| c),
            _ => None,
        }
    }

    fn record(&mut self, selected: Option<usize>) {
        let residual = self.sys.relative_residual(&self.x);
        self.trace.push(TraceRecord {
            iteration: self.iteration,
            residual,
            error_to_truth: self.sys.error_to_truth(&self.x),
            rows_touched: self.rows_touched,
            selected,
            wall_nanos: self.started.elapsed().as_nanos() as u64,
        });
        if residual <= self.cfg.residual_tol {
            self.converged = true;
            self.done = true;
        }
    }

    /// Exact distance from the iterate to hyperplane `i`.
    #[inline]
    fn exact_gamma(&self, i: usize) -> f64 {
        let row = self.sys.a().row(i);
        (self.sys.b()[i] - dot(row, &self.x)).abs() / self.row_norms_sq[i].sqrt()
    }

    /// Advances one iteration. Returns the selected row / block, or `None`
    /// when the run had already finished.
    pub fn step(&mut self) -> Result<Option<usize>> {
        if self.done {
            return Ok(None);
        }
        let selected = match &mut self.strategy {
            Strategy::Cyclic { next } => {
                let n = self.row_norms_sq.len();
                let mut i = *next;
                while self.row_norms_sq[i] == 0.0 {
                    i = (i + 1) % n;
                }
                *next = (i + 1) % n;
                project_in_place(&mut self.x, self.sys.a().row(i), self.sys.b()[i], self.row_norms_sq[i]);
                self.rows_touched += self.cost_per_iter;
                i
            }
            Strategy::Random { sampler } => {
                let i = sampler.sample(&mut self.rng);
                project_in_place(&mut self.x, self.sys.a().row(i), self.sys.b()[i], self.row_norms_sq[i]);
                self.rows_touched += self.cost_per_iter;
                i
            }
            Strategy::Sketched(_) => {
                let j = self.sketched_select()?;
                project_in_place(&mut self.x, self.sys.a().row(j), self.sys.b()[j], self.row_norms_sq[j]);
                self.rows_touched += self.cost_per_iter;
                j
            }
            Strategy::Block { blocks, .. } => {
                let m = blocks.len();
                let mut attempts = 0;
                let id = loop {
                    let id = self.rng.random_range(0..m);
                    if blocks[id].pinv.is_some() {
                        break id;
                    }
                    attempts += 1;
                    log::warn!("resampling block {id}: pseudo-inverse unavailable");
                    if attempts >= BLOCK_RESAMPLE_LIMIT {
                        return Err(Error::Computation(format!(
                            "{attempts} consecutive blocks without a pseudo-inverse"
                        )));
                    }
                };
                let block = &blocks[id];
                let pinv = block.pinv.as_ref().unwrap();
                let r: Vec<f64> = block
                    .a
                    .rows()
                    .zip(&block.b)
                    .map(|(row, bi)| bi - dot(row, &self.x))
                    .collect();
                for (xc, prow) in self.x.iter_mut().zip(pinv.rows()) {
                    *xc += dot(prow, &r);
                }
                self.rows_touched += (block.a.n_rows() * block.a.n_cols()) as u64;
                id
            }
        };
        self.iteration += 1;
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Computation(format!(
                "iterate became non-finite at iteration {}",
                self.iteration
            )));
        }
        let at_trace_point = self.iteration % self.cfg.trace_every == 0;
        let last = self.iteration >= self.cfg.max_iters;
        if at_trace_point || last {
            self.record(Some(selected));
        }
        if last {
            self.done = true;
        }
        Ok(Some(selected))
    }

    /// Sketched selection followed by the exact guard comparison.
    fn sketched_select(&mut self) -> Result<usize> {
        let Strategy::Sketched(state) = &self.strategy else {
            unreachable!("sketched_select on a non-sketched strategy");
        };
        let x_hat = state.sketch.sketch_point(&self.x)?;
        let pool = match &state.clusters {
            Some((clustering, samplers)) => &samplers[clustering.furthest_cluster(&self.x)?],
            None => &state.global,
        };
        let b = self.sys.b();
        let mut chosen = None;
        for attempt in 0..2 {
            let mut candidates: Vec<usize> =
                (0..state.sample_count).map(|_| pool.sample(&mut self.rng)).collect();
            candidates.sort_unstable();
            candidates.dedup();
            let mut best: Option<(usize, f64)> = None;
            for &i in &candidates {
                if state.sketch.sketched_row_norms()[i] == 0.0 {
                    continue;
                }
                let g = state.sketch.sketched_gamma(i, &x_hat, b[i])?;
                if best.is_none_or(|(_, bg)| g > bg) {
                    best = Some((i, g));
                }
            }
            match best {
                Some((i, _)) => {
                    chosen = Some(i);
                    break;
                }
                None if attempt == 0 => log::warn!("all sampled rows have a zero sketch; resampling"),
                None => return Err(Error::DegenerateRow(candidates[0])),
            }
        }
        let mut j = chosen.expect("loop either selects or errors");
        let guard = match self.cfg.guard {
            GuardRule::Sampled => state.global.sample(&mut self.rng),
            GuardRule::FixedFirstRow => self.first_nonzero_row,
        };
        if self.exact_gamma(guard) > self.exact_gamma(j) {
            j = guard;
        }
        Ok(j)
    }

    pub fn run(mut self) -> Result<SolverState> {
        while !self.done {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> SolverState {
        let block_spectra = match &self.strategy {
            Strategy::Block { paving, .. } => Some(paving.per_block().to_vec()),
            _ => None,
        };
        SolverState {
            x: self.x,
            iteration: self.iteration,
            trace: self.trace,
            converged: self.converged,
            block_spectra,
        }
    }
}

pub fn solve(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    Solver::new(sys, cfg)?.run()
}

fn with_method(cfg: &SolverConfig, method: Method) -> SolverConfig {
    SolverConfig {
        method,
        ..cfg.clone()
    }
}

pub fn solve_classical(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::Classical))
}

pub fn solve_rka(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::Rka))
}

pub fn solve_rka_jl(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::RkaJl))
}

pub fn solve_rka_cluster_jl(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::RkaClusterJl))
}

pub fn solve_rka_block(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::RkaBlock))
}

pub fn solve_rka_cluster_block(sys: &LinearSystem, cfg: &SolverConfig) -> Result<SolverState> {
    solve(sys, &with_method(cfg, Method::RkaClusterBlock))
}

/// Writes the trace as CSV with header
/// `iteration,residual,error_to_truth,rows_touched,selected,wall_nanos`.
/// When `timing` is false the wall-clock column is written as 0 so repeated
/// runs produce identical files.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TraceRecord], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "residual",
        "error_to_truth",
        "rows_touched",
        "selected",
        "wall_nanos",
    ])?;
    for r in trace {
        w.write_record([
            r.iteration.to_string(),
            r.residual.to_string(),
            r.error_to_truth.map(|v| v.to_string()).unwrap_or_default(),
            r.rows_touched.to_string(),
            r.selected.map(|v| v.to_string()).unwrap_or_default(),
            if timing { r.wall_nanos.to_string() } else { "0".into() },
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trace writer>", e))?;
    Ok(())
}

pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRecord>> {
    fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<Option<T>> {
        let raw = rec.get(i).unwrap_or("").trim();
        if raw.is_empty() {
            return Ok(None);
        }
        raw.parse()
            .map(Some)
            .map_err(|_| Error::Parse(format!("trace line {line}: bad field {i} ({raw:?})")))
    }
    fn req<T>(v: Option<T>, name: &str, line: usize) -> Result<T> {
        v.ok_or_else(|| Error::Parse(format!("trace line {line}: missing {name}")))
    }
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        out.push(TraceRecord {
            iteration: req(field(&rec, 0, line)?, "iteration", line)?,
            residual: req(field(&rec, 1, line)?, "residual", line)?,
            error_to_truth: field(&rec, 2, line)?,
            rows_touched: req(field(&rec, 3, line)?, "rows_touched", line)?,
            selected: field(&rec, 4, line)?,
            wall_nanos: req(field(&rec, 5, line)?, "wall_nanos", line)?,
        });
    }
    Ok(out)
}
