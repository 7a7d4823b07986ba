//! Command-line front end behind the `kaczmarz-bench` binary.
//!
//! Exit codes: 0 success, 1 runtime or assertion failure, 2 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{self, AuditConfig, IntRange, MatrixFamily};
use crate::cluster::cluster_rows;
use crate::datagen::{self, add_noise, gen_clustered_system, gen_gaussian_system, GenSpec, GeneratedSystem};
use crate::error::Error;
use crate::experiment::{run_bench, BenchOptions, ExperimentSpec};
use crate::io::{self, MatrixFormat};
use crate::paving::build_random_paving;
use crate::solvers::{solve, write_trace_csv, GuardRule, Method, SolverConfig};
use crate::system::LinearSystem;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kaczmarz-bench", version, about = "Kaczmarz solver experiments, benchmarks and bound audits")]
pub struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Storage format for generated matrices.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Record wall-clock times (outputs are then no longer reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Binary,
}

impl From<FormatArg> for MatrixFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => MatrixFormat::Csv,
            FormatArg::Binary => MatrixFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GuardArg {
    Sampled,
    FixedFirstRow,
}

impl From<GuardArg> for GuardRule {
    fn from(g: GuardArg) -> Self {
        match g {
            GuardArg::Sampled => GuardRule::Sampled,
            GuardArg::FixedFirstRow => GuardRule::FixedFirstRow,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a clustered (or plain Gaussian) instance directory.
    Datagen(DatagenArgs),
    /// Run one solver on an instance and write its trace.
    Solve(SolveArgs),
    /// Compare methods over matched repetitions.
    Bench(BenchArgs),
    /// Batch checks of the spectral and convergence bounds.
    #[command(subcommand)]
    Audit(AuditCommand),
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Scale of the per-entry Gaussian perturbation around each cluster direction.
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
    /// Standard deviation of the noise added to b.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Unclustered standard-normal rows instead.
    #[arg(long)]
    pub gaussian: bool,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Rows compared per sketched selection (default: min(p, n)).
    #[arg(long)]
    pub sample_count: Option<usize>,
    /// Sketch dimension (default: max(10, ceil(4 ln p))).
    #[arg(long)]
    pub jl_dim: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long, default_value_t = 4)]
    pub block_size: usize,
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
    #[arg(long, value_enum, default_value_t = GuardArg::Sampled)]
    pub guard: GuardArg,
}

impl SolverArgs {
    fn config(&self, method: Method, seed: u64) -> SolverConfig {
        SolverConfig {
            method,
            max_iters: self.max_iters,
            residual_tol: self.tol,
            sample_count: self.sample_count,
            jl_dim: self.jl_dim,
            cluster_count: self.clusters,
            block_size: self.block_size,
            seed,
            trace_every: self.trace_every,
            guard: self.guard.into(),
            ..SolverConfig::new(method)
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub method: Method,
    /// Trace file (default: <out>/<method>_trace.csv).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON experiment description; the flags below are used when absent.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Skip runs whose trace file already exists.
    #[arg(long)]
    pub resume: bool,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub p: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, value_delimiter = ',', default_value = "rka-jl,rka-cluster-jl")]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Fraction of nearly orthogonal Gaussian vector pairs.
    Thm1 {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
    },
    /// Upper bound on the spectral norm of nearly orthogonal rows.
    Thm2(BatchArgs),
    /// Lower bound on the spectral norm of sign-coherent correlated rows.
    Thm3(BatchArgs),
    /// Lower bounds on the smallest eigenvalue and the condition number.
    Thm45(BatchArgs),
    /// Expected error recursion of randomized block Kaczmarz.
    Lemma1 {
        /// Instance directory; a Gaussian system is generated when absent.
        #[arg(long)]
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        p: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 4)]
        block_size: usize,
        #[arg(long, default_value_t = 500)]
        runs: usize,
        #[arg(long, default_value_t = 200)]
        max_j: usize,
    },
    /// Per-block spectra of cluster versus random pavings.
    PavingQuality {
        #[arg(long)]
        instance: PathBuf,
        /// Cluster count (default: k from spec.json, else 4).
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
    },
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Rows per matrix: N or LO..HI.
    #[arg(long, default_value = "2..10")]
    pub k: IntRange,
    /// Columns per matrix: N or LO..HI.
    #[arg(long, default_value = "10..100")]
    pub p: IntRange,
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

type CliResult = std::result::Result<(), CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Datagen(a) => cmd_datagen(&cli, a, stdout),
        Command::Solve(a) => cmd_solve(&cli, a, stdout),
        Command::Bench(a) => cmd_bench(&cli, a, stdout),
        Command::Audit(a) => cmd_audit(&cli, a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failure(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAILURE
        }
    }
}

fn out_dir(cli: &Cli) -> std::result::Result<PathBuf, CliError> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Failure(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_out(stdout: &mut dyn Write, line: &str) -> CliResult {
    writeln!(stdout, "{line}").map_err(|e| CliError::Failure(format!("stdout: {e}")))
}

pub fn cmd_datagen(cli: &Cli, a: &DatagenArgs, stdout: &mut dyn Write) -> CliResult {
    let spec = GenSpec {
        n: a.n,
        p: a.p,
        k: a.k,
        spread: a.spread,
        noise_sigma: a.noise,
        seed: cli.seed.unwrap_or(0),
    };
    spec.validate().map_err(usage)?;
    let dir = cli
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("datagen needs --out <dir>".into()))?;
    let generated = if a.gaussian {
        let sys = gen_gaussian_system(a.n, a.p, spec.seed)?;
        let system = add_noise(&sys, a.noise, crate::rng::derive_seed(spec.seed, crate::rng::stream::NOISE))?;
        GeneratedSystem {
            system,
            labels: vec![0; a.n],
        }
    } else {
        gen_clustered_system(&spec)?
    };
    let saved = if a.gaussian { GenSpec { k: 1, spread: 0.0, ..spec } } else { spec };
    datagen::save_instance(&dir, &generated, &saved, cli.format.into())?;
    write_out(stdout, &dir.display().to_string())
}

fn load_system(dir: &Path) -> std::result::Result<datagen::Instance, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!("instance directory {} does not exist", dir.display())));
    }
    Ok(datagen::load_instance(dir)?)
}

fn summary_line(method: Method, trace: &[crate::solvers::TraceRecord], timing: bool) -> String {
    let last = trace.last().expect("trace holds the initial record");
    format!(
        "{},{},{},{},{},{}",
        method,
        last.iteration,
        last.residual,
        last.error_to_truth.map(|v| v.to_string()).unwrap_or_default(),
        last.rows_touched,
        if timing { last.wall_nanos } else { 0 },
    )
}

pub fn cmd_solve(cli: &Cli, a: &SolveArgs, stdout: &mut dyn Write) -> CliResult {
    let inst = load_system(&a.instance)?;
    let cfg = a.solver.config(a.method, cli.seed.unwrap_or(0));
    validate_solver_config(&cfg, &inst.system)?;
    let state = solve(&inst.system, &cfg)?;
    let path = match &a.trace {
        Some(p) => p.clone(),
        None => out_dir(cli)?.join(format!("{}_trace.csv", a.method)),
    };
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_trace_csv(&state.trace, std::io::BufWriter::new(file), cli.timing)?;
    write_out(stdout, &summary_line(a.method, &state.trace, cli.timing))
}

/// Flags that cannot work for this system are usage errors, not failures.
fn validate_solver_config(cfg: &SolverConfig, sys: &LinearSystem) -> CliResult {
    if cfg.max_iters == 0 || cfg.trace_every == 0 || !(cfg.residual_tol > 0.0) {
        return Err(CliError::Usage("--max-iters, --trace-every and --tol must be positive".into()));
    }
    if let Some(s) = cfg.sample_count {
        if s == 0 || s > sys.n() {
            return Err(CliError::Usage(format!("--sample-count must lie in 1..={}", sys.n())));
        }
    }
    if cfg.jl_dim == Some(0) {
        return Err(CliError::Usage("--jl-dim must be positive".into()));
    }
    if matches!(cfg.method, Method::RkaClusterJl | Method::RkaClusterBlock) && (cfg.cluster_count == 0 || cfg.cluster_count > sys.n()) {
        return Err(CliError::Usage(format!("--clusters must lie in 1..={}", sys.n())));
    }
    if cfg.method == Method::RkaBlock && (cfg.block_size == 0 || cfg.block_size > sys.n()) {
        return Err(CliError::Usage(format!("--block-size must lie in 1..={}", sys.n())));
    }
    Ok(())
}

pub fn cmd_bench(cli: &Cli, a: &BenchArgs, stdout: &mut dyn Write) -> CliResult {
    let mut spec = match &a.spec {
        Some(path) => {
            let mut spec = ExperimentSpec::load(path).map_err(usage)?;
            if let Some(seed) = cli.seed {
                spec.gen.seed = seed;
                spec.methods.iter_mut().for_each(|m| m.seed = seed);
            }
            spec
        }
        None => {
            let seed = cli.seed.unwrap_or(0);
            ExperimentSpec {
                gen: GenSpec {
                    n: a.n,
                    p: a.p,
                    k: a.k,
                    spread: a.spread,
                    noise_sigma: a.noise,
                    seed,
                },
                methods: a.methods.iter().map(|&m| a.solver.config(m, seed)).collect(),
                repetitions: a.reps,
                output_dir: PathBuf::from("bench"),
            }
        }
    };
    if let Some(out) = &cli.out {
        spec.output_dir = out.clone();
    }
    spec.validate().map_err(usage)?;
    let outcome = run_bench(
        &spec,
        BenchOptions {
            resume: a.resume,
            timing: cli.timing,
        },
    )?;
    for r in &outcome.records {
        if let Some(s) = &r.summary {
            write_out(
                stdout,
                &format!(
                    "{},{},{},{},{},{}",
                    r.label,
                    s.iters,
                    s.final_residual,
                    s.final_error.map(|v| v.to_string()).unwrap_or_default(),
                    s.total_rows_touched,
                    s.wall_nanos
                ),
            )?;
        }
    }
    write_out(stdout, &outcome.summary_path.display().to_string())?;
    if outcome.failures() > 0 {
        return Err(CliError::Failure(format!("{} run(s) failed; see summary.csv", outcome.failures())));
    }
    Ok(())
}

fn dump_counterexample(dir: &Path, name: &str, m: &crate::linalg::DenseMatrix) -> std::result::Result<PathBuf, CliError> {
    let path = dir.join(format!("{name}_counterexample.csv"));
    io::save_matrix(m, &path, MatrixFormat::Csv)?;
    Ok(path)
}

pub fn cmd_audit(cli: &Cli, cmd: &AuditCommand, stdout: &mut dyn Write) -> CliResult {
    let seed = cli.seed.unwrap_or(0);
    let dir = out_dir(cli)?;
    let batch = |b: &BatchArgs| {
        if b.trials == 0 || b.k.lo == 0 || b.p.lo == 0 {
            return Err(CliError::Usage("--trials, --k and --p must be positive".into()));
        }
        Ok(AuditConfig {
            trials: b.trials,
            k: b.k,
            p: b.p,
            seed,
        })
    };
    match cmd {
        AuditCommand::Thm1 { d, eps, delta, trials } => {
            let r = bounds::orthogonality_probability_experiment(*d, *eps, *delta, *trials, seed).map_err(usage)?;
            bounds::write_csv(&dir.join("thm1.csv"), &[r])?;
            write_out(
                stdout,
                &format!(
                    "thm1: empirical {} vs lower bound {} (2 SE = {}): {}",
                    r.empirical_fraction,
                    r.structural_lower_bound,
                    2.0 * r.std_error,
                    if r.holds { "holds" } else { "VIOLATED" }
                ),
            )?;
            if !r.holds {
                return Err(CliError::Failure("orthogonality fraction below the lower bound".into()));
            }
        }
        AuditCommand::Thm2(b) => {
            let cfg = batch(b)?;
            let trials = bounds::audit_thm2(&cfg)?;
            bounds::write_csv(&dir.join("thm2.csv"), &trials)?;
            let bad: Vec<_> = trials.iter().filter(|t| !t.holds).collect();
            write_out(stdout, &format!("thm2: {} trials, {} violations", trials.len(), bad.len()))?;
            if let Some(t) = bad.first() {
                let path = dump_counterexample(&dir, "thm2", &bounds::audit_witness(&cfg, t.trial, MatrixFamily::Perturbed)?)?;
                return Err(CliError::Failure(format!("spectral bound violated in trial {}; matrix in {}", t.trial, path.display())));
            }
        }
        AuditCommand::Thm3(b) => {
            let cfg = batch(b)?;
            let trials = bounds::audit_thm3(&cfg)?;
            bounds::write_csv(&dir.join("thm3.csv"), &trials)?;
            let applicable = trials.iter().filter(|t| t.applicable).count();
            let bad: Vec<_> = trials.iter().filter(|t| !t.holds).collect();
            write_out(stdout, &format!("thm3: {} trials, {applicable} applicable, {} violations", trials.len(), bad.len()))?;
            if let Some(t) = bad.first() {
                let path = dump_counterexample(&dir, "thm3", &bounds::audit_witness(&cfg, t.trial, MatrixFamily::NarrowCone)?)?;
                return Err(CliError::Failure(format!("lower bound violated in trial {}; matrix in {}", t.trial, path.display())));
            }
        }
        AuditCommand::Thm45(b) => {
            let cfg = batch(b)?;
            let trials = bounds::audit_thm45(&cfg)?;
            bounds::write_csv(&dir.join("thm45.csv"), &trials)?;
            let applicable = trials.iter().filter(|t| t.gershgorin_applicable).count();
            let bad: Vec<_> = trials.iter().filter(|t| !t.passes()).collect();
            let below_one_minus_ov: Vec<_> = trials.iter().filter(|t| t.holds_paper == Some(false)).collect();
            write_out(
                stdout,
                &format!(
                    "thm45: {} trials, {applicable} with (k-1)*ov < 1, {} gershgorin violations, {} below 1 - ov (report only)",
                    trials.len(),
                    bad.len(),
                    below_one_minus_ov.len()
                ),
            )?;
            if let Some(t) = below_one_minus_ov.first() {
                let m = bounds::audit_witness(&cfg, t.trial, MatrixFamily::Perturbed)?;
                let path = dir.join("thm45_one_minus_ov_witness.csv");
                io::save_matrix(&m, &path, MatrixFormat::Csv)?;
                log::info!("first matrix below 1 - ov: trial {} written to {}", t.trial, path.display());
            }
            if let Some(t) = bad.first() {
                let path = dump_counterexample(&dir, "thm45", &bounds::audit_witness(&cfg, t.trial, MatrixFamily::Perturbed)?)?;
                return Err(CliError::Failure(format!("eigenvalue bound violated in trial {}; matrix in {}", t.trial, path.display())));
            }
        }
        AuditCommand::Lemma1 {
            instance,
            n,
            p,
            noise,
            block_size,
            runs,
            max_j,
        } => {
            let sys = match instance {
                Some(d) => load_system(d)?.system,
                None => {
                    if n < p || *p == 0 {
                        return Err(CliError::Usage("--n must be at least --p".into()));
                    }
                    let sys = gen_gaussian_system(*n, *p, seed)?;
                    add_noise(&sys, *noise, crate::rng::derive_seed(seed, crate::rng::stream::NOISE))?
                }
            };
            if *block_size == 0 || *block_size > sys.n() {
                return Err(CliError::Usage(format!("--block-size must lie in 1..={}", sys.n())));
            }
            let paving = build_random_paving(sys.a(), *block_size, crate::rng::derive_seed(seed, crate::rng::stream::PAVING))?;
            let audit = bounds::lemma1_audit(&sys, &paving, *runs, *max_j, seed).map_err(|e| match e {
                Error::InvalidArgument(_) => usage(e),
                other => other.into(),
            })?;
            bounds::write_csv(&dir.join("lemma1.csv"), &audit.steps)?;
            let first_bad = audit.steps.iter().find(|s| !(s.holds_recursion && s.holds_closed_form));
            write_out(
                stdout,
                &format!(
                    "lemma1: {} runs, {} steps, coefficient {}, noise floor {}: {}",
                    audit.runs,
                    audit.steps.len(),
                    audit.bound.coefficient,
                    audit.bound.noise_floor,
                    if first_bad.is_none() { "holds" } else { "VIOLATED" }
                ),
            )?;
            if let Some(s) = first_bad {
                let path = dir.join("lemma1_counterexample.csv");
                bounds::write_csv(&path, &[*s])?;
                return Err(CliError::Failure(format!("error recursion violated at step {}; see {}", s.j, path.display())));
            }
        }
        AuditCommand::PavingQuality { instance, clusters, seeds } => {
            let inst = load_system(instance)?;
            let k = clusters.or(inst.spec.as_ref().map(|s| s.k)).unwrap_or(4);
            if k == 0 || k > inst.system.n() || *seeds == 0 {
                return Err(CliError::Usage("--clusters must lie in 1..=n and --seeds must be positive".into()));
            }
            let sys = &inst.system;
            let clustering = cluster_rows(sys.a(), sys.b(), k, crate::rng::derive_seed(seed, crate::rng::stream::CLUSTERING), 100)?;
            let samples = bounds::paving_quality(sys.a(), &clustering, *seeds, seed)?;
            bounds::write_csv(&dir.join("paving_quality.csv"), &samples)?;
            let summary = bounds::summarize_paving_quality(&samples);
            bounds::write_csv(&dir.join("paving_quality_summary.csv"), &[summary])?;
            write_out(
                stdout,
                &format!(
                    "paving-quality: median cond cluster {} random {}; median spectral norm cluster {} random {}",
                    summary.cluster_median_cond,
                    summary.random_median_cond,
                    summary.cluster_median_spectral_norm,
                    summary.random_median_spectral_norm
                ),
            )?;
        }
    }
    Ok(())
}
