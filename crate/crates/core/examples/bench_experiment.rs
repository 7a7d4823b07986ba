//! A small matched-repetition benchmark written to a temporary directory.

use kaczmarz::experiment::{run_bench, BenchOptions, ExperimentSpec};
use kaczmarz::{GenSpec, Method, SolverConfig};

fn main() -> kaczmarz::Result<()> {
    let methods = [Method::RkaJl, Method::RkaClusterJl]
        .into_iter()
        .map(|m| SolverConfig {
            max_iters: 2000,
            trace_every: 50,
            ..SolverConfig::new(m)
        })
        .collect();
    let spec = ExperimentSpec {
        gen: GenSpec {
            n: 500,
            p: 50,
            k: 4,
            spread: 0.1,
            noise_sigma: 0.1,
            seed: 1,
        },
        methods,
        repetitions: 3,
        output_dir: std::env::temp_dir().join("kaczmarz-example-bench"),
    };
    let outcome = run_bench(&spec, BenchOptions::default())?;
    for r in &outcome.records {
        let s = r.summary.as_ref().expect("run succeeded");
        println!("{:<16} rep {}  final residual {:.4}", r.label, r.repetition, s.final_residual);
    }
    println!("summary: {}", outcome.summary_path.display());
    for p in &outcome.curve_paths {
        println!("curve:   {}", p.display());
    }
    Ok(())
}
