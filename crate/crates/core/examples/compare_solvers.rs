//! Run every method on the same consistent system.

use kaczmarz::{gen_clustered_system, solve, GenSpec, Method, SolverConfig};

fn main() -> kaczmarz::Result<()> {
    let spec = GenSpec {
        n: 500,
        p: 50,
        k: 4,
        spread: 0.1,
        noise_sigma: 0.0,
        seed: 1,
    };
    let sys = gen_clustered_system(&spec)?.system;
    println!("{:<18} {:>8} {:>12} {:>14}", "method", "iters", "residual", "rows touched");
    for method in Method::ALL {
        let mut cfg = SolverConfig::new(method);
        cfg.max_iters = 20_000;
        cfg.residual_tol = 1e-6;
        cfg.trace_every = 10;
        let state = solve(&sys, &cfg)?;
        let last = state.final_record();
        println!(
            "{:<18} {:>8} {:>12.3e} {:>14}",
            method.name(),
            last.iteration,
            last.residual,
            last.rows_touched
        );
    }
    Ok(())
}
