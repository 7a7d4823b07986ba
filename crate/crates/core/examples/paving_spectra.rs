//! Per-block conditioning of a cluster paving against a random one.

use kaczmarz::stats::median;
use kaczmarz::{build_cluster_paving, build_random_paving, cluster_rows, gen_clustered_system, GenSpec, RowPaving};

fn describe(name: &str, paving: &RowPaving) {
    let cond: Vec<f64> = paving.per_block().iter().map(|s| s.cond).collect();
    let norm: Vec<f64> = paving.per_block().iter().map(|s| s.spectral_norm).collect();
    println!(
        "{name:<8} blocks {:>4}  alpha {:.3}  beta {:.3}  median cond {:>9.3}  median norm {:.3}",
        paving.m(),
        paving.alpha(),
        paving.beta(),
        median(&cond),
        median(&norm)
    );
}

fn main() -> kaczmarz::Result<()> {
    let spec = GenSpec {
        n: 400,
        p: 40,
        k: 4,
        spread: 0.1,
        noise_sigma: 0.0,
        seed: 2,
    };
    let sys = gen_clustered_system(&spec)?.system;
    let clustering = cluster_rows(sys.a(), sys.b(), spec.k, 5, 100)?;
    describe("cluster", &build_cluster_paving(sys.a(), &clustering, 1)?);
    describe("random", &build_random_paving(sys.a(), spec.k, 1)?);
    Ok(())
}
