//! Recover the generating clusters from the rows alone.

use kaczmarz::{cluster_rows, gen_clustered_system, GenSpec};

fn main() -> kaczmarz::Result<()> {
    let spec = GenSpec {
        n: 600,
        p: 30,
        k: 5,
        spread: 0.1,
        noise_sigma: 0.0,
        seed: 4,
    };
    let generated = gen_clustered_system(&spec)?;
    let sys = &generated.system;
    let clustering = cluster_rows(sys.a(), sys.b(), spec.k, 9, 100)?;

    // Contingency table: generating label against recovered cluster.
    let mut table = vec![vec![0usize; spec.k]; spec.k];
    for (i, &l) in generated.labels.iter().enumerate() {
        table[l][clustering.assignments()[i]] += 1;
    }
    for (l, row) in table.iter().enumerate() {
        println!("label {l}: {row:?}");
    }
    println!("cost per Lloyd step: {:?}", clustering.cost_trace());
    let x = vec![0.0; sys.p()];
    println!("furthest cluster from the origin: {}", clustering.furthest_cluster(&x)?);
    Ok(())
}
