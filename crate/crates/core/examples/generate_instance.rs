//! Generate a clustered system, save it, and load it back.

use kaczmarz::datagen::{load_instance, save_instance};
use kaczmarz::io::MatrixFormat;
use kaczmarz::{gen_clustered_system, GenSpec};

fn main() -> kaczmarz::Result<()> {
    let spec = GenSpec {
        n: 400,
        p: 40,
        k: 4,
        spread: 0.1,
        noise_sigma: 0.05,
        seed: 7,
    };
    let generated = gen_clustered_system(&spec)?;
    let dir = std::env::temp_dir().join("kaczmarz-example-instance");
    save_instance(&dir, &generated, &spec, MatrixFormat::Csv)?;

    let inst = load_instance(&dir)?;
    let sys = &inst.system;
    let mut sizes = vec![0usize; spec.k];
    for &l in &generated.labels {
        sizes[l] += 1;
    }
    println!("saved {}x{} system to {}", sys.n(), sys.p(), dir.display());
    println!("rows per cluster: {sizes:?}");
    println!("residual of the true solution: {:.3e}", sys.relative_residual(sys.x_star().unwrap()));
    Ok(())
}
