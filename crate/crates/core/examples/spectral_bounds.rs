//! Check the spectral bounds on a few hand-built and random matrices.

use kaczmarz::bounds::{check_thm2, check_thm3, check_thm4_thm5, orthogonality_probability_experiment, random_audit_matrix, MatrixFamily};
use kaczmarz::DenseMatrix;

fn main() -> kaczmarz::Result<()> {
    let near = random_audit_matrix(6, 80, MatrixFamily::Perturbed, 3)?;
    let r = check_thm2(&near)?;
    println!("nearly orthogonal: ov {:.4}, ||A|| {:.4} <= {:.4}: {}", r.ov, r.spectral, r.bound, r.holds);

    let r = check_thm4_thm5(&near)?;
    println!(
        "  sigma_min^2 {:.4}, gershgorin bound {:.4}, 1 - ov {:.4}, cond {:.3} vs bound {:.3}",
        r.sigma_min, r.sigma_min_bound_gershgorin, r.sigma_min_bound_paper, r.cond, r.cond_bound
    );

    let cone = random_audit_matrix(5, 40, MatrixFamily::NarrowCone, 3)?;
    let r = check_thm3(&cone)?;
    println!("narrow cone: delta {:.4}, ||A|| {:.4} >= {:.4}: {}", r.delta, r.spectral, r.bound, r.holds);

    // Three unit vectors 120 degrees apart are not sign coherent.
    let h = 3f64.sqrt() / 2.0;
    let tri = DenseMatrix::from_rows(&[[1.0, 0.0], [-0.5, h], [-0.5, -h]])?;
    let r = check_thm3(&tri)?;
    println!("120-degree star: applicable {}, ||A|| {:.4}, bound {:.4}", r.applicable, r.spectral, r.bound);

    let r = orthogonality_probability_experiment(1000, 0.2, 0.5, 4000, 1)?;
    println!("gaussian pairs with |cos| <= 0.2: {:.4} (lower bound {:.4})", r.empirical_fraction, r.structural_lower_bound);
    Ok(())
}
