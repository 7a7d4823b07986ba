//! Compare exact and sketched hyperplane distances for one iterate.

use kaczmarz::linalg::dot;
use kaczmarz::sketch::default_sketch_dim;
use kaczmarz::{gen_gaussian_system, JlSketch};

fn main() -> kaczmarz::Result<()> {
    let sys = gen_gaussian_system(200, 400, 3)?;
    let a = sys.a();
    let d = default_sketch_dim(a.n_cols());
    let sketch = JlSketch::build(a, d, 11)?;
    let x = vec![0.0; a.n_cols()];
    let x_hat = sketch.sketch_point(&x)?;

    let mut exact: Vec<(f64, usize)> = Vec::new();
    let mut sketched: Vec<(f64, usize)> = Vec::new();
    for i in 0..a.n_rows() {
        let row = a.row(i);
        exact.push(((sys.b()[i] - dot(row, &x)).abs() / dot(row, row).sqrt(), i));
        sketched.push((sketch.sketched_gamma(i, &x_hat, sys.b()[i])?, i));
    }
    exact.sort_by(|l, r| r.0.total_cmp(&l.0));
    sketched.sort_by(|l, r| r.0.total_cmp(&l.0));
    println!("sketch dimension {d} for p = {}", a.n_cols());
    println!("furthest rows, exact:    {:?}", exact.iter().take(5).map(|e| e.1).collect::<Vec<_>>());
    println!("furthest rows, sketched: {:?}", sketched.iter().take(5).map(|e| e.1).collect::<Vec<_>>());
    Ok(())
}
