//! Gaussian Johnson-Lindenstrauss sketching of the rows of `A`.
//!
//! `phi` is `d × p` with i.i.d. `N(0, 1/d)` entries, so `‖Φu‖` estimates `‖u‖`
//! without further rescaling. All rows are sketched once at build time.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, DenseMatrix};
use crate::rng::Rng;
use rand::SeedableRng;

/// `max(10, ⌈4 ln p⌉)`.
pub fn default_sketch_dim(p: usize) -> usize {
    let d = (4.0 * (p.max(1) as f64).ln()).ceil() as usize;
    d.max(10)
}

#[derive(Debug, Clone)]
pub struct JlSketch {
    phi: DenseMatrix,
    sketched_rows: DenseMatrix,
    sketched_row_norms: Vec<f64>,
    seed: u64,
}

impl JlSketch {
    pub fn build(a: &DenseMatrix, d: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("sketch dimension must be >= 1".into()));
        }
        let p = a.n_cols();
        let mut rng = Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (d as f64).sqrt()).expect("valid std dev");
        let data = (0..d * p).map(|_| normal.sample(&mut rng)).collect();
        let phi = DenseMatrix::new(d, p, data)?;
        Self::with_phi(a, phi, seed)
    }

    /// Builds a sketch around a caller-supplied projection. Intended for
    /// tests that need exact selection (e.g. `phi = I` with `d = p`).
    pub fn with_phi(a: &DenseMatrix, phi: DenseMatrix, seed: u64) -> Result<Self> {
        if phi.n_cols() != a.n_cols() {
            return Err(Error::Arity(format!(
                "phi has {} columns but rows have length {}",
                phi.n_cols(),
                a.n_cols()
            )));
        }
        let d = phi.n_rows();
        let mut data = Vec::with_capacity(a.n_rows() * d);
        for row in a.rows() {
            data.extend(phi.rows().map(|ph| dot(ph, row)));
        }
        let sketched_rows = DenseMatrix::new(a.n_rows(), d, data)?;
        let sketched_row_norms = sketched_rows.rows().map(norm2).collect();
        Ok(Self {
            phi,
            sketched_rows,
            sketched_row_norms,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.phi.n_rows()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    pub fn sketched_rows(&self) -> &DenseMatrix {
        &self.sketched_rows
    }

    pub fn sketched_row_norms(&self) -> &[f64] {
        &self.sketched_row_norms
    }

    /// `Φ x`.
    pub fn sketch_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.phi.matvec(x)
    }

    /// `|b_i − ⟨α_i, x̂⟩| / ‖α_i‖`, the sketched distance from the iterate to
    /// hyperplane `i`.
    pub fn sketched_gamma(&self, i: usize, x_hat: &[f64], b_i: f64) -> Result<f64> {
        if x_hat.len() != self.dim() {
            return Err(Error::Arity(format!(
                "sketched point has length {}, sketch dimension is {}",
                x_hat.len(),
                self.dim()
            )));
        }
        if i >= self.sketched_rows.n_rows() {
            return Err(Error::Arity(format!(
                "row {i} out of range for {} rows",
                self.sketched_rows.n_rows()
            )));
        }
        let nrm = self.sketched_row_norms[i];
        if nrm == 0.0 {
            return Err(Error::DegenerateRow(i));
        }
        Ok((b_i - dot(self.sketched_rows.row(i), x_hat)).abs() / nrm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::row_norms;
    use crate::rng::rng_for;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut Rng, n: usize, p: usize) -> DenseMatrix {
        let data = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        DenseMatrix::new(n, p, data).unwrap()
    }

    #[test]
    fn default_dim() {
        assert_eq!(default_sketch_dim(1), 10);
        assert_eq!(default_sketch_dim(200), 22);
        assert_eq!(default_sketch_dim(1000), 28);
    }

    #[test]
    fn build_is_deterministic() {
        let mut rng = rng_for(1, 0);
        let a = gaussian(&mut rng, 20, 8);
        let s1 = JlSketch::build(&a, 5, 99).unwrap();
        let s2 = JlSketch::build(&a, 5, 99).unwrap();
        assert_eq!(s1.phi(), s2.phi());
        assert_eq!(s1.sketched_rows(), s2.sketched_rows());
        let s3 = JlSketch::build(&a, 5, 100).unwrap();
        assert_ne!(s1.phi(), s3.phi());
    }

    #[test]
    fn identity_phi_preserves_norms_and_points() {
        let mut rng = rng_for(2, 0);
        let a = gaussian(&mut rng, 7, 4);
        let s = JlSketch::with_phi(&a, DenseMatrix::identity(4), 0).unwrap();
        for (x, y) in s.sketched_row_norms().iter().zip(row_norms(&a)) {
            assert!((x - y).abs() < 1e-14);
        }
        let x = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(s.sketch_point(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn sketched_rows_match_phi_times_row() {
        let mut rng = rng_for(3, 0);
        let a = gaussian(&mut rng, 15, 9);
        let s = JlSketch::build(&a, 6, 4).unwrap();
        for i in 0..15 {
            for r in 0..6 {
                let mut acc = 0.0;
                for c in 0..9 {
                    acc += s.phi().get(r, c) * a.get(i, c);
                }
                assert!((acc - s.sketched_rows().get(i, r)).abs() < 1e-10);
            }
            assert!((s.sketched_row_norms()[i] - norm2(s.sketched_rows().row(i))).abs() < 1e-14);
        }
    }

    #[test]
    fn sketch_point_examples() {
        let mut rng = rng_for(4, 0);
        let a = gaussian(&mut rng, 5, 6);
        let s = JlSketch::build(&a, 4, 1).unwrap();
        assert!(s.sketch_point(&[0.0; 6]).unwrap().iter().all(|&v| v == 0.0));
        let x: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
        let got = s.sketch_point(&x).unwrap();
        for r in 0..4 {
            let mut acc = 0.0;
            for c in 0..6 {
                acc += s.phi().get(r, c) * x[c];
            }
            assert!((acc - got[r]).abs() < 1e-12);
        }
        assert!(matches!(s.sketch_point(&[0.0; 5]), Err(Error::Arity(_))));
    }

    #[test]
    fn sketched_gamma_examples() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
        let s = JlSketch::with_phi(&a, DenseMatrix::identity(2), 0).unwrap();
        let x_hat = s.sketch_point(&[0.0, 0.0]).unwrap();
        assert_eq!(s.sketched_gamma(0, &x_hat, 3.0).unwrap(), 3.0);

        let x_hat = s.sketch_point(&[0.3, 0.7]).unwrap();
        let b1 = dot(s.sketched_rows().row(1), &x_hat);
        assert_eq!(s.sketched_gamma(1, &x_hat, b1).unwrap(), 0.0);

        let z = DenseMatrix::from_rows(&[[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let s = JlSketch::with_phi(&z, DenseMatrix::identity(2), 0).unwrap();
        assert!(matches!(s.sketched_gamma(0, &[0.0, 0.0], 1.0), Err(Error::DegenerateRow(0))));
        assert!(matches!(s.sketched_gamma(1, &[0.0], 1.0), Err(Error::Arity(_))));
    }

    #[test]
    fn sketched_inner_products_concentrate() {
        // Rows come in nearly aligned pairs so relative error is well defined.
        // At d = 25 the relative spread is about sqrt(2/d), so the fraction is
        // pooled over several sketches.
        let mut rng = rng_for(5, 0);
        let base = gaussian(&mut rng, 100, 50);
        let mut rows = Vec::with_capacity(200);
        for r in base.rows() {
            let partner: Vec<f64> = r
                .iter()
                .map(|v| v + 0.1 * rng.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push(r.to_vec());
            rows.push(partner);
        }
        let a = DenseMatrix::from_rows(&rows).unwrap();
        let trials = 20;
        let mut good = 0;
        for seed in 0..trials {
            let s = JlSketch::build(&a, 25, 11 + seed).unwrap();
            good += (0..100)
                .filter(|t| {
                    let (i, j) = (2 * t, 2 * t + 1);
                    let exact = dot(a.row(i), a.row(j));
                    let approx = dot(s.sketched_rows().row(i), s.sketched_rows().row(j));
                    ((approx - exact) / exact).abs() <= 0.5
                })
                .count();
        }
        let frac = good as f64 / (100 * trials) as f64;
        assert!(frac >= 0.9, "only {frac} of pairs within relative error 0.5");
    }

    #[test]
    fn sketched_gamma_orders_like_exact_distance() {
        let p = 100;
        let n = 1000;
        let d = 4 * ((p as f64).ln().ceil() as usize);
        let mut rng = rng_for(6, 0);
        let a = gaussian(&mut rng, n, p);
        let b: Vec<f64> = (0..n).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
        let x: Vec<f64> = (0..p).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)).collect();
        let s = JlSketch::build(&a, d, 12).unwrap();
        let x_hat = s.sketch_point(&x).unwrap();
        let exact: Vec<f64> = (0..n)
            .map(|i| (b[i] - dot(a.row(i), &x)).abs() / norm2(a.row(i)))
            .collect();
        let sketched: Vec<f64> = (0..n).map(|i| s.sketched_gamma(i, &x_hat, b[i]).unwrap()).collect();
        let rho = spearman(&exact, &sketched);
        assert!(rho > 0.5, "rank correlation {rho}");
    }

    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }

    fn spearman(a: &[f64], b: &[f64]) -> f64 {
        let (ra, rb) = (ranks(a), ranks(b));
        let n = a.len() as f64;
        let ma = ra.iter().sum::<f64>() / n;
        let mb = rb.iter().sum::<f64>() / n;
        let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn sketched_inner_product_is_unbiased() {
        let p = 30;
        let mut rng = rng_for(7, 0);
        let u: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = u
            .iter()
            .map(|x| 0.6 * x + 0.8 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let uv = DenseMatrix::from_rows(&[u.clone(), v.clone()]).unwrap();
        let exact = dot(&u, &v);
        let samples: Vec<f64> = (0..1000u64)
            .map(|seed| {
                let s = JlSketch::build(&uv, 8, seed).unwrap();
                dot(s.sketched_rows().row(0), s.sketched_rows().row(1))
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / 1000.0;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 999.0;
        let se = (var / 1000.0).sqrt();
        assert!((mean - exact).abs() <= 3.0 * se, "mean {mean} exact {exact} se {se}");
    }
}
