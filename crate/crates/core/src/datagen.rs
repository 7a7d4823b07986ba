//! Seeded synthetic instances: clustered rows with known structure, plain
//! Gaussian systems, and additive measurement noise on `b`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{self, MatrixFormat};
use crate::linalg::DenseMatrix;
use crate::rng::{derive_seed, rng_for, stream, Rng};
use crate::system::LinearSystem;

/// Generator parameters. Field names double as the `spec.json` keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub n: usize,
    pub p: usize,
    pub k: usize,
    pub spread: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 || self.k == 0 {
            return Err(Error::InvalidArgument(format!(
                "n, p and k must be positive (got n={}, p={}, k={})",
                self.n, self.p, self.k
            )));
        }
        if self.k > self.n.min(self.p) {
            return Err(Error::InvalidArgument(format!(
                "k must not exceed min(n, p): k={} but n={}, p={}",
                self.k, self.n, self.p
            )));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "spread must be a finite non-negative number, got {}",
                self.spread
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "noise sigma must be a finite non-negative number, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// A generated system together with the cluster each row was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSystem {
    pub system: LinearSystem,
    pub labels: Vec<usize>,
}

fn standard_normal_vec(rng: &mut Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// `k` orthonormal vectors in `ℝ^p`, from the QR factorization of a Gaussian
/// `p × k` matrix.
fn orthonormal_directions(rng: &mut Rng, p: usize, k: usize) -> Vec<Vec<f64>> {
    let g = DMatrix::from_iterator(p, k, standard_normal_vec(rng, p * k));
    let q = g.qr().q();
    (0..k).map(|c| q.column(c).iter().copied().collect()).collect()
}

/// Row `i` belongs to cluster `i * k / n`, so cluster sizes differ by at most one.
pub fn gen_clustered_system(spec: &GenSpec) -> Result<GeneratedSystem> {
    spec.validate()?;
    let GenSpec { n, p, k, spread, .. } = *spec;
    let mut rng = rng_for(spec.seed, stream::GENERATOR);
    let directions = orthonormal_directions(&mut rng, p, k);
    let (lo, hi) = (0.5f64.ln(), 2.0f64.ln());

    let mut data = Vec::with_capacity(n * p);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let c = i * k / n;
        let scale = rng.random_range(lo..hi).exp();
        for &d in &directions[c] {
            let g: f64 = rng.sample(StandardNormal);
            data.push(scale * (d + spread * g));
        }
        labels.push(c);
    }
    let a = DenseMatrix::new(n, p, data)?;
    let x_star = standard_normal_vec(&mut rng, p);
    let b = a.matvec(&x_star)?;
    let system = LinearSystem::with_truth(a, b, Some(x_star))?;
    let system = add_noise(&system, spec.noise_sigma, derive_seed(spec.seed, stream::NOISE))?;
    Ok(GeneratedSystem { system, labels })
}

pub fn gen_gaussian_system(n: usize, p: usize, seed: u64) -> Result<LinearSystem> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidArgument("n and p must be positive".into()));
    }
    if n < p {
        log::warn!("generating an underdetermined system ({n} rows, {p} columns)");
    }
    let mut rng = rng_for(seed, stream::GENERATOR);
    let a = DenseMatrix::new(n, p, standard_normal_vec(&mut rng, n * p))?;
    let x_star = standard_normal_vec(&mut rng, p);
    let b = a.matvec(&x_star)?;
    LinearSystem::with_truth(a, b, Some(x_star))
}

/// `b' = b + η`, `η ~ N(0, σ² I)`. `A` and `x*` are untouched.
pub fn add_noise(sys: &LinearSystem, sigma: f64, seed: u64) -> Result<LinearSystem> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid noise sigma {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(sys.clone());
    }
    let mut rng = rng_for(seed, stream::NOISE);
    let b = sys
        .b()
        .iter()
        .map(|bi| bi + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    sys.with_rhs(b)
}

/// An instance as persisted on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub system: LinearSystem,
    pub labels: Option<Vec<usize>>,
    pub spec: Option<GenSpec>,
}

pub fn save_instance(
    dir: &Path,
    generated: &GeneratedSystem,
    spec: &GenSpec,
    format: MatrixFormat,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sys = &generated.system;
    io::save_matrix(
        sys.a(),
        &dir.join(format!("A.{}", format.extension())),
        format,
    )?;
    io::save_vector(sys.b(), &dir.join("b.csv"), MatrixFormat::Csv)?;
    if let Some(x) = sys.x_star() {
        io::save_vector(x, &dir.join("x_star.csv"), MatrixFormat::Csv)?;
    }
    write_labels(&dir.join("labels.csv"), &generated.labels, "label")?;
    let json = serde_json::to_string_pretty(spec)?;
    let spec_path = dir.join("spec.json");
    fs::write(&spec_path, json + "\n").map_err(|e| Error::io(&spec_path, e))?;
    Ok(())
}

pub fn load_instance(dir: &Path) -> Result<Instance> {
    let a = if dir.join("A.bin").exists() {
        io::load_matrix(&dir.join("A.bin"), MatrixFormat::Binary)?
    } else {
        io::load_matrix(&dir.join("A.csv"), MatrixFormat::Csv)?
    };
    let b = io::load_vector(&dir.join("b.csv"), MatrixFormat::Csv)?;
    let x_path = dir.join("x_star.csv");
    let x_star = if x_path.exists() {
        Some(io::load_vector(&x_path, MatrixFormat::Csv)?)
    } else {
        None
    };
    let system = LinearSystem::with_truth(a, b, x_star)?;
    let labels_path = dir.join("labels.csv");
    let labels = if labels_path.exists() {
        Some(read_labels(&labels_path)?)
    } else {
        None
    };
    let spec_path = dir.join("spec.json");
    let spec = if spec_path.exists() {
        let text = fs::read_to_string(&spec_path).map_err(|e| Error::io(&spec_path, e))?;
        Some(serde_json::from_str(&text)?)
    } else {
        None
    };
    Ok(Instance {
        system,
        labels,
        spec,
    })
}

/// Writes `row_index,<column>` pairs with a header row.
pub fn write_labels(path: &Path, labels: &[usize], column: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["row_index", column])?;
    for (i, l) in labels.iter().enumerate() {
        w.write_record([i.to_string(), l.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut labels = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let idx: usize = rec
            .get(0)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("{}: bad row index on line {}", path.display(), line + 2)))?;
        let label: usize = rec
            .get(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("{}: bad label on line {}", path.display(), line + 2)))?;
        if idx != labels.len() {
            return Err(Error::Parse(format!(
                "{}: row indices must be 0..n in order",
                path.display()
            )));
        }
        labels.push(label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{distance_sq, dot, norm2, orthogonality_value, row_norms};

    fn spec(n: usize, p: usize, k: usize, spread: f64, noise: f64, seed: u64) -> GenSpec {
        GenSpec {
            n,
            p,
            k,
            spread,
            noise_sigma: noise,
            seed,
        }
    }

    #[test]
    fn zero_spread_gives_orthogonal_cluster_representatives() {
        let g = gen_clustered_system(&spec(40, 12, 4, 0.0, 0.0, 3)).unwrap();
        let a = g.system.a();
        let first: Vec<usize> = (0..4).map(|c| g.labels.iter().position(|&l| l == c).unwrap()).collect();
        let block = a.select_rows(&first);
        assert!(orthogonality_value(&block).unwrap() < 1e-9);
        // Every row is parallel to its cluster's first row.
        for i in 0..40 {
            let r = first[g.labels[i]];
            let cos = dot(a.row(i), a.row(r)) / (norm2(a.row(i)) * norm2(a.row(r)));
            assert!((cos - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn consistent_by_construction() {
        let g = gen_clustered_system(&spec(100, 20, 4, 0.3, 0.0, 1)).unwrap();
        let sys = &g.system;
        let ax = sys.a().matvec(sys.x_star().unwrap()).unwrap();
        assert!(distance_sq(&ax, sys.b()).sqrt() <= 1e-10);
        let sizes: Vec<usize> = (0..4).map(|c| g.labels.iter().filter(|&&l| l == c).count()).collect();
        assert_eq!(sizes, vec![25, 25, 25, 25]);
        let flat = gen_clustered_system(&spec(100, 20, 4, 0.0, 0.0, 1)).unwrap();
        assert!(row_norms(flat.system.a()).iter().all(|&r| r >= 0.5 - 1e-12 && r <= 2.0 + 1e-12));
    }

    #[test]
    fn invalid_specs_name_the_constraint() {
        let err = gen_clustered_system(&spec(40, 100, 50, 0.1, 0.0, 0)).unwrap_err();
        assert!(err.to_string().contains("k must not exceed min(n, p)"));
        assert!(gen_clustered_system(&spec(40, 10, 2, -1.0, 0.0, 0)).is_err());
    }

    #[test]
    fn gaussian_system_shape_and_reproducibility() {
        let s1 = gen_gaussian_system(30, 7, 5).unwrap();
        assert_eq!(s1.a().shape(), (30, 7));
        let ax = s1.a().matvec(s1.x_star().unwrap()).unwrap();
        assert!(distance_sq(&ax, s1.b()).sqrt() <= 1e-10);
        assert_eq!(s1, gen_gaussian_system(30, 7, 5).unwrap());
        assert_ne!(s1, gen_gaussian_system(30, 7, 6).unwrap());
    }

    #[test]
    fn gaussian_rows_are_nearly_orthogonal_in_high_dimension() {
        let p = 1000;
        let sys = gen_gaussian_system(200, p, 9).unwrap();
        let a = sys.a();
        let norms = row_norms(a);
        let mut cosines = Vec::new();
        for i in 0..200 {
            for j in (i + 1)..200 {
                cosines.push((dot(a.row(i), a.row(j)) / (norms[i] * norms[j])).abs());
            }
        }
        let mean = cosines.iter().sum::<f64>() / cosines.len() as f64;
        // E|cos| ≈ sqrt(2 / (π p)).
        let expected = (2.0 / (std::f64::consts::PI * p as f64)).sqrt();
        assert!((mean / expected - 1.0).abs() < 0.1, "mean |cos| {mean} vs {expected}");
        let below = cosines.iter().filter(|&&c| c < 0.15).count() as f64 / cosines.len() as f64;
        assert!(below >= 0.99);
    }

    #[test]
    fn add_noise_behaviour() {
        let sys = gen_gaussian_system(50, 5, 1).unwrap();
        assert_eq!(add_noise(&sys, 0.0, 3).unwrap(), sys);

        let n1 = add_noise(&sys, 0.1, 3).unwrap();
        let n2 = add_noise(&sys, 0.1, 4).unwrap();
        assert_ne!(n1.b(), n2.b());
        assert_eq!(n1.a(), n2.a());
        assert_eq!(n1.x_star(), n2.x_star());
        // e = A x* − b' = −η.
        for ((e, b1), b0) in n1.e().unwrap().iter().zip(n1.b()).zip(sys.b()) {
            assert!((e + (b1 - b0)).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_energy_matches_sigma() {
        let sys = gen_gaussian_system(200, 5, 2).unwrap();
        let sigma = 0.2;
        let mean: f64 = (0..100u64)
            .map(|s| {
                let noisy = add_noise(&sys, sigma, s).unwrap();
                noisy.e().unwrap().iter().map(|v| v * v).sum::<f64>() / 200.0
            })
            .sum::<f64>()
            / 100.0;
        assert!((mean / (sigma * sigma) - 1.0).abs() < 0.1);
    }

    #[test]
    fn instance_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(30, 6, 3, 0.2, 0.1, 11);
        let g = gen_clustered_system(&s).unwrap();
        for format in [MatrixFormat::Csv, MatrixFormat::Binary] {
            let sub = dir.path().join(format.extension());
            save_instance(&sub, &g, &s, format).unwrap();
            let inst = load_instance(&sub).unwrap();
            assert_eq!(inst.system.a(), g.system.a());
            assert_eq!(inst.system.b(), g.system.b());
            assert_eq!(inst.labels.as_deref(), Some(g.labels.as_slice()));
            assert_eq!(inst.spec, Some(s));
        }
        let json = fs::read_to_string(dir.path().join("csv/spec.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["k", "n", "noise_sigma", "p", "seed", "spread"]);
    }
}
