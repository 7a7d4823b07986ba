//! Directional k-means over the rows of `A`.
//!
//! A hyperplane `⟨A_i, x⟩ = b_i` is unchanged by scaling or negating the
//! equation, so rows are compared as lines through the origin: similarity is
//! `|cos|`, and every row carries a sign that aligns it with its centroid.
//! The per-cluster right-hand side is the matching normalized mean of the
//! aligned equations, so a centroid is itself a hyperplane that passes through
//! `x*` whenever the system is consistent.

use std::path::Path;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, row_norms, DenseMatrix};
use crate::rng::{rng_for, stream};

#[derive(Debug, Clone, PartialEq)]
pub struct RowClustering {
    k: usize,
    assignments: Vec<usize>,
    /// `+1` or `−1` per row: the orientation that aligns the row with its centroid.
    signs: Vec<f64>,
    centroids: DenseMatrix,
    cluster_sizes: Vec<usize>,
    centroid_b: Vec<f64>,
    seed: u64,
    /// Objective `Σ (1 − |cos|)` after each assignment pass.
    cost_trace: Vec<f64>,
}

impl RowClustering {
    /// Assembles a clustering from explicit parts, mainly for tests and for
    /// callers that cluster with an external tool.
    pub fn from_parts(
        assignments: Vec<usize>,
        centroids: DenseMatrix,
        centroid_b: Vec<f64>,
    ) -> Result<Self> {
        let k = centroids.n_rows();
        if centroid_b.len() != k {
            return Err(Error::Arity(format!(
                "{} centroid right-hand sides for {k} centroids",
                centroid_b.len()
            )));
        }
        let mut cluster_sizes = vec![0; k];
        for &c in &assignments {
            if c >= k {
                return Err(Error::Arity(format!("assignment {c} out of range for k={k}")));
            }
            cluster_sizes[c] += 1;
        }
        let n = assignments.len();
        Ok(Self {
            k,
            assignments,
            signs: vec![1.0; n],
            centroids,
            cluster_sizes,
            centroid_b,
            seed: 0,
            cost_trace: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn centroids(&self) -> &DenseMatrix {
        &self.centroids
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn centroid_b(&self) -> &[f64] {
        &self.centroid_b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cost_trace(&self) -> &[f64] {
        &self.cost_trace
    }

    /// Row indices of cluster `l`, ascending.
    pub fn members(&self, l: usize) -> Vec<usize> {
        self.assignments
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == l).then_some(i))
            .collect()
    }

    /// Index of the centroid hyperplane furthest from `x`,
    /// `argmax_l |centroid_b[l] − ⟨c_l, x⟩| / ‖c_l‖`.
    ///
    /// Distances that agree to within rounding are treated as ties and go to
    /// the lowest index.
    pub fn furthest_cluster(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.centroids.n_cols() {
            return Err(Error::Arity(format!(
                "iterate has length {}, centroids have {} columns",
                x.len(),
                self.centroids.n_cols()
            )));
        }
        let r: Vec<f64> = self
            .centroids
            .rows()
            .zip(&self.centroid_b)
            .map(|(c, &cb)| (cb - dot(c, x)).abs() / norm2(c))
            .collect();
        let r_max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = 1.0
            + self
                .centroid_b
                .iter()
                .zip(self.centroids.rows())
                .map(|(cb, c)| cb.abs() / norm2(c))
                .fold(0.0, f64::max);
        let tol = 1e-12 * scale;
        Ok(r.iter().position(|&v| v >= r_max - tol).unwrap_or(0))
    }

    /// Writes `row_index,cluster_index`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::datagen::write_labels(path, &self.assignments, "cluster_index")
    }
}

/// Flips `v` so its first nonzero coordinate is positive; returns the sign used.
fn canonical_sign(v: &[f64]) -> f64 {
    match v.iter().find(|&&x| x != 0.0) {
        Some(&x) if x < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Spherical Lloyd iteration on the rows of `a`.
pub fn cluster_rows(
    a: &DenseMatrix,
    b: &[f64],
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<RowClustering> {
    let (n, p) = a.shape();
    if k == 0 || k > n {
        return Err(Error::Arity(format!("cannot form {k} clusters from {n} rows")));
    }
    if b.len() != n {
        return Err(Error::Arity(format!("b has length {}, A has {n} rows", b.len())));
    }
    let norms = row_norms(a);
    if let Some(i) = norms.iter().position(|&v| v == 0.0) {
        return Err(Error::DegenerateRow(i));
    }
    // Unit rows, sign-canonicalized.
    let mut units = Vec::with_capacity(n * p);
    for (row, &nrm) in a.rows().zip(&norms) {
        let s = canonical_sign(row);
        units.extend(row.iter().map(|v| s * v / nrm));
    }
    let units = DenseMatrix::new(n, p, units)?;

    let mut centroids = farthest_first(&units, k, seed);
    let mut assignments = vec![usize::MAX; n];
    let mut signs = vec![1.0; n];
    let mut cost_trace = Vec::new();

    for _ in 0..max_iters.max(1) {
        let mut next = vec![0usize; n];
        let mut sim = vec![0.0; n];
        for i in 0..n {
            let u = units.row(i);
            let (mut best, mut best_sim, mut best_dot) = (0usize, f64::NEG_INFINITY, 0.0);
            for (l, c) in centroids.iter().enumerate() {
                let d = dot(u, c);
                if d.abs() > best_sim {
                    best = l;
                    best_sim = d.abs();
                    best_dot = d;
                }
            }
            next[i] = best;
            sim[i] = best_sim;
            signs[i] = if best_dot < 0.0 { -1.0 } else { 1.0 };
        }
        repair_empty_clusters(&mut next, &mut sim, &mut signs, k);
        cost_trace.push(sim.iter().map(|s| 1.0 - s).sum());

        let changed = next != assignments;
        assignments = next;
        centroids = update_centroids(&units, &assignments, &signs, &centroids);
        if !changed {
            break;
        }
    }

    let mut cluster_sizes = vec![0usize; k];
    for &c in &assignments {
        cluster_sizes[c] += 1;
    }

    // Mean of the aligned, normalized equations, rescaled to a unit normal.
    let mut num = vec![0.0; k];
    let mut mean_rows = vec![vec![0.0; p]; k];
    for i in 0..n {
        let c = assignments[i];
        let s = signs[i];
        // units already carry the canonical sign; recover it for b.
        let canon = canonical_sign(a.row(i));
        num[c] += s * canon * b[i] / norms[i];
        for (m, u) in mean_rows[c].iter_mut().zip(units.row(i)) {
            *m += s * u;
        }
    }
    let centroid_b = (0..k).map(|c| num[c] / norm2(&mean_rows[c])).collect();
    let data = centroids.into_iter().flatten().collect();

    // Report signs relative to the original rows.
    for (i, s) in signs.iter_mut().enumerate() {
        *s *= canonical_sign(a.row(i));
    }

    Ok(RowClustering {
        k,
        assignments,
        signs,
        centroids: DenseMatrix::new(k, p, data)?,
        cluster_sizes,
        centroid_b,
        seed,
        cost_trace,
    })
}

/// Seeded random first centroid, then repeatedly the row with the smallest
/// best `|cos|` to the centroids chosen so far.
fn farthest_first(units: &DenseMatrix, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = units.n_rows();
    let mut rng = rng_for(seed, stream::CLUSTERING);
    let first = rng.random_range(0..n);
    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut centroids = vec![units.row(first).to_vec()];
    let mut best_sim: Vec<f64> = (0..n).map(|i| dot(units.row(i), units.row(first)).abs()).collect();
    while centroids.len() < k {
        let mut pick = usize::MAX;
        for i in 0..n {
            if !chosen[i] && (pick == usize::MAX || best_sim[i] < best_sim[pick]) {
                pick = i;
            }
        }
        chosen[pick] = true;
        let c = units.row(pick).to_vec();
        for i in 0..n {
            best_sim[i] = best_sim[i].max(dot(units.row(i), &c).abs());
        }
        centroids.push(c);
    }
    centroids
}

/// Moves the worst-fitting row into each empty cluster as a singleton.
fn repair_empty_clusters(assign: &mut [usize], sim: &mut [f64], signs: &mut [f64], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &c in assign.iter() {
            sizes[c] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let worst = (0..assign.len())
            .filter(|&i| sizes[assign[i]] > 1)
            .min_by(|&i, &j| sim[i].total_cmp(&sim[j]).then(i.cmp(&j)))
            .expect("k <= n leaves a cluster with two or more rows");
        assign[worst] = empty;
        sim[worst] = 1.0;
        signs[worst] = 1.0;
    }
}

fn update_centroids(
    units: &DenseMatrix,
    assign: &[usize],
    signs: &[f64],
    previous: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let p = units.n_cols();
    let mut sums = vec![vec![0.0; p]; previous.len()];
    for (i, &c) in assign.iter().enumerate() {
        for (s, u) in sums[c].iter_mut().zip(units.row(i)) {
            *s += signs[i] * u;
        }
    }
    sums.into_iter()
        .zip(previous)
        .map(|(s, prev)| {
            let nrm = norm2(&s);
            if nrm > 0.0 {
                s.into_iter().map(|v| v / nrm).collect()
            } else {
                prev.clone()
            }
        })
        .collect()
}
