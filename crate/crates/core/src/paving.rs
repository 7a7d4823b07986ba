//! Row pavings: partitions of the row set into blocks, with the spectral
//! constants of each block and the expected-error bound for randomized block
//! Kaczmarz driven by a paving.

use rand::seq::SliceRandom;

use crate::cluster::RowClustering;
use crate::error::{Error, Result};
use crate::linalg::{self, distance_sq, normalize_rows, DenseMatrix};
use crate::rng::{rng_for, stream};

/// Spectral summary of one row-normalized block `Â_τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpectrum {
    /// `λ_min(Â_τ Â_τᵀ)`.
    pub lambda_min: f64,
    /// `λ_max(Â_τ Â_τᵀ)`.
    pub lambda_max: f64,
    /// `λ_max / λ_min`; infinite for rank-deficient blocks.
    pub cond: f64,
    /// `‖Â_τ‖₂ = √λ_max`.
    pub spectral_norm: f64,
    /// Orthogonality value; `None` for single-row blocks.
    pub ov: Option<f64>,
}

pub fn block_spectrum(a: &DenseMatrix, rows: &[usize]) -> Result<BlockSpectrum> {
    let block = normalize_rows(&a.select_rows(rows)).map_err(|e| match e {
        Error::DegenerateRow(local) => Error::DegenerateRow(rows[local]),
        other => other,
    })?;
    let (lambda_min, lambda_max) = linalg::gram_extreme_eigenvalues(&block)?;
    let tol = block.n_rows().max(block.n_cols()) as f64 * f64::EPSILON * lambda_max;
    let cond = if lambda_min > tol {
        (lambda_max / lambda_min).max(1.0)
    } else {
        f64::INFINITY
    };
    let ov = if rows.len() >= 2 {
        Some(linalg::orthogonality_value(&block)?)
    } else {
        None
    };
    Ok(BlockSpectrum {
        lambda_min,
        lambda_max,
        cond,
        spectral_norm: lambda_max.sqrt(),
        ov,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowPaving {
    blocks: Vec<Vec<usize>>,
    alpha: f64,
    beta: f64,
    per_block: Vec<BlockSpectrum>,
}

impl RowPaving {
    /// Validates that `blocks` partition `0..n` and computes block spectra.
    pub fn from_blocks(a: &DenseMatrix, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = a.n_rows();
        let mut seen = vec![false; n];
        for block in &blocks {
            if block.is_empty() {
                return Err(Error::DegeneratePaving("empty block".into()));
            }
            for &i in block {
                if i >= n {
                    return Err(Error::DegeneratePaving(format!("row {i} out of range")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::DegeneratePaving(format!("row {i} appears twice")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(Error::DegeneratePaving(format!("row {missing} is not covered")));
        }
        let per_block = blocks
            .iter()
            .map(|b| block_spectrum(a, b))
            .collect::<Result<Vec<_>>>()?;
        let alpha = per_block.iter().map(|s| s.lambda_min).fold(f64::INFINITY, f64::min);
        let beta = per_block.iter().map(|s| s.lambda_max).fold(0.0, f64::max);
        Ok(Self {
            blocks,
            alpha,
            beta,
            per_block,
        })
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn per_block(&self) -> &[BlockSpectrum] {
        &self.per_block
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
}

/// Random permutation of the rows cut into consecutive blocks of
/// `block_size` (the last block may be shorter).
pub fn build_random_paving(a: &DenseMatrix, block_size: usize, seed: u64) -> Result<RowPaving> {
    let n = a.n_rows();
    if block_size == 0 || block_size > n {
        return Err(Error::InvalidArgument(format!(
            "block size {block_size} must be in 1..={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, stream::PAVING));
    let blocks = order.chunks(block_size).map(<[usize]>::to_vec).collect();
    RowPaving::from_blocks(a, blocks)
}

/// One row from every cluster per block. Once a cluster runs out, later
/// blocks draw from the clusters that still have rows, so block sizes shrink
/// from `k` to `k − 1` and further until every row has been placed.
pub fn build_cluster_paving(
    a: &DenseMatrix,
    clustering: &RowClustering,
    seed: u64,
) -> Result<RowPaving> {
    if clustering.assignments().len() != a.n_rows() {
        return Err(Error::Arity(format!(
            "clustering covers {} rows, A has {}",
            clustering.assignments().len(),
            a.n_rows()
        )));
    }
    let mut rng = rng_for(seed, stream::PAVING);
    let mut pools: Vec<Vec<usize>> = (0..clustering.k())
        .map(|l| {
            let mut m = clustering.members(l);
            m.shuffle(&mut rng);
            m
        })
        .collect();
    let mut blocks = Vec::new();
    loop {
        let block: Vec<usize> = pools.iter_mut().filter_map(Vec::pop).collect();
        if block.is_empty() {
            break;
        }
        blocks.push(block);
    }
    RowPaving::from_blocks(a, blocks)
}

/// Expected squared-error bound for randomized block Kaczmarz with uniform
/// block choice over a paving of the (unnormalized) rows of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Bound {
    /// `1 − σ²_min(A) / (m β)`.
    pub coefficient: f64,
    /// `‖e‖² / (m α)`, added at every step of the recursion.
    pub step_noise: f64,
    /// `(β / α) ‖e‖² / σ²_min(A)`.
    pub noise_floor: f64,
    /// `‖x₀ − x*‖²`.
    pub initial_error_sq: f64,
    pub sigma_min_sq: f64,
    pub m: usize,
    /// `min_τ λ_min(A_τ A_τᵀ)` on the unnormalized blocks.
    pub alpha: f64,
    /// `max_τ λ_max(A_τ A_τᵀ)` on the unnormalized blocks.
    pub beta: f64,
}

impl Lemma1Bound {
    /// Closed form after `j` steps: `coefficient^j ‖x₀ − x*‖² + noise_floor`.
    pub fn at(&self, j: usize) -> f64 {
        self.coefficient.powi(j as i32) * self.initial_error_sq + self.noise_floor
    }

    /// One step of the recursion from a previous expected squared error.
    pub fn next(&self, previous: f64) -> f64 {
        self.coefficient * previous + self.step_noise
    }
}

pub fn lemma1_bound(
    a: &DenseMatrix,
    paving: &RowPaving,
    x0: &[f64],
    x_star: &[f64],
    e: &[f64],
) -> Result<Lemma1Bound> {
    let (n, p) = a.shape();
    if x0.len() != p || x_star.len() != p || e.len() != n {
        return Err(Error::Arity("x0, x_star must have length p and e length n".into()));
    }
    if n < p {
        return Err(Error::DegenerateSystem(format!(
            "A is {n}x{p} and cannot have full column rank"
        )));
    }
    let s = linalg::singular_values(a)?;
    let smin = *s.last().unwrap();
    if smin <= n.max(p) as f64 * f64::EPSILON * s[0] {
        return Err(Error::DegenerateSystem("A is rank deficient".into()));
    }
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for block in paving.blocks() {
        let (lo, hi) = linalg::gram_extreme_eigenvalues(&a.select_rows(block))?;
        alpha = alpha.min(lo);
        beta = beta.max(hi);
    }
    if alpha <= 0.0 {
        return Err(Error::DegeneratePaving(format!(
            "smallest block eigenvalue is {alpha}"
        )));
    }
    let m = paving.m();
    let sigma_min_sq = smin * smin;
    let e_sq: f64 = e.iter().map(|v| v * v).sum();
    Ok(Lemma1Bound {
        coefficient: 1.0 - sigma_min_sq / (m as f64 * beta),
        step_noise: e_sq / (m as f64 * alpha),
        noise_floor: beta / alpha * e_sq / sigma_min_sq,
        initial_error_sq: distance_sq(x0, x_star),
        sigma_min_sq,
        m,
        alpha,
        beta,
    })
}
