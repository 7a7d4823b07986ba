//! Dense row-major matrices and the handful of kernels the solvers and the
//! paving analysis need: norms, row normalization, SVD-backed least-norm
//! solves and the spectral quantities of small blocks.

use nalgebra::linalg::SVD;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SVD_MAX_ITERS: usize = 100_000;

/// Real matrix stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidMatrix(format!(
                "shape {n_rows}x{n_cols} has an empty dimension"
            )));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / n_cols,
                pos % n_cols
            )));
        }
        Ok(Self {
            n_rows,
            n_cols,
            data,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {n_cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(n_rows, n_cols, data)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        assert!(n_rows > 0 && n_cols > 0, "empty matrix shape");
        Self {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_cols)
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        assert!(!indices.is_empty(), "cannot select zero rows");
        let mut data = Vec::with_capacity(indices.len() * self.n_cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            n_rows: indices.len(),
            n_cols: self.n_cols,
            data,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                data[j * self.n_rows + i] = self.get(i, j);
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            data,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::Arity(format!(
                "matrix has {} columns but vector has length {}",
                self.n_cols,
                x.len()
            )));
        }
        Ok(self.rows().map(|r| dot(r, x)).collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Arity(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut data = vec![0.0; self.n_rows * other.n_cols];
        for i in 0..self.n_rows {
            let out = &mut data[i * other.n_cols..(i + 1) * other.n_cols];
            for (l, &a) in self.row(i).iter().enumerate() {
                if a != 0.0 {
                    axpy(a, other.row(l), out);
                }
            }
        }
        Ok(DenseMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            data,
        })
    }

    /// `A Aᵀ`.
    pub fn gram(&self) -> DenseMatrix {
        let n = self.n_rows;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        DenseMatrix {
            n_rows: n,
            n_cols: n,
            data,
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        (0..self.n_cols)
            .map(|j| (0..self.n_rows).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.rows()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_rows, self.n_cols, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn distance_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn row_norms(a: &DenseMatrix) -> Vec<f64> {
    a.rows().map(norm2).collect()
}

pub fn frobenius_norm_sq(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum()
}

pub fn normalize_rows(a: &DenseMatrix) -> Result<DenseMatrix> {
    let mut data = Vec::with_capacity(a.as_slice().len());
    for (i, r) in a.rows().enumerate() {
        let nrm = norm2(r);
        if nrm == 0.0 {
            return Err(Error::DegenerateRow(i));
        }
        data.extend(r.iter().map(|v| v / nrm));
    }
    DenseMatrix::new(a.n_rows, a.n_cols, data)
}

/// Thin SVD `M = U diag(s) Vᵀ` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Cutoff under which singular values are treated as zero.
    pub fn rank_tolerance(&self) -> f64 {
        let dim = self.u.nrows().max(self.v_t.ncols()) as f64;
        dim * f64::EPSILON * self.sigma_max()
    }
}

pub fn svd(m: &DenseMatrix) -> Result<Svd> {
    let mut svd = SVD::try_new_unordered(
        m.to_nalgebra(),
        true,
        true,
        f64::EPSILON * 5.0,
        SVD_MAX_ITERS,
    )
    .ok_or_else(|| {
        Error::Computation(format!(
            "SVD of {}x{} matrix did not converge",
            m.n_rows, m.n_cols
        ))
    })?;
    svd.sort_by_singular_values();
    Ok(Svd {
        u: svd.u.expect("u requested"),
        singular_values: svd.singular_values.iter().copied().collect(),
        v_t: svd.v_t.expect("v_t requested"),
    })
}

pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new_unordered(
        m.to_nalgebra(),
        false,
        false,
        f64::EPSILON * 5.0,
        SVD_MAX_ITERS,
    )
    .ok_or_else(|| {
        Error::Computation(format!(
            "SVD of {}x{} matrix did not converge",
            m.n_rows, m.n_cols
        ))
    })?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Moore-Penrose pseudo-inverse (`n_cols × n_rows`).
pub fn pseudo_inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    let s = svd(m)?;
    let tol = s.rank_tolerance();
    let (n, p) = m.shape();
    let mut data = vec![0.0; p * n];
    for (l, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= tol || sigma == 0.0 {
            continue;
        }
        let inv = 1.0 / sigma;
        for c in 0..p {
            let v = s.v_t[(l, c)] * inv;
            if v == 0.0 {
                continue;
            }
            for r in 0..n {
                data[c * n + r] += v * s.u[(r, l)];
            }
        }
    }
    DenseMatrix::new(p, n, data)
}

/// Minimum-norm least-squares solution of `M z = r`.
pub fn least_norm_solve(m: &DenseMatrix, r: &[f64]) -> Result<Vec<f64>> {
    if r.len() != m.n_rows {
        return Err(Error::Arity(format!(
            "right-hand side has length {}, matrix has {} rows",
            r.len(),
            m.n_rows
        )));
    }
    let s = svd(m)?;
    let tol = s.rank_tolerance();
    let mut z = vec![0.0; m.n_cols];
    for (l, &sigma) in s.singular_values.iter().enumerate() {
        if sigma <= tol || sigma == 0.0 {
            continue;
        }
        let coef = (0..m.n_rows).map(|i| s.u[(i, l)] * r[i]).sum::<f64>() / sigma;
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += coef * s.v_t[(l, c)];
        }
    }
    Ok(z)
}

pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

/// Smallest of the `min(n_rows, n_cols)` singular values.
pub fn min_singular_value(m: &DenseMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(*s.last().expect("at least one singular value"))
}

/// Extreme eigenvalues `(λ_min, λ_max)` of `A Aᵀ`, taken from the singular
/// values of `A` rather than from the Gram matrix itself.
pub fn gram_extreme_eigenvalues(a: &DenseMatrix) -> Result<(f64, f64)> {
    let s = singular_values(a)?;
    let smax = s[0];
    let lambda_max = smax * smax;
    // A Aᵀ is n×n but has at most p nonzero eigenvalues.
    let lambda_min = if a.n_rows > a.n_cols {
        0.0
    } else {
        let smin = *s.last().unwrap();
        smin * smin
    };
    Ok((lambda_min, lambda_max))
}

/// `cond(A Aᵀ) = σ_max(A)² / σ_min(A)²`.
pub fn condition_number_gram(a: &DenseMatrix) -> Result<f64> {
    if a.n_rows > a.n_cols {
        return Err(Error::InfiniteCondition);
    }
    let s = singular_values(a)?;
    let smax = s[0];
    let smin = *s.last().unwrap();
    let tol = a.n_rows.max(a.n_cols) as f64 * f64::EPSILON * smax;
    if smin <= tol {
        return Err(Error::InfiniteCondition);
    }
    Ok((smax / smin).powi(2).max(1.0))
}

/// `ov(A) = max_{i≠j} |⟨Â_i, Â_j⟩|` over the row-normalized matrix.
pub fn orthogonality_value(a: &DenseMatrix) -> Result<f64> {
    if a.n_rows < 2 {
        return Err(Error::Arity(format!(
            "orthogonality value needs at least 2 rows, got {}",
            a.n_rows
        )));
    }
    let hat = normalize_rows(a)?;
    let mut ov = 0.0f64;
    for i in 0..hat.n_rows {
        for j in (i + 1)..hat.n_rows {
            ov = ov.max(dot(hat.row(i), hat.row(j)).abs());
        }
    }
    Ok(ov.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DenseMatrix {
        let data = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
        DenseMatrix::new(n, p, data).unwrap()
    }

    /// Cyclic Jacobi eigenvalues of a symmetric matrix; independent of the SVD path.
    fn jacobi_eigenvalues(m: &DenseMatrix) -> Vec<f64> {
        let n = m.n_rows();
        let mut a: Vec<Vec<f64>> = m.rows().map(|r| r.to_vec()).collect();
        for _ in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[i][i]).collect()
    }

    #[test]
    fn row_norms_examples() {
        assert_eq!(row_norms(&DenseMatrix::identity(3)), vec![1.0, 1.0, 1.0]);
        let m = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        assert_eq!(row_norms(&m), vec![5.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_matrix(&mut rng, 10, 4);
        let norms = row_norms(&m);
        for i in 0..10 {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += m.get(i, j) * m.get(i, j);
            }
            assert_relative_eq!(norms[i], acc.sqrt(), max_relative = 1e-15);
        }
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm_sq(&DenseMatrix::identity(3)), 3.0);
        let m = DenseMatrix::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        assert_eq!(frobenius_norm_sq(&m), 25.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_matrix(&mut rng, 8, 8);
        let via_rows: f64 = row_norms(&m).iter().map(|v| v * v).sum();
        assert_relative_eq!(frobenius_norm_sq(&m), via_rows, max_relative = 1e-12);
    }

    #[test]
    fn least_norm_examples() {
        let z = least_norm_solve(&DenseMatrix::identity(2), &[1.0, 2.0]).unwrap();
        assert_relative_eq!(z[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(z[1], 2.0, epsilon = 1e-14);

        let z = least_norm_solve(&DenseMatrix::from_rows(&[[2.0, 0.0]]).unwrap(), &[4.0]).unwrap();
        assert_relative_eq!(z[0], 2.0, epsilon = 1e-14);
        assert!(z[1].abs() < 1e-14);
    }

    #[test]
    fn least_norm_wide_block_is_orthogonal_to_null_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 3, 6);
        let r: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let z = least_norm_solve(&m, &r).unwrap();
        let mz = m.matvec(&z).unwrap();
        for (a, b) in mz.iter().zip(&r) {
            assert!((a - b).abs() < 1e-9);
        }
        // Null-space samples: project random vectors off the row space.
        let pinv = pseudo_inverse(&m).unwrap();
        for _ in 0..5 {
            let w: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let proj = pinv.matvec(&m.matvec(&w).unwrap()).unwrap();
            let null = sub(&w, &proj);
            assert!(m.matvec(&null).unwrap().iter().all(|v| v.abs() < 1e-10));
            assert!(dot(&null, &z).abs() < 1e-9);
        }
    }

    #[test]
    fn least_norm_arity() {
        let err = least_norm_solve(&DenseMatrix::identity(2), &[1.0]).unwrap_err();
        assert!(matches!(err, Error::Arity(_)));
    }

    #[test]
    fn spectral_norm_examples() {
        assert_relative_eq!(spectral_norm(&DenseMatrix::identity(4)).unwrap(), 1.0, max_relative = 1e-12);
        let d = DenseMatrix::from_rows(&[[3.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_relative_eq!(spectral_norm(&d).unwrap(), 3.0, max_relative = 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_matrix(&mut rng, 5, 5);
        let sym = DenseMatrix::new(
            5,
            5,
            (0..25).map(|k| m.get(k / 5, k % 5) + m.get(k % 5, k / 5)).collect(),
        )
        .unwrap();
        let eig = jacobi_eigenvalues(&sym);
        let expected = eig.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert_relative_eq!(spectral_norm(&sym).unwrap(), expected, max_relative = 1e-8);
    }

    #[test]
    fn min_singular_value_examples() {
        assert_relative_eq!(min_singular_value(&DenseMatrix::identity(3)).unwrap(), 1.0, max_relative = 1e-12);
        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(min_singular_value(&m).unwrap() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_matrix(&mut rng, 4, 4);
        // σ_min² is the smallest eigenvalue of MᵀM.
        let mtm = m.transpose().matmul(&m).unwrap();
        let eig = jacobi_eigenvalues(&mtm);
        let expected = eig.iter().copied().fold(f64::INFINITY, f64::min).sqrt();
        assert_relative_eq!(min_singular_value(&m).unwrap(), expected, max_relative = 1e-8);
    }

    #[test]
    fn condition_number_examples() {
        let q = DenseMatrix::from_rows(&[[0.6, 0.8, 0.0], [-0.8, 0.6, 0.0]]).unwrap();
        assert_relative_eq!(condition_number_gram(&q).unwrap(), 1.0, max_relative = 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [h, h]]).unwrap();
        let expected = (1.0 + h) / (1.0 - h);
        assert_relative_eq!(condition_number_gram(&m).unwrap(), expected, max_relative = 1e-10);
        assert_relative_eq!(expected, 5.828427124746, max_relative = 1e-10);

        let dup = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(condition_number_gram(&dup), Err(Error::InfiniteCondition)));
    }

    #[test]
    fn orthogonality_value_examples() {
        assert_eq!(orthogonality_value(&DenseMatrix::identity(4)).unwrap(), 0.0);
        let ones = DenseMatrix::new(5, 5, vec![1.0; 25]).unwrap();
        assert_relative_eq!(orthogonality_value(&ones).unwrap(), 1.0, max_relative = 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [h, h]]).unwrap();
        assert_relative_eq!(orthogonality_value(&m).unwrap(), h, max_relative = 1e-15);

        let zero_row = DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(matches!(orthogonality_value(&zero_row), Err(Error::DegenerateRow(1))));
        let single = DenseMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        assert!(matches!(orthogonality_value(&single), Err(Error::Arity(_))));
    }

    #[test]
    fn normalize_rows_examples() {
        let m = normalize_rows(&DenseMatrix::from_rows(&[[3.0, 4.0]]).unwrap()).unwrap();
        assert_relative_eq!(m.get(0, 0), 0.6, epsilon = 1e-15);
        assert_relative_eq!(m.get(0, 1), 0.8, epsilon = 1e-15);
        assert_eq!(normalize_rows(&DenseMatrix::identity(3)).unwrap(), DenseMatrix::identity(3));

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = normalize_rows(&random_matrix(&mut rng, 6, 3)).unwrap();
        assert!(row_norms(&m).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(DenseMatrix::new(0, 3, vec![]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn matrix_strategy() -> impl Strategy<Value = DenseMatrix> {
            (1usize..8, 1usize..8).prop_flat_map(|(n, p)| {
                proptest::collection::vec(-10.0f64..10.0, n * p)
                    .prop_map(move |data| DenseMatrix::new(n, p, data).unwrap())
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn spectral_norm_below_one_inf_product(m in matrix_strategy()) {
                let s = spectral_norm(&m).unwrap();
                prop_assert!(s * s <= m.norm_1() * m.norm_inf() * (1.0 + 1e-12) + 1e-12);
            }
        }

        proptest! {
            #[test]
            fn least_norm_reproduces_consistent_rhs(
                m in matrix_strategy(),
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let z: Vec<f64> = (0..m.n_cols()).map(|_| rng.random_range(-3.0..3.0)).collect();
                let r = m.matvec(&z).unwrap();
                let z2 = least_norm_solve(&m, &r).unwrap();
                let r2 = m.matvec(&z2).unwrap();
                let scale = 1.0 + frobenius_norm_sq(&m).sqrt() * norm2(&z);
                for (a, b) in r.iter().zip(&r2) {
                    prop_assert!((a - b).abs() <= 1e-9 * scale);
                }
            }

            #[test]
            fn orthogonality_value_scale_invariant(
                m in matrix_strategy(),
                c in prop_oneof![-100.0f64..-0.01, 0.01f64..100.0],
            ) {
                prop_assume!(m.n_rows() >= 2);
                prop_assume!(row_norms(&m).iter().all(|&v| v > 1e-6));
                let a = orthogonality_value(&m).unwrap();
                let b = orthogonality_value(&m.scaled(c)).unwrap();
                prop_assert!((a - b).abs() <= 1e-12);
            }

            #[test]
            fn gram_condition_at_least_one(m in matrix_strategy()) {
                if let Ok(c) = condition_number_gram(&m) {
                    prop_assert!(c >= 1.0);
                }
            }
        }
    }
}
