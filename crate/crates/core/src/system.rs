use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, DenseMatrix};

/// A problem instance `A x = b`, optionally with the ground truth `x*` and the
/// noise vector `e = A x* − b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: DenseMatrix,
    b: Vec<f64>,
    x_star: Option<Vec<f64>>,
    e: Option<Vec<f64>>,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: Vec<f64>) -> Result<Self> {
        Self::with_truth(a, b, None)
    }

    /// Attaches a ground truth; `e` is computed from it.
    pub fn with_truth(a: DenseMatrix, b: Vec<f64>, x_star: Option<Vec<f64>>) -> Result<Self> {
        if b.len() != a.n_rows() {
            return Err(Error::Arity(format!(
                "b has length {}, A has {} rows",
                b.len(),
                a.n_rows()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("b has non-finite entries".into()));
        }
        let e = match &x_star {
            Some(x) => {
                if x.len() != a.n_cols() {
                    return Err(Error::Arity(format!(
                        "x_star has length {}, A has {} columns",
                        x.len(),
                        a.n_cols()
                    )));
                }
                let ax = a.matvec(x)?;
                Some(ax.iter().zip(&b).map(|(l, r)| l - r).collect())
            }
            None => None,
        };
        Ok(Self { a, b, x_star, e })
    }

    pub fn a(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn e(&self) -> Option<&[f64]> {
        self.e.as_deref()
    }

    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    pub fn p(&self) -> usize {
        self.a.n_cols()
    }

    /// `‖A x − b‖₂ / ‖b‖₂` (absolute residual when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r: f64 = self
            .a
            .rows()
            .zip(&self.b)
            .map(|(row, bi)| {
                let d = dot(row, x) - bi;
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let bn = norm2(&self.b);
        if bn > 0.0 {
            r / bn
        } else {
            r
        }
    }

    pub fn error_to_truth(&self, x: &[f64]) -> Option<f64> {
        self.x_star
            .as_ref()
            .map(|xs| xs.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    pub fn with_rhs(&self, b: Vec<f64>) -> Result<Self> {
        Self::with_truth(self.a.clone(), b, self.x_star.clone())
    }
}
