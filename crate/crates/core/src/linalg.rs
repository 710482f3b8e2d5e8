//! Small dense symmetric-matrix helpers for covariance handling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Matrix::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Matrix::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension { expected: n, got: row.len() });
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix { n: self.n, data: self.data.iter().map(|x| x * factor).collect() }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            (0..i).all(|j| {
                let (a, b) = (self[(i, j)], self[(j, i)]);
                (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
            })
        })
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self[(i, j)] == 0.0))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = A` for a positive semidefinite `A`.
///
/// Pivots at or below `tol · max(A_jj, 1)` are treated as zero, giving a
/// reduced-rank factor with an all-zero column. A pivot below `-tol` or a
/// non-vanishing residual under a zero pivot means `A` is not PSD.
pub fn cholesky_psd(a: &Matrix, tol: f64) -> Result<Matrix> {
    let n = a.dim();
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let scale = a[(j, j)].abs().max(1.0);
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -tol * scale {
            return Err(Error::NotPsd { pivot: j, value: d });
        }
        if d <= tol * scale {
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                let bound = 10.0 * (tol * scale * a[(i, i)].abs().max(tol)).sqrt();
                if s.abs() > bound {
                    return Err(Error::NotPsd { pivot: j, value: d });
                }
            }
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Rejects asymmetric or indefinite covariance matrices.
pub fn check_covariance(cov: &Matrix) -> Result<()> {
    if !cov.is_symmetric(1e-12) {
        return Err(Error::Spec("covariance matrix is not symmetric".into()));
    }
    let sd: Vec<f64> = cov.diag().iter().map(|v| if *v > 0.0 { v.sqrt() } else { 0.0 }).collect();
    for (j, v) in cov.diag().iter().enumerate() {
        if *v < 0.0 || !v.is_finite() {
            return Err(Error::NotPsd { pivot: j, value: *v });
        }
    }
    // Work on the correlation scale so that tiny variances are not swamped by the tolerance.
    let n = cov.dim();
    let mut corr = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if sd[i] > 0.0 && sd[j] > 0.0 {
                corr[(i, j)] = cov[(i, j)] / (sd[i] * sd[j]);
            } else if cov[(i, j)] != 0.0 {
                return Err(Error::NotPsd { pivot: i.min(j), value: cov[(i, j)] });
            }
        }
    }
    cholesky_psd(&corr, 1e-10).map(|_| ())
}
