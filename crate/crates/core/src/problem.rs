//! Problem data and regularization hyperparameters.

use crate::error::Error;
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;

/// Regularization weights `(lambda0, lambda1, lambda2)`.
///
/// The activity threshold `eta0 = (2 sqrt(lambda0 lambda2) + lambda1) /
/// (2 lambda2)` is always recomputed from the stored weights. Operations of
/// the duality layer require `lambda2 > 0`; `lambda2 = 0` is accepted at
/// construction for the purely primal solvers (coordinate descent, the
/// exhaustive oracle), which never divide by it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    lambda0: f64,
    lambda1: f64,
    lambda2: f64,
}

impl Hyperparams {
    pub fn new(lambda0: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return Err(Error::InvalidHyperparams("lambda0 must be finite and >= 0"));
        }
        if !(lambda1.is_finite() && lambda1 >= 0.0) {
            return Err(Error::InvalidHyperparams("lambda1 must be finite and >= 0"));
        }
        if !(lambda2.is_finite() && lambda2 >= 0.0) {
            return Err(Error::InvalidHyperparams("lambda2 must be finite and >= 0"));
        }
        Ok(Hyperparams {
            lambda0,
            lambda1,
            lambda2,
        })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Activity threshold `eta0`; requires `lambda2 > 0`.
    pub fn eta0(&self) -> f64 {
        debug_assert!(self.lambda2 > 0.0);
        (2.0 * sqrt(self.lambda0 * self.lambda2) + self.lambda1) / (2.0 * self.lambda2)
    }

    /// Screening threshold `2 lambda2 eta0 = 2 sqrt(lambda0 lambda2) + lambda1`.
    pub fn screening_threshold(&self) -> f64 {
        2.0 * sqrt(self.lambda0 * self.lambda2) + self.lambda1
    }

    /// Validates the requirements of the dual-geometry layer.
    pub fn require_dual(&self) -> Result<()> {
        if self.lambda2 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidHyperparams(
                "lambda2 must be > 0 for dual operations",
            ))
        }
    }
}

/// Immutable dense design matrix and response.
///
/// Storage is column-major so feature columns are contiguous, which is the
/// access pattern of screening, coordinate descent, and `X' alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    n: usize,
    p: usize,
    cols: Vec<f64>,
    y: Vec<f64>,
    col_norms: Vec<f64>,
}

impl ProblemData {
    /// Builds from column-major storage (`cols[j * n + i]` is `X[i, j]`).
    pub fn from_columns(n: usize, p: usize, cols: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if cols.len() != n * p {
            return Err(Error::ShapeMismatch {
                expected: n * p,
                got: cols.len(),
            });
        }
        if y.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if cols.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry in X or y"));
        }
        let mut col_norms = vec![0.0; p];
        for (j, norm) in col_norms.iter_mut().enumerate() {
            let c = &cols[j * n..(j + 1) * n];
            *norm = sqrt(c.iter().map(|v| v * v).sum());
        }
        Ok(ProblemData {
            n,
            p,
            cols,
            y,
            col_norms,
        })
    }

    /// Builds from row-major storage (`rows[i * p + j]` is `X[i, j]`).
    pub fn from_rows(n: usize, p: usize, rows: &[f64], y: Vec<f64>) -> Result<Self> {
        if rows.len() != n * p {
            return Err(Error::ShapeMismatch {
                expected: n * p,
                got: rows.len(),
            });
        }
        let mut cols = vec![0.0; n * p];
        for i in 0..n {
            for j in 0..p {
                cols[j * n + i] = rows[i * p + j];
            }
        }
        Self::from_columns(n, p, cols, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Feature column `j` as a contiguous slice.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// Cached `||x_.j||_2`.
    #[inline]
    pub fn col_norm(&self, j: usize) -> f64 {
        self.col_norms[j]
    }

    /// `x_.j' v`.
    #[inline]
    pub fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.n);
        self.column(j).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// `X beta`, skipping zero coefficients.
    pub fn predictions(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.p {
            return Err(Error::ShapeMismatch {
                expected: self.p,
                got: beta.len(),
            });
        }
        let mut u = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (ui, xij) in u.iter_mut().zip(self.column(j)) {
                    *ui += b * xij;
                }
            }
        }
        Ok(u)
    }

    /// `X' v`.
    pub fn xt_dot(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.n {
            return Err(Error::ShapeMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        Ok((0..self.p).map(|j| self.col_dot(j, v)).collect())
    }

    /// New problem restricted to the given columns (response unchanged).
    pub fn select_columns(&self, idx: &[usize]) -> ProblemData {
        let mut cols = Vec::with_capacity(idx.len() * self.n);
        let mut col_norms = Vec::with_capacity(idx.len());
        for &j in idx {
            cols.extend_from_slice(self.column(j));
            col_norms.push(self.col_norms[j]);
        }
        ProblemData {
            n: self.n,
            p: idx.len(),
            cols,
            y: self.y.clone(),
            col_norms,
        }
    }

    /// New problem restricted to the given rows and columns.
    pub fn select(&self, rows: &[usize], cols_idx: &[usize]) -> Result<ProblemData> {
        if rows.iter().any(|&i| i >= self.n) || cols_idx.iter().any(|&j| j >= self.p) {
            return Err(Error::Domain("row/column index out of bounds"));
        }
        let n = rows.len();
        let mut cols = Vec::with_capacity(n * cols_idx.len());
        for &j in cols_idx {
            let c = self.column(j);
            cols.extend(rows.iter().map(|&i| c[i]));
        }
        let y = rows.iter().map(|&i| self.y[i]).collect();
        ProblemData::from_columns(n, cols_idx.len(), cols, y)
    }

    /// Rescales every column to unit l2 norm.
    ///
    /// Returns the normalized data and the per-column scales; a coefficient
    /// on the scaled data maps back as `beta_original[j] = beta_scaled[j] /
    /// scale[j]`. All-zero columns are left untouched with scale 1.
    pub fn normalize_columns(&self) -> (ProblemData, Vec<f64>) {
        let mut cols = self.cols.clone();
        let mut scales = vec![1.0; self.p];
        for j in 0..self.p {
            let norm = self.col_norms[j];
            if norm > 0.0 {
                scales[j] = norm;
                for v in &mut cols[j * self.n..(j + 1) * self.n] {
                    *v /= norm;
                }
            }
        }
        let data = ProblemData::from_columns(self.n, self.p, cols, self.y.clone())
            .expect("normalization preserves validity");
        (data, scales)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn eta0_closed_form() {
        let hp = Hyperparams::new(0.1, 0.2, 1.0).unwrap();
        assert!((hp.eta0() - 0.416_227_766_016_837_9).abs() < 1e-15);
        let hp = Hyperparams::new(0.0, 0.0, 1.0).unwrap();
        assert_eq!(hp.eta0(), 0.0);
    }

    #[test]
    fn rejects_bad_hyperparams() {
        assert!(Hyperparams::new(-0.1, 0.0, 1.0).is_err());
        assert!(Hyperparams::new(0.1, f64::NAN, 1.0).is_err());
        assert!(Hyperparams::new(0.1, 0.0, 0.0).is_ok());
        assert!(Hyperparams::new(0.1, 0.0, 0.0)
            .unwrap()
            .require_dual()
            .is_err());
    }

    #[test]
    fn column_layout_round_trip() {
        // X = [[1, 2], [3, 4], [5, 6]]
        let d = ProblemData::from_rows(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], vec![1.0, 0.0, 2.0])
            .unwrap();
        assert_eq!(d.column(0), &[1.0, 3.0, 5.0]);
        assert_eq!(d.column(1), &[2.0, 4.0, 6.0]);
        assert!((d.col_norm(0) - libm::sqrt(35.0)).abs() < 1e-12);
        let u = d.predictions(&[1.0, -1.0]).unwrap();
        assert_eq!(u, vec![-1.0, -1.0, -1.0]);
        let xt = d.xt_dot(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(xt, vec![9.0, 12.0]);
    }

    #[test]
    fn rejects_non_finite() {
        let r = ProblemData::from_rows(1, 1, &[f64::INFINITY], vec![0.0]);
        assert!(r.is_err());
    }

    #[test]
    fn normalization_round_trip() {
        let d = ProblemData::from_rows(2, 2, &[3.0, 0.0, 4.0, 2.0], vec![1.0, -1.0]).unwrap();
        let (nd, scales) = d.normalize_columns();
        assert!((nd.col_norm(0) - 1.0).abs() < 1e-12);
        assert!((nd.col_norm(1) - 1.0).abs() < 1e-12);
        // predictions preserved under beta_original = beta_scaled / scale
        let beta_scaled = vec![0.7, -0.3];
        let beta_orig: alloc::vec::Vec<f64> = beta_scaled
            .iter()
            .zip(&scales)
            .map(|(b, s)| b / s)
            .collect();
        let u1 = nd.predictions(&beta_scaled).unwrap();
        let u2 = d.predictions(&beta_orig).unwrap();
        for (a, b) in u1.iter().zip(&u2) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
