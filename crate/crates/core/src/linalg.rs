//! Small dense linear algebra for p×p problems.
//!
//! Coefficient dimensions here are tiny (p ≤ ~20), so a row-major `Vec<f64>`
//! with a hand-rolled Cholesky factorization is all that is needed.

use serde::{Deserialize, Serialize};

use crate::error::{CoxError, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(CoxError::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), v)).collect()
    }

    /// `vᵀ M v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    /// `self += scale * v vᵀ`.
    pub fn add_outer(&mut self, v: &[f64], scale: f64) {
        let n = self.n;
        for i in 0..n {
            let vi = scale * v[i];
            for j in 0..n {
                self.data[i * n + j] += vi * v[j];
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += s * b);
    }

    /// Average the matrix with its transpose.
    pub fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            for j in (i + 1)..n {
                let m = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                self.data[i * n + j] = m;
                self.data[j * n + i] = m;
            }
        }
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
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

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Fails with [`CoxError::HessianSingular`] on a non-positive pivot.
    pub fn new(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        let mut l = Matrix::zeros(n);
        let scale = (0..n).fold(0.0f64, |m, i| m.max(a[(i, i)].abs()));
        let floor = scale * 1e-14;
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !d.is_finite() || d <= floor {
                return Err(CoxError::HessianSingular);
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn factor(&self) -> &Matrix {
        &self.l
    }

    /// Solve `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let mut x = self.forward(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[(k, i)] * x[k];
            }
            x[i] = s / self.l[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.l.dim();
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv.symmetrize();
        inv
    }
}

/// `A⁻¹ B A⁻¹` for symmetric positive-definite `A`.
pub fn sandwich(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let a_inv = Cholesky::new(a)?.inverse();
    let mut s = a_inv.matmul(b).matmul(&a_inv);
    s.symmetrize();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd3() -> Matrix {
        Matrix::from_row_major(3, vec![4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd3();
        let l = Cholesky::new(&a).unwrap();
        let rec = l.factor().matmul(&l.factor().transpose());
        for (x, y) in rec.as_slice().iter().zip(a.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = spd3();
        let inv = Cholesky::new(&a).unwrap().inverse();
        let id = a.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Matrix::from_row_major(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(Cholesky::new(&a), Err(CoxError::HessianSingular)));
        let z = Matrix::zeros(2);
        assert!(matches!(Cholesky::new(&z), Err(CoxError::HessianSingular)));
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = Matrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(Cholesky::new(&a).is_err());
    }

    #[test]
    fn solve_matches_known() {
        let a = Matrix::from_row_major(2, vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        let x = Cholesky::new(&a).unwrap().solve(&[3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-15);
        assert!((x[1] - 1.4).abs() < 1e-15);
    }
}
