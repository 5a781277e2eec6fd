//! Dense eigenvalue helpers for metric checks and a banded complex LU used
//! by the implicit time stepper.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest eigenpair of the pencil `(m, g)` with `g` symmetric positive
/// definite, i.e. `min_{x != 0} <m x, x> / <g x, x>` and its minimizer.
pub fn min_generalized_eigen(m: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let chol = g.clone().cholesky().ok_or_else(|| Error::Geometry {
        message: "metric is not positive definite".to_string(),
        eigenvalue: g.clone().symmetric_eigen().eigenvalues.min(),
    })?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Domain("singular Cholesky factor".to_string()))?;
    let c = &l_inv * m * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let (idx, lambda) =
        eig.eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let y = eig.eigenvectors.column(idx).into_owned();
    let x = l_inv.transpose() * y;
    Ok((lambda, x))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.min()
}

/// Orthonormal (Euclidean) basis of the orthogonal complement of `q`, as the
/// columns of an `n x (n-1)` matrix.
pub fn complement_basis(q: &DVector<f64>) -> DMatrix<f64> {
    let n = q.len();
    let qn = q.normalize();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    // Gram-Schmidt over the coordinate axes, skipping the one most aligned with q.
    let skip = (0..n).max_by(|&a, &b| qn[a].abs().partial_cmp(&qn[b].abs()).unwrap()).unwrap_or(0);
    for i in (0..n).filter(|&i| i != skip) {
        let mut v = DVector::<f64>::zeros(n);
        v[i] = 1.0;
        v -= &qn * qn.dot(&v);
        for b in &basis {
            let proj = b.dot(&v);
            v -= b * proj;
        }
        basis.push(v.normalize());
    }
    DMatrix::from_columns(&basis)
}

/// Square complex matrix stored by diagonals, `kl` sub- and `ku`
/// super-diagonals.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        Self { n, kl, ku, data: vec![Complex64::new(0.0, 0.0); n * (kl + ku + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "entry ({i},{j}) outside band");
        i * (self.kl + self.ku + 1) + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.slot(i, j)]
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku + 1).min(self.n);
                (lo..hi).map(|j| self.data[self.slot(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU without pivoting. Intended for diagonally dominant systems,
    /// which the Crank-Nicolson matrices are.
    pub fn factor(mut self) -> Result<BandedLu> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if pivot.norm() < 1e-300 || !pivot.is_finite() {
                return Err(Error::Domain("zero pivot in banded factorization".to_string()));
            }
            for i in (k + 1)..(k + kl + 1).min(n) {
                let sik = self.slot(i, k);
                let l = self.data[sik] / pivot;
                self.data[sik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in (k + 1)..(k + ku + 1).min(n) {
                    let skj = self.slot(k, j);
                    let sij = self.slot(i, j);
                    let ukj = self.data[skj];
                    self.data[sij] -= l * ukj;
                }
            }
        }
        Ok(BandedLu { m: self })
    }
}

/// Factorized [`BandedMatrix`].
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
}

impl BandedLu {
    pub fn dim(&self) -> usize {
        self.m.n
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Complex64]) {
        let m = &self.m;
        let n = m.n;
        for i in 0..n {
            let lo = i.saturating_sub(m.kl);
            let mut acc = rhs[i];
            for j in lo..i {
                acc -= m.data[m.slot(i, j)] * rhs[j];
            }
            rhs[i] = acc;
        }
        for i in (0..n).rev() {
            let hi = (i + m.ku + 1).min(n);
            let mut acc = rhs[i];
            for j in (i + 1)..hi {
                acc -= m.data[m.slot(i, j)] * rhs[j];
            }
            rhs[i] = acc / m.data[m.slot(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn generalized_eigen_of_diagonal_pencil() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -3.0, 8.0]));
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, 4.0]));
        let (lambda, x) = min_generalized_eigen(&m, &g).unwrap();
        assert!((lambda + 1.0).abs() < 1e-12);
        assert!(x[0].abs() < 1e-12 && x[2].abs() < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        let q = DVector::from_vec(vec![0.3, -1.2, 0.7, 0.1]);
        let b = complement_basis(&q);
        assert_eq!(b.ncols(), 3);
        let gram = b.transpose() * &b;
        assert!((gram - DMatrix::<f64>::identity(3, 3)).abs().max() < 1e-12);
        assert!((b.transpose() * &q).abs().max() < 1e-12);
    }

    #[test]
    fn banded_solve_matches_matvec() {
        // periodic-wrapped bandwidth-3 system, diagonally dominant
        let n = 12;
        let bw = 3;
        let mut a = BandedMatrix::zeros(n, bw, bw);
        for i in 0..n {
            a.add(i, i, c(7.0, 1.5));
            if i + 1 < n {
                a.add(i, i + 1, c(-1.0, 0.4));
                a.add(i + 1, i, c(-1.0, -0.2));
            }
            if i + bw < n {
                a.add(i, i + bw, c(0.5, 1.0));
                a.add(i + bw, i, c(0.3, -1.0));
            }
        }
        let x: Vec<Complex64> = (0..n).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let mut b = a.mul_vec(&x);
        let lu = a.factor().unwrap();
        lu.solve_in_place(&mut b);
        for (got, want) in b.iter().zip(&x) {
            assert!((got - want).norm() < 1e-13);
        }
    }
}
