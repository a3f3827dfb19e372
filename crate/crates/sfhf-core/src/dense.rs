//! Dense symmetric eigendecomposition and exact matrix functions for small
//! dimensions, serving as ground truth for every matrix-free result, plus the
//! dense Newton and saddle-free Newton baseline steps.
//!
//! The dense path is deliberately capped at dimension 512: it is the oracle,
//! not the product. Precision beats speed here, which is why the eigensolver
//! is cyclic Jacobi rather than anything faster.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::linalg::{SymmetricOperator, Vector};
use crate::objectives::Objective;
use crate::Error;

/// Hard cap on dense dimensions.
pub const MAX_DENSE_DIM: usize = 512;

/// Eigenvalue magnitudes at or below this count as zero for inversion.
pub const SINGULAR_THRESHOLD: f64 = 1e-10;

/// Eigenvalues below this are a genuine violation of positive
/// semi-definiteness; between this and zero they are treated as rounding
/// noise and clamped.
pub const PSD_EIGEN_TOLERANCE: f64 = -1e-8;

const MAX_JACOBI_SWEEPS: usize = 20;

/// Dense symmetric matrix in row-major storage, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl DenseSymMatrix {
    /// Builds from row-major entries, averaging `M` with its transpose so the
    /// symmetry invariant holds exactly.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self, Error> {
        if dim > MAX_DENSE_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                max: MAX_DENSE_DIM,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "dense matrix construction",
            });
        }
        let mut m = Self { dim, entries };
        for i in 0..dim {
            for j in (i + 1)..dim {
                let avg = 0.5 * (m.get(i, j) + m.get(j, i));
                m.set(i, j, avg);
                m.set(j, i, avg);
            }
        }
        Ok(m)
    }

    /// Same-shape storage without symmetrization, for orthogonal bases.
    fn from_entries_unchecked(dim: usize, entries: Vec<f64>) -> Self {
        Self { dim, entries }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Result<Self, Error> {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self::new(dim, entries)
    }

    /// Diagonal matrix from the given entries.
    pub fn diagonal(d: &[f64]) -> Result<Self, Error> {
        let dim = d.len();
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = d[i];
        }
        Self::new(dim, entries)
    }

    /// Builds `U·diag(eigenvalues)·Uᵀ` for a seeded random orthogonal `U`, so
    /// tests know the exact spectrum of the matrix they constructed.
    pub fn from_spectrum(eigenvalues: &[f64], seed: u64) -> Result<Self, Error> {
        let u = random_orthogonal(eigenvalues.len(), seed)?;
        reconstruct(&u, eigenvalues)
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Sets entry `(i, j)` without maintaining symmetry; internal use only.
    fn set(&mut self, i: usize, j: usize, val: f64) {
        self.entries[i * self.dim + j] = val;
    }

    /// Matrix-vector product into `out`.
    pub fn mul_vec_into(&self, v: &Vector, out: &mut Vector) -> Result<(), Error> {
        if v.dim() != self.dim || out.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.dim(),
            });
        }
        for i in 0..self.dim {
            let row = &self.entries[i * self.dim..(i + 1) * self.dim];
            out[i] = row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &Vector) -> Result<Vector, Error> {
        let mut out = Vector::zeros(self.dim);
        self.mul_vec_into(v, &mut out)?;
        Ok(out)
    }

    /// The product `M·M`, symmetric whenever `M` is.
    pub fn sym_square(&self) -> Result<Self, Error> {
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * self.get(k, j);
                }
                entries[i * n + j] = acc;
            }
        }
        Self::new(n, entries)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        fmath::sqrt(self.entries.iter().map(|x| x * x).sum())
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| fmath::abs(a - b))
            .fold(0.0, f64::max)
    }

    /// Matrix-free view of this matrix, borrowing the storage.
    pub fn as_operator(&self) -> SymmetricOperator<'_> {
        SymmetricOperator::new(self.dim, move |v, out| self.mul_vec_into(v, out))
    }
}

/// Builds `U·diag(eigs)·Uᵀ` from an orthogonal basis.
pub fn reconstruct(basis: &DenseSymMatrix, eigs: &[f64]) -> Result<DenseSymMatrix, Error> {
    let n = basis.dim();
    if eigs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: eigs.len(),
        });
    }
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += eigs[k] * basis.get(i, k) * basis.get(j, k);
            }
            entries[i * n + j] = acc;
        }
    }
    DenseSymMatrix::new(n, entries)
}

/// Seeded random orthogonal matrix by modified Gram-Schmidt on a random
/// square matrix, with one re-orthogonalization pass.
fn random_orthogonal(dim: usize, seed: u64) -> Result<DenseSymMatrix, Error> {
    if dim > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Columns stored contiguously during orthogonalization.
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for _ in 0..dim {
        loop {
            let mut col: Vec<f64> = (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
            for _pass in 0..2 {
                for prev in &cols {
                    let proj: f64 = col.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (c, p) in col.iter_mut().zip(prev) {
                        *c -= proj * p;
                    }
                }
            }
            let norm = fmath::sqrt(col.iter().map(|x| x * x).sum());
            if norm > 1e-8 {
                for c in &mut col {
                    *c /= norm;
                }
                cols.push(col);
                break;
            }
            // Degenerate draw; try a fresh column.
        }
    }
    let mut entries = vec![0.0; dim * dim];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..dim {
            entries[i * dim + j] = col[i];
        }
    }
    Ok(DenseSymMatrix::from_entries_unchecked(dim, entries))
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns the eigenvalues in ascending order and the matching orthogonal
/// basis (column `k` is the eigenvector of eigenvalue `k`), satisfying
/// `M = U·diag(λ)·Uᵀ` and `UᵀU = I` to high accuracy. The basis reuses the
/// dense storage type but is orthogonal, not symmetric.
pub fn eig_sym(m: &DenseSymMatrix) -> Result<(Vector, DenseSymMatrix), Error> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = DenseSymMatrix::identity(n)?;
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = false;
    for sweep in 0..MAX_JACOBI_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += fmath::abs(a.get(i, j));
            }
        }
        if off == 0.0 {
            converged = true;
            break;
        }
        let tresh = if sweep < 3 {
            0.2 * off / ((n * n) as f64)
        } else {
            0.0
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let g = 100.0 * fmath::abs(a.get(i, j));
                // Small off-diagonal entries are annihilated outright once
                // the sweep count shows the rest has settled.
                if sweep > 3
                    && fmath::abs(d[i]) + g == fmath::abs(d[i])
                    && fmath::abs(d[j]) + g == fmath::abs(d[j])
                {
                    a.set(i, j, 0.0);
                } else if fmath::abs(a.get(i, j)) > tresh {
                    let mut h = d[j] - d[i];
                    let t = if fmath::abs(h) + g == fmath::abs(h) {
                        a.get(i, j) / h
                    } else {
                        let theta = 0.5 * h / a.get(i, j);
                        let mut t = 1.0 / (fmath::abs(theta) + fmath::sqrt(1.0 + theta * theta));
                        if theta < 0.0 {
                            t = -t;
                        }
                        t
                    };
                    let c = 1.0 / fmath::sqrt(1.0 + t * t);
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    h = t * a.get(i, j);
                    z[i] -= h;
                    z[j] += h;
                    d[i] -= h;
                    d[j] += h;
                    a.set(i, j, 0.0);
                    for k in 0..i {
                        rotate(&mut a, s, tau, k, i, k, j);
                    }
                    for k in (i + 1)..j {
                        rotate(&mut a, s, tau, i, k, k, j);
                    }
                    for k in (j + 1)..n {
                        rotate(&mut a, s, tau, i, k, j, k);
                    }
                    for k in 0..n {
                        rotate(&mut v, s, tau, k, i, k, j);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        // One last check: the final sweep may have finished the job.
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += fmath::abs(a.get(i, j));
            }
        }
        if off != 0.0 {
            return Err(Error::EigNoConvergence {
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
    }

    // Ascending eigenvalue order with matching column permutation.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&p, &q| d[p].partial_cmp(&d[q]).expect("finite eigenvalues"));
    let eigs = Vector::from_vec(idx.iter().map(|&p| d[p]).collect())?;
    let mut basis = vec![0.0; n * n];
    for (new_col, &old_col) in idx.iter().enumerate() {
        for row in 0..n {
            basis[row * n + new_col] = v.get(row, old_col);
        }
    }
    Ok((eigs, DenseSymMatrix::from_entries_unchecked(n, basis)))
}

#[inline]
fn rotate(m: &mut DenseSymMatrix, s: f64, tau: f64, i: usize, j: usize, k: usize, l: usize) {
    let g = m.get(i, j);
    let h = m.get(k, l);
    m.set(i, j, g - s * (h + g * tau));
    m.set(k, l, h + s * (g - h * tau));
}

/// The matrix absolute value `|M| = U·diag(|λ|)·Uᵀ`, positive semi-definite
/// by construction.
pub fn matrix_abs(m: &DenseSymMatrix) -> Result<DenseSymMatrix, Error> {
    let (eigs, basis) = eig_sym(m)?;
    let abs_eigs: Vec<f64> = eigs.as_slice().iter().map(|&x| fmath::abs(x)).collect();
    reconstruct(&basis, &abs_eigs)
}

/// The principal square root `M^½ = U·diag(√λ)·Uᵀ` of a positive
/// semi-definite matrix.
///
/// Eigenvalues in `[-1e-8, 0)` are treated as rounding noise and clamped to
/// zero; anything more negative is a real violation and errors.
pub fn matrix_sqrt_psd(m: &DenseSymMatrix) -> Result<DenseSymMatrix, Error> {
    let (eigs, basis) = eig_sym(m)?;
    let mut sqrt_eigs = Vec::with_capacity(eigs.dim());
    for &lam in eigs.as_slice() {
        if lam < PSD_EIGEN_TOLERANCE {
            return Err(Error::NotPositiveSemiDefinite { eigenvalue: lam });
        }
        sqrt_eigs.push(fmath::sqrt(lam.max(0.0)));
    }
    reconstruct(&basis, &sqrt_eigs)
}

/// Materializes the Hessian of `obj` at `θ` by `m` Hessian-vector products
/// against basis vectors.
pub fn dense_hessian(obj: &dyn Objective, theta: &Vector) -> Result<DenseSymMatrix, Error> {
    let m = obj.dim();
    if m > MAX_DENSE_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m,
            max: MAX_DENSE_DIM,
        });
    }
    let mut basis_vec = Vector::zeros(m);
    let mut column = Vector::zeros(m);
    let mut entries = vec![0.0; m * m];
    for j in 0..m {
        basis_vec[j] = 1.0;
        obj.hvp_into(theta, &basis_vec, &mut column)?;
        basis_vec[j] = 0.0;
        for i in 0..m {
            entries[i * m + j] = column[i];
        }
    }
    DenseSymMatrix::new(m, entries)
}

/// Applies `U·diag(transform(λ))·Uᵀ` to `g`.
fn spectral_apply(
    eigs: &Vector,
    basis: &DenseSymMatrix,
    g: &Vector,
    transform: impl Fn(f64) -> f64,
) -> Result<Vector, Error> {
    let n = basis.dim();
    let mut coeffs = Vector::zeros(n);
    // coeffs = Uᵀ g
    for k in 0..n {
        let mut acc = 0.0;
        for i in 0..n {
            acc += basis.get(i, k) * g[i];
        }
        coeffs[k] = transform(eigs[k]) * acc;
    }
    let mut out = Vector::zeros(n);
    for i in 0..n {
        let mut acc = 0.0;
        for k in 0..n {
            acc += basis.get(i, k) * coeffs[k];
        }
        out[i] = acc;
    }
    if !out.is_finite() {
        return Err(Error::NonFinite {
            context: "spectral apply",
        });
    }
    Ok(out)
}

fn checked_spectrum(eigs: &Vector) -> Result<(), Error> {
    let near_zero: Vec<f64> = eigs
        .as_slice()
        .iter()
        .copied()
        .filter(|x| fmath::abs(*x) <= SINGULAR_THRESHOLD)
        .collect();
    if !near_zero.is_empty() {
        return Err(Error::SingularSpectrum { near_zero });
    }
    Ok(())
}

/// Exact dense saddle-free Newton step `−α·|H|⁻¹∇f(θ)` via full
/// eigendecomposition. Ground truth for the matrix-free path.
pub fn sfn_dense_step(obj: &dyn Objective, theta: &Vector, alpha: f64) -> Result<Vector, Error> {
    let h = dense_hessian(obj, theta)?;
    let (eigs, basis) = eig_sym(&h)?;
    checked_spectrum(&eigs)?;
    let g = obj.grad(theta)?;
    spectral_apply(&eigs, &basis, &g, |lam| -alpha / fmath::abs(lam))
}

/// Exact dense Newton step `−α·H⁻¹∇f(θ)`.
pub fn newton_dense_step(obj: &dyn Objective, theta: &Vector, alpha: f64) -> Result<Vector, Error> {
    let h = dense_hessian(obj, theta)?;
    let (eigs, basis) = eig_sym(&h)?;
    checked_spectrum(&eigs)?;
    let g = obj.grad(theta)?;
    spectral_apply(&eigs, &basis, &g, |lam| -alpha / lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_sym(dim: usize, seed: u64) -> DenseSymMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries: Vec<f64> = (0..dim * dim)
            .map(|_| 2.0 * rng.random::<f64>() - 1.0)
            .collect();
        DenseSymMatrix::new(dim, entries).unwrap()
    }

    #[test]
    fn eig_identity_is_all_ones() {
        let (eigs, _) = eig_sym(&DenseSymMatrix::identity(5).unwrap()).unwrap();
        for &lam in eigs.as_slice() {
            assert_eq!(lam, 1.0);
        }
    }

    #[test]
    fn eig_diagonal_sorts_ascending() {
        let m = DenseSymMatrix::diagonal(&[2.0, -1.0]).unwrap();
        let (eigs, _) = eig_sym(&m).unwrap();
        assert_eq!(eigs.as_slice(), &[-1.0, 2.0]);
    }

    #[test]
    fn eig_reconstructs_random_matrix() {
        let m = random_sym(32, 42);
        let (eigs, basis) = eig_sym(&m).unwrap();
        let rebuilt = reconstruct(&basis, eigs.as_slice()).unwrap();
        assert!(rebuilt.max_abs_diff(&m) <= 1e-10);
    }

    #[test]
    fn eig_basis_is_orthogonal() {
        let m = random_sym(24, 7);
        let (_, u) = eig_sym(&m).unwrap();
        let n = u.dim();
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += u.get(k, i) * u.get(k, j);
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((acc - expected).abs() <= 1e-10, "UᵀU[{i}][{j}] = {acc}");
            }
        }
    }

    #[test]
    fn from_spectrum_has_requested_eigenvalues() {
        let spectrum = [-3.0, -0.5, 1.0, 2.5, 8.0];
        let m = DenseSymMatrix::from_spectrum(&spectrum, 99).unwrap();
        let (eigs, _) = eig_sym(&m).unwrap();
        for (got, want) in eigs.as_slice().iter().zip(&spectrum) {
            assert!((got - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn abs_of_diagonal_saddle() {
        let m = DenseSymMatrix::diagonal(&[2.0, -1.0]).unwrap();
        let a = matrix_abs(&m).unwrap();
        assert!(a.max_abs_diff(&DenseSymMatrix::diagonal(&[2.0, 1.0]).unwrap()) <= 1e-12);
    }

    #[test]
    fn abs_leaves_psd_matrix_unchanged() {
        let m = DenseSymMatrix::from_spectrum(&[0.5, 1.0, 4.0, 9.0], 3).unwrap();
        assert!(matrix_abs(&m).unwrap().max_abs_diff(&m) <= 1e-10);
    }

    #[test]
    fn abs_squared_equals_square() {
        let m = random_sym(32, 5);
        let lhs = matrix_abs(&m).unwrap().sym_square().unwrap();
        let rhs = m.sym_square().unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let m = DenseSymMatrix::diagonal(&[4.0, 9.0]).unwrap();
        let s = matrix_sqrt_psd(&m).unwrap();
        assert!(s.max_abs_diff(&DenseSymMatrix::diagonal(&[2.0, 3.0]).unwrap()) <= 1e-12);
    }

    #[test]
    fn sqrt_of_identity() {
        let i = DenseSymMatrix::identity(6).unwrap();
        assert!(matrix_sqrt_psd(&i).unwrap().max_abs_diff(&i) <= 1e-12);
    }

    #[test]
    fn sqrt_of_square_is_abs() {
        let m = random_sym(32, 17);
        let lhs = matrix_sqrt_psd(&m.sym_square().unwrap()).unwrap();
        let rhs = matrix_abs(&m).unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn sqrt_rejects_clearly_negative_eigenvalue() {
        let m = DenseSymMatrix::diagonal(&[1.0, -0.5]).unwrap();
        let e = matrix_sqrt_psd(&m).unwrap_err();
        assert!(matches!(e, Error::NotPositiveSemiDefinite { .. }));
    }

    #[test]
    fn sqrt_clamps_rounding_noise() {
        let m = DenseSymMatrix::diagonal(&[1.0, -1e-9]).unwrap();
        let s = matrix_sqrt_psd(&m).unwrap();
        assert_eq!(s.get(1, 1), 0.0);
    }

    #[test]
    fn operator_view_matches_mul_vec() {
        let m = random_sym(8, 23);
        let op = m.as_operator();
        let x = Vector::from_fn(8, |i| (i as f64) - 3.0).unwrap();
        assert_eq!(op.apply(&x).unwrap(), m.mul_vec(&x).unwrap());
        assert_eq!(op.applies(), 1);
    }
}
