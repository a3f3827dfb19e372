//! Dense vectors, the matrix-free symmetric operator, and spectral-norm
//! estimation by power iteration.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::Error;

/// Dense vector of 64-bit floats.
///
/// Invariant: every entry is finite on construction and after every
/// library-produced arithmetic result. Violations surface as [`Error`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps an owned buffer, rejecting NaN and infinity.
    pub fn from_vec(data: Vec<f64>) -> Result<Self, Error> {
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "vector construction",
            });
        }
        Ok(Self { data })
    }

    /// Copies a slice, rejecting NaN and infinity.
    pub fn from_slice(data: &[f64]) -> Result<Self, Error> {
        Self::from_vec(data.to_vec())
    }

    /// Zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim],
        }
    }

    /// Builds a vector entrywise from `f(i)`.
    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> f64) -> Result<Self, Error> {
        Self::from_vec((0..dim).map(f).collect())
    }

    /// Number of entries.
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    /// Read-only view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Mutable view of the entries. The finiteness invariant is the caller's
    /// responsibility until the vector re-enters library arithmetic, which
    /// re-validates results.
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        fmath::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// True if every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Overwrites `self` with the entries of `other`.
    pub fn copy_from(&mut self, other: &Vector) -> Result<(), Error> {
        check_dims(self.dim(), other.dim())?;
        self.data.copy_from_slice(&other.data);
        Ok(())
    }

    /// Multiplies every entry by `s` in place.
    pub fn scale_in_place(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    /// Sets every entry to zero.
    pub fn fill_zero(&mut self) {
        self.data.fill(0.0);
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

fn check_dims(expected: usize, got: usize) -> Result<(), Error> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Dot product `Σᵢ uᵢwᵢ`, summed in index order.
pub fn dot(u: &Vector, w: &Vector) -> Result<f64, Error> {
    check_dims(u.dim(), w.dim())?;
    Ok(u.data.iter().zip(&w.data).map(|(a, b)| a * b).sum())
}

/// Returns `a·x + y` as a fresh vector.
pub fn axpy(a: f64, x: &Vector, y: &Vector) -> Result<Vector, Error> {
    check_dims(x.dim(), y.dim())?;
    let data: Vec<f64> = x
        .data
        .iter()
        .zip(&y.data)
        .map(|(xi, yi)| a * xi + yi)
        .collect();
    Vector::from_vec(data).map_err(|_| Error::NonFinite { context: "axpy" })
}

/// In-place update `y ← a·x + y`.
pub fn axpy_in_place(a: f64, x: &Vector, y: &mut Vector) -> Result<(), Error> {
    check_dims(y.dim(), x.dim())?;
    for (yi, xi) in y.data.iter_mut().zip(&x.data) {
        *yi += a * xi;
    }
    if !y.is_finite() {
        return Err(Error::NonFinite { context: "axpy" });
    }
    Ok(())
}

type ApplyFn<'a> = dyn Fn(&Vector, &mut Vector) -> Result<(), Error> + 'a;

/// Matrix-free symmetric linear map of dimension `m`.
///
/// Only `apply` access is exposed; the operator never materializes a matrix.
/// Every call is tallied so cost claims can be asserted as operation counts.
/// The tally makes `apply` non-reentrant on a shared instance: one operator
/// instance belongs to one logical thread at a time.
pub struct SymmetricOperator<'a> {
    dim: usize,
    applies: Cell<u64>,
    apply_fn: Box<ApplyFn<'a>>,
}

impl<'a> SymmetricOperator<'a> {
    /// Wraps a symmetric apply function. Symmetry is the caller's contract;
    /// it is checked stochastically by the test suite, not per call.
    pub fn new<F>(dim: usize, apply_fn: F) -> Self
    where
        F: Fn(&Vector, &mut Vector) -> Result<(), Error> + 'a,
    {
        Self {
            dim,
            applies: Cell::new(0),
            apply_fn: Box::new(apply_fn),
        }
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> SymmetricOperator<'static> {
        SymmetricOperator::new(dim, |v, out| out.copy_from(v))
    }

    /// Operator dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of `apply` calls made against this instance.
    pub fn applies(&self) -> u64 {
        self.applies.get()
    }

    /// Applies the operator, writing into `out`.
    pub fn apply_into(&self, v: &Vector, out: &mut Vector) -> Result<(), Error> {
        check_dims(self.dim, v.dim())?;
        check_dims(self.dim, out.dim())?;
        self.applies.set(self.applies.get() + 1);
        (self.apply_fn)(v, out)?;
        if !out.is_finite() {
            return Err(Error::NonFinite {
                context: "operator apply",
            });
        }
        Ok(())
    }

    /// Applies the operator into a fresh vector.
    pub fn apply(&self, v: &Vector) -> Result<Vector, Error> {
        let mut out = Vector::zeros(self.dim);
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    /// The squared operator `v ↦ op(op(v))`.
    ///
    /// The result is symmetric positive semi-definite for any symmetric `op`,
    /// and each of its applies costs two applies of the underlying operator.
    pub fn compose_square(self) -> SymmetricOperator<'a> {
        let dim = self.dim;
        let scratch = RefCell::new(Vector::zeros(dim));
        SymmetricOperator::new(dim, move |v, out| {
            let mut s = scratch.borrow_mut();
            self.apply_into(v, &mut s)?;
            self.apply_into(&s, out)
        })
    }

    /// The blend `t·op + (1−t)·I`, borrowing `self`.
    ///
    /// Requires `t ∈ [0, 1]`; on that range the blend of a positive
    /// semi-definite operator stays positive semi-definite.
    pub fn shift_blend(&self, t: f64) -> SymmetricOperator<'_> {
        debug_assert!((0.0..=1.0).contains(&t));
        SymmetricOperator::new(self.dim, move |v, out| {
            self.apply_into(v, out)?;
            let one_minus_t = 1.0 - t;
            for (oi, vi) in out.data.iter_mut().zip(&v.data) {
                *oi = t * *oi + one_minus_t * vi;
            }
            Ok(())
        })
    }

    /// The rescaled operator `op / c`.
    pub fn scaled_down(self, c: f64) -> SymmetricOperator<'a> {
        let inv = 1.0 / c;
        SymmetricOperator::new(self.dim, move |v, out| {
            self.apply_into(v, out)?;
            out.scale_in_place(inv);
            Ok(())
        })
    }

    /// The Tikhonov shift `op + ε·I`.
    pub fn shifted(self, eps: f64) -> SymmetricOperator<'a> {
        SymmetricOperator::new(self.dim, move |v, out| {
            self.apply_into(v, out)?;
            for (oi, vi) in out.data.iter_mut().zip(&v.data) {
                *oi += eps * vi;
            }
            Ok(())
        })
    }
}

impl core::fmt::Debug for SymmetricOperator<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SymmetricOperator")
            .field("dim", &self.dim)
            .field("applies", &self.applies.get())
            .finish()
    }
}

/// Deterministic start vector for power iteration, entries uniform in [-1, 1].
fn seeded_start(dim: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector {
        data: (0..dim).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect(),
    }
}

/// Estimates the spectral norm (largest absolute eigenvalue) of a symmetric
/// operator by normalized power iteration from a seeded start vector.
///
/// The estimate is the magnitude of the final Rayleigh quotient, which never
/// exceeds the true norm in exact arithmetic; callers that need an upper
/// bound multiply by a safety factor. Exactly `iters` operator applies are
/// performed unless the iterate vanishes (the operator annihilated it).
pub fn power_iteration_norm(
    op: &SymmetricOperator<'_>,
    iters: usize,
    seed: u64,
) -> Result<f64, Error> {
    let dim = op.dim();
    let mut v = seeded_start(dim, seed);
    let mut n = v.norm();
    if n == 0.0 {
        // Probability-zero draw; one re-seed, then give up.
        v = seeded_start(dim, seed.wrapping_add(1));
        n = v.norm();
        if n == 0.0 {
            return Err(Error::ZeroStartVector { dim });
        }
    }
    v.scale_in_place(1.0 / n);

    let mut w = Vector::zeros(dim);
    let mut rho = 0.0;
    for _ in 0..iters.max(1) {
        op.apply_into(&v, &mut w)?;
        let vw = dot(&v, &w)?;
        let vv = dot(&v, &v)?;
        rho = vw / vv;
        if !rho.is_finite() {
            return Err(Error::NonFinite {
                context: "power iteration Rayleigh quotient",
            });
        }
        let wn = w.norm();
        if wn == 0.0 {
            // v lies in the kernel; the dominant eigenvalue along the
            // explored subspace is zero.
            return Ok(0.0);
        }
        core::mem::swap(&mut v, &mut w);
        v.scale_in_place(1.0 / wn);
    }
    // The Rayleigh quotient converges to the dominant eigenvalue with its
    // sign; the norm is its magnitude.
    Ok(fmath::abs(rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(data: &[f64]) -> Vector {
        Vector::from_slice(data).unwrap()
    }

    fn diag_op(d: Vec<f64>) -> SymmetricOperator<'static> {
        SymmetricOperator::new(d.len(), move |x, out| {
            for i in 0..d.len() {
                out[i] = d[i] * x[i];
            }
            Ok(())
        })
    }

    #[test]
    fn dot_direct_arithmetic() {
        assert_eq!(dot(&v(&[1.0, 2.0]), &v(&[3.0, 4.0])).unwrap(), 11.0);
    }

    #[test]
    fn dot_with_zero_vector() {
        let u = v(&[3.5, -1.25, 7.0]);
        assert_eq!(dot(&u, &Vector::zeros(3)).unwrap(), 0.0);
    }

    #[test]
    fn dot_is_symmetric_exactly() {
        let a = seeded_start(32, 11);
        let b = seeded_start(32, 12);
        assert_eq!(dot(&a, &b).unwrap(), dot(&b, &a).unwrap());
    }

    #[test]
    fn dot_rejects_dimension_mismatch() {
        let e = dot(&v(&[1.0]), &v(&[1.0, 2.0])).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn axpy_zero_scale_returns_y() {
        let x = v(&[5.0, 6.0]);
        let y = v(&[1.0, 2.0]);
        assert_eq!(axpy(0.0, &x, &y).unwrap(), y);
    }

    #[test]
    fn axpy_identity_on_zero_y() {
        let x = v(&[5.0, 6.0]);
        assert_eq!(axpy(1.0, &x, &Vector::zeros(2)).unwrap(), x);
    }

    #[test]
    fn axpy_direct_arithmetic() {
        let r = axpy(2.0, &v(&[1.0, 1.0]), &v(&[1.0, 2.0])).unwrap();
        assert_eq!(r, v(&[3.0, 4.0]));
    }

    #[test]
    fn axpy_rejects_overflow_to_infinity() {
        let big = v(&[1e308, 1e308]);
        let e = axpy(10.0, &big, &big).unwrap_err();
        assert!(matches!(e, Error::NonFinite { .. }));
    }

    #[test]
    fn vector_construction_rejects_nan() {
        assert!(Vector::from_slice(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn compose_square_on_diagonal() {
        let sq = diag_op(vec![2.0, -1.0]).compose_square();
        assert_eq!(sq.apply(&v(&[1.0, 1.0])).unwrap(), v(&[4.0, 1.0]));
    }

    #[test]
    fn compose_square_of_identity() {
        let sq = SymmetricOperator::identity(3).compose_square();
        let x = v(&[1.0, -2.0, 3.0]);
        assert_eq!(sq.apply(&x).unwrap(), x);
    }

    #[test]
    fn compose_square_doubles_underlying_tally() {
        let base = diag_op(vec![3.0, 4.0]);
        let sq = base.compose_square();
        let x = v(&[1.0, 1.0]);
        sq.apply(&x).unwrap();
        sq.apply(&x).unwrap();
        // The squared operator tallies its own applies; the moved-in base
        // operator was applied twice per squared apply.
        assert_eq!(sq.applies(), 2);
    }

    #[test]
    fn apply_tally_increments_once_per_call() {
        let op = diag_op(vec![1.0, 2.0, 3.0]);
        let x = v(&[1.0, 1.0, 1.0]);
        for expected in 1..=5u64 {
            op.apply(&x).unwrap();
            assert_eq!(op.applies(), expected);
        }
    }

    #[test]
    fn shift_blend_endpoints() {
        let op = diag_op(vec![5.0, 7.0]);
        let x = v(&[1.0, 2.0]);
        assert_eq!(op.shift_blend(0.0).apply(&x).unwrap(), x);
        assert_eq!(op.shift_blend(1.0).apply(&x).unwrap(), v(&[5.0, 14.0]));
    }

    #[test]
    fn shift_blend_halfway_scalar() {
        // 0.5·4·1 + 0.5·1 = 2.5
        let op = diag_op(vec![4.0]);
        let r = op.shift_blend(0.5).apply(&v(&[1.0])).unwrap();
        assert_eq!(r, v(&[2.5]));
    }

    #[test]
    fn power_iteration_on_identity_is_exactly_one() {
        let op = SymmetricOperator::identity(16);
        for iters in [1, 3, 50] {
            assert_eq!(power_iteration_norm(&op, iters, 0).unwrap(), 1.0);
        }
    }

    #[test]
    fn power_iteration_finds_dominant_diagonal_entry() {
        let op = diag_op(vec![1.0, 9.0]);
        let rho = power_iteration_norm(&op, 50, 3).unwrap();
        assert!((rho - 9.0).abs() < 1e-6, "rho = {rho}");
    }

    #[test]
    fn power_iteration_on_zero_operator_returns_zero() {
        let op = diag_op(vec![0.0, 0.0, 0.0]);
        assert_eq!(power_iteration_norm(&op, 30, 5).unwrap(), 0.0);
    }

    #[test]
    fn scaled_down_divides_spectrum() {
        let op = diag_op(vec![8.0, 2.0]).scaled_down(4.0);
        assert_eq!(op.apply(&v(&[1.0, 1.0])).unwrap(), v(&[2.0, 0.5]));
    }

    #[test]
    fn shifted_adds_ridge() {
        let op = diag_op(vec![1.0, 2.0]).shifted(0.5);
        assert_eq!(op.apply(&v(&[1.0, 1.0])).unwrap(), v(&[1.5, 2.5]));
    }
}
