//! Conjugate gradients for symmetric positive (semi-)definite systems with
//! operator-apply access only and early stopping on the relative residual.

use crate::fmath;
use crate::linalg::{axpy_in_place, dot, SymmetricOperator, Vector};
use crate::Error;

/// Iterations between from-scratch residual recomputations, guarding against
/// drift of the recursive residual.
const RESIDUAL_REFRESH_INTERVAL: usize = 50;

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgResult {
    /// Final iterate.
    pub solution: Vector,
    /// Iterations performed (0 if the start point already met the tolerance).
    pub iterations_used: usize,
    /// `‖A·solution − b‖ / ‖b‖`, recomputed from scratch at exit rather than
    /// taken from the recursive residual.
    pub final_relative_residual: f64,
    /// Whether `final_relative_residual ≤ tol`.
    pub converged: bool,
}

/// Solves `A x = b` by conjugate gradients, stopping when the relative
/// residual `‖Ax − b‖/‖b‖` drops to `tol` or after `max_iters` iterations.
///
/// `x0` warm-starts the iteration; `None` starts from zero. `b = 0`
/// short-circuits to the zero solution. The operator must be positive
/// semi-definite with `b` in its range; a direction of non-positive curvature
/// aborts with an error rather than truncating, since in this crate every CG
/// target is positive semi-definite by construction and negative curvature
/// means a bug upstream.
pub fn cg_solve(
    op: &SymmetricOperator<'_>,
    b: &Vector,
    tol: f64,
    max_iters: usize,
    x0: Option<Vector>,
) -> Result<CgResult, Error> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig {
            reason: alloc::format!("CG tolerance must be positive, got {tol}"),
        });
    }
    let dim = op.dim();
    if b.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: b.dim(),
        });
    }

    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CgResult {
            solution: Vector::zeros(dim),
            iterations_used: 0,
            final_relative_residual: 0.0,
            converged: true,
        });
    }

    // r = b − A·x; the apply is skipped for a zero start.
    let mut x;
    let mut r;
    match x0 {
        Some(start) => {
            if start.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: start.dim(),
                });
            }
            x = start;
            r = op.apply(&x)?;
            for (ri, bi) in r.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *ri = bi - *ri;
            }
        }
        None => {
            x = Vector::zeros(dim);
            r = b.clone();
        }
    }

    let mut rr = dot(&r, &r)?;
    let threshold = tol * b_norm;
    let mut p = r.clone();
    let mut ap = Vector::zeros(dim);
    let mut iterations_used = 0;

    while iterations_used < max_iters && fmath::sqrt(rr) > threshold {
        op.apply_into(&p, &mut ap)?;
        let pap = dot(&p, &ap)?;
        if pap <= 0.0 {
            return Err(Error::IndefiniteOperator {
                iteration: iterations_used,
                curvature: pap,
            });
        }
        let alpha = rr / pap;
        axpy_in_place(alpha, &p, &mut x)?;
        iterations_used += 1;

        if iterations_used % RESIDUAL_REFRESH_INTERVAL == 0 {
            op.apply_into(&x, &mut r)?;
            for (ri, bi) in r.as_mut_slice().iter_mut().zip(b.as_slice()) {
                *ri = bi - *ri;
            }
        } else {
            axpy_in_place(-alpha, &ap, &mut r)?;
        }

        let rr_next = dot(&r, &r)?;
        if !rr_next.is_finite() {
            return Err(Error::NonFinite {
                context: "CG residual",
            });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        // p ← r + β·p
        for (pi, ri) in p.as_mut_slice().iter_mut().zip(r.as_slice()) {
            *pi = ri + beta * *pi;
        }
    }

    // Independent residual recomputation for the reported result.
    op.apply_into(&x, &mut ap)?;
    let mut resid_sq = 0.0;
    for (ai, bi) in ap.as_slice().iter().zip(b.as_slice()) {
        let d = ai - bi;
        resid_sq += d * d;
    }
    let final_relative_residual = fmath::sqrt(resid_sq) / b_norm;
    let converged = final_relative_residual <= tol;

    Ok(CgResult {
        solution: x,
        iterations_used,
        final_relative_residual,
        converged,
    })
}
