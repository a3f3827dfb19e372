//! Outer optimization loop and the saddle-free Newton step.
//!
//! The flagship method multiplies the gradient by the inverse absolute
//! Hessian, `Δθ = -α·|H|⁻¹∇f`, entirely through Hessian-vector products:
//! with `B = H² + ε·I`, the identity `|H|⁻¹ ≈ B⁻¹·B^{1/2}` splits the step
//! into one matrix square-root application and one CG solve against `B`.
//! Along directions of negative curvature the multiplier `-1/|λ|` keeps the
//! sign of the gradient instead of flipping it, so saddle points repel the
//! iterate instead of attracting it the way a plain Newton step does.

use alloc::vec::Vec;

use crate::krylov::cg_solve;
use crate::linalg::{self, Vector};
use crate::objectives::{as_hessian_operator, Objective};
use crate::sqrt_ode::{sqrt_apply, SqrtApplyConfig};
use crate::Error;

/// Settings for [`run`] and [`sfhf_step`].
#[derive(Debug, Clone)]
pub struct SfhfConfig {
    /// Step size multiplier.
    pub alpha: f64,
    /// Tikhonov damping `ε` added to the squared Hessian. Larger values
    /// improve the conditioning of the square-root integration at the price
    /// of shrinking steps along small-curvature directions.
    pub damping: f64,
    /// Square-root integrator settings.
    pub sqrt_cfg: SqrtApplyConfig,
    /// Relative residual tolerance for the outer CG solve against `B`.
    pub outer_cg_tol: f64,
    /// Iteration cap for the outer CG solve.
    pub outer_cg_max_iters: usize,
    /// Outer iteration budget.
    pub max_outer_iters: usize,
    /// Gradient norm below which the run stops as converged.
    pub grad_tol: f64,
}

impl Default for SfhfConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            damping: 1e-6,
            sqrt_cfg: SqrtApplyConfig::default(),
            outer_cg_tol: 1e-6,
            outer_cg_max_iters: 250,
            max_outer_iters: 100,
            grad_tol: 1e-8,
        }
    }
}

impl SfhfConfig {
    /// Checks every field against its documented range, including the
    /// square-root section.
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: "alpha must be positive and finite".into(),
            });
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: "damping must be non-negative and finite".into(),
            });
        }
        if !(self.outer_cg_tol > 0.0 && self.outer_cg_tol.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: "outer_cg_tol must be positive and finite".into(),
            });
        }
        if self.outer_cg_max_iters == 0 {
            return Err(Error::InvalidConfig {
                reason: "outer_cg_max_iters must be at least 1".into(),
            });
        }
        if !(self.grad_tol >= 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: "grad_tol must be non-negative and finite".into(),
            });
        }
        self.sqrt_cfg.validate()
    }
}

/// Per-step cost and quality counters from [`sfhf_step`].
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    /// Iterations used by the CG solve against `B`.
    pub inner_cg_iters: u64,
    /// Operator applications consumed by the square-root integration,
    /// including its norm estimate.
    pub sqrt_operator_applies: u64,
    /// Operator applications consumed by the whole step.
    pub total_operator_applies: u64,
    /// Spectral rescale used inside the square-root integration.
    pub scale_used: f64,
    /// Whether the outer CG solve met its tolerance. The iterate is used
    /// either way; an unconverged solve still yields a usable direction.
    pub outer_cg_converged: bool,
}

/// One row of the optimization trace, captured before the iterate moves.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Outer iteration index, 0-based.
    pub iter: usize,
    /// Objective value at the pre-step iterate.
    pub f_value: f64,
    /// Gradient norm at the pre-step iterate.
    pub grad_norm: f64,
    /// Norm of the step taken from this iterate.
    pub step_norm: f64,
    /// Outer CG iterations of this step (zero for gd and dense methods).
    pub inner_cg_iters: u64,
    /// Operator applies of the square-root integration (zero for gd and
    /// dense methods).
    pub sqrt_operator_applies: u64,
    /// Wall-clock seconds spent on this iteration; zero without `std`.
    pub wall_seconds: f64,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// Gradient norm fell to `grad_tol`.
    Converged,
    /// Iteration budget was exhausted.
    Budget,
    /// An iteration failed; see [`RunOutcome::failure`].
    Failed,
}

/// Result of an optimization run.
///
/// A failure mid-run keeps the trace of all completed iterations and the
/// last healthy iterate; the trailing error is reported, not swallowed.
#[derive(Debug)]
pub struct RunOutcome {
    /// Final iterate.
    pub theta: Vector,
    /// One record per completed outer iteration.
    pub trace: Vec<TraceRecord>,
    /// Why the run stopped.
    pub stop_reason: StopReason,
    /// Operator applications across the run. For the matrix-free method this
    /// counts applies of the damped squared operator (two Hessian products
    /// each); for dense methods it counts the `m` Hessian products per
    /// iteration spent materializing the Hessian.
    pub total_operator_applies: u64,
    /// The error that ended the run, when `stop_reason` is `Failed`.
    pub failure: Option<Error>,
}

/// Optimization methods known to [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Gradient descent, `Δθ = -α·∇f`.
    Gd,
    /// Dense Newton via the eigendecomposed Hessian.
    NewtonDense,
    /// Dense saddle-free Newton via the eigendecomposed absolute Hessian.
    SfnDense,
    /// Matrix-free saddle-free Newton.
    Sfhf,
}

impl Method {
    /// Parses the CLI method name.
    pub fn from_name(name: &str) -> Result<Self, Error> {
        match name {
            "gd" => Ok(Method::Gd),
            "newton-dense" => Ok(Method::NewtonDense),
            "sfn-dense" => Ok(Method::SfnDense),
            "sfhf" => Ok(Method::Sfhf),
            other => Err(Error::UnknownMethod { name: other.into() }),
        }
    }

    /// Canonical method name.
    pub fn name(self) -> &'static str {
        match self {
            Method::Gd => "gd",
            Method::NewtonDense => "newton-dense",
            Method::SfnDense => "sfn-dense",
            Method::Sfhf => "sfhf",
        }
    }
}

/// Plain gradient descent step `-α·∇f(θ)`.
pub fn gd_step(obj: &dyn Objective, theta: &Vector, alpha: f64) -> Result<Vector, Error> {
    let mut g = obj.grad(theta)?;
    g.scale_in_place(-alpha);
    Ok(g)
}

/// One matrix-free saddle-free Newton step at `θ`.
///
/// Builds `B = H(θ)² + ε·I` from Hessian-vector products, computes
/// `y = B^{1/2}·∇f` with the square-root integrator, then solves
/// `B·Δθ = -α·y` by CG, so that `Δθ ≈ -α·(H²+εI)^{-1/2}·∇f = -α·|H|⁻¹∇f`
/// up to the damping bias.
pub fn sfhf_step(
    obj: &dyn Objective,
    theta: &Vector,
    cfg: &SfhfConfig,
) -> Result<(Vector, StepDiagnostics), Error> {
    cfg.validate()?;
    if theta.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: theta.dim(),
        });
    }
    let g = obj.grad(theta)?;
    let hessian = as_hessian_operator(obj, theta);
    let damped_square = hessian.compose_square().shifted(cfg.damping);

    let sqrt_out = sqrt_apply(&damped_square, &g, &cfg.sqrt_cfg)?;
    let mut rhs = sqrt_out.result;
    rhs.scale_in_place(-cfg.alpha);
    let solve = cg_solve(
        &damped_square,
        &rhs,
        cfg.outer_cg_tol,
        cfg.outer_cg_max_iters,
        None,
    )?;

    let diagnostics = StepDiagnostics {
        inner_cg_iters: solve.iterations_used as u64,
        sqrt_operator_applies: sqrt_out.total_operator_applies,
        total_operator_applies: damped_square.applies(),
        scale_used: sqrt_out.scale_used,
        outer_cg_converged: solve.converged,
    };
    Ok((solve.solution, diagnostics))
}

/// Wall-clock stopwatch that degrades to zero without `std`.
struct Stopwatch {
    #[cfg(feature = "std")]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(feature = "std")]
            start: std::time::Instant::now(),
        }
    }

    fn seconds(&self) -> f64 {
        #[cfg(feature = "std")]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(not(feature = "std"))]
        {
            0.0
        }
    }
}

/// Runs `method` from `theta0` until the gradient tolerance, the iteration
/// budget, or a failure stops it.
///
/// Convergence is checked at the top of each iteration, so a converged start
/// point produces an empty trace. Each trace record captures the pre-step
/// iterate; a failed step contributes no record and surfaces its error in
/// the outcome.
pub fn run(
    obj: &dyn Objective,
    theta0: &Vector,
    method: Method,
    cfg: &SfhfConfig,
) -> Result<RunOutcome, Error> {
    cfg.validate()?;
    if theta0.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            got: theta0.dim(),
        });
    }

    let m = obj.dim() as u64;
    let mut theta = theta0.clone();
    let mut trace = Vec::new();
    let mut total_applies = 0u64;
    let mut stop_reason = StopReason::Budget;
    let mut failure = None;

    for iter in 0..cfg.max_outer_iters {
        let watch = Stopwatch::start();
        let f_value = match obj.eval(&theta) {
            Ok(f) => f,
            Err(e) => {
                stop_reason = StopReason::Failed;
                failure = Some(e);
                break;
            }
        };
        let grad = match obj.grad(&theta) {
            Ok(g) => g,
            Err(e) => {
                stop_reason = StopReason::Failed;
                failure = Some(e);
                break;
            }
        };
        let grad_norm = grad.norm();
        if grad_norm <= cfg.grad_tol {
            stop_reason = StopReason::Converged;
            break;
        }

        let step = match method {
            Method::Gd => gd_step(obj, &theta, cfg.alpha).map(|d| (d, 0, 0, 0)),
            Method::NewtonDense => crate::dense::newton_dense_step(obj, &theta, cfg.alpha)
                .map(|d| (d, 0, 0, m)),
            Method::SfnDense => {
                crate::dense::sfn_dense_step(obj, &theta, cfg.alpha).map(|d| (d, 0, 0, m))
            }
            Method::Sfhf => sfhf_step(obj, &theta, cfg).map(|(d, diag)| {
                (
                    d,
                    diag.inner_cg_iters,
                    diag.sqrt_operator_applies,
                    diag.total_operator_applies,
                )
            }),
        };
        let (delta, inner_cg_iters, sqrt_operator_applies, applies) = match step {
            Ok(parts) => parts,
            Err(e) => {
                stop_reason = StopReason::Failed;
                failure = Some(e);
                break;
            }
        };

        total_applies += applies;
        let step_norm = delta.norm();
        if let Err(e) = linalg::axpy_in_place(1.0, &delta, &mut theta) {
            stop_reason = StopReason::Failed;
            failure = Some(e);
            break;
        }
        trace.push(TraceRecord {
            iter,
            f_value,
            grad_norm,
            step_norm,
            inner_cg_iters,
            sqrt_operator_applies,
            wall_seconds: watch.seconds(),
        });
    }

    Ok(RunOutcome {
        theta,
        trace,
        stop_reason,
        total_operator_applies: total_applies,
        failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{make_quadratic, registry, QuadraticSpec};

    fn v(data: &[f64]) -> Vector {
        Vector::from_slice(data).unwrap()
    }

    fn saddle() -> crate::objectives::Quadratic {
        make_quadratic(QuadraticSpec {
            eigenvalues: v(&[2.0, -1.0]),
            rotation_seed: None,
            linear_term: Vector::zeros(2),
        })
        .unwrap()
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Gd, Method::NewtonDense, Method::SfnDense, Method::Sfhf] {
            assert_eq!(Method::from_name(m.name()).unwrap(), m);
        }
        assert!(matches!(
            Method::from_name("bfgs"),
            Err(Error::UnknownMethod { .. })
        ));
    }

    #[test]
    fn gd_converges_on_identity_quadratic() {
        let q = make_quadratic(QuadraticSpec {
            eigenvalues: v(&[1.0, 1.0]),
            rotation_seed: None,
            linear_term: Vector::zeros(2),
        })
        .unwrap();
        let cfg = SfhfConfig {
            alpha: 0.5,
            grad_tol: 1e-10,
            max_outer_iters: 200,
            ..Default::default()
        };
        let out = run(&q, &v(&[1.0, 1.0]), Method::Gd, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Converged);
        assert!(out.theta.norm() <= 1e-9);
        assert_eq!(out.total_operator_applies, 0);
    }

    #[test]
    fn sfhf_step_flips_sign_on_negative_curvature() {
        // Saddle diag(2, -1) at (0.1, 0.1): |H| ≈ diag(2, 1), gradient is
        // (0.2, -0.1), so the step is ≈ (-0.1, +0.1): downhill along the
        // negative-curvature axis rather than back toward the saddle.
        let (delta, diag) = sfhf_step(&saddle(), &v(&[0.1, 0.1]), &SfhfConfig::default()).unwrap();
        assert!((delta[0] + 0.1).abs() <= 1e-3, "{delta:?}");
        assert!((delta[1] - 0.1).abs() <= 1e-3, "{delta:?}");
        assert!(diag.outer_cg_converged);
        assert!(diag.sqrt_operator_applies > 0);
        assert!(diag.total_operator_applies >= diag.sqrt_operator_applies);
    }

    #[test]
    fn sfhf_escapes_saddle_monotonically() {
        let cfg = SfhfConfig {
            max_outer_iters: 20,
            ..Default::default()
        };
        let out = run(&saddle(), &v(&[0.1, 0.1]), Method::Sfhf, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Budget);
        let fs: alloc::vec::Vec<f64> = out.trace.iter().map(|r| r.f_value).collect();
        assert!(fs.windows(2).all(|w| w[1] < w[0]), "{fs:?}");
        let f_final = saddle().eval(&out.theta).unwrap();
        assert!(f_final < -1.0, "f_final = {f_final}");
    }

    #[test]
    fn newton_runs_into_the_saddle() {
        let cfg = SfhfConfig {
            max_outer_iters: 20,
            ..Default::default()
        };
        let out = run(&saddle(), &v(&[0.1, 0.1]), Method::NewtonDense, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Converged);
        assert!(out.theta.norm() <= 1e-10, "{:?}", out.theta);
    }

    #[test]
    fn sfn_dense_matches_sfhf_on_saddle_step() {
        let theta = v(&[0.1, 0.1]);
        let dense = crate::dense::sfn_dense_step(&saddle(), &theta, 1.0).unwrap();
        let (free, _) = sfhf_step(&saddle(), &theta, &SfhfConfig::default()).unwrap();
        for i in 0..2 {
            assert!((dense[i] - free[i]).abs() <= 1e-3);
        }
    }

    #[test]
    fn sfhf_converges_on_convex_quadratic() {
        let q = make_quadratic(QuadraticSpec {
            eigenvalues: v(&[1.0, 2.0, 3.0]),
            rotation_seed: Some(4),
            linear_term: Vector::zeros(3),
        })
        .unwrap();
        let cfg = SfhfConfig {
            max_outer_iters: 50,
            grad_tol: 1e-7,
            ..Default::default()
        };
        let out = run(&q, &v(&[1.0, -1.0, 0.5]), Method::Sfhf, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Converged);
        assert!(q.eval(&out.theta).unwrap() <= 1e-10);
    }

    #[test]
    fn budget_stop_records_every_iteration() {
        let cfg = SfhfConfig {
            alpha: 0.01,
            max_outer_iters: 5,
            ..Default::default()
        };
        let out = run(&saddle(), &v(&[0.1, 0.1]), Method::Gd, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Budget);
        assert_eq!(out.trace.len(), 5);
        for (k, rec) in out.trace.iter().enumerate() {
            assert_eq!(rec.iter, k);
            assert!(rec.wall_seconds >= 0.0);
            assert!(rec.step_norm > 0.0);
        }
    }

    #[test]
    fn converged_start_yields_empty_trace() {
        let out = run(
            &saddle(),
            &Vector::zeros(2),
            Method::Sfhf,
            &SfhfConfig::default(),
        )
        .unwrap();
        assert_eq!(out.stop_reason, StopReason::Converged);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn invalid_config_is_rejected_up_front() {
        let cfg = SfhfConfig {
            alpha: -1.0,
            ..Default::default()
        };
        assert!(matches!(
            run(&saddle(), &v(&[0.1, 0.1]), Method::Sfhf, &cfg),
            Err(Error::InvalidConfig { .. })
        ));
    }

    #[test]
    fn registry_problems_run_end_to_end() {
        let built = registry::build("mlp-xor", &registry::ProblemParams::default()).unwrap();
        let cfg = SfhfConfig {
            alpha: 0.25,
            damping: 0.1,
            max_outer_iters: 3,
            ..Default::default()
        };
        let out = run(built.objective.as_ref(), &built.theta0, Method::Sfhf, &cfg).unwrap();
        assert_eq!(out.stop_reason, StopReason::Budget);
        assert_eq!(out.trace.len(), 3);
        assert!(out.trace.iter().all(|r| r.f_value.is_finite()));
    }
}
