use alloc::string::String;
use alloc::vec::Vec;

/// Errors surfaced by the optimization library.
///
/// Numerical invariants (finiteness, positive definiteness) are enforced
/// loudly: a violation means the caller handed in a broken operator or the
/// configuration drove the arithmetic outside its validity region, and
/// silently continuing would corrupt every downstream quantity.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// Two vectors (or an operator and a vector) disagree on dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch {
        /// Dimension required by the receiving object.
        expected: usize,
        /// Dimension actually supplied.
        got: usize,
    },

    /// An arithmetic result contains NaN or infinity.
    #[error("non-finite value produced in {context}")]
    NonFinite {
        /// Operation that produced the value.
        context: &'static str,
    },

    /// Conjugate gradients met a direction of non-positive curvature.
    /// The solver only ever targets positive semi-definite systems, so this
    /// signals an indefinite operator or severe rounding.
    #[error("CG breakdown at iteration {iteration}: direction curvature {curvature:.6e} is not positive")]
    IndefiniteOperator {
        /// Iteration at which the breakdown occurred.
        iteration: usize,
        /// Offending curvature value p·Ap.
        curvature: f64,
    },

    /// An inner CG solve inside the ODE right-hand side missed its tolerance.
    #[error("inner CG solve at t = {t:.6} stopped at relative residual {residual:.6e} without converging")]
    InnerSolveFailed {
        /// Integration time of the failed solve.
        t: f64,
        /// Relative residual reached when the iteration cap was hit.
        residual: f64,
    },

    /// The Runge-Kutta state stopped being finite.
    #[error("non-finite ODE state after Runge-Kutta step {rk_step}")]
    NonFiniteState {
        /// Index of the step (0-based) after which the state was checked.
        rk_step: usize,
    },

    /// Power iteration drew a zero start vector twice in a row.
    #[error("power iteration start vector vanished twice; operator dimension {dim}")]
    ZeroStartVector {
        /// Dimension of the operator.
        dim: usize,
    },

    /// The Jacobi eigensolver did not converge.
    #[error("Jacobi eigensolver failed to converge within {sweeps} sweeps")]
    EigNoConvergence {
        /// Sweep budget that was exhausted.
        sweeps: usize,
    },

    /// A dense-oracle routine received a matrix above its dimension cap.
    #[error("dense oracle dimension {dim} exceeds the cap of {max}")]
    DimensionTooLarge {
        /// Requested dimension.
        dim: usize,
        /// Enforced cap.
        max: usize,
    },

    /// A matrix expected to be positive semi-definite has a clearly negative
    /// eigenvalue.
    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:.6e}")]
    NotPositiveSemiDefinite {
        /// Most negative eigenvalue found.
        eigenvalue: f64,
    },

    /// A dense Newton or saddle-free Newton step met a (near-)singular
    /// spectrum.
    #[error("singular spectrum: eigenvalues within 1e-10 of zero: {near_zero:?}")]
    SingularSpectrum {
        /// Eigenvalues whose magnitude fell below the invertibility threshold.
        near_zero: Vec<f64>,
    },

    /// An optimizer method name was not recognized.
    #[error("unknown method '{name}' (expected gd, newton-dense, sfn-dense, or sfhf)")]
    UnknownMethod {
        /// Name that failed to parse.
        name: String,
    },

    /// A problem registry request was inconsistent.
    #[error("invalid problem specification: {reason}")]
    InvalidProblem {
        /// Human-readable cause.
        reason: String,
    },

    /// A configuration value is outside its documented range.
    #[error("invalid configuration: {reason}")]
    InvalidConfig {
        /// Human-readable cause.
        reason: String,
    },
}
