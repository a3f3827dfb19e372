//! Benchmark objectives with exact gradients and Hessian-vector products.
//!
//! Every objective exposes `f`, `∇f`, and `H(θ)v` without ever forming the
//! Hessian. The multilayer perceptron computes `Hv` by forward-over-reverse
//! differentiation (the R-operator): one forward pass carrying directional
//! derivatives and one backward pass carrying adjoint derivatives, at a
//! constant multiple of the cost of a gradient.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::DenseSymMatrix;
use crate::fmath;
use crate::linalg::{SymmetricOperator, Vector};
use crate::Error;

/// A twice-differentiable test problem.
///
/// Implementations are immutable after construction; `eval`, `grad`, and
/// `hvp_into` are pure and safe to call concurrently.
pub trait Objective {
    /// Parameter count `m`.
    fn dim(&self) -> usize;
    /// Problem identifier used in traces.
    fn name(&self) -> &str;
    /// Objective value `f(θ)`.
    fn eval(&self, theta: &Vector) -> Result<f64, Error>;
    /// Gradient `∇f(θ)`.
    fn grad(&self, theta: &Vector) -> Result<Vector, Error>;
    /// Hessian-vector product `H(θ)v`, written into `out`.
    fn hvp_into(&self, theta: &Vector, v: &Vector, out: &mut Vector) -> Result<(), Error>;

    /// Hessian-vector product into a fresh vector.
    fn hvp(&self, theta: &Vector, v: &Vector) -> Result<Vector, Error> {
        let mut out = Vector::zeros(self.dim());
        self.hvp_into(theta, v, &mut out)?;
        Ok(out)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<(), Error> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn finite_or(context: &'static str, x: f64) -> Result<f64, Error> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite { context })
    }
}

// ---------------------------------------------------------------------------
// Quadratic
// ---------------------------------------------------------------------------

/// Specification of a quadratic objective `f(θ) = ½θᵀHθ − bᵀθ` through its
/// spectrum.
///
/// `H = U·diag(eigenvalues)·Uᵀ` where `U` is a seeded random orthogonal basis,
/// or the identity when `rotation_seed` is `None`. Eigenvalues may be negative
/// (saddles) or zero (degenerate directions).
#[derive(Debug, Clone)]
pub struct QuadraticSpec {
    /// Spectrum of `H`, one entry per dimension.
    pub eigenvalues: Vector,
    /// Seed for the random orthogonal basis; `None` keeps `H` diagonal.
    pub rotation_seed: Option<u64>,
    /// Linear term `b`.
    pub linear_term: Vector,
}

/// Quadratic objective with a known spectrum.
///
/// The Hessian is stored densely, which caps the dimension at the dense
/// oracle limit; quadratics are test landscapes, not the scaling path.
pub struct Quadratic {
    h: DenseSymMatrix,
    b: Vector,
    name: String,
}

/// Builds a quadratic objective from its spectral specification.
pub fn make_quadratic(spec: QuadraticSpec) -> Result<Quadratic, Error> {
    let m = spec.eigenvalues.dim();
    if m == 0 {
        return Err(Error::InvalidProblem {
            reason: "quadratic needs at least one eigenvalue".into(),
        });
    }
    check_dim(m, spec.linear_term.dim())?;
    let h = match spec.rotation_seed {
        Some(seed) => DenseSymMatrix::from_spectrum(spec.eigenvalues.as_slice(), seed)?,
        None => DenseSymMatrix::diagonal(spec.eigenvalues.as_slice())?,
    };
    Ok(Quadratic {
        h,
        b: spec.linear_term,
        name: "quadratic".into(),
    })
}

impl Quadratic {
    /// Renames the objective (the registry uses this for "saddle").
    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.into();
        self
    }
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval(&self, theta: &Vector) -> Result<f64, Error> {
        check_dim(self.dim(), theta.dim())?;
        let h_theta = self.h.mul_vec(theta)?;
        let quad = 0.5 * crate::linalg::dot(theta, &h_theta)?;
        let lin = crate::linalg::dot(&self.b, theta)?;
        finite_or("quadratic evaluation", quad - lin)
    }

    fn grad(&self, theta: &Vector) -> Result<Vector, Error> {
        check_dim(self.dim(), theta.dim())?;
        let mut g = self.h.mul_vec(theta)?;
        for (gi, bi) in g.as_mut_slice().iter_mut().zip(self.b.as_slice()) {
            *gi -= bi;
        }
        Ok(g)
    }

    fn hvp_into(&self, theta: &Vector, v: &Vector, out: &mut Vector) -> Result<(), Error> {
        check_dim(self.dim(), theta.dim())?;
        self.h.mul_vec_into(v, out)
    }
}

// ---------------------------------------------------------------------------
// Rosenbrock
// ---------------------------------------------------------------------------

/// The pairwise Rosenbrock function
/// `f(θ) = Σᵢ 100(θ_{2i+1} − θ_{2i}²)² + (1 − θ_{2i})²`
/// over independent coordinate pairs, with analytic gradient and
/// Hessian-vector product.
pub struct Rosenbrock {
    m: usize,
}

/// Builds the Rosenbrock objective on `m` coordinates (`m` even, ≥ 2).
pub fn make_rosenbrock(m: usize) -> Result<Rosenbrock, Error> {
    if m < 2 || m % 2 != 0 {
        return Err(Error::InvalidProblem {
            reason: format!("rosenbrock dimension must be even and at least 2, got {m}"),
        });
    }
    Ok(Rosenbrock { m })
}

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        self.m
    }

    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn eval(&self, theta: &Vector) -> Result<f64, Error> {
        check_dim(self.m, theta.dim())?;
        let mut f = 0.0;
        for p in 0..self.m / 2 {
            let a = theta[2 * p];
            let b = theta[2 * p + 1];
            let gap = b - a * a;
            f += 100.0 * gap * gap + (1.0 - a) * (1.0 - a);
        }
        finite_or("rosenbrock evaluation", f)
    }

    fn grad(&self, theta: &Vector) -> Result<Vector, Error> {
        check_dim(self.m, theta.dim())?;
        let mut g = Vector::zeros(self.m);
        for p in 0..self.m / 2 {
            let a = theta[2 * p];
            let b = theta[2 * p + 1];
            let gap = b - a * a;
            g[2 * p] = -400.0 * a * gap - 2.0 * (1.0 - a);
            g[2 * p + 1] = 200.0 * gap;
        }
        if !g.is_finite() {
            return Err(Error::NonFinite {
                context: "rosenbrock gradient",
            });
        }
        Ok(g)
    }

    fn hvp_into(&self, theta: &Vector, v: &Vector, out: &mut Vector) -> Result<(), Error> {
        check_dim(self.m, theta.dim())?;
        check_dim(self.m, v.dim())?;
        check_dim(self.m, out.dim())?;
        // The Hessian is block diagonal with 2×2 blocks
        //   [1200a² − 400b + 2, −400a; −400a, 200] per pair (a, b).
        for p in 0..self.m / 2 {
            let a = theta[2 * p];
            let b = theta[2 * p + 1];
            let haa = 1200.0 * a * a - 400.0 * b + 2.0;
            let hab = -400.0 * a;
            out[2 * p] = haa * v[2 * p] + hab * v[2 * p + 1];
            out[2 * p + 1] = hab * v[2 * p] + 200.0 * v[2 * p + 1];
        }
        if !out.is_finite() {
            return Err(Error::NonFinite {
                context: "rosenbrock Hessian-vector product",
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Multilayer perceptron
// ---------------------------------------------------------------------------

/// Specification of a fully-connected network trained with mean squared
/// error. Hidden layers use tanh; the output layer is linear.
#[derive(Debug, Clone)]
pub struct MlpSpec {
    /// Layer widths from input to output, e.g. `[2, 3, 1]`.
    pub layer_sizes: Vec<usize>,
    /// Training pairs `(input, target)`.
    pub dataset: Vec<(Vector, Vector)>,
}

/// Tanh multilayer perceptron objective with exact R-operator
/// Hessian-vector products.
///
/// Parameters flatten layer by layer, weights before biases within each
/// layer, weight rows ordered by output neuron. This order is fixed so traces
/// are reproducible across runs.
pub struct Mlp {
    layer_sizes: Vec<usize>,
    dataset: Vec<(Vector, Vector)>,
    dim: usize,
    /// Parameter offset of each layer's weight block.
    w_offsets: Vec<usize>,
    /// Parameter offset of each layer's bias block.
    b_offsets: Vec<usize>,
}

/// Builds an MLP objective, validating layer/dataset consistency.
pub fn make_mlp(spec: MlpSpec) -> Result<Mlp, Error> {
    let ls = &spec.layer_sizes;
    if ls.len() < 2 || ls.iter().any(|&n| n == 0) {
        return Err(Error::InvalidProblem {
            reason: format!("layer sizes must list at least input and output widths, got {ls:?}"),
        });
    }
    if spec.dataset.is_empty() {
        return Err(Error::InvalidProblem {
            reason: "dataset must not be empty".into(),
        });
    }
    let n_in = ls[0];
    let n_out = *ls.last().expect("at least two layers");
    for (i, (x, t)) in spec.dataset.iter().enumerate() {
        if x.dim() != n_in || t.dim() != n_out {
            return Err(Error::InvalidProblem {
                reason: format!(
                    "dataset pair {i} has dims ({}, {}), expected ({n_in}, {n_out})",
                    x.dim(),
                    t.dim()
                ),
            });
        }
    }
    let mut w_offsets = Vec::with_capacity(ls.len() - 1);
    let mut b_offsets = Vec::with_capacity(ls.len() - 1);
    let mut offset = 0;
    for l in 1..ls.len() {
        w_offsets.push(offset);
        offset += ls[l] * ls[l - 1];
        b_offsets.push(offset);
        offset += ls[l];
    }
    Ok(Mlp {
        layer_sizes: spec.layer_sizes,
        dataset: spec.dataset,
        dim: offset,
        w_offsets,
        b_offsets,
    })
}

/// The classic XOR regression task on a `[2, 3, 1]` network.
pub fn xor_mlp() -> Mlp {
    let pairs = [
        ([0.0, 0.0], 0.0),
        ([0.0, 1.0], 1.0),
        ([1.0, 0.0], 1.0),
        ([1.0, 1.0], 0.0),
    ];
    let dataset = pairs
        .iter()
        .map(|(x, t)| {
            (
                Vector::from_slice(x).expect("finite"),
                Vector::from_slice(&[*t]).expect("finite"),
            )
        })
        .collect();
    make_mlp(MlpSpec {
        layer_sizes: vec![2, 3, 1],
        dataset,
    })
    .expect("static spec is valid")
}

impl Mlp {
    /// Number of weight layers (layer count minus one).
    fn layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Weight `W_l[row][col]` for 0-based layer `l`.
    #[inline]
    fn w(&self, theta: &Vector, l: usize, row: usize, col: usize) -> f64 {
        theta[self.w_offsets[l] + row * self.layer_sizes[l] + col]
    }

    #[inline]
    fn b(&self, theta: &Vector, l: usize, row: usize) -> f64 {
        theta[self.b_offsets[l] + row]
    }

    /// Forward pass; returns activations per layer, `acts[0]` being the input.
    fn forward(&self, theta: &Vector, input: &Vector) -> Vec<Vec<f64>> {
        let nl = self.layers();
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(nl + 1);
        acts.push(input.as_slice().to_vec());
        for l in 0..nl {
            let n_out = self.layer_sizes[l + 1];
            let mut a = vec![0.0; n_out];
            for (r, ar) in a.iter_mut().enumerate() {
                let mut z = self.b(theta, l, r);
                for (c, prev) in acts[l].iter().enumerate() {
                    z += self.w(theta, l, r, c) * prev;
                }
                *ar = if l + 1 < self.layer_sizes.len() - 1 {
                    fmath::tanh(z)
                } else {
                    z
                };
            }
            acts.push(a);
        }
        acts
    }
}

impl Objective for Mlp {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        "mlp"
    }

    fn eval(&self, theta: &Vector) -> Result<f64, Error> {
        check_dim(self.dim, theta.dim())?;
        let mut loss = 0.0;
        for (x, t) in &self.dataset {
            let acts = self.forward(theta, x);
            let out = acts.last().expect("nonempty activations");
            for (o, ti) in out.iter().zip(t.as_slice()) {
                let e = o - ti;
                loss += e * e;
            }
        }
        finite_or("mlp evaluation", loss / self.dataset.len() as f64)
    }

    fn grad(&self, theta: &Vector) -> Result<Vector, Error> {
        check_dim(self.dim, theta.dim())?;
        let nl = self.layers();
        let inv_n = 1.0 / self.dataset.len() as f64;
        let mut g = Vector::zeros(self.dim);
        for (x, t) in &self.dataset {
            let acts = self.forward(theta, x);
            // Output layer is linear: δz_L = δa_L = (2/N)(a_L − t).
            let mut dz: Vec<f64> = acts[nl]
                .iter()
                .zip(t.as_slice())
                .map(|(o, ti)| 2.0 * inv_n * (o - ti))
                .collect();
            for l in (0..nl).rev() {
                let n_out = self.layer_sizes[l + 1];
                let n_in = self.layer_sizes[l];
                for r in 0..n_out {
                    g[self.b_offsets[l] + r] += dz[r];
                    for c in 0..n_in {
                        g[self.w_offsets[l] + r * n_in + c] += dz[r] * acts[l][c];
                    }
                }
                if l > 0 {
                    // δa_{l−1} = W_lᵀ δz_l, then through tanh.
                    let mut da = vec![0.0; n_in];
                    for (c, dac) in da.iter_mut().enumerate() {
                        for r in 0..n_out {
                            *dac += self.w(theta, l, r, c) * dz[r];
                        }
                    }
                    dz = da
                        .iter()
                        .zip(&acts[l])
                        .map(|(d, a)| d * (1.0 - a * a))
                        .collect();
                }
            }
        }
        if !g.is_finite() {
            return Err(Error::NonFinite {
                context: "mlp gradient",
            });
        }
        Ok(g)
    }

    fn hvp_into(&self, theta: &Vector, v: &Vector, out: &mut Vector) -> Result<(), Error> {
        check_dim(self.dim, theta.dim())?;
        check_dim(self.dim, v.dim())?;
        check_dim(self.dim, out.dim())?;
        let nl = self.layers();
        let inv_n = 1.0 / self.dataset.len() as f64;
        out.fill_zero();

        for (x, t) in &self.dataset {
            // Forward pass carrying (a, Ra); Ra_0 = 0 since inputs do not
            // depend on θ.
            let acts = self.forward(theta, x);
            let mut r_acts: Vec<Vec<f64>> = Vec::with_capacity(nl + 1);
            r_acts.push(vec![0.0; self.layer_sizes[0]]);
            for l in 0..nl {
                let n_out = self.layer_sizes[l + 1];
                let n_in = self.layer_sizes[l];
                let mut ra = vec![0.0; n_out];
                for (r, rar) in ra.iter_mut().enumerate() {
                    // Rz = V·a_{l−1} + W·Ra_{l−1} + Rb
                    let mut rz = v[self.b_offsets[l] + r];
                    for c in 0..n_in {
                        rz += v[self.w_offsets[l] + r * n_in + c] * acts[l][c]
                            + self.w(theta, l, r, c) * r_acts[l][c];
                    }
                    *rar = if l + 1 < nl {
                        // Hidden: Ra = (1 − a²)·Rz
                        let a = acts[l + 1][r];
                        (1.0 - a * a) * rz
                    } else {
                        rz
                    };
                }
                r_acts.push(ra);
            }

            // Backward pass carrying (δz, Rδz).
            let mut dz: Vec<f64> = acts[nl]
                .iter()
                .zip(t.as_slice())
                .map(|(o, ti)| 2.0 * inv_n * (o - ti))
                .collect();
            let mut r_dz: Vec<f64> = r_acts[nl].iter().map(|ra| 2.0 * inv_n * ra).collect();
            for l in (0..nl).rev() {
                let n_out = self.layer_sizes[l + 1];
                let n_in = self.layer_sizes[l];
                for r in 0..n_out {
                    out[self.b_offsets[l] + r] += r_dz[r];
                    for c in 0..n_in {
                        // R(δz·aᵀ) = Rδz·aᵀ + δz·Raᵀ
                        out[self.w_offsets[l] + r * n_in + c] +=
                            r_dz[r] * acts[l][c] + dz[r] * r_acts[l][c];
                    }
                }
                if l > 0 {
                    let mut da = vec![0.0; n_in];
                    let mut r_da = vec![0.0; n_in];
                    for c in 0..n_in {
                        for r in 0..n_out {
                            let w = self.w(theta, l, r, c);
                            da[c] += w * dz[r];
                            // Rδa = Vᵀδz + WᵀRδz
                            r_da[c] += v[self.w_offsets[l] + r * n_in + c] * dz[r] + w * r_dz[r];
                        }
                    }
                    let mut next_dz = vec![0.0; n_in];
                    let mut next_r_dz = vec![0.0; n_in];
                    for c in 0..n_in {
                        let a = acts[l][c];
                        let ra = r_acts[l][c];
                        let sech2 = 1.0 - a * a;
                        next_dz[c] = sech2 * da[c];
                        // R((1 − a²)·δa) = (1 − a²)·Rδa − 2a·Ra·δa
                        next_r_dz[c] = sech2 * r_da[c] - 2.0 * a * ra * da[c];
                    }
                    dz = next_dz;
                    r_dz = next_r_dz;
                }
            }
        }
        if !out.is_finite() {
            return Err(Error::NonFinite {
                context: "mlp Hessian-vector product",
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Operators and helpers
// ---------------------------------------------------------------------------

/// Freezes `θ` and exposes `v ↦ H(θ)v` as a symmetric operator.
pub fn as_hessian_operator<'a, O>(obj: &'a O, theta: &Vector) -> SymmetricOperator<'a>
where
    O: Objective + ?Sized,
{
    let frozen = theta.clone();
    SymmetricOperator::new(obj.dim(), move |v, out| obj.hvp_into(&frozen, v, out))
}

/// Deterministic start parameters, entries uniform in [-0.5, 0.5].
pub fn seeded_theta(dim: usize, seed: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Vector::from_vec((0..dim).map(|_| rng.random::<f64>() - 0.5).collect())
        .expect("uniform draws are finite")
}

// ---------------------------------------------------------------------------
// Finite-difference checks
// ---------------------------------------------------------------------------

/// Central finite-difference gradient of `obj.eval`, step
/// `h = ε_mach^⅓·(1 + |θᵢ|)` per coordinate.
pub fn fd_gradient(obj: &dyn Objective, theta: &Vector) -> Result<Vector, Error> {
    let cbrt_eps = 6.055454452393343e-6; // (2.22e-16)^(1/3)
    let mut g = Vector::zeros(obj.dim());
    let mut probe = theta.clone();
    for i in 0..obj.dim() {
        let h = cbrt_eps * (1.0 + fmath::abs(theta[i]));
        probe[i] = theta[i] + h;
        let fp = obj.eval(&probe)?;
        probe[i] = theta[i] - h;
        let fm = obj.eval(&probe)?;
        probe[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

/// Central finite-difference Hessian-vector product from two gradient
/// evaluations along the normalized direction.
pub fn fd_hvp(obj: &dyn Objective, theta: &Vector, v: &Vector) -> Result<Vector, Error> {
    let vn = v.norm();
    if vn == 0.0 {
        return Ok(Vector::zeros(obj.dim()));
    }
    let theta_inf = theta
        .as_slice()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(fmath::abs(*x)));
    let cbrt_eps = 6.055454452393343e-6;
    let h = cbrt_eps * (1.0 + theta_inf);
    let mut plus = theta.clone();
    let mut minus = theta.clone();
    for i in 0..theta.dim() {
        let step = h * v[i] / vn;
        plus[i] += step;
        minus[i] -= step;
    }
    let gp = obj.grad(&plus)?;
    let gm = obj.grad(&minus)?;
    let mut out = Vector::zeros(obj.dim());
    for i in 0..obj.dim() {
        out[i] = (gp[i] - gm[i]) * vn / (2.0 * h);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Problem registry
// ---------------------------------------------------------------------------

/// Named benchmark problems consumed by the CLI.
pub mod registry {
    use super::*;

    /// Registered problem names.
    pub const NAMES: [&str; 4] = ["quadratic", "rosenbrock", "mlp-xor", "saddle"];

    /// Optional overrides for problem construction; unset fields take
    /// documented defaults.
    #[derive(Debug, Clone, Default, PartialEq)]
    pub struct ProblemParams {
        /// Dimension override (quadratic, rosenbrock).
        pub dim: Option<usize>,
        /// Spectrum override (quadratic only).
        pub eigenvalues: Option<Vec<f64>>,
        /// Rotation seed for the quadratic basis; unset keeps it diagonal.
        pub rotation_seed: Option<u64>,
        /// Linear term override (quadratic only).
        pub linear_term: Option<Vec<f64>>,
        /// Start point override.
        pub theta0: Option<Vec<f64>>,
        /// Run seed; controls MLP initialization.
        pub seed: u64,
    }

    /// A constructed problem with its start point.
    pub struct BuiltProblem {
        /// The objective.
        pub objective: Box<dyn Objective>,
        /// Start parameters `θ₀`.
        pub theta0: Vector,
    }

    impl core::fmt::Debug for BuiltProblem {
        fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
            f.debug_struct("BuiltProblem")
                .field("name", &self.objective.name())
                .field("dim", &self.objective.dim())
                .field("theta0", &self.theta0)
                .finish()
        }
    }

    fn reject_quadratic_params(name: &str, params: &ProblemParams) -> Result<(), Error> {
        if params.eigenvalues.is_some()
            || params.rotation_seed.is_some()
            || params.linear_term.is_some()
        {
            return Err(Error::InvalidProblem {
                reason: format!("problem '{name}' does not accept spectrum parameters"),
            });
        }
        Ok(())
    }

    fn resolve_theta0(
        override_: &Option<Vec<f64>>,
        dim: usize,
        default: impl FnOnce() -> Vector,
    ) -> Result<Vector, Error> {
        match override_ {
            Some(t) => {
                if t.len() != dim {
                    return Err(Error::InvalidProblem {
                        reason: format!("theta0 has length {}, problem dimension is {dim}", t.len()),
                    });
                }
                Vector::from_slice(t)
            }
            None => Ok(default()),
        }
    }

    /// Builds a registered problem by name.
    ///
    /// Defaults: `quadratic` is a convex 16-dimensional diagonal spectrum
    /// evenly spaced in [1, 4] starting from all-ones; `rosenbrock` is
    /// 2-dimensional from the classic start (−1.2, 1); `mlp-xor` is the XOR
    /// network with uniform [−0.5, 0.5] parameters drawn from the run seed;
    /// `saddle` is the fixed diag(2, −1) quadratic from (0.1, 0.1).
    pub fn build(name: &str, params: &ProblemParams) -> Result<BuiltProblem, Error> {
        match name {
            "quadratic" => {
                let eigenvalues = match (&params.eigenvalues, params.dim) {
                    (Some(e), d) => {
                        if let Some(d) = d {
                            if d != e.len() {
                                return Err(Error::InvalidProblem {
                                    reason: format!(
                                        "dim = {d} disagrees with {} eigenvalues",
                                        e.len()
                                    ),
                                });
                            }
                        }
                        e.clone()
                    }
                    (None, d) => {
                        let m = d.unwrap_or(16);
                        if m == 0 {
                            return Err(Error::InvalidProblem {
                                reason: "quadratic dimension must be positive".into(),
                            });
                        }
                        (0..m)
                            .map(|i| {
                                if m == 1 {
                                    1.0
                                } else {
                                    1.0 + 3.0 * i as f64 / (m - 1) as f64
                                }
                            })
                            .collect()
                    }
                };
                let m = eigenvalues.len();
                let linear_term = match &params.linear_term {
                    Some(b) => {
                        if b.len() != m {
                            return Err(Error::InvalidProblem {
                                reason: format!(
                                    "linear term has length {}, dimension is {m}",
                                    b.len()
                                ),
                            });
                        }
                        Vector::from_slice(b)?
                    }
                    None => Vector::zeros(m),
                };
                let obj = make_quadratic(QuadraticSpec {
                    eigenvalues: Vector::from_vec(eigenvalues)?,
                    rotation_seed: params.rotation_seed,
                    linear_term,
                })?;
                let theta0 = resolve_theta0(&params.theta0, m, || {
                    Vector::from_vec(vec![1.0; m]).expect("ones are finite")
                })?;
                Ok(BuiltProblem {
                    objective: Box::new(obj),
                    theta0,
                })
            }
            "saddle" => {
                reject_quadratic_params(name, params)?;
                if let Some(d) = params.dim {
                    if d != 2 {
                        return Err(Error::InvalidProblem {
                            reason: "saddle is a fixed 2-dimensional problem".into(),
                        });
                    }
                }
                let obj = make_quadratic(QuadraticSpec {
                    eigenvalues: Vector::from_slice(&[2.0, -1.0])?,
                    rotation_seed: None,
                    linear_term: Vector::zeros(2),
                })?
                .with_name("saddle");
                let theta0 = resolve_theta0(&params.theta0, 2, || {
                    Vector::from_slice(&[0.1, 0.1]).expect("finite")
                })?;
                Ok(BuiltProblem {
                    objective: Box::new(obj),
                    theta0,
                })
            }
            "rosenbrock" => {
                reject_quadratic_params(name, params)?;
                let m = params.dim.unwrap_or(2);
                let obj = make_rosenbrock(m)?;
                let theta0 = resolve_theta0(&params.theta0, m, || {
                    Vector::from_fn(m, |i| if i % 2 == 0 { -1.2 } else { 1.0 }).expect("finite")
                })?;
                Ok(BuiltProblem {
                    objective: Box::new(obj),
                    theta0,
                })
            }
            "mlp-xor" => {
                reject_quadratic_params(name, params)?;
                let obj = xor_mlp();
                if let Some(d) = params.dim {
                    if d != obj.dim() {
                        return Err(Error::InvalidProblem {
                            reason: format!(
                                "mlp-xor has a fixed parameter count of {}",
                                obj.dim()
                            ),
                        });
                    }
                }
                let dim = obj.dim();
                let seed = params.seed;
                let theta0 = resolve_theta0(&params.theta0, dim, || seeded_theta(dim, seed))?;
                Ok(BuiltProblem {
                    objective: Box::new(obj),
                    theta0,
                })
            }
            other => Err(Error::InvalidProblem {
                reason: format!("unknown problem '{other}' (expected one of {NAMES:?})"),
            }),
        }
    }
}
