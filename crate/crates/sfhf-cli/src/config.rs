//! Run configuration: a flat TOML document with typed keys.
//!
//! Nested integrator settings use dotted keys (`sqrt.rk_steps = 40`).
//! Unknown keys are rejected so typos fail fast instead of silently running
//! with defaults. Every key has a documented default; the only required
//! keys are `problem` and `method`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use sfhf_core::objectives::registry::ProblemParams;
use sfhf_core::optim::{Method, SfhfConfig};
use sfhf_core::sqrt_ode::SqrtApplyConfig;

/// Serialized form of one run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Problem name: quadratic, rosenbrock, mlp-xor, or saddle.
    pub problem: String,
    /// Method name: gd, newton-dense, sfn-dense, or sfhf.
    pub method: String,
    /// Run seed; defaults to 0. Controls MLP initialization.
    pub seed: Option<u64>,
    /// Step size. Defaults to 0.1 for gd and 1.0 for everything else.
    pub alpha: Option<f64>,
    /// Damping added to the squared Hessian; default 1e-6.
    pub damping: Option<f64>,
    /// Convergence threshold on the gradient norm; default 1e-8.
    pub grad_tol: Option<f64>,
    /// Outer iteration budget; default 100.
    pub max_outer_iters: Option<usize>,
    /// Outer CG relative tolerance; default 1e-6.
    pub outer_cg_tol: Option<f64>,
    /// Outer CG iteration cap; default 250.
    pub outer_cg_max_iters: Option<usize>,
    /// Problem dimension (quadratic, rosenbrock).
    pub dim: Option<usize>,
    /// Quadratic spectrum.
    pub eigenvalues: Option<Vec<f64>>,
    /// Seed for the quadratic rotation basis; omitted keeps it diagonal.
    pub rotation_seed: Option<u64>,
    /// Quadratic linear term; defaults to zero.
    pub linear_term: Option<Vec<f64>>,
    /// Start point override.
    pub theta0: Option<Vec<f64>>,
    /// Trace CSV destination; `--out` takes precedence.
    pub output_path: Option<PathBuf>,
    /// Square-root integrator settings.
    #[serde(default)]
    pub sqrt: SqrtSection,
}

/// Integrator keys under the `sqrt.` prefix.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqrtSection {
    /// Runge-Kutta step count; default 20.
    pub rk_steps: Option<usize>,
    /// Inner CG relative tolerance; default 1e-8.
    pub inner_tol: Option<f64>,
    /// Inner CG iteration cap; default 250.
    pub inner_max_iters: Option<usize>,
    /// Rescaled spectrum ceiling; default 0.9.
    pub norm_target: Option<f64>,
    /// Norm-estimate safety factor; default 1.05.
    pub norm_safety: Option<f64>,
    /// Power iteration count; default 100.
    pub norm_power_iters: Option<usize>,
}

/// A fully validated run: problem, method, optimizer settings, output.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    /// Problem name for the registry.
    pub problem: String,
    /// Parsed method.
    pub method: Method,
    /// Effective seed.
    pub seed: u64,
    /// Optimizer settings with defaults applied.
    pub cfg: SfhfConfig,
    /// Problem construction parameters.
    pub params: ProblemParams,
    /// Where to write the trace CSV, if anywhere.
    pub output_path: Option<PathBuf>,
}

/// Reads and parses a config file.
pub fn load(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

/// Parses a config document.
pub fn parse(text: &str) -> Result<FileConfig> {
    let cfg: FileConfig = toml::from_str(text)?;
    Ok(cfg)
}

/// Applies defaults and validates every field.
///
/// `seed_override` (from `--seed`) wins over the config's `seed` key.
pub fn resolve(file: &FileConfig, seed_override: Option<u64>) -> Result<ResolvedRun> {
    let method = Method::from_name(&file.method)
        .with_context(|| format!("key 'method' = {:?}", file.method))?;
    let seed = seed_override.or(file.seed).unwrap_or(0);

    let default_alpha = match method {
        Method::Gd => 0.1,
        _ => 1.0,
    };
    let defaults = SfhfConfig::default();
    let sqrt_defaults = SqrtApplyConfig::default();
    let cfg = SfhfConfig {
        alpha: file.alpha.unwrap_or(default_alpha),
        damping: file.damping.unwrap_or(defaults.damping),
        grad_tol: file.grad_tol.unwrap_or(defaults.grad_tol),
        max_outer_iters: file.max_outer_iters.unwrap_or(defaults.max_outer_iters),
        outer_cg_tol: file.outer_cg_tol.unwrap_or(defaults.outer_cg_tol),
        outer_cg_max_iters: file
            .outer_cg_max_iters
            .unwrap_or(defaults.outer_cg_max_iters),
        sqrt_cfg: SqrtApplyConfig {
            rk_steps: file.sqrt.rk_steps.unwrap_or(sqrt_defaults.rk_steps),
            inner_tol: file.sqrt.inner_tol.unwrap_or(sqrt_defaults.inner_tol),
            inner_max_iters: file
                .sqrt
                .inner_max_iters
                .unwrap_or(sqrt_defaults.inner_max_iters),
            norm_target: file.sqrt.norm_target.unwrap_or(sqrt_defaults.norm_target),
            norm_safety: file.sqrt.norm_safety.unwrap_or(sqrt_defaults.norm_safety),
            norm_power_iters: file
                .sqrt
                .norm_power_iters
                .unwrap_or(sqrt_defaults.norm_power_iters),
        },
    };
    cfg.validate().context("optimizer configuration")?;

    let known = ["quadratic", "rosenbrock", "mlp-xor", "saddle"];
    if !known.contains(&file.problem.as_str()) {
        bail!(
            "key 'problem' = {:?}: expected one of {known:?}",
            file.problem
        );
    }

    Ok(ResolvedRun {
        problem: file.problem.clone(),
        method,
        seed,
        cfg,
        params: ProblemParams {
            dim: file.dim,
            eigenvalues: file.eigenvalues.clone(),
            rotation_seed: file.rotation_seed,
            linear_term: file.linear_term.clone(),
            theta0: file.theta0.clone(),
            seed,
        },
        output_path: file.output_path.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_applies_defaults() {
        let file = parse("problem = \"rosenbrock\"\nmethod = \"sfhf\"\n").unwrap();
        let r = resolve(&file, None).unwrap();
        assert_eq!(r.problem, "rosenbrock");
        assert_eq!(r.method, Method::Sfhf);
        assert_eq!(r.seed, 0);
        assert_eq!(r.cfg.alpha, 1.0);
        assert_eq!(r.cfg.sqrt_cfg.rk_steps, 20);
        assert_eq!(r.cfg.sqrt_cfg.inner_max_iters, 250);
        assert!(r.output_path.is_none());
    }

    #[test]
    fn gd_gets_a_smaller_default_alpha() {
        let file = parse("problem = \"quadratic\"\nmethod = \"gd\"\n").unwrap();
        assert_eq!(resolve(&file, None).unwrap().cfg.alpha, 0.1);
    }

    #[test]
    fn unknown_method_names_the_key() {
        let file = parse("problem = \"quadratic\"\nmethod = \"newton\"\n").unwrap();
        let err = format!("{:#}", resolve(&file, None).unwrap_err());
        assert!(err.contains("method"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse("problem = \"saddle\"\nmethod = \"sfhf\"\nalpa = 0.5\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("alpa"), "{msg}");
    }

    #[test]
    fn dotted_sqrt_keys_parse() {
        let file = parse(
            "problem = \"saddle\"\nmethod = \"sfhf\"\nsqrt.rk_steps = 40\nsqrt.inner_tol = 1e-10\n",
        )
        .unwrap();
        let r = resolve(&file, None).unwrap();
        assert_eq!(r.cfg.sqrt_cfg.rk_steps, 40);
        assert_eq!(r.cfg.sqrt_cfg.inner_tol, 1e-10);
    }

    #[test]
    fn quadratic_spectrum_passthrough() {
        let file = parse(
            "problem = \"quadratic\"\nmethod = \"sfhf\"\neigenvalues = [2.0, -1.0]\ndim = 2\n",
        )
        .unwrap();
        let r = resolve(&file, None).unwrap();
        assert_eq!(r.params.eigenvalues.as_deref(), Some(&[2.0, -1.0][..]));
        assert_eq!(r.params.dim, Some(2));
    }

    #[test]
    fn seed_override_wins() {
        let file = parse("problem = \"mlp-xor\"\nmethod = \"sfhf\"\nseed = 3\n").unwrap();
        assert_eq!(resolve(&file, None).unwrap().seed, 3);
        assert_eq!(resolve(&file, Some(9)).unwrap().seed, 9);
        assert_eq!(resolve(&file, Some(9)).unwrap().params.seed, 9);
    }

    #[test]
    fn out_of_range_value_is_rejected() {
        let file =
            parse("problem = \"saddle\"\nmethod = \"sfhf\"\nalpha = -0.5\n").unwrap();
        assert!(resolve(&file, None).is_err());
    }
}
