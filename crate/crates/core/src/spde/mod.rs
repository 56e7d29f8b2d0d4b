//! General-index and six-parameter processes built from stochastic
//! characteristics, the blend functions behind them and the Riccati check
//! of their Laplace transform.

pub mod blend;
pub mod characteristic;
pub mod riccati;

pub use blend::{blend_coeffs, blend_f, blend_g, blend_g_deriv, smoothness_checks, BlendCoeffs, Branch, KnotCheck};
pub use characteristic::{
    eps_fwis_general, past_dependent_term, simulate_characteristic, terminal_u, terminal_u_coupled,
    CharacteristicFamily, CharacteristicScheme, Family, GeneralPath, GeneralVSpec, IncrementReport, ProjectionReport,
    SixParamSpec,
};
pub use riccati::{riccati_solve, riccati_transform, RiccatiSolution, RICCATI_STEPS};

use crate::error::{FwisError, Result};
use crate::harness::mc::{collect_paths, McConfig};

/// Cross-path summary of [`past_dependent_term`] at time `t`, with the
/// characteristic step `cfg.dt`.
pub fn increment_decomposition_report(
    spec: &SixParamSpec,
    t: f64,
    dt_obs: f64,
    cfg: &McConfig,
) -> Result<IncrementReport> {
    let scheme = CharacteristicScheme::new(spec, cfg.dt)?;
    let steps = (t / cfg.dt).round();
    if steps < 0.0 || (steps * cfg.dt - t).abs() > 1e-9 * t.max(cfg.dt) {
        return Err(FwisError::Grid(format!("t = {t} is not a multiple of dt = {}", cfg.dt)));
    }
    if !(dt_obs >= 0.0) {
        return Err(FwisError::contract("observation spacing must be >= 0"));
    }
    let terms = collect_paths(cfg, |rng| past_dependent_term(&scheme, steps as usize, dt_obs, rng))?;
    let n = terms.len();
    let positive = terms.iter().filter(|x| **x > 0.0).count();
    Ok(IncrementReport {
        t,
        dt_obs,
        n_paths: n,
        positive_fraction: positive as f64 / n as f64,
        mean_abs: crate::harness::estimators::mean(&terms),
        max_abs: terms.iter().copied().fold(0.0, f64::max),
    })
}
