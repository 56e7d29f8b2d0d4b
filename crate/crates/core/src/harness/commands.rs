//! Library side of the `simulate`, `price` and `blend` commands.

use std::path::Path;

use serde::Serialize;

use super::config::{ProcessSpec, RunConfig};
use super::export::PathWriter;
use super::manifest::RunManifest;
use super::mc::{collect_range, run_mc, McEstimate};
use crate::error::{FwisError, Result};
use crate::fbm::{HurstParams, MatrixPath, RlScheme, TimeGrid};
use crate::rng::PathRng;
use crate::spde::{
    eps_fwis_general, smoothness_checks, terminal_u, BlendCoeffs, CharacteristicScheme, ProjectionReport, SixParamSpec,
};
use crate::volmodel::{price_variance_forward, simulate_assets, ForwardContract, ForwardPrice};
use crate::wishart::{FwisSampler, FwisSpec};

/// Paths simulated per parallel batch before they are written out.
pub const CHUNK: u64 = 256;

fn stream<T, F>(cfg: &RunConfig, task: F, mut sink: impl FnMut(T) -> Result<()>) -> Result<()>
where
    T: Send,
    F: Fn(&mut PathRng) -> Result<T> + Sync,
{
    let n = cfg.mc.n_paths as u64;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        for x in collect_range(&cfg.mc, start..end, &task)? {
            sink(x)?;
        }
        start = end;
    }
    Ok(())
}

/// Simulates `cfg.mc.n_paths` paths of the configured process and writes
/// `paths.csv` (or `.jsonl`), `returns.*` for the volatility model, and
/// `manifest.json` into `out`. `process` must name the configured kind.
pub fn simulate_to_dir(cfg: &RunConfig, process: &str, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    let spec = cfg
        .process
        .as_ref()
        .ok_or_else(|| FwisError::Config("the configuration has no `process` section".into()))?;
    if spec.name() != process {
        return Err(FwisError::Config(format!(
            "--process {process} does not match the configured kind {:?}",
            spec.name()
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| FwisError::io(out, e))?;
    let steps = cfg.steps()?;
    let stride = cfg.obs_stride()?;
    let grid = TimeGrid::uniform(cfg.mc.dt, steps)?;
    let obs = TimeGrid::new(grid.times().iter().step_by(stride).copied().collect())?;
    let mut m = RunManifest::new(process, "simulate", cfg);
    let ext = cfg.format.extension();
    let main = out.join(format!("paths.{ext}"));
    let mut report = None;
    match spec {
        ProcessSpec::Fwis { spec } => {
            if spec.hurst().eps() != 0.0 {
                return Err(FwisError::Config("process fwis needs eps = 0; use eps-int".into()));
            }
            write_integer(cfg, spec, RlScheme::Exact, &obs, &main)?;
        }
        ProcessSpec::EpsInt { spec, scheme } => {
            if spec.hurst().eps() <= 0.0 {
                return Err(FwisError::Config("process eps-int needs eps > 0".into()));
            }
            write_integer(cfg, spec, *scheme, &obs, &main)?;
        }
        ProcessSpec::EpsGeneral { spec } => report = Some(write_general(cfg, &spec.to_six(), &grid, &obs, &main)?),
        ProcessSpec::Six { spec } => report = Some(write_general(cfg, spec, &grid, &obs, &main)?),
        ProcessSpec::Volmodel { spec } => {
            let mut w = PathWriter::create(&main, cfg.format, true)?;
            let mut wy = PathWriter::create(&out.join(format!("returns.{ext}")), cfg.format, false)?;
            let mut r = ProjectionReport::default();
            stream(
                cfg,
                |rng| simulate_assets(spec, &grid, rng),
                |a| {
                    r.merge(&a.report);
                    w.write(&a.u.every(stride)?)?;
                    wy.write(&a.y.every(stride)?)
                },
            )?;
            w.finish()?;
            wy.finish()?;
            m.notes.push(format!("log-prices written to returns.{ext}"));
            report = Some(r);
        }
    }
    m.notes.push(format!("{} paths written to paths.{ext}", cfg.mc.n_paths));
    if let Some(r) = report {
        let flag = if r.flagged() { " (flagged)" } else { "" };
        m.notes.push(format!(
            "eigenvalue floor applied in {} of {} member-steps{flag}",
            r.clamped, r.steps
        ));
    }
    let m = m.finish();
    m.write_dir(out)?;
    Ok(m)
}

fn write_integer(cfg: &RunConfig, spec: &FwisSpec, scheme: RlScheme, obs: &TimeGrid, dest: &Path) -> Result<()> {
    let sampler = FwisSampler::new(spec, obs, scheme)?;
    let mut w = PathWriter::create(dest, cfg.format, true)?;
    stream(cfg, |rng| sampler.sample(rng), |p: MatrixPath| w.write(&p))?;
    w.finish()
}

fn write_general(
    cfg: &RunConfig,
    six: &SixParamSpec,
    grid: &TimeGrid,
    obs: &TimeGrid,
    dest: &Path,
) -> Result<ProjectionReport> {
    let mut w = PathWriter::create(dest, cfg.format, true)?;
    let mut r = ProjectionReport::default();
    stream(
        cfg,
        |rng| eps_fwis_general(six, grid, obs, rng),
        |p| {
            r.merge(&p.report);
            w.write(&p.path)
        },
    )?;
    w.finish()?;
    Ok(r)
}

/// Output of `fwis price`.
#[derive(Clone, Debug, Serialize)]
pub struct PriceReport {
    pub contract: ForwardContract,
    pub r: f64,
    pub price: ForwardPrice,
    /// Discounted Monte Carlo payoff, when requested.
    pub monte_carlo: Option<McEstimate>,
}

/// Closed-form variance forward from `cfg.forward`, optionally with a
/// Monte Carlo estimate of the same value at step `cfg.mc.dt`.
pub fn price_forward(cfg: &RunConfig, with_mc: bool) -> Result<PriceReport> {
    cfg.validate()?;
    let f = cfg
        .forward
        .as_ref()
        .ok_or_else(|| FwisError::Config("the configuration has no `forward` section".into()))?;
    let price = price_variance_forward(&f.contract, &f.spec, f.r)?;
    let monte_carlo = if with_mc {
        let scheme = CharacteristicScheme::new(&f.spec.to_six(), cfg.mc.dt)?;
        let steps = (f.contract.delivery / cfg.mc.dt).round() as usize;
        if (steps as f64 * cfg.mc.dt - f.contract.delivery).abs() > 1e-9 * f.contract.delivery {
            return Err(FwisError::Config("delivery must be a multiple of dt".into()));
        }
        let disc = (-f.r * f.contract.delivery).exp();
        Some(run_mc(&cfg.mc, |rng| {
            Ok(disc * (terminal_u(&scheme, steps, rng)?.0.get(0, 0) - f.contract.iota))
        })?)
    } else {
        None
    };
    Ok(PriceReport {
        contract: f.contract,
        r: f.r,
        price,
        monte_carlo,
    })
}

/// Output of `fwis blend`.
#[derive(Clone, Debug, Serialize)]
pub struct BlendReport {
    pub coefficients: BlendCoeffs,
    /// Plug-back residuals of the ten boundary equations.
    pub residuals: [f64; 10],
    /// Largest relative jump of derivatives 0 to 4 over the four knots.
    pub max_knot_jump: f64,
}

pub fn blend_report(hurst: f64, eps: f64) -> Result<BlendReport> {
    let coefficients = BlendCoeffs::new(&HurstParams::new(hurst, eps)?)?;
    let residuals = coefficients.residuals();
    let max_knot_jump = smoothness_checks(&coefficients, super::suites::BLEND_FD_STEP)
        .iter()
        .fold(0.0_f64, |a, k| a.max(k.rel_error));
    Ok(BlendReport {
        coefficients,
        residuals,
        max_knot_jump,
    })
}
