use std::ops::Range;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::mean_and_se;
use crate::error::{FwisError, Result};
use crate::rng::PathRng;

/// Monte Carlo run parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub master_seed: u64,
    /// Time step for discretised schemes.
    pub dt: f64,
    /// Worker threads; `None` lets rayon decide. Never changes results.
    pub threads: Option<usize>,
    /// Average each path with its sign-flipped twin.
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            master_seed: 20_240_601,
            dt: 1.0 / 1024.0,
            threads: None,
            antithetic: false,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(FwisError::Config("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(FwisError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.threads == Some(0) {
            return Err(FwisError::Config("threads must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_paths(&self, n_paths: usize) -> Self {
        Self {
            n_paths,
            ..self.clone()
        }
    }

    pub fn with_threads(&self, threads: usize) -> Self {
        Self {
            threads: Some(threads),
            ..self.clone()
        }
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        Self { dt, ..self.clone() }
    }

    pub fn with_seed(&self, master_seed: u64) -> Self {
        Self {
            master_seed,
            ..self.clone()
        }
    }
}

/// Point estimate with standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Seconds; excluded from [`McEstimate::same_bits`].
    pub wall_time: f64,
}

impl McEstimate {
    /// Bitwise equality of everything except timing.
    pub fn same_bits(&self, other: &McEstimate) -> bool {
        self.mean.to_bits() == other.mean.to_bits()
            && self.std_error.to_bits() == other.std_error.to_bits()
            && self.n_paths == other.n_paths
            && self.seed == other.seed
    }

    /// `|mean - reference|` in standard errors (infinite when SE is 0 and
    /// the values differ).
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = (self.mean - reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

fn pool(cfg: &McConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cfg.threads {
        b = b.num_threads(t);
    }
    b.build()
        .map_err(|e| FwisError::Config(format!("cannot start worker pool: {e}")))
}

/// Runs `task` once per path on its own stream and returns the outputs in
/// path order. The result is identical for every worker count.
pub fn collect_paths<T, F>(cfg: &McConfig, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut PathRng) -> Result<T> + Sync,
{
    collect_range(cfg, 0..cfg.n_paths as u64, task)
}

/// [`collect_paths`] restricted to the path indices in `range`, so large
/// runs can be processed in chunks.
pub fn collect_range<T, F>(cfg: &McConfig, range: Range<u64>, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut PathRng) -> Result<T> + Sync,
{
    cfg.validate()?;
    let seed = cfg.master_seed;
    let outputs: Vec<Result<T>> = pool(cfg)?.install(|| {
        range
            .into_par_iter()
            .map(|i| {
                let mut rng = PathRng::child(seed, i);
                task(&mut rng).map_err(|e| tag_path(e, i))
            })
            .collect()
    });
    outputs.into_iter().collect()
}

fn tag_path(e: FwisError, path_index: u64) -> FwisError {
    match e {
        FwisError::Numeric(message) => FwisError::PathFailure {
            path_index,
            step: 0,
            message,
        },
        other => other,
    }
}

/// Scalar Monte Carlo estimate of `E[task]`.
///
/// With `cfg.antithetic` every path is evaluated on its stream and on the
/// negated stream and the pair average counts as one sample.
pub fn run_mc<F>(cfg: &McConfig, task: F) -> Result<McEstimate>
where
    F: Fn(&mut PathRng) -> Result<f64> + Sync,
{
    let start = Instant::now();
    let antithetic = cfg.antithetic;
    let samples = collect_paths(cfg, |rng| {
        let index = rng.lineage().path_index;
        let mut twin = rng.antithetic();
        let mut x = task(rng)?;
        if antithetic {
            x = 0.5 * (x + task(&mut twin)?);
        }
        if !x.is_finite() {
            return Err(FwisError::PathFailure {
                path_index: index,
                step: 0,
                message: format!("non-finite payoff {x}"),
            });
        }
        Ok(x)
    })?;
    let (mean, std_error) = mean_and_se(&samples);
    Ok(McEstimate {
        mean,
        std_error,
        n_paths: cfg.n_paths,
        seed: cfg.master_seed,
        wall_time: start.elapsed().as_secs_f64(),
    })
}
