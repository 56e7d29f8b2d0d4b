//! Run manifests: the resolved configuration, every check with its
//! tolerance, and timestamps.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{FwisError, Result};

/// One compared quantity. A check passes when
/// `|estimate - reference| <= tolerance`, except for `Rule::Below`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckRecord {
    pub name: String,
    pub estimate: f64,
    pub reference: f64,
    /// Standard error of `estimate - reference` for statistical checks.
    pub std_error: Option<f64>,
    /// Absolute tolerance actually applied.
    pub tolerance: f64,
    pub rule: Rule,
    pub passed: bool,
}

/// How a tolerance was formed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Rule {
    /// `k` standard errors plus a fixed allowance.
    StdErrors { k: f64, allowance: f64 },
    /// The larger of `k` standard errors and a fraction of the reference.
    StdErrorsOrRelative { k: f64, rel: f64 },
    Relative { rel: f64 },
    Absolute { abs: f64 },
    /// `estimate < reference` strictly.
    Below,
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

impl CheckRecord {
    fn build(name: impl Into<String>, estimate: f64, reference: f64, se: Option<f64>, tolerance: f64, rule: Rule) -> Self {
        let passed = match rule {
            Rule::Below => estimate < reference,
            _ => (estimate - reference).abs() <= tolerance,
        } && estimate.is_finite();
        Self {
            name: name.into(),
            estimate: finite_or_max(estimate),
            reference,
            std_error: se,
            tolerance,
            rule,
            passed,
        }
    }

    /// Within `k` standard errors plus `allowance`.
    pub fn std_errors(name: impl Into<String>, estimate: f64, se: f64, reference: f64, k: f64, allowance: f64) -> Self {
        Self::build(name, estimate, reference, Some(se), k * se + allowance, Rule::StdErrors { k, allowance })
    }

    /// Within `max(k SE, rel |reference|)`.
    pub fn std_errors_or_relative(
        name: impl Into<String>,
        estimate: f64,
        se: f64,
        reference: f64,
        k: f64,
        rel: f64,
    ) -> Self {
        let tol = (k * se).max(rel * reference.abs());
        Self::build(name, estimate, reference, Some(se), tol, Rule::StdErrorsOrRelative { k, rel })
    }

    pub fn relative(name: impl Into<String>, estimate: f64, reference: f64, rel: f64) -> Self {
        Self::build(name, estimate, reference, None, rel * reference.abs(), Rule::Relative { rel })
    }

    pub fn absolute(name: impl Into<String>, estimate: f64, reference: f64, abs: f64) -> Self {
        Self::build(name, estimate, reference, None, abs, Rule::Absolute { abs })
    }

    /// Inside `[lo, hi]`, recorded as midpoint and half-width.
    pub fn band(name: impl Into<String>, estimate: f64, se: Option<f64>, lo: f64, hi: f64) -> Self {
        let abs = 0.5 * (hi - lo);
        Self::build(name, estimate, 0.5 * (lo + hi), se, abs, Rule::Absolute { abs })
    }

    pub fn below(name: impl Into<String>, estimate: f64, bound: f64) -> Self {
        Self::build(name, estimate, bound, None, 0.0, Rule::Below)
    }

    /// `|estimate - reference|` in standard errors, if this is a statistical check.
    pub fn z_score(&self) -> Option<f64> {
        let se = self.std_error?;
        let d = (self.estimate - self.reference).abs();
        Some(if d == 0.0 { 0.0 } else { d / se })
    }

    /// The one-line summary printed by the command-line tool.
    pub fn summary(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let se = self.std_error.map_or(String::new(), |s| format!(" se={s:.3e}"));
        format!(
            "{verdict} {} estimate={:.9e} reference={:.9e}{se} tol={:.3e}",
            self.name, self.estimate, self.reference, self.tolerance
        )
    }
}

/// Record of one command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub suite: String,
    pub command: String,
    pub config: RunConfig,
    pub code_version: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// Free-form remarks, such as projection counts.
    pub notes: Vec<String>,
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
    pub passed: bool,
}

/// Seconds since the Unix epoch.
pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0.0, |d| d.as_secs_f64())
}

impl RunManifest {
    pub fn new(suite: impl Into<String>, command: impl Into<String>, config: &RunConfig) -> Self {
        Self {
            suite: suite.into(),
            command: command.into(),
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.mc.master_seed,
            checks: Vec::new(),
            notes: Vec::new(),
            started: unix_now(),
            finished: 0.0,
            passed: false,
        }
    }

    pub fn push(&mut self, check: CheckRecord) {
        self.checks.push(check);
    }

    /// Stamps the finish time and sets `passed` when every check passed.
    pub fn finish(mut self) -> Self {
        self.finished = unix_now();
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| FwisError::numeric(format!("manifest is not serialisable: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FwisError::Config(format!("bad manifest: {e}")))
    }

    /// Writes `manifest.json` and `checks.csv` into `dir`, creating it.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| FwisError::io(dir, e))?;
        let path = dir.join("manifest.json");
        std::fs::write(&path, self.to_json()? + "\n").map_err(|e| FwisError::io(&path, e))?;
        let path = dir.join("checks.csv");
        let io = |e: csv::Error| FwisError::io(&path, e.into());
        let mut w = csv::Writer::from_path(&path).map_err(io)?;
        w.write_record(["name", "estimate", "reference", "std_error", "tolerance", "passed"])
            .map_err(io)?;
        for c in &self.checks {
            let se = c.std_error.map_or(String::new(), |s| format!("{s:.16e}"));
            w.write_record([
                c.name.clone(),
                format!("{:.16e}", c.estimate),
                format!("{:.16e}", c.reference),
                se,
                format!("{:.16e}", c.tolerance),
                c.passed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| FwisError::io(&path, e))
    }

    /// `manifest.json` from `dir`.
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| FwisError::io(&path, e))?;
        Self::from_json(&text)
    }

    /// Exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        let mut m = RunManifest::new("riccati", "validate", &RunConfig::default());
        m.push(CheckRecord::std_errors("mean", 0.1 + 0.2, 1.0 / 3.0, 0.3, 3.0, 0.0));
        m.push(CheckRecord::relative("ode", 1.000_000_1, 1.0, 1e-6));
        m.push(CheckRecord::below("gap", 1e-300, 2e-300));
        m.notes.push("clamped 0 of 10 steps".into());
        m.finish()
    }

    #[test]
    fn reparses_losslessly() {
        let m = sample();
        assert_eq!(RunManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn tolerance_rules() {
        let c = CheckRecord::std_errors("a", 1.0, 0.1, 1.25, 3.0, 0.0);
        assert!(c.passed && (c.tolerance - 0.3).abs() < 1e-15);
        assert!(!CheckRecord::std_errors("b", 1.0, 0.1, 1.35, 3.0, 0.0).passed);
        assert!(CheckRecord::std_errors_or_relative("c", 1.0, 1e-9, 1.005, 3.0, 0.01).passed);
        assert!(CheckRecord::band("d", 2.5, None, 1.4, 2.6).passed);
        assert!(!CheckRecord::band("e", 2.7, None, 1.4, 2.6).passed);
        assert!(!CheckRecord::below("f", 1.0, 1.0).passed);
        assert!(!CheckRecord::absolute("g", f64::NAN, 0.0, 1.0).passed);
    }

    #[test]
    fn exit_code_follows_checks() {
        assert_eq!(sample().exit_code(), 0);
        let mut m = sample();
        m.push(CheckRecord::below("late", 2.0, 1.0));
        assert_eq!(m.finish().exit_code(), 1);
    }

    #[test]
    fn writes_directory() {
        let dir = tempfile::tempdir().unwrap();
        let m = sample();
        m.write_dir(dir.path()).unwrap();
        assert_eq!(RunManifest::read_dir(dir.path()).unwrap(), m);
        let csv = std::fs::read_to_string(dir.path().join("checks.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
    }
}
