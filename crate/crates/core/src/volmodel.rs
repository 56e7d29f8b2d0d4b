//! Multi-asset stochastic volatility driven by the six-parameter process.
//!
//! Log-returns follow `dY = (mu - diag(u)/2) dt + sqrt(u) dB` with
//! `B = W rho + sqrt(1 - rho'rho) H`, where `W` is the matrix Brownian
//! motion driving `u` and `H` is independent.

use serde::{Deserialize, Serialize};

use crate::error::{FwisError, Result};
use crate::fbm::{HurstParams, MatrixPath, TimeGrid};
use crate::harness::estimators::{delta_method, StatEstimate};
use crate::harness::mc::{collect_paths, McConfig};
use crate::linalg::{sym_eigen, PsdMatrix, RectMatrix, SymMatrix};
use crate::rng::PathRng;
use crate::spde::{CharacteristicScheme, GeneralVSpec, ProjectionReport, SixParamSpec};

/// Volatility specification: general index or the full six-parameter form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VolSpec {
    General(GeneralVSpec),
    Six(SixParamSpec),
}

impl VolSpec {
    pub fn to_six(&self) -> SixParamSpec {
        match self {
            VolSpec::General(g) => g.to_six(),
            VolSpec::Six(s) => s.clone(),
        }
    }
}

/// Asset model parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VolModelRepr", into = "VolModelRepr")]
pub struct VolModelSpec {
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub s0: Vec<f64>,
    pub r: f64,
    pub vol: VolSpec,
    six: SixParamSpec,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VolModelRepr {
    mu: Vec<f64>,
    rho: Vec<f64>,
    s0: Vec<f64>,
    #[serde(default)]
    r: f64,
    vol: VolSpec,
}

impl TryFrom<VolModelRepr> for VolModelSpec {
    type Error = FwisError;

    fn try_from(r: VolModelRepr) -> Result<Self> {
        VolModelSpec::new(r.mu, r.rho, r.s0, r.r, r.vol)
    }
}

impl From<VolModelSpec> for VolModelRepr {
    fn from(s: VolModelSpec) -> Self {
        VolModelRepr {
            mu: s.mu,
            rho: s.rho,
            s0: s.s0,
            r: s.r,
            vol: s.vol,
        }
    }
}

impl VolModelSpec {
    /// Requires `rho_i in [-1, 1]`, `rho'rho <= 1`, positive prices and an
    /// invertible `Q`.
    pub fn new(mu: Vec<f64>, rho: Vec<f64>, s0: Vec<f64>, r: f64, vol: VolSpec) -> Result<Self> {
        let six = vol.to_six();
        let p = six.p();
        if mu.len() != p || rho.len() != p || s0.len() != p {
            return Err(FwisError::contract(format!("mu, rho and s0 must have length p = {p}")));
        }
        if rho.iter().any(|x| !(-1.0..=1.0).contains(x)) {
            return Err(FwisError::contract("every rho_i must lie in [-1, 1]"));
        }
        if rho.iter().map(|x| x * x).sum::<f64>() > 1.0 {
            return Err(FwisError::contract("rho'rho must not exceed 1"));
        }
        if s0.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(FwisError::contract("initial prices must be positive"));
        }
        if !r.is_finite() || mu.iter().any(|x| !x.is_finite()) {
            return Err(FwisError::contract("rates must be finite"));
        }
        let qq = six.q().gram();
        if sym_eigen(&qq)?.min_value() <= 1e-14 * qq.trace() {
            return Err(FwisError::contract("Q must be invertible"));
        }
        Ok(Self { mu, rho, s0, r, vol, six })
    }

    pub fn p(&self) -> usize {
        self.six.p()
    }

    pub fn six(&self) -> &SixParamSpec {
        &self.six
    }

    fn orth(&self) -> f64 {
        (1.0 - self.rho.iter().map(|x| x * x).sum::<f64>()).max(0.0).sqrt()
    }
}

/// Log-returns `Y` (`p x 1` per time) and volatility `u` on one path.
#[derive(Clone, Debug, Serialize)]
pub struct AssetPaths {
    pub y: MatrixPath,
    pub u: MatrixPath,
    pub report: ProjectionReport,
}

impl AssetPaths {
    /// Prices `S = exp(Y)` at grid index `k`.
    pub fn prices(&self, k: usize) -> Vec<f64> {
        (0..self.y.rows).map(|i| self.y.entry(k, i, 0).exp()).collect()
    }
}

fn draw_h(p: usize, dt: f64, rng: &mut PathRng) -> Vec<f64> {
    let sd = dt.sqrt();
    (0..p).map(|_| sd * rng.normal()).collect()
}

// One log-Euler increment from state (u, sqrt u) with noises dW, dH.
fn return_step(spec: &VolModelSpec, u: &SymMatrix, root: &SymMatrix, dw: &RectMatrix, dh: &[f64], dt: f64) -> Vec<f64> {
    let p = spec.p();
    let orth = spec.orth();
    let db: Vec<f64> = (0..p)
        .map(|i| (0..p).map(|l| dw.get(i, l) * spec.rho[l]).sum::<f64>() + orth * dh[i])
        .collect();
    (0..p)
        .map(|i| {
            let diffusion: f64 = (0..p).map(|l| root.get(i, l) * db[l]).sum();
            (spec.mu[i] - 0.5 * u.get(i, i)) * dt + diffusion
        })
        .collect()
}

/// Simulates `(Y, u)` on a uniform grid. Each step draws `dW` then `dH`;
/// `u_{t_k}(eps)` comes from its own characteristic started at `t_k + eps`,
/// so the cost grows with the square of the number of steps.
pub fn simulate_assets(spec: &VolModelSpec, grid: &TimeGrid, rng: &mut PathRng) -> Result<AssetPaths> {
    let dt = grid
        .dt()
        .ok_or_else(|| FwisError::Grid("asset simulation needs a uniform grid".into()))?;
    let p = spec.p();
    let scheme = CharacteristicScheme::new(&spec.six, dt)?;
    let n = grid.len();
    let eps = spec.six.hurst().eps();
    let x0: Vec<f64> = grid.times().iter().map(|t| t + eps).collect();
    let stops: Vec<usize> = (0..n).collect();
    let lineage = rng.lineage();
    let mut fam = scheme.family(&x0, &stops, lineage.path_index)?;
    let mut y: Vec<f64> = spec.s0.iter().map(|s| s.ln()).collect();
    let mut ys = y.clone();
    let mut us: Vec<SymMatrix> = Vec::with_capacity(n);
    for k in 0..n - 1 {
        let dw = scheme.draw_dw(rng);
        let dh = draw_h(p, dt, rng);
        let dy = return_step(spec, fam.eta(k), fam.root(k), &dw, &dh, dt);
        for (yi, d) in y.iter_mut().zip(&dy) {
            *yi += d;
        }
        if let Some(bad) = y.iter().position(|v| !v.is_finite()) {
            return Err(FwisError::PathFailure {
                path_index: lineage.path_index,
                step: k,
                message: format!("log-return of asset {bad} is not finite"),
            });
        }
        ys.extend_from_slice(&y);
        us.push(fam.eta(k).clone());
        fam.advance(&dw)?;
    }
    us.push(fam.eta(n - 1).clone());
    Ok(AssetPaths {
        y: MatrixPath::new(grid.clone(), p, 1, false, ys)?.with_id(lineage.path_index, Some(lineage)),
        u: MatrixPath::from_sym(grid.clone(), &us)?.with_id(lineage.path_index, Some(lineage)),
        report: fam.report(),
    })
}

/// One-step quantities at grid index `k`: the return increment
/// `Y_{k+1} - Y_k`, `u_k` and `u_{k+1}`. [`simulate_assets`] on the same
/// stream adds exactly this `dy` and passes through the same `u` values.
#[derive(Clone, Debug)]
pub struct StepSample {
    pub dy: Vec<f64>,
    pub u_now: SymMatrix,
    pub u_next: SymMatrix,
    pub report: ProjectionReport,
}

pub fn instantaneous_increment(scheme: &CharacteristicScheme, spec: &VolModelSpec, k: usize, rng: &mut PathRng) -> Result<StepSample> {
    let dt = scheme.dt();
    let p = spec.p();
    let eps = spec.six.hurst().eps();
    let x0 = [k as f64 * dt + eps, (k + 1) as f64 * dt + eps];
    let mut fam = scheme.family(&x0, &[k, k + 1], rng.lineage().path_index)?;
    let mut dy = Vec::new();
    for j in 0..=k {
        let dw = scheme.draw_dw(rng);
        let dh = draw_h(p, dt, rng);
        if j == k {
            dy = return_step(spec, fam.eta(0), fam.root(0), &dw, &dh, dt);
        }
        fam.advance(&dw)?;
    }
    Ok(StepSample {
        dy,
        u_now: fam.eta(0).clone(),
        u_next: fam.eta(1).clone(),
        report: fam.report(),
    })
}

fn check_pair(u: &SymMatrix, i: usize, j: usize) -> Result<()> {
    if i >= u.dim() || j >= u.dim() {
        return Err(FwisError::contract("asset index out of range"));
    }
    Ok(())
}

/// Conditional correlation of returns `i` and `j`: `u_ij / sqrt(u_ii u_jj)`.
pub fn corr_returns(u: &SymMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(u, i, j)?;
    let d = u.get(i, i) * u.get(j, j);
    if !(d > 0.0) {
        return Err(FwisError::contract("variances must be positive"));
    }
    Ok(u.get(i, j) / d.sqrt())
}

/// Correlation of return `i` with its own variance: `(Q'rho)_i / sqrt((Q'Q)_ii)`.
pub fn corr_leverage(q: &RectMatrix, rho: &[f64], i: usize) -> Result<f64> {
    let p = q.rows();
    if i >= q.cols() || rho.len() != p {
        return Err(FwisError::contract("index or rho length does not match Q"));
    }
    let col: f64 = (0..p).map(|l| q.get(l, i) * q.get(l, i)).sum();
    if col == 0.0 {
        return Err(FwisError::contract(format!("column {i} of Q is zero")));
    }
    let qr: f64 = (0..p).map(|l| q.get(l, i) * rho[l]).sum();
    Ok(qr / col.sqrt())
}

/// Correlation of variances `i` and `j`:
/// `(Q'Q)_ij u_ij / sqrt((Q'Q)_ii (Q'Q)_jj u_ii u_jj)`.
pub fn corr_vol(q: &RectMatrix, u: &SymMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(u, i, j)?;
    let qq = q.gram();
    let d = qq.get(i, i) * qq.get(j, j);
    if !(d > 0.0) {
        return Err(FwisError::contract("diagonal of Q'Q must be positive"));
    }
    Ok(qq.get(i, j) / d.sqrt() * corr_returns(u, i, j)?)
}

/// CIR parameters of the scalar Brownian case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HestonParams {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl HestonParams {
    /// `E[u_t] = theta + (u0 - theta) e^{-kappa t}`.
    pub fn cir_mean(&self, u0: f64, t: f64) -> f64 {
        self.theta + (u0 - self.theta) * (-self.kappa * t).exp()
    }
}

/// With `p = 1`, `H = 1/2` and `Omega^2 = v Q^2` the variance is CIR with
/// `kappa = -2K`, `theta = v Q^2 / (-2K)`, `sigma = 2Q`.
pub fn heston_degenerate(v: f64, q: f64, k: f64) -> Result<HestonParams> {
    if !(k < 0.0) {
        return Err(FwisError::contract(format!("K must be negative, got {k}")));
    }
    Ok(HestonParams {
        kappa: -2.0 * k,
        theta: v * q * q / (-2.0 * k),
        sigma: 2.0 * q,
    })
}

/// The six-parameter spec of the Heston case with offset `eps`.
pub fn heston_spec(v: f64, q: f64, k: f64, u0: f64, eps: f64) -> Result<SixParamSpec> {
    let m = |x: f64| RectMatrix::new(1, 1, vec![x]);
    SixParamSpec::new(
        HurstParams::new(0.5, eps)?,
        PsdMatrix::new_pd(SymMatrix::from_diag(&[u0]))?,
        m(v.sqrt() * q)?,
        m(q)?,
        m(k)?,
    )
}

fn scalar(spec: &GeneralVSpec) -> Result<()> {
    if spec.p() != 1 {
        return Err(FwisError::contract("the variance forward needs a single asset (p = 1)"));
    }
    Ok(())
}

/// `E[u_t(eps)] = v((t + eps)^{2H} - eps^{2H}) + Sigma_0` for `p = 1`.
pub fn expected_variance(spec: &GeneralVSpec, t: f64) -> Result<f64> {
    scalar(spec)?;
    if !(t >= 0.0) {
        return Err(FwisError::contract("t must be >= 0"));
    }
    Ok(spec.v() * spec.hurst().variance_scale(t) + spec.sigma0().get(0, 0))
}

/// Forward on the variance paying `u_T(eps) - iota` at `T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardContract {
    pub delivery: f64,
    pub iota: f64,
}

impl ForwardContract {
    pub fn new(delivery: f64, iota: f64) -> Result<Self> {
        if !(delivery > 0.0 && delivery.is_finite()) {
            return Err(FwisError::contract(format!("delivery time must be positive, got {delivery}")));
        }
        Ok(Self { delivery, iota })
    }
}

/// Value at time 0 and fair delivery price.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ForwardPrice {
    pub value: f64,
    pub fair_price: f64,
}

/// `P0 = E[u_T(eps)]`, `V0 = e^{-rT}(P0 - iota)`.
pub fn price_variance_forward(contract: &ForwardContract, spec: &GeneralVSpec, r: f64) -> Result<ForwardPrice> {
    let fair_price = expected_variance(spec, contract.delivery)?;
    Ok(ForwardPrice {
        value: (-r * contract.delivery).exp() * (fair_price - contract.iota),
        fair_price,
    })
}

/// One simulated statistic against its reference.
#[derive(Clone, Debug, Serialize)]
pub struct CorrCheck {
    pub name: String,
    pub estimate: f64,
    pub reference: f64,
    /// Standard error of `estimate - reference`.
    pub std_error: f64,
}

impl CorrCheck {
    pub fn z_score(&self) -> f64 {
        let d = (self.estimate - self.reference).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

/// Cross-sectional estimates at one time and the projection counts.
#[derive(Clone, Debug, Serialize)]
pub struct CorrelationReport {
    pub t: f64,
    pub checks: Vec<CorrCheck>,
    pub report: ProjectionReport,
}

/// Compares cross-sectional one-step statistics at `t` with the
/// instantaneous formulas: return covariance `Cov(dY_i, dY_j)/dt` against
/// the mean of `u_t`, and the return, leverage and vol-vol correlations
/// against their formulas at the mean of `u_t`. Standard errors are for
/// the difference and come from the delta method on per-path moments.
pub fn correlation_report(spec: &VolModelSpec, t: f64, cfg: &McConfig) -> Result<CorrelationReport> {
    let p = spec.p();
    let dt = cfg.dt;
    let k = (t / dt).round();
    if k < 0.0 || (k * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(FwisError::Grid(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    let k = k as usize;
    let scheme = CharacteristicScheme::new(&spec.six, dt)?;
    let samples = collect_paths(cfg, |rng| instantaneous_increment(&scheme, spec, k, rng))?;
    let mut report = ProjectionReport::default();
    for s in &samples {
        report.merge(&s.report);
    }
    let q = spec.six.q();
    let qq = q.gram();
    let mut checks = Vec::new();
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect();

    // Features per path: x, y, x*y, x^2, y^2 for a pair of increments, plus
    // u entries at t for the reference.
    let corr = |m: &[f64]| {
        let c = m[2] - m[0] * m[1];
        c / ((m[3] - m[0] * m[0]) * (m[4] - m[1] * m[1])).sqrt()
    };
    let du = |s: &StepSample, i: usize, j: usize| s.u_next.get(i, j) - s.u_now.get(i, j);

    for i in 0..p {
        for j in i..p {
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .map(|s| {
                    let (x, y) = (s.dy[i], s.dy[j]);
                    vec![x, y, x * y, s.u_now.get(i, j)]
                })
                .collect();
            let e = delta_method(&rows, |m| (m[2] - m[0] * m[1]) / dt - m[3]);
            let r = delta_method(&rows, |m| m[3]);
            checks.push(CorrCheck {
                name: format!("return-cov[{i},{j}]"),
                estimate: e.value + r.value,
                reference: r.value,
                std_error: e.std_error,
            });
        }
    }
    for &(i, j) in &pairs {
        let rows: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                let (x, y) = (s.dy[i], s.dy[j]);
                vec![x, y, x * y, x * x, y * y, s.u_now.get(i, i), s.u_now.get(j, j), s.u_now.get(i, j)]
            })
            .collect();
        let reference = |m: &[f64]| m[7] / (m[5] * m[6]).sqrt();
        push_diff(&mut checks, format!("return-corr[{i},{j}]"), &rows, corr, reference);

        let rows: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                let (x, y) = (du(s, i, i), du(s, j, j));
                vec![x, y, x * y, x * x, y * y, s.u_now.get(i, i), s.u_now.get(j, j), s.u_now.get(i, j)]
            })
            .collect();
        let scale = qq.get(i, j) / (qq.get(i, i) * qq.get(j, j)).sqrt();
        push_diff(&mut checks, format!("vol-corr[{i},{j}]"), &rows, corr, move |m| {
            scale * m[7] / (m[5] * m[6]).sqrt()
        });
    }
    for i in 0..p {
        let rows: Vec<Vec<f64>> = samples
            .iter()
            .map(|s| {
                let (x, y) = (s.dy[i], du(s, i, i));
                vec![x, y, x * y, x * x, y * y]
            })
            .collect();
        let reference = corr_leverage(q, &spec.rho, i)?;
        let e = delta_method(&rows, corr);
        checks.push(CorrCheck {
            name: format!("leverage-corr[{i}]"),
            estimate: e.value,
            reference,
            std_error: e.std_error,
        });
    }
    Ok(CorrelationReport { t, checks, report })
}

fn push_diff(
    checks: &mut Vec<CorrCheck>,
    name: String,
    rows: &[Vec<f64>],
    stat: impl Fn(&[f64]) -> f64,
    reference: impl Fn(&[f64]) -> f64,
) {
    let diff: StatEstimate = delta_method(rows, |m| stat(m) - reference(m));
    let r = delta_method(rows, &reference);
    checks.push(CorrCheck {
        name,
        estimate: diff.value + r.value,
        reference: r.value,
        std_error: diff.std_error,
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_asset() -> VolModelSpec {
        let q = RectMatrix::from_rows(&[vec![0.3, 0.1], vec![0.0, 0.25]]).unwrap();
        let omega = crate::linalg::sym_sqrt(&PsdMatrix::new(q.gram().scale(4.0)).unwrap()).unwrap().to_rect();
        let six = SixParamSpec::new(
            HurstParams::new(0.7, 0.1).unwrap(),
            PsdMatrix::new(SymMatrix::from_rows(&[vec![0.04, 0.01], vec![0.01, 0.09]]).unwrap()).unwrap(),
            omega,
            q,
            RectMatrix::identity(2).scale(-0.5),
        )
        .unwrap();
        VolModelSpec::new(vec![0.05, 0.03], vec![-0.5, 0.3], vec![100.0, 50.0], 0.0, VolSpec::Six(six)).unwrap()
    }

    #[test]
    fn correlation_formulas() {
        let u = SymMatrix::from_rows(&[vec![4.0, 3.0], vec![3.0, 9.0]]).unwrap();
        assert_eq!(corr_returns(&u, 0, 1).unwrap(), 0.5);
        assert_eq!(corr_returns(&SymMatrix::identity(2), 0, 1).unwrap(), 0.0);
        let q = RectMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((corr_leverage(&q, &[0.6, 0.8], 0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(corr_leverage(&RectMatrix::identity(2), &[0.0, 0.0], 1).unwrap(), 0.0);
        let half = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(corr_vol(&RectMatrix::identity(2), &half, 0, 1).unwrap(), 0.0);
        let mixed = RectMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(corr_vol(&mixed, &SymMatrix::identity(2), 0, 1).unwrap(), 0.0);
        assert!(corr_leverage(&RectMatrix::zeros(2, 2), &[0.1, 0.1], 0).is_err());
        assert!(corr_returns(&SymMatrix::zeros(2), 0, 1).is_err());
    }

    #[test]
    fn heston_parameters() {
        let h = heston_degenerate(2.0, 0.3, -1.0).unwrap();
        assert_eq!(h.kappa, 2.0);
        assert!((h.theta - 0.09).abs() < 1e-15);
        assert!((h.sigma - 0.6).abs() < 1e-15);
        assert!((h.cir_mean(0.04, 1.0) - 0.083_233_235_838_169_37).abs() < 1e-15);
        assert_eq!(h.cir_mean(h.theta, 3.0), h.theta);
        assert!(heston_degenerate(2.0, 0.3, 0.5).is_err());
    }

    #[test]
    fn forward_pricing() {
        let g = GeneralVSpec::new(
            HurstParams::new(0.7, 0.1).unwrap(),
            2.0,
            PsdMatrix::new(SymMatrix::from_diag(&[0.04])).unwrap(),
        )
        .unwrap();
        assert!((expected_variance(&g, 1.0).unwrap() - 2.245_870_826_048_286_8).abs() < 1e-14);
        assert_eq!(expected_variance(&g, 0.0).unwrap(), 0.04);
        let p = price_variance_forward(&ForwardContract::new(1.0, 0.0).unwrap(), &g, 0.05).unwrap();
        assert!((p.value - 2.136_338_413_364_855).abs() < 1e-13);
        let fair = price_variance_forward(&ForwardContract::new(1.0, p.fair_price).unwrap(), &g, 0.05).unwrap();
        assert_eq!(fair.value, 0.0);
        let a = price_variance_forward(&ForwardContract::new(1.0, 0.3).unwrap(), &g, 0.05).unwrap();
        let b = price_variance_forward(&ForwardContract::new(1.0, 0.7).unwrap(), &g, 0.05).unwrap();
        assert!((a.value - b.value - (-0.05f64).exp() * 0.4).abs() < 1e-14);
    }

    #[test]
    fn spec_invariants() {
        let base = two_asset();
        let vol = base.vol.clone();
        assert!(VolModelSpec::new(vec![0.0; 2], vec![0.9, 0.9], vec![1.0; 2], 0.0, vol.clone()).is_err());
        assert!(VolModelSpec::new(vec![0.0; 2], vec![0.0; 2], vec![-1.0, 1.0], 0.0, vol).is_err());
    }

    #[test]
    fn increments_match_full_simulation() {
        let spec = two_asset();
        let dt = 1.0 / 64.0;
        let grid = TimeGrid::uniform(dt, 8).unwrap();
        let full = simulate_assets(&spec, &grid, &mut PathRng::child(6, 3)).unwrap();
        let scheme = CharacteristicScheme::new(spec.six(), dt).unwrap();
        let k = 5;
        let s = instantaneous_increment(&scheme, &spec, k, &mut PathRng::child(6, 3)).unwrap();
        for i in 0..2 {
            assert_eq!(full.y.entry(k, i, 0) + s.dy[i], full.y.entry(k + 1, i, 0));
        }
        assert_eq!(s.u_now, full.u.sym_at(k).unwrap());
        assert_eq!(s.u_next, full.u.sym_at(k + 1).unwrap());
        assert!((full.prices(0)[0] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn frozen_volatility_is_brownian() {
        let s0 = SymMatrix::from_rows(&[vec![0.04, 0.01], vec![0.01, 0.09]]).unwrap();
        let z = RectMatrix::zeros(2, 2);
        // Q must be invertible, so use a tiny Q with Omega large enough.
        let q = RectMatrix::identity(2).scale(1e-9);
        let six = SixParamSpec::new(
            HurstParams::new(0.7, 0.1).unwrap(),
            PsdMatrix::new(s0.clone()).unwrap(),
            RectMatrix::identity(2).scale(1e-8),
            q,
            z,
        )
        .unwrap();
        let spec = VolModelSpec::new(vec![0.0; 2], vec![0.0; 2], vec![1.0; 2], 0.0, VolSpec::Six(six)).unwrap();
        let grid = TimeGrid::uniform(0.25, 4).unwrap();
        let cfg = McConfig {
            n_paths: 20_000,
            master_seed: 3,
            ..McConfig::default()
        };
        let ends = collect_paths(&cfg, |rng| {
            let a = simulate_assets(&spec, &grid, rng)?;
            Ok((a.y.entry(4, 0, 0), a.y.entry(4, 1, 0)))
        })
        .unwrap();
        let xs: Vec<f64> = ends.iter().map(|e| e.0).collect();
        let ys: Vec<f64> = ends.iter().map(|e| e.1).collect();
        let c = crate::harness::estimators::covariance(&xs, &ys);
        assert!((c.value - 0.01).abs() <= 3.0 * c.std_error, "{c:?}");
    }
}
