//! Integer-index fractional Wishart processes and their Laplace transforms.
//!
//! For an `n x p` fractional Brownian matrix `B` started at `C`, the process
//! `Sigma_t = B_t' B_t` is noncentral Wishart at every fixed time with
//!
//! `E[etr(-Z Sigma_t)] = det(I + 2cZ)^{-n/2} etr(-Z (I + 2cZ)^{-1} Sigma_0)`,
//!
//! where `c` is the entry variance of `B_t - C`: `t^{2H}` for fBm and
//! `(t + eps)^{2H} - eps^{2H}` for the Riemann–Liouville approximation.
//! The same expression with real `n = v` is the law of the general-index
//! process.

use serde::{Deserialize, Serialize};

use crate::error::{FwisError, Result};
use crate::fbm::{ExactSampler, HurstParams, KernelLaw, MatrixPath, RlSampler, RlScheme, TimeGrid};
use crate::harness::mc::{run_mc, McConfig, McEstimate};
use crate::linalg::{log_det_pd, solve_pd, sym_sqrt, PsdMatrix, RectMatrix, SymMatrix};
use crate::rng::PathRng;

/// Parameters of `fWIS(H, n, p, Sigma_0)` and, for `eps > 0`, its
/// Riemann–Liouville approximation.
///
/// In JSON the initial state is given either as `c` (rows of `C`) or as
/// `sigma0`, in which case `C = [sqrt(Sigma_0); 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FwisRepr", into = "FwisRepr")]
pub struct FwisSpec {
    hurst: HurstParams,
    n: usize,
    c: RectMatrix,
    sigma0: PsdMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FwisRepr {
    hurst: f64,
    #[serde(default)]
    eps: f64,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<RectMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma0: Option<SymMatrix>,
}

impl TryFrom<FwisRepr> for FwisSpec {
    type Error = FwisError;

    fn try_from(r: FwisRepr) -> Result<Self> {
        let h = HurstParams::new(r.hurst, r.eps)?;
        match (r.c, r.sigma0) {
            (Some(c), None) => FwisSpec::new(h, r.n, c),
            (None, Some(s)) => FwisSpec::from_sigma0(h, r.n, &PsdMatrix::new(s)?),
            _ => Err(FwisError::Config("give exactly one of `c` and `sigma0`".into())),
        }
    }
}

impl From<FwisSpec> for FwisRepr {
    fn from(s: FwisSpec) -> Self {
        FwisRepr {
            hurst: s.hurst.hurst(),
            eps: s.hurst.eps(),
            n: s.n,
            c: Some(s.c),
            sigma0: None,
        }
    }
}

impl FwisSpec {
    /// `c` is the `n x p` initial state; `C'C` must be positive definite.
    pub fn new(hurst: HurstParams, n: usize, c: RectMatrix) -> Result<Self> {
        if c.rows() != n {
            return Err(FwisError::contract(format!(
                "initial state has {} rows, index is {n}",
                c.rows()
            )));
        }
        if c.cols() > n {
            return Err(FwisError::contract(format!(
                "dimension p = {} exceeds index n = {n}",
                c.cols()
            )));
        }
        let sigma0 = PsdMatrix::new_pd(c.gram())
            .map_err(|_| FwisError::contract("Sigma_0 = C'C must be positive definite"))?;
        Ok(Self { hurst, n, c, sigma0 })
    }

    /// Uses `C = [sqrt(Sigma_0); 0]`, which has `C'C = Sigma_0`.
    pub fn from_sigma0(hurst: HurstParams, n: usize, sigma0: &PsdMatrix) -> Result<Self> {
        Self::new(hurst, n, mean_factor(n, sigma0)?)
    }

    pub fn hurst(&self) -> &HurstParams {
        &self.hurst
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.c.cols()
    }

    pub fn c(&self) -> &RectMatrix {
        &self.c
    }

    pub fn sigma0(&self) -> &PsdMatrix {
        &self.sigma0
    }

    /// `E[Sigma_t] = n c(t) I + Sigma_0`.
    pub fn mean(&self, t: f64) -> SymMatrix {
        wishart_mean(self.hurst.variance_scale(t), self.n as f64, &self.sigma0)
    }

    /// Closed-form `E[etr(-Z Sigma_t)]`.
    pub fn laplace(&self, q: &LaplaceQuery) -> Result<f64> {
        wishart_laplace(&q.z, self.hurst.variance_scale(q.t), self.n as f64, &self.sigma0)
    }
}

/// Test matrix `Z` (positive definite) and time `t > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaplaceQuery {
    pub z: PsdMatrix,
    pub t: f64,
}

impl LaplaceQuery {
    pub fn new(z: SymMatrix, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(FwisError::contract(format!("t must be positive, got {t}")));
        }
        Ok(Self {
            z: PsdMatrix::new_pd(z)?,
            t,
        })
    }
}

/// `[sqrt(Sigma_0); 0]`, an `n x p` matrix with `C'C = Sigma_0`.
pub fn mean_factor(n: usize, sigma0: &PsdMatrix) -> Result<RectMatrix> {
    let p = sigma0.dim();
    if n < p {
        return Err(FwisError::contract(format!("index n = {n} is below dimension p = {p}")));
    }
    let root = sym_sqrt(sigma0)?;
    Ok(RectMatrix::from_fn(n, p, |i, j| if i < p { root.get(i, j) } else { 0.0 }))
}

/// First moment of the noncentral Wishart law: `v c I + Sigma_0`.
///
/// Obtained as `-d/ds` of the Laplace transform at `Z = s E_ij`, `s = 0`:
/// the determinant contributes `v c delta_ij` and the trace term `Sigma_0`.
pub fn wishart_mean(c: f64, v: f64, sigma0: &SymMatrix) -> SymMatrix {
    SymMatrix::identity(sigma0.dim())
        .scale(v * c)
        .add(sigma0)
        .expect("same dimension")
}

/// `det(I + 2cZ)^{-v/2} etr(-Z (I + 2cZ)^{-1} Sigma_0)`.
///
/// The determinant comes from a Cholesky factor and the inverse is applied
/// by a linear solve.
pub fn wishart_laplace(z: &PsdMatrix, c: f64, v: f64, sigma0: &PsdMatrix) -> Result<f64> {
    let p = z.dim();
    if sigma0.dim() != p {
        return Err(FwisError::contract("Z and Sigma_0 must have the same dimension"));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(FwisError::contract(format!("variance scale must be >= 0, got {c}")));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(FwisError::contract(format!("index must be > 0, got {v}")));
    }
    let m = SymMatrix::identity(p).add(&z.scale(2.0 * c))?;
    let log_det = log_det_pd(&m)
        .map_err(|e| FwisError::numeric(format!("I + 2cZ is singular: {e}")))?;
    let x = solve_pd(&m, &sigma0.to_rect())?;
    let zx = z.to_rect().matmul(&x)?;
    let tr: f64 = (0..p).map(|i| zx.get(i, i)).sum();
    Ok((-0.5 * v * log_det - tr).exp())
}

/// Per-path Laplace payoff `etr(-Z S)`.
pub fn laplace_payoff(z: &SymMatrix, s: &SymMatrix) -> Result<f64> {
    Ok((-z.trace_product(s)?).exp())
}

/// Exact single-time sampler of `W_p(n, cI, Sigma_0)`: `G'G` with `G` having
/// mean `[sqrt(Sigma_0); 0]` and independent entries of variance `c`.
#[derive(Clone, Debug)]
pub struct WishartSampler {
    scale: f64,
    mean: RectMatrix,
}

impl WishartSampler {
    pub fn new(n: usize, c: f64, sigma0: &PsdMatrix) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(FwisError::contract(format!("variance scale must be >= 0, got {c}")));
        }
        Ok(Self {
            scale: c.sqrt(),
            mean: mean_factor(n, sigma0)?,
        })
    }

    pub fn sample(&self, rng: &mut PathRng) -> SymMatrix {
        let mut g = self.mean.clone();
        if self.scale > 0.0 {
            for v in g.as_mut_slice() {
                *v += self.scale * rng.normal();
            }
        }
        g.gram()
    }
}

/// One draw of `W_p(n, cI, Sigma_0)`. With `c = 0` this is `Sigma_0` up to
/// the round-off of `sqrt(Sigma_0)^2`.
pub fn wishart_sample(n: usize, c: f64, sigma0: &PsdMatrix, rng: &mut PathRng) -> Result<PsdMatrix> {
    if c == 0.0 {
        return Ok(sigma0.clone());
    }
    PsdMatrix::new(WishartSampler::new(n, c, sigma0)?.sample(rng))
}

/// Pathwise sampler of `Sigma_t = B_t' B_t` on a fixed grid. Uses the fBm
/// law when `eps = 0` and the Riemann–Liouville approximation otherwise.
#[derive(Clone, Debug)]
pub struct FwisSampler {
    spec: FwisSpec,
    inner: RlSampler,
}

impl FwisSampler {
    pub fn new(spec: &FwisSpec, grid: &TimeGrid, scheme: RlScheme) -> Result<Self> {
        let inner = if spec.hurst.eps() == 0.0 {
            RlSampler::Exact(ExactSampler::new(&spec.hurst, grid, KernelLaw::Fbm)?)
        } else {
            RlSampler::new(&spec.hurst, grid, scheme)?
        };
        Ok(Self {
            spec: spec.clone(),
            inner,
        })
    }

    pub fn spec(&self) -> &FwisSpec {
        &self.spec
    }

    /// The driving matrix path `B`.
    pub fn sample_driver(&self, rng: &mut PathRng) -> MatrixPath {
        self.inner.sample(&self.spec.c, rng)
    }

    pub fn sample(&self, rng: &mut PathRng) -> Result<MatrixPath> {
        self.sample_driver(rng).map_sym(RectMatrix::gram)
    }
}

/// `fWIS(H, n, p, Sigma_0)` on `grid`; requires `eps = 0`.
pub fn fwis_paths(spec: &FwisSpec, grid: &TimeGrid, rng: &mut PathRng) -> Result<MatrixPath> {
    if spec.hurst.eps() != 0.0 {
        return Err(FwisError::contract("fwis_paths needs eps = 0; use eps_fwis_paths_int"));
    }
    FwisSampler::new(spec, grid, RlScheme::Exact)?.sample(rng)
}

/// Integer-index `eps`-approximated process `(B^{H,eps})' B^{H,eps}`; requires `eps > 0`.
pub fn eps_fwis_paths_int(
    spec: &FwisSpec,
    grid: &TimeGrid,
    rng: &mut PathRng,
    scheme: RlScheme,
) -> Result<MatrixPath> {
    if spec.hurst.eps() <= 0.0 {
        return Err(FwisError::contract("eps_fwis_paths_int needs eps > 0"));
    }
    FwisSampler::new(spec, grid, scheme)?.sample(rng)
}

/// Monte Carlo `E[etr(-Z Sigma_t)]` from exact samples of the process on the
/// two-point grid `{0, t}`.
pub fn mc_laplace(spec: &FwisSpec, q: &LaplaceQuery, cfg: &McConfig) -> Result<McEstimate> {
    let grid = TimeGrid::new(vec![0.0, q.t])?;
    let sampler = FwisSampler::new(spec, &grid, RlScheme::Exact)?;
    let z = q.z.as_sym();
    run_mc(cfg, |rng| laplace_payoff(z, &sampler.sample(rng)?.terminal_sym()?))
}

/// Outcome of [`additivity_check`].
#[derive(Clone, Debug, Serialize)]
pub struct AdditivityReport {
    pub estimate: McEstimate,
    /// Transform of `fWIS(H, n + m, p, Sigma_0 + S_0)`.
    pub closed_form: f64,
    pub z_score: f64,
    pub passed: bool,
}

/// Checks `fWIS(H,n,p,Sigma_0) + fWIS(H,m,p,S_0) = fWIS(H,n+m,p,Sigma_0+S_0)`
/// in law through the Laplace transform at `q`. The two processes use
/// independent substreams of each path. Passes within 3 standard errors.
pub fn additivity_check(
    a: &FwisSpec,
    b: &FwisSpec,
    q: &LaplaceQuery,
    cfg: &McConfig,
) -> Result<AdditivityReport> {
    if a.hurst != b.hurst {
        return Err(FwisError::contract("both processes must share H and eps"));
    }
    if a.p() != b.p() || q.z.dim() != a.p() {
        return Err(FwisError::contract("both processes and Z must share the dimension p"));
    }
    let grid = TimeGrid::new(vec![0.0, q.t])?;
    let sa = FwisSampler::new(a, &grid, RlScheme::Exact)?;
    let sb = FwisSampler::new(b, &grid, RlScheme::Exact)?;
    let z = q.z.as_sym();
    let estimate = run_mc(cfg, |rng| {
        let x = sa.sample(&mut rng.substream(1))?.terminal_sym()?;
        let y = sb.sample(&mut rng.substream(2))?.terminal_sym()?;
        laplace_payoff(z, &x.add(&y)?)
    })?;
    let s0 = PsdMatrix::new(a.sigma0.add(&b.sigma0)?)?;
    let closed_form = wishart_laplace(&q.z, a.hurst.variance_scale(q.t), (a.n + b.n) as f64, &s0)?;
    let z_score = estimate.z_score(closed_form);
    Ok(AdditivityReport {
        passed: z_score <= 3.0,
        estimate,
        closed_form,
        z_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(h: f64, e: f64) -> HurstParams {
        HurstParams::new(h, e).unwrap()
    }

    fn cfg(n: usize) -> McConfig {
        McConfig {
            n_paths: n,
            master_seed: 11,
            ..McConfig::default()
        }
    }

    #[test]
    fn laplace_scalar_integer_exponent() {
        let z = PsdMatrix::new(SymMatrix::from_diag(&[0.5])).unwrap();
        let s0 = PsdMatrix::new(SymMatrix::zeros(1)).unwrap();
        let v = wishart_laplace(&z, 1.0, 2.0, &s0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn laplace_degenerate_scale() {
        let z = PsdMatrix::new(SymMatrix::from_rows(&[vec![0.7, 0.1], vec![0.1, 0.3]]).unwrap()).unwrap();
        let s0 = PsdMatrix::new(SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.5]]).unwrap()).unwrap();
        let v = wishart_laplace(&z, 0.0, 3.0, &s0).unwrap();
        let direct = (-z.trace_product(&s0).unwrap()).exp();
        assert!((v - direct).abs() < 1e-15);
    }

    #[test]
    fn laplace_near_zero() {
        let z = PsdMatrix::new(SymMatrix::identity(2).scale(1e-12)).unwrap();
        let v = wishart_laplace(&z, 1.0, 3.0, &PsdMatrix::identity(2)).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn spec_rejects_bad_shapes() {
        let h = hp(0.7, 0.0);
        assert!(FwisSpec::new(h, 1, RectMatrix::identity(2)).is_err());
        let singular = RectMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(FwisSpec::new(h, 2, singular).is_err());
        assert!(FwisSpec::from_sigma0(h, 1, &PsdMatrix::identity(2)).is_err());
    }

    #[test]
    fn spec_from_json() {
        let s: FwisSpec = serde_json::from_str(r#"{"hurst":0.7,"eps":0.1,"n":3,"sigma0":[[1,0],[0,1]]}"#).unwrap();
        assert_eq!((s.n(), s.p()), (3, 2));
        assert!(serde_json::from_str::<FwisSpec>(r#"{"hurst":0.7,"n":3}"#).is_err());
    }

    #[test]
    fn sample_with_zero_scale_returns_initial_state() {
        let s0 = PsdMatrix::new(SymMatrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap()).unwrap();
        let s = wishart_sample(3, 0.0, &s0, &mut PathRng::child(0, 0)).unwrap();
        assert_eq!(s.as_sym(), s0.as_sym());
    }

    #[test]
    fn sample_mean_and_laplace() {
        let s0 = PsdMatrix::identity(2);
        let sampler = WishartSampler::new(3, 1.0, &s0).unwrap();
        let e00 = run_mc(&cfg(20_000), |rng| Ok(sampler.sample(rng).get(0, 0))).unwrap();
        assert!(e00.z_score(4.0) <= 3.0, "{e00:?}");
        let z = SymMatrix::identity(2).scale(0.5);
        let lap = run_mc(&cfg(20_000), |rng| laplace_payoff(&z, &sampler.sample(rng))).unwrap();
        let cf = wishart_laplace(&PsdMatrix::new(z).unwrap(), 1.0, 3.0, &s0).unwrap();
        assert!(lap.z_score(cf) <= 3.0, "{lap:?} vs {cf}");
    }

    #[test]
    fn paths_are_psd_and_start_at_sigma0() {
        let spec = FwisSpec::from_sigma0(hp(0.3, 0.0), 3, &PsdMatrix::identity(2)).unwrap();
        let grid = TimeGrid::uniform(0.1, 10).unwrap();
        let path = fwis_paths(&spec, &grid, &mut PathRng::child(5, 0)).unwrap();
        assert_eq!(&path.sym_at(0).unwrap(), spec.sigma0().as_sym());
        for k in 0..path.len() {
            let s = path.sym_at(k).unwrap();
            assert!(s.min_eig().unwrap() >= -1e-12 * s.trace());
        }
    }

    #[test]
    fn entry_points_check_eps() {
        let grid = TimeGrid::uniform(0.5, 2).unwrap();
        let fbm = FwisSpec::from_sigma0(hp(0.7, 0.0), 1, &PsdMatrix::identity(1)).unwrap();
        let rl = FwisSpec::from_sigma0(hp(0.7, 0.1), 1, &PsdMatrix::identity(1)).unwrap();
        let mut rng = PathRng::child(0, 0);
        assert!(fwis_paths(&rl, &grid, &mut rng).is_err());
        assert!(eps_fwis_paths_int(&fbm, &grid, &mut rng, RlScheme::Exact).is_err());
    }

    #[test]
    fn eps_mean_matches_closed_form() {
        let c = RectMatrix::from_rows(&[vec![0.1], vec![0.1]]).unwrap();
        let spec = FwisSpec::new(hp(0.7, 0.1), 2, c).unwrap();
        let grid = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let sampler = FwisSampler::new(&spec, &grid, RlScheme::Exact).unwrap();
        let e = run_mc(&cfg(20_000), |rng| Ok(sampler.sample(rng)?.terminal_sym()?.get(0, 0))).unwrap();
        let reference = 2.225_870_826_048_286_8;
        assert!((spec.mean(1.0).get(0, 0) - reference).abs() < 1e-14);
        assert!(e.z_score(reference) <= 3.0, "{e:?}");
    }

    #[test]
    fn additivity_rejects_mismatch() {
        let a = FwisSpec::from_sigma0(hp(0.7, 0.0), 2, &PsdMatrix::identity(2)).unwrap();
        let b = FwisSpec::from_sigma0(hp(0.5, 0.0), 3, &PsdMatrix::identity(2)).unwrap();
        let q = LaplaceQuery::new(SymMatrix::identity(2).scale(0.5), 1.0).unwrap();
        assert!(matches!(additivity_check(&a, &b, &q, &cfg(10)), Err(FwisError::Contract(_))));
    }

    #[test]
    fn additivity_scalar_chi_square() {
        let c = RectMatrix::from_rows(&[vec![1e-8]]).unwrap();
        let a = FwisSpec::new(hp(0.5, 0.0), 1, c.clone()).unwrap();
        let q = LaplaceQuery::new(SymMatrix::from_diag(&[0.5]), 1.0).unwrap();
        let r = additivity_check(&a, &a, &q, &cfg(20_000)).unwrap();
        assert!((r.closed_form - 0.5).abs() < 1e-12);
        assert!(r.passed, "{r:?}");
    }
}
