//! Fractional Brownian matrices and their Riemann–Liouville approximations.
//!
//! `B^H` has independent fBm entries with covariance
//! `(t^{2H} + s^{2H} - |t-s|^{2H}) / 2`. The approximation
//! `B^{H,eps}_t = C + sqrt(2H) \int_0^t (t - u + eps)^alpha dB_u`,
//! `alpha = H - 1/2`, is Gaussian with covariance
//! `2H \int_0^{min(t,s)} (t - u + eps)^alpha (s - u + eps)^alpha du`,
//! whose diagonal is `(t + eps)^{2H} - eps^{2H}`.

use serde::{Deserialize, Serialize};

use crate::error::{FwisError, Result};
use crate::linalg::{cholesky_sym, RectMatrix, SymMatrix};
use crate::quadrature::{integrate, QuadOptions};
use crate::rng::{PathRng, SeedLineage};

/// Hurst index `H`, `alpha = H - 1/2` and the offset `eps >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HurstRepr", into = "HurstRepr")]
pub struct HurstParams {
    hurst: f64,
    alpha: f64,
    eps: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HurstRepr {
    hurst: f64,
    #[serde(default)]
    eps: f64,
}

impl TryFrom<HurstRepr> for HurstParams {
    type Error = FwisError;

    fn try_from(r: HurstRepr) -> Result<Self> {
        HurstParams::new(r.hurst, r.eps)
    }
}

impl From<HurstParams> for HurstRepr {
    fn from(h: HurstParams) -> Self {
        HurstRepr {
            hurst: h.hurst,
            eps: h.eps,
        }
    }
}

impl HurstParams {
    pub fn new(hurst: f64, eps: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(FwisError::contract(format!("Hurst index must lie in (0, 1), got {hurst}")));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(FwisError::contract(format!("eps must be finite and >= 0, got {eps}")));
        }
        Ok(Self {
            hurst,
            alpha: hurst - 0.5,
            eps,
        })
    }

    /// Fractional Brownian motion proper (`eps = 0`).
    pub fn fbm(hurst: f64) -> Result<Self> {
        Self::new(hurst, 0.0)
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.hurst, eps)
    }

    /// Variance of one entry of `B^{H,eps}_t - C`: `(t + eps)^{2H} - eps^{2H}`.
    /// For `eps = 0` this is `t^{2H}`, the fBm variance.
    pub fn variance_scale(&self, t: f64) -> f64 {
        let two_h = 2.0 * self.hurst;
        (t + self.eps).powf(two_h) - self.eps.powf(two_h)
    }
}

/// Strictly increasing observation times starting at 0. Serialized as the
/// list of times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
    dt: Option<f64>,
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = FwisError;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        TimeGrid::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.times
    }
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(FwisError::Grid("grid must start at t = 0".into()));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(FwisError::Grid(format!(
                "grid times must be finite and strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        let dt = detect_uniform(&times);
        Ok(Self { times, dt })
    }

    /// `steps + 1` points `k * dt`.
    pub fn uniform(dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FwisError::Grid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            times: (0..=steps).map(|k| k as f64 * dt).collect(),
            dt: Some(dt),
        })
    }

    /// Uniform grid on `[0, horizon]` with step `dt`; `horizon / dt` must be
    /// an integer up to 1e-9 relative.
    pub fn uniform_to(horizon: f64, dt: f64) -> Result<Self> {
        let steps = (horizon / dt).round();
        if steps < 1.0 || ((steps * dt) - horizon).abs() > 1e-9 * horizon.max(dt) {
            return Err(FwisError::Grid(format!(
                "horizon {horizon} is not a positive multiple of dt {dt}"
            )));
        }
        Self::uniform(dt, steps as usize)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }

    /// Step size when the grid is uniform.
    pub fn dt(&self) -> Option<f64> {
        self.dt
    }

    /// Index of `t` in the grid, matching within `1e-9 * max(1, t)`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times.iter().position(|s| (s - t).abs() <= tol)
    }
}

fn detect_uniform(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = times[1] - times[0];
    let uniform = times
        .iter()
        .enumerate()
        .all(|(k, t)| (t - k as f64 * dt).abs() <= 1e-12 * t.abs().max(1.0));
    uniform.then_some(dt)
}

/// A trajectory of `rows x cols` matrices on a grid, stored flat as
/// `[time][row][col]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixPath {
    pub grid: TimeGrid,
    pub rows: usize,
    pub cols: usize,
    pub symmetric: bool,
    pub values: Vec<f64>,
    pub path_id: u64,
    pub lineage: Option<SeedLineage>,
}

impl MatrixPath {
    pub fn new(grid: TimeGrid, rows: usize, cols: usize, symmetric: bool, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() * rows * cols {
            return Err(FwisError::contract(format!(
                "path needs {} values, got {}",
                grid.len() * rows * cols,
                values.len()
            )));
        }
        if symmetric && rows != cols {
            return Err(FwisError::contract("symmetric path must have square values"));
        }
        Ok(Self {
            grid,
            rows,
            cols,
            symmetric,
            values,
            path_id: 0,
            lineage: None,
        })
    }

    pub fn from_sym(grid: TimeGrid, mats: &[SymMatrix]) -> Result<Self> {
        let p = mats.first().map_or(1, SymMatrix::dim);
        if mats.len() != grid.len() || mats.iter().any(|m| m.dim() != p) {
            return Err(FwisError::contract("one p x p matrix per grid point is required"));
        }
        let values = mats.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
        Self::new(grid, p, p, true, values)
    }

    pub fn with_id(mut self, path_id: u64, lineage: Option<SeedLineage>) -> Self {
        self.path_id = path_id;
        self.lineage = lineage;
        self
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    #[inline]
    pub fn entry(&self, k: usize, i: usize, j: usize) -> f64 {
        self.values[(k * self.rows + i) * self.cols + j]
    }

    pub fn rect_at(&self, k: usize) -> RectMatrix {
        let stride = self.rows * self.cols;
        RectMatrix::new(self.rows, self.cols, self.values[k * stride..(k + 1) * stride].to_vec())
            .expect("shape is consistent")
    }

    pub fn sym_at(&self, k: usize) -> Result<SymMatrix> {
        SymMatrix::try_from_rect(&self.rect_at(k))
    }

    pub fn terminal_sym(&self) -> Result<SymMatrix> {
        self.sym_at(self.len() - 1)
    }

    /// Every `stride`-th grid point, starting with the first.
    pub fn every(&self, stride: usize) -> Result<MatrixPath> {
        if stride == 0 {
            return Err(FwisError::contract("stride must be >= 1"));
        }
        let keep: Vec<usize> = (0..self.len()).step_by(stride).collect();
        let grid = TimeGrid::new(keep.iter().map(|&k| self.grid.times()[k]).collect())?;
        let stride_v = self.rows * self.cols;
        let values = keep
            .iter()
            .flat_map(|&k| self.values[k * stride_v..(k + 1) * stride_v].iter().copied())
            .collect();
        Ok(MatrixPath::new(grid, self.rows, self.cols, self.symmetric, values)?.with_id(self.path_id, self.lineage))
    }

    /// Applies `f` to every grid value, e.g. `B -> B'B`.
    pub fn map_sym(&self, f: impl Fn(&RectMatrix) -> SymMatrix) -> Result<MatrixPath> {
        let mats: Vec<SymMatrix> = (0..self.len()).map(|k| f(&self.rect_at(k))).collect();
        Ok(MatrixPath::from_sym(self.grid.clone(), &mats)?.with_id(self.path_id, self.lineage))
    }
}

/// `E[B^H_t B^H_s] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_cov(h: &HurstParams, t: f64, s: f64) -> Result<f64> {
    if t < 0.0 || s < 0.0 {
        return Err(FwisError::contract(format!("times must be >= 0, got ({t}, {s})")));
    }
    let two_h = 2.0 * h.hurst;
    Ok(0.5 * (t.powf(two_h) + s.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Covariance of the Riemann–Liouville kernel process with offset `h.eps()`.
pub fn rl_cov(h: &HurstParams, t: f64, s: f64) -> Result<f64> {
    rl_cross_cov(h, h.eps, h.eps, t, s)
}

/// `2H \int_0^{min(t,s)} (t - u + eps_t)^alpha (s - u + eps_s)^alpha du`:
/// the covariance between the kernel process at `t` with offset `eps_t` and
/// at `s` with offset `eps_s`, both driven by the same Brownian motion.
pub fn rl_cross_cov(h: &HurstParams, eps_t: f64, eps_s: f64, t: f64, s: f64) -> Result<f64> {
    if t < 0.0 || s < 0.0 {
        return Err(FwisError::contract(format!("times must be >= 0, got ({t}, {s})")));
    }
    if eps_t < 0.0 || eps_s < 0.0 {
        return Err(FwisError::contract("offsets must be >= 0"));
    }
    let m = t.min(s);
    if m == 0.0 {
        return Ok(0.0);
    }
    let alpha = h.alpha;
    if alpha == 0.0 {
        return Ok(m);
    }
    // x = min(t,s) - u puts any kernel singularity at x = 0.
    let dt = t - m + eps_t;
    let ds = s - m + eps_s;
    let kernel = |x: f64| ((dt + x) * (ds + x)).powf(alpha);
    let r = integrate(kernel, 0.0, m, QuadOptions::default())?;
    Ok(2.0 * h.hurst * r.value)
}

/// `E|B^{H,eps}_t - B^{H,0}_t|^2` for a single entry, both processes driven
/// by the same Brownian motion.
pub fn l2_distance_to_limit(h: &HurstParams, t: f64) -> Result<f64> {
    let e = h.eps;
    let same = rl_cross_cov(h, e, e, t, t)?;
    let limit = rl_cross_cov(h, 0.0, 0.0, t, t)?;
    let cross = rl_cross_cov(h, e, 0.0, t, t)?;
    Ok(same + limit - 2.0 * cross)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RlScheme {
    #[default]
    Exact,
    Incremental,
}

/// Which Gaussian law the exact sampler factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelLaw {
    Fbm,
    RiemannLiouville,
}

/// Exact Gaussian sampler on a fixed grid: the temporal covariance over the
/// positive grid times is factored once and reused for every entry and path.
#[derive(Clone, Debug)]
pub struct ExactSampler {
    grid: TimeGrid,
    factor: RectMatrix,
}

impl ExactSampler {
    pub fn new(h: &HurstParams, grid: &TimeGrid, law: KernelLaw) -> Result<Self> {
        let positive = &grid.times()[1..];
        if positive.is_empty() {
            return Err(FwisError::Grid("grid needs at least one positive time".into()));
        }
        let m = positive.len();
        let mut entries = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let c = match law {
                    KernelLaw::Fbm => fbm_cov(h, positive[i], positive[j])?,
                    KernelLaw::RiemannLiouville => rl_cov(h, positive[i], positive[j])?,
                };
                entries[i * m + j] = c;
                entries[j * m + i] = c;
            }
        }
        let cov = SymMatrix::try_from_rect(&RectMatrix::new(m, m, entries)?)?;
        let factor = cholesky_sym(&cov).map_err(|e| match e {
            FwisError::Cone { minor, pivot } => FwisError::Grid(format!(
                "temporal covariance is not positive definite at time {} (pivot {pivot:e})",
                positive[minor - 1]
            )),
            other => other,
        })?;
        Ok(Self {
            grid: grid.clone(),
            factor,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// One `n x p` path started at `c`. Entries are filled in row-major
    /// order, each from its own block of normal draws.
    pub fn sample(&self, c: &RectMatrix, rng: &mut PathRng) -> MatrixPath {
        let (n, p) = (c.rows(), c.cols());
        let len = self.grid.len();
        let m = len - 1;
        let mut values = vec![0.0; len * n * p];
        let mut z = vec![0.0; m];
        for i in 0..n {
            for j in 0..p {
                rng.fill_normal(&mut z);
                let c_ij = c.get(i, j);
                values[i * p + j] = c_ij;
                for k in 0..m {
                    let mut x = 0.0;
                    for (l, zl) in z.iter().enumerate().take(k + 1) {
                        x += self.factor.get(k, l) * zl;
                    }
                    values[((k + 1) * n + i) * p + j] = c_ij + x;
                }
            }
        }
        MatrixPath::new(self.grid.clone(), n, p, false, values)
            .expect("shape is consistent")
            .with_id(rng.lineage().path_index, Some(rng.lineage()))
    }
}

/// Euler scheme for the semimartingale form of `B^{H,eps}`:
/// `dX = (sqrt(2H) \int_0^t alpha (t - s + eps)^{alpha-1} dB_s) dt + sqrt(2H) eps^alpha dB_t`.
/// The drift is a running sum over every stored Brownian increment.
#[derive(Clone, Debug)]
pub struct IncrementalSampler {
    grid: TimeGrid,
    dt: f64,
    diffusion: f64,
    // kernel[l] = sqrt(2H) alpha (l dt + eps)^{alpha - 1} for lag l >= 1.
    kernel: Vec<f64>,
}

impl IncrementalSampler {
    pub fn new(h: &HurstParams, grid: &TimeGrid) -> Result<Self> {
        if h.eps <= 0.0 {
            return Err(FwisError::contract(
                "the incremental scheme needs eps > 0 (kernel derivative is singular at eps = 0)",
            ));
        }
        let dt = grid
            .dt()
            .ok_or_else(|| FwisError::contract("the incremental scheme needs a uniform grid"))?;
        let root = (2.0 * h.hurst).sqrt();
        let steps = grid.len() - 1;
        let kernel = (0..=steps)
            .map(|l| {
                if l == 0 {
                    0.0
                } else {
                    root * h.alpha * (l as f64 * dt + h.eps).powf(h.alpha - 1.0)
                }
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            dt,
            diffusion: root * h.eps.powf(h.alpha),
            kernel,
        })
    }

    pub fn sample(&self, c: &RectMatrix, rng: &mut PathRng) -> MatrixPath {
        let (n, p) = (c.rows(), c.cols());
        let len = self.grid.len();
        let m = len - 1;
        let sqrt_dt = self.dt.sqrt();
        let mut values = vec![0.0; len * n * p];
        let mut db = vec![0.0; m];
        for i in 0..n {
            for j in 0..p {
                rng.fill_normal(&mut db);
                for v in db.iter_mut() {
                    *v *= sqrt_dt;
                }
                let mut x = c.get(i, j);
                values[i * p + j] = x;
                for k in 0..m {
                    let drift: f64 = (0..k).map(|l| self.kernel[k - l] * db[l]).sum();
                    x += drift * self.dt + self.diffusion * db[k];
                    values[((k + 1) * n + i) * p + j] = x;
                }
            }
        }
        MatrixPath::new(self.grid.clone(), n, p, false, values)
            .expect("shape is consistent")
            .with_id(rng.lineage().path_index, Some(rng.lineage()))
    }

    /// Exact variance of the scheme's terminal value, `sum_j w_j^2 dt`, where
    /// `w_j` is the total weight the recursion puts on increment `j`.
    pub fn terminal_variance(&self) -> f64 {
        let m = self.grid.len() - 1;
        (0..m)
            .map(|j| {
                let drift: f64 = ((j + 1)..m).map(|k| self.kernel[k - j]).sum();
                let w = self.diffusion + self.dt * drift;
                w * w * self.dt
            })
            .sum()
    }
}

/// Either sampler for `B^{H,eps}`.
#[derive(Clone, Debug)]
pub enum RlSampler {
    Exact(ExactSampler),
    Incremental(IncrementalSampler),
}

impl RlSampler {
    pub fn new(h: &HurstParams, grid: &TimeGrid, scheme: RlScheme) -> Result<Self> {
        Ok(match scheme {
            RlScheme::Exact => RlSampler::Exact(ExactSampler::new(h, grid, KernelLaw::RiemannLiouville)?),
            RlScheme::Incremental => RlSampler::Incremental(IncrementalSampler::new(h, grid)?),
        })
    }

    pub fn sample(&self, c: &RectMatrix, rng: &mut PathRng) -> MatrixPath {
        match self {
            RlSampler::Exact(s) => s.sample(c, rng),
            RlSampler::Incremental(s) => s.sample(c, rng),
        }
    }
}

fn check_start(n: usize, p: usize, c: &RectMatrix) -> Result<()> {
    if c.rows() != n || c.cols() != p {
        return Err(FwisError::contract(format!(
            "initial state is {}x{}, expected {n}x{p}",
            c.rows(),
            c.cols()
        )));
    }
    Ok(())
}

/// Samples an `n x p` fractional Brownian matrix started at `c`.
pub fn sample_fbm_matrix(
    h: &HurstParams,
    grid: &TimeGrid,
    n: usize,
    p: usize,
    c: &RectMatrix,
    rng: &mut PathRng,
) -> Result<MatrixPath> {
    check_start(n, p, c)?;
    let h0 = h.with_eps(0.0)?;
    Ok(ExactSampler::new(&h0, grid, KernelLaw::Fbm)?.sample(c, rng))
}

/// Samples an `n x p` matrix of Riemann–Liouville approximations started at `c`.
pub fn sample_rl_matrix(
    h: &HurstParams,
    grid: &TimeGrid,
    n: usize,
    p: usize,
    c: &RectMatrix,
    rng: &mut PathRng,
    scheme: RlScheme,
) -> Result<MatrixPath> {
    check_start(n, p, c)?;
    Ok(RlSampler::new(h, grid, scheme)?.sample(c, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(h: f64, e: f64) -> HurstParams {
        HurstParams::new(h, e).unwrap()
    }

    #[test]
    fn hurst_validation() {
        assert!(HurstParams::new(0.0, 0.0).is_err());
        assert!(HurstParams::new(1.0, 0.0).is_err());
        assert!(HurstParams::new(0.5, -0.1).is_err());
        let h = hp(0.7, 0.1);
        assert_eq!(h.alpha(), 0.7 - 0.5);
    }

    #[test]
    fn fbm_cov_examples() {
        assert_eq!(fbm_cov(&hp(0.5, 0.0), 2.0, 3.0).unwrap(), 2.0);
        for h in [0.2, 0.5, 0.9] {
            assert_eq!(fbm_cov(&hp(h, 0.0), 1.0, 1.0).unwrap(), 1.0);
        }
        // 2^{0.4} to 20 digits, computed with mpmath.
        let v = fbm_cov(&hp(0.7, 0.0), 1.0, 2.0).unwrap();
        assert!((v - 1.319_507_910_772_894_3).abs() < 1e-14);
        assert!(fbm_cov(&hp(0.7, 0.0), -1.0, 1.0).is_err());
    }

    #[test]
    fn rl_cov_examples() {
        for e in [0.0, 0.1, 0.7] {
            assert!((rl_cov(&hp(0.5, e), 2.0, 3.0).unwrap() - 2.0).abs() < 1e-14);
            assert_eq!(rl_cov(&hp(0.7, e), 0.0, 2.0).unwrap(), 0.0);
        }
        // 1.1^{1.4} - 0.1^{1.4} to 20 digits (mpmath).
        let v = rl_cov(&hp(0.7, 0.1), 1.0, 1.0).unwrap();
        assert!((v - 1.102_935_413_024_143_4).abs() < 1e-10);
    }

    #[test]
    fn rl_diagonal_matches_closed_form_on_lattice() {
        let mut worst: f64 = 0.0;
        for h in [0.2, 0.35, 0.5, 0.65, 0.85] {
            for (e, t) in [(0.0, 1.0), (0.05, 0.3), (0.1, 1.0), (0.4, 2.5)] {
                let hh = hp(h, e);
                let q = rl_cov(&hh, t, t).unwrap();
                worst = worst.max((q - hh.variance_scale(t)).abs());
            }
        }
        assert!(worst <= 1e-8, "worst deviation {worst:e}");
    }

    #[test]
    fn l2_distance_shrinks_with_eps() {
        for h in [0.3, 0.7] {
            let d: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
                .iter()
                .map(|e| l2_distance_to_limit(&hp(h, *e), 1.0).unwrap())
                .collect();
            assert!(d.windows(2).all(|w| w[1] < w[0]), "H={h}: {d:?}");
            assert!(d.iter().all(|v| *v > 0.0));
        }
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.5, 1.0]).is_err());
        let g = TimeGrid::new(vec![0.0, 0.25, 0.5]).unwrap();
        assert_eq!(g.dt(), Some(0.25));
        assert_eq!(TimeGrid::new(vec![0.0, 0.2, 0.5]).unwrap().dt(), None);
        assert!(TimeGrid::uniform_to(1.0, 0.3).is_err());
        assert_eq!(TimeGrid::uniform_to(1.0, 0.25).unwrap().len(), 5);
    }

    #[test]
    fn only_origin_is_rejected() {
        let g = TimeGrid::new(vec![0.0]).unwrap();
        let c = RectMatrix::zeros(1, 1);
        let err = sample_fbm_matrix(&hp(0.5, 0.0), &g, 1, 1, &c, &mut PathRng::child(0, 0));
        assert!(matches!(err, Err(FwisError::Grid(_))));
    }

    #[test]
    fn incremental_requires_positive_eps_and_uniform_grid() {
        let g = TimeGrid::uniform(0.1, 4).unwrap();
        let c = RectMatrix::zeros(1, 1);
        let mut rng = PathRng::child(0, 0);
        let e = sample_rl_matrix(&hp(0.7, 0.0), &g, 1, 1, &c, &mut rng, RlScheme::Incremental);
        assert!(matches!(e, Err(FwisError::Contract(_))));
        let ng = TimeGrid::new(vec![0.0, 0.1, 0.3]).unwrap();
        let e = sample_rl_matrix(&hp(0.7, 0.1), &ng, 1, 1, &c, &mut rng, RlScheme::Incremental);
        assert!(matches!(e, Err(FwisError::Contract(_))));
    }

    #[test]
    fn schemes_coincide_for_brownian_case() {
        let g = TimeGrid::uniform(1.0 / 64.0, 64).unwrap();
        let c = RectMatrix::from_rows(&[vec![0.3, -0.2], vec![1.0, 0.0]]).unwrap();
        let h = hp(0.5, 0.1);
        let a = sample_rl_matrix(&h, &g, 2, 2, &c, &mut PathRng::child(4, 2), RlScheme::Exact).unwrap();
        let b = sample_rl_matrix(&h, &g, 2, 2, &c, &mut PathRng::child(4, 2), RlScheme::Incremental)
            .unwrap();
        let worst = a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst:e}");
    }

    #[test]
    fn incremental_scheme_variance_close_to_exact() {
        let h = hp(0.7, 0.1);
        let g = TimeGrid::uniform_to(1.0, 1.0 / 1024.0).unwrap();
        let v = IncrementalSampler::new(&h, &g).unwrap().terminal_variance();
        let exact = h.variance_scale(1.0);
        assert!(((v - exact) / exact).abs() < 0.02, "{v} vs {exact}");
    }

    #[test]
    fn same_stream_same_path() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0, 2.0]).unwrap();
        let c = RectMatrix::zeros(2, 3);
        let h = hp(0.3, 0.0);
        let a = sample_fbm_matrix(&h, &g, 2, 3, &c, &mut PathRng::child(1, 1)).unwrap();
        let b = sample_fbm_matrix(&h, &g, 2, 3, &c, &mut PathRng::child(1, 1)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rect_at(0), c);
    }

    #[test]
    fn start_shape_checked() {
        let g = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        let c = RectMatrix::zeros(2, 2);
        let e = sample_fbm_matrix(&hp(0.5, 0.0), &g, 3, 2, &c, &mut PathRng::child(0, 0));
        assert!(matches!(e, Err(FwisError::Contract(_))));
    }
}
