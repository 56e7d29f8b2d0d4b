//! Euler scheme for the stochastic characteristics of the general-index
//! process.
//!
//! Along `xi_t = x0 - t` the field `eta_t(x0)` solves
//!
//! `d eta = f(xi)(Omega Omega' + eta K + K' eta) dt + g(xi)(sqrt(eta) dW Q + Q' dW' sqrt(eta))`
//!
//! and the process is read as `u_t(eps) = eta_t(t + eps)`. Every member of
//! a family consumes the same `dW` at the same step.

use serde::{Deserialize, Serialize};

use super::blend::{blend_g, BlendCoeffs};
use crate::error::{FwisError, Result};
use crate::fbm::{HurstParams, MatrixPath, TimeGrid};
use crate::linalg::{default_floor, psd_project, sqrt_from_eigen, PsdMatrix, RectMatrix, SymMatrix};
use crate::rng::PathRng;

/// `eps-fWIS(H, p, Sigma_0, Omega, Q, K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SixRepr", into = "SixRepr")]
pub struct SixParamSpec {
    hurst: HurstParams,
    sigma0: PsdMatrix,
    omega: RectMatrix,
    q: RectMatrix,
    k: RectMatrix,
    omega_sq: SymMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SixRepr {
    hurst: f64,
    eps: f64,
    sigma0: PsdMatrix,
    omega: RectMatrix,
    q: RectMatrix,
    k: RectMatrix,
}

impl TryFrom<SixRepr> for SixParamSpec {
    type Error = FwisError;

    fn try_from(r: SixRepr) -> Result<Self> {
        SixParamSpec::new(HurstParams::new(r.hurst, r.eps)?, r.sigma0, r.omega, r.q, r.k)
    }
}

impl From<SixParamSpec> for SixRepr {
    fn from(s: SixParamSpec) -> Self {
        SixRepr {
            hurst: s.hurst.hurst(),
            eps: s.hurst.eps(),
            sigma0: s.sigma0,
            omega: s.omega,
            q: s.q,
            k: s.k,
        }
    }
}

impl SixParamSpec {
    /// Requires `0 < eps < 1`, `Sigma_0` positive definite, square `p x p`
    /// parameters and `Omega Omega' - (p + 1) Q'Q` positive semidefinite.
    pub fn new(hurst: HurstParams, sigma0: PsdMatrix, omega: RectMatrix, q: RectMatrix, k: RectMatrix) -> Result<Self> {
        let p = sigma0.dim();
        if !(hurst.eps() > 0.0 && hurst.eps() < 1.0) {
            return Err(FwisError::contract(format!("need 0 < eps < 1, got {}", hurst.eps())));
        }
        if !sigma0.is_pd() {
            return Err(FwisError::contract("Sigma_0 must be positive definite"));
        }
        for (name, m) in [("Omega", &omega), ("Q", &q), ("K", &k)] {
            if m.rows() != p || m.cols() != p {
                return Err(FwisError::contract(format!(
                    "{name} is {}x{}, expected {p}x{p}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let omega_sq = omega.transpose().gram();
        let qq = q.gram();
        let gap = omega_sq.sub(&qq.scale((p + 1) as f64))?;
        PsdMatrix::new(gap).map_err(|_| {
            FwisError::contract("Omega Omega' - (p + 1) Q'Q must be positive semidefinite")
        })?;
        Ok(Self {
            hurst,
            sigma0,
            omega,
            q,
            k,
            omega_sq,
        })
    }

    pub fn hurst(&self) -> &HurstParams {
        &self.hurst
    }

    pub fn p(&self) -> usize {
        self.sigma0.dim()
    }

    pub fn sigma0(&self) -> &PsdMatrix {
        &self.sigma0
    }

    pub fn omega(&self) -> &RectMatrix {
        &self.omega
    }

    pub fn q(&self) -> &RectMatrix {
        &self.q
    }

    pub fn k(&self) -> &RectMatrix {
        &self.k
    }

    /// `Omega Omega'`.
    pub fn omega_sq(&self) -> &SymMatrix {
        &self.omega_sq
    }
}

/// Real index `v >= p + 1`: the six-parameter process with `Q = I`, `K = 0`
/// and `Omega Omega' = v I`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneralRepr", into = "GeneralRepr")]
pub struct GeneralVSpec {
    hurst: HurstParams,
    v: f64,
    sigma0: PsdMatrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralRepr {
    hurst: f64,
    eps: f64,
    v: f64,
    sigma0: PsdMatrix,
}

impl From<GeneralVSpec> for GeneralRepr {
    fn from(s: GeneralVSpec) -> Self {
        GeneralRepr {
            hurst: s.hurst.hurst(),
            eps: s.hurst.eps(),
            v: s.v,
            sigma0: s.sigma0,
        }
    }
}

impl TryFrom<GeneralRepr> for GeneralVSpec {
    type Error = FwisError;

    fn try_from(r: GeneralRepr) -> Result<Self> {
        GeneralVSpec::new(HurstParams::new(r.hurst, r.eps)?, r.v, r.sigma0)
    }
}

impl GeneralVSpec {
    pub fn new(hurst: HurstParams, v: f64, sigma0: PsdMatrix) -> Result<Self> {
        let p = sigma0.dim();
        if !(v >= (p + 1) as f64 && v.is_finite()) {
            return Err(FwisError::contract(format!("index v = {v} must be >= p + 1 = {}", p + 1)));
        }
        if !(hurst.eps() > 0.0 && hurst.eps() < 1.0) {
            return Err(FwisError::contract(format!("need 0 < eps < 1, got {}", hurst.eps())));
        }
        if !sigma0.is_pd() {
            return Err(FwisError::contract("Sigma_0 must be positive definite"));
        }
        Ok(Self { hurst, v, sigma0 })
    }

    pub fn hurst(&self) -> &HurstParams {
        &self.hurst
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn p(&self) -> usize {
        self.sigma0.dim()
    }

    pub fn sigma0(&self) -> &PsdMatrix {
        &self.sigma0
    }

    pub fn to_six(&self) -> SixParamSpec {
        let p = self.p();
        SixParamSpec::new(
            self.hurst,
            self.sigma0.clone(),
            RectMatrix::identity(p).scale(self.v.sqrt()),
            RectMatrix::identity(p),
            RectMatrix::zeros(p, p),
        )
        .expect("v >= p + 1 implies the six-parameter condition")
    }
}

impl From<&GeneralVSpec> for SixParamSpec {
    fn from(s: &GeneralVSpec) -> Self {
        s.to_six()
    }
}

/// How often the eigenvalue floor had to be applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    /// Member-steps taken.
    pub steps: u64,
    /// Member-steps where an eigenvalue was raised to the floor.
    pub clamped: u64,
}

impl ProjectionReport {
    /// Runs with more than this fraction of clamped steps are flagged.
    pub const FLAG_RATE: f64 = 0.01;

    pub fn rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.clamped as f64 / self.steps as f64
        }
    }

    pub fn flagged(&self) -> bool {
        self.rate() > Self::FLAG_RATE
    }

    pub fn merge(&mut self, other: &ProjectionReport) {
        self.steps += other.steps;
        self.clamped += other.clamped;
    }
}

/// Spec, blend functions and step size, prepared once per run.
#[derive(Clone, Debug)]
pub struct CharacteristicScheme {
    spec: SixParamSpec,
    blend: BlendCoeffs,
    dt: f64,
}

impl CharacteristicScheme {
    pub fn new(spec: &SixParamSpec, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FwisError::Grid(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            spec: spec.clone(),
            blend: BlendCoeffs::new(&spec.hurst)?,
            dt,
        })
    }

    pub fn spec(&self) -> &SixParamSpec {
        &self.spec
    }

    pub fn blend(&self) -> &BlendCoeffs {
        &self.blend
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Brownian matrix increment over one step, filled row-major.
    pub fn draw_dw(&self, rng: &mut PathRng) -> RectMatrix {
        let p = self.spec.p();
        let sd = self.dt.sqrt();
        RectMatrix::from_fn(p, p, |_, _| sd * rng.normal())
    }

    /// Family of characteristics started at `x0` with `eta_0 = Sigma_0`.
    /// Member `i` stops after `stops[i]` steps.
    pub fn family(&self, x0: &[f64], stops: &[usize], path_index: u64) -> Result<Family<'_>> {
        if x0.len() != stops.len() {
            return Err(FwisError::contract("one stop count per starting point is required"));
        }
        if let Some(x) = x0.iter().find(|x| !x.is_finite()) {
            return Err(FwisError::contract(format!("starting point {x} is not finite")));
        }
        let root = PsdMatrix::new(self.spec.sigma0.as_sym().clone())
            .and_then(|s| crate::linalg::sym_sqrt(&s))?
            .into_sym();
        let n = x0.len();
        Ok(Family {
            scheme: self,
            x0: x0.to_vec(),
            stops: stops.to_vec(),
            eta: vec![self.spec.sigma0.as_sym().clone(); n],
            root: vec![root; n],
            step: 0,
            report: ProjectionReport::default(),
            path_index,
        })
    }
}

/// Characteristics advanced together under shared noise.
#[derive(Clone, Debug)]
pub struct Family<'a> {
    scheme: &'a CharacteristicScheme,
    x0: Vec<f64>,
    stops: Vec<usize>,
    eta: Vec<SymMatrix>,
    root: Vec<SymMatrix>,
    step: usize,
    report: ProjectionReport,
    path_index: u64,
}

impl Family<'_> {
    /// Steps taken so far.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn eta(&self, i: usize) -> &SymMatrix {
        &self.eta[i]
    }

    /// `sqrt(eta)` of member `i`, kept from the last projection.
    pub fn root(&self, i: usize) -> &SymMatrix {
        &self.root[i]
    }

    pub fn report(&self) -> ProjectionReport {
        self.report
    }

    /// Advances every member that has not reached its stop by one step
    /// driven by `dw`.
    pub fn advance(&mut self, dw: &RectMatrix) -> Result<()> {
        let s = self.scheme;
        let spec = &s.spec;
        let p = spec.p();
        let dt = s.dt;
        let t = self.step as f64 * dt;
        // dW Q is shared by every member.
        let dwq = dw.matmul(&spec.q)?;
        for i in 0..self.x0.len() {
            if self.step >= self.stops[i] {
                continue;
            }
            let xi = self.x0[i] - t;
            let g = blend_g(xi, &s.blend);
            let f = g * g;
            let eta = &self.eta[i];
            let root = &self.root[i];
            let mut ek = vec![0.0; p * p];
            let mut m = vec![0.0; p * p];
            for r in 0..p {
                for c in 0..p {
                    let mut a = 0.0;
                    let mut b = 0.0;
                    for l in 0..p {
                        a += eta.get(r, l) * spec.k.get(l, c);
                        b += root.get(r, l) * dwq.get(l, c);
                    }
                    ek[r * p + c] = a;
                    m[r * p + c] = b;
                }
            }
            let cand = SymMatrix::from_fn(p, |r, c| {
                let drift = spec.omega_sq.get(r, c) + (ek[r * p + c] + ek[c * p + r]);
                let diff = m[r * p + c] + m[c * p + r];
                eta.get(r, c) + f * drift * dt + g * diff
            });
            let proj = psd_project(&cand, default_floor(&cand)).map_err(|e| FwisError::PathFailure {
                path_index: self.path_index,
                step: self.step,
                message: format!("characteristic x0 = {} at xi = {xi}: {e}; state {cand:?}", self.x0[i]),
            })?;
            self.report.steps += 1;
            if proj.clamped {
                self.report.clamped += 1;
            }
            self.root[i] = sqrt_from_eigen(&proj.eigen).into_sym();
            self.eta[i] = proj.matrix.into_sym();
        }
        self.step += 1;
        Ok(())
    }
}

/// Paths of `eta(x0)` for every starting point, plus projection counts.
#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicFamily {
    pub x0: Vec<f64>,
    /// `xi` at each grid time is `x0 - t`.
    pub eta: Vec<MatrixPath>,
    pub report: ProjectionReport,
}

/// Runs one family over the whole uniform `grid`.
pub fn simulate_characteristic(
    spec: &SixParamSpec,
    x0: &[f64],
    grid: &TimeGrid,
    rng: &mut PathRng,
) -> Result<CharacteristicFamily> {
    let dt = grid
        .dt()
        .ok_or_else(|| FwisError::Grid("the characteristic scheme needs a uniform grid".into()))?;
    let scheme = CharacteristicScheme::new(spec, dt)?;
    let steps = grid.len() - 1;
    let lineage = rng.lineage();
    let mut fam = scheme.family(x0, &vec![steps; x0.len()], lineage.path_index)?;
    let mut states: Vec<Vec<SymMatrix>> = (0..x0.len()).map(|i| vec![fam.eta(i).clone()]).collect();
    for _ in 0..steps {
        let dw = scheme.draw_dw(rng);
        fam.advance(&dw)?;
        for (i, s) in states.iter_mut().enumerate() {
            s.push(fam.eta(i).clone());
        }
    }
    let eta = states
        .iter()
        .map(|s| Ok(MatrixPath::from_sym(grid.clone(), s)?.with_id(lineage.path_index, Some(lineage))))
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacteristicFamily {
        x0: x0.to_vec(),
        eta,
        report: fam.report(),
    })
}

/// Observed path of `u_t(eps)` and the projection counts behind it.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralPath {
    pub path: MatrixPath,
    pub report: ProjectionReport,
}

fn observation_steps(grid: &TimeGrid, obs: &TimeGrid) -> Result<Vec<usize>> {
    obs.times()
        .iter()
        .map(|&t| {
            grid.index_of(t)
                .ok_or_else(|| FwisError::Grid(format!("observation time {t} is not on the simulation grid")))
        })
        .collect()
}

/// `u_t(eps) = eta_t(t + eps)` at every time of `obs`, a subset of the
/// uniform simulation `grid`. One characteristic per observation time, all
/// sharing the same noise.
pub fn eps_fwis_general(
    spec: &SixParamSpec,
    grid: &TimeGrid,
    obs: &TimeGrid,
    rng: &mut PathRng,
) -> Result<GeneralPath> {
    let dt = grid
        .dt()
        .ok_or_else(|| FwisError::Grid("the characteristic scheme needs a uniform grid".into()))?;
    let scheme = CharacteristicScheme::new(spec, dt)?;
    let stops = observation_steps(grid, obs)?;
    let eps = spec.hurst.eps();
    let x0: Vec<f64> = stops.iter().map(|&k| grid.times()[k] + eps).collect();
    let lineage = rng.lineage();
    let mut fam = scheme.family(&x0, &stops, lineage.path_index)?;
    let last = stops.iter().copied().max().unwrap_or(0);
    for _ in 0..last {
        let dw = scheme.draw_dw(rng);
        fam.advance(&dw)?;
    }
    let mats: Vec<SymMatrix> = (0..x0.len()).map(|i| fam.eta(i).clone()).collect();
    Ok(GeneralPath {
        path: MatrixPath::from_sym(obs.clone(), &mats)?.with_id(lineage.path_index, Some(lineage)),
        report: fam.report(),
    })
}

/// `u_T(eps)` after `steps` steps, with its projection counts.
pub fn terminal_u(scheme: &CharacteristicScheme, steps: usize, rng: &mut PathRng) -> Result<(SymMatrix, ProjectionReport)> {
    let x0 = steps as f64 * scheme.dt + scheme.spec.hurst.eps();
    let mut fam = scheme.family(&[x0], &[steps], rng.lineage().path_index)?;
    for _ in 0..steps {
        let dw = scheme.draw_dw(rng);
        fam.advance(&dw)?;
    }
    Ok((fam.eta(0).clone(), fam.report()))
}

/// `u_T(eps)` on `levels` nested grids. Level 0 uses `fine_steps` steps of
/// size `horizon / fine_steps`; level `l` merges `2^l` fine increments into
/// one, so all levels see the same Brownian path. Returns one matrix per
/// level, finest first.
pub fn terminal_u_coupled(
    spec: &SixParamSpec,
    horizon: f64,
    fine_steps: usize,
    levels: usize,
    rng: &mut PathRng,
) -> Result<Vec<SymMatrix>> {
    if levels == 0 || fine_steps % (1 << (levels - 1)) != 0 {
        return Err(FwisError::contract("fine step count must be divisible by 2^(levels - 1)"));
    }
    let p = spec.p();
    let fine_dt = horizon / fine_steps as f64;
    let schemes: Vec<CharacteristicScheme> = (0..levels)
        .map(|l| CharacteristicScheme::new(spec, fine_dt * (1 << l) as f64))
        .collect::<Result<_>>()?;
    let x0 = horizon + spec.hurst.eps();
    let index = rng.lineage().path_index;
    let mut fams: Vec<Family<'_>> = schemes
        .iter()
        .enumerate()
        .map(|(l, s)| s.family(&[x0], &[fine_steps >> l], index))
        .collect::<Result<_>>()?;
    let mut acc: Vec<RectMatrix> = vec![RectMatrix::zeros(p, p); levels];
    let sd = fine_dt.sqrt();
    for k in 0..fine_steps {
        let dw = RectMatrix::from_fn(p, p, |_, _| sd * rng.normal());
        for l in 0..levels {
            acc[l] = acc[l].add(&dw)?;
            if (k + 1) % (1 << l) == 0 {
                fams[l].advance(&acc[l])?;
                acc[l] = RectMatrix::zeros(p, p);
            }
        }
    }
    Ok(fams.iter().map(|f| f.eta(0).clone()).collect())
}

/// Pathwise size of the past-dependent part of an increment.
#[derive(Clone, Debug, Serialize)]
pub struct IncrementReport {
    pub t: f64,
    pub dt_obs: f64,
    pub n_paths: usize,
    /// Fraction of paths where `|eta_t(t + dt_obs + eps) - eta_t(t + eps)| > 0`.
    pub positive_fraction: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
}

/// Frobenius norm of `eta_t(t + dt_obs + eps) - eta_t(t + eps)` on one path:
/// the part of `u_{t + dt_obs}(eps) - u_t(eps)` fixed by noise up to `t`.
pub fn past_dependent_term(
    scheme: &CharacteristicScheme,
    t_steps: usize,
    dt_obs: f64,
    rng: &mut PathRng,
) -> Result<f64> {
    let eps = scheme.spec.hurst.eps();
    let t = t_steps as f64 * scheme.dt;
    let x0 = [t + eps, t + dt_obs + eps];
    let mut fam = scheme.family(&x0, &[t_steps, t_steps], rng.lineage().path_index)?;
    for _ in 0..t_steps {
        let dw = scheme.draw_dw(rng);
        fam.advance(&dw)?;
    }
    Ok(fam.eta(1).sub(fam.eta(0))?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wishart::wishart_mean;

    fn general(h: f64, e: f64, v: f64, s0: f64) -> GeneralVSpec {
        GeneralVSpec::new(
            HurstParams::new(h, e).unwrap(),
            v,
            PsdMatrix::new(SymMatrix::from_diag(&[s0])).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_small_index() {
        let s0 = PsdMatrix::identity(2);
        assert!(GeneralVSpec::new(HurstParams::new(0.7, 0.1).unwrap(), 2.5, s0).is_err());
    }

    #[test]
    fn six_param_condition() {
        let h = HurstParams::new(0.7, 0.1).unwrap();
        let s0 = PsdMatrix::identity(1);
        let one = RectMatrix::identity(1);
        assert!(SixParamSpec::new(h, s0.clone(), one.clone(), one.clone(), one.clone()).is_err());
        let om = one.scale(2f64.sqrt());
        assert!(SixParamSpec::new(h, s0, om, one.clone(), one).is_ok());
    }

    #[test]
    fn no_dynamics_keeps_initial_state() {
        let h = HurstParams::new(0.7, 0.1).unwrap();
        let s0 = PsdMatrix::new(SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 0.5]]).unwrap()).unwrap();
        let z = RectMatrix::zeros(2, 2);
        let spec = SixParamSpec::new(h, s0.clone(), z.clone(), z.clone(), z).unwrap();
        let grid = TimeGrid::uniform(1.0 / 64.0, 32).unwrap();
        let fam = simulate_characteristic(&spec, &[0.6, 0.8], &grid, &mut PathRng::child(3, 0)).unwrap();
        for path in &fam.eta {
            assert_eq!(&path.terminal_sym().unwrap(), s0.as_sym());
        }
    }

    #[test]
    fn brownian_case_does_not_depend_on_x() {
        let spec = general(0.5, 0.1, 3.0, 0.5).to_six();
        let grid = TimeGrid::uniform(1.0 / 128.0, 64).unwrap();
        let x0 = [0.6, 0.75, 0.9, 1.0];
        let fam = simulate_characteristic(&spec, &x0, &grid, &mut PathRng::child(4, 0)).unwrap();
        for path in &fam.eta[1..] {
            assert_eq!(path.values, fam.eta[0].values);
        }
    }

    #[test]
    fn permuting_starting_points_keeps_trajectories() {
        let spec = general(0.7, 0.1, 3.5, 0.5).to_six();
        let grid = TimeGrid::uniform(1.0 / 128.0, 64).unwrap();
        let a = simulate_characteristic(&spec, &[0.6, 0.9], &grid, &mut PathRng::child(4, 1)).unwrap();
        let b = simulate_characteristic(&spec, &[0.9, 0.6], &grid, &mut PathRng::child(4, 1)).unwrap();
        assert_eq!(a.eta[0].values, b.eta[1].values);
        assert_eq!(a.eta[1].values, b.eta[0].values);
        assert_ne!(a.eta[0].values, a.eta[1].values);
    }

    #[test]
    fn observed_path_matches_terminal_runs() {
        let spec = general(0.7, 0.1, 3.5, 0.5).to_six();
        let grid = TimeGrid::uniform(1.0 / 64.0, 16).unwrap();
        let obs = TimeGrid::new(vec![0.0, 0.125, 0.25]).unwrap();
        let path = eps_fwis_general(&spec, &grid, &obs, &mut PathRng::child(8, 2)).unwrap();
        assert_eq!(&path.path.sym_at(0).unwrap(), spec.sigma0().as_sym());
        let scheme = CharacteristicScheme::new(&spec, 1.0 / 64.0).unwrap();
        let (u, _) = terminal_u(&scheme, 16, &mut PathRng::child(8, 2)).unwrap();
        assert_eq!(path.path.sym_at(2).unwrap(), u);
    }

    #[test]
    fn scalar_mean_follows_drift() {
        use crate::harness::mc::{run_mc, McConfig};
        let g = general(0.7, 0.1, 2.0, 0.04);
        let scheme = CharacteristicScheme::new(&g.to_six(), 1.0 / 64.0).unwrap();
        let cfg = McConfig {
            n_paths: 4000,
            master_seed: 5,
            ..McConfig::default()
        };
        let e = run_mc(&cfg, |rng| Ok(terminal_u(&scheme, 32, rng)?.0.get(0, 0))).unwrap();
        let c = g.hurst().variance_scale(0.5);
        let want = wishart_mean(c, 2.0, g.sigma0()).get(0, 0);
        assert!((e.mean - want).abs() <= 3.0 * e.std_error + 0.02 * want, "{e:?} vs {want}");
    }

    #[test]
    fn coupled_finest_level_matches_plain_run() {
        let spec = general(0.7, 0.1, 3.5, 0.5).to_six();
        let levels = terminal_u_coupled(&spec, 0.25, 16, 3, &mut PathRng::child(1, 9)).unwrap();
        let scheme = CharacteristicScheme::new(&spec, 0.25 / 16.0).unwrap();
        let (u, _) = terminal_u(&scheme, 16, &mut PathRng::child(1, 9)).unwrap();
        assert_eq!(levels[0], u);
        assert_eq!(levels.len(), 3);
    }

    #[test]
    fn past_dependence() {
        let grid_dt = 1.0 / 128.0;
        let half = CharacteristicScheme::new(&general(0.5, 0.1, 2.0, 0.04).to_six(), grid_dt).unwrap();
        let frac = CharacteristicScheme::new(&general(0.7, 0.1, 2.0, 0.04).to_six(), grid_dt).unwrap();
        let mut rng = PathRng::child(2, 2);
        assert_eq!(past_dependent_term(&half, 32, grid_dt, &mut rng).unwrap(), 0.0);
        assert!(past_dependent_term(&frac, 32, grid_dt, &mut rng).unwrap() > 0.0);
        assert_eq!(past_dependent_term(&frac, 32, 0.0, &mut rng).unwrap(), 0.0);
    }
}
