//! Named validation suites. Each compares simulated or integrated
//! quantities with closed forms and returns a manifest with one record per
//! comparison. Model parameters are fixed per suite; path counts, seed,
//! step and threads come from the run configuration.

use super::config::RunConfig;
use super::estimators::{covariance, delta_method, mean_and_se};
use super::manifest::{CheckRecord, RunManifest};
use super::mc::{collect_paths, run_mc};
use crate::error::{FwisError, Result};
use crate::fbm::{fbm_cov, l2_distance_to_limit, ExactSampler, HurstParams, KernelLaw, TimeGrid};
use crate::linalg::{sym_sqrt, PsdMatrix, RectMatrix, SymMatrix};
use crate::spde::{
    increment_decomposition_report, riccati_transform, simulate_characteristic, smoothness_checks, terminal_u,
    terminal_u_coupled, BlendCoeffs, CharacteristicScheme, GeneralVSpec, ProjectionReport,
};
use crate::volmodel::{
    correlation_report, heston_degenerate, heston_spec, price_variance_forward, ForwardContract, VolModelSpec,
    VolSpec,
};
use crate::wishart::{additivity_check, mc_laplace, wishart_laplace, FwisSpec, LaplaceQuery};

/// Suite names with a one-line description each.
pub const SUITES: [(&str, &str); 11] = [
    ("laplace-fwis", "fWIS Laplace transform against the noncentral Wishart closed form"),
    ("laplace-eps-int", "integer-index eps-fWIS Laplace transform against its closed form"),
    ("laplace-eps-general", "real-index eps-fWIS Laplace transform and weak order of the characteristic scheme"),
    ("additivity", "sum of independent fWIS processes against the summed-index closed form"),
    ("blend", "boundary residuals and C4 continuity of the blend functions"),
    ("heston", "H = 1/2: x-invariance of characteristics and the CIR mean"),
    ("forward", "variance forward value against Monte Carlo"),
    ("correlations", "return, leverage and vol-vol correlations of the volatility model"),
    ("serial", "serial covariance of scalar fWIS and its Brownian degeneration"),
    ("eps-convergence", "closed-form and L2 convergence as eps decreases"),
    ("riccati", "Riccati-integrated transform against the closed form"),
];

/// Runs the suite called `name`.
pub fn validate_suite(name: &str, cfg: &RunConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let mut m = RunManifest::new(name, "validate", cfg);
    match name {
        "laplace-fwis" => laplace_fwis(cfg, &mut m)?,
        "laplace-eps-int" => laplace_eps_int(cfg, &mut m)?,
        "laplace-eps-general" => laplace_eps_general(cfg, &mut m)?,
        "additivity" => additivity(cfg, &mut m)?,
        "blend" => blend(&mut m)?,
        "heston" => heston(cfg, &mut m)?,
        "forward" => forward(cfg, &mut m)?,
        "correlations" => correlations(cfg, &mut m)?,
        "serial" => serial(cfg, &mut m)?,
        "eps-convergence" => eps_convergence(&mut m)?,
        "riccati" => riccati(&mut m)?,
        other => {
            let known: Vec<&str> = SUITES.iter().map(|s| s.0).collect();
            return Err(FwisError::Config(format!(
                "unknown suite {other:?}; expected one of {}",
                known.join(", ")
            )));
        }
    }
    Ok(m.finish())
}

fn sym(rows: &[[f64; 2]; 2]) -> SymMatrix {
    SymMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("2 x 2 symmetric literal")
}

fn psd(rows: &[[f64; 2]; 2]) -> PsdMatrix {
    PsdMatrix::new(sym(rows)).expect("positive semidefinite literal")
}

/// `Z = I / 2` at `t = 1`.
fn half_identity_query() -> Result<LaplaceQuery> {
    LaplaceQuery::new(SymMatrix::identity(2).scale(0.5), 1.0)
}

fn note_projection(m: &mut RunManifest, label: &str, r: &ProjectionReport) {
    let flag = if r.flagged() { " (flagged)" } else { "" };
    m.notes.push(format!(
        "{label}: eigenvalue floor applied in {} of {} member-steps{flag}",
        r.clamped, r.steps
    ));
}

fn laplace_fwis(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let q = half_identity_query()?;
    for h in [0.3, 0.5, 0.7] {
        let spec = FwisSpec::from_sigma0(HurstParams::fbm(h)?, 3, &PsdMatrix::identity(2))?;
        let est = mc_laplace(&spec, &q, &cfg.mc)?;
        let cf = spec.laplace(&q)?;
        m.push(CheckRecord::std_errors(format!("laplace-fwis[H={h}]"), est.mean, est.std_error, cf, 3.0, 0.0));
    }
    Ok(())
}

fn laplace_eps_int(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let q = half_identity_query()?;
    for h in [0.3, 0.5, 0.7] {
        for eps in [0.1, 0.2] {
            let spec = FwisSpec::from_sigma0(HurstParams::new(h, eps)?, 3, &PsdMatrix::identity(2))?;
            let est = mc_laplace(&spec, &q, &cfg.mc)?;
            let cf = spec.laplace(&q)?;
            m.push(CheckRecord::std_errors(
                format!("laplace-eps-int[H={h},eps={eps}]"),
                est.mean,
                est.std_error,
                cf,
                3.0,
                0.0,
            ));
        }
    }
    Ok(())
}

/// Bounds on `(E_4dt - E_2dt) / (E_2dt - E_dt)` for a first-order scheme.
pub const WEAK_RATIO_BAND: (f64, f64) = (1.4, 2.6);

fn laplace_eps_general(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let spec = GeneralVSpec::new(HurstParams::new(0.7, 0.1)?, 3.5, PsdMatrix::identity(2))?;
    let six = spec.to_six();
    let q = half_identity_query()?;
    let z = q.z.as_sym();
    let steps = (q.t / cfg.mc.dt).round() as usize;
    if steps % 4 != 0 || (steps as f64 * cfg.mc.dt - q.t).abs() > 1e-12 {
        return Err(FwisError::Config(format!(
            "dt = {} must divide t = 1 into a multiple of 4 steps",
            cfg.mc.dt
        )));
    }
    let n = cfg.mc.n_paths;
    let total = n.max(cfg.weak_order_paths.unwrap_or(n));
    // One coupled run: level 0 at dt gives the transform, levels 1 and 2 at
    // 2dt and 4dt share its Brownian increments.
    let rows: Vec<Vec<f64>> = collect_paths(&cfg.mc.with_paths(total), |rng| {
        terminal_u_coupled(&six, q.t, steps, 3, rng)?
            .iter()
            .map(|u| Ok((-z.trace_product(u)?).exp()))
            .collect()
    })?;
    let fine: Vec<f64> = rows[..n].iter().map(|r| r[0]).collect();
    let (mean, se) = mean_and_se(&fine);
    let cf = wishart_laplace(&q.z, spec.hurst().variance_scale(q.t), spec.v(), spec.sigma0())?;
    m.push(CheckRecord::std_errors_or_relative("laplace-eps-general", mean, se, cf, 3.0, 0.01));

    let ratio = delta_method(&rows, |e| (e[2] - e[1]) / (e[1] - e[0]));
    let (lo, hi) = WEAK_RATIO_BAND;
    m.push(CheckRecord::band("weak-order-ratio", ratio.value, Some(ratio.std_error), lo, hi));
    for (l, name) in [(1, "bias-step[2dt-dt]"), (2, "bias-step[4dt-2dt]")] {
        let d = delta_method(&rows, |e| e[l] - e[l - 1]);
        m.notes.push(format!("{name} = {:.6e} +- {:.2e} over {total} paths", d.value, d.std_error));
    }
    Ok(())
}

fn additivity(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let h = HurstParams::fbm(0.7)?;
    let a = FwisSpec::from_sigma0(h, 2, &PsdMatrix::identity(2))?;
    let b = FwisSpec::from_sigma0(h, 3, &psd(&[[0.5, 0.1], [0.1, 0.3]]))?;
    let r = additivity_check(&a, &b, &half_identity_query()?, &cfg.mc)?;
    m.push(CheckRecord::std_errors(
        "additivity[n=2,m=3]",
        r.estimate.mean,
        r.estimate.std_error,
        r.closed_form,
        3.0,
        0.0,
    ));
    Ok(())
}

/// Residual bound for the blend systems, relative to the size of each equation.
pub const BLEND_RESIDUAL_TOL: f64 = 1e-9;
/// Bound on the relative jump of the first four derivatives at the knots.
pub const BLEND_C4_TOL: f64 = 1e-5;
/// Finite-difference step, relative to the adjacent ramp width.
pub const BLEND_FD_STEP: f64 = 1e-3;

fn blend(m: &mut RunManifest) -> Result<()> {
    for h in [0.3, 0.5, 0.7] {
        for eps in [0.05, 0.1, 0.3] {
            let c = BlendCoeffs::new(&HurstParams::new(h, eps)?)?;
            let res = c.residuals().iter().fold(0.0_f64, |a, r| a.max(r.abs()));
            m.push(CheckRecord::below(format!("blend-residual[H={h},eps={eps}]"), res, BLEND_RESIDUAL_TOL));
            let jump = smoothness_checks(&c, BLEND_FD_STEP)
                .iter()
                .fold(0.0_f64, |a, k| a.max(k.rel_error));
            m.push(CheckRecord::below(format!("blend-c4[H={h},eps={eps}]"), jump, BLEND_C4_TOL));
        }
    }
    Ok(())
}

/// Pathwise agreement required of characteristics started at different `x0`.
pub const X_INVARIANCE_TOL: f64 = 1e-12;

fn heston(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    // x-invariance: with H = 1/2 the coefficients are constant while the
    // characteristic stays in [eps, 1].
    let eps = 0.1;
    let horizon = 0.5;
    let general = GeneralVSpec::new(HurstParams::new(0.5, eps)?, 3.5, PsdMatrix::identity(2))?;
    let six = general.to_six();
    let grid = TimeGrid::uniform_to(horizon, cfg.mc.dt)?;
    let x0 = [0.6, 0.7, 0.8, 0.9, 1.0];
    let few = cfg.mc.with_paths(cfg.mc.n_paths.min(64));
    let spread = collect_paths(&few, |rng| {
        let fam = simulate_characteristic(&six, &x0, &grid, rng)?;
        let first = &fam.eta[0].values;
        Ok(fam.eta[1..]
            .iter()
            .flat_map(|p| p.values.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max))
    })?;
    let worst = spread.iter().copied().fold(0.0_f64, f64::max);
    m.push(CheckRecord::absolute("x-invariance", worst, 0.0, X_INVARIANCE_TOL));

    // CIR mean of the scalar Brownian case.
    let (v, q, k, u0) = (2.0, 0.3, -1.0, 0.04);
    let spec = heston_spec(v, q, k, u0, 0.05)?;
    let scheme = CharacteristicScheme::new(&spec, cfg.mc.dt)?;
    let steps = (1.0 / cfg.mc.dt).round() as usize;
    let est = run_mc(&cfg.mc, |rng| Ok(terminal_u(&scheme, steps, rng)?.0.get(0, 0)))?;
    let cir = heston_degenerate(v, q, k)?.cir_mean(u0, 1.0);
    m.push(CheckRecord::std_errors(
        "heston-cir-mean",
        est.mean,
        est.std_error,
        cir,
        3.0,
        cfg.mc.dt * cir.abs(),
    ));
    Ok(())
}

fn forward(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let (spec, contract, r) = match &cfg.forward {
        Some(f) => (f.spec.clone(), f.contract, f.r),
        None => (
            GeneralVSpec::new(
                HurstParams::new(0.7, 0.1)?,
                3.5,
                PsdMatrix::new(SymMatrix::from_diag(&[0.04]))?,
            )?,
            ForwardContract::new(1.0, 1.0)?,
            0.05,
        ),
    };
    let price = price_variance_forward(&contract, &spec, r)?;
    let scheme = CharacteristicScheme::new(&spec.to_six(), cfg.mc.dt)?;
    let steps = (contract.delivery / cfg.mc.dt).round() as usize;
    if (steps as f64 * cfg.mc.dt - contract.delivery).abs() > 1e-9 * contract.delivery {
        return Err(FwisError::Config("delivery must be a multiple of dt".into()));
    }
    let disc = (-r * contract.delivery).exp();
    let est = run_mc(&cfg.mc, |rng| Ok(disc * (terminal_u(&scheme, steps, rng)?.0.get(0, 0) - contract.iota)))?;
    m.push(CheckRecord::std_errors(
        "forward-value",
        est.mean,
        est.std_error,
        price.value,
        3.0,
        cfg.mc.dt * price.value.abs(),
    ));
    Ok(())
}

/// The two-asset model used by the correlation suite.
pub fn correlation_model() -> Result<VolModelSpec> {
    let q = RectMatrix::from_rows(&[vec![0.3, 0.1], vec![0.0, 0.25]])?;
    let omega = sym_sqrt(&PsdMatrix::new(q.gram().scale(4.0))?)?.to_rect();
    let six = crate::spde::SixParamSpec::new(
        HurstParams::new(0.7, 0.1)?,
        psd(&[[0.04, 0.01], [0.01, 0.09]]),
        omega,
        q,
        RectMatrix::identity(2).scale(-0.5),
    )?;
    VolModelSpec::new(vec![0.05, 0.03], vec![-0.5, 0.3], vec![100.0, 50.0], 0.0, VolSpec::Six(six))
}

fn correlations(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let spec = correlation_model()?;
    for t in [0.5, 0.25] {
        let rep = correlation_report(&spec, t, &cfg.mc)?;
        for c in &rep.checks {
            // The second time only adds the time-constant leverage check.
            if t != 0.5 && !c.name.starts_with("leverage") {
                continue;
            }
            m.push(CheckRecord::std_errors(
                format!("{}@t={t}", c.name),
                c.estimate,
                c.std_error,
                c.reference,
                4.0,
                0.0,
            ));
        }
        note_projection(m, &format!("t={t}"), &rep.report);
    }
    Ok(())
}

fn serial(cfg: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let grid = TimeGrid::new(vec![0.0, 1.0, 2.0])?;
    let zero = RectMatrix::zeros(1, 1);
    for (h, name) in [(0.7, "serial-cov[H=0.7]"), (0.5, "increment-past-cov[H=0.5]")] {
        let hp = HurstParams::fbm(h)?;
        let sampler = ExactSampler::new(&hp, &grid, KernelLaw::Fbm)?;
        let pairs = collect_paths(&cfg.mc, |rng| {
            let b = sampler.sample(&zero, rng);
            Ok((b.entry(1, 0, 0).powi(2), b.entry(2, 0, 0).powi(2)))
        })?;
        let s1: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let s2: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (est, reference) = if h == 0.5 {
            let inc: Vec<f64> = pairs.iter().map(|p| p.1 - p.0).collect();
            (covariance(&inc, &s1), 0.0)
        } else {
            (covariance(&s2, &s1), 2.0 * fbm_cov(&hp, 2.0, 1.0)?.powi(2))
        };
        m.push(CheckRecord::std_errors(name, est.value, est.std_error, reference, 4.0, 0.0));
    }

    // Past-dependent part of the increment of the general-index process.
    let few = cfg.mc.with_paths(cfg.mc.n_paths.min(1000)).with_dt(1.0 / 256.0);
    for h in [0.7, 0.5] {
        let six = GeneralVSpec::new(HurstParams::new(h, 0.1)?, 3.5, PsdMatrix::identity(2))?.to_six();
        let rep = increment_decomposition_report(&six, 0.5, 1.0 / 256.0, &few)?;
        if h == 0.5 {
            m.push(CheckRecord::absolute("past-term[H=0.5]", rep.max_abs, 0.0, X_INVARIANCE_TOL));
        } else {
            m.push(CheckRecord::below("past-term-zero-fraction[H=0.7]", 1.0 - rep.positive_fraction, 0.5));
        }
    }
    Ok(())
}

fn eps_convergence(m: &mut RunManifest) -> Result<()> {
    let q = half_identity_query()?;
    let epss = [0.4, 0.2, 0.1, 0.05];
    for h in [0.3, 0.7] {
        let limit = FwisSpec::from_sigma0(HurstParams::fbm(h)?, 3, &PsdMatrix::identity(2))?.laplace(&q)?;
        let mut gaps = Vec::new();
        let mut l2 = Vec::new();
        for eps in epss {
            let hp = HurstParams::new(h, eps)?;
            let spec = FwisSpec::from_sigma0(hp, 3, &PsdMatrix::identity(2))?;
            gaps.push((spec.laplace(&q)? - limit).abs());
            l2.push(l2_distance_to_limit(&hp, q.t)?);
        }
        for k in 1..epss.len() {
            let tag = format!("H={h},eps={}<{}", epss[k], epss[k - 1]);
            m.push(CheckRecord::below(format!("transform-gap[{tag}]"), gaps[k], gaps[k - 1]));
            m.push(CheckRecord::below(format!("l2-distance[{tag}]"), l2[k], l2[k - 1]));
        }
    }
    Ok(())
}

/// Relative agreement required between the Riccati solution and the closed form.
pub const RICCATI_TOL: f64 = 1e-6;

fn riccati(m: &mut RunManifest) -> Result<()> {
    let z = psd(&[[0.5, 0.1], [0.1, 0.3]]);
    let s0 = psd(&[[1.0, 0.2], [0.2, 0.6]]);
    for v in [3.0, 3.5, 5.0] {
        for t in [0.25, 0.5, 0.9] {
            let spec = GeneralVSpec::new(HurstParams::new(0.7, 0.1)?, v, s0.clone())?;
            let ode = riccati_transform(&z, t, &spec)?;
            let cf = wishart_laplace(&z, spec.hurst().variance_scale(t), v, &s0)?;
            m.push(CheckRecord::relative(format!("riccati[v={v},t={t}]"), ode, cf, RICCATI_TOL));
        }
    }
    Ok(())
}
