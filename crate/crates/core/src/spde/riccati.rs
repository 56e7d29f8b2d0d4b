//! Laplace transform of the general-index process from its Riccati system.
//!
//! With `tau` running backwards from the observation time,
//! `d psi / d tau = 2 g(eps + tau)^2 psi^2`, `psi(0) = -Z`, and
//! `d b / d tau = v Tr[f(eps + tau) psi]`, `b(0) = 0`. The transform is
//! `exp(b(t)) etr(psi(t) Sigma_0)`.

use serde::Serialize;

use super::blend::{blend_f, BlendCoeffs};
use super::characteristic::GeneralVSpec;
use crate::error::{FwisError, Result};
use crate::linalg::{PsdMatrix, RectMatrix};

/// Integrated Riccati solution at `tau = t`.
#[derive(Clone, Debug, Serialize)]
pub struct RiccatiSolution {
    /// Scalar part `b`.
    pub b: f64,
    /// Matrix part `B = psi(t)`.
    pub big_b: RectMatrix,
    /// `exp(b) etr(B Sigma_0)`.
    pub value: f64,
}

/// Classical RK4 steps used by [`riccati_transform`].
pub const RICCATI_STEPS: usize = 10_000;

/// Integrates the Riccati system with `steps` RK4 steps.
pub fn riccati_solve(z: &PsdMatrix, t: f64, spec: &GeneralVSpec, steps: usize) -> Result<RiccatiSolution> {
    let p = spec.p();
    if z.dim() != p {
        return Err(FwisError::contract("Z must match the process dimension"));
    }
    if !(t > 0.0 && t.is_finite()) || steps == 0 {
        return Err(FwisError::contract(format!("need t > 0 and steps > 0, got t = {t}")));
    }
    let blend = BlendCoeffs::new(spec.hurst())?;
    let eps = spec.hurst().eps();
    let v = spec.v();
    let h = t / steps as f64;
    // rhs(tau, psi) = (2 f psi^2, v f Tr psi); f = g^2.
    let rhs = |tau: f64, psi: &RectMatrix| -> Result<(RectMatrix, f64)> {
        let f = blend_f(eps + tau, &blend);
        let tr: f64 = (0..p).map(|i| psi.get(i, i)).sum();
        Ok((psi.matmul(psi)?.scale(2.0 * f), v * f * tr))
    };
    let mut psi = z.to_rect().scale(-1.0);
    let mut b = 0.0;
    for k in 0..steps {
        let tau = k as f64 * h;
        let (k1, c1) = rhs(tau, &psi)?;
        let (k2, c2) = rhs(tau + 0.5 * h, &psi.add(&k1.scale(0.5 * h))?)?;
        let (k3, c3) = rhs(tau + 0.5 * h, &psi.add(&k2.scale(0.5 * h))?)?;
        let (k4, c4) = rhs(tau + h, &psi.add(&k3.scale(h))?)?;
        let inc = k1.add(&k2.scale(2.0))?.add(&k3.scale(2.0))?.add(&k4)?;
        psi = psi.add(&inc.scale(h / 6.0))?;
        b += h / 6.0 * (c1 + 2.0 * c2 + 2.0 * c3 + c4);
        if !b.is_finite() || psi.as_slice().iter().any(|x| !x.is_finite()) {
            return Err(FwisError::numeric(format!("Riccati integration blew up at tau = {tau}")));
        }
    }
    let bs = psi.matmul(&spec.sigma0().to_rect())?;
    let tr: f64 = (0..p).map(|i| bs.get(i, i)).sum();
    Ok(RiccatiSolution {
        b,
        value: (b + tr).exp(),
        big_b: psi,
    })
}

/// Transform `E[etr(-Z u_t(eps))]` from the Riccati system.
pub fn riccati_transform(z: &PsdMatrix, t: f64, spec: &GeneralVSpec) -> Result<f64> {
    Ok(riccati_solve(z, t, spec, RICCATI_STEPS)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::HurstParams;
    use crate::linalg::SymMatrix;
    use crate::wishart::wishart_laplace;

    fn spec(h: f64, v: f64, s0: SymMatrix) -> GeneralVSpec {
        GeneralVSpec::new(HurstParams::new(h, 0.1).unwrap(), v, PsdMatrix::new(s0).unwrap()).unwrap()
    }

    #[test]
    fn brownian_scalar_closed_form() {
        let g = spec(0.5, 3.0, SymMatrix::from_diag(&[0.4]));
        let z = PsdMatrix::new(SymMatrix::from_diag(&[0.7])).unwrap();
        let t: f64 = 0.8;
        let want = (1.0 + 2.0 * t * 0.7).powf(-1.5) * (-0.7 * 0.4 / (1.0 + 2.0 * t * 0.7)).exp();
        let got = riccati_transform(&z, t, &g).unwrap();
        assert!((got / want - 1.0).abs() < 1e-10, "{got} {want}");
    }

    #[test]
    fn zero_test_matrix() {
        let g = spec(0.7, 3.5, SymMatrix::identity(2));
        let z = PsdMatrix::new(SymMatrix::zeros(2)).unwrap();
        assert_eq!(riccati_transform(&z, 0.5, &g).unwrap(), 1.0);
    }

    #[test]
    fn matches_wishart_closed_form() {
        let g = spec(0.7, 3.5, SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.6]]).unwrap());
        let z = PsdMatrix::new(SymMatrix::from_rows(&[vec![0.5, 0.1], vec![0.1, 0.3]]).unwrap()).unwrap();
        let got = riccati_transform(&z, 0.5, &g).unwrap();
        let c = g.hurst().variance_scale(0.5);
        let want = wishart_laplace(&z, c, 3.5, g.sigma0()).unwrap();
        assert!((got / want - 1.0).abs() < 1e-6, "{got} {want}");
    }

    #[test]
    fn scalar_part_scales_with_index() {
        let s0 = SymMatrix::identity(2);
        let z = PsdMatrix::new(SymMatrix::identity(2).scale(0.5)).unwrap();
        let b3 = riccati_solve(&z, 0.5, &spec(0.7, 3.0, s0.clone()), 2000).unwrap();
        let b5 = riccati_solve(&z, 0.5, &spec(0.7, 5.0, s0), 2000).unwrap();
        assert!((b5.b - 5.0 / 3.0 * b3.b).abs() < 1e-13 * b5.b.abs());
        assert_eq!(b3.big_b, b5.big_b);
    }
}
