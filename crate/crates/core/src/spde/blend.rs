//! Compactly supported `C^4` extensions of the kernel `sqrt(2H) x^alpha`.
//!
//! `g` is `0` for `x <= 0`, `sum a_i x^{i+4}` on `(0, eps)`,
//! `sqrt(2H) x^alpha` on `[eps, 1]`, `sum b_i (x - 2)^{i+4}` on `(1, 2)` and
//! `0` for `x >= 2`; `f = g^2`. The ramps match the middle branch and its
//! first four derivatives at `eps` and at `1`.
//!
//! The left system is badly scaled in `a_i` (entries span `eps^5..eps^9`),
//! so it is solved for `a_i eps^{i+4}` and the left ramp is evaluated in the
//! variable `x / eps`.

use serde::Serialize;

use crate::error::{FwisError, Result};
use crate::fbm::HurstParams;
use crate::linalg::{solve_dense, RectMatrix};

const ORDERS: usize = 5;

/// Ramp coefficients of the blend functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlendCoeffs {
    pub hurst: f64,
    pub eps: f64,
    /// Left ramp `a_1..a_5`, `g(x) = sum a_i x^{i+4}` on `(0, eps)`.
    pub a: [f64; 5],
    /// Right ramp `b_1..b_5`, `g(x) = sum b_i (x - 2)^{i+4}` on `(1, 2)`.
    pub b: [f64; 5],
    #[serde(skip)]
    a_scaled: [f64; 5],
    #[serde(skip)]
    root: f64,
    #[serde(skip)]
    alpha: f64,
}

/// Which piece of `g` a point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Zero,
    LeftRamp,
    Power,
    RightRamp,
}

// n (n-1) ... (n-k+1)
fn falling(n: f64, k: usize) -> f64 {
    (0..k).map(|j| n - j as f64).product()
}

fn system(sign: f64) -> RectMatrix {
    // Row k: k-th derivative of y^{i+4} (or (y-2)^{i+4}) at the knot, where
    // the base y - knot_offset is 1 (left) or -1 (right).
    RectMatrix::from_fn(ORDERS, ORDERS, |k, i| {
        let e = (i + 5) as f64;
        falling(e, k) * sign.powi((i + 5 - k) as i32)
    })
}

fn targets(root: f64, alpha: f64) -> Vec<f64> {
    (0..ORDERS).map(|k| root * falling(alpha, k)).collect()
}

impl BlendCoeffs {
    /// Solves both boundary systems. Needs `0 < eps < 1`.
    pub fn new(h: &HurstParams) -> Result<Self> {
        let eps = h.eps();
        if !(eps > 0.0 && eps < 1.0) {
            return Err(FwisError::contract(format!("blend functions need 0 < eps < 1, got {eps}")));
        }
        let root = (2.0 * h.hurst()).sqrt();
        let alpha = h.alpha();
        // In y = x / eps the k-th derivative target at y = 1 is
        // eps^k * sqrt(2H) alpha_(k) eps^{alpha - k} = sqrt(2H) alpha_(k) eps^alpha.
        let left_rhs: Vec<f64> = targets(root, alpha).iter().map(|t| t * eps.powf(alpha)).collect();
        let a_scaled = solve_dense(&system(1.0), &left_rhs)?;
        let b = solve_dense(&system(-1.0), &targets(root, alpha))?;
        let a_scaled: [f64; 5] = a_scaled.try_into().expect("five unknowns");
        let a = std::array::from_fn(|i| a_scaled[i] / eps.powi(i as i32 + 5));
        Ok(Self {
            hurst: h.hurst(),
            eps,
            a,
            b: b.try_into().expect("five unknowns"),
            a_scaled,
            root,
            alpha,
        })
    }

    pub fn branch(&self, x: f64) -> Branch {
        if x <= 0.0 || x >= 2.0 {
            Branch::Zero
        } else if x < self.eps {
            Branch::LeftRamp
        } else if x <= 1.0 {
            Branch::Power
        } else {
            Branch::RightRamp
        }
    }

    /// `m`-th derivative of the polynomial or power formula of `branch` at
    /// `x`, evaluated even outside the branch's own interval.
    pub fn branch_deriv(&self, branch: Branch, x: f64, m: usize) -> f64 {
        match branch {
            Branch::Zero => 0.0,
            Branch::LeftRamp => {
                let y = x / self.eps;
                let s: f64 = (0..5)
                    .map(|i| {
                        let e = i + 5;
                        if m > e {
                            0.0
                        } else {
                            self.a_scaled[i] * falling(e as f64, m) * y.powi((e - m) as i32)
                        }
                    })
                    .sum();
                s / self.eps.powi(m as i32)
            }
            Branch::Power => self.root * falling(self.alpha, m) * x.powf(self.alpha - m as f64),
            Branch::RightRamp => (0..5)
                .map(|i| {
                    let e = i + 5;
                    if m > e {
                        0.0
                    } else {
                        self.b[i] * falling(e as f64, m) * (x - 2.0).powi((e - m) as i32)
                    }
                })
                .sum(),
        }
    }

    /// `g^{(m)}(x)` on the branch containing `x`.
    pub fn g_deriv(&self, x: f64, m: usize) -> f64 {
        self.branch_deriv(self.branch(x), x, m)
    }

    /// Relative residuals of the ten boundary equations, left system first.
    /// Each residual is scaled by the sum of the magnitudes of its terms.
    pub fn residuals(&self) -> [f64; 10] {
        let root = self.root;
        let left_rhs: Vec<f64> = targets(root, self.alpha)
            .iter()
            .map(|t| t * self.eps.powf(self.alpha))
            .collect();
        let right_rhs = targets(root, self.alpha);
        let mut out = [0.0; 10];
        for (side, (sys, x, rhs)) in [
            (system(1.0), &self.a_scaled, &left_rhs),
            (system(-1.0), &self.b, &right_rhs),
        ]
        .into_iter()
        .enumerate()
        {
            for k in 0..ORDERS {
                let terms: Vec<f64> = (0..ORDERS).map(|i| sys.get(k, i) * x[i]).collect();
                let lhs: f64 = terms.iter().sum();
                let scale: f64 = terms.iter().map(|t| t.abs()).sum::<f64>() + rhs[k].abs();
                out[side * ORDERS + k] = if scale == 0.0 {
                    0.0
                } else {
                    (lhs - rhs[k]).abs() / scale
                };
            }
        }
        out
    }
}

/// `g(x)`.
pub fn blend_g(x: f64, c: &BlendCoeffs) -> f64 {
    c.g_deriv(x, 0)
}

/// `f(x) = g(x)^2`.
pub fn blend_f(x: f64, c: &BlendCoeffs) -> f64 {
    let g = blend_g(x, c);
    g * g
}

/// `g^{(m)}(x)`.
pub fn blend_g_deriv(x: f64, m: usize, c: &BlendCoeffs) -> f64 {
    c.g_deriv(x, m)
}

/// Solves the coefficient systems for `(H, eps)`.
pub fn blend_coeffs(h: &HurstParams) -> Result<BlendCoeffs> {
    BlendCoeffs::new(h)
}

/// Finite-difference continuity of one derivative order at one knot.
#[derive(Clone, Debug, Serialize)]
pub struct KnotCheck {
    pub knot: f64,
    pub order: usize,
    pub left: f64,
    pub right: f64,
    /// `|left - right|` over the largest `|g^{(order)}|` on the adjacent ramp.
    pub rel_error: f64,
}

// Fourth-order one-sided first-derivative stencil at the knot, using the
// knot and four points stepping away from it.
const ONE_SIDED: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];

/// Checks `C^4` continuity at the knots `0, eps, 1, 2`.
///
/// Order 0 compares the two branch formulas at the knot. Order `m >= 1`
/// differentiates each side's `(m-1)`-th derivative numerically with a
/// one-sided stencil that only samples that side, so the estimate from the
/// left uses no information from the right. `step` is relative to the width
/// of the adjacent ramp (`eps` at `0` and `eps`, `1` at `1` and `2`).
pub fn smoothness_checks(c: &BlendCoeffs, step: f64) -> Vec<KnotCheck> {
    let knots = [
        (0.0, Branch::Zero, Branch::LeftRamp),
        (c.eps, Branch::LeftRamp, Branch::Power),
        (1.0, Branch::Power, Branch::RightRamp),
        (2.0, Branch::RightRamp, Branch::Zero),
    ];
    let mut out = Vec::new();
    for (knot, lb, rb) in knots {
        let (ramp, ramp_lo, width) = if knot <= c.eps {
            (Branch::LeftRamp, 0.0, c.eps)
        } else {
            (Branch::RightRamp, 1.0, 1.0)
        };
        let h = step * width;
        for order in 0..ORDERS {
            let side = |b: Branch, dir: f64| -> f64 {
                if order == 0 {
                    c.branch_deriv(b, knot, 0)
                } else {
                    let d: f64 = ONE_SIDED
                        .iter()
                        .enumerate()
                        .map(|(j, w)| w * c.branch_deriv(b, knot + dir * j as f64 * h, order - 1))
                        .sum();
                    dir * d / h
                }
            };
            let left = side(lb, -1.0);
            let right = side(rb, 1.0);
            let scale = (0..=64)
                .map(|j| c.branch_deriv(ramp, ramp_lo + width * j as f64 / 64.0, order).abs())
                .fold(left.abs().max(right.abs()), f64::max);
            let rel_error = if scale == 0.0 {
                0.0
            } else {
                (left - right).abs() / scale
            };
            out.push(KnotCheck {
                knot,
                order,
                left,
                right,
                rel_error,
            });
        }
    }
    out
}
