//! Generated reference pages: the symbol index and the reproduction guide.
//!
//! `fwis docs --out docs/` writes both; a test keeps the checked-in copies
//! in step with this module.

use std::path::Path;

use crate::error::{FwisError, Result};
use crate::harness::suites::SUITES;

/// One mathematical symbol and the type that holds it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolEntry {
    pub symbol: &'static str,
    /// `module.Type`.
    pub home: String,
    /// Field, accessor or function where the value lives.
    pub access: &'static str,
    pub meaning: &'static str,
}

fn home<T: ?Sized>() -> String {
    let full = std::any::type_name::<T>();
    let path = full.split('<').next().unwrap_or(full);
    let parts: Vec<&str> = path.split("::").collect();
    format!("{}.{}", parts[1], parts[parts.len() - 1])
}

/// Every symbol of the model with its home type.
pub fn symbol_entries() -> Vec<SymbolEntry> {
    use crate::fbm::HurstParams;
    use crate::linalg::PsdMatrix;
    use crate::spde::{BlendCoeffs, CharacteristicFamily, Family, GeneralPath, GeneralVSpec, RiccatiSolution, SixParamSpec};
    use crate::volmodel::{ForwardContract, VolModelSpec};
    use crate::wishart::{FwisSpec, LaplaceQuery};

    let e = |symbol, home: String, access, meaning| SymbolEntry {
        symbol,
        home,
        access,
        meaning,
    };
    vec![
        e("H", home::<HurstParams>(), "hurst()", "Hurst index in (0, 1)"),
        e("α", home::<HurstParams>(), "alpha()", "kernel exponent H - 1/2"),
        e("ε", home::<HurstParams>(), "eps()", "Riemann–Liouville offset"),
        e("n", home::<FwisSpec>(), "n()", "integer index, rows of the driving matrix"),
        e("p", home::<FwisSpec>(), "p()", "matrix dimension"),
        e("v", home::<GeneralVSpec>(), "v()", "real index, v >= p + 1"),
        e("Σ_0", home::<PsdMatrix>(), "sigma0() on each spec", "initial state"),
        e("C", home::<FwisSpec>(), "c()", "initial n x p matrix with C'C = Σ_0"),
        e("Z", home::<LaplaceQuery>(), "z", "positive definite Laplace argument"),
        e("f", home::<BlendCoeffs>(), "blend_f", "drift blend, f = g^2"),
        e("g", home::<BlendCoeffs>(), "blend_g", "diffusion blend"),
        e("a_i", home::<BlendCoeffs>(), "a", "left ramp coefficients"),
        e("b_i", home::<BlendCoeffs>(), "b", "right ramp coefficients"),
        e("Ω", home::<SixParamSpec>(), "omega()", "drift constant, Ω Ω' - (p + 1) Q'Q PSD"),
        e("Q", home::<SixParamSpec>(), "q()", "volatility of volatility"),
        e("K", home::<SixParamSpec>(), "k()", "mean reversion"),
        e("μ", home::<VolModelSpec>(), "mu", "asset drifts"),
        e("ρ", home::<VolModelSpec>(), "rho", "leverage vector"),
        e("r", home::<VolModelSpec>(), "r", "short rate"),
        e("T", home::<ForwardContract>(), "delivery", "delivery time"),
        e("ι", home::<ForwardContract>(), "iota", "delivery price"),
        e("ξ", home::<Family>(), "x0 - step dt", "characteristic position"),
        e("η", home::<CharacteristicFamily>(), "eta", "field along a characteristic"),
        e("u", home::<GeneralPath>(), "path", "u_t(ε) = η_t(t + ε)"),
        e("b", home::<RiccatiSolution>(), "b", "scalar Riccati part"),
        e("B", home::<RiccatiSolution>(), "big_b", "matrix Riccati part"),
    ]
}

/// The symbol index as Markdown.
pub fn generate_symbol_index() -> String {
    let mut out = String::from(
        "# Symbol index\n\nWhere each quantity of the model lives in the `fwis` crate.\n\n\
         | Symbol | Home | Access | Meaning |\n|---|---|---|---|\n",
    );
    for s in symbol_entries() {
        out.push_str(&format!("| {} | `{}` | `{}` | {} |\n", s.symbol, s.home, s.access, s.meaning));
    }
    out.push_str(
        "\nThe normalising constant of the fractional kernel is never needed \
         numerically and has no home.\n",
    );
    out
}

/// Acceptance checks in order, with the suite that runs each one.
pub const ACCEPTANCE: [(&str, &str, &str); 12] = [
    ("fWIS Laplace transform, H in {0.3, 0.5, 0.7}", "laplace-fwis", ""),
    ("integer-index eps-fWIS Laplace transform", "laplace-eps-int", ""),
    ("real-index Laplace transform and weak order", "laplace-eps-general", " --config configs/weak-order.json"),
    ("Riccati transform against the closed form", "riccati", ""),
    ("blend residuals and C4 continuity", "blend", ""),
    ("additivity of independent fWIS processes", "additivity", ""),
    ("H = 1/2: x-invariance and the CIR mean", "heston", ""),
    ("eps -> 0 convergence", "eps-convergence", ""),
    ("variance forward pricing", "forward", ""),
    ("correlation structure of the volatility model", "correlations", ""),
    ("serial correlation", "serial", ""),
    ("determinism across worker counts", "", ""),
];

/// The reproduction guide as Markdown.
pub fn reproduction_guide() -> String {
    let mut out = String::from(
        "# Reproduction guide\n\n\
         Build once with `cargo build --release`; the binary is `target/release/fwis`.\n\
         Every command exits 0 when all its checks pass and 1 otherwise, and prints\n\
         one `PASS`/`FAIL` line per check. Add `--out DIR` to keep `manifest.json`\n\
         and `checks.csv`. The default seed is fixed, so reruns are bitwise identical;\n\
         `FWIS_SEED` changes it and `FWIS_THREADS` sets the worker count.\n\n\
         | # | Check | Command |\n|---|---|---|\n",
    );
    for (k, (what, suite, extra)) in ACCEPTANCE.iter().enumerate() {
        let cmd = if suite.is_empty() {
            "`for t in 1 8; do FWIS_THREADS=$t fwis validate --suite serial --out run-$t; done; \
             cmp run-1/checks.csv run-8/checks.csv`"
                .to_string()
        } else {
            format!("`fwis validate --suite {suite}{extra}`")
        };
        out.push_str(&format!("| {} | {what} | {cmd} |\n", k + 1));
    }
    out.push_str(
        "\nThe determinism row works for any suite name. The whole table runs as the\n\
         `acceptance` test target: `cargo test --release --test acceptance -- --nocapture`.\n\n\
         ## Suites\n\n",
    );
    for (name, what) in SUITES {
        out.push_str(&format!("- `{name}`: {what}\n"));
    }
    out
}

/// Writes `symbols.md` and `reproduction.md` into `dir`.
pub fn write_docs(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FwisError::io(dir, e))?;
    for (name, text) in [("symbols.md", generate_symbol_index()), ("reproduction.md", reproduction_guide())] {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| FwisError::io(&path, e))?;
    }
    Ok(())
}
