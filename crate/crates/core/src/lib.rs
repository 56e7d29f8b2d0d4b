//! Simulation and validation of fractional Wishart processes.

pub mod docs;
pub mod error;
pub mod fbm;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod spde;
pub mod volmodel;
pub mod wishart;

pub use error::{FwisError, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/closed-forms.md")]
    pub struct ClosedForms;
    #[doc = include_str!("../../../book/src/characteristics.md")]
    pub struct Characteristics;
    #[doc = include_str!("../../../book/src/volmodel.md")]
    pub struct Volmodel;
    #[doc = include_str!("../../../book/src/harness.md")]
    pub struct Harness;
}
