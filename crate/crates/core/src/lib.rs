//! Exact and Monte Carlo analysis of the optical quantum Cheshire cat.
//!
//! The crate is organised bottom-up:
//!
//! * [`qcore`]: 4-dimensional complex linear algebra with basis-tagged
//!   kets and operators.
//! * [`catalog`]: every named state, basis and operator of the scenario.
//! * [`optics`]: the interferometer and its three modified experiments,
//!   compiled to detector effects.
//! * [`weakval`]: weak values, the transition operator and its coherence
//!   tables.
//! * [`contextuality`]: the three claims, the hexagram context graph,
//!   exhaustive assignment search and the noncontextuality inequality.
//! * [`sampler`]: seeded multinomial simulation of detector counts.
//!
//! ```
//! use cheshire_core::{catalog, weakval};
//!
//! let sel = weakval::PrePostSelection::new(
//!     catalog::state("E_CC")?,
//!     catalog::state("D+")?,
//! )?;
//! let path2 = weakval::weak_value(&catalog::operator("Pi(2)")?, &sel)?;
//! let pol2 = weakval::weak_value(&catalog::operator("sigma_HV(2)")?, &sel)?;
//! assert!(path2.norm() < 1e-12);
//! assert!((pol2.re - 1.0).abs() < 1e-12);
//! # Ok::<(), cheshire_core::Error>(())
//! ```

pub mod catalog;
pub mod contextuality;
pub mod error;
pub mod optics;
pub mod qcore;
pub mod sampler;
pub mod weakval;

pub use error::{Error, Result};
pub use qcore::{Amplitude, Basis, ChangeBasis, Ket, Operator, TOLERANCE};
