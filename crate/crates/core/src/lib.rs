//! Exact simulation of teleportation over a partially entangled channel
//! whose transmitted state is concealed by a pair of secret exponents.
//!
//! The transmitter measures `|ψ> ⊗ (cos θ/2 |00> + sin θ/2 |11>)` against a
//! non-orthogonal basis fixed by the key `(x, y)`. Only a receiver holding
//! the same key can filter the distorted output back to `|ψ>`.
//!
//! ```
//! use cqi::{analytics, ProtocolParams, PureState};
//!
//! let psi = PureState::from_real(&[1.0, 2f64.sqrt()])?;
//! let params = ProtocolParams::new(std::f64::consts::FRAC_PI_2, 0.0, 1.0, psi)?;
//! let report = analytics::report(&params)?;
//! assert!((report.p_xy - 0.45).abs() < 1e-12);
//! # Ok::<(), cqi::Error>(())
//! ```

pub mod analytics;
pub mod eqi;
mod error;
pub mod export;
pub mod protocol;
pub mod qcore;
pub mod states;
pub mod uqsd;
pub mod verify;

pub use error::{Error, Result};
pub use qcore::{fidelity, LinearOp, MeasurementModel, PureState};
pub use states::{BasisLabel, ProtocolParams};

// Book chapters are compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel-and-basis.md")]
    mod channel_and_basis {}
    #[doc = include_str!("../../../book/src/discrimination.md")]
    mod discrimination {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/probabilities.md")]
    mod probabilities {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
