//! Ground-state one-body density matrix, natural-orbital occupations and von
//! Neumann entropy of `N` anyons with contact repulsion on a ring, built from
//! the exact Bethe-ansatz wavefunction.

pub mod bethe;
pub mod circulant;
pub mod error;
pub mod oracles;
pub mod params;
pub mod pipeline;
pub mod quadrature;
pub mod rdm;
pub mod spectrum;
pub mod validation;
pub mod wavefn;

pub use error::{Error, Result};
pub use params::{effective_coupling, EffectiveCoupling, ModelParams};
