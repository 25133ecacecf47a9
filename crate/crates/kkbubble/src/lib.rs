//! Scalar Klein-Gordon fields on the Witten bubble of nothing and on the
//! Lorentzian Hawking wormhole.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: complex Gamma, Ferrers and Olver Legendre functions,
//!   the generalized Lambert function W(+2,-2), Laguerre derivatives.
//! * [`charts`]: coordinate charts, metrics, Christoffel symbols and the
//!   wormhole curvature.
//! * [`geodesics`]: causal geodesics with chart switching and conserved
//!   quantities.
//! * [`spectral`]: radial operators, discrete spectra and the continuous
//!   transform of the massless zero-mode operator.
//! * [`desitter`]: one Kaluza-Klein mode on dS3 (Poschl-Teller dynamics).
//! * [`fields`]: full mode towers, energies, scattering and resonances.
//!
//! The Schwarzschild radius R is fixed to 1 everywhere.

pub mod charts;
pub mod desitter;
pub mod error;
pub mod fields;
pub mod geodesics;
pub mod ode;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
pub use num_complex::Complex64;
