//! Open-system dynamics of excitation transfer between coupled two-level
//! monomers and a single damped bosonic mode.
//!
//! The model lives in the single-excitation manifold of `N` sites tensored
//! with a truncated Fock space: site energies and site-phonon couplings on
//! the diagonal, power-law hopping between sites, and Lindblad damping,
//! heating and pure dephasing on top. The crate is organized as
//!
//! * [`hilbert`]: basis bookkeeping, joint operators, displaced Fock states;
//! * [`model`]: lattice geometry, exciton bases, Hamiltonian assembly,
//!   static disorder;
//! * [`lindblad`]: density-matrix propagation, thermal initial states,
//!   steady states, phonon-cutoff convergence;
//! * [`analysis`]: transfer rates, equilibration fits, golden-rule
//!   predictions, pairwise concurrence, resonance scans;
//! * [`linalg`]: the small dense complex routines the above are built on.
//!
//! Numeric code is generic over the real scalar through [`scalar::Scalar`];
//! `f64` is the supported precision for production runs and the concrete
//! aliases below refer to it.

pub mod analysis;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod lindblad;
pub mod model;
pub mod scalar;

pub use error::Error;
pub use scalar::Scalar;

/// Default real scalar.
pub type Real = f64;
/// Default complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix at default precision.
pub type CMatrix = ndarray::Array2<C64>;

/// Crate-wide result type.
pub type Result<T, E = Error> = std::result::Result<T, E>;
