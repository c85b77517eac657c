//! Nonclassicality analysis for vacuum-one-photon-superposition (VOPS) qubits.
//!
//! A VOPS state is a single optical mode restricted to the `{|0>, |1>}`
//! photon-number sector, described by the density matrix
//!
//! ```text
//! sigma(p, x) = [ 1-p   x ]
//!               [ x*    p ]      with |x| <= sqrt(p(1-p)).
//! ```
//!
//! Mixing such a mode with vacuum on a beam splitter turns single-mode
//! nonclassicality into two-mode correlations. The crate quantifies this via
//! *potentials*: the entanglement (concurrence/negativity), EPR-steering, and
//! Bell-nonlocality measures of the two-mode output, expressed as functions of
//! the input `(p, x)` and of the channel imperfections (an unbalanced beam
//! splitter plus per-mode phase damping).
//!
//! Module layout:
//! - [`linalg`]: small dense complex-matrix kernel (Hermitian eigensolver,
//!   PSD square root, partial transpose).
//! - [`states`]: state constructors and channels, including the quantum
//!   scissors generator and the dephasing mixer.
//! - [`correlations`]: two-qubit correlation measures (concurrence,
//!   negativity, steering and Bell-CHSH quantifiers, entanglement witness).
//! - [`potentials`]: closed-form potentials, boundary curves, regime
//!   classification, and pure-curve thresholds.
//! - [`phasespace`]: s-parametrized quasiprobability distributions, Wigner
//!   marginals, displaced-parity evaluation, state reconstruction, and
//!   angular-momentum probability surfaces.
//! - [`fit`]: Uhlmann-Jozsa fidelity and the five-parameter model fit.
//!
//! Conventions fixed across the crate:
//! - Two-mode basis ordering `{|00>, |01>, |10>, |11>}` (index `2*n1 + n2`).
//! - Beam splitter `U = exp((theta/2)(a1^dag a2 - a1 a2^dag))`, so
//!   `U|10> = t|10> - r|01>` and `U|01> = r|10> + t|01>` with
//!   `r = sin(theta/2)`, `t = cos(theta/2)`.
//! - Pauli operators act on the photon-number qubit with `|0>` the +1
//!   eigenstate of `sigma_z`.

pub mod correlations;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod phasespace;
pub mod potentials;
mod quad;
pub mod states;

pub use error::{Error, Result};
