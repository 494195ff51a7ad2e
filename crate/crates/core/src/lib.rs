//! Joint digital and analog transceiver optimization for multi-user downlinks
//! where both the base station and the user equipment radiate through
//! reconfigurable metasurface antenna (RIMSA) arrays.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws geometric narrowband channels for uniform planar arrays
//!   and perturbs them to model imperfect CSI.
//! * [`manifold`] holds the unit-modulus block-diagonal phase matrices and a
//!   Riemannian conjugate-gradient solver over products of them.
//! * [`miso`] solves MU-MISO sum-rate maximization with fractional
//!   programming for the digital precoder and product-manifold optimization
//!   for the BS and UE phase responses (FP-PMO).
//! * [`mimo`] solves MU-MIMO sum-rate maximization through its weighted-MSE
//!   equivalent (WMMSE-PMO).
//! * [`harness`] runs Monte Carlo sweeps, baselines and writes CSV/JSON.

pub mod channel;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod manifold;
pub mod mimo;
pub mod miso;

pub use error::{Error, Result};

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// First outer iteration `k ≥ 1` at which `|trace[k] − trace[k−1]| < tol`.
pub fn settled_at(trace: &[f64], tol: f64) -> Option<usize> {
    trace.windows(2).position(|w| (w[1] - w[0]).abs() < tol).map(|k| k + 1)
}
