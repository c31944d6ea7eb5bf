//! Quantum signal processing over SU(1,1).
//!
//! A protocol is a list of phases `φ_0 … φ_{n−1}`; with boost parameter β it
//! evaluates to the ordered product of phased boosts
//! `V_φ(β) = [[cosh β, e^{iφ} sinh β], [e^{−iφ} sinh β, cosh β]]`.
//! Its top-left entry is a degree-`n` polynomial in `x = cosh β`.
//!
//! * [`algebra`]: gates, protocol evaluation, defects, picture changes.
//! * [`polyring`]: Chebyshev-basis polynomials and transfer pairs.
//! * [`synthesis`]: completion of real parts and phase recovery by layer stripping.
//! * [`protocols`]: protocol families, closed forms, bounds and asymptotes.
//! * [`modes`]: two-mode Bogoliubov maps realized by protocols.
//! * [`approx`]: least-squares fitting on `[1, X]` with an orthonormal basis.
//! * [`cli`]: the `hyperqsp` command-line front end.
//!
//! ```
//! use hyperqsp::algebra::{eval_protocol, PhaseList, Signal};
//!
//! let m = eval_protocol(&PhaseList::zeros(3)?, Signal::hyperbolic(2f64.acosh())?);
//! assert!((m.a11.re - 26.0).abs() < 1e-12); // T_3(2)
//! # Ok::<(), hyperqsp::Error>(())
//! ```

// `!(x >= a)` is used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod approx;
pub mod cli;
pub mod error;
pub mod modes;
pub mod polyring;
pub mod protocols;
pub(crate) mod roots;
pub mod synthesis;

pub use error::{Error, ErrorKind, Result};
