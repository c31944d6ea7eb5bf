//! Two-mode Bogoliubov maps carried by SU(1,1) protocols.
//!
//! A matrix `[[u, v], [conj v, conj u]]` acting on `(a₁, a₂†)` gives
//!
//! ```text
//! a₁ ↦ u·a₁ + v·a₂†,   a₂ ↦ u·a₂ + v·a₁†
//! ```
//!
//! and preserves the commutators exactly when `|u|² − |v|² = 1`.

use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    eval_boosts_at_x, phased_boost_with_cutoff, pseudo_unitary_defect, Mat2, PhaseList, DEFAULT_BETA_MAX,
};
use crate::error::{Error, Result};

/// Largest gain for which the low-gain expansion is considered valid.
pub const LOW_GAIN_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BogoliubovMap {
    pub u: Complex64,
    pub v: Complex64,
}

impl BogoliubovMap {
    pub fn identity() -> Self {
        BogoliubovMap { u: Complex64::new(1.0, 0.0), v: Complex64::new(0.0, 0.0) }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.u, self.v, self.v.conj(), self.u.conj())
    }

    /// `||u|² − |v|² − 1|`.
    pub fn commutator_defect(&self) -> f64 {
        commutator_defect(self)
    }
}

impl Mul for BogoliubovMap {
    type Output = BogoliubovMap;

    fn mul(self, rhs: BogoliubovMap) -> BogoliubovMap {
        let m = self.matrix() * rhs.matrix();
        BogoliubovMap { u: m.a11, v: m.a12 }
    }
}

pub fn commutator_defect(b: &BogoliubovMap) -> f64 {
    (b.u.norm_sqr() - b.v.norm_sqr() - 1.0).abs()
}

/// Reads `u = a11`, `v = a12` from an SU(1,1) matrix.
pub fn bogoliubov_from_matrix(m: &Mat2) -> Result<BogoliubovMap> {
    let defect = pseudo_unitary_defect(m);
    if defect > 1e-8 {
        return Err(Error::NotModeTransform(defect));
    }
    Ok(BogoliubovMap { u: m.a11, v: m.a12 })
}

fn check_gain(beta: f64, beta_max: f64) -> Result<()> {
    if !(beta >= 0.0 && beta <= beta_max) {
        return Err(Error::BoostOutOfRange { beta, beta_max });
    }
    Ok(())
}

/// `u = P(cosh β)`, `v = sinh β · Q(cosh β)` for the boost protocol `phases`.
///
/// Evaluated as the product of the boosts, which stays accurate where the
/// Chebyshev pair would cancel.
pub fn composite_mode_map(phases: &PhaseList, beta: f64) -> Result<BogoliubovMap> {
    composite_mode_map_with_cutoff(phases, beta, DEFAULT_BETA_MAX)
}

pub fn composite_mode_map_with_cutoff(phases: &PhaseList, beta: f64, beta_max: f64) -> Result<BogoliubovMap> {
    check_gain(beta, beta_max)?;
    let mut m = Mat2::identity();
    for &phi in phases.as_slice() {
        m = m * phased_boost_with_cutoff(beta, phi, f64::INFINITY)?;
    }
    Ok(BogoliubovMap { u: m.a11, v: m.a12 })
}

/// The two branches of a squeezer whose gain is `β₀` or `β₁` depending on a
/// control qubit, composed through the same protocol.
pub fn controlled_squeeze_branches(
    beta0: f64,
    beta1: f64,
    phases: &PhaseList,
) -> Result<(BogoliubovMap, BogoliubovMap)> {
    controlled_squeeze_branches_with_cutoff(beta0, beta1, phases, DEFAULT_BETA_MAX)
}

pub fn controlled_squeeze_branches_with_cutoff(
    beta0: f64,
    beta1: f64,
    phases: &PhaseList,
    beta_max: f64,
) -> Result<(BogoliubovMap, BogoliubovMap)> {
    Ok((
        composite_mode_map_with_cutoff(phases, beta0, beta_max)?,
        composite_mode_map_with_cutoff(phases, beta1, beta_max)?,
    ))
}

/// A chain of amplifiers `(β_k, φ_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedInterferometer {
    stages: Vec<(f64, f64)>,
}

impl StagedInterferometer {
    pub fn new(stages: Vec<(f64, f64)>) -> Result<Self> {
        StagedInterferometer::with_cutoff(stages, DEFAULT_BETA_MAX)
    }

    pub fn with_cutoff(stages: Vec<(f64, f64)>, beta_max: f64) -> Result<Self> {
        for &(beta, phi) in &stages {
            check_gain(beta, beta_max)?;
            if !phi.is_finite() {
                return Err(Error::InvalidArgument(format!("stage phase {phi} is not finite")));
            }
        }
        Ok(StagedInterferometer { stages })
    }

    /// `N` equal gains with phases `φ_k = φ − kθ`.
    pub fn uniform(beta: f64, theta: f64, phi: f64, n_stages: usize) -> Result<Self> {
        StagedInterferometer::new((0..n_stages).map(|k| (beta, phi - k as f64 * theta)).collect())
    }

    pub fn stages(&self) -> &[(f64, f64)] {
        &self.stages
    }
}

/// Exact product of the stage boosts.
pub fn staged_amplitude_exact(stages: &StagedInterferometer) -> BogoliubovMap {
    let m = stages.stages.iter().fold(Mat2::identity(), |acc, &(beta, phi)| {
        acc * phased_boost_with_cutoff(beta, phi, f64::INFINITY).expect("validated on construction")
    });
    BogoliubovMap { u: m.a11, v: m.a12 }
}

/// Low-gain amplitude of a uniform staging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowGain {
    pub amplitude: Complex64,
    /// `β` exceeds [`LOW_GAIN_LIMIT`].
    pub out_of_regime: bool,
}

/// `e^{i(φ − (N−1)θ/2)} sinh β · sin(Nθ/2) / sin(θ/2)`, the first-order
/// off-diagonal of `N` stages with phases `φ − kθ`.
pub fn low_gain_effective(beta: f64, theta: f64, phi: f64, n_stages: usize) -> LowGain {
    let n = n_stages as f64;
    let half = 0.5 * theta;
    let sum = if half.sin().abs() < 1e-8 {
        // Direct geometric sum where the ratio is 0/0.
        (0..n_stages).map(|k| Complex64::from_polar(1.0, -(k as f64) * theta)).sum::<Complex64>()
            * Complex64::from_polar(1.0, (n - 1.0) * half)
    } else {
        Complex64::new((n * half).sin() / half.sin(), 0.0)
    };
    let amplitude = Complex64::from_polar(beta.sinh(), phi - (n - 1.0) * half) * sum;
    LowGain { amplitude, out_of_regime: beta > LOW_GAIN_LIMIT }
}

/// Mode map of a boost list at `x = cosh β` beyond the β cutoff, for
/// asymptotic studies.
pub fn mode_map_at_x(phases: &PhaseList, x: f64) -> Result<BogoliubovMap> {
    let m = eval_boosts_at_x(phases, x)?;
    Ok(BogoliubovMap { u: m.a11, v: m.a12 })
}
