//! 2×2 complex matrices, the elementary SU(2) and SU(1,1) gates, and
//! protocol evaluation.
//!
//! A protocol is an ordered list of phases. Entry `k = 0` is the leftmost
//! factor of the product.

use std::fmt;
use std::ops::{Deref, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper limit on the boost parameter β.
pub const DEFAULT_BETA_MAX: f64 = 5.0;

/// Environment variable read by the CLI to override [`DEFAULT_BETA_MAX`].
pub const BETA_MAX_ENV: &str = "HYPERQSP_BETA_MAX";

/// Reads the β cutoff from [`BETA_MAX_ENV`], falling back to the default.
pub fn beta_max_from_env() -> Result<f64> {
    match std::env::var(BETA_MAX_ENV) {
        Ok(raw) => {
            let v: f64 = raw.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{BETA_MAX_ENV}={raw} is not a number"))
            })?;
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{BETA_MAX_ENV} must be positive and finite, got {v}"
                )));
            }
            Ok(v)
        }
        Err(_) => Ok(DEFAULT_BETA_MAX),
    }
}

#[cfg(test)]
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A 2×2 complex matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub a11: Complex64,
    pub a12: Complex64,
    pub a21: Complex64,
    pub a22: Complex64,
}

impl Mat2 {
    pub const fn new(a11: Complex64, a12: Complex64, a21: Complex64, a22: Complex64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::diag(c(1.0), c(1.0))
    }

    pub fn diag(d1: Complex64, d2: Complex64) -> Self {
        Mat2::new(d1, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), d2)
    }

    /// `diag(1, -1)`.
    pub fn pauli_z() -> Self {
        Mat2::diag(c(1.0), c(-1.0))
    }

    pub fn pauli_x() -> Self {
        Mat2::new(c(0.0), c(1.0), c(1.0), c(0.0))
    }

    /// `exp(i·phi·Z)`.
    pub fn z_rotation(phi: f64) -> Self {
        Mat2::diag(Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, -phi))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn adjoint(&self) -> Self {
        Mat2::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    pub fn det(&self) -> Complex64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * r.a11 + self.a12 * r.a21,
            self.a11 * r.a12 + self.a12 * r.a22,
            self.a21 * r.a11 + self.a22 * r.a21,
            self.a21 * r.a12 + self.a22 * r.a22,
        )
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

/// A nonempty list of finite phases, one per gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PhaseList(Vec<f64>);

impl PhaseList {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::EmptyPhaseList);
        }
        if let Some(index) = phases.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinitePhase { index });
        }
        Ok(PhaseList(phases))
    }

    /// `n` zero phases.
    pub fn zeros(n: usize) -> Result<Self> {
        PhaseList::new(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &PhaseList) -> PhaseList {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        PhaseList(v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<PhaseList> {
        PhaseList::new(self.0.iter().map(|&p| f(p)).collect())
    }
}

impl Deref for PhaseList {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for PhaseList {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        PhaseList::new(v)
    }
}

impl From<PhaseList> for Vec<f64> {
    fn from(p: PhaseList) -> Vec<f64> {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    /// `x = cos θ`, evaluated with phased iterates.
    Circular,
    /// `x = cosh β`, evaluated with phased boosts.
    Hyperbolic,
}

/// A validated signal value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signal {
    kind: SignalKind,
    value: f64,
    x: f64,
    // sin θ or sinh β
    s: f64,
}

impl Signal {
    /// Rotation angle θ ∈ [0, π].
    pub fn circular(theta: f64) -> Result<Self> {
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidSignal(format!("θ = {theta} outside [0, π]")));
        }
        let (s, x) = theta.sin_cos();
        Ok(Signal { kind: SignalKind::Circular, value: theta, x, s })
    }

    /// Boost parameter β ∈ [0, DEFAULT_BETA_MAX].
    pub fn hyperbolic(beta: f64) -> Result<Self> {
        Signal::hyperbolic_with_cutoff(beta, DEFAULT_BETA_MAX)
    }

    pub fn hyperbolic_with_cutoff(beta: f64, beta_max: f64) -> Result<Self> {
        check_beta(beta, beta_max)?;
        Ok(Signal { kind: SignalKind::Hyperbolic, value: beta, x: beta.cosh(), s: beta.sinh() })
    }

    /// Builds a signal from its `x` value: `x ∈ [-1, 1]` for circular,
    /// `x ∈ [1, cosh β_max]` for hyperbolic. `x` is kept exactly.
    pub fn from_x(kind: SignalKind, x: f64, beta_max: f64) -> Result<Self> {
        let s = ((1.0 - x) * (1.0 + x)).abs().sqrt();
        match kind {
            SignalKind::Circular => {
                if !(-1.0..=1.0).contains(&x) {
                    return Err(Error::InvalidSignal(format!("circular x = {x} outside [-1, 1]")));
                }
                Ok(Signal { kind, value: x.acos(), x, s })
            }
            SignalKind::Hyperbolic => {
                if !(x >= 1.0) || !x.is_finite() {
                    return Err(Error::InvalidSignal(format!("hyperbolic x = {x} below 1")));
                }
                let beta = x.acosh();
                check_beta(beta, beta_max)?;
                Ok(Signal { kind, value: beta, x, s })
            }
        }
    }

    pub fn kind(&self) -> SignalKind {
        self.kind
    }

    /// θ or β.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// `cos θ` or `cosh β`.
    pub fn x(&self) -> f64 {
        self.x
    }

    /// `sin θ` or `sinh β`.
    pub fn s(&self) -> f64 {
        self.s
    }
}

fn check_beta(beta: f64, beta_max: f64) -> Result<()> {
    if !(beta >= 0.0 && beta <= beta_max) {
        return Err(Error::BoostOutOfRange { beta, beta_max });
    }
    Ok(())
}

/// `V_φ(β) = [[cosh β, e^{iφ} sinh β], [e^{-iφ} sinh β, cosh β]]`.
pub fn phased_boost(beta: f64, phi: f64) -> Result<Mat2> {
    phased_boost_with_cutoff(beta, phi, DEFAULT_BETA_MAX)
}

pub fn phased_boost_with_cutoff(beta: f64, phi: f64, beta_max: f64) -> Result<Mat2> {
    check_beta(beta, beta_max)?;
    Ok(boost_cs(beta.cosh(), beta.sinh(), phi))
}

/// `W_φ(θ) = [[cos θ, e^{iφ} sin θ], [-e^{-iφ} sin θ, cos θ]]`.
pub fn phased_iterate(theta: f64, phi: f64) -> Mat2 {
    let (s, co) = theta.sin_cos();
    iterate_cs(co, s, phi)
}

fn iterate_cs(co: f64, s: f64, phi: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, phi);
    Mat2::new(c(co), e * s, -e.conj() * s, c(co))
}

fn boost_cs(ch: f64, sh: f64, phi: f64) -> Mat2 {
    let e = Complex64::from_polar(1.0, phi);
    Mat2::new(c(ch), e * sh, e.conj() * sh, c(ch))
}

/// Ordered product of gates, entry 0 leftmost.
pub fn eval_protocol(phases: &PhaseList, signal: Signal) -> Mat2 {
    match signal.kind {
        SignalKind::Circular => phases
            .iter()
            .fold(Mat2::identity(), |acc, &p| acc * iterate_cs(signal.x, signal.s, p)),
        SignalKind::Hyperbolic => phases
            .iter()
            .fold(Mat2::identity(), |acc, &p| acc * boost_cs(signal.x, signal.s, p)),
    }
}

/// Boost product at `x = cosh β` with no cutoff on β, for asymptotic
/// analysis at large `x`.
pub fn eval_boosts_at_x(phases: &[f64], x: f64) -> Result<Mat2> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x = {x} must be a finite value >= 1")));
    }
    let sh = ((x - 1.0) * (x + 1.0)).sqrt();
    Ok(phases.iter().fold(Mat2::identity(), |acc, &p| acc * boost_cs(x, sh, p)))
}

/// Max-entry magnitude of `M† Z M − Z`.
pub fn pseudo_unitary_defect(m: &Mat2) -> f64 {
    let z = Mat2::pauli_z();
    (m.adjoint() * z * *m).max_abs_diff(&z)
}

/// [`pseudo_unitary_defect`] divided by `max(1, max|m_ij|²)`, the scale at
/// which rounding in `M† Z M` occurs.
pub fn relative_pseudo_unitary_defect(m: &Mat2) -> f64 {
    pseudo_unitary_defect(m) / m.max_abs().powi(2).max(1.0)
}

/// Max-entry magnitude of `M† M − I`.
pub fn unitary_defect(m: &Mat2) -> f64 {
    (m.adjoint() * *m).max_abs_diff(&Mat2::identity())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Su2,
    Su11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substitution {
    Su2ToSu11,
    Su11ToSu2,
}

/// Shifts every phase by `+π/2` (SU(2) → SU(1,1)) or `−π/2`.
///
/// With this shift, `W_{φ}(iβ) = V_{φ+π/2}(β)`.
pub fn substitute_picture(phases: &PhaseList, direction: Substitution) -> PhaseList {
    let shift = match direction {
        Substitution::Su2ToSu11 => std::f64::consts::FRAC_PI_2,
        Substitution::Su11ToSu2 => -std::f64::consts::FRAC_PI_2,
    };
    PhaseList(phases.iter().map(|p| p + shift).collect())
}

/// Writes a unitary as `cos ξ · I + i sin ξ · e^{iRY} Z e^{−iRY}` and
/// returns `(ξ, R)`.
pub fn rotation_decompose(m: &Mat2) -> Result<(f64, f64)> {
    let defect = unitary_defect(m);
    if defect > 1e-10 {
        return Err(Error::NotUnitary(defect));
    }
    let a = m.a11.re;
    let rest = 1.0 - a * a;
    if rest <= 1e-14 {
        return Err(Error::DegenerateRotation(a));
    }
    let xi = a.clamp(-1.0, 1.0).acos();
    let r = (m.a11.im / rest.sqrt()).clamp(-1.0, 1.0).acos();
    Ok((xi, r))
}
