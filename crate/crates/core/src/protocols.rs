//! Protocol families and what is known about them analytically.
//!
//! Three layouts of phases are in use, all reducible to a plain boost list:
//!
//! * [`Convention::PhasedBoost`]: `Π_k V_{φ_k}(β)`.
//! * [`Convention::Iterate`]: `Π_k e^{iφ_k Z} V_0(β)`, one phase per boost.
//! * [`Convention::Interleaved`]: `e^{iφ_0 Z} Π_{k≥1} V_0(β) e^{iφ_k Z}`,
//!   `n + 1` phases for `n` boosts.
//!
//! Since `e^{iφZ} V_0 e^{−iφZ} = V_{2φ}`, the rotations can be pushed to the
//! right end, leaving boost phases `θ_k = 2(φ_0 + … + φ_k)` and a trailing
//! frame `e^{iσZ}` with `σ = Σ φ_k`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{eval_boosts_at_x, eval_protocol, Mat2, PhaseList, Signal, SignalKind};
use crate::error::{Error, Result};
use crate::polyring::{chebyshev_u, protocol_to_pair, TransferPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    PhasedBoost,
    Iterate,
    Interleaved,
}

/// A phase list together with its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub phases: PhaseList,
    pub convention: Convention,
}

/// A plain boost list followed by `e^{iσZ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostForm {
    pub boosts: PhaseList,
    pub frame: f64,
}

impl Protocol {
    pub fn new(phases: PhaseList, convention: Convention) -> Result<Self> {
        if convention == Convention::Interleaved && phases.len() < 2 {
            return Err(Error::InvalidArgument("an interleaved protocol needs at least two phases".into()));
        }
        Ok(Protocol { phases, convention })
    }

    pub fn phased_boost(phases: PhaseList) -> Self {
        Protocol { phases, convention: Convention::PhasedBoost }
    }

    /// Number of boosts.
    pub fn len(&self) -> usize {
        match self.convention {
            Convention::Interleaved => self.phases.len() - 1,
            _ => self.phases.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn boost_form(&self) -> BoostForm {
        match self.convention {
            Convention::PhasedBoost => BoostForm { boosts: self.phases.clone(), frame: 0.0 },
            Convention::Iterate | Convention::Interleaved => {
                let n = self.len();
                let mut acc = 0.0;
                let mut boosts = Vec::with_capacity(n);
                for &p in &self.phases[..n] {
                    acc += p;
                    boosts.push(2.0 * acc);
                }
                let frame = self.phases.iter().sum();
                BoostForm { boosts: PhaseList::new(boosts).expect("finite phases stay finite"), frame }
            }
        }
    }

    /// The protocol's matrix for the given signal.
    pub fn eval(&self, signal: Signal) -> Mat2 {
        let bf = self.boost_form();
        let frame = Mat2::z_rotation(bf.frame);
        match signal.kind() {
            SignalKind::Hyperbolic => eval_protocol(&bf.boosts, signal) * frame,
            // Continuation of the boost list: V_φ(β) ↔ W_{φ−π/2}(θ).
            SignalKind::Circular => {
                let su2 = bf.boosts.map(|p| p - FRAC_PI_2).expect("finite phases stay finite");
                eval_protocol(&su2, signal) * frame
            }
        }
    }

    /// The matrix at `x = cosh β ≥ 1` with no cutoff on β.
    pub fn eval_at_x(&self, x: f64) -> Result<Mat2> {
        let bf = self.boost_form();
        Ok(eval_boosts_at_x(&bf.boosts, x)? * Mat2::z_rotation(bf.frame))
    }

    pub fn pair(&self) -> TransferPair {
        let bf = self.boost_form();
        protocol_to_pair(&bf.boosts).with_frame(bf.frame)
    }
}

/// `n` zero phases: `P = T_n`, `Q = U_{n−1}`.
pub fn gen_trivial(n: usize) -> Result<PhaseList> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    PhaseList::zeros(n)
}

/// Reverses and negates, then adds `π/2` to the new first entry and `−π/2`
/// to the new last entry.
pub fn inverse_phases(phases: &PhaseList) -> Result<PhaseList> {
    if phases.len() < 2 {
        return Err(Error::InvalidArgument("inverse_phases needs at least two phases".into()));
    }
    let mut out: Vec<f64> = phases.iter().rev().map(|p| -p).collect();
    let last = out.len() - 1;
    out[0] += FRAC_PI_2;
    out[last] -= FRAC_PI_2;
    PhaseList::new(out)
}

/// Joins two interleaved lists, merging the trailing phase of `a` with the
/// leading phase of `b`.
pub fn concat_protocols(a: &PhaseList, b: &PhaseList) -> PhaseList {
    let mut out = a.to_vec();
    let last = out.len() - 1;
    out[last] += b[0];
    out.extend_from_slice(&b[1..]);
    PhaseList::new(out).expect("concatenation of nonempty lists is nonempty")
}

/// Deepest level accepted by [`gen_monotone_amplify`].
pub const MAX_AMPLIFY_LEVEL: usize = 8;

/// `Φ_0 = {0, π/3, −π/3, 0}`, and
/// `Φ_{k+1} = Φ_k ∪ {−π/6} ∪ inverse(Φ_k) ∪ {π/6} ∪ Φ_k`, interleaved.
///
/// `|P(x)|² = x^{2·3^{level+1}}` for the result.
pub fn gen_monotone_amplify(level: usize) -> Result<Protocol> {
    amplify_from_base(&PhaseList::new(vec![0.0, FRAC_PI_3, -FRAC_PI_3, 0.0])?, level)
}

/// The recursion of [`gen_monotone_amplify`] started from an arbitrary
/// interleaved base.
pub fn amplify_from_base(base: &PhaseList, level: usize) -> Result<Protocol> {
    if level > MAX_AMPLIFY_LEVEL {
        return Err(Error::InvalidArgument(format!(
            "level {level} exceeds {MAX_AMPLIFY_LEVEL}; lengths grow as 3^level"
        )));
    }
    let mut phi = base.clone();
    let minus = PhaseList::new(vec![-FRAC_PI_6])?;
    let plus = PhaseList::new(vec![FRAC_PI_6])?;
    for _ in 0..level {
        let inv = inverse_phases(&phi)?;
        let mut next = concat_protocols(&phi, &minus);
        next = concat_protocols(&next, &inv);
        next = concat_protocols(&next, &plus);
        next = concat_protocols(&next, &phi);
        phi = next;
    }
    Protocol::new(phi, Convention::Interleaved)
}

/// `x^{2·3^{level+1}}`.
pub fn amplify_expected_modulus(level: usize, x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::Domain(format!("x = {x} must be >= 1")));
    }
    let exponent = 2.0 * 3f64.powi(level as i32 + 1);
    let v = x.powf(exponent);
    if !v.is_finite() {
        return Err(Error::Overflow(format!("{x}^{exponent} is not representable")));
    }
    Ok(v)
}

/// `n` copies of `φ`, read as powers of the iterate `e^{iφZ} V_0`.
pub fn gen_constant(n: usize, phi: f64) -> Result<Protocol> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Protocol::new(PhaseList::new(vec![phi; n])?, Convention::Iterate)
}

/// `λ± = cos φ (x ± √(x² − sec²φ))`, principal branch.
pub fn constant_eigenvalues(phi: f64, x: f64) -> (Complex64, Complex64) {
    let c = phi.cos();
    let y = Complex64::new(x * c, 0.0);
    let r = (y * y - 1.0).sqrt();
    (y + r, y - r)
}

/// Value of [`constant_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: Complex64,
    /// `x` was within the degeneracy window of `sec φ` and the confluent
    /// limit was used.
    pub limit_taken: bool,
}

/// Half-width of the window around `sec φ` where the eigenvalue form is
/// replaced by its limit.
pub const DEGENERACY_WINDOW: f64 = 1e-6;

/// Top-left entry of `(e^{iφZ} V_0(x))^n` from the eigen-decomposition:
///
/// ```text
/// P = [λ₊ⁿ (r + i x sin φ) + λ₋ⁿ (r − i x sin φ)] / (2r),  r = √(x² cos²φ − 1)
/// ```
///
/// Near `x = sec φ` the confluent form `e^{iφ} x U_{n−1}(x cos φ) − U_{n−2}(x cos φ)`
/// is used instead.
pub fn constant_closed_form(n: usize, phi: f64, x: f64) -> Result<ClosedForm> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let sec = 1.0 / phi.cos();
    if (x - sec).abs() <= DEGENERACY_WINDOW {
        let y = Complex64::new(x * phi.cos(), 0.0);
        let u1 = chebyshev_u(n - 1).eval(y);
        let u2 = if n >= 2 { chebyshev_u(n - 2).eval(y) } else { Complex64::new(0.0, 0.0) };
        let value = Complex64::from_polar(x, phi) * u1 - u2;
        return Ok(ClosedForm { value, limit_taken: true });
    }
    let (lp, lm) = constant_eigenvalues(phi, x);
    let y = Complex64::new(x * phi.cos(), 0.0);
    let r = (y * y - 1.0).sqrt();
    let ixs = Complex64::new(0.0, x * phi.sin());
    let value = (lp.powu(n as u32) * (r + ixs) + lm.powu(n as u32) * (r - ixs)) / (2.0 * r);
    Ok(ClosedForm { value, limit_taken: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `B(φ, x) = (sec(π x cos φ / 2) − 1) / (sec(π cos φ / 2) − 1)`, against `|P|²`.
    Secant,
    /// `1 + x tan φ / √(sec²φ − x²)`, against `|P|`.
    Simple,
    /// `T_n(x cos φ)`, below `|P|` (and `|P|²`) for `x ≥ sec φ`.
    ChebyshevLower,
}

/// Distance from `sec φ` inside which the upper bounds report `+∞`.
pub const POLE_GUARD: f64 = 1e-12;

/// Analytic bounds for the constant-phase protocol.
pub fn bound(kind: BoundKind, n: usize, phi: f64, x: f64) -> Result<f64> {
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::Domain(format!("φ = {phi} must lie in (0, π/2)")));
    }
    let sec = 1.0 / phi.cos();
    match kind {
        BoundKind::Secant | BoundKind::Simple => {
            if !(x >= 1.0 && x < sec + POLE_GUARD) {
                return Err(Error::Domain(format!("x = {x} outside [1, sec φ = {sec})")));
            }
            if x >= sec - POLE_GUARD {
                return Ok(f64::INFINITY);
            }
            Ok(match kind {
                BoundKind::Secant => {
                    let num = 1.0 / (FRAC_PI_2 * x * phi.cos()).cos() - 1.0;
                    let den = 1.0 / (FRAC_PI_2 * phi.cos()).cos() - 1.0;
                    num / den
                }
                _ => 1.0 + x * phi.tan() / (sec * sec - x * x).sqrt(),
            })
        }
        BoundKind::ChebyshevLower => {
            if !(x >= sec - POLE_GUARD) || !x.is_finite() {
                return Err(Error::Domain(format!("x = {x} below sec φ = {sec}")));
            }
            let y = (x * phi.cos()).max(1.0);
            Ok((n as f64 * y.acosh()).cosh())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsymptoteKind {
    LargeX,
    NearCriticalMinus,
    NearCriticalPlus,
}

/// A displayed leading-order expression next to a brute-force value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptote {
    /// The expression as usually displayed.
    pub displayed: f64,
    /// Brute-force matrix-product (or exact bound) value at the same point.
    pub oracle: f64,
    /// Leading term derived from the eigenvalue form, where it differs from
    /// the displayed one.
    pub derived: Option<f64>,
}

/// Leading-order behavior of the constant-phase protocol.
///
/// * `LargeX` (`arg = x`): displayed `xⁿ cosⁿ⁺¹φ / 2ⁿ⁺¹`, derived
///   `(2x cos φ)ⁿ / (2 cos φ)`, oracle `|P(x)|`.
/// * `NearCriticalMinus` (`arg = ε`): displayed
///   `(2/π) sec φ / (ε (sec(π cos φ/2) − 1)) − 1/(sec(π cos φ/2) − 1)`,
///   oracle `B(φ, sec φ − ε)`.
/// * `NearCriticalPlus` (`arg = ε`): displayed `√(1 + n² tan²φ)`, oracle
///   `|P(sec φ + ε)|²`, derived `1 + n² tan²φ`.
pub fn asymptote(kind: AsymptoteKind, n: usize, phi: f64, arg: f64) -> Result<Asymptote> {
    if !(phi > 0.0 && phi < FRAC_PI_2) {
        return Err(Error::Domain(format!("φ = {phi} must lie in (0, π/2)")));
    }
    let sec = 1.0 / phi.cos();
    let protocol = gen_constant(n, phi)?;
    match kind {
        AsymptoteKind::LargeX => {
            let x = arg;
            let c = phi.cos();
            let displayed = x.powi(n as i32) * c.powi(n as i32 + 1) / 2f64.powi(n as i32 + 1);
            let derived = (2.0 * x * c).powi(n as i32) / (2.0 * c);
            let oracle = protocol.eval_at_x(x)?.a11.norm();
            Ok(Asymptote { displayed, oracle, derived: Some(derived) })
        }
        AsymptoteKind::NearCriticalMinus => {
            let eps = arg;
            if !(eps > 0.0 && eps <= sec - 1.0) {
                return Err(Error::Domain(format!("ε = {eps} must lie in (0, sec φ − 1]")));
            }
            let s = 1.0 / (FRAC_PI_2 * phi.cos()).cos() - 1.0;
            let displayed = (2.0 / std::f64::consts::PI) * sec / (eps * s) - 1.0 / s;
            let oracle = bound(BoundKind::Secant, n, phi, sec - eps)?;
            Ok(Asymptote { displayed, oracle, derived: None })
        }
        AsymptoteKind::NearCriticalPlus => {
            let eps = arg;
            if !(eps > 0.0) {
                return Err(Error::Domain(format!("ε = {eps} must be positive")));
            }
            let t2 = (n as f64 * phi.tan()).powi(2);
            let oracle = protocol.eval_at_x(sec + eps)?.a11.norm_sqr();
            Ok(Asymptote { displayed: (1.0 + t2).sqrt(), oracle, derived: Some(1.0 + t2) })
        }
    }
}

/// Which side of the split a violation fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x < split`, value above `g`.
    Upper,
    /// `x ≥ split`, value below `h`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub x: f64,
    pub value: f64,
    pub bound: f64,
    pub side: Side,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakStepReport {
    pub passed: bool,
    /// Largest violation, if any.
    pub worst: Option<Violation>,
    pub checked: usize,
}

/// Tolerance of [`weak_step_check`], scaled by `max(1, |bound|)`.
pub const WEAK_STEP_TOL: f64 = 1e-9;

/// Checks `value ≤ g(x)` for `x < split` and `value ≥ h(x)` for `x ≥ split`.
pub fn weak_step_check(
    samples: &[(f64, f64)],
    g: impl Fn(f64) -> f64,
    h: impl Fn(f64) -> f64,
    split: f64,
) -> Result<WeakStepReport> {
    if samples.windows(2).any(|w| !(w[0].0 <= w[1].0)) {
        return Err(Error::InvalidArgument("samples must be sorted by x".into()));
    }
    let mut worst: Option<(f64, Violation)> = None;
    for &(x, value) in samples {
        let (bound, excess, side) = if x < split {
            let b = g(x);
            (b, value - b, Side::Upper)
        } else {
            let b = h(x);
            (b, b - value, Side::Lower)
        };
        let rel = excess / bound.abs().max(1.0);
        if rel > WEAK_STEP_TOL && worst.as_ref().is_none_or(|(w, _)| rel > *w) {
            worst = Some((rel, Violation { x, value, bound, side }));
        }
    }
    Ok(WeakStepReport { passed: worst.is_none(), worst: worst.map(|w| w.1), checked: samples.len() })
}

/// Requirements on a step response: location `μ`, height `ξ`, half-width `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub mu: f64,
    pub xi: f64,
    pub delta: f64,
}

impl StepSpec {
    pub fn new(mu: f64, xi: f64, delta: f64) -> Result<Self> {
        if !(mu > 1.0 && xi > 0.0 && delta > 0.0 && mu - delta > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "need μ > 1, ξ > 0, δ > 0 and μ − δ > 1 (got μ = {mu}, ξ = {xi}, δ = {delta})"
            )));
        }
        Ok(StepSpec { mu, xi, delta })
    }

    /// `arcsec μ`.
    pub fn phase(&self) -> f64 {
        (1.0 / self.mu).acos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinLength {
    pub n: usize,
    /// The bound before rounding up.
    pub bound: f64,
    /// `μ ξ / δ`.
    pub scaling: f64,
}

/// `⌈δ^{−1/2} √(ξ cot φ + csc φ / (sec(π cos φ / 2) − 1))⌉` with `φ = arcsec μ`.
pub fn min_length_estimate(spec: &StepSpec, phi: f64) -> Result<MinLength> {
    if (phi - spec.phase()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("φ = {phi} must equal arcsec μ = {}", spec.phase())));
    }
    if !(1e-3..=FRAC_PI_2 - 1e-3).contains(&phi) {
        return Err(Error::Domain(format!("φ = {phi} too close to 0 or π/2")));
    }
    let s = 1.0 / (FRAC_PI_2 * phi.cos()).cos() - 1.0;
    let inner = spec.xi / phi.tan() + 1.0 / (phi.sin() * s);
    let bound = inner.sqrt() / spec.delta.sqrt();
    Ok(MinLength { n: bound.ceil() as usize, bound, scaling: spec.mu * spec.xi / spec.delta })
}
