//! Polynomials of definite parity in the Chebyshev-T basis, and the
//! `(P, Q)` transfer pairs of boost protocols.
//!
//! A protocol of `n` boosts evaluates to
//!
//! ```text
//! [[ P(x),        Q(x)·s ],
//!  [ conj(Q)(x)·s, conj(P)(x) ]],   s = sqrt(x² − 1)
//! ```
//!
//! with `deg P ≤ n`, `deg Q ≤ n − 1`, `P` of parity `n mod 2` and `Q` of the
//! opposite parity. Conjugation acts on coefficients, which is the pointwise
//! conjugate for real `x`.

use std::fmt;

use num_complex::{Complex, Complex64};
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, PhaseList};
use crate::error::{Error, Result};

/// Relative size below which trailing coefficients are dropped.
pub const TRIM_TOL: f64 = 1e-13;

/// Tolerance on wrong-parity coefficients accepted by [`ParityPoly::new`].
pub const PARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    pub fn of_degree(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Parity of a product.
    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::Mixed => Parity::Mixed,
        }
    }

    /// Whether index `k` may carry a nonzero coefficient.
    pub fn admits(self, k: usize) -> bool {
        match self {
            Parity::Even => k.is_multiple_of(2),
            Parity::Odd => k % 2 == 1,
            Parity::Mixed => true,
        }
    }
}

/// Arithmetic on raw Chebyshev coefficient vectors, generic over the real
/// scalar so layer stripping can run in extended precision.
pub(crate) mod cheb {
    use super::*;

    pub fn zero<T: Float>() -> Complex<T> {
        Complex::new(T::zero(), T::zero())
    }

    pub fn add<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![zero(); a.len().max(b.len())];
        for (k, v) in a.iter().enumerate() {
            out[k] = out[k] + v;
        }
        for (k, v) in b.iter().enumerate() {
            out[k] = out[k] + v;
        }
        out
    }

    pub fn sub<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![zero(); a.len().max(b.len())];
        for (k, v) in a.iter().enumerate() {
            out[k] = out[k] + v;
        }
        for (k, v) in b.iter().enumerate() {
            out[k] = out[k] - v;
        }
        out
    }

    pub fn scale<T: Float>(a: &[Complex<T>], s: Complex<T>) -> Vec<Complex<T>> {
        a.iter().map(|v| *v * s).collect()
    }

    /// `T_i T_j = (T_{i+j} + T_{|i−j|}) / 2`.
    pub fn mul<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let half = T::from(0.5).unwrap();
        let mut out = vec![zero(); a.len() + b.len() - 1];
        for (i, ai) in a.iter().enumerate() {
            if ai.re == T::zero() && ai.im == T::zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                let p = (*ai * *bj).scale(half);
                out[i + j] = out[i + j] + p;
                let d = i.abs_diff(j);
                out[d] = out[d] + p;
            }
        }
        out
    }

    /// Multiplication by `x`.
    pub fn mul_x<T: Float>(a: &[Complex<T>]) -> Vec<Complex<T>> {
        let half = T::from(0.5).unwrap();
        let mut out = vec![zero(); a.len() + 1];
        for (k, v) in a.iter().enumerate() {
            if k == 0 {
                out[1] = out[1] + v;
            } else {
                out[k + 1] = out[k + 1] + v.scale(half);
                out[k - 1] = out[k - 1] + v.scale(half);
            }
        }
        out
    }

    /// Multiplication by `x² − 1 = (T_2 − T_0) / 2`.
    pub fn mul_x2m1<T: Float>(a: &[Complex<T>]) -> Vec<Complex<T>> {
        let xa = mul_x(&mul_x(a));
        sub(&xa, a)
    }

    pub fn conj<T: Float>(a: &[Complex<T>]) -> Vec<Complex<T>> {
        a.iter().map(|v| v.conj()).collect()
    }

    /// Clenshaw summation of `Σ c_k T_k(x)`.
    pub fn eval<T: Float>(a: &[Complex<T>], x: Complex<T>) -> Complex<T> {
        let mut b1 = zero();
        let mut b2 = zero();
        let two_x = x + x;
        for k in (1..a.len()).rev() {
            let b0 = a[k] + two_x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        match a.first() {
            Some(c0) => *c0 + x * b1 - b2,
            None => zero(),
        }
    }

    /// Leading coefficient in the monomial basis of the degree-`d` part.
    pub fn lead_monomial<T: Float>(a: &[Complex<T>], d: usize) -> Complex<T> {
        let c = a.get(d).copied().unwrap_or_else(zero);
        if d == 0 {
            c
        } else {
            c.scale(T::from(2.0).unwrap().powi(d as i32 - 1))
        }
    }
}

/// A complex polynomial in the Chebyshev-T basis with a declared parity.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityPoly {
    coeffs: Vec<Complex64>,
    parity: Parity,
}

fn max_abs(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl ParityPoly {
    /// Validates parity: coefficients of the wrong parity must be below
    /// `PARITY_TOL · max(1, max|c_k|)`. They are then zeroed and trailing
    /// noise is trimmed.
    pub fn new(coeffs: Vec<Complex64>, parity: Parity) -> Result<Self> {
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let scale = max_abs(&coeffs).max(1.0);
        for (k, z) in coeffs.iter().enumerate() {
            if !parity.admits(k) && z.norm() > PARITY_TOL * scale {
                return Err(Error::Parity(format!(
                    "coefficient {k} = {z} is nonzero in a {parity:?} polynomial"
                )));
            }
        }
        Ok(ParityPoly::from_raw(coeffs, parity))
    }

    /// Real coefficients.
    pub fn from_real(coeffs: &[f64], parity: Parity) -> Result<Self> {
        ParityPoly::new(coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect(), parity)
    }

    /// Infers the tightest parity the coefficients satisfy.
    pub fn infer(coeffs: Vec<Complex64>) -> Result<Self> {
        let scale = max_abs(&coeffs).max(1.0);
        let tiny = |z: &Complex64| z.norm() <= PARITY_TOL * scale;
        let even_ok = coeffs.iter().skip(1).step_by(2).all(tiny);
        let odd_ok = coeffs.iter().step_by(2).all(tiny);
        let parity = if even_ok {
            Parity::Even
        } else if odd_ok {
            Parity::Odd
        } else {
            Parity::Mixed
        };
        ParityPoly::new(coeffs, parity)
    }

    /// Trusts the caller on parity; zeroes wrong-parity slots and trims.
    pub(crate) fn from_raw(mut coeffs: Vec<Complex64>, parity: Parity) -> Self {
        for (k, z) in coeffs.iter_mut().enumerate() {
            if !parity.admits(k) {
                *z = Complex64::new(0.0, 0.0);
            }
        }
        let mut p = ParityPoly { coeffs, parity };
        p.trim(TRIM_TOL);
        p
    }

    pub fn zero(parity: Parity) -> Self {
        ParityPoly { coeffs: vec![Complex64::new(0.0, 0.0)], parity }
    }

    pub fn one() -> Self {
        ParityPoly { coeffs: vec![Complex64::new(1.0, 0.0)], parity: Parity::Even }
    }

    /// The polynomial `x`.
    pub fn x() -> Self {
        chebyshev_t(1)
    }

    /// Converts monomial coefficients `a_0 + a_1 x + …`.
    pub fn from_monomial(a: &[Complex64], parity: Parity) -> Result<Self> {
        // Horner in Chebyshev arithmetic.
        let mut acc: Vec<Complex64> = Vec::new();
        for &ak in a.iter().rev() {
            acc = cheb::mul_x(&acc);
            if acc.is_empty() {
                acc.push(ak);
            } else {
                acc[0] += ak;
            }
        }
        if acc.is_empty() {
            acc.push(Complex64::new(0.0, 0.0));
        }
        ParityPoly::new(acc, parity)
    }

    /// Monomial coefficients `a_0, a_1, …`. Ill-conditioned at high degree.
    pub fn to_monomial(&self) -> Vec<Complex64> {
        // T_{k+1} = 2x T_k − T_{k−1} on monomial vectors.
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        let mut t_prev = vec![0.0; n];
        let mut t_cur = vec![0.0; n];
        t_cur[0] = 1.0;
        for (k, ck) in self.coeffs.iter().enumerate() {
            if k == 1 {
                t_prev = t_cur.clone();
                t_cur = vec![0.0; n];
                t_cur[1] = 1.0;
            } else if k > 1 {
                let mut next = vec![0.0; n];
                for j in 0..n - 1 {
                    next[j + 1] += 2.0 * t_cur[j];
                }
                for j in 0..n {
                    next[j] -= t_prev[j];
                }
                t_prev = std::mem::replace(&mut t_cur, next);
            }
            for j in 0..n {
                out[j] += ck * t_cur[j];
            }
        }
        out
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    /// Chebyshev coefficient `k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        max_abs(&self.coeffs)
    }

    /// Drops trailing coefficients below `rel_tol · max|c_k|`.
    pub fn trim(&mut self, rel_tol: f64) {
        let cut = rel_tol * max_abs(&self.coeffs);
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|z| z.norm() <= cut) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(Complex64::new(0.0, 0.0));
        }
    }

    /// Keeps coefficients `0..=degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(degree + 1);
        ParityPoly::from_raw(c, self.parity)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        cheb::eval(&self.coeffs, x)
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.eval(Complex64::new(x, 0.0))
    }

    /// Coefficientwise conjugate.
    pub fn conj(&self) -> Self {
        ParityPoly { coeffs: cheb::conj(&self.coeffs), parity: self.parity }
    }

    pub fn re(&self) -> Self {
        ParityPoly::from_raw(self.coeffs.iter().map(|z| Complex64::new(z.re, 0.0)).collect(), self.parity)
    }

    pub fn im(&self) -> Self {
        ParityPoly::from_raw(self.coeffs.iter().map(|z| Complex64::new(z.im, 0.0)).collect(), self.parity)
    }

    /// True when every imaginary part is at most `tol · max(1, max|c_k|)`.
    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs_coeff().max(1.0);
        self.coeffs.iter().all(|z| z.im.abs() <= tol * scale)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ParityPoly::from_raw(cheb::scale(&self.coeffs, s), self.parity)
    }

    fn sum_parity(&self, other: &Self) -> Parity {
        if self.is_zero() {
            other.parity
        } else if other.is_zero() || self.parity == other.parity {
            self.parity
        } else {
            Parity::Mixed
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        ParityPoly::from_raw(cheb::add(&self.coeffs, &other.coeffs), self.sum_parity(other))
    }

    pub fn sub(&self, other: &Self) -> Self {
        ParityPoly::from_raw(cheb::sub(&self.coeffs, &other.coeffs), self.sum_parity(other))
    }

    pub fn mul(&self, other: &Self) -> Self {
        ParityPoly::from_raw(cheb::mul(&self.coeffs, &other.coeffs), self.parity.times(other.parity))
    }

    pub fn mul_x(&self) -> Self {
        ParityPoly::from_raw(cheb::mul_x(&self.coeffs), self.parity.flip())
    }

    /// Multiplication by `x² − 1`.
    pub fn mul_x2m1(&self) -> Self {
        ParityPoly::from_raw(cheb::mul_x2m1(&self.coeffs), self.parity)
    }

    /// Derivative in the Chebyshev basis.
    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return ParityPoly::zero(self.parity.flip());
        }
        let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + self.coeffs[k] * (2.0 * k as f64);
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        ParityPoly::from_raw(d, self.parity.flip())
    }

    /// Leading coefficient in the monomial basis.
    pub fn lead_monomial(&self) -> Complex64 {
        cheb::lead_monomial(&self.coeffs, self.degree())
    }

    /// Largest coefficient distance to `other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        max_abs(&cheb::sub(&self.coeffs, &other.coeffs))
    }
}

impl fmt::Display for ParityPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, z) in self.coeffs.iter().enumerate() {
            if z.norm() == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if z.im == 0.0 {
                write!(f, "{}·T{k}", z.re)?;
            } else {
                write!(f, "({z})·T{k}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebKind {
    T,
    U,
}

/// `T_n`, in its own basis.
pub fn chebyshev_t(n: usize) -> ParityPoly {
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    c[n] = Complex64::new(1.0, 0.0);
    ParityPoly { coeffs: c, parity: Parity::of_degree(n) }
}

/// `U_n = 2(T_n + T_{n−2} + …)`, with the `T_0` term counted once.
pub fn chebyshev_u(n: usize) -> ParityPoly {
    let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in (0..=n).rev().step_by(2) {
        c[k] = Complex64::new(if k == 0 { 1.0 } else { 2.0 }, 0.0);
    }
    ParityPoly { coeffs: c, parity: Parity::of_degree(n) }
}

pub fn chebyshev(kind: ChebKind, n: usize) -> ParityPoly {
    match kind {
        ChebKind::T => chebyshev_t(n),
        ChebKind::U => chebyshev_u(n),
    }
}

/// `Σ c_k T_k(x)` by Clenshaw.
pub fn eval_poly(p: &ParityPoly, x: Complex64) -> Complex64 {
    p.eval(x)
}

/// The polynomial pair of a boost protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPair {
    pub p: ParityPoly,
    pub q: ParityPoly,
    /// Number of boosts `n`.
    pub n: usize,
}

impl TransferPair {
    /// Checks degree and parity bounds.
    pub fn new(p: ParityPoly, q: ParityPoly, n: usize) -> Result<Self> {
        let tp = TransferPair { p, q, n };
        tp.check_shape()?;
        Ok(tp)
    }

    /// The empty protocol: `P = 1`, `Q = 0`.
    pub fn identity() -> Self {
        TransferPair { p: ParityPoly::one(), q: ParityPoly::zero(Parity::Odd), n: 0 }
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.n;
        let want_p = Parity::of_degree(n);
        if self.p.degree() > n || (self.p.parity != want_p && !self.p.is_zero()) {
            return Err(Error::Internal(format!(
                "P has degree {} and parity {:?}, expected degree <= {n} and {want_p:?}",
                self.p.degree(),
                self.p.parity
            )));
        }
        let q_ok = self.q.is_zero() || (self.q.degree() < n.max(1) && self.q.parity == want_p.flip());
        if !q_ok {
            return Err(Error::Internal(format!(
                "Q has degree {} and parity {:?} for n = {n}",
                self.q.degree(),
                self.q.parity
            )));
        }
        Ok(())
    }

    /// `e^{iα}` global phase on the off-diagonal: `Q ↦ e^{iα} Q`.
    pub fn phase_shift(&self, alpha: f64) -> Self {
        TransferPair { p: self.p.clone(), q: self.q.scale(Complex64::from_polar(1.0, alpha)), n: self.n }
    }

    /// Right multiplication by `diag(e^{iσ}, e^{−iσ})`.
    pub fn with_frame(&self, sigma: f64) -> Self {
        let e = Complex64::from_polar(1.0, sigma);
        TransferPair { p: self.p.scale(e), q: self.q.scale(e.conj()), n: self.n }
    }

    /// The SU(1,1) matrix at `x ≥ 1`.
    pub fn matrix_at(&self, x: f64) -> Mat2 {
        let s = ((x - 1.0) * (x + 1.0)).max(0.0).sqrt();
        let p = self.p.eval_real(x);
        let q = self.q.eval_real(x) * s;
        Mat2::new(p, q, q.conj(), p.conj())
    }
}

/// `V_φ` as a pair: `P = x`, `Q = e^{iφ}`.
pub fn boost_pair(phi: f64) -> TransferPair {
    TransferPair {
        p: ParityPoly::x(),
        q: ParityPoly { coeffs: vec![Complex64::from_polar(1.0, phi)], parity: Parity::Even },
        n: 1,
    }
}

/// Product `a · b` as pairs:
/// `P = P_a P_b + (x² − 1) Q_a conj(Q_b)`, `Q = P_a Q_b + Q_a conj(P_b)`.
pub fn compose_pair(a: &TransferPair, b: &TransferPair) -> Result<TransferPair> {
    let p = a.p.mul(&b.p).add(&a.q.mul(&b.q.conj()).mul_x2m1());
    let q = a.p.mul(&b.q).add(&a.q.mul(&b.p.conj()));
    TransferPair::new(p, q, a.n + b.n)
}

pub fn protocol_to_pair(phases: &PhaseList) -> TransferPair {
    let mut acc = TransferPair::identity();
    for &phi in phases.iter() {
        acc = compose_pair(&acc, &boost_pair(phi)).expect("pair shape is preserved by composition");
    }
    acc
}

/// `P·conj(P) − (x² − 1)·Q·conj(Q) − 1`.
pub fn identity_residual(tp: &TransferPair) -> ParityPoly {
    let pp = tp.p.mul(&tp.p.conj());
    let qq = tp.q.mul(&tp.q.conj()).mul_x2m1();
    pp.sub(&qq).sub(&ParityPoly::one())
}

/// Largest coefficient of [`identity_residual`], relative to
/// `max(1, max coefficient of P·conj(P))`.
pub fn identity_defect(tp: &TransferPair) -> f64 {
    let scale = tp.p.mul(&tp.p.conj()).max_abs_coeff().max(1.0);
    identity_residual(tp).max_abs_coeff() / scale
}
