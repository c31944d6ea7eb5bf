//! From polynomial data back to phases.
//!
//! Completion takes the real parts `(P, Q)` of a transfer pair and supplies
//! imaginary parts `(B, D)` with
//!
//! ```text
//! F := P² − (x² − 1) Q² − 1 = (x² − 1) D² − B²
//! ```
//!
//! so that `P + iB`, `Q + iD` satisfy the determinant identity. The split is a
//! Fejér–Riesz factorization of `−F` on the unit circle of the Joukowski
//! variable `w`, `x = (w + 1/w)/2`. Layer stripping then peels boosts off the
//! right end of the completed pair.

use num_complex::{Complex, Complex64};
use num_traits::Float;
use twofloat::TwoFloat;

use crate::algebra::PhaseList;
use crate::error::{Error, Result};
use crate::polyring::{cheb, identity_defect, protocol_to_pair, Parity, ParityPoly, TransferPair};
use crate::roots::chebyshev_roots;

/// Grid size for the sign checks on `[−1, 1]`.
const CHECK_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    /// Double precision up to 30 layers, double-double beyond.
    #[default]
    Auto,
    Double,
    /// Double-double, about 106 significand bits.
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub precision: Precision,
    /// Distance below which two real roots are treated as one double root.
    pub pairing_tol: f64,
    /// Relative size allowed for the coefficients that must vanish after
    /// each strip.
    pub strip_tol: f64,
    /// Upper end of the grid on which the hyperbolic margin is reported.
    pub x_max: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { precision: Precision::Auto, pairing_tol: 1e-7, strip_tol: 1e-6, x_max: 5f64.cosh() }
    }
}

/// Real parts of a pair to be completed.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionInput {
    p_real: ParityPoly,
    q_real: ParityPoly,
    n: usize,
}

impl CompletionInput {
    /// Checks reality, degree bounds and parities.
    pub fn new(p_real: ParityPoly, q_real: ParityPoly, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("completion needs n >= 1".into()));
        }
        for (name, poly) in [("P", &p_real), ("Q", &q_real)] {
            if !poly.is_real(1e-12) {
                return Err(Error::InvalidArgument(format!("{name} must have real coefficients")));
            }
        }
        let want = Parity::of_degree(n);
        if p_real.degree() > n || (p_real.parity() != want && !p_real.is_zero()) {
            return Err(Error::Parity(format!("P must have degree <= {n} and {want:?} parity")));
        }
        if !q_real.is_zero() && (q_real.degree() + 1 > n || q_real.parity() != want.flip()) {
            return Err(Error::Parity(format!(
                "Q must have degree <= {} and {:?} parity",
                n - 1,
                want.flip()
            )));
        }
        Ok(CompletionInput { p_real: p_real.re(), q_real: q_real.re(), n })
    }

    /// Real parts of an existing pair.
    pub fn from_pair(tp: &TransferPair) -> Result<Self> {
        CompletionInput::new(tp.p.re(), tp.q.re(), tp.n)
    }

    pub fn p_real(&self) -> &ParityPoly {
        &self.p_real
    }

    pub fn q_real(&self) -> &ParityPoly {
        &self.q_real
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Where the two sign conditions on `F` are tightest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// Largest `F(x)` on `[−1, 1]`; completion needs it `≤ 0`.
    pub circle_worst: (f64, f64),
    /// Smallest `F(x)` on `[1, x_max]`.
    pub hyperbolic_margin: (f64, f64),
}

impl Feasibility {
    pub fn completable(&self) -> bool {
        self.circle_worst.1 <= 1e-10
    }
}

fn grid(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

/// `F = P² − (x² − 1) Q² − 1` without any sign checks.
pub fn f_polynomial(input: &CompletionInput) -> ParityPoly {
    let p2 = input.p_real.mul(&input.p_real);
    let q2 = input.q_real.mul(&input.q_real).mul_x2m1();
    p2.sub(&q2).sub(&ParityPoly::one())
}

/// Sign diagnostics of `F` on `[−1, 1]` and `[1, x_max]`.
pub fn feasibility(f: &ParityPoly, x_max: f64) -> Feasibility {
    let at = |x: f64| f.eval_real(x).re;
    let circle_worst = grid(-1.0, 1.0, CHECK_POINTS)
        .map(|x| (x, at(x)))
        .fold((f64::NAN, f64::NEG_INFINITY), |m, v| if v.1 > m.1 { v } else { m });
    let hyperbolic_margin = grid(1.0, x_max.max(1.0 + 1e-9), CHECK_POINTS)
        .map(|x| (x, at(x)))
        .fold((f64::NAN, f64::INFINITY), |m, v| if v.1 < m.1 { v } else { m });
    Feasibility { circle_worst, hyperbolic_margin }
}

/// Builds `F` and checks that it is completable: `F ≤ 0` on `[−1, 1]`,
/// which is `Re P² + (1 − x²) Re Q² ≤ 1` there.
#[allow(non_snake_case)]
pub fn build_F(input: &CompletionInput) -> Result<ParityPoly> {
    let f = f_polynomial(input);
    let feas = feasibility(&f, SynthesisOptions::default().x_max);
    if !feas.completable() {
        let (x, v) = feas.circle_worst;
        return Err(Error::NotCompletable(format!(
            "P² + (1 − x²)Q² exceeds 1 by {v:e} at x = {x}"
        )));
    }
    Ok(f)
}

/// The split `F = (x² − 1) D² − B²` with real `B`, `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicSplit {
    pub b: ParityPoly,
    pub d: ParityPoly,
}

impl HyperbolicSplit {
    /// `(x² − 1) D² − B²`.
    pub fn product(&self) -> ParityPoly {
        self.d.mul(&self.d).mul_x2m1().sub(&self.b.mul(&self.b))
    }
}

fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Picks the root of `v + 1/v = 2τ` inside the closed unit disk.
///
/// The outer root is formed without cancellation and inverted, so far-away
/// `τ` keep full relative accuracy.
fn inner_branch(tau: Complex64) -> Complex64 {
    let s = (tau * tau - 1.0).sqrt();
    let (a, b) = (tau + s, tau - s);
    1.0 / if a.norm() >= b.norm() { a } else { b }
}

/// Splits an even `F` as `(x² − 1) D² − B²`, with `B` of the parity of `n`
/// and `D` of the opposite parity.
///
/// The gauge is fixed by keeping every Joukowski root inside the unit disk
/// and making the top Laurent coefficient positive.
#[allow(non_snake_case)]
pub fn factor_F(f: &ParityPoly, n: usize, opts: &SynthesisOptions) -> Result<HyperbolicSplit> {
    let want_b = Parity::of_degree(n);
    if !f.is_real(1e-12) {
        return Err(Error::InvalidArgument("F must be real".into()));
    }
    if f.parity() == Parity::Odd || (f.parity() == Parity::Mixed && !f.is_zero()) {
        return Err(Error::Parity("F must be even".into()));
    }
    let mut fc: Vec<f64> = f.coeffs().iter().map(|z| z.re).collect();
    let scale = fc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale <= 1e-13 {
        return Ok(HyperbolicSplit { b: ParityPoly::zero(want_b), d: ParityPoly::zero(want_b.flip()) });
    }
    while fc.len() > 1 && fc.last().is_some_and(|v| v.abs() <= 1e-13 * scale) {
        fc.pop();
    }
    // F(x) = Σ f_{2j} T_j(t), t = 2x² − 1.
    let ft: Vec<f64> = fc.iter().step_by(2).copied().collect();
    let m = ft.len() - 1;
    if m > n {
        return Err(Error::FactorizationFailed(format!("F has degree {} > 2n = {}", 2 * m, 2 * n)));
    }

    let mut vs: Vec<Complex64> = Vec::with_capacity(m);
    let mut on_circle: Vec<f64> = Vec::new();
    if m > 0 {
        for tau in chebyshev_roots(&ft)? {
            let snap = opts.pairing_tol;
            if (tau - 1.0).norm() < snap {
                vs.push(c64(1.0));
            } else if (tau + 1.0).norm() < snap {
                vs.push(c64(-1.0));
            } else if tau.im.abs() < snap && tau.re.abs() < 1.0 {
                on_circle.push(tau.re);
            } else {
                vs.push(inner_branch(tau));
            }
        }
    }
    on_circle.sort_by(f64::total_cmp);
    if on_circle.len() % 2 == 1 {
        return Err(Error::FactorizationFailed(format!(
            "unpaired sign change of F on (−1, 1) near x² = {}",
            (on_circle[on_circle.len() / 2] + 1.0) / 2.0
        )));
    }
    for pair in on_circle.chunks(2) {
        if (pair[0] - pair[1]).abs() > opts.pairing_tol.sqrt().max(opts.pairing_tol) {
            return Err(Error::FactorizationFailed(format!(
                "simple roots of F at x² = {} and {} inside (−1, 1)",
                (pair[0] + 1.0) / 2.0,
                (pair[1] + 1.0) / 2.0
            )));
        }
        let alpha = (0.5 * (pair[0] + pair[1])).clamp(-1.0, 1.0).acos();
        vs.push(Complex64::from_polar(1.0, alpha));
        vs.push(Complex64::from_polar(1.0, -alpha));
    }

    // −F = a Π (t − t_i) and t − t_i = (v − v_i)(v_i v − 1) / (2 v_i v), so
    // L(w) = c w^{−m} Π (v − v_i) with c² = a (−1)^m / (2^m Π v_i).
    let a = if m == 0 { -ft[0] } else { -ft[m] * 2f64.powi(m as i32 - 1) };
    let prod_v: Complex64 = vs.iter().product();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let c2 = c64(a * sign) / (2f64.powi(m as i32) * prod_v);
    if c2.re <= 0.0 || c2.im.abs() > 1e-6 * c2.norm() {
        return Err(Error::FactorizationFailed(format!(
            "−F is not nonnegative on [−1, 1] (scale² = {c2})"
        )));
    }
    let c = c2.re.sqrt();

    // Monic expansion of Π (v − v_i), ascending powers of v.
    let mut poly = vec![c64(1.0)];
    for v in &vs {
        let mut next = vec![c64(0.0); poly.len() + 1];
        for (j, pj) in poly.iter().enumerate() {
            next[j + 1] += pj;
            next[j] -= pj * v;
        }
        poly = next;
    }

    let shift: i64 = if (m + n) % 2 == 1 { if m >= 1 { -1 } else { 1 } } else { 0 };
    let top = m as i64 + shift.max(0);
    if top > n as i64 {
        return Err(Error::FactorizationFailed("Laurent degree exceeds n".into()));
    }
    // Laurent coefficient of w^k, k = 2j − m + shift.
    let mut lplus = vec![0.0; n + 2];
    let mut lminus = vec![0.0; n + 2];
    for (j, pj) in poly.iter().enumerate() {
        let k = 2 * j as i64 - m as i64 + shift;
        let l = c * pj.re;
        if k >= 0 {
            lplus[k as usize] += l;
        } else {
            lminus[(-k) as usize] += l;
        }
    }
    // w^k + w^{−k} = 2 T_k,  w^k − w^{−k} = 2 s U_{k−1}.
    let mut b = vec![c64(0.0); n + 1];
    let mut d = vec![c64(0.0); n.max(1)];
    b[0] = c64(lplus[0]);
    for k in 1..=n {
        b[k] = c64(lplus[k] + lminus[k]);
        let dk = lplus[k] - lminus[k];
        if dk != 0.0 {
            for j in (0..k).rev().step_by(2) {
                d[j] += c64(if j == 0 { dk } else { 2.0 * dk });
            }
        }
    }
    let split = HyperbolicSplit {
        b: ParityPoly::new(b, want_b)?,
        d: ParityPoly::new(d, want_b.flip())?,
    };
    let resid = split.product().max_coeff_diff(f) / scale.max(1.0);
    if resid > 1e-8 {
        return Err(Error::FactorizationFailed(format!("split residual {resid:e}")));
    }
    Ok(split)
}

/// Plain Fejér–Riesz factor: `F = G · conj(G)` for a real `F ≥ 0` on ℝ.
///
/// Real roots must have even multiplicity; of each conjugate pair the root
/// with nonnegative imaginary part goes to `G`.
pub fn fejer_riesz(f: &ParityPoly, pairing_tol: f64) -> Result<ParityPoly> {
    if !f.is_real(1e-12) {
        return Err(Error::InvalidArgument("F must be real".into()));
    }
    if f.max_abs_coeff() <= 1e-13 {
        return Ok(ParityPoly::zero(Parity::Even));
    }
    let fc: Vec<f64> = f.coeffs().iter().map(|z| z.re).collect();
    let roots = chebyshev_roots(&fc)?;
    let deg = roots.len();
    let lead = if deg == 0 { fc[0] } else { fc[deg] * 2f64.powi(deg as i32 - 1) };
    if lead <= 0.0 {
        return Err(Error::FactorizationFailed("leading coefficient of F is not positive".into()));
    }
    let mut real: Vec<f64> = Vec::new();
    let mut chosen: Vec<Complex64> = Vec::new();
    for r in roots {
        if r.im.abs() < pairing_tol {
            real.push(r.re);
        } else if r.im > 0.0 {
            chosen.push(r);
        }
    }
    real.sort_by(f64::total_cmp);
    if real.len() % 2 == 1 {
        return Err(Error::FactorizationFailed(format!("unpaired real root near {}", real[real.len() / 2])));
    }
    for pair in real.chunks(2) {
        if (pair[0] - pair[1]).abs() > pairing_tol.sqrt().max(pairing_tol) {
            return Err(Error::FactorizationFailed(format!("simple real roots {} and {}", pair[0], pair[1])));
        }
        chosen.push(c64(0.5 * (pair[0] + pair[1])));
    }
    if 2 * chosen.len() != deg {
        return Err(Error::FactorizationFailed("complex roots are not in conjugate pairs".into()));
    }
    let mut g = vec![c64(lead.sqrt())];
    for r in &chosen {
        g = cheb::mul(&g, &[-r, c64(1.0)]);
    }
    ParityPoly::infer(g)
}

/// Completes real parts to a full pair: `P̃ = P + iB`, `Q̃ = Q + iD`.
pub fn complete_pair(input: &CompletionInput) -> Result<TransferPair> {
    complete_pair_with(input, &SynthesisOptions::default())
}

pub fn complete_pair_with(input: &CompletionInput, opts: &SynthesisOptions) -> Result<TransferPair> {
    let f = build_F(input)?;
    let split = factor_F(&f, input.n, opts)?;
    let i = Complex64::new(0.0, 1.0);
    let p = input.p_real.add(&split.b.scale(i));
    let q = input.q_real.add(&split.d.scale(i));
    let tp = TransferPair::new(p, q, input.n)?;
    let defect = identity_defect(&tp);
    if defect > 1e-8 {
        return Err(Error::FactorizationFailed(format!("completed pair has identity defect {defect:e}")));
    }
    Ok(tp)
}

/// Recovers the boost phases of a pair by peeling the last boost each step.
///
/// The last phase is read from `e^{iφ} = lead(Q) / lead(P)` in the monomial
/// basis, and `V_φ^{−1}` is applied on the right:
/// `P' = xP − e^{−iφ}(x² − 1)Q`, `Q' = xQ − e^{iφ}P`.
pub fn layer_strip(tp: &TransferPair) -> Result<PhaseList> {
    layer_strip_with(tp, &SynthesisOptions::default())
}

pub fn layer_strip_with(tp: &TransferPair, opts: &SynthesisOptions) -> Result<PhaseList> {
    let defect = identity_defect(tp);
    if defect > 1e-8 {
        return Err(Error::InvalidArgument(format!("pair violates the determinant identity ({defect:e})")));
    }
    if tp.n == 0 {
        return Err(Error::EmptyPhaseList);
    }
    let extended = match opts.precision {
        Precision::Auto => tp.n > 30,
        Precision::Double => false,
        Precision::Extended => true,
    };
    let phases = if extended {
        let lift = |p: &ParityPoly| -> Vec<Complex<TwoFloat>> {
            p.coeffs().iter().map(|z| Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))).collect()
        };
        strip_generic(lift(&tp.p), lift(&tp.q), tp.n, opts.strip_tol)?
    } else {
        strip_generic(tp.p.coeffs().to_vec(), tp.q.coeffs().to_vec(), tp.n, opts.strip_tol)?
    };
    PhaseList::new(phases)
}

fn to_f64<T: Float>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

fn norm<T: Float>(z: &Complex<T>) -> T {
    z.re.hypot(z.im)
}

fn strip_generic<T: Float>(mut p: Vec<Complex<T>>, mut q: Vec<Complex<T>>, n: usize, tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for k in (1..=n).rev() {
        let lp = cheb::lead_monomial(&p, k);
        let lq = cheb::lead_monomial(&q, k - 1);
        if to_f64(norm(&lp)) == 0.0 || to_f64(norm(&lq)) == 0.0 {
            return Err(Error::StrippingStalled {
                remaining: k,
                reason: "leading coefficient vanishes".into(),
            });
        }
        let ratio = lq / lp;
        let e = ratio.unscale(norm(&ratio));
        out.push(to_f64(e.im).atan2(to_f64(e.re)));

        let xp = cheb::mul_x(&p);
        let sq = cheb::scale(&cheb::mul_x2m1(&q), e.conj());
        let p_next = cheb::sub(&xp, &sq);
        let q_next = cheb::sub(&cheb::mul_x(&q), &cheb::scale(&p, e));

        let scale = p_next.iter().chain(q_next.iter()).map(|z| to_f64(norm(z))).fold(1.0f64, f64::max);
        let leak = p_next
            .iter()
            .skip(k)
            .chain(q_next.iter().skip(k - 1))
            .map(|z| to_f64(norm(z)))
            .fold(0.0f64, f64::max);
        if leak > tol * scale {
            return Err(Error::StrippingStalled {
                remaining: k,
                reason: format!("degree did not drop (leftover {:e})", leak / scale),
            });
        }
        p = p_next;
        p.truncate(k);
        q = q_next;
        q.truncate(k.saturating_sub(1));
    }
    // All that is left must be P = 1: every boost product is the identity at x = 1.
    let rest = p.iter().enumerate().map(|(j, z)| {
        let target = if j == 0 { T::one() } else { T::zero() };
        to_f64(norm(&(*z - Complex::new(target, T::zero()))))
    });
    let resid = rest.fold(0.0f64, f64::max);
    if resid > tol.sqrt() {
        return Err(Error::StrippingStalled {
            remaining: 0,
            reason: format!("residual frame is not the identity (|P − 1| = {resid:e})"),
        });
    }
    out.reverse();
    Ok(out)
}

/// Outcome of [`synthesize_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    /// Phases of the SU(1,1) phased-boost protocol.
    pub phases: PhaseList,
    /// The same protocol in the SU(2) picture (every phase shifted by −π/2).
    pub su2_phases: PhaseList,
    /// Largest coefficient difference between `Re P` of the protocol and the target.
    pub max_deviation: f64,
}

/// Phases whose boost protocol has `Re P` equal to `target`.
pub fn synthesize(target: &ParityPoly) -> Result<PhaseList> {
    synthesize_with(target, &SynthesisOptions::default()).map(|s| s.phases)
}

/// Completes in the SU(2) picture (`A + iB`, `−iD`), strips, then shifts
/// every phase by `π/2`.
///
/// The target must be real with definite parity, satisfy `|A| ≤ 1` on
/// `[−1, 1]`, and have `A(1) = 1` since every boost product is the identity
/// at `x = 1`.
pub fn synthesize_with(target: &ParityPoly, opts: &SynthesisOptions) -> Result<Synthesis> {
    if !target.is_real(1e-12) {
        return Err(Error::InvalidTarget("coefficients must be real".into()));
    }
    if target.parity() == Parity::Mixed {
        return Err(Error::InvalidTarget("target must have definite parity".into()));
    }
    let n = target.degree();
    if n == 0 {
        return Err(Error::InvalidTarget("target must have degree >= 1".into()));
    }
    if let Some((x, value)) = grid(-1.0, 1.0, CHECK_POINTS)
        .map(|x| (x, target.eval_real(x).re.abs()))
        .filter(|(_, v)| *v > 1.0 + 1e-10)
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        return Err(Error::TargetExceedsBound { x, value });
    }
    let at_one = target.eval_real(1.0).re;
    if (at_one - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidTarget(format!("target(1) = {at_one}, but every protocol has P(1) = 1")));
    }
    let a = target.re();
    let input = CompletionInput::new(a.clone(), ParityPoly::zero(Parity::of_degree(n).flip()), n)?;
    let f = build_F(&input)?;
    let split = factor_F(&f, n, opts)?;
    let i = Complex64::new(0.0, 1.0);
    let su2 = TransferPair::new(a.add(&split.b.scale(i)), split.d.scale(-i), n)?;
    let su2_phases = layer_strip_with(&su2, opts)?;
    let phases = su2_phases.map(|p| p + std::f64::consts::FRAC_PI_2)?;
    let achieved = protocol_to_pair(&phases).p.re();
    Ok(Synthesis { max_deviation: achieved.max_coeff_diff(&a), phases, su2_phases })
}
