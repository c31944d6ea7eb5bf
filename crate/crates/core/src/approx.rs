//! Least-squares approximation on `[1, X]`.
//!
//! Inner products use unit weight and Gauss–Legendre quadrature. Orthonormal
//! bases are built by modified Gram–Schmidt with one reorthogonalization pass,
//! run on a shifted Chebyshev family: `T_j(s(x))` for the full family and
//! `x^p T_j(s(x²))` for parity `p`, with `s` mapping the interval onto
//! `[−1, 1]`. These span the same nested spaces as the raw `T_k(x)` but stay
//! well conditioned.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::DEFAULT_BETA_MAX;
use crate::error::{Error, Result};
use crate::polyring::{cheb, Parity, ParityPoly};

pub const MAX_BASIS_DEGREE: usize = 40;
/// Relative Gram–Schmidt pivot below which a basis is rejected.
pub const PIVOT_FLOOR: f64 = 1e-12;
/// Tolerance on `|f(x) − ±f(−x)|` for the parity check in [`fit_target`].
pub const FIT_PARITY_TOL: f64 = 1e-6;

/// The interval `[1, x_max]` with a Gauss–Legendre rule.
#[derive(Debug, Clone)]
pub struct FitDomain {
    x_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FitDomain {
    /// Quadrature order `2·max_degree + 8`.
    pub fn new(x_max: f64, max_degree: usize) -> Result<Self> {
        FitDomain::with_order(x_max, 2 * max_degree + 8)
    }

    pub fn with_order(x_max: f64, order: usize) -> Result<Self> {
        FitDomain::with_cutoff(x_max, order, DEFAULT_BETA_MAX)
    }

    pub fn with_cutoff(x_max: f64, order: usize, beta_max: f64) -> Result<Self> {
        if !(x_max > 1.0) || x_max > beta_max.cosh() {
            return Err(Error::Domain(format!(
                "fit interval end {x_max} must lie in (1, cosh {beta_max}]"
            )));
        }
        let order = NonZeroUsize::new(order)
            .ok_or_else(|| Error::InvalidArgument("quadrature order must be positive".into()))?;
        let rule = GaussLegendre::new(order);
        let (mid, half) = (0.5 * (x_max + 1.0), 0.5 * (x_max - 1.0));
        let (nodes, weights) = rule
            .iter()
            .map(|(t, w)| (mid + half * t, half * w))
            .unzip();
        Ok(FitDomain { x_max, nodes, weights })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `f` at the quadrature nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.order() - 1
    }

    fn require(&self, degree: usize) -> Result<()> {
        if degree > self.exact_degree() {
            return Err(Error::QuadratureOrder { order: self.order(), degree });
        }
        Ok(())
    }

    /// `Σ w_i f_i g_i` over sampled values.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weights.iter().zip(f).zip(g).map(|((w, a), b)| w * a * b).sum()
    }
}

/// `Re ∫₁^X f(x) conj(g(x)) dx`, exact for `deg f + deg g` within the rule.
pub fn inner_product(f: &ParityPoly, g: &ParityPoly, dom: &FitDomain) -> Result<f64> {
    dom.require(f.degree() + g.degree())?;
    Ok(dom
        .nodes
        .iter()
        .zip(&dom.weights)
        .map(|(&x, &w)| w * (f.eval_real(x) * g.eval_real(x).conj()).re)
        .sum())
}

/// Which nested family a basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Full,
    /// Only `T_k` with `k` of this parity.
    Parity(Parity),
}

impl Family {
    fn offset(self) -> usize {
        match self {
            Family::Parity(Parity::Odd) => 1,
            _ => 0,
        }
    }

    /// Degree in `x` of the `j`-th element.
    pub fn degree_of(self, j: usize) -> usize {
        match self {
            Family::Full | Family::Parity(Parity::Mixed) => j,
            Family::Parity(_) => self.offset() + 2 * j,
        }
    }

    fn is_full(self) -> bool {
        matches!(self, Family::Full | Family::Parity(Parity::Mixed))
    }

    fn from_parity(p: Parity) -> Family {
        match p {
            Parity::Mixed => Family::Full,
            p => Family::Parity(p),
        }
    }
}

/// A polynomial in the shifted Chebyshev basis of a family on `[1, X]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalPoly {
    family: Family,
    x_max: f64,
    coeffs: Vec<f64>,
}

impl IntervalPoly {
    pub fn new(family: Family, x_max: f64, coeffs: Vec<f64>) -> Self {
        IntervalPoly { family, x_max, coeffs }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.family.degree_of(self.coeffs.len().saturating_sub(1))
    }

    /// `s = α·u + γ` with `u = x` (full) or `u = x²` (parity), sending the
    /// interval onto `[−1, 1]`.
    fn affine(&self) -> (f64, f64) {
        let hi = if self.family.is_full() { self.x_max } else { self.x_max * self.x_max };
        let alpha = 2.0 / (hi - 1.0);
        (alpha, -1.0 - alpha)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (alpha, gamma) = self.affine();
        let u = if self.family.is_full() { x } else { x * x };
        let s = alpha * u + gamma;
        // Clenshaw
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        let sum = self.coeffs.first().copied().unwrap_or(0.0) + s * b1 - b2;
        if self.family.offset() == 1 {
            x * sum
        } else {
            sum
        }
    }

    /// Leading coefficient in the monomial `x` basis.
    pub fn leading_x_coeff(&self) -> f64 {
        let (alpha, _) = self.affine();
        let j = self.coeffs.len() - 1;
        let c = self.coeffs[j];
        if j == 0 {
            c
        } else {
            c * 2f64.powi(j as i32 - 1) * alpha.powi(j as i32)
        }
    }

    /// The same polynomial in the global Chebyshev-T basis.
    ///
    /// Those coefficients grow roughly geometrically with degree when `X` is
    /// close to 1, and evaluating them loses digits in proportion.
    pub fn to_parity_poly(&self) -> ParityPoly {
        let (alpha, gamma) = self.affine();
        let c = |r: f64| Complex64::new(r, 0.0);
        let s: Vec<Complex64> = if self.family.is_full() {
            vec![c(gamma), c(alpha)]
        } else {
            // x² = (T₀ + T₂)/2
            vec![c(0.5 * alpha + gamma), c(0.0), c(0.5 * alpha)]
        };
        let mut t_prev = vec![c(1.0)];
        let mut t_cur = s.clone();
        let mut acc = cheb::scale(&t_prev, c(self.coeffs[0]));
        for (j, &cj) in self.coeffs.iter().enumerate().skip(1) {
            if j > 1 {
                let next = cheb::sub(&cheb::scale(&cheb::mul(&s, &t_cur), c(2.0)), &t_prev);
                t_prev = std::mem::replace(&mut t_cur, next);
            }
            acc = cheb::add(&acc, &cheb::scale(&t_cur, c(cj)));
        }
        if self.family.offset() == 1 {
            acc = cheb::mul_x(&acc);
        }
        let parity = match self.family {
            Family::Parity(p) => p,
            Family::Full => Parity::Mixed,
        };
        ParityPoly::from_raw(acc, parity)
    }
}

/// Orthonormal polynomials on a [`FitDomain`].
#[derive(Debug, Clone, Serialize)]
pub struct OrthoBasis {
    pub elements: Vec<IntervalPoly>,
    /// `max |⟨e_i, e_j⟩ − δ_ij|`.
    pub gram_defect: f64,
    /// Relative Gram–Schmidt pivots of the shifted family.
    pub pivots: Vec<f64>,
    /// Relative pivots the raw `T_k(x)` family would have produced.
    pub raw_chebyshev_pivots: Vec<f64>,
}

impl OrthoBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn min_pivot(&self) -> f64 {
        self.pivots.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_parity_polys(&self) -> Vec<ParityPoly> {
        self.elements.iter().map(IntervalPoly::to_parity_poly).collect()
    }

    fn samples(&self, dom: &FitDomain) -> Vec<Vec<f64>> {
        self.elements.iter().map(|e| dom.sample(|x| e.eval(x))).collect()
    }
}

/// Orthonormal basis of degrees `0..=max_degree`.
pub fn gram_schmidt_basis(max_degree: usize, dom: &FitDomain) -> Result<OrthoBasis> {
    basis_for_family(Family::Full, max_degree, dom)
}

/// Orthonormal basis of the family members with `x`-degree at most `max_degree`.
pub fn basis_for_family(family: Family, max_degree: usize, dom: &FitDomain) -> Result<OrthoBasis> {
    if max_degree > MAX_BASIS_DEGREE {
        return Err(Error::InvalidArgument(format!(
            "basis degree {max_degree} exceeds {MAX_BASIS_DEGREE}"
        )));
    }
    dom.require(2 * max_degree)?;
    let count = (0..=max_degree).take_while(|&j| family.degree_of(j) <= max_degree).count();
    if count == 0 {
        return Err(Error::InvalidArgument(format!(
            "no {family:?} polynomial of degree at most {max_degree}"
        )));
    }

    // Coefficient vectors and their samples, updated together.
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut vals: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut pivots = Vec::with_capacity(count);
    for j in 0..count {
        let mut c = vec![0.0; j + 1];
        c[j] = 1.0;
        let mut v = dom.sample(|x| IntervalPoly::new(family, dom.x_max, c.clone()).eval(x));
        let norm0 = dom.dot(&v, &v).sqrt();
        for _pass in 0..2 {
            for (ci, vi) in coeffs.iter().zip(&vals) {
                let r = dom.dot(&v, vi);
                for (a, b) in v.iter_mut().zip(vi) {
                    *a -= r * b;
                }
                for (a, b) in c.iter_mut().zip(ci) {
                    *a -= r * b;
                }
            }
        }
        let norm = dom.dot(&v, &v).sqrt();
        let pivot = norm / norm0;
        if !(pivot >= PIVOT_FLOOR) {
            return Err(Error::DegenerateBasis { degree: family.degree_of(j), pivot });
        }
        pivots.push(pivot);
        v.iter_mut().for_each(|a| *a /= norm);
        c.iter_mut().for_each(|a| *a /= norm);
        coeffs.push(c);
        vals.push(v);
    }

    let elements: Vec<IntervalPoly> =
        coeffs.into_iter().map(|c| IntervalPoly::new(family, dom.x_max, c)).collect();

    let mut gram_defect = 0.0f64;
    for i in 0..count {
        for j in 0..=i {
            let g = dom.dot(&vals[i], &vals[j]);
            let want = if i == j { 1.0 } else { 0.0 };
            gram_defect = gram_defect.max((g - want).abs());
        }
    }

    // Raw pivot of T_k against the lower span is |⟨T_k, e_k⟩| = t_k / l_k
    // with t_k, l_k the leading x-coefficients of T_k and e_k.
    let raw_chebyshev_pivots = elements
        .iter()
        .enumerate()
        .map(|(j, e)| {
            let k = family.degree_of(j);
            let t_lead = if k == 0 { 1.0 } else { 2f64.powi(k as i32 - 1) };
            let tk = dom.sample(|x| crate::polyring::chebyshev_t(k).eval_real(x).re);
            (t_lead / e.leading_x_coeff()).abs() / dom.dot(&tk, &tk).sqrt()
        })
        .collect();

    Ok(OrthoBasis { elements, gram_defect, pivots, raw_chebyshev_pivots })
}

fn check_samples(samples: &[f64], dom: &FitDomain) -> Result<()> {
    if samples.len() != dom.order() {
        return Err(Error::InvalidArgument(format!(
            "{} samples for a {}-node rule",
            samples.len(),
            dom.order()
        )));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidTarget("non-finite target sample".into()));
    }
    Ok(())
}

/// `c_k = ⟨target, e_k⟩` from samples at the quadrature nodes.
pub fn generalized_coeffs(samples: &[f64], basis: &OrthoBasis, dom: &FitDomain) -> Result<Vec<f64>> {
    check_samples(samples, dom)?;
    Ok(basis.samples(dom).iter().map(|e| dom.dot(samples, e)).collect())
}

/// `|Σ c_k² − ∫ target²|`.
pub fn parseval_defect(coeffs: &[f64], samples: &[f64], dom: &FitDomain) -> f64 {
    (coeffs.iter().map(|c| c * c).sum::<f64>() - dom.dot(samples, samples)).abs()
}

/// Result of [`fit_target`].
#[derive(Debug, Clone)]
pub struct Fit {
    pub poly: ParityPoly,
    pub interval_poly: IntervalPoly,
    pub coeffs: Vec<f64>,
    /// `(∫ (f − p)²)^{1/2}` by quadrature.
    pub l2_residual: f64,
    /// `max |f − p|` over the nodes.
    pub sup_residual: f64,
    pub min_pivot: f64,
}

/// Least-squares projection of `target` onto polynomials of the given parity
/// and degree at most `max_degree`.
///
/// The result is not checked for realizability as a protocol.
pub fn fit_target(
    target: impl Fn(f64) -> f64,
    max_degree: usize,
    parity: Parity,
    dom: &FitDomain,
) -> Result<Fit> {
    if parity != Parity::Mixed {
        let sign = if parity == Parity::Even { 1.0 } else { -1.0 };
        for &x in dom.nodes() {
            let (a, b) = (target(x), target(-x));
            // Targets only defined on [1, X] (arccosh and friends) skip this.
            if !b.is_finite() || !a.is_finite() {
                continue;
            }
            if (a - sign * b).abs() > FIT_PARITY_TOL * a.abs().max(1.0) {
                return Err(Error::Parity(format!(
                    "target is not {parity:?}: f({x}) = {a}, f(−{x}) = {b}"
                )));
            }
        }
    }
    let family = Family::from_parity(parity);
    let basis = basis_for_family(family, max_degree, dom)?;
    let samples = dom.sample(&target);
    let coeffs = generalized_coeffs(&samples, &basis, dom)?;

    let mut combined = vec![0.0; basis.len()];
    for (e, &ck) in basis.elements.iter().zip(&coeffs) {
        for (a, b) in combined.iter_mut().zip(e.coeffs()) {
            *a += ck * b;
        }
    }
    let interval_poly = IntervalPoly::new(family, dom.x_max, combined);
    let resid: Vec<f64> = dom.nodes().iter().zip(&samples).map(|(&x, f)| f - interval_poly.eval(x)).collect();
    let l2_residual = dom.dot(&resid, &resid).max(0.0).sqrt();
    let sup_residual = resid.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(Fit {
        poly: interval_poly.to_parity_poly(),
        interval_poly,
        coeffs,
        l2_residual,
        sup_residual,
        min_pivot: basis.min_pivot(),
    })
}
