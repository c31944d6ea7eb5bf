//! Randomized invariants across modules.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use hyperqsp::algebra::{
    eval_protocol, phased_boost, phased_iterate, pseudo_unitary_defect, relative_pseudo_unitary_defect,
    substitute_picture, unitary_defect, Mat2, PhaseList, Signal, Substitution,
};
use hyperqsp::approx::{fit_target, FitDomain};
use hyperqsp::cli::parse_angle;
use hyperqsp::modes::{commutator_defect, composite_mode_map, mode_map_at_x};
use hyperqsp::polyring::{chebyshev_t, chebyshev_u, identity_defect, protocol_to_pair, Parity};
use hyperqsp::protocols::{inverse_phases, Convention, Protocol};
use hyperqsp::synthesis::{complete_pair, layer_strip, CompletionInput};

fn phases(max_len: usize) -> impl Strategy<Value = PhaseList> {
    prop::collection::vec(-PI..PI, 1..=max_len).prop_map(|v| PhaseList::new(v).unwrap())
}

fn scaled_diff(a: &Mat2, b: &Mat2) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(b.max_abs()).max(1.0)
}

proptest! {
    #[test]
    fn single_boost_is_pseudo_unitary(beta in 0.0..5.0f64, phi in -PI..PI) {
        let m = phased_boost(beta, phi).unwrap();
        prop_assert!(relative_pseudo_unitary_defect(&m) <= 1e-15);
        prop_assert!(pseudo_unitary_defect(&m) <= 1e-11);
        prop_assert!((m.det() - 1.0).norm() <= 1e-11);
    }

    #[test]
    fn iterate_is_unitary(theta in 0.0..PI, phi in -PI..PI) {
        let m = phased_iterate(theta, phi);
        prop_assert!(unitary_defect(&m) <= 1e-12);
        prop_assert!((m.det() - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn circular_products_have_unit_determinant(p in phases(50), theta in 0.0..PI) {
        let m = eval_protocol(&p, Signal::circular(theta).unwrap());
        prop_assert!((m.det() - 1.0).norm() <= 1e-10);
        prop_assert!(unitary_defect(&m) <= 1e-10);
    }

    #[test]
    fn hyperbolic_products_have_unit_determinant(p in phases(50), frac in 0.0..1.0f64) {
        // Total gain n·β kept at most 5 so entries stay below cosh 5.
        let beta = frac * 5.0 / p.len() as f64;
        let m = eval_protocol(&p, Signal::hyperbolic(beta).unwrap());
        prop_assert!((m.det() - 1.0).norm() <= 1e-10);
        prop_assert!(relative_pseudo_unitary_defect(&m) <= 1e-12);
    }

    #[test]
    fn concatenation_is_matrix_product(a in phases(20), b in phases(20), beta in 0.0..0.4f64) {
        let s = Signal::hyperbolic(beta).unwrap();
        let whole = eval_protocol(&a.concat(&b), s);
        let split = eval_protocol(&a, s) * eval_protocol(&b, s);
        prop_assert!(scaled_diff(&whole, &split) <= 1e-12);
    }

    #[test]
    fn pair_matches_matrix_product(p in phases(16), beta in 0.0..0.5f64) {
        let tp = protocol_to_pair(&p);
        let m = eval_protocol(&p, Signal::hyperbolic(beta).unwrap());
        let u = tp.p.eval_real(beta.cosh());
        let v = tp.q.eval_real(beta.cosh()) * beta.sinh();
        let scale = m.max_abs().max(1.0);
        prop_assert!((u - m.a11).norm() <= 1e-11 * scale);
        prop_assert!((v - m.a12).norm() <= 1e-11 * scale);
    }

    #[test]
    fn pair_shape_and_identity(p in phases(30)) {
        let n = p.len();
        let tp = protocol_to_pair(&p);
        prop_assert!(tp.p.degree() <= n && tp.q.degree() < n.max(1));
        prop_assert!(tp.p.parity() == Parity::of_degree(n) || tp.p.is_zero());
        prop_assert!(tp.q.parity() == Parity::of_degree(n).flip() || tp.q.is_zero());
        prop_assert!(identity_defect(&tp) <= 1e-10);
    }

    #[test]
    fn completion_round_trip(p in phases(10)) {
        let original = protocol_to_pair(&p);
        let completed = complete_pair(&CompletionInput::from_pair(&original).unwrap()).unwrap();
        prop_assert!(completed.p.re().max_coeff_diff(&original.p.re()) <= 1e-9);
        prop_assert!(completed.q.re().max_coeff_diff(&original.q.re()) <= 1e-9);
        let again = protocol_to_pair(&layer_strip(&completed).unwrap());
        prop_assert!(again.p.max_coeff_diff(&completed.p) <= 1e-7);
        prop_assert!(again.q.max_coeff_diff(&completed.q) <= 1e-7);
    }

    #[test]
    fn picture_substitution_round_trip(p in phases(20)) {
        let there = substitute_picture(&p, Substitution::Su2ToSu11);
        let back = substitute_picture(&there, Substitution::Su11ToSu2);
        for (a, b) in p.iter().zip(back.iter()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn inverse_keeps_interleaved_matrix(p in prop::collection::vec(-PI..PI, 2..8), x in 1.0..1.5f64) {
        let list = PhaseList::new(p).unwrap();
        let twice = inverse_phases(&inverse_phases(&list).unwrap()).unwrap();
        let a = Protocol::new(list, Convention::Interleaved).unwrap().eval_at_x(x).unwrap();
        let b = Protocol::new(twice, Convention::Interleaved).unwrap().eval_at_x(x).unwrap();
        prop_assert!(scaled_diff(&a, &b) <= 1e-12);
    }

    #[test]
    fn chebyshev_trig_identities(n in 1usize..40, theta in 0.01..3.13f64) {
        let x = Complex64::new(theta.cos(), 0.0);
        prop_assert!((chebyshev_t(n).eval(x).re - (n as f64 * theta).cos()).abs() <= 1e-11);
        let u = chebyshev_u(n - 1).eval(x).re * theta.sin();
        prop_assert!((u - (n as f64 * theta).sin()).abs() <= 1e-11);
    }

    #[test]
    fn mode_maps_preserve_commutator(p in phases(10), frac in 0.0..1.0f64) {
        let beta = frac * 5.0 / p.len() as f64;
        let m = composite_mode_map(&p, beta).unwrap();
        prop_assert!(commutator_defect(&m) <= 1e-10);
        let composed = m * m;
        prop_assert!(commutator_defect(&composed) <= 1e-9 * composed.u.norm_sqr().max(1.0));
        let at_x = mode_map_at_x(&p, beta.cosh()).unwrap();
        prop_assert!((at_x.u - m.u).norm() <= 1e-10 * m.u.norm().max(1.0));
    }

    #[test]
    fn integer_multiples_of_pi_parse(k in -12i32..=12, m in 1i32..=12) {
        let want = k as f64 * PI / m as f64;
        let got = parse_angle(&format!("{k}*pi/{m}")).unwrap();
        prop_assert!((got - want).abs() <= 1e-14);
    }

    #[test]
    fn fit_reproduces_polynomials_in_span(c in prop::collection::vec(-1.0..1.0f64, 1..8), x_max in 1.5..3.0f64) {
        let d = c.len() - 1;
        let poly = move |x: f64| c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck);
        let dom = FitDomain::new(x_max, d).unwrap();
        let fit = fit_target(poly, d, Parity::Mixed, &dom).unwrap();
        prop_assert!(fit.sup_residual <= 1e-9);
    }
}
