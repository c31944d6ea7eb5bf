//! The constant-phase protocol: closed form, the secant upper bound below
//! sec φ and the Chebyshev lower bound above it.

use std::f64::consts::FRAC_PI_3;

use hyperqsp::protocols::{asymptote, bound, constant_closed_form, gen_constant, AsymptoteKind, BoundKind};

fn main() -> hyperqsp::Result<()> {
    let phi = FRAC_PI_3;
    let sec = 1.0 / phi.cos();
    for n in [6, 8, 10] {
        let p = gen_constant(n, phi)?;
        println!("n = {n}");
        println!("  {:>6} {:>14} {:>14} {:>14}", "x", "|P|^2", "secant", "T_n(x cos)");
        for i in 0..=12 {
            let x = 1.0 + 3.0 * i as f64 / 12.0;
            let p2 = p.eval_at_x(x)?.a11.norm_sqr();
            let upper = if x < sec { bound(BoundKind::Secant, n, phi, x)? } else { f64::NAN };
            let lower = if x >= sec { bound(BoundKind::ChebyshevLower, n, phi, x)? } else { f64::NAN };
            println!("  {x:>6.2} {p2:>14.4} {upper:>14.4} {lower:>14.4}");
        }
        let cf = constant_closed_form(n, phi, 3.0)?;
        println!("  closed form at x = 3: {:.6} (matrix product {:.6})", cf.value, p.eval_at_x(3.0)?.a11);
    }

    let a = asymptote(AsymptoteKind::NearCriticalPlus, 6, phi, 1e-7)?;
    println!("\njust above sec φ, n = 6: |P|^2 = {:.4}, 1 + n² tan²φ = {:.4}", a.oracle, a.derived.unwrap_or(f64::NAN));
    Ok(())
}
