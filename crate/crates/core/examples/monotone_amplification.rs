//! Recursively built protocols whose |P(x)|² is exactly a power of x.

use hyperqsp::algebra::PhaseList;
use hyperqsp::protocols::{amplify_expected_modulus, amplify_from_base, gen_monotone_amplify};

fn main() -> hyperqsp::Result<()> {
    for level in 0..=2 {
        let p = gen_monotone_amplify(level)?;
        println!("level {level}: {} phases, {} boosts", p.phases.len(), p.len());
        for x in [1.0, 1.05, 1.2] {
            let got = p.eval_at_x(x)?.a11.norm_sqr();
            let want = amplify_expected_modulus(level, x)?;
            println!("  x = {x:<5} |P|^2 = {got:<22} x^(2*3^(l+1)) = {want}");
        }
    }

    // The same recursion from {0, 0} lags one level behind.
    let base = PhaseList::new(vec![0.0, 0.0])?;
    println!("\nbase {{0, 0}}");
    for level in 0..=2 {
        let p = amplify_from_base(&base, level)?;
        let x = 1.2;
        let got = p.eval_at_x(x)?.a11.norm_sqr();
        let want = amplify_expected_modulus(level, x)?;
        println!("  level {level}: {} boosts, |P(1.2)|^2 = {got:.6} vs {want:.6}", p.len());
    }
    Ok(())
}
