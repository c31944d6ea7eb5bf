//! Zero-phase boost protocols produce Chebyshev polynomials.
//!
//! Run with `cargo run --example chebyshev_protocols`.

use hyperqsp::algebra::{eval_protocol, pseudo_unitary_defect, PhaseList, Signal};
use hyperqsp::polyring::{chebyshev_t, chebyshev_u, identity_defect, protocol_to_pair};
use hyperqsp::protocols::gen_trivial;

fn main() -> hyperqsp::Result<()> {
    let x = 2.0f64;
    let signal = Signal::hyperbolic(x.acosh())?;
    println!("{:>3} {:>14} {:>12} {:>12}", "n", "P(2)", "P = T_n", "Q = U_n-1");
    for n in 1..=8 {
        let phases = gen_trivial(n)?;
        let pair = protocol_to_pair(&phases);
        let m = eval_protocol(&phases, signal);
        println!(
            "{n:>3} {:>14.1} {:>12.1e} {:>12.1e}",
            m.a11.re,
            pair.p.max_coeff_diff(&chebyshev_t(n)),
            pair.q.max_coeff_diff(&chebyshev_u(n - 1)),
        );
    }

    let phases = PhaseList::new(vec![0.3, -1.2, 2.0, 0.7])?;
    let m = eval_protocol(&phases, Signal::hyperbolic(1.5)?);
    println!("\narbitrary protocol at beta = 1.5:\n{m}");
    println!("pseudo-unitary defect {:.1e}", pseudo_unitary_defect(&m));
    println!("determinant identity defect {:.1e}", identity_defect(&protocol_to_pair(&phases)));
    Ok(())
}
