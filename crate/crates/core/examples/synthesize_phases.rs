//! Finding phases for a target polynomial, then checking the round trip.

use hyperqsp::polyring::{chebyshev_t, protocol_to_pair, Parity, ParityPoly};
use hyperqsp::synthesis::{complete_pair, layer_strip, synthesize_with, CompletionInput, SynthesisOptions};
use hyperqsp::algebra::PhaseList;

fn main() -> hyperqsp::Result<()> {
    // 0.6·T_1 + 0.4·T_3: odd, bounded by 1 on [-1, 1], equal to 1 at x = 1.
    let target = ParityPoly::from_real(&[0.0, 0.6, 0.0, 0.4], Parity::Odd)?;
    let s = synthesize_with(&target, &SynthesisOptions::default())?;
    println!("target  {target}");
    println!("phases  {:?}", s.phases.as_slice());
    println!("Re P    {}", protocol_to_pair(&s.phases).p.re());
    println!("max coefficient deviation {:.1e}", s.max_deviation);

    let t7 = synthesize_with(&chebyshev_t(7), &SynthesisOptions::default())?;
    println!("\nT_7 phases {:?}", t7.phases.as_slice());

    // Completion and stripping on their own: forget the imaginary parts of a
    // random-looking protocol and recover a protocol with the same real parts.
    let original = PhaseList::new(vec![0.4, -1.1, 2.3, 0.2, -0.6])?;
    let pair = protocol_to_pair(&original);
    let completed = complete_pair(&CompletionInput::from_pair(&pair)?)?;
    let recovered = layer_strip(&completed)?;
    let again = protocol_to_pair(&recovered);
    println!("\nrecovered phases {:?}", recovered.as_slice());
    println!(
        "Re P difference {:.1e}, Re Q difference {:.1e}",
        again.p.re().max_coeff_diff(&pair.p.re()),
        again.q.re().max_coeff_diff(&pair.q.re()),
    );
    Ok(())
}
