//! Choosing a protocol length for a weak step at sec φ.

use hyperqsp::protocols::{bound, gen_constant, min_length_estimate, weak_step_check, BoundKind, StepSpec};

fn main() -> hyperqsp::Result<()> {
    let spec = StepSpec::new(2.0, 10.0, 0.1)?;
    let phi = spec.phase();
    let est = min_length_estimate(&spec, phi)?;
    println!("μ = 2, ξ = 10, δ = 0.1: φ = {phi:.6}, n = {}", est.n);

    let p = gen_constant(est.n, phi)?;
    let samples: Vec<(f64, f64)> = (0..=400)
        .map(|i| 1.0 + 3.0 * i as f64 / 400.0)
        .map(|x| Ok((x, p.eval_at_x(x)?.a11.norm())))
        .collect::<hyperqsp::Result<_>>()?;
    let n = est.n;
    let report = weak_step_check(
        &samples,
        // The split is sec φ, so each bound is only queried on its own side.
        |x| bound(BoundKind::Secant, n, phi, x).expect("x below sec φ").sqrt(),
        |x| bound(BoundKind::ChebyshevLower, n, phi, x).expect("x above sec φ").sqrt(),
        spec.mu,
    )?;
    println!("weak step holds on {} samples: {}", report.checked, report.passed);
    if let Some(v) = report.worst {
        println!("worst point {v:?}");
    }
    let at = spec.mu + spec.delta;
    println!("|P({at})| = {:.3} (target at least {})", p.eval_at_x(at)?.a11.norm(), spec.xi);
    Ok(())
}
