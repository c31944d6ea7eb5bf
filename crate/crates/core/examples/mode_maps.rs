//! Protocols as two-mode squeezers.

use hyperqsp::algebra::PhaseList;
use hyperqsp::modes::{
    composite_mode_map, controlled_squeeze_branches, low_gain_effective, staged_amplitude_exact, StagedInterferometer,
};

fn main() -> hyperqsp::Result<()> {
    let beta = 2f64.ln();
    let m = composite_mode_map(&PhaseList::zeros(1)?, beta)?;
    println!("single boost, β = ln 2: u = {}, v = {}, defect {:.1e}", m.u, m.v, m.commutator_defect());

    let phases = PhaseList::new(vec![0.0, 1.2, -0.4, 0.9])?;
    let m = composite_mode_map(&phases, 0.8)?;
    println!("four boosts, β = 0.8: |u| = {:.6}, |v| = {:.6}", m.u.norm(), m.v.norm());

    let (off, on) = controlled_squeeze_branches(0.2, 0.8, &phases)?;
    println!("controlled: |v| = {:.4} (β₀) and {:.4} (β₁)", off.v.norm(), on.v.norm());

    println!("\nlow-gain staging, β = 1e-3");
    for theta in [0.3, 1.0] {
        for n in [2, 5] {
            let exact = staged_amplitude_exact(&StagedInterferometer::uniform(1e-3, theta, 0.0, n)?).v;
            let lg = low_gain_effective(1e-3, theta, 0.0, n).amplitude;
            println!("  θ = {theta}, N = {n}: exact {exact:.3e}, low gain {lg:.3e}, diff {:.1e}", (exact - lg).norm());
        }
    }
    Ok(())
}
