//! Least-squares fits on [1, X] and how the residual falls with degree.

use hyperqsp::approx::{gram_schmidt_basis, fit_target, FitDomain};
use hyperqsp::polyring::Parity;

fn main() -> hyperqsp::Result<()> {
    let dom = FitDomain::new(2.0, 20)?;
    let basis = gram_schmidt_basis(20, &dom)?;
    println!("degree-20 basis on [1, 2]: gram defect {:.1e}", basis.gram_defect);
    println!("  smallest pivot, shifted family {:.2e}", basis.min_pivot());
    println!("  raw T_20 pivot               {:.2e}", basis.raw_chebyshev_pivots[20]);

    println!("\nexp(x) on [1, 2]");
    for deg in 0..=12 {
        let fit = fit_target(f64::exp, deg, Parity::Mixed, &dom)?;
        println!("  {deg:>2}  L2 {:.3e}  sup {:.3e}", fit.l2_residual, fit.sup_residual);
    }

    let fit = fit_target(|x: f64| (3.0 * x.acosh()).cosh(), 3, Parity::Odd, &dom)?;
    println!("\ncosh(3 arccosh x) recovers {}", fit.poly);
    Ok(())
}
