//! Roots of real Chebyshev series via the colleague matrix.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polyring::cheb;

/// All complex roots of `Σ c_k T_k(x)`, with multiplicity.
///
/// Trailing coefficients below `1e-14 · max|c_k|` are ignored.
pub(crate) fn chebyshev_roots(c: &[f64]) -> Result<Vec<Complex64>> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::InvalidArgument("zero polynomial has no finite root set".into()));
    }
    let mut n = c.len() - 1;
    while n > 0 && c[n].abs() <= 1e-14 * scale {
        n -= 1;
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![Complex64::new(-c[0] / c[1], 0.0)]);
    }

    // x·T_k = (T_{k+1} + T_{k−1}) / 2, with T_n eliminated on the last row.
    let mut a = DMatrix::<f64>::zeros(n, n);
    a[(0, 1)] = 1.0;
    for i in 1..n {
        a[(i, i - 1)] = 0.5;
        if i + 1 < n {
            a[(i, i + 1)] = 0.5;
        }
    }
    for k in 0..n {
        a[(n - 1, k)] -= c[k] / (2.0 * c[n]);
    }
    balance(&mut a);
    let eig = eigenvalues(a)?;
    let coeffs: Vec<Complex64> = c[..=n].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let deriv = derivative(&coeffs);
    Ok(eig.iter().map(|&z| polish(&coeffs, &deriv, z)).collect())
}

/// Parlett–Reinsch diagonal scaling by powers of two. The colleague matrix
/// of a series with a small leading coefficient has a huge last row, and
/// unbalanced it costs the moderate roots most of their digits.
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    loop {
        let mut converged = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let (mut c2, mut r2) = (c, r);
            while c2 < r2 / 2.0 {
                c2 *= 2.0;
                r2 /= 2.0;
                f *= 2.0;
            }
            while c2 >= r2 * 2.0 {
                c2 /= 2.0;
                r2 *= 2.0;
                f /= 2.0;
            }
            if (c2 + r2) < 0.95 * s {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Bounded Francis iteration. Some structured matrices stall it; retrying on
/// `A + σI` for a few σ moves the shifts off the stall.
fn eigenvalues(a: DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    for sigma in [0.0, 0.1234567, -0.3047281, 0.5772157] {
        let shifted = &a + DMatrix::<f64>::identity(n, n) * sigma;
        if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 100 * n.max(10)) {
            return Ok(schur.complex_eigenvalues().iter().map(|z| z - sigma).collect());
        }
    }
    Err(Error::FactorizationFailed(format!("eigenvalue iteration did not converge (degree {n})")))
}

fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n + 1];
    for k in (1..n).rev() {
        d[k - 1] = d[k + 1] + c[k] * (2.0 * k as f64);
    }
    d[0] *= 0.5;
    d.truncate(n.saturating_sub(1));
    d
}

/// A few guarded Newton steps: a step is kept only if it lowers |p|.
fn polish(c: &[Complex64], d: &[Complex64], mut z: Complex64) -> Complex64 {
    let mut fz = cheb::eval(c, z).norm();
    for _ in 0..8 {
        let dz = cheb::eval(d, z);
        if dz.norm() == 0.0 || fz == 0.0 {
            break;
        }
        let cand = z - cheb::eval(c, z) / dz;
        let fc = cheb::eval(c, cand).norm();
        if fc < fz {
            z = cand;
            fz = fc;
        } else {
            break;
        }
    }
    z
}
