//! Wigner small-d matrix elements d^ℓ_{mn}(β).
//!
//! Columns over ℓ at fixed (m, n) are generated by the standard three-term
//! recurrence seeded at ℓ₀ = max(|m|, |n|) with a log-domain closed form, so
//! seeds near the poles underflow gracefully instead of overflowing the
//! binomial factor. Values are bounded by 1, which keeps the upward
//! recurrence stable at any bandlimit used here.

use crate::error::{Error, Result};
use crate::quad::ln_factorial;

/// Closed-form seed d^{ℓ0}_{mn}(β) at ℓ0 = max(|m|, |n|).
fn seed(m: i64, n: i64, beta: f64) -> f64 {
    let l0 = m.abs().max(n.abs());
    if l0 == 0 {
        return 1.0;
    }
    let c = (0.5 * beta).cos();
    let s = (0.5 * beta).sin();
    // Each case reduces to sign * sqrt(C(2ℓ0, k)) c^a s^b.
    let (sign, k, a, b) = if m == l0 {
        (if (l0 - n) % 2 == 0 { 1.0 } else { -1.0 }, l0 - n, l0 + n, l0 - n)
    } else if m == -l0 {
        (1.0, l0 + n, l0 - n, l0 + n)
    } else if n == l0 {
        (1.0, l0 - m, l0 + m, l0 - m)
    } else {
        // n == -l0
        (if (l0 + m) % 2 == 0 { 1.0 } else { -1.0 }, l0 + m, l0 - m, l0 + m)
    };
    if (a > 0 && c == 0.0) || (b > 0 && s == 0.0) {
        return 0.0;
    }
    let ln_binom = ln_factorial(2 * l0 as usize)
        - ln_factorial(k as usize)
        - ln_factorial((2 * l0 - k) as usize);
    let ln_mag = 0.5 * ln_binom
        + if a > 0 { a as f64 * c.ln() } else { 0.0 }
        + if b > 0 { b as f64 * s.ln() } else { 0.0 };
    sign * ln_mag.exp()
}

/// Fill `out[ℓ]` with d^ℓ_{mn}(beta) for ℓ = 0..out.len(); entries below
/// ℓ0 = max(|m|, |n|) are zero.
pub(crate) fn wigner_d_column(m: i64, n: i64, beta: f64, out: &mut [f64]) {
    let lmax = out.len() as i64;
    let l0 = m.abs().max(n.abs());
    for v in out.iter_mut() {
        *v = 0.0;
    }
    if l0 >= lmax {
        return;
    }
    let x = beta.cos();
    out[l0 as usize] = seed(m, n, beta);
    if l0 + 1 >= lmax {
        return;
    }
    let mf = m as f64;
    let nf = n as f64;
    let mut dm1 = out[l0 as usize];
    let mut dm2 = 0.0;
    let mut start = l0 + 1;
    if l0 == 0 {
        // The step from ℓ = 0 is degenerate (both sides vanish); seed d¹
        // directly and recur from ℓ = 2.
        out[1] = x;
        if lmax == 2 {
            return;
        }
        dm2 = dm1;
        dm1 = x;
        start = 2;
    }
    for l in start..lmax {
        let lf = l as f64;
        let denom = (lf - 1.0) * ((lf * lf - mf * mf) * (lf * lf - nf * nf)).sqrt();
        let a = (2.0 * lf - 1.0) * (lf * (lf - 1.0) * x - mf * nf);
        let b = lf
            * (((lf - 1.0) * (lf - 1.0) - mf * mf) * ((lf - 1.0) * (lf - 1.0) - nf * nf)).sqrt();
        let d = (a * dm1 - b * dm2) / denom;
        out[l as usize] = d;
        dm2 = dm1;
        dm1 = d;
    }
}

/// Single Wigner small-d element d^ℓ_{mn}(beta), β in [0, π].
pub fn wigner_d(ell: i64, m: i64, n: i64, beta: f64) -> Result<f64> {
    if ell < 0 || m.abs() > ell || n.abs() > ell {
        return Err(Error::InvalidArg(format!(
            "wigner_d index out of range: ell={ell}, m={m}, n={n}"
        )));
    }
    let mut col = vec![0.0; (ell + 1) as usize];
    wigner_d_column(m, n, beta, &mut col);
    Ok(col[ell as usize])
}
