//! Small vector helpers over complex slices.

use num_complex::Complex64;

/// Plain (unweighted) hermitian dot product Σ a conj(b).
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Weighted hermitian dot product Σ w a conj(b).
pub fn dot_w(w: &[f64], a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    debug_assert_eq!(a.len(), w.len());
    a.iter()
        .zip(b)
        .zip(w)
        .map(|((x, y), wi)| wi * x * y.conj())
        .sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm_w(w: &[f64], a: &[Complex64]) -> f64 {
    a.iter()
        .zip(w)
        .map(|(x, wi)| wi * x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// a += s * b
pub fn axpy(a: &mut [Complex64], s: Complex64, b: &[Complex64]) {
    debug_assert_eq!(a.len(), b.len());
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

pub fn scale(a: &mut [Complex64], s: f64) {
    for x in a.iter_mut() {
        *x *= s;
    }
}

/// Largest |a_i − b_i| over matching entries.
#[cfg_attr(not(test), allow(dead_code))]
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// ‖a − b‖ / ‖b‖ with a tiny-denominator guard.
#[cfg_attr(not(test), allow(dead_code))]
pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}
