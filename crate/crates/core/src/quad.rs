//! Gaussian quadrature rules via Golub-Welsch (eigenvalues of the symmetric
//! Jacobi matrix of the orthogonal-polynomial family).

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Eigen-decompose a symmetric tridiagonal Jacobi matrix and return
/// (nodes ascending, first-eigenvector-component² per node).
fn golub_welsch(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
    }
    for i in 0..n - 1 {
        m[(i, i + 1)] = offdiag[i];
        m[(i + 1, i)] = offdiag[i];
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("quadrature Jacobi eigensolve stalled".into()))?;
    let mut pairs: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let v0 = eig.eigenvectors[(0, i)];
            (x, v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// n-point Gauss-Legendre rule on [-1, 1]: integrates polynomials of degree
/// ≤ 2n−1 exactly against the flat weight.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArg("quadrature order must be >= 1".into()));
    }
    let diag = vec![0.0; n];
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, v0sq) = golub_welsch(&diag, &offdiag)?;
    // mu0 = integral of the weight over [-1, 1]
    let weights = v0sq.iter().map(|&v| 2.0 * v).collect();
    Ok((nodes, weights))
}

/// Nodes of the n-point generalized Gauss-Laguerre rule for the weight
/// u^alpha e^{-u} (zeros of L_n^{(α)}), from the Jacobi-matrix eigenvalues.
/// Callers polish the roots and derive weights from the closed form; the
/// eigenvector route loses the exponentially small first components that the
/// far-node weights would need.
pub fn gen_laguerre_nodes(n: usize, alpha: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArg("quadrature order must be >= 1".into()));
    }
    let a = alpha as f64;
    let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + a + 1.0).collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            (k * (k + a)).sqrt()
        })
        .collect();
    let (nodes, _) = golub_welsch(&diag, &offdiag)?;
    if nodes[0] <= 0.0 {
        return Err(Error::Numerical(
            "Gauss-Laguerre node-finding produced a non-positive node".into(),
        ));
    }
    Ok(nodes)
}

/// ln(n!) for integer n.
pub fn ln_factorial(n: usize) -> f64 {
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 8192];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if n < table.len() {
        table[n]
    } else {
        // Stirling fallback, far beyond any bandlimit used here.
        let x = n as f64 + 1.0;
        0.5 * (2.0 * std::f64::consts::PI / x).ln() + x * ((x / std::f64::consts::E).ln())
    }
}
