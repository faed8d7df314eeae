//! Spin spherical harmonic transforms on an exact-quadrature grid.
//!
//! The grid is Gauss-Legendre in cos θ (L nodes) by equiangular in φ
//! (2L−1 points). Products of sampled spin harmonics up to bandlimit L are
//! polynomials of degree ≤ 2L−2 in cos θ times azimuthal modes below the
//! Nyquist index, so the discrete analysis/synthesis pair is exact on
//! bandlimited data for every spin.
//!
//! Spin harmonics are realized through the Wigner recursion:
//! `_sY_{ℓm}(θ, φ) = (−1)^s sqrt((2ℓ+1)/4π) d^ℓ_{m,−s}(θ) e^{imφ}`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::wigner::wigner_d_column;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Sampling grid on the sphere for bandlimit L.
#[derive(Clone)]
pub struct SphereGrid {
    bandlimit: usize,
    thetas: Vec<f64>,
    theta_weights: Vec<f64>,
    phis: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SphereGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereGrid")
            .field("bandlimit", &self.bandlimit)
            .field("n_theta", &self.n_theta())
            .field("n_phi", &self.n_phi())
            .finish()
    }
}

impl SphereGrid {
    pub fn build(bandlimit: usize) -> Result<Self> {
        if bandlimit == 0 {
            return Err(Error::InvalidArg("angular bandlimit L must be >= 1".into()));
        }
        let (x, w) = gauss_legendre(bandlimit)?;
        // x ascending in cos θ, so θ runs from near π down to near 0.
        let thetas: Vec<f64> = x.iter().map(|&xi| xi.clamp(-1.0, 1.0).acos()).collect();
        let n_phi = 2 * bandlimit - 1;
        let phis: Vec<f64> = (0..n_phi)
            .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64)
            .collect();
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n_phi);
        let fft_inv = planner.plan_fft_inverse(n_phi);
        Ok(SphereGrid {
            bandlimit,
            thetas,
            theta_weights: w,
            phis,
            fft_fwd,
            fft_inv,
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phis.len()
    }

    pub fn n_samples(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    /// Colatitudes of the rings.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Quadrature weights in cos θ per ring.
    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Quadrature weight of one grid sample (ring weight × azimuthal step).
    pub fn sample_weight(&self, theta_idx: usize) -> f64 {
        self.theta_weights[theta_idx] * 2.0 * std::f64::consts::PI / self.n_phi() as f64
    }
}

/// Spherical harmonic coefficients at bandlimit L and fixed spin, flat-indexed
/// by i = ℓ² + ℓ + m.
#[derive(Debug, Clone)]
pub struct Flm {
    pub bandlimit: usize,
    pub spin: i32,
    pub values: Vec<Complex64>,
}

impl Flm {
    pub fn zeros(bandlimit: usize, spin: i32) -> Self {
        Flm {
            bandlimit,
            spin,
            values: vec![Complex64::ZERO; bandlimit * bandlimit],
        }
    }

    pub fn get(&self, ell: usize, m: i64) -> Complex64 {
        self.values[flm_index(ell, m)]
    }

    pub fn set(&mut self, ell: usize, m: i64, v: Complex64) {
        self.values[flm_index(ell, m)] = v;
    }
}

/// Flat index i = ℓ² + ℓ + m.
#[inline]
pub fn flm_index(ell: usize, m: i64) -> usize {
    (ell * ell) as usize + (ell as i64 + m) as usize
}

fn spin_sign(spin: i32) -> f64 {
    if spin.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Analysis: f_{ℓm} = Σ_grid weight · f · conj(_sY_{ℓm}). Exact for inputs
/// bandlimited at L.
pub fn sht_forward(grid: &SphereGrid, samples: &[Complex64], spin: i32) -> Result<Flm> {
    sht_forward_weighted(grid, samples, spin, WeightMode::Quadrature)
}

/// Analysis built on explicit azimuthal sums instead of the FFT. Produces
/// the same result to rounding; kept as the contract check for the FFT path.
pub fn sht_forward_direct(grid: &SphereGrid, samples: &[Complex64], spin: i32) -> Result<Flm> {
    let l = check_sht_args(grid, samples.len(), spin)?;
    let n_phi = grid.n_phi();
    let mut flm = Flm::zeros(l, spin);
    let mut dcol = vec![0.0; l];
    for (k, &theta) in grid.thetas().iter().enumerate() {
        let row = &samples[k * n_phi..(k + 1) * n_phi];
        let wq = grid.sample_weight(k);
        for m in -(l as i64 - 1)..=(l as i64 - 1) {
            let mut fm = Complex64::ZERO;
            for (j, &phi) in grid.phis().iter().enumerate() {
                fm += row[j] * Complex64::from_polar(1.0, -(m as f64) * phi);
            }
            accumulate_forward(&mut flm, &mut dcol, l, spin, theta, m, wq * fm);
        }
    }
    Ok(flm)
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum WeightMode {
    /// Ring quadrature weight × 2π/n_phi: the exact analysis map.
    Quadrature,
    /// Unit weights: the plain transpose of synthesis (the naive adjoint).
    Unit,
}

pub(crate) fn sht_forward_weighted(
    grid: &SphereGrid,
    samples: &[Complex64],
    spin: i32,
    mode: WeightMode,
) -> Result<Flm> {
    let l = check_sht_args(grid, samples.len(), spin)?;
    let n_phi = grid.n_phi();
    let mut flm = Flm::zeros(l, spin);
    let mut row = vec![Complex64::ZERO; n_phi];
    let mut dcol = vec![0.0; l];
    for (k, &theta) in grid.thetas().iter().enumerate() {
        row.copy_from_slice(&samples[k * n_phi..(k + 1) * n_phi]);
        grid.fft_fwd.process(&mut row);
        let wq = match mode {
            WeightMode::Quadrature => grid.sample_weight(k),
            WeightMode::Unit => 1.0,
        };
        for m in -(l as i64 - 1)..=(l as i64 - 1) {
            let bin = if m >= 0 { m as usize } else { (n_phi as i64 + m) as usize };
            accumulate_forward(&mut flm, &mut dcol, l, spin, theta, m, wq * row[bin]);
        }
    }
    Ok(flm)
}

fn accumulate_forward(
    flm: &mut Flm,
    dcol: &mut [f64],
    l: usize,
    spin: i32,
    theta: f64,
    m: i64,
    fm: Complex64,
) {
    wigner_d_column(m, -(spin as i64), theta, dcol);
    let sign = spin_sign(spin);
    let lmin = m.unsigned_abs().max(spin.unsigned_abs() as u64) as usize;
    for ell in lmin..l {
        let y = sign * ((2.0 * ell as f64 + 1.0) / (4.0 * std::f64::consts::PI)).sqrt()
            * dcol[ell];
        flm.values[flm_index(ell, m)] += fm * y;
    }
}

/// Synthesis: f(θ, φ) = Σ_{ℓm} f_{ℓm} · _sY_{ℓm}(θ, φ), evaluated on the grid.
pub fn sht_inverse(grid: &SphereGrid, flm: &Flm) -> Result<Vec<Complex64>> {
    sht_inverse_impl(grid, flm, true)
}

/// Synthesis with explicit azimuthal sums; contract check for the FFT path.
pub fn sht_inverse_direct(grid: &SphereGrid, flm: &Flm) -> Result<Vec<Complex64>> {
    sht_inverse_impl(grid, flm, false)
}

fn sht_inverse_impl(grid: &SphereGrid, flm: &Flm, use_fft: bool) -> Result<Vec<Complex64>> {
    let l = check_sht_args(grid, grid.n_samples(), flm.spin)?;
    if flm.bandlimit != l {
        return Err(Error::shape("sht_inverse", l * l, flm.values.len()));
    }
    let n_phi = grid.n_phi();
    let mut out = vec![Complex64::ZERO; grid.n_samples()];
    let mut gm = vec![Complex64::ZERO; n_phi];
    let mut dcol = vec![0.0; l];
    let sign = spin_sign(flm.spin);
    for (k, &theta) in grid.thetas().iter().enumerate() {
        for v in gm.iter_mut() {
            *v = Complex64::ZERO;
        }
        for m in -(l as i64 - 1)..=(l as i64 - 1) {
            wigner_d_column(m, -(flm.spin as i64), theta, &mut dcol);
            let lmin = m.unsigned_abs().max(flm.spin.unsigned_abs() as u64) as usize;
            let mut acc = Complex64::ZERO;
            for ell in lmin..l {
                let y = sign
                    * ((2.0 * ell as f64 + 1.0) / (4.0 * std::f64::consts::PI)).sqrt()
                    * dcol[ell];
                acc += flm.values[flm_index(ell, m)] * y;
            }
            let bin = if m >= 0 { m as usize } else { (n_phi as i64 + m) as usize };
            gm[bin] = acc;
        }
        let row = &mut out[k * n_phi..(k + 1) * n_phi];
        if use_fft {
            row.copy_from_slice(&gm);
            grid.fft_inv.process(row);
        } else {
            for (j, &phi) in grid.phis().iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for m in -(l as i64 - 1)..=(l as i64 - 1) {
                    let bin = if m >= 0 { m as usize } else { (n_phi as i64 + m) as usize };
                    acc += gm[bin] * Complex64::from_polar(1.0, m as f64 * phi);
                }
                row[j] = acc;
            }
        }
    }
    Ok(out)
}

fn check_sht_args(grid: &SphereGrid, n_samples: usize, spin: i32) -> Result<usize> {
    let l = grid.bandlimit();
    if spin.unsigned_abs() as usize >= l {
        return Err(Error::InvalidArg(format!(
            "|spin| = {} must be below the bandlimit L = {l}",
            spin.unsigned_abs()
        )));
    }
    if n_samples != grid.n_samples() {
        return Err(Error::shape("sht samples", grid.n_samples(), n_samples));
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    fn random_flm(l: usize, spin: i32, seed: u64) -> Flm {
        let mut rng = stream_rng(seed, Stream::Test);
        let mut flm = Flm::zeros(l, spin);
        for ell in spin.unsigned_abs() as usize..l {
            for m in -(ell as i64)..=(ell as i64) {
                flm.set(
                    ell,
                    m,
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                );
            }
        }
        flm
    }

    #[test]
    fn constant_field_is_pure_monopole() {
        let grid = SphereGrid::build(8).unwrap();
        let samples = vec![Complex64::ONE; grid.n_samples()];
        let flm = sht_forward(&grid, &samples, 0).unwrap();
        let want = 2.0 * std::f64::consts::PI.sqrt();
        assert!((flm.get(0, 0) - want).norm() < 1e-12);
        for (i, v) in flm.values.iter().enumerate() {
            if i != 0 {
                assert!(v.norm() < 1e-12, "leak at {i}");
            }
        }
        // and back: the monopole synthesizes to the constant field
        let back = sht_inverse(&grid, &flm).unwrap();
        for v in &back {
            assert!((v - Complex64::ONE).norm() < 1e-12);
        }
    }

    #[test]
    fn picks_out_single_harmonic() {
        let grid = SphereGrid::build(6).unwrap();
        let mut unit = Flm::zeros(6, 0);
        unit.set(1, 0, Complex64::ONE);
        let samples = sht_inverse(&grid, &unit).unwrap();
        let flm = sht_forward(&grid, &samples, 0).unwrap();
        for ell in 0..6 {
            for m in -(ell as i64)..=(ell as i64) {
                let want = if ell == 1 && m == 0 { 1.0 } else { 0.0 };
                assert!((flm.get(ell, m) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trips_all_spins() {
        for &l in &[4usize, 8, 16] {
            let grid = SphereGrid::build(l).unwrap();
            for &spin in &[0i32, 1, -1, 2, -2] {
                let flm = random_flm(l, spin, 5 + l as u64);
                let f = sht_inverse(&grid, &flm).unwrap();
                let back = sht_forward(&grid, &f, spin).unwrap();
                let err = crate::util::rel_err(&back.values, &flm.values);
                assert!(err < 1e-11, "L={l} spin={spin}: {err}");
            }
        }
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let grid = SphereGrid::build(9).unwrap();
        let flm = random_flm(9, 1, 3);
        let fast = sht_inverse(&grid, &flm).unwrap();
        let slow = sht_inverse_direct(&grid, &flm).unwrap();
        assert!(crate::util::max_abs_diff(&fast, &slow) < 1e-12);
        let ffast = sht_forward(&grid, &fast, 1).unwrap();
        let fslow = sht_forward_direct(&grid, &fast, 1).unwrap();
        assert!(crate::util::max_abs_diff(&ffast.values, &fslow.values) < 1e-12);
    }

    #[test]
    fn real_field_conjugate_symmetry() {
        let l = 8;
        let grid = SphereGrid::build(l).unwrap();
        let mut rng = stream_rng(9, Stream::Test);
        let mut flm = Flm::zeros(l, 0);
        for ell in 0..l {
            flm.set(ell, 0, Complex64::new(rng.random::<f64>() - 0.5, 0.0));
            for m in 1..=(ell as i64) {
                let v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                flm.set(ell, m, v);
                let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                flm.set(ell, -m, sgn * v.conj());
            }
        }
        let f = sht_inverse(&grid, &flm).unwrap();
        for v in &f {
            assert!(v.im.abs() < 1e-12, "imaginary residual {}", v.im);
        }
    }

    #[test]
    fn spin_lowering_enforced() {
        let grid = SphereGrid::build(6).unwrap();
        let mut rng = stream_rng(4, Stream::Test);
        let samples: Vec<Complex64> = (0..grid.n_samples())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let flm = sht_forward(&grid, &samples, 2).unwrap();
        for ell in 0..2usize {
            for m in -(ell as i64)..=(ell as i64) {
                assert_eq!(flm.get(ell, m), Complex64::ZERO);
            }
        }
    }

    #[test]
    fn synthesis_adjoint_identity() {
        // <sht_inverse(c), g>_grid = <c, adjoint(g)> where the adjoint of
        // synthesis is the quadrature-weighted analysis, i.e. sht_forward.
        let l = 10;
        let spin = 1;
        let grid = SphereGrid::build(l).unwrap();
        let flm = random_flm(l, spin, 31);
        let mut rng = stream_rng(32, Stream::Test);
        let g: Vec<Complex64> = (0..grid.n_samples())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let synth = sht_inverse(&grid, &flm).unwrap();
        let mut lhs = Complex64::ZERO;
        for k in 0..grid.n_theta() {
            let w = grid.sample_weight(k);
            for j in 0..grid.n_phi() {
                let i = k * grid.n_phi() + j;
                lhs += w * synth[i] * g[i].conj();
            }
        }
        let adj = sht_forward(&grid, &g, spin).unwrap();
        let rhs = crate::util::dot(&flm.values, &adj.values);
        assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(rhs.norm()));
    }

    #[test]
    fn quadrature_orthonormality_at_top_bandlimit() {
        // Full Gram matrices are infeasible at L = 64; the equivalent
        // statement is that forward∘inverse acts as the identity (the Gram
        // matrix applied to random coefficient vectors).
        let l = 64;
        let grid = SphereGrid::build(l).unwrap();
        for &spin in &[0i32, 2, -2] {
            let flm = random_flm(l, spin, 64 + spin.unsigned_abs() as u64);
            let f = sht_inverse(&grid, &flm).unwrap();
            let back = sht_forward(&grid, &f, spin).unwrap();
            let err = crate::util::rel_err(&back.values, &flm.values);
            assert!(err < 1e-12, "spin={spin}: {err:.3e}");
        }
    }

    #[test]
    fn quadrature_orthonormality_small_l() {
        // Full Gram matrix of sampled harmonics at modest L, all test spins.
        let l = 8;
        let grid = SphereGrid::build(l).unwrap();
        for &spin in &[0i32, -1, 2] {
            let smin = spin.unsigned_abs() as usize;
            let mut sampled = Vec::new();
            for ell in smin..l {
                for m in -(ell as i64)..=(ell as i64) {
                    let mut unit = Flm::zeros(l, spin);
                    unit.set(ell, m, Complex64::ONE);
                    sampled.push(sht_inverse(&grid, &unit).unwrap());
                }
            }
            for (a, fa) in sampled.iter().enumerate() {
                for (b, fb) in sampled.iter().enumerate() {
                    let mut g = Complex64::ZERO;
                    for k in 0..grid.n_theta() {
                        let w = grid.sample_weight(k);
                        for j in 0..grid.n_phi() {
                            let idx = k * grid.n_phi() + j;
                            g += w * fa[idx] * fb[idx].conj();
                        }
                    }
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!(
                        (g - want).norm() < 1e-12,
                        "spin={spin} a={a} b={b}: {g}"
                    );
                }
            }
        }
    }
}
