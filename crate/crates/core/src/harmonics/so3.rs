//! Wigner transforms on the rotation group.
//!
//! Functions on SO(3) with Euler angles (α, β, γ) are expanded in the
//! orthonormal basis `E^ℓ_{mn}(ρ) = sqrt((2ℓ+1)/8π²) e^{imα} d^ℓ_{mn}(β) e^{inγ}`
//! (the conjugate Wigner D normalized to unit norm), so analysis and
//! synthesis form an exact round-trip pair for bandlimited inputs and the
//! analysis map is an isometry. The grid is equiangular in α (2L−1 points)
//! and γ (2N−1 points) with Gauss-Legendre quadrature in cos β.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::sphere::flm_index;
use super::wigner::wigner_d_column;
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Sampling grid on SO(3) for angular bandlimit L and directional band N.
#[derive(Clone)]
pub struct So3Grid {
    bandlimit: usize,
    n_dir: usize,
    betas: Vec<f64>,
    beta_weights: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for So3Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("So3Grid")
            .field("bandlimit", &self.bandlimit)
            .field("n_dir", &self.n_dir)
            .finish()
    }
}

impl So3Grid {
    pub fn build(bandlimit: usize, n_dir: usize) -> Result<Self> {
        if bandlimit == 0 {
            return Err(Error::InvalidArg("angular bandlimit L must be >= 1".into()));
        }
        if n_dir == 0 || n_dir > bandlimit {
            return Err(Error::InvalidArg(format!(
                "directional band N must satisfy 1 <= N <= L, got N={n_dir}, L={bandlimit}"
            )));
        }
        let (x, w) = gauss_legendre(bandlimit)?;
        let betas: Vec<f64> = x.iter().map(|&xi| xi.clamp(-1.0, 1.0).acos()).collect();
        let n_alpha = 2 * bandlimit - 1;
        let mut planner = FftPlanner::new();
        Ok(So3Grid {
            bandlimit,
            n_dir,
            betas,
            beta_weights: w,
            fft_fwd: planner.plan_fft_forward(n_alpha),
            fft_inv: planner.plan_fft_inverse(n_alpha),
        })
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn n_dir(&self) -> usize {
        self.n_dir
    }

    pub fn n_alpha(&self) -> usize {
        2 * self.bandlimit - 1
    }

    pub fn n_beta(&self) -> usize {
        self.betas.len()
    }

    pub fn n_gamma(&self) -> usize {
        2 * self.n_dir - 1
    }

    pub fn n_samples(&self) -> usize {
        self.n_beta() * self.n_alpha() * self.n_gamma()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Haar-measure weight of one grid sample.
    pub fn sample_weight(&self, beta_idx: usize) -> f64 {
        let tp = 2.0 * std::f64::consts::PI;
        self.beta_weights[beta_idx] * (tp / self.n_alpha() as f64) * (tp / self.n_gamma() as f64)
    }

    /// Sample layout: β-major, then α, then γ.
    #[inline]
    pub fn sample_index(&self, beta_idx: usize, alpha_idx: usize, gamma_idx: usize) -> usize {
        (beta_idx * self.n_alpha() + alpha_idx) * self.n_gamma() + gamma_idx
    }
}

/// Wigner coefficients: flat index (n + N − 1)·L² + ℓ² + ℓ + m, zero outside
/// |m| ≤ ℓ, |n| ≤ min(ℓ, N−1).
#[derive(Debug, Clone)]
pub struct WignerCoeffs {
    pub bandlimit: usize,
    pub n_dir: usize,
    pub values: Vec<Complex64>,
}

impl WignerCoeffs {
    pub fn zeros(bandlimit: usize, n_dir: usize) -> Self {
        WignerCoeffs {
            bandlimit,
            n_dir,
            values: vec![Complex64::ZERO; (2 * n_dir - 1) * bandlimit * bandlimit],
        }
    }

    #[inline]
    pub fn idx(&self, ell: usize, m: i64, n: i64) -> usize {
        (n + self.n_dir as i64 - 1) as usize * self.bandlimit * self.bandlimit
            + flm_index(ell, m)
    }

    pub fn get(&self, ell: usize, m: i64, n: i64) -> Complex64 {
        self.values[self.idx(ell, m, n)]
    }

    pub fn set(&mut self, ell: usize, m: i64, n: i64, v: Complex64) {
        let i = self.idx(ell, m, n);
        self.values[i] = v;
    }
}

fn ortho_norm(ell: usize) -> f64 {
    ((2.0 * ell as f64 + 1.0) / (8.0 * std::f64::consts::PI * std::f64::consts::PI)).sqrt()
}

/// Analysis on SO(3): w_{ℓmn} = ⟨f, E^ℓ_{mn}⟩ under the Haar quadrature.
pub fn wigner_forward(grid: &So3Grid, samples: &[Complex64]) -> Result<WignerCoeffs> {
    if samples.len() != grid.n_samples() {
        return Err(Error::shape("wigner_forward", grid.n_samples(), samples.len()));
    }
    let l = grid.bandlimit();
    let nd = grid.n_dir();
    let n_alpha = grid.n_alpha();
    let n_gamma = grid.n_gamma();
    let mut out = WignerCoeffs::zeros(l, nd);
    let mut arow = vec![Complex64::ZERO; n_alpha];
    let mut dcol = vec![0.0; l];
    // Scratch holding the (m, n) spectrum of one β-ring.
    let mut spec = vec![Complex64::ZERO; n_alpha * n_gamma];
    for (k, &beta) in grid.betas().iter().enumerate() {
        // α FFT per γ column, then a short direct DFT over γ.
        for c in 0..n_gamma {
            for a in 0..n_alpha {
                arow[a] = samples[grid.sample_index(k, a, c)];
            }
            grid.fft_fwd.process(&mut arow);
            for a in 0..n_alpha {
                spec[a * n_gamma + c] = arow[a];
            }
        }
        let wq = grid.sample_weight(k);
        for m in -(l as i64 - 1)..=(l as i64 - 1) {
            let abin = if m >= 0 { m as usize } else { (n_alpha as i64 + m) as usize };
            for n in -(nd as i64 - 1)..=(nd as i64 - 1) {
                let mut fm = Complex64::ZERO;
                for c in 0..n_gamma {
                    let gamma = 2.0 * std::f64::consts::PI * c as f64 / n_gamma as f64;
                    fm += spec[abin * n_gamma + c]
                        * Complex64::from_polar(1.0, -(n as f64) * gamma);
                }
                wigner_d_column(m, n, beta, &mut dcol);
                let lmin = m.unsigned_abs().max(n.unsigned_abs()) as usize;
                for ell in lmin..l {
                    let e = ortho_norm(ell) * dcol[ell];
                    let i = out.idx(ell, m, n);
                    out.values[i] += wq * fm * e;
                }
            }
        }
    }
    Ok(out)
}

/// Synthesis on SO(3): f(ρ) = Σ w_{ℓmn} E^ℓ_{mn}(ρ) on the grid.
pub fn wigner_inverse(grid: &So3Grid, coeffs: &WignerCoeffs) -> Result<Vec<Complex64>> {
    let l = grid.bandlimit();
    let nd = grid.n_dir();
    if coeffs.bandlimit != l || coeffs.n_dir != nd {
        return Err(Error::ProfileMismatch(format!(
            "wigner_inverse: coeffs built for (L={}, N={}), grid is (L={l}, N={nd})",
            coeffs.bandlimit, coeffs.n_dir
        )));
    }
    let n_alpha = grid.n_alpha();
    let n_gamma = grid.n_gamma();
    let mut out = vec![Complex64::ZERO; grid.n_samples()];
    let mut dcol = vec![0.0; l];
    let mut spec = vec![Complex64::ZERO; n_alpha * n_gamma];
    let mut arow = vec![Complex64::ZERO; n_alpha];
    for (k, &beta) in grid.betas().iter().enumerate() {
        for v in spec.iter_mut() {
            *v = Complex64::ZERO;
        }
        for m in -(l as i64 - 1)..=(l as i64 - 1) {
            let abin = if m >= 0 { m as usize } else { (n_alpha as i64 + m) as usize };
            for n in -(nd as i64 - 1)..=(nd as i64 - 1) {
                wigner_d_column(m, n, beta, &mut dcol);
                let lmin = m.unsigned_abs().max(n.unsigned_abs()) as usize;
                let mut acc = Complex64::ZERO;
                for ell in lmin..l {
                    acc += coeffs.values[coeffs.idx(ell, m, n)] * ortho_norm(ell) * dcol[ell];
                }
                // Distribute over the γ phase directly (n_gamma is tiny).
                for c in 0..n_gamma {
                    let gamma = 2.0 * std::f64::consts::PI * c as f64 / n_gamma as f64;
                    spec[abin * n_gamma + c] += acc * Complex64::from_polar(1.0, n as f64 * gamma);
                }
            }
        }
        for c in 0..n_gamma {
            for a in 0..n_alpha {
                arow[a] = spec[a * n_gamma + c];
            }
            grid.fft_inv.process(&mut arow);
            for a in 0..n_alpha {
                out[grid.sample_index(k, a, c)] = arow[a];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::sphere::{sht_forward, SphereGrid};
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    fn random_coeffs(l: usize, nd: usize, seed: u64) -> WignerCoeffs {
        let mut rng = stream_rng(seed, Stream::Test);
        let mut w = WignerCoeffs::zeros(l, nd);
        for n in -(nd as i64 - 1)..=(nd as i64 - 1) {
            for ell in n.unsigned_abs() as usize..l {
                for m in -(ell as i64)..=(ell as i64) {
                    w.set(
                        ell,
                        m,
                        n,
                        Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    );
                }
            }
        }
        w
    }

    #[test]
    fn dc_coefficient_gives_constant_function() {
        let grid = So3Grid::build(4, 2).unwrap();
        let mut w = WignerCoeffs::zeros(4, 2);
        w.set(0, 0, 0, Complex64::ONE);
        let f = wigner_inverse(&grid, &w).unwrap();
        let want = 1.0 / (8.0 * std::f64::consts::PI * std::f64::consts::PI).sqrt();
        for v in &f {
            assert!((v - want).norm() < 1e-13);
        }
    }

    #[test]
    fn round_trips() {
        for &(l, nd) in &[(4usize, 1usize), (8, 3), (16, 3)] {
            let grid = So3Grid::build(l, nd).unwrap();
            let w = random_coeffs(l, nd, 21);
            let f = wigner_inverse(&grid, &w).unwrap();
            let back = wigner_forward(&grid, &f).unwrap();
            let err = crate::util::rel_err(&back.values, &w.values);
            assert!(err < 1e-11, "L={l} N={nd}: {err}");
        }
    }

    #[test]
    fn analysis_is_isometric_on_bandlimited_inputs() {
        let grid = So3Grid::build(6, 2).unwrap();
        let w = random_coeffs(6, 2, 3);
        let f = wigner_inverse(&grid, &w).unwrap();
        let energy_grid: f64 = f
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = i / (grid.n_alpha() * grid.n_gamma());
                grid.sample_weight(k) * v.norm_sqr()
            })
            .sum();
        let energy_coeff: f64 = w.values.iter().map(|v| v.norm_sqr()).sum();
        assert!((energy_grid - energy_coeff).abs() < 1e-10 * energy_coeff);
    }

    #[test]
    fn n1_matches_spherical_transform() {
        // With N = 1 the γ direction is trivial and the transform reduces to
        // a spin-0 SHT up to the constant sqrt(2π).
        let l = 6;
        let so3 = So3Grid::build(l, 1).unwrap();
        let sph = SphereGrid::build(l).unwrap();
        let mut rng = stream_rng(8, Stream::Test);
        let g: Vec<Complex64> = (0..sph.n_samples())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        // Lift g(β, α) onto SO(3) with no γ dependence. Both grids use the
        // same Gauss-Legendre rings and 2L−1 azimuthal points.
        let mut f = vec![Complex64::ZERO; so3.n_samples()];
        for k in 0..so3.n_beta() {
            for a in 0..so3.n_alpha() {
                f[so3.sample_index(k, a, 0)] = g[k * sph.n_phi() + a];
            }
        }
        let w = wigner_forward(&so3, &f).unwrap();
        let flm = sht_forward(&sph, &g, 0).unwrap();
        let c = (2.0 * std::f64::consts::PI).sqrt();
        for ell in 0..l {
            for m in -(ell as i64)..=(ell as i64) {
                let got = w.get(ell, m, 0);
                let want = c * flm.get(ell, m);
                assert!((got - want).norm() < 1e-11, "ell={ell} m={m}: {got} vs {want}");
            }
        }
    }
}
