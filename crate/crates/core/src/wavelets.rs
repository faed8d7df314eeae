//! Directional scale-discretized wavelet dictionary on the ball.
//!
//! The dictionary lives entirely in harmonic space. A smooth partition of
//! unity in log_λ(ℓ) and log_λ(p) — built from the bump function
//! s(t) = exp(−1/(1−t²)) — yields per-axis kernels κ^j with compact support
//! (λ^{j−1}, λ^{j+1}); wavelet kernels are tensor products
//! Ψ^{jj'}_{ℓnp} = κ_ang^j(ℓ) ζ_{ℓn} κ_rad^{j'}(p), with the directional
//! split ζ normalized so Σ_n |ζ_{ℓn}|² = 1, and the scaling kernel absorbs
//! the remaining low-frequency content:
//! |Υ_{ℓp}|² = 1 − (1 − Σ_j κ_ang^j(ℓ)²)(1 − Σ_j' κ_rad^{j'}(p)²).
//!
//! The squared kernels sum to one at every (ℓ, p), so analysis is an
//! isometry (Parseval frame, A = B = 1) and synthesis — which is also the
//! adjoint of analysis — inverts it exactly.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::ball::{BallCoeffs, BallPlan};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// One (j, j') wavelet band: separable kernel factors plus the index layout
/// of its coefficient block.
#[derive(Debug, Clone)]
pub struct WaveletBand {
    pub j: usize,
    pub jp: usize,
    /// Angular support window [ell_lo, ell_hi).
    pub ell_lo: usize,
    pub ell_hi: usize,
    /// Radial support window [p_lo, p_hi).
    pub p_lo: usize,
    pub p_hi: usize,
    kappa_ang: Vec<f64>,
    kappa_rad: Vec<f64>,
    /// Directional split over n, per ℓ in the window: zeta[(ℓ−ell_lo)·(2N−1) + n+N−1].
    zeta: Vec<f64>,
    /// Offset of each ℓ block inside one radial slice of the coefficient block.
    ell_offsets: Vec<usize>,
    /// Number of (ℓ, m, n) entries per radial slice.
    harm_len: usize,
    n_dir: usize,
}

impl WaveletBand {
    /// Kernel value Ψ^{jj'}_{ℓnp}; zero outside the support windows.
    pub fn kernel(&self, ell: usize, n: i64, p: usize) -> f64 {
        if ell < self.ell_lo || ell >= self.ell_hi || p < self.p_lo || p >= self.p_hi {
            return 0.0;
        }
        if n.unsigned_abs() as usize >= self.n_dir {
            return 0.0;
        }
        let zi = (ell - self.ell_lo) * (2 * self.n_dir - 1) + (n + self.n_dir as i64 - 1) as usize;
        self.kappa_ang[ell - self.ell_lo] * self.zeta[zi] * self.kappa_rad[p - self.p_lo]
    }

    /// Directional orders carried at degree ℓ: |n| ≤ min(ℓ, N−1).
    #[inline]
    fn n_max(&self, ell: usize) -> i64 {
        (self.n_dir - 1).min(ell) as i64
    }

    /// Flat index of (p, ℓ, m, n) inside this band's coefficient block.
    #[inline]
    pub fn coeff_index(&self, p: usize, ell: usize, m: i64, n: i64) -> usize {
        let nmax = self.n_max(ell);
        (p - self.p_lo) * self.harm_len
            + self.ell_offsets[ell - self.ell_lo]
            + (m + ell as i64) as usize * (2 * nmax + 1) as usize
            + (n + nmax) as usize
    }

    /// Number of coefficients in this band's block.
    pub fn len(&self) -> usize {
        (self.p_hi - self.p_lo) * self.harm_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Harmonic tiling of the (ℓ, p) plane: scaling kernel plus directional
/// wavelet kernels with the resolution-of-identity property.
#[derive(Debug, Clone)]
pub struct Tiling {
    pub l: usize,
    pub p: usize,
    pub n_dir: usize,
    pub lam_ang: f64,
    pub lam_rad: f64,
    pub j0_ang: usize,
    pub j0_rad: usize,
    pub j_ang: usize,
    pub j_rad: usize,
    /// Υ_{ℓp}, flat index ℓ·P + p.
    scaling: Vec<f64>,
    bands: Vec<WaveletBand>,
}

/// Smooth bump s(t) = exp(−1/(1−t²)) on (−1, 1).
fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Transition profile k_λ(t): 1 for t ≤ 1/λ, 0 for t ≥ 1, smoothly and
/// monotonically decreasing in between. Exactness of the tiling identity does
/// not depend on the integration accuracy here, only smoothness does.
fn transition(lam: f64, t: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
    let lo = 1.0 / lam;
    if t <= lo {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let s_arg = |x: f64| 2.0 * lam / (lam - 1.0) * (x - lo) - 1.0;
    let integrand = |x: f64| {
        let s = bump(s_arg(x));
        s * s / x
    };
    let integrate = |a: f64, b: f64| -> f64 {
        let (nodes, weights) = gl;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        nodes
            .iter()
            .zip(weights)
            .map(|(&x, &w)| w * integrand(mid + half * x))
            .sum::<f64>()
            * half
    };
    let num = integrate(t, 1.0);
    let den = integrate(lo, 1.0);
    (num / den).clamp(0.0, 1.0)
}

/// Directional split weights: binomial profile over orders n with
/// |n| ≤ min(ℓ, N−1) and n ≡ N−1 (mod 2), normalized to Σ_n ζ² = 1.
/// N = 1 reduces to the axisymmetric ζ_{ℓ0} = 1.
fn directional_split(n_dir: usize, ell: usize) -> Vec<f64> {
    let width = 2 * n_dir - 1;
    let mut zeta = vec![0.0; width];
    let parity = ((n_dir - 1) % 2) as i64;
    let nmax = (n_dir as i64 - 1).min(ell as i64);
    let mut norm = 0.0;
    for n in -nmax..=nmax {
        if n.rem_euclid(2) != parity {
            continue;
        }
        let k = ((n + n_dir as i64 - 1) / 2) as usize;
        let c = sqrt_binomial(n_dir - 1, k);
        zeta[(n + n_dir as i64 - 1) as usize] = c;
        norm += c * c;
    }
    if norm > 0.0 {
        for z in zeta.iter_mut() {
            *z /= norm.sqrt();
        }
    }
    zeta
}

fn sqrt_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v.sqrt()
}

impl Tiling {
    /// Build the tiling for bandlimits (L, P), directional band N, dilations
    /// λ_ang, λ_rad and lowest scales. The highest scales are
    /// J = ceil(log_λ(L−1)) (resp. P−1) so the supports cover [0,L)×[0,P).
    pub fn build(
        l: usize,
        p: usize,
        n_dir: usize,
        lam_ang: f64,
        lam_rad: f64,
        j0_ang: usize,
        j0_rad: usize,
    ) -> Result<Arc<Self>> {
        if l < 2 || p < 1 {
            return Err(Error::InvalidArg("tiling needs L >= 2 and P >= 1".into()));
        }
        if !(lam_ang > 1.0) || !(lam_rad > 1.0) {
            return Err(Error::InvalidArg("dilation factors must exceed 1".into()));
        }
        if n_dir == 0 || n_dir > l {
            return Err(Error::InvalidArg(format!(
                "directional band N must satisfy 1 <= N <= L, got {n_dir}"
            )));
        }
        let j_of = |lam: f64, band: usize| -> usize {
            if band <= 2 {
                0
            } else {
                ((band - 1) as f64).log(lam).ceil() as usize
            }
        };
        let j_ang = j_of(lam_ang, l);
        let j_rad = j_of(lam_rad, p);
        if j0_ang > j_ang || j0_rad > j_rad {
            return Err(Error::InvalidArg(format!(
                "lowest scales (J0_ang={j0_ang}, J0_rad={j0_rad}) exceed the top scales (J_ang={j_ang}, J_rad={j_rad})"
            )));
        }

        let gl = gauss_legendre(64)?;
        // Memoized k_λ evaluations keyed by (axis, index, scale) so telescoping
        // sums reuse bit-identical values.
        let mut cache: HashMap<(u8, usize, usize), f64> = HashMap::new();
        let mut k_at = |axis: u8, lam: f64, idx: usize, j: usize| -> f64 {
            *cache
                .entry((axis, idx, j))
                .or_insert_with(|| transition(lam, idx as f64 / lam.powi(j as i32), &gl))
        };

        // Per-axis wavelet profiles: κ_j(ℓ)² = k(ℓ/λ^{j+1}) − k(ℓ/λ^j), with
        // k decreasing from 1 to 0.
        let kappa = |k_next: f64, k_this: f64| -> f64 { (k_next - k_this).max(0.0).sqrt() };
        let mut ang_profiles: Vec<Vec<f64>> = Vec::new(); // [j - j0][ℓ]
        for j in j0_ang..=j_ang {
            let prof: Vec<f64> = (0..l)
                .map(|ell| kappa(k_at(0, lam_ang, ell, j + 1), k_at(0, lam_ang, ell, j)))
                .collect();
            ang_profiles.push(prof);
        }
        let mut rad_profiles: Vec<Vec<f64>> = Vec::new();
        for jp in j0_rad..=j_rad {
            let prof: Vec<f64> = (0..p)
                .map(|q| kappa(k_at(1, lam_rad, q, jp + 1), k_at(1, lam_rad, q, jp)))
                .collect();
            rad_profiles.push(prof);
        }

        let mut scaling = vec![0.0; l * p];
        for ell in 0..l {
            for q in 0..p {
                let ang_hi: f64 = ang_profiles.iter().map(|prof| prof[ell] * prof[ell]).sum();
                let rad_hi: f64 = rad_profiles.iter().map(|prof| prof[q] * prof[q]).sum();
                scaling[ell * p + q] = (1.0 - ang_hi * rad_hi).max(0.0).sqrt();
            }
        }

        let support = |lam: f64, j: usize, band: usize| -> (usize, usize) {
            // Integer indices strictly inside (λ^{j−1}, λ^{j+1}).
            let lo = lam.powi(j as i32 - 1);
            let hi = lam.powi(j as i32 + 1);
            let lo_idx = (lo.floor() as usize + 1).max(1);
            let hi_idx = if hi.ceil() == hi { hi as usize } else { hi.ceil() as usize };
            (lo_idx.min(band), hi_idx.min(band).max(lo_idx.min(band)))
        };

        let mut bands = Vec::new();
        for (ji, j) in (j0_ang..=j_ang).enumerate() {
            for (jpi, jp) in (j0_rad..=j_rad).enumerate() {
                let (ell_lo, ell_hi) = support(lam_ang, j, l);
                let (p_lo, p_hi) = support(lam_rad, jp, p);
                if ell_lo >= ell_hi || p_lo >= p_hi {
                    continue;
                }
                let kappa_ang: Vec<f64> =
                    (ell_lo..ell_hi).map(|ell| ang_profiles[ji][ell]).collect();
                let kappa_rad: Vec<f64> = (p_lo..p_hi).map(|q| rad_profiles[jpi][q]).collect();
                let width = 2 * n_dir - 1;
                let mut zeta = vec![0.0; (ell_hi - ell_lo) * width];
                for ell in ell_lo..ell_hi {
                    let z = directional_split(n_dir, ell);
                    zeta[(ell - ell_lo) * width..(ell - ell_lo + 1) * width].copy_from_slice(&z);
                }
                let mut ell_offsets = Vec::with_capacity(ell_hi - ell_lo);
                let mut harm_len = 0usize;
                for ell in ell_lo..ell_hi {
                    ell_offsets.push(harm_len);
                    let nmax = (n_dir - 1).min(ell);
                    harm_len += (2 * ell + 1) * (2 * nmax + 1);
                }
                bands.push(WaveletBand {
                    j,
                    jp,
                    ell_lo,
                    ell_hi,
                    p_lo,
                    p_hi,
                    kappa_ang,
                    kappa_rad,
                    zeta,
                    ell_offsets,
                    harm_len,
                    n_dir,
                });
            }
        }

        Ok(Arc::new(Tiling {
            l,
            p,
            n_dir,
            lam_ang,
            lam_rad,
            j0_ang,
            j0_rad,
            j_ang,
            j_rad,
            scaling,
            bands,
        }))
    }

    /// Υ_{ℓp}.
    pub fn scaling_kernel(&self, ell: usize, p: usize) -> f64 {
        self.scaling[ell * self.p + p]
    }

    pub fn bands(&self) -> &[WaveletBand] {
        &self.bands
    }

    pub fn band(&self, j: usize, jp: usize) -> Option<&WaveletBand> {
        self.bands.iter().find(|b| b.j == j && b.jp == jp)
    }

    /// Max deviation of |Υ|² + Σ_{jj'n} |Ψ|² from 1 over the (ℓ, p) plane.
    pub fn identity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for ell in 0..self.l {
            for q in 0..self.p {
                let mut total = self.scaling_kernel(ell, q).powi(2);
                for b in &self.bands {
                    for n in -(self.n_dir as i64 - 1)..=(self.n_dir as i64 - 1) {
                        total += b.kernel(ell, n, q).powi(2);
                    }
                }
                worst = worst.max((total - 1.0).abs());
            }
        }
        worst
    }

    /// Total number of wavelet (band) coefficients, excluding the scaling part.
    pub fn n_band_coeffs(&self) -> usize {
        self.bands.iter().map(|b| b.len()).sum()
    }

    /// Number of scaling coefficients (a full ball coefficient set).
    pub fn n_scaling_coeffs(&self) -> usize {
        self.l * self.l * self.p
    }
}

/// Wavelet-domain coefficients: the low-pass scaling block (ball coefficients
/// scaled by Υ) plus one Wigner-Laguerre block per (j, j') band.
#[derive(Clone)]
pub struct WaveletCoeffs {
    pub tiling: Arc<Tiling>,
    pub scaling: Vec<Complex64>,
    pub bands: Vec<Vec<Complex64>>,
}

impl std::fmt::Debug for WaveletCoeffs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WaveletCoeffs")
            .field("n_scaling", &self.scaling.len())
            .field("n_bands", &self.bands.len())
            .finish()
    }
}

impl WaveletCoeffs {
    pub fn zeros(tiling: &Arc<Tiling>) -> Self {
        WaveletCoeffs {
            tiling: Arc::clone(tiling),
            scaling: vec![Complex64::ZERO; tiling.n_scaling_coeffs()],
            bands: tiling
                .bands()
                .iter()
                .map(|b| vec![Complex64::ZERO; b.len()])
                .collect(),
        }
    }

    /// Total coefficient count (scaling + bands).
    pub fn len(&self) -> usize {
        self.scaling.len() + self.bands.iter().map(Vec::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Σ |w|² over every coefficient.
    pub fn energy(&self) -> f64 {
        self.scaling.iter().map(|v| v.norm_sqr()).sum::<f64>()
            + self
                .bands
                .iter()
                .map(|b| b.iter().map(|v| v.norm_sqr()).sum::<f64>())
                .sum::<f64>()
    }

    /// ℓ₁ norm, optionally excluding the scaling block.
    pub fn l1_norm(&self, include_scaling: bool) -> f64 {
        let bands: f64 = self
            .bands
            .iter()
            .map(|b| b.iter().map(|v| v.norm()).sum::<f64>())
            .sum();
        if include_scaling {
            bands + self.scaling.iter().map(|v| v.norm()).sum::<f64>()
        } else {
            bands
        }
    }

    /// Flatten into one contiguous vector (scaling block first, then bands in
    /// tiling order).
    pub fn to_flat(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.scaling);
        for b in &self.bands {
            out.extend_from_slice(b);
        }
        out
    }

    pub fn from_flat(tiling: &Arc<Tiling>, flat: &[Complex64]) -> crate::error::Result<Self> {
        let mut w = WaveletCoeffs::zeros(tiling);
        if flat.len() != w.len() {
            return Err(Error::shape("WaveletCoeffs::from_flat", w.len(), flat.len()));
        }
        let ns = w.scaling.len();
        w.scaling.copy_from_slice(&flat[..ns]);
        let mut offset = ns;
        for b in w.bands.iter_mut() {
            let n = b.len();
            b.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(w)
    }
}

fn check_tiling(c: &BallCoeffs, t: &Tiling, context: &'static str) -> Result<()> {
    let prof = c.plan.profile();
    if prof.l != t.l || prof.p != t.p {
        return Err(Error::ProfileMismatch(format!(
            "{context}: coefficients are (L={}, P={}), tiling is (L={}, P={})",
            prof.l, prof.p, t.l, t.p
        )));
    }
    Ok(())
}

/// Analysis: scaling part Υ_{ℓp} f_{ℓmp} plus per-band directional
/// coefficients f_{ℓmp} conj(Ψ^{jj'}_{ℓnp}). With the Parseval tiling this
/// map is an isometry.
pub fn wavelet_analysis(c: &BallCoeffs, tiling: &Arc<Tiling>) -> Result<WaveletCoeffs> {
    check_tiling(c, tiling, "wavelet_analysis")?;
    let prof = c.plan.profile();
    let mut w = WaveletCoeffs::zeros(tiling);
    for p in 0..prof.p {
        for ell in 0..prof.l {
            let u = tiling.scaling_kernel(ell, p);
            if u != 0.0 {
                for m in -(ell as i64)..=(ell as i64) {
                    let i = prof.coeff_index(p, ell, m);
                    w.scaling[i] = u * c.values[i];
                }
            }
        }
    }
    for (bi, band) in tiling.bands().iter().enumerate() {
        let block = &mut w.bands[bi];
        for p in band.p_lo..band.p_hi {
            for ell in band.ell_lo..band.ell_hi {
                let nmax = band.n_max(ell);
                for m in -(ell as i64)..=(ell as i64) {
                    let f = c.values[prof.coeff_index(p, ell, m)];
                    for n in -nmax..=nmax {
                        let k = band.kernel(ell, n, p);
                        if k != 0.0 {
                            block[band.coeff_index(p, ell, m, n)] = f * k;
                        }
                    }
                }
            }
        }
    }
    Ok(w)
}

/// Synthesis: Υ ⊙ scaling + Σ_{jj'n} Ψ ⊙ bands. Exact inverse of analysis on
/// its range and, by the Parseval normalization, also its adjoint.
pub fn wavelet_synthesis(w: &WaveletCoeffs, plan: &Arc<BallPlan>) -> Result<BallCoeffs> {
    let tiling = &w.tiling;
    let prof = plan.profile();
    if prof.l != tiling.l || prof.p != tiling.p {
        return Err(Error::ProfileMismatch(format!(
            "wavelet_synthesis: plan is (L={}, P={}), tiling is (L={}, P={})",
            prof.l, prof.p, tiling.l, tiling.p
        )));
    }
    let mut out = BallCoeffs::zeros(plan);
    for p in 0..prof.p {
        for ell in 0..prof.l {
            let u = tiling.scaling_kernel(ell, p);
            if u != 0.0 {
                for m in -(ell as i64)..=(ell as i64) {
                    let i = prof.coeff_index(p, ell, m);
                    out.values[i] += u * w.scaling[i];
                }
            }
        }
    }
    for (bi, band) in tiling.bands().iter().enumerate() {
        let block = &w.bands[bi];
        for p in band.p_lo..band.p_hi {
            for ell in band.ell_lo..band.ell_hi {
                let nmax = band.n_max(ell);
                for m in -(ell as i64)..=(ell as i64) {
                    let mut acc = Complex64::ZERO;
                    for n in -nmax..=nmax {
                        let k = band.kernel(ell, n, p);
                        if k != 0.0 {
                            acc += block[band.coeff_index(p, ell, m, n)] * k;
                        }
                    }
                    out.values[prof.coeff_index(p, ell, m)] += acc;
                }
            }
        }
    }
    Ok(out)
}

/// Adjoint of analysis; for the Parseval tiling this is synthesis.
pub fn wavelet_analysis_adjoint(w: &WaveletCoeffs, plan: &Arc<BallPlan>) -> Result<BallCoeffs> {
    wavelet_synthesis(w, plan)
}

/// Adjoint of synthesis; for the Parseval tiling this is analysis.
pub fn wavelet_synthesis_adjoint(c: &BallCoeffs, tiling: &Arc<Tiling>) -> Result<WaveletCoeffs> {
    wavelet_analysis(c, tiling)
}

/// Debug aid: synthesize the axisymmetric (n = 0) component of one band as a
/// field on the ball grid. Wavelet coefficients are otherwise never sampled.
pub fn sample_band_axisym(
    w: &WaveletCoeffs,
    j: usize,
    jp: usize,
    plan: &Arc<BallPlan>,
) -> Result<crate::ball::BallSamples> {
    let tiling = &w.tiling;
    let band_idx = tiling
        .bands()
        .iter()
        .position(|b| b.j == j && b.jp == jp)
        .ok_or_else(|| Error::InvalidArg(format!("no wavelet band (j={j}, j'={jp})")))?;
    let band = &tiling.bands()[band_idx];
    let block = &w.bands[band_idx];
    let prof = plan.profile();
    let mut c = BallCoeffs::zeros(plan);
    for p in band.p_lo..band.p_hi {
        for ell in band.ell_lo..band.ell_hi {
            for m in -(ell as i64)..=(ell as i64) {
                c.values[prof.coeff_index(p, ell, m)] = block[band.coeff_index(p, ell, m, 0)];
            }
        }
    }
    plan.inverse(&c)
}
