//! Simulation inputs for the experiment pipeline: pseudo-Gaussian ground
//! truths, localized features, noise injection at a target SNR, and the SNR
//! metric itself.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::ball::{BallCoeffs, BallPlan, BallSamples};
use crate::error::{Error, Result};
use crate::ops::Mask;
use crate::rng::{stream_rng, Stream};
use crate::uq::Region;

/// Draw a real pseudo-Gaussian random field: i.i.d. standard complex
/// Gaussian coefficients with conjugate symmetry, shaped by the smoothing
/// multiplier exp(−ℓ(ℓ+1)/2(L/3)²)·exp(−p²/2(P/3)²), synthesized and
/// normalized to unit peak amplitude.
pub fn simulate_ground_truth(plan: &Arc<BallPlan>, seed: u64) -> Result<BallSamples> {
    let prof = plan.profile();
    if prof.spin != 0 {
        return Err(Error::InvalidArg(
            "ground-truth simulation is defined for the spin-0 real path".into(),
        ));
    }
    let mut rng = stream_rng(seed, Stream::GroundTruth);
    let sig_ell = prof.l as f64 / 3.0;
    let sig_p = prof.p as f64 / 3.0;
    let mut c = BallCoeffs::zeros(plan);
    for p in 0..prof.p {
        let rad = (-((p * p) as f64) / (2.0 * sig_p * sig_p)).exp();
        for ell in 0..prof.l {
            let ang = (-(ell as f64) * (ell as f64 + 1.0) / (2.0 * sig_ell * sig_ell)).exp();
            let mult = ang * rad;
            // m = 0 real, m > 0 complex with the conjugate mirror at -m
            let z0: f64 = rng.sample(StandardNormal);
            c.set(p, ell, 0, Complex64::new(mult * z0, 0.0));
            for m in 1..=(ell as i64) {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                let v = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2 * mult;
                c.set(p, ell, m, v);
                let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                c.set(p, ell, -m, sgn * v.conj());
            }
        }
    }
    let mut field = plan.inverse(&c)?;
    let peak = field.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    if peak > 0.0 {
        crate::util::scale(&mut field.values, 1.0 / peak);
    }
    field.reality = true;
    Ok(field)
}

/// A localized bump to inject into a ground truth, specified in grid index
/// space (radial node, θ ring, φ column).
#[derive(Debug, Clone, Copy)]
pub struct FeatureSpec {
    pub center: (usize, usize, usize),
    /// Gaussian width in voxel units.
    pub radius_vox: f64,
    /// Peak amplitude relative to the (unit-normalized) background field.
    pub amplitude: f64,
}

/// Voxels within `radius` (in index units, φ wrapped) of a grid center.
pub fn ball_region(
    plan: &Arc<BallPlan>,
    center: (usize, usize, usize),
    radius: f64,
    label: impl Into<String>,
) -> Result<Region> {
    let (n_t, n_f) = (plan.sphere().n_theta(), plan.sphere().n_phi());
    let prof = plan.profile();
    let (cp, ct, cf) = center;
    if cp >= prof.p || ct >= n_t || cf >= n_f {
        return Err(Error::InvalidArg(format!(
            "region center {center:?} outside the grid ({}, {n_t}, {n_f})",
            prof.p
        )));
    }
    let mut indices = Vec::new();
    for p in 0..prof.p {
        for t in 0..n_t {
            for f in 0..n_f {
                let df = (f as f64 - cf as f64)
                    .abs()
                    .min(n_f as f64 - (f as f64 - cf as f64).abs());
                let d2 = (p as f64 - cp as f64).powi(2)
                    + (t as f64 - ct as f64).powi(2)
                    + df * df;
                if d2 <= radius * radius {
                    indices.push(plan.sample_index(p, t, f));
                }
            }
        }
    }
    Region::new(indices, label)
}

/// Add a bandlimited bump to `field` and return the voxel region it covers
/// (all voxels within 1.5 widths of the center). The bump is built in sample
/// space and projected through the transform pair so the result stays inside
/// the bandlimited range.
pub fn inject_feature(
    field: &mut BallSamples,
    spec: &FeatureSpec,
) -> Result<Region> {
    let plan = field.plan.clone();
    let (n_t, n_f) = (plan.sphere().n_theta(), plan.sphere().n_phi());
    let prof = plan.profile();
    let (cp, ct, cf) = spec.center;
    if cp >= prof.p || ct >= n_t || cf >= n_f {
        return Err(Error::InvalidArg(format!(
            "feature center {:?} outside the grid ({}, {n_t}, {n_f})",
            spec.center, prof.p
        )));
    }
    let mut bump = BallSamples::zeros(&plan);
    let s2 = 2.0 * spec.radius_vox * spec.radius_vox;
    for p in 0..prof.p {
        for t in 0..n_t {
            for f in 0..n_f {
                // φ wraps around
                let df = (f as f64 - cf as f64).abs().min(n_f as f64 - (f as f64 - cf as f64).abs());
                let d2 = (p as f64 - cp as f64).powi(2)
                    + (t as f64 - ct as f64).powi(2)
                    + df * df;
                if d2 <= 25.0 * spec.radius_vox * spec.radius_vox {
                    bump.values[plan.sample_index(p, t, f)] =
                        Complex64::new(spec.amplitude * (-d2 / s2).exp(), 0.0);
                }
            }
        }
    }
    // bandlimit the bump
    let bump_bl = plan.inverse(&plan.forward(&bump)?)?;
    for (v, b) in field.values.iter_mut().zip(&bump_bl.values) {
        *v += b;
    }
    field.reality = true;
    ball_region(&plan, spec.center, feature_region_radius(spec.radius_vox), "injected feature")
}

/// Radius (index units) of the voxel region attributed to a feature.
pub fn feature_region_radius(radius_vox: f64) -> f64 {
    1.5 * radius_vox
}

/// Pollute kept entries of `clean` with i.i.d. real Gaussian noise scaled to
/// the target SNR: σ = ‖clean‖₂ 10^{−snr/20} / sqrt(M_kept), plain Euclidean
/// norm over kept entries. `snr_db = None` means noiseless (σ reported as 1).
pub fn add_noise(
    clean: &[Complex64],
    mask: &Mask,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<(Vec<Complex64>, f64)> {
    if mask.len() != clean.len() {
        return Err(Error::shape("add_noise mask", clean.len(), mask.len()));
    }
    if mask.n_kept() == 0 {
        return Err(Error::InvalidArg("empty keep-set: no observations survive".into()));
    }
    let mut y = clean.to_vec();
    mask.apply(&mut y)?;
    let Some(snr) = snr_db else {
        return Ok((y, 1.0));
    };
    if !snr.is_finite() {
        return Ok((y, 1.0));
    }
    let norm_kept: f64 = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let sigma = norm_kept * 10f64.powf(-snr / 20.0) / (mask.n_kept() as f64).sqrt();
    let mut rng = stream_rng(seed, Stream::Noise);
    for (i, v) in y.iter_mut().enumerate() {
        if mask.kept(i) {
            let n: f64 = rng.sample(StandardNormal);
            *v += sigma * n;
        }
    }
    Ok((y, sigma))
}

/// SNR in dB between a reference and an estimate: 20 log10(‖a‖/‖a−b‖), plain
/// Euclidean norms restricted to kept entries when a mask is given. Returns
/// +∞ when the inputs coincide.
pub fn snr_db(reference: &[Complex64], estimate: &[Complex64], mask: Option<&Mask>) -> f64 {
    debug_assert_eq!(reference.len(), estimate.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, (a, b)) in reference.iter().zip(estimate).enumerate() {
        if let Some(m) = mask {
            if !m.kept(i) {
                continue;
            }
        }
        num += a.norm_sqr();
        den += (a - b).norm_sqr();
    }
    if den == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (num / den).log10()
}
