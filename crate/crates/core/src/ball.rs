//! Fourier-Laguerre transform on the ball (radius × sphere).
//!
//! Analysis applies the spherical harmonic transform shell by shell and then
//! the radial transform per (ℓ, m) channel; synthesis reverses the order.
//! Under the weighted sample inner product (voxel weights = ring weight ×
//! azimuthal step × radial weight) and the unweighted coefficient inner
//! product, analysis and synthesis are exact mutual adjoints, so `forward`
//! doubles as the adjoint of `inverse` and vice versa. The plain transpose of
//! synthesis — analysis with the quadrature weights dropped — is kept as
//! [`BallPlan::unweighted_analysis`]; it is what careless adjoint code
//! computes and it leaks aliasing that the true analysis map annihilates.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::{
    flm_index, sht_forward_weighted, sht_inverse, Flm, SphereGrid, WeightMode,
};
use crate::radial::RadialPlan;

/// Discrete problem geometry: angular bandlimit L, radial bandlimit P,
/// spin, and radial scale factor τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallBandProfile {
    pub l: usize,
    pub p: usize,
    pub spin: i32,
    pub tau: f64,
}

impl BallBandProfile {
    pub fn new(l: usize, p: usize, spin: i32, tau: f64) -> Result<Self> {
        if l == 0 || p == 0 {
            return Err(Error::InvalidArg("bandlimits L and P must be >= 1".into()));
        }
        if spin.unsigned_abs() as usize >= l {
            return Err(Error::InvalidArg(format!(
                "|spin| = {} must be below L = {l}",
                spin.unsigned_abs()
            )));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArg("tau must be positive and finite".into()));
        }
        Ok(BallBandProfile { l, p, spin, tau })
    }

    pub fn n_coeffs(&self) -> usize {
        self.p * self.l * self.l
    }

    /// Coefficient flat index i = p·L² + ℓ² + ℓ + m (radial-major keeps the
    /// per-shell block contiguous).
    #[inline]
    pub fn coeff_index(&self, p: usize, ell: usize, m: i64) -> usize {
        p * self.l * self.l + flm_index(ell, m)
    }
}

/// Immutable transform plan: sphere grid, radial plan, and voxel weights.
pub struct BallPlan {
    profile: BallBandProfile,
    sphere: SphereGrid,
    radial: RadialPlan,
    voxel_weights: Vec<f64>,
}

impl std::fmt::Debug for BallPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BallPlan").field("profile", &self.profile).finish()
    }
}

impl BallPlan {
    pub fn build(profile: BallBandProfile) -> Result<Arc<Self>> {
        let sphere = SphereGrid::build(profile.l)?;
        let radial = RadialPlan::build(profile.p, profile.tau)?;
        let n_ang = sphere.n_samples();
        let mut voxel_weights = vec![0.0; profile.p * n_ang];
        for (i, &wr) in radial.weights().iter().enumerate() {
            for k in 0..sphere.n_theta() {
                let w = wr * sphere.sample_weight(k);
                for j in 0..sphere.n_phi() {
                    voxel_weights[i * n_ang + k * sphere.n_phi() + j] = w;
                }
            }
        }
        Ok(Arc::new(BallPlan {
            profile,
            sphere,
            radial,
            voxel_weights,
        }))
    }

    pub fn profile(&self) -> BallBandProfile {
        self.profile
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }

    pub fn radial(&self) -> &RadialPlan {
        &self.radial
    }

    pub fn n_samples(&self) -> usize {
        self.profile.p * self.sphere.n_samples()
    }

    pub fn n_coeffs(&self) -> usize {
        self.profile.n_coeffs()
    }

    /// Discrete Haar measure: quadrature weight of each voxel.
    pub fn voxel_weights(&self) -> &[f64] {
        &self.voxel_weights
    }

    /// Sample flat index for (radial node, θ ring, φ column).
    #[inline]
    pub fn sample_index(&self, p: usize, theta_idx: usize, phi_idx: usize) -> usize {
        (p * self.sphere.n_theta() + theta_idx) * self.sphere.n_phi() + phi_idx
    }

    fn check_samples(&self, f: &BallSamples, context: &'static str) -> Result<()> {
        if f.plan.profile != self.profile {
            return Err(Error::ProfileMismatch(format!(
                "{context}: samples built for {:?}, plan is {:?}",
                f.plan.profile, self.profile
            )));
        }
        if f.values.len() != self.n_samples() {
            return Err(Error::shape(context, self.n_samples(), f.values.len()));
        }
        Ok(())
    }

    fn check_coeffs(&self, c: &BallCoeffs, context: &'static str) -> Result<()> {
        if c.plan.profile != self.profile {
            return Err(Error::ProfileMismatch(format!(
                "{context}: coeffs built for {:?}, plan is {:?}",
                c.plan.profile, self.profile
            )));
        }
        if c.values.len() != self.n_coeffs() {
            return Err(Error::shape(context, self.n_coeffs(), c.values.len()));
        }
        Ok(())
    }

    fn analysis_impl(self: &Arc<Self>, f: &BallSamples, mode: WeightMode) -> Result<BallCoeffs> {
        let prof = self.profile;
        let n_ang = self.sphere.n_samples();
        let lsq = prof.l * prof.l;
        let mut interim = vec![Complex64::ZERO; prof.p * lsq];
        for shell in 0..prof.p {
            let flm = sht_forward_weighted(
                &self.sphere,
                &f.values[shell * n_ang..(shell + 1) * n_ang],
                prof.spin,
                mode,
            )?;
            interim[shell * lsq..(shell + 1) * lsq].copy_from_slice(&flm.values);
        }
        let mut values = vec![Complex64::ZERO; prof.p * lsq];
        for h in 0..lsq {
            match mode {
                WeightMode::Quadrature => {
                    self.radial.forward_strided(&interim[h..], lsq, &mut values[h..])
                }
                WeightMode::Unit => {
                    self.radial.unweighted_forward_strided(&interim[h..], lsq, &mut values[h..])
                }
            }
        }
        Ok(BallCoeffs {
            plan: Arc::clone(self),
            values,
        })
    }

    /// Analysis B: per-shell spherical harmonic analysis followed by the
    /// radial transform per channel. Exact on bandlimited fields.
    pub fn forward(self: &Arc<Self>, f: &BallSamples) -> Result<BallCoeffs> {
        self.check_samples(f, "ball_forward")?;
        self.analysis_impl(f, WeightMode::Quadrature)
    }

    /// Synthesis B⁻¹: radial synthesis per channel, then per-shell spherical
    /// harmonic synthesis.
    pub fn inverse(self: &Arc<Self>, c: &BallCoeffs) -> Result<BallSamples> {
        self.check_coeffs(c, "ball_inverse")?;
        let prof = self.profile;
        let n_ang = self.sphere.n_samples();
        let lsq = prof.l * prof.l;
        let mut interim = vec![Complex64::ZERO; prof.p * lsq];
        for h in 0..lsq {
            self.radial.inverse_strided(&c.values[h..], lsq, &mut interim[h..]);
        }
        let mut values = vec![Complex64::ZERO; self.n_samples()];
        for shell in 0..prof.p {
            let flm = Flm {
                bandlimit: prof.l,
                spin: prof.spin,
                values: interim[shell * lsq..(shell + 1) * lsq].to_vec(),
            };
            let shell_samples = sht_inverse(&self.sphere, &flm)?;
            values[shell * n_ang..(shell + 1) * n_ang].copy_from_slice(&shell_samples);
        }
        Ok(BallSamples {
            plan: Arc::clone(self),
            values,
            reality: false,
        })
    }

    /// Adjoint of analysis under the weighted sample / unweighted coefficient
    /// inner products. For exact-quadrature grids this coincides with
    /// synthesis; the separate entry point keeps operator compositions
    /// explicit about which map they mean.
    pub fn forward_adjoint(self: &Arc<Self>, c: &BallCoeffs) -> Result<BallSamples> {
        self.check_coeffs(c, "ball_forward_adjoint")?;
        self.inverse(c)
    }

    /// Adjoint of synthesis under the same pairing: quadrature-weighted
    /// analysis, numerically identical to `forward`. Synthesis is therefore
    /// an isometry onto its range.
    pub fn inverse_adjoint(self: &Arc<Self>, f: &BallSamples) -> Result<BallCoeffs> {
        self.check_samples(f, "ball_inverse_adjoint")?;
        self.analysis_impl(f, WeightMode::Quadrature)
    }

    /// The plain (unweighted) transpose of synthesis: what a code computes if
    /// it treats the sample values as an orthonormal basis and ignores the
    /// quadrature measure. Not an inverse and not the adjoint under the ball
    /// inner product; exported for negative-control demonstrations.
    pub fn unweighted_analysis(self: &Arc<Self>, f: &BallSamples) -> Result<BallCoeffs> {
        self.check_samples(f, "unweighted_analysis")?;
        self.analysis_impl(f, WeightMode::Unit)
    }

    /// Weighted inner product on the sample space.
    pub fn dot_samples(&self, a: &BallSamples, b: &BallSamples) -> Complex64 {
        crate::util::dot_w(&self.voxel_weights, &a.values, &b.values)
    }

    pub fn norm_samples(&self, a: &BallSamples) -> f64 {
        crate::util::norm_w(&self.voxel_weights, &a.values)
    }
}

/// Fourier-Laguerre coefficients on a plan; flat index p·L² + ℓ² + ℓ + m.
#[derive(Clone)]
pub struct BallCoeffs {
    pub plan: Arc<BallPlan>,
    pub values: Vec<Complex64>,
}

impl std::fmt::Debug for BallCoeffs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BallCoeffs")
            .field("profile", &self.plan.profile)
            .field("len", &self.values.len())
            .finish()
    }
}

impl BallCoeffs {
    pub fn zeros(plan: &Arc<BallPlan>) -> Self {
        BallCoeffs {
            plan: Arc::clone(plan),
            values: vec![Complex64::ZERO; plan.n_coeffs()],
        }
    }

    pub fn get(&self, p: usize, ell: usize, m: i64) -> Complex64 {
        self.values[self.plan.profile.coeff_index(p, ell, m)]
    }

    pub fn set(&mut self, p: usize, ell: usize, m: i64, v: Complex64) {
        let i = self.plan.profile.coeff_index(p, ell, m);
        self.values[i] = v;
    }

    /// Enforceable reality condition for spin-0 fields:
    /// f_{ℓ,−m,p} = (−1)^m conj(f_{ℓ,m,p}).
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        let prof = self.plan.profile;
        let mut worst = 0.0f64;
        for p in 0..prof.p {
            for ell in 0..prof.l {
                for m in 1..=(ell as i64) {
                    let sgn = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let d = (self.get(p, ell, -m) - sgn * self.get(p, ell, m).conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        worst
    }
}

/// Sample values on the ball grid. Values are stored complex with a reality
/// tag for the spin-0 real path; the binary file format writes the compact
/// real payload when the tag is set.
#[derive(Clone)]
pub struct BallSamples {
    pub plan: Arc<BallPlan>,
    pub values: Vec<Complex64>,
    pub reality: bool,
}

impl std::fmt::Debug for BallSamples {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BallSamples")
            .field("profile", &self.plan.profile)
            .field("len", &self.values.len())
            .field("reality", &self.reality)
            .finish()
    }
}

impl BallSamples {
    pub fn zeros(plan: &Arc<BallPlan>) -> Self {
        BallSamples {
            plan: Arc::clone(plan),
            values: vec![Complex64::ZERO; plan.n_samples()],
            reality: false,
        }
    }

    pub fn from_real(plan: &Arc<BallPlan>, values: &[f64]) -> Result<Self> {
        if values.len() != plan.n_samples() {
            return Err(Error::shape("BallSamples::from_real", plan.n_samples(), values.len()));
        }
        Ok(BallSamples {
            plan: Arc::clone(plan),
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            reality: true,
        })
    }

    pub fn voxel_weights(&self) -> &[f64] {
        self.plan.voxel_weights()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
