//! Linear-operator algebra for the inverse problem.
//!
//! Operators expose paired `apply`/`adjoint` actions over flat complex
//! vectors, with the inner product of each space carried by its
//! [`SpaceDesc`] (sample spaces are weighted by the voxel quadrature
//! weights, coefficient spaces are unweighted). [`dot_test`] validates any
//! operator against its declared adjoint; [`power_method`] estimates
//! spectral norms for solver step sizes.
//!
//! The sensing operator is `Φ = M B⁻¹ K B`: ball analysis, multiplication by
//! a positive harmonic-space kernel, synthesis, and zero-filling masking.
//! Its adjoint `Φ† = B† K B^{−†} M†` is composed of the true adjoint of each
//! factor. The baseline `Φ⁻¹ = B⁻¹ K⁻¹ B M†` inverts the kernel directly and
//! carries no regularization.

use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::ball::{BallCoeffs, BallPlan, BallSamples};
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::util;
use crate::wavelets::{wavelet_analysis, wavelet_synthesis, Tiling, WaveletCoeffs};

/// Description of an operator's domain or codomain: dimension plus the
/// weights of its inner product (`None` = plain Euclidean).
#[derive(Clone)]
pub struct SpaceDesc {
    pub dim: usize,
    pub weights: Option<Arc<Vec<f64>>>,
    pub name: &'static str,
}

impl SpaceDesc {
    pub fn plain(dim: usize, name: &'static str) -> Self {
        SpaceDesc {
            dim,
            weights: None,
            name,
        }
    }

    pub fn weighted(weights: Arc<Vec<f64>>, name: &'static str) -> Self {
        SpaceDesc {
            dim: weights.len(),
            weights: Some(weights),
            name,
        }
    }

    pub fn dot(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        match &self.weights {
            Some(w) => util::dot_w(w, a, b),
            None => util::dot(a, b),
        }
    }

    pub fn norm(&self, a: &[Complex64]) -> f64 {
        match &self.weights {
            Some(w) => util::norm_w(w, a),
            None => util::norm(a),
        }
    }
}

/// A linear map with a paired adjoint.
pub trait LinOp {
    fn label(&self) -> String;
    fn in_space(&self) -> SpaceDesc;
    fn out_space(&self) -> SpaceDesc;
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// Randomized adjoint validation: checks ⟨A x, y⟩ = ⟨x, A† y⟩ on `trials`
/// random pairs and returns the largest relative discrepancy, failing if it
/// exceeds `tol`.
pub fn dot_test(op: &dyn LinOp, trials: usize, tol: f64, seed: u64) -> Result<f64> {
    let mut rng = stream_rng(seed, Stream::DotTest);
    let input = op.in_space();
    let output = op.out_space();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let x: Vec<Complex64> = (0..input.dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let y: Vec<Complex64> = (0..output.dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let lhs = output.dot(&op.apply(&x)?, &y);
        let rhs = input.dot(&x, &op.adjoint(&y)?);
        let scale = lhs.norm().max(rhs.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    if worst > tol {
        return Err(Error::Numerical(format!(
            "dot test failed for {}: relative discrepancy {worst:.3e} > {tol:.1e}",
            op.label()
        )));
    }
    Ok(worst)
}

/// Largest singular value of `op` by power iteration on op†op, using the
/// spaces' inner products. Stops when the estimate changes by less than
/// `tol` relative between iterations.
pub fn power_method(op: &dyn LinOp, tol: f64, max_iter: usize, seed: u64) -> Result<f64> {
    let input = op.in_space();
    let mut rng = stream_rng(seed, Stream::PowerMethod);
    let mut v: Vec<Complex64> = (0..input.dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let nv = input.norm(&v);
    if nv == 0.0 {
        return Err(Error::Numerical("power method started at the zero vector".into()));
    }
    util::scale(&mut v, 1.0 / nv);
    let mut sigma = 0.0f64;
    for _ in 0..max_iter {
        let av = op.apply(&v)?;
        let new_sigma = op.out_space().norm(&av);
        if new_sigma == 0.0 {
            // v is in the null space; the restriction there has norm 0.
            return Ok(0.0);
        }
        let mut w = op.adjoint(&av)?;
        let nw = input.norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        util::scale(&mut w, 1.0 / nw);
        let done = (new_sigma - sigma).abs() <= tol * new_sigma;
        sigma = new_sigma;
        v = w;
        if done {
            return Ok(sigma);
        }
    }
    Err(Error::NotConverged {
        what: "power method",
        iters: max_iter,
    })
}

/// Identity on a plain space; mostly a power-method/dot-test fixture.
pub struct IdentityOp {
    pub dim: usize,
}

impl LinOp for IdentityOp {
    fn label(&self) -> String {
        "identity".into()
    }
    fn in_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.dim, "plain")
    }
    fn out_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.dim, "plain")
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(x.to_vec())
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(y.to_vec())
    }
}

/// Real diagonal multiplier on a plain space.
pub struct DiagonalOp {
    pub multipliers: Vec<f64>,
}

impl LinOp for DiagonalOp {
    fn label(&self) -> String {
        "diagonal".into()
    }
    fn in_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.multipliers.len(), "plain")
    }
    fn out_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.multipliers.len(), "plain")
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.multipliers.len() {
            return Err(Error::shape("diagonal apply", self.multipliers.len(), x.len()));
        }
        Ok(x.iter().zip(&self.multipliers).map(|(v, m)| v * m).collect())
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply(y)
    }
}

/// Positive multipliers over the (ℓ, p) plane: the blurring kernel of the
/// sensing operator. Real multipliers make it self-adjoint.
#[derive(Debug, Clone)]
pub struct HarmonicKernel {
    /// K_{ℓp}, flat index ℓ·P + p.
    pub multipliers: Vec<f64>,
    pub sigma_ell: f64,
    pub sigma_p: f64,
    pub skew: f64,
    l: usize,
    p: usize,
}

/// Skewed Gaussian kernel
/// K_{ℓp} = exp(−ℓ(ℓ+1)/2σ_ℓ²) exp(−p²/2σ_p²) exp(−skew·ℓ·p/(σ_ℓ σ_p)),
/// clipped below at 1e−4 of its maximum so the direct inverse stays finite.
pub fn make_kernel(
    profile: crate::ball::BallBandProfile,
    sigma_ell: f64,
    sigma_p: f64,
    skew: f64,
) -> Result<HarmonicKernel> {
    if !(sigma_ell > 0.0) || !(sigma_p > 0.0) {
        return Err(Error::InvalidArg("kernel widths must be positive".into()));
    }
    let (l, p) = (profile.l, profile.p);
    let mut multipliers = vec![0.0; l * p];
    for ell in 0..l {
        for q in 0..p {
            let ang = (-(ell as f64) * (ell as f64 + 1.0) / (2.0 * sigma_ell * sigma_ell)).exp();
            let rad = (-(q as f64) * (q as f64) / (2.0 * sigma_p * sigma_p)).exp();
            let cross = (-skew * ell as f64 * q as f64 / (sigma_ell * sigma_p)).exp();
            multipliers[ell * p + q] = ang * rad * cross;
        }
    }
    let max = multipliers.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-4 * max;
    for m in multipliers.iter_mut() {
        *m = m.max(floor);
    }
    Ok(HarmonicKernel {
        multipliers,
        sigma_ell,
        sigma_p,
        skew,
        l,
        p,
    })
}

impl HarmonicKernel {
    pub fn get(&self, ell: usize, p: usize) -> f64 {
        self.multipliers[ell * self.p + p]
    }

    pub fn condition_number(&self) -> f64 {
        let max = self.multipliers.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.multipliers.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    /// Multiply coefficients in place by K_{ℓp} (or its inverse).
    pub fn apply_coeffs(&self, c: &mut BallCoeffs, invert: bool) -> Result<()> {
        let prof = c.plan.profile();
        if prof.l != self.l || prof.p != self.p {
            return Err(Error::ProfileMismatch(format!(
                "kernel built for (L={}, P={}), coeffs are (L={}, P={})",
                self.l, self.p, prof.l, prof.p
            )));
        }
        for q in 0..prof.p {
            for ell in 0..prof.l {
                let mut k = self.get(ell, q);
                if invert {
                    if k <= 0.0 {
                        return Err(Error::Numerical(
                            "kernel has a non-positive multiplier; direct inverse undefined".into(),
                        ));
                    }
                    k = 1.0 / k;
                }
                for m in -(ell as i64)..=(ell as i64) {
                    c.values[prof.coeff_index(q, ell, m)] *= k;
                }
            }
        }
        Ok(())
    }
}

/// Zero-filling observation mask over ball sample indices. The keep pattern
/// has exactly round(fraction · n) entries, drawn by seeded shuffle, so
/// mean(keep) is within 1/n of the requested fraction. Idempotent and
/// self-adjoint by construction.
#[derive(Debug, Clone)]
pub struct Mask {
    keep: Vec<bool>,
    pub fraction: f64,
    pub seed: u64,
}

impl Mask {
    pub fn generate(n: usize, fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0 < fraction && fraction <= 1.0) {
            return Err(Error::InvalidArg(format!(
                "mask fraction must lie in (0, 1], got {fraction}"
            )));
        }
        let n_keep = ((fraction * n as f64).round() as usize).clamp(1, n);
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = stream_rng(seed, Stream::Mask);
        idx.shuffle(&mut rng);
        let mut keep = vec![false; n];
        for &i in idx.iter().take(n_keep) {
            keep[i] = true;
        }
        Ok(Mask {
            keep,
            fraction,
            seed,
        })
    }

    pub fn full(n: usize) -> Self {
        Mask {
            keep: vec![true; n],
            fraction: 1.0,
            seed: 0,
        }
    }

    pub fn from_keep(keep: Vec<bool>, fraction: f64, seed: u64) -> Self {
        Mask {
            keep,
            fraction,
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn keep(&self) -> &[bool] {
        &self.keep
    }

    pub fn n_kept(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn kept(&self, i: usize) -> bool {
        self.keep[i]
    }

    /// Zero out masked entries in place.
    pub fn apply(&self, values: &mut [Complex64]) -> Result<()> {
        if values.len() != self.keep.len() {
            return Err(Error::shape("mask apply", self.keep.len(), values.len()));
        }
        for (v, &k) in values.iter_mut().zip(&self.keep) {
            if !k {
                *v = Complex64::ZERO;
            }
        }
        Ok(())
    }
}

/// Masking as a self-adjoint, idempotent operator on weighted samples.
pub struct MaskOp {
    pub plan: Arc<BallPlan>,
    pub mask: Arc<Mask>,
}

impl LinOp for MaskOp {
    fn label(&self) -> String {
        "mask M".into()
    }
    fn in_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn out_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut v = x.to_vec();
        self.mask.apply(&mut v)?;
        Ok(v)
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply(y)
    }
}

/// Harmonic kernel multiplication as a self-adjoint operator on coefficients.
pub struct KernelOp {
    pub plan: Arc<BallPlan>,
    pub kernel: Arc<HarmonicKernel>,
}

impl LinOp for KernelOp {
    fn label(&self) -> String {
        "harmonic kernel K".into()
    }
    fn in_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.plan.n_coeffs(), "coeffs")
    }
    fn out_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.plan.n_coeffs(), "coeffs")
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut c = BallCoeffs {
            plan: Arc::clone(&self.plan),
            values: x.to_vec(),
        };
        self.kernel.apply_coeffs(&mut c, false)?;
        Ok(c.values)
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply(y)
    }
}

/// Ball analysis B as an operator from weighted samples to coefficients.
pub struct AnalysisOp {
    pub plan: Arc<BallPlan>,
}

impl AnalysisOp {
    fn samples(&self, x: &[Complex64]) -> BallSamples {
        BallSamples {
            plan: Arc::clone(&self.plan),
            values: x.to_vec(),
            reality: false,
        }
    }
}

impl LinOp for AnalysisOp {
    fn label(&self) -> String {
        "ball analysis B".into()
    }
    fn in_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn out_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.plan.n_coeffs(), "coeffs")
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.plan.forward(&self.samples(x))?.values)
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = BallCoeffs {
            plan: Arc::clone(&self.plan),
            values: y.to_vec(),
        };
        Ok(self.plan.forward_adjoint(&c)?.values)
    }
}

/// Ball synthesis B⁻¹ as an operator from coefficients to weighted samples.
pub struct SynthesisOp {
    pub plan: Arc<BallPlan>,
}

impl LinOp for SynthesisOp {
    fn label(&self) -> String {
        "ball synthesis B^-1".into()
    }
    fn in_space(&self) -> SpaceDesc {
        SpaceDesc::plain(self.plan.n_coeffs(), "coeffs")
    }
    fn out_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = BallCoeffs {
            plan: Arc::clone(&self.plan),
            values: x.to_vec(),
        };
        Ok(self.plan.inverse(&c)?.values)
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = BallSamples {
            plan: Arc::clone(&self.plan),
            values: y.to_vec(),
            reality: false,
        };
        Ok(self.plan.inverse_adjoint(&f)?.values)
    }
}

pub(crate) fn sample_space(plan: &Arc<BallPlan>) -> SpaceDesc {
    SpaceDesc::weighted(Arc::new(plan.voxel_weights().to_vec()), "samples")
}

/// The sensing operator Φ = M B⁻¹ K B with adjoint Φ† = B† K B^{−†} M†.
/// A `None` kernel degenerates to the pointwise masked identity Φ = M (no
/// transforms at all), which some oracles rely on.
pub struct SensingOp {
    pub plan: Arc<BallPlan>,
    pub kernel: Option<Arc<HarmonicKernel>>,
    pub mask: Arc<Mask>,
}

impl SensingOp {
    pub fn new(plan: &Arc<BallPlan>, kernel: HarmonicKernel, mask: Mask) -> Result<Self> {
        if mask.len() != plan.n_samples() {
            return Err(Error::shape("sensing mask", plan.n_samples(), mask.len()));
        }
        Ok(SensingOp {
            plan: Arc::clone(plan),
            kernel: Some(Arc::new(kernel)),
            mask: Arc::new(mask),
        })
    }

    /// Φ = M: masking only.
    pub fn masked_identity(plan: &Arc<BallPlan>, mask: Mask) -> Result<Self> {
        if mask.len() != plan.n_samples() {
            return Err(Error::shape("sensing mask", plan.n_samples(), mask.len()));
        }
        Ok(SensingOp {
            plan: Arc::clone(plan),
            kernel: None,
            mask: Arc::new(mask),
        })
    }

    /// Φ acting on typed samples.
    pub fn forward(&self, x: &BallSamples) -> Result<BallSamples> {
        let mut out = match &self.kernel {
            Some(kernel) => {
                let mut c = self.plan.forward(x)?;
                kernel.apply_coeffs(&mut c, false)?;
                self.plan.inverse(&c)?
            }
            None => x.clone(),
        };
        self.mask.apply(&mut out.values)?;
        out.reality = x.reality;
        Ok(out)
    }

    /// Φ† acting on typed samples, composed of true adjoints applied in
    /// reverse: M†, then the adjoint of synthesis, then K, then the adjoint
    /// of analysis.
    pub fn adjoint_samples(&self, y: &BallSamples) -> Result<BallSamples> {
        let mut masked = y.clone();
        self.mask.apply(&mut masked.values)?;
        let mut out = match &self.kernel {
            Some(kernel) => {
                let mut c = self.plan.inverse_adjoint(&masked)?;
                kernel.apply_coeffs(&mut c, false)?;
                self.plan.forward_adjoint(&c)?
            }
            None => masked,
        };
        out.reality = y.reality;
        Ok(out)
    }
}

impl LinOp for SensingOp {
    fn label(&self) -> String {
        "sensing operator Phi".into()
    }
    fn in_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn out_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = BallSamples {
            plan: Arc::clone(&self.plan),
            values: x.to_vec(),
            reality: false,
        };
        Ok(self.forward(&f)?.values)
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = BallSamples {
            plan: Arc::clone(&self.plan),
            values: y.to_vec(),
            reality: false,
        };
        Ok(self.adjoint_samples(&f)?.values)
    }
}

/// Naive direct inversion x_dir = B⁻¹ K⁻¹ B M† y: exact on clean, unmasked,
/// bandlimited data and unstable everywhere else.
pub fn naive_inverse(y: &BallSamples, sensing: &SensingOp) -> Result<BallSamples> {
    let mut masked = y.clone();
    sensing.mask.apply(&mut masked.values)?;
    let Some(kernel) = &sensing.kernel else {
        masked.reality = y.reality;
        return Ok(masked);
    };
    let mut c = sensing.plan.forward(&masked)?;
    kernel.apply_coeffs(&mut c, true)?;
    let mut out = sensing.plan.inverse(&c)?;
    out.reality = y.reality;
    Ok(out)
}

/// Wavelet analysis of a sample-space field: Ψ† = (wavelet analysis) ∘ B.
/// Adjoint: B† ∘ (wavelet synthesis).
pub struct WaveletAnalysisOp {
    pub plan: Arc<BallPlan>,
    pub tiling: Arc<Tiling>,
}

impl WaveletAnalysisOp {
    pub fn analyze(&self, x: &BallSamples) -> Result<WaveletCoeffs> {
        wavelet_analysis(&self.plan.forward(x)?, &self.tiling)
    }

    pub fn synthesize(&self, w: &WaveletCoeffs) -> Result<BallSamples> {
        self.plan.forward_adjoint(&wavelet_synthesis(w, &self.plan)?)
    }
}

impl LinOp for WaveletAnalysisOp {
    fn label(&self) -> String {
        "wavelet analysis Psi^dagger".into()
    }
    fn in_space(&self) -> SpaceDesc {
        sample_space(&self.plan)
    }
    fn out_space(&self) -> SpaceDesc {
        SpaceDesc::plain(
            self.tiling.n_scaling_coeffs() + self.tiling.n_band_coeffs(),
            "wavelet coeffs",
        )
    }
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let f = BallSamples {
            plan: Arc::clone(&self.plan),
            values: x.to_vec(),
            reality: false,
        };
        Ok(self.analyze(&f)?.to_flat())
    }
    fn adjoint(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let w = WaveletCoeffs::from_flat(&self.tiling, y)?;
        Ok(self.synthesize(&w)?.values)
    }
}
