//! Shared helpers for unit tests.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use crate::ball::{BallCoeffs, BallPlan, BallSamples};
use crate::rng::{stream_rng, Stream};

pub(crate) fn random_coeffs(plan: &Arc<BallPlan>, seed: u64) -> BallCoeffs {
    let mut rng = stream_rng(seed, Stream::Test);
    let prof = plan.profile();
    let mut c = BallCoeffs::zeros(plan);
    for p in 0..prof.p {
        for ell in prof.spin.unsigned_abs() as usize..prof.l {
            for m in -(ell as i64)..=(ell as i64) {
                c.set(
                    p,
                    ell,
                    m,
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                );
            }
        }
    }
    c
}

pub(crate) fn random_samples(plan: &Arc<BallPlan>, seed: u64) -> BallSamples {
    let mut rng = stream_rng(seed, Stream::Test);
    BallSamples {
        plan: Arc::clone(plan),
        values: (0..plan.n_samples())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect(),
        reality: false,
    }
}
