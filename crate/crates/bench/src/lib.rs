//! Shared fixtures for the criterion benchmarks.

use std::sync::Arc;

use ballkit::{BallBandProfile, BallPlan, BallSamples};

pub fn plan(l: usize, p: usize) -> Arc<BallPlan> {
    BallPlan::build(BallBandProfile::new(l, p, 0, 1.0).expect("profile")).expect("plan")
}

pub fn field(plan: &Arc<BallPlan>, seed: u64) -> BallSamples {
    ballkit::sim::simulate_ground_truth(plan, seed).expect("field")
}
