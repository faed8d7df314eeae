//! Deterministic random streams.
//!
//! Every consumer of randomness draws from ChaCha8 keyed by the user seed,
//! with a fixed stream id per purpose. The triple (seed, stream id, word
//! position) pins every draw, so identical configurations reproduce
//! bit-identical pipelines and any language with a ChaCha8 implementation
//! can replay the streams.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed stream ids, one per purpose. The numeric values are part of the
/// reproducibility contract and must not be reordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    GroundTruth = 0,
    Mask = 1,
    Noise = 2,
    PowerMethod = 3,
    DotTest = 4,
    Test = 7,
}

/// A ChaCha8 generator positioned at the start of `stream` for `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = stream_rng(1, Stream::GroundTruth);
        let mut b = stream_rng(1, Stream::GroundTruth);
        let mut c = stream_rng(1, Stream::Noise);
        let xa: f64 = a.random();
        let xb: f64 = b.random();
        let xc: f64 = c.random();
        assert_eq!(xa.to_bits(), xb.to_bits());
        assert_ne!(xa.to_bits(), xc.to_bits());
    }
}
