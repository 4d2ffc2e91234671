//! Fixtures shared by the benchmarks.

use bibc_core::numerics::RMat;
use bibc_core::{synth_channels, ChannelSet, SceneConfig};

pub fn reference_channels() -> ChannelSet {
    synth_channels(&SceneConfig::reference()).expect("reference scene is valid")
}

/// Deterministic dense symmetric matrix with a spread spectrum.
pub fn symmetric(n: usize) -> RMat {
    let m = RMat::from_fn(n, n, |i, j| ((i * 31 + j * 17) as f64 * 0.37).sin());
    (&m + m.transpose()) * 0.5
}
