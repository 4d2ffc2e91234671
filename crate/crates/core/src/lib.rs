//! Transmit beamforming for bistatic backscatter links with direct-link
//! interference control.
//!
//! The pipeline is: build a [`scene::SceneConfig`], synthesize channels with
//! [`scene::synth_channels`], design a beamformer in [`beamforming`], then
//! score it with [`metrics`] and [`detection`]. [`experiments`] wraps the
//! sweeps behind CSV writers.

pub mod alpha;
pub mod beamforming;
pub mod detection;
mod error;
pub mod experiments;
pub mod metrics;
pub mod numerics;
pub mod scene;
pub mod sdp;

pub use alpha::AlphaDb;
pub use beamforming::{design, BeamformerOutput, Design, Method};
pub use error::{Error, Result};
pub use numerics::{CMat, CVec, Complex64, RMat, RVec};
pub use scene::{synth_channels, ArrayGeometry, ChannelSet, Point3, SceneConfig};
