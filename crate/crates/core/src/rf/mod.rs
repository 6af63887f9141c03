//! Converter model and statistical RF beamforming.

pub mod combiner;
pub mod quantizer;

pub use combiner::{alternating_projection, alternating_projection_trace, design_combiners, top_eigenvectors, CombinerSet};
pub use quantizer::{
    aqnm_noise_cov, distortion_factor, lloyd_max_codebook, quantize_signal, Codebook, QuantizerModel,
};
