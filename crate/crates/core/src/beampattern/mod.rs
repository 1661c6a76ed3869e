//! Beam patterns of reconfigurable surfaces: discrete phased arrays (DPA),
//! continuous metasurfaces (CMS), reflection-map designs (NBS, SBF) and
//! phase quantization.

pub mod cms;
pub mod dpa;
pub mod gain;
pub mod geometry;
pub mod grid;
pub mod kernels;
pub mod map;
pub mod pattern;

pub use cms::{cms_nbs_pattern, cms_sbf_coefficients, cms_sbf_pattern, cms_sbf_pattern_surrogate, nbs_cms_deviation};
pub use dpa::{
    beam_pattern_dpa, nbs_coefficients, nbs_pattern, nbs_pattern_closed_form, sbf_coefficients, sbf_pattern,
    sbf_separable, AngularWeighting, SeparableMap,
};
pub use gain::{array_gain, effective_reflection_area};
pub use geometry::{physical_to_spatial, AngularPair, PhysicalAngle, SurfaceGeometry, SurfaceKind};
pub use grid::{normalized_axis, PatternGrid};
pub use map::{quantize_phases, QuantizerConfig, ReflectionMap};
pub use pattern::{normalized_nbs, BeamPattern, MapBeam, NbsBeam, SbfBeam, Scaled, SeparableBeam};
