//! Ultrametric skeletons of finite metric measure spaces.
//!
//! The crate works on finite metric spaces given by a distance matrix and
//! provides:
//!
//! * dendrograms, the subdominant ultrametric and the exact minimum
//!   ultrametric distortion ([`tree`], [`subdominant`]);
//! * the fragmentation step and the iterated merge that embed a union of two
//!   approximately ultrametric subsets into an ultrametric ([`union`]);
//! * the covering submeasure, the top-down submeasure-to-measure recursion
//!   on a dendrogram and the skeleton pipeline with its growth certificate
//!   ([`submeasure`], [`skeleton`]);
//! * the inf-sup and sup-inf ball-profile functionals, equalizing measures
//!   and star-metric witnesses ([`chaining`]);
//! * a Monte Carlo experiment relating the argmax of a Gaussian process to
//!   its skeleton ([`gaussian`]).
//!
//! Every operation is a pure function of its inputs.

pub mod chaining;
pub mod error;
pub mod gaussian;
pub mod generators;
pub mod json;
pub mod measure;
pub mod metric;
pub mod skeleton;
pub mod subdominant;
pub mod submeasure;
pub mod tree;
pub mod union;

pub use error::{Error, Result};
pub use measure::{MeasureVec, WeightedSpace};
pub use metric::{validate_metric, FiniteMetricSpace, ValidationReport, DEFAULT_TOLERANCE};
pub use subdominant::{
    min_ultrametric_distortion, min_ultrametric_distortion_on, subdominant_ultrametric, subdominant_ultrametric_on,
};
pub use tree::{certify, ultrametric_from_tree, DistortionCertificate, Node, UltrametricTree};

/// Reads the exact-search cap override from `UMSKEL_EXACT_CAP`.
pub fn exact_cap_override() -> Option<usize> {
    std::env::var("UMSKEL_EXACT_CAP").ok()?.trim().parse().ok()
}
