//! Valley-point splitting of univariate multimodal data.
//!
//! The building blocks are a weighted ecdf ([`data`]), its convex-hull
//! vertices ([`hull`]), a Kolmogorov-Smirnov uniformity test ([`stats`]) and
//! the constructive unimodality test ([`uutest`]). On top of those sit the
//! recursive splitter ([`split`]), mixtures of unimodal models ([`udmm`]),
//! synthetic generators ([`synth`]), a naive Bayes classifier ([`nb`]) and
//! grayscale image segmentation ([`imgseg`]).

// `!(a < b)` also rejects NaN bounds
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod cli;
pub mod data;
pub mod error;
pub mod hull;
pub mod imgseg;
pub mod nb;
pub mod split;
pub mod stats;
pub mod synth;
pub mod udmm;
pub mod uutest;

pub use data::{Dataset, Ecdf, PiecewiseLinearCdf};
pub use error::{Error, Result};
pub use hull::{gcm_points, gl_set, lcm_points, GlSet};
pub use split::{
    find_vp, merge_pass, multimodality_degree, unisplit, unisplit_samples, SplitResult,
};
pub use stats::{ks_two_sample, ks_uniformity, nmi, KsResult};
pub use udmm::{fit_udmm, Udmm};
pub use uutest::{uu_test, Umm, UuOutcome};
