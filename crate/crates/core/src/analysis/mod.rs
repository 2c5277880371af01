//! NPV decomposition, segmentation, income-variability sweeps and structural
//! checks on exponential families.

mod segmentation;
mod structure;
mod variability;

pub use segmentation::{ge_segments, npv_by_type, segments, NpvReport, Segment, Segments, TypeNpv};
pub use structure::{
    family_threshold, quasiconvexity_check, single_crossing_check, CallbackFamily, CrossingReport, ExponentialFamily,
    GammaShapeFamily, SymmetricBetaFamily,
};
pub use variability::{
    bernoulli_limit, degenerate_limit, expected_npv_ge, two_point_example, u_shape_verdict, variance_sweep_beta,
    TwoPointReport, TwoPointRow, VarianceRow, VarianceSweep, Winner,
};
