//! Least-squares break estimation: criterion profiles, dynamic-programming
//! segmentation and the sup-Wald test.

pub mod critical_values;
pub mod dp;
pub mod profile;
pub mod supwald;

pub use critical_values::critical_value;
pub use dp::{fit_multiple, segmentation_table, SegmentationTable};
pub use profile::{
    argmax_earliest, criterion_decomposition, profile_conditional, profile_single, CriterionDecomposition,
    CriterionProfile,
};
pub use supwald::{sup_wald, wald_profile, wald_statistic, SupWaldTest};
