//! Global and restricted geometric constants and the conversions between
//! them.

mod conversions;
mod hoffman;
mod measured;
mod region;
mod report;

pub use conversions::{
    eb_from_pl, eb_polyhedral_nonsmooth, firm_convexity_lb_lasso, pl_from_eb, pl_from_hoffman_indicator,
    pl_from_qg,
};
pub use hoffman::{
    hoffman_enumerated, hoffman_equality, hoffman_over_points, hoffman_sampled, hoffman_sampled_with,
    restricted_hoffman_support, HoffmanEstimate, HoffmanMethod, DEFAULT_SIZE_CAP, RESIDUAL_FLOOR,
};
pub use measured::{measured_eb, measured_pl, OptimalSet};
pub use region::{Region, Restriction, SamplerSpec};
pub use report::{constants_report, ConstantsReport, NuProvenance, ReportOptions};
