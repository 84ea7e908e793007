//! Monte Carlo estimation over random games and analysis of the resulting
//! quota curves.

mod catalog;
mod extrema;
mod montecarlo;
mod spline;

pub use catalog::{
    discover_classes, is_monotone_family, DiscoveredClass, GameClassCatalog, CLASS_COUNT_CEILINGS,
};
pub use extrema::{count_extrema, CurveRef, Extrema};
pub use montecarlo::{
    default_quota_grid, mc_coleman_curve, mc_hoeffding_curve, mc_power_curve, quota_grid,
    CurveMetadata, PowerStatistic, QuotaCurve, QuotaPoint, RunningMoments, CHUNK_SIZE,
    DEFAULT_SAMPLES,
};
pub use spline::{fit_spline, BreakpointMode, SplineFit, SplinePiece};
