//! Closed-form results: expected power for two and three players, and the
//! expected Coleman index of a uniformly random game.

mod charfn;
mod classes;
mod coleman;

pub use charfn::{
    phi_z, phi_z_series, series_validated_range, ColemanCharacteristic, MAX_CHARFN_PLAYERS,
};
pub use classes::{
    class_table_n2, class_table_n3, expected_beta_n2, expected_beta_n3, expected_beta_n3_exact,
    extrema_n3, ClassTable, GameClass, StationaryPoint,
};
pub use coleman::{
    coleman_error_ratio, expected_coleman, expected_coleman_normal, inverse_coleman_normal,
    inverse_expected_coleman, ColemanCurveSpec, ColemanMethod, ErrorRatio,
};
