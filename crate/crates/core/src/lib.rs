//! Geometry of the copositive cone of small symmetric matrices.

#![allow(clippy::needless_range_loop)]

pub mod anglesearch;
pub mod constructions;
pub mod coposcheck;
pub mod eigen;
pub mod error;
pub mod sampling;
pub mod sym;

pub use anglesearch::{
    alternating_search, fd_derivatives, multistart_max_angle, psi_search, support_point, SearchConfig,
    SearchReport, StartRecord,
};
pub use constructions::{
    case10_pair, case11_critical_pair, case11_objective, case20_critical_a, case21_analysis, case30_bound,
    epsilon_family, family_distance, order2_pair, theorem_family_pair, AnglePair, Case11Critical,
    Case21Analysis,
};
pub use coposcheck::{
    classify_signs, dist_to_copositive, is_copositive, is_copositive_by_case, scaled_params, simplex_oracle,
    CaseSignature, Certificate, ConeDecomposition, CopositivityVerdict, ScaledParams, SimplexMin,
};
pub use eigen::{eigendecompose, psd_project, Spectrum};
pub use error::{CopoError, Result};
pub use sampling::{random_unit_symmetric, sample_unit_symmetric, Seed};
pub use sym::{angle_between, inner_product, SymMatrix};
