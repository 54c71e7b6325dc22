//! Exhaustive analysis of small systems through their generator matrices.

pub mod aldous_brown;
pub mod ensembles;
pub mod families;
pub mod intertwining;
pub mod matrix;
pub mod spectral;
pub mod stationary;
pub mod uniformize;

pub use aldous_brown::{aldous_brown_check, first_site_bound_holds, AbPoint, AbReport};
pub use ensembles::{
    canonical_marginal, correlation_ratio_canonical, correlation_ratio_gc, equivalence_error, grand_canonical,
    CorrelationRatios,
};
pub use families::{build_generator, build_generator_capped, Domain, Family};
pub use intertwining::{eta_minus_vs_obep, eta_plus_vs_obep, fep_vs_sep, fep_vs_zrp, IntertwiningReport};
pub use matrix::{tv_distance, DistVec, RateMatrix, State};
pub use spectral::{eigencheck_a1, eigencheck_a1_lifted, spectral_gap, spectrum, A1Variant, EigenCheck};
pub use stationary::{closed_classes, formula_stationary, kernel_stationary};
pub use uniformize::{evolve, mixing_time_exact, tv_curve, MixingTime, TvPoint};
