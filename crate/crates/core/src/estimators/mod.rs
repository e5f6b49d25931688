//! Sampled seminorms, energies and the analytic inequality checks.

pub mod inequalities;
pub mod plan;
pub mod seminorm;
pub mod sobolev;

pub use inequalities::{gluing_bound_check, rescaling_bound_check, GluingReport, RescalingReport};
pub use plan::{PlanKind, SamplingPlan};
pub use seminorm::{
    holder_distance, holder_seminorm, little_holder_profile, modulus_profile, seminorm_of, Exponent, ModulusReport,
    SeminormReport,
};
pub use sobolev::{
    distortion_field, gv_inequality_check, inverse_energy_check, jacobian_bound_check, sobolev_distance,
    sobolev_distance_split,
    sobolev_energy, DistortionReport, EnergyReport,
};
