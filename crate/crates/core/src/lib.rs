//! Fixed-point and proximal-point machinery for vicinal and firmly vicinal
//! mappings on admissible CAT(1) spaces, modelled by spherical caps.

mod descent;
pub mod error;
pub mod functions;
pub mod iteration;
mod linalg;
pub mod mappings;
pub mod properties;
pub mod resolvent;
pub mod sphere;

pub use error::{Error, Result};
pub use functions::{penalty, penalty_derivative, ConvexFunctional, ExtendedReal, WeightedTerm};
pub use iteration::{
    asymptotic_center, asymptotic_regularity_profile, picard_trace, ppa_run,
    spherical_boundedness_margin, tail_transform_stat, AsymptoticCenterEstimate, IterationTrace,
    PpaOptions, PpaRun, StopReason,
};
pub use mappings::{DisplacementCosine, MappingHandle, MappingKind, SelfMap};
pub use properties::{
    check, check_properties, g_estimate, g_maximize, g_shape_check, CheckOptions, GEstimator, GShapeReport, Property,
    PropertyReport, ResidualSample,
};
pub use resolvent::{metric_projection, resolve, resolvent_objective, ResolventResult};
pub use sphere::{
    comparison_residual, dist, geodesic_point, sample_point, AdmissibleCap, Ball, CapSampler,
    KappaModel, SpherePoint,
};
