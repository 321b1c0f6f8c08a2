//! Chart-based differential geometry for conformal ambient metrics and
//! spacelike immersions.
//!
//! Scalar and tensor fields are expressions in chart coordinates; every
//! derivative is taken exactly through truncated Taylor [`Jet`]s.

pub mod ambient;
pub mod chart;
pub mod conformal;
pub mod error;
pub mod expr;
pub mod immersion;
pub mod jet;
pub mod linalg;
pub mod riemann;
pub mod sampling;

pub use ambient::{build_ambient, AlphaFamily, AmbientSpace, ConnectionCase, MinkowskiMap};
pub use chart::{
    eval_jet, finite_difference_jet, parse_expression, Chart, Interval, Point, ScalarField,
    TensorField,
};
pub use conformal::{
    cocycle_check, cotton_york, moebius_from_alpha, moebius_transform, rescale_metric, schouten,
    ConformalRep, MoebiusStructure,
};
pub use error::{GeomError, Result};
pub use expr::{Expr, Func, Scope};
pub use immersion::{
    immerse, CodazziSample, ImmersionPoint, LightlikeNormalFrame, LinearExtension, MeanCurvature,
    SpacelikeImmersion,
};
pub use jet::Jet;
pub use riemann::{
    christoffel, covariant_derivative_tensor, gauss_curvature, grad_norm_sq, gradient, hessian,
    laplacian, lie_derivative_metric, ricci, riemann, scalar_curvature, sectional_curvature,
    CurvatureSlice, LeviCivita, MetricField, Signature,
};
pub use sampling::Sampler;
