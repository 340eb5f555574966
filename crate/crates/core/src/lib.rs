//! Simulation, exact analytics and Voronoi diagnostics for Cox point
//! processes driven by isotropic Poisson line processes.

pub mod analytics;
pub mod estimators;
pub mod geometry;
pub mod io;
pub mod quadrature;
pub mod sampler;
pub mod tessellation;

pub use analytics::{AnalyticsError, Evaluation, PlanarFunction, RadialFunction};
pub use estimators::{Ecdf, EstimatorError, MonteCarloEstimate};
pub use geometry::{DiskWindow, GeometryError, LineParams, Point2};
pub use quadrature::{Integral, QuadratureError, QuadratureSpec};
pub use sampler::{CoxPoint, ModelParams, Orientation, Realization, SampleError, SeedSpec};
pub use tessellation::{CellExtent, FacetCounts, Tessellation, TessellationError};
