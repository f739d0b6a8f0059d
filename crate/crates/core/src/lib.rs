//! Joint multifractal analysis of finitely many measures on b-adic grids.
//!
//! The toolkit builds vector-valued measures (synthetic cascades or empirical
//! samples) on a shared grid, evaluates the joint partition kernel
//! `mu_1(Q)^q_1 ... mu_k(Q)^q_k nu(Q)^t` across levels, extracts the mixed
//! dimension functions by monotone root finding, estimates joint singularity
//! spectra three ways (canonical weights, histogram, Legendre transform), and
//! verifies the expected structural properties against an exact closed-form
//! cascade solver.
//!
//! Modules:
//! - [`grid`]: b-adic boxes and their addressing.
//! - [`measure`]: measure trees, cascades, sample ingestion, gauge diagnostics.
//! - [`partition`]: joint partition sums, critical exponents, dimension fits.
//! - [`oracle`]: exact transfer-equation solver on cascades.
//! - [`spectrum`]: Legendre, canonical, histogram and local-dimension
//!   estimators.
//! - [`verify`]: the property-check suite with machine-readable reports.
//! - [`config`] / [`output`]: run configuration, CSV/JSON/SVG emission.

pub mod config;
pub mod error;
pub mod grid;
pub mod measure;
pub mod numeric;
pub mod oracle;
pub mod output;
pub mod partition;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use grid::BAdicBox;
pub use measure::{
    ahlfors_index, build_cascade, doubling_ratio, ingest_samples, AhlforsTrace, CascadeSpec,
    MeasureTree, VectorMeasure,
};
pub use partition::{
    estimate_dimensions, log_partition_sum, qgrid_surface, solve_t_star, DimensionEstimate, QGrid,
    QVector,
};
