//! Distance-preserving grid layouts.
//!
//! A dataset is first projected onto the plane, then the projection is
//! assigned to an `r x s` grid by recursive bisection ([`dgrid`]). Around
//! that core sit quality metrics, reference baselines, block compression for
//! level-of-detail navigation, and tools for steering the layout by mixing
//! per-feature projections.
//!
//! ```
//! use dgrid::{datasets, layout, metrics, normalize_columns, pairwise_euclidean, Projector};
//!
//! let data = normalize_columns(&datasets::iris()).unwrap();
//! let (_proj, grid) = layout(&data, 1.0, &Projector::ClassicalScaling).unwrap();
//! assert_eq!((grid.spec().rows, grid.spec().cols), (12, 13));
//!
//! let report = metrics::evaluate(&pairwise_euclidean(&data), &grid, Default::default()).unwrap();
//! assert!(report.cc_prime > 0.5);
//! ```

pub mod baselines;
pub mod datasets;
mod error;
pub mod geometry;
pub mod io;
pub mod layout;
pub mod metrics;
pub mod multiscale;
pub mod projection;

pub use error::{Error, Result};
pub use geometry::{
    normalize_columns, pairwise_cosine, pairwise_euclidean, Cell, Dataset, DissimilarityMatrix,
    GridAssignment, GridSpec, Point, Projection,
};
pub use layout::{dgrid, grid_dims, layout, split_x, split_y, Projector};
pub use metrics::{MetricOptions, MetricReport};
pub use projection::{classical_scaling, combine_projections, WeightVector};
