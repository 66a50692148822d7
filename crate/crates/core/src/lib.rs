//! Nonparametric regression in doubling metric spaces.
//!
//! The crate fits an approximately smoothest Lipschitz hypothesis to labeled
//! samples and evaluates it at new points by approximate Lipschitz extension.
//! Everything here is allocation-only (`no_std` + `alloc`); file formats, the
//! command line and the experiment harness live in the `lipreg` crate.
//!
//! The pipeline, bottom-up:
//!
//! * [`metric`] / [`dataset`] / [`net`]: metric plug-ins, labeled samples with
//!   diameter normalization, greedy nets and net hierarchies, doubling
//!   dimension estimation.
//! * [`spanner`]: a `(1+δ)`-stretch spanner with `O(log n)` hop diameter built
//!   on a net tree shortcut by heavy-path DAGs.
//! * [`ann`]: `(1+ε)`-approximate nearest neighbors by net descent.
//! * [`solver`]: approximate packing/covering feasibility with exactly
//!   re-verified outputs and Farkas infeasibility certificates.
//! * [`bounds`]: fat-shattering and deviation bounds, their inversion and the
//!   stratified risk objective.
//! * [`srm`]: the spanner-sparsified ERM programs and the structural risk
//!   minimization search over the Lipschitz budget.
//! * [`extension`]: exact and bucketed approximate Lipschitz extension.
#![no_std]

extern crate alloc;

pub mod ann;
pub mod bounds;
pub mod dataset;
pub mod error;
pub mod extension;
pub mod metric;
pub mod net;
pub mod solver;
pub mod spanner;
pub mod srm;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use metric::{Discrete, DistanceMatrix, MatrixPoint, Metric, Minkowski, Norm, Torus};
pub use bounds::Loss;
pub use srm::{fit, FitOptions, Hypothesis};
