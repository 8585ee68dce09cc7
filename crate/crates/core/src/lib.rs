//! Information-theoretic scores over population-weighted partitions of
//! geographic units.
//!
//! All scores are built from one object, the [`ContingencyTable`] of two
//! partitions over the same [`UnitUniverse`]:
//!
//! * [`segregation_score`]: `Ent(R|T) / Ent(R)` for a demographic
//!   bipartition `R` over tracts `T`.
//! * [`county_split_entropy`], [`splits_count`], [`pieces_count`]: how much
//!   a districting plan divides counties.
//! * [`plan_distance`]: symmetrized conditional entropy between two plans,
//!   plus [`pairwise_distances`] and [`classical_mds`] for whole ensembles.
//!
//! ```
//! use std::sync::Arc;
//! use geoentropy::{plan_distance, LabeledPartition, UnitUniverse};
//!
//! let units = Arc::new(UnitUniverse::uniform(["a", "b", "c", "d"])?);
//! let p = LabeledPartition::new(units.clone(), ["x", "x", "y", "y"])?;
//! let q = LabeledPartition::new(units, ["x", "y", "x", "y"])?;
//! assert_eq!(plan_distance(&p, &q)?, 1.0);
//! # Ok::<(), geoentropy::Error>(())
//! ```

pub mod cli;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod jacobi;
pub mod numeric;
pub mod partition;
pub mod scores;

pub use ensemble::{
    classical_mds, outlier_summary, pairwise_distances, DistanceMatrix, Embedding2D, OutlierEntry,
    OutlierReport,
};
pub use entropy::{
    bayes_residual, build_table, conditional_entropy, entropy, local_entropy, partition_entropy,
    ContingencyTable, MarginalDistribution,
};
pub use error::{Error, Result};
pub use fixtures::{make_fixture, named_fixture, Fixture, FixtureName, FixtureSpec};
pub use ingest::{
    bipartition_by_threshold, load_adjacency, load_assignment, load_weights, Bipartition,
    Reconcile, WeightTable,
};
pub use partition::{LabeledPartition, UnitUniverse};
pub use scores::{
    county_split_entropy, pieces_count, plan_distance, segregation_score, splits_count,
    AdjacencyGraph, CountySplitReport, SegregationResult,
};
