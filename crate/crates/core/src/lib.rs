//! Multi-pass streaming approximation for constrained binary k-means and
//! generalized binary ℓ0 low-rank approximation.
//!
//! Data is only ever read through a [`PointStream`], which counts complete
//! passes. The constrained k-means pipeline ([`ptas::constrained_kmeans`])
//! uses three passes and the low-rank pipeline ([`lowrank::lowrank_approx`])
//! four. The [`oracle`] module holds exhaustive solvers for tiny instances.

pub mod baseline;
pub mod bitrow;
pub mod cost;
pub mod error;
pub mod lowrank;
pub mod oracle;
pub mod ptas;
pub mod relations;
pub mod sampling;
pub mod stream;

pub use baseline::{
    baseline_binary_kmeans, snap_to_data, stream_coreset, weighted_kmeans_binary, CoresetConfig, WeightedPoint,
};
pub use bitrow::{hamming, BitRow};
pub use cost::{cost_phi, majority_center, multi_cost, nearest_center, CenterSet};
pub use error::{Error, Result};
pub use lowrank::{l0_error, lowrank_approx, reduce_to_kmeans, Factorization, Factors};
pub use oracle::{exact_binary_kmeans, exact_constrained_kmeans, exact_lowrank, OracleLimits};
pub use ptas::{assign_clusters, best_centers, constrained_kmeans, default_params, good_centers, PtasParams};
pub use relations::{parse_relations, validate_center_set, InnerProduct, RelationEntry, RelationSet};
pub use sampling::{d2_reservoir_sample, SeededRng};
pub use stream::{PointStream, StreamConfig};
