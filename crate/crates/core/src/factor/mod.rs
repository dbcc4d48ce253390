//! Numeric kit: agglomerative clustering, sparse biclustering of a
//! provider × word matrix, and Tucker3 decomposition of a three-way tensor.

mod bicluster;
mod hac;
mod tensor;
mod textio;
mod tucker;

use thiserror::Error;

pub use bicluster::{
    bicluster, bicluster_objective, tfidf_row_normalize, BiclusterConfig, BiclusterFactor,
    BiclusterResult,
};
pub use hac::{cut, hac, linkage, linkage_names, Dendrogram, Linkage, Merge};
pub use tensor::Tensor3;
pub use textio::{parse_array, write_array, ArrayText};
pub use tucker::{project, tucker3, Mode, Projection, TuckerConfig, TuckerModel};

#[derive(Debug, Error, PartialEq)]
pub enum FactorError {
    #[error("need at least 2 vectors, got {0}")]
    TooFewVectors(usize),
    #[error("vector {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("rank {rank} exceeds dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("negative entry at ({0}, {1})")]
    Negative(usize, usize),
    #[error("non-finite value in input")]
    NonFinite,
    #[error("invalid component pair ({i}, {j}) for rank {rank}")]
    BadComponents { i: usize, j: usize, rank: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}
