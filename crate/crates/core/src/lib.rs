//! Cluster representatives selection (CRS) and nearest-prototype
//! classification.
//!
//! Each labelled cluster is reduced to a small prototype: an approximate
//! k-NN graph is built with NN-Descent, reversed, pruned at the cluster's
//! homogeneity, and covered greedily until an `epsilon` fraction of the
//! cluster is represented. New samples are then classified by their most
//! similar representative.
//!
//! ```
//! use crs::dataset::synthetic::{gen_synthetic, SyntheticSpec};
//! use crs::eval::{run_eval, MethodConfig, SplitConfig};
//! use crs::{CrsParams, SimilarityMeasure};
//!
//! let ds = gen_synthetic(
//!     &SyntheticSpec::GaussianBlobs { centers: vec![[0.0, 0.0], [8.0, 8.0]], per_blob: 100, sigma: 1.0 },
//!     7,
//! )
//! .unwrap();
//! let report = run_eval(
//!     &ds,
//!     &SimilarityMeasure::InverseEuclidean,
//!     &MethodConfig::Crs(CrsParams::with_k(10)),
//!     SplitConfig::default(),
//! )
//! .unwrap();
//! assert!(report.prototype_fraction < 0.5);
//! ```

pub mod baselines;
pub mod cli;

pub mod dataset;
pub mod error;
pub mod eval;
pub mod knn_graph;
pub mod npc;
pub mod prototype;
pub mod reverse_graph;
pub mod select;
pub mod similarity;

pub use crate::select::{greedy_cover, select_representatives, CrsParams, GraphMode, ScoreRule};
pub use dataset::{Cluster, FeatureVector, ItemId, LabeledDataset};
pub use error::{Error, Result};
pub use knn_graph::{exact_knn, graph_recall, nn_descent, KnnGraph, NnDescentParams};
pub use npc::{batch_classify, classify, PrototypeSet};
pub use prototype::{Method, Prototype};
pub use reverse_graph::{homogeneity, reverse_and_prune, ReverseGraph, TauMode};
pub use similarity::{CountingSimilarity, SimilarityMeasure, SimilaritySpace};
