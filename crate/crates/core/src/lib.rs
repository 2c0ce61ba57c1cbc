//! Data selection for low-resource sequence labeling.
//!
//! Sentences are ranked by how useful they are likely to be as labeled
//! training data, using only the geometry of their precomputed embeddings.
//! The main criterion is the ratio-penalty gain
//!
//! ```text
//! F(s | X) = sum_{y in V} sim(s, y) / (1 + sum_{x in X} sim(s, x))
//! ```
//!
//! driven greedily over the whole ground set `V`. Coverage, linear-penalty,
//! random, length and uncertainty-based active-learning baselines are
//! provided alongside it.
//!
//! ```
//! use rpsel_core::corpus::EmbeddingMatrix;
//! use rpsel_core::selector::rank_ratio_penalty;
//! use rpsel_core::simspace::SimilarityModel;
//!
//! let emb = EmbeddingMatrix::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![6.0, 8.0]])?;
//! let model = SimilarityModel::build(&emb)?;
//! assert_eq!(rank_ratio_penalty(&model).order(), [1, 0, 2]);
//! # Ok::<(), rpsel_core::Error>(())
//! ```

pub mod corpus;
mod error;
pub mod pipeline;
pub mod rng;
pub mod selector;
pub mod simspace;

pub use error::{Error, Result};
