//! Learning directly on vectors with missing attributes.
//!
//! The data is assumed to live on a hidden low-rank subspace. Instead of
//! completing the missing entries, every partially observed vector is mapped
//! into a sequence-indexed feature space whose inner product has a closed
//! form (see [`kernel`]). The online learner in [`learner`] runs regularized
//! kernelized subgradient descent in that space.
//!
//! The remaining modules exist to check the learner against ground truth:
//! dense reference predictors ([`reference`]), a regularity verifier
//! ([`regularity`]), a synthetic generator ([`datagen`]) and baselines plus a
//! regret harness ([`evaluation`]). [`cli`] wires it all into one binary.

pub mod cli;
pub mod datagen;
pub mod dims;
pub mod error;
pub mod evaluation;
pub mod kernel;
pub mod learner;
pub mod linalg;
pub mod loss;
pub mod observed;
pub mod reference;
pub mod regularity;

pub use dims::{gamma_dims, GammaDims};
pub use error::{Error, Result};
pub use kernel::{embed, embedding_inner_product, gram, kernel, ExplicitEmbedding};
pub use learner::{KarmaModel, TrainConfig, TrainTrace};
pub use loss::{LossKind, LossSpec};
pub use observed::{LabeledExample, ObservedVector};
pub use reference::{DensePredictorF0, DensePredictorFGamma, SubspaceSpec};
pub use regularity::{check_regularity, RegularityReport};
