//! Decorated-tree combinatorics and renormalisation for singular SPDEs.

pub mod cli;
pub mod config;
pub mod counterterms;
pub mod error;
pub mod graph_power;
pub mod homogeneity;
pub mod renorm_eq;
pub mod renorm_group;
pub mod rules;
pub mod subforests;
pub mod symbolic;
pub mod trees;

pub use error::{Error, Result};
pub use homogeneity::{Grade, Homogeneity};
