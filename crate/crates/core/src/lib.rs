//! Coverage-preserving minimization of Web test input sets.
//!
//! The crate takes a set of recorded inputs (sequences of HTTP actions with
//! the page text each action produced), derives *input blocks* by clustering
//! outputs and then actions, and selects a minimum-cost subset of inputs that
//! still covers every block.
//!
//! The pipeline is split in stages that mirror the modules:
//!
//! 1. [`dataset`]: load, validate, compute costs and preprocess page text.
//! 2. [`distance`] and [`clustering`]: dissimilarities and clustering with
//!    silhouette/Gini hyper-parameter selection.
//! 3. [`blocks`]: output classes, action sets, action subclasses and the
//!    resulting [`CoverageMap`].
//! 4. [`reduction`]: necessary inputs, duplicates, local dominance and the
//!    split into independent components.
//! 5. [`search`]: the roofer/miser genetic search run on each component.
//! 6. [`harness`]: solution assembly, end-to-end runs and benchmarks.
//!
//! [`baselines`] holds the comparison algorithms (greedy, random, ART-style,
//! exhaustive optimum) and the A12 effect size.

pub mod baselines;
pub mod blocks;
pub mod clustering;
pub mod dataset;
pub mod distance;
pub mod harness;
pub mod reduction;
pub mod search;

mod ids;

pub use blocks::{BlockId, CoverageMap};
pub use dataset::{Dataset, InputRecord};
pub use ids::{total_cost, CostMap, InputId, Method};
