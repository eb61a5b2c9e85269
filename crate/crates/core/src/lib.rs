//! Step-wise decomposition sampling for component-wise water-level
//! forecasting: SSA and VMD decomposers, four sampling techniques with a
//! causality audit, a gradient-boosted tree regressor and the experiment
//! pipeline that ties them together.

pub mod components;
pub mod error;
pub mod gbt;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod series;
pub mod ssa;
pub mod vmd;

pub use error::{Error, Result};
