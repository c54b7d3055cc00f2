pub mod boosting;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod mllvq;
pub mod pca;
pub mod seed;
pub mod synthgen;
