pub mod cli;
pub mod config;
pub mod convnet;
pub mod error;
pub mod gpboost;
pub mod imaging;
pub mod metrics;
pub mod rng;
pub mod stacker;
pub mod tabular;
pub mod textfmt;

pub use error::{Error, Result};
