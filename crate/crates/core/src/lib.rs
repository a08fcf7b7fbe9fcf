pub mod bench;
pub mod cli;
pub mod container;
pub mod data;
pub mod error;
pub mod network;
pub mod optim;
pub mod report;
pub mod selection;
pub mod transforms;

pub use error::{Error, Result};
