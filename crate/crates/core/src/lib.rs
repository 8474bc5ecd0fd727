pub mod align;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod embed;
pub mod error;
pub mod evaluate;
pub mod lexstats;
pub mod retrieve;
pub mod sigfig;

pub use error::{Error, Result};
