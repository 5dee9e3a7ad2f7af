pub mod cli;
pub mod error;
pub mod harris;
pub mod hypermap;
pub mod ncpart;
pub mod percsim;
pub mod szgen;

pub use error::{Error, Result};
