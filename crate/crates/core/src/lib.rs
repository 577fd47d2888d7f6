pub mod cli;
pub mod closure;
pub mod endpoints;
pub mod error;
pub mod oracle;
pub mod primes;
pub mod realnum;

pub use error::{Error, Result};
