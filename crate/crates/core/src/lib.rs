pub mod error;
pub mod dw;
pub mod eft;
pub mod fp;
pub mod interval;
pub mod lab;
pub mod bench;

pub use error::{Error, Result};
