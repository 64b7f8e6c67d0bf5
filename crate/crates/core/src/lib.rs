pub mod certify;
pub mod deltaf;
pub mod error;
pub mod finset;
pub mod omega;
pub mod presheaf;
pub mod report;
pub mod tau;

pub use error::{Error, Result};
pub use report::CheckReport;
