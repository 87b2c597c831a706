pub mod array;
pub mod bundle;
pub mod error;
pub mod estimation;
pub mod hrtf;
pub mod metrics;
pub mod rendering;
pub mod simulate;
pub mod special_fn;
pub mod wavefield;

pub use error::{Error, Result};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
