pub mod chart;
pub mod connection;
pub mod error;
pub mod graded;
pub mod io;
pub mod jet;
pub mod numerics;
pub mod random;
pub mod supermap;
pub mod verify;

pub use chart::Chart;
pub use error::{Error, Result};
