pub mod error;
pub mod specfun;

pub use error::{Error, Result};
pub mod quad;
pub mod pole;
pub mod params;
pub mod field;
pub mod dual;
pub mod correlators;
pub mod linalg;
pub mod entanglement;
pub mod rdm;
pub mod tdpt;
pub mod scenario;
pub mod validation;
