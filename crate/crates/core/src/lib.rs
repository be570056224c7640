pub mod certify;
pub mod closed_form;
pub mod descriptor;
pub mod discrete;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mode1d;
pub mod ode;
pub mod report;
pub mod sampled;
pub mod spectral;
pub mod tolerance;

pub use error::{FbmsError, Result};
