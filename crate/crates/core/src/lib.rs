pub mod airy;
pub mod asym;
pub mod dgop;
pub mod error;
pub mod ode;
pub mod oracle;
pub mod painleve;
pub mod psi;
pub mod validation;
pub mod watermelon;

pub use error::{Error, Result};
