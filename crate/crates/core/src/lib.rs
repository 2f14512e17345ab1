//! Bounds on the greatest cross norm of bipartite and multipartite density operators, the
//! entanglement measures built from it, and the channel and measurement operations under
//! which those measures are monotone.

pub mod channels;
pub mod cli;
pub mod decompositions;
pub mod demo;
pub mod entropy;
pub mod error;
pub mod gamma;
pub mod linalg;
pub mod sampling;
pub mod states;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
