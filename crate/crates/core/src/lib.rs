pub mod audit;
pub mod channels;
pub mod cli;
pub mod divergences;
pub mod error;
pub mod optim;
pub mod qcore;
pub mod resource;
pub mod sdp;
pub mod thermo;

pub use error::{Error, Result};
