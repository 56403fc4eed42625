pub mod congruence;
pub mod consistency;
pub mod error;
pub mod generate;
pub mod grid;
pub mod laguerre;
pub mod lie;
pub mod moebius;
pub mod principal;
pub mod pseudo_euclid;
pub mod qnet;
pub mod random;
pub mod spheres;

pub use error::{Error, Result};
pub use pseudo_euclid::DEFAULT_TOL;
