//! Planar pure 2D gravity: exact enumeration of rooted disk triangulations, the
//! algebraic generating function, boundary and bulk Markov dynamics, the quadratic
//! measure process, the tree code, and one-dimensional gravity.

pub mod acceptance;
pub mod boundary;
pub mod enumeration;
pub mod error;
pub mod exec;
pub mod gf;
pub mod internal;
pub mod map;
pub mod nonlinear;
pub mod one_dim;
pub mod rng;
pub mod stats;
pub mod trees;

pub use error::{Error, Result};
pub use map::{MapMode, RootedMap};
