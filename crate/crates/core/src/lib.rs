//! Dyadic cube systems on finite metric spaces.
//!
//! The pipeline runs [`space`] → [`nets`] → [`certify`] → [`parent`] → [`cubes`]
//! → [`framework`] → [`energy`]. Everything is deterministic given its inputs and
//! an explicit seed; nothing here touches the filesystem.

#![no_std]

extern crate alloc;

pub mod certify;
pub mod cubes;
pub mod energy;
pub mod error;
pub mod framework;
pub mod nets;
pub mod parent;
pub mod sample;
pub mod space;

pub use error::{Error, Result};
