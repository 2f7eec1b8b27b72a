//! Reference implementations shared by the oracle tests and the acceptance suite.
#![allow(dead_code)]

pub mod energy;
pub mod parents;
pub mod pipeline;
