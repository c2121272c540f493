//! Constant-width bodies built from confocal pea-pod devices.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod geom;
pub mod mesh;
pub mod peapod;
pub mod quadrics;
pub mod verify;
pub mod wedge;

pub use error::{Error, Result};
