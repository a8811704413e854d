//! Fixed-load bench simulation of a geared motor with an optional series
//! elastic element: plant, chirp excitation, torque control, frequency
//! response estimation and bandwidth extraction, and the experiment harness
//! that ties them together.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control;
pub mod experiments;
pub mod plant;
pub mod signals;
pub mod sysid;
