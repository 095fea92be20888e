//! Oracles and generators shared by the test suites.
//!
//! Everything here computes expected results without going through the
//! code under test: the logic oracle evaluates programs bottom-up, and the
//! detection oracles count and collect straight from the detection list.

pub mod bottom_up;
pub mod detections;
pub mod programs;
pub mod questions;
