//! Toolkit for evaluating synthetic accelerometer data in fall detection.

pub mod classifier;
pub mod harness;
pub mod ingest;
pub mod kinematics;
pub mod metrics;
pub mod windowing;
