//! Kinematic simulation, planning and quasi-static analysis for a legless
//! robot that moves by tipping over the edges of its footprint.

pub mod geometry;
pub mod robot;
pub mod tolerances;
pub mod planner;
pub mod reachability;
pub mod exec;
pub mod statics;
pub mod trace_io;
pub mod session;
