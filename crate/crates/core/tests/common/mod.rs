//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the code paths it checks.
#![allow(dead_code)]

pub mod kin;
pub mod landing;
pub mod search;
pub mod statics;
