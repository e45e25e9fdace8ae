//! Independent reference implementations shared by the integration tests
//! and the acceptance binary.
#![allow(dead_code)]

pub mod gradcheck;
pub mod oracles;
pub mod smoke;
