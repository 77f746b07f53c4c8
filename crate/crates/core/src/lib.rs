//! Search-based unit test generation for MiniDyn modules.

pub mod lang;
pub mod analysis;
pub mod testcase;
pub mod interp;
pub mod fitness;
pub mod assertgen;
pub mod export;
pub mod search;
pub mod corpus;
