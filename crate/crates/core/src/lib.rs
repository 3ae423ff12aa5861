//! Explicit-state model checking of strategic abilities in asynchronous
//! multi-agent systems.

pub mod dsl;
pub mod model;
pub mod semantics;
pub mod bench;
pub mod kbsc;
pub mod por;
