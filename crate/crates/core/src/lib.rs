//! Decentralized monitoring with execution history encodings.

pub mod analysis;
pub mod ehe;
pub mod engine;
pub mod expr;
pub mod fixtures;
pub mod metrics;
pub mod replicated;
pub mod spec;
pub mod synthesis;
pub mod traces;
