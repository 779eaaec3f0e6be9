//! Code-efficiency benchmark toolkit.
//!
//! Scores externally generated programs against efficient reference code
//! (NPI and IOCCB), times programs under a judge-style protocol, and builds
//! efficient/inefficient pair datasets from raw solution corpora.

pub mod codebleu;
pub mod corpus;
pub mod efficiency;
pub mod evalstats;
pub mod ioccb;
pub mod pairing;
pub mod par;
pub mod pynorm;
pub mod runner;

pub use par::Execution;
