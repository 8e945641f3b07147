//! Core library for `uvleak`: a small synchronous-circuit language with an
//! executable semantics, self-composition transforms, a bounded SAT-backed
//! validity checker, and a relational-invariant verification engine that
//! decides whether a pipelined implementation leaks no more through an
//! attacker's cycle-level observations than an ISA-level contract allows.

pub mod engine;
pub mod ir;
pub mod logic;
pub mod sim;
pub mod textio;
pub mod transform;

pub mod fixtures;
