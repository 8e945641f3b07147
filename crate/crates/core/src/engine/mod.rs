//! Verification engine: candidate generation, inductive invariant
//! learning, the stuttering-product and four-copy verification drivers,
//! bounded reference-model compliance testing, and the exhaustive leakage
//! oracles.

pub mod candidates;
pub mod isa;
pub mod learn;
pub mod oracle;
pub mod problem;
pub mod verify;

pub use candidates::{generate_candidates, CandidateInvariant, Provenance};
pub use isa::{check_isa_compliance, IsaVerdict, IsaViolation};
pub use learn::{learn_inv, LearnStats};
pub use oracle::{oracle_contract_satisfaction, oracle_leak_order, OracleVerdict};
pub use problem::{dump_states, EngineError, Verdict, VerificationProblem, VerificationReport};
pub use verify::{instrument, verify, verify_4way};
