//! Compound secure groupcast: key assignment for selected broadcasting.
//!
//! A transmitter wants to send a message over a noiseless broadcast channel
//! so that an arbitrary group of N out of K receivers can decode it while
//! every other receiver learns nothing — information-theoretically, not just
//! computationally. The freedom lies entirely in how correlated keys are
//! assigned to receivers ahead of time.
//!
//! This crate builds such key assignments over prime fields, runs actual
//! broadcast sessions with them, and verifies their correctness and security
//! *exactly* — by exhaustive enumeration of the key space or by rank
//! arguments on the linear maps, with the two methods cross-checked against
//! each other. It also answers feasibility queries about (key storage,
//! bandwidth) trade-off points against the known capacity results.
//!
//! Module map:
//! - [`field`], [`linalg`]: exact GF(p) arithmetic and dense linear algebra.
//! - [`scheme`]: the key-assignment constructions and their encoders/decoders.
//! - [`entropy`]: exhaustive-enumeration entropy engine over scheme variables.
//! - [`verify`]: correctness/security verdicts via enumeration and via ranks.
//! - [`region`]: converse bounds and (storage, bandwidth) region membership.
//! - [`sim`]: seeded end-to-end sessions, transcripts, and leakage audits.

pub mod entropy;
pub mod field;
pub mod linalg;
pub mod region;
pub mod scheme;
pub mod sim;
pub mod verify;

pub use entropy::{Entropy, EntropyError, RandomSystem};
pub use field::{FieldElement, FieldError, PrimeModulus};
pub use linalg::{FieldMatrix, LinalgError};
pub use region::{
    corner_points, region_membership, scan_region, RegionError, RegionQuery, RegionStatus,
    RegionVerdict,
};
pub use sim::{setup, LeakageAudit, Session, SimError, TranscriptEntry};
pub use verify::{
    verify_scheme, verify_scheme_linear, CheckRecord, VerificationReport, VerifyError, VerifyMode,
};
pub use scheme::{
    BroadcastSignal, EncoderKind, KeyMaterial, QualifiedSet, Scheme, SchemeError, SchemeParams,
};

/// Exact rational arithmetic for entropies and rate points. Entropies are
/// measured in p-ary units (log base p), where they are rational for every
/// quantity this crate computes.
pub type Rational = num_rational::Ratio<i64>;
