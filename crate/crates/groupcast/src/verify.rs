//! Exact verification of correctness and security.
//!
//! A scheme passes verification when, for every qualified set Q:
//! - each qualified receiver can reconstruct the message from the broadcast
//!   and its own key: `H(W | X_Q, Z_q) = 0`, and
//! - each excluded receiver learns nothing about the message even combining
//!   the broadcast with its own key: `I(W ; X_Q, Z_e) = 0`.
//!
//! Two independent engines compute these quantities:
//! - [`verify_scheme`] enumerates the whole outcome space and counts
//!   (information-theoretic, works for any variables, bounded by a budget);
//! - [`verify_scheme_linear`] exploits linearity: the entropy of a linear
//!   image of jointly uniform symbols equals its matrix rank, so every check
//!   reduces to exact rank computations and scales to large schemes.
//!
//! Both return the same [`VerificationReport`] shape with checks in the same
//! order, so their results can be compared record by record.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde_json::json;

use crate::entropy::{
    key_var, message_var, signal_var, Entropy, EntropyError, RandomSystem,
    DEFAULT_ENUMERATION_BUDGET,
};
use crate::linalg::{FieldMatrix, LinalgError};
use crate::scheme::{QualifiedSet, Scheme, SchemeError};
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    /// Scheme variables are linear, so their entropies are always exact;
    /// this guards the verifier against ever consuming an approximation.
    #[error("entropy of {context} came back inexact; refusing to verify with approximations")]
    InexactEntropy { context: String },
}

/// Which engine produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    /// Exhaustive outcome enumeration.
    Exhaustive,
    /// Rank computations over the coefficient matrices.
    Linear,
}

impl VerifyMode {
    pub fn name(self) -> &'static str {
        match self {
            VerifyMode::Exhaustive => "exhaustive",
            VerifyMode::Linear => "linear",
        }
    }
}

impl fmt::Display for VerifyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The role a receiver plays for a particular qualified set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverRole {
    Qualified,
    Excluded,
}

impl ReceiverRole {
    pub fn name(self) -> &'static str {
        match self {
            ReceiverRole::Qualified => "qualified",
            ReceiverRole::Excluded => "excluded",
        }
    }
}

/// What a check record measures; zero means the check holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckQuantity {
    /// `H(W | X_Q, Z_q)` for a qualified receiver (must be 0 to decode).
    ResidualMessageEntropy,
    /// `I(W ; X_Q, Z_e)` for an excluded receiver (must be 0 for secrecy).
    SignalKeyLeakage,
}

impl CheckQuantity {
    pub fn name(self) -> &'static str {
        match self {
            CheckQuantity::ResidualMessageEntropy => "residual-message-entropy",
            CheckQuantity::SignalKeyLeakage => "signal-key-leakage",
        }
    }
}

/// One verified (qualified set, receiver) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub qualified: QualifiedSet,
    pub receiver: usize,
    pub role: ReceiverRole,
    pub quantity: CheckQuantity,
    /// The measured quantity in p-ary symbols, exactly.
    pub value: Rational,
    pub passed: bool,
}

/// Full verification result plus the scheme's resource metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub scheme: String,
    pub qualified_size: usize,
    pub receivers: usize,
    pub modulus: u64,
    pub mode: VerifyMode,
    pub message_len: usize,
    pub key_len: usize,
    /// alpha = L_Z / L_W.
    pub storage_per_message: Rational,
    /// beta = max_Q L_X(Q) / L_W.
    pub bandwidth_worst: Rational,
    /// Average of L_X(Q) / L_W over all qualified sets.
    pub bandwidth_average: Rational,
    /// Broadcast length -> number of qualified sets needing it.
    pub bandwidth_histogram: BTreeMap<usize, usize>,
    /// H(Z_1, .., Z_K) in p-ary symbols.
    pub joint_key_entropy: Rational,
    /// One record per (qualified set, receiver), qualified sets in
    /// lexicographic order, receivers ascending within each set.
    pub checks: Vec<CheckRecord>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let frac = |v: &Rational| json!({ "num": *v.numer(), "den": *v.denom() });
        json!({
            "scheme": self.scheme,
            "qualified_size": self.qualified_size,
            "receivers": self.receivers,
            "modulus": self.modulus,
            "mode": self.mode.name(),
            "message_len": self.message_len,
            "key_len": self.key_len,
            "storage_per_message": frac(&self.storage_per_message),
            "bandwidth_worst": frac(&self.bandwidth_worst),
            "bandwidth_average": frac(&self.bandwidth_average),
            "bandwidth_histogram": self.bandwidth_histogram,
            "joint_key_entropy": frac(&self.joint_key_entropy),
            "checks": self.checks.iter().map(|c| json!({
                "qualified": c.qualified.ids(),
                "receiver": c.receiver,
                "role": c.role.name(),
                "quantity": c.quantity.name(),
                "value": frac(&c.value),
                "passed": c.passed,
            })).collect::<Vec<_>>(),
            "passed": self.passed,
        })
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_json_value())
            .expect("report serialization cannot fail");
        out.push('\n');
        out
    }

    /// Human-readable multi-line summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scheme {} (N={}, K={}, p={}), verified via {} checks\n",
            self.scheme, self.qualified_size, self.receivers, self.modulus, self.mode
        ));
        out.push_str(&format!(
            "  storage per message symbol:   alpha = {}\n",
            self.storage_per_message
        ));
        out.push_str(&format!(
            "  worst-case bandwidth:         beta  = {}\n",
            self.bandwidth_worst
        ));
        out.push_str(&format!(
            "  average bandwidth:            {}\n",
            self.bandwidth_average
        ));
        out.push_str(&format!(
            "  joint key entropy:            {} symbols\n",
            self.joint_key_entropy
        ));
        let (ok, total) = (
            self.checks.iter().filter(|c| c.passed).count(),
            self.checks.len(),
        );
        out.push_str(&format!("  checks passed:                {ok}/{total}\n"));
        for check in self.failed_checks() {
            out.push_str(&format!(
                "  FAIL {} receiver {} for Q = {}: {} = {}\n",
                check.role.name(),
                check.receiver,
                check.qualified,
                check.quantity.name(),
                check.value
            ));
        }
        out.push_str(if self.passed { "PASS\n" } else { "FAIL\n" });
        out
    }
}

/// Exhaustive verification with the default enumeration budget.
pub fn verify_scheme(scheme: &Scheme) -> Result<VerificationReport, VerifyError> {
    verify_scheme_with_budget(scheme, DEFAULT_ENUMERATION_BUDGET)
}

/// Exhaustive verification: every check is an entropy or mutual-information
/// computation over the fully enumerated outcome space.
pub fn verify_scheme_with_budget(
    scheme: &Scheme,
    budget: u64,
) -> Result<VerificationReport, VerifyError> {
    scheme.validate()?;
    let sys = RandomSystem::from_scheme(scheme)?.with_budget(budget);
    let k = scheme.params.receivers;

    let key_names: Vec<String> = (1..=k).map(key_var).collect();
    let key_refs: Vec<&str> = key_names.iter().map(String::as_str).collect();
    let joint_key_entropy = exact_of(sys.entropy(&key_refs)?, "the joint key")?;

    let w = message_var();
    let mut checks = Vec::new();
    for q in scheme.qualified_sets() {
        let x = signal_var(&q);
        for receiver in 1..=k {
            let z = key_var(receiver);
            let (role, quantity, value) = if q.contains(receiver) {
                let h = sys.conditional_entropy(&[&w], &[&x, &z])?;
                (
                    ReceiverRole::Qualified,
                    CheckQuantity::ResidualMessageEntropy,
                    exact_of(h, "a decoding check")?,
                )
            } else {
                let i = sys.mutual_information(&[&w], &[&x, &z], &[])?;
                (
                    ReceiverRole::Excluded,
                    CheckQuantity::SignalKeyLeakage,
                    exact_of(i, "a leakage check")?,
                )
            };
            checks.push(CheckRecord {
                qualified: q.clone(),
                receiver,
                role,
                quantity,
                value,
                passed: value == Rational::from_integer(0),
            });
        }
    }
    Ok(assemble_report(
        scheme,
        VerifyMode::Exhaustive,
        joint_key_entropy,
        checks,
    ))
}

/// Rank-based verification. For jointly uniform symbols, the entropy of a
/// linear image equals the rank of its coefficient matrix (in p-ary
/// symbols), so each check becomes a rank difference:
///
/// - residual message entropy of a qualified receiver:
///   `rank([X; Z_q; W]) - rank([X; Z_q])` over the combined (basis, message)
///   columns — zero exactly when the message rows are spanned;
/// - leakage to an excluded receiver:
///   `rank([X; Z_e]) - rank_basis_only([X; Z_e])` — the observation's
///   entropy in total minus its entropy given the message; zero exactly
///   when the message columns add no rank.
pub fn verify_scheme_linear(scheme: &Scheme) -> Result<VerificationReport, VerifyError> {
    scheme.validate()?;
    let p = scheme.params.modulus;
    let k = scheme.params.receivers;
    let b = scheme.basis_count;
    let m = scheme.message_len;

    let all: Vec<usize> = (1..=k).collect();
    let joint_key_entropy =
        Rational::from_integer(scheme.stacked_generators(&all)?.rank() as i64);

    let sets = scheme.qualified_sets();
    let per_set: Vec<Vec<CheckRecord>> = sets
        .par_iter()
        .map(|q| -> Result<Vec<CheckRecord>, VerifyError> {
            let (w_coeff, s_coeff) = scheme.encoder_matrices(q)?;
            // Observation rows over columns [basis | message].
            let x_rows = s_coeff.hstack(&w_coeff)?;
            let mut records = Vec::with_capacity(k);
            for receiver in 1..=k {
                let gen = &scheme.key_generators[receiver - 1];
                let z_rows = gen.hstack(&FieldMatrix::zero(p, gen.rows(), m))?;
                let observed = x_rows.vstack(&z_rows)?;
                let (role, quantity, value) = if q.contains(receiver) {
                    let w_rows =
                        FieldMatrix::zero(p, m, b).hstack(&FieldMatrix::identity(p, m))?;
                    let with_message = observed.vstack(&w_rows)?;
                    let residual = with_message.rank() - observed.rank();
                    (
                        ReceiverRole::Qualified,
                        CheckQuantity::ResidualMessageEntropy,
                        Rational::from_integer(residual as i64),
                    )
                } else {
                    let basis_only = s_coeff.vstack(gen)?;
                    let leakage = observed.rank() - basis_only.rank();
                    (
                        ReceiverRole::Excluded,
                        CheckQuantity::SignalKeyLeakage,
                        Rational::from_integer(leakage as i64),
                    )
                };
                records.push(CheckRecord {
                    qualified: q.clone(),
                    receiver,
                    role,
                    quantity,
                    value,
                    passed: value == Rational::from_integer(0),
                });
            }
            Ok(records)
        })
        .collect::<Result<_, _>>()?;

    Ok(assemble_report(
        scheme,
        VerifyMode::Linear,
        joint_key_entropy,
        per_set.into_iter().flatten().collect(),
    ))
}

fn assemble_report(
    scheme: &Scheme,
    mode: VerifyMode,
    joint_key_entropy: Rational,
    checks: Vec<CheckRecord>,
) -> VerificationReport {
    let passed = checks.iter().all(|c| c.passed);
    VerificationReport {
        scheme: scheme.encoder_kind.name().to_string(),
        qualified_size: scheme.params.qualified_size,
        receivers: scheme.params.receivers,
        modulus: scheme.params.modulus.get(),
        mode,
        message_len: scheme.message_len,
        key_len: scheme.key_len(),
        storage_per_message: scheme.storage_per_message(),
        bandwidth_worst: scheme.bandwidth_worst(),
        bandwidth_average: scheme.bandwidth_average(),
        bandwidth_histogram: scheme.bandwidth_histogram(),
        joint_key_entropy,
        checks,
        passed,
    }
}

fn exact_of(entropy: Entropy, context: &str) -> Result<Rational, VerifyError> {
    entropy.exact().ok_or_else(|| VerifyError::InexactEntropy {
        context: context.to_string(),
    })
}
