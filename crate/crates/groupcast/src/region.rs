//! Storage/bandwidth tradeoff queries with exact rational arithmetic.
//!
//! The achievable (alpha, beta) pairs — key symbols stored per message
//! symbol versus broadcast symbols per message symbol — form a convex,
//! upward-closed region. This module evaluates the known converse
//! inequalities on concrete schemes and answers membership queries about
//! that region:
//!
//! - the region is known exactly for one qualified receiver (alpha, beta >= 1)
//!   and for two (alpha + beta >= 3 on top of that);
//! - for larger qualified sets only edges and corner points are settled, so
//!   queries between the known-achievable hull and the known bounds answer
//!   `Unknown` — the engine never extrapolates tightness.
//!
//! No floating point anywhere: boundaries are compared as exact rationals.

use std::fmt;

use crate::entropy::{key_var, RandomSystem};
use crate::scheme::{binomial, QualifiedSet, Scheme};
use crate::verify::{VerifyError, VerifyMode};
use crate::Rational;

#[derive(Debug, thiserror::Error)]
pub enum RegionError {
    #[error("invalid region query: {0}")]
    InvalidQuery(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn check_params(n: usize, k: usize) -> Result<(), RegionError> {
    if n < 1 || k < 2 || n > k - 1 {
        return Err(RegionError::InvalidQuery(format!(
            "need 1 <= N <= K-1, got N={n}, K={k}"
        )));
    }
    Ok(())
}

/// Evaluation of the conditional key-entropy requirement: a scheme can only
/// carry `L_W` message symbols if every qualified receiver's key holds that
/// much entropy beyond any single eavesdropper's key, i.e.
/// `L_W <= min over ordered pairs (q, e) of H(Z_q | Z_e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyBoundReport {
    pub message_len: usize,
    /// `min_{q != e} H(Z_q | Z_e)` in p-ary symbols.
    pub min_conditional_entropy: Rational,
    /// The (q, e) pair attaining the minimum (first in lexicographic order).
    pub binding_pair: (usize, usize),
    /// Whether `message_len <= min_conditional_entropy`.
    pub satisfied: bool,
}

/// Computes the conditional key-entropy bound over all ordered receiver
/// pairs, via full enumeration or via ranks (`H(Z_q|Z_e)` of linear keys is
/// `rank([G_q; G_e]) - rank(G_e)`).
pub fn key_entropy_bound(
    scheme: &Scheme,
    mode: VerifyMode,
) -> Result<KeyBoundReport, RegionError> {
    let k = scheme.params.receivers;
    let mut best: Option<(Rational, (usize, usize))> = None;
    let sys = match mode {
        VerifyMode::Exhaustive => Some(
            RandomSystem::from_scheme(scheme).map_err(VerifyError::from)?,
        ),
        VerifyMode::Linear => None,
    };
    for q in 1..=k {
        for e in 1..=k {
            if q == e {
                continue;
            }
            let value = match &sys {
                Some(sys) => {
                    let zq = key_var(q);
                    let ze = key_var(e);
                    sys.conditional_entropy(&[&zq], &[&ze])
                        .map_err(VerifyError::from)?
                        .exact()
                        .ok_or_else(|| VerifyError::InexactEntropy {
                            context: "a conditional key entropy".to_string(),
                        })?
                }
                None => {
                    let joint = scheme
                        .stacked_generators(&[q, e])
                        .map_err(VerifyError::from)?
                        .rank();
                    let alone = scheme.key_generators[e - 1].rank();
                    int((joint - alone) as i64)
                }
            };
            if best.map_or(true, |(min, _)| value < min) {
                best = Some((value, (q, e)));
            }
        }
    }
    let (min_conditional_entropy, binding_pair) =
        best.expect("schemes have at least two receivers");
    Ok(KeyBoundReport {
        message_len: scheme.message_len,
        min_conditional_entropy,
        binding_pair,
        satisfied: int(scheme.message_len as i64) <= min_conditional_entropy,
    })
}

/// Lower bound on the broadcast length for a receiver subset of size at
/// most N: correlation among the subset's keys forces
/// `L_X >= |Q| * L_W - (sum_i H(Z_{q_i}) - H(Z_{q_1}, .., Z_{q_|Q|}))`,
/// never below the trivial `L_X >= L_W`. Returned in p-ary symbols.
pub fn bandwidth_lower_bound(
    scheme: &Scheme,
    subset: &QualifiedSet,
    mode: VerifyMode,
) -> Result<Rational, RegionError> {
    if subset.len() > scheme.params.qualified_size {
        return Err(RegionError::InvalidQuery(format!(
            "bandwidth bound applies to subsets of at most N={} receivers, got {}",
            scheme.params.qualified_size, subset
        )));
    }
    if subset.ids().last().copied().unwrap_or(0) > scheme.params.receivers {
        return Err(RegionError::InvalidQuery(format!(
            "subset {subset} names a receiver beyond K={}",
            scheme.params.receivers
        )));
    }
    let (sum_single, joint) = match mode {
        VerifyMode::Exhaustive => {
            let sys = RandomSystem::from_scheme(scheme).map_err(VerifyError::from)?;
            let exact = |names: &[String]| -> Result<Rational, RegionError> {
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                sys.entropy(&refs)
                    .map_err(VerifyError::from)?
                    .exact()
                    .ok_or_else(|| {
                        VerifyError::InexactEntropy {
                            context: "a key entropy".to_string(),
                        }
                        .into()
                    })
            };
            let mut sum = int(0);
            for &r in subset.ids() {
                sum += exact(&[key_var(r)])?;
            }
            let joint_names: Vec<String> = subset.ids().iter().map(|&r| key_var(r)).collect();
            (sum, exact(&joint_names)?)
        }
        VerifyMode::Linear => {
            let sum = subset
                .ids()
                .iter()
                .map(|&r| scheme.key_generators[r - 1].rank() as i64)
                .sum::<i64>();
            let joint = scheme
                .stacked_generators(subset.ids())
                .map_err(VerifyError::from)?
                .rank() as i64;
            (int(sum), int(joint))
        }
    };
    let l_w = int(scheme.message_len as i64);
    let bound = int(subset.len() as i64) * l_w - (sum_single - joint);
    Ok(bound.max(l_w))
}

/// A membership question: is (alpha, beta) achievable for (N, K)?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionQuery {
    pub qualified_size: usize,
    pub receivers: usize,
    pub alpha: Rational,
    pub beta: Rational,
}

impl RegionQuery {
    pub fn new(
        qualified_size: usize,
        receivers: usize,
        alpha: Rational,
        beta: Rational,
    ) -> Result<Self, RegionError> {
        check_params(qualified_size, receivers)?;
        if alpha <= int(0) || beta <= int(0) {
            return Err(RegionError::InvalidQuery(format!(
                "alpha and beta must be positive, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(RegionQuery {
            qualified_size,
            receivers,
            alpha,
            beta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStatus {
    Achievable,
    Infeasible,
    Unknown,
}

impl RegionStatus {
    pub fn name(self) -> &'static str {
        match self {
            RegionStatus::Achievable => "achievable",
            RegionStatus::Infeasible => "infeasible",
            RegionStatus::Unknown => "unknown",
        }
    }
}

impl fmt::Display for RegionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The answer to a membership query. Achievable verdicts name a scheme (or
/// time-share of schemes) constructible in this crate; Infeasible verdicts
/// name the violated inequality; Unknown verdicts say what is open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionVerdict {
    pub status: RegionStatus,
    pub witness: String,
}

impl RegionVerdict {
    fn achievable(witness: impl Into<String>) -> Self {
        RegionVerdict {
            status: RegionStatus::Achievable,
            witness: witness.into(),
        }
    }

    fn infeasible(witness: impl Into<String>) -> Self {
        RegionVerdict {
            status: RegionStatus::Infeasible,
            witness: witness.into(),
        }
    }

    fn unknown(witness: impl Into<String>) -> Self {
        RegionVerdict {
            status: RegionStatus::Unknown,
            witness: witness.into(),
        }
    }
}

/// A known-achievable (alpha, beta) point and the scheme that attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerPoint {
    pub alpha: Rational,
    pub beta: Rational,
    pub scheme: String,
}

/// The known-achievable corner points for (N, K), deduplicated (the
/// canonical construction is kept when two coincide) and sorted by alpha.
pub fn corner_points(n: usize, k: usize) -> Result<Vec<CornerPoint>, RegionError> {
    check_params(n, k)?;
    let c = binomial(k - 1, n - 1).ok_or_else(|| {
        RegionError::InvalidQuery(format!("C({}, {}) overflows", k - 1, n - 1))
    })?;
    let mut candidates = vec![
        CornerPoint {
            alpha: int(n as i64),
            beta: int(1),
            scheme: "min-bandwidth".to_string(),
        },
        CornerPoint {
            alpha: int(1),
            beta: int(n.min(k - n + 1) as i64),
            scheme: "min-storage".to_string(),
        },
        CornerPoint {
            alpha: int(c as i64),
            beta: int(1),
            scheme: "combinatorial-shared".to_string(),
        },
        CornerPoint {
            alpha: int(1),
            beta: int(n as i64),
            scheme: "independent-keys".to_string(),
        },
    ];
    if (n, k) == (3, 5) {
        candidates.push(CornerPoint {
            alpha: int(1),
            beta: Rational::new(29, 10),
            scheme: "symmetrized n3k5".to_string(),
        });
    }
    let mut points: Vec<CornerPoint> = Vec::new();
    for cand in candidates {
        if !points
            .iter()
            .any(|p| p.alpha == cand.alpha && p.beta == cand.beta)
        {
            points.push(cand);
        }
    }
    points.sort_by(|a, b| (a.alpha, a.beta).cmp(&(b.alpha, b.beta)));
    Ok(points)
}

/// The Pareto frontier of the corner points followed by its lower convex
/// envelope: the points whose time-sharing combinations span every known
/// achievable boundary point, sorted by increasing alpha.
fn achievable_frontier(n: usize, k: usize) -> Result<Vec<CornerPoint>, RegionError> {
    let points = corner_points(n, k)?;
    // Pareto prune: drop any point weakly dominated by another.
    let pareto: Vec<CornerPoint> = points
        .iter()
        .filter(|p| {
            !points.iter().any(|o| {
                (o.alpha, o.beta) != (p.alpha, p.beta) && o.alpha <= p.alpha && o.beta <= p.beta
            })
        })
        .cloned()
        .collect();
    // Lower convex envelope over increasing alpha (beta strictly decreasing
    // after the prune): drop middle points on or above the chord.
    let mut hull: Vec<CornerPoint> = Vec::new();
    for point in pareto {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // Keep b only if it dips strictly below the chord a->point:
            // slope(a, b) < slope(b, point), cross-multiplied exactly.
            let lhs = (b.beta - a.beta) * (point.alpha - b.alpha);
            let rhs = (point.beta - b.beta) * (b.alpha - a.alpha);
            if lhs < rhs {
                break;
            }
            hull.pop();
        }
        hull.push(point);
    }
    Ok(hull)
}

/// If (alpha, beta) lies on or above the time-sharing hull of the known
/// corners, returns the witnessing corner or segment.
fn hull_dominance(query: &RegionQuery) -> Result<Option<String>, RegionError> {
    let frontier = achievable_frontier(query.qualified_size, query.receivers)?;
    // Single-corner dominance first: the witness is a concrete scheme.
    for corner in &frontier {
        if query.alpha >= corner.alpha && query.beta >= corner.beta {
            return Ok(Some(format!(
                "dominates the {} corner (alpha={}, beta={})",
                corner.scheme, corner.alpha, corner.beta
            )));
        }
    }
    // Segment dominance: time-sharing two adjacent frontier schemes.
    for pair in frontier.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if query.alpha < a.alpha || query.alpha > b.alpha {
            continue;
        }
        let required = a.beta
            + (query.alpha - a.alpha) * (b.beta - a.beta) / (b.alpha - a.alpha);
        if query.beta >= required {
            return Ok(Some(format!(
                "time-sharing {} (alpha={}, beta={}) and {} (alpha={}, beta={})",
                a.scheme, a.alpha, a.beta, b.scheme, b.alpha, b.beta
            )));
        }
    }
    Ok(None)
}

/// Answers whether (alpha, beta) is achievable for (N, K).
///
/// Decision order: universal necessities, then the exactly-known regions
/// (N = 1 and N = 2), then the beta = 1 storage threshold, then the
/// settled band at alpha = 1 for (N, K) = (3, 5), then dominance over the
/// known-achievable time-sharing hull; everything else is `Unknown`.
/// Infeasibility tests run before achievability dominance so that a
/// contradiction between them would surface as a bug, not be masked.
pub fn region_membership(query: &RegionQuery) -> Result<RegionVerdict, RegionError> {
    check_params(query.qualified_size, query.receivers)?;
    let n = query.qualified_size;
    let one = int(1);

    if query.alpha < one {
        return Ok(RegionVerdict::infeasible(
            "every receiver must store at least one key symbol per message symbol (alpha >= 1)",
        ));
    }
    if query.beta < one {
        return Ok(RegionVerdict::infeasible(
            "the broadcast must carry the whole message (beta >= 1)",
        ));
    }
    if n == 1 {
        return Ok(RegionVerdict::achievable(
            "a single one-time pad: for N = 1 the region is exactly alpha >= 1, beta >= 1",
        ));
    }
    if n == 2 {
        return Ok(if query.alpha + query.beta >= int(3) {
            RegionVerdict::achievable(
                "for N = 2 the region is exactly alpha + beta >= 3 (with alpha, beta >= 1), \
                 by time-sharing the min-bandwidth (2, 1) and min-storage (1, 2) schemes",
            )
        } else {
            RegionVerdict::infeasible("violates the N = 2 tradeoff alpha + beta >= 3")
        });
    }
    if query.beta == one {
        return Ok(if query.alpha >= int(n as i64) {
            RegionVerdict::achievable(format!(
                "dominates the min-bandwidth corner (alpha={n}, beta=1)"
            ))
        } else {
            RegionVerdict::infeasible(
                "at beta = 1 every scheme needs key storage alpha >= N",
            )
        });
    }
    if (n, query.receivers) == (3, 5) && query.alpha == one {
        if query.beta < Rational::new(5, 2) {
            return Ok(RegionVerdict::infeasible(
                "at alpha = 1 for (N, K) = (3, 5) the bandwidth satisfies beta >= 5/2",
            ));
        }
        if query.beta < Rational::new(29, 10) {
            return Ok(RegionVerdict::unknown(
                "open band for (N, K) = (3, 5) at alpha = 1: \
                 5/2 <= beta < 29/10 is neither achieved nor excluded",
            ));
        }
    }
    if let Some(witness) = hull_dominance(query)? {
        return Ok(RegionVerdict::achievable(witness));
    }
    Ok(RegionVerdict::unknown(
        "between the known bounds and the known schemes; settled only for N <= 2",
    ))
}

/// One row of a region scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanRow {
    pub alpha: Rational,
    pub beta: Rational,
    pub status: RegionStatus,
    pub witness: String,
}

/// An inclusive arithmetic grid of exact rationals.
pub fn rational_grid(
    min: Rational,
    max: Rational,
    step: Rational,
) -> Result<Vec<Rational>, RegionError> {
    if step <= int(0) {
        return Err(RegionError::InvalidQuery(format!(
            "grid step must be positive, got {step}"
        )));
    }
    if max < min {
        return Err(RegionError::InvalidQuery(format!(
            "grid range is empty: {min} > {max}"
        )));
    }
    let mut out = Vec::new();
    let mut v = min;
    while v <= max {
        out.push(v);
        v += step;
    }
    Ok(out)
}

/// Evaluates membership on the alpha x beta grid, rows in row-major order
/// (alpha outer, beta inner).
pub fn scan_region(
    n: usize,
    k: usize,
    alphas: &[Rational],
    betas: &[Rational],
) -> Result<Vec<ScanRow>, RegionError> {
    check_params(n, k)?;
    let mut rows = Vec::with_capacity(alphas.len() * betas.len());
    for &alpha in alphas {
        for &beta in betas {
            let query = RegionQuery::new(n, k, alpha, beta)?;
            let verdict = region_membership(&query)?;
            rows.push(ScanRow {
                alpha,
                beta,
                status: verdict.status,
                witness: verdict.witness,
            });
        }
    }
    Ok(rows)
}

/// Formats an exact rational for CSV: a terminating decimal when the
/// denominator divides a power of ten, `num/den` otherwise.
pub fn rational_label(value: &Rational) -> String {
    let num = *value.numer();
    let den = *value.denom();
    if den == 1 {
        return num.to_string();
    }
    let mut d = den;
    let mut twos = 0u32;
    let mut fives = 0u32;
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{num}/{den}");
    }
    let digits = twos.max(fives);
    let scale = 10i64.pow(digits) / den;
    let scaled = num.unsigned_abs() * scale.unsigned_abs();
    let sign = if num < 0 { "-" } else { "" };
    let ten = 10u64.pow(digits);
    format!(
        "{sign}{}.{:0width$}",
        scaled / ten,
        scaled % ten,
        width = digits as usize
    )
}

/// Renders scan rows as CSV with the fixed header
/// `alpha,beta,status,witness` (witness quoted).
pub fn scan_to_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("alpha,beta,status,witness\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},\"{}\"\n",
            rational_label(&row.alpha),
            rational_label(&row.beta),
            row.status,
            row.witness.replace('"', "\"\"")
        ));
    }
    out
}
