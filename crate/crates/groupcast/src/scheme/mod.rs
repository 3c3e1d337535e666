//! Key-assignment schemes: who stores which key symbols, and what the
//! transmitter broadcasts so exactly the chosen receivers can decode.
//!
//! A [`Scheme`] fixes, for parameters (N, K, p):
//! - a basis of independent uniform key symbols `s_1..s_B`,
//! - per-receiver key generators `Z_k = G_k * s`,
//! - an encoder mapping (message `W`, basis `s`, qualified set `Q`) to the
//!   broadcast `X_Q`,
//! - per-receiver decoders recovering `W` from `(X_Q, Z_k)` for `k ∈ Q`.
//!
//! The encoder never reads the stored generator matrices: its coefficients
//! are reconstructed from the scheme kind and auxiliary data. Keys, on the
//! other hand, are always derived from the stored generators. This split is
//! deliberate — if a stored generator is corrupted, encoder and key material
//! disagree and verification catches it, rather than both drifting together.

mod build;
mod json;

pub use build::{
    combinatorial, independent_keys, min_bandwidth, min_storage, n2k4_joint, n3k5, symmetrize,
};
pub(crate) use build::binomial;
pub use json::SchemeDocument;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::field::{FieldElement, PrimeModulus};
use crate::linalg::{
    combinations, elementary_symmetric_all, FieldMatrix, LinalgError,
};
use crate::Rational;

/// Errors from scheme construction, encoding, and decoding.
#[derive(Debug, thiserror::Error)]
pub enum SchemeError {
    #[error("invalid parameters: need 1 <= N <= K-1, got N={n}, K={k}")]
    InvalidParams { n: usize, k: usize },
    #[error("{scheme} scheme needs a field with p >= {needed}, got p = {modulus}")]
    FieldTooSmall {
        scheme: &'static str,
        needed: u64,
        modulus: u64,
    },
    #[error("{scheme} scheme is specific to N={n}, K={k}")]
    FixedParams {
        scheme: &'static str,
        n: usize,
        k: usize,
    },
    #[error("qualified set {got} has {size} receivers, scheme expects {expected}")]
    WrongQualifiedSize {
        got: QualifiedSet,
        size: usize,
        expected: usize,
    },
    #[error("receiver {receiver} is outside 1..={k}")]
    UnknownReceiver { receiver: usize, k: usize },
    #[error("receiver ids must be distinct and >= 1")]
    BadReceiverSet,
    #[error("receiver {receiver} is not in the qualified set {qualified} and cannot decode")]
    NotQualified {
        receiver: usize,
        qualified: QualifiedSet,
    },
    #[error("signal has {got} symbols, expected {expected}")]
    SignalLength { expected: usize, got: usize },
    #[error("message has {got} symbols, expected {expected}")]
    MessageLength { expected: usize, got: usize },
    #[error("key basis has {got} symbols, expected {expected}")]
    BasisLength { expected: usize, got: usize },
    #[error("key has {got} symbols, expected {expected}")]
    KeyLength { expected: usize, got: usize },
    #[error("scheme too large to materialize: {what}")]
    TooLarge { what: String },
    #[error("malformed scheme document: {0}")]
    Document(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Field(#[from] crate::field::FieldError),
}

/// Groupcast parameters: K receivers, any N of them may be selected as the
/// qualified group, all arithmetic over GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Size N of every qualified set.
    #[serde(rename = "n")]
    pub qualified_size: usize,
    /// Total number K of receivers.
    #[serde(rename = "k")]
    pub receivers: usize,
    /// Prime field modulus p.
    #[serde(rename = "p")]
    pub modulus: PrimeModulus,
}

impl SchemeParams {
    pub fn new(
        qualified_size: usize,
        receivers: usize,
        modulus: PrimeModulus,
    ) -> Result<Self, SchemeError> {
        if qualified_size < 1 || qualified_size + 1 > receivers {
            return Err(SchemeError::InvalidParams {
                n: qualified_size,
                k: receivers,
            });
        }
        Ok(SchemeParams {
            qualified_size,
            receivers,
            modulus,
        })
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} K={} p={}",
            self.qualified_size, self.receivers, self.modulus
        )
    }
}

/// A set of receiver ids (1-based), kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct QualifiedSet(Vec<usize>);

impl QualifiedSet {
    pub fn new(ids: impl IntoIterator<Item = usize>) -> Result<Self, SchemeError> {
        let mut ids: Vec<usize> = ids.into_iter().collect();
        ids.sort_unstable();
        if ids.is_empty() || ids[0] == 0 || ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SchemeError::BadReceiverSet);
        }
        Ok(QualifiedSet(ids))
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, receiver: usize) -> bool {
        self.0.binary_search(&receiver).is_ok()
    }

    /// Position of `receiver` within the sorted set, if present.
    pub fn position(&self, receiver: usize) -> Option<usize> {
        self.0.binary_search(&receiver).ok()
    }

    /// The set obtained by relabeling every member through `map` (1-based:
    /// receiver `r` becomes `map[r-1]`), re-sorted.
    fn relabel(&self, map: &[usize]) -> QualifiedSet {
        let mut ids: Vec<usize> = self.0.iter().map(|&r| map[r - 1]).collect();
        ids.sort_unstable();
        QualifiedSet(ids)
    }
}

impl fmt::Display for QualifiedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

impl FromStr for QualifiedSet {
    type Err = SchemeError;

    /// Parses a comma-separated list of 1-based receiver ids, e.g. `1,3,5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ids = s
            .split(',')
            .map(|part| part.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| SchemeError::BadReceiverSet)?;
        QualifiedSet::new(ids)
    }
}

impl<'de> Deserialize<'de> for QualifiedSet {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let ids = Vec::<usize>::deserialize(deserializer)?;
        QualifiedSet::new(ids).map_err(serde::de::Error::custom)
    }
}

/// The scheme families this crate can build and run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderKind {
    /// One broadcast symbol per message symbol; each receiver stores N
    /// symbols combined on the fly per qualified set.
    #[serde(rename = "min-bandwidth")]
    MinBandwidth,
    /// One key symbol per receiver (rows of an MDS matrix); the message is
    /// precoded into the null space of the excluded receivers' rows.
    #[serde(rename = "min-storage-null-space")]
    MinStorageNullSpace,
    /// One key symbol per receiver; the masked message is repeated once per
    /// qualified receiver.
    #[serde(rename = "min-storage-repeat")]
    MinStorageRepeat,
    /// Fully independent one-time pads, one per receiver.
    #[serde(rename = "independent-keys")]
    IndependentKeys,
    /// One shared pad per possible qualified set.
    #[serde(rename = "combinatorial-shared")]
    CombinatorialShared,
    /// Hand-crafted N=3, K=5 scheme with unit storage and average bandwidth
    /// 29/10, below what uniform-length schemes can reach.
    #[serde(rename = "n3k5")]
    N3K5,
    /// Hand-crafted N=2, K=4 scheme encoding two message symbols jointly
    /// with cross-correlated keys.
    #[serde(rename = "n2k4-joint")]
    N2K4Joint,
    /// Permutation-expanded wrapper equalizing per-set bandwidth.
    #[serde(rename = "symmetrized")]
    Symmetrized,
}

impl EncoderKind {
    pub fn name(self) -> &'static str {
        match self {
            EncoderKind::MinBandwidth => "min-bandwidth",
            EncoderKind::MinStorageNullSpace => "min-storage-null-space",
            EncoderKind::MinStorageRepeat => "min-storage-repeat",
            EncoderKind::IndependentKeys => "independent-keys",
            EncoderKind::CombinatorialShared => "combinatorial-shared",
            EncoderKind::N3K5 => "n3k5",
            EncoderKind::N2K4Joint => "n2k4-joint",
            EncoderKind::Symmetrized => "symmetrized",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Kind-specific construction data the encoder rebuilds its coefficients
/// from. Exactly the fields relevant to the kind are populated.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SchemeAux {
    /// Distinct evaluation points `v_1..v_K` (min-bandwidth).
    pub eval_points: Option<Vec<FieldElement>>,
    /// The K x c MDS matrix whose rows are the receivers' key coefficients
    /// (min-storage variants).
    pub mds_rows: Option<FieldMatrix>,
    /// The wrapped scheme (symmetrized).
    pub inner: Option<Box<Scheme>>,
}

/// A fully materialized key-assignment scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Scheme {
    pub params: SchemeParams,
    pub encoder_kind: EncoderKind,
    /// Number B of independent uniform key-basis symbols.
    pub basis_count: usize,
    /// Number of message symbols L_W carried per groupcast.
    pub message_len: usize,
    /// Worst-case broadcast length L_X over all qualified sets.
    pub broadcast_len: usize,
    /// `key_generators[k-1]` is G_k; receiver k stores `Z_k = G_k * s`.
    pub key_generators: Vec<FieldMatrix>,
    pub aux: SchemeAux,
}

/// The sampled secret state of one scheme instance: the basis draw and the
/// per-receiver keys derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub basis: Vec<FieldElement>,
    /// `keys[k-1]` is receiver k's key vector.
    pub keys: Vec<Vec<FieldElement>>,
}

impl KeyMaterial {
    /// Derives every receiver's key from a basis draw via the scheme's
    /// stored generators.
    pub fn derive(scheme: &Scheme, basis: Vec<FieldElement>) -> Result<Self, SchemeError> {
        if basis.len() != scheme.basis_count {
            return Err(SchemeError::BasisLength {
                expected: scheme.basis_count,
                got: basis.len(),
            });
        }
        let keys = scheme
            .key_generators
            .iter()
            .map(|g| g.mul_vec(&basis))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(KeyMaterial { basis, keys })
    }

    pub fn key(&self, receiver: usize) -> Result<&[FieldElement], SchemeError> {
        self.keys
            .get(receiver.checked_sub(1).ok_or(SchemeError::UnknownReceiver {
                receiver,
                k: self.keys.len(),
            })?)
            .map(Vec::as_slice)
            .ok_or(SchemeError::UnknownReceiver {
                receiver,
                k: self.keys.len(),
            })
    }
}

/// One broadcast: the qualified set it addresses and the transmitted symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BroadcastSignal {
    pub qualified: QualifiedSet,
    pub symbols: Vec<FieldElement>,
}

impl Scheme {
    /// Key symbols stored per receiver (uniform across receivers).
    pub fn key_len(&self) -> usize {
        self.key_generators.first().map_or(0, FieldMatrix::rows)
    }

    /// Key storage per message symbol: alpha = L_Z / L_W.
    pub fn storage_per_message(&self) -> Rational {
        Rational::new(self.key_len() as i64, self.message_len as i64)
    }

    /// Worst-case bandwidth per message symbol: beta = max_Q L_X(Q) / L_W.
    pub fn bandwidth_worst(&self) -> Rational {
        Rational::new(self.broadcast_len as i64, self.message_len as i64)
    }

    /// Average bandwidth per message symbol over all qualified sets.
    pub fn bandwidth_average(&self) -> Rational {
        let sets = self.qualified_sets();
        let total: usize = sets.iter().map(|q| self.signal_len(q)).sum();
        Rational::new(total as i64, (sets.len() * self.message_len) as i64)
    }

    /// How many qualified sets need each broadcast length.
    pub fn bandwidth_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for q in self.qualified_sets() {
            *hist.entry(self.signal_len(&q)).or_insert(0) += 1;
        }
        hist
    }

    /// Every N-subset of receivers, in lexicographic order.
    pub fn qualified_sets(&self) -> Vec<QualifiedSet> {
        let ids: Vec<usize> = (1..=self.params.receivers).collect();
        combinations(&ids, self.params.qualified_size)
            .into_iter()
            .map(QualifiedSet)
            .collect()
    }

    /// All generator matrices of the given receivers stacked vertically.
    pub fn stacked_generators(&self, receivers: &[usize]) -> Result<FieldMatrix, SchemeError> {
        let mut acc = FieldMatrix::zero(self.params.modulus, 0, self.basis_count);
        for &r in receivers {
            let g = self
                .key_generators
                .get(r.checked_sub(1).ok_or(SchemeError::UnknownReceiver {
                    receiver: r,
                    k: self.params.receivers,
                })?)
                .ok_or(SchemeError::UnknownReceiver {
                    receiver: r,
                    k: self.params.receivers,
                })?;
            acc = acc.vstack(g)?;
        }
        Ok(acc)
    }

    fn check_qualified(&self, q: &QualifiedSet) -> Result<(), SchemeError> {
        if q.len() != self.params.qualified_size {
            return Err(SchemeError::WrongQualifiedSize {
                got: q.clone(),
                size: q.len(),
                expected: self.params.qualified_size,
            });
        }
        let last = *q.ids().last().expect("qualified sets are non-empty");
        if last > self.params.receivers {
            return Err(SchemeError::UnknownReceiver {
                receiver: last,
                k: self.params.receivers,
            });
        }
        Ok(())
    }

    /// Broadcast length for one qualified set.
    pub fn signal_len(&self, q: &QualifiedSet) -> usize {
        match self.encoder_kind {
            EncoderKind::MinBandwidth | EncoderKind::CombinatorialShared => self.message_len,
            EncoderKind::MinStorageNullSpace => self.basis_count,
            EncoderKind::MinStorageRepeat | EncoderKind::IndependentKeys => {
                self.params.qualified_size
            }
            EncoderKind::N3K5 => {
                if q.ids() == [1, 2, 5] {
                    2
                } else {
                    3
                }
            }
            EncoderKind::N2K4Joint => 4,
            EncoderKind::Symmetrized => {
                let inner = self.aux.inner.as_deref().expect("symmetrized scheme has inner");
                permutations_of(self.params.receivers)
                    .iter()
                    .map(|perm| inner.signal_len(&q.relabel(perm)))
                    .sum()
            }
        }
    }

    /// The linear maps defining the broadcast for `q`: a pair
    /// `(w_coeff, s_coeff)` with `X_Q = w_coeff * W + s_coeff * s`.
    ///
    /// Rebuilt from the scheme kind and aux data on every call; the stored
    /// key generators are deliberately not consulted.
    pub fn encoder_matrices(
        &self,
        q: &QualifiedSet,
    ) -> Result<(FieldMatrix, FieldMatrix), SchemeError> {
        self.check_qualified(q)?;
        let p = self.params.modulus;
        let n = self.params.qualified_size;
        match self.encoder_kind {
            EncoderKind::MinBandwidth => {
                let points = self.eval_points()?;
                let qpoints: Vec<FieldElement> =
                    q.ids().iter().map(|&r| points[r - 1]).collect();
                // X = W + sum_j e_j(points of Q) s_j.
                let coeffs = elementary_symmetric_all(&qpoints, p);
                let w = FieldMatrix::identity(p, 1);
                let s = FieldMatrix::from_rows(p, vec![coeffs])?;
                Ok((w, s))
            }
            EncoderKind::MinStorageNullSpace => {
                let precoder = self.null_space_precoder(q)?;
                let w = FieldMatrix::new(p, self.basis_count, 1, precoder)?;
                let s = FieldMatrix::identity(p, self.basis_count);
                Ok((w, s))
            }
            EncoderKind::MinStorageRepeat => {
                let v = self.mds_rows()?;
                let rows: Vec<usize> = q.ids().iter().map(|&r| r - 1).collect();
                let w = FieldMatrix::from_u64(p, n, 1, &vec![1; n])?;
                Ok((w, v.select_rows(&rows)))
            }
            EncoderKind::IndependentKeys => {
                let w = FieldMatrix::from_u64(p, n, 1, &vec![1; n])?;
                let mut s = FieldMatrix::zero(p, n, self.basis_count);
                for (j, &r) in q.ids().iter().enumerate() {
                    s.set(j, r - 1, p.one());
                }
                Ok((w, s))
            }
            EncoderKind::CombinatorialShared => {
                let idx = self
                    .qualified_sets()
                    .iter()
                    .position(|t| t == q)
                    .expect("checked qualified set is enumerated");
                let w = FieldMatrix::identity(p, 1);
                let mut s = FieldMatrix::zero(p, 1, self.basis_count);
                s.set(0, idx, p.one());
                Ok((w, s))
            }
            EncoderKind::N3K5 => {
                let (w_rows, s_rows) = n3k5_signal_table(q.ids());
                let w = FieldMatrix::from_i64(p, w_rows.len(), 1, &w_rows)?;
                let s = FieldMatrix::from_i64(
                    p,
                    s_rows.len(),
                    4,
                    &s_rows.concat(),
                )?;
                Ok((w, s))
            }
            EncoderKind::N2K4Joint => {
                let (w_rows, s_rows) = n2k4_signal_table(q.ids());
                let w = FieldMatrix::from_i64(p, 4, 2, &w_rows.concat())?;
                let s = FieldMatrix::from_i64(p, 4, 5, &s_rows.concat())?;
                Ok((w, s))
            }
            EncoderKind::Symmetrized => {
                let inner = self.aux.inner.as_deref().expect("symmetrized scheme has inner");
                let perms = permutations_of(self.params.receivers);
                let rows = self.signal_len(q);
                let mut w = FieldMatrix::zero(p, rows, self.message_len);
                let mut s = FieldMatrix::zero(p, rows, self.basis_count);
                let mut row_off = 0;
                for (t, perm) in perms.iter().enumerate() {
                    let inner_q = q.relabel(perm);
                    let (wi, si) = inner.encoder_matrices(&inner_q)?;
                    for i in 0..wi.rows() {
                        for j in 0..wi.cols() {
                            w.set(row_off + i, t * inner.message_len + j, wi.get(i, j));
                        }
                        for j in 0..si.cols() {
                            s.set(row_off + i, t * inner.basis_count + j, si.get(i, j));
                        }
                    }
                    row_off += wi.rows();
                }
                Ok((w, s))
            }
        }
    }

    /// Encodes one groupcast: `X_Q = w_coeff * W + s_coeff * s`.
    pub fn encode(
        &self,
        material: &KeyMaterial,
        q: &QualifiedSet,
        message: &[FieldElement],
    ) -> Result<BroadcastSignal, SchemeError> {
        if message.len() != self.message_len {
            return Err(SchemeError::MessageLength {
                expected: self.message_len,
                got: message.len(),
            });
        }
        if material.basis.len() != self.basis_count {
            return Err(SchemeError::BasisLength {
                expected: self.basis_count,
                got: material.basis.len(),
            });
        }
        let (w_coeff, s_coeff) = self.encoder_matrices(q)?;
        let from_w = w_coeff.mul_vec(message)?;
        let from_s = s_coeff.mul_vec(&material.basis)?;
        let symbols = from_w
            .into_iter()
            .zip(from_s)
            .map(|(a, b)| a + b)
            .collect();
        Ok(BroadcastSignal {
            qualified: q.clone(),
            symbols,
        })
    }

    /// Decodes the message as receiver `receiver`, using only that
    /// receiver's key and the public broadcast.
    ///
    /// Refuses (rather than mis-decodes) when the receiver is not in the
    /// signal's qualified set or the signal length is wrong.
    pub fn decode(
        &self,
        receiver: usize,
        key: &[FieldElement],
        signal: &BroadcastSignal,
    ) -> Result<Vec<FieldElement>, SchemeError> {
        let q = &signal.qualified;
        self.check_qualified(q)?;
        if receiver == 0 || receiver > self.params.receivers {
            return Err(SchemeError::UnknownReceiver {
                receiver,
                k: self.params.receivers,
            });
        }
        if !q.contains(receiver) {
            return Err(SchemeError::NotQualified {
                receiver,
                qualified: q.clone(),
            });
        }
        let expected = self.signal_len(q);
        if signal.symbols.len() != expected {
            return Err(SchemeError::SignalLength {
                expected,
                got: signal.symbols.len(),
            });
        }
        if key.len() != self.key_len() {
            return Err(SchemeError::KeyLength {
                expected: self.key_len(),
                got: key.len(),
            });
        }
        let x = &signal.symbols;
        let p = self.params.modulus;
        match self.encoder_kind {
            EncoderKind::MinBandwidth => {
                // Combine own key rows with the elementary symmetric
                // coefficients of the other qualified receivers' points.
                let points = self.eval_points()?;
                let others: Vec<FieldElement> = q
                    .ids()
                    .iter()
                    .filter(|&&r| r != receiver)
                    .map(|&r| points[r - 1])
                    .collect();
                let coeffs = elementary_symmetric_all(&others, p);
                let mut pad = p.zero();
                for (i, &c) in coeffs.iter().enumerate() {
                    pad += c * key[i];
                }
                Ok(vec![x[0] - pad])
            }
            EncoderKind::MinStorageNullSpace => {
                let v = self.mds_rows()?;
                let row = v.row(receiver - 1);
                let precoder = self.null_space_precoder(q)?;
                let gain: FieldElement = dot(row, &precoder, p);
                let combined = dot(row, x, p);
                Ok(vec![(combined - key[0]) * gain.inverse()?])
            }
            EncoderKind::MinStorageRepeat | EncoderKind::IndependentKeys => {
                let j = q.position(receiver).expect("receiver is qualified");
                Ok(vec![x[j] - key[0]])
            }
            EncoderKind::CombinatorialShared => {
                let subsets = receiver_subsets(
                    self.params.receivers,
                    self.params.qualified_size,
                    receiver,
                );
                let j = subsets
                    .iter()
                    .position(|t| t.ids() == q.ids())
                    .expect("receiver is qualified");
                Ok(vec![x[0] - key[j]])
            }
            EncoderKind::N3K5 => {
                let w = n3k5_decode(q.ids(), receiver, key[0], x, p)?;
                Ok(vec![w])
            }
            EncoderKind::N2K4Joint => Ok(n2k4_decode(q.ids(), receiver, key, x)),
            EncoderKind::Symmetrized => {
                let inner = self.aux.inner.as_deref().expect("symmetrized scheme has inner");
                let perms = permutations_of(self.params.receivers);
                let mut message = Vec::with_capacity(self.message_len);
                let mut off = 0;
                for perm in &perms {
                    let inner_q = q.relabel(perm);
                    let len = inner.signal_len(&inner_q);
                    let slice = BroadcastSignal {
                        qualified: inner_q,
                        symbols: x[off..off + len].to_vec(),
                    };
                    let t = message.len() / inner.message_len;
                    let key_slice = &key[t * inner.key_len()..(t + 1) * inner.key_len()];
                    message.extend(inner.decode(perm[receiver - 1], key_slice, &slice)?);
                    off += len;
                }
                Ok(message)
            }
        }
    }

    /// Structural well-formedness: generator shapes, kind-specific
    /// parameters, and aux data all consistent. Run on every deserialized
    /// scheme before it is trusted.
    pub fn validate(&self) -> Result<(), SchemeError> {
        let params = SchemeParams::new(
            self.params.qualified_size,
            self.params.receivers,
            self.params.modulus,
        )?;
        debug_assert_eq!(params, self.params);
        if self.key_generators.len() != self.params.receivers {
            return Err(SchemeError::Document(format!(
                "expected {} key generators, found {}",
                self.params.receivers,
                self.key_generators.len()
            )));
        }
        let key_len = self.key_len();
        for (i, g) in self.key_generators.iter().enumerate() {
            if g.cols() != self.basis_count || g.rows() != key_len {
                return Err(SchemeError::Document(format!(
                    "generator {} has shape {}x{}, expected {}x{}",
                    i + 1,
                    g.rows(),
                    g.cols(),
                    key_len,
                    self.basis_count
                )));
            }
            if g.modulus() != self.params.modulus {
                return Err(SchemeError::Document(format!(
                    "generator {} is over GF({}), scheme is over GF({})",
                    i + 1,
                    g.modulus(),
                    self.params.modulus
                )));
            }
        }
        if self.message_len == 0 || self.basis_count == 0 {
            return Err(SchemeError::Document(
                "message_len and basis_count must be positive".into(),
            ));
        }
        match self.encoder_kind {
            EncoderKind::MinBandwidth => {
                let points = self.eval_points()?;
                if points.len() != self.params.receivers {
                    return Err(SchemeError::Document(
                        "eval_points must list one point per receiver".into(),
                    ));
                }
                for (i, a) in points.iter().enumerate() {
                    if points[..i].contains(a) {
                        return Err(SchemeError::Document(
                            "eval_points must be distinct".into(),
                        ));
                    }
                }
            }
            EncoderKind::MinStorageNullSpace | EncoderKind::MinStorageRepeat => {
                let v = self.mds_rows()?;
                if v.rows() != self.params.receivers || v.cols() != self.basis_count {
                    return Err(SchemeError::Document(
                        "mds_rows must be K x basis_count".into(),
                    ));
                }
            }
            EncoderKind::N3K5 => {
                if (self.params.qualified_size, self.params.receivers) != (3, 5) {
                    return Err(SchemeError::FixedParams {
                        scheme: "n3k5",
                        n: 3,
                        k: 5,
                    });
                }
                // Receiver 5's decoder divides by 2, so GF(2) is out.
                if self.params.modulus.get() < 3 {
                    return Err(SchemeError::FieldTooSmall {
                        scheme: "n3k5",
                        needed: 3,
                        modulus: self.params.modulus.get(),
                    });
                }
            }
            EncoderKind::N2K4Joint => {
                if (self.params.qualified_size, self.params.receivers) != (2, 4) {
                    return Err(SchemeError::FixedParams {
                        scheme: "n2k4-joint",
                        n: 2,
                        k: 4,
                    });
                }
            }
            EncoderKind::Symmetrized => {
                let inner = self.aux.inner.as_deref().ok_or_else(|| {
                    SchemeError::Document("symmetrized scheme is missing its inner scheme".into())
                })?;
                inner.validate()?;
                let perms = factorial(self.params.receivers).ok_or_else(|| {
                    SchemeError::TooLarge {
                        what: format!("{}! permutation copies", self.params.receivers),
                    }
                })?;
                if inner.params != self.params
                    || self.basis_count != perms * inner.basis_count
                    || self.message_len != perms * inner.message_len
                {
                    return Err(SchemeError::Document(
                        "symmetrized dimensions do not match inner scheme".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn eval_points(&self) -> Result<&[FieldElement], SchemeError> {
        self.aux
            .eval_points
            .as_deref()
            .ok_or_else(|| SchemeError::Document("scheme is missing eval_points".into()))
    }

    fn mds_rows(&self) -> Result<&FieldMatrix, SchemeError> {
        self.aux
            .mds_rows
            .as_ref()
            .ok_or_else(|| SchemeError::Document("scheme is missing mds_rows".into()))
    }

    /// The message precoder for the null-space construction: the (unique up
    /// to scale) vector orthogonal to the excluded receivers' key rows.
    fn null_space_precoder(&self, q: &QualifiedSet) -> Result<Vec<FieldElement>, SchemeError> {
        let v = self.mds_rows()?;
        let excluded: Vec<usize> = (1..=self.params.receivers)
            .filter(|r| !q.contains(*r))
            .map(|r| r - 1)
            .collect();
        let ns = v.select_rows(&excluded).right_null_space();
        debug_assert_eq!(ns.cols(), 1, "MDS rows leave a one-dimensional null space");
        Ok((0..ns.rows()).map(|i| ns.get(i, 0)).collect())
    }
}

fn dot(a: &[FieldElement], b: &[FieldElement], p: PrimeModulus) -> FieldElement {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = p.zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// All permutations of `1..=k` in lexicographic order. `perm[r-1]` is the
/// role receiver `r` plays in that copy of the inner scheme.
pub(crate) fn permutations_of(k: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (1..=k).permutations(k).collect()
}

pub(crate) fn factorial(k: usize) -> Option<usize> {
    (1..=k).try_fold(1usize, |acc, v| acc.checked_mul(v))
}

/// Lexicographically ordered N-subsets of `1..=k` containing `receiver` —
/// the order of that receiver's key rows in the combinatorial scheme.
pub(crate) fn receiver_subsets(k: usize, n: usize, receiver: usize) -> Vec<QualifiedSet> {
    let ids: Vec<usize> = (1..=k).collect();
    combinations(&ids, n)
        .into_iter()
        .filter(|t| t.contains(&receiver))
        .map(QualifiedSet)
        .collect()
}

/// Broadcast coefficient table for the N=3, K=5 scheme. Returns per-row
/// message coefficients and key-basis coefficient rows (over s_1..s_4;
/// receiver 5's key is s_1 + s_2).
fn n3k5_signal_table(ids: &[usize]) -> (Vec<i64>, Vec<[i64; 4]>) {
    let e = |r: usize| -> [i64; 4] {
        let mut row = [0; 4];
        row[r - 1] = 1;
        row
    };
    match ids {
        [1, 2, 5] => (vec![1, 1], vec![e(1), e(2)]),
        [1, 2, i] => (vec![1, -1, 1], vec![e(1), e(2), e(*i)]),
        [a, 3, 4] | [3, 4, a] => {
            let first = if *a == 5 { [1, 1, 0, 0] } else { e(*a) };
            (vec![1, 1, 1], vec![first, e(3), e(4)])
        }
        [1, i, 5] => (vec![1, 0, 1], vec![e(1), e(2), e(*i)]),
        [2, i, 5] => (vec![0, 1, 1], vec![e(1), e(2), e(*i)]),
        _ => unreachable!("all 3-subsets of 1..=5 are covered"),
    }
}

fn n3k5_decode(
    ids: &[usize],
    receiver: usize,
    key: FieldElement,
    x: &[FieldElement],
    p: PrimeModulus,
) -> Result<FieldElement, SchemeError> {
    let w = match ids {
        [1, 2, 5] => match receiver {
            1 => x[0] - key,
            2 => x[1] - key,
            // X_1 + X_2 = 2W + s_1 + s_2 and receiver 5 holds s_1 + s_2.
            _ => (x[0] + x[1] - key) * p.element(2).inverse()?,
        },
        [1, 2, _] => match receiver {
            1 => x[0] - key,
            2 => key - x[1],
            _ => x[2] - key,
        },
        [_, 3, 4] | [3, 4, _] => match receiver {
            3 => x[1] - key,
            4 => x[2] - key,
            _ => x[0] - key,
        },
        [1, _, 5] => match receiver {
            1 => x[0] - key,
            5 => x[0] + x[1] - key,
            _ => x[2] - key,
        },
        [2, _, 5] => match receiver {
            2 => x[1] - key,
            5 => x[0] + x[1] - key,
            _ => x[2] - key,
        },
        _ => unreachable!("all 3-subsets of 1..=5 are covered"),
    };
    Ok(w)
}

/// Broadcast coefficient table for the N=2, K=4 joint scheme: four rows of
/// (message coefficients over W_1, W_2; basis coefficients over s_1..s_5).
#[rustfmt::skip]
fn n2k4_signal_table(ids: &[usize]) -> (Vec<[i64; 2]>, Vec<[i64; 5]>) {
    match ids {
        [1, 2] => (
            vec![[1, 0], [0, 1], [-1, 0], [0, -1]],
            vec![
                [1, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [0, 0, 1, 0, 0],
                [0, 0, 0, 1, 0],
            ],
        ),
        [1, 3] => (
            vec![[1, 0], [0, 1], [-1, -1], [1, 0]],
            vec![
                [1, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [0, 0, 0, 0, 1],
                [1, 0, 1, 0, 0],
            ],
        ),
        [1, 4] => (
            vec![[1, 0], [0, 1], [0, 1], [1, 1]],
            vec![
                [1, 0, 0, 0, 0],
                [0, 1, 0, 0, 0],
                [0, 1, 0, 1, 0],
                [1, 1, 0, 0, 1],
            ],
        ),
        [2, 3] => (
            vec![[1, 0], [0, 1], [0, 1], [1, 0]],
            vec![
                [0, 0, 1, 0, 0],
                [0, 0, 0, 1, 0],
                [0, 0, 0, 0, 1],
                [1, 0, 1, 0, 0],
            ],
        ),
        [2, 4] => (
            vec![[1, 0], [0, 1], [0, 1], [-1, 0]],
            vec![
                [0, 0, 1, 0, 0],
                [0, 0, 0, 1, 0],
                [0, 1, 0, 1, 0],
                [1, 1, 0, 0, 1],
            ],
        ),
        [3, 4] => (
            vec![[1, 0], [0, 1], [0, -1], [1, 0]],
            vec![
                [0, 0, 0, 0, 1],
                [1, 0, 1, 0, 0],
                [0, 1, 0, 1, 0],
                [1, 1, 0, 0, 1],
            ],
        ),
        _ => unreachable!("all 2-subsets of 1..=4 are covered"),
    }
}

fn n2k4_decode(
    ids: &[usize],
    receiver: usize,
    key: &[FieldElement],
    x: &[FieldElement],
) -> Vec<FieldElement> {
    if receiver == ids[0] {
        // The first two rows are W_1 and W_2 masked by the first qualified
        // receiver's two key symbols in order.
        return vec![x[0] - key[0], x[1] - key[1]];
    }
    let (w1, w2) = match ids {
        [1, 2] => (key[0] - x[2], key[1] - x[3]),
        [1, 3] => {
            let w1 = x[3] - key[1];
            (w1, key[0] - x[2] - w1)
        }
        [1, 4] => {
            let w2 = x[2] - key[0];
            (x[3] - w2 - key[1], w2)
        }
        [2, 3] => (x[3] - key[1], x[2] - key[0]),
        [2, 4] => (key[1] - x[3], x[2] - key[0]),
        [3, 4] => (x[3] - key[1], key[0] - x[2]),
        _ => unreachable!("all 2-subsets of 1..=4 are covered"),
    };
    vec![w1, w2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeModulus;

    fn gf(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    #[test]
    fn params_validation() {
        let p = gf(5);
        assert!(SchemeParams::new(2, 4, p).is_ok());
        assert!(matches!(
            SchemeParams::new(0, 4, p),
            Err(SchemeError::InvalidParams { .. })
        ));
        assert!(matches!(
            SchemeParams::new(4, 4, p),
            Err(SchemeError::InvalidParams { .. })
        ));
    }

    #[test]
    fn qualified_set_basics() {
        let q = QualifiedSet::new([5, 1, 3]).unwrap();
        assert_eq!(q.ids(), &[1, 3, 5]);
        assert_eq!(q.to_string(), "{1,3,5}");
        assert_eq!("5, 1,3".parse::<QualifiedSet>().unwrap(), q);
        assert!(matches!(
            QualifiedSet::new([1, 1, 2]),
            Err(SchemeError::BadReceiverSet)
        ));
        assert!(matches!(
            QualifiedSet::new([0, 2]),
            Err(SchemeError::BadReceiverSet)
        ));
        assert!(QualifiedSet::new([]).is_err());
    }

    #[test]
    fn qualified_set_serde() {
        let q = QualifiedSet::new([2, 4]).unwrap();
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(json, "[2,4]");
        let back: QualifiedSet = serde_json::from_str("[4,2]").unwrap();
        assert_eq!(back, q);
        assert!(serde_json::from_str::<QualifiedSet>("[2,2]").is_err());
    }

    #[test]
    fn encoder_kind_names_round_trip() {
        for kind in [
            EncoderKind::MinBandwidth,
            EncoderKind::MinStorageNullSpace,
            EncoderKind::MinStorageRepeat,
            EncoderKind::IndependentKeys,
            EncoderKind::CombinatorialShared,
            EncoderKind::N3K5,
            EncoderKind::N2K4Joint,
            EncoderKind::Symmetrized,
        ] {
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
            let back: EncoderKind = serde_json::from_str(&json).unwrap();
            assert_eq!(back, kind);
        }
    }

    #[test]
    fn receiver_subset_order() {
        let subsets = receiver_subsets(4, 2, 2);
        let ids: Vec<&[usize]> = subsets.iter().map(|q| q.ids()).collect();
        assert_eq!(ids, vec![&[1, 2][..], &[2, 3], &[2, 4]]);
    }

    // Scheme-level encode/decode behavior is exercised in `build` tests,
    // where concrete constructions pin down the exact tables.
}
