//! End-to-end protocol execution: a transmitter holding the sampled basis,
//! K receivers holding their derived keys, sessions run over chosen
//! qualified sets, and an exhaustive eavesdropper audit.
//!
//! Determinism contract: the random generator is ChaCha20 keyed from the
//! 64-bit seed (`seed_from_u64`), and field symbols are drawn by rejection
//! sampling on full 64-bit words — a word is accepted only below the largest
//! multiple of p, then reduced — so every symbol is exactly uniform and the
//! same (scheme, seed, script) replays to identical transcripts on any
//! platform.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde_json::json;

use crate::entropy::EntropyError;
use crate::field::{FieldElement, PrimeModulus};
use crate::linalg::LinalgError;
use crate::scheme::{BroadcastSignal, KeyMaterial, QualifiedSet, Scheme, SchemeError};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
}

/// Draws one exactly-uniform field symbol by rejection sampling.
fn uniform_symbol(rng: &mut ChaCha20Rng, modulus: PrimeModulus) -> FieldElement {
    let p = modulus.get() as u128;
    // Largest multiple of p representable in 64 bits; words at or above it
    // would bias the residue and are re-drawn.
    let zone = (1u128 << 64) - ((1u128 << 64) % p);
    loop {
        let word = rng.next_u64();
        if (word as u128) < zone {
            return modulus.element(word % modulus.get());
        }
    }
}

fn uniform_symbols(rng: &mut ChaCha20Rng, modulus: PrimeModulus, len: usize) -> Vec<FieldElement> {
    (0..len).map(|_| uniform_symbol(rng, modulus)).collect()
}

/// What one qualified receiver produced from the broadcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub receiver: usize,
    pub decoded: Vec<FieldElement>,
    pub matches: bool,
}

/// What one excluded receiver observed (its own key plus the public
/// broadcast, which is in the entry itself).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EavesdropperView {
    pub receiver: usize,
    pub key: Vec<FieldElement>,
}

/// One executed groupcast.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub qualified: QualifiedSet,
    pub message: Vec<FieldElement>,
    pub broadcast: BroadcastSignal,
    pub decodes: Vec<DecodeOutcome>,
    pub eavesdroppers: Vec<EavesdropperView>,
}

impl TranscriptEntry {
    pub fn all_decodes_match(&self) -> bool {
        self.decodes.iter().all(|d| d.matches)
    }

    /// One-line JSON form (the transcript export format).
    pub fn to_json_line(&self) -> String {
        let ints = |v: &[FieldElement]| v.iter().map(|e| e.value()).collect::<Vec<u64>>();
        json!({
            "qualified": self.qualified.ids(),
            "message": ints(&self.message),
            "broadcast": ints(&self.broadcast.symbols),
            "decodes": self.decodes.iter().map(|d| json!({
                "receiver": d.receiver,
                "decoded": ints(&d.decoded),
                "matches": d.matches,
            })).collect::<Vec<_>>(),
            "eavesdroppers": self.eavesdroppers.iter().map(|v| json!({
                "receiver": v.receiver,
                "key": ints(&v.key),
            })).collect::<Vec<_>>(),
        })
        .to_string()
    }
}

/// A seeded protocol instance: keys dealt once, then any number of
/// groupcast runs appended to the transcript.
#[derive(Debug)]
pub struct Session {
    scheme: Scheme,
    seed: u64,
    material: KeyMaterial,
    rng: ChaCha20Rng,
    transcript: Vec<TranscriptEntry>,
}

/// Deals keys for `scheme` from the seeded generator. The transmitter
/// retains the full basis; each receiver k gets only its own key vector.
pub fn setup(scheme: &Scheme, seed: u64) -> Result<Session, SimError> {
    scheme.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let basis = uniform_symbols(&mut rng, scheme.params.modulus, scheme.basis_count);
    let material = KeyMaterial::derive(scheme, basis)?;
    Ok(Session {
        scheme: scheme.clone(),
        seed,
        material,
        rng,
        transcript: Vec::new(),
    })
}

impl Session {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn material(&self) -> &KeyMaterial {
        &self.material
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    /// Runs one groupcast to `q`: encodes, delivers to every receiver,
    /// records qualified decode results and excluded receivers' views.
    pub fn run(
        &mut self,
        q: &QualifiedSet,
        message: &[FieldElement],
    ) -> Result<&TranscriptEntry, SimError> {
        let broadcast = self.scheme.encode(&self.material, q, message)?;
        let mut decodes = Vec::new();
        let mut eavesdroppers = Vec::new();
        for receiver in 1..=self.scheme.params.receivers {
            let key = self.material.key(receiver)?;
            if q.contains(receiver) {
                let decoded = self.scheme.decode(receiver, key, &broadcast)?;
                let matches = decoded == message;
                decodes.push(DecodeOutcome {
                    receiver,
                    decoded,
                    matches,
                });
            } else {
                eavesdroppers.push(EavesdropperView {
                    receiver,
                    key: key.to_vec(),
                });
            }
        }
        self.transcript.push(TranscriptEntry {
            qualified: q.clone(),
            message: message.to_vec(),
            broadcast,
            decodes,
            eavesdroppers,
        });
        Ok(self.transcript.last().expect("entry just pushed"))
    }

    /// Runs one groupcast with a message drawn from the session generator.
    pub fn run_random(&mut self, q: &QualifiedSet) -> Result<&TranscriptEntry, SimError> {
        let message = uniform_symbols(
            &mut self.rng,
            self.scheme.params.modulus,
            self.scheme.message_len,
        );
        self.run(q, &message)
    }

    /// The transcript as JSON lines, one session entry per line.
    pub fn transcript_json_lines(&self) -> String {
        let mut out = String::new();
        for entry in &self.transcript {
            out.push_str(&entry.to_json_line());
            out.push('\n');
        }
        out
    }

    /// Writes one key file per receiver into `dir` and returns the paths.
    /// Format: a comment header naming the parameters, then the receiver's
    /// key symbols as base-10 integers on one space-separated line.
    pub fn write_key_files(&self, dir: &Path) -> Result<Vec<PathBuf>, SimError> {
        let p = &self.scheme.params;
        let mut paths = Vec::new();
        for receiver in 1..=p.receivers {
            let key = self.material.key(receiver)?;
            let mut body = format!(
                "# key for receiver {receiver} of {}: N={}, K={}, p={}, scheme={}\n",
                p.receivers,
                p.qualified_size,
                p.receivers,
                p.modulus.get(),
                self.scheme.encoder_kind
            );
            let symbols: Vec<String> = key.iter().map(|e| e.value().to_string()).collect();
            let _ = writeln!(body, "{}", symbols.join(" "));
            let path = dir.join(format!("receiver-{receiver}.key"));
            fs::write(&path, body)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

/// The exact conditional view distribution of one (qualified set,
/// eavesdropper) pair, compared across message values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditPair {
    pub qualified: QualifiedSet,
    pub eavesdropper: usize,
    /// True when the count table of (X_Q, Z_e) is identical for every
    /// message value — the zero-leakage criterion.
    pub uniform: bool,
    /// On failure: two message values and the observed view whose counts
    /// differ between them.
    pub witness: Option<LeakageWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakageWitness {
    pub message_a: Vec<u64>,
    pub message_b: Vec<u64>,
    pub view: Vec<u64>,
    pub count_a: u64,
    pub count_b: u64,
}

/// Result of enumerating every (basis, message) outcome and tabulating what
/// each excluded receiver sees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakageAudit {
    pub pairs: Vec<AuditPair>,
    pub passed: bool,
}

/// Exhaustively checks zero leakage: for every qualified set Q and every
/// excluded receiver e, the joint count table of (X_Q, Z_e) must be exactly
/// the same for each of the p^L_W message values. This is a counting
/// restatement of I(W ; X_Q, Z_e) = 0 and needs no entropy arithmetic at
/// all — tables either match or they don't.
pub fn exhaustive_leakage_audit(scheme: &Scheme) -> Result<LeakageAudit, SimError> {
    scheme.validate()?;
    let p = scheme.params.modulus.get();
    let b = scheme.basis_count;
    let m = scheme.message_len;
    let exponent = b + m;
    // Reuse the entropy engine's budget discipline for the refusal path.
    let total = crate::entropy::RandomSystem::from_scheme(scheme)?
        .outcome_count()
        .map_err(SimError::Entropy)?;

    let message_values = p.pow(m as u32);
    let mut pairs = Vec::new();
    for q in scheme.qualified_sets() {
        let (w_coeff, s_coeff) = scheme.encoder_matrices(&q)?;
        for eavesdropper in 1..=scheme.params.receivers {
            if q.contains(eavesdropper) {
                continue;
            }
            let gen = &scheme.key_generators[eavesdropper - 1];
            // view -> per-message-value counts.
            let mut tables: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
            for idx in 0..total {
                let mut digits = vec![0u64; exponent];
                let mut rest = idx;
                for d in digits.iter_mut() {
                    *d = rest % p;
                    rest /= p;
                }
                let (basis_digits, msg_digits) = digits.split_at(b);
                let basis: Vec<FieldElement> = basis_digits
                    .iter()
                    .map(|&v| scheme.params.modulus.element(v))
                    .collect();
                let msg: Vec<FieldElement> = msg_digits
                    .iter()
                    .map(|&v| scheme.params.modulus.element(v))
                    .collect();
                let mut view: Vec<u64> = w_coeff
                    .mul_vec(&msg)?
                    .into_iter()
                    .zip(s_coeff.mul_vec(&basis)?)
                    .map(|(a, b)| (a + b).value())
                    .collect();
                view.extend(gen.mul_vec(&basis)?.into_iter().map(|e| e.value()));
                let w_index: usize = msg_digits
                    .iter()
                    .rev()
                    .fold(0usize, |acc, &d| acc * p as usize + d as usize);
                tables
                    .entry(view)
                    .or_insert_with(|| vec![0; message_values as usize])[w_index] += 1;
            }
            let mut witness = None;
            'scan: for (view, counts) in &tables {
                for w in 1..counts.len() {
                    if counts[w] != counts[0] {
                        witness = Some(LeakageWitness {
                            message_a: decode_digits(0, p, m),
                            message_b: decode_digits(w as u64, p, m),
                            view: view.clone(),
                            count_a: counts[0],
                            count_b: counts[w],
                        });
                        break 'scan;
                    }
                }
            }
            pairs.push(AuditPair {
                qualified: q.clone(),
                eavesdropper,
                uniform: witness.is_none(),
                witness,
            });
        }
    }
    let passed = pairs.iter().all(|p| p.uniform);
    Ok(LeakageAudit { pairs, passed })
}

/// The base-p digits of `index`, least significant first (the message
/// value layout used by the audit's count tables).
fn decode_digits(mut index: u64, p: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for d in out.iter_mut() {
        *d = index % p;
        index /= p;
    }
    out
}
