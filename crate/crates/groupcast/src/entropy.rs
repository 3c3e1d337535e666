//! Exhaustive-enumeration entropy engine.
//!
//! A [`RandomSystem`] is a collection of named random variables defined over
//! a space of independent uniform GF(p) symbols: `basis_count` key-basis
//! symbols plus `message_len` message symbols. Entropies are computed by
//! enumerating *every* outcome of that space and counting — no sampling, no
//! estimation — so a zero is a proof, not an observation.
//!
//! Entropies are measured in p-ary units (log base p). For linear variables
//! every outcome count is a power of p and the entropy is an exact rational;
//! the floating-point fallback only engages for nonlinear variables and
//! carries an explicit error bound.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::field::{FieldElement, PrimeModulus};
use crate::linalg::FieldMatrix;
use crate::scheme::{QualifiedSet, Scheme, SchemeError};
use crate::Rational;

/// Hard ceiling on `p^(basis_count + message_len)` for exhaustive
/// enumeration; larger systems are refused rather than silently sampled.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EntropyError {
    /// The outcome space is too large to enumerate. The required size is
    /// reported symbolically (`p^exponent`) because it can dwarf u64 range.
    #[error(
        "exhaustive enumeration needs {p}^{exponent} outcomes, which exceeds the budget of {budget}"
    )]
    BudgetExceeded { p: u64, exponent: usize, budget: u64 },
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("variable '{0}' is already defined")]
    DuplicateVariable(String),
    #[error("variable '{name}' has inconsistent shape: {detail}")]
    BadVariable { name: String, detail: String },
}

/// How a variable derives from the underlying uniform symbols.
#[derive(Clone)]
pub enum VariableDef {
    /// `value = basis_coeff * s + msg_coeff * W`, one output symbol per row.
    Affine {
        basis_coeff: FieldMatrix,
        msg_coeff: FieldMatrix,
    },
    /// Arbitrary deterministic function of `(s, W)`, producing `len`
    /// symbols. Exists so tests can feed the engine nonlinear variables.
    Map {
        len: usize,
        eval: Arc<dyn Fn(&[FieldElement], &[FieldElement]) -> Vec<FieldElement> + Send + Sync>,
    },
}

impl VariableDef {
    fn len(&self) -> usize {
        match self {
            VariableDef::Affine { basis_coeff, .. } => basis_coeff.rows(),
            VariableDef::Map { len, .. } => *len,
        }
    }
}

/// A named family of random variables over one uniform symbol space.
pub struct RandomSystem {
    modulus: PrimeModulus,
    basis_count: usize,
    message_len: usize,
    budget: u64,
    variables: Vec<(String, VariableDef)>,
}

impl fmt::Debug for RandomSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RandomSystem")
            .field("modulus", &self.modulus)
            .field("basis_count", &self.basis_count)
            .field("message_len", &self.message_len)
            .field("budget", &self.budget)
            .field(
                "variables",
                &self.variables.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Canonical variable names used by [`RandomSystem::from_scheme`].
pub fn message_var() -> String {
    "W".to_string()
}

pub fn basis_var(i: usize) -> String {
    format!("s{i}")
}

pub fn key_var(receiver: usize) -> String {
    format!("Z{receiver}")
}

pub fn signal_var(q: &QualifiedSet) -> String {
    format!("X{q}")
}

impl RandomSystem {
    /// An empty system over `basis_count + message_len` uniform symbols.
    pub fn new(modulus: PrimeModulus, basis_count: usize, message_len: usize) -> Self {
        RandomSystem {
            modulus,
            basis_count,
            message_len,
            budget: DEFAULT_ENUMERATION_BUDGET,
            variables: Vec::new(),
        }
    }

    /// Replaces the enumeration budget (outcome-count ceiling).
    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// The standard system of a scheme: message `W`, basis symbols
    /// `s1..sB`, keys `Z1..ZK` from the stored generators, and broadcast
    /// signals `X{..}` from the encoder tables of every qualified set.
    pub fn from_scheme(scheme: &Scheme) -> Result<Self, SchemeError> {
        let p = scheme.params.modulus;
        let b = scheme.basis_count;
        let m = scheme.message_len;
        let mut sys = RandomSystem::new(p, b, m);
        let add = |sys: &mut RandomSystem, name: String, bc: FieldMatrix, mc: FieldMatrix| {
            sys.add_affine(name, bc, mc)
                .expect("scheme variables are well-formed");
        };
        add(
            &mut sys,
            message_var(),
            FieldMatrix::zero(p, m, b),
            FieldMatrix::identity(p, m),
        );
        for i in 1..=b {
            let mut bc = FieldMatrix::zero(p, 1, b);
            bc.set(0, i - 1, p.one());
            add(&mut sys, basis_var(i), bc, FieldMatrix::zero(p, 1, m));
        }
        for r in 1..=scheme.params.receivers {
            let g = scheme.key_generators[r - 1].clone();
            let rows = g.rows();
            add(&mut sys, key_var(r), g, FieldMatrix::zero(p, rows, m));
        }
        for q in scheme.qualified_sets() {
            let (w_coeff, s_coeff) = scheme.encoder_matrices(&q)?;
            add(&mut sys, signal_var(&q), s_coeff, w_coeff);
        }
        Ok(sys)
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    /// Size of the outcome space (p^(basis_count + message_len)), or the
    /// budget-refusal error that any enumeration would hit.
    pub fn outcome_count(&self) -> Result<u64, EntropyError> {
        enumeration_size(
            self.modulus.get(),
            self.basis_count + self.message_len,
            self.budget,
        )
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Defines `name = basis_coeff * s + msg_coeff * W`.
    pub fn add_affine(
        &mut self,
        name: String,
        basis_coeff: FieldMatrix,
        msg_coeff: FieldMatrix,
    ) -> Result<(), EntropyError> {
        if self.lookup(&name).is_ok() {
            return Err(EntropyError::DuplicateVariable(name));
        }
        if basis_coeff.cols() != self.basis_count
            || msg_coeff.cols() != self.message_len
            || basis_coeff.rows() != msg_coeff.rows()
        {
            return Err(EntropyError::BadVariable {
                detail: format!(
                    "coefficients are {}x{} and {}x{}, system has {} basis and {} message symbols",
                    basis_coeff.rows(),
                    basis_coeff.cols(),
                    msg_coeff.rows(),
                    msg_coeff.cols(),
                    self.basis_count,
                    self.message_len
                ),
                name,
            });
        }
        self.variables
            .push((name, VariableDef::Affine { basis_coeff, msg_coeff }));
        Ok(())
    }

    /// Defines `name` as an arbitrary deterministic function of `(s, W)`
    /// producing `len` symbols.
    pub fn add_map(
        &mut self,
        name: String,
        len: usize,
        eval: impl Fn(&[FieldElement], &[FieldElement]) -> Vec<FieldElement> + Send + Sync + 'static,
    ) -> Result<(), EntropyError> {
        if self.lookup(&name).is_ok() {
            return Err(EntropyError::DuplicateVariable(name));
        }
        self.variables.push((
            name,
            VariableDef::Map {
                len,
                eval: Arc::new(eval),
            },
        ));
        Ok(())
    }

    fn lookup(&self, name: &str) -> Result<&VariableDef, EntropyError> {
        self.variables
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .ok_or_else(|| EntropyError::UnknownVariable(name.to_string()))
    }

    /// The exact joint distribution of the named variables, by enumerating
    /// all `p^(basis_count + message_len)` outcomes.
    pub fn distribution(&self, vars: &[&str]) -> Result<DistributionTable, EntropyError> {
        let defs: Vec<&VariableDef> = vars
            .iter()
            .map(|name| self.lookup(name))
            .collect::<Result<_, _>>()?;
        let p = self.modulus.get();
        let exponent = self.basis_count + self.message_len;
        let total = enumeration_size(p, exponent, self.budget)?;
        let tuple_len: usize = defs.iter().map(|d| d.len()).sum();

        // Strip the affine definitions down to raw coefficient grids so the
        // inner loop runs on plain u64s.
        enum RawEval<'a> {
            Affine(Vec<(Vec<u64>, Vec<u64>)>), // per row: (basis coeffs, msg coeffs)
            Map(
                usize,
                &'a Arc<dyn Fn(&[FieldElement], &[FieldElement]) -> Vec<FieldElement> + Send + Sync>,
            ),
        }
        let evals: Vec<RawEval> = defs
            .iter()
            .map(|def| match def {
                VariableDef::Affine { basis_coeff, msg_coeff } => RawEval::Affine(
                    (0..basis_coeff.rows())
                        .map(|i| (basis_coeff.row_values(i), msg_coeff.row_values(i)))
                        .collect(),
                ),
                VariableDef::Map { len, eval } => RawEval::Map(*len, eval),
            })
            .collect();

        let b = self.basis_count;
        let modulus = self.modulus;
        let counts = (0..total)
            .into_par_iter()
            .fold(HashMap::new, |mut map: HashMap<Vec<u64>, u64>, idx| {
                let mut digits = vec![0u64; exponent];
                let mut rest = idx;
                for d in digits.iter_mut() {
                    *d = rest % p;
                    rest /= p;
                }
                let (basis, msg) = digits.split_at(b);
                let mut tuple = Vec::with_capacity(tuple_len);
                for eval in &evals {
                    match eval {
                        RawEval::Affine(rows) => {
                            for (bc, mc) in rows {
                                let mut acc = 0u64;
                                for (c, v) in bc.iter().zip(basis) {
                                    acc = (acc + c * v) % p;
                                }
                                for (c, v) in mc.iter().zip(msg) {
                                    acc = (acc + c * v) % p;
                                }
                                tuple.push(acc);
                            }
                        }
                        RawEval::Map(len, f) => {
                            let basis_e: Vec<FieldElement> =
                                basis.iter().map(|&v| modulus.element(v)).collect();
                            let msg_e: Vec<FieldElement> =
                                msg.iter().map(|&v| modulus.element(v)).collect();
                            let out = f(&basis_e, &msg_e);
                            debug_assert_eq!(out.len(), *len);
                            tuple.extend(out.into_iter().map(FieldElement::value));
                        }
                    }
                }
                *map.entry(tuple).or_insert(0) += 1;
                map
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });

        Ok(DistributionTable {
            counts,
            total,
            exponent,
        })
    }

    /// Joint entropy `H(vars)` in p-ary units.
    pub fn entropy(&self, vars: &[&str]) -> Result<Entropy, EntropyError> {
        Ok(self.distribution(vars)?.entropy(self.modulus))
    }

    /// Conditional entropy `H(vars | given)`.
    pub fn conditional_entropy(
        &self,
        vars: &[&str],
        given: &[&str],
    ) -> Result<Entropy, EntropyError> {
        let joint = self.entropy(&union(vars, given))?;
        let cond = self.entropy(given)?;
        Ok(joint.sub(&cond))
    }

    /// Conditional mutual information `I(a ; b | given)` (pass `&[]` as
    /// `given` for plain mutual information).
    pub fn mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        given: &[&str],
    ) -> Result<Entropy, EntropyError> {
        let h_ac = self.entropy(&union(a, given))?;
        let h_bc = self.entropy(&union(b, given))?;
        let h_abc = self.entropy(&union(&union(a, given), b))?;
        let h_c = self.entropy(given)?;
        Ok(h_ac.add(&h_bc).sub(&h_abc).sub(&h_c))
    }
}

fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::with_capacity(a.len() + b.len());
    for &name in a.iter().chain(b) {
        if !out.contains(&name) {
            out.push(name);
        }
    }
    out
}

/// Refuses enumeration sizes `p^exponent` beyond `budget`, reporting the
/// size symbolically (it may not fit in any machine integer).
fn enumeration_size(p: u64, exponent: usize, budget: u64) -> Result<u64, EntropyError> {
    let mut total = 1u64;
    for _ in 0..exponent {
        total = total
            .checked_mul(p)
            .filter(|&t| t <= budget)
            .ok_or(EntropyError::BudgetExceeded { p, exponent, budget })?;
    }
    Ok(total)
}

/// Outcome counts of a joint distribution over a `p^exponent`-element space.
#[derive(Debug, Clone)]
pub struct DistributionTable {
    /// Occurrence count of each observed value tuple.
    pub counts: HashMap<Vec<u64>, u64>,
    /// Total outcomes enumerated (= p^exponent).
    pub total: u64,
    /// Number of uniform symbols enumerated.
    pub exponent: usize,
}

impl DistributionTable {
    /// Shannon entropy in p-ary units: exact when every count is a power of
    /// p (always true for linear variables), floating-point otherwise.
    pub fn entropy(&self, modulus: PrimeModulus) -> Entropy {
        let p = modulus.get();
        let n = self.exponent as i64;
        let mut numerator: i64 = 0;
        let mut exact = true;
        for &count in self.counts.values() {
            match p_power_exponent(count, p) {
                Some(j) => numerator += count as i64 * (n - j as i64),
                None => {
                    exact = false;
                    break;
                }
            }
        }
        if exact {
            return Entropy::Exact(Rational::new(numerator, self.total as i64));
        }
        // Group identical counts so the float sum has few distinct terms.
        let mut groups: HashMap<u64, u64> = HashMap::new();
        for &count in self.counts.values() {
            *groups.entry(count).or_insert(0) += 1;
        }
        let total = self.total as f64;
        let log_p = (p as f64).ln();
        let mut value = 0.0;
        for (&count, &multiplicity) in &groups {
            let prob = count as f64 / total;
            value -= multiplicity as f64 * prob * (prob.ln() / log_p);
        }
        let error_bound = (groups.len() as f64 + 4.0) * f64::EPSILON * value.abs().max(1.0);
        Entropy::Approx { value, error_bound }
    }
}

/// If `count == p^j`, returns `j`.
fn p_power_exponent(mut count: u64, p: u64) -> Option<u32> {
    let mut j = 0;
    while count % p == 0 {
        count /= p;
        j += 1;
    }
    (count == 1).then_some(j)
}

/// An entropy value in p-ary units: exact rational where possible, bounded
/// floating point otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entropy {
    Exact(Rational),
    Approx { value: f64, error_bound: f64 },
}

impl Entropy {
    pub fn exact(&self) -> Option<Rational> {
        match self {
            Entropy::Exact(v) => Some(*v),
            Entropy::Approx { .. } => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Entropy::Exact(v) => *v.numer() as f64 / *v.denom() as f64,
            Entropy::Approx { value, .. } => *value,
        }
    }

    /// Converts p-ary units to bits (for human-facing output only).
    pub fn to_bits(&self, modulus: PrimeModulus) -> f64 {
        self.to_f64() * (modulus.get() as f64).log2()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Entropy::Exact(v) => *v == Rational::from_integer(0),
            Entropy::Approx { value, error_bound } => value.abs() <= *error_bound,
        }
    }

    fn add(&self, other: &Entropy) -> Entropy {
        self.combine(other, 1)
    }

    fn sub(&self, other: &Entropy) -> Entropy {
        self.combine(other, -1)
    }

    fn combine(&self, other: &Entropy, sign: i64) -> Entropy {
        match (self, other) {
            (Entropy::Exact(a), Entropy::Exact(b)) => {
                Entropy::Exact(a + b * Rational::from_integer(sign))
            }
            _ => Entropy::Approx {
                value: self.to_f64() + sign as f64 * other.to_f64(),
                error_bound: self.error_bound() + other.error_bound() + f64::EPSILON,
            },
        }
    }

    fn error_bound(&self) -> f64 {
        match self {
            Entropy::Exact(_) => 0.0,
            Entropy::Approx { error_bound, .. } => *error_bound,
        }
    }
}

impl fmt::Display for Entropy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entropy::Exact(v) => write!(f, "{v}"),
            Entropy::Approx { value, .. } => write!(f, "~{value}"),
        }
    }
}
