//! Constructors for the scheme families.
//!
//! Each builder materializes the key generators and auxiliary encoder data
//! for one family and returns a validated [`Scheme`]. Builders are total
//! functions of their parameters — no randomness — so the same parameters
//! always produce byte-identical schemes.

use crate::field::{FieldElement, PrimeModulus};
use crate::linalg::{vandermonde, FieldMatrix};

use super::{
    factorial, permutations_of, EncoderKind, Scheme, SchemeAux, SchemeError, SchemeParams,
};

/// Minimum-bandwidth scheme: one broadcast symbol per message symbol, every
/// receiver stores N key symbols.
///
/// Receiver k's generator is the N x (N+1) band matrix with rows
/// `[0.., 1, v_k, ..0]` over distinct evaluation points `v_k = k`; the
/// broadcast masks W with the elementary symmetric combination of the
/// qualified receivers' points. Achieves (alpha, beta) = (N, 1). Requires
/// p >= K for the points to stay distinct.
pub fn min_bandwidth(params: SchemeParams) -> Result<Scheme, SchemeError> {
    let (n, k, p) = unpack(params);
    if (p.get() as usize) < k {
        return Err(SchemeError::FieldTooSmall {
            scheme: "min-bandwidth",
            needed: k as u64,
            modulus: p.get(),
        });
    }
    let points: Vec<FieldElement> = (1..=k as u64).map(|v| p.element(v)).collect();
    let mut generators = Vec::with_capacity(k);
    for &v in &points {
        let mut g = FieldMatrix::zero(p, n, n + 1);
        for i in 0..n {
            g.set(i, i, p.one());
            g.set(i, i + 1, v);
        }
        generators.push(g);
    }
    finish(Scheme {
        params,
        encoder_kind: EncoderKind::MinBandwidth,
        basis_count: n + 1,
        message_len: 1,
        broadcast_len: 1,
        key_generators: generators,
        aux: SchemeAux {
            eval_points: Some(points),
            ..SchemeAux::default()
        },
    })
}

/// Minimum-storage scheme: every receiver stores a single key symbol, the
/// row of an MDS matrix applied to the basis.
///
/// With c = K - N + 1 key-basis symbols, two regimes:
/// - c <= N: broadcast `v_W * W + s` where `v_W` spans the null space of the
///   excluded receivers' rows (c symbols);
/// - c > N: broadcast `W + Z_q` once per qualified receiver (N symbols).
///
/// Achieves (alpha, beta) = (1, min(N, K - N + 1)). The c = 2 case uses the
/// extended MDS matrix `[e_1; e_2; (1,1); (1,2); ...]`, which only needs
/// p >= K - 1; all other cases need p >= K.
pub fn min_storage(params: SchemeParams) -> Result<Scheme, SchemeError> {
    let (n, k, p) = unpack(params);
    let c = k - n + 1;
    if c <= n {
        let rows = mds_key_matrix(k, c, p)?;
        let generators = (0..k).map(|r| rows.select_rows(&[r])).collect();
        finish(Scheme {
            params,
            encoder_kind: EncoderKind::MinStorageNullSpace,
            basis_count: c,
            message_len: 1,
            broadcast_len: c,
            key_generators: generators,
            aux: SchemeAux {
                mds_rows: Some(rows),
                ..SchemeAux::default()
            },
        })
    } else {
        // Broadcasting the masked message per receiver needs N + 1 basis
        // symbols so that any N + 1 keys remain independent.
        if (p.get() as usize) < k {
            return Err(SchemeError::FieldTooSmall {
                scheme: "min-storage",
                needed: k as u64,
                modulus: p.get(),
            });
        }
        let rows = vandermonde(k, n + 1, p)?;
        let generators = (0..k).map(|r| rows.select_rows(&[r])).collect();
        finish(Scheme {
            params,
            encoder_kind: EncoderKind::MinStorageRepeat,
            basis_count: n + 1,
            message_len: 1,
            broadcast_len: n,
            key_generators: generators,
            aux: SchemeAux {
                mds_rows: Some(rows),
                ..SchemeAux::default()
            },
        })
    }
}

/// A K x c matrix every c rows of which are invertible.
///
/// For c = 2 the rows are `e_1, e_2, (1,1), (1,2), ..., (1,K-2)`: any two are
/// independent as long as the second coordinates of the `(1,j)` rows are
/// distinct and nonzero, which holds for p >= K - 1. For c >= 3 a
/// Vandermonde matrix over points 1..K is used (p >= K).
fn mds_key_matrix(
    k: usize,
    c: usize,
    p: PrimeModulus,
) -> Result<FieldMatrix, SchemeError> {
    let rows = if c == 2 {
        if (p.get() as usize) + 1 < k {
            return Err(SchemeError::FieldTooSmall {
                scheme: "min-storage",
                needed: k as u64 - 1,
                modulus: p.get(),
            });
        }
        let mut rows = vec![vec![p.one(), p.zero()], vec![p.zero(), p.one()]];
        for j in 1..=k as u64 - 2 {
            rows.push(vec![p.one(), p.element(j)]);
        }
        FieldMatrix::from_rows(p, rows)?
    } else {
        if (p.get() as usize) < k {
            return Err(SchemeError::FieldTooSmall {
                scheme: "min-storage",
                needed: k as u64,
                modulus: p.get(),
            });
        }
        vandermonde(k, c, p)?
    };
    debug_assert!(rows.is_mds().unwrap_or(false));
    Ok(rows)
}

/// Baseline: one fresh pad per receiver, broadcast the masked message once
/// per qualified receiver. (alpha, beta) = (1, N).
pub fn independent_keys(params: SchemeParams) -> Result<Scheme, SchemeError> {
    let (_, k, p) = unpack(params);
    let generators = (0..k)
        .map(|r| {
            let mut g = FieldMatrix::zero(p, 1, k);
            g.set(0, r, p.one());
            g
        })
        .collect();
    finish(Scheme {
        params,
        encoder_kind: EncoderKind::IndependentKeys,
        basis_count: k,
        message_len: 1,
        broadcast_len: params.qualified_size,
        key_generators: generators,
        aux: SchemeAux::default(),
    })
}

/// Baseline: one shared pad per possible qualified set; every receiver
/// stores the pads of all sets containing it.
/// (alpha, beta) = (C(K-1, N-1), 1).
pub fn combinatorial(params: SchemeParams) -> Result<Scheme, SchemeError> {
    let (n, k, p) = unpack(params);
    let basis = binomial(k, n).ok_or_else(|| SchemeError::TooLarge {
        what: format!("C({k},{n}) shared pads"),
    })?;
    let sets = crate::linalg::combinations(&(1..=k).collect::<Vec<_>>(), n);
    let mut generators = Vec::with_capacity(k);
    for r in 1..=k {
        let owned: Vec<usize> = sets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&r))
            .map(|(i, _)| i)
            .collect();
        let mut g = FieldMatrix::zero(p, owned.len(), basis);
        for (row, &i) in owned.iter().enumerate() {
            g.set(row, i, p.one());
        }
        generators.push(g);
    }
    finish(Scheme {
        params,
        encoder_kind: EncoderKind::CombinatorialShared,
        basis_count: basis,
        message_len: 1,
        broadcast_len: 1,
        key_generators: generators,
        aux: SchemeAux::default(),
    })
}

/// The hand-crafted N=3, K=5 scheme: keys `s_1..s_4` for receivers 1..4 and
/// `s_1 + s_2` for receiver 5, with per-set broadcasts of length 2 or 3.
/// Unit storage, worst-case bandwidth 3, average bandwidth 29/10.
pub fn n3k5(modulus: PrimeModulus) -> Result<Scheme, SchemeError> {
    if modulus.get() < 3 {
        return Err(SchemeError::FieldTooSmall {
            scheme: "n3k5",
            needed: 3,
            modulus: modulus.get(),
        });
    }
    let params = SchemeParams::new(3, 5, modulus)?;
    let mut generators: Vec<FieldMatrix> = (0..4)
        .map(|r| {
            let mut g = FieldMatrix::zero(modulus, 1, 4);
            g.set(0, r, modulus.one());
            g
        })
        .collect();
    generators.push(FieldMatrix::from_u64(modulus, 1, 4, &[1, 1, 0, 0])?);
    finish(Scheme {
        params,
        encoder_kind: EncoderKind::N3K5,
        basis_count: 4,
        message_len: 1,
        broadcast_len: 3,
        key_generators: generators,
        aux: SchemeAux::default(),
    })
}

/// The hand-crafted N=2, K=4 scheme carrying two message symbols per
/// groupcast with cross-correlated two-symbol keys. (alpha, beta) = (1, 2)
/// with joint key entropy 5/2 per message symbol — no per-symbol scheme
/// reaches that. Works over any prime field.
pub fn n2k4_joint(modulus: PrimeModulus) -> Result<Scheme, SchemeError> {
    let params = SchemeParams::new(2, 4, modulus)?;
    let generators = vec![
        FieldMatrix::from_u64(modulus, 2, 5, &[1, 0, 0, 0, 0, 0, 1, 0, 0, 0])?,
        FieldMatrix::from_u64(modulus, 2, 5, &[0, 0, 1, 0, 0, 0, 0, 0, 1, 0])?,
        FieldMatrix::from_u64(modulus, 2, 5, &[0, 0, 0, 0, 1, 1, 0, 1, 0, 0])?,
        FieldMatrix::from_u64(modulus, 2, 5, &[0, 1, 0, 1, 0, 1, 1, 0, 0, 1])?,
    ];
    finish(Scheme {
        params,
        encoder_kind: EncoderKind::N2K4Joint,
        basis_count: 5,
        message_len: 2,
        broadcast_len: 4,
        key_generators: generators,
        aux: SchemeAux::default(),
    })
}

/// Equalizes per-set bandwidth by running one copy of `inner` per
/// permutation of the receiver labels, with independent basis and message
/// blocks per copy.
///
/// If `inner` already broadcasts the same length for every qualified set,
/// it is returned unchanged. Otherwise storage and average bandwidth per
/// message symbol are preserved while the worst case drops to the average.
pub fn symmetrize(inner: &Scheme) -> Result<Scheme, SchemeError> {
    let sets = inner.qualified_sets();
    let lens: Vec<usize> = sets.iter().map(|q| inner.signal_len(q)).collect();
    if lens.windows(2).all(|w| w[0] == w[1]) {
        return Ok(inner.clone());
    }
    let k = inner.params.receivers;
    let copies = factorial(k).ok_or_else(|| SchemeError::TooLarge {
        what: format!("{k}! permutation copies"),
    })?;
    let basis_count = copies
        .checked_mul(inner.basis_count)
        .ok_or_else(|| SchemeError::TooLarge {
            what: format!("{copies} x {} basis symbols", inner.basis_count),
        })?;
    let message_len = copies * inner.message_len;
    let key_len = copies * inner.key_len();
    let perms = permutations_of(k);
    let p = inner.params.modulus;

    // Copy t of receiver r's generator is the inner generator of the role
    // perm[r-1], placed on the t-th diagonal block.
    let mut generators = Vec::with_capacity(k);
    for r in 1..=k {
        let mut g = FieldMatrix::zero(p, key_len, basis_count);
        for (t, perm) in perms.iter().enumerate() {
            let block = &inner.key_generators[perm[r - 1] - 1];
            for i in 0..block.rows() {
                for j in 0..block.cols() {
                    g.set(
                        t * inner.key_len() + i,
                        t * inner.basis_count + j,
                        block.get(i, j),
                    );
                }
            }
        }
        generators.push(g);
    }

    let mut scheme = Scheme {
        params: inner.params,
        encoder_kind: EncoderKind::Symmetrized,
        basis_count,
        message_len,
        broadcast_len: 0,
        key_generators: generators,
        aux: SchemeAux {
            inner: Some(Box::new(inner.clone())),
            ..SchemeAux::default()
        },
    };
    scheme.broadcast_len = scheme
        .qualified_sets()
        .iter()
        .map(|q| scheme.signal_len(q))
        .max()
        .expect("at least one qualified set");
    finish(scheme)
}

fn unpack(params: SchemeParams) -> (usize, usize, PrimeModulus) {
    (params.qualified_size, params.receivers, params.modulus)
}

fn finish(scheme: Scheme) -> Result<Scheme, SchemeError> {
    scheme.validate()?;
    Ok(scheme)
}

pub(crate) fn binomial(k: usize, n: usize) -> Option<usize> {
    if n > k {
        return Some(0);
    }
    let n = n.min(k - n);
    let mut acc = 1usize;
    for i in 0..n {
        acc = acc.checked_mul(k - i)?;
        acc /= i + 1; // exact: prefix products of binomials divide evenly
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeModulus;
    use crate::scheme::{KeyMaterial, QualifiedSet};
    use crate::Rational;

    fn gf(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    fn params(n: usize, k: usize, p: u64) -> SchemeParams {
        SchemeParams::new(n, k, gf(p)).unwrap()
    }

    fn elems(p: PrimeModulus, vals: &[u64]) -> Vec<crate::field::FieldElement> {
        vals.iter().map(|&v| p.element(v)).collect()
    }

    /// Exhaustive decode check: every basis draw, every message, every
    /// qualified set, every qualified receiver.
    fn assert_universal_correctness(scheme: &Scheme) {
        let p = scheme.params.modulus;
        let b = scheme.basis_count;
        let m = scheme.message_len;
        let total_basis = p.get().pow(b as u32);
        let total_msg = p.get().pow(m as u32);
        for basis_idx in 0..total_basis {
            let basis = elems(p, &digits(basis_idx, p.get(), b));
            let material = KeyMaterial::derive(scheme, basis).unwrap();
            for msg_idx in 0..total_msg {
                let message = elems(p, &digits(msg_idx, p.get(), m));
                for q in scheme.qualified_sets() {
                    let signal = scheme.encode(&material, &q, &message).unwrap();
                    assert_eq!(signal.symbols.len(), scheme.signal_len(&q));
                    for &r in q.ids() {
                        let decoded = scheme
                            .decode(r, material.key(r).unwrap(), &signal)
                            .unwrap();
                        assert_eq!(decoded, message, "receiver {r} in {q}");
                    }
                }
            }
        }
    }

    fn digits(mut idx: u64, p: u64, len: usize) -> Vec<u64> {
        let mut out = vec![0; len];
        for slot in out.iter_mut() {
            *slot = idx % p;
            idx /= p;
        }
        out
    }

    #[test]
    fn min_bandwidth_generators_match_band_structure() {
        let s = min_bandwidth(params(2, 4, 5)).unwrap();
        assert_eq!(s.key_generators[0].values(), vec![1, 1, 0, 0, 1, 1]);
        assert_eq!(s.key_generators[1].values(), vec![1, 2, 0, 0, 1, 2]);
        assert_eq!(s.key_generators[3].values(), vec![1, 4, 0, 0, 1, 4]);
        assert_eq!(s.storage_per_message(), Rational::from_integer(2));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(1));
    }

    #[test]
    fn min_bandwidth_one_time_pad_degenerate_case() {
        let s = min_bandwidth(params(1, 2, 2)).unwrap();
        assert_eq!(s.key_generators[0].values(), vec![1, 1]);
        assert_eq!(s.key_generators[1].values(), vec![1, 0]); // point 2 mod 2
        assert_universal_correctness(&s);
    }

    #[test]
    fn min_bandwidth_mask_coefficients() {
        // For Q = {1,2} over GF(5) the mask is s_1 + 3 s_2 + 2 s_3
        // (elementary symmetric polynomials of points 1 and 2).
        let s = min_bandwidth(params(2, 4, 5)).unwrap();
        let q = QualifiedSet::new([1, 2]).unwrap();
        let (w, sc) = s.encoder_matrices(&q).unwrap();
        assert_eq!(w.values(), vec![1]);
        assert_eq!(sc.values(), vec![1, 3, 2]);

        // Broadcast for s = (1,1,1), W = 0 is 1 + 3 + 2 = 6 = 1 mod 5.
        let material = KeyMaterial::derive(&s, elems(gf(5), &[1, 1, 1])).unwrap();
        let signal = s.encode(&material, &q, &elems(gf(5), &[0])).unwrap();
        assert_eq!(signal.symbols[0].value(), 1);
    }

    #[test]
    fn min_bandwidth_decoder_combination_matches_mask() {
        // Each qualified receiver's decode coefficients, applied to its own
        // generator rows, must reproduce the broadcast mask row exactly.
        for k in 2..=6usize {
            let p = gf(crate::field::smallest_prime_at_least(k as u64));
            for n in 1..k {
                let s = min_bandwidth(SchemeParams::new(n, k, p).unwrap()).unwrap();
                let points = s.aux.eval_points.clone().unwrap();
                for q in s.qualified_sets() {
                    let (_, mask) = s.encoder_matrices(&q).unwrap();
                    for &r in q.ids() {
                        let others: Vec<_> = q
                            .ids()
                            .iter()
                            .filter(|&&o| o != r)
                            .map(|&o| points[o - 1])
                            .collect();
                        let coeffs =
                            crate::linalg::elementary_symmetric_all(&others, p);
                        let g = &s.key_generators[r - 1];
                        let mut combo = vec![p.zero(); n + 1];
                        for (i, &c) in coeffs.iter().enumerate() {
                            for j in 0..n + 1 {
                                let term = c * g.get(i, j);
                                combo[j] += term;
                            }
                        }
                        assert_eq!(combo.as_slice(), mask.row(0), "K={k} N={n} Q={q} r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn min_bandwidth_needs_k_points() {
        assert!(matches!(
            min_bandwidth(params(2, 4, 3)),
            Err(SchemeError::FieldTooSmall { needed: 4, .. })
        ));
    }

    #[test]
    fn min_storage_pair_scheme_key_table() {
        // N=2, K=3: keys s_1, s_2, s_1 + s_2.
        let s = min_storage(params(2, 3, 3)).unwrap();
        assert_eq!(s.encoder_kind, EncoderKind::MinStorageNullSpace);
        assert_eq!(s.key_generators[0].values(), vec![1, 0]);
        assert_eq!(s.key_generators[1].values(), vec![0, 1]);
        assert_eq!(s.key_generators[2].values(), vec![1, 1]);
        let basis = elems(gf(3), &[2, 1]);
        let material = KeyMaterial::derive(&s, basis).unwrap();
        assert_eq!(material.keys[2][0].value(), 0); // 2 + 1 mod 3
        assert_universal_correctness(&s);
    }

    #[test]
    fn min_storage_three_of_four_over_gf3() {
        // N=3, K=4 over GF(3): keys s_1, s_2, s_1+s_2, s_1+2s_2; for
        // Q = {1,2,3} the excluded row (1,2) forces precoder (1,1).
        let s = min_storage(params(3, 4, 3)).unwrap();
        assert_eq!(s.encoder_kind, EncoderKind::MinStorageNullSpace);
        assert_eq!(s.key_generators[2].values(), vec![1, 1]);
        assert_eq!(s.key_generators[3].values(), vec![1, 2]);
        let q = QualifiedSet::new([1, 2, 3]).unwrap();
        let (w, sc) = s.encoder_matrices(&q).unwrap();
        assert_eq!(w.values(), vec![1, 1]);
        assert_eq!(sc.values(), vec![1, 0, 0, 1]);
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(2));
        assert_universal_correctness(&s);
    }

    #[test]
    fn min_storage_repeat_regime() {
        // N=2, K=5: K-N+1 = 4 > N, so the masked message is repeated.
        let s = min_storage(params(2, 5, 5)).unwrap();
        assert_eq!(s.encoder_kind, EncoderKind::MinStorageRepeat);
        assert_eq!(s.basis_count, 3);
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(2));
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        let q = QualifiedSet::new([2, 4]).unwrap();
        let (w, sc) = s.encoder_matrices(&q).unwrap();
        assert_eq!(w.values(), vec![1, 1]);
        assert_eq!(sc.row_values(0), vec![1, 2, 4]);
        assert_eq!(sc.row_values(1), vec![1, 4, 1]);
        assert_universal_correctness(&s);
    }

    #[test]
    fn min_storage_field_requirements() {
        // c = 2 tolerates p = K - 1; larger c does not.
        assert!(min_storage(params(2, 3, 2)).is_ok());
        assert!(min_storage(params(3, 4, 3)).is_ok());
        assert!(matches!(
            min_storage(params(3, 5, 3)), // c = 3, needs p >= 5
            Err(SchemeError::FieldTooSmall { needed: 5, .. })
        ));
        assert!(matches!(
            min_storage(params(2, 5, 3)), // repeat regime, needs p >= 5
            Err(SchemeError::FieldTooSmall { needed: 5, .. })
        ));
    }

    #[test]
    fn independent_keys_baseline() {
        let s = independent_keys(params(2, 4, 5)).unwrap();
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(2));
        assert_universal_correctness(&s);
    }

    #[test]
    fn combinatorial_baseline() {
        let s = combinatorial(params(2, 4, 5)).unwrap();
        assert_eq!(s.basis_count, 6);
        assert_eq!(s.storage_per_message(), Rational::from_integer(3));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(1));
        // Receiver 1 owns the pads of {1,2}, {1,3}, {1,4} — the first three
        // subsets in lexicographic order.
        assert_eq!(
            s.key_generators[0].values(),
            vec![1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0]
        );
        assert_universal_correctness(&s);
    }

    #[test]
    fn combinatorial_single_receiver_groups() {
        let s = combinatorial(params(1, 3, 3)).unwrap();
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(1));
        assert_universal_correctness(&s);
    }

    #[test]
    fn n3k5_key_table_and_signal_lengths() {
        let s = n3k5(gf(3)).unwrap();
        assert_eq!(s.key_generators[4].values(), vec![1, 1, 0, 0]);
        let hist = s.bandwidth_histogram();
        assert_eq!(hist.get(&2), Some(&1));
        assert_eq!(hist.get(&3), Some(&9));
        assert_eq!(s.bandwidth_average(), Rational::new(29, 10));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(3));
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        assert_universal_correctness(&s);
    }

    #[test]
    fn n3k5_signal_tables_pinned() {
        let s = n3k5(gf(5)).unwrap();
        let check = |ids: &[usize], want_w: &[i64], want_s: &[&[i64]]| {
            let q = QualifiedSet::new(ids.to_vec()).unwrap();
            let (w, sc) = s.encoder_matrices(&q).unwrap();
            let p = gf(5);
            let want_w: Vec<u64> = want_w.iter().map(|&v| p.element_from_i64(v).value()).collect();
            assert_eq!(w.values(), want_w, "w for {q}");
            for (i, row) in want_s.iter().enumerate() {
                let want: Vec<u64> = row.iter().map(|&v| p.element_from_i64(v).value()).collect();
                assert_eq!(sc.row_values(i), want, "s row {i} for {q}");
            }
        };
        check(&[1, 2, 5], &[1, 1], &[&[1, 0, 0, 0], &[0, 1, 0, 0]]);
        check(
            &[1, 2, 3],
            &[1, -1, 1],
            &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]],
        );
        check(
            &[3, 4, 5],
            &[1, 1, 1],
            &[&[1, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]],
        );
        check(
            &[1, 4, 5],
            &[1, 0, 1],
            &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]],
        );
        check(
            &[2, 3, 5],
            &[0, 1, 1],
            &[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]],
        );
    }

    #[test]
    fn n3k5_rejects_gf2() {
        assert!(matches!(
            n3k5(gf(2)),
            Err(SchemeError::FieldTooSmall { needed: 3, .. })
        ));
    }

    #[test]
    fn n2k4_joint_pinned_tables() {
        let s = n2k4_joint(gf(3)).unwrap();
        assert_eq!(s.message_len, 2);
        assert_eq!(s.storage_per_message(), Rational::from_integer(1));
        assert_eq!(s.bandwidth_worst(), Rational::from_integer(2));

        // X_{1,2} = (W1+s1, W2+s2, -W1+s3, -W2+s4).
        let q = QualifiedSet::new([1, 2]).unwrap();
        let (w, sc) = s.encoder_matrices(&q).unwrap();
        assert_eq!(w.values(), vec![1, 0, 0, 1, 2, 0, 0, 2]);
        assert_eq!(sc.row_values(0), vec![1, 0, 0, 0, 0]);
        assert_eq!(sc.row_values(3), vec![0, 0, 0, 1, 0]);

        // X_{3,4} = (W1+s5, W2+s1+s3, -W2+s2+s4, W1+s1+s2+s5).
        let q = QualifiedSet::new([3, 4]).unwrap();
        let (w, sc) = s.encoder_matrices(&q).unwrap();
        assert_eq!(w.values(), vec![1, 0, 0, 1, 0, 2, 1, 0]);
        assert_eq!(sc.row_values(0), vec![0, 0, 0, 0, 1]);
        assert_eq!(sc.row_values(1), vec![1, 0, 1, 0, 0]);
        assert_eq!(sc.row_values(2), vec![0, 1, 0, 1, 0]);
        assert_eq!(sc.row_values(3), vec![1, 1, 0, 0, 1]);

        assert_universal_correctness(&s);
    }

    #[test]
    fn n2k4_joint_works_over_gf2() {
        let s = n2k4_joint(gf(2)).unwrap();
        assert_universal_correctness(&s);
    }

    #[test]
    fn symmetrize_uniform_scheme_is_fixed_point() {
        let s = independent_keys(params(2, 4, 5)).unwrap();
        let sym = symmetrize(&s).unwrap();
        assert_eq!(sym, s);
        let mb = min_bandwidth(params(2, 4, 5)).unwrap();
        assert_eq!(symmetrize(&mb).unwrap(), mb);
    }

    #[test]
    fn symmetrize_n3k5_dimensions() {
        let inner = n3k5(gf(3)).unwrap();
        let sym = symmetrize(&inner).unwrap();
        assert_eq!(sym.encoder_kind, EncoderKind::Symmetrized);
        assert_eq!(sym.basis_count, 480);
        assert_eq!(sym.message_len, 120);
        assert_eq!(sym.key_len(), 120);
        // 12 of the 120 permutations send each Q to {1,2,5} (length 2),
        // the rest to length 3: 12*2 + 108*3 = 348.
        assert_eq!(sym.broadcast_len, 348);
        for q in sym.qualified_sets() {
            assert_eq!(sym.signal_len(&q), 348);
        }
        assert_eq!(sym.bandwidth_worst(), Rational::new(29, 10));
        assert_eq!(sym.bandwidth_average(), Rational::new(29, 10));
        assert_eq!(sym.storage_per_message(), Rational::from_integer(1));
    }

    #[test]
    fn symmetrized_scheme_decodes() {
        // Spot-check decoding on the expanded scheme with a fixed basis and
        // message (exhaustive enumeration is out of reach by design).
        let inner = n3k5(gf(3)).unwrap();
        let sym = symmetrize(&inner).unwrap();
        let p = gf(3);
        let basis: Vec<_> = (0..sym.basis_count as u64)
            .map(|i| p.element(i * i % 3 + i % 2))
            .collect();
        let message: Vec<_> = (0..sym.message_len as u64)
            .map(|i| p.element(i % 3))
            .collect();
        let material = KeyMaterial::derive(&sym, basis).unwrap();
        for ids in [[1, 2, 5], [1, 3, 4], [2, 4, 5]] {
            let q = QualifiedSet::new(ids).unwrap();
            let signal = sym.encode(&material, &q, &message).unwrap();
            assert_eq!(signal.symbols.len(), 348);
            for &r in q.ids() {
                let decoded = sym.decode(r, material.key(r).unwrap(), &signal).unwrap();
                assert_eq!(decoded, message);
            }
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), Some(6));
        assert_eq!(binomial(6, 3), Some(20));
        assert_eq!(binomial(5, 0), Some(1));
        assert_eq!(binomial(3, 5), Some(0));
    }

    #[test]
    fn decode_refusals() {
        let s = min_storage(params(2, 3, 3)).unwrap();
        let material = KeyMaterial::derive(&s, elems(gf(3), &[1, 2])).unwrap();
        let q = QualifiedSet::new([1, 2]).unwrap();
        let signal = s.encode(&material, &q, &elems(gf(3), &[1])).unwrap();
        assert!(matches!(
            s.decode(3, material.key(3).unwrap(), &signal),
            Err(SchemeError::NotQualified { receiver: 3, .. })
        ));
        let mut short = signal.clone();
        short.symbols.pop();
        assert!(matches!(
            s.decode(1, material.key(1).unwrap(), &short),
            Err(SchemeError::SignalLength { .. })
        ));
        let wrong_q = BroadcastSignal {
            qualified: QualifiedSet::new([1, 2, 3]).unwrap(),
            symbols: signal.symbols.clone(),
        };
        assert!(matches!(
            s.decode(1, material.key(1).unwrap(), &wrong_q),
            Err(SchemeError::WrongQualifiedSize { .. })
        ));
    }

    use crate::scheme::BroadcastSignal;
}
