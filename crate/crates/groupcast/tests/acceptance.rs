//! End-to-end acceptance suite. Each test prints exactly one
//! `acceptance N (name): PASS|FAIL` line so the whole gate can be read off
//! `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use groupcast::entropy::RandomSystem;
use groupcast::field::{smallest_prime_at_least, FieldElement, PrimeModulus};
use groupcast::linalg::FieldMatrix;
use groupcast::region::{self, RegionQuery, RegionStatus};
use groupcast::scheme::{self, QualifiedSet, Scheme, SchemeParams};
use groupcast::verify::{verify_scheme, verify_scheme_linear, ReceiverRole, VerificationReport};
use groupcast::Rational;

fn criterion(number: usize, name: &str, body: impl FnOnce()) {
    let result = catch_unwind(AssertUnwindSafe(body));
    let verdict = if result.is_ok() { "PASS" } else { "FAIL" };
    println!("acceptance {number} ({name}): {verdict}");
    if let Err(cause) = result {
        resume_unwind(cause);
    }
}

fn gf(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

fn params(n: usize, k: usize, p: u64) -> SchemeParams {
    SchemeParams::new(n, k, gf(p)).unwrap()
}

fn int(v: i64) -> Rational {
    Rational::from_integer(v)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k.min(n - k) {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// All (N, K) pairs with 1 <= N <= K-1 <= 5.
fn nk_sweep() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 2..=6 {
        for n in 1..k {
            out.push((n, k));
        }
    }
    out
}

fn assert_reports_agree(exhaustive: &VerificationReport, linear: &VerificationReport) {
    assert_eq!(exhaustive.checks, linear.checks);
    assert_eq!(exhaustive.joint_key_entropy, linear.joint_key_entropy);
    assert_eq!(exhaustive.passed, linear.passed);
}

#[test]
fn criterion_1_min_bandwidth_family() {
    criterion(1, "min-bandwidth family achieves (N, 1)", || {
        let start = Instant::now();
        for (n, k) in nk_sweep() {
            let p = smallest_prime_at_least(k as u64);
            let s = scheme::min_bandwidth(params(n, k, p)).unwrap();
            let linear = verify_scheme_linear(&s).unwrap();
            assert!(linear.passed, "N={n}, K={k}, p={p}");
            assert_eq!(linear.storage_per_message, int(n as i64));
            assert_eq!(linear.bandwidth_worst, int(1));
            assert_eq!(linear.bandwidth_average, int(1));
            if p <= 5 {
                let exhaustive = verify_scheme(&s).unwrap();
                assert!(exhaustive.passed);
                assert_reports_agree(&exhaustive, &linear);
            }
        }
        assert!(
            start.elapsed().as_secs() < 120,
            "sweep exceeded its two-minute budget"
        );
    });
}

#[test]
fn criterion_2_min_storage_family() {
    criterion(2, "min-storage family achieves (1, min(N, K-N+1))", || {
        for (n, k) in nk_sweep() {
            let p = smallest_prime_at_least(k as u64);
            let s = scheme::min_storage(params(n, k, p)).unwrap();
            let linear = verify_scheme_linear(&s).unwrap();
            assert!(linear.passed, "N={n}, K={k}, p={p}");
            assert_eq!(linear.storage_per_message, int(1));
            let expect = n.min(k - n + 1) as i64;
            assert_eq!(linear.bandwidth_worst, int(expect));
            if p <= 5 {
                let exhaustive = verify_scheme(&s).unwrap();
                assert_reports_agree(&exhaustive, &linear);
            }
        }

        // The three-of-four instance over GF(3), symbol for symbol: keys
        // s1, s2, s1+s2, s1+2s2 and a broadcast precoder orthogonal to the
        // excluded receiver's key row.
        let s = scheme::min_storage(params(3, 4, 3)).unwrap();
        let rows: Vec<Vec<u64>> = (0..4)
            .map(|r| s.key_generators[r].row_values(0))
            .collect();
        assert_eq!(rows, vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, 2]]);
        let q = QualifiedSet::new([1, 2, 3]).unwrap();
        assert_eq!(s.signal_len(&q), 2);
        let (w_coeff, s_coeff) = s.encoder_matrices(&q).unwrap();
        assert!(s_coeff.values() == FieldMatrix::identity(gf(3), 2).values());
        // Excluded receiver 4 holds s1 + 2 s2; its row annihilates the
        // precoder, so the broadcast is pure noise to it.
        let v_w: Vec<FieldElement> = (0..2).map(|i| w_coeff.get(i, 0)).collect();
        let row4 = &s.key_generators[3];
        let dot = row4.get(0, 0) * v_w[0] + row4.get(0, 1) * v_w[1];
        assert_eq!(dot.value(), 0);
        assert!(v_w.iter().any(|e| e.value() != 0));
        assert!(verify_scheme(&s).unwrap().passed);
    });
}

#[test]
fn criterion_3_uneven_bandwidth_three_of_five() {
    criterion(3, "three-of-five scheme averages 29/10", || {
        let s = scheme::n3k5(gf(3)).unwrap();
        let exhaustive = verify_scheme(&s).unwrap();
        let linear = verify_scheme_linear(&s).unwrap();
        assert!(exhaustive.passed && linear.passed);
        assert_reports_agree(&exhaustive, &linear);
        assert_eq!(
            exhaustive.bandwidth_histogram,
            BTreeMap::from([(2, 1), (3, 9)])
        );
        assert_eq!(exhaustive.bandwidth_average, Rational::new(29, 10));
        assert_eq!(exhaustive.bandwidth_worst, int(3));

        let sym = scheme::symmetrize(&s).unwrap();
        let report = verify_scheme_linear(&sym).unwrap();
        assert!(report.passed);
        // Uniform per-set bandwidth: one histogram bucket, worst == average
        // == 29/10 as an exact rational.
        assert_eq!(report.bandwidth_histogram.len(), 1);
        assert_eq!(report.bandwidth_worst, Rational::new(29, 10));
        assert_eq!(report.bandwidth_average, Rational::new(29, 10));
        assert_eq!(report.storage_per_message, int(1));
    });
}

#[test]
fn criterion_4_joint_key_two_of_four() {
    criterion(4, "two-of-four joint keys reach 5/2 per message symbol", || {
        for p in [2u64, 3] {
            let s = scheme::n2k4_joint(gf(p)).unwrap();
            let report = verify_scheme(&s).unwrap();
            assert!(report.passed, "p={p}");
            assert_eq!(report.storage_per_message, int(1));
            assert_eq!(report.bandwidth_worst, int(2));
            // The entropy oracle, not ranks: H(Z1..Z4) enumerated exactly.
            let sys = RandomSystem::from_scheme(&s).unwrap();
            let joint = sys
                .entropy(&["Z1", "Z2", "Z3", "Z4"])
                .unwrap()
                .exact()
                .unwrap();
            assert_eq!(joint, int(5));
            assert_eq!(joint / int(s.message_len as i64), Rational::new(5, 2));
            assert_eq!(report.joint_key_entropy, int(5));
        }
    });
}

#[test]
fn criterion_5_determinant_identity() {
    criterion(5, "banded-plus-mask determinant identity", || {
        for k in 2..=6usize {
            let p = smallest_prime_at_least(k as u64);
            let modulus = gf(p);
            for n in 1..k {
                let s = scheme::min_bandwidth(params(n, k, p)).unwrap();
                let points: Vec<FieldElement> =
                    (1..=k as u64).map(|v| modulus.element(v)).collect();
                for q in s.qualified_sets() {
                    for e in 1..=k {
                        if q.contains(e) {
                            continue;
                        }
                        // The (N+1) x (N+1) matrix of the eavesdropper's
                        // banded generator stacked over the broadcast mask
                        // row of Q.
                        let (_, mask) = s.encoder_matrices(&q).unwrap();
                        let stacked = s.key_generators[e - 1].vstack(&mask).unwrap();
                        let det = stacked.det().unwrap();
                        let mut expect = modulus.element_from_i64(if n % 2 == 0 {
                            1
                        } else {
                            -1
                        });
                        for &qi in q.ids() {
                            expect = expect * (points[e - 1] - points[qi - 1]);
                        }
                        assert_eq!(det, expect, "N={n}, K={k}, Q={q}, e={e}");
                        assert_ne!(det.value(), 0);
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_6_unit_bandwidth_and_unit_storage_identities() {
    criterion(6, "unit-bandwidth and unit-storage entropy identities", || {
        // Unit-bandwidth schemes (beta = 1): the broadcast is one maximally
        // masked symbol. Exactly: H(X_Q) = L_W, H(X_Q | W, Z_q) = 0, and
        // I(X_Q ; Z_e) = 0.
        let mut unit_bandwidth: Vec<Scheme> = Vec::new();
        for (n, k) in nk_sweep() {
            let p = smallest_prime_at_least(k as u64);
            if p > 5 {
                continue;
            }
            unit_bandwidth.push(scheme::min_bandwidth(params(n, k, p)).unwrap());
            // The shared-pad baseline also has beta = 1; keep the pad count
            // small enough to enumerate quickly.
            if binomial(k, n) <= 6 {
                unit_bandwidth.push(scheme::combinatorial(params(n, k, p)).unwrap());
            }
        }
        for s in &unit_bandwidth {
            assert_eq!(s.bandwidth_worst(), int(1));
            let sys = RandomSystem::from_scheme(s).unwrap();
            let l_w = int(s.message_len as i64);
            for q in s.qualified_sets() {
                let x = format!("X{q}");
                assert_eq!(sys.entropy(&[&x]).unwrap().exact().unwrap(), l_w);
                for r in 1..=s.params.receivers {
                    let z = format!("Z{r}");
                    if q.contains(r) {
                        let residual = sys
                            .conditional_entropy(&[&x], &["W", &z])
                            .unwrap()
                            .exact()
                            .unwrap();
                        assert_eq!(residual, int(0), "{} {q} {r}", s.encoder_kind);
                    } else {
                        let mi = sys
                            .mutual_information(&[&x], &[&z], &[])
                            .unwrap()
                            .exact()
                            .unwrap();
                        assert_eq!(mi, int(0), "{} {q} {r}", s.encoder_kind);
                    }
                }
            }
        }

        // Unit-storage schemes (alpha = 1): every key is one fresh symbol
        // per message symbol and any two receivers' keys are independent:
        // H(Z_q) = L_W and H(Z_q, Z_e) = 2 L_W.
        let mut unit_storage: Vec<Scheme> = Vec::new();
        for (n, k) in nk_sweep() {
            let p = smallest_prime_at_least(k as u64);
            if p > 5 {
                continue;
            }
            unit_storage.push(scheme::min_storage(params(n, k, p)).unwrap());
        }
        unit_storage.push(scheme::n3k5(gf(3)).unwrap());
        unit_storage.push(scheme::n2k4_joint(gf(2)).unwrap());
        unit_storage.push(scheme::n2k4_joint(gf(3)).unwrap());
        for s in &unit_storage {
            assert_eq!(s.storage_per_message(), int(1));
            let sys = RandomSystem::from_scheme(s).unwrap();
            let l_w = int(s.message_len as i64);
            let k = s.params.receivers;
            for q in 1..=k {
                let zq = format!("Z{q}");
                assert_eq!(
                    sys.entropy(&[&zq]).unwrap().exact().unwrap(),
                    l_w,
                    "{} Z{q}",
                    s.encoder_kind
                );
                for e in q + 1..=k {
                    let ze = format!("Z{e}");
                    assert_eq!(
                        sys.entropy(&[&zq, &ze]).unwrap().exact().unwrap(),
                        l_w * int(2),
                        "{} Z{q},Z{e}",
                        s.encoder_kind
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_7_region_boundaries() {
    criterion(7, "region boundaries are exact", || {
        // N = 2: the whole boundary is alpha + beta = 3 (clipped at 1), on
        // a 21 x 21 grid = 441 points.
        let grid = region::rational_grid(
            Rational::new(1, 4),
            Rational::new(21, 4),
            Rational::new(1, 4),
        )
        .unwrap();
        assert_eq!(grid.len(), 21);
        let mut points = 0;
        for k in [3usize, 5, 8] {
            for &alpha in &grid {
                for &beta in &grid {
                    let verdict = region::region_membership(
                        &RegionQuery::new(2, k, alpha, beta).unwrap(),
                    )
                    .unwrap();
                    let expect = if alpha >= int(1) && beta >= int(1) && alpha + beta >= int(3)
                    {
                        RegionStatus::Achievable
                    } else {
                        RegionStatus::Infeasible
                    };
                    assert_eq!(verdict.status, expect, "alpha={alpha}, beta={beta}, K={k}");
                    points += 1;
                }
            }
        }
        assert!(points >= 400, "grid too sparse: {points}");

        // (N, K) = (3, 5) at alpha = 1: infeasible below 5/2, open in
        // [5/2, 29/10), achievable from 29/10 on.
        let at = |beta: Rational| {
            region::region_membership(&RegionQuery::new(3, 5, int(1), beta).unwrap())
                .unwrap()
                .status
        };
        assert_eq!(at(Rational::new(249, 100)), RegionStatus::Infeasible);
        assert_eq!(at(Rational::new(12, 5)), RegionStatus::Infeasible);
        assert_eq!(at(Rational::new(5, 2)), RegionStatus::Unknown);
        assert_eq!(at(Rational::new(13, 5)), RegionStatus::Unknown);
        assert_eq!(at(Rational::new(289, 100)), RegionStatus::Unknown);
        assert_eq!(at(Rational::new(29, 10)), RegionStatus::Achievable);
        assert_eq!(at(int(3)), RegionStatus::Achievable);

        // Unit bandwidth: achievable exactly when alpha >= N.
        for n in 1..=6usize {
            let k = n + 1;
            let ok = region::region_membership(
                &RegionQuery::new(n, k, int(n as i64), int(1)).unwrap(),
            )
            .unwrap();
            assert_eq!(ok.status, RegionStatus::Achievable, "N={n}");
            let bad = region::region_membership(
                &RegionQuery::new(n, k, int(n as i64) - Rational::new(1, 100), int(1)).unwrap(),
            )
            .unwrap();
            assert_eq!(bad.status, RegionStatus::Infeasible, "N={n}");
        }
    });
}

#[test]
fn criterion_8_verifier_oracle_equivalence() {
    criterion(8, "exhaustive and rank verifiers agree exactly", || {
        let mut schemes: Vec<Scheme> = Vec::new();
        for (n, k) in nk_sweep() {
            for p in [2u64, 3, 5, 7] {
                let Ok(params) = SchemeParams::new(n, k, gf(p)) else {
                    continue;
                };
                for build in [
                    scheme::min_bandwidth,
                    scheme::min_storage,
                    scheme::independent_keys,
                    scheme::combinatorial,
                ] {
                    if let Ok(s) = build(params) {
                        schemes.push(s);
                    }
                }
            }
        }
        for p in [3u64, 5] {
            schemes.push(scheme::n3k5(gf(p)).unwrap());
        }
        for p in [2u64, 3, 5, 7] {
            schemes.push(scheme::n2k4_joint(gf(p)).unwrap());
        }

        let budget = 1_000_000;
        let mut compared = 0;
        for s in &schemes {
            let sys = RandomSystem::from_scheme(s).unwrap().with_budget(budget);
            if sys.outcome_count().is_err() {
                continue; // larger than 10^6 outcomes: rank path only
            }
            let exhaustive =
                groupcast::verify::verify_scheme_with_budget(s, budget).unwrap();
            let linear = verify_scheme_linear(s).unwrap();
            assert!(exhaustive.passed, "{} N={} K={} p={}", s.encoder_kind,
                s.params.qualified_size, s.params.receivers, s.params.modulus.get());
            assert_reports_agree(&exhaustive, &linear);
            compared += 1;
        }
        assert!(compared >= 40, "only {compared} schemes were comparable");
    });
}

#[test]
fn criterion_9_mutilation_sensitivity() {
    criterion(9, "single-entry corruptions are detected", || {
        // Each family gets one documented single-entry corruption of a key
        // generator. Both verifier paths must flag it, identically.
        let check = |mut s: Scheme,
                     corrupt: &dyn Fn(&mut Scheme),
                     expect_role: ReceiverRole| {
            corrupt(&mut s);
            let exhaustive = verify_scheme(&s).unwrap();
            let linear = verify_scheme_linear(&s).unwrap();
            assert!(!exhaustive.passed, "{} corruption missed", s.encoder_kind);
            assert!(!linear.passed, "{} corruption missed", s.encoder_kind);
            assert_reports_agree(&exhaustive, &linear);
            assert!(
                exhaustive.failed_checks().any(|c| c.role == expect_role),
                "{}: expected a failed {} check",
                s.encoder_kind,
                expect_role.name()
            );
        };

        // Banded generators: zeroing G_3[0,0] breaks receiver 3's ability
        // to combine its rows into the broadcast mask (a decoding failure).
        check(
            scheme::min_bandwidth(params(2, 4, 5)).unwrap(),
            &|s| s.key_generators[2].set(0, 0, gf(5).element(0)),
            ReceiverRole::Qualified,
        );

        // Null-space precoding: receiver 3's key row [1,1] -> [1,0] makes
        // its key equal s1; with the precoder still orthogonal to [1,1],
        // receiver 3 can now strip the pad from broadcasts that exclude it.
        check(
            scheme::min_storage(params(2, 3, 3)).unwrap(),
            &|s| s.key_generators[2].set(0, 1, gf(3).element(0)),
            ReceiverRole::Excluded,
        );

        // Repetition regime: zeroing G_1[0,0] desynchronizes receiver 1's
        // pad from the one the encoder adds, so its decode is off by s1.
        check(
            scheme::min_storage(params(1, 3, 3)).unwrap(),
            &|s| s.key_generators[0].set(0, 0, gf(3).element(0)),
            ReceiverRole::Qualified,
        );

        // Per-receiver pads: receiver 2's pad becomes s1 + s2 while the
        // encoder still masks with s2 alone.
        check(
            scheme::independent_keys(params(2, 3, 3)).unwrap(),
            &|s| s.key_generators[1].set(0, 0, gf(3).element(1)),
            ReceiverRole::Qualified,
        );

        // Per-set pads: receiver 1's copy of the {1,2} pad is erased, so
        // broadcasts to {1,2} stay masked for it. (Adding a pad it already
        // holds would be an invertible remix the verifier rightly accepts.)
        check(
            scheme::combinatorial(params(2, 3, 3)).unwrap(),
            &|s| s.key_generators[0].set(0, 0, gf(3).element(0)),
            ReceiverRole::Qualified,
        );

        // Receiver 5's key drops from s1 + s2 to s1, letting it remove the
        // pad from the first symbol of broadcasts it is excluded from.
        check(
            scheme::n3k5(gf(3)).unwrap(),
            &|s| s.key_generators[4].set(0, 1, gf(3).element(0)),
            ReceiverRole::Excluded,
        );

        // Joint-key scheme: zeroing the s1 coefficient in receiver 3's
        // second key symbol turns it into s3, which cancels against the
        // third broadcast symbol of Q = {1, 2} and exposes one message
        // symbol.
        check(
            scheme::n2k4_joint(gf(3)).unwrap(),
            &|s| s.key_generators[2].set(1, 0, gf(3).element(0)),
            ReceiverRole::Excluded,
        );

        // The symmetrized wrapper is too large to enumerate, so its
        // corruption is asserted on the rank path alone.
        let mut sym = scheme::symmetrize(&scheme::n3k5(gf(3)).unwrap()).unwrap();
        sym.key_generators[0].set(0, 0, gf(3).element(0));
        let report = verify_scheme_linear(&sym).unwrap();
        assert!(!report.passed);
        assert!(report.failed_checks().any(|c| c.role == ReceiverRole::Qualified));
    });
}
