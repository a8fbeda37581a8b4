use kneading_core::kneading::{BSeq, ClosedForm, KneadingMap, ResonantSpec};
use kneading_core::odometer::*;
use kneading_core::Error;
use num_bigint::BigUint;
use proptest::prelude::*;

type QFn = fn(u64) -> u64;

fn q_fib(k: u64) -> u64 {
    k.saturating_sub(2)
}
fn q_zero(_: u64) -> u64 {
    0
}
fn q_doubling(k: u64) -> u64 {
    k.saturating_sub(1)
}

fn oracle_times(q: QFn, n: usize) -> Vec<u64> {
    let mut s = vec![1u64];
    for k in 1..n {
        s.push(s[k - 1].saturating_add(s[q(k as u64) as usize]));
    }
    s
}

fn oracle_admissible(q: QFn, bits: &[bool]) -> bool {
    (0..bits.len()).all(|k| !bits[k] || (q(k as u64 + 1) as usize..k).all(|j| !bits[j]))
}

/// All admissible words of value `n`, found by exhaustive search.
fn oracle_representations(q: QFn, n: u64) -> Vec<Vec<bool>> {
    let s = oracle_times(q, n as usize + 2);
    let len = s.iter().position(|v| *v > n).unwrap();
    let mut out = Vec::new();
    let mut word = vec![false; len];
    fn go(k: usize, rest: u64, s: &[u64], word: &mut Vec<bool>, q: QFn, out: &mut Vec<Vec<bool>>) {
        if k == 0 {
            if rest == 0 && oracle_admissible(q, word) {
                let mut w = word.clone();
                while w.last() == Some(&false) {
                    w.pop();
                }
                out.push(w);
            }
            return;
        }
        let i = k - 1;
        go(i, rest, s, word, q, out);
        let blocked = (i + 1..word.len()).any(|k| word[k] && q(k as u64 + 1) as usize <= i);
        if s[i] <= rest && !blocked {
            word[i] = true;
            go(i, rest - s[i], s, word, q, out);
            word[i] = false;
        }
    }
    go(len, n, &s, &mut word, q, &mut out);
    out
}

fn maps() -> Vec<(KneadingMap, QFn)> {
    vec![
        (KneadingMap::fibonacci(), q_fib as QFn),
        (KneadingMap::closed(ClosedForm::Zero), q_zero as QFn),
        (KneadingMap::closed(ClosedForm::Doubling), q_doubling as QFn),
    ]
}

#[test]
fn expansion_matches_exhaustive_search() {
    for (q, qf) in maps() {
        for n in 0..=500u64 {
            let mut reps = oracle_representations(qf, n);
            reps.sort();
            let got = expand_u64(n, &q).unwrap();
            assert_eq!(got.bits(), &reps[0][..], "n = {n}");
            assert_eq!(sigma_u64(&got).unwrap(), n);
        }
    }
}

#[test]
fn successor_and_predecessor_walk_the_integers() {
    for (q, _) in maps() {
        let mut x = expand_u64(0, &q).unwrap();
        for n in 0..10_000u64 {
            let y = successor(&x).unwrap();
            assert_eq!(y, expand_u64(n + 1, &q).unwrap(), "n = {n}");
            assert_eq!(predecessor(&y).unwrap(), x);
            x = y;
        }
    }
}

#[test]
fn resonant_successor_matches_expansion() {
    let q = KneadingMap::resonant(ResonantSpec::tower(BSeq::Cantor).unwrap());
    for n in 0..2_000u64 {
        let x = expand_u64(n, &q).unwrap();
        assert_eq!(successor(&x).unwrap(), successor_by_expansion(&x).unwrap());
    }
}

#[test]
fn fibonacci_examples() {
    let q = KneadingMap::fibonacci();
    assert_eq!(expand_u64(4, &q).unwrap().to_string(), "101");
    let x = OdometerPoint::parse("101", PointKind::Finite, &q).unwrap();
    assert_eq!(successor(&x).unwrap().to_string(), "0001");
    assert!(matches!(
        predecessor(&expand_u64(0, &q).unwrap()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn classical_conjugacy_for_doubling() {
    let q = KneadingMap::closed(ClosedForm::Doubling);
    let levels = classical_levels(&q, 10).unwrap();
    assert_eq!(levels, (0..=10).collect::<Vec<_>>());
    assert!(classical_divisibility(&q, &levels).unwrap());
    for n in 0..10_000u64 {
        let x = expand_u64(n, &q).unwrap();
        let y = successor(&x).unwrap();
        for j in 1..=10u64 {
            let m = BigUint::from(1u64 << j);
            let lhs = classical_projection(&y, j).unwrap();
            let rhs = (classical_projection(&x, j).unwrap() + 1u32) % &m;
            assert_eq!(lhs, rhs, "n = {n}, j = {j}");
        }
    }
}

#[test]
fn truncated_points() {
    let q = KneadingMap::fibonacci();
    let x = OdometerPoint::parse("1000", PointKind::Truncated, &q).unwrap();
    let y = successor(&x).unwrap();
    assert_eq!(y.kind(), PointKind::Truncated);
    assert_eq!(predecessor(&y).unwrap(), x);
    let full = OdometerPoint::parse("1010", PointKind::Truncated, &q).unwrap();
    assert!(matches!(successor(&full), Err(Error::Unresolved { .. })));
}

proptest! {
    #[test]
    fn membership_agrees_with_oracle(bits in proptest::collection::vec(any::<bool>(), 0..24)) {
        for (q, qf) in maps() {
            prop_assert_eq!(membership(&bits, &q).unwrap(), oracle_admissible(qf, &bits));
        }
    }

    #[test]
    fn succ_pred_inverse_on_large_values(n in 0u64..(1u64 << 40)) {
        // Q = 0 is skipped: its expansions have length n
        for q in [KneadingMap::fibonacci(), KneadingMap::closed(ClosedForm::Doubling)] {
            let x = expand_u64(n, &q).unwrap();
            let y = successor(&x).unwrap();
            prop_assert_eq!(sigma_u64(&y).unwrap(), n + 1);
            prop_assert_eq!(predecessor(&y).unwrap(), x);
        }
    }
}
