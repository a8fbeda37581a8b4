use kneading_core::bratteli::structured::{apply_chain, product};
use kneading_core::bratteli::*;
use kneading_core::kneading::{builtin_spec, BSeq, ClosedForm, KneadingMap, QSeq, ResonantSpec};
use kneading_core::rational::{l1_distance, Rational, RationalMatrix};
use kneading_core::runs::RunVector;
use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A resonant map with a slowly growing `q`, so every level is small.
fn small_spec() -> KneadingMap {
    let q = [0u64, 2, 5, 9, 14, 20, 27, 35, 44]
        .iter()
        .map(|x| BigUint::from(*x))
        .collect();
    KneadingMap::resonant(
        ResonantSpec::new(QSeq::Explicit(q), BSeq::Explicit(vec![0, 2, 3, 5, 6, 7])).unwrap(),
    )
}

fn maps() -> Vec<(&'static str, KneadingMap)> {
    let mut out = vec![
        ("fibonacci", KneadingMap::fibonacci()),
        ("doubling", KneadingMap::closed(ClosedForm::Doubling)),
    ];
    for name in ["finite:2", "finite:5", "countable", "cantor"] {
        out.push((name, builtin_spec(name).unwrap().into_map()));
    }
    out
}

/// `S_0 .. S_n` by the recursion, using only `Q`.
fn oracle_times(q: &KneadingMap, n: u64) -> Vec<BigUint> {
    let mut s = vec![BigUint::one()];
    for k in 1..=n {
        let v = &s[k as usize - 1] + &s[q.value(k).unwrap() as usize];
        s.push(v);
    }
    s
}

#[test]
fn diagonal_heights_are_cutting_times() {
    for (name, q) in maps() {
        let s = oracle_times(&q, 40);
        for j in 1..=40u64 {
            let runs = height_runs(&q, j).unwrap();
            let h = height_at(&runs, &BigUint::from(j)).unwrap();
            assert_eq!(h, s[j as usize - 1], "{name} j = {j}");
        }
    }
}

#[test]
fn run_heights_match_explicit_stages() {
    for (name, q) in maps() {
        for j in 1..=12u64 {
            let stage = match build_stage(&q, j) {
                Ok(s) => s,
                Err(kneading_core::Error::TooLarge(_)) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            let runs = height_runs(&q, j).unwrap();
            for (v, h) in stage.vertices.iter().zip(&stage.heights) {
                assert_eq!(
                    height_at(&runs, &BigUint::from(*v)).as_ref(),
                    Some(h),
                    "{name} j = {j} v = {v}"
                );
            }
        }
    }
}

#[test]
fn incidence_and_transition_are_consistent() {
    for (name, q) in maps() {
        for j in 1..=24u64 {
            let stage = match build_stage(&q, j) {
                Ok(s) => s,
                Err(kneading_core::Error::TooLarge(_)) => continue,
                Err(e) => panic!("{name}: {e}"),
            };
            let n = stage.incidence();
            // s_j = N_j^T s_{j-1}
            for (c, v) in stage.vertices.iter().enumerate() {
                let mut acc = BigUint::zero();
                for r in 0..n.rows() {
                    let k = n.get(r, c);
                    if !k.is_zero() {
                        acc += k.to_integer().to_biguint().unwrap() * &stage.prev_heights[r];
                    }
                }
                assert_eq!(&acc, stage.height(*v).unwrap(), "{name} j = {j}");
            }
            let m = stage.transition();
            assert!(m.is_stochastic(), "{name} M_{j}");
            assert!(m.column_sums().iter().all(|s| s.is_one()));
        }
    }
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let w: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
    let total: u64 = w.iter().sum::<u64>().max(1);
    let mut v: Vec<Rational> = w
        .iter()
        .map(|x| Rational::new((*x).into(), total.into()))
        .collect();
    if w.iter().all(|x| *x == 0) {
        v[0] = Rational::one();
    }
    v
}

fn assert_non_expanding(m: &RationalMatrix, rng: &mut ChaCha8Rng, pairs: usize) {
    for _ in 0..pairs {
        let a = random_simplex_point(rng, m.cols());
        let b = random_simplex_point(rng, m.cols());
        let d0 = l1_distance(&a, &b);
        let d1 = l1_distance(&m.apply(&a).unwrap(), &m.apply(&b).unwrap());
        assert!(d1 <= d0);
    }
}

#[test]
fn transitions_do_not_expand_l1() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in [
        KneadingMap::fibonacci(),
        KneadingMap::closed(ClosedForm::Doubling),
        small_spec(),
    ] {
        for j in [3u64, 8, 15] {
            let (m, _) = transition_matrix(&q, j).unwrap();
            assert_non_expanding(&m, &mut rng, 100);
        }
    }
}

#[test]
fn structured_products_match_dense_products() {
    let q = KneadingMap::fibonacci();
    let levels = Levels::new(&q).unwrap();
    for (lo, hi) in [(2u64, 5u64), (3, 9), (4, 12)] {
        let mut dense = transition_matrix(&q, lo).unwrap().0;
        for j in lo + 1..=hi {
            dense = dense.mul(&transition_matrix(&q, j).unwrap().0).unwrap();
        }
        let p = product(&levels, &BigUint::from(lo), &BigUint::from(hi)).unwrap();
        assert!(p.is_stochastic());
        let d = p.to_dense().unwrap();
        assert_eq!(d, dense, "M_{lo}..M_{hi}");
        assert_eq!(p.rank(), BigUint::from(dense.rank()));
    }
}

#[test]
fn chain_application_matches_matrix_action() {
    let q = small_spec();
    let levels = Levels::new(&q).unwrap();
    let (lo, hi) = (8u64, 16u64);
    let mut dense = transition_matrix(&q, lo).unwrap().0;
    for j in lo + 1..=hi {
        dense = dense.mul(&transition_matrix(&q, j).unwrap().0).unwrap();
    }
    let first_col = dense.cols();
    for c in 0..first_col {
        let label = dense_col_label(&q, hi, c);
        let e = RunVector::unit(&BigUint::from(label));
        let v = apply_chain(&levels, &BigUint::from(lo), &BigUint::from(hi), &e).unwrap();
        for r in 0..dense.rows() {
            let row_label = dense_row_label(&q, lo, r);
            assert_eq!(&v.get(&BigUint::from(row_label)), dense.get(r, c));
        }
    }
}

fn dense_col_label(q: &KneadingMap, j: u64, c: usize) -> u64 {
    build_stage(q, j).unwrap().vertices[c]
}

fn dense_row_label(q: &KneadingMap, j: u64, r: usize) -> u64 {
    build_stage(q, j).unwrap().prev_vertices[r]
}

#[test]
fn vershik_orbit_visits_every_path() {
    let q = KneadingMap::fibonacci();
    let d = Diagram::build(&q, 7).unwrap();
    let stage = &d.stages[6];
    for v in &stage.vertices {
        let mut p = d.minimal_path(7, *v).unwrap();
        let mut count = BigUint::one();
        let mut seen = std::collections::HashSet::new();
        seen.insert(p.clone());
        while let Ok(next) = d.vershik_successor(&p) {
            assert!(d.is_valid(&next));
            assert_eq!(next.steps.last().unwrap().0, *v);
            assert!(seen.insert(next.clone()));
            p = next;
            count += 1u32;
        }
        assert_eq!(&count, stage.height(*v).unwrap());
    }
}

#[test]
fn non_monotone_maps_are_rejected() {
    let q = KneadingMap::table(vec![0, 0, 1, 0, 0, 0]).unwrap();
    assert!(Levels::new(&q).is_err());
    assert!(Levels::new(&KneadingMap::closed(ClosedForm::Zero)).is_err());
}
