use kneading_core::kneading::{builtin_spec, BSeq, KneadingMap, QSeq, ResonantSpec};
use kneading_core::rational::{l1_distance, Rational, RationalMatrix};
use kneading_core::simplex::*;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPECS: [&str; 4] = ["finite:2", "finite:5", "countable", "cantor"];

fn spec(name: &str) -> ResonantSpec {
    builtin_spec(name)
        .unwrap()
        .into_map()
        .spec()
        .unwrap()
        .clone()
}

fn map(name: &str) -> KneadingMap {
    builtin_spec(name).unwrap().into_map()
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w
                .iter()
                .map(|x| Rational::new((*x).into(), total.into()))
                .collect();
        }
    }
}

fn assert_non_expanding(m: &RationalMatrix, rng: &mut ChaCha8Rng) {
    for _ in 0..100 {
        let a = random_simplex_point(rng, m.cols());
        let b = random_simplex_point(rng, m.cols());
        assert!(l1_distance(&m.apply(&a).unwrap(), &m.apply(&b).unwrap()) <= l1_distance(&a, &b));
    }
}

#[test]
fn all_map_families_are_stochastic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in SPECS {
        let (s, q) = (spec(name), map(name));
        for r in 0..=5 {
            let mats = [
                xi_map(&s, r).unwrap(),
                theta_map(&s, r).unwrap(),
                a_matrix(&q, r).unwrap(),
                a_prime(&s, r).unwrap(),
            ];
            for m in &mats {
                assert!(m.is_stochastic(), "{name} r = {r}");
                assert_non_expanding(m, &mut rng);
            }
            let ap = a_prime(&s, r)
                .unwrap()
                .mul(&theta_map(&s, r).unwrap())
                .unwrap();
            assert_eq!(
                ap,
                xi_map(&s, r).unwrap(),
                "{name}: A'Theta = Xi at r = {r}"
            );
        }
        for r in 0..=4 {
            // each column of Pi_r is a unit vector: the pieces tile V_{q_r+1}
            let p = pi_map(&q, r).unwrap();
            assert!(
                p.pieces.windows(2).all(|w| &w[0].1 + 1u32 == w[1].0),
                "{name} Pi_{r}"
            );
            let mut hit = vec![false; p.n];
            p.pieces.iter().for_each(|(_, _, i)| hit[*i] = true);
            assert!(hit.iter().all(|h| *h));
            if let Ok(dense) = pi_matrix(&q, r) {
                assert!(dense.is_stochastic());
                if r == 0 {
                    assert_eq!(dense.rows(), 1);
                    assert!((0..dense.cols()).all(|c| dense.get(0, c).is_one()));
                }
            }
        }
    }
}

#[test]
fn finite_two_xi_swaps() {
    let s = spec("finite:2");
    for r in 1..6 {
        let m = xi_map(&s, r).unwrap();
        assert_eq!(
            m.apply(&[Rational::one(), Rational::zero()]).unwrap(),
            vec![Rational::zero(), Rational::one()]
        );
    }
}

#[test]
fn determinant_closed_forms() {
    for name in SPECS {
        let q = map(name);
        for r in 1..=5 {
            let d = det_a(&q, r).unwrap();
            assert_eq!(d.product_form, d.ratio_form, "{name} r = {r}");
            assert!(d.signed_identity_holds(), "{name} r = {r}");
            assert!(d.magnitude_identity_holds(), "{name} r = {r}");
            if d.size == 1 {
                assert!(d.determinant.is_one());
                assert!(d.warning.is_some());
            }
        }
    }
    let c = det_a(&map("cantor"), 1).unwrap();
    assert_eq!(c.ratio_form, Rational::new(504.into(), 511.into()));
}

#[test]
fn intertwining_and_rank_on_tower_specs() {
    for name in SPECS {
        let (s, q) = (spec(name), map(name));
        for r in 0..=4 {
            assert!(intertwine_check(&q, r).unwrap().holds(), "{name} r = {r}");
        }
        for r in 1..=3 {
            let (prod, rank) = product_and_rank(&q, r).unwrap();
            assert!(prod.is_stochastic());
            assert_eq!(rank, (s.b(r).unwrap() - r + 1).into(), "{name} r = {r}");
            assert_eq!(
                column_runs(&prod).unwrap(),
                product_lemma_form(&q, r).unwrap()
            );
        }
    }
}

/// `xi` from its description: shift down by one, wrap the top block to 0.
fn oracle_xi(b: &dyn Fn(usize) -> usize, r: usize, i: usize) -> usize {
    if i < b(r) - r {
        i + 1
    } else {
        0
    }
}

/// Count threads by enumerating every tuple of `I_0 x .. x I_R`.
fn oracle_thread_count(b: &dyn Fn(usize) -> usize, depth: usize) -> usize {
    let sizes: Vec<usize> = (0..=depth).map(|r| b(r) - r + 1).collect();
    let mut count = 0;
    let mut idx = vec![0usize; depth + 1];
    loop {
        if (0..depth).all(|r| idx[r] == oracle_xi(b, r, idx[r + 1])) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k > depth {
                return count;
            }
            idx[k] += 1;
            if idx[k] < sizes[k] {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn thread_counts() {
    for m in [1usize, 2, 3, 5] {
        let s = ResonantSpec::tower(BSeq::Finite(m as u64)).unwrap();
        for depth in 1..=8 {
            assert_eq!(extreme_threads(&s, depth).unwrap().len(), m);
        }
    }
    let cantor = spec("cantor");
    for depth in 0..=8 {
        assert_eq!(extreme_threads(&cantor, depth).unwrap().len(), depth + 1);
    }
    let countable = spec("countable");
    let b = |r: usize| {
        let mut t = 0;
        while (t + 1) * (t + 2) / 2 <= r {
            t += 1;
        }
        r + t
    };
    for depth in 0..=8 {
        let threads = extreme_threads(&countable, depth).unwrap();
        assert_eq!(
            threads.len(),
            oracle_thread_count(&b, depth),
            "depth {depth}"
        );
        for t in &threads {
            for r in 0..depth {
                assert_eq!(t[r], oracle_xi(&b, r, t[r + 1]));
            }
        }
    }
}

#[test]
fn separation_certificates() {
    for (name, depth) in [("finite:2", 1), ("finite:2", 3), ("finite:3", 3)] {
        match separation_certificate(&map(name), depth, 3).unwrap() {
            Certificate::Separated { delta, .. } => assert!(delta.is_positive(), "{name}"),
            other => panic!("{name}: {other:?}"),
        }
    }
    assert_eq!(
        separation_certificate(&map("finite:1"), 2, 3).unwrap(),
        Certificate::Vacuous
    );
    let q = [0u64, 2, 5, 9, 14, 20, 27, 35, 44]
        .iter()
        .map(|x| (*x).into())
        .collect();
    let slow = KneadingMap::resonant(
        ResonantSpec::new(QSeq::Explicit(q), BSeq::Explicit(vec![0, 2, 3, 5, 6, 7])).unwrap(),
    );
    assert!(matches!(
        separation_certificate(&slow, 1, 2).unwrap(),
        Certificate::Insufficient(_)
    ));
}

#[test]
fn contraction_inequality_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for name in SPECS {
        let (s, q) = (spec(name), map(name));
        for (r, r1, r2) in [(1, 2, 3), (1, 2, 4)] {
            let n = s.index_size(r2).unwrap();
            for _ in 0..100 {
                let v = random_simplex_point(&mut rng, n);
                let rep = contraction_bound(&q, r, r1, r2, &v).unwrap();
                assert!(rep.holds(), "{name} {:?}", (r, r1, r2));
            }
        }
        let same = contraction_bound(&q, 1, 2, 2, &vertex(s.index_size(2).unwrap())).unwrap();
        assert!(same.swap_to_prime.is_zero() && same.bound.is_zero());
        let b3 = contraction_bound(&q, 1, 2, 3, &vertex(s.index_size(3).unwrap()))
            .unwrap()
            .bound;
        let b4 = contraction_bound(&q, 1, 2, 4, &vertex(s.index_size(4).unwrap()))
            .unwrap()
            .bound;
        assert!(b3 <= b4);
    }
}

fn vertex(n: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); n];
    v[n - 1] = Rational::one();
    v
}

#[test]
fn simplex_approximation_is_stochastic() {
    for name in SPECS {
        let a = simplex_approx(&map(name), 4).unwrap();
        assert!(a.map.is_stochastic());
        for img in &a.vertex_images {
            assert!(img.iter().all(|x| !x.is_negative()));
            assert!(img.iter().sum::<Rational>().is_one());
        }
    }
}

#[test]
fn realization_of_trees() {
    let constant = PartitionTree::constant(4, 6);
    let real = realize_space(&constant, 5).unwrap();
    for (r, b) in real.b.iter().enumerate().skip(1) {
        assert_eq!(*b as usize, r + 3);
    }
    assert!(realization_round_trip(&constant, &real).unwrap());

    let one = PartitionTree::constant(1, 6);
    let real = realize_space(&one, 5).unwrap();
    assert!(real.b.iter().enumerate().all(|(r, b)| *b as usize == r));

    let binary = PartitionTree::binary(5);
    let real = realize_space(&binary, 4).unwrap();
    assert!(realization_round_trip(&binary, &real).unwrap());
    assert!(real.b.windows(2).all(|w| w[0] < w[1]));
    let s = ResonantSpec::new(QSeq::Pow3Tower, BSeq::Explicit(real.b.clone())).unwrap();
    for j in 0..4 {
        let r = real.r_of[j];
        assert_eq!(
            extreme_threads(&s, r).unwrap().len(),
            binary.levels[j].cells,
            "level {}",
            j + 1
        );
    }

    let json =
        r#"{"levels":[{"cells":2},{"cells":3,"parent":[0,0,1]},{"cells":5,"parent":[0,1,1,2,2]}]}"#;
    let tree = PartitionTree::from_json(json).unwrap();
    let real = realize_space(&tree, 2).unwrap();
    assert!(realization_round_trip(&tree, &real).unwrap());
    let not_onto = r#"{"levels":[{"cells":2},{"cells":2,"parent":[0,0]}]}"#;
    assert!(PartitionTree::from_json(not_onto).is_err());
}
