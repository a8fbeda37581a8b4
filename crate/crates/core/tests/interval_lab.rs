use std::sync::Arc;

use kneading_core::fixed::Fixed;
use kneading_core::interval::*;
use kneading_core::kneading::{ClosedForm, KneadingMap};
use kneading_core::odometer::{expand_u64, OdometerPoint, PointKind};
use kneading_core::Error;
use proptest::prelude::*;

const PREC: u32 = 256;

fn fx(s: &str) -> Fixed {
    Fixed::parse(s, PREC).unwrap()
}

fn fibonacci_map(k: u64) -> UnimodalMap {
    let fit = find_parameter(
        FamilyKind::Logistic,
        &KneadingMap::fibonacci(),
        k,
        &SearchOptions::new(PREC),
    )
    .unwrap();
    UnimodalMap::logistic(fit.parameter).unwrap()
}

#[test]
fn tent_two_has_trivial_kneading() {
    let map = UnimodalMap::tent(fx("2")).unwrap();
    let seq = d_intervals(&map, 8, &DnOptions::default()).unwrap();
    assert_eq!(seq.cutting_times(), &[1, 2, 3, 4, 5, 6, 7, 8]);
    assert_eq!(seq.endpoints(1).unwrap(), (fx("0.5"), fx("1")));
    for n in 2..=8 {
        assert_eq!(seq.endpoints(n).unwrap(), (fx("0"), fx("1")));
    }
    let ex = kneading_from_map(&map, 8, &DnOptions::default()).unwrap();
    assert!(ex.q.iter().all(|v| *v == 0));
    assert!(ex.admissibility.is_admissible());
}

#[test]
fn logistic_four_is_flagged_degenerate() {
    let map = UnimodalMap::logistic(fx("4")).unwrap();
    let ex = kneading_from_map(&map, 6, &DnOptions::default()).unwrap();
    assert_eq!(ex.q, vec![0; 7]);
    let d = ex.degenerate.unwrap();
    assert_eq!((d.at, d.kind), (3, DegeneracyKind::FixedPoint));
}

#[test]
fn precondition_failures() {
    for lambda in ["1", "2.5", "3"] {
        let map = UnimodalMap::logistic(fx(lambda)).unwrap();
        assert!(
            matches!(
                d_intervals(&map, 5, &DnOptions::default()),
                Err(Error::Domain(_))
            ),
            "{lambda}"
        );
    }
    assert!(UnimodalMap::tent(fx("2.5")).is_err());
    assert!(matches!(
        d_intervals(
            &UnimodalMap::tent(fx("1.5")).unwrap(),
            0,
            &DnOptions::default()
        ),
        Err(Error::Domain(_))
    ));
}

#[test]
fn fibonacci_round_trip() {
    for k in [10u64, 14] {
        let fit = find_parameter(
            FamilyKind::Logistic,
            &KneadingMap::fibonacci(),
            k,
            &SearchOptions::new(PREC),
        )
        .unwrap();
        let map = UnimodalMap::logistic(fit.parameter.clone()).unwrap();
        let ex = kneading_from_map(&map, k, &DnOptions::default()).unwrap();
        let want: Vec<u64> = (0..=k).map(|i| i.saturating_sub(2)).collect();
        assert_eq!(ex.q, want);
        assert_eq!(&ex.cutting_times[..6], &[1, 2, 3, 5, 8, 13]);
        assert!(fit.bracket.0 <= fit.parameter && fit.parameter <= fit.bracket.1);
    }
}

#[test]
fn doubling_prefix_round_trip() {
    let target = KneadingMap::closed(ClosedForm::Doubling);
    let fit = find_parameter(FamilyKind::Logistic, &target, 8, &SearchOptions::new(PREC)).unwrap();
    assert_eq!(
        fit.extraction.cutting_times,
        (0..=8).map(|k| 1u64 << k).collect::<Vec<_>>()
    );
}

#[test]
fn tent_zero_target() {
    let fit = find_parameter(
        FamilyKind::Tent,
        &KneadingMap::closed(ClosedForm::Zero),
        8,
        &SearchOptions::new(PREC),
    )
    .unwrap();
    assert_eq!(fit.parameter, fx("2"));
}

#[test]
fn inadmissible_targets_are_rejected() {
    let bad = KneadingMap::table(vec![0, 0, 1, 0, 0, 0, 0]).unwrap();
    assert!(matches!(
        find_parameter(FamilyKind::Logistic, &bad, 4, &SearchOptions::new(PREC)),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn unbracketed_search_is_not_found() {
    let mut opts = SearchOptions::new(PREC);
    opts.range = Some((fx("3.95"), fx("4")));
    let r = find_parameter(
        FamilyKind::Logistic,
        &KneadingMap::closed(ClosedForm::Doubling),
        6,
        &opts,
    );
    assert!(matches!(r, Err(Error::NotFound(_))));
}

#[test]
fn extracted_differences_are_cutting_times() {
    let map = fibonacci_map(12);
    let seq = d_intervals(&map, 400, &DnOptions::default()).unwrap();
    let s = seq.cutting_times();
    for k in 1..s.len() {
        assert!(s[..k].contains(&(s[k] - s[k - 1])));
    }
    for n in 1..=400 {
        let (lo, hi) = seq.endpoints(n).unwrap();
        assert!(lo <= hi);
        assert_eq!(
            seq.is_cutting(n),
            lo <= *map.critical() && *map.critical() <= hi
        );
    }
}

#[test]
fn projection_of_finite_points() {
    let map = fibonacci_map(14);
    let q = KneadingMap::fibonacci();
    let opts = DnOptions::default();
    let zero = expand_u64(0, &q).unwrap();
    let p = project_point(&map, &q, &zero, 20, &opts).unwrap();
    assert_eq!(
        p.result,
        Projected::Point {
            sigma: 0,
            value: map.critical().clone()
        }
    );
    let three = expand_u64(3, &q).unwrap();
    let orbit = map.critical_orbit(3);
    let p = project_point(&map, &q, &three, 20, &opts).unwrap();
    assert_eq!(
        p.result,
        Projected::Point {
            sigma: 3,
            value: orbit[3].clone()
        }
    );
}

#[test]
fn projection_intervals_are_nested() {
    let map = fibonacci_map(16);
    let q = KneadingMap::fibonacci();
    let bits: Vec<bool> = (0..15).map(|k| k % 2 == 0).collect();
    let x = OdometerPoint::new(bits, PointKind::Truncated, &q).unwrap();
    let p = project_point(&map, &q, &x, 15, &DnOptions::default()).unwrap();
    assert_eq!(p.trace.len(), 8);
    let orbit = map.critical_orbit(p.trace.last().unwrap().sigma);
    for w in p.trace.windows(2) {
        assert!(w[1].lo >= w[0].lo && w[1].hi <= w[0].hi);
        assert!(w[1].length() < w[0].length());
    }
    for step in &p.trace {
        let c = &orbit[step.sigma as usize];
        assert!(step.lo <= *c && *c <= step.hi);
    }
    assert!(matches!(p.result, Projected::Interval { .. }));
}

#[test]
fn projection_rejects_mismatched_maps() {
    let map = UnimodalMap::logistic(fx("3.6")).unwrap();
    let q = KneadingMap::fibonacci();
    let x = expand_u64(200, &q).unwrap();
    assert!(matches!(
        project_point(&map, &q, &x, 20, &DnOptions::default()),
        Err(Error::Inconsistent(_))
    ));
}

#[test]
fn lyapunov_of_the_full_maps() {
    let tent = UnimodalMap::tent(fx("2")).unwrap();
    let r = lyapunov(&tent, &fx("0.3"), 200, &[100, 200]).unwrap();
    assert_eq!(r.trace[0], (100, 2f64.ln()));
    let m4 = UnimodalMap::logistic(fx("4")).unwrap();
    let r = lyapunov(&m4, &fx("0.1234567"), 100_000, &decade_checkpoints(100_000)).unwrap();
    assert!((r.average - 2f64.ln()).abs() < 0.02);
    assert_eq!(r.trace.len(), 5);
    let hit = lyapunov(&m4, &fx("0.5"), 10, &[]).unwrap();
    assert_eq!(hit.average, f64::NEG_INFINITY);
    assert!(lyapunov(&m4, &fx("1"), 10, &[]).is_err());
}

#[test]
fn custom_map_agrees_with_logistic() {
    let lambda = fx("3.83");
    let l2 = lambda.clone();
    let f = Arc::new(move |x: &Fixed| l2.mul(x).mul(&Fixed::one(PREC).sub(x)));
    let custom = UnimodalMap::custom("cubic-free logistic", f, None, fx("0.5")).unwrap();
    let builtin = UnimodalMap::logistic(lambda).unwrap();
    let a = kneading_from_map(&custom, 6, &DnOptions::default()).unwrap();
    let b = kneading_from_map(&builtin, 6, &DnOptions::default()).unwrap();
    assert_eq!(a.q, b.q);
    assert!(lyapunov(&custom, &fx("0.2"), 10, &[]).is_err());
    let bump = Arc::new(|x: &Fixed| x.clone());
    assert!(UnimodalMap::custom("identity", bump, None, fx("0.5")).is_err());
}

#[test]
fn hex_output_replays_exactly() {
    let map = fibonacci_map(10);
    let p = map.parameter().unwrap();
    assert_eq!(&Fixed::parse(&p.to_hex(), PREC).unwrap(), p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn logistic_cutting_times_satisfy_the_recursion(m in 0u32..1000) {
        // lambda in [3.6, 4)
        let lambda = Fixed::from_rational(&kneading_core::rational::Rational::new((3600 + 4 * m / 10).into(), 1000.into()), 128);
        let map = UnimodalMap::logistic(lambda).unwrap();
        if let Ok(seq) = d_intervals(&map, 300, &DnOptions { fragile_budget: usize::MAX, ..DnOptions::default() }) {
            let s = seq.cutting_times();
            for k in 1..s.len() {
                prop_assert!(s[..k].contains(&(s[k] - s[k - 1])));
            }
        }
    }
}
