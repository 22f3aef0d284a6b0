mod common;

use gluing_orbit::classify::{covering_time, find_nonrecurrent, is_minimal, is_transitive, equicontinuity_modulus};
use gluing_orbit::entropy::{entropy_estimate, is_separated, separated_set};
use gluing_orbit::gluing::{decide_gluing_sft, periodic_gluing_sft, specification_profile_sft, specification_bound};
use gluing_orbit::shadowing::{find_shadow_sft, schedule, verify_shadow, CandidatePool, OrbitSequence};
use gluing_orbit::systems::{zoo, Point, Sft, Sidedness, SymbolicPoint, System};
use gluing_orbit::Distance;
use proptest::prelude::*;

fn symbolic_systems() -> Vec<System> {
    vec![
        zoo::full_shift(2),
        zoo::golden_mean(),
        zoo::three_state(),
        zoo::one_way(),
        System::sft("golden_one_sided", Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::OneSided).unwrap()),
    ]
}

fn pools() -> Vec<(System, Vec<Point>)> {
    symbolic_systems()
        .into_iter()
        .map(|s| {
            let p = CandidatePool::canonical(&s).unwrap().points;
            (s, p)
        })
        .collect()
}

fn pick<T: Clone>(v: &[T], i: prop::sample::Index) -> T {
    v[i.index(v.len())].clone()
}

/// `d(x, y)` straight from the definition, scanning `|i| <= 64`.
fn direct_distance(sft: &Sft, x: &Point, y: &Point) -> Distance {
    let (x, y) = (x.as_symbolic().unwrap(), y.as_symbolic().unwrap());
    let coords: Vec<i64> = if sft.is_two_sided() {
        (0..=64).flat_map(|i| [i, -i]).collect()
    } else {
        (0..=64).collect()
    };
    coords.into_iter().find(|&i| x.at(i) != y.at(i)).map_or(Distance::ZERO, |i| Distance::pow2(i.unsigned_abs() as u32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn shift_metric_axioms(s in 0usize..5, a: prop::sample::Index, b: prop::sample::Index, c: prop::sample::Index) {
        let (sys, pool) = &pools()[s];
        let (x, y, z) = (pick(pool, a), pick(pool, b), pick(pool, c));
        let d = |p: &Point, q: &Point| sys.distance(p, q).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &y).is_zero(), x == y);
        prop_assert!(d(&x, &z) <= d(&x, &y).max(d(&y, &z)));
        prop_assert_eq!(d(&x, &y), direct_distance(sys.as_sft().unwrap(), &x, &y));
    }

    #[test]
    fn grid_metric_axioms(g in 0usize..7, a: u64, b: u64, c: u64) {
        let sys = &zoo::grids()[g];
        let n = sys.as_grid().unwrap().size();
        let (x, y, z) = (Point::Grid(a % n), Point::Grid(b % n), Point::Grid(c % n));
        let d = |p: &Point, q: &Point| sys.distance(p, q).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert_eq!(d(&x, &y).is_zero(), x == y);
        let sum = d(&x, &y).to_rational().unwrap() + d(&y, &z).to_rational().unwrap();
        prop_assert!(d(&x, &z).to_rational().unwrap() <= sum);
    }

    #[test]
    fn iterates_compose(s in 0usize..5, a: prop::sample::Index, j in -8i64..8, k in -8i64..8) {
        let (sys, pool) = &pools()[s];
        let x = pick(pool, a);
        let two_sided = sys.as_sft().unwrap().is_two_sided();
        let (j, k) = if two_sided { (j, k) } else { (j.abs(), k.abs()) };
        let lhs = sys.apply_map(&sys.apply_map(&x, j).unwrap(), k).unwrap();
        prop_assert_eq!(&lhs, &sys.apply_map(&x, j + k).unwrap());
        sys.check_point(&lhs).unwrap();
    }

    #[test]
    fn iterated_distance_is_shifted_disagreement(s in 0usize..5, a: prop::sample::Index, b: prop::sample::Index, k in 0i64..8) {
        let (sys, pool) = &pools()[s];
        let (x, y) = (pick(pool, a), pick(pool, b));
        let (px, py) = (x.as_symbolic().unwrap(), y.as_symbolic().unwrap());
        let lo = if sys.as_sft().unwrap().is_two_sided() { -64 } else { k };
        let expected = (lo..=64 + k)
            .filter(|&i| px.at(i) != py.at(i))
            .map(|i| (i - k).unsigned_abs())
            .min()
            .map_or(Distance::ZERO, |m| Distance::pow2(m as u32));
        let d = sys.distance(&sys.apply_map(&x, k).unwrap(), &sys.apply_map(&y, k).unwrap()).unwrap();
        prop_assert_eq!(d, expected);
    }

    #[test]
    fn schedule_is_monotone(lengths in prop::collection::vec(1usize..6, 1..5), gaps in prop::collection::vec(1usize..6, 4)) {
        let c = OrbitSequence::from_pairs(lengths.iter().map(|&m| (Point::Grid(0), m))).unwrap();
        let gap = &gaps[..lengths.len() - 1];
        let s = schedule(&c, gap).unwrap();
        for j in 0..gap.len() {
            prop_assert_eq!(s[j + 1] - s[j], (lengths[j] + gap[j]) as i64 - 1);
            prop_assert!(s[j + 1] - s[j] >= lengths[j] as i64);
        }
    }

    #[test]
    fn witnesses_verify_and_survive_larger_eps(
        s in 0usize..5,
        pts in prop::collection::vec((any::<prop::sample::Index>(), 1usize..4), 2..4),
        gaps in prop::collection::vec(1usize..6, 3),
        r in 0u32..3,
    ) {
        let (sys, pool) = &pools()[s];
        let sft = sys.as_sft().unwrap();
        let c = OrbitSequence::from_pairs(pts.iter().map(|(i, m)| (pick(pool, *i), *m))).unwrap();
        let gap = &gaps[..c.rank() - 1];
        if let Some(z) = find_shadow_sft(sft, &c, gap, r).unwrap().into_witness() {
            z.check_admissible(sft).unwrap();
            let z = Point::Symbolic(z);
            for eps in [Distance::pow2(r), Distance::pow2(r).times(3).halved(1), Distance::ONE.times(2)] {
                if eps >= Distance::pow2(r) {
                    prop_assert!(verify_shadow(sys, &c, gap, &z, eps).unwrap().is_accepted());
                }
            }
        }
    }

    #[test]
    fn gaps_past_twice_the_radius_are_shadowable_on_full_shifts(
        pts in prop::collection::vec((any::<prop::sample::Index>(), 1usize..4), 2..4),
        extra in prop::collection::vec(0usize..4, 3),
        r in 0u32..3,
    ) {
        let full = zoo::full_shift(2);
        let pool = CandidatePool::canonical(&full).unwrap().points;
        let sft = full.as_sft().unwrap();
        let c = OrbitSequence::from_pairs(pts.iter().map(|(i, m)| (pick(&pool, *i), *m))).unwrap();
        let gap: Vec<usize> = extra[..c.rank() - 1].iter().map(|e| 2 * r as usize + 1 + e).collect();
        let z = find_shadow_sft(sft, &c, &gap, r).unwrap().into_witness();
        prop_assert!(z.is_some());
        let z = Point::Symbolic(z.unwrap());
        prop_assert!(verify_shadow(&full, &c, &gap, &z, Distance::pow2(r)).unwrap().is_accepted());
    }

    #[test]
    fn separated_sets_reverify(g in 0usize..7, n in 1usize..6, k in 1u32..5) {
        let sys = &zoo::grids()[g];
        if sys.as_grid().unwrap().size() > 1 << 10 {
            return Ok(());
        }
        let set = separated_set(sys, n, Distance::pow2(k)).unwrap();
        prop_assert!(!set.is_empty());
        prop_assert!(is_separated(sys, &set).unwrap());
    }

    #[test]
    fn covering_time_is_monotone(g in 0usize..7, a in 1u64..64, b in 1u64..64) {
        let sys = &zoo::grids()[g];
        let (lo, hi) = (Distance::ratio(a.min(b), 64), Distance::ratio(a.max(b), 64));
        match (covering_time(sys, lo), covering_time(sys, hi)) {
            (Ok(nl), Ok(nh)) => prop_assert!(nh <= nl),
            (Err(e), Err(f)) => prop_assert_eq!(e, f),
            other => prop_assert!(false, "{other:?}"),
        }
    }
}

#[test]
fn entropy_tables_are_monotone() {
    let eps = [Distance::pow2(1), Distance::pow2(2), Distance::pow2(3)];
    for sys in zoo::sfts().into_iter().chain([zoo::odometer(8), zoo::rotation(12, 4), zoo::square_map(1 << 8)]) {
        let rep = entropy_estimate(&sys, &eps, 8).unwrap();
        for e in eps {
            for n in 1..8 {
                assert!(rep.s(n, e).unwrap() <= rep.s(n + 1, e).unwrap(), "{} n={n}", sys.label);
            }
        }
        for n in 1..=8 {
            for w in eps.windows(2) {
                assert!(rep.s(n, w[0]).unwrap() <= rep.s(n, w[1]).unwrap(), "{} n={n}", sys.label);
            }
        }
    }
}

#[test]
fn specification_never_beats_gluing() {
    for sys in zoo::sfts() {
        let sft = sys.as_sft().unwrap();
        if !sft.is_primitive() {
            continue;
        }
        let glue = decide_gluing_sft(&sys, 1, 5, 2).unwrap();
        let spec = specification_profile_sft(&sys, 1, 5, 2, specification_bound(sft, 1), 4).unwrap();
        assert!(spec.m_uniform >= glue.m_required, "{}", sys.label);
    }
}

#[test]
fn gluing_verdict_matches_transitivity() {
    for sys in zoo::sfts() {
        let glue = decide_gluing_sft(&sys, 1, 5, 2).unwrap();
        let t = is_transitive(&sys, 8);
        assert_eq!(glue.m_required.is_finite(), t.is_yes(), "{}", sys.label);
        assert!(t.evidence.unwrap().validate(&sys).unwrap());
    }
}

#[test]
fn periodic_witnesses_have_the_stated_period() {
    for sys in [zoo::full_shift(2), zoo::golden_mean(), zoo::three_state()] {
        let p = periodic_gluing_sft(&sys, 1, 3, 2).unwrap();
        for row in &p.instances {
            let (Some(gap), Some(t), Some(z)) = (&row.gap, row.closing, &row.witness) else { continue };
            let lengths: Vec<usize> = row.instance.split(" | ").map(|s| s.rsplit(':').next().unwrap().parse().unwrap()).collect();
            let mut period = 0;
            for (j, m) in lengths.iter().enumerate() {
                period += if j < gap.len() { m + gap[j] - 1 } else { m + t };
            }
            assert_eq!(&sys.apply_map(z, period as i64).unwrap(), z, "{}", row.instance);
        }
    }
}

#[test]
fn certificates_revalidate_across_the_zoo() {
    let systems: Vec<System> = zoo::sfts().into_iter().chain(zoo::grids()).chain([zoo::thue_morse(128)]).collect();
    for sys in &systems {
        for v in [is_transitive(sys, 16), is_minimal(sys, 16)] {
            if let Some(ev) = &v.evidence {
                assert!(ev.validate(sys).unwrap(), "{} {ev:?}", sys.label);
            }
        }
    }
}

#[test]
fn equicontinuous_transitive_systems_are_minimal() {
    for sys in zoo::sfts().into_iter().chain(zoo::grids()) {
        let pool = CandidatePool::canonical(&sys).unwrap();
        let eq = equicontinuity_modulus(&sys, Distance::pow2(2), 32, &pool).unwrap();
        if eq.verdict.is_yes() && is_transitive(&sys, 8).is_yes() {
            assert!(is_minimal(&sys, 8).is_yes(), "{}", sys.label);
        }
    }
}

#[test]
fn gluing_without_minimality_gives_nonrecurrence() {
    for sys in zoo::sfts() {
        let glue = decide_gluing_sft(&sys, 1, 5, 2).unwrap();
        let min = is_minimal(&sys, 8);
        if glue.m_required.is_finite() && min.is_no() {
            assert!(min.exact);
            let pool = CandidatePool::canonical(&sys).unwrap();
            assert!(find_nonrecurrent(&sys, Distance::pow2(1), &pool).unwrap().is_some(), "{}", sys.label);
        }
    }
}

#[test]
fn widening_a_short_gap_can_break_shadowing() {
    let full = zoo::full_shift(2);
    let sft = full.as_sft().unwrap();
    let x = Point::Symbolic(SymbolicPoint::periodic(&[0, 1]));
    let c = OrbitSequence::from_pairs([(x.clone(), 2), (x, 1)]).unwrap();
    assert!(find_shadow_sft(sft, &c, &[1], 1).unwrap().witness().is_some());
    assert!(find_shadow_sft(sft, &c, &[2], 1).unwrap().witness().is_none());
    assert!(find_shadow_sft(sft, &c, &[3], 1).unwrap().witness().is_some());
}
