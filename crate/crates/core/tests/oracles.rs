mod common;

use gluing_orbit::entropy::{is_separated, separated_set, SeparationMethod};
use gluing_orbit::shadowing::{find_shadow_sft, verify_shadow, CandidatePool, OrbitSequence};
use gluing_orbit::systems::{zoo, Point, Sft, Sidedness, System};
use gluing_orbit::Distance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn one_sided_golden() -> System {
    System::sft("golden_one_sided", Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::OneSided).unwrap())
}

fn shadow_systems() -> Vec<System> {
    vec![
        zoo::full_shift(2),
        zoo::golden_mean(),
        zoo::three_state(),
        zoo::one_way(),
        zoo::two_cycle(),
        one_sided_golden(),
    ]
}

#[test]
fn shadow_search_matches_window_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let systems = shadow_systems();
    let pools: Vec<Vec<Point>> = systems.iter().map(|s| CandidatePool::canonical(s).unwrap().points).collect();
    let (mut found, mut tested) = (0, 0);
    while tested < 300 {
        let i = rng.gen_range(0..systems.len());
        let sft = systems[i].as_sft().unwrap();
        let r = rng.gen_range(0..=2u32);
        let k = rng.gen_range(2..=3usize);
        let c = OrbitSequence::from_pairs(
            (0..k).map(|_| (pools[i][rng.gen_range(0..pools[i].len())].clone(), rng.gen_range(1..=3usize))),
        )
        .unwrap();
        let gap: Vec<usize> = (1..k).map(|_| rng.gen_range(1..=4)).collect();
        if common::window_len(&c, &gap, r) > 16 {
            continue;
        }
        tested += 1;
        let search = find_shadow_sft(sft, &c, &gap, r).unwrap();
        let brute = common::shadow_exists(sft, &c, &gap, r);
        assert_eq!(search.witness().is_some(), brute, "{} r={r} {} gap={gap:?}", systems[i].label, c.descriptor());
        if let Some(z) = search.into_witness() {
            found += 1;
            z.check_admissible(sft).unwrap();
            let v = verify_shadow(&systems[i], &c, &gap, &Point::Symbolic(z), Distance::pow2(r)).unwrap();
            assert!(v.is_accepted(), "{v:?}");
        }
    }
    // both outcomes must be exercised
    assert!(found > 30 && found < 270, "{found}");
}

#[test]
fn separated_counts_match_word_enumeration() {
    for sys in zoo::sfts().into_iter().chain([one_sided_golden()]) {
        let sft = sys.as_sft().unwrap();
        let a = sft.alphabet_size() as f64;
        for r in 1..=3u32 {
            let rho = r as usize - 1;
            for n in 1..=(18 - 2 * r as usize) {
                let window = n + 2 * rho;
                if a.powi(window as i32) > (1u64 << 20) as f64 {
                    break;
                }
                let set = separated_set(&sys, n, Distance::pow2(r)).unwrap();
                assert_eq!(set.method, SeparationMethod::Exact);
                assert_eq!(set.len() as u128, common::separated_count(sft, n, rho), "{} n={n} r={r}", sys.label);
                if set.len() <= 512 {
                    assert!(is_separated(&sys, &set).unwrap());
                }
                for p in &set.points {
                    sys.check_point(p).unwrap();
                }
            }
        }
    }
}
