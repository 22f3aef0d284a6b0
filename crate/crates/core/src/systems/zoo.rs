//! Built-in named systems.

use super::grid::GridSystem;
use super::sft::{Sft, Sidedness};
use super::substitution::SubstitutionSubshift;
use super::{System, SystemKind};

fn sft(rows: &[&[u8]]) -> Sft {
    let m: Vec<Vec<u8>> = rows.iter().map(|r| r.to_vec()).collect();
    Sft::new(&m, Sidedness::TwoSided).expect("zoo matrix is valid")
}

pub fn full_shift(k: usize) -> System {
    System::sft(format!("full{k}"), Sft::full(k))
}

/// The word `11` is forbidden.
pub fn golden_mean() -> System {
    System::sft("golden_mean", sft(&[&[1, 1], &[1, 0]]))
}

/// A primitive three-state graph `0 -> 1 -> 2 -> {0, 1}`.
pub fn three_state() -> System {
    System::sft("three_state", sft(&[&[0, 1, 0], &[0, 0, 1], &[1, 1, 0]]))
}

/// The single periodic orbit `(01)^inf`: irreducible with period 2.
pub fn two_cycle() -> System {
    System::sft("two_cycle", sft(&[&[0, 1], &[1, 0]]))
}

/// Two fixed points and nothing else.
pub fn disjoint_fixed() -> System {
    System::sft("disjoint_fixed", sft(&[&[1, 0], &[0, 1]]))
}

/// `0^inf`, `1^inf` and the heteroclinic orbits `0^inf 1^inf`.
pub fn one_way() -> System {
    System::sft("one_way", sft(&[&[1, 1], &[0, 1]]))
}

pub fn single_point() -> System {
    System::sft("single", sft(&[&[1]]))
}

pub fn golden_times_full2() -> System {
    let g = sft(&[&[1, 1], &[1, 0]]);
    System::sft("golden_x_full2", g.product(&Sft::full(2)).expect("small product"))
}

pub fn rotation(size: u64, step: u64) -> System {
    System::grid(format!("rotation_{size}_{step}"), GridSystem::rotation(size, step))
}

pub fn odometer(depth: u32) -> System {
    System::grid(format!("odometer_{depth}"), GridSystem::odometer(depth))
}

pub fn square_map(size: u64) -> System {
    System::grid(format!("square_map_{size}"), GridSystem::square_map(size))
}

pub fn thue_morse(language_length: usize) -> System {
    System::new("thue_morse", SystemKind::Substitution(SubstitutionSubshift::thue_morse(language_length)))
}

/// Every SFT in the zoo.
pub fn sfts() -> Vec<System> {
    vec![
        full_shift(2),
        full_shift(3),
        golden_mean(),
        three_state(),
        two_cycle(),
        disjoint_fixed(),
        one_way(),
        single_point(),
        golden_times_full2(),
    ]
}

/// Every finite grid system in the zoo.
pub fn grids() -> Vec<System> {
    vec![rotation(12, 4), rotation(7, 3), odometer(5), odometer(8), odometer(10), square_map(1 << 10), square_map(1 << 16)]
}

/// Looks a system up by its label.
pub fn by_label(label: &str) -> Option<System> {
    if label == "thue_morse" {
        return Some(thue_morse(super::substitution::DEFAULT_LANGUAGE_LENGTH));
    }
    sfts().into_iter().chain(grids()).find(|s| s.label == label)
}
