//! Brute-force oracles shared by the integration tests and the acceptance
//! runner. They enumerate words directly and never call the library's own
//! word counting or shadow search.
#![allow(dead_code)]

use gluing_orbit::shadowing::OrbitSequence;
use gluing_orbit::systems::{Sft, Symbol, SymbolicPoint};

/// Calls `visit` on every admissible word of length `len`, by depth-first
/// extension over the whole alphabet.
pub fn for_each_word(sft: &Sft, len: usize, visit: &mut impl FnMut(&[Symbol])) {
    fn go(sft: &Sft, len: usize, word: &mut Vec<Symbol>, visit: &mut impl FnMut(&[Symbol])) {
        if word.len() == len {
            visit(word);
            return;
        }
        for b in 0..sft.alphabet_size() as Symbol {
            if word.last().is_none_or(|&a| sft.allows(a, b)) {
                word.push(b);
                go(sft, len, word, visit);
                word.pop();
            }
        }
    }
    go(sft, len, &mut Vec::with_capacity(len), visit);
}

pub fn count_words(sft: &Sft, len: usize) -> u128 {
    let mut n = 0u128;
    for_each_word(sft, len, &mut |_| n += 1);
    n
}

/// Number of admissible words on the window that decides strict
/// `eps`-separation over `n` steps: coordinates `-rho..n-1+rho`
/// (one-sided: `0..n-1+rho`), with `rho` the largest `j` such that
/// `2^-j > eps`.
pub fn separated_count(sft: &Sft, n: usize, rho: usize) -> u128 {
    let len = if sft.is_two_sided() { n + 2 * rho } else { n + rho };
    count_words(sft, len)
}

/// Start times of the segments.
pub fn starts(c: &OrbitSequence, gap: &[usize]) -> Vec<i64> {
    let mut s = vec![0i64];
    for (seg, g) in c.segments().iter().zip(gap) {
        s.push(s.last().unwrap() + (seg.length + g) as i64 - 1);
    }
    s
}

/// Whether some admissible word on the full constrained window meets every
/// shadowing constraint at `eps = 2^-r`: coordinate `s_j + l + i` must carry
/// `x_j[l + i]` for `l < m_j` and `|i| <= r` (`0 <= i <= r` one-sided).
/// Every admissible word extends to a point, so this decides existence.
pub fn shadow_exists(sft: &Sft, c: &OrbitSequence, gap: &[usize], r: u32) -> bool {
    let r = r as i64;
    let s = starts(c, gap);
    let last = c.segments().len() - 1;
    let lo = if sft.is_two_sided() { -r } else { 0 };
    let hi = s[last] + c.segments()[last].length as i64 - 1 + r;
    let ilo = if sft.is_two_sided() { -r } else { 0 };
    let mut constraints = Vec::new();
    for (j, seg) in c.segments().iter().enumerate() {
        let x: &SymbolicPoint = seg.point.as_symbolic().expect("symbolic segment");
        for l in 0..seg.length as i64 {
            for i in ilo..=r {
                constraints.push(((s[j] + l + i - lo) as usize, x.at(l + i)));
            }
        }
    }
    let mut found = false;
    for_each_word(sft, (hi - lo + 1) as usize, &mut |w| {
        if !found && constraints.iter().all(|&(k, a)| w[k] == a) {
            found = true;
        }
    });
    found
}

/// Window length `s_k + m_k + 2r` that [`shadow_exists`] enumerates.
pub fn window_len(c: &OrbitSequence, gap: &[usize], r: u32) -> usize {
    let s = starts(c, gap);
    (*s.last().unwrap() as usize) + c.segments().last().unwrap().length + 2 * r as usize
}

/// Strict `(n, eps)`-separation of every pair, from `apply_map` and
/// `distance` alone.
pub fn pairwise_separated(system: &gluing_orbit::System, points: &[gluing_orbit::Point], n: usize, eps: gluing_orbit::Distance) -> bool {
    let orbits: Vec<Vec<gluing_orbit::Point>> = points
        .iter()
        .map(|p| (0..n as i64).map(|k| system.apply_map(p, k).unwrap()).collect())
        .collect();
    orbits.iter().enumerate().all(|(i, a)| {
        orbits[i + 1..].iter().all(|b| a.iter().zip(b).any(|(x, y)| system.distance(x, y).unwrap() > eps))
    })
}
