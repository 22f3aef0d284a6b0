//! Deterministic families of symbolic points: periodic orbits of small period
//! and heteroclinic connections between them.

use super::point::SymbolicPoint;
use super::sft::{Sft, Symbol};

/// Lyndon words of length exactly `n` over `k` letters, in lexicographic
/// order (Fredricksen-Kessler-Maiorana).
pub fn lyndon_words(k: usize, n: usize) -> Vec<Vec<Symbol>> {
    let mut out = Vec::new();
    if n == 0 || k == 0 {
        return out;
    }
    let mut w: Vec<usize> = vec![0];
    loop {
        if w.len() == n {
            out.push(w.iter().map(|&s| s as Symbol).collect());
        }
        // extend periodically to length n, then increment
        let m = w.len();
        while w.len() < n {
            let s = w[w.len() - m];
            w.push(s);
        }
        while let Some(&last) = w.last() {
            if last + 1 < k {
                break;
            }
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(last) => *last += 1,
        }
    }
    out
}

/// Cyclically admissible Lyndon words of length `n`: one representative per
/// periodic orbit of least period `n`.
pub fn orbit_representatives(sft: &Sft, n: usize) -> Vec<Vec<Symbol>> {
    lyndon_words(sft.alphabet_size(), n).into_iter().filter(|w| sft.is_cyclically_admissible(w)).collect()
}

/// Every periodic point with least period at most `max_period`, ordered by
/// period, then orbit representative, then shift.
pub fn periodic_points(sft: &Sft, max_period: usize) -> Vec<SymbolicPoint> {
    let mut out = Vec::new();
    for d in 1..=max_period {
        for w in orbit_representatives(sft, d) {
            for s in 0..d {
                let mut v = w.clone();
                v.rotate_left(s);
                out.push(SymbolicPoint::periodic(&v));
            }
        }
    }
    out
}

/// `a^inf . c . b^inf`, where `c` is the shortest connector from the last
/// symbol of `a` to the first symbol of `b`, with coordinate 0 at the first
/// symbol after the left tail. `None` when `b` is unreachable from `a`.
pub fn heteroclinic(sft: &Sft, a: &[Symbol], b: &[Symbol]) -> Option<SymbolicPoint> {
    let last = *a.last()?;
    let first = *b.first()?;
    let core = if sft.allows(last, first) {
        Vec::new()
    } else {
        let path = sft.shortest_path(last, first)?;
        path[..path.len() - 1].to_vec()
    };
    Some(SymbolicPoint::from_parts(a.to_vec(), core, b.to_vec(), 0))
}

/// Heteroclinic points between distinct periodic orbits of least period at
/// most `max_period`, each shifted by every origin in `-spread..=spread`.
pub fn heteroclinic_points(sft: &Sft, max_period: usize, spread: i64) -> Vec<SymbolicPoint> {
    let reps: Vec<Vec<Symbol>> = (1..=max_period).flat_map(|d| orbit_representatives(sft, d)).collect();
    let mut out = Vec::new();
    for a in &reps {
        for b in &reps {
            if a == b {
                continue;
            }
            if let Some(p) = heteroclinic(sft, a, b) {
                for o in -spread..=spread {
                    let mut q = p.clone();
                    q.origin += o;
                    out.push(q.normalize(sft));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::sft::Sidedness;

    fn brute_lyndon(k: usize, n: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        let total = k.pow(n as u32);
        for mut code in 0..total {
            let mut w = vec![0 as Symbol; n];
            for i in (0..n).rev() {
                w[i] = (code % k) as Symbol;
                code /= k;
            }
            let strictly_least = (1..n).all(|s| {
                let mut r = w.clone();
                r.rotate_left(s);
                w < r
            });
            if strictly_least {
                out.push(w);
            }
        }
        out
    }

    #[test]
    fn lyndon_matches_brute_force() {
        for k in 1..=3 {
            for n in 1..=6 {
                assert_eq!(lyndon_words(k, n), brute_lyndon(k, n), "k={k} n={n}");
            }
        }
        // necklace counts for k = 2: 2, 1, 2, 3, 6, 9
        let counts: Vec<usize> = (1..=6).map(|n| lyndon_words(2, n).len()).collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9]);
    }

    #[test]
    fn golden_mean_periodic_points() {
        let g = Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::TwoSided).unwrap();
        // least period 1: 0; 2: 01; 3: 001
        assert_eq!(periodic_points(&g, 3).len(), 1 + 2 + 3);
        for p in periodic_points(&g, 4) {
            assert!(p.check_admissible(&g).is_ok());
        }
    }

    #[test]
    fn heteroclinics_are_admissible() {
        let one_way = Sft::new(&[vec![1, 1], vec![0, 1]], Sidedness::TwoSided).unwrap();
        let h = heteroclinic_points(&one_way, 2, 1);
        assert_eq!(h.len(), 3);
        assert!(heteroclinic(&one_way, &[1], &[0]).is_none());
        let g = Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::TwoSided).unwrap();
        for p in heteroclinic_points(&g, 2, 3) {
            assert!(p.check_admissible(&g).is_ok(), "{p}");
        }
    }
}
