//! Substitution subshifts, represented through a long fixed-point prefix and
//! the factor language it carries.

use std::collections::{HashMap, HashSet};

use super::sft::Symbol;
use crate::error::{Error, Result};

pub const DEFAULT_LANGUAGE_LENGTH: usize = 64;

/// A non-erasing substitution together with a prefix of `sigma^n(seed)` long
/// enough that every factor up to `language_length` occurs in both halves of
/// it (so the factor set has stopped growing).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstitutionSubshift {
    rules: Vec<Vec<Symbol>>,
    seed: Symbol,
    language_length: usize,
    word: Vec<Symbol>,
}

impl SubstitutionSubshift {
    pub fn new(rules: Vec<Vec<Symbol>>, seed: Symbol, language_length: usize) -> Result<Self> {
        let k = rules.len();
        if k == 0 || k > 256 {
            return Err(Error::spec("parameters.rules", "need between 1 and 256 rules"));
        }
        for (i, r) in rules.iter().enumerate() {
            if r.is_empty() {
                return Err(Error::spec(format!("parameters.rules[{i}]"), "erasing rule (empty image)"));
            }
            if let Some(j) = r.iter().position(|&s| s as usize >= k) {
                return Err(Error::spec(format!("parameters.rules[{i}][{j}]"), "symbol outside the alphabet"));
            }
        }
        if seed as usize >= k {
            return Err(Error::spec("parameters.seed", "seed symbol outside the alphabet"));
        }
        if language_length == 0 {
            return Err(Error::spec("parameters.language_length", "must be positive"));
        }
        let mut word = vec![seed];
        // grow until the factor set of the first half equals that of the whole
        // word at every length up to language_length
        let mut target = (language_length * 64).max(1 << 12);
        loop {
            while word.len() < target {
                let next: Vec<Symbol> = word.iter().flat_map(|&s| rules[s as usize].iter().copied()).collect();
                if next.len() == word.len() {
                    return Err(Error::spec("parameters.rules", "substitution does not grow from the seed"));
                }
                word = next;
            }
            word.truncate(target);
            let half = &word[..target / 2];
            let stable = [language_length, language_length / 2 + 1, 1]
                .iter()
                .all(|&len| factor_set(half, len) == factor_set(&word, len));
            if stable {
                break;
            }
            if target > 1 << 24 {
                return Err(Error::spec("parameters.rules", "factor language does not stabilize"));
            }
            target *= 2;
        }
        Ok(SubstitutionSubshift { rules, seed, language_length, word })
    }

    pub fn thue_morse(language_length: usize) -> Self {
        SubstitutionSubshift::new(vec![vec![0, 1], vec![1, 0]], 0, language_length).expect("Thue-Morse is valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[Vec<Symbol>] {
        &self.rules
    }

    pub fn seed(&self) -> Symbol {
        self.seed
    }

    pub fn language_length(&self) -> usize {
        self.language_length
    }

    /// The generating word (a prefix of a fixed point or of an iterate).
    pub fn word(&self) -> &[Symbol] {
        &self.word
    }

    /// Factors of length `len`, sorted.
    pub fn factors(&self, len: usize) -> Vec<Vec<Symbol>> {
        let mut v: Vec<Vec<Symbol>> = factor_set(&self.word, len).into_iter().map(|w| w.to_vec()).collect();
        v.sort();
        v
    }

    pub fn is_factor(&self, w: &[Symbol]) -> bool {
        w.is_empty() || self.word.windows(w.len()).any(|x| x == w)
    }

    /// Sorted start positions of every factor of length `len` in the
    /// generating word.
    pub fn occurrences(&self, len: usize) -> HashMap<&[Symbol], Vec<usize>> {
        let mut map: HashMap<&[Symbol], Vec<usize>> = HashMap::new();
        for (i, w) in self.word.windows(len).enumerate() {
            map.entry(w).or_default().push(i);
        }
        map
    }

    /// Recurrence function: the least `R` such that every factor of length `R`
    /// contains every factor of length `len`, measured over the generating
    /// word. `None` if some factor does not recur within the word.
    pub fn recurrence(&self, len: usize) -> Option<usize> {
        let occ = self.occurrences(len);
        let n = self.word.len();
        let mut worst = 0usize;
        let mut last_seen = Vec::with_capacity(occ.len());
        for positions in occ.values() {
            // the stretch before the first occurrence counts as a gap
            let mut prev = None;
            for &p in positions {
                let gap = match prev {
                    None => p + 1,
                    Some(q) => p - q,
                };
                worst = worst.max(gap);
                prev = Some(p);
            }
            last_seen.push(prev?);
        }
        let bound = worst + len - 1;
        // a window of length `bound` after the last occurrence would miss it
        if last_seen.iter().any(|&q| n - q > bound) {
            return None;
        }
        Some(bound)
    }
}

fn factor_set(word: &[Symbol], len: usize) -> HashSet<&[Symbol]> {
    if len == 0 || len > word.len() {
        return HashSet::new();
    }
    word.windows(len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thue_morse_prefix() {
        let tm = SubstitutionSubshift::thue_morse(16);
        assert_eq!(&tm.word()[..16], &[0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]);
        // complexity of Thue-Morse: 2, 4, 6, 10, 12, 16, 20, 22
        let counts: Vec<usize> = (1..=8).map(|n| tm.factors(n).len()).collect();
        assert_eq!(counts, vec![2, 4, 6, 10, 12, 16, 20, 22]);
        assert!(!tm.is_factor(&[0, 0, 0]));
        assert!(tm.is_factor(&[0, 0, 1, 1]));
    }

    #[test]
    fn recurrence_brute_force() {
        let tm = SubstitutionSubshift::thue_morse(16);
        for len in 1..=4 {
            let r = tm.recurrence(len).unwrap();
            let factors = tm.factors(len);
            // every window of length r contains every factor, and some window
            // of length r - 1 misses one
            let contains_all = |win: &[u8]| factors.iter().all(|f| win.windows(len).any(|x| x == &f[..]));
            let word = &tm.word()[..2048];
            assert!(word.windows(r).all(contains_all), "len {len}");
            assert!(!word.windows(r - 1).all(contains_all), "len {len}");
        }
    }

    #[test]
    fn rejects_erasing_rules() {
        assert!(SubstitutionSubshift::new(vec![vec![0, 1], vec![]], 0, 8).is_err());
        assert!(SubstitutionSubshift::new(vec![vec![0, 2], vec![1]], 0, 8).is_err());
        assert!(SubstitutionSubshift::new(vec![vec![0], vec![1]], 0, 8).is_err());
    }
}
