//! Eventually periodic symbolic points.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::sft::{Sft, Symbol};
use crate::error::{Error, Result};

/// The bi-infinite sequence `(left)^inf . core . (right)^inf`, read so that
/// coordinate `i` is position `i + origin` of the concatenation, where position
/// 0 is the first core symbol (or the first right-cycle symbol when the core
/// is empty).
///
/// Points built through [`SymbolicPoint::new`] are kept in a canonical form:
/// primitive cycles, a core that cannot be absorbed into either tail, and for
/// purely periodic sequences an empty core with `origin == 0`. Two canonical
/// points are equal as sequences exactly when they are equal as values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolicPoint {
    pub left: Vec<Symbol>,
    pub core: Vec<Symbol>,
    pub right: Vec<Symbol>,
    pub origin: i64,
}

fn primitive_root(w: &[Symbol]) -> Vec<Symbol> {
    let n = w.len();
    for p in 1..=n {
        if n.is_multiple_of(p) && (p..n).all(|i| w[i] == w[i - p]) {
            return w[..p].to_vec();
        }
    }
    w.to_vec()
}

impl SymbolicPoint {
    /// Builds a point without checking admissibility and canonicalizes it.
    pub fn from_parts(left: Vec<Symbol>, core: Vec<Symbol>, right: Vec<Symbol>, origin: i64) -> Self {
        assert!(!left.is_empty() && !right.is_empty(), "cycles must be nonempty");
        SymbolicPoint { left, core, right, origin }.canonical_two_sided()
    }

    /// Builds and validates a point of `sft`.
    pub fn new(sft: &Sft, left: Vec<Symbol>, core: Vec<Symbol>, right: Vec<Symbol>, origin: i64) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidPoint("left and right cycles must be nonempty".into()));
        }
        let raw = SymbolicPoint { left, core, right, origin };
        raw.check_admissible(sft)?;
        Ok(raw.normalize(sft))
    }

    /// The periodic point `word^inf` with coordinate 0 at `word[0]`.
    pub fn periodic(word: &[Symbol]) -> Self {
        SymbolicPoint::from_parts(word.to_vec(), Vec::new(), word.to_vec(), 0)
    }

    /// `a^inf . w . b^inf` with coordinate 0 at the first symbol of `w`
    /// (or of `b` when `w` is empty), shifted so that coordinate 0 is at
    /// position `origin`.
    pub fn heteroclinic(left: &[Symbol], core: &[Symbol], right: &[Symbol], origin: i64) -> Self {
        SymbolicPoint::from_parts(left.to_vec(), core.to_vec(), right.to_vec(), origin)
    }

    /// Symbol at coordinate `i`.
    #[inline]
    pub fn at(&self, i: i64) -> Symbol {
        let j = i + self.origin;
        let c = self.core.len() as i64;
        if j < 0 {
            self.left[j.rem_euclid(self.left.len() as i64) as usize]
        } else if j < c {
            self.core[j as usize]
        } else {
            self.right[((j - c) as usize) % self.right.len()]
        }
    }

    /// Symbols at coordinates `lo..=hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..=hi).map(|i| self.at(i)).collect()
    }

    /// Absolute coordinate of the first core position.
    pub fn core_start(&self) -> i64 {
        -self.origin
    }

    /// Absolute coordinate where the right cycle begins repeating.
    pub fn core_end(&self) -> i64 {
        self.core.len() as i64 - self.origin
    }

    pub fn is_periodic(&self) -> bool {
        self.core.is_empty() && self.left == self.right && self.origin == 0
    }

    /// Least period, for purely periodic points.
    pub fn period(&self) -> Option<usize> {
        self.is_periodic().then_some(self.right.len())
    }

    /// Re-checks every adjacent pair, including junctions and wrap-arounds.
    pub fn check_admissible(&self, sft: &Sft) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidPoint(format!("{what} is not admissible")));
        let in_alphabet = |w: &[Symbol]| w.iter().all(|&s| (s as usize) < sft.alphabet_size());
        if !in_alphabet(&self.left) || !in_alphabet(&self.core) || !in_alphabet(&self.right) {
            return Err(Error::InvalidPoint("symbol outside the alphabet".into()));
        }
        if !sft.is_cyclically_admissible(&self.right) {
            return bad("right cycle");
        }
        if !sft.is_admissible(&self.core) {
            return bad("core");
        }
        let right_first = self.right[0];
        if let Some(&last) = self.core.last() {
            if !sft.allows(last, right_first) {
                return bad("core/right junction");
            }
        }
        if sft.is_two_sided() {
            if !sft.is_cyclically_admissible(&self.left) {
                return bad("left cycle");
            }
            let next = self.core.first().copied().unwrap_or(right_first);
            if !sft.allows(*self.left.last().unwrap(), next) {
                return bad("left junction");
            }
        } else if self.origin < 0 {
            return Err(Error::InvalidPoint("one-sided points must have origin >= 0".into()));
        }
        Ok(())
    }

    /// Canonical form for the system's sidedness.
    pub fn normalize(self, sft: &Sft) -> Self {
        if sft.is_two_sided() {
            self.canonical_two_sided()
        } else {
            self.canonical_one_sided()
        }
    }

    fn canonical_two_sided(self) -> Self {
        let SymbolicPoint { left, mut core, right, mut origin } = self;
        let mut left = primitive_root(&left);
        let mut right = primitive_root(&right);
        // absorb the end of the core into the right cycle
        while let Some(&last) = core.last() {
            if last != *right.last().unwrap() {
                break;
            }
            core.pop();
            right.rotate_right(1);
        }
        // absorb the start of the core into the left cycle
        while let Some(&first) = core.first() {
            if first != left[0] {
                break;
            }
            core.remove(0);
            left.rotate_left(1);
            origin -= 1;
        }
        if core.is_empty() && left == right {
            // purely periodic: put coordinate 0 at the start of the cycle
            let p = right.len() as i64;
            right.rotate_left(origin.rem_euclid(p) as usize);
            left = right.clone();
            origin = 0;
        }
        SymbolicPoint { left, core, right, origin }
    }

    fn canonical_one_sided(self) -> Self {
        // only coordinates >= 0 matter
        let end = self.core_end().max(0);
        let core: Vec<Symbol> = (0..end).map(|i| self.at(i)).collect();
        let period = primitive_root(&self.right).len() as i64;
        let right: Vec<Symbol> = (0..period).map(|k| self.at(end + k)).collect();
        let mut pt = SymbolicPoint { left: right.clone(), core, right, origin: 0 };
        while let Some(&last) = pt.core.last() {
            if last != *pt.right.last().unwrap() {
                break;
            }
            pt.core.pop();
            pt.right.rotate_right(1);
        }
        pt.left = pt.right.clone();
        pt
    }

    /// `f^k` of this point, for the given sidedness.
    pub fn shifted(&self, sft: &Sft, k: i64) -> Result<Self> {
        if !sft.is_two_sided() && k < 0 {
            return Err(Error::NegativeIterateOnOneSided(k));
        }
        let mut p = self.clone();
        p.origin += k;
        Ok(p.normalize(sft))
    }

    /// A bound `B` such that two points agreeing on all coordinates with
    /// `|i| <= B` (or `0 <= i <= B` one-sided) are equal.
    pub fn agreement_bound(&self, other: &SymbolicPoint) -> i64 {
        let lcm_r = (self.right.len() as i64).lcm(&(other.right.len() as i64));
        let lcm_l = (self.left.len() as i64).lcm(&(other.left.len() as i64));
        let right = self.core_end().max(other.core_end()).max(0) + lcm_r;
        let left = (-self.core_start()).max(-other.core_start()).max(0) + lcm_l;
        right.max(left)
    }

    /// Smallest `|i|` (over `i >= 0` when `one_sided`) with `self_i != other_i`,
    /// or `None` if the sequences coincide.
    pub fn first_disagreement(&self, other: &SymbolicPoint, one_sided: bool) -> Option<u64> {
        let bound = self.agreement_bound(other);
        for k in 0..=bound {
            if self.at(k) != other.at(k) {
                return Some(k as u64);
            }
            if !one_sided && k > 0 && self.at(-k) != other.at(-k) {
                return Some(k as u64);
            }
        }
        None
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = |v: &[Symbol]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        if self.is_periodic() {
            return write!(f, "({})^inf", w(&self.right));
        }
        write!(f, "({})^inf [{}] ({})^inf @{}", w(&self.left), w(&self.core), w(&self.right), self.origin)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::sft::Sidedness;

    #[test]
    fn canonical_forms_agree() {
        let a = SymbolicPoint::from_parts(vec![0], vec![0, 1, 1], vec![1], 1);
        let b = SymbolicPoint::from_parts(vec![0, 0], vec![], vec![1, 1], 0);
        assert_eq!(a, b);
        assert_eq!(a.at(-1), 0);
        assert_eq!(a.at(0), 1);
        let p = SymbolicPoint::periodic(&[0, 1, 0, 1]);
        assert_eq!(p.right, vec![0, 1]);
        assert_eq!(p.period(), Some(2));
        let q = SymbolicPoint::from_parts(vec![0, 1], vec![0, 1], vec![0, 1], 3);
        assert_eq!(q, SymbolicPoint::periodic(&[1, 0]));
    }

    #[test]
    fn admissibility_checks_junctions() {
        let golden = Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::TwoSided).unwrap();
        assert!(SymbolicPoint::new(&golden, vec![0], vec![1], vec![0], 0).is_ok());
        assert!(SymbolicPoint::new(&golden, vec![0], vec![1, 1], vec![0], 0).is_err());
        assert!(SymbolicPoint::new(&golden, vec![1], vec![], vec![0], 0).is_err());
        assert!(SymbolicPoint::new(&golden, vec![0, 1], vec![1], vec![0], 0).is_err());
        assert!(SymbolicPoint::new(&golden, vec![0], vec![], vec![1], 0).is_err());
    }

    #[test]
    fn one_sided_drops_the_past() {
        let sft = Sft::new(&[vec![1, 1], vec![1, 1]], Sidedness::OneSided).unwrap();
        let p = SymbolicPoint::new(&sft, vec![1], vec![1, 0, 1], vec![0], 0).unwrap();
        let q = p.shifted(&sft, 1).unwrap();
        assert_eq!(q.core, vec![0, 1]);
        assert_eq!(q.origin, 0);
        let r = p.shifted(&sft, 3).unwrap();
        assert_eq!(r, SymbolicPoint::new(&sft, vec![0], vec![], vec![0], 0).unwrap());
        assert!(p.shifted(&sft, -1).is_err());
    }

    #[test]
    fn disagreement_is_found_in_the_tails() {
        let a = SymbolicPoint::periodic(&[0]);
        let b = SymbolicPoint::heteroclinic(&[0], &[1], &[0], -2);
        assert_eq!(b.at(2), 1);
        assert_eq!(a.first_disagreement(&b, false), Some(2));
        let c = SymbolicPoint::heteroclinic(&[0], &[], &[0, 0, 1], 0);
        assert_eq!(a.first_disagreement(&c, false), Some(2));
        assert_eq!(a.first_disagreement(&a.clone(), false), None);
    }
}
