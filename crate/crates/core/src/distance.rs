//! Exact nonnegative distances.
//!
//! Every metric in this crate takes values of the form `num / (den * 2^shift)`:
//! shift metrics produce powers of two, circle grids produce multiples of
//! `1/G`, and the odometer produces powers of two again. [`Distance`] keeps that
//! form exactly so that comparisons against a radius never round.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact rational type used for averages and bump-function values.
pub type Rational = Ratio<i128>;

/// A nonnegative rational `num / (den * 2^shift)`, kept in lowest terms with
/// `den` odd.
#[derive(Clone, Copy, Debug)]
pub struct Distance {
    num: u64,
    den: u64,
    shift: u32,
}

impl Distance {
    pub const ZERO: Distance = Distance { num: 0, den: 1, shift: 0 };
    pub const ONE: Distance = Distance { num: 1, den: 1, shift: 0 };

    /// `2^-k`.
    pub const fn pow2(k: u32) -> Distance {
        Distance { num: 1, den: 1, shift: k }
    }

    /// `num / den`.
    ///
    /// # Panics
    ///
    /// Panics if `den == 0`.
    pub fn ratio(num: u64, den: u64) -> Distance {
        assert!(den != 0, "zero denominator");
        Distance { num, den, shift: 0 }.normalized()
    }

    /// `num / (den * 2^shift)`.
    pub fn scaled(num: u64, den: u64, shift: u32) -> Distance {
        assert!(den != 0, "zero denominator");
        Distance { num, den, shift }.normalized()
    }

    fn normalized(mut self) -> Distance {
        if self.num == 0 {
            return Distance::ZERO;
        }
        let g = self.num.gcd(&self.den);
        self.num /= g;
        self.den /= g;
        let tz = self.den.trailing_zeros();
        self.den >>= tz;
        self.shift += tz;
        let nz = self.num.trailing_zeros().min(self.shift);
        self.num >>= nz;
        self.shift -= nz;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// `self * k` for a small integer factor.
    pub fn times(&self, k: u64) -> Distance {
        let num = self.num.checked_mul(k).expect("distance numerator overflow");
        Distance::scaled(num, self.den, self.shift)
    }

    /// `self / k` for a small positive integer `k`.
    pub fn divided(&self, k: u64) -> Distance {
        let den = self.den.checked_mul(k).expect("distance denominator overflow");
        Distance::scaled(self.num, den, self.shift)
    }

    /// `self / 2^k`.
    pub fn halved(&self, k: u32) -> Distance {
        Distance::scaled(self.num, self.den, self.shift + k)
    }

    /// If this distance is exactly `2^-k`, returns `k`.
    pub fn as_pow2(&self) -> Option<u32> {
        (self.num == 1 && self.den == 1).then_some(self.shift)
    }

    /// Largest `2^-k` that is `<= self`. Returns `None` for zero.
    pub fn floor_pow2(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        (0..).find(|&k| Distance::pow2(k) <= *self)
    }

    /// Shift radius for strict shadowing: the `r` with
    /// `2^-j < self  <=>  j > r`, or `None` when every distance (all `<= 1`)
    /// is already below `self`.
    ///
    /// # Panics
    ///
    /// Panics on zero.
    pub fn shadow_radius(&self) -> Option<u32> {
        assert!(!self.is_zero(), "radius must be positive");
        if *self > Distance::ONE {
            return None;
        }
        // least j with 2^-j < self, minus one
        let j = (0..).find(|&j| Distance::pow2(j) < *self).unwrap();
        Some(j - 1)
    }

    /// Separation radius for strict separation: the `rho` with
    /// `2^-j > self  <=>  j <= rho`, or `None` when no distance in `[0, 1]`
    /// exceeds `self`.
    pub fn separation_radius(&self) -> Option<u32> {
        if *self >= Distance::ONE {
            return None;
        }
        // largest j with 2^-j > self
        let first_not = (0..).find(|&j| Distance::pow2(j) <= *self || j > 4096).unwrap();
        first_not.checked_sub(1)
    }

    pub fn to_f64(&self) -> f64 {
        (self.num as f64 / self.den as f64) * (-(self.shift as f64)).exp2()
    }

    /// Exact conversion, available while `den * 2^shift` fits in `i128`.
    pub fn to_rational(&self) -> Option<Rational> {
        let den = (self.den as i128).checked_mul(1i128.checked_shl(self.shift)?)?;
        if den <= 0 {
            return None;
        }
        Some(Rational::new(self.num as i128, den))
    }

    /// Exact conversion back from a nonnegative rational with a dyadic or
    /// 64-bit denominator.
    pub fn from_rational(q: &Rational) -> Option<Distance> {
        if *q.numer() < 0 {
            return None;
        }
        let num = u64::try_from(*q.numer()).ok()?;
        let mut den = *q.denom();
        let tz = den.trailing_zeros();
        den >>= tz;
        let den = u64::try_from(den).ok()?;
        Some(Distance::scaled(num, den, tz))
    }
}

fn shl_saturating(v: u128, e: u32) -> Option<u128> {
    if v == 0 {
        return Some(0);
    }
    if e >= 128 || v.leading_zeros() < e {
        None
    } else {
        Some(v << e)
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.shift.min(other.shift);
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        // self = lhs / 2^(self.shift - s) relative to rhs / 2^(other.shift - s);
        // cross-multiply by the powers of two.
        let lhs = shl_saturating(lhs, other.shift - s);
        let rhs = shl_saturating(rhs, self.shift - s);
        match (lhs, rhs) {
            (Some(a), Some(b)) => a.cmp(&b),
            (None, Some(_)) => Ordering::Greater,
            (Some(_), None) => Ordering::Less,
            (None, None) => unreachable!("one side always has a zero exponent"),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Distance {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Distance {}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num == 0 {
            return write!(f, "0");
        }
        match 1u64.checked_shl(self.shift).and_then(|p| p.checked_mul(self.den)) {
            Some(1) => write!(f, "{}", self.num),
            Some(den) if self.shift < 63 => write!(f, "{}/{}", self.num, den),
            _ => {
                if self.den == 1 {
                    write!(f, "{}/2^{}", self.num, self.shift)
                } else {
                    write!(f, "{}/({}*2^{})", self.num, self.den, self.shift)
                }
            }
        }
    }
}

impl FromStr for Distance {
    type Err = Error;

    /// Accepts `"p/q"`, `"p"`, and `"2^-k"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("invalid distance literal {s:?}"));
        let s = s.trim();
        if let Some(k) = s.strip_prefix("2^-") {
            return k.parse::<u32>().map(Distance::pow2).map_err(|_| bad());
        }
        match s.split_once('/') {
            Some((p, q)) => {
                let p: u64 = p.trim().parse().map_err(|_| bad())?;
                let q: u64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(bad());
                }
                Ok(Distance::ratio(p, q))
            }
            None => s.parse::<u64>().map(|p| Distance::ratio(p, 1)).map_err(|_| bad()),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Distance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_powers_of_two() {
        assert_eq!(Distance::ratio(1, 8).as_pow2(), Some(3));
        assert_eq!(Distance::ratio(2, 16), Distance::pow2(3));
        assert_eq!(Distance::ratio(3, 12), Distance::pow2(2));
        assert_eq!(Distance::ratio(1, 24).to_string(), "1/24");
        assert_eq!(Distance::ratio(1, 24), Distance::scaled(1, 3, 3));
    }

    #[test]
    fn ordering_is_exact() {
        assert!(Distance::pow2(3) < Distance::ratio(1, 7));
        assert!(Distance::pow2(200) > Distance::ZERO);
        assert!(Distance::pow2(200) < Distance::pow2(199));
        assert!(Distance::ratio(1, 24) < Distance::ratio(1, 12));
        assert!(Distance::pow2(1).times(3) > Distance::ONE);
        assert_eq!(Distance::pow2(3).times(3), Distance::ratio(3, 8));
        assert!(Distance::pow2(130) < Distance::ratio(1, u64::MAX));
    }

    #[test]
    fn radii() {
        // d < 1/2 <=> agree on |i| <= 1
        assert_eq!(Distance::pow2(1).shadow_radius(), Some(1));
        assert_eq!(Distance::ONE.shadow_radius(), Some(0));
        assert_eq!(Distance::ratio(3, 10).shadow_radius(), Some(1));
        assert_eq!(Distance::ratio(3, 2).shadow_radius(), None);
        // d > 1/2 <=> differ at coordinate 0
        assert_eq!(Distance::pow2(1).separation_radius(), Some(0));
        assert_eq!(Distance::pow2(3).separation_radius(), Some(2));
        assert_eq!(Distance::ratio(3, 8).separation_radius(), Some(1));
        assert_eq!(Distance::ONE.separation_radius(), None);
        assert_eq!(Distance::ratio(1, 6).floor_pow2(), Some(3));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("1/8".parse::<Distance>().unwrap(), Distance::pow2(3));
        assert_eq!("2^-70".parse::<Distance>().unwrap().to_string(), "1/2^70");
        assert!("1/0".parse::<Distance>().is_err());
        let q = Distance::ratio(5, 12).to_rational().unwrap();
        assert_eq!(q, Rational::new(5, 12));
        assert_eq!(Distance::from_rational(&q).unwrap(), Distance::ratio(5, 12));
    }
}
