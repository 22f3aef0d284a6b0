//! Dynamical systems, their points, maps and exact metrics.
//!
//! Three kinds of system are supported:
//!
//! * [`Sft`]: vertex shifts with the metric `d(x, y) = 2^-min{|i| : x_i != y_i}`
//!   (minimum over `i >= 0` when one-sided). Points are eventually periodic
//!   ([`SymbolicPoint`]), which makes every distance exactly computable.
//! * [`GridSystem`]: rotations, the square map and the odometer on a finite
//!   grid of `G` points.
//! * [`SubstitutionSubshift`]: word-level only; it has no point model and
//!   the point operations return [`Error::Unsupported`].

pub mod family;
pub mod grid;
pub mod point;
pub mod sft;
pub mod spec;
pub mod substitution;
pub mod zoo;

use std::fmt;

use serde::{Serialize, Serializer};

pub use grid::{GridMap, GridMetric, GridSystem};
pub use point::SymbolicPoint;
pub use sft::{Sft, Sidedness, Symbol};
pub use spec::{build_system, PointSpec, SystemSpec};
pub use substitution::SubstitutionSubshift;

use crate::distance::Distance;
use crate::error::{Error, Result};

/// A point of a symbolic or grid system. Serializes in the same shape as
/// [`PointSpec`](spec::PointSpec).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Point {
    Symbolic(SymbolicPoint),
    Grid(u64),
}

impl Point {
    pub fn as_symbolic(&self) -> Option<&SymbolicPoint> {
        match self {
            Point::Symbolic(p) => Some(p),
            Point::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<u64> {
        match self {
            Point::Grid(a) => Some(*a),
            Point::Symbolic(_) => None,
        }
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        spec::PointSpec::from_point(self).serialize(s)
    }
}

impl From<SymbolicPoint> for Point {
    fn from(p: SymbolicPoint) -> Self {
        Point::Symbolic(p)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Symbolic(p) => p.fmt(f),
            Point::Grid(a) => write!(f, "#{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Sft(Sft),
    Grid(GridSystem),
    Substitution(SubstitutionSubshift),
}

/// An immutable system with a label and its metric convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct System {
    pub label: String,
    pub kind: SystemKind,
}

impl System {
    pub fn new(label: impl Into<String>, kind: SystemKind) -> System {
        System { label: label.into(), kind }
    }

    pub fn sft(label: impl Into<String>, sft: Sft) -> System {
        System::new(label, SystemKind::Sft(sft))
    }

    pub fn grid(label: impl Into<String>, grid: GridSystem) -> System {
        System::new(label, SystemKind::Grid(grid))
    }

    pub fn as_sft(&self) -> Option<&Sft> {
        match &self.kind {
            SystemKind::Sft(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridSystem> {
        match &self.kind {
            SystemKind::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_substitution(&self) -> Option<&SubstitutionSubshift> {
        match &self.kind {
            SystemKind::Substitution(s) => Some(s),
            _ => None,
        }
    }

    /// Human-readable statement of the metric convention in force.
    pub fn metric_convention(&self) -> String {
        match &self.kind {
            SystemKind::Sft(s) if s.is_two_sided() => "d(x,y) = 2^-min{|i| : x_i != y_i}".into(),
            SystemKind::Sft(_) => "d(x,y) = 2^-min{i >= 0 : x_i != y_i}".into(),
            SystemKind::Grid(g) => match g.metric() {
                GridMetric::Circle => format!("d(a,b) = min(|a-b|, G-|a-b|)/G with G = {}", g.size()),
                GridMetric::TwoAdic => format!("d(a,b) = 2^-(v_2(a-b)+1) on Z/2^k with 2^k = {}", g.size()),
            },
            SystemKind::Substitution(_) => "d(x,y) = 2^-min{|i| : x_i != y_i} (word level only)".into(),
        }
    }

    /// Validates that a point belongs to this system.
    pub fn check_point(&self, p: &Point) -> Result<()> {
        match (&self.kind, p) {
            (SystemKind::Sft(s), Point::Symbolic(x)) => x.check_admissible(s),
            (SystemKind::Grid(g), Point::Grid(a)) => {
                if *a < g.size() {
                    Ok(())
                } else {
                    Err(Error::InvalidPoint(format!("grid index {a} outside 0..{}", g.size())))
                }
            }
            (SystemKind::Substitution(_), _) => Err(Error::Unsupported("point operations on a substitution subshift")),
            _ => Err(Error::SystemMismatch),
        }
    }

    /// `f^k(p)`.
    pub fn apply_map(&self, p: &Point, k: i64) -> Result<Point> {
        match (&self.kind, p) {
            (SystemKind::Sft(s), Point::Symbolic(x)) => Ok(Point::Symbolic(x.shifted(s, k)?)),
            (SystemKind::Grid(g), Point::Grid(a)) => {
                if k < 0 {
                    return Err(Error::NegativeIterateOnOneSided(k));
                }
                Ok(Point::Grid(g.iterate(*a, k as u64)))
            }
            (SystemKind::Substitution(_), _) => Err(Error::Unsupported("point operations on a substitution subshift")),
            _ => Err(Error::SystemMismatch),
        }
    }

    /// Exact distance.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<Distance> {
        match (&self.kind, a, b) {
            (SystemKind::Sft(s), Point::Symbolic(x), Point::Symbolic(y)) => {
                Ok(match x.first_disagreement(y, !s.is_two_sided()) {
                    None => Distance::ZERO,
                    Some(k) => Distance::pow2(k as u32),
                })
            }
            (SystemKind::Grid(g), Point::Grid(x), Point::Grid(y)) => Ok(g.distance(*x, *y)),
            (SystemKind::Substitution(_), _, _) => Err(Error::Unsupported("point operations on a substitution subshift")),
            _ => Err(Error::SystemMismatch),
        }
    }

    /// `[p, f(p), ..., f^{n-1}(p)]`.
    pub fn orbit_segment(&self, p: &Point, n: usize) -> Result<Vec<Point>> {
        if n == 0 {
            return Err(Error::BadArgs("orbit segment length must be positive".into()));
        }
        let mut out = Vec::with_capacity(n);
        let mut cur = p.clone();
        for i in 0..n {
            if i > 0 {
                cur = self.apply_map(&cur, 1)?;
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Every point of a finite grid system, in index order.
    pub fn all_grid_points(&self) -> Option<Vec<Point>> {
        self.as_grid().map(|g| (0..g.size()).map(Point::Grid).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(p: SymbolicPoint) -> Point {
        Point::Symbolic(p)
    }

    #[test]
    fn apply_map_examples() {
        let full = System::sft("full2", Sft::full(2));
        let zero = sym(SymbolicPoint::periodic(&[0]));
        assert_eq!(full.apply_map(&zero, 5).unwrap(), zero);

        let golden = System::sft("golden", Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::TwoSided).unwrap());
        let p = sym(SymbolicPoint::periodic(&[0, 1]));
        let q = golden.apply_map(&p, 1).unwrap();
        assert_eq!(q, sym(SymbolicPoint::periodic(&[1, 0])));
        assert_eq!(q.as_symbolic().unwrap().at(0), 1);

        let odo = System::grid("odometer3", GridSystem::odometer(3));
        assert_eq!(odo.apply_map(&Point::Grid(7), 1).unwrap(), Point::Grid(0));
    }

    #[test]
    fn distance_examples() {
        let full = System::sft("full2", Sft::full(2));
        let zero = sym(SymbolicPoint::periodic(&[0]));
        let one = sym(SymbolicPoint::periodic(&[1]));
        assert_eq!(full.distance(&zero, &zero).unwrap(), Distance::ZERO);
        assert_eq!(full.distance(&zero, &one).unwrap(), Distance::ONE);
        // '1' at coordinate +2
        let bump = sym(SymbolicPoint::heteroclinic(&[0], &[1], &[0], -2));
        assert_eq!(full.distance(&zero, &bump).unwrap(), Distance::pow2(2));
        let grid = Point::Grid(0);
        assert_eq!(full.distance(&zero, &grid), Err(Error::SystemMismatch));
    }

    #[test]
    fn orbit_segment_examples() {
        let odo = System::grid("odometer2", GridSystem::odometer(2));
        let seg = odo.orbit_segment(&Point::Grid(0), 4).unwrap();
        assert_eq!(seg, (0..4).map(Point::Grid).collect::<Vec<_>>());
        assert_eq!(odo.orbit_segment(&Point::Grid(3), 1).unwrap(), vec![Point::Grid(3)]);

        let golden = System::sft("golden", Sft::new(&[vec![1, 1], vec![1, 0]], Sidedness::TwoSided).unwrap());
        let p = sym(SymbolicPoint::periodic(&[0, 0, 1]));
        let seg = golden.orbit_segment(&p, 3).unwrap();
        let expected: Vec<Point> =
            [[0, 0, 1], [0, 1, 0], [1, 0, 0]].iter().map(|w| sym(SymbolicPoint::periodic(w))).collect();
        assert_eq!(seg, expected);
    }

    #[test]
    fn rotation_orbits_have_three_points() {
        let rot = System::grid("rot12", GridSystem::rotation(12, 4));
        for a in 0..12 {
            let seg = rot.orbit_segment(&Point::Grid(a), 4).unwrap();
            assert_eq!(seg[3], seg[0]);
            assert_ne!(seg[1], seg[0]);
            assert_ne!(seg[2], seg[0]);
        }
    }
}
