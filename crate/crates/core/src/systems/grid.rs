//! Finite grid models of circle maps and the dyadic odometer.

use serde::{Deserialize, Serialize};

use crate::distance::Distance;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMap {
    /// `a -> a + step (mod G)`.
    Rotation { step: u64 },
    /// `x -> x^2 mod 1` rounded to the nearest grid point, ties to even index.
    SquareMap,
    /// `a -> a + 1 (mod 2^depth)`.
    Odometer { depth: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMetric {
    /// `min(|a-b|, G-|a-b|) / G`.
    Circle,
    /// `2^-(v+1)` with `v` the 2-adic valuation of `a-b`, so the open ball of
    /// radius `2^-k` is a residue class mod `2^k`.
    TwoAdic,
}

/// Points are indices `0..G` standing for `a / G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridSystem {
    size: u64,
    map: GridMap,
    metric: GridMetric,
}

impl GridSystem {
    pub fn new(size: u64, map: GridMap, metric: GridMetric) -> Result<GridSystem> {
        if size == 0 {
            return Err(Error::spec("parameters.grid_size", "grid_size must be positive"));
        }
        if size > 1 << 24 {
            return Err(Error::spec("parameters.grid_size", "grid_size must be at most 2^24"));
        }
        let map = match map {
            GridMap::Rotation { step } => GridMap::Rotation { step: step % size },
            GridMap::Odometer { depth } => {
                if depth >= 64 || 1u64 << depth != size {
                    return Err(Error::spec(
                        "parameters.map.odometer.depth",
                        format!("odometer requires grid_size = 2^depth, got grid_size {size} and depth {depth}"),
                    ));
                }
                if metric != GridMetric::TwoAdic {
                    return Err(Error::spec("parameters.metric", "odometer requires the two_adic metric"));
                }
                map
            }
            GridMap::SquareMap => {
                if !size.is_power_of_two() {
                    return Err(Error::spec("parameters.grid_size", "square_map requires a dyadic grid (power of two)"));
                }
                map
            }
        };
        if metric == GridMetric::TwoAdic && !size.is_power_of_two() {
            return Err(Error::spec("parameters.metric", "two_adic metric requires grid_size to be a power of two"));
        }
        Ok(GridSystem { size, map, metric })
    }

    pub fn rotation(size: u64, step: u64) -> GridSystem {
        GridSystem::new(size, GridMap::Rotation { step }, GridMetric::Circle).expect("valid rotation")
    }

    pub fn odometer(depth: u32) -> GridSystem {
        GridSystem::new(1 << depth, GridMap::Odometer { depth }, GridMetric::TwoAdic).expect("valid odometer")
    }

    pub fn square_map(size: u64) -> GridSystem {
        GridSystem::new(size, GridMap::SquareMap, GridMetric::Circle).expect("valid square map")
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn map_kind(&self) -> GridMap {
        self.map
    }

    pub fn metric(&self) -> GridMetric {
        self.metric
    }

    /// Rotations and odometers preserve distances.
    pub fn is_isometry(&self) -> bool {
        !matches!(self.map, GridMap::SquareMap)
    }

    pub fn is_ultrametric(&self) -> bool {
        self.metric == GridMetric::TwoAdic
    }

    #[inline]
    pub fn step(&self, a: u64) -> u64 {
        match self.map {
            GridMap::Rotation { step } => (a + step) % self.size,
            GridMap::Odometer { .. } => (a + 1) % self.size,
            GridMap::SquareMap => {
                let g = self.size as u128;
                let sq = a as u128 * a as u128;
                let (q, rem) = (sq / g, sq % g);
                let twice = 2 * rem;
                let rounded = if twice > g || (twice == g && q % 2 == 1) { q + 1 } else { q };
                (rounded % g) as u64
            }
        }
    }

    /// `f^k(a)` for `k >= 0`.
    pub fn iterate(&self, a: u64, k: u64) -> u64 {
        match self.map {
            GridMap::Rotation { step } => ((a as u128 + step as u128 * k as u128) % self.size as u128) as u64,
            GridMap::Odometer { .. } => ((a as u128 + k as u128) % self.size as u128) as u64,
            GridMap::SquareMap => {
                let mut x = a;
                for _ in 0..k {
                    let y = self.step(x);
                    if y == x {
                        break;
                    }
                    x = y;
                }
                x
            }
        }
    }

    #[inline]
    pub fn distance(&self, a: u64, b: u64) -> Distance {
        if a == b {
            return Distance::ZERO;
        }
        match self.metric {
            GridMetric::Circle => {
                let d = a.abs_diff(b);
                Distance::ratio(d.min(self.size - d), self.size)
            }
            GridMetric::TwoAdic => {
                let v = a.abs_diff(b).trailing_zeros();
                Distance::pow2(v + 1)
            }
        }
    }

    /// Largest distance realized on the grid.
    pub fn diameter(&self) -> Distance {
        match self.metric {
            GridMetric::Circle => Distance::ratio(self.size / 2, self.size),
            GridMetric::TwoAdic if self.size > 1 => Distance::pow2(1),
            GridMetric::TwoAdic => Distance::ZERO,
        }
    }

    /// Grid index for the exact value `num / den` in `[0, 1)`, rounding to
    /// the nearest index.
    pub fn point_at(&self, num: u64, den: u64) -> u64 {
        let g = self.size as u128;
        let scaled = num as u128 * g * 2 + den as u128;
        ((scaled / (2 * den as u128)) % g) as u64
    }
}
