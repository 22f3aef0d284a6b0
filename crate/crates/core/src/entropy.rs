//! Separated sets, entropy estimates, the spectral entropy oracle,
//! periodic-orbit counts and the positive-entropy construction for gluing
//! systems that are not minimal.
//!
//! A set `E` is `(n, ε)`-separated when every two distinct points satisfy
//! `d(f^k x, f^k y) > ε` for some `0 <= k < n`, and `s(n, ε)` is the largest
//! size of such a set.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{check_stay_away, StayAwayReport};
use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::gluing::{decide_gluing_sft, gluing_profile, GapBound};
use crate::shadowing::{complete_word, find_gap_and_shadow, grid_orbit, CandidatePool, OrbitSequence};
use crate::systems::{GridMetric, GridSystem, Point, Sft, Symbol, System, SystemKind};

/// Largest number of words enumerated into an explicit separated set.
pub const MAX_EXPLICIT_POINTS: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparationMethod {
    /// `s(n, ε)` itself.
    Exact,
    /// Factor counts of a substitution language, exact up to its length cap.
    FactorCount,
    /// A greedy maximal set: a lower bound for `s(n, ε)`.
    LowerBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparatedSet {
    pub system: String,
    pub n: usize,
    pub epsilon: Distance,
    pub method: SeparationMethod,
    pub points: Vec<Point>,
}

impl SeparatedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Window `[lo, lo + len)` whose contents decide `(n, eps)`-separation on a
/// shift, or `None` when no two points are separated.
fn sft_window(sft: &Sft, n: usize, eps: Distance) -> Option<(i64, usize)> {
    let rho = eps.separation_radius()? as usize;
    if sft.is_two_sided() {
        Some((-(rho as i64), n + 2 * rho))
    } else {
        Some((0, n + rho))
    }
}

/// Number of admissible words of length `len`, or `None` on overflow.
fn count_words(sft: &Sft, len: usize) -> Option<u128> {
    if len == 0 {
        return Some(1);
    }
    let mut ends = vec![1u128; sft.alphabet_size()];
    for _ in 1..len {
        let mut next = vec![0u128; sft.alphabet_size()];
        for a in sft.symbols() {
            for &b in sft.successors(a) {
                next[b as usize] = next[b as usize].checked_add(ends[a as usize])?;
            }
        }
        ends = next;
    }
    ends.iter().try_fold(0u128, |acc, &c| acc.checked_add(c))
}

/// `d(a, b) > eps` on a grid, with the threshold worked out once.
struct GridSeparation<'a> {
    g: &'a GridSystem,
    circle_min_diff: u64,
    adic_max_valuation: Option<u32>,
}

impl<'a> GridSeparation<'a> {
    fn new(g: &'a GridSystem, eps: Distance) -> Self {
        let size = g.size();
        // least circular difference D with D / G > eps
        let (mut lo, mut hi) = (0u64, size / 2 + 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if Distance::ratio(mid, size) > eps {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        GridSeparation { g, circle_min_diff: lo, adic_max_valuation: eps.separation_radius() }
    }

    #[inline]
    fn separated(&self, a: u64, b: u64) -> bool {
        if a == b {
            return false;
        }
        match self.g.metric() {
            GridMetric::Circle => {
                let d = a.abs_diff(b);
                d.min(self.g.size() - d) >= self.circle_min_diff
            }
            GridMetric::TwoAdic => match self.adic_max_valuation {
                // 2^-(v+1) > eps  <=>  v + 1 <= rho
                Some(rho) => a.abs_diff(b).trailing_zeros() < rho,
                None => false,
            },
        }
    }
}

fn greedy_grid(g: &GridSystem, cands: &[u64], n: usize, eps: Distance) -> Vec<u64> {
    let sep = GridSeparation::new(g, eps);
    let mut kept: Vec<Vec<u64>> = Vec::new();
    for &c in cands {
        let oc = grid_orbit(g, c, n);
        let ok = kept.iter().all(|ok| oc.iter().zip(ok).any(|(&a, &b)| sep.separated(a, b)));
        if ok {
            kept.push(oc);
        }
    }
    kept.into_iter().map(|o| o[0]).collect()
}

/// A maximum `(n, eps)`-separated set.
///
/// On a shift two points are separated exactly when they differ somewhere in
/// the window `[-rho, n - 1 + rho]` (`[0, n - 1 + rho]` one-sided), where
/// `rho` is the separation radius of `eps`, so `s(n, eps)` is the number of
/// admissible words on that window; one point is built per word. On grids the
/// whole space is scanned greedily in index order. For rotations and the
/// odometer this is exact: they are isometries, so `s(n, eps) = s(1, eps)`,
/// and the greedy pass is optimal on the circle and on an ultrametric space.
/// The square map gets a lower bound.
pub fn separated_set(system: &System, n: usize, eps: Distance) -> Result<SeparatedSet> {
    if n == 0 {
        return Err(Error::BadArgs("n must be at least 1".into()));
    }
    let make = |method, points| SeparatedSet { system: system.label.clone(), n, epsilon: eps, method, points };
    match &system.kind {
        SystemKind::Sft(sft) => {
            let Some((lo, len)) = sft_window(sft, n, eps) else {
                let p = complete_word(sft, &[0], 0);
                return Ok(make(SeparationMethod::Exact, vec![Point::Symbolic(p)]));
            };
            let count = count_words(sft, len).unwrap_or(u128::MAX);
            if count > MAX_EXPLICIT_POINTS as u128 {
                return Err(Error::BadArgs(format!(
                    "{count} admissible words on a window of length {len}; at most {MAX_EXPLICIT_POINTS} can be listed"
                )));
            }
            let points =
                sft.words(len).par_iter().map(|w| Point::Symbolic(complete_word(sft, w, lo))).collect::<Vec<_>>();
            Ok(make(SeparationMethod::Exact, points))
        }
        SystemKind::Grid(g) => {
            let all: Vec<u64> = (0..g.size()).collect();
            let (kept, method) = if g.is_isometry() {
                (greedy_grid(g, &all, 1, eps), SeparationMethod::Exact)
            } else {
                (greedy_grid(g, &all, n, eps), SeparationMethod::LowerBound)
            };
            Ok(make(method, kept.into_iter().map(Point::Grid).collect()))
        }
        SystemKind::Substitution(_) => Err(Error::Unsupported("explicit separated sets on a substitution subshift")),
    }
}

/// Greedy maximal `(n, eps)`-separated subset of a pool, scanning in pool
/// order. Always a lower bound for `s(n, eps)`.
pub fn greedy_separated_set(system: &System, n: usize, eps: Distance, pool: &CandidatePool) -> Result<SeparatedSet> {
    if n == 0 {
        return Err(Error::BadArgs("n must be at least 1".into()));
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    for p in &pool.points {
        system.check_point(p)?;
    }
    let mut kept: Vec<Point> = Vec::new();
    for p in &pool.points {
        let mut ok = true;
        for q in &kept {
            if !pair_separated(system, p, q, n, eps)? {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(p.clone());
        }
    }
    Ok(SeparatedSet { system: system.label.clone(), n, epsilon: eps, method: SeparationMethod::LowerBound, points: kept })
}

/// Whether `d(f^k a, f^k b) > eps` for some `0 <= k < n`.
pub fn pair_separated(system: &System, a: &Point, b: &Point, n: usize, eps: Distance) -> Result<bool> {
    match (&system.kind, a, b) {
        (SystemKind::Sft(sft), Point::Symbolic(x), Point::Symbolic(y)) => Ok(match sft_window(sft, n, eps) {
            None => false,
            Some((lo, len)) => {
                let hi = lo + len as i64 - 1;
                (lo..=hi).any(|i| x.at(i) != y.at(i))
            }
        }),
        (SystemKind::Grid(g), Point::Grid(x), Point::Grid(y)) => {
            let sep = GridSeparation::new(g, eps);
            let (ox, oy) = (grid_orbit(g, *x, n), grid_orbit(g, *y, n));
            Ok(ox.iter().zip(&oy).any(|(&p, &q)| sep.separated(p, q)))
        }
        (SystemKind::Substitution(_), _, _) => Err(Error::Unsupported("point operations on a substitution subshift")),
        _ => Err(Error::SystemMismatch),
    }
}

/// First pair `(i, j)` with `i < j` (least `j`, then least `i`) that is not
/// `(n, eps)`-separated, or `None` when the whole list is separated.
pub fn first_unseparated_pair(system: &System, n: usize, eps: Distance, points: &[Point]) -> Result<Option<(usize, usize)>> {
    if n == 0 {
        return Err(Error::BadArgs("n must be at least 1".into()));
    }
    for p in points {
        system.check_point(p)?;
    }
    match &system.kind {
        SystemKind::Sft(sft) => {
            let Some((lo, len)) = sft_window(sft, n, eps) else {
                return Ok((points.len() > 1).then_some((0, 1)));
            };
            let hi = lo + len as i64 - 1;
            let windows: Vec<Vec<Symbol>> = points
                .par_iter()
                .map(|p| p.as_symbolic().expect("checked").window(lo, hi))
                .collect();
            let mut first: HashMap<&[Symbol], usize> = HashMap::new();
            for (j, w) in windows.iter().enumerate() {
                if let Some(&i) = first.get(w.as_slice()) {
                    return Ok(Some((i, j)));
                }
                first.insert(w, j);
            }
            Ok(None)
        }
        SystemKind::Grid(g) => {
            let sep = GridSeparation::new(g, eps);
            let orbits: Vec<Vec<u64>> =
                points.iter().map(|p| grid_orbit(g, p.as_grid().expect("checked"), n)).collect();
            Ok((1..orbits.len())
                .into_par_iter()
                .find_map_first(|j| {
                    (0..j)
                        .find(|&i| !orbits[i].iter().zip(&orbits[j]).any(|(&a, &b)| sep.separated(a, b)))
                        .map(|i| (i, j))
                }))
        }
        SystemKind::Substitution(_) => Err(Error::Unsupported("point operations on a substitution subshift")),
    }
}

/// Exact re-verification of a separated set.
pub fn is_separated(system: &System, set: &SeparatedSet) -> Result<bool> {
    Ok(first_unseparated_pair(system, set.n, set.epsilon, &set.points)?.is_none())
}

/// An interval `[lo, hi]` certified to contain a real number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Whether `x` lies within `tol` of the interval.
    pub fn near(&self, x: f64, tol: f64) -> bool {
        self.lo - tol <= x && x <= self.hi + tol
    }
}

const ORACLE_WIDTH: f64 = 1e-7;
const ORACLE_MAX_ITERATIONS: usize = 200_000;

/// Lower and upper `f64` bounds on `a / b`.
fn ratio_bounds(a: &BigUint, b: &BigUint) -> (f64, f64) {
    let q: BigUint = (a << 128u32) / b;
    let qf = q.to_f64().unwrap_or(f64::INFINITY);
    let scale = (-128f64).exp2();
    let lo = qf * (1.0 - 1e-15) * scale;
    let hi = (qf + 1.0) * (1.0 + 1e-15) * scale;
    (lo, hi)
}

/// Index of the least and the greatest `w_i / v_i`, compared exactly.
fn extreme_ratios(w: &[BigUint], v: &[BigUint]) -> (usize, usize) {
    let (mut lo, mut hi) = (0, 0);
    for i in 1..w.len() {
        if &w[i] * &v[lo] < &w[lo] * &v[i] {
            lo = i;
        }
        if &w[i] * &v[hi] > &w[hi] * &v[i] {
            hi = i;
        }
    }
    (lo, hi)
}

/// Enclosure of `ln` of the spectral radius of an irreducible block, by power
/// iteration on `B = A + I` (primitive, with spectral radius `lambda + 1`).
/// For any positive vector `v`, `min (Bv)_i / v_i <= lambda + 1 <= max (Bv)_i / v_i`.
fn component_log_radius(sft: &Sft, comp: &[Symbol]) -> Enclosure {
    let k = comp.len();
    let index: HashMap<Symbol, usize> = comp.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let succ: Vec<Vec<usize>> =
        comp.iter().map(|&a| sft.successors(a).iter().filter_map(|b| index.get(b).copied()).collect()).collect();
    if succ.iter().all(|s| s.len() == 1) {
        // a single cycle: the spectral radius is exactly 1
        return Enclosure { lo: 0.0, hi: 0.0 };
    }
    let mut v: Vec<BigUint> = vec![BigUint::one(); k];
    let mut best = Enclosure { lo: 0.0, hi: f64::INFINITY };
    for _ in 0..ORACLE_MAX_ITERATIONS {
        let w: Vec<BigUint> =
            (0..k).map(|i| succ[i].iter().fold(v[i].clone(), |acc, &j| acc + &v[j])).collect();
        let (imin, imax) = extreme_ratios(&w, &v);
        let lam_lo = (ratio_bounds(&w[imin], &v[imin]).0 - 1.0).max(1.0);
        let lam_hi = (ratio_bounds(&w[imax], &v[imax]).1 - 1.0) * (1.0 + 1e-15);
        let lo = (lam_lo.ln() * (1.0 - 1e-15)).max(0.0);
        let hi = (lam_hi.max(1.0).ln() * (1.0 + 1e-15)).max(lo);
        best = Enclosure { lo: best.lo.max(lo), hi: best.hi.min(hi) };
        if best.width() <= ORACLE_WIDTH {
            break;
        }
        let bits = w.iter().map(|x| x.bits()).max().unwrap_or(0);
        v = if bits > 320 {
            let shift = bits - 256;
            w.into_iter()
                .map(|x| {
                    let y = x >> shift;
                    if y.is_zero() {
                        BigUint::one()
                    } else {
                        y
                    }
                })
                .collect()
        } else {
            w
        };
    }
    best
}

/// Enclosure of `ln rho(A)`, the entropy of the shift, as the maximum over
/// the strongly connected components that carry a cycle.
pub fn sft_entropy_oracle(sft: &Sft) -> Enclosure {
    sft.components()
        .into_iter()
        .filter(|c| sft.is_nontrivial_component(c))
        .map(|c| component_log_radius(sft, &c))
        .fold(Enclosure { lo: 0.0, hi: 0.0 }, |acc, e| Enclosure { lo: acc.lo.max(e.lo), hi: acc.hi.max(e.hi) })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyRow {
    pub n: usize,
    pub eps: Distance,
    pub s: u128,
    /// `ln s(n, eps) / n`.
    pub slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonSummary {
    pub eps: Distance,
    pub slope_at_n_max: f64,
    /// `(ln s(N, eps) - ln s(h, eps)) / (N - h)` with `h = ceil(N / 2)`.
    pub secant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub system: String,
    pub method: SeparationMethod,
    pub n_max: usize,
    pub rows: Vec<EntropyRow>,
    pub per_eps: Vec<EpsilonSummary>,
    /// Largest secant slope over the scales.
    pub h_estimate: f64,
    /// Set when the table holds lower bounds rather than `s(n, eps)`.
    pub lower_bound: bool,
    pub oracle: Option<Enclosure>,
}

impl EntropyReport {
    /// `s(n, eps)` from the table.
    pub fn s(&self, n: usize, eps: Distance) -> Option<u128> {
        self.rows.iter().find(|r| r.n == n && r.eps == eps).map(|r| r.s)
    }

    /// CSV with columns `n, eps, s, slope`.
    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "eps", "s", "slope"]).unwrap();
        for r in &self.rows {
            w.write_record([r.n.to_string(), r.eps.to_string(), r.s.to_string(), format!("{:.12}", r.slope)]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Fills the `s(n, eps)` table for `1 <= n <= n_max` and every scale.
///
/// Shifts use exact word counts and substitution subshifts factor counts.
/// Grid tables come from [`separated_set`]; when those are greedy lower
/// bounds the table is made monotone by carrying each entry forward, which
/// keeps every entry a valid lower bound since an `(n, eps)`-separated set is
/// also `(n + 1, eps)`- and `(n, eps')`-separated for `eps' < eps`.
pub fn entropy_estimate(system: &System, eps_list: &[Distance], n_max: usize) -> Result<EntropyReport> {
    if n_max < 2 {
        return Err(Error::BadArgs("n_max must be at least 2".into()));
    }
    if eps_list.is_empty() {
        return Err(Error::BadArgs("eps list is empty".into()));
    }
    if eps_list.iter().any(|e| e.is_zero()) {
        return Err(Error::BadArgs("every eps must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::BadArgs("eps list must be strictly decreasing".into()));
    }
    let mut method = SeparationMethod::Exact;
    let mut table: Vec<Vec<u128>> = Vec::with_capacity(eps_list.len());
    match &system.kind {
        SystemKind::Sft(sft) => {
            for &eps in eps_list {
                let row = (1..=n_max)
                    .map(|n| match sft_window(sft, n, eps) {
                        None => Ok(1),
                        Some((_, len)) => count_words(sft, len)
                            .ok_or_else(|| Error::BadArgs(format!("word count overflows at window length {len}"))),
                    })
                    .collect::<Result<Vec<_>>>()?;
                table.push(row);
            }
        }
        SystemKind::Substitution(s) => {
            method = SeparationMethod::FactorCount;
            for &eps in eps_list {
                let rho = eps.separation_radius();
                let row = (1..=n_max)
                    .map(|n| match rho {
                        None => Ok(1),
                        Some(rho) => {
                            let len = n + 2 * rho as usize;
                            if len > s.language_length() {
                                return Err(Error::BadArgs(format!(
                                    "window length {len} exceeds the language length {}",
                                    s.language_length()
                                )));
                            }
                            Ok(s.factors(len).len() as u128)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                table.push(row);
            }
        }
        SystemKind::Grid(g) => {
            if !g.is_isometry() {
                method = SeparationMethod::LowerBound;
            }
            let jobs: Vec<(usize, usize)> =
                (0..eps_list.len()).flat_map(|e| (1..=n_max).map(move |n| (e, n))).collect();
            let sizes: Vec<u128> = jobs
                .par_iter()
                .map(|&(e, n)| {
                    let n_eff = if g.is_isometry() { 1 } else { n };
                    separated_set(system, n_eff, eps_list[e]).map(|s| s.len() as u128)
                })
                .collect::<Result<_>>()?;
            for e in 0..eps_list.len() {
                let mut row: Vec<u128> = sizes[e * n_max..(e + 1) * n_max].to_vec();
                for i in 1..row.len() {
                    row[i] = row[i].max(row[i - 1]);
                }
                if let Some(prev) = table.last() {
                    for (x, &p) in row.iter_mut().zip(prev) {
                        *x = (*x).max(p);
                    }
                }
                table.push(row);
            }
        }
    }
    let mut rows = Vec::new();
    let mut per_eps = Vec::new();
    let half = n_max.div_ceil(2);
    for (e, &eps) in eps_list.iter().enumerate() {
        for n in 1..=n_max {
            let s = table[e][n - 1];
            rows.push(EntropyRow { n, eps, s, slope: (s as f64).ln() / n as f64 });
        }
        let (top, mid) = (table[e][n_max - 1] as f64, table[e][half - 1] as f64);
        per_eps.push(EpsilonSummary {
            eps,
            slope_at_n_max: top.ln() / n_max as f64,
            secant: (top.ln() - mid.ln()) / (n_max - half) as f64,
        });
    }
    let h_estimate = per_eps.iter().map(|p| p.secant).fold(0.0, f64::max);
    Ok(EntropyReport {
        system: system.label.clone(),
        method,
        n_max,
        rows,
        per_eps,
        h_estimate,
        lower_bound: method == SeparationMethod::LowerBound,
        oracle: system.as_sft().map(sft_entropy_oracle),
    })
}

/// `ln N / M`: the entropy lower bound from a `(1, 3 eps)`-separated set of
/// size `N` and a specification gap bound `M` at `eps`.
pub fn spec_entropy_bound(n: u128, m: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::BadArgs(format!("N must be at least 2, got {n}")));
    }
    if m == 0 {
        return Err(Error::BadArgs("M must be at least 1".into()));
    }
    Ok((n as f64).ln() / m as f64)
}

pub const MAX_PERIOD: usize = 24;
const ENUMERATION_BUDGET: u128 = 1 << 27;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    CycleEnumeration,
    TraceFormula,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicRow {
    pub n: usize,
    /// Points of least period `n`.
    pub least_period: u128,
    /// `p_n`: points of period at most `n`.
    pub p_n: u128,
    /// `tr(A^n) = |Fix(f^n)|`, when it fits.
    pub trace: Option<u128>,
    /// `ln p_n / n`, absent while `p_n = 0`.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicGrowthReport {
    pub system: String,
    pub n_max: usize,
    pub method: CountMethod,
    pub rows: Vec<PeriodicRow>,
    /// `max_n ln p_n / n` over the computed range (a finite stand-in for the
    /// limsup).
    pub p_hat: f64,
    /// Whether `sum_{d | n} (least-period count of d) = tr(A^n)` for every
    /// `n` where the trace is known.
    pub traces_agree: bool,
}

impl PeriodicGrowthReport {
    pub fn p(&self, n: usize) -> Option<u128> {
        self.rows.get(n.checked_sub(1)?).map(|r| r.p_n)
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["n", "least_period", "p_n", "trace", "rate"]).unwrap();
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.least_period.to_string(),
                r.p_n.to_string(),
                r.trace.map(|t| t.to_string()).unwrap_or_default(),
                r.rate.map(|x| format!("{x:.12}")).unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Admissible Lyndon words of length `n` whose wrap-around is allowed,
/// counted by the recursive Fredricksen-Kessler-Maiorana generator with
/// every inadmissible prefix pruned.
fn admissible_lyndon_count(sft: &Sft, n: usize) -> u128 {
    fn rec(sft: &Sft, a: &mut [Symbol], t: usize, p: usize, n: usize, count: &mut u128) {
        if t > n {
            if p == n && sft.allows(a[n], a[1]) {
                *count += 1;
            }
            return;
        }
        let base = a[t - p] as usize;
        for j in base..sft.alphabet_size() {
            let s = j as Symbol;
            if t > 1 && !sft.allows(a[t - 1], s) {
                continue;
            }
            a[t] = s;
            rec(sft, a, t + 1, if j == base { p } else { t }, n, count);
        }
    }
    let mut a = vec![0 as Symbol; n + 1];
    let mut count = 0;
    rec(sft, &mut a, 1, 1, n, &mut count);
    count
}

fn traces(sft: &Sft, n_max: usize) -> Vec<Option<u128>> {
    let k = sft.alphabet_size();
    let a: Vec<Vec<u128>> = sft.matrix().iter().map(|r| r.iter().map(|&x| x as u128).collect()).collect();
    let mut power = a.clone();
    let mut out = Vec::with_capacity(n_max);
    let mut ok = true;
    for step in 1..=n_max {
        if step > 1 && ok {
            let mut next = vec![vec![0u128; k]; k];
            'outer: for i in 0..k {
                for j in 0..k {
                    let mut acc = 0u128;
                    for l in 0..k {
                        if a[l][j] == 1 {
                            match acc.checked_add(power[i][l]) {
                                Some(x) => acc = x,
                                None => {
                                    ok = false;
                                    break 'outer;
                                }
                            }
                        }
                    }
                    next[i][j] = acc;
                }
            }
            power = next;
        }
        out.push(if ok { (0..k).try_fold(0u128, |s, i| s.checked_add(power[i][i])) } else { None });
    }
    out
}

fn mobius(mut n: usize) -> i128 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// `p_n` for `1 <= n <= n_max`, from the admissible cycles of the transition
/// graph, cross-checked against `tr(A^n)`. Falls back to the trace formula
/// (Möbius inversion) when the cycle count would exceed the enumeration
/// budget.
pub fn periodic_counts(system: &System, n_max: usize) -> Result<PeriodicGrowthReport> {
    let sft = system.as_sft().ok_or(Error::NotAnSft)?;
    if n_max == 0 || n_max > MAX_PERIOD {
        return Err(Error::BadArgs(format!("n_max must be in 1..={MAX_PERIOD}, got {n_max}")));
    }
    let tr = traces(sft, n_max);
    let total: Option<u128> = tr.iter().try_fold(0u128, |s, t| s.checked_add((*t)?));
    let from_traces: Option<Vec<u128>> = tr.iter().all(Option::is_some).then(|| {
        (1..=n_max)
            .map(|d| {
                let v: i128 =
                    (1..=d).filter(|e| d % e == 0).map(|e| mobius(d / e) * tr[e - 1].unwrap() as i128).sum();
                v as u128
            })
            .collect()
    });
    let (method, least): (CountMethod, Vec<u128>) = match (total, &from_traces) {
        (Some(t), Some(f)) if t > ENUMERATION_BUDGET => (CountMethod::TraceFormula, f.clone()),
        _ => (
            CountMethod::CycleEnumeration,
            (1..=n_max).into_par_iter().map(|d| d as u128 * admissible_lyndon_count(sft, d)).collect(),
        ),
    };
    let traces_agree = (1..=n_max).all(|n| match tr[n - 1] {
        None => true,
        Some(t) => (1..=n).filter(|d| n % d == 0).map(|d| least[d - 1]).sum::<u128>() == t,
    });
    let mut rows = Vec::with_capacity(n_max);
    let mut p = 0u128;
    for n in 1..=n_max {
        p += least[n - 1];
        let rate = (p > 0).then(|| (p as f64).ln() / n as f64);
        rows.push(PeriodicRow { n, least_period: least[n - 1], p_n: p, trace: tr[n - 1], rate });
    }
    let p_hat = rows.iter().filter_map(|r| r.rate).fold(0.0, f64::max);
    Ok(PeriodicGrowthReport { system: system.label.clone(), n_max, method, rows, p_hat, traces_agree })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyReport {
    pub system: String,
    pub x: Point,
    pub y: Point,
    pub epsilon: Distance,
    /// `eps / 3` rounded down to a power of two.
    pub epsilon2: Distance,
    /// The gluing gap bound `m` at `epsilon2`.
    pub m: usize,
    pub n: usize,
    /// `2 m n`, the orbit length over which the witnesses are separated.
    pub separation_length: usize,
    pub stay_away: StayAwayReport,
    /// Gap tuple used for each word in `{x, y}^n`, in word order.
    pub gaps: Vec<Vec<usize>>,
    pub witnesses: SeparatedSet,
    pub separated: bool,
    pub unseparated_pair: Option<(usize, usize)>,
    /// `ln 2 / (2m)`.
    pub bound: f64,
}

pub const MAX_DICHOTOMY_N: usize = 16;

/// The `2^n` witness family for a non-minimal gluing system.
///
/// With `eps2 = eps / 3` rounded down to a power of two and `m` the gluing
/// gap bound at `eps2`, every word `xi` in `{x, y}^n` gives the orbit
/// sequence `((xi_1, m), ..., (xi_n, m))`; its first shadowing gap with
/// entries at most `m` yields a point `z_xi`. The points are then checked to
/// be pairwise `(2mn, eps2)`-separated, which gives `s(2mn, eps2) >= 2^n`.
///
/// The stay-away inequalities for `(x, y, eps)` are always checked and
/// reported; with `require_stay_away` a violation is an error.
pub fn dichotomy_construction(
    system: &System,
    x: &Point,
    y: &Point,
    eps: Distance,
    n: usize,
    m_max: usize,
    pool: &CandidatePool,
    require_stay_away: bool,
) -> Result<DichotomyReport> {
    if n == 0 || n > MAX_DICHOTOMY_N {
        return Err(Error::BadArgs(format!("n must be in 1..={MAX_DICHOTOMY_N}, got {n}")));
    }
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    system.check_point(x)?;
    system.check_point(y)?;
    let k2 = eps.divided(3).floor_pow2().expect("positive");
    let eps2 = Distance::pow2(k2);
    let bound = match &system.kind {
        SystemKind::Sft(_) => {
            let r2 = eps2.shadow_radius().expect("eps2 <= 1");
            decide_gluing_sft(system, r2, 2 * r2 as usize + 3, 2)?.m_required
        }
        SystemKind::Grid(_) => gluing_profile(system, eps2, 4, 2, pool, m_max)?.m_required,
        SystemKind::Substitution(_) => return Err(Error::Unsupported("the witness construction on a substitution subshift")),
    };
    let m = match bound {
        GapBound::Finite(m) => m,
        GapBound::Exceeds => {
            return Err(Error::GluingFailed(format!("no gluing gap bound at eps2 = {eps2} (M_max = {m_max})")))
        }
    };
    let stay_away = check_stay_away(system, x, y, eps)?;
    if require_stay_away && !stay_away.holds {
        let v = stay_away.violation.as_ref().expect("violated");
        return Err(Error::StayAwayViolated(format!(
            "{} fails at n = {} with distance {} < {eps}",
            v.inequality, v.n, v.distance
        )));
    }
    let words: Vec<Vec<Point>> = (0..1usize << n)
        .map(|bits| (0..n).map(|k| if bits >> (n - 1 - k) & 1 == 0 { x.clone() } else { y.clone() }).collect())
        .collect();
    let found: Vec<(Vec<usize>, Point)> = words
        .par_iter()
        .map(|w| {
            let c = OrbitSequence::from_pairs(w.iter().map(|p| (p.clone(), m)))?;
            find_gap_and_shadow(system, &c, eps2, m, pool)?
                .ok_or_else(|| Error::GluingFailed(format!("no gap up to {m} shadows {}", c.descriptor())))
        })
        .collect::<Result<_>>()?;
    let (gaps, points): (Vec<Vec<usize>>, Vec<Point>) = found.into_iter().unzip();
    let separation_length = 2 * m * n;
    let unseparated_pair = first_unseparated_pair(system, separation_length, eps2, &points)?;
    Ok(DichotomyReport {
        system: system.label.clone(),
        x: x.clone(),
        y: y.clone(),
        epsilon: eps,
        epsilon2: eps2,
        m,
        n,
        separation_length,
        stay_away,
        gaps,
        witnesses: SeparatedSet {
            system: system.label.clone(),
            n: separation_length,
            epsilon: eps2,
            method: SeparationMethod::LowerBound,
            points,
        },
        separated: unseparated_pair.is_none(),
        unseparated_pair,
        bound: std::f64::consts::LN_2 / (2 * m) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{zoo, SymbolicPoint};

    /// `s(n, eps)` by definition: points from every padded window word,
    /// grouped by the (equivalence) relation "not separated".
    fn brute_s(sys: &System, n: usize, eps: Distance, len: usize) -> usize {
        let sft = sys.as_sft().unwrap();
        let mut reps: Vec<Point> = Vec::new();
        for w in sft.words(len) {
            let p = Point::Symbolic(complete_word(sft, &w, -(len as i64) / 2));
            let separated_from = |q: &Point| {
                (0..n as i64).any(|k| {
                    let (a, b) = (sys.apply_map(&p, k).unwrap(), sys.apply_map(q, k).unwrap());
                    sys.distance(&a, &b).unwrap() > eps
                })
            };
            if reps.iter().all(separated_from) {
                reps.push(p);
            }
        }
        reps.len()
    }

    #[test]
    fn separated_set_examples() {
        let full = zoo::full_shift(2);
        let s = separated_set(&full, 3, Distance::pow2(1)).unwrap();
        assert_eq!(s.len(), 8);
        assert!(is_separated(&full, &s).unwrap());

        let golden = zoo::golden_mean();
        let s = separated_set(&golden, 3, Distance::pow2(1)).unwrap();
        assert_eq!(s.len(), 5);
        assert!(is_separated(&golden, &s).unwrap());

        for sys in [full, golden, zoo::rotation(12, 4), zoo::odometer(5)] {
            let s = separated_set(&sys, 1, Distance::ONE).unwrap();
            assert_eq!(s.len(), 1, "{}", sys.label);
        }
    }

    #[test]
    fn exact_counts_match_brute_force() {
        for sys in zoo::sfts() {
            for r in 1..=2 {
                for n in 1..=3 {
                    let eps = Distance::pow2(r);
                    let s = separated_set(&sys, n, eps).unwrap();
                    let len = n + 2 * r as usize + 2;
                    assert_eq!(s.len(), brute_s(&sys, n, eps, len), "{} n={n} r={r}", sys.label);
                    assert!(is_separated(&sys, &s).unwrap());
                }
            }
        }
    }

    #[test]
    fn grid_sets() {
        // rotation: gaps of at least 4 steps on a circle of 12 points at eps = 1/4
        let rot = zoo::rotation(12, 4);
        let s = separated_set(&rot, 5, Distance::pow2(2)).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.method, SeparationMethod::Exact);
        // odometer: one point per residue class mod 8 at eps = 1/16
        let odo = zoo::odometer(10);
        let s = separated_set(&odo, 7, Distance::pow2(4)).unwrap();
        assert_eq!(s.len(), 8);
        assert!(is_separated(&odo, &s).unwrap());
        let sq = zoo::square_map(1 << 8);
        let s = separated_set(&sq, 4, Distance::pow2(3)).unwrap();
        assert_eq!(s.method, SeparationMethod::LowerBound);
        assert!(is_separated(&sq, &s).unwrap());
    }

    #[test]
    fn unseparated_pairs_are_found() {
        let full = zoo::full_shift(2);
        let a = Point::Symbolic(SymbolicPoint::periodic(&[0]));
        let b = Point::Symbolic(SymbolicPoint::heteroclinic(&[0], &[1], &[0], -3));
        // the '1' sits at coordinate 3: separated at eps = 1/2 only when n >= 4
        assert_eq!(first_unseparated_pair(&full, 3, Distance::pow2(1), &[a.clone(), b.clone()]).unwrap(), Some((0, 1)));
        assert_eq!(first_unseparated_pair(&full, 4, Distance::pow2(1), &[a, b]).unwrap(), None);
    }

    #[test]
    fn oracle_examples() {
        let e = sft_entropy_oracle(zoo::full_shift(2).as_sft().unwrap());
        assert!(e.contains(std::f64::consts::LN_2) && e.width() <= 1e-6, "{e:?}");
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        let e = sft_entropy_oracle(zoo::golden_mean().as_sft().unwrap());
        assert!(e.contains(golden) && e.width() <= 1e-6, "{e:?}");
        let e = sft_entropy_oracle(zoo::disjoint_fixed().as_sft().unwrap());
        assert_eq!((e.lo, e.hi), (0.0, 0.0));
        let e = sft_entropy_oracle(zoo::two_cycle().as_sft().unwrap());
        assert_eq!((e.lo, e.hi), (0.0, 0.0));
        // x^3 = x + 1
        let plastic = 1.324_717_957_244_746f64.ln();
        let e = sft_entropy_oracle(zoo::three_state().as_sft().unwrap());
        assert!(e.contains(plastic) && e.width() <= 1e-6, "{e:?}");
        let e = sft_entropy_oracle(zoo::one_way().as_sft().unwrap());
        assert!(e.contains(0.0));
    }

    #[test]
    fn estimates() {
        let r = entropy_estimate(&zoo::full_shift(2), &[Distance::pow2(1)], 12).unwrap();
        assert!((r.h_estimate - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(r.s(12, Distance::pow2(1)), Some(4096));

        let r = entropy_estimate(&zoo::golden_mean(), &[Distance::pow2(1)], 16).unwrap();
        let fib: Vec<u128> = (1..=16).map(|n| r.s(n, Distance::pow2(1)).unwrap()).collect();
        assert_eq!(&fib[..6], &[2, 3, 5, 8, 13, 21]);
        assert!((r.h_estimate - 0.481_211_825).abs() < 0.02);

        let eps = [Distance::pow2(1), Distance::pow2(2), Distance::pow2(3)];
        let r = entropy_estimate(&zoo::odometer(10), &eps, 64).unwrap();
        assert_eq!(r.h_estimate, 0.0);
        assert!(!r.lower_bound);
        assert!(r.csv().starts_with("n,eps,s,slope\n"));

        assert!(entropy_estimate(&zoo::full_shift(2), &[Distance::pow2(2), Distance::pow2(1)], 4).is_err());
        assert!(entropy_estimate(&zoo::full_shift(2), &[Distance::pow2(1)], 1).is_err());
    }

    #[test]
    fn tables_are_monotone() {
        let eps = [Distance::pow2(1), Distance::pow2(2), Distance::pow2(3)];
        for sys in [zoo::golden_mean(), zoo::three_state(), zoo::square_map(1 << 8), zoo::thue_morse(64)] {
            let r = entropy_estimate(&sys, &eps, 10).unwrap();
            for n in 1..=10 {
                for w in eps.windows(2) {
                    assert!(r.s(n, w[0]) <= r.s(n, w[1]), "{} n={n}", sys.label);
                }
                if n > 1 {
                    for &e in &eps {
                        assert!(r.s(n - 1, e) <= r.s(n, e), "{} n={n}", sys.label);
                    }
                }
            }
        }
    }

    #[test]
    fn bound_arithmetic() {
        assert!((spec_entropy_bound(2, 3).unwrap() - 0.231_049_060_186_648_4).abs() < 1e-12);
        assert_eq!(spec_entropy_bound(2, 1).unwrap(), std::f64::consts::LN_2);
        assert_eq!(spec_entropy_bound(5, 10).unwrap(), 5f64.ln() / 10.0);
        assert!(spec_entropy_bound(1, 3).is_err());
        assert!(spec_entropy_bound(2, 0).is_err());
    }

    #[test]
    fn periodic_examples() {
        let g = periodic_counts(&zoo::golden_mean(), 6).unwrap();
        assert_eq!((g.p(1), g.p(2), g.p(3)), (Some(1), Some(3), Some(6)));
        assert!(g.traces_agree);
        let f = periodic_counts(&zoo::full_shift(2), 12).unwrap();
        assert_eq!((f.p(1), f.p(2)), (Some(2), Some(4)));
        assert!(f.traces_agree);
        let s = periodic_counts(&zoo::single_point(), 10).unwrap();
        assert!(s.rows.iter().all(|r| r.p_n == 1));
        assert!(periodic_counts(&zoo::odometer(3), 4).is_err());
        assert!(periodic_counts(&zoo::full_shift(2), 25).is_err());
        for sys in zoo::sfts() {
            let r = periodic_counts(&sys, 10).unwrap();
            assert!(r.traces_agree, "{}", sys.label);
            assert!(r.rows.windows(2).all(|w| w[0].p_n <= w[1].p_n));
        }
    }

    #[test]
    fn dichotomy_on_the_full_shift() {
        let full = zoo::full_shift(2);
        let x = Point::Symbolic(SymbolicPoint::heteroclinic(&[0], &[], &[1], 0));
        let y = Point::Symbolic(SymbolicPoint::heteroclinic(&[1], &[], &[0], 0));
        let pool = CandidatePool::empty();
        let r = dichotomy_construction(&full, &x, &y, Distance::pow2(1), 3, 64, &pool, true).unwrap();
        assert_eq!(r.epsilon2, Distance::pow2(3));
        assert_eq!(r.witnesses.len(), 8);
        assert!(r.separated && r.stay_away.holds);
        assert!(r.bound <= std::f64::consts::LN_2);

        let r = dichotomy_construction(&full, &x, &y, Distance::pow2(1), 1, 64, &pool, true).unwrap();
        assert_eq!(r.witnesses.len(), 2);
        assert!(r.separated);
    }

    #[test]
    fn dichotomy_failures() {
        let rot = zoo::rotation(12, 4);
        let pool = CandidatePool::all(&rot).unwrap();
        let err = dichotomy_construction(&rot, &Point::Grid(0), &Point::Grid(1), Distance::ratio(1, 8), 2, 100, &pool, true)
            .unwrap_err();
        assert!(matches!(err, Error::GluingFailed(_)), "{err}");

        let full = zoo::full_shift(2);
        let p = Point::Symbolic(SymbolicPoint::periodic(&[0]));
        let err = dichotomy_construction(&full, &p, &p, Distance::pow2(1), 2, 64, &CandidatePool::empty(), true)
            .unwrap_err();
        assert!(matches!(err, Error::StayAwayViolated(_)), "{err}");
    }
}
