//! Topological verdicts (transitivity, minimality, equicontinuity,
//! recurrence), covering times, Birkhoff probes and the cross-check report
//! that ties them to gluing and entropy.
//!
//! Every point this crate handles has an eventually periodic orbit: symbolic
//! points are eventually periodic in both directions and grids are finite.
//! Inequalities of the form "`d(f^n a, b) >= eps` for all `n`" are therefore
//! decided exactly by scanning one period past the point where the orbit
//! becomes periodic.

use std::fmt;

use serde::Serialize;

use crate::distance::{Distance, Rational};
use crate::entropy::{dichotomy_construction, entropy_estimate, periodic_counts, DichotomyReport, Enclosure};
use crate::error::{Error, Result};
use crate::gluing::{
    decide_gluing_sft, gluing_profile_with_bases, periodic_gluing_sft, substitution_profile, GapBound,
};
use crate::shadowing::CandidatePool;
use crate::systems::family::periodic_points;
use crate::systems::{GridMetric, GridSystem, Point, Sft, Symbol, SymbolicPoint, System, SystemKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Unknown => "unknown",
        })
    }
}

/// Machine-checkable evidence behind a verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// Length of a shortest path between every ordered pair of symbols.
    PathTable { lengths: Vec<Vec<usize>> },
    /// No path leads from `from` to `to`.
    UnreachablePair { from: Symbol, to: Symbol },
    /// The orbit of `start` visits every grid point, so it meets every ball
    /// of radius `resolution`.
    DenseOrbit { start: Point, resolution: Distance },
    /// The forward orbit of `start` never enters the open ball `B(center, radius)`.
    MissedBall { start: Point, center: Point, radius: Distance },
    /// The whole space is the single periodic orbit of `word`.
    SingleCycle { word: Vec<Symbol> },
    /// Every ordered pair of factors up to `max_length` occurs in order
    /// inside the generating word.
    FactorPairs { max_length: usize },
    /// Recurrence function `R(len)` of the factor language.
    Recurrence { table: Vec<(usize, Option<usize>)> },
    /// The map preserves distances, so `delta = eps` works.
    Isometry { delta: Distance },
    /// Distinct points are at least `delta` apart.
    FiniteSpace { delta: Distance },
    /// Points `distance` apart whose orbits are at least `eps` apart at time `n`.
    Separation { x: Point, y: Point, distance: Distance, n: usize, separation: Distance },
    /// No counterexample among the pool pairs up to the horizon.
    NoSeparation { pool: String, horizon: usize },
}

fn adjacency_closure(sft: &Sft) -> Vec<Vec<bool>> {
    // boolean transitive closure of A by repeated squaring of A + A^2 + ...
    let k = sft.alphabet_size();
    let mut reach: Vec<Vec<bool>> = (0..k).map(|a| (0..k).map(|b| sft.allows(a as Symbol, b as Symbol)).collect()).collect();
    loop {
        let mut next = reach.clone();
        for a in 0..k {
            for m in 0..k {
                if reach[a][m] {
                    for b in 0..k {
                        if reach[m][b] {
                            next[a][b] = true;
                        }
                    }
                }
            }
        }
        if next == reach {
            return reach;
        }
        reach = next;
    }
}

fn has_walk_of_length(sft: &Sft, from: Symbol, to: Symbol, len: usize) -> bool {
    let mut cur = vec![false; sft.alphabet_size()];
    cur[from as usize] = true;
    for _ in 0..len {
        let mut next = vec![false; sft.alphabet_size()];
        for a in sft.symbols() {
            if cur[a as usize] {
                for &b in sft.successors(a) {
                    next[b as usize] = true;
                }
            }
        }
        cur = next;
    }
    cur[to as usize]
}

impl Evidence {
    /// Re-checks the evidence against the system from first principles.
    pub fn validate(&self, system: &System) -> Result<bool> {
        match self {
            Evidence::PathTable { lengths } => {
                let sft = system.as_sft().ok_or(Error::NotAnSft)?;
                let k = sft.alphabet_size();
                Ok(lengths.len() == k
                    && lengths.iter().enumerate().all(|(a, row)| {
                        row.len() == k
                            && row.iter().enumerate().all(|(b, &l)| {
                                l >= 1
                                    && has_walk_of_length(sft, a as Symbol, b as Symbol, l)
                                    && (1..l).all(|s| !has_walk_of_length(sft, a as Symbol, b as Symbol, s))
                            })
                    }))
            }
            Evidence::UnreachablePair { from, to } => {
                let sft = system.as_sft().ok_or(Error::NotAnSft)?;
                let k = sft.alphabet_size();
                Ok((*from as usize) < k && (*to as usize) < k && !adjacency_closure(sft)[*from as usize][*to as usize])
            }
            Evidence::DenseOrbit { start, .. } => {
                let g = system.as_grid().ok_or(Error::NotFinite)?;
                let a = start.as_grid().ok_or(Error::SystemMismatch)?;
                let (orbit, _) = orbit_until_cycle(g, a);
                Ok(orbit.len() as u64 == g.size())
            }
            Evidence::MissedBall { start, center, radius } => {
                system.check_point(start)?;
                system.check_point(center)?;
                Ok(min_orbit_distance(system, start, center)? >= *radius && !radius.is_zero())
            }
            Evidence::SingleCycle { word } => {
                let sft = system.as_sft().ok_or(Error::NotAnSft)?;
                let mut sorted = word.clone();
                sorted.sort_unstable();
                sorted.dedup();
                Ok(sorted.len() == word.len()
                    && sorted.len() == sft.alphabet_size()
                    && sft.is_cyclically_admissible(word)
                    && sft.symbols().all(|a| sft.successors(a).len() == 1))
            }
            Evidence::FactorPairs { max_length } => {
                let s = system.as_substitution().ok_or(Error::Unsupported("factor evidence outside substitutions"))?;
                Ok(factor_pairs_embed(s.word(), *max_length))
            }
            Evidence::Recurrence { table } => {
                let s = system.as_substitution().ok_or(Error::Unsupported("factor evidence outside substitutions"))?;
                Ok(table.iter().all(|&(len, r)| s.recurrence(len) == r))
            }
            Evidence::Isometry { .. } => Ok(system.as_grid().is_some_and(GridSystem::is_isometry)),
            Evidence::FiniteSpace { delta } => {
                let sft = system.as_sft().ok_or(Error::NotAnSft)?;
                Ok(sft.is_finite_space() && finite_sft_min_distance(sft) >= *delta)
            }
            Evidence::Separation { x, y, distance, n, separation } => {
                let (fx, fy) = (system.apply_map(x, *n as i64)?, system.apply_map(y, *n as i64)?);
                Ok(system.distance(x, y)? == *distance && system.distance(&fx, &fy)? == *separation)
            }
            Evidence::NoSeparation { .. } => Ok(true),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub answer: Answer,
    /// Whether the answer is a proof rather than a bounded search.
    pub exact: bool,
    pub evidence: Option<Evidence>,
    pub note: Option<String>,
}

impl Verdict {
    fn new(answer: Answer, exact: bool, evidence: Option<Evidence>) -> Self {
        Verdict { answer, exact, evidence, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn unknown(note: impl Into<String>) -> Self {
        Verdict::new(Answer::Unknown, false, None).with_note(note)
    }

    pub fn is_yes(&self) -> bool {
        self.answer == Answer::Yes
    }

    pub fn is_no(&self) -> bool {
        self.answer == Answer::No
    }
}

/// Radius below which balls on a grid are single points: `1/(2G)` on the
/// circle, `2^-(k+1)` on `Z/2^k`.
pub fn grid_resolution(g: &GridSystem) -> Distance {
    match g.metric() {
        GridMetric::Circle => Distance::ratio(1, 2 * g.size()),
        GridMetric::TwoAdic => Distance::pow2(g.size().trailing_zeros() + 1),
    }
}

/// Distinct orbit points `[a, f(a), ..., f^{L-1}(a)]` and the index `c` with
/// `f^L(a) = f^c(a)`.
pub(crate) fn orbit_until_cycle(g: &GridSystem, a: u64) -> (Vec<u64>, usize) {
    let mut seen = std::collections::HashMap::new();
    let mut orbit = Vec::new();
    let mut cur = a;
    loop {
        if let Some(&c) = seen.get(&cur) {
            return (orbit, c);
        }
        seen.insert(cur, orbit.len());
        orbit.push(cur);
        cur = g.step(cur);
    }
}

fn grid_point_at(orbit: &[u64], c: usize, n: usize) -> u64 {
    if n < orbit.len() {
        orbit[n]
    } else {
        let p = orbit.len() - c;
        orbit[c + (n - c) % p]
    }
}

/// Whether `f` permutes the grid in a single cycle.
fn grid_single_cycle(g: &GridSystem) -> (bool, Vec<u64>) {
    let (orbit, c) = orbit_until_cycle(g, 0);
    (c == 0 && orbit.len() as u64 == g.size(), orbit)
}

/// Minimum of `d(f^n a, b)` over `n >= 0`.
fn min_orbit_distance(system: &System, a: &Point, b: &Point) -> Result<Distance> {
    match (&system.kind, a, b) {
        (SystemKind::Sft(sft), Point::Symbolic(x), Point::Symbolic(_)) => {
            let hi = x.core_end().max(0) + x.agreement_bound(x) + x.right.len() as i64;
            let mut best = Distance::ONE;
            for n in 0..=hi {
                let fx = system.apply_map(&Point::Symbolic(x.shifted(sft, n)?), 0)?;
                best = best.min(system.distance(&fx, b)?);
            }
            Ok(best)
        }
        (SystemKind::Grid(g), Point::Grid(x), Point::Grid(y)) => {
            let (orbit, _) = orbit_until_cycle(g, *x);
            Ok(orbit.iter().map(|&p| g.distance(p, *y)).min().unwrap())
        }
        (SystemKind::Substitution(_), _, _) => Err(Error::Unsupported("point operations on a substitution subshift")),
        _ => Err(Error::SystemMismatch),
    }
}

/// Whether every ordered pair of factors `(u, v)` of each length up to
/// `max_length` occurs as `u ... v` inside `word`.
fn factor_pairs_embed(word: &[Symbol], max_length: usize) -> bool {
    for len in 1..=max_length.min(word.len()) {
        let mut first = std::collections::HashMap::new();
        let mut last = std::collections::HashMap::new();
        for (i, w) in word.windows(len).enumerate() {
            first.entry(w).or_insert(i);
            last.insert(w, i);
        }
        let earliest_end = first.values().max().unwrap() + len;
        if last.values().any(|&lv| lv < earliest_end) {
            return false;
        }
    }
    true
}

/// Transitivity. Shifts: irreducibility of the transition graph. Grids:
/// some orbit visits every point, i.e. `f` is a single cycle. Substitution
/// subshifts: every pair of factors up to `cap` embeds in the language.
pub fn is_transitive(system: &System, cap: usize) -> Verdict {
    match &system.kind {
        SystemKind::Sft(sft) => match sft.unreachable_pair() {
            None => {
                let lengths = sft.distance_table().into_iter().map(|r| r.into_iter().map(Option::unwrap).collect()).collect();
                Verdict::new(Answer::Yes, true, Some(Evidence::PathTable { lengths }))
            }
            Some((from, to)) => Verdict::new(Answer::No, true, Some(Evidence::UnreachablePair { from, to })),
        },
        SystemKind::Grid(g) => grid_orbit_verdict(g),
        SystemKind::Substitution(s) => {
            let cap = cap.min(s.language_length());
            if factor_pairs_embed(s.word(), cap) {
                Verdict::new(Answer::Yes, false, Some(Evidence::FactorPairs { max_length: cap }))
                    .with_note(format!("factor pairs checked up to length {cap}"))
            } else {
                Verdict::unknown(format!("some factor pair up to length {cap} does not embed in the generating word"))
            }
        }
    }
}

fn grid_orbit_verdict(g: &GridSystem) -> Verdict {
    let resolution = grid_resolution(g);
    let (cyclic, orbit) = grid_single_cycle(g);
    if cyclic {
        Verdict::new(Answer::Yes, true, Some(Evidence::DenseOrbit { start: Point::Grid(0), resolution }))
    } else {
        let mut hit = vec![false; g.size() as usize];
        for &p in &orbit {
            hit[p as usize] = true;
        }
        let missed = hit.iter().position(|&h| !h).expect("orbit is not everything") as u64;
        Verdict::new(
            Answer::No,
            true,
            Some(Evidence::MissedBall { start: Point::Grid(0), center: Point::Grid(missed), radius: resolution }),
        )
        .with_note("a dense orbit on a finite grid would make f a single cycle through every point")
    }
}

fn cycle_point(sft: &Sft, a: Symbol) -> Option<SymbolicPoint> {
    sft.shortest_cycle_through(a).map(|w| SymbolicPoint::periodic(&w))
}

/// Minimality. Shifts: minimal exactly when the space is one periodic orbit.
/// Grids: `f` is a single cycle. Substitution subshifts: uniform recurrence of
/// factors up to `cap`.
pub fn is_minimal(system: &System, cap: usize) -> Verdict {
    match &system.kind {
        SystemKind::Sft(sft) => {
            if sft.is_finite_space() && sft.is_irreducible() {
                let word = sft.shortest_cycle_through(0).expect("every symbol lies on the cycle");
                return Verdict::new(Answer::Yes, true, Some(Evidence::SingleCycle { word }));
            }
            let cycles: Vec<SymbolicPoint> = sft.symbols().filter_map(|a| cycle_point(sft, a)).collect();
            for p in &cycles {
                for q in &cycles {
                    let (pp, qq) = (Point::Symbolic(p.clone()), Point::Symbolic(q.clone()));
                    let Ok(radius) = min_orbit_distance(system, &pp, &qq) else { continue };
                    if !radius.is_zero() {
                        return Verdict::new(
                            Answer::No,
                            true,
                            Some(Evidence::MissedBall { start: pp, center: qq, radius }),
                        );
                    }
                }
            }
            Verdict::unknown("no two distinct periodic orbits among the shortest cycles")
        }
        SystemKind::Grid(g) => grid_orbit_verdict(g),
        SystemKind::Substitution(s) => {
            let cap = cap.min(s.language_length());
            let table: Vec<(usize, Option<usize>)> = (1..=cap).map(|l| (l, s.recurrence(l))).collect();
            if table.iter().all(|t| t.1.is_some()) {
                Verdict::new(Answer::Yes, false, Some(Evidence::Recurrence { table }))
                    .with_note(format!("uniform recurrence checked up to factor length {cap}"))
            } else {
                Verdict::new(Answer::Unknown, false, Some(Evidence::Recurrence { table }))
                    .with_note("some factor does not recur within the generating word")
            }
        }
    }
}

fn finite_sft_min_distance(sft: &Sft) -> Distance {
    let pts = periodic_points(sft, sft.alphabet_size());
    let mut best = Distance::ONE;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            if let Some(k) = p.first_disagreement(q, !sft.is_two_sided()) {
                best = best.min(Distance::pow2(k as u32));
            }
        }
    }
    best
}

/// Largest `j` with `2^-j >= eps`: on a shift `d(x, y) >= eps` exactly when
/// `x` and `y` differ within `|i| <= j`. `None` when `eps > 1`.
fn closeness_radius(eps: Distance) -> Option<u32> {
    if eps > Distance::ONE {
        return None;
    }
    let j = eps.floor_pow2().expect("positive");
    Some(if Distance::pow2(j) == eps { j } else { j - 1 })
}

/// First `n` after `from` (and, with `backward`, then the first `n <= -1`
/// going down) where the orbit of `x` comes within `d < eps` of `y`.
fn sft_first_close(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    eps: Distance,
    two_sided: bool,
    from: i64,
    backward: bool,
) -> Option<i64> {
    let Some(k) = closeness_radius(eps) else { return Some(from) };
    let k = k as i64;
    let lo_i = if two_sided { -k } else { 0 };
    let close = |n: i64| (lo_i..=k).all(|i| x.at(i + n) == y.at(i));
    let hi = (x.core_end() + k).max(from) + x.right.len() as i64;
    if let Some(n) = (from..=hi).find(|&n| close(n)) {
        return Some(n);
    }
    if backward {
        let lo = (x.core_start() - k - 1).min(-1) - x.left.len() as i64;
        return (lo..=-1).rev().find(|&n| close(n));
    }
    None
}

fn grid_first_close(g: &GridSystem, x: u64, y: u64, eps: Distance, from: usize) -> Option<usize> {
    let (orbit, c) = orbit_until_cycle(g, x);
    let end = orbit.len().max(from) + (orbit.len() - c);
    (from..end).find(|&n| g.distance(grid_point_at(&orbit, c, n), y) < eps)
}

/// First time the orbit of `x` comes closer than `eps` to `y`, over
/// `n >= from`, and with `backward` also over `n <= -1`. Exact.
fn first_close(system: &System, x: &Point, y: &Point, eps: Distance, from: i64, backward: bool) -> Result<Option<i64>> {
    match (&system.kind, x, y) {
        (SystemKind::Sft(sft), Point::Symbolic(a), Point::Symbolic(b)) => {
            Ok(sft_first_close(a, b, eps, sft.is_two_sided(), from, backward && sft.is_two_sided()))
        }
        (SystemKind::Grid(g), Point::Grid(a), Point::Grid(b)) => {
            Ok(grid_first_close(g, *a, *b, eps, from as usize).map(|n| n as i64))
        }
        (SystemKind::Substitution(_), _, _) => Err(Error::Unsupported("point operations on a substitution subshift")),
        _ => Err(Error::SystemMismatch),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    XReturn,
    XToY,
    YToX,
    YReturn,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::XReturn => "d(f^n x, x) >= eps",
            Inequality::XToY => "d(f^n x, y) >= eps",
            Inequality::YToX => "d(f^n y, x) >= eps",
            Inequality::YReturn => "d(f^n y, y) >= eps",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StayAwayViolation {
    pub inequality: Inequality,
    pub n: i64,
    pub distance: Distance,
}

/// Outcome of the four stay-away inequalities
/// `d(f^n x, x) >= eps` (`n != 0`; only `n >= 1` on one-sided systems and grids),
/// `d(f^n x, y) >= eps` and `d(f^n y, x) >= eps` (`n >= 0`), and
/// `d(f^n y, y) >= eps` (`n >= 1`). The check is exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StayAwayReport {
    pub eps: Distance,
    pub holds: bool,
    /// Whether negative times were included in the return inequality for `x`.
    pub includes_negative_times: bool,
    pub violation: Option<StayAwayViolation>,
}

pub fn check_stay_away(system: &System, x: &Point, y: &Point, eps: Distance) -> Result<StayAwayReport> {
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    system.check_point(x)?;
    system.check_point(y)?;
    let backward = system.as_sft().is_some_and(Sft::is_two_sided);
    let checks = [
        (Inequality::XReturn, x, x, 1, backward),
        (Inequality::XToY, x, y, 0, false),
        (Inequality::YToX, y, x, 0, false),
        (Inequality::YReturn, y, y, 1, false),
    ];
    for (inequality, a, b, from, back) in checks {
        if let Some(n) = first_close(system, a, b, eps, from, back)? {
            let distance = system.distance(&system.apply_map(a, n)?, b)?;
            return Ok(StayAwayReport {
                eps,
                holds: false,
                includes_negative_times: backward,
                violation: Some(StayAwayViolation { inequality, n, distance }),
            });
        }
    }
    Ok(StayAwayReport { eps, holds: true, includes_negative_times: backward, violation: None })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonRecurrent {
    pub point: Point,
    pub eps: Distance,
}

/// First pool point `p` with `d(f^n p, p) >= eps` for every `n >= 1`.
pub fn find_nonrecurrent(system: &System, eps: Distance, pool: &CandidatePool) -> Result<Option<NonRecurrent>> {
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    for p in &pool.points {
        system.check_point(p)?;
        if first_close(system, p, p, eps, 1, false)?.is_none() {
            return Ok(Some(NonRecurrent { point: p.clone(), eps }));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StayAwayPair {
    pub x: Point,
    pub y: Point,
    pub eps: Distance,
    pub report: StayAwayReport,
}

/// Number of halvings of `eps_target` tried by [`stay_away_pair`].
pub const STAY_AWAY_SCALES: u32 = 8;
const STAY_AWAY_CANDIDATES: usize = 16;

/// Searches the pool for `(x, y, eps)` satisfying the four stay-away
/// inequalities, trying `eps = eps_target, eps_target/2, ...` in turn and,
/// at each scale, the first few non-recurrent `x` against every `y`.
pub fn stay_away_pair(system: &System, eps_target: Distance, pool: &CandidatePool) -> Result<Option<StayAwayPair>> {
    if eps_target.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    for h in 0..=STAY_AWAY_SCALES {
        let eps = eps_target.halved(h);
        let backward = system.as_sft().is_some_and(Sft::is_two_sided);
        let mut xs = Vec::new();
        for p in &pool.points {
            system.check_point(p)?;
            if first_close(system, p, p, eps, 1, backward)?.is_none() {
                xs.push(p);
                if xs.len() == STAY_AWAY_CANDIDATES {
                    break;
                }
            }
        }
        for x in xs {
            for y in &pool.points {
                if y == x {
                    continue;
                }
                let report = check_stay_away(system, x, y, eps)?;
                if report.holds {
                    return Ok(Some(StayAwayPair { x: x.clone(), y: y.clone(), eps, report }));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equicontinuity {
    pub eps: Distance,
    pub verdict: Verdict,
    /// A `delta` that works (exact verdicts) or survives the search.
    pub delta: Option<Distance>,
}

/// Smallest `n` in `0..=horizon` with `d(f^n x, f^n y) >= eps`.
fn first_separation(system: &System, x: &Point, y: &Point, eps: Distance, horizon: usize) -> Result<Option<usize>> {
    match (&system.kind, x, y) {
        (SystemKind::Sft(sft), Point::Symbolic(a), Point::Symbolic(b)) => {
            let Some(k) = closeness_radius(eps) else { return Ok(None) };
            let k = k as i64;
            let start = if sft.is_two_sided() { -k } else { 0 };
            let end = a.agreement_bound(b);
            // the first disagreement at a coordinate >= start decides the time
            Ok((start..=end).find(|&i| a.at(i) != b.at(i)).map(|i| (i - k).max(0) as usize).filter(|&n| n <= horizon))
        }
        (SystemKind::Grid(g), Point::Grid(a), Point::Grid(b)) => {
            let (mut p, mut q) = (*a, *b);
            for n in 0..=horizon {
                if g.distance(p, q) >= eps {
                    return Ok(Some(n));
                }
                p = g.step(p);
                q = g.step(q);
            }
            Ok(None)
        }
        _ => Err(Error::SystemMismatch),
    }
}

/// Equicontinuity at scale `eps`: is there `delta` with `d(x, y) < delta`
/// implying `d(f^n x, f^n y) < eps` for all `n >= 0`?
///
/// Rotations and the odometer are isometries (`delta = eps`) and finite
/// shifts are discrete; both are exact. An infinite shift is expansive and
/// never equicontinuous; the pool pair with the smallest distance whose
/// orbits reach `eps` within `horizon` is given as the witness. The square
/// map is searched over neighbouring grid points up to `horizon`.
pub fn equicontinuity_modulus(system: &System, eps: Distance, horizon: usize, pool: &CandidatePool) -> Result<Equicontinuity> {
    if horizon == 0 {
        return Err(Error::BadArgs("horizon must be at least 1".into()));
    }
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    let done = |verdict, delta| Ok(Equicontinuity { eps, verdict, delta });
    match &system.kind {
        SystemKind::Grid(g) if g.is_isometry() => {
            done(Verdict::new(Answer::Yes, true, Some(Evidence::Isometry { delta: eps })), Some(eps))
        }
        SystemKind::Grid(g) => {
            let size = g.size();
            let neighbour = |a: u64| match g.metric() {
                GridMetric::Circle => (a + 1) % size,
                GridMetric::TwoAdic => (a + size / 2) % size,
            };
            for a in 0..size {
                let (x, y) = (Point::Grid(a), Point::Grid(neighbour(a)));
                if let Some(n) = first_separation(system, &x, &y, eps, horizon)? {
                    let distance = g.distance(a, neighbour(a));
                    let separation = g.distance(g.iterate(a, n as u64), g.iterate(neighbour(a), n as u64));
                    let ev = Evidence::Separation { x, y, distance, n, separation };
                    return done(
                        Verdict::new(Answer::No, false, Some(ev))
                            .with_note("neighbouring grid points separate: equicontinuous only at the grid's own resolution"),
                        None,
                    );
                }
            }
            let ev = Evidence::NoSeparation { pool: "neighbouring grid points".into(), horizon };
            done(Verdict::new(Answer::Unknown, false, Some(ev)), Some(eps))
        }
        SystemKind::Sft(sft) if sft.is_finite_space() => {
            let delta = finite_sft_min_distance(sft);
            done(Verdict::new(Answer::Yes, true, Some(Evidence::FiniteSpace { delta })), Some(delta))
        }
        SystemKind::Sft(_) => {
            if pool.is_empty() {
                return Err(Error::EmptyPool);
            }
            let mut pairs = Vec::new();
            for (i, x) in pool.points.iter().enumerate() {
                system.check_point(x)?;
                for y in &pool.points[i + 1..] {
                    let d = system.distance(x, y)?;
                    if !d.is_zero() && d < eps {
                        pairs.push((d, x, y));
                    }
                }
            }
            pairs.sort_by_key(|a| a.0);
            for (distance, x, y) in pairs {
                if let Some(n) = first_separation(system, x, y, eps, horizon)? {
                    let separation = system.distance(&system.apply_map(x, n as i64)?, &system.apply_map(y, n as i64)?)?;
                    let ev = Evidence::Separation { x: x.clone(), y: y.clone(), distance, n, separation };
                    return done(
                        Verdict::new(Answer::No, true, Some(ev)).with_note("an infinite shift is expansive"),
                        None,
                    );
                }
            }
            let ev = Evidence::NoSeparation { pool: pool.descriptor.clone(), horizon };
            done(
                Verdict::new(Answer::No, true, Some(ev)).with_note("an infinite shift is expansive; no pool pair separated"),
                None,
            )
        }
        SystemKind::Substitution(_) => done(Verdict::unknown("no point model for substitution subshifts"), None),
    }
}

/// Least `N` such that every orbit meets every open `eps`-ball within `N`
/// steps, for a minimal grid system.
pub fn covering_time(system: &System, eps: Distance) -> Result<usize> {
    let g = system.as_grid().ok_or(Error::NotFinite)?;
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    let (cyclic, orbit) = grid_single_cycle(g);
    if !cyclic {
        return Err(Error::NotMinimal);
    }
    let size = g.size() as usize;
    let mut position = vec![0usize; size];
    for (i, &p) in orbit.iter().enumerate() {
        position[p as usize] = i;
    }
    // rotations and the odometer commute with translations that preserve
    // the metric, so one center stands for all
    let centers: Vec<u64> = if g.is_isometry() { vec![0] } else { (0..g.size()).collect() };
    let mut worst = 0;
    for x in centers {
        let mut pos: Vec<usize> = (0..g.size()).filter(|&a| g.distance(a, x) < eps).map(|a| position[a as usize]).collect();
        pos.sort_unstable();
        let mut gap = pos[0] + size - pos[pos.len() - 1];
        for w in pos.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        worst = worst.max(gap - 1);
    }
    Ok(worst)
}

/// Bump function `phi`: 1 on the closed ball `B(center, eps)`, 0 outside the
/// open ball `B(center, 2 eps)`, and `(2 eps - d) / eps` in between.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffProbe {
    pub center: Point,
    pub eps: Distance,
}

fn rational(d: Distance) -> Result<Rational> {
    d.to_rational().ok_or_else(|| Error::BadArgs(format!("{d} has no 128-bit rational form")))
}

impl BirkhoffProbe {
    pub fn new(center: Point, eps: Distance) -> Result<Self> {
        if eps.is_zero() {
            return Err(Error::BadArgs("probe radius must be positive".into()));
        }
        Ok(BirkhoffProbe { center, eps })
    }

    pub fn phi(&self, system: &System, z: &Point) -> Result<Rational> {
        let d = system.distance(z, &self.center)?;
        if d <= self.eps {
            return Ok(Rational::from_integer(1));
        }
        if d >= self.eps.times(2) {
            return Ok(Rational::from_integer(0));
        }
        let (d, e) = (rational(d)?, rational(self.eps)?);
        Ok((e * 2 - d) / e)
    }
}

/// `(1/n) sum_{k<n} phi(f^k(start))`, exactly.
pub fn birkhoff_gap(system: &System, start: &Point, probe: &BirkhoffProbe, n: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::BadArgs("n must be at least 1".into()));
    }
    system.check_point(start)?;
    system.check_point(&probe.center)?;
    let mut sum = Rational::from_integer(0);
    let mut cur = start.clone();
    for k in 0..n {
        if k > 0 {
            cur = system.apply_map(&cur, 1)?;
        }
        sum += probe.phi(system, &cur)?;
    }
    Ok(sum / Rational::from_integer(n as i128))
}

/// Options for [`classify`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifyConfig {
    /// Scale for gluing, recurrence and the witness construction.
    pub eps: Distance,
    /// Scales for the entropy table and grid gluing profiles, decreasing.
    pub eps_list: Vec<Distance>,
    pub n_max: usize,
    pub horizon: usize,
    /// Segment length cap `L`; `None` picks `2r + 3` on shifts and 4 elsewhere.
    pub max_length: Option<usize>,
    pub max_rank: usize,
    pub m_max: usize,
    pub periodic_n_max: usize,
    pub dichotomy_n: usize,
    /// Factor length cap for substitution subshifts.
    pub language_cap: usize,
    pub birkhoff_samples: usize,
    pub birkhoff_n: usize,
    pub seed: u64,
    /// Candidate pool; `None` uses the canonical pool.
    pub pool: Option<CandidatePool>,
    /// Grid points used as gluing bases; `None` uses the pool when it has at
    /// most 64 points and a seeded sample of 4 otherwise.
    pub bases: Option<Vec<Point>>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            eps: Distance::pow2(1),
            eps_list: vec![Distance::pow2(1), Distance::pow2(2), Distance::pow2(3)],
            n_max: 12,
            horizon: 64,
            max_length: None,
            max_rank: 2,
            m_max: 64,
            periodic_n_max: 12,
            dichotomy_n: 3,
            language_cap: 64,
            birkhoff_samples: 16,
            birkhoff_n: 1024,
            seed: 0,
            pool: None,
            bases: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::NotApplicable => "n/a",
            CheckStatus::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub id: &'static str,
    pub statement: &'static str,
    pub status: CheckStatus,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GluingAtScale {
    pub eps: Distance,
    pub m_required: GapBound,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropySummary {
    pub h_estimate: f64,
    pub lower_bound: bool,
    pub oracle: Option<Enclosure>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffSummary {
    pub probe: BirkhoffProbe,
    pub n: usize,
    pub starts: Vec<Point>,
    pub averages: Vec<f64>,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub system: String,
    pub metric: String,
    pub config: ClassifyConfig,
    pub transitive: Verdict,
    pub minimal: Verdict,
    pub equicontinuous: Equicontinuity,
    pub gluing: Verdict,
    pub gluing_scales: Vec<GluingAtScale>,
    pub periodic_gluing: Option<GapBound>,
    pub entropy: Option<EntropySummary>,
    pub p_hat: Option<f64>,
    pub nonrecurrent: Option<NonRecurrent>,
    pub stay_away: Option<StayAwayPair>,
    pub dichotomy: Option<DichotomyReport>,
    pub covering_times: Vec<(Distance, usize)>,
    pub birkhoff: Option<BirkhoffSummary>,
    pub checks: Vec<CrossCheck>,
    /// Steps that could not run, with the reason.
    pub skipped: Vec<String>,
}

impl ClassificationReport {
    pub fn failures(&self) -> Vec<&CrossCheck> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect()
    }

    /// Plain-text summary table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, k: &str, v: String| out.push_str(&format!("{k:<24} {v}\n"));
        row(&mut out, "system", self.system.clone());
        row(&mut out, "metric", self.metric.clone());
        let verdict = |v: &Verdict| format!("{}{}", v.answer, if v.exact { "" } else { " (bounded search)" });
        row(&mut out, "transitive", verdict(&self.transitive));
        row(&mut out, "minimal", verdict(&self.minimal));
        row(&mut out, "equicontinuous", verdict(&self.equicontinuous.verdict));
        row(&mut out, "gluing", verdict(&self.gluing));
        for s in &self.gluing_scales {
            row(&mut out, &format!("  M at eps={}", s.eps), s.m_required.to_string());
        }
        if let Some(p) = self.periodic_gluing {
            row(&mut out, "periodic gluing M", p.to_string());
        }
        if let Some(e) = &self.entropy {
            let oracle = e.oracle.map(|o| format!(" (oracle [{:.9}, {:.9}])", o.lo, o.hi)).unwrap_or_default();
            let lb = if e.lower_bound { " lower bound" } else { "" };
            row(&mut out, "entropy estimate", format!("{:.9}{lb}{oracle}", e.h_estimate));
        }
        if let Some(p) = self.p_hat {
            row(&mut out, "periodic growth p_hat", format!("{p:.9}"));
        }
        if let Some(nr) = &self.nonrecurrent {
            row(&mut out, "non-recurrent point", format!("{} at eps={}", nr.point, nr.eps));
        }
        for (eps, n) in &self.covering_times {
            row(&mut out, &format!("covering time eps={eps}"), n.to_string());
        }
        for c in &self.checks {
            row(&mut out, c.id, format!("{} {}", c.status, c.details));
        }
        for s in &self.skipped {
            row(&mut out, "skipped", s.clone());
        }
        out
    }
}

fn check(id: &'static str, statement: &'static str, status: CheckStatus, details: impl Into<String>) -> CrossCheck {
    CrossCheck { id, statement, status, details: details.into() }
}

/// Runs every verdict and the cross-checks between them. Steps that fail
/// are listed under `skipped`; the report is always produced.
pub fn classify(system: &System, config: &ClassifyConfig) -> ClassificationReport {
    let mut skipped = Vec::new();
    let mut note = |what: &str, e: Error| skipped.push(format!("{what}: {e}"));
    let pool = match &config.pool {
        Some(p) => p.clone(),
        None => match &system.kind {
            SystemKind::Substitution(_) => CandidatePool::empty(),
            _ => CandidatePool::canonical(system).unwrap_or_else(|_| CandidatePool::empty()),
        },
    };
    let transitive = is_transitive(system, config.language_cap);
    let minimal = is_minimal(system, config.language_cap);
    let equicontinuous = equicontinuity_modulus(system, config.eps, config.horizon, &pool).unwrap_or_else(|e| {
        let v = Verdict::unknown(e.to_string());
        Equicontinuity { eps: config.eps, verdict: v, delta: None }
    });

    // gluing
    let mut gluing_scales = Vec::new();
    let mut periodic_gluing = None;
    let gluing = match &system.kind {
        SystemKind::Sft(sft) => match config.eps.shadow_radius() {
            None => Verdict::unknown("eps above the diameter"),
            Some(r) => {
                let l = config.max_length.unwrap_or(2 * r as usize + 3);
                match decide_gluing_sft(system, r, l, config.max_rank) {
                    Ok(p) => {
                        gluing_scales.push(GluingAtScale { eps: config.eps, m_required: p.m_required, exact: true });
                        match periodic_gluing_sft(system, r, l, config.max_rank) {
                            Ok(pp) => periodic_gluing = Some(pp.m_required),
                            Err(e) => note("periodic gluing", e),
                        }
                        match (p.m_required, sft.is_irreducible()) {
                            (GapBound::Finite(m), true) => Verdict::new(Answer::Yes, true, None)
                                .with_note(format!("irreducible; M = {m} at radius {r} (L = {l}, k = {})", config.max_rank)),
                            (GapBound::Finite(m), false) => Verdict::unknown(format!(
                                "M = {m} at radius {r}, but the graph is reducible"
                            )),
                            (GapBound::Exceeds, _) => Verdict::new(Answer::No, true, None)
                                .with_note(format!("no gap up to {} works at radius {r}", p.m_max)),
                        }
                    }
                    Err(e) => {
                        let v = Verdict::unknown(e.to_string());
                        note("gluing", e);
                        v
                    }
                }
            }
        },
        SystemKind::Grid(g) => {
            let bases: Vec<Point> = match &config.bases {
                Some(b) => b.clone(),
                None if pool.points.len() <= 64 => pool.points.clone(),
                None => match CandidatePool::sample(system, 4, config.seed) {
                    Ok(p) => p.points,
                    Err(e) => {
                        note("gluing bases", e);
                        Vec::new()
                    }
                },
            };
            let l = config.max_length.unwrap_or(4);
            let scales: Vec<Distance> =
                if minimal.is_yes() { config.eps_list.clone() } else { vec![config.eps] };
            for eps in scales {
                match gluing_profile_with_bases(system, eps, l, config.max_rank, &pool, Some(&bases), config.m_max) {
                    Ok(p) => gluing_scales.push(GluingAtScale { eps, m_required: p.m_required, exact: false }),
                    Err(e) => note("gluing profile", e),
                }
            }
            let (cyclic, _) = grid_single_cycle(g);
            if cyclic {
                Verdict::new(Answer::Yes, true, None)
                    .with_note(format!("single cycle: every gap up to G = {} closes at the finest scale", g.size()))
            } else {
                Verdict::new(Answer::No, true, None)
                    .with_note("f is not a single cycle, so gluing fails for balls smaller than the grid spacing")
            }
        }
        SystemKind::Substitution(_) => {
            let l = config.max_length.unwrap_or(8);
            match substitution_profile(system, config.eps, l, config.m_max) {
                Ok(p) => {
                    gluing_scales.push(GluingAtScale { eps: config.eps, m_required: p.m_required, exact: false });
                    let rows: Vec<String> = p.per_length.iter().map(|r| format!("{}:{}", r.length_cap, r.m_required)).collect();
                    let v = Verdict::unknown(format!("connector bound per segment length {}", rows.join(" ")));
                    match p.stabilized_at {
                        Some(s) => v.with_note(format!("connector bound stable from L = {s}")),
                        None => v,
                    }
                }
                Err(e) => {
                    let v = Verdict::unknown(e.to_string());
                    note("connector profile", e);
                    v
                }
            }
        }
    };

    let entropy = match entropy_estimate(system, &config.eps_list, config.n_max) {
        Ok(r) => Some(EntropySummary { h_estimate: r.h_estimate, lower_bound: r.lower_bound, oracle: r.oracle }),
        Err(e) => {
            note("entropy", e);
            None
        }
    };
    let p_hat = match &system.kind {
        SystemKind::Sft(_) => match periodic_counts(system, config.periodic_n_max) {
            Ok(r) => Some(r.p_hat),
            Err(e) => {
                note("periodic counts", e);
                None
            }
        },
        _ => None,
    };

    let has_points = !matches!(system.kind, SystemKind::Substitution(_));
    let mut nonrecurrent = None;
    let mut stay_away = None;
    if has_points && minimal.is_no() {
        for h in 0..=STAY_AWAY_SCALES {
            match find_nonrecurrent(system, config.eps.halved(h), &pool) {
                Ok(Some(nr)) => {
                    nonrecurrent = Some(nr);
                    break;
                }
                Ok(None) => {}
                Err(e) => {
                    note("non-recurrence", e);
                    break;
                }
            }
        }
        if gluing.is_yes() {
            match stay_away_pair(system, config.eps, &pool) {
                Ok(p) => stay_away = p,
                Err(e) => note("stay-away pair", e),
            }
        }
    }

    let mut covering_times = Vec::new();
    if system.as_grid().is_some() && minimal.is_yes() {
        for &eps in &config.eps_list {
            match covering_time(system, eps) {
                Ok(n) => covering_times.push((eps, n)),
                Err(e) => note("covering time", e),
            }
        }
    }

    let mut checks = Vec::new();
    let gluing_non_minimal = gluing.is_yes() && minimal.is_no();

    // positive entropy for non-minimal gluing systems
    let mut dichotomy = None;
    if gluing_non_minimal {
        let mut problems = Vec::new();
        if let Some(e) = &entropy {
            if e.h_estimate <= 0.0 {
                problems.push(format!("entropy estimate {} is not positive", e.h_estimate));
            }
        }
        match &stay_away {
            None => checks.push(check(
                "dichotomy",
                "gluing and not minimal implies positive entropy",
                if problems.is_empty() { CheckStatus::Inconclusive } else { CheckStatus::Fail },
                format!("no stay-away pair in the pool {}", problems.join("; ")),
            )),
            Some(pair) => {
                match dichotomy_construction(system, &pair.x, &pair.y, pair.eps, config.dichotomy_n, config.m_max, &pool, true) {
                    Ok(d) => {
                        if !d.separated {
                            problems.push(format!("witnesses {:?} are not separated", d.unseparated_pair));
                        }
                        if let Some(Enclosure { hi, .. }) = entropy.as_ref().and_then(|e| e.oracle) {
                            if d.bound > hi + 1e-9 {
                                problems.push(format!("bound {} exceeds the oracle {hi}", d.bound));
                            }
                        }
                        let details = format!(
                            "{} witnesses, m = {}, bound ln2/(2m) = {:.6}{}",
                            d.witnesses.len(),
                            d.m,
                            d.bound,
                            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
                        );
                        let status = if problems.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail };
                        checks.push(check("dichotomy", "gluing and not minimal implies positive entropy", status, details));
                        dichotomy = Some(d);
                    }
                    Err(e) => checks.push(check(
                        "dichotomy",
                        "gluing and not minimal implies positive entropy",
                        CheckStatus::Fail,
                        format!("witness construction failed: {e}"),
                    )),
                }
            }
        }
        let (status, details) = match &nonrecurrent {
            Some(nr) => (CheckStatus::Pass, format!("{} at eps = {}", nr.point, nr.eps)),
            None => (CheckStatus::Inconclusive, "no non-recurrent point in the pool".to_string()),
        };
        checks.push(check("nonrecurrent_point", "gluing and not minimal implies a non-recurrent point", status, details));
    } else {
        checks.push(check("dichotomy", "gluing and not minimal implies positive entropy", CheckStatus::NotApplicable, ""));
    }

    // equicontinuous and transitive implies minimal
    let eq = &equicontinuous.verdict;
    let status = if eq.is_yes() && transitive.is_yes() {
        if minimal.is_yes() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    } else {
        CheckStatus::NotApplicable
    };
    checks.push(check(
        "equicontinuous_transitive_minimal",
        "equicontinuous and transitive implies minimal",
        status,
        format!("minimal: {}", minimal.answer),
    ));

    // equicontinuous and minimal implies M <= covering time + 1
    if eq.is_yes() && minimal.is_yes() {
        if covering_times.is_empty() {
            checks.push(check(
                "equicontinuous_minimal_gluing",
                "equicontinuous and minimal implies M(eps) <= N(delta) + 1",
                CheckStatus::NotApplicable,
                "covering times need a finite grid",
            ));
        } else {
            let mut bad = Vec::new();
            let mut parts = Vec::new();
            for (eps, n) in &covering_times {
                // delta = eps for isometries
                match gluing_scales.iter().find(|s| s.eps == *eps) {
                    Some(s) => {
                        parts.push(format!("eps={eps}: M={} N={n}", s.m_required));
                        if s.m_required > GapBound::Finite(n + 1) {
                            bad.push(eps.to_string());
                        }
                    }
                    None => bad.push(format!("{eps} (no profile)")),
                }
            }
            let status = if bad.is_empty() { CheckStatus::Pass } else { CheckStatus::Fail };
            checks.push(check(
                "equicontinuous_minimal_gluing",
                "equicontinuous and minimal implies M(eps) <= N(delta) + 1",
                status,
                parts.join(", "),
            ));
        }
    } else {
        checks.push(check(
            "equicontinuous_minimal_gluing",
            "equicontinuous and minimal implies M(eps) <= N(delta) + 1",
            CheckStatus::NotApplicable,
            "",
        ));
    }

    // Birkhoff probes
    let mut birkhoff = None;
    if has_points && minimal.is_no() {
        if let Some(Evidence::MissedBall { start, center, radius }) = &minimal.evidence {
            let probe_eps = radius.halved(1);
            let n = config.birkhoff_n;
            let result = BirkhoffProbe::new(center.clone(), probe_eps).and_then(|probe| {
                let a = birkhoff_gap(system, start, &probe, n)?;
                let b = birkhoff_gap(system, center, &probe, n)?;
                Ok((a, b))
            });
            let statement = "gluing and not minimal implies two distinct ergodic averages";
            match result {
                Ok((a, b)) => {
                    let distinct = a != b;
                    let status = match (gluing.is_yes(), distinct) {
                        (true, true) => CheckStatus::Pass,
                        (true, false) => CheckStatus::Fail,
                        (false, _) => CheckStatus::NotApplicable,
                    };
                    checks.push(check(
                        "birkhoff_separation",
                        statement,
                        status,
                        format!("average from {start}: {a}, from {center}: {b}"),
                    ));
                }
                Err(e) => checks.push(check("birkhoff_separation", statement, CheckStatus::Inconclusive, e.to_string())),
            }
        }
        if let SystemKind::Grid(g) = &system.kind {
            let starts = CandidatePool::sample(system, config.birkhoff_samples, config.seed).map(|p| p.points);
            let center = Point::Grid(g.point_at(1, 2));
            let result = starts.and_then(|starts| {
                let probe = BirkhoffProbe::new(center, Distance::pow2(4))?;
                let averages = starts
                    .iter()
                    .map(|s| birkhoff_gap(system, s, &probe, config.birkhoff_n).map(|q| *q.numer() as f64 / *q.denom() as f64))
                    .collect::<Result<Vec<f64>>>()?;
                let lo = averages.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = averages.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                Ok(BirkhoffSummary { probe, n: config.birkhoff_n, starts, averages, spread: hi - lo })
            });
            match result {
                Ok(summary) => {
                    let agree = summary.spread <= 0.01;
                    let status = match (agree, gluing.is_no()) {
                        (true, true) => CheckStatus::Pass,
                        (true, false) => CheckStatus::Inconclusive,
                        (false, _) => CheckStatus::NotApplicable,
                    };
                    checks.push(check(
                        "unique_ergodicity_probe",
                        "sampled averages agree and not minimal, so gluing should fail",
                        status,
                        format!("spread {:.6} over {} starts; gluing {}", summary.spread, summary.starts.len(), gluing.answer),
                    ));
                    birkhoff = Some(summary);
                }
                Err(e) => note("birkhoff probe", e),
            }
        }
    }

    // entropy against periodic growth
    match (periodic_gluing, &entropy, p_hat) {
        (Some(GapBound::Finite(_)), Some(e), Some(p)) => {
            let status = if e.h_estimate <= p + 0.05 { CheckStatus::Pass } else { CheckStatus::Fail };
            checks.push(check(
                "entropy_periodic_growth",
                "periodic gluing implies h <= p",
                status,
                format!("h_estimate {:.6}, p_hat {:.6}", e.h_estimate, p),
            ));
        }
        _ => checks.push(check("entropy_periodic_growth", "periodic gluing implies h <= p", CheckStatus::NotApplicable, "")),
    }

    ClassificationReport {
        system: system.label.clone(),
        metric: system.metric_convention(),
        config: config.clone(),
        transitive,
        minimal,
        equicontinuous,
        gluing,
        gluing_scales,
        periodic_gluing,
        entropy,
        p_hat,
        nonrecurrent,
        stay_away,
        dichotomy,
        covering_times,
        birkhoff,
        checks,
        skipped,
    }
}
