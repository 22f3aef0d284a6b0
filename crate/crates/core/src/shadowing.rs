//! Orbit sequences, gaps, the shadowing schedule, verification of
//! ε-shadowing and the search for shadowing points.
//!
//! A point `z` ε-shadows the orbit sequence `C = ((x_1, m_1), ..., (x_k, m_k))`
//! with gap `(t_1, ..., t_{k-1})` when
//! `d(f^{s_j + l}(z), f^l(x_j)) < ε` for every `j` and `0 <= l < m_j`, where
//! `s_1 = 0` and `s_j = sum_{i<j} (m_i + t_i - 1)`.

use std::collections::HashSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::systems::family::{heteroclinic_points, orbit_representatives, periodic_points};
use crate::systems::{GridSystem, Point, Sft, Symbol, SymbolicPoint, System, SystemKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Segment {
    pub point: Point,
    pub length: usize,
}

/// A nonempty list of orbit segments `(x_j, m_j)` with every `m_j >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct OrbitSequence {
    segments: Vec<Segment>,
}

impl OrbitSequence {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::BadArgs("an orbit sequence needs at least one segment".into()));
        }
        if let Some(j) = segments.iter().position(|s| s.length == 0) {
            return Err(Error::BadArgs(format!("segment {} has length 0", j + 1)));
        }
        Ok(OrbitSequence { segments })
    }

    pub fn from_pairs<I: IntoIterator<Item = (Point, usize)>>(pairs: I) -> Result<Self> {
        OrbitSequence::new(pairs.into_iter().map(|(point, length)| Segment { point, length }).collect())
    }

    pub fn rank(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.length).collect()
    }

    /// Compact one-line description, e.g. `(0)^inf:2 | (1)^inf:2`.
    pub fn descriptor(&self) -> String {
        self.segments.iter().map(|s| format!("{}:{}", s.point, s.length)).collect::<Vec<_>>().join(" | ")
    }
}

fn check_gap(c: &OrbitSequence, gap: &[usize]) -> Result<()> {
    if gap.len() + 1 != c.rank() {
        return Err(Error::RankMismatch { rank: c.rank(), gaps: gap.len() });
    }
    if gap.contains(&0) {
        return Err(Error::BadArgs("gaps must be at least 1".into()));
    }
    Ok(())
}

/// Start times `s_1, ..., s_k`.
pub fn schedule(c: &OrbitSequence, gap: &[usize]) -> Result<Vec<i64>> {
    check_gap(c, gap)?;
    Ok(starts(&c.lengths(), gap))
}

fn starts(lengths: &[usize], gap: &[usize]) -> Vec<i64> {
    let mut s = Vec::with_capacity(lengths.len());
    let mut cur = 0i64;
    for (j, &m) in lengths.iter().enumerate() {
        s.push(cur);
        if j < gap.len() {
            cur += (m + gap[j]) as i64 - 1;
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ShadowVerdict {
    Accepted,
    /// First failing condition in `(segment, step)` order; `segment` is 1-based.
    Rejected { segment: usize, step: usize, distance: Distance },
}

impl ShadowVerdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, ShadowVerdict::Accepted)
    }
}

/// Checks every shadowing condition with the strict inequality `d < eps`.
pub fn verify_shadow(system: &System, c: &OrbitSequence, gap: &[usize], z: &Point, eps: Distance) -> Result<ShadowVerdict> {
    let s = schedule(c, gap)?;
    system.check_point(z)?;
    for (j, seg) in c.segments().iter().enumerate() {
        let mut zj = system.apply_map(z, s[j])?;
        let mut xj = seg.point.clone();
        for l in 0..seg.length {
            if l > 0 {
                zj = system.apply_map(&zj, 1)?;
                xj = system.apply_map(&xj, 1)?;
            }
            let d = system.distance(&zj, &xj)?;
            if d >= eps {
                return Ok(ShadowVerdict::Rejected { segment: j + 1, step: l, distance: d });
            }
        }
    }
    Ok(ShadowVerdict::Accepted)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShadowWitness {
    pub z: Point,
    pub gap: Vec<usize>,
    pub epsilon: Distance,
    pub schedule: Vec<i64>,
}

/// Outcome of the exact shadow search on a shift of finite type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ShadowSearch {
    Found { z: SymbolicPoint },
    /// Two segments force different symbols at `coordinate`.
    Conflict { coordinate: i64, symbols: [Symbol; 2] },
    /// The forced symbols are consistent but no admissible word realizes
    /// them; `coordinate` is where the backward pass first runs dry.
    Unfillable { coordinate: i64 },
}

impl ShadowSearch {
    pub fn witness(&self) -> Option<&SymbolicPoint> {
        match self {
            ShadowSearch::Found { z } => Some(z),
            _ => None,
        }
    }

    pub fn into_witness(self) -> Option<SymbolicPoint> {
        match self {
            ShadowSearch::Found { z } => Some(z),
            _ => None,
        }
    }
}

pub(crate) fn symbolic_segments(c: &OrbitSequence) -> Result<Vec<(&SymbolicPoint, usize)>> {
    c.segments()
        .iter()
        .map(|s| match &s.point {
            Point::Symbolic(p) => Ok((p, s.length)),
            Point::Grid(_) => Err(Error::SystemMismatch),
        })
        .collect()
}

/// Letters forced on `z` by shadowing at radius `r`, over the coordinates
/// `lo..lo + len`.
pub(crate) struct Forced {
    pub lo: i64,
    pub letters: Vec<Option<Symbol>>,
}

pub(crate) fn forced_letters(
    segs: &[(&SymbolicPoint, usize)],
    starts: &[i64],
    r: u32,
    two_sided: bool,
) -> std::result::Result<Forced, ShadowSearch> {
    let r = r as i64;
    let back = if two_sided { r } else { 0 };
    let lo = -back;
    let (_, m_last) = segs[segs.len() - 1];
    let hi = starts[segs.len() - 1] + m_last as i64 - 1 + r;
    let mut letters: Vec<Option<Symbol>> = vec![None; (hi - lo + 1) as usize];
    for (j, &(x, m)) in segs.iter().enumerate() {
        for c in -back..=(m as i64 - 1 + r) {
            let coord = starts[j] + c;
            let want = x.at(c);
            let slot = &mut letters[(coord - lo) as usize];
            match *slot {
                None => *slot = Some(want),
                Some(have) if have == want => {}
                Some(have) => {
                    return Err(ShadowSearch::Conflict { coordinate: coord, symbols: [have, want] });
                }
            }
        }
    }
    Ok(Forced { lo, letters })
}

/// Lexicographically least admissible word matching the forced letters, or
/// the index where backward feasibility fails.
pub(crate) fn fill_word(sft: &Sft, forced: &[Option<Symbol>]) -> std::result::Result<Vec<Symbol>, usize> {
    let n = forced.len();
    let a = sft.alphabet_size();
    let mut feas = vec![false; n * a];
    for i in (0..n).rev() {
        let mut any = false;
        for s in 0..a {
            if forced[i].is_some_and(|f| f as usize != s) {
                continue;
            }
            let ok = i + 1 == n || sft.successors(s as Symbol).iter().any(|&t| feas[(i + 1) * a + t as usize]);
            feas[i * a + s] = ok;
            any |= ok;
        }
        if !any {
            return Err(i);
        }
    }
    let mut word = Vec::with_capacity(n);
    let first = (0..a).find(|&s| feas[s]).expect("position 0 is feasible");
    word.push(first as Symbol);
    for i in 1..n {
        let prev = word[i - 1];
        let next = sft.successors(prev).iter().copied().find(|&t| feas[i * a + t as usize]).expect("feasible successor");
        word.push(next);
    }
    Ok(word)
}

/// Completes a finite admissible word, whose first symbol sits at
/// coordinate `lo`, into an eventually periodic point. Each tail runs around
/// the lowest-index cycle state connected to the word's end.
pub(crate) fn complete_word(sft: &Sft, word: &[Symbol], lo: i64) -> SymbolicPoint {
    let first = word[0];
    let last = *word.last().unwrap();
    let on_cycle = |c: Symbol| sft.shortest_path(c, c).is_some();
    let right_state = sft
        .symbols()
        .find(|&c| on_cycle(c) && (c == last || sft.reachable_from(last)[c as usize]))
        .expect("every symbol reaches a cycle");
    let mut core = word.to_vec();
    if right_state != last {
        core.extend(sft.shortest_path(last, right_state).unwrap());
    }
    let mut right = sft.shortest_cycle_through(right_state).unwrap();
    right.rotate_left(1);
    if !sft.is_two_sided() {
        let origin = -lo;
        let p = SymbolicPoint { left: right.clone(), core, right, origin };
        return p.normalize(sft);
    }
    let left_state = sft
        .symbols()
        .find(|&c| on_cycle(c) && (c == first || sft.reachable_from(c)[first as usize]))
        .expect("every symbol is reached from a cycle");
    let left = sft.shortest_cycle_through(left_state).unwrap();
    let mut prefix = Vec::new();
    if left_state != first {
        let path = sft.shortest_path(left_state, first).unwrap();
        prefix.push(left_state);
        prefix.extend_from_slice(&path[..path.len() - 1]);
    }
    let origin = prefix.len() as i64 - lo;
    prefix.extend(core);
    SymbolicPoint { left, core: prefix, right, origin }.normalize(sft)
}

/// Exact shadow search on a shift of finite type at `eps = 2^-r`.
///
/// Shadowing at radius `r` is equivalent to `z` agreeing with `f^l(x_j)` on
/// the coordinates `s_j + l - r ..= s_j + l + r` (one-sided: from `s_j + l`),
/// so the search intersects the forced letters and fills the free
/// coordinates with the lexicographically least admissible word.
pub fn find_shadow_sft(sft: &Sft, c: &OrbitSequence, gap: &[usize], r: u32) -> Result<ShadowSearch> {
    check_gap(c, gap)?;
    let segs = symbolic_segments(c)?;
    for (x, _) in &segs {
        x.check_admissible(sft)?;
    }
    if c.rank() == 1 {
        return Ok(ShadowSearch::Found { z: segs[0].0.clone() });
    }
    let s = starts(&c.lengths(), gap);
    Ok(search_forced(sft, &segs, &s, r))
}

pub(crate) fn search_forced(sft: &Sft, segs: &[(&SymbolicPoint, usize)], starts: &[i64], r: u32) -> ShadowSearch {
    let forced = match forced_letters(segs, starts, r, sft.is_two_sided()) {
        Ok(f) => f,
        Err(conflict) => return conflict,
    };
    match fill_word(sft, &forced.letters) {
        Ok(word) => ShadowSearch::Found { z: complete_word(sft, &word, forced.lo) },
        Err(i) => ShadowSearch::Unfillable { coordinate: forced.lo + i as i64 },
    }
}

/// Points to try as shadowing candidates on systems without an exact search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidatePool {
    pub descriptor: String,
    pub points: Vec<Point>,
}

impl CandidatePool {
    pub fn new(descriptor: impl Into<String>, points: Vec<Point>) -> Self {
        CandidatePool { descriptor: descriptor.into(), points }
    }

    pub fn empty() -> Self {
        CandidatePool::new("empty", Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every grid point. Shift spaces are infinite, so they get the
    /// canonical pool instead.
    pub fn all(system: &System) -> Result<Self> {
        match &system.kind {
            SystemKind::Grid(g) => Ok(CandidatePool::new("all", (0..g.size()).map(Point::Grid).collect())),
            SystemKind::Sft(_) => CandidatePool::canonical(system),
            SystemKind::Substitution(_) => Err(Error::Unsupported("candidate pools on a substitution subshift")),
        }
    }

    /// Grid systems: every point. Shifts: periodic points of least period at
    /// most 4, then heteroclinic points between orbits of period at most 2
    /// (at most 3 or 4 when needed to get two distinct orbits) with origins
    /// in `-4..=4`.
    pub fn canonical(system: &System) -> Result<Self> {
        match &system.kind {
            SystemKind::Grid(_) => Ok(CandidatePool { descriptor: "canonical".into(), ..CandidatePool::all(system)? }),
            SystemKind::Sft(s) => {
                let mut seen = HashSet::new();
                let points: Vec<Point> = periodic_points(s, 4)
                    .into_iter()
                    .chain(heteroclinic_points(s, heteroclinic_period(s), 4))
                    .filter(|p| seen.insert(p.clone()))
                    .map(Point::Symbolic)
                    .collect();
                Ok(CandidatePool::new("canonical", points))
            }
            SystemKind::Substitution(_) => Err(Error::Unsupported("candidate pools on a substitution subshift")),
        }
    }

    /// `size` points drawn without replacement from the full (grid) or
    /// canonical (shift) pool, kept in pool order.
    pub fn sample(system: &System, size: usize, seed: u64) -> Result<Self> {
        let base = CandidatePool::all(system)?;
        let n = base.points.len();
        let mut idx: Vec<usize> = if size >= n {
            (0..n).collect()
        } else {
            sample(&mut ChaCha8Rng::seed_from_u64(seed), n, size).into_vec()
        };
        idx.sort_unstable();
        let points = idx.into_iter().map(|i| base.points[i].clone()).collect();
        Ok(CandidatePool::new(format!("sample(size={size}, seed={seed})"), points))
    }

    pub(crate) fn grid_points(&self) -> Result<Vec<u64>> {
        self.points.iter().map(|p| p.as_grid().ok_or(Error::SystemMismatch)).collect()
    }
}

fn heteroclinic_period(sft: &Sft) -> usize {
    let mut orbits = 0;
    for p in 1..=4 {
        orbits += orbit_representatives(sft, p).len();
        if p >= 2 && orbits >= 2 {
            return p;
        }
    }
    2
}

/// Searches gaps in `{1..max_gap}^{k-1}` in lexicographic order and returns
/// the first that is ε-shadowed, together with its shadowing point.
///
/// Shifts of finite type use the exact search (a `None` is a proof that no
/// gap up to `max_gap` works); grid systems try every pool point as `z`.
pub fn find_gap_and_shadow(
    system: &System,
    c: &OrbitSequence,
    eps: Distance,
    max_gap: usize,
    pool: &CandidatePool,
) -> Result<Option<(Vec<usize>, Point)>> {
    if max_gap == 0 {
        return Err(Error::BadArgs("M_max must be at least 1".into()));
    }
    for seg in c.segments() {
        system.check_point(&seg.point)?;
    }
    if c.rank() == 1 {
        return Ok(Some((Vec::new(), c.segments()[0].point.clone())));
    }
    match &system.kind {
        SystemKind::Sft(sft) => {
            let Some(r) = eps.shadow_radius() else {
                // every pair of points is closer than eps
                return Ok(Some((vec![1; c.rank() - 1], c.segments()[0].point.clone())));
            };
            let segs = symbolic_segments(c)?;
            Ok(sft_gap_search(sft, &segs, r, 1, max_gap).map(|(g, z)| (g, Point::Symbolic(z))))
        }
        SystemKind::Grid(g) => {
            if pool.is_empty() {
                return Err(Error::PoolRequired);
            }
            let xs: Vec<(u64, usize)> = c
                .segments()
                .iter()
                .map(|s| Ok((s.point.as_grid().ok_or(Error::SystemMismatch)?, s.length)))
                .collect::<Result<_>>()?;
            let cands = pool.grid_points()?;
            Ok(grid_gap_search(g, &xs, eps, 1, max_gap, &cands).map(|(gap, z)| (gap, Point::Grid(z))))
        }
        SystemKind::Substitution(_) => Err(Error::Unsupported("shadow search on a substitution subshift")),
    }
}

/// Lexicographic depth-first gap search on a shift, pruning any prefix whose
/// segments already cannot be shadowed. Gaps range over `min_gap..=max_gap`.
pub(crate) fn sft_gap_search(
    sft: &Sft,
    segs: &[(&SymbolicPoint, usize)],
    r: u32,
    min_gap: usize,
    max_gap: usize,
) -> Option<(Vec<usize>, SymbolicPoint)> {
    let lengths: Vec<usize> = segs.iter().map(|s| s.1).collect();
    let mut gap = Vec::with_capacity(segs.len() - 1);
    fn dfs(
        sft: &Sft,
        segs: &[(&SymbolicPoint, usize)],
        lengths: &[usize],
        r: u32,
        lo: usize,
        hi: usize,
        gap: &mut Vec<usize>,
    ) -> Option<SymbolicPoint> {
        let placed = gap.len() + 1;
        if placed == segs.len() {
            let s = starts(lengths, gap);
            return search_forced(sft, segs, &s, r).into_witness();
        }
        for t in lo..=hi {
            gap.push(t);
            let s = starts(&lengths[..placed + 1], gap);
            let prefix_ok = placed + 1 == segs.len() || search_forced(sft, &segs[..placed + 1], &s, r).witness().is_some();
            if prefix_ok {
                if let Some(z) = dfs(sft, segs, lengths, r, lo, hi, gap) {
                    return Some(z);
                }
            }
            gap.pop();
        }
        None
    }
    dfs(sft, segs, &lengths, r, min_gap, max_gap, &mut gap).map(|z| (gap, z))
}

/// Orbit of a grid point, `[a, f(a), ..., f^{n-1}(a)]`.
pub(crate) fn grid_orbit(g: &GridSystem, a: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut cur = a;
    for i in 0..n {
        if i > 0 {
            cur = g.step(cur);
        }
        out.push(cur);
    }
    out
}

/// Follows `z` along a tube: returns `f^{m-1}(z)` if `d(f^l z, tube[l]) < eps`
/// for every `l`.
fn follow_tube(g: &GridSystem, z: u64, tube: &[u64], eps: Distance) -> Option<u64> {
    let mut cur = z;
    for (l, &x) in tube.iter().enumerate() {
        if l > 0 {
            cur = g.step(cur);
        }
        if g.distance(cur, x) >= eps {
            return None;
        }
    }
    Some(cur)
}

/// Lexicographic gap search over pool candidates on a grid system. Each
/// surviving candidate carries the position at the end of its last segment.
pub(crate) fn grid_gap_search(
    g: &GridSystem,
    xs: &[(u64, usize)],
    eps: Distance,
    min_gap: usize,
    max_gap: usize,
    pool: &[u64],
) -> Option<(Vec<usize>, u64)> {
    let tubes: Vec<Vec<u64>> = xs.iter().map(|&(x, m)| grid_orbit(g, x, m)).collect();
    let alive: Vec<(u64, u64)> =
        pool.iter().filter_map(|&z| follow_tube(g, z, &tubes[0], eps).map(|end| (z, end))).collect();
    if alive.is_empty() {
        return None;
    }
    fn dfs(
        g: &GridSystem,
        tubes: &[Vec<u64>],
        eps: Distance,
        lo: usize,
        hi: usize,
        alive: Vec<(u64, u64)>,
        gap: &mut Vec<usize>,
    ) -> Option<u64> {
        let j = gap.len() + 1;
        if j == tubes.len() {
            return alive.first().map(|&(z, _)| z);
        }
        // positions after t steps past the end of the current segment
        let mut pos: Vec<u64> = alive.iter().map(|&(_, end)| end).collect();
        for t in 1..=hi {
            for p in pos.iter_mut() {
                *p = g.step(*p);
            }
            if t < lo {
                continue;
            }
            let next: Vec<(u64, u64)> = alive
                .iter()
                .zip(&pos)
                .filter_map(|(&(z, _), &p)| follow_tube(g, p, &tubes[j], eps).map(|end| (z, end)))
                .collect();
            if next.is_empty() {
                continue;
            }
            gap.push(t);
            if let Some(z) = dfs(g, tubes, eps, lo, hi, next, gap) {
                return Some(z);
            }
            gap.pop();
        }
        None
    }
    let mut gap = Vec::new();
    dfs(g, &tubes, eps, min_gap, max_gap, alive, &mut gap).map(|z| (gap, z))
}
