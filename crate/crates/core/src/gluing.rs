//! Gluing orbit profiles: the least gap bound `M(ε)` over a fixed family of
//! orbit sequences, its periodic variant, and the specification bound.
//!
//! On shifts of finite type every answer is exact. A gluing instance at
//! radius `r` only depends on the words each segment forces on its window,
//! and a window word only interacts with its neighbours through its first
//! and last `2r + 1` letters (`r + 1` one-sided), so the family is reduced to
//! one representative per class of such signatures before searching.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::distance::Distance;
use crate::error::{Error, Result};
use crate::shadowing::{
    forced_letters, grid_gap_search, search_forced, sft_gap_search, CandidatePool, OrbitSequence,
};
use crate::systems::family::{heteroclinic_points, orbit_representatives, periodic_points};
use crate::systems::{GridSystem, Point, Sft, SubstitutionSubshift, Symbol, SymbolicPoint, System, SystemKind};

/// Least periods of the periodic base points in the canonical family.
pub const BASE_PERIOD: usize = 4;

/// Refuse families larger than this many instance classes.
pub const MAX_INSTANCES: usize = 4_000_000;

/// A gap bound, or the statement that none was found up to `M_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GapBound {
    Finite(usize),
    Exceeds,
}

impl GapBound {
    pub fn finite(self) -> Option<usize> {
        match self {
            GapBound::Finite(m) => Some(m),
            GapBound::Exceeds => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, GapBound::Finite(_))
    }
}

impl fmt::Display for GapBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapBound::Finite(m) => write!(f, "{m}"),
            GapBound::Exceeds => f.write_str("exceeds M_max"),
        }
    }
}

impl Serialize for GapBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            GapBound::Finite(m) => s.serialize_u64(*m as u64),
            GapBound::Exceeds => s.serialize_str("exceeds M_max"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// No path leads from the class of `from` to the class of `to`, so no
    /// orbit visits `from` and later `to`.
    Disconnected { from: Point, to: Point },
    /// Irreducible with this period: connecting words between two fixed
    /// states only exist for lengths in one residue class.
    Period { period: usize },
    /// An instance that fails for every gap up to `M_max`.
    FailingInstance { instance: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstanceRow {
    pub instance: String,
    pub rank: usize,
    pub max_length: usize,
    pub min_max_gap: GapBound,
    pub gap: Option<Vec<usize>>,
    /// Closing gap `t` of a periodic witness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub closing: Option<usize>,
    pub witness: Option<Point>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LengthRow {
    pub length_cap: usize,
    pub m_required: GapBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GluingProfile {
    pub system: String,
    pub metric: String,
    pub epsilon: Distance,
    pub radius: Option<u32>,
    pub segment_length_cap: usize,
    pub rank_cap: usize,
    pub pool_descriptor: String,
    pub m_max: usize,
    /// Whether "exceeds M_max" is a proof (shifts of finite type) rather
    /// than a failure relative to the pool.
    pub exact: bool,
    pub periodic: bool,
    pub m_required: GapBound,
    /// `M_required` over the instances whose segments are all at most
    /// `length_cap` long.
    pub per_length: Vec<LengthRow>,
    /// Least cap from which `per_length` no longer changes, when that
    /// happens strictly before the last cap.
    pub stabilized_at: Option<usize>,
    pub certificate: Option<Certificate>,
    pub instances: Vec<InstanceRow>,
}

impl GluingProfile {
    /// CSV with one row per instance class.
    pub fn instances_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["instance", "rank", "max_length", "min_max_gap", "gap"]).unwrap();
        for row in &self.instances {
            let gap = row.gap.as_ref().map(|g| format!("{g:?}")).unwrap_or_default();
            w.write_record([
                row.instance.clone(),
                row.rank.to_string(),
                row.max_length.to_string(),
                row.min_max_gap.to_string(),
                gap,
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn per_length_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["length_cap", "m_required"]).unwrap();
        for row in &self.per_length {
            w.write_record([row.length_cap.to_string(), row.m_required.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecificationProfile {
    pub system: String,
    pub metric: String,
    pub epsilon: Distance,
    pub radius: u32,
    pub segment_length_cap: usize,
    pub rank_cap: usize,
    pub m_max: usize,
    pub slack: usize,
    pub m_uniform: GapBound,
    pub instances_tested: usize,
    pub certificate: Option<Certificate>,
    /// A failing `(instance, gap)` inside the box `[M_max, M_max + slack]`
    /// when no uniform bound was found.
    pub failing_example: Option<(String, Vec<usize>)>,
}

fn check_caps(max_length: usize, max_rank: usize) -> Result<()> {
    if max_length == 0 {
        return Err(Error::BadArgs("segment length cap L must be at least 1".into()));
    }
    if max_rank == 0 {
        return Err(Error::BadArgs("rank cap k must be at least 1".into()));
    }
    Ok(())
}

/// Gap bound that decides gluing exactly: when a gap tuple works at all,
/// one with every entry at most `2r + |A|` works too.
pub fn exact_gap_bound(sft: &Sft, r: u32) -> usize {
    2 * r as usize + sft.alphabet_size()
}

/// Two cycle points `(x, y)` such that `y`'s class cannot be reached from
/// `x`'s, for reducible matrices.
pub fn disconnected_pair(sft: &Sft) -> Option<(SymbolicPoint, SymbolicPoint)> {
    let comps: Vec<Vec<Symbol>> = sft.components().into_iter().filter(|c| sft.is_nontrivial_component(c)).collect();
    for a in &comps {
        let reach = sft.reachable_from(a[0]);
        for b in &comps {
            if a != b && !reach[b[0] as usize] {
                let x = SymbolicPoint::periodic(&sft.shortest_cycle_through(a[0]).unwrap());
                let y = SymbolicPoint::periodic(&sft.shortest_cycle_through(b[0]).unwrap());
                return Some((x, y));
            }
        }
    }
    None
}

/// Base points of the canonical family: periodic points of least period at
/// most [`BASE_PERIOD`], a shortest cycle of every class, heteroclinic
/// points between orbits of period at most 2 shifted by every origin in
/// `-spread..=spread`, and the two points of [`disconnected_pair`].
pub fn sft_bases(sft: &Sft, spread: i64) -> Vec<SymbolicPoint> {
    let mut out = periodic_points(sft, BASE_PERIOD);
    for comp in sft.components() {
        if sft.is_nontrivial_component(&comp) {
            out.push(SymbolicPoint::periodic(&sft.shortest_cycle_through(comp[0]).unwrap()));
        }
    }
    out.extend(heteroclinic_points(sft, 2, spread));
    if let Some((x, y)) = disconnected_pair(sft) {
        out.push(x);
        out.push(y);
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Signature {
    Full(Vec<Symbol>),
    Ends(Vec<Symbol>, Vec<Symbol>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    First,
    Middle,
    Last,
}

struct SlotClass {
    point: SymbolicPoint,
    length: usize,
}

/// One representative `(x, m)` per signature, keeping the shortest `m`.
fn slot_classes(sft: &Sft, bases: &[SymbolicPoint], max_length: usize, r: u32, role: Role) -> Vec<SlotClass> {
    let two = sft.is_two_sided();
    let k = if two { 2 * r as usize + 1 } else { r as usize + 1 };
    let back = if two { r as i64 } else { 0 };
    let mut seen: HashMap<Signature, ()> = HashMap::new();
    let mut out = Vec::new();
    for m in 1..=max_length {
        for x in bases {
            let w = x.window(-back, m as i64 - 1 + r as i64);
            let n = w.len();
            let sig = match role {
                Role::First => Signature::Full(w[n.saturating_sub(k)..].to_vec()),
                Role::Last => Signature::Full(w[..k.min(n)].to_vec()),
                Role::Middle if n <= 2 * k => Signature::Full(w),
                Role::Middle => Signature::Ends(w[..k].to_vec(), w[n - k..].to_vec()),
            };
            if seen.insert(sig, ()).is_none() {
                out.push(SlotClass { point: x.clone(), length: m });
            }
        }
    }
    out
}

/// Instance classes of ranks `min_rank..=max_rank` as index tuples into the
/// slot lists.
fn enumerate_instances(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if sizes.contains(&0) {
        return out;
    }
    let mut idx = vec![0usize; sizes.len()];
    loop {
        out.push(idx.clone());
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < sizes[i] {
                break;
            }
            idx[i] = 0;
        }
    }
}

struct Family {
    /// Each instance as a list of `(point, length)`.
    instances: Vec<Vec<(SymbolicPoint, usize)>>,
}

fn sft_family(sft: &Sft, r: u32, max_length: usize, max_rank: usize, periodic: bool) -> Result<Family> {
    let spread = r as i64 + max_length as i64;
    let bases = sft_bases(sft, spread);
    let first = slot_classes(sft, &bases, max_length, r, if periodic { Role::Middle } else { Role::First });
    let middle = slot_classes(sft, &bases, max_length, r, Role::Middle);
    let last = slot_classes(sft, &bases, max_length, r, if periodic { Role::Middle } else { Role::Last });
    let mut instances = Vec::new();
    let min_rank = if periodic { 1 } else { 2 };
    for rank in min_rank..=max_rank {
        let lists: Vec<&Vec<SlotClass>> = (0..rank)
            .map(|j| {
                if rank == 1 {
                    &middle
                } else if j == 0 {
                    &first
                } else if j + 1 == rank {
                    &last
                } else {
                    &middle
                }
            })
            .collect();
        let sizes: Vec<usize> = lists.iter().map(|l| l.len()).collect();
        let count = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
        if count.saturating_add(instances.len()) > MAX_INSTANCES {
            return Err(Error::BadArgs(format!(
                "instance family at rank {rank} has {count} classes; lower L or k (limit {MAX_INSTANCES})"
            )));
        }
        for idx in enumerate_instances(&sizes) {
            instances.push(idx.iter().zip(&lists).map(|(&i, l)| (l[i].point.clone(), l[i].length)).collect());
        }
    }
    Ok(Family { instances })
}

fn descriptor(segs: &[(SymbolicPoint, usize)]) -> String {
    segs.iter().map(|(x, m)| format!("{x}:{m}")).collect::<Vec<_>>().join(" | ")
}

fn borrowed(segs: &[(SymbolicPoint, usize)]) -> Vec<(&SymbolicPoint, usize)> {
    segs.iter().map(|(x, m)| (x, *m)).collect()
}

/// Least `M` such that some gap in `{1..M}^{k-1}` is shadowed, with the
/// lexicographically first gap and witness at that bound.
fn sft_min_max_gap(
    sft: &Sft,
    segs: &[(&SymbolicPoint, usize)],
    r: u32,
    m_max: usize,
) -> Option<(usize, Vec<usize>, SymbolicPoint)> {
    let (gap, z) = sft_gap_search(sft, segs, r, 1, m_max)?;
    let mut hi = *gap.iter().max().unwrap();
    let mut best = (gap, z);
    let mut lo = 1;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match sft_gap_search(sft, segs, r, 1, mid) {
            Some(found) => {
                hi = mid;
                best = found;
            }
            None => lo = mid + 1,
        }
    }
    if *best.0.iter().max().unwrap() != hi {
        best = sft_gap_search(sft, segs, r, 1, hi).unwrap();
    }
    Some((hi, best.0, best.1))
}

fn per_length_rows(rows: &[InstanceRow], max_length: usize) -> (Vec<LengthRow>, Option<usize>) {
    let mut per = Vec::with_capacity(max_length);
    for cap in 1..=max_length {
        let mut m = GapBound::Finite(0);
        for row in rows.iter().filter(|row| row.max_length <= cap) {
            m = m.max(row.min_max_gap);
        }
        per.push(LengthRow { length_cap: cap, m_required: m });
    }
    let last = per.last().map(|r| r.m_required);
    let from = per.iter().rposition(|r| Some(r.m_required) != last).map_or(1, |i| i + 2);
    let stabilized = (from < max_length).then_some(from);
    (per, stabilized)
}

fn check_radius_family(sft: &Sft, max_length: usize, max_rank: usize) -> Result<()> {
    check_caps(max_length, max_rank)?;
    if sft.alphabet_size() == 0 {
        return Err(Error::NotAnSft);
    }
    Ok(())
}

/// Exact gluing profile of a shift of finite type at `eps = 2^-r`, over the
/// canonical family with segment lengths at most `max_length` and ranks at
/// most `max_rank`.
pub fn decide_gluing_sft(system: &System, r: u32, max_length: usize, max_rank: usize) -> Result<GluingProfile> {
    let sft = system.as_sft().ok_or(Error::NotAnSft)?;
    check_radius_family(sft, max_length, max_rank)?;
    let m_max = exact_gap_bound(sft, r);
    let family = sft_family(sft, r, max_length, max_rank, false)?;
    let rows: Vec<InstanceRow> = family
        .instances
        .par_iter()
        .map(|segs| {
            let b = borrowed(segs);
            let max_length = segs.iter().map(|s| s.1).max().unwrap();
            let found = sft_min_max_gap(sft, &b, r, m_max);
            InstanceRow {
                instance: descriptor(segs),
                rank: segs.len(),
                max_length,
                min_max_gap: found.as_ref().map_or(GapBound::Exceeds, |f| GapBound::Finite(f.0)),
                gap: found.as_ref().map(|f| f.1.clone()),
                closing: None,
                witness: found.map(|f| Point::Symbolic(f.2)),
            }
        })
        .collect();
    Ok(assemble_sft(system, sft, r, max_length, max_rank, m_max, false, rows))
}

#[allow(clippy::too_many_arguments)]
fn assemble_sft(
    system: &System,
    sft: &Sft,
    r: u32,
    max_length: usize,
    max_rank: usize,
    m_max: usize,
    periodic: bool,
    rows: Vec<InstanceRow>,
) -> GluingProfile {
    let m_required = rows.iter().map(|row| row.min_max_gap).max().unwrap_or(GapBound::Finite(0));
    let (per_length, stabilized_at) = per_length_rows(&rows, max_length);
    let certificate = if m_required.is_finite() {
        None
    } else if let Some((x, y)) = disconnected_pair(sft) {
        Some(Certificate::Disconnected { from: Point::Symbolic(x), to: Point::Symbolic(y) })
    } else {
        let bad = rows.iter().find(|row| !row.min_max_gap.is_finite()).unwrap();
        Some(Certificate::FailingInstance { instance: bad.instance.clone() })
    };
    GluingProfile {
        system: system.label.clone(),
        metric: system.metric_convention(),
        epsilon: Distance::pow2(r),
        radius: Some(r),
        segment_length_cap: max_length,
        rank_cap: max_rank,
        pool_descriptor: format!("canonical family: periodic points of period <= {BASE_PERIOD}, heteroclinic points"),
        m_max,
        exact: true,
        periodic,
        m_required,
        per_length,
        stabilized_at,
        certificate,
        instances: rows,
    }
}

/// Lexicographically least cyclic admissible word matching `forced`.
fn cyclic_fill(sft: &Sft, forced: &[Option<Symbol>]) -> Option<Vec<Symbol>> {
    let n = forced.len();
    let a = sft.alphabet_size();
    for start in 0..a as Symbol {
        if forced[0].is_some_and(|f| f != start) {
            continue;
        }
        let mut feas = vec![false; n * a];
        let mut dead = false;
        for i in (0..n).rev() {
            let mut any = false;
            for s in 0..a {
                if forced[i].is_some_and(|f| f as usize != s) || (i == 0 && s != start as usize) {
                    continue;
                }
                let ok = if i + 1 == n {
                    sft.allows(s as Symbol, start)
                } else {
                    sft.successors(s as Symbol).iter().any(|&t| feas[(i + 1) * a + t as usize])
                };
                feas[i * a + s] = ok;
                any |= ok;
            }
            if !any {
                dead = true;
                break;
            }
        }
        if dead {
            continue;
        }
        let mut word = vec![start];
        for i in 1..n {
            let prev = word[i - 1];
            word.push(sft.successors(prev).iter().copied().find(|&t| feas[i * a + t as usize]).unwrap());
        }
        return Some(word);
    }
    None
}

/// Periodic witness for a fixed gap and closing gap `t`: a point of period
/// `s_k + m_k + t` (not necessarily least) that shadows the sequence.
fn periodic_witness(sft: &Sft, segs: &[(&SymbolicPoint, usize)], gap: &[usize], t: usize, r: u32) -> Option<SymbolicPoint> {
    let lengths: Vec<usize> = segs.iter().map(|s| s.1).collect();
    let mut starts = vec![0i64];
    for j in 0..gap.len() {
        starts.push(starts[j] + (lengths[j] + gap[j]) as i64 - 1);
    }
    let period = (starts[segs.len() - 1] + lengths[segs.len() - 1] as i64 + t as i64) as usize;
    let forced = forced_letters(segs, &starts, r, sft.is_two_sided()).ok()?;
    let mut folded: Vec<Option<Symbol>> = vec![None; period];
    for (i, letter) in forced.letters.iter().enumerate() {
        if let Some(l) = letter {
            let slot = &mut folded[(forced.lo + i as i64).rem_euclid(period as i64) as usize];
            match slot {
                None => *slot = Some(*l),
                Some(have) if have == l => {}
                Some(_) => return None,
            }
        }
    }
    cyclic_fill(sft, &folded).map(|w| SymbolicPoint::periodic(&w))
}

/// Lexicographic search over `(gap, t)` in `{1..bound}^k`, pruning gap
/// prefixes that cannot be shadowed even non-periodically.
fn periodic_search(
    sft: &Sft,
    segs: &[(&SymbolicPoint, usize)],
    r: u32,
    bound: usize,
) -> Option<(Vec<usize>, usize, SymbolicPoint)> {
    fn dfs(
        sft: &Sft,
        segs: &[(&SymbolicPoint, usize)],
        r: u32,
        bound: usize,
        gap: &mut Vec<usize>,
    ) -> Option<(usize, SymbolicPoint)> {
        if gap.len() + 1 == segs.len() {
            return (1..=bound).find_map(|t| periodic_witness(sft, segs, gap, t, r).map(|z| (t, z)));
        }
        let placed = gap.len() + 1;
        for t in 1..=bound {
            gap.push(t);
            let lengths: Vec<usize> = segs[..placed + 1].iter().map(|s| s.1).collect();
            let mut starts = vec![0i64];
            for j in 0..gap.len() {
                starts.push(starts[j] + (lengths[j] + gap[j]) as i64 - 1);
            }
            if search_forced(sft, &segs[..placed + 1], &starts, r).witness().is_some() {
                if let Some(found) = dfs(sft, segs, r, bound, gap) {
                    return Some(found);
                }
            }
            gap.pop();
        }
        None
    }
    let mut gap = Vec::new();
    dfs(sft, segs, r, bound, &mut gap).map(|(t, z)| (gap, t, z))
}

/// Periodic gluing profile: as [`decide_gluing_sft`], but witnesses must be
/// periodic with period `s_k + m_k + t`, and `t` counts towards the bound.
/// Rank-1 sequences are included since they still need a closing gap.
pub fn periodic_gluing_sft(system: &System, r: u32, max_length: usize, max_rank: usize) -> Result<GluingProfile> {
    let sft = system.as_sft().ok_or(Error::NotAnSft)?;
    check_radius_family(sft, max_length, max_rank)?;
    let m_max = exact_gap_bound(sft, r);
    let family = sft_family(sft, r, max_length, max_rank, true)?;
    let rows: Vec<InstanceRow> = family
        .instances
        .par_iter()
        .map(|segs| {
            let b = borrowed(segs);
            let max_length = segs.iter().map(|s| s.1).max().unwrap();
            let mut found = None;
            for bound in 1..=m_max {
                if let Some(f) = periodic_search(sft, &b, r, bound) {
                    found = Some((bound, f));
                    break;
                }
            }
            InstanceRow {
                instance: descriptor(segs),
                rank: segs.len(),
                max_length,
                min_max_gap: found.as_ref().map_or(GapBound::Exceeds, |f| GapBound::Finite(f.0)),
                gap: found.as_ref().map(|f| f.1 .0.clone()),
                closing: found.as_ref().map(|f| f.1 .1),
                witness: found.map(|f| Point::Symbolic(f.1 .2)),
            }
        })
        .collect();
    Ok(assemble_sft(system, sft, r, max_length, max_rank, m_max, true, rows))
}

/// Periodic witness search for a single orbit sequence, up to `bound`.
pub fn find_periodic_shadow_sft(
    sft: &Sft,
    c: &OrbitSequence,
    r: u32,
    bound: usize,
) -> Result<Option<(Vec<usize>, usize, SymbolicPoint)>> {
    let segs = crate::shadowing::symbolic_segments(c)?;
    for (x, _) in &segs {
        x.check_admissible(sft)?;
    }
    Ok(periodic_search(sft, &segs, r, bound))
}

/// Default search bound for the specification profile: `2r` plus the
/// Wielandt bound `(|A| - 1)^2 + 1` on the primitivity exponent.
pub fn specification_bound(sft: &Sft, r: u32) -> usize {
    let a = sft.alphabet_size();
    2 * r as usize + (a - 1) * (a - 1) + 1
}

/// Least `M <= m_max` such that every gap tuple with entries in
/// `[M, M + slack]` shadows every instance of the canonical family.
pub fn specification_profile_sft(
    system: &System,
    r: u32,
    max_length: usize,
    max_rank: usize,
    m_max: usize,
    slack: usize,
) -> Result<SpecificationProfile> {
    let sft = system.as_sft().ok_or(Error::NotAnSft)?;
    check_radius_family(sft, max_length, max_rank)?;
    if m_max == 0 {
        return Err(Error::BadArgs("M_max must be at least 1".into()));
    }
    let family = sft_family(sft, r, max_length, max_rank, false)?;
    let top = m_max + slack;
    // each failing tuple g blocks every M in [max g - slack, min g]
    let blocked: Vec<(Vec<bool>, Option<(String, Vec<usize>)>)> = family
        .instances
        .par_iter()
        .map(|segs| {
            let b = borrowed(segs);
            let lengths: Vec<usize> = segs.iter().map(|s| s.1).collect();
            let mut blocks = vec![false; m_max + 1];
            let mut example = None;
            for gap in enumerate_instances(&vec![top; segs.len() - 1]) {
                let gap: Vec<usize> = gap.into_iter().map(|t| t + 1).collect();
                let lo_m = (*gap.iter().max().unwrap()).saturating_sub(slack).max(1);
                let hi_m = (*gap.iter().min().unwrap()).min(m_max);
                if lo_m > hi_m {
                    continue;
                }
                let mut starts = vec![0i64];
                for j in 0..gap.len() {
                    starts.push(starts[j] + (lengths[j] + gap[j]) as i64 - 1);
                }
                if search_forced(sft, &b, &starts, r).witness().is_none() {
                    for m in lo_m..=hi_m {
                        blocks[m] = true;
                    }
                    if hi_m == m_max && example.is_none() {
                        example = Some((descriptor(segs), gap));
                    }
                }
            }
            (blocks, example)
        })
        .collect();
    let m_uniform = (1..=m_max).find(|&m| blocked.iter().all(|(b, _)| !b[m]));
    let m_uniform = m_uniform.map_or(GapBound::Exceeds, GapBound::Finite);
    let failing_example = if m_uniform.is_finite() { None } else { blocked.iter().find_map(|(_, e)| e.clone()) };
    let certificate = if m_uniform.is_finite() {
        None
    } else if let Some((x, y)) = disconnected_pair(sft) {
        Some(Certificate::Disconnected { from: Point::Symbolic(x), to: Point::Symbolic(y) })
    } else {
        match sft.period() {
            Some(p) if p > 1 => Some(Certificate::Period { period: p }),
            _ => failing_example.as_ref().map(|(i, _)| Certificate::FailingInstance { instance: i.clone() }),
        }
    };
    Ok(SpecificationProfile {
        system: system.label.clone(),
        metric: system.metric_convention(),
        epsilon: Distance::pow2(r),
        radius: r,
        segment_length_cap: max_length,
        rank_cap: max_rank,
        m_max,
        slack,
        m_uniform,
        instances_tested: family.instances.len(),
        certificate,
        failing_example,
    })
}

/// Tube of `(x, m)`: grid points `w` with `d(f^l w, f^l x) < eps` for every
/// `l < m`, in increasing order.
fn tube(g: &GridSystem, x: u64, m: usize, eps: Distance) -> Vec<u64> {
    let mut alive: Vec<(u64, u64)> =
        (0..g.size()).filter(|&w| g.distance(w, x) < eps).map(|w| (w, w)).collect();
    let mut xl = x;
    for _ in 1..m {
        xl = g.step(xl);
        alive.retain_mut(|(_, cur)| {
            *cur = g.step(*cur);
            g.distance(*cur, xl) < eps
        });
    }
    alive.into_iter().map(|(w, _)| w).collect()
}

fn grid_profile(
    system: &System,
    g: &GridSystem,
    eps: Distance,
    max_length: usize,
    max_rank: usize,
    pool: &CandidatePool,
    bases: &[u64],
    m_max: usize,
) -> Result<GluingProfile> {
    let cands = pool.grid_points()?;
    // one representative base per (tube, length)
    let mut seen: HashMap<(Vec<u64>, usize), ()> = HashMap::new();
    let mut slots: Vec<(u64, usize)> = Vec::new();
    for m in 1..=max_length {
        let tubes: Vec<Vec<u64>> = bases.par_iter().map(|&x| tube(g, x, m, eps)).collect();
        for (&x, t) in bases.iter().zip(tubes) {
            if seen.insert((t, m), ()).is_none() {
                slots.push((x, m));
            }
        }
    }
    let mut instances: Vec<Vec<(u64, usize)>> = Vec::new();
    for rank in 2..=max_rank {
        let count = slots.len().checked_pow(rank as u32).unwrap_or(usize::MAX);
        if count.saturating_add(instances.len()) > MAX_INSTANCES {
            return Err(Error::BadArgs(format!(
                "instance family at rank {rank} has {count} classes; lower L or k or pass fewer bases"
            )));
        }
        for idx in enumerate_instances(&vec![slots.len(); rank]) {
            instances.push(idx.into_iter().map(|i| slots[i]).collect());
        }
    }
    let rows: Vec<InstanceRow> = instances
        .par_iter()
        .map(|xs| {
            let found = grid_gap_search(g, xs, eps, 1, m_max, &cands).map(|(gap, z)| {
                let mut hi = *gap.iter().max().unwrap();
                let mut best = (gap, z);
                let mut lo = 1;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    match grid_gap_search(g, xs, eps, 1, mid, &cands) {
                        Some(f) => {
                            hi = mid;
                            best = f;
                        }
                        None => lo = mid + 1,
                    }
                }
                if *best.0.iter().max().unwrap() != hi {
                    best = grid_gap_search(g, xs, eps, 1, hi, &cands).unwrap();
                }
                (hi, best.0, best.1)
            });
            InstanceRow {
                instance: xs.iter().map(|(x, m)| format!("#{x}:{m}")).collect::<Vec<_>>().join(" | "),
                rank: xs.len(),
                max_length: xs.iter().map(|s| s.1).max().unwrap(),
                min_max_gap: found.as_ref().map_or(GapBound::Exceeds, |f| GapBound::Finite(f.0)),
                gap: found.as_ref().map(|f| f.1.clone()),
                closing: None,
                witness: found.map(|f| Point::Grid(f.2)),
            }
        })
        .collect();
    let m_required = rows.iter().map(|row| row.min_max_gap).max().unwrap_or(GapBound::Finite(0));
    let (per_length, stabilized_at) = per_length_rows(&rows, max_length);
    let certificate = rows
        .iter()
        .find(|row| !row.min_max_gap.is_finite())
        .map(|row| Certificate::FailingInstance { instance: row.instance.clone() });
    Ok(GluingProfile {
        system: system.label.clone(),
        metric: system.metric_convention(),
        epsilon: eps,
        radius: None,
        segment_length_cap: max_length,
        rank_cap: max_rank,
        pool_descriptor: pool.descriptor.clone(),
        m_max,
        exact: false,
        periodic: false,
        m_required,
        per_length,
        stabilized_at,
        certificate,
        instances: rows,
    })
}

/// Least closing gap `t` over occurrences in the generating word: segment
/// windows `u` at `p` and `v` at `q` with `q - p >= len` give `t = q - p - len + 1`.
fn min_connector(occ_u: &[usize], occ_v: &[usize], len: usize) -> Option<usize> {
    let mut best: Option<usize> = None;
    for &p in occ_u {
        let i = occ_v.partition_point(|&q| q < p + len);
        if let Some(&q) = occ_v.get(i) {
            let t = q - p - len + 1;
            best = Some(best.map_or(t, |b| b.min(t)));
            if t == 1 {
                break;
            }
        }
    }
    best
}

/// Rank-2 connector rows for segments of length exactly `len` at radius `r`.
fn connector_rows(s: &SubstitutionSubshift, r: usize, len: usize, m_max: usize) -> Vec<InstanceRow> {
    let w = len + 2 * r;
    let occ = s.occurrences(w);
    let factors = s.factors(w);
    let word = |v: &[Symbol]| v.iter().map(|c| c.to_string()).collect::<String>();
    let (occ, all) = (&occ, &factors);
    factors
        .par_iter()
        .flat_map_iter(|u| {
            let ou = &occ[u.as_slice()];
            all.iter().map(move |v| {
                let t = min_connector(ou, &occ[v.as_slice()], len).filter(|&t| t <= m_max);
                InstanceRow {
                    instance: format!("[{}]:{len} | [{}]:{len}", word(u), word(v)),
                    rank: 2,
                    max_length: len,
                    min_max_gap: t.map_or(GapBound::Exceeds, GapBound::Finite),
                    gap: t.map(|t| vec![t]),
                    closing: None,
                    witness: None,
                }
            })
        })
        .collect()
}

/// Connector profile of a substitution subshift: for each segment length
/// `L`, the largest over pairs of factor windows of the least gap found in
/// the generating word. Only rank 2 is used.
pub fn substitution_profile(
    system: &System,
    eps: Distance,
    max_length: usize,
    m_max: usize,
) -> Result<GluingProfile> {
    let s = system.as_substitution().ok_or(Error::Unsupported("connector profiles outside substitution subshifts"))?;
    check_caps(max_length, 2)?;
    let r = eps.shadow_radius().ok_or_else(|| Error::BadArgs("eps must be at most 1".into()))?;
    let mut per_exact = Vec::with_capacity(max_length);
    let mut last_rows = Vec::new();
    for len in 1..=max_length {
        if len + 2 * r as usize > s.language_length() {
            return Err(Error::BadArgs(format!(
                "segment windows of length {} exceed language_length {}",
                len + 2 * r as usize,
                s.language_length()
            )));
        }
        let rows = connector_rows(s, r as usize, len, m_max);
        per_exact.push(rows.iter().map(|row| row.min_max_gap).max().unwrap_or(GapBound::Finite(0)));
        if len == max_length {
            last_rows = rows;
        }
    }
    let mut per_length = Vec::with_capacity(max_length);
    let mut acc = GapBound::Finite(0);
    for (i, m) in per_exact.iter().enumerate() {
        acc = acc.max(*m);
        per_length.push(LengthRow { length_cap: i + 1, m_required: acc });
    }
    let last = per_length.last().unwrap().m_required;
    let from = per_length.iter().rposition(|row| row.m_required != last).map_or(1, |i| i + 2);
    Ok(GluingProfile {
        system: system.label.clone(),
        metric: system.metric_convention(),
        epsilon: eps,
        radius: Some(r),
        segment_length_cap: max_length,
        rank_cap: 2,
        pool_descriptor: format!("factor windows of the generating word (length {})", s.word().len()),
        m_max,
        exact: false,
        periodic: false,
        m_required: last,
        per_length,
        stabilized_at: (from < max_length).then_some(from),
        certificate: None,
        instances: last_rows,
    })
}

/// The connector bound for segments of length exactly `len`.
pub fn connector_bound(s: &SubstitutionSubshift, r: u32, len: usize, m_max: usize) -> GapBound {
    connector_rows(s, r as usize, len, m_max).iter().map(|row| row.min_max_gap).max().unwrap_or(GapBound::Finite(0))
}

/// Empirical gluing profile of any system.
///
/// Shifts of finite type use the exact decision at the radius of `eps`
/// (the exact bound replaces `m_max`); grid systems search the pool, with
/// the instance bases taken from the pool; substitution subshifts get the
/// rank-2 connector profile.
pub fn gluing_profile(
    system: &System,
    eps: Distance,
    max_length: usize,
    max_rank: usize,
    pool: &CandidatePool,
    m_max: usize,
) -> Result<GluingProfile> {
    gluing_profile_with_bases(system, eps, max_length, max_rank, pool, None, m_max)
}

/// As [`gluing_profile`], with explicit instance bases for grid systems.
pub fn gluing_profile_with_bases(
    system: &System,
    eps: Distance,
    max_length: usize,
    max_rank: usize,
    pool: &CandidatePool,
    bases: Option<&[Point]>,
    m_max: usize,
) -> Result<GluingProfile> {
    check_caps(max_length, max_rank)?;
    if m_max == 0 {
        return Err(Error::BadArgs("M_max must be at least 1".into()));
    }
    if eps.is_zero() {
        return Err(Error::BadArgs("eps must be positive".into()));
    }
    match &system.kind {
        SystemKind::Sft(_) => {
            let r = eps.shadow_radius().ok_or_else(|| Error::BadArgs("eps must be at most 1 on a shift".into()))?;
            decide_gluing_sft(system, r, max_length, max_rank)
        }
        SystemKind::Grid(g) => {
            if pool.is_empty() {
                return Err(Error::PoolRequired);
            }
            let bases: Vec<u64> = match bases {
                Some(b) => b.iter().map(|p| p.as_grid().ok_or(Error::SystemMismatch)).collect::<Result<_>>()?,
                None => pool.grid_points()?,
            };
            for &b in &bases {
                system.check_point(&Point::Grid(b))?;
            }
            grid_profile(system, g, eps, max_length, max_rank, pool, &bases, m_max)
        }
        SystemKind::Substitution(_) => substitution_profile(system, eps, max_length, m_max),
    }
}

/// Orbit representatives of least period at most `max_period`, for reports.
pub fn cycle_words(sft: &Sft, max_period: usize) -> Vec<Vec<Symbol>> {
    (1..=max_period).flat_map(|d| orbit_representatives(sft, d)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shadowing::{find_gap_and_shadow, verify_shadow};
    use crate::systems::zoo;

    #[test]
    fn full_shift_needs_gap_three() {
        let full = zoo::full_shift(2);
        let p = decide_gluing_sft(&full, 1, 4, 3).unwrap();
        assert_eq!(p.m_required, GapBound::Finite(3));
        assert!(p.certificate.is_none());
        for row in p.instances.iter().take(200) {
            assert!(row.min_max_gap <= GapBound::Finite(3));
        }
    }

    #[test]
    fn reported_gaps_are_tight_and_verified() {
        let golden = zoo::golden_mean();
        let p = decide_gluing_sft(&golden, 1, 3, 2).unwrap();
        assert!(p.m_required.is_finite());
        let eps = Distance::pow2(1);
        for row in &p.instances {
            let m = row.min_max_gap.finite().unwrap();
            let segs = parse_instance(&p, row);
            let c = OrbitSequence::from_pairs(segs.iter().map(|(x, m)| (Point::Symbolic(x.clone()), *m))).unwrap();
            let gap = row.gap.clone().unwrap();
            assert_eq!(*gap.iter().max().unwrap(), m);
            assert!(verify_shadow(&golden, &c, &gap, row.witness.as_ref().unwrap(), eps).unwrap().is_accepted());
            if m > 1 {
                assert!(find_gap_and_shadow(&golden, &c, eps, m - 1, &CandidatePool::empty()).unwrap().is_none());
            }
        }
    }

    fn parse_instance(p: &GluingProfile, row: &InstanceRow) -> Vec<(SymbolicPoint, usize)> {
        // rebuild the instance from the family instead of parsing text
        let sys = zoo::by_label(&p.system).unwrap();
        let fam = sft_family(sys.as_sft().unwrap(), p.radius.unwrap(), p.segment_length_cap, p.rank_cap, p.periodic)
            .unwrap();
        fam.instances.into_iter().find(|segs| descriptor(segs) == row.instance).unwrap()
    }

    #[test]
    fn reducible_shifts_never_glue() {
        let p = decide_gluing_sft(&zoo::disjoint_fixed(), 1, 2, 2).unwrap();
        assert_eq!(p.m_required, GapBound::Exceeds);
        assert_eq!(
            p.certificate,
            Some(Certificate::Disconnected {
                from: Point::Symbolic(SymbolicPoint::periodic(&[0])),
                to: Point::Symbolic(SymbolicPoint::periodic(&[1])),
            })
        );
        assert!(!decide_gluing_sft(&zoo::one_way(), 1, 2, 2).unwrap().m_required.is_finite());
    }

    #[test]
    fn monotone_in_radius() {
        for sys in [zoo::full_shift(2), zoo::golden_mean(), zoo::three_state()] {
            let ms: Vec<GapBound> = (1..=3).map(|r| decide_gluing_sft(&sys, r, 3, 2).unwrap().m_required).collect();
            assert!(ms.windows(2).all(|w| w[0] <= w[1]), "{}: {ms:?}", sys.label);
        }
    }

    #[test]
    fn periodic_examples() {
        let full = Sft::full(2);
        let c = OrbitSequence::from_pairs([(Point::Symbolic(SymbolicPoint::periodic(&[0])), 3)]).unwrap();
        let (gap, t, z) = find_periodic_shadow_sft(&full, &c, 1, 4).unwrap().unwrap();
        assert!(gap.is_empty());
        assert_eq!(t, 1);
        assert_eq!(z, SymbolicPoint::periodic(&[0]));

        let golden = zoo::golden_mean();
        let g = golden.as_sft().unwrap();
        let c = OrbitSequence::from_pairs([(Point::Symbolic(SymbolicPoint::periodic(&[0, 1])), 2)]).unwrap();
        let (_, t, z) = find_periodic_shadow_sft(g, &c, 1, 6).unwrap().unwrap();
        assert_eq!(t, 2);
        let period = 2 + t as i64;
        assert_eq!(golden.apply_map(&Point::Symbolic(z.clone()), period).unwrap(), Point::Symbolic(z));

        let disjoint = zoo::disjoint_fixed();
        let d = disjoint.as_sft().unwrap();
        let mixed = OrbitSequence::from_pairs([
            (Point::Symbolic(SymbolicPoint::periodic(&[0])), 1),
            (Point::Symbolic(SymbolicPoint::periodic(&[1])), 1),
        ])
        .unwrap();
        assert!(find_periodic_shadow_sft(d, &mixed, 1, 8).unwrap().is_none());
    }

    #[test]
    fn periodic_profile_witnesses_close_up() {
        let golden = zoo::golden_mean();
        let p = periodic_gluing_sft(&golden, 1, 3, 2).unwrap();
        assert!(p.m_required.is_finite());
        for row in &p.instances {
            let z = row.witness.clone().unwrap();
            let lengths: Vec<usize> = row.instance.split(" | ").map(|s| s.rsplit(':').next().unwrap().parse().unwrap()).collect();
            let gap = row.gap.clone().unwrap();
            let s_k: usize = lengths.iter().zip(&gap).map(|(m, t)| m + t - 1).sum();
            let period = s_k + lengths.last().unwrap() + row.closing.unwrap();
            assert_eq!(golden.apply_map(&z, period as i64).unwrap(), z);
        }
    }

    #[test]
    fn specification_examples() {
        let full = zoo::full_shift(2);
        let s = specification_profile_sft(&full, 1, 4, 3, 4, 4).unwrap();
        assert_eq!(s.m_uniform, GapBound::Finite(3));

        let two = zoo::two_cycle();
        let sft = two.as_sft().unwrap();
        let s = specification_profile_sft(&two, 1, 3, 2, specification_bound(sft, 1), 4).unwrap();
        assert_eq!(s.m_uniform, GapBound::Exceeds);
        assert_eq!(s.certificate, Some(Certificate::Period { period: 2 }));

        let golden = zoo::golden_mean();
        let gs = specification_profile_sft(&golden, 1, 3, 2, specification_bound(golden.as_sft().unwrap(), 1), 4).unwrap();
        let gm = decide_gluing_sft(&golden, 1, 3, 2).unwrap();
        assert!(gs.m_uniform.is_finite());
        assert!(gs.m_uniform >= gm.m_required);
    }

    #[test]
    fn grid_profiles() {
        let odo = zoo::odometer(5);
        let pool = CandidatePool::all(&odo).unwrap();
        let p = gluing_profile(&odo, Distance::pow2(3), 4, 2, &pool, 32).unwrap();
        assert!(p.m_required <= GapBound::Finite(8), "{}", p.m_required);

        let rot = zoo::rotation(12, 4);
        let pool = CandidatePool::all(&rot).unwrap();
        let p = gluing_profile(&rot, Distance::ratio(1, 24), 2, 2, &pool, 100).unwrap();
        assert_eq!(p.m_required, GapBound::Exceeds);
        assert!(!p.exact);
    }

    #[test]
    fn thue_morse_connectors_grow() {
        let tm = zoo::thue_morse(64);
        let s = tm.as_substitution().unwrap();
        let ms: Vec<GapBound> = [2, 4, 8].iter().map(|&l| connector_bound(s, 2, l, 1 << 20)).collect();
        assert!(ms[0] < ms[1] && ms[1] < ms[2], "{ms:?}");
    }

    #[test]
    fn csv_quotes_descriptors() {
        let p = decide_gluing_sft(&zoo::golden_mean(), 1, 1, 2).unwrap();
        let csv = p.instances_csv();
        assert!(csv.starts_with("instance,rank,max_length,min_max_gap,gap\n"));
        assert_eq!(csv.lines().count(), p.instances.len() + 1);
    }
}
