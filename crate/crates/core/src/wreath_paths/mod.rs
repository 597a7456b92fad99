//! Connecting paths in wreath products `H ≀ G` between a family of burning
//! elements `aᵢ = (xᵢ, kᵢ)` and unburnt elements `bᵢ = (yᵢ, lᵢ)`, compiled to
//! switch-walk-switch generator words, plus intersection census and dilution.
//!
//! Four recipes cover the four ways a family can separate its members:
//! distinct lamp configurations (1), distinct positions (2), and the two mixed
//! cases (3, 4). Waypoints `g`, `g*` sit at distance `5n` and `10n` from the
//! identity, far enough that the regions `Bₙ(e)`, `Bₙ(g)`, `Bₙ(g*)` are disjoint.

mod builder;
mod geodesic;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::group::{Group, GroupDescriptor, GroupElement};
use builder::{Builder, Compiler};
pub use geodesic::Geodesics;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("group {0} is not a wreath product")]
    NotWreath(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("families have different lengths ({a} and {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("empty family")]
    Empty,
    #[error("pair {index} has equal endpoints")]
    Degenerate { index: usize },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("no case applies: {0}")]
    Unclassifiable(String),
    #[error("waypoints: {0}")]
    Waypoints(String),
    #[error("path {index} has length {length}, above the bound {bound}")]
    TooLong { index: usize, length: usize, bound: usize },
    #[error("compiled word reaches {reached}, expected {expected}")]
    Endpoint { expected: String, reached: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// All lamp configurations in `A ∪ B` differ.
    DistinctLamps,
    /// All positions in `A ∪ B` differ.
    DistinctPositions,
    /// `A` has distinct configurations; `B` shares one configuration absent from
    /// `A`, at distinct positions.
    SharedTarget,
    /// `SharedTarget` with the roles of `A` and `B` swapped.
    SharedSource,
}

impl CaseTag {
    pub const ALL: [CaseTag; 4] = [
        CaseTag::DistinctLamps,
        CaseTag::DistinctPositions,
        CaseTag::SharedTarget,
        CaseTag::SharedSource,
    ];

    pub fn number(self) -> u8 {
        match self {
            CaseTag::DistinctLamps => 1,
            CaseTag::DistinctPositions => 2,
            CaseTag::SharedTarget => 3,
            CaseTag::SharedSource => 4,
        }
    }

    pub fn from_number(k: u8) -> Option<Self> {
        CaseTag::ALL.get((k as usize).wrapping_sub(1)).copied()
    }

    /// Recipe length in high-level steps.
    pub fn step_count(self) -> u8 {
        match self {
            CaseTag::DistinctLamps => 11,
            CaseTag::DistinctPositions => 10,
            _ => 6,
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.number())
    }
}

type Lamps = [(GroupElement, GroupElement)];

fn parts(e: &GroupElement) -> (&Lamps, &GroupElement) {
    let w = e.as_wreath().expect("validated wreath element");
    (&w.lamps, &w.position)
}

fn all_distinct<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> bool {
    let mut seen = HashSet::new();
    items.into_iter().all(|x| seen.insert(x))
}

/// Why `case` fails for `(a, b)`, or `None` if it holds.
fn case_failure(case: CaseTag, a: &[GroupElement], b: &[GroupElement]) -> Option<String> {
    fn lamps(s: &[GroupElement]) -> Vec<&Lamps> {
        s.iter().map(|e| parts(e).0).collect()
    }
    fn positions(s: &[GroupElement]) -> Vec<&GroupElement> {
        s.iter().map(|e| parts(e).1).collect()
    }
    let shared = |src: &[GroupElement], dst: &[GroupElement], src_name: &str, dst_name: &str| {
        let src_lamps = lamps(src);
        if !all_distinct(src_lamps.iter().copied()) {
            return Some(format!("lamp configurations in {src_name} repeat"));
        }
        let dst_lamps = lamps(dst);
        if dst_lamps.iter().any(|l| *l != dst_lamps[0]) {
            return Some(format!("{dst_name} does not share one lamp configuration"));
        }
        if src_lamps.contains(&dst_lamps[0]) {
            return Some(format!("the shared configuration of {dst_name} appears in {src_name}"));
        }
        if !all_distinct(positions(dst)) {
            return Some(format!("positions in {dst_name} repeat"));
        }
        None
    };
    match case {
        CaseTag::DistinctLamps => (!all_distinct(lamps(a).into_iter().chain(lamps(b))))
            .then(|| "lamp configurations repeat across A ∪ B".to_string()),
        CaseTag::DistinctPositions => (!all_distinct(positions(a).into_iter().chain(positions(b))))
            .then(|| "positions repeat across A ∪ B".to_string()),
        CaseTag::SharedTarget => shared(a, b, "A", "B"),
        CaseTag::SharedSource => shared(b, a, "B", "A"),
    }
}

fn check_pairs(group: &Group, a: &[GroupElement], b: &[GroupElement]) -> Result<(), PathError> {
    if !group.is_wreath() {
        return Err(PathError::NotWreath(group.name().to_string()));
    }
    if a.len() != b.len() {
        return Err(PathError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.is_empty() {
        return Err(PathError::Empty);
    }
    for e in a.iter().chain(b) {
        group
            .check(e)
            .map_err(|err| PathError::InvalidFamily(err.to_string()))?;
    }
    if let Some(index) = (0..a.len()).find(|&i| a[i] == b[i]) {
        return Err(PathError::Degenerate { index });
    }
    if !all_distinct(a.iter().chain(b)) {
        return Err(PathError::InvalidFamily("elements repeat".into()));
    }
    Ok(())
}

/// The first case, in order 1–4, whose separation condition holds.
pub fn classify_case(group: &Group, a: &[GroupElement], b: &[GroupElement]) -> Result<CaseTag, PathError> {
    check_pairs(group, a, b)?;
    let mut reasons = Vec::new();
    for case in CaseTag::ALL {
        match case_failure(case, a, b) {
            None => return Ok(case),
            Some(r) => reasons.push(format!("{case}: {r}")),
        }
    }
    Err(PathError::Unclassifiable(reasons.join("; ")))
}

/// Waypoints `g` and `g*` at base distance `5n` and `10n`, and the lamp
/// generator `h` used as a marker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Waypoints {
    pub g: GroupElement,
    pub g_star: GroupElement,
    pub h: usize,
    pub g_word: Vec<usize>,
    pub g_star_word: Vec<usize>,
}

/// Everything needed to compile paths at scale `n` in one wreath product.
pub struct PathContext {
    group: Arc<Group>,
    n: u32,
    base_geo: Geodesics,
    lamp_geo: Geodesics,
    waypoints: Waypoints,
}

impl PathContext {
    pub fn new(group: &Arc<Group>, n: u32) -> Result<Self, PathError> {
        if n == 0 {
            return Err(PathError::Waypoints("scale n must be positive".into()));
        }
        let (lamp, base) = group
            .components()
            .filter(|_| group.is_wreath())
            .ok_or_else(|| PathError::NotWreath(group.name().to_string()))?;
        let base_geo = Geodesics::new(base, 12 * n)?;
        let lamp_geo = Geodesics::new(lamp, 2 * n)?;
        let waypoints = choose_waypoints(base, lamp, n, &base_geo)?;
        Ok(PathContext {
            group: group.clone(),
            n,
            base_geo,
            lamp_geo,
            waypoints,
        })
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn waypoints(&self) -> &Waypoints {
        &self.waypoints
    }

    pub fn base_geodesics(&self) -> &Geodesics {
        &self.base_geo
    }

    fn compiler(&self) -> Result<Compiler<'_>, PathError> {
        Compiler::new(&self.group, &self.base_geo, &self.lamp_geo)
    }

    fn base(&self) -> &Arc<Group> {
        self.group.components().unwrap().1
    }

    /// Base word length of `x`.
    pub fn base_length(&self, x: &GroupElement) -> Result<u32, PathError> {
        self.base_geo.length(x)
    }
}

/// Pick `g`, `g*` (base word lengths exactly `5n`, `10n`) and `h`.
pub fn choose_waypoints(
    base: &Arc<Group>,
    lamp: &Arc<Group>,
    n: u32,
    geo: &Geodesics,
) -> Result<Waypoints, PathError> {
    let at = |r: u32| -> Result<GroupElement, PathError> {
        let r64 = r as i64;
        match (base.descriptor(), geo) {
            (GroupDescriptor::Lattice(d), _) => {
                let mut c = vec![0; *d as usize];
                *c.first_mut()
                    .ok_or_else(|| PathError::Waypoints("trivial base lattice".into()))? = r64;
                Ok(GroupElement::lattice(&c))
            }
            (GroupDescriptor::Free(k), _) if *k > 0 => Ok(GroupElement::word(&vec![0; r as usize])),
            (GroupDescriptor::Cyclic(m), _) => {
                if 2 * r as u64 > *m {
                    Err(PathError::Waypoints(format!("Z{m} has no element at distance {r}")))
                } else {
                    Ok(GroupElement::Cyclic(r as u64))
                }
            }
            (_, Geodesics::Table { ball, .. }) => {
                if r > ball.radius() || ball.layer(r).is_empty() {
                    return Err(PathError::Waypoints(format!(
                        "no element at distance {r} within the enumerated base ball"
                    )));
                }
                Ok(ball.element(crate::cayley::VertexId(ball.layer(r).start)))
            }
            _ => Err(PathError::Waypoints(format!("base {} has no waypoints", base.name()))),
        }
    };
    let g = at(5 * n)?;
    let g_star = at(10 * n)?;
    let g_word = geo.word(&g)?;
    let g_star_word = geo.word(&g_star)?;
    if g_word.len() != 5 * n as usize || g_star_word.len() != 10 * n as usize {
        return Err(PathError::Waypoints("waypoint distances are not 5n and 10n".into()));
    }
    if lamp.generator_count() == 0 {
        return Err(PathError::Waypoints("lamp group is trivial".into()));
    }
    Ok(Waypoints {
        g,
        g_star,
        h: 0,
        g_word,
        g_star_word,
    })
}

/// Paired endpoints `aᵢ → bᵢ` at scale `n`, validated for the declared case.
#[derive(Clone, Debug)]
pub struct PairFamily {
    pub group: Arc<Group>,
    pub n: u32,
    pub a: Vec<GroupElement>,
    pub b: Vec<GroupElement>,
    pub case: CaseTag,
}

impl PairFamily {
    /// Lamp supports must lie in `Bₙ` of the base group. Positions are not
    /// restricted (a family separated by position needs room for them); the
    /// `100n` length cap bounds how far they can be.
    pub fn new(
        ctx: &PathContext,
        a: Vec<GroupElement>,
        b: Vec<GroupElement>,
        case: CaseTag,
    ) -> Result<Self, PathError> {
        check_pairs(&ctx.group, &a, &b)?;
        if let Some(r) = case_failure(case, &a, &b) {
            return Err(PathError::InvalidFamily(format!("{case}: {r}")));
        }
        for e in a.iter().chain(&b) {
            for (k, _) in parts(e).0 {
                if ctx.base_length(k)? > ctx.n {
                    return Err(PathError::InvalidFamily(format!(
                        "lamp at {k} of {e} lies outside B_{}",
                        ctx.n
                    )));
                }
            }
        }
        Ok(PairFamily {
            group: ctx.group.clone(),
            n: ctx.n,
            a,
            b,
            case,
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// A compiled path: generator word, its prefix products, and the recipe step
/// (1-based) that produced each letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WreathPath {
    pub start: GroupElement,
    pub end: GroupElement,
    pub word: Vec<usize>,
    pub vertices: Vec<GroupElement>,
    pub steps: Vec<u8>,
}

impl WreathPath {
    pub(crate) fn compile(group: &Group, start: GroupElement, word: Vec<usize>, steps: Vec<u8>) -> Self {
        let mut vertices = Vec::with_capacity(word.len() + 1);
        vertices.push(start.clone());
        for &j in &word {
            let next = group.multiply_unchecked(vertices.last().unwrap(), &group.generators()[j]);
            vertices.push(next);
        }
        WreathPath {
            start,
            end: vertices.last().unwrap().clone(),
            word,
            vertices,
            steps,
        }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// Fold the word from `start` and compare every prefix with the vertex list.
    pub fn verify(&self, group: &Group) -> bool {
        if self.vertices.len() != self.word.len() + 1 || self.vertices[0] != self.start {
            return false;
        }
        let mut x = self.start.clone();
        for (i, &j) in self.word.iter().enumerate() {
            x = group.multiply_unchecked(&x, &group.generators()[j]);
            if x != self.vertices[i + 1] {
                return false;
            }
        }
        x == self.end
    }

    /// The same path walked backwards.
    pub fn reversed(&self, group: &Group) -> WreathPath {
        WreathPath {
            start: self.end.clone(),
            end: self.start.clone(),
            word: self.word.iter().rev().map(|&j| group.inverse_generator(j)).collect(),
            vertices: self.vertices.iter().rev().cloned().collect(),
            steps: self.steps.iter().rev().copied().collect(),
        }
    }

    /// The vertex reached once every letter of steps `≤ step` has been played.
    pub fn after_step(&self, step: u8) -> &GroupElement {
        let k = self.steps.iter().take_while(|&&s| s <= step).count();
        &self.vertices[k]
    }
}

/// Compiled paths, with the indices of pairs the recipe had to drop.
#[derive(Clone, Debug)]
pub struct PathSet {
    pub paths: Vec<WreathPath>,
    /// Family index of each path.
    pub indices: Vec<usize>,
    pub dropped: Vec<usize>,
}

fn translate(base: &Group, t: &GroupElement, lamps: &Lamps) -> Vec<(GroupElement, GroupElement)> {
    lamps
        .iter()
        .map(|(k, v)| (base.multiply_unchecked(t, k), v.clone()))
        .collect()
}

impl PathContext {
    /// Lamps of `x` whose key is within distance `n` of `center`, keyed relative to it.
    pub fn lamps_near(&self, x: &GroupElement, center: &GroupElement) -> Result<Vec<(GroupElement, GroupElement)>, PathError> {
        let base = self.base();
        let inv = base.invert_unchecked(center);
        let mut out = Vec::new();
        for (k, v) in parts(x).0 {
            let rel = base.multiply_unchecked(&inv, k);
            if self.base_geo.length(&rel)? <= self.n {
                out.push((rel, v.clone()));
            }
        }
        out.sort_by_cached_key(|(k, _)| base.encode(k));
        Ok(out)
    }

    /// Targets that clear every lamp of the current state near `center`.
    fn clear_region(&self, b: &Builder<'_, '_>, center: &GroupElement) -> Result<Vec<(GroupElement, GroupElement)>, PathError> {
        let base = self.base();
        let off = self.group.components().unwrap().0.identity();
        Ok(self
            .lamps_near(b.current(), center)?
            .into_iter()
            .map(|(k, _)| (base.multiply_unchecked(center, &k), off.clone()))
            .collect())
    }

    /// Targets that turn the lamps in `Bₙ(e)` into `target`.
    fn rewrite_origin(&self, b: &Builder<'_, '_>, target: &Lamps) -> Result<Vec<(GroupElement, GroupElement)>, PathError> {
        let e = self.base().identity();
        let mut out = self.clear_region(b, &e)?;
        for (k, v) in target {
            match out.iter_mut().find(|(key, _)| key == k) {
                Some(entry) => entry.1 = v.clone(),
                None => out.push((k.clone(), v.clone())),
            }
        }
        Ok(out)
    }

    fn marker_value(&self) -> GroupElement {
        self.group.components().unwrap().0.generators()[self.waypoints.h].clone()
    }

    fn off(&self) -> GroupElement {
        self.group.components().unwrap().0.identity()
    }

    fn case_distinct_lamps(&self, c: &Compiler<'_>, a: &GroupElement, b: &GroupElement) -> Result<WreathPath, PathError> {
        let base = self.base();
        let wp = &self.waypoints;
        let (x, _) = parts(a);
        let (y, l) = parts(b);
        let mut p = Builder::new(c, a.clone());
        p.begin(1);
        p.move_to(&wp.g)?;
        p.begin(2);
        p.sweep(&translate(base, &wp.g, x))?;
        p.begin(3);
        p.move_to(&wp.g_star)?;
        p.begin(4);
        p.sweep(&translate(base, &wp.g_star, x))?;
        p.begin(5);
        p.move_to(&base.identity())?;
        p.begin(6);
        let t = self.rewrite_origin(&p, y)?;
        p.sweep(&t)?;
        p.begin(7);
        p.move_to(&wp.g)?;
        p.begin(8);
        let t = self.clear_region(&p, &wp.g)?;
        p.sweep(&t)?;
        p.begin(9);
        p.move_to(&wp.g_star)?;
        p.begin(10);
        let t = self.clear_region(&p, &wp.g_star)?;
        p.sweep(&t)?;
        p.begin(11);
        p.move_to(l)?;
        p.finish(b)
    }

    fn case_distinct_positions(&self, c: &Compiler<'_>, a: &GroupElement, b: &GroupElement) -> Result<WreathPath, PathError> {
        let base = self.base();
        let wp = &self.waypoints;
        let (_, k) = parts(a);
        let (y, l) = parts(b);
        let kg = base.multiply_unchecked(k, &wp.g);
        let lg = base.multiply_unchecked(l, &wp.g_star);
        let (h, off) = (self.marker_value(), self.off());
        let back: Vec<usize> = wp.g_star_word.iter().rev().map(|&j| base.inverse_generator(j)).collect();
        let mut p = Builder::new(c, a.clone());
        p.begin(1);
        p.follow(&wp.g_word);
        p.begin(2);
        p.set_lamp(&kg, &h)?;
        p.begin(3);
        p.move_to(&lg)?;
        p.begin(4);
        p.set_lamp(&lg, &h)?;
        p.begin(5);
        p.move_to(&kg)?;
        p.begin(6);
        p.set_lamp(&kg, &off)?;
        p.begin(7);
        let t = self.rewrite_origin(&p, y)?;
        p.sweep(&t)?;
        p.begin(8);
        p.move_to(&lg)?;
        p.begin(9);
        p.set_lamp(&lg, &off)?;
        p.begin(10);
        p.follow(&back);
        p.finish(b)
    }

    /// From `s` (carrying the shared configuration) to `t`.
    fn case_shared(&self, c: &Compiler<'_>, s: &GroupElement, t: &GroupElement) -> Result<WreathPath, PathError> {
        let base = self.base();
        let wp = &self.waypoints;
        let (_, l) = parts(s);
        let (x, k) = parts(t);
        let lg = base.multiply_unchecked(l, &wp.g);
        let (h, off) = (self.marker_value(), self.off());
        let mut p = Builder::new(c, s.clone());
        p.begin(1);
        p.follow(&wp.g_word);
        p.begin(2);
        p.set_lamp(&lg, &h)?;
        p.begin(3);
        let targets = self.rewrite_origin(&p, x)?;
        p.sweep(&targets)?;
        p.begin(4);
        p.move_to(&lg)?;
        p.begin(5);
        p.set_lamp(&lg, &off)?;
        p.begin(6);
        p.move_to(k)?;
        p.finish(t)
    }

    /// Marker lamps must not sit inside `Bₙ(e)` and must be distinct.
    fn check_markers(&self, markers: &[GroupElement]) -> Result<(), PathError> {
        for m in markers {
            if self.base_geo.length(m)? <= self.n {
                return Err(PathError::InvalidFamily(format!(
                    "marker position {m} falls inside B_{}",
                    self.n
                )));
            }
        }
        if !all_distinct(markers) {
            return Err(PathError::InvalidFamily("marker positions collide".into()));
        }
        Ok(())
    }

    /// Compile one path per pair. Case 1 drops pairs with an all-off
    /// configuration, which the separation argument cannot use.
    pub fn construct_connecting_paths(&self, family: &PairFamily) -> Result<PathSet, PathError> {
        if family.group.descriptor() != self.group.descriptor() || family.n != self.n {
            return Err(PathError::InvalidFamily("family does not match the path context".into()));
        }
        let c = self.compiler()?;
        let base = self.base();
        let wp = &self.waypoints;
        let mut markers = Vec::new();
        match family.case {
            CaseTag::DistinctPositions => {
                for (a, b) in family.a.iter().zip(&family.b) {
                    markers.push(base.multiply_unchecked(parts(a).1, &wp.g));
                    markers.push(base.multiply_unchecked(parts(b).1, &wp.g_star));
                }
            }
            CaseTag::SharedTarget => {
                markers.extend(family.b.iter().map(|b| base.multiply_unchecked(parts(b).1, &wp.g)));
            }
            CaseTag::SharedSource => {
                markers.extend(family.a.iter().map(|a| base.multiply_unchecked(parts(a).1, &wp.g)));
            }
            CaseTag::DistinctLamps => {}
        }
        self.check_markers(&markers)?;

        let bound = 100 * self.n as usize;
        let mut set = PathSet {
            paths: Vec::new(),
            indices: Vec::new(),
            dropped: Vec::new(),
        };
        for (i, (a, b)) in family.a.iter().zip(&family.b).enumerate() {
            let path = match family.case {
                CaseTag::DistinctLamps => {
                    if parts(a).0.is_empty() || parts(b).0.is_empty() {
                        set.dropped.push(i);
                        continue;
                    }
                    self.case_distinct_lamps(&c, a, b)?
                }
                CaseTag::DistinctPositions => self.case_distinct_positions(&c, a, b)?,
                CaseTag::SharedTarget => self.case_shared(&c, b, a)?.reversed(&self.group),
                CaseTag::SharedSource => self.case_shared(&c, a, b)?,
            };
            if path.len() > bound {
                return Err(PathError::TooLong {
                    index: i,
                    length: path.len(),
                    bound,
                });
            }
            set.paths.push(path);
            set.indices.push(i);
        }
        Ok(set)
    }

    /// Index of the first vertex of a case-1 path at which none of the four
    /// separating conditions holds: lamps on `Bₙ(e)` equal `x` or `y`, or lamps on
    /// `Bₙ(g)` or `Bₙ(g*)` equal the translated copy of `x`.
    pub fn case1_witness_failure(&self, x: &GroupElement, y: &GroupElement, path: &WreathPath) -> Result<Option<usize>, PathError> {
        let e = self.base().identity();
        let x0 = self.lamps_near(x, &e)?;
        let y0 = self.lamps_near(y, &e)?;
        for (i, v) in path.vertices.iter().enumerate() {
            let here = self.lamps_near(v, &e)?;
            if here == x0
                || here == y0
                || self.lamps_near(v, &self.waypoints.g)? == x0
                || self.lamps_near(v, &self.waypoints.g_star)? == x0
            {
                continue;
            }
            return Ok(Some(i));
        }
        Ok(None)
    }
}

/// Pairwise intersection census of a path family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessReport {
    pub case: CaseTag,
    pub pairwise_disjoint: bool,
    /// For each path, how many other paths share a vertex with it.
    pub counts: Vec<usize>,
    pub max_count: usize,
    /// `100 n²`.
    pub bound: u64,
    pub adjacency: Vec<Vec<usize>>,
}

impl DisjointnessReport {
    pub fn within_bound(&self) -> bool {
        self.max_count as u64 <= self.bound
    }

    /// Case 1 families must be disjoint outright; the others need only respect the bound.
    pub fn acceptable(&self) -> bool {
        match self.case {
            CaseTag::DistinctLamps => self.pairwise_disjoint,
            _ => self.within_bound(),
        }
    }
}

pub fn verify_disjointness(group: &Group, paths: &[WreathPath], case: CaseTag, n: u32) -> DisjointnessReport {
    let mut owners: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
    for (i, p) in paths.iter().enumerate() {
        let mut mine = HashSet::new();
        for v in &p.vertices {
            let enc = group.encode(v);
            if mine.insert(enc.clone()) {
                owners.entry(enc).or_default().push(i);
            }
        }
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); paths.len()];
    for list in owners.values().filter(|l| l.len() > 1) {
        for &i in list {
            for &j in list {
                if i != j {
                    adj[i].insert(j);
                }
            }
        }
    }
    let adjacency: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    let counts: Vec<usize> = adjacency.iter().map(Vec::len).collect();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    DisjointnessReport {
        case,
        pairwise_disjoint: max_count == 0,
        counts,
        max_count,
        bound: 100 * (n as u64) * (n as u64),
        adjacency,
    }
}

/// Greedy dilution in index order: keep a path iff it meets no kept path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dilution {
    pub kept: Vec<usize>,
    /// `⌈N / (D + 1)⌉` for `D` the maximum intersection degree.
    pub guaranteed: usize,
}

pub fn dilute_paths(report: &DisjointnessReport) -> Dilution {
    let n = report.adjacency.len();
    let mut blocked = vec![false; n];
    let mut kept = Vec::new();
    for i in 0..n {
        if blocked[i] {
            continue;
        }
        kept.push(i);
        for &j in &report.adjacency[i] {
            blocked[j] = true;
        }
    }
    Dilution {
        kept,
        guaranteed: n.div_ceil(report.max_count + 1),
    }
}

/// A synthetic family of `count` pairs for the given case over a base `ℤ`,
/// drawn deterministically from `seed`. Lamps are on at value `h₀`.
pub fn synthetic_family(
    ctx: &PathContext,
    case: CaseTag,
    count: usize,
    seed: u64,
) -> Result<PairFamily, PathError> {
    let group = ctx.group.clone();
    let (lamp, base) = group.components().unwrap();
    if base.descriptor() != &GroupDescriptor::Lattice(1) {
        return Err(PathError::InvalidFamily("synthetic families need base Z".into()));
    }
    let n = ctx.n as i64;
    let width = 2 * n as u32 + 1;
    let on = lamp.generators()[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let element = |mask: u64, pos: i64| -> GroupElement {
        let lamps = (0..width)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| (GroupElement::lattice(&[b as i64 - n]), on.clone()));
        group
            .wreath_element(GroupElement::lattice(&[pos]), lamps)
            .expect("valid synthetic element")
    };
    let masks = 1u64 << width;
    let mut distinct_masks = |k: usize, avoid: &[u64]| -> Result<Vec<u64>, PathError> {
        if (k + avoid.len()) as u64 >= masks {
            return Err(PathError::InvalidFamily("not enough lamp configurations".into()));
        }
        let mut seen: HashSet<u64> = avoid.iter().copied().collect();
        seen.insert(0);
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let m = rng.gen_range(1..masks);
            if seen.insert(m) {
                out.push(m);
            }
        }
        Ok(out)
    };
    let c = count as i64;
    let (a, b): (Vec<GroupElement>, Vec<GroupElement>) = match case {
        CaseTag::DistinctLamps => {
            let ms = distinct_masks(2 * count, &[])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
            (
                (0..count).map(|i| element(ms[i], rng.gen_range(-n..=n))).collect(),
                (0..count).map(|i| element(ms[count + i], rng.gen_range(-n..=n))).collect(),
            )
        }
        CaseTag::DistinctPositions => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
            let mut ka: Vec<i64> = (-(c / 2)..c - c / 2).collect();
            let mut lb: Vec<i64> = (c - c / 2..2 * c - c / 2).collect();
            ka.shuffle(&mut rng);
            lb.shuffle(&mut rng);
            (
                ka.iter().map(|&k| element(rng.gen_range(0..masks), k)).collect(),
                lb.iter().map(|&l| element(rng.gen_range(0..masks), l)).collect(),
            )
        }
        CaseTag::SharedTarget | CaseTag::SharedSource => {
            let ms = distinct_masks(count + 1, &[])?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
            let distinct: Vec<GroupElement> =
                (0..count).map(|i| element(ms[i], rng.gen_range(-n..=n))).collect();
            let shared: Vec<GroupElement> = (0..c).map(|j| element(ms[count], -n + j)).collect();
            if case == CaseTag::SharedTarget {
                (distinct, shared)
            } else {
                (shared, distinct)
            }
        }
    };
    PairFamily::new(ctx, a, b, case)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: u32) -> PathContext {
        PathContext::new(&Group::parse("Z2wrZ").unwrap(), n).unwrap()
    }

    #[test]
    fn waypoints_on_line() {
        let c = ctx(2);
        assert_eq!(c.waypoints().g, GroupElement::lattice(&[10]));
        assert_eq!(c.waypoints().g_star, GroupElement::lattice(&[20]));
        assert_eq!(c.waypoints().h, 0);
        assert!(PathContext::new(&Group::parse("Z^2").unwrap(), 2).is_err());
    }

    #[test]
    fn classification() {
        let g = Group::parse("Z2wrZ").unwrap();
        let e = |s: &str| g.parse_element(s).unwrap();
        let a = vec![e("((0);{(0):1})"), e("((1);{(1):1})")];
        let b = vec![e("((0);{(-1):1})"), e("((0);{(0):1,(1):1})")];
        assert_eq!(classify_case(&g, &a, &b).unwrap(), CaseTag::DistinctLamps);
        let a = vec![e("((0);{})"), e("((1);{})")];
        let b = vec![e("((2);{})"), e("((3);{})")];
        assert_eq!(classify_case(&g, &a, &b).unwrap(), CaseTag::DistinctPositions);
        let a = vec![e("((0);{(0):1})"), e("((0);{(1):1})")];
        let b = vec![e("((0);{})"), e("((1);{})")];
        assert_eq!(classify_case(&g, &a, &b).unwrap(), CaseTag::SharedTarget);
        assert_eq!(classify_case(&g, &b, &a).unwrap(), CaseTag::SharedSource);
        assert!(matches!(classify_case(&g, &a, &b[..1]), Err(PathError::LengthMismatch { .. })));
        assert!(matches!(
            classify_case(&g, &a[..1], &a[..1]),
            Err(PathError::Degenerate { index: 0 })
        ));
        let a = vec![e("((0);{})"), e("((0);{})")];
        assert!(classify_case(&g, &a, &b).is_err());
    }

    #[test]
    fn case_one_pair_compiles() {
        let c = ctx(2);
        let g = c.group().clone();
        let e = |s: &str| g.parse_element(s).unwrap();
        let fam = PairFamily::new(
            &c,
            vec![e("((1);{(0):1})"), e("((-2);{(2):1,(-1):1})")],
            vec![e("((0);{(-2):1})"), e("((2);{(1):1})")],
            CaseTag::DistinctLamps,
        )
        .unwrap();
        let set = c.construct_connecting_paths(&fam).unwrap();
        assert_eq!(set.paths.len(), 2);
        for (p, (a, b)) in set.paths.iter().zip(fam.a.iter().zip(&fam.b)) {
            assert!(p.verify(&g));
            assert_eq!(g.apply_word(a, &p.word), *b);
            assert!(p.len() <= 200);
            assert_eq!(c.case1_witness_failure(a, b, p).unwrap(), None);
            let copy = c.lamps_near(p.after_step(2), &c.waypoints().g).unwrap();
            assert_eq!(copy, c.lamps_near(a, &g.components().unwrap().1.identity()).unwrap());
        }
        assert!(verify_disjointness(&g, &set.paths, CaseTag::DistinctLamps, 2).pairwise_disjoint);
    }

    #[test]
    fn case_two_single_pair() {
        let c = ctx(2);
        let g = c.group().clone();
        let e = |s: &str| g.parse_element(s).unwrap();
        let fam = PairFamily::new(
            &c,
            vec![e("((1);{(0):1})")],
            vec![e("((-1);{(0):1})")],
            CaseTag::DistinctPositions,
        )
        .unwrap();
        let set = c.construct_connecting_paths(&fam).unwrap();
        let p = &set.paths[0];
        assert!(p.verify(&g));
        assert_eq!(g.apply_word(&fam.a[0], &p.word), fam.b[0]);
    }

    #[test]
    fn empty_configurations_are_dropped_in_case_one() {
        let c = ctx(2);
        let g = c.group().clone();
        let e = |s: &str| g.parse_element(s).unwrap();
        let fam = PairFamily::new(
            &c,
            vec![e("((1);{})"), e("((0);{(1):1})")],
            vec![e("((0);{(-2):1})"), e("((2);{(2):1})")],
            CaseTag::DistinctLamps,
        )
        .unwrap();
        let set = c.construct_connecting_paths(&fam).unwrap();
        assert_eq!(set.dropped, vec![0]);
        assert_eq!(set.indices, vec![1]);
    }

    #[test]
    fn shared_cases_compile_both_ways() {
        let c = ctx(2);
        let g = c.group().clone();
        for case in [CaseTag::SharedTarget, CaseTag::SharedSource] {
            let fam = synthetic_family(&c, case, 5, 9).unwrap();
            let set = c.construct_connecting_paths(&fam).unwrap();
            assert_eq!(set.paths.len(), 5);
            for (p, (a, b)) in set.paths.iter().zip(fam.a.iter().zip(&fam.b)) {
                assert!(p.verify(&g));
                assert_eq!((&p.start, &p.end), (a, b));
                assert!(p.len() <= 200);
            }
            let r = verify_disjointness(&g, &set.paths, case, 2);
            assert!(r.acceptable());
        }
    }

    #[test]
    fn family_validation() {
        let c = ctx(2);
        let g = c.group().clone();
        let e = |s: &str| g.parse_element(s).unwrap();
        let far = PairFamily::new(&c, vec![e("((0);{(5):1})")], vec![e("((0);{})")], CaseTag::DistinctLamps);
        assert!(matches!(far, Err(PathError::InvalidFamily(_))));
        let wrong = PairFamily::new(&c, vec![e("((0);{})")], vec![e("((0);{(1):1})")], CaseTag::DistinctPositions);
        assert!(wrong.is_err());
    }

    #[test]
    fn dilution_on_small_graphs() {
        let r = DisjointnessReport {
            case: CaseTag::DistinctPositions,
            pairwise_disjoint: false,
            counts: vec![1, 2, 1],
            max_count: 2,
            bound: 100,
            adjacency: vec![vec![1], vec![0, 2], vec![1]],
        };
        let d = dilute_paths(&r);
        assert_eq!(d.kept, vec![0, 2]);
        assert_eq!(d.guaranteed, 1);
        let empty = verify_disjointness(&Group::parse("Z2wrZ").unwrap(), &[], CaseTag::DistinctLamps, 1);
        assert!(dilute_paths(&empty).kept.is_empty());
    }

    #[test]
    fn general_wreath_over_heisenberg_base_compiles() {
        let g = Group::parse("Z3wrZ^2").unwrap();
        let c = PathContext::new(&g, 1).unwrap();
        let e = |s: &str| g.parse_element(s).unwrap();
        let fam = PairFamily::new(
            &c,
            vec![e("((0,1);{(0,0):2})")],
            vec![e("((1,0);{(0,1):1,(-1,0):2})")],
            CaseTag::DistinctLamps,
        )
        .unwrap();
        let set = c.construct_connecting_paths(&fam).unwrap();
        assert!(set.paths[0].verify(&g));
        assert_eq!(set.paths[0].end, fam.b[0]);
    }
}
