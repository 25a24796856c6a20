//! Counting admissible orientations of ordered multigraphs.
//!
//! Vertices are `0..n` and edges `0..m`, both 0-based; the last vertex
//! `n - 1` plays the role of the distinguished urn, and `X(G)` is the set of
//! edges incident to it. A loop has a single orientation contributing one
//! in-edge and one out-edge to its vertex, so brute force only enumerates
//! directions of proper edges.
//!
//! `M(S)` counts the admissible orientations whose out-edges at the last
//! vertex are exactly `S` (and whose in-edges there are `X ∖ S`). The
//! recurrence engine evaluates `M` through the deletion, contraction and
//! splitting identities and agrees with brute force everywhere.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::RngCore;

use crate::bipartite::{build_h_x, certify_level, LevelCertificate};
use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::measure::{PointPoset, SetMeasure};
use crate::negdep::Verdict;
use crate::rational::{self, Rational};
use crate::urn::{ball_conditioning, occ_conditioning, UrnModel};

/// Multigraph with ordered vertices and edges; each edge is stored as
/// `(i, j)` with `i <= j`. Loops and parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl MultiGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<MultiGraph> {
        if vertices == 0 {
            return Err(Error::Precondition("a graph needs at least one vertex".into()));
        }
        if edges.len() > 64 {
            return Err(Error::Precondition("at most 64 edges are supported".into()));
        }
        if edges.iter().any(|&(i, j)| i >= vertices || j >= vertices) {
            return Err(Error::Precondition("edge endpoint out of range".into()));
        }
        Ok(Self::raw(vertices, edges))
    }

    fn raw(vertices: usize, edges: Vec<(usize, usize)>) -> MultiGraph {
        let edges = edges.into_iter().map(|(i, j)| (i.min(j), i.max(j))).collect();
        MultiGraph { vertices, edges }
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn last(&self) -> usize {
        self.vertices - 1
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.edges[e].0 == self.edges[e].1
    }

    /// Edges incident to the last vertex.
    pub fn x_set(&self) -> Subset {
        self.incident_set(self.last())
    }

    fn incident_set(&self, v: usize) -> Subset {
        Subset::from_indices((0..self.edges.len()).filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v))
    }

    /// Incident edge indices of `v`, each listed once.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        self.incident_set(v).to_vec()
    }

    /// Degree with loops counted twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(i, j)| usize::from(i == v) + usize::from(j == v))
            .sum()
    }

    pub fn has_loop_at(&self, v: usize) -> bool {
        self.edges.iter().any(|&(i, j)| i == v && j == v)
    }

    fn other_end(&self, e: usize, v: usize) -> usize {
        let (i, j) = self.edges[e];
        if i == v {
            j
        } else {
            i
        }
    }

    /// Relabel vertices by `perm[old] = new`; edge order is kept.
    pub fn permute_vertices(&self, perm: &[usize]) -> MultiGraph {
        Self::raw(self.vertices, self.edges.iter().map(|&(i, j)| (perm[i], perm[j])).collect())
    }

    /// Reorder edges so that new edge `k` is old edge `order[k]`.
    pub fn permute_edges(&self, order: &[usize]) -> (MultiGraph, EdgeRemap) {
        let mut map = vec![None; self.edges.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = Some(new);
        }
        let g = MultiGraph {
            vertices: self.vertices,
            edges: order.iter().map(|&old| self.edges[old]).collect(),
        };
        (g, EdgeRemap { map })
    }

    /// Remove edge `idx`: it is first swapped with the last edge, which then
    /// takes over index `idx`.
    pub fn delete_edge(&self, idx: usize) -> (MultiGraph, EdgeRemap) {
        let m = self.edges.len();
        let mut edges = self.edges.clone();
        edges.swap(idx, m - 1);
        edges.pop();
        let mut map: Vec<Option<usize>> = (0..m).map(Some).collect();
        map[m - 1] = Some(idx);
        map[idx] = None;
        (
            MultiGraph {
                vertices: self.vertices,
                edges,
            },
            EdgeRemap { map },
        )
    }

    /// Contract proper edge `idx = {v_i, v_j}`, `i < j`: the merged vertex
    /// keeps label `i` and every vertex above `j` moves down by one. Edges
    /// are removed as in [`MultiGraph::delete_edge`]; parallel edges become
    /// loops.
    pub fn contract_edge(&self, idx: usize) -> Result<(MultiGraph, EdgeRemap)> {
        let (i, j) = self.edges[idx];
        if i == j {
            return Err(Error::Precondition("cannot contract a loop".into()));
        }
        let (deleted, remap) = self.delete_edge(idx);
        let relabel = |v: usize| match v.cmp(&j) {
            core::cmp::Ordering::Less => v,
            core::cmp::Ordering::Equal => i,
            core::cmp::Ordering::Greater => v - 1,
        };
        let edges = deleted.edges.iter().map(|&(a, b)| (relabel(a), relabel(b))).collect();
        Ok((Self::raw(self.vertices - 1, edges), remap))
    }

    /// The `π`-split of `v`: `v` is replaced by one new vertex per pair of
    /// `pairs`, inserted in its place. Pairs are taken in order of their
    /// smaller edge index; vertices above `v` move up. Edge labels are kept.
    pub fn split_vertex(&self, v: usize, pairs: &[(usize, usize)]) -> Result<MultiGraph> {
        if v >= self.last() {
            return Err(Error::Precondition("only vertices below the last one can be split".into()));
        }
        if self.has_loop_at(v) {
            return Err(Error::Precondition("split vertex carries a loop".into()));
        }
        if pairs.is_empty() {
            return Err(Error::Precondition("split needs at least one pair".into()));
        }
        let mut sorted: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        sorted.sort_unstable();
        let covered = Subset::from_indices(sorted.iter().flat_map(|&(a, b)| [a, b]));
        if sorted.iter().any(|&(a, b)| a == b) || covered.len() != 2 * sorted.len() || covered != self.incident_set(v) {
            return Err(Error::Precondition("pairs are not a perfect matching of the incident edges".into()));
        }
        let extra = sorted.len() - 1;
        let mut slot = vec![0usize; self.edges.len()];
        for (k, &(a, b)) in sorted.iter().enumerate() {
            slot[a] = k;
            slot[b] = k;
        }
        let shift = |u: usize| if u > v { u + extra } else { u };
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                let a = if a == v { v + slot[e] } else { shift(a) };
                let b = if b == v { v + slot[e] } else { shift(b) };
                (a, b)
            })
            .collect();
        Ok(Self::raw(self.vertices + extra, edges))
    }
}

/// Where each old edge index went; `None` for removed edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeRemap {
    map: Vec<Option<usize>>,
}

impl EdgeRemap {
    pub fn get(&self, old: usize) -> Option<usize> {
        self.map.get(old).copied().flatten()
    }

    /// Image of an edge set; removed edges are dropped.
    pub fn apply(&self, s: Subset) -> Subset {
        Subset::from_indices(s.iter().filter_map(|e| self.get(e)))
    }
}

/// All perfect matchings of `items`, as lists of pairs.
pub fn perfect_matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    if items.len() % 2 == 1 {
        return Vec::new();
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|&(i, _)| i + 1 != k).map(|(_, &x)| x).collect();
        for mut pm in perfect_matchings(&rest) {
            pm.insert(0, (first, items[k]));
            out.push(pm);
        }
    }
    out
}

/// Constraint on the first `d` vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdmissibilitySpec {
    /// Each of `v_1..v_d` has an in-edge and an out-edge.
    Occ { d: usize },
    /// `v_i` has in-degree and out-degree `a_i`.
    Ball { a: Vec<u32> },
}

impl AdmissibilitySpec {
    pub fn prefix_len(&self) -> usize {
        match self {
            AdmissibilitySpec::Occ { d } => *d,
            AdmissibilitySpec::Ball { a } => a.len(),
        }
    }

    pub fn validate(&self, g: &MultiGraph) -> Result<()> {
        if self.prefix_len() >= g.vertices() {
            return Err(Error::Precondition(alloc::format!(
                "prefix of length {} needs more than {} vertices",
                self.prefix_len(),
                g.vertices()
            )));
        }
        Ok(())
    }

    fn admits(&self, outdeg: &[u32], indeg: &[u32]) -> bool {
        match self {
            AdmissibilitySpec::Occ { d } => (0..*d).all(|i| outdeg[i] >= 1 && indeg[i] >= 1),
            AdmissibilitySpec::Ball { a } => a.iter().enumerate().all(|(i, &ai)| outdeg[i] == ai && indeg[i] == ai),
        }
    }
}

/// `S ↦ M(S)` for every `S ⊆ X(G)` with a nonzero count, by enumerating all
/// `2^(proper edges)` orientations.
pub fn orientation_profile(g: &MultiGraph, spec: &AdmissibilitySpec, limits: &Limits) -> Result<BTreeMap<Subset, u128>> {
    spec.validate(g)?;
    let proper: Vec<usize> = (0..g.edge_count()).filter(|&e| !g.is_loop(e)).collect();
    if proper.len() > limits.orientation_edges {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << proper.len(),
            budget: 1u128 << limits.orientation_edges,
        });
    }
    let mut profile = BTreeMap::new();
    let last = g.last();
    if g.has_loop_at(last) {
        return Ok(profile);
    }
    let mut base = vec![0u32; g.vertices()];
    for (e, &(i, _)) in g.edges().iter().enumerate() {
        if g.is_loop(e) {
            base[i] += 1;
        }
    }
    let mut outdeg = base.clone();
    let mut indeg = base.clone();
    for mask in 0u64..(1u64 << proper.len()) {
        outdeg.copy_from_slice(&base);
        indeg.copy_from_slice(&base);
        let mut s = Subset(0);
        for (k, &e) in proper.iter().enumerate() {
            let (i, j) = g.edges()[e];
            // Bit set: directed from the smaller endpoint to the larger.
            let (from, to) = if mask >> k & 1 == 1 { (i, j) } else { (j, i) };
            outdeg[from] += 1;
            indeg[to] += 1;
            if from == last {
                s.insert(e);
            }
        }
        if spec.admits(&outdeg, &indeg) {
            *profile.entry(s).or_insert(0) += 1;
        }
    }
    Ok(profile)
}

fn require_in_x(g: &MultiGraph, s: Subset) -> Result<()> {
    if s.is_subset_of(g.x_set()) {
        Ok(())
    } else {
        Err(Error::Precondition("S must be a subset of X(G)".into()))
    }
}

/// `M(S)` by exhaustive enumeration.
pub fn brute_m(g: &MultiGraph, spec: &AdmissibilitySpec, s: Subset, limits: &Limits) -> Result<u128> {
    require_in_x(g, s)?;
    Ok(orientation_profile(g, spec, limits)?.get(&s).copied().unwrap_or(0))
}

pub fn brute_m_occ(g: &MultiGraph, d: usize, s: Subset, limits: &Limits) -> Result<u128> {
    brute_m(g, &AdmissibilitySpec::Occ { d }, s, limits)
}

pub fn brute_m_ball(g: &MultiGraph, a: &[u32], s: Subset, limits: &Limits) -> Result<u128> {
    brute_m(g, &AdmissibilitySpec::Ball { a: a.to_vec() }, s, limits)
}

/// One term `coef · M_{graph, spec}(s)` of a recurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coef: u128,
    pub graph: MultiGraph,
    pub spec: AdmissibilitySpec,
    pub s: Subset,
}

/// Right-hand side of a recurrence: `(Σ terms) / divisor`. No terms means
/// the value is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub terms: Vec<Term>,
    pub divisor: u128,
}

impl Expansion {
    pub fn zero() -> Expansion {
        Expansion {
            terms: Vec::new(),
            divisor: 1,
        }
    }

    fn single(coef: u128, graph: MultiGraph, spec: AdmissibilitySpec, s: Subset) -> Expansion {
        Expansion {
            terms: vec![Term { coef, graph, spec, s }],
            divisor: 1,
        }
    }

    /// Evaluate with `value` for each term. Panics if the division is not
    /// exact, which would mean the recurrence was applied incorrectly.
    pub fn evaluate<F: FnMut(&Term) -> Result<u128>>(&self, mut value: F) -> Result<u128> {
        let mut total = 0u128;
        for t in &self.terms {
            total += t.coef * value(t)?;
        }
        assert!(total % self.divisor == 0, "inexact division by {}", self.divisor);
        Ok(total / self.divisor)
    }
}

fn occ(d: usize) -> AdmissibilitySpec {
    AdmissibilitySpec::Occ { d }
}

fn ball(a: &[u32]) -> AdmissibilitySpec {
    AdmissibilitySpec::Ball { a: a.to_vec() }
}

fn last_edge(g: &MultiGraph) -> Result<(usize, usize)> {
    g.edges()
        .last()
        .copied()
        .ok_or_else(|| Error::Precondition("the graph has no edges".into()))
}

fn delete_last(g: &MultiGraph) -> MultiGraph {
    g.delete_edge(g.edge_count() - 1).0
}

fn precondition<T>(what: &str) -> Result<T> {
    Err(Error::Precondition(what.into()))
}

/// Last edge is a loop: at `v_d` it drops `d` by one, at `v_{d+1}` it is
/// simply deleted, and at the last vertex it forces zero.
pub fn occ_loop(g: &MultiGraph, d: usize, s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (v, w) = last_edge(g)?;
    if v != w {
        return precondition("last edge is not a loop");
    }
    if v == g.last() {
        Ok(Expansion::zero())
    } else if d >= 1 && v == d - 1 {
        Ok(Expansion::single(1, delete_last(g), occ(d - 1), s))
    } else if v == d {
        Ok(Expansion::single(1, delete_last(g), occ(d), s))
    } else {
        precondition("loop is not at v_d, v_{d+1} or the last vertex")
    }
}

/// Type A: last edge joins `v_{d-1}` and `v_d`.
///
/// Contraction turns each of the `p` other edges parallel to `e` into a loop.
/// Those edges had two orientations each while a loop has one, so the
/// contraction term carries the coefficient `2^p`.
pub fn occ_type_a(g: &MultiGraph, d: usize, s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    if d < 2 || last_edge(g)? != (d - 2, d - 1) {
        return precondition("last edge must join v_{d-1} and v_d");
    }
    if g.degree(d - 2) < 2 || g.degree(d - 1) < 2 {
        return Ok(Expansion::zero());
    }
    let parallel = g.edges().iter().filter(|&&e| e == (d - 2, d - 1)).count() - 1;
    let (contracted, _) = g.contract_edge(g.edge_count() - 1)?;
    Ok(Expansion {
        terms: vec![
            Term {
                coef: 1,
                graph: delete_last(g),
                spec: occ(d),
                s,
            },
            Term {
                coef: 1 << parallel,
                graph: contracted,
                spec: occ(d - 1),
                s,
            },
        ],
        divisor: 1,
    })
}

/// Type B: last edge joins `v_d` and `v_{d+1}`, with `v_{d+1}` not last.
pub fn occ_type_b(g: &MultiGraph, d: usize, s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    if d < 1 || d >= g.last() || last_edge(g)? != (d - 1, d) {
        return precondition("last edge must join v_d and v_{d+1} with d < n - 1");
    }
    if g.degree(d - 1) < 2 {
        return Ok(Expansion::zero());
    }
    let rest = delete_last(g);
    Ok(Expansion {
        terms: vec![
            Term {
                coef: 1,
                graph: rest.clone(),
                spec: occ(d),
                s,
            },
            Term {
                coef: 1,
                graph: rest,
                spec: occ(d - 1),
                s,
            },
        ],
        divisor: 1,
    })
}

/// Type C: last edge joins `v_{d+1}` and `v_{d+2}`, neither of them last.
pub fn occ_type_c(g: &MultiGraph, d: usize, s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    if d + 2 >= g.vertices() || last_edge(g)? != (d, d + 1) {
        return precondition("last edge must join v_{d+1} and v_{d+2} with d < n - 2");
    }
    Ok(Expansion::single(2, delete_last(g), occ(d), s))
}

/// Every edge touches the last vertex: `M(S)` is the indicator that `S`
/// meets each part `X_i` (`i <= d`) nontrivially but not completely.
pub fn occ_base(g: &MultiGraph, d: usize, s: Subset) -> Result<u128> {
    require_in_x(g, s)?;
    let last = g.last();
    if g.edges().iter().any(|&(_, j)| j != last) {
        return precondition("every edge must be incident to the last vertex");
    }
    if g.has_loop_at(last) {
        return Ok(0);
    }
    let ok = (0..d).all(|i| {
        let part = g.incident_set(i);
        let hit = s.intersection(part).len();
        0 < hit && hit < part.len()
    });
    Ok(u128::from(ok))
}

fn prefix_a(a: &[u32]) -> Result<(usize, u32)> {
    match a.len() {
        0 => precondition("a must be nonempty"),
        d => Ok((d, a[d - 1])),
    }
}

/// Last edge is a loop at `v_d`: it uses one in- and one out-slot.
pub fn ball_loop(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (d, ad) = prefix_a(a)?;
    if last_edge(g)? != (d - 1, d - 1) {
        return precondition("last edge must be a loop at v_d");
    }
    if ad == 0 {
        return Ok(Expansion::zero());
    }
    let mut a2 = a.to_vec();
    a2[d - 1] -= 1;
    Ok(Expansion::single(1, delete_last(g), ball(&a2), s))
}

/// Split `v_d` along every perfect matching of its edges; the prefix grows
/// to `(a_1, …, a_{d-1}, 1, …, 1)` with `a_d` ones, and the sum is divided
/// by `a_d!`.
pub fn ball_split(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (d, ad) = prefix_a(a)?;
    let v = d - 1;
    if ad == 0 || g.has_loop_at(v) || g.degree(v) != 2 * ad as usize {
        return precondition("v_d must be loopless with degree 2 a_d >= 2");
    }
    let mut a2 = a[..d - 1].to_vec();
    a2.extend(core::iter::repeat(1).take(ad as usize));
    let mut terms = Vec::new();
    for pm in perfect_matchings(&g.incident(v)) {
        terms.push(Term {
            coef: 1,
            graph: g.split_vertex(v, &pm)?,
            spec: ball(&a2),
            s,
        });
    }
    Ok(Expansion {
        terms,
        divisor: u128::from(rational::factorial(ad as usize)),
    })
}

/// The two edges at `v_d` (`a_d = 1`), required to be the last two, with
/// their other endpoints.
fn degree_two_pair(g: &MultiGraph, a: &[u32]) -> Result<(usize, usize, usize)> {
    let (d, ad) = prefix_a(a)?;
    let m = g.edge_count();
    let v = d - 1;
    if ad != 1 || m < 2 || g.incident(v) != vec![m - 2, m - 1] || g.has_loop_at(v) {
        return precondition("v_d must have a_d = 1 and exactly the last two edges, no loops");
    }
    Ok((v, g.other_end(m - 2, v), g.other_end(m - 1, v)))
}

/// Type 1: the other endpoints of `e = e_{m-1}` and `f = e_m` differ; `f`
/// is contracted. The other endpoint of `f` must not be the last vertex.
pub fn ball_type1(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (_, u, w) = degree_two_pair(g, a)?;
    if u == w || w == g.last() {
        return precondition("type 1 needs distinct other endpoints and f away from the last vertex");
    }
    let (contracted, _) = g.contract_edge(g.edge_count() - 1)?;
    Ok(Expansion::single(1, contracted, ball(&a[..a.len() - 1]), s))
}

/// Types 2 and 3: both edges at `v_d` go to `v_{d-1}` (type 2) or to
/// `v_{d+1}` (type 3, not last).
pub fn ball_type23(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (v, u, w) = degree_two_pair(g, a)?;
    let d = v + 1;
    if u != w {
        return precondition("types 2 and 3 need a common other endpoint");
    }
    let rest = delete_last(&delete_last(g));
    if d >= 2 && u == d - 2 {
        let mut a2 = a[..d - 1].to_vec();
        if a2[d - 2] == 0 {
            return Ok(Expansion::zero());
        }
        a2[d - 2] -= 1;
        Ok(Expansion::single(2, rest, ball(&a2), s))
    } else if u == d && u != g.last() {
        Ok(Expansion::single(2, rest, ball(&a[..d - 1]), s))
    } else {
        precondition("common endpoint must be v_{d-1} or v_{d+1}")
    }
}

/// Type 4: both edges at `v_d` go to the last vertex; exactly one of them
/// must leave it.
pub fn ball_type4(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Expansion> {
    require_in_x(g, s)?;
    let (_, u, w) = degree_two_pair(g, a)?;
    if u != g.last() || w != g.last() {
        return precondition("type 4 needs both edges at the last vertex");
    }
    let m = g.edge_count();
    let pair = Subset::from_indices([m - 2, m - 1]);
    if s.intersection(pair).len() != 1 {
        return Ok(Expansion::zero());
    }
    let rest = delete_last(&delete_last(g));
    Ok(Expansion::single(1, rest, ball(&a[..a.len() - 1]), s.difference(pair)))
}

/// `d = 0`: edges away from the last vertex orient freely, the rest are
/// fixed by `S`.
pub fn ball_base(g: &MultiGraph, s: Subset) -> Result<u128> {
    require_in_x(g, s)?;
    if g.has_loop_at(g.last()) {
        return Ok(0);
    }
    let x = g.x_set();
    let free = (0..g.edge_count()).filter(|&e| !g.is_loop(e) && !x.contains(e)).count();
    Ok(1u128 << free)
}

/// Names of the individual recurrence identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Recurrence {
    OccLoopAtPrefix,
    OccLoopAtFree,
    OccLoopAtLast,
    OccTypeA,
    OccTypeB,
    OccTypeC,
    BallLoop,
    BallSplit,
    BallType1,
    BallType2,
    BallType3,
    BallType4,
}

impl Recurrence {
    pub const ALL: [Recurrence; 12] = [
        Recurrence::OccLoopAtPrefix,
        Recurrence::OccLoopAtFree,
        Recurrence::OccLoopAtLast,
        Recurrence::OccTypeA,
        Recurrence::OccTypeB,
        Recurrence::OccTypeC,
        Recurrence::BallLoop,
        Recurrence::BallSplit,
        Recurrence::BallType1,
        Recurrence::BallType2,
        Recurrence::BallType3,
        Recurrence::BallType4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Recurrence::OccLoopAtPrefix => "occ loop at v_d",
            Recurrence::OccLoopAtFree => "occ loop at v_{d+1}",
            Recurrence::OccLoopAtLast => "occ loop at v_n",
            Recurrence::OccTypeA => "occ type A",
            Recurrence::OccTypeB => "occ type B",
            Recurrence::OccTypeC => "occ type C",
            Recurrence::BallLoop => "ball loop at v_d",
            Recurrence::BallSplit => "ball vertex splitting",
            Recurrence::BallType1 => "ball type 1",
            Recurrence::BallType2 => "ball type 2",
            Recurrence::BallType3 => "ball type 3",
            Recurrence::BallType4 => "ball type 4",
        }
    }

    /// Apply the identity to a conforming instance.
    pub fn expand(self, g: &MultiGraph, spec: &AdmissibilitySpec, s: Subset) -> Result<Expansion> {
        match (self, spec) {
            (Recurrence::OccLoopAtPrefix | Recurrence::OccLoopAtFree | Recurrence::OccLoopAtLast, AdmissibilitySpec::Occ { d }) => {
                occ_loop(g, *d, s)
            }
            (Recurrence::OccTypeA, AdmissibilitySpec::Occ { d }) => occ_type_a(g, *d, s),
            (Recurrence::OccTypeB, AdmissibilitySpec::Occ { d }) => occ_type_b(g, *d, s),
            (Recurrence::OccTypeC, AdmissibilitySpec::Occ { d }) => occ_type_c(g, *d, s),
            (Recurrence::BallLoop, AdmissibilitySpec::Ball { a }) => ball_loop(g, a, s),
            (Recurrence::BallSplit, AdmissibilitySpec::Ball { a }) => ball_split(g, a, s),
            (Recurrence::BallType1, AdmissibilitySpec::Ball { a }) => ball_type1(g, a, s),
            (Recurrence::BallType2 | Recurrence::BallType3, AdmissibilitySpec::Ball { a }) => ball_type23(g, a, s),
            (Recurrence::BallType4, AdmissibilitySpec::Ball { a }) => ball_type4(g, a, s),
            _ => precondition("recurrence and spec kinds differ"),
        }
    }

    /// A random instance satisfying the identity's hypotheses: the graph,
    /// spec and a random `S ⊆ X(G)`.
    pub fn instance(self, rng: &mut ChaCha8Rng) -> (MultiGraph, AdmissibilitySpec, Subset) {
        loop {
            if let Some((g, spec)) = self.try_instance(rng) {
                let s = random_subset(rng, g.x_set());
                return (g, spec, s);
            }
        }
    }

    fn try_instance(self, rng: &mut ChaCha8Rng) -> Option<(MultiGraph, AdmissibilitySpec)> {
        let n = 2 + below(rng, 4);
        let extra = below(rng, 5);
        let mut edges = random_edges(rng, n, extra);
        let last = n - 1;
        let spec = match self {
            Recurrence::OccLoopAtPrefix => {
                let d = 1 + below(rng, n - 1);
                edges.push((d - 1, d - 1));
                occ(d)
            }
            Recurrence::OccLoopAtFree => {
                let d = below(rng, n - 1);
                edges.push((d, d));
                occ(d)
            }
            Recurrence::OccLoopAtLast => {
                edges.push((last, last));
                occ(below(rng, n))
            }
            Recurrence::OccTypeA => {
                if n < 3 {
                    return None;
                }
                let d = 2 + below(rng, n - 2);
                edges.push((d - 2, d - 1));
                occ(d)
            }
            Recurrence::OccTypeB => {
                if n < 3 {
                    return None;
                }
                let d = 1 + below(rng, n - 2);
                edges.push((d - 1, d));
                occ(d)
            }
            Recurrence::OccTypeC => {
                if n < 3 {
                    return None;
                }
                let d = below(rng, n - 2);
                edges.push((d, d + 1));
                occ(d)
            }
            Recurrence::BallLoop | Recurrence::BallSplit => {
                let d = 1 + below(rng, n - 1);
                if self == Recurrence::BallLoop {
                    edges.push((d - 1, d - 1));
                } else {
                    edges.retain(|&(i, j)| !(i == d - 1 && j == d - 1));
                    if g_degree(&edges, d - 1) < 2 {
                        return None;
                    }
                }
                return degrees_as_ball(n, edges, d);
            }
            Recurrence::BallType1 | Recurrence::BallType2 | Recurrence::BallType3 | Recurrence::BallType4 => {
                let d = 1 + below(rng, n - 1);
                let v = d - 1;
                edges.retain(|&(i, j)| i != v && j != v);
                let (u, w) = match self {
                    Recurrence::BallType1 => {
                        let u = pick_other(rng, n, v)?;
                        let w = pick_other(rng, n - 1, v)?;
                        if u == w {
                            return None;
                        }
                        (u, w)
                    }
                    Recurrence::BallType2 => {
                        if d < 2 {
                            return None;
                        }
                        (d - 2, d - 2)
                    }
                    Recurrence::BallType3 => {
                        if d >= last {
                            return None;
                        }
                        (d, d)
                    }
                    _ => (last, last),
                };
                edges.push((u, v));
                edges.push((w, v));
                return degrees_as_ball(n, edges, d);
            }
        };
        Some((MultiGraph::new(n, edges).ok()?, spec))
    }
}

fn below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    (rng.next_u32() as usize) % bound
}

/// A vertex in `0..bound` other than `v`, if there is one.
fn pick_other(rng: &mut ChaCha8Rng, bound: usize, v: usize) -> Option<usize> {
    let choices: Vec<usize> = (0..bound).filter(|&u| u != v).collect();
    if choices.is_empty() {
        None
    } else {
        Some(choices[below(rng, choices.len())])
    }
}

fn g_degree(edges: &[(usize, usize)], v: usize) -> usize {
    edges.iter().map(|&(i, j)| usize::from(i == v) + usize::from(j == v)).sum()
}

/// Use half the degrees of `v_1..v_d` as `a`, rejecting odd degrees.
fn degrees_as_ball(n: usize, edges: Vec<(usize, usize)>, d: usize) -> Option<(MultiGraph, AdmissibilitySpec)> {
    let mut a = Vec::with_capacity(d);
    for v in 0..d {
        let deg = g_degree(&edges, v);
        if deg % 2 == 1 {
            return None;
        }
        a.push((deg / 2) as u32);
    }
    Some((MultiGraph::new(n, edges).ok()?, AdmissibilitySpec::Ball { a }))
}

fn random_edges(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    (0..count)
        .map(|_| {
            let i = below(rng, n);
            let j = below(rng, n);
            (i.min(j), i.max(j))
        })
        .collect()
}

fn random_subset(rng: &mut ChaCha8Rng, within: Subset) -> Subset {
    Subset(rng.next_u64() & within.0)
}

/// A multigraph whose edges are independent uniform vertex pairs.
pub fn random_multigraph(rng: &mut ChaCha8Rng, vertices: usize, edges: usize) -> MultiGraph {
    MultiGraph::raw(vertices, random_edges(rng, vertices, edges))
}

/// Every labeled multigraph on `vertices` vertices with exactly `edges`
/// edges (ordered sequences of unordered pairs).
pub fn all_multigraphs(vertices: usize, edges: usize) -> impl Iterator<Item = MultiGraph> {
    let pairs: Vec<(usize, usize)> = (0..vertices).flat_map(|i| (i..vertices).map(move |j| (i, j))).collect();
    let p = pairs.len();
    let total = p.pow(edges as u32);
    (0..total).map(move |mut code| {
        let mut list = Vec::with_capacity(edges);
        for _ in 0..edges {
            list.push(pairs[code % p]);
            code /= p;
        }
        MultiGraph { vertices, edges: list }
    })
}

/// Write `fixed` moves (`old → new`, both inside `lo..hi`) into `perm` and
/// fill the rest of `lo..hi` in increasing order.
fn place(perm: &mut [usize], lo: usize, hi: usize, fixed: &[(usize, usize)]) {
    let olds: Vec<usize> = (lo..hi).filter(|x| !fixed.iter().any(|f| f.0 == *x)).collect();
    let news: Vec<usize> = (lo..hi).filter(|x| !fixed.iter().any(|f| f.1 == *x)).collect();
    for &(o, n) in fixed {
        perm[o] = n;
    }
    for (o, n) in olds.into_iter().zip(news) {
        perm[o] = n;
    }
}

/// Move the `chosen` edges, in that order, to the end of the edge list.
fn edges_to_end(g: &MultiGraph, s: Subset, chosen: &[usize]) -> (MultiGraph, Subset) {
    let mut order: Vec<usize> = (0..g.edge_count()).filter(|e| !chosen.contains(e)).collect();
    order.extend_from_slice(chosen);
    let (h, remap) = g.permute_edges(&order);
    (h, remap.apply(s))
}

enum Step {
    Value(u128),
    Expand(Expansion),
}

/// Memoised recurrence engine for `M`.
#[derive(Debug, Default)]
pub struct OrientationCounter {
    memo: BTreeMap<(MultiGraph, AdmissibilitySpec, Subset), u128>,
}

impl OrientationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn count(&mut self, g: &MultiGraph, spec: &AdmissibilitySpec, s: Subset) -> Result<u128> {
        spec.validate(g)?;
        require_in_x(g, s)?;
        let key = (g.clone(), spec.clone(), s);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let value = match step(g, spec, s)? {
            Step::Value(v) => v,
            Step::Expand(exp) => exp.evaluate(|t| self.count(&t.graph, &t.spec, t.s))?,
        };
        self.memo.insert(key, value);
        Ok(value)
    }
}

pub fn rec_m_occ(g: &MultiGraph, d: usize, s: Subset) -> Result<u128> {
    OrientationCounter::new().count(g, &occ(d), s)
}

pub fn rec_m_ball(g: &MultiGraph, a: &[u32], s: Subset) -> Result<u128> {
    OrientationCounter::new().count(g, &ball(a), s)
}

fn step(g: &MultiGraph, spec: &AdmissibilitySpec, s: Subset) -> Result<Step> {
    match spec {
        AdmissibilitySpec::Occ { d } => step_occ(g, *d, s),
        AdmissibilitySpec::Ball { a } => step_ball(g, a, s),
    }
}

/// Pick an edge by priority (loop; both ends in the prefix; one end in the
/// prefix and one free; both free) and relabel so the matching identity
/// applies verbatim. With none left, every edge is at the last vertex.
fn step_occ(g: &MultiGraph, d: usize, s: Subset) -> Result<Step> {
    let n = g.vertices();
    let last = g.last();
    let edges = g.edges();
    let find = |pred: &dyn Fn(usize, usize) -> bool| (0..edges.len()).find(|&e| pred(edges[e].0, edges[e].1));
    let mut perm: Vec<usize> = (0..n).collect();
    let e = if let Some(e) = find(&|i, j| i == j) {
        let v = edges[e].0;
        if v == last {
            return Ok(Step::Value(0));
        }
        if v < d {
            place(&mut perm, 0, d, &[(v, d - 1)]);
        } else {
            place(&mut perm, d, last, &[(v, d)]);
        }
        e
    } else if let Some(e) = find(&|_, j| j < d) {
        let (p, q) = edges[e];
        place(&mut perm, 0, d, &[(p, d - 2), (q, d - 1)]);
        e
    } else if let Some(e) = find(&|i, j| i < d && j < last) {
        let (p, q) = edges[e];
        place(&mut perm, 0, d, &[(p, d - 1)]);
        place(&mut perm, d, last, &[(q, d)]);
        e
    } else if let Some(e) = find(&|_, j| j < last) {
        let (p, q) = edges[e];
        place(&mut perm, d, last, &[(p, d), (q, d + 1)]);
        e
    } else {
        return Ok(Step::Value(occ_base(g, d, s)?));
    };
    let (h, s) = edges_to_end(&g.permute_vertices(&perm), s, &[e]);
    let (i, j) = h.edges()[h.edge_count() - 1];
    let exp = if i == j {
        occ_loop(&h, d, s)?
    } else if j < d {
        occ_type_a(&h, d, s)?
    } else if i < d {
        occ_type_b(&h, d, s)?
    } else {
        occ_type_c(&h, d, s)?
    };
    Ok(Step::Expand(exp))
}

/// Degree guard, then loop removal, splitting, and the four `a_d = 1` types.
fn step_ball(g: &MultiGraph, a: &[u32], s: Subset) -> Result<Step> {
    let d = a.len();
    let last = g.last();
    if (0..d).any(|i| g.degree(i) != 2 * a[i] as usize) || g.has_loop_at(last) {
        return Ok(Step::Value(0));
    }
    if d == 0 {
        return Ok(Step::Value(ball_base(g, s)?));
    }
    let v = d - 1;
    if a[v] == 0 {
        // v_d is isolated, so its constraint holds trivially.
        return Ok(Step::Expand(Expansion::single(1, g.clone(), ball(&a[..v]), s)));
    }
    if let Some(e) = (0..g.edge_count()).find(|&e| g.edges()[e] == (v, v)) {
        let (h, s) = edges_to_end(g, s, &[e]);
        return Ok(Step::Expand(ball_loop(&h, a, s)?));
    }
    if a[v] >= 2 {
        return Ok(Step::Expand(ball_split(g, a, s)?));
    }
    let inc = g.incident(v);
    let (mut e, mut f) = (inc[0], inc[1]);
    let (u, w) = (g.other_end(e, v), g.other_end(f, v));
    let n = g.vertices();
    let mut perm: Vec<usize> = (0..n).collect();
    if u != w {
        if w == last {
            core::mem::swap(&mut e, &mut f);
        }
    } else if u < v {
        place(&mut perm, 0, v, &[(u, v - 1)]);
    } else if u < last {
        place(&mut perm, d, last, &[(u, d)]);
    }
    // The prefix data moves with its vertices.
    let mut a2 = a.to_vec();
    for i in 0..d {
        a2[perm[i]] = a[i];
    }
    let (h, s) = edges_to_end(&g.permute_vertices(&perm), s, &[e, f]);
    let exp = if u != w {
        ball_type1(&h, &a2, s)?
    } else if u == last {
        ball_type4(&h, &a2, s)?
    } else {
        ball_type23(&h, &a2, s)?
    };
    Ok(Step::Expand(exp))
}

/// Certify `(H_X, M)` with `X = X(G)` (which must be odd) by max-flow,
/// evaluating `M` with the recurrence engine.
pub fn verify_orientation_nmp(g: &MultiGraph, spec: &AdmissibilitySpec) -> Result<LevelCertificate> {
    spec.validate(g)?;
    let level = build_h_x(g.x_set())?;
    let mut counter = OrientationCounter::new();
    let mut weights = BTreeMap::new();
    for &s in level.lower.iter().chain(&level.upper) {
        weights.insert(s, counter.count(g, spec, s)?);
    }
    certify_level(level.with_weights(|s| Rational::from_integer(weights[&s].into())))
}

/// Row of [`DecompositionReport`]: `ν(S) ν(X ∖ S)` against `Σ_G p_G M_G(S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionRow {
    pub s: Subset,
    pub product: Rational,
    pub graph_sum: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionReport {
    pub verdict: Verdict,
    /// The common ratio, when there is one.
    pub ratio: Option<Rational>,
    /// `P(Q)^{-2}` for the conditioning event `Q`.
    pub expected: Rational,
    pub rows: Vec<DecompositionRow>,
}

/// Check `ν(S) ν(X ∖ S) = P(Q)^{-2} Σ_G p_G M_G(S)` for every `S ⊆ X`, where
/// `G` runs over the graphs on the urns with one edge per ball, edge `i`
/// joining urns `c_i, c'_i` with weight `p_G = Π_i p_{i c_i} p_{i c'_i}`.
/// Graphs with `X(G) ≠ X` contribute nothing and are skipped.
pub fn pg_decomposition_check(model: &UrnModel, spec: &AdmissibilitySpec, x: Subset, limits: &Limits) -> Result<DecompositionReport> {
    let m = model.balls();
    let n = model.urns();
    if !x.is_subset_of(Subset::full(m)) {
        return precondition("X must be a subset of the balls");
    }
    let (nu, pq) = match spec {
        AdmissibilitySpec::Occ { d } => occ_conditioning(model, *d, limits)?,
        AdmissibilitySpec::Ball { a } => ball_conditioning(model, a, limits)?,
    };
    let last = n - 1;
    // Per ball: the endpoint pairs allowed by X, with weight p_ic p_ic'.
    let mut choices: Vec<Vec<((usize, usize), Rational)>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut list = Vec::new();
        for c in 0..n {
            for c2 in c..n {
                let at_last = c2 == last;
                if at_last != x.contains(i) || (c == last && c2 == last) {
                    continue;
                }
                let w = model.prob(i, c) * model.prob(i, c2);
                if !w.is_zero() {
                    list.push(((c, c2), w));
                }
            }
        }
        choices.push(list);
    }
    let mut sums: BTreeMap<Subset, Rational> = BTreeMap::new();
    let mut pick = vec![0usize; m];
    let mut graphs = 0u128;
    if choices.iter().all(|c| !c.is_empty()) {
        loop {
            graphs += 1;
            if graphs > limits.assignments {
                return Err(Error::BudgetExceeded {
                    needed: graphs,
                    budget: limits.assignments,
                });
            }
            let edges: Vec<(usize, usize)> = (0..m).map(|i| choices[i][pick[i]].0).collect();
            let p_g = (0..m).fold(Rational::one(), |acc, i| acc * &choices[i][pick[i]].1);
            let g = MultiGraph::new(n, edges)?;
            for (s, count) in orientation_profile(&g, spec, limits)? {
                let entry = sums.entry(s).or_insert_with(Rational::zero);
                *entry = &*entry + &p_g * Rational::from_integer(count.into());
            }
            let mut i = 0;
            while i < m {
                pick[i] += 1;
                if pick[i] < choices[i].len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == m {
                break;
            }
        }
    }
    let expected = (&pq * &pq).recip();
    let mut ratio: Option<Rational> = None;
    let mut consistent = true;
    let mut rows = Vec::new();
    for s in x.subsets() {
        let product = nu.mass_of(s) * nu.mass_of(x.difference(s));
        let graph_sum = sums.get(&s).cloned().unwrap_or_else(Rational::zero);
        if graph_sum.is_zero() {
            consistent &= product.is_zero();
        } else {
            let r = &product / &graph_sum;
            match &ratio {
                None => ratio = Some(r),
                Some(r0) => consistent &= *r0 == r,
            }
        }
        rows.push(DecompositionRow { s, product, graph_sum });
    }
    if ratio.is_none() {
        return precondition("every graph sum is zero");
    }
    let verdict = if consistent && ratio.as_ref() == Some(&expected) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(DecompositionReport {
        verdict,
        ratio,
        expected,
        rows,
    })
}

/// One `(X, Y)` block of the level-`k` NMP sum: pairs `S ⊂ ...` with
/// `S ∪ T = X`, `S ∩ T = Y`, reduced to `H_{X ∖ Y}` with weights
/// `g(U) = ν(Y ∪ U) ν(Y ∪ (X ∖ Y ∖ U))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub x: Subset,
    pub y: Subset,
    /// All block weights vanish.
    pub zero: bool,
    pub certified: bool,
    /// Smallest block contribution over all up-sets.
    pub min_value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionReport {
    pub verdict: Verdict,
    pub k: usize,
    pub blocks: Vec<Block>,
    pub upsets: u64,
    /// Up-sets where the block sum differs from the global difference.
    pub identity_failures: u64,
    /// Up-set (minimal sets) with a negative global difference, if any.
    pub negative: Option<Vec<Subset>>,
}

/// Check that for every up-set `A` of `2^[m]` the level-`k` difference
/// `ν(A, |Z| = k+1) ν(|Z| = k) − ν(A, |Z| = k) ν(|Z| = k+1)` splits into the
/// `(X, Y)` block sums, and that each block's `H_{X ∖ Y}` has a certificate.
pub fn st_xy_reduction_check(nu: &SetMeasure, k: usize, limits: &Limits) -> Result<ReductionReport> {
    let m = nu.ground();
    if m > limits.exhaustive_ground {
        return Err(Error::CapExceeded(limits.exhaustive_ground as u64));
    }
    let ground = Subset::full(m);
    struct Raw {
        x: Subset,
        y: Subset,
        lower: Vec<(Subset, Subset, Rational)>,
        zero: bool,
        certified: bool,
    }
    let mut raw = Vec::new();
    for y in ground.subsets().filter(|y| y.len() <= k) {
        let size = 2 * k + 1 - y.len();
        for x in ground.subsets().filter(|x| x.len() == size && y.is_subset_of(*x)) {
            let rest = x.difference(y);
            let weight = |u: Subset| nu.mass_of(y.union(u)) * nu.mass_of(y.union(rest.difference(u)));
            let level = build_h_x(rest)?.with_weights(weight);
            let zero = level.graph.side1().iter().all(Zero::is_zero);
            let certified = certify_level(level.clone())?.verdict() == Verdict::Pass;
            let lower = level
                .lower
                .iter()
                .zip(level.graph.side1())
                .map(|(&u, w)| (y.union(u), y.union(rest.difference(u)), w.clone()))
                .collect();
            raw.push(Raw {
                x,
                y,
                lower,
                zero,
                certified,
            });
        }
    }
    let sets: Vec<Subset> = ground.subsets().collect();
    let poset = PointPoset::new(sets.iter().map(|s| s.len() as u32).collect(), |a, b| sets[a].is_subset_of(sets[b]))?;
    let lk = nu.level_mass(k);
    let lk1 = nu.level_mass(k + 1);
    let mut mins: Vec<Option<Rational>> = vec![None; raw.len()];
    let mut identity_failures = 0u64;
    let mut negative = None;
    let upsets = poset.for_each_upset(limits.upsets, |members| {
        // `sets` lists 2^[m] in numeric order, so a set's index is its mask.
        let inside = |s: Subset| members >> (s.0 as u128) & 1 == 1;
        let a_k = nu.probability(|s| s.len() == k && inside(s));
        let a_k1 = nu.probability(|s| s.len() == k + 1 && inside(s));
        let global = a_k1 * &lk - a_k * &lk1;
        let mut total = Rational::zero();
        for (b, blk) in raw.iter().enumerate() {
            let mut value = Rational::zero();
            for (s, t, w) in &blk.lower {
                match (inside(*t), inside(*s)) {
                    (true, false) => value = value + w,
                    (false, true) => value = value - w,
                    _ => {}
                }
            }
            total = &total + &value;
            if mins[b].as_ref().is_none_or(|cur| value < *cur) {
                mins[b] = Some(value);
            }
        }
        if total != global {
            identity_failures += 1;
        }
        if global < Rational::zero() && negative.is_none() {
            let chosen: Vec<Subset> = sets.iter().copied().filter(|&s| inside(s)).collect();
            negative = Some(crate::measure::minimal_sets(&chosen));
        }
        true
    })?;
    let blocks: Vec<Block> = raw
        .into_iter()
        .zip(mins)
        .map(|(r, min)| Block {
            x: r.x,
            y: r.y,
            zero: r.zero,
            certified: r.certified,
            min_value: min.unwrap_or_else(Rational::zero),
        })
        .collect();
    let sound = blocks.iter().all(|b| b.certified && b.min_value >= Rational::zero());
    let verdict = if identity_failures == 0 && sound {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ReductionReport {
        verdict,
        k,
        blocks,
        upsets,
        identity_failures,
        negative,
    })
}
