//! Weighted bipartite normalized matching.
//!
//! A [`WeightedBipartiteGraph`] has vertex weights `f` on both sides with
//! equal totals. Three equivalent conditions are checked independently:
//!
//! - Hall: `f(U) <= f(N(U))` for every `U ⊆ V_1` (decided by max-flow),
//! - LYM on independent sets: `f(U ∩ V_1) + f(U ∩ V_2) <= f(V_1)`,
//! - a flow certificate `ω` on the edges whose incident sums equal `f`.
//!
//! The module also builds the level graphs `H_X` and checks the LYM
//! inequality of ranked posets cut out by arithmetic progressions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::flow::{Capacity, FlowNetwork};
use crate::limits::Limits;
use crate::measure::{PointPoset, SetMeasure};
use crate::negdep::Verdict;
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedBipartiteGraph {
    f1: Vec<Rational>,
    f2: Vec<Rational>,
    edges: Vec<(usize, usize)>,
}

impl WeightedBipartiteGraph {
    /// `edges` are pairs `(u, v)` with `u` on side 1 and `v` on side 2.
    pub fn new(f1: Vec<Rational>, f2: Vec<Rational>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if edges.iter().any(|&(u, v)| u >= f1.len() || v >= f2.len()) {
            return Err(Error::Precondition("edge endpoint out of range".into()));
        }
        if f1.iter().chain(&f2).any(|w| w.is_negative()) {
            return Err(Error::Precondition("negative vertex weight".into()));
        }
        Ok(WeightedBipartiteGraph { f1, f2, edges })
    }

    pub fn side1(&self) -> &[Rational] {
        &self.f1
    }

    pub fn side2(&self) -> &[Rational] {
        &self.f2
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_balanced(&self) -> bool {
        sum(&self.f1) == sum(&self.f2)
    }

    fn require_balanced(&self) -> Result<()> {
        if self.is_balanced() {
            Ok(())
        } else {
            Err(Error::Unbalanced)
        }
    }

    /// Side-2 neighbours of the side-1 vertices in `u`.
    pub fn neighbourhood(&self, u: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter(|(a, _)| u.contains(a))
            .map(|&(_, b)| b)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

fn sum(values: &[Rational]) -> Rational {
    values.iter().fold(Rational::zero(), |acc, v| acc + v)
}

fn weight_of(values: &[Rational], idx: &[usize]) -> Rational {
    idx.iter().fold(Rational::zero(), |acc, &i| acc + &values[i])
}

/// Edge weights `ω >= 0` with `Σ_{e ∋ v} ω(e) = f(v)` at every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowCertificate {
    pub omega: Vec<Rational>,
}

impl FlowCertificate {
    /// Re-check the certificate against the graph exactly.
    pub fn validate(&self, g: &WeightedBipartiteGraph) -> bool {
        if self.omega.len() != g.edges.len() || self.omega.iter().any(|w| w.is_negative()) {
            return false;
        }
        let mut s1 = vec![Rational::zero(); g.f1.len()];
        let mut s2 = vec![Rational::zero(); g.f2.len()];
        for (&(u, v), w) in g.edges.iter().zip(&self.omega) {
            s1[u] = &s1[u] + w;
            s2[v] = &s2[v] + w;
        }
        s1 == g.f1 && s2 == g.f2
    }

    /// Edgewise sum of two certificates on the same graph.
    pub fn add(&self, other: &FlowCertificate) -> FlowCertificate {
        FlowCertificate {
            omega: self.omega.iter().zip(&other.omega).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BipartiteViolation {
    /// `f(U) > f(N(U))` for side-1 set `u`.
    Hall {
        u: Vec<usize>,
        f_u: Rational,
        f_neighbours: Rational,
    },
    /// An independent set `u1 ∪ u2` heavier than `f(V_1)`.
    Independent {
        u1: Vec<usize>,
        u2: Vec<usize>,
        weight: Rational,
        side_total: Rational,
    },
    /// An antichain of a ranked poset with `Σ 1/w(x) > 1`.
    Antichain { elements: Vec<Subset>, lym_sum: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteReport {
    pub verdict: Verdict,
    pub violation: Option<BipartiteViolation>,
    pub note: Option<String>,
}

impl BipartiteReport {
    fn pass() -> Self {
        BipartiteReport {
            verdict: Verdict::Pass,
            violation: None,
            note: None,
        }
    }

    fn fail(v: BipartiteViolation) -> Self {
        BipartiteReport {
            verdict: Verdict::Fail,
            violation: Some(v),
            note: None,
        }
    }
}

/// Result of saturating the source side: either a certificate or a
/// violating side-1 set from a minimum cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certification {
    Certified(FlowCertificate),
    Violated(Vec<usize>),
}

/// Source → side 1 with capacity `f`, side 2 → sink with capacity `f`, and
/// edges with capacity `f(V_1)` (large enough to never bind).
fn saturate<C: Capacity>(f1: &[C], f2: &[C], edges: &[(usize, usize)]) -> (Option<Vec<C>>, Vec<usize>) {
    let n1 = f1.len();
    let source = n1 + f2.len();
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    let mut total = C::zero();
    for (u, c) in f1.iter().enumerate() {
        net.add_arc(source, u, c.clone());
        total = total + c.clone();
    }
    for (v, c) in f2.iter().enumerate() {
        net.add_arc(n1 + v, sink, c.clone());
    }
    let ids: Vec<_> = edges
        .iter()
        .map(|&(u, v)| net.add_arc(u, n1 + v, total.clone()))
        .collect();
    if net.max_flow(source, sink) == total {
        (Some(ids.iter().map(|&id| net.flow_on(id).clone()).collect()), Vec::new())
    } else {
        let side = net.source_side(source);
        (None, (0..n1).filter(|&u| side[u]).collect())
    }
}

/// Look for a flow certificate; on failure return the Hall-violating set
/// read off a minimum cut.
pub fn find_flow_certificate(g: &WeightedBipartiteGraph) -> Result<Certification> {
    g.require_balanced()?;
    let mut all = g.f1.clone();
    all.extend(g.f2.iter().cloned());
    let (scaled, denom) = rational::common_denominator(&all);
    let n1 = g.f1.len();
    let (flows, cut): (Option<Vec<BigInt>>, Vec<usize>) = match rational::to_small_ints(&scaled, 100) {
        Some(small) => {
            let (flows, cut) = saturate(&small[..n1], &small[n1..], &g.edges);
            (flows.map(|f| f.into_iter().map(BigInt::from).collect()), cut)
        }
        None => saturate(&scaled[..n1], &scaled[n1..], &g.edges),
    };
    Ok(match flows {
        Some(f) => Certification::Certified(FlowCertificate {
            omega: f.into_iter().map(|x| Rational::new(x, denom.clone())).collect(),
        }),
        None => Certification::Violated(cut),
    })
}

/// Weighted Hall condition `f(U) <= f(N(U))`, decided by max-flow.
pub fn check_hall_weighted(g: &WeightedBipartiteGraph) -> Result<BipartiteReport> {
    Ok(match find_flow_certificate(g)? {
        Certification::Certified(_) => BipartiteReport::pass(),
        Certification::Violated(u) => {
            let n = g.neighbourhood(&u);
            BipartiteReport::fail(BipartiteViolation::Hall {
                f_u: weight_of(&g.f1, &u),
                f_neighbours: weight_of(&g.f2, &n),
                u,
            })
        }
    })
}

/// `f(U ∩ V_1) + f(U ∩ V_2) <= f(V_1)` for every independent `U`.
///
/// The inequality only gets harder as `U` grows, so it suffices to take
/// each `U_1 ⊆ V_1` together with all of `V_2 ∖ N(U_1)`.
pub fn check_lym_independent(g: &WeightedBipartiteGraph, limits: &Limits) -> Result<BipartiteReport> {
    g.require_balanced()?;
    let n1 = g.f1.len();
    if n1 > limits.independent_side || n1 > 63 {
        return Ok(BipartiteReport {
            verdict: Verdict::Inconclusive,
            violation: None,
            note: Some(alloc::format!("side 1 has {n1} vertices, cap {}", limits.independent_side)),
        });
    }
    let side_total = sum(&g.f1);
    let mut adj = vec![0u64; g.f2.len()];
    for &(u, v) in &g.edges {
        adj[v] |= 1 << u;
    }
    for mask in Subset::full(n1).subsets() {
        let u1 = mask.to_vec();
        let u2: Vec<usize> = (0..g.f2.len()).filter(|&v| adj[v] & mask.0 == 0).collect();
        let weight = weight_of(&g.f1, &u1) + weight_of(&g.f2, &u2);
        if weight > side_total {
            return Ok(BipartiteReport::fail(BipartiteViolation::Independent {
                u1,
                u2,
                weight,
                side_total,
            }));
        }
    }
    Ok(BipartiteReport::pass())
}

/// `H_X`: `k`-subsets of an odd set `X` against its `(k+1)`-subsets,
/// `k = (|X| - 1) / 2`, joined by containment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelGraph {
    pub x: Subset,
    pub k: usize,
    pub lower: Vec<Subset>,
    pub upper: Vec<Subset>,
    pub graph: WeightedBipartiteGraph,
}

/// The skeleton of `H_X` with all weights zero.
pub fn build_h_x(x: Subset) -> Result<LevelGraph> {
    let size = x.len();
    if size % 2 == 0 {
        return Err(Error::EvenSet(size));
    }
    let k = (size - 1) / 2;
    let lower: Vec<Subset> = x.subsets_of_size(k).collect();
    let upper: Vec<Subset> = x.subsets_of_size(k + 1).collect();
    let mut edges = Vec::new();
    for (a, s) in lower.iter().enumerate() {
        for (b, t) in upper.iter().enumerate() {
            if s.is_subset_of(*t) {
                edges.push((a, b));
            }
        }
    }
    let graph = WeightedBipartiteGraph {
        f1: vec![Rational::zero(); lower.len()],
        f2: vec![Rational::zero(); upper.len()],
        edges,
    };
    Ok(LevelGraph {
        x,
        k,
        lower,
        upper,
        graph,
    })
}

impl LevelGraph {
    /// Replace the vertex weights by `weight(S)`.
    pub fn with_weights<F: FnMut(Subset) -> Rational>(mut self, mut weight: F) -> LevelGraph {
        self.graph.f1 = self.lower.iter().map(|&s| weight(s)).collect();
        self.graph.f2 = self.upper.iter().map(|&s| weight(s)).collect();
        self
    }
}

/// `H_X` weighted by `g_ν(S) = ν(S) ν(X ∖ S)`.
pub fn weight_g(nu: &SetMeasure, x: Subset) -> Result<LevelGraph> {
    Ok(build_h_x(x)?.with_weights(|s| nu.mass_of(s) * nu.mass_of(x.difference(s))))
}

/// A weighted `H_X` together with the outcome of the certificate search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelCertificate {
    pub level: LevelGraph,
    pub outcome: Certification,
}

impl LevelCertificate {
    /// Pass only if a certificate was found and re-validates exactly.
    pub fn verdict(&self) -> Verdict {
        match &self.outcome {
            Certification::Certified(c) if c.validate(&self.level.graph) => Verdict::Pass,
            _ => Verdict::Fail,
        }
    }
}

pub fn certify_level(level: LevelGraph) -> Result<LevelCertificate> {
    let outcome = find_flow_certificate(&level.graph)?;
    Ok(LevelCertificate { level, outcome })
}

/// Poset of sets `S ⊆ X_1 ⊔ … ⊔ X_n` with `|S ∩ X_i| ∈ I_i`, ordered by
/// inclusion; each `I_i` is an arithmetic progression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedLevelPoset {
    parts: Vec<usize>,
    progressions: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl RankedLevelPoset {
    pub fn new(parts: Vec<usize>, progressions: Vec<Vec<usize>>) -> Result<RankedLevelPoset> {
        if parts.len() != progressions.len() {
            return Err(Error::Precondition("one progression per part".into()));
        }
        if parts.iter().sum::<usize>() > 63 {
            return Err(Error::Precondition("ground set too large".into()));
        }
        for (size, prog) in parts.iter().zip(&progressions) {
            if prog.is_empty() || prog.iter().any(|&v| v > *size) {
                return Err(Error::Precondition("progression out of range".into()));
            }
            if prog.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Precondition("progression must increase".into()));
            }
            if prog.len() > 2 && prog.windows(2).any(|w| w[1] - w[0] != prog[1] - prog[0]) {
                return Err(Error::Precondition("not an arithmetic progression".into()));
            }
        }
        let mut offsets = Vec::with_capacity(parts.len());
        let mut acc = 0;
        for &p in &parts {
            offsets.push(acc);
            acc += p;
        }
        Ok(RankedLevelPoset {
            parts,
            progressions,
            offsets,
        })
    }

    fn part_mask(&self, i: usize) -> Subset {
        Subset(Subset::full(self.parts[i]).0 << self.offsets[i])
    }

    /// All elements, in increasing bit order.
    pub fn elements(&self) -> Vec<Subset> {
        let ground = Subset::full(self.parts.iter().sum());
        ground
            .subsets()
            .filter(|s| {
                (0..self.parts.len()).all(|i| self.progressions[i].contains(&s.intersection(self.part_mask(i)).len()))
            })
            .collect()
    }

    /// `Σ_i (|S ∩ X_i| - min I_i) / step_i`.
    pub fn rank(&self, s: Subset) -> usize {
        (0..self.parts.len())
            .map(|i| {
                let prog = &self.progressions[i];
                let c = s.intersection(self.part_mask(i)).len();
                let step = if prog.len() > 1 { prog[1] - prog[0] } else { 1 };
                (c - prog[0]) / step
            })
            .sum()
    }

    /// Elements grouped by rank.
    pub fn levels(&self) -> Vec<Vec<Subset>> {
        let mut levels: Vec<Vec<Subset>> = Vec::new();
        for s in self.elements() {
            let r = self.rank(s);
            if levels.len() <= r {
                levels.resize(r + 1, Vec::new());
            }
            levels[r].push(s);
        }
        levels
    }
}

/// LYM for a [`RankedLevelPoset`].
///
/// The primary test is the normalized matching condition between each pair
/// of consecutive ranks (uniform weights `1/|level|`, containment edges),
/// which for ranked posets is equivalent to LYM. When the poset has at most
/// `limits.antichain_elements` elements every antichain is also summed
/// directly.
pub fn check_griggs_lym(poset: &RankedLevelPoset, limits: &Limits) -> Result<BipartiteReport> {
    let levels = poset.levels();
    for r in 0..levels.len().saturating_sub(1) {
        let (lo, hi) = (&levels[r], &levels[r + 1]);
        let w1 = Rational::new(BigInt::one(), BigInt::from(lo.len()));
        let w2 = Rational::new(BigInt::one(), BigInt::from(hi.len()));
        let mut edges = Vec::new();
        for (a, s) in lo.iter().enumerate() {
            for (b, t) in hi.iter().enumerate() {
                if s.is_subset_of(*t) {
                    edges.push((a, b));
                }
            }
        }
        let g = WeightedBipartiteGraph::new(vec![w1; lo.len()], vec![w2; hi.len()], edges)?;
        let report = check_hall_weighted(&g)?;
        if let Some(BipartiteViolation::Hall { u, .. }) = report.violation {
            let down: Vec<Subset> = u.iter().map(|&a| lo[a]).collect();
            let n = g.neighbourhood(&u);
            let mut elements = down;
            elements.extend((0..hi.len()).filter(|b| !n.contains(b)).map(|b| hi[b]));
            let lym_sum = lym_sum(&levels, poset, &elements);
            return Ok(BipartiteReport::fail(BipartiteViolation::Antichain { elements, lym_sum }));
        }
    }
    let elements = poset.elements();
    if elements.len() > limits.antichain_elements {
        let mut report = BipartiteReport::pass();
        report.note = Some(alloc::format!("level check only: {} elements", elements.len()));
        return Ok(report);
    }
    let order = PointPoset::new(
        elements.iter().map(|&s| poset.rank(s) as u32).collect(),
        |a, b| elements[a].is_subset_of(elements[b]),
    )?;
    let mut found = None;
    order.for_each_upset(limits.upsets, |state| {
        let members: Vec<usize> = order.members(state).collect();
        let antichain: Vec<Subset> = members
            .iter()
            .filter(|&&a| !members.iter().any(|&b| b != a && elements[b].is_subset_of(elements[a])))
            .map(|&a| elements[a])
            .collect();
        let total = lym_sum(&levels, poset, &antichain);
        if total > Rational::one() {
            found = Some((antichain, total));
            return false;
        }
        true
    })?;
    Ok(match found {
        Some((elements, lym_sum)) => BipartiteReport::fail(BipartiteViolation::Antichain { elements, lym_sum }),
        None => BipartiteReport::pass(),
    })
}

fn lym_sum(levels: &[Vec<Subset>], poset: &RankedLevelPoset, elements: &[Subset]) -> Rational {
    elements.iter().fold(Rational::zero(), |acc, &s| {
        acc + Rational::new(BigInt::one(), BigInt::from(levels[poset.rank(s)].len()))
    })
}
