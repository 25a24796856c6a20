//! Finite measures on boxes of `ℕ^n` and on subsets of `[m]`.
//!
//! Points of a [`FiniteMeasure`] live in the box `[0, bound_1] × … × [0, bound_n]`.
//! Increasing events are [`UpSet`]s of that box, stored by their minimal
//! elements. A [`SetMeasure`] is a measure on `2^[m]`; stochastic dominance
//! between set measures is decided by an exact max-flow coupling.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::flow::{Capacity, FlowNetwork};
use crate::rational::{self, Rational};

pub type Point = Vec<u32>;

fn leq(x: &[u32], y: &[u32]) -> bool {
    x.iter().zip(y).all(|(a, b)| a <= b)
}

fn join(x: &[u32], y: &[u32]) -> Point {
    x.iter().zip(y).map(|(a, b)| *a.max(b)).collect()
}

/// Exact probability measure with finite support inside a box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMeasure {
    bound: Vec<u32>,
    mass: BTreeMap<Point, Rational>,
}

impl FiniteMeasure {
    /// Build a probability measure. Repeated points are merged and zero
    /// masses dropped; the masses must be nonnegative and sum to one.
    pub fn new<I>(bound: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, Rational)>,
    {
        let measure = Self::collect(bound, entries)?;
        if measure.total() != Rational::one() {
            return Err(Error::Precondition("masses do not sum to 1".into()));
        }
        Ok(measure)
    }

    /// Normalise nonnegative weights into a probability measure.
    pub fn normalized<I>(bound: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, Rational)>,
    {
        let mut measure = Self::collect(bound, entries)?;
        let total = measure.total();
        if total.is_zero() {
            return Err(Error::ZeroProbability);
        }
        for v in measure.mass.values_mut() {
            *v = &*v / &total;
        }
        Ok(measure)
    }

    fn collect<I>(bound: Vec<u32>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, Rational)>,
    {
        let mut mass: BTreeMap<Point, Rational> = BTreeMap::new();
        for (point, w) in entries {
            if point.len() != bound.len() || !leq(&point, &bound) {
                return Err(Error::Precondition("support point outside the box".into()));
            }
            if w.is_negative() {
                return Err(Error::Precondition("negative mass".into()));
            }
            if w.is_zero() {
                continue;
            }
            let slot = mass.entry(point).or_insert_with(Rational::zero);
            *slot = &*slot + w;
        }
        Ok(FiniteMeasure { bound, mass })
    }

    pub fn point_mass(bound: Vec<u32>, point: Point) -> Result<Self> {
        Self::new(bound, [(point, Rational::one())])
    }

    pub fn dimension(&self) -> usize {
        self.bound.len()
    }

    pub fn bound(&self) -> &[u32] {
        &self.bound
    }

    pub fn support_len(&self) -> usize {
        self.mass.len()
    }

    /// Support points with their masses, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Point, &Rational)> {
        self.mass.iter()
    }

    pub fn mass_at(&self, point: &[u32]) -> Rational {
        self.mass.get(point).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.mass.values().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn probability<F: Fn(&[u32]) -> bool>(&self, event: F) -> Rational {
        self.mass
            .iter()
            .filter(|(p, _)| event(p))
            .fold(Rational::zero(), |acc, (_, v)| acc + v)
    }

    pub fn probability_of(&self, event: &UpSet) -> Rational {
        self.probability(|x| event.contains(x))
    }

    /// Condition on `x_i = a_i` for every `(i, a_i)` in `fixed`. The fixed
    /// coordinates stay in the point (the dimension does not change).
    pub fn condition(&self, fixed: &[(usize, u32)]) -> Result<FiniteMeasure> {
        if fixed.iter().any(|&(i, _)| i >= self.dimension()) {
            return Err(Error::Precondition("conditioning coordinate out of range".into()));
        }
        let kept = self
            .mass
            .iter()
            .filter(|(p, _)| fixed.iter().all(|&(i, a)| p[i] == a))
            .map(|(p, v)| (p.clone(), v.clone()));
        FiniteMeasure::normalized(self.bound.clone(), kept)
    }

    /// Push the measure forward along `map` into a box of the given bound.
    pub fn pushforward<F: Fn(&[u32]) -> Point>(&self, bound: Vec<u32>, map: F) -> Result<FiniteMeasure> {
        FiniteMeasure::new(bound, self.mass.iter().map(|(p, v)| (map(p), v.clone())))
    }

    /// Whether every coordinate takes only the values 0 and 1.
    pub fn is_binary(&self) -> bool {
        self.mass.keys().all(|p| p.iter().all(|&c| c <= 1))
    }

    /// Masses scaled to integers over a common denominator `T`, in support order.
    pub fn integer_masses(&self) -> (Vec<BigInt>, BigInt) {
        let values: Vec<Rational> = self.mass.values().cloned().collect();
        rational::common_denominator(&values)
    }

    /// Coordinates that are not constant on the support.
    pub fn free_coordinates(&self) -> Vec<usize> {
        let first = match self.mass.keys().next() {
            Some(p) => p.clone(),
            None => return Vec::new(),
        };
        (0..self.dimension())
            .filter(|&i| self.mass.keys().any(|p| p[i] != first[i]))
            .collect()
    }
}

/// An increasing subset of a box, stored as its antichain of minimal elements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct UpSet {
    bound: Vec<u32>,
    minimal: Vec<Point>,
}

impl UpSet {
    /// Up-closure of `generators` inside the box.
    pub fn new(bound: Vec<u32>, generators: Vec<Point>) -> Result<UpSet> {
        if generators
            .iter()
            .any(|g| g.len() != bound.len() || !leq(g, &bound))
        {
            return Err(Error::Precondition("generator outside the box".into()));
        }
        Ok(UpSet {
            minimal: minimal_points(generators),
            bound,
        })
    }

    pub fn whole(bound: Vec<u32>) -> UpSet {
        let zero = vec![0; bound.len()];
        UpSet {
            bound,
            minimal: vec![zero],
        }
    }

    pub fn empty(bound: Vec<u32>) -> UpSet {
        UpSet {
            bound,
            minimal: Vec::new(),
        }
    }

    /// `{x : x_j >= t}`.
    pub fn threshold(bound: Vec<u32>, j: usize, t: u32) -> UpSet {
        if t > bound[j] {
            return UpSet::empty(bound);
        }
        let mut g = vec![0; bound.len()];
        g[j] = t;
        UpSet {
            bound,
            minimal: vec![g],
        }
    }

    pub fn bound(&self) -> &[u32] {
        &self.bound
    }

    pub fn minimal_elements(&self) -> &[Point] {
        &self.minimal
    }

    pub fn is_empty(&self) -> bool {
        self.minimal.is_empty()
    }

    pub fn contains(&self, x: &[u32]) -> bool {
        self.minimal.iter().any(|g| leq(g, x))
    }

    pub fn intersection(&self, other: &UpSet) -> UpSet {
        let mut gens = Vec::new();
        for a in &self.minimal {
            for b in &other.minimal {
                gens.push(join(a, b));
            }
        }
        UpSet {
            bound: self.bound.clone(),
            minimal: minimal_points(gens),
        }
    }

    pub fn union(&self, other: &UpSet) -> UpSet {
        let gens = self.minimal.iter().chain(&other.minimal).cloned().collect();
        UpSet {
            bound: self.bound.clone(),
            minimal: minimal_points(gens),
        }
    }

    /// Whether coordinate `j` affects the event: some point inside and some
    /// point outside differ only in coordinate `j`.
    pub fn affects(&self, j: usize) -> bool {
        // x ∉ A, x + e_j ∈ A happens iff some minimal g has g - e_j ∉ A.
        self.minimal.iter().any(|g| {
            if g[j] == 0 {
                return false;
            }
            let mut below = g.clone();
            below[j] -= 1;
            !self.contains(&below)
        })
    }

    /// Every box point in the event, lexicographically.
    pub fn points(&self) -> Vec<Point> {
        box_points(&self.bound)
            .into_iter()
            .filter(|x| self.contains(x))
            .collect()
    }
}

/// All points of the box, lexicographically.
pub fn box_points(bound: &[u32]) -> Vec<Point> {
    let mut out = vec![Vec::new()];
    for &b in bound {
        let mut next = Vec::with_capacity(out.len() * (b as usize + 1));
        for p in &out {
            for v in 0..=b {
                let mut q: Point = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn minimal_points(mut points: Vec<Point>) -> Vec<Point> {
    points.sort();
    points.dedup();
    let keep: Vec<bool> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            !points
                .iter()
                .enumerate()
                .any(|(k, q)| k != i && leq(q, p))
        })
        .collect();
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect()
}

/// No coordinate affects both events.
pub fn disjoint_dependence(a: &UpSet, b: &UpSet) -> bool {
    (0..a.bound.len()).all(|j| !(a.affects(j) && b.affects(j)))
}

pub fn negatively_correlated(mu: &FiniteMeasure, a: &UpSet, b: &UpSet) -> bool {
    mu.probability_of(&a.intersection(b)) <= mu.probability_of(a) * mu.probability_of(b)
}

/// First thresholds `(s, t)` with `P(x_i >= s, x_j >= t) > P(x_i >= s) P(x_j >= t)`.
pub fn nc_violation(mu: &FiniteMeasure, i: usize, j: usize) -> Option<(u32, u32)> {
    for s in 1..=mu.bound[i] {
        let ps = mu.probability(|x| x[i] >= s);
        for t in 1..=mu.bound[j] {
            let both = mu.probability(|x| x[i] >= s && x[j] >= t);
            let pt = mu.probability(|x| x[j] >= t);
            if both > &ps * &pt {
                return Some((s, t));
            }
        }
    }
    None
}

pub fn rv_negatively_correlated(mu: &FiniteMeasure, i: usize, j: usize) -> bool {
    nc_violation(mu, i, j).is_none()
}

/// Nonnegative weights `W_i` reweighting a 0/1 measure by `∏ W_i^{x_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalField {
    weights: Vec<Rational>,
}

impl ExternalField {
    pub fn new(weights: Vec<Rational>) -> Result<ExternalField> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::Precondition("negative field weight".into()));
        }
        Ok(ExternalField { weights })
    }

    pub fn ones(n: usize) -> ExternalField {
        ExternalField {
            weights: vec![Rational::one(); n],
        }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }
}

pub fn impose_external_field(mu: &FiniteMeasure, field: &ExternalField) -> Result<FiniteMeasure> {
    if field.weights.len() != mu.dimension() || !mu.is_binary() {
        return Err(Error::Precondition("field needs a 0/1 measure of the same dimension".into()));
    }
    let reweighted = mu.iter().map(|(p, v)| {
        let w = p
            .iter()
            .zip(&field.weights)
            .filter(|(c, _)| **c == 1)
            .fold(v.clone(), |acc, (_, w)| acc * w);
        (p.clone(), w)
    });
    FiniteMeasure::normalized(mu.bound.clone(), reweighted)
}

/// Exact probability measure on the subsets of `[m]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetMeasure {
    ground: usize,
    mass: BTreeMap<Subset, Rational>,
}

impl SetMeasure {
    pub fn new<I>(ground: usize, entries: I) -> Result<SetMeasure>
    where
        I: IntoIterator<Item = (Subset, Rational)>,
    {
        let measure = Self::collect(ground, entries)?;
        if measure.total() != Rational::one() {
            return Err(Error::Precondition("masses do not sum to 1".into()));
        }
        Ok(measure)
    }

    pub fn normalized<I>(ground: usize, entries: I) -> Result<SetMeasure>
    where
        I: IntoIterator<Item = (Subset, Rational)>,
    {
        let mut measure = Self::collect(ground, entries)?;
        let total = measure.total();
        if total.is_zero() {
            return Err(Error::ZeroProbability);
        }
        for v in measure.mass.values_mut() {
            *v = &*v / &total;
        }
        Ok(measure)
    }

    fn collect<I>(ground: usize, entries: I) -> Result<SetMeasure>
    where
        I: IntoIterator<Item = (Subset, Rational)>,
    {
        if ground > 63 {
            return Err(Error::Precondition("ground set too large".into()));
        }
        let full = Subset::full(ground);
        let mut mass: BTreeMap<Subset, Rational> = BTreeMap::new();
        for (s, w) in entries {
            if !s.is_subset_of(full) {
                return Err(Error::Precondition("set outside the ground set".into()));
            }
            if w.is_negative() {
                return Err(Error::Precondition("negative mass".into()));
            }
            if w.is_zero() {
                continue;
            }
            let slot = mass.entry(s).or_insert_with(Rational::zero);
            *slot = &*slot + w;
        }
        Ok(SetMeasure { ground, mass })
    }

    /// Uniform measure on all subsets of `[m]`.
    pub fn uniform(ground: usize) -> SetMeasure {
        let w = Rational::new(BigInt::one(), BigInt::one() << ground);
        SetMeasure {
            ground,
            mass: Subset::full(ground).subsets().map(|s| (s, w.clone())).collect(),
        }
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Subset, &Rational)> {
        self.mass.iter()
    }

    pub fn mass_of(&self, s: Subset) -> Rational {
        self.mass.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn total(&self) -> Rational {
        self.mass.values().fold(Rational::zero(), |acc, v| acc + v)
    }

    pub fn probability<F: Fn(Subset) -> bool>(&self, event: F) -> Rational {
        self.mass
            .iter()
            .filter(|(s, _)| event(**s))
            .fold(Rational::zero(), |acc, (_, v)| acc + v)
    }

    /// Mass of the up-set generated by `minimal`.
    pub fn upset_probability(&self, minimal: &[Subset]) -> Rational {
        self.probability(|s| in_upset(minimal, s))
    }

    pub fn level_mass(&self, k: usize) -> Rational {
        self.probability(|s| s.len() == k)
    }

    /// The measure conditioned on `|Z| = k`.
    pub fn level(&self, k: usize) -> Result<SetMeasure> {
        SetMeasure::normalized(
            self.ground,
            self.mass
                .iter()
                .filter(|(s, _)| s.len() == k)
                .map(|(s, v)| (*s, v.clone())),
        )
    }

    /// The measure conditioned on `Z ∩ on = values` (`values ⊆ on`).
    pub fn condition(&self, on: Subset, values: Subset) -> Result<SetMeasure> {
        SetMeasure::normalized(
            self.ground,
            self.mass
                .iter()
                .filter(|(s, _)| s.intersection(on) == values)
                .map(|(s, v)| (*s, v.clone())),
        )
    }
}

pub fn in_upset(minimal: &[Subset], s: Subset) -> bool {
    minimal.iter().any(|g| g.is_subset_of(s))
}

/// Minimal elements of a family of sets, sorted.
pub fn minimal_sets(sets: &[Subset]) -> Vec<Subset> {
    let mut out: Vec<Subset> = sets
        .iter()
        .copied()
        .filter(|s| !sets.iter().any(|t| t != s && t.is_subset_of(*s)))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// One edge of an upward coupling: `mass` moves from `from` to `to ⊇ from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingEdge {
    pub from: Subset,
    pub to: Subset,
    pub mass: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dominance {
    /// `hi` dominates `lo`, certified by an upward coupling of `lo` into `hi`.
    Holds(Vec<CouplingEdge>),
    /// The up-set generated by `upset` has `lo` mass above its `hi` mass.
    Fails {
        upset: Vec<Subset>,
        hi: Rational,
        lo: Rational,
    },
}

impl Dominance {
    pub fn holds(&self) -> bool {
        matches!(self, Dominance::Holds(_))
    }
}

/// Decide whether `hi(A) >= lo(A)` for every increasing `A ⊆ 2^[m]`.
///
/// The test looks for a coupling moving each `lo` set onto a superset
/// carrying `hi` mass. When none exists the minimum cut names a violating
/// up-set.
pub fn dominance(hi: &SetMeasure, lo: &SetMeasure) -> Dominance {
    let lo_sets: Vec<Subset> = lo.mass.keys().copied().collect();
    let hi_sets: Vec<Subset> = hi.mass.keys().copied().collect();
    let mut values: Vec<Rational> = lo.mass.values().cloned().collect();
    values.extend(hi.mass.values().cloned());
    let (scaled, denom) = rational::common_denominator(&values);
    let (lo_caps, hi_caps) = scaled.split_at(lo_sets.len());
    let (flows, reachable) = match rational::to_small_ints(&scaled, 100) {
        Some(small) => {
            let (l, h) = small.split_at(lo_sets.len());
            let (f, r) = coupling_flow(&lo_sets, l, &hi_sets, h);
            (f.into_iter().map(|(a, b, v)| (a, b, BigInt::from(v))).collect(), r)
        }
        None => coupling_flow(&lo_sets, lo_caps, &hi_sets, hi_caps),
    };
    match reachable {
        None => Dominance::Holds(
            flows
                .into_iter()
                .map(|(from, to, v)| CouplingEdge {
                    from,
                    to,
                    mass: Rational::new(v, denom.clone()),
                })
                .collect(),
        ),
        Some(seeds) => {
            let upset = minimal_sets(&seeds);
            Dominance::Fails {
                hi: hi.upset_probability(&upset),
                lo: lo.upset_probability(&upset),
                upset,
            }
        }
    }
}

type FlowResult<C> = (Vec<(Subset, Subset, C)>, Option<Vec<Subset>>);

fn coupling_flow<C: Capacity>(lo: &[Subset], lo_caps: &[C], hi: &[Subset], hi_caps: &[C]) -> FlowResult<C> {
    let source = lo.len() + hi.len();
    let sink = source + 1;
    let mut net = FlowNetwork::new(sink + 1);
    let mut need = C::zero();
    for (i, c) in lo_caps.iter().enumerate() {
        net.add_arc(source, i, c.clone());
        need = need + c.clone();
    }
    for (k, c) in hi_caps.iter().enumerate() {
        net.add_arc(lo.len() + k, sink, c.clone());
    }
    let mut inner = Vec::new();
    for (i, s) in lo.iter().enumerate() {
        for (k, t) in hi.iter().enumerate() {
            if s.is_subset_of(*t) {
                inner.push((i, k, net.add_arc(i, lo.len() + k, need.clone())));
            }
        }
    }
    let value = net.max_flow(source, sink);
    if value == need {
        let flows = inner
            .into_iter()
            .filter(|(_, _, id)| *net.flow_on(*id) > C::zero())
            .map(|(i, k, id)| (lo[i], hi[k], net.flow_on(id).clone()))
            .collect();
        (flows, None)
    } else {
        let side = net.source_side(source);
        let seeds = (0..lo.len()).filter(|&i| side[i]).map(|i| lo[i]).collect();
        (Vec::new(), Some(seeds))
    }
}

pub fn stochastically_dominates(hi: &SetMeasure, lo: &SetMeasure) -> bool {
    dominance(hi, lo).holds()
}

/// Dominance by exhaustive enumeration of the up-sets of `2^[m]`; returns a
/// violating up-set if there is one.
pub fn dominance_exhaustive(hi: &SetMeasure, lo: &SetMeasure, ground_cap: usize, cap: u64) -> Result<Option<Vec<Subset>>> {
    let m = hi.ground.max(lo.ground);
    if m > ground_cap {
        return Err(Error::CapExceeded(ground_cap as u64));
    }
    let sets: Vec<Subset> = Subset::full(m).subsets().collect();
    let poset = PointPoset::new(
        sets.iter().map(|s| s.len() as u32).collect(),
        |a, b| sets[a].is_subset_of(sets[b]),
    )?;
    let mut found = None;
    poset.for_each_upset(cap, |members| {
        let chosen: Vec<Subset> = poset.members(members).map(|i| sets[i]).collect();
        let hi_mass = hi.probability(|s| chosen.contains(&s));
        let lo_mass = lo.probability(|s| chosen.contains(&s));
        if lo_mass > hi_mass {
            found = Some(minimal_sets(&chosen));
            false
        } else {
            true
        }
    })?;
    Ok(found)
}

/// A finite poset of at most 128 elements, prepared for up-set enumeration.
///
/// Elements are visited from the top down so that an element may join the
/// up-set only once everything above it has.
#[derive(Debug, Clone)]
pub struct PointPoset {
    order: Vec<usize>,
    above: Vec<u128>,
    len: usize,
}

impl PointPoset {
    /// `rank` must be strictly increasing along the order (e.g. a coordinate
    /// sum); `le(a, b)` is the order relation.
    pub fn new<F: Fn(usize, usize) -> bool>(rank: Vec<u32>, le: F) -> Result<PointPoset> {
        let len = rank.len();
        if len > 128 {
            return Err(Error::Precondition("poset has more than 128 elements".into()));
        }
        let mut order: Vec<usize> = (0..len).collect();
        order.sort_by(|&a, &b| rank[b].cmp(&rank[a]).then(a.cmp(&b)));
        let mut above = vec![0u128; len];
        for a in 0..len {
            for b in 0..len {
                if a != b && le(a, b) {
                    above[a] |= 1u128 << b;
                }
            }
        }
        Ok(PointPoset { order, above, len })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Element indices `v` such that taking `v` forces taking `u` (`v < u`).
    pub fn strictly_above(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.above[v];
        (0..self.len).filter(move |u| mask >> u & 1 == 1)
    }

    pub fn members(&self, mask: u128) -> impl Iterator<Item = usize> {
        (0..128usize).filter(move |i| mask >> i & 1 == 1)
    }

    /// Call `visit` on every up-set (as a membership bitmask) until it
    /// returns `false`. Errors once more than `cap` up-sets would be visited.
    pub fn for_each_upset<F: FnMut(u128) -> bool>(&self, cap: u64, mut visit: F) -> Result<u64> {
        let mut count = 0u64;
        self.descend(0, 0, cap, &mut count, &mut visit)?;
        Ok(count)
    }

    fn descend<F: FnMut(u128) -> bool>(&self, depth: usize, state: u128, cap: u64, count: &mut u64, visit: &mut F) -> Result<bool> {
        if depth == self.len {
            *count += 1;
            if *count > cap {
                return Err(Error::CapExceeded(cap));
            }
            return Ok(visit(state));
        }
        let v = self.order[depth];
        if !self.descend(depth + 1, state, cap, count, visit)? {
            return Ok(false);
        }
        if self.above[v] & !state == 0 {
            return self.descend(depth + 1, state | 1u128 << v, cap, count, visit);
        }
        Ok(true)
    }
}

/// Up-set enumeration over the support points of a measure (or any point
/// list), ordered coordinatewise.
pub fn point_poset(points: &[Point]) -> Result<PointPoset> {
    PointPoset::new(
        points.iter().map(|p| p.iter().sum()).collect(),
        |a, b| leq(&points[a], &points[b]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn occ_m2n2() -> FiniteMeasure {
        FiniteMeasure::new(
            vec![1, 1],
            [
                (vec![1, 1], ratio(1, 2)),
                (vec![1, 0], ratio(1, 4)),
                (vec![0, 1], ratio(1, 4)),
            ],
        )
        .unwrap()
    }

    fn set(items: &[usize]) -> Subset {
        Subset::from_indices(items.iter().map(|i| i - 1))
    }

    #[test]
    fn conditioning_examples() {
        let mu = occ_m2n2();
        assert_eq!(mu.condition(&[]).unwrap(), mu);
        let c = mu.condition(&[(0, 1)]).unwrap();
        assert_eq!(c.mass_at(&[1, 1]), ratio(2, 3));
        assert_eq!(c.mass_at(&[1, 0]), ratio(1, 3));
        let c = mu.condition(&[(0, 0)]).unwrap();
        assert_eq!(c.mass_at(&[0, 1]), ratio(1, 1));
        assert_eq!(mu.condition(&[(0, 0), (1, 0)]), Err(Error::ZeroProbability));
    }

    #[test]
    fn affects_examples() {
        let b = vec![1, 1];
        let whole = UpSet::whole(b.clone());
        assert!(!whole.affects(0) && !whole.affects(1));
        let first = UpSet::threshold(b.clone(), 0, 1);
        assert!(first.affects(0) && !first.affects(1));
        let top = UpSet::new(b.clone(), vec![vec![1, 1]]).unwrap();
        assert!(top.affects(0) && top.affects(1));
        let second = UpSet::threshold(b.clone(), 1, 1);
        assert!(disjoint_dependence(&first, &second));
        assert!(!disjoint_dependence(&top, &top));
        assert!(disjoint_dependence(&whole, &top));
    }

    #[test]
    fn affects_matches_neighbour_scan() {
        let bound = vec![2, 1, 2];
        let pts = box_points(&bound);
        for g1 in &pts {
            for g2 in &pts {
                let a = UpSet::new(bound.clone(), vec![g1.clone(), g2.clone()]).unwrap();
                for j in 0..3 {
                    let scan = pts.iter().any(|x| {
                        if x[j] == bound[j] {
                            return false;
                        }
                        let mut y = x.clone();
                        y[j] += 1;
                        !a.contains(x) && a.contains(&y)
                    });
                    assert_eq!(a.affects(j), scan);
                }
            }
        }
    }

    #[test]
    fn correlation_examples() {
        let mu = occ_m2n2();
        let a = UpSet::threshold(vec![1, 1], 0, 1);
        let b = UpSet::threshold(vec![1, 1], 1, 1);
        assert_eq!(mu.probability_of(&a.intersection(&b)), ratio(1, 2));
        assert!(negatively_correlated(&mu, &a, &b));
        assert!(rv_negatively_correlated(&mu, 0, 1));
        let pos = FiniteMeasure::new(vec![1, 1], [(vec![1, 1], ratio(1, 2)), (vec![0, 0], ratio(1, 2))]).unwrap();
        assert_eq!(nc_violation(&pos, 0, 1), Some((1, 1)));
    }

    #[test]
    fn upset_intersection_and_union_agree_with_membership() {
        let bound = vec![2, 2];
        let a = UpSet::new(bound.clone(), vec![vec![2, 0], vec![0, 1]]).unwrap();
        let b = UpSet::new(bound.clone(), vec![vec![1, 1]]).unwrap();
        let i = a.intersection(&b);
        let u = a.union(&b);
        for x in box_points(&bound) {
            assert_eq!(i.contains(&x), a.contains(&x) && b.contains(&x));
            assert_eq!(u.contains(&x), a.contains(&x) || b.contains(&x));
        }
        assert_eq!(a.minimal_elements(), &[vec![0, 1], vec![2, 0]]);
    }

    #[test]
    fn external_field() {
        let half = FiniteMeasure::new(
            vec![1, 1],
            box_points(&[1, 1]).into_iter().map(|p| (p, ratio(1, 4))),
        )
        .unwrap();
        let id = impose_external_field(&half, &ExternalField::ones(2)).unwrap();
        assert_eq!(id, half);
        let f = ExternalField::new(vec![ratio(2, 1), ratio(1, 1)]).unwrap();
        let tilted = impose_external_field(&half, &f).unwrap();
        assert_eq!(tilted.probability(|x| x[0] == 1), ratio(2, 3));
        let mu = occ_m2n2();
        let zero = ExternalField::new(vec![ratio(0, 1), ratio(1, 1)]).unwrap();
        assert_eq!(impose_external_field(&mu, &zero).unwrap(), mu.condition(&[(0, 0)]).unwrap());
    }

    #[test]
    fn dominance_examples() {
        let nu = SetMeasure::new(2, [(set(&[]), ratio(1, 3)), (set(&[1]), ratio(1, 3)), (set(&[2]), ratio(1, 3))]).unwrap();
        assert!(stochastically_dominates(&nu, &nu));
        let bottom = SetMeasure::new(2, [(set(&[]), ratio(1, 1))]).unwrap();
        assert!(stochastically_dominates(&nu, &bottom));
        let one = SetMeasure::new(2, [(set(&[1]), ratio(1, 1))]).unwrap();
        let two = SetMeasure::new(2, [(set(&[2]), ratio(1, 1))]).unwrap();
        match dominance(&one, &two) {
            Dominance::Fails { upset, hi, lo } => {
                assert_eq!(upset, vec![set(&[2])]);
                assert_eq!((hi, lo), (ratio(0, 1), ratio(1, 1)));
            }
            Dominance::Holds(_) => panic!("incomparable point masses"),
        }
        assert!(!stochastically_dominates(&two, &one));
    }

    #[test]
    fn coupling_is_a_valid_transport() {
        let lo = SetMeasure::new(3, [(set(&[]), ratio(1, 2)), (set(&[1]), ratio(1, 2))]).unwrap();
        let hi = SetMeasure::new(3, [(set(&[1]), ratio(1, 3)), (set(&[1, 2]), ratio(1, 3)), (set(&[3]), ratio(1, 3))]).unwrap();
        let Dominance::Holds(edges) = dominance(&hi, &lo) else {
            panic!("expected dominance")
        };
        for e in &edges {
            assert!(e.from.is_subset_of(e.to));
        }
        for (s, w) in lo.iter() {
            let out: Rational = edges.iter().filter(|e| e.from == *s).map(|e| e.mass.clone()).sum();
            assert_eq!(&out, w);
        }
        for (t, w) in hi.iter() {
            let inn: Rational = edges.iter().filter(|e| e.to == *t).map(|e| e.mass.clone()).sum();
            assert_eq!(&inn, w);
        }
    }

    #[test]
    fn upset_counts_match_dedekind_numbers() {
        for (m, expected) in [(0, 2u64), (1, 3), (2, 6), (3, 20), (4, 168)] {
            let sets: Vec<Subset> = Subset::full(m).subsets().collect();
            let poset = PointPoset::new(sets.iter().map(|s| s.len() as u32).collect(), |a, b| {
                sets[a].is_subset_of(sets[b])
            })
            .unwrap();
            assert_eq!(poset.for_each_upset(u64::MAX, |_| true).unwrap(), expected);
        }
    }

    #[test]
    fn upset_cap_is_enforced() {
        let sets: Vec<Subset> = Subset::full(3).subsets().collect();
        let poset = PointPoset::new(sets.iter().map(|s| s.len() as u32).collect(), |a, b| {
            sets[a].is_subset_of(sets[b])
        })
        .unwrap();
        assert_eq!(poset.for_each_upset(10, |_| true), Err(Error::CapExceeded(10)));
    }
}
