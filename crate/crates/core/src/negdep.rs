//! Negative-dependence property checkers.
//!
//! Every checker returns a [`PropertyReport`]. A failing report always
//! carries a [`Witness`] that [`Witness::reverify`] can replay against the
//! base definitions, independently of the search that produced it.
//!
//! The event-quantified checks (NA, FM and their conditional closures) work
//! with integer masses over a common denominator `T`, so that conditioning
//! and correlation tests never divide.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::flow::{max_weight_closure, Capacity};
use crate::limits::Limits;
use crate::measure::{
    disjoint_dependence, dominance, impose_external_field, point_poset, Dominance, ExternalField, FiniteMeasure,
    Point, SetMeasure, UpSet,
};
use crate::rational::{self, binomial, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Property {
    Na,
    Nc,
    Cna,
    Cnc,
    Nmp,
    Ulc,
    Rayleigh,
    Scp,
    Fm,
    Cfm,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Na => "NA",
            Property::Nc => "NC",
            Property::Cna => "CNA",
            Property::Cnc => "CNC",
            Property::Nmp => "NMP",
            Property::Ulc => "ULC",
            Property::Rayleigh => "Rayleigh",
            Property::Scp => "SCP",
            Property::Fm => "FM",
            Property::Cfm => "CFM",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    /// No violation among the sampled cases; not a proof.
    PassSampled,
    Inconclusive,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::PassSampled => "pass-sampled",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Fail => "fail",
        }
    }

    pub fn is_pass(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::PassSampled)
    }

    /// Fail wins over inconclusive, which wins over pass.
    pub fn merge(self, other: Verdict) -> Verdict {
        self.max(other)
    }
}

/// A concrete violation. Conditionings are lists of `(coordinate, value)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// `μ(A ∩ B) > μ(A) μ(B)` for increasing `A ⊥ B` under the conditioning.
    Correlation {
        conditioning: Vec<(usize, u32)>,
        a: UpSet,
        b: UpSet,
        p_ab: Rational,
        p_a: Rational,
        p_b: Rational,
    },
    /// `P(x_i >= s, x_j >= t) > P(x_i >= s) P(x_j >= t)` under the conditioning
    /// (and under `field`, when present).
    Thresholds {
        conditioning: Vec<(usize, u32)>,
        field: Option<ExternalField>,
        i: usize,
        j: usize,
        s: u32,
        t: u32,
        p_both: Rational,
        p_i: Rational,
        p_j: Rational,
    },
    /// Rank sequence with an internal zero at `j`, or a broken inequality at `j`.
    Rank { j: usize, ranks: Vec<Rational> },
    /// Level `k + 1` fails to dominate level `k` on the up-set `upset`.
    Level {
        k: usize,
        upset: Vec<Subset>,
        upper: Rational,
        lower: Rational,
    },
    /// Conditioning `Z ∩ on = b` fails to dominate `Z ∩ on = a` (`a ⊂ b`).
    Covering {
        on: Subset,
        a: Subset,
        b: Subset,
        upset: Vec<Subset>,
        given_a: Rational,
        given_b: Rational,
    },
    /// Nontrivial increasing `A` negatively correlated with every
    /// non-constant coordinate indicator.
    FederMihail { conditioning: Vec<(usize, u32)>, a: UpSet },
}

/// What a witness is replayed against.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Measure(&'a FiniteMeasure),
    Sets(&'a SetMeasure),
}

impl Witness {
    /// Recompute the violation from the base definitions.
    pub fn reverify(&self, target: Target<'_>) -> bool {
        match (self, target) {
            (Witness::Correlation { conditioning, a, b, .. }, Target::Measure(mu)) => {
                let Ok(mu) = mu.condition(conditioning) else { return false };
                if a.bound() != mu.bound() || b.bound() != mu.bound() || !disjoint_dependence(a, b) {
                    return false;
                }
                mu.probability_of(&a.intersection(b)) > mu.probability_of(a) * mu.probability_of(b)
            }
            (Witness::Thresholds { conditioning, field, i, j, s, t, .. }, Target::Measure(mu)) => {
                let Ok(mut mu) = mu.condition(conditioning) else { return false };
                if let Some(w) = field {
                    match impose_external_field(&mu, w) {
                        Ok(tilted) => mu = tilted,
                        Err(_) => return false,
                    }
                }
                if i == j || *i >= mu.dimension() || *j >= mu.dimension() {
                    return false;
                }
                let both = mu.probability(|x| x[*i] >= *s && x[*j] >= *t);
                both > mu.probability(|x| x[*i] >= *s) * mu.probability(|x| x[*j] >= *t)
            }
            (Witness::Rank { j, .. }, Target::Measure(mu)) => match rank_sequence(mu) {
                Ok(r) => r.violation() == Some(*j),
                Err(_) => false,
            },
            (Witness::Level { k, upset, .. }, Target::Sets(nu)) => {
                match (nu.level(*k), nu.level(*k + 1)) {
                    (Ok(lower), Ok(upper)) => lower.upset_probability(upset) > upper.upset_probability(upset),
                    _ => false,
                }
            }
            (Witness::Covering { on, a, b, upset, .. }, Target::Sets(nu)) => {
                if !a.is_subset_of(*b) || a == b || !b.is_subset_of(*on) {
                    return false;
                }
                match (nu.condition(*on, *a), nu.condition(*on, *b)) {
                    (Ok(ga), Ok(gb)) => ga.upset_probability(upset) > gb.upset_probability(upset),
                    _ => false,
                }
            }
            (Witness::FederMihail { conditioning, a }, Target::Measure(mu)) => {
                let Ok(mu) = mu.condition(conditioning) else { return false };
                if a.bound() != mu.bound() || !mu.is_binary() {
                    return false;
                }
                let pa = mu.probability_of(a);
                if pa.is_zero() || pa.is_one() {
                    return false;
                }
                let free = mu.free_coordinates();
                free.iter().all(|&j| {
                    let joint = mu.probability(|x| x[j] == 1 && a.contains(x));
                    joint < &pa * mu.probability(|x| x[j] == 1)
                })
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub note: Option<String>,
}

impl PropertyReport {
    fn pass(property: Property) -> Self {
        PropertyReport {
            property,
            verdict: Verdict::Pass,
            witness: None,
            note: None,
        }
    }

    fn fail(property: Property, witness: Witness) -> Self {
        PropertyReport {
            property,
            verdict: Verdict::Fail,
            witness: Some(witness),
            note: None,
        }
    }

    fn inconclusive(property: Property, note: String) -> Self {
        PropertyReport {
            property,
            verdict: Verdict::Inconclusive,
            witness: None,
            note: Some(note),
        }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

// ---------------------------------------------------------------------------
// integer plumbing

trait Int: Capacity + Signed + Mul<Output = Self> {}

impl<T: Capacity + Signed + Mul<Output = T>> Int for T {}

/// Support points of a measure with integer masses and their total.
struct Scaled {
    points: Vec<Point>,
    masses: Vec<BigInt>,
    total: BigInt,
}

impl Scaled {
    fn new(mu: &FiniteMeasure) -> Scaled {
        let (masses, denom) = mu.integer_masses();
        let total = masses.iter().sum::<BigInt>();
        debug_assert_eq!(total, denom);
        Scaled {
            points: mu.iter().map(|(p, _)| p.clone()).collect(),
            masses,
            total,
        }
    }

    /// Run `f` on `i128` masses when products of two masses stay far from
    /// overflow, and on `BigInt` otherwise.
    fn dispatch<R>(&self, small: impl FnOnce(&[Point], &[i128], i128) -> R, big: impl FnOnce(&[Point], &[BigInt], BigInt) -> R) -> R {
        let mut all = self.masses.clone();
        all.push(self.total.clone());
        match rational::to_small_ints(&all, 48) {
            Some(mut v) => {
                let t = v.pop().unwrap();
                small(&self.points, &v, t)
            }
            None => big(&self.points, &self.masses, self.total.clone()),
        }
    }
}

fn project(p: &[u32], coords: &[usize]) -> Point {
    coords.iter().map(|&c| p[c]).collect()
}

/// Distinct projections (sorted) and the index of each point's projection.
fn projections(points: &[Point], coords: &[usize]) -> (Vec<Point>, Vec<usize>) {
    let proj: Vec<Point> = points.iter().map(|p| project(p, coords)).collect();
    let mut distinct = proj.clone();
    distinct.sort();
    distinct.dedup();
    let index = proj
        .iter()
        .map(|q| distinct.binary_search(q).unwrap())
        .collect();
    (distinct, index)
}

fn above_lists(points: &[Point]) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|a| {
            (0..points.len())
                .filter(|&b| b != a && points[a].iter().zip(&points[b]).all(|(x, y)| x <= y))
                .collect()
        })
        .collect()
}

fn embed(bound: &[u32], coords: &[usize], values: &[Point]) -> UpSet {
    let gens = values
        .iter()
        .map(|v| {
            let mut g = vec![0; bound.len()];
            for (k, &c) in coords.iter().enumerate() {
                g[c] = v[k];
            }
            g
        })
        .collect();
    UpSet::new(bound.to_vec(), gens).expect("projected generators lie in the box")
}

fn minimal_of(points: &[Point], chosen: &[usize]) -> Vec<Point> {
    chosen
        .iter()
        .filter(|&&a| {
            !chosen
                .iter()
                .any(|&b| b != a && points[b].iter().zip(&points[a]).all(|(x, y)| x <= y))
        })
        .map(|&a| points[a].clone())
        .collect()
}

// ---------------------------------------------------------------------------
// NA

/// Two disjoint coordinate sets and the up-set generators on each.
struct NaViolation {
    left: Vec<usize>,
    left_gens: Vec<Point>,
    right: Vec<usize>,
    right_gens: Vec<Point>,
}

/// Search for increasing `A`, `B` on disjoint coordinates with
/// `T·N(A∩B) > N(A)·N(B)`.
///
/// Such events are cylinders over complementary coordinate sets, so the
/// search runs over bipartitions of the non-constant coordinates. On each,
/// the up-sets of the smaller projected support are enumerated and the best
/// partner event is found by a maximum-weight closure.
fn na_scan<C: Int>(points: &[Point], masses: &[C], total: C, free: &[usize], cap: u64) -> Result<Option<NaViolation>> {
    let k = free.len();
    if k < 2 {
        return Ok(None);
    }
    for mask in 0u64..(1u64 << (k - 1)) {
        let mut left = vec![free[0]];
        let mut right = Vec::new();
        for (b, &c) in free[1..].iter().enumerate() {
            if mask >> b & 1 == 1 {
                left.push(c);
            } else {
                right.push(c);
            }
        }
        if right.is_empty() {
            continue;
        }
        let (lp, li) = projections(points, &left);
        let (rp, ri) = projections(points, &right);
        let swap = lp.len() > rp.len();
        let (ep, ei, op, oi) = if swap { (&rp, &ri, &lp, &li) } else { (&lp, &li, &rp, &ri) };
        let mut matrix = vec![vec![C::zero(); op.len()]; ep.len()];
        let mut e_mass = vec![C::zero(); ep.len()];
        let mut o_mass = vec![C::zero(); op.len()];
        for (x, w) in masses.iter().enumerate() {
            matrix[ei[x]][oi[x]] = matrix[ei[x]][oi[x]].clone() + w.clone();
            e_mass[ei[x]] = e_mass[ei[x]].clone() + w.clone();
            o_mass[oi[x]] = o_mass[oi[x]].clone() + w.clone();
        }
        let poset = point_poset(ep)?;
        let o_above = above_lists(op);
        let mut found: Option<(Vec<usize>, Vec<usize>)> = None;
        poset.for_each_upset(cap, |state| {
            let members: Vec<usize> = poset.members(state).collect();
            let na = members.iter().fold(C::zero(), |acc, &e| acc + e_mass[e].clone());
            if na.is_zero() || na == total {
                return true;
            }
            let weights: Vec<C> = (0..op.len())
                .map(|o| {
                    let joint = members.iter().fold(C::zero(), |acc, &e| acc + matrix[e][o].clone());
                    total.clone() * joint - na.clone() * o_mass[o].clone()
                })
                .collect();
            if !weights.iter().any(|w| w.is_positive()) {
                return true;
            }
            let (best, pick) = max_weight_closure(&weights, &o_above);
            if best.is_positive() {
                let picked = (0..op.len()).filter(|&o| pick[o]).collect();
                found = Some((members, picked));
                return false;
            }
            true
        })?;
        if let Some((e_members, o_members)) = found {
            let (e_coords, o_coords) = if swap { (right, left) } else { (left, right) };
            return Ok(Some(NaViolation {
                left: e_coords,
                left_gens: minimal_of(ep, &e_members),
                right: o_coords,
                right_gens: minimal_of(op, &o_members),
            }));
        }
    }
    Ok(None)
}

fn na_witness(mu: &FiniteMeasure, conditioning: &[(usize, u32)], cap: u64) -> Result<Option<Witness>> {
    let free = mu.free_coordinates();
    let scaled = Scaled::new(mu);
    let found = scaled.dispatch(
        |p, n, t| na_scan(p, n, t, &free, cap),
        |p, n, t| na_scan(p, n, t, &free, cap),
    )?;
    Ok(found.map(|v| {
        let a = embed(mu.bound(), &v.left, &v.left_gens);
        let b = embed(mu.bound(), &v.right, &v.right_gens);
        Witness::Correlation {
            conditioning: conditioning.to_vec(),
            p_ab: mu.probability_of(&a.intersection(&b)),
            p_a: mu.probability_of(&a),
            p_b: mu.probability_of(&b),
            a,
            b,
        }
    }))
}

/// Negative association: `μ(A ∩ B) <= μ(A) μ(B)` for increasing `A ⊥ B`.
pub fn check_na(mu: &FiniteMeasure, limits: &Limits) -> PropertyReport {
    match na_witness(mu, &[], limits.upsets) {
        Ok(None) => PropertyReport::pass(Property::Na),
        Ok(Some(w)) => PropertyReport::fail(Property::Na, w),
        Err(e) => PropertyReport::inconclusive(Property::Na, alloc::format!("{e}")),
    }
}

/// Every positive-probability conditioning `x_S = a` whose conditional law
/// is not a relabelled copy of one already listed. Only non-constant
/// coordinates are conditioned on; fixing a constant coordinate changes
/// nothing.
pub fn conditionings(mu: &FiniteMeasure) -> Vec<(Vec<(usize, u32)>, FiniteMeasure)> {
    let free = mu.free_coordinates();
    let points: Vec<Point> = mu.iter().map(|(p, _)| p.clone()).collect();
    let mut seen: BTreeSet<(Vec<usize>, Vec<(Point, Rational)>)> = BTreeSet::new();
    let mut out = Vec::new();
    for sel in Subset::full(free.len()).subsets() {
        let coords: Vec<usize> = sel.iter().map(|b| free[b]).collect();
        let (values, _) = projections(&points, &coords);
        for v in values {
            let fixed: Vec<(usize, u32)> = coords.iter().copied().zip(v.iter().copied()).collect();
            let conditioned = mu.condition(&fixed).expect("value taken on the support");
            let rest = conditioned.free_coordinates();
            let key = (
                rest.clone(),
                conditioned
                    .iter()
                    .map(|(p, w)| (project(p, &rest), w.clone()))
                    .collect(),
            );
            if seen.insert(key) {
                out.push((fixed, conditioned));
            }
        }
    }
    out
}

/// NA for every conditional measure obtained by fixing coordinates.
pub fn check_cna(mu: &FiniteMeasure, limits: &Limits) -> PropertyReport {
    let mut verdict = PropertyReport::pass(Property::Cna);
    for (fixed, conditioned) in conditionings(mu) {
        match na_witness(&conditioned, &fixed, limits.upsets) {
            Ok(None) => {}
            Ok(Some(w)) => return PropertyReport::fail(Property::Cna, w),
            Err(e) => verdict = PropertyReport::inconclusive(Property::Cna, alloc::format!("{e}")),
        }
    }
    verdict
}

// ---------------------------------------------------------------------------
// NC

fn nc_scan<C: Int>(points: &[Point], masses: &[C], total: C, free: &[usize]) -> Option<(usize, usize, u32, u32)> {
    for (a, &i) in free.iter().enumerate() {
        for &j in &free[a + 1..] {
            let top_i = points.iter().map(|p| p[i]).max().unwrap_or(0);
            let top_j = points.iter().map(|p| p[j]).max().unwrap_or(0);
            for s in 1..=top_i {
                let ps = sum_where(points, masses, |p| p[i] >= s);
                for t in 1..=top_j {
                    let pt = sum_where(points, masses, |p| p[j] >= t);
                    let both = sum_where(points, masses, |p| p[i] >= s && p[j] >= t);
                    if total.clone() * both > ps.clone() * pt {
                        return Some((i, j, s, t));
                    }
                }
            }
        }
    }
    None
}

fn sum_where<C: Int, F: Fn(&[u32]) -> bool>(points: &[Point], masses: &[C], pred: F) -> C {
    points
        .iter()
        .zip(masses)
        .filter(|(p, _)| pred(p))
        .fold(C::zero(), |acc, (_, w)| acc + w.clone())
}

fn nc_witness(mu: &FiniteMeasure, conditioning: &[(usize, u32)], field: Option<&ExternalField>) -> Option<Witness> {
    let free = mu.free_coordinates();
    let scaled = Scaled::new(mu);
    let found = scaled.dispatch(|p, n, t| nc_scan(p, n, t, &free), |p, n, t| nc_scan(p, n, t, &free));
    found.map(|(i, j, s, t)| Witness::Thresholds {
        conditioning: conditioning.to_vec(),
        field: field.cloned(),
        i,
        j,
        s,
        t,
        p_both: mu.probability(|x| x[i] >= s && x[j] >= t),
        p_i: mu.probability(|x| x[i] >= s),
        p_j: mu.probability(|x| x[j] >= t),
    })
}

/// Negative correlation of every pair of coordinates at every threshold.
pub fn check_nc(mu: &FiniteMeasure) -> PropertyReport {
    match nc_witness(mu, &[], None) {
        None => PropertyReport::pass(Property::Nc),
        Some(w) => PropertyReport::fail(Property::Nc, w),
    }
}

pub fn check_cnc(mu: &FiniteMeasure) -> PropertyReport {
    for (fixed, conditioned) in conditionings(mu) {
        if let Some(w) = nc_witness(&conditioned, &fixed, None) {
            return PropertyReport::fail(Property::Cnc, w);
        }
    }
    PropertyReport::pass(Property::Cnc)
}

// ---------------------------------------------------------------------------
// NMP and SCP

/// Level `k + 1` of `ν` dominates level `k` whenever both have positive mass.
pub fn check_nmp(nu: &SetMeasure) -> PropertyReport {
    for k in 0..nu.ground() {
        let (Ok(lower), Ok(upper)) = (nu.level(k), nu.level(k + 1)) else {
            continue;
        };
        if let Dominance::Fails { upset, hi, lo } = dominance(&upper, &lower) {
            return PropertyReport::fail(
                Property::Nmp,
                Witness::Level {
                    k,
                    upset,
                    upper: hi,
                    lower: lo,
                },
            );
        }
    }
    PropertyReport::pass(Property::Nmp)
}

/// For every `S ⊆ [m]` and `a ⊂ b ⊆ S`, conditioning on `Z ∩ S = b` gives
/// a measure that dominates the one conditioned on `Z ∩ S = a`.
pub fn check_scp(nu: &SetMeasure) -> PropertyReport {
    let ground = Subset::full(nu.ground());
    for on in ground.subsets() {
        let conditioned: Vec<(Subset, SetMeasure)> = on
            .subsets()
            .filter_map(|v| nu.condition(on, v).ok().map(|c| (v, c)))
            .collect();
        for (a, given_a) in &conditioned {
            for (b, given_b) in &conditioned {
                if a == b || !a.is_subset_of(*b) {
                    continue;
                }
                if let Dominance::Fails { upset, hi, lo } = dominance(given_b, given_a) {
                    return PropertyReport::fail(
                        Property::Scp,
                        Witness::Covering {
                            on,
                            a: *a,
                            b: *b,
                            upset,
                            given_a: lo,
                            given_b: hi,
                        },
                    );
                }
            }
        }
    }
    PropertyReport::pass(Property::Scp)
}

// ---------------------------------------------------------------------------
// ULC

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSequence(pub Vec<Rational>);

pub fn rank_sequence(mu: &FiniteMeasure) -> Result<RankSequence> {
    if !mu.is_binary() {
        return Err(Error::Precondition("rank sequences need a 0/1 measure".into()));
    }
    let n = mu.dimension();
    let mut r = vec![Rational::zero(); n + 1];
    for (p, w) in mu.iter() {
        let k = p.iter().filter(|&&c| c == 1).count();
        r[k] = &r[k] + w;
    }
    Ok(RankSequence(r))
}

impl RankSequence {
    /// First index that breaks ultra-log-concavity: an internal zero, or
    /// the first `0 < j < n` with `(r_j/C(n,j))² < (r_{j+1}/C(n,j+1))(r_{j-1}/C(n,j-1))`.
    pub fn violation(&self) -> Option<usize> {
        let r = &self.0;
        let n = r.len() - 1;
        let support: Vec<usize> = (0..=n).filter(|&j| !r[j].is_zero()).collect();
        if let (Some(&lo), Some(&hi)) = (support.first(), support.last()) {
            if let Some(j) = (lo..=hi).find(|&j| r[j].is_zero()) {
                return Some(j);
            }
        }
        let norm = |j: usize| &r[j] / Rational::from_integer(binomial(n, j));
        (1..n).find(|&j| norm(j) * norm(j) < norm(j + 1) * norm(j - 1))
    }
}

pub fn check_ulc(mu: &FiniteMeasure) -> Result<PropertyReport> {
    let ranks = rank_sequence(mu)?;
    Ok(match ranks.violation() {
        None => PropertyReport::pass(Property::Ulc),
        Some(j) => PropertyReport::fail(Property::Ulc, Witness::Rank { j, ranks: ranks.0 }),
    })
}

// ---------------------------------------------------------------------------
// Rayleigh

/// Which external fields the Rayleigh check tries: every vector over `grid`
/// (when there are at most `grid_max_coords` coordinates) followed by
/// `random` fields with entries `p/q`, `1 <= p, q <= random_scale`, drawn
/// from ChaCha8 seeded with `seed`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldStrategy {
    pub grid: Vec<Rational>,
    pub grid_max_coords: usize,
    pub random: usize,
    pub random_scale: u32,
    pub seed: u64,
}

impl Default for FieldStrategy {
    fn default() -> Self {
        FieldStrategy {
            grid: vec![
                rational::ratio(1, 4),
                rational::ratio(1, 2),
                rational::ratio(1, 1),
                rational::ratio(2, 1),
                rational::ratio(4, 1),
            ],
            grid_max_coords: 6,
            random: 200,
            random_scale: 16,
            seed: 0,
        }
    }
}

impl FieldStrategy {
    /// Enumerate the fields for `n` coordinates in order.
    pub fn fields(&self, n: usize) -> Vec<ExternalField> {
        let mut out = Vec::new();
        if n <= self.grid_max_coords && !self.grid.is_empty() {
            let g = self.grid.len();
            let count = g.pow(n as u32);
            for code in 0..count {
                let mut c = code;
                let w = (0..n)
                    .map(|_| {
                        let v = self.grid[c % g].clone();
                        c /= g;
                        v
                    })
                    .collect();
                out.push(ExternalField::new(w).expect("grid entries are nonnegative"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let scale = self.random_scale.max(1);
        for _ in 0..self.random {
            let w = (0..n)
                .map(|_| {
                    let p = rng.next_u32() % scale + 1;
                    let q = rng.next_u32() % scale + 1;
                    rational::ratio(p as i64, q as i64)
                })
                .collect();
            out.push(ExternalField::new(w).expect("positive entries"));
        }
        out
    }
}

/// NC under external fields. A failure is a proof; a pass only covers the
/// fields tried.
pub fn check_rayleigh(mu: &FiniteMeasure, strategy: &FieldStrategy) -> Result<PropertyReport> {
    if !mu.is_binary() {
        return Err(Error::Precondition("external fields need a 0/1 measure".into()));
    }
    let fields = strategy.fields(mu.dimension());
    for field in &fields {
        let tilted = impose_external_field(mu, field)?;
        if let Some(w) = nc_witness(&tilted, &[], Some(field)) {
            return Ok(PropertyReport::fail(Property::Rayleigh, w));
        }
    }
    let mut report = PropertyReport::pass(Property::Rayleigh);
    report.verdict = Verdict::PassSampled;
    Ok(report.with_note(alloc::format!("{} fields tried", fields.len())))
}

// ---------------------------------------------------------------------------
// FM

/// Outcome of the Feder–Mihail search on one measure.
enum FmOutcome {
    Holds,
    Violated(Vec<Point>),
    TooLarge,
}

/// Feder–Mihail on a 0/1 measure, with coordinates drawn from the
/// non-constant ones.
///
/// Write `c_j(A) = T·N(A ∩ {x_j = 1}) - N(A)·N(x_j = 1)`. For `λ >= 0`, if
/// `Σ_j λ_j c_j(A) >= 0` for every up-set `A` in some class, then every `A`
/// in the class has a coordinate with `c_j(A) >= 0`; the minimum over the
/// class is a closure problem. Classes are "up-sets containing these points
/// and avoiding those", refined by branching on one point at a time until a
/// class is certified, a violation turns up, or the node budget runs out.
/// With `shortcut` off the search is a plain enumeration of up-sets.
fn fm_scan<C: Int>(points: &[Point], masses: &[C], total: C, free: &[usize], cap: u64, shortcut: bool) -> Result<FmOutcome> {
    if free.is_empty() {
        return Ok(FmOutcome::Holds);
    }
    let on: Vec<C> = free
        .iter()
        .map(|&j| sum_where(points, masses, |p| p[j] == 1))
        .collect();
    if !shortcut {
        return fm_enumerate(points, masses, &total, free, &on, cap);
    }
    let above = above_lists(points);
    let below: Vec<Vec<usize>> = (0..points.len())
        .map(|v| (0..points.len()).filter(|&u| above[u].contains(&v)).collect())
        .collect();
    let mut lambdas: Vec<Vec<usize>> = Vec::new();
    for start in 0..free.len() {
        lambdas.push((start..free.len()).collect());
    }
    for end in 1..free.len() {
        lambdas.push((0..end).collect());
    }
    if free.len() > 1 {
        for j in 0..free.len() {
            lambdas.push(vec![j]);
        }
    }
    // Weight of a point under λ, sign flipped so that the closure maximises
    // -Σ λ_j c_j.
    let weights: Vec<Vec<C>> = lambdas
        .iter()
        .map(|lambda| {
            let offset = lambda.iter().fold(C::zero(), |acc, &k| acc + on[k].clone());
            points
                .iter()
                .zip(masses)
                .map(|(p, w)| {
                    let hits = lambda.iter().filter(|&&k| p[free[k]] == 1).count();
                    let hits = (0..hits).fold(C::zero(), |acc, _| acc + total.clone());
                    w.clone() * (offset.clone() - hits)
                })
                .collect()
        })
        .collect();
    let search = FmSearch {
        points,
        masses,
        total: &total,
        free,
        on: &on,
        above: &above,
        below: &below,
        weights: &weights,
    };
    let mut state = vec![Forced::Open; points.len()];
    let mut nodes = 0u64;
    search.node(&mut state, &mut nodes, cap)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Forced {
    Open,
    In,
    Out,
}

struct FmSearch<'a, C> {
    points: &'a [Point],
    masses: &'a [C],
    total: &'a C,
    free: &'a [usize],
    on: &'a [C],
    above: &'a [Vec<usize>],
    below: &'a [Vec<usize>],
    weights: &'a [Vec<C>],
}

impl<C: Int> FmSearch<'_, C> {
    /// Whether the up-set `members` is a nontrivial event negatively
    /// correlated with every free coordinate.
    fn violates(&self, members: &[bool]) -> bool {
        let na = (0..self.points.len())
            .filter(|&x| members[x])
            .fold(C::zero(), |acc, x| acc + self.masses[x].clone());
        if na.is_zero() || &na == self.total {
            return false;
        }
        !self.free.iter().zip(self.on).any(|(&j, nj)| {
            let joint = (0..self.points.len())
                .filter(|&x| members[x] && self.points[x][j] == 1)
                .fold(C::zero(), |acc, x| acc + self.masses[x].clone());
            self.total.clone() * joint >= na.clone() * nj.clone()
        })
    }

    fn node(&self, state: &mut Vec<Forced>, nodes: &mut u64, cap: u64) -> Result<FmOutcome> {
        *nodes += 1;
        if *nodes > cap {
            return Ok(FmOutcome::TooLarge);
        }
        let mut candidates = Vec::new();
        for w in self.weights {
            let big = w.iter().fold(C::one(), |acc, x| acc + x.abs());
            let adjusted: Vec<C> = w
                .iter()
                .zip(state.iter())
                .map(|(x, f)| match f {
                    Forced::Open => x.clone(),
                    Forced::In => x.clone() + big.clone(),
                    Forced::Out => x.clone() - big.clone(),
                })
                .collect();
            let forced_in = state.iter().filter(|f| **f == Forced::In).count();
            let bonus = (0..forced_in).fold(C::zero(), |acc, _| acc + big.clone());
            let (best, pick) = max_weight_closure(&adjusted, self.above);
            if !(best - bonus).is_positive() {
                return Ok(FmOutcome::Holds);
            }
            candidates.push(pick);
        }
        for pick in &candidates {
            if self.violates(pick) {
                return Ok(FmOutcome::Violated(minimal_of(
                    self.points,
                    &(0..pick.len()).filter(|&x| pick[x]).collect::<Vec<_>>(),
                )));
            }
        }
        // Branch on the open point where the candidate optima disagree most,
        // heaviest first.
        let open: Vec<usize> = (0..state.len()).filter(|&x| state[x] == Forced::Open).collect();
        if open.is_empty() {
            return Ok(FmOutcome::Holds);
        }
        let split = *open
            .iter()
            .max_by_key(|&&x| {
                let inside = candidates.iter().filter(|c| c[x]).count();
                let balance = inside.min(candidates.len() - inside);
                (balance, self.masses[x].clone(), core::cmp::Reverse(x))
            })
            .unwrap();
        for choice in [Forced::In, Forced::Out] {
            let saved = state.clone();
            let closure = if choice == Forced::In { &self.above[split] } else { &self.below[split] };
            state[split] = choice;
            for &y in closure {
                state[y] = choice;
            }
            let outcome = self.node(state, nodes, cap)?;
            *state = saved;
            match outcome {
                FmOutcome::Holds => {}
                other => return Ok(other),
            }
        }
        Ok(FmOutcome::Holds)
    }
}

fn fm_enumerate<C: Int>(points: &[Point], masses: &[C], total: &C, free: &[usize], on: &[C], cap: u64) -> Result<FmOutcome> {
    let poset = point_poset(points)?;
    let mut violation = None;
    let counted = poset.for_each_upset(cap, |state| {
        let members: Vec<usize> = poset.members(state).collect();
        let na = members.iter().fold(C::zero(), |acc, &x| acc + masses[x].clone());
        if na.is_zero() || &na == total {
            return true;
        }
        let ok = free.iter().zip(on).any(|(&j, nj)| {
            let joint = members
                .iter()
                .filter(|&&x| points[x][j] == 1)
                .fold(C::zero(), |acc, &x| acc + masses[x].clone());
            total.clone() * joint >= na.clone() * nj.clone()
        });
        if !ok {
            violation = Some(minimal_of(points, &members));
        }
        ok
    });
    match counted {
        Ok(_) => Ok(match violation {
            Some(gens) => FmOutcome::Violated(gens),
            None => FmOutcome::Holds,
        }),
        Err(Error::CapExceeded(_)) => Ok(FmOutcome::TooLarge),
        Err(e) => Err(e),
    }
}

fn fm_witness(mu: &FiniteMeasure, conditioning: &[(usize, u32)], cap: u64) -> Result<Option<Witness>> {
    let free = mu.free_coordinates();
    let scaled = Scaled::new(mu);
    let outcome = scaled.dispatch(
        |p, n, t| fm_scan(p, n, t, &free, cap, true),
        |p, n, t| fm_scan(p, n, t, &free, cap, true),
    )?;
    match outcome {
        FmOutcome::Holds => Ok(None),
        FmOutcome::Violated(gens) => Ok(Some(Witness::FederMihail {
            conditioning: conditioning.to_vec(),
            a: UpSet::new(mu.bound().to_vec(), gens)?,
        })),
        FmOutcome::TooLarge => Err(Error::CapExceeded(cap)),
    }
}

/// Every nontrivial increasing event is positively correlated with some
/// non-constant coordinate indicator.
pub fn check_fm(mu: &FiniteMeasure, limits: &Limits) -> Result<PropertyReport> {
    if !mu.is_binary() {
        return Err(Error::Precondition("the Feder–Mihail property needs a 0/1 measure".into()));
    }
    Ok(match fm_witness(mu, &[], limits.upsets) {
        Ok(None) => PropertyReport::pass(Property::Fm),
        Ok(Some(w)) => PropertyReport::fail(Property::Fm, w),
        Err(e) => PropertyReport::inconclusive(Property::Fm, alloc::format!("{e}")),
    })
}

pub fn check_cfm(mu: &FiniteMeasure, limits: &Limits) -> Result<PropertyReport> {
    if !mu.is_binary() {
        return Err(Error::Precondition("the Feder–Mihail property needs a 0/1 measure".into()));
    }
    let mut report = PropertyReport::pass(Property::Cfm);
    for (fixed, conditioned) in conditionings(mu) {
        match fm_witness(&conditioned, &fixed, limits.upsets) {
            Ok(None) => {}
            Ok(Some(w)) => return Ok(PropertyReport::fail(Property::Cfm, w)),
            Err(e) => report = PropertyReport::inconclusive(Property::Cfm, alloc::format!("{e}")),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::box_points;
    use crate::rational::ratio;
    use crate::urn::{ball_set_measure_occ, enumeration_measure, occupation_measure, UrnModel};

    fn uniform(m: usize, n: usize) -> UrnModel {
        UrnModel::new(vec![vec![ratio(1, n as i64); n]; m]).unwrap()
    }

    fn product(n: usize) -> FiniteMeasure {
        FiniteMeasure::new(
            vec![1; n],
            box_points(&vec![1; n])
                .into_iter()
                .map(|p| (p, Rational::new(BigInt::one(), BigInt::one() << n))),
        )
        .unwrap()
    }

    /// Exhaustive NA over all pairs of up-sets of the box.
    fn na_brute(mu: &FiniteMeasure) -> bool {
        let pts = box_points(mu.bound());
        let poset = point_poset(&pts).unwrap();
        let mut ups = Vec::new();
        poset
            .for_each_upset(u64::MAX, |s| {
                let gens = minimal_of(&pts, &poset.members(s).collect::<Vec<_>>());
                ups.push(UpSet::new(mu.bound().to_vec(), gens).unwrap());
                true
            })
            .unwrap();
        ups.iter().all(|a| {
            ups.iter()
                .all(|b| !disjoint_dependence(a, b) || mu.probability_of(&a.intersection(b)) <= mu.probability_of(a) * mu.probability_of(b))
        })
    }

    #[test]
    fn na_examples() {
        let l = Limits::default();
        assert_eq!(check_na(&product(3), &l).verdict, Verdict::Pass);
        let occ = occupation_measure(&uniform(2, 2), &l).unwrap();
        assert_eq!(check_na(&occ, &l).verdict, Verdict::Pass);
        assert!(na_brute(&occ));
        let point = FiniteMeasure::point_mass(vec![1, 1], vec![1, 0]).unwrap();
        assert_eq!(check_na(&point, &l).verdict, Verdict::Pass);
    }

    #[test]
    fn na_finds_positive_association() {
        let l = Limits::default();
        let mu = FiniteMeasure::new(vec![1, 1, 1], [(vec![1, 1, 0], ratio(1, 2)), (vec![0, 0, 1], ratio(1, 2))]).unwrap();
        let report = check_na(&mu, &l);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(!na_brute(&mu));
        assert!(report.witness.unwrap().reverify(Target::Measure(&mu)));
    }

    #[test]
    fn na_agrees_with_brute_force_on_small_measures() {
        let l = Limits::default();
        let pts = box_points(&[1, 1, 1]);
        // Masses from a fixed pseudo-random pattern over {0,1}^3.
        for seed in 0..40u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries: Vec<(Point, Rational)> = pts
                .iter()
                .map(|p| (p.clone(), ratio((rng.next_u32() % 4) as i64, 1)))
                .collect();
            let Ok(mu) = FiniteMeasure::normalized(vec![1, 1, 1], entries) else { continue };
            let report = check_na(&mu, &l);
            assert_eq!(report.verdict == Verdict::Pass, na_brute(&mu), "seed {seed}");
            if let Some(w) = report.witness {
                assert!(w.reverify(Target::Measure(&mu)));
            }
        }
    }

    #[test]
    fn nc_examples() {
        let single = FiniteMeasure::point_mass(vec![2], vec![1]).unwrap();
        assert_eq!(check_nc(&single).verdict, Verdict::Pass);
        let mu = enumeration_measure(&uniform(2, 2), &Limits::default()).unwrap();
        assert_eq!(check_nc(&mu).verdict, Verdict::Pass);
        let pos = FiniteMeasure::new(vec![1, 1], [(vec![1, 1], ratio(1, 2)), (vec![0, 0], ratio(1, 2))]).unwrap();
        let report = check_nc(&pos);
        assert_eq!(report.verdict, Verdict::Fail);
        match report.witness.clone().unwrap() {
            Witness::Thresholds { s, t, .. } => assert_eq!((s, t), (1, 1)),
            other => panic!("unexpected witness {other:?}"),
        }
        assert!(report.witness.unwrap().reverify(Target::Measure(&pos)));
    }

    #[test]
    fn conditional_checks_on_small_urns() {
        let l = Limits::default();
        let occ = occupation_measure(&uniform(2, 2), &l).unwrap();
        assert_eq!(check_cna(&occ, &l).verdict, Verdict::Pass);
        assert_eq!(check_cnc(&occ).verdict, Verdict::Pass);
        let model = UrnModel::new(vec![
            vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)],
            vec![ratio(1, 5), ratio(2, 5), ratio(2, 5)],
            vec![ratio(1, 7), ratio(4, 7), ratio(2, 7)],
        ])
        .unwrap();
        let mu = enumeration_measure(&model, &l).unwrap();
        assert_eq!(check_cna(&mu, &l).verdict, Verdict::Pass);
        let one = FiniteMeasure::point_mass(vec![3], vec![2]).unwrap();
        assert_eq!(check_cna(&one, &l).verdict, Verdict::Pass);
    }

    #[test]
    fn nmp_examples() {
        assert_eq!(check_nmp(&SetMeasure::uniform(3)).verdict, Verdict::Pass);
        let nu = ball_set_measure_occ(&uniform(2, 2), 1, &Limits::default()).unwrap();
        assert_eq!(check_nmp(&nu).verdict, Verdict::Pass);
        let point = SetMeasure::new(3, [(Subset::from_indices([0, 2]), ratio(1, 1))]).unwrap();
        assert_eq!(check_nmp(&point).verdict, Verdict::Pass);
        let bad = SetMeasure::new(2, [(Subset::from_indices([0]), ratio(1, 2)), (Subset::from_indices([1, 0]), ratio(0, 1)), (Subset::EMPTY, ratio(1, 2))])
            .unwrap();
        assert_eq!(check_nmp(&bad).verdict, Verdict::Pass);
        let split = SetMeasure::new(
            2,
            [(Subset::from_indices([0]), ratio(1, 2)), (Subset::from_indices([1]), ratio(1, 4)), (Subset::from_indices([0, 1]), ratio(0, 1)), (Subset::EMPTY, ratio(1, 4))],
        )
        .unwrap();
        assert_eq!(check_nmp(&split).verdict, Verdict::Pass);
    }

    #[test]
    fn nmp_failure_is_replayable() {
        // Level 1 sits on {1} while level 2 is {2,3}; {1} is not covered.
        let nu = SetMeasure::new(
            3,
            [(Subset::from_indices([0]), ratio(1, 2)), (Subset::from_indices([1, 2]), ratio(1, 2))],
        )
        .unwrap();
        let report = check_nmp(&nu);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.witness.unwrap().reverify(Target::Sets(&nu)));
    }

    #[test]
    fn scp_examples() {
        let nu = ball_set_measure_occ(&uniform(2, 2), 1, &Limits::default()).unwrap();
        let report = check_scp(&nu);
        assert_eq!(report.verdict, Verdict::Fail);
        let witness = report.witness.unwrap();
        assert!(witness.reverify(Target::Sets(&nu)));
        assert_eq!(check_scp(&SetMeasure::uniform(3)).verdict, Verdict::Pass);
    }

    #[test]
    fn ulc_examples() {
        let report = check_ulc(&product(4)).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        let r = RankSequence(vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
        assert_eq!(r.violation(), None);
        let gap = RankSequence(vec![ratio(1, 2), ratio(0, 1), ratio(1, 2)]);
        assert_eq!(gap.violation(), Some(1));
        let steep = RankSequence(vec![ratio(1, 2), ratio(1, 10), ratio(2, 5)]);
        assert_eq!(steep.violation(), Some(1));
    }

    #[test]
    fn rayleigh_examples() {
        let strategy = FieldStrategy {
            random: 10,
            ..FieldStrategy::default()
        };
        let report = check_rayleigh(&product(3), &strategy).unwrap();
        assert_eq!(report.verdict, Verdict::PassSampled);
        let pos = FiniteMeasure::new(vec![1, 1], [(vec![1, 1], ratio(1, 2)), (vec![0, 0], ratio(1, 2))]).unwrap();
        let report = check_rayleigh(&pos, &strategy).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.witness.unwrap().reverify(Target::Measure(&pos)));
        assert_eq!(strategy.fields(2).len(), 25 + 10);
    }

    #[test]
    fn fm_examples() {
        let l = Limits::default();
        let single = FiniteMeasure::new(vec![1], [(vec![0], ratio(1, 3)), (vec![1], ratio(2, 3))]).unwrap();
        assert_eq!(check_fm(&single, &l).unwrap().verdict, Verdict::Pass);
        let occ = occupation_measure(&uniform(2, 2), &l).unwrap();
        assert_eq!(check_cfm(&occ, &l).unwrap().verdict, Verdict::Pass);
        let mu = FiniteMeasure::new(
            vec![1, 1],
            [(vec![1, 0], ratio(1, 2)), (vec![0, 1], ratio(1, 2))],
        )
        .unwrap();
        assert_eq!(check_fm(&mu, &l).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn fm_certificates_agree_with_enumeration() {
        let pts = box_points(&[1, 1, 1, 1]);
        for seed in 0..60u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entries: Vec<(Point, Rational)> = pts
                .iter()
                .map(|p| (p.clone(), ratio((rng.next_u32() % 5) as i64, 1)))
                .collect();
            let Ok(mu) = FiniteMeasure::normalized(vec![1; 4], entries) else { continue };
            let free = mu.free_coordinates();
            let scaled = Scaled::new(&mu);
            let verdict = |shortcut| {
                let out = scaled.dispatch(
                    |p, n, t| fm_scan(p, n, t, &free, u64::MAX, shortcut),
                    |p, n, t| fm_scan(p, n, t, &free, u64::MAX, shortcut),
                );
                matches!(out.unwrap(), FmOutcome::Holds)
            };
            assert_eq!(verdict(true), verdict(false), "seed {seed}");
        }
    }

    #[test]
    fn verdict_merge_order() {
        assert_eq!(Verdict::Pass.merge(Verdict::Inconclusive), Verdict::Inconclusive);
        assert_eq!(Verdict::Inconclusive.merge(Verdict::Fail), Verdict::Fail);
        assert_eq!(Verdict::Pass.merge(Verdict::PassSampled), Verdict::PassSampled);
    }
}
