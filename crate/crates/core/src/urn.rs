//! Generalized independent urn models and the measures they induce.
//!
//! Ball `i` lands in urn `j` with probability `probs[i][j]`, independently of
//! the other balls. Balls and urns are 0-based here; the last urn (index
//! `n - 1`) is the distinguished urn whose ball set `Z = σ^{-1}(n)` the
//! conditional ball-set measures describe.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::bits::Subset;
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::measure::{FiniteMeasure, Point, SetMeasure};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnModel {
    balls: usize,
    urns: usize,
    probs: Vec<Vec<Rational>>,
}

impl UrnModel {
    pub fn new(probs: Vec<Vec<Rational>>) -> Result<UrnModel> {
        let balls = probs.len();
        if balls == 0 {
            return Err(Error::InvalidModel("at least one ball is required".into()));
        }
        if balls > 63 {
            return Err(Error::InvalidModel("at most 63 balls are supported".into()));
        }
        let urns = probs[0].len();
        if urns == 0 {
            return Err(Error::InvalidModel("at least one urn is required".into()));
        }
        for (i, row) in probs.iter().enumerate() {
            if row.len() != urns {
                return Err(Error::InvalidModel(alloc::format!("row {} has {} entries, expected {}", i + 1, row.len(), urns)));
            }
            if !row.iter().all(rational::is_probability) {
                return Err(Error::InvalidModel(alloc::format!("row {} has an entry outside [0,1]", i + 1)));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::InvalidModel(alloc::format!("row {} sums to {}", i + 1, rational::format(&sum))));
            }
        }
        Ok(UrnModel { balls, urns, probs })
    }

    /// Every ball uses the same row.
    pub fn ordinary(balls: usize, row: Vec<Rational>) -> Result<UrnModel> {
        UrnModel::new(vec![row; balls])
    }

    pub fn balls(&self) -> usize {
        self.balls
    }

    pub fn urns(&self) -> usize {
        self.urns
    }

    pub fn probs(&self) -> &[Vec<Rational>] {
        &self.probs
    }

    pub fn prob(&self, ball: usize, urn: usize) -> &Rational {
        &self.probs[ball][urn]
    }

    fn check_budget(&self, limits: &Limits) -> Result<()> {
        let needed = (self.urns as u128).checked_pow(self.balls as u32).unwrap_or(u128::MAX);
        if needed > limits.assignments {
            return Err(Error::BudgetExceeded {
                needed,
                budget: limits.assignments,
            });
        }
        Ok(())
    }

    /// All `n^m` assignments `σ` (as urn index per ball) with their weights,
    /// including zero-weight ones, in lexicographic order of `σ`.
    pub fn assignments(&self, limits: &Limits) -> Result<Vec<(Vec<usize>, Rational)>> {
        self.check_budget(limits)?;
        let mut out = Vec::new();
        let mut sigma = vec![0usize; self.balls];
        loop {
            let w = sigma
                .iter()
                .enumerate()
                .fold(Rational::one(), |acc, (i, &j)| acc * &self.probs[i][j]);
            out.push((sigma.clone(), w));
            let mut i = self.balls;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                sigma[i] += 1;
                if sigma[i] < self.urns {
                    break;
                }
                sigma[i] = 0;
            }
        }
    }

    /// Visit the positive-weight assignments, pruning zero entries early.
    pub fn for_each_assignment<F: FnMut(&[usize], &Rational)>(&self, limits: &Limits, mut visit: F) -> Result<()> {
        self.check_budget(limits)?;
        let mut sigma = Vec::with_capacity(self.balls);
        self.descend(&mut sigma, Rational::one(), &mut visit);
        Ok(())
    }

    fn descend<F: FnMut(&[usize], &Rational)>(&self, sigma: &mut Vec<usize>, weight: Rational, visit: &mut F) {
        let i = sigma.len();
        if i == self.balls {
            visit(sigma, &weight);
            return;
        }
        for j in 0..self.urns {
            let p = &self.probs[i][j];
            if p.is_zero() {
                continue;
            }
            sigma.push(j);
            self.descend(sigma, &weight * p, visit);
            sigma.pop();
        }
    }

    pub fn occupancy(&self, sigma: &[usize]) -> OccupancyVector {
        let mut counts = vec![0u32; self.urns];
        for &j in sigma {
            counts[j] += 1;
        }
        OccupancyVector(counts)
    }
}

/// Ball counts `(B_1, …, B_n)` of one assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OccupancyVector(pub Vec<u32>);

impl OccupancyVector {
    pub fn occupation(&self) -> Point {
        self.0.iter().map(|&b| b.min(1)).collect()
    }
}

/// Law of the ball counts.
pub fn enumeration_measure(model: &UrnModel, limits: &Limits) -> Result<FiniteMeasure> {
    pushforward(model, limits, vec![model.balls as u32; model.urns], |b| b.0)
}

/// Law of the occupancy indicators `min(B_j, 1)`.
pub fn occupation_measure(model: &UrnModel, limits: &Limits) -> Result<FiniteMeasure> {
    pushforward(model, limits, vec![1; model.urns], |b| b.occupation())
}

fn pushforward<F: Fn(OccupancyVector) -> Point>(model: &UrnModel, limits: &Limits, bound: Vec<u32>, map: F) -> Result<FiniteMeasure> {
    let mut entries = Vec::new();
    model.for_each_assignment(limits, |sigma, w| entries.push((map(model.occupancy(sigma)), w.clone())))?;
    FiniteMeasure::new(bound, entries)
}

/// Per-urn cutpoints `0 = c_0 < c_1 < … < c_k = m + 1`; the sentinel `m + 1`
/// stands for an infinite last cutpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalSpec {
    cutpoints: Vec<Vec<u32>>,
}

impl IntervalSpec {
    pub fn new(balls: usize, cutpoints: Vec<Vec<u32>>) -> Result<IntervalSpec> {
        let top = balls as u32 + 1;
        for (urn, cuts) in cutpoints.iter().enumerate() {
            if cuts.len() < 2 {
                return Err(Error::MalformedCutpoints { urn, reason: "need at least two cutpoints" });
            }
            if cuts[0] != 0 {
                return Err(Error::MalformedCutpoints { urn, reason: "first cutpoint must be 0" });
            }
            if *cuts.last().unwrap() != top {
                return Err(Error::MalformedCutpoints { urn, reason: "last cutpoint must be m+1" });
            }
            if cuts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::MalformedCutpoints { urn, reason: "cutpoints must increase strictly" });
            }
        }
        Ok(IntervalSpec { cutpoints })
    }

    /// Cutpoints `0 < t < m+1` on every urn.
    pub fn threshold(balls: usize, urns: usize, t: u32) -> Result<IntervalSpec> {
        IntervalSpec::new(balls, vec![vec![0, t, balls as u32 + 1]; urns])
    }

    /// Unit intervals on every urn.
    pub fn unit(balls: usize, urns: usize) -> IntervalSpec {
        IntervalSpec {
            cutpoints: vec![(0..=balls as u32 + 1).collect(); urns],
        }
    }

    pub fn cutpoints(&self) -> &[Vec<u32>] {
        &self.cutpoints
    }

    /// Index `t` with `c_t <= count < c_{t+1}`.
    pub fn index(&self, urn: usize, count: u32) -> u32 {
        let cuts = &self.cutpoints[urn];
        (cuts.partition_point(|&c| c <= count) - 1) as u32
    }

    fn bound(&self) -> Vec<u32> {
        self.cutpoints.iter().map(|c| c.len() as u32 - 2).collect()
    }
}

pub fn interval_measure(model: &UrnModel, spec: &IntervalSpec, limits: &Limits) -> Result<FiniteMeasure> {
    if spec.cutpoints.len() != model.urns {
        return Err(Error::Precondition("one cutpoint list per urn is required".into()));
    }
    let spec = IntervalSpec::new(model.balls, spec.cutpoints.clone())?;
    pushforward(model, limits, spec.bound(), |b| {
        b.0.iter().enumerate().map(|(j, &c)| spec.index(j, c)).collect()
    })
}

fn ball_set_measure<F: Fn(&OccupancyVector) -> bool>(model: &UrnModel, limits: &Limits, keep: F) -> Result<(SetMeasure, Rational)> {
    let last = model.urns - 1;
    let mut entries = Vec::new();
    let mut total = Rational::zero();
    model.for_each_assignment(limits, |sigma, w| {
        if keep(&model.occupancy(sigma)) {
            let z = Subset::from_indices((0..sigma.len()).filter(|&i| sigma[i] == last));
            entries.push((z, w.clone()));
            total = &total + w;
        }
    })?;
    Ok((SetMeasure::normalized(model.balls, entries)?, total))
}

fn check_occ_d(model: &UrnModel, d: usize) -> Result<()> {
    if d >= model.urns {
        return Err(Error::Precondition(alloc::format!("d = {} must be below n = {}", d, model.urns)));
    }
    Ok(())
}

fn check_ball_a(model: &UrnModel, a: &[u32]) -> Result<()> {
    if a.len() >= model.urns {
        return Err(Error::Precondition(alloc::format!("a has {} entries, n = {}", a.len(), model.urns)));
    }
    Ok(())
}

/// Law of the ball set of the last urn given that urns `1..=d` are occupied.
pub fn ball_set_measure_occ(model: &UrnModel, d: usize, limits: &Limits) -> Result<SetMeasure> {
    occ_conditioning(model, d, limits).map(|(nu, _)| nu)
}

/// The measure together with the probability of the conditioning event.
pub fn occ_conditioning(model: &UrnModel, d: usize, limits: &Limits) -> Result<(SetMeasure, Rational)> {
    check_occ_d(model, d)?;
    ball_set_measure(model, limits, |b| b.0[..d].iter().all(|&c| c >= 1))
}

/// Law of the ball set of the last urn given `B_i = a_i` for `i <= d`.
pub fn ball_set_measure_ball(model: &UrnModel, a: &[u32], limits: &Limits) -> Result<SetMeasure> {
    ball_conditioning(model, a, limits).map(|(nu, _)| nu)
}

pub fn ball_conditioning(model: &UrnModel, a: &[u32], limits: &Limits) -> Result<(SetMeasure, Rational)> {
    check_ball_a(model, a)?;
    ball_set_measure(model, limits, |b| b.0[..a.len()] == *a)
}

/// How the urns of a refined model regroup into the original urns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub d: usize,
    /// `blocks[j]` lists the refined urns whose counts add up to old urn `j`.
    pub blocks: Vec<Vec<usize>>,
    pub refined_urns: usize,
    balls: usize,
}

impl Refinement {
    /// Refined urn taken by ball `i` when it would have entered old urn `j`.
    pub fn column(&self, i: usize, j: usize) -> usize {
        if j < self.d {
            j
        } else {
            self.d + self.balls * (j - self.d) + i
        }
    }

    /// Old occupancy vector from a refined one.
    pub fn collapse(&self, refined: &[u32]) -> Point {
        self.blocks
            .iter()
            .map(|block| block.iter().map(|&c| refined[c]).sum())
            .collect()
    }
}

/// Split every urn after the first `d` into one private urn per ball.
///
/// Ball `i` (0-based) that would enter old urn `j >= d` enters new urn
/// `d + m (j - d) + i` instead; the first `d` urns are kept.
pub fn refine_model(model: &UrnModel, d: usize) -> Result<(UrnModel, Refinement)> {
    if d >= model.urns {
        return Err(Error::Precondition(alloc::format!("d = {} must be below n = {}", d, model.urns)));
    }
    let m = model.balls;
    let refined_urns = d + m * (model.urns - d);
    let map = Refinement {
        d,
        blocks: Vec::new(),
        refined_urns,
        balls: m,
    };
    let column = |i: usize, j: usize| map.column(i, j);
    let probs = (0..m)
        .map(|i| {
            let mut row = vec![Rational::zero(); refined_urns];
            for j in 0..model.urns {
                row[column(i, j)] = model.probs[i][j].clone();
            }
            row
        })
        .collect();
    let blocks = (0..model.urns)
        .map(|j| {
            if j < d {
                vec![j]
            } else {
                (0..m).map(|i| column(i, j)).collect()
            }
        })
        .collect();
    Ok((UrnModel::new(probs)?, Refinement { blocks, ..map }))
}

/// Check the refinement against the original model: every assignment,
/// routed to the private urns and summed back over blocks, gives its
/// original occupancy vector; private urns never hold two balls; and the
/// block sums of the refined occupation measure reproduce the law of the
/// refined urns' counts `(B_{d+1}, …, B_n)`.
pub fn refinement_consistent(model: &UrnModel, d: usize, limits: &Limits) -> Result<bool> {
    let (refined, map) = refine_model(model, d)?;
    let mut ok = true;
    model.for_each_assignment(limits, |sigma, _| {
        let routed: Vec<usize> = sigma.iter().enumerate().map(|(i, &j)| map.column(i, j)).collect();
        let b = refined.occupancy(&routed);
        ok &= b.0[d..].iter().all(|&c| c <= 1);
        ok &= map.collapse(&b.0) == model.occupancy(sigma).0;
    })?;
    let tail = vec![model.balls as u32; model.urns - d];
    let collapsed = occupation_measure(&refined, limits)?.pushforward(tail.clone(), |x| map.collapse(x)[d..].to_vec())?;
    let direct = enumeration_measure(model, limits)?.pushforward(tail, |x| x[d..].to_vec())?;
    Ok(ok && collapsed == direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn uniform(m: usize, n: usize) -> UrnModel {
        UrnModel::new(vec![vec![ratio(1, n as i64); n]; m]).unwrap()
    }

    fn set(items: &[usize]) -> Subset {
        Subset::from_indices(items.iter().map(|i| i - 1))
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(UrnModel::new(vec![vec![ratio(1, 2), ratio(1, 3)]]).is_err());
        assert!(UrnModel::new(vec![vec![ratio(3, 2), ratio(-1, 2)]]).is_err());
        assert!(UrnModel::new(vec![vec![ratio(1, 2)], vec![ratio(1, 1)]]).is_err());
        assert!(UrnModel::new(vec![]).is_err());
    }

    #[test]
    fn assignment_examples() {
        let l = Limits::default();
        let one = uniform(1, 2).assignments(&l).unwrap();
        assert_eq!(one.len(), 2);
        assert!(one.iter().all(|(_, w)| *w == ratio(1, 2)));
        let two = uniform(2, 2).assignments(&l).unwrap();
        assert_eq!(two.len(), 4);
        assert!(two.iter().all(|(_, w)| *w == ratio(1, 4)));
        let det = UrnModel::new(vec![vec![ratio(1, 1), ratio(0, 1)], vec![ratio(0, 1), ratio(1, 1)]]).unwrap();
        for (sigma, w) in det.assignments(&l).unwrap() {
            assert_eq!(w, if sigma == [0, 1] { ratio(1, 1) } else { ratio(0, 1) });
        }
        let tight = Limits {
            assignments: 3,
            ..Limits::default()
        };
        assert_eq!(
            uniform(2, 2).assignments(&tight),
            Err(Error::BudgetExceeded { needed: 4, budget: 3 })
        );
    }

    #[test]
    fn measure_examples() {
        let l = Limits::default();
        let mu = enumeration_measure(&uniform(1, 2), &l).unwrap();
        assert_eq!(mu.mass_at(&[1, 0]), ratio(1, 2));
        assert_eq!(mu.mass_at(&[0, 1]), ratio(1, 2));
        let mu = enumeration_measure(&uniform(2, 2), &l).unwrap();
        assert_eq!(mu.mass_at(&[2, 0]), ratio(1, 4));
        assert_eq!(mu.mass_at(&[1, 1]), ratio(1, 2));
        assert_eq!(mu.mass_at(&[0, 2]), ratio(1, 4));
        let occ = occupation_measure(&uniform(2, 2), &l).unwrap();
        assert_eq!(occ.mass_at(&[1, 1]), ratio(1, 2));
        assert_eq!(occ.mass_at(&[1, 0]), ratio(1, 4));
        assert_eq!(occ.mass_at(&[0, 1]), ratio(1, 4));
        assert_eq!(occ.mass_at(&[0, 0]), ratio(0, 1));
    }

    #[test]
    fn interval_examples() {
        let l = Limits::default();
        let model = uniform(2, 2);
        let spec = IntervalSpec::new(2, vec![vec![0, 2, 3], vec![0, 1, 2, 3]]).unwrap();
        let mu = interval_measure(&model, &spec, &l).unwrap();
        assert_eq!(mu.probability(|x| x[0] == 0), ratio(3, 4));
        assert_eq!(mu.probability(|x| x[0] == 1), ratio(1, 4));
        let unit = interval_measure(&model, &IntervalSpec::unit(2, 2), &l).unwrap();
        assert_eq!(unit, enumeration_measure(&model, &l).unwrap());
        let thr = interval_measure(&model, &IntervalSpec::threshold(2, 2, 1).unwrap(), &l).unwrap();
        assert_eq!(thr, occupation_measure(&model, &l).unwrap());
        assert!(matches!(
            IntervalSpec::new(2, vec![vec![0, 2, 2, 3]]),
            Err(Error::MalformedCutpoints { urn: 0, .. })
        ));
        assert!(IntervalSpec::new(2, vec![vec![1, 3]]).is_err());
        assert!(IntervalSpec::new(2, vec![vec![0, 2]]).is_err());
    }

    #[test]
    fn ball_set_examples() {
        let l = Limits::default();
        let nu = ball_set_measure_occ(&uniform(2, 2), 1, &l).unwrap();
        for s in [set(&[]), set(&[1]), set(&[2])] {
            assert_eq!(nu.mass_of(s), ratio(1, 3));
        }
        assert_eq!(nu.mass_of(set(&[1, 2])), ratio(0, 1));
        let nu = ball_set_measure_occ(&uniform(1, 2), 1, &l).unwrap();
        assert_eq!(nu.mass_of(set(&[])), ratio(1, 1));
        let nu = ball_set_measure_ball(&uniform(2, 2), &[1], &l).unwrap();
        assert_eq!(nu.mass_of(set(&[1])), ratio(1, 2));
        assert_eq!(nu.mass_of(set(&[2])), ratio(1, 2));
        let nu = ball_set_measure_ball(&uniform(2, 2), &[0], &l).unwrap();
        assert_eq!(nu.mass_of(set(&[1, 2])), ratio(1, 1));
        let free = ball_set_measure_ball(&uniform(2, 2), &[], &l).unwrap();
        assert_eq!(free, ball_set_measure_occ(&uniform(2, 2), 0, &l).unwrap());
        assert_eq!(free.mass_of(set(&[1])), ratio(1, 4));
        let det = UrnModel::new(vec![vec![ratio(0, 1), ratio(1, 1)]]).unwrap();
        assert_eq!(ball_set_measure_occ(&det, 1, &l), Err(Error::ZeroProbability));
    }

    #[test]
    fn refinement_example() {
        let l = Limits::default();
        let (refined, map) = refine_model(&uniform(2, 2), 1).unwrap();
        assert_eq!(refined.urns(), 3);
        assert_eq!(map.blocks, vec![vec![0], vec![1, 2]]);
        assert!(refinement_consistent(&uniform(2, 2), 1, &l).unwrap());
        let (refined, _) = refine_model(&uniform(2, 3), 0).unwrap();
        assert_eq!(refined.urns(), 6);
        assert!(refine_model(&uniform(2, 2), 2).is_err());
    }
}
