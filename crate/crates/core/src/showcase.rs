//! Small worked examples and counterexample searches.
//!
//! - [`scp_example`]: two balls, two urns, uniform rows, `d = 1`. The
//!   conditional ball-set measure of the last urn is NMP but not SCP.
//! - [`refinement_example`]: the refinement of the same model with `d = 1`.
//! - [`search_ulc_failure`], [`search_rayleigh_failure`]: scan a list of
//!   models for occupation measures that are not ultra log-concave, or not
//!   Rayleigh. [`ordinary_models`] lists ordinary models (all balls share
//!   one row); [`shared_urn_models`] lists models where each ball picks
//!   between a private urn and one shared urn.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::bits::Subset;
use crate::error::Result;
use crate::limits::Limits;
use crate::measure::{FiniteMeasure, SetMeasure};
use crate::negdep::{check_rayleigh, check_scp, check_ulc, FieldStrategy, PropertyReport, Target, Verdict};
use crate::rational::{ratio, Rational};
use crate::urn::{occ_conditioning, occupation_measure, refine_model, refinement_consistent, Refinement, UrnModel};

#[derive(Debug, Clone)]
pub struct ScpExample {
    pub model: UrnModel,
    pub nu: SetMeasure,
    /// `ν(A | 1 ∉ Z)` for `A` the up-set generated by `{2}`.
    pub given_absent: Rational,
    /// `ν(A | 1 ∈ Z)`.
    pub given_present: Rational,
    pub report: PropertyReport,
}

pub fn scp_example(limits: &Limits) -> Result<ScpExample> {
    let model = UrnModel::new(alloc::vec![alloc::vec![ratio(1, 2), ratio(1, 2)]; 2])?;
    let (nu, _) = occ_conditioning(&model, 1, limits)?;
    let ball1 = Subset::singleton(0);
    let a = [Subset::singleton(1)];
    let given_absent = nu.condition(ball1, Subset::EMPTY)?.upset_probability(&a);
    let given_present = nu.condition(ball1, ball1)?.upset_probability(&a);
    let report = check_scp(&nu);
    Ok(ScpExample {
        model,
        nu,
        given_absent,
        given_present,
        report,
    })
}

#[derive(Debug, Clone)]
pub struct RefinementExample {
    pub model: UrnModel,
    pub d: usize,
    pub refined: UrnModel,
    pub map: Refinement,
    pub consistent: bool,
}

pub fn refinement_example(limits: &Limits) -> Result<RefinementExample> {
    let model = UrnModel::new(alloc::vec![alloc::vec![ratio(1, 2), ratio(1, 2)]; 2])?;
    let d = 1;
    let (refined, map) = refine_model(&model, d)?;
    let consistent = refinement_consistent(&model, d, limits)?;
    Ok(RefinementExample {
        model,
        d,
        refined,
        map,
        consistent,
    })
}

/// A model whose occupation measure fails a check, with the failing report.
#[derive(Debug, Clone)]
pub struct SearchHit {
    pub model: UrnModel,
    pub measure: FiniteMeasure,
    pub report: PropertyReport,
    /// Models examined before (and including) the hit.
    pub examined: usize,
}

impl SearchHit {
    /// The witness replays against the measure.
    pub fn reverifies(&self) -> bool {
        self.report.verdict == Verdict::Fail
            && self
                .report
                .witness
                .as_ref()
                .is_some_and(|w| w.reverify(Target::Measure(&self.measure)))
    }
}

/// Rows for `n` urns with integer weights in `1..=max_weight`, nondecreasing
/// (occupancy is symmetric under relabelling urns), reduced to lowest terms.
pub fn ordinary_rows(n: usize, max_weight: u32) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    let mut w = alloc::vec![1u32; n];
    loop {
        let total: u32 = w.iter().sum();
        let row: Vec<Rational> = w.iter().map(|&x| ratio(x as i64, total as i64)).collect();
        if !out.contains(&row) {
            out.push(row);
        }
        // Next nondecreasing vector.
        let Some(i) = (0..n).rev().find(|&i| w[i] < max_weight) else { break };
        let v = w[i] + 1;
        for x in &mut w[i..] {
            *x = v;
        }
    }
    out
}

/// Ordinary models in search order: `n` in `2..=max_urns`, `m` in
/// `2..=max_balls`, then rows from [`ordinary_rows`].
pub fn ordinary_models(max_balls: usize, max_urns: usize, max_weight: u32) -> Vec<UrnModel> {
    let mut out = Vec::new();
    for n in 2..=max_urns {
        let rows = ordinary_rows(n, max_weight);
        for m in 2..=max_balls {
            for row in &rows {
                out.push(UrnModel::ordinary(m, row.clone()).expect("normalised row"));
            }
        }
    }
    out
}

fn search<F>(models: Vec<UrnModel>, limits: &Limits, mut check: F) -> Result<Option<SearchHit>>
where
    F: FnMut(&FiniteMeasure) -> Result<PropertyReport>,
{
    for (idx, model) in models.into_iter().enumerate() {
        let measure = occupation_measure(&model, limits)?;
        let report = check(&measure)?;
        if report.verdict == Verdict::Fail {
            return Ok(Some(SearchHit {
                model,
                measure,
                report,
                examined: idx + 1,
            }));
        }
    }
    Ok(None)
}

/// Models with `m` balls and `m + 1` urns where ball `i` lands in its own
/// urn `i` with probability `p_i` and in the shared last urn otherwise.
/// The `p_i` run over nondecreasing picks from `probs`.
pub fn shared_urn_models(m: usize, probs: &[Rational]) -> Vec<UrnModel> {
    let mut picks = Vec::new();
    let mut idx = alloc::vec![0usize; m];
    loop {
        picks.push(idx.clone());
        let Some(i) = (0..m).rev().find(|&i| idx[i] + 1 < probs.len()) else { break };
        let v = idx[i] + 1;
        for x in &mut idx[i..] {
            *x = v;
        }
    }
    picks
        .into_iter()
        .map(|pick| {
            let rows = pick
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let mut row = alloc::vec![Rational::zero(); m + 1];
                    row[i] = probs[k].clone();
                    row[m] = Rational::one() - &probs[k];
                    row
                })
                .collect();
            UrnModel::new(rows).expect("rows are distributions")
        })
        .collect()
}

/// First model in `models` whose occupation measure is not ultra log-concave.
pub fn search_ulc_failure(models: Vec<UrnModel>, limits: &Limits) -> Result<Option<SearchHit>> {
    search(models, limits, check_ulc)
}

/// First model in `models` whose occupation measure, tilted by some field
/// in `strategy`, has a positively correlated pair of coordinates.
pub fn search_rayleigh_failure(models: Vec<UrnModel>, strategy: &FieldStrategy, limits: &Limits) -> Result<Option<SearchHit>> {
    search(models, limits, |mu| check_rayleigh(mu, strategy))
}
