//! `negdep orient`: tables of admissible orientation counts.

use negdep_core::bits::Subset;
use negdep_core::orient::{orientation_profile, AdmissibilitySpec, MultiGraph, OrientationCounter};
use negdep_core::{Error, Limits};
use serde_json::{json, Value};

use crate::io::{self, Input, InputError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Brute,
    Rec,
    Both,
}

impl Mode {
    pub fn parse(text: &str) -> Input<Mode> {
        match text {
            "brute" => Ok(Mode::Brute),
            "rec" => Ok(Mode::Rec),
            "both" => Ok(Mode::Both),
            _ => Err(InputError::new(format!("unknown mode {text:?} (brute, rec, both)"))),
        }
    }
}

/// Largest `|X(G)|` for which a full table is printed.
const MAX_TABLE_BITS: usize = 20;

pub struct OrientOutcome {
    pub report: Value,
    pub mismatch: bool,
}

fn count(c: u128) -> Value {
    u64::try_from(c).map_or_else(|_| json!(c.to_string()), |c| json!(c))
}

pub fn orient(g: &MultiGraph, spec: &AdmissibilitySpec, mode: Mode, limits: &Limits) -> Input<OrientOutcome> {
    spec.validate(g)?;
    let x = g.x_set();
    if x.len() > MAX_TABLE_BITS {
        return Err(InputError::new(format!("|X(G)| = {} is too large for a table", x.len())));
    }
    let mut note = None;
    if let AdmissibilitySpec::Ball { a } = spec {
        let bad: Vec<usize> = (0..a.len()).filter(|&i| g.degree(i) != 2 * a[i] as usize).collect();
        if !bad.is_empty() {
            let list: Vec<String> = bad.iter().map(|i| (i + 1).to_string()).collect();
            note = Some(format!(
                "deg(v_i) != 2 a_i at vertices {}; no orientation is admissible",
                list.join(", ")
            ));
        }
    }
    let sets: Vec<Subset> = x.subsets().collect();
    let brute = if mode != Mode::Rec {
        let profile = orientation_profile(g, spec, limits).map_err(|e| match e {
            Error::BudgetExceeded { .. } => InputError::new(format!("brute force over budget: {e}")),
            other => other.into(),
        })?;
        Some(sets.iter().map(|s| profile.get(s).copied().unwrap_or(0)).collect::<Vec<_>>())
    } else {
        None
    };
    let rec = if mode != Mode::Brute {
        let mut counter = OrientationCounter::new();
        Some(sets.iter().map(|&s| counter.count(g, spec, s)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let mut mismatch = false;
    let table: Vec<Value> = sets
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let mut row = serde_json::Map::new();
            row.insert("s".into(), io::subset(s));
            match (&brute, &rec) {
                (Some(b), Some(r)) => {
                    row.insert("brute".into(), count(b[k]));
                    row.insert("rec".into(), count(r[k]));
                    mismatch |= b[k] != r[k];
                }
                (Some(b), None) => {
                    row.insert("count".into(), count(b[k]));
                }
                (None, Some(r)) => {
                    row.insert("count".into(), count(r[k]));
                }
                (None, None) => unreachable!(),
            }
            Value::Object(row)
        })
        .collect();
    let spec_json = match spec {
        AdmissibilitySpec::Occ { d } => json!({ "d": d }),
        AdmissibilitySpec::Ball { a } => json!({ "a": a }),
    };
    let mode_name = match mode {
        Mode::Brute => "brute",
        Mode::Rec => "rec",
        Mode::Both => "both",
    };
    let report = json!({
        "graph": io::graph(g),
        "spec": spec_json,
        "mode": mode_name,
        "x": io::subset(x),
        "table": table,
        "agree": if mode == Mode::Both { json!(!mismatch) } else { Value::Null },
        "note": note,
    });
    Ok(OrientOutcome { report, mismatch })
}
