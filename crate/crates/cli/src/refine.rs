//! `negdep refine`: split every urn after the first `d` into private urns.

use negdep_core::urn::{refine_model, refinement_consistent, UrnModel};
use negdep_core::Limits;
use serde_json::{json, Value};

use crate::io::{self, Input};

/// The refined model with its block map. `consistent` is the occupancy
/// pushforward check; the caller refuses to write when it is false.
pub fn refine(model: &UrnModel, d: usize, limits: &Limits) -> Input<(Value, bool)> {
    let (refined, map) = refine_model(model, d)?;
    let consistent = refinement_consistent(model, d, limits)?;
    let blocks: Vec<Vec<usize>> = map
        .blocks
        .iter()
        .map(|b| b.iter().map(|c| c + 1).collect())
        .collect();
    Ok((
        json!({
            "d": d,
            "original_urns": model.urns(),
            "refined_urns": map.refined_urns,
            "blocks": blocks,
            "consistent": consistent,
            "model": io::model(&refined),
        }),
        consistent,
    ))
}
