//! `negdep paper-examples`: the SCP counterexample, a refinement, and the
//! ULC / Rayleigh counterexample searches.

use negdep_core::negdep::FieldStrategy;
use negdep_core::showcase::{
    ordinary_models, refinement_example, scp_example, search_rayleigh_failure,
    search_ulc_failure, shared_urn_models, SearchHit,
};
use negdep_core::urn::UrnModel;
use negdep_core::Limits;
use serde_json::{json, Value};

use crate::io::{self, Input};

fn hit(label: &str, models: Vec<UrnModel>, found: Option<SearchHit>) -> Value {
    let total = models.len();
    match found {
        Some(h) => json!({
            "search": label,
            "models": total,
            "examined": h.examined,
            "found": true,
            "model": io::model(&h.model),
            "report": Value::Object(io::report(&h.report)),
            "reverified": h.reverifies(),
        }),
        None => json!({
            "search": label,
            "models": total,
            "examined": total,
            "found": false,
        }),
    }
}

/// Returns the report and whether the fixed values came out as expected.
pub fn showcase(seed: u64, limits: &Limits) -> Input<(Value, bool)> {
    let scp = scp_example(limits)?;
    let refinement = refinement_example(limits)?;
    let half = negdep_core::rational::ratio(1, 2);
    let zero = negdep_core::rational::ratio(0, 1);
    let reproduced = scp.given_absent == half && scp.given_present == zero && refinement.consistent;

    let ordinary = ordinary_models(6, 4, 4);
    let ulc_ordinary = search_ulc_failure(ordinary.clone(), limits)?;
    let probs: Vec<_> = [(1, 5), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4), (4, 5)]
        .iter()
        .map(|&(p, q)| negdep_core::rational::ratio(p, q))
        .collect();
    let generalized = shared_urn_models(3, &probs);
    let ulc_generalized = search_ulc_failure(generalized.clone(), limits)?;
    let strategy = FieldStrategy { seed, ..FieldStrategy::default() };
    let rayleigh = search_rayleigh_failure(ordinary.clone(), &strategy, limits)?;

    let report = json!({
        "scp": {
            "model": io::model(&scp.model),
            "d": 1,
            "upset": [[2]],
            "given_ball1_absent": io::rat(&scp.given_absent),
            "given_ball1_present": io::rat(&scp.given_present),
            "measure": io::set_measure(&scp.nu),
            "check": Value::Object(io::report(&scp.report)),
        },
        "refinement": {
            "model": io::model(&refinement.model),
            "d": refinement.d,
            "refined_urns": refinement.map.refined_urns,
            "blocks": refinement.map.blocks.iter().map(|b| b.iter().map(|c| c + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "refined": io::model(&refinement.refined),
            "consistent": refinement.consistent,
        },
        "ulc_ordinary": hit("ordinary models, m <= 6, n <= 4, integer weights 1..=4", ordinary.clone(), ulc_ordinary),
        "ulc_generalized": hit("m = 3, n = 4, ball i in urn i with p_i in {1/5,1/4,1/3,1/2,2/3,3/4,4/5}, else urn 4", generalized, ulc_generalized),
        "rayleigh_ordinary": hit("ordinary models, m <= 6, n <= 4, integer weights 1..=4", ordinary, rayleigh),
        "seed": seed,
    });
    Ok((report, reproduced))
}
