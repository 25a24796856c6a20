//! `negdep sweep`: run theorem checks over a family of models and graphs.
//!
//! Config (JSON object, every field optional):
//!
//! ```json
//! {
//!   "balls": [1, 3], "urns": [1, 3],
//!   "rows": "grid",
//!   "random": 50,
//!   "properties": ["cna-occ", "cna-enum", "nmp-occ", "nmp-ball", "cert", "refine", "orient-nmp"],
//!   "graphs": {"count": 100, "max_vertices": 4, "max_edges": 5},
//!   "seed": 0
//! }
//! ```
//!
//! `rows` is `"grid"` (models over [`negdep_core::family::grid_rows`]) or `"none"`. `random`
//! adds seeded random models with two or three balls and urns.

use negdep_core::bipartite::{certify_level, weight_g};
use negdep_core::bits::Subset;
use negdep_core::family::{grid_models, random_models};
use negdep_core::measure::SetMeasure;
use negdep_core::negdep::{check_cfm, check_cna, check_cnc, check_nmp, PropertyReport, Verdict};
use negdep_core::orient::{random_multigraph, verify_orientation_nmp, AdmissibilitySpec};
use negdep_core::urn::{
    ball_set_measure_ball, ball_set_measure_occ, enumeration_measure, occupation_measure, refine_model,
    refinement_consistent, UrnModel,
};
use negdep_core::{Error, Limits};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde_json::{json, Value};

use crate::io::{self, Input, InputError};

const PROPERTIES: [&str; 7] = ["cna-occ", "cna-enum", "nmp-occ", "nmp-ball", "cert", "refine", "orient-nmp"];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub balls: (usize, usize),
    pub urns: (usize, usize),
    pub grid: bool,
    pub random: usize,
    pub properties: Vec<String>,
    pub graphs: usize,
    pub max_vertices: usize,
    pub max_edges: usize,
    pub seed: u64,
}

fn range(v: Option<&Value>, what: &str, default: (usize, usize)) -> Input<(usize, usize)> {
    let Some(v) = v else { return Ok(default) };
    let pair: Vec<usize> = serde_json::from_value(v.clone())
        .map_err(|_| InputError::new(format!("{what} must be [lo, hi]")))?;
    match pair[..] {
        [lo, hi] if 1 <= lo && lo <= hi => Ok((lo, hi)),
        _ => Err(InputError::new(format!("{what} must be [lo, hi] with 1 <= lo <= hi"))),
    }
}

impl SweepConfig {
    pub fn from_json(v: &Value, seed: Option<u64>) -> Input<SweepConfig> {
        let obj = v.as_object().ok_or_else(|| InputError::new("sweep config must be a JSON object"))?;
        for key in obj.keys() {
            if !["balls", "urns", "rows", "random", "properties", "graphs", "seed"].contains(&key.as_str()) {
                return Err(InputError::new(format!("unknown config field {key:?}")));
            }
        }
        let grid = match obj.get("rows").map(|r| r.as_str()) {
            None | Some(Some("grid")) => true,
            Some(Some("none")) => false,
            _ => return Err(InputError::new("\"rows\" must be \"grid\" or \"none\"")),
        };
        let random = match obj.get("random") {
            None => 0,
            Some(r) => io::as_usize(r, "random")?,
        };
        let properties: Vec<String> = match obj.get("properties") {
            None => PROPERTIES.iter().map(|s| s.to_string()).collect(),
            Some(p) => serde_json::from_value(p.clone())
                .map_err(|_| InputError::new("\"properties\" must be a list of strings"))?,
        };
        if let Some(bad) = properties.iter().find(|p| !PROPERTIES.contains(&p.as_str())) {
            return Err(InputError::new(format!("unknown sweep property {bad:?}")));
        }
        let graphs = obj.get("graphs");
        let g = |key: &str, default: usize| -> Input<usize> {
            match graphs.and_then(|g| g.get(key)) {
                None => Ok(default),
                Some(v) => io::as_usize(v, key),
            }
        };
        let file_seed = match obj.get("seed") {
            None => 0,
            Some(s) => s.as_u64().ok_or_else(|| InputError::new("\"seed\" must be a nonnegative integer"))?,
        };
        let config = SweepConfig {
            balls: range(obj.get("balls"), "balls", (1, 3))?,
            urns: range(obj.get("urns"), "urns", (1, 3))?,
            grid,
            random,
            properties,
            graphs: g("count", 100)?,
            max_vertices: g("max_vertices", 4)?,
            max_edges: g("max_edges", 5)?,
            seed: seed.unwrap_or(file_seed),
        };
        if config.max_vertices < 2 || config.max_edges < 1 {
            return Err(InputError::new("graphs need max_vertices >= 2 and max_edges >= 1"));
        }
        Ok(config)
    }

    fn wants(&self, p: &str) -> bool {
        self.properties.iter().any(|q| q == p)
    }
}

/// Tally for the summary, plus the violations and capped cases themselves.
#[derive(Default)]
struct Tally {
    checks: u64,
    violations: Vec<Value>,
    capped: Vec<Value>,
}

impl Tally {
    fn record(&mut self, instance: &str, property: &str, detail: Value, verdict: Verdict, note: Option<String>) {
        self.checks += 1;
        match verdict {
            Verdict::Fail => self.violations.push(json!({ "instance": instance, "property": property, "detail": detail })),
            Verdict::Inconclusive => self.capped.push(json!({
                "instance": instance, "property": property, "detail": detail, "note": note,
            })),
            Verdict::Pass | Verdict::PassSampled => {}
        }
    }

    fn report(&mut self, instance: &str, property: &str, detail: Value, r: &PropertyReport) {
        let detail = match &r.witness {
            Some(w) => json!({ "case": detail, "witness": io::witness(w) }),
            None => detail,
        };
        self.record(instance, property, detail, r.verdict, r.note.clone());
    }

    /// Budget errors are recorded as capped; other errors propagate.
    fn guard<T>(&mut self, instance: &str, property: &str, detail: &Value, r: Result<T, Error>) -> Input<Option<T>> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e @ (Error::BudgetExceeded { .. } | Error::CapExceeded(_))) => {
                self.record(instance, property, detail.clone(), Verdict::Inconclusive, Some(e.to_string()));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    }
}

/// Count vectors `a` of length `1..n` with entries summing to at most `m`.
fn ball_specs(m: usize, n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for len in 1..n {
        let mut a = vec![0u32; len];
        loop {
            if a.iter().sum::<u32>() as usize <= m {
                out.push(a.clone());
            }
            let Some(i) = (0..len).rev().find(|&i| (a[i] as usize) < m) else { break };
            a[i] += 1;
            for x in &mut a[i + 1..] {
                *x = 0;
            }
        }
    }
    out
}

/// Conditional ball-set measures of a model, skipping null conditionings.
fn conditionals(model: &UrnModel, limits: &Limits) -> Result<Vec<(Value, SetMeasure)>, Error> {
    let mut out = Vec::new();
    for d in 0..model.urns() {
        match ball_set_measure_occ(model, d, limits) {
            Ok(nu) => out.push((json!({ "d": d }), nu)),
            Err(Error::ZeroProbability) => {}
            Err(e) => return Err(e),
        }
    }
    for a in ball_specs(model.balls(), model.urns()) {
        match ball_set_measure_ball(model, &a, limits) {
            Ok(nu) => out.push((json!({ "a": a }), nu)),
            Err(Error::ZeroProbability) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn sweep_model(key: &str, model: &UrnModel, config: &SweepConfig, limits: &Limits, t: &mut Tally) -> Input<()> {
    let none = Value::Null;
    if config.wants("cna-occ") {
        if let Some(mu) = t.guard(key, "cna-occ", &none, occupation_measure(model, limits))? {
            t.report(key, "cna-occ", none.clone(), &check_cna(&mu, limits));
        }
    }
    if config.wants("cna-enum") {
        if let Some(mu) = t.guard(key, "cna-enum", &none, enumeration_measure(model, limits))? {
            t.report(key, "cna-enum", none.clone(), &check_cna(&mu, limits));
        }
    }
    let wants_sets = config.wants("nmp-occ") || config.wants("nmp-ball") || config.wants("cert");
    let sets = if wants_sets {
        t.guard(key, "conditionals", &none, conditionals(model, limits))?.unwrap_or_default()
    } else {
        Vec::new()
    };
    for (spec, nu) in &sets {
        let prop = if spec.get("d").is_some() { "nmp-occ" } else { "nmp-ball" };
        if config.wants(prop) {
            t.report(key, prop, spec.clone(), &check_nmp(nu));
        }
        if config.wants("cert") {
            for x in Subset::full(model.balls()).subsets().filter(|x| x.len() % 2 == 1) {
                let detail = json!({ "spec": spec, "x": io::subset(x) });
                let cert = certify_level(weight_g(nu, x)?)?;
                t.record(key, "cert", detail, cert.verdict(), None);
            }
        }
    }
    if config.wants("refine") {
        for d in 0..model.urns() {
            let detail = json!({ "d": d });
            let (refined, _) = refine_model(model, d)?;
            let Some(mu) = t.guard(key, "refine", &detail, occupation_measure(&refined, limits))? else { continue };
            t.report(key, "refine-cnc", detail.clone(), &check_cnc(&mu));
            if let Some(r) = t.guard(key, "refine-cfm", &detail, check_cfm(&mu, limits))? {
                t.report(key, "refine-cfm", detail.clone(), &r);
            }
            t.report(key, "refine-cna", detail.clone(), &check_cna(&mu, limits));
            if let Some(ok) = t.guard(key, "refine-blocks", &detail, refinement_consistent(model, d, limits))? {
                let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
                t.record(key, "refine-blocks", detail, verdict, None);
            }
        }
    }
    Ok(())
}

fn sweep_graphs(config: &SweepConfig, t: &mut Tally) -> Input<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut instances = 0;
    for idx in 0..config.graphs {
        let v = 2 + (rng.next_u32() as usize) % (config.max_vertices - 1);
        let e = 1 + (rng.next_u32() as usize) % config.max_edges;
        let g = random_multigraph(&mut rng, v, e);
        if g.x_set().len() % 2 == 0 {
            continue;
        }
        instances += 1;
        let key = format!("graph:{idx}");
        let mut specs: Vec<AdmissibilitySpec> = (0..v).map(|d| AdmissibilitySpec::Occ { d }).collect();
        for len in 1..v {
            if (0..len).all(|i| g.degree(i) % 2 == 0) {
                specs.push(AdmissibilitySpec::Ball {
                    a: (0..len).map(|i| (g.degree(i) / 2) as u32).collect(),
                });
            }
        }
        for spec in specs {
            let detail = json!({
                "graph": io::graph(&g),
                "spec": match &spec {
                    AdmissibilitySpec::Occ { d } => json!({ "d": d }),
                    AdmissibilitySpec::Ball { a } => json!({ "a": a }),
                },
            });
            let cert = verify_orientation_nmp(&g, &spec)?;
            t.record(&key, "orient-nmp", detail, cert.verdict(), None);
        }
    }
    Ok(instances)
}

pub fn sweep(config: &SweepConfig, limits: &Limits) -> Input<(Value, Verdict)> {
    let mut models: Vec<(String, UrnModel)> = Vec::new();
    let in_range = |m: &UrnModel| {
        (config.balls.0..=config.balls.1).contains(&m.balls()) && (config.urns.0..=config.urns.1).contains(&m.urns())
    };
    if config.grid {
        for (i, m) in grid_models(config.balls.1, config.urns.1).into_iter().enumerate() {
            if in_range(&m) {
                models.push((format!("grid:{i}"), m));
            }
        }
    }
    for (i, m) in random_models(config.random, config.seed).into_iter().enumerate() {
        models.push((format!("random:{i}"), m));
    }
    let mut t = Tally::default();
    for (key, model) in &models {
        sweep_model(key, model, config, limits, &mut t)?;
    }
    let graphs = if config.wants("orient-nmp") { sweep_graphs(config, &mut t)? } else { 0 };
    let verdict = if !t.violations.is_empty() {
        Verdict::Fail
    } else if !t.capped.is_empty() {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let summary = json!({
        "seed": config.seed,
        "properties": config.properties,
        "models": models.len(),
        "graphs": graphs,
        "checks": t.checks,
        "violations": t.violations,
        "capped": t.capped,
        "verdict": verdict.as_str(),
    });
    Ok((summary, verdict))
}
