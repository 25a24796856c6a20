//! `negdep check`: run property checkers on one model, and replay witnesses.

use negdep_core::measure::{FiniteMeasure, SetMeasure};
use negdep_core::negdep::{
    check_cfm, check_cna, check_cnc, check_fm, check_na, check_nc, check_nmp, check_rayleigh, check_scp,
    check_ulc, FieldStrategy, Property, PropertyReport, Target, Verdict,
};
use negdep_core::urn::{
    ball_set_measure_ball, ball_set_measure_occ, enumeration_measure, interval_measure, occupation_measure,
    refine_model, IntervalSpec, UrnModel,
};
use negdep_core::{Error, Limits};
use serde_json::{json, Map, Value};

use crate::io::{self, Input, InputError};

/// Which measure a property is evaluated on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TargetSpec {
    /// Occupation measure `μ^occ`.
    Occ,
    /// Enumeration measure `μ`.
    Enum,
    Interval(Vec<Vec<u32>>),
    /// Occupation measure of the model refined after the first `d` urns.
    Refined(usize),
    /// Ball set of the last urn given that urns `1..=d` are occupied.
    BallSetOcc(usize),
    /// Ball set of the last urn given `B_i = a_i` for `i <= len(a)`.
    BallSetBall(Vec<u32>),
}

pub enum Built {
    Measure(FiniteMeasure),
    Sets(SetMeasure),
}

impl Built {
    fn target(&self) -> Target<'_> {
        match self {
            Built::Measure(mu) => Target::Measure(mu),
            Built::Sets(nu) => Target::Sets(nu),
        }
    }
}

impl TargetSpec {
    pub fn to_json(&self) -> Value {
        match self {
            TargetSpec::Occ => json!({ "kind": "occ" }),
            TargetSpec::Enum => json!({ "kind": "enum" }),
            TargetSpec::Interval(c) => json!({ "kind": "interval", "cutpoints": c }),
            TargetSpec::Refined(d) => json!({ "kind": "refined", "d": d }),
            TargetSpec::BallSetOcc(d) => json!({ "kind": "ball-set-occ", "d": d }),
            TargetSpec::BallSetBall(a) => json!({ "kind": "ball-set-ball", "a": a }),
        }
    }

    pub fn from_json(v: &Value) -> Input<TargetSpec> {
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or_default();
        let num = |key: &str| -> Input<usize> {
            io::as_usize(v.get(key).ok_or_else(|| InputError::new(format!("target needs {key:?}")))?, key)
        };
        let list = |key: &str| -> Input<Vec<u32>> {
            serde_json::from_value(v.get(key).cloned().unwrap_or(Value::Null))
                .map_err(|_| InputError::new(format!("target {key:?} must be a list of counts")))
        };
        Ok(match kind {
            "occ" => TargetSpec::Occ,
            "enum" => TargetSpec::Enum,
            "interval" => TargetSpec::Interval(
                serde_json::from_value(v.get("cutpoints").cloned().unwrap_or(Value::Null))
                    .map_err(|_| InputError::new("target \"cutpoints\" must be a list of lists"))?,
            ),
            "refined" => TargetSpec::Refined(num("d")?),
            "ball-set-occ" => TargetSpec::BallSetOcc(num("d")?),
            "ball-set-ball" => TargetSpec::BallSetBall(list("a")?),
            other => return Err(InputError::new(format!("unknown target kind {other:?}"))),
        })
    }

    pub fn build(&self, model: &UrnModel, limits: &Limits) -> Input<Built> {
        Ok(match self {
            TargetSpec::Occ => Built::Measure(occupation_measure(model, limits)?),
            TargetSpec::Enum => Built::Measure(enumeration_measure(model, limits)?),
            TargetSpec::Interval(c) => {
                let spec = IntervalSpec::new(model.balls(), c.clone())?;
                Built::Measure(interval_measure(model, &spec, limits)?)
            }
            TargetSpec::Refined(d) => {
                let (refined, _) = refine_model(model, *d)?;
                Built::Measure(occupation_measure(&refined, limits)?)
            }
            TargetSpec::BallSetOcc(d) => Built::Sets(ball_set_measure_occ(model, *d, limits)?),
            TargetSpec::BallSetBall(a) => Built::Sets(ball_set_measure_ball(model, a, limits)?),
        })
    }
}

/// Measure flags shared by `check` invocations.
#[derive(Debug, Clone, Default)]
pub struct MeasureFlags {
    pub d: Option<usize>,
    pub a: Option<Vec<u32>>,
    pub cutpoints: Option<Vec<Vec<u32>>>,
}

/// Parse `"1,2,0"`.
pub fn parse_list(text: &str) -> Input<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| InputError::new(format!("bad list entry {t:?}")))
        })
        .collect()
}

/// Parse per-urn cutpoint lists, `"0,1,3;0,2,3"`.
pub fn parse_cutpoints(text: &str) -> Input<Vec<Vec<u32>>> {
    text.split(';').map(parse_list).collect()
}

/// Parse one `--prop` token into a property and the measure it runs on.
///
/// Tokens are `name[-measure]`. Names: `na nc cna cnc fm cfm ulc rayleigh`
/// (measures `occ` (default), `enum`, `interval`, `refined`) and `nmp scp`
/// (measures `occ`, needing `--d`, or `ball`, needing `--a`; with no suffix
/// `--a` wins over `--d`).
pub fn parse_prop(token: &str, flags: &MeasureFlags) -> Input<(Property, TargetSpec)> {
    let token = token.trim().to_ascii_lowercase();
    let (name, suffix) = match token.split_once('-') {
        Some((n, s)) => (n.to_string(), Some(s.to_string())),
        None => (token.clone(), None),
    };
    let need_d = || flags.d.ok_or_else(|| InputError::new(format!("{token} needs --d")));
    let property = match name.as_str() {
        "na" => Property::Na,
        "nc" => Property::Nc,
        "cna" => Property::Cna,
        "cnc" => Property::Cnc,
        "fm" => Property::Fm,
        "cfm" => Property::Cfm,
        "ulc" => Property::Ulc,
        "rayleigh" => Property::Rayleigh,
        "nmp" => Property::Nmp,
        "scp" => Property::Scp,
        _ => return Err(InputError::new(format!("unknown property {token:?}"))),
    };
    let target = if matches!(property, Property::Nmp | Property::Scp) {
        match (suffix.as_deref(), &flags.a) {
            (Some("occ"), _) => TargetSpec::BallSetOcc(need_d()?),
            (Some("ball"), Some(a)) | (None, Some(a)) => TargetSpec::BallSetBall(a.clone()),
            (Some("ball"), None) => return Err(InputError::new(format!("{token} needs --a"))),
            (None, None) => TargetSpec::BallSetOcc(
                flags.d.ok_or_else(|| InputError::new(format!("{token} needs --d or --a")))?,
            ),
            (Some(other), _) => return Err(InputError::new(format!("unknown measure {other:?} for {name}"))),
        }
    } else {
        match suffix.as_deref() {
            None | Some("occ") => TargetSpec::Occ,
            Some("enum") => TargetSpec::Enum,
            Some("interval") => TargetSpec::Interval(
                flags
                    .cutpoints
                    .clone()
                    .ok_or_else(|| InputError::new(format!("{token} needs --cutpoints")))?,
            ),
            Some("refined") => TargetSpec::Refined(need_d()?),
            Some(other) => return Err(InputError::new(format!("unknown measure {other:?} for {name}"))),
        }
    };
    Ok((property, target))
}

/// Run one checker. Budget and cap errors become an inconclusive report;
/// anything else is an input error.
pub fn run_property(property: Property, built: &Built, limits: &Limits, strategy: &FieldStrategy) -> Input<PropertyReport> {
    let result = match (property, built) {
        (Property::Na, Built::Measure(mu)) => Ok(check_na(mu, limits)),
        (Property::Cna, Built::Measure(mu)) => Ok(check_cna(mu, limits)),
        (Property::Nc, Built::Measure(mu)) => Ok(check_nc(mu)),
        (Property::Cnc, Built::Measure(mu)) => Ok(check_cnc(mu)),
        (Property::Fm, Built::Measure(mu)) => check_fm(mu, limits),
        (Property::Cfm, Built::Measure(mu)) => check_cfm(mu, limits),
        (Property::Ulc, Built::Measure(mu)) => check_ulc(mu),
        (Property::Rayleigh, Built::Measure(mu)) => check_rayleigh(mu, strategy),
        (Property::Nmp, Built::Sets(nu)) => Ok(check_nmp(nu)),
        (Property::Scp, Built::Sets(nu)) => Ok(check_scp(nu)),
        _ => return Err(InputError::new(format!("{property} does not apply to this measure"))),
    };
    match result {
        Ok(r) => Ok(r),
        Err(e @ (Error::BudgetExceeded { .. } | Error::CapExceeded(_))) => Ok(PropertyReport {
            property,
            verdict: Verdict::Inconclusive,
            witness: None,
            note: Some(e.to_string()),
        }),
        Err(e) => Err(e.into()),
    }
}

pub struct CheckOutcome {
    pub report: Value,
    /// `(file stem suffix, witness file)` for every failing property.
    pub witnesses: Vec<(String, Value)>,
    pub verdict: Verdict,
}

pub fn check(model: &UrnModel, props: &[(Property, TargetSpec)], limits: &Limits, strategy: &FieldStrategy) -> Input<CheckOutcome> {
    let mut results = Vec::new();
    let mut witnesses = Vec::new();
    let mut verdict = Verdict::Pass;
    for (property, spec) in props {
        let built = spec.build(model, limits)?;
        let r = run_property(*property, &built, limits, strategy)?;
        verdict = verdict.merge(r.verdict);
        let mut entry = io::report(&r);
        entry.insert("target".into(), spec.to_json());
        if let Some(w) = &r.witness {
            let kind = spec.to_json()["kind"].as_str().unwrap_or_default().to_string();
            witnesses.push((
                format!("{}-{}", property.name().to_ascii_lowercase(), kind),
                witness_file(model, *property, spec, &built, &io::witness(w)),
            ));
        }
        results.push(Value::Object(entry));
    }
    let report = json!({
        "model": io::model(model),
        "results": results,
        "verdict": verdict.as_str(),
    });
    Ok(CheckOutcome { report, witnesses, verdict })
}

fn witness_file(model: &UrnModel, property: Property, spec: &TargetSpec, built: &Built, witness: &Value) -> Value {
    let measure = match built {
        Built::Measure(mu) => io::finite_measure(mu),
        Built::Sets(nu) => io::set_measure(nu),
    };
    json!({
        "model": io::model(model),
        "measure": measure,
        "property": property.name(),
        "target": spec.to_json(),
        "witness": witness,
    })
}

/// Replay a witness file, or every witness in a report file. Returns the
/// replay summary and whether every witness re-verified.
pub fn replay(file: &Value, limits: &Limits) -> Input<(Value, bool)> {
    let model = io::parse_model(file.get("model").ok_or_else(|| InputError::new("replay file has no model"))?)?;
    let mut entries: Vec<Map<String, Value>> = Vec::new();
    if let Some(results) = file.get("results").and_then(Value::as_array) {
        for r in results {
            if r.get("witness").is_some_and(|w| !w.is_null()) {
                entries.push(r.as_object().cloned().unwrap_or_default());
            }
        }
    } else if file.get("witness").is_some() {
        entries.push(file.as_object().cloned().unwrap_or_default());
    } else {
        return Err(InputError::new("replay file has neither \"witness\" nor \"results\""));
    }
    let mut all = true;
    let mut out = Vec::new();
    for e in entries {
        let spec = TargetSpec::from_json(e.get("target").unwrap_or(&Value::Null))?;
        let w = io::parse_witness(&e["witness"])?;
        let built = spec.build(&model, limits)?;
        let ok = w.reverify(built.target());
        all &= ok;
        out.push(json!({
            "property": e.get("property").cloned().unwrap_or(Value::Null),
            "target": spec.to_json(),
            "confirmed": ok,
        }));
    }
    Ok((json!({ "replayed": out, "all_confirmed": all }), all))
}
