//! JSON shapes for models, graphs, measures, witnesses and reports.
//!
//! Rationals are written as `"p/q"` strings. On input, bare integers are
//! accepted too. Balls, urns, coordinates, edges and set elements are
//! 1-based on the wire and 0-based inside the library.

use std::fs;

use negdep_core::bits::Subset;
use negdep_core::measure::{ExternalField, FiniteMeasure, SetMeasure, UpSet};
use negdep_core::negdep::{PropertyReport, Witness};
use negdep_core::orient::MultiGraph;
use negdep_core::rational::{self, Rational};
use negdep_core::urn::UrnModel;
use serde_json::{json, Map, Value};

/// An input problem: bad file, bad flag, bad shape. Maps to exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl InputError {
    pub fn new(msg: impl Into<String>) -> Self {
        InputError(msg.into())
    }
}

impl From<negdep_core::Error> for InputError {
    fn from(e: negdep_core::Error) -> Self {
        InputError(e.to_string())
    }
}

pub type Input<T> = Result<T, InputError>;

pub fn read_json(path: &str) -> Input<Value> {
    let text = fs::read_to_string(path).map_err(|e| InputError::new(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| InputError::new(format!("{path}: {e}")))
}

pub fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("values serialize");
    s.push('\n');
    s
}

/// Write to `out`, or to stdout when `out` is `None`.
pub fn emit(value: &Value, out: Option<&str>) -> Input<()> {
    let text = render(value);
    match out {
        Some(path) => fs::write(path, text).map_err(|e| InputError::new(format!("{path}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// scalars

pub fn rat(v: &Rational) -> Value {
    Value::String(rational::format(v))
}

pub fn parse_rat(v: &Value) -> Input<Rational> {
    match v {
        Value::String(s) => rational::parse(s).ok_or_else(|| InputError::new(format!("not a rational: {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(rational::int)
            .ok_or_else(|| InputError::new(format!("not an integer: {n}"))),
        other => Err(InputError::new(format!("not a rational: {other}"))),
    }
}

fn field<'a>(obj: &'a Value, key: &str) -> Input<&'a Value> {
    obj.get(key).ok_or_else(|| InputError::new(format!("missing field {key:?}")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Input<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| InputError::new(format!("{what} must be an array")))
}

pub fn as_usize(v: &Value, what: &str) -> Input<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| InputError::new(format!("{what} must be a nonnegative integer")))
}

fn as_u32_list(v: &Value, what: &str) -> Input<Vec<u32>> {
    as_array(v, what)?
        .iter()
        .map(|x| as_usize(x, what).map(|x| x as u32))
        .collect()
}

/// 1-based element list.
pub fn subset(s: Subset) -> Value {
    Value::Array(s.iter().map(|i| json!(i + 1)).collect())
}

pub fn parse_subset(v: &Value) -> Input<Subset> {
    let items = as_array(v, "set")?;
    let mut idx = Vec::new();
    for x in items {
        let i = as_usize(x, "set element")?;
        if i == 0 || i > 64 {
            return Err(InputError::new("set elements are 1-based and at most 64"));
        }
        idx.push(i - 1);
    }
    Ok(Subset::from_indices(idx))
}

fn subsets(sets: &[Subset]) -> Value {
    Value::Array(sets.iter().map(|&s| subset(s)).collect())
}

fn parse_subsets(v: &Value) -> Input<Vec<Subset>> {
    as_array(v, "set list")?.iter().map(parse_subset).collect()
}

fn rats(values: &[Rational]) -> Value {
    Value::Array(values.iter().map(rat).collect())
}

fn parse_rats(v: &Value) -> Input<Vec<Rational>> {
    as_array(v, "rational list")?.iter().map(parse_rat).collect()
}

// ---------------------------------------------------------------------------
// models and graphs

pub fn model(m: &UrnModel) -> Value {
    json!({
        "balls": m.balls(),
        "urns": m.urns(),
        "probs": m.probs().iter().map(|row| rats(row)).collect::<Vec<_>>(),
    })
}

pub fn parse_model(v: &Value) -> Input<UrnModel> {
    let rows = as_array(field(v, "probs")?, "probs")?;
    let probs = rows.iter().map(parse_rats).collect::<Input<Vec<_>>>()?;
    let model = UrnModel::new(probs)?;
    if let Some(b) = v.get("balls") {
        if as_usize(b, "balls")? != model.balls() {
            return Err(InputError::new("\"balls\" does not match the number of rows"));
        }
    }
    if let Some(n) = v.get("urns") {
        if as_usize(n, "urns")? != model.urns() {
            return Err(InputError::new("\"urns\" does not match the row length"));
        }
    }
    Ok(model)
}

pub fn graph(g: &MultiGraph) -> Value {
    json!({
        "vertices": g.vertices(),
        "edges": g.edges().iter().map(|&(i, j)| json!([i + 1, j + 1])).collect::<Vec<_>>(),
    })
}

pub fn parse_graph(v: &Value) -> Input<MultiGraph> {
    let n = as_usize(field(v, "vertices")?, "vertices")?;
    let mut edges = Vec::new();
    for e in as_array(field(v, "edges")?, "edges")? {
        let ends = as_array(e, "edge")?;
        if ends.len() != 2 {
            return Err(InputError::new("an edge has exactly two endpoints"));
        }
        let i = as_usize(&ends[0], "endpoint")?;
        let j = as_usize(&ends[1], "endpoint")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(InputError::new(format!("edge [{i}, {j}] has an endpoint outside 1..={n}")));
        }
        if i > j {
            return Err(InputError::new(format!("edge [{i}, {j}] must be written with i <= j")));
        }
        edges.push((i - 1, j - 1));
    }
    Ok(MultiGraph::new(n, edges)?)
}

// ---------------------------------------------------------------------------
// measures

pub fn finite_measure(mu: &FiniteMeasure) -> Value {
    Value::Array(
        mu.iter()
            .map(|(p, w)| json!({ "point": p, "mass": rat(w) }))
            .collect(),
    )
}

pub fn set_measure(nu: &SetMeasure) -> Value {
    Value::Array(
        nu.iter()
            .map(|(s, w)| json!({ "set": subset(*s), "mass": rat(w) }))
            .collect(),
    )
}

fn upset(a: &UpSet) -> Value {
    json!({ "bound": a.bound(), "minimal": a.minimal_elements() })
}

fn parse_upset(v: &Value) -> Input<UpSet> {
    let bound = as_u32_list(field(v, "bound")?, "bound")?;
    let minimal = as_array(field(v, "minimal")?, "minimal")?
        .iter()
        .map(|p| as_u32_list(p, "point"))
        .collect::<Input<Vec<_>>>()?;
    Ok(UpSet::new(bound, minimal)?)
}

fn conditioning(c: &[(usize, u32)]) -> Value {
    Value::Array(c.iter().map(|&(i, a)| json!([i + 1, a])).collect())
}

fn parse_conditioning(v: &Value) -> Input<Vec<(usize, u32)>> {
    let mut out = Vec::new();
    for pair in as_array(v, "conditioning")? {
        let pair = as_array(pair, "conditioning pair")?;
        if pair.len() != 2 {
            return Err(InputError::new("conditioning pairs are [coordinate, value]"));
        }
        let i = as_usize(&pair[0], "coordinate")?;
        if i == 0 {
            return Err(InputError::new("coordinates are 1-based"));
        }
        out.push((i - 1, as_usize(&pair[1], "value")? as u32));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// witnesses

pub fn witness(w: &Witness) -> Value {
    match w {
        Witness::Correlation { conditioning: c, a, b, p_ab, p_a, p_b } => json!({
            "kind": "correlation",
            "conditioning": conditioning(c),
            "a": upset(a),
            "b": upset(b),
            "p_ab": rat(p_ab),
            "p_a": rat(p_a),
            "p_b": rat(p_b),
        }),
        Witness::Thresholds { conditioning: c, field, i, j, s, t, p_both, p_i, p_j } => json!({
            "kind": "thresholds",
            "conditioning": conditioning(c),
            "field": field.as_ref().map(|f| rats(f.weights())),
            "i": i + 1,
            "j": j + 1,
            "s": s,
            "t": t,
            "p_both": rat(p_both),
            "p_i": rat(p_i),
            "p_j": rat(p_j),
        }),
        Witness::Rank { j, ranks } => json!({ "kind": "rank", "j": j, "ranks": rats(ranks) }),
        Witness::Level { k, upset, upper, lower } => json!({
            "kind": "level",
            "k": k,
            "upset": subsets(upset),
            "upper": rat(upper),
            "lower": rat(lower),
        }),
        Witness::Covering { on, a, b, upset, given_a, given_b } => json!({
            "kind": "covering",
            "on": subset(*on),
            "a": subset(*a),
            "b": subset(*b),
            "upset": subsets(upset),
            "given_a": rat(given_a),
            "given_b": rat(given_b),
        }),
        Witness::FederMihail { conditioning: c, a } => json!({
            "kind": "feder-mihail",
            "conditioning": conditioning(c),
            "a": upset(a),
        }),
    }
}

pub fn parse_witness(v: &Value) -> Input<Witness> {
    let kind = field(v, "kind")?.as_str().unwrap_or_default();
    let index = |key: &str| -> Input<usize> {
        let i = as_usize(field(v, key)?, key)?;
        i.checked_sub(1).ok_or_else(|| InputError::new(format!("{key} is 1-based")))
    };
    let r = |key: &str| parse_rat(field(v, key)?);
    Ok(match kind {
        "correlation" => Witness::Correlation {
            conditioning: parse_conditioning(field(v, "conditioning")?)?,
            a: parse_upset(field(v, "a")?)?,
            b: parse_upset(field(v, "b")?)?,
            p_ab: r("p_ab")?,
            p_a: r("p_a")?,
            p_b: r("p_b")?,
        },
        "thresholds" => Witness::Thresholds {
            conditioning: parse_conditioning(field(v, "conditioning")?)?,
            field: match v.get("field") {
                None | Some(Value::Null) => None,
                Some(f) => Some(ExternalField::new(parse_rats(f)?)?),
            },
            i: index("i")?,
            j: index("j")?,
            s: as_usize(field(v, "s")?, "s")? as u32,
            t: as_usize(field(v, "t")?, "t")? as u32,
            p_both: r("p_both")?,
            p_i: r("p_i")?,
            p_j: r("p_j")?,
        },
        "rank" => Witness::Rank {
            j: as_usize(field(v, "j")?, "j")?,
            ranks: parse_rats(field(v, "ranks")?)?,
        },
        "level" => Witness::Level {
            k: as_usize(field(v, "k")?, "k")?,
            upset: parse_subsets(field(v, "upset")?)?,
            upper: r("upper")?,
            lower: r("lower")?,
        },
        "covering" => Witness::Covering {
            on: parse_subset(field(v, "on")?)?,
            a: parse_subset(field(v, "a")?)?,
            b: parse_subset(field(v, "b")?)?,
            upset: parse_subsets(field(v, "upset")?)?,
            given_a: r("given_a")?,
            given_b: r("given_b")?,
        },
        "feder-mihail" => Witness::FederMihail {
            conditioning: parse_conditioning(field(v, "conditioning")?)?,
            a: parse_upset(field(v, "a")?)?,
        },
        other => return Err(InputError::new(format!("unknown witness kind {other:?}"))),
    })
}

pub fn report(r: &PropertyReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("property".into(), json!(r.property.name()));
    m.insert("verdict".into(), json!(r.verdict.as_str()));
    m.insert("note".into(), r.note.as_ref().map_or(Value::Null, |n| json!(n)));
    m.insert("witness".into(), r.witness.as_ref().map_or(Value::Null, witness));
    m
}
