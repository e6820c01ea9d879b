//! JSON model files.
//!
//! ```json
//! {
//!   "horizon": 2,
//!   "outcomes": [{"name": "w1", "prob": "1/9"}, ...],
//!   "filtration": [[["w1", "w2", "w3", "w4"]], [["w1", "w2"], ["w3", "w4"]], ...],
//!   "processes": {"S": [{"w1": "1", ...}, ...]},
//!   "random_times": {"tau": {"w1": 2, ...}},
//!   "allow_beyond_horizon": false
//! }
//! ```
//!
//! Probabilities and values are exact rationals written as strings
//! (`"2/3"`, `"-0.25"`, `"7"`); plain JSON integers are accepted too.

use std::fmt;
use std::path::Path;

use insider_na::space::Partition;
use insider_na::{parse_rational, Filtration, Process, RandomTime, Rational, SampleSpace};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Semantic { path: String, message: String },
}

#[derive(Debug, Clone)]
pub struct ParsedModel {
    pub space: SampleSpace,
    pub filtration: Filtration,
    /// In file order.
    pub processes: Vec<(String, Process)>,
    pub random_times: Vec<(String, RandomTime)>,
}

impl ParsedModel {
    pub fn process(&self, name: &str) -> Option<&Process> {
        self.processes.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    pub fn random_time(&self, name: &str) -> Option<&RandomTime> {
        self.random_times.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn outcome_names(&self, set: impl IntoIterator<Item = usize>) -> Vec<String> {
        set.into_iter().map(|w| self.space.outcomes()[w].clone()).collect()
    }
}

/// Object path such as `processes.S[1].w3`.
#[derive(Clone)]
struct JsonPath(String);

impl JsonPath {
    fn root() -> Self {
        JsonPath(String::new())
    }

    fn key(&self, key: &str) -> Self {
        if self.0.is_empty() {
            JsonPath(key.to_string())
        } else {
            JsonPath(format!("{}.{key}", self.0))
        }
    }

    fn index(&self, i: usize) -> Self {
        JsonPath(format!("{}[{i}]", self.0))
    }

    fn error(&self, message: impl Into<String>) -> ModelError {
        ModelError::Semantic {
            path: if self.0.is_empty() { "<root>".into() } else { self.0.clone() },
            message: message.into(),
        }
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn as_object<'a>(v: &'a Value, path: &JsonPath) -> Result<&'a Map<String, Value>, ModelError> {
    v.as_object()
        .ok_or_else(|| path.error(format!("expected an object, found {}", kind(v))))
}

fn as_array<'a>(v: &'a Value, path: &JsonPath) -> Result<&'a Vec<Value>, ModelError> {
    v.as_array()
        .ok_or_else(|| path.error(format!("expected an array, found {}", kind(v))))
}

fn as_str<'a>(v: &'a Value, path: &JsonPath) -> Result<&'a str, ModelError> {
    v.as_str()
        .ok_or_else(|| path.error(format!("expected a string, found {}", kind(v))))
}

fn as_count(v: &Value, path: &JsonPath) -> Result<usize, ModelError> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| path.error(format!("expected a non-negative integer, found {v}")))
}

fn rational(v: &Value, path: &JsonPath) -> Result<Rational, ModelError> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| path.error(e.to_string())),
        Value::Number(n) if n.is_i64() || n.is_u64() => {
            parse_rational(&n.to_string()).map_err(|e| path.error(e.to_string()))
        }
        Value::Number(n) => Err(path.error(format!(
            "floating-point number {n} is not exact; write it as a string such as \"1/3\""
        ))),
        other => Err(path.error(format!("expected a rational string, found {}", kind(other)))),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &JsonPath) -> Result<&'a Value, ModelError> {
    obj.get(key)
        .ok_or_else(|| path.error(format!("missing key `{key}`")))
}

pub fn parse_model(path: &Path) -> Result<ParsedModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model_str(&text)
}

pub fn parse_model_str(text: &str) -> Result<ParsedModel, ModelError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = JsonPath::root();
    let obj = as_object(&doc, &root)?;
    const KEYS: [&str; 6] = [
        "horizon",
        "outcomes",
        "filtration",
        "processes",
        "random_times",
        "allow_beyond_horizon",
    ];
    if let Some(key) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(root.key(key).error("unknown key"));
    }

    let horizon_path = root.key("horizon");
    let horizon = as_count(field(obj, "horizon", &root)?, &horizon_path)?;
    if horizon == 0 {
        return Err(horizon_path.error("horizon must be at least 1"));
    }
    let allow_beyond = match obj.get("allow_beyond_horizon") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| root.key("allow_beyond_horizon").error("expected a boolean"))?,
    };

    let space = parse_outcomes(field(obj, "outcomes", &root)?, &root.key("outcomes"), horizon)?;
    let filtration = parse_filtration(field(obj, "filtration", &root)?, &root.key("filtration"), &space)?;
    let processes = parse_processes(
        field(obj, "processes", &root)?,
        &root.key("processes"),
        &space,
        &filtration,
    )?;
    let random_times = parse_random_times(
        field(obj, "random_times", &root)?,
        &root.key("random_times"),
        &space,
        allow_beyond,
    )?;
    Ok(ParsedModel {
        space,
        filtration,
        processes,
        random_times,
    })
}

fn parse_outcomes(v: &Value, path: &JsonPath, horizon: usize) -> Result<SampleSpace, ModelError> {
    let list = as_array(v, path)?;
    if list.is_empty() {
        return Err(path.error("at least one outcome is required"));
    }
    let mut names: Vec<String> = Vec::with_capacity(list.len());
    let mut weights = Vec::with_capacity(list.len());
    for (i, entry) in list.iter().enumerate() {
        let p = path.index(i);
        let obj = as_object(entry, &p)?;
        if let Some(key) = obj.keys().find(|k| *k != "name" && *k != "prob") {
            return Err(p.key(key).error("unknown key"));
        }
        let name = as_str(field(obj, "name", &p)?, &p.key("name"))?;
        if name.is_empty() {
            return Err(p.key("name").error("outcome names must be non-empty"));
        }
        if names.iter().any(|n| n == name) {
            return Err(p.key("name").error(format!("duplicate outcome `{name}`")));
        }
        let prob_path = p.key("prob");
        let prob = rational(field(obj, "prob", &p)?, &prob_path)?;
        if prob <= Rational::from_integer(0.into()) {
            return Err(prob_path.error(format!("probability {prob} must be strictly positive")));
        }
        names.push(name.to_string());
        weights.push(prob);
    }
    SampleSpace::new(names, weights, horizon).map_err(|e| path.error(e.to_string()))
}

fn outcome_index(space: &SampleSpace, v: &Value, path: &JsonPath) -> Result<usize, ModelError> {
    let name = as_str(v, path)?;
    space
        .index_of(name)
        .map_err(|_| path.error(format!("unknown outcome `{name}`")))
}

fn parse_filtration(v: &Value, path: &JsonPath, space: &SampleSpace) -> Result<Filtration, ModelError> {
    let levels = as_array(v, path)?;
    if levels.len() != space.horizon() + 1 {
        return Err(path.error(format!(
            "expected {} levels (times 0..={}), found {}",
            space.horizon() + 1,
            space.horizon(),
            levels.len()
        )));
    }
    let mut partitions: Vec<Partition> = Vec::with_capacity(levels.len());
    for (n, level) in levels.iter().enumerate() {
        let lp = path.index(n);
        let mut atoms = Vec::new();
        for (k, atom) in as_array(level, &lp)?.iter().enumerate() {
            let ap = lp.index(k);
            let members = as_array(atom, &ap)?
                .iter()
                .enumerate()
                .map(|(j, name)| outcome_index(space, name, &ap.index(j)))
                .collect::<Result<Vec<_>, _>>()?;
            atoms.push(members);
        }
        let partition =
            Partition::new(space.len(), atoms).map_err(|reason| lp.error(format!("not a partition: {reason}")))?;
        if let Some(prev) = partitions.last() {
            if !partition.refines(prev) {
                return Err(lp.error(format!("does not refine {}", path.index(n - 1))));
            }
        }
        partitions.push(partition);
    }
    Filtration::from_partitions(space, partitions).map_err(|e| path.error(e.to_string()))
}

fn outcome_table(
    v: &Value,
    path: &JsonPath,
    space: &SampleSpace,
    mut entry: impl FnMut(usize, &Value, &JsonPath) -> Result<(), ModelError>,
) -> Result<(), ModelError> {
    let obj = as_object(v, path)?;
    for (name, value) in obj {
        let w = space
            .index_of(name)
            .map_err(|_| path.key(name).error(format!("unknown outcome `{name}`")))?;
        entry(w, value, &path.key(name))?;
    }
    if let Some(missing) = space.outcomes().iter().find(|o| !obj.contains_key(*o)) {
        return Err(path.error(format!("no value for outcome `{missing}`")));
    }
    Ok(())
}

fn parse_processes(
    v: &Value,
    path: &JsonPath,
    space: &SampleSpace,
    filtration: &Filtration,
) -> Result<Vec<(String, Process)>, ModelError> {
    let mut out = Vec::new();
    for (name, table) in as_object(v, path)? {
        let pp = path.key(name);
        let rows = as_array(table, &pp)?;
        if rows.len() != space.horizon() + 1 {
            return Err(pp.error(format!(
                "expected {} rows (times 0..={}), found {}",
                space.horizon() + 1,
                space.horizon(),
                rows.len()
            )));
        }
        let mut values = Vec::with_capacity(rows.len());
        for (n, row) in rows.iter().enumerate() {
            let rp = pp.index(n);
            let mut slot: Vec<Option<Rational>> = vec![None; space.len()];
            outcome_table(row, &rp, space, |w, value, at| {
                slot[w] = Some(rational(value, at)?);
                Ok(())
            })?;
            let row: Vec<Rational> = slot.into_iter().map(|v| v.expect("complete")).collect();
            if let Some(atom) = filtration.level(n).non_constant_atom(&row) {
                return Err(rp.error(format!(
                    "not measurable at time {n}: values differ on atom {{{}}}",
                    atom.iter()
                        .map(|&w| space.outcomes()[w].as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
            values.push(row);
        }
        let process = Process::new(values).map_err(|e| pp.error(e.to_string()))?;
        out.push((name.clone(), process));
    }
    Ok(out)
}

fn parse_random_times(
    v: &Value,
    path: &JsonPath,
    space: &SampleSpace,
    allow_beyond: bool,
) -> Result<Vec<(String, RandomTime)>, ModelError> {
    let limit = space.horizon() + usize::from(allow_beyond);
    let mut out = Vec::new();
    for (name, table) in as_object(v, path)? {
        let tp = path.key(name);
        let mut slot: Vec<usize> = vec![0; space.len()];
        outcome_table(table, &tp, space, |w, value, at| {
            let t = as_count(value, at)?;
            if t > limit {
                return Err(at.error(format!("time {t} is outside 0..={limit}")));
            }
            slot[w] = t;
            Ok(())
        })?;
        let tau = if allow_beyond {
            RandomTime::allowing_beyond_horizon(space, slot)
        } else {
            RandomTime::new(space, slot)
        }
        .map_err(|e| tp.error(e.to_string()))?;
        out.push((name.clone(), tau));
    }
    Ok(out)
}
