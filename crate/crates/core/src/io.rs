//! JSON documents for functions, relations, distributions, pairs and
//! mixtures.
//!
//! Bit strings are ASCII `0`/`1` with index 1 leftmost; probabilities are
//! `"p/q"` strings. Shapes:
//!
//! ```text
//! function  {"m": 2, "zeros": ["00"], "ones": ["01", "10", "11"]}
//!           {"named": "or" | "and" | "xor" | "majority" | "g0", "m": 2}
//! relation  {"n": 2, "outputs": ["0", "1"], "pairs": [["00", "0"], ...]}
//!           {"named": "f0" | "parity" | "identity", "n": 4}
//! dist      {"m": 2, "weights": {"00": "1/2", "11": "1/2"}}
//! pair      {"mu0": dist, "mu1": dist}
//! mixture   {"entries": [{"weight": "1/2", "mu0": dist, "mu1": dist}, ...]}
//! ```

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::bits::BitString;
use crate::dist::{Dist, DistPair, PairMixture};
use crate::error::{Error, Result};
use crate::function::{PartialFunction, Relation, DEFAULT_ENUMERATION_CAP};
use crate::scalar::{rational_text, Scalar};
use crate::Rational;

fn bad(what: &str) -> Error {
    Error::Parse(format!("malformed {what} document"))
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn field<'a>(v: &'a Value, key: &str, what: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Parse(format!("{what} document lacks `{key}`")))
}

fn count(v: &Value, key: &str, what: &str) -> Result<usize> {
    field(v, key, what)?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(what))
}

fn text<'a>(v: &'a Value, what: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| bad(what))
}

fn bits(v: &Value, len: usize, what: &str) -> Result<BitString> {
    let x: BitString = text(v, what)?.parse()?;
    if x.len() != len {
        return Err(Error::arity(len, x.len()));
    }
    Ok(x)
}

fn bit_list(v: &Value, len: usize, what: &str) -> Result<Vec<BitString>> {
    v.as_array()
        .ok_or_else(|| bad(what))?
        .iter()
        .map(|x| bits(x, len, what))
        .collect()
}

fn rational(v: &Value, what: &str) -> Result<Rational> {
    match v {
        Value::String(s) => Rational::parse(s),
        Value::Number(n) if n.is_i64() => Ok(Rational::ratio(n.as_i64().expect("checked"), 1)),
        _ => Err(bad(what)),
    }
}

pub fn function_from_json(v: &Value) -> Result<PartialFunction> {
    if let Some(name) = v.get("named") {
        let m = v
            .get("m")
            .or_else(|| v.get("n"))
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("function"))? as usize;
        return match text(name, "function")? {
            "or" => Ok(PartialFunction::or(m)),
            "and" => Ok(PartialFunction::and(m)),
            "xor" => Ok(PartialFunction::xor(m)),
            "majority" => Ok(PartialFunction::majority(m)),
            "g0" => PartialFunction::hamming_gap(m),
            other => Err(Error::Parse(format!("unknown function `{other}`"))),
        };
    }
    let m = count(v, "m", "function")?;
    let zeros = bit_list(field(v, "zeros", "function")?, m, "function")?;
    let ones = bit_list(field(v, "ones", "function")?, m, "function")?;
    PartialFunction::explicit(m, zeros, ones)
}

pub fn function_to_json(g: &PartialFunction) -> Result<Value> {
    if !g.is_explicit() {
        return Ok(json!({"named": "g0", "n": g.arity()}));
    }
    let strs = |xs: Vec<BitString>| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    Ok(json!({"m": g.arity(), "zeros": strs(g.zeros()?), "ones": strs(g.ones()?)}))
}

pub fn relation_from_json(v: &Value) -> Result<Relation> {
    if let Some(name) = v.get("named") {
        let n = count(v, "n", "relation")?;
        return match text(name, "relation")? {
            "f0" => Relation::xor_distance(n),
            "parity" => Ok(Relation::parity(n)),
            "identity" => Ok(Relation::identity(n)),
            other => Err(Error::Parse(format!("unknown relation `{other}`"))),
        };
    }
    let n = count(v, "n", "relation")?;
    let outputs = field(v, "outputs", "relation")?
        .as_array()
        .ok_or_else(|| bad("relation"))?
        .iter()
        .map(|s| text(s, "relation").map(str::to_string))
        .collect::<Result<Vec<_>>>()?;
    let pairs = field(v, "pairs", "relation")?
        .as_array()
        .ok_or_else(|| bad("relation"))?
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([z, s]) => Ok((bits(z, n, "relation")?, text(s, "relation")?.to_string())),
            _ => Err(bad("relation")),
        })
        .collect::<Result<Vec<_>>>()?;
    Relation::explicit(n, outputs, pairs)
}

pub fn relation_to_json(f: &Relation) -> Result<Value> {
    if let Some(name) = f.named() {
        return Ok(json!({"named": name, "n": f.arity()}));
    }
    let table = f.materialize(DEFAULT_ENUMERATION_CAP)?;
    let outputs = table.outputs()?;
    let mut pairs = Vec::new();
    for z in BitString::all(f.arity()) {
        for s in &outputs {
            if table.contains(&z, s)? {
                pairs.push(json!([z.to_string(), s]));
            }
        }
    }
    Ok(json!({"n": f.arity(), "outputs": outputs, "pairs": pairs}))
}

pub fn dist_from_json(v: &Value) -> Result<Dist<Rational>> {
    let m = count(v, "m", "distribution")?;
    let weights = field(v, "weights", "distribution")?
        .as_object()
        .ok_or_else(|| bad("distribution"))?
        .iter()
        .map(|(x, w)| {
            let x: BitString = x.parse()?;
            if x.len() != m {
                return Err(Error::arity(m, x.len()));
            }
            Ok((x, rational(w, "distribution")?))
        })
        .collect::<Result<Vec<_>>>()?;
    Dist::new(m, weights)
}

pub fn dist_to_json(d: &Dist<Rational>) -> Value {
    let weights: Map<String, Value> = d
        .iter()
        .map(|(x, w)| (x.to_string(), Value::String(rational_text(w))))
        .collect();
    json!({"m": d.arity(), "weights": weights})
}

pub fn pair_from_json(v: &Value) -> Result<DistPair<Rational>> {
    DistPair::new(
        dist_from_json(field(v, "mu0", "pair")?)?,
        dist_from_json(field(v, "mu1", "pair")?)?,
    )
}

pub fn pair_to_json(p: &DistPair<Rational>) -> Value {
    json!({"mu0": dist_to_json(&p.mu0), "mu1": dist_to_json(&p.mu1)})
}

pub fn mixture_from_json(v: &Value) -> Result<PairMixture<Rational>> {
    let entries = field(v, "entries", "mixture")?
        .as_array()
        .ok_or_else(|| bad("mixture"))?
        .iter()
        .map(|e| Ok((rational(field(e, "weight", "mixture")?, "mixture")?, pair_from_json(e)?)))
        .collect::<Result<Vec<_>>>()?;
    PairMixture::new(entries)
}

pub fn mixture_to_json(q: &PairMixture<Rational>) -> Value {
    let entries: Vec<Value> = q
        .entries()
        .iter()
        .map(|(w, p)| {
            let mut e = pair_to_json(p);
            e["weight"] = Value::String(rational_text(w));
            e
        })
        .collect();
    json!({ "entries": entries })
}

/// A leaf distribution keyed by node id, as `{"3": "1/4", ...}`.
pub fn leaf_map_to_json(m: &BTreeMap<usize, Rational>) -> Value {
    Value::Object(
        m.iter()
            .map(|(k, v)| (k.to_string(), Value::String(rational_text(v))))
            .collect(),
    )
}
