//! Text formats: canonical JSON model documents and DOT export.
//!
//! Every document has a top-level `kind` (`network`, `cbn`, `action` or
//! `environment`), a `distinctions` list, `arcs` as `[from, to]` pairs and a
//! `cpts` object keyed by node. CBNs and environments add `free` and `bound`
//! name lists; actions add `action: {name, qual, eff}` and refer to effect
//! nodes as `name'` inside `arcs` and `cpts`.
//!
//! Canonical output sorts object keys and nodes by name and prints
//! probabilities with 17 significant digits, so equal values serialize to
//! identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::{effect_name, ActionModel, EnvironmentModel, EFFECT_MARK};
use crate::cbn::ConditionalBeliefNet;
use crate::error::{Error, Result};
use crate::factor::Dist;
use crate::model::{Assignment, BeliefNetwork, Cpt, Distinction};
use crate::projection::TimedName;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Network(BeliefNetwork),
    Cbn(ConditionalBeliefNet),
    Action(ActionModel),
    Environment(EnvironmentModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Network(_) => "network",
            Model::Cbn(_) => "cbn",
            Model::Action(_) => "action",
            Model::Environment(_) => "environment",
        }
    }

    pub fn into_network(self) -> Result<BeliefNetwork> {
        match self {
            Model::Network(bn) => Ok(bn),
            other => Err(wrong_kind("network", other.kind())),
        }
    }

    pub fn into_action(self) -> Result<ActionModel> {
        match self {
            Model::Action(a) => Ok(a),
            other => Err(wrong_kind("action", other.kind())),
        }
    }

    pub fn into_environment(self) -> Result<EnvironmentModel> {
        match self {
            Model::Environment(v) => Ok(v),
            other => Err(wrong_kind("environment", other.kind())),
        }
    }

    pub fn into_cbn(self) -> Result<ConditionalBeliefNet> {
        match self {
            Model::Cbn(c) => Ok(c),
            other => Err(wrong_kind("cbn", other.kind())),
        }
    }
}

fn wrong_kind(expected: &str, found: &str) -> Error {
    Error::WrongKind {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    kind: String,
    distinctions: Vec<DistinctionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    free: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bound: Option<Vec<String>>,
    #[serde(default)]
    arcs: Vec<(String, String)>,
    #[serde(default)]
    cpts: BTreeMap<String, CptDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    action: Option<ActionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistinctionDoc {
    name: String,
    domain: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CptDoc {
    parents: Vec<String>,
    rows: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionDoc {
    name: String,
    qual: Vec<String>,
    eff: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    include_action_node: bool,
}

fn field_error(message: impl Into<String>) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message: message.into(),
    }
}

impl Document {
    fn distinctions(&self) -> Result<BTreeMap<String, Distinction>> {
        let mut out = BTreeMap::new();
        for d in &self.distinctions {
            let dist = Distinction::new(d.name.clone(), d.domain.clone());
            if out.insert(d.name.clone(), dist).is_some() {
                return Err(field_error(format!("distinctions: `{}` declared twice", d.name)));
            }
        }
        Ok(out)
    }

    fn cpts(&self) -> Vec<Cpt> {
        self.cpts
            .iter()
            .map(|(child, c)| Cpt::new(child.clone(), c.parents.clone(), c.rows.clone()))
            .collect()
    }

    fn partition(&self, all: &BTreeMap<String, Distinction>) -> Result<(Vec<Distinction>, Vec<Distinction>)> {
        let free = self
            .free
            .as_ref()
            .ok_or_else(|| field_error(format!("free: required for kind `{}`", self.kind)))?;
        let bound = self
            .bound
            .as_ref()
            .ok_or_else(|| field_error(format!("bound: required for kind `{}`", self.kind)))?;
        let lookup = |n: &String, field: &str| {
            all.get(n)
                .cloned()
                .ok_or_else(|| field_error(format!("{field}: `{n}` is not a declared distinction")))
        };
        let free: Vec<_> = free.iter().map(|n| lookup(n, "free")).collect::<Result<_>>()?;
        let bound: Vec<_> = bound.iter().map(|n| lookup(n, "bound")).collect::<Result<_>>()?;
        let listed: BTreeSet<&str> = free.iter().chain(&bound).map(|d| d.name.as_str()).collect();
        if let Some(missing) = all.keys().find(|n| !listed.contains(n.as_str())) {
            return Err(field_error(format!(
                "distinctions: `{missing}` is neither free nor bound"
            )));
        }
        Ok((free, bound))
    }

    fn into_model(self) -> Result<Model> {
        let all = self.distinctions()?;
        match self.kind.as_str() {
            "network" => {
                if self.free.is_some() || self.bound.is_some() || self.action.is_some() {
                    return Err(field_error("network documents take no free/bound/action fields"));
                }
                let bn = BeliefNetwork::from_parts(all.into_values(), self.arcs.clone(), self.cpts());
                Ok(Model::Network(bn.checked()?))
            }
            "cbn" | "environment" => {
                if self.action.is_some() {
                    return Err(field_error("action: not allowed here"));
                }
                let (free, bound) = self.partition(&all)?;
                let cbn = ConditionalBeliefNet::from_parts(free, bound, self.arcs.clone(), self.cpts())
                    .checked()?;
                if self.kind == "cbn" {
                    Ok(Model::Cbn(cbn))
                } else {
                    Ok(Model::Environment(EnvironmentModel::new(cbn)?))
                }
            }
            "action" => {
                if self.free.is_some() || self.bound.is_some() {
                    return Err(field_error("action documents use action.qual/action.eff"));
                }
                let doc = self
                    .action
                    .as_ref()
                    .ok_or_else(|| field_error("action: required for kind `action`"))?;
                let lookup = |n: &String, field: &str| {
                    all.get(n)
                        .cloned()
                        .ok_or_else(|| field_error(format!("action.{field}: `{n}` is not a declared distinction")))
                };
                let free: Vec<_> = doc.qual.iter().map(|n| lookup(n, "qual")).collect::<Result<_>>()?;
                let bound: Vec<_> = doc
                    .eff
                    .iter()
                    .map(|n| lookup(n, "eff").map(|d| d.renamed(effect_name(n))))
                    .collect::<Result<_>>()?;
                let listed: BTreeSet<&String> = doc.qual.iter().chain(&doc.eff).collect();
                if let Some(missing) = all.keys().find(|n| !listed.contains(n)) {
                    return Err(field_error(format!(
                        "distinctions: `{missing}` is in neither action.qual nor action.eff"
                    )));
                }
                let cbn = ConditionalBeliefNet::from_parts(free, bound, self.arcs.clone(), self.cpts());
                Ok(Model::Action(ActionModel::new(
                    doc.name.clone(),
                    cbn,
                    doc.include_action_node,
                )?))
            }
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

/// Parses and structurally validates a model document.
pub fn parse_model(text: &str) -> Result<Model> {
    let doc: Document = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    doc.into_model()
}

pub fn parse_network(text: &str) -> Result<BeliefNetwork> {
    parse_model(text)?.into_network()
}

pub fn parse_action(text: &str) -> Result<ActionModel> {
    parse_model(text)?.into_action()
}

pub fn parse_environment(text: &str) -> Result<EnvironmentModel> {
    parse_model(text)?.into_environment()
}

fn distinction_docs<'a>(ds: impl IntoIterator<Item = &'a Distinction>) -> Vec<DistinctionDoc> {
    let mut docs: Vec<_> = ds
        .into_iter()
        .map(|d| DistinctionDoc {
            name: d.name.clone(),
            domain: d.domain.clone(),
        })
        .collect();
    docs.sort_by(|a, b| a.name.cmp(&b.name));
    docs
}

fn cpt_docs<'a>(cpts: impl IntoIterator<Item = &'a Cpt>) -> BTreeMap<String, CptDoc> {
    cpts.into_iter()
        .map(|c| {
            (
                c.child.clone(),
                CptDoc {
                    parents: c.parents.clone(),
                    rows: c.rows.clone(),
                },
            )
        })
        .collect()
}

fn to_document(model: &Model) -> Document {
    match model {
        Model::Network(bn) => Document {
            kind: "network".into(),
            distinctions: distinction_docs(bn.distinctions()),
            free: None,
            bound: None,
            arcs: bn.arcs().iter().cloned().collect(),
            cpts: cpt_docs(bn.cpts()),
            action: None,
        },
        Model::Cbn(cbn) => cbn_document("cbn", cbn),
        Model::Environment(v) => cbn_document("environment", v.cbn()),
        Model::Action(a) => Document {
            kind: "action".into(),
            distinctions: distinction_docs(&a.base_distinctions()),
            free: None,
            bound: None,
            arcs: a.cbn().arcs().iter().cloned().collect(),
            cpts: cpt_docs(a.cbn().cpts()),
            action: Some(ActionDoc {
                name: a.name().to_string(),
                qual: a.qual().into_iter().collect(),
                eff: a.eff().into_iter().collect(),
                include_action_node: a.include_action_node(),
            }),
        },
    }
}

fn cbn_document(kind: &str, cbn: &ConditionalBeliefNet) -> Document {
    Document {
        kind: kind.into(),
        distinctions: distinction_docs(cbn.distinctions()),
        free: Some(cbn.free_names().into_iter().map(str::to_string).collect()),
        bound: Some(cbn.bound_names().into_iter().map(str::to_string).collect()),
        arcs: cbn.arcs().iter().cloned().collect(),
        cpts: cpt_docs(cbn.cpts()),
        action: None,
    }
}

/// Canonical document text for `model`.
pub fn serialize_model(model: &Model) -> String {
    let value = serde_json::to_value(to_document(model)).expect("documents are plain data");
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

pub fn serialize_network(bn: &BeliefNetwork) -> String {
    serialize_model(&Model::Network(bn.clone()))
}

/// Canonical document for a query result. `probabilities` is flat and
/// indexed like a CPT row block: first scope variable slowest.
pub fn serialize_dist(dist: &Dist, evidence: &Assignment) -> String {
    let domains: serde_json::Map<String, Value> = dist
        .scope
        .iter()
        .zip(&dist.domains)
        .map(|(n, d)| (n.clone(), Value::from(d.clone())))
        .collect();
    let given: serde_json::Map<String, Value> = evidence
        .iter()
        .map(|(k, v)| (k.to_string(), Value::from(v)))
        .collect();
    let value = serde_json::json!({
        "kind": "distribution",
        "scope": dist.scope,
        "domains": domains,
        "evidence": given,
        "probabilities": dist.probabilities,
    });
    let mut out = String::new();
    write_value(&value, 0, &mut out);
    out.push('\n');
    out
}

/// `%.17g`-style rendering: 17 significant digits, trailing zeros dropped.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        // JSON has no representation; documents never carry these once validated.
        return "null".into();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let tail = tail.trim_end_matches('0');
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let (int, frac) = if exp >= 0 {
        let split = exp as usize + 1;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), "0".repeat((-exp - 1) as usize) + &digits)
    };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Printed on one line: scalars, arrays of scalars, and objects whose values
/// are all of those.
fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items.iter().all(is_scalar),
        Value::Object(map) => map.values().all(|v| is_scalar(v) || matches!(v, Value::Array(a) if a.iter().all(is_scalar))),
        _ => true,
    }
}

fn write_scalar(v: &Value, out: &mut String) {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64().filter(|_| !n.is_f64()) {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64().filter(|_| !n.is_f64()) {
                write!(out, "{u}").unwrap();
            } else {
                out.push_str(&format_g17(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        other => out.push_str(&serde_json::to_string(other).expect("scalar")),
    }
}

fn write_inline(v: &Value, out: &mut String) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_inline(item, out);
            }
            out.push('}');
        }
        scalar => write_scalar(scalar, out),
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    if is_inline(v) {
        write_inline(v, out);
        return;
    }
    let pad = "  ".repeat(indent + 1);
    let close = "  ".repeat(indent);
    match v {
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad);
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push(']');
        }
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad);
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&close);
            out.push('}');
        }
        _ => unreachable!("scalars are inline"),
    }
}

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Overrides the action model's own `include_action_node` flag.
    pub action_node: Option<bool>,
    /// Graph name; defaults to the model kind.
    pub name: Option<String>,
}

fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("string")
}

/// Display label: slice copies get their slice index, effect nodes are
/// marked as the succeeding state.
fn label(name: &str) -> String {
    if let Ok(t) = name.parse::<TimedName>() {
        format!("{} (t={})", t.base, t.slice)
    } else if let Some(base) = name.strip_suffix(EFFECT_MARK) {
        format!("{base} (after)")
    } else {
        name.to_string()
    }
}

fn node_line(name: &str, indent: &str, out: &mut String) {
    writeln!(out, "{indent}{} [label={}];", quote(name), quote(&label(name))).unwrap();
}

fn cluster(id: &str, title: &str, members: &[&str], out: &mut String) {
    if members.is_empty() {
        return;
    }
    writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{id}"))).unwrap();
    writeln!(out, "    label={};", quote(title)).unwrap();
    writeln!(out, "    style=rounded;").unwrap();
    for m in members {
        node_line(m, "    ", out);
    }
    writeln!(out, "  }}").unwrap();
}

/// Deterministic DOT rendering. Bound nodes of CBNs, effect nodes of
/// actions and every later slice of a combined network are drawn inside
/// rounded clusters.
pub fn export_dot(model: &Model, opts: &DotOptions) -> String {
    let name = opts.name.clone().unwrap_or_else(|| model.kind().to_string());
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&name)).unwrap();

    let (names, arcs): (Vec<String>, Vec<(String, String)>) = match model {
        Model::Network(bn) => (bn.names().map(str::to_string).collect(), bn.arcs().iter().cloned().collect()),
        Model::Cbn(c) => (c.distinctions().map(|d| d.name.clone()).collect(), c.arcs().iter().cloned().collect()),
        Model::Environment(v) => (v.ontology().map(|d| d.name.clone()).collect(), v.cbn().arcs().iter().cloned().collect()),
        Model::Action(a) => (
            a.cbn().distinctions().map(|d| d.name.clone()).collect(),
            a.cbn().arcs().iter().cloned().collect(),
        ),
    };
    let mut names = names;
    names.sort();

    match model {
        Model::Network(_) => {
            let slices: Option<Vec<TimedName>> = names.iter().map(|n| n.parse().ok()).collect();
            match slices {
                Some(timed) if !timed.is_empty() => {
                    let latest = timed.iter().map(|t| t.slice).max().unwrap_or(0);
                    for (n, t) in names.iter().zip(&timed) {
                        if t.slice == 0 {
                            node_line(n, "  ", &mut out);
                        }
                    }
                    for s in 1..=latest {
                        let members: Vec<&str> = names
                            .iter()
                            .zip(&timed)
                            .filter(|(_, t)| t.slice == s)
                            .map(|(n, _)| n.as_str())
                            .collect();
                        cluster(&format!("slice_{s}"), &format!("slice {s}"), &members, &mut out);
                    }
                }
                _ => {
                    for n in &names {
                        node_line(n, "  ", &mut out);
                    }
                }
            }
        }
        Model::Cbn(_) | Model::Environment(_) => {
            let cbn = match model {
                Model::Cbn(c) => c,
                Model::Environment(v) => v.cbn(),
                _ => unreachable!(),
            };
            for n in cbn.free_names() {
                node_line(n, "  ", &mut out);
            }
            let bound: Vec<&str> = cbn.bound_names().into_iter().collect();
            cluster("bound", "bound", &bound, &mut out);
        }
        Model::Action(a) => {
            for n in a.cbn().free_names() {
                node_line(n, "  ", &mut out);
            }
            let effects: Vec<&str> = a.cbn().bound_names().into_iter().collect();
            cluster("effects", "effects", &effects, &mut out);
            if opts.action_node.unwrap_or(a.include_action_node()) {
                let node = format!("action:{}", a.name());
                writeln!(out, "  {} [label={}, shape=box];", quote(&node), quote(a.name())).unwrap();
                for e in &effects {
                    writeln!(out, "  {} -> {} [style=dashed];", quote(&node), quote(e)).unwrap();
                }
            }
        }
    }
    for (from, to) in &arcs {
        writeln!(out, "  {} -> {};", quote(from), quote(to)).unwrap();
    }
    out.push_str("}\n");
    out
}
