//! Text and JSON formats for models, divisors and piecewise-linear functions.
//!
//! Graph files:
//!
//! ```text
//! graph k4
//! # optional vertex declarations
//! vertex a
//! edge e0 a b 1/1
//! ```
//!
//! Divisor files hold one `chip <point> <coeff>` line per point; the inline
//! form is a comma-separated list such as `2*v:a,e:e1@1/2,-1*v:b`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::divisor::{Divisor, PlFunction};
use crate::error::{Error, Result};
use crate::metric_graph::{build_model, EdgeSpec, Model, ModelSpec};
use crate::rational::{fmt_q, parse_q};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_graph(text: &str) -> Result<ModelSpec> {
    let mut spec = ModelSpec::default();
    let mut named = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        match words.as_slice() {
            ["graph", name] => {
                if named {
                    return Err(perr(line, "second `graph` header"));
                }
                spec.name = name.to_string();
                named = true;
            }
            ["vertex", id] => spec.vertices.push(id.to_string()),
            ["edge", id, u, v, len] => {
                let length = parse_q(len).map_err(|m| perr(line, m))?;
                spec.edges.push(EdgeSpec {
                    id: id.to_string(),
                    u: u.to_string(),
                    v: v.to_string(),
                    length,
                });
            }
            _ => return Err(perr(line, format!("unrecognised line `{body}`"))),
        }
    }
    if !named {
        return Err(perr(0, "missing `graph <name>` header"));
    }
    Ok(spec)
}

pub fn format_graph(m: &Model) -> String {
    let mut out = format!("graph {}\n", m.name());
    for v in m.vertex_ids() {
        out.push_str(&format!("vertex {v}\n"));
    }
    for e in m.edges() {
        out.push_str(&format!(
            "edge {} {} {} {}\n",
            e.id,
            m.vertex_id(e.tail),
            m.vertex_id(e.head),
            fmt_q(&e.length)
        ));
    }
    out
}

pub fn model_from_text(text: &str) -> Result<Model> {
    build_model(&parse_graph(text)?)
}

pub fn model_to_json(m: &Model) -> serde_json::Value {
    serde_json::to_value(m.to_spec()).expect("model spec serialises")
}

pub fn model_from_json(text: &str) -> Result<Model> {
    let spec: ModelSpec = serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))?;
    build_model(&spec)
}

/// Reads a `.json` model or a text graph file.
pub fn read_model(path: &Path) -> Result<Model> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|x| x == "json") {
        model_from_json(&text)
    } else {
        model_from_text(&text)
    }
}

/// Inline form, points in canonical order; the zero divisor prints as `0`.
pub fn format_divisor(m: &Model, d: &Divisor) -> String {
    if d.is_zero() {
        return "0".into();
    }
    let terms: Vec<String> = d
        .iter()
        .map(|(p, c)| {
            let pt = m.format_point(p);
            if c == 1 {
                pt
            } else {
                format!("{c}*{pt}")
            }
        })
        .collect();
    terms.join(",")
}

pub fn parse_divisor(m: &Model, s: &str) -> Result<Divisor> {
    let s = s.trim();
    let mut d = Divisor::zero();
    if s.is_empty() || s == "0" {
        return Ok(d);
    }
    for term in s.split(',') {
        let term = term.trim();
        let (c, pt) = match term.split_once('*') {
            Some((c, pt)) => (
                c.trim()
                    .parse::<i64>()
                    .map_err(|_| perr(0, format!("bad coefficient in `{term}`")))?,
                pt,
            ),
            None => (1, term),
        };
        d.add_chip(m.parse_point(pt)?, c);
    }
    Ok(d)
}

pub fn parse_divisor_file(m: &Model, text: &str) -> Result<Divisor> {
    let mut d = Divisor::zero();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let ["chip", pt, c] = words.as_slice() else {
            return Err(perr(line, format!("expected `chip <point> <coeff>`, got `{body}`")));
        };
        let c: i64 = c.parse().map_err(|_| perr(line, format!("bad coefficient `{c}`")))?;
        let p = m.parse_point(pt).map_err(|e| perr(line, e.to_string()))?;
        d.add_chip(p, c);
    }
    Ok(d)
}

pub fn format_divisor_file(m: &Model, d: &Divisor) -> String {
    d.iter()
        .map(|(p, c)| format!("chip {} {}\n", m.format_point(p), c))
        .collect()
}

/// A divisor given either as a path to a divisor file or inline.
pub fn read_divisor(m: &Model, arg: &str) -> Result<Divisor> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        parse_divisor_file(m, &text)
    } else {
        parse_divisor(m, arg)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeFunction {
    pub edge: String,
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub edges: Vec<EdgeFunction>,
}

pub fn function_to_json(m: &Model, f: &PlFunction) -> FunctionJson {
    FunctionJson {
        edges: f
            .pieces
            .iter()
            .enumerate()
            .map(|(e, pts)| EdgeFunction {
                edge: m.edge(e).id.clone(),
                breakpoints: pts.iter().map(|(t, _)| fmt_q(t)).collect(),
                values: pts.iter().map(|(_, v)| fmt_q(v)).collect(),
            })
            .collect(),
    }
}

pub fn function_from_json(m: &Model, f: &FunctionJson) -> Result<PlFunction> {
    let mut pieces = vec![Vec::new(); m.edge_count()];
    for ef in &f.edges {
        let e = m
            .edge_index(&ef.edge)
            .ok_or_else(|| Error::MalformedFunction(format!("unknown edge `{}`", ef.edge)))?;
        if ef.breakpoints.len() != ef.values.len() {
            return Err(Error::MalformedFunction(format!(
                "edge `{}` has {} breakpoints and {} values",
                ef.edge,
                ef.breakpoints.len(),
                ef.values.len()
            )));
        }
        pieces[e] = ef
            .breakpoints
            .iter()
            .zip(&ef.values)
            .map(|(t, v)| Ok((parse_q(t)?, parse_q(v)?)))
            .collect::<std::result::Result<Vec<_>, String>>()
            .map_err(Error::MalformedFunction)?;
    }
    Ok(PlFunction { pieces })
}
