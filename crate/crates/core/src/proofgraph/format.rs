//! The `.cproof` JSON format.
//!
//! ```text
//! {"buds": {"<addr>": "<addr>"},
//!  "defs": "<path or inline definitions>",
//!  "nodes": {"<addr>": {"args": {..}, "rule": "<name>", "seq": {"ante": [..], "succ": [..]}}}}
//! ```
//!
//! Output is pretty-printed with sorted keys and a trailing newline, so equal
//! proofs serialize to identical bytes.

use std::path::Path;

use serde_json::{json, Map, Value};

use super::{Addr, PreProof, Rule};
use crate::syntax::{name, InductiveSystem, Name, ParseError, Sequent, Substitution};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("cannot read definitions {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed proof file: {0}")]
    Shape(String),
}

fn shape(msg: impl Into<String>) -> FormatError {
    FormatError::Shape(msg.into())
}

/// A loaded proof file.
#[derive(Clone, Debug)]
pub struct ProofFile {
    /// The `defs` field as written.
    pub defs: String,
    pub system: InductiveSystem,
    pub proof: PreProof,
}

/// Definitions are inline when the text contains a `;` or a newline;
/// otherwise it names a file relative to `base_dir`.
pub fn is_inline_defs(defs: &str) -> bool {
    defs.contains(';') || defs.contains('\n')
}

fn subst_json(theta: &Substitution) -> Value {
    Value::Object(theta.iter().map(|(v, t)| (v.to_string(), Value::String(t.to_string()))).collect())
}

fn sequent_json(seq: &Sequent) -> Value {
    let list = |set: &std::collections::BTreeSet<crate::syntax::Formula>| {
        Value::Array(set.iter().map(|f| Value::String(f.to_string())).collect())
    };
    json!({"ante": list(&seq.ante), "succ": list(&seq.succ)})
}

fn args_json(rule: &Rule) -> Value {
    match rule {
        Rule::Axiom | Rule::Weak | Rule::EqR | Rule::Bud => json!({}),
        Rule::Cut { formula } => json!({"formula": formula.to_string()}),
        Rule::Subst { theta } => json!({"theta": subst_json(theta)}),
        Rule::EqLa { x, y, t, u, template } => json!({
            "x": x.to_string(),
            "y": y.to_string(),
            "t": t.to_string(),
            "u": u.to_string(),
            "template": sequent_json(template),
        }),
        Rule::UnfoldRight { pred, production, theta } => json!({
            "pred": pred.to_string(),
            "production": production,
            "theta": subst_json(theta),
        }),
        Rule::Case { pred, principal, fresh } => json!({
            "pred": pred.to_string(),
            "principal": principal.to_string(),
            "fresh": fresh
                .iter()
                .map(|vs| vs.iter().map(|v| v.to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        }),
    }
}

/// Serialize a proof with the given `defs` field.
pub fn to_json(defs: &str, proof: &PreProof) -> String {
    let nodes: Map<String, Value> = proof
        .nodes
        .iter()
        .map(|(a, n)| {
            (
                a.to_string(),
                json!({"seq": sequent_json(&n.seq), "rule": n.rule.name(), "args": args_json(&n.rule)}),
            )
        })
        .collect();
    let buds: Map<String, Value> =
        proof.buds.iter().map(|(b, c)| (b.to_string(), Value::String(c.to_string()))).collect();
    let doc = json!({"defs": defs, "nodes": nodes, "buds": buds});
    let mut out = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    out.push('\n');
    out
}

struct Reader<'a> {
    system: &'a InductiveSystem,
}

impl Reader<'_> {
    fn str<'v>(&self, v: &'v Value, key: &str) -> Result<&'v str, FormatError> {
        v.get(key).and_then(Value::as_str).ok_or_else(|| shape(format!("missing string field {key:?}")))
    }

    fn name(&self, v: &Value, key: &str) -> Result<Name, FormatError> {
        Ok(name(self.str(v, key)?))
    }

    fn formulas(&self, v: &Value, key: &str) -> Result<Vec<crate::syntax::Formula>, FormatError> {
        let arr = v.get(key).and_then(Value::as_array).ok_or_else(|| shape(format!("missing list {key:?}")))?;
        arr.iter()
            .map(|f| {
                let s = f.as_str().ok_or_else(|| shape("formula must be a string"))?;
                Ok(self.system.parse_formula(s)?)
            })
            .collect()
    }

    fn sequent(&self, v: &Value) -> Result<Sequent, FormatError> {
        Ok(Sequent::new(self.formulas(v, "ante")?, self.formulas(v, "succ")?))
    }

    fn subst(&self, v: &Value, key: &str) -> Result<Substitution, FormatError> {
        let obj = v.get(key).and_then(Value::as_object).ok_or_else(|| shape(format!("missing map {key:?}")))?;
        obj.iter()
            .map(|(k, t)| {
                let s = t.as_str().ok_or_else(|| shape("substitution target must be a string"))?;
                Ok((name(k), self.system.parse_term(s)?))
            })
            .collect()
    }

    fn rule(&self, rule: &str, args: &Value) -> Result<Rule, FormatError> {
        Ok(match rule {
            "Axiom" => Rule::Axiom,
            "Weak" => Rule::Weak,
            "EqR" => Rule::EqR,
            "Bud" => Rule::Bud,
            "Cut" => Rule::Cut { formula: self.system.parse_formula(self.str(args, "formula")?)? },
            "Subst" => Rule::Subst { theta: self.subst(args, "theta")? },
            "EqLa" => Rule::EqLa {
                x: self.name(args, "x")?,
                y: self.name(args, "y")?,
                t: self.system.parse_term(self.str(args, "t")?)?,
                u: self.system.parse_term(self.str(args, "u")?)?,
                template: self.sequent(args.get("template").ok_or_else(|| shape("EqLa needs a template"))?)?,
            },
            "UnfoldRight" => Rule::UnfoldRight {
                pred: self.name(args, "pred")?,
                production: args
                    .get("production")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| shape("UnfoldRight needs a production index"))? as usize,
                theta: self.subst(args, "theta")?,
            },
            "Case" => {
                let fresh = args
                    .get("fresh")
                    .and_then(Value::as_array)
                    .ok_or_else(|| shape("Case needs fresh variable lists"))?
                    .iter()
                    .map(|vs| {
                        vs.as_array()
                            .ok_or_else(|| shape("fresh entry must be a list"))?
                            .iter()
                            .map(|v| v.as_str().map(name).ok_or_else(|| shape("fresh variable must be a string")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Rule::Case {
                    pred: self.name(args, "pred")?,
                    principal: self.system.parse_formula(self.str(args, "principal")?)?,
                    fresh,
                }
            }
            other => return Err(shape(format!("unknown rule {other:?}"))),
        })
    }
}

/// Parse a proof file. `system` overrides the definitions named in the
/// file; otherwise they are loaded from the `defs` field, resolving paths
/// against `base_dir`.
pub fn from_json(
    text: &str,
    system: Option<&InductiveSystem>,
    base_dir: Option<&Path>,
) -> Result<ProofFile, FormatError> {
    let doc: Value = serde_json::from_str(text)?;
    let defs = doc.get("defs").and_then(Value::as_str).unwrap_or("").to_string();
    let system = match system {
        Some(s) => s.clone(),
        None if is_inline_defs(&defs) => InductiveSystem::parse(&defs)?,
        None => {
            let path = base_dir.map_or_else(|| Path::new(&defs).to_path_buf(), |d| d.join(&defs));
            let text = std::fs::read_to_string(&path)
                .map_err(|source| FormatError::Io { path: path.display().to_string(), source })?;
            InductiveSystem::parse(&text)?
        }
    };
    let reader = Reader { system: &system };
    let mut proof = PreProof::new();
    let nodes = doc.get("nodes").and_then(Value::as_object).ok_or_else(|| shape("missing \"nodes\""))?;
    for (addr, n) in nodes {
        let addr: Addr = addr.parse().map_err(|e: super::BadAddr| shape(e.to_string()))?;
        let seq = reader.sequent(n.get("seq").ok_or_else(|| shape(format!("node {addr} has no seq")))?)?;
        let rule_name = reader.str(n, "rule")?;
        let empty = json!({});
        let rule = reader.rule(rule_name, n.get("args").unwrap_or(&empty))?;
        proof.insert(addr, seq, rule);
    }
    if let Some(buds) = doc.get("buds") {
        let buds = buds.as_object().ok_or_else(|| shape("\"buds\" must be an object"))?;
        for (b, c) in buds {
            let c = c.as_str().ok_or_else(|| shape("companion must be an address string"))?;
            let parse = |s: &str| s.parse::<Addr>().map_err(|e| shape(e.to_string()));
            proof.buds.insert(parse(b)?, parse(c)?);
        }
    }
    Ok(ProofFile { defs, system, proof })
}
