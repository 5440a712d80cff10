//! Command dispatch.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use nnq_core::analysis::{
    counterfactual_explain, feature_contribution, integrate_box, robustness_check, shap, shap_all, AnalysisError,
    InputBox, Metric,
};
use nnq_core::fosum::{eval_formula, eval_weight_term, parse_fosum, Parsed, Valuation};
use nnq_core::geometry::{build_cd, Arrangement};
use nnq_core::network::{
    build_sawtooth, load_network, to_structure, to_structure_with_inputs, useless_neurons, useless_neurons_direct,
    Network, NeuronId,
};
use nnq_core::pwl::{pwl_from_network, PwlFunction};
use nnq_core::query::{
    build_query_arrangement, evaluate_query, normalize_ordered_prenex, parse_query, QueryAnswer,
};
use nnq_core::{LiftedRational, Rational};

use crate::args::{Command, QueryText};

/// A failed run with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Failure { code: 3, message: message.into() }
    }
}

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::input(e.to_string())
}

/// Command output; `falsified` marks a false boolean answer.
pub struct Reply {
    pub result: Value,
    pub falsified: bool,
}

impl Reply {
    fn value(result: Value) -> Self {
        Reply { result, falsified: false }
    }

    fn boolean(b: bool) -> Self {
        Reply { result: Value::Bool(b), falsified: !b }
    }
}

fn rational(s: &str) -> Result<Rational, Failure> {
    s.trim().parse().map_err(|_| Failure::usage(format!("bad rational `{s}`")))
}

fn vector(s: &str) -> Result<Vec<Rational>, Failure> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(rational).collect()
}

fn input_box(s: &str) -> Result<InputBox, Failure> {
    let sides = s
        .split(';')
        .map(|side| match vector(side)?.as_slice() {
            [a, b] => Ok((a.clone(), b.clone())),
            _ => Err(Failure::usage(format!("box side `{side}` must be `a,b`"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    InputBox::new(sides).map_err(|e| Failure::usage(e.to_string()))
}

fn bindings(items: &[String]) -> Result<Vec<(String, String)>, Failure> {
    items
        .iter()
        .map(|p| match p.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(Failure::usage(format!("expected NAME=VALUE, got `{p}`"))),
        })
        .collect()
}

fn params(items: &[String]) -> Result<BTreeMap<String, Rational>, Failure> {
    bindings(items)?.into_iter().map(|(k, v)| Ok((k, rational(&v)?))).collect()
}

fn metric(s: &str) -> Result<Metric, Failure> {
    s.parse().map_err(Failure::usage)
}

fn feature(i: usize) -> Result<usize, Failure> {
    i.checked_sub(1).ok_or_else(|| Failure::usage("features are numbered from 1"))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn text(path: &Option<std::path::PathBuf>, inline: &Option<String>) -> Result<String, Failure> {
    match (path, inline) {
        (Some(p), _) => read(p),
        (None, Some(s)) => Ok(s.clone()),
        (None, None) => Err(Failure::usage("no query text given")),
    }
}

fn network(path: &Path) -> Result<Network, Failure> {
    load_network(&read(path)?).map_err(input_err)
}

fn first_output(net: &Network) -> Result<PwlFunction, Failure> {
    pwl_from_network(net, NeuronId::Output(0)).map_err(input_err)
}

fn analysis_err(e: AnalysisError) -> Failure {
    input_err(e)
}

fn rationals(v: &[Rational]) -> Value {
    json!(v.iter().map(|r| r.to_string()).collect::<Vec<_>>())
}

fn lifted(v: &LiftedRational) -> Value {
    Value::String(v.to_string())
}

pub fn run(cmd: &Command) -> Result<Reply, Failure> {
    match cmd {
        Command::Eval { model, input } => {
            let net = network(&model.model)?;
            let y = net.forward(&vector(input)?).map_err(input_err)?;
            Ok(Reply::value(rationals(&y)))
        }
        Command::Fosum {
            model,
            term,
            term_str,
            input,
            weights,
            binds,
        } => {
            let net = network(&model.model)?;
            let s = match input {
                Some(x) => to_structure_with_inputs(&net, &vector(x)?).map_err(input_err)?,
                None => to_structure(&net),
            };
            let extra: Vec<(String, LiftedRational)> = params(weights)?
                .into_iter()
                .map(|(k, v)| (k, LiftedRational::Value(v)))
                .collect();
            let s = s.with_weight_constants(&extra).map_err(input_err)?;
            let mut val = Valuation::new();
            for (var, label) in bindings(binds)? {
                let e = s
                    .element_by_label(&label)
                    .ok_or_else(|| Failure::input(format!("no neuron labelled `{label}`")))?;
                val = val.with(&var, e);
            }
            let parsed = parse_fosum(&text(term, term_str)?, s.vocabulary()).map_err(input_err)?;
            let free = match &parsed {
                Parsed::Formula(f) => f.free_variables(),
                Parsed::Term(t) => t.free_variables(),
            };
            if let Some(v) = free.iter().find(|v| val.get(v).is_none()) {
                return Err(Failure::input(format!("free variable `{v}` is not bound; use --bind {v}=LABEL")));
            }
            Ok(match parsed {
                Parsed::Formula(f) => Reply::boolean(eval_formula(&s, &f, &val)),
                Parsed::Term(t) => Reply::value(lifted(&eval_weight_term(&s, &t, &val))),
            })
        }
        Command::ExtractPwl { model, output_index } => {
            let net = network(&model.model)?;
            let j = output_index
                .checked_sub(1)
                .ok_or_else(|| Failure::usage("outputs are numbered from 1"))?;
            let f = pwl_from_network(&net, NeuronId::Output(j)).map_err(input_err)?;
            Ok(Reply::value(f.to_json()))
        }
        Command::Query { model, query } => {
            let net = network(&model.model)?;
            let QueryText {
                query: path,
                query_str,
                params: ps,
                free,
            } = query;
            let answer = evaluate_query(&net, &text(path, query_str)?, &params(ps)?, free).map_err(input_err)?;
            Ok(match answer {
                QueryAnswer::Closed(b) => Reply::boolean(b),
                QueryAnswer::Open { variables, cells } => Reply::value(json!({
                    "variables": variables,
                    "cells": cells
                        .iter()
                        .map(|(c, sample)| json!({ "cell": c, "sample": rationals(sample) }))
                        .collect::<Vec<_>>(),
                })),
            })
        }
        Command::Integrate { model, bounds } => {
            let f = first_output(&network(&model.model)?)?;
            let v = integrate_box(&f, &input_box(bounds)?).map_err(analysis_err)?;
            Ok(Reply::value(json!(v.to_string())))
        }
        Command::Shap {
            model,
            point,
            bounds,
            feature: i,
        } => {
            let f = first_output(&network(&model.model)?)?;
            let (y, b) = (vector(point)?, input_box(bounds)?);
            Ok(Reply::value(match i {
                Some(i) => json!(shap(&f, &y, &b, feature(*i)?).map_err(analysis_err)?.to_string()),
                None => rationals(&shap_all(&f, &y, &b).map_err(analysis_err)?),
            }))
        }
        Command::Robust {
            model,
            point,
            eps,
            delta,
            metric: m,
        } => {
            let f = first_output(&network(&model.model)?)?;
            let b = robustness_check(&f, &vector(point)?, &rational(eps)?, &rational(delta)?, metric(m)?)
                .map_err(analysis_err)?;
            Ok(Reply::boolean(b))
        }
        Command::Counterfactual {
            model,
            point,
            threshold,
            metric: m,
            bounds,
        } => {
            let f = first_output(&network(&model.model)?)?;
            let bbox = bounds.as_deref().map(input_box).transpose()?;
            match counterfactual_explain(&f, &vector(point)?, &rational(threshold)?, metric(m)?, bbox.as_ref()) {
                Ok(c) => Ok(Reply::value(json!({
                    "found": true,
                    "witness": rationals(&c.witness),
                    "distance": c.distance.to_string(),
                    "attained": c.attained,
                    "interior": rationals(&c.interior),
                }))),
                Err(AnalysisError::NoCounterfactual) => Ok(Reply {
                    result: json!({ "found": false, "message": "no counterfactual in box" }),
                    falsified: true,
                }),
                Err(e) => Err(analysis_err(e)),
            }
        }
        Command::Contribution {
            model,
            point,
            feature: i,
            eps,
        } => {
            let f = first_output(&network(&model.model)?)?;
            let r = feature_contribution(&f, &vector(point)?, feature(*i)?, &rational(eps)?).map_err(analysis_err)?;
            Ok(Reply::value(r.map_or(Value::Null, |r| json!(r.to_string()))))
        }
        Command::UselessNeurons {
            model,
            input,
            eps,
            direct,
        } => {
            let net = network(&model.model)?;
            let (x, e) = (vector(input)?, rational(eps)?);
            let found = if *direct {
                useless_neurons_direct(&net, &x, &e)
            } else {
                useless_neurons(&net, &x, &e)
            }
            .map_err(input_err)?;
            Ok(Reply::value(json!(found.iter().map(|id| id.to_string()).collect::<Vec<_>>())))
        }
        Command::CdStats {
            model,
            query,
            query_str,
            params: ps,
            free,
        } => {
            let net = network(&model.model)?;
            let f = first_output(&net)?;
            let arr = if query.is_some() || query_str.is_some() {
                let ast = parse_query(&text(query, query_str)?, net.inputs()).map_err(input_err)?;
                let q = normalize_ordered_prenex(&ast, &params(ps)?, free).map_err(input_err)?;
                build_query_arrangement(Some(&f), &q).map_err(input_err)?
            } else {
                Arrangement::from_planes(f.inputs(), f.breakplanes().iter().cloned()).map_err(input_err)?
            };
            let cd = build_cd(&arr);
            let pools: Vec<Value> = (1..=cd.dim())
                .map(|l| json!(cd.pool(l).iter().map(|h| rationals(h.coeffs())).collect::<Vec<_>>()))
                .collect();
            Ok(Reply::value(json!({
                "dimension": cd.dim(),
                "planes": arr.len(),
                "cells": cd.level_sizes(),
                "pools": pools,
            })))
        }
        Command::GenSawtooth { s1, s2 } => {
            let net = build_sawtooth(&vector(s1)?, &vector(s2)?).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(Reply::value(net.to_json()))
        }
    }
}
