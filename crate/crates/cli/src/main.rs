//! `nnq`: exact queries, integrals and attributions for ReLU networks.

mod args;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::{json, Value};

use args::Cli;
use run::{Failure, Reply};

fn decimalize(v: &Value, digits: usize) -> Value {
    match v {
        Value::String(s) => match s.parse::<nnq_core::Rational>() {
            Ok(r) => Value::String(r.to_decimal_string(digits)),
            Err(_) => v.clone(),
        },
        Value::Array(xs) => Value::Array(xs.iter().map(|x| decimalize(x, digits)).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, x)| (k.clone(), decimalize(x, digits))).collect()),
        _ => v.clone(),
    }
}

fn emit(cli: &Cli, reply: &Reply, elapsed_ms: f64) -> Result<(), Failure> {
    let mut doc = json!({
        "command": cli.command.name(),
        "result": reply.result,
        "timings": { "total_ms": elapsed_ms },
    });
    if let Some(k) = cli.decimal {
        doc["approximate"] = json!({
            "note": format!("decimal rendering truncated to {k} digits; not exact"),
            "result": decimalize(&reply.result, k),
        });
    }
    let text = serde_json::to_string_pretty(&doc).expect("serialisable") + "\n";
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("NNQ_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("NNQ_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let t = Instant::now();
    let outcome = configure_threads()
        .and_then(|_| run::run(&cli.command))
        .and_then(|reply| {
            emit(&cli, &reply, t.elapsed().as_secs_f64() * 1e3)?;
            Ok(reply)
        });
    match outcome {
        Ok(reply) if reply.falsified && cli.strict => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
