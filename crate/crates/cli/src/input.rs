use std::path::Path;

use anyhow::{Context, Result};
use teamcount::cnf::{parse_dimacs, QbFormula};
use teamcount::formula::{parse_formula, vars, Formula, Var};
use teamcount::reduce::{builtin_formula, BuiltinFormula};
use teamcount::structure::{parse_structure, parse_team, Structure, Team};

use crate::report::Report;
use crate::Common;

/// Bad or missing command-line input; exits with status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn structure(c: &Common, report: &mut Report) -> Result<Structure> {
    let Some(path) = &c.structure else {
        return usage("--structure is required");
    };
    let text = read_file(path)?;
    report.input("structure", &path.display().to_string(), text.as_bytes());
    parse_structure(&text).with_context(|| path.display().to_string())
}

pub enum Source {
    Builtin(String, BuiltinFormula),
    Text { label: String, text: String },
}

pub fn formula_source(c: &Common, report: &mut Report) -> Result<Source> {
    let Some(arg) = &c.formula else {
        return usage("--formula is required");
    };
    if let Some(name) = arg.strip_prefix("builtin:") {
        let b = builtin_formula(name).map_err(|e| UsageError(e.to_string()))?;
        report.push("input.formula", arg);
        return Ok(Source::Builtin(name.to_string(), b));
    }
    let path = Path::new(arg);
    let (label, text) = if path.is_file() {
        (arg.clone(), read_file(path)?)
    } else {
        ("inline".to_string(), arg.clone())
    };
    report.input("formula", &label, text.as_bytes());
    Ok(Source::Text { label, text })
}

/// A team formula and its counted tuple: --vars, else the built-in's tuple,
/// else the free variables in sorted order.
pub fn team_formula(c: &Common, report: &mut Report) -> Result<(Formula, Vec<Var>)> {
    let (f, default) = match formula_source(c, report)? {
        Source::Builtin(_, BuiltinFormula::Team { formula, vars, .. }) => (formula, Some(vars)),
        Source::Builtin(name, _) => return usage(format!("`{name}` is counted with count-relations")),
        Source::Text { label, text } => (parse_formula(&text).with_context(|| label)?, None),
    };
    let tuple = match (&c.vars, default) {
        (Some(list), _) => var_list(list),
        (None, Some(d)) => d,
        (None, None) => f.free_vars().into_iter().collect(),
    };
    report.push("vars", tuple.iter().map(Var::as_str).collect::<Vec<_>>().join(","));
    Ok((f, tuple))
}

pub fn var_list(list: &str) -> Vec<Var> {
    vars(&list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect::<Vec<_>>())
}

pub fn dimacs(c: &Common, report: &mut Report) -> Result<QbFormula> {
    match formula_source(c, report)? {
        Source::Builtin(name, _) => usage(format!("`{name}` is not a DIMACS formula")),
        Source::Text { label, text } => Ok(parse_dimacs(&text).with_context(|| label)?),
    }
}

pub fn dimacs_file(path: &Path, key: &str, report: &mut Report) -> Result<QbFormula> {
    let text = read_file(path)?;
    report.input(key, &path.display().to_string(), text.as_bytes());
    parse_dimacs(&text).with_context(|| path.display().to_string())
}

pub fn team(c: &Common, vars: &[Var], n: usize, report: &mut Report) -> Result<Team> {
    let Some(arg) = &c.team else {
        return usage("--team is required");
    };
    match arg.as_str() {
        "empty" => {
            report.push("input.team", "empty");
            Ok(Team::new(vars.to_vec())?)
        }
        "full" => {
            report.push("input.team", "full");
            Ok(Team::full(vars.to_vec(), n)?)
        }
        path => {
            let text = read_file(Path::new(path))?;
            report.input("team", path, text.as_bytes());
            let t = parse_team(&text).with_context(|| path.to_string())?;
            if t.max_value().is_some_and(|m| m >= n) {
                anyhow::bail!("team {path} uses an element outside the structure");
            }
            Ok(t)
        }
    }
}

/// Writes an emitted instance to --output, or keeps it for stdout.
pub fn emit(c: &Common, name: &str, text: String, report: &mut Report) -> Result<()> {
    match &c.output {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("cannot write {}", path.display()))?;
            report.output(name, &path.display().to_string(), text.as_bytes());
        }
        None => report.artifact = Some(text),
    }
    Ok(())
}
