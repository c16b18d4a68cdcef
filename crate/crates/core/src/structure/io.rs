use std::fmt::Write;

use super::{Structure, StructureError, Team};
use crate::formula::Var;

fn parse_err(line: usize, message: impl Into<String>) -> StructureError {
    StructureError::Parse {
        line,
        message: message.into(),
    }
}

fn numbers(line: usize, text: &str) -> Result<Vec<usize>, StructureError> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| parse_err(line, format!("bad element `{t}`"))))
        .collect()
}

fn content(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

/// Reads the structure format:
///
/// ```text
/// domain 3
/// rel E/2
/// 0 1
/// 1 2
/// rel P/1
/// ```
///
/// Blank lines and `#` comments are ignored; tuples are validated eagerly.
pub fn parse_structure(text: &str) -> Result<Structure, StructureError> {
    let mut a: Option<Structure> = None;
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let attach = |e: StructureError| match e {
            StructureError::Parse { .. } => e,
            other => parse_err(line, other.to_string()),
        };
        if let Some(rest) = body.strip_prefix("domain") {
            if a.is_some() {
                return Err(parse_err(line, "duplicate domain line"));
            }
            let n = rest
                .trim()
                .parse()
                .map_err(|_| parse_err(line, "expected `domain N`"))?;
            a = Some(Structure::new(n).map_err(attach)?);
            continue;
        }
        let Some(st) = a.as_mut() else {
            return Err(parse_err(line, "missing `domain N` line"));
        };
        if let Some(rest) = body.strip_prefix("rel ") {
            let (name, arity) = rest
                .trim()
                .split_once('/')
                .ok_or_else(|| parse_err(line, "expected `rel NAME/ARITY`"))?;
            let arity: usize = arity
                .trim()
                .parse()
                .map_err(|_| parse_err(line, "bad arity"))?;
            let name = name.trim();
            if name.is_empty() {
                return Err(parse_err(line, "empty relation name"));
            }
            st.add_relation(name, arity).map_err(attach)?;
            current = Some(name.to_string());
            continue;
        }
        let Some(name) = current.as_deref() else {
            return Err(parse_err(line, "tuple outside a relation block"));
        };
        let tuple = numbers(line, body)?;
        st.insert(name, &tuple).map_err(attach)?;
    }
    a.ok_or_else(|| parse_err(0, "missing `domain N` line"))
}

pub fn write_structure(a: &Structure) -> String {
    let mut out = format!("domain {}\n", a.size());
    for (name, r) in a.relations() {
        let _ = writeln!(out, "rel {name}/{}", r.arity());
        for t in r.tuples() {
            let row: Vec<String> = t.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

/// Reads a team: a header line of variable names, then one row of elements
/// per assignment.
pub fn parse_team(text: &str) -> Result<Team, StructureError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, content(l)))
        .filter(|(_, l)| !l.is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(parse_err(0, "missing header line"));
    };
    let vars: Vec<Var> = header
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(Var::new)
        .collect();
    let mut team = Team::new(vars).map_err(|e| parse_err(1, e.to_string()))?;
    for (line, body) in lines {
        let row = numbers(line, body)?;
        team.insert(row).map_err(|e| parse_err(line, e.to_string()))?;
    }
    Ok(team)
}

pub fn write_team(t: &Team) -> String {
    let names: Vec<&str> = t.vars().iter().map(Var::as_str).collect();
    let mut out = names.join(" ");
    out.push('\n');
    for r in t.rows() {
        let row: Vec<String> = r.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}
