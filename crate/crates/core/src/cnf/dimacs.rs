use std::fmt::Write;

use super::{CnfError, Lit, QbFormula, VarId};

/// Parses DIMACS CNF with an optional single `e v1 v2 ... 0` line listing the
/// existentially quantified variables. Unlisted variables are free.
pub fn parse_dimacs(text: &str) -> Result<QbFormula, CnfError> {
    let mut header: Option<(u32, usize)> = None;
    let mut bound: Option<Vec<VarId>> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current: Vec<Lit> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(CnfError::Parse {
                    line,
                    message: "duplicate header".into(),
                });
            }
            let bad = || CnfError::Parse {
                line,
                message: "expected `p cnf VARS CLAUSES`".into(),
            };
            toks.next();
            if toks.next() != Some("cnf") {
                return Err(bad());
            }
            let v = toks.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            let c = toks.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
            if toks.next().is_some() {
                return Err(bad());
            }
            header = Some((v, c));
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(CnfError::MissingHeader);
        };
        let is_prefix = trimmed.starts_with('e');
        if is_prefix {
            if bound.is_some() {
                return Err(CnfError::DuplicatePrefix { line });
            }
            toks.next();
        }
        let mut ints = Vec::new();
        for t in toks {
            let x: i64 = t.parse().map_err(|_| CnfError::Parse {
                line,
                message: format!("bad integer `{t}`"),
            })?;
            if x != 0 && x.unsigned_abs() > num_vars as u64 {
                return Err(CnfError::LiteralOutOfRange {
                    line,
                    lit: x,
                    num_vars,
                });
            }
            ints.push(x);
        }
        if is_prefix {
            if ints.last() != Some(&0) || ints[..ints.len() - 1].iter().any(|&x| x <= 0) {
                return Err(CnfError::Parse {
                    line,
                    message: "prefix line must list positive variables and end with 0".into(),
                });
            }
            bound = Some(ints[..ints.len() - 1].iter().map(|&x| x as VarId).collect());
            continue;
        }
        for x in ints {
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                current.push(Lit::from_dimacs(x as i32));
            }
        }
    }
    let (num_vars, declared) = header.ok_or(CnfError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(CnfError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    QbFormula::new(num_vars, clauses, bound.unwrap_or_default())
}

pub fn write_dimacs(f: &QbFormula) -> String {
    write_dimacs_with_comments(f, &[])
}

pub fn write_dimacs_with_comments(f: &QbFormula, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "c {c}");
    }
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.clauses().len());
    if !f.bound().is_empty() {
        out.push('e');
        for v in f.bound() {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
    }
    for c in f.clauses() {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
    out
}
