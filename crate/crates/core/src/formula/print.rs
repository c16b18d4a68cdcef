use std::fmt::{self, Display, Write};

use super::{Formula, Var};

fn list(out: &mut fmt::Formatter<'_>, vs: &[Var]) -> fmt::Result {
    for (i, v) in vs.iter().enumerate() {
        if i > 0 {
            out.write_char(',')?;
        }
        write!(out, "{v}")?;
    }
    Ok(())
}

// A quantifier on the left of a binary connective would swallow the right
// operand when re-parsed.
fn operand(out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
    match f {
        Formula::Exists(..) | Formula::Forall(..) => write!(out, "({f})"),
        _ => write!(out, "{f}"),
    }
}

impl Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Rel {
                name,
                args,
                positive,
            } => {
                if !positive {
                    out.write_char('!')?;
                }
                write!(out, "{name}(")?;
                list(out, args)?;
                out.write_char(')')
            }
            Formula::Eq {
                left,
                right,
                positive,
            } => write!(out, "{left}{}{right}", if *positive { "=" } else { "!=" }),
            Formula::Dep {
                determiners,
                dependent,
            } => {
                out.write_str("dep(")?;
                list(out, determiners)?;
                write!(out, ";{dependent})")
            }
            Formula::Inc { sub, sup } => {
                out.write_str("inc(")?;
                list(out, sub)?;
                out.write_char(';')?;
                list(out, sup)?;
                out.write_char(')')
            }
            Formula::Ind { left, given, right } => {
                out.write_str("ind(")?;
                list(out, left)?;
                out.write_char('|')?;
                list(out, given)?;
                out.write_char('|')?;
                list(out, right)?;
                out.write_char(')')
            }
            Formula::Gen { name, args } => {
                write!(out, "atom {name}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        out.write_char(';')?;
                    }
                    list(out, t)?;
                }
                out.write_char(')')
            }
            Formula::And(l, r) | Formula::Or(l, r) => {
                let op = if matches!(self, Formula::And(..)) { '&' } else { '|' };
                out.write_char('(')?;
                operand(out, l)?;
                write!(out, " {op} ")?;
                write!(out, "{r})")
            }
            Formula::Exists(v, b) => write!(out, "E {v}. {b}"),
            Formula::Forall(v, b) => write!(out, "A {v}. {b}"),
        }
    }
}
