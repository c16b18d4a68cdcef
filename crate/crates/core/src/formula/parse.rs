use std::collections::HashMap;

use thiserror::Error;

use super::{is_builtin, Formula, Var, BUILTIN_ADD, BUILTIN_LE, BUILTIN_MUL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("arity mismatch at offset {offset}: `{name}` expects {expected}, found {found}")]
    Arity {
        offset: usize,
        name: String,
        expected: String,
        found: usize,
    },
    #[error("unknown symbol `{name}` at offset {offset}")]
    UnknownSymbol { offset: usize, name: String },
}

impl FormulaError {
    pub fn offset(&self) -> usize {
        match self {
            FormulaError::Syntax { offset, .. }
            | FormulaError::Arity { offset, .. }
            | FormulaError::UnknownSymbol { offset, .. } => *offset,
        }
    }
}

/// Declared relation arities and generalized-atom types for checking parsed
/// formulas. Built-in arithmetic relations are always known.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    relations: HashMap<String, usize>,
    atoms: HashMap<String, Vec<usize>>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_relation(mut self, name: impl Into<String>, arity: usize) -> Self {
        self.relations.insert(name.into(), arity);
        self
    }

    pub fn with_atom(mut self, name: impl Into<String>, arities: Vec<usize>) -> Self {
        self.atoms.insert(name.into(), arities);
        self
    }

    pub fn add_relation(&mut self, name: impl Into<String>, arity: usize) {
        self.relations.insert(name.into(), arity);
    }

    pub fn add_atom(&mut self, name: impl Into<String>, arities: Vec<usize>) {
        self.atoms.insert(name.into(), arities);
    }
}

/// Parses a formula of the team-logic DSL.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    Parser::new(text, None)?.parse_all()
}

/// Parses and checks every relation and generalized atom against `sig`.
pub fn parse_formula_with(text: &str, sig: &Signature) -> Result<Formula, FormulaError> {
    Parser::new(text, Some(sig))?.parse_all()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Bar,
    Amp,
    Bang,
    Eq,
    Neq,
    Dot,
    Le,
    Plus,
    Star,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::End => "end of input".to_string(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Bar => "|",
            Tok::Amp => "&",
            Tok::Bang => "!",
            Tok::Eq => "=",
            Tok::Neq => "!=",
            Tok::Dot => ".",
            Tok::Le => BUILTIN_LE,
            Tok::Plus => BUILTIN_ADD,
            Tok::Star => BUILTIN_MUL,
            Tok::Ident(_) | Tok::End => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b';' => Tok::Semi,
            b'|' => Tok::Bar,
            b'&' => Tok::Amp,
            b'.' => Tok::Dot,
            b'=' => Tok::Eq,
            b'+' => Tok::Plus,
            b'*' => Tok::Star,
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Neq
            }
            b'!' => Tok::Bang,
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                i += 1;
                Tok::Le
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
                {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(FormulaError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{ch}`"),
                });
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    sig: Option<&'s Signature>,
}

impl<'s> Parser<'s> {
    fn new(text: &str, sig: Option<&'s Signature>) -> Result<Self, FormulaError> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            sig,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> FormulaError {
        FormulaError::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {}", self.peek().describe()),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FormulaError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&format!("`{}`", tok.symbol())))
        }
    }

    fn ident(&mut self) -> Result<String, FormulaError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn parse_all(mut self) -> Result<Formula, FormulaError> {
        let f = self.disjunction()?;
        if *self.peek() != Tok::End {
            return Err(self.unexpected("end of input"));
        }
        Ok(f)
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let r = self.conjunction()?;
            f = Formula::or(f, r);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let r = self.unary()?;
            f = Formula::and(f, r);
        }
        Ok(f)
    }

    fn is_quantifier(&self) -> bool {
        matches!(self.peek(), Tok::Ident(q) if q == "A" || q == "E")
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Dot
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.is_quantifier() {
            let q = self.ident()?;
            let v = Var::new(self.ident()?);
            self.expect(Tok::Dot)?;
            // The body extends as far to the right as possible.
            let body = self.disjunction()?;
            return Ok(if q == "A" {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            });
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let f = self.disjunction()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        self.atom()
    }

    fn var_list(&mut self, terminators: &[Tok]) -> Result<Vec<Var>, FormulaError> {
        let mut out = Vec::new();
        if terminators.contains(self.peek()) {
            return Ok(out);
        }
        loop {
            out.push(Var::new(self.ident()?));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    fn relation_name(&mut self) -> Result<Option<String>, FormulaError> {
        let name = match self.peek().clone() {
            Tok::Le | Tok::Plus | Tok::Star => Some(self.bump().symbol().to_string()),
            Tok::Ident(s) if *self.peek_at(1) == Tok::LParen => {
                self.bump();
                Some(s)
            }
            _ => None,
        };
        Ok(name)
    }

    fn relation_atom(&mut self, positive: bool) -> Result<Formula, FormulaError> {
        let at = self.offset();
        let name = self
            .relation_name()?
            .ok_or_else(|| self.unexpected("relation atom"))?;
        if !positive && matches!(name.as_str(), "dep" | "inc" | "ind") {
            return Err(FormulaError::Syntax {
                offset: at,
                message: "negation is only allowed on relation atoms".into(),
            });
        }
        self.expect(Tok::LParen)?;
        let args = self.var_list(&[Tok::RParen])?;
        self.expect(Tok::RParen)?;
        self.check_relation(at, &name, args.len())?;
        Ok(Formula::Rel {
            name,
            args,
            positive,
        })
    }

    fn check_relation(&self, at: usize, name: &str, found: usize) -> Result<(), FormulaError> {
        if is_builtin(name) {
            let base = if name == BUILTIN_LE { 2 } else { 3 };
            if found == 0 || found % base != 0 {
                return Err(FormulaError::Arity {
                    offset: at,
                    name: name.to_string(),
                    expected: format!("a positive multiple of {base}"),
                    found,
                });
            }
            return Ok(());
        }
        let Some(sig) = self.sig else { return Ok(()) };
        match sig.relations.get(name) {
            None => Err(FormulaError::UnknownSymbol {
                offset: at,
                name: name.to_string(),
            }),
            Some(&a) if a != found => Err(FormulaError::Arity {
                offset: at,
                name: name.to_string(),
                expected: a.to_string(),
                found,
            }),
            Some(_) => Ok(()),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        let at = self.offset();
        if *self.peek() == Tok::Bang {
            self.bump();
            return self.relation_atom(false);
        }
        if let Tok::Ident(word) = self.peek().clone() {
            let next = self.peek_at(1).clone();
            match (word.as_str(), &next) {
                ("dep", Tok::LParen) => {
                    self.bump();
                    self.bump();
                    let determiners = self.var_list(&[Tok::Semi])?;
                    self.expect(Tok::Semi)?;
                    let dependent = Var::new(self.ident()?);
                    self.expect(Tok::RParen)?;
                    return Ok(Formula::Dep {
                        determiners,
                        dependent,
                    });
                }
                ("inc", Tok::LParen) => {
                    self.bump();
                    self.bump();
                    let sub = self.var_list(&[Tok::Semi])?;
                    self.expect(Tok::Semi)?;
                    let sup = self.var_list(&[Tok::RParen])?;
                    self.expect(Tok::RParen)?;
                    if sub.len() != sup.len() {
                        return Err(FormulaError::Arity {
                            offset: at,
                            name: "inc".into(),
                            expected: format!("tuples of equal length ({})", sub.len()),
                            found: sup.len(),
                        });
                    }
                    return Ok(Formula::Inc { sub, sup });
                }
                ("ind", Tok::LParen) => {
                    self.bump();
                    self.bump();
                    let left = self.var_list(&[Tok::Bar])?;
                    self.expect(Tok::Bar)?;
                    let given = self.var_list(&[Tok::Bar])?;
                    self.expect(Tok::Bar)?;
                    let right = self.var_list(&[Tok::RParen])?;
                    self.expect(Tok::RParen)?;
                    return Ok(Formula::Ind { left, given, right });
                }
                ("atom", Tok::Ident(_)) => {
                    self.bump();
                    let name = self.ident()?;
                    self.expect(Tok::LParen)?;
                    let mut args = vec![self.var_list(&[Tok::Semi, Tok::RParen])?];
                    while *self.peek() == Tok::Semi {
                        self.bump();
                        args.push(self.var_list(&[Tok::Semi, Tok::RParen])?);
                    }
                    self.expect(Tok::RParen)?;
                    self.check_atom(at, &name, &args)?;
                    return Ok(Formula::Gen { name, args });
                }
                (_, Tok::Eq) | (_, Tok::Neq) => {
                    self.bump();
                    let positive = self.bump() == Tok::Eq;
                    let right = Var::new(self.ident()?);
                    return Ok(Formula::Eq {
                        left: Var::new(word),
                        right,
                        positive,
                    });
                }
                _ => {}
            }
        }
        match self.peek() {
            Tok::Ident(_) if *self.peek_at(1) == Tok::LParen => self.relation_atom(true),
            Tok::Le | Tok::Plus | Tok::Star => self.relation_atom(true),
            Tok::Ident(_) => {
                self.bump();
                Err(self.unexpected("`=`, `!=` or `(`"))
            }
            _ => Err(self.unexpected("formula")),
        }
    }

    fn check_atom(&self, at: usize, name: &str, args: &[Vec<Var>]) -> Result<(), FormulaError> {
        let Some(sig) = self.sig else { return Ok(()) };
        let Some(ty) = sig.atoms.get(name) else {
            return Err(FormulaError::UnknownSymbol {
                offset: at,
                name: name.to_string(),
            });
        };
        let found: Vec<usize> = args.iter().map(Vec::len).collect();
        if *ty != found {
            return Err(FormulaError::Arity {
                offset: at,
                name: name.to_string(),
                expected: format!("{ty:?}"),
                found: found.iter().sum(),
            });
        }
        Ok(())
    }
}
