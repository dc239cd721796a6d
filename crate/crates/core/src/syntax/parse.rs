use std::collections::BTreeSet;

use super::system::{InductiveSystem, Production, Signature};
use super::{name, Formula, Sequent, Term};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("arity mismatch for {symbol}: expected {expected}, found {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("undeclared symbol {0}")]
    UndeclaredSymbol(String),
    #[error("duplicate declaration of {0}")]
    DuplicateDeclaration(String),
    #[error("bad production for {pred}: {detail}")]
    BadProduction { pred: String, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    Arrow,
    Turnstile,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let err = |line, col, m: String| ParseError::Syntax { line, col, message: m };
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            Tok::Num(s.parse().map_err(|_| err(l0, c0, format!("number too large: {s}")))?)
        } else {
            bump(&mut chars);
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' if chars.peek() == Some(&'>') => {
                    bump(&mut chars);
                    Tok::Arrow
                }
                '=' => Tok::Eq,
                '|' if chars.peek() == Some(&'-') => {
                    bump(&mut chars);
                    Tok::Turnstile
                }
                '⊢' => Tok::Turnstile,
                other => return Err(err(l0, c0, format!("unexpected character {other:?}"))),
            }
        };
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    sig: &'a Signature,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn new(text: &str, sig: &'a Signature) -> Result<Parser<'a>, ParseError> {
        let toks = lex(text)?;
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().map_or(0, |l| l.chars().count());
        Ok(Parser { toks, pos: 0, sig, end: (lines, last + 1) })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|s| &s.tok)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.col));
        ParseError::Syntax { line, col, message: message.into() }
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn number(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.error("expected arity")),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn args(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => return Ok(args),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected ',' or ')'"));
                }
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let id = self.ident("term")?;
        if self.sig.predicate_arity(&id).is_some() {
            self.pos -= 1;
            return Err(self.error(format!("predicate {id} used as a term")));
        }
        let arity = self.sig.function_arity(&id);
        if self.peek() == Some(&Tok::LParen) {
            let args = self.args()?;
            match arity {
                None => return Err(ParseError::UndeclaredSymbol(id)),
                Some(a) if a != args.len() => {
                    return Err(ParseError::ArityMismatch { symbol: id, expected: a, found: args.len() })
                }
                Some(_) => return Ok(Term::App(name(&id), args)),
            }
        }
        match arity {
            None => Ok(Term::Var(name(&id))),
            Some(0) => Ok(Term::App(name(&id), Vec::new())),
            Some(a) => Err(ParseError::ArityMismatch { symbol: id, expected: a, found: 0 }),
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        if let Some(Tok::Ident(id)) = self.peek() {
            if let Some(arity) = self.sig.predicate_arity(id) {
                let id = id.clone();
                self.pos += 1;
                let args =
                    if self.peek() == Some(&Tok::LParen) { self.args()? } else { Vec::new() };
                if args.len() != arity {
                    return Err(ParseError::ArityMismatch {
                        symbol: id,
                        expected: arity,
                        found: args.len(),
                    });
                }
                return Ok(Formula::Atom(name(&id), args));
            }
            if self.peek_at(1) == Some(&Tok::LParen) && self.sig.function_arity(id).is_none() {
                return Err(ParseError::UndeclaredSymbol(id.clone()));
            }
        }
        let l = self.term()?;
        self.expect(Tok::Eq, "'='")?;
        let r = self.term()?;
        Ok(Formula::Eq(l, r))
    }

    fn formula_list(&mut self, stop: &[Tok]) -> Result<Vec<Formula>, ParseError> {
        let mut out = Vec::new();
        if self.peek().is_none_or(|t| stop.contains(t)) {
            return Ok(out);
        }
        loop {
            out.push(self.formula()?);
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                return Ok(out);
            }
        }
    }
}

fn declare(
    sig: &mut Signature,
    seen: &mut BTreeSet<String>,
    kind: &str,
    id: String,
    arity: usize,
) -> Result<(), ParseError> {
    if !seen.insert(id.clone()) {
        return Err(ParseError::DuplicateDeclaration(id));
    }
    let n = name(&id);
    match kind {
        "const" | "fun" => sig.functions.insert(n, arity),
        "ordpred" => sig.ordinary_predicates.insert(n, arity),
        _ => sig.inductive_predicates.insert(n, arity),
    };
    Ok(())
}

/// Parse a `.ind` definition file.
///
/// Declarations may appear in any order, but a symbol must be declared
/// before a production body uses it. Productions are grouped by predicate
/// name in the result; within one predicate the source order is kept.
pub fn parse_definitions(text: &str) -> Result<InductiveSystem, ParseError> {
    let empty = Signature::default();
    let mut sig = Signature::default();
    let mut seen = BTreeSet::new();
    // (pred, body token range) collected on a first pass so that productions
    // can mention predicates declared later in the file.
    let mut bodies: Vec<(String, usize, usize)> = Vec::new();
    let mut p = Parser::new(text, &empty)?;
    while !p.at_end() {
        let kw = p.ident("declaration keyword")?;
        match kw.as_str() {
            "const" => {
                let id = p.ident("constant name")?;
                p.expect(Tok::Semi, "';'")?;
                declare(&mut sig, &mut seen, "const", id, 0)?;
            }
            "fun" | "ordpred" => {
                let id = p.ident("symbol name")?;
                let a = p.number()?;
                p.expect(Tok::Semi, "';'")?;
                declare(&mut sig, &mut seen, &kw, id, a)?;
            }
            "pred" => {
                let id = p.ident("predicate name")?;
                let a = p.number()?;
                p.expect(Tok::LBrace, "'{'")?;
                let start = p.pos;
                while p.peek().is_some_and(|t| *t != Tok::RBrace) {
                    p.pos += 1;
                }
                let end = p.pos;
                p.expect(Tok::RBrace, "'}'")?;
                declare(&mut sig, &mut seen, "pred", id.clone(), a)?;
                bodies.push((id, start, end));
            }
            other => {
                p.pos -= 1;
                return Err(p.error(format!("unknown declaration {other:?}")));
            }
        }
    }

    let toks = p.toks;
    bodies.sort_by(|a, b| a.0.cmp(&b.0));
    let mut productions = Vec::new();
    for (pred, start, end) in bodies {
        let mut q = Parser { toks: toks[..end].to_vec(), pos: start, sig: &sig, end: p.end };
        while !q.at_end() {
            let assumptions = q.formula_list(&[Tok::Arrow])?;
            q.expect(Tok::Arrow, "'=>'")?;
            let conclusion = q.formula()?;
            q.expect(Tok::Semi, "';'")?;
            if conclusion.predicate().map(|n| &**n) != Some(pred.as_str()) {
                return Err(ParseError::BadProduction {
                    pred: pred.clone(),
                    detail: format!("conclusion {conclusion} is not a {pred} atom"),
                });
            }
            if let Some(bad) = assumptions.iter().find(|f| f.predicate().is_none()) {
                return Err(ParseError::BadProduction {
                    pred: pred.clone(),
                    detail: format!("assumption {bad} is not an atom"),
                });
            }
            // ordinary assumptions first, then inductive ones
            let (mut ord, ind): (Vec<Formula>, Vec<Formula>) = assumptions
                .into_iter()
                .partition(|f| !sig.is_inductive(f.predicate().expect("checked above")));
            ord.extend(ind);
            productions.push(Production { assumptions: ord, conclusion });
        }
    }
    Ok(InductiveSystem { signature: sig, productions })
}

fn finish<T>(p: &Parser, v: T) -> Result<T, ParseError> {
    if p.at_end() {
        Ok(v)
    } else {
        Err(p.error("trailing input"))
    }
}

pub(super) fn parse_term_with(sig: &Signature, text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let t = p.term()?;
    finish(&p, t)
}

pub(super) fn parse_formula_with(sig: &Signature, text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let f = p.formula()?;
    finish(&p, f)
}

pub(super) fn parse_sequent_with(sig: &Signature, text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text, sig)?;
    let ante = p.formula_list(&[Tok::Turnstile])?;
    p.expect(Tok::Turnstile, "'|-'")?;
    let succ = p.formula_list(&[])?;
    finish(&p, Sequent::new(ante, succ))
}
