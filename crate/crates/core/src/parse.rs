//! The surface syntax.
//!
//! ```text
//! signature S { fun f/1; rel R/2; const c; }
//! structure A : S { universe 3; f = [1,2,0]; R = {(0,1),(1,2)}; c = 0; }
//! theory T : S { forall x y. f(x) = f(y) -> x = y; }
//! span Sp { apex A; left B [0,1]; right C [0]; }
//! ```
//!
//! Formulas: atoms `R(t,...)` and `t = t`, `true`, `false`, connectives `&`
//! and `|`, `exists x. phi`. Sentences: `forall x y. phi -> psi` (the
//! quantifier may be omitted for closed premises). Comments run from `#` to
//! the end of the line. Any occurrence of `~`, `not` or a stray `->` inside a
//! positive formula is rejected.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formula::{HInductiveSentence, PositiveFormula, Theory};
use crate::signature::Signature;
use crate::structure::Structure;
use crate::term::{Term, Var};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Nat(usize),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Dot,
    Colon,
    Eq,
    Amp,
    Pipe,
    Arrow,
    Tilde,
    Slash,
    Le,
}

const KEYWORDS: &[&str] = &["true", "false", "exists", "forall", "not"];

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    bump(&mut chars);
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' | ')' | '{' | '}' | '[' | ']' | ',' | ';' | '.' | ':' | '=' | '&' | '|' | '~'
            | '/' => {
                bump(&mut chars);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '.' => Tok::Dot,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '~' => Tok::Tilde,
                    '/' => Tok::Slash,
                    _ => unreachable!(),
                };
                out.push(Spanned {
                    tok,
                    line: tline,
                    col: tcol,
                });
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::Arrow,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(Error::Parse {
                        line: tline,
                        col: tcol,
                        message: "stray `-`".into(),
                    });
                }
            }
            '<' => {
                bump(&mut chars);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars);
                    out.push(Spanned {
                        tok: Tok::Le,
                        line: tline,
                        col: tcol,
                    });
                } else {
                    return Err(Error::Parse {
                        line: tline,
                        col: tcol,
                        message: "stray `<`".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut n = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        n.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Nat(n.parse().unwrap()),
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                out.push(Spanned {
                    tok: Tok::Ident(s),
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    sig: Option<Signature>,
}

impl Parser {
    fn new(text: &str, sig: Option<&Signature>) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            sig: sig.cloned(),
        })
    }

    fn sig(&self) -> &Signature {
        self.sig.as_ref().expect("signature required here")
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn nat(&mut self, what: &str) -> Result<usize> {
        match self.peek() {
            Some(Tok::Nat(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn reject_negation<T>(&self) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::NegationRejected { line, col })
    }

    // formula := or
    fn formula(&mut self) -> Result<PositiveFormula> {
        let first = self.and_expr()?;
        let mut children = vec![first];
        while self.eat(Tok::Pipe) {
            children.push(self.and_expr()?);
        }
        Ok(PositiveFormula::or(children))
    }

    fn and_expr(&mut self) -> Result<PositiveFormula> {
        let first = self.primary()?;
        let mut children = vec![first];
        while self.eat(Tok::Amp) {
            children.push(self.primary()?);
        }
        Ok(PositiveFormula::and(children))
    }

    fn primary(&mut self) -> Result<PositiveFormula> {
        match self.peek() {
            Some(Tok::Tilde) => self.reject_negation(),
            Some(Tok::Ident(s)) if s == "not" => self.reject_negation(),
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(PositiveFormula::Truth)
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(PositiveFormula::Falsum)
            }
            Some(Tok::Ident(s)) if s == "exists" => {
                self.pos += 1;
                let mut vars = Vec::new();
                while let Some(Tok::Ident(v)) = self.peek() {
                    if KEYWORDS.contains(&v.as_str()) {
                        break;
                    }
                    if self.sig().is_symbol(v) {
                        return Err(self.err(format!("`{v}` is a declared symbol, not a variable")));
                    }
                    vars.push(Var::new(v.clone()));
                    self.pos += 1;
                }
                if vars.is_empty() {
                    return Err(self.err("expected at least one bound variable"));
                }
                self.expect(Tok::Dot, "`.` after bound variables")?;
                let body = self.formula()?;
                Ok(PositiveFormula::exists_many(&vars, body))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                if self.sig().relation_arity(&s).is_some() {
                    self.pos += 1;
                    let args = self.term_args()?;
                    let phi = PositiveFormula::Rel(s, args);
                    phi.validate(self.sig())?;
                    Ok(phi)
                } else {
                    // a term: variable, constant, or function application
                    let lhs = self.term()?;
                    self.expect(Tok::Eq, "`=` after a term")?;
                    let rhs = self.term()?;
                    let phi = PositiveFormula::Eq(lhs, rhs);
                    phi.validate(self.sig())?;
                    Ok(phi)
                }
            }
            _ => Err(self.err("expected a formula")),
        }
    }

    fn term_args(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(args)
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident("a term")?;
        if name == "not" {
            return self.reject_negation();
        }
        if KEYWORDS.contains(&name.as_str()) {
            return Err(self.err(format!("`{name}` cannot be used as a term")));
        }
        if let Some(arity) = self.sig().function_arity(&name) {
            let args = if self.peek() == Some(&Tok::LParen) {
                self.term_args()?
            } else {
                Vec::new()
            };
            if args.len() != arity {
                return Err(Error::Arity {
                    symbol: name,
                    expected: arity,
                    got: args.len(),
                });
            }
            Ok(Term::App(name, args))
        } else if self.sig().relation_arity(&name).is_some() {
            Err(self.err(format!("relation symbol `{name}` used as a term")))
        } else if self.peek() == Some(&Tok::LParen) {
            // an applied identifier must be a declared symbol
            Err(Error::UnknownSymbol { symbol: name })
        } else {
            Ok(Term::Var(Var::new(name)))
        }
    }

    // sentence := ['forall' var* '.'] formula '->' formula
    fn sentence(&mut self) -> Result<HInductiveSentence> {
        let mut vars = Vec::new();
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "forall" {
                self.pos += 1;
                while let Some(Tok::Ident(v)) = self.peek() {
                    if KEYWORDS.contains(&v.as_str()) {
                        break;
                    }
                    if self.sig().is_symbol(v) {
                        return Err(self.err(format!("`{v}` is a declared symbol, not a variable")));
                    }
                    vars.push(Var::new(v.clone()));
                    self.pos += 1;
                }
                self.expect(Tok::Dot, "`.` after universal variables")?;
            }
        }
        let premise = self.formula()?;
        self.expect(Tok::Arrow, "`->`")?;
        let conclusion = self.formula()?;
        Ok(HInductiveSentence::new(vars, premise, conclusion))
    }
}

/// Parse a single positive formula. A trailing `->` is rejected as negation
/// smuggling, matching the positive fragment.
pub fn parse_formula(sig: &Signature, text: &str) -> Result<PositiveFormula> {
    let mut p = Parser::new(text, Some(sig))?;
    let phi = p.formula()?;
    if p.peek() == Some(&Tok::Arrow) {
        return p.reject_negation();
    }
    if !p.at_end() {
        return Err(p.err("trailing input after formula"));
    }
    Ok(phi)
}

pub fn parse_sentence(sig: &Signature, text: &str) -> Result<HInductiveSentence> {
    let mut p = Parser::new(text, Some(sig))?;
    let s = p.sentence()?;
    p.eat(Tok::Semi);
    if !p.at_end() {
        return Err(p.err("trailing input after sentence"));
    }
    Ok(s)
}

/// Parse a `;`-separated list of sentences.
pub fn parse_theory(sig: &Signature, name: &str, text: &str) -> Result<Theory> {
    let mut p = Parser::new(text, Some(sig))?;
    let mut sentences = Vec::new();
    while !p.at_end() {
        sentences.push(p.sentence()?);
        p.expect(Tok::Semi, "`;` after sentence")?;
    }
    Ok(Theory::new(name, sentences))
}

/// Raw top-level items of a workspace file, before name resolution.
#[derive(Debug, Clone)]
pub enum WorkspaceItem {
    Signature(Signature),
    Structure(String, Structure),
    Theory(Theory),
    Class { name: String, expr: ClassExpr },
    Pool { name: String, expr: PoolExpr },
    Span(SpanDecl),
}

/// `models(T, <=n)` or `explicit(A, B, ...)`; the optional `sym/arity` items
/// pin a signature when the theory is `empty`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassExpr {
    Models {
        theory: String,
        sig_items: Vec<(SigItemKind, String, usize)>,
        max_size: usize,
        dedup: bool,
    },
    Explicit(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigItemKind {
    Rel,
    Fun,
}

/// `qf(atoms<=2, vars<=2)` or `pool(atoms<=2, vars<=2, depth<=1, params<=1, terms<=2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolExpr {
    pub quantifier_free: bool,
    pub atoms: usize,
    pub vars: usize,
    pub depth: usize,
    pub params: usize,
    pub term_depth: usize,
}

impl Default for PoolExpr {
    fn default() -> Self {
        PoolExpr {
            quantifier_free: true,
            atoms: 2,
            vars: 2,
            depth: 0,
            params: 0,
            term_depth: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanDecl {
    pub name: String,
    pub apex: String,
    pub left_target: String,
    pub left_map: Vec<usize>,
    pub right_target: String,
    pub right_map: Vec<usize>,
}

pub fn parse_workspace_items(text: &str) -> Result<Vec<WorkspaceItem>> {
    let mut p = Parser::new(text, None)?;
    let mut items = Vec::new();
    let mut sig: Option<Signature> = None;
    while !p.at_end() {
        let kw = p.ident("a top-level declaration")?;
        match kw.as_str() {
            "signature" => {
                let s = parse_signature_block(&mut p)?;
                sig = Some(s.clone());
                items.push(WorkspaceItem::Signature(s));
            }
            "structure" => {
                let sig = sig
                    .clone()
                    .ok_or_else(|| p.err("structure declared before any signature"))?;
                let (name, st) = parse_structure_block(&mut p, &sig)?;
                items.push(WorkspaceItem::Structure(name, st));
            }
            "theory" => {
                let sigref = sig
                    .clone()
                    .ok_or_else(|| p.err("theory declared before any signature"))?;
                let name = p.ident("theory name")?;
                if p.eat(Tok::Colon) {
                    let _ = p.ident("signature name")?;
                }
                p.expect(Tok::LBrace, "`{`")?;
                p.sig = Some(sigref);
                let mut sentences = Vec::new();
                while p.peek() != Some(&Tok::RBrace) {
                    let s = p.sentence()?;
                    p.expect(Tok::Semi, "`;` after sentence")?;
                    sentences.push(s);
                }
                p.expect(Tok::RBrace, "`}`")?;
                p.sig = None;
                items.push(WorkspaceItem::Theory(Theory::new(name, sentences)));
            }
            "class" => {
                let name = p.ident("class name")?;
                p.expect(Tok::Eq, "`=`")?;
                let expr = parse_class_expr_inner(&mut p)?;
                p.expect(Tok::Semi, "`;`")?;
                items.push(WorkspaceItem::Class { name, expr });
            }
            "pool" => {
                let name = p.ident("pool name")?;
                p.expect(Tok::Eq, "`=`")?;
                let expr = parse_pool_expr_inner(&mut p)?;
                p.expect(Tok::Semi, "`;`")?;
                items.push(WorkspaceItem::Pool { name, expr });
            }
            "span" => {
                let decl = parse_span_block(&mut p)?;
                items.push(WorkspaceItem::Span(decl));
            }
            other => {
                return Err(p.err(format!("unknown declaration `{other}`")));
            }
        }
    }
    Ok(items)
}

fn parse_signature_block(p: &mut Parser) -> Result<Signature> {
    let name = p.ident("signature name")?;
    let mut sig = Signature::new(name);
    p.expect(Tok::LBrace, "`{`")?;
    while p.peek() != Some(&Tok::RBrace) {
        let kw = p.ident("`fun`, `rel` or `const`")?;
        match kw.as_str() {
            "fun" => {
                let sym = p.ident("function symbol")?;
                p.expect(Tok::Slash, "`/` before arity")?;
                let arity = p.nat("arity")?;
                sig.add_function(sym, arity)?;
            }
            "rel" => {
                let sym = p.ident("relation symbol")?;
                p.expect(Tok::Slash, "`/` before arity")?;
                let arity = p.nat("arity")?;
                sig.add_relation(sym, arity)?;
            }
            "const" => {
                let sym = p.ident("constant symbol")?;
                sig.add_function(sym, 0)?;
            }
            other => return Err(p.err(format!("unknown signature item `{other}`"))),
        }
        p.expect(Tok::Semi, "`;`")?;
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok(sig)
}

fn parse_structure_block(p: &mut Parser, sig: &Signature) -> Result<(String, Structure)> {
    let name = p.ident("structure name")?;
    if p.eat(Tok::Colon) {
        let _ = p.ident("signature name")?;
    }
    p.expect(Tok::LBrace, "`{`")?;
    let kw = p.ident("`universe`")?;
    if kw != "universe" {
        return Err(p.err("structure blocks start with `universe N;`"));
    }
    let size = p.nat("universe size")?;
    p.expect(Tok::Semi, "`;`")?;
    if size == 0 {
        return Err(p.err("universes must be nonempty"));
    }
    let mut st = Structure::new(sig.clone(), size);
    st.set_name(name.clone());
    while p.peek() != Some(&Tok::RBrace) {
        let sym = p.ident("a declared symbol")?;
        p.expect(Tok::Eq, "`=`")?;
        if let Some(arity) = sig.function_arity(&sym) {
            if arity == 0 {
                let v = p.nat("element")?;
                st.set_fun_entry(&sym, &[], v)?;
            } else {
                let table = parse_nested_table(p, arity, size)?;
                for (args, value) in table {
                    st.set_fun_entry(&sym, &args, value)?;
                }
            }
        } else if sig.relation_arity(&sym).is_some() {
            let tuples = parse_tuple_set(p)?;
            for t in tuples {
                st.add_tuple(&sym, t)?;
            }
        } else {
            return Err(Error::UnknownSymbol { symbol: sym });
        }
        p.expect(Tok::Semi, "`;`")?;
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok((name, st))
}

/// `[1,2,0]` for arity 1, `[[..],[..]]` row-major for arity 2 and up.
fn parse_nested_table(p: &mut Parser, arity: usize, size: usize) -> Result<Vec<(Vec<usize>, usize)>> {
    fn rec(
        p: &mut Parser,
        arity: usize,
        size: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) -> Result<()> {
        p.expect(Tok::LBracket, "`[`")?;
        for i in 0..size {
            if i > 0 {
                p.expect(Tok::Comma, "`,`")?;
            }
            prefix.push(i);
            if arity == 1 {
                let v = p.nat("element")?;
                out.push((prefix.clone(), v));
            } else {
                rec(p, arity - 1, size, prefix, out)?;
            }
            prefix.pop();
        }
        p.expect(Tok::RBracket, "`]`")?;
        Ok(())
    }
    let mut out = Vec::new();
    rec(p, arity, size, &mut Vec::new(), &mut out)?;
    Ok(out)
}

/// `{(0,1),(1,2)}`; unary tuples may be written `{0,1}`.
fn parse_tuple_set(p: &mut Parser) -> Result<Vec<Vec<usize>>> {
    p.expect(Tok::LBrace, "`{`")?;
    let mut tuples = Vec::new();
    if p.peek() != Some(&Tok::RBrace) {
        loop {
            if p.eat(Tok::LParen) {
                let mut t = Vec::new();
                loop {
                    t.push(p.nat("element")?);
                    if !p.eat(Tok::Comma) {
                        break;
                    }
                }
                p.expect(Tok::RParen, "`)`")?;
                tuples.push(t);
            } else {
                tuples.push(vec![p.nat("element")?]);
            }
            if !p.eat(Tok::Comma) {
                break;
            }
        }
    }
    p.expect(Tok::RBrace, "`}`")?;
    Ok(tuples)
}

fn parse_span_block(p: &mut Parser) -> Result<SpanDecl> {
    let name = p.ident("span name")?;
    p.expect(Tok::LBrace, "`{`")?;
    let mut apex = None;
    let mut left = None;
    let mut right = None;
    while p.peek() != Some(&Tok::RBrace) {
        let kw = p.ident("`apex`, `left` or `right`")?;
        match kw.as_str() {
            "apex" => apex = Some(p.ident("structure name")?),
            "left" | "right" => {
                let target = p.ident("structure name")?;
                p.expect(Tok::LBracket, "`[`")?;
                let mut map = Vec::new();
                loop {
                    map.push(p.nat("element")?);
                    if !p.eat(Tok::Comma) {
                        break;
                    }
                }
                p.expect(Tok::RBracket, "`]`")?;
                if kw == "left" {
                    left = Some((target, map));
                } else {
                    right = Some((target, map));
                }
            }
            other => return Err(p.err(format!("unknown span item `{other}`"))),
        }
        p.expect(Tok::Semi, "`;`")?;
    }
    p.expect(Tok::RBrace, "`}`")?;
    let apex = apex.ok_or_else(|| p.err("span is missing its apex"))?;
    let (left_target, left_map) = left.ok_or_else(|| p.err("span is missing its left leg"))?;
    let (right_target, right_map) = right.ok_or_else(|| p.err("span is missing its right leg"))?;
    Ok(SpanDecl {
        name,
        apex,
        left_target,
        left_map,
        right_target,
        right_map,
    })
}

fn parse_class_expr_inner(p: &mut Parser) -> Result<ClassExpr> {
    let head = p.ident("`models` or `explicit`")?;
    match head.as_str() {
        "models" => {
            p.expect(Tok::LParen, "`(`")?;
            let theory = p.ident("theory name or `empty`")?;
            let mut sig_items = Vec::new();
            let mut max_size = None;
            while p.eat(Tok::Comma) {
                if p.eat(Tok::Le) {
                    max_size = Some(p.nat("size bound")?);
                } else {
                    let sym = p.ident("symbol")?;
                    p.expect(Tok::Slash, "`/`")?;
                    let arity = p.nat("arity")?;
                    // Relations are uppercase-agnostic; `fun` items use a `f:` prefix-free
                    // convention: a bare `sym/arity` is a relation, `fun` must be
                    // declared in a workspace signature instead.
                    sig_items.push((SigItemKind::Rel, sym, arity));
                }
            }
            p.expect(Tok::RParen, "`)`")?;
            let max_size = max_size.ok_or_else(|| p.err("missing `<=n` size bound"))?;
            Ok(ClassExpr::Models {
                theory,
                sig_items,
                max_size,
                dedup: true,
            })
        }
        "explicit" => {
            p.expect(Tok::LParen, "`(`")?;
            let mut names = Vec::new();
            loop {
                names.push(p.ident("structure name")?);
                if !p.eat(Tok::Comma) {
                    break;
                }
            }
            p.expect(Tok::RParen, "`)`")?;
            Ok(ClassExpr::Explicit(names))
        }
        other => Err(p.err(format!("unknown class expression `{other}`"))),
    }
}

fn parse_pool_expr_inner(p: &mut Parser) -> Result<PoolExpr> {
    let head = p.ident("`qf` or `pool`")?;
    let quantifier_free = match head.as_str() {
        "qf" => true,
        "pool" | "sentences" => false,
        other => return Err(p.err(format!("unknown pool expression `{other}`"))),
    };
    let mut expr = PoolExpr {
        quantifier_free,
        depth: if quantifier_free { 0 } else { 1 },
        ..PoolExpr::default()
    };
    p.expect(Tok::LParen, "`(`")?;
    if p.peek() != Some(&Tok::RParen) {
        loop {
            let key = p.ident("pool bound name")?;
            p.expect(Tok::Le, "`<=`")?;
            let value = p.nat("bound")?;
            match key.as_str() {
                "atoms" => expr.atoms = value,
                "vars" => expr.vars = value,
                "depth" => expr.depth = value,
                "params" => expr.params = value,
                "terms" => expr.term_depth = value,
                other => return Err(p.err(format!("unknown pool bound `{other}`"))),
            }
            if !p.eat(Tok::Comma) {
                break;
            }
        }
    }
    p.expect(Tok::RParen, "`)`")?;
    if quantifier_free {
        expr.depth = 0;
    }
    Ok(expr)
}

/// Parse a class expression from a command-line argument.
pub fn parse_class_expr(text: &str) -> Result<ClassExpr> {
    let mut p = Parser::new(text, None)?;
    let e = parse_class_expr_inner(&mut p)?;
    if !p.at_end() {
        return Err(p.err("trailing input after class expression"));
    }
    Ok(e)
}

/// Parse a pool expression from a command-line argument.
pub fn parse_pool_expr(text: &str) -> Result<PoolExpr> {
    let mut p = Parser::new(text, None)?;
    let e = parse_pool_expr_inner(&mut p)?;
    if !p.at_end() {
        return Err(p.err("trailing input after pool expression"));
    }
    Ok(e)
}

/// Parse an element map written as `0:1,1:0`.
pub fn parse_map(text: &str, source_size: usize) -> Result<Vec<usize>> {
    let mut entries = BTreeMap::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (a, b) = part.split_once(':').ok_or_else(|| Error::Parse {
            line: 1,
            col: 1,
            message: format!("map entry `{part}` is not of the form `a:b`"),
        })?;
        let a: usize = a.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            col: 1,
            message: format!("bad element `{a}`"),
        })?;
        let b: usize = b.trim().parse().map_err(|_| Error::Parse {
            line: 1,
            col: 1,
            message: format!("bad element `{b}`"),
        })?;
        entries.insert(a, b);
    }
    let mut out = Vec::with_capacity(source_size);
    for i in 0..source_size {
        match entries.get(&i) {
            Some(&v) => out.push(v),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    col: 1,
                    message: format!("map is missing source element {i}"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::PositiveFormula as F;

    fn digraph_sig() -> Signature {
        Signature::relational("D", "R", 2)
    }

    fn unary_sig() -> Signature {
        Signature::functional("U", "f", 1)
    }

    #[test]
    fn parses_exists_formula() {
        let sig = digraph_sig();
        let phi = parse_formula(&sig, "exists y. R(x,y)").unwrap();
        assert_eq!(
            phi,
            F::exists(
                Var::new("y"),
                F::rel("R", vec![Term::var("x"), Term::var("y")])
            )
        );
    }

    #[test]
    fn parses_injective_sentence() {
        let sig = unary_sig();
        let s = parse_sentence(&sig, "forall x y. f(x) = f(y) -> x = y").unwrap();
        assert_eq!(s.vars, vec![Var::new("x"), Var::new("y")]);
        assert_eq!(
            s.premise,
            F::Eq(
                Term::app("f", vec![Term::var("x")]),
                Term::app("f", vec![Term::var("y")])
            )
        );
        assert_eq!(s.conclusion, F::Eq(Term::var("x"), Term::var("y")));
    }

    #[test]
    fn rejects_negation() {
        let sig = digraph_sig();
        assert!(matches!(
            parse_formula(&sig, "~R(x,y)"),
            Err(Error::NegationRejected { .. })
        ));
        assert!(matches!(
            parse_formula(&sig, "not R(x,y)"),
            Err(Error::NegationRejected { .. })
        ));
        assert!(matches!(
            parse_formula(&sig, "R(x,y) -> R(y,x)"),
            Err(Error::NegationRejected { .. })
        ));
    }

    #[test]
    fn rejects_arity_and_unknown_symbols() {
        let sig = digraph_sig();
        assert!(matches!(
            parse_formula(&sig, "R(x)"),
            Err(Error::Arity { .. })
        ));
        assert_eq!(
            parse_formula(&sig, "S(x,y)"),
            Err(Error::UnknownSymbol { symbol: "S".into() })
        );
        // keywords are not terms
        assert!(parse_formula(&sig, "x = true").is_err());
    }

    #[test]
    fn parses_binary_function_tables() {
        let text = r#"
            signature G { fun g/2; }
            structure T : G { universe 2; g = [[0,1],[1,0]]; }
        "#;
        let items = parse_workspace_items(text).unwrap();
        let WorkspaceItem::Structure(_, st) = &items[1] else {
            panic!("expected a structure");
        };
        let table = st.fun_table("g").unwrap();
        assert_eq!(table.get(&[0, 1]), Some(1));
        assert_eq!(table.get(&[1, 1]), Some(0));
        assert!(st.is_total());
    }

    #[test]
    fn parse_error_carries_position() {
        let sig = digraph_sig();
        match parse_formula(&sig, "R(x,") {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!(line, 1);
                assert!(col >= 4);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn sentence_without_quantifier_prefix() {
        let sig = unary_sig();
        let s = parse_sentence(&sig, "true -> exists x. f(x) = x").unwrap();
        assert!(s.vars.is_empty());
        assert!(!s.is_h_universal());
    }

    #[test]
    fn workspace_roundtrip_smoke() {
        let text = r#"
            # a small workspace
            signature D { rel R/2; }
            structure E2 : D { universe 2; R = {(0,1)}; }
            theory T_empty : D { }
            span Sp { apex E2; left E2 [0,1]; right E2 [0,1]; }
        "#;
        let items = parse_workspace_items(text).unwrap();
        assert_eq!(items.len(), 4);
    }

    #[test]
    fn class_and_pool_exprs() {
        let c = parse_class_expr("models(T_inj, <=3)").unwrap();
        assert_eq!(
            c,
            ClassExpr::Models {
                theory: "T_inj".into(),
                sig_items: vec![],
                max_size: 3,
                dedup: true
            }
        );
        let c2 = parse_class_expr("models(empty, R/2, <=2)").unwrap();
        assert!(matches!(c2, ClassExpr::Models { ref theory, ref sig_items, max_size: 2, .. }
            if theory == "empty" && sig_items.len() == 1));
        let p = parse_pool_expr("qf(atoms<=2, vars<=2)").unwrap();
        assert_eq!(p.atoms, 2);
        assert!(p.quantifier_free);
    }
}
