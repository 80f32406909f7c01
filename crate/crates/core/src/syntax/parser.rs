//! Recursive-descent parser producing the unchecked AST.
//!
//! Variable occurrences get the `item` placeholder sort; the sort checker
//! resolves real sorts. Keywords are reserved as variable and binder names
//! but element tags are unrestricted identifiers.

use super::ast::*;
use super::lexer::{tokenize, SyntaxError, Tok};
use crate::sorts::Sort;
use crate::term::{Seq, Term};

const KEYWORDS: &[&str] = &[
    "constructor",
    "destructor",
    "predicate",
    "channel",
    "private",
    "correspondence",
    "process",
    "with",
    "out",
    "in",
    "new",
    "let",
    "filter",
    "begin",
    "end",
    "done",
];

pub fn parse_script(source: &str) -> Result<Script, SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, src_len: source.len() };
    let mut decls = Vec::new();
    while !p.at_end() {
        decls.push(p.decl()?);
    }
    Ok(Script { decls })
}

/// Parses a single goal atom, e.g. `isUser(<User>...</>, u, pwd)`.
pub fn parse_goal(source: &str) -> Result<(String, Vec<Term>, Span), SyntaxError> {
    let toks = tokenize(source)?;
    let mut p = Parser { toks, pos: 0, src_len: source.len() };
    let span = p.here();
    let name = p.ident("predicate name")?;
    p.expect(Tok::LParen)?;
    let args = p.term_list(Tok::RParen)?;
    p.expect(Tok::RParen)?;
    if !p.at_end() {
        return Err(p.unexpected("end of goal"));
    }
    Ok((name, args, span))
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    src_len: usize,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|(t, _)| t)
    }

    fn here(&self) -> Span {
        if let Some((_, s)) = self.toks.get(self.pos) {
            return *s;
        }
        match self.toks.last() {
            Some((_, s)) => Span { start: s.end, end: self.src_len, line: s.line, col: s.col + 1 },
            None => Span { start: 0, end: self.src_len, line: 1, col: 1 },
        }
    }

    fn bump(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: String) -> SyntaxError {
        let span = self.here();
        SyntaxError { line: span.line, col: span.col, offset: span.start, message }
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.error(format!("expected {expected}, found {t}")),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, SyntaxError> {
        match self.peek() {
            Some(t) if *t == tok => Ok(self.bump().unwrap().1),
            _ => Err(self.unexpected(&tok.to_string())),
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek() == Some(&tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some((Tok::Ident(s), _)) => Ok(s),
                _ => unreachable!(),
            },
            _ => Err(self.unexpected(what)),
        }
    }

    fn name(&mut self, what: &str) -> Result<String, SyntaxError> {
        let id = self.ident(what)?;
        if KEYWORDS.contains(&id.as_str()) {
            return Err(self.error(format!("keyword `{id}` cannot be used as {what}")));
        }
        Ok(id)
    }

    fn sort(&mut self) -> Result<Sort, SyntaxError> {
        let id = self.ident("a sort (string, bytes, att, item)")?;
        Sort::parse(&id).ok_or_else(|| self.error(format!("unknown sort `{id}`")))
    }

    fn decl(&mut self) -> Result<Decl, SyntaxError> {
        let span = self.here();
        let kw = match self.peek() {
            Some(Tok::Ident(k)) => k.clone(),
            _ => return Err(self.unexpected("a declaration")),
        };
        match kw.as_str() {
            "constructor" => {
                self.bump();
                let name = self.name("constructor name")?;
                let arg_sorts = self.sort_tuple()?;
                self.expect(Tok::Colon)?;
                let result_sort = self.sort()?;
                self.expect(Tok::Dot)?;
                Ok(Decl::Constructor { name, arg_sorts, result_sort, span })
            }
            "destructor" => {
                self.bump();
                let name = self.name("destructor name")?;
                let arg_sorts = self.sort_tuple()?;
                self.expect(Tok::Colon)?;
                let result_sort = self.sort()?;
                match self.peek() {
                    Some(Tok::Ident(w)) if w == "with" => {
                        self.bump();
                    }
                    _ => return Err(self.unexpected("`with`")),
                }
                let lhs = self.term()?;
                self.expect(Tok::Eq)?;
                let rhs = self.term()?;
                self.expect(Tok::Dot)?;
                Ok(Decl::Destructor { name, arg_sorts, result_sort, lhs, rhs, span })
            }
            "predicate" => {
                self.bump();
                let name = self.name("predicate name")?;
                let params = self.param_tuple()?;
                self.expect(Tok::Turnstile)?;
                let body = self.atoms(Tok::Dot)?;
                self.expect(Tok::Dot)?;
                Ok(Decl::Clause(Clause { name, params, body, span }))
            }
            "channel" | "private" => {
                let private = kw == "private";
                self.bump();
                if private {
                    match self.peek() {
                        Some(Tok::Ident(c)) if c == "channel" => {
                            self.bump();
                        }
                        _ => return Err(self.unexpected("`channel`")),
                    }
                }
                let name = self.name("channel name")?;
                let payload_sorts = self.sort_tuple()?;
                self.expect(Tok::Dot)?;
                Ok(Decl::Channel { name, payload_sorts, private, span })
            }
            "correspondence" => {
                self.bump();
                let name = self.name("correspondence name")?;
                let payload_sorts = self.sort_tuple()?;
                self.expect(Tok::Dot)?;
                Ok(Decl::Correspondence { name, payload_sorts, span })
            }
            "process" => {
                self.bump();
                if self.is_process_def() {
                    let name = self.name("process name")?;
                    let params = self.param_tuple()?;
                    self.expect(Tok::Eq)?;
                    let body = self.proc()?;
                    self.expect(Tok::Dot)?;
                    Ok(Decl::Process { name, params, body, span })
                } else {
                    let body = self.proc()?;
                    self.expect(Tok::Dot)?;
                    Ok(Decl::Main { body, span })
                }
            }
            other => Err(self.error(format!("expected a declaration keyword, found `{other}`"))),
        }
    }

    /// After `process`, distinguishes `Name(params) = body` from a
    /// top-level process expression (which may itself start with a call).
    fn is_process_def(&self) -> bool {
        let Some(Tok::Ident(id)) = self.peek() else { return false };
        if KEYWORDS.contains(&id.as_str()) {
            return false;
        }
        if self.peek_at(1) != Some(&Tok::LParen) {
            return false;
        }
        let mut depth = 0usize;
        let mut i = 1;
        loop {
            match self.peek_at(i) {
                Some(Tok::LParen) => depth += 1,
                Some(Tok::RParen) => {
                    depth -= 1;
                    if depth == 0 {
                        return self.peek_at(i + 1) == Some(&Tok::Eq);
                    }
                }
                Some(_) => {}
                None => return false,
            }
            i += 1;
        }
    }

    fn sort_tuple(&mut self) -> Result<Vec<Sort>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut sorts = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                sorts.push(self.sort()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(sorts)
    }

    fn param_tuple(&mut self) -> Result<Vec<(String, Sort)>, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let name = self.name("parameter name")?;
                self.expect(Tok::Colon)?;
                let sort = self.sort()?;
                params.push((name, sort));
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    fn atoms(&mut self, _until: Tok) -> Result<Vec<Atom>, SyntaxError> {
        let mut atoms = Vec::new();
        loop {
            atoms.push(self.atom()?);
            if !self.eat(Tok::Comma) {
                break;
            }
        }
        Ok(atoms)
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let span = self.here();
        let left = self.term()?;
        if self.eat(Tok::Eq) {
            let right = self.term()?;
            Ok(Atom::Eq { left, right, span })
        } else {
            match left {
                Term::Apply(predicate, args) => Ok(Atom::Call { predicate, args, span }),
                _ => Err(self.error("expected `=` or a predicate call".into())),
            }
        }
    }

    fn term_list(&mut self, until: Tok) -> Result<Vec<Term>, SyntaxError> {
        let mut terms = Vec::new();
        if self.peek() != Some(&until) {
            loop {
                terms.push(self.term()?);
                if !self.eat(Tok::Comma) {
                    break;
                }
            }
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::Str(_)) => match self.bump() {
                Some((Tok::Str(s), _)) => Ok(Term::Str(s)),
                _ => unreachable!(),
            },
            Some(Tok::Underscore) => {
                self.bump();
                Ok(Term::Wildcard(Sort::Item))
            }
            Some(Tok::Lt) => self.element(),
            Some(Tok::Ident(id)) if !KEYWORDS.contains(&id.as_str()) => {
                let name = self.ident("a term")?;
                if self.peek() == Some(&Tok::LParen) {
                    self.bump();
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    Ok(Term::Apply(name, args))
                } else {
                    Ok(Term::Var(name, Sort::Item))
                }
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn element(&mut self) -> Result<Term, SyntaxError> {
        self.expect(Tok::Lt)?;
        let tag = self.ident("an element tag")?;
        let mut attrs = Vec::new();
        let mut attr_rest = None;
        loop {
            match self.peek() {
                Some(Tok::Ident(_)) => {
                    let name = self.ident("an attribute name")?;
                    self.expect(Tok::Eq)?;
                    let value = match self.peek() {
                        Some(Tok::Str(_)) => match self.bump() {
                            Some((Tok::Str(s), _)) => Term::Str(s),
                            _ => unreachable!(),
                        },
                        Some(Tok::Ident(v)) if !KEYWORDS.contains(&v.as_str()) => {
                            let v = self.ident("an attribute value")?;
                            Term::Var(v, Sort::String)
                        }
                        Some(Tok::Underscore) => {
                            self.bump();
                            Term::Wildcard(Sort::String)
                        }
                        _ => return Err(self.unexpected("an attribute value")),
                    };
                    attrs.push(Term::Attr(name, Box::new(value)));
                }
                Some(Tok::At) => {
                    self.bump();
                    attr_rest = Some(Box::new(self.rest_marker()?));
                    break;
                }
                _ => break,
            }
        }
        self.expect(Tok::Gt)?;
        let mut children = Vec::new();
        let mut child_rest = None;
        loop {
            match self.peek() {
                Some(Tok::CloseTag) => break,
                Some(Tok::At) => {
                    self.bump();
                    child_rest = Some(Box::new(self.rest_marker()?));
                    break;
                }
                _ => children.push(self.term()?),
            }
        }
        self.expect(Tok::CloseTag)?;
        Ok(Term::Element(crate::term::Element {
            tag,
            attrs: Seq { items: attrs, rest: attr_rest },
            children: Seq { items: children, rest: child_rest },
        }))
    }

    fn rest_marker(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::Underscore) => {
                self.bump();
                Ok(Term::Wildcard(Sort::List))
            }
            Some(Tok::Ident(_)) => {
                let name = self.name("a rest variable")?;
                Ok(Term::Var(name, Sort::List))
            }
            _ => Err(self.unexpected("a rest variable or `_` after `@`")),
        }
    }

    fn proc(&mut self) -> Result<Proc, SyntaxError> {
        let span = self.here();
        let first = self.proc_prefix()?;
        let mut parts = vec![first];
        while self.eat(Tok::Pipe) {
            parts.push(self.proc_prefix()?);
        }
        let mut iter = parts.into_iter();
        let mut acc = iter.next().unwrap();
        for part in iter {
            acc = Proc::Par { left: Box::new(acc), right: Box::new(part), span };
        }
        Ok(acc)
    }

    fn proc_prefix(&mut self) -> Result<Proc, SyntaxError> {
        let span = self.here();
        match self.peek() {
            Some(Tok::Bang) => {
                self.bump();
                let body = self.proc_prefix()?;
                Ok(Proc::Repl { body: Box::new(body), span })
            }
            Some(Tok::LParen) => {
                self.bump();
                let inner = self.proc()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(Tok::Zero) => {
                self.bump();
                Ok(Proc::Nil { span })
            }
            Some(Tok::Ident(id)) => match id.as_str() {
                "out" => {
                    self.bump();
                    let channel = self.name("channel name")?;
                    self.expect(Tok::LParen)?;
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    let next = self.proc_prefix()?;
                    Ok(Proc::Out { channel, args, next: Box::new(next), span })
                }
                "in" => {
                    self.bump();
                    let channel = self.name("channel name")?;
                    self.expect(Tok::LParen)?;
                    let mut binders = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            match self.peek() {
                                Some(Tok::Underscore) => {
                                    self.bump();
                                    binders.push(Binder::Wildcard);
                                }
                                _ => binders.push(Binder::Name(self.name("an input binder")?)),
                            }
                            if !self.eat(Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    let next = self.proc_prefix()?;
                    Ok(Proc::In { channel, binders, next: Box::new(next), span })
                }
                "new" => {
                    self.bump();
                    let name = self.name("a binder")?;
                    self.expect(Tok::Colon)?;
                    let sort = self.sort()?;
                    self.expect(Tok::Semi)?;
                    let next = self.proc_prefix()?;
                    Ok(Proc::New { name, sort, next: Box::new(next), span })
                }
                "let" => {
                    self.bump();
                    let name = self.name("a binder")?;
                    self.expect(Tok::Eq)?;
                    let term = self.term()?;
                    self.expect(Tok::Semi)?;
                    let next = self.proc_prefix()?;
                    Ok(Proc::Let { name, term, next: Box::new(next), span })
                }
                "filter" => {
                    self.bump();
                    let atoms = self.atoms(Tok::Arrow)?;
                    self.expect(Tok::Arrow)?;
                    let mut outputs = Vec::new();
                    if self.peek() != Some(&Tok::Semi) {
                        loop {
                            outputs.push(self.name("a filter output")?);
                            if !self.eat(Tok::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::Semi)?;
                    let next = self.proc_prefix()?;
                    Ok(Proc::Filter { atoms, outputs, next: Box::new(next), span })
                }
                "begin" | "end" => {
                    let is_begin = id == "begin";
                    self.bump();
                    let label = self.name("a correspondence label")?;
                    self.expect(Tok::LParen)?;
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    self.expect(Tok::Semi)?;
                    let next = Box::new(self.proc_prefix()?);
                    Ok(if is_begin {
                        Proc::Begin { label, args, next, span }
                    } else {
                        Proc::End { label, args, next, span }
                    })
                }
                "done" => {
                    self.bump();
                    Ok(Proc::Done { span })
                }
                _ if !KEYWORDS.contains(&id.as_str()) => {
                    let name = self.name("a process name")?;
                    self.expect(Tok::LParen)?;
                    let args = self.term_list(Tok::RParen)?;
                    self.expect(Tok::RParen)?;
                    Ok(Proc::Invoke { process: name, args, span })
                }
                other => Err(self.error(format!("unexpected keyword `{other}` in a process"))),
            },
            _ => Err(self.unexpected("a process")),
        }
    }
}
