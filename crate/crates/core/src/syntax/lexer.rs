//! Tokenizer for scripts.
//!
//! Comments are `(* ... *)` (nesting) and `--` to end of line. String
//! literals are always double-quoted; there are no escapes. `</>` is a
//! single closer token, matching the elided-closing-tag syntax.

use super::ast::Span;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Lt,
    Gt,
    CloseTag, // </>
    Colon,
    Semi,
    Dot,
    Comma,
    Eq,
    At,
    Underscore,
    Bang,
    Pipe,
    Arrow,     // ->
    Turnstile, // :-
    Zero,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Lt => write!(f, "`<`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::CloseTag => write!(f, "`</>`"),
            Tok::Colon => write!(f, "`:`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::At => write!(f, "`@`"),
            Tok::Underscore => write!(f, "`_`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Turnstile => write!(f, "`:-`"),
            Tok::Zero => write!(f, "`0`"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at line {line}, column {col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub offset: usize,
    pub message: String,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

pub fn tokenize(source: &str) -> Result<Vec<(Tok, Span)>, SyntaxError> {
    let mut lx = Lexer { src: source.as_bytes(), pos: 0, line: 1, col: 1 };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        if lx.pos >= lx.src.len() {
            return Ok(out);
        }
        let start = lx.pos;
        let (line, col) = (lx.line, lx.col);
        let tok = lx.next_token()?;
        out.push((tok, Span { start, end: lx.pos, line, col }));
    }
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, message: String) -> SyntaxError {
        SyntaxError { line: self.line, col: self.col, offset: self.pos, message }
    }

    fn skip_trivia(&mut self) -> Result<(), SyntaxError> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'-') if self.peek2() == Some(b'-') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'(') if self.peek2() == Some(b'*') => {
                    self.bump();
                    self.bump();
                    let mut depth = 1usize;
                    loop {
                        match (self.peek(), self.peek2()) {
                            (Some(b'*'), Some(b')')) => {
                                self.bump();
                                self.bump();
                                depth -= 1;
                                if depth == 0 {
                                    break;
                                }
                            }
                            (Some(b'('), Some(b'*')) => {
                                self.bump();
                                self.bump();
                                depth += 1;
                            }
                            (Some(_), _) => {
                                self.bump();
                            }
                            (None, _) => return Err(self.err("unterminated comment".into())),
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<Tok, SyntaxError> {
        let c = self.peek().expect("caller checked non-empty");
        match c {
            b'"' => {
                self.bump();
                let mut text = String::new();
                loop {
                    match self.bump() {
                        Some(b'"') => return Ok(Tok::Str(text)),
                        Some(b'\n') | None => {
                            return Err(self.err("unterminated string literal".into()))
                        }
                        Some(ch) => text.push(ch as char),
                    }
                }
            }
            b'(' => {
                self.bump();
                Ok(Tok::LParen)
            }
            b')' => {
                self.bump();
                Ok(Tok::RParen)
            }
            b'<' => {
                if self.peek2() == Some(b'/') {
                    self.bump();
                    self.bump();
                    if self.peek() == Some(b'>') {
                        self.bump();
                        Ok(Tok::CloseTag)
                    } else {
                        Err(self.err("expected `>` after `</` (closers are written `</>`)".into()))
                    }
                } else {
                    self.bump();
                    Ok(Tok::Lt)
                }
            }
            b'>' => {
                self.bump();
                Ok(Tok::Gt)
            }
            b':' => {
                self.bump();
                if self.peek() == Some(b'-') {
                    self.bump();
                    Ok(Tok::Turnstile)
                } else {
                    Ok(Tok::Colon)
                }
            }
            b';' => {
                self.bump();
                Ok(Tok::Semi)
            }
            b'.' => {
                self.bump();
                Ok(Tok::Dot)
            }
            b',' => {
                self.bump();
                Ok(Tok::Comma)
            }
            b'=' => {
                self.bump();
                Ok(Tok::Eq)
            }
            b'@' => {
                self.bump();
                Ok(Tok::At)
            }
            b'!' => {
                self.bump();
                Ok(Tok::Bang)
            }
            b'|' => {
                self.bump();
                Ok(Tok::Pipe)
            }
            b'-' => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Ok(Tok::Arrow)
                } else {
                    Err(self.err("stray `-` (did you mean `->` or a `--` comment?)".into()))
                }
            }
            b'0' => {
                self.bump();
                Ok(Tok::Zero)
            }
            b'_' => {
                // `_` alone is a wildcard; an identifier may not start with it.
                self.bump();
                if self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    return Err(self.err("identifiers may not start with `_`".into()));
                }
                Ok(Tok::Underscore)
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(ch) = self.peek() {
                    if ch.is_ascii_alphanumeric() || ch == b'_' {
                        name.push(ch as char);
                        self.bump();
                    } else {
                        break;
                    }
                }
                Ok(Tok::Ident(name))
            }
            other => Err(self.err(format!("unexpected character `{}`", other as char))),
        }
    }
}
