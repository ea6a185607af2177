//! Recursive-descent parser.
//!
//! Precedence from loosest to tightest: `+ -`, `* /`, unary `-`, `^`. Powers
//! bind tighter than negation, so `-x^2` is `-(x^2)`, and the exponent may
//! itself start with a minus sign (`2^-1`). `^` is right-associative.

use super::{Expr, Func, Node};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[start];
        if c.is_ascii_digit() || (c == b'.' && bytes.get(start + 1).is_some_and(u8::is_ascii_digit)) {
            let mut i = start;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &self.src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            self.pos = i;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            self.pos = i;
            return Ok((Tok::Ident(self.src[start..i].to_string()), start));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((Tok::Sym(c as char), start));
        }
        let ch = self.src[start..].chars().next().unwrap_or('?');
        Err(ParseError::Syntax {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, at) = self.lexer.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset: self.at,
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.tok == Tok::Sym(c) {
            self.bump()
        } else {
            self.error(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Sym('+') => {
                    self.bump()?;
                    acc = Expr::new(Node::Add(acc, self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump()?;
                    acc = Expr::new(Node::Sub(acc, self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.tok {
                Tok::Sym('*') => {
                    self.bump()?;
                    acc = Expr::new(Node::Mul(acc, self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump()?;
                    acc = Expr::new(Node::Div(acc, self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            return Ok(Expr::new(Node::Neg(self.factor()?)));
        }
        let base = self.atom()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exponent = self.factor()?;
            return Ok(Expr::new(Node::Pow(base, exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::num(v))
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if self.tok == Tok::Sym('(') {
                    let func = Func::from_name(&name).ok_or(ParseError::UnknownFunction { name, offset: at })?;
                    self.bump()?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(func, arg));
                }
                if name == "pi" {
                    return Ok(Expr::pi());
                }
                if Func::from_name(&name).is_some() {
                    return Err(ParseError::Syntax {
                        offset: at,
                        message: format!("function `{name}` needs an argument"),
                    });
                }
                Ok(Expr::var(name))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::End => self.error("unexpected end of input"),
            Tok::Sym(c) => self.error(format!("unexpected `{c}`")),
        }
    }
}

/// Parses `text` into an expression tree.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lexer: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}
