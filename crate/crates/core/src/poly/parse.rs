//! Text grammar for polynomials: `+ - * ^` with positive integer exponents,
//! decimal or rational literals, parentheses, and named variables.

use super::{PolyError, Polynomial};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>, PolyError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let pos = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
            }
            b'+' => {
                tokens.push(Token { tok: Tok::Plus, pos });
                i += 1;
            }
            b'-' => {
                tokens.push(Token { tok: Tok::Minus, pos });
                i += 1;
            }
            b'*' => {
                tokens.push(Token { tok: Tok::Star, pos });
                i += 1;
            }
            b'/' => {
                tokens.push(Token { tok: Tok::Slash, pos });
                i += 1;
            }
            b'^' => {
                tokens.push(Token { tok: Tok::Caret, pos });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { tok: Tok::LParen, pos });
                i += 1;
            }
            b')' => {
                tokens.push(Token { tok: Tok::RParen, pos });
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                // Scientific exponent, e.g. 1.5e-3.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| PolyError::Syntax {
                    message: format!("invalid number literal `{slice}`"),
                    position: start,
                })?;
                tokens.push(Token {
                    tok: Tok::Num(value),
                    pos: start,
                });
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    pos: start,
                });
            }
            _ => {
                return Err(PolyError::Syntax {
                    message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                    position: pos,
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    idx: usize,
    vars: &'a [&'a str],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.idx).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.idx).map(|t| t.pos).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Plus) => {
                self.bump();
            }
            Some(Tok::Minus) => {
                negate = true;
                self.bump();
            }
            _ => {}
        }
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Tok::Star)) {
            self.bump();
            let rhs = self.factor()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let pos = self.pos();
            match self.bump().map(|t| t.tok) {
                Some(Tok::Num(v)) => {
                    if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
                        return Err(PolyError::BadExponent { position: pos });
                    }
                    Ok(base.pow(v as u32))
                }
                _ => Err(PolyError::BadExponent { position: pos }),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        let pos = self.pos();
        match self.bump().map(|t| t.tok) {
            Some(Tok::Num(v)) => {
                // Rational literal: `a/b` with a nonzero denominator.
                if matches!(self.peek(), Some(Tok::Slash)) {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump().map(|t| t.tok) {
                        Some(Tok::Num(d)) if d != 0.0 => Ok(Polynomial::constant(
                            self.vars.len(),
                            Complex64::new(v / d, 0.0),
                        )),
                        _ => Err(PolyError::Syntax {
                            message: "expected nonzero denominator after `/`".to_string(),
                            position: dpos,
                        }),
                    }
                } else {
                    Ok(Polynomial::constant(self.vars.len(), Complex64::new(v, 0.0)))
                }
            }
            Some(Tok::Ident(name)) => {
                match self.vars.iter().position(|&v| v == name) {
                    Some(idx) => Polynomial::variable(self.vars.len(), idx),
                    None => Err(PolyError::UnknownIdentifier {
                        name,
                        position: pos,
                    }),
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump().map(|t| t.tok) {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(PolyError::Syntax {
                        message: "expected closing parenthesis".to_string(),
                        position: pos,
                    }),
                }
            }
            other => Err(PolyError::Syntax {
                message: match other {
                    Some(t) => format!("expected a term, found {t:?}"),
                    None => "expected a term, found end of input".to_string(),
                },
                position: pos,
            }),
        }
    }
}

/// Parses `text` into expanded canonical sparse form over the named
/// variables. Parsing, printing, and re-parsing is idempotent.
pub fn parse_polynomial(text: &str, vars: &[&str]) -> Result<Polynomial, PolyError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        idx: 0,
        vars,
        end: text.len(),
    };
    let poly = parser.expr()?;
    if parser.idx != parser.tokens.len() {
        return Err(PolyError::Syntax {
            message: "unexpected trailing input".to_string(),
            position: parser.pos(),
        });
    }
    Ok(poly)
}
