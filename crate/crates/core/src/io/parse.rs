//! Recursive-descent parser for polynomial expressions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' UINT)?
//! atom   := NUMBER | IDENT | '(' expr ')'
//! NUMBER := UINT ('/' UINT)?
//! IDENT  := [A-Za-z_][A-Za-z0-9_]* '\''*
//! ```
//!
//! Identifiers resolve against a [`GeneratorTable`]; products follow the
//! Koszul rule, so `th2*th1` parses to `-th1*th2`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::graded::{GeneratorTable, Scalar, SuperPoly};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            Tok::Num(digits.parse().expect("ascii digits"))
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i] == '\'' {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                other => {
                    return Err(ParseError {
                        message: format!("unexpected character `{other}`"),
                        line: l0,
                        column: c0,
                    })
                }
            }
        };
        column += i - start;
        out.push(Spanned {
            tok,
            line: l0,
            column: c0,
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser<'t> {
    toks: Vec<Spanned>,
    pos: usize,
    table: &'t Arc<GeneratorTable>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            message: message.into(),
            line: s.line,
            column: s.column,
        }
    }

    fn expr(&mut self) -> Result<SuperPoly, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SuperPoly, ParseError> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<SuperPoly, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<SuperPoly, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.peek().clone() {
            Tok::Num(n) => {
                let e: u32 = n
                    .try_into()
                    .map_err(|_| self.error_here("exponent too large"))?;
                self.bump();
                Ok(base.pow(e))
            }
            _ => Err(self.error_here("expected a non-negative integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<SuperPoly, ParseError> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                let value = if *self.peek() == Tok::Slash {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Num(d) if !d.is_zero() => {
                            self.bump();
                            Scalar::new(n, d)
                        }
                        Tok::Num(_) => return Err(self.error_here("zero denominator")),
                        _ => return Err(self.error_here("expected a denominator")),
                    }
                } else {
                    Scalar::from_integer(n)
                };
                Ok(SuperPoly::constant(self.table, value))
            }
            Tok::Ident(name) => match self.table.lookup(&name) {
                Some(g) => {
                    self.bump();
                    Ok(SuperPoly::from_generator(self.table, g))
                }
                None => Err(self.error_here(format!("unresolved identifier `{name}`"))),
            },
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error_here("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(self.error_here("unexpected end of expression")),
            other => Err(self.error_here(format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses an expression over the generators of `table`.
pub fn parse_poly(src: &str, table: &Arc<GeneratorTable>) -> Result<SuperPoly, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        table,
    };
    let value = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here("trailing input"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{int, ratio, Monomial, MultiIndex, OddSet};

    fn table() -> Arc<GeneratorTable> {
        GeneratorTable::builder()
            .base(["x", "x'"])
            .formal(["xi"])
            .odd(["th1", "th2"])
            .truncation(3)
            .build()
            .unwrap()
    }

    #[test]
    fn rational_literals() {
        let t = table();
        let p = parse_poly("1/2*x^2 - 3", &t).unwrap();
        let m = |e: u32| Monomial {
            formal: MultiIndex(vec![0]),
            odd: OddSet::EMPTY,
            base: vec![e, 0],
        };
        assert_eq!(p.len(), 2);
        assert_eq!(p.coefficient(&m(2)), ratio(1, 2));
        assert_eq!(p.coefficient(&m(0)), int(-3));
    }

    #[test]
    fn negative_exponent_is_a_syntax_error() {
        let err = parse_poly("x^-1", &table()).unwrap_err();
        assert_eq!(err.column, 3);
        assert!(err.message.contains("exponent"));
    }

    #[test]
    fn odd_order_normalizes() {
        let p = parse_poly("th2*th1", &table()).unwrap();
        assert_eq!(p.to_string(), "-th1*th2");
    }

    #[test]
    fn primes_and_parentheses() {
        let p = parse_poly("(x' - x)^2", &table()).unwrap();
        assert_eq!(p.to_string(), "x^2 - 2*x*x' + x'^2");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_poly("x +\n  y", &table()).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(parse_poly("x)", &table()).is_err());
        assert!(parse_poly("1/0", &table()).is_err());
        assert!(parse_poly("(x", &table()).is_err());
        assert!(parse_poly("x $ 2", &table()).is_err());
    }

    #[test]
    fn truncation_applies_while_parsing() {
        assert!(parse_poly("xi^4", &table()).unwrap().is_zero());
        assert!(parse_poly("th1^2", &table()).unwrap().is_zero());
    }
}
