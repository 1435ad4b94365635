//! LTL text: `true false ! && || X F G U`, identifiers, parentheses.
//! Unary operators bind tightest, then `&&`, then `U` (right-associative),
//! then `||`.

use super::{Ltl, SynthesisError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    Next,
    Finally,
    Globally,
    Until,
    And,
    Or,
    LParen,
    RParen,
}

fn err(offset: usize, message: impl Into<String>) -> SynthesisError {
    SynthesisError::Parse { offset, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SynthesisError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Tok::Not,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'&' | b'|' => {
                if bytes.get(i + 1) != Some(&c) {
                    return Err(err(i, format!("expected '{0}{0}'", c as char)));
                }
                out.push((i, if c == b'&' { Tok::And } else { Tok::Or }));
                i += 2;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "F" => Tok::Finally,
                    "G" => Tok::Globally,
                    "U" => Tok::Until,
                    s => Tok::Ident(s.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            _ => return Err(err(i, format!("unexpected character {:?}", src[i..].chars().next().unwrap()))),
        };
        out.push((i, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Ltl, SynthesisError> {
        let mut l = self.until()?;
        while self.eat(&Tok::Or) {
            l = Ltl::or(l, self.until()?);
        }
        Ok(l)
    }

    fn until(&mut self) -> Result<Ltl, SynthesisError> {
        let l = self.and()?;
        if self.eat(&Tok::Until) {
            return Ok(Ltl::until(l, self.until()?));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Ltl, SynthesisError> {
        let mut l = self.unary()?;
        while self.eat(&Tok::And) {
            l = Ltl::and(l, self.unary()?);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Ltl, SynthesisError> {
        let at = self.offset();
        let Some(t) = self.peek().cloned() else {
            return Err(err(at, "unexpected end of input"));
        };
        self.pos += 1;
        Ok(match t {
            Tok::Not => Ltl::not(self.unary()?),
            Tok::Next => Ltl::next(self.unary()?),
            Tok::Finally => Ltl::finally(self.unary()?),
            Tok::Globally => Ltl::globally(self.unary()?),
            Tok::True => Ltl::True,
            Tok::False => Ltl::False,
            Tok::Ident(s) => Ltl::Ap(s),
            Tok::LParen => {
                let e = self.or()?;
                if !self.eat(&Tok::RParen) {
                    return Err(err(self.offset(), "expected ')'"));
                }
                e
            }
            other => return Err(err(at, format!("unexpected {other:?}"))),
        })
    }
}

pub fn parse_ltl(src: &str) -> Result<Ltl, SynthesisError> {
    let mut p = Parser { toks: lex(src)?, pos: 0, end: src.len() };
    let f = p.or()?;
    if p.pos != p.toks.len() {
        return Err(err(p.offset(), "trailing input"));
    }
    Ok(f)
}
