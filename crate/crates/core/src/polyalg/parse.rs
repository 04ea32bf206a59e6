//! Reader for the polynomial text format.
//!
//! A polynomial is a signed sum of terms. Each term is an optional
//! coefficient followed by `*`-separated factors `x<i>` or `x<i>^<k>`,
//! with variables numbered from 1. Whitespace is ignored.
//! Example: `1.5*x1^2*x2 - 3 * x3 + 2`.

use super::{MultiIndex, Polynomial};
use crate::error::{Error, Result};

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset: self.pos, message: message.into() })
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                i = j;
                while i < s.len() && s[i].is_ascii_digit() {
                    i += 1;
                }
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                self.pos = i;
                Ok(v)
            }
            _ => self.err(format!("invalid number '{text}'")),
        }
    }

    fn integer(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<u32>().or_else(|_| {
            self.pos = start;
            self.err("expected a non-negative integer")
        })
    }

    fn factor(&mut self, exps: &mut [u32]) -> Result<()> {
        if !self.eat(b'x') {
            return self.err("expected a variable 'x<i>'");
        }
        let at = self.pos;
        let i = self.integer()? as usize;
        if i == 0 || i > exps.len() {
            self.pos = at;
            return self.err(format!("variable x{i} outside x1..x{}", exps.len()));
        }
        let e = if self.eat(b'^') { self.integer()? } else { 1 };
        exps[i - 1] += e;
        Ok(())
    }

    fn term(&mut self, n: usize) -> Result<(MultiIndex, f64)> {
        let mut coef = 1.0;
        let mut exps = vec![0u32; n];
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                coef = self.number()?;
                if self.eat(b'*') {
                    self.factor(&mut exps)?;
                } else {
                    return Ok((MultiIndex::new(exps), coef));
                }
            }
            Some(b'x') => self.factor(&mut exps)?,
            _ => return self.err("expected a term"),
        }
        while self.eat(b'*') {
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                coef *= self.number()?;
            } else {
                self.factor(&mut exps)?;
            }
        }
        Ok((MultiIndex::new(exps), coef))
    }
}

pub(super) fn parse_polynomial(text: &str, n: usize) -> Result<Polynomial> {
    let mut cur = Cursor { src: text.as_bytes(), pos: 0 };
    let mut poly = Polynomial::zero(n);
    let mut first = true;
    loop {
        let sign = if cur.eat(b'-') {
            -1.0
        } else if cur.eat(b'+') || first {
            1.0
        } else if cur.peek().is_none() {
            break;
        } else {
            return cur.err("expected '+' or '-'");
        };
        let (a, c) = cur.term(n)?;
        poly.add_term(a, sign * c);
        first = false;
        if cur.peek().is_none() {
            break;
        }
    }
    Ok(poly)
}
