//! Free polynomials in `z1, …, zd`: a recursive-descent parser, a printer
//! that round-trips through it, and evaluation at matrix tuples.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)*
//! atom   := number ['i'] | 'i' | 'z' uint | '(' expr ')'
//! ```
//!
//! Multiplication concatenates words and is not commutative.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::nc_space::{word_apply, FreeWord, MatrixTuple};
use crate::numerics::{identity, zeros, CMat, C64};

/// Total degree beyond which `^` is rejected, to keep expansion bounded.
const MAX_DEGREE: usize = 64;

/// Expanded normal form: one coefficient per word, zero coefficients dropped.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FreePoly {
    terms: BTreeMap<FreeWord, C64>,
}

impl FreePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, FreeWord::empty())
    }

    /// `c·z^w`, with `w` zero-based.
    pub fn monomial(c: C64, w: FreeWord) -> Self {
        let mut terms = BTreeMap::new();
        if c != C64::new(0.0, 0.0) {
            terms.insert(w, c);
        }
        Self { terms }
    }

    pub fn terms(&self) -> &BTreeMap<FreeWord, C64> {
        &self.terms
    }

    pub fn coefficient(&self, w: &FreeWord) -> C64 {
        self.terms.get(w).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(FreeWord::len).max().unwrap_or(0)
    }

    /// Number of variables the polynomial mentions.
    pub fn min_d(&self) -> usize {
        self.terms
            .keys()
            .filter_map(FreeWord::max_letter)
            .max()
            .map_or(0, |l| l + 1)
    }

    fn add_term(&mut self, w: FreeWord, c: C64) {
        let entry = self.terms.entry(w).or_default();
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.retain(|_, v| *v != C64::new(0.0, 0.0));
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), *c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out
    }

    /// `Σ_w c_w Z^w`.
    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        let needed = self.min_d();
        if needed > z.d() {
            return Err(Error::UnknownVariable { index: needed });
        }
        let n = z.n();
        Ok(self.terms.iter().fold(zeros(n, n), |acc, (w, c)| {
            let power = if w.is_empty() {
                identity(n)
            } else {
                word_apply(z.coords(), w)
            };
            acc + power * *c
        }))
    }
}

/// Prints `(re±imi)*z1*z2 + …` in graded-lex order; `0` for the zero polynomial.
impl fmt::Display for FreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let sign = if c.im.is_sign_negative() { '-' } else { '+' };
            write!(f, "({}{}{}i)", c.re, sign, c.im.abs())?;
            for letter in w.letters() {
                write!(f, "*z{}", letter + 1)?;
            }
        }
        Ok(())
    }
}

pub fn parse_poly(text: &str) -> Result<FreePoly> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let poly = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(poly)
}

impl std::str::FromStr for FreePoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_poly(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FreePoly> {
        let negate = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.add(&self.term()?.neg());
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FreePoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
            if acc.degree() > MAX_DEGREE {
                return Err(self.error("degree too large"));
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<FreePoly> {
        let mut base = self.atom()?;
        while self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let exponent = self.uint()?;
            if exponent.saturating_mul(base.degree()) > MAX_DEGREE {
                self.pos = start;
                return Err(self.error("exponent too large"));
            }
            let mut power = FreePoly::constant(C64::new(1.0, 0.0));
            for _ in 0..exponent {
                power = power.mul(&base);
            }
            base = power;
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an unsigned integer"));
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: "integer out of range".into(),
        })
    }

    fn atom(&mut self) -> Result<FreePoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'z') => {
                self.pos += 1;
                let start = self.pos;
                let index = self.uint()?;
                if index == 0 {
                    self.pos = start;
                    return Err(Error::UnknownVariable { index });
                }
                Ok(FreePoly::monomial(C64::new(1.0, 0.0), FreeWord(vec![index - 1])))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(FreePoly::constant(C64::new(0.0, 1.0)))
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => {
                let value = self.number()?;
                if self.src.get(self.pos) == Some(&b'i') {
                    self.pos += 1;
                    Ok(FreePoly::constant(C64::new(0.0, value)))
                } else {
                    Ok(FreePoly::constant(C64::new(value, 0.0)))
                }
            }
            Some(_) => Err(self.error("expected a number, variable or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if exp_start == self.pos {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii number");
        text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number '{text}'"),
        })
    }
}
