//! Bivariate polynomials and their text form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Polynomial in `x`, `y` with real coefficients. Terms are kept sorted by
/// `(xdeg, ydeg)`, never duplicated, and never zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial2 {
    terms: Vec<(f64, u32, u32)>,
}

impl Polynomial2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn x() -> Self {
        Self::monomial(1.0, 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(1.0, 0, 1)
    }

    pub fn monomial(c: f64, xdeg: u32, ydeg: u32) -> Self {
        Self::from_terms([(c, xdeg, ydeg)])
    }

    /// Builds a polynomial, merging like terms and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (f64, u32, u32)>>(terms: I) -> Self {
        let mut acc: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (c, i, j) in terms {
            *acc.entry((i, j)).or_insert(0.0) += c;
        }
        Self {
            terms: acc
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((i, j), c)| (c, i, j))
                .collect(),
        }
    }

    pub fn terms(&self) -> &[(f64, u32, u32)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|&(_, i, j)| i + j).max().unwrap_or(0)
    }

    pub fn coeff(&self, xdeg: u32, ydeg: u32) -> f64 {
        self.terms
            .iter()
            .find(|&&(_, i, j)| i == xdeg && j == ydeg)
            .map_or(0.0, |t| t.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(c, i, j)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    pub fn dx(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(c, i, j)| (c * i as f64, i - 1, j)),
        )
    }

    pub fn dy(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|t| t.2 > 0)
                .map(|&(c, i, j)| (c * j as f64, i, j - 1)),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(c, i, j)| (c * s, i, j)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, i, j) in &self.terms {
            for &(b, k, l) in &other.terms {
                out.push((a * b, i + k, j + l));
            }
        }
        Self::from_terms(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse()
    }
}

impl FromStr for Polynomial2 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, c: f64, i: u32, j: u32) -> fmt::Result {
    let mut parts: Vec<String> = Vec::new();
    if c != 1.0 || (i == 0 && j == 0) {
        parts.push(format!("{c}"));
    }
    for (var, d) in [("x", i), ("y", j)] {
        match d {
            0 => {}
            1 => parts.push(var.to_string()),
            d => parts.push(format!("{var}^{d}")),
        }
    }
    write!(f, "{}", parts.join("*"))
}

impl fmt::Display for Polynomial2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, &(c, i, j)) in self.terms.iter().enumerate() {
            if k == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            }
            write_monomial(f, c.abs(), i, j)?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Polynomial2> {
        self.skip_ws();
        if self.peek().is_none() {
            return self.err("empty expression");
        }
        let negate_first = self.eat('-');
        let mut terms = Vec::new();
        let first = self.term()?;
        terms.push(if negate_first {
            first.scale(-1.0)
        } else {
            first
        });
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(self.term()?.scale(-1.0));
            } else {
                break;
            }
        }
        self.skip_ws();
        if self.pos < self.src.len() {
            return self.err(format!("unexpected `{}`", self.peek().unwrap_or(' ')));
        }
        Ok(terms.iter().fold(Polynomial2::zero(), |acc, t| acc.add(t)))
    }

    fn term(&mut self) -> Result<Polynomial2> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial2> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => Ok(Polynomial2::constant(self.number()?)),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        self.pos += c.len_utf8();
                    } else {
                        break;
                    }
                }
                let name = &self.src[start..self.pos];
                let base = match name {
                    "x" => Polynomial2::x(),
                    "y" => Polynomial2::y(),
                    _ => {
                        return Err(Error::UnknownVariable {
                            name: name.to_string(),
                            offset: start,
                        })
                    }
                };
                if self.eat('^') {
                    self.skip_ws();
                    let e = self.posint()?;
                    Ok(base.pow(e))
                } else {
                    Ok(base)
                }
            }
            Some(c) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }

    fn posint(&mut self) -> Result<u32> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a positive integer exponent");
        }
        match self.src[start..self.pos].parse::<u32>() {
            Ok(0) | Err(_) => {
                self.pos = start;
                self.err("exponent must be a positive integer")
            }
            Ok(v) => Ok(v),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        // optional exponent, only when digits follow
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut k = i + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                i = k;
            }
        }
        self.pos = i;
        match self.src[start..i].parse::<f64>() {
            Ok(v) => Ok(v),
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number `{}`", &self.src[start..i]))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_terms() {
        let p = Polynomial2::parse("y - x^2").unwrap();
        assert_eq!(p.terms(), &[(1.0, 0, 1), (-1.0, 2, 0)]);
        let p = Polynomial2::parse("-x - x^2 + 20*x^4").unwrap();
        assert_eq!(p.terms(), &[(-1.0, 1, 0), (-1.0, 2, 0), (20.0, 4, 0)]);
    }

    #[test]
    fn merges_like_terms() {
        let p = Polynomial2::parse("x^2 + x^2").unwrap();
        assert_eq!(p.terms(), &[(2.0, 2, 0)]);
        let p = Polynomial2::parse("x*y - y*x").unwrap();
        assert!(p.is_zero());
        assert_eq!(p.to_string(), "0");
    }

    #[test]
    fn products_and_scientific_numbers() {
        let p = Polynomial2::parse("2.5e-1 * x * y^3 * 4").unwrap();
        assert_eq!(p.terms(), &[(1.0, 1, 3)]);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match Polynomial2::parse("x + * y") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 4),
            other => panic!("{other:?}"),
        }
        match Polynomial2::parse("x^0") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(Polynomial2::parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(
            Polynomial2::parse("x y"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_variable() {
        match Polynomial2::parse("x + z^2") {
            Err(Error::UnknownVariable { name, offset }) => {
                assert_eq!(name, "z");
                assert_eq!(offset, 4);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivatives() {
        let p = Polynomial2::parse("y - x^2 - x^3").unwrap();
        assert_eq!(p.dx(), Polynomial2::parse("-2*x - 3*x^2").unwrap());
        assert_eq!(p.dy(), Polynomial2::constant(1.0));
    }

    fn arb_poly() -> impl Strategy<Value = Polynomial2> {
        prop::collection::vec((-1e3f64..1e3, 0u32..6, 0u32..6), 0..8)
            .prop_map(Polynomial2::from_terms)
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(p in arb_poly()) {
            let q = Polynomial2::parse(&p.to_string()).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn product_evaluates_pointwise(p in arb_poly(), q in arb_poly(),
                                       x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let lhs = p.mul(&q).eval(x, y);
            let rhs = p.eval(x, y) * q.eval(x, y);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
        }
    }
}
