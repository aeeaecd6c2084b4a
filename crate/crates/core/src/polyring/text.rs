//! Text form of polynomials: `T^4+2*T+3`, with extension-field
//! coefficients written as parenthesized polynomials in `u`, e.g.
//! `(u+2)*T^2+1`.

use crate::error::{Error, Result};
use crate::field::{FieldCtx, Fq};

use super::{PolyA, PolyRing};

/// Result of parsing; `reduced` is set when some integer coefficient was
/// outside `0..p` and had to be reduced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPoly {
    pub poly: PolyA,
    pub reduced: bool,
}

impl PolyRing {
    pub fn format(&self, a: &PolyA) -> String {
        format_poly(&self.field, a, "T")
    }

    /// Parses the text form; see the module docs for the grammar.
    pub fn parse(&self, text: &str) -> Result<ParsedPoly> {
        let mut p = Parser {
            s: text.as_bytes(),
            pos: 0,
            field: &self.field,
            reduced: false,
        };
        let terms = p.sum(b'T', true)?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(Error::parse(p.pos, "unexpected character"));
        }
        let mut coeffs: Vec<Fq> = Vec::new();
        for (c, k) in terms {
            if coeffs.len() <= k {
                coeffs.resize(k + 1, 0);
            }
            coeffs[k] = self.field.add(coeffs[k], c);
        }
        Ok(ParsedPoly {
            poly: PolyA::from_coeffs(coeffs),
            reduced: p.reduced,
        })
    }

    /// Parses, discarding the reduction flag.
    pub fn parse_poly(&self, text: &str) -> Result<PolyA> {
        self.parse(text).map(|p| p.poly)
    }
}

/// Formats a base-field coefficient for use in front of a variable.
pub(crate) fn format_coeff(field: &FieldCtx, c: Fq) -> String {
    if field.is_prime_field() || c < field.p() {
        field.format_elem(c)
    } else {
        format!("({})", field.format_elem(c))
    }
}

pub(crate) fn format_poly(field: &FieldCtx, a: &PolyA, var: &str) -> String {
    let mut terms = Vec::new();
    for (k, &c) in a.coeffs().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let coef = format_coeff(field, c);
        let term = match k {
            0 => coef,
            1 if c == 1 => var.to_string(),
            1 => format!("{coef}*{var}"),
            _ if c == 1 => format!("{var}^{k}"),
            _ => format!("{coef}*{var}^{k}"),
        };
        terms.push(term);
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    field: &'a FieldCtx,
    reduced: bool,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::parse(self.pos, "expected an integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| Error::parse(start, "integer too large"))
    }

    /// Sum of signed terms `c*VAR^k`. At the T level (`outer`) the
    /// coefficient may be a parenthesized polynomial in `u`.
    fn sum(&mut self, var: u8, outer: bool) -> Result<Vec<(Fq, usize)>> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let negative = match self.peek() {
                Some(b'+') if !first => {
                    self.pos += 1;
                    false
                }
                Some(b'-') => {
                    self.pos += 1;
                    true
                }
                None if first => return Err(Error::parse(self.pos, "empty polynomial")),
                _ if first => false,
                _ => break,
            };
            let (c, k) = self.term(var, outer)?;
            let c = if negative { self.field.neg(c) } else { c };
            terms.push((c, k));
            first = false;
        }
        Ok(terms)
    }

    fn term(&mut self, var: u8, outer: bool) -> Result<(Fq, usize)> {
        let coef = match self.peek() {
            Some(b'0'..=b'9') => {
                let n = self.integer()?;
                if n >= self.field.p() as u64 {
                    self.reduced = true;
                }
                Some(self.field.from_int((n % self.field.p() as u64) as i64))
            }
            Some(b'(') if outer => {
                self.pos += 1;
                let inner = self.sum(b'u', false)?;
                if self.peek() != Some(b')') {
                    return Err(Error::parse(self.pos, "expected ')'"));
                }
                self.pos += 1;
                let mut digits: Vec<i64> = Vec::new();
                for (c, k) in inner {
                    if digits.len() <= k {
                        digits.resize(k + 1, 0);
                    }
                    digits[k] += c as i64;
                }
                Some(self.field.from_u_coeffs(&digits))
            }
            _ => None,
        };
        if let Some(c) = coef {
            if self.peek() == Some(b'*') {
                self.pos += 1;
                if self.peek() != Some(var) {
                    return Err(Error::parse(self.pos, format!("expected '{}'", var as char)));
                }
            } else if self.peek() != Some(var) {
                return Ok((c, 0));
            }
        }
        if self.peek() != Some(var) {
            return Err(Error::parse(self.pos, format!("expected a term in '{}'", var as char)));
        }
        self.pos += 1;
        let mut exp = 1;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            if !matches!(self.peek(), Some(b'0'..=b'9')) {
                return Err(Error::parse(self.pos, "expected an exponent"));
            }
            exp = self.integer()? as usize;
            if exp > 1 << 20 {
                return Err(Error::parse(self.pos, "exponent too large"));
            }
        }
        Ok((coef.unwrap_or(1), exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(FieldCtx::from_order(q).unwrap())
    }

    #[test]
    fn parses_examples() {
        let r = ring(5);
        assert_eq!(r.parse_poly("T^4+2*T+3").unwrap().coeffs(), &[3, 2, 0, 0, 1]);
        assert_eq!(r.parse_poly("T-2").unwrap().coeffs(), &[3, 1]);
        assert_eq!(r.parse_poly(" 2T^2 - T + 0 ").unwrap().coeffs(), &[0, 4, 2]);
        assert_eq!(r.parse_poly("-1").unwrap().coeffs(), &[4]);
        assert!(r.parse_poly("0").unwrap().is_zero());
        let parsed = r.parse("7*T").unwrap();
        assert!(parsed.reduced);
        assert_eq!(parsed.poly.coeffs(), &[0, 2]);
    }

    #[test]
    fn rejects_bad_syntax_with_position() {
        let r = ring(5);
        match r.parse("T^^2") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        assert!(r.parse("").is_err());
        assert!(r.parse("T+").is_err());
        assert!(r.parse("T*2").is_err());
        assert!(r.parse("x").is_err());
    }

    #[test]
    fn extension_coefficients() {
        let r = ring(25);
        let f = r.parse_poly("(u+2)*T^2+1").unwrap();
        assert_eq!(r.format(&f), "(u+2)*T^2+1");
        let g = r.parse_poly("(3*u)*T+(4)").unwrap();
        assert_eq!(r.format(&g), "(3*u)*T+4");
    }

    #[test]
    fn formats_canonically() {
        let r = ring(5);
        assert_eq!(r.format(&r.from_ints(&[3, 2, 0, 0, 1])), "T^4+2*T+3");
        assert_eq!(r.format(&r.from_ints(&[0, 1])), "T");
        assert_eq!(r.format(&r.zero()), "0");
        assert_eq!(r.format(&r.from_ints(&[0, 0, 4])), "4*T^2");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn format_parse_round_trip(c in proptest::collection::vec(0u32..25, 0..7)) {
            let r = ring(25);
            let f = PolyA::from_coeffs(c);
            let s = r.format(&f);
            let back = r.parse_poly(&s).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(r.format(&back), s);
        }
    }
}
