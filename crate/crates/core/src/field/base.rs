use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polyring::{PolyA, PolyRing};

/// Largest q for which extension-field log/exp tables are built.
const MAX_TABLE_Q: u64 = 1 << 20;

/// Element of a base field F_q, encoded as an integer in `0..q`.
///
/// For q = p the encoding is the residue itself; for q = p^s it is the
/// base-p digit vector of the representative polynomial in `u`.
pub type Fq = u32;

/// The base field F_q with q = p^s, p an odd prime and q ≥ 5.
pub struct FieldCtx {
    p: u32,
    s: u32,
    q: u32,
    /// Monic defining polynomial of F_{p^s} over F_p, low degree first.
    defining: Vec<u32>,
    pow_p: Vec<u32>,
    ext: Option<LogTables>,
    inv: Vec<u32>,
}

struct LogTables {
    /// exp[i] = g^i for i in 0..2(q-1)
    exp: Vec<u32>,
    /// log[x] for x != 0
    log: Vec<u32>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldCtx {
    /// Builds F_{p^s}. Rejects even p and fields with fewer than five elements.
    pub fn new(p: u32, s: u32) -> Result<Arc<FieldCtx>> {
        if !is_prime(p) {
            return Err(Error::FieldHypothesis(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::FieldHypothesis("q must be odd".into()));
        }
        if s == 0 {
            return Err(Error::FieldHypothesis("extension degree must be positive".into()));
        }
        let q = (p as u64).checked_pow(s).filter(|&q| q < (1u64 << 31));
        let Some(q) = q else {
            return Err(Error::TooLarge(format!("{p}^{s}")));
        };
        if q < 5 {
            return Err(Error::FieldHypothesis(format!("q = {q} < 5")));
        }
        if s == 1 {
            return Ok(Arc::new(Self::prime_unchecked(p)));
        }
        if q > MAX_TABLE_Q {
            return Err(Error::TooLarge(format!("q = {q} exceeds the table limit")));
        }
        // The prime subfield only serves to find the defining polynomial, so it
        // may be smaller than 5.
        let prime = Arc::new(Self::prime_unchecked(p));
        let ring = PolyRing::new(prime);
        let defining = ring
            .irreducibles(s as usize)
            .next()
            .expect("irreducible polynomials exist in every degree");
        Ok(Arc::new(Self::extension(p, s, q as u32, defining)))
    }

    /// Smallest admissible field context for q = p^s, inferred from q.
    pub fn from_order(q: u32) -> Result<Arc<FieldCtx>> {
        if q < 2 {
            return Err(Error::FieldHypothesis(format!("q = {q}")));
        }
        let mut p = 2;
        while !q.is_multiple_of(p) {
            p += 1;
        }
        let mut s = 0;
        let mut r = q;
        while r.is_multiple_of(p) {
            r /= p;
            s += 1;
        }
        if r != 1 {
            return Err(Error::FieldHypothesis(format!("{q} is not a prime power")));
        }
        Self::new(p, s)
    }

    fn prime_unchecked(p: u32) -> FieldCtx {
        let inv = if p <= (1 << 16) {
            let mut inv = vec![0u32; p as usize];
            for a in 1..p {
                inv[a as usize] = mod_pow(a as u64, (p - 2) as u64, p as u64) as u32;
            }
            inv
        } else {
            Vec::new()
        };
        FieldCtx {
            p,
            s: 1,
            q: p,
            defining: vec![0, 1],
            pow_p: vec![1],
            ext: None,
            inv,
        }
    }

    fn extension(p: u32, s: u32, q: u32, defining: PolyA) -> FieldCtx {
        let defining = defining.coeffs().to_vec();
        let pow_p: Vec<u32> = (0..s).map(|i| p.pow(i)).collect();
        let mut ctx = FieldCtx {
            p,
            s,
            q,
            defining,
            pow_p,
            ext: None,
            inv: Vec::new(),
        };
        // Find a primitive element by trying encodings in increasing order.
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let g = (2..q)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&l| ctx.slow_pow(g, order / l) != 1)
            })
            .expect("multiplicative group is cyclic");
        let n = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * n];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = x;
            exp[i + n] = x;
            log[x as usize] = i as u32;
            x = ctx.slow_mul(x, g);
        }
        ctx.ext = Some(LogTables { exp, log });
        let mut inv = vec![0u32; q as usize];
        for a in 1..q {
            inv[a as usize] = ctx.mul_inverse_via_log(a);
        }
        ctx.inv = inv;
        ctx
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.s == 1
    }

    /// Defining polynomial of F_{p^s} over F_p (low degree first).
    pub fn defining_poly(&self) -> &[u32] {
        &self.defining
    }

    #[inline]
    fn digits(&self, mut a: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.s).map(move |_| {
            let d = a % self.p;
            a /= self.p;
            d
        })
    }

    fn from_digits(&self, digits: &[u32]) -> u32 {
        digits
            .iter()
            .zip(&self.pow_p)
            .map(|(&d, &w)| d * w)
            .sum()
    }

    #[inline]
    pub fn add(&self, a: Fq, b: Fq) -> Fq {
        if self.s == 1 {
            let r = a + b;
            if r >= self.p {
                r - self.p
            } else {
                r
            }
        } else {
            let mut out = 0;
            let (mut a, mut b) = (a, b);
            for &w in &self.pow_p {
                let d = (a % self.p + b % self.p) % self.p;
                out += d * w;
                a /= self.p;
                b /= self.p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: Fq) -> Fq {
        if self.s == 1 {
            if a == 0 {
                0
            } else {
                self.p - a
            }
        } else {
            let mut out = 0;
            let mut a = a;
            for &w in &self.pow_p {
                let d = a % self.p;
                out += ((self.p - d) % self.p) * w;
                a /= self.p;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, a: Fq, b: Fq) -> Fq {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fq, b: Fq) -> Fq {
        match &self.ext {
            None => ((a as u64 * b as u64) % self.p as u64) as u32,
            Some(t) => {
                if a == 0 || b == 0 {
                    0
                } else {
                    t.exp[(t.log[a as usize] + t.log[b as usize]) as usize]
                }
            }
        }
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Fq) -> Option<Fq> {
        if a == 0 {
            return None;
        }
        if !self.inv.is_empty() {
            return Some(self.inv[a as usize]);
        }
        Some(mod_pow(a as u64, (self.p - 2) as u64, self.p as u64) as u32)
    }

    pub fn div(&self, a: Fq, b: Fq) -> Option<Fq> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Fq, mut e: u64) -> Fq {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of an integer under Z → F_p ⊆ F_q.
    pub fn from_int(&self, n: i64) -> Fq {
        n.rem_euclid(self.p as i64) as u32
    }

    /// Element from its coordinates over F_p in the basis 1, u, ..., u^{s-1}.
    /// Higher-degree input is reduced modulo the defining polynomial.
    pub fn from_u_coeffs(&self, coeffs: &[i64]) -> Fq {
        let p = self.p as i64;
        let mut c: Vec<u32> = coeffs.iter().map(|&x| x.rem_euclid(p) as u32).collect();
        let s = self.s as usize;
        // reduce by the monic defining polynomial
        while c.len() > s {
            let top = c.pop().unwrap();
            let shift = c.len() - s;
            for (i, &m) in self.defining[..s].iter().enumerate() {
                let sub = (top as u64 * m as u64 % self.p as u64) as u32;
                c[shift + i] = (c[shift + i] + self.p - sub) % self.p;
            }
        }
        c.resize(s, 0);
        self.from_digits(&c)
    }

    /// Coordinates over F_p in the basis 1, u, ..., u^{s-1}.
    pub fn u_coeffs(&self, a: Fq) -> Vec<u32> {
        self.digits(a).collect()
    }

    /// Dot product Σ a_i b_i.
    #[inline]
    pub fn dot(&self, a: &[Fq], b: &[Fq]) -> Fq {
        if self.s == 1 && self.p < (1 << 16) {
            let mut acc: u64 = 0;
            for (&x, &y) in a.iter().zip(b) {
                acc += x as u64 * y as u64;
                if acc >= (1u64 << 62) {
                    acc %= self.p as u64;
                }
            }
            (acc % self.p as u64) as u32
        } else {
            a.iter()
                .zip(b)
                .fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
        }
    }

    /// Symmetric integer representative for prime fields (|r| ≤ p/2); for
    /// extension fields returns `None`.
    pub fn signed_repr(&self, a: Fq) -> Option<i64> {
        if self.s != 1 {
            return None;
        }
        if a > self.p / 2 {
            Some(a as i64 - self.p as i64)
        } else {
            Some(a as i64)
        }
    }

    /// Text form: a decimal residue for prime fields, a polynomial in `u`
    /// for extension fields (e.g. `u+2`).
    pub fn format_elem(&self, a: Fq) -> String {
        if self.s == 1 {
            return a.to_string();
        }
        let digits: Vec<u32> = self.digits(a).collect();
        let mut terms = Vec::new();
        for (i, &d) in digits.iter().enumerate().rev() {
            if d == 0 {
                continue;
            }
            let t = match (i, d) {
                (0, d) => d.to_string(),
                (1, 1) => "u".to_string(),
                (1, d) => format!("{d}*u"),
                (i, 1) => format!("u^{i}"),
                (i, d) => format!("{d}*u^{i}"),
            };
            terms.push(t);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        let s = self.s as usize;
        let p = self.p as u64;
        let da: Vec<u64> = self.digits(a).map(|d| d as u64).collect();
        let db: Vec<u64> = self.digits(b).map(|d| d as u64).collect();
        let mut prod = vec![0u64; 2 * s];
        for i in 0..s {
            for j in 0..s {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        for k in (s..2 * s).rev() {
            let top = prod[k];
            if top == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..s {
                let m = self.defining[i] as u64;
                prod[k - s + i] = (prod[k - s + i] + p * p - top * m) % p;
            }
        }
        let digits: Vec<u32> = prod[..s].iter().map(|&x| x as u32).collect();
        self.from_digits(&digits)
    }

    fn slow_pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.slow_mul(acc, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn mul_inverse_via_log(&self, a: u32) -> u32 {
        let t = self.ext.as_ref().unwrap();
        let n = self.q - 1;
        let l = t.log[a as usize];
        t.exp[((n - l) % n) as usize]
    }
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.s == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{} (q = {})", self.p, self.s, self.q)
        }
    }
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.s == other.s && self.defining == other.defining
    }
}

impl Eq for FieldCtx {}

pub(crate) fn mod_pow(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_odd_prime_powers_at_least_five() {
        assert_eq!(FieldCtx::new(5, 1).unwrap().q(), 5);
        assert_eq!(FieldCtx::new(5, 2).unwrap().q(), 25);
        assert_eq!(FieldCtx::new(3, 2).unwrap().q(), 9);
        assert_eq!(FieldCtx::new(7, 1).unwrap().q(), 7);
    }

    #[test]
    fn rejects_hypothesis_violations() {
        assert!(matches!(FieldCtx::new(2, 3), Err(Error::FieldHypothesis(_))));
        assert!(matches!(FieldCtx::new(3, 1), Err(Error::FieldHypothesis(_))));
        assert!(matches!(FieldCtx::new(9, 1), Err(Error::FieldHypothesis(_))));
        assert!(FieldCtx::from_order(6).is_err());
        assert_eq!(FieldCtx::from_order(25).unwrap().s(), 2);
    }

    #[test]
    fn f25_uses_smallest_irreducible() {
        // u^2 + 2 is the first monic irreducible quadratic over F_5
        let f = FieldCtx::new(5, 2).unwrap();
        assert_eq!(f.defining_poly(), &[2, 0, 1]);
        let u = f.from_u_coeffs(&[0, 1]);
        assert_eq!(f.mul(u, u), f.from_int(-2));
    }

    #[test]
    fn field_axioms_exhaustive_f9_and_f25() {
        for (p, s) in [(3, 2), (5, 2), (7, 1)] {
            let f = FieldCtx::new(p, s).unwrap();
            let q = f.q();
            for a in 0..q {
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.slow_mul(a, b));
                    assert_eq!(f.add(a, b), f.add(b, a));
                }
                // Frobenius x -> x^q fixes the base field
                assert_eq!(f.pow(a, q as u64), a);
            }
        }
    }

    #[test]
    fn formats_u_polynomials() {
        let f = FieldCtx::new(5, 2).unwrap();
        assert_eq!(f.format_elem(f.from_u_coeffs(&[2, 1])), "u+2");
        assert_eq!(f.format_elem(f.from_u_coeffs(&[0, 3])), "3*u");
        assert_eq!(f.format_elem(0), "0");
    }
}
