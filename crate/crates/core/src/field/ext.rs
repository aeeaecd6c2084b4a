use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::FqMatrix;
use crate::polyring::{PolyA, PolyRing};

use super::{FieldCtx, Fq};

/// The residue field F_𝔭 = F_q[T]/(𝔭) for a monic irreducible 𝔭 of degree n,
/// with the matrix of x ↦ x^q in the basis 1, T̄, ..., T̄^{n-1}.
pub struct ExtFieldCtx {
    ring: PolyRing,
    modulus: PolyA,
    n: usize,
    frob: FqMatrix,
    quadratic: OnceLock<Vec<Vec<Fq>>>,
}

impl ExtFieldCtx {
    pub fn new(ring: &PolyRing, modulus: &PolyA) -> Result<Arc<Self>> {
        if modulus.is_constant() {
            return Err(Error::ConstantPolynomial);
        }
        if !modulus.is_monic() {
            return Err(Error::NotMonic(ring.format(modulus)));
        }
        if !ring.is_irreducible(modulus)? {
            return Err(Error::NotIrreducible(ring.format(modulus)));
        }
        let n = modulus.degree().unwrap();
        let xq = ring.powmod(&PolyA::t(), ring.q() as u64, modulus);
        let mut cols = Vec::with_capacity(n);
        let mut cur = ring.one();
        for _ in 0..n {
            let mut c = cur.coeffs().to_vec();
            c.resize(n, 0);
            cols.push(c);
            cur = ring.mulmod(&cur, &xq, modulus);
        }
        let frob = FqMatrix::from_columns(n, &cols);
        Ok(Self::from_parts(ring, modulus, frob))
    }

    /// Trusted constructor for callers that already hold the Frobenius
    /// matrix (e.g. from an irreducibility test).
    pub(crate) fn from_parts(ring: &PolyRing, modulus: &PolyA, frob: FqMatrix) -> Arc<Self> {
        let n = modulus.degree().unwrap();
        debug_assert_eq!(frob.rows(), n);
        Arc::new(ExtFieldCtx {
            ring: ring.clone(),
            modulus: modulus.clone(),
            n,
            frob,
            quadratic: OnceLock::new(),
        })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn field(&self) -> &FieldCtx {
        self.ring.field()
    }

    pub fn modulus(&self) -> &PolyA {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn frobenius_matrix(&self) -> &FqMatrix {
        &self.frob
    }

    pub fn zero(self: &Arc<Self>) -> ExtFieldElem {
        self.elem(vec![0; self.n])
    }

    pub fn one(self: &Arc<Self>) -> ExtFieldElem {
        self.scalar(1)
    }

    pub fn scalar(self: &Arc<Self>, c: Fq) -> ExtFieldElem {
        let mut v = vec![0; self.n];
        v[0] = c;
        self.elem(v)
    }

    /// The image T̄ of T.
    pub fn t_bar(self: &Arc<Self>) -> ExtFieldElem {
        self.from_poly(&PolyA::t())
    }

    pub fn from_poly(self: &Arc<Self>, a: &PolyA) -> ExtFieldElem {
        self.elem(self.reduce(a))
    }

    /// Element with the given coordinates (length must be n).
    pub fn elem(self: &Arc<Self>, c: Vec<Fq>) -> ExtFieldElem {
        assert_eq!(c.len(), self.n);
        ExtFieldElem {
            ctx: self.clone(),
            c,
        }
    }

    /// Coordinates of a mod 𝔭.
    pub fn reduce(&self, a: &PolyA) -> Vec<Fq> {
        let r = if a.degree().is_none_or(|d| d < self.n) {
            a.clone()
        } else {
            self.ring.rem(a, &self.modulus).expect("nonzero modulus")
        };
        let mut c = r.into_coeffs();
        c.resize(self.n, 0);
        c
    }

    pub fn add_raw(&self, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
        let f = self.field();
        a.iter().zip(b).map(|(&x, &y)| f.add(x, y)).collect()
    }

    pub fn sub_raw(&self, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
        let f = self.field();
        a.iter().zip(b).map(|(&x, &y)| f.sub(x, y)).collect()
    }

    pub fn scale_raw(&self, c: Fq, a: &[Fq]) -> Vec<Fq> {
        let f = self.field();
        a.iter().map(|&x| f.mul(c, x)).collect()
    }

    /// Product of two coordinate vectors.
    pub fn mul_raw(&self, a: &[Fq], b: &[Fq]) -> Vec<Fq> {
        let n = self.n;
        let f = self.field();
        let m = self.modulus.coeffs();
        if f.is_prime_field() && f.p() < (1 << 16) {
            let p = f.p() as u64;
            let mut acc = vec![0u64; 2 * n - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    acc[i + j] += x as u64 * y as u64;
                }
            }
            for k in (n..2 * n - 1).rev() {
                let c = acc[k] % p;
                if c == 0 {
                    continue;
                }
                let negc = p - c;
                for i in 0..n {
                    acc[k - n + i] += negc * m[i] as u64;
                }
            }
            acc.truncate(n);
            acc.into_iter().map(|x| (x % p) as u32).collect()
        } else {
            let mut prod = vec![0; 2 * n - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = f.add(prod[i + j], f.mul(x, y));
                }
            }
            for k in (n..2 * n - 1).rev() {
                let c = prod[k];
                if c == 0 {
                    continue;
                }
                for i in 0..n {
                    prod[k - n + i] = f.sub(prod[k - n + i], f.mul(c, m[i]));
                }
            }
            prod.truncate(n);
            prod
        }
    }

    /// x ↦ x^q on coordinates.
    pub fn frob_raw(&self, a: &[Fq]) -> Vec<Fq> {
        self.frob.mul_vec(self.field(), a)
    }

    pub fn inv_raw(&self, a: &[Fq]) -> Option<Vec<Fq>> {
        let inv = self
            .ring
            .inv_mod(&PolyA::from_coeffs(a.to_vec()), &self.modulus)?;
        Some(self.reduce(&inv))
    }

    /// F_q-basis of the subfield F_{q²} (n even), computed once as the
    /// kernel of Frob² − I.
    pub fn quadratic_subfield(&self) -> Result<&[Vec<Fq>]> {
        if !self.n.is_multiple_of(2) {
            return Err(Error::OddDegree(self.n));
        }
        let basis = self.quadratic.get_or_init(|| {
            let f = self.field();
            self.frob.mul(f, &self.frob).sub_identity(f).kernel(f)
        });
        Ok(basis)
    }
}

impl fmt::Debug for ExtFieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "F_q[T]/({}) over F_{}",
            self.ring.format(&self.modulus),
            self.ring.q()
        )
    }
}

/// Element of a residue field F_𝔭, stored as its coordinates in the basis
/// 1, T̄, ..., T̄^{n-1}.
#[derive(Clone)]
pub struct ExtFieldElem {
    ctx: Arc<ExtFieldCtx>,
    c: Vec<Fq>,
}

impl ExtFieldElem {
    pub fn ctx(&self) -> &Arc<ExtFieldCtx> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Fq] {
        &self.c
    }

    pub fn to_poly(&self) -> PolyA {
        PolyA::from_coeffs(self.c.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&x| x == 0)
    }

    pub fn is_one(&self) -> bool {
        self.as_base() == Some(1)
    }

    /// The element as a constant of F_q, if it is one.
    pub fn as_base(&self) -> Option<Fq> {
        self.c[1..].iter().all(|&x| x == 0).then(|| self.c[0])
    }

    pub fn inv(&self) -> Option<ExtFieldElem> {
        self.ctx.inv_raw(&self.c).map(|c| self.ctx.elem(c))
    }

    pub fn pow(&self, mut e: u64) -> ExtFieldElem {
        let mut base = self.clone();
        let mut acc = self.ctx.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// x^{q^k}.
    pub fn frob(&self, k: usize) -> ExtFieldElem {
        let mut v = self.c.clone();
        for _ in 0..k % self.ctx.n {
            v = self.ctx.frob_raw(&v);
        }
        self.ctx.elem(v)
    }

    fn conjugates(&self, step: usize, count: usize) -> impl Iterator<Item = ExtFieldElem> + '_ {
        let mut cur = self.clone();
        (0..count).map(move |i| {
            if i > 0 {
                cur = cur.frob(step);
            }
            cur.clone()
        })
    }

    /// N_{F_𝔭/F_q}(x).
    pub fn norm(&self) -> Fq {
        let n = self.ctx.n;
        let prod = self
            .conjugates(1, n)
            .fold(self.ctx.one(), |acc, y| &acc * &y);
        prod.as_base().expect("norm lies in F_q")
    }

    /// Tr_{F_𝔭/F_q}(x).
    pub fn trace(&self) -> Fq {
        let n = self.ctx.n;
        let sum = self
            .conjugates(1, n)
            .fold(self.ctx.zero(), |acc, y| &acc + &y);
        sum.as_base().expect("trace lies in F_q")
    }

    /// N_{F_𝔭/F_{q²}}(x), as an element of F_𝔭 fixed by Frob².
    pub fn norm_to_quadratic(&self) -> Result<ExtFieldElem> {
        let n = self.ctx.n;
        if !n.is_multiple_of(2) {
            return Err(Error::OddDegree(n));
        }
        Ok(self
            .conjugates(2, n / 2)
            .fold(self.ctx.one(), |acc, y| &acc * &y))
    }

    /// Tr_{F_𝔭/F_{q²}}(x).
    pub fn trace_to_quadratic(&self) -> Result<ExtFieldElem> {
        let n = self.ctx.n;
        if !n.is_multiple_of(2) {
            return Err(Error::OddDegree(n));
        }
        Ok(self
            .conjugates(2, n / 2)
            .fold(self.ctx.zero(), |acc, y| &acc + &y))
    }

    /// Whether x lies in the subfield F_{q²} (n even).
    pub fn in_quadratic_subfield(&self) -> Result<bool> {
        let basis = self.ctx.quadratic_subfield()?;
        let f = self.ctx.field();
        let m = FqMatrix::from_columns(self.ctx.n, basis);
        Ok(m.solve(f, &self.c).is_some())
    }

    fn check_ctx(&self, other: &ExtFieldElem) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx.modulus == other.ctx.modulus,
            "elements of different residue fields"
        );
    }
}

impl PartialEq for ExtFieldElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.modulus == other.ctx.modulus && self.c == other.c
    }
}

impl Eq for ExtFieldElem {}

impl fmt::Debug for ExtFieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ctx.ring.format(&self.to_poly()))
    }
}

impl fmt::Display for ExtFieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for &ExtFieldElem {
    type Output = ExtFieldElem;
    fn add(self, rhs: &ExtFieldElem) -> ExtFieldElem {
        self.check_ctx(rhs);
        self.ctx.elem(self.ctx.add_raw(&self.c, &rhs.c))
    }
}

impl Sub for &ExtFieldElem {
    type Output = ExtFieldElem;
    fn sub(self, rhs: &ExtFieldElem) -> ExtFieldElem {
        self.check_ctx(rhs);
        self.ctx.elem(self.ctx.sub_raw(&self.c, &rhs.c))
    }
}

impl Mul for &ExtFieldElem {
    type Output = ExtFieldElem;
    fn mul(self, rhs: &ExtFieldElem) -> ExtFieldElem {
        self.check_ctx(rhs);
        self.ctx.elem(self.ctx.mul_raw(&self.c, &rhs.c))
    }
}

impl Neg for &ExtFieldElem {
    type Output = ExtFieldElem;
    fn neg(self) -> ExtFieldElem {
        let f = self.ctx.field();
        self.ctx.elem(self.c.iter().map(|&x| f.neg(x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f5() -> PolyRing {
        PolyRing::new(FieldCtx::from_order(5).unwrap())
    }

    fn f25() -> Arc<ExtFieldCtx> {
        let r = f5();
        ExtFieldCtx::new(&r, &r.from_ints(&[2, 0, 1])).unwrap()
    }

    #[test]
    fn construction_checks() {
        let r = f5();
        assert!(matches!(
            ExtFieldCtx::new(&r, &r.from_ints(&[-1, 0, 1])),
            Err(Error::NotIrreducible(_))
        ));
        assert!(matches!(
            ExtFieldCtx::new(&r, &r.from_ints(&[1, 0, 2])),
            Err(Error::NotMonic(_))
        ));
        let lin = ExtFieldCtx::new(&r, &r.t_minus(2)).unwrap();
        assert_eq!(lin.degree(), 1);
        assert_eq!(lin.t_bar().as_base(), Some(2));
    }

    #[test]
    fn frobenius_examples() {
        let k = f25();
        let u = k.t_bar();
        assert_eq!(u.frob(0), u);
        assert_eq!(u.frob(1).coeffs(), &[0, 4]);
        assert_eq!(k.scalar(3).frob(1), k.scalar(3));
        assert_eq!(u.frob(1), u.pow(5));
    }

    #[test]
    fn norm_and_trace_examples() {
        let k = f25();
        let u = k.t_bar();
        assert_eq!(u.norm(), 2);
        assert_eq!(u.trace(), 0);
        assert_eq!(k.one().norm(), 1);
        assert_eq!(k.one().trace(), 2);
    }

    #[test]
    fn frobenius_matrix_is_invertible_of_order_n() {
        let r = f5();
        for p in r.irreducibles(4).take(20) {
            let k = ExtFieldCtx::new(&r, &p).unwrap();
            let f = r.field();
            let m = k.frobenius_matrix();
            assert_ne!(m.determinant(f), 0);
            let mut pow = FqMatrix::identity(4);
            for _ in 0..4 {
                pow = pow.mul(f, m);
            }
            assert_eq!(pow, FqMatrix::identity(4));
        }
    }

    #[test]
    fn quadratic_subfield_and_transitivity() {
        let r = f5();
        for p in r.irreducibles(4).step_by(7).take(10) {
            let k = ExtFieldCtx::new(&r, &p).unwrap();
            assert_eq!(k.quadratic_subfield().unwrap().len(), 2);
            for a in [k.t_bar(), k.from_poly(&r.from_ints(&[1, 2, 3])), k.scalar(3)] {
                let nq = a.norm_to_quadratic().unwrap();
                assert!(nq.in_quadratic_subfield().unwrap());
                let tq = a.trace_to_quadratic().unwrap();
                assert!(tq.in_quadratic_subfield().unwrap());
                // N_{F_q²/F_q}(y) = y · y^q
                let down = (&nq * &nq.frob(1)).as_base().unwrap();
                assert_eq!(down, a.norm());
                let tdown = (&tq + &tq.frob(1)).as_base().unwrap();
                assert_eq!(tdown, a.trace());
            }
        }
        let k3 = ExtFieldCtx::new(&r, &r.irreducibles(3).next().unwrap()).unwrap();
        assert!(matches!(k3.t_bar().norm_to_quadratic(), Err(Error::OddDegree(3))));
    }

    fn elem_strategy(n: usize) -> impl Strategy<Value = Vec<u32>> {
        proptest::collection::vec(0u32..5, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn frobenius_is_a_ring_map(a in elem_strategy(5), b in elem_strategy(5), k in 0usize..6) {
            let r = f5();
            let m = r.irreducibles(5).nth(3).unwrap();
            let ctx = ExtFieldCtx::new(&r, &m).unwrap();
            let x = ctx.elem(a);
            let y = ctx.elem(b);
            prop_assert_eq!((&x + &y).frob(k), &x.frob(k) + &y.frob(k));
            prop_assert_eq!((&x * &y).frob(k), &x.frob(k) * &y.frob(k));
            prop_assert_eq!(x.frob(5), x.clone());
            prop_assert_eq!(x.frob(1), x.pow(5));
        }

        #[test]
        fn norm_is_multiplicative_and_trace_linear(a in elem_strategy(4), b in elem_strategy(4), c in 0u32..5) {
            let r = f5();
            let m = r.irreducibles(4).nth(11).unwrap();
            let ctx = ExtFieldCtx::new(&r, &m).unwrap();
            let f = r.field();
            let x = ctx.elem(a);
            let y = ctx.elem(b);
            prop_assert_eq!((&x * &y).norm(), f.mul(x.norm(), y.norm()));
            prop_assert_eq!(x.pow((625 - 1) / 4).as_base(), Some(x.norm()));
            let lin = &(&ctx.scalar(c) * &x) + &y;
            prop_assert_eq!(lin.trace(), f.add(f.mul(c, x.trace()), y.trace()));
        }

        #[test]
        fn inverse_round_trip(a in elem_strategy(3)) {
            let r = f5();
            let m = r.irreducibles(3).nth(2).unwrap();
            let ctx = ExtFieldCtx::new(&r, &m).unwrap();
            let x = ctx.elem(a);
            match x.inv() {
                None => prop_assert!(x.is_zero()),
                Some(y) => prop_assert!((&x * &y).is_one()),
            }
        }
    }
}
