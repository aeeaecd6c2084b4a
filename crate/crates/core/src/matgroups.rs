//! 2×2 matrix groups over small finite rings: orders, the Koblitz local
//! factor, and closure checks for SL₂ generation and commutators.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::polyring::{PolyA, PolyRing};

/// Largest ring handled by exhaustive enumeration.
pub const MAX_RING_SIZE: usize = 25;
/// Largest field for the unipotent generation check.
pub const MAX_SL2_GENERATION: usize = 9;

/// A finite commutative ring given by addition and multiplication tables.
/// Element 0 is the zero and element 1 the identity.
#[derive(Clone, Debug)]
pub struct FiniteRing {
    name: String,
    size: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<Option<u8>>,
}

pub type Mat2 = [u8; 4];

impl FiniteRing {
    fn from_tables(name: String, size: usize, add: Vec<u8>, mul: Vec<u8>) -> Self {
        let neg = (0..size)
            .map(|a| (0..size).find(|&b| add[a * size + b] == 0).unwrap() as u8)
            .collect();
        let inv = (0..size)
            .map(|a| (0..size).find(|&b| mul[a * size + b] == 1).map(|b| b as u8))
            .collect();
        FiniteRing { name, size, add, mul, neg, inv }
    }

    /// Z/p[u]/(m) for a monic m given low degree first (leading 1 omitted).
    fn z_p_quotient(name: String, p: u32, m: &[u32]) -> Self {
        let s = m.len();
        let size = (p as usize).pow(s as u32);
        let digits = |x: usize| -> Vec<u32> {
            let mut x = x;
            (0..s)
                .map(|_| {
                    let d = (x % p as usize) as u32;
                    x /= p as usize;
                    d
                })
                .collect()
        };
        let index = |v: &[u32]| v.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d as usize);
        let mut add = vec![0u8; size * size];
        let mut mul = vec![0u8; size * size];
        for a in 0..size {
            let da = digits(a);
            for b in 0..size {
                let db = digits(b);
                let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * size + b] = index(&sum) as u8;
                let mut prod = vec![0u32; 2 * s.max(1)];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for k in (s..prod.len()).rev() {
                    let c = prod[k];
                    prod[k] = 0;
                    for (i, mi) in m.iter().enumerate() {
                        prod[k - s + i] = (prod[k - s + i] + (p - c) * mi) % p;
                    }
                }
                mul[a * size + b] = index(&prod[..s]) as u8;
            }
        }
        Self::from_tables(name, size, add, mul)
    }

    /// The field with Q elements.
    pub fn galois_field(order: u32) -> Result<Self> {
        if order < 2 || order as usize > MAX_RING_SIZE {
            return Err(Error::TooLarge(format!("field of order {order}")));
        }
        let p = (2..=order).find(|d| order.is_multiple_of(*d)).unwrap();
        let mut s = 0;
        let mut rest = order;
        while rest.is_multiple_of(p) {
            rest /= p;
            s += 1;
        }
        if rest != 1 {
            return Err(Error::FieldHypothesis(format!("{order} is not a prime power")));
        }
        // first monic m of degree s making the quotient a field
        let count = (p as usize).pow(s);
        for idx in 0..count {
            let m: Vec<u32> = (0..s)
                .map(|i| ((idx / (p as usize).pow(i)) % p as usize) as u32)
                .collect();
            let r = Self::z_p_quotient(format!("F_{order}"), p, &m);
            if r.is_field() {
                return Ok(r);
            }
        }
        unreachable!("no irreducible polynomial of degree {s} over F_{p}")
    }

    /// The quotient A/(modulus).
    pub fn residue(ring: &PolyRing, modulus: &PolyA) -> Result<Self> {
        let d = modulus.degree().ok_or(Error::DivisionByZero)?;
        if d == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let q = ring.q() as usize;
        let size = q.checked_pow(d as u32).filter(|&s| s <= MAX_RING_SIZE).ok_or_else(|| {
            Error::TooLarge(format!("A/({}) has more than {MAX_RING_SIZE} elements", ring.format(modulus)))
        })?;
        let elem = |i: usize| -> PolyA {
            PolyA::from_coeffs((0..d).map(|k| ((i / q.pow(k as u32)) % q) as u32).collect())
        };
        let index = |a: &PolyA| -> usize {
            (0..d).rev().fold(0usize, |acc, k| acc * q + a.coeff(k) as usize)
        };
        let mut add = vec![0u8; size * size];
        let mut mul = vec![0u8; size * size];
        for a in 0..size {
            for b in 0..size {
                let (x, y) = (elem(a), elem(b));
                add[a * size + b] = index(&ring.add(&x, &y)) as u8;
                mul[a * size + b] = index(&ring.mulmod(&x, &y, modulus)) as u8;
            }
        }
        Ok(Self::from_tables(format!("A/({})", ring.format(modulus)), size, add, mul))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_field(&self) -> bool {
        (1..self.size).all(|a| self.inv[a].is_some())
    }

    pub fn units(&self) -> Vec<u8> {
        (0..self.size).filter(|&a| self.inv[a].is_some()).map(|a| a as u8).collect()
    }

    pub fn is_unit(&self, a: u8) -> bool {
        self.inv[a as usize].is_some()
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.size + b as usize]
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.size + b as usize]
    }

    pub fn identity(&self) -> Mat2 {
        [1, 0, 0, 1]
    }

    pub fn mat_mul(&self, x: &Mat2, y: &Mat2) -> Mat2 {
        let e = |a: u8, b: u8, c: u8, d: u8| self.add(self.mul(a, b), self.mul(c, d));
        [
            e(x[0], y[0], x[1], y[2]),
            e(x[0], y[1], x[1], y[3]),
            e(x[2], y[0], x[3], y[2]),
            e(x[2], y[1], x[3], y[3]),
        ]
    }

    pub fn det(&self, x: &Mat2) -> u8 {
        self.sub(self.mul(x[0], x[3]), self.mul(x[1], x[2]))
    }

    pub fn mat_inv(&self, x: &Mat2) -> Option<Mat2> {
        let di = self.inv[self.det(x) as usize]?;
        Some([
            self.mul(di, x[3]),
            self.mul(di, self.neg[x[1] as usize]),
            self.mul(di, self.neg[x[2] as usize]),
            self.mul(di, x[0]),
        ])
    }

    fn code(&self, x: &Mat2) -> usize {
        x.iter().fold(0, |acc, &e| acc * self.size + e as usize)
    }

    fn all_matrices(&self) -> impl Iterator<Item = Mat2> + '_ {
        let n = self.size;
        (0..n.pow(4)).map(move |i| {
            [
                (i / (n * n * n)) as u8,
                ((i / (n * n)) % n) as u8,
                ((i / n) % n) as u8,
                (i % n) as u8,
            ]
        })
    }

    /// |GL₂| by enumeration.
    pub fn gl2_count(&self) -> u64 {
        self.all_matrices().filter(|x| self.is_unit(self.det(x))).count() as u64
    }

    /// |SL₂| by enumeration.
    pub fn sl2_count(&self) -> u64 {
        self.all_matrices().filter(|x| self.det(x) == 1).count() as u64
    }

    fn upper(&self, x: u8) -> Mat2 {
        [1, x, 0, 1]
    }

    fn lower(&self, x: u8) -> Mat2 {
        [1, 0, x, 1]
    }

    /// The subgroup generated by `gens`, by breadth-first products.
    /// Panics if the result is not closed under inverses.
    pub fn closure(&self, gens: &[Mat2]) -> Closure {
        let mut seen = Bitset::new(self.size.pow(4));
        let id = self.identity();
        seen.insert(self.code(&id));
        let mut elems = vec![id];
        let mut queue = VecDeque::from([id]);
        while let Some(x) = queue.pop_front() {
            for g in gens {
                let y = self.mat_mul(&x, g);
                if seen.insert(self.code(&y)) {
                    elems.push(y);
                    queue.push_back(y);
                }
            }
        }
        for x in &elems {
            let xi = self.mat_inv(x).expect("generators are invertible");
            assert!(seen.contains(self.code(&xi)), "closure is not a subgroup");
        }
        Closure { seen, elems }
    }

    fn contains(&self, c: &Closure, x: &Mat2) -> bool {
        c.seen.contains(self.code(x))
    }
}

/// A subgroup of GL₂ listed explicitly.
pub struct Closure {
    seen: Bitset,
    elems: Vec<Mat2>,
}

impl Closure {
    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elements(&self) -> &[Mat2] {
        &self.elems
    }
}

struct Bitset(Vec<u64>);

impl Bitset {
    fn new(n: usize) -> Self {
        Bitset(vec![0; n.div_ceil(64)])
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns true if newly inserted.
    fn insert(&mut self, i: usize) -> bool {
        let fresh = !self.contains(i);
        self.0[i / 64] |= 1 << (i % 64);
        fresh
    }
}

/// Q(Q−1)²(Q+1).
pub fn gl2_order(q: u64) -> u64 {
    q * (q - 1) * (q - 1) * (q + 1)
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct KoblitzLocal {
    pub ring: String,
    pub count: u64,
    pub total: u64,
    /// 1 − count/(total·(1 − 1/Q)) as numerator/denominator in lowest terms
    pub defect: (u64, u64),
    pub matches_closed_form: bool,
}

impl KoblitzLocal {
    pub fn ratio(&self) -> f64 {
        self.count as f64 / self.total as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Counts g ∈ GL₂(F) with det(I − g) a unit and compares the normalized
/// ratio with 1 − (Q²−Q−1)/((Q−1)³(Q+1)).
pub fn koblitz_local_count(field: &FiniteRing) -> Result<KoblitzLocal> {
    if !field.is_field() {
        return Err(Error::InvalidArgument(format!("{} is not a field", field.name())));
    }
    let q = field.size() as u64;
    let mut count = 0;
    let mut total = 0;
    for g in field.all_matrices() {
        if !field.is_unit(field.det(&g)) {
            continue;
        }
        total += 1;
        let h = [field.sub(1, g[0]), field.neg[g[1] as usize], field.neg[g[2] as usize], field.sub(1, g[3])];
        if field.is_unit(field.det(&h)) {
            count += 1;
        }
    }
    // count·Q / (total·(Q−1)) = 1 − num/den
    let (a, b) = (count * q, total * (q - 1));
    let (num, den) = (b - a, b);
    let g = gcd(num, den);
    let closed = (q * q - q - 1, (q - 1).pow(3) * (q + 1));
    let gc = gcd(closed.0, closed.1);
    Ok(KoblitzLocal {
        ring: field.name().to_string(),
        count,
        total,
        defect: (num / g, den / g),
        matches_closed_form: (num / g, den / g) == (closed.0 / gc, closed.1 / gc),
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ClosureReport {
    pub ring: String,
    pub closure_size: u64,
    pub expected_size: u64,
    pub holds: bool,
}

/// Whether the upper and lower unipotent subgroups generate SL₂(F).
pub fn sl2_unipotent_generation(field: &FiniteRing) -> Result<ClosureReport> {
    if field.size() > MAX_SL2_GENERATION {
        return Err(Error::TooLarge(format!(
            "unipotent closure over a field of order {} (limit {MAX_SL2_GENERATION})",
            field.size()
        )));
    }
    if !field.is_field() {
        return Err(Error::InvalidArgument(format!("{} is not a field", field.name())));
    }
    let gens: Vec<Mat2> = (1..field.size() as u8)
        .flat_map(|x| [field.upper(x), field.lower(x)])
        .collect();
    let c = field.closure(&gens);
    let sl2 = field.sl2_count();
    let inside = c.elements().iter().all(|x| field.det(x) == 1);
    Ok(ClosureReport {
        ring: field.name().to_string(),
        closure_size: c.len() as u64,
        expected_size: sl2,
        holds: inside && c.len() as u64 == sl2,
    })
}

/// Whether the commutator subgroup of GL₂(R) equals SL₂(R).
pub fn commutator_check(ring: &FiniteRing) -> Result<ClosureReport> {
    let mut ggens: Vec<Mat2> = Vec::new();
    for x in 1..ring.size() as u8 {
        ggens.push(ring.upper(x));
        ggens.push(ring.lower(x));
    }
    for u in ring.units() {
        if u != 1 {
            ggens.push([u, 0, 0, 1]);
        }
    }
    let g = ring.closure(&ggens);
    let gl2 = ring.gl2_count();
    if g.len() as u64 != gl2 {
        return Err(Error::Inconsistent(format!(
            "generators of GL₂({}) give {} of {gl2} elements",
            ring.name(),
            g.len()
        )));
    }
    let inverses: Vec<Mat2> = ggens.iter().map(|x| ring.mat_inv(x).unwrap()).collect();
    let mut hgens: Vec<Mat2> = Vec::new();
    for (a, ai) in ggens.iter().zip(&inverses) {
        for (b, bi) in ggens.iter().zip(&inverses) {
            let c = ring.mat_mul(&ring.mat_mul(a, b), &ring.mat_mul(ai, bi));
            if !hgens.contains(&c) {
                hgens.push(c);
            }
        }
    }
    // normal closure: add conjugates until the subgroup is stable
    let mut h = ring.closure(&hgens);
    loop {
        let mut grew = false;
        for (a, ai) in ggens.iter().zip(&inverses) {
            for k in 0..hgens.len() {
                let c = ring.mat_mul(&ring.mat_mul(a, &hgens[k]), ai);
                if !ring.contains(&h, &c) {
                    hgens.push(c);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
        h = ring.closure(&hgens);
    }
    let sl2 = ring.sl2_count();
    let inside = h.elements().iter().all(|x| ring.det(x) == 1);
    Ok(ClosureReport {
        ring: ring.name().to_string(),
        closure_size: h.len() as u64,
        expected_size: sl2,
        holds: inside && h.len() as u64 == sl2,
    })
}

/// All finite group verifications at q, as serializable records.
#[derive(Clone, Debug, Serialize)]
pub struct GroupReport {
    pub gl2_orders: Vec<OrderCheck>,
    pub koblitz_local: Vec<KoblitzLocal>,
    pub sl2_generation: Vec<ClosureReport>,
    pub commutators: Vec<ClosureReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderCheck {
    pub q: u64,
    pub formula: u64,
    pub enumerated: u64,
    pub holds: bool,
}

impl GroupReport {
    pub fn all_hold(&self) -> bool {
        self.gl2_orders.iter().all(|c| c.holds)
            && self.koblitz_local.iter().all(|c| c.matches_closed_form)
            && self.sl2_generation.iter().all(|c| c.holds)
            && self.commutators.iter().all(|c| c.holds)
    }
}

/// Runs the checks over A = F_q[T]: orders for small fields, the local
/// factor at a degree-1 prime (and degree 2 when it fits), unipotent
/// generation for small fields, and commutators over A/λ and A/λ².
pub fn group_report(ring: &PolyRing) -> Result<GroupReport> {
    let mut gl2_orders = Vec::new();
    for q in [2u32, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25] {
        let f = FiniteRing::galois_field(q)?;
        let enumerated = f.gl2_count();
        let formula = gl2_order(q as u64);
        gl2_orders.push(OrderCheck {
            q: q as u64,
            formula,
            enumerated,
            holds: formula == enumerated,
        });
    }
    let t = ring.t();
    let mut koblitz_local = vec![koblitz_local_count(&FiniteRing::residue(ring, &t)?)?];
    if let Some(l2) = ring.irreducibles(2).next() {
        if let Ok(f) = FiniteRing::residue(ring, &l2) {
            koblitz_local.push(koblitz_local_count(&f)?);
        }
    }
    let mut sl2_generation = Vec::new();
    for q in [2u32, 3, 4, 5, 7, 8, 9] {
        sl2_generation.push(sl2_unipotent_generation(&FiniteRing::galois_field(q)?)?);
    }
    let mut commutators = vec![commutator_check(&FiniteRing::residue(ring, &t)?)?];
    if let Ok(r2) = FiniteRing::residue(ring, &ring.mul(&t, &t)) {
        commutators.push(commutator_check(&r2)?);
    }
    Ok(GroupReport {
        gl2_orders,
        koblitz_local,
        sl2_generation,
        commutators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn ring5() -> PolyRing {
        PolyRing::new(FieldCtx::from_order(5).unwrap())
    }

    #[test]
    fn orders() {
        assert_eq!(gl2_order(5), 480);
        assert_eq!(gl2_order(2), 6);
        for q in [2u32, 3, 4, 5, 7, 9, 25] {
            let f = FiniteRing::galois_field(q).unwrap();
            assert!(f.is_field());
            assert_eq!(f.gl2_count(), gl2_order(q as u64), "Q = {q}");
            let q = q as u64;
            assert_eq!(gl2_order(q), (q * q - 1) * (q * q - q));
        }
        assert!(FiniteRing::galois_field(6).is_err());
        assert!(FiniteRing::galois_field(27).is_err());
    }

    #[test]
    fn residue_rings() {
        let r = ring5();
        let f = FiniteRing::residue(&r, &r.t_minus(2)).unwrap();
        assert!(f.is_field());
        assert_eq!(f.size(), 5);
        let f25 = FiniteRing::residue(&r, &r.from_ints(&[2, 0, 1])).unwrap();
        assert!(f25.is_field());
        let dual = FiniteRing::residue(&r, &r.from_ints(&[0, 0, 1])).unwrap();
        assert!(!dual.is_field());
        assert_eq!(dual.units().len(), 20);
        assert_eq!(dual.gl2_count(), 300000);
        assert!(FiniteRing::residue(&r, &r.from_ints(&[0, 0, 0, 1])).is_err());
    }

    #[test]
    fn koblitz_local_factor() {
        let r = ring5();
        let k = koblitz_local_count(&FiniteRing::residue(&r, &r.t()).unwrap()).unwrap();
        assert_eq!((k.count, k.total), (365, 480));
        assert_eq!(k.defect, (19, 384));
        assert!(k.matches_closed_form);
        assert!(k.ratio() > 0.0 && k.ratio() < 1.0);
        let k3 = koblitz_local_count(&FiniteRing::galois_field(3).unwrap()).unwrap();
        assert_eq!(k3.defect, (5, 32));
        assert!(k3.matches_closed_form);
        for q in [4u32, 7, 8, 9] {
            assert!(koblitz_local_count(&FiniteRing::galois_field(q).unwrap()).unwrap().matches_closed_form);
        }
        let k25 = koblitz_local_count(&FiniteRing::residue(&r, &r.from_ints(&[2, 0, 1])).unwrap()).unwrap();
        assert!(k25.matches_closed_form);
        let dual = FiniteRing::residue(&r, &r.from_ints(&[0, 0, 1])).unwrap();
        assert!(koblitz_local_count(&dual).is_err());
    }

    #[test]
    fn unipotents_generate_sl2() {
        let f5 = FiniteRing::galois_field(5).unwrap();
        let rep = sl2_unipotent_generation(&f5).unwrap();
        assert_eq!(rep.closure_size, 120);
        assert!(rep.holds);
        let rep9 = sl2_unipotent_generation(&FiniteRing::galois_field(9).unwrap()).unwrap();
        assert_eq!(rep9.closure_size, 720);
        assert!(rep9.holds);
        assert!(sl2_unipotent_generation(&FiniteRing::galois_field(11).unwrap()).is_err());
    }

    #[test]
    fn closure_is_a_subgroup() {
        let f = FiniteRing::galois_field(7).unwrap();
        let c = f.closure(&[f.upper(1)]);
        assert_eq!(c.len(), 7);
        assert!(c.elements().contains(&f.identity()));
        for x in c.elements() {
            for y in c.elements() {
                assert!(f.contains(&c, &f.mat_mul(x, y)));
            }
        }
    }

    #[test]
    fn commutators() {
        let r = ring5();
        let rep = commutator_check(&FiniteRing::residue(&r, &r.t()).unwrap()).unwrap();
        assert_eq!(rep.closure_size, 120);
        assert!(rep.holds);
        let rep2 = commutator_check(&FiniteRing::residue(&r, &r.from_ints(&[0, 0, 1])).unwrap()).unwrap();
        assert_eq!(rep2.closure_size, 15000);
        assert!(rep2.holds);
    }

    #[test]
    fn small_commutator_subgroups_differ() {
        // GL₂(F_2) ≅ S₃ has commutator subgroup A₃ of order 3, while SL₂ = GL₂
        let rep = commutator_check(&FiniteRing::galois_field(2).unwrap()).unwrap();
        assert_eq!(rep.closure_size, 3);
        assert_eq!(rep.expected_size, 6);
        assert!(!rep.holds);
    }
}
