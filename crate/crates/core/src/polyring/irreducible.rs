use crate::error::{Error, Result};
use crate::field::{FieldCtx, Fq};
use crate::linalg::FqMatrix;

use super::{PolyA, PolyRing};

/// Reusable irreducibility test for monic polynomials of one degree.
///
/// Rabin's test: reject on a root in F_q or a repeated factor, then require
/// x^{q^n} ≡ x (mod f) and gcd(x^{q^{n/ℓ}} − x, f) = 1 for every prime ℓ | n.
/// The powers x^{q^k} are obtained by repeatedly applying the matrix of
/// y ↦ y^q on F_q[x]/(f).
pub struct IrreducibilityTester {
    ring: PolyRing,
    n: usize,
    /// n / ℓ for each prime ℓ dividing n
    checkpoints: Vec<usize>,
    frob: Vec<Fq>,
    xq: Vec<Fq>,
    col: Vec<Fq>,
    v: Vec<Fq>,
    w: Vec<Fq>,
    acc: Vec<u64>,
}

impl IrreducibilityTester {
    pub fn new(ring: &PolyRing, n: usize) -> Self {
        assert!(n >= 1);
        let checkpoints = crate::field::prime_factors(n as u64)
            .into_iter()
            .map(|l| n / l as usize)
            .collect();
        IrreducibilityTester {
            ring: ring.clone(),
            n,
            checkpoints,
            frob: vec![0; n * n],
            xq: vec![0; n],
            col: vec![0; n],
            v: vec![0; n],
            w: vec![0; n],
            acc: vec![0; 2 * n],
        }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// Matrix of y ↦ y^q on F_q[x]/(f) for the last polynomial accepted by
    /// [`test`](Self::test).
    pub fn frobenius_matrix(&self) -> FqMatrix {
        if self.n == 1 {
            return FqMatrix::identity(1);
        }
        FqMatrix::from_rows(self.n, self.n, self.frob.clone())
    }

    /// Tests the monic polynomial with coefficients `f` (length n + 1,
    /// `f[n] == 1`).
    pub fn test(&mut self, f: &[Fq]) -> bool {
        let n = self.n;
        debug_assert_eq!(f.len(), n + 1);
        debug_assert_eq!(f[n], 1);
        if n == 1 {
            return true;
        }
        let field = self.ring.field().clone();
        let fld: &FieldCtx = &field;
        let q = fld.q();
        if q <= 64 {
            for c in 0..q {
                if f.iter().rev().fold(0, |acc, &x| fld.add(fld.mul(acc, c), x)) == 0 {
                    return false;
                }
            }
        }
        let poly = PolyA::from_coeffs(f.to_vec());
        let df = self.ring.derivative(&poly);
        if df.is_zero() || !self.ring.gcd(&poly, &df).is_one() {
            return false;
        }

        // x^q mod f
        self.xq.iter_mut().for_each(|c| *c = 0);
        if (q as usize) < n {
            self.xq[q as usize] = 1;
        } else {
            let xq = self.ring.powmod(&PolyA::t(), q as u64, &poly);
            for (d, &c) in self.xq.iter_mut().zip(xq.coeffs()) {
                *d = c;
            }
        }
        // Frobenius matrix, row-major, column j = x^{jq} mod f
        self.col.iter_mut().for_each(|c| *c = 0);
        self.col[0] = 1;
        for j in 0..n {
            for i in 0..n {
                self.frob[i * n + j] = self.col[i];
            }
            if j + 1 < n {
                let (col, xq) = (self.col.clone(), self.xq.clone());
                self.mulmod_into(fld, &col, &xq, f);
            }
        }
        // iterate x -> x^q
        self.v.iter_mut().for_each(|c| *c = 0);
        self.v[1] = 1;
        for k in 1..=n {
            for i in 0..n {
                self.w[i] = fld.dot(&self.frob[i * n..(i + 1) * n], &self.v);
            }
            std::mem::swap(&mut self.v, &mut self.w);
            if k == n {
                return self.v[1] == 1 && self.v.iter().enumerate().all(|(i, &c)| i == 1 || c == 0);
            }
            if self.checkpoints.contains(&k) {
                let mut diff = self.v.clone();
                diff[1] = fld.sub(diff[1], 1);
                let g = self.ring.gcd(&poly, &PolyA::from_coeffs(diff));
                if !g.is_one() {
                    return false;
                }
            }
        }
        unreachable!()
    }

    /// self.col = a·b mod f, for a, b of degree < n.
    fn mulmod_into(&mut self, fld: &FieldCtx, a: &[Fq], b: &[Fq], f: &[Fq]) {
        let n = self.n;
        if fld.is_prime_field() && fld.p() < (1 << 16) {
            let p = fld.p() as u64;
            self.acc.iter_mut().for_each(|c| *c = 0);
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    self.acc[i + j] += x as u64 * y as u64;
                }
            }
            for k in (n..2 * n - 1).rev() {
                let c = self.acc[k] % p;
                if c == 0 {
                    continue;
                }
                let negc = p - c;
                for i in 0..n {
                    self.acc[k - n + i] += negc * f[i] as u64;
                }
            }
            for i in 0..n {
                self.col[i] = (self.acc[i] % p) as u32;
            }
        } else {
            let mut prod = vec![0; 2 * n - 1];
            for (i, &x) in a.iter().enumerate() {
                for (j, &y) in b.iter().enumerate() {
                    prod[i + j] = fld.add(prod[i + j], fld.mul(x, y));
                }
            }
            for k in (n..2 * n - 1).rev() {
                let c = prod[k];
                if c == 0 {
                    continue;
                }
                for i in 0..n {
                    prod[k - n + i] = fld.sub(prod[k - n + i], fld.mul(c, f[i]));
                }
            }
            self.col.copy_from_slice(&prod[..n]);
        }
    }
}

impl PolyRing {
    /// Irreducibility over F_q; constants are rejected.
    pub fn is_irreducible(&self, f: &PolyA) -> Result<bool> {
        let Some(n) = f.degree().filter(|&d| d >= 1) else {
            return Err(Error::ConstantPolynomial);
        };
        let monic = self.make_monic(f);
        Ok(IrreducibilityTester::new(self, n).test(monic.coeffs()))
    }

    /// All monic irreducibles of degree n in canonical order.
    pub fn irreducibles(&self, n: usize) -> Irreducibles {
        self.irreducibles_in_range(n, 0, self.monic_count(n).expect("q^n fits in u64"))
    }

    /// Monic irreducibles of degree n whose enumeration index lies in
    /// `start..end` (see [`PolyRing::monic_from_index`]).
    pub fn irreducibles_in_range(&self, n: usize, start: u64, end: u64) -> Irreducibles {
        assert!(n >= 1);
        let mut current = self.monic_from_index(n, start).into_coeffs();
        current.resize(n + 1, 0);
        current[n] = 1;
        Irreducibles {
            tester: IrreducibilityTester::new(self, n),
            q: self.q(),
            current,
            index: start,
            end,
        }
    }
}

/// Iterator over monic irreducibles of a fixed degree (see
/// [`PolyRing::irreducibles`]).
pub struct Irreducibles {
    tester: IrreducibilityTester,
    q: u32,
    current: Vec<Fq>,
    index: u64,
    end: u64,
}

impl Irreducibles {
    fn advance(&mut self) {
        self.index += 1;
        let n = self.tester.degree();
        for c in self.current[..n].iter_mut() {
            *c += 1;
            if *c < self.q {
                return;
            }
            *c = 0;
        }
    }

    /// Like `next`, also returning the matrix of x ↦ x^q on F_q[T]/(𝔭).
    pub fn next_with_frobenius(&mut self) -> Option<(PolyA, FqMatrix)> {
        while self.index < self.end {
            let hit = self.tester.test(&self.current);
            let out = hit.then(|| {
                (
                    PolyA::from_coeffs(self.current.clone()),
                    self.tester.frobenius_matrix(),
                )
            });
            self.advance();
            if out.is_some() {
                return out;
            }
        }
        None
    }
}

impl Iterator for Irreducibles {
    type Item = PolyA;

    fn next(&mut self) -> Option<PolyA> {
        while self.index < self.end {
            let hit = self.tester.test(&self.current);
            let out = hit.then(|| PolyA::from_coeffs(self.current.clone()));
            self.advance();
            if let Some(p) = out {
                return Some(p);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;

    fn ring(q: u32) -> PolyRing {
        PolyRing::new(FieldCtx::from_order(q).unwrap())
    }

    #[test]
    fn irreducibility_examples() {
        let r = ring(5);
        assert!(r.is_irreducible(&r.from_ints(&[2, 0, 1])).unwrap());
        assert!(!r.is_irreducible(&r.from_ints(&[-1, 0, 1])).unwrap());
        for c in 0..5 {
            assert!(r.is_irreducible(&r.t_minus(c)).unwrap());
        }
        assert!(matches!(r.is_irreducible(&r.one()), Err(Error::ConstantPolynomial)));
        // non-monic input is normalized first
        assert!(r.is_irreducible(&r.from_ints(&[4, 0, 2])).unwrap());
    }

    #[test]
    fn degree_one_enumeration_order() {
        let r = ring(5);
        let v: Vec<PolyA> = r.irreducibles(1).collect();
        assert_eq!(v.len(), 5);
        assert_eq!(v[0], r.t());
        assert_eq!(v[4], r.t_minus(1));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumeration_counts_match_pi_up_to_eight() {
        let r = ring(5);
        for n in 1..=8 {
            let count = r.irreducibles(n).count() as u128;
            assert_eq!(count, r.pi_count(n).unwrap(), "n = {n}");
        }
        for q in [7u32, 9, 25] {
            let r = ring(q);
            for n in 1..=4 {
                assert_eq!(r.irreducibles(n).count() as u128, r.pi_count(n).unwrap(), "q={q} n={n}");
            }
        }
    }

    #[test]
    fn reducible_polynomials_have_small_factors() {
        // Oracle: trial division by every monic irreducible of degree ≤ n/2.
        let r = ring(5);
        for n in 2..=6usize {
            let small: Vec<PolyA> = (1..=n / 2).flat_map(|d| r.irreducibles(d)).collect();
            let total = r.monic_count(n).unwrap();
            let step = (total / 400).max(1);
            let mut idx = 0;
            while idx < total {
                let f = r.monic_from_index(n, idx);
                let has_factor = small.iter().any(|g| r.divides(g, &f));
                assert_eq!(r.is_irreducible(&f).unwrap(), !has_factor, "{f:?}");
                idx += step;
            }
        }
    }

    #[test]
    fn range_partition_is_exhaustive() {
        let r = ring(5);
        let all: Vec<PolyA> = r.irreducibles(4).collect();
        let total = r.monic_count(4).unwrap();
        let mut parts = Vec::new();
        let mut start = 0;
        while start < total {
            let end = (start + 37).min(total);
            parts.extend(r.irreducibles_in_range(4, start, end));
            start = end;
        }
        assert_eq!(all, parts);
    }
}
