//! Dense linear algebra over a base field F_q.
//!
//! Only what the Frobenius and torsion computations need: products, rank,
//! kernels, solving, characteristic polynomials (Hessenberg reduction) and
//! minimal polynomials (Krylov iteration).

use crate::field::{FieldCtx, Fq};
use crate::polyring::{PolyA, PolyRing};

/// Row-major matrix over F_q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FqMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl FqMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FqMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Fq>) -> Self {
        assert_eq!(data.len(), rows * cols);
        FqMatrix { rows, cols, data }
    }

    /// Builds a matrix whose j-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Fq>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, &x) in c.iter().enumerate() {
                m.data[i * cols + j] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fq {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Fq) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> &[Fq] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Fq> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> FqMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul_vec(&self, f: &FieldCtx, v: &[Fq]) -> Vec<Fq> {
        let mut out = vec![0; self.rows];
        self.mul_vec_into(f, v, &mut out);
        out
    }

    #[inline]
    pub fn mul_vec_into(&self, f: &FieldCtx, v: &[Fq], out: &mut [Fq]) {
        debug_assert_eq!(v.len(), self.cols);
        for (i, o) in out.iter_mut().enumerate() {
            *o = f.dot(self.row(i), v);
        }
    }

    pub fn mul(&self, f: &FieldCtx, other: &FqMatrix) -> FqMatrix {
        assert_eq!(self.cols, other.rows);
        let t = other.transpose();
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                out.data[i * other.cols + j] = f.dot(self.row(i), t.row(j));
            }
        }
        out
    }

    pub fn add(&self, f: &FieldCtx, other: &FqMatrix) -> FqMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f.add(a, b))
            .collect();
        FqMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub_identity(&self, f: &FieldCtx) -> FqMatrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let x = m.get(i, i);
            m.set(i, i, f.sub(x, 1));
        }
        m
    }

    pub fn scale(&self, f: &FieldCtx, c: Fq) -> FqMatrix {
        FqMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self, f: &FieldCtx) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            if pr != r {
                for j in 0..self.cols {
                    self.data.swap(pr * self.cols + j, r * self.cols + j);
                }
            }
            let inv = f.inv(self.get(r, c)).unwrap();
            for j in c..self.cols {
                let x = self.get(r, j);
                self.set(r, j, f.mul(x, inv));
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self.get(i, c);
                if factor == 0 {
                    continue;
                }
                for j in c..self.cols {
                    let x = f.sub(self.get(i, j), f.mul(factor, self.get(r, j)));
                    self.set(i, j, x);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self, f: &FieldCtx) -> usize {
        self.clone().rref(f).len()
    }

    /// Basis of the right kernel {x : Mx = 0}.
    pub fn kernel(&self, f: &FieldCtx) -> Vec<Vec<Fq>> {
        let mut m = self.clone();
        let pivots = m.rref(f);
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = vec![0; self.cols];
            v[free] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(m.get(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Some solution of Mx = b, if one exists.
    pub fn solve(&self, f: &FieldCtx, b: &[Fq]) -> Option<Vec<Fq>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j));
            }
            aug.set(i, self.cols, b[i]);
        }
        let pivots = aug.rref(f);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(r, self.cols);
        }
        Some(x)
    }

    pub fn determinant(&self, f: &FieldCtx) -> Fq {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1;
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| m.get(i, c) != 0) else {
                return 0;
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(pr * n + j, c * n + j);
                }
                det = f.neg(det);
            }
            let piv = m.get(c, c);
            det = f.mul(det, piv);
            let inv = f.inv(piv).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), inv);
                if factor == 0 {
                    continue;
                }
                for j in c..n {
                    let x = f.sub(m.get(i, j), f.mul(factor, m.get(c, j)));
                    m.set(i, j, x);
                }
            }
        }
        det
    }

    /// Characteristic polynomial det(X·I − M) via Hessenberg reduction.
    pub fn charpoly(&self, f: &FieldCtx) -> PolyA {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut h = self.clone();
        for j in 0..n.saturating_sub(2) {
            let Some(i) = (j + 1..n).find(|&i| h.get(i, j) != 0) else {
                continue;
            };
            if i != j + 1 {
                for c in 0..n {
                    h.data.swap(i * n + c, (j + 1) * n + c);
                }
                for r in 0..n {
                    h.data.swap(r * n + i, r * n + j + 1);
                }
            }
            let inv = f.inv(h.get(j + 1, j)).unwrap();
            for r in j + 2..n {
                let u = f.mul(h.get(r, j), inv);
                if u == 0 {
                    continue;
                }
                for c in 0..n {
                    let x = f.sub(h.get(r, c), f.mul(u, h.get(j + 1, c)));
                    h.set(r, c, x);
                }
                for rr in 0..n {
                    let x = f.add(h.get(rr, j + 1), f.mul(u, h.get(rr, r)));
                    h.set(rr, j + 1, x);
                }
            }
        }
        // p[m] is the characteristic polynomial of the leading m×m block.
        let mut p: Vec<Vec<Fq>> = Vec::with_capacity(n + 1);
        p.push(vec![1]);
        for m in 0..n {
            let mut next = vec![0; m + 2];
            // X * p_m
            for (k, &c) in p[m].iter().enumerate() {
                next[k + 1] = c;
            }
            // - h_mm p_m
            let hmm = h.get(m, m);
            for (k, &c) in p[m].iter().enumerate() {
                next[k] = f.sub(next[k], f.mul(hmm, c));
            }
            let mut t = 1;
            for i in (0..m).rev() {
                t = f.mul(t, h.get(i + 1, i));
                let coef = f.mul(h.get(i, m), t);
                if coef == 0 {
                    continue;
                }
                for (k, &c) in p[i].iter().enumerate() {
                    next[k] = f.sub(next[k], f.mul(coef, c));
                }
            }
            p.push(next);
        }
        PolyA::from_coeffs(p.pop().unwrap())
    }

    /// Minimal polynomial of the vector `v` under this matrix: the monic
    /// generator of {g : g(M)v = 0}.
    pub fn vector_minpoly(&self, f: &FieldCtx, v: &[Fq]) -> PolyA {
        let n = self.rows;
        // Echelon rows: (reduced vector, pivot, polynomial combination)
        let mut basis: Vec<(Vec<Fq>, usize, Vec<Fq>)> = Vec::with_capacity(n);
        let mut cur = v.to_vec();
        let mut k = 0;
        loop {
            let mut w = cur.clone();
            let mut comb = vec![0; k + 1];
            comb[k] = 1;
            for (bv, piv, bc) in &basis {
                let c = w[*piv];
                if c == 0 {
                    continue;
                }
                let c = f.mul(c, f.inv(bv[*piv]).unwrap());
                for (x, &y) in w.iter_mut().zip(bv) {
                    *x = f.sub(*x, f.mul(c, y));
                }
                for (x, &y) in comb.iter_mut().zip(bc) {
                    *x = f.sub(*x, f.mul(c, y));
                }
            }
            match w.iter().position(|&x| x != 0) {
                None => return PolyA::from_coeffs(comb),
                Some(piv) => basis.push((w, piv, comb)),
            }
            cur = self.mul_vec(f, &cur);
            k += 1;
        }
    }

    /// Minimal polynomial of the matrix, as the lcm of the minimal
    /// polynomials of the standard basis vectors (stopping once the degree
    /// reaches the dimension).
    pub fn minpoly(&self, ring: &PolyRing) -> PolyA {
        let f = ring.field();
        let n = self.rows;
        let mut m = ring.one();
        for i in 0..n {
            if m.degree() == Some(n) {
                break;
            }
            let mut e = vec![0; n];
            e[i] = 1;
            // skip vectors already killed by m(M)
            if self.eval_poly_on_vec(f, &m, &e).iter().all(|&x| x == 0) {
                continue;
            }
            let mi = self.vector_minpoly(f, &e);
            m = ring.lcm(&m, &mi);
        }
        m
    }

    /// g(M)v by Horner's scheme.
    pub fn eval_poly_on_vec(&self, f: &FieldCtx, g: &PolyA, v: &[Fq]) -> Vec<Fq> {
        let mut acc = vec![0; self.rows];
        for &c in g.coeffs().iter().rev() {
            acc = self.mul_vec(f, &acc);
            for (a, &x) in acc.iter_mut().zip(v) {
                *a = f.add(*a, f.mul(c, x));
            }
        }
        acc
    }
}
