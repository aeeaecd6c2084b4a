//! Torsion of a reduced module as an independent source of a_𝔭.
//!
//! φ[a] is computed as the kernel of x ↦ φ_a(x) on an explicit extension
//! F_𝔭[y]/(h) of F_𝔭, the q^n-power map is written in an A/λ-basis of φ[λ],
//! and traces for several λ are glued by CRT.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{ExtFieldCtx, FieldCtx, Fq};
use crate::linalg::FqMatrix;
use crate::polyring::{PolyA, PolyRing};
use crate::skew::{DrinfeldModule, ReducedModule};

pub const DEFAULT_TOWER_BOUND: usize = 240;

type Raw = Vec<Fq>;

/// The algebra F_𝔭[y]/(h) for a monic h of degree k over F_𝔭, as an
/// F_q-vector space of dimension nk (block i holds the coefficient of y^i).
pub struct Tower {
    base: Arc<ExtFieldCtx>,
    k: usize,
    /// coefficients h_0..h_{k-1} (h is monic)
    h: Vec<Raw>,
    /// matrix of x ↦ x^q
    frob: FqMatrix,
}

impl Tower {
    fn build(base: &Arc<ExtFieldCtx>, h: Vec<Raw>, defer_frobenius: bool) -> Self {
        let k = h.len();
        let n = base.degree();
        let mut t = Tower {
            base: base.clone(),
            k,
            h,
            frob: FqMatrix::zeros(0, 0),
        };
        if defer_frobenius {
            return t;
        }
        // y^{qi} for i < k
        let mut ys = Vec::with_capacity(k);
        let mut cur = t.one();
        if k > 1 {
            let mut y = vec![0; n * k];
            y[n] = 1;
            let yq = t.pow(&y, base.ring().q() as u64);
            for _ in 0..k {
                ys.push(cur.clone());
                cur = t.mul(&cur, &yq);
            }
        } else {
            ys.push(cur);
        }
        let frob_base = base.frobenius_matrix();
        let mut cols = Vec::with_capacity(n * k);
        for yi in &ys {
            for a in 0..n {
                let c = frob_base.column(a);
                cols.push(t.scale(&c, yi));
            }
        }
        t.frob = FqMatrix::from_columns(n * k, &cols);
        t
    }

    pub fn degree_over_base(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.base.degree() * self.k
    }

    pub fn base(&self) -> &Arc<ExtFieldCtx> {
        &self.base
    }

    pub fn frobenius_matrix(&self) -> &FqMatrix {
        &self.frob
    }

    fn field(&self) -> &FieldCtx {
        self.base.field()
    }

    fn block<'a>(&self, x: &'a [Fq], i: usize) -> &'a [Fq] {
        let n = self.base.degree();
        &x[i * n..(i + 1) * n]
    }

    pub fn one(&self) -> Raw {
        let mut v = vec![0; self.dim()];
        v[0] = 1;
        v
    }

    /// The image of an element of F_𝔭.
    pub fn embed(&self, c: &[Fq]) -> Raw {
        let mut v = vec![0; self.dim()];
        v[..c.len()].copy_from_slice(c);
        v
    }

    pub fn add(&self, x: &[Fq], y: &[Fq]) -> Raw {
        let f = self.field();
        x.iter().zip(y).map(|(&a, &b)| f.add(a, b)).collect()
    }

    /// c·x for c ∈ F_𝔭.
    pub fn scale(&self, c: &[Fq], x: &[Fq]) -> Raw {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.k {
            out.extend(self.base.mul_raw(c, self.block(x, i)));
        }
        out
    }

    pub fn mul(&self, x: &[Fq], y: &[Fq]) -> Raw {
        let (n, k) = (self.base.degree(), self.k);
        let f = self.field();
        let (wn, wk) = (2 * n - 1, 2 * k - 1);
        // product in F_q[T, y], slot d·wn + j holds T^j y^d
        let mut prod: Vec<Fq> = if f.is_prime_field() && f.p() < (1 << 16) {
            let p = f.p() as u64;
            let mut acc = vec![0u64; wn * wk];
            for (ix, &a) in x.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let (di, ti) = (ix / n, ix % n);
                for (iy, &b) in y.iter().enumerate() {
                    acc[(di + iy / n) * wn + ti + iy % n] += a as u64 * b as u64;
                }
                if ix % 64 == 63 {
                    acc.iter_mut().for_each(|v| *v %= p);
                }
            }
            acc.into_iter().map(|v| (v % p) as Fq).collect()
        } else {
            let mut acc = vec![0; wn * wk];
            for (ix, &a) in x.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                let (di, ti) = (ix / n, ix % n);
                for (iy, &b) in y.iter().enumerate() {
                    let s = (di + iy / n) * wn + ti + iy % n;
                    acc[s] = f.add(acc[s], f.mul(a, b));
                }
            }
            acc
        };
        let m = self.base.modulus().coeffs();
        for d in 0..wk {
            let slot = &mut prod[d * wn..(d + 1) * wn];
            for j in (n..wn).rev() {
                let c = slot[j];
                if c == 0 {
                    continue;
                }
                for i in 0..n {
                    slot[j - n + i] = f.sub(slot[j - n + i], f.mul(c, m[i]));
                }
            }
        }
        let mut out: Vec<Raw> = (0..wk).map(|d| prod[d * wn..d * wn + n].to_vec()).collect();
        for d in (k..wk).rev() {
            let c = std::mem::take(&mut out[d]);
            if is_zero_raw(&c) {
                continue;
            }
            for (i, hi) in self.h.iter().enumerate() {
                if is_zero_raw(hi) {
                    continue;
                }
                let t = self.base.mul_raw(&c, hi);
                out[d - k + i] = self.base.sub_raw(&out[d - k + i], &t);
            }
        }
        out.truncate(k);
        out.concat()
    }

    pub fn pow(&self, x: &[Fq], mut e: u64) -> Raw {
        let mut acc = self.one();
        let mut b = x.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        acc
    }

    pub fn frob(&self, x: &[Fq]) -> Raw {
        self.frob.mul_vec(self.field(), x)
    }

    /// Ben-Or's test for h over F_𝔭: gcd(h, y^{Q^j} − y) = 1 for
    /// j ≤ k/2, with Q = |F_𝔭|.
    fn is_field(&self) -> bool {
        let (n, k) = (self.base.degree(), self.k);
        if k == 1 {
            return true;
        }
        let qn = (self.base.ring().q() as u64).pow(n as u32);
        let mut y = vec![0; n * k];
        y[n] = 1;
        let mut hpoly: Vec<Raw> = self.h.clone();
        hpoly.push(self.base.reduce(&PolyA::one()));
        let mut v = y.clone();
        for _ in 1..=k / 2 {
            v = self.pow(&v, qn);
            let diff: Vec<Raw> = (0..k)
                .map(|i| self.base.sub_raw(self.block(&v, i), self.block(&y, i)))
                .collect();
            if poly_gcd_degree(&self.base, hpoly.clone(), diff) > 0 {
                return false;
            }
        }
        true
    }
}

fn is_zero_raw(x: &[Fq]) -> bool {
    x.iter().all(|&c| c == 0)
}

fn trim(p: &mut Vec<Raw>) {
    while p.last().is_some_and(|c| is_zero_raw(c)) {
        p.pop();
    }
}

/// Degree of gcd(a, b) over F_𝔭 (coefficients low degree first).
fn poly_gcd_degree(ctx: &ExtFieldCtx, mut a: Vec<Raw>, mut b: Vec<Raw>) -> usize {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        // a mod b
        let lb_inv = ctx.inv_raw(b.last().unwrap()).unwrap();
        while a.len() >= b.len() {
            let c = ctx.mul_raw(a.last().unwrap(), &lb_inv);
            let shift = a.len() - b.len();
            for (i, bi) in b.iter().enumerate() {
                let t = ctx.mul_raw(&c, bi);
                a[shift + i] = ctx.sub_raw(&a[shift + i], &t);
            }
            trim(&mut a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// An F_q-basis of ker φ_a inside a tower.
pub struct Kernel {
    pub tower: Arc<Tower>,
    pub basis: Vec<Raw>,
}

/// An A/λ-basis (v, w) of φ[λ] (w absent in rank 1), with the actions of
/// φ_T and of the q^n-power map in kernel coordinates.
pub struct TorsionBasis {
    pub lambda: PolyA,
    pub prime: PolyA,
    pub kernel: Kernel,
    /// basis P^i v, P^i w (i < deg λ) in kernel coordinates
    pub module_basis: FqMatrix,
    pub phi_t: FqMatrix,
    pub frobenius: FqMatrix,
}

impl TorsionBasis {
    /// Tower degree over F_𝔭.
    pub fn k(&self) -> usize {
        self.kernel.tower.degree_over_base()
    }
}

/// The 2×2 matrix of Frobenius on φ[λ] over A/λ, with entries reduced
/// mod λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobModLambda {
    pub lambda: PolyA,
    pub matrix: [[PolyA; 2]; 2],
    pub trace: PolyA,
    pub det: PolyA,
    pub tower_degree: usize,
}

/// Torsion computations for one module, caching towers per (𝔭, k).
pub struct TorsionOracle {
    module: DrinfeldModule,
    bound: usize,
    towers: Mutex<HashMap<(PolyA, usize), Arc<Tower>>>,
}

impl TorsionOracle {
    pub fn new(module: &DrinfeldModule) -> Self {
        Self::with_bound(module, DEFAULT_TOWER_BOUND)
    }

    pub fn with_bound(module: &DrinfeldModule, bound: usize) -> Self {
        TorsionOracle {
            module: module.clone(),
            bound,
            towers: Mutex::new(HashMap::new()),
        }
    }

    pub fn module(&self) -> &DrinfeldModule {
        &self.module
    }

    fn ring(&self) -> &PolyRing {
        self.module.ring()
    }

    /// Smallest k with τ^{nk} ≡ 1 modulo φ_a on the right, i.e. with
    /// ker φ_a ⊆ F_{q^{nk}}.
    fn splitting_degree(&self, red: &ReducedModule, a: &PolyA) -> Result<usize> {
        let ctx = red.ctx();
        let n = ctx.degree();
        let phi_a = red.phi_image(a);
        let coeffs: Vec<Raw> = phi_a.coeffs().iter().map(|c| c.coeffs().to_vec()).collect();
        let d = coeffs.len() - 1;
        let lead_inv = ctx.inv_raw(&coeffs[d]).unwrap();
        let zero = vec![0; n];
        let mut one = zero.clone();
        one[0] = 1;
        let mut r: Vec<Raw> = vec![zero.clone(); d];
        r[0] = one.clone();
        for m in 1..=n * self.bound {
            // r ← τ·r mod φ_a (right division)
            let top = ctx.frob_raw(&r[d - 1]);
            for i in (1..d).rev() {
                r[i] = ctx.frob_raw(&r[i - 1]);
            }
            r[0] = zero.clone();
            if !is_zero_raw(&top) {
                let u = ctx.mul_raw(&top, &lead_inv);
                for i in 0..d {
                    let t = ctx.mul_raw(&u, &coeffs[i]);
                    r[i] = ctx.sub_raw(&r[i], &t);
                }
            }
            if m % n == 0 && r[0] == one && r[1..].iter().all(|c| is_zero_raw(c)) {
                return Ok(m / n);
            }
        }
        Err(Error::TowerBound { bound: self.bound })
    }

    /// The tower F_𝔭[y]/(h) for a monic irreducible h of degree k over
    /// F_𝔭, drawn from a seeded generator.
    pub fn tower(&self, base: &Arc<ExtFieldCtx>, k: usize) -> Arc<Tower> {
        let key = (base.modulus().clone(), k);
        if let Some(t) = self.towers.lock().unwrap().get(&key) {
            return t.clone();
        }
        let n = base.degree();
        let q = base.ring().q();
        let tower = if k == 1 {
            Tower::build(base, vec![vec![0; n]], false)
        } else {
            // random monic candidates from a fixed seed, so the choice is reproducible
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            loop {
                let h: Vec<Raw> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(0..q)).collect()).collect();
                if is_zero_raw(&h[0]) {
                    continue;
                }
                if Tower::build(base, h.clone(), true).is_field() {
                    break Tower::build(base, h, false);
                }
            }
        };
        let tower = Arc::new(tower);
        self.towers.lock().unwrap().insert(key, tower.clone());
        tower
    }

    fn reduce(&self, p: &PolyA) -> Result<ReducedModule> {
        self.module.reduce_mod(p)
    }

    fn check_coprime(&self, p: &PolyA, a: &PolyA) -> Result<()> {
        let ring = self.ring();
        if a.is_constant() {
            return Err(Error::ConstantPolynomial);
        }
        if !ring.gcd(a, p).is_one() {
            return Err(Error::SharedFactor {
                a: ring.format(a),
                p: ring.format(p),
            });
        }
        Ok(())
    }

    /// An F_q-basis of ker φ_a in the smallest tower containing it.
    pub fn kernel_of(&self, p: &PolyA, a: &PolyA) -> Result<Kernel> {
        self.check_coprime(p, a)?;
        let red = self.reduce(p)?;
        self.kernel_in(&red, a)
    }

    fn kernel_in(&self, red: &ReducedModule, a: &PolyA) -> Result<Kernel> {
        let k = self.splitting_degree(red, a)?;
        let tower = self.tower(red.ctx(), k);
        let phi_a = red.phi_image(a);
        let map = apply_matrix(&tower, &phi_a_raw(&phi_a));
        let basis = map.kernel(tower.field());
        let expected = red.rank() * a.degree().unwrap();
        if basis.len() != expected {
            return Err(Error::Inconsistent(format!(
                "kernel of dimension {} in degree-{k} tower, expected {expected}",
                basis.len()
            )));
        }
        Ok(Kernel { tower, basis })
    }

    /// φ[λ] with an A/λ-basis and the actions of φ_T and Frobenius.
    pub fn torsion_basis(&self, p: &PolyA, lambda: &PolyA) -> Result<TorsionBasis> {
        let ring = self.ring();
        if !ring.is_irreducible(lambda)? || !lambda.is_monic() {
            return Err(Error::NotIrreducible(ring.format(lambda)));
        }
        self.check_coprime(p, lambda)?;
        let red = self.reduce(p)?;
        let kernel = self.kernel_in(&red, lambda)?;
        let tower = &kernel.tower;
        let f = tower.field();
        let n = red.ctx().degree();
        let l = lambda.degree().unwrap();
        let r = red.rank();
        let dim = kernel.basis.len();
        let kmat = FqMatrix::from_columns(tower.dim(), &kernel.basis);
        let coords = |x: &[Fq]| -> Result<Raw> {
            kmat.solve(f, x)
                .ok_or_else(|| Error::Inconsistent("image leaves the torsion subgroup".into()))
        };

        let phi_t = apply_matrix(tower, &phi_a_raw(red.phi_t()));
        let mut pt_cols = Vec::with_capacity(dim);
        let mut fr_cols = Vec::with_capacity(dim);
        for x in &kernel.basis {
            pt_cols.push(coords(&phi_t.mul_vec(f, x))?);
            let mut y = x.clone();
            for _ in 0..n {
                y = tower.frob(&y);
            }
            fr_cols.push(coords(&y)?);
        }
        let pt = FqMatrix::from_columns(dim, &pt_cols);
        let fr = FqMatrix::from_columns(dim, &fr_cols);

        // A/λ-basis: v = first basis vector, then the first one outside its span
        let krylov = |v: &Raw| -> Vec<Raw> {
            let mut out = vec![v.clone()];
            for _ in 1..l {
                let next = pt.mul_vec(f, out.last().unwrap());
                out.push(next);
            }
            out
        };
        let mut cols: Vec<Raw> = Vec::with_capacity(dim);
        for j in 0..dim {
            if cols.len() == dim {
                break;
            }
            let mut e = vec![0; dim];
            e[j] = 1;
            let mut trial = cols.clone();
            trial.extend(krylov(&e));
            if FqMatrix::from_columns(dim, &trial).rank(f) == trial.len() {
                cols = trial;
            }
        }
        if cols.len() != dim || dim != r * l {
            return Err(Error::Inconsistent(format!(
                "φ[λ] is not free of rank {r} over A/λ"
            )));
        }
        Ok(TorsionBasis {
            lambda: lambda.clone(),
            prime: p.clone(),
            module_basis: FqMatrix::from_columns(dim, &cols),
            phi_t: pt,
            frobenius: fr,
            kernel,
        })
    }

    /// Frobenius on φ[λ] as a matrix over A/λ.
    pub fn frob_matrix_mod_lambda(&self, p: &PolyA, lambda: &PolyA) -> Result<FrobModLambda> {
        if self.module.rank() != 2 {
            return Err(Error::Rank("the 2×2 Frobenius matrix needs rank 2".into()));
        }
        let ring = self.ring();
        let tb = self.torsion_basis(p, lambda)?;
        let entries = action_over_a_lambda(ring, &tb)?;
        let [[a, b], [c, d]] = entries.clone();
        let trace = ring.rem(&ring.add(&a, &d), lambda)?;
        let det = ring.rem(&ring.sub(&ring.mul(&a, &d), &ring.mul(&b, &c)), lambda)?;
        Ok(FrobModLambda {
            lambda: lambda.clone(),
            matrix: entries,
            trace,
            det,
            tower_degree: tb.k(),
        })
    }

    /// Default CRT moduli: monic irreducibles in canonical order, degree 1
    /// first, skipping 𝔭, until their degrees sum past n/2.
    pub fn default_moduli(&self, p: &PolyA) -> Vec<PolyA> {
        let ring = self.ring();
        let n = p.degree().unwrap_or(0);
        let mut out = Vec::new();
        let mut total = 0;
        let mut deg = 1;
        while 2 * total <= n {
            for l in ring.irreducibles(deg) {
                if 2 * total > n {
                    break;
                }
                if l != *p {
                    total += deg;
                    out.push(l);
                }
            }
            deg += 1;
        }
        out
    }

    /// The unique a of degree ≤ n/2 congruent to the Frobenius trace modulo
    /// every λ in `moduli`.
    pub fn reconstruct_a(&self, p: &PolyA, moduli: &[PolyA]) -> Result<PolyA> {
        let ring = self.ring();
        let n = p.degree().ok_or(Error::ConstantPolynomial)?;
        let total: usize = moduli.iter().map(|l| l.degree().unwrap_or(0)).sum();
        if 2 * total <= n {
            return Err(Error::InsufficientModuli { total, needed_half: n });
        }
        for (i, l) in moduli.iter().enumerate() {
            if l == p || moduli[..i].contains(l) {
                return Err(Error::InvalidArgument(format!(
                    "modulus {} repeated or equal to the prime",
                    ring.format(l)
                )));
            }
        }
        let mut pairs = Vec::with_capacity(moduli.len());
        for l in moduli {
            let fm = self.frob_matrix_mod_lambda(p, l)?;
            pairs.push((fm.trace, l.clone()));
        }
        let a = ring.crt(&pairs)?;
        if a.degree().is_some_and(|d| 2 * d > n) {
            return Err(Error::Inconsistent(format!(
                "CRT gives {} of degree above {n}/2 at {}",
                ring.format(&a),
                ring.format(p)
            )));
        }
        Ok(a)
    }

    pub fn reconstruct_a_default(&self, p: &PolyA) -> Result<PolyA> {
        let moduli = self.default_moduli(p);
        self.reconstruct_a(p, &moduli)
    }
}

/// Coefficients of φ_a as raw F_𝔭 vectors.
fn phi_a_raw(f: &crate::skew::SkewPoly<crate::field::ExtFieldElem>) -> Vec<Raw> {
    f.coeffs().iter().map(|c| c.coeffs().to_vec()).collect()
}

/// Matrix of x ↦ Σ c_i x^{q^i} on the tower.
fn apply_matrix(tower: &Tower, coeffs: &[Raw]) -> FqMatrix {
    let dim = tower.dim();
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut x = vec![0; dim];
        x[j] = 1;
        let mut acc = vec![0; dim];
        for (i, c) in coeffs.iter().enumerate() {
            if i > 0 {
                x = tower.frob(&x);
            }
            if is_zero_raw(c) {
                continue;
            }
            acc = tower.add(&acc, &tower.scale(c, &x));
        }
        cols.push(acc);
    }
    FqMatrix::from_columns(dim, &cols)
}

/// Entries [[α, β], [γ, δ]] with Fv = αv + γw and Fw = βv + δw.
fn action_over_a_lambda(ring: &PolyRing, tb: &TorsionBasis) -> Result<[[PolyA; 2]; 2]> {
    let f = ring.field();
    let l = tb.lambda.degree().unwrap();
    let image = |col: usize| -> Result<(PolyA, PolyA)> {
        let v = tb.module_basis.column(col);
        let fv = tb.frobenius.mul_vec(f, &v);
        let c = tb
            .module_basis
            .solve(f, &fv)
            .ok_or_else(|| Error::Inconsistent("Frobenius leaves φ[λ]".into()))?;
        Ok((PolyA::from_coeffs(c[..l].to_vec()), PolyA::from_coeffs(c[l..].to_vec())))
    };
    let (alpha, gamma) = image(0)?;
    let (beta, delta) = image(l)?;
    Ok([[alpha, beta], [gamma, delta]])
}

/// The scalar by which the q^n-power map acts on C[λ] for the Carlitz
/// module, as a residue mod λ.
pub fn carlitz_scalar(ring: &PolyRing, p: &PolyA, lambda: &PolyA) -> Result<PolyA> {
    if p == lambda {
        return Err(Error::SharedFactor {
            a: ring.format(lambda),
            p: ring.format(p),
        });
    }
    let oracle = TorsionOracle::new(&DrinfeldModule::carlitz(ring));
    let tb = oracle.torsion_basis(p, lambda)?;
    let f = ring.field();
    let l = lambda.degree().unwrap();
    let v = tb.module_basis.column(0);
    let fv = tb.frobenius.mul_vec(f, &v);
    let c = tb
        .module_basis
        .solve(f, &fv)
        .ok_or_else(|| Error::Inconsistent("Frobenius leaves C[λ]".into()))?;
    Ok(PolyA::from_coeffs(c[..l].to_vec()))
}
