//! Skew polynomials K{τ} with τc = c^q τ, and Drinfeld modules
//! φ: A → K{τ} determined by φ_T = T + gτ (+ Δτ²).

use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::field::{ExtFieldCtx, ExtFieldElem, FieldCtx, Fq};
use crate::polyring::text::format_coeff;
use crate::polyring::{PolyA, PolyRing};

/// Coefficient domain of a skew polynomial ring: a commutative F_q-algebra
/// with its q-power Frobenius.
pub trait CoeffRing {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// a^q
    fn frob(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of an element of A.
    fn from_a(&self, a: &PolyA) -> Self::Elem;
    /// Representative as a polynomial in T, for display.
    fn as_poly(&self, a: &Self::Elem) -> PolyA;
    fn base_field(&self) -> &FieldCtx;
    fn owns(&self, _a: &Self::Elem) -> bool {
        true
    }
}

impl CoeffRing for PolyRing {
    type Elem = PolyA;

    fn zero(&self) -> PolyA {
        PolyA::zero()
    }
    fn one(&self) -> PolyA {
        PolyA::one()
    }
    fn is_zero(&self, a: &PolyA) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &PolyA, b: &PolyA) -> PolyA {
        PolyRing::add(self, a, b)
    }
    fn sub(&self, a: &PolyA, b: &PolyA) -> PolyA {
        PolyRing::sub(self, a, b)
    }
    fn mul(&self, a: &PolyA, b: &PolyA) -> PolyA {
        PolyRing::mul(self, a, b)
    }
    fn frob(&self, a: &PolyA) -> PolyA {
        self.frobenius_twist(a)
    }
    fn inv(&self, a: &PolyA) -> Option<PolyA> {
        if a.is_constant() && !a.is_zero() {
            self.field().inv(a.leading()).map(PolyA::constant)
        } else {
            None
        }
    }
    fn from_a(&self, a: &PolyA) -> PolyA {
        a.clone()
    }
    fn as_poly(&self, a: &PolyA) -> PolyA {
        a.clone()
    }
    fn base_field(&self) -> &FieldCtx {
        self.field()
    }
}

impl CoeffRing for Arc<ExtFieldCtx> {
    type Elem = ExtFieldElem;

    fn zero(&self) -> ExtFieldElem {
        ExtFieldCtx::zero(self)
    }
    fn one(&self) -> ExtFieldElem {
        ExtFieldCtx::one(self)
    }
    fn is_zero(&self, a: &ExtFieldElem) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &ExtFieldElem, b: &ExtFieldElem) -> ExtFieldElem {
        a + b
    }
    fn sub(&self, a: &ExtFieldElem, b: &ExtFieldElem) -> ExtFieldElem {
        a - b
    }
    fn mul(&self, a: &ExtFieldElem, b: &ExtFieldElem) -> ExtFieldElem {
        a * b
    }
    fn frob(&self, a: &ExtFieldElem) -> ExtFieldElem {
        a.frob(1)
    }
    fn inv(&self, a: &ExtFieldElem) -> Option<ExtFieldElem> {
        a.inv()
    }
    fn from_a(&self, a: &PolyA) -> ExtFieldElem {
        self.from_poly(a)
    }
    fn as_poly(&self, a: &ExtFieldElem) -> PolyA {
        a.to_poly()
    }
    fn base_field(&self) -> &FieldCtx {
        self.field()
    }
    fn owns(&self, a: &ExtFieldElem) -> bool {
        a.ctx().modulus() == self.modulus()
    }
}

/// Σ a_i τ^i, with no trailing zero coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct SkewPoly<E> {
    coeffs: Vec<E>,
}

impl<E> SkewPoly<E> {
    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&E> {
        self.coeffs.get(i)
    }

    /// τ-degree; `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// The ring K{τ} over a coefficient domain K.
#[derive(Clone, Debug)]
pub struct SkewRing<R> {
    base: R,
}

impl<R: CoeffRing> SkewRing<R> {
    pub fn new(base: R) -> Self {
        SkewRing { base }
    }

    pub fn base(&self) -> &R {
        &self.base
    }

    pub fn from_coeffs(&self, coeffs: Vec<R::Elem>) -> Result<SkewPoly<R::Elem>> {
        if !coeffs.iter().all(|c| self.base.owns(c)) {
            return Err(Error::ContextMismatch);
        }
        Ok(self.trimmed(coeffs))
    }

    fn trimmed(&self, mut coeffs: Vec<R::Elem>) -> SkewPoly<R::Elem> {
        while coeffs.last().is_some_and(|c| self.base.is_zero(c)) {
            coeffs.pop();
        }
        SkewPoly { coeffs }
    }

    pub fn zero(&self) -> SkewPoly<R::Elem> {
        SkewPoly { coeffs: Vec::new() }
    }

    pub fn one(&self) -> SkewPoly<R::Elem> {
        self.constant(self.base.one())
    }

    pub fn tau(&self) -> SkewPoly<R::Elem> {
        SkewPoly {
            coeffs: vec![self.base.zero(), self.base.one()],
        }
    }

    pub fn constant(&self, c: R::Elem) -> SkewPoly<R::Elem> {
        self.trimmed(vec![c])
    }

    fn check(&self, f: &SkewPoly<R::Elem>) -> Result<()> {
        if f.coeffs.iter().all(|c| self.base.owns(c)) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, f: &SkewPoly<R::Elem>, g: &SkewPoly<R::Elem>) -> SkewPoly<R::Elem> {
        let n = f.coeffs.len().max(g.coeffs.len());
        let z = self.base.zero();
        let v = (0..n)
            .map(|i| {
                self.base
                    .add(f.coeffs.get(i).unwrap_or(&z), g.coeffs.get(i).unwrap_or(&z))
            })
            .collect();
        self.trimmed(v)
    }

    pub fn sub(&self, f: &SkewPoly<R::Elem>, g: &SkewPoly<R::Elem>) -> SkewPoly<R::Elem> {
        let n = f.coeffs.len().max(g.coeffs.len());
        let z = self.base.zero();
        let v = (0..n)
            .map(|i| {
                self.base
                    .sub(f.coeffs.get(i).unwrap_or(&z), g.coeffs.get(i).unwrap_or(&z))
            })
            .collect();
        self.trimmed(v)
    }

    /// c·f (scalar on the left).
    pub fn scale(&self, c: &R::Elem, f: &SkewPoly<R::Elem>) -> SkewPoly<R::Elem> {
        self.trimmed(f.coeffs.iter().map(|a| self.base.mul(c, a)).collect())
    }

    /// f·g under τc = c^q τ.
    pub fn mul(&self, f: &SkewPoly<R::Elem>, g: &SkewPoly<R::Elem>) -> SkewPoly<R::Elem> {
        if f.is_zero() || g.is_zero() {
            return self.zero();
        }
        let mut out = vec![self.base.zero(); f.coeffs.len() + g.coeffs.len() - 1];
        // twisted[j] = b_j^{q^i} for the current i
        let mut twisted = g.coeffs.clone();
        for (i, a) in f.coeffs.iter().enumerate() {
            if i > 0 {
                for b in twisted.iter_mut() {
                    *b = self.base.frob(b);
                }
            }
            if self.base.is_zero(a) {
                continue;
            }
            for (j, b) in twisted.iter().enumerate() {
                out[i + j] = self.base.add(&out[i + j], &self.base.mul(a, b));
            }
        }
        self.trimmed(out)
    }

    /// f·g, rejecting operands from a different coefficient context.
    pub fn try_mul(
        &self,
        f: &SkewPoly<R::Elem>,
        g: &SkewPoly<R::Elem>,
    ) -> Result<SkewPoly<R::Elem>> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.mul(f, g))
    }

    pub fn pow(&self, f: &SkewPoly<R::Elem>, mut e: u64) -> SkewPoly<R::Elem> {
        let mut acc = self.one();
        let mut base = f.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// c^{q^k}
    fn frob_k(&self, c: &R::Elem, k: usize) -> R::Elem {
        (0..k).fold(c.clone(), |x, _| self.base.frob(&x))
    }

    /// Remainder of right division: f = Q·g + r with deg r < deg g.
    /// Requires the leading coefficient of g to be invertible.
    pub fn right_rem(
        &self,
        f: &SkewPoly<R::Elem>,
        g: &SkewPoly<R::Elem>,
    ) -> Result<SkewPoly<R::Elem>> {
        let d = g.degree().ok_or(Error::DivisionByZero)?;
        let lead = g.coeffs[d].clone();
        let mut r = f.clone();
        while let Some(m) = r.degree().filter(|&m| m >= d) {
            let k = m - d;
            let lk = self.frob_k(&lead, k);
            let c = self
                .base
                .inv(&lk)
                .map(|inv| self.base.mul(&r.coeffs[m], &inv))
                .ok_or_else(|| Error::InvalidArgument("leading coefficient not invertible".into()))?;
            let mut mono = vec![self.base.zero(); k + 1];
            mono[k] = c;
            let sub = self.mul(&SkewPoly { coeffs: mono }, g);
            r = self.sub(&r, &sub);
            debug_assert!(r.degree().is_none_or(|x| x < m));
        }
        Ok(r)
    }

    /// Compact text form with `t` for τ, e.g. `T+t-T^4*t^2`.
    pub fn format(&self, f: &SkewPoly<R::Elem>) -> String {
        let field = self.base.base_field();
        let mut out = String::new();
        for (i, c) in f.coeffs.iter().enumerate() {
            if self.base.is_zero(c) {
                continue;
            }
            let (negative, body) = coefficient_text(field, &self.base.as_poly(c), i > 0);
            let tau = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            let term = match (body.as_str(), tau.is_empty()) {
                (_, true) => body,
                ("1", false) => tau,
                (_, false) => format!("{body}*{tau}"),
            };
            if negative {
                out.push('-');
            } else if !out.is_empty() {
                out.push('+');
            }
            out.push_str(&term);
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Sign and body of a skew coefficient. Monomials over a prime field use the
/// symmetric residue so that −T^4 prints as `-T^4`; sums are parenthesized
/// when followed by a power of τ.
fn coefficient_text(field: &FieldCtx, c: &PolyA, followed: bool) -> (bool, String) {
    let nonzero: Vec<(usize, Fq)> = c
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != 0)
        .map(|(k, &x)| (k, x))
        .collect();
    if let [(k, a)] = nonzero[..] {
        let (negative, mag) = match field.signed_repr(a) {
            Some(r) if r < 0 => (true, field.from_int(-r)),
            _ => (false, a),
        };
        let coef = format_coeff(field, mag);
        let body = match (k, mag) {
            (0, _) => coef,
            (1, 1) => "T".into(),
            (1, _) => format!("{coef}*T"),
            (_, 1) => format!("T^{k}"),
            _ => format!("{coef}*T^{k}"),
        };
        return (negative, body);
    }
    let text = crate::polyring::text::format_poly(field, c, "T");
    if followed {
        (false, format!("({text})"))
    } else {
        (false, text)
    }
}

/// A reduced fraction num/den in F_q(T) with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fraction {
    pub num: PolyA,
    pub den: PolyA,
}

impl Fraction {
    pub fn new(ring: &PolyRing, num: &PolyA, den: &PolyA) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g = ring.gcd(num, den);
        let mut n = ring.div_exact(num, &g)?;
        let mut d = ring.div_exact(den, &g)?;
        let lc_inv = ring.field().inv(d.leading()).unwrap();
        n = ring.scale(lc_inv, &n);
        d = ring.scale(lc_inv, &d);
        Ok(Fraction { num: n, den: d })
    }

    /// λ-adic valuation; `None` for the zero fraction.
    pub fn valuation(&self, ring: &PolyRing, lambda: &PolyA) -> Result<Option<i64>> {
        if self.num.is_zero() {
            return Ok(None);
        }
        let vn = ring.valuation(&self.num, lambda)? as i64;
        let vd = ring.valuation(&self.den, lambda)? as i64;
        Ok(Some(vn - vd))
    }

    pub fn format(&self, ring: &PolyRing) -> String {
        if self.den.is_one() {
            ring.format(&self.num)
        } else {
            format!("({})/({})", ring.format(&self.num), ring.format(&self.den))
        }
    }
}

/// A Drinfeld module over F_q(T) in generic characteristic with
/// A-valued coefficients: φ_T = T + gτ (rank 1) or T + gτ + Δτ² (rank 2).
#[derive(Clone, Debug)]
pub struct DrinfeldModule {
    ring: PolyRing,
    g: PolyA,
    delta: Option<PolyA>,
}

impl PartialEq for DrinfeldModule {
    fn eq(&self, other: &Self) -> bool {
        self.ring.q() == other.ring.q() && self.g == other.g && self.delta == other.delta
    }
}

impl DrinfeldModule {
    /// φ_T = T + τ − T^{q−1}τ².
    pub fn standard(ring: &PolyRing) -> Self {
        let q = ring.q() as usize;
        let delta = ring.monomial(ring.field().neg(1), q - 1);
        DrinfeldModule {
            ring: ring.clone(),
            g: ring.one(),
            delta: Some(delta),
        }
    }

    /// The Carlitz module C_T = T + τ.
    pub fn carlitz(ring: &PolyRing) -> Self {
        DrinfeldModule {
            ring: ring.clone(),
            g: ring.one(),
            delta: None,
        }
    }

    pub fn rank2(ring: &PolyRing, g: PolyA, delta: PolyA) -> Result<Self> {
        if delta.is_zero() {
            return Err(Error::Rank("rank 2 needs a nonzero τ² coefficient".into()));
        }
        Ok(DrinfeldModule {
            ring: ring.clone(),
            g,
            delta: Some(delta),
        })
    }

    pub fn rank1(ring: &PolyRing, g: PolyA) -> Result<Self> {
        if g.is_zero() {
            return Err(Error::Rank("rank 1 needs a nonzero τ coefficient".into()));
        }
        Ok(DrinfeldModule {
            ring: ring.clone(),
            g,
            delta: None,
        })
    }

    pub fn ring(&self) -> &PolyRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        if self.delta.is_some() {
            2
        } else {
            1
        }
    }

    pub fn g(&self) -> &PolyA {
        &self.g
    }

    pub fn delta(&self) -> Option<&PolyA> {
        self.delta.as_ref()
    }

    /// Whether Δ = −T^{q−1} (any g).
    pub fn has_standard_delta(&self) -> bool {
        let q = self.ring.q() as usize;
        self.delta.as_ref()
            == Some(&self.ring.monomial(self.ring.field().neg(1), q - 1))
    }

    pub fn skew(&self) -> SkewRing<PolyRing> {
        SkewRing::new(self.ring.clone())
    }

    fn phi_t_coeffs(&self) -> Vec<PolyA> {
        let mut c = vec![self.ring.t(), self.g.clone()];
        if let Some(d) = &self.delta {
            c.push(d.clone());
        }
        c
    }

    pub fn phi_t(&self) -> SkewPoly<PolyA> {
        self.skew().trimmed(self.phi_t_coeffs())
    }

    /// φ_a by Horner's scheme in T.
    pub fn phi_image(&self, a: &PolyA) -> SkewPoly<PolyA> {
        horner(&self.skew(), &self.phi_t(), a)
    }

    /// j = g^{q+1}/Δ.
    pub fn j_invariant(&self) -> Result<Fraction> {
        let delta = self
            .delta
            .as_ref()
            .ok_or_else(|| Error::Rank("j-invariant needs rank 2".into()))?;
        let num = self.ring.pow(&self.g, self.ring.q() as u64 + 1);
        Fraction::new(&self.ring, &num, delta)
    }

    pub fn reduce_mod(&self, p: &PolyA) -> Result<ReducedModule> {
        let ctx = ExtFieldCtx::new(&self.ring, p)?;
        self.reduce_in(ctx)
    }

    /// Reduction into an already constructed residue field.
    pub fn reduce_in(&self, ctx: Arc<ExtFieldCtx>) -> Result<ReducedModule> {
        let skew = SkewRing::new(ctx.clone());
        let coeffs: Vec<ExtFieldElem> = self
            .phi_t_coeffs()
            .iter()
            .map(|c| ctx.from_poly(c))
            .collect();
        if coeffs.last().unwrap().is_zero() {
            return Err(Error::BadReduction(self.ring.format(ctx.modulus())));
        }
        let phi_t = skew.trimmed(coeffs);
        Ok(ReducedModule {
            module: self.clone(),
            ctx,
            skew,
            powers: Mutex::new(vec![]),
            phi_t,
        })
    }

    /// Compact text form of φ_T, e.g. `T+t-T^4*t^2`.
    pub fn to_text(&self) -> String {
        self.skew().format(&self.phi_t())
    }
}

impl fmt::Display for DrinfeldModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn horner<R: CoeffRing>(skew: &SkewRing<R>, phi_t: &SkewPoly<R::Elem>, a: &PolyA) -> SkewPoly<R::Elem> {
    let mut acc = skew.zero();
    for &c in a.coeffs().iter().rev() {
        acc = skew.mul(&acc, phi_t);
        let cst = skew.constant(skew.base().from_a(&PolyA::constant(c)));
        acc = skew.add(&acc, &cst);
    }
    acc
}

/// The reduction φ ⊗ F_𝔭 of a module at a prime of good reduction.
pub struct ReducedModule {
    module: DrinfeldModule,
    ctx: Arc<ExtFieldCtx>,
    skew: SkewRing<Arc<ExtFieldCtx>>,
    phi_t: SkewPoly<ExtFieldElem>,
    /// φ_T^i for i < len
    powers: Mutex<Vec<SkewPoly<ExtFieldElem>>>,
}

impl ReducedModule {
    pub fn module(&self) -> &DrinfeldModule {
        &self.module
    }

    pub fn ctx(&self) -> &Arc<ExtFieldCtx> {
        &self.ctx
    }

    pub fn prime(&self) -> &PolyA {
        self.ctx.modulus()
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn skew(&self) -> &SkewRing<Arc<ExtFieldCtx>> {
        &self.skew
    }

    pub fn phi_t(&self) -> &SkewPoly<ExtFieldElem> {
        &self.phi_t
    }

    pub fn g_bar(&self) -> ExtFieldElem {
        self.ctx.from_poly(&self.module.g)
    }

    pub fn delta_bar(&self) -> Option<ExtFieldElem> {
        self.module.delta.as_ref().map(|d| self.ctx.from_poly(d))
    }

    /// φ_a = Σ c_i φ_T^i using cached powers of φ_T.
    pub fn phi_image(&self, a: &PolyA) -> SkewPoly<ExtFieldElem> {
        let needed = a.coeffs().len();
        let mut powers = self.powers.lock().unwrap();
        if powers.is_empty() {
            powers.push(self.skew.one());
        }
        while powers.len() < needed {
            let next = self.skew.mul(powers.last().unwrap(), &self.phi_t);
            powers.push(next);
        }
        let mut acc = self.skew.zero();
        for (c, p) in a.coeffs().iter().zip(powers.iter()) {
            if *c != 0 {
                acc = self.skew.add(&acc, &self.skew.scale(&self.ctx.scalar(*c), p));
            }
        }
        acc
    }

    pub fn additive_eval(&self, f: &SkewPoly<ExtFieldElem>, x: &ExtFieldElem) -> Result<ExtFieldElem> {
        additive_eval(&self.ctx, f, x)
    }

    pub fn format(&self, f: &SkewPoly<ExtFieldElem>) -> String {
        self.skew.format(f)
    }
}

/// Σ a_i x^{q^i} for f = Σ a_i τ^i.
pub fn additive_eval(
    ctx: &Arc<ExtFieldCtx>,
    f: &SkewPoly<ExtFieldElem>,
    x: &ExtFieldElem,
) -> Result<ExtFieldElem> {
    if !ctx.owns(x) || !f.coeffs().iter().all(|c| ctx.owns(c)) {
        return Err(Error::ContextMismatch);
    }
    let mut acc = ctx.zero();
    let mut pow = x.clone();
    for (i, a) in f.coeffs().iter().enumerate() {
        if i > 0 {
            pow = pow.frob(1);
        }
        acc = &acc + &(a * &pow);
    }
    Ok(acc)
}
