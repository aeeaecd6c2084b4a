//! Per-prime invariants of a reduced rank-2 module from the F_q-linear
//! action of φ_T on F_𝔭.

use std::sync::Arc;

use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{ExtFieldCtx, Fq};
use crate::linalg::FqMatrix;
use crate::polyring::{PolyA, PolyRing};
use crate::skew::{DrinfeldModule, ReducedModule};

/// Matrix of x ↦ φ_T(x) on F_𝔭 in the basis 1, T̄, ..., T̄^{n-1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionMatrix {
    pub prime: PolyA,
    pub matrix: FqMatrix,
}

/// Invariants of one prime of good reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeRecord {
    pub prime: PolyA,
    pub degree: usize,
    pub a_p: PolyA,
    pub eps: Fq,
    /// Monic generator N_𝔭 of the Euler–Poincaré characteristic.
    pub charpoly: PolyA,
    pub d: PolyA,
    pub e: PolyA,
    pub cyclic: bool,
    pub koblitz: bool,
}

pub const CSV_HEADER: &str = "prime,degree,a_p,eps,charpoly,d,e,cyclic,koblitz";

impl PrimeRecord {
    pub fn csv_row(&self, ring: &PolyRing) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            ring.format(&self.prime),
            self.degree,
            ring.format(&self.a_p),
            ring.field().format_elem(self.eps),
            ring.format(&self.charpoly),
            ring.format(&self.d),
            ring.format(&self.e),
            self.cyclic as u8,
            self.koblitz as u8
        )
    }

    pub fn to_json(&self, ring: &PolyRing) -> serde_json::Value {
        json!({
            "prime": ring.format(&self.prime),
            "degree": self.degree,
            "a_p": ring.format(&self.a_p),
            "eps": ring.field().format_elem(self.eps),
            "charpoly": ring.format(&self.charpoly),
            "d": ring.format(&self.d),
            "e": ring.format(&self.e),
            "cyclic": self.cyclic,
            "koblitz": self.koblitz,
        })
    }
}

pub fn action_matrix(red: &ReducedModule) -> ActionMatrix {
    let ctx = red.ctx();
    let n = ctx.degree();
    let f = ctx.field();
    let frob = ctx.frobenius_matrix();
    let coeffs: Vec<Vec<Fq>> = red.phi_t().coeffs().iter().map(|c| c.coeffs().to_vec()).collect();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut x = vec![0; n];
        x[j] = 1;
        let mut col = vec![0; n];
        for (i, c) in coeffs.iter().enumerate() {
            if i > 0 {
                x = frob.mul_vec(f, &x);
            }
            let term = ctx.mul_raw(c, &x);
            for (a, b) in col.iter_mut().zip(term) {
                *a = f.add(*a, b);
            }
        }
        cols.push(col);
    }
    ActionMatrix {
        prime: ctx.modulus().clone(),
        matrix: FqMatrix::from_columns(n, &cols),
    }
}

/// Characteristic polynomial of the action, in the variable T.
pub fn charpoly_generator(m: &ActionMatrix, ring: &PolyRing) -> PolyA {
    m.matrix.charpoly(ring.field())
}

/// (d_𝔭, e_𝔭) with ^φF_𝔭 ≅ A/d × A/de, from the characteristic and minimal
/// polynomials of the action.
pub fn module_structure(m: &ActionMatrix, ring: &PolyRing) -> Result<(PolyA, PolyA)> {
    let chi = charpoly_generator(m, ring);
    structure_from(&m.matrix, &chi, ring)
}

fn structure_from(matrix: &FqMatrix, chi: &PolyA, ring: &PolyRing) -> Result<(PolyA, PolyA)> {
    let mp = matrix.minpoly(ring);
    let d = ring.div_exact(chi, &mp)?;
    let e = ring.div_exact(&mp, &d)?;
    if ring.mul(&ring.mul(&d, &d), &e) != *chi {
        return Err(Error::Inconsistent(format!(
            "{} is not d^2 e for d = {}, e = {}",
            ring.format(chi),
            ring.format(&d),
            ring.format(&e)
        )));
    }
    Ok((d, e))
}

fn check_eps_support(module: &DrinfeldModule) -> Result<()> {
    if module.rank() != 2 || !module.has_standard_delta() {
        return Err(Error::Unsupported(
            "ε is only available for rank-2 modules with Δ = -T^(q-1)".into(),
        ));
    }
    Ok(())
}

/// ε_𝔭 = (−1)^n N_{F_𝔭/F_q}(Δ̄)^{−1} for modules with Δ = −T^{q−1}.
pub fn eps_p(module: &DrinfeldModule, p: &PolyA) -> Result<Fq> {
    check_eps_support(module)?;
    let ring = module.ring();
    if *p == ring.t() {
        return Err(Error::BadReduction(ring.format(p)));
    }
    let ctx = ExtFieldCtx::new(ring, p)?;
    eps_in(module, &ctx)
}

fn eps_in(module: &DrinfeldModule, ctx: &Arc<ExtFieldCtx>) -> Result<Fq> {
    check_eps_support(module)?;
    let f = ctx.field();
    let delta = ctx.from_poly(module.delta().unwrap());
    let norm = delta.norm();
    let inv = f
        .inv(norm)
        .ok_or_else(|| Error::BadReduction(ctx.ring().format(ctx.modulus())))?;
    Ok(if ctx.degree().is_multiple_of(2) { inv } else { f.neg(inv) })
}

/// a_𝔭 = 1 + ε𝔭 − εN_𝔭.
pub fn a_p(module: &DrinfeldModule, p: &PolyA) -> Result<PolyA> {
    Ok(prime_record(module, p)?.a_p)
}

pub fn prime_record(module: &DrinfeldModule, p: &PolyA) -> Result<PrimeRecord> {
    let red = module.reduce_mod(p)?;
    record_for(&red)
}

/// Fast path for scans: the Frobenius matrix of F_𝔭 is already known.
pub fn record_with_frobenius(module: &DrinfeldModule, p: &PolyA, frob: FqMatrix) -> Result<PrimeRecord> {
    let ctx = ExtFieldCtx::from_parts(module.ring(), p, frob);
    let red = module.reduce_in(ctx)?;
    record_for(&red)
}

pub fn record_for(red: &ReducedModule) -> Result<PrimeRecord> {
    let module = red.module();
    let ring = module.ring();
    let p = red.prime().clone();
    let n = p.degree().unwrap();
    let eps = eps_in(module, red.ctx())?;
    let m = action_matrix(red);
    let chi = charpoly_generator(&m, ring);
    let ep = ring.scale(eps, &p);
    let a = ring.sub(&ring.add(&ring.one(), &ep), &ring.scale(eps, &chi));
    if a.degree().is_some_and(|d| 2 * d > n) {
        return Err(Error::Inconsistent(format!(
            "Hasse bound violated at {}: a = {}",
            ring.format(&p),
            ring.format(&a)
        )));
    }
    debug_assert_eq!(
        ring.scale(eps, &chi),
        ring.add(&ring.sub(&ring.one(), &a), &ep)
    );
    let (d, e) = structure_from(&m.matrix, &chi, ring)?;
    let cyclic = d.is_one();
    let koblitz = cyclic && ring.is_irreducible(&chi)?;
    Ok(PrimeRecord {
        prime: p,
        degree: n,
        a_p: a,
        eps,
        charpoly: chi,
        d,
        e,
        cyclic,
        koblitz,
    })
}

/// The coefficient of T^{n/2} in a_𝔭 from the trace/norm formula
/// ±Tr_{F_{q²}/F_q}(N_{F_𝔭/F_{q²}}(−T̄^{q−1})^{−1}), with the sign fixed once
/// against the matrix method on the first prime of degree 2.
#[derive(Clone, Debug)]
pub struct HalfCoeff {
    module: DrinfeldModule,
    sign: Fq,
}

impl HalfCoeff {
    pub fn calibrate(module: &DrinfeldModule) -> Result<Self> {
        let ring = module.ring();
        if *module != DrinfeldModule::standard(ring) {
            return Err(Error::Unsupported("the half-degree formula needs φ_T = T + τ - T^(q-1)τ²".into()));
        }
        if ring.q() % 4 != 1 {
            return Err(Error::Unsupported("the half-degree formula needs q ≡ 1 mod 4".into()));
        }
        let p = ring.irreducibles(2).next().unwrap();
        let a = a_p(module, &p)?;
        let unsigned = Self::unsigned(ring, &p)?;
        let f = ring.field();
        let sign = f.div(a.coeff(1), unsigned).unwrap();
        if sign != 1 && sign != f.neg(1) {
            return Err(Error::Inconsistent(format!(
                "half-degree formula gives {} but a = {} at {}",
                f.format_elem(unsigned),
                ring.format(&a),
                ring.format(&p)
            )));
        }
        Ok(HalfCoeff {
            module: module.clone(),
            sign,
        })
    }

    /// +1 or −1 as an element of F_q.
    pub fn sign(&self) -> Fq {
        self.sign
    }

    /// Tr_{F_{q²}/F_q}(N_{F_𝔭/F_{q²}}(−T̄^{q−1})^{−1}).
    pub fn unsigned(ring: &PolyRing, p: &PolyA) -> Result<Fq> {
        let n = p.degree().ok_or(Error::ConstantPolynomial)?;
        if n % 2 != 0 {
            return Err(Error::OddDegree(n));
        }
        if *p == ring.t() {
            return Err(Error::BadReduction(ring.format(p)));
        }
        let ctx = ExtFieldCtx::new(ring, p)?;
        let x = -&ctx.t_bar().pow(ring.q() as u64 - 1);
        let y = x
            .norm_to_quadratic()?
            .inv()
            .ok_or_else(|| Error::BadReduction(ring.format(p)))?;
        debug_assert!(y.in_quadratic_subfield().unwrap());
        (&y + &y.frob(1))
            .as_base()
            .ok_or_else(|| Error::Inconsistent("trace outside F_q".into()))
    }

    pub fn eval(&self, p: &PolyA) -> Result<Fq> {
        let ring = self.module.ring();
        Ok(ring.field().mul(self.sign, Self::unsigned(ring, p)?))
    }
}
