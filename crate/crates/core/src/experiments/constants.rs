use num_bigint::BigUint;
use num_traits::One;
use serde_json::{json, Value};

use crate::polyring::pi_count;

pub const DEFAULT_TRUNCATION: usize = 20;

/// Fractional bits of the fixed-point arithmetic.
const FRAC: usize = 320;
const DIGITS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstantKind {
    /// ∏ (1 − 1/(Q(Q−1)²(Q+1)))^{π_A(d)}, Q = q^d
    Cyclic,
    /// ∏ (1 − (Q²−Q−1)/((Q−1)³(Q+1)))^{π_A(d)}, Q = q^d
    Koblitz,
}

impl ConstantKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::Cyclic => "c_phi",
            ConstantKind::Koblitz => "C_phi",
        }
    }

    /// u_d as numerator and denominator.
    fn term(self, big_q: &BigUint) -> (BigUint, BigUint) {
        let one = BigUint::one();
        let qm = big_q - &one;
        let qp = big_q + &one;
        match self {
            ConstantKind::Cyclic => (one, big_q * &qm * &qm * qp),
            ConstantKind::Koblitz => (big_q * big_q - big_q - one, &qm * &qm * &qm * qp),
        }
    }

    /// u_d ≤ K·Q^{−e} for Q ≥ Q0 = q^{D+1}: returns (K, e).
    fn term_bound(self, q0: f64) -> (f64, i32) {
        let x = 1.0 / q0;
        match self {
            ConstantKind::Cyclic => (1.0 / ((1.0 - x).powi(2) * (1.0 + x)), 4),
            ConstantKind::Koblitz => (1.0 / ((1.0 - x).powi(3) * (1.0 + x)), 2),
        }
    }
}

/// A partial product through degree D, rounded down, and a bound on the
/// relative error of truncation: the full product lies in
/// [value·(1 − tail), value].
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantApprox {
    pub kind: ConstantKind,
    pub q: u32,
    pub truncation: usize,
    /// value·2^320, rounded down
    fixed: BigUint,
    /// log10 of the tail bound
    pub tail_log10: f64,
}

impl ConstantApprox {
    /// Decimal expansion truncated to `digits` places.
    pub fn decimal(&self, digits: usize) -> String {
        let scaled: BigUint = (&self.fixed * BigUint::from(10u32).pow(digits as u32)) >> FRAC;
        let s = scaled.to_str_radix(10);
        let s = format!("{s:0>width$}", width = digits + 1);
        let (int, frac) = s.split_at(s.len() - digits);
        format!("{int}.{frac}")
    }

    pub fn value_string(&self) -> String {
        self.decimal(DIGITS)
    }

    pub fn to_f64(&self) -> f64 {
        self.decimal(20).parse().unwrap()
    }

    pub fn tail_bound(&self) -> f64 {
        10f64.powf(self.tail_log10)
    }

    pub fn tail_string(&self) -> String {
        let e = self.tail_log10.floor();
        let m = 10f64.powf(self.tail_log10 - e);
        format!("{m:.3}e{e}")
    }

    pub fn to_json(&self) -> Value {
        json!({
            "constant": self.kind.name(),
            "q": self.q,
            "D": self.truncation,
            "value": self.value_string(),
            "tail_bound": self.tail_string(),
        })
    }
}

fn fixed_mul(a: &BigUint, b: &BigUint) -> BigUint {
    (a * b) >> FRAC
}

fn fixed_pow(base: &BigUint, mut e: u128) -> BigUint {
    let mut acc = BigUint::one() << FRAC;
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = fixed_mul(&acc, &b);
        }
        e >>= 1;
        if e > 0 {
            b = fixed_mul(&b, &b);
        }
    }
    acc
}

fn approximate(kind: ConstantKind, q: u32, truncation: usize) -> ConstantApprox {
    assert!(q >= 2);
    let mut value = BigUint::one() << FRAC;
    for d in 1..=truncation {
        let big_q = BigUint::from(q).pow(d as u32);
        let (num, den) = kind.term(&big_q);
        let factor = ((&den - &num) << FRAC) / &den;
        let pi = pi_count(q as u128, d).expect("degree is positive");
        value = fixed_mul(&value, &fixed_pow(&factor, pi));
    }
    // Σ_{d>D} π(d)·2u_d with π(d) ≤ q^d/d and u_d ≤ K q^{−ed}:
    // ≤ 2K/(D+1) · q^{−(e−1)(D+1)} / (1 − q^{−(e−1)})
    let qf = q as f64;
    let d1 = (truncation + 1) as f64;
    let (k, e) = kind.term_bound(qf.powf(d1));
    let r = (e - 1) as f64;
    let tail_log10 = (2.0 * k / d1).log10() - r * d1 * qf.log10() - (1.0 - qf.powf(-r)).log10();
    ConstantApprox {
        kind,
        q,
        truncation,
        fixed: value,
        // margin for floating-point rounding
        tail_log10: tail_log10 + 1e-9,
    }
}

/// Partial product for the density of cyclic reductions.
pub fn const_cyclic(q: u32, truncation: usize) -> ConstantApprox {
    approximate(ConstantKind::Cyclic, q, truncation)
}

/// Partial product for the density of prime-order reductions (before the
/// 1/n² scaling).
pub fn const_koblitz(q: u32, truncation: usize) -> ConstantApprox {
    approximate(ConstantKind::Koblitz, q, truncation)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent evaluation in f64 via sums of logarithms.
    fn log_product(kind: ConstantKind, q: u32, truncation: usize) -> f64 {
        let mut s = 0.0;
        for d in 1..=truncation {
            let big_q = (q as f64).powi(d as i32);
            let u = match kind {
                ConstantKind::Cyclic => 1.0 / (big_q * (big_q - 1.0).powi(2) * (big_q + 1.0)),
                ConstantKind::Koblitz => (big_q * big_q - big_q - 1.0) / ((big_q - 1.0).powi(3) * (big_q + 1.0)),
            };
            s += pi_count(q as u128, d).unwrap() as f64 * (-u).ln_1p();
        }
        s.exp()
    }

    #[test]
    fn published_digits() {
        let c = const_cyclic(5, 20);
        assert!(c.value_string().starts_with("0.989600049329883"), "{}", c.value_string());
        assert!(c.tail_bound() < 1e-15);
        let k = const_koblitz(5, 20);
        assert!(k.value_string().starts_with("0.76075227630"), "{}", k.value_string());
        assert!(k.tail_bound() < 1e-15);
        assert_eq!(c.value_string().len(), 32);
    }

    #[test]
    fn first_factor() {
        // 1 − 19/384 at q = 5
        let k = const_koblitz(5, 1);
        let exact: f64 = 1.0 - 19.0 / 384.0;
        assert!((k.to_f64() - exact.powi(5)).abs() < 1e-15);
        assert_eq!(ConstantKind::Koblitz.term(&BigUint::from(5u32)), (BigUint::from(19u32), BigUint::from(384u32)));
    }

    #[test]
    fn empty_product() {
        let c = const_cyclic(5, 0);
        assert_eq!(c.value_string(), format!("1.{}", "0".repeat(30)));
        let full = const_cyclic(5, 30).to_f64();
        assert!(1.0 - full <= c.tail_bound());
    }

    #[test]
    fn agrees_with_floating_point() {
        for q in [3u32, 5, 7, 9] {
            for kind in [ConstantKind::Cyclic, ConstantKind::Koblitz] {
                let a = approximate(kind, q, 12);
                assert!((a.to_f64() - log_product(kind, q, 12)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decreasing_and_nested() {
        for kind in [ConstantKind::Cyclic, ConstantKind::Koblitz] {
            let mut prev: Option<ConstantApprox> = None;
            for d in 1..25 {
                let a = approximate(kind, 5, d);
                if let Some(p) = &prev {
                    assert!(a.fixed <= p.fixed);
                    // [v(1−t), v] for D contains the one for D+1
                    let lo_prev = p.to_f64() * (1.0 - p.tail_bound());
                    let lo = a.to_f64() * (1.0 - a.tail_bound());
                    assert!(lo >= lo_prev - 1e-16);
                    assert!(a.tail_bound() < p.tail_bound());
                }
                prev = Some(a);
            }
        }
    }

    #[test]
    fn json_report() {
        let v = const_cyclic(5, 20).to_json();
        assert_eq!(v["constant"], "c_phi");
        assert_eq!(v["D"], 20);
        assert!(v["value"].as_str().unwrap().starts_with("0.9896000493"));
    }
}
