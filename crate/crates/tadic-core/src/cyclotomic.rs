//! Exact arithmetic in Z[zeta] for zeta a primitive p^m-th root of unity,
//! together with the valuation attached to pi = zeta - 1.
//!
//! Elements are integer coefficient vectors on the power basis
//! zeta^0..zeta^{e-1}, e = phi(p^m), reduced with the relation
//! sum_{j<p} zeta^{j p^{m-1}} = 0. The valuation normalizes v(pi) = 1,
//! so v(p) = e.

use crate::error::Error;
use crate::galois::TSeries;
use crate::Result;
use num::{BigInt, BigRational, One, Zero};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycField {
    p: u64,
    m: u32,
    /// phi(p^m) = p^{m-1}(p-1), the degree and the ramification index.
    em: usize,
    /// p^m, the order of the root.
    pm: u64,
}

/// Integer coefficients on the basis zeta^0..zeta^{e-1}.
pub type CyclotomicInt = Vec<BigInt>;

/// Rational coefficients on the same basis; used for intermediate series
/// recursions whose results are afterwards certified integral.
pub type CyclotomicRat = Vec<BigRational>;

impl CycField {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        if !crate::ff::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::Precondition {
                what: "cyclotomic level",
                detail: "level must be at least 1".into(),
            });
        }
        let pm = (0..m)
            .try_fold(1u64, |acc, _| acc.checked_mul(p))
            .ok_or(Error::Precondition {
                what: "cyclotomic level",
                detail: format!("{p}^{m} exceeds u64"),
            })?;
        let em = (pm - pm / p) as usize;
        Ok(CycField { p, m, em, pm })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Ramification index e = phi(p^m); also v(p).
    pub fn ramification(&self) -> usize {
        self.em
    }

    pub fn root_order(&self) -> u64 {
        self.pm
    }

    pub fn zero(&self) -> CyclotomicInt {
        vec![BigInt::zero(); self.em]
    }

    pub fn one(&self) -> CyclotomicInt {
        let mut e = self.zero();
        e[0] = BigInt::one();
        e
    }

    pub fn constant(&self, c: i64) -> CyclotomicInt {
        let mut e = self.zero();
        e[0] = BigInt::from(c);
        e
    }

    pub fn is_zero(&self, z: &CyclotomicInt) -> bool {
        z.iter().all(|c| c.is_zero())
    }

    /// Add c * zeta^t into acc, reducing the exponent.
    fn add_monomial(&self, acc: &mut [BigInt], t: u128, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let t = (t % self.pm as u128) as usize;
        if t < self.em {
            acc[t] += c;
        } else {
            // zeta^{(p-1)p^{m-1} + r} = -sum_{i<p-1} zeta^{i p^{m-1} + r}
            let stride = (self.pm / self.p) as usize;
            let r = t - self.em;
            for i in 0..(self.p - 1) as usize {
                acc[i * stride + r] -= c;
            }
        }
    }

    /// zeta^t for any integer t (taken mod p^m).
    pub fn root_power(&self, t: i64) -> CyclotomicInt {
        let pm = self.pm as i64;
        let t = t.rem_euclid(pm) as u128;
        let mut out = self.zero();
        self.add_monomial(&mut out, t, &BigInt::one());
        out
    }

    pub fn add(&self, a: &CyclotomicInt, b: &CyclotomicInt) -> CyclotomicInt {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn sub(&self, a: &CyclotomicInt, b: &CyclotomicInt) -> CyclotomicInt {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    pub fn neg(&self, a: &CyclotomicInt) -> CyclotomicInt {
        a.iter().map(|x| -x).collect()
    }

    pub fn scalar_mul(&self, a: &CyclotomicInt, c: &BigInt) -> CyclotomicInt {
        a.iter().map(|x| x * c).collect()
    }

    pub fn mul(&self, a: &CyclotomicInt, b: &CyclotomicInt) -> CyclotomicInt {
        let mut out = self.zero();
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let c = x * y;
                self.add_monomial(&mut out, (i + j) as u128, &c);
            }
        }
        out
    }

    /// Valuation normalized by v(pi) = 1, v(p) = e; None for zero.
    ///
    /// Rewriting on the pi-basis via zeta = 1 + pi gives c = sum b_j pi^j
    /// with 0 <= j < e; the candidate valuations j + e*v_p(b_j) are
    /// pairwise distinct mod e, so their minimum is the exact valuation.
    pub fn pi_valuation(&self, z: &CyclotomicInt) -> Option<u64> {
        if self.is_zero(z) {
            return None;
        }
        let p = BigInt::from(self.p);
        // b_j = sum_i binom(i, j) a_i, upper triangular with unit diagonal
        let mut best: Option<u64> = None;
        let mut binom: Vec<BigInt> = vec![BigInt::one(); self.em];
        // binom[i] = binom(i, j) for the current j, updated in place
        for j in 0..self.em {
            if j > 0 {
                // binom(i, j) = binom(i, j-1) * (i - j + 1) / j
                for i in 0..self.em {
                    let num = &binom[i] * BigInt::from(i as i64 - j as i64 + 1);
                    binom[i] = num / BigInt::from(j as i64);
                }
            }
            let mut b = BigInt::zero();
            for i in j..self.em {
                if !z[i].is_zero() {
                    b += &binom[i] * &z[i];
                }
            }
            if b.is_zero() {
                continue;
            }
            let mut v = 0u64;
            while (&b % &p).is_zero() {
                b /= &p;
                v += 1;
            }
            let cand = j as u64 + self.em as u64 * v;
            best = Some(match best {
                Some(cur) => cur.min(cand),
                None => cand,
            });
        }
        Some(best.expect("nonzero element has a nonzero pi-basis coefficient"))
    }

    /// Specialize a truncated T-series at T = pi. The result is valid
    /// modulo pi^tag with tag = min(order, e * precision); the tag is
    /// returned alongside.
    pub fn substitute_pi(&self, s: &TSeries) -> (CyclotomicInt, u64) {
        assert_eq!(s.p(), self.p, "series characteristic differs");
        let tag = (s.order() as u64).min(self.em as u64 * s.precision() as u64);
        let pi: CyclotomicInt = {
            let mut z = self.root_power(1);
            z[0] -= BigInt::one();
            z
        };
        let mut acc = self.zero();
        let mut power = self.one();
        for k in 0..s.order() {
            let c = BigInt::from(s.coeff(k));
            acc = self.add(&acc, &self.scalar_mul(&power, &c));
            if k + 1 < s.order() {
                power = self.mul(&power, &pi);
            }
        }
        (acc, tag)
    }

    pub fn rat_zero(&self) -> CyclotomicRat {
        vec![BigRational::zero(); self.em]
    }

    pub fn rat_one(&self) -> CyclotomicRat {
        let mut e = self.rat_zero();
        e[0] = BigRational::one();
        e
    }

    pub fn rat_from_int(&self, z: &CyclotomicInt) -> CyclotomicRat {
        z.iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect()
    }

    pub fn rat_add(&self, a: &CyclotomicRat, b: &CyclotomicRat) -> CyclotomicRat {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn rat_scalar_mul(&self, a: &CyclotomicRat, c: &BigRational) -> CyclotomicRat {
        a.iter().map(|x| x * c).collect()
    }

    pub fn rat_mul(&self, a: &CyclotomicRat, b: &CyclotomicRat) -> CyclotomicRat {
        let mut out: Vec<BigRational> = vec![BigRational::zero(); self.em];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let c = x * y;
                let t = ((i + j) as u128 % self.pm as u128) as usize;
                if t < self.em {
                    out[t] += &c;
                } else {
                    let stride = (self.pm / self.p) as usize;
                    let r = t - self.em;
                    for k in 0..(self.p - 1) as usize {
                        out[k * stride + r] -= &c;
                    }
                }
            }
        }
        out
    }

    pub fn rat_is_zero(&self, a: &CyclotomicRat) -> bool {
        a.iter().all(|c| c.is_zero())
    }

    /// Certify a rational element integral and return integer coefficients.
    pub fn rat_to_int(&self, a: &CyclotomicRat, index: usize) -> Result<CyclotomicInt> {
        let mut out = Vec::with_capacity(self.em);
        for c in a {
            if !c.denom().is_one() {
                return Err(Error::Integrality {
                    index,
                    denominator: c.denom().to_string(),
                });
            }
            out.push(c.numer().clone());
        }
        Ok(out)
    }

    pub fn to_json(&self, z: &CyclotomicInt) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "m": self.m,
            "coeffs": z.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<(CycField, CyclotomicInt)> {
        let bad = |detail: String| Error::Precondition {
            what: "cyclotomic json",
            detail,
        };
        let p = v["p"].as_u64().ok_or_else(|| bad("missing p".into()))?;
        let m = v["m"].as_u64().ok_or_else(|| bad("missing m".into()))? as u32;
        let field = CycField::new(p, m)?;
        let arr = v["coeffs"]
            .as_array()
            .ok_or_else(|| bad("missing coeffs".into()))?;
        if arr.len() != field.em {
            return Err(bad(format!(
                "expected {} coefficients, got {}",
                field.em,
                arr.len()
            )));
        }
        let mut coeffs = Vec::with_capacity(arr.len());
        for c in arr {
            let s = c
                .as_str()
                .ok_or_else(|| bad("coefficients must be strings".into()))?;
            coeffs.push(s.parse::<BigInt>().map_err(|e| bad(e.to_string()))?);
        }
        Ok((field, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn root_powers_reduce() {
        let k = CycField::new(5, 1).unwrap();
        assert_eq!(k.root_power(0), k.one());
        assert_eq!(
            k.root_power(4),
            vec![bi(-1), bi(-1), bi(-1), bi(-1)]
        );
        assert_eq!(k.root_power(5), k.one());
        assert_eq!(k.root_power(-1), k.root_power(4));
        // zeta * zeta^{-1} = 1
        let prod = k.mul(&k.root_power(1), &k.root_power(4));
        assert_eq!(prod, k.one());
    }

    #[test]
    fn root_powers_level_two() {
        let k = CycField::new(3, 2).unwrap();
        assert_eq!(k.ramification(), 6);
        assert_eq!(k.root_order(), 9);
        // zeta^6 = -1 - zeta^3 on the basis zeta^0..zeta^5
        let mut want = k.zero();
        want[0] = bi(-1);
        want[3] = bi(-1);
        assert_eq!(k.root_power(6), want);
        let prod = k.mul(&k.root_power(5), &k.root_power(4));
        assert_eq!(prod, k.root_power(0));
    }

    #[test]
    fn valuation_examples() {
        let k = CycField::new(5, 1).unwrap();
        assert_eq!(k.pi_valuation(&k.constant(5)), Some(4));
        let pi = k.sub(&k.root_power(1), &k.one());
        assert_eq!(k.pi_valuation(&pi), Some(1));
        // zeta + zeta^{-1} - 2 = zeta^{-1} (zeta - 1)^2
        let z = k.add(
            &k.add(&k.root_power(1), &k.root_power(-1)),
            &k.constant(-2),
        );
        assert_eq!(k.pi_valuation(&z), Some(2));
        assert_eq!(k.pi_valuation(&k.zero()), None);
        assert_eq!(k.pi_valuation(&k.one()), Some(0));
    }

    #[test]
    fn valuation_of_p_is_ramification() {
        for (p, m) in [(5u64, 1u32), (7, 1), (3, 2), (2, 3)] {
            let k = CycField::new(p, m).unwrap();
            assert_eq!(
                k.pi_valuation(&k.constant(p as i64)),
                Some(k.ramification() as u64),
                "p={p} m={m}"
            );
        }
    }

    #[test]
    fn unit_product_recovers_p() {
        for (p, m) in [(5u64, 1u32), (7, 1), (3, 2), (2, 3)] {
            let k = CycField::new(p, m).unwrap();
            let mut prod = k.one();
            for j in 1..k.root_order() {
                if j % p == 0 {
                    continue;
                }
                let term = k.sub(&k.root_power(j as i64), &k.one());
                prod = k.mul(&prod, &term);
            }
            let mut expect = k.constant(p as i64);
            if k.ramification() % 2 == 1 {
                expect = k.neg(&expect);
            }
            assert_eq!(prod, expect, "p={p} m={m}");
            assert_eq!(
                k.pi_valuation(&prod),
                Some(k.ramification() as u64)
            );
        }
    }

    #[test]
    fn substitute_pi_basics() {
        let k = CycField::new(5, 1).unwrap();
        let one_plus_t = TSeries::new(5, 1, vec![1, 1, 0]);
        let (z, tag) = k.substitute_pi(&one_plus_t);
        assert_eq!(z, k.root_power(1));
        assert_eq!(tag, 3);
        let zero = TSeries::zero(5, 2, 4);
        let (z, tag) = k.substitute_pi(&zero);
        assert!(k.is_zero(&z));
        assert_eq!(tag, 4);
        let long = TSeries::one(5, 2, 12);
        let (_, tag) = k.substitute_pi(&long);
        assert_eq!(tag, 8);
    }

    #[test]
    fn rational_layer_roundtrip() {
        let k = CycField::new(5, 1).unwrap();
        let a = k.rat_from_int(&k.root_power(3));
        let b = k.rat_from_int(&k.root_power(2));
        let prod = k.rat_mul(&a, &b);
        assert_eq!(k.rat_to_int(&prod, 0).unwrap(), k.root_power(5));
        let half = k.rat_scalar_mul(&k.rat_one(), &BigRational::new(bi(1), bi(2)));
        match k.rat_to_int(&half, 3).unwrap_err() {
            Error::Integrality { index, denominator } => {
                assert_eq!(index, 3);
                assert_eq!(denominator, "2");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn arb_elem(em: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::vec(-6i64..=6, em)
    }

    proptest! {
        #[test]
        fn valuation_is_multiplicative(a in arb_elem(4), b in arb_elem(4)) {
            let k = CycField::new(5, 1).unwrap();
            let x: CyclotomicInt = a.into_iter().map(BigInt::from).collect();
            let y: CyclotomicInt = b.into_iter().map(BigInt::from).collect();
            prop_assume!(!k.is_zero(&x) && !k.is_zero(&y));
            let vx = k.pi_valuation(&x).unwrap();
            let vy = k.pi_valuation(&y).unwrap();
            let vprod = k.pi_valuation(&k.mul(&x, &y)).unwrap();
            prop_assert_eq!(vprod, vx + vy);
        }

        #[test]
        fn valuation_ultrametric(a in arb_elem(6), b in arb_elem(6)) {
            let k = CycField::new(3, 2).unwrap();
            let x: CyclotomicInt = a.into_iter().map(BigInt::from).collect();
            let y: CyclotomicInt = b.into_iter().map(BigInt::from).collect();
            let s = k.add(&x, &y);
            let vx = k.pi_valuation(&x);
            let vy = k.pi_valuation(&y);
            let vs = k.pi_valuation(&s);
            let min = match (vx, vy) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (Some(a), None) => Some(a),
                (None, b) => b,
            };
            match (vs, min) {
                (None, _) => {}
                (Some(vs), Some(min)) => {
                    prop_assert!(vs >= min);
                    if vx != vy {
                        prop_assert_eq!(vs, min);
                    }
                }
                (Some(_), None) => prop_assert!(false, "sum nonzero but both terms zero"),
            }
        }
    }

    #[test]
    fn json_roundtrip() {
        let k = CycField::new(5, 1).unwrap();
        let z = vec![bi(-1), bi(0), bi(7), bi(123456789012345678)];
        let js = k.to_json(&z);
        assert_eq!(js["coeffs"][0], "-1");
        let (k2, z2) = CycField::from_json(&js).unwrap();
        assert_eq!(k2, k);
        assert_eq!(z2, z);
    }
}
