//! Unramified p-adic arithmetic truncated mod p^N.
//!
//! [`GaloisRing`] realizes the Witt vectors of F_{p^n} mod p^N as
//! (Z/p^N)[x]/(g) where g is the Hensel lift of the finite-field modulus
//! whose root is its own Teichmuller element. That choice makes the
//! Frobenius a cheap coefficient-wise re-evaluation at the p-th power of
//! the root and keeps traces exact.
//!
//! The module also hosts the truncated power series utilities the rest of
//! the crate needs: Artin-Hasse coefficients, the series inverting
//! E(t) = 1 + T, and the binomial character (1+T)^z.

use crate::error::Error;
use crate::ff::{FieldDesc, FieldElem};
use crate::Result;
use num::{BigInt, BigRational, Integer, One, Signed, Zero};

/// Coefficient vector of length n over Z/p^N in the power basis.
pub type GRElem = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisRing {
    p: u64,
    precision: u32,
    n: u32,
    /// p^precision; all coefficients are reduced below this.
    pn: u64,
    /// Monic degree-n modulus over Z/p^N whose root is Teichmuller.
    modulus: Vec<u64>,
    residue: FieldDesc,
    /// Images sigma(xi^i) of the basis under Frobenius.
    frob_basis: Vec<GRElem>,
    /// Traces of the basis elements, scalars in Z/p^N.
    trace_basis: Vec<u64>,
}

impl GaloisRing {
    /// The Galois ring GR(p^precision, n) with Teichmuller-compatible
    /// modulus, Hensel-lifted from the finite-field modulus for (p, n).
    pub fn new(p: u64, precision: u32, n: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::Precondition {
                what: "ring precision",
                detail: "precision exponent must be at least 1".into(),
            });
        }
        let residue = FieldDesc::new(p, n)?;
        let pn = (0..precision)
            .try_fold(1u64, |acc, _| acc.checked_mul(p))
            .ok_or(Error::Precondition {
                what: "ring modulus",
                detail: format!("{p}^{precision} exceeds u64"),
            })?;

        // provisional ring with the naively lifted modulus, good enough to
        // locate the Teichmuller root
        let naive: Vec<u64> = residue.modulus().to_vec();
        let nn = n as usize;
        let q = (0..n).fold(1u128, |acc, _| acc * p as u128);
        let mut root: Vec<u64> = vec![0; nn];
        if nn >= 2 {
            root[1] = 1;
        }
        for _ in 0..precision {
            root = raw_pow(&root, q, &naive, pn);
        }
        assert_eq!(
            raw_pow(&root, q, &naive, pn),
            root,
            "Teichmuller iteration did not stabilize"
        );

        // modulus with Teichmuller root: product of (x - conjugate)
        let mut g: Vec<Vec<u64>> = vec![vec![1; 1]];
        g[0] = {
            let mut one = vec![0u64; nn];
            one[0] = 1;
            one
        };
        let mut conj = root.clone();
        for _ in 0..n {
            let neg: Vec<u64> = conj.iter().map(|&c| (pn - c) % pn).collect();
            let mut next: Vec<Vec<u64>> = vec![vec![0u64; nn]; g.len() + 1];
            for (i, c) in g.iter().enumerate() {
                // times x
                next[i + 1] = raw_add(&next[i + 1], c, pn);
                // times -conjugate
                let t = raw_mul(c, &neg, &naive, pn);
                next[i] = raw_add(&next[i], &t, pn);
            }
            g = next;
            conj = raw_pow(&conj, p as u128, &naive, pn);
        }
        let mut modulus = Vec::with_capacity(nn + 1);
        for (i, c) in g.iter().enumerate() {
            assert!(
                c[1..].iter().all(|&x| x == 0),
                "conjugate product has a non-scalar coefficient at degree {i}"
            );
            modulus.push(c[0]);
        }
        assert_eq!(modulus.len(), nn + 1);
        assert_eq!(modulus[nn], 1, "conjugate product is not monic");
        let reduced: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        assert_eq!(
            reduced,
            residue.modulus(),
            "lifted modulus does not reduce to the field modulus"
        );

        let mut ring = GaloisRing {
            p,
            precision,
            n,
            pn,
            modulus,
            residue,
            frob_basis: Vec::new(),
            trace_basis: Vec::new(),
        };

        // Frobenius table: sigma(xi^i) = (xi^p)^i
        let xi_p = raw_pow(&ring.gen(), p as u128, &ring.modulus, pn);
        let mut cur = ring.one();
        for _ in 0..n {
            ring.frob_basis.push(cur.clone());
            cur = raw_mul(&cur, &xi_p, &ring.modulus, pn);
        }
        debug_assert_eq!(
            raw_pow(&ring.gen(), q, &ring.modulus, pn),
            ring.gen(),
            "root of the lifted modulus is not Teichmuller"
        );

        for i in 0..nn {
            let mut basis = ring.zero();
            basis[i] = 1;
            let mut acc = ring.zero();
            let mut it = basis.clone();
            for _ in 0..n {
                acc = ring.add(&acc, &it);
                it = ring.frobenius(&it);
            }
            assert!(
                acc[1..].iter().all(|&x| x == 0),
                "trace of basis element escaped the scalars"
            );
            ring.trace_basis.push(acc[0]);
        }
        Ok(ring)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    /// p^precision, the scalar modulus.
    pub fn scalar_modulus(&self) -> u64 {
        self.pn
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn residue_field(&self) -> &FieldDesc {
        &self.residue
    }

    pub fn zero(&self) -> GRElem {
        vec![0; self.n as usize]
    }

    pub fn one(&self) -> GRElem {
        let mut e = self.zero();
        e[0] = 1;
        e
    }

    pub fn gen(&self) -> GRElem {
        let mut e = self.zero();
        if self.n >= 2 {
            e[1] = 1;
        }
        e
    }

    pub fn constant(&self, c: u64) -> GRElem {
        let mut e = self.zero();
        e[0] = c % self.pn;
        e
    }

    pub fn is_zero(&self, z: &GRElem) -> bool {
        z.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &GRElem, b: &GRElem) -> GRElem {
        raw_add(a, b, self.pn)
    }

    pub fn sub(&self, a: &GRElem, b: &GRElem) -> GRElem {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.pn - y) % self.pn)
            .collect()
    }

    pub fn neg(&self, a: &GRElem) -> GRElem {
        a.iter().map(|&x| (self.pn - x) % self.pn).collect()
    }

    pub fn mul(&self, a: &GRElem, b: &GRElem) -> GRElem {
        raw_mul(a, b, &self.modulus, self.pn)
    }

    pub fn scalar_mul(&self, a: &GRElem, c: u64) -> GRElem {
        let c = c % self.pn;
        a.iter()
            .map(|&x| (x as u128 * c as u128 % self.pn as u128) as u64)
            .collect()
    }

    pub fn pow(&self, a: &GRElem, e: u128) -> GRElem {
        raw_pow(a, e, &self.modulus, self.pn)
    }

    /// Reduction mod p into the residue field.
    pub fn reduce(&self, z: &GRElem) -> FieldElem {
        z.iter().map(|&c| c % self.p).collect()
    }

    /// Naive lift (same coefficients); not Teichmuller.
    pub fn lift(&self, xbar: &FieldElem) -> GRElem {
        xbar.to_vec()
    }

    /// The unique multiplicative lift: congruent to xbar mod p and fixed
    /// by the q-power map.
    pub fn teichmuller(&self, xbar: &FieldElem) -> GRElem {
        assert_eq!(xbar.len(), self.n as usize, "element from a different field");
        if self.precision == 1 {
            return self.lift(xbar);
        }
        let q = (0..self.n).fold(1u128, |acc, _| acc * self.p as u128);
        let mut y = self.lift(xbar);
        for _ in 0..self.precision {
            y = self.pow(&y, q);
        }
        debug_assert_eq!(self.pow(&y, q), y);
        debug_assert_eq!(&self.reduce(&y), xbar);
        y
    }

    /// Frobenius: the unique automorphism reducing to x -> x^p.
    pub fn frobenius(&self, z: &GRElem) -> GRElem {
        let mut acc = self.zero();
        for (c, img) in z.iter().zip(&self.frob_basis) {
            acc = self.add(&acc, &self.scalar_mul(img, *c));
        }
        acc
    }

    /// Frobenius applied j times (j may exceed n; the order is n).
    pub fn frobenius_pow(&self, z: &GRElem, j: u32) -> GRElem {
        let mut out = z.clone();
        for _ in 0..(j % self.n) {
            out = self.frobenius(&out);
        }
        out
    }

    /// Inverse Frobenius.
    pub fn frobenius_inv(&self, z: &GRElem) -> GRElem {
        self.frobenius_pow(z, self.n - 1)
    }

    /// Absolute trace down to Z/p^N.
    pub fn trace(&self, z: &GRElem) -> u64 {
        let mut acc: u128 = 0;
        for (c, t) in z.iter().zip(&self.trace_basis) {
            acc = (acc + *c as u128 * *t as u128) % self.pn as u128;
        }
        acc as u64
    }
}

fn raw_add(a: &[u64], b: &[u64], pn: u64) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| (x + y) % pn).collect()
}

fn raw_mul(a: &[u64], b: &[u64], modulus: &[u64], pn: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u128; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u128 * y as u128) % pn as u128;
        }
    }
    for i in (n..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..n {
            if modulus[j] == 0 {
                continue;
            }
            let sub = c * modulus[j] as u128 % pn as u128;
            prod[i - n + j] = (prod[i - n + j] + pn as u128 - sub) % pn as u128;
        }
    }
    prod.truncate(n.max(1));
    prod.iter().map(|&c| c as u64).collect()
}

fn raw_pow(a: &[u64], mut e: u128, modulus: &[u64], pn: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut acc = vec![0u64; n.max(1)];
    acc[0] = 1;
    let mut b = raw_mul(a, &acc, modulus, pn);
    while e > 0 {
        if e & 1 == 1 {
            acc = raw_mul(&acc, &b, modulus, pn);
        }
        b = raw_mul(&b, &b, modulus, pn);
        e >>= 1;
    }
    acc
}

pub(crate) fn vp_u64(mut x: u64, p: u64) -> u32 {
    assert!(x != 0, "valuation of zero");
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

pub(crate) fn pow_u64(p: u64, e: u32) -> u64 {
    (0..e).fold(1u64, |acc, _| acc.checked_mul(p).expect("modulus overflow"))
}

/// Inverse of a unit modulo p^N.
pub(crate) fn inv_mod_prime_power(x: u64, pn: u64) -> u64 {
    let a = BigInt::from(x);
    let m = BigInt::from(pn);
    let ext = a.extended_gcd(&m);
    assert!(ext.gcd.is_one(), "not a unit mod {pn}: {x}");
    let mut inv = ext.x % &m;
    if inv.is_negative() {
        inv += &m;
    }
    u64::try_from(inv).expect("reduced inverse fits u64")
}

/// Truncated power series over Z/p^N.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TSeries {
    p: u64,
    precision: u32,
    pn: u64,
    /// Coefficients of T^0..T^{len-1}; truncation order is the length.
    coeffs: Vec<u64>,
}

impl TSeries {
    pub fn new(p: u64, precision: u32, coeffs: Vec<u64>) -> Self {
        let pn = pow_u64(p, precision);
        let coeffs = coeffs.into_iter().map(|c| c % pn).collect();
        TSeries {
            p,
            precision,
            pn,
            coeffs,
        }
    }

    pub fn zero(p: u64, precision: u32, order: usize) -> Self {
        TSeries::new(p, precision, vec![0; order])
    }

    pub fn one(p: u64, precision: u32, order: usize) -> Self {
        let mut coeffs = vec![0; order];
        if order > 0 {
            coeffs[0] = 1;
        }
        TSeries::new(p, precision, coeffs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs[i]
    }

    fn check_compatible(&self, other: &TSeries) {
        assert_eq!(self.p, other.p, "mixed characteristics");
        assert_eq!(self.precision, other.precision, "mixed precisions");
        assert_eq!(self.order(), other.order(), "mixed truncation orders");
    }

    pub fn add(&self, other: &TSeries) -> TSeries {
        self.check_compatible(other);
        TSeries::new(
            self.p,
            self.precision,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + b) % self.pn)
                .collect(),
        )
    }

    pub fn sub(&self, other: &TSeries) -> TSeries {
        self.check_compatible(other);
        TSeries::new(
            self.p,
            self.precision,
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| (a + self.pn - b) % self.pn)
                .collect(),
        )
    }

    pub fn mul(&self, other: &TSeries) -> TSeries {
        self.check_compatible(other);
        let m = self.order();
        let mut out = vec![0u128; m];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if i + j >= m {
                    break;
                }
                out[i + j] = (out[i + j] + a as u128 * b as u128) % self.pn as u128;
            }
        }
        TSeries::new(
            self.p,
            self.precision,
            out.into_iter().map(|c| c as u64).collect(),
        )
    }

    pub fn scalar_mul(&self, c: u64) -> TSeries {
        let c = c % self.pn;
        TSeries::new(
            self.p,
            self.precision,
            self.coeffs
                .iter()
                .map(|&a| (a as u128 * c as u128 % self.pn as u128) as u64)
                .collect(),
        )
    }

    pub fn truncate(&self, order: usize) -> TSeries {
        assert!(order <= self.order(), "cannot extend a truncated series");
        TSeries::new(self.p, self.precision, self.coeffs[..order].to_vec())
    }

    /// Drop scalar precision to a smaller exponent.
    pub fn reduce_precision(&self, precision: u32) -> TSeries {
        assert!(precision <= self.precision);
        TSeries::new(self.p, precision, self.coeffs.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "N": self.precision,
            "M": self.order(),
            "coeffs": self.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<TSeries> {
        let bad = |detail: String| Error::Precondition {
            what: "series json",
            detail,
        };
        let p = v["p"].as_u64().ok_or_else(|| bad("missing p".into()))?;
        let precision = v["N"].as_u64().ok_or_else(|| bad("missing N".into()))? as u32;
        let m = v["M"].as_u64().ok_or_else(|| bad("missing M".into()))? as usize;
        let arr = v["coeffs"]
            .as_array()
            .ok_or_else(|| bad("missing coeffs".into()))?;
        if arr.len() != m {
            return Err(bad(format!("expected {m} coefficients, got {}", arr.len())));
        }
        let mut coeffs = Vec::with_capacity(m);
        for c in arr {
            let s = c.as_str().ok_or_else(|| bad("coefficients must be strings".into()))?;
            coeffs.push(s.parse::<u64>().map_err(|e| bad(e.to_string()))?);
        }
        Ok(TSeries::new(p, precision, coeffs))
    }
}

/// Truncated power series with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSeries {
    coeffs: Vec<BigRational>,
}

impl RationalSeries {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        RationalSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &BigRational {
        &self.coeffs[i]
    }

    pub fn mul_trunc(&self, other: &RationalSeries, order: usize) -> RationalSeries {
        let mut out = vec![BigRational::zero(); order];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= order || a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= order {
                    break;
                }
                out[i + j] += a * b;
            }
        }
        RationalSeries::new(out)
    }

    /// Substitute another series (with zero constant term) for the variable.
    pub fn compose(&self, inner: &RationalSeries, order: usize) -> RationalSeries {
        assert!(
            inner.coeffs.first().map_or(true, |c| c.is_zero()),
            "inner series must have zero constant term"
        );
        let mut acc = RationalSeries::new(vec![BigRational::zero(); order]);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_trunc(inner, order);
            if order > 0 {
                acc.coeffs[0] += c;
            }
        }
        acc
    }

    /// Reduce each coefficient mod p^precision; every denominator must be
    /// a p-adic unit.
    pub fn reduce_mod(&self, p: u64, precision: u32) -> Result<TSeries> {
        let pn = pow_u64(p, precision);
        let pn_big = BigInt::from(pn);
        let mut out = Vec::with_capacity(self.coeffs.len());
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.denom().mod_floor(&BigInt::from(p)).is_zero() {
                return Err(Error::Integrality {
                    index: i,
                    denominator: c.denom().to_string(),
                });
            }
            let num = c.numer().mod_floor(&pn_big);
            let den = c.denom().mod_floor(&pn_big);
            let den_u: u64 = u64::try_from(den).expect("reduced denominator fits u64");
            let num_u: u64 = u64::try_from(num).expect("reduced numerator fits u64");
            let inv = inv_mod_prime_power(den_u, pn);
            out.push((num_u as u128 * inv as u128 % pn as u128) as u64);
        }
        Ok(TSeries::new(p, precision, out))
    }
}

/// Coefficients of the Artin-Hasse exponential exp(sum t^{p^i}/p^i) up to
/// t^{order-1}, as exact rationals. All are p-integral.
pub fn artin_hasse(p: u64, order: usize) -> RationalSeries {
    // E' = E * (sum_i t^{p^i - 1}) gives n*lambda_n = sum_{p^i <= n} lambda_{n-p^i}
    let mut lambda = vec![BigRational::zero(); order.max(1)];
    lambda[0] = BigRational::one();
    for n in 1..order {
        let mut s = BigRational::zero();
        let mut pe = 1u64;
        while (pe as usize) <= n {
            s += &lambda[n - pe as usize];
            match pe.checked_mul(p) {
                Some(next) => pe = next,
                None => break,
            }
        }
        lambda[n] = s / BigRational::from_integer(BigInt::from(n));
    }
    for (i, l) in lambda.iter().enumerate() {
        assert!(
            !l.denom().mod_floor(&BigInt::from(p)).is_zero(),
            "Artin-Hasse coefficient {i} is not p-integral"
        );
    }
    RationalSeries::new(lambda)
}

/// The series pi(T) with E(pi(T)) = 1 + T, as exact rationals, up to
/// T^{order-1}. Below degree p it agrees with log(1+T).
pub fn pi_series(p: u64, order: usize) -> RationalSeries {
    let lambda = artin_hasse(p, order);
    // fixed point of pi <- T - sum_{j >= 2} lambda_j pi^j; each pass pins
    // at least one more coefficient
    let mut t_coeffs = vec![BigRational::zero(); order];
    if order > 1 {
        t_coeffs[1] = BigRational::one();
    }
    let t = RationalSeries::new(t_coeffs);
    let mut pi = t.clone();
    for _ in 0..order {
        // tail(pi) = E(pi) - 1 - pi restricted to the lambda_j, j >= 2 part
        let mut tail = RationalSeries::new(vec![BigRational::zero(); order]);
        let mut power = pi.mul_trunc(&pi, order);
        for j in 2..order {
            if !lambda.coeff(j).is_zero() {
                for (k, c) in power.coeffs.iter().enumerate() {
                    if !c.is_zero() {
                        tail.coeffs[k] += lambda.coeff(j) * c;
                    }
                }
            }
            power = power.mul_trunc(&pi, order);
        }
        let mut next = t.clone();
        for k in 0..order {
            next.coeffs[k] -= &tail.coeffs[k];
        }
        if next == pi {
            break;
        }
        pi = next;
    }
    pi
}

/// pi(T) reduced mod (p^precision, T^order).
pub fn pi_tseries(p: u64, order: usize, precision: u32) -> Result<TSeries> {
    pi_series(p, order).reduce_mod(p, precision)
}

/// The p-adic valuation of k!.
pub fn factorial_valuation(mut k: u64, p: u64) -> u64 {
    let mut v = 0;
    while k > 0 {
        k /= p;
        v += k;
    }
    v
}

/// The binomial character (1+T)^z mod (p^precision, T^order) for a scalar
/// z known mod p^z_precision.
///
/// z only determines the result when z_precision covers the output
/// precision plus the carries lost to the factorials: binom(z + p^a, k)
/// differs from binom(z, k) by a multiple of p^{a - v_p(k!)}.
pub fn binomial_character(
    z: u64,
    z_precision: u32,
    p: u64,
    order: usize,
    precision: u32,
) -> Result<TSeries> {
    let reserve = if order == 0 {
        0
    } else {
        factorial_valuation(order as u64 - 1, p)
    };
    let needed = precision as u64 + reserve;
    if (z_precision as u64) < needed {
        return Err(Error::InsufficientPrecision {
            what: "binomial character exponent",
            needed,
            have: z_precision as u64,
        });
    }
    let z_mod = pow_u64(p, z_precision);
    let z = BigInt::from(z % z_mod);
    let pn = BigInt::from(pow_u64(p, precision));
    let mut coeffs = Vec::with_capacity(order);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for k in 0..order as u64 {
        if k > 0 {
            num *= &z - BigInt::from(k - 1);
            den *= BigInt::from(k);
        }
        let (quot, rem) = num.div_rem(&den);
        assert!(rem.is_zero(), "binomial coefficient is not an integer");
        let mut r = quot.mod_floor(&pn);
        if r.is_negative() {
            r += &pn;
        }
        coeffs.push(u64::try_from(r).expect("reduced coefficient fits u64"));
    }
    Ok(TSeries::new(p, precision, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ring_over_z25() {
        let r = GaloisRing::new(5, 2, 1).unwrap();
        assert_eq!(r.scalar_modulus(), 25);
        assert_eq!(r.modulus(), &[0, 1]);
        let f5 = r.residue_field().clone();
        assert_eq!(r.teichmuller(&f5.constant(2)), vec![7]);
        let teich: Vec<u64> = (1..5).map(|c| r.teichmuller(&f5.constant(c))[0]).collect();
        assert_eq!(teich, vec![1, 7, 18, 24]);
        // multiplicativity over all pairs
        for a in 0..5u64 {
            for b in 0..5 {
                let lhs = r.mul(
                    &r.teichmuller(&f5.constant(a)),
                    &r.teichmuller(&f5.constant(b)),
                );
                let rhs = r.teichmuller(&f5.constant(a * b % 5));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn hensel_lift_degree_two() {
        let r = GaloisRing::new(3, 2, 2).unwrap();
        let xi = r.gen();
        assert_eq!(r.pow(&xi, 9), xi);
        let reduced: Vec<u64> = r.modulus().iter().map(|c| c % 3).collect();
        assert_eq!(reduced, r.residue_field().modulus());
        // Frobenius has order two and fixes scalars
        for c in 0..9u64 {
            assert_eq!(r.frobenius(&r.constant(c)), r.constant(c));
        }
        let z = vec![4u64, 7];
        assert_eq!(r.frobenius(&r.frobenius(&z)), z);
    }

    #[test]
    fn teichmuller_frobenius_equivariance() {
        let r = GaloisRing::new(3, 3, 2).unwrap();
        let f9 = r.residue_field().clone();
        for xbar in f9.elements() {
            let lhs = r.frobenius(&r.teichmuller(&xbar));
            let rhs = r.teichmuller(&f9.frobenius(&xbar));
            assert_eq!(lhs, rhs);
            // Teichmuller really is a multiplicative section
            let t = r.teichmuller(&xbar);
            assert_eq!(r.reduce(&t), xbar);
        }
    }

    #[test]
    fn traces_match_field_traces() {
        let r = GaloisRing::new(3, 2, 2).unwrap();
        assert_eq!(r.trace(&r.one()), 2);
        let f = r.residue_field().clone();
        for c0 in 0..9u64 {
            for c1 in 0..9 {
                let z = vec![c0, c1];
                let t = r.trace(&z);
                assert_eq!(t % 3, f.trace_to_prime(&r.reduce(&z)));
            }
        }
    }

    #[test]
    fn artin_hasse_low_terms_are_inverse_factorials() {
        for p in [5u64, 7] {
            let e = artin_hasse(p, p as usize);
            let mut fact = BigRational::one();
            for i in 0..p as usize {
                if i > 0 {
                    fact *= rat(i as i64, 1);
                }
                assert_eq!(e.coeff(i), &(BigRational::one() / &fact), "p={p} i={i}");
            }
        }
    }

    #[test]
    fn artin_hasse_known_values() {
        let e = artin_hasse(5, 8);
        assert_eq!(e.coeff(0), &rat(1, 1));
        assert_eq!(e.coeff(5), &rat(5, 24));
        // p-integrality over a longer stretch and several primes
        for p in [2u64, 3, 5, 7, 13] {
            let e = artin_hasse(p, 60);
            for (i, c) in e.coeffs().iter().enumerate() {
                assert!(
                    !c.denom().mod_floor(&BigInt::from(p)).is_zero(),
                    "p={p} i={i}"
                );
            }
        }
    }

    #[test]
    fn pi_agrees_with_log_below_p() {
        let pi = pi_series(5, 5);
        assert_eq!(pi.coeff(0), &rat(0, 1));
        assert_eq!(pi.coeff(1), &rat(1, 1));
        assert_eq!(pi.coeff(2), &rat(-1, 2));
        assert_eq!(pi.coeff(3), &rat(1, 3));
        assert_eq!(pi.coeff(4), &rat(-1, 4));
    }

    #[test]
    fn pi_inverts_artin_hasse() {
        for (p, order) in [(2u64, 10usize), (3, 9), (5, 12)] {
            let pi = pi_series(p, order);
            let e = artin_hasse(p, order);
            let composed = e.compose(&pi, order);
            assert_eq!(composed.coeff(0), &rat(1, 1), "p={p}");
            assert_eq!(composed.coeff(1), &rat(1, 1), "p={p}");
            for k in 2..order {
                assert_eq!(composed.coeff(k), &rat(0, 1), "p={p} k={k}");
            }
        }
    }

    #[test]
    fn pi_reduction() {
        let t = pi_tseries(5, 5, 2).unwrap();
        // 1, -1/2, 1/3, -1/4 mod 25
        assert_eq!(t.coeffs(), &[0, 1, 12, 17, 6]);
    }

    #[test]
    fn binomial_character_basics() {
        let one = binomial_character(0, 2, 5, 4, 1).unwrap();
        assert_eq!(one.coeffs(), &[1, 0, 0, 0]);
        let t = binomial_character(1, 2, 5, 4, 1).unwrap();
        assert_eq!(t.coeffs(), &[1, 1, 0, 0]);
        let zp = binomial_character(5, 2, 5, 2, 1).unwrap();
        assert_eq!(zp.coeffs(), &[1, 0]);
    }

    #[test]
    fn binomial_character_is_additive() {
        let p = 5u64;
        let zprec = 2u32;
        for (z1, z2) in [(3u64, 8u64), (24, 1), (17, 13), (22, 9)] {
            let a = binomial_character(z1, zprec, p, 5, 2).unwrap();
            let b = binomial_character(z2, zprec, p, 5, 2).unwrap();
            let ab = binomial_character((z1 + z2) % 25, zprec, p, 5, 2).unwrap();
            assert_eq!(a.mul(&b), ab, "z1={z1} z2={z2}");
        }
        // wider truncation forces a precision reserve: v_2(5!) = 3
        let a = binomial_character(37, 5, 2, 6, 2).unwrap();
        let b = binomial_character(11, 5, 2, 6, 2).unwrap();
        let ab = binomial_character((37 + 11) % 32, 5, 2, 6, 2).unwrap();
        assert_eq!(a.mul(&b), ab);
    }

    #[test]
    fn binomial_character_demands_precision() {
        let err = binomial_character(1, 1, 2, 6, 2).unwrap_err();
        match err {
            Error::InsufficientPrecision { needed, have, .. } => {
                assert_eq!(needed, 5);
                assert_eq!(have, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn tseries_json_roundtrip() {
        let s = TSeries::new(5, 2, vec![1, 24, 0, 13]);
        let js = s.to_json();
        assert_eq!(js["coeffs"][1], "24");
        assert_eq!(TSeries::from_json(&js).unwrap(), s);
    }
}
