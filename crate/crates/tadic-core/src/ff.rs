//! Finite fields F_{p^n} with a deterministic choice of modulus.
//!
//! The modulus is the first monic irreducible x^n + g found when g runs
//! through all polynomials of degree < n ordered by the counting value
//! sum(c_i p^i) of their coefficient vectors. Elements are coefficient
//! vectors in the power basis of x, and the same counting value gives the
//! canonical enumeration order of the field.

use crate::error::Error;
use crate::Result;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    if n % 3 == 0 {
        return n == 3;
    }
    let mut k = 5u64;
    while k.checked_mul(k).map_or(false, |kk| kk <= n) {
        if n % k == 0 || n % (k + 2) == 0 {
            return false;
        }
        k += 6;
    }
    true
}

/// Coefficient vector of length n in the power basis.
pub type FieldElem = Vec<u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDesc {
    p: u64,
    n: u32,
    q: u64,
    /// Monic modulus of degree n, length n + 1, coefficients mod p.
    modulus: Vec<u64>,
}

impl FieldDesc {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if n == 0 {
            return Err(Error::Precondition {
                what: "field degree",
                detail: "degree must be at least 1".into(),
            });
        }
        let q = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(p)).ok_or(
            Error::Precondition {
                what: "field size",
                detail: format!("{p}^{n} exceeds u64"),
            },
        )?;
        let modulus = first_irreducible(p, n);
        Ok(FieldDesc { p, n, q, modulus })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(&self) -> FieldElem {
        vec![0; self.n as usize]
    }

    pub fn one(&self) -> FieldElem {
        let mut e = self.zero();
        e[0] = 1;
        e
    }

    pub fn constant(&self, c: u64) -> FieldElem {
        let mut e = self.zero();
        e[0] = c % self.p;
        e
    }

    /// Element whose counting value is v.
    pub fn from_value(&self, mut v: u64) -> FieldElem {
        assert!(v < self.q, "value {v} out of range for field of size {}", self.q);
        let mut e = self.zero();
        for c in e.iter_mut() {
            *c = v % self.p;
            v /= self.p;
        }
        e
    }

    /// Counting value sum(c_i p^i) of an element.
    pub fn value(&self, e: &FieldElem) -> u64 {
        e.iter().rev().fold(0u64, |acc, &c| acc * self.p + c)
    }

    fn check(&self, e: &FieldElem) {
        debug_assert_eq!(e.len(), self.n as usize, "element from a different field");
        debug_assert!(e.iter().all(|&c| c < self.p));
    }

    pub fn add(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.p).collect()
    }

    pub fn sub(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.p - y) % self.p)
            .collect()
    }

    pub fn neg(&self, a: &FieldElem) -> FieldElem {
        self.check(a);
        a.iter().map(|&x| (self.p - x) % self.p).collect()
    }

    pub fn scalar_mul(&self, a: &FieldElem, c: u64) -> FieldElem {
        self.check(a);
        let c = c % self.p;
        a.iter()
            .map(|&x| ((x as u128 * c as u128) % self.p as u128) as u64)
            .collect()
    }

    pub fn mul(&self, a: &FieldElem, b: &FieldElem) -> FieldElem {
        self.check(a);
        self.check(b);
        poly_mul_mod(a, b, &self.modulus, self.p)
    }

    pub fn pow(&self, a: &FieldElem, mut e: u128) -> FieldElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: &FieldElem) -> Result<FieldElem> {
        if a.iter().all(|&c| c == 0) {
            return Err(Error::Precondition {
                what: "field inverse",
                detail: "inverse of zero".into(),
            });
        }
        Ok(self.pow(a, self.q as u128 - 2))
    }

    pub fn is_zero(&self, a: &FieldElem) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn frobenius(&self, a: &FieldElem) -> FieldElem {
        self.pow(a, self.p as u128)
    }

    /// Trace down to the prime field, returned as a residue mod p.
    pub fn trace_to_prime(&self, a: &FieldElem) -> u64 {
        let mut acc = self.zero();
        let mut cur = a.clone();
        for _ in 0..self.n {
            acc = self.add(&acc, &cur);
            cur = self.frobenius(&cur);
        }
        debug_assert!(
            acc[1..].iter().all(|&c| c == 0),
            "trace escaped the prime field"
        );
        acc[0]
    }

    /// All elements in counting order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (0..self.q).map(move |v| self.from_value(v))
    }

    /// Nonzero elements in counting order.
    pub fn units(&self) -> impl Iterator<Item = FieldElem> + '_ {
        (1..self.q).map(move |v| self.from_value(v))
    }

    /// Evaluate a polynomial with coefficients in this field.
    pub fn eval_poly(&self, coeffs: &[FieldElem], x: &FieldElem) -> FieldElem {
        let mut acc = self.zero();
        for c in coeffs.iter().rev() {
            acc = self.add(&self.mul(&acc, x), c);
        }
        acc
    }
}

/// Inclusion of F_{p^m} into F_{p^n} for m | n, pinned down by sending the
/// source generator to the first root of the source modulus in the target
/// counting order.
#[derive(Debug, Clone)]
pub struct Embedding {
    src: FieldDesc,
    dst: FieldDesc,
    /// Powers rho^0 .. rho^{m-1} of the chosen root.
    root_powers: Vec<FieldElem>,
}

impl Embedding {
    pub fn new(src: &FieldDesc, dst: &FieldDesc) -> Result<Self> {
        if src.p != dst.p {
            return Err(Error::Precondition {
                what: "field embedding",
                detail: format!("different characteristics {} and {}", src.p, dst.p),
            });
        }
        if dst.n % src.n != 0 {
            return Err(Error::Precondition {
                what: "field embedding",
                detail: format!("{} does not divide {}", src.n, dst.n),
            });
        }
        let lifted: Vec<FieldElem> = src.modulus.iter().map(|&c| dst.constant(c)).collect();
        let root = dst
            .elements()
            .find(|cand| dst.is_zero(&dst.eval_poly(&lifted, cand)))
            .ok_or(Error::Property(format!(
                "modulus of F_{} has no root in F_{}",
                src.q, dst.q
            )))?;
        let mut root_powers = Vec::with_capacity(src.n as usize);
        let mut cur = dst.one();
        for _ in 0..src.n {
            root_powers.push(cur.clone());
            cur = dst.mul(&cur, &root);
        }
        Ok(Embedding {
            src: src.clone(),
            dst: dst.clone(),
            root_powers,
        })
    }

    pub fn src(&self) -> &FieldDesc {
        &self.src
    }

    pub fn dst(&self) -> &FieldDesc {
        &self.dst
    }

    pub fn map(&self, a: &FieldElem) -> FieldElem {
        let mut acc = self.dst.zero();
        for (c, rp) in a.iter().zip(&self.root_powers) {
            acc = self.dst.add(&acc, &self.dst.scalar_mul(rp, *c));
        }
        acc
    }
}

fn first_irreducible(p: u64, n: u32) -> Vec<u64> {
    let tail = (0..n).try_fold(1u64, |acc, _| acc.checked_mul(p));
    let mut v = 0u64;
    loop {
        let mut f = vec![0u64; n as usize + 1];
        f[n as usize] = 1;
        let mut rest = v;
        for c in f.iter_mut().take(n as usize) {
            *c = rest % p;
            rest /= p;
        }
        if poly_is_irreducible(&f, p) {
            return f;
        }
        v += 1;
        if let Some(limit) = tail {
            assert!(v < limit, "no irreducible of degree {n} over F_{p}");
        }
    }
}

pub(crate) fn poly_is_irreducible(f: &[u64], p: u64) -> bool {
    let n = f.len() as u32 - 1;
    if n == 0 {
        return false;
    }
    let x = vec![0u64, 1];
    // x^(p^n) must reduce to x mod f
    let q = (0..n).fold(1u128, |acc, _| acc * p as u128);
    let xq = poly_pow_mod(&x, q, f, p);
    let xr = poly_rem(&x, f, p);
    if trim(&xq) != trim(&xr) {
        return false;
    }
    // and x^(p^(n/l)) - x must be coprime to f for every prime l | n
    for l in prime_divisors(n) {
        let e = (0..n / l).fold(1u128, |acc, _| acc * p as u128);
        let xe = poly_pow_mod(&x, e, f, p);
        let diff = poly_sub(&xe, &x, p);
        let g = poly_gcd(&diff, f, p);
        if poly_deg(&g) != 0 {
            return false;
        }
    }
    true
}

fn prime_divisors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn trim(a: &[u64]) -> &[u64] {
    let mut end = a.len();
    while end > 0 && a[end - 1] == 0 {
        end -= 1;
    }
    &a[..end]
}

fn poly_deg(a: &[u64]) -> usize {
    trim(a).len().saturating_sub(1)
}

fn poly_sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect()
}

/// Product of two coefficient vectors reduced by the monic modulus f.
/// The result has length deg(f), suitable as a field element.
fn poly_mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let n = f.len() - 1;
    let mut prod = vec![0u128; a.len() + b.len()];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u128 * y as u128) % p as u128;
        }
    }
    // reduce from the top: x^n = -(low part of f)
    for i in (n..prod.len()).rev() {
        let c = prod[i];
        if c == 0 {
            continue;
        }
        prod[i] = 0;
        for j in 0..n {
            if f[j] == 0 {
                continue;
            }
            let sub = c * f[j] as u128 % p as u128;
            prod[i - n + j] = (prod[i - n + j] + p as u128 - sub) % p as u128;
        }
    }
    prod.truncate(n.max(1));
    prod.iter().map(|&c| c as u64).collect()
}

fn poly_pow_mod(base: &[u64], mut e: u128, f: &[u64], p: u64) -> Vec<u64> {
    let n = f.len() - 1;
    let mut acc = vec![0u64; n.max(1)];
    acc[0] = 1;
    // multiplying by one reduces the base below f
    let mut b = poly_mul_mod(base, &acc, f, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &b, f, p);
        }
        b = poly_mul_mod(&b, &b, f, p);
        e >>= 1;
    }
    acc
}

fn poly_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a).to_vec();
    let mut b = trim(b).to_vec();
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = trim(&r).to_vec();
    }
    if let Some(&lead) = a.last() {
        let inv = mod_inv(lead, p);
        for c in a.iter_mut() {
            *c = (*c as u128 * inv as u128 % p as u128) as u64;
        }
    }
    a
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = trim(b);
    let mut r: Vec<u64> = a.to_vec();
    let db = b.len() - 1;
    let lead_inv = mod_inv(b[db], p);
    while trim(&r).len() > db {
        let dr = trim(&r).len() - 1;
        let c = r[dr] as u128 * lead_inv as u128 % p as u128;
        for j in 0..=db {
            let sub = c * b[j] as u128 % p as u128;
            r[dr - db + j] = ((r[dr - db + j] as u128 + p as u128 - sub) % p as u128) as u64;
        }
    }
    r
}

fn mod_inv(a: u64, p: u64) -> u64 {
    // Fermat; p is prime throughout this module
    let mut e = p - 2;
    let mut base = a as u128 % p as u128;
    let mut acc = 1u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    acc as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality() {
        let primes = [2u64, 3, 5, 7, 11, 13, 97, 7919];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for c in [0u64, 1, 4, 9, 21, 91, 7917] {
            assert!(!is_prime(c), "{c}");
        }
    }

    #[test]
    fn modulus_choices() {
        assert_eq!(FieldDesc::new(5, 1).unwrap().modulus(), &[0, 1]);
        assert_eq!(FieldDesc::new(3, 2).unwrap().modulus(), &[1, 0, 1]);
        assert_eq!(FieldDesc::new(2, 4).unwrap().modulus(), &[1, 1, 0, 0, 1]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FieldDesc::new(6, 1).is_err());
        assert!(FieldDesc::new(5, 0).is_err());
    }

    #[test]
    fn counting_order() {
        let f9 = FieldDesc::new(3, 2).unwrap();
        assert_eq!(f9.from_value(3), vec![0, 1]);
        assert_eq!(f9.from_value(5), vec![2, 1]);
        let units: Vec<u64> = f9.units().map(|e| f9.value(&e)).collect();
        assert_eq!(units, (1..9).collect::<Vec<_>>());
    }

    #[test]
    fn field_axioms_f9() {
        let f = FieldDesc::new(3, 2).unwrap();
        let all: Vec<_> = f.elements().collect();
        for a in &all {
            for b in &all {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                for c in &all {
                    assert_eq!(f.mul(a, &f.add(b, c)), f.add(&f.mul(a, b), &f.mul(a, c)));
                    assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn inverses_and_fermat() {
        for (p, n) in [(2u64, 4u32), (3, 2), (7, 1)] {
            let f = FieldDesc::new(p, n).unwrap();
            for u in f.units() {
                let inv = f.inv(&u).unwrap();
                assert_eq!(f.mul(&u, &inv), f.one());
                assert_eq!(f.pow(&u, f.q() as u128 - 1), f.one());
            }
            assert!(f.inv(&f.zero()).is_err());
        }
    }

    #[test]
    fn frobenius_and_trace() {
        let f = FieldDesc::new(3, 2).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(
                    f.frobenius(&f.add(&a, &b)),
                    f.add(&f.frobenius(&a), &f.frobenius(&b))
                );
            }
        }
        for c in 0..3 {
            let e = f.constant(c);
            assert_eq!(f.frobenius(&e), e);
        }
        // trace fibers over F_p all have size q/p
        let mut counts = [0usize; 3];
        for a in f.elements() {
            counts[f.trace_to_prime(&a) as usize] += 1;
        }
        assert_eq!(counts, [3, 3, 3]);

        let f16 = FieldDesc::new(2, 4).unwrap();
        let mut counts = [0usize; 2];
        for a in f16.elements() {
            counts[f16.trace_to_prime(&a) as usize] += 1;
        }
        assert_eq!(counts, [8, 8]);
    }

    #[test]
    fn embedding_is_a_ring_hom() {
        let f9 = FieldDesc::new(3, 2).unwrap();
        let f81 = FieldDesc::new(3, 4).unwrap();
        let emb = Embedding::new(&f9, &f81).unwrap();
        assert_eq!(emb.map(&f9.one()), f81.one());
        let all: Vec<_> = f9.elements().collect();
        for a in &all {
            for b in &all {
                assert_eq!(
                    emb.map(&f9.add(a, b)),
                    f81.add(&emb.map(a), &emb.map(b))
                );
                assert_eq!(
                    emb.map(&f9.mul(a, b)),
                    f81.mul(&emb.map(a), &emb.map(b))
                );
            }
            // embedding commutes with the p-power map
            assert_eq!(emb.map(&f9.frobenius(a)), f81.frobenius(&emb.map(a)));
        }
        // injectivity
        let mut images: Vec<u64> = all.iter().map(|a| f81.value(&emb.map(a))).collect();
        images.sort_unstable();
        images.dedup();
        assert_eq!(images.len(), 9);
    }

    #[test]
    fn embedding_from_prime_field() {
        let f5 = FieldDesc::new(5, 1).unwrap();
        let f25 = FieldDesc::new(5, 2).unwrap();
        let emb = Embedding::new(&f5, &f25).unwrap();
        for c in 0..5 {
            assert_eq!(emb.map(&f5.constant(c)), f25.constant(c));
        }
        assert!(Embedding::new(&f25, &f5).is_err());
    }

    #[test]
    fn embedding_tower_consistency() {
        let f3 = FieldDesc::new(3, 1).unwrap();
        let f9 = FieldDesc::new(3, 2).unwrap();
        let f81 = FieldDesc::new(3, 4).unwrap();
        let lo = Embedding::new(&f3, &f9).unwrap();
        let hi = Embedding::new(&f9, &f81).unwrap();
        let direct = Embedding::new(&f3, &f81).unwrap();
        for c in f3.elements() {
            assert_eq!(hi.map(&lo.map(&c)), direct.map(&c));
        }
    }
}
