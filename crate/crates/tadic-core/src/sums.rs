//! Exponential sums attached to a Laurent polynomial over a finite field,
//! and the L-functions they generate.
//!
//! The sum at extension level k runs over the units of F_{q^k}. Each unit
//! is lifted multiplicatively to a Galois ring, the polynomial is evaluated
//! on the lift, and the absolute trace of the value becomes the exponent of
//! the character: a root-of-unity power on the cyclotomic path, a binomial
//! power of (1+T) on the series path. Both paths assemble the sum from a
//! single pass that only counts how often each trace value occurs.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rayon::prelude::*;

use crate::cyclotomic::{CycField, CyclotomicInt};
use crate::ff::{Embedding, FieldDesc, FieldElem};
use crate::galois::{binomial_character, factorial_valuation, GaloisRing, TSeries};
use crate::hasse::hasse_product_eval;
use crate::polygons::{
    arithmetic_polygon, newton_polygon_from_points, polygon_compare, ConvexPolygon, Interval,
};
use crate::{Error, Result};

/// A Laurent polynomial with support in a fixed interval of exponents,
/// coefficients in a finite field, and nonzero coefficients at the nonzero
/// endpoints. The constant exponent is allowed but contributes only a
/// global twist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    delta: Interval,
    field: FieldDesc,
    coeffs: BTreeMap<i64, FieldElem>,
}

impl LaurentPoly {
    pub fn new(
        delta: Interval,
        field: FieldDesc,
        coeffs: BTreeMap<i64, FieldElem>,
    ) -> Result<Self> {
        for (&u, c) in &coeffs {
            if u < -(delta.e() as i64) || u > delta.d() as i64 {
                return Err(Error::Precondition {
                    what: "exponent outside the support interval",
                    detail: format!("exponent {u} not in {delta}"),
                });
            }
            if c.len() != field.n() as usize || c.iter().any(|&x| x >= field.p()) {
                return Err(Error::Precondition {
                    what: "coefficient not in the stated field",
                    detail: format!("coefficient at exponent {u}"),
                });
            }
        }
        for endpoint in [-(delta.e() as i64), delta.d() as i64] {
            if endpoint != 0 {
                match coeffs.get(&endpoint) {
                    Some(c) if !field.is_zero(c) => {}
                    _ => {
                        return Err(Error::Precondition {
                            what: "endpoint coefficient must be nonzero",
                            detail: format!("exponent {endpoint} of {delta}"),
                        })
                    }
                }
            }
        }
        let coeffs = coeffs
            .into_iter()
            .filter(|(_, c)| !field.is_zero(c))
            .collect();
        Ok(LaurentPoly {
            delta,
            field,
            coeffs,
        })
    }

    pub fn delta(&self) -> &Interval {
        &self.delta
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, FieldElem> {
        &self.coeffs
    }

    /// Apply the p-power Frobenius to every coefficient. Exponential sums
    /// are invariant under this twist.
    pub fn frobenius(&self) -> LaurentPoly {
        LaurentPoly {
            delta: self.delta.clone(),
            field: self.field.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(&u, c)| (u, self.field.frobenius(c)))
                .collect(),
        }
    }
}

/// One evaluation pass: for every unit x of the degree-k extension, lift it
/// multiplicatively, evaluate the lifted polynomial, and tally the trace of
/// the result mod p^precision. Negative exponents use the lift of the field
/// inverse, never division in the truncated ring.
fn exponent_counts(f: &LaurentPoly, k: u32, precision: u32, budget: u64) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Precondition {
            what: "extension level must be positive",
            detail: "k = 0".into(),
        });
    }
    let p = f.field.p();
    let ext_deg = f
        .field
        .n()
        .checked_mul(k)
        .ok_or_else(|| Error::Unsupported("extension degree overflows".into()))?;
    let ext = FieldDesc::new(p, ext_deg)?;
    let points = ext.q() - 1;
    if points > budget {
        return Err(Error::Budget {
            required: points,
            budget,
            formula: format!("q^k - 1 = {}^{}  - 1", f.field.q(), k),
        });
    }
    let ring = GaloisRing::new(p, precision, ext_deg)?;
    let emb = Embedding::new(&f.field, &ext)?;
    let lifted: Vec<(i64, Vec<u64>)> = f
        .coeffs
        .iter()
        .map(|(&u, c)| (u, ring.teichmuller(&emb.map(c))))
        .collect();
    let has_negative = f.coeffs.keys().any(|&u| u < 0);

    let tally_range = |lo: u64, hi: u64| -> Vec<u64> {
        let mut counts = vec![0u64; ring.scalar_modulus() as usize];
        for v in lo..hi {
            let x = ext.from_value(v);
            let om = ring.teichmuller(&x);
            let om_inv = if has_negative {
                let xi = ext.inv(&x).expect("unit has an inverse");
                ring.teichmuller(&xi)
            } else {
                ring.one()
            };
            let mut z = ring.zero();
            for (u, c) in &lifted {
                let base = if *u >= 0 { &om } else { &om_inv };
                let pw = ring.pow(base, u.unsigned_abs() as u128);
                z = ring.add(&z, &ring.mul(c, &pw));
            }
            counts[ring.trace(&z) as usize] += 1;
        }
        counts
    };

    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(&b) {
            *x += y;
        }
        a
    };

    const CHUNK: u64 = 1 << 12;
    let counts = if points <= CHUNK {
        tally_range(1, ext.q())
    } else {
        let chunks: Vec<(u64, u64)> = (1..ext.q())
            .step_by(CHUNK as usize)
            .map(|lo| (lo, (lo + CHUNK).min(ext.q())))
            .collect();
        chunks
            .into_par_iter()
            .map(|(lo, hi)| tally_range(lo, hi))
            .reduce(
                || vec![0u64; ring.scalar_modulus() as usize],
                merge,
            )
    };
    Ok(counts)
}

/// The level-k exponential sum as an exact element of Z[zeta], zeta a
/// root of unity of order p^m.
pub fn exp_sum_cyclotomic(
    f: &LaurentPoly,
    k: u32,
    m: u32,
    budget: u64,
) -> Result<CyclotomicInt> {
    let cyc = CycField::new(f.field.p(), m)?;
    let counts = exponent_counts(f, k, m, budget)?;
    let mut acc = cyc.zero();
    for (t, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            acc = cyc.add(
                &acc,
                &cyc.scalar_mul(&cyc.root_power(t as i64), &BigInt::from(cnt)),
            );
        }
    }
    Ok(acc)
}

/// The level-k exponential sum as a power series in T mod (p^precision,
/// T^order): each point contributes (1+T) raised to its trace. The trace is
/// computed at an elevated working precision so the binomial coefficients
/// are determined despite the factorials they divide by.
pub fn exp_sum_tseries(
    f: &LaurentPoly,
    k: u32,
    precision: u32,
    order: usize,
    budget: u64,
) -> Result<TSeries> {
    let p = f.field.p();
    let reserve = if order == 0 {
        0
    } else {
        factorial_valuation(order as u64 - 1, p)
    };
    let work = precision + u32::try_from(reserve).map_err(|_| {
        Error::Unsupported("required working precision overflows".into())
    })?;
    let counts = exponent_counts(f, k, work, budget)?;
    let pn = (0..precision).fold(1u64, |acc, _| acc * p);
    let mut acc = TSeries::zero(p, precision, order);
    for (t, &cnt) in counts.iter().enumerate() {
        if cnt > 0 {
            let ch = binomial_character(t as u64, work, p, order, precision)?;
            acc = acc.add(&ch.scalar_mul(cnt % pn));
        }
    }
    if order > 0 {
        let mut expect = 1u64;
        for _ in 0..k * f.field.n() {
            expect = expect * (f.field.p() % pn) % pn;
        }
        assert_eq!(
            acc.coeff(0),
            (expect + pn - 1) % pn,
            "constant term must count the units"
        );
    }
    Ok(acc)
}

/// L-function of the family of exponential sums at level m, an exact
/// polynomial over Z[zeta]. Requires p coprime to the interval denominator
/// so the degree is known in advance; the recursion works over exact
/// rationals and certifies integrality of every retained coefficient and
/// vanishing of `slack` coefficients beyond the degree.
#[derive(Clone, Debug)]
pub struct LFunction {
    cyc: CycField,
    ground: FieldDesc,
    delta: Interval,
    m: u32,
    degree: usize,
    coeffs: Vec<CyclotomicInt>,
}

impl LFunction {
    pub fn cyc(&self) -> &CycField {
        &self.cyc
    }

    pub fn ground(&self) -> &FieldDesc {
        &self.ground
    }

    pub fn delta(&self) -> &Interval {
        &self.delta
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[CyclotomicInt] {
        &self.coeffs
    }

    /// Newton polygon with respect to the uniformizer of the level-m
    /// cyclotomic field (one unit of valuation per power of zeta - 1).
    pub fn newton_polygon(&self) -> Result<ConvexPolygon> {
        let points: Vec<(i64, Option<BigRational>)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| {
                let v = self
                    .cyc
                    .pi_valuation(c)
                    .map(|v| BigRational::from(BigInt::from(v)));
                (n as i64, v)
            })
            .collect();
        newton_polygon_from_points(&points)
    }

    /// Newton polygon of the completed product over all geometric twists,
    /// to `range` slopes. The twist step is ord(q) in uniformizer units.
    pub fn c_polygon(&self, range: usize) -> Result<ConvexPolygon> {
        let twist = self.ground.n() as u64 * self.cyc.ramification() as u64;
        c_polygon_from_l(&self.newton_polygon()?, twist, range)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.ground.p(),
            "q": self.ground.q(),
            "m": self.m,
            "degree": self.degree,
            "coeffs": self.coeffs.iter().map(|c| self.cyc.to_json(c)).collect::<Vec<_>>(),
        })
    }
}

pub fn l_function(f: &LaurentPoly, m: u32, budget: u64, slack: u32) -> Result<LFunction> {
    let p = f.field.p();
    let delta = f.delta.clone();
    if delta.denominator() as u64 % p == 0 {
        return Err(Error::Precondition {
            what: "p divides the interval denominator",
            detail: format!("p = {p}, denominator = {}", delta.denominator()),
        });
    }
    let degree = p
        .checked_pow(m - 1)
        .and_then(|s| s.checked_mul(delta.vol() as u64))
        .and_then(|d| usize::try_from(d).ok())
        .ok_or_else(|| Error::Unsupported("L-function degree overflows".into()))?;
    let total = degree + slack as usize;

    let q = f.field.q();
    let mut cost: u128 = 0;
    let mut qk: u128 = 1;
    for _ in 0..total {
        qk = qk.saturating_mul(q as u128);
        cost = cost.saturating_add(qk - 1);
    }
    if cost > budget as u128 {
        return Err(Error::Budget {
            required: u64::try_from(cost).unwrap_or(u64::MAX),
            budget,
            formula: format!("sum over k = 1..{total} of (q^k - 1), q = {q}"),
        });
    }

    let cyc = CycField::new(p, m)?;
    let mut sums = Vec::with_capacity(total);
    for k in 1..=total {
        sums.push(exp_sum_cyclotomic(f, k as u32, m, budget)?);
    }

    // exp(sum S_k s^k / k): n c_n = sum_{k=1}^{n} S_k c_{n-k}
    let mut rat = Vec::with_capacity(total + 1);
    rat.push(cyc.rat_one());
    for n in 1..=total {
        let mut acc = cyc.rat_zero();
        for k in 1..=n {
            let term = cyc.rat_mul(&cyc.rat_from_int(&sums[k - 1]), &rat[n - k]);
            acc = cyc.rat_add(&acc, &term);
        }
        let scale = BigRational::new(BigInt::one(), BigInt::from(n));
        rat.push(cyc.rat_scalar_mul(&acc, &scale));
    }

    let mut coeffs = Vec::with_capacity(degree + 1);
    for (n, r) in rat.iter().enumerate().take(degree + 1) {
        coeffs.push(cyc.rat_to_int(r, n)?);
    }
    for (n, r) in rat.iter().enumerate().skip(degree + 1) {
        if !cyc.rat_is_zero(r) {
            return Err(Error::DegreeOverflow { index: n, degree });
        }
    }

    Ok(LFunction {
        cyc,
        ground: f.field.clone(),
        delta,
        m,
        degree,
        coeffs,
    })
}

/// Slopes of the completed product: every L-slope recurs shifted by each
/// multiple of the twist step. Requires all L-slopes to lie within one
/// step, which is what makes the merged sequence globally sorted.
pub fn c_polygon_from_l(np_l: &ConvexPolygon, twist: u64, range: usize) -> Result<ConvexPolygon> {
    if np_l.is_empty() {
        return Err(Error::Precondition {
            what: "L-function polygon has no slopes",
            detail: "cannot assemble the product polygon".into(),
        });
    }
    let step = BigRational::from(BigInt::from(twist));
    for s in np_l.slopes() {
        if s > &step {
            return Err(Error::Precondition {
                what: "L-function slope exceeds the twist step",
                detail: format!("slope {s} > {twist}"),
            });
        }
    }
    let mut slopes = Vec::with_capacity(range);
    let mut shift = BigRational::zero();
    'outer: loop {
        for s in np_l.slopes() {
            if slopes.len() == range {
                break 'outer;
            }
            slopes.push(s + &shift);
        }
        shift += &step;
    }
    ConvexPolygon::new(slopes)
}

/// Comparison of a computed L-function Newton polygon against the scaled
/// arithmetic polygon, together with the genericity certificate. The
/// consistency bit records whether equality and nonvanishing agree, which
/// is the content of the genericity theorem when p exceeds three times the
/// interval denominator.
#[derive(Clone, Debug)]
pub struct GenericityReport {
    pub np_l: ConvexPolygon,
    pub expected: ConvexPolygon,
    pub equal: bool,
    pub hasse_nonzero: bool,
    pub consistent: bool,
    pub hypothesis_satisfied: bool,
}

impl GenericityReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "np_l": self.np_l.to_json(),
            "expected": self.expected.to_json(),
            "equal": self.equal,
            "hasse_nonzero": self.hasse_nonzero,
            "consistent": self.consistent,
            "hypothesis_satisfied": self.hypothesis_satisfied,
        })
    }
}

pub fn verify_generic_np(
    f: &LaurentPoly,
    m: u32,
    budget: u64,
    slack: u32,
) -> Result<GenericityReport> {
    let p = f.field.p();
    let l = l_function(f, m, budget, slack)?;
    let np_l = l.newton_polygon()?;
    let expected = arithmetic_polygon(&f.delta, p, l.degree())?.scale(f.field.n() as u64);
    let cmp = polygon_compare(&np_l, &expected, l.degree())?;
    let cert = hasse_product_eval(&f.delta, p, f)?;
    Ok(GenericityReport {
        np_l,
        expected,
        equal: cmp.equal,
        hasse_nonzero: cert.nonzero,
        consistent: cmp.equal == cert.nonzero,
        hypothesis_satisfied: p > 3 * f.delta.denominator() as u64,
    })
}
