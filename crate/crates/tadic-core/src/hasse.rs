//! Genericity certificates built from slope data.
//!
//! For a turning index m of the arithmetic polygon there is a finite slope
//! set, a class of admissible permutations of it, and a polynomial over F_p
//! in the variables `y_j` (one per exponent of the support interval) whose
//! value at the coefficients of a concrete Laurent polynomial decides
//! whether the generic Newton polygon is attained.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, ToPrimitive};

use crate::ff::{FieldDesc, FieldElem};
use crate::galois::{artin_hasse, inv_mod_prime_power};
use crate::polygons::{arithmetic_profile, arithmetic_slope, Interval};
use crate::sums::LaurentPoly;
use crate::{Error, Result};

/// Cone exponents whose arithmetic slope stays below the polygon's slope at
/// the given index. At a turning point the set must have exactly `m`
/// elements; anything else is a hard error rather than something to repair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeSet {
    pub m: usize,
    pub members: Vec<i64>,
}

/// Whether the arithmetic polygon has a vertex at integer `m`.
pub fn is_turning_point(delta: &Interval, p: u64, m: usize) -> Result<bool> {
    if m == 0 {
        return Ok(false);
    }
    let prof = arithmetic_profile(delta, p, m + 1)?;
    Ok(prof[m] - prof[m - 1] < prof[m + 1] - prof[m])
}

/// Turning points in the open interval (0, Vol), the indices whose minors
/// control equality of the Newton polygon with the arithmetic polygon.
pub fn product_turning_points(delta: &Interval, p: u64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for m in 1..delta.vol() as usize {
        if is_turning_point(delta, p, m)? {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn slope_set(delta: &Interval, p: u64, m: usize) -> Result<SlopeSet> {
    if m == 0 {
        return Err(Error::Precondition {
            what: "slope set index must be positive",
            detail: "m = 0".into(),
        });
    }
    let prof = arithmetic_profile(delta, p, m)?;
    let threshold = prof[m] - prof[m - 1];
    // ϖ(a) ≥ ⌈(p−1)|a|/side⌉ − 1, so members are confined to a box.
    let side_max = delta.e().max(delta.d()) as u64;
    let bound = (side_max * (threshold + 2)).div_ceil(p - 1) as i64 + 1;
    let mut members = Vec::new();
    for a in delta.cone_points(bound) {
        if arithmetic_slope(delta, p, a)? <= threshold {
            members.push(a);
        }
    }
    if is_turning_point(delta, p, m)? && members.len() != m {
        return Err(Error::SlopeSetCardinality {
            m,
            found: members.len(),
        });
    }
    Ok(SlopeSet { m, members })
}

fn side_endpoint(delta: &Interval, a: i64) -> i64 {
    if a > 0 {
        delta.d() as i64
    } else {
        -(delta.e() as i64)
    }
}

fn finite_degree(delta: &Interval, a: i64) -> BigRational {
    delta
        .degree(a)
        .finite()
        .expect("exponent lies in the cone")
        .clone()
}

/// The admission constraint for mapping `a` to `b` (both nonzero members).
/// `alt` switches to the reading that measures `b` on its own side; the two
/// coincide whenever `b` has the sign of `a`.
fn admits(delta: &Interval, p: u64, members: &[i64], a: i64, b: i64, alt: bool) -> bool {
    let n = members
        .iter()
        .copied()
        .filter(|&x| x != 0 && x.signum() == a.signum())
        .max_by_key(|&x| x.abs())
        .expect("a itself lies on its side");
    let deg_pa = finite_degree(delta, p as i64 * a);
    let rhs = &deg_pa - (&deg_pa - finite_degree(delta, n)).ceil();
    let lhs = if alt {
        finite_degree(delta, b)
    } else {
        BigRational::new(BigInt::from(b), BigInt::from(side_endpoint(delta, a)))
    };
    lhs >= rhs
}

fn enumerate_perms(allowed: &[Vec<bool>]) -> Vec<Vec<usize>> {
    fn rec(
        allowed: &[Vec<bool>],
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let i = img.len();
        if i == allowed.len() {
            out.push(img.clone());
            return;
        }
        for j in 0..allowed.len() {
            if allowed[i][j] && !used[j] {
                used[j] = true;
                img.push(j);
                rec(allowed, img, used, out);
                img.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(
        allowed,
        &mut Vec::with_capacity(allowed.len()),
        &mut vec![false; allowed.len()],
        &mut out,
    );
    out
}

fn perm_parity(img: &[usize]) -> bool {
    // true for odd permutations
    let mut seen = vec![false; img.len()];
    let mut transpositions = 0;
    for start in 0..img.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = img[i];
            len += 1;
        }
        transpositions += len - 1;
    }
    transpositions % 2 == 1
}

fn permutation_class(
    delta: &Interval,
    p: u64,
    m: usize,
    alt: bool,
) -> Result<(SlopeSet, Vec<Vec<usize>>)> {
    if !is_turning_point(delta, p, m)? {
        return Err(Error::Precondition {
            what: "admissible permutations are defined at turning points",
            detail: format!("m = {m} is not a turning point for {delta}, p = {p}"),
        });
    }
    let set = slope_set(delta, p, m)?;
    if set.members.len() > 10 {
        return Err(Error::Unsupported(format!(
            "slope set of size {} exceeds the permutation cap",
            set.members.len()
        )));
    }
    assert_eq!(set.members.first(), Some(&0), "zero heads the slope set");
    let k = set.members.len();
    let mut allowed = vec![vec![false; k]; k];
    allowed[0][0] = true;
    for i in 1..k {
        for j in 1..k {
            allowed[i][j] = admits(delta, p, &set.members, set.members[i], set.members[j], alt);
        }
    }
    let perms = enumerate_perms(&allowed);
    Ok((set, perms))
}

/// Permutations of the slope set fixing 0 whose images keep every factor of
/// the minor expansion at the minimal valuation. Images are reported in
/// member order, so the identity reads as the member list itself.
pub fn admissible_permutations(
    delta: &Interval,
    p: u64,
    m: usize,
) -> Result<(SlopeSet, Vec<Vec<i64>>)> {
    let (set, perms) = permutation_class(delta, p, m, false)?;
    let images = perms
        .iter()
        .map(|img| img.iter().map(|&j| set.members[j]).collect())
        .collect();
    Ok((set, images))
}

/// Both readings of the admission constraint. The constraint divides by a
/// signed endpoint; measuring the image on its own side instead changes
/// nothing for side-preserving images but can admit extra side-flipping
/// ones. Returns (primary, alternative, differ).
pub fn admissible_permutations_diagnostic(
    delta: &Interval,
    p: u64,
    m: usize,
) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, bool)> {
    let (set, primary) = permutation_class(delta, p, m, false)?;
    let (_, alt) = permutation_class(delta, p, m, true)?;
    let to_images = |perms: &[Vec<usize>]| -> Vec<Vec<i64>> {
        perms
            .iter()
            .map(|img| img.iter().map(|&j| set.members[j]).collect())
            .collect()
    };
    let a = to_images(&primary);
    let b = to_images(&alt);
    let differ = a != b;
    Ok((a, b, differ))
}

type Monomial = Vec<(i64, u32)>;

/// A polynomial over F_p in the variables `y_j`, `j` ranging over the
/// integer exponents of the support interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HassePolynomial {
    p: u64,
    m: usize,
    monomials: BTreeMap<Monomial, u64>,
}

impl HassePolynomial {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn monomials(&self) -> &BTreeMap<Monomial, u64> {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.monomials.len() == 1 && self.monomials.get(&Vec::new()) == Some(&1)
    }

    /// Evaluate at coefficients living in an extension of F_p; absent
    /// exponents count as zero.
    pub fn eval(&self, field: &FieldDesc, coeffs: &BTreeMap<i64, FieldElem>) -> FieldElem {
        let mut acc = field.zero();
        'terms: for (mono, &c) in &self.monomials {
            let mut prod = field.one();
            for &(j, e) in mono {
                match coeffs.get(&j) {
                    Some(a) if !field.is_zero(a) => prod = field.mul(&prod, &field.pow(a, e as u128)),
                    _ => continue 'terms,
                }
            }
            acc = field.add(&acc, &field.scalar_mul(&prod, c));
        }
        acc
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .monomials
            .iter()
            .map(|(mono, c)| {
                serde_json::json!({
                    "coeff": c,
                    "monomial": mono.iter().map(|&(j, e)| serde_json::json!([j, e])).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({ "p": self.p, "m": self.m, "terms": terms })
    }
}

impl fmt::Display for HassePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .monomials
            .iter()
            .map(|(mono, c)| {
                let mut parts = Vec::new();
                if *c != 1 || mono.is_empty() {
                    parts.push(c.to_string());
                }
                for &(j, e) in mono {
                    let var = if j < 0 {
                        format!("y({j})")
                    } else {
                        format!("y{j}")
                    };
                    parts.push(if e == 1 { var } else { format!("{var}^{e}") });
                }
                parts.join("*")
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

fn monomial_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut map: BTreeMap<i64, u32> = a.iter().copied().collect();
    for &(j, e) in b {
        *map.entry(j).or_insert(0) += e;
    }
    map.into_iter().collect()
}

fn poly_mul(a: &BTreeMap<Monomial, u64>, b: &BTreeMap<Monomial, u64>, p: u64) -> BTreeMap<Monomial, u64> {
    let mut out = BTreeMap::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = monomial_mul(ma, mb);
            let c = (out.get(&m).copied().unwrap_or(0) + ca * cb % p) % p;
            if c == 0 {
                out.remove(&m);
            } else {
                out.insert(m, c);
            }
        }
    }
    out
}

fn monomial_weight(mono: &Monomial) -> u64 {
    mono.iter().map(|&(j, e)| j.unsigned_abs() * e as u64).sum()
}

/// All exponent assignments {n_j ≥ 0 : j in the interval} with the given
/// weighted sum and the given number of parts. The variable at j = 0 is
/// part of the search space even though the part count never lets it into
/// a solution of minimal size.
fn knapsack(delta: &Interval, target: i64, count: u32) -> Vec<Monomial> {
    fn rec(
        js: &[i64],
        target: i64,
        count: u32,
        current: &mut Monomial,
        out: &mut Vec<Monomial>,
    ) {
        if js.is_empty() {
            if target == 0 && count == 0 {
                out.push(current.clone());
            }
            return;
        }
        let j = js[0];
        let rest = &js[1..];
        let rest_max: i64 = rest.iter().copied().max().unwrap_or(0).max(0);
        let rest_min: i64 = rest.iter().copied().min().unwrap_or(0).min(0);
        for n in 0..=count {
            let t = target - j * n as i64;
            let left = (count - n) as i64;
            if t > rest_max * left || t < rest_min * left {
                continue;
            }
            if n > 0 {
                current.push((j, n));
            }
            rec(rest, t, count - n, current, out);
            if n > 0 {
                current.pop();
            }
        }
    }
    let js: Vec<i64> = delta.exponents().collect();
    let mut out = Vec::new();
    rec(&js, target, count, &mut Vec::new(), &mut out);
    out
}

fn rational_mod_p(r: &BigRational, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let num = r.numer().mod_floor(&pb).to_u64().unwrap();
    let den = r.denom().mod_floor(&pb).to_u64().unwrap();
    assert!(den != 0, "series coefficient has p in its denominator");
    num * inv_mod_prime_power(den, p) % p
}

/// The genericity polynomial at turning index m: a signed sum over
/// admissible permutations of products of bounded knapsack sums, with
/// splitting-series coefficients reduced mod p.
pub fn hasse_polynomial(delta: &Interval, p: u64, m: usize) -> Result<HassePolynomial> {
    let (set, perms) = permutation_class(delta, p, m, false)?;
    let members = &set.members;

    let mut max_count = 0u32;
    for perm in &perms {
        for (idx, &i) in members.iter().enumerate() {
            let v = p as i64 * i - members[perm[idx]];
            if v != 0 && delta.in_cone(v) {
                let c = finite_degree(delta, v).ceil().to_integer().to_u32().ok_or(
                    Error::DegreeOverflow {
                        index: idx,
                        degree: m,
                    },
                )?;
                max_count = max_count.max(c);
            }
        }
    }
    let lambda: Vec<u64> = artin_hasse(p, max_count as usize + 1)
        .coeffs()
        .iter()
        .map(|r| rational_mod_p(r, p))
        .collect();

    let base_weight: u64 = (p - 1) * members.iter().map(|i| i.unsigned_abs()).sum::<u64>();
    let mut acc: BTreeMap<Monomial, u64> = BTreeMap::new();
    for perm in &perms {
        let mut term: BTreeMap<Monomial, u64> = BTreeMap::new();
        term.insert(Vec::new(), 1);
        let mut weight = 0u64;
        for (idx, &i) in members.iter().enumerate() {
            let v = p as i64 * i - members[perm[idx]];
            weight += v.unsigned_abs();
            if v == 0 {
                continue;
            }
            if !delta.in_cone(v) {
                term.clear();
                break;
            }
            let c = finite_degree(delta, v).ceil().to_integer().to_u32().unwrap();
            let mut factor: BTreeMap<Monomial, u64> = BTreeMap::new();
            for mono in knapsack(delta, v, c) {
                assert_eq!(
                    monomial_weight(&mono),
                    v.unsigned_abs(),
                    "minimal-part solutions stay on one side"
                );
                let mut coeff = 1u64;
                for &(_, e) in &mono {
                    coeff = coeff * lambda[e as usize] % p;
                }
                if coeff != 0 {
                    let cur = (factor.get(&mono).copied().unwrap_or(0) + coeff) % p;
                    if cur == 0 {
                        factor.remove(&mono);
                    } else {
                        factor.insert(mono, cur);
                    }
                }
            }
            term = poly_mul(&term, &factor, p);
            if term.is_empty() {
                break;
            }
        }
        assert!(
            term.is_empty() || weight >= base_weight,
            "permutation term falls below the sign-preserving weight"
        );
        let odd = perm_parity(perm);
        for (mono, c) in term {
            let c = if odd { (p - c) % p } else { c };
            let cur = (acc.get(&mono).copied().unwrap_or(0) + c) % p;
            if cur == 0 {
                acc.remove(&mono);
            } else {
                acc.insert(mono, cur);
            }
        }
    }
    Ok(HassePolynomial {
        p,
        m,
        monomials: acc,
    })
}

/// The outcome of evaluating every controlling genericity polynomial at the
/// coefficients of a concrete Laurent polynomial.
#[derive(Clone, Debug)]
pub struct GenericityCertificate {
    pub factors: Vec<(usize, HassePolynomial, FieldElem)>,
    pub value: FieldElem,
    pub nonzero: bool,
}

/// Evaluate the product of the genericity polynomials over the turning
/// points below the interval volume. The nonzero bit is the genericity
/// predicate; its equivalence with Newton-polygon equality is only a
/// theorem for p above three times the exponent denominator, but the
/// evaluation itself is unconditional.
pub fn hasse_product_eval(
    delta: &Interval,
    p: u64,
    f: &LaurentPoly,
) -> Result<GenericityCertificate> {
    if f.delta() != delta || f.field().p() != p {
        return Err(Error::Precondition {
            what: "certificate parameters must match the input polynomial",
            detail: format!(
                "asked for {delta}, p = {p}; polynomial has {}, p = {}",
                f.delta(),
                f.field().p()
            ),
        });
    }
    let field = f.field();
    let mut factors = Vec::new();
    let mut value = field.one();
    for m in product_turning_points(delta, p)? {
        let h = hasse_polynomial(delta, p, m)?;
        let v = h.eval(field, f.coeffs());
        value = field.mul(&value, &v);
        factors.push((m, h, v));
    }
    let nonzero = !field.is_zero(&value);
    Ok(GenericityCertificate {
        factors,
        value,
        nonzero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(e: u32, d: u32) -> Interval {
        Interval::new(e, d).unwrap()
    }

    #[test]
    fn slope_set_examples() {
        let s = slope_set(&iv(0, 3), 11, 2).unwrap();
        assert_eq!(s.members, vec![0, 1]);
        let s = slope_set(&iv(0, 2), 7, 1).unwrap();
        assert_eq!(s.members, vec![0]);
        let s = slope_set(&iv(1, 1), 5, 3).unwrap();
        assert_eq!(s.members, vec![0, 1, -1]);
    }

    #[test]
    fn slope_set_cardinality_failure() {
        // For p = 2 on [0..3] the slope at 2 collapses to 0, so the set at
        // the first vertex has two elements instead of one.
        match slope_set(&iv(0, 3), 2, 1) {
            Err(Error::SlopeSetCardinality { m: 1, found: 2 }) => {}
            other => panic!("expected cardinality error, got {other:?}"),
        }
    }

    #[test]
    fn turning_points_of_examples() {
        assert_eq!(product_turning_points(&iv(0, 3), 11).unwrap(), vec![1, 2]);
        assert_eq!(product_turning_points(&iv(1, 1), 5).unwrap(), vec![1]);
        assert_eq!(product_turning_points(&iv(0, 2), 7).unwrap(), vec![1]);
        // m = 3 is a vertex for [-1..1] at p = 5, just beyond the volume
        assert!(is_turning_point(&iv(1, 1), 5, 3).unwrap());
        assert!(!is_turning_point(&iv(1, 1), 5, 2).unwrap());
    }

    #[test]
    fn identity_only_permutation_classes() {
        let (set, perms) = admissible_permutations(&iv(0, 3), 11, 2).unwrap();
        assert_eq!(perms, vec![set.members.clone()]);
        let (set, perms) = admissible_permutations(&iv(1, 1), 5, 3).unwrap();
        assert_eq!(perms, vec![set.members.clone()]);
        let (set, perms) = admissible_permutations(&iv(0, 2), 7, 1).unwrap();
        assert_eq!(set.members, vec![0]);
        assert_eq!(perms, vec![vec![0]]);
    }

    #[test]
    fn identity_is_always_admissible() {
        for (e, d, p) in [
            (0u32, 2u32, 7u64),
            (0, 3, 11),
            (0, 3, 13),
            (1, 1, 5),
            (1, 2, 7),
            (2, 3, 19),
            (0, 4, 13),
        ] {
            let delta = iv(e, d);
            for m in product_turning_points(&delta, p).unwrap() {
                let (set, perms) = admissible_permutations(&delta, p, m).unwrap();
                assert!(
                    perms.contains(&set.members),
                    "identity missing for [{}..{}] p={} m={}",
                    -(e as i64),
                    d,
                    p,
                    m
                );
            }
        }
    }

    #[test]
    fn dual_reading_diagnostic() {
        // Side-preserving images make both readings agree.
        let (a, b, differ) = admissible_permutations_diagnostic(&iv(0, 3), 11, 2).unwrap();
        assert!(!differ);
        assert_eq!(a, b);
        // The side-flip swap on [-1..1] is rejected by the signed-endpoint
        // reading but admitted when the image is measured on its own side.
        let (a, b, differ) = admissible_permutations_diagnostic(&iv(1, 1), 5, 3).unwrap();
        assert!(differ);
        assert_eq!(a.len(), 1);
        assert_eq!(b.len(), 2);
        assert!(b.contains(&vec![0, -1, 1]));
    }

    #[test]
    fn cubic_hasse_polynomial() {
        let h = hasse_polynomial(&iv(0, 3), 11, 2).unwrap();
        let mut expected = BTreeMap::new();
        expected.insert(vec![(1, 1), (3, 3)], 2);
        expected.insert(vec![(2, 2), (3, 2)], 3);
        assert_eq!(h.monomials(), &expected);
        assert_eq!(h.to_string(), "2*y1*y3^3 + 3*y2^2*y3^2");
    }

    #[test]
    fn kloosterman_hasse_polynomial() {
        let h = hasse_polynomial(&iv(1, 1), 5, 3).unwrap();
        let mut expected = BTreeMap::new();
        expected.insert(vec![(-1, 4), (1, 4)], 1);
        assert_eq!(h.monomials(), &expected);
        assert_eq!(h.to_string(), "y(-1)^4*y1^4");
    }

    #[test]
    fn first_vertex_polynomial_is_one() {
        for (e, d, p) in [(0u32, 2u32, 7u64), (0, 3, 11), (1, 1, 5)] {
            let h = hasse_polynomial(&iv(e, d), p, 1).unwrap();
            assert!(h.is_one());
            assert_eq!(h.to_string(), "1");
        }
    }

    #[test]
    fn shipped_polynomials_are_nonzero_with_minimal_weight() {
        for (e, d, p) in [(0u32, 2u32, 7u64), (0, 3, 11), (1, 1, 5), (0, 4, 13)] {
            let delta = iv(e, d);
            for m in product_turning_points(&delta, p).unwrap() {
                let h = hasse_polynomial(&delta, p, m).unwrap();
                assert!(!h.is_zero(), "[{e}..{d}] p={p} m={m}");
                let base: u64 = (p - 1)
                    * slope_set(&delta, p, m)
                        .unwrap()
                        .members
                        .iter()
                        .map(|i| i.unsigned_abs())
                        .sum::<u64>();
                for mono in h.monomials().keys() {
                    assert!(monomial_weight(mono) >= base);
                }
            }
        }
    }

    #[test]
    fn json_round_shape() {
        let h = hasse_polynomial(&iv(0, 3), 11, 2).unwrap();
        let v = h.to_json();
        assert_eq!(v["p"], 11);
        assert_eq!(v["m"], 2);
        assert_eq!(v["terms"].as_array().unwrap().len(), 2);
        assert_eq!(v["terms"][0]["coeff"], 2);
    }
}
