//! The truncated Dwork operator: splitting-series expansion of the input
//! polynomial, the matrix of the linearized operator on a weighted basis,
//! Fredholm determinant coefficients, the trace-formula cross-check, minor
//! leading terms, and turning-point certification.
//!
//! All series live in a Galois ring adjoined a fractional power of the
//! uniformizer: exponents are stored as integer numerators over the common
//! denominator of the support interval. Every series carries the exponent
//! bound below which its coefficients are exact, and arithmetic propagates
//! that bound, so a claim is never sharper than the truncation supports.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, ToPrimitive};

use crate::ff::FieldElem;
use crate::galois::{artin_hasse, pi_tseries, GaloisRing, GRElem, TSeries};
use crate::hasse::{product_turning_points, slope_set};
use crate::polygons::{arithmetic_profile, Interval};
use crate::sums::{exp_sum_tseries, LaurentPoly};
use crate::{Error, Result};

/// Sparse series in fractional powers of the uniformizer with Galois-ring
/// coefficients. Keys are exponent numerators over `den`; `cutoff` is the
/// first numerator at which coefficients are no longer known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiSeries {
    den: u32,
    cutoff: i64,
    coeffs: BTreeMap<i64, GRElem>,
}

impl PiSeries {
    pub fn zero(den: u32, cutoff: i64) -> Self {
        PiSeries {
            den,
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(ring: &GaloisRing, den: u32, cutoff: i64) -> Self {
        let mut s = PiSeries::zero(den, cutoff);
        s.insert_add(ring, 0, ring.one());
        s
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, GRElem> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest stored exponent numerator, or None when zero to cutoff.
    pub fn ord(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    fn eff_ord(&self) -> i64 {
        self.ord().unwrap_or(self.cutoff)
    }

    fn insert_add(&mut self, ring: &GaloisRing, num: i64, val: GRElem) {
        if num >= self.cutoff || ring.is_zero(&val) {
            return;
        }
        let entry = match self.coeffs.remove(&num) {
            Some(old) => ring.add(&old, &val),
            None => val,
        };
        if !ring.is_zero(&entry) {
            self.coeffs.insert(num, entry);
        }
    }

    pub fn add(&self, ring: &GaloisRing, other: &PiSeries) -> PiSeries {
        assert_eq!(self.den, other.den);
        let mut out = PiSeries::zero(self.den, self.cutoff.min(other.cutoff));
        for (&k, v) in self.coeffs.iter().chain(&other.coeffs) {
            out.insert_add(ring, k, v.clone());
        }
        out
    }

    pub fn neg(&self, ring: &GaloisRing) -> PiSeries {
        self.map_values(|v| ring.neg(v))
    }

    pub fn mul(&self, ring: &GaloisRing, other: &PiSeries) -> PiSeries {
        assert_eq!(self.den, other.den);
        let cutoff = (self.cutoff + other.eff_ord())
            .min(other.cutoff + self.eff_ord())
            .min(self.cutoff + other.cutoff);
        let mut out = PiSeries::zero(self.den, cutoff);
        for (&ka, va) in &self.coeffs {
            for (&kb, vb) in &other.coeffs {
                if ka + kb < cutoff {
                    out.insert_add(ring, ka + kb, ring.mul(va, vb));
                }
            }
        }
        out
    }

    /// Multiply every coefficient by a fixed ring element.
    pub fn scale(&self, ring: &GaloisRing, c: &GRElem) -> PiSeries {
        self.map_values(|v| ring.mul(v, c))
    }

    /// Shift all exponents (and the trust bound) by a numerator amount.
    pub fn shift(&self, delta_num: i64) -> PiSeries {
        PiSeries {
            den: self.den,
            cutoff: self.cutoff + delta_num,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k + delta_num, v.clone())).collect(),
        }
    }

    pub fn truncate(&self, cutoff: i64) -> PiSeries {
        PiSeries {
            den: self.den,
            cutoff: self.cutoff.min(cutoff),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(&k, _)| k < self.cutoff.min(cutoff))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    fn map_values<F: Fn(&GRElem) -> GRElem>(&self, f: F) -> PiSeries {
        PiSeries {
            den: self.den,
            cutoff: self.cutoff,
            coeffs: self.coeffs.iter().map(|(&k, v)| (k, f(v))).collect(),
        }
    }

    /// Exact division of every coefficient by an integer, peeling off the
    /// p-part digit by digit. The caller accounts for the precision digits
    /// this costs.
    fn divide_by_int(&self, ring: &GaloisRing, k: u64) -> PiSeries {
        let p = ring.p();
        let v = crate::galois::vp_u64(k, p);
        let unit = k / (0..v).fold(1u64, |acc, _| acc * p);
        let pv = (0..v).fold(1u64, |acc, _| acc * p);
        let inv = inv_in_ring(ring, unit);
        self.map_values(|z| {
            let y = ring.scalar_mul(z, inv);
            y.iter()
                .map(|&c| {
                    assert_eq!(c % pv, 0, "determinant recursion lost integrality");
                    c / pv
                })
                .collect()
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "den": self.den,
            "cutoff": self.cutoff,
            "coeffs": self
                .coeffs
                .iter()
                .map(|(k, v)| serde_json::json!({"num": k, "value": v}))
                .collect::<Vec<_>>(),
        })
    }
}

fn inv_in_ring(ring: &GaloisRing, unit: u64) -> u64 {
    crate::galois::inv_mod_prime_power(unit % ring.scalar_modulus(), ring.scalar_modulus())
}

fn rational_mod(r: &BigRational, pn: u64) -> u64 {
    let m = BigInt::from(pn);
    let num = r.numer().mod_floor(&m).to_u64().unwrap();
    let den = r.denom().mod_floor(&m).to_u64().unwrap();
    let inv = crate::galois::inv_mod_prime_power(den, pn);
    ((num as u128 * inv as u128) % pn as u128) as u64
}

/// Exponent weight in numerator units: den * deg(i).
fn weight_num(delta: &Interval, i: i64) -> i64 {
    if i == 0 {
        return 0;
    }
    let side = (if i > 0 { delta.d() } else { delta.e() }) as i64;
    i.abs() * (delta.denominator() as i64 / side)
}

fn ceil_deg_num(delta: &Interval, i: i64) -> Option<i64> {
    if !delta.in_cone(i) {
        return None;
    }
    if i == 0 {
        return Some(0);
    }
    let side = (if i > 0 { delta.d() } else { delta.e() }) as i64;
    Some((i.abs() + side - 1) / side * delta.denominator() as i64)
}

/// Coefficients of the splitting-series product attached to f, indexed by
/// the monomial exponent. Entry i is exact below the cutoff; exponents
/// whose coefficients vanish entirely below the cutoff are absent.
pub fn ef_gamma(
    f: &LaurentPoly,
    precision: u32,
    cutoff: i64,
) -> Result<(GaloisRing, BTreeMap<i64, PiSeries>)> {
    if cutoff < 1 {
        return Err(Error::TruncationShortfall { min_bound: 1 });
    }
    let delta = f.delta();
    let den = delta.denominator();
    let p = f.field().p();
    let ring = GaloisRing::new(p, precision, f.field().n())?;
    let pn = ring.scalar_modulus();

    let kmax = ((cutoff - 1) / den as i64).max(0) as usize;
    let lambda: Vec<u64> = artin_hasse(p, kmax + 1)
        .coeffs()
        .iter()
        .map(|r| rational_mod(r, pn))
        .collect();

    let max_u = f.coeffs().keys().map(|u| u.unsigned_abs()).max().unwrap_or(1) as i64;
    let reach = max_u * ((cutoff - 1) / den as i64) + 1;

    let mut gam: BTreeMap<i64, PiSeries> = BTreeMap::new();
    gam.insert(0, PiSeries::one(&ring, den, cutoff));
    for (&u, c) in f.coeffs() {
        let om = ring.teichmuller(c);
        let mut terms: Vec<(i64, i64, GRElem)> = Vec::new();
        let mut om_pow = ring.one();
        for (k, &lam) in lambda.iter().enumerate().take(kmax + 1) {
            if k > 0 {
                om_pow = ring.mul(&om_pow, &om);
            }
            let coeff = ring.scalar_mul(&om_pow, lam);
            if !ring.is_zero(&coeff) {
                terms.push((u * k as i64, k as i64 * den as i64, coeff));
            }
        }
        let mut next: BTreeMap<i64, PiSeries> = BTreeMap::new();
        for (&i, series) in &gam {
            for (dx, dnum, cf) in &terms {
                let ni = i + dx;
                if ni.abs() > reach {
                    continue;
                }
                let contrib = series.scale(&ring, cf).shift(*dnum).truncate(cutoff);
                if contrib.is_zero() {
                    continue;
                }
                let slot = next
                    .entry(ni)
                    .or_insert_with(|| PiSeries::zero(den, cutoff));
                *slot = slot.add(&ring, &contrib);
            }
        }
        next.retain(|_, s| !s.is_zero());
        gam = next;
    }

    for (&i, s) in &gam {
        let bound = ceil_deg_num(delta, i).ok_or(Error::OutsideCone { a: i })?;
        if s.eff_ord() < bound {
            return Err(Error::Property(format!(
                "expansion coefficient at exponent {i} has order {} below the bound {bound}",
                s.eff_ord()
            )));
        }
    }
    Ok((ring, gam))
}

/// The matrix of the b-fold iterate of the Dwork operator on the weighted
/// truncated basis, b being the ground-field degree over the prime field.
#[derive(Clone, Debug)]
pub struct DworkMatrix {
    ring: GaloisRing,
    den: u32,
    cutoff: i64,
    basis: Vec<i64>,
    entries: Vec<Vec<PiSeries>>,
}

impl DworkMatrix {
    pub fn basis(&self) -> &[i64] {
        &self.basis
    }

    pub fn ring(&self) -> &GaloisRing {
        &self.ring
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    pub fn entry(&self, r: usize, c: usize) -> &PiSeries {
        &self.entries[r][c]
    }

    fn mat_mul(&self, a: &[Vec<PiSeries>], b: &[Vec<PiSeries>]) -> Vec<Vec<PiSeries>> {
        let n = self.basis.len();
        let mut out = Vec::with_capacity(n);
        for r in 0..n {
            let mut row = Vec::with_capacity(n);
            for c in 0..n {
                let mut acc = PiSeries::zero(self.den, self.cutoff);
                for (t, a_rt) in a[r].iter().enumerate() {
                    if a_rt.is_zero() || b[t][c].is_zero() {
                        continue;
                    }
                    acc = acc.add(&self.ring, &a_rt.mul(&self.ring, &b[t][c]));
                }
                row.push(acc);
            }
            out.push(row);
        }
        out
    }

    /// Trace of the k-th power of the operator matrix.
    pub fn power_trace(&self, k: u32) -> PiSeries {
        assert!(k >= 1);
        let mut power = self.entries.clone();
        for _ in 1..k {
            power = self.mat_mul(&power, &self.entries);
        }
        let mut tr = PiSeries::zero(self.den, self.cutoff);
        for (i, row) in power.iter().enumerate() {
            tr = tr.add(&self.ring, &row[i]);
        }
        tr
    }

    /// Coefficients of the Fredholm determinant det(1 - Ms) up to the given
    /// index, via the symmetric-function recursion on power traces. The
    /// p-precision trust of coefficient k is the ring precision minus the
    /// valuation of k factorial.
    pub fn fredholm(&self, upto: usize) -> Result<Vec<FredholmCoeff>> {
        if upto > self.basis.len() {
            return Err(Error::Precondition {
                what: "determinant index exceeds the basis size",
                detail: format!("asked {upto}, basis has {}", self.basis.len()),
            });
        }
        let mut traces = Vec::with_capacity(upto);
        let mut power = self.entries.clone();
        for k in 0..upto {
            if k > 0 {
                power = self.mat_mul(&power, &self.entries);
            }
            let mut tr = PiSeries::zero(self.den, self.cutoff);
            for (i, row) in power.iter().enumerate() {
                tr = tr.add(&self.ring, &row[i]);
            }
            traces.push(tr);
        }
        let mut elem: Vec<PiSeries> = vec![PiSeries::one(&self.ring, self.den, self.cutoff)];
        let mut out = Vec::with_capacity(upto);
        for k in 1..=upto {
            let mut acc = PiSeries::zero(self.den, self.cutoff);
            for i in 1..=k {
                let term = elem[k - i].mul(&self.ring, &traces[i - 1]);
                acc = acc.add(&self.ring, &if i % 2 == 1 { term } else { term.neg(&self.ring) });
            }
            let ek = acc.divide_by_int(&self.ring, k as u64);
            for &num in ek.coeffs.keys() {
                assert_eq!(
                    num.rem_euclid(self.den as i64),
                    0,
                    "fractional exponent survived in a determinant coefficient"
                );
            }
            let lost = crate::galois::factorial_valuation(k as u64, self.ring.p());
            let p_trust = self.ring.precision().saturating_sub(lost as u32);
            out.push(FredholmCoeff {
                index: k,
                series: ek.clone(),
                p_trust,
            });
            elem.push(ek);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct FredholmCoeff {
    pub index: usize,
    pub series: PiSeries,
    pub p_trust: u32,
}

/// Assemble the operator matrix: expansion coefficients twisted by the
/// inverse Frobenius, weighted by the basis degrees, then composed b times
/// with entrywise twists so the result is linear over the extension ring.
pub fn psi_matrix(
    f: &LaurentPoly,
    bound: u32,
    precision: u32,
    cutoff: i64,
) -> Result<DworkMatrix> {
    let delta = f.delta().clone();
    let den = delta.denominator();
    let p = f.field().p();
    if cutoff < 1 {
        return Err(Error::TruncationShortfall { min_bound: 1 });
    }
    let min_bound = ((cutoff as u64).div_ceil(den as u64 * (p - 1)))
        .max(1)
        .try_into()
        .map_err(|_| Error::Unsupported("basis bound overflows".into()))?;
    if bound < min_bound {
        return Err(Error::TruncationShortfall { min_bound });
    }
    let (ring, gam) = ef_gamma(f, precision, cutoff)?;

    let max_abs = bound as i64 * delta.e().max(delta.d()) as i64;
    let basis: Vec<i64> = delta
        .cone_points(max_abs)
        .into_iter()
        .filter(|&i| weight_num(&delta, i) <= bound as i64 * den as i64)
        .collect();
    let n = basis.len();

    let zero = PiSeries::zero(den, cutoff);
    let mut single: Vec<Vec<PiSeries>> = Vec::with_capacity(n);
    for &i in &basis {
        let mut row = Vec::with_capacity(n);
        for &j in &basis {
            let idx = p as i64 * i - j;
            let entry = match gam.get(&idx) {
                Some(g) => {
                    let shifted = g
                        .map_values(|z| ring.frobenius_inv(z))
                        .shift(weight_num(&delta, j) - weight_num(&delta, i));
                    if let Some(bound_num) = ceil_deg_num(&delta, idx) {
                        let need = bound_num + weight_num(&delta, j) - weight_num(&delta, i);
                        assert!(
                            shifted.eff_ord() >= need.min(shifted.cutoff),
                            "entry order fell below the expansion estimate"
                        );
                        assert!(shifted.eff_ord() >= 0, "entry has a negative exponent");
                    }
                    shifted.truncate(cutoff)
                }
                None => zero.clone(),
            };
            row.push(entry);
        }
        single.push(row);
    }

    let mat = DworkMatrix {
        ring,
        den,
        cutoff,
        basis,
        entries: single,
    };
    let b = f.field().n();
    let mut total = mat.entries.clone();
    let mut twisted = mat.entries.clone();
    for _ in 1..b {
        twisted = twisted
            .iter()
            .map(|row| row.iter().map(|s| s.map_values(|z| mat.ring.frobenius_inv(z))).collect())
            .collect();
        total = mat.mat_mul(&total, &twisted);
    }
    Ok(DworkMatrix { entries: total, ..mat })
}

/// Outcome of comparing the operator trace against the brute-force
/// exponential sum scaled by the unit count.
#[derive(Clone, Debug)]
pub struct TraceFormulaReport {
    pub residual: TSeries,
    pub ok: bool,
    pub order: usize,
    pub precision: u32,
}

/// Cross-check the trace formula at level k: the trace of the k-th power of
/// the linearized operator must equal the exponential sum divided by the
/// number of units, as series in T. The two sides come from independent
/// pipelines.
pub fn verify_trace_formula(
    f: &LaurentPoly,
    k: u32,
    precision: u32,
    order: usize,
    budget: u64,
) -> Result<TraceFormulaReport> {
    if k == 0 {
        return Err(Error::Precondition {
            what: "trace level must be positive",
            detail: "k = 0".into(),
        });
    }
    let delta = f.delta();
    let den = delta.denominator();
    let p = f.field().p();
    let cutoff = den as i64 * order as i64;
    let bound = (order as u64).div_ceil(p - 1).max(1) as u32;
    let mat = psi_matrix(f, bound, precision, cutoff)?;
    let tr = mat.power_trace(k);

    let mut scalars = vec![0u64; order];
    for (&num, v) in tr.coeffs() {
        assert_eq!(
            num.rem_euclid(den as i64),
            0,
            "operator trace has a fractional exponent component"
        );
        assert!(
            v.iter().skip(1).all(|&c| c == 0),
            "operator trace coefficient is not a scalar"
        );
        let j = (num / den as i64) as usize;
        if j < order {
            scalars[j] = v[0];
        }
    }
    let pi = pi_tseries(p, order, precision)?;
    let mut lhs = TSeries::zero(p, precision, order);
    let mut pi_pow = TSeries::one(p, precision, order);
    for (j, &t) in scalars.iter().enumerate() {
        if j > 0 {
            pi_pow = pi_pow.mul(&pi);
        }
        lhs = lhs.add(&pi_pow.scalar_mul(t));
    }

    let pn = (0..precision).fold(1u64, |acc, _| acc * p);
    let mut qk = 1u64;
    for _ in 0..k * f.field().n() {
        qk = qk * (p % pn) % pn;
    }
    let unit_count = (qk + pn - 1) % pn;
    let inv = crate::galois::inv_mod_prime_power(unit_count, pn);
    let rhs = exp_sum_tseries(f, k, precision, order, budget)?.scalar_mul(inv);

    let residual = lhs.sub(&rhs);
    let ok = residual.coeffs().iter().all(|&c| c == 0);
    Ok(TraceFormulaReport {
        residual,
        ok,
        order,
        precision,
    })
}

/// Leading behavior of the minor indexed by a slope set: its order bound
/// from the arithmetic polygon and the residue of the coefficient sitting
/// exactly at the bound. Over the prime field that residue must reproduce
/// the genericity polynomial's value; over extensions the norm intervenes
/// and only the order statement is compared.
#[derive(Clone, Debug)]
pub struct MinorReport {
    pub m: usize,
    pub bound: u64,
    pub order_attained: bool,
    pub leading: FieldElem,
}

pub fn minor_leading(f: &LaurentPoly, m: usize, precision: u32) -> Result<MinorReport> {
    let delta = f.delta();
    let den = delta.denominator() as i64;
    let p = f.field().p();
    let set = slope_set(delta, p, m)?;
    let prof = arithmetic_profile(delta, p, m)?;
    let bound = prof[m];
    let cutoff = den * bound as i64 + den + 1;
    let (ring, gam) = ef_gamma(f, precision, cutoff)?;

    let k = set.members.len();
    let zero = PiSeries::zero(delta.denominator(), cutoff);
    let entry = |r: usize, c: usize| -> &PiSeries {
        let idx = p as i64 * set.members[r] - set.members[c];
        gam.get(&idx).unwrap_or(&zero)
    };
    let mut det = PiSeries::zero(delta.denominator(), cutoff);
    let mut perm: Vec<usize> = (0..k).collect();
    loop {
        let mut inversions = 0;
        for i in 0..k {
            for j in i + 1..k {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut term = PiSeries::one(&ring, delta.denominator(), cutoff);
        for (r, &c) in perm.iter().enumerate() {
            term = term.mul(&ring, entry(r, c));
            if term.is_zero() {
                break;
            }
        }
        det = det.add(&ring, &if inversions % 2 == 0 { term } else { term.neg(&ring) });
        if !next_permutation(&mut perm) {
            break;
        }
    }

    let target = den * bound as i64;
    if p > 3 * delta.denominator() as u64 && det.eff_ord() < target {
        return Err(Error::Property(format!(
            "minor at turning index {m} has order {} below the polygon bound {bound}",
            det.eff_ord()
        )));
    }
    let leading = match det.coeffs().get(&target) {
        Some(v) => ring.reduce(v),
        None => f.field().zero(),
    };
    let order_attained = !f.field().is_zero(&leading);
    Ok(MinorReport {
        m,
        bound,
        order_attained,
        leading,
    })
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Status of one turning point in a certification run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TurningStatus {
    /// The determinant coefficient sits at exactly the predicted order with
    /// a unit leading coefficient; the Newton polygon has a vertex here for
    /// every specialization of the deformation parameter at once.
    Granted { leading: FieldElem },
    /// The leading coefficient vanishes mod p: the polygon genuinely lies
    /// above the bound at this index.
    Denied,
    /// The truncation could not make up its mind; never treated as a pass.
    Inconclusive(String),
}

#[derive(Clone, Debug)]
pub struct NewtonCertificate {
    pub turning: Vec<(usize, TurningStatus)>,
    pub granted: bool,
}

/// For every turning point below the volume, decide whether the Fredholm
/// coefficient attains the arithmetic-polygon bound with a unit leading
/// term. Each decision is re-run with an enlarged basis until two
/// consecutive rounds agree; disagreement after the growth cap yields an
/// inconclusive status rather than a guess.
pub fn certify_turning_points(f: &LaurentPoly, precision: u32) -> Result<NewtonCertificate> {
    let delta = f.delta().clone();
    let p = f.field().p();
    let den = delta.denominator();
    if p <= 3 * den as u64 {
        return Err(Error::Precondition {
            what: "certification requires p above three times the denominator",
            detail: format!("p = {p}, denominator = {den}"),
        });
    }
    let a = f.field().n() as u64;
    let vol = delta.vol() as u64;
    let turning = product_turning_points(&delta, p)?;
    let mut statuses = Vec::new();
    let mut granted = true;
    for &m in &turning {
        let prof = arithmetic_profile(&delta, p, m)?;
        let target = (den as i64) * (a * prof[m]) as i64;
        let cutoff = target + den as i64 + 1;
        let lost = crate::galois::factorial_valuation(m as u64, p) as u32;
        if precision <= lost {
            statuses.push((
                m,
                TurningStatus::Inconclusive(format!(
                    "need ring precision above {lost} to read the coefficient mod p"
                )),
            ));
            granted = false;
            continue;
        }
        let b0 = ((cutoff as u64).div_ceil(den as u64 * (p - 1)))
            .max((m as u64).div_ceil(vol))
            .max(1) as u32;
        let mut bound = b0;
        let mut status = None;
        for _ in 0..4 {
            let mat = psi_matrix(f, bound, precision, cutoff)?;
            let c_now = mat.fredholm(m)?;
            let c_next = psi_matrix(f, bound + 1, precision, cutoff)?.fredholm(m)?;
            let stable = c_now
                .iter()
                .zip(&c_next)
                .all(|(x, y)| x.series == y.series);
            if stable {
                let cm = &c_now[m - 1].series;
                if cm.eff_ord() < target {
                    return Err(Error::Property(format!(
                        "determinant coefficient {m} has order {} below the proven bound",
                        cm.eff_ord()
                    )));
                }
                status = Some(match cm.coeffs().get(&target) {
                    Some(v) => {
                        let leading = mat.ring().reduce(v);
                        if f.field().is_zero(&leading) {
                            TurningStatus::Denied
                        } else {
                            TurningStatus::Granted { leading }
                        }
                    }
                    None => TurningStatus::Denied,
                });
                break;
            }
            bound *= 2;
        }
        let status = status.unwrap_or_else(|| {
            TurningStatus::Inconclusive("coefficients kept changing under basis growth".into())
        });
        if !matches!(status, TurningStatus::Granted { .. }) {
            granted = false;
        }
        statuses.push((m, status));
    }
    Ok(NewtonCertificate {
        turning: statuses,
        granted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::FieldDesc;
    use crate::galois::GaloisRing;
    use crate::hasse::{hasse_polynomial, hasse_product_eval};

    const BUDGET: u64 = crate::DEFAULT_BUDGET;

    fn prime_poly(p: u64, e: u32, d: u32, coeffs: &[(i64, u64)]) -> LaurentPoly {
        let field = FieldDesc::new(p, 1).unwrap();
        let iv = Interval::new(e, d).unwrap();
        let map = coeffs
            .iter()
            .map(|&(u, c)| (u, field.constant(c)))
            .collect();
        LaurentPoly::new(iv, field, map).unwrap()
    }

    #[test]
    fn single_term_expansion() {
        // one monomial: coefficient i is the splitting coefficient at i/d
        // times the matching power of the lifted coefficient
        let f = prime_poly(5, 0, 1, &[(1, 2)]);
        let (ring, gam) = ef_gamma(&f, 2, 8).unwrap();
        let om = ring.teichmuller(&f.field().constant(2));
        let lambda = artin_hasse(5, 8);
        for i in 0..8i64 {
            let expect = ring.scalar_mul(
                &ring.pow(&om, i as u128),
                rational_mod(&lambda.coeffs()[i as usize], 25),
            );
            match gam.get(&i) {
                Some(s) => {
                    assert_eq!(s.coeffs().len(), 1);
                    assert_eq!(s.coeffs().get(&i), Some(&expect));
                }
                None => assert!(ring.is_zero(&expect)),
            }
        }
    }

    #[test]
    fn kloosterman_constant_coefficient() {
        // gamma_0 = sum over k of lambda_k^2 pi^{2k} when both coefficients
        // are 1
        let f = prime_poly(5, 1, 1, &[(1, 1), (-1, 1)]);
        let (_ring, gam) = ef_gamma(&f, 1, 9).unwrap();
        let g0 = gam.get(&0).unwrap();
        assert_eq!(g0.coeffs().get(&0), Some(&vec![1]));
        assert_eq!(g0.coeffs().get(&2), Some(&vec![1]));
        // lambda_2 = 1/2 = 3 mod 5, squared is 4
        assert_eq!(g0.coeffs().get(&4), Some(&vec![4]));
    }

    #[test]
    fn diagonal_trace_of_linear_map() {
        let f = prime_poly(5, 0, 1, &[(1, 1)]);
        let mat = psi_matrix(&f, 2, 2, 6).unwrap();
        let tr = mat.power_trace(1);
        // 1 + lambda_4 pi^4, with 1/24 = 24 mod 25
        let expected: Vec<(i64, Vec<u64>)> = vec![(0, vec![1]), (4, vec![24])];
        let got: Vec<(i64, Vec<u64>)> =
            tr.coeffs().iter().map(|(&k, v)| (k, v.clone())).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn truncation_shortfall_names_the_bound() {
        let f = prime_poly(5, 0, 1, &[(1, 1)]);
        match psi_matrix(&f, 1, 1, 12) {
            Err(Error::TruncationShortfall { min_bound }) => assert_eq!(min_bound, 3),
            other => panic!("expected shortfall, got {other:?}"),
        }
    }

    #[test]
    fn trace_formula_linear_case() {
        let f = prime_poly(5, 0, 1, &[(1, 1)]);
        let r = verify_trace_formula(&f, 1, 2, 6, BUDGET).unwrap();
        assert!(r.ok, "residual {:?}", r.residual.coeffs());
    }

    #[test]
    fn trace_formula_quadratic_level_two() {
        let f = prime_poly(7, 0, 2, &[(2, 1), (1, 1)]);
        for k in [1, 2] {
            let r = verify_trace_formula(&f, k, 1, 4, BUDGET).unwrap();
            assert!(r.ok, "k = {k}: residual {:?}", r.residual.coeffs());
        }
    }

    #[test]
    fn trace_formula_kloosterman() {
        let f = prime_poly(5, 1, 1, &[(1, 2), (-1, 3)]);
        let r = verify_trace_formula(&f, 1, 1, 4, BUDGET).unwrap();
        assert!(r.ok, "residual {:?}", r.residual.coeffs());
    }

    #[test]
    fn fredholm_stability_under_basis_growth() {
        let f = prime_poly(5, 1, 1, &[(1, 1), (-1, 1)]);
        let a = psi_matrix(&f, 2, 1, 8).unwrap().fredholm(2).unwrap();
        let b = psi_matrix(&f, 3, 1, 8).unwrap().fredholm(2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.series, y.series);
        }
    }

    #[test]
    fn fredholm_orders_respect_polygon_bound() {
        let f = prime_poly(11, 0, 3, &[(3, 1), (1, 1)]);
        let coeffs = psi_matrix(&f, 2, 1, 31).unwrap().fredholm(3).unwrap();
        let delta = Interval::new(0, 3).unwrap();
        let prof = arithmetic_profile(&delta, 11, 3).unwrap();
        for c in &coeffs {
            let bound = 3 * prof[c.index] as i64;
            assert!(
                c.series.eff_ord() >= bound,
                "c_{} order {} < {}",
                c.index,
                c.series.eff_ord(),
                bound
            );
        }
    }

    #[test]
    fn minor_matches_genericity_polynomial() {
        let delta = Interval::new(0, 3).unwrap();
        let f = prime_poly(11, 0, 3, &[(3, 1), (1, 1)]);
        let r = minor_leading(&f, 2, 1).unwrap();
        assert_eq!(r.bound, 4);
        assert!(r.order_attained);
        let h = hasse_polynomial(&delta, 11, 2).unwrap();
        assert_eq!(r.leading, h.eval(f.field(), f.coeffs()));
        assert_eq!(f.field().value(&r.leading), 2);

        let g = prime_poly(11, 0, 3, &[(3, 1), (2, 1), (1, 4)]);
        let r = minor_leading(&g, 2, 1).unwrap();
        assert!(!r.order_attained);
        assert!(g.field().is_zero(&r.leading));
    }

    #[test]
    fn first_minor_is_unit() {
        let f = prime_poly(7, 0, 2, &[(2, 1), (1, 1)]);
        let r = minor_leading(&f, 1, 1).unwrap();
        assert_eq!(r.bound, 0);
        assert!(r.order_attained);
        assert_eq!(f.field().value(&r.leading), 1);
    }

    #[test]
    fn certification_grants_generic_cases() {
        let f = prime_poly(7, 0, 2, &[(2, 1), (1, 1)]);
        let cert = certify_turning_points(&f, 1).unwrap();
        assert!(cert.granted);
        assert_eq!(cert.turning.len(), 1);

        let f = prime_poly(11, 0, 3, &[(3, 1), (1, 1)]);
        let cert = certify_turning_points(&f, 1).unwrap();
        assert!(cert.granted);
    }

    #[test]
    fn certification_denies_degenerate_cubic() {
        let f = prime_poly(11, 0, 3, &[(3, 1), (2, 1), (1, 4)]);
        let cert = certify_turning_points(&f, 1).unwrap();
        assert!(!cert.granted);
        let m2 = cert.turning.iter().find(|(m, _)| *m == 2).unwrap();
        assert_eq!(m2.1, TurningStatus::Denied);
        // the certificate must agree with the genericity product
        let cert_h = hasse_product_eval(f.delta(), 11, &f).unwrap();
        assert!(!cert_h.nonzero);
    }

    #[test]
    fn certification_rejects_small_primes() {
        let f = prime_poly(5, 0, 2, &[(2, 1)]);
        assert!(matches!(
            certify_turning_points(&f, 1),
            Err(Error::Precondition { .. })
        ));
    }

    #[test]
    fn series_trust_tracking() {
        let ring = GaloisRing::new(5, 2, 1).unwrap();
        let mut a = PiSeries::zero(1, 10);
        a.insert_add(&ring, 2, vec![3]);
        let mut b = PiSeries::zero(1, 4);
        b.insert_add(&ring, 1, vec![2]);
        let prod = a.mul(&ring, &b);
        // error floor: min(10 + 1, 4 + 2, 10 + 4) = 6
        assert_eq!(prod.cutoff(), 6);
        assert_eq!(prod.coeffs().get(&3), Some(&vec![6]));
        let shifted = prod.shift(-3);
        assert_eq!(shifted.cutoff(), 3);
        assert_eq!(shifted.ord(), Some(0));
    }
}
