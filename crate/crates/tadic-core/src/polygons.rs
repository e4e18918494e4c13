//! Convex polygons attached to an integral interval [-e, d] containing 0.
//!
//! Three polygons matter downstream: the Hodge polygon (slopes are the
//! degrees of the lattice points of the cone, in ascending order), the
//! arithmetic polygon (slopes are the integer values computed by
//! [`arithmetic_slope`]), and Newton polygons obtained as lower convex
//! hulls of valuation data. Everything here is exact rational arithmetic.

use crate::error::Error;
use crate::ff::is_prime;
use crate::Result;
use num::{BigInt, BigRational, One, Zero};
use std::fmt;

/// Integral interval [-e, d] with e + d >= 1. Exponents of admissible
/// Laurent polynomials live here; its cone drives all degree bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    e: u32,
    d: u32,
}

/// Degree of a lattice point relative to the interval: a/d on the positive
/// side, |a|/e on the negative side, infinite outside the cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeValue {
    Finite(BigRational),
    Infinite,
}

impl DegreeValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DegreeValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            DegreeValue::Finite(r) => Some(r),
            DegreeValue::Infinite => None,
        }
    }
}

impl Interval {
    /// Interval [-e, d]. Rejects the degenerate point interval {0}.
    pub fn new(e: u32, d: u32) -> Result<Self> {
        if e == 0 && d == 0 {
            return Err(Error::Precondition {
                what: "interval",
                detail: "both endpoints are zero".into(),
            });
        }
        Ok(Interval { e, d })
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Total length e + d, the generic degree of the L-function.
    pub fn vol(&self) -> u32 {
        self.e + self.d
    }

    /// Least common multiple of the nonzero endpoints; denominators of all
    /// degrees divide this.
    pub fn denominator(&self) -> u32 {
        match (self.e, self.d) {
            (0, d) => d,
            (e, 0) => e,
            (e, d) => e / gcd_u32(e, d) * d,
        }
    }

    /// Whether a lies in the cone spanned by the interval.
    pub fn in_cone(&self, a: i64) -> bool {
        if a > 0 {
            self.d > 0
        } else if a < 0 {
            self.e > 0
        } else {
            true
        }
    }

    /// Endpoint of the side a lies on (d for a > 0, e for a < 0).
    fn side(&self, a: i64) -> u32 {
        if a >= 0 {
            self.d
        } else {
            self.e
        }
    }

    pub fn degree(&self, a: i64) -> DegreeValue {
        if !self.in_cone(a) {
            return DegreeValue::Infinite;
        }
        if a == 0 {
            return DegreeValue::Finite(BigRational::zero());
        }
        let side = self.side(a) as i64;
        DegreeValue::Finite(BigRational::new(BigInt::from(a.abs()), BigInt::from(side)))
    }

    /// Degree scaled by the common denominator, as an exact integer.
    pub fn degree_num(&self, a: i64) -> Option<i64> {
        if !self.in_cone(a) {
            return None;
        }
        if a == 0 {
            return Some(0);
        }
        let side = self.side(a) as i64;
        Some(a.abs() * (self.denominator() as i64 / side))
    }

    /// Exponents of the interval itself, ascending.
    pub fn exponents(&self) -> impl Iterator<Item = i64> {
        (-(self.e as i64))..=(self.d as i64)
    }

    /// Lattice points of the cone in the canonical enumeration order:
    /// 0, 1, -1, 2, -2, ... restricted to the cone.
    pub fn cone_points(&self, max_abs: i64) -> Vec<i64> {
        let mut out = vec![0];
        for t in 1..=max_abs {
            if self.d > 0 {
                out.push(t);
            }
            if self.e > 0 {
                out.push(-t);
            }
        }
        out
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[-{}..{}]", self.e, self.d)
    }
}

fn gcd_u32(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd_u32(b, a % b)
    }
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

fn check_cone(delta: &Interval, a: i64) -> Result<()> {
    if !delta.in_cone(a) {
        return Err(Error::OutsideCone { a });
    }
    Ok(())
}

/// Whether the arithmetic slope at a drops one below the ceiling.
///
/// The drop happens exactly when some lattice point i on the same side of
/// the cone has degree strictly below the fractional part of deg(a) while
/// p*i reproduces that fractional part. Writing r = |a| mod side, this is
/// an integer condition: some i in 1..r satisfies p*i = r (mod side).
pub fn slope_drop(delta: &Interval, p: u64, a: i64) -> Result<bool> {
    check_prime(p)?;
    check_cone(delta, a)?;
    if a == 0 {
        return Ok(false);
    }
    let side = delta.side(a) as u64;
    let r = a.unsigned_abs() % side;
    if r == 0 {
        return Ok(false);
    }
    Ok((1..r).any(|i| (p % side) * i % side == r))
}

/// Same decision computed from the literal fractional-part comparisons,
/// scanning one full period of the side. Retained as a diagnostic; the two
/// readings provably agree, and [`slope_drop_diagnostic`] checks it.
fn slope_drop_fractional(delta: &Interval, p: u64, a: i64) -> bool {
    if a == 0 {
        return false;
    }
    let side = delta.side(a) as i64;
    let frac = |x: &BigRational| -> BigRational { x - x.floor() };
    let deg_a = match delta.degree(a) {
        DegreeValue::Finite(r) => r,
        DegreeValue::Infinite => return false,
    };
    let target = frac(&deg_a);
    if target.is_zero() {
        return false;
    }
    let sgn: i64 = if a > 0 { 1 } else { -1 };
    (1..=side).any(|t| {
        let i = sgn * t;
        let deg_i = match delta.degree(i) {
            DegreeValue::Finite(r) => r,
            DegreeValue::Infinite => return false,
        };
        let deg_pi = match delta.degree(p as i64 * i) {
            DegreeValue::Finite(r) => r,
            DegreeValue::Infinite => return false,
        };
        frac(&deg_i) < target && frac(&deg_pi) == target
    })
}

/// Both readings of the drop condition. They coincide on the fundamental
/// period; a mismatch would indicate a bookkeeping bug.
pub fn slope_drop_diagnostic(delta: &Interval, p: u64, a: i64) -> Result<(bool, bool)> {
    let literal = slope_drop(delta, p, a)?;
    let fractional = slope_drop_fractional(delta, p, a);
    Ok((literal, fractional))
}

/// Slope contribution of the lattice point a to the arithmetic polygon:
/// ceil((p-1) deg(a)) minus the drop indicator. Zero at a = 0.
pub fn arithmetic_slope(delta: &Interval, p: u64, a: i64) -> Result<u64> {
    check_prime(p)?;
    check_cone(delta, a)?;
    if a == 0 {
        return Ok(0);
    }
    let side = delta.side(a) as u128;
    let ceil = ((p as u128 - 1) * a.unsigned_abs() as u128).div_ceil(side) as u64;
    let drop = slope_drop(delta, p, a)? as u64;
    Ok(ceil - drop)
}

/// Convex polygon given by its ascending slope sequence; the value at an
/// integer k is the sum of the first k slopes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexPolygon {
    slopes: Vec<BigRational>,
}

impl ConvexPolygon {
    pub fn new(slopes: Vec<BigRational>) -> Result<Self> {
        for w in slopes.windows(2) {
            if w[0] > w[1] {
                return Err(Error::Precondition {
                    what: "polygon slopes",
                    detail: format!("not ascending: {} then {}", w[0], w[1]),
                });
            }
        }
        Ok(ConvexPolygon { slopes })
    }

    pub fn from_integer_slopes(slopes: Vec<u64>) -> Result<Self> {
        Self::new(
            slopes
                .into_iter()
                .map(|s| BigRational::from_integer(BigInt::from(s)))
                .collect(),
        )
    }

    pub fn slopes(&self) -> &[BigRational] {
        &self.slopes
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn slope(&self, k: usize) -> &BigRational {
        &self.slopes[k]
    }

    /// Value at integer k, the sum of the first k slopes.
    pub fn value(&self, k: usize) -> BigRational {
        assert!(k <= self.slopes.len(), "polygon not defined at {k}");
        self.slopes[..k].iter().sum()
    }

    /// Indices k >= 1 where the slope strictly increases across k.
    pub fn turning_points(&self) -> Vec<usize> {
        (1..self.slopes.len())
            .filter(|&k| self.slopes[k - 1] < self.slopes[k])
            .collect()
    }

    /// Polygon with every slope multiplied by c.
    pub fn scale(&self, c: u64) -> ConvexPolygon {
        let c = BigInt::from(c);
        ConvexPolygon {
            slopes: self.slopes.iter().map(|s| s * &c).collect(),
        }
    }

    pub fn truncate(&self, len: usize) -> ConvexPolygon {
        ConvexPolygon {
            slopes: self.slopes[..len.min(self.slopes.len())].to_vec(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slopes": self.slopes.iter().map(rational_string).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v
            .get("slopes")
            .and_then(|s| s.as_array())
            .ok_or(Error::Precondition {
                what: "polygon json",
                detail: "missing slopes array".into(),
            })?;
        let mut slopes = Vec::with_capacity(arr.len());
        for s in arr {
            let s = s.as_str().ok_or(Error::Precondition {
                what: "polygon json",
                detail: "slope entries must be strings".into(),
            })?;
            slopes.push(parse_rational(s)?);
        }
        ConvexPolygon::new(slopes)
    }

    /// Rows (k, slope_k, value_k) for k = 1..=len, with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,slope,value\n");
        let mut value = BigRational::zero();
        for (i, s) in self.slopes.iter().enumerate() {
            value += s;
            out.push_str(&format!(
                "{},{},{}\n",
                i + 1,
                rational_string(s),
                rational_string(&value)
            ));
        }
        out
    }
}

pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |_| Error::Precondition {
        what: "rational",
        detail: format!("cannot parse {s:?}"),
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(bad)?;
            let d: BigInt = d.trim().parse().map_err(bad)?;
            if d.is_zero() {
                return Err(Error::Precondition {
                    what: "rational",
                    detail: "zero denominator".into(),
                });
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = s.trim().parse().map_err(bad)?;
            Ok(BigRational::from_integer(n))
        }
    }
}

/// The first `count` cone lattice points in ascending degree order,
/// positive side first on ties. Starts with 0.
pub fn degree_ordered_points(delta: &Interval, count: usize) -> Vec<i64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(0i64);
    let (mut ip, mut ineg) = (1u64, 1u64);
    while out.len() < count {
        // cross-multiplied comparison of ip/d vs ineg/e
        let take_pos = match (delta.d > 0, delta.e > 0) {
            (true, true) => {
                ip as u128 * delta.e as u128 <= ineg as u128 * delta.d as u128
            }
            (true, false) => true,
            (false, true) => false,
            (false, false) => unreachable!("interval has a nonzero endpoint"),
        };
        if take_pos {
            out.push(ip as i64);
            ip += 1;
        } else {
            out.push(-(ineg as i64));
            ineg += 1;
        }
    }
    out
}

/// Hodge polygon of the interval: the `length` smallest degrees of cone
/// lattice points, ascending. Ties take the positive side first.
pub fn hodge_polygon(delta: &Interval, length: usize) -> ConvexPolygon {
    let slopes = degree_ordered_points(delta, length)
        .into_iter()
        .map(|a| match delta.degree(a) {
            DegreeValue::Finite(r) => r,
            DegreeValue::Infinite => unreachable!("cone points have finite degree"),
        })
        .collect();
    ConvexPolygon { slopes }
}

/// Partial sums of the slope contributions along the degree-ordered
/// enumeration of cone points: entry m is the sum over the first m points.
/// This is the exact quantity the lower-bound arguments control. It agrees
/// with the values of the sorted polygon whenever the enumeration already
/// produces ascending contributions, which holds for p large relative to
/// the interval but can fail for small p.
pub fn arithmetic_profile(delta: &Interval, p: u64, length: usize) -> Result<Vec<u64>> {
    let points = degree_ordered_points(delta, length);
    let mut out = Vec::with_capacity(length + 1);
    let mut acc = 0u64;
    out.push(acc);
    for a in points {
        acc += arithmetic_slope(delta, p, a)?;
        out.push(acc);
    }
    Ok(out)
}

/// Arithmetic polygon: the `length` smallest arithmetic slopes over the
/// cone lattice points, sorted ascending.
pub fn arithmetic_polygon(delta: &Interval, p: u64, length: usize) -> Result<ConvexPolygon> {
    Ok(arithmetic_polygon_diag(delta, p, length)?.0)
}

/// Arithmetic polygon plus a flag telling whether the canonical |a|-order
/// enumeration already produced the slopes in ascending order. The flag is
/// diagnostic only; the polygon is always sorted.
pub fn arithmetic_polygon_diag(
    delta: &Interval,
    p: u64,
    length: usize,
) -> Result<(ConvexPolygon, bool)> {
    check_prime(p)?;
    if length == 0 {
        return Ok((ConvexPolygon { slopes: vec![] }, true));
    }
    let side_max = delta.e.max(delta.d) as i64;
    let mut reach = side_max * (length as i64).max(2);
    loop {
        let points = delta.cone_points(reach);
        let natural: Vec<u64> = points
            .iter()
            .map(|&a| arithmetic_slope(delta, p, a))
            .collect::<Result<_>>()?;
        let mut sorted = natural.clone();
        sorted.sort_unstable();
        if sorted.len() >= length {
            // Any excluded point has slope at least ceil((p-1)(reach+1)/side) - 1
            // on its side; if the cut is below that on every active side, the
            // prefix is final.
            let excluded_floor = [delta.d, delta.e]
                .iter()
                .filter(|&&s| s > 0)
                .map(|&s| {
                    ((p as u128 - 1) * (reach as u128 + 1)).div_ceil(s as u128) as u64 - 1
                })
                .min()
                .expect("interval has a nonzero endpoint");
            if sorted[length - 1] <= excluded_floor {
                let agrees = natural[..length] == sorted[..length];
                let poly = ConvexPolygon::from_integer_slopes(sorted[..length].to_vec())?;
                return Ok((poly, agrees));
            }
        }
        reach *= 2;
    }
}

/// Lower convex hull of valuation points. Each point is (x, value) with
/// the values rational or infinite; infinite points are skipped. The point
/// at x = 0 must be present and finite.
pub fn newton_polygon_from_points(
    points: &[(i64, Option<BigRational>)],
) -> Result<ConvexPolygon> {
    let mut finite: Vec<(i64, BigRational)> = Vec::new();
    let mut seen_zero = false;
    for (x, v) in points {
        if *x < 0 {
            return Err(Error::Precondition {
                what: "newton polygon points",
                detail: format!("negative abscissa {x}"),
            });
        }
        if let Some(v) = v {
            if *x == 0 {
                seen_zero = true;
            }
            finite.push((*x, v.clone()));
        } else if *x == 0 {
            return Err(Error::Precondition {
                what: "newton polygon points",
                detail: "value at x = 0 is infinite".into(),
            });
        }
    }
    if !seen_zero {
        return Err(Error::Precondition {
            what: "newton polygon points",
            detail: "missing the point at x = 0".into(),
        });
    }
    finite.sort_by(|a, b| a.0.cmp(&b.0));
    for w in finite.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Precondition {
                what: "newton polygon points",
                detail: format!("duplicate abscissa {}", w[0].0),
            });
        }
    }

    // monotone chain, lower hull
    let mut hull: Vec<(i64, BigRational)> = Vec::new();
    for (x, y) in finite {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2].clone();
            let (x2, y2) = hull[hull.len() - 1].clone();
            // keep (x2,y2) only if it turns left: slope(1->2) < slope(2->new)
            let lhs = (&y2 - &y1) * BigRational::from_integer(BigInt::from(x - x2));
            let rhs = (&y - &y2) * BigRational::from_integer(BigInt::from(x2 - x1));
            if lhs > rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }

    let mut slopes = Vec::new();
    for w in hull.windows(2) {
        let (x1, y1) = &w[0];
        let (x2, y2) = &w[1];
        let run = x2 - x1;
        let slope = (y2 - y1) / BigRational::from_integer(BigInt::from(run));
        for _ in 0..run {
            slopes.push(slope.clone());
        }
    }
    ConvexPolygon::new(slopes)
}

/// Pointwise comparison of two polygons over the integers 0..=range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompareReport {
    /// First polygon lies on or above the second at every integer.
    pub lies_above: bool,
    /// Values agree at every integer in range.
    pub equal: bool,
    /// Index of the first unit interval whose slopes differ, if any.
    pub first_divergence: Option<usize>,
}

pub fn polygon_compare(p: &ConvexPolygon, q: &ConvexPolygon, range: usize) -> Result<CompareReport> {
    if p.len() < range || q.len() < range {
        return Err(Error::Precondition {
            what: "polygon comparison",
            detail: format!(
                "range {} exceeds a polygon length ({}, {})",
                range,
                p.len(),
                q.len()
            ),
        });
    }
    let mut lies_above = true;
    let mut equal = true;
    let (mut vp, mut vq) = (BigRational::zero(), BigRational::zero());
    let mut first_divergence = None;
    for k in 0..range {
        if p.slope(k) != q.slope(k) && first_divergence.is_none() {
            first_divergence = Some(k);
        }
        vp += p.slope(k);
        vq += q.slope(k);
        if vp != vq {
            equal = false;
        }
        if vp < vq {
            lies_above = false;
        }
    }
    Ok(CompareReport {
        lies_above,
        equal,
        first_divergence,
    })
}

/// Minimal standalone SVG overlaying labeled polygons over 0..=range.
pub fn svg_compare(polys: &[(&str, &ConvexPolygon)], range: usize) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 48.0;
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

    let approx = |r: &BigRational| -> f64 {
        let n = r.numer();
        let d = r.denom();
        let nf: f64 = n.to_string().parse().unwrap_or(0.0);
        let df: f64 = d.to_string().parse().unwrap_or(1.0);
        nf / df
    };
    let mut ymax = 1.0f64;
    for (_, poly) in polys {
        let k = range.min(poly.len());
        ymax = ymax.max(approx(&poly.value(k)));
    }
    let sx = (W - 2.0 * PAD) / range.max(1) as f64;
    let sy = (H - 2.0 * PAD) / ymax;
    let px = |k: f64| PAD + k * sx;
    let py = |v: f64| H - PAD - v * sy;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    out.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n",
        px(0.0), py(0.0), px(range as f64), py(0.0),
        px(0.0), py(0.0), px(0.0), py(ymax),
    ));
    for k in 0..=range {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">{}</text>\n",
            px(k as f64),
            H - PAD + 16.0,
            k
        ));
    }
    for (idx, (label, poly)) in polys.iter().enumerate() {
        let color = COLORS[idx % COLORS.len()];
        let k_max = range.min(poly.len());
        let pts: Vec<String> = (0..=k_max)
            .map(|k| format!("{:.2},{:.2}", px(k as f64), py(approx(&poly.value(k)))))
            .collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            pts.join(" "),
            color
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{}\">{}</text>\n",
            PAD + 8.0,
            PAD + 16.0 * (idx as f64 + 1.0),
            color,
            label
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Outcome of comparing the arithmetic profile against (p-1) times the
/// Hodge polygon over [0, range].
#[derive(Debug, Clone)]
pub struct HodgeBoundReport {
    /// Profile value >= scaled Hodge value at every integer of [0, range].
    pub dominates: bool,
    /// Values agree at vol. Holds if and only if p divides neither
    /// endpoint: multiplication by p then permutes the fractional degrees
    /// within each side, which is what the touching argument needs.
    pub equal_at_vol: bool,
    /// The profile agrees with the sorted polygon on [0, range], meaning
    /// the degree-ordered slope contributions were already ascending.
    pub agrees_with_polygon: bool,
}

/// Compare the arithmetic profile with the scaled Hodge polygon, and the
/// profile with the sorted polygon, over [0, range].
pub fn hodge_bound_report(delta: &Interval, p: u64, range: usize) -> Result<HodgeBoundReport> {
    let vol = delta.vol() as usize;
    let length = range.max(vol);
    let profile = arithmetic_profile(delta, p, length)?;
    let polygon = arithmetic_polygon(delta, p, length)?;
    let hodge = hodge_polygon(delta, length).scale(p - 1);
    let mut dominates = true;
    let mut agrees_with_polygon = true;
    for k in 0..=range {
        let prof = BigRational::from_integer(BigInt::from(profile[k]));
        if prof < hodge.value(k) {
            dominates = false;
        }
        if prof != polygon.value(k) {
            agrees_with_polygon = false;
        }
    }
    let equal_at_vol =
        BigRational::from_integer(BigInt::from(profile[vol])) == hodge.value(vol);
    Ok(HodgeBoundReport {
        dominates,
        equal_at_vol,
        agrees_with_polygon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn interval(e: u32, d: u32) -> Interval {
        Interval::new(e, d).unwrap()
    }

    #[test]
    fn degree_values() {
        let delta = interval(0, 3);
        assert_eq!(delta.degree(2), DegreeValue::Finite(rat(2, 3)));
        assert_eq!(delta.degree(-1), DegreeValue::Infinite);
        assert_eq!(delta.degree(0), DegreeValue::Finite(rat(0, 1)));
        let sym = interval(1, 1);
        assert_eq!(sym.degree(-5), DegreeValue::Finite(rat(5, 1)));
        assert_eq!(interval(2, 3).degree_num(-1), Some(3));
        assert_eq!(interval(2, 3).degree_num(1), Some(2));
    }

    #[test]
    fn interval_rejects_point() {
        assert!(Interval::new(0, 0).is_err());
    }

    #[test]
    fn slope_drop_examples() {
        let delta = interval(0, 3);
        assert!(slope_drop(&delta, 5, 2).unwrap());
        assert!(!slope_drop(&delta, 5, 1).unwrap());
        assert!(!slope_drop(&delta, 5, 0).unwrap());
        assert!(slope_drop(&delta, 5, -1).is_err());
        assert!(slope_drop(&delta, 6, 2).is_err());
    }

    #[test]
    fn slope_drop_periodic_in_a() {
        for d in 1..=6u32 {
            let delta = interval(0, d);
            for p in [2u64, 3, 5, 7, 11, 13] {
                for a in 1..=(4 * d as i64) {
                    assert_eq!(
                        slope_drop(&delta, p, a).unwrap(),
                        slope_drop(&delta, p, a + d as i64).unwrap(),
                        "period broken at d={d} p={p} a={a}"
                    );
                }
            }
        }
    }

    #[test]
    fn slope_drop_vanishes_when_p_is_one_mod_side() {
        for (e, d, p) in [(0u32, 4u32, 5u64), (0, 3, 7), (0, 6, 13), (5, 0, 11)] {
            let delta = interval(e, d);
            let side = e.max(d) as i64;
            for t in 1..=side {
                let a = if d > 0 { t } else { -t };
                assert!(!slope_drop(&delta, p, a).unwrap());
            }
        }
    }

    #[test]
    fn slope_drop_readings_agree() {
        for (e, d) in [(0u32, 3u32), (1, 1), (2, 3), (1, 6), (4, 0)] {
            let delta = interval(e, d);
            for p in [2u64, 3, 5, 7, 11, 13, 17] {
                for a in delta.cone_points(3 * delta.vol() as i64) {
                    let (lit, frac) = slope_drop_diagnostic(&delta, p, a).unwrap();
                    assert_eq!(lit, frac, "readings differ at {delta} p={p} a={a}");
                }
            }
        }
    }

    #[test]
    fn arithmetic_slope_examples() {
        let delta = interval(0, 3);
        assert_eq!(arithmetic_slope(&delta, 5, 2).unwrap(), 2);
        assert_eq!(arithmetic_slope(&delta, 5, 0).unwrap(), 0);
        assert_eq!(arithmetic_slope(&delta, 11, 2).unwrap(), 6);
    }

    #[test]
    fn hodge_polygon_examples() {
        let h = hodge_polygon(&interval(0, 3), 4);
        assert_eq!(h.slopes(), &[rat(0, 1), rat(1, 3), rat(2, 3), rat(1, 1)]);
        let h = hodge_polygon(&interval(1, 1), 3);
        assert_eq!(h.slopes(), &[rat(0, 1), rat(1, 1), rat(1, 1)]);
        assert_eq!(h.value(3), rat(2, 1));
    }

    #[test]
    fn arithmetic_polygon_examples() {
        let p = arithmetic_polygon(&interval(0, 3), 5, 4).unwrap();
        assert_eq!(p.slopes(), &[rat(0, 1), rat(2, 1), rat(2, 1), rat(4, 1)]);
        assert_eq!(p.value(3), rat(4, 1));
        for pr in [5u64, 7] {
            let poly = arithmetic_polygon(&interval(0, 1), pr, 3).unwrap();
            let want: Vec<BigRational> = [0, pr - 1, 2 * (pr - 1)]
                .iter()
                .map(|&s| rat(s as i64, 1))
                .collect();
            assert_eq!(poly.slopes(), &want[..]);
        }
        let p = arithmetic_polygon(&interval(1, 1), 5, 5).unwrap();
        assert_eq!(
            p.slopes(),
            &[rat(0, 1), rat(4, 1), rat(4, 1), rat(8, 1), rat(8, 1)]
        );
        let p = arithmetic_polygon(&interval(0, 3), 11, 4).unwrap();
        assert_eq!(
            p.slopes(),
            &[rat(0, 1), rat(4, 1), rat(6, 1), rat(10, 1)]
        );
    }

    #[test]
    fn arithmetic_polygon_natural_order_diag() {
        let (_, agrees) = arithmetic_polygon_diag(&interval(0, 3), 5, 6).unwrap();
        assert!(agrees);
        // On [-1, 6] with p = 7 the point -1 carries slope 6 before the
        // positive side reaches it, so the natural order is not sorted.
        let (_, agrees) = arithmetic_polygon_diag(&interval(1, 6), 7, 4).unwrap();
        assert!(!agrees);
    }

    #[test]
    fn newton_polygon_examples() {
        let np = newton_polygon_from_points(&[
            (0, Some(rat(0, 1))),
            (1, Some(rat(0, 1))),
            (2, Some(rat(4, 1))),
        ])
        .unwrap();
        assert_eq!(np.slopes(), &[rat(0, 1), rat(4, 1)]);

        let np = newton_polygon_from_points(&[
            (0, Some(rat(0, 1))),
            (1, Some(rat(5, 1))),
            (2, Some(rat(4, 1))),
        ])
        .unwrap();
        assert_eq!(np.slopes(), &[rat(2, 1), rat(2, 1)]);

        let np = newton_polygon_from_points(&[
            (0, Some(rat(0, 1))),
            (1, None),
            (2, Some(rat(4, 1))),
        ])
        .unwrap();
        assert_eq!(np.slopes(), &[rat(2, 1), rat(2, 1)]);

        assert!(newton_polygon_from_points(&[(1, Some(rat(1, 1)))]).is_err());
    }

    #[test]
    fn turning_point_examples() {
        let p = ConvexPolygon::new(vec![rat(0, 1), rat(1, 2), rat(1, 2), rat(2, 1)]).unwrap();
        assert_eq!(p.turning_points(), vec![1, 3]);
        let flat = ConvexPolygon::new(vec![rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap();
        assert!(flat.turning_points().is_empty());
        let arith = arithmetic_polygon(&interval(0, 3), 11, 4).unwrap();
        assert_eq!(arith.turning_points(), vec![1, 2, 3]);
    }

    #[test]
    fn compare_examples() {
        let delta = interval(0, 3);
        let arith = arithmetic_polygon(&delta, 5, 4).unwrap();
        let hodge = hodge_polygon(&delta, 4).scale(4);
        let report = polygon_compare(&arith, &hodge, 3).unwrap();
        assert!(report.lies_above);
        assert!(!report.equal);
        assert_eq!(report.first_divergence, Some(1));
        assert_eq!(arith.value(3), hodge.value(3));

        let report = polygon_compare(&arith, &arith, 4).unwrap();
        assert!(report.lies_above && report.equal);
        assert_eq!(report.first_divergence, None);

        let below = ConvexPolygon::new(vec![rat(0, 1), rat(1, 1)]).unwrap();
        let above = ConvexPolygon::new(vec![rat(1, 1), rat(1, 1)]).unwrap();
        let report = polygon_compare(&below, &above, 2).unwrap();
        assert!(!report.lies_above);
        assert_eq!(report.first_divergence, Some(0));
    }

    #[test]
    fn dominates_hodge_small_grid() {
        for e in 0..=3u32 {
            for d in 0..=3u32 {
                if e + d == 0 {
                    continue;
                }
                let delta = interval(e, d);
                for p in [2u64, 3, 5, 7, 11, 13] {
                    let hb = hodge_bound_report(&delta, p, 3 * delta.vol() as usize).unwrap();
                    assert!(hb.dominates, "{delta} p={p}");
                    let p_coprime = delta.denominator() as u64 % p != 0;
                    assert_eq!(hb.equal_at_vol, p_coprime, "{delta} p={p}");
                    if p > 3 * delta.denominator() as u64 {
                        assert!(hb.agrees_with_polygon, "{delta} p={p}");
                    }
                }
            }
        }
        // the sorted polygon itself can dip below the scaled Hodge polygon
        // when the slope contributions arrive out of order
        let delta = interval(0, 3);
        let arith = arithmetic_polygon(&delta, 2, 3).unwrap();
        let hodge = hodge_polygon(&delta, 3).scale(1);
        assert!(!polygon_compare(&arith, &hodge, 3).unwrap().lies_above);
        assert!(!hodge_bound_report(&delta, 2, 9).unwrap().agrees_with_polygon);
        assert!(hodge_bound_report(&delta, 2, 9).unwrap().dominates);
    }

    #[test]
    fn slope_recurrence_small_grid() {
        for e in 0..=3u32 {
            for d in 0..=3u32 {
                if e + d == 0 {
                    continue;
                }
                let delta = interval(e, d);
                let vol = delta.vol() as usize;
                for p in [2u64, 3, 5, 7, 11] {
                    let poly = arithmetic_polygon(&delta, p, 3 * vol).unwrap();
                    for i in 1..=vol {
                        for j in 0..=((3 * vol - i) / vol) {
                            let idx = i + j * vol;
                            let want =
                                poly.slope(i - 1) + rat(((p - 1) * j as u64) as i64, 1);
                            assert_eq!(
                                poly.slope(idx - 1),
                                &want,
                                "recurrence broken at {delta} p={p} i={i} j={j}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn json_csv_roundtrip() {
        let poly = arithmetic_polygon(&interval(0, 3), 5, 4).unwrap();
        let js = poly.to_json();
        assert_eq!(js["slopes"][1], "2");
        let back = ConvexPolygon::from_json(&js).unwrap();
        assert_eq!(back, poly);
        let csv = poly.to_csv();
        assert!(csv.starts_with("k,slope,value\n1,0,0\n2,2,2\n"));
        let h = hodge_polygon(&interval(0, 3), 2);
        assert_eq!(h.to_json()["slopes"][1], "1/3");
    }

    #[test]
    fn svg_smoke() {
        let delta = interval(0, 3);
        let arith = arithmetic_polygon(&delta, 5, 4).unwrap();
        let hodge = hodge_polygon(&delta, 4).scale(4);
        let svg = svg_compare(&[("arith", &arith), ("hodge", &hodge)], 3);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    proptest! {
        #[test]
        fn newton_hull_is_convex_and_minorizes(
            vals in proptest::collection::vec(0i64..40, 3..9)
        ) {
            let mut points = vec![(0i64, Some(rat(0, 1)))];
            for (i, v) in vals.iter().enumerate() {
                points.push((i as i64 + 1, Some(rat(*v, 1))));
            }
            let np = newton_polygon_from_points(&points).unwrap();
            for w in np.slopes().windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            for (x, v) in &points {
                let k = *x as usize;
                if k <= np.len() {
                    prop_assert!(np.value(k) <= v.clone().unwrap());
                }
            }
        }
    }
}
