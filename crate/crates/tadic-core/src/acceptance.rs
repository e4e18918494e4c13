//! The bundled verification corpus: eleven end-to-end checks, each pinning
//! one headline claim at desk scale with exact arithmetic and zero
//! tolerance. The CLI verify command and the acceptance integration tests
//! both dispatch through [`run`].
//!
//! A criterion that cannot finish within the point-evaluation budget is
//! reported as skipped, never as passed.

use std::panic::{catch_unwind, AssertUnwindSafe};

use num::{BigInt, BigRational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cyclotomic::CycField;
use crate::dwork::{certify_turning_points, minor_leading, psi_matrix, verify_trace_formula};
use crate::ff::FieldDesc;
use crate::hasse::hasse_polynomial;
use crate::polygons::{
    arithmetic_polygon, hodge_bound_report, polygon_compare, ConvexPolygon, Interval,
};
use crate::sums::{
    exp_sum_cyclotomic, exp_sum_tseries, l_function, verify_generic_np, LaurentPoly,
};
use crate::{Error, Result};

pub const COUNT: usize = 11;

const NAMES: [&str; COUNT] = [
    "polygon-domination",
    "slope-recurrence",
    "kloosterman-family",
    "quadratic-census",
    "cubic-genericity-iff",
    "extension-ground-field",
    "level-two-specialization",
    "two-path-consistency",
    "trace-formula",
    "minor-bridge",
    "certification-coherence",
];

const RUNNERS: [fn(u64) -> Result<String>; COUNT] = [
    polygon_domination,
    slope_recurrence,
    kloosterman_family,
    quadratic_census,
    cubic_genericity_iff,
    extension_ground_field,
    level_two_specialization,
    two_path_consistency,
    trace_formula,
    minor_bridge,
    certification_coherence,
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    Failed,
    Skipped,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Passed => "PASS",
            Outcome::Failed => "FAIL",
            Outcome::Skipped => "SKIP",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CriterionStatus {
    pub id: usize,
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl CriterionStatus {
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:<26} {}  {}",
            self.id, self.name, self.outcome, self.detail
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "name": self.name,
            "outcome": self.outcome.to_string(),
            "detail": self.detail,
        })
    }
}

pub fn name(id: usize) -> &'static str {
    NAMES[id - 1]
}

/// Run one criterion by its 1-based id. Panics inside a criterion are
/// caught and reported as failures so a full run always yields one status
/// per criterion.
pub fn run(id: usize, budget: u64) -> CriterionStatus {
    assert!((1..=COUNT).contains(&id), "criterion ids are 1..={COUNT}");
    let result = catch_unwind(AssertUnwindSafe(|| RUNNERS[id - 1](budget)));
    let (outcome, detail) = match result {
        Ok(Ok(detail)) => (Outcome::Passed, detail),
        Ok(Err(Error::Budget {
            required, budget, ..
        })) => (
            Outcome::Skipped,
            format!("needs {required} point evaluations, budget is {budget}"),
        ),
        Ok(Err(e)) => (Outcome::Failed, e.to_string()),
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("panic");
            (Outcome::Failed, msg.to_string())
        }
    };
    CriterionStatus {
        id,
        name: NAMES[id - 1],
        outcome,
        detail,
    }
}

pub fn run_all(budget: u64) -> Vec<CriterionStatus> {
    (1..=COUNT).map(|id| run(id, budget)).collect()
}

fn ensure(cond: bool, msg: String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Property(msg))
    }
}

const PRIMES: [u64; 11] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

fn interval_grid() -> Vec<Interval> {
    let mut out = Vec::new();
    for e in 0..=6u32 {
        for d in 0..=6u32 {
            if e + d >= 1 {
                out.push(Interval::new(e, d).unwrap());
            }
        }
    }
    out
}

fn slopes_are(np: &ConvexPolygon, want: &[u64]) -> bool {
    np.len() == want.len()
        && np
            .slopes()
            .iter()
            .zip(want)
            .all(|(s, &w)| *s == BigRational::from(BigInt::from(w)))
}

fn poly_vals(
    delta: &Interval,
    field: &FieldDesc,
    entries: &[(i64, u64)],
) -> Result<LaurentPoly> {
    let coeffs = entries
        .iter()
        .map(|&(u, v)| (u, field.from_value(v)))
        .collect();
    LaurentPoly::new(delta.clone(), field.clone(), coeffs)
}

fn polygon_domination(_budget: u64) -> Result<String> {
    let mut pairs = 0usize;
    let mut contacts = 0usize;
    for delta in interval_grid() {
        let len = 3 * delta.vol() as usize;
        for &p in &PRIMES {
            let report = hodge_bound_report(&delta, p, len)?;
            let label = format!("[{}, {}], p={p}", -(delta.e() as i64), delta.d());
            ensure(
                report.dominates,
                format!("arithmetic profile dips under the scaled combinatorial bound for {label}"),
            )?;
            // contact at the volume needs p coprime to the denominator;
            // [0, 2] at p = 2 is a strict counterexample
            let coprime = delta.denominator() as u64 % p != 0;
            ensure(
                report.equal_at_vol == coprime,
                format!("contact at the volume misreads the coprimality split for {label}"),
            )?;
            if p > 3 * delta.denominator() as u64 {
                ensure(
                    report.agrees_with_polygon,
                    format!("degree order is not ascending for {label}"),
                )?;
            }
            if coprime {
                contacts += 1;
            }
            pairs += 1;
        }
    }
    Ok(format!(
        "{pairs} (interval, prime) pairs dominate the scaled bound; all {contacts} coprime \
         pairs touch it at the volume"
    ))
}

fn slope_recurrence(_budget: u64) -> Result<String> {
    let mut checked = 0usize;
    for delta in interval_grid() {
        let vol = delta.vol() as usize;
        for &p in &PRIMES {
            let arith = arithmetic_polygon(&delta, p, 3 * vol)?;
            for i in 1..=vol {
                for j in 1..=2usize {
                    let want =
                        arith.slope(i - 1) + BigRational::from(BigInt::from(j as u64 * (p - 1)));
                    ensure(
                        *arith.slope(i + j * vol - 1) == want,
                        format!(
                            "slope recurrence fails at i={i}, j={j} for [{}, {}], p={p}",
                            -(delta.e() as i64),
                            delta.d()
                        ),
                    )?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} slope translations verified"))
}

fn kloosterman_family(budget: u64) -> Result<String> {
    let field = FieldDesc::new(5, 1)?;
    let delta = Interval::new(1, 1)?;
    let h1 = hasse_polynomial(&delta, 5, 1)?;
    ensure(h1.is_one(), format!("first vertex polynomial is {h1}"))?;
    let h3 = hasse_polynomial(&delta, 5, 3)?;
    ensure(
        h3.to_string() == "y(-1)^4*y1^4",
        format!("level-three polynomial is {h3}"),
    )?;
    let mut count = 0usize;
    for a1 in 1..5u64 {
        for am in 1..5u64 {
            let f = poly_vals(&delta, &field, &[(1, a1), (-1, am)])?;
            let l = l_function(&f, 1, budget, 0)?;
            ensure(l.degree() == 2, format!("degree {} at ({a1}, {am})", l.degree()))?;
            let np = l.newton_polygon()?;
            ensure(
                slopes_are(&np, &[0, 4]),
                format!("slopes {:?} at ({a1}, {am})", np.slopes()),
            )?;
            count += 1;
        }
    }
    Ok(format!(
        "all {count} coefficient pairs give slopes (0, 4); the genericity product is constant 1"
    ))
}

fn quadratic_census(budget: u64) -> Result<String> {
    let field = FieldDesc::new(7, 1)?;
    let delta = Interval::new(0, 2)?;
    let h1 = hasse_polynomial(&delta, 7, 1)?;
    ensure(h1.is_one(), format!("first vertex polynomial is {h1}"))?;
    let mut count = 0usize;
    for a2 in 1..7u64 {
        for a1 in 0..7u64 {
            let f = poly_vals(&delta, &field, &[(2, a2), (1, a1)])?;
            let rep = verify_generic_np(&f, 1, budget, 0)?;
            ensure(
                rep.hasse_nonzero && rep.equal && rep.consistent && rep.hypothesis_satisfied,
                format!("census breaks at ({a1}, {a2})"),
            )?;
            ensure(
                slopes_are(&rep.np_l, &[0, 3]),
                format!("slopes {:?} at ({a1}, {a2})", rep.np_l.slopes()),
            )?;
            count += 1;
        }
    }
    Ok(format!("all {count} admissible quadratics attain slopes (0, 3)"))
}

fn cubic_genericity_iff(budget: u64) -> Result<String> {
    let field = FieldDesc::new(11, 1)?;
    let delta = Interval::new(0, 3)?;
    let h2 = hasse_polynomial(&delta, 11, 2)?;
    ensure(
        h2.to_string() == "2*y1*y3^3 + 3*y2^2*y3^2",
        format!("second vertex polynomial is {h2}"),
    )?;
    let mut nongeneric = 0usize;
    for a1 in 0..11u64 {
        for a2 in 0..11u64 {
            let f = poly_vals(&delta, &field, &[(3, 1), (2, a2), (1, a1)])?;
            let rep = verify_generic_np(&f, 1, budget, 0)?;
            let predicted = (2 * a1 + 3 * a2 * a2) % 11 != 0;
            ensure(
                rep.hasse_nonzero == predicted,
                format!("polynomial value disagrees with the closed form at ({a1}, {a2})"),
            )?;
            ensure(
                rep.equal == rep.hasse_nonzero,
                format!("equality and nonvanishing split at ({a1}, {a2})"),
            )?;
            if rep.equal {
                ensure(
                    slopes_are(&rep.np_l, &[0, 4, 6]),
                    format!("generic slopes {:?} at ({a1}, {a2})", rep.np_l.slopes()),
                )?;
            } else {
                ensure(
                    rep.np_l.value(2) > rep.expected.value(2),
                    format!("degenerate case not strictly above at index 2 at ({a1}, {a2})"),
                )?;
                nongeneric += 1;
            }
        }
    }
    ensure(
        nongeneric == 11,
        format!("{nongeneric} non-generic tuples, expected 11"),
    )?;
    Ok("110 of 121 cubics generic with slopes (0, 4, 6); the 11 exceptions match the closed form"
        .into())
}

fn extension_ground_field(budget: u64) -> Result<String> {
    let field = FieldDesc::new(7, 2)?;
    let delta = Interval::new(0, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    let mut count = 0usize;
    while count < 20 {
        let a2 = rng.gen_range(1..49u64);
        let a1 = rng.gen_range(0..49u64);
        let f = poly_vals(&delta, &field, &[(2, a2), (1, a1)])?;
        let l = l_function(&f, 1, budget, 0)?;
        ensure(l.degree() == 2, format!("degree {} at ({a1}, {a2})", l.degree()))?;
        let np = l.newton_polygon()?;
        ensure(
            slopes_are(&np, &[0, 6]),
            format!("slopes {:?} at ({a1}, {a2})", np.slopes()),
        )?;
        count += 1;
    }
    Ok(format!(
        "{count} sampled polynomials over the 49-element field attain the doubled slopes (0, 6)"
    ))
}

fn level_two_specialization(budget: u64) -> Result<String> {
    let field = FieldDesc::new(5, 1)?;
    let delta = Interval::new(0, 1)?;
    let f = poly_vals(&delta, &field, &[(1, 1)])?;
    let l = l_function(&f, 2, budget, 0)?;
    ensure(l.degree() == 5, format!("degree {}", l.degree()))?;
    let np = l.newton_polygon()?;
    ensure(
        slopes_are(&np, &[0, 4, 8, 12, 16]),
        format!("slopes {:?}", np.slopes()),
    )?;
    let expected = arithmetic_polygon(&delta, 5, 5)?;
    ensure(
        polygon_compare(&np, &expected, 5)?.equal,
        "level-two polygon differs from the level-one prediction".into(),
    )?;
    Ok("degree-5 level-two L-function attains slopes (0, 4, 8, 12, 16)".into())
}

fn two_path_consistency(budget: u64) -> Result<String> {
    let shapes: [(u32, u32); 4] = [(0, 1), (1, 1), (0, 2), (1, 2)];
    let primes = [3u64, 5, 7];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut done = 0usize;
    while done < 50 {
        let p = primes[rng.gen_range(0..primes.len())];
        let (e, d) = shapes[rng.gen_range(0..shapes.len())];
        let field = FieldDesc::new(p, 1)?;
        let delta = Interval::new(e, d)?;
        let mut entries: Vec<(i64, u64)> = vec![(d as i64, rng.gen_range(1..p))];
        if e > 0 {
            entries.push((-(e as i64), rng.gen_range(1..p)));
        }
        for u in (1 - e as i64)..(d as i64) {
            entries.push((u, rng.gen_range(0..p)));
        }
        let f = poly_vals(&delta, &field, &entries)?;
        let m = rng.gen_range(1..=2u32);
        let k = rng.gen_range(1..=2u32);
        let cyc = CycField::new(p, m)?;
        let direct = exp_sum_cyclotomic(&f, k, m, budget)?;
        let series = exp_sum_tseries(&f, k, m + 1, 8, budget)?;
        let (subst, tag) = cyc.substitute_pi(&series);
        let diff = cyc.sub(&subst, &direct);
        if let Some(v) = cyc.pi_valuation(&diff) {
            ensure(
                v >= tag,
                format!("paths disagree at valuation {v} < {tag} (p={p}, m={m}, k={k})"),
            )?;
        }
        done += 1;
    }
    Ok(format!(
        "{done} randomized sums agree between the series and cyclotomic pipelines"
    ))
}

fn trace_formula(budget: u64) -> Result<String> {
    let cases: [(u64, (u32, u32), &[(i64, u64)]); 3] = [
        (5, (0, 1), &[(1, 1)]),
        (7, (0, 2), &[(2, 1), (1, 1)]),
        (7, (0, 2), &[(2, 3), (1, 5), (0, 1)]),
    ];
    let mut checked = 0usize;
    for (p, (e, d), entries) in cases {
        let field = FieldDesc::new(p, 1)?;
        let delta = Interval::new(e, d)?;
        let f = poly_vals(&delta, &field, entries)?;
        for k in 1..=2u32 {
            let report = verify_trace_formula(&f, k, 2, 6, budget)?;
            ensure(
                report.ok,
                format!(
                    "trace residual {:?} at p={p}, k={k}",
                    report.residual.coeffs()
                ),
            )?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} operator traces match the scaled sums mod (p^2, T^6)"
    ))
}

fn minor_bridge(_budget: u64) -> Result<String> {
    let field = FieldDesc::new(11, 1)?;
    let delta = Interval::new(0, 3)?;
    let h2 = hasse_polynomial(&delta, 11, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut tuples: Vec<(u64, u64, u64)> = vec![(4, 1, 1), (5, 2, 1)];
    while tuples.len() < 20 {
        tuples.push((
            rng.gen_range(0..11),
            rng.gen_range(0..11),
            rng.gen_range(1..11),
        ));
    }
    let mut zeros = 0usize;
    for &(a1, a2, a3) in &tuples {
        let f = poly_vals(&delta, &field, &[(3, a3), (2, a2), (1, a1)])?;
        let r = minor_leading(&f, 2, 1)?;
        let hval = h2.eval(&field, f.coeffs());
        ensure(
            r.leading == hval,
            format!("minor leading differs from the polynomial at ({a1}, {a2}, {a3})"),
        )?;
        let coeffs = psi_matrix(&f, 1, 1, 16)?.fredholm(2)?;
        ensure(
            coeffs[0].series.ord() == Some(0),
            format!("first determinant coefficient not a unit at ({a1}, {a2}, {a3})"),
        )?;
        let ord2 = coeffs[1].series.ord();
        if field.is_zero(&hval) {
            zeros += 1;
            ensure(
                ord2.map_or(true, |v| v > 12),
                format!("degenerate minor attains the bound at ({a1}, {a2}, {a3})"),
            )?;
        } else {
            ensure(
                ord2 == Some(12),
                format!("generic minor misses the bound at ({a1}, {a2}, {a3})"),
            )?;
        }
    }
    ensure(zeros >= 2, format!("only {zeros} vanishing cases sampled"))?;
    Ok(format!(
        "20 minors match the vertex polynomial ({zeros} vanishing); determinant orders attain \
         the bound exactly on the nonvanishing set"
    ))
}

fn certification_coherence(budget: u64) -> Result<String> {
    let mut agreements = 0usize;

    let field = FieldDesc::new(7, 1)?;
    let delta = Interval::new(0, 2)?;
    for a2 in 1..7u64 {
        for a1 in 0..7u64 {
            let f = poly_vals(&delta, &field, &[(2, a2), (1, a1)])?;
            let cert = certify_turning_points(&f, 1)?;
            let rep = verify_generic_np(&f, 1, budget, 0)?;
            ensure(
                cert.granted == rep.equal,
                format!("certificate and brute force split at ({a1}, {a2}) over p=7"),
            )?;
            agreements += 1;
        }
    }

    let field = FieldDesc::new(11, 1)?;
    let delta = Interval::new(0, 3)?;
    for a1 in 0..11u64 {
        for a2 in 0..11u64 {
            let f = poly_vals(&delta, &field, &[(3, 1), (2, a2), (1, a1)])?;
            let cert = certify_turning_points(&f, 1)?;
            let rep = verify_generic_np(&f, 1, budget, 0)?;
            ensure(
                cert.granted == rep.equal,
                format!("certificate and brute force split at ({a1}, {a2}) over p=11"),
            )?;
            agreements += 1;
        }
    }

    let field = FieldDesc::new(5, 1)?;
    let delta = Interval::new(0, 1)?;
    let f = poly_vals(&delta, &field, &[(1, 1)])?;
    let cert = certify_turning_points(&f, 2)?;
    let l = l_function(&f, 2, budget, 0)?;
    let np = l.newton_polygon()?;
    let expected = arithmetic_polygon(&delta, 5, 5)?;
    let equal = polygon_compare(&np, &expected, 5)?.equal;
    ensure(
        cert.granted == equal,
        "certificate and level-two polygon disagree for the linear map".into(),
    )?;
    agreements += 1;

    Ok(format!(
        "{agreements} cases: certificates granted exactly when brute force finds equality"
    ))
}
