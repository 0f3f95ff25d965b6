//! Multiplicative Diophantine searches: Littlewood-type products
//! |n|·⟨nα − γ⟩·⟨nβ − δ⟩, record scans for the two shifted properties
//! (single integer times a product of distances, and a product of integers
//! times a single distance), and probes for dense products on grids
//! (lattice + shift).
//!
//! Scans are plain enumerations with a cheap double-precision filter and
//! exact re-evaluation at record candidates: the filter only decides which
//! candidates get certified, never what a record's value is. Liminf-type
//! claims are represented only as record traces — a strictly decreasing list
//! of certified values — never as an asserted limit.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::ops::{CompleteRound, RemRounding};
use thiserror::Error;

use crate::arith::{big, ArithError, BigReal, Integer, Rational, Scalar};
use crate::irregular::Coord;
use crate::lattice::{LatticeBasis, LatticeError};

/// Extra working bits on top of the published precision.
const GUARD_BITS: u32 = 64;

/// Chunk length for range-partitioned scans (merged deterministically).
const SCAN_CHUNK: i64 = 1 << 16;

#[derive(Debug, Error)]
pub enum DiophError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

type Result<T> = std::result::Result<T, DiophError>;

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// Distance of an exact rational to the nearest integer, exactly.
fn rational_dist(x: &Rational) -> Rational {
    let r = x.numer().clone().rem_euc(x.denom());
    let frac = Rational::from((r, x.denom().clone()));
    let alt = Rational::from(1u32) - &frac;
    if frac <= alt {
        frac
    } else {
        alt
    }
}

/// Distance of a float to the nearest integer.
fn float_dist(x: &BigReal) -> Result<BigReal> {
    let k = x
        .to_integer()
        .ok_or_else(|| DiophError::Numeric("non-finite value in a distance".into()))?;
    Ok((x - &k).complete(x.prec()).abs())
}

/// ⟨nθ − γ⟩ at working precision, exact when the inputs allow it: fully
/// rational data gives an exact distance (including exact zeros), and an
/// exact shift cancellation (nθ = γ as certified algebraic numbers) gives an
/// exact zero; otherwise the distance is a correctly-rounded float.
fn shifted_dist(theta: &Coord, n: &Integer, gamma: &Coord, pw: u32) -> Result<BigReal> {
    match (theta, gamma) {
        (Coord::Exact(t), Coord::Exact(g)) => match (t, g) {
            (Scalar::Rational(a), Scalar::Rational(c)) => {
                let x = Rational::from(a * n) - c;
                Ok(big(pw, &rational_dist(&x)))
            }
            (Scalar::Algebraic(_), Scalar::Rational(c)) => {
                let s = t.affine(&Rational::from(n), &Rational::from(-c.clone()))?;
                float_dist(&s.to_float(pw))
            }
            (Scalar::Rational(a), Scalar::Algebraic(_)) => {
                // nθ − γ = −(γ − n·a), pushed into the algebraic handle.
                let s = g.affine(&Rational::from(-1), &Rational::from(a * n))?;
                float_dist(&s.to_float(pw))
            }
            (Scalar::Algebraic(_), Scalar::Algebraic(_)) => {
                let scaled = t.affine(&Rational::from(n), &Rational::new())?;
                if scaled.certified_eq(g) {
                    return Ok(big(pw, 0));
                }
                let x = scaled.to_float(pw) - g.to_float(pw);
                float_dist(&x)
            }
        },
        _ => {
            let x = theta.to_float(pw) * n - gamma.to_float(pw);
            float_dist(&x)
        }
    }
}

// ---------------------------------------------------------------------------
// Point values
// ---------------------------------------------------------------------------

/// |n| · ∏_i ⟨n·v_i − γ_i⟩ at precision `prec`.
pub fn propc1_value(v: &[Coord], gamma: &[Coord], n: &Integer, prec: u32) -> Result<BigReal> {
    if n.cmp0() == Ordering::Equal {
        return Err(DiophError::PreconditionViolated("n must be nonzero".into()));
    }
    if v.is_empty() || v.len() != gamma.len() {
        return Err(DiophError::PreconditionViolated(
            "coordinate and shift vectors must be nonempty and of equal length".into(),
        ));
    }
    let pw = prec + GUARD_BITS;
    let mut acc = BigReal::with_val(pw, Integer::from(n.abs_ref()));
    for (vi, gi) in v.iter().zip(gamma.iter()) {
        acc *= shifted_dist(vi, n, gi, pw)?;
    }
    Ok(BigReal::with_val(prec, acc))
}

/// The two-coordinate Littlewood-type product |n|·⟨nα − γ⟩·⟨nβ − δ⟩.
pub fn littlewood_product(
    alpha: &Coord,
    beta: &Coord,
    n: &Integer,
    gamma: &Coord,
    delta: &Coord,
    prec: u32,
) -> Result<BigReal> {
    propc1_value(
        &[alpha.clone(), beta.clone()],
        &[gamma.clone(), delta.clone()],
        n,
        prec,
    )
}

/// (∏_i |n_i|) · ⟨Σ_i n_i·v_i − γ⟩ at precision `prec`; every component of
/// n⃗ must be nonzero.
pub fn propc2_value(
    v: &[Coord],
    gamma: &Coord,
    nvec: &[Integer],
    prec: u32,
) -> Result<BigReal> {
    if v.is_empty() || v.len() != nvec.len() {
        return Err(DiophError::PreconditionViolated(
            "coordinate and witness vectors must be nonempty and of equal length".into(),
        ));
    }
    if nvec.iter().any(|n| n.cmp0() == Ordering::Equal) {
        return Err(DiophError::PreconditionViolated(
            "witness components must all be nonzero".into(),
        ));
    }
    let pw = prec + GUARD_BITS;
    let all_rational = matches!(gamma, Coord::Exact(Scalar::Rational(_)))
        && v
            .iter()
            .all(|c| matches!(c, Coord::Exact(Scalar::Rational(_))));
    let dist = if all_rational {
        let Coord::Exact(Scalar::Rational(g)) = gamma else {
            unreachable!()
        };
        let mut x = Rational::from(-g.clone());
        for (c, n) in v.iter().zip(nvec.iter()) {
            let Coord::Exact(Scalar::Rational(a)) = c else {
                unreachable!()
            };
            x += Rational::from(a * n);
        }
        big(pw, &rational_dist(&x))
    } else {
        let mut x = -gamma.to_float(pw);
        for (c, n) in v.iter().zip(nvec.iter()) {
            x += c.to_float(pw) * n;
        }
        float_dist(&x)?
    };
    let mut acc = dist;
    for n in nvec {
        acc *= BigReal::with_val(pw, Integer::from(n.abs_ref()));
    }
    Ok(BigReal::with_val(prec, acc))
}

// ---------------------------------------------------------------------------
// Record traces
// ---------------------------------------------------------------------------

/// The integer datum a record was achieved at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Scalar(Integer),
    Vector(Vec<Integer>),
}

impl Witness {
    fn render(&self) -> String {
        match self {
            Witness::Scalar(n) => n.to_string(),
            Witness::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("({})", parts.join(";"))
            }
        }
    }
}

/// One certified record: the value re-evaluated exactly (to the published
/// precision) at the witness.
#[derive(Clone, Debug)]
pub struct SearchRecord {
    pub witness: Witness,
    pub value: BigReal,
    /// The target shift (γ⃗ for first-type scans, the single γ for
    /// second-type scans), at the published precision.
    pub shift: Vec<BigReal>,
}

/// A strictly decreasing list of certified records from a scan up to
/// `scan_bound`.
#[derive(Clone, Debug)]
pub struct RecordTrace {
    pub records: Vec<SearchRecord>,
    pub scan_bound: Integer,
}

impl RecordTrace {
    /// CSV rendering: rank, witness, value, target.
    pub fn csv(&self) -> String {
        let mut out = String::from("rank,witness,value,target\n");
        for (idx, r) in self.records.iter().enumerate() {
            let shift_parts: Vec<String> = r
                .shift
                .iter()
                .map(|x| x.to_string_radix(10, Some(17)))
                .collect();
            let target = if shift_parts.len() == 1 {
                shift_parts[0].clone()
            } else {
                format!("({})", shift_parts.join(";"))
            };
            out.push_str(&format!(
                "{},{},{},{}\n",
                idx + 1,
                r.witness.render(),
                r.value.to_string_radix(10, Some(24)),
                target
            ));
        }
        out
    }

    /// Strict monotonicity of the recorded values.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].value < w[0].value)
    }
}

fn dist_f64(x: f64) -> f64 {
    (x - x.round()).abs()
}

fn coord_f64(c: &Coord) -> f64 {
    c.to_float(64).to_f64()
}

/// Merges chunk-local candidate lists (already in scan order) into the
/// strictly decreasing global trace. A global record is necessarily a
/// chunk-local record, so no candidates are lost.
fn merge_candidates(
    chunks: Vec<Vec<(Witness, BigReal)>>,
    shift: Vec<BigReal>,
    scan_bound: Integer,
) -> RecordTrace {
    let mut records = Vec::new();
    let mut best: Option<BigReal> = None;
    for chunk in chunks {
        for (witness, value) in chunk {
            let smaller = best.as_ref().map_or(true, |b| value < *b);
            if smaller {
                best = Some(value.clone());
                records.push(SearchRecord {
                    witness,
                    value,
                    shift: shift.clone(),
                });
            }
        }
    }
    RecordTrace {
        records,
        scan_bound,
    }
}

/// Scans 0 < |n| ≤ N of |n|·∏⟨n·v_i − γ_i⟩, keeping the strictly decreasing
/// records (smallest |n| first at each value, positive n before negative).
///
/// Enumeration runs over range-partitioned chunks in parallel; each chunk
/// certifies its own candidate records at full precision and the merge keeps
/// the globally decreasing subsequence, so the result is deterministic and
/// every reported value is an exact re-evaluation, never a filter estimate.
pub fn propc1_search(
    v: &[Coord],
    gamma: &[Coord],
    n_max: i64,
    prec: u32,
) -> Result<RecordTrace> {
    if n_max < 1 {
        return Err(DiophError::PreconditionViolated(format!(
            "scan bound must be at least 1, got {n_max}"
        )));
    }
    if v.is_empty() || v.len() != gamma.len() {
        return Err(DiophError::PreconditionViolated(
            "coordinate and shift vectors must be nonempty and of equal length".into(),
        ));
    }
    let vf: Vec<f64> = v.iter().map(coord_f64).collect();
    let gf: Vec<f64> = gamma.iter().map(coord_f64).collect();
    let mut chunk_bounds = Vec::new();
    let mut lo = 1i64;
    while lo <= n_max {
        let hi = (lo + SCAN_CHUNK - 1).min(n_max);
        chunk_bounds.push((lo, hi));
        lo = hi + 1;
    }
    let chunks: Vec<Vec<(Witness, BigReal)>> = chunk_bounds
        .into_par_iter()
        .map(|(lo, hi)| -> Result<Vec<(Witness, BigReal)>> {
            let mut out = Vec::new();
            let mut best_f = f64::INFINITY;
            let mut best: Option<BigReal> = None;
            for k in lo..=hi {
                for n in [k, -k] {
                    let x = n as f64;
                    let mut val = x.abs();
                    for i in 0..vf.len() {
                        val *= dist_f64(x * vf[i] - gf[i]);
                    }
                    // The filter's slack covers the double-precision error of
                    // the candidate value (growing like n²·ulp) so no true
                    // record can be filtered out.
                    let slack = best_f * 1e-6 + (x * x) * 1e-14 + 1e-12;
                    if val < best_f + slack {
                        let cert = propc1_value(v, gamma, &Integer::from(n), prec)?;
                        let smaller = best.as_ref().map_or(true, |b| cert < *b);
                        if smaller {
                            best_f = cert.to_f64();
                            best = Some(cert.clone());
                            out.push((Witness::Scalar(Integer::from(n)), cert));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let shift: Vec<BigReal> = gamma.iter().map(|c| c.to_float(prec)).collect();
    Ok(merge_candidates(chunks, shift, Integer::from(n_max)))
}

/// Ascending divisors of p ≥ 1.
fn divisors(p: i64) -> Vec<i64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= p {
        if p % d == 0 {
            small.push(d);
            if d * d != p {
                large.push(p / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// All vectors of m positive integers with the given product.
fn abs_vectors(p: i64, m: usize) -> Vec<Vec<i64>> {
    if m == 1 {
        return vec![vec![p]];
    }
    let mut out = Vec::new();
    for d in divisors(p) {
        for rest in abs_vectors(p / d, m - 1) {
            let mut v = Vec::with_capacity(m);
            v.push(d);
            v.extend(rest);
            out.push(v);
        }
    }
    out
}

/// All sign patterns applied to an absolute-value vector, in ascending
/// lexicographic order together with the other vectors of the same product.
fn signed_vectors(p: i64, m: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for abs in abs_vectors(p, m) {
        for mask in 0..(1u32 << m) {
            let v: Vec<i64> = abs
                .iter()
                .enumerate()
                .map(|(i, &a)| if mask & (1 << i) != 0 { -a } else { a })
                .collect();
            out.push(v);
        }
    }
    out.sort();
    out
}

/// Scans n⃗ ∈ Z^m with every component nonzero and ∏|n_i| ≤ N of
/// (∏|n_i|)·⟨Σ n_i·v_i − γ⟩, keeping the strictly decreasing records.
/// Enumeration order: increasing ∏|n_i|, then lexicographic on n⃗.
///
/// Vectors with a zero component are excluded: a zero factor would make the
/// product side identically zero and trivialize the scan.
pub fn propc2_search(v: &[Coord], gamma: &Coord, n_max: i64, prec: u32) -> Result<RecordTrace> {
    if n_max < 1 {
        return Err(DiophError::PreconditionViolated(format!(
            "scan bound must be at least 1, got {n_max}"
        )));
    }
    if v.is_empty() || v.len() > 16 {
        return Err(DiophError::PreconditionViolated(
            "coordinate vector must have between 1 and 16 components".into(),
        ));
    }
    let m = v.len();
    let vf: Vec<f64> = v.iter().map(coord_f64).collect();
    let gf = coord_f64(gamma);
    let chunk = (SCAN_CHUNK / 16).max(1);
    let mut chunk_bounds = Vec::new();
    let mut lo = 1i64;
    while lo <= n_max {
        let hi = (lo + chunk - 1).min(n_max);
        chunk_bounds.push((lo, hi));
        lo = hi + 1;
    }
    let chunks: Vec<Vec<(Witness, BigReal)>> = chunk_bounds
        .into_par_iter()
        .map(|(lo, hi)| -> Result<Vec<(Witness, BigReal)>> {
            let mut out = Vec::new();
            let mut best_f = f64::INFINITY;
            let mut best: Option<BigReal> = None;
            for p in lo..=hi {
                for nvec in signed_vectors(p, m) {
                    let mut combo = -gf;
                    for i in 0..m {
                        combo += nvec[i] as f64 * vf[i];
                    }
                    let val = p as f64 * dist_f64(combo);
                    let slack = best_f * 1e-6 + (p as f64) * (p as f64) * 1e-13 + 1e-12;
                    if val < best_f + slack {
                        let ints: Vec<Integer> =
                            nvec.iter().map(|&x| Integer::from(x)).collect();
                        let cert = propc2_value(v, gamma, &ints, prec)?;
                        let smaller = best.as_ref().map_or(true, |b| cert < *b);
                        if smaller {
                            best_f = cert.to_f64();
                            best = Some(cert.clone());
                            out.push((Witness::Vector(ints), cert));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let shift = vec![gamma.to_float(prec)];
    Ok(merge_candidates(chunks, shift, Integer::from(n_max)))
}

// ---------------------------------------------------------------------------
// Grid product probes
// ---------------------------------------------------------------------------

/// A certified near-hit of the product ∏(u_i + w_i) on a grid
/// (lattice point u plus shift w).
#[derive(Clone, Debug)]
pub struct GDPWitness {
    /// Integer coefficients of u against the reduced basis.
    pub coeffs: Vec<Integer>,
    /// The grid point u + w.
    pub point: Vec<BigReal>,
    pub shift: Vec<BigReal>,
    pub product: BigReal,
    pub target: BigReal,
    /// |product − target| (so the defining invariant is true by
    /// construction).
    pub error: BigReal,
}

/// Searches grid points u + w (u in the lattice, integer coefficients
/// against the reduced basis bounded by `coeff_bound`) for
/// |∏(u_i + w_i) − target| < ε. Returns the first witness in deterministic
/// lexicographic coefficient order, or `None` if the whole box misses.
///
/// The box is filtered at double precision with generous slack; candidate
/// hits are certified by recomputing the point from exact provenance at full
/// precision, and only the certified comparison decides.
pub fn gdp_probe(
    x: &LatticeBasis,
    w: &[BigReal],
    target: &BigReal,
    eps: &BigReal,
    coeff_bound: i64,
) -> Result<Option<GDPWitness>> {
    let d = x.dim();
    if w.len() != d {
        return Err(DiophError::PreconditionViolated(format!(
            "shift has {} components for a dimension-{d} lattice",
            w.len()
        )));
    }
    if !(eps.cmp0() == Some(Ordering::Greater)) {
        return Err(DiophError::PreconditionViolated(
            "tolerance must be positive".into(),
        ));
    }
    if coeff_bound < 0 {
        return Err(DiophError::PreconditionViolated(
            "coefficient bound must be nonnegative".into(),
        ));
    }
    let prec = x.precision();
    let pw = prec + GUARD_BITS;
    let (reduced, _) = x.reduce()?;
    let cols = reduced.columns();
    let bf: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|i| cols.get(i, j).to_f64()).collect())
        .collect();
    let wf: Vec<f64> = w.iter().map(|x| x.to_f64()).collect();
    let tf = target.to_f64();
    let ef = eps.to_f64();
    let threshold = ef + ef * 1e-6 + tf.abs() * 1e-9 + 1e-9;

    let certify = |coeffs: &[i64]| -> Result<Option<GDPWitness>> {
        let ints: Vec<Integer> = coeffs.iter().map(|&c| Integer::from(c)).collect();
        let point = reduced.vector(&ints);
        let mut product = big(pw, 1);
        for (p, s) in point.iter().zip(w.iter()) {
            product *= (p + s).complete(pw);
        }
        let error = (&product - target).complete(pw).abs();
        if error < *eps {
            Ok(Some(GDPWitness {
                coeffs: ints,
                point: point
                    .iter()
                    .zip(w.iter())
                    .map(|(p, s)| BigReal::with_val(prec, (p + s).complete(pw)))
                    .collect(),
                shift: w.iter().map(|s| BigReal::with_val(prec, s)).collect(),
                product: BigReal::with_val(prec, &product),
                target: BigReal::with_val(prec, target),
                error: BigReal::with_val(prec, &error),
            }))
        } else {
            Ok(None)
        }
    };

    // Odometer over the remaining coordinates for one fixed first
    // coefficient, in lexicographic order.
    let scan_tail = |c0: i64| -> Result<Option<GDPWitness>> {
        let mut c = vec![-coeff_bound; d];
        c[0] = c0;
        loop {
            let mut prod = 1.0f64;
            for j in 0..d {
                let mut coord = wf[j];
                for i in 0..d {
                    coord += c[i] as f64 * bf[i][j];
                }
                prod *= coord;
            }
            if (prod - tf).abs() < threshold {
                if let Some(hit) = certify(&c)? {
                    return Ok(Some(hit));
                }
            }
            // Advance the odometer on coordinates 1..d.
            let mut dim = d;
            loop {
                if dim == 1 {
                    return Ok(None);
                }
                dim -= 1;
                if c[dim] < coeff_bound {
                    c[dim] += 1;
                    break;
                }
                c[dim] = -coeff_bound;
            }
        }
    };

    if d == 1 {
        for c0 in -coeff_bound..=coeff_bound {
            if let Some(hit) = certify(&[c0])? {
                return Ok(Some(hit));
            }
        }
        return Ok(None);
    }
    let found = (-coeff_bound..=coeff_bound)
        .into_par_iter()
        .map(scan_tail)
        .find_map_first(|r| match r {
            Ok(Some(hit)) => Some(Ok(hit)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        });
    match found {
        None => Ok(None),
        Some(Ok(hit)) => Ok(Some(hit)),
        Some(Err(e)) => Err(e),
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irregular::{make_zv, VParams};

    const P: u32 = 256;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn cbrt_pair() -> (Coord, Coord) {
        (
            Coord::Exact(Scalar::cbrt_rational(&q(2, 1)).unwrap()),
            Coord::Exact(Scalar::cbrt_rational(&q(4, 1)).unwrap()),
        )
    }

    fn zero() -> Coord {
        Coord::Exact(Scalar::Rational(Rational::new()))
    }

    #[test]
    fn littlewood_point_values() {
        let (a, b) = cbrt_pair();
        // n = 1, no shift: |1|·⟨∛2⟩·⟨∛4⟩.
        let val = littlewood_product(&a, &b, &Integer::from(1), &zero(), &zero(), P).unwrap();
        let want = big(P, 0.1072431517579458f64);
        assert!((val.clone() - want).abs() < big(64, 1e-13));
        // Rational coordinates hit exact zero.
        let half = Coord::Exact(Scalar::Rational(q(1, 2)));
        let z = littlewood_product(&half, &half, &Integer::from(2), &zero(), &zero(), P).unwrap();
        assert!(z.is_zero());
        // Shift cancellation: γ = α, δ = β at n = 1 is an exact zero.
        let z2 = littlewood_product(&a, &b, &Integer::from(1), &a, &b, P).unwrap();
        assert!(z2.is_zero());
        // n = 0 is rejected.
        assert!(matches!(
            littlewood_product(&a, &b, &Integer::new(), &zero(), &zero(), P),
            Err(DiophError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn first_type_scan_records_the_frozen_trace() {
        let (a, b) = cbrt_pair();
        let v = [a, b];
        let g = [zero(), zero()];
        let trace = propc1_search(&v, &g, 1_000_000, P).unwrap();
        assert!(trace.is_strictly_decreasing());
        let witnesses: Vec<i64> = trace
            .records
            .iter()
            .map(|r| match &r.witness {
                Witness::Scalar(n) => n.to_i64().unwrap(),
                _ => panic!("scalar witnesses expected"),
            })
            .collect();
        assert_eq!(witnesses, vec![1, 4, 46, 143, 177, 504, 3032]);
        let values = [
            0.1072431517579458,
            0.05549505263621820,
            0.04104111445315259,
            0.03979674731627128,
            0.03201188512731938,
            0.005284228353427704,
            0.002550202667942918,
        ];
        for (r, want) in trace.records.iter().zip(values.iter()) {
            assert!(
                (r.value.clone() - big(P, *want)).abs() < big(64, 1e-13),
                "record at {:?} off: {}",
                r.witness,
                r.value
            );
        }
        // CSV rendering is stable and carries every record.
        let csv = trace.csv();
        assert!(csv.starts_with("rank,witness,value,target\n"));
        assert_eq!(csv.lines().count(), 8);
        assert!(csv.contains("\n7,3032,"));
    }

    #[test]
    fn first_type_scan_degenerate_and_shifted() {
        // Rational coordinates reach an exact zero at n ≤ denominator.
        let half = Coord::Exact(Scalar::Rational(q(1, 2)));
        let trace = propc1_search(&[half.clone(), half], &[zero(), zero()], 2, P).unwrap();
        assert_eq!(trace.records.len(), 2);
        assert_eq!(trace.records[0].witness, Witness::Scalar(Integer::from(1)));
        assert_eq!(trace.records[1].witness, Witness::Scalar(Integer::from(2)));
        assert!(trace.records[1].value.is_zero());
        // A shifted scan stays nonempty with final ≤ first.
        let (a, b) = cbrt_pair();
        let g = [
            Coord::Exact(Scalar::Rational(q(3, 10))),
            Coord::Exact(Scalar::Rational(q(7, 10))),
        ];
        let shifted = propc1_search(&[a.clone(), b.clone()], &g, 1000, P).unwrap();
        assert!(!shifted.records.is_empty());
        assert!(shifted.is_strictly_decreasing());
        let first = &shifted.records.first().unwrap().value;
        let last = &shifted.records.last().unwrap().value;
        assert!(last <= first);
        // Shift periodicity: γ_i → γ_i + 1 changes nothing, exactly.
        let g_shift = [
            Coord::Exact(Scalar::Rational(q(13, 10))),
            Coord::Exact(Scalar::Rational(q(17, 10))),
        ];
        for n in [1i64, 7, 23, 100] {
            let v1 = propc1_value(&[a.clone(), b.clone()], &g, &Integer::from(n), P).unwrap();
            let v2 =
                propc1_value(&[a.clone(), b.clone()], &g_shift, &Integer::from(n), P).unwrap();
            assert_eq!(v1, v2);
        }
        // Sign symmetry at zero shift.
        let gz = [zero(), zero()];
        for n in [1i64, 46, 177] {
            let pos = propc1_value(&[a.clone(), b.clone()], &gz, &Integer::from(n), P).unwrap();
            let neg = propc1_value(&[a.clone(), b.clone()], &gz, &Integer::from(-n), P).unwrap();
            assert_eq!(pos, neg);
        }
    }

    #[test]
    fn second_type_scan_and_boundary() {
        // (1/2, 1/3) with γ = 5/6: the combination at (−1, 1) is exactly −1,
        // so the trace bottoms out at an exact zero within product 1.
        let v = [
            Coord::Exact(Scalar::Rational(q(1, 2))),
            Coord::Exact(Scalar::Rational(q(1, 3))),
        ];
        let gamma = Coord::Exact(Scalar::Rational(q(5, 6)));
        let trace = propc2_search(&v, &gamma, 1, P).unwrap();
        assert!(trace.is_strictly_decreasing());
        assert!(trace.records.last().unwrap().value.is_zero());
        // N = 1 only admits ±1 components.
        for r in &trace.records {
            let Witness::Vector(n) = &r.witness else {
                panic!("vector witnesses expected")
            };
            assert!(n.iter().all(|x| x.clone().abs() == 1u32));
        }
        // The direct value at (1, 1) is the trivial exact zero.
        let val = propc2_value(
            &v,
            &gamma,
            &[Integer::from(1), Integer::from(1)],
            P,
        )
        .unwrap();
        assert!(val.is_zero());
        // The cube-root pair drives a decreasing trace.
        let (a, b) = cbrt_pair();
        let t2 = propc2_search(&[a.clone(), b.clone()], &zero(), 300, P).unwrap();
        assert!(t2.records.len() >= 2);
        assert!(t2.is_strictly_decreasing());
        // Sign symmetry of the point value at zero shift.
        let nv = [Integer::from(3), Integer::from(-2)];
        let mv = [Integer::from(-3), Integer::from(2)];
        let x1 = propc2_value(&[a.clone(), b.clone()], &zero(), &nv, P).unwrap();
        let x2 = propc2_value(&[a.clone(), b.clone()], &zero(), &mv, P).unwrap();
        assert_eq!(x1, x2);
        // Zero components are rejected.
        assert!(matches!(
            propc2_value(
                &[a, b],
                &zero(),
                &[Integer::new(), Integer::from(1)],
                P
            ),
            Err(DiophError::PreconditionViolated(_))
        ));
    }

    #[test]
    fn record_values_survive_recomputation_at_double_precision() {
        let (a, b) = cbrt_pair();
        let v = [a, b];
        let gz = [zero(), zero()];
        let trace = propc1_search(&v, &gz, 5000, P).unwrap();
        assert!(!trace.records.is_empty());
        for r in &trace.records {
            let Witness::Scalar(n) = &r.witness else {
                panic!()
            };
            let hi = propc1_value(&v, &gz, n, 2 * P).unwrap();
            let diff = (BigReal::with_val(2 * P, &r.value) - hi).abs();
            assert!(diff < crate::arith::half_ulp_tolerance(P));
        }
    }

    #[test]
    fn grid_product_probe_controls() {
        // Z³ with no shift: a zero product is a certified hit.
        let z3 = LatticeBasis::standard(3, P).unwrap();
        let w0 = vec![big(P, 0), big(P, 0), big(P, 0)];
        let hit = gdp_probe(&z3, &w0, &big(P, 0), &big(P, 0.5), 2)
            .unwrap()
            .unwrap();
        assert!(hit.product.is_zero());
        assert!(hit.error.is_zero());
        // The all-halves shift keeps every product an odd multiple of 1/8,
        // so |product| ≥ 1/8 and a 0.1 window around zero stays empty…
        let wh = vec![big(P, 0.5), big(P, 0.5), big(P, 0.5)];
        let miss = gdp_probe(&z3, &wh, &big(P, 0), &big(P, 0.1), 4).unwrap();
        assert!(miss.is_none());
        // …while a 0.13 window certifies a hit at exactly ±1/8.
        let hit8 = gdp_probe(&z3, &wh, &big(P, 0), &big(P, 0.13), 4)
            .unwrap()
            .unwrap();
        assert!((hit8.error.clone() - big(P, 0.125)).abs() < big(64, 1e-40));
        // A genuinely irrational grid hits a transcendental target: the
        // sheared dual lattice of the cube-root pair against π.
        let v = VParams::exact(
            vec![
                Scalar::cbrt_rational(&q(2, 1)).unwrap(),
                Scalar::cbrt_rational(&q(4, 1)).unwrap(),
            ],
            P,
        )
        .unwrap();
        let zv = make_zv(&v).unwrap();
        let w = vec![big(P, 0.1), big(P, 0.2), big(P, 0.3)];
        let pi = BigReal::with_val(P, rug::float::Constant::Pi);
        let probe = gdp_probe(&zv, &w, &pi, &big(P, 0.05), 25).unwrap();
        let hit_pi = probe.expect("a witness within the box");
        assert!(hit_pi.error < big(P, 0.05));
        let recomputed = (hit_pi.product.clone() - &hit_pi.target).abs();
        assert!((recomputed - &hit_pi.error).abs() < crate::arith::half_ulp_tolerance(P));
        // Tolerance must be positive.
        assert!(matches!(
            gdp_probe(&z3, &w0, &big(P, 0), &big(P, 0), 1),
            Err(DiophError::PreconditionViolated(_))
        ));
    }
}
