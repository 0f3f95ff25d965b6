//! Integer and rational polynomials with exact root isolation.
//!
//! Real roots are isolated by Sturm bisection — every sign decision is made
//! in exact rational arithmetic — then refined by exact dyadic bisection.
//! Rational roots are excluded by refining each isolating interval until it
//! can contain at most one rational of denominator ≤ |leading coefficient|
//! and testing the simplest rational inside exactly. Complex roots come from
//! a simultaneous Aberth–Ehrlich iteration started from a deterministic
//! circle and are certified a posteriori by a residual bound evaluated at
//! doubled precision.

use std::cmp::Ordering;

use rug::ops::{DivRounding, Pow};
use serde::{Deserialize, Serialize};

use super::{ArithError, BigComplex, BigReal, Integer, Rational};

/// Polynomial with arbitrary-size integer coefficients, stored in ascending
/// degree order with a nonzero leading coefficient (the zero polynomial is
/// the empty coefficient list).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntPoly {
    coeffs: Vec<Integer>,
}

impl std::fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.cmp0() == Ordering::Equal {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*t")?,
                _ => write!(f, "{c}*t^{i}")?,
            }
        }
        Ok(())
    }
}

impl IntPoly {
    /// Builds from ascending coefficients, trimming leading zeros.
    pub fn new(mut coeffs: Vec<Integer>) -> Self {
        while coeffs.last().map(|c| c.cmp0() == Ordering::Equal) == Some(true) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    /// Ascending `i64` coefficients.
    pub fn from_ascending_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Integer::from(x)).collect())
    }

    /// Descending `i64` coefficients (the order minimal polynomials are
    /// usually written in, e.g. `[1, 0, 0, -2]` for t³ − 2).
    pub fn from_descending_i64(c: &[i64]) -> Self {
        let mut v: Vec<i64> = c.to_vec();
        v.reverse();
        Self::from_ascending_i64(&v)
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of t^i (zero beyond the stored length).
    pub fn coeff(&self, i: usize) -> Integer {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Integer> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Integer::from(c) * (i as u64))
                .collect(),
        )
    }

    /// gcd of the coefficients (0 for the zero polynomial).
    pub fn content(&self) -> Integer {
        let mut g = Integer::new();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        g
    }

    /// Divides out the content and normalizes the leading coefficient to be
    /// positive. The zero polynomial maps to itself.
    pub fn primitive_part(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut g = self.content();
        if self.leading().unwrap().cmp0() == Ordering::Less {
            g = -g;
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .map(|c| Integer::from(c / &g))
                .collect(),
        )
    }

    /// Exact evaluation at a rational point (Horner).
    pub fn eval_q(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Exact evaluation at an integer point.
    pub fn eval_int(&self, x: &Integer) -> Integer {
        let mut acc = Integer::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Floating evaluation at precision `prec` (Horner; relative error a few
    /// ulps times the condition number of the evaluation).
    pub fn eval_f(&self, x: &BigReal, prec: u32) -> BigReal {
        let mut acc = BigReal::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Floating complex evaluation at precision `prec`.
    pub fn eval_c(&self, z: &BigComplex, prec: u32) -> BigComplex {
        let mut acc = BigComplex::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }

    /// Sum of absolute coefficient values.
    pub fn one_norm(&self) -> Integer {
        let mut s = Integer::new();
        for c in &self.coeffs {
            s += Integer::from(c.abs_ref());
        }
        s
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![Integer::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Integer::from(a * b);
            }
        }
        IntPoly::new(out)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        IntPoly::new(out)
    }

    /// Degree of gcd(p, p′); zero means squarefree.
    pub fn squarefree_defect(&self) -> usize {
        if self.coeffs.len() <= 1 {
            return 0;
        }
        let g = QPoly::from_int(self).gcd(&QPoly::from_int(&self.derivative()));
        g.degree().unwrap_or(0)
    }

    pub fn is_squarefree(&self) -> bool {
        self.squarefree_defect() == 0
    }

    /// Strict upper bound on the absolute value of every root (Cauchy bound).
    pub fn root_bound(&self) -> Rational {
        let lead = self.leading().expect("root_bound of zero polynomial");
        let mut best = Rational::new();
        for c in self.coeffs.iter().take(self.coeffs.len() - 1) {
            let r = Rational::from((Integer::from(c.abs_ref()), Integer::from(lead.abs_ref())));
            if r > best {
                best = r;
            }
        }
        best + 1u32
    }
}

/// Polynomial with exact rational coefficients, ascending order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().map(|c| c.cmp0() == Ordering::Equal) == Some(true) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: Vec::new() }
    }

    pub fn from_int(p: &IntPoly) -> Self {
        QPoly::new(p.coeffs().iter().map(|c| Rational::from(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn eval_f(&self, x: &BigReal, prec: u32) -> BigReal {
        let mut acc = BigReal::with_val(prec, 0);
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> QPoly {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * Rational::from(i as u64))
                .collect(),
        )
    }

    pub fn neg(&self) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn scale(&self, s: &Rational) -> QPoly {
        QPoly::new(self.coeffs.iter().map(|c| Rational::from(c * s)).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(out)
    }

    /// Exact Euclidean division: returns (quotient, remainder).
    pub fn divrem(&self, div: &QPoly) -> (QPoly, QPoly) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.degree().unwrap();
        let lead = div.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![Rational::new(); self.coeffs.len().saturating_sub(dd)];
        while rem.len() > dd {
            let k = rem.len() - 1 - dd;
            let factor = Rational::from(rem.last().unwrap() / &lead);
            if factor.cmp0() != Ordering::Equal {
                for i in 0..=dd {
                    let sub = Rational::from(&div.coeffs[i] * &factor);
                    rem[k + i] -= sub;
                }
                quo[k] = factor;
            }
            debug_assert_eq!(rem.last().unwrap().cmp0(), Ordering::Equal);
            rem.pop();
        }
        (QPoly::new(quo), QPoly::new(rem))
    }

    pub fn rem(&self, div: &QPoly) -> QPoly {
        self.divrem(div).1
    }

    /// Monic multiple of self (self divided by its leading coefficient).
    pub fn monic(&self) -> QPoly {
        match self.leading() {
            None => QPoly::zero(),
            Some(l) => {
                let inv = Rational::from(l.recip_ref());
                self.scale(&inv)
            }
        }
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Clears denominators and the content: returns the primitive integer
    /// polynomial with the same roots and positive leading coefficient.
    pub fn to_primitive_int(&self) -> IntPoly {
        if self.is_zero() {
            return IntPoly::zero();
        }
        let mut den = Integer::from(1);
        for c in &self.coeffs {
            den = den.lcm(c.denom());
        }
        let ints: Vec<Integer> = self
            .coeffs
            .iter()
            .map(|c| {
                let scaled = Rational::from(c * &den);
                debug_assert_eq!(scaled.denom(), &Integer::from(1));
                scaled.numer().clone()
            })
            .collect();
        IntPoly::new(ints).primitive_part()
    }
}

// ---------------------------------------------------------------------------
// Sturm sequences and exact real-root isolation
// ---------------------------------------------------------------------------

/// Sturm sequence of p: p₀ = p, p₁ = p′, p_{k+1} = −rem(p_{k−1}, p_k).
pub fn sturm_sequence(p: &QPoly) -> Vec<QPoly> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            return seq;
        }
        let r = seq[n - 2].rem(&seq[n - 1]).neg();
        if r.is_zero() {
            return seq;
        }
        seq.push(r);
    }
}

fn sign_variations(signs: impl Iterator<Item = Ordering>) -> usize {
    let mut count = 0;
    let mut last: Option<Ordering> = None;
    for s in signs {
        if s == Ordering::Equal {
            continue;
        }
        if let Some(prev) = last {
            if prev != s {
                count += 1;
            }
        }
        last = Some(s);
    }
    count
}

fn variations_at(seq: &[QPoly], x: &Rational) -> usize {
    sign_variations(seq.iter().map(|p| p.eval(x).cmp0()))
}

/// Number of distinct real roots of the defining polynomial in (lo, hi],
/// assuming p(lo) ≠ 0 (Sturm's theorem).
pub fn count_roots_in(seq: &[QPoly], lo: &Rational, hi: &Rational) -> usize {
    variations_at(seq, lo) - variations_at(seq, hi)
}

/// Number of distinct real roots of p (exact, Sturm).
pub fn count_real_roots(p: &IntPoly) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let b = p.root_bound();
    let seq = sturm_sequence(&QPoly::from_int(p));
    count_roots_in(&seq, &Rational::from(-b.clone()), &b)
}

/// Signature (r, s) of a squarefree polynomial: r real roots, s conjugate
/// pairs, r + 2s = degree. Exact (Sturm count); no roots are refined.
pub fn signature(p: &IntPoly) -> Result<(usize, usize), ArithError> {
    let d = p.degree().ok_or(ArithError::ZeroPolynomial)?;
    if d == 0 {
        return Err(ArithError::ZeroPolynomial);
    }
    let defect = p.squarefree_defect();
    if defect > 0 {
        return Err(ArithError::NotSquarefree(defect));
    }
    let r = count_real_roots(p);
    debug_assert_eq!((d - r) % 2, 0);
    Ok((r, (d - r) / 2))
}

/// Result of refining a sign-change interval.
enum Refined {
    Interval(Rational, Rational),
    ExactRoot(Rational),
}

/// Bisects a sign-change interval of p down to the target width, preserving
/// the sign change. Detects an exact rational root if a midpoint hits one.
fn refine_sign_change(p: &IntPoly, mut lo: Rational, mut hi: Rational, target: &Rational) -> Refined {
    let sign_lo = p.eval_q(&lo).cmp0();
    debug_assert_ne!(sign_lo, Ordering::Equal);
    debug_assert_ne!(p.eval_q(&hi).cmp0(), Ordering::Equal);
    debug_assert_ne!(sign_lo, p.eval_q(&hi).cmp0());
    while Rational::from(&hi - &lo) > *target {
        let mid = Rational::from(&lo + &hi) / 2u32;
        let s = p.eval_q(&mid).cmp0();
        if s == Ordering::Equal {
            return Refined::ExactRoot(mid);
        }
        if s == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Refined::Interval(lo, hi)
}

/// The rational with the smallest denominator in the closed interval
/// [lo, hi] (ties on denominator resolved toward zero). Classical
/// Stern–Brocot / continued-fraction construction, exact.
pub fn simplest_in_interval(lo: &Rational, hi: &Rational) -> Rational {
    assert!(lo <= hi);
    // An integer in range wins outright.
    let ceil_lo = Integer::from(lo.numer().div_ceil(lo.denom()));
    let floor_hi = Integer::from(hi.numer().div_floor(hi.denom()));
    if ceil_lo <= floor_hi {
        let zero = Integer::new();
        let pick = if ceil_lo > zero {
            ceil_lo
        } else if floor_hi < zero {
            floor_hi
        } else {
            zero
        };
        return Rational::from(pick);
    }
    // lo and hi share the same integer part f and neither is an integer.
    let f = Integer::from(lo.numer().div_floor(lo.denom()));
    let f_rat = Rational::from(&f);
    let lo_frac = Rational::from(lo - &f_rat);
    let hi_frac = Rational::from(hi - &f_rat);
    let inner = simplest_in_interval(
        &Rational::from(hi_frac.recip_ref()),
        &Rational::from(lo_frac.recip_ref()),
    );
    f_rat + Rational::from(inner.recip_ref())
}

/// Isolates all real roots of a squarefree integer polynomial into disjoint
/// open intervals with rational endpoints that are not roots, in ascending
/// order. Errors with [`ArithError::RationalRootFound`] if a bisection
/// midpoint happens to be a root (callers wanting a complete rational-root
/// exclusion must follow with [`exclude_rational_roots`]).
pub fn isolate_real_roots(p: &IntPoly) -> Result<Vec<(Rational, Rational)>, ArithError> {
    let d = p.degree().ok_or(ArithError::ZeroPolynomial)?;
    if d == 0 {
        return Err(ArithError::ZeroPolynomial);
    }
    let defect = p.squarefree_defect();
    if defect > 0 {
        return Err(ArithError::NotSquarefree(defect));
    }
    let p = p.primitive_part();
    let bound = p.root_bound();
    let seq = sturm_sequence(&QPoly::from_int(&p));
    let lo = Rational::from(-bound.clone());
    let hi = bound;
    let mut out = Vec::new();
    let mut stack = vec![(lo, hi)];
    while let Some((a, b)) = stack.pop() {
        let n = count_roots_in(&seq, &a, &b);
        match n {
            0 => {}
            1 => {
                // A single simple root in (a, b]; b is not a root (checked on
                // construction), so the root is interior and the endpoint
                // signs differ.
                debug_assert_ne!(p.eval_q(&a).cmp0(), p.eval_q(&b).cmp0());
                out.push((a, b));
            }
            _ => {
                let mid = Rational::from(&a + &b) / 2u32;
                if p.eval_q(&mid).cmp0() == Ordering::Equal {
                    return Err(ArithError::RationalRootFound(mid));
                }
                stack.push((a, mid.clone()));
                stack.push((mid, b));
            }
        }
    }
    out.sort_by(|x, y| x.0.cmp(&y.0));
    Ok(out)
}

/// Proves that none of the isolated roots is rational, or reports one.
///
/// Any rational root of a primitive integer polynomial has denominator
/// dividing the leading coefficient. Each interval is refined until it is
/// narrower than 1/(2·lc²), so it contains at most one rational with
/// denominator ≤ |lc|; the simplest rational inside is then the only
/// candidate and is tested by exact evaluation.
pub fn exclude_rational_roots(
    p: &IntPoly,
    intervals: &[(Rational, Rational)],
) -> Result<(), ArithError> {
    let p = p.primitive_part();
    let lc = Integer::from(p.leading().expect("nonzero").abs_ref());
    let width = Rational::from((Integer::from(1), Integer::from(2) * lc.pow(2)));
    for (lo, hi) in intervals {
        let (a, b) = match refine_sign_change(&p, lo.clone(), hi.clone(), &width) {
            Refined::ExactRoot(r) => return Err(ArithError::RationalRootFound(r)),
            Refined::Interval(a, b) => (a, b),
        };
        let candidate = simplest_in_interval(&a, &b);
        if p.eval_q(&candidate).cmp0() == Ordering::Equal {
            return Err(ArithError::RationalRootFound(candidate));
        }
    }
    Ok(())
}

/// Refines an isolating interval to absolute width ≤ 2^(−bits) · max(1, |x|).
/// The polynomial must have no rational roots in the interval (run
/// [`exclude_rational_roots`] first); midpoint hits are then impossible.
pub fn refine_to_bits(p: &IntPoly, lo: &Rational, hi: &Rational, bits: u32) -> (Rational, Rational) {
    // First localize to width ≤ 1/4 so the magnitude scale is known.
    let quarter = Rational::from((1u32, 4u32));
    let (lo, hi) = match refine_sign_change(p, lo.clone(), hi.clone(), &quarter) {
        Refined::ExactRoot(_) => unreachable!("rational roots were excluded"),
        Refined::Interval(a, b) => (a, b),
    };
    let mut mag = std::cmp::max(Rational::from(lo.abs_ref()), Rational::from(hi.abs_ref()));
    if mag < 1u32 {
        mag = Rational::from(1);
    }
    let scale_num = Integer::from(mag.numer().div_floor(mag.denom())) + 1u32;
    let target = Rational::from((scale_num, Integer::from(1) << bits));
    match refine_sign_change(p, lo, hi, &target) {
        Refined::ExactRoot(_) => unreachable!("rational roots were excluded"),
        Refined::Interval(a, b) => (a, b),
    }
}

// ---------------------------------------------------------------------------
// Power sums, resultants
// ---------------------------------------------------------------------------

/// Power sums s_k = Σ_i θ_i^k of the roots of p for k = 0..=upto, exact via
/// Newton's identities on the monic normalization.
pub fn power_sums(p: &IntPoly, upto: usize) -> Vec<Rational> {
    let d = p.degree().expect("power_sums of zero polynomial");
    let lead = Rational::from(p.leading().unwrap());
    // b[j] = coefficient of t^j of the monic normalization, j = 0..d.
    let b: Vec<Rational> = (0..=d)
        .map(|j| Rational::from(p.coeff(j)) / lead.clone())
        .collect();
    let mut s = vec![Rational::from(d as u64)];
    for k in 1..=upto {
        let mut acc = Rational::new();
        if k <= d {
            acc -= b[d - k].clone() * Rational::from(k as u64);
            for i in 1..k {
                acc -= Rational::from(&b[d - i] * &s[k - i]);
            }
        } else {
            for i in 1..=d {
                acc -= Rational::from(&b[d - i] * &s[k - i]);
            }
        }
        s.push(acc);
    }
    s
}

/// Exact determinant of a square rational matrix (Gaussian elimination).
fn det_q(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::from(1);
    for col in 0..n {
        let pivot_row = match (col..n).find(|&r| m[r][col].cmp0() != Ordering::Equal) {
            Some(r) => r,
            None => return Rational::new(),
        };
        if pivot_row != col {
            m.swap(pivot_row, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in (col + 1)..n {
            if m[r][col].cmp0() == Ordering::Equal {
                continue;
            }
            let factor = Rational::from(&m[r][col] / &pivot);
            for c in col..n {
                let sub = Rational::from(&m[col][c] * &factor);
                m[r][c] -= sub;
            }
        }
    }
    det
}

/// Resultant of two rational polynomials, with the convention
/// res(a, b) = lc(a)^{deg b} · ∏ b(α_i) over the roots α_i of a.
/// Exact (Sylvester determinant).
pub fn resultant_q(a: &QPoly, b: &QPoly) -> Rational {
    let (da, db) = match (a.degree(), b.degree()) {
        (Some(da), Some(db)) => (da, db),
        // Conventions for degenerate cases: the resultant with the zero
        // polynomial is zero unless the other one is a nonzero constant.
        (None, _) | (_, None) => return Rational::new(),
    };
    if da == 0 {
        return a.leading().unwrap().clone().pow(db as u32);
    }
    if db == 0 {
        return b.leading().unwrap().clone().pow(da as u32);
    }
    let n = da + db;
    let mut m = vec![vec![Rational::new(); n]; n];
    for row in 0..db {
        for (k, idx) in (0..=da).rev().enumerate() {
            m[row][row + k] = a.coeff(idx);
        }
    }
    for row in 0..da {
        for (k, idx) in (0..=db).rev().enumerate() {
            m[db + row][row + k] = b.coeff(idx);
        }
    }
    det_q(m)
}

// ---------------------------------------------------------------------------
// Certified root sets
// ---------------------------------------------------------------------------

/// All roots of a squarefree integer polynomial, certified at a precision.
///
/// `real` holds the real roots in ascending order; `complex` holds one
/// representative per conjugate pair, with strictly positive imaginary part,
/// sorted by (re, im). r + 2s = degree.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub real: Vec<BigReal>,
    pub complex: Vec<BigComplex>,
    pub precision: u32,
}

impl RootSet {
    pub fn signature(&self) -> (usize, usize) {
        (self.real.len(), self.complex.len())
    }

    pub fn degree(&self) -> usize {
        self.real.len() + 2 * self.complex.len()
    }

    /// All d roots as complexes: the real ones first (imaginary part exactly
    /// zero, ascending), then the upper-half-plane representatives.
    pub fn all(&self) -> Vec<BigComplex> {
        let p = self.precision;
        let mut out: Vec<BigComplex> = self
            .real
            .iter()
            .map(|r| BigComplex::with_val(p, (r.clone(), BigReal::with_val(p, 0))))
            .collect();
        out.extend(self.complex.iter().cloned());
        out
    }
}

/// Certification scale for a residual at a point: ‖p‖₁ · max(1, |z|)^deg.
fn residual_scale(p: &IntPoly, z_abs: &BigReal, prec: u32) -> BigReal {
    let d = p.degree().unwrap() as u32;
    let one = BigReal::with_val(prec, 1);
    let m = if *z_abs > one {
        z_abs.clone()
    } else {
        one
    };
    BigReal::with_val(prec, m.pow(d)) * BigReal::with_val(prec, p.one_norm())
}

fn certify_real(p: &IntPoly, x: &BigReal, prec: u32) -> bool {
    let hp = 2 * prec;
    let resid = p.eval_f(x, hp).abs();
    let scale = residual_scale(p, &BigReal::with_val(hp, x.clone().abs()), hp);
    let tol = BigReal::with_val(hp, BigReal::i_exp(1, -((prec / 2) as i32)));
    resid < tol * scale
}

fn certify_complex(p: &IntPoly, z: &BigComplex, prec: u32) -> bool {
    let hp = 2 * prec;
    let resid = p.eval_c(z, hp).abs().into_real_imag().0;
    let zabs = BigComplex::with_val(hp, z).abs().into_real_imag().0;
    let scale = residual_scale(p, &zabs, hp);
    let tol = BigReal::with_val(hp, BigReal::i_exp(1, -((prec / 2) as i32)));
    resid < tol * scale
}

/// Simultaneous Aberth–Ehrlich iteration for all roots of p at the given
/// working precision. Deterministic circle initialization (no RNG).
/// Returns None if it fails to settle within the iteration budget.
fn aberth_all(p: &IntPoly, prec: u32, max_iter: usize) -> Option<Vec<BigComplex>> {
    let d = p.degree().unwrap();
    let dp = p.derivative();
    // Initial points on a circle of Cauchy-bound radius, angles offset so the
    // configuration is not symmetric about the real axis.
    let radius = BigReal::with_val(prec, p.root_bound());
    let two_pi = BigReal::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let mut z: Vec<BigComplex> = (0..d)
        .map(|k| {
            let frac = BigReal::with_val(prec, k as u64) + BigReal::with_val(prec, 0.37);
            let theta = two_pi.clone() * frac / BigReal::with_val(prec, d as u64);
            let (sin, cos) = theta.sin_cos(BigReal::new(prec));
            BigComplex::with_val(prec, (cos * &radius, sin * &radius))
        })
        .collect();
    let settle = BigReal::with_val(prec, BigReal::i_exp(1, -(prec as i32 - 8)));
    let mut quiet_sweeps = 0usize;
    for _ in 0..max_iter {
        let mut max_rel_step = BigReal::with_val(prec, 0);
        for k in 0..d {
            let pv = p.eval_c(&z[k], prec);
            let dv = dp.eval_c(&z[k], prec);
            if dv.clone().abs().into_real_imag().0.is_zero() {
                // Derivative vanished at the iterate: nudge deterministically.
                z[k] += BigComplex::with_val(prec, (0.125f64, 0.0625f64));
                max_rel_step = BigReal::with_val(prec, 1);
                continue;
            }
            let newton = pv / dv;
            let mut sum = BigComplex::with_val(prec, 0);
            let mut collision = false;
            for j in 0..d {
                if j == k {
                    continue;
                }
                let diff = BigComplex::with_val(prec, &z[k] - &z[j]);
                if diff.clone().abs().into_real_imag().0.is_zero() {
                    collision = true;
                    break;
                }
                sum += diff.recip();
            }
            if collision {
                z[k] += BigComplex::with_val(prec, (0.125f64, 0.0625f64));
                max_rel_step = BigReal::with_val(prec, 1);
                continue;
            }
            let denom = BigComplex::with_val(prec, 1) - newton.clone() * sum;
            if denom.clone().abs().into_real_imag().0.is_zero() {
                z[k] += BigComplex::with_val(prec, (0.125f64, 0.0625f64));
                max_rel_step = BigReal::with_val(prec, 1);
                continue;
            }
            let step = newton / denom;
            let step_size = step.clone().abs().into_real_imag().0;
            let z_mag = z[k].clone().abs().into_real_imag().0 + 1u32;
            let rel = step_size / z_mag;
            if rel > max_rel_step {
                max_rel_step = rel;
            }
            z[k] -= step;
        }
        if max_rel_step < settle {
            quiet_sweeps += 1;
            if quiet_sweeps >= 2 {
                return Some(z);
            }
        } else {
            quiet_sweeps = 0;
        }
    }
    None
}

/// All roots of a squarefree integer polynomial with no rational roots,
/// certified so that |p(root)| < 2^(−P/2) · ‖p‖₁ · max(1, |root|)^deg.
///
/// Real roots are found by exact Sturm isolation plus dyadic bisection (the
/// certificate is a sign change straddling the returned value); complex ones
/// by Aberth–Ehrlich iteration with an a-posteriori residual check at
/// doubled precision. Errors: [`ArithError::NotSquarefree`],
/// [`ArithError::RationalRootFound`] (reducible input — degree-1 inputs
/// always take this path), and the defensive
/// [`ArithError::RootCertification`].
pub fn poly_roots(p: &IntPoly, prec: u32) -> Result<RootSet, ArithError> {
    let d = p.degree().ok_or(ArithError::ZeroPolynomial)?;
    if d == 0 {
        return Err(ArithError::ZeroPolynomial);
    }
    let p = p.primitive_part();
    let intervals = isolate_real_roots(&p)?;
    exclude_rational_roots(&p, &intervals)?;

    let mut real = Vec::with_capacity(intervals.len());
    for (lo, hi) in &intervals {
        let (a, b) = refine_to_bits(&p, lo, hi, prec + 16);
        let mid = (a + b) / 2u32;
        let x = BigReal::with_val(prec, &mid);
        if !certify_real(&p, &x, prec) {
            return Err(ArithError::RootCertification(prec));
        }
        real.push(x);
    }

    let r = real.len();
    debug_assert_eq!((d - r) % 2, 0);
    let s = (d - r) / 2;
    let mut complex: Vec<BigComplex> = Vec::with_capacity(s);
    if s > 0 {
        let mut done = false;
        let mut attempt = 0u32;
        while !done && attempt < 4 {
            let pw = (prec + 64) << attempt;
            attempt += 1;
            let Some(mut approx) = aberth_all(&p, pw, 2000) else {
                continue;
            };
            // Remove the iterate nearest to each certified real root; what
            // remains must be the complex conjugate pairs.
            for x in &real {
                let target = BigComplex::with_val(pw, (x, 0));
                let (idx, _) = approx
                    .iter()
                    .enumerate()
                    .map(|(i, z)| {
                        (
                            i,
                            BigComplex::with_val(pw, z - &target).abs().into_real_imag().0,
                        )
                    })
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                    .expect("nonempty");
                approx.swap_remove(idx);
            }
            let mut upper: Vec<BigComplex> = approx
                .into_iter()
                .filter(|z| z.imag().is_sign_positive() && !z.imag().is_zero())
                .map(|z| BigComplex::with_val(prec, z))
                .collect();
            if upper.len() != s {
                continue;
            }
            if upper.iter().all(|z| certify_complex(&p, z, prec)) {
                upper.sort_by(|a, b| {
                    a.real()
                        .partial_cmp(b.real())
                        .unwrap()
                        .then(a.imag().partial_cmp(b.imag()).unwrap())
                });
                complex = upper;
                done = true;
            }
        }
        if !done {
            return Err(ArithError::RootCertification(prec));
        }
    }

    Ok(RootSet {
        real,
        complex,
        precision: prec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn eval_and_derivative() {
        let p = IntPoly::from_descending_i64(&[1, 0, -3, -1]); // t³ − 3t − 1
        assert_eq!(p.eval_q(&q(2, 1)), q(1, 1));
        assert_eq!(p.derivative(), IntPoly::from_descending_i64(&[3, 0, -3]));
        assert_eq!(p.degree(), Some(3));
    }

    #[test]
    fn sturm_counts_real_roots() {
        assert_eq!(count_real_roots(&IntPoly::from_descending_i64(&[1, 0, -3, -1])), 3);
        assert_eq!(count_real_roots(&IntPoly::from_descending_i64(&[1, 0, 0, -2])), 1);
        assert_eq!(count_real_roots(&IntPoly::from_descending_i64(&[1, 0, 1])), 0);
        assert_eq!(count_real_roots(&IntPoly::from_descending_i64(&[1, 0, 0, 0, 1])), 0);
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&IntPoly::from_descending_i64(&[1, 0, 0, -2])).unwrap(), (1, 1));
        assert_eq!(signature(&IntPoly::from_descending_i64(&[1, 0, -3, -1])).unwrap(), (3, 0));
        assert_eq!(signature(&IntPoly::from_descending_i64(&[1, 0, 1])).unwrap(), (0, 1));
    }

    #[test]
    fn simplest_rational_in_interval() {
        assert_eq!(simplest_in_interval(&q(3, 10), &q(34, 100)), q(1, 3));
        assert_eq!(simplest_in_interval(&q(-1, 2), &q(1, 2)), q(0, 1));
        assert_eq!(simplest_in_interval(&q(22, 10), &q(37, 10)), q(3, 1));
        assert_eq!(simplest_in_interval(&q(499, 1000), &q(501, 1000)), q(1, 2));
    }

    #[test]
    fn rational_roots_are_reported() {
        // t³ − 1 = (t − 1)(t² + t + 1)
        let p = IntPoly::from_descending_i64(&[1, 0, 0, -1]);
        let intervals = isolate_real_roots(&p).unwrap();
        match exclude_rational_roots(&p, &intervals) {
            Err(ArithError::RationalRootFound(r)) => assert_eq!(r, q(1, 1)),
            other => panic!("expected rational root, got {other:?}"),
        }
        // 2t³ − 3t² − 4t + 6 = (2t − 3)(t² − 2); the root 3/2 is dyadic, so
        // either the isolation bisection or the exclusion step may report it.
        let p = IntPoly::from_descending_i64(&[2, -3, -4, 6]);
        let res = isolate_real_roots(&p).and_then(|iv| exclude_rational_roots(&p, &iv));
        match res {
            Err(ArithError::RationalRootFound(r)) => assert_eq!(r, q(3, 2)),
            other => panic!("expected rational root 3/2, got {other:?}"),
        }
    }

    #[test]
    fn squarefree_defect_detected() {
        // (t² − 2)² = t⁴ − 4t² + 4
        let p = IntPoly::from_descending_i64(&[1, 0, -4, 0, 4]);
        match poly_roots(&p, 128) {
            Err(ArithError::NotSquarefree(k)) => assert_eq!(k, 2),
            other => panic!("expected NotSquarefree, got {other:?}"),
        }
    }

    #[test]
    fn roots_of_cubics() {
        let p = IntPoly::from_descending_i64(&[1, 0, 0, -2]);
        let rs = poly_roots(&p, 256).unwrap();
        assert_eq!(rs.signature(), (1, 1));
        let cbrt2 = BigReal::with_val(320, 2).cbrt();
        let diff = BigReal::with_val(320, &rs.real[0] - &cbrt2).abs();
        assert!(diff < BigReal::with_val(64, BigReal::i_exp(1, -250)), "real root off by {diff}");
        // complex representative: −cbrt2/2 + i·cbrt2·√3/2
        let re_expect = BigReal::with_val(320, -&cbrt2) / 2u32;
        let im_expect = BigReal::with_val(320, 3).sqrt() * &cbrt2 / 2u32;
        let dre = BigReal::with_val(320, rs.complex[0].real() - &re_expect).abs();
        let dim = BigReal::with_val(320, rs.complex[0].imag() - &im_expect).abs();
        assert!(dre < BigReal::with_val(64, BigReal::i_exp(1, -200)));
        assert!(dim < BigReal::with_val(64, BigReal::i_exp(1, -200)));

        let p = IntPoly::from_descending_i64(&[1, 0, -3, -1]);
        let rs = poly_roots(&p, 256).unwrap();
        assert_eq!(rs.signature(), (3, 0));
        assert!(rs.real.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn root_of_t2_plus_1_is_i() {
        let p = IntPoly::from_descending_i64(&[1, 0, 1]);
        let rs = poly_roots(&p, 256).unwrap();
        assert_eq!(rs.signature(), (0, 1));
        let z = &rs.complex[0];
        let tol = BigReal::with_val(64, BigReal::i_exp(1, -120));
        assert!(z.real().clone().abs() < tol);
        assert!(BigReal::with_val(256, z.imag() - 1u32).abs() < tol);
    }

    #[test]
    fn power_sums_of_cubic() {
        // t³ − 3t − 1: s1 = 0, s2 = 6, s3 = 3, s4 = 18.
        let p = IntPoly::from_descending_i64(&[1, 0, -3, -1]);
        let s = power_sums(&p, 4);
        assert_eq!(s[0], q(3, 1));
        assert_eq!(s[1], q(0, 1));
        assert_eq!(s[2], q(6, 1));
        assert_eq!(s[3], q(3, 1));
        assert_eq!(s[4], q(18, 1));
    }

    #[test]
    fn resultant_convention() {
        // res(t³ − 2, t − 1) = ∏ (roots of t−1 evaluated in t³−2)… with our
        // convention: lc(a)^{deg b} ∏ b(α_i) = ∏ (α_i − 1) = 1.
        let a = QPoly::from_int(&IntPoly::from_descending_i64(&[1, 0, 0, -2]));
        let b = QPoly::from_int(&IntPoly::from_descending_i64(&[1, -1]));
        assert_eq!(resultant_q(&a, &b), q(1, 1));
        // res(t² − 2, t² − 3) = (2−3)² = … ∏(β² − 2) over β = ±√3 → (3−2)² = 1.
        let a = QPoly::from_int(&IntPoly::from_descending_i64(&[1, 0, -2]));
        let b = QPoly::from_int(&IntPoly::from_descending_i64(&[1, 0, -3]));
        assert_eq!(resultant_q(&a, &b), q(1, 1));
    }

    #[test]
    fn divrem_roundtrip() {
        let a = QPoly::from_int(&IntPoly::from_descending_i64(&[3, 1, -2, 7, 5]));
        let b = QPoly::from_int(&IntPoly::from_descending_i64(&[2, 0, -1]));
        let (qq, r) = a.divrem(&b);
        let back = qq.mul(&b).add(&r);
        assert_eq!(back, a);
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }
}
