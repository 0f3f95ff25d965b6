//! Exact handles for real algebraic numbers.
//!
//! An [`AlgebraicReal`] is a squarefree primitive integer polynomial together
//! with an isolating interval with rational endpoints. The handle can be
//! re-evaluated at any precision on demand (unlike a plain [`BigReal`], which
//! is frozen at its creation precision), and supports exact sign tests and
//! comparisons with rationals — the primitive that makes "this coordinate is
//! irrational, hence nonzero" a theorem rather than a float heuristic.

use std::cmp::Ordering;

use rug::ops::{DivRounding, Pow};
use serde::{Deserialize, Serialize};

use super::poly::{
    count_roots_in, exclude_rational_roots, isolate_real_roots, refine_to_bits, sturm_sequence,
    IntPoly, QPoly,
};
use super::{ArithError, BigReal, Integer, Rational};

/// A real algebraic number, exactly: squarefree primitive minimal-candidate
/// polynomial plus an open isolating interval (lo, hi) containing exactly one
/// root, with p(lo), p(hi) ≠ 0.
///
/// Irreducibility of the polynomial beyond a rational-root exclusion is the
/// caller's responsibility (documented precondition of the whole layer);
/// everything here only needs squarefreeness and the isolation certificate.
///
/// Equality compares the defining data (same polynomial, overlapping
/// isolating intervals), which implies the same real number; it can report
/// `false` for equal numbers presented through different polynomials.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraicReal {
    minpoly: IntPoly,
    lo: Rational,
    hi: Rational,
}

impl PartialEq for AlgebraicReal {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.lo < other.hi && other.lo < self.hi
    }
}

impl AlgebraicReal {
    /// Validates and builds a handle. The polynomial is replaced by its
    /// primitive part; the interval must isolate exactly one real root and
    /// must not contain a rational root (degree-1 inputs therefore always
    /// error with [`ArithError::RationalRootFound`]).
    pub fn new(minpoly: IntPoly, lo: Rational, hi: Rational) -> Result<Self, ArithError> {
        let p = minpoly.primitive_part();
        let d = p.degree().ok_or(ArithError::ZeroPolynomial)?;
        if d == 0 {
            return Err(ArithError::ZeroPolynomial);
        }
        let defect = p.squarefree_defect();
        if defect > 0 {
            return Err(ArithError::NotSquarefree(defect));
        }
        if lo >= hi {
            return Err(ArithError::RootCertification(0));
        }
        if p.eval_q(&lo).cmp0() == Ordering::Equal {
            return Err(ArithError::RationalRootFound(lo));
        }
        if p.eval_q(&hi).cmp0() == Ordering::Equal {
            return Err(ArithError::RationalRootFound(hi));
        }
        let seq = sturm_sequence(&QPoly::from_int(&p));
        if count_roots_in(&seq, &lo, &hi) != 1 {
            return Err(ArithError::RootCertification(0));
        }
        exclude_rational_roots(&p, std::slice::from_ref(&(lo.clone(), hi.clone())))?;
        Ok(AlgebraicReal { minpoly: p, lo, hi })
    }

    /// All real roots of `p` as handles, ascending.
    pub fn real_roots_of(p: &IntPoly) -> Result<Vec<AlgebraicReal>, ArithError> {
        let prim = p.primitive_part();
        let intervals = isolate_real_roots(&prim)?;
        exclude_rational_roots(&prim, &intervals)?;
        Ok(intervals
            .into_iter()
            .map(|(lo, hi)| AlgebraicReal {
                minpoly: prim.clone(),
                lo,
                hi,
            })
            .collect())
    }

    /// The `index`-th real root of `p` in ascending order.
    pub fn nth_real_root(p: &IntPoly, index: usize) -> Result<AlgebraicReal, ArithError> {
        let mut roots = Self::real_roots_of(p)?;
        if index >= roots.len() {
            return Err(ArithError::RootCertification(index as u32));
        }
        Ok(roots.swap_remove(index))
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.minpoly.degree().expect("validated nonzero")
    }

    /// Current (unrefined) isolating interval.
    pub fn interval(&self) -> (&Rational, &Rational) {
        (&self.lo, &self.hi)
    }

    /// Isolating interval refined to width ≤ 2^(−bits) · max(1, |x|).
    pub fn refined(&self, bits: u32) -> (Rational, Rational) {
        refine_to_bits(&self.minpoly, &self.lo, &self.hi, bits)
    }

    /// Evaluation at the given precision; correct within two ulps.
    pub fn to_float(&self, prec: u32) -> BigReal {
        let (a, b) = self.refined(prec + 8);
        let mid = (a + b) / 2u32;
        BigReal::with_val(prec, &mid)
    }

    /// Exact comparison with a rational (never `Equal`: the handle has no
    /// rational roots in its interval, and outside it the interval decides).
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        if *q <= self.lo {
            return Ordering::Greater;
        }
        if *q >= self.hi {
            return Ordering::Less;
        }
        // q is interior; x > q  ⇔  p(q) has the same sign as p(lo).
        let sign_lo = self.minpoly.eval_q(&self.lo).cmp0();
        let sign_q = self.minpoly.eval_q(q).cmp0();
        debug_assert_ne!(sign_q, Ordering::Equal, "rational roots were excluded");
        if sign_q == sign_lo {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    /// Exact sign (never zero).
    pub fn sign(&self) -> Ordering {
        self.cmp_rational(&Rational::new())
    }

    /// Exact floor. Terminates because the number is irrational.
    pub fn floor(&self) -> Integer {
        let mut bits = 8u32;
        loop {
            let (a, b) = self.refined(bits);
            let fa = Integer::from(a.numer()).div_floor(a.denom());
            let fb = Integer::from(b.numer()).div_floor(b.denom());
            if fa == fb {
                return fa;
            }
            bits *= 2;
            assert!(bits < (1 << 24), "floor failed to stabilize; input not irrational?");
        }
    }

    /// The handle for a·x + b with a ≠ 0, exactly: the defining polynomial is
    /// transformed by y ↦ (y − b)/a and cleared, the isolating interval is
    /// mapped along (and flipped when a < 0). Squarefreeness and the absence
    /// of rational roots survive the transform, so revalidation cannot fail
    /// on a valid handle.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Result<AlgebraicReal, ArithError> {
        if a.cmp0() == Ordering::Equal {
            return Err(ArithError::RootCertification(0));
        }
        let n = self.degree();
        // P(y) = aⁿ · A((y − b)/a) = Σᵢ cᵢ (y − b)ⁱ a^(n−i), built over Q.
        let shift = QPoly::new(vec![Rational::from(-b.clone()), Rational::from(1)]);
        let mut power = QPoly::from_int(&IntPoly::from_ascending_i64(&[1]));
        let mut acc = QPoly::zero();
        for i in 0..=n {
            let coeff = Rational::from(self.minpoly.coeff(i)) * a.clone().pow((n - i) as i32);
            acc = acc.add(&power.scale(&coeff));
            if i < n {
                power = power.mul(&shift);
            }
        }
        let p = acc.to_primitive_int();
        let (mut lo, mut hi) = (
            Rational::from(a * &self.lo) + b,
            Rational::from(a * &self.hi) + b,
        );
        if a.cmp0() == Ordering::Less {
            std::mem::swap(&mut lo, &mut hi);
        }
        AlgebraicReal::new(p, lo, hi)
    }

    /// Certified semantic equality across presentations: decides whether two
    /// handles denote the same real number even when their defining
    /// polynomials differ, via the gcd of the polynomials and Sturm counts on
    /// jointly refined intervals. (The derived `PartialEq` is only a cheap
    /// same-presentation check.)
    pub fn same_number(&self, other: &AlgebraicReal) -> bool {
        if self == other {
            return true;
        }
        let g = QPoly::from_int(&self.minpoly).gcd(&QPoly::from_int(&other.minpoly));
        match g.degree() {
            None | Some(0) => return false,
            _ => {}
        }
        let g_int = g.to_primitive_int();
        let seq = sturm_sequence(&QPoly::from_int(&g_int));
        let mut bits = 32u32;
        loop {
            let (xl, xh) = self.refined(bits);
            let (yl, yh) = other.refined(bits);
            // Disjoint isolating intervals separate the numbers (endpoints
            // are never roots, so touching intervals still separate).
            if xh <= yl || yh <= xl {
                return false;
            }
            let hull_lo = if xl < yl { xl.clone() } else { yl.clone() };
            let hull_hi = if xh > yh { xh.clone() } else { yh.clone() };
            match count_roots_in(&seq, &hull_lo, &hull_hi) {
                0 => return false,
                1 => {
                    // The unique common root ρ in the hull: each number
                    // equals ρ exactly when ρ falls inside its isolating
                    // interval (g divides each defining polynomial, and the
                    // interval isolates that polynomial's unique root there).
                    return count_roots_in(&seq, &xl, &xh) == 1
                        && count_roots_in(&seq, &yl, &yh) == 1;
                }
                _ => {
                    bits *= 2;
                    assert!(bits < (1 << 24), "same_number failed to separate");
                }
            }
        }
    }
}

/// An exact scalar: a rational or a real algebraic handle. This is what
/// lattice provenance stores, so a lattice built from exact data can be
/// re-materialized at any precision without error accumulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Scalar {
    Rational(Rational),
    Algebraic(AlgebraicReal),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(Rational::new())
    }

    pub fn one() -> Self {
        Scalar::Rational(Rational::from(1))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Rational(Rational::from(n))
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.cmp0() == Ordering::Equal,
            Scalar::Algebraic(_) => false,
        }
    }

    pub fn sign(&self) -> Ordering {
        match self {
            Scalar::Rational(r) => r.cmp0(),
            Scalar::Algebraic(a) => a.sign(),
        }
    }

    pub fn to_float(&self, prec: u32) -> BigReal {
        match self {
            Scalar::Rational(r) => BigReal::with_val(prec, r),
            Scalar::Algebraic(a) => a.to_float(prec),
        }
    }

    pub fn floor(&self) -> Integer {
        match self {
            Scalar::Rational(r) => Integer::from(r.numer()).div_floor(r.denom()),
            Scalar::Algebraic(a) => a.floor(),
        }
    }

    /// A rational enclosure of width ≤ 2^(−bits)·max(1,|x|) (a point interval
    /// for rationals).
    pub fn enclosure(&self, bits: u32) -> (Rational, Rational) {
        match self {
            Scalar::Rational(r) => (r.clone(), r.clone()),
            Scalar::Algebraic(a) => a.refined(bits),
        }
    }

    /// √r for r ≥ 0, exactly: a rational when r is a perfect square, an
    /// algebraic handle (positive root of d·t² − n) otherwise.
    pub fn sqrt_rational(r: &Rational) -> Result<Scalar, ArithError> {
        match r.cmp0() {
            Ordering::Less => Err(ArithError::RootCertification(0)),
            Ordering::Equal => Ok(Scalar::zero()),
            Ordering::Greater => {
                let n = r.numer();
                let d = r.denom();
                if n.is_perfect_square() && d.is_perfect_square() {
                    return Ok(Scalar::Rational(Rational::from((
                        Integer::from(n.sqrt_ref()),
                        Integer::from(d.sqrt_ref()),
                    ))));
                }
                let p = IntPoly::new(vec![-n.clone(), Integer::new(), d.clone()]);
                let hi = p.root_bound();
                Ok(Scalar::Algebraic(AlgebraicReal::new(
                    p,
                    Rational::new(),
                    hi,
                )?))
            }
        }
    }

    /// ∛r, exactly: rational when r is a perfect cube, else the unique real
    /// root of d·t³ − n.
    pub fn cbrt_rational(r: &Rational) -> Result<Scalar, ArithError> {
        if r.cmp0() == Ordering::Equal {
            return Ok(Scalar::zero());
        }
        let n = r.numer();
        let d = r.denom();
        let nr = Integer::from(n.root_ref(3));
        let dr = Integer::from(d.root_ref(3));
        if nr.clone().pow(3) == *n && dr.clone().pow(3) == *d {
            return Ok(Scalar::Rational(Rational::from((nr, dr))));
        }
        let p = IntPoly::new(vec![
            -n.clone(),
            Integer::new(),
            Integer::new(),
            d.clone(),
        ]);
        let b = p.root_bound();
        Ok(Scalar::Algebraic(AlgebraicReal::new(
            p,
            Rational::from(-b.clone()),
            b,
        )?))
    }

    /// a·x + b, exactly. Degenerates to a rational when a = 0 or x is
    /// rational; otherwise transforms the algebraic handle.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Result<Scalar, ArithError> {
        if a.cmp0() == Ordering::Equal {
            return Ok(Scalar::Rational(b.clone()));
        }
        match self {
            Scalar::Rational(r) => Ok(Scalar::Rational(Rational::from(a * r) + b)),
            Scalar::Algebraic(x) => Ok(Scalar::Algebraic(x.affine(a, b)?)),
        }
    }

    /// Certified semantic equality: true exactly when the two scalars denote
    /// the same real number, across presentations. A rational never equals an
    /// algebraic handle (handles exclude rational roots by construction).
    pub fn certified_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a == b,
            (Scalar::Algebraic(a), Scalar::Algebraic(b)) => a.same_number(b),
            _ => false,
        }
    }
}
