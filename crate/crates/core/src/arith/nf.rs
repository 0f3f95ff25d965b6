//! Arithmetic in Q[t]/(minpoly): multiplication, inversion, norm, trace.
//!
//! Elements are rational coordinate vectors in the power basis
//! 1, t, …, t^{d−1}. The modulus only needs to be squarefree of degree d for
//! these to be well defined; inversion additionally fails (as
//! [`ArithError::DivisionByZeroElement`]) when the element shares a factor
//! with a reducible modulus.

use std::cmp::Ordering;

use rug::ops::Pow;

use super::poly::{power_sums, resultant_q, IntPoly, QPoly};
use super::{ArithError, Rational};

fn to_poly(coords: &[Rational]) -> QPoly {
    QPoly::new(coords.to_vec())
}

fn to_coords(p: &QPoly, d: usize) -> Vec<Rational> {
    (0..d).map(|i| p.coeff(i)).collect()
}

fn check(minpoly: &IntPoly, coords: &[Rational]) -> usize {
    let d = minpoly.degree().expect("minpoly must be nonzero");
    assert!(d >= 1, "minpoly must have positive degree");
    assert_eq!(coords.len(), d, "coordinate vector length must equal the field degree");
    d
}

/// Product of two elements, reduced modulo the minimal polynomial. Exact.
pub fn nf_mul(minpoly: &IntPoly, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    let d = check(minpoly, x);
    check(minpoly, y);
    let m = QPoly::from_int(minpoly);
    let prod = to_poly(x).mul(&to_poly(y)).rem(&m);
    to_coords(&prod, d)
}

/// Multiplicative inverse via the extended Euclidean algorithm in Q[t].
pub fn nf_inv(minpoly: &IntPoly, x: &[Rational]) -> Result<Vec<Rational>, ArithError> {
    let d = check(minpoly, x);
    let xp = to_poly(x);
    if xp.is_zero() {
        return Err(ArithError::DivisionByZeroElement);
    }
    // Invariants: r = s·x (mod minpoly); when r becomes a nonzero constant,
    // s/r is the inverse. A nonconstant terminal gcd means x is a zero
    // divisor of a reducible modulus.
    let m = QPoly::from_int(minpoly);
    let (mut r0, mut r1) = (m.clone(), xp);
    let (mut s0, mut s1) = (QPoly::zero(), QPoly::new(vec![Rational::from(1)]));
    while !r1.is_zero() {
        let (q, rem) = r0.divrem(&r1);
        let s_next = s0.sub(&q.mul(&s1));
        r0 = r1;
        r1 = rem;
        s0 = s1;
        s1 = s_next;
    }
    match r0.degree() {
        Some(0) => {
            let g = r0.leading().unwrap().clone();
            let inv = s0.scale(&Rational::from(g.recip_ref())).rem(&m);
            Ok(to_coords(&inv, d))
        }
        _ => Err(ArithError::DivisionByZeroElement),
    }
}

/// Field norm: the product of the element's images under all d embeddings,
/// computed exactly as resultant(minpoly, x(t)) normalized by the leading
/// coefficient, N(x) = res(p, x)/lc(p)^{deg x}.
pub fn nf_norm(minpoly: &IntPoly, x: &[Rational]) -> Rational {
    check(minpoly, x);
    let xp = to_poly(x);
    let Some(dx) = xp.degree() else {
        return Rational::new();
    };
    let res = resultant_q(&QPoly::from_int(minpoly), &xp);
    let lc = Rational::from(minpoly.leading().unwrap());
    res / lc.pow(dx as u32)
}

/// Field trace: the sum of the element's images under all d embeddings,
/// exact via Newton power sums of the minimal polynomial.
pub fn nf_trace(minpoly: &IntPoly, x: &[Rational]) -> Rational {
    let d = check(minpoly, x);
    let s = power_sums(minpoly, d - 1);
    let mut acc = Rational::new();
    for (j, c) in x.iter().enumerate() {
        if c.cmp0() != Ordering::Equal {
            acc += Rational::from(c * &s[j]);
        }
    }
    acc
}
