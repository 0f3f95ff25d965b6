//! Numeric substrate: exact rationals, arbitrary-precision floats and
//! complexes, integer polynomials with certified root isolation, exact
//! algebraic-number handles, continued fractions, and arithmetic in
//! Q[t]/(minpoly).
//!
//! Precision discipline: every floating value is an MPFR float whose
//! precision is chosen by the caller (default [`DEFAULT_PRECISION`] = 256
//! bits). Exact objects ([`Rational`], [`IntPoly`], [`AlgebraicReal`]) can be
//! re-evaluated at any precision on demand; a plain [`BigReal`] is frozen at
//! the precision it was created with and downstream code treats it as an
//! interval of one ulp radius when certifying discrete decisions.

mod algebraic;
mod contfrac;
mod nf;
mod poly;

pub use algebraic::{AlgebraicReal, Scalar};
pub use contfrac::{cf_expand, CFExpansion, CfInput};
pub use nf::{nf_inv, nf_mul, nf_norm, nf_trace};
pub use poly::{
    count_real_roots, count_roots_in, exclude_rational_roots, isolate_real_roots, poly_roots,
    power_sums, refine_to_bits, resultant_q, signature, simplest_in_interval, sturm_sequence,
    IntPoly, QPoly, RootSet,
};

use thiserror::Error;

/// Arbitrary-size integer (GMP-backed).
pub type Integer = rug::Integer;
/// Exact rational in lowest terms with positive denominator (canonical form
/// is maintained by the underlying GMP type).
pub type Rational = rug::Rational;
/// Arbitrary-precision binary float (MPFR-backed). The precision in bits is
/// part of the value.
pub type BigReal = rug::Float;
/// Complex number with [`BigReal`] components.
pub type BigComplex = rug::Complex;

/// Default working precision in bits.
///
/// The planar-family experiments need |kα + m| with k ≈ e^t for t up to ≈ 25,
/// i.e. roughly 75 bits of cancellation; 256 bits leaves a wide margin, and
/// certification thresholds are expressed as 2^(−P/2) so they scale if a
/// caller raises the precision.
pub const DEFAULT_PRECISION: u32 = 256;

/// Errors from the arithmetic layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ArithError {
    /// gcd(p, p′) has positive degree; root isolation requires a squarefree
    /// polynomial.
    #[error("polynomial is not squarefree: gcd with derivative has degree {0}")]
    NotSquarefree(usize),
    /// A rational root was found, so the input is reducible over Q. Minimal
    /// polynomials must not have rational roots; irreducibility beyond this
    /// check is the caller's responsibility.
    #[error("polynomial has rational root {0}; input must be irreducible")]
    RationalRootFound(Rational),
    /// Division by zero, or by a zero divisor of a reducible modulus.
    #[error("division by zero (or non-invertible) element")]
    DivisionByZeroElement,
    /// Defensive: certification of a refined root failed at the requested
    /// precision. Indicates a bug or a pathological input, not a normal
    /// outcome.
    #[error("failed to certify root at precision {0}")]
    RootCertification(u32),
    /// Zero or empty polynomial where a nonzero one is required.
    #[error("zero polynomial is not allowed here")]
    ZeroPolynomial,
}

/// Shorthand: a [`BigReal`] at precision `prec` from anything rug converts.
pub fn big<T>(prec: u32, value: T) -> BigReal
where
    BigReal: rug::Assign<T>,
{
    BigReal::with_val(prec, value)
}

/// 2^(−prec/2) at precision `prec`: the crate-wide certification tolerance.
pub fn half_ulp_tolerance(prec: u32) -> BigReal {
    BigReal::with_val(prec, BigReal::i_exp(1, -((prec / 2) as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_scales_with_precision() {
        let t256 = half_ulp_tolerance(256);
        let t64 = half_ulp_tolerance(64);
        assert!(t256 < t64);
        assert_eq!(t64, BigReal::with_val(64, 2f64.powi(-32)));
    }
}
