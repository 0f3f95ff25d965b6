//! Continued fractions with certified partial quotients.
//!
//! Exact inputs (rationals and algebraic handles) expand by the classical
//! floor algorithm, implemented through an integer homographic state so the
//! underlying number is never touched by rounding: each quotient is decided
//! by shrinking a rational enclosure of the input until the floor of the
//! transformed interval is unambiguous. Frozen floats carry a one-ulp
//! uncertainty interval and stop, flagged, at the first quotient that the
//! interval cannot decide.

use std::cmp::Ordering;

use rug::ops::DivRounding;
use serde::{Deserialize, Serialize};

use super::algebraic::Scalar;
use super::{BigReal, Integer, Rational};

/// A (possibly truncated) continued-fraction expansion with convergents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CFExpansion {
    /// Partial quotients a₀; a₁, a₂, … (a_i ≥ 1 for i ≥ 1).
    pub quotients: Vec<Integer>,
    /// Convergents (p_i, q_i), same length as `quotients`.
    pub convergents: Vec<(Integer, Integer)>,
    /// True when the expansion stopped before `n_terms` because the input's
    /// precision could not certify the next quotient. Exact inputs never set
    /// this; a rational input simply terminates.
    pub exhausted: bool,
}

impl CFExpansion {
    fn new() -> Self {
        CFExpansion {
            quotients: Vec::new(),
            convergents: Vec::new(),
            exhausted: false,
        }
    }

    /// Appends a quotient, extending the convergents by
    /// p_i = a_i·p_{i−1} + p_{i−2} with seeds p_{−1} = 1, p_{−2} = 0 (and the
    /// transposed seeds for the q_i).
    fn push(&mut self, q: Integer) {
        let n = self.convergents.len();
        let (pm1, qm1, pm2, qm2) = match n {
            0 => (Integer::from(1), Integer::new(), Integer::new(), Integer::from(1)),
            1 => (
                self.convergents[0].0.clone(),
                self.convergents[0].1.clone(),
                Integer::from(1),
                Integer::new(),
            ),
            _ => (
                self.convergents[n - 1].0.clone(),
                self.convergents[n - 1].1.clone(),
                self.convergents[n - 2].0.clone(),
                self.convergents[n - 2].1.clone(),
            ),
        };
        let p = Integer::from(&q * &pm1) + pm2;
        let qd = Integer::from(&q * &qm1) + qm2;
        self.quotients.push(q);
        self.convergents.push((p, qd));
    }

    /// Reconstructs the exact value of the full expansion (only meaningful
    /// when the expansion terminated, i.e. for rational inputs).
    pub fn value(&self) -> Option<Rational> {
        self.convergents
            .last()
            .map(|(p, q)| Rational::from((p.clone(), q.clone())))
    }
}

/// Input to [`cf_expand`]: an exact scalar (never exhausts) or a frozen
/// float (stops when its precision runs out).
pub enum CfInput<'a> {
    Exact(&'a Scalar),
    Frozen(&'a BigReal),
}

/// Integer Möbius state y = (a·x + b)/(c·x + d) applied to the input x.
struct Homographic {
    a: Integer,
    b: Integer,
    c: Integer,
    d: Integer,
}

impl Homographic {
    fn identity() -> Self {
        Homographic {
            a: Integer::from(1),
            b: Integer::new(),
            c: Integer::new(),
            d: Integer::from(1),
        }
    }

    fn eval(&self, x: &Rational) -> Option<Rational> {
        let den = Rational::from(x * &self.c) + Rational::from(&self.d);
        if den.cmp0() == Ordering::Equal {
            return None;
        }
        let num = Rational::from(x * &self.a) + Rational::from(&self.b);
        Some(num / den)
    }

    /// Image of [lo, hi]; None when the pole may lie inside.
    fn eval_interval(&self, lo: &Rational, hi: &Rational) -> Option<(Rational, Rational)> {
        let den_lo = Rational::from(lo * &self.c) + Rational::from(&self.d);
        let den_hi = Rational::from(hi * &self.c) + Rational::from(&self.d);
        if den_lo.cmp0() == Ordering::Equal
            || den_hi.cmp0() == Ordering::Equal
            || den_lo.cmp0() != den_hi.cmp0()
        {
            return None;
        }
        let ylo = self.eval(lo).expect("checked");
        let yhi = self.eval(hi).expect("checked");
        if ylo <= yhi {
            Some((ylo, yhi))
        } else {
            Some((yhi, ylo))
        }
    }

    /// y ← 1/(y − q).
    fn shift(&mut self, q: &Integer) {
        let na = self.c.clone();
        let nb = self.d.clone();
        let nc = self.a.clone() - Integer::from(q * &self.c);
        let nd = self.b.clone() - Integer::from(q * &self.d);
        self.a = na;
        self.b = nb;
        self.c = nc;
        self.d = nd;
    }
}

fn floor_rat(r: &Rational) -> Integer {
    Integer::from(r.numer()).div_floor(r.denom())
}

/// Exact rational expansion (canonical floor algorithm; last quotient ≥ 2
/// unless the value is an integer).
fn expand_rational(x: &Rational, n_terms: usize) -> CFExpansion {
    let mut out = CFExpansion::new();
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    while out.quotients.len() < n_terms {
        let q = Integer::from(&num).div_floor(&den);
        let rem = num - Integer::from(&q * &den);
        out.push(q);
        if rem.cmp0() == Ordering::Equal {
            break;
        }
        num = den;
        den = rem;
    }
    out
}

/// Expansion of an exact algebraic handle: every quotient is certified by
/// refining the handle's enclosure; never exhausts.
fn expand_algebraic(x: &Scalar, n_terms: usize) -> CFExpansion {
    let mut out = CFExpansion::new();
    let mut state = Homographic::identity();
    let mut bits = 64u32;
    while out.quotients.len() < n_terms {
        let q = loop {
            let (lo, hi) = x.enclosure(bits);
            if let Some((ylo, yhi)) = state.eval_interval(&lo, &hi) {
                let flo = floor_rat(&ylo);
                let fhi = floor_rat(&yhi);
                if flo == fhi {
                    break flo;
                }
            }
            bits *= 2;
            assert!(
                bits < (1 << 24),
                "continued fraction failed to stabilize; input not irrational?"
            );
        };
        state.shift(&q);
        out.push(q);
    }
    out
}

/// Expansion of a frozen float: the value is widened to a one-ulp interval
/// and quotients are emitted only while the whole interval agrees on them.
fn expand_frozen(x: &BigReal, n_terms: usize) -> CFExpansion {
    let mut out = CFExpansion::new();
    let Some(v) = x.to_rational() else {
        out.exhausted = true;
        return out;
    };
    if v.cmp0() == Ordering::Equal {
        out.push(Integer::new());
        out.exhausted = true;
        return out;
    }
    let prec = x.prec();
    let u = Rational::from(v.abs_ref()) / (Rational::from(Integer::from(1) << (prec - 1)));
    let lo = Rational::from(&v - &u);
    let hi = Rational::from(&v + &u);
    let mut state = Homographic::identity();
    while out.quotients.len() < n_terms {
        match state.eval_interval(&lo, &hi) {
            Some((ylo, yhi)) => {
                let flo = floor_rat(&ylo);
                let fhi = floor_rat(&yhi);
                if flo != fhi {
                    out.exhausted = true;
                    return out;
                }
                state.shift(&flo);
                out.push(flo);
            }
            None => {
                out.exhausted = true;
                return out;
            }
        }
    }
    out
}

/// Continued-fraction expansion with at most `n_terms` partial quotients.
///
/// Exact inputs are expanded with certainty: a rational terminates with its
/// canonical finite expansion, an algebraic handle produces all requested
/// quotients. A frozen [`BigReal`] stops early with `exhausted = true` the
/// moment its one-ulp uncertainty interval no longer pins down the next
/// quotient.
pub fn cf_expand(input: CfInput<'_>, n_terms: usize) -> CFExpansion {
    assert!(n_terms >= 1, "n_terms must be at least 1");
    match input {
        CfInput::Exact(Scalar::Rational(r)) => expand_rational(r, n_terms),
        CfInput::Exact(s @ Scalar::Algebraic(_)) => expand_algebraic(s, n_terms),
        CfInput::Frozen(x) => expand_frozen(x, n_terms),
    }
}
