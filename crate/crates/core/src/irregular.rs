//! The irregular-orbit apparatus in dimension three: shear lattices attached
//! to a pair of real parameters, exact detection of a rational coupling
//! between the parameters, membership tests for the two families of
//! residue-constrained lattices the shear orbits accumulate on, Dirichlet
//! approximation pairs from continued fractions, certified short-vector
//! witnesses along two-parameter diagonal flows, and the recurrence
//! experiment driver that ties them together.
//!
//! The central objects are the lattices spanned by the columns of
//!
//! ```text
//!         ⎛1  0  0⎞              ⎛1  α  β⎞
//!   h_v = ⎜α  1  0⎟        g_v = ⎜0  1  0⎟
//!         ⎝β  0  1⎠              ⎝0  0  1⎠
//! ```
//!
//! for v = (α, β). When β = (p₁α + p₂)/q for integers with p₁, p₂ generating
//! Z/qZ, the diagonal orbit of the h_v lattice accumulates on a compact
//! family of lattices whose third (resp. second) coordinates lie in (1/q)Z;
//! `m_membership` decides membership in that family with an explicit,
//! auditable tolerance, and `omega_experiment` drives the whole pipeline
//! along a diagonal ray, recording recurrence events and off-ray witness
//! bounds.
//!
//! Everything downstream of a construction is recomputed from exact
//! provenance at the working precision — lattice points are exact integer
//! combinations of exactly-known columns, never forward-multiplied floats,
//! because quantities like e^t·(kα + m) cancel catastrophically.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::ops::{CompleteRound, Pow, RemRounding};
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{
    big, cf_expand, exclude_rational_roots, half_ulp_tolerance, isolate_real_roots, power_sums,
    ArithError, BigReal, CfInput, Integer, QPoly, Rational, Scalar,
};
use crate::flows::{self, FlowError, TracelessDiag};
use crate::lattice::{Generators, LatticeBasis, LatticeError};
use crate::linalg::{complete_unimodular, lll_integer_rows, IMat, RMat};
use crate::numberfield::{FieldElement, NumberField};

/// Extra working bits on top of the published precision.
const GUARD_BITS: u32 = 64;

#[derive(Debug, Error)]
pub enum IrregularError {
    #[error("this operation needs dimension 3, got {0}")]
    DimensionNotThree(usize),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("membership residual {residual} is within a factor of ten of the tolerance {tol}; raise the precision or move the tolerance")]
    ToleranceAmbiguous { residual: BigReal, tol: BigReal },
    #[error("witness length {length} exceeds the proven bound {bound}; this indicates a precision or implementation bug")]
    BoundViolated { length: BigReal, bound: BigReal },
    #[error("basis has no exact unimodular reduction to a plane-projection form: {0}")]
    NotInSOrbit(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

type Result<T> = std::result::Result<T, IrregularError>;

// ---------------------------------------------------------------------------
// Shear parameters
// ---------------------------------------------------------------------------

/// One shear coordinate: an exact scalar handle (re-evaluable at any
/// precision, supports certified sign/irrationality decisions) or a frozen
/// float (heuristic paths only).
#[derive(Clone, Debug)]
pub enum Coord {
    Exact(Scalar),
    Approx(BigReal),
}

impl Coord {
    pub fn to_float(&self, prec: u32) -> BigReal {
        match self {
            Coord::Exact(s) => s.to_float(prec),
            Coord::Approx(x) => BigReal::with_val(prec, x),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coord::Exact(_))
    }

    pub fn negated(&self) -> Result<Coord> {
        Ok(match self {
            Coord::Exact(s) => {
                Coord::Exact(s.affine(&Rational::from(-1), &Rational::new())?)
            }
            Coord::Approx(x) => Coord::Approx((-x).complete(x.prec())),
        })
    }

    /// `Some(true)` / `Some(false)` when irrationality is decidable (exact
    /// inputs), `None` for frozen floats.
    pub fn certified_irrational(&self) -> Option<bool> {
        match self {
            Coord::Exact(Scalar::Rational(_)) => Some(false),
            Coord::Exact(Scalar::Algebraic(_)) => Some(true),
            Coord::Approx(_) => None,
        }
    }

    /// Irrationality evidence: certainty for exact inputs; for frozen floats,
    /// the continued fraction must produce at least `min_terms` certified
    /// partial quotients without terminating (a rational reveals itself by a
    /// terminating expansion within its precision).
    pub fn irrationality_evidence(&self, min_terms: usize) -> bool {
        match self.certified_irrational() {
            Some(answer) => answer,
            None => {
                let exp = cf_expand(self.cf_input(), min_terms);
                exp.quotients.len() >= min_terms
            }
        }
    }

    fn cf_input(&self) -> CfInput<'_> {
        match self {
            Coord::Exact(s) => CfInput::Exact(s),
            Coord::Approx(x) => CfInput::Frozen(x),
        }
    }
}

/// Shear parameters v = (v₁, …, v_{d−1}) for the h_v / g_v lattices, with an
/// optional common number-field presentation that upgrades rational-relation
/// detection from a candidate search to exact linear algebra.
#[derive(Clone, Debug)]
pub struct VParams {
    coords: Vec<Coord>,
    prec: u32,
    field: Option<FieldData>,
}

#[derive(Clone, Debug)]
struct FieldData {
    field: NumberField,
    elems: Vec<FieldElement>,
}

impl VParams {
    /// Exact coordinates (rationals and algebraic handles).
    pub fn exact(coords: Vec<Scalar>, prec: u32) -> Result<Self> {
        if coords.is_empty() {
            return Err(IrregularError::PreconditionViolated(
                "at least one shear coordinate is required".into(),
            ));
        }
        Ok(VParams {
            coords: coords.into_iter().map(Coord::Exact).collect(),
            prec,
            field: None,
        })
    }

    /// Frozen floating-point coordinates.
    pub fn approx(coords: Vec<BigReal>, prec: u32) -> Result<Self> {
        if coords.is_empty() {
            return Err(IrregularError::PreconditionViolated(
                "at least one shear coordinate is required".into(),
            ));
        }
        Ok(VParams {
            coords: coords.into_iter().map(Coord::Approx).collect(),
            prec,
            field: None,
        })
    }

    /// Coordinates presented as elements of one number field under a fixed
    /// real embedding. Relation detection then runs as exact linear algebra
    /// on power-basis coordinates.
    pub fn in_field(
        field: NumberField,
        elems: Vec<FieldElement>,
        real_embedding: usize,
        prec: u32,
    ) -> Result<Self> {
        if elems.is_empty() {
            return Err(IrregularError::PreconditionViolated(
                "at least one shear coordinate is required".into(),
            ));
        }
        let mut coords = Vec::with_capacity(elems.len());
        for e in &elems {
            let s = field
                .embedded_scalar(e, real_embedding)
                .map_err(|e| IrregularError::PreconditionViolated(e.to_string()))?;
            coords.push(Coord::Exact(s));
        }
        Ok(VParams {
            coords,
            prec,
            field: Some(FieldData { field, elems }),
        })
    }

    /// Ambient dimension d (one more than the number of shear coordinates).
    pub fn d(&self) -> usize {
        self.coords.len() + 1
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    /// First shear coordinate α (d = 3 paths).
    pub fn alpha(&self) -> Result<&Coord> {
        if self.d() != 3 {
            return Err(IrregularError::DimensionNotThree(self.d()));
        }
        Ok(&self.coords[0])
    }

    /// Second shear coordinate β (d = 3 paths).
    pub fn beta(&self) -> Result<&Coord> {
        if self.d() != 3 {
            return Err(IrregularError::DimensionNotThree(self.d()));
        }
        Ok(&self.coords[1])
    }

    /// The parameters −v, carrying the field presentation along.
    pub fn negated(&self) -> Result<VParams> {
        let coords = self
            .coords
            .iter()
            .map(Coord::negated)
            .collect::<Result<Vec<_>>>()?;
        let field = match &self.field {
            None => None,
            Some(fd) => Some(FieldData {
                field: fd.field.clone(),
                elems: fd
                    .elems
                    .iter()
                    .map(|e| fd.field.scale(e, &Rational::from(-1)))
                    .collect(),
            }),
        };
        Ok(VParams {
            coords,
            prec: self.prec,
            field,
        })
    }

    /// The coupling β = (p₁α + p₂)/q (or the reverse direction α over β when
    /// `reverse` is set), searched up to denominator `q_max`. Uses exact
    /// linear algebra when a field presentation is attached, otherwise
    /// delegates to [`rational_relation`].
    pub fn relation(&self, reverse: bool, q_max: &Integer) -> Result<Option<RationalRelation>> {
        if self.d() != 3 {
            return Err(IrregularError::DimensionNotThree(self.d()));
        }
        if let Some(fd) = &self.field {
            let (a, b) = if reverse {
                (&fd.elems[1], &fd.elems[0])
            } else {
                (&fd.elems[0], &fd.elems[1])
            };
            return relation_in_field(&fd.field, a, b, q_max);
        }
        let (a, b) = if reverse {
            (&self.coords[1], &self.coords[0])
        } else {
            (&self.coords[0], &self.coords[1])
        };
        rational_relation(a, b, q_max, self.prec)
    }
}

// ---------------------------------------------------------------------------
// The shear lattices
// ---------------------------------------------------------------------------

/// The lattice spanned by the columns of h_v (identity except for the first
/// column (1, v₁, …, v_{d−1})ᵀ), with exact provenance when the coordinates
/// are exact.
pub fn make_xv(v: &VParams) -> Result<LatticeBasis> {
    let d = v.d();
    if v.coords.iter().all(Coord::is_exact) {
        let mut cols = Vec::with_capacity(d);
        let mut first = vec![Scalar::one()];
        for c in &v.coords {
            let Coord::Exact(s) = c else { unreachable!() };
            first.push(s.clone());
        }
        cols.push(first);
        for j in 1..d {
            let mut col = vec![Scalar::zero(); d];
            col[j] = Scalar::one();
            cols.push(col);
        }
        return Ok(LatticeBasis::from_exact_columns(cols, v.prec)?);
    }
    let prec = v.prec;
    let mat = RMat::from_fn(prec, d, d, |i, j| {
        if i == j {
            big(prec, 1)
        } else if j == 0 && i >= 1 {
            v.coords[i - 1].to_float(prec)
        } else {
            big(prec, 0)
        }
    });
    Ok(LatticeBasis::from_float_columns(mat)?)
}

/// The lattice spanned by the columns of g_v (identity except for the first
/// row (1, v₁, …, v_{d−1})).
pub fn make_zv(v: &VParams) -> Result<LatticeBasis> {
    let d = v.d();
    if v.coords.iter().all(Coord::is_exact) {
        let mut cols = Vec::with_capacity(d);
        let mut e0 = vec![Scalar::zero(); d];
        e0[0] = Scalar::one();
        cols.push(e0);
        for j in 1..d {
            let mut col = vec![Scalar::zero(); d];
            let Coord::Exact(s) = &v.coords[j - 1] else {
                unreachable!()
            };
            col[0] = s.clone();
            col[j] = Scalar::one();
            cols.push(col);
        }
        return Ok(LatticeBasis::from_exact_columns(cols, v.prec)?);
    }
    let prec = v.prec;
    let mat = RMat::from_fn(prec, d, d, |i, j| {
        if i == j {
            big(prec, 1)
        } else if i == 0 && j >= 1 {
            v.coords[j - 1].to_float(prec)
        } else {
            big(prec, 0)
        }
    });
    Ok(LatticeBasis::from_float_columns(mat)?)
}

// ---------------------------------------------------------------------------
// Rational-relation detection
// ---------------------------------------------------------------------------

/// A verified coupling q·β = p₁·α + p₂ with q ≥ 1 and gcd(p₁, p₂, q) = 1
/// (so p₁, p₂ generate Z/qZ).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RationalRelation {
    p1: Integer,
    p2: Integer,
    q: Integer,
}

impl RationalRelation {
    pub fn new(p1: Integer, p2: Integer, q: Integer) -> Result<Self> {
        if q < 1 {
            return Err(IrregularError::PreconditionViolated(format!(
                "relation denominator must be positive, got {q}"
            )));
        }
        let g = Integer::from(p1.gcd_ref(&p2)).gcd(&q);
        if g != 1 {
            return Err(IrregularError::PreconditionViolated(format!(
                "relation ({p1}, {p2}, {q}) is not reduced: common divisor {g}"
            )));
        }
        Ok(RationalRelation { p1, p2, q })
    }

    pub fn p1(&self) -> &Integer {
        &self.p1
    }

    pub fn p2(&self) -> &Integer {
        &self.p2
    }

    pub fn q(&self) -> &Integer {
        &self.q
    }

    /// β computed from α through the relation, exactly for exact inputs.
    pub fn apply(&self, alpha: &Coord, prec: u32) -> Result<Coord> {
        let a = Rational::from((self.p1.clone(), self.q.clone()));
        let b = Rational::from((self.p2.clone(), self.q.clone()));
        Ok(match alpha {
            Coord::Exact(s) => Coord::Exact(s.affine(&a, &b)?),
            Coord::Approx(x) => {
                let pw = prec + GUARD_BITS;
                let val = BigReal::with_val(pw, x) * BigReal::with_val(pw, &a)
                    + BigReal::with_val(pw, &b);
                Coord::Approx(val)
            }
        })
    }
}

/// Builds the reduced relation from rational coefficients c₁ = p₁/q,
/// c₂ = p₂/q (q = lcm of the denominators, automatically coprime to
/// gcd(p₁, p₂)), rejecting denominators beyond `q_max`.
fn relation_from_rationals(c1: &Rational, c2: &Rational, q_max: &Integer) -> Result<Option<RationalRelation>> {
    let q = Integer::from(c1.denom().lcm_ref(c2.denom()));
    if &q > q_max {
        return Ok(None);
    }
    let p1 = Rational::from(c1 * &q);
    let p2 = Rational::from(c2 * &q);
    debug_assert_eq!(p1.denom(), &Integer::from(1));
    debug_assert_eq!(p2.denom(), &Integer::from(1));
    Ok(Some(RationalRelation::new(
        p1.numer().clone(),
        p2.numer().clone(),
        q,
    )?))
}

/// Detects q·β = p₁·α + p₂ with q ≤ q_max.
///
/// Exact inputs run an exact search: candidate slopes come from the power
/// sums of the defining polynomials (an affine map carrying the root multiset
/// of one polynomial onto the other must satisfy a polynomial system over Q
/// whose first nontrivial equation has finitely many rational roots), and
/// every candidate is certified against the distinguished roots before being
/// reported. Detection is complete when the two handles have defining
/// polynomials of the same degree — in particular whenever both are presented
/// by true minimal polynomials; handles presented through reducible
/// polynomials of different degrees are reported as uncoupled. For complete
/// detection independent of presentation, attach a common field presentation
/// via [`VParams::in_field`].
///
/// Frozen floats run an integer-relation (lattice-reduction) search with an
/// explicit residual acceptance at half-ulp scale; a `Some` answer means
/// "detected within precision", a `None` means "not found", never a proof.
pub fn rational_relation(
    alpha: &Coord,
    beta: &Coord,
    q_max: &Integer,
    prec: u32,
) -> Result<Option<RationalRelation>> {
    if *q_max < 1 {
        return Err(IrregularError::PreconditionViolated(format!(
            "q_max must be at least 1, got {q_max}"
        )));
    }
    match (alpha, beta) {
        (Coord::Exact(a), Coord::Exact(b)) => {
            // β = α short-circuits to the identity relation.
            if a.certified_eq(b) {
                return Ok(Some(RationalRelation::new(
                    Integer::from(1),
                    Integer::new(),
                    Integer::from(1),
                )?));
            }
            match (a, b) {
                (_, Scalar::Rational(rb)) => {
                    // β rational: q·β = p₂ works with p₁ = 0 (a nonzero p₁
                    // would force α rational, and then a p₁ = 0 relation
                    // still exists).
                    relation_from_rationals(&Rational::new(), rb, q_max)
                }
                (Scalar::Rational(_), Scalar::Algebraic(_)) => Ok(None),
                (Scalar::Algebraic(a), Scalar::Algebraic(b)) => {
                    relation_exact_algebraic(a, b, q_max)
                }
            }
        }
        _ => {
            let pw = prec + GUARD_BITS;
            relation_float(&alpha.to_float(pw), &beta.to_float(pw), q_max, prec)
        }
    }
}

/// Pascal's triangle rows 0..=n.
fn binomials(n: usize) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = vec![Integer::from(1); k + 1];
        for i in 1..k {
            row[i] = Integer::from(&rows[k - 1][i - 1] + &rows[k - 1][i]);
        }
        rows.push(row);
    }
    rows
}

/// All rational roots of a rational polynomial, exactly (squarefree
/// reduction, root isolation, denominator-bounded candidate extraction,
/// exact deflation).
fn rational_roots(g: &QPoly) -> std::result::Result<Vec<Rational>, ArithError> {
    let mut roots = Vec::new();
    let mut p = {
        let g1 = g.gcd(&g.derivative());
        let (sf, _) = g.divrem(&g1);
        sf.to_primitive_int()
    };
    loop {
        if p.degree().map_or(true, |d| d == 0) {
            return Ok(roots);
        }
        let found = match isolate_real_roots(&p) {
            Err(ArithError::RationalRootFound(r)) => Some(r),
            Err(e) => return Err(e),
            Ok(intervals) => {
                let mut hit = None;
                for iv in &intervals {
                    match exclude_rational_roots(&p, std::slice::from_ref(iv)) {
                        Err(ArithError::RationalRootFound(r)) => {
                            hit = Some(r);
                            break;
                        }
                        Err(e) => return Err(e),
                        Ok(()) => {}
                    }
                }
                hit
            }
        };
        match found {
            None => return Ok(roots),
            Some(r) => {
                roots.push(r.clone());
                let lin = QPoly::new(vec![-r, Rational::from(1)]);
                let (quo, rem) = QPoly::from_int(&p).divrem(&lin);
                debug_assert!(rem.is_zero(), "claimed root must divide");
                p = quo.to_primitive_int();
            }
        }
    }
}

/// Exact relation search between two algebraic handles via power sums.
fn relation_exact_algebraic(
    a: &crate::arith::AlgebraicReal,
    b: &crate::arith::AlgebraicReal,
    q_max: &Integer,
) -> Result<Option<RationalRelation>> {
    let n = a.degree();
    if b.degree() != n {
        return Ok(None);
    }
    let pa = power_sums(a.minpoly(), n);
    let pb = power_sums(b.minpoly(), n);
    let n_rat = Rational::from(n as u64);
    // The k = 1 power-sum equation pins c₂ as an affine function of c₁:
    // c₂(c₁) = (p₁(B) − c₁·p₁(A)) / n.
    let u = Rational::from(&pb[1] / &n_rat);
    let w = -Rational::from(&pa[1] / &n_rat);
    let c2_of = QPoly::new(vec![u, w]);
    let binom = binomials(n);
    // Powers of c₂(c₁) as polynomials in c₁.
    let mut c2_pows: Vec<QPoly> = vec![QPoly::new(vec![Rational::from(1)])];
    for k in 1..=n {
        let next = c2_pows[k - 1].mul(&c2_of);
        c2_pows.push(next);
    }
    for k in 2..=n {
        // g_k(c₁) = Σ_i C(k,i)·p_i(A)·c₁^i·c₂(c₁)^{k−i} − p_k(B).
        let mut g = QPoly::zero();
        for i in 0..=k {
            let coeff = Rational::from(&binom[k][i]) * &pa[i];
            if coeff.cmp0() == Ordering::Equal {
                continue;
            }
            // c₁^i as a monomial times the matching power of c₂(c₁).
            let mut mono = vec![Rational::new(); i + 1];
            mono[i] = coeff;
            g = g.add(&QPoly::new(mono).mul(&c2_pows[k - i]));
        }
        g = g.sub(&QPoly::new(vec![pb[k].clone()]));
        if g.is_zero() {
            continue;
        }
        // The true slope (if any) must be a rational root of the first
        // nontrivial g_k; certify each candidate on the distinguished roots.
        for c1 in rational_roots(&g)? {
            let c2 = c2_of.eval(&c1);
            let system_holds = (1..=n).all(|k| {
                let mut sum = Rational::new();
                for i in 0..=k {
                    sum += Rational::from(&binom[k][i])
                        * c1.clone().pow(i as i32)
                        * c2.clone().pow((k - i) as i32)
                        * &pa[i];
                }
                sum == pb[k]
            });
            if !system_holds {
                continue;
            }
            let gamma = Scalar::Algebraic(a.clone()).affine(&c1, &c2)?;
            if gamma.certified_eq(&Scalar::Algebraic(b.clone())) {
                return relation_from_rationals(&c1, &c2, q_max);
            }
        }
        return Ok(None);
    }
    Ok(None)
}

/// Exact relation search when both parameters live in one number field:
/// solve β = c₁α + c₂ coordinatewise on the power basis.
fn relation_in_field(
    field: &NumberField,
    a: &FieldElement,
    b: &FieldElement,
    q_max: &Integer,
) -> Result<Option<RationalRelation>> {
    let d = field.degree();
    let ac = &a.coords;
    let bc = &b.coords;
    let mut c1: Option<Rational> = None;
    for i in 1..d {
        if ac[i].cmp0() != Ordering::Equal {
            c1 = Some(Rational::from(&bc[i] / &ac[i]));
            break;
        }
    }
    match c1 {
        None => {
            // α is rational inside the field; a coupling exists only when β
            // is rational too.
            if bc[1..].iter().any(|c| c.cmp0() != Ordering::Equal) {
                return Ok(None);
            }
            if ac[0] == bc[0] {
                return Ok(Some(RationalRelation::new(
                    Integer::from(1),
                    Integer::new(),
                    Integer::from(1),
                )?));
            }
            relation_from_rationals(&Rational::new(), &bc[0], q_max)
        }
        Some(c1) => {
            for i in 1..d {
                if bc[i] != Rational::from(&c1 * &ac[i]) {
                    return Ok(None);
                }
            }
            let c2 = Rational::from(&bc[0]) - Rational::from(&c1 * &ac[0]);
            relation_from_rationals(&c1, &c2, q_max)
        }
    }
}

/// Integer-relation search on floats: LLL on the rows [round(C·xᵢ) | eᵢ] for
/// x = (1, α, β), accepting a reduced row as a relation when its exact float
/// residual sits at rounding scale.
fn relation_float(
    ahat: &BigReal,
    bhat: &BigReal,
    q_max: &Integer,
    prec: u32,
) -> Result<Option<RationalRelation>> {
    let pw = prec + GUARD_BITS;
    let cbits = prec / 2 + GUARD_BITS;
    let scale_pow = Integer::from(1) << cbits;
    let c = BigReal::with_val(pw, &scale_pow);
    let xs = [big(pw, 1), BigReal::with_val(pw, ahat), BigReal::with_val(pw, bhat)];
    let mut rows = Vec::with_capacity(3);
    for (i, x) in xs.iter().enumerate() {
        let scaled = (x * &c).complete(pw);
        let rounded = scaled.to_integer().ok_or_else(|| {
            IrregularError::PrecisionExhausted("non-finite input to the relation search".into())
        })?;
        let mut row = vec![rounded, Integer::new(), Integer::new(), Integer::new()];
        row[1 + i] = Integer::from(1);
        rows.push(row);
    }
    let reduced = lll_integer_rows(rows, &Rational::from((99u32, 100u32)));
    let mag = {
        let mut m = big(pw, 1);
        for x in &xs {
            let ax = x.clone().abs();
            if ax > m {
                m = ax;
            }
        }
        m
    };
    for row in &reduced {
        let u = [&row[1], &row[2], &row[3]];
        if u[2].cmp0() == Ordering::Equal {
            continue;
        }
        let residual = (&xs[0] * u[0]).complete(pw)
            + (&xs[1] * u[1]).complete(pw)
            + (&xs[2] * u[2]).complete(pw);
        let l1 = BigReal::with_val(
            pw,
            Integer::from(u[0].abs_ref()) + Integer::from(u[1].abs_ref()) + Integer::from(u[2].abs_ref()),
        );
        let tol = half_ulp_tolerance(prec) * l1 * &mag;
        if residual.abs() > tol {
            continue;
        }
        // u₀ + u₁α + u₂β ≈ 0 → q = u₂, p₁ = −u₁, p₂ = −u₀ (sign-normalized).
        let (mut q, mut p1, mut p2) = (u[2].clone(), Integer::from(-u[1]), Integer::from(-u[0]));
        if q.cmp0() == Ordering::Less {
            q = -q;
            p1 = -p1;
            p2 = -p2;
        }
        let g = Integer::from(p1.gcd_ref(&p2)).gcd(&q);
        if g != 1 {
            q /= &g;
            p1 /= &g;
            p2 /= &g;
        }
        if &q <= q_max {
            return Ok(Some(RationalRelation::new(p1, p2, q)?));
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Dirichlet pairs
// ---------------------------------------------------------------------------

/// A Dirichlet approximation: integers (k, m) with 0 < k ≤ T and
/// |kθ + m| ≤ 1/T, from the continued-fraction convergents of θ.
#[derive(Clone, Debug)]
pub struct DirichletPair {
    pub k: Integer,
    pub m: Integer,
    /// |kθ + m| evaluated at the published precision.
    pub achieved: BigReal,
    /// The window T the pair was built for.
    pub window: BigReal,
}

/// The best Dirichlet pair within the window: k is the largest convergent
/// denominator ≤ T, which makes |kθ + m| < 1/q_{next} ≤ 1/T.
pub fn dirichlet_pair(theta: &Coord, window: &BigReal, prec: u32) -> Result<DirichletPair> {
    if !(window >= &1u32) {
        return Err(IrregularError::PreconditionViolated(format!(
            "Dirichlet window must be at least 1, got {window}"
        )));
    }
    // Convergent denominators grow at least like Fibonacci numbers, so
    // ~ln(T)/ln(φ) terms suffice; double defensively until the expansion
    // either passes T or terminates.
    let ln_window = window.clone().ln().to_f64().max(1.0);
    let mut n_terms = (ln_window / 0.48).ceil() as usize + 8;
    loop {
        let exp = cf_expand(theta.cf_input(), n_terms);
        let past_window = exp
            .convergents
            .last()
            .map(|(_, q)| *q > *window)
            .unwrap_or(false);
        let terminated = !exp.exhausted && exp.quotients.len() < n_terms;
        if !past_window && !terminated {
            if exp.exhausted {
                return Err(IrregularError::PrecisionExhausted(format!(
                    "continued fraction certified only {} terms (last denominator below the window {window})",
                    exp.quotients.len()
                )));
            }
            n_terms *= 2;
            if n_terms > 1 << 22 {
                return Err(IrregularError::PrecisionExhausted(
                    "continued-fraction expansion did not reach the window".into(),
                ));
            }
            continue;
        }
        let mut chosen: Option<(Integer, Integer)> = None;
        for (p, q) in &exp.convergents {
            if q.cmp0() == Ordering::Greater && *q <= *window {
                chosen = Some((p.clone(), q.clone()));
            }
        }
        let Some((p, q)) = chosen else {
            return Err(IrregularError::PrecisionExhausted(
                "no convergent denominator within the window".into(),
            ));
        };
        let k = q;
        let m = -p;
        let pwork = prec + GUARD_BITS;
        let achieved = match theta {
            Coord::Exact(s) => {
                let shifted = s.affine(&Rational::from(&k), &Rational::from(&m))?;
                shifted.to_float(pwork).abs()
            }
            Coord::Approx(x) => (BigReal::with_val(pwork, x) * &k + &m).abs(),
        };
        let achieved = BigReal::with_val(prec, achieved);
        // |kθ + m| ≤ 1/T is the selection theorem; allow a half-ulp of slack.
        let limit = big(pwork, 1) / window * (big(pwork, 1) + half_ulp_tolerance(prec));
        debug_assert!(
            achieved <= limit,
            "convergent selection violated the Dirichlet bound"
        );
        return Ok(DirichletPair {
            k,
            m,
            achieved,
            window: window.clone(),
        });
    }
}

/// Exhaustive oracle for small windows: scans every k in 1..=T for the
/// minimal distance of kθ to the integers (kept for cross-checking the
/// convergent route in tests).
pub fn dirichlet_pair_brute(theta: &Coord, window: i64, prec: u32) -> Result<DirichletPair> {
    if window < 1 {
        return Err(IrregularError::PreconditionViolated(format!(
            "Dirichlet window must be at least 1, got {window}"
        )));
    }
    let pw = prec + GUARD_BITS;
    let th = theta.to_float(pw);
    let mut best: Option<(Integer, Integer, BigReal)> = None;
    for k in 1..=window {
        let prod = (&th * k).complete(pw);
        let nearest = prod
            .to_integer()
            .ok_or_else(|| IrregularError::PrecisionExhausted("non-finite product".into()))?;
        let dist = (prod - &nearest).abs();
        let better = match &best {
            None => true,
            Some((_, _, d)) => dist < *d,
        };
        if better {
            best = Some((Integer::from(k), -nearest, dist));
        }
    }
    let (k, m, dist) = best.expect("window ≥ 1 scanned");
    Ok(DirichletPair {
        k,
        m,
        achieved: BigReal::with_val(prec, dist),
        window: big(prec, window),
    })
}

// ---------------------------------------------------------------------------
// The short-vector witness
// ---------------------------------------------------------------------------

/// A certified short vector in the flowed shear lattice: the integer
/// combination (qk, qm, p₁m − p₂k) of the h_v columns, imaged under
/// diag(e^{−t−s}, e^s, e^t), together with the proven sup-norm bound
/// max{|p₁|, q}·e^{−min(s,t)/2}.
#[derive(Clone, Debug)]
pub struct ShortyWitness {
    /// Coordinates of the witness in the h_v column basis.
    pub coords: Vec<Integer>,
    /// The witness vector after the diagonal flow, at the published precision.
    pub image: Vec<BigReal>,
    pub sup_norm: BigReal,
    pub euclid_norm: BigReal,
    /// max{|p₁|, q}·e^{−min(s,t)/2}.
    pub bound: BigReal,
    /// The Dirichlet pair the witness was built from.
    pub pair: DirichletPair,
}

/// Builds the witness for the flow point diag(e^{−t−s}, e^s, e^t)·h_v.
///
/// The window is T = e^{t+s/2} when t ≥ s and e^{s+t/2} otherwise; the
/// Dirichlet pair (k, m) for α then makes all three image coordinates at most
/// max{|p₁|, q}·e^{−min(s,t)/2} — a theorem, so exceeding the bound (beyond
/// half-ulp slack) reports [`IrregularError::BoundViolated`].
pub fn shorty_witness(
    v: &VParams,
    relation: &RationalRelation,
    t: &Rational,
    s: &Rational,
) -> Result<ShortyWitness> {
    if v.d() != 3 {
        return Err(IrregularError::DimensionNotThree(v.d()));
    }
    if t.cmp0() == Ordering::Less || s.cmp0() == Ordering::Less {
        return Err(IrregularError::PreconditionViolated(format!(
            "flow times must be nonnegative, got t = {t}, s = {s}"
        )));
    }
    let prec = v.prec;
    let pw = prec + GUARD_BITS;
    // T per the max/min split of the two-parameter flow.
    let exponent = if t >= s {
        Rational::from(t + Rational::from(s / Rational::from(2)))
    } else {
        Rational::from(s + Rational::from(t / Rational::from(2)))
    };
    let window = BigReal::with_val(pw, &exponent).exp();
    let pair = dirichlet_pair(v.alpha()?, &window, prec)?;
    let (k, m) = (pair.k.clone(), pair.m.clone());
    let coords = vec![
        Integer::from(relation.q() * &k),
        Integer::from(relation.q() * &m),
        Integer::from(relation.p1() * &m) - Integer::from(relation.p2() * &k),
    ];
    // Image under the flowed basis, recomputed from provenance at full
    // precision (the second and third coordinates are catastrophic
    // cancellations of the unflowed columns).
    let flowed = make_xv(v)?.apply_diag(&[
        Rational::from(-(t.clone() + s)),
        s.clone(),
        t.clone(),
    ])?;
    let image = flowed.vector(&coords);
    let sup_norm = image.iter().fold(big(pw, 0), |acc, x| {
        let ax = x.clone().abs();
        if ax > acc {
            ax
        } else {
            acc
        }
    });
    let euclid_norm = flowed.vector_norm(&coords);
    let m_scale = std::cmp::max(
        Integer::from(relation.p1().abs_ref()),
        relation.q().clone(),
    );
    let half_min = Rational::from(std::cmp::min(t, s) / Rational::from(-2));
    let bound = BigReal::with_val(pw, &half_min).exp() * BigReal::with_val(pw, &m_scale);
    let slack = big(pw, 1) + half_ulp_tolerance(prec);
    if sup_norm > (&bound * &slack).complete(pw) {
        return Err(IrregularError::BoundViolated {
            length: BigReal::with_val(prec, &sup_norm),
            bound: BigReal::with_val(prec, &bound),
        });
    }
    Ok(ShortyWitness {
        coords,
        image: image
            .iter()
            .map(|x| BigReal::with_val(prec, x))
            .collect(),
        sup_norm: BigReal::with_val(prec, sup_norm),
        euclid_norm: BigReal::with_val(prec, euclid_norm),
        bound: BigReal::with_val(prec, bound),
        pair,
    })
}

// ---------------------------------------------------------------------------
// Membership in the residue families
// ---------------------------------------------------------------------------

/// Outcome of the residue-family membership test.
#[derive(Clone, Debug)]
pub struct MMembershipVerdict {
    pub member: bool,
    /// 1 tests the third coordinate, 2 the second.
    pub family: u8,
    pub q: Integer,
    /// Residues (ℓ₁, ℓ₂) extracted from two independent basis vectors, when
    /// the residual test passed (present also on generation failure, so the
    /// failing residues are auditable).
    pub residues: Option<(Integer, Integer)>,
    /// Largest distance of a normalized axis coordinate from (1/q)Z.
    pub max_residual: BigReal,
    /// The axis normalization divided out before testing (the anchor's axis
    /// coordinate).
    pub axis_scale: BigReal,
}

/// Decides membership of a 3D lattice in the family of residue-constrained
/// lattices: family 1 requires all third coordinates in (1/q)Z with residues
/// of two independent vectors generating Z/qZ, family 2 the same on second
/// coordinates.
///
/// The test is invariant under diagonal scalings: the intersection of the
/// lattice with the family axis pins the normalization (its generator is the
/// basis vector with negligible off-axis part), and axis ratios are scale
/// free. A residual inside `(tol, 10·tol]` aborts with
/// [`IrregularError::ToleranceAmbiguous`] rather than guessing.
pub fn m_membership(
    x: &LatticeBasis,
    q: &Integer,
    family: u8,
    tol: &BigReal,
) -> Result<MMembershipVerdict> {
    if x.dim() != 3 {
        return Err(IrregularError::DimensionNotThree(x.dim()));
    }
    if q.cmp0() != Ordering::Greater {
        return Err(IrregularError::PreconditionViolated(format!(
            "family modulus must be positive, got {q}"
        )));
    }
    let axis = match family {
        1 => 2usize,
        2 => 1usize,
        other => {
            return Err(IrregularError::PreconditionViolated(format!(
                "family must be 1 or 2, got {other}"
            )))
        }
    };
    let others: [usize; 2] = match family {
        1 => [0, 1],
        _ => [0, 2],
    };
    let prec = x.precision();
    let pw = prec + GUARD_BITS;
    let (reduced, _) = x.reduce()?;
    let cols = reduced.columns();

    // The anchor: the basis vector generating the intersection with the
    // family axis — negligible off-axis part, smallest axis coordinate.
    let mut anchor: Option<(usize, BigReal)> = None;
    let anchor_tol = big(pw, 100) * tol;
    for j in 0..3 {
        let off = hypot2(cols.get(others[0], j), cols.get(others[1], j), pw);
        let ax = cols.get(axis, j).clone().abs();
        let full = hypot2(&off, &ax, pw);
        if off <= (&anchor_tol * &full).complete(pw) && ax.cmp0() == Some(Ordering::Greater) {
            let better = match &anchor {
                None => true,
                Some((_, best)) => ax < *best,
            };
            if better {
                anchor = Some((j, ax));
            }
        }
    }
    let Some((_, scale)) = anchor else {
        // No pure-axis vector: the lattice does not even contain the axis
        // line, so it is not in the family; there is no normalization under
        // which residuals are meaningful.
        return Ok(MMembershipVerdict {
            member: false,
            family,
            q: q.clone(),
            residues: None,
            max_residual: big(prec, f64::INFINITY),
            axis_scale: big(prec, 0),
        });
    };

    // Claim 1: all normalized axis coordinates within tol of (1/q)Z.
    let mut max_residual = big(pw, 0);
    let mut scaled_axis = Vec::with_capacity(3);
    for j in 0..3 {
        let c_hat = (cols.get(axis, j) / &scale).complete(pw);
        let e = (&c_hat * q).complete(pw);
        let nearest = e.to_integer().ok_or_else(|| {
            IrregularError::PrecisionExhausted("non-finite axis coordinate".into())
        })?;
        let r = (e - &nearest).abs() / q;
        if r > max_residual {
            max_residual = r;
        }
        scaled_axis.push((c_hat, nearest));
    }
    let ten_tol = big(pw, 10) * tol;
    if max_residual > BigReal::with_val(pw, tol) {
        if max_residual <= ten_tol {
            return Err(IrregularError::ToleranceAmbiguous {
                residual: BigReal::with_val(prec, &max_residual),
                tol: BigReal::with_val(prec, tol),
            });
        }
        return Ok(MMembershipVerdict {
            member: false,
            family,
            q: q.clone(),
            residues: None,
            max_residual: BigReal::with_val(prec, &max_residual),
            axis_scale: BigReal::with_val(prec, &scale),
        });
    }

    // Claim 2: residues from the pair of basis vectors with the most
    // independent off-axis parts must generate Z/qZ.
    let mut best_pair: Option<(usize, usize, BigReal)> = None;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let det = (cols.get(others[0], i) * cols.get(others[1], j)).complete(pw)
                - (cols.get(others[1], i) * cols.get(others[0], j)).complete(pw);
            let det = det.abs();
            let better = match &best_pair {
                None => true,
                Some((_, _, best)) => det > *best,
            };
            if better {
                best_pair = Some((i, j, det));
            }
        }
    }
    let (i, j, det) = best_pair.expect("three columns give three pairs");
    if det.cmp0() != Some(Ordering::Greater) {
        return Err(IrregularError::PrecisionExhausted(
            "off-axis parts of the reduced basis are degenerate".into(),
        ));
    }
    let l1 = Integer::from(&scaled_axis[i].1).rem_euc(q);
    let l2 = Integer::from(&scaled_axis[j].1).rem_euc(q);
    let generated = Integer::from(l1.gcd_ref(&l2)).gcd(q) == 1;
    Ok(MMembershipVerdict {
        member: generated,
        family,
        q: q.clone(),
        residues: Some((l1, l2)),
        max_residual: BigReal::with_val(prec, &max_residual),
        axis_scale: BigReal::with_val(prec, &scale),
    })
}

fn hypot2(a: &BigReal, b: &BigReal, prec: u32) -> BigReal {
    ((a * a).complete(prec) + (b * b).complete(prec)).sqrt()
}

// ---------------------------------------------------------------------------
// The plane projection
// ---------------------------------------------------------------------------

/// Projects a 3D lattice presented in plane-projection form — a basis matrix
/// with last row (θ₁, θ₂, 1) and last column (0, 0, 1)ᵀ after exact
/// unimodular column operations — to the 2D lattice of the upper-left block.
///
/// The reduction is found numerically but verified exactly on the provenance
/// scalars; inputs without exact provenance, with diagonal flow applied, or
/// whose lattice does not contain the third standard basis vector as a
/// primitive element are rejected with [`IrregularError::NotInSOrbit`].
pub fn project_pi(x: &LatticeBasis) -> Result<LatticeBasis> {
    if x.dim() != 3 {
        return Err(IrregularError::DimensionNotThree(x.dim()));
    }
    let prov = x
        .provenance()
        .ok_or_else(|| IrregularError::NotInSOrbit("basis has no exact provenance".into()))?;
    if prov.diag_log.iter().any(|t| t.cmp0() != Ordering::Equal) || prov.normalize {
        return Err(IrregularError::NotInSOrbit(
            "diagonal flow or renormalization applied; project the unflowed presentation".into(),
        ));
    }
    // Effective exact columns E = G · transform.
    let g_cols: Vec<Vec<Scalar>> = match &prov.generators {
        Generators::Identity(d) => (0..*d)
            .map(|j| {
                let mut col = vec![Scalar::zero(); *d];
                col[j] = Scalar::one();
                col
            })
            .collect(),
        Generators::Columns(cols) => cols.clone(),
        Generators::Embedding { .. } => {
            return Err(IrregularError::NotInSOrbit(
                "field-embedding presentation; present the lattice through explicit exact columns"
                    .into(),
            ))
        }
    };
    let t = &prov.transform;
    let e_col = |j: usize| -> Result<Vec<Scalar>> {
        (0..3)
            .map(|i| {
                let terms: Vec<(Integer, &Scalar)> = (0..3)
                    .map(|k| (t.get(k, j).clone(), &g_cols[k][i]))
                    .collect();
                scalar_int_combo(&terms)
            })
            .collect()
    };
    let e: Vec<Vec<Scalar>> = (0..3).map(e_col).collect::<Result<_>>()?;

    // Find the integer coordinates u of e₃ in this basis: float discovery
    // (Cramer), exact verification on the scalars.
    let pw = x.precision() + GUARD_BITS;
    let ef = |i: usize, j: usize| e[j][i].to_float(pw);
    let det3 = |m: &dyn Fn(usize, usize) -> BigReal| -> BigReal {
        m(0, 0) * m(1, 1) * m(2, 2) + m(0, 1) * m(1, 2) * m(2, 0) + m(0, 2) * m(1, 0) * m(2, 1)
            - m(0, 2) * m(1, 1) * m(2, 0)
            - m(0, 1) * m(1, 0) * m(2, 2)
            - m(0, 0) * m(1, 2) * m(2, 1)
    };
    let det = det3(&|i, j| ef(i, j));
    if det.cmp0() == Some(Ordering::Equal) {
        return Err(IrregularError::NotInSOrbit("singular basis".into()));
    }
    let mut u = Vec::with_capacity(3);
    for jj in 0..3 {
        // Replace column jj by e₃ and take the determinant ratio.
        let dj = det3(&|i, j| {
            if j == jj {
                big(pw, (i == 2) as i64)
            } else {
                ef(i, j)
            }
        });
        let ratio = dj / &det;
        let rounded = ratio.to_integer().ok_or_else(|| {
            IrregularError::NotInSOrbit("non-finite solve for the axis vector".into())
        })?;
        u.push(rounded);
    }
    // Exact verification: E·u = e₃.
    for i in 0..3 {
        let terms: Vec<(Integer, &Scalar)> = (0..3).map(|j| (u[j].clone(), &e[j][i])).collect();
        let combo = scalar_int_combo(&terms)?;
        let target = if i == 2 { Scalar::one() } else { Scalar::zero() };
        if !combo.certified_eq(&target) {
            return Err(IrregularError::NotInSOrbit(
                "the lattice does not contain the third standard basis vector".into(),
            ));
        }
    }
    let content = u
        .iter()
        .fold(Integer::new(), |acc, x| acc.gcd(x));
    if content != 1 {
        return Err(IrregularError::NotInSOrbit(
            "the third standard basis vector is not primitive in the lattice".into(),
        ));
    }
    // Unimodular completion with u as the LAST column (cyclic column shift of
    // the completion keeps the determinant in dimension 3).
    let c = complete_unimodular(&u);
    let u_mat = IMat::from_fn(3, 3, |i, j| c.get(i, (j + 1) % 3).clone());
    let r_col = |j: usize| -> Result<Vec<Scalar>> {
        (0..3)
            .map(|i| {
                let terms: Vec<(Integer, &Scalar)> = (0..3)
                    .map(|k| (u_mat.get(k, j).clone(), &e[k][i]))
                    .collect();
                scalar_int_combo(&terms)
            })
            .collect()
    };
    let c0 = r_col(0)?;
    let c1 = r_col(1)?;
    debug_assert!(r_col(2)?[2].certified_eq(&Scalar::one()));
    let block = vec![
        vec![c0[0].clone(), c0[1].clone()],
        vec![c1[0].clone(), c1[1].clone()],
    ];
    Ok(LatticeBasis::from_exact_columns(block, x.precision())?)
}

/// Integer combination of exact scalars. Rationals accumulate exactly;
/// algebraic handles must all denote the same number (checked), which the
/// affine transform then absorbs. Entries mixing independent irrationals are
/// rejected — such bases are outside the exactly-reducible class.
fn scalar_int_combo(terms: &[(Integer, &Scalar)]) -> Result<Scalar> {
    let mut rat = Rational::new();
    let mut alg: Option<(&crate::arith::AlgebraicReal, Integer)> = None;
    for (c, s) in terms {
        if c.cmp0() == Ordering::Equal {
            continue;
        }
        match s {
            Scalar::Rational(r) => rat += Rational::from(r * c),
            Scalar::Algebraic(a) => match &mut alg {
                None => alg = Some((a, c.clone())),
                Some((seen, acc)) => {
                    if seen.same_number(a) {
                        *acc += c;
                    } else {
                        return Err(IrregularError::NotInSOrbit(
                            "entry mixes independent irrational numbers".into(),
                        ));
                    }
                }
            },
        }
    }
    match alg {
        None => Ok(Scalar::Rational(rat)),
        Some((a, coeff)) => {
            if coeff.cmp0() == Ordering::Equal {
                return Ok(Scalar::Rational(rat));
            }
            Ok(Scalar::Algebraic(a.clone()).affine(&Rational::from(coeff), &rat)?)
        }
    }
}

// ---------------------------------------------------------------------------
// The recurrence experiment
// ---------------------------------------------------------------------------

/// Tuning knobs for [`omega_experiment`].
#[derive(Clone, Debug)]
pub struct OmegaParams {
    /// Flow runs over t ∈ [0, t_max].
    pub t_max: Rational,
    /// Number of uniform samples on the window.
    pub steps: usize,
    /// Recurrence threshold on the systole.
    pub rho: Rational,
    /// Membership tolerance.
    pub tol: BigReal,
    /// Relation-search bound.
    pub q_max: Integer,
    /// Off-ray grid runs over (t, s) ∈ {0, …, grid_max}².
    pub grid_max: i64,
}

impl OmegaParams {
    /// Defaults: 20 samples per unit time, ρ = 1/10, tol = 10⁻⁸, q_max = 64,
    /// off-ray grid up to 15.
    pub fn standard(t_max: i64, prec: u32) -> Self {
        OmegaParams {
            t_max: Rational::from(t_max),
            steps: (t_max.max(1) as usize) * 20,
            rho: Rational::from((1u32, 10u32)),
            tol: big(prec, 1e-8),
            q_max: Integer::from(64),
            grid_max: 15,
        }
    }
}

/// One refined recurrence: a local maximum of the systole above the
/// threshold, with the membership verdict at that time. `ambiguous` marks
/// events whose membership test aborted in the tolerance guard band (the
/// verdict then reports the residual with `member = false`).
#[derive(Clone, Debug)]
pub struct RecurrenceEvent {
    pub t: Rational,
    pub systole: BigReal,
    pub verdict: MMembershipVerdict,
    pub ambiguous: bool,
}

/// One off-ray grid point: the systole against the certified witness.
#[derive(Clone, Debug)]
pub struct OffRaySample {
    pub t: i64,
    pub s: i64,
    pub systole: BigReal,
    pub witness_sup: BigReal,
    pub witness_euclid: BigReal,
    pub bound: BigReal,
}

/// The full experiment record.
#[derive(Clone, Debug)]
pub struct OmegaReport {
    pub family: u8,
    /// The coupling used for the membership modulus (forward for family 1,
    /// reverse for family 2).
    pub relation: RationalRelation,
    pub v_display: Vec<String>,
    pub recurrences: Vec<RecurrenceEvent>,
    pub offray_grid: Vec<OffRaySample>,
    /// At least one recurrence passed membership — evidence (never a
    /// certificate) that the accumulation set on this ray is nonempty.
    pub omega_evidence: bool,
}

fn int_json(x: &Integer) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

fn real_json(x: &BigReal) -> Value {
    json!(x.to_string_radix(10, Some(24)))
}

impl OmegaReport {
    /// Deterministic JSON rendering (sorted keys, decimal strings for reals).
    pub fn to_json(&self) -> Value {
        let recurrences: Vec<Value> = self
            .recurrences
            .iter()
            .map(|e| {
                let (l1, l2) = match &e.verdict.residues {
                    Some((l1, l2)) => (int_json(l1), int_json(l2)),
                    None => (Value::Null, Value::Null),
                };
                json!({
                    "t": real_json(&big(96, &e.t)),
                    "systole": real_json(&e.systole),
                    "member": e.verdict.member,
                    "l1": l1,
                    "l2": l2,
                    "residual": real_json(&e.verdict.max_residual),
                    "ambiguous": e.ambiguous,
                })
            })
            .collect();
        let offray: Vec<Value> = self
            .offray_grid
            .iter()
            .map(|o| {
                json!({
                    "t": o.t,
                    "s": o.s,
                    "systole": real_json(&o.systole),
                    "witness_sup": real_json(&o.witness_sup),
                    "witness_l2": real_json(&o.witness_euclid),
                    "bound": real_json(&o.bound),
                })
            })
            .collect();
        json!({
            "v": self.v_display,
            "relation": {
                "p1": int_json(self.relation.p1()),
                "p2": int_json(self.relation.p2()),
                "q": int_json(self.relation.q()),
            },
            "family": self.family,
            "recurrences": recurrences,
            "offray_grid": offray,
            "omega_evidence": self.omega_evidence,
        })
    }
}

/// Runs the recurrence experiment along the family ray.
///
/// Preconditions: d = 3; α and β irrational (certified for exact inputs,
/// continued-fraction evidence for floats); the coupling exists in the
/// direction the family needs (forward β-over-α for the witness bound, and
/// additionally reverse for family 2's modulus).
///
/// The trajectory runs along diag(e^{−t}, e^{t}, 1) for family 1 and
/// diag(e^{−t}, 1, e^{t}) for family 2. Local maxima of the systole above ρ
/// are refined by bracketed bisection (exact provenance re-evaluation at
/// every probe), membership is tested at each refined time, and the off-ray
/// grid compares systoles against the certified witness. Windows, refinement
/// and membership run in parallel; assembly is ordered by time.
pub fn omega_experiment(v: &VParams, family: u8, params: &OmegaParams) -> Result<OmegaReport> {
    if v.d() != 3 {
        return Err(IrregularError::DimensionNotThree(v.d()));
    }
    if family != 1 && family != 2 {
        return Err(IrregularError::PreconditionViolated(format!(
            "family must be 1 or 2, got {family}"
        )));
    }
    let prec = v.prec;
    for (name, coord) in [("α", v.alpha()?), ("β", v.beta()?)] {
        match coord.certified_irrational() {
            Some(false) => {
                return Err(IrregularError::PreconditionViolated(format!(
                    "{name} is rational; the experiment needs irrational shear parameters"
                )))
            }
            Some(true) => {}
            None => {
                if !coord.irrationality_evidence(24) {
                    return Err(IrregularError::PreconditionViolated(format!(
                        "no irrationality evidence for {name} at this precision"
                    )));
                }
            }
        }
    }
    let forward = v.relation(false, &params.q_max)?.ok_or_else(|| {
        IrregularError::PreconditionViolated(
            "no rational coupling β = (p₁α + p₂)/q within the bound".into(),
        )
    })?;
    let membership_relation = if family == 1 {
        forward.clone()
    } else {
        v.relation(true, &params.q_max)?.ok_or_else(|| {
            IrregularError::PreconditionViolated(
                "no reverse coupling α = (p₁′β + p₂′)/q′ within the bound".into(),
            )
        })?
    };
    let q_use = membership_relation.q().clone();

    let x = make_xv(v)?;
    let pattern: [i64; 3] = if family == 1 { [-1, 1, 0] } else { [-1, 0, 1] };
    let direction = TracelessDiag::from_rationals(
        prec,
        &[
            Rational::from(pattern[0]),
            Rational::from(pattern[1]),
            Rational::from(pattern[2]),
        ],
    );
    let samples = flows::trajectory(&x, &direction, &params.t_max, params.steps, &params.rho)?;

    // Local maxima of the systole among recurrence-flagged samples.
    let mut brackets: Vec<(Rational, Rational)> = Vec::new();
    for i in 0..samples.len() {
        if !samples[i].recurrence {
            continue;
        }
        // Strict on the left so a plateau of tied systoles (the invariant
        // basis vector pinning the systole at 1) yields one bracket, not one
        // per tied sample.
        let left_ok = i == 0 || samples[i].systole > samples[i - 1].systole;
        let right_ok = i + 1 == samples.len() || samples[i].systole >= samples[i + 1].systole;
        if left_ok && right_ok {
            let lo = if i == 0 {
                samples[0].t.clone()
            } else {
                samples[i - 1].t.clone()
            };
            let hi = if i + 1 == samples.len() {
                samples[i].t.clone()
            } else {
                samples[i + 1].t.clone()
            };
            brackets.push((lo, hi));
        }
    }

    let recurrences: Vec<RecurrenceEvent> = brackets
        .into_par_iter()
        .map(|(lo, hi)| -> Result<RecurrenceEvent> {
            let (t_star, basis, systole) = refine_systole_maximum(&x, pattern, lo, hi)?;
            match m_membership(&basis, &q_use, family, &params.tol) {
                Ok(verdict) => Ok(RecurrenceEvent {
                    t: t_star,
                    systole,
                    verdict,
                    ambiguous: false,
                }),
                Err(IrregularError::ToleranceAmbiguous { residual, .. }) => Ok(RecurrenceEvent {
                    t: t_star,
                    systole,
                    verdict: MMembershipVerdict {
                        member: false,
                        family,
                        q: q_use.clone(),
                        residues: None,
                        max_residual: residual,
                        axis_scale: big(prec, 0),
                    },
                    ambiguous: true,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;

    // Off-ray grid: systole against the certified witness at every point.
    let grid: Vec<(i64, i64)> = (0..=params.grid_max)
        .flat_map(|t| (0..=params.grid_max).map(move |s| (t, s)))
        .collect();
    let offray_grid: Vec<OffRaySample> = grid
        .into_par_iter()
        .map(|(ti, si)| -> Result<OffRaySample> {
            let t = Rational::from(ti);
            let s = Rational::from(si);
            let witness = shorty_witness(v, &forward, &t, &s)?;
            let flowed = x.apply_diag(&[
                Rational::from(-(t.clone() + &s)),
                s.clone(),
                t.clone(),
            ])?;
            let (reduced, _) = flowed.reduce()?;
            let (systole, _) = reduced.shortest_vector()?;
            Ok(OffRaySample {
                t: ti,
                s: si,
                systole,
                witness_sup: witness.sup_norm,
                witness_euclid: witness.euclid_norm,
                bound: witness.bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let omega_evidence = recurrences.iter().any(|e| e.verdict.member);
    let pw = prec + GUARD_BITS;
    let v_display = v
        .coords
        .iter()
        .map(|c| c.to_float(pw).to_string_radix(10, Some(24)))
        .collect();
    Ok(OmegaReport {
        family,
        relation: membership_relation,
        v_display,
        recurrences,
        offray_grid,
        omega_evidence,
    })
}

/// Bracketed trisection to a local maximum of the systole along the ray,
/// re-evaluating every probe exactly from provenance. Returns the refined
/// time (the simplest rational in the final bracket), the reduced basis and
/// the systole there.
fn refine_systole_maximum(
    x: &LatticeBasis,
    pattern: [i64; 3],
    mut lo: Rational,
    mut hi: Rational,
) -> Result<(Rational, LatticeBasis, BigReal)> {
    let eval = |t: &Rational| -> Result<(LatticeBasis, BigReal)> {
        let scaled: Vec<Rational> = pattern
            .iter()
            .map(|p| Rational::from(t * Rational::from(*p)))
            .collect();
        let flowed = x.apply_diag(&scaled)?;
        let (reduced, _) = flowed.reduce()?;
        let (systole, _) = reduced.shortest_vector()?;
        Ok((reduced, systole))
    };
    for _ in 0..36 {
        let third = Rational::from((Rational::from(&hi - &lo)) / Rational::from(3));
        let m1 = Rational::from(&lo + &third);
        let m2 = Rational::from(&hi - &third);
        let (_, f1) = eval(&m1)?;
        let (_, f2) = eval(&m2)?;
        if f1 < f2 {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let t_star = crate::arith::simplest_in_interval(&lo, &hi);
    let (basis, systole) = eval(&t_star)?;
    Ok((t_star, basis, systole))
}

// ---------------------------------------------------------------------------
