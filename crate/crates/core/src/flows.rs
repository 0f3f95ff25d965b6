//! Diagonal flows, torus actions, root-space combinatorics, the cone
//! construction, trajectory sampling, and torus-orbit closures.
//!
//! The diagonal group acts on a lattice by scaling basis rows with e^{t_i},
//! Σt_i = 0. Directions built from rational data keep an exact form, so a
//! trajectory recomputes every sample from the original provenance instead of
//! accumulating floating-point drift. Root functionals λ_ij(v) = v_i − v_j
//! are ordered by j − i (longer reach first), ties by smaller i; the cone
//! construction picks the maximal active positive root, the canonical
//! direction v₀ from that root alone, and certifies an exact rational margin
//! of at least 1 between the dominant rate and every other active rate.
//!
//! Orbit closures on the torus R^m / (lattice) reduce to integer linear
//! algebra: the closure dimension is m minus the number of independent
//! integer functionals vanishing on the acting subspace, and those
//! functionals are found by exact lattice reduction over certified rational
//! approximations — never by floating-point rank guesses.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{half_ulp_tolerance, ArithError, BigComplex, BigReal, Integer, Rational};
use crate::lattice::{LatticeBasis, LatticeError};
use crate::linalg::{lll_integer_rows, round_rational, IMat, QMat, RMat};

const GUARD_BITS: u32 = 64;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("flow index k = {k} out of range 1..={max}")]
    BadIndex { k: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("torus parameters violate the determinant-one constraint (|det − 1| = {0})")]
    DeterminantViolation(String),
    #[error("the spanned subalgebra is contained in the diagonal subalgebra")]
    DiagonalSubalgebra,
    #[error("approximation too coarse to decide a kernel vector: {0}")]
    UncertifiedInput(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

type Result<T> = std::result::Result<T, FlowError>;

// ---------------------------------------------------------------------------
// Traceless diagonals and root indices
// ---------------------------------------------------------------------------

/// An element of the diagonal subalgebra 𝔞: log-coordinates (t_1, …, t_d)
/// with Σt_i = 0. The constructor applies the projection p_𝔞 (subtracting
/// the mean), so any diagonal comes out traceless. Directions built from
/// rational data keep an exact rational form used for provenance-exact
/// lattice flows.
#[derive(Clone, Debug)]
pub struct TracelessDiag {
    entries: Vec<BigReal>,
    exact: Option<Vec<Rational>>,
    prec: u32,
}

impl TracelessDiag {
    /// Exact construction: subtracts the rational mean.
    pub fn from_rationals(prec: u32, v: &[Rational]) -> Self {
        let d = v.len();
        let mut mean = Rational::new();
        for x in v {
            mean += x;
        }
        mean /= Rational::from(d as u64);
        let exact: Vec<Rational> = v.iter().map(|x| Rational::from(x - &mean)).collect();
        let entries = exact
            .iter()
            .map(|x| BigReal::with_val(prec, x))
            .collect();
        TracelessDiag {
            entries,
            exact: Some(exact),
            prec,
        }
    }

    /// Floating construction: subtracts the floating mean; no exact form.
    pub fn from_reals(prec: u32, v: &[BigReal]) -> Self {
        let d = v.len();
        let mut mean = BigReal::with_val(prec + GUARD_BITS, 0);
        for x in v {
            mean += x;
        }
        mean /= BigReal::with_val(prec + GUARD_BITS, d as u32);
        let entries = v
            .iter()
            .map(|x| BigReal::with_val(prec, x - &mean))
            .collect();
        TracelessDiag {
            entries,
            exact: None,
            prec,
        }
    }

    pub fn zero(prec: u32, d: usize) -> Self {
        TracelessDiag::from_rationals(prec, &vec![Rational::new(); d])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn entries(&self) -> &[BigReal] {
        &self.entries
    }

    /// The exact rational coordinates, when the direction was built from
    /// rational data.
    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// t·v, exact when v is.
    pub fn scaled(&self, t: &Rational) -> Self {
        match &self.exact {
            Some(ex) => {
                let v: Vec<Rational> = ex.iter().map(|x| Rational::from(x * t)).collect();
                TracelessDiag::from_rationals(self.prec, &v)
            }
            None => {
                let tf = BigReal::with_val(self.prec, t);
                let v: Vec<BigReal> = self
                    .entries
                    .iter()
                    .map(|x| BigReal::with_val(self.prec, x * &tf))
                    .collect();
                TracelessDiag::from_reals(self.prec, &v)
            }
        }
    }

    /// v + w in log coordinates, exact when both are.
    pub fn add(&self, other: &TracelessDiag) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(FlowError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let v: Vec<Rational> = a
                    .iter()
                    .zip(b.iter())
                    .map(|(x, y)| Rational::from(x + y))
                    .collect();
                Ok(TracelessDiag::from_rationals(self.prec, &v))
            }
            _ => {
                let v: Vec<BigReal> = self
                    .entries
                    .iter()
                    .zip(other.entries.iter())
                    .map(|(x, y)| BigReal::with_val(self.prec, x + y))
                    .collect();
                Ok(TracelessDiag::from_reals(self.prec, &v))
            }
        }
    }

    /// Root functional λ_ij(v) = v_i − v_j.
    pub fn lambda(&self, root: RootIndex) -> BigReal {
        BigReal::with_val(
            self.prec,
            &self.entries[root.i - 1] - &self.entries[root.j - 1],
        )
    }

    /// Exact root functional, when possible.
    pub fn lambda_exact(&self, root: RootIndex) -> Option<Rational> {
        self.exact
            .as_ref()
            .map(|ex| Rational::from(&ex[root.i - 1] - &ex[root.j - 1]))
    }

    /// Euclidean norm of the log coordinates.
    pub fn norm(&self) -> BigReal {
        let mut acc = BigReal::with_val(self.prec, 0);
        for x in &self.entries {
            acc += BigReal::with_val(self.prec, x * x);
        }
        acc.sqrt()
    }
}

/// An off-diagonal root position (i, j), 1-based, i ≠ j. The root is
/// positive when i < j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RootIndex {
    pub i: usize,
    pub j: usize,
}

impl RootIndex {
    pub fn new(i: usize, j: usize, d: usize) -> Result<Self> {
        if i == 0 || j == 0 || i > d || j > d || i == j {
            return Err(FlowError::BadIndex { k: i.max(j), max: d });
        }
        Ok(RootIndex { i, j })
    }

    pub fn is_positive(&self) -> bool {
        self.i < self.j
    }

    /// Conjugation by the coordinate-reversing permutation.
    fn reversed(&self, d: usize) -> RootIndex {
        RootIndex {
            i: d + 1 - self.i,
            j: d + 1 - self.j,
        }
    }
}

/// The multiplicative character χ_ij on positive diagonals: entry ratio
/// t_i / t_j.
pub fn chi(root: RootIndex, diag: &[BigReal]) -> BigReal {
    let prec = diag[root.i - 1].prec().max(diag[root.j - 1].prec());
    BigReal::with_val(prec, &diag[root.i - 1] / &diag[root.j - 1])
}

/// All roots of sl_d in decreasing order: λ_ij ranks above λ_kℓ exactly when
/// j − i > ℓ − k, ties broken by smaller i. Positive roots (i < j) therefore
/// come first, led by (1, d).
pub fn root_order(d: usize) -> Vec<RootIndex> {
    let mut roots = Vec::with_capacity(d * (d - 1));
    for i in 1..=d {
        for j in 1..=d {
            if i != j {
                roots.push(RootIndex { i, j });
            }
        }
    }
    roots.sort_by(|a, b| {
        let ra = a.j as i64 - a.i as i64;
        let rb = b.j as i64 - b.i as i64;
        rb.cmp(&ra).then(a.i.cmp(&b.i))
    });
    roots
}

// ---------------------------------------------------------------------------
// One-parameter subgroups and diagonal action
// ---------------------------------------------------------------------------

/// The standard one-parameter direction: first k log-entries equal
/// (d − k)·t, the remaining d − k equal −k·t. Exactly traceless.
pub fn a_k_flow(k: usize, t: &Rational, d: usize, prec: u32) -> Result<TracelessDiag> {
    if k == 0 || k >= d {
        return Err(FlowError::BadIndex { k, max: d - 1 });
    }
    let mut v = Vec::with_capacity(d);
    let pos = Rational::from(t * &Rational::from((d - k) as u64));
    let neg = -Rational::from(t * &Rational::from(k as u64));
    for i in 0..d {
        v.push(if i < k { pos.clone() } else { neg.clone() });
    }
    Ok(TracelessDiag::from_rationals(prec, &v))
}

/// Applies exp(v) to the lattice: basis rows scaled by e^{t_i}. Exact
/// directions go through the provenance-preserving path; floating directions
/// scale the materialized columns (provenance is dropped).
pub fn apply_diag(v: &TracelessDiag, x: &LatticeBasis) -> Result<LatticeBasis> {
    if v.dim() != x.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: x.dim(),
            got: v.dim(),
        });
    }
    if let Some(ex) = v.exact() {
        return Ok(x.apply_diag(ex)?);
    }
    let prec = x.precision();
    let pw = prec + GUARD_BITS;
    let mut cols = x.columns().at_prec(pw);
    for (i, t) in v.entries().iter().enumerate() {
        let f = BigReal::with_val(pw, t).exp();
        cols.scale_row(i, &f);
    }
    Ok(LatticeBasis::from_float_columns(cols.at_prec(prec))?)
}

// ---------------------------------------------------------------------------
// Torus parameters
// ---------------------------------------------------------------------------

/// A point of the connected torus T^(r,s): positive real moduli a_1…a_r and
/// nonzero complex parameters ω_1…ω_s, subject to the determinant-one
/// constraint ∏a_i·∏|ω_j|² = 1 within 2^(−P/2).
#[derive(Clone, Debug)]
pub struct TorusParam {
    r: usize,
    s: usize,
    moduli: Vec<BigReal>,
    omegas: Vec<BigComplex>,
    prec: u32,
}

impl TorusParam {
    pub fn new(
        moduli: Vec<BigReal>,
        omegas: Vec<BigComplex>,
        prec: u32,
    ) -> Result<Self> {
        let (r, s) = (moduli.len(), omegas.len());
        let pw = prec + GUARD_BITS;
        let mut det = BigReal::with_val(pw, 1);
        for a in &moduli {
            if !(a.cmp0() == Some(Ordering::Greater)) {
                return Err(FlowError::DeterminantViolation(
                    "real modulus must be positive".into(),
                ));
            }
            det *= a;
        }
        for w in &omegas {
            // |ω|² computed from the parts.
            let n = BigReal::with_val(pw, w.real() * w.real())
                + BigReal::with_val(pw, w.imag() * w.imag());
            if n.is_zero() {
                return Err(FlowError::DeterminantViolation(
                    "complex parameter must be nonzero".into(),
                ));
            }
            det *= n;
        }
        let off = BigReal::with_val(pw, &det - BigReal::with_val(pw, 1)).abs();
        if off > half_ulp_tolerance(prec) {
            return Err(FlowError::DeterminantViolation(off.to_string()));
        }
        Ok(TorusParam {
            r,
            s,
            moduli,
            omegas,
            prec,
        })
    }

    pub fn signature(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    pub fn dim(&self) -> usize {
        self.r + 2 * self.s
    }

    pub fn moduli(&self) -> &[BigReal] {
        &self.moduli
    }

    pub fn omegas(&self) -> &[BigComplex] {
        &self.omegas
    }

    /// The diagonal complex matrix diag(a_1, …, a_r, ω_1, ω̄_1, …, ω_s, ω̄_s)
    /// as its entry list. On zero-angle parameters this is exactly the real
    /// diagonal again.
    pub fn tilde(&self) -> Vec<BigComplex> {
        let mut out = Vec::with_capacity(self.dim());
        for a in &self.moduli {
            out.push(BigComplex::with_val(self.prec, (a, &BigReal::with_val(self.prec, 0))));
        }
        for w in &self.omegas {
            out.push(w.clone());
            out.push(BigComplex::with_val(self.prec, (w.real(), &BigReal::with_val(self.prec, -w.imag().clone()))));
        }
        out
    }

    /// The real d×d block-diagonal matrix: scalars a_i, then rotation-scaling
    /// blocks [[Re ω, −Im ω], [Im ω, Re ω]].
    pub fn block_matrix(&self) -> RMat {
        let d = self.dim();
        let prec = self.prec;
        let mut m = RMat::zeros(prec, d, d);
        for (i, a) in self.moduli.iter().enumerate() {
            m.set(i, i, BigReal::with_val(prec, a));
        }
        for (j, w) in self.omegas.iter().enumerate() {
            let base = self.r + 2 * j;
            let re = BigReal::with_val(prec, w.real());
            let im = BigReal::with_val(prec, w.imag());
            m.set(base, base, re.clone());
            m.set(base, base + 1, BigReal::with_val(prec, -&im));
            m.set(base + 1, base, im);
            m.set(base + 1, base + 1, re);
        }
        m
    }

    /// Pointwise product of torus parameters (the group law); the
    /// determinant-one constraint is preserved and re-checked.
    pub fn compose(&self, other: &TorusParam) -> Result<TorusParam> {
        if self.r != other.r || self.s != other.s {
            return Err(FlowError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let prec = self.prec.max(other.prec);
        let moduli = self
            .moduli
            .iter()
            .zip(&other.moduli)
            .map(|(a, b)| BigReal::with_val(prec, a * b))
            .collect();
        let omegas = self
            .omegas
            .iter()
            .zip(&other.omegas)
            .map(|(a, b)| BigComplex::with_val(prec, a * b))
            .collect();
        TorusParam::new(moduli, omegas, prec)
    }

    /// Applies the torus point to a lattice through the real block action.
    /// The result is a plain floating lattice (block rotations have no exact
    /// provenance form).
    pub fn apply(&self, x: &LatticeBasis) -> Result<LatticeBasis> {
        if self.dim() != x.dim() {
            return Err(FlowError::DimensionMismatch {
                expected: x.dim(),
                got: self.dim(),
            });
        }
        let pw = x.precision() + GUARD_BITS;
        let product = self.block_matrix().at_prec(pw).mul(&x.columns().at_prec(pw));
        Ok(LatticeBasis::from_float_columns(product.at_prec(x.precision()))?)
    }
}

// ---------------------------------------------------------------------------
// Lie elements and the cone construction
// ---------------------------------------------------------------------------

/// A traceless d×d matrix with its root-space coordinate split: the diagonal
/// part (in 𝔞) plus one coefficient per off-diagonal root position. The
/// constructor subtracts (tr/d)·I, so any matrix projects into sl_d.
#[derive(Clone, Debug)]
pub struct LieElement {
    mat: RMat,
}

impl LieElement {
    pub fn new(m: RMat) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() {
            return Err(FlowError::DimensionMismatch {
                expected: d,
                got: m.ncols(),
            });
        }
        let prec = m.prec();
        let pw = prec + GUARD_BITS;
        let mut tr = BigReal::with_val(pw, 0);
        for i in 0..d {
            tr += m.get(i, i);
        }
        let shift = BigReal::with_val(pw, tr / BigReal::with_val(pw, d as u32));
        let mut mat = m;
        for i in 0..d {
            let v = BigReal::with_val(prec, mat.get(i, i) - &shift);
            mat.set(i, i, v);
        }
        Ok(LieElement { mat })
    }

    pub fn from_rational_rows(prec: u32, rows: &[Vec<Rational>]) -> Result<Self> {
        let d = rows.len();
        for r in rows {
            if r.len() != d {
                return Err(FlowError::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
        }
        let m = RMat::from_fn(prec, d, d, |i, j| BigReal::with_val(prec, &rows[i][j]));
        LieElement::new(m)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &RMat {
        &self.mat
    }

    /// The coefficient on the root position (i, j).
    pub fn component(&self, root: RootIndex) -> &BigReal {
        self.mat.get(root.i - 1, root.j - 1)
    }

    /// The diagonal part as a traceless direction (the split is exact by
    /// construction: matrix = diag part + Σ root components).
    pub fn diag_part(&self) -> TracelessDiag {
        let d = self.dim();
        let v: Vec<BigReal> = (0..d).map(|i| self.mat.get(i, i).clone()).collect();
        TracelessDiag::from_reals(self.mat.prec(), &v)
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.mat.get(i, j).is_zero()))
    }

    pub fn frobenius_norm(&self) -> BigReal {
        let prec = self.mat.prec();
        let d = self.dim();
        let mut acc = BigReal::with_val(prec + GUARD_BITS, 0);
        for i in 0..d {
            for j in 0..d {
                let x = self.mat.get(i, j);
                acc += BigReal::with_val(prec + GUARD_BITS, x * x);
            }
        }
        BigReal::with_val(prec, acc.sqrt())
    }

    /// Conjugation by the coordinate-reversing permutation (a Weyl element):
    /// entry (i, j) moves to (d+1−i, d+1−j).
    fn reversed(&self) -> LieElement {
        let d = self.dim();
        let m = RMat::from_fn(self.mat.prec(), d, d, |i, j| {
            self.mat.get(d - 1 - i, d - 1 - j).clone()
        });
        LieElement { mat: m }
    }
}

/// Ad_{exp(v)} X computed by the root-space formula: the diagonal part is
/// fixed and every root component scales by e^{λ_ij(v)}.
pub fn ad_exp(v: &TracelessDiag, x: &LieElement) -> Result<LieElement> {
    let d = x.dim();
    if v.dim() != d {
        return Err(FlowError::DimensionMismatch {
            expected: d,
            got: v.dim(),
        });
    }
    let prec = x.matrix().prec();
    let pw = prec + GUARD_BITS;
    let m = RMat::from_fn(prec, d, d, |i, j| {
        if i == j {
            x.matrix().get(i, j).clone()
        } else {
            let lam = BigReal::with_val(pw, &v.entries()[i] - &v.entries()[j]);
            BigReal::with_val(prec, x.matrix().get(i, j) * lam.exp())
        }
    });
    Ok(LieElement { mat: m })
}

/// Certificate produced by the cone construction.
#[derive(Clone, Debug)]
pub struct ConeCertificate {
    /// The maximal active positive root (i₀, j₀) (after undoing the Weyl
    /// conjugation if one was needed).
    pub dominant: RootIndex,
    /// Canonical direction v₀ built from j₀ alone; exact rationals inside.
    pub v0: TracelessDiag,
    /// Exact minimal gap λ_{i₀j₀}(v₀) − rate of every other active
    /// component (other roots at λ_ij(v₀), the diagonal part at 0);
    /// guaranteed ≥ 1.
    pub margin: Rational,
    /// Coefficient of the chosen element on the dominant root.
    pub nilpotent_coefficient: BigReal,
    /// Index of the chosen basis element.
    pub chosen_index: usize,
    /// Least-squares slope of ln‖Ad_{exp(tv₀)}(e^{−λ₀t}X) − X_{i₀j₀}‖ over
    /// t ∈ {1, …, 10}; −∞ when X has no other component at all.
    pub measured_slope: BigReal,
    /// Whether the negative-root fallback (coordinate-reversal conjugation)
    /// was used.
    pub conjugated: bool,
}

/// The cone construction: finds the maximal positive root receiving a
/// nonzero projection from the span, the canonical contracting direction
/// v₀ = p_𝔞(diag(j₀, j₀−1, …, 2, 0, …, 0)), and an exact rational margin
/// certificate; measures the actual decay rate along the ray. When only
/// negative roots project nontrivially the basis is conjugated by the
/// coordinate-reversing Weyl element and the certificate mapped back.
pub fn cone_construct(h_basis: &[LieElement], prec: u32) -> Result<ConeCertificate> {
    let d = match h_basis.first() {
        Some(x) => x.dim(),
        None => return Err(FlowError::DiagonalSubalgebra),
    };
    for x in h_basis {
        if x.dim() != d {
            return Err(FlowError::DimensionMismatch {
                expected: d,
                got: x.dim(),
            });
        }
    }
    if h_basis.iter().all(|x| x.is_diagonal()) {
        return Err(FlowError::DiagonalSubalgebra);
    }
    let order = root_order(d);
    let active = |root: RootIndex| h_basis.iter().any(|x| !x.component(root).is_zero());
    let has_positive = order
        .iter()
        .any(|&r| r.is_positive() && active(r));
    if !has_positive {
        // Only negative roots project: conjugate, construct, map back.
        let conj: Vec<LieElement> = h_basis.iter().map(|x| x.reversed()).collect();
        let mut cert = cone_construct(&conj, prec)?;
        cert.dominant = cert.dominant.reversed(d);
        let ex: Vec<Rational> = cert
            .v0
            .exact()
            .expect("v0 is always exact")
            .iter()
            .rev()
            .cloned()
            .collect();
        cert.v0 = TracelessDiag::from_rationals(prec, &ex);
        cert.conjugated = true;
        return Ok(cert);
    }

    let dominant = *order
        .iter()
        .find(|&&r| r.is_positive() && active(r))
        .expect("positive active root exists");

    // Choose X: maximize |X_{i₀j₀}| after Frobenius normalization; ties by
    // basis order.
    let pw = prec + GUARD_BITS;
    let mut chosen_index = usize::MAX;
    let mut best = BigReal::with_val(pw, -1);
    for (idx, x) in h_basis.iter().enumerate() {
        let c = x.component(dominant);
        if c.is_zero() {
            continue;
        }
        let ratio = BigReal::with_val(pw, c.clone().abs() / x.frobenius_norm());
        if ratio > best {
            best = ratio;
            chosen_index = idx;
        }
    }
    if chosen_index == usize::MAX {
        return Err(FlowError::DiagonalSubalgebra);
    }
    let x = &h_basis[chosen_index];

    // v₀ = p_𝔞(diag(j₀, j₀−1, …, 3, 2, 0, …, 0)): entry i is j₀+1−i for
    // i ≤ j₀−1 and 0 from j₀ on (1-based).
    let j0 = dominant.j;
    let w: Vec<Rational> = (1..=d)
        .map(|i| {
            if i <= j0 - 1 {
                Rational::from((j0 + 1 - i) as u64)
            } else {
                Rational::new()
            }
        })
        .collect();
    let v0 = TracelessDiag::from_rationals(prec, &w);

    // Exact margin: λ₀ minus the rate of every other active component. The
    // projection shift cancels in differences, so rates are computed from w.
    let lam = |r: RootIndex| Rational::from(&w[r.i - 1] - &w[r.j - 1]);
    let lam0 = lam(dominant);
    let mut margin: Option<Rational> = None;
    let mut fold = |gap: Rational| {
        margin = Some(match margin.take() {
            Some(m) if m <= gap => m,
            _ => gap,
        });
    };
    for &r in &order {
        if r != dominant && !x.component(r).is_zero() {
            fold(Rational::from(&lam0 - lam(r)));
        }
    }
    let diag_active = (0..d).any(|i| !x.matrix().get(i, i).is_zero());
    if diag_active {
        fold(lam0.clone());
    }
    if let Some(m) = &margin {
        assert!(
            *m >= 1u32,
            "margin {m} below 1 contradicts the construction"
        );
    }
    let margin = margin.unwrap_or_else(|| lam0.clone());

    // Measured decay of the non-dominant residue along the ray. Under
    // Ad_{exp(tv₀)} followed by the e^{−λ₀t} rescaling, the dominant
    // component is fixed identically, every other root component carries
    // e^{(λ_ij−λ₀)t}, and the diagonal part carries e^{−λ₀t}; the residual
    // is assembled from that split so the dominant term cancels exactly.
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for t in 1..=10u32 {
        let tq = Rational::from(t);
        let mut resid_sq = BigReal::with_val(pw, 0);
        for &r in &order {
            if r == dominant {
                continue;
            }
            let c = x.component(r);
            if c.is_zero() {
                continue;
            }
            let rate = Rational::from(&tq * &Rational::from(&lam(r) - &lam0));
            let factor = BigReal::with_val(pw, &rate).exp();
            let term = BigReal::with_val(pw, c * &factor);
            resid_sq += BigReal::with_val(pw, &term * &term);
        }
        if diag_active {
            let rate = -Rational::from(&tq * &lam0);
            let factor = BigReal::with_val(pw, &rate).exp();
            for i in 0..d {
                let term = BigReal::with_val(pw, x.matrix().get(i, i) * &factor);
                resid_sq += BigReal::with_val(pw, &term * &term);
            }
        }
        if resid_sq.is_zero() {
            // Nothing but the dominant component: instant convergence.
            return Ok(ConeCertificate {
                dominant,
                v0,
                margin,
                nilpotent_coefficient: x.component(dominant).clone(),
                chosen_index,
                measured_slope: BigReal::with_val(prec, f64::NEG_INFINITY),
                conjugated: false,
            });
        }
        ts.push(BigReal::with_val(pw, t));
        ys.push(resid_sq.sqrt().ln());
    }
    let n = BigReal::with_val(pw, ts.len() as u32);
    let mean = |v: &[BigReal]| -> BigReal {
        let mut acc = BigReal::with_val(pw, 0);
        for x in v {
            acc += x;
        }
        BigReal::with_val(pw, acc / &n)
    };
    let (tm, ym) = (mean(&ts), mean(&ys));
    let mut num = BigReal::with_val(pw, 0);
    let mut den = BigReal::with_val(pw, 0);
    for (t, y) in ts.iter().zip(&ys) {
        let dt = BigReal::with_val(pw, t - &tm);
        num += BigReal::with_val(pw, &dt * &BigReal::with_val(pw, y - &ym));
        den += BigReal::with_val(pw, &dt * &dt);
    }
    let slope = BigReal::with_val(prec, num / den);

    Ok(ConeCertificate {
        dominant,
        v0,
        margin,
        nilpotent_coefficient: x.component(dominant).clone(),
        chosen_index,
        measured_slope: slope,
        conjugated: false,
    })
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// One sample of a diagonal-flow trajectory.
#[derive(Clone, Debug)]
pub struct TrajectorySample {
    pub t: Rational,
    pub systole: BigReal,
    /// Reduced basis of the flowed lattice.
    pub basis: LatticeBasis,
    pub recurrence: bool,
}

/// Samples the flow exp(t·v)·x at `steps + 1` evenly spaced times in
/// [0, t_max] (a single sample when t_max = 0), recomputing every sample
/// from the original provenance — no accumulated drift. The recurrence flag
/// marks samples with systole ≥ ρ. Samples are computed in parallel and
/// concatenated deterministically.
pub fn trajectory(
    x: &LatticeBasis,
    v: &TracelessDiag,
    t_max: &Rational,
    steps: usize,
    rho: &Rational,
) -> Result<Vec<TrajectorySample>> {
    if v.dim() != x.dim() {
        return Err(FlowError::DimensionMismatch {
            expected: x.dim(),
            got: v.dim(),
        });
    }
    let times: Vec<Rational> = if t_max.cmp0() == Ordering::Equal {
        vec![Rational::new()]
    } else {
        (0..=steps)
            .map(|j| Rational::from(t_max * &Rational::from((j as u64, steps as u64))))
            .collect()
    };
    let rho_f = BigReal::with_val(x.precision(), rho);
    times
        .into_par_iter()
        .map(|t| -> Result<TrajectorySample> {
            let moved = apply_diag(&v.scaled(&t), x)?;
            let (reduced, _) = moved.reduce()?;
            let (systole, _) = reduced.shortest_vector()?;
            let recurrence = systole >= rho_f;
            Ok(TrajectorySample {
                t,
                systole,
                basis: reduced,
                recurrence,
            })
        })
        .collect()
}

/// Renders samples as CSV: t, systole, recurrence_flag, then the basis
/// entries in column-major order, all as decimal strings at the lattice
/// precision.
pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    let mut out = String::new();
    let d = samples.first().map(|s| s.basis.dim()).unwrap_or(0);
    out.push_str("t,systole,recurrence_flag");
    for j in 0..d {
        for i in 0..d {
            out.push_str(&format!(",b{}{}", i + 1, j + 1));
        }
    }
    out.push('\n');
    for s in samples {
        let prec = s.basis.precision();
        let t = BigReal::with_val(prec, &s.t);
        out.push_str(&t.to_string_radix(10, None));
        out.push(',');
        out.push_str(&s.systole.to_string_radix(10, None));
        out.push(',');
        out.push_str(if s.recurrence { "1" } else { "0" });
        for j in 0..d {
            for i in 0..d {
                out.push(',');
                out.push_str(&s.basis.columns().get(i, j).to_string_radix(10, None));
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Torus-orbit closures
// ---------------------------------------------------------------------------

/// Input to [`subspace_closure`]: the acting subspace W expressed in the
/// coordinates of the ambient lattice (so the lattice itself is Z^m), as a
/// certified rational approximation.
#[derive(Clone, Debug)]
pub struct ClosureInput {
    /// m×q matrix whose columns approximate a basis of W in lattice
    /// coordinates.
    pub w_coords: QMat,
    /// Certified entrywise error bound of the approximation (0 for exact
    /// input).
    pub err: Rational,
    /// Decision threshold τ: a candidate functional is accepted as a true
    /// kernel vector only when its uncertainty width ‖k‖₁·err stays ≤ τ;
    /// a candidate consistent with zero but wider than τ aborts with
    /// [`FlowError::UncertifiedInput`].
    pub decision_threshold: Rational,
    /// Optional root labels of the m coordinates, enabling the χ-kernel
    /// report.
    pub coordinate_roots: Option<Vec<RootIndex>>,
}

/// Closure data on the torus R^m / Z^m.
#[derive(Clone, Debug)]
pub struct ClosureResult {
    /// Dimension of the closure of W + Z^m: m − (number of certificates).
    pub dim: usize,
    /// Saturated basis of the integer functionals vanishing on W.
    pub certificates: Vec<Vec<Integer>>,
    /// Coordinates (by their root labels) whose characters contain the
    /// closure in their kernel.
    pub kernel_roots: Vec<RootIndex>,
}

/// Computes the closure of the subspace orbit on the torus R^m / Z^m by
/// finding all integer functionals vanishing on W — exact rational kernel
/// arithmetic when the input is exact, certified lattice-reduction search
/// otherwise.
pub fn subspace_closure(input: &ClosureInput) -> Result<ClosureResult> {
    let y = &input.w_coords;
    let m = y.nrows();
    let q = y.ncols();
    if m == 0 || q == 0 {
        return Err(FlowError::DimensionMismatch { expected: 1, got: 0 });
    }
    if let Some(labels) = &input.coordinate_roots {
        if labels.len() != m {
            return Err(FlowError::DimensionMismatch {
                expected: m,
                got: labels.len(),
            });
        }
    }

    let raw: Vec<Vec<Integer>> = if input.err.cmp0() == Ordering::Equal {
        // Exact path: integer kernel of Yᵀ after clearing denominators.
        let mut den = Integer::from(1);
        for i in 0..m {
            for j in 0..q {
                den = den.lcm(y.get(i, j).denom());
            }
        }
        let yt = IMat::from_fn(q, m, |j, i| {
            let v = Rational::from(y.get(i, j) * &den);
            debug_assert!(v.is_integer());
            v.numer().clone()
        });
        yt.kernel()
    } else {
        // Certified path: lattice reduction on scaled approximations.
        let c_scale = {
            // C ≈ sqrt(1/err): keeps C·err (the scaled uncertainty) small
            // while making genuine non-relations visibly nonzero.
            let inv = Rational::from(input.err.clone().recip());
            let mut c = Integer::from(1);
            while Rational::from(&c * &c) < inv {
                c *= 2;
            }
            c
        };
        let rows: Vec<Vec<Integer>> = (0..m)
            .map(|i| {
                let mut row = Vec::with_capacity(q + m);
                for j in 0..q {
                    row.push(round_rational(&Rational::from(y.get(i, j) * &c_scale)));
                }
                for k in 0..m {
                    row.push(Integer::from(i64::from(k == i)));
                }
                row
            })
            .collect();
        let reduced = lll_integer_rows(rows, &Rational::from((99, 100)));
        let mut accepted = Vec::new();
        for row in &reduced {
            let k = &row[q..];
            if k.iter().all(|x| x.cmp0() == Ordering::Equal) {
                continue;
            }
            let mut norm1 = Rational::new();
            for x in k {
                norm1 += Rational::from(x.clone().abs());
            }
            let width = Rational::from(&norm1 * &input.err);
            let mut consistent = true;
            for j in 0..q {
                let mut mid = Rational::new();
                for (i, ki) in k.iter().enumerate() {
                    mid += Rational::from(y.get(i, j) * ki);
                }
                let mid = Rational::from(mid.abs());
                if mid > width {
                    consistent = false;
                    break;
                }
            }
            if !consistent {
                continue;
            }
            if width > input.decision_threshold {
                return Err(FlowError::UncertifiedInput(format!(
                    "candidate {:?} has width {} above threshold {}",
                    k, width, input.decision_threshold
                )));
            }
            accepted.push(k.to_vec());
        }
        accepted
    };

    // Saturate: the certificate group is Z^m ∩ Q-span(raw), computed as the
    // kernel of the kernel.
    let certificates: Vec<Vec<Integer>> = if raw.is_empty() {
        Vec::new()
    } else {
        let a = IMat::from_rows(raw);
        let null = a.kernel();
        if null.is_empty() {
            // Full span: every coordinate functional vanishes on W.
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| Integer::from(i64::from(i == j)))
                        .collect()
                })
                .collect()
        } else {
            IMat::from_rows(null).kernel()
        }
    };

    // Re-verify saturated certificates against the certified input (they lie
    // in the Q-span of accepted relations, so consistency is automatic; the
    // width condition is rechecked to keep the certificate honest).
    if input.err.cmp0() != Ordering::Equal {
        for k in &certificates {
            let mut norm1 = Rational::new();
            for x in k {
                norm1 += Rational::from(x.clone().abs());
            }
            let width = Rational::from(&norm1 * &input.err);
            if width > input.decision_threshold {
                return Err(FlowError::UncertifiedInput(format!(
                    "saturated certificate {k:?} has width {width} above threshold"
                )));
            }
        }
    }

    // χ-kernel report: coordinate functionals lying in the certificate span.
    let mut kernel_roots = Vec::new();
    if let Some(labels) = &input.coordinate_roots {
        if !certificates.is_empty() {
            let span = QMat::from_rows(
                certificates
                    .iter()
                    .map(|k| k.iter().map(Rational::from).collect())
                    .collect(),
            );
            let base_rank = span.rank();
            for (i, label) in labels.iter().enumerate() {
                let mut rows: Vec<Vec<Rational>> = certificates
                    .iter()
                    .map(|k| k.iter().map(Rational::from).collect())
                    .collect();
                rows.push(
                    (0..m)
                        .map(|j| Rational::from(u32::from(i == j)))
                        .collect(),
                );
                if QMat::from_rows(rows).rank() == base_rank {
                    kernel_roots.push(*label);
                }
            }
        }
    }

    Ok(ClosureResult {
        dim: m - certificates.len(),
        certificates,
        kernel_roots,
    })
}

// ---------------------------------------------------------------------------
// Parabolic shape test
// ---------------------------------------------------------------------------

/// Whether g lies in the weak-unstable (`positive = true`) or weak-stable
/// parabolic of block position k: the lower-left (resp. upper-right)
/// (d−k)×k (resp. k×(d−k)) off-block vanishes within 2^(−P/2).
pub fn parabolic_check(g: &RMat, k: usize, positive: bool) -> Result<bool> {
    let d = g.nrows();
    if d != g.ncols() {
        return Err(FlowError::DimensionMismatch {
            expected: d,
            got: g.ncols(),
        });
    }
    if k == 0 || k >= d {
        return Err(FlowError::BadIndex { k, max: d - 1 });
    }
    let tol = half_ulp_tolerance(g.prec());
    let ok = if positive {
        (k..d).all(|i| (0..k).all(|j| g.get(i, j).clone().abs() <= tol))
    } else {
        (0..k).all(|i| (k..d).all(|j| g.get(i, j).clone().abs() <= tol))
    };
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::IntPoly;
    use crate::numberfield::{KLattice, NumberField};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn a_k_flow_exponents_and_additivity() {
        let v = a_k_flow(1, &q(1, 1), 3, 128).unwrap();
        assert_eq!(v.exact().unwrap(), &[q(2, 1), q(-1, 1), q(-1, 1)]);
        let v2 = a_k_flow(2, &q(1, 1), 3, 128).unwrap();
        assert_eq!(v2.exact().unwrap(), &[q(1, 1), q(1, 1), q(-2, 1)]);
        let zero = a_k_flow(2, &q(0, 1), 3, 128).unwrap();
        assert!(zero.exact().unwrap().iter().all(|x| x.cmp0() == Ordering::Equal));
        // Exact additivity in log coordinates.
        let s = a_k_flow(1, &q(3, 7), 3, 128).unwrap();
        let t = a_k_flow(1, &q(2, 5), 3, 128).unwrap();
        let sum = s.add(&t).unwrap();
        let direct = a_k_flow(1, &Rational::from(q(3, 7) + q(2, 5)), 3, 128).unwrap();
        assert_eq!(sum.exact().unwrap(), direct.exact().unwrap());
        // Exact tracelessness.
        let mut acc = Rational::new();
        for x in sum.exact().unwrap() {
            acc += x;
        }
        assert_eq!(acc.cmp0(), Ordering::Equal);
        // Bad index.
        assert!(matches!(
            a_k_flow(0, &q(1, 1), 3, 128),
            Err(FlowError::BadIndex { .. })
        ));
        assert!(matches!(
            a_k_flow(3, &q(1, 1), 3, 128),
            Err(FlowError::BadIndex { .. })
        ));
    }

    #[test]
    fn diag_flow_contracts_the_standard_lattice() {
        let x = LatticeBasis::standard(3, 160).unwrap();
        let v = TracelessDiag::from_rationals(160, &[q(1, 1), q(0, 1), q(-1, 1)]);
        let moved = apply_diag(&v.scaled(&q(5, 1)), &x).unwrap();
        let (sys, _) = moved.shortest_vector().unwrap();
        let expect = BigReal::with_val(160, -5).exp();
        let rel = BigReal::with_val(160, sys / expect) - 1u32;
        assert!(rel.abs() < BigReal::with_val(64, 1e-40));
        // Zero direction: unchanged systole.
        let zero = TracelessDiag::zero(160, 3);
        let same = apply_diag(&zero, &x).unwrap();
        let (sys0, _) = same.shortest_vector().unwrap();
        assert!(BigReal::with_val(160, sys0 - 1u32).abs() < BigReal::with_val(64, 1e-40));
    }

    #[test]
    fn root_order_matches_the_stated_rule() {
        let order = root_order(3);
        let expect = [(1, 3), (1, 2), (2, 3), (2, 1), (3, 2), (3, 1)];
        let got: Vec<(usize, usize)> = order.iter().map(|r| (r.i, r.j)).collect();
        assert_eq!(got, expect);
        assert_eq!(
            root_order(2).iter().map(|r| (r.i, r.j)).collect::<Vec<_>>(),
            [(1, 2), (2, 1)]
        );
        assert!(RootIndex::new(2, 3, 3).unwrap().is_positive());
        assert!(!RootIndex::new(3, 1, 3).unwrap().is_positive());
        assert!(RootIndex::new(2, 2, 3).is_err());
    }

    #[test]
    fn chi_is_the_entry_ratio() {
        let diag = [
            BigReal::with_val(128, 2),
            BigReal::with_val(128, 0.5),
            BigReal::with_val(128, 1),
        ];
        let val = chi(RootIndex::new(1, 2, 3).unwrap(), &diag);
        assert!(BigReal::with_val(128, val - 4u32).abs() < BigReal::with_val(64, 1e-30));
    }

    #[test]
    fn torus_param_determinant_and_tilde() {
        let prec = 160;
        // (r,s) = (0,1), ω = e^{iπ/4}: tilde = (ω, ω̄).
        let angle = BigReal::with_val(prec, rug::float::Constant::Pi) / BigReal::with_val(prec, 4);
        let omega = BigComplex::with_val(
            prec,
            (angle.clone().cos(), angle.clone().sin()),
        );
        let t = TorusParam::new(vec![], vec![omega.clone()], prec).unwrap();
        let tilde = t.tilde();
        assert_eq!(tilde.len(), 2);
        let conj_err = BigComplex::with_val(prec, &tilde[1] - omega.clone().conj()).abs();
        assert!(conj_err.real() < &BigReal::with_val(64, 1e-40));
        // Zero-angle parameters: tilde is the real diagonal again.
        let a = BigReal::with_val(prec, 2);
        let w = BigComplex::with_val(prec, (BigReal::with_val(prec, 0.5f64).sqrt(), BigReal::with_val(prec, 0)));
        let t2 = TorusParam::new(vec![a], vec![w], prec).unwrap();
        for entry in t2.tilde() {
            assert!(entry.imag().is_zero());
        }
        // Determinant violation.
        assert!(matches!(
            TorusParam::new(vec![BigReal::with_val(prec, 2)], vec![], prec),
            Err(FlowError::DeterminantViolation(_))
        ));
        // Composition preserves the constraint.
        let half = BigReal::with_val(prec, 0.5f64).sqrt();
        let wa = BigComplex::with_val(prec, (BigReal::with_val(prec, 0), half.clone()));
        let ta = TorusParam::new(vec![BigReal::with_val(prec, 2)], vec![wa], prec).unwrap();
        let composed = ta.compose(&ta).unwrap();
        assert_eq!(composed.signature(), (1, 1));
    }

    #[test]
    fn ad_formula_matches_matrix_conjugation() {
        let prec = 192;
        let pw = prec + GUARD_BITS;
        let v = TracelessDiag::from_rationals(prec, &[q(1, 2), q(-1, 3), q(2, 1)]);
        let x = LieElement::from_rational_rows(
            prec,
            &[
                vec![q(1, 1), q(2, 1), q(-1, 2)],
                vec![q(0, 1), q(-3, 1), q(5, 1)],
                vec![q(7, 3), q(1, 1), q(2, 1)],
            ],
        )
        .unwrap();
        let by_formula = ad_exp(&v, &x).unwrap();
        // Matrix path: E X E^{-1} with E = diag(e^{v_i}).
        let mut e = RMat::identity(pw, 3);
        let mut einv = RMat::identity(pw, 3);
        for i in 0..3 {
            let f = BigReal::with_val(pw, &v.entries()[i]).exp();
            e.set(i, i, f.clone());
            einv.set(i, i, BigReal::with_val(pw, f.recip()));
        }
        let conj = e.mul(x.matrix()).mul(&einv);
        for i in 0..3 {
            for j in 0..3 {
                let off =
                    BigReal::with_val(pw, conj.get(i, j) - by_formula.matrix().get(i, j)).abs();
                assert!(off < half_ulp_tolerance(prec), "({i},{j}): {off}");
            }
        }
    }

    #[test]
    fn cone_construction_on_the_reference_nilpotents() {
        let prec = 192;
        // X = E₁₂ + E₁₃.
        let x = LieElement::from_rational_rows(
            prec,
            &[
                vec![q(0, 1), q(1, 1), q(1, 1)],
                vec![q(0, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(0, 1)],
            ],
        )
        .unwrap();
        let cert = cone_construct(std::slice::from_ref(&x), prec).unwrap();
        assert_eq!((cert.dominant.i, cert.dominant.j), (1, 3));
        assert_eq!(
            cert.v0.exact().unwrap(),
            &[q(4, 3), q(1, 3), q(-5, 3)]
        );
        // λ₁₃(v₀) = 3 ≥ λ₁₂(v₀) + 1 = 2 exactly; margin is the exact gap 2.
        assert_eq!(cert.v0.lambda_exact(cert.dominant).unwrap(), q(3, 1));
        assert_eq!(cert.margin, q(2, 1));
        assert!(!cert.conjugated);
        // Decay is e^{−2t}: measured slope −2 within 0.1.
        let slope_err = BigReal::with_val(prec, cert.measured_slope.clone() + 2u32).abs();
        assert!(slope_err < BigReal::with_val(64, 0.1f64), "slope {}", cert.measured_slope);

        // X = H + E₂₃ with diagonal H: dominant (2, 3), decay e^{−2t}‖H‖.
        let x2 = LieElement::from_rational_rows(
            prec,
            &[
                vec![q(1, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(-2, 1), q(1, 1)],
                vec![q(0, 1), q(0, 1), q(1, 1)],
            ],
        )
        .unwrap();
        let cert2 = cone_construct(std::slice::from_ref(&x2), prec).unwrap();
        assert_eq!((cert2.dominant.i, cert2.dominant.j), (2, 3));
        assert_eq!(cert2.v0.lambda_exact(cert2.dominant).unwrap(), q(2, 1));
        assert_eq!(cert2.margin, q(2, 1));
        let slope_err2 = BigReal::with_val(prec, cert2.measured_slope.clone() + 2u32).abs();
        assert!(slope_err2 < BigReal::with_val(64, 0.1f64));

        // Diagonal-only span: rejected.
        let h = LieElement::from_rational_rows(
            prec,
            &[
                vec![q(1, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(1, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(-2, 1)],
            ],
        )
        .unwrap();
        assert!(matches!(
            cone_construct(std::slice::from_ref(&h), prec),
            Err(FlowError::DiagonalSubalgebra)
        ));

        // Only a negative root: Weyl fallback.
        let xneg = LieElement::from_rational_rows(
            prec,
            &[
                vec![q(0, 1), q(0, 1), q(0, 1)],
                vec![q(1, 1), q(0, 1), q(0, 1)],
                vec![q(0, 1), q(0, 1), q(0, 1)],
            ],
        )
        .unwrap();
        let certn = cone_construct(std::slice::from_ref(&xneg), prec).unwrap();
        assert!(certn.conjugated);
        assert_eq!((certn.dominant.i, certn.dominant.j), (2, 1));
        // The mapped-back direction still contracts the root: λ₂₁(v₀) > 0.
        assert!(certn.v0.lambda_exact(certn.dominant).unwrap() > 0u32);
    }

    #[test]
    fn trajectory_samples_are_provenance_exact() {
        let x = LatticeBasis::standard(3, 160).unwrap();
        let v = TracelessDiag::from_rationals(160, &[q(1, 1), q(0, 1), q(-1, 1)]);
        let samples = trajectory(&x, &v, &q(5, 1), 5, &q(1, 10)).unwrap();
        assert_eq!(samples.len(), 6);
        let last = samples.last().unwrap();
        assert_eq!(last.t, q(5, 1));
        let expect = BigReal::with_val(160, -5).exp();
        let rel = BigReal::with_val(160, &last.systole / &expect) - 1u32;
        assert!(rel.abs() < BigReal::with_val(64, 1e-40));
        assert!(!last.recurrence);
        assert!(samples[0].recurrence); // systole 1 at t = 0
        // Single sample at t_max = 0.
        let single = trajectory(&x, &v, &q(0, 1), 7, &q(1, 10)).unwrap();
        assert_eq!(single.len(), 1);
        // CSV shape: header + rows, 3 + 9 columns.
        let csv = trajectory_csv(&samples);
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(header.split(',').count(), 12);
        assert_eq!(lines.count(), 6);
    }

    #[test]
    fn closure_exact_and_irrational_slopes() {
        // W = span{(1,1)} in Z²: dimension 1, certificate ±(1,−1).
        let input = ClosureInput {
            w_coords: QMat::from_rows(vec![vec![q(1, 1)], vec![q(1, 1)]]),
            err: Rational::new(),
            decision_threshold: q(1, 1000),
            coordinate_roots: Some(vec![
                RootIndex::new(1, 2, 2).unwrap(),
                RootIndex::new(2, 1, 2).unwrap(),
            ]),
        };
        let res = subspace_closure(&input).unwrap();
        assert_eq!(res.dim, 1);
        assert_eq!(res.certificates.len(), 1);
        let k = &res.certificates[0];
        assert_eq!(Integer::from(&k[0] + &k[1]), Integer::from(0));
        assert_eq!(k[0].clone().abs(), Integer::from(1));
        // Neither coordinate functional vanishes on the closure.
        assert!(res.kernel_roots.is_empty());

        // W = span{(1,√2)}: dense, dimension 2, no certificate. The
        // approximation error 2^(−120) certifies there is no relation of
        // moderate height.
        let sqrt2 = BigReal::with_val(200, 2).sqrt();
        let approx = sqrt2.to_rational().unwrap();
        let input2 = ClosureInput {
            w_coords: QMat::from_rows(vec![vec![q(1, 1)], vec![approx]]),
            err: Rational::from((Integer::from(1), Integer::from(1) << 120)),
            decision_threshold: q(1, 1_000_000),
            coordinate_roots: None,
        };
        let res2 = subspace_closure(&input2).unwrap();
        assert_eq!(res2.dim, 2);
        assert!(res2.certificates.is_empty());

        // W = span{(1,1,0)} in Z³: two certificates; the third coordinate
        // functional contains the closure in its kernel.
        let input3 = ClosureInput {
            w_coords: QMat::from_rows(vec![vec![q(1, 1)], vec![q(1, 1)], vec![q(0, 1)]]),
            err: Rational::new(),
            decision_threshold: q(1, 1000),
            coordinate_roots: Some(vec![
                RootIndex::new(1, 2, 3).unwrap(),
                RootIndex::new(1, 3, 3).unwrap(),
                RootIndex::new(2, 3, 3).unwrap(),
            ]),
        };
        let res3 = subspace_closure(&input3).unwrap();
        assert_eq!(res3.dim, 1);
        assert_eq!(res3.certificates.len(), 2);
        assert_eq!(res3.kernel_roots, vec![RootIndex::new(2, 3, 3).unwrap()]);
    }

    #[test]
    fn closure_of_unit_log_direction_is_the_full_circle() {
        // Unit log lattice of Q(∛2) has rank 1; in lattice coordinates the
        // split direction is an irrational multiple of the generator, so the
        // closure is everything and no character vanishes.
        let k = NumberField::new(IntPoly::from_descending_i64(&[1, 0, 0, -2])).unwrap();
        let units =
            crate::numberfield::unit_search(&k, &KLattice::power_order(&k), 5, 200).unwrap();
        assert_eq!(units.rank, 1);
        // Coordinate of the split direction (1, −1)/normalization against the
        // generator's log vector, in the 1-dimensional log space: the ratio
        // (split · gen)/(gen · gen) is irrational.
        let g = &units.log_matrix[0];
        let split = [BigReal::with_val(200, 1), BigReal::with_val(200, -1)];
        let mut dot = BigReal::with_val(200, 0);
        let mut gg = BigReal::with_val(200, 0);
        for (a, b) in split.iter().zip(g.iter()) {
            dot += BigReal::with_val(200, a * b);
        }
        for b in g.iter() {
            gg += BigReal::with_val(200, b * b);
        }
        let ratio = BigReal::with_val(200, dot / gg);
        let input = ClosureInput {
            w_coords: QMat::from_rows(vec![vec![ratio.to_rational().unwrap()]]),
            err: Rational::from((Integer::from(1), Integer::from(1) << 150)),
            decision_threshold: q(1, 1_000_000),
            coordinate_roots: None,
        };
        let res = subspace_closure(&input).unwrap();
        assert_eq!(res.dim, 1);
        assert!(res.certificates.is_empty());
    }

    #[test]
    fn parabolic_membership() {
        let prec = 128;
        let id = RMat::identity(prec, 3);
        for k in 1..3 {
            assert!(parabolic_check(&id, k, true).unwrap());
            assert!(parabolic_check(&id, k, false).unwrap());
        }
        // Row shear (upper off-block occupied): weak-unstable for k = 1.
        let mut g = RMat::identity(prec, 3);
        g.set(0, 1, BigReal::with_val(prec, 3));
        g.set(0, 2, BigReal::with_val(prec, -2));
        assert!(parabolic_check(&g, 1, true).unwrap());
        assert!(!parabolic_check(&g, 1, false).unwrap());
        // Column shear: weak-stable for k = 1.
        let mut h = RMat::identity(prec, 3);
        h.set(1, 0, BigReal::with_val(prec, 3));
        h.set(2, 0, BigReal::with_val(prec, -2));
        assert!(parabolic_check(&h, 1, false).unwrap());
        assert!(!parabolic_check(&h, 1, true).unwrap());
    }

    #[test]
    fn lie_element_split_reconstructs() {
        let prec = 128;
        // Constructor subtracts the trace.
        let m = RMat::from_fn(prec, 3, 3, |i, j| BigReal::with_val(prec, (i + 2 * j) as u32));
        let x = LieElement::new(m).unwrap();
        let mut tr = BigReal::with_val(prec, 0);
        for i in 0..3 {
            tr += x.matrix().get(i, i);
        }
        assert!(tr.abs() < half_ulp_tolerance(prec));
        // diag part + root components reconstruct the matrix exactly.
        let diag = x.diag_part();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j {
                    // diag_part re-centers, but the matrix is already
                    // traceless, so entries agree.
                    diag.entries()[i].clone()
                } else {
                    x.component(RootIndex::new(i + 1, j + 1, 3).unwrap()).clone()
                };
                let off = BigReal::with_val(prec, x.matrix().get(i, j) - expect).abs();
                assert!(off < half_ulp_tolerance(prec));
            }
        }
    }
}
