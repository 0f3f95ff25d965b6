//! Number fields, their geometric embeddings, orders, and unit groups.
//!
//! A field is presented by an integer polynomial that must be squarefree and
//! free of rational roots (both checked exactly); genuine irreducibility
//! beyond the rational-root test is a documented precondition, not verified.
//! Elements are rational coordinate vectors on the power basis of a fixed
//! root θ. The embedding order is frozen once and for all: real roots
//! ascending, then complex roots (imaginary part > 0) ordered by (Re, Im);
//! the geometric embedding maps x to its real-embedding values followed by
//! (Re, Im) pairs of its complex-embedding values, so the image of a full
//! module is a lattice with |det Φ| = 2^(−s)·√|disc|.
//!
//! The unit search enumerates a coordinate box exactly — float prefilter,
//! then exact norm-(±1) and module-stabilizer checks — and reduces the finds
//! by log-vector rank. It certifies a finite-index subgroup of the positive
//! units, never fundamentality.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    count_real_roots, half_ulp_tolerance, isolate_real_roots, nf_inv, nf_mul, nf_norm, nf_trace,
    poly_roots, signature, AlgebraicReal, ArithError, BigReal, IntPoly, Integer, QPoly, Rational,
    Scalar,
};
use crate::lattice::{embedding_rows, Generators, LatticeBasis, LatticeError, Provenance};
use crate::linalg::{QMat, RMat};

const GUARD_BITS: u32 = 64;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("defining polynomial must have degree at least 2 (got {0})")]
    DegreeTooSmall(usize),
    #[error("elements are not a Q-basis of the field")]
    DependentBasis,
    #[error("coordinate vector has length {got}, field degree is {expected}")]
    CoordinateLength { expected: usize, got: usize },
    #[error("unparseable rational coordinate {0:?}")]
    BadCoordinate(String),
    #[error("division by zero field element")]
    DivisionByZero,
    #[error("embedding index {0} is not a real embedding")]
    NotARealEmbedding(usize),
    #[error("factor matrix violates the parabolic shape: {0}")]
    ShapeViolation(String),
    #[error("even-degree factorization with negative determinant has no real scalar root")]
    NegativeDeterminant,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

type Result<T> = std::result::Result<T, FieldError>;

// ---------------------------------------------------------------------------
// Field and elements
// ---------------------------------------------------------------------------

/// A number field Q(θ) with frozen embedding order.
#[derive(Clone, Debug)]
pub struct NumberField {
    minpoly: IntPoly,
    degree: usize,
    r: usize,
    s: usize,
}

/// A field element as rational coordinates on the power basis 1, θ, …, θ^{d−1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldElement {
    pub coords: Vec<Rational>,
}

impl FieldElement {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.cmp0() == Ordering::Equal)
    }

    pub fn is_rational(&self) -> Option<&Rational> {
        if self.coords[1..].iter().all(|c| c.cmp0() == Ordering::Equal) {
            Some(&self.coords[0])
        } else {
            None
        }
    }
}

/// A full-rank Z-module in the field, given by d independent elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLattice {
    basis: Vec<FieldElement>,
}

impl KLattice {
    /// Checks Q-linear independence exactly.
    pub fn new(field: &NumberField, basis: Vec<FieldElement>) -> Result<Self> {
        let d = field.degree();
        if basis.len() != d || basis.iter().any(|e| e.coords.len() != d) {
            return Err(FieldError::DependentBasis);
        }
        let m = QMat::from_fn(d, d, |i, j| basis[j].coords[i].clone());
        if m.rank() != d {
            return Err(FieldError::DependentBasis);
        }
        Ok(KLattice { basis })
    }

    /// The ring Z[θ] on the power basis.
    pub fn power_order(field: &NumberField) -> KLattice {
        KLattice {
            basis: field.power_basis(),
        }
    }

    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    /// Column matrix of the basis coordinates (power basis rows).
    fn coord_matrix(&self) -> QMat {
        let d = self.basis.len();
        QMat::from_fn(d, d, |i, j| self.basis[j].coords[i].clone())
    }
}

/// Field-and-module description as exchanged in JSON:
/// `{ "minpoly": [ints, ascending], "basis": [[rationals as strings]] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldSpec {
    /// Ascending integer coefficients of the defining polynomial.
    pub minpoly: Vec<i64>,
    /// Basis elements as power-basis coordinates, each a rational in string
    /// form ("3", "-1/2", …).
    pub basis: Vec<Vec<String>>,
}

impl FieldSpec {
    pub fn build(&self) -> Result<(NumberField, KLattice)> {
        let poly = IntPoly::new(self.minpoly.iter().map(|&c| Integer::from(c)).collect());
        let field = NumberField::new(poly)?;
        let mut basis = Vec::with_capacity(self.basis.len());
        for coords in &self.basis {
            let mut parsed = Vec::with_capacity(coords.len());
            for c in coords {
                let q: Rational = c
                    .trim()
                    .parse()
                    .map_err(|_| FieldError::BadCoordinate(c.clone()))?;
                parsed.push(q);
            }
            basis.push(field.element(parsed)?);
        }
        let kl = KLattice::new(&field, basis)?;
        Ok((field, kl))
    }
}

impl NumberField {
    /// Builds the field, checking exactly that the polynomial is squarefree
    /// and has no rational roots. Irreducibility beyond that is assumed.
    pub fn new(minpoly: IntPoly) -> Result<Self> {
        let p = minpoly.primitive_part();
        let degree = p.degree().ok_or(FieldError::DegreeTooSmall(0))?;
        if degree < 2 {
            return Err(FieldError::DegreeTooSmall(degree));
        }
        // Squarefree + rational-root exclusion, both exact.
        let intervals = isolate_real_roots(&p)?;
        crate::arith::exclude_rational_roots(&p, &intervals)?;
        let (r, s) = signature(&p)?;
        Ok(NumberField { minpoly: p, degree, r, s })
    }

    pub fn minpoly(&self) -> &IntPoly {
        &self.minpoly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// (r, s): number of real embeddings and of complex-conjugate pairs.
    pub fn signature(&self) -> (usize, usize) {
        (self.r, self.s)
    }

    /// Dirichlet bound r + s − 1 on the unit rank.
    pub fn unit_rank_bound(&self) -> usize {
        self.r + self.s - 1
    }

    pub fn element(&self, coords: Vec<Rational>) -> Result<FieldElement> {
        if coords.len() != self.degree {
            return Err(FieldError::CoordinateLength {
                expected: self.degree,
                got: coords.len(),
            });
        }
        Ok(FieldElement { coords })
    }

    pub fn element_from_i64(&self, coords: &[i64]) -> Result<FieldElement> {
        self.element(coords.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            coords: vec![Rational::new(); self.degree],
        }
    }

    pub fn one(&self) -> FieldElement {
        let mut e = self.zero();
        e.coords[0] = Rational::from(1);
        e
    }

    /// The distinguished root θ.
    pub fn theta(&self) -> FieldElement {
        let mut e = self.zero();
        e.coords[1] = Rational::from(1);
        e
    }

    /// The j-th power-basis element θ^j.
    pub fn power_basis_element(&self, j: usize) -> FieldElement {
        let mut e = self.zero();
        e.coords[j] = Rational::from(1);
        e
    }

    pub fn power_basis(&self) -> Vec<FieldElement> {
        (0..self.degree).map(|j| self.power_basis_element(j)).collect()
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| Rational::from(x + y))
                .collect(),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(x, y)| Rational::from(x - y))
                .collect(),
        }
    }

    pub fn scale(&self, a: &FieldElement, f: &Rational) -> FieldElement {
        FieldElement {
            coords: a.coords.iter().map(|x| Rational::from(x * f)).collect(),
        }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        FieldElement {
            coords: nf_mul(&self.minpoly, &a.coords, &b.coords),
        }
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        nf_inv(&self.minpoly, &a.coords)
            .map(|coords| FieldElement { coords })
            .map_err(|_| FieldError::DivisionByZero)
    }

    pub fn norm(&self, a: &FieldElement) -> Rational {
        nf_norm(&self.minpoly, &a.coords)
    }

    pub fn trace(&self, a: &FieldElement) -> Rational {
        nf_trace(&self.minpoly, &a.coords)
    }

    /// Matrix of multiplication by x on the power basis (column j holds the
    /// coordinates of x·θ^j).
    pub fn mult_matrix(&self, x: &FieldElement) -> QMat {
        let d = self.degree;
        let mut m = QMat::zeros(d, d);
        for j in 0..d {
            let prod = self.mul(x, &self.power_basis_element(j));
            for i in 0..d {
                m.set(i, j, prod.coords[i].clone());
            }
        }
        m
    }

    /// Minimal polynomial of an element: the squarefree part of the
    /// characteristic polynomial of its multiplication matrix
    /// (Faddeev–LeVerrier), primitive over Z. Irreducible whenever the field
    /// polynomial is.
    pub fn element_minpoly(&self, x: &FieldElement) -> IntPoly {
        let d = self.degree;
        let m = self.mult_matrix(x);
        // Faddeev–LeVerrier: charpoly t^d + c_{d−1} t^{d−1} + … + c_0.
        let mut coeffs = vec![Rational::new(); d + 1];
        coeffs[d] = Rational::from(1);
        let mut a = m.clone();
        for k in 1..=d {
            let mut tr = Rational::new();
            for i in 0..d {
                tr += a.get(i, i).clone();
            }
            let c = -tr / Rational::from(k as u64);
            coeffs[d - k] = c.clone();
            if k < d {
                // A ← M·(A + c·I)
                let mut shifted = a.clone();
                for i in 0..d {
                    let v = shifted.get(i, i).clone() + &c;
                    shifted.set(i, i, v);
                }
                a = m.mul(&shifted);
            }
        }
        let char_q = QPoly::new(coeffs);
        let deriv = char_q.derivative();
        let g = char_q.gcd(&deriv);
        let (sqfree, rem) = char_q.divrem(&g);
        debug_assert!(rem.degree().is_none(), "gcd must divide the charpoly");
        sqfree.to_primitive_int()
    }

    /// Exact real-embedding value σ_i(x) as a [`Scalar`]: a rational for
    /// rational x, otherwise an algebraic-real handle (element minimal
    /// polynomial plus an isolating interval selected by certified interval
    /// refinement of θ_i).
    pub fn embedded_scalar(&self, x: &FieldElement, real_index: usize) -> Result<Scalar> {
        if real_index >= self.r {
            return Err(FieldError::NotARealEmbedding(real_index));
        }
        if let Some(q) = x.is_rational() {
            return Ok(Scalar::Rational(q.clone()));
        }
        let mp = self.element_minpoly(x);
        if mp.degree() == Some(1) {
            let a0 = Rational::from(mp.coeff(0));
            let a1 = Rational::from(mp.coeff(1));
            return Ok(Scalar::Rational(-a0 / a1));
        }
        let intervals = isolate_real_roots(&mp)?;
        let theta = AlgebraicReal::nth_real_root(&self.minpoly, real_index)?;
        for bits in [64u32, 128, 256, 512, 1024, 4096, 16384] {
            let (lo, hi) = theta.refined(bits);
            let (vlo, vhi) = eval_interval_q(&x.coords, &lo, &hi);
            // Which isolating interval contains the whole enclosure?
            let mut hit = None;
            for (a, b) in &intervals {
                if &vlo > a && &vhi < b {
                    hit = Some((a.clone(), b.clone()));
                    break;
                }
            }
            if let Some((a, b)) = hit {
                let alg = AlgebraicReal::new(mp.clone(), a, b)?;
                return Ok(Scalar::Algebraic(alg));
            }
        }
        // σ_i(x) is a root of mp; the refinement above must eventually land
        // inside one isolating interval.
        unreachable!("interval refinement failed to separate embedding value")
    }

    /// Geometric embedding of one element at precision `prec`:
    /// (σ_1(x), …, σ_r(x), Re σ_{r+1}(x), Im σ_{r+1}(x), …).
    pub fn geometric_embedding(&self, x: &FieldElement, prec: u32) -> Result<Vec<BigReal>> {
        let m = self.embedding_matrix(std::slice::from_ref(x), prec)?;
        Ok((0..self.degree).map(|i| m.get(i, 0).clone()).collect())
    }

    /// Geometric-embedding matrix of the given elements at precision `prec`:
    /// column j is the embedding of elements[j].
    pub fn embedding_matrix(&self, elements: &[FieldElement], prec: u32) -> Result<RMat> {
        let coords: Vec<Vec<Rational>> = elements.iter().map(|e| e.coords.clone()).collect();
        Ok(embedding_rows(&self.minpoly, &coords, prec)?)
    }

    /// Matrix of multiplication by x acting on embedding coordinates:
    /// block-diagonal with σ_i(x) scalars on the real part and
    /// [[Re, −Im], [Im, Re]] blocks of σ(x) on each complex pair. Satisfies
    /// ψ(x)·φ(y) = φ(x·y) within 2^(−P/2).
    pub fn psi_matrix(&self, x: &FieldElement, prec: u32) -> Result<RMat> {
        let pw = prec + GUARD_BITS;
        let roots = poly_roots(&self.minpoly, pw)?;
        let d = self.degree;
        let mut m = RMat::zeros(prec, d, d);
        for (i, root) in roots.real.iter().enumerate() {
            let mut acc = BigReal::with_val(pw, 0);
            for c in x.coords.iter().rev() {
                acc = BigReal::with_val(pw, acc * root) + BigReal::with_val(pw, c);
            }
            m.set(i, i, acc);
        }
        for (j, z) in roots.complex.iter().enumerate() {
            let mut acc = rug::Complex::with_val(pw, (0, 0));
            for c in x.coords.iter().rev() {
                acc = rug::Complex::with_val(pw, acc * z)
                    + rug::Complex::with_val(pw, BigReal::with_val(pw, c));
            }
            let (re, im) = acc.into_real_imag();
            let base = self.r + 2 * j;
            m.set(base, base, re.clone());
            m.set(base, base + 1, BigReal::with_val(pw, -&im));
            m.set(base + 1, base, im);
            m.set(base + 1, base + 1, re);
        }
        Ok(m)
    }

    /// The unit-covolume lattice x_Λ spanned by the embeddings of the module
    /// basis, with full exact provenance.
    pub fn lattice_from_basis(&self, kl: &KLattice, prec: u32) -> Result<LatticeBasis> {
        let coords: Vec<Vec<Rational>> = kl.basis().iter().map(|e| e.coords.clone()).collect();
        let prov = Provenance {
            generators: Generators::Embedding {
                minpoly: self.minpoly.clone(),
                elements: coords,
            },
            transform: crate::linalg::IMat::identity(self.degree),
            diag_log: vec![Rational::new(); self.degree],
            normalize: true,
        };
        Ok(LatticeBasis::from_provenance(prov, prec)?)
    }

    /// Discriminant of the defining polynomial:
    /// (−1)^{d(d−1)/2}·res(p, p′)/lc(p). For monic p this is the discriminant
    /// of the order Z[θ].
    pub fn poly_discriminant(&self) -> Rational {
        let d = self.degree;
        let p = QPoly::from_int(&self.minpoly);
        let dp = p.derivative();
        let res = crate::arith::resultant_q(&p, &dp);
        let sign = if (d * (d - 1) / 2) % 2 == 0 { 1 } else { -1 };
        Rational::from(sign) * res / p.leading().expect("degree checked at construction").clone()
    }
}

/// Horner evaluation of a rational-coefficient polynomial over a rational
/// interval; returns a rational enclosure of the image.
fn eval_interval_q(coeffs: &[Rational], lo: &Rational, hi: &Rational) -> (Rational, Rational) {
    let mut acc_lo = Rational::new();
    let mut acc_hi = Rational::new();
    for c in coeffs.iter().rev() {
        // [acc_lo, acc_hi] · [lo, hi] + c
        let products = [
            Rational::from(&acc_lo * lo),
            Rational::from(&acc_lo * hi),
            Rational::from(&acc_hi * lo),
            Rational::from(&acc_hi * hi),
        ];
        let mut new_lo = products[0].clone();
        let mut new_hi = products[0].clone();
        for p in &products[1..] {
            if *p < new_lo {
                new_lo = p.clone();
            }
            if *p > new_hi {
                new_hi = p.clone();
            }
        }
        acc_lo = new_lo + c;
        acc_hi = new_hi + c;
    }
    (acc_lo, acc_hi)
}

// ---------------------------------------------------------------------------
// Orders and module stabilizers
// ---------------------------------------------------------------------------

/// Exact membership of x in the associated order of the module: true iff
/// multiplication by x maps every basis element back into the Z-span of the
/// basis (decided over the rationals, no tolerance).
pub fn order_elements_check(field: &NumberField, kl: &KLattice, x: &FieldElement) -> Result<bool> {
    let e_inv = kl
        .coord_matrix()
        .inverse()
        .ok_or(FieldError::DependentBasis)?;
    Ok(kl
        .basis()
        .iter()
        .all(|e| coords_in_span(&e_inv, &field.mul(x, e))))
}

/// Whether the element's power-basis coordinates, rewritten on the module
/// basis via the precomputed inverse coordinate matrix, are all integers.
fn coords_in_span(e_inv: &QMat, x: &FieldElement) -> bool {
    let d = x.coords.len();
    (0..d).all(|i| {
        let mut acc = Rational::new();
        for (j, c) in x.coords.iter().enumerate() {
            acc += Rational::from(e_inv.get(i, j) * c);
        }
        acc.is_integer()
    })
}

// ---------------------------------------------------------------------------
// Unit search
// ---------------------------------------------------------------------------

/// Outcome of a bounded unit search.
#[derive(Clone, Debug)]
pub struct UnitGroupData {
    /// Multiplicatively independent units of the module's stabilizer order,
    /// positive in every real embedding (candidates are squared if needed).
    pub generators: Vec<FieldElement>,
    /// Row i holds (log|σ_1(u_i)|, …, log|σ_{r+s}(u_i)|): one entry per real
    /// embedding then one per complex pair.
    pub log_matrix: Vec<Vec<BigReal>>,
    pub rank: usize,
    pub height_bound: i64,
    /// Whether the Dirichlet bound r + s − 1 was reached. False is a valid
    /// "height bound too small" outcome, not an error.
    pub full_rank: bool,
    /// For totally complex fields only: the log-rank of the found units
    /// whose minimal polynomials have all roots real (exact Sturm test).
    pub all_real_rank: Option<usize>,
}

/// Enumerates the coordinate box ‖c‖∞ ≤ h over the module basis and returns
/// every unit of the module's stabilizer that lies in the module: exact
/// |norm| = 1 and exact x·Λ ⊆ Λ, after a float prefilter on the norm. The
/// box is scanned in parallel and the merged result is sorted by coordinates,
/// so the outcome is independent of the partitioning.
fn collect_units(field: &NumberField, kl: &KLattice, h: i64) -> Result<Vec<FieldElement>> {
    let d = field.degree();
    let elements = kl.basis();
    let e_inv = kl
        .coord_matrix()
        .inverse()
        .ok_or(FieldError::DependentBasis)?;

    // Float embeddings of the basis elements for the norm prefilter.
    let roots = poly_roots(&field.minpoly, 96)?;
    let real_f: Vec<f64> = roots.real.iter().map(|x| x.to_f64()).collect();
    let complex_f: Vec<(f64, f64)> = roots
        .complex
        .iter()
        .map(|z| (z.real().to_f64(), z.imag().to_f64()))
        .collect();
    let elem_f: Vec<Vec<f64>> = elements
        .iter()
        .map(|e| e.coords.iter().map(|c| c.to_f64()).collect())
        .collect();

    let eval_real = |coords: &[f64], t: f64| -> f64 {
        let mut acc = 0.0;
        for c in coords.iter().rev() {
            acc = acc * t + c;
        }
        acc
    };
    let eval_cabs2 = |coords: &[f64], re: f64, im: f64| -> f64 {
        let (mut ar, mut ai) = (0.0f64, 0.0f64);
        for c in coords.iter().rev() {
            let nr = ar * re - ai * im + c;
            let nai = ar * im + ai * re;
            ar = nr;
            ai = nai;
        }
        ar * ar + ai * ai
    };

    let scan_slab = |c0: i64| -> Vec<FieldElement> {
        let mut out = Vec::new();
        // Odometer over the remaining d−1 coordinates.
        let mut c = vec![-h; d - 1];
        'outer: loop {
            if c0 != 0 || c.iter().any(|&v| v != 0) {
                let mut pf = vec![0.0f64; d];
                let full = std::iter::once(c0).chain(c.iter().copied());
                for (j, cj) in full.clone().enumerate() {
                    if cj != 0 {
                        for (k, v) in elem_f[j].iter().enumerate() {
                            pf[k] += cj as f64 * v;
                        }
                    }
                }
                let mut norm_abs = 1.0f64;
                for &t in &real_f {
                    norm_abs *= eval_real(&pf, t).abs();
                }
                for &(re, im) in &complex_f {
                    norm_abs *= eval_cabs2(&pf, re, im);
                }
                if norm_abs > 0.7 && norm_abs < 1.43 {
                    let mut x = field.zero();
                    for (j, cj) in full.enumerate() {
                        if cj != 0 {
                            let scaled = field.scale(&elements[j], &Rational::from(cj));
                            x = field.add(&x, &scaled);
                        }
                    }
                    let n = field.norm(&x);
                    if n == Rational::from(1) || n == Rational::from(-1) {
                        let stabilizes =
                            elements.iter().all(|e| coords_in_span(&e_inv, &field.mul(&x, e)));
                        if stabilizes {
                            out.push(x);
                        }
                    }
                }
            }
            let mut k = 0;
            while k < d - 1 {
                c[k] += 1;
                if c[k] > h {
                    c[k] = -h;
                    k += 1;
                } else {
                    continue 'outer;
                }
            }
            break;
        }
        out
    };

    let mut found: Vec<FieldElement> = (-h..=h)
        .into_par_iter()
        .map(scan_slab)
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    found.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(found)
}

/// Log-embedding vector (log|σ_1(x)|, …, log|σ_{r+s}(x)|) at precision pw.
fn log_vector(field: &NumberField, x: &FieldElement, pw: u32) -> Result<Vec<BigReal>> {
    let roots = poly_roots(&field.minpoly, pw)?;
    let mut out = Vec::with_capacity(field.r + field.s);
    for root in &roots.real {
        let mut acc = BigReal::with_val(pw, 0);
        for c in x.coords.iter().rev() {
            acc = BigReal::with_val(pw, acc * root) + BigReal::with_val(pw, c);
        }
        out.push(acc.abs().ln());
    }
    for z in &roots.complex {
        let mut acc = rug::Complex::with_val(pw, (0, 0));
        for c in x.coords.iter().rev() {
            acc = rug::Complex::with_val(pw, acc * z)
                + rug::Complex::with_val(pw, BigReal::with_val(pw, c));
        }
        let a = acc.abs().into_real_imag().0;
        out.push(a.ln());
    }
    Ok(out)
}

/// Incremental numerical rank tracker for log vectors (modified
/// Gram–Schmidt with a scale-aware tolerance).
struct RankTracker {
    pw: u32,
    basis: Vec<Vec<BigReal>>,
}

impl RankTracker {
    fn new(pw: u32) -> Self {
        RankTracker { pw, basis: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Returns true (and records the vector) if it increases the rank.
    fn try_add(&mut self, v: &[BigReal]) -> bool {
        let pw = self.pw;
        let norm_sq = |v: &[BigReal]| -> BigReal {
            let mut acc = BigReal::with_val(pw, 0);
            for x in v {
                acc += BigReal::with_val(pw, x * x);
            }
            acc
        };
        let orig = norm_sq(v);
        if orig.is_zero() {
            return false;
        }
        let mut w: Vec<BigReal> = v.to_vec();
        for b in &self.basis {
            let mut dot = BigReal::with_val(pw, 0);
            for (x, y) in w.iter().zip(b.iter()) {
                dot += BigReal::with_val(pw, x * y);
            }
            let bn = norm_sq(b);
            let f = BigReal::with_val(pw, dot / bn);
            for (x, y) in w.iter_mut().zip(b.iter()) {
                let sub = BigReal::with_val(pw, &f * y);
                *x -= sub;
            }
        }
        let resid = norm_sq(&w);
        // Tolerance 2^(−pw/4) relative: far below any genuine regulator
        // contribution at the heights reachable here.
        let tol = crate::arith::big(pw, BigReal::i_exp(1, -((pw / 4) as i32)));
        if resid > BigReal::with_val(pw, &orig * &tol) {
            self.basis.push(w);
            true
        } else {
            false
        }
    }
}

/// Certified sign of σ_i(x) (real embedding) via exact interval refinement.
fn certified_real_sign(field: &NumberField, x: &FieldElement, real_index: usize) -> Result<i32> {
    if let Some(q) = x.is_rational() {
        return Ok(match q.cmp0() {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        });
    }
    let theta = AlgebraicReal::nth_real_root(&field.minpoly, real_index)?;
    for bits in [64u32, 128, 256, 512, 1024, 4096, 16384] {
        let (lo, hi) = theta.refined(bits);
        let (vlo, vhi) = eval_interval_q(&x.coords, &lo, &hi);
        if vlo.cmp0() == Ordering::Greater {
            return Ok(1);
        }
        if vhi.cmp0() == Ordering::Less {
            return Ok(-1);
        }
    }
    // Only reachable if σ_i(x) = 0, impossible for nonzero field elements.
    unreachable!("sign refinement failed; embedding value is zero?")
}

/// Exact all-real test for a unit: its minimal polynomial has as many real
/// roots (Sturm count) as its degree.
fn is_all_real(field: &NumberField, x: &FieldElement) -> bool {
    let mp = field.element_minpoly(x);
    match mp.degree() {
        Some(deg) if deg >= 1 => count_real_roots(&mp) == deg,
        _ => false,
    }
}

/// Bounded search for multiplicatively independent positive units of the
/// module's stabilizer order (restricted to elements of the module with
/// coordinates bounded by `height_bound`). Units negative in some real
/// embedding are replaced by their squares. The result certifies a
/// finite-index subgroup of the positive units — fundamental units are *not*
/// guaranteed; `full_rank: false` flags a too-small bound. Rank never exceeds
/// r + s − 1.
pub fn unit_search(
    field: &NumberField,
    kl: &KLattice,
    height_bound: i64,
    prec: u32,
) -> Result<UnitGroupData> {
    let pw = prec + GUARD_BITS;
    let (r, s) = field.signature();
    let bound = field.unit_rank_bound();
    let units = collect_units(field, kl, height_bound)?;

    let mut tracker = RankTracker::new(pw);
    // Totally complex fields also track the rank of the all-real units (the
    // CM symptom); skip the extra minimal-polynomial work otherwise.
    let mut real_tracker = if r == 0 { Some(RankTracker::new(pw)) } else { None };
    let real_needed = s.saturating_sub(1);
    let mut generators = Vec::new();
    let mut log_matrix = Vec::new();

    for u in units {
        let done_real = real_tracker
            .as_ref()
            .map(|t| t.rank() >= real_needed)
            .unwrap_or(true);
        if tracker.rank() == bound && done_real {
            break;
        }
        let raw_lv = log_vector(field, &u, pw)?;
        if let Some(rt) = real_tracker.as_mut() {
            if rt.rank() < real_needed && is_all_real(field, &u) {
                rt.try_add(&raw_lv);
            }
        }
        if tracker.rank() == bound {
            continue;
        }
        // Positivize: square when any real embedding is negative.
        let mut unit = u;
        let mut lv = raw_lv;
        let mut negative = false;
        for i in 0..r {
            if certified_real_sign(field, &unit, i)? < 0 {
                negative = true;
                break;
            }
        }
        if negative {
            unit = field.mul(&unit, &unit);
            for x in lv.iter_mut() {
                *x *= 2u32;
            }
        }
        if tracker.try_add(&lv) {
            log_matrix.push(lv.iter().map(|x| BigReal::with_val(prec, x)).collect());
            generators.push(unit);
        }
    }

    let rank = tracker.rank();
    debug_assert!(rank <= bound);
    Ok(UnitGroupData {
        generators,
        log_matrix,
        rank,
        height_bound,
        full_rank: rank == bound,
        all_real_rank: real_tracker.map(|t| t.rank()),
    })
}

// ---------------------------------------------------------------------------
// Orbit compactness and CM detection
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompactnessVerdict {
    /// The unit search realized the full Dirichlet rank r + s − 1 with log
    /// rows certifiably independent: the torus orbit of x_Λ is compact.
    CertifiedCompact,
    /// The height bound was too small to exhibit enough units — no
    /// conclusion.
    Inconclusive,
}

/// Certifies compactness of the torus orbit through x_Λ from unit data: the
/// verdict is positive iff the found rank equals r + s − 1 and the log rows
/// pass an exact rational-rank check on certified approximations (each entry
/// is a dyadic rational within one ulp of the true logarithm, and the
/// Gram–Schmidt residuals of the rows exceed the accumulated error by
/// construction of the search).
pub fn torus_orbit_compactness(
    field: &NumberField,
    _kl: &KLattice,
    units: &UnitGroupData,
) -> CompactnessVerdict {
    let bound = field.unit_rank_bound();
    if bound == 0 {
        // Rank-zero unit group: the orbit is compact vacuously.
        return CompactnessVerdict::CertifiedCompact;
    }
    if units.rank != bound || units.log_matrix.len() != bound {
        return CompactnessVerdict::Inconclusive;
    }
    // Exact rank of the dyadic-rational approximation.
    let rows: Vec<Vec<Rational>> = units
        .log_matrix
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| x.to_rational().expect("finite logarithm"))
                .collect()
        })
        .collect();
    let m = QMat::from_rows(rows);
    if m.rank() == bound {
        CompactnessVerdict::CertifiedCompact
    } else {
        CompactnessVerdict::Inconclusive
    }
}

/// Verdict of the bounded CM test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmVerdict {
    /// Certified: a totally complex field exhibiting totally real units of
    /// rank ≥ s − 1 (so the maximal totally real subfield has full unit rank
    /// and index 2).
    Yes,
    /// `searched_height: None` — structurally not CM (some real embedding or
    /// odd degree). `Some(h)` — totally complex, the search at height h
    /// realized the full unit rank s − 1, yet the all-real units fall short:
    /// no CM certificate below that height (a bounded statement, not a
    /// proof).
    No { searched_height: Option<i64> },
    /// The search did not even reach the full unit rank, so nothing can be
    /// said either way at this height.
    Inconclusive { searched_height: i64 },
}

/// Bounded CM detection from unit-search data. A unit counts as totally real
/// exactly when its minimal polynomial has all roots real — an exact Sturm
/// test performed during the search.
pub fn is_cm(field: &NumberField, units: &UnitGroupData) -> CmVerdict {
    let (r, s) = field.signature();
    if r > 0 || field.degree() % 2 == 1 {
        return CmVerdict::No {
            searched_height: None,
        };
    }
    let real_rank = units.all_real_rank.unwrap_or(0);
    if real_rank >= s.saturating_sub(1) {
        CmVerdict::Yes
    } else if units.full_rank {
        CmVerdict::No {
            searched_height: Some(units.height_bound),
        }
    } else {
        CmVerdict::Inconclusive {
            searched_height: units.height_bound,
        }
    }
}

// ---------------------------------------------------------------------------
// Scalar–parabolic–embedding factorization
// ---------------------------------------------------------------------------

/// Factorization g = c·p·Φ of the unipotent row matrix built from the first
/// real embedding of a field basis: c is a scalar, p is lower-parabolic with
/// first row (b, 0, …, 0), Φ is the geometric embedding of the basis.
#[derive(Clone, Debug)]
pub struct ScalarParabolicFactorization {
    pub c: BigReal,
    pub p: RMat,
    pub phi: RMat,
    /// The matrix that was factored: identity with its first row replaced by
    /// the first-real-embedding values of the basis elements.
    pub g: RMat,
}

/// Factors g_v = c·p·Φ where g_v is the identity matrix with first row
/// (σ_1(x_1), …, σ_1(x_d)) for the first real embedding σ_1, and Φ is the
/// embedding matrix of the basis x. Requires r ≥ 1 and σ_1(x_1) = 1 (so the
/// first row of M = g_v·Φ^{−1} collapses to e_1ᵀ). c is the real d-th root
/// of det M with consistent sign; even degree with negative determinant is
/// an error.
pub fn scalar_parabolic_factor(
    field: &NumberField,
    kl: &KLattice,
    prec: u32,
) -> Result<ScalarParabolicFactorization> {
    let d = field.degree();
    if field.signature().0 == 0 {
        return Err(FieldError::NotARealEmbedding(0));
    }
    let pw = prec + GUARD_BITS;
    let tol = half_ulp_tolerance(prec);

    let phi = field.embedding_matrix(kl.basis(), pw)?;
    let phi_inv = phi.inverse().ok_or(FieldError::DependentBasis)?;

    // g_v: identity with first row taken from the first real embedding row.
    let mut g = RMat::identity(pw, d);
    for j in 0..d {
        g.set(0, j, phi.get(0, j).clone());
    }
    let one_off = BigReal::with_val(pw, g.get(0, 0) - BigReal::with_val(pw, 1)).abs();
    if one_off > tol {
        return Err(FieldError::ShapeViolation(format!(
            "first basis element must embed to 1 (got {})",
            g.get(0, 0)
        )));
    }

    let m = g.mul(&phi_inv);
    let det = m.det();
    let c = if d % 2 == 1 {
        // Odd degree: the real d-th root keeps the determinant's sign.
        let neg = det.is_sign_negative();
        let mag = BigReal::with_val(pw, det.clone().abs().ln() / BigReal::with_val(pw, d as u32))
            .exp();
        if neg {
            -mag
        } else {
            mag
        }
    } else {
        if det.is_sign_negative() {
            return Err(FieldError::NegativeDeterminant);
        }
        BigReal::with_val(pw, det.clone().abs().ln() / BigReal::with_val(pw, d as u32)).exp()
    };

    let mut p = m.clone();
    let cinv = BigReal::with_val(pw, c.clone().recip());
    p.scale_all(&cinv);

    // Shape: first row (b, 0, …, 0).
    for j in 1..d {
        if p.get(0, j).clone().abs() > tol {
            return Err(FieldError::ShapeViolation(format!(
                "first-row entry {j} is {} (should vanish)",
                p.get(0, j)
            )));
        }
    }
    // det p = 1.
    let det_p_off = BigReal::with_val(pw, p.det() - BigReal::with_val(pw, 1)).abs();
    if det_p_off > tol {
        return Err(FieldError::ShapeViolation(format!(
            "det p is off unity by {det_p_off}"
        )));
    }
    // Reassembly: c·p·Φ = g.
    let mut reass = p.mul(&phi);
    reass.scale_all(&c);
    for i in 0..d {
        for j in 0..d {
            let off = BigReal::with_val(pw, reass.get(i, j) - g.get(i, j)).abs();
            if off > tol {
                return Err(FieldError::ShapeViolation(format!(
                    "reassembly mismatch at ({i},{j}): {off}"
                )));
            }
        }
    }

    Ok(ScalarParabolicFactorization {
        c: BigReal::with_val(prec, c),
        p: p.at_prec(prec),
        phi: phi.at_prec(prec),
        g: g.at_prec(prec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(desc: &[i64]) -> NumberField {
        NumberField::new(IntPoly::from_descending_i64(desc)).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn construction_and_signatures() {
        assert_eq!(field(&[1, 0, 0, -2]).signature(), (1, 1)); // t³ − 2
        assert_eq!(field(&[1, 0, -3, -1]).signature(), (3, 0)); // t³ − 3t − 1
        assert_eq!(field(&[1, 0, 0, 0, 1]).signature(), (0, 2)); // t⁴ + 1
        assert_eq!(field(&[1, 0, 1]).signature(), (0, 1)); // t² + 1

        // Rational root: rejected.
        assert!(matches!(
            NumberField::new(IntPoly::from_descending_i64(&[1, 0, -1])),
            Err(FieldError::Arith(ArithError::RationalRootFound(_)))
        ));
        // Not squarefree: rejected.
        assert!(matches!(
            NumberField::new(IntPoly::from_descending_i64(&[1, 0, -4, 0, 4])),
            Err(FieldError::Arith(ArithError::NotSquarefree(_)))
        ));
        // Degree 1.
        assert!(matches!(
            NumberField::new(IntPoly::from_descending_i64(&[1, -5])),
            Err(FieldError::Arith(ArithError::RationalRootFound(_)))
                | Err(FieldError::DegreeTooSmall(1))
        ));
    }

    #[test]
    fn element_arithmetic_delegates() {
        let k = field(&[1, 0, 0, -2]);
        let theta = k.theta();
        let theta2 = k.mul(&theta, &theta);
        let prod = k.mul(&theta, &theta2);
        assert_eq!(prod, k.element(vec![q(2, 1), q(0, 1), q(0, 1)]).unwrap());
        let inv = k.inv(&theta).unwrap();
        assert_eq!(inv, k.element(vec![q(0, 1), q(0, 1), q(1, 2)]).unwrap());
        assert_eq!(k.norm(&theta), q(2, 1));
        let theta_minus_1 = k.sub(&theta, &k.one());
        assert_eq!(k.norm(&theta_minus_1), q(1, 1));
        assert_eq!(k.trace(&theta), q(0, 1));
        assert!(k.inv(&k.zero()).is_err());
    }

    #[test]
    fn element_minpolys() {
        let k = field(&[1, 0, 0, -2]);
        let theta2 = k.mul(&k.theta(), &k.theta());
        assert_eq!(
            k.element_minpoly(&theta2),
            IntPoly::from_descending_i64(&[1, 0, 0, -4])
        );
        // Rational element: degree 1.
        let half = k.element(vec![q(1, 2), q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(
            k.element_minpoly(&half),
            IntPoly::from_descending_i64(&[2, -1])
        );
        // 1 + √2 inside Q(ζ₈): coords (1, 1, 0, −1) on powers of ζ₈.
        let zeta = field(&[1, 0, 0, 0, 1]);
        let u = zeta.element(vec![q(1, 1), q(1, 1), q(0, 1), q(-1, 1)]).unwrap();
        assert_eq!(
            zeta.element_minpoly(&u),
            IntPoly::from_descending_i64(&[1, -2, -1])
        );
    }

    #[test]
    fn embedded_scalar_matches_algebraic_handles() {
        let k = field(&[1, 0, -2]); // t² − 2, roots −√2 < √2
        let theta = k.theta();
        let s_pos = k.embedded_scalar(&theta, 1).unwrap();
        let s_neg = k.embedded_scalar(&theta, 0).unwrap();
        let sqrt2 = BigReal::with_val(256, 2).sqrt();
        let err_pos = BigReal::with_val(256, s_pos.to_float(256) - &sqrt2).abs();
        let err_neg = BigReal::with_val(256, s_neg.to_float(256) + &sqrt2).abs();
        assert!(err_pos < BigReal::with_val(64, BigReal::i_exp(1, -250)));
        assert!(err_neg < BigReal::with_val(64, BigReal::i_exp(1, -250)));
        // (1 + √2)/2 embeds correctly too.
        let x = k.element(vec![q(1, 2), q(1, 2)]).unwrap();
        let s = k.embedded_scalar(&x, 1).unwrap();
        let expect = (BigReal::with_val(256, 1) + &sqrt2) / BigReal::with_val(256, 2);
        let err = BigReal::with_val(256, s.to_float(256) - expect).abs();
        assert!(err < BigReal::with_val(64, BigReal::i_exp(1, -250)));
        // Rational elements come back rational.
        let r = k.embedded_scalar(&k.one(), 0).unwrap();
        assert!(matches!(r, Scalar::Rational(v) if v == q(1, 1)));
    }

    #[test]
    fn geometric_embedding_of_cubic_root() {
        let k = field(&[1, 0, 0, -2]);
        // φ(1) = (1, 1, 0).
        let one = k.geometric_embedding(&k.one(), 128).unwrap();
        assert!(BigReal::with_val(128, &one[0] - 1u32).abs() < BigReal::with_val(64, 1e-30));
        assert!(BigReal::with_val(128, &one[1] - 1u32).abs() < BigReal::with_val(64, 1e-30));
        assert!(one[2].clone().abs() < BigReal::with_val(64, 1e-30));
        // φ(0) = 0.
        let zero = k.geometric_embedding(&k.zero(), 128).unwrap();
        assert!(zero.iter().all(|v| v.is_zero()));
        // φ(θ) ≈ (1.2599, −0.6300, 1.0911).
        let th = k.geometric_embedding(&k.theta(), 128).unwrap();
        for (got, want) in th.iter().zip([1.2599, -0.6300, 1.0911]) {
            assert!((got.to_f64() - want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn embedding_determinant_identity() {
        // |det Φ| = 2^(−s)·√|disc| on the power basis.
        for desc in [&[1i64, 0, 0, -2][..], &[1, 0, -3, -1][..], &[1, 0, 0, 0, 1][..]] {
            let k = field(desc);
            let (_, s) = k.signature();
            let phi = k.embedding_matrix(&k.power_basis(), 320).unwrap();
            let det = phi.det().abs();
            let disc = k.poly_discriminant();
            let expect = BigReal::with_val(320, disc.clone().abs()).sqrt()
                / BigReal::with_val(320, Integer::from(1) << (s as u32));
            let err = BigReal::with_val(320, det - expect).abs();
            assert!(
                err < BigReal::with_val(64, BigReal::i_exp(1, -140)),
                "disc identity failed for {desc:?} (disc {disc})"
            );
        }
    }

    #[test]
    fn psi_is_multiplication_in_embedding_coordinates() {
        let k = field(&[1, 0, 0, -2]);
        let prec = 256;
        let x = k.element(vec![q(1, 1), q(2, 1), q(0, 1)]).unwrap(); // 1 + 2θ
        let y = k.element(vec![q(-1, 1), q(0, 1), q(3, 1)]).unwrap(); // 3θ² − 1
        let psi = k.psi_matrix(&x, prec).unwrap();
        let phi_y = k.embedding_matrix(&[y.clone()], prec).unwrap();
        let phi_xy = k.embedding_matrix(&[k.mul(&x, &y)], prec).unwrap();
        let lhs = psi.mul(&phi_y);
        for i in 0..3 {
            let off = BigReal::with_val(prec, lhs.get(i, 0) - phi_xy.get(i, 0)).abs();
            assert!(off < half_ulp_tolerance(prec), "row {i}: {off}");
        }
        // det ψ(u) = 1 for the unit u = 1/(θ − 1).
        let u = k.inv(&k.sub(&k.theta(), &k.one())).unwrap();
        let det_off = BigReal::with_val(prec, k.psi_matrix(&u, prec).unwrap().det() - 1u32).abs();
        assert!(det_off < half_ulp_tolerance(prec));
    }

    #[test]
    fn order_membership_checks() {
        let k = field(&[1, 0, 0, -2]);
        let zk = KLattice::power_order(&k);
        // θ multiplies Z[θ] into itself.
        assert!(order_elements_check(&k, &zk, &k.theta()).unwrap());
        // So does 1 + θ + θ².
        let x = k.element(vec![q(1, 1), q(1, 1), q(1, 1)]).unwrap();
        assert!(order_elements_check(&k, &zk, &x).unwrap());
        // θ/2 does not (already 1·θ/2 escapes).
        let half_theta = k.element(vec![q(0, 1), q(1, 2), q(0, 1)]).unwrap();
        assert!(!order_elements_check(&k, &zk, &half_theta).unwrap());
        // Suborder Z{1, 2θ, θ²}: multiplication by 2θ stays inside, by θ not.
        let sub = KLattice::new(
            &k,
            vec![
                k.one(),
                k.element(vec![q(0, 1), q(2, 1), q(0, 1)]).unwrap(),
                k.element(vec![q(0, 1), q(0, 1), q(1, 1)]).unwrap(),
            ],
        )
        .unwrap();
        let two_theta = k.element(vec![q(0, 1), q(2, 1), q(0, 1)]).unwrap();
        assert!(order_elements_check(&k, &sub, &two_theta).unwrap());
        assert!(!order_elements_check(&k, &sub, &k.theta()).unwrap());
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let k = field(&[1, 0, 0, -2]);
        // 1 and 2 are Q-dependent.
        let bad = KLattice::new(
            &k,
            vec![
                k.one(),
                k.element(vec![q(2, 1), q(0, 1), q(0, 1)]).unwrap(),
                k.theta(),
            ],
        );
        assert!(matches!(bad, Err(FieldError::DependentBasis)));
        // Wrong length too.
        let short = KLattice::new(&k, vec![k.one(), k.theta()]);
        assert!(matches!(short, Err(FieldError::DependentBasis)));
    }

    #[test]
    fn unit_ranks_of_the_reference_fields() {
        // t³ − 2: r + s − 1 = 1; θ − 1 is already a unit at height 5.
        let k = field(&[1, 0, 0, -2]);
        let units = unit_search(&k, &KLattice::power_order(&k), 5, 192).unwrap();
        assert_eq!(units.rank, 1);
        assert!(units.full_rank);
        assert!(units.all_real_rank.is_none());
        for g in &units.generators {
            let n = k.norm(g);
            assert!(n == q(1, 1) || n == q(-1, 1));
        }
        // Weighted log-vector sum vanishes (norm has absolute value 1):
        // 1 per real embedding, 2 per complex pair.
        let (r, _s) = k.signature();
        for row in &units.log_matrix {
            let mut acc = BigReal::with_val(192, 0);
            for (i, v) in row.iter().enumerate() {
                let w = if i < r { 1 } else { 2 };
                acc += BigReal::with_val(192, v * BigReal::with_val(192, w));
            }
            assert!(acc.abs() < BigReal::with_val(64, 1e-40));
        }

        // t³ − 3t − 1: totally real cubic, rank 2 at height 5.
        let k2 = field(&[1, 0, -3, -1]);
        let units2 = unit_search(&k2, &KLattice::power_order(&k2), 5, 192).unwrap();
        assert_eq!(units2.rank, 2);
        // Positivity: every generator is positive in every real embedding.
        for g in &units2.generators {
            for i in 0..3 {
                assert_eq!(certified_real_sign(&k2, g, i).unwrap(), 1);
            }
        }

        // t⁴ + 1: totally complex quartic, rank 1.
        let k3 = field(&[1, 0, 0, 0, 1]);
        let units3 = unit_search(&k3, &KLattice::power_order(&k3), 10, 192).unwrap();
        assert_eq!(units3.rank, 1);
        assert_eq!(units3.all_real_rank, Some(1));

        // Q(i): rank 0 is already full (r + s − 1 = 0).
        let ki = field(&[1, 0, 1]);
        let unitsi = unit_search(&ki, &KLattice::power_order(&ki), 5, 192).unwrap();
        assert_eq!(unitsi.rank, 0);
        assert!(unitsi.full_rank);
    }

    #[test]
    fn compactness_verdicts() {
        let k = field(&[1, 0, 0, -2]);
        let zk = KLattice::power_order(&k);
        let units = unit_search(&k, &zk, 5, 192).unwrap();
        assert_eq!(
            torus_orbit_compactness(&k, &zk, &units),
            CompactnessVerdict::CertifiedCompact
        );
        // Q(i): vacuously compact.
        let ki = field(&[1, 0, 1]);
        let zki = KLattice::power_order(&ki);
        let unitsi = unit_search(&ki, &zki, 5, 192).unwrap();
        assert_eq!(
            torus_orbit_compactness(&ki, &zki, &unitsi),
            CompactnessVerdict::CertifiedCompact
        );
        // A suborder whose units all have large coordinates: height 1 finds
        // nothing, so the verdict is inconclusive.
        let k2 = field(&[1, 0, -3, -1]);
        let sub = KLattice::new(
            &k2,
            vec![
                k2.one(),
                k2.element(vec![q(0, 1), q(7, 1), q(0, 1)]).unwrap(),
                k2.element(vec![q(0, 1), q(0, 1), q(7, 1)]).unwrap(),
            ],
        )
        .unwrap();
        let units_sub = unit_search(&k2, &sub, 1, 192).unwrap();
        assert!(!units_sub.full_rank);
        assert_eq!(
            torus_orbit_compactness(&k2, &sub, &units_sub),
            CompactnessVerdict::Inconclusive
        );
    }

    #[test]
    fn cm_verdicts() {
        // Structural no: a real embedding exists.
        let k = field(&[1, 0, 0, -2]);
        let units = unit_search(&k, &KLattice::power_order(&k), 5, 128).unwrap();
        assert_eq!(
            is_cm(&k, &units),
            CmVerdict::No {
                searched_height: None
            }
        );
        // Q(ζ₈) is CM: ±(1 + √2) is a totally real unit, rank 1 = s − 1.
        let zeta = field(&[1, 0, 0, 0, 1]);
        let units8 = unit_search(&zeta, &KLattice::power_order(&zeta), 10, 192).unwrap();
        assert_eq!(is_cm(&zeta, &units8), CmVerdict::Yes);
        // Q(i): s − 1 = 0, CM vacuously (it *is* a CM field).
        let ki = field(&[1, 0, 1]);
        let unitsi = unit_search(&ki, &KLattice::power_order(&ki), 5, 128).unwrap();
        assert_eq!(is_cm(&ki, &unitsi), CmVerdict::Yes);
    }

    #[test]
    fn cm_bounded_negative_for_non_cm_quartic() {
        // t⁴ + t + 1 is totally complex but not CM; the search realizes the
        // full unit rank (s − 1 = 1) yet finds no totally real units beyond
        // ±1, so the verdict is a bounded no.
        let k = field(&[1, 0, 0, 1, 1]);
        assert_eq!(k.signature(), (0, 2));
        let units = unit_search(&k, &KLattice::power_order(&k), 20, 192).unwrap();
        assert!(units.full_rank);
        assert_eq!(units.all_real_rank, Some(0));
        assert_eq!(
            is_cm(&k, &units),
            CmVerdict::No {
                searched_height: Some(20)
            }
        );
    }

    #[test]
    fn scalar_parabolic_factorization_of_cubic_basis() {
        let k = field(&[1, 0, 0, -2]);
        let prec = 256;
        let f = scalar_parabolic_factor(&k, &KLattice::power_order(&k), prec).unwrap();
        // |c| = (1/|det Φ|)^{1/3} with |det Φ| = 2^(−1)·√108 ≈ 5.196.
        let expect_c = (BigReal::with_val(prec, 1)
            / (BigReal::with_val(prec, 108).sqrt() / BigReal::with_val(prec, 2)))
        .root(3);
        let err = BigReal::with_val(prec, f.c.clone().abs() - expect_c).abs();
        assert!(err < BigReal::with_val(64, 1e-60), "c = {}", f.c);
        // First row of p is (b, 0, 0) with b = 1/c.
        let b = f.p.get(0, 0);
        let binv_err = BigReal::with_val(prec, BigReal::with_val(prec, b * &f.c) - 1u32).abs();
        assert!(binv_err < half_ulp_tolerance(prec));

        // Totally real example: shape and unit determinant hold as well.
        let k2 = field(&[1, 0, -3, -1]);
        let f2 = scalar_parabolic_factor(&k2, &KLattice::power_order(&k2), prec).unwrap();
        let det_off = BigReal::with_val(prec, f2.p.det() - 1u32).abs();
        assert!(det_off < half_ulp_tolerance(prec));
    }

    #[test]
    fn lattice_from_basis_is_normalized_with_provenance() {
        let k = field(&[1, 0, 0, -2]);
        let lat = k
            .lattice_from_basis(&KLattice::power_order(&k), 192)
            .unwrap();
        let det_err = BigReal::with_val(192, lat.det().abs() - 1u32).abs();
        assert!(det_err < half_ulp_tolerance(192));
        assert!(lat.provenance().is_some());
        // Q(i) on {1, i}: the embedded basis is already the unit square.
        let ki = field(&[1, 0, 1]);
        let lati = ki
            .lattice_from_basis(&KLattice::power_order(&ki), 192)
            .unwrap();
        let sys = lati.shortest_vector().unwrap().0;
        assert!(BigReal::with_val(192, sys - 1u32).abs() < BigReal::with_val(64, 1e-40));
    }

    #[test]
    fn field_spec_json_roundtrip() {
        let spec = FieldSpec {
            minpoly: vec![-2, 0, 0, 1],
            basis: vec![
                vec!["1".into(), "0".into(), "0".into()],
                vec!["0".into(), "1".into(), "0".into()],
                vec!["0".into(), "-1/2".into(), "1".into()],
            ],
        };
        let (k, kl) = spec.build().unwrap();
        assert_eq!(k.signature(), (1, 1));
        assert_eq!(kl.basis()[2].coords[1], q(-1, 2));
    }
}
