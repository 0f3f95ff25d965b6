//! Unimodular lattices with provenance-exact materialization.
//!
//! A [`LatticeBasis`] is a full-rank lattice in R^d presented by the columns
//! of a float matrix at an explicit precision. Whenever the lattice came from
//! exact data — an integer/rational matrix, a shear built from algebraic
//! numbers, or the ring embedding of a number field — it also carries a
//! [`Provenance`]: the exact generator description, an exact integer column
//! transform, exact diagonal log-scales, and a covolume-normalization flag.
//! Every operation that *can* update the provenance does so, and numeric
//! columns are always re-materialized from the exact data rather than
//! forward-multiplied, so a lattice deep into a diagonal flow is exactly as
//! accurate as a freshly built one.
//!
//! Short-vector questions (systole, successive minima) are answered by
//! LLL-preconditioned Fincke–Pohst enumeration with slack-inflated radii, for
//! dimension up to 6.

use std::cmp::Ordering;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{
    big, half_ulp_tolerance, poly_roots, ArithError, BigComplex, BigReal, IntPoly, Integer,
    Rational, Scalar,
};
use crate::linalg::{lll_float_transform, IMat, QMat, RMat};

/// Guard bits used for internal computation beyond the published precision.
const GUARD_BITS: u32 = 64;

/// Largest dimension accepted by the enumeration routines.
pub const MAX_ENUM_DIM: usize = 6;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("dimension {0} is not supported here (max {MAX_ENUM_DIM})")]
    UnsupportedDimension(usize),
    #[error("basis is singular at the working precision")]
    SingularBasis,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lattice dimension must be at least 2 (got {0})")]
    DimensionTooSmall(usize),
    #[error("enumeration exceeded the internal node budget; basis too skew")]
    EnumerationOverflow,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

type Result<T> = std::result::Result<T, LatticeError>;

// ---------------------------------------------------------------------------
// Provenance
// ---------------------------------------------------------------------------

/// Exact generator set behind a lattice.
#[derive(Clone, Debug)]
pub enum Generators {
    /// The standard lattice Z^d.
    Identity(usize),
    /// Columns with exact scalar entries (rationals and/or algebraic reals).
    Columns(Vec<Vec<Scalar>>),
    /// Rows of the geometric embedding of a number field: the columns are the
    /// embeddings of the given elements (rational coordinates on the power
    /// basis of the root of `minpoly`), with real embeddings first (roots
    /// ascending) and each complex-conjugate pair contributing a (Re, Im) row
    /// pair (pairs ordered by (Re, Im) of the root).
    Embedding {
        minpoly: IntPoly,
        elements: Vec<Vec<Rational>>,
    },
}

impl Generators {
    pub fn dim(&self) -> usize {
        match self {
            Generators::Identity(d) => *d,
            Generators::Columns(cols) => cols.len(),
            Generators::Embedding { minpoly, .. } => {
                minpoly.degree().expect("embedding minpoly is nonzero")
            }
        }
    }
}

/// Exact description of how the current basis arises from its generators:
/// basis = normalize? · diag(e^{diag_log}) · G · transform.
#[derive(Clone, Debug)]
pub struct Provenance {
    pub generators: Generators,
    /// Integer column transform applied on the right (|det| = 1 throughout
    /// this crate, though any invertible integer matrix materializes fine).
    pub transform: IMat,
    /// Exact log-scales of the left diagonal factor, one per row.
    pub diag_log: Vec<Rational>,
    /// Rescale the final matrix to covolume 1 (the scale is recomputed at
    /// every materialization precision, never stored as a float).
    pub normalize: bool,
}

impl Provenance {
    pub fn plain(generators: Generators) -> Self {
        let d = generators.dim();
        Provenance {
            generators,
            transform: IMat::identity(d),
            diag_log: vec![Rational::new(); d],
            normalize: false,
        }
    }

    /// True when the generators (and hence the un-normalized, un-flowed
    /// lattice) are rational, enabling exact Gram computations.
    fn rational_columns(&self) -> Option<QMat> {
        match &self.generators {
            Generators::Identity(d) => Some(QMat::identity(*d)),
            Generators::Columns(cols) => {
                let d = cols.len();
                let mut m = QMat::zeros(d, d);
                for (j, col) in cols.iter().enumerate() {
                    for (i, s) in col.iter().enumerate() {
                        match s {
                            Scalar::Rational(q) => m.set(i, j, q.clone()),
                            Scalar::Algebraic(_) => return None,
                        }
                    }
                }
                Some(m)
            }
            Generators::Embedding { .. } => None,
        }
    }
}

/// Evaluates the geometric-embedding rows for a number field given by
/// `minpoly` at the requested precision: one row per real root (ascending),
/// then (Re, Im) row pairs per complex root (im > 0, ordered by (Re, Im)).
/// Column j is the embedding of the element with rational power-basis
/// coordinates `elements[j]`.
pub(crate) fn embedding_rows(
    minpoly: &IntPoly,
    elements: &[Vec<Rational>],
    prec: u32,
) -> std::result::Result<RMat, ArithError> {
    let d = minpoly.degree().expect("embedding minpoly is nonzero");
    let roots = poly_roots(minpoly, prec)?;
    let n = elements.len();
    let mut m = RMat::zeros(prec, d, n);
    for (j, coords) in elements.iter().enumerate() {
        assert_eq!(coords.len(), d, "element coordinate length mismatch");
        let mut row = 0usize;
        for re_root in &roots.real {
            // Horner evaluation of Σ c_k θ^k at the real root.
            let mut acc = BigReal::with_val(prec, 0);
            for c in coords.iter().rev() {
                acc = BigReal::with_val(prec, acc * re_root) + BigReal::with_val(prec, c);
            }
            m.set(row, j, acc);
            row += 1;
        }
        for z in &roots.complex {
            let mut acc = BigComplex::with_val(prec, (0, 0));
            for c in coords.iter().rev() {
                acc = BigComplex::with_val(prec, acc * z)
                    + BigComplex::with_val(prec, BigReal::with_val(prec, c));
            }
            let (re, im) = acc.into_real_imag();
            m.set(row, j, re);
            m.set(row + 1, j, im);
            row += 2;
        }
        debug_assert_eq!(row, d);
    }
    Ok(m)
}

fn materialize(prov: &Provenance, prec: u32) -> Result<RMat> {
    let d = prov.generators.dim();
    let pw = prec + GUARD_BITS;
    let g = match &prov.generators {
        Generators::Identity(d) => RMat::identity(pw, *d),
        Generators::Columns(cols) => {
            let d = cols.len();
            RMat::from_fn(pw, d, d, |i, j| cols[j][i].to_float(pw))
        }
        Generators::Embedding { minpoly, elements } => embedding_rows(minpoly, elements, pw)?,
    };
    let mut b = g.mul_imat(&prov.transform);
    for (i, l) in prov.diag_log.iter().enumerate() {
        if l.cmp0() != Ordering::Equal {
            let f = BigReal::with_val(pw, l).exp();
            b.scale_row(i, &f);
        }
    }
    if prov.normalize {
        let det = b.det().abs();
        if det.is_zero() {
            return Err(LatticeError::SingularBasis);
        }
        let s = (-det.ln() / BigReal::with_val(pw, d as u32)).exp();
        b.scale_all(&s);
    }
    Ok(b.at_prec(prec))
}

// ---------------------------------------------------------------------------
// LatticeBasis
// ---------------------------------------------------------------------------

/// Full-rank lattice in R^d: float basis columns at an explicit precision,
/// plus optional exact provenance.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    d: usize,
    cols: RMat,
    prec: u32,
    provenance: Option<Provenance>,
}

impl LatticeBasis {
    /// The standard lattice Z^d.
    pub fn standard(d: usize, prec: u32) -> Result<Self> {
        if d < 2 {
            return Err(LatticeError::DimensionTooSmall(d));
        }
        Ok(LatticeBasis {
            d,
            cols: RMat::identity(prec, d),
            prec,
            provenance: Some(Provenance::plain(Generators::Identity(d))),
        })
    }

    /// Lattice from exact column entries; keeps full provenance.
    pub fn from_exact_columns(cols: Vec<Vec<Scalar>>, prec: u32) -> Result<Self> {
        let d = cols.len();
        if d < 2 {
            return Err(LatticeError::DimensionTooSmall(d));
        }
        for c in &cols {
            if c.len() != d {
                return Err(LatticeError::DimensionMismatch {
                    expected: d,
                    got: c.len(),
                });
            }
        }
        Self::from_provenance(Provenance::plain(Generators::Columns(cols)), prec)
    }

    /// Lattice materialized from an explicit provenance description.
    pub fn from_provenance(provenance: Provenance, prec: u32) -> Result<Self> {
        let d = provenance.generators.dim();
        if d < 2 {
            return Err(LatticeError::DimensionTooSmall(d));
        }
        if provenance.diag_log.len() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: provenance.diag_log.len(),
            });
        }
        let cols = materialize(&provenance, prec)?;
        let b = LatticeBasis {
            d,
            cols,
            prec,
            provenance: Some(provenance),
        };
        b.check_nonsingular()?;
        Ok(b)
    }

    /// Lattice from already-computed float columns; no provenance, so later
    /// operations work on the numbers as given.
    pub fn from_float_columns(cols: RMat) -> Result<Self> {
        let d = cols.ncols();
        if d < 2 {
            return Err(LatticeError::DimensionTooSmall(d));
        }
        if cols.nrows() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: cols.nrows(),
            });
        }
        let prec = cols.prec();
        let b = LatticeBasis {
            d,
            cols,
            prec,
            provenance: None,
        };
        b.check_nonsingular()?;
        Ok(b)
    }

    fn check_nonsingular(&self) -> Result<()> {
        let det = self.cols.det().abs();
        if det.is_zero() {
            return Err(LatticeError::SingularBasis);
        }
        // Scale-aware: compare against the product of column norms.
        let mut scale = BigReal::with_val(self.prec, 1);
        for j in 0..self.d {
            scale *= self.cols.col_norm_sq(j).sqrt();
        }
        if det < scale * half_ulp_tolerance(self.prec) {
            return Err(LatticeError::SingularBasis);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn columns(&self) -> &RMat {
        &self.cols
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Determinant of the basis matrix at the published precision.
    pub fn det(&self) -> BigReal {
        self.cols.det()
    }

    /// The same lattice re-materialized at another precision. With provenance
    /// this recomputes everything from exact data; without, it merely rounds
    /// the stored columns (no information is gained by increasing precision).
    pub fn at_precision(&self, prec: u32) -> Result<Self> {
        match &self.provenance {
            Some(p) => Self::from_provenance(p.clone(), prec),
            None => Ok(LatticeBasis {
                d: self.d,
                cols: self.cols.at_prec(prec),
                prec,
                provenance: None,
            }),
        }
    }

    /// Dual lattice (inverse-transpose basis). The exact provenance does not
    /// survive inversion, so the dual carries none; it is computed with guard
    /// bits so that dual∘dual returns to the original within 2^(−P/2).
    pub fn dual(&self) -> Result<Self> {
        let pw = self.prec + GUARD_BITS;
        let src = match &self.provenance {
            Some(p) => materialize(p, pw)?,
            None => self.cols.at_prec(pw),
        };
        let inv = src.inverse().ok_or(LatticeError::SingularBasis)?;
        let dual_cols = inv.transpose().at_prec(self.prec);
        LatticeBasis::from_float_columns(dual_cols)
    }

    /// Same lattice scaled to covolume 1.
    pub fn normalize_covolume(&self) -> Result<Self> {
        match &self.provenance {
            Some(p) => {
                let mut p = p.clone();
                p.normalize = true;
                Self::from_provenance(p, self.prec)
            }
            None => {
                let pw = self.prec + GUARD_BITS;
                let mut b = self.cols.at_prec(pw);
                let det = b.det().abs();
                if det.is_zero() {
                    return Err(LatticeError::SingularBasis);
                }
                let s = (-det.ln() / BigReal::with_val(pw, self.d as u32)).exp();
                b.scale_all(&s);
                LatticeBasis::from_float_columns(b.at_prec(self.prec))
            }
        }
    }

    /// Applies the diagonal element diag(e^{t_1}, …, e^{t_d}) on the left,
    /// with exact log-scales. With provenance this only updates the exact
    /// description and re-materializes.
    pub fn apply_diag(&self, t: &[Rational]) -> Result<Self> {
        if t.len() != self.d {
            return Err(LatticeError::DimensionMismatch {
                expected: self.d,
                got: t.len(),
            });
        }
        match &self.provenance {
            Some(p) => {
                let mut p = p.clone();
                for (acc, inc) in p.diag_log.iter_mut().zip(t) {
                    *acc += inc;
                }
                Self::from_provenance(p, self.prec)
            }
            None => {
                let pw = self.prec + GUARD_BITS;
                let mut b = self.cols.at_prec(pw);
                for (i, l) in t.iter().enumerate() {
                    let f = BigReal::with_val(pw, l).exp();
                    b.scale_row(i, &f);
                }
                LatticeBasis::from_float_columns(b.at_prec(self.prec))
            }
        }
    }

    /// Change of basis by an integer matrix with |det| = 1 (checked): the
    /// lattice is unchanged as a point set, the basis columns are recombined.
    pub fn apply_integer_transform(&self, t: &IMat) -> Result<Self> {
        if t.nrows() != self.d || t.ncols() != self.d {
            return Err(LatticeError::DimensionMismatch {
                expected: self.d,
                got: t.nrows().max(t.ncols()),
            });
        }
        assert_eq!(
            t.det().abs(),
            Integer::from(1),
            "basis transform must be unimodular"
        );
        match &self.provenance {
            Some(p) => {
                let mut p = p.clone();
                p.transform = p.transform.mul(t);
                Self::from_provenance(p, self.prec)
            }
            None => LatticeBasis::from_float_columns(self.cols.mul_imat(t)),
        }
    }

    /// LLL-reduces the basis (δ = 0.99). Returns the reduced lattice and the
    /// unimodular transform that was applied. Reduction decisions run in
    /// floats, the basis change is exact.
    pub fn reduce(&self) -> Result<(Self, IMat)> {
        let t = lll_float_transform(&self.cols, 0.99);
        let reduced = self.apply_integer_transform(&t)?;
        Ok((reduced, t))
    }

    /// The lattice vector with the given integer coordinates, at the
    /// published precision.
    pub fn vector(&self, coords: &[Integer]) -> Vec<BigReal> {
        assert_eq!(coords.len(), self.d);
        (0..self.d)
            .map(|i| {
                let mut acc = BigReal::with_val(self.prec, 0);
                for (j, c) in coords.iter().enumerate() {
                    acc += BigReal::with_val(self.prec, self.cols.get(i, j) * c);
                }
                acc
            })
            .collect()
    }

    /// Euclidean norm of the lattice vector with the given coordinates.
    pub fn vector_norm(&self, coords: &[Integer]) -> BigReal {
        let v = self.vector(coords);
        let mut acc = BigReal::with_val(self.prec, 0);
        for x in &v {
            acc += BigReal::with_val(self.prec, x * x);
        }
        acc.sqrt()
    }

    /// Exact Gram determinant, available when the lattice is rational and has
    /// seen neither flows nor normalization.
    pub fn exact_gram_det(&self) -> Option<Rational> {
        let p = self.provenance.as_ref()?;
        if p.normalize || p.diag_log.iter().any(|l| l.cmp0() != Ordering::Equal) {
            return None;
        }
        let g = p.rational_columns()?;
        let b = g.mul(&QMat::from_imat(&p.transform));
        Some(b.transpose().mul(&b).det())
    }

    /// LLL-preconditioned setup shared by the enumeration entry points.
    fn enum_prep(&self) -> Result<EnumPrep> {
        if self.d > MAX_ENUM_DIM {
            return Err(LatticeError::UnsupportedDimension(self.d));
        }
        let pw = self.prec + GUARD_BITS;
        let base = match &self.provenance {
            Some(p) => materialize(p, pw)?,
            None => self.cols.at_prec(pw),
        };
        let t = lll_float_transform(&base, 0.99);
        let red = base.mul_imat(&t);
        let chol = red.cholesky_of_gram().ok_or(LatticeError::SingularBasis)?;
        Ok(EnumPrep { pw, base, t, red, chol })
    }

    /// Enumerates the ball of squared radius `radius_sq` (in reduced
    /// coordinates), maps to original-basis coordinates, canonicalizes signs,
    /// dedupes, and sorts by (norm, lex). Norms are recomputed from the
    /// materialized basis at guard precision.
    fn candidates_in_ball(
        &self,
        prep: &EnumPrep,
        radius_sq: &BigReal,
    ) -> Result<Vec<(BigReal, Vec<Integer>)>> {
        let pw = prep.pw;
        let coords = enumerate_ball(&prep.chol, radius_sq)?;
        let mut seen = std::collections::BTreeSet::new();
        let mut cands: Vec<(BigReal, Vec<Integer>)> = Vec::new();
        for x in &coords {
            let mut orig: Vec<Integer> = (0..self.d)
                .map(|i| {
                    let mut acc = Integer::new();
                    for (k, xv) in x.iter().enumerate() {
                        acc += Integer::from(prep.t.get(i, k) * Integer::from(*xv));
                    }
                    acc
                })
                .collect();
            canonical_sign(&mut orig);
            if !seen.insert(orig.clone()) {
                continue;
            }
            let mut nsq = BigReal::with_val(pw, 0);
            for i in 0..self.d {
                let mut acc = BigReal::with_val(pw, 0);
                for (j, c) in orig.iter().enumerate() {
                    acc += BigReal::with_val(pw, prep.base.get(i, j) * c);
                }
                nsq += BigReal::with_val(pw, &acc * &acc);
            }
            cands.push((nsq, orig));
        }
        cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
        Ok(cands)
    }

    /// Length of a shortest nonzero lattice vector together with a canonical
    /// witness (coordinates on the current basis). Enumerates only the ball
    /// of the smallest reduced column norm — always enough for λ₁, and small
    /// even for extremely skew (deep-flow) lattices.
    pub fn shortest_vector(&self) -> Result<(BigReal, IntegerVector)> {
        let prep = self.enum_prep()?;
        let pw = prep.pw;
        let mut radius_sq = prep.red.col_norm_sq(0);
        for j in 1..self.d {
            let n = prep.red.col_norm_sq(j);
            if n < radius_sq {
                radius_sq = n;
            }
        }
        radius_sq *= BigReal::with_val(pw, 1) + big(pw, BigReal::i_exp(1, -32));
        let cands = self.candidates_in_ball(&prep, &radius_sq)?;
        let (nsq, coordv) = cands.first().ok_or(LatticeError::SingularBasis)?;
        Ok((
            BigReal::with_val(self.prec, nsq.clone().sqrt()),
            IntegerVector(coordv.clone()),
        ))
    }

    /// Successive minima λ₁ ≤ … ≤ λ_d with canonical independent witnesses,
    /// by Fincke–Pohst enumeration over an LLL-reduced basis, growing the
    /// search radius geometrically from the smallest to the largest reduced
    /// column norm (which always covers λ_d). Dimension ≤ 6.
    ///
    /// Note the λ_d-ball of a very skew lattice contains exponentially many
    /// points; this is inherent to full minima. Flows that only need the
    /// systole should call [`Self::shortest_vector`].
    pub fn successive_minima(&self) -> Result<MinimaReport> {
        let prep = self.enum_prep()?;
        let pw = prep.pw;
        let slack = BigReal::with_val(pw, 1) + big(pw, BigReal::i_exp(1, -32));
        let mut lo = prep.red.col_norm_sq(0);
        let mut hi = lo.clone();
        for j in 1..self.d {
            let n = prep.red.col_norm_sq(j);
            if n < lo {
                lo = n.clone();
            }
            if n > hi {
                hi = n;
            }
        }
        let cap_sq = BigReal::with_val(pw, &hi * &slack);
        let mut radius_sq = BigReal::with_val(pw, &lo * &slack);
        loop {
            let cands = self.candidates_in_ball(&prep, &radius_sq)?;
            // Greedy pick of independent witnesses realizes every minimum
            // whose ball is covered.
            let mut witnesses: Vec<Vec<Integer>> = Vec::new();
            let mut lambdas: Vec<BigReal> = Vec::new();
            for (nsq, coordv) in &cands {
                if witnesses.len() == self.d {
                    break;
                }
                let mut rows = witnesses.clone();
                rows.push(coordv.clone());
                let m = IMat::from_rows(rows);
                if m.rank() == witnesses.len() + 1 {
                    witnesses.push(coordv.clone());
                    lambdas.push(BigReal::with_val(self.prec, nsq.clone().sqrt()));
                }
            }
            if witnesses.len() == self.d {
                return Ok(MinimaReport {
                    lambdas,
                    witnesses: witnesses.into_iter().map(IntegerVector).collect(),
                    enumeration_radius: BigReal::with_val(self.prec, radius_sq.sqrt()),
                    precision_bits: self.prec,
                });
            }
            if radius_sq >= cap_sq {
                // Unreachable: the reduced columns themselves are d
                // independent vectors within the cap.
                return Err(LatticeError::EnumerationOverflow);
            }
            radius_sq = BigReal::with_val(pw, &radius_sq * BigReal::with_val(pw, 4));
            if radius_sq > cap_sq {
                radius_sq = cap_sq.clone();
            }
        }
    }
}

struct EnumPrep {
    pw: u32,
    base: RMat,
    t: IMat,
    red: RMat,
    chol: RMat,
}

/// Flips the sign so the first nonzero coordinate is positive.
fn canonical_sign(v: &mut [Integer]) {
    for x in v.iter() {
        match x.cmp0() {
            Ordering::Greater => return,
            Ordering::Less => break,
            Ordering::Equal => continue,
        }
    }
    for x in v.iter_mut() {
        *x = -x.clone();
    }
}

/// All nonzero integer vectors x with ‖R·x‖² ≤ bound, where R is upper
/// triangular with positive diagonal. Standard Fincke–Pohst recursion.
fn enumerate_ball(r: &RMat, bound: &BigReal) -> Result<Vec<Vec<i64>>> {
    let d = r.ncols();
    let prec = r.prec();
    let mut out = Vec::new();
    let mut x = vec![0i64; d];
    let mut nodes = 0usize;
    let slack = big(prec, BigReal::i_exp(1, -((prec / 2) as i32)));

    fn recurse(
        r: &RMat,
        slack: &BigReal,
        level: isize,
        x: &mut Vec<i64>,
        rem: BigReal,
        out: &mut Vec<Vec<i64>>,
        nodes: &mut usize,
    ) -> Result<()> {
        let prec = r.prec();
        if level < 0 {
            if x.iter().any(|&v| v != 0) {
                out.push(x.clone());
            }
            return Ok(());
        }
        let i = level as usize;
        *nodes += 1;
        if *nodes > 20_000_000 {
            return Err(LatticeError::EnumerationOverflow);
        }
        let rii = r.get(i, i);
        // c = (Σ_{j>i} R[i][j] x_j) / R[i][i]
        let mut partial = BigReal::with_val(prec, 0);
        for j in i + 1..r.ncols() {
            partial += BigReal::with_val(prec, r.get(i, j) * Integer::from(x[j]));
        }
        let c = BigReal::with_val(prec, &partial / rii);
        let radius = BigReal::with_val(prec, rem.clone().sqrt() / rii) + slack;
        let lo_f = BigReal::with_val(prec, -c.clone() - &radius).ceil();
        let hi_f = BigReal::with_val(prec, -c.clone() + &radius).floor();
        let lo = lo_f
            .to_integer()
            .and_then(|v| v.to_i64())
            .ok_or(LatticeError::EnumerationOverflow)?;
        let hi = hi_f
            .to_integer()
            .and_then(|v| v.to_i64())
            .ok_or(LatticeError::EnumerationOverflow)?;
        for xi in lo..=hi {
            let step = BigReal::with_val(prec, BigReal::with_val(prec, xi) + &c) * rii;
            let used = BigReal::with_val(prec, &step * &step);
            let new_rem = BigReal::with_val(prec, &rem - &used);
            // Slack: allow marginally negative remainders at the boundary.
            if new_rem < -BigReal::with_val(prec, slack) {
                continue;
            }
            let new_rem = if new_rem.is_sign_negative() {
                BigReal::with_val(prec, 0)
            } else {
                new_rem
            };
            x[i] = xi;
            recurse(r, slack, level - 1, x, new_rem, out, nodes)?;
            x[i] = 0;
        }
        Ok(())
    }

    recurse(
        r,
        &slack,
        d as isize - 1,
        &mut x,
        bound.clone(),
        &mut out,
        &mut nodes,
    )?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reports and serialization
// ---------------------------------------------------------------------------

/// An integer coordinate vector (on some stated lattice basis).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerVector(pub Vec<Integer>);

impl IntegerVector {
    pub fn coords(&self) -> &[Integer] {
        &self.0
    }
}

/// Successive minima λ₁ ≤ … ≤ λ_d with independent canonical witnesses.
/// λ₁ is the systole; `enumeration_radius` is the ball actually searched.
#[derive(Clone, Debug)]
pub struct MinimaReport {
    pub lambdas: Vec<BigReal>,
    pub witnesses: Vec<IntegerVector>,
    pub enumeration_radius: BigReal,
    pub precision_bits: u32,
}

impl MinimaReport {
    pub fn systole(&self) -> &BigReal {
        &self.lambdas[0]
    }
}

#[derive(Serialize, Deserialize)]
struct LatticeBasisWire {
    d: usize,
    basis_columns: Vec<Vec<String>>,
    precision_bits: u32,
}

impl Serialize for LatticeBasis {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = LatticeBasisWire {
            d: self.d,
            basis_columns: (0..self.d)
                .map(|j| {
                    (0..self.d)
                        .map(|i| self.cols.get(i, j).to_string_radix(10, None))
                        .collect()
                })
                .collect(),
            precision_bits: self.prec,
        };
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LatticeBasis {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = LatticeBasisWire::deserialize(deserializer)?;
        if wire.d < 2 {
            return Err(D::Error::custom("lattice dimension must be at least 2"));
        }
        if wire.basis_columns.len() != wire.d
            || wire.basis_columns.iter().any(|c| c.len() != wire.d)
        {
            return Err(D::Error::custom("basis_columns must be a d×d array"));
        }
        let prec = wire.precision_bits;
        let mut cols = RMat::zeros(prec, wire.d, wire.d);
        for (j, col) in wire.basis_columns.iter().enumerate() {
            for (i, s) in col.iter().enumerate() {
                let parsed = BigReal::parse(s)
                    .map_err(|e| D::Error::custom(format!("bad float {s:?}: {e}")))?;
                cols.set(i, j, BigReal::with_val(prec, parsed));
            }
        }
        LatticeBasis::from_float_columns(cols).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Reference implementation for tests: successive minima by brute force over
/// the coordinate box |x_i| ≤ box_bound. Valid whenever the true witnesses
/// fit in the box.
pub fn brute_force_minima(basis: &LatticeBasis, box_bound: i64) -> MinimaReport {
    let d = basis.dim();
    let prec = basis.precision();
    let mut cands: Vec<(BigReal, Vec<Integer>)> = Vec::new();
    let mut x = vec![0i64; d];
    loop {
        if x.iter().any(|&v| v != 0) {
            let mut coords: Vec<Integer> = x.iter().map(|&v| Integer::from(v)).collect();
            canonical_sign(&mut coords);
            let n = basis.vector_norm(&coords);
            cands.push((BigReal::with_val(prec, &n * &n), coords));
        }
        // Odometer over the box.
        let mut k = 0;
        loop {
            if k == d {
                break;
            }
            x[k] += 1;
            if x[k] > box_bound {
                x[k] = -box_bound;
                k += 1;
            } else {
                break;
            }
        }
        if k == d {
            break;
        }
    }
    cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    cands.dedup_by(|a, b| a.1 == b.1);
    let mut witnesses: Vec<Vec<Integer>> = Vec::new();
    let mut lambdas = Vec::new();
    for (nsq, coordv) in &cands {
        if witnesses.len() == d {
            break;
        }
        let mut rows = witnesses.clone();
        rows.push(coordv.clone());
        if IMat::from_rows(rows).rank() == witnesses.len() + 1 {
            witnesses.push(coordv.clone());
            lambdas.push(BigReal::with_val(prec, nsq.clone().sqrt()));
        }
    }
    MinimaReport {
        lambdas,
        witnesses: witnesses.into_iter().map(IntegerVector).collect(),
        enumeration_radius: BigReal::with_val(prec, box_bound),
        precision_bits: prec,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Scalar;

    fn rat(n: i64, d: i64) -> Scalar {
        Scalar::Rational(Rational::from((n, d)))
    }

    fn diag_lattice(entries: &[(i64, i64)], prec: u32) -> LatticeBasis {
        let d = entries.len();
        let cols = (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| if i == j { rat(entries[j].0, entries[j].1) } else { rat(0, 1) })
                    .collect()
            })
            .collect();
        LatticeBasis::from_exact_columns(cols, prec).unwrap()
    }

    #[test]
    fn standard_lattice_minima_are_one() {
        for d in 2..=5 {
            let l = LatticeBasis::standard(d, 128).unwrap();
            let rep = l.successive_minima().unwrap();
            for lam in &rep.lambdas {
                assert_eq!(*lam, BigReal::with_val(128, 1), "d = {d}");
            }
            // Witnesses are signed unit vectors in canonical form.
            for w in &rep.witnesses {
                let nonzero: Vec<&Integer> =
                    w.coords().iter().filter(|c| c.cmp0() != Ordering::Equal).collect();
                assert_eq!(nonzero.len(), 1);
                assert_eq!(*nonzero[0], Integer::from(1));
            }
        }
    }

    #[test]
    fn diagonal_lattice_minima_and_dual() {
        let l = diag_lattice(&[(2, 1), (1, 2), (1, 1)], 192);
        let rep = l.successive_minima().unwrap();
        let expect = [0.5f64, 1.0, 2.0];
        for (lam, e) in rep.lambdas.iter().zip(expect) {
            let err = BigReal::with_val(192, lam - BigReal::with_val(192, e)).abs();
            assert!(err < BigReal::with_val(64, 1e-40), "{lam} vs {e}");
        }

        let dual = l.dual().unwrap();
        // diag(2, 1/2, 1) dualizes to diag(1/2, 2, 1).
        let expect_dual = [0.5f64, 2.0, 1.0];
        for (j, e) in expect_dual.iter().enumerate() {
            let err = BigReal::with_val(192, dual.columns().get(j, j) - BigReal::with_val(192, *e))
                .abs();
            assert!(err < BigReal::with_val(64, 1e-40));
        }

        // dual ∘ dual returns to the original within 2^(−P/2).
        let dd = dual.dual().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let err =
                    BigReal::with_val(192, dd.columns().get(i, j) - l.columns().get(i, j)).abs();
                assert!(err < half_ulp_tolerance(192));
            }
        }
    }

    #[test]
    fn normalization_reaches_unit_covolume() {
        let l = diag_lattice(&[(2, 1), (1, 2), (4, 1)], 160);
        let n = l.normalize_covolume().unwrap();
        let det = n.det().abs();
        let err = BigReal::with_val(160, det - BigReal::with_val(160, 1)).abs();
        assert!(err < half_ulp_tolerance(160));
        // Provenance survived: re-materializing at higher precision is exact.
        assert!(n.provenance().is_some());
        let hi = n.at_precision(320).unwrap();
        let err = BigReal::with_val(320, hi.det().abs() - BigReal::with_val(320, 1)).abs();
        assert!(err < half_ulp_tolerance(320));
    }

    #[test]
    fn flow_on_standard_lattice_contracts_systole() {
        let l = LatticeBasis::standard(3, 256).unwrap();
        let t = Rational::from(5);
        let flowed = l
            .apply_diag(&[-t.clone(), Rational::new(), t.clone()])
            .unwrap();
        let (sys, wit) = flowed.shortest_vector().unwrap();
        let expect = BigReal::with_val(256, -5).exp();
        let rel = BigReal::with_val(256, &sys - &expect).abs() / expect;
        assert!(rel < BigReal::with_val(64, 1e-60), "systole {sys}");
        assert_eq!(wit.coords(), &[Integer::from(1), Integer::new(), Integer::new()]);
    }

    #[test]
    fn reduce_preserves_gram_det_exactly() {
        let cols = vec![
            vec![rat(1, 1), rat(0, 1), rat(0, 1)],
            vec![rat(1000, 1), rat(1, 1), rat(0, 1)],
            vec![rat(999, 1), rat(998, 1), rat(1, 1)],
        ];
        let l = LatticeBasis::from_exact_columns(cols, 160).unwrap();
        let before = l.exact_gram_det().unwrap();
        let (red, t) = l.reduce().unwrap();
        assert_eq!(t.det().clone().abs(), Integer::from(1));
        let after = red.exact_gram_det().unwrap();
        assert_eq!(before, after);
        // And the reduced columns really are shorter.
        assert!(red.columns().col_norm_sq(2) < l.columns().col_norm_sq(2));
    }

    #[test]
    fn enumeration_agrees_with_brute_force() {
        // A few fixed integer lattices; the randomized sweep lives in the
        // integration suite.
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![1, 0, 0], vec![2, 3, 0], vec![4, 5, 6]],
            vec![vec![2, 1, 1], vec![1, 2, 0], vec![0, 1, 3]],
            vec![vec![5, 0, 0], vec![0, 3, 0], vec![1, 1, 1]],
        ];
        for cols in cases {
            let exact: Vec<Vec<Scalar>> = cols
                .iter()
                .map(|c| c.iter().map(|&v| rat(v, 1)).collect())
                .collect();
            let l = LatticeBasis::from_exact_columns(exact, 128).unwrap();
            let fast = l.successive_minima().unwrap();
            let slow = brute_force_minima(&l, 20);
            for (a, b) in fast.lambdas.iter().zip(slow.lambdas.iter()) {
                let err = BigReal::with_val(128, a - b).abs();
                assert!(err < BigReal::with_val(64, 1e-30), "λ mismatch {a} vs {b}");
            }
        }
    }

    #[test]
    fn shear_lattice_exact_gram_and_json_roundtrip() {
        let sqrt2 = Scalar::sqrt_rational(&Rational::from(2)).unwrap();
        let cols = vec![
            vec![Scalar::one(), sqrt2.clone(), Scalar::Rational(Rational::from((3, 2)))],
            vec![Scalar::zero(), Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
        ];
        let l = LatticeBasis::from_exact_columns(cols, 192).unwrap();
        // Unimodular shear: float det must be 1 to working accuracy.
        let err = BigReal::with_val(192, l.det() - BigReal::with_val(192, 1)).abs();
        assert!(err < half_ulp_tolerance(192));
        // Algebraic entries: no exact rational Gram available.
        assert!(l.exact_gram_det().is_none());

        let json = serde_json::to_string(&l).unwrap();
        let back: LatticeBasis = serde_json::from_str(&json).unwrap();
        assert_eq!(back.dim(), 3);
        assert_eq!(back.precision(), 192);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.columns().get(i, j), l.columns().get(i, j));
            }
        }
    }

    #[test]
    fn dimension_guards() {
        assert!(matches!(
            LatticeBasis::standard(1, 64),
            Err(LatticeError::DimensionTooSmall(1))
        ));
        let l = LatticeBasis::standard(7, 64);
        assert!(l.is_ok());
        assert!(matches!(
            l.unwrap().successive_minima(),
            Err(LatticeError::UnsupportedDimension(7))
        ));
    }

    #[test]
    fn embedding_generator_materializes() {
        // Q(√2) with basis {1, √2}: embedding matrix [[1, √2], [1, −√2]].
        let minpoly = IntPoly::from_descending_i64(&[1, 0, -2]);
        let elements = vec![
            vec![Rational::from(1), Rational::new()],
            vec![Rational::new(), Rational::from(1)],
        ];
        let prov = Provenance::plain(Generators::Embedding { minpoly, elements });
        let l = LatticeBasis::from_provenance(prov, 160).unwrap();
        let s2 = BigReal::with_val(160, 2).sqrt();
        // Roots ordered ascending: −√2 first.
        let expect = [
            [BigReal::with_val(160, 1), BigReal::with_val(160, -&s2)],
            [BigReal::with_val(160, 1), s2.clone()],
        ];
        for i in 0..2 {
            for j in 0..2 {
                let err = BigReal::with_val(160, l.columns().get(i, j) - &expect[i][j]).abs();
                assert!(err < BigReal::with_val(64, 1e-40), "({i},{j})");
            }
        }
        // |det| = 2^(−s)·√|disc| = √8 for disc(Z[√2]) = 8.
        let det = l.det().abs();
        let expect_det = BigReal::with_val(160, 8).sqrt();
        let err = BigReal::with_val(160, det - expect_det).abs();
        assert!(err < BigReal::with_val(64, 1e-40));
    }
}
