//! Matrix kernels in three arithmetic flavors.
//!
//! * [`IMat`] — arbitrary-size integers: Bareiss determinants, column-style
//!   Hermite normal form with unimodular transform, kernel bases,
//!   unimodular completion of a primitive vector, and an exact LLL (rational
//!   Gram–Schmidt) for relation lattices.
//! * [`QMat`] — exact rationals: reduced row echelon, rank, solve, inverse,
//!   kernel. Used wherever a decision must be exact.
//! * [`RMat`] — MPFR floats at a caller-chosen uniform precision: products,
//!   inverses, Gram matrices, Cholesky, and a floating LLL that reports its
//!   column operations as an exact integer transform (so reduction decisions
//!   may be heuristic, but the resulting basis change never is).

use std::cmp::Ordering;

use rug::ops::DivRounding;
use serde::{Deserialize, Serialize};

use crate::arith::{BigReal, Integer, Rational};

// ---------------------------------------------------------------------------
// Integer matrices
// ---------------------------------------------------------------------------

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IMat {
    rows: usize,
    cols: usize,
    data: Vec<Integer>,
}

impl std::fmt::Debug for IMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "IMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat {
            rows,
            cols,
            data: vec![Integer::new(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Integer::from(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Integer>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        IMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Integer) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        IMat { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Integer {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Integer) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<Integer> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> &[Integer] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> IMat {
        IMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        IMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Integer::new();
            for k in 0..self.cols {
                acc += Integer::from(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IMat::identity(self.rows)
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j).clone();
            self.set(i, j, v);
        }
    }

    /// col_dst -= q · col_src
    fn submul_col(&mut self, dst: usize, src: usize, q: &Integer) {
        if q.cmp0() == Ordering::Equal {
            return;
        }
        for i in 0..self.rows {
            let sub = Integer::from(self.get(i, src) * q);
            let v = self.get(i, dst).clone() - sub;
            self.set(i, dst, v);
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Integer {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Integer::from(1);
        }
        let mut m: Vec<Vec<Integer>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut prev = Integer::from(1);
        let mut sign = 1i32;
        for k in 0..n - 1 {
            if m[k][k].cmp0() == Ordering::Equal {
                match (k + 1..n).find(|&i| m[i][k].cmp0() != Ordering::Equal) {
                    Some(i) => {
                        m.swap(k, i);
                        sign = -sign;
                    }
                    None => return Integer::new(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let a = Integer::from(&m[i][j] * &m[k][k]);
                    let b = Integer::from(&m[i][k] * &m[k][j]);
                    let num = a - b;
                    debug_assert!(num.is_divisible(&prev));
                    m[i][j] = num / &prev;
                }
            }
            prev = m[k][k].clone();
        }
        let mut d = m[n - 1][n - 1].clone();
        if sign < 0 {
            d = -d;
        }
        d
    }

    /// Column-style Hermite normal form: returns (H, U, rank) with
    /// H = self · U, U unimodular. Pivot columns come first with strictly
    /// increasing pivot rows; pivots are positive; entries to the left of a
    /// pivot (same row, earlier columns) are reduced into [0, pivot); columns
    /// beyond the rank are zero. Deterministic.
    pub fn hnf_columns(&self) -> (IMat, IMat, usize) {
        let mut h = self.clone();
        let mut u = IMat::identity(self.cols);
        let mut pc = 0usize;
        for r in 0..self.rows {
            if pc == self.cols {
                break;
            }
            let Some(j0) = (pc..self.cols).find(|&j| h.get(r, j).cmp0() != Ordering::Equal) else {
                continue;
            };
            h.swap_cols(pc, j0);
            u.swap_cols(pc, j0);
            // Clear the rest of row r (columns > pc) by Euclidean column ops.
            for j in pc + 1..self.cols {
                while h.get(r, j).cmp0() != Ordering::Equal {
                    if h.get(r, pc).cmp0() == Ordering::Less {
                        h.negate_col(pc);
                        u.negate_col(pc);
                    }
                    let q = Integer::from(h.get(r, j)).div_floor(h.get(r, pc));
                    h.submul_col(j, pc, &q);
                    u.submul_col(j, pc, &q);
                    if h.get(r, j).cmp0() != Ordering::Equal {
                        h.swap_cols(pc, j);
                        u.swap_cols(pc, j);
                    }
                }
            }
            if h.get(r, pc).cmp0() == Ordering::Less {
                h.negate_col(pc);
                u.negate_col(pc);
            }
            // Canonical reduction of earlier columns in this pivot row.
            for j in 0..pc {
                let q = Integer::from(h.get(r, j)).div_floor(h.get(r, pc));
                h.submul_col(j, pc, &q);
                u.submul_col(j, pc, &q);
            }
            pc += 1;
        }
        (h, u, pc)
    }

    /// Basis of the integer kernel lattice {x ∈ Z^cols : self·x = 0}
    /// (saturated: a direct summand of Z^cols).
    pub fn kernel(&self) -> Vec<Vec<Integer>> {
        let (_, u, rank) = self.hnf_columns();
        (rank..self.cols).map(|j| u.col(j)).collect()
    }

    /// Exact rank.
    pub fn rank(&self) -> usize {
        self.hnf_columns().2
    }
}

/// Extended gcd: returns (g, x, y) with g = gcd(a, b) ≥ 0 and a·x + b·y = g.
pub fn ext_gcd(a: &Integer, b: &Integer) -> (Integer, Integer, Integer) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut x0, mut x1) = (Integer::from(1), Integer::new());
    let (mut y0, mut y1) = (Integer::new(), Integer::from(1));
    while r1.cmp0() != Ordering::Equal {
        let (q, r) = r0.clone().div_rem(r1.clone());
        r0 = std::mem::replace(&mut r1, r);
        let x2 = x0 - Integer::from(&q * &x1);
        x0 = std::mem::replace(&mut x1, x2);
        let y2 = y0 - Integer::from(&q * &y1);
        y0 = std::mem::replace(&mut y1, y2);
    }
    if r0.cmp0() == Ordering::Less {
        (-r0, -x0, -y0)
    } else {
        (r0, x0, y0)
    }
}

/// Completes a primitive integer vector (gcd of entries = 1) to a matrix in
/// SL_d(Z) whose first column is the vector. Panics on non-primitive input.
pub fn complete_unimodular(v: &[Integer]) -> IMat {
    let d = v.len();
    assert!(d >= 1);
    // Row-reduce v to e₁ by det-one two-row operations, maintaining the
    // inverse transform by the corresponding column operations.
    let mut w: Vec<Integer> = v.to_vec();
    let mut inv = IMat::identity(d);
    for i in 1..d {
        if w[i].cmp0() == Ordering::Equal {
            continue;
        }
        let (g, a, b) = ext_gcd(&w[0], &w[i]);
        let p = Integer::from(&w[0] / &g);
        let q = Integer::from(&w[i] / &g);
        // Rows transform by E = [[a, b], [−q, p]] (det 1) acting on (0, i);
        // columns of the inverse take E⁻¹ = [[p, −b], [q, a]] on (0, i).
        for r in 0..d {
            let c0 = inv.get(r, 0).clone();
            let ci = inv.get(r, i).clone();
            inv.set(r, 0, Integer::from(&c0 * &p) + Integer::from(&ci * &q));
            inv.set(r, i, Integer::from(&ci * &a) - Integer::from(&c0 * &b));
        }
        w[0] = g;
        w[i] = Integer::new();
    }
    if w[0].cmp0() == Ordering::Less {
        // Only reachable when every other entry was zero (e.g. v = −e₁):
        // negate two columns to stay in SL_d.
        assert!(d >= 2, "cannot complete a negative unit in dimension 1");
        w[0] = -w[0].clone();
        inv.negate_col(0);
        inv.negate_col(1);
    }
    assert!(
        w[0] == Integer::from(1),
        "complete_unimodular requires a primitive vector (gcd = {})",
        w[0]
    );
    debug_assert_eq!(inv.col(0), v);
    debug_assert_eq!(inv.det(), Integer::from(1));
    inv
}

/// Exact LLL reduction (δ given as a rational) of the given generator rows,
/// which must be linearly independent. Rational Gram–Schmidt throughout; the
/// returned rows span the same lattice.
pub fn lll_integer_rows(mut basis: Vec<Vec<Integer>>, delta: &Rational) -> Vec<Vec<Integer>> {
    let n = basis.len();
    if n <= 1 {
        return basis;
    }
    let m = basis[0].len();
    assert!(basis.iter().all(|r| r.len() == m), "ragged rows");

    // Gram–Schmidt data over Q, recomputed incrementally.
    let mut mu = vec![vec![Rational::new(); n]; n];
    let mut bnorm = vec![Rational::new(); n]; // ‖b*_i‖²
    let compute_gs = |basis: &Vec<Vec<Integer>>, mu: &mut Vec<Vec<Rational>>, bnorm: &mut Vec<Rational>| {
        let n = basis.len();
        // b*_i · b*_j bookkeeping via the standard recurrences.
        let mut star: Vec<Vec<Rational>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v: Vec<Rational> = basis[i].iter().map(Rational::from).collect();
            for j in 0..i {
                let bj = &star[j];
                let num = {
                    let mut acc = Rational::new();
                    for (x, y) in basis[i].iter().zip(bj.iter()) {
                        acc += Rational::from(y * &Rational::from(x));
                    }
                    acc
                };
                mu[i][j] = if bnorm[j].cmp0() == Ordering::Equal {
                    Rational::new()
                } else {
                    num / bnorm[j].clone()
                };
                for (vk, bk) in v.iter_mut().zip(bj.iter()) {
                    let sub = Rational::from(&mu[i][j] * bk);
                    *vk -= sub;
                }
            }
            bnorm[i] = {
                let mut acc = Rational::new();
                for x in &v {
                    acc += Rational::from(x * x);
                }
                acc
            };
            assert!(
                bnorm[i].cmp0() == Ordering::Greater,
                "lll_integer_rows requires linearly independent rows"
            );
            star.push(v);
        }
    };

    compute_gs(&basis, &mut mu, &mut bnorm);
    let mut k = 1usize;
    while k < n {
        // Size-reduce row k against rows k−1 … 0.
        for j in (0..k).rev() {
            let r = round_rational(&mu[k][j]);
            if r.cmp0() != Ordering::Equal {
                for idx in 0..m {
                    let sub = Integer::from(&basis[j][idx] * &r);
                    basis[k][idx] -= sub;
                }
                compute_gs(&basis, &mut mu, &mut bnorm);
            }
        }
        // Lovász condition.
        let lhs = bnorm[k].clone();
        let mu2 = Rational::from(&mu[k][k - 1] * &mu[k][k - 1]);
        let rhs = (delta.clone() - mu2) * bnorm[k - 1].clone();
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            compute_gs(&basis, &mut mu, &mut bnorm);
            k = k.max(2) - 1;
        }
    }
    basis
}

/// Nearest integer to a rational, ties to even.
pub fn round_rational(r: &Rational) -> Integer {
    let (q, rem) = r.numer().clone().div_rem_floor(r.denom().clone());
    let twice_rem = Integer::from(2) * &rem;
    match twice_rem.cmp(r.denom()) {
        Ordering::Less => q,
        Ordering::Greater => q + 1u32,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1u32
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Rational matrices
// ---------------------------------------------------------------------------

/// Dense rational matrix, row-major. All operations exact.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat {
            rows,
            cols,
            data: vec![Rational::new(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::from(1));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |v| v.len());
        assert!(rows.iter().all(|v| v.len() == c), "ragged rows");
        QMat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_imat(m: &IMat) -> Self {
        QMat::from_fn(m.nrows(), m.ncols(), |i, j| Rational::from(m.get(i, j)))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMat { rows, cols, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        QMat::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Rational::new();
            for k in 0..self.cols {
                acc += Rational::from(self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    /// In-place reduction to reduced row echelon form; returns pivot columns.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0usize;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c).cmp0() != Ordering::Equal)
            else {
                continue;
            };
            for j in 0..self.cols {
                self.data.swap(r * self.cols + j, pr * self.cols + j);
            }
            let inv = Rational::from(self.get(r, c).recip_ref());
            for j in c..self.cols {
                let v = Rational::from(self.get(r, j) * &inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).cmp0() == Ordering::Equal {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..self.cols {
                    let sub = Rational::from(self.get(r, j) * &f);
                    let v = self.get(i, j).clone() - sub;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Exact determinant (Gaussian elimination).
    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = Rational::from(1);
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| m.get(i, c).cmp0() != Ordering::Equal) else {
                return Rational::new();
            };
            if pr != c {
                for j in 0..n {
                    m.data.swap(c * n + j, pr * n + j);
                }
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            for i in c + 1..n {
                if m.get(i, c).cmp0() == Ordering::Equal {
                    continue;
                }
                let f = Rational::from(m.get(i, c) / &pivot);
                for j in c..n {
                    let sub = Rational::from(m.get(c, j) * &f);
                    let v = m.get(i, j).clone() - sub;
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// Solves self · x = b exactly; None if inconsistent. When the system is
    /// underdetermined the free variables are set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = QMat::from_fn(self.rows, self.cols + 1, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                b[i].clone()
            }
        });
        let pivots = aug.rref();
        // Inconsistent if a pivot lands in the last column.
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::new(); self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    /// Exact inverse; None if singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = QMat::from_fn(n, 2 * n, |i, j| {
            if j < n {
                self.get(i, j).clone()
            } else if j - n == i {
                Rational::from(1)
            } else {
                Rational::new()
            }
        });
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
            return None;
        }
        Some(QMat::from_fn(n, n, |i, j| aug.get(i, n + j).clone()))
    }

    /// Basis of the right kernel {x : self·x = 0}.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![Rational::new(); self.cols];
            v[free] = Rational::from(1);
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = -m.get(r, free).clone();
            }
            basis.push(v);
        }
        basis
    }
}

// ---------------------------------------------------------------------------
// Floating matrices
// ---------------------------------------------------------------------------

/// Dense float matrix at a uniform precision, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct RMat {
    prec: u32,
    rows: usize,
    cols: usize,
    data: Vec<BigReal>,
}

impl RMat {
    pub fn zeros(prec: u32, rows: usize, cols: usize) -> Self {
        RMat {
            prec,
            rows,
            cols,
            data: vec![BigReal::with_val(prec, 0); rows * cols],
        }
    }

    pub fn identity(prec: u32, n: usize) -> Self {
        let mut m = Self::zeros(prec, n, n);
        for i in 0..n {
            m.set(i, i, BigReal::with_val(prec, 1));
        }
        m
    }

    pub fn from_fn(prec: u32, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigReal) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(BigReal::with_val(prec, f(i, j)));
            }
        }
        RMat { prec, rows, cols, data }
    }

    pub fn from_imat(prec: u32, m: &IMat) -> Self {
        RMat::from_fn(prec, m.nrows(), m.ncols(), |i, j| {
            BigReal::with_val(prec, m.get(i, j))
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigReal {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigReal) {
        self.data[i * self.cols + j] = BigReal::with_val(self.prec, v);
    }

    /// The same matrix converted to another precision (rounding entries).
    pub fn at_prec(&self, prec: u32) -> RMat {
        RMat::from_fn(prec, self.rows, self.cols, |i, j| {
            BigReal::with_val(prec, self.get(i, j))
        })
    }

    pub fn transpose(&self) -> RMat {
        RMat::from_fn(self.prec, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &RMat) -> RMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let p = self.prec.max(other.prec);
        RMat::from_fn(p, self.rows, other.cols, |i, j| {
            let mut acc = BigReal::with_val(p, 0);
            for k in 0..self.cols {
                acc += BigReal::with_val(p, self.get(i, k) * other.get(k, j));
            }
            acc
        })
    }

    /// self · T for an integer matrix T, at this matrix's precision.
    pub fn mul_imat(&self, t: &IMat) -> RMat {
        assert_eq!(self.cols, t.nrows(), "dimension mismatch");
        RMat::from_fn(self.prec, self.rows, t.ncols(), |i, j| {
            let mut acc = BigReal::with_val(self.prec, 0);
            for k in 0..self.cols {
                let term = BigReal::with_val(self.prec, self.get(i, k) * t.get(k, j));
                acc += term;
            }
            acc
        })
    }

    pub fn col(&self, j: usize) -> Vec<BigReal> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Multiplies every entry of row i by f.
    pub fn scale_row(&mut self, i: usize, f: &BigReal) {
        for j in 0..self.cols {
            let v = BigReal::with_val(self.prec, self.get(i, j) * f);
            self.set(i, j, v);
        }
    }

    /// Multiplies every entry by f.
    pub fn scale_all(&mut self, f: &BigReal) {
        for v in self.data.iter_mut() {
            let nv = BigReal::with_val(self.prec, &*v * f);
            *v = nv;
        }
    }

    pub fn col_norm_sq(&self, j: usize) -> BigReal {
        let mut acc = BigReal::with_val(self.prec, 0);
        for i in 0..self.rows {
            acc += BigReal::with_val(self.prec, self.get(i, j) * self.get(i, j));
        }
        acc
    }

    /// Gram matrix BᵀB of the columns.
    pub fn gram(&self) -> RMat {
        RMat::from_fn(self.prec, self.cols, self.cols, |i, j| {
            let mut acc = BigReal::with_val(self.prec, 0);
            for k in 0..self.rows {
                acc += BigReal::with_val(self.prec, self.get(k, i) * self.get(k, j));
            }
            acc
        })
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> BigReal {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = BigReal::with_val(self.prec, 1);
        for c in 0..n {
            let mut best = c;
            let mut best_abs = m.get(c, c).clone().abs();
            for i in c + 1..n {
                let a = m.get(i, c).clone().abs();
                if a > best_abs {
                    best_abs = a;
                    best = i;
                }
            }
            if best_abs.is_zero() {
                return BigReal::with_val(self.prec, 0);
            }
            if best != c {
                for j in 0..n {
                    m.data.swap(c * n + j, best * n + j);
                }
                det = -det;
            }
            let pivot = m.get(c, c).clone();
            det *= &pivot;
            for i in c + 1..n {
                let f = BigReal::with_val(self.prec, m.get(i, c) / &pivot);
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let sub = BigReal::with_val(self.prec, m.get(c, j) * &f);
                    let v = m.get(i, j).clone() - sub;
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan with partial pivoting; None when a pivot is
    /// exactly zero at this precision.
    pub fn inverse(&self) -> Option<RMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let p = self.prec;
        let mut a = self.clone();
        let mut inv = RMat::identity(p, n);
        for c in 0..n {
            let mut best = c;
            let mut best_abs = a.get(c, c).clone().abs();
            for i in c + 1..n {
                let v = a.get(i, c).clone().abs();
                if v > best_abs {
                    best_abs = v;
                    best = i;
                }
            }
            if best_abs.is_zero() {
                return None;
            }
            if best != c {
                for j in 0..n {
                    a.data.swap(c * n + j, best * n + j);
                    inv.data.swap(c * n + j, best * n + j);
                }
            }
            let pivot_inv = BigReal::with_val(p, a.get(c, c).clone().recip());
            for j in 0..n {
                let va = BigReal::with_val(p, a.get(c, j) * &pivot_inv);
                a.set(c, j, va);
                let vi = BigReal::with_val(p, inv.get(c, j) * &pivot_inv);
                inv.set(c, j, vi);
            }
            for i in 0..n {
                if i == c {
                    continue;
                }
                let f = a.get(i, c).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let sa = BigReal::with_val(p, a.get(c, j) * &f);
                    let va = a.get(i, j).clone() - sa;
                    a.set(i, j, va);
                    let si = BigReal::with_val(p, inv.get(c, j) * &f);
                    let vi = inv.get(i, j).clone() - si;
                    inv.set(i, j, vi);
                }
            }
        }
        Some(inv)
    }

    /// Upper-triangular Cholesky factor R of the Gram matrix of the columns
    /// (Gram = RᵀR); None if a pivot is nonpositive (numerically dependent
    /// columns).
    pub fn cholesky_of_gram(&self) -> Option<RMat> {
        let g = self.gram();
        let n = g.nrows();
        let p = self.prec;
        let mut r = RMat::zeros(p, n, n);
        for i in 0..n {
            let mut diag = g.get(i, i).clone();
            for k in 0..i {
                diag -= BigReal::with_val(p, r.get(k, i) * r.get(k, i));
            }
            if !(diag > BigReal::with_val(p, 0)) {
                return None;
            }
            let rii = diag.sqrt();
            r.set(i, i, rii.clone());
            for j in i + 1..n {
                let mut v = g.get(i, j).clone();
                for k in 0..i {
                    v -= BigReal::with_val(p, r.get(k, i) * r.get(k, j));
                }
                r.set(i, j, v / &rii);
            }
        }
        Some(r)
    }
}

/// Floating LLL (δ as f64, e.g. 0.99) on the columns of `basis`; returns the
/// unimodular integer transform T such that basis·T is the reduced basis.
/// Reduction decisions are made in floats, so the quality is heuristic, but
/// T is exact — callers apply it to exact generators and never accumulate
/// float error into the lattice itself.
pub fn lll_float_transform(basis: &RMat, delta: f64) -> IMat {
    let n = basis.ncols();
    let prec = basis.prec();
    let mut w = basis.clone();
    let mut t = IMat::identity(n);
    if n <= 1 {
        return t;
    }
    let delta_f = BigReal::with_val(prec, delta);

    // Full Gram–Schmidt recompute (small dimensions make this affordable and
    // it sidesteps incremental-update instability).
    let gs = |w: &RMat| -> (Vec<Vec<BigReal>>, Vec<BigReal>) {
        let mut mu = vec![vec![BigReal::with_val(prec, 0); n]; n];
        let mut bn = vec![BigReal::with_val(prec, 0); n];
        let mut star: Vec<Vec<BigReal>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = w.col(i);
            for j in 0..i {
                let mut num = BigReal::with_val(prec, 0);
                for (x, y) in w.col(i).iter().zip(star[j].iter()) {
                    num += BigReal::with_val(prec, x * y);
                }
                let m = if bn[j].is_zero() {
                    BigReal::with_val(prec, 0)
                } else {
                    BigReal::with_val(prec, &num / &bn[j])
                };
                for (vk, bk) in v.iter_mut().zip(star[j].iter()) {
                    let sub = BigReal::with_val(prec, &m * bk);
                    *vk -= sub;
                }
                mu[i][j] = m;
            }
            let mut norm = BigReal::with_val(prec, 0);
            for x in &v {
                norm += BigReal::with_val(prec, x * x);
            }
            bn[i] = norm;
            star.push(v);
        }
        (mu, bn)
    };

    let sub_col = |w: &mut RMat, dst: usize, src: usize, q: &Integer| {
        for i in 0..w.nrows() {
            let sub = BigReal::with_val(prec, w.get(i, src) * q);
            let v = w.get(i, dst).clone() - sub;
            w.set(i, dst, v);
        }
    };

    let (mut mu, mut bn) = gs(&w);
    let mut k = 1usize;
    let mut guard = 0usize;
    let guard_max = 64 * n * n * (prec as usize);
    while k < n {
        guard += 1;
        if guard > guard_max {
            break; // best-effort: T stays unimodular regardless
        }
        for j in (0..k).rev() {
            if let Some(q) = mu[k][j].clone().round().to_integer() {
                if q.cmp0() != Ordering::Equal {
                    sub_col(&mut w, k, j, &q);
                    t.submul_col(k, j, &q);
                    let r = gs(&w);
                    mu = r.0;
                    bn = r.1;
                }
            }
        }
        let mu2 = BigReal::with_val(prec, &mu[k][k - 1] * &mu[k][k - 1]);
        let rhs = BigReal::with_val(prec, &delta_f - &mu2) * &bn[k - 1];
        if bn[k] >= rhs {
            k += 1;
        } else {
            for i in 0..w.nrows() {
                let a = w.get(i, k).clone();
                let b = w.get(i, k - 1).clone();
                w.set(i, k - 1, a);
                w.set(i, k, b);
            }
            t.swap_cols(k, k - 1);
            let r = gs(&w);
            mu = r.0;
            bn = r.1;
            k = k.max(2) - 1;
        }
    }
    t
}
