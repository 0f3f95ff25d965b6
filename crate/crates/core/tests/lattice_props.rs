//! Integration properties of the lattice kernel: exact unit systoles of the
//! standard lattices, the dual involution on random integer bases, and
//! certified enumeration checked against the brute-force reference.

use diagorbit::arith::Scalar;
use diagorbit::lattice::{brute_force_minima, LatticeBasis};
use diagorbit::{BigReal, Integer, Rational};

const P: u32 = 192;

fn big(prec: u32, x: f64) -> BigReal {
    BigReal::with_val(prec, x)
}

fn tol_half(prec: u32) -> BigReal {
    big(prec, 1.0) >> (prec / 2)
}

/// splitmix64: a tiny deterministic stream so the "random" bases are frozen
/// forever (library RNGs may reshuffle across versions).
struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next() % span) as i64
    }
}

fn det3(m: &[[i64; 3]; 3]) -> i64 {
    // m[j] is column j.
    m[0][0] * (m[1][1] * m[2][2] - m[2][1] * m[1][2])
        - m[1][0] * (m[0][1] * m[2][2] - m[2][1] * m[0][2])
        + m[2][0] * (m[0][1] * m[1][2] - m[1][1] * m[0][2])
}

/// Random nonsingular 3×3 integer matrix, entries in [−bound, bound],
/// returned both as exact scalar columns and as raw entries (column-major).
fn random_integer_columns(rng: &mut Rng, bound: i64) -> (Vec<Vec<Scalar>>, [[i64; 3]; 3]) {
    loop {
        let mut m = [[0i64; 3]; 3];
        for col in m.iter_mut() {
            for e in col.iter_mut() {
                *e = rng.int_in(-bound, bound);
            }
        }
        if det3(&m) != 0 {
            let cols = m
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|&e| Scalar::Rational(Rational::from(e)))
                        .collect()
                })
                .collect();
            return (cols, m);
        }
    }
}

/// Exact squared norm of B·c for an integer matrix B (column-major) and
/// integer coefficients c.
fn exact_norm_sq(m: &[[i64; 3]; 3], coords: &[Integer]) -> Integer {
    let mut acc = Integer::new();
    for i in 0..3 {
        let mut row = Integer::new();
        for (j, c) in coords.iter().enumerate() {
            row += Integer::from(c * m[j][i]);
        }
        acc += row.square();
    }
    acc
}

#[test]
fn standard_lattices_have_unit_systole_exactly() {
    for d in 2..=5usize {
        let l = LatticeBasis::standard(d, P).unwrap();
        let (len, witness) = l.shortest_vector().unwrap();
        assert!(len == big(P, 1.0), "systole of Z^{d} must be exactly 1");
        // The witness is a signed standard basis vector.
        let nonzero: Vec<&Integer> = witness.coords().iter().filter(|c| **c != 0).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(Integer::from(nonzero[0].abs_ref()), 1);

        let rep = l.successive_minima().unwrap();
        assert_eq!(rep.lambdas.len(), d);
        for lam in &rep.lambdas {
            assert!(*lam == big(P, 1.0), "every minimum of Z^{d} is exactly 1");
        }
        assert_eq!(rep.precision_bits, P);
        // The d witnesses are independent signed unit vectors.
        for w in &rep.witnesses {
            let support: Vec<&Integer> = w.coords().iter().filter(|c| **c != 0).collect();
            assert_eq!(support.len(), 1);
        }
    }
}

#[test]
fn dual_is_an_involution_and_pairs_to_the_identity() {
    let mut rng = Rng(0x1a77_1ce5_d0a1_0001);
    let tol = tol_half(P);
    for _ in 0..50 {
        let (cols, _) = random_integer_columns(&mut rng, 5);
        let l = LatticeBasis::from_exact_columns(cols, P).unwrap();
        let dual = l.dual().unwrap();
        let dd = dual.dual().unwrap();

        // dual∘dual returns the original basis entrywise.
        for i in 0..3 {
            for j in 0..3 {
                let diff = BigReal::with_val(P, dd.columns().get(i, j) - l.columns().get(i, j))
                    .abs();
                assert!(diff <= tol, "dual∘dual drifted by {diff} at ({i},{j})");
            }
        }

        // Bᵀ·(dual columns) is the identity: the defining pairing.
        let pairing = l.columns().transpose().mul(dual.columns());
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                let diff = BigReal::with_val(P, pairing.get(i, j) - big(P, expect)).abs();
                assert!(diff <= tol, "pairing off by {diff} at ({i},{j})");
            }
        }

        // Covolumes multiply to ±1.
        let prod = BigReal::with_val(P, l.det() * dual.det()).abs();
        let diff = BigReal::with_val(P, prod - big(P, 1.0)).abs();
        assert!(diff <= tol, "det·det* = 1 violated by {diff}");
    }
}

#[test]
fn enumeration_matches_brute_force_on_random_bases() {
    let mut rng = Rng(0x1a77_1ce5_d0a1_0002);
    let tol = tol_half(P);
    for case in 0..50 {
        let (cols, m) = random_integer_columns(&mut rng, 4);
        let l = LatticeBasis::from_exact_columns(cols, P).unwrap();
        let rep = l.successive_minima().unwrap();
        let brute = brute_force_minima(&l, 20);

        for k in 0..3 {
            // The certified witnesses must fit inside the brute-force box,
            // otherwise the reference comparison would be meaningless.
            for c in rep.witnesses[k].coords() {
                assert!(
                    Integer::from(c.abs_ref()) <= 20,
                    "case {case}: witness coefficient {c} escapes the box"
                );
            }
            // Integer-exact agreement of the squared minima.
            let enum_sq = exact_norm_sq(&m, rep.witnesses[k].coords());
            let brute_sq = exact_norm_sq(&m, brute.witnesses[k].coords());
            assert_eq!(
                enum_sq, brute_sq,
                "case {case}: minimum {k} disagrees: {enum_sq} vs {brute_sq}"
            );
            // And the certified float agrees with the exact value.
            let exact_len = BigReal::with_val(P, &enum_sq).sqrt();
            let diff = BigReal::with_val(P, &rep.lambdas[k] - &exact_len).abs();
            let scale = big(P, 1.0) + &exact_len;
            assert!(
                diff <= (tol.clone() * scale),
                "case {case}: λ_{k} drifted from the exact length by {diff}"
            );
        }
    }
}
