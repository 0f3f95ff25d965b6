//! Integration properties of the number-field kernel: the geometric
//! embedding intertwines field multiplication with the ψ matrices, the
//! rational multiplication matrices form an exact algebra representation,
//! and bounded unit searches certify full rank with unit norms.

use diagorbit::arith::IntPoly;
use diagorbit::numberfield::{unit_search, KLattice, NumberField};
use diagorbit::{BigReal, FieldElement, Rational};

const P: u32 = 256;

fn big(prec: u32, x: f64) -> BigReal {
    BigReal::with_val(prec, x)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn tol128(prec: u32) -> BigReal {
    big(prec, 1.0) >> 128
}

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

/// The three reference fields: one totally real cubic companion, one mixed
/// cubic, one totally complex quartic.
fn fields() -> Vec<NumberField> {
    [
        &[1, 0, 0, -2][..],  // t³ − 2, signature (1, 1)
        &[1, 0, -3, -1][..], // t³ − 3t − 1, signature (3, 0)
        &[1, 0, 0, 0, 1][..], // t⁴ + 1, signature (0, 2)
    ]
    .iter()
    .map(|c| NumberField::new(IntPoly::from_descending_i64(c).unwrap()).unwrap())
    .collect()
}

fn random_element(rng: &mut Rng, f: &NumberField) -> FieldElement {
    let coords = (0..f.degree())
        .map(|_| q(rng.int_in(-9, 9), rng.int_in(1, 3)))
        .collect();
    f.element(coords).unwrap()
}

#[test]
fn psi_is_an_algebra_homomorphism_on_the_embedding() {
    let mut rng = Rng(0xf1e1_d000_0000_0001);
    let tol = tol128(P);
    for f in fields() {
        let d = f.degree();
        for _ in 0..30 {
            let x = random_element(&mut rng, &f);
            let y = random_element(&mut rng, &f);
            let psi_x = f.psi_matrix(&x, P).unwrap();
            let phi_y = f.geometric_embedding(&y, P).unwrap();
            let phi_xy = f.geometric_embedding(&f.mul(&x, &y), P).unwrap();
            for i in 0..d {
                let mut acc = big(P + 64, 0.0);
                for (j, e) in phi_y.iter().enumerate() {
                    acc += BigReal::with_val(P + 64, psi_x.get(i, j) * e);
                }
                let diff = BigReal::with_val(P, acc - &phi_xy[i]).abs();
                assert!(
                    diff <= tol,
                    "ψ(x)·φ(y) missed φ(xy) by {diff} in row {i}"
                );
            }
        }
        // ψ(1) is the identity.
        let psi_one = f.psi_matrix(&f.one(), P).unwrap();
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                let diff = BigReal::with_val(P, psi_one.get(i, j) - big(P, expect)).abs();
                assert!(diff <= tol);
            }
        }
    }
}

#[test]
fn psi_and_the_rational_multiplication_matrix_commute_through_the_embedding() {
    let mut rng = Rng(0xf1e1_d000_0000_0002);
    let tol = tol128(P);
    for f in fields() {
        let d = f.degree();
        let phi = f.embedding_matrix(&f.power_basis(), P).unwrap();
        for _ in 0..10 {
            let x = random_element(&mut rng, &f);
            let psi_x = f.psi_matrix(&x, P).unwrap();
            let mx = f.mult_matrix(&x);
            let mx_real = diagorbit::linalg::RMat::from_fn(P, d, d, |i, j| {
                BigReal::with_val(P, mx.get(i, j))
            });
            let lhs = psi_x.mul(&phi);
            let rhs = phi.mul(&mx_real);
            for i in 0..d {
                for j in 0..d {
                    let diff = BigReal::with_val(P, lhs.get(i, j) - rhs.get(i, j)).abs();
                    assert!(
                        diff <= tol,
                        "ψ(x)·Φ vs Φ·M_x differ by {diff} at ({i},{j})"
                    );
                }
            }
        }
    }
}

#[test]
fn rational_representation_is_exactly_multiplicative() {
    let mut rng = Rng(0xf1e1_d000_0000_0003);
    for f in fields() {
        let d = f.degree();
        for _ in 0..30 {
            let x = random_element(&mut rng, &f);
            let y = random_element(&mut rng, &f);
            // Norm and trace: exact rational identities.
            let nx = f.norm(&x);
            let ny = f.norm(&y);
            let nxy = f.norm(&f.mul(&x, &y));
            assert_eq!(nxy, Rational::from(&nx * &ny));
            let txy = f.trace(&f.add(&x, &y));
            assert_eq!(txy, Rational::from(f.trace(&x) + f.trace(&y)));
            // M_x·M_y = M_{xy}, entry by entry in exact rationals.
            let prod = f.mult_matrix(&x).mul(&f.mult_matrix(&y));
            let direct = f.mult_matrix(&f.mul(&x, &y));
            for i in 0..d {
                for j in 0..d {
                    assert_eq!(prod.get(i, j), direct.get(i, j));
                }
            }
        }
        assert_eq!(f.norm(&f.one()), Rational::from(1));
        assert_eq!(f.trace(&f.one()), Rational::from(f.degree() as i64));
    }
}

#[test]
fn bounded_unit_searches_reach_full_rank_with_unit_norms() {
    for f in fields() {
        let kl = KLattice::power_order(&f);
        let units = unit_search(&f, &kl, 6, P).unwrap();
        let bound = f.unit_rank_bound();
        assert!(units.full_rank, "height 6 should already reach full rank");
        assert_eq!(units.rank, bound);
        assert_eq!(units.generators.len(), units.rank);
        assert_eq!(units.log_matrix.len(), units.rank);
        for u in &units.generators {
            let n = f.norm(u);
            assert!(
                n == Rational::from(1) || n == Rational::from(-1),
                "unit norm must be ±1, got {n}"
            );
        }
        // |N(u)| = 1 seen through the embeddings: the log row, with complex
        // pairs weighted twice, sums to zero.
        let tol = big(P, 1.0) >> 100;
        let (r, s) = f.signature();
        for row in &units.log_matrix {
            assert_eq!(row.len(), r + s);
            let mut acc = big(P + 64, 0.0);
            for (k, e) in row.iter().enumerate() {
                let w = if k < r { 1.0 } else { 2.0 };
                acc += BigReal::with_val(P + 64, e * &big(P + 64, w));
            }
            let residue = BigReal::with_val(P, &acc).abs();
            assert!(
                residue <= tol,
                "weighted unit log row does not sum to zero: residue {residue}"
            );
        }
    }
}
