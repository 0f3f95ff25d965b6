//! Integration properties of the irregular-orbit machinery: the shear
//! duality, diagonal-flow invariance of residue-family membership, Dirichlet
//! pairs against the exhaustive oracle, and uniform bounds on the
//! Dirichlet-driven short vectors.

use diagorbit::arith::Scalar;
use diagorbit::irregular::dirichlet_pair_brute;
use diagorbit::{
    dirichlet_pair, m_membership, make_xv, make_zv, rational_relation, shorty_witness, Coord,
    VParams,
};
use diagorbit::{BigReal, Integer, LatticeBasis, Rational};

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

    /// Uniform float in (0.1, 2.6): plenty of irrational-looking mantissas.
    fn coordinate(&mut self) -> f64 {
        0.1 + (self.next() >> 11) as f64 / (1u64 << 53) as f64 * 2.5
    }
}

fn silver() -> VParams {
    let root2 = Scalar::sqrt_rational(&q(2, 1)).unwrap();
    let beta = root2.affine(&q(1, 2), &q(1, 2)).unwrap();
    VParams::exact(vec![root2, beta], P).unwrap()
}

fn member_base(q_den: i64, thirds: (i64, i64)) -> LatticeBasis {
    LatticeBasis::from_exact_columns(
        vec![
            vec![
                Scalar::one(),
                Scalar::zero(),
                Scalar::Rational(q(thirds.0, q_den)),
            ],
            vec![
                Scalar::zero(),
                Scalar::one(),
                Scalar::Rational(q(thirds.1, q_den)),
            ],
            vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
        ],
        P,
    )
    .unwrap()
}

#[test]
fn shear_duality_sends_x_to_z_of_the_negation() {
    let tol = tol128(P);
    let mut rng = Rng(0x1bbe_6000_0000_0001);
    for _ in 0..20 {
        let (a, b) = (rng.coordinate(), rng.coordinate());
        let v = VParams::approx(vec![big(P, a), big(P, b)], P).unwrap();
        let neg = VParams::approx(vec![big(P, -a), big(P, -b)], P).unwrap();
        let dual = make_xv(&v).unwrap().dual().unwrap();
        let z = make_zv(&neg).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let diff =
                    BigReal::with_val(P, dual.columns().get(i, j) - z.columns().get(i, j)).abs();
                assert!(
                    diff <= tol,
                    "dual(x_v) and z_(−v) differ by {diff} at ({i},{j})"
                );
            }
        }
    }

    // The exact silver point satisfies the same identity through the
    // algebraic handles.
    let v = silver();
    let root2 = Scalar::sqrt_rational(&q(2, 1)).unwrap();
    let neg_alpha = root2.affine(&q(-1, 1), &q(0, 1)).unwrap();
    let neg_beta = root2.affine(&q(-1, 2), &q(-1, 2)).unwrap();
    let neg = VParams::exact(vec![neg_alpha, neg_beta], P).unwrap();
    let dual = make_xv(&v).unwrap().dual().unwrap();
    let z = make_zv(&neg).unwrap();
    let tol = tol128(P);
    for i in 0..3 {
        for j in 0..3 {
            let diff =
                BigReal::with_val(P, dual.columns().get(i, j) - z.columns().get(i, j)).abs();
            assert!(diff <= tol);
        }
    }
}

#[test]
fn membership_verdicts_are_diagonal_flow_invariant() {
    let tol = big(P, 1e-8);
    let mut rng = Rng(0x1bbe_6000_0000_0002);

    // Family 1, q = 2: the base member and its random diagonal translates.
    let base = member_base(2, (1, 0));
    let verdict = m_membership(&base, &Integer::from(2), 1, &tol).unwrap();
    assert!(verdict.member);
    for _ in 0..15 {
        let a = q(rng.int_in(-8, 8), rng.int_in(1, 3));
        let b = q(rng.int_in(-8, 8), rng.int_in(1, 3));
        let c = Rational::from(-(a.clone() + &b));
        let moved = base.apply_diag(&[a, b, c]).unwrap();
        let v = m_membership(&moved, &Integer::from(2), 1, &tol).unwrap();
        assert!(v.member, "diagonal flow broke membership");
        let (l1, l2) = v.residues.clone().unwrap();
        let mut pair = [l1, l2];
        pair.sort();
        assert_eq!(pair, [Integer::from(0), Integer::from(1)]);
        assert!(v.max_residual < big(P, 1e-20));
    }

    // Family 1, q = 3 with residues generating Z/3Z.
    let base3 = member_base(3, (1, 2));
    let v3 = m_membership(&base3, &Integer::from(3), 1, &tol).unwrap();
    assert!(v3.member);
    for _ in 0..5 {
        let a = q(rng.int_in(-5, 5), rng.int_in(1, 2));
        let b = q(rng.int_in(-5, 5), rng.int_in(1, 2));
        let c = Rational::from(-(a.clone() + &b));
        let moved = base3.apply_diag(&[a, b, c]).unwrap();
        assert!(m_membership(&moved, &Integer::from(3), 1, &tol).unwrap().member);
    }

    // A genuinely irrational shear never becomes a member, flowed or not.
    let xv = make_xv(&silver()).unwrap();
    assert!(!m_membership(&xv, &Integer::from(2), 1, &tol).unwrap().member);
    for _ in 0..5 {
        let a = q(rng.int_in(-6, 6), rng.int_in(1, 2));
        let b = q(rng.int_in(-6, 6), rng.int_in(1, 2));
        let c = Rational::from(-(a.clone() + &b));
        let moved = xv.apply_diag(&[a, b, c]).unwrap();
        assert!(
            !m_membership(&moved, &Integer::from(2), 1, &tol).unwrap().member,
            "a flowed irrational shear pretended to be a member"
        );
    }

    // Family 2 reads the second coordinate instead.
    let base_f2 = LatticeBasis::from_exact_columns(
        vec![
            vec![Scalar::one(), Scalar::Rational(q(1, 2)), Scalar::zero()],
            vec![Scalar::zero(), Scalar::one(), Scalar::zero()],
            vec![Scalar::zero(), Scalar::zero(), Scalar::one()],
        ],
        P,
    )
    .unwrap();
    let vf2 = m_membership(&base_f2, &Integer::from(2), 2, &tol).unwrap();
    assert!(vf2.member);
    assert_eq!(vf2.family, 2);
}

#[test]
fn dirichlet_pairs_agree_with_the_exhaustive_oracle() {
    let thetas: Vec<Coord> = vec![
        Coord::Exact(Scalar::sqrt_rational(&q(2, 1)).unwrap()),
        Coord::Exact(Scalar::sqrt_rational(&q(5, 1)).unwrap()),
        Coord::Approx(big(P, 1.0).exp()),
        Coord::Approx(big(P, 2.0).ln()),
    ];
    for theta in &thetas {
        for k in 1..=9u32 {
            let window = big(P, k as f64).exp();
            let pair = dirichlet_pair(theta, &window, P).unwrap();
            let brute =
                dirichlet_pair_brute(theta, window.to_f64().floor() as i64, P).unwrap();
            assert_eq!(pair.k, brute.k, "window e^{k}: denominators differ");
            assert_eq!(pair.m, brute.m, "window e^{k}: numerators differ");
            let diff = BigReal::with_val(P, &pair.achieved - &brute.achieved).abs();
            assert!(diff <= tol128(P));
            // The Dirichlet guarantee itself: k ≤ T and |kθ + m| ≤ 1/T.
            assert!(BigReal::with_val(P, &pair.k) <= window);
            let product = BigReal::with_val(P, &pair.achieved * &window);
            assert!(
                product <= big(P, 1.0) + tol128(P),
                "Dirichlet bound violated: |kθ+m|·T = {product}"
            );
        }
    }
}

#[test]
fn short_vectors_through_dirichlet_obey_the_uniform_bound() {
    let v = silver();
    let relation = rational_relation(
        &Coord::Exact(Scalar::sqrt_rational(&q(2, 1)).unwrap()),
        &Coord::Exact(
            Scalar::sqrt_rational(&q(2, 1))
                .unwrap()
                .affine(&q(1, 2), &q(1, 2))
                .unwrap(),
        ),
        &Integer::from(64),
        P,
    )
    .unwrap()
    .expect("the silver coupling is rational");
    assert_eq!(
        (relation.p1(), relation.p2(), relation.q()),
        (&Integer::from(1), &Integer::from(1), &Integer::from(2))
    );

    let pw = P + 64;
    for &t in &[0i64, 2, 5, 9, 13] {
        for &s in &[0i64, 3, 7, 11] {
            let w = shorty_witness(&v, &relation, &q(t, 1), &q(s, 1)).unwrap();
            // Certified inequality: the sup-norm respects 2e^{−min(t,s)/2}.
            let min_ts = t.min(s);
            let bound = BigReal::with_val(pw, big(pw, -(min_ts as f64) / 2.0).exp() * 2u32);
            let slack = big(pw, 1.0) + tol128(P);
            assert!(
                w.sup_norm <= BigReal::with_val(pw, &bound * &slack),
                "witness at (t,s)=({t},{s}) has sup {} above {bound}",
                w.sup_norm
            );
            // The published bound matches that closed form.
            let diff = BigReal::with_val(P, &w.bound - &bound).abs();
            assert!(diff <= BigReal::with_val(P, &bound * &tol128(P)));
            // Euclidean dominates sup, and the witness is a nonzero vector.
            assert!(w.euclid_norm >= w.sup_norm);
            assert!(w.coords.iter().any(|c| *c != 0));
        }
    }
}
