//! diagorbit — certified multiprecision experiments with diagonal flows on
//! the space of unit-covolume lattices in R^d.
//!
//! The crate is organized bottom-up:
//!
//! * [`arith`] — exact rationals, arbitrary-precision reals/complexes,
//!   integer polynomials with certified root isolation, algebraic-number
//!   handles, and continued fractions.
//!
//! Every numerical claim that a caller can act on is either exact (integer /
//! rational arithmetic) or certified against an explicit precision budget;
//! see the per-module docs for the exact contracts.

pub mod arith;
pub mod dioph;
pub mod flows;
pub mod irregular;
pub mod lattice;
pub mod linalg;
pub mod numberfield;

pub use arith::{BigComplex, BigReal, Integer, Rational, DEFAULT_PRECISION};
pub use dioph::{
    gdp_probe, littlewood_product, propc1_search, propc1_value, propc2_search, propc2_value,
    DiophError, GDPWitness, RecordTrace, SearchRecord, Witness,
};
pub use flows::{ConeCertificate, TorusParam, TracelessDiag};
pub use irregular::{
    dirichlet_pair, m_membership, make_xv, make_zv, omega_experiment, project_pi,
    rational_relation, shorty_witness, Coord, DirichletPair, IrregularError, MMembershipVerdict,
    OmegaParams, OmegaReport, RationalRelation, ShortyWitness, VParams,
};
pub use lattice::{IntegerVector, LatticeBasis, MinimaReport};
pub use numberfield::{FieldElement, NumberField};
