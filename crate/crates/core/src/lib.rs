//! Bispectral operators from automorphisms of the first Weyl algebra.
//!
//! Exact arithmetic lives in [`weyl`], [`automorphism`] and [`poly`]; the
//! eigenfunction is evaluated numerically by [`quad`] over the contours of
//! [`contour`], and [`verify`] checks the eigenvalue identities on a grid.

pub mod automorphism;
pub mod contour;
pub mod error;
pub mod gaussian;
pub mod parse;
pub mod poly;
pub mod quad;
pub mod verify;
pub mod weyl;

pub use automorphism::{
    anti_isomorphism, anti_isomorphism_inverse, apply_word, b0, b0_inverse, bispectral_quadruple, classify,
    inverse_word, AutomorphismWord, BispectralQuadruple, Classification, ElementaryFactor, FactorKind, Verdict,
};
pub use contour::{contour_for, convergence_check, ContourPair, ContourPlan, ConvergenceViolation, Orientation, Ray};
pub use error::{AlgebraError, ContourError, ParseError, QuadError};
pub use gaussian::GaussianRational;
pub use parse::{parse_gaussian, parse_operator, parse_operator_in, parse_poly, parse_poly_in};
pub use poly::UniPoly;
pub use quad::{
    apply_operator_x, apply_operator_z, eval_psi, with_x_derivative, with_z_derivative, EvalResult, IntegralRep, Moment,
    PsiEvaluator, QuadratureSpec,
};
pub use verify::{
    cross_check_derivatives, symmetry_report, verify_bispectral, SymmetryReport, VerificationReport, VerificationTask,
};
pub use weyl::{compose_poly, VarNames, WeylElement};
