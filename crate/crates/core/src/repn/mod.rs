//! Representation operators: the left star operator, its partial Fourier
//! conjugate, generators and unitaries on the sphere, and their checks.

mod fourier;
mod lhat;
mod operator;
mod quadrature;
mod sphere;
mod unitary;

pub use fourier::{
    conjugation_check, conjugation_fields, conjugation_test_functions, ConjugationFields, ConjugationResidual, FourierGrid, ALIASING_LIMIT, T_SAMPLES,
};
pub use lhat::{commutator_prediction, l_left, lhat_formula, left_commutator, uv_coordinates, LhatOperator, LHAT_VARS};
pub use operator::{axis_of, richardson, Multiplier, Operator, Primitive, FLOW_STEP};
pub use quadrature::QuadratureGrid;
pub use sphere::{SphereFunction, SpherePoint, SPHERE_VARS};
pub use unitary::{
    cauchy_check, factored_vs_reference, generator, generator_bracket_check, homomorphism_check, infinitesimal_check,
    one_parameter, reference_unitary, unitarity_check, unitary, unitary_from_factors, GeneratorBracketResidual,
    HomomorphismResidual, InfinitesimalResidual, UnitarityResult, CAUCHY_STEP, CAUCHY_TIMES, REFINEMENT_TOL,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RepnError {
    #[error("bad grid: {0}")]
    BadGrid(String),
    #[error("insufficient decay at the grid boundary: ratio {ratio:e} exceeds {limit:e}")]
    Aliasing { ratio: f64, limit: f64 },
    #[error("expression error: {0}")]
    Expression(String),
}
