//! Exact symbolic computation for noncommutative probability: word algebras
//! with projection lattices, monotone closed operator arithmetic, tensor
//! product states, and free additive convolution, cross-checked against an
//! independent non-crossing-partition oracle.

pub mod algebras;
pub mod bialgebra;
pub mod error;
pub mod freeness;
pub mod monotone;
pub mod ncpoly;
pub mod oracle;
pub mod parse;
pub mod rewrite;
pub mod states;
pub mod symbol;
pub mod tensorspace;
pub mod verify;

pub use algebras::{filtration_level, AlgebraPresentation, FiltrationLevel, Schema};
pub use bialgebra::{
    convolution_truncation, convolve_states, convolve_states_with_truncation, coproduct,
    coproduct_on_leg, counit, counit_on_leg, delta_space, identification, j_map, lift_coproduct,
};
pub use error::{EngineError, Result};
pub use freeness::{
    at_copy, centered, embed_element, embedded_product, m_free_moment, mean, mixed_moment,
    plain_tensor_space,
};
pub use monotone::{
    default_cap, inverse_image, LatticeElem, MonotoneOp, MsddDescriptor, PreFreeVariable,
};
pub use ncpoly::{Coeff, Decoration, Letter, Level, NCPolynomial, Word};
pub use oracle::{boolean_convolve_oracle, free_convolve_oracle, free_product_state};
pub use rewrite::{multiply, reduce, reduce_word, Strategy};
pub use states::{
    mco_state, tensor_mco_state, tensor_state, xi_evaluate, Certified, MomentSpec, Preset,
};
pub use symbol::Symbol;
pub use verify::{run_suite, PropertyResult, Suite, SuiteReport};
pub use tensorspace::{
    compress_e, map_legs, map_legs_poly, tensor_inverse_image, Leg, LegHom, TensorMonotoneOp,
    TensorMsdd, TensorPoly, TensorSpace,
};
