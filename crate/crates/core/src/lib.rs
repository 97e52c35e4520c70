//! Frobenius Ore polynomials over valued series models, with positive-primitive
//! quantifier elimination.

pub mod coeff_field;
pub mod corpus;
pub mod formula;
pub mod model_checker;
pub mod ore_poly;
pub mod qe_engine;
pub mod rat;
pub mod series_field;
pub mod solve;
pub mod text;
pub mod torsion_values;
pub mod value_geometry;

pub use coeff_field::{FFElem, FieldRef, FiniteField};
pub use rat::Rat;
pub use value_geometry::{DeltaPoint, ValueProfile};
