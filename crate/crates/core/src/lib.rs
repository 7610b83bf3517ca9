pub mod atom;
pub mod dyadic;
pub mod error;
pub mod function;
pub mod scalar;
pub mod scale;
pub mod grid;
pub mod operators;
pub mod decomposition;
pub mod norms;
pub mod oracle;
pub mod normest;

pub use dyadic::{DyadicInterval, DyadicPoint, DyadicRectangle};
pub use error::{DyadicError, Result};
pub use num_rational::BigRational;
pub use num_traits::{One, Zero};
pub use scalar::{format_rational, parse_rational, QSqrt2, Scalar};

/// Exact functions over `Q(sqrt 2)`.
pub type ExactFunction = function::DyadicFunction<QSqrt2>;
pub type FloatFunction = function::DyadicFunction<f64>;
pub type ExactGrid = grid::GridFunction<QSqrt2>;
pub type FloatGrid = grid::GridFunction<f64>;
pub type ExactScale = scale::ScaleParam<QSqrt2>;
pub type FloatScale = scale::ScaleParam<f64>;
pub type ExactOperator = operators::OperatorSpec<QSqrt2>;
