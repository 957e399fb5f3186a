//! Dense complex kernels and angular dictionaries.

mod dictionary;
mod matrix;
mod svd;

pub use dictionary::{dft_dictionary, steering_vector, GridAngle, UnitaryDictionary};
pub use matrix::{inner, kron, least_squares, norm_sqr, solve_hermitian, ComplexMatrix, ComplexVector};
pub use svd::{economy_svd, Svd};
