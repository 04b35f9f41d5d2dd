//! Dense linear-algebra primitives: matrices, SVD, symmetric eigenvalues,
//! linear solves and the `DMAT1` file format.

mod dmat;
mod eig;
mod matrix;
mod qr;
mod solve;
mod svd;

pub use dmat::{parse_dmat, read_dmat, to_dmat_string, write_dmat};
pub use eig::{sym_eig_max, sym_eig_min, sym_eigs};
pub use matrix::DenseMatrix;
pub use solve::{solve_square, solve_square_transposed};
pub use svd::{singular_values, spectral_norm, svd_full, OrthogonalFactor, SvdFactors};

pub use matrix::norm2;
