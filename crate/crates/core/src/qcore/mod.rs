//! Dense complex linear algebra over small multi-register Hilbert spaces.

mod density;
mod info;
mod layout;
mod operator;
mod state;

pub use density::DensityMatrix;
pub use info::{binary_entropy, fidelity, trace_distance, von_neumann_entropy};
pub use layout::RegisterLayout;
pub use operator::Operator;
pub use state::{MeasurementBranch, Projection, StateVector};

pub(crate) use state::sample_branch;

/// Complex amplitude used for every state and operator entry.
pub type Complex = num_complex::Complex64;

/// Unitarity tolerance (max-entry deviation of U†U from the identity).
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on norms, traces, hermiticity and positivity.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues at or below this are dropped from entropies.
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Branch probabilities at or below this leave the post-state undefined.
pub const PROB_CUTOFF: f64 = 1e-12;

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// `tensor_product` for states and operators alike.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> crate::Result<Self>;
}

pub fn tensor_product<T: Tensor>(a: &T, b: &T) -> crate::Result<T> {
    a.tensor(b)
}
