use super::{DensityMatrix, StateVector, EIGEN_CUTOFF};
use crate::error::{Error, Result};

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spectrum = rho.clamped_spectrum()?;
    Ok(spectrum
        .into_iter()
        .filter(|&l| l > EIGEN_CUTOFF)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0))
}

/// `H₂(x) = −x log₂ x − (1−x) log₂(1−x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// `F(ρ, |ψ⟩) = ⟨ψ|ρ|ψ⟩`, the squared-overlap convention.
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    rho.expectation(psi)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let diff = DensityMatrix::mixture(&[(1.0, rho), (-1.0, sigma)])?;
    Ok(0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::RegisterLayout;

    #[test]
    fn entropy_examples() {
        let l = RegisterLayout::single("B", 3).unwrap();
        let pure = DensityMatrix::diagonal(l.clone(), &[0.0, 1.0, 0.0]).unwrap();
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-9);
        let mixed = DensityMatrix::maximally_mixed(l.clone());
        assert!((von_neumann_entropy(&mixed).unwrap() - 3f64.log2()).abs() < 1e-9);
        // −(2/3)log₂(2/3) − 2·(1/6)log₂(1/6), evaluated independently.
        let expect = -(2.0 / 3.0) * (2.0f64 / 3.0).log2() - (1.0 / 3.0) * (1.0f64 / 6.0).log2();
        assert!((expect - 1.251629167).abs() < 1e-8);
        let avg = DensityMatrix::diagonal(l, &[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert!((von_neumann_entropy(&avg).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn binary_entropy_examples() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.25).unwrap() - 0.811278124459).abs() < 1e-11);
        assert!(matches!(binary_entropy(1.5), Err(Error::Domain(_))));
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let l = RegisterLayout::single("B", 2).unwrap();
        let zero = StateVector::ket("B", 2, 0).unwrap();
        let one = StateVector::ket("B", 2, 1).unwrap();
        let rho0 = DensityMatrix::pure(&zero).unwrap();
        assert!((fidelity(&rho0, &zero).unwrap() - 1.0).abs() < 1e-15);
        assert!(fidelity(&rho0, &one).unwrap().abs() < 1e-15);
        let half = DensityMatrix::maximally_mixed(l);
        assert!((fidelity(&half, &zero).unwrap() - 0.5).abs() < 1e-15);
        let wrong = StateVector::ket("X", 2, 0).unwrap();
        assert!(fidelity(&half, &wrong).is_err());
    }

    #[test]
    fn non_psd_rejected_by_entropy() {
        let l = RegisterLayout::single("B", 2).unwrap();
        let bad = DensityMatrix::from_matrix_unchecked(
            l,
            nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                crate::qcore::c(1.2, 0.0),
                crate::qcore::c(-0.2, 0.0),
            ])),
        );
        assert!(matches!(von_neumann_entropy(&bad), Err(Error::InvalidState(_))));
    }
}
