use crate::error::{Error, Result};
use crate::qcore::{trace_distance, DensityMatrix, StateVector};

/// Optimal success probability for telling `rho0` (prior `p0`) from `rho1`.
pub fn helstrom_success(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(Error::Domain(format!("prior {p0} outside [0, 1]")));
    }
    let diff = DensityMatrix::mixture(&[(p0, rho0), (p0 - 1.0, rho1)])?;
    let norm1: f64 = diff.eigenvalues().iter().map(|v| v.abs()).sum();
    Ok(0.5 * (1.0 + norm1))
}

/// Equal-prior Helstrom success for pure states, `½(1 + √(1 − |⟨a|b⟩|²))`.
pub fn helstrom_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    let o = a.inner(b)?.norm_sqr().min(1.0);
    Ok(0.5 * (1.0 + (1.0 - o).sqrt()))
}

/// Equal-prior advantage over guessing, `½ T(ρ₀, ρ₁)`.
pub fn helstrom_advantage(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    Ok(0.5 * trace_distance(rho0, rho1)?)
}

/// Best guess of the scenario once the index is known: Alice's two query
/// registers are `|j⟩|+j⟩` or `|+j⟩|j⟩`.
pub fn scenario_guess_probability(j: usize, entries: usize) -> Result<f64> {
    if j >= entries {
        return Err(Error::Query(format!("index {j} >= N = {entries}")));
    }
    if j == 0 {
        return Ok(0.5);
    }
    let plain = StateVector::ket("Q1", entries, j)?;
    let plus = StateVector::ket("Q1", entries, j)?
        .add(&StateVector::ket("Q1", entries, 0)?)?
        .normalized()?;
    let rename = |s: &StateVector| -> Result<StateVector> {
        StateVector::new(s.layout().renamed(|_| "Q2".into())?, s.amplitudes().to_vec())
    };
    let a = StateVector::product(&[plain.clone(), rename(&plus)?])?;
    let b = StateVector::product(&[plus, rename(&plain)?])?;
    helstrom_pure(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_guess() {
        let p = scenario_guess_probability(1, 4).unwrap();
        assert!((p - 0.5 * (1.0 + 0.75f64.sqrt())).abs() < 1e-12);
        assert_eq!(scenario_guess_probability(0, 4).unwrap(), 0.5);
    }

    #[test]
    fn orthogonal_states_are_perfectly_distinguishable() {
        let a = StateVector::ket("B", 3, 1).unwrap();
        let b = StateVector::ket("B", 3, 2).unwrap();
        assert!((helstrom_pure(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        let p = helstrom_success(&a.to_density(), &b.to_density(), 0.5).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }
}
