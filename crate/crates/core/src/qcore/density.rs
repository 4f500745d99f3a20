use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Complex, RegisterLayout, StateVector, Tensor, EIGEN_CUTOFF, STATE_TOL};
use crate::error::{Error, Result};

/// Mixed state over a register layout.
///
/// Constructors that go through [`DensityMatrix::new`] are validated
/// (Hermitian, unit trace, PSD within [`STATE_TOL`]). Intermediate
/// un-normalized sums use [`DensityMatrix::from_matrix_unchecked`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: RegisterLayout,
    matrix: DMatrix<Complex>,
}

impl DensityMatrix {
    pub fn new(layout: RegisterLayout, matrix: DMatrix<Complex>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked_checked_dims(layout, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    fn from_matrix_unchecked_checked_dims(
        layout: RegisterLayout,
        matrix: DMatrix<Complex>,
    ) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "density matrix on {layout} needs {d}x{d} entries"
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub(crate) fn from_matrix_unchecked(layout: RegisterLayout, matrix: DMatrix<Complex>) -> Self {
        debug_assert_eq!(layout.dim(), matrix.nrows());
        Self { layout, matrix }
    }

    pub fn pure(state: &StateVector) -> Result<Self> {
        Self::new(state.layout().clone(), {
            let v = DVector::from_column_slice(state.amplitudes());
            &v * v.adjoint()
        })
    }

    /// Diagonal state with the given (normalized) weights.
    pub fn diagonal(layout: RegisterLayout, weights: &[f64]) -> Result<Self> {
        let d = layout.dim();
        if weights.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for dimension {d}",
                weights.len()
            )));
        }
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex::new(weights[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            }
        });
        Self::new(layout, m)
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            matrix: DMatrix::identity(d, d) / Complex::new(d as f64, 0.0),
        }
    }

    /// Weighted sum `Σ wᵢ ρᵢ`; all layouts must match.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let (_, first) = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let d = first.dim();
        let mut m = DMatrix::<Complex>::zeros(d, d);
        for (w, rho) in parts {
            if rho.layout != first.layout {
                return Err(Error::DimensionMismatch(format!(
                    "mixture of {} and {}",
                    first.layout, rho.layout
                )));
            }
            m += &rho.matrix * Complex::new(*w, 0.0);
        }
        Ok(Self::from_matrix_unchecked(first.layout.clone(), m))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self::from_matrix_unchecked(self.layout.clone(), &self.matrix * Complex::new(w, 0.0))
    }

    pub fn add(&self, other: &DensityMatrix) -> Result<Self> {
        Self::mixture(&[(1.0, self), (1.0, other)])
    }

    /// Divides by the trace; errors when the trace is (numerically) zero.
    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= super::PROB_CUTOFF {
            return Err(Error::Degenerate(format!("trace {t:e} too small to normalize")));
        }
        Ok(self.scaled(1.0 / t))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm()))
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues ascending.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex>) {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex::new(0.5, 0.0);
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
        (values, vectors)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.eigen().0
    }

    /// Spectrum with the small-negative drift (≥ −[`STATE_TOL`]) clamped to
    /// zero and the result renormalized; errors on genuinely negative values.
    pub fn clamped_spectrum(&self) -> Result<Vec<f64>> {
        let mut ev = self.eigenvalues();
        if let Some(min) = ev.iter().copied().reduce(f64::min) {
            if min < -STATE_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        for v in ev.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = ev.iter().sum();
        if total <= EIGEN_CUTOFF {
            return Err(Error::InvalidState("zero trace".into()));
        }
        Ok(ev.into_iter().map(|v| v / total).collect())
    }

    /// Pure components `(weight, |v⟩)` with weight above [`EIGEN_CUTOFF`].
    pub fn pure_components(&self) -> Vec<(f64, StateVector)> {
        let (values, vectors) = self.eigen();
        values
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > EIGEN_CUTOFF)
            .map(|(k, &w)| {
                let amps = vectors.column(k).iter().copied().collect();
                (w, StateVector::from_parts_unchecked(self.layout.clone(), amps))
            })
            .collect()
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn principal_vector(&self) -> StateVector {
        let (_, vectors) = self.eigen();
        let k = vectors.ncols() - 1;
        StateVector::from_parts_unchecked(self.layout.clone(), vectors.column(k).iter().copied().collect())
    }

    /// Checks Hermitian, trace one, PSD, finite.
    pub fn validate(&self) -> Result<()> {
        if self.matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let h = self.hermiticity_deviation();
        if h > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {h:e})")));
        }
        let t = self.trace();
        if (t - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {t} != 1")));
        }
        if let Some(min) = self.eigenvalues().into_iter().reduce(f64::min) {
            if min < -STATE_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.layout() != &self.layout {
            return Err(Error::DimensionMismatch(format!(
                "state on {} vs density matrix on {}",
                psi.layout(),
                self.layout
            )));
        }
        let v = DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    /// Reduced state on `keep` (in the order given).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let sub = self.layout.select(keep)?;
        let split = self.layout.split(&sub)?;
        let d = split.d_sub;
        let mut m = DMatrix::<Complex>::zeros(d, d);
        for comp in 0..split.d_comp {
            for r in 0..d {
                for col in 0..d {
                    m[(r, col)] += self.matrix[(split.flat(r, comp), split.flat(col, comp))];
                }
            }
        }
        Ok(Self::from_matrix_unchecked(sub, m))
    }

    /// Conjugation `U ρ U†` by an operator on a subset of registers.
    pub fn conjugated(&self, op: &super::Operator) -> Result<DensityMatrix> {
        let full = op.embedded(&self.layout)?;
        Ok(Self::from_matrix_unchecked(
            self.layout.clone(),
            full.matrix() * &self.matrix * full.matrix().adjoint(),
        ))
    }

    /// Max-entry distance to another density matrix on the same layout.
    pub fn max_entry_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch("layouts differ".into()));
        }
        Ok((&self.matrix - &other.matrix)
            .iter()
            .fold(0.0f64, |acc, z| acc.max(z.norm())))
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self::from_matrix_unchecked(
            layout,
            self.matrix.kronecker(&other.matrix),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_trace() {
        let l = RegisterLayout::single("B", 2).unwrap();
        let m = DMatrix::<Complex>::identity(2, 2);
        assert!(DensityMatrix::new(l, m).is_err());
    }

    #[test]
    fn pure_components_of_mixture() {
        let l = RegisterLayout::single("B", 3).unwrap();
        let rho = DensityMatrix::diagonal(l, &[0.5, 0.5, 0.0]).unwrap();
        let comps = rho.pure_components();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|(w, _)| (w - 0.5).abs() < 1e-12));
    }
}
