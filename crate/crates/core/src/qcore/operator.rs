use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Complex, RegisterLayout, Tensor, UNITARY_TOL};
use crate::error::{Error, Result};

/// Square operator acting on the registers of its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorRepr", into = "OperatorRepr")]
pub struct Operator {
    layout: RegisterLayout,
    matrix: DMatrix<Complex>,
    unitary: bool,
}

/// Row-major JSON form: `{"layout": [...], "matrix": [[[re,im],...],...], "unitary": bool}`.
#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    layout: RegisterLayout,
    matrix: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    unitary: bool,
}

impl TryFrom<OperatorRepr> for Operator {
    type Error = Error;

    fn try_from(r: OperatorRepr) -> Result<Self> {
        let d = r.layout.dim();
        if r.matrix.len() != d || r.matrix.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} needs a {d}x{d} matrix",
                r.layout
            )));
        }
        let m = DMatrix::from_fn(d, d, |i, j| {
            let [re, im] = r.matrix[i][j];
            Complex::new(re, im)
        });
        let op = Operator::new(r.layout, m)?;
        if r.unitary {
            Ok(op.tagged_unitary())
        } else {
            Ok(op)
        }
    }
}

impl From<Operator> for OperatorRepr {
    fn from(op: Operator) -> Self {
        let d = op.matrix.nrows();
        OperatorRepr {
            matrix: (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| [op.matrix[(i, j)].re, op.matrix[(i, j)].im])
                        .collect()
                })
                .collect(),
            layout: op.layout,
            unitary: op.unitary,
        }
    }
}

impl Operator {
    /// General (not necessarily unitary) operator.
    pub fn new(layout: RegisterLayout, matrix: DMatrix<Complex>) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "operator on {layout} needs a {d}x{d} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite operator entry".into()));
        }
        Ok(Self {
            layout,
            matrix,
            unitary: false,
        })
    }

    /// Operator tagged unitary; fails unless U†U = I within [`UNITARY_TOL`].
    pub fn unitary(layout: RegisterLayout, matrix: DMatrix<Complex>) -> Result<Self> {
        let op = Self::new(layout, matrix)?;
        let dev = op.unitarity_deviation();
        if dev > UNITARY_TOL {
            return Err(Error::NonUnitary(dev));
        }
        Ok(op.tagged_unitary())
    }

    /// Tags as unitary without checking; [`crate::strategies::validate_scope`] re-checks.
    pub fn tagged_unitary(mut self) -> Self {
        self.unitary = true;
        self
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            matrix: DMatrix::identity(d, d),
            unitary: true,
        }
    }

    /// Permutation operator `|s⟩ → |map(s)⟩` over flat indices.
    pub fn permutation(layout: RegisterLayout, map: impl Fn(usize) -> usize) -> Result<Self> {
        let d = layout.dim();
        let mut m = DMatrix::<Complex>::zeros(d, d);
        for s in 0..d {
            let t = map(s);
            if t >= d {
                return Err(Error::DimensionMismatch(format!("permutation target {t} >= {d}")));
            }
            m[(t, s)] = Complex::new(1.0, 0.0);
        }
        Self::unitary(layout, m)
    }

    /// `|ψ⟩⟨ψ|` for a state on this layout.
    pub fn projector(state: &super::StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self {
            layout: state.layout().clone(),
            matrix: &v * v.adjoint(),
            unitary: false,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<Complex> {
        &self.matrix
    }

    pub fn is_tagged_unitary(&self) -> bool {
        self.unitary
    }

    /// Max-entry deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.matrix.nrows();
        let prod = self.matrix.adjoint() * &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex::new(expect, 0.0)).norm());
            }
        }
        worst
    }

    pub fn dagger(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
            unitary: self.unitary,
        }
    }

    /// `self · other` (apply `other` first); layouts must match.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose operators on {} and {}",
                self.layout, other.layout
            )));
        }
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * &other.matrix,
            unitary: self.unitary && other.unitary,
        })
    }

    /// Same matrix on renamed registers.
    pub fn relabeled(&self, f: impl Fn(&str) -> String) -> Result<Self> {
        Ok(Self {
            layout: self.layout.renamed(f)?,
            matrix: self.matrix.clone(),
            unitary: self.unitary,
        })
    }

    /// Same operator expressed on a permuted register order.
    pub fn reordered(&self, target: &RegisterLayout) -> Result<Self> {
        if target.len() != self.layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot reorder {} into {target}",
                self.layout
            )));
        }
        let split = self.layout.split(target)?;
        let d = target.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.matrix[(split.flat(i, 0), split.flat(j, 0))]);
        Ok(Self {
            layout: target.clone(),
            matrix: m,
            unitary: self.unitary,
        })
    }

    /// `self ⊗ I` extended to `layout` (which must contain every register of `self`).
    pub fn embedded(&self, layout: &RegisterLayout) -> Result<Self> {
        let split = layout.split(&self.layout)?;
        let d = layout.dim();
        let mut m = DMatrix::<Complex>::zeros(d, d);
        for comp in 0..split.d_comp {
            for r in 0..split.d_sub {
                for col in 0..split.d_sub {
                    m[(split.flat(r, comp), split.flat(col, comp))] = self.matrix[(r, col)];
                }
            }
        }
        Ok(Self {
            layout: layout.clone(),
            matrix: m,
            unitary: self.unitary,
        })
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
            unitary: self.unitary && other.unitary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::c;

    #[test]
    fn identity_tensor_identity() {
        let a = Operator::identity(RegisterLayout::single("A", 2).unwrap());
        let b = Operator::identity(RegisterLayout::single("B", 3).unwrap());
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.matrix(), &DMatrix::<Complex>::identity(6, 6));
    }

    #[test]
    fn non_unitary_rejected() {
        let l = RegisterLayout::single("A", 2).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(Operator::unitary(l, m), Err(Error::NonUnitary(_))));
    }

    #[test]
    fn json_round_trip() {
        let op = Operator::permutation(RegisterLayout::single("A", 3).unwrap(), |s| (s + 1) % 3)
            .unwrap();
        let s = serde_json::to_string(&op).unwrap();
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
        assert!(back.is_tagged_unitary());
    }
}
