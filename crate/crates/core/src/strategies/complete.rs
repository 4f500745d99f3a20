use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qcore::{Complex, Operator, RegisterLayout, StateVector, STATE_TOL};

fn column(state: &StateVector, layout: &RegisterLayout) -> Result<DVector<Complex>> {
    let s = state.reordered(layout)?;
    Ok(DVector::from_column_slice(s.amplitudes()))
}

/// Orthonormal completion of `basis` by Gram–Schmidt over the standard basis,
/// taken in index order.
fn complement(basis: &[DVector<Complex>], dim: usize) -> Vec<DVector<Complex>> {
    let mut all: Vec<DVector<Complex>> = basis.to_vec();
    let mut extra = Vec::new();
    for s in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = DVector::<Complex>::zeros(dim);
        v[s] = Complex::new(1.0, 0.0);
        // Two passes keep the result orthogonal to working precision.
        for _ in 0..2 {
            for u in &all {
                let c = u.dotc(&v);
                v -= u * c;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= Complex::new(norm, 0.0);
            all.push(v.clone());
            extra.push(v);
        }
    }
    extra
}

/// Unitary on `layout` sending each `domain[i]` to `images[i]`, extended to
/// the rest of the space by a deterministic completion.
///
/// Both lists must be orthonormal with matching Gram matrices.
pub fn complete_isometry(
    layout: &RegisterLayout,
    domain: &[StateVector],
    images: &[StateVector],
) -> Result<Operator> {
    if domain.len() != images.len() {
        return Err(Error::NotIsometry(format!(
            "{} inputs but {} outputs",
            domain.len(),
            images.len()
        )));
    }
    let d: Vec<_> = domain.iter().map(|s| column(s, layout)).collect::<Result<_>>()?;
    let e: Vec<_> = images.iter().map(|s| column(s, layout)).collect::<Result<_>>()?;
    for i in 0..d.len() {
        for k in 0..d.len() {
            let gd = d[i].dotc(&d[k]);
            let ge = e[i].dotc(&e[k]);
            let expect = if i == k { 1.0 } else { 0.0 };
            if (gd - Complex::new(expect, 0.0)).norm() > STATE_TOL {
                return Err(Error::NotIsometry(format!(
                    "inputs {i} and {k} are not orthonormal (overlap {gd})"
                )));
            }
            if (ge - gd).norm() > STATE_TOL {
                return Err(Error::NotIsometry(format!(
                    "outputs {i} and {k} overlap {ge}, inputs overlap {gd}"
                )));
            }
        }
    }
    let dim = layout.dim();
    let mut u = DMatrix::<Complex>::zeros(dim, dim);
    for (di, ei) in d.iter().zip(&e) {
        u += ei * di.adjoint();
    }
    for (g, f) in complement(&d, dim).iter().zip(complement(&e, dim).iter()) {
        u += f * g.adjoint();
    }
    Operator::unitary(layout.clone(), u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completes_a_swap_rule() {
        let l = RegisterLayout::single("X", 3).unwrap();
        let k = |i| StateVector::ket("X", 3, i).unwrap();
        let u = complete_isometry(&l, &[k(0)], &[k(2)]).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
        assert_eq!(k(0).apply(&u).unwrap(), k(2));
    }

    #[test]
    fn rejects_non_isometric_rule() {
        let l = RegisterLayout::single("X", 2).unwrap();
        let k = |i| StateVector::ket("X", 2, i).unwrap();
        assert!(matches!(
            complete_isometry(&l, &[k(0), k(1)], &[k(0), k(0)]),
            Err(Error::NotIsometry(_))
        ));
    }
}
