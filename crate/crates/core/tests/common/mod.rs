#![allow(dead_code)]

use nalgebra::DMatrix;
use qpq::qcore::{
    binary_entropy, von_neumann_entropy, Complex, DensityMatrix, Operator, RegisterLayout, StateVector,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<Complex> {
    (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im)
        })
        .collect()
}

pub fn random_state<R: Rng>(rng: &mut R, layout: RegisterLayout) -> StateVector {
    let amps = gaussian_vec(rng, layout.dim());
    StateVector::new(layout, amps).unwrap().normalized().unwrap()
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> DMatrix<Complex> {
    let g = DMatrix::from_vec(d, d, gaussian_vec(rng, d * d));
    g.qr().q()
}

pub fn random_density<R: Rng>(rng: &mut R, layout: RegisterLayout, rank: usize) -> DensityMatrix {
    let d = layout.dim();
    let g = DMatrix::from_vec(d, rank, gaussian_vec(rng, d * rank));
    let m = &g * g.adjoint();
    let tr: f64 = m.trace().re;
    DensityMatrix::new(layout, m / Complex::new(tr, 0.0)).unwrap()
}

pub fn layout(dims: &[usize]) -> RegisterLayout {
    let names = ["X", "Y", "Z", "W"];
    RegisterLayout::new(dims.iter().enumerate().map(|(i, &d)| (names[i], d))).unwrap()
}

/// A product of random unitaries stays unitary and keeps norms.
pub fn check_unitarity<R: Rng>(rng: &mut R, dims: &[usize]) -> Result<(), String> {
    let l = layout(dims);
    let u = Operator::unitary(l.clone(), random_unitary(rng, l.dim())).map_err(|e| e.to_string())?;
    let v = Operator::unitary(l.clone(), random_unitary(rng, l.dim())).map_err(|e| e.to_string())?;
    let uv = u.compose(&v).map_err(|e| e.to_string())?;
    if uv.unitarity_deviation() > 1e-10 {
        return Err(format!("deviation {}", uv.unitarity_deviation()));
    }
    let psi = random_state(rng, l);
    let n = psi.apply(&uv).map_err(|e| e.to_string())?.norm_sqr();
    if (n - 1.0).abs() > 1e-10 {
        return Err(format!("norm {n} after unitary"));
    }
    Ok(())
}

/// Partial traces keep trace one and compose.
pub fn check_partial_trace<R: Rng>(rng: &mut R, dims: &[usize]) -> Result<(), String> {
    let l = layout(dims);
    let names: Vec<&str> = l.names().collect();
    let psi = random_state(rng, l.clone());
    let full = psi.to_density();
    let keep: Vec<&str> = names[..names.len() - 1].to_vec();
    let a = psi.partial_trace(&keep).map_err(|e| e.to_string())?;
    let b = full.partial_trace(&keep).map_err(|e| e.to_string())?;
    if (a.trace() - 1.0).abs() > 1e-10 {
        return Err(format!("trace {}", a.trace()));
    }
    if a.max_entry_distance(&b).map_err(|e| e.to_string())? > 1e-10 {
        return Err("state and density partial traces differ".into());
    }
    let first = &names[..1];
    let nested = a.partial_trace(first).map_err(|e| e.to_string())?;
    let direct = psi.partial_trace(first).map_err(|e| e.to_string())?;
    if nested.max_entry_distance(&direct).map_err(|e| e.to_string())? > 1e-10 {
        return Err("nested partial trace differs".into());
    }
    Ok(())
}

/// Entropy is unitarily invariant and lies in `[0, log₂ d]`.
pub fn check_entropy<R: Rng>(rng: &mut R, dims: &[usize], rank: usize) -> Result<(), String> {
    let l = layout(dims);
    let rho = random_density(rng, l.clone(), rank);
    let s = von_neumann_entropy(&rho).map_err(|e| e.to_string())?;
    let u = Operator::unitary(l.clone(), random_unitary(rng, l.dim())).map_err(|e| e.to_string())?;
    let s2 = von_neumann_entropy(&rho.conjugated(&u).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if (s - s2).abs() > 1e-9 {
        return Err(format!("entropy {s} vs {s2} after conjugation"));
    }
    if s < -1e-12 || s > (l.dim() as f64).log2() + 1e-9 {
        return Err(format!("entropy {s} out of range"));
    }
    let p: f64 = rng.random();
    let h = binary_entropy(p).map_err(|e| e.to_string())?;
    let diag = DensityMatrix::diagonal(RegisterLayout::single("X", 2).unwrap(), &[p, 1.0 - p]).unwrap();
    let s_diag = von_neumann_entropy(&diag).map_err(|e| e.to_string())?;
    if (h - s_diag).abs() > 1e-9 {
        return Err(format!("H2 {h} vs S {s_diag}"));
    }
    Ok(())
}

/// Measurement probabilities sum to one and post-states are normalized.
pub fn check_measurement<R: Rng>(rng: &mut R, dims: &[usize]) -> Result<(), String> {
    let l = layout(dims);
    let psi = random_state(rng, l);
    let branches = psi.measure(&["X"]).map_err(|e| e.to_string())?;
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(format!("probabilities sum to {total}"));
    }
    for b in &branches {
        if !b.post_state.is_normalized(1e-9) {
            return Err("post-measurement state not normalized".into());
        }
    }
    Ok(())
}
