use serde::Serialize;

use super::profile::{profile, StrategyProfile};
use super::theorem::FIDELITY_COEFF;
use crate::error::{Error, Result};
use crate::protocol::{Database, SessionOptions};
use crate::qcore::{binary_entropy, von_neumann_entropy, DensityMatrix, StateVector, STATE_TOL};
use crate::strategies::BobStrategy;

/// Weighted family of states `{p_i, ρ_i}`.
#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(members: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("empty ensemble".into()));
        }
        if members.iter().any(|(p, _)| !(*p >= 0.0)) {
            return Err(Error::Domain("ensemble weights must be non-negative".into()));
        }
        let total: f64 = members.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::Domain(format!("ensemble weights sum to {total}")));
        }
        let layout = members[0].1.layout().clone();
        if members.iter().any(|(_, r)| r.layout() != &layout) {
            return Err(Error::DimensionMismatch("ensemble members differ in layout".into()));
        }
        Ok(Self { members })
    }

    /// Equal weights.
    pub fn uniform(states: Vec<DensityMatrix>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|r| (w, r)).collect())
    }

    pub fn members(&self) -> &[(f64, DensityMatrix)] {
        &self.members
    }

    pub fn average(&self) -> Result<DensityMatrix> {
        let parts: Vec<(f64, &DensityMatrix)> = self.members.iter().map(|(p, r)| (*p, r)).collect();
        DensityMatrix::mixture(&parts)
    }
}

/// `χ = S(Σ p_i ρ_i) − Σ p_i S(ρ_i)` in bits.
pub fn holevo_chi(ensemble: &Ensemble) -> Result<f64> {
    let mut chi = von_neumann_entropy(&ensemble.average()?)?;
    for (p, rho) in ensemble.members() {
        if *p > 0.0 {
            chi -= p * von_neumann_entropy(rho)?;
        }
    }
    Ok(chi.max(0.0))
}

/// Holevo information of B about a uniformly drawn index.
pub fn bob_chi(p: &StrategyProfile) -> Result<f64> {
    let states = p.queries.iter().map(|q| q.mixed_residual()).collect::<Result<Vec<_>>>()?;
    holevo_chi(&Ensemble::uniform(states)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoBound {
    pub chi: f64,
    /// `ε = 1 − min P`.
    pub epsilon: f64,
    /// `ε′ = 1 − P̄`.
    pub epsilon_average: f64,
    /// `2Nε′`, diagnostic.
    pub epsilon_from_average: f64,
    /// `P̄`
    pub mean_pass: f64,
    /// `⟨σ*|σ|σ*⟩`
    pub q: f64,
    /// `631 ε^{1/4} log₂ N`
    pub bound_simple: f64,
    /// `H₂(P̄) + P̄ H₂(q) + (1−q) + (2−P̄−q) log₂ N`
    pub bound_sharp: f64,
    pub holds_simple: bool,
    pub holds_sharp: bool,
}

/// Bounds on Bob's information given a reference state `σ*`.
pub fn info_bound_with(p: &StrategyProfile, sigma_star: &StateVector) -> Result<InfoBound> {
    let big_n = p.queries.len() as f64;
    let chi = bob_chi(p)?;
    let eps = p.epsilon();
    let mean_pass = p.mean_pass();
    let tol = super::theorem::CHECK_TOL;

    let q = if mean_pass > 0.0 {
        let mut sigma = p.queries[0].a.passed.scaled(0.0);
        for qs in &p.queries {
            sigma = sigma.add(&qs.a.passed)?.add(&qs.b.passed)?;
        }
        sigma.scaled(1.0 / (2.0 * big_n * mean_pass)).expectation(sigma_star)?
    } else {
        0.0
    };
    let q = q.clamp(0.0, 1.0);
    let pc = mean_pass.clamp(0.0, 1.0);
    let bound_sharp = binary_entropy(pc)? + pc * binary_entropy(q)? + (1.0 - q) + (2.0 - pc - q) * big_n.log2();
    let bound_simple = FIDELITY_COEFF * eps.powf(0.25) * big_n.log2();
    let eps_avg = 1.0 - mean_pass;
    Ok(InfoBound {
        chi,
        epsilon: eps,
        epsilon_average: eps_avg,
        epsilon_from_average: 2.0 * big_n * eps_avg,
        mean_pass,
        q,
        bound_simple,
        bound_sharp,
        holds_simple: chi <= bound_simple + tol,
        holds_sharp: chi <= bound_sharp + tol,
    })
}

/// [`info_bound_with`] using the strategy's reference state.
pub fn info_bound(strategy: &BobStrategy, db: &Database, opts: &SessionOptions) -> Result<InfoBound> {
    let p = profile(strategy, db, opts)?;
    let report = super::theorem::verify_with_profile(strategy, db, &p)?;
    info_bound_with(&p, &report.sigma_star)
}

/// Best information about `j` from `M` classical decoy queries with `j`
/// uniformly hidden among them: `log₂(N/M) − (M−1)/M log₂((N−1)/(M−1))`.
pub fn classical_decoy_bound(n_entries: usize, m: usize) -> Result<f64> {
    if n_entries < 1 || m < 1 || m > n_entries {
        return Err(Error::Domain(format!("need 1 <= M <= N, got N = {n_entries}, M = {m}")));
    }
    let (n, m) = (n_entries as f64, m as f64);
    if m == 1.0 {
        return Ok(n.log2());
    }
    Ok((n / m).log2() - (m - 1.0) / m * ((n - 1.0) / (m - 1.0)).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::RegisterLayout;

    #[test]
    fn decoy_bound_endpoints() {
        assert_eq!(classical_decoy_bound(8, 1).unwrap(), 3.0);
        assert!(classical_decoy_bound(8, 8).unwrap().abs() < 1e-12);
        assert!((classical_decoy_bound(4, 2).unwrap() - (1.0 - 0.5 * 3f64.log2())).abs() < 1e-12);
        assert!(classical_decoy_bound(4, 5).is_err());
    }

    #[test]
    fn chi_of_orthogonal_states() {
        let l = RegisterLayout::single("B", 4).unwrap();
        let states = (0..4)
            .map(|i| StateVector::ket("B", 4, i).unwrap().to_density())
            .collect();
        let chi = holevo_chi(&Ensemble::uniform(states).unwrap()).unwrap();
        assert!((chi - 2.0).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(l);
        let chi0 = holevo_chi(&Ensemble::uniform(vec![mixed.clone(), mixed]).unwrap()).unwrap();
        assert!(chi0.abs() < 1e-12);
    }
}
