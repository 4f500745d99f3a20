use serde::Serialize;

use super::decompose::{decompose_all, sigma_star, QueryDecomposition};
use super::profile::{profile, StrategyProfile};
use crate::error::{Error, Result};
use crate::protocol::{Database, Scenario, SessionOptions};
use crate::qcore::{fidelity, StateVector};
use crate::strategies::BobStrategy;

/// Slack applied to every comparison.
pub const CHECK_TOL: f64 = 1e-9;

/// Coefficient of the headline fidelity bound.
pub const FIDELITY_COEFF: f64 = 631.0;
/// Coefficient of the round-2 overlap bound, reported alongside.
pub const OVERLAP_COEFF: f64 = 630.0;

/// One inequality `lhs ≥ rhs` evaluated on a strategy.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub j: usize,
    pub scenario: Option<Scenario>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    /// `rhs ≤ 0`: the inequality carries no information.
    pub vacuous: bool,
}

impl InequalityCheck {
    fn new(name: &str, j: usize, scenario: Option<Scenario>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.to_string(),
            j,
            scenario,
            lhs,
            rhs,
            margin: lhs - rhs,
            holds: lhs >= rhs - CHECK_TOL,
            vacuous: rhs <= 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PassRow {
    pub j: usize,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub strategy: String,
    pub epsilon: f64,
    pub passes: Vec<PassRow>,
    /// Reference state `σ*` on B.
    pub sigma_star: StateVector,
    /// How `σ*` was obtained.
    pub sigma_source: String,
    pub min_fidelity: f64,
    /// `max(0, 1 − 631 ε^{1/4})`.
    pub fidelity_rhs: f64,
    /// `max(0, 1 − 630 ε^{1/4})`, diagnostic.
    pub fidelity_rhs_630: f64,
    pub vacuous: bool,
    /// Whether the per-round intermediate checks were evaluated.
    pub intermediates: bool,
    pub checks: Vec<InequalityCheck>,
    pub all_hold: bool,
}

impl TheoremReport {
    pub fn failures(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn overlap_sq(a: Option<&StateVector>, b: Option<&StateVector>) -> Result<Option<f64>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some(a.inner(b)?.norm_sqr())),
        _ => Ok(None),
    }
}

fn push_opt(out: &mut Vec<InequalityCheck>, name: &str, j: usize, lhs: Option<f64>, rhs: f64) {
    if let Some(lhs) = lhs {
        out.push(InequalityCheck::new(name, j, None, lhs, rhs));
    }
}

fn intermediate_checks(decs: &[QueryDecomposition], eps: f64) -> Result<Vec<InequalityCheck>> {
    let mut out = Vec::new();
    let s = eps.sqrt();
    let q = eps.powf(0.25);
    let phi01 = decs[0].eta1.phi.as_ref();
    let phi02 = decs[0].eta2.phi.as_ref();
    for d in decs {
        let j = d.j;
        for (name, eta) in [
            ("eta1", d.eta1.eta),
            ("eta1_bar", d.eta1_bar.eta),
            ("eta2", d.eta2.eta),
            ("eta2_bar", d.eta2_bar.eta),
        ] {
            out.push(InequalityCheck::new(name, j, None, eta, 1.0 - eps));
        }
        if j == 0 {
            continue;
        }
        let o1 = overlap_sq(d.eta1.phi.as_ref(), phi01)?;
        let o1_bar = overlap_sq(d.eta1_bar.phi.as_ref(), phi01)?;
        let o2 = overlap_sq(d.eta2.phi.as_ref(), phi02)?;
        let o2_bar = overlap_sq(d.eta2_bar.phi.as_ref(), phi02)?;
        push_opt(&mut out, "overlap1", j, o1, 1.0 - 28.0 * s);
        let base = (1.0 - 2.0 * (2.0 + (2.0 * eps).sqrt()) * s).max(0.0);
        push_opt(&mut out, "overlap1_bar_sharp", j, o1_bar, sq(base));
        push_opt(&mut out, "overlap1_bar", j, o1_bar, 1.0 - 14.0 * s);
        push_opt(&mut out, "kappa", j, d.kappa.map(|k| k.norm()), 1.0 - 8.0 * s);
        push_opt(&mut out, "kappa_bar", j, d.kappa_bar.map(|k| k.norm()), 1.0 - 29.0 * s);
        push_opt(&mut out, "overlap2_sharp", j, o2, sq((1.0 - 315.0 * q).max(0.0)));
        push_opt(&mut out, "overlap2", j, o2, 1.0 - 630.0 * q);
        push_opt(&mut out, "overlap2_bar_sharp", j, o2_bar, sq((1.0 - 23.0 * q).max(0.0)));
        push_opt(&mut out, "overlap2_bar", j, o2_bar, 1.0 - 46.0 * q);
    }
    Ok(out)
}

/// Reference state for strategies that branch: the dominant eigenvector of
/// B after an honest-looking `j = 0` session.
fn principal_reference(p: &StrategyProfile) -> Result<StateVector> {
    let zero = p.query(0).ok_or_else(|| Error::Degenerate("profile lacks j = 0".into()))?;
    let rho = zero
        .a
        .conditioned()
        .or_else(|| zero.b.conditioned())
        .ok_or_else(|| Error::Degenerate("j = 0 never passes; no reference state".into()))?;
    Ok(rho.principal_vector())
}

/// Evaluates the fidelity theorem and its intermediate bounds.
pub fn verify_theorem(strategy: &BobStrategy, db: &Database, opts: &SessionOptions) -> Result<TheoremReport> {
    let p = profile(strategy, db, opts)?;
    verify_with_profile(strategy, db, &p)
}

/// As [`verify_theorem`] with a precomputed profile.
pub fn verify_with_profile(strategy: &BobStrategy, db: &Database, p: &StrategyProfile) -> Result<TheoremReport> {
    if !db.is_unique() {
        return Err(Error::Database("the fidelity bound assumes single-valued answers".into()));
    }
    let eps = p.epsilon();
    let q = eps.powf(0.25);
    let fidelity_rhs = (1.0 - FIDELITY_COEFF * q).max(0.0);
    let fidelity_rhs_630 = (1.0 - OVERLAP_COEFF * q).max(0.0);
    let unitary = strategy.is_unitary() && strategy.num_rounds() == 2;

    let (sigma, sigma_source, mut checks) = if unitary {
        let decs = decompose_all(strategy, db)?;
        (sigma_star(strategy, db)?, "phi_0_round2", intermediate_checks(&decs, eps)?)
    } else {
        (principal_reference(p)?, "principal_eigenvector", Vec::new())
    };
    let intermediates = unitary;

    let mut min_fidelity = f64::INFINITY;
    for qs in &p.queries {
        for s in Scenario::BOTH {
            let st = qs.scenario(s);
            let f = fidelity(&st.residual, &sigma)?;
            min_fidelity = min_fidelity.min(f);
            checks.push(InequalityCheck::new("fidelity", qs.j, Some(s), f, fidelity_rhs));
            if let Some(cond) = st.conditioned() {
                let fc = fidelity(&cond, &sigma)?;
                checks.push(InequalityCheck::new("mixture", qs.j, Some(s), f, (1.0 - eps) * fc));
            }
        }
    }
    let all_hold = checks.iter().all(|c| c.holds);
    Ok(TheoremReport {
        strategy: strategy.name.clone(),
        epsilon: eps,
        passes: p
            .queries
            .iter()
            .map(|q| PassRow {
                j: q.j,
                a: q.a.pass,
                b: q.b.pass,
            })
            .collect(),
        sigma_star: sigma,
        sigma_source: sigma_source.to_string(),
        min_fidelity,
        fidelity_rhs,
        fidelity_rhs_630,
        vacuous: fidelity_rhs <= 0.0,
        intermediates,
        checks,
        all_hold,
    })
}
