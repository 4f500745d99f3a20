use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{q_name, r_name, Database, Scenario, BOB};
use crate::qcore::{Complex, RegisterLayout, StateVector, PROB_CUTOFF};
use crate::strategies::{run_round_exact, BobStrategy, Branch};

/// `U|in⟩ = √η |C; Φ⟩ + √(1−η) |V⟩` with `⟨C|V⟩ = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub eta: f64,
    /// Normalized conditional remainder; `None` when `η ≤ 1e-12`.
    pub phi: Option<StateVector>,
    /// `‖√(1−η)|V⟩‖`.
    pub residual_norm: f64,
    /// `‖⟨C|V⟩‖`, zero up to rounding.
    pub check_leak: f64,
}

/// The four decompositions of one query plus the two κ overlaps.
#[derive(Debug, Clone, Serialize)]
pub struct QueryDecomposition {
    pub j: usize,
    /// Round 1 on `|j⟩`.
    pub eta1: Decomposition,
    /// Round 1 on `|+j⟩`.
    pub eta1_bar: Decomposition,
    /// Round 2 on `|j⟩|Φ̄_j^{(1)}⟩` (scenario b).
    pub eta2: Decomposition,
    /// Round 2 on `|+j⟩|Φ_j^{(1)}⟩` (scenario a).
    pub eta2_bar: Decomposition,
    /// `⟨C_j;Φ_j^{(2)}|U^{(2)}|j;Φ_0^{(1)}⟩`
    pub kappa: Option<Complex>,
    /// `⟨C_{+j};Φ̄_j^{(2)}|U^{(2)}|+j;Φ_0^{(1)}⟩`
    pub kappa_bar: Option<Complex>,
}

fn require_unitary(strategy: &BobStrategy) -> Result<()> {
    if !strategy.is_unitary() || strategy.num_rounds() != 2 {
        return Err(Error::Strategy(format!(
            "`{}` is not a two-round unitary strategy",
            strategy.name
        )));
    }
    Ok(())
}

/// Deterministic round `k` applied to a state on a sub-layout.
fn evolve(strategy: &BobStrategy, k: usize, db: &Database, state: StateVector) -> Result<StateVector> {
    let mut out = run_round_exact(strategy, k, db, vec![Branch::new(state, strategy.record_len())])?;
    match out.len() {
        1 => Ok(out.pop().expect("one branch").state),
        _ => Err(Error::Strategy("round branched; not a unitary strategy".into())),
    }
}

/// `|j⟩` or `|+j⟩` (canonical) on register `q`.
fn query(q: &str, n: usize, j: usize, superposed: bool) -> Result<StateVector> {
    let mut amps = vec![Complex::new(0.0, 0.0); n];
    if superposed && j != 0 {
        amps[j] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[0] = Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    } else {
        amps[j] = Complex::new(1.0, 0.0);
    }
    StateVector::register(q, amps)
}

/// `|C_j⟩` or `|C_{+j}⟩` on `(q, r)`.
fn check_state(db: &Database, q: &str, r: &str, j: usize, superposed: bool) -> Result<StateVector> {
    let cj = db.check_state(q, r, j, db.answer(j)?)?;
    if !superposed || j == 0 {
        return Ok(cj);
    }
    let c0 = db.check_state(q, r, 0, db.rhetoric_answer())?;
    Ok(cj.add(&c0)?.scaled(Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

fn split(evolved: &StateVector, check: &StateVector) -> Result<Decomposition> {
    let rest = evolved.contract(check)?;
    let eta = rest.norm_sqr();
    let v = evolved.sub(&StateVector::compose(evolved.layout(), check, &rest)?)?;
    let residual_norm = v.norm_sqr().sqrt();
    let check_leak = v.contract(check)?.norm_sqr().sqrt();
    let phi = if eta > PROB_CUTOFF { Some(rest.normalized()?) } else { None };
    Ok(Decomposition {
        eta,
        phi,
        residual_norm,
        check_leak,
    })
}

fn blank(name: &str, dim: usize) -> Result<StateVector> {
    StateVector::ket(name, dim, 0)
}

/// Round-1 decomposition on `|j⟩` (`superposed = false`) or `|+j⟩`.
pub fn decompose_round1(strategy: &BobStrategy, db: &Database, j: usize, superposed: bool) -> Result<Decomposition> {
    require_unitary(strategy)?;
    let (q1, r1, r2) = (q_name(1), r_name(1), r_name(2));
    let d_r = db.answer_dim();
    let input = StateVector::product(&[
        query(&q1, db.entries(), j, superposed)?,
        blank(&r1, d_r)?,
        blank(&r2, d_r)?,
        blank(BOB, strategy.b_dim)?,
    ])?;
    let out = evolve(strategy, 1, db, input)?;
    split(&out, &check_state(db, &q1, &r1, j, superposed)?)
}

/// Round-2 decomposition of `|j⟩|φ⟩` or `|+j⟩|φ⟩` with `φ` on `(R2, B)`.
pub fn decompose_round2(
    strategy: &BobStrategy,
    db: &Database,
    j: usize,
    superposed: bool,
    phi: &StateVector,
) -> Result<Decomposition> {
    require_unitary(strategy)?;
    let (q2, r2) = (q_name(2), r_name(2));
    let layout = RegisterLayout::new([(q2.as_str(), db.entries()), (r2.as_str(), db.answer_dim()), (BOB, strategy.b_dim)])?;
    let input = StateVector::product(&[query(&q2, db.entries(), j, superposed)?, phi.clone()])?.reordered(&layout)?;
    let out = evolve(strategy, 2, db, input)?;
    split(&out, &check_state(db, &q2, &r2, j, superposed)?)
}

/// `decompose_round` in one call: `round ∈ {1, 2}`; scenario a means the
/// plain query in round 1 and the superposed one in round 2.
pub fn decompose_round(
    strategy: &BobStrategy,
    db: &Database,
    j: usize,
    round: usize,
    scenario: Scenario,
) -> Result<Decomposition> {
    let first_superposed = scenario == Scenario::B;
    match round {
        1 => decompose_round1(strategy, db, j, first_superposed),
        2 => {
            let d1 = decompose_round1(strategy, db, j, first_superposed)?;
            let phi = d1
                .phi
                .ok_or_else(|| Error::Degenerate(format!("round-1 pass probability is 0 for j = {j}")))?;
            decompose_round2(strategy, db, j, !first_superposed, &phi)
        }
        other => Err(Error::Domain(format!("round {other} is not 1 or 2"))),
    }
}

fn kappa(
    strategy: &BobStrategy,
    db: &Database,
    j: usize,
    superposed: bool,
    phi0: &StateVector,
    phi2: Option<&StateVector>,
) -> Result<Option<Complex>> {
    let Some(phi2) = phi2 else { return Ok(None) };
    let (q2, r2) = (q_name(2), r_name(2));
    let layout = RegisterLayout::new([(q2.as_str(), db.entries()), (r2.as_str(), db.answer_dim()), (BOB, strategy.b_dim)])?;
    let input = StateVector::product(&[query(&q2, db.entries(), j, superposed)?, phi0.clone()])?.reordered(&layout)?;
    let out = evolve(strategy, 2, db, input)?;
    let on_b = out.contract(&check_state(db, &q2, &r2, j, superposed)?)?;
    Ok(Some(phi2.inner(&on_b)?))
}

/// Every decomposition for query `j`; `phi0_round1` is `Φ_0^{(1)}` (needed for κ).
pub fn decompose_query(
    strategy: &BobStrategy,
    db: &Database,
    j: usize,
    phi0_round1: Option<&StateVector>,
) -> Result<QueryDecomposition> {
    let eta1 = decompose_round1(strategy, db, j, false)?;
    let eta1_bar = decompose_round1(strategy, db, j, true)?;
    let undefined = || Decomposition {
        eta: 0.0,
        phi: None,
        residual_norm: 0.0,
        check_leak: 0.0,
    };
    let eta2_bar = match &eta1.phi {
        Some(phi) => decompose_round2(strategy, db, j, true, phi)?,
        None => undefined(),
    };
    let eta2 = match &eta1_bar.phi {
        Some(phi) => decompose_round2(strategy, db, j, false, phi)?,
        None => undefined(),
    };
    let (kappa_v, kappa_bar) = match phi0_round1 {
        Some(phi0) if j != 0 => (
            kappa(strategy, db, j, false, phi0, eta2.phi.as_ref())?,
            kappa(strategy, db, j, true, phi0, eta2_bar.phi.as_ref())?,
        ),
        _ => (None, None),
    };
    Ok(QueryDecomposition {
        j,
        eta1,
        eta1_bar,
        eta2,
        eta2_bar,
        kappa: kappa_v,
        kappa_bar,
    })
}

/// Decompositions for every query, `j = 0` first.
pub fn decompose_all(strategy: &BobStrategy, db: &Database) -> Result<Vec<QueryDecomposition>> {
    let zero = decompose_query(strategy, db, 0, None)?;
    let phi0 = zero.eta1.phi.clone();
    let mut out = vec![zero];
    for j in 1..db.entries() {
        out.push(decompose_query(strategy, db, j, phi0.as_ref())?);
    }
    Ok(out)
}

/// `σ* = |Φ_0^{(2)}⟩`.
pub fn sigma_star(strategy: &BobStrategy, db: &Database) -> Result<StateVector> {
    let d1 = decompose_round1(strategy, db, 0, false)?;
    let phi1 = d1
        .phi
        .ok_or_else(|| Error::Degenerate("η_0^{(1)} vanishes, no reference state".into()))?;
    decompose_round2(strategy, db, 0, false, &phi1)?
        .phi
        .ok_or_else(|| Error::Degenerate("η_0^{(2)} vanishes, no reference state".into()))
}

