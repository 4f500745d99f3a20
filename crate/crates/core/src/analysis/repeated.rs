use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::protocol::{run_session_exact, run_session_with_rng, Database, QuerySpec, Scenario, SessionOptions, BOB};
use crate::qcore::{sample_branch, Complex, DensityMatrix, StateVector, PROB_CUTOFF};
use crate::strategies::BobStrategy;

/// Setup shared by the exact and sampled repeated-query experiments.
#[derive(Debug, Clone)]
pub struct RepeatedQuery {
    pub spec: QuerySpec,
    pub scenario: Scenario,
    pub sessions: usize,
    /// Bob measures B in the computational basis between sessions.
    pub measure_b_between: bool,
    pub opts: SessionOptions,
}

impl RepeatedQuery {
    pub fn new(j: usize, sessions: usize, measure_b_between: bool) -> Self {
        Self {
            spec: QuerySpec::canonical(j),
            scenario: Scenario::A,
            sessions,
            measure_b_between,
            opts: SessionOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub sessions: usize,
    pub measure_b_between: bool,
    /// Probability that every session passes.
    pub all_pass_probability: f64,
    /// Probability that every session passes and the answers are not all equal.
    pub mismatch_probability: f64,
    /// Passing answer sequences and their probabilities.
    pub histories: Vec<(Vec<usize>, f64)>,
}

fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let diag = nalgebra::DMatrix::from_diagonal(&rho.matrix().diagonal().map(|z| Complex::new(z.re, 0.0)));
    DensityMatrix::from_matrix_unchecked(rho.layout().clone(), diag)
}

fn all_equal(xs: &[usize]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Exact enumeration: B is carried from session to session while Alice
/// starts fresh registers each time.
pub fn repeated_query_exact(strategy: &BobStrategy, db: &Database, setup: &RepeatedQuery) -> Result<ConsistencyReport> {
    if setup.sessions == 0 {
        return Err(Error::Domain("at least one session is required".into()));
    }
    let start = StateVector::ket(BOB, strategy.b_dim, 0)?.to_density();
    // answer history -> unnormalized B state restricted to passing
    let mut histories: BTreeMap<Vec<usize>, DensityMatrix> = BTreeMap::new();
    histories.insert(Vec::new(), start);
    for s in 0..setup.sessions {
        let mut next: BTreeMap<Vec<usize>, DensityMatrix> = BTreeMap::new();
        for (hist, rho) in &histories {
            let rho = if s > 0 && setup.measure_b_between { dephase(rho) } else { rho.clone() };
            for (w, psi) in rho.pure_components() {
                let opts = SessionOptions {
                    bob_initial: Some(psi),
                    ..setup.opts.clone()
                };
                let out = run_session_exact(&setup.spec, setup.scenario, db, strategy, &opts)?;
                let report = out.test.expect("exact sessions carry the test report");
                let target = report
                    .branches
                    .first()
                    .and_then(|b| b.observed.iter().position(|&(i, _)| i == setup.spec.j))
                    .unwrap_or(0);
                for br in &report.branches {
                    let Some(comp) = &br.component else { continue };
                    if br.pass_probability <= PROB_CUTOFF {
                        continue;
                    }
                    let mut h = hist.clone();
                    h.push(br.observed[target].1);
                    let part = comp.partial_trace(&[BOB])?.scaled(w);
                    let merged = match next.remove(&h) {
                        Some(acc) => acc.add(&part)?,
                        None => part,
                    };
                    next.insert(h, merged);
                }
            }
        }
        histories = next;
    }
    let histories: Vec<(Vec<usize>, f64)> = histories.into_iter().map(|(h, r)| (h, r.trace())).collect();
    let all_pass_probability = histories.iter().map(|(_, p)| p).sum();
    let mismatch_probability = histories.iter().filter(|(h, _)| !all_equal(h)).map(|(_, p)| p).sum();
    Ok(ConsistencyReport {
        sessions: setup.sessions,
        measure_b_between: setup.measure_b_between,
        all_pass_probability,
        mismatch_probability,
        histories,
    })
}

/// One sampled run of consecutive sessions.
#[derive(Debug, Clone, Serialize)]
pub struct SampledRun {
    /// Recovered answers, `None` for failed sessions.
    pub answers: Vec<Option<usize>>,
    pub all_passed: bool,
    pub consistent: bool,
}

/// Sampled sessions sharing B, from `seed`.
pub fn repeated_query_sampled(
    strategy: &BobStrategy,
    db: &Database,
    setup: &RepeatedQuery,
    seed: u64,
) -> Result<SampledRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bob = StateVector::ket(BOB, strategy.b_dim, 0)?;
    let mut answers = Vec::with_capacity(setup.sessions);
    for s in 0..setup.sessions {
        if s > 0 && setup.measure_b_between {
            let b = bob.measure_sampled(&[BOB], &mut rng)?;
            bob = b.post_state;
        }
        let opts = SessionOptions {
            bob_initial: Some(bob.clone()),
            ..setup.opts.clone()
        };
        let (out, _) = run_session_with_rng(&setup.spec, Some(setup.scenario), db, strategy, &opts, &mut rng, seed)?;
        answers.push(out.recovered_answer);
        bob = unravel(&out.bob_residual, &mut rng)?;
    }
    let all_passed = answers.iter().all(Option::is_some);
    let got: Vec<usize> = answers.iter().flatten().copied().collect();
    Ok(SampledRun {
        consistent: all_passed && all_equal(&got),
        all_passed,
        answers,
    })
}

/// Draws a pure state from the eigen-ensemble of `rho`.
fn unravel<R: Rng + ?Sized>(rho: &DensityMatrix, rng: &mut R) -> Result<StateVector> {
    let parts = rho.pure_components();
    if parts.is_empty() {
        return Err(Error::Degenerate("B has vanishing trace".into()));
    }
    Ok(sample_branch(parts, |p| p.0, rng).1)
}
