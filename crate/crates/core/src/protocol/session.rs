use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, StateVector, STATE_TOL};
use crate::strategies::{run_round_exact, run_round_sampled, validate_scope, BobStrategy, Branch};

use super::honesty::{test_branches, test_sampled, AnswerCheck, HonestyReport};
use super::plan::{SessionPlan, BOB};
use super::query::{QuerySpec, Scenario};
use super::transcript::{Direction, Message, Payload, Transcript, TranscriptOutcome};
use super::Database;

#[derive(Debug, Clone, Default)]
pub struct SessionOptions {
    pub answer_check: AnswerCheck,
    /// Lifts the register-ordering rule (Alice's ancilla stays off limits).
    pub unconstrained: bool,
    /// Initial state of B; `|0⟩` when absent.
    pub bob_initial: Option<StateVector>,
}

/// Result of one session.
#[derive(Debug, Clone)]
pub struct SessionOutcome {
    /// `None` for the three-message protocol.
    pub scenario: Option<Scenario>,
    /// Exact pass probability (exact mode) or the realized 0/1 verdict.
    pub pass_probability: f64,
    pub passed: bool,
    pub detected_cheating: bool,
    /// Answer Alice reads on the target register, when every passing branch
    /// agrees on it.
    pub recovered_answer: Option<usize>,
    /// Answer read on the decoy register of the three-message protocol.
    pub decoy_answer: Option<usize>,
    /// `(answer, probability)` on the target register, joint with passing.
    pub answer_distribution: Vec<(usize, f64)>,
    /// Bob's branches at the end of his last round (weights sum to one).
    pub final_branches: Vec<Branch>,
    /// Reduced state of B, unconditioned.
    pub bob_residual: DensityMatrix,
    /// Reduced state of B restricted to passing outcomes (trace = pass probability).
    pub bob_passed: DensityMatrix,
    pub test: Option<HonestyReport>,
}

impl SessionOutcome {
    /// The final state when Bob's execution did not branch.
    pub fn final_state(&self) -> Option<&StateVector> {
        match self.final_branches.as_slice() {
            [only] => Some(&only.state),
            _ => None,
        }
    }

    /// B conditioned on passing; `None` when passing is impossible.
    pub fn bob_conditioned(&self) -> Option<DensityMatrix> {
        self.bob_passed.normalized().ok()
    }
}

/// Alice's prepared input `|Ψ⟩` over the session layout.
pub fn prepare_queries(spec: &QuerySpec, scenario: Scenario, db: &Database, d_b: usize) -> Result<StateVector> {
    Ok(SessionPlan::new(spec, scenario, db, d_b)?.initial)
}

fn check_strategy(plan: &SessionPlan, strategy: &BobStrategy, opts: &SessionOptions) -> Result<()> {
    let report = validate_scope(strategy, plan.num_rounds(), opts.unconstrained);
    if !report.is_ok() {
        return Err(Error::Scope(report.to_string()));
    }
    Ok(())
}

fn initial_state(plan: &SessionPlan, opts: &SessionOptions) -> Result<StateVector> {
    match &opts.bob_initial {
        Some(b) => plan.initial_with_bob(b),
        None => Ok(plan.initial.clone()),
    }
}

fn plain_slot_of(plan: &SessionPlan, idx: usize) -> Option<usize> {
    plan.plain_slots().position(|(_, i)| i == idx)
}

fn sum_b(states: impl Iterator<Item = Result<DensityMatrix>>, d_b: usize) -> Result<DensityMatrix> {
    let layout = crate::qcore::RegisterLayout::single(BOB, d_b)?;
    let mut acc = DensityMatrix::maximally_mixed(layout).scaled(0.0);
    for rho in states {
        acc = acc.add(&rho?)?;
    }
    Ok(acc)
}

/// Session plan for `spec`/`scenario` with Bob's ancilla dimension.
pub fn session_plan(spec: &QuerySpec, scenario: Scenario, db: &Database, strategy: &BobStrategy) -> Result<SessionPlan> {
    SessionPlan::new(spec, scenario, db, strategy.b_dim)
}

/// Exact session: every measurement branch of Bob and of Alice's test is
/// enumerated.
pub fn run_session_exact(
    spec: &QuerySpec,
    scenario: Scenario,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
) -> Result<SessionOutcome> {
    let plan = session_plan(spec, scenario, db, strategy)?;
    check_strategy(&plan, strategy, opts)?;
    let mut branches = vec![Branch::new(initial_state(&plan, opts)?, strategy.record_len())];
    for k in 1..=plan.num_rounds() {
        branches = run_round_exact(strategy, k, db, branches)?;
    }
    let states: Vec<&StateVector> = branches.iter().map(|b| &b.state).collect();
    let report = test_branches(&plan, db, &states, opts.answer_check)?;
    let d_b = strategy.b_dim;
    let bob_residual = sum_b(branches.iter().map(|b| b.state.partial_trace(&[BOB])), d_b)?;
    let bob_passed = sum_b(
        report
            .branches
            .iter()
            .filter_map(|t| t.component.as_ref())
            .map(|c| c.partial_trace(&[BOB])),
        d_b,
    )?;
    let target = plain_slot_of(&plan, spec.j).expect("target is always a plain register");
    let decoy = match spec.partner() {
        p if p != spec.j => plain_slot_of(&plan, p),
        _ => None,
    };
    let pass_probability = report.pass_probability;
    let passed = pass_probability >= 1.0 - STATE_TOL;
    Ok(SessionOutcome {
        scenario: plan.scenario,
        pass_probability,
        passed,
        detected_cheating: !passed,
        recovered_answer: report.recovered_answer(target),
        decoy_answer: decoy.and_then(|d| report.recovered_answer(d)),
        answer_distribution: report.answer_distribution(target),
        final_branches: branches,
        bob_residual,
        bob_passed,
        test: Some(report),
    })
}

/// Per-scenario exact pass probabilities and their mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassProbabilities {
    pub a: f64,
    pub b: f64,
    pub mean: f64,
}

pub fn pass_probability(
    spec: &QuerySpec,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
) -> Result<PassProbabilities> {
    let a = run_session_exact(spec, Scenario::A, db, strategy, opts)?.pass_probability;
    let b = run_session_exact(spec, Scenario::B, db, strategy, opts)?.pass_probability;
    Ok(PassProbabilities {
        a,
        b,
        mean: 0.5 * (a + b),
    })
}

/// States larger than this are summarized instead of stored in transcripts.
pub const MAX_PAYLOAD_DIM: usize = 4096;

fn payload(state: &StateVector) -> Payload {
    if state.dim() <= MAX_PAYLOAD_DIM {
        Payload::State { state: state.clone() }
    } else {
        let mut fields = std::collections::BTreeMap::new();
        fields.insert("dimension".to_string(), state.dim().to_string());
        fields.insert("layout".to_string(), state.layout().to_string());
        Payload::Classical { fields }
    }
}

/// One sampled session from `seed`; the scenario is drawn uniformly when
/// not given.
pub fn run_session_sampled(
    spec: &QuerySpec,
    scenario: Option<Scenario>,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
    seed: u64,
) -> Result<(SessionOutcome, Transcript)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_session_with_rng(spec, scenario, db, strategy, opts, &mut rng, seed)
}

/// As [`run_session_sampled`] with a caller-owned generator; `seed` is only
/// recorded in the transcript.
pub fn run_session_with_rng<R: Rng + ?Sized>(
    spec: &QuerySpec,
    scenario: Option<Scenario>,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
    rng: &mut R,
    seed: u64,
) -> Result<(SessionOutcome, Transcript)> {
    let scenario = scenario.unwrap_or_else(|| if rng.random::<bool>() { Scenario::A } else { Scenario::B });
    let plan = session_plan(spec, scenario, db, strategy)?;
    check_strategy(&plan, strategy, opts)?;
    let mut branch = Branch::new(initial_state(&plan, opts)?, strategy.record_len());
    let mut messages = Vec::new();
    for slot in &plan.rounds {
        messages.push(Message {
            round: slot.round,
            direction: Direction::AliceToBob,
            registers: vec![slot.q.clone()],
            payload: payload(&branch.state),
        });
        branch = run_round_sampled(strategy, slot.round, db, branch, rng)?;
        messages.push(Message {
            round: slot.round,
            direction: Direction::BobToAlice,
            registers: vec![slot.q.clone(), slot.r.clone()],
            payload: payload(&branch.state),
        });
    }
    let verdict = test_sampled(&plan, db, &branch.state, opts.answer_check, rng)?;
    let target = plain_slot_of(&plan, spec.j).expect("target is always a plain register");
    let recovered = verdict.passed.then(|| verdict.observed[target].1);
    let decoy_answer = match spec.partner() {
        p if p != spec.j && verdict.passed => plain_slot_of(&plan, p).map(|d| verdict.observed[d].1),
        _ => None,
    };
    let bob = verdict.post_state.partial_trace(&[BOB])?;
    let zero = bob.scaled(0.0);
    let outcome = SessionOutcome {
        scenario: plan.scenario,
        pass_probability: if verdict.passed { 1.0 } else { 0.0 },
        passed: verdict.passed,
        detected_cheating: !verdict.passed,
        recovered_answer: recovered,
        decoy_answer,
        answer_distribution: recovered.map(|a| vec![(a, 1.0)]).unwrap_or_default(),
        final_branches: vec![branch],
        bob_passed: if verdict.passed { bob.clone() } else { zero },
        bob_residual: bob,
        test: None,
    };
    let transcript = Transcript {
        version: Transcript::VERSION,
        n: db.n(),
        d_r: db.answer_dim(),
        d_b: strategy.b_dim,
        scenario: plan.scenario,
        seed,
        variant: spec.variant.name().to_string(),
        messages,
        outcome: TranscriptOutcome {
            passed: verdict.passed,
            recovered_answer: recovered,
        },
    };
    Ok((outcome, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::{honest, joint_measurement_attack};

    #[test]
    fn honest_final_state() {
        let db = Database::unique(2, 4, &[1, 2, 3, 0]).unwrap();
        let out = run_session_exact(&QuerySpec::canonical(2), Scenario::A, &db, &honest(2), &Default::default())
            .unwrap();
        assert!(out.passed);
        assert_eq!(out.recovered_answer, Some(3));
        let s = out.final_state().unwrap();
        // |C_2⟩_{Q1R1} |C_{+2}⟩_{Q2R2}
        assert!((s.amplitude(&[2, 2, 3, 3, 0]).unwrap().re - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((s.amplitude(&[2, 0, 3, 1, 0]).unwrap().re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scope_violation_is_an_error() {
        let db = Database::standard(2, 8).unwrap();
        let err = run_session_exact(
            &QuerySpec::canonical(1),
            Scenario::A,
            &db,
            &joint_measurement_attack(2),
            &Default::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Scope(_)));
    }

    #[test]
    fn sampled_is_deterministic() {
        let db = Database::standard(2, 8).unwrap();
        let run = || {
            run_session_sampled(&QuerySpec::canonical(3), None, &db, &honest(2), &Default::default(), 42)
                .unwrap()
                .1
                .to_json()
                .unwrap()
        };
        assert_eq!(run(), run());
    }
}
