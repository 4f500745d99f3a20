use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{sample_branch, StateVector, PROB_CUTOFF};

use super::plan::SessionPlan;
use super::query::{QuerySpec, Scenario};
use super::Database;

/// Whether Alice checks the plain answer against her own copy of the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerCheck {
    #[default]
    Strict,
    None,
}

/// One outcome of the plain-register measurements.
#[derive(Debug, Clone)]
pub struct TestBranch {
    /// `(index, answer)` per plain register, in arrival order.
    pub observed: Vec<(usize, usize)>,
    /// Probability of this observation.
    pub probability: f64,
    /// Joint probability of this observation and a passing projection.
    pub pass_probability: f64,
    /// Un-normalized passing component, `None` when the branch fails outright.
    pub component: Option<StateVector>,
}

#[derive(Debug, Clone)]
pub struct HonestyReport {
    pub pass_probability: f64,
    pub branches: Vec<TestBranch>,
}

impl HonestyReport {
    /// Target answer shared by every branch that passes with non-negligible weight.
    pub fn recovered_answer(&self, slot: usize) -> Option<usize> {
        let mut found = None;
        for b in self.branches.iter().filter(|b| b.pass_probability > PROB_CUTOFF) {
            let a = b.observed[slot].1;
            match found {
                None => found = Some(a),
                Some(prev) if prev != a => return None,
                _ => {}
            }
        }
        found
    }

    /// `(answer, probability)` of the observed answer on plain `slot`,
    /// joint with passing.
    pub fn answer_distribution(&self, slot: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for b in &self.branches {
            let a = b.observed[slot].1;
            match out.iter_mut().find(|(x, _)| *x == a) {
                Some(entry) => entry.1 += b.pass_probability,
                None => out.push((a, b.pass_probability)),
            }
        }
        out.retain(|&(_, p)| p > 0.0);
        out.sort_by_key(|&(a, _)| a);
        out
    }
}

fn plain_ok(db: &Database, expected: usize, idx: usize, answer: usize, check: AnswerCheck) -> bool {
    idx == expected && (check == AnswerCheck::None || db.answers(idx).contains(&answer))
}

/// Exact test over a set of un-normalized branches whose total weight is one.
pub fn test_branches(
    plan: &SessionPlan,
    db: &Database,
    states: &[&StateVector],
    check: AnswerCheck,
) -> Result<HonestyReport> {
    let plain: Vec<_> = plan.plain_slots().collect();
    let mut branches = Vec::new();
    for state in states {
        if state.layout() != &plan.layout {
            return Err(Error::DimensionMismatch(format!(
                "final state on {} but the session uses {}",
                state.layout(),
                plan.layout
            )));
        }
        // Measure the plain pairs in arrival order.
        let mut partial: Vec<(Vec<(usize, usize)>, StateVector)> = vec![(Vec::new(), (*state).clone())];
        for (slot, _) in &plain {
            let mut next = Vec::new();
            for (obs, s) in partial {
                for (outcome, comp) in s.measurement_components(&[&slot.q, &slot.r], 0.0)? {
                    let mut o = obs.clone();
                    o.push((outcome[0], outcome[1]));
                    next.push((o, comp));
                }
            }
            partial = next;
        }
        for (observed, comp) in partial {
            let probability = comp.norm_sqr();
            let ok = plain
                .iter()
                .zip(&observed)
                .all(|((_, expected), &(idx, a))| plain_ok(db, *expected, idx, a, check));
            let (pass_probability, component) = if ok {
                let target = plan.check_target(db, &observed)?;
                let passing = comp.project_component(&target)?;
                (passing.norm_sqr(), Some(passing))
            } else {
                (0.0, None)
            };
            branches.push(TestBranch {
                observed,
                probability,
                pass_probability,
                component,
            });
        }
    }
    let pass_probability = branches.iter().map(|b| b.pass_probability).sum();
    Ok(HonestyReport {
        pass_probability,
        branches,
    })
}

/// Realized verdict of one sampled test.
#[derive(Debug, Clone)]
pub struct SampledVerdict {
    pub passed: bool,
    pub observed: Vec<(usize, usize)>,
    /// Post-test state (normalized).
    pub post_state: StateVector,
}

/// Sampled test on a normalized state.
pub fn test_sampled<R: Rng + ?Sized>(
    plan: &SessionPlan,
    db: &Database,
    state: &StateVector,
    check: AnswerCheck,
    rng: &mut R,
) -> Result<SampledVerdict> {
    let mut current = state.clone();
    let mut observed = Vec::new();
    let mut ok = true;
    for (slot, expected) in plan.plain_slots() {
        let b = current.measure_sampled(&[&slot.q, &slot.r], rng)?;
        let (idx, a) = (b.outcome[0], b.outcome[1]);
        ok &= plain_ok(db, expected, idx, a, check);
        observed.push((idx, a));
        current = b.post_state;
    }
    if !ok {
        return Ok(SampledVerdict {
            passed: false,
            observed,
            post_state: current,
        });
    }
    let target = plan.check_target(db, &observed)?;
    let proj = current.project(&target)?;
    let fail = current.sub(&current.project_component(&target)?)?;
    let fail_p = fail.norm_sqr();
    let mut options = Vec::new();
    if let Some(post) = proj.post_state {
        options.push((true, proj.probability, post));
    }
    if fail_p > PROB_CUTOFF {
        options.push((false, fail_p, fail.normalized()?));
    }
    let (passed, _, post_state) = sample_branch(options, |o| o.1, rng);
    Ok(SampledVerdict {
        passed,
        observed,
        post_state,
    })
}

/// Exact honesty test of a single final state.
pub fn honesty_test(
    final_state: &StateVector,
    spec: &QuerySpec,
    scenario: Scenario,
    db: &Database,
    check: AnswerCheck,
) -> Result<HonestyReport> {
    let d_b = final_state.layout().dim_of(super::plan::BOB)?;
    let plan = SessionPlan::new(spec, scenario, db, d_b)?;
    test_branches(&plan, db, &[final_state], check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::qram_unitary;

    fn db() -> Database {
        Database::unique(2, 4, &[1, 2, 3, 0]).unwrap()
    }

    fn honest_final(spec: &QuerySpec, scenario: Scenario) -> (SessionPlan, StateVector) {
        let db = db();
        let plan = SessionPlan::new(spec, scenario, &db, 1).unwrap();
        let mut s = plan.initial.clone();
        for slot in &plan.rounds {
            s = s.apply(&qram_unitary(&db, &slot.q, &slot.r, None).unwrap()).unwrap();
        }
        (plan, s)
    }

    #[test]
    fn honest_reply_passes() {
        for j in 0..4 {
            for sc in Scenario::BOTH {
                let spec = QuerySpec::canonical(j);
                let (plan, s) = honest_final(&spec, sc);
                let r = test_branches(&plan, &db(), &[&s], AnswerCheck::Strict).unwrap();
                assert!((r.pass_probability - 1.0).abs() < 1e-12);
                let target = plan.plain_slots().next().map(|_| 0).unwrap();
                assert_eq!(r.recovered_answer(target), Some(db().answer(j).unwrap()));
            }
        }
    }

    #[test]
    fn collapsed_superposition_passes_half() {
        let db = db();
        let layout = SessionPlan::new(&QuerySpec::canonical(1), Scenario::A, &db, 1)
            .unwrap()
            .layout;
        let s = StateVector::basis(layout, &[1, 1, 2, 2, 0]).unwrap();
        let r = honesty_test(&s, &QuerySpec::canonical(1), Scenario::A, &db, AnswerCheck::Strict).unwrap();
        assert!((r.pass_probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wrong_plain_answer_fails_strict() {
        let db = db();
        let spec = QuerySpec::canonical(1);
        let (plan, s) = honest_final(&spec, Scenario::A);
        // Shift R1 by one: wrong answer on the plain register.
        let bad = s.permute_basis(&["R1"], |d| vec![(d[0] + 1) % 4]).unwrap();
        let r = test_branches(&plan, &db, &[&bad], AnswerCheck::Strict).unwrap();
        assert!(r.pass_probability.abs() < 1e-12);
        let loose = test_branches(&plan, &db, &[&bad], AnswerCheck::None).unwrap();
        assert!(loose.pass_probability < 1.0);
    }
}
