use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use super::{BobStrategy, Instr, PrepareSpec, RoundBody};
use crate::error::{Error, Result};
use crate::protocol::{apply_qram, Database, BOB};
use crate::qcore::{sample_branch, Complex, StateVector, PROB_CUTOFF};

/// One branch of Bob's execution: an un-normalized state and his classical
/// record so far. Branch probability is the squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub state: StateVector,
    pub record: Vec<usize>,
}

impl Branch {
    pub fn new(state: StateVector, record_len: usize) -> Self {
        Self {
            state,
            record: vec![0; record_len],
        }
    }

    pub fn probability(&self) -> f64 {
        self.state.norm_sqr()
    }
}

fn prepared(layout_dim: usize, register: &str, spec: &PrepareSpec, record: &[usize]) -> Result<StateVector> {
    match *spec {
        PrepareSpec::Basis { index } => StateVector::ket(register, layout_dim, index),
        PrepareSpec::SuperposedWithZero { slot, phase } => {
            let k = record[slot];
            if k == 0 {
                return StateVector::ket(register, layout_dim, 0);
            }
            if k >= layout_dim {
                return Err(Error::Strategy(format!("record value {k} does not fit {register}")));
            }
            let mut amps = vec![Complex::new(0.0, 0.0); layout_dim];
            amps[k] = Complex::new(FRAC_1_SQRT_2, 0.0);
            amps[0] = Complex::from_polar(FRAC_1_SQRT_2, phase);
            StateVector::register(register, amps)
        }
    }
}

/// Applies a deterministic step; `None` for branching steps.
fn apply_linear(instr: &Instr, branch: &Branch, db: &Database) -> Result<Option<StateVector>> {
    Ok(Some(match instr {
        Instr::Unitary { operator } => branch.state.apply(operator)?,
        Instr::Qram { q, r, selector } => apply_qram(&branch.state, db, q, r, selector.as_deref())?,
        Instr::RecordShift { slot, multiplier } => {
            let d_b = branch.state.layout().dim_of(BOB)?;
            let shift = multiplier * branch.record[*slot];
            branch.state.permute_basis(&[BOB], |d| vec![(d[0] + shift) % d_b])?
        }
        _ => return Ok(None),
    }))
}

/// Every successor branch of `instr`, un-normalized.
fn successors(instr: &Instr, branch: Branch, db: &Database) -> Result<Vec<Branch>> {
    if let Some(state) = apply_linear(instr, &branch, db)? {
        return Ok(vec![Branch {
            state,
            record: branch.record,
        }]);
    }
    match instr {
        Instr::Measure { register, slot } => branch
            .state
            .measurement_components(&[register], 0.0)?
            .into_iter()
            .map(|(outcome, state)| {
                let mut record = branch.record.clone();
                if let Some(s) = slot {
                    record[*s] = outcome[0];
                }
                Ok(Branch { state, record })
            })
            .collect(),
        Instr::MeasureProjective { projectors, slot } => {
            let mut out = Vec::new();
            let mut rest = branch.state.clone();
            for (k, p) in projectors.iter().enumerate() {
                let comp = branch.state.apply(p)?;
                rest = rest.sub(&comp)?;
                if comp.norm_sqr() > 0.0 {
                    let mut record = branch.record.clone();
                    if let Some(s) = slot {
                        record[*s] = k;
                    }
                    out.push(Branch { state: comp, record });
                }
            }
            if rest.norm_sqr() > PROB_CUTOFF * branch.probability() {
                let mut record = branch.record.clone();
                if let Some(s) = slot {
                    record[*s] = projectors.len();
                }
                out.push(Branch { state: rest, record });
            }
            Ok(out)
        }
        Instr::Reprepare { register, prepare } => {
            let dim = branch.state.layout().dim_of(register)?;
            let fresh = prepared(dim, register, prepare, &branch.record)?;
            let mut out = Vec::new();
            for k in 0..dim {
                let rest = branch.state.contract(&StateVector::ket(register, dim, k)?)?;
                if rest.norm_sqr() > 0.0 {
                    out.push(Branch {
                        state: StateVector::compose(branch.state.layout(), &fresh, &rest)?,
                        record: branch.record.clone(),
                    });
                }
            }
            Ok(out)
        }
        Instr::If {
            cond,
            then,
            otherwise,
        } => {
            let body = if cond.eval(&branch.record) { then } else { otherwise };
            run_steps_exact(body, vec![branch], db)
        }
        _ => unreachable!("linear steps handled above"),
    }
}

fn run_steps_exact(steps: &[Instr], mut branches: Vec<Branch>, db: &Database) -> Result<Vec<Branch>> {
    for instr in steps {
        let mut next = Vec::with_capacity(branches.len());
        for b in branches {
            next.extend(successors(instr, b, db)?);
        }
        branches = next;
    }
    Ok(branches)
}

/// Exhaustive execution of round `k` (1-based) on every branch.
pub fn run_round_exact(
    strategy: &BobStrategy,
    k: usize,
    db: &Database,
    branches: Vec<Branch>,
) -> Result<Vec<Branch>> {
    let action = round(strategy, k)?;
    match &action.body {
        RoundBody::Unitary { matrix } => branches
            .into_iter()
            .map(|b| {
                Ok(Branch {
                    state: b.state.apply(matrix)?,
                    record: b.record,
                })
            })
            .collect(),
        RoundBody::Program { tree } => run_steps_exact(tree, branches, db),
    }
}

fn round(strategy: &BobStrategy, k: usize) -> Result<&super::RoundAction> {
    strategy
        .rounds
        .get(k.wrapping_sub(1))
        .ok_or_else(|| Error::Strategy(format!("`{}` has no round {k}", strategy.name)))
}

fn run_steps_sampled<R: Rng + ?Sized>(
    steps: &[Instr],
    mut branch: Branch,
    db: &Database,
    rng: &mut R,
) -> Result<Branch> {
    for instr in steps {
        branch = match instr {
            Instr::If {
                cond,
                then,
                otherwise,
            } => {
                let body = if cond.eval(&branch.record) { then } else { otherwise };
                run_steps_sampled(body, branch, db, rng)?
            }
            _ => {
                let options = successors(instr, branch, db)?;
                let mut chosen = sample_branch(options, Branch::probability, rng);
                chosen.state = chosen.state.normalized()?;
                chosen
            }
        };
    }
    Ok(branch)
}

/// Executes round `k` on a normalized branch, realizing one outcome per
/// measurement.
pub fn run_round_sampled<R: Rng + ?Sized>(
    strategy: &BobStrategy,
    k: usize,
    db: &Database,
    branch: Branch,
    rng: &mut R,
) -> Result<Branch> {
    let action = round(strategy, k)?;
    match &action.body {
        RoundBody::Unitary { matrix } => Ok(Branch {
            state: branch.state.apply(matrix)?,
            record: branch.record,
        }),
        RoundBody::Program { tree } => run_steps_sampled(tree, branch, db, rng),
    }
}
