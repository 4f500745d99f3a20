//! Bob's behavior: per-round actions, their execution, and the catalog.

mod catalog;
mod complete;
mod exec;
mod random;
mod scope;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::qcore::Operator;

pub use catalog::{
    by_name, honest, joint_measurement_attack, lucky_reprepare_attack, measure_resend,
    multi_answer_database, multi_answer_nonrhetoric_attack, multi_answer_nonrhetoric_database,
    multi_answer_rhetoric_attack, multi_answer_unitary, nonrhetoric_unitary, weak_entangling,
    CatalogEntry, CATALOG,
};
pub use complete::complete_isometry;
pub use exec::{run_round_exact, run_round_sampled, Branch};
pub use random::{random_near_honest, RandomStrategyConfig};
pub use scope::{legal_scope, validate_scope, ScopeReport, ScopeViolation, ViolationKind};

/// Condition on Bob's classical record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum Cond {
    Eq { slot: usize, value: usize },
    Ne { slot: usize, value: usize },
    All { conds: Vec<Cond> },
}

impl Cond {
    pub fn eval(&self, record: &[usize]) -> bool {
        match self {
            Cond::Eq { slot, value } => record[*slot] == *value,
            Cond::Ne { slot, value } => record[*slot] != *value,
            Cond::All { conds } => conds.iter().all(|c| c.eval(record)),
        }
    }

    fn max_slot(&self) -> Option<usize> {
        match self {
            Cond::Eq { slot, .. } | Cond::Ne { slot, .. } => Some(*slot),
            Cond::All { conds } => conds.iter().filter_map(Cond::max_slot).max(),
        }
    }
}

/// State written by a re-preparation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum PrepareSpec {
    Basis { index: usize },
    /// `(|k⟩ + e^{iφ}|0⟩)/√2` with `k` read from the record; `|0⟩` when `k = 0`.
    SuperposedWithZero { slot: usize, phase: f64 },
}

/// One step of a round program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Instr {
    Unitary { operator: Operator },
    /// Honest modular-add qRAM on `(q, r)`.
    Qram {
        q: String,
        r: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        selector: Option<Vec<usize>>,
    },
    /// Computational-basis measurement, outcome stored in `slot`.
    Measure {
        register: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slot: Option<usize>,
    },
    /// Von Neumann measurement with mutually orthogonal projectors on a
    /// common layout; the leftover subspace reports `projectors.len()`.
    MeasureProjective {
        projectors: Vec<Operator>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        slot: Option<usize>,
    },
    /// `|b⟩_B → |(b + multiplier·record[slot]) mod d_B⟩_B`.
    RecordShift { slot: usize, multiplier: usize },
    /// Discards the register's content and prepares it afresh.
    Reprepare { register: String, prepare: PrepareSpec },
    If {
        cond: Cond,
        then: Vec<Instr>,
        #[serde(default)]
        otherwise: Vec<Instr>,
    },
}

impl Instr {
    fn touched(&self, out: &mut BTreeSet<String>) {
        match self {
            Instr::Unitary { operator } => out.extend(operator.layout().names().map(String::from)),
            Instr::Qram { q, r, .. } => {
                out.insert(q.clone());
                out.insert(r.clone());
            }
            Instr::Measure { register, .. } | Instr::Reprepare { register, .. } => {
                out.insert(register.clone());
            }
            Instr::MeasureProjective { projectors, .. } => {
                for p in projectors {
                    out.extend(p.layout().names().map(String::from));
                }
            }
            Instr::RecordShift { .. } => {
                out.insert(crate::protocol::BOB.to_string());
            }
            Instr::If {
                then, otherwise, ..
            } => {
                for i in then.iter().chain(otherwise) {
                    i.touched(out);
                }
            }
        }
    }

    fn max_slot(&self) -> Option<usize> {
        match self {
            Instr::Measure { slot, .. } | Instr::MeasureProjective { slot, .. } => *slot,
            Instr::RecordShift { slot, .. } => Some(*slot),
            Instr::Reprepare {
                prepare: PrepareSpec::SuperposedWithZero { slot, .. },
                ..
            } => Some(*slot),
            Instr::If {
                cond,
                then,
                otherwise,
            } => then
                .iter()
                .chain(otherwise)
                .filter_map(Instr::max_slot)
                .chain(cond.max_slot())
                .max(),
            _ => None,
        }
    }

    /// No measurement, branching or re-preparation.
    fn is_deterministic(&self) -> bool {
        matches!(self, Instr::Unitary { .. } | Instr::Qram { .. } | Instr::RecordShift { .. })
    }
}

/// Body of one round: a single unitary or a program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RoundBody {
    Unitary { matrix: Operator },
    Program { tree: Vec<Instr> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundAction {
    /// Registers this round declares it may act on.
    pub scope: Vec<String>,
    #[serde(flatten)]
    pub body: RoundBody,
}

impl RoundAction {
    pub fn unitary(scope: &[&str], matrix: Operator) -> Self {
        Self {
            scope: scope.iter().map(|s| s.to_string()).collect(),
            body: RoundBody::Unitary { matrix },
        }
    }

    pub fn program(scope: &[&str], tree: Vec<Instr>) -> Self {
        Self {
            scope: scope.iter().map(|s| s.to_string()).collect(),
            body: RoundBody::Program { tree },
        }
    }

    /// Registers the body actually acts on.
    pub fn touched(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match &self.body {
            RoundBody::Unitary { matrix } => out.extend(matrix.layout().names().map(String::from)),
            RoundBody::Program { tree } => {
                for i in tree {
                    i.touched(&mut out);
                }
            }
        }
        out
    }

    pub fn is_deterministic(&self) -> bool {
        match &self.body {
            RoundBody::Unitary { .. } => true,
            RoundBody::Program { tree } => tree.iter().all(Instr::is_deterministic),
        }
    }

    fn max_slot(&self) -> Option<usize> {
        match &self.body {
            RoundBody::Unitary { .. } => None,
            RoundBody::Program { tree } => tree.iter().filter_map(Instr::max_slot).max(),
        }
    }
}

/// Bob's complete behavior, identical in both scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BobStrategy {
    pub name: String,
    #[serde(rename = "d_B")]
    pub b_dim: usize,
    pub rounds: Vec<RoundAction>,
    /// Set for strategies that only make sense when the ordering constraint
    /// is lifted.
    #[serde(default)]
    pub requires_unconstrained: bool,
}

impl BobStrategy {
    pub fn new(name: impl Into<String>, b_dim: usize, rounds: Vec<RoundAction>) -> Self {
        Self {
            name: name.into(),
            b_dim,
            rounds,
            requires_unconstrained: false,
        }
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// Every round is a fixed linear map (no measurement or re-preparation).
    pub fn is_unitary(&self) -> bool {
        self.rounds.iter().all(RoundAction::is_deterministic)
    }

    /// Length of the classical record.
    pub fn record_len(&self) -> usize {
        self.rounds
            .iter()
            .filter_map(RoundAction::max_slot)
            .max()
            .map_or(0, |m| m + 1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        if s.b_dim == 0 {
            return Err(crate::Error::Strategy("d_B must be positive".into()));
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_round_trip() {
        let s = lucky_reprepare_attack(0.3);
        let text = s.to_json().unwrap();
        assert!(text.contains("\"kind\": \"program\""));
        assert_eq!(BobStrategy::from_json(&text).unwrap(), s);
        assert_eq!(s.record_len(), 2);
        assert!(!s.is_unitary());
        assert!(honest(2).is_unitary());
    }
}
