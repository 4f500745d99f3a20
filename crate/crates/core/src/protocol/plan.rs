use crate::error::{Error, Result};
use crate::qcore::{Complex, RegisterLayout, StateVector};

use super::query::{MessageRole, QuerySpec, QueryTerm, QueryVariant, Scenario};
use super::Database;

/// Name of Bob's ancilla register.
pub const BOB: &str = "B";
/// Name of Alice's entanglement ancilla.
pub const ANCILLA: &str = "A";

pub fn q_name(round: usize) -> String {
    format!("Q{round}")
}

pub fn r_name(round: usize) -> String {
    format!("R{round}")
}

/// What a round's query register carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    Plain(usize),
    Superposed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundSlot {
    /// 1-based round number.
    pub round: usize,
    pub q: String,
    pub r: String,
    pub role: SlotRole,
}

/// Everything Alice needs to run and check one session: the register layout
/// `Q1..QK (A) R1..RK B`, her initial registers, and her test.
#[derive(Debug, Clone)]
pub struct SessionPlan {
    pub layout: RegisterLayout,
    pub rounds: Vec<RoundSlot>,
    pub terms: Vec<QueryTerm>,
    pub target: usize,
    pub scenario: Option<Scenario>,
    pub initial: StateVector,
}

impl SessionPlan {
    /// Plan for `spec`; `scenario` is ignored by the non-rhetoric variant.
    pub fn new(spec: &QuerySpec, scenario: Scenario, db: &Database, d_b: usize) -> Result<Self> {
        spec.validate(db.entries())?;
        if d_b == 0 {
            return Err(Error::DimensionMismatch("Bob's ancilla needs dimension >= 1".into()));
        }
        let roles: Vec<SlotRole> = match spec.variant {
            QueryVariant::NonRhetoric { decoy, order } => order
                .iter()
                .map(|r| match r {
                    MessageRole::Superposed => SlotRole::Superposed,
                    MessageRole::Target => SlotRole::Plain(spec.j),
                    MessageRole::Decoy => SlotRole::Plain(decoy),
                })
                .collect(),
            _ => match scenario {
                Scenario::A => vec![SlotRole::Plain(spec.j), SlotRole::Superposed],
                Scenario::B => vec![SlotRole::Superposed, SlotRole::Plain(spec.j)],
            },
        };
        let rounds: Vec<RoundSlot> = roles
            .into_iter()
            .enumerate()
            .map(|(i, role)| RoundSlot {
                round: i + 1,
                q: q_name(i + 1),
                r: r_name(i + 1),
                role,
            })
            .collect();

        let n_entries = db.entries();
        let mut regs: Vec<(String, usize)> = rounds.iter().map(|s| (s.q.clone(), n_entries)).collect();
        if spec.is_entangled() {
            regs.push((ANCILLA.to_string(), n_entries));
        }
        regs.extend(rounds.iter().map(|s| (s.r.clone(), db.answer_dim())));
        regs.push((BOB.to_string(), d_b));
        let layout = RegisterLayout::new(regs)?;

        let scenario = match spec.variant {
            QueryVariant::NonRhetoric { .. } => None,
            _ => Some(scenario),
        };
        let mut plan = Self {
            initial: StateVector::zeros(layout.clone()),
            layout,
            rounds,
            terms: spec.superposed_terms(),
            target: spec.j,
            scenario,
        };
        plan.initial = plan.initial_with_bob(&StateVector::ket(BOB, d_b, 0)?)?;
        Ok(plan)
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn bob_dim(&self) -> usize {
        self.layout.dim_of(BOB).expect("plan always has B")
    }

    pub fn has_ancilla(&self) -> bool {
        self.layout.contains(ANCILLA)
    }

    pub fn superposed_slot(&self) -> &RoundSlot {
        self.rounds
            .iter()
            .find(|s| s.role == SlotRole::Superposed)
            .expect("every plan has one superposed register")
    }

    /// Plain slots in arrival order.
    pub fn plain_slots(&self) -> impl Iterator<Item = (&RoundSlot, usize)> {
        self.rounds.iter().filter_map(|s| match s.role {
            SlotRole::Plain(idx) => Some((s, idx)),
            SlotRole::Superposed => None,
        })
    }

    /// The superposed query state on `(Q_s[, A])`.
    pub fn superposed_query(&self) -> Result<StateVector> {
        let slot = self.superposed_slot();
        let n = self.layout.dim_of(&slot.q)?;
        let mut regs = vec![(slot.q.clone(), n)];
        if self.has_ancilla() {
            regs.push((ANCILLA.to_string(), n));
        }
        let layout = RegisterLayout::new(regs)?;
        let mut state = StateVector::zeros(layout.clone());
        for t in &self.terms {
            let digits = match t.ancilla {
                Some(a) => vec![t.index, a],
                None => vec![t.index],
            };
            let flat = layout.encode(&digits)?;
            state.amps_mut()[flat] += t.amplitude;
        }
        Ok(state)
    }

    /// Initial state with Bob's ancilla in `bob` and every reply register blank.
    pub fn initial_with_bob(&self, bob: &StateVector) -> Result<StateVector> {
        if bob.layout().names().collect::<Vec<_>>() != [BOB] {
            return Err(Error::DimensionMismatch("Bob's state must live on B alone".into()));
        }
        let mut parts = vec![self.superposed_query()?];
        for (slot, idx) in self.plain_slots() {
            parts.push(StateVector::ket(&slot.q, self.layout.dim_of(&slot.q)?, idx)?);
        }
        for slot in &self.rounds {
            parts.push(StateVector::ket(&slot.r, self.layout.dim_of(&slot.r)?, 0)?);
        }
        parts.push(bob.clone());
        StateVector::product(&parts)?.reordered(&self.layout)
    }

    /// Honest reply on the superposed registers `(Q_s, R_s[, A])`, built from
    /// the answers Alice read on the plain registers.
    pub fn check_target(&self, db: &Database, observed: &[(usize, usize)]) -> Result<StateVector> {
        let slot = self.superposed_slot();
        let n = self.layout.dim_of(&slot.q)?;
        let mut regs = vec![(slot.q.clone(), n), (slot.r.clone(), db.answer_dim())];
        if self.has_ancilla() {
            regs.push((ANCILLA.to_string(), n));
        }
        let layout = RegisterLayout::new(regs)?;
        let mut state = StateVector::zeros(layout.clone());
        for t in &self.terms {
            let answer = match observed.iter().find(|(idx, _)| *idx == t.index) {
                Some(&(_, a)) => a,
                None if t.index == 0 => db.rhetoric_answer(),
                None => {
                    return Err(Error::Query(format!(
                        "no observed answer for superposed index {}",
                        t.index
                    )))
                }
            };
            let mut digits = vec![t.index, answer];
            if let Some(a) = t.ancilla {
                digits.push(a);
            }
            let flat = layout.encode(&digits)?;
            state.amps_mut()[flat] += t.amplitude;
        }
        let norm = state.norm_sqr();
        Ok(state.scaled(Complex::new(1.0 / norm.sqrt(), 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn scenario_a_layout_and_state() {
        let db = Database::unique(2, 4, &[1, 2, 3, 0]).unwrap();
        let plan = SessionPlan::new(&QuerySpec::canonical(2), Scenario::A, &db, 1).unwrap();
        let names: Vec<&str> = plan.layout.names().collect();
        assert_eq!(names, ["Q1", "Q2", "R1", "R2", "B"]);
        let a = plan.initial.amplitude(&[2, 2, 0, 0, 0]).unwrap();
        let b = plan.initial.amplitude(&[2, 0, 0, 0, 0]).unwrap();
        assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && (b.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((plan.initial.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entangled_layout_has_ancilla() {
        let db = Database::unique(1, 2, &[1, 0]).unwrap();
        let plan = SessionPlan::new(&QuerySpec::entangled(1), Scenario::B, &db, 2).unwrap();
        let names: Vec<&str> = plan.layout.names().collect();
        assert_eq!(names, ["Q1", "Q2", "A", "R1", "R2", "B"]);
    }

    #[test]
    fn out_of_range_query() {
        let db = Database::unique(1, 2, &[1, 0]).unwrap();
        assert!(SessionPlan::new(&QuerySpec::canonical(2), Scenario::A, &db, 1).is_err());
    }
}
