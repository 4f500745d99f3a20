use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::{BobStrategy, Instr, RoundBody};
use crate::protocol::{q_name, r_name, ANCILLA, BOB};
use crate::qcore::{Operator, UNITARY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    /// The round touches a register it may not hold at that time.
    OutsideLegalScope,
    /// The round touches a register missing from its declared scope.
    Undeclared,
    /// Alice's private ancilla, never reachable.
    Ancilla,
    NonUnitary { deviation: f64 },
    /// Projectors of a measurement are not orthogonal projections.
    BadProjectors { deviation: f64 },
    RoundCount { expected: usize, found: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeViolation {
    pub round: usize,
    pub register: Option<String>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

impl fmt::Display for ScopeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "round {}: ", self.round)?;
        match &self.kind {
            ViolationKind::OutsideLegalScope => write!(
                f,
                "register {} is not in Bob's hands during this round",
                self.register.as_deref().unwrap_or("?")
            ),
            ViolationKind::Undeclared => write!(
                f,
                "register {} is used but not declared",
                self.register.as_deref().unwrap_or("?")
            ),
            ViolationKind::Ancilla => write!(f, "Alice's ancilla is never accessible"),
            ViolationKind::NonUnitary { deviation } => {
                write!(f, "operator is not unitary (deviation {deviation:e})")
            }
            ViolationKind::BadProjectors { deviation } => {
                write!(f, "measurement projectors are not orthogonal (deviation {deviation:e})")
            }
            ViolationKind::RoundCount { expected, found } => {
                write!(f, "protocol has {expected} rounds, strategy has {found}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScopeReport {
    pub violations: Vec<ScopeViolation>,
}

impl ScopeReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ScopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Registers Bob may act on in round `k` of `total`: `Q_k`, the reply
/// registers not yet returned, and his ancilla.
pub fn legal_scope(k: usize, total: usize) -> BTreeSet<String> {
    let mut s: BTreeSet<String> = (k..=total).map(r_name).collect();
    s.insert(q_name(k));
    s.insert(BOB.to_string());
    s
}

fn projector_deviation(ps: &[Operator]) -> f64 {
    let mut worst = 0.0f64;
    for (a, p) in ps.iter().enumerate() {
        for (b, q) in ps.iter().enumerate() {
            if p.layout() != q.layout() {
                return f64::INFINITY;
            }
            let prod = p.matrix() * q.matrix();
            let target = if a == b { p.matrix().clone() } else { prod.map(|_| Default::default()) };
            worst = worst.max((prod - target).iter().fold(0.0, |m: f64, z| m.max(z.norm())));
        }
        let herm = (p.matrix() - p.matrix().adjoint()).iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        worst = worst.max(herm);
    }
    worst
}

fn check_instrs(round: usize, steps: &[Instr], out: &mut Vec<ScopeViolation>) {
    for i in steps {
        match i {
            Instr::Unitary { operator } => {
                let dev = operator.unitarity_deviation();
                if dev > UNITARY_TOL {
                    out.push(ScopeViolation {
                        round,
                        register: None,
                        kind: ViolationKind::NonUnitary { deviation: dev },
                    });
                }
            }
            Instr::MeasureProjective { projectors, .. } => {
                let dev = projector_deviation(projectors);
                if dev > UNITARY_TOL {
                    out.push(ScopeViolation {
                        round,
                        register: None,
                        kind: ViolationKind::BadProjectors { deviation: dev },
                    });
                }
            }
            Instr::If {
                then, otherwise, ..
            } => {
                check_instrs(round, then, out);
                check_instrs(round, otherwise, out);
            }
            _ => {}
        }
    }
}

/// Checks every round against the register-ordering rule and, for
/// unitaries, `U†U = I` within tolerance. `unconstrained` lifts the
/// ordering rule but never grants access to Alice's ancilla.
pub fn validate_scope(strategy: &BobStrategy, total_rounds: usize, unconstrained: bool) -> ScopeReport {
    let mut violations = Vec::new();
    if strategy.num_rounds() != total_rounds {
        violations.push(ScopeViolation {
            round: 0,
            register: None,
            kind: ViolationKind::RoundCount {
                expected: total_rounds,
                found: strategy.num_rounds(),
            },
        });
    }
    for (idx, action) in strategy.rounds.iter().enumerate() {
        let k = idx + 1;
        let legal = legal_scope(k, total_rounds);
        let declared: BTreeSet<String> = action.scope.iter().cloned().collect();
        let touched = action.touched();
        for reg in declared.union(&touched) {
            if reg == ANCILLA {
                violations.push(ScopeViolation {
                    round: k,
                    register: Some(reg.clone()),
                    kind: ViolationKind::Ancilla,
                });
            } else if !unconstrained && !legal.contains(reg) {
                violations.push(ScopeViolation {
                    round: k,
                    register: Some(reg.clone()),
                    kind: ViolationKind::OutsideLegalScope,
                });
            }
        }
        for reg in touched.difference(&declared) {
            violations.push(ScopeViolation {
                round: k,
                register: Some(reg.clone()),
                kind: ViolationKind::Undeclared,
            });
        }
        match &action.body {
            RoundBody::Unitary { matrix } => {
                let dev = matrix.unitarity_deviation();
                if dev > UNITARY_TOL {
                    violations.push(ScopeViolation {
                        round: k,
                        register: None,
                        kind: ViolationKind::NonUnitary { deviation: dev },
                    });
                }
            }
            RoundBody::Program { tree } => check_instrs(k, tree, &mut violations),
        }
    }
    ScopeReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Complex, RegisterLayout};
    use crate::strategies::{honest, joint_measurement_attack, RoundAction};

    #[test]
    fn legal_scopes() {
        let l: Vec<String> = legal_scope(1, 2).into_iter().collect();
        assert_eq!(l, ["B", "Q1", "R1", "R2"]);
        let l: Vec<String> = legal_scope(2, 3).into_iter().collect();
        assert_eq!(l, ["B", "Q2", "R2", "R3"]);
    }

    #[test]
    fn honest_ok_joint_rejected() {
        assert!(validate_scope(&honest(2), 2, false).is_ok());
        let joint = joint_measurement_attack(2);
        let r = validate_scope(&joint, 2, false);
        assert!(r.violations.iter().any(|v| v.round == 1
            && v.register.as_deref() == Some("Q2")
            && v.kind == ViolationKind::OutsideLegalScope));
        assert!(validate_scope(&joint, 2, true).is_ok());
    }

    #[test]
    fn non_unitary_flagged() {
        let l = RegisterLayout::single("B", 2).unwrap();
        let m = nalgebra::DMatrix::from_element(2, 2, Complex::new(1.0, 0.0));
        let op = Operator::new(l, m).unwrap().tagged_unitary();
        let s = BobStrategy::new(
            "bad",
            2,
            vec![RoundAction::unitary(&["B"], op.clone()), RoundAction::unitary(&["B"], op)],
        );
        let r = validate_scope(&s, 2, false);
        assert!(matches!(r.violations[0].kind, ViolationKind::NonUnitary { .. }));
    }

    #[test]
    fn ancilla_never_legal() {
        let l = RegisterLayout::single(ANCILLA, 2).unwrap();
        let s = BobStrategy::new(
            "peek",
            1,
            vec![
                RoundAction::unitary(&[ANCILLA], Operator::identity(l)),
                RoundAction::program(&[], vec![]),
            ],
        );
        let r = validate_scope(&s, 2, true);
        assert!(r.violations.iter().any(|v| v.kind == ViolationKind::Ancilla));
    }
}
