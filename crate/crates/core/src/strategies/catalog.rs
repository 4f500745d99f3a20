use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::{DMatrix, DVector};

use super::{complete_isometry, BobStrategy, Cond, Instr, PrepareSpec, RoundAction};
use crate::error::{Error, Result};
use crate::protocol::{q_name, r_name, Database, BOB};
use crate::qcore::{Complex, Operator, RegisterLayout, StateVector};

/// Names accepted by [`by_name`].
pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "honest",
        summary: "qRAM on each query register",
    },
    CatalogEntry {
        name: "measure_resend",
        summary: "measure every query, keep the outcomes in B, answer the collapsed query",
    },
    CatalogEntry {
        name: "joint_measurement",
        summary: "project Q1Q2 onto the per-query subspaces (needs --unconstrained)",
    },
    CatalogEntry {
        name: "weak_entangling",
        summary: "controlled rotation of B by the first query, strength --param (radians)",
    },
    CatalogEntry {
        name: "multi_answer_rhetoric",
        summary: "multi-answer attack on the rhetoric protocol",
    },
    CatalogEntry {
        name: "multi_answer_nonrhetoric",
        summary: "multi-answer attack on the three-message protocol",
    },
    CatalogEntry {
        name: "lucky_reprepare",
        summary: "measure both queries, re-prepare after a lucky 0 with phase --param",
    },
];

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub summary: &'static str,
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

fn qram(k: usize) -> Instr {
    Instr::Qram {
        q: q_name(k),
        r: r_name(k),
        selector: None,
    }
}

/// Honest server for a `rounds`-message protocol; `d_B = 1`.
pub fn honest(rounds: usize) -> BobStrategy {
    let rounds = (1..=rounds)
        .map(|k| RoundAction::program(&[&q_name(k), &r_name(k)], vec![qram(k)]))
        .collect();
    BobStrategy::new("honest", 1, rounds)
}

/// Measures each query, writes the outcome into its own digit of B
/// (`d_B = N^rounds`), then answers honestly.
pub fn measure_resend(n: u32, rounds: usize) -> BobStrategy {
    let big_n = 1usize << n;
    let actions = (1..=rounds)
        .map(|k| {
            let multiplier = big_n.pow((rounds - k) as u32);
            RoundAction::program(
                &[&q_name(k), &r_name(k), BOB],
                vec![
                    Instr::Measure {
                        register: q_name(k),
                        slot: Some(k - 1),
                    },
                    Instr::RecordShift {
                        slot: k - 1,
                        multiplier,
                    },
                    qram(k),
                ],
            )
        })
        .collect();
    BobStrategy::new("measure_resend", big_n.pow(rounds as u32), actions)
}

/// Projector onto `span{|j⟩|+j⟩, |+j⟩|j⟩}` on `(Q1, Q2)`.
fn query_subspace_projector(layout: &RegisterLayout, big_n: usize, j: usize) -> Result<Operator> {
    let dim = layout.dim();
    let idx = |a: usize, b: usize| a * big_n + b;
    let mut vectors: Vec<DVector<Complex>> = Vec::new();
    if j == 0 {
        let mut v = DVector::zeros(dim);
        v[idx(0, 0)] = c(1.0);
        vectors.push(v);
    } else {
        let mut v1 = DVector::zeros(dim);
        v1[idx(j, j)] = c(FRAC_1_SQRT_2);
        v1[idx(j, 0)] = c(FRAC_1_SQRT_2);
        let mut v2 = DVector::zeros(dim);
        v2[idx(j, j)] = c(FRAC_1_SQRT_2);
        v2[idx(0, j)] = c(FRAC_1_SQRT_2);
        let overlap = v1.dotc(&v2);
        let mut w = &v2 - &v1 * overlap;
        let norm = w.norm();
        w /= c(norm);
        vectors.push(v1);
        vectors.push(w);
    }
    let mut m = DMatrix::<Complex>::zeros(dim, dim);
    for v in &vectors {
        m += v * v.adjoint();
    }
    Operator::new(layout.clone(), m)
}

/// Joint von Neumann measurement on `Q1Q2` identifying the query subspace
/// without disturbing it, followed by honest answers. Only meaningful when
/// Bob may hold both queries at once. `d_B = N + 1` (the last value flags
/// the leftover subspace).
pub fn joint_measurement_attack(n: u32) -> BobStrategy {
    let big_n = 1usize << n;
    let layout = RegisterLayout::new([("Q1", big_n), ("Q2", big_n)]).expect("valid layout");
    let projectors = (0..big_n)
        .map(|j| query_subspace_projector(&layout, big_n, j).expect("projector fits layout"))
        .collect();
    let round1 = RoundAction::program(
        &["Q1", "Q2", "R1", BOB],
        vec![
            Instr::MeasureProjective {
                projectors,
                slot: Some(0),
            },
            Instr::RecordShift { slot: 0, multiplier: 1 },
            qram(1),
        ],
    );
    let round2 = RoundAction::program(&["Q2", "R2"], vec![qram(2)]);
    let mut s = BobStrategy::new("joint_measurement", big_n + 1, vec![round1, round2]);
    s.requires_unconstrained = true;
    s
}

/// Controlled rotation of B by the first query: blank `|∅⟩ = |0⟩_B` goes to
/// `cos λ|∅⟩ + sin λ|j+1⟩_B`; `d_B = N + 1`. `λ = 0` is honest.
pub fn weak_entangling(n: u32, lambda: f64) -> Result<BobStrategy> {
    if !(0.0..=FRAC_PI_2).contains(&lambda) {
        return Err(Error::Strategy(format!("λ = {lambda} outside [0, π/2]")));
    }
    let big_n = 1usize << n;
    let d_b = big_n + 1;
    let layout = RegisterLayout::new([("Q1", big_n), (BOB, d_b)])?;
    let (s, co) = lambda.sin_cos();
    let mut m = DMatrix::<Complex>::identity(layout.dim(), layout.dim());
    for j in 0..big_n {
        let blank = j * d_b;
        let mark = j * d_b + j + 1;
        m[(blank, blank)] = c(co);
        m[(mark, blank)] = c(s);
        m[(blank, mark)] = c(-s);
        m[(mark, mark)] = c(co);
    }
    let rotation = Operator::unitary(layout, m)?;
    let round1 = RoundAction::program(
        &["Q1", "R1", BOB],
        vec![Instr::Unitary { operator: rotation }, qram(1)],
    );
    let round2 = RoundAction::program(&["Q2", "R2"], vec![qram(2)]);
    Ok(BobStrategy::new("weak_entangling", d_b, vec![round1, round2]))
}

/// Database shape the rhetoric multi-answer attack needs: queries 1 and 2
/// with two answers each, index 3 unused.
pub fn multi_answer_database(d_r: usize) -> Result<Database> {
    if d_r < 5 {
        return Err(Error::Database("the multi-answer table needs d_R >= 5".into()));
    }
    Database::new(2, d_r, vec![vec![0], vec![1, 2], vec![3, 4], vec![0]])
}

/// Database for the three-message attack: only query 2 has two answers.
pub fn multi_answer_nonrhetoric_database(d_r: usize) -> Result<Database> {
    if d_r < 4 {
        return Err(Error::Database("the multi-answer table needs d_R >= 4".into()));
    }
    Database::new(2, d_r, vec![vec![0], vec![1], vec![2, 3], vec![0]])
}

fn pm_state(k: usize, sign: f64) -> Vec<Complex> {
    let mut v = vec![c(0.0); 3];
    v[0] = c(FRAC_1_SQRT_2);
    v[k] = c(sign * FRAC_1_SQRT_2);
    v
}

fn qrb_layout(db: &Database) -> Result<RegisterLayout> {
    RegisterLayout::new([("Q", db.entries()), ("R", db.answer_dim()), (BOB, 3)])
}

fn qrb(layout: &RegisterLayout, q: usize, r: usize, b: Vec<Complex>) -> Result<StateVector> {
    let n = layout.dim_of("Q")?;
    let d_r = layout.dim_of("R")?;
    let part = |name: &str, dim: usize, i: usize| StateVector::ket(name, dim, i);
    StateVector::product(&[part("Q", n, q)?, part("R", d_r, r)?, StateVector::register(BOB, b)?])
}

fn basis_b(i: usize) -> Vec<Complex> {
    let mut v = vec![c(0.0); 3];
    v[i] = c(1.0);
    v
}

fn check_shape(db: &Database, multi: &[usize]) -> Result<()> {
    let ok = db.entries() == 4
        && (0..4).all(|j| db.answers(j).len() == if multi.contains(&j) { 2 } else { 1 });
    if ok {
        Ok(())
    } else {
        Err(Error::Database(format!(
            "attack needs N = 4 with two answers exactly on {multi:?}"
        )))
    }
}

/// The single `(Q, R, B)` unitary used in both rounds of the rhetoric
/// attack: `|0,0,ψ⟩ → |0,A₀,ψ⟩` and `|k,0,±k⟩ → |k,A_k^±,±k⟩` for `k = 1, 2`.
pub fn multi_answer_unitary(db: &Database) -> Result<Operator> {
    check_shape(db, &[1, 2])?;
    let layout = qrb_layout(db)?;
    let mut domain = Vec::new();
    let mut images = Vec::new();
    for b in 0..3 {
        domain.push(qrb(&layout, 0, 0, basis_b(b))?);
        images.push(qrb(&layout, 0, db.rhetoric_answer(), basis_b(b))?);
        domain.push(qrb(&layout, 3, 0, basis_b(b))?);
        images.push(qrb(&layout, 3, db.answers(3)[0], basis_b(b))?);
    }
    for k in [1, 2] {
        for (branch, sign) in [(0, 1.0), (1, -1.0)] {
            domain.push(qrb(&layout, k, 0, pm_state(k, sign))?);
            images.push(qrb(&layout, k, db.answers(k)[branch], pm_state(k, sign))?);
        }
    }
    complete_isometry(&layout, &domain, &images)
}

fn relabel(op: &Operator, k: usize) -> Result<Operator> {
    op.relabeled(|name| match name {
        "Q" => q_name(k),
        "R" => r_name(k),
        other => other.to_string(),
    })
}

/// Rhetoric-protocol attack on a multi-answer table; `d_B = 3`.
pub fn multi_answer_rhetoric_attack(db: &Database) -> Result<BobStrategy> {
    let u = multi_answer_unitary(db)?;
    let rounds = (1..=2)
        .map(|k| Ok(RoundAction::unitary(&[&q_name(k), &r_name(k), BOB], relabel(&u, k)?)))
        .collect::<Result<_>>()?;
    Ok(BobStrategy::new("multi_answer_rhetoric", 3, rounds))
}

/// The three-message attack unitary on `(Q, R, B)`: honest qRAM for single
/// answer queries, `|2,0,±2⟩ → |2,A₂^±,±2⟩`.
pub fn nonrhetoric_unitary(db: &Database) -> Result<Operator> {
    check_shape(db, &[2])?;
    let layout = qrb_layout(db)?;
    let mut domain = Vec::new();
    let mut images = Vec::new();
    for j in [0, 1, 3] {
        for b in 0..3 {
            domain.push(qrb(&layout, j, 0, basis_b(b))?);
            images.push(qrb(&layout, j, db.answers(j)[0], basis_b(b))?);
        }
    }
    for (branch, sign) in [(0, 1.0), (1, -1.0)] {
        domain.push(qrb(&layout, 2, 0, pm_state(2, sign))?);
        images.push(qrb(&layout, 2, db.answers(2)[branch], pm_state(2, sign))?);
    }
    complete_isometry(&layout, &domain, &images)
}

/// Three-round attack using the same unitary on `Q_k R_k B` every round.
pub fn multi_answer_nonrhetoric_attack(db: &Database) -> Result<BobStrategy> {
    let u = nonrhetoric_unitary(db)?;
    let rounds = (1..=3)
        .map(|k| Ok(RoundAction::unitary(&[&q_name(k), &r_name(k), BOB], relabel(&u, k)?)))
        .collect::<Result<_>>()?;
    Ok(BobStrategy::new("multi_answer_nonrhetoric", 3, rounds))
}

/// Measures both queries; after a `0` on the second one following a nonzero
/// first outcome `b₁`, re-prepares `(|b₁⟩ + e^{iφ}|0⟩)/√2` before answering.
pub fn lucky_reprepare_attack(assumed_theta: f64) -> BobStrategy {
    let round1 = RoundAction::program(
        &["Q1", "R1"],
        vec![
            Instr::Measure {
                register: "Q1".into(),
                slot: Some(0),
            },
            qram(1),
        ],
    );
    let round2 = RoundAction::program(
        &["Q2", "R2"],
        vec![
            Instr::Measure {
                register: "Q2".into(),
                slot: Some(1),
            },
            Instr::If {
                cond: Cond::All {
                    conds: vec![Cond::Eq { slot: 1, value: 0 }, Cond::Ne { slot: 0, value: 0 }],
                },
                then: vec![Instr::Reprepare {
                    register: "Q2".into(),
                    prepare: PrepareSpec::SuperposedWithZero {
                        slot: 0,
                        phase: assumed_theta,
                    },
                }],
                otherwise: vec![],
            },
            qram(2),
        ],
    );
    BobStrategy::new("lucky_reprepare", 1, vec![round1, round2])
}

/// Catalog lookup. `param` is λ for `weak_entangling` and the assumed phase
/// for `lucky_reprepare`; `db` supplies the table for the multi-answer attacks.
pub fn by_name(name: &str, n: u32, rounds: usize, param: f64, db: &Database) -> Result<BobStrategy> {
    match name {
        "honest" => Ok(honest(rounds)),
        "measure_resend" => Ok(measure_resend(n, rounds)),
        "joint_measurement" => Ok(joint_measurement_attack(n)),
        "weak_entangling" => weak_entangling(n, param),
        "multi_answer_rhetoric" => multi_answer_rhetoric_attack(db),
        "multi_answer_nonrhetoric" => multi_answer_nonrhetoric_attack(db),
        "lucky_reprepare" => Ok(lucky_reprepare_attack(param)),
        other => Err(Error::Strategy(format!("unknown strategy `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::UNITARY_TOL;

    #[test]
    fn attack_unitaries_are_unitary() {
        let db = multi_answer_database(5).unwrap();
        assert!(multi_answer_unitary(&db).unwrap().unitarity_deviation() < UNITARY_TOL);
        let db = multi_answer_nonrhetoric_database(4).unwrap();
        assert!(nonrhetoric_unitary(&db).unwrap().unitarity_deviation() < UNITARY_TOL);
    }

    #[test]
    fn first_round_rule_follows_from_second() {
        // |k,0,0⟩ → |k⟩(|A⁺⟩|+k⟩ + |A⁻⟩|−k⟩)/√2 by linearity.
        let db = multi_answer_database(5).unwrap();
        let u = multi_answer_unitary(&db).unwrap();
        let layout = qrb_layout(&db).unwrap();
        for k in [1, 2] {
            let out = qrb(&layout, k, 0, basis_b(0)).unwrap().apply(&u).unwrap();
            let expect = qrb(&layout, k, db.answers(k)[0], pm_state(k, 1.0))
                .unwrap()
                .add(&qrb(&layout, k, db.answers(k)[1], pm_state(k, -1.0)).unwrap())
                .unwrap()
                .scaled(c(FRAC_1_SQRT_2));
            let diff = out.sub(&expect).unwrap().norm_sqr();
            assert!(diff < 1e-20);
        }
    }

    #[test]
    fn literal_nonrhetoric_rule_is_not_isometric() {
        // |2,0,0⟩ → |2⟩(|A⁺⟩|+2⟩ + |A⁻⟩|−2⟩)/√2 together with
        // |2,0,2⟩ → |2,A⁺,2⟩ maps orthogonal inputs to overlapping outputs.
        let db = multi_answer_nonrhetoric_database(4).unwrap();
        let layout = qrb_layout(&db).unwrap();
        let first = qrb(&layout, 2, 2, pm_state(2, 1.0))
            .unwrap()
            .add(&qrb(&layout, 2, 3, pm_state(2, -1.0)).unwrap())
            .unwrap()
            .scaled(c(FRAC_1_SQRT_2));
        let literal = qrb(&layout, 2, 2, basis_b(2)).unwrap();
        assert!((first.inner(&literal).unwrap().norm_sqr() - 0.25).abs() < 1e-12);
        let res = complete_isometry(
            &layout,
            &[qrb(&layout, 2, 0, basis_b(0)).unwrap(), qrb(&layout, 2, 0, basis_b(2)).unwrap()],
            &[first, literal],
        );
        assert!(matches!(res, Err(Error::NotIsometry(_))));
    }

    #[test]
    fn weak_entangling_domain() {
        assert!(weak_entangling(2, -0.1).is_err());
        assert!(weak_entangling(2, 2.0).is_err());
        assert_eq!(weak_entangling(2, 0.3).unwrap().b_dim, 5);
    }
}
