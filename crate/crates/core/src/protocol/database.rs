use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Operator, RegisterLayout, StateVector};

/// Bob's ordered answer table.
///
/// Entry `j` lists the valid answers to query `j`. Query 0 is the rhetoric
/// query and always has exactly one, publicly known, answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Database {
    n: u32,
    answer_dim: usize,
    answers: Vec<Vec<usize>>,
}

impl Database {
    pub fn new(n: u32, answer_dim: usize, answers: Vec<Vec<usize>>) -> Result<Self> {
        if n > 12 {
            return Err(Error::Database(format!("n = {n} is beyond the dense simulator")));
        }
        let entries = 1usize << n;
        if answers.len() != entries {
            return Err(Error::Database(format!(
                "n = {n} needs {entries} entries, got {}",
                answers.len()
            )));
        }
        if answer_dim == 0 {
            return Err(Error::Database("answer dimension must be positive".into()));
        }
        for (j, list) in answers.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Database(format!("entry {j} has no answer")));
            }
            if let Some(bad) = list.iter().find(|&&a| a >= answer_dim) {
                return Err(Error::Database(format!(
                    "answer {bad} of entry {j} does not fit d_R = {answer_dim}"
                )));
            }
            for (k, a) in list.iter().enumerate() {
                if list[..k].contains(a) {
                    return Err(Error::Database(format!("entry {j} repeats answer {a}")));
                }
            }
        }
        if answers[0].len() != 1 {
            return Err(Error::Database("the rhetoric entry 0 must have exactly one answer".into()));
        }
        Ok(Self {
            n,
            answer_dim,
            answers,
        })
    }

    /// Unique-answer database.
    pub fn unique(n: u32, answer_dim: usize, answers: &[usize]) -> Result<Self> {
        Self::new(n, answer_dim, answers.iter().map(|&a| vec![a]).collect())
    }

    /// Default table `A_j = (5j + 3) mod d_R`.
    pub fn standard(n: u32, answer_dim: usize) -> Result<Self> {
        let entries = 1usize << n;
        let answers: Vec<usize> = (0..entries).map(|j| (5 * j + 3) % answer_dim).collect();
        Self::unique(n, answer_dim, &answers)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of entries `N = 2ⁿ`.
    pub fn entries(&self) -> usize {
        self.answers.len()
    }

    pub fn answer_dim(&self) -> usize {
        self.answer_dim
    }

    pub fn answers(&self, j: usize) -> &[usize] {
        &self.answers[j]
    }

    pub fn all_answers(&self) -> &[Vec<usize>] {
        &self.answers
    }

    pub fn rhetoric_answer(&self) -> usize {
        self.answers[0][0]
    }

    pub fn is_unique(&self) -> bool {
        self.answers.iter().all(|a| a.len() == 1)
    }

    /// The unique answer to `j`, if there is exactly one.
    pub fn answer(&self, j: usize) -> Result<usize> {
        match self.answers.get(j) {
            None => Err(Error::Query(format!("index {j} >= N = {}", self.entries()))),
            Some(list) if list.len() == 1 => Ok(list[0]),
            Some(_) => Err(Error::AmbiguousAnswer(j)),
        }
    }

    /// Answer per index picked by `selector[j]` (branch of entry `j`).
    pub fn select(&self, selector: &[usize]) -> Result<Vec<usize>> {
        if selector.len() != self.entries() {
            return Err(Error::Database(format!(
                "selector has {} entries, database has {}",
                selector.len(),
                self.entries()
            )));
        }
        self.answers
            .iter()
            .zip(selector)
            .enumerate()
            .map(|(j, (list, &k))| {
                list.get(k).copied().ok_or_else(|| {
                    Error::Database(format!("entry {j} has no answer branch {k}"))
                })
            })
            .collect()
    }

    pub(crate) fn answer_table(&self, selector: Option<&[usize]>) -> Result<Vec<usize>> {
        match selector {
            Some(sel) => self.select(sel),
            None => (0..self.entries()).map(|j| self.answer(j)).collect(),
        }
    }

    /// `|C_j⟩ = |j⟩|a⟩` on the pair `(q, r)`.
    pub fn check_state(&self, q: &str, r: &str, j: usize, answer: usize) -> Result<StateVector> {
        let layout = RegisterLayout::new([(q, self.entries()), (r, self.answer_dim)])?;
        StateVector::basis(layout, &[j, answer])
    }
}

/// qRAM as a modular-add unitary on `(q, r)`: `|j⟩|r⟩ → |j⟩|(r + A_j) mod d_R⟩`.
///
/// Multi-answer databases need `selector` naming one answer branch per entry.
pub fn qram_unitary(db: &Database, q: &str, r: &str, selector: Option<&[usize]>) -> Result<Operator> {
    let table = db.answer_table(selector)?;
    let d_r = db.answer_dim();
    let layout = RegisterLayout::new([(q, db.entries()), (r, d_r)])?;
    Operator::permutation(layout, |flat| {
        let (j, reg) = (flat / d_r, flat % d_r);
        j * d_r + (reg + table[j]) % d_r
    })
}

/// Applies the qRAM map directly as a basis permutation.
pub(crate) fn apply_qram(
    state: &StateVector,
    db: &Database,
    q: &str,
    r: &str,
    selector: Option<&[usize]>,
) -> Result<StateVector> {
    let table = db.answer_table(selector)?;
    let d_r = db.answer_dim();
    if state.layout().dim_of(q)? != db.entries() || state.layout().dim_of(r)? != d_r {
        return Err(Error::DimensionMismatch(format!(
            "qRAM on ({q}, {r}) needs dimensions ({}, {d_r})",
            db.entries()
        )));
    }
    state.permute_basis(&[q, r], |d| vec![d[0], (d[1] + table[d[0]]) % d_r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{Tensor, UNITARY_TOL};

    #[test]
    fn validation() {
        assert!(Database::unique(1, 2, &[0, 2]).is_err());
        assert!(Database::new(1, 4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Database::new(1, 4, vec![vec![0], vec![]]).is_err());
        assert!(Database::new(1, 4, vec![vec![0], vec![1, 1]]).is_err());
        let db = Database::new(1, 4, vec![vec![0], vec![1, 2]]).unwrap();
        assert!(!db.is_unique());
        assert_eq!(db.answer(1), Err(Error::AmbiguousAnswer(1)));
    }

    #[test]
    fn qram_writes_answer_on_blank() {
        let db = Database::unique(2, 8, &[5, 7, 3, 2]).unwrap();
        let u = qram_unitary(&db, "Q1", "R1", None).unwrap();
        let input = StateVector::ket("Q1", 4, 1)
            .unwrap()
            .tensor(&StateVector::ket("R1", 8, 0).unwrap())
            .unwrap();
        let out = input.apply(&u).unwrap();
        assert_eq!(out, db.check_state("Q1", "R1", 1, 7).unwrap());
        let direct = apply_qram(&input, &db, "Q1", "R1", None).unwrap();
        assert_eq!(direct, out);
    }

    #[test]
    fn qram_inverse_is_identity() {
        let db = Database::unique(2, 8, &[5, 7, 3, 2]).unwrap();
        let u = qram_unitary(&db, "Q", "R", None).unwrap();
        let id = u.dagger().compose(&u).unwrap();
        let dev = (id.matrix() - nalgebra::DMatrix::identity(32, 32))
            .iter()
            .fold(0.0f64, |a, z| a.max(z.norm()));
        assert!(dev < UNITARY_TOL);
    }

    #[test]
    fn multi_answer_needs_selector() {
        let db = Database::new(1, 4, vec![vec![0], vec![1, 2]]).unwrap();
        assert_eq!(
            qram_unitary(&db, "Q", "R", None).unwrap_err(),
            Error::AmbiguousAnswer(1)
        );
        assert!(qram_unitary(&db, "Q", "R", Some(&[0, 1])).is_ok());
    }
}
