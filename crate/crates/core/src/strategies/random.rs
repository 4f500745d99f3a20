use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BobStrategy, Instr, RoundAction};
use crate::error::{Error, Result};
use crate::protocol::{q_name, r_name, BOB};
use crate::qcore::{Complex, Operator, RegisterLayout};

/// Shape of the random near-honest family used for randomized checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomStrategyConfig {
    pub n: u32,
    pub d_r: usize,
    pub d_b: usize,
    /// Strengths are log-uniform in `[min_strength, max_strength]`.
    pub min_strength: f64,
    pub max_strength: f64,
}

impl Default for RandomStrategyConfig {
    fn default() -> Self {
        Self {
            n: 2,
            d_r: 4,
            d_b: 2,
            min_strength: 1e-4,
            max_strength: 1.0,
        }
    }
}

fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<Complex> {
    let mut g = DMatrix::<Complex>::zeros(d, d);
    for z in g.iter_mut() {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        *z = Complex::new(re, im);
    }
    (&g + g.adjoint()) * Complex::new(0.5 / (d as f64).sqrt(), 0.0)
}

/// `exp(i s H)` for Hermitian `H`.
fn exp_i(h: DMatrix<Complex>, s: f64) -> DMatrix<Complex> {
    let eig = SymmetricEigen::new(h);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex::from_polar(1.0, s * l)));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

/// Honest qRAM followed by `exp(i s H)` on the full legal scope of each
/// round, with a fresh random Hermitian `H` and log-uniform strength `s`.
pub fn random_near_honest<R: Rng + ?Sized>(cfg: &RandomStrategyConfig, rng: &mut R) -> Result<BobStrategy> {
    if !(cfg.min_strength > 0.0 && cfg.min_strength <= cfg.max_strength) {
        return Err(Error::Strategy("strength range must satisfy 0 < min <= max".into()));
    }
    let big_n = 1usize << cfg.n;
    let (lo, hi) = (cfg.min_strength.ln(), cfg.max_strength.ln());
    let mut rounds = Vec::new();
    for k in 1..=2 {
        let mut regs = vec![(q_name(k), big_n)];
        regs.extend((k..=2).map(|m| (r_name(m), cfg.d_r)));
        regs.push((BOB.to_string(), cfg.d_b));
        let layout = RegisterLayout::new(regs)?;
        let s = (lo + (hi - lo) * rng.random::<f64>()).exp();
        let u = exp_i(random_hermitian(layout.dim(), rng), s);
        let op = Operator::unitary(layout.clone(), u)?;
        let scope: Vec<&str> = layout.names().collect();
        rounds.push(RoundAction::program(
            &scope,
            vec![
                Instr::Qram {
                    q: q_name(k),
                    r: r_name(k),
                    selector: None,
                },
                Instr::Unitary { operator: op },
            ],
        ));
    }
    Ok(BobStrategy::new("random_near_honest", cfg.d_b, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::UNITARY_TOL;
    use crate::strategies::validate_scope;
    use rand::SeedableRng;

    #[test]
    fn random_strategies_are_scope_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let s = random_near_honest(&RandomStrategyConfig::default(), &mut rng).unwrap();
            assert!(validate_scope(&s, 2, false).is_ok());
            assert!(s.is_unitary());
        }
        let l = RegisterLayout::single("X", 6).unwrap();
        let u = Operator::new(l, exp_i(random_hermitian(6, &mut rng), 0.7)).unwrap();
        assert!(u.unitarity_deviation() < UNITARY_TOL);
    }
}
