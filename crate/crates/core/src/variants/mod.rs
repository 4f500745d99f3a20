//! Query variants: randomized phases or amplitudes, ancilla-entangled
//! queries and the three-message protocol.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{
    honesty_test, run_session_exact, AnswerCheck, Database, HonestyReport, MessageRole, QuerySpec, Scenario,
    SessionOptions, SessionOutcome, ANCILLA,
};
use crate::qcore::{Complex, StateVector, STATE_TOL};
use crate::strategies::BobStrategy;

/// Default number of phases in the exact grid.
pub const DEFAULT_THETA_GRID: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ThetaDistribution {
    /// `θ_k = 2πk/points`, uniform.
    Grid { points: usize },
    /// Uniform over the listed phases.
    List { values: Vec<f64> },
    /// Uniform on `[0, 2π)`; sampling only.
    Continuous,
}

impl Default for ThetaDistribution {
    fn default() -> Self {
        Self::Grid {
            points: DEFAULT_THETA_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AmplitudeDistribution {
    /// `(cos t, sin t)` with `t_k = (k+1)π / (2(points+1))`.
    Grid { points: usize },
    /// Uniform over the listed real pairs.
    List { pairs: Vec<[f64; 2]> },
}

impl Default for AmplitudeDistribution {
    fn default() -> Self {
        Self::List {
            pairs: vec![[FRAC_1_SQRT_2, FRAC_1_SQRT_2]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DecoyPolicy {
    Fixed { index: usize },
    /// Uniform over every index other than the target.
    Uniform,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariantConfig {
    #[default]
    Canonical,
    PhaseRandomized {
        #[serde(default)]
        theta: ThetaDistribution,
    },
    AmplitudeRandomized {
        #[serde(default)]
        amplitudes: AmplitudeDistribution,
    },
    EntanglementAssisted,
    NonRhetoric {
        decoy: DecoyPolicy,
        #[serde(default)]
        amplitudes: AmplitudeDistribution,
    },
}

/// All six message orders of the three-message protocol.
pub const ORDERS: [[MessageRole; 3]; 6] = {
    use MessageRole::{Decoy as D, Superposed as S, Target as T};
    [[S, T, D], [S, D, T], [T, S, D], [T, D, S], [D, S, T], [D, T, S]]
};

fn theta_support(d: &ThetaDistribution) -> Result<Vec<f64>> {
    match d {
        ThetaDistribution::Grid { points: 0 } => Err(Error::Domain("phase grid needs at least one point".into())),
        ThetaDistribution::Grid { points } => Ok((0..*points).map(|k| 2.0 * PI * k as f64 / *points as f64).collect()),
        ThetaDistribution::List { values } if values.is_empty() => Err(Error::Domain("empty phase list".into())),
        ThetaDistribution::List { values } => {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("phases must be finite".into()));
            }
            Ok(values.clone())
        }
        ThetaDistribution::Continuous => Err(Error::Domain("a continuous phase distribution has no finite support".into())),
    }
}

fn amplitude_support(d: &AmplitudeDistribution) -> Result<Vec<(Complex, Complex)>> {
    let pairs: Vec<[f64; 2]> = match d {
        AmplitudeDistribution::Grid { points: 0 } => {
            return Err(Error::Domain("amplitude grid needs at least one point".into()))
        }
        AmplitudeDistribution::Grid { points } => (0..*points)
            .map(|k| {
                let t = (k + 1) as f64 * PI / (2.0 * (*points + 1) as f64);
                [t.cos(), t.sin()]
            })
            .collect(),
        AmplitudeDistribution::List { pairs } if pairs.is_empty() => {
            return Err(Error::Domain("empty amplitude list".into()))
        }
        AmplitudeDistribution::List { pairs } => pairs.clone(),
    };
    pairs
        .into_iter()
        .map(|[a, b]| {
            if ((a * a + b * b) - 1.0).abs() > STATE_TOL {
                return Err(Error::Domain(format!("amplitudes ({a}, {b}) are not normalized")));
            }
            Ok((Complex::new(a, 0.0), Complex::new(b, 0.0)))
        })
        .collect()
}

fn decoys(policy: DecoyPolicy, j: usize, entries: usize) -> Result<Vec<usize>> {
    match policy {
        DecoyPolicy::Fixed { index } if index == j || index >= entries => Err(Error::Domain(format!(
            "decoy {index} must differ from the target {j} and be below {entries}"
        ))),
        DecoyPolicy::Fixed { index } => Ok(vec![index]),
        DecoyPolicy::Uniform if entries < 2 => Err(Error::Domain("no decoy available with one entry".into())),
        DecoyPolicy::Uniform => Ok((0..entries).filter(|&d| d != j).collect()),
    }
}

impl VariantConfig {
    /// Variant from its short name; `theta_grid` sets the phase grid size,
    /// with 0 meaning continuous phases.
    pub fn from_name(name: &str, theta_grid: Option<usize>) -> Result<Self> {
        Ok(match name {
            "canonical" => Self::Canonical,
            "phase" => Self::PhaseRandomized {
                theta: match theta_grid {
                    Some(0) => ThetaDistribution::Continuous,
                    Some(points) => ThetaDistribution::Grid { points },
                    None => ThetaDistribution::default(),
                },
            },
            "amplitude" => Self::AmplitudeRandomized {
                amplitudes: AmplitudeDistribution::Grid { points: 8 },
            },
            "entangled" => Self::EntanglementAssisted,
            "non_rhetoric" => Self::NonRhetoric {
                decoy: DecoyPolicy::Uniform,
                amplitudes: AmplitudeDistribution::default(),
            },
            other => return Err(Error::Domain(format!("unknown variant `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Canonical => "canonical",
            Self::PhaseRandomized { .. } => "phase",
            Self::AmplitudeRandomized { .. } => "amplitude",
            Self::EntanglementAssisted => "entangled",
            Self::NonRhetoric { .. } => "non_rhetoric",
        }
    }

    /// Uniform-phase variant on the default grid.
    pub fn phase_grid(points: usize) -> Self {
        Self::PhaseRandomized {
            theta: ThetaDistribution::Grid { points },
        }
    }

    pub fn validate(&self, entries: usize) -> Result<()> {
        match self {
            Self::PhaseRandomized {
                theta: ThetaDistribution::Continuous,
            } => Ok(()),
            Self::NonRhetoric { .. } if entries < 2 => Err(Error::Domain("three-message queries need N >= 2".into())),
            Self::NonRhetoric {
                decoy: DecoyPolicy::Fixed { index },
                ..
            } => self.support(usize::from(*index == 0), entries).map(|_| ()),
            _ => self.support(0, entries).map(|_| ()),
        }
    }

    /// Finite distribution of concrete queries for target `j`.
    pub fn support(&self, j: usize, entries: usize) -> Result<Vec<(f64, QuerySpec)>> {
        if j >= entries {
            return Err(Error::Query(format!("index {j} >= N = {entries}")));
        }
        let specs: Vec<QuerySpec> = match self {
            Self::Canonical => vec![QuerySpec::canonical(j)],
            Self::EntanglementAssisted => vec![QuerySpec::entangled(j)],
            Self::PhaseRandomized { theta } => theta_support(theta)?
                .into_iter()
                .map(|t| QuerySpec::with_phase(j, t))
                .collect(),
            Self::AmplitudeRandomized { amplitudes } => amplitude_support(amplitudes)?
                .into_iter()
                .map(|(a, b)| QuerySpec::with_amplitudes(j, a, b))
                .collect::<Result<_>>()?,
            Self::NonRhetoric { decoy, amplitudes } => {
                let amps = amplitude_support(amplitudes)?;
                let mut out = Vec::new();
                for d in decoys(*decoy, j, entries)? {
                    for &(a, b) in &amps {
                        for order in ORDERS {
                            out.push(QuerySpec::non_rhetoric(j, d, a, b, order)?);
                        }
                    }
                }
                out
            }
        };
        let w = 1.0 / specs.len() as f64;
        Ok(specs.into_iter().map(|s| (w, s)).collect())
    }
}

/// Alice's private draw: the concrete query and its secret parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnQuery {
    pub variant: String,
    pub spec: QuerySpec,
}

impl DrawnQuery {
    /// Sidecar record, kept by Alice only.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Draws the variant's secret parameters for target `j`.
pub fn sample_variant_parameters<R: Rng + ?Sized>(
    config: &VariantConfig,
    j: usize,
    entries: usize,
    rng: &mut R,
) -> Result<DrawnQuery> {
    let spec = match config {
        VariantConfig::PhaseRandomized {
            theta: ThetaDistribution::Continuous,
        } => {
            if j >= entries {
                return Err(Error::Query(format!("index {j} >= N = {entries}")));
            }
            QuerySpec::with_phase(j, 2.0 * PI * rng.random::<f64>())
        }
        _ => {
            let support = config.support(j, entries)?;
            support.choose(rng).expect("non-empty support").1.clone()
        }
    };
    Ok(DrawnQuery {
        variant: config.name().to_string(),
        spec,
    })
}

/// Pass probability averaged over the variant's distribution and both
/// scenarios (the three-message protocol has no scenario).
pub fn averaged_pass_probability(
    config: &VariantConfig,
    j: usize,
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
) -> Result<f64> {
    let mut total = 0.0;
    for (w, spec) in config.support(j, db.entries())? {
        let p = match config {
            VariantConfig::NonRhetoric { .. } => run_session_exact(&spec, Scenario::A, db, strategy, opts)?.pass_probability,
            _ => {
                let a = run_session_exact(&spec, Scenario::A, db, strategy, opts)?.pass_probability;
                let b = run_session_exact(&spec, Scenario::B, db, strategy, opts)?.pass_probability;
                0.5 * (a + b)
            }
        };
        total += w * p;
    }
    Ok(total)
}

/// `(|j⟩_Q|0⟩_A + |0⟩_Q|j⟩_A)/√2` on registers `(q, A)`, `N = 2ⁿ`.
pub fn entangled_query(j: usize, n: u32, q: &str) -> Result<StateVector> {
    let entries = 1usize << n;
    if j >= entries {
        return Err(Error::Query(format!("index {j} >= N = {entries}")));
    }
    let layout = crate::qcore::RegisterLayout::new([(q, entries), (ANCILLA, entries)])?;
    if j == 0 {
        return StateVector::basis(layout, &[0, 0]);
    }
    let a = StateVector::basis(layout.clone(), &[j, 0])?;
    let b = StateVector::basis(layout, &[0, j])?;
    Ok(a.add(&b)?.scaled(Complex::new(FRAC_1_SQRT_2, 0.0)))
}

/// Honesty test of an entangled-variant session's final state.
pub fn entangled_honesty_test(
    final_state: &StateVector,
    j: usize,
    scenario: Scenario,
    db: &Database,
    check: AnswerCheck,
) -> Result<HonestyReport> {
    honesty_test(final_state, &QuerySpec::entangled(j), scenario, db, check)
}

/// Exact three-message session.
#[allow(clippy::too_many_arguments)]
pub fn run_non_rhetoric_session(
    j: usize,
    decoy: usize,
    alpha: Complex,
    beta: Complex,
    order: [MessageRole; 3],
    db: &Database,
    strategy: &BobStrategy,
    opts: &SessionOptions,
) -> Result<SessionOutcome> {
    let spec = QuerySpec::non_rhetoric(j, decoy, alpha, beta, order)?;
    if strategy.num_rounds() != 3 {
        return Err(Error::Strategy(format!(
            "three-message sessions need a 3-round strategy, `{}` has {}",
            strategy.name,
            strategy.num_rounds()
        )));
    }
    run_session_exact(&spec, Scenario::A, db, strategy, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn one_point_grid_is_canonical() {
        let cfg = VariantConfig::phase_grid(1);
        let s = cfg.support(2, 4).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].1.superposed_terms(), QuerySpec::canonical(2).superposed_terms());
    }

    #[test]
    fn draws_are_reproducible() {
        let cfg = VariantConfig::PhaseRandomized {
            theta: ThetaDistribution::Continuous,
        };
        let draw = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            sample_variant_parameters(&cfg, 1, 4, &mut rng).unwrap()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5).spec.theta, draw(6).spec.theta);
    }

    #[test]
    fn entangled_marginal() {
        let psi = entangled_query(3, 2, "Q1").unwrap();
        let rho = psi.partial_trace(&["Q1"]).unwrap();
        assert!((rho.matrix()[(3, 3)].re - 0.5).abs() < 1e-12);
        assert!((rho.matrix()[(0, 0)].re - 0.5).abs() < 1e-12);
        assert!(rho.matrix()[(0, 3)].norm() < 1e-12);
        assert_eq!(entangled_query(0, 2, "Q1").unwrap().amplitude(&[0, 0]).unwrap(), Complex::new(1.0, 0.0));
        assert!(entangled_query(4, 2, "Q1").is_err());
    }

    #[test]
    fn decoy_policy_rejects_target() {
        let cfg = VariantConfig::NonRhetoric {
            decoy: DecoyPolicy::Fixed { index: 1 },
            amplitudes: AmplitudeDistribution::default(),
        };
        assert!(cfg.support(1, 4).is_err());
        assert_eq!(cfg.support(2, 4).unwrap().len(), 6);
    }
}
