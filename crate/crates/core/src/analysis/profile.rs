use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::protocol::{run_session_exact, Database, QuerySpec, Scenario, SessionOptions};
use crate::qcore::DensityMatrix;
use crate::strategies::BobStrategy;

/// Exact statistics of one `(j, scenario)` session.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioStats {
    pub pass: f64,
    /// Unconditioned reduced state of B.
    #[serde(skip)]
    pub residual: DensityMatrix,
    /// B restricted to passing outcomes; trace equals `pass`.
    #[serde(skip)]
    pub passed: DensityMatrix,
}

impl ScenarioStats {
    /// B conditioned on passing.
    pub fn conditioned(&self) -> Option<DensityMatrix> {
        self.passed.normalized().ok()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QueryStats {
    pub j: usize,
    pub a: ScenarioStats,
    pub b: ScenarioStats,
}

impl QueryStats {
    pub fn scenario(&self, s: Scenario) -> &ScenarioStats {
        match s {
            Scenario::A => &self.a,
            Scenario::B => &self.b,
        }
    }

    /// `ρ_B(j) = (ρ^a + ρ^b)/2`.
    pub fn mixed_residual(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&[(0.5, &self.a.residual), (0.5, &self.b.residual)])
    }
}

/// Every query of a strategy run exactly in both scenarios.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyProfile {
    pub strategy: String,
    pub queries: Vec<QueryStats>,
}

impl StrategyProfile {
    /// `ε = 1 − min_{j,ℓ} P_j^{(ℓ)}`, clamped to `[0, 1]`.
    pub fn epsilon(&self) -> f64 {
        (1.0 - self.min_pass()).clamp(0.0, 1.0)
    }

    pub fn min_pass(&self) -> f64 {
        self.queries.iter().map(|q| q.a.pass.min(q.b.pass)).fold(1.0, f64::min)
    }

    pub fn min_pass_in(&self, s: Scenario) -> f64 {
        self.queries.iter().map(|q| q.scenario(s).pass).fold(1.0, f64::min)
    }

    /// Average pass probability over queries and scenarios.
    pub fn mean_pass(&self) -> f64 {
        let total: f64 = self.queries.iter().map(|q| q.a.pass + q.b.pass).sum();
        total / (2.0 * self.queries.len() as f64)
    }

    pub fn query(&self, j: usize) -> Option<&QueryStats> {
        self.queries.iter().find(|q| q.j == j)
    }
}

fn stats(spec: &QuerySpec, s: Scenario, db: &Database, strategy: &BobStrategy, opts: &SessionOptions) -> Result<ScenarioStats> {
    let out = run_session_exact(spec, s, db, strategy, opts)?;
    Ok(ScenarioStats {
        pass: out.pass_probability,
        residual: out.bob_residual,
        passed: out.bob_passed,
    })
}

/// Profile over every index with canonical queries.
pub fn profile(strategy: &BobStrategy, db: &Database, opts: &SessionOptions) -> Result<StrategyProfile> {
    let indices: Vec<usize> = (0..db.entries()).collect();
    profile_with(strategy, db, opts, &indices, QuerySpec::canonical)
}

/// Profile over `indices`, building each query with `spec_for`.
pub fn profile_with(
    strategy: &BobStrategy,
    db: &Database,
    opts: &SessionOptions,
    indices: &[usize],
    spec_for: impl Fn(usize) -> QuerySpec + Sync,
) -> Result<StrategyProfile> {
    let queries = indices
        .par_iter()
        .map(|&j| {
            let spec = spec_for(j);
            Ok(QueryStats {
                j,
                a: stats(&spec, Scenario::A, db, strategy, opts)?,
                b: stats(&spec, Scenario::B, db, strategy, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StrategyProfile {
        strategy: strategy.name.clone(),
        queries,
    })
}
