use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{Complex, STATE_TOL};

/// Alice's secret ordering choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Plain query first, superposed query second.
    A,
    /// Superposed query first, plain query second.
    B,
}

impl Scenario {
    pub const BOTH: [Scenario; 2] = [Scenario::A, Scenario::B];

    pub fn tag(self) -> &'static str {
        match self {
            Scenario::A => "a",
            Scenario::B => "b",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Scenario::A),
            "b" | "B" => Ok(Scenario::B),
            other => Err(Error::Query(format!("unknown scenario `{other}`"))),
        }
    }
}

/// What each message of the non-rhetoric protocol carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageRole {
    /// `α|j⟩ + β|j′⟩`
    Superposed,
    /// `|j⟩`
    Target,
    /// `|j′⟩`
    Decoy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QueryVariant {
    Canonical,
    Phase,
    Amplitude,
    /// The superposed register is entangled with Alice's ancilla `A`.
    Entangled,
    /// Three messages `α|j⟩+β|j′⟩`, `|j⟩`, `|j′⟩` sent in `order`.
    NonRhetoric { decoy: usize, order: [MessageRole; 3] },
}

impl QueryVariant {
    pub fn name(&self) -> &'static str {
        match self {
            QueryVariant::Canonical => "canonical",
            QueryVariant::Phase => "phase",
            QueryVariant::Amplitude => "amplitude",
            QueryVariant::Entangled => "entangled",
            QueryVariant::NonRhetoric { .. } => "non_rhetoric",
        }
    }
}

/// One term `amp |index⟩_Q |ancilla⟩_A` of a superposed query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryTerm {
    pub amplitude: Complex,
    pub index: usize,
    pub ancilla: Option<usize>,
}

/// Alice's query: target index and the shape of the superposed register,
/// `α|j⟩ + β e^{iθ}|0⟩` (or `|j′⟩` in the non-rhetoric protocol).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub j: usize,
    pub theta: f64,
    pub alpha: Complex,
    pub beta: Complex,
    pub variant: QueryVariant,
}

impl QuerySpec {
    pub fn canonical(j: usize) -> Self {
        Self {
            j,
            theta: 0.0,
            alpha: Complex::new(FRAC_1_SQRT_2, 0.0),
            beta: Complex::new(FRAC_1_SQRT_2, 0.0),
            variant: QueryVariant::Canonical,
        }
    }

    pub fn with_phase(j: usize, theta: f64) -> Self {
        Self {
            theta,
            variant: QueryVariant::Phase,
            ..Self::canonical(j)
        }
    }

    pub fn with_amplitudes(j: usize, alpha: Complex, beta: Complex) -> Result<Self> {
        let spec = Self {
            alpha,
            beta,
            variant: QueryVariant::Amplitude,
            ..Self::canonical(j)
        };
        spec.check_amplitudes()?;
        Ok(spec)
    }

    pub fn entangled(j: usize) -> Self {
        Self {
            variant: QueryVariant::Entangled,
            ..Self::canonical(j)
        }
    }

    pub fn non_rhetoric(
        j: usize,
        decoy: usize,
        alpha: Complex,
        beta: Complex,
        order: [MessageRole; 3],
    ) -> Result<Self> {
        let spec = Self {
            j,
            theta: 0.0,
            alpha,
            beta,
            variant: QueryVariant::NonRhetoric { decoy, order },
        };
        spec.check_amplitudes()?;
        if j == decoy {
            return Err(Error::Query("decoy index must differ from the target".into()));
        }
        let mut roles = order.to_vec();
        roles.sort_by_key(|r| *r as u8);
        if roles != [MessageRole::Superposed, MessageRole::Target, MessageRole::Decoy] {
            return Err(Error::Query(format!("invalid message order {order:?}")));
        }
        Ok(spec)
    }

    fn check_amplitudes(&self) -> Result<()> {
        let norm = self.alpha.norm_sqr() + self.beta.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Query(format!("|α|² + |β|² = {norm} != 1")));
        }
        Ok(())
    }

    /// Validates against a database with `entries` rows.
    pub fn validate(&self, entries: usize) -> Result<()> {
        if self.j >= entries {
            return Err(Error::Query(format!("index {} >= N = {entries}", self.j)));
        }
        if let QueryVariant::NonRhetoric { decoy, .. } = self.variant {
            if decoy >= entries {
                return Err(Error::Query(format!("decoy {decoy} >= N = {entries}")));
            }
        }
        if !self.theta.is_finite() {
            return Err(Error::Query("phase must be finite".into()));
        }
        self.check_amplitudes()
    }

    /// The index superposed with the target: 0, or the decoy.
    pub fn partner(&self) -> usize {
        match self.variant {
            QueryVariant::NonRhetoric { decoy, .. } => decoy,
            _ => 0,
        }
    }

    pub fn is_entangled(&self) -> bool {
        matches!(self.variant, QueryVariant::Entangled)
    }

    /// Terms of the superposed register; degenerate `j = 0` collapses to `|0⟩`.
    pub fn superposed_terms(&self) -> Vec<QueryTerm> {
        let partner = self.partner();
        let entangled = self.is_entangled();
        if self.j == partner {
            return vec![QueryTerm {
                amplitude: Complex::new(1.0, 0.0),
                index: partner,
                ancilla: entangled.then_some(0),
            }];
        }
        let phase = Complex::from_polar(1.0, self.theta);
        vec![
            QueryTerm {
                amplitude: self.alpha,
                index: self.j,
                ancilla: entangled.then_some(partner),
            },
            QueryTerm {
                amplitude: self.beta * phase,
                index: partner,
                ancilla: entangled.then_some(self.j),
            },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_query_degenerates() {
        let t = QuerySpec::with_phase(0, std::f64::consts::PI).superposed_terms();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].index, 0);
        assert_eq!(t[0].amplitude, Complex::new(1.0, 0.0));
    }

    #[test]
    fn amplitudes_must_be_normalized() {
        assert!(QuerySpec::with_amplitudes(1, Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn non_rhetoric_order_must_be_a_permutation() {
        use MessageRole::*;
        let a = Complex::new(FRAC_1_SQRT_2, 0.0);
        assert!(QuerySpec::non_rhetoric(1, 2, a, a, [Target, Target, Decoy]).is_err());
        assert!(QuerySpec::non_rhetoric(1, 1, a, a, [Superposed, Target, Decoy]).is_err());
        assert!(QuerySpec::non_rhetoric(1, 2, a, a, [Decoy, Superposed, Target]).is_ok());
    }
}
