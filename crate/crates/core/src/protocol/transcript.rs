use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::StateVector;

use super::query::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AliceToBob,
    BobToAlice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    /// Snapshot of the whole tracked system after the message.
    State { state: StateVector },
    Classical { fields: BTreeMap<String, String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub round: usize,
    pub direction: Direction,
    pub registers: Vec<String>,
    pub payload: Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptOutcome {
    pub passed: bool,
    pub recovered_answer: Option<usize>,
}

/// Record of one sampled session. Alice's secret query parameters are never
/// written here; only the variant name is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    pub n: u32,
    #[serde(rename = "d_R")]
    pub d_r: usize,
    #[serde(rename = "d_B")]
    pub d_b: usize,
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub variant: String,
    pub messages: Vec<Message>,
    pub outcome: TranscriptOutcome,
}

impl Transcript {
    pub const VERSION: u32 = 1;

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    /// Rounds never decrease, and within a round Alice's message precedes
    /// Bob's reply.
    pub fn validate(&self) -> Result<()> {
        let mut last: Option<(usize, Direction)> = None;
        for m in &self.messages {
            let ok = match last {
                None => m.direction == Direction::AliceToBob,
                Some((r, Direction::AliceToBob)) => m.round == r && m.direction == Direction::BobToAlice,
                Some((r, Direction::BobToAlice)) => m.round > r && m.direction == Direction::AliceToBob,
            };
            if !ok {
                return Err(Error::Serde(format!(
                    "message out of order at round {} ({:?})",
                    m.round, m.direction
                )));
            }
            last = Some((m.round, m.direction));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(round: usize, direction: Direction) -> Message {
        Message {
            round,
            direction,
            registers: vec![format!("Q{round}")],
            payload: Payload::Classical {
                fields: BTreeMap::new(),
            },
        }
    }

    #[test]
    fn ordering_rules() {
        let mut t = Transcript {
            version: 1,
            n: 1,
            d_r: 2,
            d_b: 1,
            scenario: Some(Scenario::A),
            seed: 0,
            variant: "canonical".into(),
            messages: vec![
                msg(1, Direction::AliceToBob),
                msg(1, Direction::BobToAlice),
                msg(2, Direction::AliceToBob),
                msg(2, Direction::BobToAlice),
            ],
            outcome: TranscriptOutcome {
                passed: true,
                recovered_answer: Some(1),
            },
        };
        assert!(t.validate().is_ok());
        let text = t.to_json().unwrap();
        assert_eq!(Transcript::from_json(&text).unwrap().to_json().unwrap(), text);
        t.messages.swap(0, 1);
        assert!(t.validate().is_err());
    }
}
