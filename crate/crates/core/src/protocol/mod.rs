//! The query protocol: database, Alice's queries, session execution and her
//! honesty test.

mod database;
mod honesty;
mod plan;
mod query;
mod session;
mod transcript;

pub use database::{qram_unitary, Database};
pub(crate) use database::apply_qram;
pub use honesty::{honesty_test, test_branches, test_sampled, AnswerCheck, HonestyReport, SampledVerdict, TestBranch};
pub use plan::{q_name, r_name, RoundSlot, SessionPlan, SlotRole, ANCILLA, BOB};
pub use query::{MessageRole, QuerySpec, QueryTerm, QueryVariant, Scenario};
pub use session::{
    pass_probability, prepare_queries, run_session_exact, run_session_sampled, run_session_with_rng,
    session_plan, PassProbabilities, SessionOptions, SessionOutcome, MAX_PAYLOAD_DIM,
};
pub use transcript::{Direction, Message, Payload, Transcript, TranscriptOutcome};
