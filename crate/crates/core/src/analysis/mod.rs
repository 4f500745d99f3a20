//! Attack analysis: round decompositions, the fidelity theorem, Holevo
//! information bounds, parameter sweeps and repeated-query experiments.

mod decompose;
mod discrimination;
mod information;
mod profile;
mod repeated;
mod sweep;
mod theorem;

pub use decompose::{
    decompose_all, decompose_query, decompose_round, decompose_round1, decompose_round2, sigma_star, Decomposition,
    QueryDecomposition,
};
pub use discrimination::{helstrom_advantage, helstrom_pure, helstrom_success, scenario_guess_probability};
pub use information::{bob_chi, classical_decoy_bound, holevo_chi, info_bound, info_bound_with, Ensemble, InfoBound};
pub use profile::{profile, profile_with, QueryStats, ScenarioStats, StrategyProfile};
pub use repeated::{
    repeated_query_exact, repeated_query_sampled, ConsistencyReport, RepeatedQuery, SampledRun,
};
pub use sweep::{fmt_sig, sweep, tradeoff_point, write_csv, SweepRow, TradeoffPoint, CSV_HEADER};
pub use theorem::{
    verify_theorem, verify_with_profile, InequalityCheck, PassRow, TheoremReport, CHECK_TOL, FIDELITY_COEFF,
    OVERLAP_COEFF,
};
