//! Leakage accounting, the security game and desk-scale experiments.

mod bad_query;
mod data;
mod env;
mod game;
mod guessing;
mod ledger;
mod onewayness;
mod privacy;
mod reduction;
mod stats;

pub use bad_query::{designated_queries, TrackedOracle};
pub use data::{data_key, DataSampler, TableSampler, UniformBlocks};
pub use env::{bits_for, DataEnv, LeakFn, RealEnv, TraceEvent};
pub use game::{
    run_security_game, Adversary, AdversaryStep, Challenger, ChallengerStep, GameConfig, GameTranscript, Outcome,
    Party, DEFAULT_ROUND_CAP,
};
pub use guessing::{
    estimate_guessing, guessing_bound, run_guessing_game, GuessOutcome, GuessingAdversary, GuessingBound,
    GuessingGameConfig, GuessingReport, GuessingSecret, GuessingSession, LeakBlocksGuesser, LeakOracleGuesser,
    RequeryCheater, ZeroKnowledgeGuesser,
};
pub use ledger::{LeakageLedger, LeakageOracle};
pub use onewayness::{
    estimate_onewayness, onewayness_trial, player_bound, BruteForce, GivenData, OnewaynessAdversary, OnewaynessConfig,
    OnewaynessReport, PlayerBound,
};
pub use privacy::{
    coupled_runs, real_run, run_privacy_simulation, simulate, simulator_overhead, ConstantOutput, FirstKeyBlock,
    KeyAdversary, LeakBlock, PrivacyConfig, PrivacyReport, RecomputeBlock, Run,
};
pub use reduction::{
    compare_reduction, recomputing_cost, run_disk_game, run_wrapped_game, wrapper_overhead, DiskAdversary,
    DiskGameAdapter, HonestDiskProver, OverLeaker, RecomputingProver, ReductionConfig, ReductionReport,
    WrappedAdversary,
};
pub use stats::{binomial_sigma, histogram, total_variation, trial_rng, within_3sigma, within_upper_3sigma};
