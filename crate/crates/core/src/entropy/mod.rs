//! Exact min-entropy computations on small explicit distributions.

mod blocks;
mod distribution;
mod facts;
mod fixture;
mod hint;
mod measures;
mod multivariate;

pub use blocks::{high_block_claim_holds, high_block_threshold, high_entropy_block_count};
pub use distribution::{JointDistribution, MAX_BLOCK_BITS, MAX_TABLE_ENTRIES, TOLERANCE};
pub use facts::{
    average_entropy_loss, conditioning_value_entropy, event_conditioning_loss, pointwise_concentration, InequalityCheck,
};
pub use fixture::{parse_fixture, write_fixture};
pub use hint::{
    asymmetric_block_params, build_hint, chain_rule_certificate, BucketReport, ChainRuleCertificate, HintFunction,
    Violation,
};
pub use measures::{cond_min_entropy_avg, cond_min_entropy_event, min_entropy, pointwise_cond_min_entropy};
pub use multivariate::{
    multivariate_hint, stage_params, MultivariateBucket, MultivariateCertificate, MultivariateViolation,
};
