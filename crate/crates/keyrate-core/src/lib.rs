//! Secret-key rate bounds for two-way reciprocal Rayleigh block-fading
//! channels.
//!
//! Two terminals probe a non-coherent two-way channel whose forward and
//! reverse gains are correlated with coefficient ρ, while an
//! eavesdropper observes both transmissions through its own fading.
//! The crate computes, optimizes and cross-validates:
//!
//! * the genie-aided training baseline `−(1/T) log2(1−ρ²)`,
//! * a converse upper bound with per-fading-state power allocation,
//! * the achievable rate of a pilot + randomness-sharing scheme with a
//!   public discussion channel,
//! * the same scheme with the public messages carried in-band, priced
//!   by a non-coherent channel rate `R_NC(P)` through Gaussian
//!   quantization test channels,
//! * the high-SNR gap constant γ between the converse and the
//!   discussion bound.
//!
//! Everything is deterministic given a seed: Monte Carlo streams are
//! keyed by `(seed, substream, shard)` and reductions run in a fixed
//! order, so results are bit-identical under any worker count.
//!
//! Rates are bits per channel use; logs are base 2 throughout.

pub mod bounds;
pub mod expectation;
pub mod fading;
pub mod gaussian;
pub mod laguerre;
pub mod optimizer;
pub mod power;
pub mod special;

pub use bounds::{
    rate_lower_nodisc, rate_lower_pd, rate_training, rate_upper, BoundLabel, BoundsError,
    Eps1Rule, NodiscConfig, RateBreakdown, ResolvedScheme, RncKind, RncModel, SchemeParams,
    SystemParams,
};
pub use expectation::{
    eval, eval_mc, eval_quadrature, gamma_constant, EvalConfig, EvalMethod, EvalResult,
    Functional,
};
pub use fading::{ChannelParams, ChannelParamsError, ExpSampler, GainSample, GainSampler,
    RngAlgorithm, RngStream};
pub use gaussian::{
    alpha_from_pilot, build_quantized_chain, build_training_chain, gaussian_mi,
    sigma_sq_residual, CovarianceModel, EstimationChain, GaussianError, MiValue,
};
pub use optimizer::{
    corollary_schedule, optimize_scheme, OptimizeReport, OptimizeSpec, OptimizeTarget, Surrogate,
    TracePoint,
};
pub use power::{optimize_power_allocation, PowerPolicy};

/// Convert a dB value to linear power.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Convert linear power to dB.
pub fn linear_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}
