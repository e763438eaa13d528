//! Per-state power allocation for the upper bound.
//!
//! The inner term of the upper bound maximizes
//! `E_h[ φ(P(h), |h|²) ]` over non-negative allocations with
//! `E[P(h)] ≤ P`, where `φ(p, x) = E_g[log2(1 + p·x / (1 + p·|g|²))]`.
//! `φ` is concave in `p` for every fading state, so the problem splits
//! through a scalar Lagrange multiplier: each state solves a 1-D concave
//! maximization of `φ(p, x) − λp`, and λ is driven to the power budget
//! by bisection. The fading distribution is discretized on a mid-point
//! quantile grid of `|h|² / var_h ~ Exp(1)`.

use crate::bounds::{BoundsError, SystemParams};
use crate::expectation::{fixed_gain_rate, EvalConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GOLDEN_ITERS: usize = 96;
const BISECT_ITERS: usize = 80;
/// Search ceiling for a single state's power, as a multiple of the
/// average budget.
const POWER_CAP_FACTOR: f64 = 1e4;

/// Discretized optimal allocation and its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerPolicy {
    /// Grid of `|h|²` values (quantile mid-points scaled by `var_h`).
    pub states: Vec<f64>,
    /// Optimal power per state.
    pub powers: Vec<f64>,
    /// Final Lagrange multiplier, bits per unit power.
    pub lambda: f64,
    /// Achieved objective, bits per channel use for one link.
    pub value: f64,
    /// `dual(λ) − primal` certificate; small means near-optimal.
    pub dual_gap: f64,
    /// Objective of the constant allocation `P(h) = P` on the same grid.
    pub constant_policy_value: f64,
}

/// Maximize a concave function on `[lo, hi]` by golden section.
/// Ties shrink toward `lo`, so flat stretches resolve to the smallest
/// argument.
pub(crate) fn golden_max(
    mut lo: f64,
    mut hi: f64,
    iters: usize,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

pub(crate) use golden_max as golden_section_max;

/// `φ(p, x) = E_g[log2(1 + p·x/(1 + p·|g|²))]`, exact via the
/// exponential-integral kernel.
#[inline]
fn state_rate(p: f64, x: f64, var_g: f64) -> f64 {
    fixed_gain_rate(p * x, p * var_g)
}

/// Solve the inner problem for every state at multiplier `lambda`,
/// returning per-state powers.
fn allocate(states: &[f64], var_g: f64, lambda: f64, p_cap: f64) -> Vec<f64> {
    states
        .par_iter()
        .map(|&x| {
            // At p = 0 the objective slope is x/ln2 − λ; below zero the
            // state stays silent.
            if x / LN_2 <= lambda {
                return 0.0;
            }
            let (p, _) = golden_max(0.0, p_cap, GOLDEN_ITERS, |p| {
                state_rate(p, x, var_g) - lambda * p
            });
            p
        })
        .collect()
}

/// Optimal power allocation for one link of the upper bound.
pub fn optimize_power_allocation(
    sys: &SystemParams,
    cfg: &EvalConfig,
) -> Result<PowerPolicy, BoundsError> {
    let n = cfg.power_grid;
    assert!(n >= 8, "power grid needs at least 8 points, got {n}");
    let var_h = sys.channel().var_h();
    let var_g = sys.channel().var_g();
    let p_avg = sys.p();
    let p_cap = POWER_CAP_FACTOR * p_avg;

    // mid-point quantiles of Exp(1), scaled to |h|²
    let states: Vec<f64> = (0..n)
        .map(|i| -((1.0 - (i as f64 + 0.5) / n as f64).ln()) * var_h)
        .collect();
    let mean = |powers: &[f64]| powers.iter().sum::<f64>() / n as f64;
    let objective =
        |powers: &[f64]| -> f64 {
            powers
                .iter()
                .zip(&states)
                .map(|(&p, &x)| state_rate(p, x, var_g))
                .sum::<f64>()
                / n as f64
        };

    // λ = 0 saturates every state at the cap, so the budget is always
    // exceeded there and the root lies in (0, λ_max].
    let mut lo = 0.0f64;
    let mut hi = states.last().unwrap() / LN_2;
    let mut hi_alloc = allocate(&states, var_g, hi, p_cap);
    if mean(&hi_alloc) > p_avg {
        return Err(BoundsError::PowerSolverFailed {
            detail: format!(
                "zero-power multiplier {hi:e} still exceeds budget {p_avg:e}"
            ),
        });
    }
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (lo + hi);
        let alloc = allocate(&states, var_g, mid, p_cap);
        if mean(&alloc) > p_avg {
            lo = mid;
        } else {
            hi = mid;
            hi_alloc = alloc;
        }
        if (hi - lo) < 1e-13 * hi.max(1e-300) {
            break;
        }
    }

    // hi is feasible by construction; certify with the dual value at hi.
    let powers = hi_alloc;
    let spent = mean(&powers);
    if spent > p_avg * (1.0 + 1e-9) {
        return Err(BoundsError::PowerSolverFailed {
            detail: format!("bisection ended infeasible: spent {spent:e} of {p_avg:e}"),
        });
    }
    let value = objective(&powers);
    let dual_gap = hi * (p_avg - spent);
    if !dual_gap.is_finite() || dual_gap < -1e-9 {
        return Err(BoundsError::PowerSolverFailed {
            detail: format!("negative or non-finite dual gap {dual_gap:e}"),
        });
    }
    let constant_policy_value = objective(&vec![p_avg; n]);
    Ok(PowerPolicy {
        states,
        powers,
        lambda: hi,
        value,
        dual_gap: dual_gap.max(0.0),
        constant_policy_value,
    })
}
