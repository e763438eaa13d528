//! Exponential-integral kernels used by the fading expectations.
//!
//! Every closed-form ergodic expectation in this crate reduces to the
//! scaled exponential integral `κ(q) = e^q E1(q)`, via the identity
//! `E[ln(Y + q)] = ln q + κ(q)` for `Y ~ Exp(1)` and `q > 0`.

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(x)`, the exponential integral, for `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 requires a positive argument, got {x}");
    if x <= 1.0 {
        // Power series: E1(x) = -γ - ln x + Σ (-1)^{k+1} x^k / (k·k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let contrib = -term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * (1.0 + sum.abs()) {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        (-x).exp() * exp_e1(x)
    }
}

/// `κ(x) = e^x E1(x)` for `x > 0`, stable at every scale.
///
/// For `x ≤ 1` the power series of `E1` is scaled by `e^x`. For `x > 1`
/// the modified Lentz continued fraction
/// `κ(x) = 1/(x+1 - 1²/(x+3 - 2²/(x+5 - …)))` is evaluated directly,
/// so the result never transits through a huge `e^x`.
pub fn exp_e1(x: f64) -> f64 {
    assert!(x > 0.0, "exp_e1 requires a positive argument, got {x}");
    if x <= 1.0 {
        return x.exp() * exp_integral_e1(x);
    }
    let tiny = 1e-300;
    let mut f = x + 1.0;
    let mut c = f;
    let mut d = 0.0;
    for n in 1..400u64 {
        let a = -((n * n) as f64);
        let b = x + (2 * n + 1) as f64;
        d = b + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = b + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `E[ln(Y + q)]` for `Y ~ Exp(1)`, equal to `ln q + κ(q)`.
pub fn expected_ln_shifted_exp(q: f64) -> f64 {
    assert!(q > 0.0, "shift must be positive, got {q}");
    q.ln() + exp_e1(q)
}

/// Regularized remainder `R₂(q) = κ(q) + γ − ln(1 + 1/q)`.
///
/// Bounded on `(0, ∞)`: behaves like `−q ln q` near 0 and tends to `γ`
/// at infinity. This is the piece left for quadrature after the
/// log-singular parts of the ratio-form expectation are peeled off in
/// closed form.
pub fn kernel_remainder(q: f64) -> f64 {
    exp_e1(q) + EULER_GAMMA - (1.0 / q).ln_1p()
}
