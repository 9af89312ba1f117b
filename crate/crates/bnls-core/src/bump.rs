//! The concrete smooth cutoffs: a `C^∞` monotone step, the mollifier symbol
//! `θ` (plateau ratio 1/2), and the time window `η` (1 on [-1,1], supported
//! in [-2,2]).

use num_traits::Float;

/// `C^∞` step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, strictly monotone between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Mollifier symbol: even, `θ ≡ 1` on `|x| ≤ 1/2`, vanishing for `|x| ≥ 1`.
pub fn mollifier_theta(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        smooth_step(2.0 * (1.0 - a))
    }
}

/// Time window: even, `η ≡ 1` on `|t| ≤ 1`, supported in `[-2, 2]`, `η ≥ 0`.
pub fn eta(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        smooth_step(2.0 - a)
    }
}
