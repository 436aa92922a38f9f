//! Scoring kernel: rate scores, the additive composite, gap deflation,
//! and the closed-form disagreement interval between the two rules.
//!
//! The rate score treats one routed call as a renewal cycle of length
//! `1 + tau / l_ref` (in units of the reference latency) and scores
//! quality earned per unit of cycle time:
//!
//! ```text
//! rate(u, tau) = u / (1 + tau / l_ref)
//! ```
//!
//! The additive composite `alpha * u - (1 - alpha) * min(tau / cap, 1)`
//! pays a latency penalty even when quality is zero, so a fast useless
//! provider can outscore a slow useful one. `separation_interval` gives
//! the exact band of quality advantages where the two rules must rank a
//! two-arm pool differently.

use crate::domain::AdditiveParams;

/// Clamps to [0, 1]; estimates feed scores through this.
pub fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Quality per unit of normalized cycle time.
///
/// `u` is a quality in [0, 1], `tau_ms` a nonnegative latency,
/// `l_ref_ms` a positive reference latency. The result lies in
/// `[0, u]`: latency can only discount quality, never subsidize it.
pub fn renewal_score(u: f64, tau_ms: f64, l_ref_ms: f64) -> f64 {
    assert!(l_ref_ms > 0.0, "l_ref_ms must be positive, got {l_ref_ms}");
    assert!(tau_ms >= 0.0, "tau_ms must be nonnegative, got {tau_ms}");
    assert!((0.0..=1.0).contains(&u), "u must lie in [0, 1], got {u}");
    u / (1.0 + tau_ms / l_ref_ms)
}

/// Additive composite reward with capped latency normalization.
pub fn additive_score(u: f64, tau_ms: f64, params: &AdditiveParams) -> f64 {
    assert!(tau_ms >= 0.0, "tau_ms must be nonnegative, got {tau_ms}");
    assert!((0.0..=1.0).contains(&u), "u must lie in [0, 1], got {u}");
    let alpha = params.alpha;
    let tau_norm = (tau_ms / params.cap_ms()).min(1.0);
    alpha * u - (1.0 - alpha) * tau_norm
}

/// Exploration-deflation divisors: `1 + lambda * gap_i` where `gap_i` is
/// each arm's shortfall against the best current quality estimate.
/// Estimates are clamped to [0, 1] first; the best arm's divisor is
/// always exactly 1.
pub fn gap_deflation(u_hats: &[f64], lambda: f64) -> Vec<f64> {
    assert!(lambda >= 0.0, "lambda must be nonnegative, got {lambda}");
    let best = u_hats
        .iter()
        .map(|&u| clamp01(u))
        .fold(f64::NEG_INFINITY, f64::max);
    u_hats
        .iter()
        .map(|&u| 1.0 + lambda * (best - clamp01(u)).max(0.0))
        .collect()
}

/// A two-arm pool posed in normalized latency units: arm 1 is the
/// higher-quality, slower arm `(u2 + delta_u, tau1_norm)`; arm 2 the
/// faster arm `(u2, tau2_norm)` with `tau2_norm < tau1_norm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationInstance {
    pub alpha: f64,
    pub u2: f64,
    pub tau1_norm: f64,
    pub tau2_norm: f64,
}

impl SeparationInstance {
    fn check(&self) {
        assert!(
            self.alpha > 0.0 && self.alpha < 1.0,
            "alpha must lie in (0, 1), got {}",
            self.alpha
        );
        assert!(
            (0.0..=1.0).contains(&self.u2),
            "u2 must lie in [0, 1], got {}",
            self.u2
        );
        assert!(
            0.0 <= self.tau2_norm && self.tau2_norm < self.tau1_norm && self.tau1_norm <= 1.0,
            "need 0 <= tau2 < tau1 <= 1, got tau1={} tau2={}",
            self.tau1_norm,
            self.tau2_norm
        );
    }
}

/// Which arm a ranking rule prefers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    /// Arm 1: higher quality, slower.
    HigherQuality,
    /// Arm 2: lower quality, faster.
    Faster,
}

/// Open interval of quality advantages `delta_u` on which the additive
/// rule prefers the fast arm while the rate rule prefers the slow,
/// higher-quality arm. `None` when the interval is empty. The bounds may
/// exceed the feasible range `delta_u <= 1 - u2`; callers intersect.
pub fn separation_interval(inst: &SeparationInstance) -> Option<(f64, f64)> {
    inst.check();
    let delta_tau = inst.tau1_norm - inst.tau2_norm;
    let lo = inst.u2 * delta_tau / (1.0 + inst.tau2_norm);
    let hi = (1.0 - inst.alpha) / inst.alpha * delta_tau;
    if lo < hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// Evaluates both ranking rules on the instance at a given quality
/// advantage. Exact ties never count as a disagreement: an additive tie
/// resolves to the higher-quality arm, a rate tie to the faster arm, so
/// at either interval endpoint the pair agrees.
pub fn rankings_disagree(inst: &SeparationInstance, delta_u: f64) -> (Arm, Arm) {
    inst.check();
    assert!(
        delta_u >= 0.0 && inst.u2 + delta_u <= 1.0 + 1e-12,
        "delta_u must keep u1 = u2 + delta_u within [0, 1], got {delta_u}"
    );
    let u1 = inst.u2 + delta_u;
    let alpha = inst.alpha;

    let additive1 = alpha * u1 - (1.0 - alpha) * inst.tau1_norm;
    let additive2 = alpha * inst.u2 - (1.0 - alpha) * inst.tau2_norm;
    let additive = if additive2 > additive1 {
        Arm::Faster
    } else {
        Arm::HigherQuality
    };

    let rate1 = u1 / (1.0 + inst.tau1_norm);
    let rate2 = inst.u2 / (1.0 + inst.tau2_norm);
    let rate = if rate1 > rate2 {
        Arm::HigherQuality
    } else {
        Arm::Faster
    };

    (additive, rate)
}
