//! The fully adaptive privacy filter and classical composition formulas.
//!
//! The filter admits a candidate round exactly when the threshold function
//!
//! ```text
//! f(v) = √(2·ln(1/δ')·v) + v/2
//! ```
//!
//! evaluated at the *candidate* intrinsic time `v + ε²` stays within the
//! global ε budget, and the accumulated approximation mass stays within δ''.
//! `f` is strictly increasing and concave in `v`; [`y_star`] inverts it at a
//! target ε, giving the largest intrinsic time the budget can ever absorb.
//!
//! Composing a fixed sequence until the filter stops recovers advanced
//! composition up to the lower-order term: `f` carries `ε²/2` per round where
//! advanced composition carries `ε·(e^ε - 1)/(e^ε + 1)`; the gap is at most
//! `ε⁴/12` per round for ε ≤ 1.

use serde::Serialize;

use crate::error::{check_nonnegative, check_open_unit, check_positive, Error, Result};
use crate::spend::{CompositionState, PrivacySpend};

/// Global budget (ε, δ', δ'') defining the stopping rule. The total
/// approximation parameter is δ = δ' + δ'': δ' pays for the martingale
/// confidence band, δ'' for the per-round approximation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterConfig {
    pub epsilon_budget: f64,
    pub delta_prime: f64,
    pub delta_dprime: f64,
}

impl FilterConfig {
    pub fn new(epsilon_budget: f64, delta_prime: f64, delta_dprime: f64) -> Result<Self> {
        let cfg = Self {
            epsilon_budget,
            delta_prime,
            delta_dprime,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("epsilon_budget", self.epsilon_budget)?;
        check_open_unit("delta_prime", self.delta_prime)?;
        check_nonnegative("delta_dprime", self.delta_dprime)
    }

    /// Total approximation parameter δ = δ' + δ''.
    pub fn total_delta(&self) -> f64 {
        self.delta_prime + self.delta_dprime
    }
}

/// A pair of privacy parameters (ε, δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsDelta {
    pub epsilon: f64,
    pub delta: f64,
}

impl EpsDelta {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::BadEpsilon(epsilon));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::BadDelta(delta));
        }
        Ok(Self { epsilon, delta })
    }
}

/// Outcome of one admission decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilterDecision {
    pub admitted: bool,
    /// f evaluated at the candidate intrinsic time `v + ε²`.
    pub projected_epsilon: f64,
    /// δ-sum including the candidate.
    pub projected_delta_sum: f64,
}

/// Threshold `f(v) = √(2·ln(1/δ')·v) + v/2`.
pub fn filter_threshold(v: f64, delta_prime: f64) -> Result<f64> {
    check_open_unit("delta_prime", delta_prime)?;
    check_nonnegative("v", v)?;
    let two_l = 2.0 * (1.0 / delta_prime).ln();
    Ok((two_l * v).sqrt() + 0.5 * v)
}

/// The unique positive root of `filter_threshold(y, δ') = ε`.
///
/// Closed form `(√(2·ln(1/δ') + 2ε) - √(2·ln(1/δ')))²`, evaluated in the
/// cancellation-free arrangement `(2ε / (√(2L + 2ε) + √(2L)))²`.
pub fn y_star(epsilon: f64, delta_prime: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_open_unit("delta_prime", delta_prime)?;
    let two_l = 2.0 * (1.0 / delta_prime).ln();
    let root = 2.0 * epsilon / ((two_l + 2.0 * epsilon).sqrt() + two_l.sqrt());
    Ok(root * root)
}

/// Alternative root with radicand `2·ln(1/δ') + ε` instead of `+ 2ε`.
///
/// This variant satisfies `filter_threshold(y, δ') = ε/2`, not ε (it equals
/// [`y_star`] invoked at half the target); it is kept only so the two
/// conventions can be compared side by side through the CLI diagnostics.
pub fn y_star_alt(epsilon: f64, delta_prime: f64) -> Result<f64> {
    check_positive("epsilon", epsilon)?;
    check_open_unit("delta_prime", delta_prime)?;
    let two_l = 2.0 * (1.0 / delta_prime).ln();
    let root = epsilon / ((two_l + epsilon).sqrt() + two_l.sqrt());
    Ok(root * root)
}

/// Decides whether one more spend fits the budget.
///
/// Admission inspects the parameters *through* the candidate round:
/// `f(v + ε²) ≤ ε_budget` and `Σδ + δ ≤ δ''`. Equality admits; the stop
/// condition is strict.
pub fn filter_admits(
    state: &CompositionState,
    candidate: &PrivacySpend,
    cfg: &FilterConfig,
) -> Result<FilterDecision> {
    candidate.validate()?;
    cfg.validate()?;
    let projected_epsilon = filter_threshold(
        state.v() + candidate.epsilon * candidate.epsilon,
        cfg.delta_prime,
    )?;
    let projected_delta_sum = state.delta_sum() + candidate.delta;
    Ok(FilterDecision {
        admitted: projected_epsilon <= cfg.epsilon_budget
            && projected_delta_sum <= cfg.delta_dprime,
        projected_epsilon,
        projected_delta_sum,
    })
}

/// Number of rounds of a declared sequence the filter admits.
///
/// Folds the spends through successive [`filter_admits`] calls and returns
/// the length of the admitted prefix; the full length means the sequence
/// never triggered the stop.
pub fn stopping_time(spends: &[PrivacySpend], cfg: &FilterConfig) -> Result<u64> {
    cfg.validate()?;
    let mut state = CompositionState::new();
    let mut admitted = 0u64;
    for spend in spends {
        let decision = filter_admits(&state, spend, cfg)?;
        if !decision.admitted {
            break;
        }
        state = state.append(spend)?;
        admitted += 1;
    }
    Ok(admitted)
}

/// Advanced composition for a fixed sequence:
/// `ε = √(2·ln(1/δ')·Σε²) + Σ ε·(e^ε - 1)/(e^ε + 1)`, `δ = δ' + Σδ`.
pub fn advanced_composition(
    epsilons: &[f64],
    deltas: &[f64],
    delta_prime: f64,
) -> Result<EpsDelta> {
    check_open_unit("delta_prime", delta_prime)?;
    if epsilons.len() != deltas.len() {
        return Err(Error::LengthMismatch(epsilons.len(), deltas.len()));
    }
    let mut v = 0.0;
    let mut lower_order = 0.0;
    for &eps in epsilons {
        check_nonnegative("epsilon", eps)?;
        v += eps * eps;
        lower_order += eps * (eps.exp() - 1.0) / (eps.exp() + 1.0);
    }
    let mut delta_sum = 0.0;
    for &d in deltas {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::BadDelta(d));
        }
        delta_sum += d;
    }
    let epsilon = (2.0 * (1.0 / delta_prime).ln() * v).sqrt() + lower_order;
    Ok(EpsDelta {
        epsilon,
        delta: delta_prime + delta_sum,
    })
}

/// Basic composition: parameters add up linearly.
pub fn basic_composition(epsilons: &[f64], deltas: &[f64]) -> Result<EpsDelta> {
    if epsilons.len() != deltas.len() {
        return Err(Error::LengthMismatch(epsilons.len(), deltas.len()));
    }
    for &eps in epsilons {
        check_nonnegative("epsilon", eps)?;
    }
    for &d in deltas {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::BadDelta(d));
        }
    }
    Ok(EpsDelta {
        epsilon: epsilons.iter().sum(),
        delta: deltas.iter().sum(),
    })
}

/// Converts an (ε, δ)-DP guarantee into the (2ε, 2δ/(ε·e^ε))-pDP one.
///
/// The reverse direction is the identity on parameters and needs no
/// operation. Undefined at ε = 0.
pub fn dp_to_pdp(guarantee: &EpsDelta) -> Result<EpsDelta> {
    if guarantee.epsilon == 0.0 {
        return Err(Error::ZeroEpsilonConversion);
    }
    check_positive("epsilon", guarantee.epsilon)?;
    Ok(EpsDelta {
        epsilon: 2.0 * guarantee.epsilon,
        delta: 2.0 * guarantee.delta / (guarantee.epsilon * guarantee.epsilon.exp()),
    })
}
