//! Worst-case privacy-loss samplers and adaptive adversary strategies.
//!
//! Randomized response is the extremal (ε, δ)-DP mechanism on one bit: its
//! privacy loss lands exactly on the support endpoints ±ε, plus a reveal
//! event of mass δ whose loss is +∞. The Gaussian sampler draws the loss of
//! a mechanism meeting the zCDP moment bound with equality,
//! `E e^{λL} = e^{λ(λ+1)ε²/2}`: a normal with mean ε²/2 and variance ε².
//! Testing guards against these two samplers stresses the subGaussian
//! analysis at its extreme points.

use rand::Rng;

use crate::trials::standard_normal;

/// Output alphabet of randomized response. `Top` is the reveal symbol for an
/// input bit of 1, `Bottom` for 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrOutcome {
    Bit0,
    Bit1,
    Top,
    Bottom,
}

/// Privacy loss drawn for one round; +∞ encodes the δ-reveal event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSample(pub f64);

impl LossSample {
    pub fn is_reveal(&self) -> bool {
        self.0.is_infinite()
    }
}

/// One draw of (ε, δ)-randomized response on `bit`.
///
/// Outputs the bit w.p. (1-δ)·e^ε/(1+e^ε), the flipped bit w.p.
/// (1-δ)/(1+e^ε), and the reveal symbol (⊤ for 1, ⊥ for 0) w.p. δ.
pub fn rr_sample<R: Rng>(bit: bool, eps: f64, delta: f64, rng: &mut R) -> RrOutcome {
    debug_assert!(eps >= 0.0 && (0.0..=1.0).contains(&delta));
    let u: f64 = rng.random();
    if u < delta {
        return if bit { RrOutcome::Top } else { RrOutcome::Bottom };
    }
    let p_keep = eps.exp() / (1.0 + eps.exp());
    let keep = u < delta + (1.0 - delta) * p_keep;
    match (bit, keep) {
        (false, true) | (true, false) => RrOutcome::Bit0,
        (false, false) | (true, true) => RrOutcome::Bit1,
    }
}

/// Privacy loss of one randomized-response round between the two inputs:
/// +ε w.p. (1-δ)·e^ε/(1+e^ε), -ε w.p. (1-δ)/(1+e^ε), +∞ w.p. δ.
pub fn rr_loss_sample<R: Rng>(eps: f64, delta: f64, rng: &mut R) -> LossSample {
    debug_assert!(eps >= 0.0 && (0.0..=1.0).contains(&delta));
    let u: f64 = rng.random();
    if u < delta {
        return LossSample(f64::INFINITY);
    }
    let p_agree = eps.exp() / (1.0 + eps.exp());
    if u < delta + (1.0 - delta) * p_agree {
        LossSample(eps)
    } else {
        LossSample(-eps)
    }
}

/// Privacy loss of a mechanism meeting the zCDP moment bound with equality:
/// a draw from N(ε²/2, ε²).
pub fn gaussian_loss_sample<R: Rng>(eps: f64, rng: &mut R) -> LossSample {
    debug_assert!(eps >= 0.0);
    LossSample(eps * eps / 2.0 + eps * standard_normal(rng))
}

/// Mean of the pure randomized-response loss: `ε·(e^ε - 1)/(e^ε + 1)`,
/// written here as `ε·tanh(ε/2)`. Always at most `ε²/2`.
pub fn rr_loss_mean(eps: f64) -> f64 {
    eps * (eps / 2.0).tanh()
}

/// Moment generating function of the pure (δ = 0) randomized-response loss:
/// `(e^ε·e^{λε} + e^{-λε}) / (1 + e^ε)`.
pub fn rr_loss_mgf(eps: f64, lambda: f64) -> f64 {
    (eps.exp() * (lambda * eps).exp() + (-lambda * eps).exp()) / (1.0 + eps.exp())
}

/// Moment generating function of the Gaussian loss: `e^{λε²/2 + λ²ε²/2}`.
pub fn gaussian_loss_mgf(eps: f64, lambda: f64) -> f64 {
    (lambda * eps * eps / 2.0 + lambda * lambda * eps * eps / 2.0).exp()
}

/// The zCDP moment envelope `e^{λ(λ+1)ε²/2}` both samplers are held to.
pub fn zcdp_mgf_bound(eps: f64, lambda: f64) -> f64 {
    (0.5 * lambda * (lambda + 1.0) * eps * eps).exp()
}

/// How the simulated analyst picks the next ε from past observations only.
#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryStrategy {
    /// The same ε every round.
    Constant(f64),
    /// A declared schedule; the last entry repeats once exhausted.
    FrontLoaded(Vec<f64>),
    /// ε_high while the running loss is positive, ε_low otherwise.
    SignAdaptive { eps_low: f64, eps_high: f64 },
}

impl AdversaryStrategy {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::check_positive;
        match self {
            AdversaryStrategy::Constant(eps) => check_positive("eps", *eps),
            AdversaryStrategy::FrontLoaded(list) => {
                if list.is_empty() {
                    return Err(crate::error::Error::BadParameter {
                        name: "eps_list",
                        constraint: "nonempty",
                        value: 0.0,
                    });
                }
                for &e in list {
                    check_positive("eps_list entry", e)?;
                }
                Ok(())
            }
            AdversaryStrategy::SignAdaptive { eps_low, eps_high } => {
                check_positive("eps_low", *eps_low)?;
                check_positive("eps_high", *eps_high)
            }
        }
    }

    /// ε for round `round` (0-based) given the loss accumulated over the
    /// previous rounds. Predictable by construction: the round's own draw is
    /// never an input.
    pub fn next_epsilon(&self, running_loss: f64, round: usize) -> f64 {
        match self {
            AdversaryStrategy::Constant(eps) => *eps,
            AdversaryStrategy::FrontLoaded(list) => list[round.min(list.len() - 1)],
            AdversaryStrategy::SignAdaptive { eps_low, eps_high } => {
                if running_loss > 0.0 {
                    *eps_high
                } else {
                    *eps_low
                }
            }
        }
    }

    /// True when the ε sequence never depends on observed losses, so the
    /// intrinsic-time path is the same for every trial.
    pub fn is_state_free(&self) -> bool {
        !matches!(self, AdversaryStrategy::SignAdaptive { .. })
    }
}

/// Convenience alias used by experiment code paths.
pub fn next_epsilon(strategy: &AdversaryStrategy, running_loss: f64, round: usize) -> f64 {
    strategy.next_epsilon(running_loss, round)
}
