//! Declared privacy spends and the running composition accumulator.
//!
//! A spend records the parameters an analyst *declares* for one round of
//! composition; no data or mechanism outputs ever enter the accountant.
//! Composition state tracks the intrinsic time `v = Σ ε_m²`, the
//! approximation mass `Σ δ_m`, and the round count. Everything here is an
//! immutable value; appending returns a fresh state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which privacy notion a round was declared under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpendKind {
    /// Approximate (ε, δ) differential privacy.
    #[serde(rename = "dp")]
    ApproxDp,
    /// Zero-concentrated differential privacy with parameter ε²/2.
    /// Such rounds must declare δ = 0.
    #[serde(rename = "zcdp")]
    Zcdp,
}

/// One round's declared privacy cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacySpend {
    pub kind: SpendKind,
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacySpend {
    /// Validated constructor; see [`PrivacySpend::validate`] for the rules.
    pub fn new(kind: SpendKind, epsilon: f64, delta: f64) -> Result<Self> {
        let spend = Self {
            kind,
            epsilon,
            delta,
        };
        spend.validate()?;
        Ok(spend)
    }

    pub fn approx_dp(epsilon: f64, delta: f64) -> Result<Self> {
        Self::new(SpendKind::ApproxDp, epsilon, delta)
    }

    pub fn zcdp(epsilon: f64) -> Result<Self> {
        Self::new(SpendKind::Zcdp, epsilon, 0.0)
    }

    /// Checks ε ≥ 0, δ ∈ [0, 1], and that zCDP rounds declare δ = 0.
    ///
    /// ε = 0 spends are legal identities and δ = 1 spends are legal (they
    /// simply exhaust any δ budget at once); the algebra stays total.
    pub fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon < 0.0 {
            return Err(Error::BadEpsilon(self.epsilon));
        }
        if !(self.delta >= 0.0 && self.delta <= 1.0) {
            return Err(Error::BadDelta(self.delta));
        }
        if self.kind == SpendKind::Zcdp && self.delta != 0.0 {
            return Err(Error::ZcdpNonzeroDelta(self.delta));
        }
        Ok(())
    }
}

/// Running accumulators over a composed sequence of spends.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompositionState {
    v: f64,
    delta_sum: f64,
    n: u64,
}

impl CompositionState {
    /// The empty composition: v = 0, Σδ = 0, n = 0.
    pub fn new() -> Self {
        Self::default()
    }

    /// Intrinsic time `Σ ε_m²` of the rounds composed so far.
    pub fn v(&self) -> f64 {
        self.v
    }

    /// Accumulated approximation mass `Σ δ_m`.
    pub fn delta_sum(&self) -> f64 {
        self.delta_sum
    }

    /// Number of composed rounds.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Returns the state extended by one validated spend.
    pub fn append(&self, spend: &PrivacySpend) -> Result<Self> {
        spend.validate()?;
        Ok(Self {
            v: self.v + spend.epsilon * spend.epsilon,
            delta_sum: self.delta_sum + spend.delta,
            n: self.n + 1,
        })
    }

    /// Folds a whole sequence of spends into a state.
    pub fn from_spends<'a, I>(spends: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a PrivacySpend>,
    {
        let mut state = Self::new();
        for spend in spends {
            state = state.append(spend)?;
        }
        Ok(state)
    }
}
