//! Privacy odometers: time-uniform upper bounds on accumulated privacy loss,
//! evaluated as functions of the intrinsic time `v = Σ ε_m²`.
//!
//! Four families are provided. Writing `L' = ln(1/δ')`:
//!
//! ```text
//! filter     √(2·y*·L')/2 + (√(2L')/(2√y*))·v + v/2     (tangent line, tight at v = y*)
//! mixture    √(2(v+ρ)·ln((1/δ')·√((v+ρ)/ρ))) + v/2
//! stitched   1.7·√(v·(ln ln(2v/v0) + 0.72·ln(5.2/δ'))) + v/2,   +∞ below v0
//! rogers     dataset-size dependent two-branch bound (see below)
//! ```
//!
//! All are valid simultaneously over rounds with probability ≥ 1 - (δ' + δ'')
//! provided the value is read as +∞ once the round index passes the δ''-stop
//! [`n_delta_stop`]. The rogers family reproduces the earlier odometer built
//! from self-normalized concentration; it needs the dataset size `|x|` and is
//! dominated by the other families at every scale of `v` we plot.
//!
//! Logs are natural throughout, except the explicit `log₂(|x|)` inside the
//! rogers ln-ln factor.

use serde::{Serialize, Serializer};

use crate::boundaries::{mixture_bound, stitched_bound};
use crate::error::{check_nonnegative, check_open_unit, check_positive, Error, Result};
use crate::filter::y_star;

/// Odometer family with its tuning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdometerFamily {
    /// Tangent-line odometer optimized for a target ε.
    Filter { epsilon_target: f64 },
    /// Method-of-mixtures boundary with mixing scale ρ.
    Mixture { rho: f64 },
    /// Stitched (iterated-logarithm) boundary, nontrivial from v0 on.
    Stitched { v0: f64 },
    /// Original dataset-size-dependent odometer.
    Rogers { dataset_size: u64 },
}

/// One odometer family together with the confidence split (δ', δ'').
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometerSpec {
    pub family: OdometerFamily,
    pub delta_prime: f64,
    pub delta_dprime: f64,
}

impl OdometerSpec {
    pub fn new(family: OdometerFamily, delta_prime: f64, delta_dprime: f64) -> Result<Self> {
        let spec = Self {
            family,
            delta_prime,
            delta_dprime,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("delta_prime", self.delta_prime)?;
        check_nonnegative("delta_dprime", self.delta_dprime)?;
        match self.family {
            OdometerFamily::Filter { epsilon_target } => {
                check_positive("epsilon_target", epsilon_target)
            }
            OdometerFamily::Mixture { rho } => check_positive("rho", rho),
            OdometerFamily::Stitched { v0 } => check_positive("v0", v0),
            OdometerFamily::Rogers { dataset_size } => {
                if dataset_size < 3 {
                    return Err(Error::BadParameter {
                        name: "dataset_size",
                        constraint: "at least 3",
                        value: dataset_size as f64,
                    });
                }
                if self.delta_prime > (-1.0f64).exp() {
                    return Err(Error::BadParameter {
                        name: "delta_prime",
                        constraint: "at most 1/e for the rogers family",
                        value: self.delta_prime,
                    });
                }
                Ok(())
            }
        }
    }

    /// Odometer value at intrinsic time `v`, before any δ''-gating.
    ///
    /// Total over v ≥ 0: the stitched family returns a trivialized value
    /// below its starting time rather than an error.
    pub fn evaluate(&self, v: f64) -> Result<OdometerValue> {
        self.validate()?;
        check_nonnegative("v", v)?;
        let dp = self.delta_prime;
        let value = match self.family {
            OdometerFamily::Filter { epsilon_target } => {
                let ys = y_star(epsilon_target, dp)?;
                let log_term = (1.0 / dp).ln();
                (2.0 * ys * log_term).sqrt() / 2.0
                    + (2.0 * log_term).sqrt() / (2.0 * ys.sqrt()) * v
                    + 0.5 * v
            }
            OdometerFamily::Mixture { rho } => mixture_bound(v, rho, dp)? + 0.5 * v,
            OdometerFamily::Stitched { v0 } => match stitched_bound(v, v0, dp) {
                Ok(b) => b + 0.5 * v,
                Err(Error::BelowStartingTime { .. }) => return Ok(OdometerValue::trivial()),
                Err(e) => return Err(e),
            },
            OdometerFamily::Rogers { dataset_size } => {
                let size = dataset_size as f64;
                let inv_sq = 1.0 / (size * size);
                if (inv_sq..=1.0).contains(&v) {
                    let inner = (110.0 * std::f64::consts::E).ln() + 2.0 * (size.ln() / dp).ln();
                    (2.0 * v * inner).sqrt() + 0.5 * v
                } else {
                    let scale = 2.0 * (inv_sq + v) * (1.0 + 0.5 * (1.0 + size * size * v).ln());
                    let loglog = ((4.0 / dp) * size.log2()).ln().ln();
                    (scale * loglog).sqrt() + 0.5 * v
                }
            }
        };
        Ok(OdometerValue::finite(value))
    }
}

/// An odometer reading: a finite bound, or +∞ once trivialized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometerValue {
    value: f64,
    trivialized: bool,
}

impl OdometerValue {
    pub fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite());
        Self {
            value,
            trivialized: false,
        }
    }

    pub fn trivial() -> Self {
        Self {
            value: f64::INFINITY,
            trivialized: true,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn is_trivialized(&self) -> bool {
        self.trivialized
    }

    /// Rendering used by the CSV and JSON surfaces: "inf" when trivialized.
    pub fn render(&self, significant_digits: usize) -> String {
        if self.trivialized {
            "inf".to_owned()
        } else {
            format!("{:.*e}", significant_digits.saturating_sub(1), self.value)
        }
    }
}

impl Serialize for OdometerValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.trivialized {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.value)
        }
    }
}

/// Largest round count the δ'' budget allows: the first `n` with
/// `Σ_{m ≤ n+1} δ_m > δ''`, or the sequence length if the sum never breaches.
/// Odometer values at rounds beyond this index must be read as +∞.
pub fn n_delta_stop(deltas: &[f64], delta_dprime: f64) -> usize {
    let mut running = 0.0;
    for (i, d) in deltas.iter().enumerate() {
        running += d;
        if running > delta_dprime {
            return i;
        }
    }
    deltas.len()
}

/// Evaluates one odometer over an ascending grid of intrinsic times.
pub fn curve(spec: &OdometerSpec, v_grid: &[f64]) -> Result<Vec<(f64, OdometerValue)>> {
    for pair in v_grid.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::BadParameter {
                name: "v_grid",
                constraint: "sorted ascending",
                value: pair[1],
            });
        }
    }
    v_grid
        .iter()
        .map(|&v| Ok((v, spec.evaluate(v)?)))
        .collect()
}
