//! Time-uniform concentration boundaries for martingales with subGaussian
//! increments, as pure functions of intrinsic time `v = Σ σ_m²`.
//!
//! Four boundary shapes are provided, each valid simultaneously over all of
//! time with the stated crossing probability:
//!
//! ```text
//! line-crossing   M_n ≥ b/2 + (b/2a)·v          w.p. ≤ exp(-b²/2a)
//! mixture         M_n ≥ √(2(v+ρ)·ln((1/δ)·√((v+ρ)/ρ)))   w.p. ≤ δ
//! stitched        M_n ≥ 1.7·√(v·(ln ln(2v/v0) + 0.72·ln(5.2/δ))),  v ≥ v0   w.p. ≤ δ
//! ville           X_n ≥ E[X_0]/δ   for nonnegative supermartingales, w.p. ≤ δ
//! ```
//!
//! All logarithms are natural. The line-crossing boundary is a straight line
//! in `v`, tight at one chosen point; mixture and stitched curve like
//! `√(v ln v)` and `√(v ln ln v)` respectively, trading pointwise tightness
//! for uniform control. [`mc_validate_boundary`] empirically certifies any of
//! them against simulated Gaussian martingale paths.

use crate::error::{check_nonnegative, check_open_unit, check_positive, Error, Result};
use crate::montecarlo::CoverageReport;
use crate::trials;

/// Parameters of the line-crossing boundary; both must be positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineCrossingParams {
    pub a: f64,
    pub b: f64,
}

impl LineCrossingParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        check_positive("a", a)?;
        check_positive("b", b)?;
        Ok(Self { a, b })
    }

    /// Parameters optimized for intrinsic time `anchor`: the crossing
    /// probability comes out exactly `delta` and the line is tight there.
    pub fn optimized_for(anchor: f64, delta: f64) -> Result<Self> {
        check_positive("anchor", anchor)?;
        check_open_unit("delta", delta)?;
        Self::new(anchor, (2.0 * (1.0 / delta).ln() * anchor).sqrt())
    }

    pub fn bound(&self, v: f64) -> Result<f64> {
        line_crossing_bound(v, self.a, self.b)
    }

    pub fn crossing_probability(&self) -> f64 {
        (-self.b * self.b / (2.0 * self.a)).exp()
    }
}

impl From<LineCrossingParams> for BoundaryKind {
    fn from(p: LineCrossingParams) -> Self {
        BoundaryKind::LineCrossing { a: p.a, b: p.b }
    }
}

/// Line `b/2 + (b/2a)·v`, tight at intrinsic time `v = a` where it equals `b`.
pub fn line_crossing_bound(v: f64, a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_nonnegative("v", v)?;
    Ok(b / 2.0 + b / (2.0 * a) * v)
}

/// Probability that a path ever crosses the line with parameters `(a, b)`:
/// `exp(-b²/2a)`.
pub fn crossing_probability(a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Ok((-b * b / (2.0 * a)).exp())
}

/// Mixture boundary `√(2(v+ρ)·ln((1/δ)·√((v+ρ)/ρ)))`.
pub fn mixture_bound(v: f64, rho: f64, delta: f64) -> Result<f64> {
    check_positive("rho", rho)?;
    check_open_unit("delta", delta)?;
    check_nonnegative("v", v)?;
    let t = v + rho;
    Ok((2.0 * t * ((1.0 / delta) * (t / rho).sqrt()).ln()).sqrt())
}

/// Stitched boundary `1.7·√(v·(ln ln(2v/v0) + 0.72·ln(5.2/δ)))`.
///
/// Only defined for `v ≥ v0`; below that the boundary is trivial and this
/// returns a domain error which the odometer layer maps to +∞.
pub fn stitched_bound(v: f64, v0: f64, delta: f64) -> Result<f64> {
    check_positive("v0", v0)?;
    check_open_unit("delta", delta)?;
    check_nonnegative("v", v)?;
    if v < v0 {
        return Err(Error::BelowStartingTime { v, v0 });
    }
    let inner = (2.0 * v / v0).ln().ln() + 0.72 * (5.2 / delta).ln();
    // For v >= v0 and delta <= 1 the inner sum is at least ln ln 2 + 0.72 ln 5.2 > 0.
    debug_assert!(inner > 0.8);
    Ok(1.7 * (v * inner).sqrt())
}

/// Ville threshold for a nonnegative supermartingale: `E[X_0] / δ`.
pub fn ville_threshold(initial_mean: f64, delta: f64) -> Result<f64> {
    check_positive("initial_mean", initial_mean)?;
    check_open_unit("delta", delta)?;
    Ok(initial_mean / delta)
}

/// One of the four boundary families, carrying its tuning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    LineCrossing { a: f64, b: f64 },
    Mixture { rho: f64 },
    Stitched { v0: f64 },
    Ville { initial_mean: f64 },
}

impl BoundaryKind {
    pub fn validate(&self, delta: f64) -> Result<()> {
        match *self {
            BoundaryKind::LineCrossing { a, b } => {
                check_positive("a", a)?;
                check_positive("b", b)
            }
            BoundaryKind::Mixture { rho } => {
                check_positive("rho", rho)?;
                check_open_unit("delta", delta)
            }
            BoundaryKind::Stitched { v0 } => {
                check_positive("v0", v0)?;
                check_open_unit("delta", delta)
            }
            BoundaryKind::Ville { initial_mean } => {
                check_positive("initial_mean", initial_mean)?;
                check_open_unit("delta", delta)
            }
        }
    }

    /// Boundary for a centered martingale path at intrinsic time `v`.
    ///
    /// The stitched boundary is +∞ below `v0`. The Ville row rephrases the
    /// threshold on the exponential supermartingale `X_n = E[X_0]·e^{M_n - v/2}`
    /// in martingale coordinates: `X_n ≥ E[X_0]/δ  ⟺  M_n ≥ v/2 + ln(1/δ)`
    /// (the initial mean cancels).
    pub fn martingale_bound(&self, v: f64, delta: f64) -> f64 {
        match *self {
            BoundaryKind::LineCrossing { a, b } => b / 2.0 + b / (2.0 * a) * v,
            BoundaryKind::Mixture { rho } => {
                let t = v + rho;
                (2.0 * t * ((1.0 / delta) * (t / rho).sqrt()).ln()).sqrt()
            }
            BoundaryKind::Stitched { v0 } => {
                if v < v0 {
                    f64::INFINITY
                } else {
                    let inner = (2.0 * v / v0).ln().ln() + 0.72 * (5.2 / delta).ln();
                    1.7 * (v * inner).sqrt()
                }
            }
            BoundaryKind::Ville { .. } => v / 2.0 + (1.0 / delta).ln(),
        }
    }

    /// Crossing probability the theory guarantees for this boundary at
    /// confidence `delta`. Line-crossing carries its own level `exp(-b²/2a)`;
    /// the others are `delta` itself.
    pub fn nominal_delta(&self, delta: f64) -> f64 {
        match *self {
            BoundaryKind::LineCrossing { a, b } => (-b * b / (2.0 * a)).exp(),
            _ => delta,
        }
    }
}

/// Simulates independent zero-mean Gaussian martingale paths (increment
/// standard deviation `increment_sigma`, so `V_n = n·σ²`) and counts paths
/// that ever exceed the boundary within `horizon` steps.
///
/// Each trial derives its generator from `(seed, trial_index)`, and the
/// violation count is commutative, so the report is identical for any
/// `threads` value. The finite horizon lower-bounds the infinite-horizon
/// crossing rate; callers assert only the upper side.
pub fn mc_validate_boundary(
    kind: &BoundaryKind,
    delta: f64,
    increment_sigma: f64,
    horizon: u64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> Result<CoverageReport> {
    kind.validate(delta)?;
    check_positive("increment_sigma", increment_sigma)?;
    if trials == 0 {
        return Err(Error::BadParameter {
            name: "trials",
            constraint: "at least 1",
            value: 0.0,
        });
    }

    // V_n = n·σ² is deterministic here, so the boundary can be tabulated once.
    let sigma2 = increment_sigma * increment_sigma;
    let bounds: Vec<f64> = (1..=horizon)
        .map(|n| kind.martingale_bound(n as f64 * sigma2, delta))
        .collect();

    let crossed = trials::map_trials(trials, threads, |trial| {
        let mut rng = trials::rng_for_trial(seed, trial);
        let mut path = 0.0f64;
        for bound in &bounds {
            path += increment_sigma * trials::standard_normal(&mut rng);
            if path >= *bound {
                return true;
            }
        }
        false
    });

    let violations = crossed.iter().filter(|&&c| c).count() as u64;
    Ok(CoverageReport::from_counts(trials, violations, horizon, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_crossing_examples() {
        assert_eq!(line_crossing_bound(1.0, 1.0, 2.0).unwrap(), 2.0);
        assert_eq!(line_crossing_bound(0.0, 5.0, 3.0).unwrap(), 1.5);
        // at v = a the line equals b exactly: b/2 + b/2
        let a = 0.034_937_809_538_246_67_f64;
        let b = (2.0 * (1e6_f64).ln() * a).sqrt();
        let at_anchor = line_crossing_bound(a, a, b).unwrap();
        assert!((at_anchor - b).abs() < 1e-15);
        assert!((at_anchor - 0.982_531_095_230_875_3).abs() < 1e-12);
        assert!(line_crossing_bound(1.0, 0.0, 1.0).is_err());
        assert!(line_crossing_bound(1.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn optimized_params_are_tight_at_their_anchor() {
        let p = LineCrossingParams::optimized_for(1.0, 0.05).unwrap();
        assert!((p.crossing_probability() - 0.05).abs() < 1e-13);
        assert!((p.bound(1.0).unwrap() - p.b).abs() < 1e-13);
        assert!(LineCrossingParams::new(0.0, 1.0).is_err());
        assert!(LineCrossingParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn crossing_probability_examples() {
        assert!((crossing_probability(2.0, 2.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((crossing_probability(1.0, 3.0).unwrap() - (-4.5f64).exp()).abs() < 1e-15);
        assert!(
            (crossing_probability(1.0, 3.0).unwrap() - 0.011_108_996_538_242_306).abs() < 1e-12
        );
    }

    #[test]
    fn crossing_probability_cancels_to_delta() {
        // b = √(2 ln(1/δ)·y) makes the crossing probability exactly δ, any y.
        for &y in &[1e-4, 0.034938, 0.5, 1.0, 7.3, 120.0] {
            for &delta in &[1e-9, 1e-6, 1e-3, 0.05, 0.5, 0.99] {
                let b = (2.0 * (1.0f64 / delta).ln() * y).sqrt();
                let p = crossing_probability(y, b).unwrap();
                assert!(
                    (p - delta).abs() <= 1e-12 * delta.max(1e-12),
                    "y={y} delta={delta} p={p}"
                );
            }
        }
    }

    #[test]
    fn mixture_examples() {
        let m0 = mixture_bound(0.0, 0.01, 1e-6).unwrap();
        assert!((m0 - 0.525_652_176_975_693_2).abs() < 1e-12);
        let m1 = mixture_bound(1.0, 0.01, 1e-6).unwrap();
        assert!((m1 - 5.706_890_839_073_19).abs() < 1e-11);
        let m2 = mixture_bound(0.0, 1.0, (-1.0f64).exp()).unwrap();
        assert!((m2 - 2.0f64.sqrt()).abs() < 1e-14);
        assert!(mixture_bound(1.0, 0.0, 0.05).is_err());
        assert!(mixture_bound(1.0, 0.01, 1.0).is_err());
    }

    #[test]
    fn mixture_boundary_solves_its_own_equation() {
        // cross-check by bisection: the returned b satisfies
        // b = sqrt(2(v+rho) ln((1/δ) sqrt((v+rho)/rho))) viewed as the unique
        // root of g(b) = b² - 2(v+rho)·ln((1/δ)·sqrt((v+rho)/rho)) = 0, b > 0.
        let (v, rho, delta) = (1.0, 0.01, 1e-6);
        let target = mixture_bound(v, rho, delta).unwrap();
        let g = |b: f64| b * b - 2.0 * (v + rho) * ((1.0 / delta) * ((v + rho) / rho).sqrt()).ln();
        let (mut lo, mut hi) = (0.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - target).abs() < 1e-9);
    }

    #[test]
    fn stitched_examples() {
        let s1 = stitched_bound(1.0, 0.005, 1e-6).unwrap();
        assert!((s1 - 6.111_621_219_693_448).abs() < 1e-11);
        let s0 = stitched_bound(0.005, 0.005, 1e-6).unwrap();
        assert!((s0 - 0.394_452_917_955_066_4).abs() < 1e-12);
        assert_eq!(
            stitched_bound(0.001, 0.005, 0.05).unwrap_err(),
            Error::BelowStartingTime { v: 0.001, v0: 0.005 }
        );
    }

    #[test]
    fn stitched_inner_sum_stays_positive() {
        // ln ln 2 + 0.72 ln 5.2 ≈ 0.8205 is the worst case over v ≥ v0, δ ≤ 1.
        let floor = (2.0f64.ln()).ln() + 0.72 * 5.2f64.ln();
        assert!(floor > 0.8);
        for i in 0..1000 {
            let v = 0.005 * (1.0 + i as f64);
            let delta = 0.999_999_f64;
            let inner = (2.0 * v / 0.005f64).ln().ln() + 0.72 * (5.2 / delta).ln();
            assert!(inner >= floor - 1e-12);
        }
    }

    #[test]
    fn ville_examples() {
        assert_eq!(ville_threshold(1.0, 0.05).unwrap(), 20.0);
        assert_eq!(ville_threshold(1.0, 1e-6).unwrap(), 1e6);
        assert_eq!(ville_threshold(2.5, 0.1).unwrap(), 25.0);
        assert!(ville_threshold(1.0, 0.0).is_err());
        assert!(ville_threshold(-1.0, 0.1).is_err());
    }

    #[test]
    fn bounds_increase_strictly_in_v() {
        let mut prev_line = f64::NEG_INFINITY;
        let mut prev_mix = f64::NEG_INFINITY;
        let mut prev_sti = f64::NEG_INFINITY;
        for i in 0..=1200 {
            let v = 0.005 + 0.05 * i as f64;
            let line = line_crossing_bound(v, 1.0, 2.0).unwrap();
            let mix = mixture_bound(v, 0.01, 1e-6).unwrap();
            let sti = stitched_bound(v, 0.005, 1e-6).unwrap();
            assert!(line > prev_line && mix > prev_mix && sti > prev_sti, "v={v}");
            prev_line = line;
            prev_mix = mix;
            prev_sti = sti;
        }
    }

    #[test]
    fn mixture_decreasing_in_delta_continuous_in_rho() {
        let mut prev = f64::INFINITY;
        for &delta in &[0.01, 0.05, 0.1, 0.3, 0.6, 0.9] {
            let m = mixture_bound(1.0, 0.01, delta).unwrap();
            assert!(m < prev);
            prev = m;
        }
        // small rho perturbations move the bound by O(perturbation)
        let base = mixture_bound(1.0, 0.01, 0.05).unwrap();
        let nudged = mixture_bound(1.0, 0.01 + 1e-9, 0.05).unwrap();
        assert!((base - nudged).abs() < 1e-6);
    }

    #[test]
    fn empty_path_never_crosses() {
        let kind = BoundaryKind::Mixture { rho: 0.01 };
        let report = mc_validate_boundary(&kind, 0.05, 0.1, 0, 1, 7, 1).unwrap();
        assert_eq!(report.violations, 0);
        assert_eq!(report.rate, 0.0);
    }
}
