//! End-to-end coverage experiments: simulate adaptive composition under an
//! adversary strategy and a worst-case mechanism, and measure how often the
//! realized loss process escapes a filter's ε budget or an odometer's bound.
//!
//! The guarantees under test are high-probability statements at level
//! δ' + δ''; experiments therefore count violating *paths* and report the
//! empirical rate with an exact binomial upper confidence bound. Trials are
//! independent work units with per-trial generators, so reports do not
//! depend on the thread count. A finite horizon truncates the quantified
//! "over all n": the reported rate lower-bounds the infinite-horizon rate,
//! which is the right direction for asserting the upper side.

use serde::Serialize;

use crate::error::{check_nonnegative, Error, Result};
use crate::filter::{filter_admits, FilterConfig};
use crate::mechanism::{gaussian_loss_sample, rr_loss_sample, AdversaryStrategy};
use crate::odometer::OdometerSpec;
use crate::spend::{CompositionState, PrivacySpend};
use crate::stats::binomial_upper_bound;
use crate::trials;

/// Which loss sampler drives the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// Randomized response: losses on the support endpoints ±ε, reveals w.p. δ.
    RandomizedResponse,
    /// Gaussian loss meeting the zCDP moment bound with equality.
    Gaussian,
}

/// What the simulated analyst is held to.
#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// Stop at the filter's rejection; the loss must stay within ε budget.
    Filter(FilterConfig),
    /// Never stop; the loss must stay under the odometer at every round.
    Odometer(OdometerSpec),
}

impl Guard {
    pub fn delta_prime(&self) -> f64 {
        match self {
            Guard::Filter(cfg) => cfg.delta_prime,
            Guard::Odometer(spec) => spec.delta_prime,
        }
    }

    pub fn delta_dprime(&self) -> f64 {
        match self {
            Guard::Filter(cfg) => cfg.delta_dprime,
            Guard::Odometer(spec) => spec.delta_dprime,
        }
    }
}

/// Full description of one coverage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub strategy: AdversaryStrategy,
    pub mechanism: Mechanism,
    pub guard: Guard,
    /// Maximum rounds per trial.
    pub horizon: u64,
    /// Stop a trial once intrinsic time reaches this value (∞ disables).
    pub v_cap: f64,
    pub trials: u64,
    pub seed: u64,
    /// Declared δ for every round (the reveal mass under randomized response).
    pub delta_per_round: f64,
    /// Negative control: halve the guard's boundary so the harness must flag it.
    pub stress: bool,
    pub threads: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.strategy.validate()?;
        match &self.guard {
            Guard::Filter(cfg) => cfg.validate()?,
            Guard::Odometer(spec) => spec.validate()?,
        }
        if self.horizon == 0 {
            return Err(Error::BadParameter {
                name: "horizon",
                constraint: "at least 1",
                value: 0.0,
            });
        }
        if self.trials == 0 {
            return Err(Error::BadParameter {
                name: "trials",
                constraint: "at least 1",
                value: 0.0,
            });
        }
        if !(0.0..1.0).contains(&self.delta_per_round) {
            return Err(Error::BadParameter {
                name: "delta_per_round",
                constraint: "in [0, 1)",
                value: self.delta_per_round,
            });
        }
        if self.mechanism == Mechanism::Gaussian && self.delta_per_round > 0.0 {
            // zCDP rounds declare delta = 0; there is no reveal event to fund.
            return Err(Error::ZcdpNonzeroDelta(self.delta_per_round));
        }
        if self.v_cap.is_nan() || self.v_cap <= 0.0 {
            return Err(Error::BadParameter {
                name: "v_cap",
                constraint: "positive (use infinity to disable)",
                value: self.v_cap,
            });
        }
        Ok(())
    }

    fn spend(&self, eps: f64) -> Result<PrivacySpend> {
        match self.mechanism {
            Mechanism::RandomizedResponse => PrivacySpend::approx_dp(eps, self.delta_per_round),
            Mechanism::Gaussian => PrivacySpend::zcdp(eps),
        }
    }
}

/// Monte-Carlo coverage result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageReport {
    pub trials: u64,
    pub violations: u64,
    pub rate: f64,
    /// One-sided exact (Clopper-Pearson) 99.7% upper confidence bound.
    pub upper_cb: f64,
    pub horizon: u64,
    pub seed: u64,
}

impl CoverageReport {
    pub fn from_counts(trials: u64, violations: u64, horizon: u64, seed: u64) -> Self {
        let rate = violations as f64 / trials as f64;
        Self {
            trials,
            violations,
            rate,
            upper_cb: binomial_upper_bound(violations, trials, 0.997),
            horizon,
            seed,
        }
    }

    /// The acceptance threshold δ + 3·√(δ(1-δ)/trials) for a target level δ.
    pub fn coverage_threshold(delta: f64, trials: u64) -> f64 {
        delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
    }
}

/// A coverage report plus the count of paths whose loss went infinite
/// (δ-reveal) while the guard was still active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOutcome {
    pub report: CoverageReport,
    pub reveal_paths: u64,
}

#[derive(Clone, Copy, Default)]
struct TrialFlags {
    violated: bool,
    revealed: bool,
}

fn sample_loss<R: rand::Rng>(mechanism: Mechanism, eps: f64, delta: f64, rng: &mut R) -> f64 {
    match mechanism {
        Mechanism::RandomizedResponse => rr_loss_sample(eps, delta, rng).0,
        Mechanism::Gaussian => gaussian_loss_sample(eps, rng).0,
    }
}

/// Coverage of the filter's DP claim: per trial, rounds are admitted through
/// the filter until rejection (realizing the stopping time); the path
/// violates if its running loss ever exceeds the ε budget while admitted.
/// Infinite losses count as violations.
pub fn run_filter_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let filter_cfg = match &cfg.guard {
        Guard::Filter(c) => *c,
        Guard::Odometer(_) => {
            return Err(Error::BadParameter {
                name: "guard",
                constraint: "a filter guard",
                value: f64::NAN,
            })
        }
    };
    let ceiling = if cfg.stress {
        filter_cfg.epsilon_budget / 2.0
    } else {
        filter_cfg.epsilon_budget
    };

    let flags = trials::map_trials(cfg.trials, cfg.threads, |trial| {
        let mut rng = trials::rng_for_trial(cfg.seed, trial);
        let mut state = CompositionState::new();
        let mut loss = 0.0f64;
        let mut out = TrialFlags::default();
        for round in 0..cfg.horizon {
            if state.v() >= cfg.v_cap {
                break;
            }
            let eps = cfg.strategy.next_epsilon(loss, round as usize);
            let spend = cfg.spend(eps).expect("validated config");
            let decision =
                filter_admits(&state, &spend, &filter_cfg).expect("validated config");
            if !decision.admitted {
                break;
            }
            let l = sample_loss(cfg.mechanism, eps, cfg.delta_per_round, &mut rng);
            if l.is_infinite() {
                out.revealed = true;
            }
            loss += l;
            state = state.append(&spend).expect("validated spend");
            if loss > ceiling {
                out.violated = true;
                break;
            }
        }
        out
    });

    let violations = flags.iter().filter(|f| f.violated).count() as u64;
    let reveal_paths = flags.iter().filter(|f| f.revealed).count() as u64;
    Ok(ExperimentOutcome {
        report: CoverageReport::from_counts(cfg.trials, violations, cfg.horizon, cfg.seed),
        reveal_paths,
    })
}

/// Time-uniform coverage of an odometer: the path violates if its running
/// loss ever exceeds the odometer value at the round's intrinsic time.
/// Trivialized values (past the δ''-stop, or stitched below v0) are never
/// violated.
pub fn run_odometer_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let spec = match &cfg.guard {
        Guard::Odometer(s) => *s,
        Guard::Filter(_) => {
            return Err(Error::BadParameter {
                name: "guard",
                constraint: "an odometer guard",
                value: f64::NAN,
            })
        }
    };
    let stress_factor = if cfg.stress { 0.5 } else { 1.0 };

    // The odometer is a function of the declared parameters only, so for
    // state-free strategies the whole bound sequence is shared by all trials.
    let precomputed: Option<Vec<(f64, f64)>> = if cfg.strategy.is_state_free() {
        let mut rows = Vec::new();
        let mut v = 0.0f64;
        let mut delta_sum = 0.0f64;
        for round in 0..cfg.horizon {
            if v >= cfg.v_cap {
                break;
            }
            let eps = cfg.strategy.next_epsilon(0.0, round as usize);
            v += eps * eps;
            delta_sum += cfg.delta_per_round;
            let bound = if delta_sum > spec.delta_dprime {
                f64::INFINITY
            } else {
                spec.evaluate(v)?.value() * stress_factor
            };
            rows.push((eps, bound));
        }
        Some(rows)
    } else {
        None
    };

    let flags = trials::map_trials(cfg.trials, cfg.threads, |trial| {
        let mut rng = trials::rng_for_trial(cfg.seed, trial);
        let mut out = TrialFlags::default();
        match &precomputed {
            Some(rows) => {
                let mut loss = 0.0f64;
                for &(eps, bound) in rows {
                    let l = sample_loss(cfg.mechanism, eps, cfg.delta_per_round, &mut rng);
                    if l.is_infinite() {
                        out.revealed = true;
                    }
                    loss += l;
                    if loss > bound {
                        out.violated = true;
                        break;
                    }
                }
            }
            None => {
                let mut loss = 0.0f64;
                let mut v = 0.0f64;
                let mut delta_sum = 0.0f64;
                for round in 0..cfg.horizon {
                    if v >= cfg.v_cap {
                        break;
                    }
                    let eps = cfg.strategy.next_epsilon(loss, round as usize);
                    v += eps * eps;
                    delta_sum += cfg.delta_per_round;
                    let bound = if delta_sum > spec.delta_dprime {
                        f64::INFINITY
                    } else {
                        spec.evaluate(v).expect("validated spec").value() * stress_factor
                    };
                    let l = sample_loss(cfg.mechanism, eps, cfg.delta_per_round, &mut rng);
                    if l.is_infinite() {
                        out.revealed = true;
                    }
                    loss += l;
                    if loss > bound {
                        out.violated = true;
                        break;
                    }
                }
            }
        }
        out
    });

    let violations = flags.iter().filter(|f| f.violated).count() as u64;
    let reveal_paths = flags.iter().filter(|f| f.revealed).count() as u64;
    Ok(ExperimentOutcome {
        report: CoverageReport::from_counts(cfg.trials, violations, cfg.horizon, cfg.seed),
        reveal_paths,
    })
}

/// Dispatches on the guard kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    match cfg.guard {
        Guard::Filter(_) => run_filter_experiment(cfg),
        Guard::Odometer(_) => run_odometer_experiment(cfg),
    }
}

/// Geometrically spaced intrinsic-time checkpoints (×2 per step), mirroring
/// how the stitched boundary partitions intrinsic time.
pub fn geometric_checkpoints(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first * (1u64 << i) as f64).collect()
}

/// Empirical (1-δ') quantile of the running loss at each intrinsic-time
/// checkpoint, across trials. A diagnostic profile of how much slack the
/// boundaries carry over the realized loss process; no guard is applied.
pub fn empirical_sup_profile(
    cfg: &ExperimentConfig,
    checkpoints: &[f64],
) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    for &c in checkpoints {
        check_nonnegative("checkpoint", c)?;
    }
    for pair in checkpoints.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::BadParameter {
                name: "checkpoints",
                constraint: "strictly ascending",
                value: pair[1],
            });
        }
    }
    let delta_prime = cfg.guard.delta_prime();

    let per_trial: Vec<Vec<f64>> = trials::map_trials(cfg.trials, cfg.threads, |trial| {
        let mut rng = trials::rng_for_trial(cfg.seed, trial);
        let mut loss = 0.0f64;
        let mut v = 0.0f64;
        let mut at_checkpoint = vec![f64::NAN; checkpoints.len()];
        let mut next = 0usize;
        for round in 0..cfg.horizon {
            if next >= checkpoints.len() || v >= cfg.v_cap {
                break;
            }
            let eps = cfg.strategy.next_epsilon(loss, round as usize);
            v += eps * eps;
            loss += sample_loss(cfg.mechanism, eps, cfg.delta_per_round, &mut rng);
            while next < checkpoints.len() && v >= checkpoints[next] {
                at_checkpoint[next] = loss;
                next += 1;
            }
        }
        at_checkpoint
    });

    let mut profile = Vec::with_capacity(checkpoints.len());
    for (i, &cp) in checkpoints.iter().enumerate() {
        let mut reached: Vec<f64> = per_trial
            .iter()
            .map(|t| t[i])
            .filter(|x| !x.is_nan())
            .collect();
        if reached.is_empty() {
            continue;
        }
        reached.sort_by(|a, b| a.partial_cmp(b).expect("losses are comparable"));
        let k = reached.len();
        let rank = (((1.0 - delta_prime) * k as f64).ceil() as usize).clamp(1, k);
        profile.push((cp, reached[rank - 1]));
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odometer::OdometerFamily;

    fn base_cfg(guard: Guard) -> ExperimentConfig {
        ExperimentConfig {
            strategy: AdversaryStrategy::Constant(0.1),
            mechanism: Mechanism::RandomizedResponse,
            guard,
            horizon: 100,
            v_cap: f64::INFINITY,
            trials: 500,
            seed: 7,
            delta_per_round: 0.0,
            stress: false,
            threads: 1,
        }
    }

    #[test]
    fn huge_budget_short_horizon_never_violates() {
        let mut cfg = base_cfg(Guard::Filter(FilterConfig::new(1e3, 0.05, 0.0).unwrap()));
        cfg.horizon = 10;
        let out = run_filter_experiment(&cfg).unwrap();
        assert_eq!(out.report.violations, 0);
        assert_eq!(out.report.rate, 0.0);
        assert!(out.report.upper_cb > 0.0);
    }

    #[test]
    fn single_trial_is_deterministic() {
        let mut cfg = base_cfg(Guard::Filter(FilterConfig::new(1.0, 0.05, 0.0).unwrap()));
        cfg.trials = 1;
        let a = run_filter_experiment(&cfg).unwrap();
        let b = run_filter_experiment(&cfg).unwrap();
        assert_eq!(a.report, b.report);
    }

    #[test]
    fn reports_are_thread_count_invariant() {
        let spec =
            OdometerSpec::new(OdometerFamily::Mixture { rho: 0.01 }, 0.05, 0.0).unwrap();
        let mut cfg = base_cfg(Guard::Odometer(spec));
        cfg.strategy = AdversaryStrategy::SignAdaptive {
            eps_low: 0.05,
            eps_high: 0.2,
        };
        cfg.trials = 400;
        let serial = run_odometer_experiment(&cfg).unwrap();
        for threads in [2, 5] {
            let mut cfg = cfg.clone();
            cfg.threads = threads;
            let parallel = run_odometer_experiment(&cfg).unwrap();
            assert_eq!(serial.report, parallel.report);
            assert_eq!(serial.reveal_paths, parallel.reveal_paths);
        }
    }

    #[test]
    fn precomputed_and_streamed_paths_agree() {
        // A front-loaded schedule can run through either code path; forcing
        // the streamed one by wrapping it in a sign-adaptive strategy with
        // equal arms must give identical results.
        let spec =
            OdometerSpec::new(OdometerFamily::Mixture { rho: 0.01 }, 0.05, 0.0).unwrap();
        let mut cfg = base_cfg(Guard::Odometer(spec));
        cfg.strategy = AdversaryStrategy::Constant(0.1);
        cfg.trials = 300;
        let fast = run_odometer_experiment(&cfg).unwrap();
        cfg.strategy = AdversaryStrategy::SignAdaptive {
            eps_low: 0.1,
            eps_high: 0.1,
        };
        let slow = run_odometer_experiment(&cfg).unwrap();
        assert_eq!(fast.report, slow.report);
    }

    #[test]
    fn stitched_guard_beyond_horizon_is_never_violated() {
        // v0 larger than any reachable intrinsic time: the bound stays +inf
        let spec = OdometerSpec::new(
            OdometerFamily::Stitched { v0: 1e6 },
            0.05,
            0.0,
        )
        .unwrap();
        let cfg = base_cfg(Guard::Odometer(spec));
        let out = run_odometer_experiment(&cfg).unwrap();
        assert_eq!(out.report.violations, 0);
    }

    #[test]
    fn delta_stop_trivializes_odometer_rounds() {
        // delta'' = 0 with a positive per-round delta: every round is past
        // the delta-stop, the bound is +inf, and reveals never violate.
        let spec =
            OdometerSpec::new(OdometerFamily::Mixture { rho: 0.01 }, 0.05, 0.0).unwrap();
        let mut cfg = base_cfg(Guard::Odometer(spec));
        cfg.delta_per_round = 0.5;
        cfg.horizon = 20;
        let out = run_odometer_experiment(&cfg).unwrap();
        assert_eq!(out.report.violations, 0);
        assert!(out.reveal_paths > 0, "reveals still happen, they just cannot violate");
    }

    #[test]
    fn lowering_delta_prime_never_raises_the_rate() {
        for &(lo, hi) in &[(0.01, 0.05), (0.05, 0.1)] {
            let mut rates = Vec::new();
            for dp in [lo, hi] {
                let spec =
                    OdometerSpec::new(OdometerFamily::Mixture { rho: 0.01 }, dp, 0.0).unwrap();
                let mut cfg = base_cfg(Guard::Odometer(spec));
                cfg.mechanism = Mechanism::Gaussian;
                cfg.horizon = 2_000;
                cfg.trials = 1_000;
                rates.push(run_odometer_experiment(&cfg).unwrap().report.rate);
            }
            assert!(rates[0] <= rates[1], "tighter confidence, fewer crossings");
        }
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let good = base_cfg(Guard::Filter(FilterConfig::new(1.0, 0.05, 0.0).unwrap()));
        let mut bad = good.clone();
        bad.trials = 0;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.horizon = 0;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.mechanism = Mechanism::Gaussian;
        bad.delta_per_round = 0.01;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.delta_per_round = 1.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sup_profile_single_trial_returns_the_path() {
        let spec =
            OdometerSpec::new(OdometerFamily::Mixture { rho: 0.01 }, 0.05, 0.0).unwrap();
        let mut cfg = base_cfg(Guard::Odometer(spec));
        cfg.mechanism = Mechanism::Gaussian;
        cfg.trials = 1;
        cfg.horizon = 200;
        let profile = empirical_sup_profile(&cfg, &[0.5, 1.0]).unwrap();
        assert_eq!(profile.len(), 2);
        assert_eq!(profile[0].0, 0.5);
        // rerunning reproduces the same single path
        let again = empirical_sup_profile(&cfg, &[0.5, 1.0]).unwrap();
        assert_eq!(profile, again);
    }

    #[test]
    fn geometric_checkpoints_double() {
        assert_eq!(geometric_checkpoints(0.25, 4), vec![0.25, 0.5, 1.0, 2.0]);
    }
}
