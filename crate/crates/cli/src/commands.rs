//! Implementations behind the CLI subcommands.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde_json::json;

use odometer_core::filter::{filter_admits, y_star, y_star_alt, FilterConfig};
use odometer_core::mechanism::AdversaryStrategy;
use odometer_core::montecarlo::{run_experiment, CoverageReport, ExperimentConfig, Guard, Mechanism};
use odometer_core::odometer::{OdometerFamily, OdometerSpec, OdometerValue};
use odometer_core::spend::{PrivacySpend, SpendKind};

use crate::ledger;
use crate::output::{csv_cell, csv_cell_odometer, round_sig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_REJECTED: u8 = 1;

fn parse_kind(kind: &str) -> Result<SpendKind> {
    match kind {
        "dp" => Ok(SpendKind::ApproxDp),
        "zcdp" => Ok(SpendKind::Zcdp),
        other => bail!("unknown spend kind {other:?} (expected \"dp\" or \"zcdp\")"),
    }
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// Path to the JSONL spend log.
    #[arg(long)]
    pub ledger: PathBuf,
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<u8> {
    let (state, _) = ledger::ingest(&args.ledger)?;
    println!(
        "{}",
        json!({
            "n": state.n(),
            "v": round_sig(state.v()),
            "delta_sum": round_sig(state.delta_sum()),
        })
    );
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Path to the JSONL spend log.
    #[arg(long)]
    pub ledger: PathBuf,
    /// Candidate round's epsilon.
    #[arg(long)]
    pub epsilon: f64,
    /// Candidate round's delta.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Candidate kind: "dp" or "zcdp".
    #[arg(long, default_value = "dp")]
    pub kind: String,
    /// Global epsilon budget.
    #[arg(long)]
    pub budget_epsilon: f64,
    /// Martingale confidence slice delta'.
    #[arg(long)]
    pub delta_prime: f64,
    /// Approximation slice delta''.
    #[arg(long, default_value_t = 0.0)]
    pub delta_dprime: f64,
}

pub fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let (state, _) = ledger::ingest(&args.ledger)?;
    let candidate = PrivacySpend::new(parse_kind(&args.kind)?, args.epsilon, args.delta)
        .context("invalid candidate spend")?;
    let cfg = FilterConfig::new(args.budget_epsilon, args.delta_prime, args.delta_dprime)
        .context("invalid budget")?;
    let decision = filter_admits(&state, &candidate, &cfg)?;
    println!(
        "{}",
        json!({
            "admitted": decision.admitted,
            "projected_epsilon": round_sig(decision.projected_epsilon),
            "projected_delta_sum": round_sig(decision.projected_delta_sum),
        })
    );
    Ok(if decision.admitted { EXIT_OK } else { EXIT_REJECTED })
}

#[derive(Args, Debug)]
pub struct StatusArgs {
    #[arg(long)]
    pub ledger: PathBuf,
    #[arg(long)]
    pub budget_epsilon: f64,
    #[arg(long)]
    pub delta_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta_dprime: f64,
    /// Target epsilon of the tangent-line odometer (defaults to the budget).
    #[arg(long)]
    pub filter_epsilon: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.005)]
    pub v0: f64,
    /// Dataset size for the rogers odometer; omitted, the family is skipped.
    #[arg(long)]
    pub rogers_size: Option<u64>,
    /// Also emit the optimizer root under both radicand conventions.
    #[arg(long)]
    pub diagnostics: bool,
}

pub fn cmd_status(args: &StatusArgs) -> Result<u8> {
    let (state, _) = ledger::ingest(&args.ledger)?;
    let budget = FilterConfig::new(args.budget_epsilon, args.delta_prime, args.delta_dprime)
        .context("invalid budget")?;

    let capacity = y_star(budget.epsilon_budget, budget.delta_prime)?;
    let filter_remaining_v = (capacity - state.v()).max(0.0);

    // past the delta'' stop every odometer reads +inf
    let gated = state.delta_sum() > args.delta_dprime;
    let mut families: Vec<(&str, OdometerFamily)> = vec![
        (
            "filter",
            OdometerFamily::Filter {
                epsilon_target: args.filter_epsilon.unwrap_or(args.budget_epsilon),
            },
        ),
        ("mixture", OdometerFamily::Mixture { rho: args.rho }),
        ("stitched", OdometerFamily::Stitched { v0: args.v0 }),
    ];
    if let Some(size) = args.rogers_size {
        families.push(("rogers", OdometerFamily::Rogers { dataset_size: size }));
    }
    let mut odometer_values = serde_json::Map::new();
    for (name, family) in families {
        let spec = OdometerSpec::new(family, args.delta_prime, args.delta_dprime)?;
        let value = if gated {
            OdometerValue::trivial()
        } else {
            spec.evaluate(state.v())?
        };
        let rendered = if value.is_trivialized() {
            json!("inf")
        } else {
            json!(round_sig(value.value()))
        };
        odometer_values.insert(name.to_owned(), rendered);
    }

    let mut out = json!({
        "n": state.n(),
        "v": round_sig(state.v()),
        "delta_sum": round_sig(state.delta_sum()),
        "filter_remaining_v": round_sig(filter_remaining_v),
        "odometer_values": odometer_values,
    });
    if args.diagnostics {
        out.as_object_mut().expect("object").insert(
            "diagnostics".to_owned(),
            json!({
                "y_star": round_sig(capacity),
                "y_star_alt": round_sig(y_star_alt(budget.epsilon_budget, budget.delta_prime)?),
            }),
        );
    }
    println!("{out}");
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct CurvesArgs {
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub v_min: f64,
    #[arg(long, default_value_t = 25.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Log-spaced grid instead of linear.
    #[arg(long)]
    pub log: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub delta_prime: f64,
    #[arg(long, default_value_t = 8.0)]
    pub filter_epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.005)]
    pub v0: f64,
    /// Dataset size for the rogers column (required unless --gap).
    #[arg(long)]
    pub rogers_size: Option<u64>,
    /// Emit the lower-order gap curve (grid reinterpreted as the ε axis).
    #[arg(long)]
    pub gap: bool,
}

fn grid(args: &CurvesArgs) -> Result<Vec<f64>> {
    if args.points == 0 {
        bail!("--points must be at least 1");
    }
    if args.points == 1 {
        return Ok(vec![args.v_min]);
    }
    if args.v_max < args.v_min {
        bail!("--v-max must be at least --v-min");
    }
    let n = args.points;
    let pts = if args.log {
        if args.v_min <= 0.0 {
            bail!("log spacing needs --v-min > 0");
        }
        (0..n)
            .map(|i| args.v_min * (args.v_max / args.v_min).powf(i as f64 / (n - 1) as f64))
            .collect()
    } else {
        (0..n)
            .map(|i| args.v_min + (args.v_max - args.v_min) * i as f64 / (n - 1) as f64)
            .collect()
    };
    Ok(pts)
}

pub fn cmd_curves(args: &CurvesArgs) -> Result<u8> {
    let pts = grid(args)?;
    let mut out = String::new();
    if args.gap {
        out.push_str("epsilon,half_eps_sq,adv_lower_order\n");
        for &eps in &pts {
            let lower = eps * (eps.exp() - 1.0) / (eps.exp() + 1.0);
            out.push_str(&format!(
                "{},{},{}\n",
                csv_cell(eps),
                csv_cell(0.5 * eps * eps),
                csv_cell(lower)
            ));
        }
    } else {
        let size = args
            .rogers_size
            .context("--rogers-size is required for odometer curves")?;
        let specs = [
            OdometerSpec::new(
                OdometerFamily::Filter {
                    epsilon_target: args.filter_epsilon,
                },
                args.delta_prime,
                0.0,
            )?,
            OdometerSpec::new(OdometerFamily::Mixture { rho: args.rho }, args.delta_prime, 0.0)?,
            OdometerSpec::new(OdometerFamily::Stitched { v0: args.v0 }, args.delta_prime, 0.0)?,
            OdometerSpec::new(
                OdometerFamily::Rogers { dataset_size: size },
                args.delta_prime,
                0.0,
            )?,
        ];
        out.push_str("v,filter,mixture,stitched,rogers\n");
        for &v in &pts {
            out.push_str(&csv_cell(v));
            for spec in &specs {
                out.push(',');
                out.push_str(&csv_cell_odometer(&spec.evaluate(v)?));
            }
            out.push('\n');
        }
    }
    std::fs::write(&args.out, out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(EXIT_OK)
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Loss sampler: "rr" or "gaussian".
    #[arg(long)]
    pub mechanism: String,
    /// Adversary: "constant=EPS", "front-loaded=E1,E2,..." (last repeats),
    /// or "sign-adaptive=LOW,HIGH".
    #[arg(long)]
    pub strategy: String,
    /// Guard: "filter", "filter-odometer", "mixture", "stitched", "rogers".
    #[arg(long)]
    pub guard: String,
    #[arg(long, default_value_t = 1.0)]
    pub budget_epsilon: f64,
    #[arg(long, default_value_t = 8.0)]
    pub filter_epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.005)]
    pub v0: f64,
    #[arg(long)]
    pub rogers_size: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    pub delta_prime: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta_dprime: f64,
    /// Declared per-round delta (randomized response reveal mass).
    #[arg(long, default_value_t = 0.0)]
    pub delta_per_round: f64,
    #[arg(long, default_value_t = 10_000)]
    pub horizon: u64,
    /// Stop each trial once intrinsic time reaches this value.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub v_cap: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Defaults to $PRIVACY_LEDGER_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Negative control: halve the guard boundary; coverage should then fail.
    #[arg(long)]
    pub stress: bool,
}

fn parse_strategy(text: &str) -> Result<AdversaryStrategy> {
    let (name, params) = text
        .split_once('=')
        .with_context(|| format!("strategy {text:?} needs parameters after '='"))?;
    let values: Vec<f64> = params
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(Into::into))
        .collect::<Result<_>>()
        .with_context(|| format!("strategy {text:?}: unparsable parameter list"))?;
    let strategy = match name {
        "constant" => {
            if values.len() != 1 {
                bail!("constant strategy takes exactly one epsilon");
            }
            AdversaryStrategy::Constant(values[0])
        }
        "front-loaded" => AdversaryStrategy::FrontLoaded(values),
        "sign-adaptive" => {
            if values.len() != 2 {
                bail!("sign-adaptive strategy takes LOW,HIGH");
            }
            AdversaryStrategy::SignAdaptive {
                eps_low: values[0],
                eps_high: values[1],
            }
        }
        other => bail!("unknown strategy {other:?}"),
    };
    strategy.validate()?;
    Ok(strategy)
}

fn build_guard(args: &SimulateArgs) -> Result<Guard> {
    let guard = match args.guard.as_str() {
        "filter" => Guard::Filter(FilterConfig::new(
            args.budget_epsilon,
            args.delta_prime,
            args.delta_dprime,
        )?),
        "filter-odometer" => Guard::Odometer(OdometerSpec::new(
            OdometerFamily::Filter {
                epsilon_target: args.filter_epsilon,
            },
            args.delta_prime,
            args.delta_dprime,
        )?),
        "mixture" => Guard::Odometer(OdometerSpec::new(
            OdometerFamily::Mixture { rho: args.rho },
            args.delta_prime,
            args.delta_dprime,
        )?),
        "stitched" => Guard::Odometer(OdometerSpec::new(
            OdometerFamily::Stitched { v0: args.v0 },
            args.delta_prime,
            args.delta_dprime,
        )?),
        "rogers" => Guard::Odometer(OdometerSpec::new(
            OdometerFamily::Rogers {
                dataset_size: args
                    .rogers_size
                    .context("--rogers-size is required for the rogers guard")?,
            },
            args.delta_prime,
            args.delta_dprime,
        )?),
        other => bail!("unknown guard {other:?}"),
    };
    Ok(guard)
}

pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("PRIVACY_LEDGER_SEED") {
        Ok(text) => text
            .parse::<u64>()
            .with_context(|| format!("PRIVACY_LEDGER_SEED={text:?} is not a u64")),
        Err(_) => Ok(0),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let mechanism = match args.mechanism.as_str() {
        "rr" => Mechanism::RandomizedResponse,
        "gaussian" => Mechanism::Gaussian,
        other => bail!("unknown mechanism {other:?}"),
    };
    let cfg = ExperimentConfig {
        strategy: parse_strategy(&args.strategy)?,
        mechanism,
        guard: build_guard(args)?,
        horizon: args.horizon,
        v_cap: args.v_cap,
        trials: args.trials,
        seed: resolve_seed(args.seed)?,
        delta_per_round: args.delta_per_round,
        stress: args.stress,
        threads: args.threads,
    };
    cfg.validate()?;
    let outcome = run_experiment(&cfg)?;
    let report = outcome.report;
    println!(
        "{}",
        json!({
            "trials": report.trials,
            "violations": report.violations,
            "rate": round_sig(report.rate),
            "upper_cb": round_sig(report.upper_cb),
            "horizon": report.horizon,
            "seed": report.seed,
        })
    );
    let threshold = CoverageReport::coverage_threshold(args.delta_prime, args.trials);
    Ok(if report.rate <= threshold {
        EXIT_OK
    } else {
        EXIT_REJECTED
    })
}
