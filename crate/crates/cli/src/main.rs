mod sweep;
mod values;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use relay_dof::dof::{crosscheck_printed, dof, DofBreakdown, SchemeId, SchemeKind};
use relay_dof::plan::{build_frame_plan, build_frame_plan_with, plan_csv, FramePlan, PlanOptions, DEFAULT_MAX_SLOTS};
use relay_dof::rate::{estimate_dof_slope, estimate_plan_rate, interval_rate, pairwise_sum, RatePoint};
use relay_dof::sim::{run_end_to_end, sample_channels, Noise, Payload, SymbolKind};
use relay_dof::Scenario;

use sweep::{sweep_csv, Param, SweepSpec};
use values::parse_values;

/// Degrees of freedom, frame plans and link simulations for MIMO relay
/// channels with unequal coherence times.
#[derive(Parser)]
#[command(name = "relay-dof", version)]
struct Cli {
    /// Worker threads; defaults to RELAY_DOF_THREADS, then to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    /// Use the product of the coherence times as the super-interval.
    #[arg(long)]
    product_form: bool,
    /// Longest super-interval accepted.
    #[arg(long, default_value_t = DEFAULT_MAX_SLOTS)]
    max_slots: u64,
    /// Relay activation as a comma list, one entry per relay; the optimum when omitted.
    #[arg(long, value_delimiter = ',')]
    activation: Option<Vec<u32>>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimized DoF of a scheme as JSON.
    Dof {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: SchemeKind,
    },
    /// Tabulate DoF against one scenario parameter as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// T_SD, T_SR, T_RD, K, K', N_S, N_R, N_D or snr_db.
        #[arg(long)]
        param: Param,
        /// `a..b:step` (b excluded) or a comma list; `inf` is accepted for coherence times.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Schemes to tabulate.
        #[arg(long, value_delimiter = ',', default_value = "thm1-equal")]
        schemes: Vec<SchemeKind>,
        /// 1-based relay that relay parameters apply to; all relays when omitted.
        #[arg(long)]
        relay: Option<usize>,
        /// Leave T_SR and T_RD alone when sweeping T_SD.
        #[arg(long)]
        independent: bool,
    },
    /// Write the slot-by-slot frame plan as CSV.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: SchemeKind,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Run one channel realization over several super-intervals and report its rate.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: String,
        /// Super-intervals to run; the first one only primes the relays.
        #[arg(long, default_value_t = 10)]
        intervals: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Average the rate over independent channel draws.
    Mc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: SchemeKind,
        #[arg(long, allow_hyphen_values = true)]
        snr_db: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Compare the closed form against slot accounting for every activation.
    Crosscheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: SchemeKind,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Scenario::from_json(&text).with_context(|| format!("bad scenario in {}", path.display()))
}

fn scenario_hash(s: &Scenario) -> String {
    hex::encode(Sha256::digest(s.to_json().as_bytes()))
}

fn header(s: &Scenario, seed: Option<u64>) -> String {
    let seed = seed.map_or("none".to_string(), |v| v.to_string());
    format!("# scenario_hash={} seed={seed}\n", scenario_hash(s))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn resolve(s: &Scenario, kind: SchemeKind) -> Result<SchemeId> {
    Ok(kind.resolve(s)?)
}

fn make_plan(s: &Scenario, scheme: &SchemeId, args: &PlanArgs) -> Result<FramePlan> {
    let opts = PlanOptions {
        product_form: args.product_form,
        max_slots: args.max_slots,
    };
    let plan = match &args.activation {
        Some(n) => build_frame_plan_with(s, scheme, n, &opts)?,
        None if args.product_form || args.max_slots != DEFAULT_MAX_SLOTS => {
            let n = dof(s, scheme)?.n_r_opt;
            build_frame_plan_with(s, scheme, &n, &opts)?
        }
        None => build_frame_plan(s, scheme)?,
    };
    Ok(plan)
}

#[derive(Serialize)]
struct DofReport {
    scenario_hash: String,
    #[serde(flatten)]
    breakdown: DofBreakdown,
    dof_float: f64,
}

fn rate_csv(s: &Scenario, seed: u64, points: &[RatePoint]) -> String {
    let mut out = header(s, Some(seed));
    out.push_str("snr_db,rate,trials,std_err\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.snr_db, p.rate, p.trials, p.std_err);
    }
    if let Ok((slope, rms)) = estimate_dof_slope(points) {
        let _ = writeln!(out, "# dof_slope={slope} fit_rms={rms}");
    }
    out
}

/// Rate of one channel realization, one sample per super-interval after the first.
fn simulate_point(s: &Scenario, plan: &FramePlan, snr_db: f64, intervals: usize, seed: u64) -> Result<RatePoint> {
    if intervals < 2 {
        bail!("--intervals must be at least 2 so the relays have something to forward");
    }
    let rho = 10f64.powf(snr_db / 10.0);
    let measured = intervals - 1;
    if rho == 0.0 {
        return Ok(RatePoint {
            snr_db,
            rate: 0.0,
            trials: measured,
            std_err: 0.0,
        });
    }
    let ch = sample_channels(s, seed, plan.super_interval * intervals as u64);
    let payload = Payload::random(plan, intervals, seed, SymbolKind::Gaussian);
    let out = run_end_to_end(s, plan, &payload, Noise::Snr(rho), &ch)?;
    let rates: Vec<f64> = (1..intervals).map(|k| interval_rate(plan, &out, k)).collect();
    let n = measured as f64;
    let mean = pairwise_sum(&rates) / n;
    let std_err = if measured > 1 {
        let dev: Vec<f64> = rates.iter().map(|r| (r - mean).powi(2)).collect();
        (pairwise_sum(&dev) / (n - 1.0)).sqrt() / n.sqrt()
    } else {
        0.0
    };
    Ok(RatePoint {
        snr_db,
        rate: mean,
        trials: measured,
        std_err,
    })
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("RELAY_DOF_THREADS") {
            Ok(v) if !v.trim().is_empty() => {
                Some(v.trim().parse().with_context(|| format!("RELAY_DOF_THREADS={v:?} is not a count"))?)
            }
            _ => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Dof { common, scheme } => {
            let s = load(&common.config)?;
            let d = dof(&s, &resolve(&s, scheme)?)?;
            let report = DofReport {
                scenario_hash: scenario_hash(&s),
                dof_float: d.total.to_f64(),
                breakdown: d,
            };
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(common.out.as_deref(), &text)
        }
        Command::Sweep {
            common,
            param,
            values,
            schemes,
            relay,
            independent,
        } => {
            let template = load(&common.config)?;
            let relay = match relay {
                Some(0) => bail!("--relay is 1-based"),
                r => r.map(|i| i - 1),
            };
            let spec = SweepSpec {
                param,
                values: parse_values(&values)?,
                schemes,
                relay,
                independent,
                template,
            };
            let rows = spec.run()?;
            let mut text = header(&spec.template, None);
            text.push_str(&sweep_csv(&rows));
            emit(common.out.as_deref(), &text)
        }
        Command::Plan { common, scheme, plan } => {
            let s = load(&common.config)?;
            let p = make_plan(&s, &resolve(&s, scheme)?, &plan)?;
            let mut text = header(&s, None);
            let _ = writeln!(
                text,
                "# scheme={} activation={:?} super_interval={} dof={}",
                p.scheme,
                p.activation,
                p.super_interval,
                relay_dof::plan::accounting_dof(&p)
            );
            for note in &p.notes {
                let _ = writeln!(text, "# note: {note}");
            }
            text.push_str(&plan_csv(&p));
            emit(common.out.as_deref(), &text)
        }
        Command::Simulate {
            common,
            scheme,
            snr_db,
            intervals,
            seed,
            plan,
        } => {
            let s = load(&common.config)?;
            let p = make_plan(&s, &resolve(&s, scheme)?, &plan)?;
            let points = parse_values(&snr_db)?
                .into_iter()
                .map(|db| simulate_point(&s, &p, db, intervals, seed))
                .collect::<Result<Vec<_>>>()?;
            emit(common.out.as_deref(), &rate_csv(&s, seed, &points))
        }
        Command::Mc {
            common,
            scheme,
            snr_db,
            trials,
            seed,
            plan,
        } => {
            let s = load(&common.config)?;
            let p = make_plan(&s, &resolve(&s, scheme)?, &plan)?;
            let points = parse_values(&snr_db)?
                .into_iter()
                .map(|db| estimate_plan_rate(&s, &p, db, trials, seed, SymbolKind::Gaussian))
                .collect::<relay_dof::Result<Vec<_>>>()?;
            emit(common.out.as_deref(), &rate_csv(&s, seed, &points))
        }
        Command::Crosscheck { common, scheme } => {
            let s = load(&common.config)?;
            let id = resolve(&s, scheme)?;
            let show = |v: Option<relay_dof::Rational>| v.map_or("undefined".to_string(), |v| v.to_string());
            let mut text = header(&s, None);
            let _ = writeln!(text, "# scheme={id}");
            text.push_str("n_r,printed,canonical,equal\n");
            for row in crosscheck_printed(&s, &id)? {
                let equal = row.equal.map_or("undefined".to_string(), |e| e.to_string());
                let _ = writeln!(text, "{},{},{},{equal}", row.n_r, show(row.printed), show(row.canonical));
            }
            emit(common.out.as_deref(), &text)
        }
    }
}

fn main() -> Result<()> {
    run(Cli::parse())
}
