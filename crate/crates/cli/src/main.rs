use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cmf_relay::analysis::{self, BoundInput};
use cmf_relay::sim::{self, Experiment, TrialPolicy, CSV_HEADER};
use cmf_relay::verify::{self, Scale};
use cmf_relay::{fading, Error};

#[derive(Parser)]
#[command(name = "cmf-relay", version, about = "Compute-and-forward two-way relaying simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML experiment and write `<id>.csv` plus a manifest.
    Run(RunArgs),
    /// Tabulate the outage lower bound and sum-rate upper bound.
    Bounds(BoundsArgs),
    /// Run the invariant checks.
    Selftest {
        /// Random draws per check.
        #[arg(long, default_value_t = 20_000)]
        draws: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// List preset ids.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// Preset id (see `list-presets`).
    #[arg(required_unless_present = "config", conflicts_with = "config")]
    preset: Option<String>,
    /// TOML experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Fixed number of trials per grid point.
    #[arg(long, conflicts_with_all = ["min_trials", "max_trials", "min_events"])]
    trials: Option<u64>,
    #[arg(long)]
    min_trials: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    min_events: Option<u64>,
    /// SNR grid in dB, `start:step:stop`.
    #[arg(long)]
    snr: Option<String>,
    /// Target rate per user in bits.
    #[arg(long)]
    rt: Option<f64>,
    /// Power adaptation tolerance on the amplitude step.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Number of relays.
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1.0)]
    rt: f64,
    #[arg(long, default_value = "0:5:40")]
    snr: String,
    /// Link variance toward every relay.
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
}

fn experiment(args: &RunArgs) -> Result<Experiment, Error> {
    let mut exp = match (&args.preset, &args.config) {
        (Some(id), _) => sim::preset(id)?,
        (None, Some(path)) => Experiment::from_file(path)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(s) = args.seed {
        exp.seed = s;
    }
    if let Some(n) = args.trials {
        exp.policy = TrialPolicy::fixed(n);
    }
    if let Some(n) = args.min_trials {
        exp.policy.min_trials = n;
    }
    if let Some(n) = args.max_trials {
        exp.policy.max_trials = n;
    }
    if let Some(n) = args.min_events {
        exp.policy.min_events = n;
    }
    if let Some(g) = &args.snr {
        exp.snr_db = sim::parse_grid(g)?;
    }
    if let Some(r) = args.rt {
        exp.target_rate = r;
    }
    if let Some(d) = args.delta {
        exp.adapt.delta = d;
    }
    if let Some(k) = args.max_iters {
        exp.adapt.max_iters = k;
    }
    exp.validate()?;
    Ok(exp)
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let exp = experiment(args)?;
    let output = match args.threads {
        None => sim::run(&exp)?,
        Some(0) => return Err(Error::Config("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Numerical {
                routine: "thread_pool",
                detail: e.to_string(),
            })?
            .install(|| sim::run(&exp))?,
    };
    let (csv, manifest) = output.write_to(&args.out)?;
    println!("{}", csv.display());
    println!("{}", manifest.display());
    Ok(())
}

fn bounds(args: &BoundsArgs) -> Result<(), Error> {
    let grid = sim::parse_grid(&args.snr)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut rows = [Vec::new(), Vec::new()];
    for &snr in &grid {
        let p = fading::db_to_linear(snr);
        let input = BoundInput {
            target_rate: args.rt,
            powers: [p, p],
            variances: vec![[args.variance; 2]; args.m],
        };
        input.validate()?;
        rows[0].push((snr, analysis::outage_lower_bound(&input)?));
        rows[1].push((snr, analysis::sum_rate_upper_bound(&input)?));
    }
    let series = format!("bound@M={}", args.m);
    for (metric, rows) in ["outage_lower_bound", "sum_rate_upper_bound"].iter().zip(&rows) {
        for (snr, v) in rows {
            out.push_str(&format!("bounds,{series},{snr},{metric},{v:e},0e0,0\n"));
        }
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

fn selftest(draws: u64, seed: u64) -> Result<bool, Error> {
    let reports = verify::selftest(Scale { draws }, seed)?;
    let mut ok = true;
    for r in &reports {
        println!("{r}");
        ok &= !r.is_failure();
    }
    let failed = reports.iter().filter(|r| r.is_failure()).count();
    println!("{} checks, {failed} failed", reports.len());
    Ok(ok)
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { 1 } else { 2 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Bounds(args) => bounds(args),
        Command::Selftest { draws, seed } => match selftest(*draws, *seed) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
        Command::ListPresets => {
            for (id, about) in sim::PRESETS {
                println!("{id}\t{about}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => exit_for(&e),
    }
}
