use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ris_cci::metrics::diversity_order;
use ris_cci::{fit_kg_parameters, KgParams};
use serde_json::json;

use ris_cci_cli::scenario::Scenario;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "RIS_CCI_THREADS";

#[derive(Parser)]
#[command(name = "ris-cci", version, about = "Outage, BER and capacity sweeps for RIS links with co-channel interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the fitted squared-K_G parameters for N elements as JSON.
    Fit {
        #[arg(long = "n")]
        n_elements: u32,
    },
    /// Closed-form and asymptotic metrics over the scenario sweep.
    Analyze(SweepArgs),
    /// Monte Carlo estimates over the scenario sweep.
    Simulate(SweepArgs),
    /// Analytic and Monte Carlo side by side, plus a JSON summary.
    Compare {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Where to write the summary JSON (default: standard error).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SweepArgs {
    fn load(&self) -> Result<Scenario> {
        let mut s = Scenario::load(&self.scenario)?;
        if let Some(t) = self.trials {
            s.mc.trials = t;
        }
        if let Some(seed) = self.seed {
            s.mc.seed = seed;
        }
        s.validate()?;
        Ok(s)
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        open_out(self.out.as_deref())
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn params_json(n: u32, p: &KgParams) -> serde_json::Value {
    json!({
        "n_elements": n,
        "k": { "re": p.k.re, "im": p.k.im },
        "m": { "re": p.m.re, "im": p.m.im },
        "omega": p.omega,
        "a_scale": p.a_scale,
        "sum_km": p.sum_km,
        "prod_km": p.prod_km,
        "diversity_order": diversity_order(p),
    })
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().with_context(|| format!("{THREADS_ENV} must be a positive integer, got {v:?}"))?;
        if n == 0 {
            bail!("{THREADS_ENV} must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Fit { n_elements } => {
            let p = fit_kg_parameters(n_elements)?;
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &params_json(n_elements, &p))?;
            writeln!(out)?;
        }
        Command::Analyze(args) => ris_cci_cli::analyze(&args.load()?, args.writer()?)?,
        Command::Simulate(args) => ris_cci_cli::simulate(&args.load()?, args.writer()?)?,
        Command::Compare { sweep, summary } => {
            let series = ris_cci_cli::compare(&sweep.load()?, sweep.writer()?)?;
            let doc = json!({ "series": series });
            match summary {
                Some(path) => {
                    let mut w = open_out(Some(&path))?;
                    serde_json::to_writer_pretty(&mut w, &doc)?;
                    writeln!(w)?;
                }
                None => eprintln!("{}", serde_json::to_string(&doc)?),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let chain: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            eprintln!("{}", json!({ "status": "error", "message": e.to_string(), "causes": chain }));
            ExitCode::FAILURE
        }
    }
}
