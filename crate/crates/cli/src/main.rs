use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use insider_na::{parse_rational, Grid, Rational};
use insider_na_cli::analysis::{
    run_deflator, run_find_arbitrage, run_fuzz, run_measure, run_na_check, run_validate_theorems,
};
use insider_na_cli::{
    parse_model, render, run_analyze, run_examples, AnalyzeOptions, CliError, ExampleParams, Format,
    FuzzRequest, MeasureKind,
};

#[derive(Parser)]
#[command(name = "insider-na", version, about = "No-arbitrage analysis for markets with an informed trader")]
struct Cli {
    /// Output format; the default comes from INSIDER_NA_FORMAT, else text.
    #[arg(long, global = true, value_enum, env = "INSIDER_NA_FORMAT", default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// JSON model file.
    file: PathBuf,
    /// Process to analyse (default: the first one in the file).
    #[arg(long)]
    process: Option<String>,
    /// Random time to use (default: the first one in the file).
    #[arg(long)]
    time: Option<String>,
    /// Analyse the stopped market.
    #[arg(long)]
    before: bool,
    /// Analyse the market after the random time (needs a strictly honest time).
    #[arg(long)]
    after: bool,
}

impl ModelArgs {
    fn options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            process: self.process.clone(),
            time: self.time.clone(),
            before: self.before,
            after: self.after,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Full report: survival processes, hitting times, verdicts, deflators.
    Analyze(ModelArgs),
    /// No-arbitrage verdicts for the public and insider filtrations.
    NaCheck(ModelArgs),
    /// Grid search for explicit arbitrage strategies.
    FindArbitrage {
        #[command(flatten)]
        model: ModelArgs,
        /// Also try hedge ratios between increments.
        #[arg(long)]
        hedge_ratios: bool,
    },
    /// Deflators and the deflated markets.
    Deflator(ModelArgs),
    /// Equivalent measure densities.
    Measure {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum)]
        which: MeasureKind,
    },
    /// Equivalence conditions on the random time, and the reverse checks.
    ValidateTheorems(ModelArgs),
    /// Seeded random instances checked against every equivalence.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 8)]
        max_outcomes: usize,
        #[arg(long, default_value_t = 4)]
        max_horizon: usize,
    },
    /// The bundled binomial examples.
    Examples {
        #[arg(long)]
        id: u8,
        #[arg(long, value_parser = rational)]
        u: Option<Rational>,
        #[arg(long, value_parser = rational)]
        d: Option<Rational>,
        #[arg(long, value_parser = rational)]
        lambda: Option<Rational>,
        #[arg(long, value_parser = rational)]
        s0: Option<Rational>,
    },
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Output plus any breaches that must turn the exit code to 3.
type Outcome = (Vec<u8>, Vec<String>);

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let f = cli.format;
    Ok(match &cli.command {
        Command::Analyze(args) => {
            let report = run_analyze(&parse_model(&args.file)?, &args.options())?;
            (render(&report, f), report.breaches())
        }
        Command::NaCheck(args) => {
            let report = run_na_check(&parse_model(&args.file)?, &args.options())?;
            (render(&report, f), vec![])
        }
        Command::FindArbitrage { model, hedge_ratios } => {
            let grid = if *hedge_ratios { Grid::with_hedge_ratios() } else { Grid::unit() };
            let report = run_find_arbitrage(&parse_model(&model.file)?, &model.options(), &grid)?;
            (render(&report, f), vec![])
        }
        Command::Deflator(args) => {
            let report = run_deflator(&parse_model(&args.file)?, &args.options())?;
            (render(&report, f), vec![])
        }
        Command::Measure { model, which } => {
            let report = run_measure(&parse_model(&model.file)?, &model.options(), *which)?;
            (render(&report, f), vec![])
        }
        Command::ValidateTheorems(args) => {
            let report = run_validate_theorems(&parse_model(&args.file)?, &args.options())?;
            (render(&report, f), report.breaches())
        }
        Command::Fuzz {
            seed,
            count,
            max_outcomes,
            max_horizon,
        } => {
            let report = run_fuzz(FuzzRequest {
                seed: *seed,
                count: *count,
                max_outcomes: *max_outcomes,
                max_horizon: *max_horizon,
            })?;
            let breaches = if report.clean {
                vec![]
            } else {
                vec!["fuzzing found disagreements or failed constructions".to_string()]
            };
            (render(&report, f), breaches)
        }
        Command::Examples { id, u, d, lambda, s0 } => {
            let params = ExampleParams {
                u: u.clone(),
                d: d.clone(),
                lambda: lambda.clone(),
                s0: s0.clone(),
            };
            let report = run_examples(*id, &params)?;
            (render(&report, f), report.analysis.breaches())
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok((bytes, breaches)) => {
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(&bytes);
            let _ = out.flush();
            if breaches.is_empty() {
                ExitCode::SUCCESS
            } else {
                for b in &breaches {
                    eprintln!("error: {b}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
