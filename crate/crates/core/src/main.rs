use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use locfaults::bench::{check_fixture, run_entry, summary_table, BenchConfig, BenchError};
use locfaults::corpus::{load_dir, programs};
use locfaults::lang::{parse, unroll, ParseError};
use locfaults::localize::{ce_from_inline, ce_from_json, locfaults, LocConfig, LocError};
use locfaults::report::{render_json, render_text};
use locfaults::solver::SolverConfig;

#[derive(Parser)]
#[command(name = "locfaults", version, about = "Fault localization for small integer programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Localize faults for one program and counterexample.
    Run {
        /// Program source (`.imp`).
        #[arg(long)]
        source: PathBuf,
        /// Counterexample: a JSON file, or inline `name=value,...`.
        #[arg(long)]
        ce: String,
        /// Maximum number of flipped conditions per path.
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        /// Maximum MCS cardinality.
        #[arg(long, default_value_t = 3)]
        mcs_bound: usize,
        /// Loop unrolling bound.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        unroll: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Lower bound of the variable domain.
        #[arg(long, default_value_t = -1_000_000, allow_negative_numbers = true)]
        domain_lo: i64,
        /// Upper bound of the variable domain.
        #[arg(long, default_value_t = 1_000_000, allow_negative_numbers = true)]
        domain_hi: i64,
    },
    /// Run the corpus for k = 0..3 and compare with stored fixtures.
    Bench {
        /// Only programs whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Directory with `.imp` programs; defaults to the embedded corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Fixture directory; defaults to `<corpus>/fixtures`.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Overwrite fixtures instead of comparing.
        #[arg(long)]
        update: bool,
    },
}

fn read_ce(arg: &str) -> anyhow::Result<locfaults::localize::CounterExample> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return ce_from_json(&text).with_context(|| format!("parsing {arg}"));
    }
    if !arg.contains('=') {
        bail!("`{arg}` is neither a file nor an inline counterexample");
    }
    ce_from_inline(arg).map_err(anyhow::Error::msg)
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    source: &Path,
    ce: &str,
    kmax: usize,
    mcs_bound: usize,
    unroll_bound: u32,
    format: Format,
    domain: (i64, i64),
) -> anyhow::Result<()> {
    if domain.0 > domain.1 {
        bail!("empty domain [{}, {}]", domain.0, domain.1);
    }
    let text = fs::read_to_string(source).with_context(|| format!("reading {}", source.display()))?;
    let program = parse(&text)?;
    let program = unroll(&program, unroll_bound);
    let ce = read_ce(ce)?;
    let config = LocConfig {
        k_max: kmax,
        mcs_bound,
        solver: SolverConfig {
            default_domain: domain,
            ..SolverConfig::default()
        },
    };
    let report = locfaults::<i64>(&program, &ce, &config)?;
    info!(
        "{} entries, {} deviation checks, {} pruned",
        report.entries.len(),
        report.stats.correct_calls,
        report.stats.pruned
    );
    match format {
        Format::Json => print!("{}", render_json(&report)),
        Format::Text => print!("{}", render_text(&report)),
    }
    Ok(())
}

fn cmd_bench(
    filter: Option<&str>,
    corpus: Option<&Path>,
    fixtures: Option<&Path>,
    update: bool,
) -> anyhow::Result<bool> {
    let default_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let entries = match corpus {
        Some(dir) => load_dir(dir)?,
        None => programs(),
    };
    let fixtures = fixtures
        .map(Path::to_path_buf)
        .unwrap_or_else(|| corpus.unwrap_or(&default_dir).join("fixtures"));
    let config = BenchConfig::default();
    let mut runs = Vec::new();
    let mut ok = true;
    for entry in entries.iter().filter(|e| filter.is_none_or(|f| e.name.contains(f))) {
        let run = run_entry(entry, &config)?;
        match check_fixture(&run, &fixtures, update) {
            Ok(()) => {}
            Err(e @ BenchError::FixtureMismatch(..)) => {
                eprintln!("{e}");
                ok = false;
            }
            Err(e) => return Err(e.into()),
        }
        runs.push(run);
    }
    print!("{}", summary_table(&runs));
    Ok(ok)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<LocError>() {
        return match e {
            LocError::NotACounterExample | LocError::PreconditionViolated => 2,
            _ => 1,
        };
    }
    if err.downcast_ref::<ParseError>().is_some() {
        return 3;
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            source,
            ce,
            kmax,
            mcs_bound,
            unroll,
            format,
            domain_lo,
            domain_hi,
        } => cmd_run(&source, &ce, kmax, mcs_bound, unroll, format, (domain_lo, domain_hi)).map(|_| true),
        Command::Bench {
            filter,
            corpus,
            fixtures,
            update,
        } => cmd_bench(filter.as_deref(), corpus.as_deref(), fixtures.as_deref(), update),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
