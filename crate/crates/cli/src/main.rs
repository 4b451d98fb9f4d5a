//! `swapkey`: verification suite and seeded Monte Carlo campaigns.
//!
//! Exit status: 0 success, 1 internal or verification failure, 2 every session
//! of the campaign aborted on detection, 3 invalid arguments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use swapkey::campaign::{
    run_campaign_with_transcripts, write_campaign, write_sweep, write_transcripts, CampaignStats,
};
use swapkey::{
    run_campaign, run_sweep, verify, AttackError, AttackModel, CampaignSpec, ConfigError,
    OutputFormat, SweepSpec,
};

const EXIT_FAILURE: u8 = 1;
const EXIT_ALL_ABORTED: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "swapkey",
    version,
    about = "Entanglement-swapping key distribution simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the label algebra against the statevector oracle exhaustively.
    Verify,
    /// Run a campaign of sessions and report key-rate statistics.
    Run(CampaignArgs),
    /// Run a campaign under an eavesdropper and report detection statistics.
    Attack(CampaignArgs),
    /// Empirical detection probability against the number of checked rounds.
    Sweep {
        #[command(flatten)]
        campaign: CampaignArgs,
        /// Numbers of checked rounds to evaluate.
        #[arg(long = "k", value_delimiter = ',', default_values_t = [0u32, 1, 2, 4, 8])]
        k_values: Vec<u32>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    None,
    Passive,
    Entangle,
    Mitm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct CampaignArgs {
    /// Sessions to run (trials per k for `sweep`).
    #[arg(long, default_value_t = 100)]
    sessions: usize,
    /// Rounds of four particles per session.
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Probability that a round is sacrificed as a check round.
    #[arg(long, default_value_t = 0.2)]
    check_fraction: f64,
    #[arg(long, value_enum, default_value_t = AttackArg::None)]
    attack: AttackArg,
    /// Overlap ⟨α|β⟩ of Eve's ancillas for `--attack entangle`.
    #[arg(long)]
    overlap: Option<f64>,
    /// Master seed; session seeds are derived from it.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    parallel: usize,
    /// Write every session's classical transcript here as JSON lines.
    #[arg(long)]
    dump_transcript: Option<PathBuf>,
}

impl CampaignArgs {
    fn attack(&self) -> Result<AttackModel, ConfigError> {
        let attack = match self.attack {
            AttackArg::None => AttackModel::None,
            AttackArg::Passive => AttackModel::PassiveGuess,
            AttackArg::Entangle => AttackModel::EntangleSource {
                overlap: self.overlap.unwrap_or(0.0),
            },
            AttackArg::Mitm => AttackModel::ManInTheMiddle,
        };
        if self.overlap.is_some() && attack.overlap().is_none() {
            return Err(AttackError::OverlapNotApplicable(attack.name()).into());
        }
        attack.validate()?;
        Ok(attack)
    }

    fn spec(&self) -> Result<CampaignSpec, ConfigError> {
        let spec = CampaignSpec {
            sessions: self.sessions,
            rounds: self.rounds,
            check_fraction: self.check_fraction,
            attack: self.attack()?,
            master_seed: self.seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn format(&self) -> OutputFormat {
        match self.format {
            FormatArg::Json => OutputFormat::JsonLines,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Invalid(anyhow::Error),
    Internal(anyhow::Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Invalid(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn thread_pool(parallel: usize) -> anyhow::Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(parallel)
        .build()
        .context("building worker pool")
}

fn cmd_verify() -> u8 {
    let outcomes = verify::run_all();
    let mut failed = 0;
    for outcome in &outcomes {
        println!("{outcome}");
        if !outcome.passed() {
            failed += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed == 0 {
        0
    } else {
        EXIT_FAILURE
    }
}

fn summarize(stats: &CampaignStats) {
    let a = &stats.aggregate;
    eprintln!(
        "{} sessions x {} rounds, attack {}: key rate {:.4} ± {:.4} bits/round, abort rate {:.4}, check match rate {:.4} ± {:.4}",
        a.sessions,
        a.rounds / a.sessions.max(1),
        a.attack,
        a.key_rate.value,
        a.key_rate.half_width,
        a.abort_rate.value,
        a.check_match_rate.value,
        a.check_match_rate.half_width,
    );
    if a.attack.is_active() {
        eprintln!(
            "eve full-round guess rate {:.4} ± {:.4}, known-bit fraction {:.4}, cross-side match rate {:.4}",
            a.eve_full_round_rate.value, a.eve_full_round_rate.half_width, a.known_bit_fraction, a.cross_side_match_rate.value,
        );
    }
}

fn cmd_campaign(args: &CampaignArgs, require_attack: bool) -> Result<u8, Failure> {
    let spec = args.spec()?;
    if require_attack && !spec.attack.is_active() {
        return Err(ConfigError::AttackRequired.into());
    }
    let pool = thread_pool(args.parallel)?;
    let stats = match &args.dump_transcript {
        Some(path) => {
            let (stats, transcripts) = pool.install(|| run_campaign_with_transcripts(&spec))?;
            let mut out = open_output(Some(path))?;
            write_transcripts(&mut out, &transcripts).context("writing transcripts")?;
            out.flush().context("writing transcripts")?;
            stats
        }
        None => pool.install(|| run_campaign(&spec))?,
    };
    let mut out = open_output(args.out.as_deref())?;
    write_campaign(&mut out, &stats, args.format()).context("writing campaign records")?;
    out.flush().context("writing campaign records")?;
    summarize(&stats);
    Ok(if stats.aggregate.all_aborted() {
        EXIT_ALL_ABORTED
    } else {
        0
    })
}

fn cmd_sweep(args: &CampaignArgs, k_values: &[u32]) -> Result<u8, Failure> {
    let spec = SweepSpec {
        attack: args.attack()?,
        k_values: k_values.to_vec(),
        trials: args.sessions,
        master_seed: args.seed,
    };
    spec.validate()?;
    let pool = thread_pool(args.parallel)?;
    let rows = pool.install(|| run_sweep(&spec))?;
    let mut out = open_output(args.out.as_deref())?;
    write_sweep(&mut out, &rows, args.format()).context("writing sweep table")?;
    out.flush().context("writing sweep table")?;
    for r in &rows {
        eprintln!(
            "k={:<3} detected {:.4} ± {:.4} (analytic {:.4})",
            r.k, r.empirical.value, r.empirical.half_width, r.analytic
        );
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INVALID } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Verify => Ok(cmd_verify()),
        Command::Run(args) => cmd_campaign(args, false),
        Command::Attack(args) => cmd_campaign(args, true),
        Command::Sweep { campaign, k_values } => cmd_sweep(campaign, k_values),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
