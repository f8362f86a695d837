//! Command-line harness for evaluating mutant reduction strategies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mutred_core::{Error, Result};

mod config;
mod evaluate;
mod gen;
mod oracle;
mod rank;
mod report;
mod sweep;
mod workbench;

use config::{
    default_indicators, default_ratios, parse_indicator_list, parse_ratio_list, ConfigFile,
    ExperimentConfig, SuiteMode, DEFAULT_ES_BASELINE_REPS, DEFAULT_REPS, DEFAULT_SEED,
};

#[derive(Parser)]
#[command(
    name = "mutred",
    version,
    about = "Evaluate mutant reduction strategies on kill/coverage matrices",
    after_help = "Exit codes: 0 success, 2 input error, 3 infeasible-only run, 4 resource guard."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MatrixArgs {
    /// Kill matrix CSV (header `mutant_id,<test ids>`, cells 0/1).
    #[arg(long)]
    kill: Option<PathBuf>,
    /// Coverage matrix CSV with the same ids. Defaults to the kill matrix
    /// (an upper-bound approximation; a warning is emitted).
    #[arg(long)]
    coverage: Option<PathBuf>,
    /// Operator CSV (header `mutant_id,operator`), required by cos and by
    /// operator-based pipeline steps.
    #[arg(long)]
    operators: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    matrices: MatrixArgs,
    /// Repetitions per strategy.
    #[arg(long)]
    reps: Option<usize>,
    /// Root seed; every random draw derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per CPU). Outputs do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Redraw chains per strategy instead of sharing them across strategies
    /// within a repetition.
    #[arg(long)]
    unpaired: bool,
    /// JSON config file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute indicators for each strategy over seeded repetitions.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Strategy spec, repeatable: rms:n=10, cos:deny=A|B,n=10, sms,
        /// cms:n=10[,init=sms], pipe:[drop-largest;rms:n=10], fixed:m1|m2.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        /// Comma-separated indicator labels
        /// (MS,VMS,AVG_VMS,ES,RR,OP,EROP,NOP,ORACLE_OP).
        #[arg(long)]
        indicators: Option<String>,
        /// Base suite: full, even-thinned (delete the even-position tests,
        /// 0-based, keeping positions 1,3,5,...), or random-half=N.
        #[arg(long)]
        suite_mode: Option<String>,
        /// Fixed suite chain like `t1,t2,t3,t4;t1,t2;t1` used for every
        /// repetition instead of random half-sampling.
        #[arg(long)]
        chain: Option<String>,
        /// Random-baseline repetitions inside the ES indicator.
        #[arg(long)]
        es_baseline_reps: Option<usize>,
        /// Subset pairs sampled by NOP (default 100 * floor(log2 |suite|)).
        #[arg(long)]
        nop_pairs: Option<usize>,
    },
    /// Mean OP/EROP per strategy across a reduction-ratio grid.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Strategy family, repeatable: rms, cos[:deny=A|B],
        /// cms[:init=sms|kmeans++], sms. Default: rms, cms, sms.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
        /// Comma-separated reduction ratios in [0, 1). Default: 0 to 0.95
        /// in steps of 0.05.
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Scott-Knott ESD ranks per indicator from report CSVs.
    Rank {
        /// Report CSV produced by `evaluate`, repeatable.
        #[arg(long = "input")]
        inputs: Vec<PathBuf>,
        /// Significance level for the Scott-Knott split test.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Cohen's d below which adjacent groups merge.
        #[arg(long, default_value_t = 0.2)]
        d_threshold: f64,
        /// Apply ln(1+x) to samples before testing.
        #[arg(long)]
        sk_log1p: bool,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Exhaustive order-preservation oracle over every subset pair.
    Oracle {
        /// Kill matrix CSV.
        #[arg(long)]
        kill: PathBuf,
        /// Strategy spec for the selection (often fixed:...).
        #[arg(long)]
        selection: String,
        /// Refuse suites larger than this (the oracle is exponential).
        #[arg(long, default_value_t = 16)]
        max_n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write oracle.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic kill/coverage/operators fixture.
    Gen {
        #[arg(long)]
        mutants: usize,
        #[arg(long)]
        tests: usize,
        /// Probability that a test covers a mutant.
        #[arg(long, default_value_t = 0.8)]
        cover_density: f64,
        /// Probability that a covering test kills.
        #[arg(long, default_value_t = 0.5)]
        kill_given_cover: f64,
        /// Number of distinct operator labels (OP1..OPk).
        #[arg(long, default_value_t = 4)]
        operators_count: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load_config_file(path: &Option<PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(p) => ConfigFile::load(p),
        None => Ok(ConfigFile::default()),
    }
}

#[allow(clippy::too_many_arguments)]
fn resolve_experiment(
    run: &RunArgs,
    strategies: &[String],
    indicators: &Option<String>,
    suite_mode: &Option<String>,
    chain: &Option<String>,
    ratios: &Option<String>,
    es_baseline_reps: Option<usize>,
    nop_pairs: Option<usize>,
) -> Result<ExperimentConfig> {
    let file = load_config_file(&run.config)?;
    let kill_path = run
        .matrices
        .kill
        .clone()
        .or(file.kill_path)
        .ok_or_else(|| Error::input("a kill matrix is required (--kill or config)"))?;
    let strategies = if strategies.is_empty() {
        file.strategies.unwrap_or_default()
    } else {
        strategies.to_vec()
    };
    let indicators = match indicators {
        Some(text) => parse_indicator_list(text)?,
        None => match &file.indicators {
            Some(list) => parse_indicator_list(&list.join(","))?,
            None => default_indicators(),
        },
    };
    let suite_mode: SuiteMode = match suite_mode.as_ref().or(file.suite_mode.as_ref()) {
        Some(text) => text.parse()?,
        None => SuiteMode::Full,
    };
    let ratios = match ratios {
        Some(text) => parse_ratio_list(text)?,
        None => file.ratios.unwrap_or_else(default_ratios),
    };
    Ok(ExperimentConfig {
        kill_path,
        coverage_path: run.matrices.coverage.clone().or(file.coverage_path),
        operators_path: run.matrices.operators.clone().or(file.operators_path),
        strategies,
        reps: run.reps.or(file.reps).unwrap_or(DEFAULT_REPS),
        seed: run.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        suite_mode,
        chain: chain.clone().or(file.chain),
        ratios,
        indicators,
        output_dir: run
            .out
            .clone()
            .or(file.output_dir)
            .unwrap_or_else(|| PathBuf::from("out")),
        unpaired: run.unpaired || file.unpaired.unwrap_or(false),
        es_baseline_reps: es_baseline_reps
            .or(file.es_baseline_reps)
            .unwrap_or(DEFAULT_ES_BASELINE_REPS),
        nop_pairs: nop_pairs.or(file.nop_pairs),
        workers: run.workers.or(file.workers),
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate {
            run,
            strategies,
            indicators,
            suite_mode,
            chain,
            es_baseline_reps,
            nop_pairs,
        } => {
            let cfg = resolve_experiment(
                &run,
                &strategies,
                &indicators,
                &suite_mode,
                &chain,
                &None,
                es_baseline_reps,
                nop_pairs,
            )?;
            evaluate::run(&cfg)
        }
        Command::Sweep {
            run,
            strategies,
            ratios,
        } => {
            let strategies = if strategies.is_empty() {
                vec!["rms".to_string(), "cms".to_string(), "sms".to_string()]
            } else {
                strategies
            };
            let cfg = resolve_experiment(
                &run,
                &strategies,
                &Some("op,erop".to_string()),
                &None,
                &None,
                &ratios,
                None,
                None,
            )?;
            let families = cfg
                .strategies
                .iter()
                .map(|s| s.parse())
                .collect::<Result<Vec<_>>>()?;
            sweep::run(&cfg, &families)
        }
        Command::Rank {
            inputs,
            alpha,
            d_threshold,
            sk_log1p,
            out,
        } => rank::run(&rank::RankArgsResolved {
            inputs,
            alpha,
            d_threshold,
            log1p: sk_log1p,
            output_dir: out,
        }),
        Command::Oracle {
            kill,
            selection,
            max_n,
            seed,
            out,
        } => oracle::run(&oracle::OracleArgsResolved {
            kill_path: kill,
            selection,
            max_n,
            seed,
            output_dir: out,
        }),
        Command::Gen {
            mutants,
            tests,
            cover_density,
            kill_given_cover,
            operators_count,
            seed,
            out,
        } => gen::run(&gen::GenArgsResolved {
            mutants,
            tests,
            cover_density,
            kill_given_cover,
            operator_count: operators_count,
            seed,
            output_dir: out,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Input(_) | Error::Domain(_) | Error::Parse { .. } => 2,
                Error::Infeasible(_) => 3,
                Error::Resource(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}
