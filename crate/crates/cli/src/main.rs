mod parse;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hypid::charpoly::DEFAULT_EPS;
use hypid::golden::{all_pass, golden_corpus};
use hypid::harness::{
    limit_suite, limits_csv, parse_identities, run_case, run_check, AnyCase, LimitCase, Report,
    RunConfig,
};
use hypid::hyp::{eval_series, eval_unit, set_term_cap, HypSpec, DEFAULT_REL_TOL};
use hypid::{cx, Error};

#[derive(Parser, Debug)]
#[command(
    name = "hypid",
    version,
    about = "Check hypergeometric transformations with integral parameter differences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    draws: Option<usize>,
    /// Relative tolerance for checks, or the series tolerance for `eval`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Run configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate pFq(top; bottom | x), given as `a1,a2;b1,b2;x`.
    Eval {
        #[arg(allow_hyphen_values = true)]
        series: String,
    },
    /// Check identities on random draws, or on explicit cases.
    Check {
        /// Comma-separated identity ids, or `all`.
        #[arg(long)]
        identities: Option<String>,
        /// JSON-lines file of explicit cases.
        #[arg(long)]
        cases: Option<PathBuf>,
    },
    /// Perturbation studies of the characteristic polynomial roots.
    Limits {
        /// Random parameter sets per lemma.
        #[arg(long, default_value_t = 10)]
        sets: usize,
        /// Comma-separated perturbation sizes.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Run the fixed corpus of worked examples.
    Golden,
}

/// A usage or configuration error (exit code 2).
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = cli.draws {
        cfg.draws = d;
    }
    if let Some(t) = cli.tol {
        cfg.rel_tol = t;
    }
    cfg.apply_env()?;
    cfg.validate()?;
    Ok(cfg)
}

fn json_only(cli: &Cli, what: &str) -> Result<(), Failure> {
    if cli.format == Format::Csv {
        return Err(Failure(format!("{what} output is JSON only")));
    }
    Ok(())
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eval(cli: &Cli, series: &str) -> Result<bool, Failure> {
    json_only(cli, "eval")?;
    let args = parse::series_args(series).map_err(|e| Failure(format!("eval: {e}")))?;
    let mut cfg = RunConfig::default();
    cfg.apply_env()?;
    set_term_cap(cfg.term_cap);
    let spec = HypSpec::new(args.top, args.bottom);
    let tol = cli.tol.unwrap_or(DEFAULT_REL_TOL);
    let report = if args.x == cx(1.0) {
        eval_unit(&spec, tol)?
    } else {
        eval_series(&spec, args.x, tol)?
    };
    emit(
        cli,
        &format!(
            "{}\n",
            serde_json::to_string(&report).expect("report serializes")
        ),
    )?;
    Ok(report.converged)
}

fn read_cases(path: &PathBuf) -> Result<Vec<AnyCase>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure(format!("{} line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn check(cli: &Cli, identities: Option<&str>, cases: Option<&PathBuf>) -> Result<bool, Failure> {
    json_only(cli, "check")?;
    let mut cfg = config(cli)?;
    if let Some(ids) = identities {
        cfg.identities = parse_identities(ids)?;
    }
    let report = match cases {
        Some(path) => {
            set_term_cap(cfg.term_cap);
            let records = read_cases(path)?
                .iter()
                .enumerate()
                .map(|(i, c)| run_case(i, c))
                .collect();
            Report::from_records(records)
        }
        None => run_check(&cfg),
    };
    emit(cli, &report.to_json_lines())?;
    Ok(report.all_pass())
}

fn study_ok(c: &LimitCase) -> bool {
    c.outcome.as_ref().is_ok_and(|st| {
        let last = st.rows.last().map_or(f64::INFINITY, |r| r.match_error);
        last <= 1e-3 && (st.slope - 1.0).abs() <= 0.2 && st.ratio_rel_err <= 0.01
    })
}

fn limits(cli: &Cli, sets: usize, eps: Option<&[f64]>) -> Result<bool, Failure> {
    let cfg = config(cli)?;
    let eps = eps.unwrap_or(&DEFAULT_EPS);
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Failure("eps values must be positive".into()));
    }
    let cases = limit_suite(&cfg, sets, eps);
    let text = match cli.format {
        Format::Csv => limits_csv(&cases)?,
        Format::Json => cases
            .iter()
            .map(|c| serde_json::to_string(c).expect("study serializes") + "\n")
            .collect(),
    };
    emit(cli, &text)?;
    Ok(cases.iter().all(study_ok))
}

fn golden(cli: &Cli) -> Result<bool, Failure> {
    json_only(cli, "golden")?;
    let recs = golden_corpus();
    let mut text: String = recs
        .iter()
        .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
        .collect();
    let passed = recs
        .iter()
        .filter(|r| r.status == hypid::harness::Status::Pass)
        .count();
    text.push_str(
        &serde_json::json!({ "summary": { "count": recs.len(), "pass": passed } }).to_string(),
    );
    text.push('\n');
    emit(cli, &text)?;
    Ok(all_pass(&recs))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Eval { series } => eval(&cli, series),
        Command::Check { identities, cases } => check(&cli, identities.as_deref(), cases.as_ref()),
        Command::Limits { sets, eps } => limits(&cli, *sets, eps.as_deref()),
        Command::Golden => golden(&cli),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("hypid: {msg}");
            ExitCode::from(2)
        }
    }
}
