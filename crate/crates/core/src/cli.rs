//! Command-line front end.
//!
//! Every subcommand is a pure function of its arguments, its input bytes and
//! its seed. Results go to standard output (or `--output`), diagnostics to
//! standard error. Exit status: 0 on success, 1 on usage errors, 2 when the
//! input data is invalid.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::baselines::{auroc, compute_baselines, p_answering, DEFAULT_PENALTY};
use crate::copulas::{compare_copulas, mean_metrics, win_rates, ContingencyCounts, CopulaComparison};
use crate::curves::{iso_ri_curve, iso_score_curve, uniform_grid, CurvePoint, ScoreMetric};
use crate::error::Error;
use crate::estimator::{
    bootstrap_ci, counts_from_summary, estimate_ri, summarize_two_pass, tally, ConfidenceInterval,
    TwoPassSummary, DEFAULT_BOOTSTRAP, DEFAULT_LEVEL,
};
use crate::ingest::{
    join_passes, pairwise_accuracy_agreement, parse_records, units, write_records, Diagnostic,
    GradeLabel, JoinOptions, JoinedOutcome, Location, QuestionRecord, RecordErrors,
};
use crate::ranking::{stability_report, Covariates, ScoreMatrix, DEFAULT_RANDOM_DRAWS};
use crate::simulate::{
    refusal_sweep, sample_two_pass, subset_cv, Evaluation, LatentModel, Metric, MetricCv,
};

const ENV_LOG: &str = "RI_LOG";

#[derive(Debug, Parser)]
#[command(name = "refusal-index", version, about = "Knowledge-aware refusal metrics for two-pass evaluations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the Refusal Index, with a bootstrap interval when seeded
    Ri(RiArgs),
    /// C/A, F-score and weighted score
    Baselines(BaselinesArgs),
    /// AUROC of answering frequency against correctness
    Auroc(AurocArgs),
    /// Fit and compare Gaussian, Student-t, Clayton and Gumbel copulas
    FitCopulas(FitCopulasArgs),
    /// Iso-RI or iso-score accuracy-refusal curves
    Curves(CurvesArgs),
    /// Ranking stability across settings, raw and residualized
    Rank(RankArgs),
    /// Generate two-pass records from the latent Gaussian model
    Simulate(SimulateArgs),
    /// Simulated refusal-rate sweep at fixed latent correlation
    Sweep(SweepArgs),
    /// Coefficient of variation of each metric over random subsets
    SubsetCv(SubsetCvArgs),
    /// First-pass accuracy agreement between two settings
    Agreement(AgreementArgs),
    /// Check a record file and report every problem
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write results here instead of standard output
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Line-delimited JSON records; `-` reads standard input
    #[arg(long, value_name = "PATH")]
    input: Option<String>,
    /// Read records from standard input
    #[arg(long)]
    stdin: bool,
}

impl InputArgs {
    fn given(&self) -> bool {
        self.input.is_some() || self.stdin
    }
}

#[derive(Debug, Args)]
struct UnitArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    setting: Option<String>,
    /// Grade pass-2 refusals as incorrect instead of rejecting them
    #[arg(long)]
    coerce_pass2_refusal: bool,
}

#[derive(Debug, Args)]
struct RiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    unit: UnitArgs,
    /// Summary input instead of records: number of questions
    #[arg(long)]
    n: Option<u64>,
    /// Summary input: first-pass correct rate
    #[arg(long)]
    c1: Option<f64>,
    /// Summary input: first-pass refusal rate
    #[arg(long)]
    r: Option<f64>,
    /// Summary input: aggregated accuracy after the forced pass
    #[arg(long)]
    c2: Option<f64>,
    /// Bootstrap replicates (requires --seed)
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    /// Seed for the bootstrap; without it only the point estimate is reported
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct BaselinesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    unit: UnitArgs,
    /// Correct rate (instead of records)
    #[arg(long)]
    c: Option<f64>,
    /// Refusal rate (instead of records)
    #[arg(long)]
    r: Option<f64>,
    /// Penalty on wrong answers in the weighted score
    #[arg(long, default_value_t = DEFAULT_PENALTY, allow_negative_numbers = true)]
    p: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct AurocArgs {
    /// JSON lines with `n`, `n_refusal` and `correct` per question
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FitCopulasArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    unit: UnitArgs,
    /// Explicit table instead of records: answered and correct
    #[arg(long)]
    n00: Option<u64>,
    /// Answered and wrong
    #[arg(long)]
    n01: Option<u64>,
    /// Refused and correct when forced
    #[arg(long)]
    n10: Option<u64>,
    /// Refused and wrong when forced
    #[arg(long)]
    n11: Option<u64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct CurvesArgs {
    /// Latent-Gaussian curve of constant RI (needs --rho and --mu)
    #[arg(long, conflicts_with = "iso_score")]
    iso_ri: bool,
    /// Curve of constant heuristic score (needs --metric and --value)
    #[arg(long)]
    iso_score: bool,
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Accuracy with no refusals
    #[arg(long)]
    mu: Option<f64>,
    /// One of c/a, f-score, weighted
    #[arg(long)]
    metric: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    value: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PENALTY, allow_negative_numbers = true)]
    p: f64,
    /// Number of evenly spaced refusal rates on [0, 1]
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Two-pass records covering every model under every setting
    #[command(flatten)]
    input: InputArgs,
    /// Precomputed scores: JSON lines with `model`, `setting`, `metric`, `value`;
    /// must include the `correct` and `refusal` metrics
    #[arg(long, value_name = "PATH", conflicts_with_all = ["input", "stdin"])]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PENALTY, allow_negative_numbers = true)]
    p: f64,
    /// Uniform-noise matrices in the random baseline
    #[arg(long, default_value_t = DEFAULT_RANDOM_DRAWS)]
    draws: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    coerce_pass2_refusal: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    rho: f64,
    /// Pass-1 refusal rate
    #[arg(long)]
    refusal: f64,
    /// Aggregated error rate
    #[arg(long)]
    error: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, allow_negative_numbers = true)]
    rho: f64,
    /// Aggregated error rate shared by every setting
    #[arg(long)]
    mu: f64,
    /// Comma-separated refusal rates
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7")]
    rates: Vec<f64>,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PENALTY, allow_negative_numbers = true)]
    p: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct SubsetCvArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    unit: UnitArgs,
    /// Comma-separated subset sizes
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,500,1000,2000")]
    sizes: Vec<usize>,
    /// Subsets per size
    #[arg(long, default_value_t = 50)]
    k: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_PENALTY, allow_negative_numbers = true)]
    p: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct AgreementArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    setting_a: String,
    #[arg(long)]
    setting_b: String,
    #[arg(long)]
    coerce_pass2_refusal: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    coerce_pass2_refusal: bool,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(Error),
    Io(String),
    /// Output already written; only the exit status remains.
    Reported(i32),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<RecordErrors> for CliError {
    fn from(e: RecordErrors) -> Self {
        CliError::Data(Error::Records(e))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// One table cell; numbers keep full precision in CSV and four decimals in
/// tables.
#[derive(Debug, Clone)]
enum Cell {
    Text(String),
    Num(f64),
    Int(u64),
    Bool(bool),
    Missing,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        if x.is_nan() { Cell::Missing } else { Cell::Num(x) }
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::from)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => format!("{x}"),
            Cell::Int(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn table(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.4}"),
            Cell::Missing => "-".to_string(),
            other => other.csv(),
        }
    }
}

struct Section {
    title: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

impl Section {
    fn new(title: &'static str, header: &[&'static str]) -> Self {
        Section { title, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }
}

/// A command's result in JSON form plus a tabular view for CSV and tables.
struct Report {
    json: Value,
    sections: Vec<Section>,
}

impl Report {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Format::Csv => {
                let titled = self.sections.len() > 1;
                let blocks: Vec<String> = self
                    .sections
                    .iter()
                    .map(|sec| {
                        let mut out = String::new();
                        if titled {
                            out.push_str(&format!("# {}\n", sec.title));
                        }
                        out.push_str(&sec.header.join(","));
                        out.push('\n');
                        for row in &sec.rows {
                            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
                            out.push('\n');
                        }
                        out
                    })
                    .collect();
                blocks.join("\n")
            }
            Format::Table => {
                let blocks: Vec<String> = self.sections.iter().map(render_table).collect();
                blocks.join("\n")
            }
        }
    }
}

fn render_table(sec: &Section) -> String {
    let cells: Vec<Vec<String>> = sec.rows.iter().map(|r| r.iter().map(Cell::table).collect()).collect();
    let mut widths: Vec<usize> = sec.header.iter().map(|h| h.chars().count()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: &mut dyn Iterator<Item = &str>| -> String {
        let padded: Vec<String> =
            items.zip(&widths).map(|(s, &w)| format!("{s:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = format!("{}\n", sec.title);
    out.push_str(&line(&mut sec.header.iter().copied()));
    out.push_str(&line(&mut widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>().iter().map(String::as_str)));
    for row in &cells {
        out.push_str(&line(&mut row.iter().map(String::as_str)));
    }
    out
}

/// Runs the command line `argv` (program name first) against the process's
/// standard streams and returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(ENV_LOG, "warn"))
        .format_timestamp(None)
        .try_init();
    let stdin = io::stdin();
    let mut input = stdin.lock();
    run_with(argv, &mut input, &mut io::stdout().lock(), &mut io::stderr().lock())
}

/// [`run`] with explicit streams.
pub fn run_with<I, T>(argv: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match dispatch(cli.command, stdin, stdout, stderr) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
        Err(CliError::Data(Error::Records(errors))) => {
            for d in &errors.0 {
                let _ = writeln!(stderr, "{d}");
            }
            2
        }
        Err(CliError::Data(e)) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            2
        }
        Err(CliError::Io(msg)) => {
            let _ = writeln!(stderr, "error[io]: {msg}");
            2
        }
        Err(CliError::Reported(code)) => code,
    }
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let (report, out) = match command {
        Command::Ri(a) => (cmd_ri(&a, stdin)?, a.out),
        Command::Baselines(a) => (cmd_baselines(&a, stdin)?, a.out),
        Command::Auroc(a) => (cmd_auroc(&a, stdin)?, a.out),
        Command::FitCopulas(a) => (cmd_fit_copulas(&a, stdin)?, a.out),
        Command::Curves(a) => (cmd_curves(&a)?, a.out),
        Command::Rank(a) => (cmd_rank(&a, stdin)?, a.out),
        Command::Simulate(a) => return cmd_simulate(&a, stdout),
        Command::Sweep(a) => (cmd_sweep(&a)?, a.out),
        Command::SubsetCv(a) => (cmd_subset_cv(&a, stdin)?, a.out),
        Command::Agreement(a) => (cmd_agreement(&a, stdin)?, a.out),
        Command::Validate(a) => {
            let (report, problems) = cmd_validate(&a, stdin)?;
            for line in &problems {
                writeln!(stderr, "{line}")?;
            }
            emit(&report, &a.out, stdout)?;
            return if problems.is_empty() { Ok(()) } else { Err(CliError::Reported(2)) };
        }
    };
    emit(&report, &out, stdout)
}

fn emit(report: &Report, out: &OutputArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let text = report.render(out.format);
    match &out.output {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn require_seed(seed: Option<u64>, command: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::Usage(format!("`{command}` is stochastic and requires --seed")))
}

fn read_records(input: &InputArgs, stdin: &mut dyn BufRead) -> CliResult<Vec<QuestionRecord>> {
    match (input.input.as_deref(), input.stdin) {
        (Some(_), true) => usage("give either --input or --stdin, not both"),
        (None, false) => usage("no input: pass --input PATH, --input - or --stdin"),
        (Some("-"), false) | (None, true) => Ok(parse_records(stdin)?),
        (Some(path), false) => {
            let file = File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            Ok(parse_records(BufReader::new(file))?)
        }
    }
}

fn read_lines(input: &InputArgs, stdin: &mut dyn BufRead) -> CliResult<Vec<String>> {
    let reader: Box<dyn BufRead + '_> = match (input.input.as_deref(), input.stdin) {
        (Some(_), true) => return usage("give either --input or --stdin, not both"),
        (None, false) => return usage("no input: pass --input PATH, --input - or --stdin"),
        (Some("-"), false) | (None, true) => Box::new(stdin),
        (Some(path), false) => Box::new(BufReader::new(
            File::open(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?,
        )),
    };
    Ok(reader.lines().collect::<io::Result<_>>()?)
}

/// Units matching the optional filters, in order of first appearance.
fn selected_units(records: &[QuestionRecord], unit: &UnitArgs) -> CliResult<Vec<(String, String)>> {
    let chosen: Vec<_> = units(records)
        .into_iter()
        .filter(|(m, s)| {
            unit.model.as_ref().is_none_or(|x| x == m) && unit.setting.as_ref().is_none_or(|x| x == s)
        })
        .collect();
    if chosen.is_empty() {
        return Err(CliError::Data(Error::Empty("no records for the requested model and setting")));
    }
    Ok(chosen)
}

fn single_unit(records: &[QuestionRecord], unit: &UnitArgs) -> CliResult<(String, String)> {
    let mut chosen = selected_units(records, unit)?;
    if chosen.len() > 1 {
        let names: Vec<String> = chosen.iter().map(|(m, s)| format!("{m}/{s}")).collect();
        return usage(format!(
            "input holds several (model, setting) units; pick one with --model/--setting: {}",
            names.join(", ")
        ));
    }
    Ok(chosen.remove(0))
}

fn join(records: &[QuestionRecord], model: &str, setting: &str, coerce: bool) -> CliResult<Vec<JoinedOutcome>> {
    Ok(join_passes(records, model, setting, JoinOptions { coerce_pass2_refusal: coerce })?)
}

fn ci_json(ci: &Option<ConfidenceInterval>) -> Value {
    match ci {
        Some(ci) => json!({ "lo": ci.lo, "hi": ci.hi, "level": ci.level }),
        None => Value::Null,
    }
}

fn cmd_ri(a: &RiArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let summary_flags = [a.n.is_some(), a.c1.is_some(), a.r.is_some(), a.c2.is_some()];
    let from_summary = summary_flags.iter().any(|&f| f);
    if from_summary && a.input.given() {
        return usage("give either records (--input/--stdin) or a summary (--n --c1 --r --c2), not both");
    }
    if from_summary && !summary_flags.iter().all(|&f| f) {
        return usage("a summary needs all of --n, --c1, --r and --c2");
    }
    if a.bootstrap.is_some() && a.seed.is_none() {
        return usage("--bootstrap requires --seed");
    }
    let replicates = a.bootstrap.unwrap_or(DEFAULT_BOOTSTRAP);

    let (unit, summary, mut estimate, outcomes) = if from_summary {
        let s = TwoPassSummary::new(a.n.unwrap(), a.c1.unwrap(), a.r.unwrap(), a.c2.unwrap())?;
        let est = estimate_ri(&s)?;
        let outcomes = if est.degenerate { None } else { Some(outcomes_from_counts(&counts_from_summary(&s)?)) };
        (None, s, est, outcomes)
    } else {
        let records = read_records(&a.input, stdin)?;
        let (model, setting) = single_unit(&records, &a.unit)?;
        let outcomes = join(&records, &model, &setting, a.unit.coerce_pass2_refusal)?;
        let s = summarize_two_pass(&outcomes)?;
        let est = estimate_ri(&s)?;
        (Some((model, setting)), s, est, Some(outcomes))
    };
    if let Some(seed) = a.seed {
        estimate.ci = Some(match &outcomes {
            Some(o) => bootstrap_ci(o, replicates, a.level, seed)?,
            // every resample of a degenerate dataset is degenerate
            None => ConfidenceInterval { lo: 0.0, hi: 0.0, level: a.level },
        });
        log::info!("bootstrap with {replicates} replicates, seed {seed}");
    }

    let (model, setting) = match &unit {
        Some((m, s)) => (Value::from(m.as_str()), Value::from(s.as_str())),
        None => (Value::Null, Value::Null),
    };
    let json = json!({
        "model": model,
        "setting": setting,
        "n": summary.n,
        "c1": summary.c1,
        "r": summary.r,
        "c2": summary.c2,
        "rho": estimate.rho,
        "ri": estimate.ri,
        "degenerate": estimate.degenerate,
        "at_boundary": estimate.at_boundary,
        "ci": ci_json(&estimate.ci),
    });
    let mut sec = Section::new(
        "refusal index",
        &["model", "setting", "n", "c1", "r", "c2", "rho", "ri", "ci_lo", "ci_hi", "degenerate"],
    );
    let name = |v: &Value| v.as_str().map_or(Cell::Missing, Cell::from);
    sec.push(vec![
        name(&model),
        name(&setting),
        summary.n.into(),
        summary.c1.into(),
        summary.r.into(),
        summary.c2.into(),
        estimate.rho.into(),
        estimate.ri.into(),
        estimate.ci.map(|c| c.lo).into(),
        estimate.ci.map(|c| c.hi).into(),
        estimate.degenerate.into(),
    ]);
    Ok(Report { json, sections: vec![sec] })
}

/// Per-question outcomes reproducing a contingency table exactly.
fn outcomes_from_counts(c: &ContingencyCounts) -> Vec<JoinedOutcome> {
    use GradeLabel::{Correct, Incorrect, Refused};
    let cells = [
        (c.n00, Correct, None),
        (c.n01, Incorrect, None),
        (c.n10, Refused, Some(Correct)),
        (c.n11, Refused, Some(Incorrect)),
    ];
    let mut out = Vec::with_capacity(c.total() as usize);
    for (count, pass1, pass2) in cells {
        for _ in 0..count {
            out.push(JoinedOutcome::new(format!("q{}", out.len()), pass1, pass2));
        }
    }
    out
}

fn cmd_baselines(a: &BaselinesArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let mut sec = Section::new(
        "baselines",
        &["model", "setting", "correct", "refusal", "c_over_a", "f_score", "weighted", "p"],
    );
    let row = |model: Cell, setting: Cell, b: &crate::baselines::BaselineScores| {
        vec![model, setting, b.correct.into(), b.refusal.into(), b.c_over_a.into(), b.f_score.into(), b.weighted.into(), b.penalty_p.into()]
    };
    let json = match (a.c, a.r) {
        (Some(c), Some(r)) => {
            if a.input.given() {
                return usage("give either rates (--c --r) or records, not both");
            }
            let b = compute_baselines(c, r, a.p)?;
            sec.push(row(Cell::Missing, Cell::Missing, &b));
            serde_json::to_value(b).expect("scores serialize")
        }
        (None, None) => {
            let records = read_records(&a.input, stdin)?;
            let mut all = Vec::new();
            for (model, setting) in selected_units(&records, &a.unit)? {
                let outcomes = join(&records, &model, &setting, a.unit.coerce_pass2_refusal)?;
                let s = summarize_two_pass(&outcomes)?;
                let b = compute_baselines(s.c1, s.r, a.p)?;
                sec.push(row(model.clone().into(), setting.clone().into(), &b));
                let mut v = serde_json::to_value(b).expect("scores serialize");
                v["model"] = model.into();
                v["setting"] = setting.into();
                all.push(v);
            }
            Value::Array(all)
        }
        _ => return usage("--c and --r go together"),
    };
    Ok(Report { json, sections: vec![sec] })
}

#[derive(Debug, Deserialize)]
struct AnsweringSample {
    #[serde(default)]
    question_id: Option<String>,
    n: u64,
    n_refusal: u64,
    correct: bool,
}

fn cmd_auroc(a: &AurocArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let mut samples = Vec::new();
    let mut problems = Vec::new();
    for (i, line) in read_lines(&a.input, stdin)?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<AnsweringSample>(line) {
            Ok(s) => samples.push(s),
            Err(e) => problems.push(Diagnostic {
                location: Location::Line(i + 1),
                code: "malformed-line",
                message: e.to_string(),
            }),
        }
    }
    if !problems.is_empty() {
        return Err(RecordErrors(problems).into());
    }
    let counts: Vec<(u64, u64)> = samples.iter().map(|s| (s.n, s.n_refusal)).collect();
    let scores = p_answering(&counts)?;
    let labels: Vec<bool> = samples.iter().map(|s| s.correct).collect();
    let value = auroc(&scores, &labels)?;
    let correct = labels.iter().filter(|&&c| c).count();
    log::debug!("auroc over {} questions ({} with ids)", samples.len(), samples.iter().filter(|s| s.question_id.is_some()).count());
    let mut sec = Section::new("auroc", &["auroc", "questions", "correct", "incorrect"]);
    sec.push(vec![value.into(), samples.len().into(), correct.into(), (samples.len() - correct).into()]);
    Ok(Report {
        json: json!({
            "auroc": value,
            "questions": samples.len(),
            "correct": correct,
            "incorrect": samples.len() - correct,
        }),
        sections: vec![sec],
    })
}

fn cmd_fit_copulas(a: &FitCopulasArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let cells = [a.n00, a.n01, a.n10, a.n11];
    let mut units_out: Vec<(Option<(String, String)>, ContingencyCounts)> = Vec::new();
    if cells.iter().any(Option::is_some) {
        if a.input.given() {
            return usage("give either a table (--n00 --n01 --n10 --n11) or records, not both");
        }
        let [Some(n00), Some(n01), Some(n10), Some(n11)] = cells else {
            return usage("a table needs all of --n00, --n01, --n10 and --n11");
        };
        units_out.push((None, ContingencyCounts::new(n00, n01, n10, n11)));
    } else {
        let records = read_records(&a.input, stdin)?;
        for (model, setting) in selected_units(&records, &a.unit)? {
            let outcomes = join(&records, &model, &setting, a.unit.coerce_pass2_refusal)?;
            units_out.push((Some((model, setting)), tally(&outcomes)?.contingency()));
        }
    }

    let comparisons: Vec<CopulaComparison> = units_out.iter().map(|(_, c)| compare_copulas(c)).collect();
    let mut fits_sec = Section::new(
        "copula fits",
        &["model", "setting", "family", "params", "loglik", "aic", "bic", "at_boundary"],
    );
    let mut unit_json = Vec::new();
    for ((unit, counts), cmp) in units_out.iter().zip(&comparisons) {
        let (m, s) = match unit {
            Some((m, s)) => (Cell::from(m.as_str()), Cell::from(s.as_str())),
            None => (Cell::Missing, Cell::Missing),
        };
        for fit in &cmp.fits {
            let params: Vec<String> = fit.params.values().iter().map(|v| format!("{v}")).collect();
            fits_sec.push(vec![
                m.clone(),
                s.clone(),
                fit.family.name().into(),
                params.join(" ").into(),
                fit.loglik.into(),
                fit.aic.into(),
                fit.bic.into(),
                fit.at_boundary.into(),
            ]);
        }
        for (family, reason) in &cmp.failures {
            log::warn!("{family} fit failed: {reason}");
        }
        unit_json.push(json!({
            "model": unit.as_ref().map(|u| u.0.clone()),
            "setting": unit.as_ref().map(|u| u.1.clone()),
            "counts": counts,
            "fits": cmp.fits,
            "failures": cmp.failures.iter().map(|(f, r)| json!({"family": f, "reason": r})).collect::<Vec<_>>(),
        }));
    }

    let rates = win_rates(&comparisons)?;
    let mut win_sec = Section::new("gaussian win rates", &["versus", "loglik", "aic", "bic", "units"]);
    for w in &rates {
        win_sec.push(vec![w.versus.name().into(), w.loglik.into(), w.aic.into(), w.bic.into(), w.units.into()]);
    }
    let means = mean_metrics(&comparisons);
    let mut mean_sec = Section::new("mean criteria", &["family", "loglik", "aic", "bic"]);
    for (family, ll, aic, bic) in &means {
        mean_sec.push(vec![family.name().into(), (*ll).into(), (*aic).into(), (*bic).into()]);
    }
    Ok(Report {
        json: json!({
            "units": unit_json,
            "win_rates": rates,
            "mean": means.iter().map(|(f, ll, aic, bic)| json!({"family": f, "loglik": ll, "aic": aic, "bic": bic})).collect::<Vec<_>>(),
        }),
        sections: vec![fits_sec, win_sec, mean_sec],
    })
}

fn cmd_curves(a: &CurvesArgs) -> CliResult<Report> {
    if a.grid < 2 {
        return usage("--grid needs at least 2 points");
    }
    let grid = uniform_grid(a.grid);
    let (kind, points): (&str, Vec<CurvePoint>) = if a.iso_ri {
        let (Some(rho), Some(mu)) = (a.rho, a.mu) else {
            return usage("--iso-ri needs --rho and --mu");
        };
        ("iso-ri", iso_ri_curve(rho, mu, &grid)?)
    } else if a.iso_score {
        let (Some(metric), Some(value)) = (a.metric.as_deref(), a.value) else {
            return usage("--iso-score needs --metric and --value");
        };
        let metric: ScoreMetric = metric.parse().or_else(|e: Error| usage(e.to_string()))?;
        ("iso-score", iso_score_curve(metric, value, a.p, &grid)?)
    } else {
        return usage("choose --iso-ri or --iso-score");
    };
    let mut sec = Section::new("curve", &["r", "a", "feasible"]);
    for p in &points {
        sec.push(vec![p.r.into(), p.a.into(), p.feasible.into()]);
    }
    Ok(Report { json: json!({ "kind": kind, "points": points }), sections: vec![sec] })
}

#[derive(Debug, Deserialize)]
struct ScoreLine {
    model: String,
    setting: String,
    metric: String,
    value: f64,
}

/// Named metric matrices sharing model and setting order.
struct Matrices {
    models: Vec<String>,
    settings: Vec<String>,
    by_metric: Vec<(String, Vec<Vec<Option<f64>>>)>,
}

impl Matrices {
    fn new(cells: &[(String, String)]) -> Self {
        let mut models = Vec::new();
        let mut settings = Vec::new();
        for (m, s) in cells {
            if !models.contains(m) {
                models.push(m.clone());
            }
            if !settings.contains(s) {
                settings.push(s.clone());
            }
        }
        Matrices { models, settings, by_metric: Vec::new() }
    }

    fn set(&mut self, metric: &str, model: &str, setting: &str, value: f64) -> CliResult<()> {
        let i = self.models.iter().position(|m| m == model).expect("model registered");
        let j = self.settings.iter().position(|s| s == setting).expect("setting registered");
        let (n, k) = (self.models.len(), self.settings.len());
        let slot = match self.by_metric.iter().position(|(name, _)| name == metric) {
            Some(p) => p,
            None => {
                self.by_metric.push((metric.to_string(), vec![vec![None; k]; n]));
                self.by_metric.len() - 1
            }
        };
        let cell = &mut self.by_metric[slot].1[i][j];
        if cell.is_some() {
            return Err(Error::ShapeMismatch(format!("duplicate {metric} score for {model}/{setting}")).into());
        }
        *cell = Some(value);
        Ok(())
    }

    fn take(&mut self, metric: &str) -> CliResult<ScoreMatrix> {
        let Some(p) = self.by_metric.iter().position(|(name, _)| name == metric) else {
            return Err(Error::ShapeMismatch(format!("no `{metric}` scores")).into());
        };
        let (_, rows) = self.by_metric.remove(p);
        self.to_matrix(metric, rows)
    }

    fn to_matrix(&self, metric: &str, rows: Vec<Vec<Option<f64>>>) -> CliResult<ScoreMatrix> {
        let mut values = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (j, v) in row.into_iter().enumerate() {
                match v {
                    Some(v) => out.push(v),
                    None => {
                        return Err(Error::ShapeMismatch(format!(
                            "no {metric} score for {}/{}",
                            self.models[i], self.settings[j]
                        ))
                        .into())
                    }
                }
            }
            values.push(out);
        }
        Ok(ScoreMatrix::new(self.models.clone(), self.settings.clone(), values)?)
    }
}

fn cmd_rank(a: &RankArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let seed = require_seed(a.seed, "rank")?;
    let mut matrices = if let Some(path) = &a.scores {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut lines = Vec::new();
        let mut problems = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ScoreLine>(line) {
                Ok(l) => lines.push(l),
                Err(e) => problems.push(Diagnostic {
                    location: Location::Line(i + 1),
                    code: "malformed-line",
                    message: e.to_string(),
                }),
            }
        }
        if !problems.is_empty() {
            return Err(RecordErrors(problems).into());
        }
        let cells: Vec<_> = lines.iter().map(|l| (l.model.clone(), l.setting.clone())).collect();
        let mut m = Matrices::new(&cells);
        for l in &lines {
            m.set(&l.metric, &l.model, &l.setting, l.value)?;
        }
        m
    } else {
        let records = read_records(&a.input, stdin)?;
        let unit_list = units(&records);
        let mut m = Matrices::new(&unit_list);
        for (model, setting) in &unit_list {
            let outcomes = join(&records, model, setting, a.coerce_pass2_refusal)?;
            let eval = Evaluation::from_tally(&tally(&outcomes)?, a.p)?;
            for metric in Metric::ALL {
                let value = eval.metric(metric).ok_or_else(|| {
                    Error::Inconsistent(format!("{} undefined for {model}/{setting}", metric.name()))
                })?;
                m.set(metric.name(), model, setting, value)?;
            }
        }
        m
    };
    let correct = matrices.take(Metric::Correct.name())?;
    let refusal = matrices.take(Metric::Refusal.name())?;
    let mut named = vec![
        ("correct".to_string(), correct.clone()),
        ("refusal".to_string(), refusal.clone()),
    ];
    for (name, rows) in std::mem::take(&mut matrices.by_metric) {
        named.push((name.clone(), matrices.to_matrix(&name, rows)?));
    }
    let report = stability_report(&named, &Covariates { correct, refusal }, a.draws, seed)?;

    let mut sec = Section::new("ranking stability", &["metric", "mode", "kendalls_w", "winner_entropy"]);
    for mode in crate::ranking::ResidualMode::ALL {
        sec.push(vec![
            "random".into(),
            mode.name().into(),
            report.random.mean_w.into(),
            report.random.mean_entropy.into(),
        ]);
    }
    for row in &report.rows {
        sec.push(vec![row.metric.clone().into(), row.mode.name().into(), row.kendalls_w.into(), row.winner_entropy.into()]);
    }
    Ok(Report { json: serde_json::to_value(&report).expect("report serializes"), sections: vec![sec] })
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let seed = require_seed(a.seed, "simulate")?;
    let model = LatentModel::from_rates(a.rho, a.refusal, a.error)?;
    let records = sample_two_pass(&model, a.n, seed)?;
    match &a.output {
        Some(path) => write_records(io::BufWriter::new(File::create(path)?), &records)?,
        None => write_records(io::BufWriter::new(stdout), &records)?,
    }
    Ok(())
}

fn cv_rows(sec: &mut Section, label: Cell, cvs: &[MetricCv]) {
    for c in cvs {
        sec.push(vec![label.clone(), c.metric.name().into(), c.mean.into(), c.std.into(), c.cv.into(), c.unstable.into()]);
    }
}

fn cmd_sweep(a: &SweepArgs) -> CliResult<Report> {
    let seed = require_seed(a.seed, "sweep")?;
    let report = refusal_sweep(a.rho, a.mu, &a.rates, a.n, seed, a.p)?;
    let mut settings = Section::new(
        "settings",
        &["target_refusal", "c1", "r", "c2", "rho", "ri", "c_over_a", "f_score", "weighted"],
    );
    for s in &report.settings {
        let e = &s.evaluation;
        settings.push(vec![
            s.target_refusal.into(),
            e.summary.c1.into(),
            e.summary.r.into(),
            e.summary.c2.into(),
            e.estimate.rho.into(),
            e.estimate.ri.into(),
            e.baselines.c_over_a.into(),
            e.baselines.f_score.into(),
            e.baselines.weighted.into(),
        ]);
    }
    let mut cv = Section::new("coefficient of variation", &["scope", "metric", "mean", "std", "cv", "unstable"]);
    cv_rows(&mut cv, "settings".into(), &report.cv);
    Ok(Report { json: serde_json::to_value(&report).expect("report serializes"), sections: vec![settings, cv] })
}

fn cmd_subset_cv(a: &SubsetCvArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let seed = require_seed(a.seed, "subset-cv")?;
    let records = read_records(&a.input, stdin)?;
    let (model, setting) = single_unit(&records, &a.unit)?;
    let outcomes = join(&records, &model, &setting, a.unit.coerce_pass2_refusal)?;
    let rows = subset_cv(&outcomes, &a.sizes, a.k, seed, a.p)?;
    let mut sec = Section::new("subset cv", &["size", "metric", "mean", "std", "cv", "unstable"]);
    for row in &rows {
        cv_rows(&mut sec, row.size.into(), &row.cv);
    }
    Ok(Report {
        json: json!({ "model": model, "setting": setting, "k": a.k, "seed": seed, "sizes": rows }),
        sections: vec![sec],
    })
}

fn cmd_agreement(a: &AgreementArgs, stdin: &mut dyn BufRead) -> CliResult<Report> {
    let records = read_records(&a.input, stdin)?;
    let model = match &a.model {
        Some(m) => m.clone(),
        None => {
            let mut models: Vec<String> = units(&records).into_iter().map(|u| u.0).collect();
            models.dedup();
            let first = models.first().cloned();
            if models.iter().any(|m| Some(m) != first.as_ref()) {
                return usage("input holds several models; pick one with --model");
            }
            first.ok_or(CliError::Data(Error::Empty("no records")))?
        }
    };
    let outcomes_a = join(&records, &model, &a.setting_a, a.coerce_pass2_refusal)?;
    let outcomes_b = join(&records, &model, &a.setting_b, a.coerce_pass2_refusal)?;
    if outcomes_a.is_empty() || outcomes_b.is_empty() {
        return Err(Error::Empty("no records for one of the settings").into());
    }
    let agreement = pairwise_accuracy_agreement(&outcomes_a, &outcomes_b)
        .ok_or(Error::Empty("no question was answered under both settings"))?;
    let mut sec = Section::new("agreement", &["model", "setting_a", "setting_b", "agreement"]);
    sec.push(vec![model.clone().into(), a.setting_a.clone().into(), a.setting_b.clone().into(), agreement.into()]);
    Ok(Report {
        json: json!({ "model": model, "setting_a": a.setting_a, "setting_b": a.setting_b, "agreement": agreement }),
        sections: vec![sec],
    })
}

#[derive(Serialize)]
struct Problem {
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    question: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    setting: Option<String>,
    code: &'static str,
    message: String,
}

fn problem(d: &Diagnostic, unit: Option<&(String, String)>) -> Problem {
    let (line, question) = match &d.location {
        Location::Line(n) => (Some(*n), None),
        Location::Question(q) => (None, Some(q.clone())),
    };
    Problem {
        line,
        question,
        model: unit.map(|u| u.0.clone()),
        setting: unit.map(|u| u.1.clone()),
        code: d.code,
        message: d.message.clone(),
    }
}

/// Validation report and the diagnostic lines for standard error.
fn cmd_validate(a: &ValidateArgs, stdin: &mut dyn BufRead) -> CliResult<(Report, Vec<String>)> {
    let mut problems = Vec::new();
    let mut lines = Vec::new();
    let mut unit_rows = Vec::new();
    let mut sec = Section::new("units", &["model", "setting", "questions", "refused", "valid"]);
    let parsed = match read_records(&a.input, stdin) {
        Ok(r) => Some(r),
        Err(CliError::Data(Error::Records(errors))) => {
            for d in &errors.0 {
                lines.push(d.to_string());
                problems.push(problem(d, None));
            }
            None
        }
        Err(e) => return Err(e),
    };
    if let Some(records) = &parsed {
        for unit in units(records) {
            match join_passes(records, &unit.0, &unit.1, JoinOptions { coerce_pass2_refusal: a.coerce_pass2_refusal }) {
                Ok(outcomes) => {
                    let refused = outcomes.iter().filter(|o| o.refused()).count();
                    sec.push(vec![unit.0.clone().into(), unit.1.clone().into(), outcomes.len().into(), refused.into(), true.into()]);
                    unit_rows.push(json!({"model": unit.0, "setting": unit.1, "questions": outcomes.len(), "refused": refused, "valid": true}));
                }
                Err(errors) => {
                    for d in &errors.0 {
                        lines.push(format!("{}/{}: {d}", unit.0, unit.1));
                        problems.push(problem(d, Some(&unit)));
                    }
                    sec.push(vec![unit.0.clone().into(), unit.1.clone().into(), Cell::Missing, Cell::Missing, false.into()]);
                    unit_rows.push(json!({"model": unit.0, "setting": unit.1, "valid": false}));
                }
            }
        }
    }
    let mut err_sec = Section::new("problems", &["line", "question", "model", "setting", "code", "message"]);
    for p in &problems {
        err_sec.push(vec![
            p.line.map_or(Cell::Missing, Cell::from),
            p.question.clone().map_or(Cell::Missing, Cell::from),
            p.model.clone().map_or(Cell::Missing, Cell::from),
            p.setting.clone().map_or(Cell::Missing, Cell::from),
            p.code.into(),
            p.message.clone().into(),
        ]);
    }
    let json = json!({
        "valid": problems.is_empty(),
        "records": parsed.as_ref().map(Vec::len),
        "units": unit_rows,
        "problems": problems,
    });
    Ok((Report { json, sections: vec![sec, err_sec] }, lines))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str], input: &str) -> (i32, String, String) {
        let mut argv = vec!["refusal-index"];
        argv.extend_from_slice(args);
        let mut stdin = input.as_bytes();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(argv, &mut stdin, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn iso_ri_csv_first_row() {
        let (code, out, _) = run_str(&["curves", "--iso-ri", "--rho", "0.5", "--mu", "0.4", "--grid", "101", "--format", "csv"], "");
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "r,a,feasible");
        assert_eq!(lines[1], "0,0.4,true");
        assert_eq!(lines[101], "1,0,true");
        assert_eq!(lines.len(), 102);
    }

    #[test]
    fn unknown_subcommand_and_flag_are_usage_errors() {
        assert_eq!(run_str(&["frobnicate"], "").0, 1);
        assert_eq!(run_str(&["curves", "--bogus"], "").0, 1);
        assert_eq!(run_str(&[], "").0, 1);
        assert_eq!(run_str(&["--help"], "").0, 0);
    }

    #[test]
    fn stochastic_commands_need_a_seed() {
        let (code, _, err) = run_str(&["simulate", "--rho", "0.5", "--refusal", "0.3", "--error", "0.4", "--n", "10"], "");
        assert_eq!(code, 1);
        assert!(err.contains("--seed"));
        assert_eq!(run_str(&["sweep", "--rho", "0.5", "--mu", "0.7"], "").0, 1);
        assert_eq!(run_str(&["ri", "--n", "100", "--c1", "0.2", "--r", "0.5", "--c2", "0.3", "--bootstrap", "10"], "").0, 1);
    }

    #[test]
    fn ri_from_summary() {
        let (code, out, _) = run_str(&["ri", "--n", "1000", "--c1", "0.2", "--r", "0.5", "--c2", "0.3"], "");
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["n"], 1000);
        assert!(v["ci"].is_null());
        assert!(v["ri"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn data_errors_exit_two() {
        let input = "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"refused\"}\n";
        let (code, _, err) = run_str(&["ri", "--stdin"], input);
        assert_eq!(code, 2);
        assert!(err.contains("missing-pass-2"));
        let (code, _, err) = run_str(&["ri", "--stdin"], "not json\n");
        assert_eq!(code, 2);
        assert!(err.contains("LINE 1: malformed-line"));
    }

    #[test]
    fn validate_reports_and_exits() {
        let good = "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"correct\"}\n";
        let (code, out, _) = run_str(&["validate", "--stdin"], good);
        assert_eq!(code, 0);
        assert!(out.contains("\"valid\": true"));
        let bad = "{\"question_id\":\"q1\",\"model_id\":\"m\",\"setting_id\":\"s\",\"pass\":1,\"label\":\"maybe\"}\n";
        let (code, out, err) = run_str(&["validate", "--stdin"], bad);
        assert_eq!(code, 2);
        assert!(out.contains("unknown-label") && err.contains("unknown-label"));
    }

    #[test]
    fn table_output_aligns_columns() {
        let (code, out, _) = run_str(&["baselines", "--c", "0.34", "--r", "0.06", "--format", "table"], "");
        assert_eq!(code, 0);
        assert!(out.starts_with("baselines\nmodel"));
        assert!(out.contains("0.3617"));
    }
}
