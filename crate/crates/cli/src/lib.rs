//! `tulap` command line: release a noisy count once, then run tests,
//! intervals and confidence distributions on the stored release.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tulap_core::fmt::{format_f64, to_json_string};
use tulap_core::intervals::{
    ci_approx_umpu, ci_bonferroni, ci_lower, ci_umau, ci_upper, confidence_distribution, IntervalResult,
};
use tulap_core::nonparametric::{median_test, sign_test, Alternative, PairedSample, TestOutcome, TwoSample};
use tulap_core::simulation::{manifest, simulate, write_csv, BaselineVariance, Method, SimConfig};
use tulap_core::two_sided::{
    approx_pvalue, approx_test_vector, bonferroni_test_vector, umau_pvalue, umpu_test_vector,
};
use tulap_core::{
    decide, privatize, test_vector_one_sided, ump_pvalue, NullKind, PmfVector, PrivacyParams,
    PrivateSummary, Side,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const RAW_WARNING: &str = "raw-count mode: the decision itself is the private release; \
                           repeated calls on the same data spend additional privacy budget";

#[derive(Debug, Parser)]
#[command(name = "tulap", version, about = "Differentially private inference for binomial counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Release Z = x + Tulap noise.
    Privatize(PrivatizeArgs),
    /// p-value and decision for a stored release.
    Test(TestArgs),
    /// Confidence interval for theta from a stored release.
    Ci(CiArgs),
    /// Confidence distribution on a grid, as CSV.
    Confdist(ConfdistArgs),
    /// Private sign test on paired data.
    SignTest(SignTestArgs),
    /// Private median test on two samples.
    MedianTest(MedianTestArgs),
    /// Power, size and interval simulations.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct PrivatizeArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    /// Where to store the release.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace an existing release at `--out`.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct SummaryArgs {
    /// Release file written by `privatize`, or the released value itself.
    #[arg(long, allow_hyphen_values = true)]
    summary: String,
    /// Sample size, for an inline release.
    #[arg(long)]
    n: Option<u64>,
    /// For an inline release.
    #[arg(long)]
    epsilon: Option<f64>,
    /// For an inline release; defaults to 0.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestSide {
    Greater,
    Less,
    Bonferroni,
    UmpuApprox,
    Umau,
}

#[derive(Debug, Args)]
struct TestArgs {
    /// Release file, or the released value itself.
    #[arg(long, required_unless_present = "x", conflicts_with = "x", allow_hyphen_values = true)]
    summary: Option<String>,
    /// Raw count; the randomized decision is drawn directly from it.
    #[arg(long)]
    x: Option<u64>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    theta0: f64,
    #[arg(long, value_enum)]
    side: TestSide,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Required with `--x`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CiKind {
    Lower,
    Upper,
    Bonferroni,
    Approx,
    Umau,
}

#[derive(Debug, Args)]
struct CiArgs {
    #[command(flatten)]
    summary: SummaryArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum)]
    kind: CiKind,
}

#[derive(Debug, Args)]
struct ConfdistArgs {
    #[command(flatten)]
    summary: SummaryArgs,
    /// Number of equally spaced points on [0, 1].
    #[arg(long, default_value_t = 101)]
    grid_size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlternativeArg {
    Greater,
    Less,
    TwoSided,
}

impl From<AlternativeArg> for Alternative {
    fn from(a: AlternativeArg) -> Self {
        match a {
            AlternativeArg::Greater => Alternative::Greater,
            AlternativeArg::Less => Alternative::Less,
            AlternativeArg::TwoSided => Alternative::TwoSided,
        }
    }
}

#[derive(Debug, Args)]
struct NoiseArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, value_enum, default_value = "two-sided")]
    alternative: AlternativeArg,
    #[arg(long)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SignTestArgs {
    /// CSV with a header and two numeric columns.
    #[arg(long)]
    input: PathBuf,
    /// Null value of P(x > y).
    #[arg(long, default_value_t = 0.5)]
    theta0: f64,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Debug, Args)]
struct MedianTestArgs {
    /// One numeric column.
    #[arg(long)]
    xs: PathBuf,
    /// One numeric column.
    #[arg(long)]
    ys: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    UmpLeft,
    UmpRight,
    Umpu,
    ApproxUmpu,
    Bonferroni,
    BaselineNormal,
    NonPrivate,
    Umau,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::UmpLeft => Method::UmpLeft,
            MethodArg::UmpRight => Method::UmpRight,
            MethodArg::Umpu => Method::Umpu,
            MethodArg::ApproxUmpu => Method::ApproxUmpu,
            MethodArg::Bonferroni => Method::Bonferroni,
            MethodArg::BaselineNormal => Method::BaselineNormal,
            MethodArg::NonPrivate => Method::NonPrivate,
            MethodArg::Umau => Method::Umau,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VarianceArg {
    NullPlugIn,
    Conservative,
}

fn parse_figure(s: &str) -> Result<u8, String> {
    match s {
        "power" => Ok(1),
        "widths" => Ok(7),
        _ => match s.parse::<u8>() {
            Ok(k @ 1..=8) => Ok(k),
            _ => Err(format!("expected 1 to 8, `power` or `widths`, got `{s}`")),
        },
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Preset design: 1 to 8, `power` (= 1) or `widths` (= 7).
    #[arg(long, value_parser = parse_figure)]
    figure: u8,
    #[arg(long, value_delimiter = ',')]
    n: Vec<u64>,
    #[arg(long, value_delimiter = ',')]
    theta0: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    theta: Vec<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    #[arg(long, value_enum)]
    baseline_variance: Option<VarianceArg>,
    #[arg(long)]
    seed: u64,
    /// CSV destination; the run manifest goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Validation(String),
    Convergence(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Convergence(m) | CliError::Io(m) => m,
        }
    }
}

impl From<tulap_core::Error> for CliError {
    fn from(e: tulap_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Convergence(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
    exit_code: i32,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

/// Release file contents: the summary plus provenance.
#[derive(Debug, Serialize, Deserialize)]
struct StoredSummary {
    #[serde(flatten)]
    summary: PrivateSummary,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    version: Option<String>,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status. Output goes to standard output, errors to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = match Cli::try_parse_from(argv) {
        Ok(cli) => dispatch(cli.command, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            Err(CliError::Usage(e.to_string().trim_end().to_string()))
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let report = ErrorReport {
                error: ErrorBody {
                    kind: e.kind(),
                    message: e.message(),
                    exit_code: e.code(),
                },
            };
            let text = to_json_string(&report).unwrap_or_else(|_| format!("{{\"error\": {:?}}}", e.message()));
            let _ = writeln!(err, "{text}");
            e.code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Privatize(a) => cmd_privatize(a, out),
        Command::Test(a) => cmd_test(a, out, err),
        Command::Ci(a) => cmd_ci(a, out),
        Command::Confdist(a) => cmd_confdist(a, out),
        Command::SignTest(a) => cmd_sign_test(a, out),
        Command::MedianTest(a) => cmd_median_test(a, out),
        Command::Simulate(a) => cmd_simulate(a, out, err),
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = to_json_string(value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_privatize(a: PrivatizeArgs, out: &mut dyn Write) -> CliResult<()> {
    let privacy = PrivacyParams::new(a.epsilon, a.delta)?;
    if let Some(path) = &a.out {
        if path.exists() && !a.force {
            return Err(CliError::Validation(format!(
                "{} already holds a release; a second release spends more privacy budget (use --force to replace it)",
                path.display()
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let stored = StoredSummary {
        summary: privatize(a.x, a.n, &privacy, &mut rng)?,
        seed: Some(a.seed),
        version: Some(VERSION.to_string()),
    };
    let text = to_json_string(&stored).map_err(|e| CliError::Io(e.to_string()))?;
    if let Some(path) = &a.out {
        fs::write(path, format!("{text}\n"))?;
    }
    writeln!(out, "{text}")?;
    Ok(())
}

fn inline_privacy(epsilon: Option<f64>, delta: Option<f64>) -> CliResult<PrivacyParams> {
    let epsilon = epsilon.ok_or_else(|| CliError::Validation("--epsilon is required here".into()))?;
    Ok(PrivacyParams::new(epsilon, delta.unwrap_or(0.0))?)
}

fn load_summary(s: &SummaryArgs) -> CliResult<StoredSummary> {
    let path = Path::new(&s.summary);
    if path.exists() {
        if s.n.is_some() || s.epsilon.is_some() || s.delta.is_some() {
            return Err(CliError::Validation(
                "--n, --epsilon and --delta apply only to an inline release".into(),
            ));
        }
        let text = fs::read_to_string(path)?;
        let stored: StoredSummary = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: malformed release: {e}", path.display())))?;
        // Re-derive b and q so a hand-edited file cannot disagree with epsilon.
        let p = stored.summary.privacy;
        let privacy = PrivacyParams::new(p.epsilon, p.delta)?;
        return Ok(StoredSummary {
            summary: PrivateSummary { privacy, ..stored.summary },
            ..stored
        });
    }
    let z: f64 = s.summary.parse().map_err(|_| {
        CliError::Io(format!("{}: no such file, and not a number", s.summary))
    })?;
    let n = s.n.ok_or_else(|| CliError::Validation("--n is required with an inline release".into()))?;
    Ok(StoredSummary {
        summary: PrivateSummary {
            z,
            n,
            privacy: inline_privacy(s.epsilon, s.delta)?,
            null_kind: NullKind::Binomial,
        },
        seed: None,
        version: None,
    })
}

fn null_pmf(summary: &PrivateSummary, theta0: f64) -> CliResult<PmfVector> {
    Ok(match summary.null_kind {
        NullKind::Binomial => PmfVector::binomial(summary.n, theta0)?,
        NullKind::Hypergeometric => PmfVector::hypergeometric(summary.n)?,
    })
}

#[derive(Serialize)]
struct TestReport {
    side: &'static str,
    theta0: f64,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_value: Option<f64>,
    reject: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    rejection_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<u64>,
    n: u64,
    epsilon: f64,
    delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<&'static str>,
}

fn side_name(side: TestSide) -> &'static str {
    match side {
        TestSide::Greater => "greater",
        TestSide::Less => "less",
        TestSide::Bonferroni => "bonferroni",
        TestSide::UmpuApprox => "umpu-approx",
        TestSide::Umau => "umau",
    }
}

fn cmd_test(a: TestArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(CliError::Validation(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    if let Some(x) = a.x {
        return test_raw(&a, x, out, err);
    }
    let stored = load_summary(&SummaryArgs {
        summary: a.summary.clone().expect("clap requires --summary without --x"),
        n: a.n,
        epsilon: a.epsilon,
        delta: a.delta,
    })?;
    let s = stored.summary;
    let pmf = null_pmf(&s, a.theta0)?;
    let p_value = match a.side {
        TestSide::Greater => ump_pvalue(s.z, s.n, a.theta0, &s.privacy, Side::Greater, Some(&pmf))?,
        TestSide::Less => ump_pvalue(s.z, s.n, a.theta0, &s.privacy, Side::Less, Some(&pmf))?,
        TestSide::Bonferroni => {
            let p = ump_pvalue(s.z, s.n, a.theta0, &s.privacy, Side::Greater, Some(&pmf))?;
            (2.0 * p.min(1.0 - p)).min(1.0)
        }
        TestSide::UmpuApprox => approx_pvalue(s.z, s.n, a.theta0, &s.privacy, Some(&pmf))?,
        TestSide::Umau => {
            if s.null_kind != NullKind::Binomial {
                return Err(CliError::Validation("the umau p-value needs a binomial null".into()));
            }
            umau_pvalue(s.z, s.n, a.theta0, &s.privacy)?
        }
    };
    emit(
        out,
        &TestReport {
            side: side_name(a.side),
            theta0: a.theta0,
            alpha: a.alpha,
            p_value: Some(p_value),
            reject: p_value <= a.alpha,
            rejection_probability: None,
            z: Some(s.z),
            x: None,
            n: s.n,
            epsilon: s.privacy.epsilon,
            delta: s.privacy.delta,
            seed: stored.seed,
            version: VERSION,
            warning: None,
        },
    )
}

fn test_raw(a: &TestArgs, x: u64, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let seed = a
        .seed
        .ok_or_else(|| CliError::Validation("--seed is required with --x".into()))?;
    let n = a
        .n
        .ok_or_else(|| CliError::Validation("--n is required with --x".into()))?;
    let privacy = inline_privacy(a.epsilon, a.delta)?;
    writeln!(err, "warning: {RAW_WARNING}")?;
    let tv = match a.side {
        TestSide::Greater => test_vector_one_sided(n, a.theta0, a.alpha, &privacy, Side::Greater)?,
        TestSide::Less => test_vector_one_sided(n, a.theta0, a.alpha, &privacy, Side::Less)?,
        TestSide::Bonferroni => bonferroni_test_vector(n, a.theta0, a.alpha, &privacy)?,
        TestSide::UmpuApprox => approx_test_vector(n, a.theta0, a.alpha, &privacy)?,
        TestSide::Umau => umpu_test_vector(n, a.theta0, a.alpha, &privacy)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = decide(&tv, x, &mut rng)?;
    emit(
        out,
        &TestReport {
            side: side_name(a.side),
            theta0: a.theta0,
            alpha: a.alpha,
            p_value: None,
            reject: d.reject,
            rejection_probability: Some(d.rejection_probability),
            z: None,
            x: Some(x),
            n,
            epsilon: privacy.epsilon,
            delta: privacy.delta,
            seed: Some(seed),
            version: VERSION,
            warning: Some(RAW_WARNING),
        },
    )
}

fn binomial_release(s: &SummaryArgs) -> CliResult<StoredSummary> {
    let stored = load_summary(s)?;
    if stored.summary.null_kind != NullKind::Binomial {
        return Err(CliError::Validation(
            "intervals for theta need a binomial release".into(),
        ));
    }
    Ok(stored)
}

#[derive(Serialize)]
struct CiReport {
    #[serde(flatten)]
    interval: IntervalResult,
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    version: &'static str,
}

fn cmd_ci(a: CiArgs, out: &mut dyn Write) -> CliResult<()> {
    let stored = binomial_release(&a.summary)?;
    let s = &stored.summary;
    let f = match a.kind {
        CiKind::Lower => ci_lower,
        CiKind::Upper => ci_upper,
        CiKind::Bonferroni => ci_bonferroni,
        CiKind::Approx => ci_approx_umpu,
        CiKind::Umau => ci_umau,
    };
    let interval = f(s.z, s.n, a.alpha, &s.privacy)?;
    emit(
        out,
        &CiReport {
            interval,
            alpha: a.alpha,
            seed: stored.seed,
            version: VERSION,
        },
    )
}

fn cmd_confdist(a: ConfdistArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.grid_size < 2 {
        return Err(CliError::Validation("--grid-size must be at least 2".into()));
    }
    let stored = binomial_release(&a.summary)?;
    let s = &stored.summary;
    let last = (a.grid_size - 1) as f64;
    let grid: Vec<f64> = (0..a.grid_size).map(|i| i as f64 / last).collect();
    let cd = confidence_distribution(s.z, s.n, &s.privacy, &grid)?;
    let mut text = String::from("theta,h\n");
    for (t, h) in cd.grid.iter().zip(&cd.values) {
        text.push_str(&format!("{},{}\n", format_f64(*t), format_f64(*h)));
    }
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Numeric rows of a CSV file; a first row that does not parse is a header.
fn read_rows(path: &Path, columns: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        if record.len() != columns {
            return Err(CliError::Validation(format!(
                "{}: line {} has {} columns, expected {columns}",
                path.display(),
                i + 1,
                record.len()
            )));
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(CliError::Validation(format!(
                    "{}: line {} is not numeric",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct NonparametricReport {
    test: &'static str,
    #[serde(flatten)]
    outcome: TestOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tied_pairs: Option<u64>,
    seed: u64,
    version: &'static str,
}

fn cmd_sign_test(a: SignTestArgs, out: &mut dyn Write) -> CliResult<()> {
    let privacy = PrivacyParams::new(a.noise.epsilon, a.noise.delta)?;
    let pairs = read_rows(&a.input, 2)?.into_iter().map(|r| (r[0], r[1])).collect();
    let sample = PairedSample::new(pairs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.noise.seed);
    let outcome = sign_test(&sample, a.theta0, &privacy, &mut rng, a.noise.alternative.into())?;
    emit(
        out,
        &NonparametricReport {
            test: "sign",
            outcome,
            theta0: Some(a.theta0),
            tied_pairs: Some(sample.tied()),
            seed: a.noise.seed,
            version: VERSION,
        },
    )
}

fn cmd_median_test(a: MedianTestArgs, out: &mut dyn Write) -> CliResult<()> {
    let privacy = PrivacyParams::new(a.noise.epsilon, a.noise.delta)?;
    let column = |p: &Path| -> CliResult<Vec<f64>> { Ok(read_rows(p, 1)?.into_iter().map(|r| r[0]).collect()) };
    let ts = TwoSample::new(column(&a.xs)?, column(&a.ys)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.noise.seed);
    let outcome = median_test(&ts, &privacy, &mut rng, a.noise.alternative.into())?;
    emit(
        out,
        &NonparametricReport {
            test: "median",
            outcome,
            theta0: None,
            tied_pairs: None,
            seed: a.noise.seed,
            version: VERSION,
        },
    )
}

fn simulation_config(a: &SimulateArgs) -> CliResult<SimConfig> {
    let mut cfg = SimConfig::figure(a.figure)?;
    if !a.n.is_empty() {
        cfg.ns = a.n.clone();
    }
    if !a.theta0.is_empty() {
        cfg.theta0s = a.theta0.clone();
    }
    if !a.theta.is_empty() {
        cfg.thetas = a.theta.clone();
    }
    if let Some(e) = a.epsilon {
        cfg.epsilon = e;
    }
    if let Some(d) = a.delta {
        cfg.delta = d;
    }
    if let Some(al) = a.alpha {
        cfg.alpha = al;
    }
    if let Some(r) = a.replicates {
        cfg.replicates = r;
    }
    if !a.methods.is_empty() {
        cfg.methods = a.methods.iter().map(|&m| m.into()).collect();
    }
    if let Some(v) = a.baseline_variance {
        cfg.baseline_variance = match v {
            VarianceArg::NullPlugIn => BaselineVariance::NullPlugIn,
            VarianceArg::Conservative => BaselineVariance::Conservative,
        };
    }
    cfg.seed = a.seed;
    cfg.validate()?;
    Ok(cfg)
}

fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn cmd_simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let cfg = simulation_config(&a)?;
    let result = simulate(&cfg)?;
    match &a.out {
        Some(path) => {
            let mut buf = Vec::new();
            write_csv(&result, &mut buf)?;
            fs::write(path, buf)?;
            let mpath = manifest_path(path);
            let text = to_json_string(&manifest(&result)).map_err(|e| CliError::Io(e.to_string()))?;
            fs::write(&mpath, format!("{text}\n"))?;
            writeln!(err, "wrote {} rows to {} and manifest {}", result.rows.len(), path.display(), mpath.display())?;
        }
        None => write_csv(&result, out)?,
    }
    Ok(())
}
