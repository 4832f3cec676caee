//! Command-line front end: five subcommands covering the law tables, the
//! renewal oracles, Monte Carlo runs, growth diagnostics, and the named
//! verification pipelines.
//!
//! Conventions shared by every command:
//!
//! * deterministic output given the full flag set — seeds are explicit,
//!   nothing reads the clock for content (wall time appears only as a
//!   timing field in the manifest);
//! * CSV files use LF newlines, one header row, and 17-significant-digit
//!   floats (enough to round-trip f64 exactly);
//! * every file is written atomically (same-directory temp + rename);
//! * `manifest.json` names every file a run produced;
//! * exit codes: 0 success, 1 usage/configuration, 2 numeric or
//!   self-check failure, 3 verification failure.
//!
//! The `BIRKHOFF_LAB_THREADS` environment variable supplies the default
//! `--workers` for `simulate`.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::growth::{self, NormSeq, DEFAULT_L_GRID, DEFAULT_RHO_GRID};
use crate::law::{ExcursionLaw, LawSpec, DEFAULT_NORMALIZER_PRECISION};
use crate::output::{atomic_write, fmt_f64_17, histogram_svg};
use crate::renewal::{composition_oracle, RenewalTable};
use crate::simulate::{
    self, default_workers, MarkLaw, RatioSampleSet, Scenario, ScenarioConfig, StartState,
};
use crate::verify::{self, NamedCheck};

/// Entry point used by the binary: parses, dispatches, and maps errors to
/// the exit-code convention.  Never panics on user input.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version arrive as "errors" from clap but are
            // successful interactions; real parse errors are usage errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::DivergingSeries(_)
        | Error::InvalidWindow(_)
        | Error::RangeRestriction(_)
        | Error::MalformedInput(_)
        | Error::OutOfHorizon { .. } => 1,
        Error::BudgetExceeded(_)
        | Error::SelfCheck(_)
        | Error::UndefinedRatio(_)
        | Error::Io(_) => 2,
    }
}

#[derive(Parser)]
#[command(
    name = "birkhoff-lab",
    version,
    about = "Excursion laws, renewal oracles, Birkhoff-sum simulation, and growth diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate an excursion law: pmf, tail, and hazard per length.
    Law(LawArgs),
    /// Build the renewal table and its derived distributions.
    Renewal(RenewalArgs),
    /// Run a Monte Carlo scenario and record the normalized-sum samples.
    Simulate(SimulateArgs),
    /// Diagnose the growth class of a normalizing sequence.
    Growth(GrowthArgs),
    /// Run a named verification pipeline at desk scale.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    LogSquared,
    LogSquaredEvenOnly,
    Power,
}

#[derive(Args)]
struct LawArgs {
    /// Which excursion law to tabulate.
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Power-law exponent (required for --kind power, must exceed 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Largest excursion length tabulated.
    #[arg(long, default_value_t = 1000)]
    nmax: u64,
    /// Normalizer certification target (at most 1e-6).
    #[arg(long, default_value_t = DEFAULT_NORMALIZER_PRECISION)]
    precision: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct RenewalArgs {
    /// Renewal table horizon (the build is O(nmax^2)).
    #[arg(long, default_value_t = 10_000)]
    nmax: u64,
    /// Horizons n for heights-<n>.csv and windows.csv rows.
    #[arg(long, value_delimiter = ',')]
    heights: Vec<u64>,
    /// Window exponents beta for windows.csv.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5])]
    betas: Vec<f64>,
    /// Cross-check u_s against exhaustive composition enumeration for
    /// s <= min(nmax, 30); exits nonzero on any mismatch.
    #[arg(long)]
    brute_check: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    Stretched,
    Degenerate,
    Decorated,
    Parity,
    IidGaussian,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::Stretched => Scenario::Stretched,
            ScenarioArg::Degenerate => Scenario::Degenerate,
            ScenarioArg::Decorated => Scenario::Decorated,
            ScenarioArg::Parity => Scenario::Parity,
            ScenarioArg::IidGaussian => Scenario::IidGaussian,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StartArg {
    P0,
    Q1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MarkLawArg {
    Uniform01,
    Gaussian01,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Stretching exponent in (0, 1); ignored by iid-gaussian.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Power-law exponent (degenerate scenario only).
    #[arg(long)]
    gamma: Option<f64>,
    /// Time horizon.
    #[arg(long)]
    n: u64,
    #[arg(long)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to BIRKHOFF_LAB_THREADS or 1.
    #[arg(long)]
    workers: Option<u64>,
    /// Starting state (parity scenario only).
    #[arg(long, value_enum, default_value_t = StartArg::P0)]
    start: StartArg,
    /// Mark distribution (decorated scenario only).
    #[arg(long, value_enum, default_value_t = MarkLawArg::Uniform01)]
    mark_law: MarkLawArg,
    /// Also write a histogram of the ratio values as a static SVG.
    #[arg(long)]
    svg: bool,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Stretched,
    Power,
    Exp,
    Parity,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GrowthSource {
    /// CSV of (n, log_B_n) rows, n = 1..=N in order; a header row is
    /// allowed.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Analytic family to generate instead of reading a file.
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
}

#[derive(Args)]
struct GrowthArgs {
    #[command(flatten)]
    source: GrowthSource,
    /// Sequence length for --family.
    #[arg(long = "N", default_value_t = 10_000)]
    n_max: u64,
    /// Stretching exponent for --family stretched/parity.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Polynomial exponent for --family power.
    #[arg(long, default_value_t = 2.0)]
    exponent: f64,
    /// Base for --family exp.
    #[arg(long, default_value_t = 2.0)]
    base: f64,
    /// Subexponentiality tolerance grid.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_RHO_GRID)]
    rho_grid: Vec<f64>,
    /// Jump-factor grid for violation densities (each entry > 1).
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_L_GRID)]
    l_grid: Vec<f64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: distrib-h, limit-distrib-h, nagaev, theorem, degenerate,
    /// decorated, parity, clt.
    check: String,
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Law(args) => cmd_law(args),
        Command::Renewal(args) => cmd_renewal(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Growth(args) => cmd_growth(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

// ---------------------------------------------------------------- law --

fn cmd_law(args: LawArgs) -> Result<i32> {
    let started = Instant::now();
    let spec = match args.kind {
        KindArg::LogSquared => LawSpec {
            gamma: args.gamma,
            ..LawSpec::log_squared()
        },
        KindArg::LogSquaredEvenOnly => LawSpec {
            gamma: args.gamma,
            ..LawSpec::log_squared_even_only()
        },
        KindArg::Power => LawSpec::power_law(args.gamma.ok_or_else(|| {
            Error::InvalidConfig("--kind power requires --gamma".into())
        })?),
    };
    let law = ExcursionLaw::with_precision(spec, args.precision)?;
    if args.nmax < 2 {
        return Err(Error::InvalidConfig("--nmax must be at least 2".into()));
    }
    let mut csv = String::from("n,pmf,tail,hazard\n");
    for n in 2..=args.nmax {
        csv.push_str(&format!(
            "{n},{},{},{}\n",
            fmt_f64_17(law.pmf(n)),
            fmt_f64_17(law.tail(n)),
            fmt_f64_17(law.hazard(n))
        ));
    }
    let path = args.out.join("law.csv");
    atomic_write(&path, &csv)?;
    println!(
        "normalizer c = {} (certified within {:.3e}, {} series terms)",
        fmt_f64_17(law.c()),
        law.c_bound(),
        law.normalizer_terms()
    );
    let config = serde_json::json!({
        "command": "law",
        "kind": format!("{:?}", args.kind),
        "gamma": args.gamma,
        "nmax": args.nmax,
        "precision": args.precision,
    });
    write_manifest(&args.out, config, 0, 1, started, &[path])?;
    println!("wrote law.csv ({} rows)", args.nmax - 1);
    Ok(0)
}

// ------------------------------------------------------------ renewal --

fn cmd_renewal(args: RenewalArgs) -> Result<i32> {
    let started = Instant::now();
    let law = Arc::new(ExcursionLaw::new(LawSpec::log_squared())?);
    let table = RenewalTable::build(law, args.nmax)?;

    // Self-check before any file is written: the renewal mass identity
    // must hold at every horizon the table covers.
    let defect = table.max_completeness_defect();
    if defect > 1e-9 {
        return Err(Error::SelfCheck(format!(
            "completeness defect {defect:.3e} exceeds 1e-9"
        )));
    }

    if args.brute_check {
        let cap = args.nmax.min(30);
        for s in 0..=cap {
            let brute = composition_oracle(table.law(), s);
            let fast = table.u(s)?;
            if (brute - fast).abs() > 1e-12 * brute.max(1e-300) {
                return Err(Error::SelfCheck(format!(
                    "composition oracle mismatch at s = {s}: {brute} vs {fast}"
                )));
            }
        }
        println!("composition oracle matches u_s for s <= {cap}");
    }

    let mut files = Vec::new();

    let mut csv = String::from("s,u_s\n");
    for s in 0..=args.nmax {
        csv.push_str(&format!("{s},{}\n", fmt_f64_17(table.u(s)?)));
    }
    let path = args.out.join("renewal.csv");
    atomic_write(&path, &csv)?;
    files.push(path);

    let heights = if args.heights.is_empty() {
        vec![args.nmax]
    } else {
        args.heights.clone()
    };
    for &n in &heights {
        let dist = table.height_distribution(n)?;
        let mut csv = String::from("k,prob\n");
        for k in 0..=n {
            csv.push_str(&format!("{k},{}\n", fmt_f64_17(dist.prob(k))));
        }
        let path = args.out.join(format!("heights-{n}.csv"));
        atomic_write(&path, &csv)?;
        files.push(path);
    }

    let mut csv = String::from("s,ratio\n");
    for s in nagaev_grid(args.nmax) {
        csv.push_str(&format!("{s},{}\n", fmt_f64_17(table.nagaev_ratio(s)?)));
    }
    let path = args.out.join("nagaev.csv");
    atomic_write(&path, &csv)?;
    files.push(path);

    let mut csv = String::from("n,beta,mass\n");
    for &beta in &args.betas {
        for &n in &heights {
            csv.push_str(&format!(
                "{n},{},{}\n",
                fmt_f64_17(beta),
                fmt_f64_17(table.window_mass(n, beta)?)
            ));
        }
    }
    let path = args.out.join("windows.csv");
    atomic_write(&path, &csv)?;
    files.push(path);

    let config = serde_json::json!({
        "command": "renewal",
        "nmax": args.nmax,
        "heights": heights,
        "betas": args.betas,
        "brute_check": args.brute_check,
    });
    write_manifest(&args.out, config, 0, 1, started, &files)?;
    println!(
        "wrote {} files; completeness defect {defect:.3e}",
        files.len() + 1
    );
    Ok(0)
}

/// Decades within the table plus the horizon itself.
fn nagaev_grid(nmax: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = std::iter::successors(Some(10u64), |s| s.checked_mul(10))
        .take_while(|&s| s < nmax)
        .collect();
    grid.push(nmax);
    grid
}

// ----------------------------------------------------------- simulate --

fn cmd_simulate(args: SimulateArgs) -> Result<i32> {
    let started = Instant::now();
    let workers = args.workers.unwrap_or_else(default_workers);
    let config = ScenarioConfig {
        scenario: args.scenario.into(),
        alpha: args.alpha,
        gamma: args.gamma,
        n: args.n,
        samples: args.samples,
        seed: args.seed,
        workers,
        start: match args.start {
            StartArg::P0 => StartState::P0,
            StartArg::Q1 => StartState::Q1,
        },
        mark_law: match args.mark_law {
            MarkLawArg::Uniform01 => MarkLaw::Uniform01,
            MarkLawArg::Gaussian01 => MarkLaw::Gaussian01,
        },
    };
    let run = simulate::run(&config)?;

    let mut files = Vec::new();
    let path = args.out.join("samples.csv");
    atomic_write(&path, &samples_csv(&run))?;
    files.push(path);

    if args.svg {
        let svg = histogram_svg(
            &run.ratio_values(),
            40,
            &format!("normalized ratios, {:?}, n = {}", config.scenario, config.n),
        );
        let path = args.out.join("samples-histogram.svg");
        atomic_write(&path, &svg)?;
        files.push(path);
    }

    let manifest_config = serde_json::to_value(&config)
        .map_err(|e| Error::InvalidConfig(format!("config serialization failed: {e}")))?;
    let mut extra = serde_json::Map::new();
    extra.insert(
        "normalization_logmag".to_string(),
        serde_json::json!(run.normalization_logmag),
    );
    write_manifest_with(
        &args.out,
        manifest_config,
        config.seed,
        config.workers,
        started,
        &files,
        extra,
    )?;
    println!(
        "wrote samples.csv ({} records, normalization logmag {})",
        run.records.len(),
        run.normalization_logmag
    );
    Ok(0)
}

fn samples_csv(run: &RatioSampleSet) -> String {
    let mut csv = String::from("sample_id,ratio_sign,ratio_logmag,ratio_value,height,excursions,mark\n");
    for (i, r) in run.records.iter().enumerate() {
        let mark = match r.mark {
            Some(m) => fmt_f64_17(m),
            None => String::new(),
        };
        csv.push_str(&format!(
            "{i},{},{},{},{},{},{mark}\n",
            r.ratio.sign(),
            fmt_f64_17(r.ratio.logmag()),
            fmt_f64_17(r.ratio.value_clamped(1e300)),
            r.height,
            r.excursions
        ));
    }
    csv
}

// ------------------------------------------------------------- growth --

fn cmd_growth(args: GrowthArgs) -> Result<i32> {
    let started = Instant::now();
    let seq = match (&args.source.input, args.source.family) {
        (Some(path), None) => parse_norm_csv(path)?,
        (None, Some(family)) => match family {
            FamilyArg::Stretched => NormSeq::stretched(args.alpha, args.n_max)?,
            FamilyArg::Power => NormSeq::power(args.exponent, args.n_max)?,
            FamilyArg::Exp => NormSeq::exponential(args.base, args.n_max)?,
            FamilyArg::Parity => NormSeq::parity(args.alpha, args.n_max)?,
        },
        // clap's group(required, !multiple) makes these unreachable, but
        // the dispatch must not panic if it is ever bypassed.
        _ => return Err(Error::InvalidConfig("need exactly one of --input/--family".into())),
    };
    let report = growth::growth_report(&seq, &args.rho_grid, &args.l_grid)?;
    let path = args.out.join("growth-report.json");
    atomic_write(&path, &report.to_json())?;
    for verdict in &report.verdicts {
        println!("verdict: {verdict}");
    }
    let config = serde_json::json!({
        "command": "growth",
        "input": args.source.input.as_ref().map(|p| p.display().to_string()),
        "family": args.source.family.map(|f| format!("{f:?}")),
        "n_max": report.n_max,
        "alpha": args.alpha,
        "exponent": args.exponent,
        "base": args.base,
        "rho_grid": args.rho_grid,
        "l_grid": args.l_grid,
    });
    write_manifest(&args.out, config, 0, 1, started, &[path])?;
    Ok(0)
}

/// Reads a (n, log_B_n) CSV: rows must cover n = 1..=N in ascending
/// order; one optional header row is tolerated.
fn parse_norm_csv(path: &Path) -> Result<NormSeq> {
    let text = std::fs::read_to_string(path)?;
    let mut logs = Vec::new();
    let mut expected = 1u64;
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (a, b) = (fields.next(), fields.next());
        if fields.next().is_some() {
            return Err(Error::MalformedInput(format!(
                "line {}: expected exactly two columns (n, log_B_n)",
                line_no + 1
            )));
        }
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::MalformedInput(format!(
                "line {}: expected two comma-separated columns",
                line_no + 1
            )));
        };
        let n: u64 = match a.trim().parse() {
            Ok(n) => n,
            // A single leading non-numeric row is a header.
            Err(_) if line_no == 0 => continue,
            Err(_) => {
                return Err(Error::MalformedInput(format!(
                    "line {}: index {a:?} is not an integer",
                    line_no + 1
                )))
            }
        };
        let log_b: f64 = b.trim().parse().map_err(|_| {
            Error::MalformedInput(format!(
                "line {}: log-magnitude {b:?} is not a number",
                line_no + 1
            ))
        })?;
        if n != expected {
            return Err(Error::MalformedInput(format!(
                "line {}: index {n} out of order (expected {expected})",
                line_no + 1
            )));
        }
        expected += 1;
        logs.push(log_b);
    }
    if logs.is_empty() {
        return Err(Error::MalformedInput("no data rows".into()));
    }
    NormSeq::from_log_values(logs).map_err(|e| match e {
        Error::InvalidConfig(msg) => Error::MalformedInput(msg),
        other => other,
    })
}

// ------------------------------------------------------------- verify --

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let Some(check) = NamedCheck::parse(&args.check) else {
        eprintln!(
            "unknown check {:?}; known checks: {}",
            args.check,
            NamedCheck::all()
                .iter()
                .map(|c| c.name())
                .collect::<Vec<_>>()
                .join(", ")
        );
        return Ok(1);
    };
    let report = verify::run_check(check)?;
    println!("check {}: {}", report.check.name(), report.params);
    for sub in &report.subs {
        let flag = if sub.passed { "PASS" } else { "FAIL" };
        println!("  {flag} {} — {}", sub.name, sub.detail);
    }
    if report.passed() {
        println!("result: PASS");
        Ok(0)
    } else {
        println!("result: FAIL");
        Ok(3)
    }
}

// ------------------------------------------------------------ shared --

fn write_manifest(
    out: &Path,
    config: serde_json::Value,
    seed: u64,
    workers: u64,
    started: Instant,
    files: &[PathBuf],
) -> Result<()> {
    write_manifest_with(out, config, seed, workers, started, files, serde_json::Map::new())
}

fn write_manifest_with(
    out: &Path,
    config: serde_json::Value,
    seed: u64,
    workers: u64,
    started: Instant,
    files: &[PathBuf],
    extra: serde_json::Map<String, serde_json::Value>,
) -> Result<()> {
    let mut manifest = serde_json::Map::new();
    manifest.insert(
        "tool_version".into(),
        serde_json::json!(env!("CARGO_PKG_VERSION")),
    );
    manifest.insert("config".into(), config);
    manifest.insert("seed".into(), serde_json::json!(seed));
    manifest.insert("workers".into(), serde_json::json!(workers));
    manifest.insert(
        "wall_time_ms".into(),
        serde_json::json!(started.elapsed().as_millis() as u64),
    );
    let names: Vec<String> = files
        .iter()
        .map(|p| {
            p.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string())
        })
        .collect();
    manifest.insert("output_files".into(), serde_json::json!(names));
    for (k, v) in extra {
        manifest.insert(k, v);
    }
    let body = serde_json::to_string_pretty(&serde_json::Value::Object(manifest))
        .expect("manifest is valid JSON by construction");
    atomic_write(&out.join("manifest.json"), &format!("{body}\n"))?;
    Ok(())
}
