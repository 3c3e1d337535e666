//! `groupcast`: build, run, verify, and map compound secure groupcast
//! schemes from the command line.
//!
//! Exit codes: 0 on success, 1 when a verification or decode check fails,
//! 2 for invalid arguments, unbuildable configurations, I/O problems, and
//! enumerations that exceed the budget.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use groupcast::field::{smallest_prime_at_least, FieldElement, PrimeModulus};
use groupcast::region::{self, rational_label};
use groupcast::scheme::{self, QualifiedSet, Scheme, SchemeParams};
use groupcast::sim;
use groupcast::verify::{
    verify_scheme_linear, verify_scheme_with_budget, VerificationReport,
};
use groupcast::Rational;

#[derive(Parser)]
#[command(
    name = "groupcast",
    version,
    about = "Key assignment schemes for selected broadcasting: generate, run, verify, and map the storage/bandwidth region"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scheme, derive keys from a seed, and write the artifacts.
    Gen(GenArgs),
    /// Run one broadcast session against a stored scheme.
    Send(SendArgs),
    /// Check a stored scheme's correctness and security exactly.
    Verify(VerifyArgs),
    /// Scan the (alpha, beta) capacity region on a rational grid.
    Region(RegionArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeName {
    /// Banded keys, one broadcast symbol: (alpha, beta) = (N, 1).
    #[value(name = "min-bandwidth")]
    MinBandwidth,
    /// One key symbol per message symbol: (alpha, beta) = (1, min(N, K-N+1)).
    #[value(name = "min-storage")]
    MinStorage,
    /// One private pad per receiver: (alpha, beta) = (1, N).
    #[value(name = "independent")]
    Independent,
    /// One shared pad per qualified set: (alpha, beta) = (C(K-1, N-1), 1).
    #[value(name = "combinatorial")]
    Combinatorial,
    /// Hand-crafted 3-of-5 scheme with average bandwidth 29/10.
    #[value(name = "n3k5")]
    N3K5,
    /// Hand-crafted 2-of-4 scheme with joint key entropy 5/2 per symbol.
    #[value(name = "n2k4-joint")]
    N2K4Joint,
}

#[derive(Args)]
struct GenArgs {
    /// Which construction to build.
    #[arg(value_enum)]
    scheme: SchemeName,
    /// Qualified-set size N (fixed by the scheme for n3k5 and n2k4-joint).
    #[arg(long)]
    n: Option<usize>,
    /// Number of receivers K (fixed by the scheme for n3k5 and n2k4-joint).
    #[arg(long)]
    k: Option<usize>,
    /// Field modulus; defaults to the smallest prime >= K.
    #[arg(long)]
    p: Option<u64>,
    /// Seed for the key material.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the scheme by its concatenated symmetrized form.
    #[arg(long)]
    symmetrize: bool,
    /// Directory for scheme.json and the per-receiver key files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SendArgs {
    /// Path to a scheme.json written by `gen`.
    #[arg(long)]
    scheme: PathBuf,
    /// Qualified set, e.g. --q 1,3.
    #[arg(long)]
    q: String,
    /// Message symbols, e.g. --message 2,0 (length must match the scheme).
    #[arg(long)]
    message: String,
    /// Seed for the key material (must match `gen` to reuse its keys).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append the session to this JSON-lines transcript file.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyModeArg {
    /// Exhaustive enumeration of the key/message space.
    Exact,
    /// Rank computations over the generator matrices.
    Rank,
    /// Run both and require them to agree check for check.
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Path to a scheme.json written by `gen`.
    #[arg(long)]
    scheme: PathBuf,
    #[arg(long, value_enum, default_value_t = VerifyModeArg::Both)]
    mode: VerifyModeArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Outcome budget for the exact mode.
    #[arg(long)]
    budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegionFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct RegionArgs {
    /// Qualified-set size N.
    #[arg(long)]
    n: usize,
    /// Number of receivers K.
    #[arg(long)]
    k: usize,
    /// Grid bounds and step; rationals like 1/4, 0.25, or 3.
    #[arg(long, default_value = "1/4")]
    alpha_min: String,
    /// Defaults to N + 2.
    #[arg(long)]
    alpha_max: Option<String>,
    #[arg(long, default_value = "1/4")]
    alpha_step: String,
    #[arg(long, default_value = "1/4")]
    beta_min: String,
    /// Defaults to N + 2.
    #[arg(long)]
    beta_max: Option<String>,
    #[arg(long, default_value = "1/4")]
    beta_step: String,
    #[arg(long, value_enum, default_value_t = RegionFormat::Csv)]
    format: RegionFormat,
    /// Write the scan here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Send(args) => cmd_send(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Region(args) => cmd_region(args),
    }
}

/// Parses "5/2", "0.25", or "3" into an exact rational.
fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    ensure!(!s.is_empty(), "empty rational");
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().with_context(|| format!("bad numerator in {s:?}"))?;
        let den: i64 = den.trim().parse().with_context(|| format!("bad denominator in {s:?}"))?;
        ensure!(den != 0, "zero denominator in {s:?}");
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        ensure!(
            !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()),
            "bad decimal part in {s:?}"
        );
        ensure!(frac.len() <= 12, "too many decimal digits in {s:?}");
        let negative = whole.starts_with('-');
        let whole = whole.trim_start_matches(['+', '-']);
        let whole: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().with_context(|| format!("bad integer part in {s:?}"))?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac: i64 = frac.parse()?;
        let magnitude = whole
            .checked_mul(scale)
            .and_then(|v| v.checked_add(frac))
            .with_context(|| format!("{s:?} is out of range"))?;
        let signed = if negative { -magnitude } else { magnitude };
        return Ok(Rational::new(signed, scale));
    }
    Ok(Rational::from_integer(
        s.parse::<i64>().with_context(|| format!("bad rational {s:?}"))?,
    ))
}

fn parse_index_list(text: &str, what: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .with_context(|| format!("bad {what} entry {part:?}"))
        })
        .collect()
}

fn symbols_label(symbols: &[FieldElement]) -> String {
    let values: Vec<String> = symbols.iter().map(|e| e.value().to_string()).collect();
    format!("[{}]", values.join(", "))
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let (fixed, label): (Option<(usize, usize)>, &str) = match args.scheme {
        SchemeName::N3K5 => (Some((3, 5)), "n3k5"),
        SchemeName::N2K4Joint => (Some((2, 4)), "n2k4-joint"),
        SchemeName::MinBandwidth => (None, "min-bandwidth"),
        SchemeName::MinStorage => (None, "min-storage"),
        SchemeName::Independent => (None, "independent"),
        SchemeName::Combinatorial => (None, "combinatorial"),
    };
    let (n, k) = match fixed {
        Some((fn_, fk)) => {
            if let Some(n) = args.n {
                ensure!(n == fn_, "{label} has N = {fn_} (got --n {n})");
            }
            if let Some(k) = args.k {
                ensure!(k == fk, "{label} has K = {fk} (got --k {k})");
            }
            (fn_, fk)
        }
        None => {
            let n = args.n.context("--n is required for this scheme")?;
            let k = args.k.context("--k is required for this scheme")?;
            (n, k)
        }
    };
    let p = args.p.unwrap_or_else(|| smallest_prime_at_least(k as u64));
    let modulus = PrimeModulus::new(p)?;
    let params = SchemeParams::new(n, k, modulus)?;
    let mut built = match args.scheme {
        SchemeName::MinBandwidth => scheme::min_bandwidth(params)?,
        SchemeName::MinStorage => scheme::min_storage(params)?,
        SchemeName::Independent => scheme::independent_keys(params)?,
        SchemeName::Combinatorial => scheme::combinatorial(params)?,
        SchemeName::N3K5 => scheme::n3k5(modulus)?,
        SchemeName::N2K4Joint => scheme::n2k4_joint(modulus)?,
    };
    if args.symmetrize {
        built = scheme::symmetrize(&built)?;
    }

    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let session = sim::setup(&built, args.seed)?;
    let key_files = session.write_key_files(&args.out)?;
    let scheme_path = args.out.join("scheme.json");
    fs::write(&scheme_path, built.to_json())
        .with_context(|| format!("cannot write {}", scheme_path.display()))?;

    let all: Vec<usize> = (1..=built.params.receivers).collect();
    let joint_key_rank = built.stacked_generators(&all)?.rank();
    println!(
        "config: scheme={label} N={n} K={k} p={p} seed={} symmetrize={} out={}",
        args.seed,
        args.symmetrize,
        args.out.display()
    );
    println!(
        "alpha={} beta={} beta-average={} message-len={} joint-key-entropy={}",
        rational_label(&built.storage_per_message()),
        rational_label(&built.bandwidth_worst()),
        rational_label(&built.bandwidth_average()),
        built.message_len,
        joint_key_rank
    );
    println!(
        "wrote {} and {} key files",
        scheme_path.display(),
        key_files.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_scheme(path: &PathBuf) -> Result<Scheme> {
    let json = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let scheme = Scheme::from_json(&json)?;
    Ok(scheme)
}

fn cmd_send(args: SendArgs) -> Result<ExitCode> {
    let scheme = load_scheme(&args.scheme)?;
    let q = QualifiedSet::new(parse_index_list(&args.q, "qualified set")?)?;
    let raw = parse_index_list(&args.message, "message")?;
    ensure!(
        raw.len() == scheme.message_len,
        "message must have {} symbols, got {}",
        scheme.message_len,
        raw.len()
    );
    let message: Vec<FieldElement> = raw
        .iter()
        .map(|&v| scheme.params.modulus.element(v as u64))
        .collect();

    let mut session = sim::setup(&scheme, args.seed)?;
    let entry = session.run(&q, &message)?;
    println!("broadcast X{} = {}", entry.qualified, symbols_label(&entry.broadcast.symbols));
    let mut all_match = true;
    for outcome in &entry.decodes {
        let verdict = if outcome.matches { "MATCH" } else { "MISMATCH" };
        all_match &= outcome.matches;
        println!(
            "receiver {}: decoded {} {}",
            outcome.receiver,
            symbols_label(&outcome.decoded),
            verdict
        );
    }
    for view in &entry.eavesdroppers {
        println!(
            "excluded {}: sees only its key {}",
            view.receiver,
            symbols_label(&view.key)
        );
    }
    if let Some(path) = &args.transcript {
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        writeln!(file, "{}", entry.to_json_line())?;
    }
    Ok(if all_match {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn emit(text: String, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let scheme = load_scheme(&args.scheme)?;
    let budget = args
        .budget
        .unwrap_or(groupcast::entropy::DEFAULT_ENUMERATION_BUDGET);
    let reports: Vec<(&str, VerificationReport)> = match args.mode {
        VerifyModeArg::Exact => {
            vec![("exhaustive", verify_scheme_with_budget(&scheme, budget)?)]
        }
        VerifyModeArg::Rank => vec![("linear", verify_scheme_linear(&scheme)?)],
        VerifyModeArg::Both => {
            let exact = verify_scheme_with_budget(&scheme, budget)?;
            let rank = verify_scheme_linear(&scheme)?;
            if exact.checks != rank.checks {
                eprintln!("error: the exhaustive and rank verifiers disagree");
                return Ok(ExitCode::from(1));
            }
            vec![("exhaustive", exact), ("linear", rank)]
        }
    };

    let passed = reports.iter().all(|(_, r)| r.passed);
    let text = match args.format {
        ReportFormat::Text => {
            let mut out = String::new();
            for (name, report) in &reports {
                out.push_str(&report.render_text());
                if reports.len() > 1 {
                    out.push_str(&format!(
                        "({name} path: {} checks)\n",
                        report.checks.len()
                    ));
                }
            }
            if reports.len() > 1 {
                out.push_str("both verifier paths agree\n");
            }
            out
        }
        ReportFormat::Json => {
            if reports.len() == 1 {
                let mut s = reports[0].1.to_json();
                s.push('\n');
                s
            } else {
                let value = serde_json::json!({
                    "agree": true,
                    "reports": reports
                        .iter()
                        .map(|(name, r)| serde_json::json!({
                            "path": name,
                            "report": r.to_json_value(),
                        }))
                        .collect::<Vec<_>>(),
                });
                let mut s = serde_json::to_string_pretty(&value)?;
                s.push('\n');
                s
            }
        }
    };
    emit(text, args.out.as_ref())?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_region(args: RegionArgs) -> Result<ExitCode> {
    let default_max = Rational::from_integer(args.n as i64 + 2);
    let alpha_min = parse_rational(&args.alpha_min)?;
    let alpha_max = args
        .alpha_max
        .as_deref()
        .map(parse_rational)
        .transpose()?
        .unwrap_or(default_max);
    let alpha_step = parse_rational(&args.alpha_step)?;
    let beta_min = parse_rational(&args.beta_min)?;
    let beta_max = args
        .beta_max
        .as_deref()
        .map(parse_rational)
        .transpose()?
        .unwrap_or(default_max);
    let beta_step = parse_rational(&args.beta_step)?;

    let alphas = region::rational_grid(alpha_min, alpha_max, alpha_step)?;
    let betas = region::rational_grid(beta_min, beta_max, beta_step)?;
    let rows = region::scan_region(args.n, args.k, &alphas, &betas)?;

    let text = match args.format {
        RegionFormat::Csv => region::scan_to_csv(&rows),
        RegionFormat::Json => {
            let value: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    serde_json::json!({
                        "alpha": rational_label(&row.alpha),
                        "beta": rational_label(&row.beta),
                        "status": row.status.name(),
                        "witness": row.witness,
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&value)?;
            s.push('\n');
            s
        }
    };
    emit(text, args.out.as_ref())?;
    Ok(ExitCode::SUCCESS)
}
