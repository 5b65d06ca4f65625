//! The `carryfree` command line.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::adder::{build_pipeline, AdderError};
use crate::algebra::values_equal;
use crate::bench::run_bench;
use crate::bounds::minimal_alphabet_report;
use crate::digits::{parse_digit_string, DigitString};
use crate::engine::LocalRule;
use crate::expansions::{
    akiyama_scheicher_expansion, euclid_expansion, greedy_expansion, tm_expansion, Expansion,
    ExpansionError,
};
use crate::oracle::{
    verify_boundary_claims, verify_congruence, verify_conversion, VerificationReport, VerifyOptions,
};
use crate::rules::{algorithm_a, catalog, gde_for_base, rule_for_alphabet, sde_for_alphabet, RulesError};
use crate::system::{make_system, Alphabet, BaseSpec};

pub const EXIT_VERIFY_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_UNSUPPORTED_EXPANSION: u8 = 3;
pub const EXIT_UNSUPPORTED_ALPHABET: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "carryfree",
    version,
    about = "Parallel addition and digit conversion in non-standard numeration systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Expand a number in a base
    Expand(ExpandArgs),
    /// Add two digit strings
    Add(AddArgs),
    /// Subtract the second digit string from the first
    Sub(AddArgs),
    /// Apply one conversion rule to a digit string
    Convert(ConvertArgs),
    /// Lower bounds and minimal alphabet for a base
    Bounds(BoundsArgs),
    /// Check rules against exact arithmetic
    Verify(VerifyArgs),
    /// Time parallel addition against sequential references
    Bench(BenchArgs),
    /// Print a rule file
    Rule(RuleArgs),
}

#[derive(Args, Debug)]
pub struct ExpandArgs {
    /// Base mnemonic: 10, -2, 3/2, -3/2, pisot-:3, pisot+:2, root:b,k,+, -1+i, 2i, isqrt2
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    /// Modified Euclidean expansion of an integer
    #[arg(long, allow_hyphen_values = true, group = "method")]
    pub euclid: Option<String>,
    /// Greedy expansion of a non-negative rational
    #[arg(long, allow_hyphen_values = true, group = "method")]
    pub greedy: Option<String>,
    /// T_m expansion of a rational; needs --m
    #[arg(long, allow_hyphen_values = true, group = "method")]
    pub tm: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    pub m: i64,
    /// Akiyama-Scheicher symmetric expansion of a rational
    #[arg(long = "akiyama-scheicher", alias = "as", allow_hyphen_values = true, group = "method")]
    pub akiyama_scheicher: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub max_digits: usize,
    /// Re-check the value of the result exactly
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct AddArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    /// Contiguous alphabet `m..M`
    #[arg(long, allow_hyphen_values = true)]
    pub alphabet: String,
    /// Digit string, e.g. "1 0 . 1"; `-` reads a line from stdin
    #[arg(allow_hyphen_values = true)]
    pub x: String,
    #[arg(allow_hyphen_values = true)]
    pub y: String,
    /// Subtract instead of add
    #[arg(long)]
    pub sub: bool,
    /// Print every pass with its carries
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    /// Target alphabet; defaults to the canonical one
    #[arg(long, allow_hyphen_values = true)]
    pub alphabet: Option<String>,
    /// Greatest digit elimination into the alphabet
    #[arg(long, group = "which")]
    pub gde: bool,
    /// Smallest digit elimination into the alphabet
    #[arg(long, group = "which")]
    pub sde: bool,
    /// Algorithm A (bases pisot-:a only)
    #[arg(long = "algorithm-a", group = "which")]
    pub algorithm_a: bool,
    /// Rule file written by `carryfree rule`
    #[arg(long, group = "which")]
    pub rule: Option<PathBuf>,
    #[arg(allow_hyphen_values = true)]
    pub input: String,
    /// Print the carries
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Only rules and adders of this base
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Verify a rule file instead of the catalog
    #[arg(long)]
    pub rule: Option<PathBuf>,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    /// Random longer strings per rule
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alphabet: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub length: usize,
    /// Largest worker count; powers of two up to it are timed
    #[arg(long, default_value_t = 8)]
    pub threads: usize,
    #[arg(long, default_value_t = 3)]
    pub runs: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct RuleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: String,
    #[arg(long, allow_hyphen_values = true)]
    pub alphabet: Option<String>,
    #[arg(long, group = "which")]
    pub sde: bool,
    #[arg(long = "algorithm-a", group = "which")]
    pub algorithm_a: bool,
    /// Store the rule as an explicit table
    #[arg(long)]
    pub table: bool,
}

/// On-disk rule: the base it claims to convert in, and the rule.
#[derive(Serialize, Deserialize)]
pub struct RuleFile {
    pub base: BaseSpec,
    pub rule: serde_json::Value,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl ToString) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }
}

impl From<RulesError> for CliError {
    fn from(e: RulesError) -> Self {
        let code = match e {
            RulesError::AlphabetTooSmall { .. } | RulesError::AlphabetUnsupported { .. } => {
                EXIT_UNSUPPORTED_ALPHABET
            }
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<AdderError> for CliError {
    fn from(e: AdderError) -> Self {
        match e {
            AdderError::Rules(r) => r.into(),
            AdderError::AlphabetLacksNegatives { .. } => CliError {
                code: EXIT_UNSUPPORTED_ALPHABET,
                message: e.to_string(),
            },
            other => CliError::usage(other),
        }
    }
}

impl From<ExpansionError> for CliError {
    fn from(e: ExpansionError) -> Self {
        let code = match e {
            ExpansionError::UnsupportedBase { .. } | ExpansionError::PrecisionExhausted => {
                EXIT_UNSUPPORTED_EXPANSION
            }
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<String, CliError>;

struct Stdin {
    lines: Option<io::Lines<io::StdinLock<'static>>>,
}

impl Stdin {
    fn new() -> Self {
        Stdin { lines: None }
    }

    fn resolve(&mut self, arg: &str) -> Result<String, CliError> {
        if arg != "-" {
            return Ok(arg.to_string());
        }
        let lines = self.lines.get_or_insert_with(|| io::stdin().lock().lines());
        match lines.next() {
            Some(Ok(line)) => Ok(line),
            _ => Err(CliError::usage("expected a digit string on stdin")),
        }
    }

    fn digits(&mut self, arg: &str) -> Result<DigitString, CliError> {
        let text = self.resolve(arg)?;
        parse_digit_string(&text).map_err(CliError::usage)
    }
}

fn parse_base(s: &str) -> Result<BaseSpec, CliError> {
    s.parse().map_err(CliError::usage)
}

fn parse_alphabet(s: &str) -> Result<Alphabet, CliError> {
    s.parse().map_err(CliError::usage)
}

/// `7`, `-3/4` or `0.125`.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        return (!d.is_zero()).then(|| BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let whole: BigInt = if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().ok()? };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let f: BigInt = frac.parse().ok()?;
        let f = if negative { -f } else { f };
        return Some(BigRational::new(whole * &scale + f, scale));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

#[derive(Serialize)]
struct ExpandOutput<'a> {
    #[serde(flatten)]
    expansion: &'a Expansion,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<bool>,
}

/// Exact check that `ds` represents `x`, via `v * value(ds) = u` for
/// `x = u/v`. `None` when the numbers do not fit machine digits.
fn check_value(ds: &DigitString, x: &BigRational, base: &BaseSpec) -> Option<bool> {
    let u = x.numer().to_i64()?;
    let v = x.denom().to_i64()?;
    let scaled = DigitString::new(
        ds.lsd_exponent,
        ds.digits.iter().map(|d| d.checked_mul(v)).collect::<Option<Vec<_>>>()?,
    );
    Some(values_equal(&scaled, &DigitString::integer(vec![u]), base))
}

fn cmd_expand(a: &ExpandArgs) -> CliResult {
    let base = parse_base(&a.base)?;
    let number = |s: &str| parse_rational(s).ok_or_else(|| CliError::usage(format!("not a number: {s}")));
    let (x, expansion) = if let Some(n) = &a.euclid {
        let n: BigInt = n.parse().map_err(|_| CliError::usage(format!("not an integer: {n}")))?;
        let ds = euclid_expansion(&n, &base)?;
        (BigRational::from_integer(n), Expansion { digits: ds, exact: true })
    } else if let Some(s) = &a.greedy {
        let x = number(s)?;
        let e = greedy_expansion(&x, &base, a.max_digits)?;
        (x, e)
    } else if let Some(s) = &a.tm {
        let x = number(s)?;
        let e = tm_expansion(&x, a.m, &base, a.max_digits)?;
        (x, e)
    } else if let Some(s) = &a.akiyama_scheicher {
        let x = number(s)?;
        let e = akiyama_scheicher_expansion(&x, &base, a.max_digits)?;
        (x, e)
    } else {
        return Err(CliError::usage(
            "choose one of --euclid, --greedy, --tm, --akiyama-scheicher",
        ));
    };
    let check = if a.check && expansion.exact {
        Some(check_value(&expansion.digits, &x, &base).ok_or_else(|| {
            CliError::usage("number too large for --check")
        })?)
    } else {
        None
    };
    if check == Some(false) {
        return Err(CliError {
            code: EXIT_VERIFY_FAILED,
            message: format!("value check failed for {}", expansion.digits),
        });
    }
    if a.json {
        return Ok(to_json(&ExpandOutput {
            expansion: &expansion,
            check,
        }));
    }
    let mut out = expansion.digits.to_string();
    if !expansion.exact {
        out.push_str(" ...");
    }
    if check == Some(true) {
        out.push_str("\ncheck: ok");
    }
    Ok(out)
}

#[derive(Serialize)]
struct TracedSum<'a> {
    result: &'a DigitString,
    pipeline: crate::adder::PipelineSummary,
    trace: Vec<crate::adder::PassTrace>,
}

fn cmd_add(a: &AddArgs, subtract: bool, stdin: &mut Stdin) -> CliResult {
    let base = parse_base(&a.base)?;
    let alphabet = parse_alphabet(&a.alphabet)?;
    let system = make_system(base, alphabet).map_err(CliError::usage)?;
    let x = stdin.digits(&a.x)?;
    let y = stdin.digits(&a.y)?;
    let pipeline = build_pipeline(&system)?;
    let result = if subtract {
        pipeline.subtract(&x, &y)?
    } else {
        pipeline.add(&x, &y)?
    };
    if !a.trace {
        return Ok(if a.json { to_json(&result) } else { result.to_string() });
    }
    let z = if subtract {
        crate::adder::digitwise_sum(&x, &y.negate_digits())
    } else {
        crate::adder::digitwise_sum(&x, &y)
    };
    let trace = pipeline.trace(&z)?;
    if a.json {
        return Ok(to_json(&TracedSum {
            result: &result,
            pipeline: pipeline.summary(),
            trace,
        }));
    }
    let summary = pipeline.summary();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "plan: {} (window t={}, r={})",
        summary
            .plan
            .iter()
            .map(|(n, k)| format!("{n} x{k}"))
            .collect::<Vec<_>>()
            .join(", "),
        summary.effective_window.0,
        summary.effective_window.1
    );
    let _ = writeln!(out, "sum: {z}");
    for (i, pass) in trace.iter().enumerate() {
        let _ = writeln!(out, "pass {} [{}]: {} -> {}", i + 1, pass.rule, pass.input, pass.output);
        if let Some(c) = &pass.carries {
            let list: Vec<String> = c.iter().map(|(e, q)| format!("q_{e}={q}")).collect();
            let _ = writeln!(out, "  carries: {}", if list.is_empty() { "none".into() } else { list.join(" ") });
        }
    }
    out.push_str(&result.to_string());
    Ok(out)
}

fn load_rule_file(path: &PathBuf) -> Result<(BaseSpec, LocalRule), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let file: RuleFile =
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad rule file: {e}")))?;
    let rule = LocalRule::from_json(&file.rule.to_string()).map_err(CliError::usage)?;
    Ok((file.base, rule))
}

fn pick_rule(
    base: &BaseSpec,
    alphabet: Option<&str>,
    sde: bool,
    algo_a: bool,
) -> Result<LocalRule, CliError> {
    if algo_a {
        return match *base.family() {
            crate::BaseFamily::PisotMinus { a } => Ok(algorithm_a(a)?),
            _ => Err(CliError::usage("Algorithm A needs a base pisot-:a")),
        };
    }
    let alphabet = alphabet.map(parse_alphabet).transpose()?;
    match (alphabet, sde) {
        (None, false) => Ok(gde_for_base(base)?),
        (None, true) => Err(CliError::usage("--sde needs --alphabet")),
        (Some(alpha), true) => Ok(sde_for_alphabet(base, alpha)?),
        (Some(alpha), false) => {
            let (gde, _) = rule_for_alphabet(base, alpha)?;
            gde.ok_or_else(|| CliError {
                code: EXIT_UNSUPPORTED_ALPHABET,
                message: format!("{alpha} has no greatest digit to eliminate into; use --sde"),
            })
        }
    }
}

#[derive(Serialize)]
struct Converted<'a> {
    result: &'a DigitString,
    rule: &'a str,
    window: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none")]
    carries: Option<Vec<(i64, i64)>>,
}

fn cmd_convert(a: &ConvertArgs, stdin: &mut Stdin) -> CliResult {
    let base = parse_base(&a.base)?;
    let rule = match &a.rule {
        Some(path) => {
            let (file_base, rule) = load_rule_file(path)?;
            if file_base != base {
                return Err(CliError::usage(format!(
                    "rule file is for base {file_base}, not {base}"
                )));
            }
            rule
        }
        None => pick_rule(&base, a.alphabet.as_deref(), a.sde, a.algorithm_a)?,
    };
    let input = stdin.digits(&a.input)?;
    let result = rule.apply(&input).map_err(CliError::usage)?;
    let carries = if a.trace { rule.carries(&input) } else { None };
    if a.json {
        return Ok(to_json(&Converted {
            result: &result,
            rule: rule.name(),
            window: rule.window(),
            carries,
        }));
    }
    let mut out = String::new();
    if a.trace {
        let _ = writeln!(out, "{rule}");
        if let Some(c) = &carries {
            let list: Vec<String> = c.iter().map(|(e, q)| format!("q_{e}={q}")).collect();
            let _ = writeln!(out, "carries: {}", if list.is_empty() { "none".into() } else { list.join(" ") });
        }
    }
    out.push_str(&result.to_string());
    Ok(out)
}

fn cmd_bounds(a: &BoundsArgs) -> CliResult {
    let base = parse_base(&a.base)?;
    let report = minimal_alphabet_report(&base);
    if a.json {
        return Ok(to_json(&report));
    }
    let opt = |v: Option<i64>| v.map_or("n/a".to_string(), |v| v.to_string());
    let mut out = String::new();
    let _ = writeln!(out, "base                 {}", base);
    let _ = writeln!(out, "ceil bound           {}", opt(report.ceil_bound));
    let _ = writeln!(
        out,
        "|f(1)| bound         {}{}",
        opt(report.f1_bound),
        if report.f1_plus2_applicable { " (includes +2)" } else { "" }
    );
    let _ = writeln!(out, "a+b bound            {}", opt(report.rational_bound));
    if let Some(mp) = &report.minimal_polynomial {
        let _ = writeln!(
            out,
            "minimal polynomial   {:?}{}",
            mp,
            if report.minimal_polynomial_proven { "" } else { " (not proven minimal)" }
        );
    }
    let _ = writeln!(out, "minimal_size         {}", report.minimal_size);
    let _ = write!(out, "supported alphabets  {}", report.supported_alphabets);
    for note in &report.notes {
        let _ = write!(out, "\nnote: {note}");
    }
    Ok(out)
}

fn verify_one(
    base: &BaseSpec,
    conv: &dyn crate::oracle::Conversion,
    opts: &VerifyOptions,
    reports: &mut Vec<VerificationReport>,
) -> Result<(), CliError> {
    let rep = verify_conversion(conv, base, opts).map_err(CliError::usage)?;
    reports.push(rep);
    if let Ok(r) = verify_congruence(conv, base) {
        reports.push(r);
    }
    if let Ok(r) = verify_boundary_claims(conv, base) {
        reports.push(r);
    }
    Ok(())
}

fn cmd_verify(a: &VerifyArgs) -> CliResult {
    let mut opts = VerifyOptions {
        max_len: a.max_len,
        budget: a.budget,
        seed: a.seed,
        ..VerifyOptions::default()
    };
    if a.max_len < 6 {
        opts = VerifyOptions {
            budget: a.budget,
            seed: a.seed,
            ..VerifyOptions::quick(a.max_len)
        };
    }
    if let Some(s) = a.samples {
        opts.samples = s;
    }
    let mut reports = Vec::new();
    if let Some(path) = &a.rule {
        let (base, rule) = load_rule_file(path)?;
        verify_one(&base, &rule, &opts, &mut reports)?;
    } else {
        let only = a.base.as_deref().map(parse_base).transpose()?;
        let mut rules = catalog()?;
        if let Some(b) = &only {
            rules.retain(|(base, _)| base == b);
            if rules.is_empty() {
                rules.push((b.clone(), gde_for_base(b)?));
            }
        }
        for (base, rule) in &rules {
            verify_one(base, rule, &opts, &mut reports)?;
        }
        let systems: Vec<_> = match &only {
            Some(b) => {
                let k = crate::rules::catalog_alphabet_size(b);
                (0..k)
                    .filter_map(|d| Alphabet::new(-d, k - 1 - d).ok())
                    .filter_map(|alpha| make_system(b.clone(), alpha).ok())
                    .filter(|s| build_pipeline(s).is_ok())
                    .collect()
            }
            None => crate::adder::reference_systems(),
        };
        let pipe_opts = VerifyOptions {
            max_len: opts.max_len.min(5),
            ..opts.clone()
        };
        for system in systems {
            let pipeline = build_pipeline(&system)?;
            verify_one(&system.base, &pipeline, &pipe_opts, &mut reports)?;
        }
    }
    let failed = reports.iter().any(|r| !r.passed());
    let out = if a.json {
        to_json(&reports)
    } else {
        let mut out = String::new();
        for r in &reports {
            let _ = writeln!(
                out,
                "{} {:<11} {:<40} {} instances",
                if r.passed() { "PASS" } else { "FAIL" },
                r.check,
                r.id,
                r.instances_checked
            );
            for f in &r.failures {
                let _ = writeln!(out, "    witness: {} -> {} ({})", f.input, f.output, f.property);
            }
        }
        let _ = write!(
            out,
            "{} of {} checks passed",
            reports.iter().filter(|r| r.passed()).count(),
            reports.len()
        );
        out
    };
    if failed {
        Err(CliError {
            code: EXIT_VERIFY_FAILED,
            message: out,
        })
    } else {
        Ok(out)
    }
}

fn cmd_bench(a: &BenchArgs) -> CliResult {
    let base = parse_base(&a.base)?;
    let alphabet = parse_alphabet(&a.alphabet)?;
    if a.length < 1000 {
        return Err(CliError::usage("--length must be at least 1000"));
    }
    let system = make_system(base, alphabet).map_err(CliError::usage)?;
    let mut workers = vec![1];
    while workers.last().unwrap() * 2 <= a.threads.max(1) {
        workers.push(workers.last().unwrap() * 2);
    }
    if *workers.last().unwrap() != a.threads.max(1) {
        workers.push(a.threads);
    }
    let report = run_bench(&system, a.length, &workers, a.runs, a.seed)?;
    let out = if a.json {
        to_json(&report)
    } else {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "base {} alphabet {} length {} passes {} window {:?}",
            report.base, report.alphabet, report.length, report.passes, report.effective_window
        );
        let _ = writeln!(out, "{:<12} {:>10} {:>16} {:>10}", "method", "ms", "digits/s/pass", "identical");
        let _ = writeln!(out, "{:<12} {:>10.2} {:>16} {:>10}", "sequential", report.sequential_millis, "", "ref");
        for row in &report.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>10.2} {:>16.3e} {:>10}",
                format!("{} workers", row.workers),
                row.millis,
                row.digits_per_sec_per_pass,
                row.identical
            );
        }
        match (report.ripple_millis, report.ripple_value_equal) {
            (Some(ms), Some(eq)) => {
                let _ = write!(out, "{:<12} {:>10.2} {:>16} {:>10}", "ripple", ms, "", if eq { "same value" } else { "MISMATCH" });
            }
            _ => {
                let _ = write!(out, "ripple reference not available for this base");
            }
        }
        out
    };
    let ripple_ok = report.ripple_value_equal.unwrap_or(true);
    if report.identical && ripple_ok {
        Ok(out)
    } else {
        Err(CliError {
            code: EXIT_VERIFY_FAILED,
            message: out,
        })
    }
}

fn cmd_rule(a: &RuleArgs) -> CliResult {
    let base = parse_base(&a.base)?;
    let mut rule = pick_rule(&base, a.alphabet.as_deref(), a.sde, a.algorithm_a)?;
    if a.table {
        rule = rule
            .materialize()
            .ok_or_else(|| CliError::usage("rule too large to tabulate"))?;
    }
    let file = RuleFile {
        base,
        rule: serde_json::from_str(&rule.to_json()).expect("rule json"),
    };
    Ok(serde_json::to_string_pretty(&file).expect("serializable"))
}

pub fn run(cli: &Cli) -> CliResult {
    let mut stdin = Stdin::new();
    match &cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Add(a) => cmd_add(a, a.sub, &mut stdin),
        Command::Sub(a) => cmd_add(a, true, &mut stdin),
        Command::Convert(a) => cmd_convert(a, &mut stdin),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Rule(a) => cmd_rule(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let _ = writeln!(stdout, "{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            // verification failures still print their report on stdout
            if e.code == EXIT_VERIFY_FAILED {
                let _ = writeln!(io::stdout().lock(), "{}", e.message);
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
