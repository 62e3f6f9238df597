//! `costfair` command-line front end.
//!
//! Exit codes: 0 success or every requested check holds, 1 a requested
//! check fails, 2 invalid input, 3 the two solvers disagree (`--method both`).

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use costfair_core::codec::{
    builtin, export_dot, gas_fee_to_fiat, parse_protocol, serialize_protocol, DotOptions,
    BUILTIN_NAMES,
};
use costfair_core::{
    asokan_fairness, check_predictions, classify_outcome, environment_report, escrow_trace,
    full_cost_fairness, generate, parse_rational, partial_cost_fairness, payoff_of_path, play,
    theorem_premises, ExchangeProtocol, GeneratorConfig, Method, Player, Strategy,
    DEFAULT_ENUMERATION_CAP,
};

use report::{
    AnalysisReport, ClosedSystemInfo, EnvironmentInfo, PayoffInfo, PayoffReport, PredictionInfo,
    ProtocolInfo, TheoremInfo, Timing, VerdictInfo, ANALYSIS_SCHEMA, PAYOFF_SCHEMA,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_SOLVER_DISAGREEMENT: i32 = 3;

/// Overrides the brute-force enumeration cap.
pub const ENUM_CAP_ENV: &str = "COSTFAIR_ENUM_CAP";

#[derive(Parser, Debug)]
#[command(
    name = "costfair",
    version,
    about = "Cost-fairness analysis of two-party exchange protocols"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a protocol file.
    Validate { file: PathBuf },
    /// Run fairness checks on a protocol.
    Analyze(AnalyzeArgs),
    /// Play one strategy pair and print the payoffs.
    Payoff(PayoffArgs),
    /// Write the protocol tree in Graphviz DOT format.
    ExportDot(ExportArgs),
    /// List or write the built-in protocols.
    #[command(subcommand)]
    Examples(ExamplesCommand),
    /// Generate a random protocol.
    Generate(GenerateArgs),
    /// Convert a Gas amount to fiat.
    FeeConvert(FeeArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Protocol file in `.xproto` format.
    file: Option<PathBuf>,
    /// Name of a built-in protocol instead of a file.
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Check {
    PartialCf(Player),
    FullCf,
    Fairness(Player),
    ClosedSystem,
    Env,
    Theorems,
}

impl Check {
    const ALL: [Check; 8] = [
        Check::Env,
        Check::ClosedSystem,
        Check::PartialCf(Player::A),
        Check::PartialCf(Player::B),
        Check::FullCf,
        Check::Fairness(Player::A),
        Check::Fairness(Player::B),
        Check::Theorems,
    ];

    fn label(self) -> String {
        match self {
            Check::PartialCf(p) => format!("partial-cf:{p}"),
            Check::FullCf => "full-cf".into(),
            Check::Fairness(p) => format!("fairness:{p}"),
            Check::ClosedSystem => "closed-system".into(),
            Check::Env => "env".into(),
            Check::Theorems => "theorems".into(),
        }
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Check::ALL
            .into_iter()
            .find(|c| c.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let known: Vec<_> = Check::ALL.iter().map(|c| c.label()).collect();
                format!("unknown check `{s}` (expected one of {})", known.join(", "))
            })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum MethodArg {
    Bruteforce,
    Induction,
    Both,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Bruteforce => vec![Method::BruteForce],
            MethodArg::Induction => vec![Method::Induction],
            MethodArg::Both => vec![Method::BruteForce, Method::Induction],
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ReportFormat {
    Text,
    #[value(alias = "json-like")]
    Json,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: Source,
    /// Check to run; repeatable. Defaults to every check.
    #[arg(long = "check", value_parser = Check::from_str)]
    checks: Vec<Check>,
    #[arg(long, value_enum, default_value = "induction")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
    /// Maximum number of strategies brute force may enumerate per player.
    #[arg(long)]
    enum_cap: Option<u128>,
}

#[derive(Args, Debug)]
struct PayoffArgs {
    #[command(flatten)]
    source: Source,
    /// Choices of A as `vertex=edge,...`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    strategy_a: String,
    /// Choices of B as `vertex=edge,...`.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    strategy_b: String,
    #[arg(long, value_enum, default_value = "text")]
    report: ReportFormat,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[command(flatten)]
    source: Source,
    /// Output path; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    no_payoffs: bool,
    #[arg(long)]
    no_faithfulness: bool,
    #[arg(long)]
    no_attributes: bool,
}

#[derive(Subcommand, Debug)]
enum ExamplesCommand {
    /// List built-in protocol names.
    List,
    /// Serialize a built-in protocol.
    Write {
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    depth: u32,
    #[arg(long)]
    branching: u32,
    /// Positive costs and a leave edge at every vertex of the initializer's opponent.
    #[arg(long)]
    theorem1_premises: bool,
    /// Positive costs and leave edges at every vertex of both parties.
    #[arg(long)]
    theorem2_premises: bool,
    /// Allow arbitrary partial item releases.
    #[arg(long)]
    no_fair_exchange: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FeeArgs {
    /// Amount of Gas.
    #[arg(long)]
    gas: String,
    /// Gas price in GWei per Gas.
    #[arg(long)]
    gas_price: String,
    /// Fiat per Eth.
    #[arg(long)]
    rate: String,
    /// Also print the exact rational amount.
    #[arg(long)]
    exact: bool,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID_INPUT
            } else {
                EXIT_OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INVALID_INPUT
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match command {
        Command::Validate { file } => validate(&file, out, err),
        Command::Analyze(args) => analyze(args, out),
        Command::Payoff(args) => payoff_cmd(args, out),
        Command::ExportDot(args) => export(args, out),
        Command::Examples(cmd) => examples(cmd, out),
        Command::Generate(args) => generate_cmd(args, out),
        Command::FeeConvert(args) => fee(args, out),
    }
}

fn read_protocol(path: &Path) -> anyhow::Result<ExchangeProtocol> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_protocol(&text).with_context(|| format!("{}", path.display()))
}

fn load(source: &Source) -> anyhow::Result<(ExchangeProtocol, String)> {
    match (&source.file, &source.builtin) {
        (Some(path), None) => Ok((read_protocol(path)?, path.display().to_string())),
        (None, Some(name)) => Ok((builtin(name)?, format!("builtin {name}"))),
        _ => bail!("give either a protocol file or --builtin NAME"),
    }
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> anyhow::Result<()> {
    match path {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
        }
        None => out.write_all(text.as_bytes()).map_err(Into::into),
    }
}

fn validate(file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let p = read_protocol(file)?;
    writeln!(
        out,
        "ok: {} ({} vertices, {} edges)",
        p.name(),
        p.vertices().len(),
        p.edges().len()
    )?;
    for w in p.warnings() {
        writeln!(err, "warning: {w}")?;
    }
    Ok(EXIT_OK)
}

fn enum_cap(flag: Option<u128>) -> anyhow::Result<u128> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(ENUM_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("{ENUM_CAP_ENV} must be a non-negative integer, got `{v}`")),
        Err(_) => Ok(DEFAULT_ENUMERATION_CAP),
    }
}

fn overflow_hint(e: costfair_core::EnumerationOverflow) -> anyhow::Error {
    anyhow!("{e}; use --method induction, or raise the cap with --enum-cap or {ENUM_CAP_ENV}")
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn closed_system(p: &ExchangeProtocol) -> ClosedSystemInfo {
    let mut violations = Vec::new();
    let mut residual_escrow = Vec::new();
    for t in p.terminals() {
        let trace = escrow_trace(p, &p.path_to(t));
        let id = &p.vertex(t).id;
        if !trace.prefix_closed() {
            violations.push(id.clone());
        }
        let last = trace.final_balance();
        if !last.is_zero() {
            residual_escrow.push(format!("{id}={last}"));
        }
    }
    ClosedSystemInfo {
        holds: violations.is_empty(),
        violations,
        residual_escrow,
    }
}

fn analyze(args: AnalyzeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (p, source) = load(&args.source)?;
    let cap = enum_cap(args.enum_cap)?;
    let mut checks = if args.checks.is_empty() {
        Check::ALL.to_vec()
    } else {
        args.checks.clone()
    };
    let mut seen = Vec::new();
    checks.retain(|c| {
        let fresh = !seen.contains(c);
        seen.push(*c);
        fresh
    });
    let methods = args.method.methods();

    let mut report = AnalysisReport {
        schema: ANALYSIS_SCHEMA,
        protocol: ProtocolInfo::new(&p, &source),
        environment: None,
        closed_system: None,
        verdicts: Vec::new(),
        theorems: None,
        solver_disagreements: Vec::new(),
        all_hold: true,
        timings: Vec::new(),
    };

    for check in checks {
        let label = check.label();
        match check {
            Check::Env => {
                let start = Instant::now();
                report.environment = Some(EnvironmentInfo::from(&environment_report(&p)));
                report.timings.push(Timing {
                    check: label,
                    method: None,
                    millis: millis(start),
                });
            }
            Check::ClosedSystem => {
                let start = Instant::now();
                report.closed_system = Some(closed_system(&p));
                report.timings.push(Timing {
                    check: label,
                    method: None,
                    millis: millis(start),
                });
            }
            Check::Theorems => {
                let start = Instant::now();
                let premises = theorem_premises(&p);
                let mut info = TheoremInfo::new(&premises);
                for &m in &methods {
                    for c in check_predictions(&p, &premises, m, cap).map_err(overflow_hint)? {
                        info.predictions.push(PredictionInfo {
                            predicate: c.predicate.to_string(),
                            method: m.to_string(),
                            verdict_holds: c.verdict_holds,
                            agrees: c.agrees,
                        });
                    }
                }
                report.theorems = Some(info);
                report.timings.push(Timing {
                    check: label,
                    method: None,
                    millis: millis(start),
                });
            }
            Check::PartialCf(_) | Check::FullCf | Check::Fairness(_) => {
                let mut per_method = Vec::new();
                for &m in &methods {
                    let start = Instant::now();
                    let verdict = match check {
                        Check::PartialCf(pl) => {
                            let v = partial_cost_fairness(&p, pl, m, cap).map_err(overflow_hint)?;
                            VerdictInfo::new(&p, &v)
                        }
                        Check::Fairness(pl) => {
                            let v = asokan_fairness(&p, pl, m, cap).map_err(overflow_hint)?;
                            VerdictInfo::new(&p, &v)
                        }
                        _ => {
                            let full = full_cost_fairness(&p, m, cap).map_err(overflow_hint)?;
                            let components = vec![
                                VerdictInfo::new(&p, &full.favoring_a),
                                VerdictInfo::new(&p, &full.favoring_b),
                            ];
                            let failing: Vec<_> = components
                                .iter()
                                .filter(|c| !c.holds)
                                .map(|c| c.check.clone())
                                .collect();
                            VerdictInfo {
                                check: label.clone(),
                                method: m.to_string(),
                                holds: full.holds(),
                                worst_case: None,
                                reason: (!failing.is_empty())
                                    .then(|| format!("{} fails", failing.join(" and "))),
                                counterexample: None,
                                components,
                            }
                        }
                    };
                    report.timings.push(Timing {
                        check: label.clone(),
                        method: Some(m.to_string()),
                        millis: millis(start),
                    });
                    per_method.push(verdict);
                }
                if let [first, rest @ ..] = &per_method[..] {
                    for other in rest {
                        if first.agreement_key() != other.agreement_key() {
                            report.solver_disagreements.push(format!(
                                "{label}: {} says {} (worst case {}), {} says {} (worst case {})",
                                first.method,
                                first.holds,
                                first.worst_case.as_deref().unwrap_or("-"),
                                other.method,
                                other.holds,
                                other.worst_case.as_deref().unwrap_or("-"),
                            ));
                        }
                    }
                }
                report.verdicts.extend(per_method);
            }
        }
    }

    report.all_hold = report.verdicts.iter().all(|v| v.holds)
        && report.closed_system.as_ref().is_none_or(|c| c.holds)
        && report.theorems.as_ref().is_none_or(|t| t.holds());

    let text = match args.report {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(if !report.solver_disagreements.is_empty() {
        EXIT_SOLVER_DISAGREEMENT
    } else if report.all_hold {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn payoff_cmd(args: PayoffArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (p, _) = load(&args.source)?;
    let sa = Strategy::parse(&p, Player::A, &args.strategy_a).context("--strategy-a")?;
    let sb = Strategy::parse(&p, Player::B, &args.strategy_b).context("--strategy-b")?;
    let played = play(&p, &sa, &sb)?;
    let pay = payoff_of_path(&p, &played.path);
    let report = PayoffReport {
        schema: PAYOFF_SCHEMA,
        protocol: p.name().to_string(),
        path: played
            .path
            .iter()
            .map(|&e| format!("{}={}", p.vertex(p.edge(e).from).id, p.edge(e).id))
            .collect(),
        terminal: p.vertex(played.terminal).id.clone(),
        payoff: PayoffInfo {
            a: pay.a.to_string(),
            b: pay.b.to_string(),
        },
        outcome: classify_outcome(&p, &played.path).kind.to_string(),
        escrow_balances: escrow_trace(&p, &played.path)
            .balances
            .iter()
            .map(|b| b.to_string())
            .collect(),
    };
    let text = match args.report {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    out.write_all(text.as_bytes())?;
    Ok(EXIT_OK)
}

fn export(args: ExportArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (p, _) = load(&args.source)?;
    let options = DotOptions {
        payoffs: !args.no_payoffs,
        faithfulness: !args.no_faithfulness,
        attributes: !args.no_attributes,
    };
    write_output(args.output.as_deref(), &export_dot(&p, options), out)?;
    Ok(EXIT_OK)
}

fn examples(cmd: ExamplesCommand, out: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        ExamplesCommand::List => {
            for name in BUILTIN_NAMES {
                writeln!(out, "{name}")?;
            }
        }
        ExamplesCommand::Write { name, output } => {
            let p = builtin(&name)?;
            write_output(output.as_deref(), &serialize_protocol(&p), out)?;
        }
    }
    Ok(EXIT_OK)
}

fn generate_cmd(args: GenerateArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let config = GeneratorConfig {
        depth: args.depth,
        branching: args.branching,
        seed: args.seed,
        enforce_theorem1_premises: args.theorem1_premises,
        enforce_theorem2_premises: args.theorem2_premises,
        enforce_fair_exchange: !args.no_fair_exchange,
    };
    let p = generate(&config)?;
    write_output(args.output.as_deref(), &serialize_protocol(&p), out)?;
    Ok(EXIT_OK)
}

fn fee(args: FeeArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let gas = parse_rational(&args.gas).context("--gas")?;
    if !gas.is_integer() {
        bail!(
            "--gas must be a whole number of Gas units, got {}",
            args.gas
        );
    }
    let price = parse_rational(&args.gas_price).context("--gas-price")?;
    let rate = parse_rational(&args.rate).context("--rate")?;
    let quote = gas_fee_to_fiat(&gas.to_integer(), &price, &rate)?;
    writeln!(out, "{}", quote.rendered())?;
    if args.exact {
        writeln!(out, "exact: {}", quote.fiat_total)?;
    }
    Ok(EXIT_OK)
}
