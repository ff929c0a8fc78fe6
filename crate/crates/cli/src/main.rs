//! `parafield`: runs verifications and constant searches and writes CSV or
//! JSON reports.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use parafield_core::energy::{self, lemma2_applies, lemma2_instance};
use parafield_core::estimates::{self, explicit_constant, field_condition};
use parafield_core::{
    replay, run_check, CheckConfig, CheckKind, Error, ExponentPair, ExtensionOperator, FieldSpec, OutputFormat,
    Paraboloid, Report, RowContext, Strategy, Subset, Verdict, Witness, DEFAULT_ORDER_CAP,
};

#[derive(Parser, Debug)]
#[command(name = "parafield", version, about = "Finite-field paraboloid restriction toolkit")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Largest admissible field order.
    #[arg(long, global = true, env = "PARAFIELD_CAP", default_value_t = DEFAULT_ORDER_CAP)]
    cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct FieldArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    m: u32,
}

#[derive(Args, Debug, Clone)]
struct SpaceArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    /// Exponent pair `p,q` with rational entries, e.g. `8/5,4`.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long, default_value = "exhaustive_char")]
    strategy: String,
    #[arg(long, default_value_t = estimates::DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Field parameters and the modulus.
    FieldInfo(FieldArgs),
    /// The explicit three-dimensional constant.
    PaperConstant,
    /// Additive energy and the bilinear norm of a pair of subsets.
    Energy {
        #[command(flatten)]
        space: SpaceArgs,
        /// Hex mask of A (default: seeded random).
        #[arg(long)]
        a: Option<String>,
        /// Hex mask of B (default: seeded random).
        #[arg(long)]
        b: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// M(a) for every base point, with ratios against both bound forms.
    MQuantity {
        #[command(flatten)]
        space: SpaceArgs,
        /// Hex mask of B (default: the whole paraboloid).
        #[arg(long)]
        b: Option<String>,
    },
    /// Runs a catalogued check, or replays a witness file.
    Verify {
        #[arg(required_unless_present = "replay", conflicts_with = "replay")]
        check: Option<String>,
        #[arg(long)]
        replay: Option<PathBuf>,
        #[arg(long, required_unless_present = "replay")]
        p: Option<u64>,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        mode: Option<String>,
        /// Exponent for the dyadic sandwich check.
        #[arg(long)]
        exponent: Option<String>,
        /// Use the exponent (n-3)/4 in the Lemma 3 bound.
        #[arg(long)]
        sharper_odd: bool,
    },
    /// Lower bound on the restriction constant by search.
    EstimateConstant {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// One search per prime field.
    ScanFields {
        /// Comma-separated primes.
        #[arg(long, value_delimiter = ',', required = true)]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[command(flatten)]
        search: SearchArgs,
    },
}

type CliResult<T> = std::result::Result<T, Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = emit(&cli, &report) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            match report.verdict() {
                Verdict::Fail => ExitCode::from(1),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> CliResult<()> {
    let text = report.render(cli.format.into())?;
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult<Report> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Precondition("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Precondition(e.to_string()))?;
    }
    match &cli.command {
        Command::FieldInfo(f) => field_info(cli, f),
        Command::PaperConstant => Ok(paper_constant()),
        Command::Energy { space, a, b, seed, trials } => {
            energy_cmd(cli, space, a.as_deref(), b.as_deref(), *seed, *trials)
        }
        Command::MQuantity { space, b } => m_quantity(cli, space, b.as_deref()),
        Command::Verify { check, replay: Some(path), .. } => {
            debug_assert!(check.is_none());
            replay_file(cli, path)
        }
        Command::Verify { check, p, m, n, trials, seed, mode, exponent, sharper_odd, .. } => {
            let kind: CheckKind = check.as_deref().unwrap_or_default().parse()?;
            let mut cfg = CheckConfig::new(p.unwrap_or_default(), *m, *n).seed(*seed);
            cfg.cap = cli.cap;
            cfg.trials = *trials;
            cfg.mode = mode.as_deref().map(str::parse).transpose()?;
            cfg.exponent = exponent.as_deref().map(str::parse).transpose()?;
            cfg.sharper_odd = *sharper_odd;
            verify(&cfg, kind)
        }
        Command::EstimateConstant { space, search } => estimate(cli, space, search),
        Command::ScanFields { primes, n, search } => scan(cli, primes, *n, search),
    }
}

fn field(cli: &Cli, f: &FieldArgs) -> CliResult<Arc<FieldSpec>> {
    Ok(Arc::new(FieldSpec::with_cap(f.p, f.m, cli.cap)?))
}

fn paraboloid(cli: &Cli, s: &SpaceArgs) -> CliResult<Paraboloid> {
    Paraboloid::with_cap(field(cli, &s.field)?, s.n, cli.cap.max(DEFAULT_ORDER_CAP))
}

fn ctx(command: &str, p: u32, m: u32, n: Option<usize>) -> RowContext {
    RowContext { p: Some(p), m: Some(m), n, ..RowContext::new(command) }
}

fn field_info(cli: &Cli, f: &FieldArgs) -> CliResult<Report> {
    let field = field(cli, f)?;
    let c = ctx("field-info", field.characteristic(), field.degree(), None);
    let mut report = Report::default();
    let info = Verdict::ReportOnly;
    report.rows.push(c.row("order", field.order() as f64, info));
    report.rows.push(c.row("minus_one_is_square", field.minus_one_is_square() as u8 as f64, info));
    for (i, coeff) in field.modulus().iter().enumerate() {
        report.rows.push(c.row(&format!("modulus_x{i}"), *coeff as f64, info));
    }
    Ok(report)
}

fn paper_constant() -> Report {
    let k = explicit_constant();
    let c = RowContext {
        n: Some(3),
        exponent_p: Some("8/5".into()),
        exponent_q: Some("4".into()),
        ..RowContext::new("paper-constant")
    };
    let info = Verdict::ReportOnly;
    let mut report = Report::default();
    for (name, v) in [
        ("first_term", k.first_term),
        ("second_term", k.second_term),
        ("root", k.root),
        ("c_prime", k.c_prime),
        ("formula_value", k.c),
        ("claimed_bound", k.claimed),
        ("discrepancy", k.discrepancy() as u8 as f64),
    ] {
        report.rows.push(c.row(name, v, info));
    }
    if k.discrepancy() {
        eprintln!("note: {}", k.note());
    }
    report
}

fn parse_or_random(par: &Paraboloid, mask: Option<&str>, seed: u64, stream: u64) -> CliResult<Subset> {
    match mask {
        Some(m) => Subset::from_mask_hex(par, m),
        None => {
            Ok(parafield_core::sampling::random_nonempty_subset(par, &mut parafield_core::sampling::rng(seed, stream)))
        }
    }
}

fn energy_cmd(cli: &Cli, s: &SpaceArgs, a: Option<&str>, b: Option<&str>, seed: u64, trials: u64) -> CliResult<Report> {
    let par = paraboloid(cli, s)?;
    let ext = ExtensionOperator::new(&par)?;
    let field = par.field();
    let c = RowContext { seed: Some(seed), ..ctx("energy", field.characteristic(), field.degree(), Some(s.n)) };
    let fixed = a.is_some() && b.is_some();
    let trials = if fixed { 1 } else { trials };
    let lemma2 = lemma2_applies(field, s.n);
    let mut report = Report::default();
    for t in 0..trials {
        let sa = parse_or_random(&par, a, seed, 2 * t)?;
        let sb = parse_or_random(&par, b, seed, 2 * t + 1)?;
        let count = energy::additive_energy(&par, &sa, &sb)?;
        let norm = energy::bilinear_l2_with(&par, &ext, &sa, &sb)?;
        let info = Verdict::ReportOnly;
        report.rows.push(c.row("energy", count.value as f64, info));
        report.rows.push(c.row("trivial_bound", count.trivial_bound() as f64, info));
        report.rows.push(c.row("bilinear_l2_squared", norm, info));
        let mut w = Witness::new(if lemma2 { "lemma2" } else { "bilinear-identity" }, field, Some(s.n), Some(seed));
        w.put("A", sa.mask_hex());
        w.put("B", sb.mask_hex());
        if lemma2 {
            let inst = lemma2_instance(&par, &ext, &sa, &sb)?;
            let v = if inst.holds { Verdict::Pass } else { Verdict::Fail };
            report.rows.push(c.row("lemma2_ratio", inst.ratio, v));
            if !inst.holds && report.witness.as_ref().map_or(true, |w| w.check != "lemma2") {
                w.detail = format!("energy={} bound={}", count.value, inst.bound);
                report.witness = Some(w);
                continue;
            }
        }
        if report.witness.is_none() {
            report.witness = Some(w);
        }
    }
    Ok(report)
}

fn m_quantity(cli: &Cli, s: &SpaceArgs, b: Option<&str>) -> CliResult<Report> {
    let par = paraboloid(cli, s)?;
    let (set, label) = match b {
        Some(m) => (Subset::from_mask_hex(&par, m)?, m.to_string()),
        None => (par.full(), "P".to_string()),
    };
    let lr = energy::m_quantity_report(&par, &set, &label)?;
    let field = par.field();
    let mut report = Report::default();
    report.extend(&lr, &ctx("m-quantity", field.characteristic(), field.degree(), Some(s.n)));
    Ok(report)
}

fn verify(cfg: &CheckConfig, kind: CheckKind) -> CliResult<Report> {
    let lr = run_check(kind, cfg)?;
    let c = RowContext {
        seed: Some(cfg.seed),
        ..ctx(&format!("verify {}", kind.name()), cfg.p as u32, cfg.m, kind.uses_dimension().then_some(cfg.n))
    };
    let mut report = Report::default();
    report.extend(&lr, &c);
    Ok(report)
}

fn replay_file(cli: &Cli, path: &PathBuf) -> CliResult<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let witness = match serde_json::from_str::<Report>(&text) {
        Ok(r) => r.witness.ok_or_else(|| Error::Parse("report carries no witness".into()))?,
        Err(_) => {
            serde_json::from_str::<Witness>(&text).map_err(|e| Error::Parse(format!("not a report or witness: {e}")))?
        }
    };
    let lr = replay(&witness, cli.cap)?;
    let c =
        RowContext { seed: witness.seed, ..ctx(&format!("replay {}", witness.check), witness.p, witness.m, witness.n) };
    let mut report = Report::default();
    report.extend(&lr, &c);
    Ok(report)
}

fn search_params(search: &SearchArgs, n: usize) -> CliResult<(ExponentPair, Strategy)> {
    let pair = match &search.pair {
        Some(s) => s.parse()?,
        None => ExponentPair::theorem_pair(n)?,
    };
    Ok((pair, search.strategy.parse()?))
}

fn search_ctx(
    command: &str,
    p: u32,
    m: u32,
    n: usize,
    pair: ExponentPair,
    search: &SearchArgs,
    strategy: Strategy,
) -> RowContext {
    RowContext {
        exponent_p: Some(pair.p.to_string()),
        exponent_q: Some(pair.q.to_string()),
        strategy: Some(strategy.name().into()),
        seed: Some(search.seed),
        budget: Some(search.budget),
        ..ctx(command, p, m, Some(n))
    }
}

fn estimate(cli: &Cli, s: &SpaceArgs, search: &SearchArgs) -> CliResult<Report> {
    let (pair, strategy) = search_params(search, s.n)?;
    let par = paraboloid(cli, s)?;
    let result = parafield_core::estimate_constant(&par, pair, strategy, search.budget, search.seed)?;
    let field = par.field();
    let c = search_ctx("estimate-constant", field.characteristic(), field.degree(), s.n, pair, search, strategy);
    let mut report = Report::default();
    report.rows.push(c.row("best_ratio", result.best_ratio, Verdict::ReportOnly));
    report.rows.push(c.row("evaluations", result.evaluations as f64, Verdict::ReportOnly));
    let (condition, note) = field_condition(field, s.n);
    report.rows.push(c.row("condition", condition as u8 as f64, Verdict::ReportOnly));
    if s.n == 3 && condition {
        report.rows.push(c.row("paper_constant", explicit_constant().c, Verdict::ReportOnly));
    }
    let mut w = result.witness(field);
    w.detail = format!("{}; {note}", w.detail);
    report.witness = Some(w);
    Ok(report)
}

fn scan(cli: &Cli, primes: &[u64], n: usize, search: &SearchArgs) -> CliResult<Report> {
    let (pair, strategy) = search_params(search, n)?;
    let rows = estimates::scan_fields(primes, n, pair, strategy, search.budget, search.seed, cli.cap)?;
    let mut report = Report::default();
    for row in &rows {
        let r = &row.result;
        let c = search_ctx("scan-fields", r.p, r.m, n, pair, search, strategy);
        report.rows.push(c.row("best_ratio", r.best_ratio, Verdict::ReportOnly));
        report.rows.push(c.row("condition", row.condition as u8 as f64, Verdict::ReportOnly));
    }
    let best = rows.iter().fold(None::<&estimates::ScanRow>, |acc, row| match acc {
        Some(b) if b.result.best_ratio >= row.result.best_ratio => Some(b),
        _ => Some(row),
    });
    if let Some(best) = best {
        let field = FieldSpec::with_cap(best.result.p as u64, 1, cli.cap)?;
        report.witness = Some(best.result.witness(&field));
    }
    Ok(report)
}
