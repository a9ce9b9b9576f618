//! `lorlab`: embedding queries, verification campaigns and triangle-constant sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lorlab::ext::{parse_positive_exponent, Ext, Num};
use lorlab::families::{family_for, measure_ratio, Classification, FamilyKind, GridConfig, RatioRow};
use lorlab::io::{self, CampaignConfig, OutputPaths, QueryConfig};
use lorlab::oracle::{decide, Theorem, Verdict};
use lorlab::triangle::{fit_a, sweep, ConstantReport};
use lorlab::LabError;

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser)]
#[command(name = "lorlab", version, about = "Lorentz-space embedding oracle, counterexample campaigns and triangle constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the source space embeds into the target space.
    Decide {
        #[command(flatten)]
        query: QueryArgs,
        /// Also write the verdict JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Measure the norm ratio of a test family and compare it with the verdict.
    Verify {
        #[command(flatten)]
        query: QueryArgs,
        /// Comma-separated, strictly increasing family sizes.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Override the family chosen for the query.
        #[arg(long)]
        family: Option<FamilyKind>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Sweep empirical triangle constants over a grid of (p, r).
    Constants {
        #[arg(long, value_delimiter = ',', value_parser = parse_ext, required = true)]
        p_grid: Vec<Ext>,
        #[arg(long, value_delimiter = ',', value_parser = parse_ext, required = true)]
        r_grid: Vec<Ext>,
        /// Ratio evaluations per cell.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long)]
        seed: u64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Full reports, including the best configuration per cell.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run a JSON campaign file.
    Run {
        config: PathBuf,
    },
}

#[derive(Args, Clone)]
struct QueryArgs {
    /// Space pair: BF, FB, BB or FF.
    #[arg(long)]
    pair: Theorem,
    #[arg(long, default_value_t = 1)]
    d: u32,
    #[arg(long, value_parser = parse_num, allow_hyphen_values = true)]
    s0: Num,
    #[arg(long, value_parser = parse_exp)]
    p0: Ext,
    #[arg(long, value_parser = parse_exp)]
    q0: Ext,
    #[arg(long, value_parser = parse_exp)]
    r0: Ext,
    #[arg(long, value_parser = parse_num, allow_hyphen_values = true)]
    s1: Num,
    #[arg(long, value_parser = parse_exp)]
    p1: Ext,
    #[arg(long, value_parser = parse_exp)]
    q1: Ext,
    #[arg(long, value_parser = parse_exp)]
    r1: Ext,
}

fn parse_num(raw: &str) -> Result<Num, String> {
    raw.parse::<Num>().map_err(|e| e.to_string())
}

fn parse_exp(raw: &str) -> Result<Ext, String> {
    parse_positive_exponent(raw).map_err(|e| e.to_string())
}

fn parse_ext(raw: &str) -> Result<Ext, String> {
    raw.parse::<Ext>().map_err(|e| e.to_string())
}

fn finite(e: Ext, name: &str) -> anyhow::Result<Num> {
    match e {
        Ext::Fin(n) => Ok(n),
        Ext::Inf => Err(LabError::InvalidExponent(format!("{name} = inf is not allowed")).into()),
    }
}

impl QueryArgs {
    fn to_config(&self) -> anyhow::Result<QueryConfig> {
        Ok(QueryConfig {
            pair: self.pair,
            d: self.d,
            s0: self.s0,
            p0: finite(self.p0, "p0")?,
            q0: self.q0,
            r0: self.r0,
            s1: self.s1,
            p1: finite(self.p1, "p1")?,
            q1: self.q1,
            r1: self.r1,
        })
    }
}

/// An outcome other than success, carrying its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<LabError>() {
            Some(LabError::Infeasible { .. }) => EXIT_INFEASIBLE,
            _ => EXIT_USAGE,
        };
        Failure { code, error }
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn warn_if_inexact(q: &QueryConfig) {
    if !q.is_exact() {
        eprintln!("warning: some exponents are not exact rationals; criticality is decided up to a tolerance");
    }
}

fn run_decide(q: &QueryConfig, out: &OutputPaths) -> Result<u8, Failure> {
    warn_if_inexact(q);
    let verdict: Verdict = decide(&q.to_query()?);
    let text = to_json(&verdict);
    print!("{text}");
    if let Some(path) = &out.json {
        write_file(Path::new(path), &text)?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifySummary {
    query: String,
    verdict: Verdict,
    family: FamilyKind,
    rows: Vec<RatioRow>,
    slope: Option<f64>,
    classification: Classification,
    expected: Classification,
    consistent: bool,
}

fn run_verify(q: &QueryConfig, sizes: Option<&[usize]>, family: Option<FamilyKind>, out: &OutputPaths) -> Result<u8, Failure> {
    warn_if_inexact(q);
    let query = q.to_query()?;
    let (verdict, mut spec) = family_for(&query)?;
    if let Some(kind) = family {
        spec.kind = kind;
    }
    let sizes = sizes.map(<[usize]>::to_vec).unwrap_or_else(|| spec.kind.default_sizes());
    let table = measure_ratio(&query, &spec, &sizes, &GridConfig::default())?;
    let expected = if verdict.holds { Classification::Bounded } else { Classification::Growth };
    let consistent = table.classification == expected;
    let summary = VerifySummary {
        query: query.to_string(),
        verdict,
        family: table.family,
        rows: table.rows.clone(),
        slope: table.slope,
        classification: table.classification,
        expected,
        consistent,
    };
    let text = to_json(&summary);
    print!("{text}");
    if let Some(path) = &out.csv {
        write_file(Path::new(path), &io::ratio_table_csv(&table))?;
    }
    if let Some(path) = &out.json {
        write_file(Path::new(path), &text)?;
    }
    Ok(if consistent { 0 } else { EXIT_MISMATCH })
}

#[derive(Serialize)]
struct ConstantsSummary {
    reports: Vec<ConstantReport>,
    errors: Vec<String>,
    a_fit: Option<f64>,
}

fn run_constants(p_grid: &[Ext], r_grid: &[Ext], budget: usize, seed: u64, out: &OutputPaths) -> Result<u8, Failure> {
    if p_grid.is_empty() || r_grid.is_empty() {
        return Err(anyhow::anyhow!("p-grid and r-grid must be nonempty").into());
    }
    if budget == 0 {
        return Err(anyhow::anyhow!("budget must be at least 1").into());
    }
    let ps: Vec<f64> = p_grid.iter().map(Ext::to_f64).collect();
    let rs: Vec<f64> = r_grid.iter().map(Ext::to_f64).collect();
    let cells = sweep(&ps, &rs, budget, seed);
    let csv = io::sweep_csv(&cells);
    match &out.csv {
        Some(path) => write_file(Path::new(path), &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &out.svg {
        write_file(Path::new(path), &io::sweep_svg(&cells))?;
    }
    let reports: Vec<ConstantReport> = cells.iter().filter_map(|c| c.outcome.clone().ok()).collect();
    let a_fit = fit_a(&reports);
    if let Some(a) = a_fit {
        eprintln!("A_fit = {a}");
    }
    if let Some(path) = &out.json {
        let errors = cells.iter().filter_map(|c| c.outcome.as_ref().err().map(|e| format!("p = {}, r = {}: {e}", c.p, c.r))).collect();
        write_file(Path::new(path), &to_json(&ConstantsSummary { reports, errors, a_fit }))?;
    }
    Ok(0)
}

fn run_campaign(path: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match CampaignConfig::from_json(&text)? {
        CampaignConfig::Decide { query, output } => run_decide(&query, &output),
        CampaignConfig::Verify { query, sizes, family, output } => run_verify(&query, sizes.as_deref(), family, &output),
        CampaignConfig::Constants { p_grid, r_grid, budget, seed, output } => run_constants(&p_grid, &r_grid, budget, seed, &output),
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Decide { query, json } => {
            let out = OutputPaths { json: json.map(|p| p.display().to_string()), ..Default::default() };
            run_decide(&query.to_config()?, &out)
        }
        Command::Verify { query, sizes, family, csv, json } => {
            if let Some(s) = &sizes {
                if s.is_empty() || s[0] == 0 || s.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(anyhow::anyhow!("--sizes must be positive and strictly increasing").into());
                }
            }
            let out = OutputPaths {
                csv: csv.map(|p| p.display().to_string()),
                json: json.map(|p| p.display().to_string()),
                svg: None,
            };
            run_verify(&query.to_config()?, sizes.as_deref(), family, &out)
        }
        Command::Constants { p_grid, r_grid, budget, seed, csv, json, svg } => {
            let out = OutputPaths {
                csv: csv.map(|p| p.display().to_string()),
                json: json.map(|p| p.display().to_string()),
                svg: svg.map(|p| p.display().to_string()),
            };
            run_constants(&p_grid, &r_grid, budget, seed, &out)
        }
        Command::Run { config } => run_campaign(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Err(e) = lorlab::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
