//! Command-line front end: reads inputs, runs one pipeline, writes
//! `report.json` plus CSV traces to the output directory and prints a short
//! summary.
//!
//! Exit codes: 0 PASS (or success without a verdict), 1 FAIL,
//! 2 INCONCLUSIVE, 10 usage error, 11 I/O error, 12 input or numerical error.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use tauberkit::measures::{normalize_lattice, ArithWeights, GridDensity, LatticeDist};
use tauberkit::renewal::{
    blackwell_increments, checked_len, continuous_renewal, dirichlet_renewal_capped, partial_sum_ratio,
    renewal_sequence, DIRICHLET_CAP,
};
use tauberkit::tauber::{
    check_b1, check_b2, check_b3, check_bounded_decrease, check_koga_integral, check_slow_decrease,
    estimate_limit, fejer_probe, power_support_report, ConditionReport, LimitEstimate, LimitMode, LowerBound,
    Verdict,
};
use tauberkit::transforms::{halving_schedule, sample_boundary, PowerCoeffs, SampledFunction, SeriesSpec};
use tauberkit::Trace;

pub mod format;

pub const EXIT_USAGE: i32 = 10;
pub const EXIT_IO: i32 = 11;
pub const EXIT_INPUT: i32 = 12;

#[derive(Debug, Parser)]
#[command(name = "tauberkit", version, about = "Renewal solvers and Tauberian condition checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a renewal equation.
    #[command(subcommand)]
    Renewal(RenewalCmd),
    /// Probe transform behaviour near the boundary.
    #[command(subcommand)]
    Probe(ProbeCmd),
    /// Check a Tauberian side condition on sampled data.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Extrapolate lim d·U(1+d) (sigma) or lim d·U(1-d) (abel).
    Limit(LimitArgs),
}

#[derive(Debug, Subcommand)]
enum RenewalCmd {
    /// Lattice renewal sequence q_n.
    Lattice {
        /// Lattice distribution JSON: {"span": α, "probs": [p_1, p_2, ...]}.
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, default_value_t = 100_000, allow_negative_numbers = true)]
        n: i64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Dirichlet renewal f = e + f⋆g and the partial-sum ratio S(x)/x.
    Dirichlet {
        /// Weights JSON: {"g": {"2": g(2), ...}}.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 100_000, allow_negative_numbers = true)]
        x: i64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Continuous renewal function Q from a sampled density.
    Continuous {
        /// CSV with header and columns x,density on a uniform grid from 0.
        #[arg(long)]
        density: PathBuf,
        /// Density mass beyond the last grid point.
        #[arg(long, default_value_t = 0.0)]
        tail_mass: f64,
        #[arg(long, default_value_t = 10.0)]
        xmax: f64,
        /// Window of the Blackwell increments Q(x+h) - Q(x).
        #[arg(long, default_value_t = 0.5)]
        h: f64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand)]
enum ProbeCmd {
    /// Sample Re F on the boundary-approach grid and check B1-B3 (b1-b3).
    Boundary {
        #[command(flatten)]
        spec: SpecArgs,
        /// Transverse half-width (t range in the half-plane, θ range in the disc).
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// Declared growth order for the third condition.
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Constant lower bound g for the third condition.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        g_lower: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fejér-kernel boundedness probe of ∫ Re F(σ+it) φ(t) cos(ht) dt.
    Fejer {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Comma-separated frequencies.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256,512,1024")]
        h_list: Vec<f64>,
        /// Schedule depth: σ - 1 = 2^-j for j = 1..=depth.
        #[arg(long, default_value_t = 40)]
        depth: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand)]
enum CheckCmd {
    /// Log-linear slow decrease of sampled S.
    Slowdecrease {
        #[command(flatten)]
        samples: SamplesArgs,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.2,0.1")]
        h_list: Vec<f64>,
        /// Comma-separated x0 values; defaults to 0, X/8, X/4, X/2.
        #[arg(long, value_delimiter = ',')]
        x0_list: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Log-linear bounded decrease of sampled S.
    Boundeddecrease {
        #[command(flatten)]
        samples: SamplesArgs,
        #[arg(long, default_value_t = 0.2)]
        h: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Finiteness of ∫_1^∞ |S(x)| / (x^k e^x) dx.
    Koga {
        #[command(flatten)]
        samples: SamplesArgs,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long, default_value_t = 20)]
    depth: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SamplesArgs {
    /// CSV with header and columns x,value on a uniform grid from 0.
    #[arg(long)]
    samples: PathBuf,
    /// Declared growth exponent ρ in |S(x)| <= C e^x x^ρ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    growth_exponent: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Sigma,
    Abel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum SpecId {
    Zero,
    ExpRenewal,
    PoleOnly,
    DoublePole,
    DirichletWeights,
    LatticeRenewal,
    PowerCoeffs,
    PowerRenewal,
    Sampled,
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long, value_enum)]
    spec: SpecId,
    /// Residue for pole_only.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Weights JSON for dirichlet_weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Lattice distribution JSON for lattice_renewal and power_renewal.
    #[arg(long)]
    probs: Option<PathBuf>,
    /// Coefficients JSON for power_coeffs: {"coeffs": [...], "bound": B}.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Samples CSV for sampled.
    #[arg(long)]
    samples: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    growth_exponent: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Input { code: &'static str, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Input { .. } => EXIT_INPUT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Input { code, message } => write!(f, "error[{code}]: {message}"),
        }
    }
}

impl From<tauberkit::Error> for CliError {
    fn from(e: tauberkit::Error) -> Self {
        CliError::Input {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError::Input {
        code: "INVALID_INPUT",
        message: message.into(),
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Everything a run writes to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub verdict: Option<Verdict>,
    pub summary: String,
    /// Flags and inputs the run was invoked with.
    pub inputs: BTreeMap<String, String>,
    #[serde(with = "tauberkit::serde_float::map")]
    pub results: BTreeMap<String, f64>,
    pub conditions: Vec<ConditionReport>,
    pub limit: Option<LimitEstimate>,
    /// Trace and grid files written next to the report.
    pub evidence: Vec<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_owned(),
            verdict: None,
            summary: String::new(),
            inputs: BTreeMap::new(),
            results: BTreeMap::new(),
            conditions: Vec::new(),
            limit: None,
            evidence: Vec::new(),
        }
    }

    fn input(&mut self, k: &str, v: impl ToString) {
        self.inputs.insert(k.to_owned(), v.to_string());
    }

    fn result(&mut self, k: &str, v: f64) {
        self.results.insert(k.to_owned(), v);
    }

    /// The one-line summary, derived from the other fields only.
    pub fn summary_line(&self) -> String {
        let mut parts = vec![
            self.command.clone(),
            self.verdict.map_or("OK", Verdict::as_str).to_owned(),
        ];
        parts.extend(self.results.iter().map(|(k, v)| format!("{k}={v:.6e}")));
        let mut line = parts.join(" ");
        for c in &self.conditions {
            line.push_str(" | ");
            line.push_str(&c.summary());
        }
        line
    }

    fn finish(mut self) -> Self {
        self.summary = self.summary_line();
        self
    }
}

/// Parses `argv` (including the program name), runs the pipeline and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    configure_threads();
    match execute(cli) {
        Ok((report, dir)) => {
            let mut stdout = io::stdout().lock();
            let _ = writeln!(stdout, "{}", report.summary);
            for c in &report.conditions {
                if let Some(w) = &c.witness {
                    let w: Vec<String> = w.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
                    let _ = writeln!(stdout, "  {} witness: {}", c.condition.as_str(), w.join(" "));
                }
            }
            let _ = writeln!(stdout, "  wrote {}", dir.join("report.json").display());
            for f in &report.evidence {
                let _ = writeln!(stdout, "  wrote {}", dir.join(f).display());
            }
            report.verdict.map_or(0, Verdict::exit_code)
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// `TAUBERKIT_THREADS` sets the worker count; unset or 0 means automatic.
fn configure_threads() {
    if let Some(n) = std::env::var("TAUBERKIT_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn execute(cli: Cli) -> Result<(Report, PathBuf), CliError> {
    let (report, out, files) = match cli.command {
        Command::Renewal(RenewalCmd::Lattice { probs, n, out }) => renewal_lattice(&probs, n, out.out)?,
        Command::Renewal(RenewalCmd::Dirichlet { weights, x, out }) => renewal_dirichlet(&weights, x, out.out)?,
        Command::Renewal(RenewalCmd::Continuous {
            density,
            tail_mass,
            xmax,
            h,
            out,
        }) => renewal_continuous(&density, tail_mass, xmax, h, out.out)?,
        Command::Probe(ProbeCmd::Boundary {
            spec,
            lambda,
            depth,
            points,
            k,
            g_lower,
            out,
        }) => probe_boundary(&spec, lambda, depth, points, k, g_lower, out.out)?,
        Command::Probe(ProbeCmd::Fejer {
            spec,
            lambda,
            h_list,
            depth,
            out,
        }) => probe_fejer(&spec, lambda, &h_list, depth, out.out)?,
        Command::Check(CheckCmd::Slowdecrease {
            samples,
            eps,
            h_list,
            x0_list,
            out,
        }) => check_slow(&samples, eps, &h_list, x0_list, out.out)?,
        Command::Check(CheckCmd::Boundeddecrease { samples, h, out }) => check_bounded(&samples, h, out.out)?,
        Command::Check(CheckCmd::Koga { samples, k, out }) => check_koga(&samples, k, out.out)?,
        Command::Limit(args) => limit(&args)?,
    };
    fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let mut report = report;
    for (name, contents) in &files {
        let path = out.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        report.evidence.push(name.clone());
    }
    for c in &mut report.conditions {
        c.evidence = report.evidence.clone();
    }
    let report = report.finish();
    let path = out.join("report.json");
    fs::write(&path, format::to_json(&report)).map_err(|e| io_error(&path, e))?;
    Ok((report, out))
}

type Outcome = (Report, PathBuf, Vec<(String, String)>);

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeFile {
    span: f64,
    probs: Vec<f64>,
    #[serde(default)]
    p0: f64,
}

/// Reads `{"span": α, "probs": [p_1, ...]}`, reducing to the maximal span.
pub fn read_lattice(path: &Path) -> Result<LatticeDist, CliError> {
    let f: LatticeFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let mut masses = vec![f.p0];
    masses.extend(&f.probs);
    let d = LatticeDist::from_origin_masses(f.span, &masses)?;
    Ok(normalize_lattice(d.span(), d.probs())?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightsFile {
    g: BTreeMap<String, f64>,
    tolerance: Option<f64>,
}

/// Reads `{"g": {"2": g(2), ...}}` with an optional `"tolerance"` on Σ g(n)/n = 1.
pub fn read_weights(path: &Path) -> Result<ArithWeights, CliError> {
    let f: WeightsFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let mut g = BTreeMap::new();
    for (k, v) in f.g {
        let n: u64 = k
            .trim()
            .parse()
            .map_err(|_| input_error(format!("{}: key {k:?} is not a positive integer", path.display())))?;
        g.insert(n, v);
    }
    Ok(match f.tolerance {
        Some(tol) => ArithWeights::with_tolerance(g, tol)?,
        None => ArithWeights::new(g)?,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CoeffsFile {
    coeffs: Vec<f64>,
    bound: Option<f64>,
}

fn read_coeffs(path: &Path) -> Result<PowerCoeffs, CliError> {
    let f: CoeffsFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(PowerCoeffs::new(f.coeffs, f.bound)?)
}

/// Reads a two-column CSV with a header on a uniform grid starting at 0 and
/// returns the step and the second column.
pub fn read_uniform_csv(path: &Path) -> Result<(f64, Vec<f64>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(input_error(format!("{}: row {} needs two columns", path.display(), i + 2)));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| input_error(format!("{}: row {}: {s:?} is not a number", path.display(), i + 2)))
        };
        xs.push(parse(&record[0])?);
        ys.push(parse(&record[1])?);
    }
    if xs.len() < 2 {
        return Err(input_error(format!("{}: need at least two rows", path.display())));
    }
    let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
    if !(step > 0.0) || xs[0].abs() > 1e-9 * step {
        return Err(input_error(format!("{}: x must start at 0 and increase", path.display())));
    }
    for (i, &x) in xs.iter().enumerate() {
        let expected = i as f64 * step;
        if (x - expected).abs() > 1e-6 * step {
            return Err(input_error(format!(
                "{}: x = {x} at row {} breaks the uniform spacing {step}",
                path.display(),
                i + 2
            )));
        }
    }
    Ok((step, ys))
}

fn read_samples(args: &SamplesArgs) -> Result<SampledFunction, CliError> {
    let (step, values) = read_uniform_csv(&args.samples)?;
    Ok(SampledFunction::new(step, values, args.growth_exponent)?)
}

fn build_spec(args: &SpecArgs, report: &mut Report) -> Result<SeriesSpec, CliError> {
    let need = |p: &Option<PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| CliError::Usage(format!("--spec {} requires --{flag}", spec_name(args.spec))))
    };
    report.input("spec", spec_name(args.spec));
    Ok(match args.spec {
        SpecId::Zero => SeriesSpec::Zero,
        SpecId::ExpRenewal => SeriesSpec::ExpRenewal,
        SpecId::DoublePole => SeriesSpec::DoublePole,
        SpecId::PoleOnly => {
            let a = args
                .a
                .ok_or_else(|| CliError::Usage("--spec pole_only requires --a".into()))?;
            report.input("a", a);
            SeriesSpec::PoleOnly { a }
        }
        SpecId::DirichletWeights => {
            let p = need(&args.weights, "weights")?;
            report.input("weights", p.display());
            SeriesSpec::DirichletWeights(read_weights(&p)?)
        }
        SpecId::LatticeRenewal | SpecId::PowerRenewal => {
            let p = need(&args.probs, "probs")?;
            report.input("probs", p.display());
            let d = read_lattice(&p)?;
            if args.spec == SpecId::LatticeRenewal {
                SeriesSpec::LatticeRenewal(d)
            } else {
                SeriesSpec::PowerRenewal(d)
            }
        }
        SpecId::PowerCoeffs => {
            let p = need(&args.coeffs, "coeffs")?;
            report.input("coeffs", p.display());
            SeriesSpec::PowerCoeffs(read_coeffs(&p)?)
        }
        SpecId::Sampled => {
            let p = need(&args.samples, "samples")?;
            report.input("samples", p.display());
            report.input("growth_exponent", args.growth_exponent);
            let (step, values) = read_uniform_csv(&p)?;
            SeriesSpec::Sampled(SampledFunction::new(step, values, args.growth_exponent)?)
        }
    })
}

fn spec_name(id: SpecId) -> &'static str {
    match id {
        SpecId::Zero => "zero",
        SpecId::ExpRenewal => "exp_renewal",
        SpecId::PoleOnly => "pole_only",
        SpecId::DoublePole => "double_pole",
        SpecId::DirichletWeights => "dirichlet_weights",
        SpecId::LatticeRenewal => "lattice_renewal",
        SpecId::PowerCoeffs => "power_coeffs",
        SpecId::PowerRenewal => "power_renewal",
        SpecId::Sampled => "sampled",
    }
}

fn trace_csv(trace: &Trace) -> String {
    format::csv(
        &["x", "value", "target"],
        trace.xs.iter().zip(&trace.values).map(|(&x, &v)| vec![x, v, trace.target]),
    )
}

fn renewal_lattice(probs: &Path, n: i64, out: PathBuf) -> Result<Outcome, CliError> {
    let n = checked_len(n)?;
    let d = read_lattice(probs)?;
    let seq = renewal_sequence(&d, n);
    let mut report = Report::new("renewal lattice");
    report.input("probs", probs.display());
    report.input("n", n);
    report.result("span", d.span());
    report.result("q_last", seq.q()[n]);
    let target = match d.mean() {
        Ok(mean) => {
            let a = d.span() / mean;
            report.result("limit", a);
            a
        }
        Err(_) => 0.0,
    };
    let trace = seq.deviation_trace(target);
    report.result("tail_sup_deviation", trace.sup_deviation_tail);
    report.result("tail_window_lo", trace.window[0]);
    report.result("tail_window_hi", trace.window[1]);
    Ok((report, out, vec![("q.csv".into(), trace_csv(&trace))]))
}

fn renewal_dirichlet(weights: &Path, x: i64, out: PathBuf) -> Result<Outcome, CliError> {
    let x = checked_len(x)?;
    let w = read_weights(weights)?;
    let a = dirichlet_renewal_capped(&w, x, DIRICHLET_CAP)?;
    let ratio = partial_sum_ratio(&a);
    let mut report = Report::new("renewal dirichlet");
    report.input("weights", weights.display());
    report.input("x", x);
    report.result("limit", a.limit_target());
    report.result("log_moment", w.log_moment());
    report.result("partial_sum", a.partial_sum(x));
    report.result("last_decade_sup_deviation", ratio.trace.sup_deviation_tail);
    if let Some(amp) = ratio.decades.iter().map(|d| d.amplitude()).reduce(f64::max) {
        report.result("max_decade_amplitude", amp);
    }
    let support = power_support_report(&w)?;
    report.verdict = Some(support.verdict);
    report.conditions.push(support);
    Ok((report, out, vec![("ratio.csv".into(), trace_csv(&ratio.trace))]))
}

fn renewal_continuous(density: &Path, tail_mass: f64, xmax: f64, h: f64, out: PathBuf) -> Result<Outcome, CliError> {
    positive("xmax", xmax)?;
    positive("h", h)?;
    let (step, values) = read_uniform_csv(density)?;
    let p = GridDensity::new(step, values, tail_mass)?;
    let grid = continuous_renewal(&p, xmax)?;
    let mean = p.mean()?;
    let inc = blackwell_increments(&grid, h, mean)?;
    let mut report = Report::new("renewal continuous");
    report.input("density", density.display());
    report.input("tail_mass", tail_mass);
    report.input("xmax", xmax);
    report.input("h", h);
    report.result("mean", mean);
    report.result("step", grid.step());
    report.result("q_last", *grid.values().last().expect("nonempty grid"));
    report.result("blackwell_target", h / mean);
    report.result("blackwell_tail_sup_deviation", inc.sup_deviation_tail);
    let q_csv = format::csv(
        &["x", "value"],
        grid.xs().zip(grid.values()).map(|(x, &q)| vec![x, q]),
    );
    Ok((
        report,
        out,
        vec![("Q.csv".into(), q_csv), ("blackwell.csv".into(), trace_csv(&inc))],
    ))
}

#[allow(clippy::too_many_arguments)]
fn probe_boundary(
    spec_args: &SpecArgs,
    lambda: f64,
    depth: usize,
    points: usize,
    k: u32,
    g_lower: f64,
    out: PathBuf,
) -> Result<Outcome, CliError> {
    positive("lambda", lambda)?;
    if depth == 0 {
        return Err(CliError::Usage("--depth must be at least 1".into()));
    }
    let mut report = Report::new("probe boundary");
    let spec = build_spec(spec_args, &mut report)?;
    for (key, v) in [("lambda", lambda), ("g_lower", g_lower)] {
        report.input(key, v);
    }
    report.input("depth", depth);
    report.input("points", points);
    report.input("k", k);
    let grid = sample_boundary(&spec, lambda, &halving_schedule(depth), points)?;
    let domain = spec.domain();
    let reports = vec![
        check_b1(&grid, domain)?,
        check_b2(&grid, domain)?,
        check_b3(&grid, &LowerBound::Constant(g_lower), k, domain)?,
    ];
    report.verdict = Some(if reports.iter().any(|r| r.verdict == Verdict::Pass) {
        Verdict::Pass
    } else if reports.iter().all(|r| r.verdict == Verdict::Fail) {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    });
    report.conditions = reports;
    Ok((report, out, vec![("grid.json".into(), format::to_json(&grid))]))
}

fn probe_fejer(spec_args: &SpecArgs, lambda: f64, h_list: &[f64], depth: usize, out: PathBuf) -> Result<Outcome, CliError> {
    positive("lambda", lambda)?;
    for &h in h_list {
        positive("h-list", h)?;
    }
    if depth == 0 {
        return Err(CliError::Usage("--depth must be at least 1".into()));
    }
    let mut report = Report::new("probe fejer");
    let spec = build_spec(spec_args, &mut report)?;
    report.input("lambda", lambda);
    report.input("h_list", join(h_list));
    report.input("depth", depth);
    let r = fejer_probe(&spec, lambda, h_list, &halving_schedule(depth))?;
    report.verdict = Some(r.verdict);
    report.conditions.push(r);
    Ok((report, out, Vec::new()))
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn check_slow(
    samples: &SamplesArgs,
    eps: f64,
    h_list: &[f64],
    x0_list: Option<Vec<f64>>,
    out: PathBuf,
) -> Result<Outcome, CliError> {
    if !(eps >= 0.0) {
        return Err(CliError::Usage(format!("--eps must be non-negative, got {eps}")));
    }
    let s = read_samples(samples)?;
    let x = s.x_max();
    let x0_list = x0_list.unwrap_or_else(|| vec![0.0, x / 8.0, x / 4.0, x / 2.0]);
    let mut report = Report::new("check slowdecrease");
    report.input("samples", samples.samples.display());
    report.input("eps", eps);
    report.input("h_list", join(h_list));
    report.input("x0_list", join(&x0_list));
    let r = check_slow_decrease(&s, eps, h_list, &x0_list)?;
    report.verdict = Some(r.verdict);
    report.conditions.push(r);
    Ok((report, out, Vec::new()))
}

fn check_bounded(samples: &SamplesArgs, h: f64, out: PathBuf) -> Result<Outcome, CliError> {
    positive("h", h)?;
    let s = read_samples(samples)?;
    let mut report = Report::new("check boundeddecrease");
    report.input("samples", samples.samples.display());
    report.input("h", h);
    let r = check_bounded_decrease(&s, h)?;
    report.verdict = Some(r.verdict);
    report.conditions.push(r);
    Ok((report, out, Vec::new()))
}

fn check_koga(samples: &SamplesArgs, k: u32, out: PathBuf) -> Result<Outcome, CliError> {
    if k == 0 {
        return Err(CliError::Usage("--k must be at least 1".into()));
    }
    let s = read_samples(samples)?;
    let mut report = Report::new("check koga");
    report.input("samples", samples.samples.display());
    report.input("growth_exponent", samples.growth_exponent);
    report.input("k", k);
    let r = check_koga_integral(&s, k)?;
    report.verdict = Some(r.verdict);
    report.conditions.push(r);
    Ok((report, out, Vec::new()))
}

fn limit(args: &LimitArgs) -> Result<Outcome, CliError> {
    let mut report = Report::new("limit");
    let spec = build_spec(&args.spec, &mut report)?;
    let mode = match args.mode {
        ModeArg::Sigma => LimitMode::Sigma,
        ModeArg::Abel => LimitMode::Abel,
    };
    report.input("mode", if mode == LimitMode::Sigma { "sigma" } else { "abel" });
    report.input("depth", args.depth);
    let e = estimate_limit(&spec, mode, args.depth)?;
    report.result("a", e.extrapolated);
    report.result("extrapolation_residual", e.extrapolation_residual);
    let csv = format::csv(
        &["x", "value", "target"],
        e.samples.iter().map(|s| vec![s[0], s[1], e.extrapolated]),
    );
    report.limit = Some(e);
    Ok((report, args.out.out.clone(), vec![("samples.csv".into(), csv)]))
}
