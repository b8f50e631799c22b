//! The `pcbounds` command line.
//!
//! Exit codes: `0` when a certificate was produced or verified, `2` when a
//! certification was refused or a certificate failed verification, `1` on
//! errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::alphabet::{catalan, Alphabet, AlphabetKind, BoundaryProfile};
use crate::certify::{
    candidate_vector, certify_lower, certify_upper, recompute_certificate, search_lower, search_upper, verify_certificate, BoundSide,
    Certificate, LowerConfig, Outcome, Prepared, ProbabilityChoice, SearchResult, Setup, SiteConstant, UpperConfig,
    UpperSearchConfig,
};
use crate::error::{Error, Result};
use crate::exact::parse_decimal;
use crate::iterate::{iterate_tau, write_trajectory_csv, IterationConfig, Sink, TrajectoryPoint};
use crate::mc::{estimate, simulate_k, Estimate, Statistic};
use crate::wordcode::{default_cache_dir, CodeKind, PlanOptions, DEFAULT_STATE_CAP};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_REFUSED: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "pcbounds", version, about = "Certified bounds for the fractal percolation threshold")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Directory for compiled code tables.
    #[arg(long, global = true, env = "PCBOUNDS_CACHE_DIR")]
    pub cache_dir: Option<PathBuf>,

    /// Always rebuild tables and never write them.
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Abort table construction beyond this many states per step.
    #[arg(long, global = true, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: usize,

    /// Progress on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the letters of an alphabet, or count them.
    Alphabet(AlphabetArgs),
    /// Produce a lower or upper bound certificate.
    Certify {
        #[command(subcommand)]
        side: CertifyCommand,
    },
    /// Trajectories of the two-sides-connected mass as CSV.
    Curve(CurveArgs),
    /// Monte Carlo estimates as CSV, optionally with one realization as PBM.
    Simulate(SimulateArgs),
    /// Re-check a certificate file.
    Verify(VerifyArgs),
}

#[derive(Debug, Subcommand)]
pub enum CertifyCommand {
    /// `p < p_c(M)` from the weak code.
    Lower(LowerArgs),
    /// `p_c(M) < p` from a strong code.
    Upper(UpperArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlphabetChoice {
    Full,
    Extremes,
}

impl From<AlphabetChoice> for AlphabetKind {
    fn from(c: AlphabetChoice) -> Self {
        match c {
            AlphabetChoice::Full => AlphabetKind::Full,
            AlphabetChoice::Extremes => AlphabetKind::Extremes,
        }
    }
}

#[derive(Debug, Args)]
pub struct AlphabetArgs {
    #[arg(long, default_value = "1,1,1,1")]
    pub profile: BoundaryProfile,

    /// Print only the Catalan count.
    #[arg(long)]
    pub count_only: bool,

    /// Also write a loadable dump.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Subdivision parameter.
    #[arg(short = 'M', long = "m")]
    pub m: usize,

    /// Boundary elements per side: left,top,right,bottom.
    #[arg(long, default_value = "1,1,1,1")]
    pub profile: BoundaryProfile,

    #[arg(long, value_enum)]
    pub alphabet: Option<AlphabetChoice>,
}

impl ModelArgs {
    fn setup(&self, code: CodeKind) -> Setup {
        let setup = Setup::new(self.m, self.profile, code);
        match self.alphabet {
            Some(a) => setup.with_alphabet_kind(a.into()),
            None => setup,
        }
    }
}

#[derive(Debug, Args)]
pub struct LowerArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Survival probability as a decimal.
    #[arg(short = 'p', required_unless_present = "search", conflicts_with = "search")]
    pub p: Option<String>,

    /// Bisect for the largest certifiable grid point at this power-of-ten precision.
    #[arg(long)]
    pub search: Option<f64>,

    #[arg(long, default_value = "weak")]
    pub code: CodeKind,

    /// Rigorous lower bound for the site percolation threshold.
    #[arg(long, default_value_t = crate::certify::SITE_CONSTANT)]
    pub site_constant: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,

    /// Certificate path (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct UpperArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    #[arg(short = 'p', required_unless_present = "search", conflicts_with = "search")]
    pub p: Option<String>,

    #[arg(long)]
    pub search: Option<f64>,

    #[arg(long, default_value = "strong")]
    pub code: CodeKind,

    /// Probability the candidate vector is iterated at (default `p - delta`).
    #[arg(long)]
    pub candidate_p: Option<String>,

    #[arg(long, default_value = "0.0001")]
    pub delta: String,

    #[arg(long, default_value_t = 1000)]
    pub max_iterations: usize,

    /// Stop the candidate iteration once no mass moves by more than this.
    #[arg(long, default_value_t = 0.0)]
    pub stagnation: f64,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(short = 'M', long = "m")]
    pub m: usize,

    #[arg(long, default_value = "1,1,1,1")]
    pub profile: BoundaryProfile,

    /// Comma-separated survival probabilities, one column each.
    #[arg(short = 'p', value_delimiter = ',', required = true)]
    pub p: Vec<f64>,

    #[arg(long, default_value_t = 1000)]
    pub n_max: usize,

    #[arg(long, default_value = "weak")]
    pub code: CodeKind,

    /// One row per (n, p) with all tracked quantities instead of one column per p.
    #[arg(long)]
    pub long: bool,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(short = 'M', long = "m")]
    pub m: usize,

    #[arg(short = 'p', value_delimiter = ',', required = true)]
    pub p: Vec<f64>,

    /// Depths, comma-separated.
    #[arg(short = 'n', value_delimiter = ',', required = true)]
    pub n: Vec<usize>,

    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,

    #[arg(long, value_delimiter = ',', default_value = "pi")]
    pub stat: Vec<Statistic>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Write the first realization of the first (p, n) as a PBM image.
    #[arg(long)]
    pub pbm: Option<PathBuf>,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub certificate: PathBuf,

    /// Also replay the computation on compiled tables.
    #[arg(long)]
    pub recompute: bool,
}

/// Parses arguments and runs; never panics on bad input.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Alphabet(a) => cmd_alphabet(a),
        Command::Certify { side: CertifyCommand::Lower(a) } => cmd_lower(cli, a),
        Command::Certify { side: CertifyCommand::Upper(a) } => cmd_upper(cli, a),
        Command::Curve(a) => cmd_curve(cli, a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(cli, a),
    }
}

fn cache_dir(cli: &Cli) -> Option<PathBuf> {
    if cli.no_cache {
        None
    } else {
        Some(cli.cache_dir.clone().unwrap_or_else(default_cache_dir))
    }
}

fn prepare(cli: &Cli, setup: &Setup) -> Result<Prepared> {
    let opts = PlanOptions { state_cap: cli.state_cap, verbose: cli.verbose };
    let started = Instant::now();
    let prepared = setup.prepare(cache_dir(cli).as_deref(), &opts)?;
    if cli.verbose {
        eprintln!(
            "tables: {} letters, {} states, {:.2}s",
            prepared.alphabet.len(),
            prepared.plan.total_states(),
            started.elapsed().as_secs_f64()
        );
    }
    Ok(prepared)
}

/// Writes to `path`, or stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Timing lives beside the output so the output itself stays reproducible.
fn write_sidecar(output: Option<&Path>, started: Instant) -> Result<()> {
    if let Some(path) = output {
        let mut log = path.as_os_str().to_owned();
        log.push(".log");
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let args: Vec<String> = std::env::args().collect();
        let text = format!(
            "command: {}\nfinished_unix: {now}\nelapsed_seconds: {:.3}\n",
            args.join(" "),
            started.elapsed().as_secs_f64()
        );
        std::fs::write(log, text)?;
    }
    Ok(())
}

fn finish_certificate(cert: &Certificate, output: Option<&Path>, started: Instant) -> Result<u8> {
    let json = cert.to_json()?;
    emit(output, &(json + "\n"))?;
    write_sidecar(output, started)?;
    Ok(EXIT_OK)
}

fn finish_outcome(outcome: Outcome, output: Option<&Path>, started: Instant) -> Result<u8> {
    match outcome {
        Outcome::Certified(cert) => {
            eprintln!("certified: {} after {} iterations", cert.statement(), cert.iterations);
            finish_certificate(&cert, output, started)
        }
        Outcome::Refused(r) => {
            eprintln!("refused at p = {} after {} iterations: {} (last value {:?})", r.p, r.iterations, r.reason, r.last_value);
            Ok(EXIT_REFUSED)
        }
    }
}

fn finish_search(result: SearchResult, output: Option<&Path>, started: Instant) -> Result<u8> {
    if let Some(r) = &result.bracket {
        eprintln!("first refused grid point: {} ({})", r.p, r.reason);
    }
    eprintln!("{} probes", result.probes);
    match result.best {
        Some((p, cert)) => {
            eprintln!("best certified grid point {p}: {}", cert.statement());
            finish_certificate(&cert, output, started)
        }
        None => {
            eprintln!("no grid point could be certified");
            Ok(EXIT_REFUSED)
        }
    }
}

fn cmd_alphabet(args: &AlphabetArgs) -> Result<u8> {
    let n = args.profile.total();
    if args.count_only {
        println!("{}", catalan(n as u64));
        return Ok(EXIT_OK);
    }
    let alphabet = Alphabet::enumerate(args.profile)?;
    let mut out = std::io::BufWriter::new(std::io::stdout().lock());
    for l in alphabet.letters() {
        writeln!(out, "{l}")?;
    }
    out.flush()?;
    if let Some(path) = &args.output {
        let file = std::fs::File::create(path)?;
        alphabet.dump(std::io::BufWriter::new(file))?;
    }
    Ok(EXIT_OK)
}

fn cmd_lower(cli: &Cli, args: &LowerArgs) -> Result<u8> {
    let started = Instant::now();
    let config =
        LowerConfig { max_iterations: args.max_iterations, site_constant: SiteConstant::new(args.site_constant)? };
    let prepared = prepare(cli, &args.model.setup(args.code))?;
    let output = args.output.as_deref();
    match (&args.p, args.search) {
        (Some(p), _) => {
            let p = ProbabilityChoice::parse(p, BoundSide::Lower)?;
            finish_outcome(certify_lower(&prepared, &p, &config)?, output, started)
        }
        (None, Some(precision)) => finish_search(search_lower(&prepared, precision, &config)?, output, started),
        (None, None) => Err(Error::Config("either -p or --search is required".into())),
    }
}

fn cmd_upper(cli: &Cli, args: &UpperArgs) -> Result<u8> {
    let started = Instant::now();
    let candidate = UpperConfig { max_iterations: args.max_iterations, stagnation_tolerance: args.stagnation };
    let delta = parse_decimal(&args.delta)?;
    let prepared = prepare(cli, &args.model.setup(args.code))?;
    let output = args.output.as_deref();
    match (&args.p, args.search) {
        (Some(p), _) => {
            let p = ProbabilityChoice::parse(p, BoundSide::Upper)?;
            let q = match &args.candidate_p {
                Some(q) => ProbabilityChoice::parse(q, BoundSide::Upper)?,
                None => p.below(&delta)?,
            };
            let (x, source) = candidate_vector(&prepared, &q, &candidate)?;
            if cli.verbose {
                eprintln!("candidate at q = {} after {} iterations", q.decimal, source.iterations);
            }
            finish_outcome(certify_upper(&prepared, &p, &x, Some(&source))?, output, started)
        }
        (None, Some(precision)) => {
            let config = UpperSearchConfig { candidate, delta, floor: None };
            finish_search(search_upper(&prepared, precision, &config)?, output, started)
        }
        (None, None) => Err(Error::Config("either -p or --search is required".into())),
    }
}

fn cmd_curve(cli: &Cli, args: &CurveArgs) -> Result<u8> {
    let prepared = prepare(cli, &Setup::new(args.m, args.profile, args.code))?;
    let alphabet = &prepared.alphabet;
    // over-estimates for the weak code, under-estimates for strong ones
    let sink = if args.code.is_strong() { Sink::Min } else { Sink::Max };
    let mut columns: Vec<Vec<TrajectoryPoint>> = Vec::with_capacity(args.p.len());
    for &p in &args.p {
        let start = TrajectoryPoint::of(
            alphabet,
            0,
            p,
            &crate::iterate::LetterDistribution::point_mass(alphabet, alphabet.max(), sink),
        );
        let mut points = vec![start];
        iterate_tau(prepared.map()?, &IterationConfig::new(p, args.n_max, sink), |n, x| {
            points.push(TrajectoryPoint::of(alphabet, n, p, x));
        })?;
        columns.push(points);
    }
    let mut buf = Vec::new();
    if args.long {
        let all: Vec<TrajectoryPoint> = columns.into_iter().flatten().collect();
        write_trajectory_csv(&mut buf, &all)?;
    } else {
        let header: Vec<String> = args.p.iter().map(|p| format!("{p:?}")).collect();
        writeln!(buf, "n,{}", header.join(","))?;
        for n in 0..=args.n_max {
            let row: Vec<String> = columns.iter().map(|c| format!("{:?}", c[n].upset_mass_pi)).collect();
            writeln!(buf, "{n},{}", row.join(","))?;
        }
    }
    emit(args.output.as_deref(), &String::from_utf8(buf).expect("ascii csv"))?;
    Ok(EXIT_OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    if let Some(path) = &args.pbm {
        let (p, n) = (args.p[0], args.n[0]);
        std::fs::write(path, simulate_k(args.m, p, n, args.seed)?.to_pbm())?;
    }
    let mut out = format!("{}\n", Estimate::CSV_HEADER);
    for &p in &args.p {
        for &n in &args.n {
            for &stat in &args.stat {
                out.push_str(&estimate(args.m, p, n, args.trials, stat, args.seed)?.csv_row());
                out.push('\n');
            }
        }
    }
    emit(args.output.as_deref(), &out)?;
    Ok(EXIT_OK)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> Result<u8> {
    let cert = Certificate::read(&args.certificate)?;
    let report = if args.recompute {
        let kind = match cert.alphabet.as_str() {
            "extremes" => AlphabetKind::Extremes,
            _ => AlphabetKind::Full,
        };
        let setup = Setup::new(cert.m, cert.profile.parse()?, cert.code).with_alphabet_kind(kind);
        recompute_certificate(&cert, &prepare(cli, &setup)?)?
    } else {
        verify_certificate(&cert)?
    };
    for check in &report.checks {
        println!("{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    if report.passed() {
        println!("valid: {}", cert.statement());
        Ok(EXIT_OK)
    } else {
        println!("invalid");
        Ok(EXIT_REFUSED)
    }
}
