//! Command-line front end for the toroidal dimer tools.

mod config;
mod verify;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torus_dimer::crsf::mc_height_law;
use torus_dimer::dimer::Frame;
use torus_dimer::distribution::{check_monotone, convergence_sweep, height_law_exact, sweep_csv, tv_distance};
use torus_dimer::graph::{load_graph, write_graph};
use torus_dimer::laplacian::det_csv;
use torus_dimer::special::discrete_gaussian;
use torus_dimer::transfer::{choose_cycles, transfer_csv};
use torus_dimer::{Character, ConductanceProfile, Error, HomologyClass, TemperleyanGraph, TorusGraph};

const EXIT_VERIFY: u8 = 1;
const EXIT_ALIASING: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_SAMPLING: u8 = 4;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "torus-dimer", version, args_override_self = true)]
#[command(about = "Height-change laws of Temperleyan dimers on flat tori")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat key=value file of default options; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Exact law of the height-change class by Fourier inversion.
    Law(LawArgs),
    /// Distance to the discrete Gaussian along a sequence of lattices.
    Converge(ConvergeArgs),
    /// Monte Carlo law from sampled CRSF pairs.
    Sample(SampleArgs),
    /// Write a square-lattice torus in the text graph format.
    Generate(GenerateArgs),
    /// Twisted Laplacian determinants on a character grid.
    DetCsv(GridArgs),
    /// Transfer-operator norms and determinants on a character grid.
    TransferCsv(GridArgs),
}

#[derive(Args)]
struct Lattice {
    /// Side of the square lattice.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Shift `sx,sy` of the second period; defaults to `0,n`.
    #[arg(long, value_parser = parse_shift)]
    shift: Option<(i64, i64)>,
}

impl Lattice {
    fn shift(&self) -> (i64, i64) {
        self.shift.unwrap_or((0, self.n as i64))
    }

    fn build(&self) -> torus_dimer::Result<TorusGraph<f64>> {
        TorusGraph::square(self.n, self.shift(), ConductanceProfile::Uniform)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Comma-separated subset of checks.
    #[arg(long, value_delimiter = ',', value_parser = clap::builder::PossibleValuesParser::new(verify::CHECKS))]
    only: Vec<String>,
    /// Lattice side for the checks that do not enumerate.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, hide = true)]
    inject_omega_flip: bool,
}

#[derive(Args)]
struct LawArgs {
    #[command(flatten)]
    lattice: Lattice,
    /// Read the graph from a file instead of building a lattice.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Odd character grid size.
    #[arg(long = "M", default_value_t = 9)]
    m: usize,
    /// Law JSON destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Strictly ascending lattice sides, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Target modulus, e.g. `i`, `0.125+1i` or `(1+8i)/8`.
    #[arg(long, value_parser = parse_tau, default_value = "i")]
    tau: Complex<f64>,
    /// Odd character grid size.
    #[arg(long = "M", default_value_t = 9)]
    m: usize,
    /// Allowed increase of the distance from one size to the next.
    #[arg(long, default_value_t = 1e-3)]
    slack: f64,
    /// CSV destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    lattice: Lattice,
    /// Number of CRSF pairs to draw, at least 100.
    #[arg(long, value_parser = clap::value_parser!(u64).range(100..))]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Grid size for the exact comparison law.
    #[arg(long = "M", default_value_t = 9)]
    m: usize,
    /// Law JSON destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    lattice: Lattice,
    /// Draw conductances uniformly from [0.1, 2) with this seed.
    #[arg(long)]
    random_seed: Option<u64>,
    /// Graph file destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    lattice: Lattice,
    /// Characters `(j/k, l/k)` for `0 <= j, l < k`.
    #[arg(long, default_value_t = 8)]
    grid: usize,
    /// CSV destination; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_shift(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected sx,sy")?;
    let sx = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let sy = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    Ok((sx, sy))
}

/// `a+bi`, `bi`, `i`, `a`, optionally as `(..)/d`; the imaginary part must
/// be positive.
fn parse_tau(s: &str) -> Result<Complex<f64>, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (body, denom) = match s.strip_prefix('(').and_then(|r| r.split_once(")/")) {
        Some((b, d)) => (b.to_string(), d.parse::<f64>().map_err(|e| format!("{d}: {e}"))?),
        None => (s.clone(), 1.0),
    };
    let tau = parse_complex(&body).ok_or_else(|| format!("cannot read {s:?} as a complex number"))? / denom;
    if tau.im > 0.0 && tau.is_finite() {
        Ok(tau)
    } else {
        Err(format!("tau must have positive imaginary part, got {tau}"))
    }
}

fn parse_complex(s: &str) -> Option<Complex<f64>> {
    let Some(im) = s.strip_suffix('i') else {
        return s.parse().ok().map(|re| Complex::new(re, 0.0));
    };
    let coeff = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => t.parse().ok(),
    };
    // last sign that is not part of an exponent splits real and imaginary
    let bytes = im.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Some(Complex::new(im[..k].parse().ok()?, coeff(&im[k..])?)),
        None => Some(Complex::new(0.0, coeff(im)?)),
    }
}

fn write_out(out: Option<&Path>, text: &str) -> torus_dimer::Result<()> {
    match out {
        Some(p) => {
            let path = config::resolve_out(p);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => emit(text),
    }
    Ok(())
}

// A closed pipe (`| head`) only means nobody wants the rest; the exit code
// still reports the outcome.
fn emit(text: &str) {
    if let Err(e) = io::stdout().lock().write_all(text.as_bytes()) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            eprintln!("error: cannot write to stdout: {e}");
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Aliasing { .. } => EXIT_ALIASING,
        Error::NotMonotone { .. } => EXIT_CONVERGENCE,
        Error::DegenerateTorus(_)
        | Error::Parse { .. }
        | Error::NegativeConductance(_)
        | Error::NonContractibleFace { .. }
        | Error::NonCellular(_)
        | Error::Reducible(_)
        | Error::InconsistentCrossings(_)
        | Error::TooLarge(_)
        | Error::Precondition(_)
        | Error::Io(_) => EXIT_USAGE,
        _ => EXIT_VERIFY,
    }
}

fn cmd_verify(args: &VerifyArgs) -> torus_dimer::Result<u8> {
    let opts =
        verify::Options { n: args.n, frame: if args.inject_omega_flip { Frame::Reversed } else { Frame::Direct } };
    let selected: Vec<&str> = if args.only.is_empty() {
        verify::CHECKS.to_vec()
    } else {
        verify::CHECKS.iter().copied().filter(|c| args.only.iter().any(|o| o == c)).collect()
    };
    emit(&format!("{:<10} {:<16} {:>12} {:>10}  status\n", "check", "instance", "value", "tol"));
    let mut failed = Vec::new();
    for name in selected {
        for o in verify::run(name, &opts)? {
            emit(&format!(
                "{:<10} {:<16} {:>12.3e} {:>10.0e}  {}\n",
                o.name,
                o.instance,
                o.value,
                o.tol,
                if o.pass() { "pass" } else { "FAIL" }
            ));
            if !o.pass() && !failed.contains(&o.name) {
                failed.push(o.name);
            }
        }
    }
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}

fn cmd_law(args: &LawArgs) -> torus_dimer::Result<u8> {
    let g = match &args.graph {
        Some(p) => load_graph(p)?,
        None => args.lattice.build()?,
    };
    let law = height_law_exact(&g, args.m)?;
    let target = discrete_gaussian(g.tau())?.law();
    write_out(args.out.as_deref(), &format!("{}\n", law.to_json()))?;
    let tau = g.tau();
    let row = format!(
        "tau_re,tau_im,M,total,tv_to_discrete_gaussian,aliasing\n{},{},{},{},{},{}",
        tau.re,
        tau.im,
        args.m,
        law.total(),
        tv_distance(&law, &target),
        law.aliasing.unwrap_or(0.0)
    );
    // keep stdout clean when it carries the JSON
    if args.out.is_some() {
        emit(&format!("{row}\n"));
    } else {
        eprintln!("{row}");
    }
    Ok(0)
}

fn cmd_converge(args: &ConvergeArgs) -> torus_dimer::Result<u8> {
    if args.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("sizes must be strictly ascending".into()));
    }
    if args.slack.is_nan() || args.slack < 0.0 {
        return Err(Error::Precondition(format!("slack must be nonnegative, got {}", args.slack)));
    }
    let rows = convergence_sweep(&args.sizes, args.tau, args.m)?;
    write_out(args.out.as_deref(), &sweep_csv(&rows))?;
    check_monotone(&rows, args.slack)?;
    Ok(0)
}

fn cmd_sample(args: &SampleArgs) -> torus_dimer::Result<u8> {
    let g = args.lattice.build()?;
    let t = TemperleyanGraph::new(&g)?;
    let mc = mc_height_law(&t, args.samples as usize, args.seed)?;
    let exact = height_law_exact(&g, args.m)?;
    let n = mc.samples as f64;
    let mut worst: Option<(HomologyClass, f64, f64)> = None;
    let classes = exact.probs.keys().copied().chain(mc.law.iter().map(|e| HomologyClass::new(e.r, e.s)));
    for c in classes {
        let p = exact.prob(c);
        let q = mc.get(c).map_or(0.0, |e| e.p);
        let allowed = 3.0 * (p * (1.0 - p) / n).sqrt() + 0.005;
        let excess = (q - p).abs() - allowed;
        if worst.is_none_or(|w| excess > w.1) {
            worst = Some((c, excess, q - p));
        }
    }
    let json = serde_json::to_string_pretty(&mc).map_err(Error::Json)?;
    write_out(args.out.as_deref(), &format!("{json}\n"))?;
    match worst {
        Some((c, excess, diff)) if excess > 0.0 => {
            eprintln!("class {c} deviates from the exact law by {diff:e}, beyond 3 sigma + 0.005");
            Ok(EXIT_SAMPLING)
        }
        _ => Ok(0),
    }
}

fn cmd_generate(args: &GenerateArgs) -> torus_dimer::Result<u8> {
    let mut g = args.lattice.build()?;
    if let Some(seed) = args.random_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..g.edge_count()).map(|_| rng.gen_range(0.1..2.0)).collect();
        g = g.with_conductances(&c)?;
    }
    write_out(args.out.as_deref(), &write_graph(&g))?;
    Ok(0)
}

fn grid_chars(k: usize) -> Vec<Character<f64>> {
    let kt = k as f64;
    (0..k * k).map(|i| Character::new((i / k) as f64 / kt, (i % k) as f64 / kt)).collect()
}

fn cmd_grid(args: &GridArgs, transfer: bool) -> torus_dimer::Result<u8> {
    let g = args.lattice.build()?;
    let chars = grid_chars(args.grid);
    let csv = if transfer { transfer_csv(&g, &choose_cycles(&g)?, &chars)? } else { det_csv(&g, &chars)? };
    write_out(args.out.as_deref(), &csv)?;
    Ok(0)
}

fn main() -> ExitCode {
    let argv = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Law(a) => cmd_law(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Generate(a) => cmd_generate(a),
        Command::DetCsv(a) => cmd_grid(a, false),
        Command::TransferCsv(a) => cmd_grid(a, true),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
