//! Command-line front end for fermikit.
//!
//! Exit codes: 0 on success or a passing check, 1 on a failing check, 2 on
//! usage or input errors.

pub mod spec;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fermikit::floquet::{char_laurent, verify_lesep};
use fermikit::irreducibility::{
    bloch_factor_count, exact_average, fermi_factor_count, lowest_component_check, matches_zero_potential_at_average,
    zero_potential_reference,
};
use fermikit::isospec::{fermi_isospectral, floquet_isospectral, verify_key11};
use fermikit::lattice::PeriodicPotential;
use fermikit::perturb::{embedded_candidate_scan, gap_bound_states, write_tracks_csv, DecayProfile};
use fermikit::scalar::GaussRat;
use fermikit::spectral::{band_structure, check_enot0, fmt_sig15, spectrum_union};
use serde::Serialize;
use serde_json::{json, Value};

pub use spec::parse_potential_spec;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "fermikit", version, about = "Spectral objects of discrete periodic Schrödinger operators")]
pub struct Cli {
    /// Report format for irreducible, isospec, perturb and verify.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the characteristic Laurent polynomial in canonical form.
    Poly {
        #[arg(long)]
        input: PathBuf,
        /// Specialize at an exact energy, `p/q` or `(re,im)`.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Band functions on a uniform grid as CSV; the spectrum is reported on stderr.
    Bands {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Count absolutely irreducible factors of the Fermi polynomial at `--lambda`,
    /// or of the Bloch polynomial when no energy is given.
    Irreducible {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[command(flatten)]
        rand: RandArgs,
    },
    /// Compare two potentials.
    Isospec {
        #[arg(long, num_args = 1, required = true)]
        input: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[command(flatten)]
        rand: RandArgs,
    },
    /// Finite-volume perturbation experiments.
    Perturb(PerturbArgs),
    /// Run a named check.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, num_args = 1, required = true)]
        input: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        rand: RandArgs,
    },
}

#[derive(Args, Debug, Clone)]
pub struct RandArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Slices per sliced factor count.
    #[arg(long, default_value_t = 9)]
    pub trials: usize,
    /// Sample points for numeric identity checks.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Lesep,
    Gtp1,
    Hom,
    Thm2,
    Gcf,
    Key11,
    Enot0,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    SuperExponential,
    Exponential,
    PowerLaw,
    Point,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PerturbMode {
    Scan,
    Gap,
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = PerturbMode::Scan)]
    pub mode: PerturbMode,
    #[arg(long, value_enum, default_value_t = ProfileKind::SuperExponential)]
    pub profile: ProfileKind,
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: f64,
    /// `gamma` for the exponential kinds, `K` for power laws.
    #[arg(long, default_value_t = 1.5)]
    pub rate: f64,
    /// Comma-separated box half-widths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub l: Vec<usize>,
    /// Energy window for the scan, `lo,hi`; defaults to `(-2d, 2d)`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub band: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Eigenvalue tracks as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Usage and input errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Serialize)]
struct Report {
    tool: &'static str,
    version: &'static str,
    command: String,
    periods: Vec<usize>,
    tainted: bool,
    seed: Option<u64>,
    lambda0: Option<String>,
    passed: Option<bool>,
    result: Value,
}

impl Report {
    fn new(command: &str, v: &PeriodicPotential) -> Self {
        Report {
            tool: "fermikit",
            version: VERSION,
            command: command.to_string(),
            periods: v.periods().periods().to_vec(),
            tainted: v.periods().is_tainted(),
            seed: None,
            lambda0: None,
            passed: None,
            result: Value::Null,
        }
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(self).expect("report serializes")),
            Format::Text => {
                writeln!(out, "{} {}", self.tool, self.version)?;
                writeln!(out, "command: {}", self.command)?;
                writeln!(out, "periods: {:?}", self.periods)?;
                if self.tainted {
                    writeln!(out, "tainted: true")?;
                }
                if let Some(s) = self.seed {
                    writeln!(out, "seed: {s}")?;
                }
                if let Some(l) = &self.lambda0 {
                    writeln!(out, "lambda0: {l}")?;
                }
                if let Value::Object(m) = &self.result {
                    for (k, v) in m {
                        writeln!(out, "{k}: {v}")?;
                    }
                }
                if let Some(p) = self.passed {
                    writeln!(out, "result: {}", if p { "PASS" } else { "FAIL" })?;
                }
                Ok(())
            }
        }
    }

    fn exit_code(&self) -> i32 {
        match self.passed {
            Some(false) => 1,
            _ => 0,
        }
    }
}

fn load(path: &Path) -> anyhow::Result<PeriodicPotential> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_potential_spec(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_lambda(s: &str) -> anyhow::Result<GaussRat> {
    s.parse().map_err(|e| usage(format!("bad --lambda `{s}`: {e}")))
}

fn lib<T>(r: fermikit::Result<T>) -> anyhow::Result<T> {
    r.map_err(|e| match e {
        fermikit::Error::Internal(_) | fermikit::Error::Verification(_) => anyhow!(e),
        other => usage(other.to_string()),
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

/// Caps the global worker pool at `FERMIKIT_THREADS` when set.
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(s) = std::env::var("FERMIKIT_THREADS") {
        let n: usize = s
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| usage(format!("FERMIKIT_THREADS must be a positive integer, got `{s}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    Ok(())
}

/// Runs a parsed command; returns the exit code for completed runs.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let format = cli.format;
    match cli.command {
        Command::Poly { input, lambda } => {
            let v = load(&input)?;
            let p = lib(char_laurent(&v))?;
            let p = match lambda {
                Some(l) => p.specialize_lambda(&parse_lambda(&l)?),
                None => p,
            };
            write!(out, "{}", p.to_canonical_string())?;
            Ok(0)
        }
        Command::Bands { input, grid, output } => {
            let v = load(&input)?;
            let bs = lib(band_structure(&v, grid))?;
            match output {
                Some(path) => {
                    let f = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    bs.write_csv(io::BufWriter::new(f))?;
                }
                None => bs.write_csv(&mut *out)?,
            }
            for (a, b) in spectrum_union(&bs) {
                writeln!(err, "band: [{},{}]", fmt_sig15(a), fmt_sig15(b))?;
            }
            Ok(0)
        }
        Command::Irreducible { input, lambda, rand } => {
            let v = load(&input)?;
            let mut rep = Report::new("irreducible", &v);
            rep.seed = Some(rand.seed);
            let fr = match &lambda {
                Some(l) => {
                    let l = parse_lambda(l)?;
                    rep.lambda0 = Some(l.to_string());
                    lib(fermi_factor_count(&v, &l, rand.trials, rand.seed))?
                }
                None => lib(bloch_factor_count(&v, rand.trials, rand.seed))?,
            };
            rep.result = to_value(&fr);
            rep.result["variety"] = json!(if lambda.is_some() { "fermi" } else { "bloch" });
            rep.write(format, out)?;
            Ok(rep.exit_code())
        }
        Command::Isospec { input, lambda, rand } => {
            if input.len() != 2 {
                bail!(usage("isospec takes exactly two --input documents"));
            }
            let (v, y) = (load(&input[0])?, load(&input[1])?);
            let mut rep = Report::new("isospec", &v);
            rep.seed = Some(rand.seed);
            let floquet = lib(floquet_isospectral(&v, &y))?;
            let mut result = json!({ "floquet_isospectral": floquet });
            if let Some(l) = &lambda {
                let l = parse_lambda(l)?;
                rep.lambda0 = Some(l.to_string());
                let fermi = lib(fermi_isospectral(&v, &y, &l))?;
                result["fermi_isospectral"] = json!(fermi);
                if fermi && v.is_real() && y.is_real() {
                    result["averaged_identity"] = to_value(&lib(verify_key11(&v, &y, &l, rand.samples, rand.seed))?);
                }
            }
            rep.result = result;
            rep.write(format, out)?;
            Ok(0)
        }
        Command::Perturb(args) => run_perturb(args, format, out),
        Command::Verify {
            suite,
            input,
            lambda,
            grid,
            tol,
            rand,
        } => run_verify(suite, &input, lambda.as_deref(), grid, tol, &rand, format, out),
    }
}

fn run_perturb(args: PerturbArgs, format: Format, out: &mut dyn Write) -> anyhow::Result<i32> {
    let v = load(&args.input)?;
    let d = v.periods().dim();
    let profile = match args.profile {
        ProfileKind::SuperExponential => DecayProfile::super_exponential(d, args.amplitude, args.rate),
        ProfileKind::Exponential => DecayProfile::exponential(d, args.amplitude, args.rate),
        ProfileKind::PowerLaw => DecayProfile::power_law(d, args.amplitude, args.rate),
        ProfileKind::Point => Ok(DecayProfile::point(d, args.amplitude)),
    };
    let profile = lib(profile)?;
    let mut rep = Report::new("perturb", &v);
    let spectra = match args.mode {
        PerturbMode::Scan => {
            let band = match &args.band {
                Some(b) => (b[0], b[1]),
                None => (-2.0 * d as f64, 2.0 * d as f64),
            };
            let r = lib(embedded_candidate_scan(&v, &profile, band, &args.l, args.tol))?;
            rep.result = to_value(&r);
            r.spectra
        }
        PerturbMode::Gap => {
            let r = lib(gap_bound_states(&v, &profile, &args.l, args.tol))?;
            rep.result = to_value(&r);
            rep.result["bound_states"] = json!(r.bound_states().count());
            r.spectra
        }
    };
    rep.result["profile"] = to_value(&profile);
    if let Some(path) = &args.csv {
        let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_tracks_csv(&spectra, io::BufWriter::new(f))?;
    }
    rep.write(format, out)?;
    Ok(0)
}

fn require_lambda(lambda: Option<&str>, suite: &str) -> anyhow::Result<GaussRat> {
    parse_lambda(lambda.ok_or_else(|| usage(format!("suite {suite} needs --lambda")))?)
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    suite: Suite,
    input: &[PathBuf],
    lambda: Option<&str>,
    grid: usize,
    tol: Option<f64>,
    rand: &RandArgs,
    format: Format,
    out: &mut dyn Write,
) -> anyhow::Result<i32> {
    if input.len() > 2 || (input.len() == 2 && suite != Suite::Key11) {
        bail!(usage("only the key11 suite takes a second --input"));
    }
    let v = load(&input[0])?;
    let d = v.periods().dim();
    let name = format!("verify {}", suite.to_possible_value().unwrap().get_name());
    let mut rep = Report::new(&name, &v);
    match suite {
        Suite::Lesep => {
            rep.seed = Some(rand.seed);
            let r = lib(verify_lesep(&v, rand.samples, tol.unwrap_or(1e-10), rand.seed))?;
            rep.passed = Some(r.passed);
            rep.result = to_value(&r);
        }
        Suite::Gtp1 => {
            let zero = PeriodicPotential::zero(v.periods());
            let det = lib(char_laurent(&zero))?;
            let prod = lib(zero_potential_reference(v.periods(), None))?;
            rep.passed = Some(det == prod);
            rep.result = json!({ "terms": det.len(), "reference_terms": prod.len() });
        }
        Suite::Hom => {
            let r = lib(lowest_component_check(&v))?;
            rep.passed = Some(r.passed());
            rep.result = to_value(&r);
        }
        Suite::Thm2 | Suite::Gcf => {
            if suite == Suite::Thm2 && d != 2 {
                bail!(usage("suite thm2 needs d = 2"));
            }
            if suite == Suite::Gcf && d < 3 {
                bail!(usage("suite gcf needs d >= 3"));
            }
            let l = require_lambda(lambda, "thm2/gcf")?;
            rep.seed = Some(rand.seed);
            rep.lambda0 = Some(l.to_string());
            let fr = lib(fermi_factor_count(&v, &l, rand.trials, rand.seed))?;
            let at_average = l == lib(exact_average(&v))?;
            let mut passed = fr.count == 1 && fr.confident;
            rep.result = to_value(&fr);
            rep.result["at_average"] = json!(at_average);
            if suite == Suite::Thm2 && at_average && fr.count == 2 {
                let same = lib(matches_zero_potential_at_average(&v))?;
                rep.result["matches_zero_potential"] = json!(same);
                passed = same;
            }
            rep.passed = Some(passed);
        }
        Suite::Key11 => {
            let l = require_lambda(lambda, "key11")?;
            rep.seed = Some(rand.seed);
            rep.lambda0 = Some(l.to_string());
            let (y, partner) = if input.len() == 2 {
                (load(&input[1])?, "input")
            } else {
                let mut shift = vec![0i64; d];
                shift[0] = 1;
                (v.translate(&shift), "translate")
            };
            let r = lib(verify_key11(&v, &y, &l, rand.samples, rand.seed))?;
            rep.passed = Some(r.passed);
            rep.result = to_value(&r);
            rep.result["partner"] = json!(partner);
        }
        Suite::Enot0 => {
            if d < 2 {
                bail!(usage("suite enot0 needs d >= 2"));
            }
            let edge = 2.0 * d as f64;
            let odd = v.periods().periods().iter().any(|q| q % 2 == 1);
            let mut cases = vec![(-edge + 0.1, true), (-1.0, true), (1.5, true), (edge - 0.1, true)];
            if odd {
                cases.push((0.0, true));
            }
            cases.push((-edge - 0.1, false));
            cases.push((edge + 0.1, false));
            let mut rows = Vec::new();
            let mut passed = true;
            for (lam, expected) in cases {
                let got = lib(check_enot0(v.periods(), lam, grid))?;
                passed &= got == expected;
                rows.push(json!({ "lambda": lam, "interior": got, "expected": expected }));
            }
            rep.passed = Some(passed);
            rep.result = json!({ "grid": grid, "some_period_odd": odd, "cases": rows });
        }
    }
    rep.write(format, out)?;
    Ok(rep.exit_code())
}

/// Parses arguments, runs, and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    let result = configure_threads().and_then(|_| run(cli, &mut stdout.lock(), &mut stderr.lock()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<fermikit::Error>().is_some() {
                1
            } else {
                2
            }
        }
    }
}
