//! `lvlab`: reproducible batch runs over the large value laboratory.
//!
//! Every subcommand that writes artifacts also writes a RunManifest JSON
//! next to its primary output (`<out>.manifest.json`) recording the full
//! parameter set, seeds, tool version, and file paths; outputs themselves
//! are deterministic functions of the recorded parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use lvlab::certify::{self, Certificate};
use lvlab::error::Error;
use lvlab::exponents::exponent_table;
use lvlab::fourier::{self, IntegerSet};
use lvlab::linalg::ComplexMatrix;
use lvlab::majorant::{self, TrigPolynomial};
use lvlab::oracle;
use lvlab::planted::{self, ExperimentConfig};
use lvlab::rng::derive_seed;
use lvlab::zoo::{self, FrequencySet, RandomDist};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "lvlab", version, about = "large value laboratory")]
struct Cli {
    /// Default seed for seeded operations; falls back to LVLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = library default). Numeric outputs never depend
    /// on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a matrix family and write it as CSV.
    Gen(GenArgs),
    /// Compute certificates and evaluate large-value bounds.
    Certify(CertifyArgs),
    /// Exact / searched sparse singular values over a cardinality range.
    Oracle(OracleArgs),
    /// Additive energy of an integer set with the DFT cross-check.
    Energy(EnergyArgs),
    /// Smoothed difference density and rational spike report.
    Density(DensityArgs),
    /// Majorant inequality checks and the Dirichlet majorant profile.
    Majorant(MajorantArgs),
    /// Planted-vs-random experiment from a JSON config.
    Planted(PlantedArgs),
    /// Closed-form exponent table at (alpha, sigma).
    Exponents(ExponentsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Dirichlet,
    Ac,
    RandomUnitComplex,
    RandomPm1,
    RandomGaussian,
    Ps,
    Freqset,
}

impl Family {
    fn kind(&self) -> &'static str {
        match self {
            Family::Dirichlet => "dirichlet",
            Family::Ac => "ac",
            Family::RandomUnitComplex => "random-unit-complex",
            Family::RandomPm1 => "random-pm1",
            Family::RandomGaussian => "random-gaussian",
            Family::Ps => "ps",
            Family::Freqset => "freqset",
        }
    }
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Degree N (column count for degree-N families).
    #[arg(long = "N", visible_alias = "n")]
    n: u64,
    /// Row count T (unused for ps).
    #[arg(long = "T", visible_alias = "t", default_value_t = 0)]
    t: usize,
    /// Frequency file (one float per line) for --family freqset.
    #[arg(long)]
    freqs: Option<PathBuf>,
    /// Dimension for --family ps.
    #[arg(long, default_value_t = 2)]
    d: u32,
}

impl FamilyArgs {
    fn build(&self, seed: u64) -> Result<(ComplexMatrix, String), Error> {
        let m = match self.family {
            Family::Dirichlet => zoo::gen_dirichlet(self.n, self.t),
            Family::Ac => zoo::gen_ac(self.n, self.t),
            Family::RandomUnitComplex => {
                zoo::gen_random(self.t, self.n as usize, RandomDist::UnitComplex, seed)
            }
            Family::RandomPm1 => zoo::gen_random(self.t, self.n as usize, RandomDist::Pm1, seed),
            Family::RandomGaussian => {
                zoo::gen_random(self.t, self.n as usize, RandomDist::Gaussian, seed)
            }
            Family::Ps => zoo::gen_periodic_schrodinger(self.n, self.d)?,
            Family::Freqset => {
                let path = self.freqs.as_ref().ok_or_else(|| Error::InvalidArgument {
                    msg: "--family freqset requires --freqs".into(),
                })?;
                let phi = read_freq_file(path)?;
                zoo::gen_freqset(&phi, self.t)?
            }
        };
        Ok((m, self.family.kind().to_string()))
    }

    fn params(&self) -> serde_json::Value {
        json!({
            "family": self.kind_str(),
            "N": self.n,
            "T": self.t,
            "d": self.d,
            "freqs": self.freqs.as_ref().map(|p| p.display().to_string()),
        })
    }

    fn kind_str(&self) -> &'static str {
        self.family.kind()
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CertifyArgs {
    /// Matrix CSV produced by `gen`; alternative to --family.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long = "N", visible_alias = "n", default_value_t = 0)]
    n: u64,
    #[arg(long = "T", visible_alias = "t", default_value_t = 0)]
    t: usize,
    /// Comma-separated methods: operator, power2, power2-corrected, mmstar,
    /// schatten2, schatten3, schatten4.
    #[arg(long, value_delimiter = ',', default_value = "operator,mmstar")]
    methods: Vec<String>,
    /// Comma-separated thresholds lambda.
    #[arg(long, value_delimiter = ',', required = true)]
    lambdas: Vec<f64>,
    /// Input budget B^2; defaults to N (the l-infinity normalization).
    #[arg(long)]
    budget_sq: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 1)]
    s_min: usize,
    #[arg(long)]
    s_max: usize,
    /// Local-search iteration budget used when enumeration exceeds its cap.
    #[arg(long, default_value_t = 4000)]
    search_iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnergyArgs {
    /// Newline-delimited non-negative integers.
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DensityArgs {
    /// dirichlet or ac.
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long = "N", visible_alias = "n")]
    n: u64,
    /// Horizon T fixing the smoothing geometry; defaults to round(N^1.2).
    #[arg(long = "T", visible_alias = "t")]
    t: Option<f64>,
    /// Kernel standard deviation; defaults to 1/T.
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, default_value_t = 4001)]
    grid_len: usize,
    /// Density profile CSV.
    #[arg(long)]
    out: PathBuf,
    /// Spike report CSV (default: alongside --out).
    #[arg(long)]
    spikes_out: Option<PathBuf>,
    /// Spike/residual summary JSON (default: alongside --out).
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MajorantCheckKind {
    Circle,
    Diffset,
    Profile,
    ApEnergy,
}

#[derive(Args)]
struct MajorantArgs {
    #[arg(long, value_enum)]
    check: MajorantCheckKind,
    /// Polynomial degree (circle/diffset) or Dirichlet degree N (profile,
    /// ap-energy).
    #[arg(long = "N", visible_alias = "n", default_value_t = 16)]
    n: u64,
    /// Moment order s.
    #[arg(long, default_value_t = 2)]
    s: u32,
    /// Point-set size for diffset.
    #[arg(long, default_value_t = 8)]
    tees: usize,
    /// Horizon for diffset sampling and the profile scan.
    #[arg(long = "T", visible_alias = "t", default_value_t = 128.0)]
    t: f64,
    /// Scan step for the profile.
    #[arg(long, default_value_t = 0.25)]
    step: f64,
    /// AP step alpha and half-length J for ap-energy.
    #[arg(long, default_value_t = 2.5)]
    alpha: f64,
    #[arg(long, default_value_t = 6)]
    j: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlantedArgs {
    /// ExperimentConfig JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExponentsArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    sigma: f64,
    /// Print the aligned text table instead of JSON.
    #[arg(long, default_value_t = false)]
    text: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    command: String,
    params: serde_json::Value,
    seed: u64,
    tool_version: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_time_ms: u128,
}

fn write_manifest(primary_out: &Path, manifest: &RunManifest) -> std::io::Result<()> {
    let path = manifest_path(primary_out);
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, manifest)?;
    f.write_all(b"\n")
}

fn manifest_path(primary_out: &Path) -> PathBuf {
    let mut name = primary_out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary_out.with_file_name(name)
}

fn read_freq_file(path: &Path) -> Result<FrequencySet, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        msg: format!("{}: {e}", path.display()),
    })?;
    let mut freqs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        freqs.push(line.parse::<f64>().map_err(|_| Error::Parse {
            msg: format!("bad frequency `{line}`"),
        })?);
    }
    FrequencySet::new(freqs, path.display().to_string())
}

fn read_matrix(path: &Path) -> Result<(ComplexMatrix, String), Error> {
    let f = File::open(path).map_err(|e| Error::Parse {
        msg: format!("{}: {e}", path.display()),
    })?;
    zoo::read_matrix_csv(BufReader::new(f))
}

fn io_err(e: std::io::Error) -> Error {
    Error::Parse { msg: e.to_string() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(|| {
        std::env::var("LVLAB_SEED")
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    });
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.cmd, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let err = json!({
                "schema_version": SCHEMA_VERSION,
                "error": e.to_string(),
            });
            eprintln!("{err}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Cmd, seed: u64) -> Result<(), Error> {
    let started = Instant::now();
    match cmd {
        Cmd::Gen(args) => {
            let (m, kind) = args.family.build(seed)?;
            let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
            zoo::write_matrix_csv(&m, &kind, &mut out).map_err(io_err)?;
            out.flush().map_err(io_err)?;
            let manifest = RunManifest {
                schema_version: SCHEMA_VERSION,
                command: "gen".into(),
                params: args.family.params(),
                seed,
                tool_version: lvlab::TOOL_VERSION.into(),
                inputs: vec![],
                outputs: vec![args.out.display().to_string()],
                wall_time_ms: started.elapsed().as_millis(),
            };
            write_manifest(&args.out, &manifest).map_err(io_err)?;
            Ok(())
        }
        Cmd::Certify(args) => run_certify(args, seed, started),
        Cmd::Oracle(args) => run_oracle(args, seed, started),
        Cmd::Energy(args) => run_energy(args, seed, started),
        Cmd::Density(args) => run_density(args, seed, started),
        Cmd::Majorant(args) => run_majorant(args, seed, started),
        Cmd::Planted(args) => run_planted(args, seed, started),
        Cmd::Exponents(args) => run_exponents(args, seed, started),
    }
}

fn build_certificate(m: &ComplexMatrix, method: &str) -> Result<Certificate, Error> {
    match method {
        "operator" => Ok(certify::cert_operator(m)),
        "power2" => certify::cert_power(m, 2, false),
        "power3" => certify::cert_power(m, 3, false),
        "power2-corrected" => certify::cert_power(m, 2, true),
        "mmstar" => Ok(certify::cert_mmstar(m)),
        "schatten2" => certify::cert_schatten(m, 2, certify::CERT_TOL),
        "schatten3" => certify::cert_schatten(m, 3, certify::CERT_TOL),
        "schatten4" => certify::cert_schatten(m, 4, certify::CERT_TOL),
        other => Err(Error::InvalidArgument {
            msg: format!("unknown method `{other}`"),
        }),
    }
}

fn run_certify(args: CertifyArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let (m, kind, inputs) = if let Some(path) = &args.matrix {
        let (m, kind) = read_matrix(path)?;
        (m, kind, vec![path.display().to_string()])
    } else {
        let family = args.family.ok_or_else(|| Error::InvalidArgument {
            msg: "need --matrix or --family".into(),
        })?;
        let fa = FamilyArgs {
            family,
            n: args.n,
            t: args.t,
            freqs: None,
            d: 2,
        };
        let (m, kind) = fa.build(seed)?;
        (m, kind, vec![])
    };
    let budget_sq = args.budget_sq.unwrap_or(m.cols() as f64);
    let mut results = Vec::new();
    for method in &args.methods {
        let cert = build_certificate(&m, method)?;
        let bounds: Vec<serde_json::Value> = args
            .lambdas
            .iter()
            .map(|&lambda| {
                let b = certify::evaluate(&cert, lambda, budget_sq);
                json!({
                    "lambda": lambda,
                    "max_w": b.max_w.resolve(m.rows()),
                    "unbounded": b.max_w == certify::MaxW::Unbounded,
                    "raw_bound": b.raw_bound,
                    "binding_constraint": b.binding_constraint,
                })
            })
            .collect();
        results.push(json!({
            "method": method,
            "certificate": cert,
            "bounds": bounds,
        }));
    }
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "matrix": { "T": m.rows(), "N": m.cols(), "kind": kind },
        "budget_sq": budget_sq,
        "results": results,
    });
    let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| io_err(e.into()))?;
    out.write_all(b"\n").map_err(io_err)?;
    out.flush().map_err(io_err)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "certify".into(),
        params: json!({
            "methods": args.methods,
            "lambdas": args.lambdas,
            "budget_sq": budget_sq,
            "N": args.n,
            "T": args.t,
            "matrix": args.matrix.as_ref().map(|p| p.display().to_string()),
        }),
        seed,
        tool_version: lvlab::TOOL_VERSION.into(),
        inputs,
        outputs: vec![args.out.display().to_string()],
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_manifest(&args.out, &manifest).map_err(io_err)?;
    Ok(())
}

fn run_oracle(args: OracleArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let (m, _) = read_matrix(&args.matrix)?;
    if args.s_min < 1 || args.s_max < args.s_min || args.s_max > m.rows() {
        return Err(Error::InvalidArgument {
            msg: format!(
                "bad S range [{}, {}] for T = {}",
                args.s_min,
                args.s_max,
                m.rows()
            ),
        });
    }
    let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    writeln!(out, "S,value,mode,subset").map_err(io_err)?;
    for s in args.s_min..=args.s_max {
        let (value, subset, mode) = match oracle::ssv_exact(&m, s) {
            Ok((v, w)) => (v, w, "exact"),
            Err(Error::CapExceeded { .. }) => {
                let (v, w) =
                    oracle::ssv_search(&m, s, derive_seed(seed, &[s as u64]), args.search_iters)?;
                (v, w, "search")
            }
            Err(e) => return Err(e),
        };
        let subset_str: Vec<String> = subset.indices().iter().map(|i| i.to_string()).collect();
        writeln!(out, "{s},{value},{mode},{}", subset_str.join("|")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "oracle".into(),
        params: json!({
            "s_min": args.s_min,
            "s_max": args.s_max,
            "search_iters": args.search_iters,
        }),
        seed,
        tool_version: lvlab::TOOL_VERSION.into(),
        inputs: vec![args.matrix.display().to_string()],
        outputs: vec![args.out.display().to_string()],
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_manifest(&args.out, &manifest).map_err(io_err)?;
    Ok(())
}

fn run_energy(args: EnergyArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.set).map_err(|e| Error::Parse {
        msg: format!("{}: {e}", args.set.display()),
    })?;
    let mut elems = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        elems.push(line.parse::<u64>().map_err(|_| Error::Parse {
            msg: format!("bad set element `{line}`"),
        })?);
    }
    elems.sort_unstable();
    elems.dedup();
    let w = IntegerSet::new(elems)?;
    let energy = fourier::additive_energy(&w)?;
    let grid_len = 2 * w.max() + 2;
    let energy_dft = fourier::additive_energy_dft(&w, grid_len)?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "size": w.len(),
        "max": w.max(),
        "energy": energy,
        "energy_dft": energy_dft,
        "dft_grid_len": grid_len,
        "agree": energy == energy_dft,
    });
    let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| io_err(e.into()))?;
    out.write_all(b"\n").map_err(io_err)?;
    out.flush().map_err(io_err)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "energy".into(),
        params: json!({ "set": args.set.display().to_string() }),
        seed,
        tool_version: lvlab::TOOL_VERSION.into(),
        inputs: vec![args.set.display().to_string()],
        outputs: vec![args.out.display().to_string()],
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_manifest(&args.out, &manifest).map_err(io_err)?;
    Ok(())
}

fn run_density(args: DensityArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let phi = match args.family {
        Family::Dirichlet => FrequencySet::dirichlet(args.n),
        Family::Ac => FrequencySet::almost_counterexample(args.n),
        _ => {
            return Err(Error::InvalidArgument {
                msg: "density supports --family dirichlet|ac".into(),
            })
        }
    };
    let t = args.t.unwrap_or_else(|| (args.n as f64).powf(1.2).round());
    let delta = args.delta.unwrap_or(1.0 / t);
    let profile = fourier::density_profile(&phi, delta, args.grid_len)?;
    let report = fourier::spike_report_for(&phi, args.n, t, delta)?;

    let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    profile.write_csv(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;

    let spikes_path = args
        .spikes_out
        .unwrap_or_else(|| args.out.with_extension("spikes.csv"));
    let mut sout = BufWriter::new(File::create(&spikes_path).map_err(io_err)?);
    report.write_csv(&mut sout).map_err(io_err)?;
    sout.flush().map_err(io_err)?;

    let summary_path = args
        .summary_out
        .unwrap_or_else(|| args.out.with_extension("summary.json"));
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "family": args.family.kind(),
        "N": args.n,
        "T": t,
        "delta": delta,
        "spike_mass": report.spike_mass(),
        "residual_mass": report.residual_mass,
        "smooth_level": report.smooth_level,
        "spike_to_residual": report.spike_mass() / report.residual_mass,
    });
    let mut jout = BufWriter::new(File::create(&summary_path).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut jout, &summary).map_err(|e| io_err(e.into()))?;
    jout.write_all(b"\n").map_err(io_err)?;
    jout.flush().map_err(io_err)?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "density".into(),
        params: json!({
            "family": args.family.kind(),
            "N": args.n,
            "T": t,
            "delta": delta,
            "grid_len": args.grid_len,
        }),
        seed,
        tool_version: lvlab::TOOL_VERSION.into(),
        inputs: vec![],
        outputs: vec![
            args.out.display().to_string(),
            spikes_path.display().to_string(),
            summary_path.display().to_string(),
        ],
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_manifest(&args.out, &manifest).map_err(io_err)?;
    Ok(())
}

fn run_majorant(args: MajorantArgs, seed: u64, started: Instant) -> Result<(), Error> {
    use rand::Rng;
    let verdict = match args.check {
        MajorantCheckKind::Circle => {
            let mut rng = lvlab::rng::rng_for(seed);
            let deg = args.n as usize;
            let freqs = FrequencySet::new(
                (0..deg)
                    .map(|_| std::f64::consts::TAU * rng.gen_range(-32i64..=32) as f64)
                    .collect(),
                "seeded-integer",
            )?;
            let coeffs: Vec<Complex64> = (0..deg)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let d = TrigPolynomial::new(freqs, coeffs)?;
            let c = majorant::circle_majorant_check(&d, args.s)?;
            json!({ "check": "circle", "s": args.s, "degree": deg,
                    "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds })
        }
        MajorantCheckKind::Diffset => {
            let mut rng = lvlab::rng::rng_for(seed);
            let deg = args.n as usize;
            let freqs = FrequencySet::new(
                (0..deg).map(|_| rng.gen::<f64>() * 4.0).collect(),
                "seeded-real",
            )?;
            let coeffs: Vec<Complex64> = (0..deg)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let d = TrigPolynomial::new(freqs, coeffs)?;
            let tees: Vec<f64> = (0..args.tees).map(|_| rng.gen::<f64>() * args.t).collect();
            let c = majorant::diffset_majorant_check(&d, &tees, args.s)?;
            json!({ "check": "diffset", "s": args.s, "degree": deg, "tees": args.tees,
                    "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds })
        }
        MajorantCheckKind::Profile => {
            let p = majorant::dirichlet_majorant_profile(args.n, args.t, args.step)?;
            // The profile's artifact is the sampled CSV, not a verdict.
            if let Some(out) = &args.out {
                let mut f = BufWriter::new(File::create(out).map_err(io_err)?);
                p.write_csv(&mut f).map_err(io_err)?;
                f.flush().map_err(io_err)?;
                let manifest = RunManifest {
                    schema_version: SCHEMA_VERSION,
                    command: "majorant".into(),
                    params: json!({ "check": "profile", "N": args.n, "T": args.t,
                                    "step": args.step }),
                    seed,
                    tool_version: lvlab::TOOL_VERSION.into(),
                    inputs: vec![],
                    outputs: vec![out.display().to_string()],
                    wall_time_ms: started.elapsed().as_millis(),
                };
                write_manifest(out, &manifest).map_err(io_err)?;
            }
            let doc = json!({ "schema_version": SCHEMA_VERSION, "verdict": {
                "check": "profile", "N": args.n, "T": args.t, "step": args.step,
                "max_beyond_unit": p.max_beyond_unit,
                "ratio_to_sqrt_n": p.ratio_to_sqrt_n }});
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
            return Ok(());
        }
        MajorantCheckKind::ApEnergy => {
            let mut rng = lvlab::rng::rng_for(seed);
            let freqs = FrequencySet::dirichlet(args.n);
            let coeffs: Vec<Complex64> = (0..args.n)
                .map(|_| {
                    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                    let mag = rng.gen::<f64>();
                    Complex64::new(mag * phase.cos(), mag * phase.sin())
                })
                .collect();
            let d = TrigPolynomial::new(freqs, coeffs)?;
            let w: Vec<f64> = (-args.j..=args.j).map(|k| k as f64 * args.alpha).collect();
            let c = majorant::ap_energy_bound_check(&d, &w, args.s)?;
            json!({ "check": "ap-energy", "N": args.n, "alpha": args.alpha, "J": args.j,
                    "s": args.s, "sum_on_w": c.sum_on_w, "hb_bound": c.hb_bound,
                    "holds": c.holds })
        }
    };
    let doc = json!({ "schema_version": SCHEMA_VERSION, "verdict": verdict });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("serializable")
    );
    if let Some(out) = &args.out {
        let mut f = BufWriter::new(File::create(out).map_err(io_err)?);
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| io_err(e.into()))?;
        f.write_all(b"\n").map_err(io_err)?;
        f.flush().map_err(io_err)?;
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            command: "majorant".into(),
            params: doc["verdict"].clone(),
            seed,
            tool_version: lvlab::TOOL_VERSION.into(),
            inputs: vec![],
            outputs: vec![out.display().to_string()],
            wall_time_ms: started.elapsed().as_millis(),
        };
        write_manifest(out, &manifest).map_err(io_err)?;
    }
    Ok(())
}

fn run_planted(args: PlantedArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Parse {
        msg: format!("{}: {e}", args.config.display()),
    })?;
    let config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        msg: format!("config: {e}"),
    })?;
    let table = planted::run_experiment(&config)?;
    let mut out = BufWriter::new(File::create(&args.out).map_err(io_err)?);
    table.write_csv(&mut out).map_err(io_err)?;
    out.flush().map_err(io_err)?;

    // Sidecar: config plus the derived per-cell seeds.
    let mut seeds = Vec::new();
    for (ai, &alpha) in config.alpha_grid.iter().enumerate() {
        for (si, &sigma) in config.sigma_grid.iter().enumerate() {
            for trial in 0..config.trials {
                for (arm, tag) in [("ran", 0u64), ("plant", 1u64)] {
                    seeds.push(json!({
                        "alpha": alpha, "sigma": sigma, "trial": trial, "arm": arm,
                        "seed": derive_seed(config.base_seed, &[ai as u64, si as u64, trial as u64, tag]),
                    }));
                }
            }
        }
    }
    let sidecar_path = {
        let mut name = args.out.file_name().unwrap_or_default().to_os_string();
        name.push(".config.json");
        args.out.with_file_name(name)
    };
    let sidecar = json!({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "seeds": seeds,
        "errors": table.errors,
    });
    let mut sf = BufWriter::new(File::create(&sidecar_path).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut sf, &sidecar).map_err(|e| io_err(e.into()))?;
    sf.write_all(b"\n").map_err(io_err)?;
    sf.flush().map_err(io_err)?;

    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: "planted".into(),
        params: serde_json::to_value(&config).expect("serializable"),
        seed,
        tool_version: lvlab::TOOL_VERSION.into(),
        inputs: vec![args.config.display().to_string()],
        outputs: vec![
            args.out.display().to_string(),
            sidecar_path.display().to_string(),
        ],
        wall_time_ms: started.elapsed().as_millis(),
    };
    write_manifest(&args.out, &manifest).map_err(io_err)?;
    Ok(())
}

fn run_exponents(args: ExponentsArgs, seed: u64, started: Instant) -> Result<(), Error> {
    let table = exponent_table(args.alpha, args.sigma);
    if args.text {
        println!("{table}");
    } else {
        let doc = json!({ "schema_version": SCHEMA_VERSION, "table": table });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("serializable")
        );
    }
    if let Some(out) = &args.out {
        let doc = json!({ "schema_version": SCHEMA_VERSION, "table": table });
        let mut f = BufWriter::new(File::create(out).map_err(io_err)?);
        serde_json::to_writer_pretty(&mut f, &doc).map_err(|e| io_err(e.into()))?;
        f.write_all(b"\n").map_err(io_err)?;
        f.flush().map_err(io_err)?;
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            command: "exponents".into(),
            params: json!({ "alpha": args.alpha, "sigma": args.sigma }),
            seed,
            tool_version: lvlab::TOOL_VERSION.into(),
            inputs: vec![],
            outputs: vec![out.display().to_string()],
            wall_time_ms: started.elapsed().as_millis(),
        };
        write_manifest(out, &manifest).map_err(io_err)?;
    }
    Ok(())
}
