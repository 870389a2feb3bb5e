use std::path::PathBuf;
use std::process::ExitCode;

use bilistab::bounds::{asymptotic_compare, gauss_entrywise_bounds, new_alg_entrywise_bounds, thm_main_bound, UnitRoundoff};
use bilistab::catalog::{catalog_constants, get_builtin, Builtin};
use bilistab::cmm::{Backend, CmmAlgorithm};
use bilistab::experiments::{self, kappa_sweep, CmmInput, ExperimentConfig, ExperimentKind, ExperimentRecord, FmmInput, OutputFormat};
use bilistab::gen::{gen_conditioned_complex_rounded, gen_conditioned_rounded, gen_random, gen_unitary, ConditionedSpec, Dist, Seed};
use bilistab::matrix::{write_text, RealMatrix};
use bilistab::tensor::{growth_factor, verify_decomposition, BilinearDecomposition, DenseTensor3, NormSpec};
use bilistab::{Error, RecursionPolicy, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser)]
#[command(name = "bilistab", version, about = "Growth factors, error bounds and accuracy experiments for bilinear algorithms")]
struct Cli {
    /// Write results here instead of stdout (CSV appends).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
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

#[derive(Subcommand)]
enum Cmd {
    /// Built-in decompositions.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Growth factor of a decomposition.
    GrowthFactor(Source),
    /// Check a decomposition exactly against its target tensor.
    Verify {
        #[command(flatten)]
        source: Source,
        /// `complex` or `matmul:m,n,p`; inferred from the dimensions when omitted.
        #[arg(long)]
        target: Option<String>,
    },
    /// Print a first-order error bound as JSON.
    Bounds(BoundsArgs),
    /// Complex matrix multiplication benchmarks.
    #[command(subcommand)]
    Bench(BenchCmd),
    /// Application experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
    /// Export a generated matrix as text (`rows cols` header, one row per line).
    Gen(GenArgs),
}

#[derive(Subcommand)]
enum CatalogCmd {
    List {
        #[arg(long)]
        json: bool,
    },
    Show {
        name: String,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    builtin: Option<String>,
    /// Decomposition JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<(BilinearDecomposition, Option<Builtin>)> {
        match (&self.builtin, &self.file) {
            (Some(name), _) => {
                let b: Builtin = name.parse()?;
                Ok((get_builtin(b)?.decomposition, Some(b)))
            }
            (None, Some(path)) => Ok((BilinearDecomposition::from_json(&std::fs::read_to_string(path)?)?, None)),
            (None, None) => Err(Error::InvalidSpec("need --builtin or --file".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Thm {
    Main,
    New,
    Gauss,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    thm: Thm,
    /// Decomposition for `--thm main` (default: complex_new).
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    /// Euclidean norms of the two inputs (`--thm main`).
    #[arg(long, default_value_t = 1.0)]
    norm_u: f64,
    #[arg(long, default_value_t = 1.0)]
    norm_v: f64,
    /// Matrix size for the entrywise bounds.
    #[arg(long, default_value_t = 64)]
    n: usize,
    /// Common magnitude of every input entry for the entrywise bounds.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    #[arg(long)]
    unit_roundoff: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum BackendArg {
    Conventional,
    Strassen,
    Winograd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of regular,gauss,new.
    #[arg(long, default_value = "regular,gauss,new")]
    algo: String,
    #[arg(long, value_enum, default_value_t = BackendArg::Conventional)]
    backend: BackendArg,
    /// Recursion cutoff for strassen/winograd backends.
    #[arg(long, default_value_t = 64)]
    cutoff: usize,
    /// Timed repetitions; the minimum is kept.
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Args, Clone)]
struct Sweep {
    /// Smallest κ; a power of two, written as an integer or `2^k`.
    #[arg(long, default_value = "2^34")]
    kappa_min: String,
    #[arg(long, default_value = "2^53")]
    kappa_max: String,
    /// Number of sweep points between the two, on a log scale.
    #[arg(long, default_value_t = 10)]
    kappa_points: usize,
    /// Scale conditioned matrices by a power of two into (1/2, 1].
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Best-of-k wall time on uniform [−1, 1] inputs.
    Speed {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Error against the exact product over a κ sweep.
    Accuracy {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
        /// Use uniform [lo, hi] entries instead of conditioned matrices, e.g. `0,1`.
        #[arg(long)]
        uniform: Option<String>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Conventional vs Strassen vs Winograd.
    Fmm {
        /// Comma-separated sizes.
        #[arg(long, default_value = "16,32,64,128")]
        n: String,
        #[arg(long, default_value_t = 2)]
        cutoff: usize,
        #[arg(long, default_value = "uniform")]
        input: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Matrix polynomial by Horner's rule.
    Horner {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        degree: usize,
        /// Use X = I.
        #[arg(long)]
        identity: bool,
        /// Record times only, allowing n beyond the oracle limit.
        #[arg(long)]
        timing_only: bool,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Random unitary applied to conditioned matrices.
    Unitary {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Use U = I.
        #[arg(long)]
        identity: bool,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
    },
    /// Forward pass of a complex ReLU network.
    Cnn {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 25)]
        batch: usize,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: Sweep,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Conditioned,
    ConditionedComplex,
    Unitary,
    Uniform,
    Normal,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Column count for uniform/normal; defaults to n.
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, default_value = "2^10")]
    kappa: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_kappa(s: &str) -> Result<u64> {
    let bad = || Error::InvalidSpec(format!("bad kappa '{s}'"));
    match s.split_once('^') {
        Some(("2", e)) => {
            let e: u32 = e.trim().parse().map_err(|_| bad())?;
            if e > 63 {
                return Err(bad());
            }
            Ok(1u64 << e)
        }
        Some(_) => Err(bad()),
        None => s.trim().parse().map_err(|_| bad()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse().map_err(|_| Error::InvalidSpec(format!("bad {what} '{x}'"))))
        .collect()
}

fn sweep_kappas(s: &Sweep) -> Result<Vec<u64>> {
    let (lo, hi) = (parse_kappa(&s.kappa_min)?, parse_kappa(&s.kappa_max)?);
    if !lo.is_power_of_two() || !hi.is_power_of_two() {
        return Err(Error::InvalidSpec("kappa bounds must be powers of two".into()));
    }
    kappa_sweep(lo.trailing_zeros(), hi.trailing_zeros(), s.kappa_points)
}

fn config(kind: ExperimentKind, n: usize, common: &Common, sweep: Option<&Sweep>) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::new(kind);
    c.n = n;
    c.trials = common.trials;
    c.seed = Seed(common.seed);
    c.algos = parse_list::<CmmAlgorithm>(&common.algo, "algorithm")?;
    let policy = RecursionPolicy::new(common.cutoff)?;
    c.backend = match common.backend {
        BackendArg::Conventional => Backend::Conventional,
        BackendArg::Strassen => Backend::Strassen(policy),
        BackendArg::Winograd => Backend::Winograd(policy),
    };
    if let Some(r) = common.repeats {
        c.repeats = r;
    }
    if let Some(s) = sweep {
        c.kappas = sweep_kappas(s)?;
        c.normalize = s.normalize;
    }
    Ok(c)
}

fn emit_records(cli: &Cli, records: &[ExperimentRecord]) -> Result<()> {
    match &cli.output {
        Some(path) => experiments::write_records(path, cli.format.into(), records),
        None => match cli.format {
            Format::Csv => experiments::write_csv(std::io::stdout().lock(), records, true),
            Format::Json => {
                println!("{}", experiments::to_json(records)?);
                Ok(())
            }
        },
    }
}

fn emit_text(cli: &Cli, text: &str) -> Result<()> {
    match &cli.output {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn infer_target(d: &BilinearDecomposition, target: Option<&str>) -> Result<DenseTensor3> {
    if let Some(t) = target {
        if t == "complex" {
            return Ok(DenseTensor3::complex_mult());
        }
        let dims = t
            .strip_prefix("matmul:")
            .ok_or_else(|| Error::InvalidSpec(format!("unknown target '{t}' (complex, matmul:m,n,p)")))?;
        return match parse_list::<usize>(dims, "dimension")?[..] {
            [m, n, p] if m > 0 && n > 0 && p > 0 => Ok(DenseTensor3::matmul(m, n, p)),
            _ => Err(Error::InvalidSpec(format!("bad matmul target '{t}'"))),
        };
    }
    match d.dims() {
        (2, 2, 2) => Ok(DenseTensor3::complex_mult()),
        (a, b, c) if a == b && b == c => {
            let k = (a as f64).sqrt().round() as usize;
            if k * k == a {
                Ok(DenseTensor3::matmul(k, k, k))
            } else {
                Err(Error::InvalidSpec(format!("cannot infer a target for dims {:?}; pass --target", d.dims())))
            }
        }
        dims => Err(Error::InvalidSpec(format!("cannot infer a target for dims {dims:?}; pass --target"))),
    }
}

fn constant(n: usize, theta: f64) -> RealMatrix {
    RealMatrix::from_fn(n, n, |_, _| theta)
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let u = match a.unit_roundoff {
        Some(v) => UnitRoundoff::new(v)?,
        None => UnitRoundoff::default(),
    };
    let out = match a.thm {
        Thm::Main => {
            let d = match (&a.builtin, &a.file) {
                (None, None) => get_builtin(Builtin::ComplexNew)?.decomposition,
                (b, f) => Source { builtin: b.clone(), file: f.clone() }.load()?.0,
            };
            let (m, n, _) = d.dims();
            let g = growth_factor(&d, NormSpec::Euclidean);
            serde_json::to_value(thm_main_bound(m, n, d.rank(), g, a.norm_u, a.norm_v, u))?
        }
        Thm::New | Thm::Gauss => {
            if a.n == 0 || !(a.theta >= 0.0 && a.theta.is_finite()) {
                return Err(Error::ContractViolation("need n ≥ 1 and finite θ ≥ 0".into()));
            }
            let x = constant(a.n, a.theta);
            let b = match a.thm {
                Thm::New => new_alg_entrywise_bounds(&x, &x, &x, &x, u)?,
                _ => gauss_entrywise_bounds(&x, &x, &x, &x, u)?,
            };
            json!({
                "thm": if matches!(a.thm, Thm::New) { "new" } else { "gauss" },
                "n": a.n,
                "theta": a.theta,
                "real_bound": b.re.max_norm(),
                "imag_bound": b.im.max_norm(),
                "asymptotic": asymptotic_compare(a.n, a.theta, u)?,
                "u": u.value(),
            })
        }
    };
    emit_text(cli, &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn catalog(cli: &Cli, c: &CatalogCmd) -> Result<()> {
    match c {
        CatalogCmd::List { json } => {
            let rows = catalog_constants();
            let text = if *json {
                let v: Vec<_> = Builtin::ALL
                    .iter()
                    .zip(&rows)
                    .map(|(b, r)| {
                        json!({
                            "name": r.name,
                            "rank": r.rank,
                            "growth_factor": r.growth_factor,
                            "closed_form": get_builtin(*b).map(|e| e.closed_form_growth.to_string()).ok(),
                            "nuclear_norm": r.nuclear_norm,
                        })
                    })
                    .collect();
                serde_json::to_string_pretty(&v)? + "\n"
            } else {
                let mut s = format!("{:<22} {:>4} {:>18} {:>12}\n", "name", "rank", "growth factor", "nuclear norm");
                for r in rows {
                    let nu = r.nuclear_norm.map_or("unknown".to_string(), |v| format!("{v}"));
                    s += &format!("{:<22} {:>4} {:>18.12} {:>12}\n", r.name, r.rank, r.growth_factor, nu);
                }
                s
            };
            emit_text(cli, &text)
        }
        CatalogCmd::Show { name, json } => {
            let e = get_builtin(name.parse()?)?;
            let d = &e.decomposition;
            let text = if *json {
                d.to_json()? + "\n"
            } else {
                let mut s = format!(
                    "{}\ndims {:?}, rank {}\ngrowth factor {} = {:.15}\nnuclear norm {}\nsource: {}\n",
                    d.name(),
                    d.dims(),
                    d.rank(),
                    e.closed_form_growth,
                    growth_factor(d, NormSpec::Euclidean),
                    e.known_nuclear_norm.map_or("unknown".to_string(), |v| v.to_string()),
                    e.source
                );
                for (i, t) in d.terms().iter().enumerate() {
                    let f = |v: &[bilistab::ExactCoefficient]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
                    s += &format!("  {i:>2}: u = [{}]  v = [{}]  w = [{}]\n", f(&t.u), f(&t.v), f(&t.w));
                }
                s
            };
            emit_text(cli, &text)
        }
    }
}

fn gen(cli: &Cli, g: &GenArgs) -> Result<()> {
    let seed = Seed(g.seed);
    let text = match g.kind {
        GenKind::Conditioned => write_text(&gen_conditioned_rounded(&ConditionedSpec::new(g.n, parse_kappa(&g.kappa)?, seed)?).0),
        GenKind::ConditionedComplex => {
            let x = gen_conditioned_complex_rounded(&ConditionedSpec::new(g.n, parse_kappa(&g.kappa)?, seed)?).0;
            format!("# real part\n{}# imaginary part\n{}", write_text(&x.re), write_text(&x.im))
        }
        GenKind::Unitary => {
            let x = gen_unitary(g.n, seed)?;
            format!("# real part\n{}# imaginary part\n{}", write_text(&x.re), write_text(&x.im))
        }
        GenKind::Uniform | GenKind::Normal => {
            let d = if matches!(g.kind, GenKind::Normal) { Dist::Normal } else { Dist::uniform(-1.0, 1.0) };
            write_text(&gen_random(g.n, g.cols.unwrap_or(g.n), d, seed)?)
        }
    };
    emit_text(cli, &text)
}

fn run(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Catalog(c) => catalog(cli, c)?,
        Cmd::GrowthFactor(src) => {
            let (d, b) = src.load()?;
            let g = growth_factor(&d, NormSpec::Euclidean);
            let closed = b.map(|b| get_builtin(b).map(|e| e.closed_form_growth.to_string())).transpose()?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&json!({"name": d.name(), "growth_factor": g, "closed_form": closed}))? + "\n",
                Format::Csv => match closed {
                    Some(c) => format!("{g} ({c})\n"),
                    None => format!("{g}\n"),
                },
            };
            emit_text(cli, &text)?;
        }
        Cmd::Verify { source, target } => {
            let (d, b) = source.load()?;
            let t = match (b, target) {
                (Some(b), None) => get_builtin(b)?.target_tensor(),
                _ => infer_target(&d, target.as_deref())?,
            };
            let ok = verify_decomposition(&d, &t)?;
            emit_text(cli, &format!("{}: {}\n", d.name(), if ok { "verified" } else { "does NOT decompose the target" }))?;
            if !ok {
                return Ok(1);
            }
        }
        Cmd::Bounds(a) => bounds(cli, a)?,
        Cmd::Bench(BenchCmd::Speed { n, common }) => {
            let c = config(ExperimentKind::CmmSpeed, *n, common, None)?;
            emit_records(cli, &experiments::run(&c)?)?;
        }
        Cmd::Bench(BenchCmd::Accuracy { n, common, sweep, uniform }) => {
            let mut c = config(ExperimentKind::CmmAccuracy, *n, common, Some(sweep))?;
            if let Some(u) = uniform {
                match parse_list::<f64>(u, "bound")?[..] {
                    [lo, hi] => c.cmm_input = CmmInput::Uniform { lo, hi },
                    _ => return Err(Error::InvalidSpec("--uniform takes lo,hi".into())),
                }
            }
            emit_records(cli, &experiments::run(&c)?)?;
        }
        Cmd::Experiment(e) => {
            let records = match e {
                ExperimentCmd::Fmm { n, cutoff, input, trials, seed } => {
                    let mut out = Vec::new();
                    for n in parse_list::<usize>(n, "size")? {
                        let mut c = ExperimentConfig::new(ExperimentKind::FmmAccuracy);
                        c.n = n;
                        c.cutoff = *cutoff;
                        c.fmm_input = input.parse::<FmmInput>()?;
                        c.trials = *trials;
                        c.seed = Seed(*seed);
                        out.extend(experiments::run(&c)?);
                    }
                    out
                }
                ExperimentCmd::Horner { n, degree, identity, timing_only, common, sweep } => {
                    let mut c = config(ExperimentKind::Horner, *n, common, Some(sweep))?;
                    c.degree = *degree;
                    c.identity_operand = *identity;
                    c.timing_only = *timing_only;
                    experiments::run(&c)?
                }
                ExperimentCmd::Unitary { n, identity, common, sweep } => {
                    let mut c = config(ExperimentKind::Unitary, *n, common, Some(sweep))?;
                    c.identity_operand = *identity;
                    experiments::run(&c)?
                }
                ExperimentCmd::Cnn { n, depth, batch, common, sweep } => {
                    let mut c = config(ExperimentKind::Cnn, *n, common, Some(sweep))?;
                    c.depth = *depth;
                    c.batch = *batch;
                    experiments::run(&c)?
                }
            };
            emit_records(cli, &records)?;
        }
        Cmd::Gen(g) => gen(cli, g)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
