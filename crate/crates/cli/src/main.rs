use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eigmax::bench::{bench_sweep, format_table, Family};
use eigmax::bounds::{collatz_wielandt, CwMode};
use eigmax::general::{choice3_z0, initials_general, initials_uniform, Anchor, GeneralMode, GeneralOptions, UniformChoice};
use eigmax::io::{format_matrix, parse_matrix, parse_vector};
use eigmax::iteration::{rqi, IterationOptions, NegTri};
use eigmax::lanczos::lanczos_default;
use eigmax::next::{
    initials_next_general, initials_next_tridiagonal, rqi_next, NextGeneralMode, NextGeneralOptions, NextVariant,
    DEFAULT_NEXT_XI,
};
use eigmax::tri_initials::{initials_tridiagonal_matrix, TriMode};
use eigmax::{InitialPair, IterationTrace, Matrix, Status, TriQ};

const EXIT_MAX_ITER: u8 = 1;
const EXIT_COLLAPSE: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "eigmax", version, about = "Maximal and next-to-maximal eigenpairs with constructed initial pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal eigenpair of a matrix with nonnegative off-diagonal entries.
    Solve(SolveArgs),
    /// Next-to-maximal eigenpair of a conservative Q-matrix.
    Next(NextArgs),
    /// Collatz–Wielandt bounds from a positive test vector.
    Bounds(BoundsArgs),
    /// Two-sided Lanczos tridiagonalization.
    Lanczos(LanczosArgs),
    /// Size sweep over a birth–death family.
    Bench(BenchArgs),
}

#[derive(Args)]
struct IterArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Tridiag,
    General,
    #[value(name = "uniform-I", alias = "uniform-i")]
    UniformI,
    #[value(name = "uniform-II", alias = "uniform-ii")]
    UniformII,
    #[value(name = "choice-III", alias = "choice-iii")]
    ChoiceIII,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ShiftMode {
    Pure,
    Improved,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to `tridiag` for tridiagonal input and `general` otherwise.
    #[arg(long, value_enum)]
    strategy: Option<Strategy>,
    /// Weight of `1/delta1` in the initial shift, or `auto` for the Rayleigh quotient alone.
    #[arg(long)]
    xi: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ShiftMode>,
    /// `auto` for the level-set choice, or a state index.
    #[arg(long, default_value = "0")]
    anchor: String,
    #[arg(long, default_value_t = 0.01)]
    skip_threshold: f64,
    /// Use `(A + A*)/2` for the choice-III shift.
    #[arg(long)]
    symmetrize: bool,
    #[command(flatten)]
    iter: IterArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    #[value(alias = "617")]
    Quotient,
    #[value(alias = "618")]
    Epsilon,
    #[value(alias = "6181")]
    Combo,
    #[value(alias = "620")]
    Scan,
    #[value(alias = "621")]
    Killed,
}

#[derive(Args)]
struct NextArgs {
    /// Conservative Q-matrix.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Combo)]
    variant: VariantArg,
    #[arg(long, default_value_t = DEFAULT_NEXT_XI)]
    xi: f64,
    /// Factor on the last diagonal entry of the killed matrix.
    #[arg(long, default_value_t = 1000.0)]
    c: f64,
    #[arg(long, default_value_t = 1001)]
    r_grid: usize,
    /// Re-center every iterate against constants.
    #[arg(long)]
    reproject: bool,
    #[command(flatten)]
    iter: IterArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundsMode {
    A,
    Q,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    vector: PathBuf,
    #[arg(long, value_enum, default_value_t = BoundsMode::A)]
    mode: BoundsMode,
}

#[derive(Args)]
struct LanczosArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// `quadratic_bd` or `custom_bd:a,b,c_N`.
    #[arg(long, default_value = "quadratic_bd")]
    family: String,
    /// Comma-separated numbers of states.
    #[arg(long, value_delimiter = ',', default_value = "100,500,1000,5000,7500,10000")]
    sizes: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ShiftMode::Pure)]
    mode: ShiftMode,
    #[arg(long, default_value_t = 0.875)]
    xi: f64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

struct Failure(String);

impl From<eigmax::Error> for Failure {
    fn from(e: eigmax::Error) -> Self {
        Failure(e.to_string())
    }
}

type Run = Result<u8, Failure>;

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok(parse_matrix(&text)?)
}

fn is_tridiagonal(a: &Matrix) -> bool {
    let n = a.dim();
    (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || a.get(i, j) == 0.0))
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::MaxIter => EXIT_MAX_ITER,
        Status::Collapse(_) => EXIT_COLLAPSE,
        Status::SingularShift(_) => EXIT_SINGULAR,
    }
}

fn status_label(status: Status) -> String {
    match status {
        Status::Converged => "converged".into(),
        Status::MaxIter => "max_iter".into(),
        Status::Collapse(k) => format!("collapse at step {k}"),
        Status::SingularShift(k) => format!("singular_shift at step {k}"),
    }
}

fn status_json(status: Status) -> Value {
    match status {
        Status::Converged => json!({"status": "converged"}),
        Status::MaxIter => json!({"status": "max_iter"}),
        Status::Collapse(k) => json!({"status": "collapse", "step": k}),
        Status::SingularShift(k) => json!({"status": "singular_shift", "step": k}),
    }
}

/// Prints a trace whose iterates approximate `map(z)`.
fn report(name: &str, trace: &IterationTrace, map: impl Fn(f64) -> f64, output: Output) -> u8 {
    let status = trace.status();
    let (z, v) = trace.eigenpair();
    match output {
        Output::Json => {
            for s in &trace.steps {
                let line = json!({
                    "k": s.k, "z": s.z, "estimate": map(s.z), "residual": s.residual, "flags": s.flags(),
                });
                println!("{line}");
            }
            let mut summary = json!({"summary": name, "estimate": map(z), "z": z, "vector": v});
            summary.as_object_mut().unwrap().extend(status_json(status).as_object().unwrap().clone());
            println!("{summary}");
        }
        Output::Table => {
            let mut s = format!("{name}\n{:>4} {:>20} {:>20} {:>12}  flags\n", "k", "estimate", "z", "residual");
            for st in &trace.steps {
                let _ = writeln!(
                    s,
                    "{:>4} {:>20.12} {:>20.12} {:>12.3e}  {}",
                    st.k,
                    map(st.z),
                    st.z,
                    st.residual,
                    st.flags().join(",")
                );
            }
            let _ = writeln!(s, "status: {}", status_label(status));
            let _ = writeln!(s, "estimate: {:.12}", map(z));
            let _ = writeln!(s, "vector: {}", v.iter().map(|x| format!("{x:.12}")).collect::<Vec<_>>().join(" "));
            print!("{s}");
        }
    }
    exit_code(status)
}

fn iter_options(pair: &InitialPair, args: &IterArgs) -> IterationOptions {
    IterationOptions { tol: args.tol, max_iter: args.max_iter, ..pair.options() }
}

fn parse_xi(xi: &Option<String>) -> Result<Option<f64>, Failure> {
    match xi.as_deref() {
        None | Some("auto") => Ok(None),
        Some(s) => s.parse().map(Some).map_err(|_| Failure(format!("invalid --xi value {s:?}"))),
    }
}

fn solve(args: &SolveArgs) -> Run {
    let a = read_matrix(&args.input)?;
    let strategy = args
        .strategy
        .unwrap_or(if is_tridiagonal(&a) && a.dim() > 1 { Strategy::Tridiag } else { Strategy::General });
    let xi = parse_xi(&args.xi)?;
    match strategy {
        Strategy::Tridiag => {
            let mode = match (args.mode, xi) {
                (Some(ShiftMode::Pure), _) => TriMode::Pure,
                (_, Some(x)) => TriMode::Improved(x),
                _ => TriMode::default(),
            };
            let (t, m, pair) = initials_tridiagonal_matrix(&a, mode)?;
            let trace = rqi(&NegTri(&t), &pair.v0, pair.z0, &iter_options(&pair, &args.iter))?;
            Ok(report("tridiag", &trace, |z| m - z, args.iter.output))
        }
        Strategy::General => {
            let mode = match (args.mode, xi) {
                (Some(ShiftMode::Pure), _) => GeneralMode::Delta1,
                (_, Some(x)) => GeneralMode::Xi(x),
                (Some(ShiftMode::Improved), None) => GeneralMode::Xi(0.875),
                (None, None) => GeneralMode::Auto,
            };
            let anchor = match args.anchor.as_str() {
                "auto" => Anchor::LevelSet,
                s => Anchor::Index(s.parse().map_err(|_| Failure(format!("invalid --anchor value {s:?}")))?),
            };
            let opts = GeneralOptions { mode, anchor, skip_threshold: args.skip_threshold };
            let g = initials_general(&a, &opts)?;
            let trace = rqi(&g.q.neg(), &g.pair.v0, g.pair.z0, &iter_options(&g.pair, &args.iter))?;
            let m = g.m;
            Ok(report("general", &trace, |z| m - z, args.iter.output))
        }
        Strategy::UniformI | Strategy::UniformII => {
            let choice = if strategy == Strategy::UniformI { UniformChoice::I } else { UniformChoice::II };
            let pair = initials_uniform(&a, choice)?;
            let trace = rqi(&a, &pair.v0, pair.z0, &iter_options(&pair, &args.iter))?;
            Ok(report("uniform", &trace, |z| z, args.iter.output))
        }
        Strategy::ChoiceIII => {
            let z0 = choice3_z0(&a, args.symmetrize)?;
            let pair = initials_uniform(&a, UniformChoice::II)?;
            let trace = rqi(&a, &pair.v0, z0, &iter_options(&pair, &args.iter))?;
            Ok(report("choice-III", &trace, |z| z, args.iter.output))
        }
    }
}

fn next(args: &NextArgs) -> Run {
    let q = read_matrix(&args.input)?;
    let tri = |variant| -> Result<_, Failure> {
        let t = TriQ::from_matrix(&q)?;
        let pair = initials_next_tridiagonal(&t, variant)?;
        let mu = pair.measure.clone().expect("tridiagonal next pair carries its measure");
        let run = rqi_next(&NegTri(&t), &pair, &mu, &iter_options(&pair, &args.iter), args.reproject)?;
        Ok((run, None))
    };
    let general = |mode| -> Result<_, Failure> {
        let opts = NextGeneralOptions { c: args.c, r_grid: args.r_grid, mode };
        let g = initials_next_general(&q, &opts)?;
        let run = rqi_next(&q.neg(), &g.pair, &g.mu, &iter_options(&g.pair, &args.iter), args.reproject)?;
        Ok((run, Some(g.r0)))
    };
    let (run, r0) = match args.variant {
        VariantArg::Quotient => tri(NextVariant::Quotient)?,
        VariantArg::Epsilon => tri(NextVariant::Epsilon)?,
        VariantArg::Combo => tri(NextVariant::Combo(args.xi))?,
        VariantArg::Scan => general(NextGeneralMode::Scan)?,
        VariantArg::Killed => general(NextGeneralMode::Killed)?,
    };
    let code = report("next", &run.trace, |z| z, args.iter.output);
    match args.iter.output {
        Output::Json => println!("{}", json!({"max_drift": run.max_drift, "orthogonality_lost": run.orthogonality_lost, "r0": r0})),
        Output::Table => {
            println!("max drift: {:.3e}", run.max_drift);
            if let Some(r) = r0 {
                println!("r0: {r:.6}");
            }
        }
    }
    if run.orthogonality_lost {
        eprintln!("warning: iterates drifted from the complement of constants");
    }
    Ok(code)
}

fn bounds(args: &BoundsArgs) -> Run {
    let m = read_matrix(&args.input)?;
    let text = std::fs::read_to_string(&args.vector).map_err(|e| Failure(format!("{}: {e}", args.vector.display())))?;
    let v = parse_vector(&text)?;
    let mode = match args.mode {
        BoundsMode::A => CwMode::MatrixA,
        BoundsMode::Q => CwMode::QMatrix,
    };
    let b = collatz_wielandt(&m, &v, mode)?;
    println!("{}", json!({"lower": b.lower, "upper": b.upper, "ratio": b.ratio()}));
    Ok(0)
}

fn lanczos(args: &LanczosArgs) -> Run {
    let a = read_matrix(&args.input)?;
    let r = lanczos_default(&a)?;
    print!("{}", format_matrix(&r.t));
    if let Some(k) = r.breakdown_at {
        eprintln!("breakdown at step {k}");
    }
    if !r.eligible {
        eprintln!("warning: T has nonpositive off-diagonal entries");
    }
    Ok(0)
}

fn parse_family(s: &str) -> Result<Family, Failure> {
    if s == "quadratic_bd" {
        return Ok(Family::QuadraticBd);
    }
    let bad = || Failure(format!("unknown family {s:?}; expected quadratic_bd or custom_bd:a,b,c_N"));
    let rest = s.strip_prefix("custom_bd:").ok_or_else(bad)?;
    let vals: Vec<f64> = rest.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
    match vals[..] {
        [a, b, c_n] => Ok(Family::CustomBd { a, b, c_n }),
        _ => Err(bad()),
    }
}

fn bench(args: &BenchArgs) -> Run {
    let family = parse_family(&args.family)?;
    let mode = match args.mode {
        ShiftMode::Pure => TriMode::Pure,
        ShiftMode::Improved => TriMode::Improved(args.xi),
    };
    let rows = bench_sweep(family, &args.sizes, mode, args.jobs)?;
    match args.output {
        Output::Table => print!("{}", format_table(&rows)),
        Output::Json => {
            for r in &rows {
                println!("{}", serde_json::to_string(r).expect("rows serialize"));
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Next(a) => next(a),
        Command::Bounds(a) => bounds(a),
        Command::Lanczos(a) => lanczos(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
