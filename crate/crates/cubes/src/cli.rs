//! Command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure (some applicable check did
//! not pass), 2 malformed input, 3 parameter outside an admissible bound,
//! 4 materialization aborted, 5 other I/O or serialization error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::constants::derive_constants;
use crate::cubes::{materialize, Decomposition};
use crate::error::{Error, Result};
use crate::generators::{generate, parse_spec};
use crate::nets::ScanOrder;
use crate::space::{space_from_csv, space_from_matrix, FiniteSpace, Metric};
use crate::{artifacts, verify};

#[derive(Parser)]
#[command(
    name = "dyadic-cubes",
    about = "Build and verify dyadic cube decompositions of finite quasi-metric measure spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a decomposition and write its artifact directory.
    Build(BuildArgs),
    /// Run the full property suite; exit 0 only if every applicable check passes.
    Verify(VerifyArgs),
    /// Locate a point's cube at a generation and print its ancestor chain.
    Query(QueryArgs),
}

#[derive(Args, Clone)]
struct BuildArgs {
    /// Built-in generator spec, e.g. grid:16x16, line:8, uniform:200:42,
    /// clustered:100:4:7, snowflake(line:64, 2).
    #[arg(long = "gen", conflicts_with_all = ["input", "matrix"])]
    generator: Option<String>,

    /// CSV point file: header, then id,x1,...,xd[,weight] rows.
    #[arg(long, conflicts_with = "matrix")]
    input: Option<PathBuf>,

    /// Explicit distance matrix file: first line n, then n rows of n distances.
    #[arg(long)]
    matrix: Option<PathBuf>,

    /// Metric for coordinate input: euclidean, lp:P, or snowflake:EPS
    /// (euclidean base raised to EPS).
    #[arg(long, default_value = "euclidean")]
    metric: String,

    /// Quasi-triangle constant the input claims to satisfy.
    #[arg(long = "declared-a0", default_value_t = 1.0)]
    declared_a0: f64,

    /// Scale ratio: "default" for half the admissible supremum, or a number.
    #[arg(long, default_value = "default")]
    delta: String,

    /// Ball radius coefficient: "default" or a number.
    #[arg(long = "a0", default_value = "default")]
    a0_coeff: String,

    /// Record violated parameter bounds instead of refusing to run.
    #[arg(long)]
    relaxed: bool,

    /// Net scan order: by-id, or shuffle:SEED.
    #[arg(long, default_value = "by-id")]
    order: String,

    /// Reuse each net's centers as the seed of the next finer net.
    #[arg(long)]
    nested: bool,

    /// Artifact directory (env DYADIC_CUBES_OUT overrides the default).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Existing artifact directory to reload and verify.
    #[arg(long)]
    artifacts: Option<PathBuf>,

    /// Build in-memory from the same flags as `build`, then verify.
    #[command(flatten)]
    build: BuildArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    artifacts: PathBuf,

    /// Point id to locate.
    #[arg(long)]
    point: String,

    /// Generation to locate it in; defaults to the finest.
    #[arg(long)]
    generation: Option<i32>,
}

fn parse_metric(text: &str) -> Result<Metric> {
    let lower = text.to_ascii_lowercase();
    if lower == "euclidean" {
        return Ok(Metric::Euclidean);
    }
    if let Some(p) = lower.strip_prefix("lp:") {
        let p: f64 = p
            .parse()
            .map_err(|_| Error::Input(format!("bad lp exponent in metric '{text}'")))?;
        if !(p >= 1.0) {
            return Err(Error::Input(format!("lp exponent must be >= 1, got {p}")));
        }
        return Ok(Metric::Lp(p));
    }
    if let Some(eps) = lower.strip_prefix("snowflake:") {
        let eps: f64 = eps
            .parse()
            .map_err(|_| Error::Input(format!("bad snowflake exponent in metric '{text}'")))?;
        if !(eps >= 1.0) {
            return Err(Error::Input(format!(
                "snowflake exponent must be >= 1, got {eps}"
            )));
        }
        return Ok(Metric::Snowflake {
            base: Box::new(Metric::Euclidean),
            eps,
        });
    }
    Err(Error::Input(format!(
        "unknown metric '{text}' (expected euclidean, lp:P, or snowflake:EPS)"
    )))
}

fn parse_param(text: &str, name: &str) -> Result<Option<f64>> {
    if text == "default" {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| Error::Input(format!("{name} must be 'default' or a number, got '{text}'")))?;
    Ok(Some(v))
}

fn parse_order(text: &str) -> Result<ScanOrder> {
    if text == "by-id" {
        return Ok(ScanOrder::ById);
    }
    if let Some(seed) = text.strip_prefix("shuffle:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::Input(format!("bad shuffle seed in order '{text}'")))?;
        return Ok(ScanOrder::SeededShuffle(seed));
    }
    Err(Error::Input(format!(
        "unknown scan order '{text}' (expected by-id or shuffle:SEED)"
    )))
}

fn load_space(args: &BuildArgs) -> Result<FiniteSpace> {
    if let Some(spec) = &args.generator {
        return generate(&parse_spec(spec)?);
    }
    if let Some(path) = &args.input {
        let text = std::fs::read_to_string(path)?;
        return space_from_csv(&text, parse_metric(&args.metric)?, args.declared_a0);
    }
    if let Some(path) = &args.matrix {
        let text = std::fs::read_to_string(path)?;
        return space_from_matrix(&text, args.declared_a0);
    }
    Err(Error::Input(
        "no input: pass --gen SPEC, --input FILE, or --matrix FILE".into(),
    ))
}

fn build_decomposition(args: &BuildArgs) -> Result<Decomposition> {
    let space = load_space(args)?;
    let ledger = derive_constants(
        space.declared_a0(),
        parse_param(&args.delta, "delta")?,
        parse_param(&args.a0_coeff, "a0")?,
        args.relaxed,
    )?;
    materialize(space, ledger, parse_order(&args.order)?, args.nested)
}

fn out_dir(args: &BuildArgs) -> PathBuf {
    if let Ok(env) = std::env::var("DYADIC_CUBES_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    args.out.clone().unwrap_or_else(|| PathBuf::from("artifacts"))
}

fn print_build_summary(dec: &Decomposition) {
    println!(
        "generations: {} (k = {}..={})",
        dec.generations.len(),
        dec.ladder.k_min,
        dec.ladder.k_max
    );
    for (net, gen) in dec.nets.iter().zip(&dec.generations) {
        println!("  k={}: {} cubes", net.k, gen.len());
    }
    println!("points: {}", dec.space.len());
}

fn run_build(args: &BuildArgs) -> Result<i32> {
    let dec = build_decomposition(args)?;
    let dir = out_dir(args);
    artifacts::save(&dir, &dec)?;
    print_build_summary(&dec);
    println!("artifacts: {}", dir.display());
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let (dec, dir) = match &args.artifacts {
        Some(dir) => (artifacts::load(dir)?, dir.clone()),
        None => {
            let dec = build_decomposition(&args.build)?;
            let dir = out_dir(&args.build);
            artifacts::save(&dir, &dec)?;
            (dec, dir)
        }
    };
    let report = verify::run_suite(&dec);
    artifacts::save_report(&dir, &report)?;
    print!("{}", report.render_text());
    Ok(if report.all_applicable_pass() { 0 } else { 1 })
}

fn run_query(args: &QueryArgs) -> Result<i32> {
    let dec = artifacts::load(&args.artifacts)?;
    let x = dec.space.resolve(&args.point)?;
    let k = args.generation.unwrap_or(dec.ladder.k_max);
    if k < dec.ladder.k_min || k > dec.ladder.k_max {
        return Err(Error::Input(format!(
            "generation {k} outside ladder {}..={}",
            dec.ladder.k_min, dec.ladder.k_max
        )));
    }
    match dec.locate(x, k)? {
        None => {
            println!("{} is uncovered at generation {k}", args.point);
        }
        Some((_, alpha)) => {
            let cube = dec.cube(k, alpha)?;
            println!(
                "{} lies in cube {}:{} (center {}, {} points, measure {}, diameter {})",
                args.point,
                k,
                alpha,
                dec.space.id(cube.center),
                cube.member_list.len(),
                cube.measure,
                cube.diameter
            );
            let mut cur = (k, alpha);
            while let Some(parent) = dec.tree.parent_of(cur.0, cur.1) {
                let pc = dec.cube(parent.0, parent.1)?;
                println!(
                    "  ancestor {}:{} (center {}, {} points)",
                    parent.0,
                    parent.1,
                    dec.space.id(pc.center),
                    pc.member_list.len()
                );
                cur = parent;
            }
        }
    }
    Ok(0)
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Input(_) | Error::Data(_) => 2,
        Error::Constraint(_) => 3,
        Error::Materialize(_) => 4,
        Error::Io(_) | Error::Serde(_) => 5,
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => run_build(args),
        Command::Verify(args) => run_verify(args),
        Command::Query(args) => run_query(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
