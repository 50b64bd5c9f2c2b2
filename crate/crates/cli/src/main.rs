//! `packq`: partition datasets, evaluate package queries, generate
//! synthetic workloads and run benchmark sweeps.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use packq::bench::{run_bench, BenchPlan, OmegaSpec, Sweep, TauSpec};
use packq::eval::{eval_direct, eval_sketchrefine, EvalConfig, EvalStatus, Method};
use packq::ilp::{ilp_to_paql, RawIlp};
use packq::paql::Sense;
use packq::partition::{partition, partition_for_epsilon, PartitionParams, Partitioning};
use packq::workload::{column_name, generate_relation, random_workload, ColumnDist, QuerySpec};
use packq::{CheckedQuery, Relation};

/// Exit status for malformed command lines.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "packq", version, about = "Package queries over relational data")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Evaluation time budget in seconds.
    #[arg(long = "time-limit-s", global = true, default_value_t = 3600.0)]
    time_limit_s: f64,
    /// Cap on refine solves per sketch-refine pass (default 10 times the group count).
    #[arg(long, global = true)]
    backtrack_limit: Option<u64>,
    /// Fall back to the hybrid sketch when the plain sketch is infeasible.
    #[arg(long, global = true, value_enum, default_value_t = Switch::On)]
    hybrid_sketch: Switch,
    /// Subproblem size above which sketch-refine recurses (default tau).
    #[arg(long, global = true)]
    recursion_threshold: Option<usize>,
    /// Node cap per sketch-refine subproblem; 0 solves each to optimality.
    #[arg(long, global = true, default_value_t = 10_000)]
    subproblem_node_limit: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Min,
    Max,
}

impl From<Direction> for Sense {
    fn from(d: Direction) -> Sense {
        match d {
            Direction::Min => Sense::Minimize,
            Direction::Max => Sense::Maximize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Sketchrefine,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::Sketchrefine => Method::SketchRefine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Scale,
    Tau,
    Coverage,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Partition a dataset offline and write the partitioning as JSON.
    Partition(PartitionArgs),
    /// Evaluate one query and print the report as JSON.
    Run(RunArgs),
    /// Run a benchmark sweep and write JSON and CSV reports.
    Bench(BenchArgs),
    /// Generate a synthetic dataset, a random query workload, or a
    /// dataset/query pair from an ILP instance.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
struct RadiusArgs {
    /// Radius limit, or `inf` for none.
    #[arg(long, value_parser = parse_omega, conflicts_with = "epsilon")]
    omega: Option<f64>,
    /// Approximation target; the radius limit is derived from it.
    #[arg(long, requires = "direction")]
    epsilon: Option<f64>,
    /// Objective direction the epsilon bound is for.
    #[arg(long, value_enum)]
    direction: Option<Direction>,
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated partitioning attributes.
    #[arg(long, value_delimiter = ',', required = true)]
    attrs: Vec<String>,
    /// Size threshold.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    tau: u64,
    #[command(flatten)]
    radius: RadiusArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// File holding the query text.
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Partitioning file (required for sketchrefine).
    #[arg(long, required_if_eq("method", "sketchrefine"))]
    partitioning: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    input: PathBuf,
    /// Query files; repeat the flag or separate with commas.
    #[arg(long = "query", value_delimiter = ',', required = true)]
    queries: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [MethodArg::Direct, MethodArg::Sketchrefine])]
    methods: Vec<MethodArg>,
    /// Partitioning attributes (defaults to all numeric attributes).
    #[arg(long, value_delimiter = ',')]
    attrs: Vec<String>,
    /// Size threshold as a tuple count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "tau_fraction")]
    tau: Option<u64>,
    /// Size threshold as a fraction of the relation size (default 0.1).
    #[arg(long)]
    tau_fraction: Option<f64>,
    #[command(flatten)]
    radius: RadiusArgs,
    #[arg(long, value_enum, default_value_t = SweepKind::Scale)]
    sweep: SweepKind,
    /// Sweep points: keep fractions for `scale`, tau fractions for `tau`.
    #[arg(long, value_delimiter = ',')]
    points: Vec<f64>,
    /// Attribute sets for `coverage`, separated by `;`, attributes by `,`.
    #[arg(long)]
    coverage: Option<String>,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// ILP instance (JSON) to turn into a dataset and query.
    #[arg(long, conflicts_with_all = ["rows", "cols", "dist", "queries"])]
    from_ilp: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    /// Column distribution `uniform:LO:HI` or `normal:MEAN:STD`; give one
    /// for all columns or one per column.
    #[arg(long, value_delimiter = ',')]
    dist: Vec<String>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of random queries to write alongside the data.
    #[arg(long, default_value_t = 0)]
    queries: usize,
    /// Directory for generated query files (`q1.paql`, ...).
    #[arg(long)]
    query_dir: Option<PathBuf>,
    /// Query file path for `--from-ilp`.
    #[arg(long)]
    query_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    expected_size: f64,
    #[arg(long, value_enum, default_value_t = Direction::Max)]
    sense: Direction,
    #[arg(long)]
    repeat: Option<u64>,
    #[arg(long)]
    max_count: Option<u64>,
}

fn parse_omega(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        t => match t.parse::<f64>() {
            Ok(v) if v >= 0.0 => Ok(v),
            _ => Err(format!("`{s}` is not a non-negative number or `inf`")),
        },
    }
}

fn eval_config(cli: &Cli) -> Result<EvalConfig> {
    if !(cli.time_limit_s.is_finite() && cli.time_limit_s > 0.0) {
        bail!("--time-limit-s must be positive");
    }
    Ok(EvalConfig {
        time_limit: Duration::from_secs_f64(cli.time_limit_s),
        backtrack_limit: cli.backtrack_limit,
        hybrid_sketch: cli.hybrid_sketch == Switch::On,
        recursion_threshold: cli.recursion_threshold,
        subproblem_node_limit: (cli.subproblem_node_limit > 0).then_some(cli.subproblem_node_limit),
        seed: cli.seed,
        ..EvalConfig::default()
    })
}

fn load_relation(path: &Path) -> Result<Relation> {
    Relation::load_csv(path, &HashMap::new()).with_context(|| format!("loading {}", path.display()))
}

fn load_query(path: &Path, rel: &Relation) -> Result<CheckedQuery> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let q = packq::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(packq::validate(&q, rel.schema()).with_context(|| format!("validating {}", path.display()))?)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().write_all(text.as_bytes()) {
            // a closed reader such as `head` is not an error
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
            _ => Ok(()),
        },
    }
}

fn cmd_partition(args: &PartitionArgs) -> Result<ExitCode> {
    let rel = load_relation(&args.input)?;
    let tau = args.tau as usize;
    let p = match (args.radius.epsilon, args.radius.direction) {
        (Some(eps), Some(dir)) => {
            let ids: Vec<usize> = (0..rel.len()).collect();
            let e = partition_for_epsilon(&rel, &ids, &args.attrs, tau, eps, dir.into())?;
            if e.fallback {
                eprintln!("note: radius limit from the data-wide fallback ({})", e.partitioning.omega);
            }
            e.partitioning
        }
        _ => partition(
            &rel,
            &PartitionParams {
                attrs: args.attrs.clone(),
                tau,
                omega: args.radius.omega.unwrap_or(f64::INFINITY),
            },
        )?,
    };
    p.save(&args.out)?;
    eprintln!(
        "{} groups ({} degenerate), omega {}",
        p.num_groups(),
        p.degenerate_groups().len(),
        p.omega
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(cli: &Cli, args: &RunArgs) -> Result<ExitCode> {
    let cfg = eval_config(cli)?;
    let rel = load_relation(&args.input)?;
    let q = load_query(&args.query, &rel)?;
    let report = match args.method {
        MethodArg::Direct => eval_direct(&q, &rel, &cfg)?,
        MethodArg::Sketchrefine => {
            let path = args.partitioning.as_ref().expect("clap requires it");
            let p = Partitioning::load(path, &rel)?;
            eval_sketchrefine(&q, &rel, &p, &cfg)?
        }
    };
    write_output(None, &(report.to_json_string() + "\n"))?;
    Ok(ExitCode::from(match report.status {
        EvalStatus::Feasible => 0,
        EvalStatus::Infeasible => 2,
        EvalStatus::TimeLimit => 3,
    }))
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> Result<ExitCode> {
    let cfg = eval_config(cli)?;
    let rel = load_relation(&args.input)?;
    let mut queries = Vec::new();
    for path in &args.queries {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("query")
            .to_string();
        queries.push((name, load_query(path, &rel)?));
    }
    let attrs = if args.attrs.is_empty() {
        rel.schema()
            .attributes()
            .iter()
            .filter(|a| rel.numeric_by_name(&a.name).is_ok())
            .map(|a| a.name.clone())
            .collect()
    } else {
        args.attrs.clone()
    };
    let tau = match (args.tau, args.tau_fraction) {
        (Some(t), _) => TauSpec::Count(t as usize),
        (None, Some(f)) if f > 0.0 => TauSpec::Fraction(f),
        (None, Some(_)) => bail!("--tau-fraction must be positive"),
        (None, None) => TauSpec::Fraction(0.1),
    };
    let omega = match args.radius.epsilon {
        Some(e) => OmegaSpec::Epsilon(e),
        None => OmegaSpec::Fixed(args.radius.omega.filter(|w| w.is_finite())),
    };
    let sweep = match args.sweep {
        SweepKind::Scale if args.points.is_empty() => Sweep::Scale(vec![0.2, 0.4, 0.6, 0.8, 1.0]),
        SweepKind::Scale => Sweep::Scale(args.points.clone()),
        SweepKind::Tau if args.points.is_empty() => bail!("--sweep tau needs --points"),
        SweepKind::Tau => Sweep::Tau(args.points.clone()),
        SweepKind::Coverage => {
            let Some(spec) = &args.coverage else {
                bail!("--sweep coverage needs --coverage");
            };
            Sweep::Coverage(
                spec.split(';')
                    .map(|set| set.split(',').map(|a| a.trim().to_string()).filter(|a| !a.is_empty()).collect())
                    .collect(),
            )
        }
    };
    let plan = BenchPlan {
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        attrs,
        tau,
        omega,
        sweep,
        repetitions: args.repetitions.max(1),
        seed: cli.seed,
    };
    let report = run_bench(&rel, &queries, &plan, &cfg);
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    let json = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out_json {
        Some(p) => write_output(Some(p), &json)?,
        None if args.out_csv.is_some() => {}
        None => write_output(None, &json)?,
    }
    if let Some(p) = &args.out_csv {
        let f = fs::File::create(p).with_context(|| format!("writing {}", p.display()))?;
        report.write_csv(f)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(cli: &Cli, args: &GenArgs) -> Result<ExitCode> {
    if let Some(path) = &args.from_ilp {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let ilp: RawIlp = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let (rel, q) = ilp_to_paql(&ilp)?;
        let mut csv = Vec::new();
        rel.write_csv(&mut csv)?;
        write_output(args.out.as_deref(), std::str::from_utf8(&csv)?)?;
        let query = format!("{q}\n");
        match &args.query_out {
            Some(p) => write_output(Some(p), &query)?,
            None => eprint!("{query}"),
        }
        return Ok(ExitCode::SUCCESS);
    }
    if args.cols == 0 {
        bail!("--cols must be at least 1");
    }
    let dists: Vec<ColumnDist> = match args.dist.len() {
        0 => vec![ColumnDist::Uniform { lo: 0.0, hi: 100.0 }; args.cols],
        1 => vec![args.dist[0].parse()?; args.cols],
        k if k == args.cols => args.dist.iter().map(|d| d.parse()).collect::<Result<_, _>>()?,
        k => bail!("{k} distributions given for {} columns", args.cols),
    };
    let rel = generate_relation("R", args.rows, &dists, cli.seed)?;
    let mut csv = Vec::new();
    rel.write_csv(&mut csv)?;
    write_output(args.out.as_deref(), std::str::from_utf8(&csv)?)?;
    if args.queries > 0 {
        let Some(dir) = &args.query_dir else {
            bail!("--queries needs --query-dir");
        };
        let names: Vec<String> = (0..args.cols).map(column_name).collect();
        let (objective, sums) = names.split_last().expect("at least one column");
        let spec = QuerySpec {
            sum_attrs: if sums.is_empty() { vec![objective.clone()] } else { sums.to_vec() },
            objective_attr: objective.clone(),
            sense: args.sense.into(),
            expected_size: args.expected_size,
            repeat: args.repeat,
            max_count: args.max_count,
        };
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, q) in random_workload(&rel, &spec, args.queries, cli.seed.wrapping_add(1))?.iter().enumerate() {
            write_output(Some(&dir.join(format!("q{}.paql", i + 1))), &format!("{q}\n"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Partition(a) => cmd_partition(a),
        Command::Run(a) => cmd_run(&cli, a),
        Command::Bench(a) => cmd_bench(&cli, a),
        Command::Gen(a) => cmd_gen(&cli, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
