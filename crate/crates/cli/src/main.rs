use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperrank::correction::CorrectionMode;
use hyperrank::hypergraph::{read_hypergraph, write_hypergraph};
use hyperrank::motifs::{d3c_hypergraph, filter_network, read_edge_list, write_id_map};
use hyperrank::partition::{
    bipartition, recursive_partition, write_hcurve_csv, write_partition_csv, OrderingMethod, PartitionOptions,
};
use hyperrank::perturb::{log_grid, perturbation_experiment, write_experiment_csv, Target};
use hyperrank::solver::{solve, Model};
use hyperrank::stochastic::uniform;
use hyperrank::subspace::{cluster_and_score, generate_instance, method_name, write_points_csv, InstanceLayout};
use hyperrank::{Error, PageRankProblem, SolveOptions, UniformHypergraph};
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "hyperrank", version, about = "Multi-linear pseudo-PageRank on uniform hypergraphs")]
struct Cli {
    /// Worker threads for tensor contractions and trials.
    #[arg(long, global = true, env = "HYPERRANK_THREADS", default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the PageRank vector of a hypergraph.
    Solve(SolveArgs),
    /// Spectral sweep-cut partition of a hypergraph.
    Partition(PartitionArgs),
    /// Build the directed 3-cycle hypergraph of an edge list.
    Motifs(MotifsArgs),
    /// Synthetic line clustering run.
    Subspace(SubspaceArgs),
    /// Perturbation experiment against the a priori bound.
    Perturb(PerturbArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelArg {
    Mlppr,
    Mpr,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum CorrectionArg {
    Implicit,
    Explicit,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Mlppr,
    Mpr,
    Gpr,
}

impl From<MethodArg> for OrderingMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Mlppr => OrderingMethod::Mlppr,
            MethodArg::Mpr => OrderingMethod::Mpr,
            MethodArg::Gpr => OrderingMethod::Gpr,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TargetArg {
    Both,
    V,
    Tensor,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    /// `uniform` or a file with one value per line.
    #[arg(long, default_value = "uniform")]
    v: String,
    #[arg(long, value_enum, default_value_t = ModelArg::Mlppr)]
    model: ModelArg,
    /// Dangling correction used by the MPR model.
    #[arg(long, value_enum, default_value_t = CorrectionArg::Implicit)]
    correction: CorrectionArg,
    #[arg(long, default_value_t = 1e-8)]
    tol_step: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_eq: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// MPR shift.
    #[arg(long, default_value_t = 0.0)]
    shift: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PartitionArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    parts: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Mlppr)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `vertex,id` map from `motifs`, to report external ids.
    #[arg(long)]
    ids: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Sweep curve of the first split.
    #[arg(long)]
    hcurve: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct MotifsArgs {
    /// Whitespace-separated `from to` edge list; `#` comments allowed.
    #[arg(long)]
    snap: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stats: Option<PathBuf>,
    /// `vertex,id` map from hypergraph vertices to the input's node ids.
    #[arg(long)]
    id_map: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SubspaceArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Consecutive seeds to run, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Mlppr)]
    method: MethodArg,
    /// Variance of the Gaussian noise added to inliers.
    #[arg(long, default_value_t = 0.5)]
    noise_variance: f64,
    #[arg(long, default_value_t = 4)]
    parts: usize,
    #[arg(long)]
    out: PathBuf,
    /// Points of the first run, as `x,y,label`.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value = "uniform")]
    v: String,
    /// `lo:hi`, spaced logarithmically.
    #[arg(long, default_value = "1e-4:1e-1")]
    sigma_grid: String,
    #[arg(long, default_value_t = 4)]
    grid_points: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [TargetArg::Both, TargetArg::V, TargetArg::Tensor])]
    modes: Vec<TargetArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(String),
    NotConverged(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } => Failure::NotConverged(e.to_string()),
            Error::InvalidParameter(_) | Error::UnsupportedOrder { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_err(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(|e| io_err(path, e))
}

fn load_hypergraph(path: &Path) -> Result<UniformHypergraph, Failure> {
    read_hypergraph(open(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// `uniform`, or one number per line (last comma field; non-numeric header
/// lines and `#` comments skipped).
fn load_v(source: &str, n: usize) -> Result<Vec<f64>, Failure> {
    if source == "uniform" {
        return Ok(uniform(n));
    }
    let path = Path::new(source);
    let mut v = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        let t = line.split('#').next().unwrap().trim();
        if t.is_empty() {
            continue;
        }
        let field = t.rsplit(',').next().unwrap().trim();
        match field.parse::<f64>() {
            Ok(x) => v.push(x),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Failure::Data(format!("{source}:{}: bad value {field:?}", i + 1))),
        }
    }
    Ok(v)
}

fn emit_summary(summary: &serde_json::Value, path: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    println!("{text}");
    if let Some(p) = path {
        std::fs::write(p, text + "\n").map_err(|e| io_err(p, e))?;
    }
    Ok(())
}

fn finish<W: Write>(mut w: W, path: &Path) -> CmdResult {
    w.flush().map_err(|e| io_err(path, e))
}

fn cmd_solve(a: &SolveArgs, threads: usize) -> CmdResult {
    let h = load_hypergraph(&a.input)?;
    let v = load_v(&a.v, h.n())?;
    let model = match (a.model, a.correction) {
        (ModelArg::Mlppr, _) => Model::Mlppr,
        (ModelArg::Mpr, CorrectionArg::Implicit) => Model::Mpr(CorrectionMode::Implicit),
        (ModelArg::Mpr, CorrectionArg::Explicit) => Model::Mpr(CorrectionMode::Explicit),
    };
    let problem = PageRankProblem::from_hypergraph(&h, a.alpha, v)?.with_model(model);
    let opts = SolveOptions {
        tol_step: a.tol_step,
        tol_eq: a.tol_eq,
        max_iter: a.max_iter,
        shift: a.shift,
        threads,
        ..Default::default()
    };
    let r = solve(&problem, &opts)?;
    let mut w = create(&a.out)?;
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "vertex,y")?;
        for (i, y) in r.y.iter().enumerate() {
            writeln!(w, "{},{y:e}", i + 1)?;
        }
        Ok(())
    };
    write(&mut w).map_err(|e| io_err(&a.out, e))?;
    finish(w, &a.out)?;
    let summary = json!({
        "command": "solve",
        "config": a,
        "threads": threads,
        "n": h.n(),
        "k": h.order(),
        "edges": h.num_edges(),
        "report": r,
    });
    emit_summary(&summary, a.summary.as_deref())?;
    if !r.converged {
        return Err(Failure::NotConverged(format!(
            "no convergence after {} iterations (step residual {:e}, equation residual {:e})",
            r.iterations, r.residual_step, r.residual_eq
        )));
    }
    Ok(())
}

fn load_ids(path: &Path) -> Result<Vec<u64>, Failure> {
    let mut ids = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let id = line
            .rsplit(',')
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| Failure::Data(format!("{}:{}: bad id line", path.display(), i + 1)))?;
        ids.push(id);
    }
    Ok(ids)
}

fn cmd_partition(a: &PartitionArgs, threads: usize) -> CmdResult {
    let h = load_hypergraph(&a.input)?;
    let ids = a.ids.as_deref().map(load_ids).transpose()?;
    if let Some(ids) = &ids {
        if ids.len() != h.n() {
            return Err(Failure::Data(format!("id map has {} rows for {} vertices", ids.len(), h.n())));
        }
    }
    let opts = PartitionOptions {
        method: a.method.into(),
        alpha: a.alpha,
        seed: a.seed,
        solve: SolveOptions { threads, ..Default::default() },
        ..Default::default()
    };
    if a.parts == 0 {
        return Err(Failure::Usage("--parts must be at least 1".into()));
    }
    let first = if a.hcurve.is_some() || a.parts == 2 { Some(bipartition(&h, &opts)?) } else { None };
    let result = recursive_partition(&h, a.parts, &opts)?;
    for d in &result.diagnostics {
        eprintln!("note: {d}");
    }
    let mut w = create(&a.out)?;
    write_partition_csv(&mut w, &result.parts, ids.as_deref())?;
    finish(w, &a.out)?;
    if let (Some(path), Some(cut)) = (&a.hcurve, &first) {
        let mut w = create(path)?;
        write_hcurve_csv(&mut w, cut)?;
        finish(w, path)?;
    }
    let summary = json!({
        "command": "partition",
        "config": a,
        "threads": threads,
        "n": h.n(),
        "edges": h.num_edges(),
        "part_sizes": result.parts.iter().map(Vec::len).collect::<Vec<_>>(),
        "first_split": first.as_ref().map(|c| json!({"size": c.i_star, "h": c.h_min()})),
        "diagnostics": result.diagnostics,
    });
    emit_summary(&summary, a.summary.as_deref())
}

fn cmd_motifs(a: &MotifsArgs) -> CmdResult {
    let (g, read_stats) = read_edge_list(open(&a.snap)?)?;
    let (filtered, d3cs) = filter_network(&g)?;
    let h = d3c_hypergraph(&filtered, &d3cs)?;
    let mut w = create(&a.out)?;
    write_hypergraph(&mut w, &h)?;
    finish(w, &a.out)?;
    if let Some(path) = &a.id_map {
        let mut w = create(path)?;
        write_id_map(&mut w, &filtered)?;
        finish(w, path)?;
    }
    let summary = json!({
        "command": "motifs",
        "config": a,
        "input": {"nodes": g.n(), "arcs": g.num_arcs(), "read": read_stats},
        "filtered": {"nodes": filtered.n(), "arcs": filtered.num_arcs()},
        "d3cs": d3cs.len(),
    });
    if let Some(path) = &a.stats {
        std::fs::write(path, serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n")
            .map_err(|e| io_err(path, e))?;
    }
    emit_summary(&summary, None)
}

fn cmd_subspace(a: &SubspaceArgs, threads: usize) -> CmdResult {
    if a.noise_variance.is_nan() || a.noise_variance < 0.0 {
        return Err(Failure::Usage("--noise-variance must be nonnegative".into()));
    }
    let layout = InstanceLayout { noise_variance: a.noise_variance, ..InstanceLayout::default() };
    let opts = PartitionOptions {
        method: a.method.into(),
        solve: SolveOptions { threads, ..Default::default() },
        ..Default::default()
    };
    let mut w = create(&a.out)?;
    writeln!(w, "seed,method,success_ratio,parts_found,num_edges").map_err(|e| io_err(&a.out, e))?;
    let mut ratios = Vec::new();
    for seed in a.seed..a.seed + a.runs {
        let ps = generate_instance(a.n, seed, &layout)?;
        if seed == a.seed {
            if let Some(path) = &a.points {
                let mut pw = create(path)?;
                write_points_csv(&mut pw, &ps)?;
                finish(pw, path)?;
            }
        }
        let s = cluster_and_score(&ps, a.parts, seed, &opts)?;
        for d in &s.diagnostics {
            eprintln!("seed {seed}: {d}");
        }
        writeln!(w, "{seed},{},{},{},{}", method_name(opts.method), s.success_ratio, s.parts_found, s.num_edges)
            .map_err(|e| io_err(&a.out, e))?;
        ratios.push(s.success_ratio);
    }
    finish(w, &a.out)?;
    let mean = ratios.iter().sum::<f64>() / ratios.len().max(1) as f64;
    let summary = json!({
        "command": "subspace",
        "config": a,
        "threads": threads,
        "layout": {"centers": layout.centers, "half_length": layout.half_length, "noise_variance": layout.noise_variance},
        "mean_success_ratio": mean,
    });
    emit_summary(&summary, a.summary.as_deref())
}

fn parse_grid(grid: &str, points: usize) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("--sigma-grid {grid:?} must look like lo:hi with 0 < lo <= hi < 1"));
    let (lo, hi) = grid.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && lo <= hi && hi < 1.0) || points == 0 {
        return Err(bad());
    }
    Ok(log_grid(lo, hi, points))
}

fn cmd_perturb(a: &PerturbArgs, threads: usize) -> CmdResult {
    let h = load_hypergraph(&a.input)?;
    let v = load_v(&a.v, h.n())?;
    let problem = PageRankProblem::from_hypergraph(&h, a.alpha, v)?;
    let grid = parse_grid(&a.sigma_grid, a.grid_points)?;
    let targets: Vec<Target> = a
        .modes
        .iter()
        .map(|m| match m {
            TargetArg::Both => Target::Both,
            TargetArg::V => Target::V,
            TargetArg::Tensor => Target::Tensor,
        })
        .collect();
    let rows = perturbation_experiment(&problem, &grid, &targets, a.trials, a.seed, threads)?;
    let mut w = create(&a.out)?;
    write_experiment_csv(&mut w, &rows)?;
    finish(w, &a.out)?;
    let violations: usize = rows.iter().map(|r| r.violations).sum();
    let summary = json!({
        "command": "perturb",
        "config": a,
        "threads": threads,
        "rows": rows,
        "violations": violations,
    });
    emit_summary(&summary, a.summary.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, cli.threads),
        Command::Partition(a) => cmd_partition(a, cli.threads),
        Command::Motifs(a) => cmd_motifs(a),
        Command::Subspace(a) => cmd_subspace(a, cli.threads),
        Command::Perturb(a) => cmd_perturb(a, cli.threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::NotConverged(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
