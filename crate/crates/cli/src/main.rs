//! `hypermatch`: constructions, degrees, thresholds, lattices, reachability
//! partitions, matching pipelines, verification suites and sweeps.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypermatch_core::absorbing::{
    lattice_absorbing_pipeline, npm_via_absorption, AbsorbParams, LatticePipelineParams, PipelineFailure, ResidualParams,
    Stage,
};
use hypermatch_core::constructions::BarrierSpec;
use hypermatch_core::hgraph::{SearchStatus, SolverOptions, DEFAULT_NODE_BUDGET};
use hypermatch_core::lattice::{robust_vectors, IntegerLattice, VertexPartition};
use hypermatch_core::reachability::{merge_by_transferrals, reach_partition, ReachParams};
use hypermatch_core::sweep::{parse_range, sweep_csv, SweepKind, SweepRanges};
use hypermatch_core::thresholds::{g_bounds_check, g_optimize, profile_curve_csv};
use hypermatch_core::verify::{run_suite, Suite, VerifyLimits};
use hypermatch_core::{read_hg, write_hg, Hypergraph, Matching};
use serde::Serialize;
use serde_json::json;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(name = "hypermatch", version, about = "Near perfect matchings in k-uniform hypergraphs")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Exact-solver node budget per search subtree.
    #[arg(long, global = true, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a barrier hypergraph.
    Construct(ConstructArgs),
    /// Minimum d-degree of a hypergraph, or the degree of one set.
    Degree(DegreeArgs),
    /// Optimize g(k, d, l) and check its bounds.
    Threshold(ThresholdArgs),
    /// Robust edge-vectors, lattice basis and transferrals for a partition.
    Lattice(LatticeArgs),
    /// Reachability partition, optionally merged along transferrals.
    Reach(ReachArgs),
    /// Find a near perfect matching.
    Match(MatchArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Sweep g or the conjectured threshold over (k, d, l) as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ConstructArgs {
    #[command(subcommand)]
    family: Family,
    /// Write the `.hg` file here and the sidecar JSON next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// All k-sets meeting the spine {0..s-1}.
    Space {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        s: usize,
    },
    /// k-sets with |e ∩ V1| ≡ j mod l+2, where V1 = {0..n1-1}.
    Divisibility {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        n1: usize,
    },
}

#[derive(Args)]
struct DegreeArgs {
    /// Input `.hg` file.
    input: PathBuf,
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated vertex set whose degree to report.
    #[arg(long, value_delimiter = ',')]
    set: Option<Vec<u32>>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    ell: usize,
    /// Also write the x-profile curves (h_i and f_j) as CSV.
    #[arg(long)]
    profile_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

#[derive(Args)]
struct LatticeArgs {
    input: PathBuf,
    /// Partition JSON (`{"V0": [...], "parts": [[...], ...]}`); default is
    /// the trivial partition.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// Minimum edge count for a robust edge-vector.
    #[arg(long, default_value_t = 1)]
    tau: u64,
}

#[derive(Args)]
struct ReachOpts {
    #[arg(long, default_value_t = 1)]
    tau1: u64,
    #[arg(long, default_value_t = 1)]
    eps_weak: u64,
    #[arg(long, default_value_t = 1)]
    eps_incidence: u64,
    #[arg(long, default_value_t = 2)]
    i_max: usize,
    #[arg(long, default_value_t = 2000)]
    samples: u64,
}

impl ReachOpts {
    fn params(&self, seed: u64) -> ReachParams {
        ReachParams {
            tau1: self.tau1,
            eps_weak: self.eps_weak,
            eps_incidence: self.eps_incidence,
            i_max: self.i_max,
            samples: self.samples,
            seed,
        }
    }
}

#[derive(Args)]
struct ReachArgs {
    input: PathBuf,
    #[command(flatten)]
    opts: ReachOpts,
    /// Merge parts along transferrals of the robust-vector lattice.
    #[arg(long)]
    merge: bool,
    #[arg(long, default_value_t = 1)]
    tau: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pipeline {
    Absorb4,
    Lattice,
    Exact,
}

#[derive(Args)]
struct MatchArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pipeline: Pipeline,
    /// Absorbing-matching density for the absorb4 pipeline.
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Reserve density for the lattice pipeline.
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    tau: u64,
    #[command(flatten)]
    reach: ReachOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// barriers, degree-formulas, bounds, or lattice-regressions.
    suite: String,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 14)]
    nmax: usize,
    /// Random generator sets for lattice-regressions.
    #[arg(long, default_value_t = 200)]
    samples: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// g or conjecture.
    what: String,
    /// k range: `a`, `a..b` or `a..=b` (both inclusive).
    #[arg(long)]
    k: String,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    ell: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-(k, d, l) x-profile CSV files.
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 1001)]
    points: usize,
}

/// A failed command: message and exit status.
struct Failure(u8, String);

fn usage(e: impl ToString) -> Failure {
    Failure(EXIT_USAGE, e.to_string())
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match &cli.command {
        Command::Construct(a) => construct(&cli, a),
        Command::Degree(a) => degree(&cli, a),
        Command::Threshold(a) => threshold(&cli, a),
        Command::Lattice(a) => lattice(&cli, a),
        Command::Reach(a) => reach(&cli, a),
        Command::Match(a) => matching(&cli, a),
        Command::Verify(a) => verify(&cli, a),
        Command::Sweep(a) => sweep(&cli, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn load(path: &Path) -> Result<Hypergraph, Failure> {
    let f = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    read_hg(BufReader::new(f)).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure(EXIT_FAIL, format!("{}: {e}", path.display())))
}

fn construct(cli: &Cli, a: &ConstructArgs) -> CmdResult {
    let spec = match a.family {
        Family::Space { n, k, s } => BarrierSpec::Space { n, k, s },
        Family::Divisibility { n, k, ell, j, n1 } => BarrierSpec::Divisibility { n, k, ell, j, n1 },
    };
    let (h, p) = spec.build().map_err(usage)?;
    let (family, ell, j, n1, s) = match spec {
        BarrierSpec::Space { s, .. } => ("space", None, None, None, Some(s)),
        BarrierSpec::Divisibility { ell, j, n1, .. } => ("divisibility", Some(ell), Some(j), Some(n1), None),
    };
    let sidecar = json!({
        "family": family,
        "n": h.n(),
        "k": h.k(),
        "ell": ell,
        "j": j,
        "n1": n1,
        "s": s,
        "edges": h.edge_count(),
        "partition": p.parts(),
    });
    let mut hg = Vec::new();
    write_hg(&h, &mut hg).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    match &a.out {
        Some(path) => {
            write_file(path, &hg)?;
            let side = path.with_extension("json");
            let text = serde_json::to_string_pretty(&sidecar).expect("plain JSON") + "\n";
            write_file(&side, text.as_bytes())?;
            if cli.json {
                print_json(&sidecar)?;
            } else {
                println!("wrote {} ({} edges) and {}", path.display(), h.edge_count(), side.display());
            }
        }
        None if cli.json => print_json(&sidecar)?,
        None => io::stdout().write_all(&hg).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?,
    }
    Ok(0)
}

fn degree(cli: &Cli, a: &DegreeArgs) -> CmdResult {
    let h = load(&a.input)?;
    if let Some(set) = &a.set {
        let mut set = set.clone();
        set.sort_unstable();
        let deg = h.degree(&set).map_err(usage)?;
        if cli.json {
            print_json(&json!({ "set": set, "degree": deg }))?;
        } else {
            println!("deg({set:?}) = {deg}");
        }
        return Ok(0);
    }
    let d = a.d.ok_or_else(|| usage("give --d or --set"))?;
    let profile = h.min_degree(d).map_err(usage)?;
    if cli.json {
        print_json(&profile)?;
    } else {
        println!("min {d}-degree = {} attained by {:?}", profile.value, profile.witness);
    }
    Ok(0)
}

fn threshold(cli: &Cli, a: &ThresholdArgs) -> CmdResult {
    let t = g_optimize(a.k, a.d, a.ell).map_err(usage)?;
    let bounds = g_bounds_check(a.k, a.d, a.ell, t.g).map_err(usage)?;
    if let Some(path) = &a.profile_csv {
        let csv = profile_curve_csv(a.k, a.d, a.ell, a.points).map_err(usage)?;
        write_file(path, csv.as_bytes())?;
    }
    if cli.json {
        print_json(&json!({
            "k": t.k,
            "d": t.d,
            "ell": t.ell,
            "g": t.g,
            "x_star": t.x_star,
            "j_star": t.j_star,
            "profile": t.profile.values,
            "certificate": t.certificate,
            "bounds": { "pass": bounds.pass, "checks": bounds.checks },
        }))?;
    } else {
        println!("g({}, {}, {}) = {} at x* = {}, j* = {}", t.k, t.d, t.ell, t.g, t.x_star, t.j_star);
        for c in &bounds.checks {
            println!("  {} {}: {} vs {}", if c.holds { "ok  " } else { "FAIL" }, c.name, c.lhs, c.rhs);
        }
    }
    Ok(if bounds.pass { 0 } else { EXIT_FAIL })
}

fn load_partition(path: Option<&PathBuf>, n: usize) -> Result<VertexPartition, Failure> {
    let Some(path) = path else { return Ok(VertexPartition::trivial(n)) };
    let f = File::open(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_reader(BufReader::new(f)).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        obj.entry("n").or_insert(json!(n));
    }
    let p: VertexPartition = serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if p.n() != n {
        return Err(usage(format!("partition covers {} vertices, hypergraph has {n}", p.n())));
    }
    Ok(p)
}

fn lattice(cli: &Cli, a: &LatticeArgs) -> CmdResult {
    let h = load(&a.input)?;
    let p = load_partition(a.partition.as_ref(), h.n())?;
    let robust = robust_vectors(&h, &p, a.tau);
    let l = IntegerLattice::new(p.r(), &robust).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    let transferrals = l.transferrals();
    let minimal_t = if p.r() == 2 { l.minimal_symmetric_t().map_err(|e| Failure(EXIT_FAIL, e.to_string()))? } else { None };
    if cli.json {
        print_json(&json!({
            "r": p.r(),
            "robust_vectors": robust,
            "basis": l.basis(),
            "transferrals": transferrals,
            "minimal_t": minimal_t,
        }))?;
    } else {
        println!("r = {}", p.r());
        println!("robust vectors: {robust:?}");
        println!("basis: {:?}", l.basis());
        println!("transferrals: {transferrals:?}");
        if p.r() == 2 {
            println!("minimal t: {minimal_t:?}");
        }
    }
    Ok(0)
}

fn reach(cli: &Cli, a: &ReachArgs) -> CmdResult {
    let h = load(&a.input)?;
    let params = a.opts.params(cli.seed);
    let mut p = reach_partition(&h, &params).map_err(usage)?;
    let mut merges = Vec::new();
    if a.merge {
        let out = merge_by_transferrals(&h, &p, a.tau);
        p = out.partition;
        merges = out.merges;
    }
    if cli.json {
        print_json(&json!({
            "V0": p.trash(),
            "parts": p.parts(),
            "merges": merges,
            "params": params,
        }))?;
    } else {
        println!("V0: {:?}", p.trash());
        for (i, part) in p.parts().iter().enumerate() {
            println!("V{}: {part:?}", i + 1);
        }
        if a.merge {
            println!("merges: {merges:?}");
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct MatchOutput<'a, T: Serialize> {
    pipeline: &'static str,
    success: bool,
    n: usize,
    k: usize,
    target: usize,
    size: usize,
    edges: &'a [Vec<u32>],
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<String>,
    trace: T,
}

fn report_pipeline<T: Serialize>(
    cli: &Cli,
    name: &'static str,
    h: &Hypergraph,
    result: Result<(Matching, T), PipelineFailure<T>>,
) -> CmdResult {
    let target = h.n() / h.k();
    let empty = Vec::new();
    let (out, code) = match &result {
        Ok((m, trace)) => (
            MatchOutput {
                pipeline: name,
                success: true,
                n: h.n(),
                k: h.k(),
                target,
                size: m.size(),
                edges: m.edges(),
                stage: None,
                message: None,
                trace,
            },
            0,
        ),
        Err(f) => (
            MatchOutput {
                pipeline: name,
                success: false,
                n: h.n(),
                k: h.k(),
                target,
                size: 0,
                edges: &empty,
                stage: Some(f.stage),
                message: Some(f.message.clone()),
                trace: &f.trace,
            },
            EXIT_FAIL,
        ),
    };
    if cli.json {
        print_json(&out)?;
    } else if out.success {
        println!("{name}: near perfect matching of size {}", out.size);
        for e in out.edges {
            println!("  {e:?}");
        }
    } else {
        println!("{name}: failed at {:?}: {}", out.stage.expect("set on failure"), out.message.as_deref().unwrap_or(""));
    }
    Ok(code)
}

fn matching(cli: &Cli, a: &MatchArgs) -> CmdResult {
    let h = load(&a.input)?;
    let residual = ResidualParams { node_budget: cli.budget, ..Default::default() };
    match a.pipeline {
        Pipeline::Exact => {
            let target = h.n() / h.k();
            let r = h.matching_number(&SolverOptions { target: None, node_budget: cli.budget });
            let code = match r.status {
                SearchStatus::Undecided => EXIT_UNDECIDED,
                _ if r.size >= target => 0,
                _ => EXIT_FAIL,
            };
            if cli.json {
                print_json(&json!({
                    "pipeline": "exact",
                    "success": code == 0,
                    "n": h.n(),
                    "k": h.k(),
                    "target": target,
                    "size": r.size,
                    "edges": r.witness.edges(),
                    "status": r.status,
                    "nodes": r.nodes,
                }))?;
            } else {
                println!("exact: matching of size {} ({:?}, {} nodes; floor(n/k) = {target})", r.size, r.status, r.nodes);
                for e in r.witness.edges() {
                    println!("  {e:?}");
                }
            }
            Ok(code)
        }
        Pipeline::Absorb4 => {
            let params = AbsorbParams { beta: a.beta, seed: cli.seed, residual, ..Default::default() };
            report_pipeline(cli, "absorb4", &h, npm_via_absorption(&h, &params))
        }
        Pipeline::Lattice => {
            let params = LatticePipelineParams {
                reach: a.reach.params(cli.seed),
                tau: a.tau,
                alpha: a.alpha,
                seed: cli.seed,
                residual,
                ..Default::default()
            };
            report_pipeline(cli, "lattice", &h, lattice_absorbing_pipeline(&h, &params))
        }
    }
}

fn verify(cli: &Cli, a: &VerifyArgs) -> CmdResult {
    let suite: Suite = a.suite.parse().map_err(usage)?;
    let limits = VerifyLimits { kmax: a.kmax, nmax: a.nmax, budget: cli.budget, seed: cli.seed, samples: a.samples };
    let report = run_suite(suite, &limits);
    if cli.json {
        print_json(&report)?;
    } else {
        print!("{}", report.to_text());
    }
    Ok(report.exit_code() as u8)
}

fn sweep(_cli: &Cli, a: &SweepArgs) -> CmdResult {
    let kind: SweepKind = a.what.parse().map_err(usage)?;
    let ranges = SweepRanges {
        k: parse_range(&a.k).map_err(usage)?,
        d: a.d.as_deref().map(parse_range).transpose().map_err(usage)?,
        ell: a.ell.as_deref().map(parse_range).transpose().map_err(usage)?,
    };
    let csv = sweep_csv(kind, &ranges).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
    match &a.out {
        Some(path) => {
            let f = File::create(path).map_err(|e| Failure(EXIT_FAIL, format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(f);
            w.write_all(csv.as_bytes()).and_then(|_| w.flush()).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
        }
        None => print!("{csv}"),
    }
    if let Some(dir) = &a.profiles {
        std::fs::create_dir_all(dir).map_err(|e| Failure(EXIT_FAIL, format!("{}: {e}", dir.display())))?;
        for (k, d, ell) in ranges.cells() {
            let csv = profile_curve_csv(k, d, ell, a.points).map_err(|e| Failure(EXIT_FAIL, e.to_string()))?;
            write_file(&dir.join(format!("profile_k{k}_d{d}_l{ell}.csv")), csv.as_bytes())?;
        }
    }
    Ok(0)
}
