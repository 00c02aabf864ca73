mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use efx_core::champion::{generalized_edge, to_dot, BasicGraph};
use efx_core::oracle::{budget_from_env, enumerate_efx};
use efx_core::{
    generate, solve, Allocation, Certificate, ClassMix, GeneratorConfig, Instance, ItemSet, SolverKind, SolverOptions,
    SolverReport,
};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "efx", version, about = "EFX allocations of indivisible goods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance (or a directory of instances) and emit a certificate.
    Solve(SolveArgs),
    /// Check an allocation or certificate against the solver guarantees.
    Verify(VerifyArgs),
    /// Enumerate every EFX allocation of a small instance.
    Brute(BruteArgs),
    /// Export the champion graph of an allocation.
    Graph(GraphArgs),
    /// Generate a seeded random instance.
    Gen(GenArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    #[arg(required_unless_present = "batch", conflicts_with = "batch")]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
    /// Agent priority for domination, as comma-separated indices.
    #[arg(long, value_delimiter = ',')]
    ordering: Option<Vec<usize>>,
    /// Certificate output file; a directory in batch mode.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solve every `*.json` instance in this directory concurrently.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Check structural observations on every champion graph.
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    /// Allocation or certificate JSON file.
    allocation: PathBuf,
    /// Guarantee to check a bare allocation against (certificates name their own).
    #[arg(long, default_value = "auto")]
    solver: SolverKind,
}

#[derive(Args)]
struct BruteArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    max_unallocated: usize,
    /// Print only the number of EFX allocations.
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct GraphArgs {
    instance: PathBuf,
    /// Allocation or certificate JSON file (a certificate contributes its final allocation).
    allocation: PathBuf,
    /// Emit Graphviz DOT (the only format).
    #[arg(long)]
    dot: bool,
    /// Add a generalized edge `target:H:S`, e.g. `3:a,b:e`; agents and items by name or index.
    #[arg(long = "edge")]
    edges: Vec<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    agents: usize,
    #[arg(long, default_value_t = 6)]
    items: usize,
    #[arg(long, default_value = "mixed")]
    class: ClassMix,
    #[arg(long, default_value_t = 20)]
    max_value: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

/// Writes to stdout; a reader that hangs up early (e.g. `head`) is not an error.
fn print_out(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n")).with_context(|| format!("writing {}", path.display())),
        None => print_out(&format!("{text}\n")),
    }
}

/// An allocation file, or a certificate whose final allocation is used.
enum AllocationFile {
    Allocation(Allocation),
    Certificate(Box<Certificate>),
}

fn load_allocation(path: &Path) -> Result<AllocationFile> {
    let text = read(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if value.get("steps").is_some() {
        let cert = Certificate::parse(&text).with_context(|| format!("parsing certificate {}", path.display()))?;
        Ok(AllocationFile::Certificate(Box::new(cert)))
    } else {
        let alloc = serde_json::from_value(value).with_context(|| format!("parsing allocation {}", path.display()))?;
        Ok(AllocationFile::Allocation(alloc))
    }
}

fn summary(report: &SolverReport) -> String {
    format!(
        "solver={} unallocated={} steps={} charity_envied={} fallback={} pi_applied={}",
        report.solver,
        report.unallocated,
        report.steps,
        report.charity_envied,
        report.fallback_used,
        report.diagnostics.pi_applied
    )
}

fn run_solve(args: SolveArgs) -> Result<ExitCode> {
    let options = SolverOptions {
        audit: args.audit,
        ..SolverOptions::default()
    };
    if let Some(dir) = &args.batch {
        return run_batch(dir, &args, &options);
    }
    let path = args.instance.as_deref().expect("clap requires an instance");
    let instance = load_instance(path)?;
    let report = solve(&instance, args.solver, args.ordering.clone(), &options)?;
    eprintln!("{}", summary(&report));
    emit(&report.certificate.to_json(), args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_batch(dir: &Path, args: &SolveArgs, options: &SolverOptions) -> Result<ExitCode> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| {
        let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
        name.ends_with(".json") && !name.ends_with(".cert.json")
    });
    paths.sort();
    if let Some(out) = &args.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    }
    let results: Vec<(PathBuf, Result<String>)> = paths
        .into_par_iter()
        .map(|path| {
            let outcome = (|| {
                let instance = load_instance(&path)?;
                let report = solve(&instance, args.solver, args.ordering.clone(), options)?;
                if let Some(out) = &args.out {
                    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                    emit(
                        &report.certificate.to_json(),
                        Some(&out.join(format!("{stem}.cert.json"))),
                    )?;
                }
                Ok(summary(&report))
            })();
            (path, outcome)
        })
        .collect();
    let mut failed = false;
    for (path, outcome) in results {
        match outcome {
            Ok(line) => println!("{}: {line}", path.display()),
            Err(e) => {
                failed = true;
                println!("{}: error: {e:#}", path.display());
            }
        }
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let outcome = match load_allocation(&args.allocation)? {
        AllocationFile::Allocation(alloc) => verify::allocation(&instance, &alloc, args.solver.resolve(&instance)),
        AllocationFile::Certificate(cert) => verify::certificate(&instance, &cert),
    };
    match outcome {
        Ok(passed) => {
            println!("ok: {}", passed.join(", "));
            Ok(ExitCode::SUCCESS)
        }
        Err(violation) => {
            println!("{violation}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn run_brute(args: BruteArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let all = enumerate_efx(&instance, args.max_unallocated, budget_from_env())?;
    if args.count {
        println!("{}", all.len());
    } else {
        emit(&serde_json::to_string_pretty(&all)?, None)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_agent(instance: &Instance, token: &str) -> Result<usize> {
    if let Some(a) = (0..instance.agents()).find(|&a| instance.agent_name(a) == token) {
        return Ok(a);
    }
    match token.parse::<usize>() {
        Ok(a) if a < instance.agents() => Ok(a),
        _ => bail!("unknown agent {token:?}"),
    }
}

fn resolve_items(instance: &Instance, list: &str) -> Result<ItemSet> {
    let list = list.trim().trim_start_matches('{').trim_end_matches('}');
    let mut set = ItemSet::EMPTY;
    for token in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let item = match (0..instance.items()).find(|&i| instance.item_name(i) == token) {
            Some(i) => i,
            None => match token.parse::<usize>() {
                Ok(i) if i < instance.items() => i,
                _ => bail!("unknown item {token:?}"),
            },
        };
        set = set.with(item);
    }
    Ok(set)
}

fn run_graph(args: GraphArgs) -> Result<ExitCode> {
    let instance = load_instance(&args.instance)?;
    let alloc = match load_allocation(&args.allocation)? {
        AllocationFile::Allocation(alloc) => alloc,
        AllocationFile::Certificate(cert) => cert.final_allocation,
    };
    alloc.validate(&instance)?;
    let mut edges = BasicGraph::build(&instance, &alloc).edges();
    for raw in &args.edges {
        let parts: Vec<&str> = raw.split(':').collect();
        let [target, added, removed] = parts[..] else {
            bail!("edge {raw:?} is not of the form target:H:S");
        };
        let target = resolve_agent(&instance, target)?;
        let added = resolve_items(&instance, added)?;
        let removed = resolve_items(&instance, removed)?;
        match generalized_edge(&instance, &alloc, target, added, removed)? {
            Some(edge) => edges.push(edge),
            None => eprintln!("nobody envies the set offered by {raw}; no edge"),
        }
    }
    print_out(&to_dot(&instance, &edges))?;
    Ok(ExitCode::SUCCESS)
}

fn run_gen(args: GenArgs) -> Result<ExitCode> {
    let instance = generate(&GeneratorConfig {
        seed: args.seed,
        agents: args.agents,
        items: args.items,
        class: args.class,
        max_value: args.max_value,
    })?;
    emit(&instance.to_json(), args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Solve(args) => run_solve(args),
        Command::Verify(args) => run_verify(args),
        Command::Brute(args) => run_brute(args),
        Command::Graph(args) => run_graph(args),
        Command::Gen(args) => run_gen(args),
    }
}
