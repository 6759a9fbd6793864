//! Command line front end: solve tasks, dump abstractions, emit PDDL and
//! replay solution programs from reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use arcplan::abstraction::{self, AbstractionKind, ALL_KINDS};
use arcplan::arc_io::{self, TaskReport};
use arcplan::domain::{build_domain, PlanningInstance};
use arcplan::relations;
use arcplan::synthesis::{self, RunOptions};
use arcplan::vm;
use arcplan::Task;

#[derive(Parser)]
#[command(name = "arcplan", version, about = "Grid-task solver via program synthesis over object abstractions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline over one task or a directory of tasks.
    Solve(SolveArgs),
    /// Dump node graphs, flags and relations of the surviving abstractions.
    Abstract(InspectArgs),
    /// Generate the PDDL domain and instance files for a task.
    EmitPddl(InspectArgs),
    /// Re-run a solution program from a report on a task file.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// A single task file.
    #[arg(long)]
    task: Option<PathBuf>,
    /// A directory of task files (*.json), processed in filename order.
    #[arg(long)]
    tasks_dir: Option<PathBuf>,
    /// Report output path; stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-configuration search time limit in seconds.
    #[arg(long, default_value_t = 60)]
    time_limit: u64,
    /// Optional overall budget per task in seconds.
    #[arg(long)]
    task_budget: Option<u64>,
    /// Maximum application-section length (3..=10).
    #[arg(long, default_value_t = 10)]
    max_lines: usize,
    /// Maximum action novelty bound (1..=3).
    #[arg(long, default_value_t = 3)]
    max_novelty: usize,
    /// Comma-separated abstraction allow-list (e.g. cc4,cc8,pixels).
    #[arg(long)]
    abstractions: Option<String>,
    /// Also emit PDDL files for each task under this directory.
    #[arg(long)]
    emit_pddl: Option<PathBuf>,
    /// Also dump abstraction graphs for each task under this directory.
    #[arg(long)]
    dump_abstractions: Option<PathBuf>,
    /// Worker threads for task-level parallelism.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct InspectArgs {
    #[arg(long)]
    task: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    abstractions: Option<String>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    task: PathBuf,
    /// Report containing the solution record for this task.
    #[arg(long)]
    report: PathBuf,
    /// Record id; defaults to the task file stem.
    #[arg(long)]
    id: Option<String>,
}

fn parse_kinds(spec: &Option<String>) -> Result<Option<Vec<AbstractionKind>>, String> {
    match spec {
        None => Ok(None),
        Some(list) => {
            let mut kinds = Vec::new();
            for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                match AbstractionKind::from_name(name) {
                    Some(kind) => kinds.push(kind),
                    None => return Err(format!("unknown abstraction: {name}")),
                }
            }
            Ok(Some(kinds))
        }
    }
}

fn collect_task_paths(args: &SolveArgs) -> Result<Vec<PathBuf>, String> {
    match (&args.task, &args.tasks_dir) {
        (Some(task), None) => Ok(vec![task.clone()]),
        (None, Some(dir)) => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
                .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
                .collect();
            paths.sort();
            Ok(paths)
        }
        _ => Err("exactly one of --task or --tasks-dir is required".into()),
    }
}

/// Pick the abstraction the PDDL emission uses: the solving one when known,
/// otherwise the first survivor of duplicate removal.
fn emission_kind(task: &Task, solved: Option<&str>, allow: &Option<Vec<AbstractionKind>>) -> Option<AbstractionKind> {
    if let Some(name) = solved {
        return AbstractionKind::from_name(name);
    }
    let kinds: Vec<AbstractionKind> = ALL_KINDS
        .iter()
        .copied()
        .filter(|k| allow.as_ref().is_none_or(|a| a.contains(k)))
        .collect();
    abstraction::dedupe_abstractions(task, &kinds)
        .into_iter()
        .find(|&kind| build_domain(task, kind).is_ok())
}

fn emit_pddl_for(task: &Task, kind: AbstractionKind, dir: &Path) -> std::io::Result<()> {
    let task_dir = dir.join(&task.id);
    std::fs::create_dir_all(&task_dir)?;
    let (model, train, test) = match build_domain(task, kind) {
        Ok(parts) => parts,
        Err(_) => return Ok(()),
    };
    std::fs::write(task_dir.join("domain.pddl"), arcplan::pddl::domain_text(&model))?;
    let write_set = |label: &str, instances: &[PlanningInstance]| -> std::io::Result<()> {
        for (i, instance) in instances.iter().enumerate() {
            let name = format!("{}-{label}-{i}", task.id);
            std::fs::write(
                task_dir.join(format!("{label}_{i}.pddl")),
                arcplan::pddl::instance_text(&model, instance, &name),
            )?;
        }
        Ok(())
    };
    write_set("train", &train)?;
    write_set("test", &test)?;
    Ok(())
}

fn dump_abstractions_for(
    task: &Task,
    allow: &Option<Vec<AbstractionKind>>,
    dir: &Path,
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let kinds: Vec<AbstractionKind> = ALL_KINDS
        .iter()
        .copied()
        .filter(|k| allow.as_ref().is_none_or(|a| a.contains(k)))
        .collect();
    let kinds = abstraction::dedupe_abstractions(task, &kinds);
    let mut doc = serde_json::Map::new();
    for kind in kinds {
        let mut pairs = Vec::new();
        for (label, pair) in task
            .train
            .iter()
            .enumerate()
            .map(|(i, p)| (format!("train-{i}"), p))
            .chain(
                task.test
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (format!("test-{i}"), p)),
            )
        {
            let graph = abstraction::abstract_grid(&pair.input, kind);
            let flags = abstraction::compute_flags(
                &graph.nodes,
                graph.dims,
                graph.background,
                &pair.input,
            );
            let relations = relations::compute_relations(&graph).ok();
            pairs.push(serde_json::json!({
                "pair": label,
                "background": graph.background,
                "nodes": graph.nodes.iter().map(|n| serde_json::json!({
                    "id": n.id,
                    "cells": n.cells,
                    "color": n.color,
                    "size": n.size(),
                    "shape": n.shape().name(),
                })).collect::<Vec<_>>(),
                "flags": flags,
                "relations": relations,
            }));
        }
        doc.insert(kind.name().to_string(), serde_json::Value::Array(pairs));
    }
    let path = dir.join(format!("{}.json", task.id));
    std::fs::write(path, serde_json::to_string_pretty(&doc).expect("dump serialization"))?;
    Ok(())
}

fn run_solve(args: &SolveArgs) -> Result<ExitCode, String> {
    if !(3..=10).contains(&args.max_lines) {
        return Err("--max-lines must be within 3..=10".into());
    }
    if !(1..=3).contains(&args.max_novelty) {
        return Err("--max-novelty must be within 1..=3".into());
    }
    if args.workers == 0 {
        return Err("--workers must be at least 1".into());
    }
    let kinds = parse_kinds(&args.abstractions)?;
    let paths = collect_task_paths(args)?;
    let mut tasks = Vec::new();
    for path in &paths {
        match arc_io::load_task(path) {
            Ok(task) => tasks.push(task),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return Ok(ExitCode::from(1));
            }
        }
    }
    let options = RunOptions {
        time_limit: Duration::from_secs(args.time_limit),
        task_budget: args.task_budget.map(Duration::from_secs),
        max_lines: args.max_lines,
        max_novelty: args.max_novelty,
        kinds: kinds.clone(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| e.to_string())?;
    let records: Vec<TaskReport> = pool.install(|| {
        use rayon::prelude::*;
        tasks
            .par_iter()
            .map(|task| {
                let record = synthesis::solve_task(task, &options);
                log::info!(
                    "{}: train={} test={} expanded={}",
                    record.id,
                    record.solved_train,
                    record.solved_test,
                    record.expanded
                );
                record
            })
            .collect()
    });
    for (task, record) in tasks.iter().zip(&records) {
        if let Some(dir) = &args.emit_pddl {
            if let Some(kind) = emission_kind(task, record.abstraction.as_deref(), &kinds) {
                emit_pddl_for(task, kind, dir).map_err(|e| e.to_string())?;
            }
        }
        if let Some(dir) = &args.dump_abstractions {
            dump_abstractions_for(task, &kinds, dir).map_err(|e| e.to_string())?;
        }
    }
    let body = arc_io::report_to_json(&records);
    match &args.report {
        Some(path) => std::fs::write(path, body).map_err(|e| e.to_string())?,
        None => println!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_inspect(args: &InspectArgs, emit: bool) -> Result<ExitCode, String> {
    let kinds = parse_kinds(&args.abstractions)?;
    let task = match arc_io::load_task(&args.task) {
        Ok(task) => task,
        Err(e) => {
            eprintln!("error: {}: {e}", args.task.display());
            return Ok(ExitCode::from(1));
        }
    };
    if emit {
        std::fs::create_dir_all(&args.out).map_err(|e| e.to_string())?;
        match emission_kind(&task, None, &kinds) {
            Some(kind) => emit_pddl_for(&task, kind, &args.out).map_err(|e| e.to_string())?,
            None => {
                eprintln!("error: every abstraction produced an empty domain");
                return Ok(ExitCode::from(1));
            }
        }
    } else {
        dump_abstractions_for(&task, &kinds, &args.out).map_err(|e| e.to_string())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_replay(args: &ReplayArgs) -> Result<ExitCode, String> {
    let task = arc_io::load_task(&args.task).map_err(|e| e.to_string())?;
    let report = arc_io::load_report(&args.report).map_err(|e| e.to_string())?;
    let wanted = args.id.clone().unwrap_or_else(|| task.id.clone());
    let Some(record) = report.tasks.iter().find(|r| r.id == wanted) else {
        eprintln!("error: no record for task {wanted}");
        return Ok(ExitCode::from(1));
    };
    let (Some(program), Some(kind)) = (&record.program, &record.abstraction) else {
        eprintln!("error: record for {wanted} carries no solution program");
        return Ok(ExitCode::from(1));
    };
    let kind = AbstractionKind::from_name(kind)
        .ok_or_else(|| format!("unknown abstraction in record: {kind}"))?;
    let pointers = record
        .pointers
        .iter()
        .map(|d| {
            vm::Pointer::from_description(d).ok_or_else(|| format!("bad pointer spec: {d}"))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let program = vm::parse_program(program, pointers).map_err(|e| e.to_string())?;
    let mut all_ok = true;
    for (label, pair) in task
        .train
        .iter()
        .enumerate()
        .map(|(i, p)| (format!("train-{i}"), p))
        .chain(
            task.test
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("test-{i}"), p)),
        )
    {
        let instance = PlanningInstance::new(pair, kind);
        let outcome = vm::run(&program.view(), &instance).outcome;
        let ok = outcome == vm::Outcome::Solved;
        all_ok &= ok;
        println!("{label}: {}", if ok { "solved" } else { "not solved" });
    }
    Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Abstract(args) => run_inspect(args, false),
        Command::EmitPddl(args) => run_inspect(args, true),
        Command::Replay(args) => run_replay(args),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
