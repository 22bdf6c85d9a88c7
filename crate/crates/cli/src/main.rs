use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robopf::report::{parse_csv, CSV_HEADER};
use robopf::{
    compare, evaluate, extract, load_network, oracle, parse_family, run_model, set_space,
    solver_options, Instance, Params,
};
use robopf_core::formulations::{Family, PolicyFile, Space};
use robopf_core::paths::{build_path_sets, Weight};
use robopf_core::Error;
use robopf_milp::Status;

#[derive(Parser)]
#[command(
    name = "robopf",
    version,
    about = "Path-flow transmission expansion under demand uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and solve one model, print its run record.
    Solve(Args),
    /// Sweep kappa and/or alpha and print the price-of-robustness table.
    Compare(Args),
    /// Check a saved decision rule over its uncertainty set.
    Evaluate(Args),
    /// Dump the admissible paths.
    Paths(Args),
    /// Worst-case cost of every expansion plan at every set vertex, as CSV.
    Oracle(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    case: PathBuf,
    #[arg(long)]
    unc: Option<PathBuf>,
    /// pb1, pb2, aar-xi, aar-xip, arc-xi, arc-xip, pb2pp-xi, pb2pp-xip.
    #[arg(long)]
    model: Option<String>,
    /// Budget on the 1-norm; a comma list for compare.
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Value-at-risk level; a comma list for compare.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Paths per (load, generator) pair.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value = "resistance")]
    weight: Weight,
    /// Bound on the thermal duals in the pb2pp models.
    #[arg(long)]
    meta: Option<f64>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Decision-rule file: written by solve, read by evaluate.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Print `-` instead of wall times.
    #[arg(long)]
    no_timing: bool,
    /// Global resistance in the current-flow model.
    #[arg(long, default_value_t = 1.0)]
    r_global: f64,
    /// Interior points sampled by evaluate.
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Run-record CSV holding an exact (arc-*) record to compare against.
    #[arg(long)]
    arc_csv: Option<PathBuf>,
}

/// Failures map to exit code 1; solve statuses are handled by the caller.
#[derive(Debug)]
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Usage> {
    fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn single(values: &[f64], name: &str) -> Result<Option<f64>, Usage> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(Usage(format!("--{name} takes one value outside compare"))),
    }
}

fn params(a: &Args, sweep: bool) -> Result<Params, Usage> {
    Ok(Params {
        kappa: if sweep {
            None
        } else {
            single(&a.kappa, "kappa")?
        },
        tau: a.tau,
        alpha: if sweep {
            None
        } else {
            single(&a.alpha, "alpha")?
        },
        samples: a.samples,
        seed: a.seed,
        k: a.k,
        weight: a.weight,
        m_eta: a.meta,
        r_global: a.r_global,
    })
}

fn instance(a: &Args, p: Params) -> Result<Instance, Usage> {
    let unc = a
        .unc
        .as_ref()
        .ok_or_else(|| Usage("--unc is required".into()))?;
    Ok(Instance::load(&read(&a.case)?, &read(unc)?, p)?)
}

fn exit_for(status: Status) -> ExitCode {
    match status {
        Status::Optimal => ExitCode::SUCCESS,
        Status::Infeasible => ExitCode::from(2),
        _ => ExitCode::from(3),
    }
}

fn cmd_solve(a: &Args) -> Result<ExitCode, Usage> {
    let family = parse_family(a.model.as_deref().unwrap_or("pb2"))?;
    let inst = instance(a, params(a, false)?)?;
    let opts = solver_options()?;
    let run = run_model(&inst, family, &opts)?;
    println!("{}", run.record.line(!a.no_timing));
    if let Some(path) = &a.csv {
        write(
            path,
            &format!("{CSV_HEADER}\n{}\n", run.record.csv_row(!a.no_timing)),
        )?;
    }
    if let Some(path) = &a.policy {
        if !matches!(family, Family::AarXi | Family::AarXip) {
            return Err(Usage("--policy needs an aar-xi or aar-xip model".into()));
        }
        if run.solution.is_optimal() {
            write(path, &extract(&inst, &run)?.to_text())?;
        }
    }
    Ok(exit_for(run.record.status))
}

fn cmd_compare(a: &Args) -> Result<ExitCode, Usage> {
    let exact = match a.model.as_deref() {
        None | Some("aar") => false,
        Some("arc") => true,
        Some(other) => {
            return Err(Usage(format!(
                "compare --model takes aar or arc, got `{other}`"
            )))
        }
    };
    let inst = instance(a, params(a, true)?)?;
    let blocks = compare(&inst, &a.kappa, &a.alpha, exact, &solver_options()?)?;
    let mut csv = format!("{CSV_HEADER}\n");
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            println!();
        }
        print!("{}", b.render(!a.no_timing));
        for c in &b.columns {
            csv.push_str(&c.record.csv_row(!a.no_timing));
            csv.push('\n');
        }
    }
    if let Some(path) = &a.csv {
        write(path, &csv)?;
    }
    let worst = blocks
        .iter()
        .flat_map(|b| &b.columns)
        .map(|c| c.record.status)
        .find(|s| *s != Status::Optimal);
    Ok(worst.map_or(ExitCode::SUCCESS, exit_for))
}

fn cmd_evaluate(a: &Args) -> Result<ExitCode, Usage> {
    let path = a
        .policy
        .as_ref()
        .ok_or_else(|| Usage("--policy is required".into()))?;
    let file = PolicyFile::parse(&read(path)?)?;
    let mut p = params(a, false)?;
    p.fill_from_words(&file.params)?;
    let inst = instance(a, p)?;
    let arc = match &a.arc_csv {
        Some(path) => {
            let want = match file.policy.space {
                Space::Xi => "arc-xi",
                Space::Demand => "arc-xip",
            };
            let records = parse_csv(&read(path)?)?;
            let r = records
                .iter()
                .find(|r| r.model == want)
                .ok_or_else(|| Usage(format!("{} has no {want} record", path.display())))?;
            Some(r.objective)
        }
        None => None,
    };
    let rep = evaluate(&inst, &file, a.points, arc)?;
    println!(
        "model={} plan={} objective={:.6}",
        file.model, file.plan, rep.objective
    );
    println!("points vertices={} interior={}", rep.vertices, rep.interior);
    println!("max_violation={:e}", rep.max_violation);
    let worst: Vec<String> = rep.worst_point.iter().map(|v| format!("{v}")).collect();
    println!("worst_point={}", worst.join(" "));
    println!(
        "realized_cost mean={:.6} max={:.6}",
        rep.mean_cost, rep.max_cost
    );
    if let Some(gap) = rep.arc_gap {
        println!("aar_minus_arc={gap:.6}");
    }
    Ok(if rep.max_violation <= 1e-6 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_paths(a: &Args) -> Result<ExitCode, Usage> {
    let unc = match &a.unc {
        Some(p) => Some(read(p)?),
        None => None,
    };
    let net = load_network(&read(&a.case)?, unc.as_deref())?;
    let ps = build_path_sets(&net, a.k, a.weight)?;
    println!("# weight={} k={}", ps.weight, ps.k);
    for (i, path) in ps.paths.iter().enumerate() {
        let edges: Vec<String> = path.edges.iter().map(usize::to_string).collect();
        let edges = if edges.is_empty() {
            "-".to_string()
        } else {
            edges.join(",")
        };
        // Twelve decimals hide summation noise such as 0.044000000000000004.
        let weight = format!("{:.12}", path.weight);
        let weight = weight.trim_end_matches('0').trim_end_matches('.');
        println!(
            "{} {} {} {} {}",
            path.load_bus, path.generator_bus, ps.path_rank[i], weight, edges
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(a: &Args) -> Result<ExitCode, Usage> {
    let family = parse_family(a.model.as_deref().unwrap_or("arc-xi"))?;
    let space =
        set_space(family).ok_or_else(|| Usage(format!("{family} has no uncertainty set")))?;
    let inst = instance(a, params(a, false)?)?;
    let start = std::time::Instant::now();
    let bf = oracle(&inst, space, &solver_options()?)?;
    let nv = bf.plans.first().map_or(0, |p| p.vertices.len());
    let mut header = "plan,investment,worst_case".to_string();
    for v in 1..=nv {
        header.push_str(&format!(",v{v}"));
    }
    println!("{header}");
    for r in &bf.plans {
        let cells: Vec<String> = r
            .per_vertex
            .iter()
            .map(|c| c.map_or("infeasible".to_string(), |c| c.to_string()))
            .collect();
        let worst = if r.robust_feasible() {
            r.cost.to_string()
        } else {
            "infeasible".into()
        };
        println!(
            "{},{},{},{}",
            r.plan.label(),
            r.investment,
            worst,
            cells.join(",")
        );
    }
    let mut record = robopf::RunRecord::new("oracle", &inst);
    match space {
        Space::Xi => {
            let b = inst.budget()?;
            (record.kappa, record.tau) = (Some(b.kappa), Some(b.tau));
        }
        Space::Demand => {
            let v = inst.var()?;
            (record.alpha, record.samples, record.seed) =
                (Some(v.alpha), Some(v.n()), Some(inst.seed()));
        }
    }
    record.time = start.elapsed().as_secs_f64();
    record.status = if bf.best.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    if let Some(best) = &bf.best {
        record.objective = best.cost;
        record.plan = best.plan.label();
    }
    eprintln!("{}", record.line(!a.no_timing));
    if let Some(path) = &a.csv {
        write(
            path,
            &format!("{CSV_HEADER}\n{}\n", record.csv_row(!a.no_timing)),
        )?;
    }
    Ok(exit_for(record.status))
}

fn main() -> ExitCode {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .parse_env("ROBOPF_LOG")
        .format_target(false)
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Paths(a) => cmd_paths(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
