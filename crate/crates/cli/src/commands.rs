use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use radixplan::cost::{benchmark_stages, experiment_budget, Aggregator, CostTable};
use radixplan::perf::{achieved_gflops, optimal_cpu_ratio, MachineProfile, RatioReport};
use radixplan::pipeline::{predict_makespan, run_pipeline, Grid, PipelineSpec, Pool};
use radixplan::plan_space::{
    build_graph, count_plans, enumerate_plans, plan_cost, shortest_plan, MAX_ENUMERATION_STAGES,
};
use radixplan::signal::relative_l2_error;
use radixplan::{dft_oracle, io, run_plan, BenchConfig, Direction, PlanCost, RadixPlan, Signal};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{BenchArgs, Cli, Command, PlanArgs, RatioArgs, SimulateArgs, UsageError, VerifyArgs};

/// Relative L2 bound against the oracle below 1024 points.
const VERIFY_TOL_SMALL: f64 = 1e-4;
/// Bound from 1024 points up, where single-precision rounding accumulates.
const VERIFY_TOL_LARGE: f64 = 1e-3;

pub struct Report {
    pub json: Value,
    pub text: String,
    /// False when the command ran but its check did not hold.
    pub passed: bool,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Self { json, text, passed: true }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Count { size } => count(*size),
        Command::Bench(args) => bench(args, cli.seed),
        Command::Plan(args) => plan(args),
        Command::Verify(args) => verify(args, cli.seed),
        Command::Ratio(args) => ratio(args),
        Command::Simulate(args) => simulate(args, cli.seed),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// log2 of a power-of-two transform size of at least 2 points.
fn stages_of(size: usize, what: &str) -> Result<u32> {
    if size < 2 || !size.is_power_of_two() {
        return Err(usage(format!("{what} must be a power of two of at least 2, got {size}")));
    }
    Ok(size.trailing_zeros())
}

fn positive(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(usage(format!("{what} must be positive, got {value}")))
    }
}

fn unit_interval(value: f64, what: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(usage(format!("{what} must be in [0, 1], got {value}")))
    }
}

fn count(size: usize) -> Result<Report> {
    let n = stages_of(size, "size")?;
    let plans = count_plans(n);
    let experiments = experiment_budget(n);
    Ok(Report::ok(
        json!({ "size": size, "n": n, "plans": plans.to_string(), "experiments": experiments }),
        format!("plans: {plans}, experiments: {experiments}\n"),
    ))
}

fn bench(args: &BenchArgs, seed: u64) -> Result<Report> {
    let n = stages_of(args.size, "size")?;
    let config = BenchConfig {
        warmup_runs: args.warmup,
        measured_runs: args.runs,
        aggregator: if args.min { Aggregator::Minimum } else { Aggregator::Median },
        batch_per_run: args.batch,
        seed,
        label: args.label.clone(),
    };
    let table = benchmark_stages(n, &config)?;
    table
        .save(&args.out)
        .with_context(|| format!("writing cost table to {}", args.out.display()))?;
    let sidecar = radixplan::cost::sidecar_path(&args.out);
    let text = format!(
        "benchmarked {} experiments for {} points\nwrote {} and {}\n",
        table.len(),
        args.size,
        args.out.display(),
        sidecar.display()
    );
    Ok(Report::ok(
        json!({
            "size": args.size,
            "experiments": table.len(),
            "out": args.out,
            "metadata": sidecar,
            "table": table.metadata(),
        }),
        text,
    ))
}

#[derive(Serialize)]
struct Baseline {
    #[serde(flatten)]
    cost: PlanCost,
    /// Baseline cost over the reference plan's cost.
    speedup: f64,
}

fn against(reference: &PlanCost, baseline: PlanCost) -> Baseline {
    Baseline {
        speedup: baseline.total / reference.total,
        cost: baseline,
    }
}

fn baseline_lines(out: &mut String, max_first: &Baseline, radix2: &Baseline) {
    for (name, b) in [("max-radix-first", max_first), ("radix-2", radix2)] {
        let _ = writeln!(
            out,
            "  speedup vs {name} {} (cost {}): {:.2}x",
            b.cost.plan, b.cost.total, b.speedup
        );
    }
}

fn plan(args: &PlanArgs) -> Result<Report> {
    let table = CostTable::load(&args.costs)?;
    let n = table.stages();
    let best = shortest_plan(&build_graph(n, &table)?);
    let price = |p: RadixPlan| plan_cost(&p, &table);
    let max_first = price(RadixPlan::max_radix_first(n)?)?;
    let radix2 = price(RadixPlan::radix2(n)?)?;

    let tied = if n <= MAX_ENUMERATION_STAGES {
        let tol = best.total.abs() * 1e-12;
        let mut k = 0usize;
        for p in enumerate_plans(n)? {
            if (price(p)?.total - best.total).abs() <= tol {
                k += 1;
            }
        }
        Some(k)
    } else {
        None
    };

    let meta = table.metadata();
    let mut text = format!("costs: {} ({} points", meta.label, 1u64 << n);
    if let Some(units) = &meta.units {
        let _ = write!(text, ", {units}");
    }
    text.push_str(")\n");
    let _ = writeln!(text, "plan: {}", best.plan);
    let _ = writeln!(text, "total cost: {}", best.total);
    let vs_max = against(&best, max_first.clone());
    let vs_r2 = against(&best, radix2.clone());
    baseline_lines(&mut text, &vs_max, &vs_r2);
    if let Some(k) = tied {
        let _ = writeln!(
            text,
            "optimal plans: {k} (ties resolve to the lexicographically smallest radix sequence)"
        );
    }

    let mut doc = json!({
        "n": best.n,
        "plan": best.plan,
        "total_cost": best.total,
        "baselines": { "max_radix_first": vs_max, "radix2": vs_r2 },
        "tied_optima": tied,
        "tie_break": "lexicographic",
    });

    if let Some(candidate) = &args.evaluate {
        let subject = price(candidate.clone())?;
        let rank = if n <= MAX_ENUMERATION_STAGES {
            let mut cheaper = 0usize;
            for p in enumerate_plans(n)? {
                if price(p)?.total < subject.total {
                    cheaper += 1;
                }
            }
            Some(cheaper + 1)
        } else {
            None
        };
        let e_max = against(&subject, max_first);
        let e_r2 = against(&subject, radix2);
        let _ = writeln!(text, "evaluated: {} (cost {})", subject.plan, subject.total);
        baseline_lines(&mut text, &e_max, &e_r2);
        let _ = writeln!(text, "  excess over optimum: {:.2}x", subject.total / best.total);
        if let Some(r) = rank {
            let _ = writeln!(text, "  rank: {r} of {}", count_plans(n));
        }
        doc["evaluated"] = json!({
            "plan": subject.plan,
            "total_cost": subject.total,
            "baselines": { "max_radix_first": e_max, "radix2": e_r2 },
            "rank": rank,
        });
    }
    Ok(Report::ok(doc, text))
}

fn verify(args: &VerifyArgs, seed: u64) -> Result<Report> {
    let n = stages_of(args.size, "size")?;
    if args.seeds == 0 {
        return Err(usage("--seeds must be at least 1"));
    }
    let plans = match &args.plan {
        Some(p) => {
            p.validate_for(args.size)?;
            vec![p.clone()]
        }
        None => enumerate_plans(n)?,
    };
    let tolerance = if args.size < 1024 { VERIFY_TOL_SMALL } else { VERIFY_TOL_LARGE };

    let mut worst = vec![0.0f64; plans.len()];
    for s in 0..args.seeds {
        let x = Signal::random(args.size, seed.wrapping_add(s))?;
        let reference = dft_oracle(&x, Direction::Forward)?;
        for (w, p) in worst.iter_mut().zip(&plans) {
            let y = run_plan(&x, p, Direction::Forward)?;
            *w = w.max(relative_l2_error(&y, &reference));
        }
    }
    let max_error = worst.iter().copied().fold(0.0, f64::max);
    let failing: Vec<String> = plans
        .iter()
        .zip(&worst)
        .filter(|(_, &e)| e >= tolerance)
        .map(|(p, _)| p.to_string())
        .collect();
    let passed = failing.is_empty();

    let mut text = format!(
        "verified {} plan(s) for {} points over {} seed(s)\nmax relative L2 error: {max_error:.3e} (tolerance {tolerance:.0e})\n",
        plans.len(),
        args.size,
        args.seeds
    );
    if passed {
        text.push_str("result: pass\n");
    } else {
        let _ = writeln!(text, "result: FAIL ({})", failing.join("; "));
    }
    let results: Vec<Value> = plans
        .iter()
        .zip(&worst)
        .map(|(p, e)| json!({ "plan": p, "max_error": e }))
        .collect();
    Ok(Report {
        json: json!({
            "size": args.size,
            "seeds": args.seeds,
            "tolerance": tolerance,
            "max_error": max_error,
            "passed": passed,
            "plans": results,
        }),
        text,
        passed,
    })
}

fn ratio(args: &RatioArgs) -> Result<Report> {
    positive(args.p_cpu, "--p-cpu")?;
    positive(args.p_gpu, "--p-gpu")?;
    if let Some(cap) = args.load_cap {
        if cap.is_nan() || cap <= 0.0 || cap > 1.0 {
            return Err(usage(format!("--load-cap must be in (0, 1], got {cap}")));
        }
    }
    stages_of(args.size, "size")?;
    let r = RatioReport::compute(args.p_cpu, args.p_gpu, args.load_cap, args.batch, args.size)?;
    let mut text = format!("CPU ratio: {:.1}%\n", r.ratio * 100.0);
    let _ = writeln!(text, "split of {}: cpu {}, gpu {}", args.batch, r.s_cpu, r.s_gpu);
    let _ = writeln!(
        text,
        "predicted makespan: {:.3} ms for {}-point transforms",
        r.predicted_makespan * 1e3,
        args.size
    );
    Ok(Report::ok(serde_json::to_value(r)?, text))
}

/// Cheapest plan in `table` for a `len`-point pass, if the table covers it.
fn table_plan(table: Option<&CostTable>, len: usize) -> Result<Option<RadixPlan>> {
    match table {
        Some(t) if 1usize << t.stages() == len => Ok(Some(shortest_plan(&build_graph(t.stages(), t)?).plan)),
        _ => Ok(None),
    }
}

fn load_grid(path: &Path, rows: usize, cols: usize) -> Result<Grid> {
    let data = io::read_samples(path)?;
    Grid::new(rows, cols, data).with_context(|| format!("grid in {}", path.display()))
}

fn simulate(args: &SimulateArgs, seed: u64) -> Result<Report> {
    stages_of(args.rows, "--rows")?;
    stages_of(args.cols, "--cols")?;
    if args.block == 0 {
        return Err(usage("--block must be at least 1"));
    }
    let profile = match (args.p_cpu, args.p_gpu) {
        (Some(p), Some(q)) => Some(MachineProfile::new(positive(p, "--p-cpu")?, positive(q, "--p-gpu")?)?),
        (None, None) => None,
        _ => return Err(usage("--p-cpu and --p-gpu must be given together")),
    };
    let ratio = match (args.ratio, &profile) {
        (Some(r), _) => unit_interval(r, "--ratio")?,
        (None, Some(p)) => optimal_cpu_ratio(p.p_cpu, p.p_gpu)?,
        (None, None) => 0.5,
    };

    let table = args.costs.as_deref().map(CostTable::load).transpose()?;
    let mut spec = PipelineSpec::new(args.rows, args.cols)?.with_ratio(ratio);
    spec.transpose_block = args.block;
    if let Some(p) = table_plan(table.as_ref(), args.cols)? {
        spec.plan_pass1 = p;
    }
    if let Some(p) = table_plan(table.as_ref(), args.rows)? {
        spec.plan_pass2 = p;
    }
    if let Some(p) = &args.plan1 {
        spec.plan_pass1 = p.clone();
    }
    if let Some(p) = &args.plan2 {
        spec.plan_pass2 = p.clone();
    }

    let grid = match &args.input {
        Some(path) => load_grid(path, args.rows, args.cols)?,
        None => Grid::random(args.rows, args.cols, seed),
    };
    let run = run_pipeline(&grid, &spec)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, run.trace.to_csv()).with_context(|| format!("writing trace to {}", path.display()))?;
    }
    if let Some(path) = &args.output {
        io::write_samples(path, run.output.data())?;
    }

    let gflops = achieved_gflops(args.cols, args.rows as u64, run.makespan)?
        + achieved_gflops(args.rows, args.cols as u64, run.makespan)?;
    let predicted = profile.as_ref().map(|p| predict_makespan(&spec, p)).transpose()?;
    let pools: Vec<Value> = [Pool::Cpu, Pool::Gpu]
        .into_iter()
        .map(|pool| {
            json!({
                "pool": pool,
                "tasks": run.trace.tasks_on(pool),
                "busy_ns": run.trace.busy_ns(pool),
                "utilization": run.utilization(pool),
            })
        })
        .collect();

    let mut text = format!(
        "grid: {} x {}, cpu ratio {:.3}, plans {} / {}\n",
        args.rows, args.cols, ratio, spec.plan_pass1, spec.plan_pass2
    );
    let _ = writeln!(text, "tasks: {}", run.trace.task_count());
    let _ = writeln!(text, "makespan: {:.3} ms", run.makespan * 1e3);
    for pool in [Pool::Cpu, Pool::Gpu] {
        let _ = writeln!(
            text,
            "{pool}: {} tasks, utilization {:.1}%",
            run.trace.tasks_on(pool),
            run.utilization(pool) * 100.0
        );
    }
    let _ = writeln!(text, "achieved: {gflops:.3} GFlops");
    if let Some(p) = predicted {
        let _ = writeln!(text, "predicted makespan: {:.3} ms", p * 1e3);
    }
    if let Some(path) = &args.trace {
        let _ = writeln!(text, "trace: {}", path.display());
    }

    Ok(Report::ok(
        json!({
            "rows": args.rows,
            "cols": args.cols,
            "ratio": ratio,
            "plan_pass1": spec.plan_pass1,
            "plan_pass2": spec.plan_pass2,
            "tasks": run.trace.task_count(),
            "makespan_s": run.makespan,
            "achieved_gflops": gflops,
            "predicted_makespan_s": predicted,
            "pools": pools,
        }),
        text,
    ))
}
