//! Batch FFT / corner-turn / batch FFT pipeline over two worker pools.
//!
//! Pass 1 transforms every row of a `rows × cols` grid, the grid is then
//! transposed once, and pass 2 transforms every row of the transposed
//! grid. In each pass the rows are split statically between a "cpu" pool
//! and a "gpu" pool by [`split_batch`]. Both pools are host threads; the
//! names mirror the heterogeneous setting the split ratio is meant for.
//!
//! Every task reads its input row into a private buffer, computes, and
//! writes the result back, and each phase is recorded in a [`TaskTrace`].

use std::fmt;
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{dft_oracle, CompiledPlan};
use crate::perf::{flops_per_fft, split_batch, MachineProfile};
use crate::radix::RadixPlan;
use crate::signal::{random_samples, ComplexSample as C, Direction};

pub const DEFAULT_TRANSPOSE_BLOCK: usize = 32;

/// Row-major `rows × cols` matrix of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<C>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<C>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self {
            rows,
            cols,
            data: random_samples(&mut rng, rows * cols),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose_blocked(&self, block: usize) -> Result<Grid> {
        Ok(Grid {
            rows: self.cols,
            cols: self.rows,
            data: blocked_transpose(&self.data, self.rows, self.cols, block)?,
        })
    }
}

/// Exact transpose of a row-major `rows × cols` matrix, visiting it in
/// `block × block` tiles.
pub fn blocked_transpose<T: Copy>(input: &[T], rows: usize, cols: usize, block: usize) -> Result<Vec<T>> {
    if block == 0 {
        return Err(Error::InvalidParameter("transpose block must be at least 1".into()));
    }
    if input.len() != rows * cols {
        return Err(Error::LengthMismatch {
            expected: rows * cols,
            actual: input.len(),
        });
    }
    let Some(&first) = input.first() else {
        return Ok(Vec::new());
    };
    let mut out = vec![first; input.len()];
    for rb in (0..rows).step_by(block) {
        let r_end = (rb + block).min(rows);
        for cb in (0..cols).step_by(block) {
            let c_end = (cb + block).min(cols);
            for r in rb..r_end {
                for c in cb..c_end {
                    out[c * rows + r] = input[r * cols + c];
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSpec {
    pub rows: usize,
    pub cols: usize,
    /// Row transforms of length `cols`.
    pub plan_pass1: RadixPlan,
    /// Row transforms of the transposed grid, length `rows`.
    pub plan_pass2: RadixPlan,
    /// Share of each pass given to the cpu pool.
    pub ratio: f64,
    pub transpose_block: usize,
}

impl PipelineSpec {
    /// Max-radix-first plans, an even split, and the default transpose block.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        for len in [rows, cols] {
            if len < 2 || !len.is_power_of_two() {
                return Err(Error::InvalidLength(len));
            }
        }
        Ok(Self {
            rows,
            cols,
            plan_pass1: RadixPlan::max_radix_first(cols.trailing_zeros())?,
            plan_pass2: RadixPlan::max_radix_first(rows.trailing_zeros())?,
            ratio: 0.5,
            transpose_block: DEFAULT_TRANSPOSE_BLOCK,
        })
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = ratio;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.plan_pass1.validate_for(self.cols)?;
        self.plan_pass2.validate_for(self.rows)?;
        if !(0.0..=1.0).contains(&self.ratio) {
            return Err(Error::InvalidParameter(format!(
                "ratio must be in [0, 1], got {}",
                self.ratio
            )));
        }
        if self.transpose_block == 0 {
            return Err(Error::InvalidParameter("transpose block must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    Cpu,
    Gpu,
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pool::Cpu => "cpu",
            Pool::Gpu => "gpu",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Read,
    Compute,
    Write,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Read => "read",
            Phase::Compute => "compute",
            Phase::Write => "write",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRecord {
    /// Pass-1 tasks are `0..rows`, pass-2 tasks `rows..rows + cols`.
    pub task_id: usize,
    pub pass: u8,
    pub pool: Pool,
    pub phase: Phase,
    pub start_ns: u64,
    pub end_ns: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskTrace {
    pub records: Vec<TaskRecord>,
    /// The single-threaded transpose between the passes.
    pub transpose_ns: (u64, u64),
}

impl TaskTrace {
    /// `task_id,pool,phase,start_ns,end_ns`, sorted by start time.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task_id,pool,phase,start_ns,end_ns\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.task_id, r.pool, r.phase, r.start_ns, r.end_ns
            ));
        }
        out
    }

    pub fn task_count(&self) -> usize {
        let mut ids: Vec<_> = self.records.iter().map(|r| r.task_id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    pub fn tasks_on(&self, pool: Pool) -> usize {
        self.records
            .iter()
            .filter(|r| r.pool == pool && r.phase == Phase::Compute)
            .count()
    }

    /// Total recorded phase time on `pool`.
    pub fn busy_ns(&self, pool: Pool) -> u64 {
        self.records
            .iter()
            .filter(|r| r.pool == pool)
            .map(|r| r.end_ns - r.start_ns)
            .sum()
    }

    /// Checks read → compute → write per task, no overlap within a pool,
    /// and that pass 2 starts only after the transpose ends, which in turn
    /// starts only after pass 1 ends.
    pub fn check(&self) -> std::result::Result<(), String> {
        use std::collections::BTreeMap;
        let mut per_task: BTreeMap<usize, Vec<&TaskRecord>> = BTreeMap::new();
        for r in &self.records {
            if r.end_ns < r.start_ns {
                return Err(format!("task {} {} ends before it starts", r.task_id, r.phase));
            }
            per_task.entry(r.task_id).or_default().push(r);
        }
        for (id, recs) in &per_task {
            let phases: Vec<_> = recs.iter().map(|r| r.phase).collect();
            if phases != [Phase::Read, Phase::Compute, Phase::Write] {
                return Err(format!("task {id} has phases {phases:?}"));
            }
            if recs.windows(2).any(|w| w[1].start_ns < w[0].end_ns) {
                return Err(format!("task {id} phases overlap"));
            }
            if recs.iter().any(|r| r.pool != recs[0].pool) {
                return Err(format!("task {id} migrated between pools"));
            }
        }
        for pool in [Pool::Cpu, Pool::Gpu] {
            let mut spans: Vec<_> = self
                .records
                .iter()
                .filter(|r| r.pool == pool)
                .map(|r| (r.start_ns, r.end_ns))
                .collect();
            spans.sort_unstable();
            if spans.windows(2).any(|w| w[1].0 < w[0].1) {
                return Err(format!("{pool} pool runs overlapping tasks"));
            }
        }
        let (t_start, t_end) = self.transpose_ns;
        for r in &self.records {
            if r.pass == 1 && r.end_ns > t_start {
                return Err(format!("pass-1 task {} ends after the transpose starts", r.task_id));
            }
            if r.pass == 2 && r.start_ns < t_end {
                return Err(format!("pass-2 task {} starts before the transpose ends", r.task_id));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub output: Grid,
    pub trace: TaskTrace,
    /// First task start to last task end, in seconds.
    pub makespan: f64,
}

impl PipelineRun {
    /// Fraction of the makespan each pool spent in task phases.
    pub fn utilization(&self, pool: Pool) -> f64 {
        if self.makespan <= 0.0 {
            return 0.0;
        }
        self.trace.busy_ns(pool) as f64 / (self.makespan * 1e9)
    }
}

fn elapsed_ns(t0: Instant) -> u64 {
    t0.elapsed().as_nanos() as u64
}

/// Transforms every `len`-sample row of `rows` on one worker.
fn run_pool(
    rows: &mut [C],
    len: usize,
    first_task: usize,
    pass: u8,
    pool: Pool,
    plan: &CompiledPlan,
    t0: Instant,
) -> Vec<TaskRecord> {
    let mut records = Vec::with_capacity(rows.len() / len.max(1) * 3);
    let mut input = vec![C::new(0.0, 0.0); len];
    let mut output = vec![C::new(0.0, 0.0); len];
    for (i, row) in rows.chunks_exact_mut(len).enumerate() {
        let task_id = first_task + i;
        let mut record = |phase, start_ns| {
            records.push(TaskRecord {
                task_id,
                pass,
                pool,
                phase,
                start_ns,
                end_ns: elapsed_ns(t0),
            })
        };
        let s = elapsed_ns(t0);
        input.copy_from_slice(row);
        record(Phase::Read, s);
        let s = elapsed_ns(t0);
        plan.process(&input, &mut output).expect("row length matches plan");
        record(Phase::Compute, s);
        let s = elapsed_ns(t0);
        row.copy_from_slice(&output);
        record(Phase::Write, s);
    }
    records
}

fn run_pass(
    data: &mut [C],
    len: usize,
    ratio: f64,
    first_task: usize,
    pass: u8,
    plan: &Arc<CompiledPlan>,
    t0: Instant,
) -> Result<Vec<TaskRecord>> {
    let tasks = data.len() / len;
    let split = split_batch(tasks as u64, ratio)?;
    let (cpu_rows, gpu_rows) = data.split_at_mut(split.s_cpu as usize * len);
    let gpu_first = first_task + split.s_cpu as usize;
    let (mut cpu, gpu) = thread::scope(|scope| {
        let gpu = scope.spawn(|| run_pool(gpu_rows, len, gpu_first, pass, Pool::Gpu, plan, t0));
        let cpu = run_pool(cpu_rows, len, first_task, pass, Pool::Cpu, plan, t0);
        (cpu, gpu.join().expect("gpu pool panicked"))
    });
    cpu.extend(gpu);
    Ok(cpu)
}

/// Runs both passes and the corner turn; see the module docs.
pub fn run_pipeline(grid: &Grid, spec: &PipelineSpec) -> Result<PipelineRun> {
    spec.validate()?;
    if grid.rows != spec.rows || grid.cols != spec.cols {
        return Err(Error::InvalidParameter(format!(
            "grid is {}x{} but the pipeline expects {}x{}",
            grid.rows, grid.cols, spec.rows, spec.cols
        )));
    }
    let pass1 = Arc::new(CompiledPlan::new(spec.cols, spec.plan_pass1.clone(), Direction::Forward)?);
    let pass2 = Arc::new(CompiledPlan::new(spec.rows, spec.plan_pass2.clone(), Direction::Forward)?);

    let mut data = grid.data.clone();
    let t0 = Instant::now();
    let mut records = run_pass(&mut data, spec.cols, spec.ratio, 0, 1, &pass1, t0)?;

    let t_start = elapsed_ns(t0);
    let mut data = blocked_transpose(&data, spec.rows, spec.cols, spec.transpose_block)?;
    let t_end = elapsed_ns(t0);

    records.extend(run_pass(&mut data, spec.rows, spec.ratio, spec.rows, 2, &pass2, t0)?);
    records.sort_by_key(|r| (r.start_ns, r.task_id, r.phase));

    let first = records.iter().map(|r| r.start_ns).min().unwrap_or(0);
    let last = records.iter().map(|r| r.end_ns).max().unwrap_or(0);
    Ok(PipelineRun {
        output: Grid {
            rows: spec.cols,
            cols: spec.rows,
            data,
        },
        trace: TaskTrace {
            records,
            transpose_ns: (t_start, t_end),
        },
        makespan: (last - first) as f64 * 1e-9,
    })
}

/// Row DFTs, naive transpose, row DFTs, all through [`dft_oracle`].
pub fn reference_pipeline(grid: &Grid) -> Result<Grid> {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut pass1 = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        pass1.extend(dft_oracle(grid.row(r), Direction::Forward)?);
    }
    let mut turned = vec![C::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            turned[c * rows + r] = pass1[r * cols + c];
        }
    }
    let mut out = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        out.extend(dft_oracle(&turned[c * rows..(c + 1) * rows], Direction::Forward)?);
    }
    Grid::new(cols, rows, out)
}

/// Seconds for both passes under the static split, each pass bounded by
/// its slower pool, plus the transpose moving every sample in and out at
/// the profile bandwidth (omitted when the profile has none).
pub fn predict_makespan(spec: &PipelineSpec, profile: &MachineProfile) -> Result<f64> {
    profile.validate()?;
    spec.validate()?;
    let pass = |tasks: usize, len: usize| -> Result<f64> {
        let split = split_batch(tasks as u64, spec.ratio)?;
        let w = flops_per_fft(len);
        Ok((split.s_cpu as f64 * w / (profile.p_cpu * 1e9)).max(split.s_gpu as f64 * w / (profile.p_gpu * 1e9)))
    };
    let compute = pass(spec.rows, spec.cols)? + pass(spec.cols, spec.rows)?;
    let transpose = profile
        .bandwidth_gbs
        .map(|b| (2 * spec.rows * spec.cols * std::mem::size_of::<C>()) as f64 / (b * 1e9))
        .unwrap_or(0.0);
    Ok(compute + transpose)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perf::optimal_cpu_ratio;
    use crate::signal::relative_l2_error;

    fn naive<T: Copy>(m: &[T], rows: usize, cols: usize) -> Vec<T> {
        (0..cols)
            .flat_map(|c| (0..rows).map(move |r| m[r * cols + c]))
            .collect()
    }

    #[test]
    fn transpose_matches_naive() {
        let m: Vec<u32> = (0..6 * 10).collect();
        for block in [1, 3, 4, 32] {
            assert_eq!(blocked_transpose(&m, 6, 10, block).unwrap(), naive(&m, 6, 10));
        }
        assert!(blocked_transpose(&m, 6, 10, 0).is_err());
        assert!(blocked_transpose(&m, 5, 10, 2).is_err());
        assert!(blocked_transpose::<u8>(&[], 0, 0, 4).unwrap().is_empty());
    }

    #[test]
    fn small_grid_matches_reference() {
        let g = Grid::random(16, 16, 5);
        let spec = PipelineSpec::new(16, 16).unwrap();
        let run = run_pipeline(&g, &spec).unwrap();
        let reference = reference_pipeline(&g).unwrap();
        assert!(relative_l2_error(run.output.data(), reference.data()) < 1e-3);
        run.trace.check().unwrap();
        assert_eq!(run.trace.task_count(), 32);
    }

    #[test]
    fn rectangular_grid() {
        let g = Grid::random(8, 32, 6);
        let spec = PipelineSpec::new(8, 32).unwrap().with_ratio(0.3);
        let run = run_pipeline(&g, &spec).unwrap();
        assert_eq!((run.output.rows(), run.output.cols()), (32, 8));
        let reference = reference_pipeline(&g).unwrap();
        assert!(relative_l2_error(run.output.data(), reference.data()) < 1e-4);
    }

    #[test]
    fn zero_ratio_idles_cpu_pool() {
        let g = Grid::random(16, 16, 7);
        let run = run_pipeline(&g, &PipelineSpec::new(16, 16).unwrap().with_ratio(0.0)).unwrap();
        assert_eq!(run.trace.tasks_on(Pool::Cpu), 0);
        assert_eq!(run.trace.tasks_on(Pool::Gpu), 32);
        assert_eq!(run.utilization(Pool::Cpu), 0.0);
    }

    #[test]
    fn dimension_and_plan_errors() {
        let g = Grid::random(16, 8, 1);
        assert!(run_pipeline(&g, &PipelineSpec::new(16, 16).unwrap()).is_err());
        let mut spec = PipelineSpec::new(16, 8).unwrap();
        spec.plan_pass1 = "4,4".parse().unwrap();
        assert!(matches!(run_pipeline(&g, &spec), Err(Error::PlanMismatch { .. })));
        assert!(Grid::new(2, 2, vec![C::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let g = Grid::random(4, 4, 1);
        let run = run_pipeline(&g, &PipelineSpec::new(4, 4).unwrap()).unwrap();
        let csv = run.trace.to_csv();
        assert!(csv.starts_with("task_id,pool,phase,start_ns,end_ns\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 8);
    }

    #[test]
    fn check_catches_violations() {
        let rec = |task_id, pass, phase, start_ns, end_ns| TaskRecord {
            task_id,
            pass,
            pool: Pool::Cpu,
            phase,
            start_ns,
            end_ns,
        };
        let mut trace = TaskTrace {
            records: vec![
                rec(0, 1, Phase::Read, 0, 1),
                rec(0, 1, Phase::Compute, 1, 2),
                rec(0, 1, Phase::Write, 2, 3),
                rec(1, 2, Phase::Read, 5, 6),
                rec(1, 2, Phase::Compute, 6, 7),
                rec(1, 2, Phase::Write, 7, 8),
            ],
            transpose_ns: (3, 5),
        };
        trace.check().unwrap();
        trace.transpose_ns = (3, 6);
        assert!(trace.check().is_err());
        trace.transpose_ns = (3, 5);
        trace.records.swap(0, 1);
        assert!(trace.check().is_err());
    }

    #[test]
    fn prediction_closed_form() {
        let spec = PipelineSpec::new(1024, 1024)
            .unwrap()
            .with_ratio(optimal_cpu_ratio(40.0, 55.0).unwrap());
        let profile = MachineProfile::new(40.0, 55.0).unwrap();
        let t = predict_makespan(&spec, &profile).unwrap();
        let ideal = 2.0 * 1024.0 * (5.0 * 1024.0 * 10.0) / 95e9;
        assert!((t - ideal).abs() / ideal < 1e-3, "{t} vs {ideal}");
        assert!((t - 1.10e-3).abs() < 0.01e-3);

        let with_bw = predict_makespan(&spec, &profile.with_bandwidth(10.0).unwrap()).unwrap();
        assert!((with_bw - t - 2.0 * 1024.0 * 1024.0 * 8.0 / 10e9).abs() < 1e-12);
    }

    #[test]
    fn optimal_ratio_balances_pools() {
        let (p, q) = (40.0, 55.0);
        let spec = PipelineSpec::new(1024, 1024).unwrap().with_ratio(optimal_cpu_ratio(p, q).unwrap());
        let split = split_batch(1024, spec.ratio).unwrap();
        let w = flops_per_fft(1024);
        let (cpu, gpu) = (split.s_cpu as f64 * w / (p * 1e9), split.s_gpu as f64 * w / (q * 1e9));
        let one_task = w / (p.min(q) * 1e9);
        assert!((cpu - gpu).abs() <= one_task);
    }

    #[test]
    fn zero_gpu_throughput_rejected() {
        let spec = PipelineSpec::new(16, 16).unwrap();
        let bad = MachineProfile {
            bandwidth_gbs: None,
            p_cpu: 40.0,
            p_gpu: 0.0,
            watts_cpu: None,
            watts_gpu: None,
        };
        assert!(predict_makespan(&spec, &bad).is_err());
    }
}
