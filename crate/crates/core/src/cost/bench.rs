use std::hint::black_box;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CostMetadata, CostSource, CostTable};
use crate::error::{Error, Result};
use crate::kernels::apply_radix_stage;
use crate::radix::Radix;
use crate::signal::{random_samples, Direction};
use crate::twiddle::TwiddleTable;

/// A timed run must last at least this many timer ticks.
pub const MIN_RUN_RESOLUTION_MULTIPLE: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    Median,
    Minimum,
}

impl Aggregator {
    fn apply(self, samples: &mut [f64]) -> f64 {
        samples.sort_by(f64::total_cmp);
        match self {
            Aggregator::Minimum => samples[0],
            Aggregator::Median => {
                let n = samples.len();
                if n % 2 == 1 {
                    samples[n / 2]
                } else {
                    0.5 * (samples[n / 2 - 1] + samples[n / 2])
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub warmup_runs: u32,
    pub measured_runs: u32,
    pub aggregator: Aggregator,
    /// Stage invocations timed together per run, each on its own buffer.
    pub batch_per_run: u32,
    pub seed: u64,
    pub label: String,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            warmup_runs: 5,
            measured_runs: 31,
            aggregator: Aggregator::Median,
            batch_per_run: 256,
            seed: 0x5eed_f00d,
            label: "host cpu".into(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.measured_runs < 3 {
            return Err(Error::BenchConfig("measured_runs must be at least 3"));
        }
        if self.batch_per_run < 1 {
            return Err(Error::BenchConfig("batch_per_run must be at least 1"));
        }
        Ok(())
    }
}

/// One timed `(stage, radix)` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub stage: u32,
    pub radix: Radix,
    /// Per-invocation nanoseconds for each measured run.
    pub samples_ns: Vec<f64>,
    /// Aggregated per-invocation cost.
    pub cost_ns: f64,
}

/// Smallest non-zero step observed between consecutive `Instant` reads.
pub fn timer_resolution_ns() -> u64 {
    let mut best = u64::MAX;
    for _ in 0..2000 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min((b - a).as_nanos() as u64);
    }
    best.max(1)
}

pub fn benchmark_stages(stages: u32, config: &BenchConfig) -> Result<CostTable> {
    benchmark_stages_with(stages, config, |_| {})
}

/// Times every admissible `(stage, radix)` over {2, 4, 8} on a `2^stages`
/// point buffer and returns the resulting table, in nanoseconds per stage
/// invocation. `on_experiment` sees each experiment as it completes.
///
/// Only the stage kernel is timed: no digit reversal, no buffer refresh.
/// Run on an otherwise idle, single-threaded process.
pub fn benchmark_stages_with(
    stages: u32,
    config: &BenchConfig,
    mut on_experiment: impl FnMut(&Experiment),
) -> Result<CostTable> {
    if !(4..=14).contains(&stages) {
        return Err(Error::InvalidStageCount(stages));
    }
    config.validate()?;
    let len = 1usize << stages;
    let twiddles = TwiddleTable::new(len, Direction::Forward)?;
    let resolution = timer_resolution_ns();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let batch = config.batch_per_run as usize;

    let mut entries = Vec::new();
    for stage in 0..stages {
        for radix in Radix::DEFAULT_SET {
            if stage + radix.log2() > stages {
                continue;
            }
            let pristine: Vec<_> = (0..batch).map(|_| random_samples(&mut rng, len)).collect();
            let mut buffers = pristine.clone();
            let mut samples = Vec::with_capacity(config.measured_runs as usize);
            for run in 0..config.warmup_runs + config.measured_runs {
                for (buf, src) in buffers.iter_mut().zip(&pristine) {
                    buf.copy_from_slice(src);
                }
                let start = Instant::now();
                for buf in buffers.iter_mut() {
                    apply_radix_stage(buf, radix, stage, &twiddles)?;
                    black_box(&buf[0]);
                }
                let elapsed = start.elapsed().as_nanos() as u64;
                if run >= config.warmup_runs {
                    if elapsed < MIN_RUN_RESOLUTION_MULTIPLE * resolution {
                        return Err(Error::TimerResolution {
                            run_ns: elapsed,
                            resolution_ns: resolution,
                        });
                    }
                    samples.push(elapsed as f64 / batch as f64);
                }
            }
            let cost_ns = config.aggregator.apply(&mut samples.clone());
            let exp = Experiment {
                stage,
                radix,
                samples_ns: samples,
                cost_ns,
            };
            on_experiment(&exp);
            entries.push((stage, radix, cost_ns));
        }
    }

    let metadata = CostMetadata {
        label: config.label.clone(),
        n: stages,
        source: CostSource::Benchmarked,
        warmup_runs: Some(config.warmup_runs),
        measured_runs: Some(config.measured_runs),
        seed: Some(config.seed),
        batch_per_run: Some(config.batch_per_run),
        aggregator: Some(config.aggregator),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs()),
        units: Some("ns per stage".into()),
    };
    CostTable::new(stages, entries, metadata)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> BenchConfig {
        BenchConfig {
            warmup_runs: 1,
            measured_runs: 3,
            batch_per_run: 256,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn aggregators() {
        assert_eq!(Aggregator::Median.apply(&mut [5.0, 1.0, 3.0]), 3.0);
        assert_eq!(Aggregator::Median.apply(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(Aggregator::Minimum.apply(&mut [5.0, 1.0, 3.0]), 1.0);
    }

    #[test]
    fn config_validation() {
        let mut c = quick();
        c.measured_runs = 2;
        assert!(matches!(benchmark_stages(4, &c), Err(Error::BenchConfig(_))));
        let mut c = quick();
        c.batch_per_run = 0;
        assert!(c.validate().is_err());
        assert!(matches!(benchmark_stages(3, &quick()), Err(Error::InvalidStageCount(3))));
        assert!(matches!(benchmark_stages(15, &quick()), Err(Error::InvalidStageCount(15))));
    }

    #[test]
    fn too_small_a_batch_is_reported() {
        // A single 16-point radix-2 stage finishes well inside 100 timer ticks.
        let c = BenchConfig {
            batch_per_run: 1,
            ..quick()
        };
        match benchmark_stages(4, &c) {
            Err(Error::TimerResolution { .. }) => {}
            Ok(_) => {} // very coarse-grained hosts can still clear the bar
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn sixteen_points() {
        let mut seen = Vec::new();
        let t = benchmark_stages_with(4, &quick(), |e| seen.push((e.stage, e.radix))).unwrap();
        assert_eq!(seen.len(), 9);
        assert_eq!(t.len(), 9);
        assert_eq!(t.source(), CostSource::Benchmarked);
        assert_eq!(t.metadata().measured_runs, Some(3));
        assert!(t.entries().all(|(_, _, c)| c > 0.0));
    }
}
