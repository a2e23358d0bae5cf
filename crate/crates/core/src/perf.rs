//! Analytic throughput models and the static CPU/GPU batch split.
//!
//! Throughputs are in GFlops, bandwidths in GB/s, times in seconds. FFT work
//! is counted with the usual `5·N·log2(N)` flops per complex transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `5·N·log2(N)` flops for one complex `N`-point transform.
pub fn flops_per_fft(len: usize) -> f64 {
    5.0 * len as f64 * (len as f64).log2()
}

/// Bandwidth-bound throughput ceiling for `len`-point transforms streamed
/// over a `bandwidth_gbs` link: `5·N·log2(N)·B / (2·4·N)`.
///
/// The denominator charges 4 bytes per sample in each direction, which
/// reproduces the published 32 / 62 GFlops ceilings for 5 / 10 GB/s at
/// N = 1024 even though a complex `f32` sample occupies 8 bytes.
pub fn max_throughput(len: usize, bandwidth_gbs: f64) -> f64 {
    flops_per_fft(len) * bandwidth_gbs / (2.0 * 4.0 * len as f64)
}

/// GFlops achieved by `count` transforms of `len` points in `elapsed_s`.
pub fn achieved_gflops(len: usize, count: u64, elapsed_s: f64) -> Result<f64> {
    if elapsed_s.is_nan() || elapsed_s <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "elapsed time must be positive, got {elapsed_s}"
        )));
    }
    Ok(count as f64 * flops_per_fft(len) / elapsed_s / 1e9)
}

pub fn gflops_per_watt(gflops: f64, watts: f64) -> Result<f64> {
    if watts.is_nan() || watts <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "power must be positive, got {watts} W"
        )));
    }
    Ok(gflops / watts)
}

fn check_throughput(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} throughput must be positive, got {value}"
        )))
    }
}

/// Fraction of a batch to give the CPU so both pools finish together:
/// `S_cpu / P_cpu = S_gpu / P_gpu`, i.e. `1 / (P_gpu / P_cpu + 1)`.
pub fn optimal_cpu_ratio(p_cpu: f64, p_gpu: f64) -> Result<f64> {
    check_throughput("CPU", p_cpu)?;
    check_throughput("GPU", p_gpu)?;
    Ok(1.0 / (p_gpu / p_cpu + 1.0))
}

/// Like [`optimal_cpu_ratio`], with the CPU contributing only
/// `cpu_load_cap` of its throughput so it keeps headroom for other work.
pub fn constrained_cpu_ratio(p_cpu: f64, p_gpu: f64, cpu_load_cap: f64) -> Result<f64> {
    if !(cpu_load_cap > 0.0 && cpu_load_cap <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "CPU load cap must be in (0, 1], got {cpu_load_cap}"
        )));
    }
    check_throughput("CPU", p_cpu)?;
    optimal_cpu_ratio(p_cpu * cpu_load_cap, p_gpu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitDecision {
    pub cpu_ratio: f64,
    pub s_cpu: u64,
    pub s_gpu: u64,
    pub batch_size: u64,
}

/// `s_cpu = floor(S·ratio)`; the remainder goes to the GPU pool.
pub fn split_batch(batch_size: u64, ratio: f64) -> Result<SplitDecision> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!(
            "ratio must be in [0, 1], got {ratio}"
        )));
    }
    let s_cpu = ((batch_size as f64 * ratio).floor() as u64).min(batch_size);
    Ok(SplitDecision {
        cpu_ratio: ratio,
        s_cpu,
        s_gpu: batch_size - s_cpu,
        batch_size,
    })
}

/// Seconds until the slower pool finishes its share of `len`-point FFTs.
pub fn predict_batch_makespan(split: &SplitDecision, len: usize, p_cpu: f64, p_gpu: f64) -> Result<f64> {
    check_throughput("CPU", p_cpu)?;
    check_throughput("GPU", p_gpu)?;
    let w = flops_per_fft(len);
    let cpu = split.s_cpu as f64 * w / (p_cpu * 1e9);
    let gpu = split.s_gpu as f64 * w / (p_gpu * 1e9);
    Ok(cpu.max(gpu))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineProfile {
    /// GB/s; `None` drops the memory term from predictions.
    pub bandwidth_gbs: Option<f64>,
    pub p_cpu: f64,
    pub p_gpu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watts_cpu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watts_gpu: Option<f64>,
}

impl MachineProfile {
    pub fn new(p_cpu: f64, p_gpu: f64) -> Result<Self> {
        let p = Self {
            bandwidth_gbs: None,
            p_cpu,
            p_gpu,
            watts_cpu: None,
            watts_gpu: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_bandwidth(mut self, gbs: f64) -> Result<Self> {
        self.bandwidth_gbs = Some(gbs);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_throughput("CPU", self.p_cpu)?;
        check_throughput("GPU", self.p_gpu)?;
        for (name, v) in [
            ("bandwidth", self.bandwidth_gbs),
            ("CPU power", self.watts_cpu),
            ("GPU power", self.watts_gpu),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// Summary emitted by the `ratio` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub p_cpu: f64,
    pub p_gpu: f64,
    pub ratio: f64,
    pub s_cpu: u64,
    pub s_gpu: u64,
    /// Seconds.
    pub predicted_makespan: f64,
}

impl RatioReport {
    /// Optimal (optionally load-capped) split of `batch` transforms of
    /// `len` points. The makespan uses the uncapped throughputs.
    pub fn compute(p_cpu: f64, p_gpu: f64, load_cap: Option<f64>, batch: u64, len: usize) -> Result<Self> {
        let ratio = match load_cap {
            Some(cap) => constrained_cpu_ratio(p_cpu, p_gpu, cap)?,
            None => optimal_cpu_ratio(p_cpu, p_gpu)?,
        };
        let split = split_batch(batch, ratio)?;
        Ok(Self {
            p_cpu,
            p_gpu,
            ratio,
            s_cpu: split.s_cpu,
            s_gpu: split.s_gpu,
            predicted_makespan: predict_batch_makespan(&split, len, p_cpu, p_gpu)?,
        })
    }
}
