//! Per-stage cost tables: the planner's input.
//!
//! A table for an `n`-stage transform holds one cost for every
//! `(stage, radix)` with `stage + log2(radix) <= n`. Tables come from
//! timing stage kernels on the host ([`benchmark_stages`]) or from files
//! ([`CostTable::load`]); the planner does not care which.
//!
//! On disk a table is a CSV (`stage,radix,cost`) plus an optional JSON
//! sidecar with the same stem carrying [`CostMetadata`].

mod bench;
pub mod published;

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use bench::{
    benchmark_stages, benchmark_stages_with, timer_resolution_ns, Aggregator, BenchConfig, Experiment,
    MIN_RUN_RESOLUTION_MULTIPLE,
};

use crate::error::{Error, Result};
use crate::io::write_text;
use crate::radix::Radix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostSource {
    Benchmarked,
    Loaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMetadata {
    pub label: String,
    pub n: u32,
    pub source: CostSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_runs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured_runs: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_per_run: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregator: Option<Aggregator>,
    /// Seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

impl CostMetadata {
    pub fn loaded(label: impl Into<String>, n: u32) -> Self {
        Self {
            label: label.into(),
            n,
            source: CostSource::Loaded,
            warmup_runs: None,
            measured_runs: None,
            seed: None,
            batch_per_run: None,
            aggregator: None,
            timestamp: None,
            units: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CostRow {
    stage: u32,
    radix: u32,
    cost: f64,
}

/// Number of stage experiments needed to fill a table over {2, 4, 8}:
/// one per graph edge, which is `3(n − 1)` for `n >= 2`.
pub fn experiment_budget(stages: u32) -> u32 {
    Radix::DEFAULT_SET
        .iter()
        .map(|r| (stages + 1).saturating_sub(r.log2()))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    stages: u32,
    radices: Vec<Radix>,
    entries: BTreeMap<(u32, Radix), f64>,
    metadata: CostMetadata,
}

impl CostTable {
    /// Builds a table over the default {2, 4, 8} radix set.
    pub fn new(
        stages: u32,
        entries: impl IntoIterator<Item = (u32, Radix, f64)>,
        metadata: CostMetadata,
    ) -> Result<Self> {
        Self::with_radices(stages, &Radix::DEFAULT_SET, entries, metadata)
    }

    /// Validates that every admissible `(stage, radix)` has exactly one
    /// finite, positive cost and that nothing else is present.
    pub fn with_radices(
        stages: u32,
        radices: &[Radix],
        entries: impl IntoIterator<Item = (u32, Radix, f64)>,
        mut metadata: CostMetadata,
    ) -> Result<Self> {
        if stages == 0 {
            return Err(Error::InvalidStageCount(stages));
        }
        let mut radices = radices.to_vec();
        radices.sort_unstable();
        radices.dedup();

        let mut map = BTreeMap::new();
        for (stage, radix, cost) in entries {
            if stage + radix.log2() > stages {
                return Err(Error::EntryOutOfRange {
                    stage,
                    radix,
                    total: stages,
                });
            }
            if !radices.contains(&radix) {
                return Err(Error::UnsupportedRadix(radix.value() as u32));
            }
            if !(cost.is_finite() && cost > 0.0) {
                return Err(Error::InvalidCost { stage, radix, cost });
            }
            if map.insert((stage, radix), cost).is_some() {
                return Err(Error::DuplicateEntry { stage, radix });
            }
        }
        let missing: Vec<_> = (0..stages)
            .flat_map(|s| radices.iter().map(move |&r| (s, r)))
            .filter(|&(s, r)| s + r.log2() <= stages && !map.contains_key(&(s, r)))
            .collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteTable(missing));
        }
        metadata.n = stages;
        Ok(Self {
            stages,
            radices,
            entries: map,
            metadata,
        })
    }

    pub fn stages(&self) -> u32 {
        self.stages
    }

    pub fn radices(&self) -> &[Radix] {
        &self.radices
    }

    pub fn source(&self) -> CostSource {
        self.metadata.source
    }

    pub fn metadata(&self) -> &CostMetadata {
        &self.metadata
    }

    pub fn get(&self, stage: u32, radix: Radix) -> Option<f64> {
        self.entries.get(&(stage, radix)).copied()
    }

    /// Entries ordered by stage, then radix.
    pub fn entries(&self) -> impl Iterator<Item = (u32, Radix, f64)> + '_ {
        self.entries.iter().map(|(&(s, r), &c)| (s, r, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("stage,radix,cost\n");
        for (s, r, c) in self.entries() {
            out.push_str(&format!("{s},{r},{c}\n"));
        }
        out
    }

    /// Parses the CSV body. Without an explicit `stages`, the transform
    /// size is taken from the radix-2 rows, which must cover every stage.
    pub fn from_csv_reader(
        reader: impl Read,
        stages: Option<u32>,
        metadata: CostMetadata,
        origin: &Path,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::parse(origin, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["stage", "radix", "cost"] {
            return Err(Error::parse(origin, "expected header `stage,radix,cost`"));
        }
        let mut rows = Vec::new();
        for row in rdr.deserialize::<CostRow>() {
            let row = row.map_err(|e| Error::parse(origin, e))?;
            let radix = Radix::from_value(row.radix)?;
            rows.push((row.stage, radix, row.cost));
        }
        let stages = match stages {
            Some(n) => n,
            None => infer_stages(&rows).ok_or_else(|| Error::parse(origin, "no cost rows"))?,
        };
        let mut radices: Vec<Radix> = Radix::DEFAULT_SET.to_vec();
        for &(_, r, _) in &rows {
            if !radices.contains(&r) {
                radices.push(r);
            }
        }
        Self::with_radices(stages, &radices, rows, metadata)
    }

    /// Loads `path` and, when present, its `.json` sidecar.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let sidecar = sidecar_path(path);
        let mut metadata = if sidecar.exists() {
            let text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
            serde_json::from_str::<CostMetadata>(&text).map_err(|e| Error::parse(&sidecar, e))?
        } else {
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            CostMetadata::loaded(label, 0)
        };
        let stages = (metadata.n > 0).then_some(metadata.n);
        metadata.source = CostSource::Loaded;
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_reader(file, stages, metadata, path)
    }

    /// Writes the CSV to `path` and the metadata to its `.json` sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_text(path, &self.to_csv())?;
        let sidecar = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.metadata).expect("metadata serializes");
        write_text(&sidecar, &(json + "\n"))
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn infer_stages(rows: &[(u32, Radix, f64)]) -> Option<u32> {
    let from_r2 = rows
        .iter()
        .filter(|(_, r, _)| *r == Radix::R2)
        .map(|(s, _, _)| s + 1)
        .max();
    from_r2.or_else(|| rows.iter().map(|(s, r, _)| s + r.log2()).max())
}
