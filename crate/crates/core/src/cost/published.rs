//! Per-stage costs for 1024-point transforms measured on Intel integrated
//! GPUs, in the original (unspecified) cost units. The same data lives in
//! `fixtures/` at the repository root.

use std::path::Path;

use super::{CostMetadata, CostTable};

pub const IVY_BRIDGE_1024_CSV: &str = include_str!("../../../../fixtures/ivybridge_1024.csv");
pub const HASWELL_1024_CSV: &str = include_str!("../../../../fixtures/haswell_1024.csv");

pub const UNITS: &str = "published cost units";

fn parse(csv: &str, label: &str, file: &str) -> CostTable {
    let mut meta = CostMetadata::loaded(label, 10);
    meta.units = Some(UNITS.into());
    CostTable::from_csv_reader(csv.as_bytes(), Some(10), meta, Path::new(file))
        .expect("bundled table is valid")
}

/// Intel Ivy Bridge (HD Graphics 4000).
pub fn ivy_bridge_1024() -> CostTable {
    parse(IVY_BRIDGE_1024_CSV, "Intel Ivy Bridge GPU", "ivybridge_1024.csv")
}

/// Intel Haswell (HD Graphics 5200).
pub fn haswell_1024() -> CostTable {
    parse(HASWELL_1024_CSV, "Intel Haswell GPU", "haswell_1024.csv")
}
