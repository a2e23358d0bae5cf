//! Mixed-radix (2/4/8) FFT planning and execution.
//!
//! The crate is organised along the workflow it supports:
//!
//! * [`kernels`] executes a decimation-in-time FFT for any radix plan, plus
//!   the direct DFT oracle and a four-step composition for larger sizes.
//! * [`plan_space`] models admissible radix schedules as a DAG of stages and
//!   picks the cheapest one by shortest path.
//! * [`cost`] produces per-stage cost tables, either by timing stage kernels
//!   on the host or by loading published tables.
//! * [`perf`] holds the analytic throughput and CPU/GPU split models.
//! * [`pipeline`] runs the FFT / corner-turn / FFT batch skeleton across two
//!   worker pools and predicts its makespan.

pub mod cost;
pub mod error;
pub mod io;
pub mod kernels;
pub mod perf;
pub mod pipeline;
pub mod plan_space;
pub mod radix;
pub mod signal;
pub mod twiddle;

pub use cost::{BenchConfig, CostSource, CostTable};
pub use error::{Error, Result};
pub use kernels::{dft_oracle, large_fft_fourstep, run_plan, CompiledPlan};
pub use plan_space::{PlanCost, PlanGraph};
pub use radix::{Radix, RadixPlan};
pub use signal::{ComplexSample, Direction, Signal};
pub use twiddle::TwiddleTable;
