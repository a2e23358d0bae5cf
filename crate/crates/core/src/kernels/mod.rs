//! FFT execution: radix stages, plan execution, the direct DFT oracle and
//! the four-step composition for transforms larger than a base block.

mod butterfly;
mod executor;
mod fourstep;
mod oracle;

pub use butterfly::apply_radix_stage;
pub use executor::{run_plan, CompiledPlan, PlanCache};
pub use fourstep::large_fft_fourstep;
pub use oracle::dft_oracle;
