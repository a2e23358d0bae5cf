use std::path::PathBuf;

use crate::radix::Radix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,

    #[error("signal length {0} is not a power of two >= 2")]
    InvalidLength(usize),

    #[error("sample {index} is not finite")]
    NonFinite { index: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unsupported radix {0} (expected a power of two between 2 and 16)")]
    UnsupportedRadix(u32),

    #[error("plan exceeds transform size: stage {stage} + log2({radix}) > {total}")]
    StageOverrun {
        stage: u32,
        radix: Radix,
        total: u32,
    },

    #[error("radix logs do not sum to log2 N: plan covers {covered} stages, transform needs {expected}")]
    PlanMismatch { covered: u32, expected: u32 },

    #[error("empty radix plan")]
    EmptyPlan,

    #[error("invalid plan notation {0:?}")]
    PlanSyntax(String),

    #[error("enumeration too large: n = {0} exceeds the limit of {max}", max = crate::plan_space::MAX_ENUMERATION_STAGES)]
    EnumerationTooLarge(u32),

    #[error("missing cost entry for stage {stage}, radix {radix}")]
    MissingCost { stage: u32, radix: Radix },

    #[error("cost table is incomplete, missing (stage, radix): {}", format_pairs(.0))]
    IncompleteTable(Vec<(u32, Radix)>),

    #[error("cost entry (stage {stage}, radix {radix}) exceeds transform of {total} stages")]
    EntryOutOfRange {
        stage: u32,
        radix: Radix,
        total: u32,
    },

    #[error("duplicate cost entry for stage {stage}, radix {radix}")]
    DuplicateEntry { stage: u32, radix: Radix },

    #[error("invalid cost {cost} for stage {stage}, radix {radix}: costs must be finite and positive")]
    InvalidCost { stage: u32, radix: Radix, cost: f64 },

    #[error("invalid stage count {0}")]
    InvalidStageCount(u32),

    #[error("timer resolution too coarse: a measured run took {run_ns} ns against a {resolution_ns} ns timer; increase batch_per_run")]
    TimerResolution { run_ns: u64, resolution_ns: u64 },

    #[error("invalid benchmark configuration: {0}")]
    BenchConfig(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn format_pairs(pairs: &[(u32, Radix)]) -> String {
    pairs
        .iter()
        .map(|(s, r)| format!("({s}, {r})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
