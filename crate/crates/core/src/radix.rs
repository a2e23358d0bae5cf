//! Radix identifiers and ordered radix plans.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A butterfly radix. Radix `r` consumes `log2(r)` logical stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Radix {
    R2,
    R4,
    R8,
    R16,
}

impl Radix {
    /// The radix set used throughout the planner unless overridden.
    pub const DEFAULT_SET: [Radix; 3] = [Radix::R2, Radix::R4, Radix::R8];

    pub const fn value(self) -> usize {
        1 << self.log2()
    }

    pub const fn log2(self) -> u32 {
        match self {
            Radix::R2 => 1,
            Radix::R4 => 2,
            Radix::R8 => 3,
            Radix::R16 => 4,
        }
    }

    pub fn from_value(value: u32) -> Result<Self> {
        match value {
            2 => Ok(Radix::R2),
            4 => Ok(Radix::R4),
            8 => Ok(Radix::R8),
            16 => Ok(Radix::R16),
            other => Err(Error::UnsupportedRadix(other)),
        }
    }
}

impl TryFrom<u32> for Radix {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        Radix::from_value(value)
    }
}

impl From<Radix> for u32 {
    fn from(r: Radix) -> u32 {
        r.value() as u32
    }
}

impl fmt::Display for Radix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// An ordered, non-empty list of radixes. The first radix runs first.
///
/// A plan does not know its transform size; [`RadixPlan::validate_for`]
/// checks it against one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Radix>", into = "Vec<Radix>")]
pub struct RadixPlan(Vec<Radix>);

impl RadixPlan {
    pub fn new(radixes: Vec<Radix>) -> Result<Self> {
        if radixes.is_empty() {
            return Err(Error::EmptyPlan);
        }
        Ok(Self(radixes))
    }

    pub fn from_values(values: &[u32]) -> Result<Self> {
        let radixes = values
            .iter()
            .map(|&v| Radix::from_value(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(radixes)
    }

    /// All radix-2 stages.
    pub fn radix2(stages: u32) -> Result<Self> {
        Self::new(vec![Radix::R2; stages as usize])
    }

    /// Largest radix first, the remainder in a final smaller stage:
    /// `[8, 8, 8, 2]` for ten stages.
    pub fn max_radix_first(stages: u32) -> Result<Self> {
        let mut out = vec![Radix::R8; (stages / 3) as usize];
        match stages % 3 {
            1 => out.push(Radix::R2),
            2 => out.push(Radix::R4),
            _ => {}
        }
        Self::new(out)
    }

    pub fn radixes(&self) -> &[Radix] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of logical stages covered, `Σ log2(r)`.
    pub fn stages(&self) -> u32 {
        self.0.iter().map(|r| r.log2()).sum()
    }

    /// Pairs of (starting stage index, radix) in execution order.
    pub fn stage_starts(&self) -> impl Iterator<Item = (u32, Radix)> + '_ {
        self.0.iter().scan(0u32, |stage, &r| {
            let start = *stage;
            *stage += r.log2();
            Some((start, r))
        })
    }

    /// Checks the plan against a transform of `len` samples.
    pub fn validate_for(&self, len: usize) -> Result<()> {
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidLength(len));
        }
        let expected = len.trailing_zeros();
        let covered = self.stages();
        if covered != expected {
            return Err(Error::PlanMismatch { covered, expected });
        }
        Ok(())
    }

    pub fn to_values(&self) -> Vec<u32> {
        self.0.iter().map(|&r| r.into()).collect()
    }
}

impl TryFrom<Vec<Radix>> for RadixPlan {
    type Error = Error;

    fn try_from(v: Vec<Radix>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RadixPlan> for Vec<Radix> {
    fn from(p: RadixPlan) -> Self {
        p.0
    }
}

impl fmt::Display for RadixPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{r}")?;
        }
        Ok(())
    }
}

/// Parses the comma-separated notation, e.g. `"4,8,8,4"`.
impl FromStr for RadixPlan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|tok| tok.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::PlanSyntax(s.to_owned()))?;
        Self::from_values(&values)
    }
}
