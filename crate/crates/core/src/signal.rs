//! Complex sample buffers.

use std::ops::{Deref, DerefMut};

use num_complex::Complex32;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Single-precision complex sample.
pub type ComplexSample = Complex32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Inverse,
}

impl Direction {
    /// Sign of the twiddle exponent.
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// A power-of-two length (>= 2) run of finite complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal(Vec<ComplexSample>);

impl Signal {
    pub fn new(samples: Vec<ComplexSample>) -> Result<Self> {
        let n = samples.len();
        if n == 0 {
            return Err(Error::EmptySignal);
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidLength(n));
        }
        if let Some(index) = samples
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(samples))
    }

    /// Uniform samples in `[-1, 1)` for both parts, reproducible from `seed`.
    pub fn random(len: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(random_samples(&mut rng, len))
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![ComplexSample::new(0.0, 0.0); len])
    }

    pub fn log2_len(&self) -> u32 {
        self.0.len().trailing_zeros()
    }

    pub fn as_slice(&self) -> &[ComplexSample] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<ComplexSample> {
        self.0
    }
}

impl Deref for Signal {
    type Target = [ComplexSample];

    fn deref(&self) -> &[ComplexSample] {
        &self.0
    }
}

impl DerefMut for Signal {
    fn deref_mut(&mut self) -> &mut [ComplexSample] {
        &mut self.0
    }
}

impl AsRef<[ComplexSample]> for Signal {
    fn as_ref(&self) -> &[ComplexSample] {
        &self.0
    }
}

impl TryFrom<Vec<ComplexSample>> for Signal {
    type Error = Error;

    fn try_from(v: Vec<ComplexSample>) -> Result<Self> {
        Self::new(v)
    }
}

pub(crate) fn random_samples<R: Rng>(rng: &mut R, len: usize) -> Vec<ComplexSample> {
    (0..len)
        .map(|_| ComplexSample::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// `‖actual − expected‖₂ / ‖expected‖₂`, accumulated in double precision.
///
/// Falls back to the absolute error norm when `expected` is all zeros.
pub fn relative_l2_error(actual: &[ComplexSample], expected: &[ComplexSample]) -> f64 {
    assert_eq!(actual.len(), expected.len(), "length mismatch");
    let mut diff = 0.0f64;
    let mut norm = 0.0f64;
    for (a, e) in actual.iter().zip(expected) {
        let dr = f64::from(a.re) - f64::from(e.re);
        let di = f64::from(a.im) - f64::from(e.im);
        diff += dr * dr + di * di;
        norm += f64::from(e.re).powi(2) + f64::from(e.im).powi(2);
    }
    if norm == 0.0 {
        diff.sqrt()
    } else {
        (diff / norm).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lengths() {
        assert!(matches!(Signal::new(vec![]), Err(Error::EmptySignal)));
        assert!(matches!(Signal::zeros(1), Err(Error::InvalidLength(1))));
        assert!(matches!(Signal::zeros(12), Err(Error::InvalidLength(12))));
        assert!(Signal::zeros(2).is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let mut v = vec![ComplexSample::new(0.0, 0.0); 4];
        v[3].im = f32::NAN;
        assert!(matches!(Signal::new(v), Err(Error::NonFinite { index: 3 })));
    }

    #[test]
    fn random_is_reproducible() {
        let a = Signal::random(64, 7).unwrap();
        let b = Signal::random(64, 7).unwrap();
        let c = Signal::random(64, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|s| s.re.abs() <= 1.0 && s.im.abs() <= 1.0));
    }

    #[test]
    fn relative_error() {
        let e = vec![ComplexSample::new(3.0, 4.0)];
        let a = vec![ComplexSample::new(3.0, 4.5)];
        assert!((relative_l2_error(&a, &e) - 0.1).abs() < 1e-12);
        assert_eq!(relative_l2_error(&e, &e), 0.0);
    }
}
