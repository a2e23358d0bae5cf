//! Precomputed roots of unity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::{ComplexSample, Direction};

/// `ω_N^k = e^(∓2πik/N)` for `k = 0..N`, computed in double precision and
/// stored in single precision.
///
/// One full-size table serves every stage of an `N`-point transform: a
/// stage combining blocks of length `L` reads entries at stride `N / L`.
/// Immutable after construction, so it can be shared across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct TwiddleTable {
    direction: Direction,
    factors: Vec<ComplexSample>,
}

impl TwiddleTable {
    pub fn new(size: usize, direction: Direction) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptySignal);
        }
        let forward: Vec<ComplexSample> = (0..size)
            .map(|k| {
                if k == 0 {
                    return ComplexSample::new(1.0, 0.0);
                }
                let angle = -2.0 * PI * k as f64 / size as f64;
                ComplexSample::new(angle.cos() as f32, angle.sin() as f32)
            })
            .collect();
        let factors = match direction {
            Direction::Forward => forward,
            Direction::Inverse => forward.into_iter().map(|w| w.conj()).collect(),
        };
        Ok(Self { direction, factors })
    }

    pub fn size(&self) -> usize {
        self.factors.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn factors(&self) -> &[ComplexSample] {
        &self.factors
    }

    /// `ω_N^k`, with `k` reduced modulo `N`.
    #[inline]
    pub fn get(&self, k: usize) -> ComplexSample {
        self.factors[k % self.factors.len()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_modulus_and_exact_one() {
        for n in [1usize, 2, 8, 1024, 4096] {
            let t = TwiddleTable::new(n, Direction::Forward).unwrap();
            assert_eq!(t.factors()[0], ComplexSample::new(1.0, 0.0));
            for w in t.factors() {
                assert!((w.norm() - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn inverse_is_conjugate() {
        let f = TwiddleTable::new(256, Direction::Forward).unwrap();
        let i = TwiddleTable::new(256, Direction::Inverse).unwrap();
        for (a, b) in f.factors().iter().zip(i.factors()) {
            assert_eq!(*b, a.conj());
        }
    }

    #[test]
    fn quarter_turn() {
        let t = TwiddleTable::new(4, Direction::Forward).unwrap();
        let w = t.get(1);
        assert!(w.re.abs() < 1e-7 && (w.im + 1.0).abs() < 1e-7);
        assert_eq!(t.get(5), t.get(1));
    }

    #[test]
    fn empty_rejected() {
        assert!(TwiddleTable::new(0, Direction::Forward).is_err());
    }
}
