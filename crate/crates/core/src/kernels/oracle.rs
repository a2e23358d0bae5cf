use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::signal::{ComplexSample as C, Direction};

/// Direct `O(N²)` DFT, accumulated in double precision and rounded to
/// single precision at the end. Accepts any non-zero length.
///
/// The inverse flips the exponent sign and scales by `1/N`.
pub fn dft_oracle(input: &[C], direction: Direction) -> Result<Vec<C>> {
    let n = input.len();
    if n == 0 {
        return Err(Error::EmptySignal);
    }
    let sign = direction.sign();
    let roots: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let a = sign * 2.0 * PI * k as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let scale = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => 1.0 / n as f64,
    };
    let out = (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            let mut idx = 0usize;
            for x in input {
                let (wr, wi) = roots[idx];
                let (xr, xi) = (f64::from(x.re), f64::from(x.im));
                re += xr * wr - xi * wi;
                im += xr * wi + xi * wr;
                idx += k;
                if idx >= n {
                    idx -= n;
                }
            }
            C::new((re * scale) as f32, (im * scale) as f32)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f32, im: f32) -> C {
        C::new(re, im)
    }

    #[test]
    fn impulse_gives_flat_spectrum() {
        let x = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let y = dft_oracle(&x, Direction::Forward).unwrap();
        assert_eq!(y, vec![c(1.0, 0.0); 4]);
    }

    #[test]
    fn constant_concentrates_at_dc() {
        let x = vec![c(1.0, 0.0); 4];
        let y = dft_oracle(&x, Direction::Forward).unwrap();
        assert!((y[0] - c(4.0, 0.0)).norm() < 1e-6);
        for v in &y[1..] {
            assert!(v.norm() < 1e-6);
        }
    }

    #[test]
    fn non_power_of_two_and_inverse() {
        let x: Vec<C> = (0..6).map(|k| c(k as f32, 1.0 - k as f32)).collect();
        let y = dft_oracle(&x, Direction::Forward).unwrap();
        let back = dft_oracle(&y, Direction::Inverse).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).norm() < 1e-5);
        }
    }

    #[test]
    fn empty_is_an_error() {
        let err = dft_oracle(&[], Direction::Forward).unwrap_err();
        assert_eq!(err.to_string(), "empty signal");
    }
}
