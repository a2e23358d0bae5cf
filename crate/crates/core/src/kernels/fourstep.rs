use super::executor::PlanCache;
use crate::error::{Error, Result};
use crate::radix::RadixPlan;
use crate::signal::{ComplexSample as C, Direction, Signal};
use crate::twiddle::TwiddleTable;

/// Forward `N = base_size × M` point FFT built from `base_size`-point
/// transforms.
///
/// The input is viewed as `base_size` rows by `M` columns (row-major), so
/// column `c` is the stride-`M` subsequence starting at `c`. Steps:
/// `M` column FFTs with `base_plan`, scaling of element `(row j, column c)`
/// by `ω_N^(j·c)`, a transpose, and `base_size` row FFTs of length `M`.
/// Output is in natural order.
pub fn large_fft_fourstep(input: &Signal, base_size: usize, base_plan: &RadixPlan) -> Result<Signal> {
    let n = input.len();
    base_plan.validate_for(base_size)?;
    if !n.is_multiple_of(base_size) {
        return Err(Error::InvalidParameter(format!(
            "transform length {n} is not a multiple of base size {base_size}"
        )));
    }
    let m = n / base_size;
    let cache = PlanCache::global();
    let base = cache.get(base_size, base_plan, Direction::Forward)?;
    if m == 1 {
        let out = base.process_vec(input)?;
        return Ok(Signal::new(out).expect("finite"));
    }
    let row_plan = RadixPlan::max_radix_first(m.trailing_zeros())?;
    let rows = cache.get(m, &row_plan, Direction::Forward)?;
    let twiddles = TwiddleTable::new(n, Direction::Forward)?;

    // Steps 1-3: column FFTs, twiddle scaling, written transposed so each
    // frequency index k1 owns a contiguous row of M samples.
    let mut transposed = vec![C::new(0.0, 0.0); n];
    let mut column = vec![C::new(0.0, 0.0); base_size];
    let mut spectrum = vec![C::new(0.0, 0.0); base_size];
    for c in 0..m {
        for (j, slot) in column.iter_mut().enumerate() {
            *slot = input[j * m + c];
        }
        base.process(&column, &mut spectrum)?;
        for (k1, &y) in spectrum.iter().enumerate() {
            transposed[k1 * m + c] = y * twiddles.get(k1 * c);
        }
    }

    // Step 4: length-M FFTs; X[k1 + base_size·k2] = row_k1[k2].
    let mut out = vec![C::new(0.0, 0.0); n];
    let mut row_out = vec![C::new(0.0, 0.0); m];
    for k1 in 0..base_size {
        rows.process(&transposed[k1 * m..(k1 + 1) * m], &mut row_out)?;
        for (k2, &y) in row_out.iter().enumerate() {
            out[k1 + base_size * k2] = y;
        }
    }
    Ok(Signal::new(out).expect("finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dft_oracle, run_plan};
    use crate::signal::relative_l2_error;

    #[test]
    fn sixteen_from_base_four() {
        let x = Signal::random(16, 11).unwrap();
        let y = large_fft_fourstep(&x, 4, &"4".parse().unwrap()).unwrap();
        let r = dft_oracle(&x, Direction::Forward).unwrap();
        assert!(relative_l2_error(&y, &r) < 1e-4);
    }

    #[test]
    fn degenerate_split_equals_run_plan() {
        let x = Signal::random(64, 12).unwrap();
        let plan: RadixPlan = "8,8".parse().unwrap();
        let y = large_fft_fourstep(&x, 64, &plan).unwrap();
        let z = run_plan(&x, &plan, Direction::Forward).unwrap();
        assert_eq!(y, z);
    }

    #[test]
    fn rejects_bad_shapes() {
        let x = Signal::random(16, 1).unwrap();
        assert!(large_fft_fourstep(&x, 32, &"8,4".parse().unwrap()).is_err());
        assert!(matches!(
            large_fft_fourstep(&x, 8, &"4".parse().unwrap()),
            Err(Error::PlanMismatch { .. })
        ));
    }
}
