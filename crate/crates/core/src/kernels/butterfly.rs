use std::f32::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::radix::Radix;
use crate::signal::{ComplexSample as C, Direction};
use crate::twiddle::TwiddleTable;

#[inline(always)]
fn cmul(a: C, w: C) -> C {
    #[cfg(target_feature = "fma")]
    {
        C::new(
            a.re.mul_add(w.re, -(a.im * w.im)),
            a.re.mul_add(w.im, a.im * w.re),
        )
    }
    #[cfg(not(target_feature = "fma"))]
    {
        C::new(a.re * w.re - a.im * w.im, a.re * w.im + a.im * w.re)
    }
}

/// Multiplies by `ω_4 = ∓i`.
#[inline(always)]
fn rot_quarter(x: C, dir: Direction) -> C {
    match dir {
        Direction::Forward => C::new(x.im, -x.re),
        Direction::Inverse => C::new(-x.im, x.re),
    }
}

#[inline(always)]
fn bfly2(a: &mut [C; 2]) {
    let (x, y) = (a[0], a[1]);
    a[0] = x + y;
    a[1] = x - y;
}

#[inline(always)]
fn bfly4(a: &mut [C; 4], dir: Direction) {
    let t0 = a[0] + a[2];
    let t1 = a[0] - a[2];
    let t2 = a[1] + a[3];
    let t3 = rot_quarter(a[1] - a[3], dir);
    a[0] = t0 + t2;
    a[1] = t1 + t3;
    a[2] = t0 - t2;
    a[3] = t1 - t3;
}

#[inline(always)]
fn bfly8(a: &mut [C; 8], dir: Direction) {
    let mut even = [a[0], a[2], a[4], a[6]];
    let mut odd = [a[1], a[3], a[5], a[7]];
    bfly4(&mut even, dir);
    bfly4(&mut odd, dir);
    let s = match dir {
        Direction::Forward => -FRAC_1_SQRT_2,
        Direction::Inverse => FRAC_1_SQRT_2,
    };
    // ω_8^t for t = 1..3
    let o1 = cmul(odd[1], C::new(FRAC_1_SQRT_2, s));
    let o2 = rot_quarter(odd[2], dir);
    let o3 = cmul(odd[3], C::new(-FRAC_1_SQRT_2, s));
    let odd = [odd[0], o1, o2, o3];
    for t in 0..4 {
        a[t] = even[t] + odd[t];
        a[t + 4] = even[t] - odd[t];
    }
}

/// Direct small DFT, used for radixes without a hand-written butterfly.
fn bfly_generic(a: &mut [C], twiddles: &TwiddleTable) {
    let r = a.len();
    let step = twiddles.size() / r;
    let input: Vec<C> = a.to_vec();
    for (t, out) in a.iter_mut().enumerate() {
        let mut acc = input[0];
        for (q, &x) in input.iter().enumerate().skip(1) {
            acc += cmul(x, twiddles.get((q * t % r) * step));
        }
        *out = acc;
    }
}

/// Runs one decimation-in-time pass of `N / radix` butterflies in place.
///
/// `stage_index` is the number of logical (radix-2) stages already applied,
/// so the pass merges blocks of `2^stage_index` into blocks of
/// `2^stage_index * radix`. The transform direction and size come from
/// `twiddles`, which must have one entry per sample.
pub fn apply_radix_stage(
    data: &mut [C],
    radix: Radix,
    stage_index: u32,
    twiddles: &TwiddleTable,
) -> Result<()> {
    let n = data.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidLength(n));
    }
    if twiddles.size() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: twiddles.size(),
        });
    }
    let total = n.trailing_zeros();
    if stage_index + radix.log2() > total {
        return Err(Error::StageOverrun {
            stage: stage_index,
            radix,
            total,
        });
    }
    radix_pass(data, radix, 1usize << stage_index, twiddles);
    Ok(())
}

/// Unchecked pass; `span` is the already-combined block length.
pub(crate) fn radix_pass(data: &mut [C], radix: Radix, span: usize, twiddles: &TwiddleTable) {
    match radix {
        Radix::R2 => pass_fixed::<2>(data, span, twiddles, bfly2),
        Radix::R4 => {
            let dir = twiddles.direction();
            pass_fixed::<4>(data, span, twiddles, |a| bfly4(a, dir))
        }
        Radix::R8 => {
            let dir = twiddles.direction();
            pass_fixed::<8>(data, span, twiddles, |a| bfly8(a, dir))
        }
        Radix::R16 => pass_fixed::<16>(data, span, twiddles, |a| bfly_generic(a, twiddles)),
    }
}

#[inline(always)]
fn pass_fixed<const R: usize>(
    data: &mut [C],
    span: usize,
    twiddles: &TwiddleTable,
    butterfly: impl Fn(&mut [C; R]),
) {
    let n = data.len();
    let block = span * R;
    let stride = n / block;
    let tw = twiddles.factors();
    let mut a = [C::new(0.0, 0.0); R];
    for base in (0..n).step_by(block) {
        let chunk = &mut data[base..base + block];
        for j in 0..span {
            a[0] = chunk[j];
            for q in 1..R {
                let x = chunk[j + q * span];
                a[q] = if j == 0 { x } else { cmul(x, tw[j * q * stride]) };
            }
            butterfly(&mut a);
            for (t, &y) in a.iter().enumerate() {
                chunk[j + t * span] = y;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f32, im: f32) -> C {
        C::new(re, im)
    }

    #[test]
    fn single_radix2_butterfly() {
        let tw = TwiddleTable::new(2, Direction::Forward).unwrap();
        let mut d = vec![c(1.5, -2.0), c(0.25, 3.0)];
        apply_radix_stage(&mut d, Radix::R2, 0, &tw).unwrap();
        assert_eq!(d, vec![c(1.75, 1.0), c(1.25, -5.0)]);
    }

    #[test]
    fn overrun_rejected() {
        let tw = TwiddleTable::new(16, Direction::Forward).unwrap();
        let mut d = vec![c(0.0, 0.0); 16];
        let err = apply_radix_stage(&mut d, Radix::R8, 2, &tw).unwrap_err();
        assert!(err.to_string().starts_with("plan exceeds transform size"));
        assert!(apply_radix_stage(&mut d, Radix::R8, 1, &tw).is_ok());
    }

    #[test]
    fn twiddle_size_must_match() {
        let tw = TwiddleTable::new(8, Direction::Forward).unwrap();
        let mut d = vec![c(0.0, 0.0); 16];
        assert!(matches!(
            apply_radix_stage(&mut d, Radix::R2, 0, &tw),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn hand_butterflies_match_generic() {
        for dir in [Direction::Forward, Direction::Inverse] {
            let tw = TwiddleTable::new(8, dir).unwrap();
            let input: Vec<C> = (0..8).map(|k| c(k as f32 * 0.5 - 1.0, (k * k) as f32 * 0.1)).collect();
            let mut fixed: [C; 8] = input.clone().try_into().unwrap();
            bfly8(&mut fixed, dir);
            let mut generic = input.clone();
            bfly_generic(&mut generic, &tw);
            for (a, b) in fixed.iter().zip(&generic) {
                assert!((a - b).norm() < 1e-5, "{a} vs {b}");
            }

            let tw4 = TwiddleTable::new(4, dir).unwrap();
            let mut fixed4: [C; 4] = input[..4].try_into().unwrap();
            bfly4(&mut fixed4, dir);
            let mut generic4 = input[..4].to_vec();
            bfly_generic(&mut generic4, &tw4);
            for (a, b) in fixed4.iter().zip(&generic4) {
                assert!((a - b).norm() < 1e-6);
            }
        }
    }
}
