use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::butterfly::radix_pass;
use crate::error::{Error, Result};
use crate::radix::RadixPlan;
use crate::signal::{ComplexSample as C, Direction, Signal};
use crate::twiddle::TwiddleTable;

/// A radix plan bound to a transform size and direction, with its
/// digit-reversal permutation and twiddle table precomputed.
///
/// Immutable once built; share it behind an `Arc` to run many transforms
/// concurrently.
#[derive(Debug)]
pub struct CompiledPlan {
    plan: RadixPlan,
    twiddles: Arc<TwiddleTable>,
    /// `data[p] = input[permutation[p]]` before the first stage.
    permutation: Vec<u32>,
}

impl CompiledPlan {
    pub fn new(len: usize, plan: RadixPlan, direction: Direction) -> Result<Self> {
        let twiddles = Arc::new(TwiddleTable::new(len.max(1), direction)?);
        Self::with_twiddles(plan, twiddles)
    }

    /// Reuses an existing twiddle table; its size fixes the transform length.
    pub fn with_twiddles(plan: RadixPlan, twiddles: Arc<TwiddleTable>) -> Result<Self> {
        let len = twiddles.size();
        plan.validate_for(len)?;
        let permutation = digit_reversal(len, &plan);
        Ok(Self {
            plan,
            twiddles,
            permutation,
        })
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn plan(&self) -> &RadixPlan {
        &self.plan
    }

    pub fn direction(&self) -> Direction {
        self.twiddles.direction()
    }

    pub fn twiddles(&self) -> &Arc<TwiddleTable> {
        &self.twiddles
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    /// Transforms `input` into `output` (natural order in, natural order out).
    pub fn process(&self, input: &[C], output: &mut [C]) -> Result<()> {
        let n = self.len();
        for len in [input.len(), output.len()] {
            if len != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        for (out, &src) in output.iter_mut().zip(&self.permutation) {
            *out = input[src as usize];
        }
        self.run_stages(output);
        Ok(())
    }

    /// In-place variant; `scratch` must hold `len()` samples.
    pub fn process_in_place(&self, buffer: &mut [C], scratch: &mut [C]) -> Result<()> {
        if scratch.len() != buffer.len() {
            return Err(Error::LengthMismatch {
                expected: buffer.len(),
                actual: scratch.len(),
            });
        }
        scratch.copy_from_slice(buffer);
        self.process(scratch, buffer)
    }

    pub fn process_vec(&self, input: &[C]) -> Result<Vec<C>> {
        let mut out = vec![C::new(0.0, 0.0); self.len()];
        self.process(input, &mut out)?;
        Ok(out)
    }

    fn run_stages(&self, data: &mut [C]) {
        for (start, radix) in self.plan.stage_starts() {
            radix_pass(data, radix, 1usize << start, &self.twiddles);
        }
        if self.direction() == Direction::Inverse {
            let scale = 1.0 / data.len() as f32;
            for x in data.iter_mut() {
                *x *= scale;
            }
        }
    }
}

/// Mixed-radix digit reversal for a DIT schedule.
///
/// The last radix splits the input by `n mod r_last` into contiguous
/// blocks of `N / r_last`, recursively, so the first radix ends up with
/// unit stride.
fn digit_reversal(len: usize, plan: &RadixPlan) -> Vec<u32> {
    let mut perm = vec![0u32; len];
    for n in 0..len {
        let mut rem = n;
        let mut size = len;
        let mut pos = 0;
        for r in plan.radixes().iter().rev() {
            let r = r.value();
            size /= r;
            pos += (rem % r) * size;
            rem /= r;
        }
        perm[pos] = n as u32;
    }
    perm
}

type CacheKey = (usize, RadixPlan, Direction);

/// Memoizes compiled plans per (length, plan, direction).
#[derive(Debug, Default)]
pub struct PlanCache {
    plans: Mutex<HashMap<CacheKey, Arc<CompiledPlan>>>,
}

impl PlanCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache used by [`run_plan`].
    pub fn global() -> &'static PlanCache {
        static GLOBAL: OnceLock<PlanCache> = OnceLock::new();
        GLOBAL.get_or_init(PlanCache::new)
    }

    pub fn get(&self, len: usize, plan: &RadixPlan, direction: Direction) -> Result<Arc<CompiledPlan>> {
        let key = (len, plan.clone(), direction);
        if let Some(hit) = self.plans.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        let compiled = Arc::new(CompiledPlan::new(len, plan.clone(), direction)?);
        let mut plans = self.plans.lock().unwrap();
        Ok(Arc::clone(plans.entry(key).or_insert(compiled)))
    }

    pub fn len(&self) -> usize {
        self.plans.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Runs `plan` over `input`. Output is in natural order; the inverse
/// transform is scaled by `1/N`.
pub fn run_plan(input: &Signal, plan: &RadixPlan, direction: Direction) -> Result<Signal> {
    let compiled = PlanCache::global().get(input.len(), plan, direction)?;
    let out = compiled.process_vec(input)?;
    Ok(Signal::new(out).expect("transform of a finite signal stays finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::dft_oracle;
    use crate::signal::relative_l2_error;

    #[test]
    fn digit_reversal_radix2_is_bit_reversal() {
        let plan = RadixPlan::radix2(3).unwrap();
        assert_eq!(digit_reversal(8, &plan), vec![0, 4, 2, 6, 1, 5, 3, 7]);
    }

    #[test]
    fn digit_reversal_single_radix_is_identity() {
        let plan: RadixPlan = "8".parse().unwrap();
        assert_eq!(digit_reversal(8, &plan), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn digit_reversal_mixed() {
        // [2, 4] on 8 points: last radix 4 splits by n mod 4 into blocks of 2.
        let plan: RadixPlan = "2,4".parse().unwrap();
        assert_eq!(digit_reversal(8, &plan), vec![0, 4, 1, 5, 2, 6, 3, 7]);
        let plan: RadixPlan = "4,2".parse().unwrap();
        assert_eq!(digit_reversal(8, &plan), vec![0, 2, 4, 6, 1, 3, 5, 7]);
    }

    #[test]
    fn digit_reversal_is_a_permutation() {
        let plan: RadixPlan = "4,8,8,4".parse().unwrap();
        let mut p = digit_reversal(1024, &plan);
        p.sort_unstable();
        assert!(p.iter().enumerate().all(|(i, &v)| i as u32 == v));
    }

    #[test]
    fn mismatched_plan_rejected() {
        let x = Signal::random(1024, 1).unwrap();
        let plan: RadixPlan = "8,8".parse().unwrap();
        let err = run_plan(&x, &plan, Direction::Forward).unwrap_err();
        assert!(err.to_string().starts_with("radix logs do not sum to log2 N"));
    }

    #[test]
    fn radix16_stage_matches_oracle() {
        let x = Signal::random(256, 3).unwrap();
        let plan: RadixPlan = "16,16".parse().unwrap();
        let y = run_plan(&x, &plan, Direction::Forward).unwrap();
        let r = dft_oracle(&x, Direction::Forward).unwrap();
        assert!(relative_l2_error(&y, &r) < 1e-4);
    }

    #[test]
    fn cache_reuses_entries() {
        let cache = PlanCache::new();
        let plan: RadixPlan = "4,4".parse().unwrap();
        let a = cache.get(16, &plan, Direction::Forward).unwrap();
        let b = cache.get(16, &plan, Direction::Forward).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        cache.get(16, &plan, Direction::Inverse).unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn in_place_matches_out_of_place() {
        let x = Signal::random(64, 9).unwrap();
        let plan: RadixPlan = "2,8,4".parse().unwrap();
        let c = CompiledPlan::new(64, plan, Direction::Forward).unwrap();
        let expected = c.process_vec(&x).unwrap();
        let mut buf = x.to_vec();
        let mut scratch = vec![C::new(0.0, 0.0); 64];
        c.process_in_place(&mut buf, &mut scratch).unwrap();
        assert_eq!(buf, expected);
    }
}
