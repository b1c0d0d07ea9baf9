//! One-pass D²-sampling with banks of independent weighted reservoirs.

use std::sync::Arc;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};
use crate::stream::PointStream;

/// Deterministic random source addressed by `(seed, substream)`.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    substream: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64, substream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(substream);
        SeededRng { seed, substream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn substream(&self) -> u64 {
        self.substream
    }

    /// A fresh generator on another substream of the same seed.
    pub fn fork(&self, substream: u64) -> SeededRng {
        SeededRng::new(self.seed, substream)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `min_b H(x, b)`.
pub fn d2_weight(x: &BitRow, centers: &CenterSet) -> Result<u64> {
    Ok(crate::cost::nearest_center(x, centers)?.1)
}

/// `m` independent single-item reservoirs updated together.
///
/// Weighted slots implement the rule "replace with probability
/// `y_i / Σ_{j≤i} y_j`"; the acceptance test compares `u·W < y·2^64` for a
/// uniform 64-bit `u`, in 128-bit integers. Fallback slots run the same
/// rule with unit weights, giving uniform draws when every weight is zero.
#[derive(Debug, Clone)]
pub struct ReservoirBank {
    slots: Vec<Option<Arc<BitRow>>>,
    fallback: Vec<Option<Arc<BitRow>>>,
    total_weight: u128,
    seen: u64,
}

impl ReservoirBank {
    pub fn new(m: usize) -> Self {
        ReservoirBank {
            slots: vec![None; m],
            fallback: vec![None; m],
            total_weight: 0,
            seen: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn total_weight(&self) -> u128 {
        self.total_weight
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn offer<R: RngCore>(&mut self, x: &BitRow, weight: u64, rng: &mut R) {
        self.seen += 1;
        let mut shared: Option<Arc<BitRow>> = None;
        let share = |shared: &mut Option<Arc<BitRow>>| shared.get_or_insert_with(|| Arc::new(x.clone())).clone();

        for slot in self.fallback.iter_mut() {
            if rng.random_range(0..self.seen) == 0 {
                *slot = Some(share(&mut shared));
            }
        }

        if weight == 0 {
            return;
        }
        self.total_weight += weight as u128;
        let threshold = (weight as u128) << 64;
        for slot in self.slots.iter_mut() {
            let u = rng.next_u64() as u128;
            if u * self.total_weight < threshold {
                *slot = Some(share(&mut shared));
            }
        }
    }

    /// The sampled rows: weighted slots if any weight was seen, otherwise
    /// the uniform fallback. `None` if nothing was offered.
    pub fn finish(self) -> Option<Vec<BitRow>> {
        let slots = if self.total_weight > 0 {
            self.slots
        } else {
            self.fallback
        };
        slots
            .into_iter()
            .map(|s| s.map(|a| Arc::try_unwrap(a).unwrap_or_else(|a| (*a).clone())))
            .collect()
    }
}

/// Draws `m` independent D² samples with respect to `centers` in one pass.
///
/// Each returned row is distributed as `d2_weight(x) / Σ_y d2_weight(y)`.
/// When the total weight is zero the draws are uniform over the stream.
pub fn d2_reservoir_sample(
    stream: &mut PointStream,
    centers: &CenterSet,
    m: usize,
    rng: &mut SeededRng,
) -> Result<Vec<BitRow>> {
    if m == 0 {
        return Err(Error::InvalidParameter("sample count m must be at least 1".into()));
    }
    centers.check_width(stream.width())?;
    let mut bank = ReservoirBank::new(m);
    stream.pass(|x| {
        let w = centers.nearest_unchecked(x).1;
        bank.offer(x, w, rng);
        Ok(())
    })?;
    bank.finish().ok_or(Error::EmptyDataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> BitRow {
        s.parse().unwrap()
    }

    fn cs(v: &[&str]) -> CenterSet {
        CenterSet::new(v.iter().map(|s| r(s)).collect()).unwrap()
    }

    #[test]
    fn d2_weight_examples() {
        assert_eq!(d2_weight(&r("101"), &cs(&["000", "101"])).unwrap(), 0);
        assert_eq!(d2_weight(&r("111"), &cs(&["000"])).unwrap(), 3);
        assert_eq!(d2_weight(&r("110"), &cs(&["000", "111"])).unwrap(), 1);
    }

    #[test]
    fn rng_is_reproducible_per_substream() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut g = SeededRng::new(7, 1);
                move |_| g.next_u64()
            })
            .collect();
        let b: Vec<u64> = (0..4)
            .map({
                let mut g = SeededRng::new(7, 1);
                move |_| g.next_u64()
            })
            .collect();
        let c: Vec<u64> = (0..4)
            .map({
                let mut g = SeededRng::new(7, 2);
                move |_| g.next_u64()
            })
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn single_point_fills_every_slot() {
        let mut s = PointStream::from_rows(vec![r("11111")]).unwrap();
        let mut rng = SeededRng::new(1, 0);
        let out = d2_reservoir_sample(&mut s, &cs(&["00000"]), 3, &mut rng).unwrap();
        assert_eq!(out, vec![r("11111"); 3]);
        assert_eq!(s.pass_count(), 1);
    }

    #[test]
    fn zero_weight_falls_back_to_uniform() {
        let rows = vec![r("00"), r("11"), r("00"), r("11")];
        let mut s = PointStream::from_rows(rows).unwrap();
        let mut rng = SeededRng::new(3, 0);
        let mut seen_ones = 0;
        for _ in 0..200 {
            let out = d2_reservoir_sample(&mut s, &cs(&["00", "11"]), 2, &mut rng).unwrap();
            assert_eq!(out.len(), 2);
            seen_ones += out.iter().filter(|x| **x == r("11")).count();
        }
        // 400 uniform draws over two equally likely values.
        assert!((120..=280).contains(&seen_ones), "{seen_ones}");
    }

    #[test]
    fn zero_slots_rejected() {
        let mut s = PointStream::from_rows(vec![r("1")]).unwrap();
        let mut rng = SeededRng::new(0, 0);
        assert!(d2_reservoir_sample(&mut s, &cs(&["0"]), 0, &mut rng).is_err());
    }

    #[test]
    fn two_point_frequency() {
        // Weights 1 and 3: exact probability of q is 0.75.
        let p = r("1000");
        let q = r("1110");
        let mut s = PointStream::from_rows(vec![p, q.clone()]).unwrap();
        let mut rng = SeededRng::new(11, 0);
        let b = cs(&["0000"]);
        let hits = (0..10_000)
            .filter(|_| d2_reservoir_sample(&mut s, &b, 1, &mut rng).unwrap()[0] == q)
            .count();
        let freq = hits as f64 / 10_000.0;
        assert!((0.73..=0.77).contains(&freq), "{freq}");
    }
}
