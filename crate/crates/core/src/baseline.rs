//! One-pass constant-factor baseline for unconstrained binary k-means.
//!
//! The stream is summarized by online facility location with a doubling
//! threshold: every facility is a genuine stream point carrying the number of
//! points assigned to it. The weighted summary is then reclustered offline
//! into `k` centers drawn from the summary itself, so the centers are binary
//! data points and no snapping pass is needed.

use rand::Rng;

use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};
use crate::sampling::SeededRng;
use crate::stream::PointStream;

pub const DEFAULT_CORESET_CONSTANT: f64 = 8.0;
pub const DEFAULT_INITIAL_THRESHOLD: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedPoint {
    pub point: BitRow,
    pub weight: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoresetConfig {
    /// `c_f` in the facility cap `⌊c_f · k · (1 + log₂ t)⌋`.
    pub coreset_constant: f64,
    pub initial_threshold: u64,
}

impl Default for CoresetConfig {
    fn default() -> Self {
        CoresetConfig {
            coreset_constant: DEFAULT_CORESET_CONSTANT,
            initial_threshold: DEFAULT_INITIAL_THRESHOLD,
        }
    }
}

impl CoresetConfig {
    fn validate(&self) -> Result<()> {
        if !(self.coreset_constant.is_finite() && self.coreset_constant > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "coreset constant must be positive, got {}",
                self.coreset_constant
            )));
        }
        if self.initial_threshold == 0 {
            return Err(Error::InvalidParameter("initial threshold must be positive".into()));
        }
        Ok(())
    }

    /// Facility budget after `seen` stream items.
    pub fn cap(&self, k: usize, seen: u64) -> usize {
        let t = seen.max(1) as f64;
        let cap = (self.coreset_constant * k as f64 * (1.0 + t.log2())).floor();
        (cap as usize).max(1)
    }
}

/// Output of [`stream_coreset`].
#[derive(Debug, Clone)]
pub struct Coreset {
    pub points: Vec<WeightedPoint>,
    /// Largest number of stream points held at any moment.
    pub peak_stored: usize,
    pub final_threshold: u64,
    pub phases: u32,
}

struct FacilityState<'a> {
    facilities: Vec<WeightedPoint>,
    threshold: u64,
    phases: u32,
    peak: usize,
    rng: &'a mut SeededRng,
}

impl FacilityState<'_> {
    fn nearest(facilities: &[WeightedPoint], x: &BitRow) -> Option<(usize, u64)> {
        facilities
            .iter()
            .enumerate()
            .map(|(j, f)| (j, x.hamming_unchecked(&f.point)))
            .min_by_key(|&(j, d)| (d, j))
    }

    /// Opening probability `min(1, weight·dist / L)`, drawn exactly.
    fn opens(rng: &mut SeededRng, threshold: u64, weight: u64, dist: u64) -> bool {
        let mass = (weight as u128) * (dist as u128);
        mass >= threshold as u128 || (rng.random_range(0..threshold) as u128) < mass
    }

    /// Doubles the threshold and reassigns facilities onto each other by the
    /// same opening rule.
    fn double_and_recluster(&mut self) {
        self.threshold = self.threshold.saturating_mul(2);
        self.phases += 1;
        let old = std::mem::take(&mut self.facilities);
        for fac in old {
            match Self::nearest(&self.facilities, &fac.point) {
                Some((j, dist)) if !Self::opens(self.rng, self.threshold, fac.weight, dist) => {
                    self.facilities[j].weight += fac.weight;
                }
                _ => self.facilities.push(fac),
            }
        }
    }

    fn insert(&mut self, x: &BitRow, cap: usize) {
        loop {
            match Self::nearest(&self.facilities, x) {
                None => {
                    self.facilities.push(WeightedPoint {
                        point: x.clone(),
                        weight: 1,
                    });
                    break;
                }
                Some((j, dist)) => {
                    if !Self::opens(self.rng, self.threshold, 1, dist) {
                        self.facilities[j].weight += 1;
                        break;
                    }
                    if self.facilities.len() < cap {
                        self.facilities.push(WeightedPoint {
                            point: x.clone(),
                            weight: 1,
                        });
                        break;
                    }
                    // Full: coarsen until the decision fits in the budget.
                    self.double_and_recluster();
                }
            }
        }
        self.peak = self.peak.max(self.facilities.len());
    }
}

/// Summarizes the stream into at most `⌊c_f·k·(1+log₂ n)⌋` weighted stream
/// points whose weights sum to `n`. Consumes one pass.
pub fn stream_coreset(
    stream: &mut PointStream,
    k: usize,
    config: CoresetConfig,
    rng: &mut SeededRng,
) -> Result<Coreset> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    config.validate()?;
    let mut state = FacilityState {
        facilities: Vec::new(),
        threshold: config.initial_threshold,
        phases: 0,
        peak: 0,
        rng,
    };
    let mut seen = 0u64;
    stream.pass(|x| {
        seen += 1;
        let cap = config.cap(k, seen);
        state.insert(x, cap);
        Ok(())
    })?;
    if seen == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(Coreset {
        points: state.facilities,
        peak_stored: state.peak,
        final_threshold: state.threshold,
        phases: state.phases,
    })
}

fn weighted_cost(coreset: &[WeightedPoint], centers: &[&BitRow]) -> u64 {
    coreset
        .iter()
        .map(|wp| {
            let d = centers.iter().map(|c| wp.point.hamming_unchecked(c)).min().unwrap_or(0);
            d * wp.weight
        })
        .sum()
}

/// Discrete weighted k-means over the coreset: weighted D² seeding, then
/// single-swap local search (at most `100·k` sweeps) with centers restricted
/// to coreset points.
pub fn weighted_kmeans_binary(coreset: &[WeightedPoint], k: usize, rng: &mut SeededRng) -> Result<CenterSet> {
    if coreset.is_empty() {
        return Err(Error::EmptyInput);
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let width = coreset[0].point.width();
    if let Some(bad) = coreset.iter().find(|w| w.point.width() != width) {
        return Err(Error::WidthMismatch {
            expected: width,
            found: bad.point.width(),
        });
    }

    // Seeding: first center by weight, later ones by weight · distance.
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut dist: Vec<u64> = vec![u64::MAX; coreset.len()];
    for _ in 0..k {
        let scores: Vec<u128> = coreset
            .iter()
            .zip(&dist)
            .map(|(wp, &d)| {
                if chosen.is_empty() {
                    wp.weight as u128
                } else {
                    wp.weight as u128 * d as u128
                }
            })
            .collect();
        let total: u128 = scores.iter().sum();
        let pick = if total == 0 {
            // Every point is already a center; duplicate the first one.
            chosen[0]
        } else {
            let mut target = rng.random_range(0..total);
            let mut pick = scores.len() - 1;
            for (i, &s) in scores.iter().enumerate() {
                if target < s {
                    pick = i;
                    break;
                }
                target -= s;
            }
            pick
        };
        chosen.push(pick);
        for (d, wp) in dist.iter_mut().zip(coreset) {
            *d = (*d).min(wp.point.hamming_unchecked(&coreset[pick].point));
        }
    }

    let centers_of = |idx: &[usize]| -> Vec<&BitRow> { idx.iter().map(|&i| &coreset[i].point).collect() };
    let mut best = weighted_cost(coreset, &centers_of(&chosen));
    for _ in 0..100 * k {
        if best == 0 {
            break;
        }
        let mut improved = false;
        for slot in 0..k {
            for cand in 0..coreset.len() {
                if chosen[slot] == cand {
                    continue;
                }
                let previous = chosen[slot];
                chosen[slot] = cand;
                let cost = weighted_cost(coreset, &centers_of(&chosen));
                if cost < best {
                    best = cost;
                    improved = true;
                } else {
                    chosen[slot] = previous;
                }
            }
        }
        if !improved {
            break;
        }
    }
    CenterSet::new(chosen.into_iter().map(|i| coreset[i].point.clone()).collect())
}

/// Replaces every center by its closest stream point (earliest on ties).
/// Consumes one pass; `Φ` grows by at most a factor of 4.
pub fn snap_to_data(centers: &CenterSet, stream: &mut PointStream) -> Result<CenterSet> {
    centers.check_width(stream.width())?;
    let mut best: Vec<Option<(u64, BitRow)>> = vec![None; centers.k()];
    let n = stream.pass(|x| {
        for (slot, c) in best.iter_mut().zip(centers.centers()) {
            let d = x.hamming_unchecked(c);
            if slot.as_ref().is_none_or(|(bd, _)| d < *bd) {
                *slot = Some((d, x.clone()));
            }
        }
        Ok(())
    })?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    CenterSet::new(best.into_iter().map(|b| b.expect("non-empty stream").1).collect())
}

#[derive(Debug, Clone)]
pub struct BaselineSolution {
    pub centers: CenterSet,
    pub coreset_size: usize,
    pub peak_stored: usize,
}

/// One-pass constant-factor approximation `B` for `(X, k)`.
pub fn baseline_binary_kmeans(
    stream: &mut PointStream,
    k: usize,
    config: CoresetConfig,
    rng: &mut SeededRng,
) -> Result<BaselineSolution> {
    let coreset = stream_coreset(stream, k, config, rng)?;
    let centers = weighted_kmeans_binary(&coreset.points, k, rng)?;
    Ok(BaselineSolution {
        centers,
        coreset_size: coreset.points.len(),
        peak_stored: coreset.peak_stored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::cost_of_rows;

    fn r(s: &str) -> BitRow {
        s.parse().unwrap()
    }

    fn wp(s: &str, w: u64) -> WeightedPoint {
        WeightedPoint { point: r(s), weight: w }
    }

    #[test]
    fn single_distinct_point() {
        let mut s = PointStream::from_rows(vec![r("0110"); 7]).unwrap();
        let mut rng = SeededRng::new(0, 0);
        let cs = stream_coreset(&mut s, 1, CoresetConfig::default(), &mut rng).unwrap();
        assert_eq!(cs.points, vec![wp("0110", 7)]);
        assert_eq!(s.pass_count(), 1);
    }

    #[test]
    fn repeated_distinct_points_keep_their_counts() {
        let mut rows = Vec::new();
        for _ in 0..5 {
            rows.extend([r("0000"), r("1111"), r("1100")]);
        }
        rows.push(r("1111"));
        let mut s = PointStream::from_rows(rows).unwrap();
        let mut rng = SeededRng::new(0, 0);
        let cs = stream_coreset(&mut s, 3, CoresetConfig::default(), &mut rng).unwrap();
        assert_eq!(cs.points, vec![wp("0000", 5), wp("1111", 6), wp("1100", 5)]);
    }

    #[test]
    fn cap_is_floor_of_budget() {
        let cfg = CoresetConfig::default();
        assert_eq!(cfg.cap(1, 1), 8);
        assert_eq!(cfg.cap(3, 200), (24.0 * (1.0 + 200f64.log2())).floor() as usize);
        assert_eq!(
            CoresetConfig {
                coreset_constant: 0.01,
                initial_threshold: 1
            }
            .cap(1, 1),
            1
        );
    }

    #[test]
    fn rejects_bad_config() {
        let mut s = PointStream::from_rows(vec![r("01")]).unwrap();
        let mut rng = SeededRng::new(0, 0);
        let bad = CoresetConfig {
            coreset_constant: 0.0,
            initial_threshold: 1,
        };
        assert!(stream_coreset(&mut s, 1, bad, &mut rng).is_err());
        assert!(stream_coreset(&mut s, 0, CoresetConfig::default(), &mut rng).is_err());
    }

    #[test]
    fn weighted_kmeans_examples() {
        let mut rng = SeededRng::new(5, 0);
        let c = weighted_kmeans_binary(&[wp("0101", 5)], 2, &mut rng).unwrap();
        assert_eq!(c.centers(), &[r("0101"), r("0101")]);

        let c = weighted_kmeans_binary(&[wp("0000", 3), wp("1111", 3)], 2, &mut rng).unwrap();
        let mut got = c.into_inner();
        got.sort();
        assert_eq!(got, vec![r("0000"), r("1111")]);

        assert!(matches!(
            weighted_kmeans_binary(&[], 1, &mut rng),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn snap_examples() {
        let mut s = PointStream::from_rows(vec![r("0000"), r("1111")]).unwrap();
        let c = CenterSet::new(vec![r("0011")]).unwrap();
        assert_eq!(snap_to_data(&c, &mut s).unwrap().centers(), &[r("0000")]);

        let rows = vec![r("0101"), r("1110"), r("0001")];
        let mut s = PointStream::from_rows(rows.clone()).unwrap();
        let c = CenterSet::new(vec![r("1110"), r("0001")]).unwrap();
        assert_eq!(snap_to_data(&c, &mut s).unwrap(), c);
    }

    #[test]
    fn baseline_two_clusters() {
        let mut rows = vec![r("0000"); 10];
        rows.extend(vec![r("1111"); 10]);
        let mut s = PointStream::from_rows(rows.clone()).unwrap();
        let mut rng = SeededRng::new(9, 0);
        let b = baseline_binary_kmeans(&mut s, 2, CoresetConfig::default(), &mut rng).unwrap();
        assert_eq!(s.pass_count(), 1);
        assert_eq!(cost_of_rows(&b.centers, &rows).unwrap(), 0);
    }
}
