//! Per-coordinate constrained center selection from weighted samples.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};
use crate::relations::RelationSet;

/// Column counts of one sample multiset `S_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleProfile {
    pub size: u64,
    pub ones: Vec<u32>,
}

impl SampleProfile {
    pub fn new<'a, I>(width: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a BitRow>,
    {
        let mut ones = vec![0u32; width];
        let mut size = 0;
        for row in rows {
            size += 1;
            for (w, word) in row.words().iter().enumerate() {
                let mut bits = *word;
                while bits != 0 {
                    let b = bits.trailing_zeros() as usize;
                    ones[w * 64 + b] += 1;
                    bits &= bits - 1;
                }
            }
        }
        SampleProfile { size, ones }
    }

    #[inline]
    fn zeros(&self, i: usize) -> u64 {
        self.size - self.ones[i] as u64
    }
}

/// Integer weights usable in the selection objective.
pub(crate) trait ScaledWeight: Clone + Ord {
    fn zero() -> Self;
    fn times(&self, count: u64) -> Self;
    fn add(&mut self, other: &Self);
}

impl ScaledWeight for u128 {
    #[inline]
    fn zero() -> Self {
        0
    }
    #[inline]
    fn times(&self, count: u64) -> Self {
        self * count as u128
    }
    #[inline]
    fn add(&mut self, other: &Self) {
        *self += other
    }
}

impl ScaledWeight for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn times(&self, count: u64) -> Self {
        self * count
    }
    fn add(&mut self, other: &Self) {
        *self += other
    }
}

/// Core of the selection: for every coordinate, the tuple in `R_i` minimizing
///
/// `f_i(b) = Σ_{j: b_j=1} w_j·|S_j^{(i,0)}| + Σ_{j: b_j=0} w_j·|S_j^{(i,1)}|`,
///
/// smallest tuple on ties. Callers guarantee shapes agree and `Σ w_j·|S_j|`
/// does not overflow `W`.
pub(crate) fn select_tuples<W: ScaledWeight>(
    relations: &RelationSet,
    profiles: &[&SampleProfile],
    weights: &[W],
) -> Vec<u64> {
    let k = relations.k();
    let mut if_one: Vec<W> = vec![W::zero(); k];
    let mut if_zero: Vec<W> = vec![W::zero(); k];
    let mut out = Vec::with_capacity(relations.d());
    for i in 0..relations.d() {
        for j in 0..k {
            if_one[j] = weights[j].times(profiles[j].zeros(i));
            if_zero[j] = weights[j].times(profiles[j].ones[i] as u64);
        }
        let mut best: Option<(W, u64)> = None;
        for entry in relations.entries(i) {
            let mut f = W::zero();
            for j in 0..k {
                f.add(if entry.bit(j) { &if_one[j] } else { &if_zero[j] });
            }
            if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
                best = Some((f, entry.tuple));
            }
        }
        out.push(best.expect("relation lists are non-empty").1);
    }
    out
}

pub(crate) fn centers_from_tuples(tuples: &[u64], k: usize) -> CenterSet {
    let d = tuples.len();
    let mut centers = vec![BitRow::zeros(d); k];
    for (i, &t) in tuples.iter().enumerate() {
        for (j, c) in centers.iter_mut().enumerate() {
            if (t >> j) & 1 == 1 {
                c.set(i, true);
            }
        }
    }
    CenterSet::new(centers).expect("k >= 1 and equal widths")
}

/// Chooses constrained centers from samples `S_1..S_k` and size guesses
/// `w_1..w_k`. Always satisfies `relations`.
pub fn best_centers(relations: &RelationSet, samples: &[Vec<BitRow>], weights: &[Ratio<BigUint>]) -> Result<CenterSet> {
    let k = relations.k();
    let d = relations.d();
    if samples.len() != k || weights.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "expected {k} samples and weights, got {} and {}",
            samples.len(),
            weights.len()
        )));
    }
    for (j, s) in samples.iter().enumerate() {
        if s.is_empty() {
            return Err(Error::EmptySample { index: j + 1 });
        }
        if let Some(bad) = s.iter().find(|x| x.width() != d) {
            return Err(Error::WidthMismatch {
                expected: d,
                found: bad.width(),
            });
        }
    }
    if let Some(w) = weights.iter().find(|w| w.is_zero()) {
        return Err(Error::InvalidParameter(format!("weights must be positive, got {w}")));
    }

    let profiles: Vec<SampleProfile> = samples.iter().map(|s| SampleProfile::new(d, s)).collect();
    let refs: Vec<&SampleProfile> = profiles.iter().collect();

    // Clear denominators so f_i is an exact integer.
    let lcm = weights.iter().fold(BigUint::one(), |acc, w| acc.lcm(w.denom()));
    let scaled: Vec<BigUint> = weights.iter().map(|w| w.numer() * (&lcm / w.denom())).collect();
    let headroom: u128 = profiles.iter().map(|p| p.size as u128).sum::<u128>().max(1);
    let fast: Option<Vec<u128>> = scaled
        .iter()
        .map(|w| w.to_u128().filter(|&v| v <= u128::MAX / headroom))
        .collect();
    let tuples = match fast {
        Some(ws) => select_tuples(relations, &refs, &ws),
        None => select_tuples(relations, &refs, &scaled),
    };
    Ok(centers_from_tuples(&tuples, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::RelationEntry;

    fn r(s: &str) -> BitRow {
        s.parse().unwrap()
    }

    fn rows(v: &[&str]) -> Vec<BitRow> {
        v.iter().map(|s| r(s)).collect()
    }

    fn w(n: u64) -> Ratio<BigUint> {
        Ratio::from_integer(BigUint::from(n))
    }

    #[test]
    fn single_center_majority() {
        let rel = RelationSet::unconstrained(1, 2).unwrap();
        let c = best_centers(&rel, &[rows(&["00", "00", "10"])], &[w(3)]).unwrap();
        assert_eq!(c.centers(), &[r("00")]);
    }

    #[test]
    fn forced_relation_wins() {
        let rel = RelationSet::uniform(1, 3, vec![RelationEntry::new(1)]).unwrap();
        let c = best_centers(&rel, &[rows(&["000", "000"])], &[w(1)]).unwrap();
        assert_eq!(c.centers(), &[r("111")]);
    }

    #[test]
    fn two_centers_unconstrained() {
        let rel = RelationSet::unconstrained(2, 2).unwrap();
        let c = best_centers(
            &rel,
            &[rows(&["01", "01", "11"]), rows(&["00", "10", "10"])],
            &[w(3), w(3)],
        )
        .unwrap();
        assert_eq!(c.centers(), &[r("01"), r("10")]);
    }

    #[test]
    fn ties_pick_smallest_tuple() {
        // One 0 and one 1: both bits cost the same, tuple 0 wins.
        let rel = RelationSet::unconstrained(1, 1).unwrap();
        let c = best_centers(&rel, &[rows(&["0", "1"])], &[w(1)]).unwrap();
        assert_eq!(c.centers(), &[r("0")]);
    }

    #[test]
    fn fractional_weights_are_exact() {
        // S_1 = {1}, S_2 = {0, 0} at a single coordinate, relation {(0,0), (1,1)}.
        // f(00) = w1·1, f(11) = w2·2. With w1 = 5/2 and w2 = 5/4 they tie
        // exactly and the smaller tuple (00) must win.
        let rel = RelationSet::uniform(2, 1, vec![RelationEntry::new(0), RelationEntry::new(3)]).unwrap();
        let weights = [
            Ratio::new(BigUint::from(5u32), BigUint::from(2u32)),
            Ratio::new(BigUint::from(5u32), BigUint::from(4u32)),
        ];
        let c = best_centers(&rel, &[rows(&["1"]), rows(&["0", "0"])], &weights).unwrap();
        assert_eq!(c.centers(), &[r("0"), r("0")]);
    }

    #[test]
    fn big_weights_use_exact_fallback() {
        let rel = RelationSet::unconstrained(2, 1).unwrap();
        let huge = Ratio::from_integer(BigUint::from(3u32).pow(200));
        let c = best_centers(&rel, &[rows(&["1"]), rows(&["0"])], &[huge.clone(), huge]).unwrap();
        assert_eq!(c.centers(), &[r("1"), r("0")]);
    }

    #[test]
    fn errors() {
        let rel = RelationSet::unconstrained(2, 2).unwrap();
        assert!(matches!(
            best_centers(&rel, &[rows(&["01"]), vec![]], &[w(1), w(1)]),
            Err(Error::EmptySample { index: 2 })
        ));
        assert!(matches!(
            best_centers(&rel, &[rows(&["01"])], &[w(1)]),
            Err(Error::ShapeMismatch(_))
        ));
    }
}
