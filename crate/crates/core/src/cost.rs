//! Center sets and the binary k-means objective.

use std::fmt;

use rayon::prelude::*;

use crate::bitrow::BitRow;
use crate::error::{Error, Result};
use crate::stream::PointStream;

/// An ordered, non-empty list of equal-width centers.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CenterSet {
    centers: Vec<BitRow>,
}

impl CenterSet {
    pub fn new(centers: Vec<BitRow>) -> Result<Self> {
        let width = centers.first().ok_or(Error::EmptyCenterSet)?.width();
        if let Some(bad) = centers.iter().find(|c| c.width() != width) {
            return Err(Error::WidthMismatch {
                expected: width,
                found: bad.width(),
            });
        }
        Ok(CenterSet { centers })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.centers.len()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.centers[0].width()
    }

    #[inline]
    pub fn centers(&self) -> &[BitRow] {
        &self.centers
    }

    pub fn get(&self, j: usize) -> &BitRow {
        &self.centers[j]
    }

    pub fn into_inner(self) -> Vec<BitRow> {
        self.centers
    }

    /// `(index, distance)` of the closest center, lowest index on ties.
    /// Widths are assumed to agree.
    #[inline]
    pub(crate) fn nearest_unchecked(&self, x: &BitRow) -> (usize, u64) {
        let mut best = (0, u64::MAX);
        for (j, c) in self.centers.iter().enumerate() {
            let dist = x.hamming_unchecked(c);
            if dist < best.1 {
                best = (j, dist);
                if dist == 0 {
                    break;
                }
            }
        }
        best
    }

    pub(crate) fn check_width(&self, width: usize) -> Result<()> {
        if self.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: self.width(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for CenterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.centers.iter().map(|c| c.to_string()))
            .finish()
    }
}

pub fn nearest_center(x: &BitRow, centers: &CenterSet) -> Result<(usize, u64)> {
    centers.check_width(x.width())?;
    Ok(centers.nearest_unchecked(x))
}

/// `Φ(C, X)`: total Hamming distance from each stream point to its nearest
/// center. Consumes exactly one pass.
pub fn cost_phi(centers: &CenterSet, stream: &mut PointStream) -> Result<u64> {
    centers.check_width(stream.width())?;
    let mut total = 0u64;
    let n = stream.pass(|x| {
        total += centers.nearest_unchecked(x).1;
        Ok(())
    })?;
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(total)
}

const MULTI_COST_CHUNK: usize = 512;
const MULTI_COST_PAR_THRESHOLD: usize = 64;

/// Evaluates `Φ` for every candidate in a single pass.
///
/// Points are buffered in small chunks and each chunk is scored against all
/// candidates (in parallel when there are many), so the stream still sees one
/// sequential traversal.
pub fn multi_cost(candidates: &[CenterSet], stream: &mut PointStream) -> Result<Vec<u64>> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput);
    }
    for c in candidates {
        c.check_width(stream.width())?;
    }
    let mut totals = vec![0u64; candidates.len()];
    let mut chunk: Vec<BitRow> = Vec::with_capacity(MULTI_COST_CHUNK);

    let flush = |chunk: &mut Vec<BitRow>, totals: &mut [u64]| {
        let score = |c: &CenterSet| chunk.iter().map(|x| c.nearest_unchecked(x).1).sum::<u64>();
        if candidates.len() >= MULTI_COST_PAR_THRESHOLD {
            totals
                .par_iter_mut()
                .zip(candidates.par_iter())
                .for_each(|(t, c)| *t += score(c));
        } else {
            for (t, c) in totals.iter_mut().zip(candidates) {
                *t += score(c);
            }
        }
        chunk.clear();
    };

    let n = stream.pass(|x| {
        chunk.push(x.clone());
        if chunk.len() == MULTI_COST_CHUNK {
            flush(&mut chunk, &mut totals);
        }
        Ok(())
    })?;
    flush(&mut chunk, &mut totals);
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(totals)
}

/// Per-coordinate majority vote; exact ties give 0. Minimizes `Φ({c}, points)`.
pub fn majority_center(points: &[BitRow]) -> Result<BitRow> {
    let width = points.first().ok_or(Error::EmptyInput)?.width();
    let mut ones = vec![0usize; width];
    for p in points {
        if p.width() != width {
            return Err(Error::WidthMismatch {
                expected: width,
                found: p.width(),
            });
        }
        for (i, count) in ones.iter_mut().enumerate() {
            *count += p.get(i) as usize;
        }
    }
    Ok(BitRow::from_bits(ones.into_iter().map(|c| 2 * c > points.len())))
}

/// `Σ_x min_c H(x, c)` over an in-memory slice.
pub fn cost_of_rows(centers: &CenterSet, rows: &[BitRow]) -> Result<u64> {
    let mut total = 0;
    for x in rows {
        total += nearest_center(x, centers)?.1;
    }
    Ok(total)
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

    fn stream(v: &[&str]) -> PointStream {
        PointStream::from_rows(v.iter().map(|s| r(s)).collect()).unwrap()
    }

    #[test]
    fn nearest_center_examples() {
        assert_eq!(nearest_center(&r("00"), &cs(&["00", "11"])).unwrap(), (0, 0));
        assert_eq!(nearest_center(&r("01"), &cs(&["00", "11"])).unwrap(), (0, 1));
        assert_eq!(nearest_center(&r("110"), &cs(&["000", "111"])).unwrap(), (1, 1));
    }

    #[test]
    fn empty_center_set_rejected() {
        assert!(matches!(CenterSet::new(vec![]), Err(Error::EmptyCenterSet)));
    }

    #[test]
    fn cost_phi_examples() {
        let mut s = stream(&["0000"; 5]);
        assert_eq!(cost_phi(&cs(&["0000"]), &mut s).unwrap(), 0);
        let mut s = stream(&["00", "11", "01"]);
        assert_eq!(cost_phi(&cs(&["00", "11"]), &mut s).unwrap(), 1);
        let mut s = stream(&["111"; 3]);
        assert_eq!(cost_phi(&cs(&["000"]), &mut s).unwrap(), 9);
        assert_eq!(s.pass_count(), 1);
    }

    #[test]
    fn cost_phi_width_mismatch() {
        let mut s = stream(&["000"]);
        assert!(matches!(
            cost_phi(&cs(&["00"]), &mut s),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn multi_cost_examples() {
        let mut s = stream(&["00", "00"]);
        let out = multi_cost(&[cs(&["00"]), cs(&["11"])], &mut s).unwrap();
        assert_eq!(out, vec![0, 4]);
        assert_eq!(s.pass_count(), 1);
        assert!(matches!(multi_cost(&[], &mut s), Err(Error::EmptyInput)));
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_center(&[r("110"), r("100"), r("101")]).unwrap(), r("100"));
        assert_eq!(majority_center(&[r("01"), r("10")]).unwrap(), r("00"));
        assert!(matches!(majority_center(&[]), Err(Error::EmptyInput)));
    }
}
