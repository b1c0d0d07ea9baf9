//! Enumeration of `k`-tuples of disjoint `τ`-sub-multisets.
//!
//! The pool is compressed to its distinct values with multiplicities, and a
//! `τ`-multiset is encoded as a non-decreasing list of value indices. Tuples
//! are generated in lexicographic order of `(S_1, ..., S_k)` encodings, so
//! tuples that agree value-for-value are produced exactly once.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use rand::seq::index;
use rand::Rng;

use crate::bitrow::BitRow;
use crate::error::{Error, Result};
use crate::sampling::SeededRng;

/// One `τ`-multiset per center, as indices into [`SubsetSpace::values`].
pub type SubsetTuple = Vec<Vec<u32>>;

#[derive(Debug, Clone)]
pub struct SubsetSpace {
    values: Vec<BitRow>,
    caps: Vec<usize>,
    k: usize,
    tau: usize,
}

impl SubsetSpace {
    pub fn new(pool: &[BitRow], k: usize, tau: usize) -> Result<Self> {
        if k == 0 || tau == 0 {
            return Err(Error::InvalidParameter("k and tau must be at least 1".into()));
        }
        let needed = k
            .checked_mul(tau)
            .ok_or_else(|| Error::InvalidParameter("k*tau overflows".into()))?;
        if pool.len() < needed {
            return Err(Error::InsufficientElements {
                needed,
                available: pool.len(),
            });
        }
        let mut sorted: Vec<&BitRow> = pool.iter().collect();
        sorted.sort();
        let mut values: Vec<BitRow> = Vec::new();
        let mut caps: Vec<usize> = Vec::new();
        for v in sorted {
            if values.last() == Some(v) {
                *caps.last_mut().unwrap() += 1;
            } else {
                values.push(v.clone());
                caps.push(1);
            }
        }
        Ok(SubsetSpace { values, caps, k, tau })
    }

    pub fn values(&self) -> &[BitRow] {
        &self.values
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.caps
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Visits tuples in order until `visit` breaks.
    pub fn for_each<F>(&self, mut visit: F)
    where
        F: FnMut(&[Vec<u32>]) -> ControlFlow<()>,
    {
        let mut walker = Walker {
            caps: &self.caps,
            remaining: self.caps.clone(),
            parts: vec![Vec::with_capacity(self.tau); self.k],
            tau: self.tau,
        };
        let _ = walker.position(0, &mut visit);
    }

    /// The first `limit` tuples in order.
    pub fn first(&self, limit: usize) -> Vec<SubsetTuple> {
        let mut out = Vec::new();
        if limit == 0 {
            return out;
        }
        self.for_each(|t| {
            out.push(t.to_vec());
            if out.len() >= limit {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        out
    }

    pub fn count(&self) -> u64 {
        let mut n = 0u64;
        self.for_each(|_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    /// One draw from the uniform distribution over all `k`-tuples of
    /// `τ`-multisets of values, ignoring multiplicities; `None` when the draw
    /// violates them. Conditioned on `Some`, the tuple is uniform over the
    /// feasible tuples.
    pub fn try_random<R: Rng>(&self, rng: &mut R) -> Option<SubsetTuple> {
        let v = self.values.len();
        let mut used = vec![0usize; v];
        let mut tuple = Vec::with_capacity(self.k);
        for _ in 0..self.k {
            // Stars and bars: τ bar positions among v + τ - 1 slots.
            let mut picks = index::sample(rng, v + self.tau - 1, self.tau).into_vec();
            picks.sort_unstable();
            let part: Vec<u32> = picks.iter().enumerate().map(|(i, &p)| (p - i) as u32).collect();
            for &x in &part {
                used[x as usize] += 1;
                if used[x as usize] > self.caps[x as usize] {
                    return None;
                }
            }
            tuple.push(part);
        }
        Some(tuple)
    }

    pub fn materialize(&self, tuple: &[Vec<u32>]) -> Vec<Vec<BitRow>> {
        tuple
            .iter()
            .map(|part| part.iter().map(|&i| self.values[i as usize].clone()).collect())
            .collect()
    }
}

struct Walker<'a> {
    caps: &'a [usize],
    remaining: Vec<usize>,
    parts: Vec<Vec<u32>>,
    tau: usize,
}

impl Walker<'_> {
    fn position<F>(&mut self, pos: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Vec<u32>]) -> ControlFlow<()>,
    {
        if pos == self.parts.len() {
            return visit(&self.parts);
        }
        self.fill(pos, 0, self.tau, visit)
    }

    fn fill<F>(&mut self, pos: usize, from: usize, left: usize, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[Vec<u32>]) -> ControlFlow<()>,
    {
        if left == 0 {
            return self.position(pos + 1, visit);
        }
        for v in from..self.caps.len() {
            if self.remaining[v] == 0 {
                continue;
            }
            self.remaining[v] -= 1;
            self.parts[pos].push(v as u32);
            let flow = self.fill(pos, v, left - 1, visit);
            self.parts[pos].pop();
            self.remaining[v] += 1;
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Which inner (weight-tuple) ranks accompany a subset tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerRanks {
    All,
    Prefix(u64),
    One(u64),
}

impl InnerRanks {
    pub fn iter(self, inner: u64) -> impl Iterator<Item = u64> {
        match self {
            InnerRanks::All => 0..inner,
            InnerRanks::Prefix(p) => 0..p,
            InnerRanks::One(r) => r..r + 1,
        }
    }

    pub fn count(self, inner: u64) -> u64 {
        match self {
            InnerRanks::All => inner,
            InnerRanks::Prefix(p) => p,
            InnerRanks::One(_) => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub entries: Vec<(SubsetTuple, InnerRanks)>,
    pub truncated: bool,
}

impl Selection {
    pub fn combinations(&self, inner: u64) -> u64 {
        self.entries.iter().map(|(_, r)| r.count(inner)).sum()
    }
}

const RANDOM_ATTEMPTS_PER_DRAW: usize = 256;

/// Selects (subset tuple, inner rank) combinations from the product of the
/// subset space with `inner` ranks, ordered subset-major.
///
/// Without a budget, or when the product has at most `budget` elements,
/// everything is selected. Otherwise the first `⌈budget/2⌉` combinations in
/// order are kept, plus up to `⌊budget/2⌋` distinct combinations drawn
/// uniformly from the rest (rejection sampling; `truncated` is set).
pub fn select_combinations(
    space: &SubsetSpace,
    inner: u64,
    budget: Option<u64>,
    rng: &mut SeededRng,
) -> Result<Selection> {
    assert!(inner >= 1);
    let budget = match budget {
        Some(0) => return Err(Error::BudgetZero),
        Some(b) => b,
        None => {
            let mut entries = Vec::new();
            space.for_each(|t| {
                entries.push((t.to_vec(), InnerRanks::All));
                ControlFlow::Continue(())
            });
            return Ok(Selection {
                entries,
                truncated: false,
            });
        }
    };

    // Enough subsets to decide whether the product exceeds the budget.
    let probe = (budget / inner).saturating_add(1);
    let head = space.first(usize::try_from(probe).unwrap_or(usize::MAX));
    if (head.len() as u64) * inner <= budget {
        let entries = head.into_iter().map(|t| (t, InnerRanks::All)).collect();
        return Ok(Selection {
            entries,
            truncated: false,
        });
    }

    let keep = budget.div_ceil(2);
    let full = keep / inner;
    let partial = keep % inner;
    let mut entries: Vec<(SubsetTuple, InnerRanks)> = Vec::new();
    let mut prefix_of: HashMap<SubsetTuple, u64> = HashMap::new();
    for (i, t) in head.into_iter().enumerate() {
        let i = i as u64;
        let ranks = if i < full {
            InnerRanks::All
        } else if i == full && partial > 0 {
            InnerRanks::Prefix(partial)
        } else {
            break;
        };
        prefix_of.insert(t.clone(), ranks.count(inner));
        entries.push((t, ranks));
    }

    let want = budget / 2;
    let mut drawn: HashSet<(SubsetTuple, u64)> = HashSet::new();
    let mut attempts = 0usize;
    let max_attempts = RANDOM_ATTEMPTS_PER_DRAW
        .saturating_mul(want as usize)
        .max(RANDOM_ATTEMPTS_PER_DRAW);
    while (drawn.len() as u64) < want && attempts < max_attempts {
        attempts += 1;
        let Some(t) = space.try_random(rng) else { continue };
        let r = rng.random_range(0..inner);
        if prefix_of.get(&t).is_some_and(|&covered| r < covered) {
            continue;
        }
        if drawn.insert((t.clone(), r)) {
            entries.push((t, InnerRanks::One(r)));
        }
    }
    Ok(Selection {
        entries,
        truncated: true,
    })
}

/// All value-distinct `k`-tuples of disjoint `τ`-sub-multisets of `pool`,
/// optionally truncated to `budget` tuples.
pub fn enumerate_subsets(
    pool: &[BitRow],
    k: usize,
    tau: usize,
    budget: Option<u64>,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<Vec<BitRow>>>> {
    let space = SubsetSpace::new(pool, k, tau)?;
    let sel = select_combinations(&space, 1, budget, rng)?;
    Ok(sel.entries.iter().map(|(t, _)| space.materialize(t)).collect())
}
