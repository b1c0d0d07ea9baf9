//! The sampling-based approximation scheme for constrained binary k-means.
//!
//! [`good_centers`] spends two passes: one to draw every D² sample for all
//! repetitions at once, and one to score all generated candidates. Together
//! with the one-pass baseline this gives [`constrained_kmeans`] its three
//! passes; [`assign_clusters`] is the optional fourth.

mod best;
mod grid;
mod params;
mod subsets;

pub use best::{best_centers, SampleProfile};
pub use grid::{epsilon_ratio, weight_grid, WeightGrid};
pub use params::{default_params, PtasParams};
pub use subsets::{enumerate_subsets, select_combinations, InnerRanks, Selection, SubsetSpace, SubsetTuple};

use indexmap::IndexMap;
use num_bigint::BigUint;
use rayon::prelude::*;

use crate::baseline::{baseline_binary_kmeans, CoresetConfig};
use crate::cost::{multi_cost, CenterSet};
use crate::error::{Error, Result};
use crate::relations::RelationSet;
use crate::sampling::{d2_reservoir_sample, SeededRng};
use crate::stream::PointStream;
use best::{centers_from_tuples, select_tuples, ScaledWeight};

/// Where a candidate came from: repetition, subset tuple index within that
/// repetition's selection, and weight-tuple rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub repetition: usize,
    pub subset: usize,
    pub weights: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub centers: CenterSet,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics {
    pub candidates_generated: u64,
    pub candidates_after_dedup: u64,
    pub subsets_enumerated: u64,
    pub grid_size: u64,
    pub budget_truncated: bool,
    pub passes_consumed: u64,
}

#[derive(Debug, Clone)]
pub struct GoodCenters {
    pub best: Candidate,
    pub cost: u64,
    pub diagnostics: Diagnostics,
}

/// Decodes a weight-tuple rank into grid exponents, first center most significant.
fn decode_rank(mut rank: u64, grid_len: u64, k: usize, out: &mut [usize]) {
    for slot in out[..k].iter_mut().rev() {
        *slot = (rank % grid_len) as usize;
        rank /= grid_len;
    }
}

enum Weights {
    Fast(Vec<u128>),
    Exact(Vec<BigUint>),
}

fn candidates_for<W: ScaledWeight + Sync>(
    relations: &RelationSet,
    profiles: &[&SampleProfile],
    grid: &[W],
    ranks: InnerRanks,
    inner: u64,
) -> Vec<(CenterSet, u64)> {
    let k = relations.k();
    let mut exps = vec![0usize; k];
    let mut ws: Vec<W> = vec![W::zero(); k];
    let mut seen: IndexMap<Vec<u64>, u64> = IndexMap::new();
    for rank in ranks.iter(inner) {
        decode_rank(rank, grid.len() as u64, k, &mut exps);
        for j in 0..k {
            ws[j] = grid[exps[j]].clone();
        }
        let tuples = select_tuples(relations, profiles, &ws);
        seen.entry(tuples).or_insert(rank);
    }
    seen.into_iter()
        .map(|(tuples, rank)| (centers_from_tuples(&tuples, k), rank))
        .collect()
}

/// Candidate generation and selection, given a baseline `B`.
///
/// Pass A draws `ζ·η·k` D² samples w.r.t. `B` with one reservoir bank. For
/// each repetition the pool is its `η·k` samples plus `τ·k` copies of every
/// center of `B`; every selected (subset tuple, weight tuple) combination
/// yields one [`best_centers`] candidate. Pass B scores all distinct
/// candidates and the cheapest (earliest on ties) is returned.
pub fn good_centers(
    stream: &mut PointStream,
    relations: &RelationSet,
    baseline: &CenterSet,
    params: &PtasParams,
    rng: &mut SeededRng,
) -> Result<GoodCenters> {
    params.validate()?;
    let k = relations.k();
    if relations.d() != stream.width() {
        return Err(Error::ShapeMismatch(format!(
            "relations cover {} coordinates, stream has width {}",
            relations.d(),
            stream.width()
        )));
    }
    baseline.check_width(stream.width())?;
    let passes_before = stream.pass_count();

    let per_rep = params
        .eta
        .checked_mul(k)
        .ok_or_else(|| Error::InvalidParameter("eta*k overflows".into()))?;
    let m = per_rep
        .checked_mul(params.zeta)
        .ok_or_else(|| Error::InvalidParameter("zeta*eta*k overflows".into()))?;
    let samples = d2_reservoir_sample(stream, baseline, m, rng)?;
    let n = stream.len().ok_or(Error::EmptyDataset)?;

    let grid = weight_grid(n, params.epsilon)?;
    let grid_len = grid.len() as u64;
    let inner = grid_len
        .checked_pow(k as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("weight grid {grid_len}^{k} is too large")))?;
    let headroom = (params.tau as u128) * (k as u128);
    let weights = match grid.scaled_u128(headroom) {
        Some(ws) => Weights::Fast(ws),
        None => Weights::Exact(grid.scaled()),
    };

    let copies = params
        .tau
        .checked_mul(k)
        .ok_or_else(|| Error::InvalidParameter("tau*k overflows".into()))?;
    let mut diagnostics = Diagnostics {
        grid_size: grid_len,
        ..Diagnostics::default()
    };
    let mut pool_of_candidates: IndexMap<CenterSet, Provenance> = IndexMap::new();

    for rep in 0..params.zeta {
        let mut pool: Vec<_> = samples[rep * per_rep..(rep + 1) * per_rep].to_vec();
        for b in baseline.centers() {
            pool.extend(std::iter::repeat_n(b.clone(), copies));
        }
        let space = SubsetSpace::new(&pool, k, params.tau)?;
        let selection = select_combinations(&space, inner, params.candidate_budget, rng)?;
        diagnostics.subsets_enumerated += selection.entries.len() as u64;
        diagnostics.budget_truncated |= selection.truncated;
        diagnostics.candidates_generated += selection.combinations(inner);

        let value_profiles: Vec<SampleProfile> = space
            .values()
            .iter()
            .map(|v| SampleProfile::new(relations.d(), std::iter::once(v)))
            .collect();
        let profile_of = |part: &[u32]| -> SampleProfile {
            let mut acc = SampleProfile {
                size: 0,
                ones: vec![0; relations.d()],
            };
            for &v in part {
                let p = &value_profiles[v as usize];
                acc.size += 1;
                for (a, b) in acc.ones.iter_mut().zip(&p.ones) {
                    *a += b;
                }
            }
            acc
        };

        let generated: Vec<Vec<(CenterSet, u64)>> = selection
            .entries
            .par_iter()
            .map(|(tuple, ranks)| {
                let profiles: Vec<SampleProfile> = tuple.iter().map(|p| profile_of(p)).collect();
                let refs: Vec<&SampleProfile> = profiles.iter().collect();
                match &weights {
                    Weights::Fast(g) => candidates_for(relations, &refs, g, *ranks, inner),
                    Weights::Exact(g) => candidates_for(relations, &refs, g, *ranks, inner),
                }
            })
            .collect();

        for (subset, list) in generated.into_iter().enumerate() {
            for (centers, rank) in list {
                pool_of_candidates.entry(centers).or_insert(Provenance {
                    repetition: rep,
                    subset,
                    weights: rank,
                });
            }
        }
    }

    diagnostics.candidates_after_dedup = pool_of_candidates.len() as u64;
    let (sets, provenance): (Vec<CenterSet>, Vec<Provenance>) = pool_of_candidates.into_iter().unzip();
    let costs = multi_cost(&sets, stream)?;
    let (best_idx, &cost) = costs
        .iter()
        .enumerate()
        .min_by_key(|&(i, c)| (*c, i))
        .expect("at least one candidate");
    diagnostics.passes_consumed = stream.pass_count() - passes_before;

    Ok(GoodCenters {
        best: Candidate {
            centers: sets[best_idx].clone(),
            provenance: provenance[best_idx],
        },
        cost,
        diagnostics,
    })
}

/// Nearest-center label for every stream point, in stream order. One pass.
pub fn assign_clusters(stream: &mut PointStream, centers: &CenterSet) -> Result<Vec<usize>> {
    Ok(assign_with_cost(stream, centers)?.0)
}

/// Labels plus `Φ(D, X)` from the same pass.
pub fn assign_with_cost(stream: &mut PointStream, centers: &CenterSet) -> Result<(Vec<usize>, u64)> {
    centers.check_width(stream.width())?;
    let mut labels = Vec::new();
    let mut total = 0u64;
    stream.pass(|x| {
        let (j, d) = centers.nearest_unchecked(x);
        labels.push(j);
        total += d;
        Ok(())
    })?;
    Ok((labels, total))
}

#[derive(Debug, Clone)]
pub struct ConstrainedSolution {
    pub centers: CenterSet,
    pub cost: u64,
    pub baseline: CenterSet,
    pub peak_stored: usize,
    pub diagnostics: Diagnostics,
    pub passes: u64,
}

/// RNG substreams used by the pipelines, fixed so runs are reproducible.
pub(crate) const BASELINE_SUBSTREAM: u64 = 1;
pub(crate) const SAMPLING_SUBSTREAM: u64 = 2;

/// Full three-pass pipeline: baseline pass, then [`good_centers`].
pub fn constrained_kmeans(
    stream: &mut PointStream,
    relations: &RelationSet,
    params: &PtasParams,
    coreset: CoresetConfig,
    seed: u64,
) -> Result<ConstrainedSolution> {
    params.validate()?;
    if relations.d() != stream.width() {
        return Err(Error::ShapeMismatch(format!(
            "relations cover {} coordinates, stream has width {}",
            relations.d(),
            stream.width()
        )));
    }
    let start = stream.pass_count();
    let mut rng = SeededRng::new(seed, BASELINE_SUBSTREAM);
    let base = baseline_binary_kmeans(stream, relations.k(), coreset, &mut rng)?;
    let mut rng = SeededRng::new(seed, SAMPLING_SUBSTREAM);
    let found = good_centers(stream, relations, &base.centers, params, &mut rng)?;
    Ok(ConstrainedSolution {
        centers: found.best.centers,
        cost: found.cost,
        baseline: base.centers,
        peak_stored: base.peak_stored,
        diagnostics: found.diagnostics,
        passes: stream.pass_count() - start,
    })
}
