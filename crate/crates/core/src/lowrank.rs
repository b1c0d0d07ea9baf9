//! Binary ℓ0 low-rank approximation through constrained k-means.
//!
//! Rows of `A` become points; clusters are indexed by the `2^r` labels
//! `λ ∈ {0,1}^r`, and coordinate `i` only admits center tuples of the form
//! `(<λ_1, x>, ..., <λ_k, x>)`. A feasible center set therefore factors as
//! `U·V` with `U`'s rows the labels of the assigned clusters and `V`'s
//! columns the witnesses `x`.

use crate::baseline::CoresetConfig;
use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};
use crate::ptas::{assign_with_cost, constrained_kmeans, Diagnostics, PtasParams};
use crate::relations::{build_lowrank_relation, tuple_at, InnerProduct, RelationSet};
use crate::stream::PointStream;

#[derive(Debug, Clone)]
pub struct ReducedInstance {
    pub k: usize,
    pub relations: RelationSet,
    /// `λ_j` as `r`-bit integers; `lambdas[j] == j`.
    pub lambdas: Vec<u64>,
}

/// Builds the constrained k-means instance for rank `r` over `d` columns.
pub fn reduce_to_kmeans(d: usize, f: &InnerProduct, max_rank: usize) -> Result<ReducedInstance> {
    let r = f.rank();
    let entries = build_lowrank_relation(r, f, max_rank)?;
    let k = 1usize << r;
    Ok(ReducedInstance {
        k,
        relations: RelationSet::uniform(k, d, entries)?,
        lambdas: (0..k as u64).collect(),
    })
}

/// `U` (`n × r`) and `V` (`r × d`), stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factors {
    pub u: Vec<BitRow>,
    pub v: Vec<BitRow>,
}

impl Factors {
    pub fn rank(&self) -> usize {
        self.v.len()
    }

    pub fn rows(&self) -> usize {
        self.u.len()
    }

    pub fn cols(&self) -> usize {
        self.v.first().map_or(0, BitRow::width)
    }

    /// Columns of `V` as `r`-bit integers.
    fn column_codes(&self) -> Vec<u64> {
        let r = self.rank();
        (0..self.cols())
            .map(|i| (0..r).fold(0u64, |acc, j| (acc << 1) | self.v[j].get(i) as u64))
            .collect()
    }

    /// Row of `U·V` for a given `U`-row code.
    fn product_row(&self, code: u64, columns: &[u64], f: &InnerProduct) -> BitRow {
        BitRow::from_bits(columns.iter().map(|&c| f.eval(code, c)))
    }

    /// Dense `U·V` under `f`.
    pub fn product(&self, f: &InnerProduct) -> Vec<BitRow> {
        let columns = self.column_codes();
        self.u
            .iter()
            .map(|u| self.product_row(u.to_msb_first(), &columns, f))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Factors,
    pub error: u64,
}

/// The stored witness for the tuple each coordinate of `centers` uses.
pub fn witnesses_for(centers: &CenterSet, relations: &RelationSet) -> Result<Vec<u64>> {
    relations.check_shape(centers)?;
    (0..relations.d())
        .map(|i| {
            relations
                .find(i, tuple_at(centers, i))
                .and_then(|e| e.witness)
                .ok_or(Error::MissingWitness { coordinate: i + 1 })
        })
        .collect()
}

/// `U`'s row `t` is `λ_{labels[t]}`; `V`'s column `i` is `witnesses[i]`.
pub fn reconstruct_factors(
    centers: &CenterSet,
    labels: &[usize],
    witnesses: &[u64],
    lambdas: &[u64],
    rank: usize,
) -> Result<Factors> {
    if lambdas.len() != centers.k() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} centers",
            lambdas.len(),
            centers.k()
        )));
    }
    if witnesses.len() != centers.width() {
        return Err(Error::ShapeMismatch(format!(
            "{} witnesses for width {}",
            witnesses.len(),
            centers.width()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= centers.k()) {
        return Err(Error::ShapeMismatch(format!("label {bad} out of range")));
    }
    let u = labels
        .iter()
        .map(|&l| BitRow::from_msb_first(lambdas[l], rank))
        .collect();
    let v = (0..rank)
        .map(|j| BitRow::from_bits(witnesses.iter().map(|&x| (x >> (rank - 1 - j)) & 1 == 1)))
        .collect();
    Ok(Factors { u, v })
}

/// `‖A − U·V‖₀` under `f`. One pass over `A`.
pub fn l0_error(stream: &mut PointStream, factors: &Factors, f: &InnerProduct) -> Result<u64> {
    if factors.rank() != f.rank() {
        return Err(Error::ShapeMismatch(format!(
            "factors have rank {}, inner product has rank {}",
            factors.rank(),
            f.rank()
        )));
    }
    if factors.cols() != stream.width() {
        return Err(Error::ShapeMismatch(format!(
            "V has {} columns, A has {}",
            factors.cols(),
            stream.width()
        )));
    }
    let columns = factors.column_codes();
    // Only 2^r distinct U rows exist; cache their products.
    let mut cache: Vec<Option<BitRow>> = vec![None; 1 << f.rank()];
    let mut t = 0usize;
    let mut total = 0u64;
    stream.pass(|row| {
        let u = factors
            .u
            .get(t)
            .ok_or_else(|| Error::ShapeMismatch("A has more rows than U".into()))?;
        let code = u.to_msb_first();
        let predicted = cache[code as usize].get_or_insert_with(|| factors.product_row(code, &columns, f));
        total += row.hamming_unchecked(predicted);
        t += 1;
        Ok(())
    })?;
    if t != factors.rows() {
        return Err(Error::ShapeMismatch(format!(
            "A has {t} rows, U has {}",
            factors.rows()
        )));
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct LowRankSolution {
    pub factorization: Factorization,
    pub centers: CenterSet,
    pub labels: Vec<usize>,
    pub peak_stored: usize,
    pub diagnostics: Diagnostics,
    pub passes: u64,
}

/// Four row-wise passes: baseline, sampling, candidate scoring, assignment.
pub fn lowrank_approx(
    stream: &mut PointStream,
    f: &InnerProduct,
    params: &PtasParams,
    coreset: CoresetConfig,
    seed: u64,
    max_rank: usize,
) -> Result<LowRankSolution> {
    let start = stream.pass_count();
    let reduced = reduce_to_kmeans(stream.width(), f, max_rank)?;
    let sol = constrained_kmeans(stream, &reduced.relations, params, coreset, seed)?;
    let (labels, cost) = assign_with_cost(stream, &sol.centers)?;
    let witnesses = witnesses_for(&sol.centers, &reduced.relations)?;
    let factors = reconstruct_factors(&sol.centers, &labels, &witnesses, &reduced.lambdas, f.rank())?;
    Ok(LowRankSolution {
        factorization: Factorization { factors, error: cost },
        centers: sol.centers,
        labels,
        peak_stored: sol.peak_stored,
        diagnostics: sol.diagnostics,
        passes: stream.pass_count() - start,
    })
}
