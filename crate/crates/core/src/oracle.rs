//! Exhaustive solvers for tiny instances. Slow on purpose; used as ground truth.

use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};
use crate::lowrank::{Factorization, Factors};
use crate::relations::{InnerProduct, RelationSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_n: usize,
    pub max_d: usize,
    pub max_k: usize,
    pub max_r: usize,
    /// Upper bound on elementary operations.
    pub budget: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_n: 8,
            max_d: 8,
            max_k: 3,
            max_r: 2,
            budget: 1_000_000_000,
        }
    }
}

fn exceeded(what: &str, value: usize, cap: usize) -> Error {
    Error::LimitsExceeded(format!("{what} = {value} exceeds {cap}"))
}

fn check_rows(points: &[BitRow], limits: &OracleLimits) -> Result<usize> {
    let d = points.first().ok_or(Error::EmptyDataset)?.width();
    if let Some(bad) = points.iter().find(|p| p.width() != d) {
        return Err(Error::WidthMismatch {
            expected: d,
            found: bad.width(),
        });
    }
    if points.len() > limits.max_n {
        return Err(exceeded("n", points.len(), limits.max_n));
    }
    if d > limits.max_d {
        return Err(exceeded("d", d, limits.max_d));
    }
    Ok(d)
}

fn check_budget(work: Option<u64>, limits: &OracleLimits) -> Result<()> {
    match work {
        Some(w) if w <= limits.budget => Ok(()),
        _ => Err(Error::LimitsExceeded(format!(
            "estimated work exceeds the budget of {} operations",
            limits.budget
        ))),
    }
}

/// For fixed clusters, the cheapest allowed tuple at each coordinate by
/// direct mismatch counting (smallest tuple on ties).
#[allow(clippy::needless_range_loop)]
fn partition_optimal(relations: &RelationSet, sizes: &[u64], ones: &[Vec<u64>]) -> (u64, Vec<u64>) {
    let mut total = 0;
    let mut tuples = Vec::with_capacity(relations.d());
    for i in 0..relations.d() {
        let mut best = (u64::MAX, 0u64);
        for e in relations.entries(i) {
            let mismatches: u64 = (0..sizes.len())
                .map(|j| if e.bit(j) { sizes[j] - ones[j][i] } else { ones[j][i] })
                .sum();
            if mismatches < best.0 {
                best = (mismatches, e.tuple);
            }
        }
        total += best.0;
        tuples.push(best.1);
    }
    (total, tuples)
}

fn centers_from(tuples: &[u64], k: usize, d: usize) -> CenterSet {
    let centers = (0..k)
        .map(|j| BitRow::from_bits((0..d).map(|i| (tuples[i] >> j) & 1 == 1)))
        .collect();
    CenterSet::new(centers).expect("k >= 1")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub centers: CenterSet,
    pub cost: u64,
}

/// Minimum of `Φ(C, X)` over all center sets satisfying `relations`.
///
/// Enumerates all `k^n` assignments of points to (distinguishable)
/// clusters; for each, picks per coordinate the tuple with the fewest
/// mismatches. The Voronoi partition of an optimal `C` is one of the
/// assignments, so the minimum over assignments is the optimum.
pub fn exact_constrained_kmeans(
    points: &[BitRow],
    relations: &RelationSet,
    limits: &OracleLimits,
) -> Result<OracleSolution> {
    let d = check_rows(points, limits)?;
    let k = relations.k();
    let n = points.len();
    if relations.d() != d {
        return Err(Error::ShapeMismatch(format!(
            "relations cover {} coordinates, points have width {d}",
            relations.d()
        )));
    }
    if k > limits.max_k {
        return Err(exceeded("k", k, limits.max_k));
    }
    let per_assignment = (relations.total_tuples() as u64) * (k as u64) + (n * d) as u64;
    let work = (k as u64)
        .checked_pow(n as u32)
        .and_then(|a| a.checked_mul(per_assignment));
    check_budget(work, limits)?;

    let mut assignment = vec![0usize; n];
    let mut sizes = vec![0u64; k];
    let mut ones = vec![vec![0u64; d]; k];
    let mut best: Option<(u64, Vec<u64>)> = None;
    loop {
        for s in sizes.iter_mut() {
            *s = 0;
        }
        for row in ones.iter_mut() {
            row.iter_mut().for_each(|c| *c = 0);
        }
        for (p, &j) in points.iter().zip(&assignment) {
            sizes[j] += 1;
            for (i, c) in ones[j].iter_mut().enumerate() {
                *c += p.get(i) as u64;
            }
        }
        let (cost, tuples) = partition_optimal(relations, &sizes, &ones);
        if best.as_ref().is_none_or(|(bc, _)| cost < *bc) {
            best = Some((cost, tuples));
        }

        // odometer, last point fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                let (cost, tuples) = best.expect("at least one assignment");
                return Ok(OracleSolution {
                    centers: centers_from(&tuples, k, d),
                    cost,
                });
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
        }
    }
}

/// Optimal unconstrained binary k-means cost `OPT★`.
pub fn exact_binary_kmeans(points: &[BitRow], k: usize, limits: &OracleLimits) -> Result<OracleSolution> {
    let d = check_rows(points, limits)?;
    if k > limits.max_k {
        return Err(exceeded("k", k, limits.max_k));
    }
    let relations = RelationSet::unconstrained(k, d)?;
    exact_constrained_kmeans(points, &relations, limits)
}

/// Minimum of `‖A − U·V‖₀` over all binary `U`, `V` under `f`.
///
/// Enumerates every `V`; for a fixed `V` the rows of `U` are independent,
/// so each row takes the best of the `2^r` possible `U` rows. This covers
/// all `2^{nr}·2^{rd}` pairs.
pub fn exact_lowrank(rows: &[BitRow], f: &InnerProduct, limits: &OracleLimits) -> Result<Factorization> {
    let d = check_rows(rows, limits)?;
    let r = f.rank();
    let n = rows.len();
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if r > limits.max_r {
        return Err(exceeded("r", r, limits.max_r));
    }
    let v_bits = (r * d) as u32;
    let work = 1u64
        .checked_shl(v_bits)
        .and_then(|v| v.checked_mul(1 << r))
        .and_then(|v| v.checked_mul(((n + 1) * d) as u64));
    check_budget(work, limits)?;

    let u_count = 1u64 << r;
    let mut best: Option<(u64, u64, Vec<u64>)> = None;
    for v_code in 0..(1u64 << v_bits) {
        // Column i of V is bits [i*r, (i+1)*r) of v_code, read MSB first.
        let columns: Vec<u64> = (0..d).map(|i| (v_code >> (i * r)) & (u_count - 1)).collect();
        let products: Vec<BitRow> = (0..u_count)
            .map(|u| BitRow::from_bits(columns.iter().map(|&c| f.eval(u, c))))
            .collect();
        let mut total = 0u64;
        let mut u_rows = Vec::with_capacity(n);
        for row in rows {
            let (u, dist) = products
                .iter()
                .enumerate()
                .map(|(u, p)| (u as u64, row.hamming_unchecked(p)))
                .min_by_key(|&(u, dist)| (dist, u))
                .expect("2^r >= 2 rows");
            total += dist;
            u_rows.push(u);
        }
        if best.as_ref().is_none_or(|(bt, _, _)| total < *bt) {
            best = Some((total, v_code, u_rows));
        }
    }
    let (error, v_code, u_rows) = best.expect("at least one V");
    let u = u_rows.iter().map(|&code| BitRow::from_msb_first(code, r)).collect();
    let v = (0..r)
        .map(|j| BitRow::from_bits((0..d).map(|i| (v_code >> (i * r + (r - 1 - j))) & 1 == 1)))
        .collect();
    Ok(Factorization {
        factors: Factors { u, v },
        error,
    })
}
