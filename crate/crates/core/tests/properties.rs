use blr_core::cost::cost_of_rows;
use blr_core::ptas::{best_centers, weight_grid};
use blr_core::relations::{build_lowrank_relation, parse_relations, RelationEntry, DEFAULT_MAX_RANK};
use blr_core::{
    cost_phi, hamming, majority_center, multi_cost, validate_center_set, BitRow, CenterSet, InnerProduct, PointStream,
    RelationSet,
};
use num_bigint::BigUint;
use num_rational::Ratio;
use proptest::prelude::*;

fn row(width: usize) -> impl Strategy<Value = BitRow> {
    prop::collection::vec(any::<bool>(), width).prop_map(BitRow::from_bits)
}

fn rows(n: std::ops::RangeInclusive<usize>, width: usize) -> impl Strategy<Value = Vec<BitRow>> {
    prop::collection::vec(row(width), n)
}

/// Random relation lists over `k` bits for `d` coordinates, each non-empty.
fn relation(k: usize, d: usize) -> impl Strategy<Value = RelationSet> {
    let full = 1u64 << k;
    prop::collection::vec(prop::collection::btree_set(0..full, 1..=full as usize), d).prop_map(move |lists| {
        let lists = lists
            .into_iter()
            .map(|s| s.into_iter().map(RelationEntry::new).collect())
            .collect();
        RelationSet::per_coordinate(k, lists).unwrap()
    })
}

proptest! {
    #[test]
    fn hamming_is_a_metric(
        (x, y, z) in (1usize..150).prop_flat_map(|d| (row(d), row(d), row(d)))
    ) {
        let xy = hamming(&x, &y).unwrap();
        prop_assert_eq!(xy, hamming(&y, &x).unwrap());
        prop_assert_eq!(xy == 0, x == y);
        prop_assert!(hamming(&x, &z).unwrap() <= xy + hamming(&y, &z).unwrap());
    }

    #[test]
    fn more_centers_never_cost_more(
        (pts, cs, extra) in (1usize..12).prop_flat_map(|d| (rows(1..=20, d), rows(1..=3, d), rows(1..=3, d)))
    ) {
        let small = CenterSet::new(cs.clone()).unwrap();
        let mut all = cs;
        all.extend(extra);
        let big = CenterSet::new(all).unwrap();
        let mut s = PointStream::from_rows(pts).unwrap();
        prop_assert!(cost_phi(&big, &mut s).unwrap() <= cost_phi(&small, &mut s).unwrap());
    }

    #[test]
    fn multi_cost_of_one_is_cost_phi(
        (pts, cs) in (1usize..70).prop_flat_map(|d| (rows(1..=30, d), rows(1..=4, d)))
    ) {
        let c = CenterSet::new(cs).unwrap();
        let mut s = PointStream::from_rows(pts).unwrap();
        let single = multi_cost(std::slice::from_ref(&c), &mut s).unwrap();
        prop_assert_eq!(single, vec![cost_phi(&c, &mut s).unwrap()]);
        prop_assert_eq!(s.pass_count(), 2);
    }

    #[test]
    fn majority_is_exhaustively_optimal((pts, d) in (1usize..=10).prop_flat_map(|d| (rows(1..=9, d), Just(d)))) {
        let m = majority_center(&pts).unwrap();
        let m_cost = cost_of_rows(&CenterSet::new(vec![m]).unwrap(), &pts).unwrap();
        let best = (0..1u64 << d)
            .map(|v| cost_of_rows(&CenterSet::new(vec![BitRow::from_msb_first(v, d)]).unwrap(), &pts).unwrap())
            .min()
            .unwrap();
        prop_assert_eq!(m_cost, best);
    }

    #[test]
    fn replay_is_identical(pts in rows(1..=40, 9)) {
        let mut s = PointStream::from_rows(pts.clone()).unwrap();
        let a = s.collect_rows().unwrap();
        let b = s.collect_rows().unwrap();
        prop_assert_eq!(&a, &pts);
        prop_assert_eq!(a, b);
        prop_assert_eq!(s.pass_count(), 2);
        prop_assert_eq!(s.len(), Some(pts.len() as u64));
    }

    #[test]
    fn witnesses_reproduce_tuples(r in 1usize..=4, table_bits in prop::collection::vec(any::<bool>(), 256)) {
        let side = 1usize << r;
        let fields = [
            InnerProduct::gf2(r),
            InnerProduct::boolean(r),
            InnerProduct::table(r, table_bits[..side * side].to_vec()).unwrap(),
        ];
        for f in fields {
            let rel = build_lowrank_relation(r, &f, DEFAULT_MAX_RANK).unwrap();
            prop_assert!(rel.len() <= side);
            prop_assert!(rel.windows(2).all(|w| w[0].tuple < w[1].tuple));
            for e in &rel {
                let w = e.witness.unwrap();
                for j in 0..side {
                    prop_assert_eq!(e.bit(j), f.eval(j as u64, w));
                }
                // The stored witness is the smallest one producing the tuple.
                for smaller in 0..w {
                    let t = (0..side as u64).fold(0u64, |acc, l| acc | ((f.eval(l, smaller) as u64) << l));
                    prop_assert_ne!(t, e.tuple);
                }
            }
        }
    }

    #[test]
    fn validation_is_monotone(
        (rel, cs, extra) in (1usize..=3, 1usize..=5).prop_flat_map(|(k, d)| {
            (relation(k, d), rows(k..=k, d), prop::collection::vec(0..(1u64 << k), d))
        })
    ) {
        let centers = CenterSet::new(cs).unwrap();
        let before = validate_center_set(&centers, &rel).unwrap();
        let grown: Vec<Vec<RelationEntry>> = (0..rel.d())
            .map(|i| {
                let mut l = rel.entries(i).to_vec();
                l.push(RelationEntry::new(extra[i]));
                l
            })
            .collect();
        let grown = RelationSet::per_coordinate(rel.k(), grown).unwrap();
        if before {
            prop_assert!(validate_center_set(&centers, &grown).unwrap());
        }
    }

    #[test]
    fn relations_text_roundtrip(rel in (1usize..=4, 1usize..=6).prop_flat_map(|(k, d)| relation(k, d))) {
        let text = rel.to_text();
        prop_assert_eq!(parse_relations(&text).unwrap(), rel);
    }

    #[test]
    fn best_centers_scale_invariant(
        (rel, samples, ws, factor) in (1usize..=3, 1usize..=6).prop_flat_map(|(k, d)| (
            relation(k, d),
            prop::collection::vec(rows(1..=5, d), k),
            prop::collection::vec(1u64..50, k),
            1u64..1000,
        ))
    ) {
        let w: Vec<Ratio<BigUint>> = ws.iter().map(|&x| Ratio::from_integer(BigUint::from(x))).collect();
        let scaled: Vec<Ratio<BigUint>> = ws
            .iter()
            .map(|&x| Ratio::new(BigUint::from(x * factor), BigUint::from(7u32)))
            .collect();
        let a = best_centers(&rel, &samples, &w).unwrap();
        let b = best_centers(&rel, &samples, &scaled).unwrap();
        prop_assert!(validate_center_set(&a, &rel).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn grid_covers_every_size(n in 1u64..3000, eps_milli in 50u32..=500) {
        let eps = eps_milli as f64 / 1000.0;
        let grid = weight_grid(n, eps).unwrap();
        let values = grid.values();
        let step = blr_core::ptas::epsilon_ratio(eps) / 2 + 1;
        let step = Ratio::new(BigUint::from(*step.numer()), BigUint::from(*step.denom()));
        prop_assert!(values.windows(2).all(|w| w[0] < w[1]));
        for s in [1, n / 3 + 1, n / 2 + 1, n] {
            let s = Ratio::from_integer(BigUint::from(s));
            let hi = &s * &step;
            prop_assert!(values.iter().any(|v| *v >= s && *v <= hi));
        }
    }
}
