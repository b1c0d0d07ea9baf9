//! Coordinate relations, inner products over `{0,1}^r`, and the low-rank
//! relation construction.
//!
//! A relation tuple is stored as a `k`-bit integer whose bit `j` is the
//! prescribed value of center `j` at that coordinate. Small vectors in
//! `{0,1}^r` (witnesses, the `λ` labels) are stored as integers read most
//! significant bit first, so numeric order is lexicographic order.

use std::fmt::Write as _;

use crate::bitrow::BitRow;
use crate::cost::CenterSet;
use crate::error::{Error, Result};

/// Default cap on the factorization rank `r` (so `k = 2^r ≤ 64`).
pub const DEFAULT_MAX_RANK: usize = 6;

/// Largest `k` for which `*` (all `2^k` tuples) may be materialized.
pub const MAX_UNCONSTRAINED_K: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InnerProduct {
    /// Parity of the coordinate-wise AND.
    Gf2 { r: usize },
    /// OR of the coordinate-wise AND.
    Boolean { r: usize },
    /// Explicit truth table, entry `x * 2^r + y` holds `<x, y>`.
    Table { r: usize, table: Vec<bool> },
}

impl InnerProduct {
    pub fn gf2(r: usize) -> Self {
        InnerProduct::Gf2 { r }
    }

    pub fn boolean(r: usize) -> Self {
        InnerProduct::Boolean { r }
    }

    pub fn table(r: usize, table: Vec<bool>) -> Result<Self> {
        if r > DEFAULT_MAX_RANK * 2 {
            return Err(Error::RankTooLarge {
                rank: r,
                cap: DEFAULT_MAX_RANK * 2,
            });
        }
        let side = 1usize << r;
        if table.len() != side * side {
            return Err(Error::ShapeMismatch(format!(
                "inner-product table for r={r} needs {} entries, got {}",
                side * side,
                table.len()
            )));
        }
        Ok(InnerProduct::Table { r, table })
    }

    /// Parses the table-field format: `2^r` lines of `2^r` characters, line
    /// `x` column `y` holding `<x, y>`.
    pub fn parse_table(text: &str) -> Result<Self> {
        let mut lines = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.strip_suffix('\r').unwrap_or(line).trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            lines.push((lineno + 1, line));
        }
        let side = lines.len();
        if side < 2 || !side.is_power_of_two() {
            return Err(Error::parse(
                0,
                format!("table needs 2^r rows with r >= 1, found {side}"),
            ));
        }
        let r = side.trailing_zeros() as usize;
        let mut table = Vec::with_capacity(side * side);
        for (lineno, line) in lines {
            if line.chars().count() != side {
                return Err(Error::parse(lineno, format!("expected {side} entries")));
            }
            for c in line.chars() {
                match c {
                    '0' => table.push(false),
                    '1' => table.push(true),
                    other => return Err(Error::parse(lineno, format!("unexpected character {other:?}"))),
                }
            }
        }
        Self::table(r, table)
    }

    pub fn rank(&self) -> usize {
        match self {
            InnerProduct::Gf2 { r } | InnerProduct::Boolean { r } | InnerProduct::Table { r, .. } => *r,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerProduct::Gf2 { .. } => "gf2",
            InnerProduct::Boolean { .. } => "boolean",
            InnerProduct::Table { .. } => "table",
        }
    }

    /// Evaluates `<x, y>` on `r`-bit integers (most significant bit first).
    #[inline]
    pub fn eval(&self, x: u64, y: u64) -> bool {
        match self {
            InnerProduct::Gf2 { .. } => (x & y).count_ones() & 1 == 1,
            InnerProduct::Boolean { .. } => x & y != 0,
            InnerProduct::Table { r, table } => table[((x as usize) << r) | y as usize],
        }
    }
}

/// `<x, y>` for two `r`-bit rows.
pub fn inner_product(x: &BitRow, y: &BitRow, f: &InnerProduct) -> Result<bool> {
    let r = f.rank();
    for v in [x, y] {
        if v.width() != r {
            return Err(Error::WidthMismatch {
                expected: r,
                found: v.width(),
            });
        }
    }
    Ok(f.eval(x.to_msb_first(), y.to_msb_first()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationEntry {
    pub tuple: u64,
    pub witness: Option<u64>,
}

impl RelationEntry {
    pub fn new(tuple: u64) -> Self {
        RelationEntry { tuple, witness: None }
    }

    pub fn with_witness(tuple: u64, witness: u64) -> Self {
        RelationEntry {
            tuple,
            witness: Some(witness),
        }
    }

    #[inline]
    pub fn bit(&self, j: usize) -> bool {
        (self.tuple >> j) & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Lists {
    Uniform(Vec<RelationEntry>),
    PerCoordinate(Vec<Vec<RelationEntry>>),
}

/// The relations `R_1, ..., R_d`, one sorted tuple list per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    k: usize,
    d: usize,
    lists: Lists,
}

impl RelationSet {
    /// Every tuple allowed at every coordinate.
    pub fn unconstrained(k: usize, d: usize) -> Result<Self> {
        Self::uniform(k, d, all_tuples(k)?)
    }

    pub fn uniform(k: usize, d: usize, entries: Vec<RelationEntry>) -> Result<Self> {
        check_k(k)?;
        let list = normalize(k, entries, 1)?;
        Ok(RelationSet {
            k,
            d,
            lists: Lists::Uniform(list),
        })
    }

    pub fn per_coordinate(k: usize, lists: Vec<Vec<RelationEntry>>) -> Result<Self> {
        check_k(k)?;
        let d = lists.len();
        let lists = lists
            .into_iter()
            .enumerate()
            .map(|(i, l)| normalize(k, l, i + 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(RelationSet {
            k,
            d,
            lists: Lists::PerCoordinate(lists),
        })
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.lists, Lists::Uniform(_))
    }

    /// Sorted entries of `R_i` (0-based coordinate).
    #[inline]
    pub fn entries(&self, i: usize) -> &[RelationEntry] {
        match &self.lists {
            Lists::Uniform(l) => l,
            Lists::PerCoordinate(ls) => &ls[i],
        }
    }

    pub fn total_tuples(&self) -> usize {
        (0..self.d).map(|i| self.entries(i).len()).sum()
    }

    pub fn find(&self, i: usize, tuple: u64) -> Option<&RelationEntry> {
        let list = self.entries(i);
        list.binary_search_by_key(&tuple, |e| e.tuple).ok().map(|p| &list[p])
    }

    pub fn check_shape(&self, centers: &CenterSet) -> Result<()> {
        if centers.k() != self.k || centers.width() != self.d {
            return Err(Error::ShapeMismatch(format!(
                "center set is {}x{}, relations expect {}x{}",
                centers.k(),
                centers.width(),
                self.k,
                self.d
            )));
        }
        Ok(())
    }

    /// Serializes to the relations text format.
    pub fn to_text(&self) -> String {
        let mut out = format!("k={} d={}\n", self.k, self.d);
        let full = if self.k <= MAX_UNCONSTRAINED_K {
            Some(1usize << self.k)
        } else {
            None
        };
        let render = |list: &[RelationEntry]| -> String {
            if Some(list.len()) == full {
                return "*".to_string();
            }
            let parts: Vec<String> = list.iter().map(|e| tuple_to_string(e.tuple, self.k)).collect();
            parts.join(" ")
        };
        match &self.lists {
            Lists::Uniform(l) => {
                let _ = writeln!(out, "uniform: {}", render(l));
            }
            Lists::PerCoordinate(ls) => {
                for (i, l) in ls.iter().enumerate() {
                    let _ = writeln!(out, "coord {}: {}", i + 1, render(l));
                }
            }
        }
        out
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 || k > 64 {
        return Err(Error::InvalidParameter(format!("k must be in 1..=64, got {k}")));
    }
    Ok(())
}

fn all_tuples(k: usize) -> Result<Vec<RelationEntry>> {
    if k > MAX_UNCONSTRAINED_K {
        return Err(Error::InvalidParameter(format!(
            "cannot enumerate all 2^{k} tuples (limit k <= {MAX_UNCONSTRAINED_K})"
        )));
    }
    Ok((0..1u64 << k).map(RelationEntry::new).collect())
}

fn normalize(k: usize, mut list: Vec<RelationEntry>, coordinate: usize) -> Result<Vec<RelationEntry>> {
    if list.is_empty() {
        return Err(Error::EmptyRelation { coordinate });
    }
    if k < 64 {
        if let Some(bad) = list.iter().find(|e| e.tuple >> k != 0) {
            return Err(Error::InvalidParameter(format!(
                "tuple {:#b} does not fit in k={k} bits",
                bad.tuple
            )));
        }
    }
    // (tuple, witness) order puts the smallest witness first within a tuple.
    list.sort();
    list.dedup_by_key(|e| e.tuple);
    Ok(list)
}

/// The `k`-bit tuple `(c_1[i], ..., c_k[i])` read off a center set.
#[inline]
pub fn tuple_at(centers: &CenterSet, i: usize) -> u64 {
    centers
        .centers()
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, c)| acc | ((c.get(i) as u64) << j))
}

/// True iff every coordinate's tuple appears in the corresponding relation.
pub fn validate_center_set(centers: &CenterSet, relations: &RelationSet) -> Result<bool> {
    relations.check_shape(centers)?;
    Ok((0..relations.d()).all(|i| relations.find(i, tuple_at(centers, i)).is_some()))
}

/// The uniform relation of the low-rank reduction.
///
/// Labels `λ_1..λ_k` enumerate `{0,1}^r` in lexicographic order, i.e.
/// `λ_j` is the integer `j - 1`. For every `x` the tuple has bit `j`
/// equal to `<λ_j, x>`, and `x` is recorded as its witness.
pub fn build_lowrank_relation(r: usize, f: &InnerProduct, max_rank: usize) -> Result<Vec<RelationEntry>> {
    if r == 0 {
        return Err(Error::InvalidParameter("rank must be at least 1".into()));
    }
    if r > max_rank {
        return Err(Error::RankTooLarge { rank: r, cap: max_rank });
    }
    if f.rank() != r {
        return Err(Error::WidthMismatch {
            expected: r,
            found: f.rank(),
        });
    }
    let k = 1u64 << r;
    let mut entries: Vec<RelationEntry> = (0..k)
        .map(|x| {
            let tuple = (0..k).fold(0u64, |acc, lambda| acc | ((f.eval(lambda, x) as u64) << lambda));
            RelationEntry::with_witness(tuple, x)
        })
        .collect();
    entries.sort();
    entries.dedup_by_key(|e| e.tuple);
    Ok(entries)
}

fn tuple_to_string(tuple: u64, k: usize) -> String {
    (0..k).map(|j| if (tuple >> j) & 1 == 1 { '1' } else { '0' }).collect()
}

fn parse_tuple(s: &str, k: usize, lineno: usize) -> Result<u64> {
    if s.chars().count() != k {
        return Err(Error::parse(
            lineno,
            format!("tuple {s:?} has width {}, expected {k}", s.chars().count()),
        ));
    }
    let mut t = 0u64;
    for (j, c) in s.chars().enumerate() {
        match c {
            '0' => {}
            '1' => t |= 1 << j,
            other => return Err(Error::parse(lineno, format!("unexpected character {other:?} in tuple"))),
        }
    }
    Ok(t)
}

fn parse_tuple_list(body: &str, k: usize, lineno: usize) -> Result<Vec<RelationEntry>> {
    let tokens: Vec<&str> = body.split_whitespace().collect();
    if tokens == ["*"] {
        return all_tuples(k).map_err(|e| Error::parse(lineno, e.to_string()));
    }
    tokens
        .into_iter()
        .map(|t| {
            if t == "*" {
                Err(Error::parse(lineno, "'*' must appear alone"))
            } else {
                parse_tuple(t, k, lineno).map(RelationEntry::new)
            }
        })
        .collect()
}

fn parse_header(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut k = None;
    let mut d = None;
    for tok in line.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected key=value, found {tok:?}")))?;
        let value: usize = value
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid integer {value:?}")))?;
        match key {
            "k" if k.is_none() => k = Some(value),
            "d" if d.is_none() => d = Some(value),
            _ => return Err(Error::parse(lineno, format!("unexpected header field {key:?}"))),
        }
    }
    match (k, d) {
        (Some(k), Some(d)) if (1..=64).contains(&k) && d >= 1 => Ok((k, d)),
        (Some(_), Some(_)) => Err(Error::parse(lineno, "k must be in 1..=64 and d at least 1")),
        _ => Err(Error::parse(lineno, "header must be \"k=<int> d=<int>\"")),
    }
}

/// Parses the relations text format.
pub fn parse_relations(text: &str) -> Result<RelationSet> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("").trim();
        (!content.is_empty()).then_some((i + 1, content))
    });

    let (hline, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let (k, d) = parse_header(header, hline)?;

    let mut per_coord: Vec<Vec<RelationEntry>> = Vec::with_capacity(d);
    let mut uniform = None;
    for (lineno, line) in lines {
        let (label, body) = line
            .split_once(':')
            .ok_or_else(|| Error::parse(lineno, "expected \"uniform:\" or \"coord <i>:\""))?;
        let label = label.trim();
        if label == "uniform" {
            if uniform.is_some() || !per_coord.is_empty() {
                return Err(Error::parse(lineno, "uniform line must be the only relation line"));
            }
            uniform = Some((lineno, parse_tuple_list(body, k, lineno)?));
            continue;
        }
        if uniform.is_some() {
            return Err(Error::parse(lineno, "uniform line must be the only relation line"));
        }
        let idx = label
            .strip_prefix("coord")
            .map(str::trim)
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(lineno, format!("bad coordinate label {label:?}")))?;
        let expected = per_coord.len() + 1;
        if idx != expected {
            let why = if idx >= 1 && idx < expected {
                "duplicate"
            } else {
                "out-of-order"
            };
            return Err(Error::parse(
                lineno,
                format!("{why} coordinate {idx}, expected {expected}"),
            ));
        }
        if idx > d {
            return Err(Error::parse(lineno, format!("coordinate {idx} exceeds d={d}")));
        }
        let list = parse_tuple_list(body, k, lineno)?;
        if list.is_empty() {
            return Err(Error::EmptyRelation { coordinate: idx });
        }
        per_coord.push(list);
    }

    if let Some((_, list)) = uniform {
        if list.is_empty() {
            return Err(Error::EmptyRelation { coordinate: 1 });
        }
        return RelationSet::uniform(k, d, list);
    }
    if per_coord.len() != d {
        return Err(Error::parse(
            text.lines().count(),
            format!("expected {d} coordinate lines, found {}", per_coord.len()),
        ));
    }
    RelationSet::per_coordinate(k, per_coord)
}
