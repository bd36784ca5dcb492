//! Finite quasi-metric measure spaces: point sets with a distance oracle and
//! per-point weights, plus ball/diameter/distance geometry and empirical
//! estimation of the structural constants A0 and A1.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Relative tolerance for comparisons of irrational-valued distances.
pub const DIST_REL_TOL: f64 = 1e-12;

/// Distance oracle attached to a [`FiniteSpace`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    Lp(f64),
    /// Base metric raised to the power `eps >= 1`.
    Snowflake { base: Box<Metric>, eps: f64 },
    /// Symmetric matrix with zero diagonal and positive off-diagonal.
    Explicit(Vec<Vec<f64>>),
}

impl Metric {
    fn dist_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Lp(p) => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs().powf(*p))
                .sum::<f64>()
                .powf(1.0 / p),
            Metric::Snowflake { base, eps } => base.dist_coords(a, b).powf(*eps),
            Metric::Explicit(_) => unreachable!("explicit metric does not use coordinates"),
        }
    }

    pub fn snowflake_exponent(&self) -> Option<f64> {
        match self {
            Metric::Snowflake { eps, .. } => Some(*eps),
            _ => None,
        }
    }
}

/// Immutable finite quasi-metric measure space.
///
/// Point ids are unique and their order is fixed at construction; every
/// operation refers to points by index into that order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteSpace {
    ids: Vec<String>,
    coords: Option<Vec<Vec<f64>>>,
    metric: Metric,
    weights: Vec<f64>,
    declared_a0: f64,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl FiniteSpace {
    pub fn new(
        ids: Vec<String>,
        coords: Option<Vec<Vec<f64>>>,
        metric: Metric,
        weights: Vec<f64>,
        declared_a0: f64,
    ) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Input("space must contain at least one point".into()));
        }
        if weights.len() != ids.len() {
            return Err(Error::Input("weights/ids length mismatch".into()));
        }
        if declared_a0 < 1.0 {
            return Err(Error::Input(format!(
                "declared_A0 must be >= 1, got {declared_a0}"
            )));
        }
        for (i, w) in weights.iter().enumerate() {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::Data(format!(
                    "weight of point '{}' must be strictly positive, got {w}",
                    ids[i]
                )));
            }
        }
        let mut index = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate point id '{id}'")));
            }
        }
        match &metric {
            Metric::Explicit(m) => {
                let n = ids.len();
                if m.len() != n || m.iter().any(|row| row.len() != n) {
                    return Err(Error::Data("explicit matrix has wrong shape".into()));
                }
                for (i, row) in m.iter().enumerate() {
                    if row[i] != 0.0 {
                        return Err(Error::Data(format!("matrix diagonal nonzero at {i}")));
                    }
                    for (j, &v) in row.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(Error::Data(format!("non-finite distance at ({i},{j})")));
                        }
                        if i != j && !(v > 0.0) {
                            return Err(Error::Data(format!(
                                "off-diagonal distance at ({i},{j}) must be positive, got {v}"
                            )));
                        }
                        if v != m[j][i] {
                            return Err(Error::Data(format!("matrix asymmetric at ({i},{j})")));
                        }
                    }
                }
            }
            _ => {
                let coords = coords
                    .as_ref()
                    .ok_or_else(|| Error::Input("coordinate metric requires coordinates".into()))?;
                if coords.len() != ids.len() {
                    return Err(Error::Input("coords/ids length mismatch".into()));
                }
                let dim = coords[0].len();
                if coords.iter().any(|c| c.len() != dim) {
                    return Err(Error::Input("inconsistent coordinate dimension".into()));
                }
            }
        }
        Ok(FiniteSpace {
            ids,
            coords,
            metric,
            weights,
            declared_a0,
            index,
        })
    }

    /// Rebuild the id index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn resolve(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Input(format!("unknown point id '{id}'")))
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Test hook for fault injection; breaks the positivity invariant on purpose.
    pub fn set_weight_unchecked(&mut self, i: usize, w: f64) {
        self.weights[i] = w;
    }

    pub fn coords(&self) -> Option<&Vec<Vec<f64>>> {
        self.coords.as_ref()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn declared_a0(&self) -> f64 {
        self.declared_a0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Explicit(m) => m[i][j],
            m => {
                if i == j {
                    0.0
                } else {
                    let c = self.coords.as_ref().expect("coords present");
                    m.dist_coords(&c[i], &c[j])
                }
            }
        }
    }

    pub fn measure_of(&self, members: impl IntoIterator<Item = usize>) -> f64 {
        members.into_iter().map(|i| self.weights[i]).sum()
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `B(center, radius) = { y : dist(center, y) < radius }`, strict.
    pub fn ball_members(&self, center: usize, radius: f64) -> Result<Vec<usize>> {
        if center >= self.len() {
            return Err(Error::Input(format!("point index {center} out of range")));
        }
        if !(radius > 0.0) {
            return Err(Error::Input(format!("radius must be positive, got {radius}")));
        }
        Ok((0..self.len())
            .filter(|&j| self.dist(center, j) < radius)
            .collect())
    }

    /// Exact max pairwise distance over a nonempty subset.
    pub fn diam_subset(&self, subset: &[usize]) -> Result<f64> {
        self.check_subset(subset)?;
        if subset.is_empty() {
            return Err(Error::Input("diam of empty set".into()));
        }
        let mut d = 0.0f64;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                d = d.max(self.dist(i, j));
            }
        }
        Ok(d)
    }

    /// `dist(x, A)`; the empty set is at distance +infinity.
    pub fn dist_point_set(&self, x: usize, subset: &[usize]) -> Result<f64> {
        if x >= self.len() {
            return Err(Error::Input(format!("point index {x} out of range")));
        }
        self.check_subset(subset)?;
        Ok(subset
            .iter()
            .map(|&j| self.dist(x, j))
            .fold(f64::INFINITY, f64::min))
    }

    pub fn dist_set_set(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        self.check_subset(a)?;
        self.check_subset(b)?;
        let mut d = f64::INFINITY;
        for &i in a {
            for &j in b {
                d = d.min(self.dist(i, j));
            }
        }
        Ok(d)
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if let Some(&bad) = subset.iter().find(|&&i| i >= self.len()) {
            return Err(Error::Input(format!("point index {bad} out of range")));
        }
        Ok(())
    }

    /// Diameter of the whole space and the minimum nonzero pairwise distance.
    /// A single-point space returns `(0, +inf)`.
    pub fn diam_and_min_sep(&self) -> (f64, f64) {
        let n = self.len();
        #[cfg(feature = "parallel")]
        {
            (0..n)
                .into_par_iter()
                .map(|i| self.diam_min_row(i))
                .reduce(|| (0.0, f64::INFINITY), |(d1, m1), (d2, m2)| (d1.max(d2), m1.min(m2)))
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n)
                .map(|i| self.diam_min_row(i))
                .fold((0.0, f64::INFINITY), |(d1, m1), (d2, m2)| (d1.max(d2), m1.min(m2)))
        }
    }

    #[doc(hidden)]
    pub fn diam_and_min_sep_seq(&self) -> (f64, f64) {
        (0..self.len())
            .map(|i| self.diam_min_row(i))
            .fold((0.0, f64::INFINITY), |(d1, m1), (d2, m2)| (d1.max(d2), m1.min(m2)))
    }

    fn diam_min_row(&self, i: usize) -> (f64, f64) {
        let mut diam = 0.0f64;
        let mut min_sep = f64::INFINITY;
        for j in i + 1..self.len() {
            let d = self.dist(i, j);
            diam = diam.max(d);
            if d > 0.0 {
                min_sep = min_sep.min(d);
            }
        }
        (diam, min_sep)
    }
}

/// Triple-scan mode for [`validate_quasimetric`].
#[derive(Debug, Clone, Copy)]
pub enum ValidationMode {
    Exhaustive,
    Sampled { n_triples: usize, seed: u64 },
}

/// Result of the quasi-triangle scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasimetricReport {
    /// Max over scanned triples of `d(x,z) / (d(x,y) + d(y,z))`.
    pub a0_emp: f64,
    /// Triples whose ratio exceeds the declared A0, as (x, y, z, ratio).
    pub violations: Vec<(usize, usize, usize, f64)>,
    /// Pairs breaking symmetry or zero-iff-equal, with a description.
    pub pair_faults: Vec<String>,
    pub triples_scanned: usize,
}

/// Scan triples for the worst quasi-triangle ratio, and pairs for symmetry
/// and zero-iff-equal. Exhaustive mode scans all unordered `{x,z}` pairs
/// against every `y` (the ratio is symmetric in x and z).
pub fn validate_quasimetric(space: &FiniteSpace, mode: ValidationMode) -> Result<QuasimetricReport> {
    if space.len() < 2 {
        return Err(Error::Input("quasi-metric validation needs >= 2 points".into()));
    }
    let n = space.len();
    let mut pair_faults = Vec::new();
    for i in 0..n {
        for j in i..n {
            let d = space.dist(i, j);
            if !d.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite distance between '{}' and '{}'",
                    space.id(i),
                    space.id(j)
                )));
            }
            let back = space.dist(j, i);
            if !crate::util::approx_eq(d, back, DIST_REL_TOL) {
                pair_faults.push(format!(
                    "symmetry violated: d({},{})={} but d({},{})={}",
                    space.id(i),
                    space.id(j),
                    d,
                    space.id(j),
                    space.id(i),
                    back
                ));
            }
            if i == j && d != 0.0 {
                pair_faults.push(format!("d({0},{0}) = {1} != 0", space.id(i), d));
            }
            if i != j && d == 0.0 {
                pair_faults.push(format!(
                    "distinct points '{}', '{}' at distance 0",
                    space.id(i),
                    space.id(j)
                ));
            }
        }
    }

    let declared = space.declared_a0();
    let (a0_emp, violations, scanned) = match mode {
        ValidationMode::Exhaustive => {
            #[cfg(feature = "parallel")]
            let rows: Vec<_> = (0..n)
                .into_par_iter()
                .map(|x| triple_scan_row(space, x, declared))
                .collect();
            #[cfg(not(feature = "parallel"))]
            let rows: Vec<_> = (0..n).map(|x| triple_scan_row(space, x, declared)).collect();
            merge_rows(rows, n)
        }
        ValidationMode::Sampled { n_triples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut best = 0.0f64;
            let mut violations = Vec::new();
            for _ in 0..n_triples {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let z = rng.gen_range(0..n);
                if let Some(r) = triple_ratio(space, x, y, z) {
                    best = best.max(r);
                    if r > declared * (1.0 + DIST_REL_TOL) {
                        violations.push((x, y, z, r));
                    }
                }
            }
            (best, violations, n_triples)
        }
    };

    Ok(QuasimetricReport {
        a0_emp,
        violations,
        pair_faults,
        triples_scanned: scanned,
    })
}

#[doc(hidden)]
pub fn validate_quasimetric_exhaustive_seq(space: &FiniteSpace) -> (f64, usize) {
    let n = space.len();
    let declared = space.declared_a0();
    let rows: Vec<_> = (0..n).map(|x| triple_scan_row(space, x, declared)).collect();
    let (a0, _, scanned) = merge_rows(rows, n);
    (a0, scanned)
}

#[cfg(feature = "parallel")]
#[doc(hidden)]
pub fn validate_quasimetric_exhaustive_par(space: &FiniteSpace) -> (f64, usize) {
    let n = space.len();
    let declared = space.declared_a0();
    let rows: Vec<_> = (0..n)
        .into_par_iter()
        .map(|x| triple_scan_row(space, x, declared))
        .collect();
    let (a0, _, scanned) = merge_rows(rows, n);
    (a0, scanned)
}

/// A quasi-triangle violation: the triple (x, y, z) and its ratio.
type Violation = (usize, usize, usize, f64);

fn merge_rows(rows: Vec<(f64, Vec<Violation>)>, n: usize) -> (f64, Vec<Violation>, usize) {
    let mut a0 = 0.0f64;
    let mut violations = Vec::new();
    for (r, v) in rows {
        a0 = a0.max(r);
        violations.extend(v);
    }
    violations.sort_by_key(|v| (v.0, v.1, v.2));
    (a0, violations, n * (n + 1) / 2 * n)
}

fn triple_scan_row(space: &FiniteSpace, x: usize, declared: f64) -> (f64, Vec<Violation>) {
    let n = space.len();
    let mut best = 0.0f64;
    let mut violations = Vec::new();
    for z in x..n {
        let dxz = space.dist(x, z);
        if dxz == 0.0 {
            continue;
        }
        for y in 0..n {
            let denom = space.dist(x, y) + space.dist(y, z);
            if denom > 0.0 {
                let r = dxz / denom;
                best = best.max(r);
                // rounding in sqrt can push exact-equality triples a few ulps
                // over the declared constant; only genuine excesses count
                if r > declared * (1.0 + DIST_REL_TOL) {
                    violations.push((x, y, z, r));
                }
            }
        }
    }
    (best, violations)
}

fn triple_ratio(space: &FiniteSpace, x: usize, y: usize, z: usize) -> Option<f64> {
    let denom = space.dist(x, y) + space.dist(y, z);
    if denom > 0.0 {
        Some(space.dist(x, z) / denom)
    } else {
        None
    }
}

/// Empirical doubling constant with the witness achieving it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoublingEstimate {
    pub a1_emp: f64,
    /// (point index, radius) achieving the max ratio.
    pub witness: (usize, f64),
    pub radius_grid: Vec<f64>,
}

impl DoublingEstimate {
    /// Recompute the witness ratio; the estimate invariant requires equality.
    pub fn reevaluate(&self, space: &FiniteSpace) -> f64 {
        doubling_ratio(space, self.witness.0, self.witness.1)
    }
}

fn doubling_ratio(space: &FiniteSpace, x: usize, r: f64) -> f64 {
    let inner: f64 = (0..space.len())
        .filter(|&j| space.dist(x, j) < r)
        .map(|j| space.weight(j))
        .sum();
    let outer: f64 = (0..space.len())
        .filter(|&j| space.dist(x, j) < 2.0 * r)
        .map(|j| space.weight(j))
        .sum();
    outer / inner
}

/// Above this many distinct pairwise distances the default grid switches to
/// an evenly strided subsample; the full grid costs O(n^2) scans of O(n^2)
/// radii, which dwarfs everything else in the suite.
pub const MAX_RADIUS_GRID: usize = 512;

/// Default radius grid: all distinct pairwise distances and their midpoints,
/// deterministically subsampled to at most [`MAX_RADIUS_GRID`] entries.
pub fn default_radius_grid(space: &FiniteSpace) -> Vec<f64> {
    let n = space.len();
    let mut ds: Vec<f64> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = space.dist(i, j);
            if d > 0.0 {
                ds.push(d);
            }
        }
    }
    if ds.is_empty() {
        return vec![1.0];
    }
    ds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ds.dedup();
    let mut grid = Vec::with_capacity(ds.len() * 2);
    for w in ds.windows(2) {
        grid.push(w[0]);
        grid.push(0.5 * (w[0] + w[1]));
    }
    grid.push(*ds.last().unwrap());
    if grid.len() > MAX_RADIUS_GRID {
        let stride = grid.len().div_ceil(MAX_RADIUS_GRID);
        let mut sub: Vec<f64> = grid.iter().copied().step_by(stride).collect();
        if *sub.last().unwrap() != *grid.last().unwrap() {
            sub.push(*grid.last().unwrap());
        }
        return sub;
    }
    grid
}

/// Max over the grid and all centers of `mu(B(x,2r)) / mu(B(x,r))`, with
/// strict-inequality balls.
pub fn estimate_doubling(space: &FiniteSpace, radius_grid: &[f64]) -> Result<DoublingEstimate> {
    if radius_grid.is_empty() {
        return Err(Error::Input("radius grid must be non-empty".into()));
    }
    if let Some(&bad) = radius_grid.iter().find(|&&r| !(r > 0.0)) {
        return Err(Error::Input(format!("radii must be positive, got {bad}")));
    }
    let n = space.len();
    let eval = |x: usize| -> (f64, usize, usize) {
        let mut best = (1.0f64, x, 0usize);
        for (gi, &r) in radius_grid.iter().enumerate() {
            let ratio = doubling_ratio(space, x, r);
            if ratio > best.0 {
                best = (ratio, x, gi);
            }
        }
        best
    };
    // Deterministic reduction: strictly-greater ratio wins, ties keep the
    // smaller (point, radius) pair.
    let pick = |a: (f64, usize, usize), b: (f64, usize, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) {
            b
        } else {
            a
        }
    };
    #[cfg(feature = "parallel")]
    let best = (0..n)
        .into_par_iter()
        .map(eval)
        .reduce(|| (1.0, usize::MAX, usize::MAX), pick);
    #[cfg(not(feature = "parallel"))]
    let best = (0..n).map(eval).fold((1.0, usize::MAX, usize::MAX), pick);

    let (a1_emp, x, gi) = best;
    let witness = if x == usize::MAX {
        (0, radius_grid[0])
    } else {
        (x, radius_grid[gi])
    };
    Ok(DoublingEstimate {
        a1_emp,
        witness,
        radius_grid: radius_grid.to_vec(),
    })
}

#[doc(hidden)]
pub fn estimate_doubling_seq(space: &FiniteSpace, radius_grid: &[f64]) -> f64 {
    let mut best = 1.0f64;
    for x in 0..space.len() {
        for &r in radius_grid {
            best = best.max(doubling_ratio(space, x, r));
        }
    }
    best
}

/// Parse `id,x1,...,xd,weight` CSV. Header row required; a trailing `weight`
/// column is optional (default 1.0).
pub fn space_from_csv(text: &str, metric: Metric, declared_a0: f64) -> Result<FiniteSpace> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"id") {
        return Err(Error::Input("CSV header must start with 'id'".into()));
    }
    let has_weight = cols.last() == Some(&"weight");
    let dim = cols.len() - 1 - usize::from(has_weight);
    if dim == 0 {
        return Err(Error::Input("CSV must have at least one coordinate column".into()));
    }
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != cols.len() {
            return Err(Error::Input(format!(
                "CSV row {} has {} fields, expected {}",
                lineno + 2,
                fields.len(),
                cols.len()
            )));
        }
        ids.push(fields[0].to_string());
        let mut c = Vec::with_capacity(dim);
        for f in &fields[1..1 + dim] {
            c.push(f.parse::<f64>().map_err(|_| {
                Error::Input(format!("bad coordinate '{}' at CSV row {}", f, lineno + 2))
            })?);
        }
        coords.push(c);
        weights.push(if has_weight {
            fields[cols.len() - 1].parse::<f64>().map_err(|_| {
                Error::Input(format!("bad weight at CSV row {}", lineno + 2))
            })?
        } else {
            1.0
        });
    }
    FiniteSpace::new(ids, Some(coords), metric, weights, declared_a0)
}

/// Parse explicit-matrix format: first line `n`, then `n` lines of `n`
/// space-separated reals. Point ids are `p0..p{n-1}`, unit weights.
pub fn space_from_matrix(text: &str, declared_a0: f64) -> Result<FiniteSpace> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Input("empty matrix file".into()))?
        .trim()
        .parse()
        .map_err(|_| Error::Input("matrix file must start with n".into()))?;
    let mut m = Vec::with_capacity(n);
    for i in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Input(format!("matrix row {i} missing")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::Input(format!("bad matrix entry '{t}' in row {i}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Input(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        m.push(row);
    }
    let ids = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::new(ids, None, Metric::Explicit(m), vec![1.0; n], declared_a0)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line8() -> FiniteSpace {
        let ids = (0..8).map(|i| format!("p{i}")).collect();
        let coords = (0..8).map(|i| vec![i as f64]).collect();
        FiniteSpace::new(ids, Some(coords), Metric::Euclidean, vec![1.0; 8], 1.0).unwrap()
    }

    #[test]
    fn ball_strict_inequality() {
        let s = line8();
        assert_eq!(s.ball_members(0, 2.0).unwrap(), vec![0, 1]);
        assert_eq!(s.ball_members(3, 0.5).unwrap(), vec![3]);
        assert_eq!(s.ball_members(0, 100.0).unwrap().len(), 8);
        assert!(s.ball_members(9, 1.0).is_err());
        assert!(s.ball_members(0, 0.0).is_err());
    }

    #[test]
    fn set_geometry() {
        let s = line8();
        let all: Vec<usize> = (0..8).collect();
        assert_eq!(s.diam_subset(&all).unwrap(), 7.0);
        assert_eq!(s.dist_point_set(3, &[0, 7]).unwrap(), 3.0);
        assert_eq!(s.dist_point_set(3, &[]).unwrap(), f64::INFINITY);
        assert_eq!(s.dist_set_set(&[0, 1], &[6, 7]).unwrap(), 5.0);
        assert!(s.dist_point_set(3, &[42]).is_err());
    }

    #[test]
    fn quasimetric_line_is_metric() {
        let s = line8();
        let rep = validate_quasimetric(&s, ValidationMode::Exhaustive).unwrap();
        assert_eq!(rep.a0_emp, 1.0);
        assert!(rep.violations.is_empty());
        assert!(rep.pair_faults.is_empty());
    }

    #[test]
    fn quasimetric_snowflake_squared() {
        // points {0,1,2} with rho(x,y) = |x-y|^2
        let ids = (0..3).map(|i| format!("p{i}")).collect();
        let coords = (0..3).map(|i| vec![i as f64]).collect();
        let metric = Metric::Snowflake {
            base: Box::new(Metric::Euclidean),
            eps: 2.0,
        };
        let s = FiniteSpace::new(ids, Some(coords), metric, vec![1.0; 3], 2.0).unwrap();
        let rep = validate_quasimetric(&s, ValidationMode::Exhaustive).unwrap();
        assert!((rep.a0_emp - 2.0).abs() < 1e-15);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn doubling_line8() {
        let s = line8();
        let est = estimate_doubling(&s, &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(est.a1_emp, 3.0);
        assert_eq!(est.reevaluate(&s), est.a1_emp);
    }

    #[test]
    fn doubling_single_point() {
        let s = FiniteSpace::new(
            vec!["a".into()],
            Some(vec![vec![0.0]]),
            Metric::Euclidean,
            vec![2.5],
            1.0,
        )
        .unwrap();
        let est = estimate_doubling(&s, &[1.0, 7.0]).unwrap();
        assert_eq!(est.a1_emp, 1.0);
    }

    #[test]
    fn doubling_weighted() {
        let ids = (0..8).map(|i| format!("p{i}")).collect();
        let coords = (0..8).map(|i| vec![i as f64]).collect();
        let mut w = vec![1.0; 8];
        w[3] = 10.0;
        let s = FiniteSpace::new(ids, Some(coords), Metric::Euclidean, w, 1.0).unwrap();
        let est = estimate_doubling(&s, &[1.0]).unwrap();
        assert!(est.a1_emp >= 12.0);
        assert_eq!(est.a1_emp, 12.0);
    }

    #[test]
    fn doubling_scale_invariant() {
        let s = line8();
        let base = estimate_doubling(&s, &[1.0, 2.0]).unwrap().a1_emp;
        let ids = (0..8).map(|i| format!("p{i}")).collect();
        let coords = (0..8).map(|i| vec![i as f64]).collect();
        let scaled =
            FiniteSpace::new(ids, Some(coords), Metric::Euclidean, vec![3.5; 8], 1.0).unwrap();
        assert_eq!(estimate_doubling(&scaled, &[1.0, 2.0]).unwrap().a1_emp, base);
    }

    #[test]
    fn doubling_empty_grid_is_error() {
        assert!(estimate_doubling(&line8(), &[]).is_err());
    }

    #[test]
    fn snowflake_ball_matches_rescaled_base() {
        let ids: Vec<String> = (0..8).map(|i| format!("p{i}")).collect();
        let coords: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64 * 1.3]).collect();
        let base =
            FiniteSpace::new(ids.clone(), Some(coords.clone()), Metric::Euclidean, vec![1.0; 8], 1.0)
                .unwrap();
        let eps = 2.0;
        let snow = FiniteSpace::new(
            ids,
            Some(coords),
            Metric::Snowflake {
                base: Box::new(Metric::Euclidean),
                eps,
            },
            vec![1.0; 8],
            2.0,
        )
        .unwrap();
        for r in [0.7, 2.3, 5.0] {
            assert_eq!(
                snow.ball_members(2, r).unwrap(),
                base.ball_members(2, r.powf(1.0 / eps)).unwrap()
            );
        }
    }

    #[test]
    fn csv_roundtrip() {
        let text = "id,x1,x2,weight\na,0,0,1\nb,1,0,2\nc,0,1,1\n";
        let s = space_from_csv(text, Metric::Euclidean, 1.0).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.weight(1), 2.0);
        assert_eq!(s.dist(0, 1), 1.0);

        let no_weight = "id,x\na,0\nb,2\n";
        let s2 = space_from_csv(no_weight, Metric::Euclidean, 1.0).unwrap();
        assert_eq!(s2.weight(0), 1.0);
        assert_eq!(s2.dist(0, 1), 2.0);

        assert!(space_from_csv("x,y\n1,2\n", Metric::Euclidean, 1.0).is_err());
    }

    #[test]
    fn matrix_ingestion() {
        let text = "3\n0 1 4\n1 0 1\n4 1 0\n";
        let s = space_from_matrix(text, 2.0).unwrap();
        assert_eq!(s.dist(0, 2), 4.0);
        let rep = validate_quasimetric(&s, ValidationMode::Exhaustive).unwrap();
        assert_eq!(rep.a0_emp, 2.0);

        // asymmetric matrix is a data error
        let bad = "2\n0 1\n2 0\n";
        assert!(space_from_matrix(bad, 1.0).is_err());
    }
}
