//! Finite distance spaces with values in `[0, ∞]`.
//!
//! A [`DistanceSpace`] is a labeled point set whose distance matrix has a zero
//! diagonal, is symmetric and satisfies the triangle inequality, with `∞`
//! allowed. Points at finite distance form a pseudometric component.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Slack allowed in the triangle check, relative to the size of the sum.
pub const TRIANGLE_TOL: f64 = 1e-9;

/// Errors raised while building or querying a [`DistanceSpace`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("{labels} labels given for {size} points")]
    LabelCount { labels: usize, size: usize },
    #[error("entry ({i},{j}) is negative or NaN")]
    InvalidEntry { i: usize, j: usize },
    #[error("NonZeroDiagonal({i})")]
    NonZeroDiagonal { i: usize },
    #[error("Asymmetric({i},{j})")]
    Asymmetric { i: usize, j: usize },
    /// `d(x,z) > d(x,via) + d(via,z)`.
    #[error("TriangleViolation({x},{z},{via})")]
    TriangleViolation { x: usize, z: usize, via: usize },
    #[error("index {index} out of range for a space of {size} points")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("tuples of length {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("exponent p = {0} is below 1")]
    InvalidExponent(f64),
}

/// A value in `[0, ∞]`.
///
/// Addition follows `x + ∞ = ∞`; multiplication follows `∞ · 0 = 0` and
/// `x · ∞ = ∞` for `x > 0`. The order is total with `∞` on top.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Returns `None` for negative or NaN input.
    pub fn new(v: f64) -> Option<Self> {
        (v >= 0.0).then_some(ExtReal(v))
    }

    /// Panics on negative or NaN input.
    pub fn finite(v: f64) -> Self {
        assert!(v >= 0.0 && v.is_finite(), "not a finite nonnegative real: {v}");
        ExtReal(v)
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// Absolute comparison used by tests and checkers; `∞` only matches `∞`.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self.is_finite(), other.is_finite()) {
            (true, true) => (self.0 - other.0).abs() <= tol,
            (false, false) => true,
            _ => false,
        }
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal(self.0 + rhs.0)
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        if self.0 == 0.0 || rhs.0 == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * rhs.0)
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_ext_f64(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = deserialize_ext_f64(d)?;
        ExtReal::new(v).ok_or_else(|| de::Error::custom(format!("negative distance {v}")))
    }
}

/// Serializes `+∞` as the string `"inf"` and everything else as a number.
pub fn serialize_ext_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

/// Accepts a JSON number or one of the strings `"inf"`, `"infinity"`, `"∞"`.
pub fn deserialize_ext_f64<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    struct V;
    impl Visitor<'_> for V {
        type Value = f64;
        fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str("a number or \"inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            match v.trim().to_ascii_lowercase().as_str() {
                "inf" | "+inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => other.parse::<f64>().map_err(|_| E::custom(format!("bad number {v:?}"))),
            }
        }
    }
    d.deserialize_any(V)
}

/// The exponent of an ℓ^p combination, `p ∈ [1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub const ONE: PNorm = PNorm::Finite(1.0);
    pub const TWO: PNorm = PNorm::Finite(2.0);

    pub fn new(p: f64) -> Result<Self, MetricError> {
        if p.is_infinite() && p > 0.0 {
            Ok(PNorm::Infinity)
        } else if p >= 1.0 {
            Ok(PNorm::Finite(p))
        } else {
            Err(MetricError::InvalidExponent(p))
        }
    }

    /// `p` as a float, `+∞` for the sup norm.
    pub fn value(self) -> f64 {
        match self {
            PNorm::Finite(p) => p,
            PNorm::Infinity => f64::INFINITY,
        }
    }

    /// `1/p`, which is 0 for the sup norm.
    pub fn inverse(self) -> f64 {
        match self {
            PNorm::Finite(p) => 1.0 / p,
            PNorm::Infinity => 0.0,
        }
    }

    /// `k^{1/p}`, with the convention that `k = 0` gives 0 for every `p`.
    pub fn root_count(self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            (k as f64).powf(self.inverse())
        }
    }

    /// ℓ^p combination of nonnegative values: `(Σ v^p)^{1/p}` or the maximum.
    pub fn combine<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        match self {
            PNorm::Infinity => values.into_iter().fold(0.0, f64::max),
            PNorm::Finite(1.0) => values.into_iter().sum(),
            PNorm::Finite(p) => {
                let mut acc = 0.0;
                for v in values {
                    if v.is_infinite() {
                        return f64::INFINITY;
                    }
                    acc += v.powf(p);
                }
                acc.powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Finite(p) => write!(f, "{p}"),
            PNorm::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for PNorm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => f64::INFINITY,
            other => other.parse::<f64>().map_err(|e| format!("bad exponent {s:?}: {e}"))?,
        };
        PNorm::new(v).map_err(|e| e.to_string())
    }
}

impl Serialize for PNorm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_ext_f64(&self.value(), s)
    }
}

/// A validated finite distance space.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceSpace {
    labels: Vec<String>,
    n: usize,
    data: Vec<f64>,
    component_of: Vec<usize>,
    components: Vec<Vec<usize>>,
}

/// Diameter statistics of a subset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SetStats {
    pub diam: ExtReal,
    pub real_diam: ExtReal,
    pub sep: ExtReal,
}

/// Cross statistics of two subsets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrossStats {
    /// Infimum of distances between the sets, 0 when one of them is empty.
    pub lower: ExtReal,
    /// ℓ^p combination of the per-component lower distances.
    pub lower_p: ExtReal,
}

impl DistanceSpace {
    /// Validates a square matrix. Labels default to `x0, x1, …` when `None`.
    pub fn validate(labels: Option<Vec<String>>, rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NotSquare { row, len: r.len(), expected: n });
            }
        }
        let labels = match labels {
            Some(l) if l.len() != n => return Err(MetricError::LabelCount { labels: l.len(), size: n }),
            Some(l) => l,
            None => default_labels(n),
        };
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_flat(labels, data)
    }

    /// Validates a row-major `n × n` matrix.
    pub fn from_flat(labels: Vec<String>, data: Vec<f64>) -> Result<Self, MetricError> {
        let n = labels.len();
        if data.len() != n * n {
            return Err(MetricError::NotSquare { row: 0, len: data.len(), expected: n * n });
        }
        let at = |i: usize, j: usize| data[i * n + j];
        for i in 0..n {
            for j in 0..n {
                if at(i, j).is_nan() || at(i, j) < 0.0 {
                    return Err(MetricError::InvalidEntry { i, j });
                }
            }
        }
        for i in 0..n {
            if at(i, i) != 0.0 {
                return Err(MetricError::NonZeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if at(i, j) != at(j, i) {
                    return Err(MetricError::Asymmetric { i, j });
                }
            }
        }
        for x in 0..n {
            for z in 0..n {
                let dxz = at(x, z);
                for via in 0..n {
                    let sum = at(x, via) + at(via, z);
                    if dxz > sum + TRIANGLE_TOL * (1.0 + sum) {
                        return Err(MetricError::TriangleViolation { x, z, via });
                    }
                }
            }
        }
        let (component_of, components) = finite_blocks(n, &data);
        Ok(DistanceSpace { labels, n, data, component_of, components })
    }

    /// Builds a space from a distance function, validating the result.
    pub fn from_fn<F: Fn(usize, usize) -> f64>(labels: Vec<String>, d: F) -> Result<Self, MetricError> {
        let n = labels.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = d(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self::from_flat(labels, data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Raw distance as a float (`+∞` allowed).
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn dist(&self, i: usize, j: usize) -> ExtReal {
        ExtReal(self.d(i, j))
    }

    pub fn rows(&self) -> Vec<Vec<ExtReal>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.dist(i, j)).collect()).collect()
    }

    /// Pseudometric components, ordered by smallest member.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    /// Index of the component containing `i`.
    pub fn component_of(&self, i: usize) -> usize {
        self.component_of[i]
    }

    /// Map from points to component indices.
    pub fn component_map(&self) -> &[usize] {
        &self.component_of
    }

    pub fn check_index(&self, index: usize) -> Result<(), MetricError> {
        if index < self.n {
            Ok(())
        } else {
            Err(MetricError::IndexOutOfRange { index, size: self.n })
        }
    }

    pub fn check_indices(&self, idx: &[usize]) -> Result<(), MetricError> {
        idx.iter().try_for_each(|&i| self.check_index(i))
    }

    /// Subspace on the given indices, in the given order.
    pub fn subspace(&self, idx: &[usize]) -> DistanceSpace {
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        let data = idx.iter().flat_map(|&i| idx.iter().map(move |&j| (i, j))).map(|(i, j)| self.d(i, j)).collect();
        Self::from_flat(labels, data).expect("subspace of a valid space is valid")
    }
}

/// Default labels `x0, …, x{n-1}`.
pub fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn finite_blocks(n: usize, data: &[f64]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut comp = vec![usize::MAX; n];
    let mut blocks = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = blocks.len();
        let mut block = vec![s];
        comp[s] = id;
        let mut head = 0;
        while head < block.len() {
            let u = block[head];
            head += 1;
            for v in 0..n {
                if comp[v] == usize::MAX && data[u * n + v].is_finite() {
                    comp[v] = id;
                    block.push(v);
                }
            }
        }
        block.sort_unstable();
        blocks.push(block);
    }
    (comp, blocks)
}

fn sorted_unique(a: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Diameter, real diameter and separatedness of `a`.
pub fn set_stats(x: &DistanceSpace, a: &[usize]) -> Result<SetStats, MetricError> {
    x.check_indices(a)?;
    let a = sorted_unique(a);
    let (mut diam, mut real, mut sep) = (0.0f64, 0.0f64, f64::INFINITY);
    for (k, &i) in a.iter().enumerate() {
        for &j in &a[k + 1..] {
            let d = x.d(i, j);
            diam = diam.max(d);
            if d.is_finite() {
                real = real.max(d);
            }
            sep = sep.min(d);
        }
    }
    Ok(SetStats { diam: ExtReal(diam), real_diam: ExtReal(real), sep: ExtReal(sep) })
}

/// Lower distance between `a` and `b` and its per-component ℓ^p combination.
pub fn cross_stats(x: &DistanceSpace, a: &[usize], b: &[usize], p: PNorm) -> Result<CrossStats, MetricError> {
    x.check_indices(a)?;
    x.check_indices(b)?;
    let lower = lower_distance(x, a.iter().copied(), b.iter().copied());
    let per_component = x.components().iter().map(|e| {
        let inside = |i: &&usize| x.component_of(**i) == x.component_of(e[0]);
        lower_distance(x, a.iter().filter(inside).copied(), b.iter().filter(inside).copied())
    });
    let lower_p = p.combine(per_component.collect::<Vec<_>>());
    Ok(CrossStats { lower: ExtReal(lower), lower_p: ExtReal(lower_p) })
}

fn lower_distance<I: Iterator<Item = usize> + Clone>(x: &DistanceSpace, a: I, b: I) -> f64 {
    if a.clone().next().is_none() || b.clone().next().is_none() {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in a {
        for j in b.clone() {
            best = best.min(x.d(i, j));
        }
    }
    best
}

/// Hausdorff distance between two index sets.
pub fn hausdorff(x: &DistanceSpace, a: &[usize], b: &[usize]) -> ExtReal {
    let (a, b) = (sorted_unique(a), sorted_unique(b));
    if a == b {
        return ExtReal::ZERO;
    }
    if a.is_empty() || b.is_empty() {
        return ExtReal::INFINITY;
    }
    let directed = |from: &[usize], to: &[usize]| {
        from.iter().map(|&i| to.iter().map(|&j| x.d(i, j)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    ExtReal(directed(&a, &b).max(directed(&b, &a)))
}

/// ℓ^p distance between two tuples of points.
pub fn lp_tuple_distance(x: &DistanceSpace, f: &[usize], g: &[usize], p: PNorm) -> Result<ExtReal, MetricError> {
    if f.len() != g.len() {
        return Err(MetricError::LengthMismatch { left: f.len(), right: g.len() });
    }
    x.check_indices(f)?;
    x.check_indices(g)?;
    Ok(ExtReal(p.combine(f.iter().zip(g).map(|(&i, &j)| x.d(i, j)))))
}

/// Euclidean distance space on the given coordinate vectors.
pub fn euclidean_import(points: &[Vec<f64>]) -> Result<DistanceSpace, MetricError> {
    let dim = points.first().map_or(0, Vec::len);
    for (index, pt) in points.iter().enumerate() {
        if pt.len() != dim {
            return Err(MetricError::DimensionMismatch { index, expected: dim, found: pt.len() });
        }
        if let Some(j) = pt.iter().position(|c| !c.is_finite()) {
            return Err(MetricError::InvalidEntry { i: index, j });
        }
    }
    DistanceSpace::from_fn(default_labels(points.len()), |i, j| {
        points[i].iter().zip(&points[j]).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
    })
}
