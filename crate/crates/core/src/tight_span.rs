//! Admissible and extremal functions on a distance space.
//!
//! A value table `f` is admissible when `f(x) + f(y) ≥ d(x,y)` for all
//! points. Extremal functions are the pointwise-minimal admissible ones;
//! together they form the tight span, into which `x ↦ d(x,·)` embeds
//! isometrically under the sup-distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::metric_core::{DistanceSpace, MetricError};

/// Slack tolerated in `f(x) + f(y) ≥ d(x,y)`, relative to `1 + d(x,y)`.
pub const ADMISSIBLE_TOL: f64 = 1e-9;
/// Default sup-residual at which the projection stops.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default iteration cap of the projection.
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TightSpanError {
    #[error("not admissible: f({x}) + f({y}) < d({x},{y})")]
    NotAdmissible { x: usize, y: usize },
    #[error("value table has {found} entries for a space of {expected} points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no convergence after {iterations} iterations, residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Outcome of an admissibility check; `witness` names a violating pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Admissibility {
    pub admissible: bool,
    pub witness: Option<(usize, usize)>,
}

/// Result of [`project_extremal`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Projection {
    #[serde(serialize_with = "ser_table")]
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn ser_table<S: serde::Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&crate::io::Ext(*x))?;
    }
    seq.end()
}

/// Checks `f(x) + f(y) ≥ d(x,y)` for all pairs, including `x = y`.
///
/// Finite values on two different components always fail, so a passing
/// table has its finite part inside one component.
pub fn is_admissible(x: &DistanceSpace, f: &[f64]) -> Result<Admissibility, TightSpanError> {
    check_len(x, f)?;
    if let Some(i) = f.iter().position(|v| v.is_nan()) {
        return Ok(Admissibility { admissible: false, witness: Some((i, i)) });
    }
    for i in 0..x.len() {
        for j in i..x.len() {
            let d = x.d(i, j);
            if !covers(f[i] + f[j], d) {
                return Ok(Admissibility { admissible: false, witness: Some((i, j)) });
            }
        }
    }
    Ok(Admissibility { admissible: true, witness: None })
}

/// `sum ≥ d` up to [`ADMISSIBLE_TOL`]; an infinite `d` needs an infinite sum.
fn covers(sum: f64, d: f64) -> bool {
    if d.is_infinite() {
        sum.is_infinite()
    } else {
        sum >= d - ADMISSIBLE_TOL * (1.0 + d)
    }
}

fn require_admissible(x: &DistanceSpace, f: &[f64]) -> Result<(), TightSpanError> {
    match is_admissible(x, f)?.witness {
        None => Ok(()),
        Some((i, j)) => Err(TightSpanError::NotAdmissible { x: i, y: j }),
    }
}

fn check_len(x: &DistanceSpace, f: &[f64]) -> Result<(), TightSpanError> {
    if f.len() == x.len() {
        Ok(())
    } else {
        Err(TightSpanError::LengthMismatch { expected: x.len(), found: f.len() })
    }
}

/// Component holding the finite part of `f`, if any.
fn finite_component(x: &DistanceSpace, f: &[f64]) -> Option<usize> {
    f.iter().position(|v| v.is_finite()).map(|a| x.component_of(a))
}

/// Unchecked star transform; terms with `f(z) = ∞` drop out.
fn star_raw(x: &DistanceSpace, f: &[f64]) -> Vec<f64> {
    let n = x.len();
    let Some(c) = finite_component(x, f) else {
        return vec![f64::INFINITY; n];
    };
    let block = &x.components()[c];
    let mut out = vec![f64::INFINITY; n];
    for &i in block {
        out[i] = block
            .iter()
            .filter(|&&z| f[z].is_finite())
            .map(|&z| x.d(i, z) - f[z])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    out
}

/// `f*(x) = sup_z (d(x,z) − f(z))` over the component of the finite part,
/// and `∞` off that component.
pub fn star(x: &DistanceSpace, f: &[f64]) -> Result<Vec<f64>, TightSpanError> {
    require_admissible(x, f)?;
    Ok(star_raw(x, f))
}

/// Extends `f` from its finite part `A` to the whole component `B` of the
/// smallest index `a ∈ A` by `g(x) = f(a) + d(a,x)` on `B \ A`.
///
/// A table with empty finite part is returned unchanged.
pub fn normalize_component(x: &DistanceSpace, f: &[f64]) -> Result<Vec<f64>, TightSpanError> {
    require_admissible(x, f)?;
    Ok(normalize_raw(x, f))
}

fn normalize_raw(x: &DistanceSpace, f: &[f64]) -> Vec<f64> {
    let Some(a) = f.iter().position(|v| v.is_finite()) else {
        return f.to_vec();
    };
    let mut g = vec![f64::INFINITY; x.len()];
    for &i in &x.components()[x.component_of(a)] {
        g[i] = if f[i].is_finite() { f[i] } else { f[a] + x.d(a, i) };
    }
    g
}

/// Iterates `q(f) = (f + f*)/2` after normalization until the sup-residual
/// drops below `tol`.
///
/// The residual bounds the extremality gap: `0 ≤ r − r* ≤ 2·residual`.
pub fn project_extremal(x: &DistanceSpace, f: &[f64], tol: f64, max_iter: usize) -> Result<Projection, TightSpanError> {
    require_admissible(x, f)?;
    let mut cur = normalize_raw(x, f);
    let Some(c) = finite_component(x, &cur) else {
        return Ok(Projection { values: cur, iterations: 0, residual: 0.0 });
    };
    let block = x.components()[c].clone();
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let s = star_raw(x, &cur);
        residual = 0.0;
        for &i in &block {
            let next = 0.5 * (cur[i] + s[i]);
            residual = f64::max(residual, (cur[i] - next).abs());
            cur[i] = next;
        }
        if residual < tol {
            return Ok(Projection { values: cur, iterations: it, residual });
        }
    }
    Err(TightSpanError::NoConvergence { iterations: max_iter, residual })
}

/// True iff `f` is finite exactly on one component `B` and `|f − f*| < tol`
/// on `B`. The all-`∞` table is extremal only on the empty space.
pub fn is_extremal(x: &DistanceSpace, f: &[f64], tol: f64) -> Result<bool, TightSpanError> {
    require_admissible(x, f)?;
    let Some(c) = finite_component(x, f) else {
        return Ok(x.is_empty());
    };
    let s = star_raw(x, f);
    Ok((0..x.len()).all(|i| {
        if x.component_of(i) == c {
            f[i].is_finite() && (f[i] - s[i]).abs() < tol
        } else {
            f[i].is_infinite()
        }
    }))
}

/// Brute-force minimality probe: `f` counts as extremal when lowering any
/// single finite coordinate by `step` breaks admissibility.
///
/// Agrees with [`is_extremal`] whenever every extremality gap is either
/// below the tolerance or at least `step`.
pub fn is_minimal_by_probe(x: &DistanceSpace, f: &[f64], step: f64) -> bool {
    let Some(c) = finite_component(x, f) else {
        return x.is_empty();
    };
    if x.components()[c].iter().any(|&i| f[i].is_infinite()) {
        return false;
    }
    let mut g = f.to_vec();
    for &i in &x.components()[c] {
        g[i] = f[i] - step;
        let still = g[i] >= 0.0 && (0..x.len()).all(|j| covers(g[i] + g[j], x.d(i, j)));
        g[i] = f[i];
        if still {
            return false;
        }
    }
    true
}

/// The distance function `d(x,·)`.
pub fn kuratowski(x: &DistanceSpace, p: usize) -> Result<Vec<f64>, TightSpanError> {
    x.check_index(p)?;
    Ok((0..x.len()).map(|j| x.d(p, j)).collect())
}

/// Sup-distance between value tables, where `|∞ − ∞| = 0` and a finite
/// value is at distance `∞` from `∞`.
pub fn sup_distance(f: &[f64], g: &[f64]) -> f64 {
    f.iter()
        .zip(g)
        .map(|(a, b)| match (a.is_finite(), b.is_finite()) {
            (true, true) => (a - b).abs(),
            (false, false) => 0.0,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Random admissible table: `h = max_{s∈S}(d_s − t_s)` on a random component,
/// made admissible as `max(h, h*)`.
pub fn random_admissible<R: Rng>(x: &DistanceSpace, rng: &mut R) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let anchor = rng.gen_range(0..n);
    let block = &x.components()[x.component_of(anchor)];
    let scale = block.iter().flat_map(|&i| block.iter().map(move |&j| (i, j))).map(|(i, j)| x.d(i, j)).fold(0.0, f64::max);
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut sources = vec![(anchor, rng.gen_range(0.0..scale))];
    for &s in block {
        if s != anchor && rng.gen_bool(0.5) {
            sources.push((s, rng.gen_range(0.0..scale)));
        }
    }
    let mut h = vec![f64::INFINITY; n];
    for &i in block {
        h[i] = sources.iter().map(|&(s, t)| x.d(i, s) - t).fold(f64::NEG_INFINITY, f64::max);
    }
    let hs = star_raw(x, &h);
    h.iter().zip(&hs).map(|(a, b)| a.max(*b)).collect()
}

/// Kuratowski images of `X` plus `count` projected random admissible
/// functions, under the sup-distance. Labels of new points are `e0, e1, …`.
pub fn sample_tight_span(x: &DistanceSpace, count: usize, seed: u64) -> Result<DistanceSpace, TightSpanError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Vec<f64>> = (0..x.len()).map(|i| (0..x.len()).map(|j| x.d(i, j)).collect()).collect();
    let mut labels = x.labels().to_vec();
    if !x.is_empty() {
        for k in 0..count {
            let f = random_admissible(x, &mut rng);
            points.push(project_extremal(x, &f, DEFAULT_TOL, DEFAULT_MAX_ITER)?.values);
            labels.push(format!("e{k}"));
        }
    }
    Ok(DistanceSpace::from_fn(labels, |i, j| sup_distance(&points[i], &points[j]))?)
}
