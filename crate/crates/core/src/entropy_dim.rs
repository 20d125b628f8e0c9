//! Metric entropy `E_ε`, local entropy `E_{ε,δ}` and box-counting slopes.
//!
//! A set of diameter `≤ ε` is a clique of the graph joining points at
//! distance `≤ ε`, so `E_ε` is a minimum clique cover. Components of that
//! graph are solved separately: cliques count once, components whose greedy
//! bounds meet are settled by them, and the rest go to an exact DSATUR
//! branch-and-bound colouring of the complement.

use serde::Serialize;
use thiserror::Error;

use crate::functor_engine::{EngineError, Functor, FunctorSpace};
use crate::metric_core::{default_labels, DistanceSpace, MetricError, PNorm};

/// Largest component that the exact branch-and-bound accepts.
pub const MAX_EXACT_COMPONENT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("InsufficientScales: {0} given, at least 2 needed")]
    InsufficientScales(usize),
    #[error("scales must be strictly decreasing")]
    UnorderedScales,
    #[error("component of {0} points is too large for the exact cover search")]
    TooLarge(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A cover of `X` by blocks of diameter `≤ epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverCertificate {
    pub epsilon: f64,
    pub blocks: Vec<Vec<usize>>,
}

impl CoverCertificate {
    /// Every point is covered and every block has diameter `≤ ε`.
    pub fn validate(&self, x: &DistanceSpace) -> bool {
        let mut seen = vec![false; x.len()];
        for b in &self.blocks {
            for (k, &i) in b.iter().enumerate() {
                if i >= x.len() || b[..k].iter().any(|&j| x.d(i, j) > self.epsilon) {
                    return false;
                }
                seen[i] = true;
            }
        }
        seen.into_iter().all(|s| s)
    }
}

fn check_scale(eps: f64) -> Result<(), EntropyError> {
    if eps > 0.0 {
        Ok(())
    } else {
        Err(EntropyError::InvalidScale(eps))
    }
}

/// `E_ε(X)` with an optimal cover.
pub fn min_cover(x: &DistanceSpace, eps: f64) -> Result<(usize, CoverCertificate), EntropyError> {
    check_scale(eps)?;
    let all: Vec<usize> = (0..x.len()).collect();
    let blocks = cover_points(x, &all, eps)?;
    Ok((blocks.len(), CoverCertificate { epsilon: eps, blocks }))
}

/// Minimum clique cover of the `≤ ε` graph restricted to `pts`.
fn cover_points(x: &DistanceSpace, pts: &[usize], eps: f64) -> Result<Vec<Vec<usize>>, EntropyError> {
    let close = |i: usize, j: usize| x.d(pts[i], pts[j]) <= eps;
    let mut comp = vec![usize::MAX; pts.len()];
    let mut blocks = Vec::new();
    for s in 0..pts.len() {
        if comp[s] != usize::MAX {
            continue;
        }
        comp[s] = s;
        let mut members = vec![s];
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            for v in 0..pts.len() {
                if comp[v] == usize::MAX && close(u, v) {
                    comp[v] = s;
                    members.push(v);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        for block in cover_component(&members, &close)? {
            blocks.push(block.into_iter().map(|i| pts[i]).collect::<Vec<_>>());
        }
    }
    blocks.sort();
    Ok(blocks)
}

fn cover_component(members: &[usize], close: &dyn Fn(usize, usize) -> bool) -> Result<Vec<Vec<usize>>, EntropyError> {
    let k = members.len();
    let adj = |i: usize, j: usize| close(members[i], members[j]);
    if (0..k).all(|i| (0..i).all(|j| adj(i, j))) {
        return Ok(vec![members.to_vec()]);
    }
    let by_index: Vec<usize> = (0..k).collect();
    let mut by_degree = by_index.clone();
    let degree: Vec<usize> = (0..k).map(|i| (0..k).filter(|&j| j != i && adj(i, j)).count()).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let upper = greedy_cover(k, &adj, &by_index);
    let lower = independent(k, &adj, &by_index).max(independent(k, &adj, &by_degree));
    let colors = if upper.iter().max().map_or(0, |c| c + 1) == lower {
        upper
    } else {
        if k > MAX_EXACT_COMPONENT {
            return Err(EntropyError::TooLarge(k));
        }
        exact_cover(k, &adj, upper, lower)
    };
    let count = colors.iter().max().map_or(0, |c| c + 1);
    let mut blocks = vec![Vec::new(); count];
    for (i, &c) in colors.iter().enumerate() {
        blocks[c].push(members[i]);
    }
    Ok(blocks)
}

/// First-fit clique cover in the given order, as a block index per vertex.
fn greedy_cover(k: usize, adj: &dyn Fn(usize, usize) -> bool, order: &[usize]) -> Vec<usize> {
    let mut color = vec![usize::MAX; k];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &v in order {
        let slot = blocks.iter().position(|b| b.iter().all(|&u| adj(u, v)));
        let c = slot.unwrap_or_else(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[c].push(v);
        color[v] = c;
    }
    color
}

/// Size of a greedy independent set, a lower bound on the cover size.
fn independent(k: usize, adj: &dyn Fn(usize, usize) -> bool, order: &[usize]) -> usize {
    let mut picked: Vec<usize> = Vec::with_capacity(k);
    for &v in order {
        if picked.iter().all(|&u| !adj(u, v)) {
            picked.push(v);
        }
    }
    picked.len()
}

struct Dsatur {
    /// `conflict[v]`: vertices farther than `ε` from `v`.
    conflict: Vec<u64>,
    color: Vec<usize>,
    best: Vec<usize>,
    best_count: usize,
    lower: usize,
}

impl Dsatur {
    fn run(&mut self, used: usize, colored: usize) {
        if self.best_count == self.lower || used >= self.best_count {
            return;
        }
        let k = self.conflict.len();
        if colored == k {
            self.best_count = used;
            self.best = self.color.clone();
            return;
        }
        let mut pick = usize::MAX;
        let mut key = (0u32, 0u32);
        let mut pick_mask = 0u64;
        for v in 0..k {
            if self.color[v] != usize::MAX {
                continue;
            }
            let mut mask = 0u64;
            let mut free = 0u32;
            for u in 0..k {
                if self.conflict[v] >> u & 1 == 1 {
                    match self.color[u] {
                        usize::MAX => free += 1,
                        c => mask |= 1 << c,
                    }
                }
            }
            let kv = (mask.count_ones(), free);
            if pick == usize::MAX || kv > key {
                pick = v;
                key = kv;
                pick_mask = mask;
            }
        }
        for c in 0..used {
            if pick_mask >> c & 1 == 0 {
                self.color[pick] = c;
                self.run(used, colored + 1);
                self.color[pick] = usize::MAX;
            }
        }
        if used + 1 < self.best_count {
            self.color[pick] = used;
            self.run(used + 1, colored + 1);
            self.color[pick] = usize::MAX;
        }
    }
}

fn exact_cover(k: usize, adj: &dyn Fn(usize, usize) -> bool, upper: Vec<usize>, lower: usize) -> Vec<usize> {
    let conflict = (0..k).map(|v| (0..k).filter(|&u| u != v && !adj(u, v)).fold(0u64, |m, u| m | 1 << u)).collect();
    let best_count = upper.iter().max().map_or(0, |c| c + 1);
    let mut s = Dsatur { conflict, color: vec![usize::MAX; k], best: upper, best_count, lower };
    s.run(0, 0);
    s.best
}

/// `E_{ε,δ}(X)`: the largest `E_ε(A)` over `A ⊆ X` with `diam(A) < δ`.
pub fn local_entropy(x: &DistanceSpace, eps: f64, delta: f64) -> Result<usize, EntropyError> {
    check_scale(eps)?;
    check_scale(delta)?;
    let n = x.len();
    let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && x.d(i, j) < delta).collect()).collect();
    let mut cliques = Vec::new();
    bron_kerbosch(&adj, Vec::new(), (0..n).collect(), Vec::new(), &mut cliques);
    let mut best = 0;
    for c in cliques {
        best = best.max(cover_points(x, &c, eps)?.len());
    }
    Ok(best)
}

fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, p: Vec<usize>, xs: Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if p.is_empty() {
        if xs.is_empty() && !r.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = *p.iter().chain(&xs).max_by_key(|&&u| (p.iter().filter(|&&v| adj[u][v]).count(), usize::MAX - u)).unwrap();
    let (mut p, mut xs) = (p, xs);
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let x2 = xs.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r2, p2, x2, out);
        p.retain(|&u| u != v);
        xs.push(v);
    }
}

/// One scale of a box-counting table; `slope` is the finite difference to
/// the previous scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleRow {
    pub scale: f64,
    pub count: usize,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDimReport {
    pub upper_slope: f64,
    pub lower_slope: f64,
    pub least_squares_slope: f64,
    pub table: Vec<ScaleRow>,
}

/// Slopes of `ln E_ε` against `ln(1/ε)` over strictly decreasing scales.
pub fn box_dim_estimate(x: &DistanceSpace, scales: &[f64]) -> Result<BoxDimReport, EntropyError> {
    if scales.len() < 2 {
        return Err(EntropyError::InsufficientScales(scales.len()));
    }
    for &s in scales {
        check_scale(s)?;
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EntropyError::UnorderedScales);
    }
    let mut table: Vec<ScaleRow> = Vec::with_capacity(scales.len());
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &scale in scales {
        let count = min_cover(x, scale)?.0;
        let (lx, ly) = ((1.0 / scale).ln(), (count.max(1) as f64).ln());
        let slope = table.last().map(|prev| (ly - (prev.count.max(1) as f64).ln()) / (lx - (1.0 / prev.scale).ln()));
        table.push(ScaleRow { scale, count, slope });
        xs.push(lx);
        ys.push(ly);
    }
    let slopes: Vec<f64> = table.iter().filter_map(|r| r.slope).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(BoxDimReport {
        upper_slope: slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lower_slope: slopes.iter().copied().fold(f64::INFINITY, f64::min),
        least_squares_slope: sxy / sxx,
        table,
    })
}

fn line_space(points: Vec<f64>) -> DistanceSpace {
    let labels = default_labels(points.len());
    DistanceSpace::from_fn(labels, |i, j| (points[i] - points[j]).abs()).expect("points on a line form a metric space")
}

/// Level-`k` Cantor set `{Σ_{i≤k} x_i 3^{-i} : x_i ∈ {0, 2}}`, in increasing order.
pub fn cantor_set(k: u32) -> DistanceSpace {
    let denom = 3f64.powi(k as i32);
    let points = (0..1u64 << k)
        .map(|mask| {
            let num: u64 = (0..k).filter(|&i| mask >> (k - 1 - i) & 1 == 1).map(|i| 2 * 3u64.pow(k - 1 - i)).sum();
            num as f64 / denom
        })
        .collect();
    line_space(points)
}

/// `2^k` equally spaced points `i / (2^k − 1)` in `[0, 1]`.
pub fn dyadic_grid(k: u32) -> DistanceSpace {
    let n = 1usize << k;
    let h = (n - 1).max(1) as f64;
    line_space((0..n).map(|i| i as f64 / h).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalEntropyCheck {
    pub delta: f64,
    pub delta_prime: f64,
    pub epsilon_prime: f64,
    pub lhs: usize,
    pub middle: usize,
    pub right: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyCheck {
    pub functor: String,
    pub n: usize,
    pub fn_size: usize,
    pub epsilon: f64,
    /// `E_ε(F^pX)`.
    pub lhs: usize,
    /// `|Fn| · E_ε(X^n, d^p)`.
    pub middle: usize,
    /// `|Fn| · E_{ε/n^{1/p}}(X)^n`.
    pub right: usize,
    pub holds: bool,
    /// Present for support-preserving functors, with `δ = 2ε`.
    pub local: Option<LocalEntropyCheck>,
}

fn product_space(x: &DistanceSpace, n: usize, p: PNorm) -> Result<DistanceSpace, EntropyError> {
    let size = x.len().checked_pow(n as u32).filter(|&s| s <= crate::functor_engine::MAX_TUPLES);
    let size = size.ok_or(EngineError::EngineLimit { tuples: usize::MAX })?;
    let tuple = |mut t: usize| {
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            v.push(t % x.len());
            t /= x.len();
        }
        v
    };
    let tuples: Vec<Vec<usize>> = (0..size).map(tuple).collect();
    let d = |i: usize, j: usize| p.combine(tuples[i].iter().zip(&tuples[j]).map(|(&u, &v)| x.d(u, v)));
    Ok(DistanceSpace::from_fn(default_labels(size), d)?)
}

/// Computes both sides of the entropy bounds for `F^pX` exactly.
pub fn functor_entropy_check<F: Functor + ?Sized>(functor: &F, x: &DistanceSpace, p: PNorm, eps: f64) -> Result<EntropyCheck, EntropyError> {
    check_scale(eps)?;
    let n = functor.degree().max(1);
    let fn_size = functor.carrier(n).len();
    let fx = FunctorSpace::new(functor, x, p)?.to_space()?;
    let xn = product_space(x, n, p)?;
    let root = p.root_count(n);
    let eps_prime = eps / root;
    let lhs = min_cover(&fx, eps)?.0;
    let middle = fn_size * min_cover(&xn, eps)?.0;
    let right = fn_size * min_cover(x, eps_prime)?.0.pow(n as u32);
    let local = if functor.preserves_supports() {
        let delta = 2.0 * eps;
        let delta_prime = 2.0 * delta * root;
        let factor = n.pow(n as u32) * fn_size;
        let lhs = local_entropy(&fx, eps, delta)?;
        let middle = factor * local_entropy(&xn, eps, delta_prime)?;
        let right = factor * local_entropy(x, eps_prime, delta_prime)?.pow(n as u32);
        Some(LocalEntropyCheck { delta, delta_prime, epsilon_prime: eps_prime, lhs, middle, right, holds: lhs <= middle && middle <= right })
    } else {
        None
    };
    Ok(EntropyCheck {
        functor: functor.name(),
        n,
        fn_size,
        epsilon: eps,
        lhs,
        middle,
        right,
        holds: lhs <= middle && middle <= right && local.as_ref().is_none_or(|l| l.holds),
        local,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functor_engine::BuiltinFunctor;
    use crate::metric_core::euclidean_import;

    fn line(v: &[f64]) -> DistanceSpace {
        euclidean_import(&v.iter().map(|&t| vec![t]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cover_examples() {
        let x = line(&[0.0, 1.0, 3.0]);
        let (c, cert) = min_cover(&x, 3.0).unwrap();
        assert_eq!(c, 1);
        assert!(cert.validate(&x));
        let c2 = cantor_set(2);
        assert_eq!(min_cover(&c2, 1.0 / 3.0).unwrap().0, 2);
        let split = DistanceSpace::validate(None, &[vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]]).unwrap();
        assert_eq!(min_cover(&split, 1e6).unwrap().0, 2);
        assert_eq!(min_cover(&x, 0.0), Err(EntropyError::InvalidScale(0.0)));
    }

    #[test]
    fn exact_search_beats_greedy() {
        // A 5-cycle in the ≤ ε graph: no triangle, so 3 blocks are needed;
        // greedy independent sets only certify 2.
        let a = 1.0;
        let rows: Vec<Vec<f64>> = (0..5).map(|i: i32| (0..5).map(|j: i32| {
            let k = (i - j).rem_euclid(5).min((j - i).rem_euclid(5));
            [0.0, a, 1.5 * a, 0.0, 0.0][k as usize]
        }).collect()).collect();
        let x = DistanceSpace::validate(None, &rows).unwrap();
        let (c, cert) = min_cover(&x, 1.0).unwrap();
        assert_eq!(c, 3);
        assert!(cert.validate(&x));
    }

    #[test]
    fn local_entropy_examples() {
        let x = line(&[0.0, 1.0, 100.0, 101.0]);
        assert_eq!(local_entropy(&x, 0.5, 2.0).unwrap(), 2);
        assert_eq!(local_entropy(&x, 0.5, 1.0).unwrap(), 1);
        assert_eq!(local_entropy(&x, 0.5, 200.0).unwrap(), min_cover(&x, 0.5).unwrap().0);
    }

    #[test]
    fn generators_hit_exact_counts() {
        let c = cantor_set(8);
        assert_eq!(c.len(), 256);
        for j in 1..=8 {
            assert_eq!(min_cover(&c, 3f64.powi(-j)).unwrap().0, 1 << j);
        }
        let g = dyadic_grid(6);
        for j in 0..=6 {
            assert_eq!(min_cover(&g, 2f64.powi(-j)).unwrap().0, 1 << j);
        }
    }

    #[test]
    fn box_dimension() {
        let c = cantor_set(8);
        let scales: Vec<f64> = (1..=8).map(|j| 3f64.powi(-j)).collect();
        let r = box_dim_estimate(&c, &scales).unwrap();
        let target = 2f64.ln() / 3f64.ln();
        assert!((r.upper_slope - target).abs() < 1e-9 && (r.lower_slope - target).abs() < 1e-9);
        assert!((r.least_squares_slope - target).abs() < 1e-9);
        let cluster = line(&[0.0, 1e-6]);
        assert_eq!(box_dim_estimate(&cluster, &[0.1, 0.01]).unwrap().upper_slope, 0.0);
        assert_eq!(box_dim_estimate(&cluster, &[0.1]), Err(EntropyError::InsufficientScales(1)));
    }

    #[test]
    fn entropy_bounds_on_small_spaces() {
        let x = line(&[0.0, 1.0, 2.5]);
        let r = functor_entropy_check(&BuiltinFunctor::Power(2), &x, PNorm::ONE, 1.0).unwrap();
        assert!(r.holds, "{r:?}");
        let one = line(&[0.0]);
        let r = functor_entropy_check(&BuiltinFunctor::CappedHyperspace(2), &one, PNorm::TWO, 0.5).unwrap();
        assert_eq!(r.lhs, 2);
        assert!(r.holds && r.local.is_some());
    }
}
