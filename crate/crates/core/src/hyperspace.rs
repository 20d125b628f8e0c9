//! The full hyperspace functor `H` of finite subsets.
//!
//! `d^∞_{HX}` is the Hausdorff distance. `d^1_{HX}(a,b)` is the least length of
//! a graph on `X` containing `a ∪ b` whose every component meets both `a`
//! and `b`. An optimal graph is a forest of Steiner trees, one per block of a
//! partition of `a ∪ b`, so the distance is a minimum over such partitions of
//! summed Steiner-tree lengths.

use serde::Serialize;
use thiserror::Error;

use crate::metric_core::{DistanceSpace, ExtReal, MetricError};

/// Largest `|a ∪ b|` accepted by the exact d¹ computation.
pub const MAX_TERMINALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HyperError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("|a ∪ b| = {0} exceeds the limit of {MAX_TERMINALS}")]
    TooManyTerminals(usize),
    #[error("invalid witness graph: {0}")]
    InvalidGraph(String),
    #[error("invalid hyperspace chain at step {step}: {reason}")]
    InvalidChain { step: usize, reason: String },
}

/// A graph in `X`; edges are stored as ordered pairs `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanningGraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl SpanningGraph {
    fn new(mut vertices: Vec<usize>, mut edges: Vec<(usize, usize)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.retain(|e| e.0 != e.1);
        edges.sort_unstable();
        edges.dedup();
        vertices.extend(edges.iter().flat_map(|&(u, v)| [u, v]));
        vertices.sort_unstable();
        vertices.dedup();
        SpanningGraph { vertices, edges }
    }

    /// `ℓ(Γ)`: the sum of edge lengths.
    pub fn length(&self, x: &DistanceSpace) -> f64 {
        self.edges.iter().map(|&(u, v)| x.d(u, v)).sum()
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let pos = |v: usize| self.vertices.binary_search(&v).expect("edge endpoints are vertices");
        let mut parent: Vec<usize> = (0..self.vertices.len()).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for &(u, v) in &self.edges {
            let (ru, rv) = (root(&mut parent, pos(u)), root(&mut parent, pos(v)));
            parent[ru.max(rv)] = ru.min(rv);
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.vertices.len()];
        for i in 0..self.vertices.len() {
            let r = root(&mut parent, i);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(self.vertices[i]);
        }
        groups
    }

    /// Membership in `Γ(a,b)`: `a ∪ b ⊆ V` and each component meets `a` and `b`.
    pub fn links(&self, a: &[usize], b: &[usize]) -> bool {
        let inside = |v: &usize| self.vertices.binary_search(v).is_ok();
        a.iter().chain(b).all(inside)
            && self.components().iter().all(|c| c.iter().any(|v| a.contains(v)) && c.iter().any(|v| b.contains(v)))
    }

    /// Checks membership in `Γ(a,b)` and that the length matches `claimed`.
    pub fn validate(&self, x: &DistanceSpace, a: &[usize], b: &[usize], claimed: f64) -> Result<(), HyperError> {
        x.check_indices(&self.vertices)?;
        if !self.links(a, b) {
            return Err(HyperError::InvalidGraph("a component misses a or b".into()));
        }
        let len = self.length(x);
        if (len - claimed).abs() > 1e-9 * (1.0 + claimed.abs()) {
            return Err(HyperError::InvalidGraph(format!("length {len} differs from {claimed}")));
        }
        Ok(())
    }
}

fn sorted_unique(a: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Dreyfus–Wagner tables over a terminal list, Steiner points from all of `X`.
struct SteinerTable {
    terms: Vec<usize>,
    dp: Vec<Vec<f64>>,
    hop: Vec<Vec<usize>>,
    split: Vec<Vec<usize>>,
}

impl SteinerTable {
    fn build(x: &DistanceSpace, terms: &[usize]) -> Self {
        let (t, m) = (terms.len(), x.len());
        let full = 1usize << t;
        let mut dp = vec![vec![f64::INFINITY; m]; full];
        let mut hop = vec![vec![usize::MAX; m]; full];
        let mut split = vec![vec![0usize; m]; full];
        for (i, &ti) in terms.iter().enumerate() {
            for v in 0..m {
                dp[1 << i][v] = x.d(ti, v);
                hop[1 << i][v] = ti;
            }
        }
        for mask in 1..full {
            if mask.count_ones() < 2 {
                continue;
            }
            let low = mask & mask.wrapping_neg();
            let mut merge = vec![f64::INFINITY; m];
            let mut best_split = vec![0usize; m];
            let rest = mask ^ low;
            let mut sub = rest;
            // Submasks containing the lowest bit, excluding the full mask.
            loop {
                let s = sub | low;
                if s != mask {
                    for u in 0..m {
                        let c = dp[s][u] + dp[mask ^ s][u];
                        if c < merge[u] {
                            merge[u] = c;
                            best_split[u] = s;
                        }
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            for v in 0..m {
                for u in 0..m {
                    let c = merge[u] + x.d(u, v);
                    if c < dp[mask][v] {
                        dp[mask][v] = c;
                        hop[mask][v] = u;
                    }
                }
            }
            split[mask] = best_split;
        }
        SteinerTable { terms: terms.to_vec(), dp, hop, split }
    }

    /// Steiner length of the terminal subset `mask`.
    fn cost(&self, mask: usize) -> f64 {
        let low = mask.trailing_zeros() as usize;
        self.dp[mask][self.terms[low]]
    }

    fn edges(&self, mask: usize, out: &mut Vec<(usize, usize)>) {
        let low = mask.trailing_zeros() as usize;
        self.collect(mask, self.terms[low], out);
    }

    fn collect(&self, mask: usize, v: usize, out: &mut Vec<(usize, usize)>) {
        let u = self.hop[mask][v];
        if u != v {
            out.push((u, v));
        }
        if mask.count_ones() == 1 {
            return;
        }
        let s = self.split[mask][u];
        self.collect(s, u, out);
        self.collect(mask ^ s, u, out);
    }
}

/// Exact minimum Steiner tree on `terminals` with Steiner points from `X`.
/// Returns `(∞, [])` when the terminals span several components.
pub fn steiner_tree(x: &DistanceSpace, terminals: &[usize]) -> Result<(f64, Vec<(usize, usize)>), HyperError> {
    x.check_indices(terminals)?;
    let terms = sorted_unique(terminals);
    if terms.len() > MAX_TERMINALS {
        return Err(HyperError::TooManyTerminals(terms.len()));
    }
    if terms.len() <= 1 {
        return Ok((0.0, Vec::new()));
    }
    let table = SteinerTable::build(x, &terms);
    let full = (1 << terms.len()) - 1;
    let cost = table.cost(full);
    if cost.is_infinite() {
        return Ok((cost, Vec::new()));
    }
    let mut edges = Vec::new();
    table.edges(full, &mut edges);
    let g = SpanningGraph::new(terms, edges);
    Ok((cost, g.edges))
}

/// Best partition of the terminal set into blocks meeting both `a` and `b`.
fn partition_min(n_terms: usize, valid: &dyn Fn(usize) -> bool, cost: &dyn Fn(usize) -> f64) -> (f64, Vec<usize>) {
    let full = (1usize << n_terms) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    let mut choice = vec![0usize; full + 1];
    best[0] = 0.0;
    for s in 1..=full {
        let low = s & s.wrapping_neg();
        let rest = s ^ low;
        let mut sub = rest;
        loop {
            let block = sub | low;
            if valid(block) {
                let c = cost(block) + best[s ^ block];
                if c < best[s] {
                    best[s] = c;
                    choice[s] = block;
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    let mut blocks = Vec::new();
    let mut s = full;
    while s != 0 && best[full].is_finite() {
        blocks.push(choice[s]);
        s ^= choice[s];
    }
    (best[full], blocks)
}

/// Sorted `a`, sorted `b`, the terminal list `a ∪ b`, and the masks of `a` and `b` in it.
type Terminals = (Vec<usize>, Vec<usize>, Vec<usize>, usize, usize);

fn terminal_setup(x: &DistanceSpace, a: &[usize], b: &[usize]) -> Result<Terminals, HyperError> {
    x.check_indices(a)?;
    x.check_indices(b)?;
    let (a, b) = (sorted_unique(a), sorted_unique(b));
    let mut terms: Vec<usize> = a.iter().chain(&b).copied().collect();
    terms = sorted_unique(&terms);
    if terms.len() > MAX_TERMINALS {
        return Err(HyperError::TooManyTerminals(terms.len()));
    }
    let mask_of = |s: &[usize]| s.iter().map(|v| 1usize << terms.binary_search(v).unwrap()).fold(0, |m, b| m | b);
    let (am, bm) = (mask_of(&a), mask_of(&b));
    Ok((a, b, terms, am, bm))
}

/// `d^1_{HX}(a,b)` with an optimal witness graph.
pub fn d1_hyperspace(x: &DistanceSpace, a: &[usize], b: &[usize]) -> Result<(ExtReal, Option<SpanningGraph>), HyperError> {
    let (a, b, terms, am, bm) = terminal_setup(x, a, b)?;
    if a == b {
        return Ok((ExtReal::ZERO, Some(SpanningGraph::new(terms, Vec::new()))));
    }
    if a.is_empty() || b.is_empty() {
        return Ok((ExtReal::INFINITY, None));
    }
    let table = SteinerTable::build(x, &terms);
    let valid = |blk: usize| blk & am != 0 && blk & bm != 0;
    let (total, blocks) = partition_min(terms.len(), &valid, &|blk| table.cost(blk));
    if total.is_infinite() {
        return Ok((ExtReal::INFINITY, None));
    }
    let mut edges = Vec::new();
    for blk in blocks {
        table.edges(blk, &mut edges);
    }
    let graph = SpanningGraph::new(terms, edges);
    Ok((ExtReal::finite(graph.length(x).min(total).max(0.0)), Some(graph)))
}

fn mst_length(x: &DistanceSpace, verts: &[usize]) -> f64 {
    if verts.len() <= 1 {
        return 0.0;
    }
    let mut in_tree = vec![false; verts.len()];
    let mut key = vec![f64::INFINITY; verts.len()];
    key[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..verts.len() {
        let i = (0..verts.len()).filter(|&i| !in_tree[i]).min_by(|&i, &j| key[i].total_cmp(&key[j])).unwrap();
        in_tree[i] = true;
        total += key[i];
        for j in 0..verts.len() {
            if !in_tree[j] {
                key[j] = key[j].min(x.d(verts[i], verts[j]));
            }
        }
    }
    total
}

/// Upper bound for `d^1_{HX}` using spanning trees without Steiner points.
pub fn d1_upper_mst(x: &DistanceSpace, a: &[usize], b: &[usize]) -> Result<ExtReal, HyperError> {
    let (a, b, terms, am, bm) = terminal_setup(x, a, b)?;
    if a == b {
        return Ok(ExtReal::ZERO);
    }
    if a.is_empty() || b.is_empty() {
        return Ok(ExtReal::INFINITY);
    }
    let valid = |blk: usize| blk & am != 0 && blk & bm != 0;
    let cost = |blk: usize| {
        let verts: Vec<usize> = (0..terms.len()).filter(|i| blk >> i & 1 == 1).map(|i| terms[i]).collect();
        mst_length(x, &verts)
    };
    Ok(ExtReal::new(partition_min(terms.len(), &valid, &cost).0).expect("lengths are nonnegative"))
}

/// One step `(c, f, g)` of a hyperspace chain with `c ⊆ {0, …, arity−1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperStep {
    pub arity: usize,
    pub carrier: Vec<usize>,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl HyperStep {
    /// Moves one point: images `base ∪ {from}` and `base ∪ {to}`.
    fn shift(base: &[usize], from: usize, to: usize) -> Self {
        let mut f = base.to_vec();
        let mut g = base.to_vec();
        f.push(from);
        g.push(to);
        HyperStep { arity: f.len(), carrier: (0..f.len()).collect(), f, g }
    }

    fn with_fixed(&self, v: usize) -> Self {
        let mut s = self.clone();
        s.carrier.push(s.arity);
        s.f.push(v);
        s.g.push(v);
        s.arity += 1;
        s
    }

    fn images(&self) -> (Vec<usize>, Vec<usize>) {
        (sorted_unique(&self.carrier.iter().map(|&i| self.f[i]).collect::<Vec<_>>()), sorted_unique(&self.carrier.iter().map(|&i| self.g[i]).collect::<Vec<_>>()))
    }
}

/// Checks that the steps link `a` to `b` in `HX` and returns `Σ d^1(f_i, g_i)`.
pub fn validate_hyper_chain(x: &DistanceSpace, a: &[usize], b: &[usize], steps: &[HyperStep]) -> Result<f64, HyperError> {
    let mut cur = sorted_unique(a);
    let mut cost = 0.0;
    for (step, s) in steps.iter().enumerate() {
        let bad = |reason: &str| HyperError::InvalidChain { step, reason: reason.into() };
        if s.f.len() != s.arity || s.g.len() != s.arity || s.carrier.iter().any(|&i| i >= s.arity) {
            return Err(bad("malformed step"));
        }
        x.check_indices(&s.f)?;
        x.check_indices(&s.g)?;
        let (from, to) = s.images();
        if from != cur {
            return Err(bad("does not start at the previous image"));
        }
        cur = to;
        cost += s.f.iter().zip(&s.g).map(|(&u, &v)| x.d(u, v)).sum::<f64>();
    }
    if cur != sorted_unique(b) {
        return Err(HyperError::InvalidChain { step: steps.len(), reason: "does not end at b".into() });
    }
    Ok(cost)
}

/// Drops edges (and the isolated vertices outside `a ∪ b` they leave behind)
/// while the graph stays in `Γ(a,b)`.
fn minimize(g: &SpanningGraph, a: &[usize], b: &[usize]) -> SpanningGraph {
    let mut cur = g.clone();
    let prune = |edges: Vec<(usize, usize)>, verts: &[usize]| {
        let keep: Vec<usize> = verts
            .iter()
            .copied()
            .filter(|v| a.contains(v) || b.contains(v) || edges.iter().any(|&(p, q)| p == *v || q == *v))
            .collect();
        SpanningGraph::new(keep, edges)
    };
    cur = prune(cur.edges.clone(), &cur.vertices);
    let mut i = 0;
    while i < cur.edges.len() {
        let mut edges = cur.edges.clone();
        edges.remove(i);
        let cand = prune(edges, &cur.vertices);
        if cand.links(a, b) {
            cur = cand;
            i = 0;
        } else {
            i += 1;
        }
    }
    cur
}

/// Converts a graph in `Γ(a,b)` into an `(a,b)`-linking chain in `HX` of
/// `d^1` cost at most `ℓ(Γ)`, by repeatedly detaching a pendant vertex.
pub fn graph_to_chain(a: &[usize], b: &[usize], graph: &SpanningGraph) -> Result<Vec<HyperStep>, HyperError> {
    let (a, b) = (sorted_unique(a), sorted_unique(b));
    if !graph.links(&a, &b) {
        return Err(HyperError::InvalidGraph("graph does not link a and b".into()));
    }
    chain_rec(&a, &b, graph)
}

fn remove_vertex(g: &SpanningGraph, v: usize) -> SpanningGraph {
    let verts = g.vertices.iter().copied().filter(|&w| w != v).collect();
    let edges = g.edges.iter().copied().filter(|&(p, q)| p != v && q != v).collect();
    SpanningGraph::new(verts, edges)
}

fn without(s: &[usize], v: usize) -> Vec<usize> {
    s.iter().copied().filter(|&w| w != v).collect()
}

fn with(s: &[usize], v: usize) -> Vec<usize> {
    let mut t = s.to_vec();
    t.push(v);
    sorted_unique(&t)
}

fn chain_rec(a: &[usize], b: &[usize], graph: &SpanningGraph) -> Result<Vec<HyperStep>, HyperError> {
    if a == b {
        return Ok(Vec::new());
    }
    let g = minimize(graph, a, b);
    let degree = |v: usize| g.edges.iter().filter(|&&(p, q)| p == v || q == v).count();
    let v = *g
        .vertices
        .iter()
        .find(|&&v| degree(v) == 1)
        .ok_or_else(|| HyperError::InvalidGraph("no pendant vertex in a graph linking distinct sets".into()))?;
    let &(p, q) = g.edges.iter().find(|&&(p, q)| p == v || q == v).unwrap();
    let u = if p == v { q } else { p };
    let rest = remove_vertex(&g, v);
    let (in_a, in_b) = (a.contains(&v), b.contains(&v));
    let fixed = |steps: Vec<HyperStep>| steps.iter().map(|s| s.with_fixed(v)).collect::<Vec<_>>();
    match (in_a, in_b) {
        (false, true) => {
            let b2 = with(&without(b, v), u);
            let mut steps = chain_rec(a, &b2, &rest)?;
            steps.push(HyperStep::shift(&without(b, v), u, v));
            Ok(steps)
        }
        (true, false) => {
            let a2 = with(&without(a, v), u);
            let mut steps = vec![HyperStep::shift(&without(a, v), v, u)];
            steps.extend(chain_rec(&a2, b, &rest)?);
            Ok(steps)
        }
        (true, true) => {
            let comp = g.components().into_iter().find(|c| c.contains(&v)).unwrap();
            let others_a = comp.iter().any(|w| *w != v && a.contains(w));
            let others_b = comp.iter().any(|w| *w != v && b.contains(w));
            let (a1, b1) = (without(a, v), without(b, v));
            match (others_a, others_b) {
                (true, true) => Ok(fixed(chain_rec(&a1, &b1, &rest)?)),
                (false, false) => {
                    let mut h = g.clone();
                    for w in &comp {
                        h = remove_vertex(&h, *w);
                    }
                    Ok(fixed(chain_rec(&a1, &b1, &h)?))
                }
                (true, false) => {
                    let mut steps = fixed(chain_rec(&a1, &with(&b1, u), &rest)?);
                    if !b.contains(&u) {
                        steps.push(HyperStep::shift(b, u, v));
                    }
                    Ok(steps)
                }
                (false, true) => {
                    let mut steps = Vec::new();
                    if !a.contains(&u) {
                        steps.push(HyperStep::shift(a, v, u));
                    }
                    steps.extend(fixed(chain_rec(&with(&a1, u), &b1, &rest)?));
                    Ok(steps)
                }
            }
        }
        (false, false) => Err(HyperError::InvalidGraph("pendant vertex outside a ∪ b".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::euclidean_import;

    fn triangle_centroid() -> DistanceSpace {
        let h = 3f64.sqrt() / 2.0;
        euclidean_import(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h], vec![0.5, h / 3.0]]).unwrap()
    }

    #[test]
    fn steiner_examples() {
        let x = triangle_centroid();
        assert_eq!(steiner_tree(&x, &[2]).unwrap().0, 0.0);
        assert!((steiner_tree(&x, &[0, 1]).unwrap().0 - 1.0).abs() < 1e-12);
        let (len, edges) = steiner_tree(&x, &[0, 1, 2]).unwrap();
        assert!((len - 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(edges, vec![(0, 3), (1, 3), (2, 3)]);
    }

    #[test]
    fn d1_examples() {
        let seg = euclidean_import(&[vec![0.0], vec![1.0]]).unwrap();
        let (d, g) = d1_hyperspace(&seg, &[0], &[1]).unwrap();
        assert_eq!(d.get(), 1.0);
        assert_eq!(g.unwrap().edges, vec![(0, 1)]);
        assert_eq!(d1_hyperspace(&seg, &[0, 1], &[1, 0]).unwrap().0, ExtReal::ZERO);
        assert_eq!(d1_hyperspace(&seg, &[], &[1]).unwrap().0, ExtReal::INFINITY);
        let x = triangle_centroid();
        let (d, g) = d1_hyperspace(&x, &[0, 1, 2], &[3]).unwrap();
        assert!((d.get() - 3f64.sqrt()).abs() < 1e-9);
        g.unwrap().validate(&x, &[0, 1, 2], &[3], d.get()).unwrap();
        assert!((d1_upper_mst(&x, &[0, 1, 2], &[3]).unwrap().get() - 3f64.sqrt()).abs() < 1e-9);
        assert_eq!(d1_upper_mst(&seg, &[0], &[1]).unwrap().get(), 1.0);
    }

    #[test]
    fn mst_bound_exceeds_steiner_without_centroid_terminal() {
        let x = triangle_centroid();
        let (d, _) = d1_hyperspace(&x, &[0, 1], &[2]).unwrap();
        let m = d1_upper_mst(&x, &[0, 1], &[2]).unwrap();
        assert!((d.get() - 3f64.sqrt()).abs() < 1e-9);
        assert!((m.get() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn graph_chain_round_trip() {
        let x = triangle_centroid();
        for (a, b) in [(vec![0, 1, 2], vec![3]), (vec![0], vec![1, 2]), (vec![0, 3], vec![0, 1]), (vec![1], vec![2])] {
            let (d, g) = d1_hyperspace(&x, &a, &b).unwrap();
            let g = g.unwrap();
            let steps = graph_to_chain(&a, &b, &g).unwrap();
            let cost = validate_hyper_chain(&x, &a, &b, &steps).unwrap();
            assert!(cost <= g.length(&x) + 1e-9, "{cost} > {}", d.get());
        }
    }
}
