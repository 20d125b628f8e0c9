//! Exact `d^p_{FX}` for finitary functors of finite degree.
//!
//! With `n = max(1, deg F)`, every pair `f, g ∈ Xⁿ` and carrier element
//! `c ∈ Fn` gives an edge between `Ff(c)` and `Fg(c)` of weight `d^p_{Xⁿ}(f,g)`. A linking
//! chain is a walk in this graph and its cost is the walk length, so the
//! distance is a shortest-path distance and the path is a chain certificate.

mod functors;
pub mod oracle;

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use serde::Serialize;
use thiserror::Error;

pub use functors::{BuiltinFunctor, Element, Functor};

use crate::metric_core::{DistanceSpace, ExtReal, MetricError, PNorm};

/// Largest `|X|^n` the engine accepts.
pub const MAX_TUPLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("empty space for a functor of positive degree")]
    EmptySpace,
    #[error("UnknownElement: {0}")]
    UnknownElement(String),
    #[error("EngineLimit: |X|^n = {tuples} exceeds {MAX_TUPLES}")]
    EngineLimit { tuples: usize },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One triple `(c, f, g)` of a linking chain, serialized as `[c, f, g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainStep {
    pub carrier: Element,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
}

impl Serialize for ChainStep {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.carrier, &self.f, &self.g).serialize(s)
    }
}

/// A linking chain from `source` to `target` with its ℓ^p cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkingChain {
    pub steps: Vec<ChainStep>,
    pub cost: f64,
}

/// Reasons a chain fails to certify a distance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("step {0} does not start where the previous step ended")]
    Broken(usize),
    #[error("chain ends at the wrong element")]
    WrongTarget,
    #[error("step {0} uses a carrier element outside F(n) or tuples of the wrong length")]
    BadStep(usize),
    #[error("stated cost {stated} differs from recomputed cost {actual}")]
    CostMismatch { stated: f64, actual: f64 },
}

impl LinkingChain {
    /// Re-checks the chain against the functor and returns its recomputed cost.
    pub fn validate<F: Functor + ?Sized>(
        &self,
        functor: &F,
        x: &DistanceSpace,
        p: PNorm,
        source: &Element,
        target: &Element,
    ) -> Result<f64, ChainError> {
        let n = functor.degree().max(1);
        let mut cur = source.clone();
        let mut cost = 0.0;
        for (i, s) in self.steps.iter().enumerate() {
            let ok_len = s.f.len() == n && s.g.len() == n;
            let ok_idx = s.f.iter().chain(&s.g).all(|&v| v < x.len());
            if !ok_len || !ok_idx || !functor.contains(&s.carrier, n) {
                return Err(ChainError::BadStep(i));
            }
            if functor.map(&s.carrier, &s.f) != cur {
                return Err(ChainError::Broken(i));
            }
            cur = functor.map(&s.carrier, &s.g);
            cost += p.combine(s.f.iter().zip(&s.g).map(|(&a, &b)| x.d(a, b)));
        }
        if &cur != target {
            return Err(ChainError::WrongTarget);
        }
        if (cost - self.cost).abs() > 1e-9 * (1.0 + cost.abs()) {
            return Err(ChainError::CostMismatch { stated: self.cost, actual: cost });
        }
        Ok(cost)
    }
}

/// The chain graph of `F` over `X` for a fixed exponent.
pub struct FunctorSpace<'a, F: Functor + ?Sized> {
    functor: &'a F,
    space: &'a DistanceSpace,
    p: PNorm,
    arity: usize,
    carrier: Vec<Element>,
    tuples: Vec<usize>,
    tuple_count: usize,
    elements: Vec<Element>,
    index: HashMap<Element, usize>,
    image: Vec<Vec<u32>>,
    preimages: Vec<Vec<(u32, u32)>>,
}

#[derive(Clone, Copy)]
struct Pred {
    from: u32,
    carrier: u32,
    f: u32,
    g: u32,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a, F: Functor + ?Sized> FunctorSpace<'a, F> {
    pub fn new(functor: &'a F, space: &'a DistanceSpace, p: PNorm) -> Result<Self, EngineError> {
        let degree = functor.degree();
        if space.is_empty() {
            if degree > 0 {
                return Err(EngineError::EmptySpace);
            }
            let elements = functor.carrier(0);
            let index = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
            let preimages = vec![Vec::new(); elements.len()];
            return Ok(FunctorSpace {
                functor,
                space,
                p,
                arity: 1,
                carrier: Vec::new(),
                tuples: Vec::new(),
                tuple_count: 0,
                elements,
                index,
                image: Vec::new(),
                preimages,
            });
        }
        let arity = degree.max(1);
        let m = space.len();
        let tuple_count = m.checked_pow(arity as u32).filter(|&t| t <= MAX_TUPLES).ok_or(EngineError::EngineLimit {
            tuples: m.saturating_pow(arity as u32),
        })?;
        let mut tuples = Vec::with_capacity(tuple_count * arity);
        for t in 0..tuple_count {
            let mut r = t;
            for _ in 0..arity {
                tuples.push(r % m);
                r /= m;
            }
        }
        let carrier = functor.carrier(arity);
        let mut raw: Vec<Vec<Element>> = Vec::with_capacity(carrier.len());
        for c in &carrier {
            raw.push((0..tuple_count).map(|t| functor.map(c, &tuples[t * arity..(t + 1) * arity])).collect());
        }
        let mut elements: Vec<Element> = raw.iter().flatten().cloned().collect();
        elements.sort();
        elements.dedup();
        let index: HashMap<Element, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let image: Vec<Vec<u32>> = raw.iter().map(|row| row.iter().map(|e| index[e] as u32).collect()).collect();
        let mut preimages = vec![Vec::new(); elements.len()];
        for (c, row) in image.iter().enumerate() {
            for (t, &e) in row.iter().enumerate() {
                preimages[e as usize].push((c as u32, t as u32));
            }
        }
        Ok(FunctorSpace { functor, space, p, arity, carrier, tuples, tuple_count, elements, index, image, preimages })
    }

    /// Elements of `FX` in canonical order.
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn functor(&self) -> &F {
        self.functor
    }

    pub fn index_of(&self, e: &Element) -> Result<usize, EngineError> {
        self.index.get(e).copied().ok_or_else(|| EngineError::UnknownElement(e.to_string()))
    }

    fn tuple(&self, t: usize) -> &[usize] {
        &self.tuples[t * self.arity..(t + 1) * self.arity]
    }

    fn weight(&self, s: usize, t: usize) -> f64 {
        let (f, g) = (self.tuple(s), self.tuple(t));
        self.p.combine(f.iter().zip(g).map(|(&a, &b)| self.space.d(a, b)))
    }

    /// Dijkstra from `source`; stops once `target` is settled when given.
    fn search(&self, source: usize, target: Option<usize>) -> (Vec<f64>, Vec<Option<Pred>>) {
        let k = self.elements.len();
        let mut dist = vec![f64::INFINITY; k];
        let mut pred: Vec<Option<Pred>> = vec![None; k];
        let mut done = vec![false; k];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse(HeapItem(0.0, source)));
        while let Some(Reverse(HeapItem(du, u))) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if Some(u) == target {
                break;
            }
            for &(c, s) in &self.preimages[u] {
                let row = &self.image[c as usize];
                for t in 0..self.tuple_count {
                    let v = row[t] as usize;
                    if t == s as usize || done[v] {
                        continue;
                    }
                    let w = self.weight(s as usize, t);
                    let nd = du + w;
                    if nd < dist[v] {
                        dist[v] = nd;
                        pred[v] = Some(Pred { from: u as u32, carrier: c, f: s, g: t as u32 });
                        heap.push(Reverse(HeapItem(nd, v)));
                    }
                }
            }
        }
        (dist, pred)
    }

    fn chain_to(&self, target: usize, dist: &[f64], pred: &[Option<Pred>]) -> LinkingChain {
        let mut steps = Vec::new();
        let mut v = target;
        while let Some(pr) = pred[v] {
            steps.push(ChainStep {
                carrier: self.carrier[pr.carrier as usize].clone(),
                f: self.tuple(pr.f as usize).to_vec(),
                g: self.tuple(pr.g as usize).to_vec(),
            });
            v = pr.from as usize;
        }
        steps.reverse();
        LinkingChain { steps, cost: dist[target] }
    }

    /// `d^p_{FX}(a,b)` with a chain certificate when finite.
    pub fn distance(&self, a: &Element, b: &Element) -> Result<(ExtReal, Option<LinkingChain>), EngineError> {
        let (s, t) = (self.index_of(a)?, self.index_of(b)?);
        let (dist, pred) = self.search(s, Some(t));
        if dist[t].is_infinite() {
            return Ok((ExtReal::INFINITY, None));
        }
        Ok((ExtReal::finite(dist[t]), Some(self.chain_to(t, &dist, &pred))))
    }

    /// All-pairs distances, indexed like [`Self::elements`]. Exactly symmetric.
    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let k = self.elements.len();
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            let (dist, _) = self.search(i, None);
            for j in (i + 1)..k {
                out[i][j] = dist[j];
                out[j][i] = dist[j];
            }
        }
        out
    }

    /// `FX` as a [`DistanceSpace`] labeled by element display strings.
    pub fn to_space(&self) -> Result<DistanceSpace, MetricError> {
        let m = self.distance_matrix();
        let labels = self.elements.iter().map(|e| e.to_string()).collect();
        DistanceSpace::validate(Some(labels), &m)
    }
}

/// Deduplicated `{Ff(c) : c ∈ Fn, f ∈ Xⁿ}` in canonical order.
pub fn enumerate_elements<F: Functor + ?Sized>(functor: &F, x: &DistanceSpace) -> Result<Vec<Element>, EngineError> {
    Ok(FunctorSpace::new(functor, x, PNorm::ONE)?.elements)
}

/// `d^p_{FX}(a,b)` and a certificate chain (absent when the distance is `∞`).
pub fn dp_distance<F: Functor + ?Sized>(
    functor: &F,
    x: &DistanceSpace,
    p: PNorm,
    a: &Element,
    b: &Element,
) -> Result<(ExtReal, Option<LinkingChain>), EngineError> {
    FunctorSpace::new(functor, x, p)?.distance(a, b)
}

/// All-pairs `d^p_{FX}` together with the element list indexing it.
pub fn distance_matrix<F: Functor + ?Sized>(
    functor: &F,
    x: &DistanceSpace,
    p: PNorm,
) -> Result<(Vec<Element>, Vec<Vec<f64>>), EngineError> {
    let fs = FunctorSpace::new(functor, x, p)?;
    let m = fs.distance_matrix();
    Ok((fs.elements, m))
}

/// Lipschitz constant of a map given by `ratio(i, j) = (d_X(i,j), d_Y(…))`
/// pairs: the sup of `d_Y/d_X` over pairs at finite `d_X`, with `0/0 = 0`.
pub fn lipschitz_constant<I: IntoIterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    pairs
        .into_iter()
        .filter(|(dx, _)| dx.is_finite())
        .map(|(dx, dy)| if dy == 0.0 { 0.0 } else if dx == 0.0 { f64::INFINITY } else { dy / dx })
        .fold(0.0, f64::max)
}

/// `(Lip(f), Lip(Ff))` for a map `f: X → Y` given by its index table.
pub fn induced_map_lipschitz<F: Functor + ?Sized>(
    functor: &F,
    x: &DistanceSpace,
    y: &DistanceSpace,
    f: &[usize],
    p: PNorm,
) -> Result<(f64, f64), EngineError> {
    if f.len() != x.len() {
        return Err(MetricError::LengthMismatch { left: f.len(), right: x.len() }.into());
    }
    y.check_indices(f)?;
    let lip_f = lipschitz_constant(
        (0..x.len()).flat_map(|i| (0..x.len()).map(move |j| (i, j))).map(|(i, j)| (x.d(i, j), y.d(f[i], f[j]))),
    );
    let fx = FunctorSpace::new(functor, x, p)?;
    let fy = FunctorSpace::new(functor, y, p)?;
    let (mx, my) = (fx.distance_matrix(), fy.distance_matrix());
    let images: Vec<usize> = fx.elements().iter().map(|e| fy.index_of(&functor.map(e, f))).collect::<Result<_, _>>()?;
    let k = images.len();
    let lip_ff = lipschitz_constant(
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| (mx[i][j], my[images[i]][images[j]])),
    );
    Ok((lip_f, lip_ff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::euclidean_import;

    fn ex1_x() -> DistanceSpace {
        let r = 3f64.sqrt();
        euclidean_import(&[vec![-5.0, r], vec![-5.0, -r], vec![5.0, r], vec![5.0, -r]]).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let three = euclidean_import(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        assert_eq!(enumerate_elements(&BuiltinFunctor::CappedHyperspace(2), &three).unwrap().len(), 7);
        let two = euclidean_import(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(enumerate_elements(&BuiltinFunctor::Power(2), &two).unwrap().len(), 4);
        assert_eq!(enumerate_elements(&BuiltinFunctor::NonemptyPairs, &ex1_x()).unwrap().len(), 10);
        let empty = DistanceSpace::validate(None, &[]).unwrap();
        assert_eq!(enumerate_elements(&BuiltinFunctor::Power(1), &empty), Err(EngineError::EmptySpace));
        assert_eq!(enumerate_elements(&BuiltinFunctor::CappedHyperspace(0), &empty).unwrap(), vec![Element::Empty]);
    }

    #[test]
    fn equal_elements_have_empty_chain() {
        let x = ex1_x();
        let a = Element::set([0, 1]);
        let (d, c) = dp_distance(&BuiltinFunctor::NonemptyPairs, &x, PNorm::ONE, &a, &a).unwrap();
        assert_eq!(d, ExtReal::ZERO);
        assert!(c.unwrap().steps.is_empty());
    }

    #[test]
    fn ex1_value_and_certificate() {
        let x = ex1_x();
        let (a, b) = (Element::set([0, 1]), Element::set([2, 3]));
        // p = 1: collapse, translate, expand. p > 1: move both points at once.
        let r = 3f64.sqrt();
        for (p, want) in [(PNorm::ONE, 10.0 + 4.0 * r), (PNorm::TWO, 10.0 * 2f64.sqrt()), (PNorm::Infinity, 10.0)] {
            let (d, chain) = dp_distance(&BuiltinFunctor::NonemptyPairs, &x, p, &a, &b).unwrap();
            assert!((d.get() - want).abs() < 1e-9, "p={p}: {d}");
            let cost = chain.unwrap().validate(&BuiltinFunctor::NonemptyPairs, &x, p, &a, &b).unwrap();
            assert!((cost - d.get()).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_element_is_rejected() {
        let x = ex1_x();
        let e = dp_distance(&BuiltinFunctor::NonemptyPairs, &x, PNorm::ONE, &Element::set([0, 9]), &Element::set([0]));
        assert!(matches!(e, Err(EngineError::UnknownElement(_))));
    }

    #[test]
    fn matrix_examples() {
        let one = DistanceSpace::validate(None, &[vec![0.0]]).unwrap();
        let (_, m) = distance_matrix(&BuiltinFunctor::NonemptyPairs, &one, PNorm::ONE).unwrap();
        assert_eq!(m, vec![vec![0.0]]);
        let seg = euclidean_import(&[vec![0.0], vec![1.0]]).unwrap();
        let (els, m) = distance_matrix(&BuiltinFunctor::SymDiffPairs, &seg, PNorm::ONE).unwrap();
        assert_eq!(els, vec![Element::Empty, Element::set([0, 1])]);
        assert!(m[0][1].is_finite());
        let apart = DistanceSpace::validate(None, &[vec![0.0, f64::INFINITY], vec![f64::INFINITY, 0.0]]).unwrap();
        let (_, m) = distance_matrix(&BuiltinFunctor::CappedHyperspace(1), &apart, PNorm::ONE).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(v.is_infinite(), i != j);
            }
        }
    }

    #[test]
    fn lipschitz_examples() {
        let x = euclidean_import(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let (lf, lff) = induced_map_lipschitz(&BuiltinFunctor::CappedHyperspace(2), &x, &x, &[0, 1, 2], PNorm::ONE).unwrap();
        assert_eq!(lf, 1.0);
        assert!(lff <= 1.0 + 1e-12);
        let pt = DistanceSpace::validate(None, &[vec![0.0]]).unwrap();
        let (lf, lff) = induced_map_lipschitz(&BuiltinFunctor::CappedHyperspace(2), &x, &pt, &[0, 0, 0], PNorm::ONE).unwrap();
        assert_eq!((lf, lff), (0.0, 0.0));
    }
}
