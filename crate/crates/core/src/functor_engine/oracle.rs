//! Brute-force minimum over linking chains, independent of the graph search.
//!
//! The search enumerates chains depth first, one triple at a time, with
//! branch-and-bound on the best complete chain. Among triples leaving the
//! current element towards the same next element only the cheapest is kept,
//! which never changes the minimum.
//!
//! Two chain classes are available. [`ChainClass::LoopFree`] forbids revisiting
//! an element; cutting the loop out of a chain that revisits one gives a
//! valid chain of no larger cost, so the minimum over loop-free chains of
//! length `≤ |FX| − 1` is exact. [`ChainClass::VeryShort`] instead forbids
//! repeating a carrier element, which bounds the length by `|Fn|` but is not
//! exact in general: the optimal chain may need the same carrier twice.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::functors::{Element, Functor};
use crate::metric_core::{DistanceSpace, ExtReal, PNorm};

/// Default cap on enumerated chain prefixes.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("BudgetExceeded after {0} chain prefixes")]
    BudgetExceeded(u64),
    #[error("carrier of {0} elements is too large for the oracle")]
    CarrierTooLarge(usize),
}

/// Which chains the oracle enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChainClass {
    /// No element of `FX` visited twice.
    LoopFree,
    /// No carrier element of `Fn` used twice.
    VeryShort,
}

struct Search<'a, F: Functor + ?Sized> {
    functor: &'a F,
    x: &'a DistanceSpace,
    p: PNorm,
    class: ChainClass,
    carrier: Vec<Element>,
    tuples: Vec<Vec<usize>>,
    target: Element,
    max_len: usize,
    best: f64,
    nodes: u64,
    budget: u64,
}

impl<F: Functor + ?Sized> Search<'_, F> {
    /// Cheapest single triple from `cur` to each reachable element, keyed by
    /// carrier too when carriers must stay distinct.
    fn moves(&self, cur: &Element, used: u64) -> BTreeMap<(Element, usize), f64> {
        let mut out: BTreeMap<(Element, usize), f64> = BTreeMap::new();
        for (c, a) in self.carrier.iter().enumerate() {
            if used >> c & 1 == 1 {
                continue;
            }
            let key_c = if self.class == ChainClass::VeryShort { c } else { 0 };
            for f in &self.tuples {
                if &self.functor.map(a, f) != cur {
                    continue;
                }
                for g in &self.tuples {
                    if f == g {
                        continue;
                    }
                    let w = self.p.combine(f.iter().zip(g).map(|(&u, &v)| self.x.d(u, v)));
                    if w.is_infinite() {
                        continue;
                    }
                    let slot = out.entry((self.functor.map(a, g), key_c)).or_insert(f64::INFINITY);
                    *slot = slot.min(w);
                }
            }
        }
        out
    }

    fn dfs(&mut self, cur: &Element, used: u64, len: usize, cost: f64, path: &mut Vec<Element>) -> Result<(), OracleError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(OracleError::BudgetExceeded(self.nodes));
        }
        let mut moves: Vec<_> = self.moves(cur, used).into_iter().collect();
        moves.sort_by(|a, b| a.1.total_cmp(&b.1));
        for ((next, c), w) in moves {
            let total = cost + w;
            if total >= self.best || (self.class == ChainClass::LoopFree && path.contains(&next)) {
                continue;
            }
            if next == self.target {
                self.best = total;
            } else if len + 1 < self.max_len {
                let used = if self.class == ChainClass::VeryShort { used | 1 << c } else { used };
                path.push(next.clone());
                self.dfs(&next, used, len + 1, total, path)?;
                path.pop();
            }
        }
        Ok(())
    }
}

/// Minimum cost over chains of the given class with at most `max_len`
/// triples, each of arity `max(1, deg F)`. `∞` when none reaches `b`.
#[allow(clippy::too_many_arguments)]
pub fn chain_oracle<F: Functor + ?Sized>(
    functor: &F,
    x: &DistanceSpace,
    p: PNorm,
    a: &Element,
    b: &Element,
    max_len: usize,
    class: ChainClass,
    budget: u64,
) -> Result<ExtReal, OracleError> {
    if a == b {
        return Ok(ExtReal::ZERO);
    }
    let n = functor.degree().max(1);
    let carrier = functor.carrier(n);
    if carrier.len() > 64 {
        return Err(OracleError::CarrierTooLarge(carrier.len()));
    }
    let mut tuples = vec![Vec::new()];
    for _ in 0..n {
        tuples = tuples
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..x.len()).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    let mut s = Search {
        functor,
        x,
        p,
        class,
        carrier,
        tuples,
        target: b.clone(),
        max_len,
        best: f64::INFINITY,
        nodes: 0,
        budget,
    };
    let mut path = vec![a.clone()];
    s.dfs(a, 0, 0, 0.0, &mut path)?;
    Ok(ExtReal::new(s.best).expect("chain costs are nonnegative"))
}
