//! Finitely supported functions `X → Z_m` and their distances.
//!
//! `d^1` on `F(X, Z_m)` is the norm of `a − b`: the cheapest way to write it as
//! a sum of dipoles `g(δ_x − δ_y)` costing `d(x,y)` each. It is found by
//! Dijkstra over the states `Z_m^X`, searching from `a − b` down to `0`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::metric_core::{DistanceSpace, ExtReal, MetricError};

/// Largest state graph `m^|X|` searched exactly.
pub const MAX_STATES: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupError {
    #[error("ModulusMismatch({0} vs {1})")]
    ModulusMismatch(u32, u32),
    #[error("modulus {0} is below 2")]
    BadModulus(u32),
    #[error("function has {found} values for a space of {expected} points")]
    LengthMismatch { expected: usize, found: usize },
    #[error("OddSupport({0})")]
    OddSupport(usize),
    #[error("NotAGenerator({g} in Z_{m})")]
    NotAGenerator { g: u32, m: u32 },
    #[error("NotInF0")]
    NotInF0,
    #[error("state graph of {states} states exceeds {MAX_STATES}")]
    TooManyStates { states: u64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// `φ ∈ F(X, Z_m)` as a dense residue table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FinSupportFunction {
    modulus: u32,
    values: Vec<u32>,
}

impl FinSupportFunction {
    pub fn new(modulus: u32, values: Vec<i64>) -> Result<Self, GroupError> {
        if modulus < 2 {
            return Err(GroupError::BadModulus(modulus));
        }
        let m = modulus as i64;
        Ok(FinSupportFunction { modulus, values: values.into_iter().map(|v| v.rem_euclid(m) as u32).collect() })
    }

    pub fn zero(modulus: u32, n: usize) -> Self {
        FinSupportFunction { modulus, values: vec![0; n] }
    }

    /// `δ^g_x`.
    pub fn delta(modulus: u32, n: usize, x: usize, g: i64) -> Self {
        let mut f = Self::zero(modulus, n);
        f.values[x] = g.rem_euclid(modulus as i64) as u32;
        f
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != 0).collect()
    }

    pub fn total_sum(&self) -> u32 {
        self.values.iter().fold(0, |s, &v| (s + v) % self.modulus)
    }

    /// Sums over each component of `x`, in component order.
    pub fn component_sums(&self, x: &DistanceSpace) -> Vec<u32> {
        x.components().iter().map(|c| c.iter().fold(0, |s, &i| (s + self.values[i]) % self.modulus)).collect()
    }

    fn zip(&self, other: &Self, op: impl Fn(u32, u32) -> u32) -> Result<Self, GroupError> {
        if self.modulus != other.modulus {
            return Err(GroupError::ModulusMismatch(self.modulus, other.modulus));
        }
        if self.len() != other.len() {
            return Err(GroupError::LengthMismatch { expected: self.len(), found: other.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b) % self.modulus).collect();
        Ok(FinSupportFunction { modulus: self.modulus, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self, GroupError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, GroupError> {
        let m = self.modulus;
        self.zip(other, move |a, b| a + m - b)
    }

    fn check(&self, x: &DistanceSpace) -> Result<(), GroupError> {
        if self.len() != x.len() {
            return Err(GroupError::LengthMismatch { expected: x.len(), found: self.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub in_f0: bool,
    pub in_f00: bool,
}

pub fn classify(x: &DistanceSpace, phi: &FinSupportFunction) -> Result<MembershipReport, GroupError> {
    phi.check(x)?;
    Ok(MembershipReport { in_f0: phi.total_sum() == 0, in_f00: phi.component_sums(x).iter().all(|&s| s == 0) })
}

/// One term `g(δ_x − δ_y)` of a representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dipole {
    pub g: u32,
    pub x: usize,
    pub y: usize,
}

#[derive(PartialEq)]
struct Item(f64, u64);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `phi` (restricted to `points`) to `0` using moves `k·(δ_x − δ_y)`
/// for `k` in `steps`, both points in `points` and in one component.
fn dipole_search(x: &DistanceSpace, phi: &FinSupportFunction, points: &[usize], steps: &[u32]) -> Result<(ExtReal, Vec<Dipole>), GroupError> {
    let m = phi.modulus as u64;
    let k = points.len();
    let states = (0..k).try_fold(1u64, |s, _| s.checked_mul(m).filter(|&s| s <= MAX_STATES));
    let states = states.ok_or(GroupError::TooManyStates { states: (m as f64).powi(k as i32).min(u64::MAX as f64) as u64 })?;
    let pow: Vec<u64> = (0..k).map(|i| m.pow(i as u32)).collect();
    let digit = |s: u64, i: usize| (s / pow[i]) % m;
    let start: u64 = (0..k).map(|i| phi.values[points[i]] as u64 * pow[i]).sum();
    let mut moves: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let d = x.d(points[i], points[j]);
            if i != j && d.is_finite() {
                moves.push((i, j, d));
            }
        }
    }
    let mut dist = vec![f64::INFINITY; states as usize];
    let mut parent: Vec<(u64, Dipole)> = vec![(u64::MAX, Dipole { g: 0, x: 0, y: 0 }); states as usize];
    let mut done = vec![false; states as usize];
    let mut heap = BinaryHeap::new();
    dist[start as usize] = 0.0;
    heap.push(Item(0.0, start));
    while let Some(Item(c, s)) = heap.pop() {
        if done[s as usize] {
            continue;
        }
        done[s as usize] = true;
        if s == 0 {
            break;
        }
        for &(i, j, d) in &moves {
            for &g in steps {
                // The current state is the remainder still to be written; removing
                // g(δ_x − δ_y) leaves s − g·e_i + g·e_j.
                let g = g as u64;
                let ni = (digit(s, i) + m - g) % m;
                let nj = (digit(s, j) + g) % m;
                let t = s - digit(s, i) * pow[i] - digit(s, j) * pow[j] + ni * pow[i] + nj * pow[j];
                let nc = c + d;
                if nc < dist[t as usize] {
                    dist[t as usize] = nc;
                    parent[t as usize] = (s, Dipole { g: g as u32, x: points[i], y: points[j] });
                    heap.push(Item(nc, t));
                }
            }
        }
    }
    if dist[0].is_infinite() {
        return Ok((ExtReal::INFINITY, Vec::new()));
    }
    let mut witness = Vec::new();
    let mut s = 0u64;
    while s != start {
        let (p, dp) = parent[s as usize];
        witness.push(dp);
        s = p;
    }
    witness.reverse();
    Ok((ExtReal::finite(dist[0]), witness))
}

fn pair(a: &FinSupportFunction, b: &FinSupportFunction, x: &DistanceSpace) -> Result<FinSupportFunction, GroupError> {
    a.check(x)?;
    b.check(x)?;
    a.sub(b)
}

/// `d^1_{FX}(a,b) = ‖a − b‖` with a dipole representation of `a − b`.
pub fn d1_group(x: &DistanceSpace, a: &FinSupportFunction, b: &FinSupportFunction) -> Result<(ExtReal, Vec<Dipole>), GroupError> {
    let phi = pair(a, b, x)?;
    if phi.component_sums(x).iter().any(|&s| s != 0) {
        return Ok((ExtReal::INFINITY, Vec::new()));
    }
    let all: Vec<usize> = (0..x.len()).collect();
    let steps: Vec<u32> = (1..phi.modulus).collect();
    dipole_search(x, &phi, &all, &steps)
}

/// `‖φ‖^⊂`: dipoles and intermediate states confined to `supp(φ)`.
pub fn norm_restricted(x: &DistanceSpace, phi: &FinSupportFunction) -> Result<ExtReal, GroupError> {
    phi.check(x)?;
    let supp = phi.support();
    let steps: Vec<u32> = (1..phi.modulus).collect();
    Ok(dipole_search(x, phi, &supp, &steps)?.0)
}

/// `‖φ‖` for `m = 2` as a minimum-weight perfect matching on `supp(φ)`.
pub fn boolean_matching_norm(x: &DistanceSpace, phi: &FinSupportFunction) -> Result<(ExtReal, Vec<(usize, usize)>), GroupError> {
    if phi.modulus != 2 {
        return Err(GroupError::ModulusMismatch(phi.modulus, 2));
    }
    phi.check(x)?;
    let supp = phi.support();
    if supp.len() % 2 == 1 {
        return Err(GroupError::OddSupport(supp.len()));
    }
    let s = supp.len();
    let full = (1usize << s) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    let mut pick = vec![(0usize, 0usize); full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        for j in i + 1..s {
            if mask >> j & 1 == 1 {
                let c = best[mask ^ (1 << i) ^ (1 << j)] + x.d(supp[i], supp[j]);
                if c < best[mask] {
                    best[mask] = c;
                    pick[mask] = (i, j);
                }
            }
        }
    }
    if best[full].is_infinite() {
        return Ok((ExtReal::INFINITY, Vec::new()));
    }
    let mut matching = Vec::new();
    let mut mask = full;
    while mask != 0 {
        let (i, j) = pick[mask];
        matching.push((supp[i], supp[j]));
        mask ^= (1 << i) | (1 << j);
    }
    matching.sort_unstable();
    Ok((ExtReal::finite(best[full]), matching))
}

/// `‖φ‖^∩` by exhaustive pairing: disjoint pairs covering `supp(φ)` with
/// `φ(x) + φ(y) = 0`.
pub fn disjoint_pair_norm(x: &DistanceSpace, phi: &FinSupportFunction) -> Result<ExtReal, GroupError> {
    phi.check(x)?;
    fn rec(x: &DistanceSpace, phi: &FinSupportFunction, left: &mut [usize]) -> f64 {
        let Some(&first) = left.first() else { return 0.0 };
        let mut best = f64::INFINITY;
        for k in 1..left.len() {
            let y = left[k];
            if !(phi.values[first] + phi.values[y]).is_multiple_of(phi.modulus) {
                continue;
            }
            let mut rest: Vec<usize> = left[1..].iter().copied().filter(|&v| v != y).collect();
            best = best.min(x.d(first, y) + rec(x, phi, &mut rest));
        }
        best
    }
    let mut supp = phi.support();
    Ok(ExtReal::new(rec(x, phi, &mut supp)).expect("nonnegative"))
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Graev distance for the generator `g`: moves `±(δ^g_x − δ^g_y)` only.
pub fn graev_distance(x: &DistanceSpace, a: &FinSupportFunction, b: &FinSupportFunction, g: u32) -> Result<ExtReal, GroupError> {
    let m = a.modulus;
    if gcd(g % m, m) != 1 {
        return Err(GroupError::NotAGenerator { g, m });
    }
    let phi = pair(a, b, x)?;
    if phi.component_sums(x).iter().any(|&s| s != 0) {
        return Ok(ExtReal::INFINITY);
    }
    let g = g % m;
    let mut steps = vec![g, m - g];
    steps.sort_unstable();
    steps.dedup();
    let all: Vec<usize> = (0..x.len()).collect();
    Ok(dipole_search(x, &phi, &all, &steps)?.0)
}

/// `ď^p` for `p > 1` on `F₀X`: `0` if `a − b ∈ F₀₀X`, else `∞`.
pub fn pcheck_distance(x: &DistanceSpace, a: &FinSupportFunction, b: &FinSupportFunction) -> Result<ExtReal, GroupError> {
    let phi = pair(a, b, x)?;
    if a.total_sum() != 0 || b.total_sum() != 0 {
        return Err(GroupError::NotInF0);
    }
    Ok(if classify(x, &phi)?.in_f00 { ExtReal::ZERO } else { ExtReal::INFINITY })
}
