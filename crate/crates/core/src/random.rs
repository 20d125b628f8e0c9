//! Seeded generators for spaces, subsets and group functions.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::group_norms::FinSupportFunction;
use crate::metric_core::{default_labels, DistanceSpace};

/// The generator used for every seeded computation.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in `[0, 10]²`, with probability `split` cut into two
/// components at distance `∞`. Coordinates are multiples of `0.25` so that
/// ties occur.
pub fn random_space<R: Rng>(rng: &mut R, min_size: usize, max_size: usize, split: f64) -> DistanceSpace {
    let n = rng.gen_range(min_size..=max_size.max(min_size));
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(0..=40) as f64 / 4.0, rng.gen_range(0..=40) as f64 / 4.0]).collect();
    let side: Vec<bool> = if n >= 2 && rng.gen_bool(split) { (0..n).map(|_| rng.gen_bool(0.5)).collect() } else { vec![false; n] };
    DistanceSpace::from_fn(default_labels(n), |i, j| {
        if side[i] != side[j] {
            f64::INFINITY
        } else {
            ((pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2)).sqrt()
        }
    })
    .expect("planar points with ∞ between sides form a distance space")
}

/// A random nonempty subset of `0..n` (for `n ≥ 1`) with at most `max_len` points.
pub fn random_subset<R: Rng>(rng: &mut R, n: usize, max_len: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(rng);
    let k = rng.gen_range(1..=max_len.min(n).max(1)).min(n);
    let mut s = all[..k].to_vec();
    s.sort_unstable();
    s
}

/// Random residues mod `m`, each nonzero with probability one half.
pub fn random_function<R: Rng>(rng: &mut R, m: u32, n: usize) -> FinSupportFunction {
    let v = (0..n).map(|_| if rng.gen_bool(0.5) { rng.gen_range(1..m) as i64 } else { 0 }).collect();
    FinSupportFunction::new(m, v).expect("m ≥ 2")
}

/// A random element of `F₀`: a random function with its total fixed at one point.
pub fn random_f0<R: Rng>(rng: &mut R, m: u32, n: usize) -> FinSupportFunction {
    let f = random_function(rng, m, n);
    if n == 0 {
        return f;
    }
    let mut v: Vec<i64> = f.values().iter().map(|&x| x as i64).collect();
    let k = rng.gen_range(0..n);
    v[k] -= f.total_sum() as i64;
    FinSupportFunction::new(m, v).expect("m ≥ 2")
}

/// A random distance-preserving relabeling: `perm[i]` is the new index of `i`.
pub fn permuted_space<R: Rng>(rng: &mut R, x: &DistanceSpace) -> (Vec<usize>, DistanceSpace) {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.shuffle(rng);
    let mut inv = vec![0; x.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    let y = DistanceSpace::from_fn(default_labels(x.len()), |i, j| x.d(inv[i], inv[j])).expect("relabeling keeps the axioms");
    (perm, y)
}
