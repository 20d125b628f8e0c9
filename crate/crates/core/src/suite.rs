//! Seeded property suite over random spaces.
//!
//! Trial `t` draws everything from a generator seeded with `seed + t`, so a
//! failing trial is replayed by running one trial with that seed.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::entropy_dim::{functor_entropy_check, local_entropy, min_cover};
use crate::functor_engine::oracle::{chain_oracle, ChainClass, OracleError, DEFAULT_BUDGET};
use crate::functor_engine::{induced_map_lipschitz, BuiltinFunctor, Element, Functor, FunctorSpace};
use crate::group_norms::{
    boolean_matching_norm, classify, d1_group, disjoint_pair_norm, graev_distance, norm_restricted, pcheck_distance, FinSupportFunction,
};
use crate::hyperspace::{d1_hyperspace, d1_upper_mst, graph_to_chain, validate_hyper_chain};
use crate::io::Ext;
use crate::metric_core::{cross_stats, hausdorff, set_stats, DistanceSpace, ExtReal, PNorm};
use crate::random::{permuted_space, random_f0, random_function, random_space, random_subset, rng};
use crate::tight_span::{is_extremal, is_minimal_by_probe, kuratowski, project_extremal, random_admissible, sup_distance};

/// Relative slack for inequalities between computed distances.
pub const TOL: f64 = 1e-9;

/// The functors of the engine properties.
pub const SUITE_FUNCTORS: [BuiltinFunctor; 4] =
    [BuiltinFunctor::Power(2), BuiltinFunctor::CappedHyperspace(2), BuiltinFunctor::NonemptyPairs, BuiltinFunctor::SymDiffPairs];

const PS: [PNorm; 3] = [PNorm::ONE, PNorm::TWO, PNorm::Infinity];

/// Property names in report order.
pub const PROPERTIES: &[&str] = &[
    "metric-validation",
    "engine-errors",
    "p-monotonicity",
    "n-power comparison",
    "finiteness iff equal quotient images",
    "diameter-plus-gap upper bound",
    "support-diameter upper bound",
    "separation lower bound for d^1",
    "Hausdorff lower bound for d^inf",
    "small-support pairs infinite",
    "xi-isometry",
    "Lipschitz non-expansion",
    "inclusion H_k -> H_k+1 non-expanding",
    "inclusion NonemptyPairs -> H_2 non-expanding",
    "relabeling invariance",
    "chain certificates",
    "oracle equivalence",
    "kuratowski isometry",
    "projection convergence",
    "projection below input",
    "projection extremal",
    "projection idempotent",
    "projection non-expanding",
    "extremality probe agreement",
    "group invariance on F0",
    "group subinvariance",
    "group dipole witness",
    "group lower bound",
    "group norm chain",
    "boolean agreement",
    "graev dominance",
    "graev equality m<=3",
    "pcheck consistency",
    "hausdorff <= d1_hyperspace",
    "hyperspace witness",
    "hyperspace graph chain",
    "mst upper bound",
    "H_2 Hausdorff sandwich",
    "d1_hyperspace <= d1 on H_|X|",
    "entropy antitone",
    "cover certificates",
    "local entropy bounds",
    "cover component additivity",
    "functor entropy bounds",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuiteError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("max size must be at least 1")]
    NoPoints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_size: usize,
    /// Negative control: corrupt one distance before re-validation.
    pub inject_triangle_violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub trial: usize,
    pub replay_seed: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub checks: u64,
    pub violations: u64,
    pub first_counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observation {
    pub name: String,
    pub value: Ext,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials: usize,
    pub max_size: usize,
    pub passed: bool,
    pub properties: Vec<PropertyOutcome>,
    pub observations: Vec<Observation>,
}

impl SuiteReport {
    pub fn property(&self, name: &str) -> Option<&PropertyOutcome> {
        self.properties.iter().find(|p| p.name == name)
    }
}

struct Tally {
    outcomes: Vec<PropertyOutcome>,
    trial: usize,
    replay_seed: u64,
}

impl Tally {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        let k = PROPERTIES.iter().position(|p| *p == name).expect("registered property");
        let o = &mut self.outcomes[k];
        o.checks += 1;
        if !ok {
            o.violations += 1;
            if o.first_counterexample.is_none() {
                o.first_counterexample = Some(Counterexample { trial: self.trial, replay_seed: self.replay_seed, detail: detail() });
            }
        }
    }

    fn error<E: std::fmt::Display>(&mut self, context: &str, e: E) {
        self.check("engine-errors", false, || format!("{context}: {e}"));
    }
}

fn le(a: f64, b: f64) -> bool {
    b.is_infinite() || a <= b + TOL * (1.0 + b.abs())
}

fn close(a: f64, b: f64) -> bool {
    ExtReal::new(a).zip(ExtReal::new(b)).is_some_and(|(a, b)| a.approx_eq(b, TOL * (1.0 + b.get().min(1e12))))
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut s: Vec<usize> = a.iter().chain(b).copied().collect();
    s.sort_unstable();
    s.dedup();
    s
}

fn p_name(p: PNorm) -> String {
    match p {
        PNorm::Infinity => "inf".into(),
        PNorm::Finite(v) => format!("{v}"),
    }
}

struct Gap {
    max: f64,
    positive: u64,
    checked: u64,
}

/// Runs every property on `trials` random spaces with at most `max_size` points.
pub fn property_suite(config: SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if config.trials == 0 {
        return Err(SuiteError::NoTrials);
    }
    if config.max_size == 0 {
        return Err(SuiteError::NoPoints);
    }
    let outcomes = PROPERTIES
        .iter()
        .map(|n| PropertyOutcome { name: n.to_string(), checks: 0, violations: 0, first_counterexample: None })
        .collect();
    let mut t = Tally { outcomes, trial: 0, replay_seed: config.seed };
    let mut gap = Gap { max: 0.0, positive: 0, checked: 0 };
    let mut oracle_skips = 0u64;
    for trial in 0..config.trials {
        let replay_seed = config.seed.wrapping_add(trial as u64);
        t.trial = trial;
        t.replay_seed = replay_seed;
        let mut r = rng(replay_seed);
        let x = random_space(&mut r, 1, config.max_size, 0.25);
        metric_validation(&mut t, &x, config.inject_triangle_violation);
        for f in SUITE_FUNCTORS {
            engine_properties(&mut t, &mut r, &x, &f, config.max_size, &mut oracle_skips);
        }
        naturality(&mut t, &x);
        tight_span_properties(&mut t, &mut r, &x);
        let small = x.subspace(&(0..x.len().min(5)).collect::<Vec<_>>());
        group_properties(&mut t, &mut r, &small);
        hyperspace_properties(&mut t, &mut r, &x, &mut gap);
        entropy_properties(&mut t, &mut r, &small);
    }
    let passed = t.outcomes.iter().all(|o| o.violations == 0);
    let observations = vec![
        Observation {
            name: "H_|X| vs H gap".into(),
            value: Ext(gap.max),
            detail: format!("max of d1 on H_|X| minus d1_hyperspace over {} pairs with |X| <= 3; {} pairs positive", gap.checked, gap.positive),
        },
        Observation { name: "oracle budget skips".into(), value: Ext(oracle_skips as f64), detail: "pairs skipped after exhausting the oracle budget".into() },
    ];
    Ok(SuiteReport { seed: config.seed, trials: config.trials, max_size: config.max_size, passed, properties: t.outcomes, observations })
}

fn metric_validation(t: &mut Tally, x: &DistanceSpace, inject: bool) {
    let mut rows: Vec<Vec<f64>> = (0..x.len()).map(|i| (0..x.len()).map(|j| x.d(i, j)).collect()).collect();
    if inject && x.len() >= 3 {
        // Points 0, 1, 2: lengthen a finite side past the detour, or bridge
        // an ∞ gap so that some other side becomes too long.
        let detour = x.d(0, 2) + x.d(2, 1);
        let (u, v, w) = if detour.is_finite() {
            (0, 1, detour + 1.0)
        } else if x.d(0, 2).is_infinite() {
            (0, 2, 1.0)
        } else {
            (2, 1, 1.0)
        };
        rows[u][v] = w;
        rows[v][u] = w;
    }
    match DistanceSpace::validate(Some(x.labels().to_vec()), &rows) {
        Ok(_) => t.check("metric-validation", true, String::new),
        Err(e) => t.check("metric-validation", false, || format!("validate rejected the matrix: {e}")),
    }
}

fn engine_properties<R: Rng>(t: &mut Tally, r: &mut R, x: &DistanceSpace, f: &BuiltinFunctor, max_size: usize, oracle_skips: &mut u64) {
    let name = f.name();
    let spaces: Vec<_> = match PS.iter().map(|&p| FunctorSpace::new(f, x, p)).collect::<Result<Vec<_>, _>>() {
        Ok(s) => s,
        Err(e) => return t.error(&name, e),
    };
    let mats: Vec<Vec<Vec<f64>>> = spaces.iter().map(|s| s.distance_matrix()).collect();
    let elems = spaces[0].elements().to_vec();
    let k = elems.len();
    let n = f.degree().max(1) as f64;
    let comp = x.component_map();
    let quotient: Vec<Element> = elems.iter().map(|e| f.map(e, comp)).collect();
    let supports: Vec<Vec<usize>> = elems.iter().map(|e| f.support(e)).collect();
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let (a, b) = (&elems[i], &elems[j]);
            let pair = || format!("{name}, a = {a}, b = {b}");
            for (pi, qi) in [(0, 1), (0, 2), (1, 2)] {
                let (dp, dq) = (mats[pi][i][j], mats[qi][i][j]);
                t.check("p-monotonicity", le(dq, dp), || format!("{}: d^{} = {dq} > d^{} = {dp}", pair(), p_name(PS[qi]), p_name(PS[pi])));
                let factor = n.powf(PS[pi].inverse() - PS[qi].inverse());
                t.check("n-power comparison", le(dp, factor * dq), || format!("{}: d^p = {dp} > {factor}·{dq}", pair()));
            }
            let (sa, sb) = (&supports[i], &supports[j]);
            let s = union(sa, sb);
            let stats = set_stats(x, &s).expect("valid support");
            let same_image = quotient[i] == quotient[j];
            for (pi, &p) in PS.iter().enumerate() {
                let d = mats[pi][i][j];
                t.check("finiteness iff equal quotient images", d.is_finite() == same_image, || format!("{}, p = {}: d = {d}, Fq(a) = Fq(b) is {same_image}", pair(), p_name(p)));
                if d.is_finite() {
                    let (ra, rb) = (p.root_count(sa.len()), p.root_count(sb.len()));
                    let b5 = (ra + rb) * stats.real_diam.get();
                    t.check("support-diameter upper bound", le(d, b5), || format!("{}, p = {}: d = {d} > {b5}", pair(), p_name(p)));
                    let da = set_stats(x, sa).expect("valid support").real_diam.get();
                    let db = set_stats(x, sb).expect("valid support").real_diam.get();
                    let cross = cross_stats(x, sa, sb, p).expect("valid supports").lower_p.get();
                    let b3 = ra * da + cross + rb * db;
                    t.check("diameter-plus-gap upper bound", le(d, b3), || format!("{}, p = {}: d = {d} > {b3}", pair(), p_name(p)));
                }
            }
            let d1 = mats[0][i][j];
            t.check("separation lower bound for d^1", le(stats.sep.get(), d1), || format!("{}: d^1 = {d1} < sep = {}", pair(), stats.sep));
            if f.preserves_supports() {
                let dinf = mats[2][i][j];
                let lower = hausdorff(x, sa, sb).get().max(stats.sep.get() / 3.0);
                t.check("Hausdorff lower bound for d^inf", le(lower, dinf), || format!("{}: d^inf = {dinf} < {lower}", pair()));
            }
            if s.len() <= 1 {
                t.check("small-support pairs infinite", mats.iter().all(|m| m[i][j].is_infinite()), || format!("{}: finite distance with |supp| <= 1", pair()));
            }
        }
    }
    // Point embedding x ↦ {x}.
    if f.contains(&Element::set([0]), 1) {
        for u in 0..x.len() {
            for v in 0..x.len() {
                let (a, b) = (Element::set([u]), Element::set([v]));
                let (ia, ib) = (spaces[0].index_of(&a), spaces[0].index_of(&b));
                let (Ok(ia), Ok(ib)) = (ia, ib) else { continue };
                for (pi, &p) in PS.iter().enumerate() {
                    let d = mats[pi][ia][ib];
                    t.check("xi-isometry", close(d, x.d(u, v)), || format!("{name}, p = {}: d({{{u}}},{{{v}}}) = {d} vs {}", p_name(p), x.d(u, v)));
                }
            }
        }
    }
    // Certificates for a few pairs.
    for _ in 0..3 {
        let (i, j) = (r.gen_range(0..k), r.gen_range(0..k));
        let pi = r.gen_range(0..3);
        match spaces[pi].distance(&elems[i], &elems[j]) {
            Ok((d, Some(chain))) => {
                let res = chain.validate(f, x, PS[pi], &elems[i], &elems[j]);
                t.check("chain certificates", res.as_ref().is_ok_and(|c| close(*c, d.get()) && close(d.get(), mats[pi][i][j])), || {
                    format!("{name}: chain for {} -> {} gives {res:?}, distance {d}", elems[i], elems[j])
                });
            }
            Ok((d, None)) => t.check("chain certificates", d.is_infinite(), || format!("{name}: finite distance without a chain")),
            Err(e) => t.error(&name, e),
        }
    }
    // Relabeling invariance.
    let (perm, y) = permuted_space(r, x);
    let pi = r.gen_range(0..3);
    match FunctorSpace::new(f, &y, PS[pi]) {
        Ok(fy) => {
            let my = fy.distance_matrix();
            let idx: Result<Vec<usize>, _> = elems.iter().map(|e| fy.index_of(&f.map(e, &perm))).collect();
            match idx {
                Ok(idx) => {
                    let ok = (0..k).all(|i| (0..k).all(|j| close(my[idx[i]][idx[j]], mats[pi][i][j])));
                    t.check("relabeling invariance", ok, || format!("{name}, p = {}, permutation {perm:?}", p_name(PS[pi])));
                }
                Err(e) => t.error(&name, e),
            }
        }
        Err(e) => t.error(&name, e),
    }
    // Lipschitz maps into a second random space.
    let y = random_space(r, 1, max_size, 0.25);
    let map: Vec<usize> = (0..x.len()).map(|_| r.gen_range(0..y.len())).collect();
    let p = PS[r.gen_range(0..3)];
    match induced_map_lipschitz(f, x, &y, &map, p) {
        Ok((lf, lff)) => t.check("Lipschitz non-expansion", le(lff, lf), || format!("{name}, p = {}, map {map:?}: Lip(Ff) = {lff} > Lip(f) = {lf}", p_name(p))),
        Err(e) => t.error(&name, e),
    }
    // Brute-force chains.
    let fn_size = f.carrier(f.degree().max(1)).len();
    if x.len() <= 3 && fn_size <= 7 {
        for (pi, &p) in PS.iter().enumerate() {
            for i in 0..k {
                for j in 0..k {
                    if i == j {
                        continue;
                    }
                    match chain_oracle(f, x, p, &elems[i], &elems[j], k - 1, ChainClass::LoopFree, DEFAULT_BUDGET) {
                        Ok(o) => {
                            let d = mats[pi][i][j];
                            let ok = (o.is_infinite() && d.is_infinite()) || (o.get() - d).abs() <= 1e-12 * d.max(1.0);
                            t.check("oracle equivalence", ok, || format!("{name}, p = {}, {} -> {}: engine {d}, oracle {o}", p_name(p), elems[i], elems[j]));
                        }
                        Err(OracleError::BudgetExceeded(_)) => *oracle_skips += 1,
                        Err(e) => t.error(&name, e),
                    }
                }
            }
        }
    }
}

fn naturality(t: &mut Tally, x: &DistanceSpace) {
    let pairs = [
        (BuiltinFunctor::CappedHyperspace(1), BuiltinFunctor::CappedHyperspace(2), "inclusion H_k -> H_k+1 non-expanding"),
        (BuiltinFunctor::CappedHyperspace(2), BuiltinFunctor::CappedHyperspace(3), "inclusion H_k -> H_k+1 non-expanding"),
        (BuiltinFunctor::NonemptyPairs, BuiltinFunctor::CappedHyperspace(2), "inclusion NonemptyPairs -> H_2 non-expanding"),
    ];
    for (small, big, prop) in pairs {
        for p in PS {
            let (fs, gs) = match (FunctorSpace::new(&small, x, p), FunctorSpace::new(&big, x, p)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return t.error("naturality", e),
            };
            let (mf, mg) = (fs.distance_matrix(), gs.distance_matrix());
            let idx: Vec<usize> = match fs.elements().iter().map(|e| gs.index_of(e)).collect() {
                Ok(v) => v,
                Err(e) => return t.error("naturality", e),
            };
            for i in 0..idx.len() {
                for j in 0..idx.len() {
                    let (a, b) = (mg[idx[i]][idx[j]], mf[i][j]);
                    t.check(prop, le(a, b), || {
                        format!("{} -> {}, p = {}: {} , {}: {a} > {b}", small.name(), big.name(), p_name(p), fs.elements()[i], fs.elements()[j])
                    });
                }
            }
        }
    }
}

fn tight_span_properties<R: Rng>(t: &mut Tally, r: &mut R, x: &DistanceSpace) {
    let n = x.len();
    let ks: Vec<Vec<f64>> = (0..n).map(|i| kuratowski(x, i).expect("valid index")).collect();
    for i in 0..n {
        for j in 0..n {
            let (s, d) = (sup_distance(&ks[i], &ks[j]), x.d(i, j));
            t.check("kuratowski isometry", s >= d && le(s, d), || format!("sup(d_{i}, d_{j}) = {s} vs d = {d}"));
        }
    }
    let f = random_admissible(x, r);
    let g = random_admissible(x, r);
    let (pf, pg) = match (project_extremal(x, &f, 1e-12, 200), project_extremal(x, &g, 1e-12, 200)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            t.check("projection convergence", false, || format!("{e} for f = {f:?}"));
            return;
        }
    };
    t.check("projection convergence", pf.residual < 1e-12 && pf.iterations <= 200, || format!("residual {} after {}", pf.residual, pf.iterations));
    let below = pf.values.iter().zip(&f).all(|(a, b)| le(*a, *b));
    t.check("projection below input", below, || format!("{:?} not below {f:?}", pf.values));
    let ext = is_extremal(x, &pf.values, 1e-9).unwrap_or(false);
    t.check("projection extremal", ext, || format!("{:?}", pf.values));
    match project_extremal(x, &pf.values, 1e-12, 200) {
        Ok(again) => {
            let s = sup_distance(&again.values, &pf.values);
            t.check("projection idempotent", s <= 1e-9, || format!("moved by {s}"));
        }
        Err(e) => t.check("projection idempotent", false, || e.to_string()),
    }
    let same_part = f.iter().zip(&g).all(|(a, b)| a.is_finite() == b.is_finite());
    if same_part {
        let (a, b) = (sup_distance(&pf.values, &pg.values), sup_distance(&f, &g));
        t.check("projection non-expanding", le(a, b), || format!("{a} > {b}"));
    }
    if n <= 4 {
        let probe = is_minimal_by_probe(x, &pf.values, 1e-3);
        t.check("extremality probe agreement", probe == ext, || format!("probe {probe}, star test {ext} on {:?}", pf.values));
        let finite: Vec<usize> = (0..n).filter(|&i| pf.values[i].is_finite()).collect();
        if !finite.is_empty() {
            let mut bumped = pf.values.clone();
            bumped[finite[r.gen_range(0..finite.len())]] += r.gen_range(0.01..1.0);
            let probe = is_minimal_by_probe(x, &bumped, 1e-3);
            let star = is_extremal(x, &bumped, 1e-9).unwrap_or(true);
            t.check("extremality probe agreement", probe == star && !probe, || format!("probe {probe}, star test {star} on {bumped:?}"));
        }
    }
}

fn group_properties<R: Rng>(t: &mut Tally, r: &mut R, x: &DistanceSpace) {
    let n = x.len();
    let m = r.gen_range(2..=4u32);
    let a = random_function(r, m, n);
    let b = random_function(r, m, n);
    let c0 = random_f0(r, m, n);
    let c = random_function(r, m, n);
    let ctx = || format!("m = {m}, a = {:?}, b = {:?}", a.values(), b.values());
    let (dab, witness) = match d1_group(x, &a, &b) {
        Ok(v) => v,
        Err(e) => return t.error("d1_group", e),
    };
    let shifted = |c: &FinSupportFunction| d1_group(x, &a.add(c).unwrap(), &b.add(c).unwrap()).map(|v| v.0);
    match shifted(&c0) {
        Ok(d) => t.check("group invariance on F0", d == dab, || format!("{}: {d} vs {dab}", ctx())),
        Err(e) => t.error("d1_group", e),
    }
    match shifted(&c) {
        Ok(d) => t.check("group subinvariance", d <= dab, || format!("{}: {d} > {dab}", ctx())),
        Err(e) => t.error("d1_group", e),
    }
    if dab.is_finite() {
        let mut sum = FinSupportFunction::zero(m, n);
        let mut cost = 0.0;
        for dp in &witness {
            sum = sum.add(&FinSupportFunction::delta(m, n, dp.x, dp.g as i64)).unwrap();
            sum = sum.add(&FinSupportFunction::delta(m, n, dp.y, -(dp.g as i64))).unwrap();
            cost += x.d(dp.x, dp.y);
        }
        let ok = sum == a.sub(&b).unwrap() && close(cost, dab.get());
        t.check("group dipole witness", ok, || format!("{}: witness {witness:?}", ctx()));
    }
    if a != b {
        let s = union(&a.support(), &b.support());
        let sep = set_stats(x, &s).expect("valid").sep.get();
        t.check("group lower bound", le(sep, dab.get()), || format!("{}: {dab} < sep {sep}", ctx()));
    }
    let phi = a.sub(&b).unwrap();
    let zero = FinSupportFunction::zero(m, n);
    match (d1_group(x, &phi, &zero), norm_restricted(x, &phi), disjoint_pair_norm(x, &phi)) {
        (Ok((d, _)), Ok(rs), Ok(dj)) => {
            t.check("group norm chain", d == dab && le(d.get(), rs.get()) && le(rs.get(), dj.get()), || format!("{}: {d} <= {rs} <= {dj}", ctx()));
            if m == 2 && phi.support().len() % 2 == 0 {
                match boolean_matching_norm(x, &phi) {
                    Ok((bm, _)) => t.check("boolean agreement", close(bm.get(), d.get()) && close(bm.get(), rs.get()), || {
                        format!("{}: matching {bm}, d1 {d}, restricted {rs}", ctx())
                    }),
                    Err(e) => t.error("boolean_matching_norm", e),
                }
            }
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error("group norms", e),
    }
    let g = loop {
        let g = r.gen_range(1..m);
        if (1..=m).all(|k| k == 1 || g % k != 0 || m % k != 0) {
            break g;
        }
    };
    match graev_distance(x, &a, &b, g) {
        Ok(gd) => {
            t.check("graev dominance", le(dab.get(), gd.get()), || format!("{}: graev({g}) = {gd} < {dab}", ctx()));
            if m <= 3 {
                t.check("graev equality m<=3", close(gd.get(), dab.get()), || format!("{}: graev({g}) = {gd} vs {dab}", ctx()));
            }
        }
        Err(e) => t.error("graev_distance", e),
    }
    let (fa, fb) = (random_f0(r, m, n), random_f0(r, m, n));
    match (pcheck_distance(x, &fa, &fb), classify(x, &fa.sub(&fb).unwrap()), d1_group(x, &fa, &fb)) {
        (Ok(pc), Ok(cl), Ok((d1, _))) => {
            let ok = (pc == ExtReal::ZERO) == cl.in_f00 && cl.in_f0 && d1.is_finite() == cl.in_f00;
            t.check("pcheck consistency", ok, || format!("m = {m}: pcheck {pc}, {cl:?}, d1 {d1}"));
        }
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => t.error("pcheck", e),
    }
}

fn hyperspace_properties<R: Rng>(t: &mut Tally, r: &mut R, x: &DistanceSpace, gap: &mut Gap) {
    let n = x.len();
    let a = random_subset(r, n, n);
    let b = random_subset(r, n, n);
    let ctx = || format!("a = {a:?}, b = {b:?}");
    let h = hausdorff(x, &a, &b);
    let (d, graph) = match d1_hyperspace(x, &a, &b) {
        Ok(v) => v,
        Err(e) => return t.error("d1_hyperspace", e),
    };
    t.check("hausdorff <= d1_hyperspace", le(h.get(), d.get()), || format!("{}: {h} > {d}", ctx()));
    if let Some(g) = &graph {
        t.check("hyperspace witness", g.validate(x, &a, &b, d.get()).is_ok(), || format!("{}: {g:?}", ctx()));
        let res = graph_to_chain(&a, &b, g).and_then(|steps| validate_hyper_chain(x, &a, &b, &steps));
        let len = g.length(x);
        t.check("hyperspace graph chain", res.as_ref().is_ok_and(|c| le(*c, len)), || format!("{}: {res:?} vs length {len}", ctx()));
    } else {
        t.check("hyperspace witness", d.is_infinite(), || format!("{}: finite without graph", ctx()));
    }
    match d1_upper_mst(x, &a, &b) {
        Ok(m) => t.check("mst upper bound", le(d.get(), m.get()), || format!("{}: mst {m} < {d}", ctx())),
        Err(e) => t.error("d1_upper_mst", e),
    }
    let a2: Vec<usize> = a.iter().take(2).copied().collect();
    let b2: Vec<usize> = b.iter().take(2).copied().collect();
    let h2 = hausdorff(x, &a2, &b2).get();
    match FunctorSpace::new(&BuiltinFunctor::CappedHyperspace(2), x, PNorm::Infinity) {
        Ok(fs) => match fs.distance(&Element::set(a2.clone()), &Element::set(b2.clone())) {
            Ok((dinf, _)) => {
                let dinf = dinf.get();
                t.check("H_2 Hausdorff sandwich", le(h2, dinf) && le(dinf, 3.0 * h2), || format!("a = {a2:?}, b = {b2:?}: {h2} <= {dinf} <= 3·{h2}"))
            }
            Err(e) => t.error("H_2", e),
        },
        Err(e) => t.error("H_2", e),
    }
    if n <= 3 {
        match FunctorSpace::new(&BuiltinFunctor::CappedHyperspace(n), x, PNorm::ONE) {
            Ok(fs) => match fs.distance(&Element::set(a.clone()), &Element::set(b.clone())) {
                Ok((dk, _)) => {
                    t.check("d1_hyperspace <= d1 on H_|X|", le(d.get(), dk.get()), || format!("{}: {d} > {dk}", ctx()));
                    if dk.is_finite() {
                        let g = dk.get() - d.get();
                        gap.checked += 1;
                        gap.max = gap.max.max(g);
                        if g > TOL * (1.0 + dk.get()) {
                            gap.positive += 1;
                        }
                    }
                }
                Err(e) => t.error("H_|X|", e),
            },
            Err(e) => t.error("H_|X|", e),
        }
    }
}

/// Finite positive distances at the 25%, 50% and 75% quantiles.
pub fn distance_quantiles(x: &DistanceSpace) -> Vec<f64> {
    let mut ds: Vec<f64> = (0..x.len()).flat_map(|i| (i + 1..x.len()).map(move |j| (i, j))).map(|(i, j)| x.d(i, j)).filter(|d| d.is_finite() && *d > 0.0).collect();
    ds.sort_by(f64::total_cmp);
    if ds.is_empty() {
        return vec![1.0];
    }
    let mut q: Vec<f64> = [0.25, 0.5, 0.75].iter().map(|f| ds[((ds.len() - 1) as f64 * f).round() as usize]).collect();
    q.dedup();
    q
}

fn entropy_properties<R: Rng>(t: &mut Tally, r: &mut R, x: &DistanceSpace) {
    let scales = distance_quantiles(x);
    let mut counts = Vec::new();
    for &eps in &scales {
        match min_cover(x, eps) {
            Ok((c, cert)) => {
                t.check("cover certificates", cert.validate(x) && cert.blocks.len() == c, || format!("eps = {eps}: {cert:?}"));
                counts.push(c);
                let sum: usize = x.components().iter().map(|comp| min_cover(&x.subspace(comp), eps).map_or(usize::MAX, |v| v.0)).sum();
                t.check("cover component additivity", sum == c, || format!("eps = {eps}: {c} vs per-component {sum}"));
                let delta = eps * r.gen_range(0.5..3.0);
                match local_entropy(x, eps, delta) {
                    Ok(l) => t.check("local entropy bounds", l <= c, || format!("eps = {eps}, delta = {delta}: {l} > {c}")),
                    Err(e) => t.error("local_entropy", e),
                }
                let diam = set_stats(x, &(0..x.len()).collect::<Vec<_>>()).expect("valid").diam.get();
                if diam.is_finite() {
                    match local_entropy(x, eps, diam + 1.0) {
                        Ok(l) => t.check("local entropy bounds", l == c, || format!("eps = {eps}, delta > diam: {l} vs {c}")),
                        Err(e) => t.error("local_entropy", e),
                    }
                }
            }
            Err(e) => t.error("min_cover", e),
        }
    }
    t.check("entropy antitone", counts.windows(2).all(|w| w[0] >= w[1]), || format!("scales {scales:?}: counts {counts:?}"));
    let small = x.subspace(&(0..x.len().min(4)).collect::<Vec<_>>());
    let eps = scales[r.gen_range(0..scales.len())];
    let p = PS[r.gen_range(0..3)];
    for f in SUITE_FUNCTORS {
        match functor_entropy_check(&f, &small, p, eps) {
            Ok(rep) => t.check("functor entropy bounds", rep.holds, || format!("{rep:?}")),
            Err(e) => t.error("functor_entropy_check", e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_passes_and_is_deterministic() {
        let cfg = SuiteConfig { seed: 11, trials: 6, max_size: 4, inject_triangle_violation: false };
        let a = property_suite(cfg).unwrap();
        let failing: Vec<_> = a.properties.iter().filter(|p| p.violations > 0).collect();
        assert!(a.passed, "{failing:#?}");
        assert_eq!(a, property_suite(cfg).unwrap());
    }

    #[test]
    fn corrupted_metric_is_caught() {
        let cfg = SuiteConfig { seed: 0, trials: 20, max_size: 4, inject_triangle_violation: true };
        let rep = property_suite(cfg).unwrap();
        let v = rep.property("metric-validation").unwrap();
        assert!(v.violations > 0);
        assert!(v.first_counterexample.as_ref().unwrap().detail.contains("TriangleViolation"));
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SuiteConfig { seed: 0, trials: 0, max_size: 4, inject_triangle_violation: false };
        assert_eq!(property_suite(cfg), Err(SuiteError::NoTrials));
    }
}
