//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each.
//!
//! Runs without the test harness so the lines always show:
//! `cargo test -p functor-metric --test acceptance`.

use std::time::{Duration, Instant};

use rand::Rng;

use functor_metric::entropy_dim::{box_dim_estimate, cantor_set, functor_entropy_check};
use functor_metric::functor_engine::oracle::{chain_oracle, ChainClass, DEFAULT_BUDGET};
use functor_metric::functor_engine::{distance_matrix, dp_distance, BuiltinFunctor, ChainStep, Element, LinkingChain};
use functor_metric::group_norms::{boolean_matching_norm, d1_group, FinSupportFunction};
use functor_metric::hyperspace::{d1_hyperspace, steiner_tree};
use functor_metric::metric_core::{hausdorff, PNorm};
use functor_metric::random::{random_f0, random_space, random_subset, rng};
use functor_metric::reference::{ex1_row, ex1_x, reproduce_examples, triangle_centroid};
use functor_metric::suite::{distance_quantiles, property_suite, SuiteConfig, SUITE_FUNCTORS};
use functor_metric::tight_span::{is_extremal, is_minimal_by_probe, kuratowski, project_extremal, random_admissible, sup_distance};

const PS: [PNorm; 3] = [PNorm::ONE, PNorm::TWO, PNorm::Infinity];

struct Criterion {
    id: &'static str,
    pass: bool,
    /// Deterministic content; compared across runs for AC10.
    detail: String,
    elapsed: Duration,
}

fn timed(id: &'static str, limit: Duration, body: impl FnOnce() -> (bool, String)) -> Criterion {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    Criterion { id, pass: ok && elapsed < limit, detail, elapsed }
}

fn le(a: f64, b: f64) -> bool {
    a <= b || a - b <= 1e-9 * (1.0 + b.abs())
}

fn same_ext(a: f64, b: f64, tol: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= tol
}

fn ac1() -> Criterion {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for on_y in [false, true] {
        for p in PS {
            let t = Instant::now();
            let r = ex1_row(on_y, p);
            let fast = t.elapsed() < Duration::from_secs(5);
            ok &= r.pass && fast;
            lines.push(format!("{} p={}: computed {} expected {} {}", r.name, r.p.unwrap_or_default(), r.computed.0, r.expected.0, if r.pass { "ok" } else { "MISMATCH" }));
        }
    }
    Criterion { id: "AC1", pass: ok, detail: lines.join("; "), elapsed: start.elapsed() }
}

fn ac2() -> Criterion {
    timed("AC2", Duration::from_secs(5), || {
        let rep = reproduce_examples(Some("triangle"), None);
        let detail = rep.rows.iter().map(|r| format!("{} = {}", r.quantity, r.computed.0)).collect::<Vec<_>>().join("; ");
        (rep.passed && rep.rows.len() == 2, detail)
    })
}

fn ac3() -> Criterion {
    timed("AC3", Duration::from_secs(5), || {
        let rep = reproduce_examples(Some("graev"), None);
        let exact = rep.rows.iter().all(|r| r.computed.0 == r.expected.0);
        let detail = rep.rows.iter().map(|r| format!("{} = {}", r.quantity, r.computed.0)).collect::<Vec<_>>().join("; ");
        (exact && rep.rows.len() == 2, detail)
    })
}

fn ac4() -> Criterion {
    timed("AC4", Duration::from_secs(60), || {
        let mut bad = Vec::new();
        for seed in 0..200u64 {
            let mut r = rng(seed);
            let x = random_space(&mut r, 1, 6, 0.25);
            let phi = random_f0(&mut r, 2, x.len());
            let b = boolean_matching_norm(&x, &phi).unwrap().0.get();
            let d = d1_group(&x, &phi, &FinSupportFunction::zero(2, x.len())).unwrap().0.get();
            let n = functor_metric::group_norms::norm_restricted(&x, &phi).unwrap().get();
            if !(same_ext(b, d, 1e-9) && same_ext(d, n, 1e-9)) {
                bad.push(format!("seed {seed}: boolean {b}, d1 {d}, restricted {n}"));
            }
        }
        (bad.is_empty(), format!("200 instances, {} disagreements {:?}", bad.len(), bad.first()))
    })
}

const AC5_PROPERTIES: &[&str] = &[
    "p-monotonicity",
    "n-power comparison",
    "finiteness iff equal quotient images",
    "diameter-plus-gap upper bound",
    "support-diameter upper bound",
    "separation lower bound for d^1",
    "Hausdorff lower bound for d^inf",
    "Lipschitz non-expansion",
    "small-support pairs infinite",
    "xi-isometry",
    "inclusion H_k -> H_k+1 non-expanding",
];

fn ac5() -> Criterion {
    timed("AC5", Duration::from_secs(120), || {
        let rep = property_suite(SuiteConfig { seed: 0, trials: 200, max_size: 4, inject_triangle_violation: false }).unwrap();
        let mut ok = rep.passed;
        let mut parts = Vec::new();
        for name in AC5_PROPERTIES {
            let p = rep.property(name).unwrap();
            ok &= p.checks > 0 && p.violations == 0;
            parts.push(format!("{name}: {}/{}", p.violations, p.checks));
        }
        let total: u64 = rep.properties.iter().map(|p| p.violations).sum();
        (ok, format!("{}; all {} properties: {total} violations", parts.join(", "), rep.properties.len()))
    })
}

fn ac6() -> Criterion {
    timed("AC6", Duration::from_secs(300), || {
        let (mut pairs, mut bad) = (0u64, Vec::new());
        for seed in 0..50u64 {
            let x = random_space(&mut rng(seed), 1, 3, 0.25);
            for f in SUITE_FUNCTORS {
                for p in PS {
                    let (elems, m) = distance_matrix(&f, &x, p).unwrap();
                    let k = elems.len();
                    for i in 0..k {
                        for j in 0..k {
                            let o = chain_oracle(&f, &x, p, &elems[i], &elems[j], k.saturating_sub(1).max(1), ChainClass::LoopFree, DEFAULT_BUDGET).unwrap();
                            pairs += 1;
                            if !same_ext(o.get(), m[i][j], 1e-12) {
                                bad.push(format!("seed {seed} {f:?} {}->{}: {} vs {}", elems[i], elems[j], m[i][j], o.get()));
                            }
                        }
                    }
                }
            }
        }
        (bad.is_empty(), format!("{pairs} pairs over 50 spaces, {} mismatches {:?}", bad.len(), bad.first()))
    })
}

fn ac7() -> Criterion {
    timed("AC7", Duration::from_secs(60), || {
        let (mut iso, mut conv, mut below, mut probe, mut probes) = (0, 0, 0, 0, 0);
        for seed in 0..100u64 {
            let mut r = rng(1000 + seed);
            let x = random_space(&mut r, 1, 6, 0.25);
            let n = x.len();
            let ks: Vec<Vec<f64>> = (0..n).map(|i| kuratowski(&x, i).unwrap()).collect();
            if (0..n).all(|i| (0..n).all(|j| sup_distance(&ks[i], &ks[j]) == x.d(i, j))) {
                iso += 1;
            }
            let f = random_admissible(&x, &mut r);
            let pr = project_extremal(&x, &f, 1e-12, 200).unwrap();
            if pr.residual < 1e-12 && pr.iterations <= 200 {
                conv += 1;
            }
            if pr.values.iter().zip(&f).all(|(a, b)| a <= b) {
                below += 1;
            }
            if n <= 4 {
                let mut bumped = pr.values.clone();
                if let Some(i) = (0..n).find(|&i| bumped[i].is_finite()) {
                    bumped[i] += r.gen_range(0.01..1.0);
                }
                for g in [&f, &pr.values, &bumped] {
                    probes += 1;
                    if is_minimal_by_probe(&x, g, 1e-3) == is_extremal(&x, g, 1e-9).unwrap() {
                        probe += 1;
                    }
                }
            }
        }
        let ok = iso == 100 && conv == 100 && below == 100 && probe == probes;
        (ok, format!("isometry {iso}/100, converged {conv}/100, below input {below}/100, probe agreement {probe}/{probes}"))
    })
}

fn ac8() -> Criterion {
    timed("AC8", Duration::from_secs(60), || {
        let (mut d1_ok, mut sandwich_ok) = (0, 0);
        for seed in 0..200u64 {
            let mut r = rng(2000 + seed);
            let x = random_space(&mut r, 1, 6, 0.25);
            let a = random_subset(&mut r, x.len(), 2);
            let b = random_subset(&mut r, x.len(), 2);
            let h = hausdorff(&x, &a, &b).get();
            let d1 = d1_hyperspace(&x, &a, &b).unwrap().0.get();
            if le(h, d1) {
                d1_ok += 1;
            }
            let hinf = dp_distance(&BuiltinFunctor::CappedHyperspace(2), &x, PNorm::Infinity, &Element::set(a.clone()), &Element::set(b.clone())).unwrap().0.get();
            if le(h, hinf) && le(hinf, 3.0 * h) {
                sandwich_ok += 1;
            }
        }
        let tri = triangle_centroid();
        let (st, _) = steiner_tree(&tri, &[0, 1, 2]).unwrap();
        let d1_tri = d1_hyperspace(&tri, &[0, 1, 2], &[3]).unwrap().0.get();
        let steiner = (st - 3f64.sqrt()).abs() <= 1e-9 && (d1_tri - 3f64.sqrt()).abs() <= 1e-9;
        (d1_ok == 200 && sandwich_ok == 200 && steiner, format!("H <= d1 {d1_ok}/200, sandwich {sandwich_ok}/200, Steiner {st}, d1 {d1_tri}"))
    })
}

fn ac9() -> Criterion {
    timed("AC9", Duration::from_secs(120), || {
        let c = cantor_set(8);
        let scales: Vec<f64> = (1..=8).map(|j| 3f64.powi(-j)).collect();
        let slope = box_dim_estimate(&c, &scales).unwrap().least_squares_slope;
        let slope_ok = (slope - 2f64.ln() / 3f64.ln()).abs() <= 0.05;
        let (mut checks, mut held) = (0, 0);
        for seed in 0..20u64 {
            let mut r = rng(3000 + seed);
            let x = random_space(&mut r, 1, 4, 0.25);
            let f = SUITE_FUNCTORS[seed as usize % SUITE_FUNCTORS.len()];
            let p = PS[r.gen_range(0..3)];
            let mut qs = distance_quantiles(&x);
            while qs.len() < 3 {
                qs.push(qs[qs.len() - 1] * 2.0);
            }
            for eps in qs {
                checks += 1;
                if functor_entropy_check(&f, &x, p, eps).unwrap().holds {
                    held += 1;
                }
            }
        }
        (slope_ok && held == checks && checks == 60, format!("Cantor C_8 slope {slope}, entropy bounds {held}/{checks}"))
    })
}

/// The one-step chain that moves both points of each pair at once.
fn ex1_direct_chain_cost(p: PNorm) -> f64 {
    let x = ex1_x();
    let f = BuiltinFunctor::NonemptyPairs;
    let step = ChainStep { carrier: Element::set([0, 1]), f: vec![0, 1], g: vec![2, 3] };
    let cost = p.combine([x.d(0, 2), x.d(1, 3)]);
    LinkingChain { steps: vec![step], cost }.validate(&f, &x, p, &Element::set([0, 1]), &Element::set([2, 3])).unwrap()
}

fn run_all() -> Vec<Criterion> {
    vec![ac1(), ac2(), ac3(), ac4(), ac5(), ac6(), ac7(), ac8(), ac9()]
}

fn main() {
    let first = run_all();
    let second = run_all();
    let same = first.iter().zip(&second).all(|(a, b)| a.pass == b.pass && a.detail == b.detail);
    let mut all = first;
    all.push(Criterion { id: "AC10", pass: same, detail: "two full runs compared field by field".into(), elapsed: Duration::ZERO });
    for c in &all {
        println!("[{}] {} ({:.2?}) {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.elapsed, c.detail);
    }

    // AC1 fails for p > 1 on X and for p = ∞ on Y: a valid one-step chain
    // costs 10·2^(1/p), below the expected closed form. Everything else must pass.
    let failing: Vec<&str> = all.iter().filter(|c| !c.pass).map(|c| c.id).collect();
    assert_eq!(failing, ["AC1"], "unexpected acceptance outcome");
    for (on_y, p, computed) in [(false, PNorm::TWO, 200f64.sqrt()), (false, PNorm::Infinity, 10.0), (true, PNorm::Infinity, 10.0)] {
        let r = ex1_row(on_y, p);
        assert!(!r.pass && (r.computed.0 - computed).abs() <= 1e-9, "{} p={:?}: {}", r.name, r.p, r.computed.0);
        assert!((ex1_direct_chain_cost(p) - computed).abs() <= 1e-9);
    }
    for (on_y, p) in [(false, PNorm::ONE), (true, PNorm::ONE), (true, PNorm::TWO)] {
        assert!(ex1_row(on_y, p).pass);
    }
}
