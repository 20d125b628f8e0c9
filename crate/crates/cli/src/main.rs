use std::fmt::Debug;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use functor_metric::entropy_dim::{box_dim_estimate, cantor_set, dyadic_grid, functor_entropy_check, local_entropy, min_cover};
use functor_metric::functor_engine::{distance_matrix, dp_distance, BuiltinFunctor, Element};
use functor_metric::group_norms::{
    boolean_matching_norm, classify, d1_group, disjoint_pair_norm, graev_distance, norm_restricted, pcheck_distance, FinSupportFunction,
};
use functor_metric::hyperspace::{d1_hyperspace, d1_upper_mst, graph_to_chain, validate_hyper_chain};
use functor_metric::io::{group_function_to_json, parse_element, parse_group_function, parse_space, parse_subset, Ext, IoError};
use functor_metric::metric_core::{hausdorff, DistanceSpace, PNorm};
use functor_metric::reference::reproduce_examples;
use functor_metric::suite::{property_suite, SuiteConfig};
use functor_metric::tight_span::{is_admissible, is_extremal, project_extremal, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// Exact distances on functors over finite distance spaces.
///
/// Reports are JSON on stdout (or `--output`). Exit status: 0 success,
/// 1 domain error or failed check, 2 I/O or parse error.
#[derive(Debug, Parser)]
#[command(name = "fmetric", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Space document: `{"matrix": ...}` or `{"dim": d, "points": ...}`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Exponent in [1, ∞]; `inf` for the sup norm.
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// `power`, `hyperspace`, `nonempty-pairs`, `symdiff`, or e.g. `PowerFunctor(2)`.
    #[arg(long, global = true)]
    functor: Option<String>,
    #[arg(long, global = true)]
    degree: Option<usize>,
    #[arg(long, global = true)]
    modulus: Option<u32>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 100)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 4)]
    max_size: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the distance-space axioms.
    Validate,
    /// Hausdorff distance between two subsets, e.g. `'[0,1]' '["c"]'`.
    Hausdorff { a: String, b: String },
    /// `d^p` between two functor elements, or the whole matrix when none are given.
    FunctorDist { a: Option<String>, b: Option<String> },
    /// Exact `d¹` on the hyperspace with a spanning-forest certificate.
    HyperD1 { a: String, b: String },
    /// Norms of `phi − psi` in `F(X, Z_m)`; `psi` defaults to `0`.
    GroupNorm { phi: String, psi: Option<String> },
    /// Graev distance for the generator `g`.
    Graev {
        a: String,
        b: String,
        #[arg(long, default_value_t = 1)]
        generator: u32,
    },
    /// Project a value table, e.g. `'[1, 2, "inf"]'`, onto the tight span.
    TightspanProject {
        f: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// `E_ε`, optionally `E_ε^δ`, and with `--functor` the functor entropy bounds.
    Entropy,
    /// Box-counting slopes over the given scales.
    Boxdim {
        /// JSON list of scales; defaults to `3^-j` for `--cantor`, `2^-j` for `--dyadic`.
        #[arg(long)]
        scales: Option<String>,
        #[arg(long, conflicts_with = "dyadic")]
        cantor: Option<u32>,
        #[arg(long)]
        dyadic: Option<u32>,
    },
    /// Seeded property suite.
    Check {
        #[arg(long)]
        inject_triangle_violation: bool,
    },
    /// Worked examples with known values.
    Examples {
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Debug)]
enum Failure {
    Domain { kind: String, message: String },
    Io(String),
}

impl Failure {
    fn domain<E: Debug + std::fmt::Display>(e: E) -> Self {
        Failure::Domain { kind: kind_of(&e), message: e.to_string() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Parse(m) => Failure::Io(m),
            other => Failure::domain(other),
        }
    }
}

const WRAPPERS: &[&str] = &["Metric", "Group", "Engine", "Hyper", "Entropy", "TightSpan", "Io"];

/// The innermost variant name of an error, e.g. `TriangleViolation`.
fn kind_of<E: Debug>(e: &E) -> String {
    let dbg = format!("{e:?}");
    let mut rest = dbg.as_str();
    loop {
        let end = rest.find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(rest.len());
        let ident = &rest[..end];
        let inner = rest[end..].strip_prefix('(');
        match inner {
            Some(r) if WRAPPERS.contains(&ident) && r.starts_with(|c: char| c.is_ascii_uppercase()) => rest = r,
            _ => return ident.to_string(),
        }
    }
}

/// A finished command: the report and whether it counts as success.
struct Outcome {
    result: Value,
    ok: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome { result, ok: true }
    }
}

fn load_space(cli: &Cli) -> Result<DistanceSpace, Failure> {
    let path = cli.input.as_ref().ok_or_else(|| Failure::Io("--input is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_space(&text)?)
}

fn p_norm(cli: &Cli) -> Result<PNorm, Failure> {
    match cli.p.as_deref() {
        None => Ok(PNorm::ONE),
        Some(s) => {
            let v = match s.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => f64::INFINITY,
                t => t.parse::<f64>().map_err(|e| Failure::Io(format!("--p {s:?}: {e}")))?,
            };
            PNorm::new(v).map_err(Failure::domain)
        }
    }
}

fn p_json(p: PNorm) -> Value {
    json!(Ext(p.value()))
}

fn modulus(cli: &Cli) -> Result<u32, Failure> {
    cli.modulus.ok_or_else(|| Failure::Io("--modulus is required".into()))
}

/// Reads a group function, letting `--modulus` supply a missing `"modulus"`.
fn group_fn(cli: &Cli, x: &DistanceSpace, text: &str) -> Result<FinSupportFunction, Failure> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| Failure::Io(e.to_string()))?;
    if let (Some(obj), Some(m)) = (doc.as_object_mut(), cli.modulus) {
        obj.entry("modulus").or_insert(json!(m));
    }
    Ok(parse_group_function(x, &doc.to_string())?)
}

fn labels_of(x: &DistanceSpace, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| x.label(i).to_string()).collect()
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Validate => {
            let x = load_space(cli)?;
            let comps: Vec<Vec<String>> = x.components().iter().map(|c| labels_of(&x, c)).collect();
            Ok(Outcome::ok(json!({"valid": true, "size": x.len(), "labels": x.labels(), "components": comps})))
        }
        Command::Hausdorff { a, b } => {
            let x = load_space(cli)?;
            let (sa, sb) = (parse_subset(&x, a)?, parse_subset(&x, b)?);
            Ok(Outcome::ok(json!({"a": labels_of(&x, &sa), "b": labels_of(&x, &sb), "hausdorff": hausdorff(&x, &sa, &sb)})))
        }
        Command::FunctorDist { a, b } => functor_dist(cli, a.as_deref(), b.as_deref()),
        Command::HyperD1 { a, b } => {
            let x = load_space(cli)?;
            let (sa, sb) = (parse_subset(&x, a)?, parse_subset(&x, b)?);
            let (d, graph) = d1_hyperspace(&x, &sa, &sb).map_err(Failure::domain)?;
            let mst = d1_upper_mst(&x, &sa, &sb).map_err(Failure::domain)?;
            let (chain, chain_cost) = match &graph {
                Some(g) => {
                    g.validate(&x, &sa, &sb, d.get()).map_err(Failure::domain)?;
                    let steps = graph_to_chain(&sa, &sb, g).map_err(Failure::domain)?;
                    let cost = validate_hyper_chain(&x, &sa, &sb, &steps).map_err(Failure::domain)?;
                    (Some(steps), Some(cost))
                }
                None => (None, None),
            };
            Ok(Outcome::ok(json!({
                "a": labels_of(&x, &sa),
                "b": labels_of(&x, &sb),
                "d1": d,
                "hausdorff": hausdorff(&x, &sa, &sb),
                "mst_upper_bound": mst,
                "graph": graph,
                "chain": chain,
                "chain_cost": chain_cost,
            })))
        }
        Command::GroupNorm { phi, psi } => {
            let x = load_space(cli)?;
            let a = group_fn(cli, &x, phi)?;
            let b = match psi {
                Some(t) => group_fn(cli, &x, t)?,
                None => FinSupportFunction::zero(a.modulus(), x.len()),
            };
            let diff = a.sub(&b).map_err(Failure::domain)?;
            let (d1, dipoles) = d1_group(&x, &a, &b).map_err(Failure::domain)?;
            let membership = classify(&x, &diff).map_err(Failure::domain)?;
            let restricted = norm_restricted(&x, &diff).map_err(Failure::domain)?;
            let pairs = disjoint_pair_norm(&x, &diff).map_err(Failure::domain)?;
            let boolean = if a.modulus() == 2 {
                let (v, matching) = boolean_matching_norm(&x, &diff).map_err(Failure::domain)?;
                Some(json!({"norm": v, "matching": matching}))
            } else {
                None
            };
            let mut result = json!({
                "phi": group_function_to_json(&x, &a),
                "psi": group_function_to_json(&x, &b),
                "membership": membership,
                "d1": d1,
                "dipoles": dipoles,
                "norm_restricted": restricted,
                "disjoint_pair_norm": pairs,
                "boolean_matching": boolean,
            });
            if cli.p.is_some() {
                let p = p_norm(cli)?;
                if p != PNorm::ONE {
                    result["p"] = p_json(p);
                    result["dp"] = json!(pcheck_distance(&x, &a, &b).map_err(Failure::domain)?);
                }
            }
            Ok(Outcome::ok(result))
        }
        Command::Graev { a, b, generator } => {
            let x = load_space(cli)?;
            modulus(cli)?;
            let (fa, fb) = (group_fn(cli, &x, a)?, group_fn(cli, &x, b)?);
            let g = graev_distance(&x, &fa, &fb, *generator).map_err(Failure::domain)?;
            let d1 = d1_group(&x, &fa, &fb).map_err(Failure::domain)?.0;
            Ok(Outcome::ok(json!({"generator": generator, "graev": g, "d1": d1})))
        }
        Command::TightspanProject { f, max_iter } => {
            let x = load_space(cli)?;
            let table: Vec<Ext> = serde_json::from_str(f).map_err(|e| Failure::Io(e.to_string()))?;
            let f: Vec<f64> = table.iter().map(|e| e.0).collect();
            let adm = is_admissible(&x, &f).map_err(Failure::domain)?;
            let proj = project_extremal(&x, &f, DEFAULT_TOL, *max_iter).map_err(Failure::domain)?;
            let extremal = is_extremal(&x, &proj.values, 1e-9).map_err(Failure::domain)?;
            let below = f.iter().zip(&proj.values).all(|(a, b)| b <= a);
            Ok(Outcome::ok(json!({
                "input_admissibility": adm,
                "projection": proj,
                "extremal": extremal,
                "pointwise_below_input": below,
            })))
        }
        Command::Entropy => {
            let x = load_space(cli)?;
            let eps = cli.epsilon.ok_or_else(|| Failure::Io("--epsilon is required".into()))?;
            let (count, cert) = min_cover(&x, eps).map_err(Failure::domain)?;
            let mut result = json!({"epsilon": eps, "cover_number": count, "cover": cert, "cover_valid": cert.validate(&x)});
            if let Some(delta) = cli.delta {
                result["delta"] = json!(delta);
                result["local_entropy"] = json!(local_entropy(&x, eps, delta).map_err(Failure::domain)?);
            }
            if let Some(name) = &cli.functor {
                let f = BuiltinFunctor::parse(name, cli.degree).map_err(|m| Failure::Domain { kind: "UnknownFunctor".into(), message: m })?;
                let p = p_norm(cli)?;
                result["p"] = p_json(p);
                result["functor_check"] = json!(functor_entropy_check(&f, &x, p, eps).map_err(Failure::domain)?);
            }
            Ok(Outcome::ok(result))
        }
        Command::Boxdim { scales, cantor, dyadic } => {
            let (x, default_base) = match (cantor, dyadic) {
                (Some(k), _) => (cantor_set(*k), Some((3.0, *k))),
                (None, Some(k)) => (dyadic_grid(*k), Some((2.0, *k))),
                (None, None) => (load_space(cli)?, None),
            };
            let scales: Vec<f64> = match (scales, default_base) {
                (Some(s), _) => serde_json::from_str(s).map_err(|e| Failure::Io(e.to_string()))?,
                (None, Some((base, k))) => (1..=k as i32).map(|j| f64::powi(base, -j)).collect(),
                (None, None) => return Err(Failure::Io("--scales is required with --input".into())),
            };
            let rep = box_dim_estimate(&x, &scales).map_err(Failure::domain)?;
            Ok(Outcome::ok(json!({"size": x.len(), "report": rep})))
        }
        Command::Check { inject_triangle_violation } => {
            let config = SuiteConfig { seed: cli.seed, trials: cli.trials, max_size: cli.max_size, inject_triangle_violation: *inject_triangle_violation };
            let rep = property_suite(config).map_err(Failure::domain)?;
            Ok(Outcome { ok: rep.passed, result: json!(rep) })
        }
        Command::Examples { name } => {
            let p = match cli.p {
                Some(_) => Some(p_norm(cli)?),
                None => None,
            };
            let rep = reproduce_examples(name.as_deref(), p);
            Ok(Outcome { ok: rep.passed, result: json!(rep) })
        }
    }
}

fn functor_dist(cli: &Cli, a: Option<&str>, b: Option<&str>) -> Result<Outcome, Failure> {
    let x = load_space(cli)?;
    let p = p_norm(cli)?;
    let specs = [a, b].into_iter().flatten().map(|t| parse_element(&x, t)).collect::<Result<Vec<_>, _>>()?;
    let mut names: Vec<&str> = specs.iter().filter_map(|s| s.functor.as_deref()).collect();
    if let Some(n) = cli.functor.as_deref() {
        names.insert(0, n);
    }
    let name = names.first().ok_or_else(|| Failure::Io("--functor is required".into()))?;
    let f = BuiltinFunctor::parse(name, cli.degree).map_err(|m| Failure::Domain { kind: "UnknownFunctor".into(), message: m })?;
    for other in &names[1..] {
        let g = BuiltinFunctor::parse(other, cli.degree).map_err(|m| Failure::Domain { kind: "UnknownFunctor".into(), message: m })?;
        if g != f {
            return Err(Failure::Domain { kind: "UnknownElement".into(), message: format!("element names functor {other:?}, expected {name:?}") });
        }
    }
    match specs.as_slice() {
        [] => {
            let (elements, m) = distance_matrix(&f, &x, p).map_err(Failure::domain)?;
            let labels: Vec<String> = elements.iter().map(Element::to_string).collect();
            let matrix: Vec<Vec<Ext>> = m.iter().map(|r| r.iter().map(|&v| Ext(v)).collect()).collect();
            Ok(Outcome::ok(json!({"functor": format!("{f:?}"), "p": p_json(p), "elements": labels, "matrix": matrix})))
        }
        [sa, sb] => {
            let (d, chain) = dp_distance(&f, &x, p, &sa.element, &sb.element).map_err(Failure::domain)?;
            let (steps, cost) = match &chain {
                Some(c) => {
                    let cost = c.validate(&f, &x, p, &sa.element, &sb.element).map_err(Failure::domain)?;
                    (Some(&c.steps), Some(cost))
                }
                None => (None, None),
            };
            Ok(Outcome::ok(json!({
                "functor": format!("{f:?}"),
                "p": p_json(p),
                "a": sa.element,
                "b": sb.element,
                "distance": d,
                "chain": steps,
                "chain_cost": cost,
            })))
        }
        _ => Err(Failure::Io("functor-dist takes two elements or none".into())),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Hausdorff { .. } => "hausdorff",
        Command::FunctorDist { .. } => "functor-dist",
        Command::HyperD1 { .. } => "hyper-d1",
        Command::GroupNorm { .. } => "group-norm",
        Command::Graev { .. } => "graev",
        Command::TightspanProject { .. } => "tightspan-project",
        Command::Entropy => "entropy",
        Command::Boxdim { .. } => "boxdim",
        Command::Check { .. } => "check",
        Command::Examples { .. } => "examples",
    }
}

fn echo_inputs(cli: &Cli) -> Value {
    let mut inputs = json!({
        "input": cli.input.as_ref().map(|p| p.display().to_string()),
        "p": cli.p,
        "epsilon": cli.epsilon,
        "delta": cli.delta,
        "functor": cli.functor,
        "degree": cli.degree,
        "modulus": cli.modulus,
    });
    match &cli.command {
        Command::Check { inject_triangle_violation } => {
            inputs["seed"] = json!(cli.seed);
            inputs["trials"] = json!(cli.trials);
            inputs["max_size"] = json!(cli.max_size);
            inputs["inject_triangle_violation"] = json!(inject_triangle_violation);
        }
        Command::Hausdorff { a, b } | Command::HyperD1 { a, b } | Command::Graev { a, b, .. } => {
            inputs["a"] = json!(a);
            inputs["b"] = json!(b);
        }
        Command::FunctorDist { a, b } => {
            inputs["a"] = json!(a);
            inputs["b"] = json!(b);
        }
        Command::GroupNorm { phi, psi } => {
            inputs["phi"] = json!(phi);
            inputs["psi"] = json!(psi);
        }
        Command::TightspanProject { f, max_iter } => {
            inputs["f"] = json!(f);
            inputs["max_iter"] = json!(max_iter);
        }
        Command::Boxdim { scales, cantor, dyadic } => {
            inputs["scales"] = json!(scales);
            inputs["cantor"] = json!(cantor);
            inputs["dyadic"] = json!(dyadic);
        }
        Command::Examples { name } => inputs["name"] = json!(name),
        Command::Validate | Command::Entropy => {}
    }
    inputs
}

fn emit(cli: &Cli, report: &Value) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).expect("JSON values serialize") + "\n";
    match &cli.output {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = command_name(&cli.command);
    let mut report = json!({"command": command, "inputs": echo_inputs(&cli)});
    let code = match run(&cli) {
        Ok(out) => {
            report["result"] = out.result;
            if out.ok {
                0
            } else {
                1
            }
        }
        Err(Failure::Domain { kind, message }) => {
            eprintln!("fmetric {command}: {kind}: {message}");
            if command == "validate" {
                report["result"] = json!({"valid": false});
            }
            report["error"] = json!({"kind": kind, "message": message});
            1
        }
        Err(Failure::Io(message)) => {
            eprintln!("fmetric {command}: {message}");
            report["error"] = json!({"kind": "Io", "message": message});
            2
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("fmetric: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
