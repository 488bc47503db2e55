use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde_json::{json, Map, Value};

use forestvol::coeffs::{pattern_census, CoeffEngine};
use forestvol::enumerate::{enumerate_spanning_trees, Tree};
use forestvol::interp::{
    approximate_volume_with, format_rational_sci, max_admissible_delta, plan, radius_certificate,
    InterpolationResult, VolumeOptions,
};
use forestvol::oracles::{exact_p1, exact_volume, mc_volume, penrose_check, root_check};
use forestvol::poly::format_rational;
use forestvol::weight::{decompose, tree_weight_in_graph, CellBounds, DeltaParams, TreeShape};
use forestvol::{Error, Graph};

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  1  other runtime failure (including a failed selftest)
  2  invalid flags or values
  3  graph file unreadable or malformed
  4  delta too large for the zero-free radius certificate
  5  graph too large for the exhaustive oracles";

#[derive(Parser, Debug)]
#[command(name = "forestvol", version, about = "Certified volume approximation for truncated independent-set polytopes", after_help = EXIT_HELP)]
struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Output::Json)]
    output: Output,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certified (1±eps) approximation of the volume.
    Volume {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
        #[arg(long, value_parser = parse_eps)]
        eps: BigRational,
        /// Issue the certificate for this maximum degree (must bound the actual one).
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Exact volume by enumerating every forest (small graphs only).
    Exact {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
    },
    /// Monte Carlo volume estimate.
    Mc {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
        #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Log-series coefficients and the pattern table behind them.
    Coeffs {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
        /// Number of coefficients; defaults to the order `volume` would use for --eps.
        #[arg(long, required_unless_present = "eps")]
        order: Option<usize>,
        #[arg(long, value_parser = parse_eps)]
        eps: Option<BigRational>,
        #[arg(long)]
        max_degree: Option<usize>,
    },
    /// Exact tree weights for the spanning trees of a graph, or one given tree.
    Weights {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
        /// Comma-separated edge indices (file order, from 0) of a single tree.
        #[arg(long, value_delimiter = ',')]
        tree: Option<Vec<usize>>,
        /// Print every integration cell to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Zero-free radius certificate.
    Radius {
        #[arg(long)]
        max_degree: usize,
        #[arg(long, value_parser = parse_delta)]
        delta: BigRational,
    },
    /// Quick built-in consistency checks.
    Selftest,
}

fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(format!("{s:?}: decimals are not accepted, write an exact fraction like 1/100"));
    }
    BigRational::from_str(s).map_err(|_| format!("{s:?} is not a fraction p/q"))
}

fn parse_delta(s: &str) -> Result<BigRational, String> {
    let d = parse_rational(s)?;
    if d.is_negative() || d >= BigRational::new(1.into(), 2.into()) {
        return Err(format!("delta must lie in [0, 1/2), got {s}"));
    }
    Ok(d)
}

fn parse_eps(s: &str) -> Result<BigRational, String> {
    let e = parse_rational(s)?;
    if !e.is_positive() || e >= BigRational::from_integer(1.into()) {
        return Err(format!("eps must lie in (0, 1), got {s}"));
    }
    Ok(e)
}

enum Failure {
    Input(String),
    Core(Error),
    Selftest(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn load_graph(path: &PathBuf) -> Result<Graph, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Graph::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn dp_of(delta: &BigRational) -> Result<DeltaParams, Failure> {
    Ok(DeltaParams::new(delta.clone())?)
}

fn rat(x: &BigRational) -> Value {
    Value::String(format_rational(x))
}

fn volume_json(res: &InterpolationResult) -> Value {
    json!({
        "xi": res.xi,
        "lower": res.lower,
        "upper": res.upper,
        "ln_xi": res.ln_xi,
        "ln_lower": res.ln_lower,
        "ln_upper": res.ln_upper,
        "exact": res.exact.as_ref().map(format_rational),
        "n": res.n,
        "m": res.m,
        "max_degree": res.max_degree,
        "delta": format_rational(&res.delta),
        "eps": format_rational(&res.eps),
        "R": res.certificate.as_ref().map(|c| c.radius_f64()),
        "witness": res.certificate.as_ref().map(|c| format_rational(&c.witness)),
        "K": res.order,
        "tail_bound": res.tail_bound,
        "a": res.a.a.iter().map(format_rational).collect::<Vec<_>>(),
        "wall_ms": res.wall_ms,
    })
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Volume {
            graph,
            delta,
            eps,
            max_degree,
        } => {
            let g = load_graph(graph)?;
            let engine = CoeffEngine::new(dp_of(delta)?);
            let opts = VolumeOptions {
                eps: eps.clone(),
                degree_cap: *max_degree,
            };
            Ok(volume_json(&approximate_volume_with(&engine, &g, &opts)?))
        }
        Command::Exact { graph, delta } => {
            let g = load_graph(graph)?;
            let dp = dp_of(delta)?;
            let vol = exact_volume(&g, &dp)?;
            Ok(json!({
                "vol": format_rational(&vol),
                "vol_decimal": format_rational_sci(&vol, 20),
                "p1": format_rational(&exact_p1(&g, &dp)?),
                "n": g.n(),
                "m": g.m(),
                "delta": format_rational(delta),
            }))
        }
        Command::Mc {
            graph,
            delta,
            samples,
            seed,
        } => {
            let g = load_graph(graph)?;
            let est = mc_volume(&g, &dp_of(delta)?, *samples, *seed);
            Ok(json!({
                "mean": est.mean,
                "stderr": est.stderr,
                "samples": est.samples,
                "accepted": est.accepted,
                "seed": est.seed,
            }))
        }
        Command::Coeffs {
            graph,
            delta,
            order,
            eps,
            max_degree,
        } => {
            let g = load_graph(graph)?;
            let dp = dp_of(delta)?;
            let order = match (order, eps) {
                (Some(k), _) => *k,
                (None, Some(eps)) => {
                    let opts = VolumeOptions {
                        eps: eps.clone(),
                        degree_cap: *max_degree,
                    };
                    plan(&g, &dp, &opts)?.map_or(0, |(_, k, _)| k)
                }
                (None, None) => unreachable!("clap requires one of them"),
            };
            let engine = CoeffEngine::new(dp);
            let a = engine.assemble_a(&g, order)?;
            let mut patterns = Vec::new();
            if order > 0 {
                let census = pattern_census(&g, 2 * order)?;
                let keys = census.classes.iter().map(|(k, (h, _))| (k.clone(), h.clone())).collect();
                let table = engine.gamma_table(&keys, order)?;
                for (key, (_, count)) in &census.classes {
                    let gamma: Map<String, Value> = (1..=order)
                        .filter(|&k| key.vertex_count() <= 2 * k)
                        .map(|k| (k.to_string(), rat(table.gamma(key, k).expect("full order"))))
                        .collect();
                    patterns.push(json!({
                        "key": key.to_hex(),
                        "n": key.vertex_count(),
                        "count": count,
                        "gamma": gamma,
                    }));
                }
            }
            Ok(json!({
                "K": order,
                "n": g.n(),
                "delta": format_rational(delta),
                "patterns": patterns,
                "a": a.a.iter().map(format_rational).collect::<Vec<_>>(),
            }))
        }
        Command::Weights {
            graph,
            delta,
            tree,
            trace,
        } => {
            let g = load_graph(graph)?;
            let dp = dp_of(delta)?;
            let trees = match tree {
                Some(edges) => {
                    if let Some(&bad) = edges.iter().find(|&&e| e >= g.m()) {
                        return Err(Failure::Input(format!("edge index {bad} out of range (m = {})", g.m())));
                    }
                    vec![Tree::from_edges(&g, edges.iter().copied().collect())?]
                }
                None => {
                    if g.m() > forestvol::oracles::EXACT_MAX_EDGES {
                        return Err(Error::SizeGuard { n: g.n(), m: g.m() }.into());
                    }
                    enumerate_spanning_trees(&g)?
                }
            };
            let mut records = Vec::new();
            for t in &trees {
                let rec = tree_weight_in_graph(&g, t, &dp)?;
                if *trace {
                    let shape = TreeShape::in_graph(&g, t)?;
                    eprintln!("tree {:?} broken {:?}", rec.tree_edges, rec.broken_edges);
                    decompose(&shape, &CellBounds::for_delta(&dp), |cell| {
                        let label = |x: &Option<usize>, sentinel: &str| match x {
                            Some(v) => shape.vertex_map[*v].to_string(),
                            None => sentinel.to_string(),
                        };
                        let s: Vec<String> = cell.map.s.iter().map(|x| label(x, "+")).collect();
                        let t: Vec<String> = cell.map.t.iter().map(|x| label(x, "-")).collect();
                        let nice: Vec<usize> = cell.nice.iter().map(|v| shape.vertex_map[v]).collect();
                        eprintln!(
                            "  S={nice:?} s={s:?} t={t:?} arcs={:?} integrand={} value={}",
                            cell.poset.arcs,
                            cell.integrand,
                            cell.value.map_or("cyclic".into(), format_rational),
                        );
                    });
                }
                records.push(json!({
                    "tree_edges": rec.tree_edges,
                    "broken_edges": rec.broken_edges,
                    "vertices": rec.vertices,
                    "hat_w": format_rational(&rec.hat_w),
                    "w": format_rational(&rec.w),
                }));
            }
            Ok(Value::Array(records))
        }
        Command::Radius { max_degree, delta } => {
            let cert = radius_certificate(*max_degree, delta)?;
            if !cert.valid {
                return Err(Error::DeltaTooLarge {
                    delta: format_rational(delta),
                    max_degree: *max_degree,
                    radius: cert.radius_f64(),
                    max_delta: max_admissible_delta(*max_degree),
                }
                .into());
            }
            Ok(json!({
                "max_degree": max_degree,
                "delta": format_rational(delta),
                "R": cert.radius_f64(),
                "R_exact": format_rational(&cert.radius),
                "witness": format_rational(&cert.witness),
                "valid": cert.valid,
                "max_delta": max_admissible_delta(*max_degree),
            }))
        }
        Command::Selftest => selftest(),
    }
}

fn selftest() -> Result<Value, Failure> {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(json!({ "name": name, "passed": passed, "detail": detail }));
    };

    let quarter = DeltaParams::new(q(1, 4))?;
    let k2 = exact_volume(&Graph::path(2), &quarter)?;
    check("edge volume is 7/16", k2 == q(7, 16), format_rational(&k2));

    let hundredth = DeltaParams::new(q(1, 100))?;
    let p3 = exact_volume(&Graph::path(3), &hundredth)?;
    let h = q(51, 100);
    let d = q(1, 100);
    let closed = &h * &h * &h - q(4, 1) * &d * &d * &h + q(8, 3) * &d * &d * &d;
    check("path on three vertices", p3 == closed, format_rational(&p3));

    let tri = Graph::complete(3);
    let exact = exact_volume(&tri, &quarter)?.to_f64().unwrap_or(f64::NAN);
    let mc = mc_volume(&tri, &quarter, 200_000, 1);
    check(
        "triangle exact vs Monte Carlo",
        (exact - mc.mean).abs() <= 4.0 * mc.stderr,
        format!("{exact} vs {} ± {}", mc.mean, mc.stderr),
    );

    let k4 = penrose_check(&Graph::complete(4))?;
    check(
        "interval partition of K4",
        k4.holds() && k4.connected_spanning_subgraphs == 38,
        format!("{} connected spanning subgraphs", k4.connected_spanning_subgraphs),
    );

    let cert = radius_certificate(3, &q(1, 100))?;
    let r = cert.radius_f64();
    check("radius for degree 3", (2.04..=2.05).contains(&r) && cert.verify(), format!("R = {r}"));

    let cube = Graph::new(8, (0..8usize).flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b)))).filter(|&(u, v)| u < v))?;
    let roots = root_check(&cube, &hundredth, r)?;
    check(
        "cube roots outside radius",
        roots.passed,
        format!("min |root| = {:?}", roots.min_modulus),
    );

    let res = forestvol::interp::approximate_volume(&Graph::cycle(6), &q(1, 100), &q(1, 100))?;
    let exact = exact_volume(&Graph::cycle(6), &hundredth)?;
    let ln_exact = forestvol::interp::ln_rational(&exact);
    check(
        "hexagon estimate brackets exact volume",
        res.ln_lower <= ln_exact && ln_exact <= res.ln_upper,
        format!("xi = {}", res.xi),
    );

    let passed = checks.iter().all(|c| c["passed"] == Value::Bool(true));
    let doc = json!({ "passed": passed, "checks": checks });
    if passed {
        Ok(doc)
    } else {
        Err(Failure::Selftest(doc))
    }
}

fn render(value: &Value, output: Output) -> String {
    match output {
        Output::Json => serde_json::to_string_pretty(value).expect("serialisable"),
        Output::Text => {
            let mut out = String::new();
            text_lines(value, "", &mut out);
            out.trim_end().to_string()
        }
    }
}

fn text_lines(value: &Value, prefix: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(v, &key, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object() || v.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                text_lines(v, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{prefix}: [{}]\n", parts.join(", ")));
        }
        _ => out.push_str(&format!("{prefix}: {}\n", scalar(value))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 3,
        Error::DeltaTooLarge { .. } => 4,
        Error::SizeGuard { .. } => 5,
        Error::InvalidDelta(_) | Error::InvalidEps(_) | Error::DegreeTooSmall(_) | Error::DegreeCap { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(value) => {
            println!("{}", render(&value, cli.output));
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Selftest(doc)) => {
            println!("{}", render(&doc, cli.output));
            eprintln!("error: selftest failed");
            ExitCode::from(1)
        }
        Err(Failure::Core(err)) => {
            eprintln!("error: {err}");
            if let Error::DeltaTooLarge { max_delta, .. } = &err {
                eprintln!("max_delta: {max_delta:.6e}");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
