use std::fmt::{Debug, Display};
use std::path::Path;

use motherbody::branch::{expand_probability_branch, genericity_irreducible, is_balanced, probability_branch_test, BranchSeries};
use motherbody::eigen::{operator_from_balanced, principal_runs, symbol_residual, EigenRun};
use motherbody::measure::SignedMeasure;
use motherbody::mother::{enumerate_spanning_subgraphs, motherbody_candidates, positivity_criterion};
use motherbody::polyalg::json::{bi_from_json, triple_from_json, JsonScalar};
use motherbody::polyalg::{newton_support, BiPoly};
use motherbody::quaddiff::{
    build_dk0, build_theta, singular_points, strebel_surrogate, svg, BuildOptions, EmbeddedGraph, QuadraticDifferential,
    SingularKind, TrajectoryGraph,
};
use motherbody::verify::{compare_branch, sample_points, Equation};
use motherbody::C64;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::config::*;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io { path: String, detail: String },
    Parse { path: String, detail: String },
    /// A module refused the input; `code` is the error variant.
    Analysis { code: String, detail: String },
}

impl CliError {
    pub fn code(&self) -> String {
        match self {
            CliError::Usage(_) => "Usage".into(),
            CliError::Io { .. } => "Io".into(),
            CliError::Parse { .. } => "Parse".into(),
            CliError::Analysis { code, .. } => code.clone(),
        }
    }

    pub fn detail(&self) -> String {
        match self {
            CliError::Usage(d) | CliError::Analysis { detail: d, .. } => d.clone(),
            CliError::Io { path, detail } | CliError::Parse { path, detail } => format!("{path}: {detail}"),
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Analysis { .. } => 2,
            _ => 1,
        }
    }
}

const WRAPPERS: [&str; 6] = ["Quad", "Graph", "Poly", "Root", "Branch", "Eigen"];

/// Innermost variant name of a module error, from its Debug form.
fn variant_name(debug: &str) -> String {
    let mut rest = debug;
    loop {
        let end = rest.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(rest.len());
        let name = &rest[..end];
        if WRAPPERS.contains(&name) && rest[end..].starts_with('(') {
            rest = &rest[end + 1..];
            continue;
        }
        return name.to_string();
    }
}

fn analysis<E: Debug + Display>(e: E) -> CliError {
    CliError::Analysis { code: variant_name(&format!("{e:?}")), detail: e.to_string() }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), detail: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.display().to_string(), detail: e.to_string() })
}

fn parse_err<E: Display>(path: &Path) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Parse { path: path.display().to_string(), detail: e.to_string() }
}

fn read_triple(path: &Path) -> Result<QuadraticDifferential, CliError> {
    let [p, q, r] = triple_from_json::<f64>(&read_json(path)?).map_err(parse_err(path))?;
    build_theta(&p, &q, &r).map_err(analysis)
}

fn options(budget: Option<f64>) -> Result<BuildOptions, CliError> {
    match budget {
        Some(b) if !(b > 0.0 && b.is_finite()) => Err(CliError::Usage(format!("budget must be positive, got {b}"))),
        _ => Ok(BuildOptions { budget }),
    }
}

fn allowed(cli: &Cli, formats: &[Format]) -> Result<(), CliError> {
    if formats.contains(&cli.format()) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--format {:?} is not available for this subcommand", cli.format()).to_lowercase()))
    }
}

fn config(cli: &Cli) -> Value {
    let mut v = serde_json::to_value(cli).unwrap_or(Value::Null);
    v["format"] = serde_json::to_value(cli.format()).unwrap_or(Value::Null);
    v
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn with_config(cli: &Cli, mut v: Value) -> String {
    if let Value::Object(m) = &mut v {
        m.insert("config".into(), config(cli));
    }
    pretty(&v)
}

/// Marks an SVG document with the run configuration.
fn svg_with_config(cli: &Cli, body: String) -> String {
    let note = format!("<!-- config: {} -->", serde_json::to_string(&config(cli)).unwrap_or_default().replace("--", "- -"));
    match body.find('\n') {
        Some(i) => format!("{}\n{note}{}", &body[..i], &body[i..]),
        None => body,
    }
}

/// Writes `text` to the output path or stdout.
pub fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io { path: p.display().to_string(), detail: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Analyze(a) => {
            allowed(cli, &[Format::Json])?;
            analyze(cli, a)
        }
        Command::Expand(a) => {
            allowed(cli, &[Format::Json])?;
            if a.exact {
                expand::<BigRational>(cli, a)
            } else {
                expand::<f64>(cli, a)
            }
        }
        Command::Eigen(a) => {
            allowed(cli, &[Format::Json, Format::Csv])?;
            eigen(cli, a)
        }
        Command::Quad(a) => {
            allowed(cli, &[Format::Json, Format::Svg])?;
            quad(cli, a)
        }
        Command::Strebel(a) => {
            allowed(cli, &[Format::Json])?;
            strebel(cli, a)
        }
        Command::Measures(a) => {
            allowed(cli, &[Format::Json])?;
            measures(cli, a)
        }
        Command::Verify(a) => {
            allowed(cli, &[Format::Json])?;
            verify(cli, a)
        }
        Command::Plot(a) => {
            allowed(cli, &[Format::Svg])?;
            plot(cli, a)
        }
    }
}

fn analyze(cli: &Cli, a: &PolyArgs) -> Result<String, CliError> {
    let p: BiPoly<f64> = bi_from_json(&read_json(&a.poly)?).map_err(parse_err(&a.poly))?;
    let support = newton_support(&p);
    Ok(with_config(
        cli,
        json!({
            "report": probability_branch_test(&p),
            "balanced": is_balanced(&p),
            "generic_irreducible": genericity_irreducible(&support),
            "support": support,
        }),
    ))
}

fn series_json<T: JsonScalar>(s: &BranchSeries<T>) -> Value {
    json!({
        "a0": s.a0.to_json(),
        "tail": s.tail.iter().map(|c| json!([c.re.to_json(), c.im.to_json()])).collect::<Vec<_>>(),
        "n": s.n,
    })
}

fn expand<T: JsonScalar>(cli: &Cli, a: &ExpandArgs) -> Result<String, CliError> {
    let p: BiPoly<T> = bi_from_json(&read_json(&a.poly)?).map_err(parse_err(&a.poly))?;
    let report = probability_branch_test(&p);
    let series = expand_probability_branch(&p, a.terms).map_err(analysis)?;
    let mut v = series_json(&series);
    v["report"] = serde_json::to_value(report).unwrap_or(Value::Null);
    Ok(with_config(cli, v))
}

fn parse_point(s: &str) -> Result<C64, CliError> {
    let bad = || CliError::Usage(format!("point {s:?} is not re,im"));
    let mut it = s.split(',').map(|x| x.trim().parse::<f64>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(re)), im, None) => Ok(C64::new(re, im.unwrap_or(Ok(0.0)).map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn histogram(run: &EigenRun, bins: usize) -> Value {
    let xs: Vec<f64> = run.roots.iter().map(|z| z.re).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for x in &xs {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = xs.len().max(1) as f64;
    json!({
        "edges": (0..=bins).map(|k| lo + k as f64 * width).collect::<Vec<_>>(),
        "density": counts.iter().map(|&c| c as f64 / (n * width)).collect::<Vec<_>>(),
    })
}

fn eigen(cli: &Cli, a: &EigenArgs) -> Result<String, CliError> {
    if a.emit_histogram == Some(0) {
        return Err(CliError::Usage("--emit-histogram needs at least one bin".into()));
    }
    if cli.format() == Format::Csv && !a.emit_roots {
        return Err(CliError::Usage("--format csv needs --emit-roots".into()));
    }
    let probes = a.check_symbol.iter().map(|s| parse_point(s)).collect::<Result<Vec<_>, _>>()?;
    let p: BiPoly<f64> = bi_from_json(&read_json(&a.poly)?).map_err(parse_err(&a.poly))?;
    let op = operator_from_balanced(&p).map_err(analysis)?;
    let mut degrees = if a.degrees.is_empty() { vec![a.degree_max] } else { a.degrees.clone() };
    if let Some(&n) = degrees.iter().find(|&&n| n > a.degree_max) {
        return Err(CliError::Usage(format!("degree {n} exceeds --degree-max {}", a.degree_max)));
    }
    degrees.sort_unstable();
    degrees.dedup();
    let want_roots = a.emit_roots || a.emit_histogram.is_some();
    let runs = principal_runs(&op, &degrees, want_roots, &probes).map_err(analysis)?;
    if cli.format() == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let cfg = serde_json::to_string(&config(cli)).unwrap_or_default();
        let several = runs.len() > 1;
        let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
        if several {
            w.write_record(["n", "re", "im"]).map_err(csv_err)?;
        } else {
            w.write_record(["re", "im"]).map_err(csv_err)?;
        }
        for run in &runs {
            for z in &run.roots {
                let (re, im) = (format!("{:e}", z.re), format!("{:e}", z.im));
                if several {
                    w.write_record([run.n.to_string(), re, im]).map_err(csv_err)?;
                } else {
                    w.write_record([re, im]).map_err(csv_err)?;
                }
            }
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?).unwrap_or_default();
        return Ok(format!("# config: {cfg}\n{body}"));
    }
    let out: Vec<Value> = runs
        .iter()
        .map(|run| {
            let mut v = json!({
                "n": run.n,
                "lambda": run.lambda,
                "bits": run.bits,
                "residual": run.residual,
            });
            if want_roots {
                v["max_modulus"] = json!(run.max_modulus());
            }
            if a.emit_roots {
                v["roots"] = json!(run.roots);
            }
            if let Some(b) = a.emit_histogram {
                v["histogram"] = histogram(run, b);
            }
            if !probes.is_empty() {
                v["symbol"] = probes
                    .iter()
                    .enumerate()
                    .map(|(i, &z)| match run.normalized_log_derivative(i) {
                        Some(l) => json!({"z": z, "L": l, "residual": symbol_residual(&op, l, z)}),
                        None => json!({"z": z, "L": Value::Null, "residual": Value::Null}),
                    })
                    .collect();
            }
            v
        })
        .collect();
    Ok(with_config(cli, json!({ "k": op.k, "nondegenerate": op.nondegenerate, "runs": out })))
}

fn kind_name(k: &SingularKind) -> &'static str {
    match k {
        SingularKind::Zero { .. } => "zero",
        SingularKind::SimplePole => "simple-pole",
        SingularKind::DoublePole { .. } => "double-pole",
        SingularKind::HigherPole { .. } => "higher-pole",
    }
}

fn graph_json(g: &TrajectoryGraph) -> Value {
    let faces: Vec<Value> = g
        .topology
        .faces
        .iter()
        .map(|f| json!({"half_edges": f.half_edges, "area": f.area, "outer": f.outer, "region": f.region}))
        .collect();
    json!({
        "vertices": g.graph.vertices,
        "edges": g.graph.edges.iter().zip(&g.edges).map(|(e, t)| json!({
            "a": e.a, "b": e.b, "polyline": t.polyline, "arclength": t.arclength,
        })).collect::<Vec<_>>(),
        "faces": faces,
        "d": g.d,
    })
}

fn picture(g: &TrajectoryGraph) -> String {
    let paths: Vec<Vec<C64>> = g.edges.iter().chain(&g.pole_edges).chain(&g.open_launches).map(|t| t.polyline.clone()).collect();
    let (zeros, poles): (Vec<_>, Vec<_>) = g.singular.iter().partition(|s| s.is_zero());
    svg(&paths, &zeros.iter().map(|s| s.z).collect::<Vec<_>>(), &poles.iter().map(|s| s.z).collect::<Vec<_>>())
}

fn quad(cli: &Cli, a: &QuadArgs) -> Result<String, CliError> {
    let opts = options(a.triple.budget)?;
    let qd = read_triple(&a.triple.triple)?;
    let g = build_dk0(&qd, opts).map_err(analysis)?;
    let pic = picture(&g);
    if let Some(path) = &a.emit_svg {
        std::fs::write(path, svg_with_config(cli, pic.clone()))
            .map_err(|e| CliError::Io { path: path.display().to_string(), detail: e.to_string() })?;
    }
    if cli.format() == Format::Svg {
        return Ok(svg_with_config(cli, pic));
    }
    let singular: Vec<Value> = singular_points(&qd)
        .map_err(analysis)?
        .iter()
        .map(|s| json!({"z": s.z, "kind": kind_name(&s.kind), "order": s.order(), "directions": s.directions}))
        .collect();
    let mut v = json!({
        "phi": {"num": qd.num, "den": qd.den},
        "degenerate": qd.degenerate,
        "order_at_infinity": qd.order_at_infinity(),
        "singular": singular,
        "vertices": g.graph.vertices.len(),
        "edges": g.graph.edges.len(),
        "d": g.d,
        "warnings": g.warnings,
    });
    if a.emit_graph {
        v["graph"] = graph_json(&g);
    }
    Ok(with_config(cli, v))
}

fn strebel(cli: &Cli, a: &TripleArgs) -> Result<String, CliError> {
    let opts = options(a.budget)?;
    let qd = read_triple(&a.triple)?;
    let rep = strebel_surrogate(&qd, opts).map_err(analysis)?;
    let mut v = json!({ "verdict": rep.verdict, "strebel": rep.is_strebel() });
    if let Some(g) = &rep.graph {
        v["graph"] = graph_json(g);
        v["measures"] = json!(if rep.is_strebel() { 1u64 << (g.d.max(1) - 1) } else { 0 });
    }
    Ok(with_config(cli, v))
}

fn density_samples(m: &SignedMeasure, per_arc: usize) -> Vec<Value> {
    m.arcs
        .iter()
        .map(|arc| {
            let n = arc.nodes.len();
            let k = per_arc.min(n).max(1);
            let picks: Vec<usize> = (0..k).map(|i| if k == 1 { 0 } else { i * (n - 1) / (k - 1) }).collect();
            json!({
                "closed": arc.closed,
                "length": arc.length(),
                "samples": picks.iter().map(|&i| json!({"z": arc.nodes[i], "density": arc.density[i]})).collect::<Vec<_>>(),
            })
        })
        .collect()
}

fn measures(cli: &Cli, a: &MeasuresArgs) -> Result<String, CliError> {
    if let Some(path) = &a.graph_json {
        let g: EmbeddedGraph = serde_json::from_value(read_json(path)?).map_err(parse_err(path))?;
        let spanning = enumerate_spanning_subgraphs(&g).map_err(analysis)?;
        let positivity = positivity_criterion(&g).map_err(analysis)?;
        return Ok(with_config(cli, json!({ "spanning_subgraphs": spanning, "positivity": positivity })));
    }
    let opts = options(a.budget)?;
    let path = a.triple.as_ref().ok_or_else(|| CliError::Usage("--triple or --graph-json is required".into()))?;
    let qd = read_triple(path)?;
    let rep = motherbody_candidates(&qd, opts).map_err(analysis)?;
    let candidates: Vec<Value> = rep
        .candidates
        .iter()
        .map(|c| {
            json!({
                "subgraph": c.subgraph,
                "flips": c.flips,
                "poles": c.poles.iter().map(|p| json!({"z": p.z, "res": p.residue})).collect::<Vec<_>>(),
                "positive": c.positive,
                "mass": c.measure.total_mass,
                "arcs": density_samples(&c.measure, a.density_samples),
                "measure": c.measure,
            })
        })
        .collect();
    Ok(with_config(
        cli,
        json!({
            "alpha": rep.alpha,
            "spans_all": rep.spans_all,
            "d": rep.graph.d,
            "warnings": rep.graph.warnings,
            "candidates": candidates,
            "rejected": rep.rejected,
            "positivity": rep.positivity,
        }),
    ))
}

fn read_measure(path: &Path) -> Result<SignedMeasure, CliError> {
    let mut v = read_json(path)?;
    if let Some(inner) = v.get_mut("measure") {
        v = inner.take();
    } else if let Some(first) = v.get_mut("candidates").and_then(|c| c.get_mut(0)).and_then(|c| c.get_mut("measure")) {
        v = first.take();
    }
    let m: SignedMeasure = serde_json::from_value(v).map_err(parse_err(path))?;
    if !m.is_finite() {
        return Err(CliError::Parse { path: path.display().to_string(), detail: "measure has non-finite entries".into() });
    }
    Ok(m)
}

fn read_equation(path: &Path) -> Result<Equation, CliError> {
    let v = read_json(path)?;
    if v.get("monomials").is_some() {
        return Ok(Equation::Bivariate(bi_from_json(&v).map_err(parse_err(path))?));
    }
    let [p, q, r] = triple_from_json::<f64>(&v).map_err(parse_err(path))?;
    Ok(Equation::Triple { p, q, r })
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<String, CliError> {
    if !(a.radius > 0.0) || !(a.tol >= 0.0) {
        return Err(CliError::Usage("--radius must be positive and --tol non-negative".into()));
    }
    let mu = read_measure(&a.measure_json)?;
    let eq = read_equation(&a.equation_json)?;
    let pts = sample_points(&mu, a.samples, a.seed, a.radius);
    let rep = compare_branch(&mu, &eq, &pts, None);
    let passed = rep.max_abs_error <= a.tol;
    let mut v = serde_json::to_value(&rep).unwrap_or(Value::Null);
    v["passed"] = json!(passed);
    Ok(with_config(cli, v))
}

fn plot(cli: &Cli, a: &PlotArgs) -> Result<String, CliError> {
    if let Some(path) = &a.measure_json {
        let mu = read_measure(path)?;
        let paths: Vec<Vec<C64>> = mu
            .arcs
            .iter()
            .map(|arc| {
                let mut p = arc.nodes.clone();
                if arc.closed {
                    p.extend(arc.nodes.first().copied());
                }
                p
            })
            .collect();
        let atoms: Vec<C64> = mu.atoms.iter().map(|a| a.z).collect();
        return Ok(svg_with_config(cli, svg(&paths, &atoms, &[])));
    }
    let opts = options(a.budget)?;
    let path = a.triple.as_ref().ok_or_else(|| CliError::Usage("--triple or --measure-json is required".into()))?;
    let qd = read_triple(path)?;
    let g = if qd.q_is_zero() {
        strebel_surrogate(&qd, opts).map_err(analysis)?.graph.ok_or_else(|| CliError::Analysis {
            code: "NoGraph".into(),
            detail: "no critical graph was assembled".into(),
        })?
    } else {
        build_dk0(&qd, opts).map_err(analysis)?
    };
    Ok(svg_with_config(cli, picture(&g)))
}
