use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use superfield::connection::{exp_chi, geodesic_jet, psi_automorphism, BundleConnection, ChiDerivation};
use superfield::graded::{Generator, GeneratorTable, OddSet, SuperPoly};
use superfield::io::{
    format_decimal, parse_poly, raw_bundle, raw_chart, raw_connection, raw_section, raw_supermanifold, RawDocument,
    SpecDocument,
};
use superfield::jet::jet_of_function;
use superfield::numerics::{
    chart_phi, chart_psi, exp_numeric, parallel_transport, transport_matrix, trivialize_over_chart, NewtonOptions,
    DMatrix, NumericBundleConnection, NumericConnection,
};
use superfield::supermap::{
    check_even_degree, curry_section, diagonal_vanishing_check, morphism_to_section, section_to_morphism, CurriedBlocks,
    OddSplit,
};
use superfield::verify::{self, Suite};
use superfield::Error;

/// Exact jets, normal coordinates and superfield expansions, plus
/// exponential-map charts on sampled mapping spaces.
#[derive(Debug, Parser)]
#[command(name = "superfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// RK4 steps for the numeric commands.
    #[arg(long, global = true, default_value_t = 200)]
    steps: usize,
    /// Newton residual tolerance for chart-phi, relative to 1 + |target|.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// k-jet of a function in a chart.
    Jet { document: String },
    /// Geodesic jet dx(x, xi) of a connection.
    Normal { document: String },
    /// Phi(j^k h) = exp(chi)(h).
    Phi { document: String },
    /// The automorphism Psi relating two connections.
    Psi { document: String },
    /// Superfield section of a morphism, as a document for to-morphism.
    ToSection { document: String },
    /// Morphism of a superfield section.
    ToMorphism { document: String },
    /// Whether a section has even total degree (exit 1 if not).
    EvenCheck { document: String },
    /// Regroups a section over a product by the odd generators of each factor.
    Curry { document: String },
    /// Pullback of a function on the target pair by (f' x f); exit 1 if nonzero.
    DiagCheck { document: String },
    /// Exponential map at sample points.
    Exp { document: String },
    /// psi_f(s) on a grid.
    ChartPsi { document: String },
    /// phi_f(g) on a grid; exit 1 if some point is not reached.
    ChartPhi { document: String },
    /// Parallel transport along a sampled path, or over a chart.
    Transport { document: String },
    /// Seeded property checks.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
}

#[derive(Debug)]
enum Failure {
    /// Malformed input; exit code 2.
    Input(String),
    /// A check that ran and failed; exit code 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotInChart(points) => Failure::Check(format!("target not reached at grid points {points:?}")),
            e => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read_document(path: &str) -> Result<SpecDocument, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?
    };
    Ok(SpecDocument::parse(&text)?)
}

fn params<T: DeserializeOwned>(doc: &SpecDocument, command: &str) -> Result<T, Failure> {
    let value = doc
        .run
        .get(command)
        .ok_or_else(|| Failure::Input(format!("the document has no `run.{command}` entry")))?;
    serde_json::from_value(value.clone()).map_err(|e| Failure::Input(format!("run.{command}: {e}")))
}

fn optional<'a>(doc: &'a SpecDocument, name: &Option<String>) -> Result<Option<&'a BundleConnection>, Failure> {
    Ok(match name {
        Some(n) => Some(doc.bundle(n)?),
        None => None,
    })
}

fn expr(src: &str, table: &Arc<GeneratorTable>, what: &str) -> Result<SuperPoly, Failure> {
    parse_poly(src, table).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

fn decimals(v: &[f64]) -> String {
    v.iter().map(|x| format_decimal(*x)).collect::<Vec<_>>().join(" ")
}

fn lines(rows: impl IntoIterator<Item = String>) -> String {
    rows.into_iter().map(|r| r + "\n").collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JetParams {
    chart: String,
    function: String,
    order: u32,
}

fn jet(doc: &SpecDocument) -> Outcome {
    let p: JetParams = params(doc, "jet")?;
    let chart = doc.chart(&p.chart)?;
    let h = expr(&p.function, &chart.function_table(), "function")?;
    Ok(format!("{}\n", jet_of_function(chart, &h, p.order)?.value()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalParams {
    connection: String,
    order: u32,
}

fn normal(doc: &SpecDocument) -> Outcome {
    let p: NormalParams = params(doc, "normal")?;
    let g = doc.connection(&p.connection)?;
    let delta = geodesic_jet(g, p.order)?;
    Ok(lines(g.chart().jet_names().iter().zip(delta).map(|(d, v)| format!("{d} = {v}"))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PhiParams {
    connection: String,
    #[serde(default)]
    bundle: Option<String>,
    order: u32,
    function: String,
}

fn phi(doc: &SpecDocument) -> Outcome {
    let p: PhiParams = params(doc, "phi")?;
    let chi = ChiDerivation::new(doc.connection(&p.connection)?, optional(doc, &p.bundle)?, p.order)?;
    let h = expr(&p.function, &chi.tables().function, "function")?;
    Ok(format!("{}\n", exp_chi(&chi, &h)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiParams {
    from: String,
    to: String,
    #[serde(default)]
    from_bundle: Option<String>,
    #[serde(default)]
    to_bundle: Option<String>,
    order: u32,
    #[serde(default)]
    apply: Vec<String>,
}

fn psi(doc: &SpecDocument) -> Outcome {
    let p: PsiParams = params(doc, "psi")?;
    let map = psi_automorphism(
        doc.connection(&p.from)?,
        doc.connection(&p.to)?,
        optional(doc, &p.from_bundle)?,
        optional(doc, &p.to_bundle)?,
        p.order,
    )?;
    let t = map.source().clone();
    let dim = doc.connection(&p.from)?.chart().dim();
    let moved = t
        .generators()
        .filter(|g| !matches!(g, Generator::Base(i) if *i < dim))
        .map(|g| format!("{} = {}", t.name(g), map.image(g)));
    let mut out = lines(moved);
    for (i, src) in p.apply.iter().enumerate() {
        let a = expr(src, &t, &format!("apply[{i}]"))?;
        out += &format!("Psi({a}) = {}\n", map.apply(&a)?);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ToSectionParams {
    morphism: String,
    connection: String,
    #[serde(default)]
    bundle: Option<String>,
}

fn to_section(doc: &SpecDocument) -> Outcome {
    let p: ToSectionParams = params(doc, "to-section")?;
    let f = doc.morphism(&p.morphism)?;
    let g = doc.connection(&p.connection)?;
    let b = optional(doc, &p.bundle)?;
    let s = morphism_to_section(f, g, b)?;
    let mut charts = BTreeMap::new();
    for c in [f.source().chart(), f.target().chart()] {
        charts.insert(c.name().to_string(), raw_chart(c));
    }
    let mut supermanifolds = BTreeMap::new();
    for m in [f.source(), f.target()] {
        supermanifolds.insert(m.name().to_string(), raw_supermanifold(m));
    }
    let mut next = serde_json::Map::new();
    next.insert("section".into(), p.morphism.clone().into());
    next.insert("connection".into(), p.connection.clone().into());
    if let Some(name) = &p.bundle {
        next.insert("bundle".into(), name.clone().into());
    }
    let raw = RawDocument {
        charts: charts.into_values().collect(),
        supermanifolds: supermanifolds.into_values().collect(),
        connections: vec![raw_connection(&p.connection, g)],
        bundles: b.map(|b| raw_bundle(p.bundle.as_deref().unwrap_or_default(), b)).into_iter().collect(),
        sections: vec![raw_section(&p.morphism, &s)],
        run: [("to-morphism".to_string(), serde_json::Value::Object(next))].into_iter().collect(),
        ..Default::default()
    };
    let text = serde_json::to_string_pretty(&raw).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(text + "\n")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ToMorphismParams {
    section: String,
    connection: String,
    #[serde(default)]
    bundle: Option<String>,
}

fn to_morphism(doc: &SpecDocument) -> Outcome {
    let p: ToMorphismParams = params(doc, "to-morphism")?;
    let f = section_to_morphism(doc.section(&p.section)?, doc.connection(&p.connection)?, optional(doc, &p.bundle)?)?;
    Ok(f.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SectionParams {
    section: String,
}

fn even_check(doc: &SpecDocument) -> Outcome {
    let p: SectionParams = params(doc, "even-check")?;
    if check_even_degree(doc.section(&p.section)?) {
        Ok("even\n".into())
    } else {
        Err(Failure::Check(format!("section `{}` has components of odd total degree", p.section)))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurryParams {
    section: String,
    /// 1-based positions of the first factor's odd generators.
    first: Vec<usize>,
    second: Vec<usize>,
}

fn format_blocks(out: &mut String, names: &[String], blocks: &[CurriedBlocks]) {
    let set = |s: OddSet| {
        let idx: Vec<String> = s.iter().map(|i| (i + 1).to_string()).collect();
        format!("[{}]", idx.join(","))
    };
    for (name, b) in names.iter().zip(blocks) {
        for (outer, inner) in b {
            for (a, value) in inner {
                out.push_str(&format!("{name} {} {} = {value}\n", set(*outer), set(*a)));
            }
        }
    }
}

fn curry(doc: &SpecDocument) -> Outcome {
    let p: CurryParams = params(doc, "curry")?;
    let s = doc.section(&p.section)?;
    let zero_based = |v: &[usize]| -> Result<Vec<usize>, Failure> {
        v.iter()
            .map(|&i| i.checked_sub(1).ok_or_else(|| Failure::Input("split positions are 1-based".into())))
            .collect()
    };
    let split = OddSplit::new(s.source().rank(), zero_based(&p.first)?, zero_based(&p.second)?)?;
    let (tangent, fiber) = curry_section(s, &split)?;
    let mut out = String::new();
    format_blocks(&mut out, s.target().chart().coords(), &tangent);
    format_blocks(&mut out, s.target().odd_names(), &fiber);
    Ok(out)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagParams {
    morphism: String,
    function: String,
}

fn diag_check(doc: &SpecDocument) -> Outcome {
    let p: DiagParams = params(doc, "diag-check")?;
    let f = doc.morphism(&p.morphism)?;
    let big_f = expr(&p.function, &f.target().chart().pair_table()?, "function")?;
    let image = diagonal_vanishing_check(f, &big_f)?;
    if image.is_zero() {
        Ok("0\n".into())
    } else {
        Err(Failure::Check(format!("pullback is {image}")))
    }
}

fn numeric(doc: &SpecDocument, name: &str) -> Result<NumericConnection, Failure> {
    Ok(NumericConnection::new(doc.connection(name)?)?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpParams {
    connection: String,
    points: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
}

fn exp(doc: &SpecDocument, steps: usize) -> Outcome {
    let p: ExpParams = params(doc, "exp")?;
    if p.points.len() != p.vectors.len() {
        return Err(Failure::Input(format!("{} points but {} vectors", p.points.len(), p.vectors.len())));
    }
    let conn = numeric(doc, &p.connection)?;
    let rows = p
        .points
        .iter()
        .zip(&p.vectors)
        .map(|(x, v)| Ok(decimals(&exp_numeric(&conn, x, v, steps)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(lines(rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartPsiParams {
    connection: String,
    map: String,
    field: String,
}

fn chart_psi_cmd(doc: &SpecDocument, steps: usize) -> Outcome {
    let p: ChartPsiParams = params(doc, "chart-psi")?;
    let g = chart_psi(doc.map(&p.map)?, doc.field(&p.field)?, &numeric(doc, &p.connection)?, steps)?;
    Ok(lines(g.values.iter().map(|v| decimals(v))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChartPhiParams {
    connection: String,
    map: String,
    target: String,
}

fn chart_phi_cmd(doc: &SpecDocument, steps: usize, tol: f64) -> Outcome {
    let p: ChartPhiParams = params(doc, "chart-phi")?;
    let opts = NewtonOptions {
        steps,
        tol,
        ..NewtonOptions::default()
    };
    let s = chart_phi(doc.map(&p.map)?, doc.map(&p.target)?, &numeric(doc, &p.connection)?, &opts)?;
    Ok(lines(s.vectors.iter().map(|v| decimals(v))))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportParams {
    bundle: String,
    #[serde(default)]
    path: Option<String>,
    #[serde(default)]
    vector: Option<Vec<f64>>,
    #[serde(default)]
    connection: Option<String>,
    #[serde(default)]
    map: Option<String>,
    #[serde(default)]
    field: Option<String>,
    #[serde(default)]
    from: Option<f64>,
    #[serde(default)]
    to: Option<f64>,
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|j| m[(i, j)]).collect()
}

fn transport(doc: &SpecDocument, steps: usize) -> Outcome {
    let p: TransportParams = params(doc, "transport")?;
    let bundle = NumericBundleConnection::new(doc.bundle(&p.bundle)?)?;
    match (&p.path, &p.connection, &p.map, &p.field) {
        (Some(path), None, None, None) => {
            if p.from.is_some() || p.to.is_some() {
                return Err(Failure::Input("`from`/`to` apply to transport over a chart".into()));
            }
            let path = doc.path(path)?;
            match &p.vector {
                Some(v) => Ok(format!("{}\n", decimals(&parallel_transport(&bundle, path, v, steps)?))),
                None => {
                    let m = transport_matrix(&bundle, path, steps)?;
                    Ok(lines((0..m.nrows()).map(|i| decimals(&row(&m, i)))))
                }
            }
        }
        (None, Some(conn), Some(map), Some(field)) => {
            if p.vector.is_some() {
                return Err(Failure::Input("`vector` applies to transport along a path".into()));
            }
            let span = (p.from.unwrap_or(0.0), p.to.unwrap_or(1.0));
            let ms = trivialize_over_chart(doc.map(map)?, doc.field(field)?, &numeric(doc, conn)?, &bundle, span, steps)?;
            Ok(lines(ms.iter().map(|m| {
                decimals(&(0..m.nrows()).flat_map(|i| row(m, i)).collect::<Vec<_>>())
            })))
        }
        _ => Err(Failure::Input(
            "transport needs either `path` or all of `connection`, `map` and `field`".into(),
        )),
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    let doc = |path: &str| read_document(path);
    match &cli.command {
        Command::Jet { document } => jet(&doc(document)?),
        Command::Normal { document } => normal(&doc(document)?),
        Command::Phi { document } => phi(&doc(document)?),
        Command::Psi { document } => psi(&doc(document)?),
        Command::ToSection { document } => to_section(&doc(document)?),
        Command::ToMorphism { document } => to_morphism(&doc(document)?),
        Command::EvenCheck { document } => even_check(&doc(document)?),
        Command::Curry { document } => curry(&doc(document)?),
        Command::DiagCheck { document } => diag_check(&doc(document)?),
        Command::Exp { document } => exp(&doc(document)?, cli.steps),
        Command::ChartPsi { document } => chart_psi_cmd(&doc(document)?, cli.steps),
        Command::ChartPhi { document } => chart_phi_cmd(&doc(document)?, cli.steps, cli.tol),
        Command::Transport { document } => transport(&doc(document)?, cli.steps),
        Command::Verify { suite, seed, cases } => {
            let suite: Suite = suite.parse().map_err(Failure::Input)?;
            let report = verify::run(suite, *seed, *cases);
            if report.all_passed() {
                Ok(report.to_string())
            } else {
                print!("{report}");
                Err(Failure::Check("some checks failed".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
