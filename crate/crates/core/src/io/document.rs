//! The JSON input document: charts, connections, bundles, supermanifolds,
//! morphisms, sections, numeric samples and per-command parameters.
//!
//! [`SpecDocument::parse`] deserializes the raw layout, compiles every
//! expression string against the table it lives on and validates shapes;
//! the `raw_*` helpers go the other way for documents written by commands.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::parse::parse_poly;
use crate::chart::Chart;
use crate::connection::{BundleConnection, TorsionFreeConnection};
use crate::error::{Error, Result};
use crate::graded::{GeneratorTable, OddSet, SuperPoly};
use crate::numerics::{DiscreteMap, DiscreteSection, SampleGrid, SampledPath};
use crate::supermap::{CoefficientTable, ParityMode, SuperManifoldPresentation, SuperMorphism, SuperfieldSection};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDocument {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub charts: Vec<RawChart>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub connections: Vec<RawConnection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bundles: Vec<RawBundle>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub supermanifolds: Vec<RawSupermanifold>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub morphisms: Vec<RawMorphism>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<RawSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grids: Vec<RawGrid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub maps: Vec<RawMap>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<RawField>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<RawPath>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub run: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawChart {
    pub name: String,
    pub coords: Vec<String>,
}

/// `gamma[i][j][l]` is `Gamma^i_{jl}`; omitted means flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConnection {
    pub name: String,
    pub chart: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<Vec<Vec<String>>>>,
}

/// `coefficients[a][i][b]` is `A^a_{ib}`; omitted means flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBundle {
    pub name: String,
    pub chart: String,
    pub fibers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<Vec<String>>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSupermanifold {
    pub name: String,
    pub chart: String,
    #[serde(default)]
    pub odd: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMorphism {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub x: Vec<String>,
    #[serde(default)]
    pub eta: Vec<String>,
}

/// One coefficient `c_{a_1 ... a_m}` of a section component; `indices` are
/// 1-based positions among the source odd generators, in any order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntry {
    pub component: String,
    pub indices: Vec<usize>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSection {
    pub name: String,
    pub source: String,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub base_map: Vec<String>,
    #[serde(default)]
    pub tangent: Vec<RawEntry>,
    #[serde(default)]
    pub fiber: Vec<RawEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub name: String,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMap {
    pub name: String,
    pub grid: String,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawField {
    pub name: String,
    pub grid: String,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPath {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
}

/// A validated document.
#[derive(Debug, Clone, Default)]
pub struct SpecDocument {
    pub charts: BTreeMap<String, Chart>,
    pub connections: BTreeMap<String, TorsionFreeConnection>,
    pub bundles: BTreeMap<String, BundleConnection>,
    pub supermanifolds: BTreeMap<String, SuperManifoldPresentation>,
    pub morphisms: BTreeMap<String, SuperMorphism>,
    pub sections: BTreeMap<String, SuperfieldSection>,
    pub grids: BTreeMap<String, SampleGrid>,
    pub maps: BTreeMap<String, DiscreteMap>,
    pub fields: BTreeMap<String, DiscreteSection>,
    pub paths: BTreeMap<String, SampledPath>,
    pub run: BTreeMap<String, serde_json::Value>,
}

fn doc_err(context: &str, e: impl std::fmt::Display) -> Error {
    Error::Document(format!("{context}: {e}"))
}

fn expr(src: &str, table: &Arc<GeneratorTable>, context: &str) -> Result<SuperPoly> {
    parse_poly(src, table).map_err(|e| doc_err(context, e))
}

fn insert_unique<T>(map: &mut BTreeMap<String, T>, kind: &str, name: &str, value: T) -> Result<()> {
    if map.insert(name.to_string(), value).is_some() {
        return Err(Error::Document(format!("duplicate {kind} `{name}`")));
    }
    Ok(())
}

fn lookup<'a, T>(map: &'a BTreeMap<String, T>, kind: &str, name: &str, context: &str) -> Result<&'a T> {
    map.get(name)
        .ok_or_else(|| Error::Document(format!("{context}: unknown {kind} `{name}`")))
}

fn cube(
    raw: &[Vec<Vec<String>>],
    shape: (usize, usize, usize),
    table: &Arc<GeneratorTable>,
    context: &str,
) -> Result<Vec<Vec<Vec<SuperPoly>>>> {
    let (a, b, c) = shape;
    if raw.len() != a || raw.iter().any(|r| r.len() != b || r.iter().any(|s| s.len() != c)) {
        return Err(doc_err(context, format!("expected a {a}x{b}x{c} array")));
    }
    raw.iter()
        .enumerate()
        .map(|(i, r)| {
            r.iter()
                .enumerate()
                .map(|(j, s)| {
                    s.iter()
                        .enumerate()
                        .map(|(l, e)| expr(e, table, &format!("{context}[{i}][{j}][{l}]")))
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Sorts 1-based indices into an ascending set, returning the Koszul sign.
fn antisymmetric_key(indices: &[usize], rank: usize, context: &str) -> Result<(OddSet, bool)> {
    let mut zero_based = Vec::with_capacity(indices.len());
    for &i in indices {
        if i == 0 || i > rank {
            return Err(doc_err(context, format!("odd index {i} outside 1..={rank}")));
        }
        if zero_based.contains(&(i - 1)) {
            return Err(doc_err(context, format!("odd index {i} repeated (antisymmetric entries vanish)")));
        }
        zero_based.push(i - 1);
    }
    let inversions: usize = (0..zero_based.len())
        .map(|a| zero_based[a + 1..].iter().filter(|&&b| b < zero_based[a]).count())
        .sum();
    Ok((OddSet::from_indices(&zero_based), inversions % 2 == 1))
}

fn entries(
    raw: &[RawEntry],
    components: &[String],
    rank: usize,
    table: &Arc<GeneratorTable>,
    context: &str,
) -> Result<Vec<CoefficientTable>> {
    let mut out = vec![CoefficientTable::new(); components.len()];
    for (n, e) in raw.iter().enumerate() {
        let ctx = format!("{context}[{n}]");
        let c = components
            .iter()
            .position(|c| *c == e.component)
            .ok_or_else(|| doc_err(&ctx, format!("unknown component `{}`", e.component)))?;
        let (key, negate) = antisymmetric_key(&e.indices, rank, &ctx)?;
        let mut value = expr(&e.value, table, &ctx)?;
        if negate {
            value = -value;
        }
        if out[c].insert(key, value).is_some() {
            return Err(doc_err(&ctx, "entry given twice (up to reordering of indices)"));
        }
    }
    Ok(out)
}

fn mode(raw: &Option<String>, context: &str) -> Result<ParityMode> {
    raw.as_deref().map_or(Ok(ParityMode::Even), |m| m.parse().map_err(|e| doc_err(context, e)))
}

impl SpecDocument {
    /// Parses and validates a document.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(|e| {
            Error::Document(format!("invalid JSON: {e}"))
        })?;
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawDocument) -> Result<Self> {
        let mut doc = SpecDocument {
            run: raw.run.clone(),
            ..Default::default()
        };
        for c in &raw.charts {
            let chart = Chart::new(&c.name, c.coords.iter().cloned()).map_err(|e| doc_err("charts", e))?;
            insert_unique(&mut doc.charts, "chart", &c.name, chart)?;
        }
        for c in &raw.connections {
            let ctx = format!("connections.{}", c.name);
            let chart = lookup(&doc.charts, "chart", &c.chart, &ctx)?;
            let conn = match &c.gamma {
                None => TorsionFreeConnection::flat(chart),
                Some(g) => {
                    let n = chart.dim();
                    let g = cube(g, (n, n, n), &chart.function_table(), &format!("{ctx}.gamma"))?;
                    TorsionFreeConnection::new(chart, g).map_err(|e| doc_err(&ctx, e))?
                }
            };
            insert_unique(&mut doc.connections, "connection", &c.name, conn)?;
        }
        for b in &raw.bundles {
            let ctx = format!("bundles.{}", b.name);
            let chart = lookup(&doc.charts, "chart", &b.chart, &ctx)?;
            let r = b.fibers.len();
            let degrees = b.degrees.clone().unwrap_or_else(|| vec![1; r]);
            let bundle = match &b.coefficients {
                None => BundleConnection::flat(chart, b.fibers.clone(), degrees),
                Some(a) => {
                    let a = cube(a, (r, chart.dim(), r), &chart.function_table(), &format!("{ctx}.coefficients"))?;
                    BundleConnection::new(chart, b.fibers.clone(), degrees, a)
                }
            }
            .map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.bundles, "bundle", &b.name, bundle)?;
        }
        for s in &raw.supermanifolds {
            let ctx = format!("supermanifolds.{}", s.name);
            let chart = lookup(&doc.charts, "chart", &s.chart, &ctx)?;
            let p = SuperManifoldPresentation::new(&s.name, chart, s.odd.clone(), s.degrees.clone())
                .map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.supermanifolds, "supermanifold", &s.name, p)?;
        }
        for m in &raw.morphisms {
            let ctx = format!("morphisms.{}", m.name);
            let source = lookup(&doc.supermanifolds, "supermanifold", &m.source, &ctx)?;
            let target = lookup(&doc.supermanifolds, "supermanifold", &m.target, &ctx)?;
            let mode = mode(&m.mode, &ctx)?;
            let table = source.table(mode).map_err(|e| doc_err(&ctx, e))?;
            let x = m
                .x
                .iter()
                .enumerate()
                .map(|(i, e)| expr(e, &table, &format!("{ctx}.x[{i}]")))
                .collect::<Result<_>>()?;
            let eta = m
                .eta
                .iter()
                .enumerate()
                .map(|(i, e)| expr(e, &table, &format!("{ctx}.eta[{i}]")))
                .collect::<Result<_>>()?;
            let f = SuperMorphism::new(source, target, mode, x, eta).map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.morphisms, "morphism", &m.name, f)?;
        }
        for s in &raw.sections {
            let ctx = format!("sections.{}", s.name);
            let source = lookup(&doc.supermanifolds, "supermanifold", &s.source, &ctx)?;
            let target = lookup(&doc.supermanifolds, "supermanifold", &s.target, &ctx)?;
            let mode = mode(&s.mode, &ctx)?;
            let ft = source.chart().function_table();
            let base_map = s
                .base_map
                .iter()
                .enumerate()
                .map(|(i, e)| expr(e, &ft, &format!("{ctx}.base_map[{i}]")))
                .collect::<Result<_>>()?;
            let rank = source.rank();
            let tangent = entries(&s.tangent, target.chart().coords(), rank, &ft, &format!("{ctx}.tangent"))?;
            let fiber = entries(&s.fiber, target.odd_names(), rank, &ft, &format!("{ctx}.fiber"))?;
            let section = SuperfieldSection::new(source, target, mode, base_map, tangent, fiber)
                .map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.sections, "section", &s.name, section)?;
        }
        for g in &raw.grids {
            let grid = SampleGrid::new(g.points.clone()).map_err(|e| doc_err(&format!("grids.{}", g.name), e))?;
            insert_unique(&mut doc.grids, "grid", &g.name, grid)?;
        }
        for m in &raw.maps {
            let ctx = format!("maps.{}", m.name);
            let grid = lookup(&doc.grids, "grid", &m.grid, &ctx)?.clone();
            let map = DiscreteMap::new(grid, m.values.clone()).map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.maps, "map", &m.name, map)?;
        }
        for f in &raw.fields {
            let ctx = format!("fields.{}", f.name);
            let grid = lookup(&doc.grids, "grid", &f.grid, &ctx)?.clone();
            let field = DiscreteSection::new(grid, f.vectors.clone()).map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.fields, "field", &f.name, field)?;
        }
        for p in &raw.paths {
            let ctx = format!("paths.{}", p.name);
            let path = match &p.times {
                Some(t) => SampledPath::new(t.clone(), p.points.clone()),
                None => SampledPath::uniform(p.points.clone()),
            }
            .map_err(|e| doc_err(&ctx, e))?;
            insert_unique(&mut doc.paths, "path", &p.name, path)?;
        }
        Ok(doc)
    }

    pub fn chart(&self, name: &str) -> Result<&Chart> {
        lookup(&self.charts, "chart", name, "run")
    }

    pub fn connection(&self, name: &str) -> Result<&TorsionFreeConnection> {
        lookup(&self.connections, "connection", name, "run")
    }

    pub fn bundle(&self, name: &str) -> Result<&BundleConnection> {
        lookup(&self.bundles, "bundle", name, "run")
    }

    pub fn morphism(&self, name: &str) -> Result<&SuperMorphism> {
        lookup(&self.morphisms, "morphism", name, "run")
    }

    pub fn section(&self, name: &str) -> Result<&SuperfieldSection> {
        lookup(&self.sections, "section", name, "run")
    }

    pub fn map(&self, name: &str) -> Result<&DiscreteMap> {
        lookup(&self.maps, "map", name, "run")
    }

    pub fn field(&self, name: &str) -> Result<&DiscreteSection> {
        lookup(&self.fields, "field", name, "run")
    }

    pub fn path(&self, name: &str) -> Result<&SampledPath> {
        lookup(&self.paths, "path", name, "run")
    }
}

pub fn raw_chart(c: &Chart) -> RawChart {
    RawChart {
        name: c.name().to_string(),
        coords: c.coords().to_vec(),
    }
}

pub fn raw_connection(name: &str, c: &TorsionFreeConnection) -> RawConnection {
    let n = c.chart().dim();
    let gamma = (!c.is_flat()).then(|| {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|l| c.christoffel(i, j, l).to_string()).collect()).collect())
            .collect()
    });
    RawConnection {
        name: name.to_string(),
        chart: c.chart().name().to_string(),
        gamma,
    }
}

pub fn raw_bundle(name: &str, b: &BundleConnection) -> RawBundle {
    let (n, r) = (b.chart().dim(), b.rank());
    let coefficients = (!b.is_flat()).then(|| {
        (0..r)
            .map(|a| (0..n).map(|i| (0..r).map(|c| b.coefficient(a, i, c).to_string()).collect()).collect())
            .collect()
    });
    RawBundle {
        name: name.to_string(),
        chart: b.chart().name().to_string(),
        fibers: b.fiber_names().to_vec(),
        degrees: Some(b.fiber_degrees().to_vec()),
        coefficients,
    }
}

pub fn raw_supermanifold(p: &SuperManifoldPresentation) -> RawSupermanifold {
    RawSupermanifold {
        name: p.name().to_string(),
        chart: p.chart().name().to_string(),
        odd: p.odd_names().to_vec(),
        degrees: Some(p.degrees().to_vec()),
    }
}

pub fn raw_morphism(name: &str, f: &SuperMorphism) -> RawMorphism {
    RawMorphism {
        name: name.to_string(),
        source: f.source().name().to_string(),
        target: f.target().name().to_string(),
        mode: Some(f.mode().as_str().to_string()),
        x: f.x_pullbacks().iter().map(ToString::to_string).collect(),
        eta: f.eta_pullbacks().iter().map(ToString::to_string).collect(),
    }
}

fn raw_entries(tables: &[CoefficientTable], names: &[String]) -> Vec<RawEntry> {
    tables
        .iter()
        .zip(names)
        .flat_map(|(t, name)| {
            t.iter().map(move |(set, value)| RawEntry {
                component: name.clone(),
                indices: set.iter().map(|i| i + 1).collect(),
                value: value.to_string(),
            })
        })
        .collect()
}

pub fn raw_section(name: &str, s: &SuperfieldSection) -> RawSection {
    RawSection {
        name: name.to_string(),
        source: s.source().name().to_string(),
        target: s.target().name().to_string(),
        mode: Some(s.mode().as_str().to_string()),
        base_map: s.base_map().iter().map(ToString::to_string).collect(),
        tangent: raw_entries(s.tangent(), s.target().chart().coords()),
        fiber: raw_entries(s.fiber(), s.target().odd_names()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
      "charts": [{"name": "M", "coords": ["y"]}, {"name": "N", "coords": ["x1", "x2"]}],
      "connections": [{"name": "G", "chart": "N",
        "gamma": [[["x1", "0"], ["0", "0"]], [["0", "1/2"], ["1/2", "x2"]]]}],
      "bundles": [{"name": "V", "chart": "N", "fibers": ["eta"],
        "coefficients": [[["x2"], ["0"]]]}],
      "supermanifolds": [{"name": "SM", "chart": "M", "odd": ["th1", "th2"]},
                         {"name": "SN", "chart": "N", "odd": ["eta"]}],
      "morphisms": [{"name": "f", "source": "SM", "target": "SN",
        "x": ["y + th1*th2", "y^2"], "eta": ["th2"]}],
      "sections": [{"name": "s", "source": "SM", "target": "SN", "base_map": ["y", "0"],
        "tangent": [{"component": "x1", "indices": [2, 1], "value": "3"}],
        "fiber": [{"component": "eta", "indices": [1], "value": "y"}]}],
      "run": {"normal": {"connection": "G", "order": 2}}
    }"#;

    #[test]
    fn parses_and_validates() {
        let doc = SpecDocument::parse(DOC).unwrap();
        assert_eq!(doc.connections["G"].christoffel(1, 0, 1).to_string(), "1/2");
        assert_eq!(doc.morphisms["f"].x_pullbacks()[0].to_string(), "y + th1*th2");
        let key = OddSet::from_indices(&[0, 1]);
        assert_eq!(doc.sections["s"].tangent()[0][&key].to_string(), "-3");
        assert!(doc.run.contains_key("normal"));
    }

    #[test]
    fn asymmetric_gamma_names_indices() {
        let bad = DOC.replace(r#"[["0", "1/2"], ["1/2", "x2"]]"#, r#"[["0", "1/2"], ["1", "x2"]]"#);
        let err = SpecDocument::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("connections.G"), "{err}");
        assert!(err.contains("Gamma^x2_(x1,x2)"), "{err}");
    }

    #[test]
    fn expression_errors_carry_location() {
        let bad = DOC.replace(r#""y^2""#, r#""y^-1""#);
        let err = SpecDocument::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("morphisms.f.x[1]") && err.contains("column 3"), "{err}");
    }

    #[test]
    fn unresolved_references() {
        let bad = DOC.replace(r#""chart": "N",
        "gamma""#, r#""chart": "Q",
        "gamma""#);
        assert!(SpecDocument::parse(&bad).unwrap_err().to_string().contains("unknown chart `Q`"));
        let bad = DOC.replace(r#""indices": [2, 1]"#, r#""indices": [1, 1]"#);
        assert!(SpecDocument::parse(&bad).is_err());
    }

    #[test]
    fn raw_section_round_trips() {
        let doc = SpecDocument::parse(DOC).unwrap();
        let s = &doc.sections["s"];
        let raw = RawDocument {
            charts: doc.charts.values().map(raw_chart).collect(),
            supermanifolds: doc.supermanifolds.values().map(raw_supermanifold).collect(),
            sections: vec![raw_section("s", s)],
            connections: vec![raw_connection("G", &doc.connections["G"])],
            bundles: vec![raw_bundle("V", &doc.bundles["V"])],
            morphisms: vec![raw_morphism("f", &doc.morphisms["f"])],
            ..Default::default()
        };
        let text = serde_json::to_string_pretty(&raw).unwrap();
        let again = SpecDocument::parse(&text).unwrap();
        assert_eq!(&again.sections["s"], s);
        assert_eq!(again.connections["G"], doc.connections["G"]);
        assert_eq!(again.bundles["V"], doc.bundles["V"]);
        assert_eq!(again.morphisms["f"], doc.morphisms["f"]);
    }
}
