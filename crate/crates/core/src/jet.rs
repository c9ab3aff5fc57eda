//! k-jets of functions in a chart.
//!
//! Jets are stored over the first (`sigma`) module structure: coefficients
//! are polynomials in the chart coordinates `x`, and the formal generators
//! `dx` are truncated at order `k`. The second structure is reached through
//! [`module_action`] with [`Side::Second`].

use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::graded::{AlgebraMap, GeneratorTable, SuperPoly};

#[derive(Debug, Clone, PartialEq)]
pub struct JetElement {
    chart: Chart,
    order: u32,
    value: SuperPoly,
}

impl JetElement {
    /// Wraps a polynomial over a jet table of `chart`: the table's first base
    /// generators are the chart coordinates and its formal generators are
    /// the chart's `dx` names. Extra base or odd generators are fiber
    /// generators.
    pub fn new(chart: &Chart, value: SuperPoly) -> Result<Self> {
        let t = value.table();
        if t.base().len() < chart.dim() || t.base()[..chart.dim()] != *chart.coords() {
            return Err(Error::ChartMismatch(format!(
                "jet table does not start with the coordinates of `{}`",
                chart.name()
            )));
        }
        if t.formal() != chart.jet_names().as_slice() {
            return Err(Error::ChartMismatch(format!(
                "jet generators of `{}` must be {:?}",
                chart.name(),
                chart.jet_names()
            )));
        }
        Ok(JetElement {
            chart: chart.clone(),
            order: t.truncation(),
            value,
        })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn value(&self) -> &SuperPoly {
        &self.value
    }

    pub fn into_value(self) -> SuperPoly {
        self.value
    }

    fn check_compatible(&self, other: &JetElement) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        if !self.chart.same_coords(&other.chart) {
            return Err(Error::ChartMismatch(format!(
                "`{}` vs `{}`",
                self.chart.name(),
                other.chart.name()
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &JetElement) -> Result<JetElement> {
        self.check_compatible(other)?;
        Ok(JetElement {
            chart: self.chart.clone(),
            order: self.order,
            value: self.value.checked_mul(&other.value)?,
        })
    }

    pub fn add(&self, other: &JetElement) -> Result<JetElement> {
        self.check_compatible(other)?;
        Ok(JetElement {
            chart: self.chart.clone(),
            order: self.order,
            value: self.value.checked_add(&other.value)?,
        })
    }
}

/// The map `x -> x + dx` from functions (plus any fiber generators, which
/// are fixed) into the jet table `table`.
fn jet_map(chart: &Chart, source: &Arc<GeneratorTable>, table: &Arc<GeneratorTable>) -> Result<AlgebraMap> {
    let assignments = chart
        .coords()
        .iter()
        .zip(chart.jet_names())
        .map(|(x, dx)| {
            let v = SuperPoly::generator(table, x)? + SuperPoly::generator(table, &dx)?;
            Ok((x.as_str(), v))
        })
        .collect::<Result<Vec<_>>>()?;
    AlgebraMap::new(source, table, assignments)
}

/// `j^k(h) = h(x + dx) mod m^{k+1}`.
///
/// `h` is a polynomial in the chart coordinates; its table may carry further
/// base or odd generators (fiber generators), which are left unchanged.
pub fn jet_of_function(chart: &Chart, h: &SuperPoly, k: u32) -> Result<JetElement> {
    let src = h.table();
    if !src.formal().is_empty() {
        return Err(Error::InvalidArgument("jet_of_function expects a function without formal generators".into()));
    }
    let table = jet_table_for(chart, src, k)?;
    let value = jet_map(chart, src, &table)?.apply(h)?;
    JetElement::new(chart, value)
}

/// Jet table matching a function table: chart coordinates first, then the
/// remaining base generators, formal `dx`, and the same odd generators.
pub fn jet_table_for(chart: &Chart, functions: &GeneratorTable, k: u32) -> Result<Arc<GeneratorTable>> {
    let extra: Vec<String> = functions
        .base()
        .iter()
        .filter(|b| !chart.coords().contains(b))
        .cloned()
        .collect();
    for c in chart.coords() {
        if !functions.base().contains(c) {
            return Err(Error::ChartMismatch(format!("coordinate `{c}` missing from function table")));
        }
    }
    GeneratorTable::builder()
        .base(chart.coords().iter().cloned().chain(extra))
        .formal(chart.jet_names())
        .odd_with_degrees(functions.odd().iter().cloned().zip(functions.odd_degrees().iter().copied()))
        .truncation(k)
        .build()
}

/// A polynomial coordinate change `y = f(x)` from chart `source` (the `x`)
/// to chart `target` (the `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateMap {
    pub source: Chart,
    pub target: Chart,
    pub components: Vec<SuperPoly>,
}

impl CoordinateMap {
    pub fn new(source: &Chart, target: &Chart, components: Vec<SuperPoly>) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: target.dim(),
                found: components.len(),
            });
        }
        let ft = source.function_table();
        let components = components
            .iter()
            .map(|c| c.reinterpret(&ft))
            .collect::<Result<Vec<_>>>()?;
        Ok(CoordinateMap {
            source: source.clone(),
            target: target.clone(),
            components,
        })
    }

    /// `(self ∘ inner)(x) = self(inner(x))`.
    pub fn after(&self, inner: &CoordinateMap) -> Result<CoordinateMap> {
        if !inner.target.same_coords(&self.source) {
            return Err(Error::ChartMismatch("composition of coordinate maps".into()));
        }
        let ft = inner.source.function_table();
        let map = AlgebraMap::new(
            &self.source.function_table(),
            &ft,
            self.source
                .coords()
                .iter()
                .map(String::as_str)
                .zip(inner.components.iter().cloned()),
        )?;
        let components = self
            .components
            .iter()
            .map(|c| map.apply(c))
            .collect::<Result<Vec<_>>>()?;
        CoordinateMap::new(&inner.source, &self.target, components)
    }
}

/// Re-expresses a jet on the `y` chart in the `x` chart along `y = f(x)`:
/// `y -> f(x)` and `dy^i -> sum_{1<=|mu|<=k} dx^mu/mu! d^mu f^i(x)`.
pub fn jet_change_of_coords(j: &JetElement, f: &CoordinateMap) -> Result<JetElement> {
    if f.components.len() != j.chart().dim() {
        return Err(Error::DimensionMismatch {
            expected: j.chart().dim(),
            found: f.components.len(),
        });
    }
    if !f.target.same_coords(j.chart()) {
        return Err(Error::ChartMismatch(format!(
            "jet lives on `{}`, map targets `{}`",
            j.chart().name(),
            f.target.name()
        )));
    }
    let src_table = j.value().table();
    let target = GeneratorTable::builder()
        .base(
            f.source
                .coords()
                .iter()
                .cloned()
                .chain(src_table.base()[j.chart().dim()..].iter().cloned()),
        )
        .formal(f.source.jet_names())
        .odd_with_degrees(src_table.odd().iter().cloned().zip(src_table.odd_degrees().iter().copied()))
        .truncation(j.order())
        .build()?;
    // f(x) and f(x + dx) in the target jet table
    let fx: Vec<SuperPoly> = f
        .components
        .iter()
        .map(|c| c.reinterpret(&target))
        .collect::<Result<_>>()?;
    let shift = jet_map(&f.source, &target, &target)?;
    let mut assignments = Vec::new();
    for (i, (y, dy)) in j.chart().coords().iter().zip(j.chart().jet_names()).enumerate() {
        let shifted = shift.apply(&fx[i])?;
        assignments.push((y.clone(), fx[i].clone()));
        assignments.push((dy, &shifted - &fx[i]));
    }
    let map = AlgebraMap::new(
        src_table,
        &target,
        assignments.iter().map(|(n, v)| (n.as_str(), v.clone())),
    )?;
    JetElement::new(&f.source, map.apply(j.value())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Multiplication by `g(x)` (the `sigma` structure, `i^k`).
    First,
    /// Multiplication by `j^k(g)` (the `tau` structure).
    Second,
}

pub fn module_action(side: Side, g: &SuperPoly, j: &JetElement) -> Result<JetElement> {
    let table = j.value().table();
    let factor = match side {
        Side::First => g.reinterpret(table)?,
        Side::Second => {
            let ft = j.chart().function_table();
            let gj = jet_map(j.chart(), &ft, table)?.apply(&g.reinterpret(&ft)?)?;
            gj
        }
    };
    JetElement::new(j.chart(), factor.checked_mul(j.value())?)
}

/// Image of `[r]`, `r(x, x')` on `U x U`, in `J^k(U)`: `r(x, x + dx)` truncated.
pub fn diagonal_representative_to_jet(chart: &Chart, r: &SuperPoly, k: u32) -> Result<JetElement> {
    let pair = chart.pair_table()?;
    let r = r.reinterpret(&pair)?;
    let table = chart.jet_table(k)?;
    let mut assignments = Vec::new();
    for ((x, xp), dx) in chart.coords().iter().zip(chart.primed_names()).zip(chart.jet_names()) {
        let xv = SuperPoly::generator(&table, x)?;
        assignments.push((x.clone(), xv.clone()));
        assignments.push((xp, &xv + &SuperPoly::generator(&table, &dx)?));
    }
    let map = AlgebraMap::new(&pair, &table, assignments.iter().map(|(n, v)| (n.as_str(), v.clone())))?;
    JetElement::new(chart, map.apply(&r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_poly;

    fn chart1() -> Chart {
        Chart::new("U", ["x"]).unwrap()
    }

    fn chart2() -> Chart {
        Chart::new("U", ["x1", "x2"]).unwrap()
    }

    fn f(chart: &Chart, s: &str) -> SuperPoly {
        parse_poly(s, &chart.function_table()).unwrap()
    }

    #[test]
    fn jet_of_square() {
        let c = chart1();
        let j = jet_of_function(&c, &f(&c, "x^2"), 2).unwrap();
        assert_eq!(j.value().to_string(), "x^2 + 2*x*dx + dx^2");
    }

    #[test]
    fn jet_of_constant() {
        let c = chart1();
        for k in 0..4 {
            let j = jet_of_function(&c, &f(&c, "7/3"), k).unwrap();
            assert_eq!(j.value().to_string(), "7/3");
        }
    }

    #[test]
    fn jet_of_product_two_dims() {
        let c = chart2();
        let j = jet_of_function(&c, &f(&c, "x1*x2"), 2).unwrap();
        let expected = parse_poly("x1*x2 + x2*dx1 + x1*dx2 + dx1*dx2", &c.jet_table(2).unwrap()).unwrap();
        assert_eq!(j.value(), &expected);
    }

    #[test]
    fn linear_change_of_coords() {
        let x = chart2();
        let y = Chart::new("V", ["y1", "y2"]).unwrap();
        let fmap = CoordinateMap::new(&x, &y, vec![f(&x, "2*x1 + 3*x2"), f(&x, "x1 - x2")]).unwrap();
        let jt = y.jet_table(3).unwrap();
        for (dy, expected) in [("dy1", "2*dx1 + 3*dx2"), ("dy2", "dx1 - dx2")] {
            let j = JetElement::new(&y, SuperPoly::generator(&jt, dy).unwrap()).unwrap();
            let out = jet_change_of_coords(&j, &fmap).unwrap();
            assert_eq!(out.value().to_string(), expected);
        }
    }

    #[test]
    fn square_change_of_coords() {
        let x = chart1();
        let y = Chart::new("V", ["y"]).unwrap();
        let fmap = CoordinateMap::new(&x, &y, vec![f(&x, "x^2")]).unwrap();
        let j = JetElement::new(&y, SuperPoly::generator(&y.jet_table(2).unwrap(), "dy").unwrap()).unwrap();
        let out = jet_change_of_coords(&j, &fmap).unwrap();
        assert_eq!(out.value().to_string(), "2*x*dx + dx^2");
    }

    #[test]
    fn change_of_coords_dimension_mismatch() {
        let x = chart2();
        let y = chart1();
        let bad = CoordinateMap {
            source: x.clone(),
            target: y.clone(),
            components: vec![f(&x, "x1"), f(&x, "x2")],
        };
        let j = jet_of_function(&y, &f(&y, "x"), 1).unwrap();
        assert!(matches!(jet_change_of_coords(&j, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn module_actions() {
        let c = chart1();
        let jt = c.jet_table(2).unwrap();
        let dx = JetElement::new(&c, SuperPoly::generator(&jt, "dx").unwrap()).unwrap();
        let first = module_action(Side::First, &f(&c, "x"), &dx).unwrap();
        assert_eq!(first.value().to_string(), "x*dx");
        let one1 = JetElement::new(&c, SuperPoly::one(&c.jet_table(1).unwrap())).unwrap();
        let second = module_action(Side::Second, &f(&c, "x"), &one1).unwrap();
        assert_eq!(second.value().to_string(), "x + dx");
        let second = module_action(Side::Second, &f(&c, "x^2"), &dx).unwrap();
        assert_eq!(second.value().to_string(), "x^2*dx + 2*x*dx^2");
    }

    #[test]
    fn mixed_orders_refused() {
        let c = chart1();
        let a = jet_of_function(&c, &f(&c, "x"), 1).unwrap();
        let b = jet_of_function(&c, &f(&c, "x"), 2).unwrap();
        assert_eq!(a.mul(&b), Err(Error::OrderMismatch(1, 2)));
    }

    #[test]
    fn diagonal_representatives() {
        let c = chart1();
        let pair = c.pair_table().unwrap();
        let r = |s: &str| parse_poly(s, &pair).unwrap();
        let j = diagonal_representative_to_jet(&c, &r("x' - x"), 2).unwrap();
        assert_eq!(j.value().to_string(), "dx");
        let j = diagonal_representative_to_jet(&c, &r("(x' - x)^3"), 2).unwrap();
        assert!(j.value().is_zero());
        let j = diagonal_representative_to_jet(&c, &r("x*x'"), 1).unwrap();
        assert_eq!(j.value().to_string(), "x^2 + x*dx");
    }
}
