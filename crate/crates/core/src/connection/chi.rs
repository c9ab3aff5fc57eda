use std::sync::Arc;

use super::{BundleConnection, TorsionFreeConnection};
use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::graded::{Generator, GeneratorTable, Parity, Scalar, SuperPoly};
use crate::jet::jet_table_for;

/// The three tables attached to a chart, a bundle and an order `k`.
///
/// Even fiber generators follow the chart coordinates among the base
/// generators; odd ones are the odd generators, with their degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTables {
    /// Functions on the total space: `x`, fiber generators.
    pub function: Arc<GeneratorTable>,
    /// `J^k(A)`: formal generators `dx`.
    pub jet: Arc<GeneratorTable>,
    /// `S^(k)(T*M) (x) A`: formal generators `xi`.
    pub symbol: Arc<GeneratorTable>,
}

impl SymbolTables {
    pub fn new(chart: &Chart, fiber_names: &[String], fiber_degrees: &[i32], k: u32) -> Result<Self> {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (name, &d) in fiber_names.iter().zip(fiber_degrees) {
            match Parity::of_degree(d) {
                Parity::Even => even.push(name.clone()),
                Parity::Odd => odd.push((name.clone(), d)),
            }
        }
        let function = GeneratorTable::builder()
            .base(chart.coords().iter().cloned().chain(even.iter().cloned()))
            .odd_with_degrees(odd.iter().cloned())
            .build()?;
        let jet = jet_table_for(chart, &function, k)?;
        let symbol = GeneratorTable::builder()
            .base(chart.coords().iter().cloned().chain(even))
            .formal(chart.tangent_names())
            .odd_with_degrees(odd)
            .truncation(k)
            .build()?;
        Ok(SymbolTables { function, jet, symbol })
    }
}

/// The derivation
/// `chi = xi^s d/dx^s - Gamma^s_{jl} xi^j xi^l d/dxi^s - xi^i A^a_{ib} v^b d/dv^a`
/// on `S^(k)(T*M) (x) A`, truncated at `xi`-degree `k`.
#[derive(Debug, Clone)]
pub struct ChiDerivation {
    tm: TorsionFreeConnection,
    bundle: Option<BundleConnection>,
    order: u32,
    tables: SymbolTables,
    /// `Gamma^s_{jl} xi^j xi^l`, one per `s`.
    spray: Vec<SuperPoly>,
    /// `(v^a, xi^i A^a_{ib} v^b)` for every fiber generator.
    fiber_field: Vec<(Generator, SuperPoly)>,
}

impl ChiDerivation {
    pub fn new(tm: &TorsionFreeConnection, bundle: Option<&BundleConnection>, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("order k must be at least 1".into()));
        }
        let chart = tm.chart();
        if let Some(b) = bundle {
            if !b.chart().same_coords(chart) {
                return Err(Error::ChartMismatch(format!(
                    "bundle connection lives on `{}`, tangent connection on `{}`",
                    b.chart().name(),
                    chart.name()
                )));
            }
        }
        let (names, degrees) = match bundle {
            Some(b) => (b.fiber_names().to_vec(), b.fiber_degrees().to_vec()),
            None => (vec![], vec![]),
        };
        let tables = SymbolTables::new(chart, &names, &degrees, k)?;
        let s = &tables.symbol;
        let n = chart.dim();
        let xi: Vec<SuperPoly> = (0..n).map(|i| SuperPoly::from_generator(s, Generator::Formal(i))).collect();
        let lift = |p: &SuperPoly| p.reinterpret(s);

        let mut spray = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = SuperPoly::zero(s);
            for j in 0..n {
                for l in 0..n {
                    let g = tm.christoffel(i, j, l);
                    if !g.is_zero() {
                        acc = &acc + &(&lift(g)? * &(&xi[j] * &xi[l]));
                    }
                }
            }
            spray.push(acc);
        }

        let mut fiber_field = Vec::new();
        if let Some(b) = bundle {
            let v: Vec<(Generator, SuperPoly)> = names
                .iter()
                .map(|name| {
                    let g = s.resolve(name)?;
                    Ok((g, SuperPoly::from_generator(s, g)))
                })
                .collect::<Result<_>>()?;
            for alpha in 0..b.rank() {
                let mut acc = SuperPoly::zero(s);
                for (i, xi_i) in xi.iter().enumerate() {
                    for (beta, (_, v_beta)) in v.iter().enumerate() {
                        let a = b.coefficient(alpha, i, beta);
                        if !a.is_zero() {
                            acc = &acc + &(&(xi_i * &lift(a)?) * v_beta);
                        }
                    }
                }
                fiber_field.push((v[alpha].0, acc));
            }
        }

        Ok(ChiDerivation {
            tm: tm.clone(),
            bundle: bundle.cloned(),
            order: k,
            tables,
            spray,
            fiber_field,
        })
    }

    pub fn tm_connection(&self) -> &TorsionFreeConnection {
        &self.tm
    }

    pub fn bundle(&self) -> Option<&BundleConnection> {
        self.bundle.as_ref()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn chart(&self) -> &Chart {
        self.tm.chart()
    }

    pub fn tables(&self) -> &SymbolTables {
        &self.tables
    }

    /// Moves `p` onto the symbol table, matching generators by name.
    pub fn lift(&self, p: &SuperPoly) -> Result<SuperPoly> {
        p.reinterpret(&self.tables.symbol)
    }

    /// `chi(p)`.
    pub fn apply(&self, p: &SuperPoly) -> Result<SuperPoly> {
        let p = self.lift(p)?;
        let s = &self.tables.symbol;
        let mut out = SuperPoly::zero(s);
        for i in 0..self.chart().dim() {
            let dx = p.derive_by(Generator::Base(i));
            if !dx.is_zero() {
                out = &out + &(&SuperPoly::from_generator(s, Generator::Formal(i)) * &dx);
            }
            if !self.spray[i].is_zero() {
                let dxi = p.derive_by(Generator::Formal(i));
                if !dxi.is_zero() {
                    out = &out - &(&self.spray[i] * &dxi);
                }
            }
        }
        for (g, field) in &self.fiber_field {
            if field.is_zero() {
                continue;
            }
            let dv = p.derive_by(*g);
            if !dv.is_zero() {
                out = &out - &(field * &dv);
            }
        }
        Ok(out)
    }

    /// `exp(chi)(p) = sum_{m <= k} chi^m(p) / m!`.
    pub fn exp(&self, p: &SuperPoly) -> Result<SuperPoly> {
        let mut term = self.lift(p)?;
        let mut acc = term.clone();
        for m in 1..=self.order {
            term = self.apply(&term)?.scale(&Scalar::new(1.into(), m.into()));
            if term.is_zero() {
                break;
            }
            acc = &acc + &term;
        }
        Ok(acc)
    }
}

/// `exp(chi)(p)`.
pub fn exp_chi(chi: &ChiDerivation, p: &SuperPoly) -> Result<SuperPoly> {
    chi.exp(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_poly;

    fn dim1(gamma: &str, k: u32) -> ChiDerivation {
        let c = Chart::new("N", ["x"]).unwrap();
        let g = parse_poly(gamma, &c.function_table()).unwrap();
        let tm = TorsionFreeConnection::new(&c, vec![vec![vec![g]]]).unwrap();
        ChiDerivation::new(&tm, None, k).unwrap()
    }

    fn s(chi: &ChiDerivation, src: &str) -> SuperPoly {
        parse_poly(src, &chi.tables().symbol).unwrap()
    }

    #[test]
    fn flat_chi_is_the_directional_derivative() {
        let chi = dim1("0", 3);
        let h = s(&chi, "x^3");
        assert_eq!(chi.apply(&h).unwrap().to_string(), "3*x^2*xi");
    }

    #[test]
    fn curved_chi_by_hand() {
        let chi = dim1("x", 3);
        let once = chi.apply(&s(&chi, "x^2")).unwrap();
        assert_eq!(once, s(&chi, "2*x*xi"));
        assert_eq!(chi.apply(&once).unwrap(), s(&chi, "2*xi^2 - 2*x^2*xi^2"));
    }

    #[test]
    fn exp_chi_examples() {
        let chi = dim1("x", 2);
        assert_eq!(exp_chi(&chi, &s(&chi, "7/3")).unwrap(), s(&chi, "7/3"));
        let e = exp_chi(&chi, &s(&chi, "x^2")).unwrap();
        assert_eq!(e.to_string(), "x^2 + 2*x*xi + xi^2 - x^2*xi^2");
    }

    #[test]
    fn bundle_term_sign() {
        let c = Chart::new("N", ["x"]).unwrap();
        let ft = c.function_table();
        let a = parse_poly("1 + x^2", &ft).unwrap();
        let b = BundleConnection::new(&c, vec!["v".into()], vec![1], vec![vec![vec![a]]]).unwrap();
        let chi = ChiDerivation::new(&TorsionFreeConnection::flat(&c), Some(&b), 2).unwrap();
        let v = s(&chi, "v");
        assert_eq!(chi.apply(&v).unwrap(), s(&chi, "-xi*v - x^2*xi*v"));
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let c = Chart::new("N", ["x"]).unwrap();
        let d = Chart::new("M", ["y"]).unwrap();
        let b = BundleConnection::flat(&d, vec!["v".into()], vec![1]).unwrap();
        let r = ChiDerivation::new(&TorsionFreeConnection::flat(&c), Some(&b), 2);
        assert!(matches!(r, Err(Error::ChartMismatch(_))));
    }
}
