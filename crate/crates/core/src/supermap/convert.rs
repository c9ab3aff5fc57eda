use std::sync::Arc;

use super::section::{CoefficientTable, SuperfieldSection};
use super::{ParityMode, SuperManifoldPresentation, SuperMorphism};
use crate::connection::{BundleConnection, JetIsomorphism, TorsionFreeConnection};
use crate::error::{Error, Result};
use crate::graded::{AlgebraMap, GeneratorTable, Monomial, MultiIndex, OddSet, Parity, Scalar, SuperPoly};
use num_traits::One;

/// Converts between morphisms into a fixed target and superfield sections,
/// for fixed connections on the target and a fixed source odd rank.
///
/// With `delta x(x, xi)` the geodesic jet, `w` its inverse series and
/// `M(x, xi)` the fiber frame of `exp(chi)`:
///
/// * `x^i = f0^i + delta x^i(f0, xi)` with `xi^i = sum_A T^i_A theta^A`,
/// * `eta^a = M^a_b(f0, xi) Psi^b` with `Psi^b = sum_A Psi^b_A theta^A`.
#[derive(Debug, Clone)]
pub struct SuperfieldConverter {
    target: SuperManifoldPresentation,
    iso: JetIsomorphism,
}

impl SuperfieldConverter {
    pub fn new(
        target: &SuperManifoldPresentation,
        gamma: &TorsionFreeConnection,
        bundle: Option<&BundleConnection>,
        source_rank: usize,
    ) -> Result<Self> {
        if !gamma.chart().same_coords(target.chart()) {
            return Err(Error::ChartMismatch(format!(
                "connection on `{}` does not match target chart `{}`",
                gamma.chart().name(),
                target.chart().name()
            )));
        }
        let flat;
        let bundle = match bundle {
            Some(b) => {
                if !b.chart().same_coords(target.chart())
                    || b.fiber_names() != target.odd_names()
                    || b.fiber_degrees() != target.degrees()
                {
                    return Err(Error::ChartMismatch(format!(
                        "bundle connection does not match the odd generators of `{}`",
                        target.name()
                    )));
                }
                b
            }
            None => {
                flat = BundleConnection::flat(target.chart(), target.odd_names().to_vec(), target.degrees().to_vec())?;
                &flat
            }
        };
        let k = source_rank.max(1) as u32;
        Ok(SuperfieldConverter {
            target: target.clone(),
            iso: JetIsomorphism::new(gamma, Some(bundle), k)?,
        })
    }

    pub fn isomorphism(&self) -> &JetIsomorphism {
        &self.iso
    }

    fn check_source(&self, source: &SuperManifoldPresentation, target: &SuperManifoldPresentation) -> Result<()> {
        if *target != self.target {
            return Err(Error::ChartMismatch(format!(
                "expected target `{}`, got `{}`",
                self.target.name(),
                target.name()
            )));
        }
        if source.truncation() != self.iso.order() {
            return Err(Error::OrderMismatch(source.truncation(), self.iso.order()));
        }
        Ok(())
    }

    /// Algebra map from the symbol table to `src`: `x -> f0`, `xi -> xi`,
    /// fiber generators to zero.
    fn evaluate_at(&self, src: &Arc<GeneratorTable>, f0: &[SuperPoly], xi: &[SuperPoly]) -> Result<AlgebraMap> {
        let symbol = &self.iso.tables().symbol;
        let chart = self.target.chart();
        let tangent = chart.tangent_names();
        let zero = SuperPoly::zero(src);
        let assignments: Vec<(&str, SuperPoly)> = chart
            .coords()
            .iter()
            .map(String::as_str)
            .zip(f0.iter().cloned())
            .chain(tangent.iter().map(String::as_str).zip(xi.iter().cloned()))
            .chain(self.target.odd_names().iter().map(|n| (n.as_str(), zero.clone())))
            .collect();
        AlgebraMap::new(symbol, src, assignments)
    }

    pub fn to_section(&self, f: &SuperMorphism) -> Result<SuperfieldSection> {
        self.check_source(f.source(), f.target())?;
        let src = f.table();
        let f0: Vec<SuperPoly> = f.x_pullbacks().iter().map(SuperPoly::odd_free_part).collect();
        let nilpotent: Vec<SuperPoly> = f.x_pullbacks().iter().zip(&f0).map(|(x, b)| x - b).collect();

        let at_nilpotent = self.evaluate_at(src, &f0, &nilpotent)?;
        let xi = self
            .iso
            .normal_inverse()
            .iter()
            .map(|w| at_nilpotent.apply(w))
            .collect::<Result<Vec<_>>>()?;

        let at_xi = self.evaluate_at(src, &f0, &xi)?;
        let psi = self
            .iso
            .frame_inverse()
            .iter()
            .map(|row| {
                let mut acc = SuperPoly::zero(src);
                for (m, eta) in row.iter().zip(f.eta_pullbacks()) {
                    if !m.is_zero() {
                        acc = &acc + &(&at_xi.apply(m)? * eta);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;

        let source = f.source();
        let base_map = f.base_map()?;
        let tangent = xi.iter().map(|p| extract(p, source, f.mode())).collect::<Result<_>>()?;
        let fiber = psi.iter().map(|p| extract(p, source, f.mode())).collect::<Result<_>>()?;
        SuperfieldSection::new(source, f.target(), f.mode(), base_map, tangent, fiber)
    }

    pub fn to_morphism(&self, s: &SuperfieldSection) -> Result<SuperMorphism> {
        self.check_source(s.source(), s.target())?;
        let source = s.source();
        let src = source.table(s.mode())?;
        let f0: Vec<SuperPoly> = s.base_map().iter().map(|p| p.reinterpret(&src)).collect::<Result<_>>()?;
        let xi: Vec<SuperPoly> = s
            .tangent()
            .iter()
            .map(|t| assemble(t, &src, source, s.mode(), Parity::Even))
            .collect::<Result<_>>()?;
        let psi: Vec<SuperPoly> = s
            .fiber()
            .iter()
            .map(|t| assemble(t, &src, source, s.mode(), Parity::Odd))
            .collect::<Result<_>>()?;

        let at_xi = self.evaluate_at(&src, &f0, &xi)?;
        let x = self
            .iso
            .normal()
            .iter()
            .zip(&f0)
            .map(|(d, b)| Ok(b + &at_xi.apply(d)?))
            .collect::<Result<Vec<_>>>()?;
        let eta = self
            .iso
            .frame()
            .iter()
            .map(|row| {
                let mut acc = SuperPoly::zero(&src);
                for (m, p) in row.iter().zip(&psi) {
                    if !m.is_zero() {
                        acc = &acc + &(&at_xi.apply(m)? * p);
                    }
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        SuperMorphism::new(source, s.target(), s.mode(), x, eta)
    }
}

/// Splits a polynomial over the source table into its `theta^A` coefficients,
/// absorbing the parameter `eps` when present.
fn extract(p: &SuperPoly, source: &SuperManifoldPresentation, mode: ParityMode) -> Result<CoefficientTable> {
    let ft = source.chart().function_table();
    let param = source.rank();
    let mut out = CoefficientTable::new();
    for (mu, set) in p.supports() {
        let key = if mode == ParityMode::All && set.contains(param) {
            set.without(param)
        } else {
            set
        };
        let c = p.coefficient_of(&mu, set).reinterpret(&ft)?;
        if out.insert(key, c).is_some() {
            return Err(Error::Shape("component of mixed parity".into()));
        }
    }
    Ok(out)
}

/// `sum_A c_A theta^A`, with `eps` appended where the parity of `theta^A`
/// differs from `parity`.
fn assemble(
    table: &CoefficientTable,
    src: &Arc<GeneratorTable>,
    source: &SuperManifoldPresentation,
    mode: ParityMode,
    parity: Parity,
) -> Result<SuperPoly> {
    let mut acc = SuperPoly::zero(src);
    for (set, c) in table {
        let mut odd = *set;
        if Parity::from_bits(set.len()) != parity {
            if mode != ParityMode::All {
                return Err(Error::Shape("component of the wrong parity for a classical section".into()));
            }
            odd = odd.union(OddSet::single(source.rank()));
        }
        let unit = Monomial {
            formal: MultiIndex::zero(0),
            odd,
            base: vec![0; src.base().len()],
        };
        acc = &acc + &(&c.reinterpret(src)? * &SuperPoly::monomial(src, unit, Scalar::one()));
    }
    Ok(acc)
}

/// [`SuperfieldConverter::to_section`] for a single morphism.
pub fn morphism_to_section(
    f: &SuperMorphism,
    gamma: &TorsionFreeConnection,
    bundle: Option<&BundleConnection>,
) -> Result<SuperfieldSection> {
    SuperfieldConverter::new(f.target(), gamma, bundle, f.source().rank())?.to_section(f)
}

/// [`SuperfieldConverter::to_morphism`] for a single section.
pub fn section_to_morphism(
    s: &SuperfieldSection,
    gamma: &TorsionFreeConnection,
    bundle: Option<&BundleConnection>,
) -> Result<SuperMorphism> {
    SuperfieldConverter::new(s.target(), gamma, bundle, s.source().rank())?.to_morphism(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::io::parse_poly;

    fn pres(name: &str, coord: &str, odd: &[&str]) -> SuperManifoldPresentation {
        let c = Chart::new(name, [coord]).unwrap();
        SuperManifoldPresentation::new(name, &c, odd.iter().map(|s| s.to_string()).collect(), None).unwrap()
    }

    fn morphism(
        src: &SuperManifoldPresentation,
        dst: &SuperManifoldPresentation,
        mode: ParityMode,
        x: &str,
        eta: &[&str],
    ) -> SuperMorphism {
        let t = src.table(mode).unwrap();
        let p = |s: &str| parse_poly(s, &t).unwrap();
        SuperMorphism::new(src, dst, mode, vec![p(x)], eta.iter().map(|s| p(s)).collect()).unwrap()
    }

    fn ys(s: &str) -> SuperPoly {
        parse_poly(s, &Chart::new("M", ["y"]).unwrap().function_table()).unwrap()
    }

    #[test]
    fn identity_gives_unit_fiber_components() {
        let m = pres("M", "y", &["th1", "th2"]);
        let id = SuperMorphism::identity(&m, ParityMode::Even).unwrap();
        let flat = TorsionFreeConnection::flat(m.chart());
        let s = morphism_to_section(&id, &flat, None).unwrap();
        assert!(s.tangent()[0].is_empty());
        for a in 0..2 {
            let expected: CoefficientTable = [(OddSet::single(a), ys("1"))].into_iter().collect();
            assert_eq!(s.fiber()[a], expected);
        }
        assert_eq!(s.base_map()[0], ys("y"));
    }

    #[test]
    fn flat_tangent_read_off() {
        let m = pres("M", "y", &["th1", "th2"]);
        let n = pres("N", "x", &[]);
        let f = morphism(&m, &n, ParityMode::Even, "y^2 + (y + 3)*th1*th2", &[]);
        let s = morphism_to_section(&f, &TorsionFreeConnection::flat(n.chart()), None).unwrap();
        let expected: CoefficientTable = [(OddSet::from_indices(&[0, 1]), ys("y + 3"))].into_iter().collect();
        assert_eq!(s.tangent()[0], expected);
        assert_eq!(s.base_map()[0], ys("y^2"));
        assert_eq!(section_to_morphism(&s, &TorsionFreeConnection::flat(n.chart()), None).unwrap(), f);
    }

    #[test]
    fn flat_fiber_read_off() {
        let m = pres("M", "y", &["th"]);
        let n = pres("N", "x", &["eta"]);
        let f = morphism(&m, &n, ParityMode::Even, "y^3", &["(1 - y)*th"]);
        let s = morphism_to_section(&f, &TorsionFreeConnection::flat(n.chart()), None).unwrap();
        let expected: CoefficientTable = [(OddSet::single(0), ys("1 - y"))].into_iter().collect();
        assert_eq!(s.fiber()[0], expected);
    }

    #[test]
    fn zero_section_gives_base_map() {
        let m = pres("M", "y", &["th1", "th2"]);
        let n = pres("N", "x", &["eta"]);
        let s = SuperfieldSection::zero(&m, &n, ParityMode::Even, vec![ys("y^2 - 1")]).unwrap();
        let f = section_to_morphism(&s, &TorsionFreeConnection::flat(n.chart()), None).unwrap();
        assert_eq!(f.to_string(), "x = -1 + y^2\neta = 0\n");
    }

    #[test]
    fn curved_round_trip_rank_four() {
        let m = pres("M", "y", &["t1", "t2", "t3", "t4"]);
        let n = pres("N", "x", &["eta"]);
        let c = n.chart();
        let gamma = TorsionFreeConnection::new(c, vec![vec![vec![parse_poly("2", &c.function_table()).unwrap()]]]).unwrap();
        let a = parse_poly("x - 1", &c.function_table()).unwrap();
        let b = BundleConnection::new(c, vec!["eta".into()], vec![1], vec![vec![vec![a]]]).unwrap();
        let f = morphism(
            &m,
            &n,
            ParityMode::Even,
            "y + t1*t2 + y*t3*t4 - 2*t1*t2*t3*t4",
            &["y*t1 + t2*t3*t4 - t1*t2*t4"],
        );
        let s = morphism_to_section(&f, &gamma, Some(&b)).unwrap();
        assert!(crate::supermap::check_even_degree(&s));
        assert_eq!(section_to_morphism(&s, &gamma, Some(&b)).unwrap(), f);
    }

    #[test]
    fn inner_hom_reaches_odd_sections() {
        let m = pres("M", "y", &["th1", "th2"]);
        let n = pres("N", "x", &["eta"]);
        let c = n.chart();
        let gamma = TorsionFreeConnection::new(c, vec![vec![vec![parse_poly("x", &c.function_table()).unwrap()]]]).unwrap();
        let f = morphism(&m, &n, ParityMode::All, "y + th1*eps + y*th1*th2", &["eps + y*th2"]);
        let s = morphism_to_section(&f, &gamma, None).unwrap();
        assert!(!crate::supermap::check_even_degree(&s));
        assert_eq!(s.tangent()[0][&OddSet::single(0)], ys("1"));
        assert_eq!(s.fiber()[0][&OddSet::EMPTY], ys("1"));
        assert_eq!(section_to_morphism(&s, &gamma, None).unwrap(), f);
    }
}
