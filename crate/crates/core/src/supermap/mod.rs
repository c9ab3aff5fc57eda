//! Morphisms of split supermanifolds and their superfield sections.
//!
//! A split supermanifold `PiV` over a chart is presented by its base chart
//! and the odd fiber generators of `V`. A morphism `PiW -> PiV` is given by
//! pullbacks of the target generators. Once connections on `TN` and `V` are
//! fixed, morphisms correspond one-to-one to sections of even total degree
//! of `S(W*[1]) (x) f0*TN (+) S(W*[1]) (x) f0*V[1]` ([`morphism_to_section`]).
//!
//! [`ParityMode::All`] adjoins one extra odd parameter `eps` to the source,
//! so that morphisms over `R^{0|1}` reach the odd part of the section space
//! as well.

mod convert;
mod curry;
mod section;

pub use convert::{morphism_to_section, section_to_morphism, SuperfieldConverter};
pub use curry::{curry, curry_section, uncurry, CurriedBlocks, OddSplit};
pub use section::{check_even_degree, CoefficientTable, SuperfieldSection};

use std::fmt;
use std::sync::Arc;

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::graded::{AlgebraMap, GeneratorTable, Parity, SuperPoly};

/// Name of the odd parameter adjoined in [`ParityMode::All`].
pub const PARAMETER: &str = "eps";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ParityMode {
    /// Morphisms of supermanifolds: sections of even total degree.
    #[default]
    Even,
    /// Points of the inner Hom over `R^{0|1}`: sections of both parities.
    All,
}

impl ParityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ParityMode::Even => "even",
            ParityMode::All => "all",
        }
    }
}

impl std::str::FromStr for ParityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(ParityMode::Even),
            "all" => Ok(ParityMode::All),
            other => Err(Error::InvalidArgument(format!("unknown parity mode `{other}`"))),
        }
    }
}

/// `PiV` over a chart: base coordinates and odd fiber generators with their
/// degrees (odd integers, default 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperManifoldPresentation {
    name: String,
    chart: Chart,
    odd: Vec<String>,
    degrees: Vec<i32>,
}

impl SuperManifoldPresentation {
    pub fn new(name: impl Into<String>, chart: &Chart, odd: Vec<String>, degrees: Option<Vec<i32>>) -> Result<Self> {
        let degrees = degrees.unwrap_or_else(|| vec![1; odd.len()]);
        let p = SuperManifoldPresentation {
            name: name.into(),
            chart: chart.clone(),
            odd,
            degrees,
        };
        p.table(ParityMode::Even)?;
        Ok(p)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.odd.len()
    }

    pub fn odd_names(&self) -> &[String] {
        &self.odd
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    /// Functions on the presentation; in [`ParityMode::All`] the parameter
    /// `eps` follows the fiber generators.
    pub fn table(&self, mode: ParityMode) -> Result<Arc<GeneratorTable>> {
        let mut odd: Vec<(String, i32)> = self.odd.iter().cloned().zip(self.degrees.iter().copied()).collect();
        if self.degrees.len() != self.odd.len() {
            return Err(Error::Shape(format!(
                "`{}` has {} odd generators but {} degrees",
                self.name,
                self.odd.len(),
                self.degrees.len()
            )));
        }
        if mode == ParityMode::All {
            odd.push((PARAMETER.to_string(), 1));
        }
        GeneratorTable::builder()
            .base(self.chart.coords().iter().cloned())
            .odd_with_degrees(odd)
            .build()
    }

    /// Truncation order used for the normal-coordinate calculus on the
    /// target: the source odd rank, at least 1.
    pub(crate) fn truncation(&self) -> u32 {
        self.rank().max(1) as u32
    }
}

/// A morphism `source -> target` given by the pullbacks of the target
/// coordinates (even) and odd generators (odd), as polynomials over the
/// source table of `mode`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperMorphism {
    source: SuperManifoldPresentation,
    target: SuperManifoldPresentation,
    mode: ParityMode,
    x: Vec<SuperPoly>,
    eta: Vec<SuperPoly>,
}

impl SuperMorphism {
    pub fn new(
        source: &SuperManifoldPresentation,
        target: &SuperManifoldPresentation,
        mode: ParityMode,
        x: Vec<SuperPoly>,
        eta: Vec<SuperPoly>,
    ) -> Result<Self> {
        let table = source.table(mode)?;
        if x.len() != target.chart().dim() {
            return Err(Error::DimensionMismatch {
                expected: target.chart().dim(),
                found: x.len(),
            });
        }
        if eta.len() != target.rank() {
            return Err(Error::DimensionMismatch {
                expected: target.rank(),
                found: eta.len(),
            });
        }
        let x = x.iter().map(|p| p.reinterpret(&table)).collect::<Result<Vec<_>>>()?;
        let eta = eta.iter().map(|p| p.reinterpret(&table)).collect::<Result<Vec<_>>>()?;
        for (name, p) in target.chart().coords().iter().zip(&x) {
            if !p.is_even() {
                return Err(Error::ParityViolation {
                    name: name.clone(),
                    expected: Parity::Even,
                });
            }
        }
        for (name, p) in target.odd_names().iter().zip(&eta) {
            if !p.is_odd() {
                return Err(Error::ParityViolation {
                    name: name.clone(),
                    expected: Parity::Odd,
                });
            }
        }
        Ok(SuperMorphism {
            source: source.clone(),
            target: target.clone(),
            mode,
            x,
            eta,
        })
    }

    /// The identity of a presentation.
    pub fn identity(p: &SuperManifoldPresentation, mode: ParityMode) -> Result<Self> {
        let t = p.table(mode)?;
        let x = p.chart().coords().iter().map(|c| SuperPoly::generator(&t, c)).collect::<Result<_>>()?;
        let eta = p.odd_names().iter().map(|c| SuperPoly::generator(&t, c)).collect::<Result<_>>()?;
        Self::new(p, p, mode, x, eta)
    }

    pub fn source(&self) -> &SuperManifoldPresentation {
        &self.source
    }

    pub fn target(&self) -> &SuperManifoldPresentation {
        &self.target
    }

    pub fn mode(&self) -> ParityMode {
        self.mode
    }

    pub fn table(&self) -> &Arc<GeneratorTable> {
        self.x[0].table()
    }

    /// Pullbacks of the target coordinates.
    pub fn x_pullbacks(&self) -> &[SuperPoly] {
        &self.x
    }

    /// Pullbacks of the target odd generators.
    pub fn eta_pullbacks(&self) -> &[SuperPoly] {
        &self.eta
    }

    /// `f0`, the odd-free parts of the coordinate pullbacks, as functions on
    /// the source chart.
    pub fn base_map(&self) -> Result<Vec<SuperPoly>> {
        let ft = self.source.chart().function_table();
        self.x.iter().map(|p| p.odd_free_part().reinterpret(&ft)).collect()
    }

    /// Pullback `f*` as an algebra map from the target table (classical) to
    /// the source table.
    pub fn pullback(&self) -> Result<AlgebraMap> {
        let target = self.target.table(ParityMode::Even)?;
        let images = self.x.iter().chain(&self.eta).cloned().collect();
        AlgebraMap::from_images(&target, self.table(), images)
    }
}

impl fmt::Display for SuperMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.target.chart().coords().iter().chain(self.target.odd_names());
        for (name, p) in names.zip(self.x.iter().chain(&self.eta)) {
            writeln!(f, "{name} = {p}")?;
        }
        Ok(())
    }
}

/// `g o f`, with pullback `f* o g*`. The outer morphism must be classical;
/// the result has the mode of `f`.
pub fn compose(g: &SuperMorphism, f: &SuperMorphism) -> Result<SuperMorphism> {
    if g.mode != ParityMode::Even {
        return Err(Error::InvalidArgument("the outer morphism of a composition must be classical".into()));
    }
    if f.target != g.source {
        return Err(Error::ChartMismatch(format!(
            "cannot compose: `{}` is not the source `{}`",
            f.target.name(),
            g.source.name()
        )));
    }
    let fstar = f.pullback()?;
    let x = g.x.iter().map(|p| fstar.apply(p)).collect::<Result<_>>()?;
    let eta = g.eta.iter().map(|p| fstar.apply(p)).collect::<Result<_>>()?;
    SuperMorphism::new(&f.source, &g.target, f.mode, x, eta)
}

/// `(f' x f)*(F)`: substitutes the odd-free lift of `f0` for `x` and the full
/// pullback for `x'` in a polynomial `F` on the target pair table.
///
/// `F` in the `(k+1)`-th power of the diagonal ideal, `k` the source odd
/// rank, is sent to zero.
pub fn diagonal_vanishing_check(f: &SuperMorphism, big_f: &SuperPoly) -> Result<SuperPoly> {
    let chart = f.target.chart();
    let pair = chart.pair_table()?;
    let big_f = big_f.reinterpret(&pair)?;
    let primed = chart.primed_names();
    let assignments: Vec<(&str, SuperPoly)> = chart
        .coords()
        .iter()
        .map(String::as_str)
        .zip(f.x.iter().map(SuperPoly::odd_free_part))
        .chain(primed.iter().map(String::as_str).zip(f.x.iter().cloned()))
        .collect();
    AlgebraMap::new(&pair, f.table(), assignments)?.apply(&big_f)
}
