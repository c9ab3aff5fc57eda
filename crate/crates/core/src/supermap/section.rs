use std::collections::BTreeMap;

use super::{ParityMode, SuperManifoldPresentation};
use crate::error::{Error, Result};
use crate::graded::{OddSet, SuperPoly};

/// Coefficients `c_A(y)` of `sum_A c_A(y) theta^A`, keyed by ascending index
/// sets of source odd generators. Zero entries are never stored.
pub type CoefficientTable = BTreeMap<OddSet, SuperPoly>;

/// A section of `S(W*[1]) (x) f0*TN (+) S(W*[1]) (x) f0*V[1]` truncated at
/// `k = rank W`.
///
/// `tangent[i][A]` is `T^i_A(y)` (with `|A| >= 1`), `fiber[a][A]` is
/// `Psi^a_A(y)`. The `theta^A` component has parity `|A|` in the tangent part
/// and `|A| + 1` in the fiber part.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperfieldSection {
    source: SuperManifoldPresentation,
    target: SuperManifoldPresentation,
    mode: ParityMode,
    base_map: Vec<SuperPoly>,
    tangent: Vec<CoefficientTable>,
    fiber: Vec<CoefficientTable>,
}

impl SuperfieldSection {
    pub fn new(
        source: &SuperManifoldPresentation,
        target: &SuperManifoldPresentation,
        mode: ParityMode,
        base_map: Vec<SuperPoly>,
        tangent: Vec<CoefficientTable>,
        fiber: Vec<CoefficientTable>,
    ) -> Result<Self> {
        let n = target.chart().dim();
        for (len, expected) in [(base_map.len(), n), (tangent.len(), n), (fiber.len(), target.rank())] {
            if len != expected {
                return Err(Error::DimensionMismatch { expected, found: len });
            }
        }
        let ft = source.chart().function_table();
        let base_map = base_map.iter().map(|p| p.reinterpret(&ft)).collect::<Result<Vec<_>>>()?;
        let clean = |t: Vec<CoefficientTable>, min: u32| -> Result<Vec<CoefficientTable>> {
            t.into_iter()
                .map(|tab| {
                    let mut out = CoefficientTable::new();
                    for (set, c) in tab {
                        if set.len() < min || set.iter().any(|a| a >= source.rank()) {
                            return Err(Error::Shape(format!(
                                "odd index set {:?} outside 1..={} or below degree {min}",
                                set.indices().iter().map(|a| a + 1).collect::<Vec<_>>(),
                                source.rank()
                            )));
                        }
                        let c = c.reinterpret(&ft)?;
                        if !c.is_zero() {
                            out.insert(set, c);
                        }
                    }
                    Ok(out)
                })
                .collect()
        };
        let tangent = clean(tangent, 1)?;
        let fiber = clean(fiber, 0)?;
        let s = SuperfieldSection {
            source: source.clone(),
            target: target.clone(),
            mode,
            base_map,
            tangent,
            fiber,
        };
        if mode == ParityMode::Even && !check_even_degree(&s) {
            return Err(Error::Shape(
                "a classical section has tangent components of even degree and fiber components of odd degree only"
                    .into(),
            ));
        }
        Ok(s)
    }

    /// The zero section over `f0`.
    pub fn zero(
        source: &SuperManifoldPresentation,
        target: &SuperManifoldPresentation,
        mode: ParityMode,
        base_map: Vec<SuperPoly>,
    ) -> Result<Self> {
        Self::new(
            source,
            target,
            mode,
            base_map,
            vec![CoefficientTable::new(); target.chart().dim()],
            vec![CoefficientTable::new(); target.rank()],
        )
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

    /// Truncation order: the source odd rank.
    pub fn truncation(&self) -> usize {
        self.source.rank()
    }

    pub fn base_map(&self) -> &[SuperPoly] {
        &self.base_map
    }

    pub fn tangent(&self) -> &[CoefficientTable] {
        &self.tangent
    }

    pub fn fiber(&self) -> &[CoefficientTable] {
        &self.fiber
    }

    pub fn is_zero(&self) -> bool {
        self.tangent.iter().chain(&self.fiber).all(BTreeMap::is_empty)
    }
}

/// Whether the section has even total degree: tangent components only at
/// even `|A|`, fiber components only at odd `|A|`.
pub fn check_even_degree(s: &SuperfieldSection) -> bool {
    s.tangent.iter().all(|t| t.keys().all(|a| a.len() % 2 == 0))
        && s.fiber.iter().all(|t| t.keys().all(|a| a.len() % 2 == 1))
}
