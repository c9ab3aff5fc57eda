//! Connections and the normal-coordinate calculus they fix.
//!
//! A torsion-free connection on `TM` identifies the k-th order neighbourhood
//! of the diagonal with that of the zero section of `TM` ([`geodesic_jet`]);
//! together with a connection on a graded bundle `V` it fixes the
//! isomorphism `J^k(A) -> S^(k)(T*M) (x) A` ([`JetIsomorphism`]), which is
//! `exp` of the derivation [`ChiDerivation`]. Two choices of connections
//! differ by the unipotent automorphism of [`psi_automorphism`].

mod chi;
mod geodesic;
mod iso;

pub use chi::{exp_chi, ChiDerivation, SymbolTables};
pub use geodesic::geodesic_jet;
pub use iso::{psi_automorphism, JetIsomorphism};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::graded::{Parity, Scalar, SuperPoly};
use num_traits::One;

/// Christoffel symbols `Gamma^i_{jl}(x)` with `Gamma^i_{jl} = Gamma^i_{lj}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionFreeConnection {
    chart: Chart,
    /// `gamma[i][j][l]`, polynomials over the chart's function table.
    gamma: Vec<Vec<Vec<SuperPoly>>>,
}

impl TorsionFreeConnection {
    pub fn new(chart: &Chart, gamma: Vec<Vec<Vec<SuperPoly>>>) -> Result<Self> {
        let n = chart.dim();
        let ft = chart.function_table();
        if gamma.len() != n || gamma.iter().any(|g| g.len() != n || g.iter().any(|r| r.len() != n)) {
            return Err(Error::Shape(format!("Christoffel array must be {n}x{n}x{n}")));
        }
        let gamma = gamma
            .into_iter()
            .map(|gi| {
                gi.into_iter()
                    .map(|row| row.iter().map(|p| p.reinterpret(&ft)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, gi) in gamma.iter().enumerate() {
            for j in 0..n {
                for l in j + 1..n {
                    if gi[j][l] != gi[l][j] {
                        return Err(Error::NotTorsionFree {
                            upper: chart.coords()[i].clone(),
                            a: chart.coords()[j].clone(),
                            b: chart.coords()[l].clone(),
                        });
                    }
                }
            }
        }
        Ok(TorsionFreeConnection {
            chart: chart.clone(),
            gamma,
        })
    }

    pub fn flat(chart: &Chart) -> Self {
        let n = chart.dim();
        let zero = SuperPoly::zero(&chart.function_table());
        TorsionFreeConnection {
            chart: chart.clone(),
            gamma: vec![vec![vec![zero; n]; n]; n],
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn christoffel(&self, i: usize, j: usize, l: usize) -> &SuperPoly {
        &self.gamma[i][j][l]
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.iter().flatten().flatten().all(SuperPoly::is_zero)
    }

    /// `(1 - t) self + t other`.
    pub fn interpolate(&self, other: &TorsionFreeConnection, t: &Scalar) -> Result<Self> {
        if !self.chart.same_coords(&other.chart) {
            return Err(Error::ChartMismatch("interpolating connections on different charts".into()));
        }
        let s = Scalar::one() - t;
        let gamma = self
            .gamma
            .iter()
            .zip(&other.gamma)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(ra, rb)| ra.iter().zip(rb).map(|(p, q)| &p.scale(&s) + &q.scale(t)).collect())
                    .collect()
            })
            .collect();
        Ok(TorsionFreeConnection {
            chart: self.chart.clone(),
            gamma,
        })
    }
}

/// Connection coefficients `A^alpha_{i beta}(x)` of a graded vector bundle,
/// acting on the dual frame as `nabla_i v^alpha = -A^alpha_{i beta} v^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleConnection {
    chart: Chart,
    fiber_names: Vec<String>,
    fiber_degrees: Vec<i32>,
    /// `coeffs[alpha][i][beta]`.
    coeffs: Vec<Vec<Vec<SuperPoly>>>,
}

impl BundleConnection {
    pub fn new(
        chart: &Chart,
        fiber_names: Vec<String>,
        fiber_degrees: Vec<i32>,
        coeffs: Vec<Vec<Vec<SuperPoly>>>,
    ) -> Result<Self> {
        let r = fiber_names.len();
        let n = chart.dim();
        if fiber_degrees.len() != r {
            return Err(Error::Shape(format!("expected {r} fiber degrees, got {}", fiber_degrees.len())));
        }
        if coeffs.len() != r || coeffs.iter().any(|a| a.len() != n || a.iter().any(|row| row.len() != r)) {
            return Err(Error::Shape(format!("connection coefficients must be {r}x{n}x{r}")));
        }
        let ft = chart.function_table();
        let coeffs = coeffs
            .into_iter()
            .map(|a| {
                a.into_iter()
                    .map(|row| row.iter().map(|p| p.reinterpret(&ft)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (alpha, a) in coeffs.iter().enumerate() {
            for (i, row) in a.iter().enumerate() {
                for (beta, p) in row.iter().enumerate() {
                    if fiber_degrees[alpha] != fiber_degrees[beta] && !p.is_zero() {
                        return Err(Error::DegreeMixing {
                            alpha,
                            coord: chart.coords()[i].clone(),
                            beta,
                        });
                    }
                }
            }
        }
        Ok(BundleConnection {
            chart: chart.clone(),
            fiber_names,
            fiber_degrees,
            coeffs,
        })
    }

    pub fn flat(chart: &Chart, fiber_names: Vec<String>, fiber_degrees: Vec<i32>) -> Result<Self> {
        let r = fiber_names.len();
        let zero = SuperPoly::zero(&chart.function_table());
        Self::new(chart, fiber_names, fiber_degrees, vec![vec![vec![zero; r]; chart.dim()]; r])
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rank(&self) -> usize {
        self.fiber_names.len()
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber_names
    }

    pub fn fiber_degrees(&self) -> &[i32] {
        &self.fiber_degrees
    }

    pub fn fiber_parity(&self, alpha: usize) -> Parity {
        Parity::of_degree(self.fiber_degrees[alpha])
    }

    pub fn coefficient(&self, alpha: usize, i: usize, beta: usize) -> &SuperPoly {
        &self.coeffs[alpha][i][beta]
    }

    pub fn is_flat(&self) -> bool {
        self.coeffs.iter().flatten().flatten().all(SuperPoly::is_zero)
    }

    pub fn interpolate(&self, other: &BundleConnection, t: &Scalar) -> Result<Self> {
        if !self.chart.same_coords(&other.chart)
            || self.fiber_names != other.fiber_names
            || self.fiber_degrees != other.fiber_degrees
        {
            return Err(Error::ChartMismatch("interpolating connections on different bundles".into()));
        }
        let s = Scalar::one() - t;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(ra, rb)| ra.iter().zip(rb).map(|(p, q)| &p.scale(&s) + &q.scale(t)).collect())
                    .collect()
            })
            .collect();
        Ok(BundleConnection {
            chart: self.chart.clone(),
            fiber_names: self.fiber_names.clone(),
            fiber_degrees: self.fiber_degrees.clone(),
            coeffs,
        })
    }
}

/// `Gamma_t = (1 - t) Gamma_0 + t Gamma_1`.
pub fn interpolate_connection(
    g0: &TorsionFreeConnection,
    g1: &TorsionFreeConnection,
    t: &Scalar,
) -> Result<TorsionFreeConnection> {
    g0.interpolate(g1, t)
}
