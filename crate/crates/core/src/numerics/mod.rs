//! Floating-point realization of the exponential-map charts on mapping
//! spaces, sampled on finite grids.
//!
//! Maps `M -> N` and sections of `f*TN` are sampled on a [`SampleGrid`];
//! the chart `psi_f(s)(x) = exp_{f(x)}(s(x))` and its inverse `phi_f` are
//! evaluated pointwise by fixed-step RK4 integration of the geodesic
//! equation, and pullback bundles are trivialized by parallel transport.

mod charts;
mod ode;
mod transport;

pub use charts::{chart_phi, chart_psi, exp_numeric, tangent_check, NewtonOptions};
pub use ode::rk4;
pub use nalgebra::DMatrix;
pub use transport::{parallel_transport, transport_matrix, trivialize_over_chart, SampledPath};

use num_traits::ToPrimitive;

use crate::connection::{BundleConnection, TorsionFreeConnection};
use crate::error::{Error, Result};
use crate::graded::{Generator, SuperPoly};

/// A polynomial in the chart coordinates with `f64` coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct NumPoly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl NumPoly {
    fn from_poly(p: &SuperPoly) -> Result<Self> {
        if !p.is_base_only() {
            return Err(Error::InvalidArgument(format!("`{p}` is not a function of the coordinates")));
        }
        let terms = p
            .terms()
            .map(|(m, c)| Ok((c.to_f64().filter(|v| v.is_finite()).ok_or(Error::NonFinite)?, m.base.clone())))
            .collect::<Result<_>>()?;
        Ok(NumPoly { terms })
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powi(k as i32)))
            .sum()
    }
}

/// Christoffel symbols and their first derivatives, ready for evaluation.
#[derive(Debug, Clone)]
pub struct NumericConnection {
    dim: usize,
    /// `gamma[(i * n + j) * n + l]`
    gamma: Vec<NumPoly>,
    /// `dgamma[((i * n + j) * n + l) * n + k] = d_k Gamma^i_{jl}`
    dgamma: Vec<NumPoly>,
    flat: bool,
}

impl NumericConnection {
    pub fn new(c: &TorsionFreeConnection) -> Result<Self> {
        let n = c.chart().dim();
        let mut gamma = Vec::with_capacity(n * n * n);
        let mut dgamma = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let g = c.christoffel(i, j, l);
                    gamma.push(NumPoly::from_poly(g)?);
                    for k in 0..n {
                        dgamma.push(NumPoly::from_poly(&g.derive_by(Generator::Base(k)))?);
                    }
                }
            }
        }
        let flat = gamma.iter().all(NumPoly::is_zero);
        Ok(NumericConnection { dim: n, gamma, dgamma, flat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    /// `-Gamma^i_{jl}(z) p^j p^l`.
    pub(crate) fn acceleration(&self, z: &[f64], p: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        if self.flat {
            return out;
        }
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..n {
                for l in 0..n {
                    let g = &self.gamma[(i * n + j) * n + l];
                    if !g.is_zero() {
                        *o -= g.eval(z) * p[j] * p[l];
                    }
                }
            }
        }
        out
    }

    pub(crate) fn gamma_at(&self, z: &[f64]) -> Vec<f64> {
        self.gamma.iter().map(|g| g.eval(z)).collect()
    }

    pub(crate) fn dgamma_at(&self, z: &[f64]) -> Vec<f64> {
        self.dgamma.iter().map(|g| g.eval(z)).collect()
    }
}

/// Connection coefficients `A^a_{ib}` ready for evaluation.
#[derive(Debug, Clone)]
pub struct NumericBundleConnection {
    dim: usize,
    rank: usize,
    /// `coeffs[(a * n + i) * r + b]`
    coeffs: Vec<NumPoly>,
}

impl NumericBundleConnection {
    pub fn new(b: &BundleConnection) -> Result<Self> {
        let (n, r) = (b.chart().dim(), b.rank());
        let mut coeffs = Vec::with_capacity(r * n * r);
        for a in 0..r {
            for i in 0..n {
                for c in 0..r {
                    coeffs.push(NumPoly::from_poly(b.coefficient(a, i, c))?);
                }
            }
        }
        Ok(NumericBundleConnection { dim: n, rank: r, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `A^a_{ib}(z) v^i` as an `r x r` row-major matrix.
    pub(crate) fn contract(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let (n, r) = (self.dim, self.rank);
        let mut out = vec![0.0; r * r];
        for a in 0..r {
            for (i, vi) in v.iter().enumerate().take(n) {
                for b in 0..r {
                    let c = &self.coeffs[(a * n + i) * r + b];
                    if !c.is_zero() {
                        out[a * r + b] += c.eval(z) * vi;
                    }
                }
            }
        }
        out
    }
}

/// Finite set of points of the source chart.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    points: Vec<Vec<f64>>,
}

impl SampleGrid {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let d = points
            .first()
            .ok_or_else(|| Error::InvalidArgument("a grid needs at least one point".into()))?
            .len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Shape("grid points of different dimensions".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SampleGrid { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_values(grid: &SampleGrid, values: &[Vec<f64>]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    if let Some(d) = values.first().map(Vec::len) {
        if values.iter().any(|v| v.len() != d) {
            return Err(Error::Shape("values of different dimensions".into()));
        }
    }
    if values.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// A map sampled on a grid: one target point per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMap {
    pub grid: SampleGrid,
    pub values: Vec<Vec<f64>>,
}

impl DiscreteMap {
    pub fn new(grid: SampleGrid, values: Vec<Vec<f64>>) -> Result<Self> {
        check_values(&grid, &values)?;
        Ok(DiscreteMap { grid, values })
    }
}

/// A section of a pullback bundle sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSection {
    pub grid: SampleGrid,
    pub vectors: Vec<Vec<f64>>,
}

impl DiscreteSection {
    pub fn new(grid: SampleGrid, vectors: Vec<Vec<f64>>) -> Result<Self> {
        check_values(&grid, &vectors)?;
        Ok(DiscreteSection { grid, vectors })
    }

    pub fn zero(grid: &SampleGrid, dim: usize) -> Self {
        DiscreteSection {
            grid: grid.clone(),
            vectors: vec![vec![0.0; dim]; grid.len()],
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        DiscreteSection {
            grid: self.grid.clone(),
            vectors: self.vectors.iter().map(|v| v.iter().map(|x| x * t).collect()).collect(),
        }
    }
}

/// Largest absolute componentwise difference.
pub fn sup_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(u, v)| u.iter().zip(v).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
