use nalgebra::DMatrix;
use rayon::prelude::*;

use super::ode::rk4;
use super::{DiscreteMap, DiscreteSection, NumericBundleConnection, NumericConnection};
use crate::error::{Error, Result};

/// A curve sampled at increasing times, interpolated linearly between
/// samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 || times.len() != points.len() {
            return Err(Error::InvalidArgument("a path needs at least two samples, one time each".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("sample times must increase".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Shape("path samples of different dimensions".into()));
        }
        if times.iter().chain(points.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SampledPath { times, points })
    }

    /// Samples at times `0, 1, ..., m - 1`.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new((0..points.len()).map(|i| i as f64).collect(), points)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let end = *self.times.last().expect("at least two samples");
        let start = self.times[0];
        SampledPath {
            times: self.times.iter().rev().map(|t| start + end - t).collect(),
            points: self.points.iter().rev().cloned().collect(),
        }
    }

    /// This path followed by `next`, which must start where this one ends.
    pub fn concat(&self, next: &SampledPath) -> Result<Self> {
        if self.points.last() != next.points.first() {
            return Err(Error::InvalidArgument("paths do not join".into()));
        }
        let shift = self.times.last().expect("at least two samples") - next.times[0];
        let mut times = self.times.clone();
        let mut points = self.points.clone();
        times.extend(next.times[1..].iter().map(|t| t + shift));
        points.extend(next.points[1..].iter().cloned());
        Self::new(times, points)
    }
}

/// Row-major `r x r` identity.
fn identity(r: usize) -> Vec<f64> {
    (0..r * r).map(|e| if e / r == e % r { 1.0 } else { 0.0 }).collect()
}

/// `U' = -A(gamma) gamma' U` along one linear segment, `U` row-major.
fn transport_segment(
    conn: &NumericBundleConnection,
    a: &[f64],
    b: &[f64],
    (t0, t1): (f64, f64),
    u: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    let r = conn.rank();
    let cols = u.len() / r.max(1);
    let velocity: Vec<f64> = a.iter().zip(b).map(|(p, q)| (q - p) / (t1 - t0)).collect();
    rk4(
        |t, u| {
            let s = (t - t0) / (t1 - t0);
            let z: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect();
            let m = conn.contract(&z, &velocity);
            let mut out = vec![0.0; u.len()];
            for i in 0..r {
                for j in 0..cols {
                    out[i * cols + j] = -(0..r).map(|l| m[i * r + l] * u[l * cols + j]).sum::<f64>();
                }
            }
            out
        },
        u,
        t0,
        t1,
        steps,
    )
}

fn check_path(conn: &NumericBundleConnection, path: &SampledPath) -> Result<()> {
    if path.points[0].len() != conn.dim() {
        return Err(Error::DimensionMismatch {
            expected: conn.dim(),
            found: path.points[0].len(),
        });
    }
    Ok(())
}

/// Parallel transport of a fiber vector along `path`, with
/// `steps_per_segment` RK4 steps between consecutive samples.
pub fn parallel_transport(
    conn: &NumericBundleConnection,
    path: &SampledPath,
    v0: &[f64],
    steps_per_segment: usize,
) -> Result<Vec<f64>> {
    check_path(conn, path)?;
    if v0.len() != conn.rank() {
        return Err(Error::DimensionMismatch {
            expected: conn.rank(),
            found: v0.len(),
        });
    }
    let mut v = v0.to_vec();
    for s in 0..path.points.len() - 1 {
        let span = (path.times[s], path.times[s + 1]);
        v = transport_segment(conn, &path.points[s], &path.points[s + 1], span, &v, steps_per_segment)?;
    }
    Ok(v)
}

/// The matrix of parallel transport along `path`: column `b` is the
/// transport of the `b`-th basis vector.
pub fn transport_matrix(
    conn: &NumericBundleConnection,
    path: &SampledPath,
    steps_per_segment: usize,
) -> Result<DMatrix<f64>> {
    check_path(conn, path)?;
    let r = conn.rank();
    let mut u = identity(r);
    for s in 0..path.points.len() - 1 {
        let span = (path.times[s], path.times[s + 1]);
        u = transport_segment(conn, &path.points[s], &path.points[s + 1], span, &u, steps_per_segment)?;
    }
    Ok(DMatrix::from_row_slice(r, r, &u))
}

/// Transport along the geodesic `t -> psi_f(t eta)(x)` for `t` from `t0` to
/// `t1`, at every grid point. The geodesic and the transport equation are
/// integrated together; `steps` RK4 steps cover `[0, t0]` and `steps` more
/// cover `[t0, t1]`.
pub fn trivialize_over_chart(
    f: &DiscreteMap,
    eta: &DiscreteSection,
    tm: &NumericConnection,
    bundle: &NumericBundleConnection,
    (t0, t1): (f64, f64),
    steps: usize,
) -> Result<Vec<DMatrix<f64>>> {
    if f.grid != eta.grid {
        return Err(Error::Shape("map and section are sampled on different grids".into()));
    }
    if tm.dim() != bundle.dim() {
        return Err(Error::DimensionMismatch {
            expected: tm.dim(),
            found: bundle.dim(),
        });
    }
    let n = tm.dim();
    let r = bundle.rank();
    f.values
        .par_iter()
        .zip(&eta.vectors)
        .map(|(x, v)| {
            if x.len() != n || v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.len().max(v.len()) });
            }
            let geodesic = |_: f64, y: &[f64]| -> Vec<f64> {
                let (z, p) = y.split_at(n);
                p.iter().copied().chain(tm.acceleration(z, p)).collect()
            };
            let y0: Vec<f64> = x.iter().chain(v).copied().collect();
            let start = if t0 == 0.0 { y0 } else { rk4(geodesic, &y0, 0.0, t0, steps)? };
            let state: Vec<f64> = start.iter().copied().chain(identity(r)).collect();
            let end = rk4(
                |t, y| {
                    let (zp, u) = y.split_at(2 * n);
                    let mut out = geodesic(t, zp);
                    let (z, p) = zp.split_at(n);
                    let m = bundle.contract(z, p);
                    for i in 0..r {
                        for j in 0..r {
                            out.push(-(0..r).map(|l| m[i * r + l] * u[l * r + j]).sum::<f64>());
                        }
                    }
                    out
                },
                &state,
                t0,
                t1,
                steps,
            )?;
            Ok(DMatrix::from_row_slice(r, r, &end[2 * n..]))
        })
        .collect()
}
