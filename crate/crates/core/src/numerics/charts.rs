use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::ode::rk4;
use super::{DiscreteMap, DiscreteSection, NumericConnection};
use crate::error::{Error, Result};

/// `exp_x(v)`: the geodesic from `x` with velocity `v`, at time 1.
pub fn exp_numeric(conn: &NumericConnection, x: &[f64], v: &[f64], steps: usize) -> Result<Vec<f64>> {
    let n = conn.dim();
    check_dim(n, x)?;
    check_dim(n, v)?;
    if conn.is_flat() {
        return Ok(x.iter().zip(v).map(|(a, b)| a + b).collect());
    }
    let y0: Vec<f64> = x.iter().chain(v).copied().collect();
    let y = rk4(
        |_, y| {
            let (z, p) = y.split_at(n);
            p.iter().copied().chain(conn.acceleration(z, p)).collect()
        },
        &y0,
        0.0,
        1.0,
        steps,
    )?;
    Ok(y[..n].to_vec())
}

fn check_dim(n: usize, v: &[f64]) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    Ok(())
}

/// `exp_x(v)` together with its derivative in `v`, from the variational
/// equation integrated alongside the geodesic.
fn exp_with_jacobian(conn: &NumericConnection, x: &[f64], v: &[f64], steps: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = conn.dim();
    let nn = n * n;
    let mut y0 = Vec::with_capacity(2 * n + 2 * nn);
    y0.extend_from_slice(x);
    y0.extend_from_slice(v);
    y0.extend(std::iter::repeat_n(0.0, nn));
    y0.extend((0..nn).map(|e| if e / n == e % n { 1.0 } else { 0.0 }));
    let y = rk4(
        |_, y| {
            let (z, rest) = y.split_at(n);
            let (p, rest) = rest.split_at(n);
            let (jz, jp) = rest.split_at(nn);
            let g = conn.gamma_at(z);
            let dg = conn.dgamma_at(z);
            let mut out = Vec::with_capacity(y.len());
            out.extend_from_slice(p);
            out.extend(conn.acceleration(z, p));
            out.extend_from_slice(jp);
            for i in 0..n {
                for m in 0..n {
                    let mut acc = 0.0;
                    for j in 0..n {
                        for l in 0..n {
                            let idx = (i * n + j) * n + l;
                            let pp = p[j] * p[l];
                            for k in 0..n {
                                acc -= dg[idx * n + k] * pp * jz[k * n + m];
                            }
                            acc -= 2.0 * g[idx] * p[j] * jp[l * n + m];
                        }
                    }
                    out.push(acc);
                }
            }
            out
        },
        &y0,
        0.0,
        1.0,
        steps,
    )?;
    let jac = DMatrix::from_row_slice(n, n, &y[2 * n..2 * n + nn]);
    Ok((y[..n].to_vec(), jac))
}

/// Parameters of the geodesic shooting in [`chart_phi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub steps: usize,
    /// Residual tolerance, relative to `1 + |target|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            steps: 200,
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(conn: &NumericConnection, x: &[f64], v: &[f64], g: &[f64], steps: usize) -> f64 {
    match exp_numeric(conn, x, v, steps) {
        Ok(z) => norm(&z.iter().zip(g).map(|(a, b)| a - b).collect::<Vec<_>>()),
        Err(_) => f64::INFINITY,
    }
}

/// Damped Newton iteration for `exp_x(v) = g`.
fn shoot(conn: &NumericConnection, x: &[f64], g: &[f64], opts: &NewtonOptions) -> Option<Vec<f64>> {
    let scale = 1.0 + g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = opts.tol * scale;
    let mut v: Vec<f64> = g.iter().zip(x).map(|(a, b)| a - b).collect();
    // pull the straight-line guess back until the geodesic stays finite
    for _ in 0..60 {
        if exp_numeric(conn, x, &v, opts.steps).is_ok() {
            break;
        }
        v.iter_mut().for_each(|c| *c /= 2.0);
    }
    for _ in 0..opts.max_iter {
        let (z, jac) = exp_with_jacobian(conn, x, &v, opts.steps).ok()?;
        let f: Vec<f64> = z.iter().zip(g).map(|(a, b)| a - b).collect();
        let r = norm(&f);
        if r <= tol {
            return Some(v);
        }
        let delta = jac.lu().solve(&(-DVector::from_vec(f)))?;
        let mut alpha = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(delta.iter()).map(|(a, d)| a + alpha * d).collect();
            let rt = residual(conn, x, &trial, g, opts.steps);
            if rt < r || rt <= tol {
                v = trial;
                break;
            }
            alpha /= 2.0;
            if alpha < 1e-6 {
                return None;
            }
        }
    }
    let r = residual(conn, x, &v, g, opts.steps);
    (r <= tol).then_some(v)
}

fn check_same_grid(f: &DiscreteMap, s: &DiscreteSection) -> Result<()> {
    if f.grid != s.grid {
        return Err(Error::Shape("map and section are sampled on different grids".into()));
    }
    Ok(())
}

/// `psi_f(s)(x) = exp_{f(x)}(s(x))`.
pub fn chart_psi(f: &DiscreteMap, s: &DiscreteSection, conn: &NumericConnection, steps: usize) -> Result<DiscreteMap> {
    check_same_grid(f, s)?;
    let values = f
        .values
        .par_iter()
        .zip(&s.vectors)
        .map(|(x, v)| exp_numeric(conn, x, v, steps))
        .collect::<Result<Vec<_>>>()?;
    DiscreteMap::new(f.grid.clone(), values)
}

/// `phi_f(g)`: the section `s` with `exp_{f(x)}(s(x)) = g(x)`, found by
/// geodesic shooting. Points where the iteration fails are reported as
/// [`Error::NotInChart`].
pub fn chart_phi(f: &DiscreteMap, g: &DiscreteMap, conn: &NumericConnection, opts: &NewtonOptions) -> Result<DiscreteSection> {
    if f.grid != g.grid {
        return Err(Error::Shape("maps are sampled on different grids".into()));
    }
    for v in f.values.iter().chain(&g.values) {
        check_dim(conn.dim(), v)?;
    }
    let solved: Vec<Option<Vec<f64>>> = f
        .values
        .par_iter()
        .zip(&g.values)
        .map(|(x, y)| shoot(conn, x, y, opts))
        .collect();
    let failed: Vec<usize> = solved.iter().enumerate().filter(|(_, s)| s.is_none()).map(|(i, _)| i).collect();
    if !failed.is_empty() {
        return Err(Error::NotInChart(failed));
    }
    DiscreteSection::new(f.grid.clone(), solved.into_iter().flatten().collect())
}

/// `(psi_f(h eta) - psi_f(-h eta)) / 2h`, which approximates `eta`.
pub fn tangent_check(
    f: &DiscreteMap,
    eta: &DiscreteSection,
    conn: &NumericConnection,
    h: f64,
    steps: usize,
) -> Result<DiscreteSection> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument("the step h must be positive".into()));
    }
    let plus = chart_psi(f, &eta.scaled(h), conn, steps)?;
    let minus = chart_psi(f, &eta.scaled(-h), conn, steps)?;
    let vectors = plus
        .values
        .iter()
        .zip(&minus.values)
        .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q) / (2.0 * h)).collect())
        .collect();
    DiscreteSection::new(f.grid.clone(), vectors)
}
