use super::TorsionFreeConnection;
use crate::error::{Error, Result};
use crate::graded::{Generator, GeneratorTable, Scalar, SuperPoly};

/// `delta x^i(x, xi) = z^i(x, xi, 1) - x^i mod xi^{k+1}` for the geodesic
/// `z'' = -Gamma(z) z' z'`, `z(0) = x`, `z'(0) = xi`.
///
/// The Taylor coefficients `z^(m)(0)` are obtained by applying the total
/// derivative `D = p^s d/dz^s - Gamma^s_{jl}(z) p^j p^l d/dp^s` to `z`
/// repeatedly and then setting `(z, p) = (x, xi)`. Each application raises
/// the `p`-degree by one, so the recursion stops at `m = k`. The result lives
/// on the table with base `x` and formal `xi`, truncated at `k`.
pub fn geodesic_jet(gamma: &TorsionFreeConnection, k: u32) -> Result<Vec<SuperPoly>> {
    if k == 0 {
        return Err(Error::InvalidArgument("order k must be at least 1".into()));
    }
    let chart = gamma.chart();
    let n = chart.dim();
    let table = GeneratorTable::builder()
        .base(chart.coords().iter().cloned())
        .formal(chart.tangent_names())
        .truncation(k)
        .build()?;
    let p: Vec<SuperPoly> = (0..n).map(|i| SuperPoly::from_generator(&table, Generator::Formal(i))).collect();

    // -Gamma^s_{jl}(z) p^j p^l
    let mut accel = Vec::with_capacity(n);
    for s in 0..n {
        let mut acc = SuperPoly::zero(&table);
        for j in 0..n {
            for l in 0..n {
                let g = gamma.christoffel(s, j, l);
                if !g.is_zero() {
                    acc = &acc - &(&g.reinterpret(&table)? * &(&p[j] * &p[l]));
                }
            }
        }
        accel.push(acc);
    }

    let total_derivative = |f: &SuperPoly| {
        let mut out = SuperPoly::zero(&table);
        for s in 0..n {
            let dz = f.derive_by(Generator::Base(s));
            if !dz.is_zero() {
                out = &out + &(&p[s] * &dz);
            }
            if !accel[s].is_zero() {
                let dp = f.derive_by(Generator::Formal(s));
                if !dp.is_zero() {
                    out = &out + &(&accel[s] * &dp);
                }
            }
        }
        out
    };

    let mut result = Vec::with_capacity(n);
    for i in 0..n {
        // z^(1) = p; higher derivatives by the recursion.
        let mut deriv = p[i].clone();
        let mut acc = deriv.clone();
        let mut fact = Scalar::from_integer(1.into());
        for m in 2..=k {
            deriv = total_derivative(&deriv);
            if deriv.is_zero() {
                break;
            }
            fact *= Scalar::from_integer(m.into());
            acc = &acc + &deriv.scale(&fact.recip());
        }
        result.push(acc);
    }
    Ok(result)
}
