use crate::error::{Error, Result};

/// Classical fixed-step fourth-order Runge-Kutta for `y' = f(t, y)` from
/// `t0` to `t1` in `steps` equal steps.
pub fn rk4<F>(f: F, y0: &[f64], t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one integration step is required".into()));
    }
    let h = (t1 - t0) / steps as f64;
    let axpy = |y: &[f64], k: &[f64], a: f64| -> Vec<f64> { y.iter().zip(k).map(|(y, k)| y + a * k).collect() };
    let mut y = y0.to_vec();
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
        let k3 = f(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
        let k4 = f(t + h, &axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let y = rk4(|_, y| vec![-y[0]], &[1.0], 0.0, 1.0, 100).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported() {
        let r = rk4(|_, y| vec![y[0] * y[0]], &[1e200], 0.0, 1.0, 1);
        assert_eq!(r, Err(Error::NonFinite));
    }
}
