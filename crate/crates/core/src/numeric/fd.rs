//! Central finite differences with relative steps.

pub const STEP1: f64 = 1e-5;
pub const STEP2: f64 = 1e-4;

pub fn step_for(x: f64, rel: f64) -> f64 {
    rel * x.abs().max(1.0)
}

pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = step_for(x, STEP1);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Fourth-order stencil, used where the second-order one is too coarse.
pub fn derivative4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = step_for(x, STEP2);
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

pub fn gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = step_for(x[i], STEP1);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Symmetric Hessian by central differences (step `STEP2`).
pub fn hessian<F: Fn(&[f64]) -> f64>(f: F, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![vec![0.0; n]; n];
    let mut y = x.to_vec();
    let f0 = f(x);
    for i in 0..n {
        let hi = step_for(x[i], STEP2);
        y[i] = x[i] + hi;
        let fp = f(&y);
        y[i] = x[i] - hi;
        let fm = f(&y);
        y[i] = x[i];
        out[i][i] = (fp - 2.0 * f0 + fm) / (hi * hi);
        for j in 0..i {
            let hj = step_for(x[j], STEP2);
            let mut g = |si: f64, sj: f64| {
                y[i] = x[i] + si * hi;
                y[j] = x[j] + sj * hj;
                let v = f(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let v = (g(1.0, 1.0) - g(1.0, -1.0) - g(-1.0, 1.0) + g(-1.0, -1.0)) / (4.0 * hi * hj);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Central-difference Jacobian of a vector map, columns = ∂/∂x_j.
pub fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64]) -> Vec<Vec<f64>> {
    let mut xp = x.to_vec();
    let cols: Vec<Vec<f64>> = (0..x.len())
        .map(|j| {
            let h = step_for(x[j], STEP1);
            xp[j] = x[j] + h;
            let fp = f(&xp);
            xp[j] = x[j] - h;
            let fm = f(&xp);
            xp[j] = x[j];
            fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    let m = cols.first().map_or(0, |c| c.len());
    (0..m).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_smooth_functions() {
        assert!((derivative(f64::sin, 0.4) - 0.4f64.cos()).abs() < 1e-10);
        assert!((second_derivative(f64::exp, 1.0) - 1f64.exp()).abs() < 1e-6);
        let h = hessian(|x| x[0] * x[0] * x[1] + x[1].sin(), &[0.3, 0.8]);
        assert!((h[0][1] - 0.6).abs() < 1e-7);
        assert!((h[1][1] + 0.8f64.sin()).abs() < 1e-6);
    }
}
