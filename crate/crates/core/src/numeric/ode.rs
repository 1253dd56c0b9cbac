//! Dormand-Prince 5(4) with step-size control, dense output and event location.

use super::root::brent;

#[derive(Clone, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h0: Option<f64>,
    pub hmax: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-12, h0: None, hmax: f64::INFINITY, max_steps: 200_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Reached,
    /// The stop predicate fired between the last two nodes; `t` is the refined crossing.
    Stopped { t: f64 },
    StepLimit,
    StepUnderflow,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub ts: Vec<f64>,
    pub ys: Vec<Vec<f64>>,
    cont: Vec<[Vec<f64>; 5]>,
    pub termination: Termination,
    pub rhs_evals: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrate y' = f(t, y) from `t0` to `t1` (either direction).
///
/// `stop(t, y)` returning true marks a state as inadmissible (e.g. outside a chart);
/// integration halts and the crossing is located on the dense output.
pub fn integrate<F, S>(mut f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions, mut stop: S) -> Solution
where
    F: FnMut(f64, &[f64], &mut [f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut sol = Solution {
        ts: vec![t0],
        ys: vec![y0.to_vec()],
        cont: Vec::new(),
        termination: Termination::Reached,
        rhs_evals: 0,
    };
    if span == 0.0 {
        return sol;
    }
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    f(t, &y, &mut k1);
    sol.rhs_evals += 1;
    let mut h = opts.h0.unwrap_or_else(|| {
        let sc: f64 = (0..n)
            .map(|i| {
                let s = opts.atol + opts.rtol * y[i].abs();
                (k1[i] / s).powi(2)
            })
            .sum::<f64>()
            .sqrt()
            / (n as f64).sqrt();
        let guess = if sc > 1e-10 { 0.01 / sc } else { 1e-3 * span.max(1e-3) };
        guess.min(span).min(opts.hmax)
    });
    let mut fac_old: f64 = 1e-4;
    let mut steps = 0;
    let mut reject = false;
    loop {
        if (t - t1) * dir >= -1e-15 * (1.0 + t1.abs()) {
            break;
        }
        if steps >= opts.max_steps {
            sol.termination = Termination::StepLimit;
            break;
        }
        steps += 1;
        let remaining = (t1 - t) * dir;
        if h >= remaining {
            h = remaining;
        }
        if h < 1e-14 * (1.0 + t.abs()) {
            sol.termination = Termination::StepUnderflow;
            break;
        }
        let hs = h * dir;
        axpy(&mut ytmp, &y, hs, &[(A21, &k1)]);
        f(t + C2 * hs, &ytmp, &mut k2);
        axpy(&mut ytmp, &y, hs, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * hs, &ytmp, &mut k3);
        axpy(&mut ytmp, &y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * hs, &ytmp, &mut k4);
        axpy(&mut ytmp, &y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * hs, &ytmp, &mut k5);
        axpy(&mut ytmp, &y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + hs, &ytmp, &mut k6);
        axpy(&mut ynew, &y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        f(t + hs, &ynew, &mut k7);
        sol.rhs_evals += 6;
        let mut err = 0.0;
        let mut finite = true;
        for i in 0..n {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(ynew[i].abs());
            err += (e / sc).powi(2);
            finite &= ynew[i].is_finite() && k7[i].is_finite();
        }
        let err = if finite { (err / n as f64).sqrt() } else { f64::INFINITY };
        if err <= 1.0 {
            let fac11 = err.powf(0.2 - 0.04 * 0.75);
            let fac = (fac11 / fac_old.powf(0.04) / 0.9).clamp(0.1, 5.0);
            let hnew = (h / fac).min(opts.hmax);
            fac_old = err.max(1e-4);
            let mut cont: [Vec<f64>; 5] = Default::default();
            cont[0] = y.clone();
            cont[1] = (0..n).map(|i| ynew[i] - y[i]).collect();
            cont[2] = (0..n).map(|i| hs * k1[i] - cont[1][i]).collect();
            cont[3] = (0..n).map(|i| cont[1][i] - hs * k7[i] - cont[2][i]).collect();
            cont[4] = (0..n)
                .map(|i| {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                })
                .collect();
            let tnew = if h == remaining { t1 } else { t + hs };
            if stop(tnew, &ynew) {
                let (t_lo, t_hi) = (t, tnew);
                let mut a = 0.0;
                let mut b = 1.0;
                for _ in 0..200 {
                    if (b - a) * h <= 1e-13 * (1.0 + t.abs()) {
                        break;
                    }
                    let m = 0.5 * (a + b);
                    let ym = eval_cont(&cont, m);
                    if stop(t_lo + m * (t_hi - t_lo), &ym) {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                sol.termination = Termination::Stopped { t: t_lo + b * (t_hi - t_lo) };
                break;
            }
            sol.cont.push(cont);
            t = tnew;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            sol.ts.push(t);
            sol.ys.push(y.clone());
            h = if reject { hnew.min(h) } else { hnew };
            reject = false;
        } else {
            let fac11 = if err.is_finite() { err.powf(0.2 - 0.04 * 0.75) } else { 10.0 };
            h /= (fac11 / 0.9).min(10.0);
            reject = true;
        }
    }
    sol
}

fn eval_cont(c: &[Vec<f64>; 5], s: f64) -> Vec<f64> {
    let s1 = 1.0 - s;
    (0..c[0].len())
        .map(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
        .collect()
}

impl Solution {
    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn y_end(&self) -> &[f64] {
        self.ys.last().unwrap()
    }

    pub fn reached(&self) -> bool {
        self.termination == Termination::Reached
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let n = self.ts.len();
        if n < 2 {
            return if (t - self.ts[0]).abs() <= 1e-14 { Some(0) } else { None };
        }
        let forward = self.ts[n - 1] >= self.ts[0];
        let key = |s: f64| if forward { s } else { -s };
        let tk = key(t);
        let tol = 1e-12 * (1.0 + t.abs());
        if tk < key(self.ts[0]) - tol || tk > key(self.ts[n - 1]) + tol {
            return None;
        }
        let idx = self.ts.partition_point(|&s| key(s) <= tk);
        Some(idx.saturating_sub(1).min(n - 2))
    }

    /// Dense output at `t`, or `None` outside the integrated range.
    pub fn sample(&self, t: f64) -> Option<Vec<f64>> {
        let i = self.locate(t)?;
        if self.ts.len() < 2 {
            return Some(self.ys[0].clone());
        }
        let (ta, tb) = (self.ts[i], self.ts[i + 1]);
        let s = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        Some(eval_cont(&self.cont[i], s))
    }

    /// Parameters where `g` changes sign along the solution, refined on the dense output.
    pub fn sign_changes<G: Fn(f64, &[f64]) -> f64>(&self, g: G, tol: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.cont.len() {
            let (ta, tb) = (self.ts[i], self.ts[i + 1]);
            let sub = 8;
            let mut prev_t = ta;
            let mut prev_g = g(ta, &self.ys[i]);
            for j in 1..=sub {
                let s = j as f64 / sub as f64;
                let tj = ta + s * (tb - ta);
                let yj = eval_cont(&self.cont[i], s);
                let gj = g(tj, &yj);
                if prev_g == 0.0 && (i > 0 || j > 1) {
                    // exact zero at a node: already recorded
                } else if prev_g * gj < 0.0 || (gj == 0.0 && prev_g != 0.0) {
                    let h = |t: f64| {
                        let s = (t - ta) / (tb - ta);
                        g(t, &eval_cont(&self.cont[i], s))
                    };
                    let (lo, hi) = if prev_t < tj { (prev_t, tj) } else { (tj, prev_t) };
                    if let Some(r) = brent(h, lo, hi, tol, 200) {
                        out.push(r);
                    }
                }
                prev_t = tj;
                prev_g = gj;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        let sol = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[0.0, 1.0],
            10.0,
            &OdeOptions::default(),
            |_, _| false,
        );
        assert!(sol.reached());
        assert!((sol.y_end()[0] - 10f64.sin()).abs() < 1e-10);
        for k in 0..200 {
            let t = 0.05 * k as f64 + 0.0123;
            let y = sol.sample(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-9, "t={t}");
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
        let zeros = sol.sign_changes(|_, y| y[0], 1e-13);
        assert_eq!(zeros.len(), 3);
        for (k, z) in zeros.iter().enumerate() {
            assert!((z - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-10);
        }
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(|_, y, dy| dy[0] = y[0], 1.0, &[1.0], -2.0, &OdeOptions::default(), |_, _| false);
        assert!((sol.y_end()[0] - (-3f64).exp()).abs() < 1e-12);
        let y = sol.sample(0.0).unwrap();
        assert!((y[0] - (-1f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn stop_predicate_locates_exit() {
        let sol = integrate(|_, _, dy| dy[0] = 1.0, 0.0, &[0.0], 5.0, &OdeOptions::default(), |_, y| y[0] > 2.5);
        match sol.termination {
            Termination::Stopped { t } => assert!((t - 2.5).abs() < 1e-10),
            ref other => panic!("{other:?}"),
        }
        assert!(sol.t_end() <= 2.5);
    }
}
