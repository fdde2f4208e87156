//! Dormand–Prince 5(4) integrator with PI step-size control.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// The controller gives up once the step falls below this.
    pub min_step: f64,
    /// Upper bound on the step, so that narrow features of the right-hand
    /// side cannot be stepped over.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            min_step: 1e-14,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl OdeStats {
    pub fn merge(self, other: OdeStats) -> OdeStats {
        OdeStats {
            accepted: self.accepted + other.accepted,
            rejected: self.rejected + other.rejected,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1` and returns `y(t1)`.
pub fn integrate<T, F>(mut f: F, t0: T, t1: T, y0: &[T], cfg: &OdeConfig) -> Result<(Vec<T>, OdeStats)>
where
    T: Scalar,
    F: FnMut(T, &[T]) -> Vec<T>,
{
    let mut stats = OdeStats::default();
    let n = y0.len();
    let span = t1 - t0;
    if span == T::zero() || n == 0 {
        return Ok((y0.to_vec(), stats));
    }
    let dir = span.signum();
    let rtol = T::lit(cfg.rel_tol).max(T::ODE_TOL_FLOOR);
    let atol = T::lit(cfg.abs_tol);
    let min_step = T::lit(cfg.min_step);
    let max_step = T::lit(cfg.max_step);
    let scale = |a: &[T], b: &[T], i: usize| atol + rtol * a[i].abs().max(b[i].abs());
    let norm = |v: &[T], a: &[T], b: &[T]| -> T {
        let s = (0..n).fold(T::zero(), |s, i| {
            let r = v[i] / scale(a, b, i);
            s + r * r
        });
        (s / T::lit(n as f64)).sqrt()
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k0 = f(t, &y);
    stats.evaluations += 1;
    if k0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { at: t.as_f64() });
    }

    // starting step after Hairer, Nørsett & Wanner
    let mut h = {
        let d0 = norm(&y, &y, &y);
        let d1 = norm(&k0, &y, &y);
        let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        let h0 = h0.min(span.abs());
        let y1: Vec<T> = (0..n).map(|i| y[i] + dir * h0 * k0[i]).collect();
        let k1 = f(t + dir * h0, &y1);
        stats.evaluations += 1;
        let diff: Vec<T> = (0..n).map(|i| k1[i] - k0[i]).collect();
        let d2 = norm(&diff, &y, &y) / h0;
        let m = d1.max(d2);
        let h1 = if m <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / m).powf(T::lit(0.2))
        };
        (T::lit(100.0) * h0).min(h1).min(span.abs()).min(max_step)
    };

    let safety = T::lit(0.9);
    let (alpha, beta) = (T::lit(0.7 / 5.0), T::lit(0.4 / 5.0));
    let mut err_prev = T::lit(1e-4);
    let mut k = vec![vec![T::zero(); n]; 7];
    let mut stage = vec![T::zero(); n];

    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= T::zero() {
            break;
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(Error::StepUnderflow { at: t.as_f64() });
        }
        let mut last = false;
        if h >= remaining {
            h = remaining;
            last = true;
        }
        if h < min_step && !last {
            return Err(Error::StepUnderflow { at: t.as_f64() });
        }
        let hs = h * dir;
        k[0].clone_from(&k0);
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (r, kr) in k.iter().enumerate().take(s) {
                    let a = A[s][r];
                    if a != 0.0 {
                        acc = acc + hs * T::lit(a) * kr[i];
                    }
                }
                stage[i] = acc;
            }
            k[s] = f(t + hs * T::lit(C[s]), &stage);
            stats.evaluations += 1;
        }
        // stage 6 was evaluated at the fifth-order solution (FSAL)
        let y_new = stage.clone();
        let err: Vec<T> = (0..n)
            .map(|i| hs * (0..7).fold(T::zero(), |s, r| s + T::lit(E[r]) * k[r][i]))
            .collect();
        let en = norm(&err, &y, &y_new);
        if !en.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            if h <= min_step {
                return Err(Error::NonFiniteState { at: t.as_f64() });
            }
            stats.rejected += 1;
            h = h * T::lit(0.25);
            continue;
        }
        if en <= T::one() {
            t = if last { t1 } else { t + hs };
            y = y_new;
            k0 = k[6].clone();
            stats.accepted += 1;
            let en_c = en.max(T::lit(1e-10));
            let fac = (safety * en_c.powf(-alpha) * err_prev.powf(beta))
                .max(T::lit(0.2))
                .min(T::lit(5.0));
            err_prev = en_c;
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            let fac = (safety * en.powf(-T::lit(0.2))).max(T::lit(0.2));
            h = h * fac;
        }
    }
    Ok((y, stats))
}
