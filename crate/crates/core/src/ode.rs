//! Adaptive Dormand-Prince 5(4) integrator for small real systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-12, atol: 1e-13 }
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
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1`, calling `visit` at every
/// accepted step including the start. `h_max(t)` caps the step size.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    h_max: impl Fn(f64) -> f64,
    mut visit: impl FnMut(f64, &[f64; N]),
) -> Result<[f64; N]> {
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let (mut t, mut y) = (t0, y0);
    visit(t, &y);
    if t0 == t1 {
        return Ok(y);
    }
    let mut h = h_max(t).min((t1 - t0).abs()) * 0.1;
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y);
    loop {
        let remaining = (t1 - t).abs();
        if remaining <= 1e-14 * (1.0 + t1.abs()) {
            return Ok(y);
        }
        h = h.min(h_max(t)).min(remaining);
        if h < 1e-13 * (1.0 + t.abs()) {
            return Err(Error::StepUnderflow { at: t, step: h });
        }
        let hs = dir * h;
        for s in 1..7 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    for d in 0..N {
                        yi[d] += hs * A[s][j] * kj[d];
                    }
                }
            }
            k[s] = f(t + C[s] * hs, &yi);
        }
        let mut y5 = y;
        let mut err = 0.0f64;
        for d in 0..N {
            let mut s5 = 0.0;
            let mut s4 = 0.0;
            for s in 0..7 {
                s5 += B5[s] * k[s][d];
                s4 += B4[s] * k[s][d];
            }
            y5[d] += hs * s5;
            let scale = tol.atol + tol.rtol * y[d].abs().max(y5[d].abs());
            err = err.max((hs * (s5 - s4)).abs() / scale);
        }
        if err <= 1.0 {
            t = if h == remaining { t1 } else { t + hs };
            y = y5;
            k[0] = k[6];
            visit(t, &y);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let tau = 2.0 * std::f64::consts::PI;
        let y = dopri5(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], tau, Tolerances::default(), |_| 0.1, |_, _| {})
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11 && y[1].abs() < 1e-11);
    }

    #[test]
    fn integrates_backwards() {
        let y = dopri5(|_, y: &[f64; 1]| [y[0]], 1.0, [1.0f64.exp()], 0.0, Tolerances::default(), |_| 0.5, |_, _| {})
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn visits_every_accepted_step_in_order() {
        let mut ts = Vec::new();
        dopri5(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 2.0, Tolerances::default(), |_| 0.05, |t, _| ts.push(t)).unwrap();
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 2.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-15));
    }
}
