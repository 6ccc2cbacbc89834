//! Independent reference computations.
//!
//! Each routine here reaches a quantity by a route that shares no code path
//! with the production solver it is compared against: shooting instead of a
//! boundary value solve, a Fredholm determinant instead of Painleve tails,
//! brute-force lattice sums instead of orthogonal polynomial norms, and
//! Hankel moment matrices in quad precision instead of the Stieltjes sweep.

use std::num::NonZeroUsize;

use f128::f128;
use gauss_quad::{GaussHermite, GaussLegendre};
use nalgebra::DMatrix;
use num_traits::{Float, ToPrimitive};

use crate::airy::airy;
use crate::error::{Error, Result};
use crate::watermelon::Wall;

const SHOOT_START: f64 = 14.0;
const SHOOT_END: f64 = -9.0;
const SHOOT_STEP: f64 = 5e-4;

enum Fate {
    Blowup,
    Crossing,
    Survived,
}

fn shoot(k: f64, record: &[f64], out: &mut [(f64, f64)]) -> Fate {
    let (a, ap) = airy(SHOOT_START).expect("start inside Airy range");
    let f = |s: f64, q: f64| s * q + 2.0 * q * q * q;
    let (mut s, mut q, mut p) = (SHOOT_START, k * a, k * ap);
    let steps = ((SHOOT_START - SHOOT_END) / SHOOT_STEP).round() as usize;
    let h = -SHOOT_STEP;
    for i in 0..steps {
        for (j, &t) in record.iter().enumerate() {
            if (s - t).abs() < 0.5 * SHOOT_STEP {
                out[j] = (q, p);
            }
        }
        let k1q = p;
        let k1p = f(s, q);
        let k2q = p + 0.5 * h * k1p;
        let k2p = f(s + 0.5 * h, q + 0.5 * h * k1q);
        let k3q = p + 0.5 * h * k2p;
        let k3p = f(s + 0.5 * h, q + 0.5 * h * k2q);
        let k4q = p + h * k3p;
        let k4p = f(s + h, q + h * k3q);
        q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        s = SHOOT_START + (i + 1) as f64 * h;
        if q.abs() > 10.0 {
            return Fate::Blowup;
        }
        if q < 0.0 {
            return Fate::Crossing;
        }
    }
    Fate::Survived
}

/// `(q, q')` of the Hastings-McLeod solution at the given points by shooting.
///
/// Starts from `k (Ai, Ai')` at `s = 14`, integrates leftwards with RK4 and
/// bisects on `k` between solutions that blow up and solutions that cross
/// zero. Points must lie on the step grid and in `[-6, 14)`.
pub fn hastings_mcleod_shooting(points: &[f64]) -> Result<Vec<(f64, f64)>> {
    for &t in points {
        let on_grid = ((SHOOT_START - t) / SHOOT_STEP - ((SHOOT_START - t) / SHOOT_STEP).round()).abs() < 1e-6;
        if !(-6.0..SHOOT_START).contains(&t) || !on_grid {
            return Err(Error::InvalidParameter(format!("shooting point {t} not on the step grid")));
        }
    }
    let (mut lo, mut hi) = (0.5, 1.5);
    let mut out_lo = vec![(f64::NAN, f64::NAN); points.len()];
    let mut out_hi = out_lo.clone();
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let mut out = vec![(f64::NAN, f64::NAN); points.len()];
        match shoot(mid, points, &mut out) {
            Fate::Blowup => {
                hi = mid;
                out_hi = out;
            }
            Fate::Crossing | Fate::Survived => {
                lo = mid;
                out_lo = out;
            }
        }
    }
    Ok(out_lo
        .iter()
        .zip(&out_hi)
        .map(|(a, b)| (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1)))
        .collect())
}

/// `det(I - K_Ai)` on `L^2(x, inf)` by Gauss-Legendre Nystrom discretisation.
pub fn airy_kernel_determinant(x: f64) -> Result<f64> {
    airy_kernel_determinant_with(x, 16.0, 90)
}

pub fn airy_kernel_determinant_with(x: f64, length: f64, nodes: usize) -> Result<f64> {
    let rule = GaussLegendre::new(NonZeroUsize::new(nodes).ok_or_else(|| Error::InvalidParameter("zero nodes".into()))?);
    let (a, b) = (x, x + length);
    let pts: Vec<(f64, f64)> = rule
        .iter()
        .map(|(t, w)| (0.5 * (b - a) * t + 0.5 * (b + a), 0.5 * (b - a) * w))
        .collect();
    let mut ai = Vec::with_capacity(nodes);
    for &(u, _) in &pts {
        ai.push(airy(u)?);
    }
    let m = DMatrix::from_fn(nodes, nodes, |i, j| {
        let (u, wu) = pts[i];
        let (v, wv) = pts[j];
        let (au, apu) = ai[i];
        let (av, apv) = ai[j];
        let k = if i == j {
            apu * apu - u * au * au
        } else {
            (au * apv - apu * av) / (u - v)
        };
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - wu.sqrt() * k * wv.sqrt()
    });
    Ok(m.determinant())
}

/// The defining lattice sum of the height distribution for `N <= 3`.
pub fn watermelon_brute_force(n: usize, m: f64, wall: Wall) -> Result<f64> {
    if !(1..=3).contains(&n) || m <= 0.0 {
        return Err(Error::InvalidParameter(format!("brute force needs 1 <= N <= 3 and M > 0, got N={n}, M={m}")));
    }
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    let c = pi * pi / (2.0 * m * m);
    let (shift, pi_pow, m_pow, fact_off) = match wall {
        Wall::Absorbing => (0.0, 2.0 * nf * nf + nf / 2.0, nf * (2.0 * nf + 1.0), 1),
        Wall::Reflecting => (0.5, 2.0 * nf * nf - 1.5 * nf, nf * (2.0 * nf - 1.0), 0),
    };
    let mut log_pref = -nf / 2.0 * 2f64.ln() + pi_pow * pi.ln() - m_pow * m.ln() - libm::lgamma(nf + 1.0);
    for k in 0..n {
        log_pref -= libm::lgamma((2 * k + fact_off + 1) as f64);
    }
    let cut = ((60.0 + 4.0 * nf * nf) / c).sqrt().ceil() as i64 + 2;
    let axis: Vec<f64> = (-cut..=cut).map(|j| j as f64 - shift).collect();
    let weight = |x: f64| match wall {
        Wall::Absorbing => x * x * (-c * x * x).exp(),
        Wall::Reflecting => (-c * x * x).exp(),
    };
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    'outer: loop {
        let xs: Vec<f64> = idx.iter().map(|&i| axis[i]).collect();
        let mut term: f64 = xs.iter().map(|&x| weight(x)).product();
        for i in 0..n {
            for j in i + 1..n {
                let d = xs[i] * xs[i] - xs[j] * xs[j];
                term *= d * d;
            }
        }
        total += term;
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < axis.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok((log_pref + total.ln()).exp())
}

/// Log norms `ln h_k`, `k <= kmax`, of monic polynomials orthogonal on a
/// weighted point set, from the Cholesky factor of the Hankel moment matrix in
/// quad precision.
pub fn hankel_log_norms(nodes: &[f64], weights: &[f64], kmax: usize) -> Result<Vec<f64>> {
    let dim = kmax + 1;
    let mut moments = vec![f128::from(0.0); 2 * dim];
    for (&x, &w) in nodes.iter().zip(weights) {
        let xq = f128::from(x);
        let mut p = f128::from(w);
        for mo in moments.iter_mut() {
            *mo = *mo + p;
            p = p * xq;
        }
    }
    let mut l = vec![vec![f128::from(0.0); dim]; dim];
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim {
        for j in 0..=i {
            let mut s = moments[i + j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if s <= f128::from(0.0) {
                    return Err(Error::RecurrenceBreakdown { degree: i, value: s.to_f64().unwrap_or(f64::NAN) });
                }
                l[i][i] = s.sqrt();
                out.push(s.ln().to_f64().unwrap_or(f64::NAN));
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(out)
}

/// `ln Z_n` for `Z_n = int_{R^n} Delta(x)^2 exp(-|x|^2) dx` by a tensor
/// Gauss-Hermite rule, exact for `n <= 3`.
pub fn gue_log_partition_quadrature(n: usize) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::InvalidParameter(format!("quadrature oracle needs 1 <= n <= 3, got {n}")));
    }
    let rule = GaussHermite::new(NonZeroUsize::new(8).unwrap());
    let pairs: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    'outer: loop {
        let mut term = 1.0;
        for i in 0..n {
            term *= pairs[idx[i]].1;
            for j in i + 1..n {
                let d = pairs[idx[i]].0 - pairs[idx[j]].0;
                term *= d * d;
            }
        }
        total += term;
        for d in 0..n {
            idx[d] += 1;
            if idx[d] < pairs.len() {
                continue 'outer;
            }
            idx[d] = 0;
        }
        break;
    }
    Ok(total.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shooting_tracks_airy_on_the_right() {
        let v = hastings_mcleod_shooting(&[6.0]).unwrap();
        let (a, _) = airy(6.0).unwrap();
        assert!((v[0].0 / a - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fredholm_is_near_one_far_right_and_small_far_left() {
        assert!((airy_kernel_determinant(6.0).unwrap() - 1.0).abs() < 1e-8);
        assert!(airy_kernel_determinant(-6.0).unwrap() < 1e-5);
    }

    #[test]
    fn fredholm_stable_under_refinement() {
        for x in [-3.0, -1.0, 1.0] {
            let a = airy_kernel_determinant_with(x, 16.0, 90).unwrap();
            let b = airy_kernel_determinant_with(x, 18.0, 120).unwrap();
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gue_quadrature_small_cases() {
        let pi = std::f64::consts::PI;
        assert!((gue_log_partition_quadrature(1).unwrap() - pi.sqrt().ln()).abs() < 1e-14);
        assert!((gue_log_partition_quadrature(2).unwrap() - pi.ln()).abs() < 1e-14);
    }

    #[test]
    fn hankel_norms_for_two_points() {
        // Points +-1 with unit weights: h_0 = 2, P_1 = x, h_1 = 2.
        let v = hankel_log_norms(&[-1.0, 1.0], &[1.0, 1.0], 1).unwrap();
        assert!((v[0] - 2f64.ln()).abs() < 1e-15 && (v[1] - 2f64.ln()).abs() < 1e-15);
    }
}
