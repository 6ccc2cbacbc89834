//! Distribution of the maximal height of `N` nonintersecting Brownian
//! excursions (absorbing wall) or reflected bridges (reflecting wall).
//!
//! `P(max < M)` is a prefactor times a product of normalising constants of
//! polynomials orthogonal on the integer (absorbing) or half-integer
//! (reflecting) lattice with weight `exp(-pi^2 x^2 / (2 M^2))`. Everything
//! is assembled in log form.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;

use crate::dgop::{LatticeSpec, OrthoSystem, Precision, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::painleve::{PainleveGrid, Which};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wall {
    Absorbing,
    Reflecting,
}

impl Wall {
    pub fn alpha(self) -> f64 {
        match self {
            Wall::Absorbing => 0.0,
            Wall::Reflecting => 0.5,
        }
    }

    /// Degree of the `k`-th norm entering the product.
    fn degree(self, k: usize) -> usize {
        match self {
            Wall::Absorbing => 2 * k + 1,
            Wall::Reflecting => 2 * k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Wall::Absorbing => "absorbing",
            Wall::Reflecting => "reflecting",
        }
    }
}

impl std::str::FromStr for Wall {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "absorbing" => Ok(Wall::Absorbing),
            "reflecting" => Ok(Wall::Reflecting),
            _ => Err(Error::InvalidParameter(format!("unknown wall '{s}'"))),
        }
    }
}

/// `log P` together with an estimate of its rounding error.
#[derive(Clone, Copy, Debug)]
pub struct LogProbability {
    pub log_p: f64,
    pub abs_err: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct HeightValue {
    pub m: f64,
    pub cdf: f64,
    /// Set when the assembled value fell outside `[0, 1]` and was clamped.
    pub clamped: bool,
}

#[derive(Clone, Debug)]
pub struct HeightDistribution {
    pub n: usize,
    pub wall: Wall,
    pub m_values: Vec<f64>,
    pub cdf: Vec<f64>,
    pub k_values: Option<Vec<f64>>,
}

fn log_prefactor(n: usize, m: f64, wall: Wall) -> (f64, f64) {
    let nf = n as f64;
    let (pi_pow, m_pow) = match wall {
        Wall::Absorbing => (2.0 * nf * nf + nf / 2.0, nf * (2.0 * nf + 1.0)),
        Wall::Reflecting => (2.0 * nf * nf - 1.5 * nf, nf * (2.0 * nf - 1.0)),
    };
    let mut v = -nf / 2.0 * LN_2 + pi_pow * PI.ln() - m_pow * m.ln();
    let mut mag = v.abs() + (pi_pow * PI.ln()).abs() + (m_pow * m.ln()).abs();
    for k in 0..n {
        let g = libm::lgamma(wall.degree(k) as f64 + 1.0);
        v -= g;
        mag += g.abs();
    }
    (v, mag)
}

fn system_for(n: usize, m: f64, wall: Wall, k_max: usize, precision: Precision) -> Result<OrthoSystem> {
    if n == 0 || !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidParameter(format!("need N >= 1 and M > 0, got N={n}, M={m}")));
    }
    let spec = LatticeSpec { n: 1, alpha: wall.alpha(), tail_tol: DEFAULT_TAIL_TOL };
    OrthoSystem::build(spec, 1.0 / (m * m), k_max, precision)
}

/// `log P(max < M)` from the product of lattice norms.
pub fn height_log_cdf(n: usize, m: f64, wall: Wall, precision: Precision) -> Result<LogProbability> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let sys = system_for(n, m, wall, wall.degree(n - 1), precision)?;
    let (pref, mut mag) = log_prefactor(n, m, wall);
    let mut log_p = pref;
    for k in 0..n {
        let lh = sys.log_h[wall.degree(k)];
        log_p += lh;
        mag += lh.abs();
    }
    Ok(LogProbability { log_p, abs_err: 8.0 * f64::EPSILON * mag })
}

/// `P(max < M)` clamped to `[0, 1]`.
pub fn height_cdf(n: usize, m: f64, wall: Wall) -> Result<HeightValue> {
    let lp = height_log_cdf(n, m, wall, Precision::Standard)?;
    let raw = lp.log_p.exp();
    Ok(HeightValue { m, cdf: raw.clamp(0.0, 1.0), clamped: !(0.0..=1.0).contains(&raw) })
}

/// Barrier height for the edge-scaled coordinate `k`.
pub fn rescaled_m(n: usize, k: f64) -> f64 {
    (2.0 * n as f64).sqrt() + k * 2f64.powf(-11.0 / 6.0) * (n as f64).powf(-1.0 / 6.0)
}

pub fn rescaled_cdf(n: usize, k: f64, wall: Wall) -> Result<f64> {
    let m = rescaled_m(n, k);
    if !(m > 0.0) {
        return Err(Error::InvalidParameter(format!("rescaled barrier M={m} not positive")));
    }
    height_cdf(n, m, wall).map(|v| v.cdf)
}

/// Tabulates the CDF over sorted barrier heights.
pub fn height_distribution(n: usize, wall: Wall, m_values: &[f64]) -> Result<HeightDistribution> {
    let cdf = m_values.par_iter().map(|&m| height_cdf(n, m, wall).map(|v| v.cdf)).collect::<Result<Vec<_>>>()?;
    Ok(HeightDistribution { n, wall, m_values: m_values.to_vec(), cdf, k_values: None })
}

/// Tabulates the CDF over an edge-scaled grid.
pub fn rescaled_distribution(n: usize, wall: Wall, k_values: &[f64]) -> Result<HeightDistribution> {
    let m_values: Vec<f64> = k_values.iter().map(|&k| rescaled_m(n, k)).collect();
    let mut d = height_distribution(n, wall, &m_values)?;
    d.k_values = Some(k_values.to_vec());
    Ok(d)
}

/// The default edge grid: 101 points on `[-6, 4]`.
pub fn default_k_grid() -> Vec<f64> {
    (0..=100).map(|i| -6.0 + 0.1 * i as f64).collect()
}

/// `(N, d_N)` with `d_N = max_k |P_N(k) - F_1(k)|`.
pub fn convergence_study(n_list: &[usize], k_grid: &[f64], wall: Wall, painleve: &PainleveGrid) -> Result<Vec<(usize, f64)>> {
    let f1: Vec<f64> = k_grid.iter().map(|&k| painleve.tracy_widom(k, Which::F1)).collect::<Result<_>>()?;
    n_list
        .iter()
        .map(|&n| {
            let d = rescaled_distribution(n, wall, k_grid)?;
            let worst = d.cdf.iter().zip(&f1).map(|(p, f)| (p - f).abs()).fold(0.0, f64::max);
            Ok((n, worst))
        })
        .collect()
}

/// `(1 - P) / (a^2 / N^2)` at `M = sqrt(2N / a)` for each `a`.
pub fn small_a_check(n: usize, a_list: &[f64]) -> Result<Vec<f64>> {
    a_list
        .iter()
        .map(|&a| {
            if !(a > 0.0) {
                return Err(Error::InvalidParameter(format!("a={a} must be positive")));
            }
            let m = (2.0 * n as f64 / a).sqrt();
            let lp = height_log_cdf(n, m, Wall::Absorbing, Precision::Standard)?;
            let one_minus = -lp.log_p.exp_m1();
            if one_minus.abs() < 1e-15 || one_minus.abs() <= lp.abs_err {
                return Err(Error::IndistinguishableFromLimit { a, value: one_minus });
            }
            Ok(one_minus / (a * a / (n * n) as f64))
        })
        .collect()
}

/// `1 - P(max < M)` for a single excursion from the Jacobi-transformed
/// theta series, usable far into the regime where `1 - P` underflows the
/// direct route.
pub fn single_excursion_tail(m: f64) -> f64 {
    // P(max < M) = sum_k (1 - 4 k^2 M^2) exp(-2 k^2 M^2) over all integers k.
    let mut tail = 0.0;
    for k in 1..50 {
        let k2m2 = (k * k) as f64 * m * m;
        let term = 2.0 * (4.0 * k2m2 - 1.0) * (-2.0 * k2m2).exp();
        tail += term;
        if term.abs() < 1e-300 {
            break;
        }
    }
    tail
}

#[derive(Clone, Copy, Debug)]
pub struct DeformationResult {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// Second `a`-difference of `ln prod h` against the norm-ratio right-hand
/// side, with `M = sqrt(2N / a)`.
pub fn deformation_identity_check(n: usize, a: f64, delta: f64, wall: Wall) -> Result<DeformationResult> {
    if !(a - delta > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!("need N >= 1 and a - delta > 0 (a={a}, delta={delta})")));
    }
    let top = wall.degree(n);
    let build = |aa: f64| system_for(n, (2.0 * n as f64 / aa).sqrt(), wall, top, Precision::Standard);
    let sum = |s: &OrthoSystem| (0..n).map(|k| s.log_h[wall.degree(k)]).sum::<f64>();
    let (lo, mid, hi) = (build(a - delta)?, build(a)?, build(a + delta)?);
    let lhs = (sum(&hi) - 2.0 * sum(&mid) + sum(&lo)) / (delta * delta);
    let c = PI * PI / (4.0 * n as f64);
    let rhs = c * c * (mid.log_h[top] - mid.log_h[top - 2]).exp();
    Ok(DeformationResult { lhs, rhs, defect: (lhs - rhs).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ensemble {
    /// `Delta(x^2)^2 prod x^2 exp(-|x|^2)` on the positive half-lattice.
    Lue,
    /// `Delta(x)^2 exp(-|x|^2)` on the full lattice.
    Gue,
}

/// Exact integral of the ensemble integrand over its domain.
pub fn ensemble_integral(n: usize, ensemble: Ensemble) -> f64 {
    let mut log_z = libm::lgamma(n as f64 + 1.0);
    for j in 0..n {
        let jf = j as f64;
        log_z += match ensemble {
            Ensemble::Lue => libm::lgamma(jf + 1.0) + libm::lgamma(jf + 1.5) - LN_2,
            Ensemble::Gue => 0.5 * PI.ln() + libm::lgamma(jf + 1.0) - jf * LN_2,
        };
    }
    log_z.exp()
}

fn integrand(xs: &[f64], ensemble: Ensemble) -> f64 {
    let mut v: f64 = xs.iter().map(|&x| (-x * x).exp()).product();
    for i in 0..xs.len() {
        if ensemble == Ensemble::Lue {
            v *= xs[i] * xs[i];
        }
        for j in i + 1..xs.len() {
            let d = match ensemble {
                Ensemble::Lue => xs[i] * xs[i] - xs[j] * xs[j],
                Ensemble::Gue => xs[i] - xs[j],
            };
            v *= d * d;
        }
    }
    v
}

fn lattice_sum(n: usize, eps: f64, ensemble: Ensemble, weight: impl Fn(&[f64]) -> f64) -> f64 {
    let cut = (40.0f64.sqrt() + 3.0 * n as f64) / eps;
    let kmax = cut.ceil() as i64;
    let lo = match ensemble {
        Ensemble::Lue => 0,
        Ensemble::Gue => -kmax,
    };
    let mut idx = vec![lo; n];
    let mut xs = vec![0.0; n];
    let mut total = 0.0;
    'outer: loop {
        for (x, &i) in xs.iter_mut().zip(&idx) {
            *x = i as f64 * eps;
        }
        total += weight(&xs);
        for d in 0..n {
            idx[d] += 1;
            if idx[d] <= kmax {
                continue 'outer;
            }
            idx[d] = lo;
        }
        break;
    }
    total * eps.powi(n as i32)
}

/// `eps^N sum f` over the `eps`-lattice.
pub fn riemann_sum(n: usize, eps: f64, ensemble: Ensemble) -> f64 {
    lattice_sum(n, eps, ensemble, |xs| integrand(xs, ensemble))
}

/// `eps^N sum (sum x) f` for the full-lattice integrand; zero by symmetry.
pub fn first_moment_sum(n: usize, eps: f64) -> f64 {
    lattice_sum(n, eps, Ensemble::Gue, |xs| xs.iter().sum::<f64>() * integrand(xs, Ensemble::Gue))
}

#[derive(Clone, Debug)]
pub struct OrderFit {
    pub errors: Vec<f64>,
    pub slope: f64,
}

/// Least-squares slope of `log |error|` against `log eps`.
pub fn riemann_sum_order(n: usize, eps_list: &[f64], ensemble: Ensemble) -> Result<OrderFit> {
    if !(1..=3).contains(&n) || eps_list.len() < 3 {
        return Err(Error::InvalidParameter("need 1 <= N <= 3 and at least three step sizes".into()));
    }
    let exact = ensemble_integral(n, ensemble);
    let mut errors = Vec::new();
    for &eps in eps_list {
        let err = (riemann_sum(n, eps, ensemble) - exact).abs();
        if err < 1e-14 * exact.max(1.0) {
            return Err(Error::ErrorBelowFloor { error: err, floor: 1e-14 });
        }
        errors.push(err);
    }
    let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(OrderFit { errors, slope: sxy / sxx })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centering() {
        assert_eq!(rescaled_m(16, 0.0), 32f64.sqrt());
    }

    #[test]
    fn exact_integrals_small_cases() {
        assert!((ensemble_integral(1, Ensemble::Lue) - PI.sqrt() / 4.0).abs() < 1e-15);
        assert!((ensemble_integral(2, Ensemble::Lue) - 3.0 * PI / 16.0).abs() < 1e-14);
        assert!((ensemble_integral(2, Ensemble::Gue) - PI).abs() < 1e-14);
    }

    #[test]
    fn cdf_in_unit_interval_and_monotone() {
        let ms = [1.0, 1.5, 2.0, 3.0, 5.0, 8.0];
        for wall in [Wall::Absorbing, Wall::Reflecting] {
            let d = height_distribution(3, wall, &ms).unwrap();
            assert!(d.cdf.iter().all(|p| (0.0..=1.0).contains(p)));
            assert!(d.cdf.windows(2).all(|w| w[1] >= w[0]));
        }
    }
}
