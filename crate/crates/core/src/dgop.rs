//! Discrete Gaussian orthogonal polynomials on the lattice `(Z - alpha)/n`
//! with weight `exp(-n pi^2 a x^2 / 2) / n`.
//!
//! Recurrence coefficients come from the Stieltjes procedure carried out on
//! orthonormal, weight-folded vectors `phi_k(x) = p_k(x) sqrt(w(x)/n)` over
//! the retained nodes. Each new vector is reorthogonalised against all
//! previous ones, which keeps the sweep stable when polynomial zeros lock
//! onto lattice points. Normalising constants are kept as logarithms.

use std::fmt::Write as _;

use f128::f128;
use num_traits::{Float, FromPrimitive};

use crate::error::{Error, Result};

/// Window certification threshold on every `log h_k`.
pub const WINDOW_CERT_TOL: f64 = 1e-12;
/// Default relative weight cutoff used to size the initial window.
pub const DEFAULT_TAIL_TOL: f64 = 1e-30;
const MAX_DOUBLINGS: usize = 10;
const MAX_NODES: usize = 400_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub n: usize,
    pub alpha: f64,
    pub tail_tol: f64,
}

impl LatticeSpec {
    pub fn new(n: usize, alpha: f64) -> Self {
        LatticeSpec { n, alpha, tail_tol: DEFAULT_TAIL_TOL }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianWeight {
    pub a: f64,
    pub n: usize,
}

impl GaussianWeight {
    pub fn eval(&self, x: f64) -> f64 {
        (-(self.n as f64) * std::f64::consts::PI.powi(2) * self.a * x * x / 2.0).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Standard,
    /// 113-bit significand arithmetic.
    Extended,
}

/// Retained lattice nodes and their weights `w(x)/n`.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub window: f64,
    pub indices: Vec<i64>,
    pub nodes: Vec<f64>,
    pub node_weights: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct OrthoSystem {
    pub spec: LatticeSpec,
    pub weight: GaussianWeight,
    pub k_max: usize,
    pub precision: Precision,
    pub log_h: Vec<f64>,
    /// `A_0 .. A_{k_max}`.
    pub a_coef: Vec<f64>,
    /// `B_0 .. B_{k_max}` with `B_0 = 0` as a placeholder.
    pub b_coef: Vec<f64>,
    pub lattice: Lattice,
    /// `phi_k` at the retained nodes, `k <= k_max`.
    pub basis: Vec<Vec<f64>>,
}

fn validate(spec: &LatticeSpec, weight: &GaussianWeight) -> Result<()> {
    if spec.n == 0 || weight.n != spec.n {
        return Err(Error::InvalidParameter(format!("mesh parameter n={} (weight n={})", spec.n, weight.n)));
    }
    if !(weight.a > 0.0) || !weight.a.is_finite() {
        return Err(Error::InvalidParameter(format!("weight parameter a={} must be positive", weight.a)));
    }
    if !(-0.5..=0.5).contains(&spec.alpha) {
        return Err(Error::InvalidParameter(format!("alpha={} outside [-1/2, 1/2]", spec.alpha)));
    }
    if !(spec.tail_tol > 0.0 && spec.tail_tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tail_tol={} outside (0, 1)", spec.tail_tol)));
    }
    Ok(())
}

/// Initial half-width of the truncation window.
pub fn initial_window(spec: &LatticeSpec, weight: &GaussianWeight, k_max: usize) -> f64 {
    let pi = std::f64::consts::PI;
    (2.0 * (k_max as f64 + (1.0 / spec.tail_tol).ln()) / (spec.n as f64 * weight.a)).sqrt() / pi
}

fn lattice_in_window(spec: &LatticeSpec, weight: &GaussianWeight, window: f64) -> Lattice {
    let n = spec.n as f64;
    let lo = (spec.alpha - n * window).ceil() as i64;
    let hi = (spec.alpha + n * window).floor() as i64;
    let indices: Vec<i64> = (lo..=hi).collect();
    let nodes: Vec<f64> = indices.iter().map(|&j| (j as f64 - spec.alpha) / n).collect();
    let node_weights = nodes.iter().map(|&x| weight.eval(x) / n).collect();
    Lattice { window, indices, nodes, node_weights }
}

struct Raw {
    log_h: Vec<f64>,
    a_coef: Vec<f64>,
    b_coef: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

fn stieltjes_generic<T: Float + FromPrimitive>(
    spec: &LatticeSpec,
    weight: &GaussianWeight,
    lattice: &Lattice,
    k_max: usize,
) -> Result<Raw> {
    let c = |v: f64| T::from_f64(v).expect("representable");
    let to = |v: T| v.to_f64().unwrap_or(f64::NAN);
    let pi = T::one().atan() * c(4.0);
    let n = c(spec.n as f64);
    let alpha = c(spec.alpha);
    let coeff = n * pi * pi * c(weight.a) / c(2.0);
    let xs: Vec<T> = lattice.indices.iter().map(|&j| (c(j as f64) - alpha) / n).collect();
    let inv_sqrt_n = n.sqrt().recip();
    let sw: Vec<T> = xs.iter().map(|&x| (-coeff * x * x / c(2.0)).exp() * inv_sqrt_n).collect();
    let edge = c(2.0 / std::f64::consts::PI / weight.a.sqrt());
    if xs.iter().zip(&sw).any(|(&x, &s)| x.abs() <= edge && s < T::min_positive_value()) {
        return Err(Error::InvalidParameter(format!(
            "weight underflows inside the support for n={} a={}; use extended precision",
            spec.n, weight.a
        )));
    }
    let m = xs.len();
    if m < k_max + 1 {
        return Err(Error::RecurrenceBreakdown { degree: m, value: 0.0 });
    }
    let h0 = sw.iter().fold(T::zero(), |acc, &s| acc + s * s);
    let mut phis: Vec<Vec<T>> = Vec::with_capacity(k_max + 1);
    phis.push(sw.iter().map(|&s| s / h0.sqrt()).collect());
    let mut log_h = vec![to(h0.ln())];
    let mut log_h_t = h0.ln();
    let mut a_coef = Vec::with_capacity(k_max + 1);
    let mut b_coef = vec![0.0];
    let mut sqrt_b_prev = T::zero();
    for k in 0..=k_max {
        let phi = &phis[k];
        let a_k = xs.iter().zip(phi).fold(T::zero(), |acc, (&x, &p)| acc + x * p * p);
        a_coef.push(to(a_k));
        if k == k_max {
            break;
        }
        let mut v: Vec<T> = (0..m)
            .map(|i| {
                let mut t = (xs[i] - a_k) * phi[i];
                if k > 0 {
                    t = t - sqrt_b_prev * phis[k - 1][i];
                }
                t
            })
            .collect();
        for prev in phis.iter() {
            let dot = v.iter().zip(prev).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            for (vi, &pi_) in v.iter_mut().zip(prev) {
                *vi = *vi - dot * pi_;
            }
        }
        let b_next = v.iter().fold(T::zero(), |acc, &t| acc + t * t);
        if !(b_next > T::zero()) || !b_next.is_finite() {
            return Err(Error::RecurrenceBreakdown { degree: k + 1, value: to(b_next) });
        }
        let sb = b_next.sqrt();
        for t in v.iter_mut() {
            *t = *t / sb;
        }
        log_h_t = log_h_t + b_next.ln();
        log_h.push(to(log_h_t));
        b_coef.push(to(b_next));
        sqrt_b_prev = sb;
        phis.push(v);
    }
    let basis = phis.iter().map(|p| p.iter().map(|&t| to(t)).collect()).collect();
    Ok(Raw { log_h, a_coef, b_coef, basis })
}

/// Runs the Stieltjes sweep on a fixed lattice.
pub fn stieltjes(
    spec: &LatticeSpec,
    weight: &GaussianWeight,
    lattice: Lattice,
    k_max: usize,
    precision: Precision,
) -> Result<OrthoSystem> {
    validate(spec, weight)?;
    let raw = match precision {
        Precision::Standard => stieltjes_generic::<f64>(spec, weight, &lattice, k_max)?,
        Precision::Extended => stieltjes_generic::<f128>(spec, weight, &lattice, k_max)?,
    };
    Ok(OrthoSystem {
        spec: *spec,
        weight: *weight,
        k_max,
        precision,
        log_h: raw.log_h,
        a_coef: raw.a_coef,
        b_coef: raw.b_coef,
        lattice,
        basis: raw.basis,
    })
}

/// Returns the certified window's lattice together with the system built on it.
fn certified(spec: &LatticeSpec, weight: &GaussianWeight, k_max: usize, precision: Precision) -> Result<OrthoSystem> {
    validate(spec, weight)?;
    let mut window = initial_window(spec, weight, k_max);
    let mut current: Option<OrthoSystem> = None;
    for _ in 0..MAX_DOUBLINGS {
        let lat = lattice_in_window(spec, weight, window);
        if lat.nodes.len() > MAX_NODES {
            break;
        }
        if lat.nodes.len() < k_max + 10 {
            window *= 2.0;
            continue;
        }
        let sys = stieltjes(spec, weight, lat, k_max, precision)?;
        if let Some(prev) = current.take() {
            let moved = prev
                .log_h
                .iter()
                .zip(&sys.log_h)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if moved < WINDOW_CERT_TOL {
                return Ok(prev);
            }
        }
        current = Some(sys);
        window *= 2.0;
    }
    Err(Error::WindowNotCertified(format!(
        "n={} alpha={} a={} k_max={}: log h not stable under window doubling",
        spec.n, spec.alpha, weight.a, k_max
    )))
}

/// Nodes and weights inside the certified window.
pub fn build_lattice(spec: &LatticeSpec, weight: &GaussianWeight, k_max: usize) -> Result<Lattice> {
    certified(spec, weight, k_max, Precision::Standard).map(|s| s.lattice)
}

impl OrthoSystem {
    /// Builds the system to degree `k_max` on a certified window.
    pub fn build(spec: LatticeSpec, a: f64, k_max: usize, precision: Precision) -> Result<Self> {
        certified(&spec, &GaussianWeight { a, n: spec.n }, k_max, precision)
    }

    /// `ln Z_m = ln m! + sum_{k<m} ln h_k`.
    pub fn log_partition(&self, m: usize) -> Result<f64> {
        if m == 0 || m > self.k_max + 1 {
            return Err(Error::InvalidParameter(format!("need 1 <= m <= {}, got {m}", self.k_max + 1)));
        }
        Ok(libm::lgamma(m as f64 + 1.0) + self.log_h[..m].iter().sum::<f64>())
    }

    /// Index of a retained node, if `x` is one.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let n = self.spec.n as f64;
        let j = (x * n + self.spec.alpha).round() as i64;
        let first = *self.lattice.indices.first()?;
        let idx = j - first;
        if idx < 0 || idx as usize >= self.lattice.indices.len() {
            return None;
        }
        let idx = idx as usize;
        ((self.lattice.nodes[idx] - x).abs() <= 1e-9 / n).then_some(idx)
    }

    /// Christoffel-Darboux kernel between retained nodes given by index.
    pub fn cd_kernel_at(&self, i: usize, j: usize, n_particles: usize) -> f64 {
        self.basis[..n_particles].iter().map(|phi| phi[i] * phi[j]).sum()
    }

    /// Christoffel-Darboux kernel `K_m(x, y) = sum_{k<m} phi_k(x) phi_k(y)`.
    pub fn cd_kernel(&self, x: f64, y: f64, n_particles: usize) -> Result<f64> {
        if n_particles > self.k_max + 1 {
            return Err(Error::InvalidParameter(format!("kernel rank {n_particles} exceeds k_max+1")));
        }
        let i = self.node_index(x).ok_or_else(|| Error::InvalidParameter(format!("{x} is not a retained node")))?;
        let j = self.node_index(y).ok_or_else(|| Error::InvalidParameter(format!("{y} is not a retained node")))?;
        Ok(self.cd_kernel_at(i, j, n_particles))
    }

    /// `k,A,B,log_h` table with its header line.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# dgop v1 n={} alpha={} a={} kmax={} nodes={}\nk,A,B,log_h\n",
            self.spec.n,
            self.spec.alpha,
            self.weight.a,
            self.k_max,
            self.lattice.nodes.len()
        );
        for k in 0..=self.k_max {
            let _ = writeln!(out, "{k},{:.16e},{:.16e},{:.16e}", self.a_coef[k], self.b_coef[k], self.log_h[k]);
        }
        out
    }
}

/// `(ln Z_n, F_n)` with `F_n = -ln Z_n / n^2`.
pub fn partition_and_free_energy(n: usize, alpha: f64, a: f64, tail_tol: f64, precision: Precision) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let sys = OrthoSystem::build(LatticeSpec { n, alpha, tail_tol }, a, n - 1, precision)?;
    let log_z = sys.log_partition(n)?;
    Ok((log_z, -log_z / (n * n) as f64))
}

/// Free energy of the Gaussian unitary ensemble with weight `exp(-x^2)`,
/// from the monic Hermite norms `sqrt(pi) k! 2^-k`.
pub fn gue_free_energy(n: usize) -> f64 {
    gue_log_partition(n) / -((n * n) as f64)
}

pub fn gue_log_partition(n: usize) -> f64 {
    let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
    let mut log_z = libm::lgamma(n as f64 + 1.0);
    for k in 0..n {
        log_z += half_ln_pi + libm::lgamma(k as f64 + 1.0) - k as f64 * std::f64::consts::LN_2;
    }
    log_z
}

/// Max relative defect of the rescaling identities between `(n, a)` and
/// `(n + direction, a xi)`, `xi = 1 + direction / n`, for degrees up to the
/// system's `k_max`.
pub fn rescale_check(system: &OrthoSystem, direction: i32) -> Result<f64> {
    if direction != 1 && direction != -1 {
        return Err(Error::InvalidParameter("direction must be +1 or -1".into()));
    }
    let n = system.spec.n;
    if direction == -1 && n < 2 {
        return Err(Error::InvalidParameter("cannot step below n = 1".into()));
    }
    let xi = 1.0 + direction as f64 / n as f64;
    let n2 = (n as i64 + direction as i64) as usize;
    let spec2 = LatticeSpec { n: n2, ..system.spec };
    let other = OrthoSystem::build(spec2, system.weight.a * xi, system.k_max, system.precision)?;
    let mut worst = 0.0f64;
    for j in 0..=system.k_max {
        let pred = (2 * j + 1) as f64 * xi.ln() + other.log_h[j];
        worst = worst.max((system.log_h[j] - pred).exp_m1().abs());
        let scale = system.a_coef[j].abs().max(system.b_coef[j.max(1)].sqrt());
        worst = worst.max((system.a_coef[j] - xi * other.a_coef[j]).abs() / scale);
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug)]
pub struct TodaResult {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
}

/// Second `a`-difference of `ln Z_n` against the Toda right-hand side.
pub fn toda_residual(n: usize, alpha: f64, a: f64, delta: f64, precision: Precision) -> Result<TodaResult> {
    if !(a - delta > 0.0) || n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 and a - delta > 0 (n={n}, a={a}, delta={delta})")));
    }
    let spec = LatticeSpec::new(n, alpha);
    let build = |aa: f64| OrthoSystem::build(spec, aa, n + 1, precision);
    let (lo, mid, hi) = (build(a - delta)?, build(a)?, build(a + delta)?);
    let lhs = (hi.log_partition(n)? - 2.0 * mid.log_partition(n)? + lo.log_partition(n)?) / (delta * delta);
    let (aa, b) = (&mid.a_coef, &mid.b_coef);
    let pref = n as f64 * std::f64::consts::PI.powi(2) / 2.0;
    let rhs = pref * pref * b[n] * (b[n - 1] + b[n + 1] + (aa[n] + aa[n - 1]).powi(2));
    Ok(TodaResult { lhs, rhs, defect: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_lattices_have_zero_a() {
        for alpha in [0.0, 0.5] {
            let sys = OrthoSystem::build(LatticeSpec::new(8, alpha), 0.9, 20, Precision::Standard).unwrap();
            assert!(sys.a_coef.iter().all(|a| a.abs() < 1e-12));
        }
    }

    #[test]
    fn node_placement() {
        let w = GaussianWeight { a: 1.0, n: 4 };
        let l0 = lattice_in_window(&LatticeSpec::new(4, 0.0), &w, 1.0);
        assert!(l0.nodes.contains(&0.0));
        let lh = lattice_in_window(&LatticeSpec::new(4, 0.5), &w, 1.0);
        assert!(!lh.nodes.contains(&0.0));
        assert!(lh.nodes.contains(&0.125) && lh.nodes.contains(&-0.375));
    }

    #[test]
    fn degree_zero_norm_is_weight_sum() {
        let sys = OrthoSystem::build(LatticeSpec::new(5, 0.25), 0.7, 3, Precision::Standard).unwrap();
        let s: f64 = sys.lattice.node_weights.iter().sum();
        assert!((sys.log_h[0] - s.ln()).abs() < 1e-14);
    }

    #[test]
    fn telescoping_storage() {
        let sys = OrthoSystem::build(LatticeSpec::new(10, 0.25), 1.1, 30, Precision::Standard).unwrap();
        for k in 1..=30 {
            assert!(sys.b_coef[k] > 0.0);
            assert!((sys.log_h[k] - sys.log_h[k - 1] - sys.b_coef[k].ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_a() {
        assert!(OrthoSystem::build(LatticeSpec::new(4, 0.0), 0.0, 3, Precision::Standard).is_err());
        assert!(OrthoSystem::build(LatticeSpec::new(4, 0.0), -1.0, 3, Precision::Standard).is_err());
    }

    #[test]
    fn gue_single_particle() {
        assert!((gue_free_energy(1) + 0.5 * std::f64::consts::PI.ln()).abs() < 1e-15);
    }

    #[test]
    fn extended_matches_standard() {
        let a = OrthoSystem::build(LatticeSpec::new(6, 0.25), 0.9, 12, Precision::Standard).unwrap();
        let b = OrthoSystem::build(LatticeSpec::new(6, 0.25), 0.9, 12, Precision::Extended).unwrap();
        for k in 0..=12 {
            assert!((a.log_h[k] - b.log_h[k]).abs() < 1e-12);
        }
    }
}
