//! Equilibrium measure of the Gaussian weight and the closed-form large-`n`
//! formulas for the discrete Gaussian orthogonal polynomials, together with
//! harnesses that compare them against exact [`OrthoSystem`] data.
//!
//! All comparisons of norm-like quantities are made on logarithms.

use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::dgop::{gue_free_energy, partition_and_free_energy, LatticeSpec, OrthoSystem, Precision, DEFAULT_TAIL_TOL};
use crate::error::{Error, Result};
use crate::painleve::{PainleveGrid, Which};
use crate::psi::{critical_kernel, PsiSolution};

/// Below this `|1 - a|` the parameter `s` is taken from its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-3;
/// Scale constant `c = pi 2^{-5/3}` of the critical lattice coordinates.
pub const KERNEL_SCALE: f64 = PI / 3.174_802_103_936_399;
const MOMENTS: usize = 5;
const QUAD_NODES: usize = 48;

fn catalan(j: usize) -> f64 {
    (0..j).fold(1.0, |c, i| c * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64)
}

/// Semicircle equilibrium measure `rho(x) = (pi a / 2) sqrt(b^2 - x^2)` on
/// `[-b, b]`, `b = 2 / (pi sqrt a)`.
#[derive(Clone, Debug)]
pub struct EquilibriumData {
    pub a: f64,
    pub b: f64,
    /// `l = -ln(pi^2 a e)`.
    pub lagrange_l: f64,
    /// `g_2, g_4, .., g_10` with `g_{2j} = int x^{2j}/(2j) rho(x) dx`.
    pub g_moments: Vec<f64>,
}

impl EquilibriumData {
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidParameter(format!("a={a} must be positive")));
        }
        let b = 2.0 / (PI * a.sqrt());
        let g_moments = (1..=MOMENTS)
            .map(|j| catalan(j) * (b / 2.0).powi(2 * j as i32) / (2 * j) as f64)
            .collect();
        Ok(EquilibriumData { a, b, lagrange_l: -(PI * PI * a * E).ln(), g_moments })
    }

    pub fn density(&self, x: f64) -> f64 {
        if x.abs() >= self.b {
            return 0.0;
        }
        0.5 * PI * self.a * (self.b * self.b - x * x).sqrt()
    }

    /// `int x^p rho(x) dx` by Gauss-Legendre in the angle `x = b sin t`,
    /// where the integrand is smooth.
    pub fn moment_quadrature(&self, p: u32) -> f64 {
        let rule = gauss_quad::GaussLegendre::new(QUAD_NODES.try_into().unwrap());
        let c = 0.5 * PI * self.a * self.b * self.b;
        rule.integrate(-0.5 * PI, 0.5 * PI, |t| {
            let (s, co) = t.sin_cos();
            c * (self.b * s).powi(p as i32) * co * co
        })
    }

    pub fn mass(&self) -> f64 {
        self.moment_quadrature(0)
    }

    /// `g_{2j}` by quadrature, for comparison with the closed form.
    pub fn g_moment_quadrature(&self, j: usize) -> f64 {
        self.moment_quadrature(2 * j as u32) / (2 * j) as f64
    }

    /// Whether the density exceeds the upper constraint 1 somewhere.
    pub fn is_saturated(&self) -> bool {
        self.a > 1.0
    }
}

/// `int_0^z rho` for `0 <= z <= b`.
fn semicircle_mass_to(a: f64, z: f64) -> f64 {
    let b = 2.0 / (PI * a.sqrt());
    let w = ((b - z) * (b + z)).max(0.0).sqrt();
    0.25 * PI * a * (z * w + b * b * z.atan2(w))
}

/// Endpoint `z_1` of the saturated interval, purely imaginary when `a < 1`.
pub fn stationary_point(a: f64) -> Complex64 {
    let c = 2.0 / (PI * a);
    if a >= 1.0 {
        Complex64::new(c * (a - 1.0).sqrt(), 0.0)
    } else {
        Complex64::new(0.0, c * (1.0 - a).sqrt())
    }
}

fn s_series(a: f64, n: usize) -> f64 {
    let d = 1.0 - a;
    4f64.cbrt() * (n as f64).powf(2.0 / 3.0) * (d + 0.8 * d * d + 122.0 / 175.0 * d * d * d)
}

/// The double-scaling parameter `s(a; n)`.
///
/// For `a >= 1` this is `-[3 pi n (z_1 - int_0^{z_1} rho)]^{2/3}`. For
/// `a < 1` the bracket is continued to imaginary `z_1 = i T`, where it equals
/// `i (T - (pi a / 4)(T sqrt(b^2 + T^2) + b^2 asinh(T / b)))`, and the branch
/// with `s > 0` is taken. Close to `a = 1` the cubic Taylor polynomial is used.
pub fn s_of_a(a: f64, n: usize) -> Result<f64> {
    if !(a > 0.0 && a <= 2.0) {
        return Err(Error::OutOfRange { x: a, lo: 0.0, hi: 2.0 });
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if (1.0 - a).abs() < SERIES_SWITCH {
        return Ok(s_series(a, n));
    }
    Ok(s_of_a_closed(a, n))
}

fn s_of_a_closed(a: f64, n: usize) -> f64 {
    let nn = n as f64;
    let z1 = stationary_point(a);
    if a >= 1.0 {
        let z = z1.re;
        let bracket = z - semicircle_mass_to(a, z);
        -(3.0 * PI * nn * bracket.abs()).powf(2.0 / 3.0)
    } else {
        let t = z1.im;
        let b2 = 4.0 / (PI * PI * a);
        let b = b2.sqrt();
        let bracket = t - 0.25 * PI * a * (t * (b2 + t * t).sqrt() + b2 * (t / b).asinh());
        (3.0 * PI * nn * bracket.abs()).powf(2.0 / 3.0)
    }
}

/// `s(a; n)` by the closed form only, bypassing the series switch.
pub fn s_of_a_exact_branch(a: f64, n: usize) -> Result<f64> {
    if !(a > 0.0 && a <= 2.0) || a == 1.0 || n == 0 {
        return Err(Error::InvalidParameter(format!("closed form needs a in (0,2] \\ {{1}}, n > 0 (a={a}, n={n})")));
    }
    Ok(s_of_a_closed(a, n))
}

/// `s(a; n)` by the Taylor polynomial only.
pub fn s_of_a_series(a: f64, n: usize) -> f64 {
    s_series(a, n)
}

/// Painleve data entering the expansions for one parity of the degree.
#[derive(Clone, Copy, Debug)]
pub struct TuPair {
    pub t: f64,
    pub u: f64,
    /// `T'(s) = -q^2 - sigma q'`, `sigma = (-1)^m cos(2 pi alpha)`.
    pub t_prime: f64,
}

fn parity_sign(m: usize) -> f64 {
    if m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `T_m(s)`, `U_m(s)` and `T_m'(s)` from the transcendent at `s`.
pub fn t_u(m: usize, alpha: f64, s: f64, painleve: &PainleveGrid) -> Result<TuPair> {
    let v = painleve.at(s)?;
    let (sn, cs) = (2.0 * PI * alpha).sin_cos();
    let sigma = parity_sign(m) * cs;
    let t = v.r - sigma * v.q;
    let u = v.r * v.r - sigma * (v.qp + 2.0 * v.q * v.r) - v.q * v.q * sn * sn;
    Ok(TuPair { t, u, t_prime: -v.q * v.q - sigma * v.qp })
}

#[derive(Clone, Debug)]
pub struct AsymptoticTerms {
    pub n: usize,
    pub alpha: f64,
    pub a: f64,
    pub s: f64,
    /// `s(a xi_+; n + 1)`.
    pub s_plus: f64,
    /// `s(a xi_-; n - 1)`.
    pub s_minus: f64,
    pub xi_plus: f64,
    pub xi_minus: f64,
    pub z1: Complex64,
    pub t: f64,
    pub u: f64,
    pub t_prime: f64,
    /// `theta = -n pi / 2 - pi alpha`.
    pub theta: f64,
}

impl AsymptoticTerms {
    pub fn new(n: usize, alpha: f64, a: f64, painleve: &PainleveGrid) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("n={n} must be at least 2")));
        }
        let nn = n as f64;
        let (xi_plus, xi_minus) = (1.0 + 1.0 / nn, 1.0 - 1.0 / nn);
        let s = s_of_a(a, n)?;
        let tu = t_u(n, alpha, s, painleve)?;
        Ok(AsymptoticTerms {
            n,
            alpha,
            a,
            s,
            s_plus: s_of_a(a * xi_plus, n + 1)?,
            s_minus: s_of_a(a * xi_minus, n - 1)?,
            xi_plus,
            xi_minus,
            z1: stationary_point(a),
            t: tu.t,
            u: tu.u,
            t_prime: tu.t_prime,
            theta: -nn * PI / 2.0 - PI * alpha,
        })
    }
}

/// Predicted `ln h_{n,n}` and `ln(1 / h_{n,n-1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPrediction {
    pub log_h_nn: f64,
    pub log_inv_h_nnm1: f64,
}

fn log1p_checked(x: f64, what: &str) -> Result<f64> {
    if x <= -1.0 {
        return Err(Error::InvalidParameter(format!("{what}: correction factor 1 + {x} is not positive")));
    }
    Ok(x.ln_1p())
}

/// Double-scaling expansion of `h_{n,n}` and `h_{n,n-1}^{-1}` through order
/// `n^{-2/3}`.
pub fn asymptotic_h(n: usize, alpha: f64, a: f64, painleve: &PainleveGrid) -> Result<HPrediction> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 2")));
    }
    let nn = n as f64;
    let s = s_of_a(a, n)?;
    let cur = t_u(n, alpha, s, painleve)?;
    let prev = t_u(n - 1, alpha, s, painleve)?;
    let (c1, c2) = (4f64.cbrt() / nn.cbrt(), 2f64.cbrt() / nn.cbrt().powi(2));
    let base = (PI * PI * a * E).ln();
    let log_h_nn = (2.0 / a.sqrt()).ln() - nn * base + log1p_checked(-c1 * cur.t + c2 * cur.u, "h_{n,n}")?;
    let log_inv_h_nnm1 =
        -(2.0 * a.sqrt() * PI * PI).ln() + nn * base + log1p_checked(c1 * prev.t + c2 * prev.u, "h_{n,n-1}")?;
    Ok(HPrediction { log_h_nn, log_inv_h_nnm1 })
}

/// Leading two orders of `A_{n,n-1}`.
pub fn asymptotic_a(n: usize, alpha: f64, a: f64, painleve: &PainleveGrid) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 2")));
    }
    let nn = n as f64;
    let v = painleve.at(s_of_a(a, n)?)?;
    let pref = parity_sign(n) * 16f64.cbrt() * (2.0 * PI * alpha).sin() / (PI * nn.cbrt());
    Ok(pref * (2f64.cbrt() * v.q + v.qp / nn.cbrt()))
}

/// Predicted logarithms of `h_{n,n}(a) / h_{n-1,n-2}(a xi_-)` (`lower`) and
/// `h_{n+1,n+1}(a xi_+) / h_{n,n-1}(a)` (`upper`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioPrediction {
    pub log_lower: f64,
    pub log_upper: f64,
}

/// The simplified ratio formulas with `T'` in closed form.
pub fn ratio_asymptotics(n: usize, alpha: f64, a: f64, painleve: &PainleveGrid) -> Result<RatioPrediction> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 3")));
    }
    let nn = n as f64;
    let s = s_of_a(a, n)?;
    let c = 2f64.powf(7.0 / 3.0) / nn.cbrt().powi(2);
    let base = -2.0 * (PI * PI * a * E).ln();
    let lower = base + log1p_checked(c * t_u(n, alpha, s, painleve)?.t_prime, "lower ratio")?;
    let upper = base + log1p_checked(c * t_u(n + 1, alpha, s, painleve)?.t_prime, "upper ratio")?;
    Ok(RatioPrediction { log_lower: lower, log_upper: upper })
}

/// The same ratios assembled from [`asymptotic_h`] at the shifted
/// `(n +- 1, a xi_+-)`.
pub fn ratio_by_composition(n: usize, alpha: f64, a: f64, painleve: &PainleveGrid) -> Result<RatioPrediction> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 3")));
    }
    let nn = n as f64;
    let here = asymptotic_h(n, alpha, a, painleve)?;
    let below = asymptotic_h(n - 1, alpha, a * (1.0 - 1.0 / nn), painleve)?;
    let above = asymptotic_h(n + 1, alpha, a * (1.0 + 1.0 / nn), painleve)?;
    Ok(RatioPrediction {
        log_lower: here.log_h_nn + below.log_inv_h_nnm1,
        log_upper: above.log_h_nn + here.log_inv_h_nnm1,
    })
}

/// Exact ratios from the discrete polynomials.
pub fn ratio_exact(n: usize, alpha: f64, a: f64, precision: Precision) -> Result<RatioPrediction> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("n={n} must be at least 3")));
    }
    let nn = n as f64;
    let here = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n, precision)?;
    let below = OrthoSystem::build(LatticeSpec::new(n - 1, alpha), a * (1.0 - 1.0 / nn), n - 2, precision)?;
    let above = OrthoSystem::build(LatticeSpec::new(n + 1, alpha), a * (1.0 + 1.0 / nn), n + 1, precision)?;
    Ok(RatioPrediction {
        log_lower: here.log_h[n] - below.log_h[n - 2],
        log_upper: above.log_h[n + 1] - here.log_h[n - 1],
    })
}

/// Subcritical predictions and the exact continuous Hermite norms, as logs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubcriticalPrediction {
    pub log_h_nn: f64,
    pub log_inv_h_nnm1: f64,
    /// `ln h_n^{(c)}`, `h_n^{(c)} = n! sqrt(2 pi) / (sqrt(n a) pi)^{2n+1}`.
    pub log_hermite_n: f64,
    /// `ln h_{n-1}^{(c)}`.
    pub log_hermite_nm1: f64,
}

/// Expansion of the norms well inside the unsaturated regime, where the
/// discrete norms are exponentially close to the continuous ones. The regime
/// is enforced as `a <= 1 - n^{-1/2}`.
pub fn subcritical_h(n: usize, a: f64) -> Result<SubcriticalPrediction> {
    if n < 1 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let nn = n as f64;
    if !(a > 0.0 && a <= 1.0 - 1.0 / nn.sqrt()) {
        return Err(Error::InvalidParameter(format!("a={a} not below 1 - n^(-1/2) for n={n}")));
    }
    let base = (PI * PI * a * E).ln();
    let (i1, i2, i3) = (1.0 / nn, 1.0 / (nn * nn), 1.0 / (nn * nn * nn));
    let plus = 1.0 + i1 / 12.0 + i2 / 288.0 - 139.0 * i3 / 51840.0;
    let minus = 1.0 - i1 / 12.0 + i2 / 288.0 + 139.0 * i3 / 51840.0;
    let log_scale = (nn * a).sqrt().ln() + PI.ln();
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    Ok(SubcriticalPrediction {
        log_h_nn: (2.0 / a.sqrt()).ln() - nn * base + plus.ln(),
        log_inv_h_nnm1: -(2.0 * a.sqrt() * PI * PI).ln() + nn * base + minus.ln(),
        log_hermite_n: libm::lgamma(nn + 1.0) + half_ln_2pi - (2.0 * nn + 1.0) * log_scale,
        log_hermite_nm1: libm::lgamma(nn) + half_ln_2pi - (2.0 * nn - 1.0) * log_scale,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct FreeEnergyCheck {
    pub n: usize,
    pub a: f64,
    pub f_dope: f64,
    pub f_gue: f64,
    /// `ln(a)/2 - ln(2/(n pi^2))/2 - ln F2(2^{2/3} n^{2/3} (1 - a)) / n^2`.
    pub predicted_difference: f64,
    pub residual: f64,
}

/// Residual of the free-energy expansion at `a = 1 - L n^{-2/3}`.
pub fn free_energy_theorem_check(
    n: usize,
    alpha: f64,
    l: f64,
    painleve: &PainleveGrid,
    precision: Precision,
) -> Result<FreeEnergyCheck> {
    let nn = n as f64;
    let a = 1.0 - l * nn.powf(-2.0 / 3.0);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a = 1 - L n^(-2/3) = {a} is not positive")));
    }
    let (_, f_dope) = partition_and_free_energy(n, alpha, a, DEFAULT_TAIL_TOL, precision)?;
    let f_gue = gue_free_energy(n);
    let f2 = painleve.tracy_widom(4f64.cbrt() * nn.powf(2.0 / 3.0) * (1.0 - a), Which::F2)?;
    if !(f2 > 0.0) {
        return Err(Error::InvalidParameter(format!("F2 vanishes at L={l}")));
    }
    let predicted = 0.5 * a.ln() - 0.5 * (2.0 / (nn * PI * PI)).ln() - f2.ln() / (nn * nn);
    Ok(FreeEnergyCheck {
        n,
        a,
        f_dope,
        f_gue,
        predicted_difference: predicted,
        residual: (f_dope - f_gue - predicted).abs(),
    })
}

/// One entry of the kernel comparison.
#[derive(Clone, Copy, Debug)]
pub struct KernelComparison {
    pub u: f64,
    pub v: f64,
    pub k: i64,
    pub m: i64,
    /// `c n^{1/3} x` at the lattice point actually used.
    pub u_lattice: f64,
    pub v_lattice: f64,
    pub scaled_discrete: f64,
    pub critical: f64,
    pub rel_diff: f64,
}

#[derive(Clone, Debug, Default)]
pub struct KernelTable {
    pub rows: Vec<KernelComparison>,
    /// Pairs with `u != v` that rounded onto the same lattice point.
    pub collisions: Vec<(f64, f64)>,
}

impl KernelTable {
    /// `max |scaled - critical| / max |critical|` over the off-diagonal and
    /// the diagonal rows separately; `NaN` for an empty group.
    pub fn norm_differences(&self) -> (f64, f64) {
        let group = |diag: bool| {
            let rows = self.rows.iter().filter(|r| (r.u == r.v) == diag);
            let (num, den) = rows.fold((0.0f64, 0.0f64), |(n, d), r| {
                (n.max((r.scaled_discrete - r.critical).abs()), d.max(r.critical.abs()))
            });
            if den > 0.0 {
                num / den
            } else {
                f64::NAN
            }
        };
        (group(false), group(true))
    }
}

/// Scaled Christoffel-Darboux kernel against `K^crit(u, v; 2^{2/3} L)`.
///
/// Each `u` is rounded to the lattice point `x = (k - alpha)/n` with
/// `k = round(u n^{2/3} / c + alpha)`, and `K^crit` is evaluated at the
/// rounded coordinate `c n^{1/3} x`. Diagonal pairs use
/// `(n^{2/3}/c)(1 - K_n(x, x))`, the others
/// `(-1)^{k+m+1} (n^{2/3}/c) K_n(x, y)`.
pub fn kernel_theorem_check(
    n: usize,
    alpha: f64,
    l: f64,
    pairs: &[(f64, f64)],
    psi: &PsiSolution,
    precision: Precision,
) -> Result<KernelTable> {
    let nn = n as f64;
    let s_inf = 4f64.cbrt() * l;
    if (psi.s - s_inf).abs() > 1e-12 * (1.0 + s_inf.abs()) {
        return Err(Error::InvalidParameter(format!("psi solved at s={} but 2^(2/3) L = {s_inf}", psi.s)));
    }
    let a = 1.0 - l * nn.powf(-2.0 / 3.0);
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!("a = 1 - L n^(-2/3) = {a} is not positive")));
    }
    let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n - 1, precision)?;
    let c = KERNEL_SCALE;
    let scale = nn.powf(2.0 / 3.0) / c;
    let to_lattice = |u: f64| -> (i64, f64) {
        let k = (u * scale + alpha).round() as i64;
        (k, (k as f64 - alpha) / nn)
    };
    let mut table = KernelTable::default();
    for &(u, v) in pairs {
        let (k, x) = to_lattice(u);
        let (m, y) = to_lattice(v);
        let diagonal = u == v;
        if !diagonal && k == m {
            table.collisions.push((u, v));
            continue;
        }
        let kn = sys.cd_kernel(x, y, n)?;
        let (ul, vl) = (c * nn.cbrt() * x, c * nn.cbrt() * y);
        let scaled = if diagonal {
            scale * (1.0 - kn)
        } else {
            let sign = if (k + m + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sign * scale * kn
        };
        let critical = critical_kernel(ul, vl, psi);
        table.rows.push(KernelComparison {
            u,
            v,
            k,
            m,
            u_lattice: ul,
            v_lattice: vl,
            scaled_discrete: scaled,
            critical,
            rel_diff: (scaled - critical).abs() / critical.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(table)
}

/// One row of an exact-versus-asymptotic table.
#[derive(Clone, Debug, PartialEq)]
pub struct HarnessRow {
    pub n: usize,
    pub quantity: String,
    pub exact: f64,
    pub asymptotic: f64,
    pub rel_err: f64,
}

/// `h_{n,n}` and `h_{n,n-1}^{-1}` at `a = 1 - x n^{-2/3}`, exact versus
/// predicted. `exact` and `asymptotic` are logarithms; `rel_err` is the
/// relative error of the norms themselves.
pub fn h_harness(n: usize, alpha: f64, x: f64, painleve: &PainleveGrid, precision: Precision) -> Result<Vec<HarnessRow>> {
    let a = 1.0 - x * (n as f64).powf(-2.0 / 3.0);
    let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n, precision)?;
    let pred = asymptotic_h(n, alpha, a, painleve)?;
    let row = |quantity: &str, exact: f64, asymptotic: f64| HarnessRow {
        n,
        quantity: quantity.to_string(),
        exact,
        asymptotic,
        rel_err: (exact - asymptotic).exp_m1().abs(),
    };
    Ok(vec![
        row(&format!("log_h_nn(x={x})"), sys.log_h[n], pred.log_h_nn),
        row(&format!("log_inv_h_nnm1(x={x})"), -sys.log_h[n - 1], pred.log_inv_h_nnm1),
    ])
}

/// Exact `A_{n,n-1}` against its two-term prediction at `a = 1 - x n^{-2/3}`.
pub fn a_harness(n: usize, alpha: f64, x: f64, painleve: &PainleveGrid, precision: Precision) -> Result<HarnessRow> {
    let a = 1.0 - x * (n as f64).powf(-2.0 / 3.0);
    let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n, precision)?;
    let exact = sys.a_coef[n - 1];
    let asymptotic = asymptotic_a(n, alpha, a, painleve)?;
    Ok(HarnessRow {
        n,
        quantity: format!("A_n,n-1(x={x})"),
        exact,
        asymptotic,
        rel_err: (exact - asymptotic).abs() / exact.abs().max(f64::MIN_POSITIVE),
    })
}

/// Subcritical norms, exact versus predicted, as in [`h_harness`].
pub fn subcritical_harness(n: usize, alpha: f64, a: f64, precision: Precision) -> Result<Vec<HarnessRow>> {
    let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n, precision)?;
    let pred = subcritical_h(n, a)?;
    let row = |quantity: &str, exact: f64, asymptotic: f64| HarnessRow {
        n,
        quantity: quantity.to_string(),
        exact,
        asymptotic,
        rel_err: (exact - asymptotic).exp_m1().abs(),
    };
    Ok(vec![
        row("log_h_nn", sys.log_h[n], pred.log_h_nn),
        row("log_inv_h_nnm1", -sys.log_h[n - 1], pred.log_inv_h_nnm1),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_numbers() {
        let c: Vec<f64> = (0..7).map(catalan).collect();
        assert_eq!(c, vec![1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0]);
    }

    #[test]
    fn equilibrium_basics() {
        for a in [0.5, 1.0, 1.7] {
            let eq = EquilibriumData::new(a).unwrap();
            assert!((eq.density(0.0) - a.sqrt()).abs() < 1e-15);
            assert_eq!(eq.density(eq.b), 0.0);
            assert!((eq.mass() - 1.0).abs() < 1e-12);
            assert!((eq.lagrange_l.exp() - 1.0 / (PI * PI * a * E)).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_integral_closes() {
        for a in [0.7, 1.0, 1.3] {
            let b = 2.0 / (PI * f64::sqrt(a));
            let m = semicircle_mass_to(a, b);
            assert!((m - 0.5).abs() < 1e-14, "a={a}: {m}");
        }
    }

    #[test]
    fn s_vanishes_at_critical_point() {
        assert_eq!(s_of_a(1.0, 50).unwrap(), 0.0);
        assert!(s_of_a(0.0, 5).is_err());
        assert!(s_of_a(2.5, 5).is_err());
    }

    #[test]
    fn g_moments_match_quadrature() {
        for a in [0.6, 1.0, 1.4] {
            let eq = EquilibriumData::new(a).unwrap();
            for j in 1..=MOMENTS {
                let (closed, quad) = (eq.g_moments[j - 1], eq.g_moment_quadrature(j));
                assert!((closed - quad).abs() <= 1e-10 * closed.abs(), "a={a} j={j}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn branch_and_series_agree_at_switch() {
        for n in [10, 100, 1000] {
            for a in [1.0 - SERIES_SWITCH, 1.0 + SERIES_SWITCH] {
                let (exact, series) = (s_of_a_exact_branch(a, n).unwrap(), s_of_a_series(a, n));
                assert!((exact / series - 1.0).abs() < 1e-8, "n={n} a={a}: {exact} vs {series}");
            }
        }
    }

    #[test]
    fn s_sign_and_monotonicity() {
        let n = 64;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=40 {
            let a = 1.2 - 0.01 * i as f64;
            let s = s_of_a(a, n).unwrap();
            if (1.0 - a).abs() > 1e-12 {
                assert_eq!(s.signum(), (1.0 - a).signum(), "a={a} s={s}");
            }
            assert!(s > prev, "s not increasing in 1-a at a={a}");
            prev = s;
        }
    }

    #[test]
    fn s_approaches_linear_limit() {
        let x = 1.5;
        let mut errs = Vec::new();
        for n in [1_000usize, 8_000, 64_000] {
            let a = 1.0 - x * (n as f64).powf(-2.0 / 3.0);
            errs.push((s_of_a(a, n).unwrap() / (4f64.cbrt() * x) - 1.0).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn t_derivative_identity() {
        let grid = PainleveGrid::compute(Default::default()).unwrap();
        for (m, alpha) in [(2, 0.0), (3, 0.0), (4, 0.25), (5, 0.1)] {
            let mut prev = f64::INFINITY;
            for h in [0.02, 0.01] {
                let mut worst: f64 = 0.0;
                for s in [-3.0, -1.0, 0.0, 1.5] {
                    let t = |x: f64| t_u(m, alpha, x, &grid).unwrap();
                    let fd = (t(s + h).t - t(s - h).t) / (2.0 * h);
                    let c = t(s);
                    worst = worst.max((c.u - c.t * c.t - fd).abs());
                    assert!((c.u - c.t * c.t - c.t_prime).abs() < 1e-12);
                }
                assert!(worst < 1e-3, "m={m} h={h}: {worst}");
                assert!(worst < prev / 3.0, "m={m} h={h}: {worst} vs {prev}");
                prev = worst;
            }
        }
    }
}
