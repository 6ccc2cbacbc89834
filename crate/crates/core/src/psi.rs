//! Real solutions `(Phi^1, Phi^2)` of the Painleve II Lax pair and the
//! critical kernel built from them.
//!
//! Initial data at `zeta_max` come from the formal expansion
//! `Psi = (I + sum m_k zeta^-k) exp(-i theta sigma_3)`,
//! `theta = 4 zeta^3 / 3 + s zeta`, and the `zeta` equation is integrated
//! inwards to the origin. The negative half-line follows from the parity
//! `Phi^1(-z) = Phi^1(z)`, `Phi^2(-z) = -Phi^2(z)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ode::{dopri5, Tolerances};
use crate::painleve::{quintic, PainleveGrid};

pub const MATCHING_LIMIT: f64 = 1e-5;
const SERIES_TERMS: usize = 48;

/// How the initial data at `zeta_max` are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOrder {
    /// `Phi^1 = cos theta`, `Phi^2 = -sin theta`.
    Leading,
    /// Optimally truncated asymptotic series.
    Full,
}

#[derive(Clone, Copy, Debug)]
pub struct PsiParams {
    pub zeta_max: f64,
    /// Output nodes on `[0, zeta_max]`; the stored grid has `2 mesh + 1` points.
    pub mesh: usize,
    pub series: SeriesOrder,
    pub tol: Tolerances,
}

impl Default for PsiParams {
    fn default() -> Self {
        PsiParams { zeta_max: 10.0, mesh: 1000, series: SeriesOrder::Full, tol: Tolerances::default() }
    }
}

type M2 = [[C64; 2]; 2];

fn zero() -> M2 {
    [[C64::new(0.0, 0.0); 2]; 2]
}

fn mul(a: &M2, b: &M2) -> M2 {
    let mut c = zero();
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

fn add(a: &M2, b: &M2) -> M2 {
    let mut c = *a;
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] += b[i][j];
        }
    }
    c
}

fn scale(a: &M2, s: C64) -> M2 {
    let mut c = *a;
    for row in c.iter_mut() {
        for v in row.iter_mut() {
            *v *= s;
        }
    }
    c
}

fn norm(a: &M2) -> f64 {
    a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

fn pauli() -> (M2, M2, M2) {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    ([[o, l], [l, o]], [[o, -i], [i, o]], [[l, o], [o, -l]])
}

/// Coefficients `m_0 .. m_{terms-1}` of the formal solution at infinity.
pub fn series_coefficients(s: f64, q: f64, r: f64, terms: usize) -> Vec<M2> {
    let (s1, s2, s3) = pauli();
    let i = C64::new(0.0, 1.0);
    let re = |x: f64| C64::new(x, 0.0);
    let comm3 = |m: &M2| add(&mul(&s3, m), &scale(&mul(m, &s3), re(-1.0)));
    // X_j: everything in the order zeta^-j equation except -4i[sigma_3, m_{j+2}].
    let x_of = |j: isize, m: &dyn Fn(isize) -> M2| -> M2 {
        let mut x = scale(&m(j - 1), re(-(j as f64 - 1.0)));
        x = add(&x, &scale(&comm3(&m(j)), i * s));
        x = add(&x, &scale(&mul(&s3, &m(j)), i * 2.0 * q * q));
        x = add(&x, &scale(&mul(&s1, &m(j + 1)), re(-4.0 * q)));
        add(&x, &scale(&mul(&s2, &m(j)), re(2.0 * r)))
    };
    let off_solve = |x: &M2| -> M2 {
        let mut o = zero();
        o[0][1] = i * x[0][1] / 8.0;
        o[1][0] = -i * x[1][0] / 8.0;
        o
    };
    let mut m: Vec<M2> = vec![zero(); terms + 3];
    m[0] = [[re(1.0), re(0.0)], [re(0.0), re(1.0)]];
    let get = |m: &Vec<M2>, k: isize| if k < 0 { zero() } else { m[k as usize] };
    m[1] = off_solve(&x_of(-1, &|k| get(&m, k)));
    for k in 1..terms {
        // Provisional m_{k+1}, m_{k+2} with the unknown diagonals set to zero.
        let mut trial = m.clone();
        trial[k + 1] = off_solve(&x_of(k as isize - 1, &|j| get(&trial, j)));
        trial[k + 2] = off_solve(&x_of(k as isize, &|j| get(&trial, j)));
        let rhs = {
            let a = scale(&mul(&s3, &trial[k + 1]), i * 2.0 * q * q);
            let b = scale(&mul(&s1, &trial[k + 2]), re(-4.0 * q));
            let c = scale(&mul(&s2, &trial[k + 1]), re(2.0 * r));
            add(&add(&a, &b), &c)
        };
        m[k][0][0] = rhs[0][0] / k as f64;
        m[k][1][1] = rhs[1][1] / k as f64;
        m[k + 1] = off_solve(&x_of(k as isize - 1, &|j| get(&m, j)));
    }
    m.truncate(terms);
    m
}

/// `(Phi^1, Phi^2)` at large `zeta > 0` from the optimally truncated series.
pub fn series_phi(zeta: f64, s: f64, coeffs: &[M2]) -> (f64, f64) {
    let mut y = coeffs[0];
    let mut prev = f64::INFINITY;
    let mut zpow = 1.0;
    for m in coeffs.iter().skip(1) {
        zpow /= zeta;
        let size = norm(m) * zpow;
        if size > prev {
            break;
        }
        y = add(&y, &scale(m, C64::new(zpow, 0.0)));
        prev = size;
        if size < 1e-18 {
            break;
        }
    }
    let theta = 4.0 / 3.0 * zeta * zeta * zeta + s * zeta;
    let e = C64::from_polar(1.0, -theta);
    let phi1 = y[0][0] * e + y[0][1] * e.conj();
    (phi1.re, phi1.im)
}

fn lax_zeta(zeta: f64, s: f64, q: f64, r: f64) -> [[f64; 2]; 2] {
    let a = 4.0 * zeta * zeta + s + 2.0 * q * q;
    [[4.0 * zeta * q, a + 2.0 * r], [-a + 2.0 * r, -4.0 * zeta * q]]
}

/// Solution of the Lax pair at fixed `s`, with dense storage on `zeta >= 0`.
#[derive(Clone, Debug)]
pub struct PsiSolution {
    pub s: f64,
    pub q: f64,
    pub r: f64,
    pub zeta_max: f64,
    pub zeta_values: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub matching_defect: f64,
    nodes: Vec<f64>,
    states: Vec<[f64; 2]>,
    coeffs: Vec<M2>,
    series: SeriesOrder,
}

/// Integrates the `zeta` equation at parameter `s`, with `q`, `q'` taken
/// from the cached transcendent.
pub fn integrate_psi(s: f64, params: &PsiParams, painleve: &PainleveGrid) -> Result<PsiSolution> {
    let v = painleve.at(s)?;
    integrate_psi_with(s, v.q, v.qp, params)
}

/// As [`integrate_psi`] with explicit `q(s)` and `q'(s)`.
pub fn integrate_psi_with(s: f64, q: f64, r: f64, params: &PsiParams) -> Result<PsiSolution> {
    if !(params.zeta_max >= 2.0) || params.mesh < 2 {
        return Err(Error::InvalidParameter(format!(
            "zeta_max {} must be >= 2 and mesh {} >= 2",
            params.zeta_max, params.mesh
        )));
    }
    let zmax = params.zeta_max;
    let coeffs = series_coefficients(s, q, r, SERIES_TERMS);
    let init = match params.series {
        SeriesOrder::Full => series_phi(zmax, s, &coeffs),
        SeriesOrder::Leading => {
            let th = 4.0 / 3.0 * zmax.powi(3) + s * zmax;
            (th.cos(), -th.sin())
        }
    };
    let f = |z: f64, y: &[f64; 2]| {
        let m = lax_zeta(z, s, q, r);
        [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]
    };
    let mut nodes = Vec::new();
    let mut states = Vec::new();
    dopri5(f, zmax, [init.0, init.1], 0.0, params.tol, |z| 0.1 / (1.0 + z * z), |z, y| {
        nodes.push(z);
        states.push(*y);
    })?;
    nodes.reverse();
    states.reverse();
    let scale = states.iter().map(|y| y[0].abs().max(y[1].abs())).fold(1.0, f64::max);
    let matching_defect = states[0][1].abs() / scale;
    if matching_defect > MATCHING_LIMIT {
        return Err(Error::MatchingDefect { defect: matching_defect, limit: MATCHING_LIMIT });
    }
    let mut sol = PsiSolution {
        s,
        q,
        r,
        zeta_max: zmax,
        zeta_values: Vec::new(),
        phi1: Vec::new(),
        phi2: Vec::new(),
        matching_defect,
        nodes,
        states,
        coeffs,
        series: params.series,
    };
    let m = params.mesh;
    for j in 0..=2 * m {
        let z = -zmax + zmax * j as f64 / m as f64;
        let z = if j == 2 * m { zmax } else { z };
        let (p1, p2) = sol.eval(z);
        sol.zeta_values.push(z);
        sol.phi1.push(p1);
        sol.phi2.push(p2);
    }
    Ok(sol)
}

impl PsiSolution {
    fn deriv(&self, z: f64, y: [f64; 2]) -> ([f64; 2], [f64; 2]) {
        let m = lax_zeta(z, self.s, self.q, self.r);
        let d = [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]];
        let mp = [[4.0 * self.q, 8.0 * z], [-8.0 * z, -4.0 * self.q]];
        let dd = [
            mp[0][0] * y[0] + mp[0][1] * y[1] + m[0][0] * d[0] + m[0][1] * d[1],
            mp[1][0] * y[0] + mp[1][1] * y[1] + m[1][0] * d[0] + m[1][1] * d[1],
        ];
        (d, dd)
    }

    /// `(Phi^1, Phi^2)` at any real `zeta`.
    pub fn eval(&self, zeta: f64) -> (f64, f64) {
        let z = zeta.abs();
        let (p1, p2) = if z > self.zeta_max {
            match self.series {
                SeriesOrder::Full => series_phi(z, self.s, &self.coeffs),
                SeriesOrder::Leading => {
                    let th = 4.0 / 3.0 * z.powi(3) + self.s * z;
                    (th.cos(), -th.sin())
                }
            }
        } else {
            let i = self.nodes.partition_point(|&t| t <= z).clamp(1, self.nodes.len() - 1) - 1;
            let (z0, z1) = (self.nodes[i], self.nodes[i + 1]);
            let (y0, y1) = (self.states[i], self.states[i + 1]);
            let (d0, dd0) = self.deriv(z0, y0);
            let (d1, dd1) = self.deriv(z1, y1);
            let h = z1 - z0;
            let t = (z - z0) / h;
            let a = quintic(h, t, [y0[0], y1[0]], [d0[0], d1[0]], [dd0[0], dd1[0]]).0;
            let b = quintic(h, t, [y0[1], y1[1]], [d0[1], d1[1]], [dd0[1], dd1[1]]).0;
            (a, b)
        };
        if zeta < 0.0 {
            (p1, -p2)
        } else {
            (p1, p2)
        }
    }

    /// `zeta` derivatives from the Lax equation.
    pub fn eval_derivative(&self, zeta: f64) -> (f64, f64) {
        let (p1, p2) = self.eval(zeta);
        let (d, _) = self.deriv(zeta, [p1, p2]);
        (d[0], d[1])
    }

    /// Number of accepted integrator steps on `[0, zeta_max]`.
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `zeta,phi1,phi2` over the stored symmetric grid.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# psi v1 s={} zeta_max={}\nzeta,phi1,phi2\n", self.s, self.zeta_max);
        for ((z, a), b) in self.zeta_values.iter().zip(&self.phi1).zip(&self.phi2) {
            out.push_str(&format!("{z:.16e},{a:.16e},{b:.16e}\n"));
        }
        out
    }
}

/// Largest defect of the `s` equation, `d Phi / ds = [[q, zeta], [-zeta, -q]] Phi`,
/// with the left side a central difference of step `ds` across solutions of
/// the `zeta` equation.
pub fn s_compatibility(s: f64, zetas: &[f64], ds: f64, params: &PsiParams, painleve: &PainleveGrid) -> Result<f64> {
    if !(ds > 0.0) {
        return Err(Error::InvalidParameter(format!("ds={ds} must be positive")));
    }
    let mid = integrate_psi(s, params, painleve)?;
    let hi = integrate_psi(s + ds, params, painleve)?;
    let lo = integrate_psi(s - ds, params, painleve)?;
    let mut worst = 0.0f64;
    for &z in zetas {
        let (p1, p2) = mid.eval(z);
        let (h1, h2) = hi.eval(z);
        let (l1, l2) = lo.eval(z);
        let d1 = (h1 - l1) / (2.0 * ds) - (mid.q * p1 + z * p2);
        let d2 = (h2 - l2) / (2.0 * ds) - (-z * p1 - mid.q * p2);
        worst = worst.max(d1.abs()).max(d2.abs());
    }
    Ok(worst)
}

/// The critical kernel `K^crit(u, v; s)`, with the derivative form on the
/// diagonal.
pub fn critical_kernel(u: f64, v: f64, psi: &PsiSolution) -> f64 {
    if (u - v).abs() < 1e-6 {
        let w = 0.5 * (u + v);
        let (p1, p2) = psi.eval(w);
        let (d1, d2) = psi.eval_derivative(w);
        return (d1 * p2 - d2 * p1) / PI;
    }
    let (a1, a2) = psi.eval(u);
    let (b1, b2) = psi.eval(v);
    (a1 * b2 - a2 * b1) / (PI * (u - v))
}

/// `K^crit(u, u; s)` from the integral over the Painleve parameter,
/// `(1/pi) int_{xi_low}^s (Phi^1(u; xi)^2 + Phi^2(u; xi)^2) d xi`, by
/// Simpson's rule with `panels` (even) panels.
pub fn critical_kernel_integral_form(
    u: f64,
    s: f64,
    xi_low: f64,
    panels: usize,
    params: &PsiParams,
    painleve: &PainleveGrid,
) -> Result<f64> {
    let panels = panels + panels % 2;
    let h = (s - xi_low) / panels as f64;
    let mut total = 0.0;
    for j in 0..=panels {
        let xi = xi_low + j as f64 * h;
        let psi = integrate_psi(xi, params, painleve)?;
        let (p1, p2) = psi.eval(u);
        let w = if j == 0 || j == panels { 1.0 } else if j % 2 == 1 { 4.0 } else { 2.0 };
        total += w * (p1 * p1 + p2 * p2);
    }
    Ok(total * h / (3.0 * PI))
}
