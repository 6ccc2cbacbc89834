//! Hastings-McLeod solution of `q'' = s q + 2 q^3` and the Tracy-Widom
//! distributions built from it.
//!
//! The solution is computed as a two-point boundary value problem on
//! `[s_min, s_max]` with the Numerov discretisation and damped Newton
//! iteration. Tail integrals are accumulated from the right with an
//! endpoint-corrected trapezoid rule and closed beyond `s_max` with Airy
//! asymptotics.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::airy::airy;
use crate::error::{Error, Result};

/// Largest mesh the refinement loop will try.
pub const MAX_MESH: usize = 1 << 15;
/// Tail closures above this size mean `s_max` is too small.
pub const CLOSURE_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub s_min: f64,
    pub s_max: f64,
    pub mesh: usize,
    pub tol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams { s_min: -12.0, s_max: 12.0, mesh: 4096, tol: 1e-10 }
    }
}

impl SolverParams {
    fn validate(&self) -> Result<()> {
        if !(self.s_min <= -8.0 && self.s_max >= 8.0 && self.s_max <= 25.0 && self.s_min >= -25.0) {
            return Err(Error::InvalidParameter(format!(
                "need -25 <= s_min <= -8 and 8 <= s_max <= 25, got [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        if self.mesh < 64 || self.mesh > MAX_MESH {
            return Err(Error::InvalidParameter(format!("mesh {} outside [64, {MAX_MESH}]", self.mesh)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }
}

/// Nodal values of the solution on a uniform grid.
#[derive(Clone, Debug)]
pub struct HmSolution {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub qp: Vec<f64>,
    pub residual_norm: f64,
    pub s_max_used: f64,
}

/// Tail integrals `R = int_s^inf q^2`, `E = exp(-1/2 int_s^inf q)` and
/// `F = exp(-1/2 int_s^inf R)` on the solution grid.
#[derive(Clone, Debug)]
pub struct Tails {
    pub r: Vec<f64>,
    pub e: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    F1,
    F2,
}

/// Left boundary value from the two-term expansion at `-inf`.
pub fn left_asymptotic(s: f64) -> f64 {
    (-s / 2.0).sqrt() * (1.0 + 1.0 / (8.0 * s * s * s))
}

fn rhs(s: f64, q: f64) -> f64 {
    s * q + 2.0 * q * q * q
}

fn initial_guess(s: f64) -> f64 {
    let right = if s >= -1.0 { airy(s).map(|(a, _)| a).unwrap_or(0.0) } else { 0.0 };
    let left = if s <= 1.0 { (-s / 2.0).max(0.0).sqrt() } else { 0.0 };
    if s <= -1.0 {
        left
    } else if s >= 1.0 {
        right
    } else {
        let w = 0.5 - 0.5 * (std::f64::consts::PI * (s + 1.0) / 2.0).cos();
        (1.0 - w) * left + w * right
    }
}

/// Solves the tridiagonal system `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = b[i]`.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], b: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = upper[0] / d;
    b[0] /= d;
    for i in 1..n {
        d = diag[i] - lower[i] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / d;
        }
        b[i] = (b[i] - lower[i] * b[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        b[i] -= c[i] * b[i + 1];
    }
}

fn numerov_defect(s: &[f64], q: &[f64], h2: f64, out: &mut [f64]) -> f64 {
    let m = q.len() - 1;
    let mut worst = 0.0f64;
    for i in 1..m {
        let g = q[i + 1] - 2.0 * q[i] + q[i - 1]
            - h2 / 12.0 * (rhs(s[i + 1], q[i + 1]) + 10.0 * rhs(s[i], q[i]) + rhs(s[i - 1], q[i - 1]));
        out[i - 1] = g;
        worst = worst.max(g.abs());
    }
    worst
}

fn newton(s: &[f64], q: &mut [f64], h: f64) -> Result<()> {
    let m = q.len() - 1;
    let h2 = h * h;
    let n = m - 1;
    let mut g = vec![0.0; n];
    let mut norm = numerov_defect(s, q, h2, &mut g);
    let (mut lower, mut diag, mut upper) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let dfdq = |i: usize, q: &[f64]| s[i] + 6.0 * q[i] * q[i];
    let mut trial = q.to_vec();
    let mut gt = vec![0.0; n];
    for iteration in 0..200 {
        if norm < 1e-15 {
            return Ok(());
        }
        for k in 0..n {
            let i = k + 1;
            lower[k] = 1.0 - h2 / 12.0 * dfdq(i - 1, q);
            diag[k] = -2.0 - 10.0 * h2 / 12.0 * dfdq(i, q);
            upper[k] = 1.0 - h2 / 12.0 * dfdq(i + 1, q);
        }
        let mut delta: Vec<f64> = g.iter().map(|v| -v).collect();
        thomas(&lower, &diag, &upper, &mut delta);
        let step = delta.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut lambda = 1.0;
        loop {
            trial.copy_from_slice(q);
            for k in 0..n {
                trial[k + 1] += lambda * delta[k];
            }
            let tn = numerov_defect(s, &trial, h2, &mut gt);
            if tn < norm || lambda < 1e-4 || step < 1e-14 {
                q.copy_from_slice(&trial);
                std::mem::swap(&mut g, &mut gt);
                let converged = step * lambda < 1e-14 && tn <= norm * 1.5;
                norm = tn;
                if converged {
                    return Ok(());
                }
                break;
            }
            lambda *= 0.5;
        }
        if iteration == 199 {
            return Err(Error::NewtonDiverged { iterations: 200, residual: norm });
        }
    }
    Err(Error::NewtonDiverged { iterations: 200, residual: norm })
}

/// Fourth-order first derivative on a uniform grid, one-sided at the ends.
fn derivative(q: &[f64], h: f64) -> Vec<f64> {
    let m = q.len() - 1;
    let mut d = vec![0.0; m + 1];
    for i in 2..m - 1 {
        d[i] = (q[i - 2] - 8.0 * q[i - 1] + 8.0 * q[i + 1] - q[i + 2]) / (12.0 * h);
    }
    let fwd = |a: [f64; 5]| (-25.0 * a[0] + 48.0 * a[1] - 36.0 * a[2] + 16.0 * a[3] - 3.0 * a[4]) / (12.0 * h);
    let one = |a: [f64; 5]| (-3.0 * a[0] - 10.0 * a[1] + 18.0 * a[2] - 6.0 * a[3] + a[4]) / (12.0 * h);
    d[0] = fwd([q[0], q[1], q[2], q[3], q[4]]);
    d[1] = one([q[0], q[1], q[2], q[3], q[4]]);
    d[m] = -fwd([q[m], q[m - 1], q[m - 2], q[m - 3], q[m - 4]]);
    d[m - 1] = -one([q[m], q[m - 1], q[m - 2], q[m - 3], q[m - 4]]);
    d
}

/// Max over interior nodes of `|D4 q - (s q + 2 q^3)|`, with `D4` the
/// five-point fourth-order second difference.
pub fn ode_residual(s: &[f64], q: &[f64]) -> f64 {
    let h = s[1] - s[0];
    let m = q.len() - 1;
    let mut worst = 0.0f64;
    for i in 2..m - 1 {
        let d2 = (-q[i + 2] + 16.0 * q[i + 1] - 30.0 * q[i] + 16.0 * q[i - 1] - q[i - 2]) / (12.0 * h * h);
        worst = worst.max((d2 - rhs(s[i], q[i])).abs());
    }
    worst
}

fn grid(s_min: f64, s_max: f64, mesh: usize) -> (Vec<f64>, f64) {
    let h = (s_max - s_min) / mesh as f64;
    ((0..=mesh).map(|i| if i == mesh { s_max } else { s_min + i as f64 * h }).collect(), h)
}

fn solve_on_mesh(p: &SolverParams, mesh: usize, guess: &dyn Fn(f64) -> f64) -> Result<HmSolution> {
    let (s, h) = grid(p.s_min, p.s_max, mesh);
    let mut q: Vec<f64> = s.iter().map(|&t| guess(t)).collect();
    q[0] = left_asymptotic(p.s_min);
    q[mesh] = airy(p.s_max)?.0;
    newton(&s, &mut q, h)?;
    let qp = derivative(&q, h);
    let residual_norm = ode_residual(&s, &q);
    Ok(HmSolution { s, q, qp, residual_norm, s_max_used: p.s_max })
}

/// Solves for the Hastings-McLeod solution, doubling the mesh while the ODE
/// residual exceeds `tol` and keeps improving.
pub fn solve_hastings_mcleod(p: &SolverParams) -> Result<HmSolution> {
    p.validate()?;
    let mut mesh = p.mesh;
    let mut sol = solve_on_mesh(p, mesh, &initial_guess)?;
    while sol.residual_norm > p.tol && mesh * 2 <= MAX_MESH {
        let prev = sol.clone();
        mesh *= 2;
        let next = solve_on_mesh(p, mesh, &|t| interpolate_linear(&prev.s, &prev.q, t))?;
        if next.residual_norm >= prev.residual_norm {
            sol = prev;
            break;
        }
        sol = next;
    }
    if sol.residual_norm > p.tol {
        return Err(Error::NewtonDiverged { iterations: 0, residual: sol.residual_norm });
    }
    Ok(sol)
}

fn interpolate_linear(s: &[f64], v: &[f64], t: f64) -> f64 {
    let h = s[1] - s[0];
    let i = (((t - s[0]) / h).floor() as usize).min(s.len() - 2);
    let w = (t - s[i]) / h;
    (1.0 - w) * v[i] + w * v[i + 1]
}

/// Closures of the three tail integrals beyond `s`, assuming `q = Ai` there.
pub fn tail_closures(s: f64) -> Result<(f64, f64, f64)> {
    let (a, ap) = airy(s)?;
    let int_q2 = ap * ap - s * a * a;
    let int_q = a / s.sqrt();
    let int_r = (2.0 / 3.0) * s * s * a * a - (2.0 / 3.0) * s * ap * ap - a * ap / 3.0;
    Ok((int_q2, int_q, int_r))
}

/// Accumulates `R`, `E` and `F` from the right end of the grid.
pub fn accumulate_tails(sol: &HmSolution) -> Result<Tails> {
    let n = sol.s.len();
    let h = sol.s[1] - sol.s[0];
    let (c2, c1, cr) = tail_closures(sol.s_max_used)?;
    let worst = c2.abs().max(c1.abs()).max(cr.abs());
    if worst > CLOSURE_LIMIT {
        return Err(Error::GridTooShort { closure: worst, tol: CLOSURE_LIMIT });
    }
    // Per-interval trapezoid with the endpoint derivative correction.
    let piece = |g0: f64, g1: f64, d0: f64, d1: f64| 0.5 * h * (g0 + g1) + h * h / 12.0 * (d0 - d1);
    let (q, qp) = (&sol.q, &sol.qp);
    let mut r = vec![0.0; n];
    let mut int_q = vec![0.0; n];
    let mut int_r = vec![0.0; n];
    r[n - 1] = c2;
    int_q[n - 1] = c1;
    int_r[n - 1] = cr;
    for i in (0..n - 1).rev() {
        r[i] = r[i + 1] + piece(q[i] * q[i], q[i + 1] * q[i + 1], 2.0 * q[i] * qp[i], 2.0 * q[i + 1] * qp[i + 1]);
        int_q[i] = int_q[i + 1] + piece(q[i], q[i + 1], qp[i], qp[i + 1]);
    }
    for i in (0..n - 1).rev() {
        int_r[i] = int_r[i + 1] + piece(r[i], r[i + 1], -q[i] * q[i], -q[i + 1] * q[i + 1]);
    }
    let e = int_q.iter().map(|v| (-0.5 * v).exp()).collect();
    let f = int_r.iter().map(|v| (-0.5 * v).exp()).collect();
    Ok(Tails { r, e, f })
}

/// Solution plus tails, the unit that is cached on disk.
#[derive(Clone, Debug)]
pub struct PainleveGrid {
    pub params: SolverParams,
    pub sol: HmSolution,
    pub tails: Tails,
}

/// Values of the transcendent and its tails at an arbitrary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointValues {
    pub q: f64,
    pub qp: f64,
    pub r: f64,
    pub e: f64,
    pub f: f64,
}

fn hermite_cubic(h: f64, t: f64, y0: f64, y1: f64, d0: f64, d1: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
}

pub(crate) fn quintic(h: f64, t: f64, y: [f64; 2], d: [f64; 2], dd: [f64; 2]) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
    let dh0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let dh1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let dh2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let dh5 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
    let dh4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let dh3 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
    let v = h0 * y[0] + h * h1 * d[0] + h * h * h2 * dd[0] + h5 * y[1] + h * h4 * d[1] + h * h * h3 * dd[1];
    let dv = (dh0 * y[0] + h * dh1 * d[0] + h * h * dh2 * dd[0] + dh5 * y[1] + h * dh4 * d[1] + h * h * dh3 * dd[1]) / h;
    (v, dv)
}


impl PainleveGrid {
    pub fn compute(params: SolverParams) -> Result<Self> {
        let sol = solve_hastings_mcleod(&params)?;
        let tails = accumulate_tails(&sol)?;
        Ok(PainleveGrid { params, sol, tails })
    }

    pub fn s_min(&self) -> f64 {
        self.sol.s[0]
    }

    pub fn s_max(&self) -> f64 {
        self.sol.s_max_used
    }

    pub fn mesh(&self) -> usize {
        self.sol.s.len() - 1
    }

    /// Interpolated `q`, `q'`, `R`, `E`, `F` at `s`. Beyond `s_max` the
    /// Airy closures are used directly.
    pub fn at(&self, s: f64) -> Result<PointValues> {
        let (lo, hi) = (self.s_min(), self.s_max());
        if !(s >= lo) {
            return Err(Error::OutOfRange { x: s, lo, hi: f64::INFINITY });
        }
        if s >= hi {
            let (a, ap) = airy(s.min(crate::airy::AIRY_MAX_ABS))?;
            let (r, iq, ir) = tail_closures(s.min(crate::airy::AIRY_MAX_ABS))?;
            return Ok(PointValues { q: a, qp: ap, r, e: (-0.5 * iq).exp(), f: (-0.5 * ir).exp() });
        }
        let sol = &self.sol;
        let h = sol.s[1] - sol.s[0];
        let i = (((s - lo) / h).floor() as usize).min(sol.s.len() - 2);
        let t = (s - sol.s[i]) / h;
        let (s0, s1) = (sol.s[i], sol.s[i + 1]);
        let (q0, q1) = (sol.q[i], sol.q[i + 1]);
        let (p0, p1) = (sol.qp[i], sol.qp[i + 1]);
        let (q, qp) = quintic(h, t, [q0, q1], [p0, p1], [rhs(s0, q0), rhs(s1, q1)]);
        let tl = &self.tails;
        let r = quintic(h, t, [tl.r[i], tl.r[i + 1]], [-q0 * q0, -q1 * q1], [-2.0 * q0 * p0, -2.0 * q1 * p1]).0;
        let e = hermite_cubic(h, t, tl.e[i], tl.e[i + 1], 0.5 * q0 * tl.e[i], 0.5 * q1 * tl.e[i + 1]);
        let f = hermite_cubic(h, t, tl.f[i], tl.f[i + 1], 0.5 * tl.r[i] * tl.f[i], 0.5 * tl.r[i + 1] * tl.f[i + 1]);
        Ok(PointValues { q, qp, r, e, f })
    }

    /// `F_1(x) = F E` or `F_2(x) = F^2`, clamped to `[0, 1]`.
    pub fn tracy_widom(&self, x: f64, which: Which) -> Result<f64> {
        let v = self.at(x)?;
        let val = match which {
            Which::F1 => v.f * v.e,
            Which::F2 => v.f * v.f,
        };
        Ok(val.clamp(0.0, 1.0))
    }

    pub fn cache_file_name(params: &SolverParams) -> String {
        format!(
            "painleve_{}_{}_{}_{:e}.csv",
            params.s_min, params.s_max, params.mesh, params.tol
        )
    }

    fn header(&self) -> String {
        let p = &self.params;
        format!("# painleve-grid v1 s_min={} s_max={} mesh={} tol={:e}", p.s_min, p.s_max, p.mesh, p.tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header());
        out.push('\n');
        out.push_str("s,q,qp,R,E,F,F1,F2\n");
        let (sol, t) = (&self.sol, &self.tails);
        for i in 0..sol.s.len() {
            let row = [sol.s[i], sol.q[i], sol.qp[i], t.r[i], t.e[i], t.f[i], t.f[i] * t.e[i], t.f[i] * t.f[i]];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let bad = |reason: &str| Error::CacheFormat { path: origin.to_string(), reason: reason.to_string() };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file"))?;
        let rest = header.strip_prefix("# painleve-grid v1 ").ok_or_else(|| bad("missing header"))?;
        let mut params = SolverParams::default();
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("bad header field"))?;
            match k {
                "s_min" => params.s_min = v.parse().map_err(|_| bad("bad s_min"))?,
                "s_max" => params.s_max = v.parse().map_err(|_| bad("bad s_max"))?,
                "mesh" => params.mesh = v.parse().map_err(|_| bad("bad mesh"))?,
                "tol" => params.tol = v.parse().map_err(|_| bad("bad tol"))?,
                _ => return Err(bad("unknown header field")),
            }
        }
        if lines.next() != Some("s,q,qp,R,E,F,F1,F2") {
            return Err(bad("missing column line"));
        }
        let mut cols: [Vec<f64>; 6] = Default::default();
        for line in lines {
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad("unparsable number"))?;
            if vals.len() != 8 {
                return Err(bad("wrong column count"));
            }
            for (c, v) in cols.iter_mut().zip(vals) {
                c.push(v);
            }
        }
        if cols[0].len() < 8 {
            return Err(bad("too few rows"));
        }
        let [s, q, qp, r, e, f] = cols;
        let residual_norm = ode_residual(&s, &q);
        let s_max_used = *s.last().unwrap();
        Ok(PainleveGrid { params, sol: HmSolution { s, q, qp, residual_norm, s_max_used }, tails: Tails { r, e, f } })
    }

    /// Loads the grid for `params` from `dir`, computing and storing it on a miss.
    pub fn cached(params: SolverParams, dir: &Path) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(&params));
        if let Ok(text) = fs::read_to_string(&path) {
            let grid = Self::from_csv(&text, &path.display().to_string())?;
            if grid.params == params {
                return Ok(grid);
            }
        }
        let grid = Self::compute(params)?;
        fs::create_dir_all(dir)?;
        let tmp = path.with_extension("csv.tmp");
        let mut file = fs::File::create(&tmp)?;
        file.write_all(grid.to_csv().as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, &path)?;
        Ok(grid)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_solves_small_system() {
        let mut b = vec![1.0, 2.0, 3.0];
        thomas(&[0.0, 1.0, 1.0], &[4.0, 4.0, 4.0], &[1.0, 1.0, 0.0], &mut b);
        let x = b;
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15);
        assert!((x[0] + 4.0 * x[1] + x[2] - 2.0).abs() < 1e-15);
        assert!((x[1] + 4.0 * x[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn quintic_reproduces_polynomials() {
        let p = |x: f64| 1.0 + 2.0 * x - x * x + 0.5 * x.powi(3) - 0.25 * x.powi(4) + 0.1 * x.powi(5);
        let dp = |x: f64| 2.0 - 2.0 * x + 1.5 * x * x - x.powi(3) + 0.5 * x.powi(4);
        let ddp = |x: f64| -2.0 + 3.0 * x - 3.0 * x * x + 2.0 * x.powi(3);
        let (a, b) = (0.3, 0.8);
        let h = b - a;
        for t in [0.0, 0.3, 0.77, 1.0] {
            let (v, d) = quintic(h, t, [p(a), p(b)], [dp(a), dp(b)], [ddp(a), ddp(b)]);
            let x = a + t * h;
            assert!((v - p(x)).abs() < 1e-14 && (d - dp(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_is_fourth_order_exact_on_quartics() {
        let h = 0.1;
        let q: Vec<f64> = (0..20).map(|i| (i as f64 * h).powi(4)).collect();
        let d = derivative(&q, h);
        for (i, v) in d.iter().enumerate() {
            let x = i as f64 * h;
            assert!((v - 4.0 * x.powi(3)).abs() < 1e-10, "{i}");
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = SolverParams { s_min: -5.0, ..Default::default() };
        assert!(solve_hastings_mcleod(&p).is_err());
    }
}
