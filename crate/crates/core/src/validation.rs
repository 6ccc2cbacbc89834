//! Numbered acceptance checks over the whole library. Each check returns a
//! pass/fail verdict with a one-line summary of the measured quantities.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::airy::ai;
use crate::asym::{
    a_harness, free_energy_theorem_check, h_harness, kernel_theorem_check, subcritical_harness, KERNEL_SCALE,
};
use crate::dgop::{rescale_check, toda_residual, LatticeSpec, OrthoSystem, Precision};
use crate::error::Result;
use crate::oracle::{airy_kernel_determinant, hastings_mcleod_shooting, watermelon_brute_force};
use crate::painleve::{ode_residual, PainleveGrid, SolverParams, Which};
use crate::psi::{integrate_psi, s_compatibility, PsiParams};
use crate::watermelon::{
    convergence_study, default_k_grid, height_cdf, riemann_sum_order, small_a_check, Ensemble, Wall,
};

pub const CRITERIA: std::ops::RangeInclusive<u8> = 1..=15;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<28} {} ({:.2} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "hastings-mcleod",
        2 => "f2-fredholm",
        3 => "cdf-structure",
        4 => "height-oracle",
        5 => "height-convergence",
        6 => "toda-identity",
        7 => "lattice-rescaling",
        8 => "norm-asymptotics",
        9 => "subcritical-norms",
        10 => "critical-kernel",
        11 => "free-energy",
        12 => "riemann-sum-order",
        13 => "kernel-algebra",
        14 => "small-a-tail",
        15 => "lax-compatibility",
        _ => "unknown",
    }
}

/// Module suites and the criteria they own.
pub fn suite_criteria(suite: &str) -> Option<Vec<u8>> {
    let ids = match suite {
        "all" => CRITERIA.collect(),
        "painleve" => vec![1, 2, 3],
        "psikernel" => vec![15],
        "dgop" => vec![6, 7, 13],
        "watermelon" => vec![4, 5, 12, 14],
        "asym" => vec![8, 9, 10, 11],
        _ => return None,
    };
    Some(ids)
}

/// Runs one criterion. Failures of the numerics themselves are reported as
/// a failed criterion carrying the error message.
pub fn run_criterion(id: u8, painleve: &PainleveGrid) -> CriterionReport {
    let start = Instant::now();
    let outcome = match id {
        1 => hastings_mcleod(),
        2 => f2_fredholm(painleve),
        3 => cdf_structure(painleve),
        4 => height_oracle(),
        5 => height_convergence(painleve),
        6 => toda_identity(),
        7 => lattice_rescaling(),
        8 => norm_asymptotics(painleve),
        9 => subcritical_norms(),
        10 => critical_kernel_limit(painleve),
        11 => free_energy(painleve),
        12 => riemann_order(),
        13 => kernel_algebra(),
        14 => small_a(),
        15 => lax_compatibility(painleve),
        _ => Ok((false, format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    if let Some(limit) = runtime_limit(id) {
        if elapsed > limit {
            passed = false;
            detail.push_str(&format!(" [runtime {:.1} s over {} s]", elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
    CriterionReport { id, name: criterion_name(id), passed, detail, elapsed }
}

fn runtime_limit(id: u8) -> Option<Duration> {
    let secs = match id {
        1 => 10,
        2 => 30,
        4 => 5,
        5 => 300,
        6 => 30,
        8 => 120,
        10 => 180,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

pub fn run_all(ids: &[u8], painleve: &PainleveGrid) -> Vec<CriterionReport> {
    ids.iter().map(|&id| run_criterion(id, painleve)).collect()
}

type Outcome = Result<(bool, String)>;

fn hastings_mcleod() -> Outcome {
    let grid = PainleveGrid::compute(SolverParams::default())?;
    let sol = &grid.sol;
    let lo = sol.s.partition_point(|&s| s < -10.0).saturating_sub(2);
    let hi = (sol.s.partition_point(|&s| s <= 10.0) + 2).min(sol.s.len());
    let residual = ode_residual(&sol.s[lo..hi], &sol.q[lo..hi]);
    let ratio = (grid.at(8.0)?.q / ai(8.0)? - 1.0).abs();
    let shot = hastings_mcleod_shooting(&[0.0])?[0].0;
    let diff = (grid.at(0.0)?.q - shot).abs();
    Ok((
        residual <= 1e-8 && ratio <= 1e-5 && diff <= 1e-7,
        format!("residual {residual:.2e}, |q(8)/Ai(8)-1| {ratio:.2e}, |q(0)-shooting| {diff:.2e}"),
    ))
}

fn f2_fredholm(painleve: &PainleveGrid) -> Outcome {
    let mut worst = 0.0f64;
    for x in -4..=2 {
        let x = x as f64;
        worst = worst.max((painleve.tracy_widom(x, Which::F2)? - airy_kernel_determinant(x)?).abs());
    }
    Ok((worst <= 1e-5, format!("max |F2 - det(I - K_Ai)| {worst:.2e}")))
}

fn cdf_structure(painleve: &PainleveGrid) -> Outcome {
    let slack = 4.0 * f64::EPSILON;
    let (mut prev1, mut prev2) = (0.0, 0.0);
    let (mut monotone, mut bounded, mut ordered) = (true, true, true);
    for &s in &painleve.sol.s {
        let f1 = painleve.tracy_widom(s, Which::F1)?;
        let f2 = painleve.tracy_widom(s, Which::F2)?;
        monotone &= f1 >= prev1 - slack && f2 >= prev2 - slack;
        bounded &= (0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2);
        ordered &= f1 <= f2.sqrt() + slack;
        prev1 = f1;
        prev2 = f2;
    }
    Ok((
        monotone && bounded && ordered,
        format!("{} nodes: monotone {monotone}, in [0,1] {bounded}, F1 <= sqrt F2 {ordered}", painleve.sol.s.len()),
    ))
}

fn height_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for wall in [Wall::Absorbing, Wall::Reflecting] {
        for n in [1, 2] {
            for m in [1.5, 2.5, 4.0] {
                let p = height_cdf(n, m, wall)?.cdf;
                worst = worst.max((p - watermelon_brute_force(n, m, wall)?).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max |p_OP - p_brute| {worst:.2e}")))
}

fn height_convergence(painleve: &PainleveGrid) -> Outcome {
    let grid = default_k_grid();
    let mut pass = true;
    let mut detail = Vec::new();
    for wall in [Wall::Absorbing, Wall::Reflecting] {
        let d = convergence_study(&[8, 16, 32, 64], &grid, wall, painleve)?;
        let dec = d.windows(2).all(|w| w[1].1 < w[0].1);
        pass &= dec && d[3].1 < d[0].1 / 2.0;
        let vals: Vec<String> = d.iter().map(|(n, v)| format!("{n}:{v:.4}")).collect();
        detail.push(format!("{} d_N {}", wall.name(), vals.join(" ")));
    }
    Ok((pass, detail.join("; ")))
}

fn toda_identity() -> Outcome {
    let cases: Vec<(f64, f64)> = [0.8, 1.0, 1.1].iter().flat_map(|&a| [(a, 0.0), (a, 0.25)]).collect();
    let ratios = cases
        .par_iter()
        .map(|&(a, alpha)| {
            let coarse = toda_residual(24, alpha, a, 0.02, Precision::Standard)?;
            let fine = toda_residual(24, alpha, a, 0.01, Precision::Standard)?;
            Ok(coarse.defect / fine.defect)
        })
        .collect::<Result<Vec<f64>>>()?;
    let pass = ratios.iter().all(|r| (3.2..=4.8).contains(r));
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    Ok((pass, format!("defect ratios under delta -> delta/2: {}", shown.join(" "))))
}

fn lattice_rescaling() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.0, 0.25] {
        let sys = OrthoSystem::build(LatticeSpec::new(30, alpha), 1.0, 20, Precision::Standard)?;
        for dir in [1, -1] {
            worst = worst.max(rescale_check(&sys, dir)?);
        }
    }
    Ok((worst <= 1e-9, format!("max relative defect {worst:.2e}")))
}

fn ratio_ok(r: f64) -> bool {
    (0.3..=0.8).contains(&r)
}

fn norm_asymptotics(painleve: &PainleveGrid) -> Outcome {
    let ns = [32usize, 64, 128, 256];
    let mut pass = true;
    let mut worst = (f64::INFINITY, f64::NEG_INFINITY);
    let cases: Vec<(f64, f64)> = [-1.0, 0.0, 2.0].iter().flat_map(|&x| [(x, 0.0), (x, 0.25)]).collect();
    let rows = cases
        .par_iter()
        .map(|&(x, alpha)| {
            let h = ns
                .iter()
                .map(|&n| h_harness(n, alpha, x, painleve, Precision::Standard))
                .collect::<Result<Vec<_>>>()?;
            let a = if alpha != 0.0 {
                ns.iter()
                    .map(|&n| a_harness(n, alpha, x, painleve, Precision::Standard).map(|r| r.rel_err))
                    .collect::<Result<Vec<_>>>()?
            } else {
                Vec::new()
            };
            Ok((h, a))
        })
        .collect::<Result<Vec<_>>>()?;
    for (h, a) in rows {
        for line in 0..2 {
            for w in h.windows(2) {
                let r = w[1][line].rel_err / w[0][line].rel_err;
                pass &= ratio_ok(r);
                worst = (worst.0.min(r), worst.1.max(r));
            }
        }
        for w in a.windows(2) {
            let r = w[1] / w[0];
            pass &= ratio_ok(r);
            worst = (worst.0.min(r), worst.1.max(r));
        }
    }
    Ok((pass, format!("err(2n)/err(n) over n=32..128 in [{:.3}, {:.3}]", worst.0, worst.1)))
}

fn subcritical_norms() -> Outcome {
    let n = 40;
    let bound = 10.0 / (n as f64).powi(4);
    let rows = subcritical_harness(n, 0.25, 0.5, Precision::Standard)?;
    let err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    let sys = OrthoSystem::build(LatticeSpec::new(n, 0.25), 0.5, n, Precision::Standard)?;
    let max_a = sys.a_coef.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    Ok((
        err <= bound && max_a <= 1e-10,
        format!("max rel err {err:.2e} (bound {bound:.2e}), max |A| {max_a:.2e}"),
    ))
}

/// Pairs `(u, v)` with `u, v` in `{-1, -1/2, 1/2, 1}`.
pub fn kernel_pairs() -> Vec<(f64, f64)> {
    let pts = [-1.0, -0.5, 0.5, 1.0];
    pts.iter().flat_map(|&u| pts.iter().map(move |&v| (u, v))).collect()
}

fn critical_kernel_limit(painleve: &PainleveGrid) -> Outcome {
    let l = 1.0;
    let psi = integrate_psi(4f64.cbrt() * l, &PsiParams::default(), painleve)?;
    let pairs = kernel_pairs();
    let mut norms = Vec::new();
    for n in [64usize, 128] {
        let table = kernel_theorem_check(n, 0.0, l, &pairs, &psi, Precision::Standard)?;
        if !table.collisions.is_empty() {
            return Ok((false, format!("lattice collisions at n={n}: {:?}", table.collisions)));
        }
        norms.push(table.norm_differences());
    }
    let (off64, diag64) = norms[0];
    let (off128, diag128) = norms[1];
    Ok((
        off128 < off64 && diag128 < diag64,
        format!(
            "normwise rel diff off-diagonal {off64:.3e} -> {off128:.3e}, diagonal {diag64:.3e} -> {diag128:.3e} (c = {KERNEL_SCALE:.6})"
        ),
    ))
}

fn free_energy(painleve: &PainleveGrid) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for l in [-1.0, 0.0, 1.0] {
        let r32 = free_energy_theorem_check(32, 0.0, l, painleve, Precision::Standard)?.residual;
        let r64 = free_energy_theorem_check(64, 0.0, l, painleve, Precision::Standard)?.residual;
        pass &= r64 < r32 && r32 <= 1e-2 && r64 <= 1e-2;
        detail.push(format!("L={l}: {r32:.2e} -> {r64:.2e}"));
    }
    Ok((pass, detail.join(", ")))
}

fn riemann_order() -> Outcome {
    let eps = [0.2, 0.1, 0.05];
    let mut pass = true;
    let mut detail = Vec::new();
    for ens in [Ensemble::Lue, Ensemble::Gue] {
        match riemann_sum_order(2, &eps, ens) {
            Ok(fit) => {
                pass &= (3.5..=4.5).contains(&fit.slope);
                detail.push(format!("{ens:?} slope {:.3}", fit.slope));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{ens:?}: {e}"));
            }
        }
    }
    Ok((pass, detail.join("; ")))
}

fn kernel_algebra() -> Outcome {
    let mut worst_trace = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut in_unit = true;
    for (alpha, a) in [(0.25, 0.8), (0.0, 1.2), (0.5, 1.0)] {
        let n = 24;
        let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n - 1, Precision::Standard)?;
        let m = sys.lattice.nodes.len();
        let diag: Vec<f64> = (0..m).map(|i| sys.cd_kernel_at(i, i, n)).collect();
        worst_trace = worst_trace.max((diag.iter().sum::<f64>() - n as f64).abs());
        in_unit &= diag.iter().all(|&d| (-1e-14..=1.0 + 1e-12).contains(&d));
        let centre = m / 2;
        let probe: Vec<usize> = (centre.saturating_sub(12)..(centre + 12).min(m)).step_by(3).collect();
        for &i in &probe {
            for &j in &probe {
                let kk: f64 = (0..m).map(|z| sys.cd_kernel_at(i, z, n) * sys.cd_kernel_at(z, j, n)).sum();
                worst_idem = worst_idem.max((kk - sys.cd_kernel_at(i, j, n)).abs());
            }
        }
    }
    Ok((
        worst_trace <= 1e-8 && worst_idem <= 1e-8 && in_unit,
        format!("|tr K - n| {worst_trace:.2e}, |K^2 - K| {worst_idem:.2e}, 0 <= K(x,x) <= 1 {in_unit}"),
    ))
}

fn small_a() -> Outcome {
    let a_list = [0.02, 0.01, 0.005];
    let mut pass = true;
    let mut detail = Vec::new();
    for n in [2, 8] {
        match small_a_check(n, &a_list) {
            Ok(v) => {
                let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
                pass &= lo > 0.0 && hi / lo <= 2.0;
                detail.push(format!("N={n}: ratios {v:?}"));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("N={n}: {e}"));
            }
        }
    }
    Ok((pass, detail.join("; ")))
}

fn lax_compatibility(painleve: &PainleveGrid) -> Outcome {
    let zetas = [-2.0, -0.7, 0.0, 0.4, 1.3, 2.5];
    let params = PsiParams::default();
    let mut pass = true;
    let mut detail = Vec::new();
    for s in [-1.0, 0.5] {
        let d: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&ds| s_compatibility(s, &zetas, ds, &params, painleve))
            .collect::<Result<_>>()?;
        let (r1, r2) = (d[0] / d[1], d[1] / d[2]);
        pass &= (3.2..=4.8).contains(&r1) && (3.2..=4.8).contains(&r2);
        detail.push(format!("s={s}: defects {:.2e} {:.2e} {:.2e}, ratios {r1:.3} {r2:.3}", d[0], d[1], d[2]));
    }
    Ok((pass, detail.join("; ")))
}
