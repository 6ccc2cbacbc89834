//! Command implementations. Each returns the table to emit.

use std::time::Instant;

use watermelon_core::asym::{free_energy_theorem_check, kernel_theorem_check};
use watermelon_core::dgop::{LatticeSpec, OrthoSystem};
use watermelon_core::painleve::{PainleveGrid, SolverParams, Which};
use watermelon_core::psi::{integrate_psi, PsiParams};
use watermelon_core::validation::{run_criterion, suite_criteria};
use watermelon_core::watermelon::{convergence_study, height_distribution, rescaled_distribution, Wall};

use crate::config::RunConfig;
use crate::table::{Cell, Table, WALL_CLOCK_KEY};
use crate::Failure;

/// Parses `start:stop:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid '{spec}' is not start:stop:step"));
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("'{s}' in grid '{spec}' is not a number"));
    let (a, b, h) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err(format!("grid '{spec}' needs start <= stop and step > 0"));
    }
    let count = ((b - a) / h + 1e-9).floor() as usize + 1;
    if count > 1_000_000 {
        return Err(format!("grid '{spec}' has more than 10^6 points"));
    }
    Ok((0..count).map(|i| a + i as f64 * h).collect())
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(spec: &str) -> Result<Vec<T>, String> {
    let out = spec
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| format!("'{s}' in list '{spec}' is malformed")))
        .collect::<Result<Vec<T>, String>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn painleve(cfg: &RunConfig) -> Result<PainleveGrid, Failure> {
    Ok(PainleveGrid::cached(SolverParams::default(), &cfg.cache_dir)?)
}

fn start_table(command: &str, columns: &[&str], cfg: &RunConfig, params: &[(&str, String)]) -> Table {
    let mut t = Table::new(columns);
    t.meta("tool", format!("watermelon {}", env!("CARGO_PKG_VERSION")));
    t.meta("command", command);
    for (k, v) in params {
        t.meta(k, v);
    }
    t.meta("precision", format!("{:?}", cfg.precision).to_lowercase());
    t.meta("tail_tol", format!("{:e}", cfg.tail_tol));
    t
}

fn finish(mut t: Table, started: Instant) -> Table {
    t.meta(WALL_CLOCK_KEY, format!("{:.3}", started.elapsed().as_secs_f64()));
    t
}

pub fn tw(cfg: &RunConfig, which: Which, xs: &[f64]) -> Result<Table, Failure> {
    let started = Instant::now();
    let grid = painleve(cfg)?;
    let name = if which == Which::F1 { "F1" } else { "F2" };
    let mut t = start_table("tw", &["x", name], cfg, &[("which", name.to_string()), ("points", xs.len().to_string())]);
    for &x in xs {
        t.push(vec![x.into(), grid.tracy_widom(x, which)?.into()]);
    }
    Ok(finish(t, started))
}

pub enum HeightGrid {
    Rescaled(Vec<f64>),
    Barrier(Vec<f64>),
}

pub fn height(cfg: &RunConfig, n: usize, wall: Wall, grid: &HeightGrid) -> Result<Table, Failure> {
    let started = Instant::now();
    let params = [("N", n.to_string()), ("wall", wall.name().to_string())];
    let mut t = start_table("height", &["k", "M", "cdf"], cfg, &params);
    match grid {
        HeightGrid::Rescaled(ks) => {
            let d = rescaled_distribution(n, wall, ks)?;
            for ((k, m), p) in ks.iter().zip(&d.m_values).zip(&d.cdf) {
                t.push(vec![(*k).into(), (*m).into(), (*p).into()]);
            }
        }
        HeightGrid::Barrier(ms) => {
            t.columns.remove(0);
            let d = height_distribution(n, wall, ms)?;
            for (m, p) in d.m_values.iter().zip(&d.cdf) {
                t.push(vec![(*m).into(), (*p).into()]);
            }
        }
    }
    Ok(finish(t, started))
}

pub fn converge(cfg: &RunConfig, walls: &[Wall], ns: &[usize], ks: &[f64]) -> Result<Table, Failure> {
    let started = Instant::now();
    let grid = painleve(cfg)?;
    let params = [("k_points", ks.len().to_string())];
    let mut t = start_table("converge", &["wall", "N", "d_N"], cfg, &params);
    for &wall in walls {
        for (n, d) in convergence_study(ns, ks, wall, &grid)? {
            t.push(vec![wall.name().into(), n.into(), d.into()]);
        }
    }
    Ok(finish(t, started))
}

pub fn dgop(cfg: &RunConfig, n: usize, alpha: f64, a: f64, kmax: usize) -> Result<Table, Failure> {
    let started = Instant::now();
    let spec = LatticeSpec { n, alpha, tail_tol: cfg.tail_tol };
    let sys = OrthoSystem::build(spec, a, kmax, cfg.precision)?;
    let params = [
        ("n", n.to_string()),
        ("alpha", alpha.to_string()),
        ("a", a.to_string()),
        ("kmax", kmax.to_string()),
        ("nodes", sys.lattice.nodes.len().to_string()),
    ];
    let mut t = start_table("dgop", &["k", "A", "B", "log_h"], cfg, &params);
    for k in 0..=kmax {
        t.push(vec![k.into(), sys.a_coef[k].into(), sys.b_coef[k].into(), sys.log_h[k].into()]);
    }
    Ok(finish(t, started))
}

pub fn kernel(cfg: &RunConfig, n: usize, l: f64, alpha: f64, points: &[f64]) -> Result<Table, Failure> {
    let started = Instant::now();
    let grid = painleve(cfg)?;
    let psi = integrate_psi(4f64.cbrt() * l, &PsiParams::default(), &grid)?;
    let pairs: Vec<(f64, f64)> = points.iter().flat_map(|&u| points.iter().map(move |&v| (u, v))).collect();
    let table = kernel_theorem_check(n, alpha, l, &pairs, &psi, cfg.precision)?;
    let params = [("n", n.to_string()), ("L", l.to_string()), ("alpha", alpha.to_string())];
    let cols = ["u", "v", "k", "m", "u_lattice", "v_lattice", "scaled_discrete", "critical", "rel_diff"];
    let mut t = start_table("kernel", &cols, cfg, &params);
    for r in &table.rows {
        t.push(vec![
            r.u.into(),
            r.v.into(),
            r.k.into(),
            r.m.into(),
            r.u_lattice.into(),
            r.v_lattice.into(),
            r.scaled_discrete.into(),
            r.critical.into(),
            r.rel_diff.into(),
        ]);
    }
    for (u, v) in &table.collisions {
        t.meta("skipped_pair", format!("{u},{v}"));
    }
    Ok(finish(t, started))
}

pub fn free_energy(cfg: &RunConfig, ns: &[usize], ls: &[f64], alpha: f64) -> Result<Table, Failure> {
    let started = Instant::now();
    let grid = painleve(cfg)?;
    let params = [("alpha", alpha.to_string())];
    let cols = ["n", "L", "a", "F_dope", "F_gue", "predicted_difference", "residual"];
    let mut t = start_table("free-energy", &cols, cfg, &params);
    for &n in ns {
        for &l in ls {
            let r = free_energy_theorem_check(n, alpha, l, &grid, cfg.precision)?;
            t.push(vec![
                n.into(),
                l.into(),
                r.a.into(),
                r.f_dope.into(),
                r.f_gue.into(),
                r.predicted_difference.into(),
                r.residual.into(),
            ]);
        }
    }
    Ok(finish(t, started))
}

/// Runs a suite; also reports whether every criterion passed.
pub fn validate(cfg: &RunConfig, suite: &str) -> Result<(Table, bool), Failure> {
    let started = Instant::now();
    let ids = suite_criteria(suite).ok_or_else(|| Failure::Value(format!("unknown suite '{suite}'")))?;
    let grid = painleve(cfg)?;
    let mut t = start_table("validate", &["criterion", "name", "status", "seconds", "detail"], cfg, &[("suite", suite.into())]);
    let mut all = true;
    for id in ids {
        let r = run_criterion(id, &grid);
        eprintln!("{r}");
        all &= r.passed;
        t.push(vec![
            Cell::Int(id as i64),
            r.name.into(),
            if r.passed { "pass" } else { "fail" }.into(),
            r.elapsed.as_secs_f64().into(),
            r.detail.into(),
        ]);
    }
    Ok((finish(t, started), all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = parse_grid("-6:4:0.1").unwrap();
        assert_eq!(g.len(), 101);
        assert!((g[100] - 4.0).abs() < 1e-12);
        assert_eq!(parse_grid("1:1:0.5").unwrap(), vec![1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:0.1").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("8, 16,32").unwrap(), vec![8, 16, 32]);
        assert!(parse_list::<usize>("8,x").is_err());
    }
}
