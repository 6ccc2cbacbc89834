//! Independent oracles computed here, compared against the library.

use std::f64::consts::PI;

use watermelon_core::airy::airy;
use watermelon_core::dgop::{gue_log_partition, LatticeSpec, OrthoSystem, Precision};
use watermelon_core::oracle::{gue_log_partition_quadrature, hankel_log_norms};
use watermelon_core::watermelon::{height_cdf, Wall};

/// `ln Z_2` as the raw double sum over the lattice `(k - alpha)/n`, weight `w/n`.
fn log_z2_double_sum(n: usize, alpha: f64, a: f64) -> f64 {
    let nf = n as f64;
    let pts: Vec<(f64, f64)> = (-400i64..=400)
        .map(|k| {
            let x = (k as f64 - alpha) / nf;
            (x, (-nf * PI * PI * a * x * x / 2.0).exp() / nf)
        })
        .collect();
    let mut z = 0.0;
    for &(x, wx) in &pts {
        for &(y, wy) in &pts {
            z += (x - y) * (x - y) * wx * wy;
        }
    }
    z.ln()
}

#[test]
fn two_particle_partition_matches_double_sum() {
    for a in [0.8, 1.0, 1.3] {
        for alpha in [0.0, 0.25, -0.4] {
            let sys = OrthoSystem::build(LatticeSpec::new(2, alpha), a, 3, Precision::Standard).unwrap();
            let got = sys.log_partition(2).unwrap();
            let want = log_z2_double_sum(2, alpha, a);
            assert!((got - want).abs() < 1e-13, "a={a} alpha={alpha}: {got} vs {want}");
        }
    }
}

#[test]
fn frozen_two_particle_values() {
    // 30-digit evaluations of the double sum, frozen.
    let cases = [(1.0, 0.0, -3.694_500_024_058_476_967), (0.8, 0.25, -2.989_720_046_099_542_553)];
    for (a, alpha, want) in cases {
        for precision in [Precision::Standard, Precision::Extended] {
            let sys = OrthoSystem::build(LatticeSpec::new(2, alpha), a, 3, precision).unwrap();
            let got = sys.log_partition(2).unwrap();
            assert!((got - want).abs() < 1e-14, "a={a} alpha={alpha} {precision:?}: {got}");
        }
        assert!((log_z2_double_sum(2, alpha, a) - want).abs() < 1e-14);
    }
}

#[test]
fn stieltjes_matches_hankel_oracle() {
    let sys = OrthoSystem::build(LatticeSpec::new(6, 0.25), 1.1, 8, Precision::Extended).unwrap();
    let oracle = hankel_log_norms(&sys.lattice.nodes, &sys.lattice.node_weights, 8).unwrap();
    for (k, (x, y)) in sys.log_h.iter().zip(&oracle).enumerate() {
        assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()), "k={k}: {x} vs {y}");
    }
}

#[test]
fn gue_partition_matches_quadrature() {
    for n in 1..=3 {
        let (closed, quad) = (gue_log_partition(n), gue_log_partition_quadrature(n).unwrap());
        assert!((closed - quad).abs() < 1e-11, "n={n}: {closed} vs {quad}");
    }
}

#[test]
fn single_excursion_matches_theta_series() {
    let theta = |m: f64| -> f64 {
        (-60i32..=60)
            .map(|k| {
                let k2m2 = (k * k) as f64 * m * m;
                (1.0 - 4.0 * k2m2) * (-2.0 * k2m2).exp()
            })
            .sum()
    };
    for m in [0.6, 1.0, 1.5, 2.5] {
        let for_wall = height_cdf(1, m, Wall::Absorbing).unwrap().cdf;
        assert!((for_wall - theta(m)).abs() < 1e-12, "M={m}: {for_wall} vs {}", theta(m));
    }
}

#[test]
fn airy_reference_values() {
    // Ai, Ai' to 16 digits from standard tables.
    let table = [
        (0.0, 0.355_028_053_887_817_2, -0.258_819_403_792_806_8),
        (1.0, 0.135_292_416_312_881_4, -0.159_147_441_296_793_2),
        (-2.0, 0.227_407_428_201_685_6, 0.618_259_020_741_691_2),
        (5.0, 1.083_444_281_360_744e-4, -2.474_138_908_684_625e-4),
    ];
    for (x, ai, aip) in table {
        let (v, d) = airy(x).unwrap();
        assert!((v - ai).abs() < 1e-13 * (1.0 + ai.abs()) && (v / ai - 1.0).abs() < 1e-11, "Ai({x}) = {v}");
        assert!((d / aip - 1.0).abs() < 1e-11, "Ai'({x}) = {d}");
    }
}
