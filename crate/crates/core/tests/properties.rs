use std::sync::OnceLock;

use proptest::prelude::*;

use watermelon_core::asym::s_of_a;
use watermelon_core::dgop::{LatticeSpec, OrthoSystem, Precision};
use watermelon_core::painleve::{PainleveGrid, SolverParams, Which};
use watermelon_core::psi::{critical_kernel, integrate_psi, PsiParams};
use watermelon_core::watermelon::{height_cdf, Wall};

fn grid() -> &'static PainleveGrid {
    static GRID: OnceLock<PainleveGrid> = OnceLock::new();
    GRID.get_or_init(|| PainleveGrid::compute(SolverParams::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn log_h_steps_are_log_b(n in 2usize..40, a in 0.5f64..1.5, alpha in -0.5f64..0.5) {
        let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, 12, Precision::Standard).unwrap();
        for k in 1..=12 {
            let step = sys.log_h[k] - sys.log_h[k - 1];
            prop_assert!((step - sys.b_coef[k].ln()).abs() < 1e-10, "k={} {} vs {}", k, step, sys.b_coef[k].ln());
        }
    }

    #[test]
    fn reflecting_the_lattice_flips_a(n in 2usize..30, a in 0.6f64..1.4, alpha in 0.0f64..0.5) {
        let p = OrthoSystem::build(LatticeSpec::new(n, alpha), a, 10, Precision::Standard).unwrap();
        let m = OrthoSystem::build(LatticeSpec::new(n, -alpha), a, 10, Precision::Standard).unwrap();
        for k in 0..=10 {
            prop_assert!((p.log_h[k] - m.log_h[k]).abs() < 1e-11 * (1.0 + p.log_h[k].abs()));
            prop_assert!((p.a_coef[k] + m.a_coef[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn cd_kernel_is_a_projection_kernel(n in 4usize..24, a in 0.7f64..1.3, alpha in -0.5f64..0.5, i in 0usize..1000, j in 0usize..1000) {
        let sys = OrthoSystem::build(LatticeSpec::new(n, alpha), a, n, Precision::Standard).unwrap();
        let len = sys.lattice.nodes.len();
        let (i, j) = (i % len, j % len);
        let kij = sys.cd_kernel_at(i, j, n);
        prop_assert!((kij - sys.cd_kernel_at(j, i, n)).abs() < 1e-15);
        let kii = sys.cd_kernel_at(i, i, n);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&kii));
        prop_assert!(kij * kij <= kii * sys.cd_kernel_at(j, j, n) + 1e-12);
    }

    #[test]
    fn height_cdf_monotone(n in 1usize..6, m in 0.5f64..6.0, dm in 0.0f64..2.0, absorbing in any::<bool>()) {
        let wall = if absorbing { Wall::Absorbing } else { Wall::Reflecting };
        let lo = height_cdf(n, m, wall).unwrap().cdf;
        let hi = height_cdf(n, m + dm, wall).unwrap().cdf;
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi >= lo - 1e-13, "P({})={} < P({})={}", m + dm, hi, m, lo);
    }

    #[test]
    fn s_has_the_sign_of_one_minus_a(a in 0.05f64..2.0, n in 1usize..5000) {
        let s = s_of_a(a, n).unwrap();
        if (1.0 - a).abs() > 1e-9 {
            prop_assert_eq!(s.signum(), (1.0 - a).signum());
        }
    }

    #[test]
    fn tracy_widom_ordering(x in -8.0f64..6.0, dx in 0.0f64..1.0) {
        let g = grid();
        let (f1, f2) = (g.tracy_widom(x, Which::F1).unwrap(), g.tracy_widom(x, Which::F2).unwrap());
        prop_assert!((0.0..=1.0).contains(&f1) && (0.0..=1.0).contains(&f2));
        prop_assert!(f1 <= f2.sqrt() + 1e-14);
        prop_assert!(g.tracy_widom(x + dx, Which::F2).unwrap() >= f2 - 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn psi_parity_and_kernel_symmetry(s in -4.0f64..3.0, u in -3.0f64..3.0, v in -3.0f64..3.0) {
        let psi = integrate_psi(s, &PsiParams::default(), grid()).unwrap();
        let (p1, p2) = psi.eval(u);
        let (m1, m2) = psi.eval(-u);
        prop_assert!((p1 - m1).abs() < 1e-14 && (p2 + m2).abs() < 1e-14);
        let (kuv, kvu) = (critical_kernel(u, v, &psi), critical_kernel(v, u, &psi));
        prop_assert!((kuv - kvu).abs() < 1e-12 * (1.0 + kuv.abs()));
        prop_assert!((critical_kernel(u, v, &psi) - critical_kernel(-u, -v, &psi)).abs() < 1e-12 * (1.0 + kuv.abs()));
    }
}
