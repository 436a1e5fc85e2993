use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use slipstream::field::norms::l2_norm_modal;
use slipstream::field::{gevrey_norm, l2_norm, strip_l2_norm, GevreyParams, Grid, GridSpec, ScalarField};
use slipstream::poisson::{solve_streamfunction, split_kernel_bound, velocity_from_streamfunction, PoissonOptions};
use slipstream::sweep::fit_rate;

fn grid() -> &'static Arc<Grid> {
    static G: OnceLock<Arc<Grid>> = OnceLock::new();
    G.get_or_init(|| Grid::new(GridSpec::channel(32, 64)).unwrap())
}

/// A few x-modes with smooth random y-profiles.
fn smooth_field() -> impl Strategy<Value = ScalarField> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..6.3, 0.5f64..3.0, 0.0f64..3.0), 1..6).prop_map(|modes| {
        ScalarField::from_fn(grid(), move |x, y| {
            modes
                .iter()
                .enumerate()
                .map(|(m, &(a, ph, k, y0))| a * (m as f64 * x + ph).cos() * (-(k * (y - y0)).powi(2)).exp())
                .sum()
        })
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_round_trips(f in smooth_field()) {
        let back = ScalarField::from_modes(grid(), &f.modes());
        let scale = f.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn parseval_matches_nodal_norm(f in smooth_field()) {
        prop_assert!(rel(l2_norm(&f).unwrap(), l2_norm_modal(&f)) <= 1e-10);
    }

    #[test]
    fn strip_norms_grow_with_height(f in smooth_field(), y1 in 0.01f64..3.0, dy in 0.0f64..3.0) {
        let y2 = (y1 + dy).min(grid().ly());
        let (a, b) = (strip_l2_norm(&f, y1).unwrap(), strip_l2_norm(&f, y2).unwrap());
        let full = l2_norm(&f).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12) && b <= full * (1.0 + 1e-12), "y {y1} {y2}: {a:e} {b:e} {full:e}");
    }

    #[test]
    fn gevrey_with_zero_weight_is_polynomial_sup(f in smooth_field()) {
        let g = grid();
        let c = f.modes();
        let expected = (0..g.n_modes())
            .map(|n| {
                let sq: f64 = g.wy().iter().zip(c.column(n)).map(|(w, z)| w * z.norm_sqr()).sum();
                (1.0 + n as f64).powi(10) * sq.sqrt()
            })
            .fold(0.0f64, f64::max);
        let got = gevrey_norm(&f, GevreyParams::new(0.0, 0.0).unwrap()).unwrap().value;
        prop_assert!(rel(got, expected) <= 1e-12);
    }

    #[test]
    fn streamfunction_velocity_is_solenoidal_and_tangent(omega in smooth_field()) {
        let psi = solve_streamfunction(&omega, PoissonOptions::default()).unwrap();
        let u = velocity_from_streamfunction(&psi);
        let size = l2_norm(&u.u1).unwrap() + l2_norm(&u.u2).unwrap();
        prop_assert!(l2_norm(&u.divergence()).unwrap() <= 1e-8 * size.max(1e-300));
        let wall = u.u2.row(0).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(wall <= 1e-12 * size.max(1e-300));
    }

    #[test]
    fn fit_recovers_exact_power_laws(slope in -2.0f64..2.0, c in 0.01f64..100.0, n in 3usize..8) {
        let pts: Vec<(f64, f64)> = (0..n).map(|i| {
            let e = 10f64.powf(-1.0 - 0.5 * i as f64);
            (e, c * e.powf(slope))
        }).collect();
        let fit = fit_rate(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn near_kernel_part_is_bounded_by_half_strip(omega in smooth_field(), k in 0.05f64..0.8) {
        let s = split_kernel_bound(&omega, k).unwrap();
        prop_assert!(s.near_constant <= 0.5 * 1.05, "near constant {}", s.near_constant);
    }
}
