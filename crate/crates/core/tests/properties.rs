use nde_shockkit::blowup::characteristic_roots;
use nde_shockkit::euler::{euler_f, EulerParams};
use nde_shockkit::extension::CauchyTriple;
use nde_shockkit::output::fmt_f64;
use nde_shockkit::regpde::{Field, Grid};
use nde_shockkit::shock::{check_symmetry_breaking, rh_speed, ShockSide};
use nde_shockkit::similarity::{explicit_cubic, operator_residual, Side, SimilarityParams};
use proptest::prelude::*;

fn side() -> impl Strategy<Value = ShockSide> {
    (0.01f64..10.0, -10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b, c)| ShockSide::new(a, b, c))
}

proptest! {
    #[test]
    fn triple_scaling_composes(f0 in 0.01f64..10.0, f1 in -5.0f64..5.0, f2 in -5.0f64..5.0,
                               a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let t = CauchyTriple::new(f0, f1, f2);
        let (x, y) = (t.scaled(a).scaled(b), t.scaled(a * b));
        for (u, v) in x.as_array().iter().zip(y.as_array()) {
            prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(1e-300) * 10.0 + 1e-300);
        }
    }

    #[test]
    fn symmetry_residual_scales_as_a4(m in side(), p in side(), a in 0.2f64..5.0) {
        let r0 = check_symmetry_breaking(&m, &p, 1e-12).residual;
        let r1 = check_symmetry_breaking(&m.scaled(a), &p.scaled(a), 1e-12).residual;
        prop_assert!((r1 - a.powi(4) * r0).abs() <= 1e-9 * (1.0 + a.powi(4) * (m.flux_derivative().abs() + p.flux_derivative().abs())));
    }

    #[test]
    fn mirrored_pairs_are_symmetric_and_stationary(m in side(), a in 0.2f64..5.0) {
        let s = m.scaled(a);
        prop_assert!(check_symmetry_breaking(&s, &s.mirrored(), 0.0).holds);
        prop_assert_eq!(rh_speed(&s, &s.mirrored()).unwrap().lambda, 0.0);
    }

    #[test]
    fn euler_scaling_law(alpha in 0.05f64..0.95, c0 in 0.1f64..5.0, y in -20.0f64..0.0) {
        let p = EulerParams::new(alpha, c0).unwrap();
        let unit = EulerParams::new(alpha, 1.0).unwrap();
        let k = c0.powf(p.beta());
        let lhs = euler_f(y, &p).unwrap();
        let rhs = k * euler_f(y / k, &unit).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn odd_extension_is_odd(n in 64usize..200, amp in -3.0f64..3.0, k in 1u32..5) {
        let g = Grid::new(2.0, n).unwrap();
        let f = Field::from_fn(&g, |y| amp * (k as f64 * y).sin() + y * y * y).unwrap();
        let ext = f.odd_extension(&g);
        prop_assert_eq!(ext.len(), 2 * n + 1);
        for i in 0..=n {
            let (yl, vl) = ext[i];
            let (yr, vr) = ext[2 * n - i];
            prop_assert_eq!(yl, -yr);
            prop_assert_eq!(vl, -vr);
        }
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn roots_sum_and_product(alpha in -0.1f64..0.5) {
        let r = characteristic_roots(&SimilarityParams::new(alpha).unwrap());
        let [_, a, b] = r.roots;
        prop_assert!((a + b + 9.0).abs() <= 1e-13);
        prop_assert!((a * b + 20.0 * alpha + 2.0).abs() <= 1e-13);
        prop_assert!(a >= b);
    }

    #[test]
    fn cubics_solve_the_profile_equation(alpha in -0.1f64..0.5, y in -50.0f64..-0.1) {
        let p = SimilarityParams::new(alpha).unwrap();
        for s in [Side::BlowUp, Side::Extension] {
            prop_assert!(operator_residual(s, &p, y, explicit_cubic(s, y)).abs() <= 1e-12 * y.abs().powi(3));
        }
    }
}
