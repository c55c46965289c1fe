mod common;

use common::random_balanced;
use mixedmop::rh::{cauchy_transform, gaussian_cauchy, DEFAULT_DELTAS};
use mixedmop::{Basis, DoubleDouble, Gaussian, MomentSystem, RhProblem, Side};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(seed: u64) -> (RhProblem, (f64, f64), ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = random_balanced(&mut rng, 2, 4);
    let sys: MomentSystem<DoubleDouble> = MomentSystem::for_pair(cfg.w1.clone(), cfg.w2.clone(), &cfg.pair).unwrap();
    (RhProblem::new(&cfg.pair, &sys).unwrap(), cfg.window(), rng)
}

fn eval_poly(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unimodular_and_inverse(seed in any::<u64>()) {
        let (rh, (lo, hi), mut rng) = problem(seed);
        for _ in 0..4 {
            let im = rng.random_range(0.1..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let z = Complex64::new(rng.random_range(lo..hi), im);
            prop_assert!(rh.det_residual(z).unwrap() < 1e-7, "{} at {z}", rh.pair());
            prop_assert!(rh.xy_consistency(z).unwrap() < 1e-7, "{} at {z}", rh.pair());
        }
    }

    #[test]
    fn jump_relation_on_the_axis(seed in any::<u64>()) {
        let (rh, (lo, hi), mut rng) = problem(seed);
        let x = rng.random_range(lo..hi);
        let report = rh.verify_jump(x, &DEFAULT_DELTAS).unwrap();
        prop_assert!(report.passed, "{} at {x}: {:e} / {:e}", rh.pair(), report.extrapolated, report.scale);
    }

    #[test]
    fn rh_kernel_is_real_and_matches_cd(seed in any::<u64>()) {
        let (rh, (lo, hi), mut rng) = problem(seed);
        for _ in 0..6 {
            let x = rng.random_range(lo..hi);
            let y = rng.random_range(lo..hi);
            if (x - y).abs() < 1e-3 {
                continue;
            }
            let k = rh.kernel_complex(x, y).unwrap();
            let cd = rh.data().kernel(x, y).unwrap();
            prop_assert!((k.re - cd).abs() < 1e-10 * (1.0 + cd.abs()));
            prop_assert!(k.im.abs() < 1e-10 * (1.0 + cd.abs()));
        }
    }

    #[test]
    fn closed_form_cauchy_matches_quadrature(
        center in -1.0f64..1.0,
        variance in 0.1f64..0.8,
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..5),
        re in -1.5f64..1.5,
        im in prop_oneof![Just(0.0), -1.0f64..1.0],
        upper in any::<bool>(),
    ) {
        let g = Gaussian::new(center, variance, 1.0).unwrap();
        let basis = Basis { center: 0.2, scale: 0.7 };
        let side = if im != 0.0 { Side::Off } else if upper { Side::BoundaryPlus } else { Side::BoundaryMinus };
        let z = Complex64::new(re, im);
        let f = |x: f64| eval_poly(&coeffs, basis.to_local(x)) * g.eval(x);
        let df = |x: f64| {
            let h = 1e-6;
            (f(x + h) - f(x - h)) / (2.0 * h)
        };
        let sd = variance.sqrt();
        let span = (center - 14.0 * sd, center + 14.0 * sd);
        let (quad, _) = cauchy_transform(f, df, span, z, side, 0.05).unwrap();
        let exact = gaussian_cauchy(&g, &coeffs, &basis, z, side);
        prop_assert!((quad - exact).norm() < 1e-8 * (1.0 + exact.norm()), "{quad} vs {exact}");
    }
}

#[test]
fn boundary_values_differ_by_the_density() {
    // Plemelj: C+ - C- = 2πi f on the support
    let g = Gaussian::new(0.1, 0.3, 1.4).unwrap();
    let basis = Basis { center: 0.0, scale: 1.0 };
    let poly = [0.5, -1.0, 0.25];
    for x in [-0.8, 0.0, 0.35, 1.2] {
        let z = Complex64::new(x, 0.0);
        let plus = gaussian_cauchy(&g, &poly, &basis, z, Side::BoundaryPlus);
        let minus = gaussian_cauchy(&g, &poly, &basis, z, Side::BoundaryMinus);
        let density = eval_poly(&poly, x) * g.eval(x);
        let jump = plus - minus;
        assert!((jump - Complex64::new(0.0, 2.0 * std::f64::consts::PI * density)).norm() < 1e-12);
    }
}
