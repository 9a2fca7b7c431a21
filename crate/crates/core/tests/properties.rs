use fraclab_core::field::CosineField;
use fraclab_core::harmonics::{harmonic_basis, harmonic_dim};
use fraclab_core::kernels::{green_ball, green_halfspace, poisson_halfspace};
use fraclab_core::limits::rate_fit;
use fraclab_core::pvlap::pv_frac_lap;
use fraclab_core::special::{beta, gamma, inc_beta_regularized, inc_beta_regularized_inv};
use fraclab_core::wos::sample_ball_jump;
use fraclab_core::{FracOrder, NormMode, QuadratureSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_recurrence(x in 0.05f64..12.0) {
        let lhs = gamma(x + 1.0).unwrap();
        let rhs = x * gamma(x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{lhs} {rhs}");
    }

    #[test]
    fn beta_is_symmetric(a in 0.05f64..6.0, b in 0.05f64..6.0) {
        prop_assert!(close(beta(a, b).unwrap(), beta(b, a).unwrap(), 1e-12));
    }

    #[test]
    fn inc_beta_inverse_round_trip(p in 0.001f64..0.999, s in 0.05f64..0.95) {
        let (x, one_minus_x) = inc_beta_regularized_inv(p, 1.0 - s, s, 1e-14).unwrap();
        prop_assert!((x + one_minus_x - 1.0).abs() < 1e-14);
        let back = if x < 0.5 {
            inc_beta_regularized(x, 1.0 - s, s).unwrap()
        } else {
            1.0 - inc_beta_regularized(one_minus_x, s, 1.0 - s).unwrap()
        };
        prop_assert!((back - p).abs() < 1e-9, "{back} {p}");
    }

    #[test]
    fn halfspace_green_is_symmetric(
        s in 0.1f64..0.9,
        x in (0.05f64..3.0, -2.0f64..2.0, -2.0f64..2.0),
        y in (0.05f64..3.0, -2.0f64..2.0, -2.0f64..2.0),
    ) {
        let o = FracOrder::new(3, s).unwrap();
        let (x, y) = ([x.0, x.1, x.2], [y.0, y.1, y.2]);
        prop_assume!(dist_sq(&x, &y) > 1e-4);
        let a = green_halfspace(&o, &x, &y).unwrap().value();
        let b = green_halfspace(&o, &y, &x).unwrap().value();
        prop_assert!(close(a, b, 1e-10), "{a} {b}");
    }

    #[test]
    fn ball_green_scales(s in 0.1f64..0.9, lam in 0.2f64..5.0, x in (-0.7f64..0.7, -0.7f64..0.7), y in (-0.7f64..0.7, -0.7f64..0.7)) {
        let o = FracOrder::new(2, s).unwrap();
        let (x, y) = ([x.0, x.1], [y.0, y.1]);
        prop_assume!(dist_sq(&x, &y) > 1e-4);
        let g = green_ball(&o, &x, &y, 1.0).unwrap().value();
        let gl = green_ball(&o, &[lam * x[0], lam * x[1]], &[lam * y[0], lam * y[1]], lam).unwrap().value();
        prop_assert!(close(gl, lam.powf(2.0 * s - 2.0) * g, 1e-9), "{gl} {g}");
    }

    #[test]
    fn halfspace_poisson_scales(s in 0.1f64..0.9, lam in 0.2f64..5.0, x1 in 0.05f64..2.0, x2 in -2.0f64..2.0, y1 in -3.0f64..-0.05, y2 in -2.0f64..2.0) {
        let o = FracOrder::new(2, s).unwrap();
        let p = poisson_halfspace(&o, &[x1, x2], &[y1, y2], NormMode::ProbabilisticKappa).unwrap();
        let pl = poisson_halfspace(&o, &[lam * x1, lam * x2], &[lam * y1, lam * y2], NormMode::ProbabilisticKappa).unwrap();
        prop_assert!(close(pl, lam.powi(-2) * p, 1e-10), "{pl} {p}");
    }

    #[test]
    fn ball_jump_leaves_the_ball_and_scales(s in 0.1f64..0.9, r in 0.1f64..10.0, seed in any::<u64>()) {
        let o = FracOrder::new(2, s).unwrap();
        let a = sample_ball_jump(&o, 1.0, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = sample_ball_jump(&o, r, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(a[0].hypot(a[1]) > 1.0);
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(close(r * p, *q, 1e-12), "{p} {q}");
        }
    }

    #[test]
    fn rate_fit_recovers_power_laws(p in 0.1f64..3.0, c in 1e-3f64..1e3) {
        let eps: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let err: Vec<f64> = eps.iter().map(|e| c * e.powf(p)).collect();
        let fit = rate_fit(&eps, &err).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!(fit.half_width < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn harmonic_basis_is_harmonic(n in 2usize..5, m in 0u32..5) {
        let basis = harmonic_basis(n, m).unwrap();
        prop_assert_eq!(basis.len() as u64, harmonic_dim(n, m).unwrap());
        for p in &basis {
            prop_assert!(p.laplacian().is_zero());
            prop_assert_eq!(p.homogeneous_degree(), Some(m));
        }
    }

    #[test]
    fn cosine_is_an_eigenfunction(s in 0.15f64..0.85, k in 0.3f64..3.0, x in -2.0f64..2.0) {
        let o = FracOrder::new(1, s).unwrap();
        let u = CosineField::new(vec![k]);
        let r = pv_frac_lap(&o, &u, &[x], &QuadratureSpec::default()).unwrap();
        prop_assert!(!r.diverging);
        let want = k.powf(2.0 * s) * (k * x).cos();
        prop_assert!((r.value - want).abs() < 1e-6, "{} {want}", r.value);
    }

    #[test]
    fn pv_evaluation_is_linear(s in 0.15f64..0.85, a in -3.0f64..3.0, x in -1.0f64..1.0) {
        let o = FracOrder::new(1, s).unwrap();
        let spec = QuadratureSpec::default();
        let u = CosineField::new(vec![1.3]);
        let scaled = fraclab_core::field::FnField::new(1, "a cos", move |y: &[f64]| a * (1.3 * y[0]).cos());
        let base = pv_frac_lap(&o, &u, &[x], &spec).unwrap().value;
        let lin = pv_frac_lap(&o, &scaled, &[x], &spec).unwrap().value;
        prop_assert!((lin - a * base).abs() < 1e-6, "{lin} {}", a * base);
    }
}
