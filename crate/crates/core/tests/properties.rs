//! Property-based invariants across modules.

use num_complex::Complex64;
use proptest::prelude::*;
use ratiosense_core::estimators::{
    exact_outcome_stats, ghz_probabilities, ratio_estimate, ratio_uncertainty_ghz, std_uncertainty_ghz, EstimatorKind,
};
use ratiosense_core::exactsim::{build_state, evolve, DensityMatrix, StateKind};
use ratiosense_core::noise::{delta1, gamma_pair, phi0_pair, short_time_coefficients};
use ratiosense_core::oat::{lattice_sums, moments_short_time, OatAngles};
use ratiosense_core::optimize::{f_n_direct, f_n_polygamma};
use ratiosense_core::specfun::{chebyshev_t, lambert_w, polygamma, WBranch};
use ratiosense_core::{BasisString, LatticeGeometry, NoiseParams};

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polygamma_recurrence(m in 0u32..5, re in 0.3f64..25.0, im in -15.0f64..15.0) {
        let z = Complex64::new(re, im);
        let lhs = polygamma(m, z + 1.0).unwrap();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = polygamma(m, z).unwrap() + sign * factorial(m) * z.powi(-(m as i32) - 1);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn lambert_principal_residual(x in -0.3678794f64..60.0) {
        let w = lambert_w(WBranch::Principal, x).unwrap();
        prop_assert!(w >= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }

    #[test]
    fn lambert_lower_residual(x in -0.3678794f64..-1e-8) {
        let w = lambert_w(WBranch::Lower, x).unwrap();
        prop_assert!(w <= -1.0);
        prop_assert!((w * w.exp() - x).abs() <= 1e-12);
    }

    #[test]
    fn chebyshev_cosine_identity(n in 0u32..12, t in 0.0f64..std::f64::consts::PI) {
        prop_assert!((chebyshev_t(n, t.cos()) - (n as f64 * t).cos()).abs() < 1e-11);
    }

    #[test]
    fn correlator_matches_chebyshev_form(s in 0u32..6, x in 0.0f64..20.0) {
        let u = 1.0 / (1.0 + x * x).sqrt();
        let cheb = u.powi(s as i32 + 1) * chebyshev_t(s + 1, u);
        prop_assert!((delta1(x, s as f64) - cheb).abs() < 1e-12);
    }

    #[test]
    fn polygamma_spatial_function_matches_direct(n in 2usize..300, x0 in 0.1f64..3.0) {
        let p = NoiseParams::default();
        let a = f_n_direct(n, x0, &p).unwrap();
        let b = f_n_polygamma(n, x0, &p).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn evolution_multiplies_by_pair_factors(
        n in 2usize..6,
        x0 in 0.05f64..2.0,
        t in 0.01f64..0.3,
        b in -5.0f64..5.0,
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
        pick in prop::collection::vec((0usize..32, 0usize..32), 4),
    ) {
        let dim = 1usize << n;
        let mut psi: Vec<Complex64> = amps[..dim].iter().map(|&(r, i)| Complex64::new(r, i)).collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        psi.iter_mut().for_each(|z| *z /= norm);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let p = NoiseParams::default();
        let coeffs = short_time_coefficients(t, &LatticeGeometry::new(n, x0).unwrap(), &p);
        let out = evolve(&rho, b, t, &coeffs).unwrap();
        for &(i, j) in &pick {
            let (i, j) = (i % dim, j % dim);
            let (a, c) = (BasisString::from_index(i, n), BasisString::from_index(j, n));
            let precession: f64 = a.signs().iter().zip(c.signs()).map(|(&x, &y)| (y - x) as f64 / 2.0).sum();
            let factor = Complex64::from_polar(
                (-gamma_pair(&a, &c, &coeffs).unwrap()).exp(),
                phi0_pair(&a, &c, &coeffs).unwrap() + b * t * precession,
            );
            prop_assert!((out.get(i, j) - rho.get(i, j) * factor).norm() < 1e-12);
        }
    }

    #[test]
    fn evolution_keeps_hermiticity_and_diagonal(n in 2usize..7, x0 in 0.0f64..2.0, t in 0.001f64..0.5, b in -3.0f64..3.0) {
        let rho = build_state(StateKind::CssX, n).unwrap();
        let p = NoiseParams::default();
        let coeffs = short_time_coefficients(t, &LatticeGeometry::new(n, x0.max(1e-9)).unwrap(), &p);
        let out = evolve(&rho, b, t, &coeffs).unwrap();
        prop_assert!(out.hermiticity_error() < 1e-14);
        for k in 0..out.dim() {
            prop_assert_eq!(out.get(k, k), rho.get(k, k));
        }
    }

    #[test]
    fn bloch_length_independent_of_field(n in 2usize..80, x0 in 0.1f64..2.0, tau in 0.0f64..0.2, b in -50.0f64..50.0, th in 0.0f64..1.0, be in 0.0f64..3.0) {
        let p = NoiseParams::default();
        let geom = LatticeGeometry::new(n, x0).unwrap();
        let a = OatAngles::new(th, be).unwrap();
        let m0 = moments_short_time(tau, &geom, &p, a, 0.0).unwrap();
        let m = moments_short_time(tau, &geom, &p, a, b).unwrap();
        let r0 = m0.jx.hypot(m0.jy);
        prop_assert!((m.jx.hypot(m.jy) - r0).abs() <= 1e-12 * (1.0 + r0));
    }

    #[test]
    fn collective_lattice_sums_closed_form(n in 2usize..400, tau in 0.0f64..0.2) {
        let p = NoiseParams::default();
        let (gp, gm) = lattice_sums(tau, &LatticeGeometry::collective(n).unwrap(), &p);
        let e = p.single_decay(tau);
        let pairs = (n * (n - 1)) as f64 / 2.0;
        prop_assert!((gp / (pairs * (2.0 * e).exp()) - 1.0).abs() < 1e-12);
        prop_assert!((gm / (pairs * (-2.0 * e).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_estimate_range(nu in 1u64..200, a in 0u64..200, c in 0u64..200) {
        let (a, c) = (a % (nu + 1), c % (nu + 1));
        let (n, tau) = (7usize, 0.02);
        if let Some(v) = ratio_estimate(a, c, nu, n, tau).unwrap() {
            let x = v * n as f64 * tau;
            prop_assert!(x > -std::f64::consts::FRAC_PI_2 && x <= std::f64::consts::FRAC_PI_2);
        } else {
            prop_assert!(2 * a == nu && 2 * c == nu);
        }
    }

    #[test]
    fn ratio_variance_not_below_standard_at_same_resources(tau in 1e-4f64..0.05, f in 0.0f64..1e4) {
        let n = 50usize;
        let gamma = f * tau * tau;
        let r = ratio_uncertainty_ghz(std::f64::consts::PI / (4.0 * n as f64 * tau), tau, n, gamma, 1.0).unwrap();
        let s = std_uncertainty_ghz(std::f64::consts::FRAC_PI_2 / (n as f64 * tau), tau, n, gamma, 2.0).unwrap();
        prop_assert!(r >= s * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn standard_bias_grows_with_decay(phase in 0.4f64..1.2) {
        let (n, tau, nu) = (100usize, 1e-3, 200u64);
        let b = phase / (n as f64 * tau);
        let kind = EstimatorKind::Standard { gamma_assumed: 0.0 };
        let mut last = 0.0;
        for k in 0..=8 {
            let gamma = 0.25 * k as f64;
            let s = exact_outcome_stats(kind, ghz_probabilities(n, b, tau, gamma).unwrap(), nu, n, tau).unwrap();
            let bias = (s.mean - b).abs();
            prop_assert!(bias >= last - 1e-9 * b);
            last = bias;
        }
    }
}
