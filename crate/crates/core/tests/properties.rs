use idepsd::appendix::reduced_diffmat_spectrum;
use idepsd::cli::RunConfig;
use idepsd::laguerre::NodeFamily;
use idepsd::mesh::{build_scaled_mesh, half_line_quadrature, weighted_diff_matrix_points};
use idepsd::models::{discretize, ModelSpec};
use idepsd::psd::DiscretizedOde;
use proptest::prelude::*;

fn family() -> impl Strategy<Value = NodeFamily> {
    prop_oneof![Just(NodeFamily::LaguerreZeros), Just(NodeFamily::LaguerreExtrema)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mesh_is_negative_and_decreasing(fam in family(), n in 1usize..60, rho1 in 0.05f64..8.0) {
        let m = build_scaled_mesh(fam, n, rho1).unwrap();
        prop_assert_eq!(m.nodes.len(), n);
        prop_assert!(m.nodes[0] < 0.0);
        prop_assert!(m.nodes.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn half_line_rule_integrates_weighted_polynomials(fam in family(), n in 2usize..20, rho1 in 0.2f64..4.0, k in 0usize..4) {
        // ∫_0^∞ s^k e^{-2ρ1 s} ds = k! / (2ρ1)^{k+1}
        let q = half_line_quadrature(fam, n, rho1).unwrap();
        let got = q.integrate(|s| s.powi(k as i32) * (-2.0 * rho1 * s).exp());
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        let want = fact / (2.0 * rho1).powi(k as i32 + 1);
        prop_assert!((got - want).abs() <= 1e-11 * want, "{} vs {}", got, want);
    }

    #[test]
    fn weighted_derivative_is_exact_on_polynomials(
        fam in family(),
        n in 1usize..16,
        rho1 in 0.3f64..3.0,
        extra in 0.0f64..1.0,
        coef in prop::collection::vec(-1.0f64..1.0, 1..6),
    ) {
        let m = build_scaled_mesh(fam, n, rho1).unwrap();
        let rho = rho1 * (1.0 + extra);
        let mut x = vec![0.0];
        x.extend_from_slice(&m.nodes);
        let deg = coef.len().min(n + 1);
        let p = |t: f64| coef[..deg].iter().rev().fold(0.0, |acc, c| acc * t + c);
        let dp = |t: f64| (1..deg).rev().fold(0.0, |acc, i| acc * t + i as f64 * coef[i]);
        let d = weighted_diff_matrix_points(&x, rho).unwrap();
        for j in 0..x.len() {
            let got: f64 = (0..x.len()).map(|k| d[(j, k)] * (rho * x[k]).exp() * p(x[k])).sum();
            let want = (rho * x[j]).exp() * dp(x[j]);
            let scale: f64 = (0..x.len()).map(|k| (d[(j, k)] * (rho * x[k]).exp() * p(x[k])).abs()).sum();
            prop_assert!((got - want).abs() <= 1e-9 * scale.max(1.0), "row {}: {} vs {}", j, got, want);
        }
    }

    #[test]
    fn extrema_reduced_spectrum_lies_on_half_line(n in 1usize..25) {
        let s = reduced_diffmat_spectrum(n, NodeFamily::LaguerreExtrema).unwrap();
        for z in &s.computed.eigenvalues {
            prop_assert!((z.re - 0.5).abs() < 1e-6, "{}", z);
            let w = 1.0 - 1.0 / z;
            prop_assert!((w.norm() - 1.0).abs() < 1e-6);
            let k = w.arg() * (n + 1) as f64 / (2.0 * std::f64::consts::PI);
            prop_assert!((k - k.round()).abs() < 1e-5);
        }
        prop_assert!((s.trace - n as f64 / 2.0).abs() < 1e-8 * n as f64);
    }

    #[test]
    fn blowflies_equilibrium_profile_is_fixed(fam in family(), n in 2usize..24, mu in 0.5f64..4.0, excess in 0.1f64..3.0) {
        let beta0 = mu * (mu + excess).exp();
        let ybar = excess * mu * mu.exp();
        let ode = discretize(&ModelSpec::Blowflies { beta0, mu }, fam, n).unwrap();
        let r = ode.rhs(&ode.profile(ybar)).unwrap();
        let scale = ybar.abs().max(1.0) * (1.0 + mu.exp());
        prop_assert!(r.iter().all(|v| v.abs() <= 1e-8 * scale), "{:?}", r);
    }

    #[test]
    fn config_round_trips(rho1 in 0.1f64..5.0, n in prop::collection::vec(1usize..200, 1..5), seed in any::<u64>()) {
        let cfg = RunConfig {
            rho1: Some(rho1),
            n: Some(n),
            seed: Some(seed),
            ..Default::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
