use fnls_core::config::parse_config;
use fnls_core::diagnostics::mass;
use fnls_core::estimates::{
    c_coeff, enumerate_compositions, existence_window, g1, g2, k_constant, series_gamma_sums,
    EstimateConstants,
};
use fnls_core::nonlinearity::{SeriesNonlinearity, Truncation};
use fnls_core::norms::{sobolev_norm_derivative_sum, sobolev_norm_spectral};
use fnls_core::snapshot::{read_snapshot, write_snapshot};
use fnls_core::spectral::free_propagator;
use fnls_core::{Complex64, NonlinearitySpec, SpectralField, TorusGrid};
use proptest::prelude::*;

fn field(m: usize) -> impl Strategy<Value = SpectralField> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m).prop_map(move |v| {
        let grid = TorusGrid::new(1, m).unwrap();
        SpectralField::from_coeffs(grid, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
    })
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn consts() -> EstimateConstants {
    EstimateConstants { c1_embed: 0.6, c1_power: 1.0, ..EstimateConstants::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_dominates_gamma(j in 1u32..6, g in -6.0f64..6.0) {
        prop_assert!(k_constant(j, g) >= g.abs());
    }

    #[test]
    fn composition_counts(b in 1u32..=6, p in 1u32..=6) {
        let n = enumerate_compositions(&[b], p as usize).len() as u64;
        let expect = if p <= b { binomial(u64::from(b - 1), u64::from(p - 1)) } else { 0 };
        prop_assert_eq!(n, expect);
    }

    #[test]
    fn c_coeff_recursion(g in -5.0f64..5.0, p in 1u32..6) {
        let lhs = c_coeff(g, p);
        let rhs = c_coeff(g, p - 1) * (g - 2.0 * f64::from(p - 1)).abs();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn free_flow_preserves_mass(f in field(16), s in 0.1f64..3.0, t in -5.0f64..5.0) {
        let m = mass(&f);
        prop_assert!((mass(&free_propagator(&f, s, t)) - m).abs() <= 1e-14 * m.max(1e-300));
    }

    #[test]
    fn norm_sandwich(f in field(32)) {
        let spec = sobolev_norm_spectral(&f, 1.0);
        let sum = sobolev_norm_derivative_sum(&f, 1);
        prop_assert!(spec <= sum * (1.0 + 1e-12));
        prop_assert!(sum <= 2f64.sqrt() * spec * (1.0 + 1e-12));
    }

    #[test]
    fn g2_symmetric_and_above_g1(eta in 0.2f64..3.0, a in 0.1f64..5.0, b in 0.1f64..5.0, g in -2.0f64..3.0) {
        let spec = NonlinearitySpec::power(g);
        let ab = g2(&spec, eta, a, b, 2, 1, 1.0, 0.6).unwrap();
        let ba = g2(&spec, eta, b, a, 2, 1, 1.0, 0.6).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-12 * ab);
        prop_assert!(g2(&spec, eta, a, a, 2, 1, 1.0, 0.6).unwrap() >= g1(&spec, eta, a, 2, 1, 1.0, 0.6).unwrap());
    }

    #[test]
    fn g1_monotone_in_norm(eta in 0.2f64..3.0, a in 0.1f64..5.0, d in 0.0f64..2.0) {
        for spec in [NonlinearitySpec::power(2.0), NonlinearitySpec::power(-1.0), NonlinearitySpec::log()] {
            let lo = g1(&spec, eta, a, 2, 1, 1.0, 0.6).unwrap();
            prop_assert!(g1(&spec, eta, a + d, 2, 1, 1.0, 0.6).unwrap() >= lo);
        }
    }

    #[test]
    fn window_is_consistent(eta in 0.3f64..2.0, norm in 0.5f64..6.0, c in 0.5f64..4.0) {
        for spec in [NonlinearitySpec::power(2.0), NonlinearitySpec::log()] {
            let k = EstimateConstants { c, ..consts() };
            let w = existence_window(&spec, norm, eta, 2, 1, &k).unwrap();
            prop_assert!(w.conditions.iter().all(|&b| b));
            prop_assert!(w.bounds.iter().all(|&b| w.t <= b));
            let r = 2.0 * norm;
            // substitute back into the three inequalities
            prop_assert!(c * w.t * w.first_estimate * r <= r / 2.0);
            prop_assert!(c * w.t * w.second_estimate <= 0.5);
            let k2 = EstimateConstants { c: 2.0 * c, ..k };
            let w2 = existence_window(&spec, norm, eta, 2, 1, &k2).unwrap();
            prop_assert!((w2.t * 2.0 - w.t).abs() <= 1e-9 * w.t);
        }
    }

    #[test]
    fn gamma_sums_scale_linearly(lambda in 0.1f64..10.0, eta in 0.3f64..2.0, r in 0.5f64..4.0) {
        let s = SeriesNonlinearity::exp(1.0, Truncation { max_terms: 24, tail_tol: 1e-15 });
        let (a1, a2) = series_gamma_sums(&s, eta, r, 2, 1, &consts()).unwrap();
        let (b1, b2) = series_gamma_sums(&s.scaled(lambda), eta, r, 2, 1, &consts()).unwrap();
        prop_assert!((b1 - lambda * a1).abs() <= 1e-10 * b1);
        prop_assert!((b2 - lambda * a2).abs() <= 1e-10 * b2);
    }

    #[test]
    fn snapshot_round_trip(f in field(16), s in 0.1f64..3.0, t in -10.0f64..10.0) {
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, s, t).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(back.field, f);
        prop_assert_eq!(back.s.to_bits(), s.to_bits());
        prop_assert_eq!(back.t.to_bits(), t.to_bits());
    }

    #[test]
    fn config_round_trip(s in 0.1f64..3.0, gamma in -3.0f64..3.0, re in -3.0f64..3.0, im in 0.5f64..3.0, seed in any::<u64>()) {
        let text = format!(
            "[equation]\ns = {s:?}\npoints = 16\n\n[nonlinearity]\nkind = \"power\"\ngamma = {gamma:?}\n\n\
             [initial_data]\nkind = \"constant\"\nvalue = [{re:?}, {im:?}]\n\n[constants]\nseed = {seed}\n"
        );
        let cfg = parse_config(&text).unwrap();
        prop_assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}
