use nlcs_core::oracle::exact::{binomial, laguerre_exact, ratio_to_f64};
use nlcs_core::oracle::{
    oracle_moments, oracle_state_closed_form, oracle_wigner_point, FockVector,
    CLOSED_FORM_MAX_SLOTS,
};
use nlcs_core::specfun::laguerre;
use nlcs_core::state::{DEFAULT_N_CAP, DEFAULT_TOL};
use nlcs_core::{
    build_state, eval_f, moments, squeezing_degrees, wigner_point, Error, MomentSet, NonlinearSpec, Parity,
    PhasePoint, StateParams,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;

fn laguerre_f64(n: u64, m: u32, x: f64) -> f64 {
    laguerre(n, m, x).try_to_f64().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn laguerre_example_matches_exact_sum() {
    let exact = laguerre_exact(7, 2, 0.64);
    assert!(rel(laguerre_f64(7, 2, 0.64), exact) <= 1e-14);
}

#[test]
fn laguerre_recurrence_matches_exact_sums() {
    let xs = [1e-8, 0.0016, 0.04, 0.16, 0.36, 0.5, 0.64, 0.81, 1.0];
    for n in (2..=200).step_by(3) {
        for m in 0..=4 {
            for x in xs {
                let exact = laguerre_exact(n, m, x);
                let got = laguerre_f64(n, m as u32, x);
                assert!(rel(got, exact) <= 1e-10, "n={n} m={m} x={x}: {got} vs {exact}");
            }
        }
    }
}

#[test]
fn laguerre_at_origin_is_binomial() {
    for n in [0u64, 1, 5, 30, 120, 400] {
        for m in [0u64, 1, 3] {
            let exact = ratio_to_f64(&binomial(n + m, n), &BigInt::from(1));
            assert!(rel(laguerre_f64(n, m as u32, 0.0), exact) <= 1e-12);
        }
    }
}

#[test]
fn nonlinear_function_example() {
    let spec = NonlinearSpec::new(1, 0, 1.0, 0.8).unwrap();
    let x = spec.x();
    let expected = laguerre_exact(4, 1, x) / (5.0 * laguerre_exact(4, 0, x));
    let got = eval_f(&spec, 4).unwrap().try_to_f64().unwrap();
    assert!(rel(got, expected) <= 1e-13, "{got} vs {expected}");
}

fn spec() -> impl Strategy<Value = NonlinearSpec> {
    (
        prop_oneof![Just((0u32, 0u32)), Just((1, 0)), Just((2, 1))],
        prop_oneof![Just(0.5), Just(1.0), Just(1.5), Just(2.0), 0.5f64..2.0],
        prop_oneof![Just(1e-4), Just(0.4), Just(0.8), 0.0f64..0.8],
    )
        .prop_map(|((i, j), r, eta)| NonlinearSpec::new(i, j, r, eta).unwrap())
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn moment_deviation(a: &MomentSet, b: &MomentSet) -> f64 {
    let pairs = [
        (a.mean_n, b.mean_n, a.mean_n),
        (a.mean_aa, b.mean_aa, a.mean_aa),
        (a.mean_a2ad2, b.mean_a2ad2, a.mean_a2ad2),
        (a.mean_a2.re, b.mean_a2.re, a.mean_a2.norm()),
        (a.mean_a2.im, b.mean_a2.im, a.mean_a2.norm()),
        (a.mean_a4.re, b.mean_a4.re, a.mean_a4.norm()),
        (a.mean_a4.im, b.mean_a4.im, a.mean_a4.norm()),
        (a.mean_a.re, b.mean_a.re, a.mean_a.norm()),
        (a.mean_a.im, b.mean_a.im, a.mean_a.norm()),
    ];
    pairs
        .iter()
        .map(|&(x, y, s)| {
            let s = s.abs().max(y.abs());
            if s == 0.0 {
                0.0
            } else {
                (x - y).abs() / s
            }
        })
        .fold(0.0, f64::max)
}

#[test]
fn odd_degenerate_quadrature_degree_matches_oracle() {
    let spec = NonlinearSpec::degenerate(1.5).unwrap();
    let t = build_state(&spec, StateParams::real(Parity::Odd, 20.0), DEFAULT_TOL, DEFAULT_N_CAP)
        .unwrap();
    let (_, d2) = squeezing_degrees(&moments(&t));
    let (_, d2_oracle) = squeezing_degrees(&oracle_moments(&FockVector::embed(&t)).unwrap());
    assert!(rel(d2, d2_oracle) <= 1e-10, "{d2} vs {d2_oracle}");
    assert!(d2 >= -1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_match_ladder_oracle(
        spec in spec(),
        parity in parity(),
        lambda in 0.01f64..10.0,
        theta in -3.1f64..3.1,
    ) {
        let params = StateParams::new(parity, Complex64::from_polar(lambda, theta));
        let Ok(t) = build_state(&spec, params, DEFAULT_TOL, DEFAULT_N_CAP) else { return Ok(()) };
        let oracle = oracle_moments(&FockVector::embed(&t)).unwrap();
        prop_assert!(moment_deviation(&moments(&t), &oracle) <= 1e-10);
    }

    #[test]
    fn amplitudes_match_closed_form(spec in spec(), parity in parity(), lambda in 0.01f64..10.0) {
        let params = StateParams::real(parity, lambda);
        let Ok(t) = build_state(&spec, params, DEFAULT_TOL, DEFAULT_N_CAP) else { return Ok(()) };
        prop_assume!(t.n_max() <= CLOSED_FORM_MAX_SLOTS);
        let c = oracle_state_closed_form(&spec, params, t.n_max()).unwrap();
        for (x, y) in t.amps().iter().zip(c.amps()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn wigner_matches_displacement_oracle(
        spec in spec(),
        parity in parity(),
        lambda in 0.01f64..1.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        prop_assume!(re.hypot(im) <= 3.0);
        let params = StateParams::real(parity, lambda);
        let Ok(t) = build_state(&spec, params, 1e-24, DEFAULT_N_CAP) else { return Ok(()) };
        let alpha = PhasePoint::new(re, im);
        let Ok(w) = wigner_point(&t, alpha) else { return Ok(()) };
        match oracle_wigner_point(&t, alpha) {
            Ok(o) => prop_assert!((w - o).abs() <= 1e-8, "{} vs {}", w, o),
            Err(Error::InsufficientHeadroom(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn vacuum_and_single_photon_wigner_values() {
    let pi2 = std::f64::consts::FRAC_2_PI;
    for (parity, sign) in [(Parity::Even, 1.0), (Parity::Odd, -1.0)] {
        let t = build_state(
            &NonlinearSpec::degenerate(1.0).unwrap(),
            StateParams::real(parity, 0.0),
            DEFAULT_TOL,
            DEFAULT_N_CAP,
        )
        .unwrap();
        let origin = PhasePoint::new(0.0, 0.0);
        assert!((wigner_point(&t, origin).unwrap() - sign * pi2).abs() < 1e-14);
        assert!((oracle_wigner_point(&t, origin).unwrap() - sign * pi2).abs() < 1e-14);
    }
}
