use std::f64::consts::FRAC_2_PI;

use nlcs_core::state::{build_state_with, DEFAULT_N_CAP, DEFAULT_TOL};
use nlcs_core::{
    amp_squared_degrees, build_state, chi, moments, squeezing_degrees, stats, wigner_point,
    CoefficientTable, ExtReal, NonlinearFunction, NonlinearSpec, Parity, PhasePoint, StateParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn spec() -> impl Strategy<Value = NonlinearSpec> {
    (
        prop_oneof![Just((0u32, 0u32)), Just((1, 0)), Just((2, 1)), Just((2, 0)), Just((3, 1))],
        0.5f64..2.0,
        0.0f64..0.8,
    )
        .prop_map(|((i, j), r, eta)| NonlinearSpec::new(i, j, r, eta).unwrap())
}

fn table(spec: &NonlinearSpec, parity: Parity, lambda: Complex64) -> Option<CoefficientTable> {
    build_state(spec, StateParams::new(parity, lambda), DEFAULT_TOL, DEFAULT_N_CAP).ok()
}

/// f with chosen arguments scaled, for checking what the products see.
struct Scaled {
    spec: NonlinearSpec,
    at: Vec<u64>,
    factor: f64,
}

impl NonlinearFunction for Scaled {
    fn values(&self) -> Box<dyn Iterator<Item = nlcs_core::Result<ExtReal>> + Send + '_> {
        Box::new(self.spec.values().zip(0u64..).map(|(v, n)| {
            v.map(|v| if self.at.contains(&n) { v * self.factor } else { v })
        }))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normalized(spec in spec(), parity in parity(), lambda in 0.01f64..20.0) {
        let Some(t) = table(&spec, parity, Complex64::new(lambda, 0.0)) else { return Ok(()) };
        prop_assert!((t.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!(t.tail_bound() <= DEFAULT_TOL);
    }

    #[test]
    fn truncation_independence(spec in spec(), parity in parity(), lambda in 0.01f64..20.0) {
        let params = StateParams::real(parity, lambda);
        let Ok(a) = build_state(&spec, params, DEFAULT_TOL, DEFAULT_N_CAP) else { return Ok(()) };
        let b = build_state(&spec, params, DEFAULT_TOL / 100.0, 2 * DEFAULT_N_CAP).unwrap();
        prop_assert!(b.n_max() >= a.n_max());
        for (x, y) in a.amps().iter().zip(b.amps()) {
            prop_assert!((x - y).norm() <= 1e-8 * x.norm().max(y.norm()));
        }
    }

    #[test]
    fn phase_covariance(spec in spec(), parity in parity(), lambda in 0.01f64..5.0, theta in -3.1f64..3.1) {
        let Some(a) = table(&spec, parity, Complex64::new(lambda, 0.0)) else { return Ok(()) };
        let b = table(&spec, parity, Complex64::from_polar(lambda, theta)).unwrap();
        prop_assert_eq!(a.n_max(), b.n_max());
        for (n, (x, y)) in a.amps().iter().zip(b.amps()).enumerate() {
            let rotated = x * Complex64::from_polar(1.0, n as f64 * theta);
            prop_assert!((rotated - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn f_below_first_slot_is_irrelevant(spec in spec(), parity in parity(), lambda in 0.01f64..5.0) {
        let params = StateParams::real(parity, lambda);
        let Ok(plain) = build_state(&spec, params, DEFAULT_TOL, DEFAULT_N_CAP) else { return Ok(()) };
        let at = match parity {
            Parity::Even => vec![0, 1],
            Parity::Odd => vec![1],
        };
        let scaled = Scaled { spec, at, factor: 7.3 };
        let t = build_state_with(&scaled, params, DEFAULT_TOL, DEFAULT_N_CAP).unwrap();
        prop_assert_eq!(t.n_max(), plain.n_max());
        for (x, y) in t.amps().iter().zip(plain.amps()) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn moment_identities(spec in spec(), parity in parity(), lambda in 0.01f64..30.0, theta in -3.1f64..3.1) {
        let Some(t) = table(&spec, parity, Complex64::from_polar(lambda, theta)) else { return Ok(()) };
        let m = moments(&t);
        let s = stats(&t);
        let expected = m.mean_aa + 4.0 * m.mean_n + 2.0;
        prop_assert!((m.mean_a2ad2 - expected).abs() <= 1e-10 * expected);
        prop_assert_eq!(m.mean_a, Complex64::new(0.0, 0.0));
        if let (Some(g2), Some(q)) = (s.g2, s.q) {
            prop_assert!((q - m.mean_n * (g2 - 1.0)).abs() <= 1e-10 * q.abs().max(1.0));
        }
        let (d1, d2) = squeezing_degrees(&m);
        prop_assert!((d1 + d2 - 4.0 * m.mean_n).abs() <= 1e-10 * (4.0 * m.mean_n).max(1.0));
        let (e1, e2) = amp_squared_degrees(&m);
        let cs = (4.0 * m.mean_aa - 4.0 * m.mean_a2.norm_sqr()) / (4.0 * m.mean_n + 2.0);
        prop_assert!((e1 + e2 - cs).abs() <= 1e-10 * cs.abs().max(1.0));
        prop_assert!(cs >= -1e-10);
        for d in [d1, d2, e1, e2] {
            prop_assert!(d >= -1.0 - 1e-10);
        }
    }

    #[test]
    fn wigner_symmetric_and_bounded(
        spec in spec(),
        parity in parity(),
        lambda in 0.01f64..1.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let params = StateParams::real(parity, lambda);
        let Ok(t) = build_state(&spec, params, 1e-24, DEFAULT_N_CAP) else { return Ok(()) };
        let (Ok(w), Ok(v)) = (
            wigner_point(&t, PhasePoint::new(re, im)),
            wigner_point(&t, PhasePoint::new(-re, -im)),
        ) else {
            return Ok(());
        };
        prop_assert!(w.abs() <= FRAC_2_PI + 1e-8);
        prop_assert!((w - v).abs() <= 1e-10);
    }

    #[test]
    fn chi_hermitian(j in 0u64..=40, i in 0u64..=40, r in 0.0f64..4.0, phi in -3.2f64..3.2) {
        let alpha = Complex64::from_polar(r, phi);
        let a = chi(i, j, PhasePoint::from(alpha));
        let b = chi(j, i, PhasePoint::from(-alpha)).conj();
        prop_assert!((a - b).norm() <= 1e-12);
    }
}

#[test]
fn odd_state_at_zero_has_q_minus_one() {
    for r in [0.5, 1.0, 2.0] {
        let t = build_state(
            &NonlinearSpec::degenerate(r).unwrap(),
            StateParams::real(Parity::Odd, 0.0),
            DEFAULT_TOL,
            DEFAULT_N_CAP,
        )
        .unwrap();
        let s = stats(&t);
        assert_eq!(s.q, Some(-1.0));
        assert_eq!(s.g2, Some(0.0));
    }
}
