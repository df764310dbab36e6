use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use freeclt::entropy::{fisher_info, free_entropy, semicircle_entropy};
use freeclt::subordination::{clt_measure, SubordinationSolution};
use freeclt::{Error, Measure};

fn discrete() -> impl Strategy<Value = Measure> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 2..6).prop_filter_map("degenerate", |pts| {
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let atoms: Vec<(f64, f64)> = pts.iter().map(|&(x, w)| (x, w / total)).collect();
        let mu = Measure::discrete(&atoms).ok()?;
        (mu.variance() > 1e-3).then_some(mu)
    })
}

/// sqrt(1 - x^2)(1 + c1 x + c2 x^2) on [-1, 1], normalised.
fn smooth() -> impl Strategy<Value = Measure> {
    (-0.5f64..0.5, 0.0f64..1.0).prop_map(|(c1, c2)| {
        let mass = 0.5 * PI * (1.0 + 0.25 * c2);
        Measure::from_density(-1.0, 1.0, 257, move |x| {
            (1.0 - x * x).max(0.0).sqrt() * (1.0 + c1 * x + c2 * x * x) / mass
        })
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn moments_scale_with_powers(mu in prop_oneof![discrete(), smooth()], c in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let scaled = mu.scale(c).unwrap();
        prop_assert!((scaled.total_mass() - 1.0).abs() < 1e-12);
        for k in 1..=6u32 {
            let expect = c.powi(k as i32) * mu.moment(k);
            prop_assert!((scaled.moment(k) - expect).abs() <= 1e-10 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn standardize_conserves_mass(mu in prop_oneof![discrete(), smooth()]) {
        let s = mu.standardize().unwrap();
        prop_assert!((s.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(s.mean().abs() < 1e-10);
        prop_assert!((s.variance() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tail_moments_decrease(mu in prop_oneof![discrete(), smooth()], q in 2.0f64..5.0, t1 in 0.0f64..3.0, dt in 0.0f64..2.0) {
        let (a, b) = (mu.tail_moment(q, t1), mu.tail_moment(q, t1 + dt));
        prop_assert!(b <= a + 1e-12);
        prop_assert!(a <= mu.abs_moment(q) + 1e-12);
    }

    #[test]
    fn lyapunov_fraction_decreases_in_n(mu in discrete(), q in 2.5f64..5.0, n in 1u64..1000) {
        prop_assert!(mu.lyapunov_fraction(q, n + 1) <= mu.lyapunov_fraction(q, n));
    }

    #[test]
    fn free_cramer_rao_and_entropy_maximality(mu in smooth()) {
        let s = mu.standardize().unwrap();
        prop_assert!(fisher_info(&s) >= 1.0 - 1e-9);
        prop_assert!(free_entropy(&s).unwrap() <= semicircle_entropy() + 1e-9);
    }

    #[test]
    fn subordination_solves_and_stays_high(mu in discrete(), n in 2u64..40, x in -8.0f64..8.0, y in prop_oneof![1e-9f64..1e-6, 1e-3f64..3.0]) {
        let sol = SubordinationSolution::new(&mu, n, 1e-12).unwrap();
        let z = Complex64::new(x, y);
        let w = sol.solve(z).unwrap();
        prop_assert!(sol.residual(z, w) <= 1e-8 * z.norm().max(1.0));
        // Im F >= Im on the upper half-plane gives Im Z >= Im z, stronger than Im z / n
        prop_assert!(w.im >= z.im * (1.0 - 1e-9));
        let g = sol.power_cauchy(z).unwrap();
        prop_assert!(g.im <= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn clt_measure_has_unit_mass(mu in discrete(), n in 2u64..24) {
        let mu = mu.standardize().unwrap();
        // near-atom inputs may legitimately ask for a finer grid
        match clt_measure(&mu, n, 2001, 1e-8) {
            Ok(clt) => {
                prop_assert!((clt.measure.total_mass() - 1.0).abs() <= 1e-8);
                prop_assert!(clt.renormalization <= 1.0 + 1e-6);
            }
            Err(e) => prop_assert!(matches!(e, Error::Accuracy(_)), "{e}"),
        }
    }
}

#[test]
fn clt_measure_of_presets_has_unit_mass() {
    for preset in ["bernoulli", "tilted_bernoulli(0.9)", "tilted_bernoulli(0.6)"] {
        let mu = Measure::preset(preset).unwrap();
        for n in [3u64, 8, 24] {
            let clt = clt_measure(&mu, n, 2001, 1e-8).unwrap();
            assert!((clt.measure.total_mass() - 1.0).abs() <= 1e-8, "{preset} n={n}");
        }
    }
}
