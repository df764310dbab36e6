use std::f64::consts::PI;

use freeclt::{cumulants_from_moments, Measure};

#[test]
fn free_poisson_moments_give_constant_cumulants() {
    // Narayana moments of the free Poisson law with rate 2: every free cumulant is 2
    let ms = [2.0, 6.0, 22.0, 90.0, 394.0, 1806.0];
    let k = cumulants_from_moments(&ms, 6).unwrap();
    for (i, c) in k.iter().enumerate() {
        assert!((c - 2.0).abs() < 1e-10, "kappa_{}: {c}", i + 1);
    }
}

#[test]
fn preset_moments_against_closed_forms() {
    let w = Measure::semicircle();
    let catalan = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0];
    for (j, c) in catalan.iter().enumerate() {
        assert!((w.moment(2 * j as u32) - c).abs() < 1e-11);
        assert!(w.moment(2 * j as u32 + 1).abs() < 1e-12);
    }
    // arcsine on [-2, 2]: central binomial coefficients
    let arc = Measure::arcsine();
    for (j, c) in [1.0, 2.0, 6.0, 20.0, 70.0].iter().enumerate() {
        assert!((arc.moment(2 * j as u32) - c).abs() < 1e-10);
    }
    let t = Measure::tilted_bernoulli(0.9).unwrap();
    let s = t.moment_summary(4, &[3.0]).unwrap();
    assert!((s.cumulant(3) - 8.0 / 3.0).abs() < 1e-12);
    assert!((s.cumulant(4) - (73.0 / 9.0 - 2.0)).abs() < 1e-12);
    // beta_3 = 0.9 (1/3)^3 + 0.1 * 27
    assert!((s.abs_moments[0].1 - (0.9 / 27.0 + 2.7)).abs() < 1e-12);
}

#[test]
fn tail_moment_and_lyapunov_examples() {
    let t = Measure::tilted_bernoulli(0.9).unwrap();
    // only the atom at 3 lies beyond 1
    assert!((t.tail_moment(3.0, 1.0) - 2.7).abs() < 1e-12);
    assert!((t.tail_moment(3.0, 0.2) - t.abs_moment(3.0)).abs() < 1e-12);
    assert_eq!(t.tail_moment(3.0, 3.5), 0.0);
    assert!((t.lyapunov_fraction(3.0, 100) - t.abs_moment(3.0) / 10.0).abs() < 1e-14);
    // semicircle tail beyond t by substitution x = 2 cos s
    let w = Measure::semicircle();
    let tail = |t: f64| {
        let s0 = (t / 2.0).acos();
        let m = 20000;
        let h = s0 / m as f64;
        2.0 * (0..m)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                (2.0 * s.cos()).powi(3) * 4.0 * s.sin().powi(2) / (2.0 * PI) * h
            })
            .sum::<f64>()
    };
    for t0 in [0.5, 1.0, 1.7] {
        assert!((w.tail_moment(3.0, t0) - tail(t0)).abs() < 1e-8);
    }
}

#[test]
fn eta_examples() {
    let b = Measure::bernoulli();
    // bounded support: the tail term vanishes once eps sqrt n exceeds the support radius
    assert!((b.eta_qs(3.0, 1, 100).unwrap() - 1.0).abs() < 1e-12);
    let t = Measure::tilted_bernoulli(0.9).unwrap();
    assert!((t.eta_qs(5.0, 3, 100).unwrap() - 1.0).abs() < 1e-12);
    let mut prev = f64::INFINITY;
    for n in [10u64, 100, 1000, 10_000, 100_000] {
        let v = t.eta_qs(3.5, 2, n).unwrap();
        assert!(v <= prev * (1.0 + 1e-12), "n = {n}");
        assert!(v <= 10f64.powf(2.0) + 1.0);
        prev = v;
    }
    assert!(b.eta_qs(1.5, 1, 10).is_err());
    assert!(b.eta_qs(5.0, 4, 10).is_err());
}

#[test]
fn standardize_then_scale_round_trip() {
    let mu = Measure::discrete(&[(1.0, 0.2), (2.0, 0.5), (6.0, 0.3)]).unwrap();
    let s = mu.standardize().unwrap();
    let sigma = mu.variance().sqrt();
    let back = s.scale(sigma).unwrap();
    for (a, b) in back.atoms().iter().zip(mu.atoms()) {
        assert!((a.location - (b.location - mu.mean())).abs() < 1e-12);
        assert_eq!(a.weight, b.weight);
    }
}

#[test]
fn coarse_uniform_grid_is_accepted_by_its_trapezoid_mass() {
    let tri = r#"{"atoms": [], "support": [-1.0, 1.0], "density_grid": [0.0, 0.5, 1.0, 0.5, 0.0]}"#;
    let mu = Measure::from_json_str(tri).unwrap();
    assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    // triangular law on [-1, 1] has variance 1/6
    assert!((mu.variance() - 1.0 / 6.0).abs() < 5e-3, "{}", mu.variance());
    let off = r#"{"atoms": [[0.0, 0.5]], "support": [-1.0, 1.0], "density_grid": [0.0, 0.5, 1.0, 0.5, 0.0]}"#;
    assert!(Measure::from_json_str(off).is_err());
}
