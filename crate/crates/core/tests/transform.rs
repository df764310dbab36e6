use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use freeclt::meixner::MeixnerParams;
use freeclt::transform::{
    cauchy_transform, cdf_of, invert_density, kolmogorov_distance, kolmogorov_grid_for, reciprocal_transform,
    voiculescu_transform, FnEvaluator, SemicircleCauchy,
};
use freeclt::Measure;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn inner_grid(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let (mid, half) = (0.5 * (lo + hi), 0.45 * (hi - lo));
    (0..=count).map(move |i| mid - half + 2.0 * half * i as f64 / count as f64)
}

#[test]
fn inversion_recovers_closed_form_densities() {
    for x in inner_grid(-2.0, 2.0, 400) {
        let got = invert_density(&SemicircleCauchy, x, 1e-6).unwrap();
        let exact = (4.0 - x * x).sqrt() / (2.0 * PI);
        assert!((got - exact).abs() <= 1e-4, "x = {x}");
    }
    let p = MeixnerParams::new(0.4, 0.1, 0.2).unwrap();
    let g = FnEvaluator {
        f: |z: Complex64| Ok(p.cauchy(z)),
        tag: "meixner".into(),
    };
    let (lo, hi) = p.support();
    for x in inner_grid(lo, hi, 400) {
        let got = invert_density(&g, x, 1e-6).unwrap();
        let exact = freeclt::meixner::meixner_density(&p, x).unwrap();
        assert!((got - exact).abs() <= 1e-4, "x = {x}");
    }
}

#[test]
fn cauchy_examples() {
    let b = Measure::bernoulli();
    assert!((cauchy_transform(&b, c(0.0, 1.0)).unwrap() - c(0.0, -0.5)).norm() < 1e-14);
    assert!((reciprocal_transform(&b, c(0.0, 1.0)).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
    let g = cauchy_transform(&Measure::semicircle(), c(0.0, 2.0)).unwrap();
    assert!((g - c(0.0, 1.0 - 2f64.sqrt())).norm() < 1e-12);
}

#[test]
fn kolmogorov_semicircle_against_arcsine() {
    let w = cdf_of(&Measure::semicircle());
    let arc = cdf_of(&Measure::arcsine().standardize().unwrap());
    let d = kolmogorov_distance(|x| w.eval(x), |x| arc.eval(x), &kolmogorov_grid_for(&w, &arc)).unwrap();
    // brute force on closed-form distribution functions
    let r = 2f64.sqrt();
    let fw = |x: f64| {
        let x = x.clamp(-2.0, 2.0);
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    };
    let fa = |x: f64| 0.5 + (x.clamp(-r, r) / r).asin() / PI;
    let m = 2_000_000;
    let brute = (0..=m)
        .map(|i| -2.5 + 5.0 * i as f64 / m as f64)
        .map(|x| (fw(x) - fa(x)).abs())
        .fold(0.0, f64::max);
    assert!((d - brute).abs() < 1e-6, "{d} vs {brute}");
}

#[test]
fn voiculescu_of_standardized_law_behaves_like_one_over_z() {
    for mu in [Measure::bernoulli(), Measure::tilted_bernoulli(0.9).unwrap(), Measure::semicircle()] {
        let z = c(0.0, 10.0);
        let phi = voiculescu_transform(&mu, z, 1e-13).unwrap();
        let k3 = mu.moment(3);
        // phi(z) = 1/z + kappa_3/z^2 + O(|z|^-3)
        assert!((phi - 1.0 / z - k3 / (z * z)).norm() < 0.02, "{phi}");
    }
    let phi = voiculescu_transform(&Measure::semicircle(), c(0.5, 3.0), 1e-13).unwrap();
    assert!((phi - 1.0 / c(0.5, 3.0)).norm() < 1e-10);
}

fn discrete() -> impl Strategy<Value = Measure> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..6).prop_filter_map("bad", |pts| {
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let atoms: Vec<(f64, f64)> = pts.iter().map(|&(x, w)| (x, w / total)).collect();
        Measure::discrete(&atoms).ok()
    })
}

fn upper() -> impl Strategy<Value = Complex64> {
    (-5.0f64..5.0, 1e-3f64..5.0).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cauchy_transform_is_nevanlinna(mu in discrete(), z in upper()) {
        let g = cauchy_transform(&mu, z).unwrap();
        prop_assert!(g.im <= 0.0);
        prop_assert!(g.norm() <= (1.0 + 1e-12) / z.im);
    }

    #[test]
    fn reciprocal_transform_lifts_imaginary_part(mu in discrete(), z in upper()) {
        let f = reciprocal_transform(&mu, z).unwrap();
        prop_assert!(f.im >= z.im * (1.0 - 1e-10));
    }

    #[test]
    fn kolmogorov_is_a_metric(a in discrete(), b in discrete(), m in discrete()) {
        let (fa, fb, fm) = (cdf_of(&a), cdf_of(&b), cdf_of(&m));
        let mut grid = kolmogorov_grid_for(&fa, &fb);
        grid.extend(kolmogorov_grid_for(&fa, &fm));
        grid.sort_by(f64::total_cmp);
        let dist = |f: &freeclt::transform::Cdf, g: &freeclt::transform::Cdf| {
            kolmogorov_distance(|x| f.eval(x), |x| g.eval(x), &grid).unwrap()
        };
        let (ab, ba, am, mb) = (dist(&fa, &fb), dist(&fb, &fa), dist(&fa, &fm), dist(&fm, &fb));
        prop_assert_eq!(dist(&fa, &fa), 0.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert_eq!(ab, ba);
        prop_assert!(ab <= am + mb + 1e-12);
    }
}
