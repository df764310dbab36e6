use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::One;

use freeclt::formal_series::{
    collect_bk, collect_groups, phi_series, revert_g, solve_g, verify_closed_forms, CumulantPolynomial, Monomial,
};
use freeclt::Error;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn closed_form_verdict_is_stable_in_truncation() {
    let verdicts: Vec<bool> = [10, 20, 30].iter().map(|&m| verify_closed_forms(m).unwrap().passed()).collect();
    assert_eq!(verdicts, vec![true, true, true]);
    assert!(verify_closed_forms(9).is_err());
}

#[test]
fn first_group_is_alpha3_at_even_powers() {
    let m = 40;
    let ginv = revert_g(&solve_g(m + 4, 2).unwrap(), m + 4).unwrap();
    let groups = collect_groups(&ginv, 2, m).unwrap();
    let a3 = CumulantPolynomial::monomial(Monomial::alpha(3), BigRational::one());
    for j in 0..=m {
        let g0 = groups[0].coeff(j);
        assert_eq!(*g0, if j == 1 { CumulantPolynomial::one() } else { CumulantPolynomial::zero() });
        let want = if j >= 4 && j % 2 == 0 { a3.clone() } else { CumulantPolynomial::zero() };
        assert_eq!(*groups[1].coeff(j), want, "y^{j}");
    }
    assert_eq!(collect_bk(&ginv, 2, m).unwrap().len(), 2);
}

#[test]
fn truncation_errors() {
    let ginv = revert_g(&solve_g(14, 2).unwrap(), 14).unwrap();
    assert!(matches!(collect_bk(&ginv, 2, 12), Err(Error::TruncationOrder(_))));
    assert!(matches!(collect_bk(&ginv, 3, 8), Err(Error::TruncationOrder(_))));
    assert!(collect_bk(&ginv, 2, 10).is_ok());
    assert!(phi_series(1, 2).is_err());
    assert!(phi_series(10, 7).is_err());
    assert!(solve_g(2, 2).is_err());
}

#[test]
fn inverse_coefficients_leading_terms() {
    let ginv = revert_g(&solve_g(20, 4).unwrap(), 20).unwrap();
    let u = Monomial::u();
    // b_2 = -a_2 = -alpha_3 u
    let b2 = CumulantPolynomial::monomial(Monomial::alpha(3).mul(&u), rat(-1));
    assert_eq!(ginv.coeff(2).below_u(2), b2);
    assert!(ginv.coeff(0).is_zero() && ginv.coeff(1).is_zero());
}

#[test]
fn numeric_reversion_of_g() {
    let (order, u_max) = (40, 4);
    let g = solve_g(order, u_max).unwrap();
    let ginv = revert_g(&g, order).unwrap();
    let alphas = [0.8, 2.1, -0.4, 1.3, 0.6, -0.9];
    let u = 0.05;
    for z in [Complex64::new(6.0, 3.0), Complex64::new(-4.0, 5.0), Complex64::new(0.5, 7.0)] {
        let back = g.eval(ginv.eval(z, &alphas, u), &alphas, u);
        // terms of u-degree above u_max are dropped, so agreement is to O(u^5)
        assert!((back - z).norm() < 1e-5, "z = {z}: {back}");
        let lhs = {
            let gz = g.eval(z, &alphas, u);
            gz + 1.0 / gz
        };
        let rhs = z + phi_series(order + 1, u_max).unwrap().eval(z, &alphas, u);
        assert!((lhs - rhs).norm() < 1e-5, "z = {z}");
    }
}
