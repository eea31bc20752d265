use num_rational::BigRational;
use num_traits::{Signed, Zero};
use planar_gravity::enumeration::{fit_growth_ln, ln_rational, tutte_table, FitConfig};
use planar_gravity::gf::*;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn ln_points(s: &SeriesCoeffs) -> Vec<(usize, f64)> {
    s.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(n, c)| (n, ln_rational(c))).collect()
}

#[test]
fn s_column_equals_enumeration() {
    let s = s_series(&rat(1, 1), 20).unwrap();
    let t = tutte_table(20, 22).unwrap();
    for n in 0..=20 {
        assert_eq!(s.coeffs[n], BigRational::from_integer(t.get(n, 2).into()), "order {n}");
    }
}

#[test]
fn coefficients_are_nonnegative() {
    for beta in [rat(1, 4), rat(2, 27), rat(1, 1), rat(4, 1)] {
        let y = y_series(&beta, 30).unwrap();
        let s = s_series(&beta, 30).unwrap();
        assert!(y.coeffs.iter().chain(&s.coeffs).all(|c| !c.is_negative()));
    }
}

#[test]
fn growth_and_exponent_from_400_coefficients() {
    let s = s_series(&rat(1, 1), 400).unwrap();
    let f = fit_growth_ln(&ln_points(&s), &FitConfig::default()).unwrap();
    let c = 3.0 * 1.5f64.sqrt();
    assert!((f.growth_constant / c - 1.0).abs() < 0.005, "{f:?}");
    assert!((f.exponent + 2.5).abs() < 0.1, "{f:?}");
}

#[test]
fn tail_flatness_at_two_betas() {
    for (beta, x1) in [(rat(1, 1), (2.0f64 / 27.0).sqrt()), (rat(2, 27), 1.0)] {
        let s = s_series(&beta, 400).unwrap();
        let r = coefficient_asymptotics_check(&s, x1, 1.5).unwrap();
        assert!(r.sup_relative_deviation < 0.05, "{r:?}");
    }
}

#[test]
fn residuals_to_order_50() {
    let r = functional_residuals(&rat(1, 1), 50).unwrap();
    assert!(r.all_zero(), "{r:?}");
}

#[test]
fn s_is_finite_at_the_critical_point() {
    let s = s_series(&rat(2, 27), 200).unwrap();
    let v = s.eval(1.0);
    assert!(v.is_finite() && v > 0.0);
}
