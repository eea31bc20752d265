use num_bigint::BigUint;
use planar_gravity::enumeration::*;

#[test]
fn recurrence_matches_exhaustive_generation() {
    let t = tutte_table(8, 12).unwrap();
    let b = brute_force_counts(8).unwrap();
    for n in 0..=8 {
        for m in 2..=12 {
            assert_eq!(t.get(n, m), b.get(n, m), "N={n} m={m}");
        }
    }
}

#[test]
fn closed_form_matches_recurrence() {
    let t = tutte_table(30, 30).unwrap();
    for m in 2..=30u64 {
        let mut j = 0;
        while m + 2 * j <= 30 {
            assert_eq!(closed_form_rooted(m, j).unwrap(), t.get((m + 2 * j) as usize, m as usize), "m={m} j={j}");
            j += 1;
        }
    }
}

#[test]
fn exponential_bounds_hold() {
    let t = tutte_table(40, 42).unwrap();
    let b = exponential_bounds(&t);
    assert!(b.gamma_low > 1.0 && b.gamma_low <= b.gamma_high);
    for n in 2..=40usize {
        let tot = t.row_total(n);
        let l = ln_big(&tot);
        assert!(l >= n as f64 * b.gamma_low.ln() - 1e-9 && l <= n as f64 * b.gamma_high.ln() + 1e-9);
    }
    // log-ratios of the totals increase towards ln c in the tail
    let lr = &b.log_ratios[20..];
    assert!(lr.windows(2).all(|w| w[1] >= w[0] - 1e-12));
}

#[test]
fn unrooted_ratio_is_reported() {
    for faces in [2usize, 4, 6] {
        let (rooted, unrooted) = sphere_counts(faces).unwrap();
        let est = unrooted_estimate(faces as u64, &BigUint::from(rooted)).unwrap();
        let ratio = ln_rational(&est).exp() / unrooted as f64;
        assert!(ratio > 0.0 && ratio.is_finite());
    }
}
