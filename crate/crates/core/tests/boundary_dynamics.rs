use planar_gravity::boundary::{
    clt_curvature, curvature_statistics, excursion_length_distribution, loglog_slope, random_closures, return_time_distribution, reversible_variant_check,
    simulate_growth, simulate_replica, stationary_boundary_law, GrowthConfig, Protocol,
};
use planar_gravity::stats::{total_variation, two_sample_chi_square};

#[test]
fn occupation_matches_product_law() {
    let s = simulate_growth(&GrowthConfig::new(1.0, 2.0, 1_000_000, 6)).unwrap();
    assert_eq!(s.occupation_events.iter().sum::<u64>(), 1_000_000);
    assert_eq!(s.corner_moves_at_three, 0);
    assert_eq!(s.euler_violations, 0);
    let law = stationary_boundary_law(1.0, 2.0, 400).unwrap();
    let tv = total_variation(&s.occupation_law(), &law.by_m());
    assert!(tv < 0.01, "tv {tv}");
}

#[test]
fn stationary_tail_exponent() {
    let law = stationary_boundary_law(1.0, 2.0, 200).unwrap();
    // log(k π(k)) is linear in k with slope −ln 2
    let x: Vec<f64> = (20..150).map(|k| k as f64).collect();
    let y: Vec<f64> = (20..150).map(|k| (k as f64 * law.get(k)).ln()).collect();
    let (_, b, _) = planar_gravity::stats::linear_fit(&x, &y).unwrap();
    assert!((b + 2f64.ln()).abs() < 0.01);
}

#[test]
fn return_times() {
    let p = return_time_distribution(1.0, 1.0, 1000).unwrap();
    let (slope, _) = loglog_slope(&p, 10, 1000).unwrap();
    assert!((slope + 2.0).abs() < 0.15, "slope {slope}");
    // simulated excursion lengths against the exact law
    let s = simulate_growth(&GrowthConfig::new(1.0, 2.0, 400_000, 8).boundary_only()).unwrap();
    let exact = excursion_length_distribution(1.0, 2.0, 600).unwrap();
    assert!((exact.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let total: u64 = s.excursions.iter().sum();
    for j in [2usize, 4, 6, 8, 10] {
        let f = s.excursions[j] as f64 / total as f64;
        let sd = (exact[j] * (1.0 - exact[j]) / total as f64).sqrt();
        assert!((f - exact[j]).abs() < 4.0 * sd, "{j}: {f} vs {}", exact[j]);
    }
    assert_eq!(s.excursions.iter().skip(1).step_by(2).sum::<u64>() + s.excursions[0], 0);
}

#[test]
fn full_map_and_boundary_only_agree() {
    let runs = 600;
    let mut hist = [vec![0u64; 200], vec![0u64; 200]];
    for r in 0..runs {
        let full = simulate_replica(&GrowthConfig::new(1.0, 1.0, 300, 21), r).unwrap();
        let bare = simulate_replica(&GrowthConfig::new(1.0, 1.0, 300, 22).boundary_only(), r).unwrap();
        hist[0][full.final_counts.3] += 1;
        hist[1][bare.final_counts.3] += 1;
    }
    let (stat, dof, p) = two_sample_chi_square(&hist[0], &hist[1], 5.0);
    assert!(p > 0.001, "chi-square {stat} on {dof}: p = {p}");
}

#[test]
fn closures_are_spheres() {
    let r = random_closures(1.0, 2.0, 2_000, 7, 50).unwrap();
    assert_eq!(r.unfinished, 0);
    assert_eq!(r.closures, 2_000);
    assert_eq!(r.defect_twelve, 2_000);
    assert_eq!(r.disk_euler_violations, 0);
}

#[test]
fn reversible_variant() {
    let r = reversible_variant_check(1.0, 2.0, 6, 7).unwrap();
    assert_eq!(r.missing_reverse, 0);
    assert!(r.max_balance_error < 1e-12);
    assert!(r.cycle_rank > 0);
    println!("{} states, cycle rank {}, stuck counts {:?}", r.states, r.cycle_rank, r.stuck_counts);
    let r0 = reversible_variant_check(1.0, 0.0, 6, 0).unwrap();
    assert!(r0.projection_consistent);
}

#[test]
fn panel_degrees() {
    let mut cfg = GrowthConfig::new(1.0, 1.0, 100_000, 3);
    cfg.protocol = Some(Protocol { distances: vec![2, 10], ..Default::default() });
    let r = curvature_statistics(&cfg, 2).unwrap();
    assert!((r.total - 1.0).abs() < 0.01);
    let tail = r.tail.unwrap();
    assert!(tail.ci_high < 1.0);
    // at the critical point the panel law is geometric with ratio 4/5
    assert!((tail.rate - r.predicted_ratio).abs() < 0.01, "{} vs {}", tail.rate, r.predicted_ratio);
    assert!(r.chi.iter().all(|e| (0.0..=1.0).contains(&e.value)));
    assert!((r.mean_curvature.value - r.plug_in_curvature).abs() < 1e-9);
}

#[test]
fn curvature_clt() {
    let r = clt_curvature(&GrowthConfig::new(1.3, 1.0, 3_000, 3), &[100, 200, 400], 600).unwrap();
    for e in &r.entries {
        assert!(e.ks < 0.07, "{e:?}");
    }
    for w in r.entries.windows(2) {
        let ratio = w[1].variance / w[0].variance;
        assert!((0.8..=1.25).contains(&ratio), "{ratio}");
    }
}
