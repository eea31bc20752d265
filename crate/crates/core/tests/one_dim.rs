use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use planar_gravity::one_dim::{
    bulk_uniformity, context_free_sim, critical_grammar, critical_queue_clt, gamma_slope, green_function, lifo_queue_sim,
    mu_critical, path_counts, susceptibility, susceptibility_numeric, QueueConfig,
};

#[test]
fn convolution_identity() {
    let steps: [[i64; 2]; 4] = [[1, 0], [-1, 0], [0, 1], [0, -1]];
    for n in 1..14 {
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                let lhs = path_counts(n, &[a, b]).unwrap();
                let rhs: BigUint = steps.iter().map(|e| path_counts(n - 1, &[a - e[0], b - e[1]]).unwrap()).sum();
                assert_eq!(lhs, rhs, "({n}, {a}, {b})");
            }
        }
    }
    // one coordinate reduces to a binomial
    assert_eq!(path_counts(10, &[4]).unwrap(), BigUint::from(120u32));
    // three dimensions against brute force
    for n in 0..7usize {
        let mut count = 0u64;
        for code in 0..6u64.pow(n as u32) {
            let mut c = code;
            let mut p = [0i64; 3];
            for _ in 0..n {
                let s = (c % 6) as usize;
                c /= 6;
                p[s / 2] += if s % 2 == 0 { 1 } else { -1 };
            }
            count += u64::from(p == [1, 0, 1]);
        }
        assert_eq!(path_counts(n, &[1, 0, 1]).unwrap(), BigUint::from(count));
    }
}

#[test]
fn local_limit_constant_is_flat() {
    let vals: Vec<f64> = [100usize, 150, 200]
        .iter()
        .map(|&n| {
            let c = path_counts(n, &[0, 0]).unwrap();
            let r = BigRational::new(c.into(), BigUint::from(4u32).pow(n as u32).into());
            r.to_f64().unwrap() * n as f64
        })
        .collect();
    let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |a, &v| (a.0.min(v), a.1.max(v)));
    assert!(hi / lo < 1.02, "{vals:?}");
}

#[test]
fn susceptibility_closed_form() {
    for d in [1usize, 2] {
        let mc = mu_critical(d);
        for gap in [0.1, 0.3, 1.0] {
            let n = susceptibility_numeric(d, mc + gap, 250).unwrap();
            let exact = susceptibility(mc + gap, mc).unwrap();
            assert!((n.value - exact).abs() < 1e-6 + n.tail_bound, "d={d} gap={gap}");
        }
    }
    let (slope, _) = gamma_slope(1e-3, 1e-1, 41).unwrap();
    assert!((slope + 1.0).abs() < 0.01, "{slope}");
    assert!(susceptibility(1.0, 1.0).is_err());
    // Σ_x G(x) over a box equals χ up to the mass outside
    let mc = mu_critical(1);
    let box_sum: f64 = (-60i64..=60).map(|x| green_function(mc + 0.5, &[x], 120).unwrap().value).sum();
    assert!((box_sum - susceptibility(mc + 0.5, mc).unwrap()).abs() < 1e-6);
}

#[test]
fn queue_and_grammar_decay() {
    let q = lifo_queue_sim(&QueueConfig { lambda: 1.0, nu: 2.0, d: 1, horizon: 4e5, seed: 1 }, 0).unwrap();
    let r = q.decay_rate.unwrap();
    assert!((r.value - 2f64.ln()).abs() < 0.02, "{r:?}");
    let g = context_free_sim(1.0, 2.0, 1e5, 1, 0).unwrap();
    let r = g.decay_rate.unwrap();
    assert!((r.value - 2f64.ln()).abs() < 0.02, "{r:?}");
}

#[test]
fn supercritical_bulk_is_bernoulli() {
    let q = lifo_queue_sim(&QueueConfig { lambda: 2.0, nu: 1.0, d: 2, horizon: 3e4, seed: 2 }, 0).unwrap();
    assert!(q.final_length > 10_000);
    let (p1, p2) = bulk_uniformity(&q);
    assert!(p1 > 0.001 && p2 > 0.001, "{p1} {p2}");
}

#[test]
fn critical_queue_is_half_normal() {
    let c = critical_queue_clt(1.0, 1, 2000.0, 3000, 5).unwrap();
    assert!(c.ks_half_normal < 0.05, "{c:?}");
    assert!((c.scale / c.predicted_scale - 1.0).abs() < 0.05);
}

#[test]
fn critical_grammar_grows_linearly() {
    let c = critical_grammar(1.0, 200.0, 400, 5).unwrap();
    println!("{c:?}");
    assert!(c.ks_exponential_linear < 0.1);
}
