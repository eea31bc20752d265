use planar_gravity::internal::{
    component_reversibility, dichotomy, limiting_walk_compare, simulate_internal, simulate_walk, walk_transient,
    Firing, InternalConfig,
};
use planar_gravity::rng::substream;

#[test]
fn subcritical_vertices_disappear() {
    let r = dichotomy(&InternalConfig::new(1.0, 2.0, 1000.0, 1), 300, 100).unwrap();
    assert!(r.disappeared as f64 >= 0.99 * r.runs as f64, "{r:?}");
    assert!(r.mean_increment.value + r.mean_increment.half_width < 0.0, "{r:?}");
    assert_eq!(r.failed_checks, 0);
}

#[test]
fn supercritical_degrees_escape() {
    let r = dichotomy(&InternalConfig::new(2.0, 1.0, 1000.0, 1), 300, 100).unwrap();
    assert!(r.exceeded as f64 >= 0.05 * r.runs as f64, "{r:?}");
    assert!(r.mean_increment.value - r.mean_increment.half_width > 0.0, "{r:?}");
}

#[test]
fn global_firing_matches_move_counts() {
    let mut cfg = InternalConfig::new(1.0, 1.0, 2.0, 9);
    cfg.firing = Firing::Global;
    cfg.validate_every = 5;
    for rep in 0..5 {
        let r = simulate_internal(&cfg, rep).unwrap();
        assert_eq!(r.final_vertices as i64, 7 + r.a_moves as i64 - r.inverse_moves as i64);
        assert!(r.gauss_bonnet_ok);
    }
}

#[test]
fn walk_transient_matches_simulation() {
    let exact = walk_transient(1.0, 5, 0.4, 200).unwrap();
    let mut rng = substream(4, 0, 0);
    let n = 40_000;
    let mut counts = vec![0u64; 201];
    for _ in 0..n {
        counts[simulate_walk(1.0, 5, 0.4, &mut rng).min(200) as usize] += 1;
    }
    for k in 3..12 {
        let f = counts[k] as f64 / n as f64;
        let sd = (exact[k] * (1.0 - exact[k]) / n as f64).sqrt().max(1e-4);
        assert!((f - exact[k]).abs() < 4.0 * sd, "{k}: {f} vs {}", exact[k]);
    }
}

#[test]
fn flip_chain_against_walk() {
    let r = limiting_walk_compare(1.0, &[50, 200], 0.3, 600, 3).unwrap();
    println!("{r:?}");
    for e in &r.entries {
        assert!(e.tv < 0.3);
        assert!(e.mean_change.value.abs() < e.mean_change.half_width + 0.2);
    }
    // the fixed-size chain equilibrates while the walk spreads
    let last = r.spread.last().unwrap();
    assert!(last.1 < last.2);
}

#[test]
fn flip_graph_is_one_balanced_component() {
    for faces in [8, 10, 12] {
        let r = component_reversibility(faces).unwrap();
        assert_eq!(r.components.len(), 1, "{r:?}");
        assert_eq!(r.unpaired, 0);
        assert!(r.uniform_balanced);
        if let Some(c) = r.class_size {
            assert_eq!(c, r.states);
        }
    }
}
