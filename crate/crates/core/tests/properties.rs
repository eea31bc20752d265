use num_bigint::BigUint;
use planar_gravity::boundary::{disk_euler_holds, stationary_boundary_law, triangle};
use planar_gravity::enumeration::{closed_form_rooted, tutte_table};
use planar_gravity::map::gauss_bonnet_defect;
use planar_gravity::map::{CanonicalCode, CODE_VERSION};
use planar_gravity::nonlinear::{step, MeasureGrid, ProcessParams};
use planar_gravity::one_dim::path_counts;
use planar_gravity::rng::substream;
use planar_gravity::trees::{decode, encode, PlanarTree};
use planar_gravity::{MapMode, RootedMap};
use proptest::prelude::*;
use rand::Rng;

fn check_code(map: &RootedMap) {
    let code = map.canonical_code();
    let bytes = code.as_bytes().to_vec();
    assert_eq!(bytes[0], CODE_VERSION);
    let back = CanonicalCode::from_bytes(&bytes).unwrap();
    assert_eq!(back, code);
    let rebuilt = back.decode(map.mode()).unwrap();
    assert_eq!(rebuilt.canonical_code(), code);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_moves_keep_a_valid_disk(ops in prop::collection::vec((0u8..3, any::<u32>()), 1..60)) {
        let mut map = triangle();
        for (op, pick) in ops {
            let b = map.boundary();
            let h = b[pick as usize % b.len()];
            match op {
                0 => { map.attach_edge(h).unwrap(); }
                1 => { if map.m() > 3 { map.attach_corner(h).unwrap(); } }
                _ => { map.detach_triangle(h).unwrap(); }
            }
            map.validate().unwrap();
            prop_assert!(map.m() >= 3);
            let (n, m, v, l) = map.counters();
            prop_assert!(disk_euler_holds(v, l, n, m));
        }
        check_code(&map.compacted());
        let t = encode(&map).unwrap();
        prop_assert_eq!(decode(&t).unwrap().canonical_code(), map.canonical_code());
        let c = t.counts();
        prop_assert_eq!((c.faces(), c.boundary()), (map.n(), map.m()));
    }

    #[test]
    fn sphere_moves_keep_curvature_twelve(seed in any::<u64>(), steps in 1usize..80) {
        let mut map = RootedMap::octahedron().with_mode(MapMode::Simplicial).unwrap();
        let mut rng = substream(seed, 0, 1);
        for _ in 0..steps {
            let hs: Vec<u32> = map.half_edges().collect();
            let h = hs[rng.random_range(0..hs.len())];
            match rng.random_range(0..3) {
                0 => { if map.can_flip(h) { map.flip(h).unwrap(); } }
                1 => { map.subdivide_edge(h).unwrap(); }
                _ => {
                    let x = map.origin(h);
                    let opts = map.unsubdivide_options(x);
                    if !opts.is_empty() {
                        map.unsubdivide(x, opts[rng.random_range(0..opts.len())]).unwrap();
                    }
                }
            }
            map.validate().unwrap();
            prop_assert_eq!(gauss_bonnet_defect(&map).unwrap(), 12);
            prop_assert_eq!(map.euler_characteristic(), 2);
        }
        check_code(&map.compacted());
    }

    #[test]
    fn subdivision_is_undone_by_its_inverse(seed in any::<u64>()) {
        let mut rng = substream(seed, 0, 2);
        let mut map = RootedMap::octahedron().with_mode(MapMode::Simplicial).unwrap();
        for _ in 0..6 {
            let hs: Vec<u32> = map.half_edges().collect();
            map.subdivide_edge(hs[rng.random_range(0..hs.len())]).unwrap();
        }
        let before = map.compacted().unrooted_code();
        let hs: Vec<u32> = map.half_edges().collect();
        let x = map.subdivide_edge(hs[rng.random_range(0..hs.len())]).unwrap();
        let opts = map.unsubdivide_options(x);
        prop_assert!(!opts.is_empty());
        let undo = opts.iter().any(|&p| {
            let mut m = map.clone();
            m.unsubdivide(x, p).is_ok() && m.compacted().unrooted_code() == before
        });
        prop_assert!(undo);
    }

    #[test]
    fn tree_strings_round_trip(word in prop::collection::vec(0u8..3, 0..40)) {
        // build a valid preorder word by closing the random prefix with leaves
        let mut w = Vec::new();
        let mut open = 1usize;
        for t in word {
            if open == 0 { break; }
            w.push(t);
            open = open - 1 + t as usize;
        }
        w.extend(std::iter::repeat_n(0, open));
        // words with a unary node over a two-edge boundary code nothing
        let Ok(tree) = PlanarTree::from_preorder(w) else { return Ok(()) };
        let s = tree.to_parens();
        prop_assert_eq!(s.parse::<PlanarTree>().unwrap(), tree.clone());
        let map = decode(&tree).unwrap();
        map.validate().unwrap();
        prop_assert_eq!(encode(&map).unwrap(), tree);
    }

    #[test]
    fn path_counts_convolve(n in 1usize..30, x in -6i64..=6, y in -6i64..=6, z in -3i64..=3) {
        let p = [x, y, z];
        let mut sum = BigUint::default();
        for axis in 0..3 {
            for s in [-1i64, 1] {
                let mut q = p;
                q[axis] -= s;
                sum += path_counts(n - 1, &q).unwrap();
            }
        }
        prop_assert_eq!(path_counts(n, &p).unwrap(), sum);
        // symmetric under sign changes and axis swaps
        prop_assert_eq!(path_counts(n, &[-x, z, y]).unwrap(), path_counts(n, &p).unwrap());
    }

    #[test]
    fn closed_form_agrees(m in 2u64..9, j in 0u64..8) {
        let t = tutte_table((m + 2 * j) as usize, m as usize).unwrap();
        prop_assert_eq!(closed_form_rooted(m, j).unwrap(), t.get((m + 2 * j) as usize, m as usize));
        // parity: no map with N + m odd
        prop_assert_eq!(t.get((m + 2 * j - 1) as usize, m as usize), BigUint::default());
    }

    #[test]
    fn measure_step_contracts(r1 in 0.0f64..0.5, r2 in 0.0f64..0.5, seed in any::<u64>()) {
        let p = ProcessParams::new(r1, r2).unwrap();
        let mut rng = substream(seed, 0, 3);
        let mut pair = [MeasureGrid::zero(14, 18), MeasureGrid::zero(14, 18)];
        for q in &mut pair {
            let mut cells = Vec::new();
            for n in 0..=4usize {
                for m in (2..=n + 2).filter(|m| (n + m) % 2 == 0) {
                    cells.push((n, m, rng.random::<f64>()));
                }
            }
            let total: f64 = cells.iter().map(|c| c.2).sum();
            for (n, m, v) in cells {
                q.set(n, m, v / total);
            }
        }
        let d0 = pair[0].tv_distance(&pair[1]);
        let (a, b) = (step(&pair[0], &p), step(&pair[1], &p));
        prop_assert!(a.total() <= 1.0 + 1e-12);
        prop_assert!(a.tv_distance(&b) <= (r1 + 2.0 * r2) * d0 + 1e-12);
    }

    #[test]
    fn stationary_law_is_normalized(l1 in 0.1f64..1.0, gap in 0.1f64..2.0) {
        let law = stationary_boundary_law(l1, l1 + gap, 400).unwrap();
        let s: f64 = law.probs.iter().sum();
        prop_assert!((s + law.truncated_mass - 1.0).abs() < 1e-9 || law.truncated_mass > 0.0);
        prop_assert!(s <= 1.0 + 1e-12);
        prop_assert!(law.probs.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn substreams_are_reproducible(seed in any::<u64>(), replica in any::<u64>()) {
        let a: u64 = substream(seed, replica, 5).random();
        let b: u64 = substream(seed, replica, 5).random();
        let c: u64 = substream(seed, replica.wrapping_add(1), 5).random();
        prop_assert_eq!(a, b);
        prop_assert_ne!(a, c);
    }
}
