use lqg_core::boundary::{BoundarySet, IntervalTiling};
use lqg_core::boxes::{BoxTiling, FractalSet};
use lqg_core::Point;
use proptest::prelude::*;

fn lognormal_cells(seed: u64, len: usize, sigma: f64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len)
        .map(|_| {
            let u: f64 =
                rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0) + rng.gen_range(-1.0..1.0);
            (sigma * u).exp()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leaves_tile_and_respect_threshold(seed in any::<u64>(), k in 3usize..7, sigma in 0.0f64..3.0, rel in 0.0005f64..0.9) {
        let n = 1 << k;
        let cells = lognormal_cells(seed, n * n, sigma);
        let total: f64 = cells.iter().sum();
        let delta = rel * total;
        let t = BoxTiling::build(&cells, n, 1.0, delta).unwrap();
        let mut area = 0.0;
        let mut mass = 0.0;
        for leaf in t.leaves() {
            let s = leaf.square.size(1.0);
            area += s * s;
            mass += leaf.mass;
            if leaf.forced {
                prop_assert_eq!(leaf.square.level as usize, k);
                prop_assert!(leaf.mass >= delta);
            } else {
                prop_assert!(leaf.mass < delta);
            }
            if let Some(p) = leaf.square.parent() {
                prop_assert!(t.mass(&p) >= delta);
            }
        }
        prop_assert!((area - 1.0).abs() < 1e-12);
        prop_assert!((mass - total).abs() < 1e-9 * total);
    }

    #[test]
    fn point_lookup_agrees_with_leaves(seed in any::<u64>(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let n = 32;
        let cells = lognormal_cells(seed, n * n, 1.5);
        let total: f64 = cells.iter().sum();
        let t = BoxTiling::build(&cells, n, 1.0, 0.01 * total).unwrap();
        let leaf = t.box_of_point(Point::new(x, y)).unwrap();
        let c = leaf.square.corner(1.0);
        let s = leaf.square.size(1.0);
        prop_assert!(c.x <= x && x <= c.x + s && c.y <= y && y <= c.y + s);
        prop_assert!(t.leaves().contains(&leaf));
    }

    #[test]
    fn sandwich_bounds(seed in any::<u64>(), sigma in 0.0f64..2.5, rel in 0.001f64..0.5, pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..20)) {
        let n = 64;
        let cells = lognormal_cells(seed, n * n, sigma);
        let total: f64 = cells.iter().sum();
        let delta = rel * total;
        let t = BoxTiling::build(&cells, n, 1.0, delta).unwrap();
        let pts: Vec<Point> = pts.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let x = FractalSet::points(n, 1.0, &pts).unwrap();
        let h = t.hits(&x).unwrap();
        let nb = h.boxes as f64;
        if h.forced == 0 {
            prop_assert!(h.mass <= delta * nb);
        }
        if h.parents > 0 {
            prop_assert!(h.parent_mass >= delta * h.parents as f64);
            prop_assert!(delta * nb <= 4.0 * h.parent_mass);
        }
        prop_assert!(h.mass <= h.parent_mass + 1e-12 * total || h.parents == 0);
    }

    #[test]
    fn interval_leaves_tile_and_respect_threshold(seed in any::<u64>(), k in 3usize..11, sigma in 0.0f64..3.0, rel in 0.0005f64..0.9) {
        let n = 1 << k;
        let cells = lognormal_cells(seed, n, sigma);
        let total: f64 = cells.iter().sum();
        let delta = rel * total;
        let t = IntervalTiling::build(&cells, 1.0, delta).unwrap();
        let mut end = 0.0;
        for leaf in t.leaves() {
            prop_assert!((leaf.interval.start(1.0) - end).abs() < 1e-12);
            end += leaf.interval.size(1.0);
            prop_assert_eq!(leaf.forced, leaf.mass >= delta);
            if leaf.forced {
                prop_assert_eq!(leaf.interval.level as usize, k);
            }
            if let Some(p) = leaf.interval.parent() {
                prop_assert!(t.mass(&p) >= delta);
            }
        }
        prop_assert!((end - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interval_sandwich_bounds(seed in any::<u64>(), rel in 0.002f64..0.5, xs in prop::collection::vec(0.0f64..1.0, 1..10)) {
        let n = 512;
        let cells = lognormal_cells(seed, n, 1.5);
        let total: f64 = cells.iter().sum();
        let delta = rel * total;
        let t = IntervalTiling::build(&cells, 1.0, delta).unwrap();
        let x = BoundarySet::points(n, 1.0, &xs).unwrap();
        let h = t.hits(&x).unwrap();
        if h.forced == 0 {
            prop_assert!(h.mass <= delta * h.boxes as f64);
        }
        if h.parents > 0 {
            prop_assert!(delta * h.boxes as f64 <= 2.0 * h.parent_mass);
        }
        for &p in &xs {
            let leaf = t.box_of_point(p).unwrap();
            let (s, w) = (leaf.interval.start(1.0), leaf.interval.size(1.0));
            prop_assert!(s <= p && p <= s + w);
        }
    }
}
