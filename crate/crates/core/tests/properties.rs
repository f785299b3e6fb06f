use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use cellscan_core::analytic::{mt_pmf, normal_mass_with_tol, pmf_for_footprints, residual_regions, SectorApprox};
use cellscan_core::campaign::{prepare, simulate_users};
use cellscan_core::codebook::{seq_dsls, seq_edp, seq_random, seq_sls};
use cellscan_core::output::users_csv;
use cellscan_core::{
    antenna_gain_db, Algorithm, BeamConfig, Codebook, Environment, GeoContextDb, LevelRanges, LinkBudget, Obstacle,
    PathKind, Point2D, ScenarioConfig,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BS: Point2D = Point2D { x: 225.0, y: 175.0 };

fn point() -> impl Strategy<Value = Point2D> {
    (0.0..450.0f64, 0.0..350.0f64).prop_map(|(x, y)| Point2D::new(x, y))
}

fn obstacle() -> impl Strategy<Value = Obstacle> {
    (20.0..430.0f64, 20.0..330.0f64).prop_map(|(x, y)| Obstacle::new(x, y, 20.0))
}

fn env_with(obstacles: Vec<Obstacle>) -> Option<Environment> {
    let kept: Vec<Obstacle> = obstacles.into_iter().filter(|o| !o.contains_closed(BS)).collect();
    Environment::new(450.0, 350.0, BS, kept).ok()
}

fn ranges(cb: &Codebook) -> LevelRanges {
    LevelRanges::new(cb, &LinkBudget::default(), TAU / 12.0)
}

fn is_permutation(cb: &Codebook, configs: &[BeamConfig]) -> bool {
    let set: HashSet<BeamConfig> = configs.iter().copied().collect();
    set.len() == configs.len() && configs.len() == cb.total_configs() && configs.iter().all(|&c| cb.is_valid(c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gain_half_power_and_symmetry(w in 0.01..TAU, frac in 0.0..3.0f64) {
        prop_assert!((antenna_gain_db(w, 0.0) - antenna_gain_db(w, w / 2.0) - 3.0).abs() < 1e-9);
        let phi = frac * w;
        prop_assert_eq!(antenna_gain_db(w, phi), antenna_gain_db(w, -phi));
        prop_assert!(antenna_gain_db(w, phi) <= antenna_gain_db(w, 0.0));
    }

    #[test]
    fn wider_beams_reach_less(a in 1.0..180.0f64, b in 1.0..180.0f64, mt in 5.0..90.0f64) {
        prop_assume!((a - b).abs() > 1e-3);
        let link = LinkBudget::default();
        let (narrow, wide) = if a < b { (a, b) } else { (b, a) };
        let r_n = link.max_aligned_range(narrow.to_radians(), mt.to_radians());
        let r_w = link.max_aligned_range(wide.to_radians(), mt.to_radians());
        prop_assert!(r_n > r_w);
    }

    #[test]
    fn mirror_is_an_involution(o in obstacle(), p in point(), k in 0usize..8) {
        let env = env_with(vec![o]);
        prop_assume!(env.is_some());
        let env = env.unwrap();
        let s = &env.surfaces()[k % env.surfaces().len()];
        prop_assert!(s.mirror(s.mirror(p)).distance(p) < 1e-9);
        prop_assert!((s.signed_distance(s.mirror(p)) + s.signed_distance(p)).abs() < 1e-9);
    }

    #[test]
    fn path_lengths_match_geometry(obs in prop::collection::vec(obstacle(), 0..6), p in point()) {
        let env = env_with(obs);
        prop_assume!(env.is_some());
        let env = env.unwrap();
        prop_assume!(env.is_free(p) && p.distance(BS) > 1.0);
        for path in env.single_bounce_paths(BS, p) {
            match path.kind {
                PathKind::Los => prop_assert!((path.length - BS.distance(p)).abs() < 1e-9),
                PathKind::Reflected => {
                    let hit = path.reflection_point.unwrap();
                    prop_assert!((BS.distance(hit) + hit.distance(p) - path.length).abs() < 1e-6);
                    prop_assert!(path.length >= BS.distance(p) - 1e-9);
                }
            }
        }
    }

    #[test]
    fn paths_are_symmetric(obs in prop::collection::vec(obstacle(), 0..6), p in point()) {
        let env = env_with(obs);
        prop_assume!(env.is_some());
        let env = env.unwrap();
        prop_assume!(env.is_free(p) && p.distance(BS) > 1.0);
        let mut fwd: Vec<f64> = env.single_bounce_paths(BS, p).iter().map(|x| x.length).collect();
        let mut back: Vec<f64> = env.single_bounce_paths(p, BS).iter().map(|x| x.length).collect();
        fwd.sort_by(f64::total_cmp);
        back.sort_by(f64::total_cmp);
        prop_assert_eq!(fwd.len(), back.len());
        for (a, b) in fwd.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn adding_an_obstacle_never_clears_los(obs in prop::collection::vec(obstacle(), 0..5), extra in obstacle(), p in point()) {
        let env = env_with(obs);
        prop_assume!(env.is_some());
        let env = env.unwrap();
        prop_assume!(!extra.contains_closed(BS));
        let more = env.with_obstacle(extra).unwrap();
        if more.is_los_clear(BS, p) {
            prop_assert!(env.is_los_clear(BS, p));
        }
    }

    #[test]
    fn sequences_are_permutations(nominal in point(), n in 1usize..40, seed in any::<u64>()) {
        let cb = Codebook::default();
        let r = ranges(&cb);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(is_permutation(&cb, seq_random(&cb, &mut rng).configs()));
        prop_assert!(is_permutation(&cb, seq_dsls(&cb, &r, nominal, BS).configs()));
        prop_assert!(is_permutation(&cb, seq_edp(&cb, &r, nominal, BS, n).unwrap().configs()));
        let sls = seq_sls(&cb, nominal, BS);
        let set: HashSet<BeamConfig> = sls.configs().iter().copied().collect();
        prop_assert_eq!(set.len(), sls.len());
        prop_assert!(sls.configs().iter().all(|c| c.level == cb.narrowest()));
    }

    #[test]
    fn edp_single_sector_starts_like_dsls(nominal in point()) {
        let cb = Codebook::default();
        let r = ranges(&cb);
        let edp = seq_edp(&cb, &r, nominal, BS, 1).unwrap();
        let dsls = seq_dsls(&cb, &r, nominal, BS);
        prop_assert_eq!(edp.configs()[0], dsls.configs()[0]);
    }

    #[test]
    fn query_is_deduplicated_and_in_range(
        entries in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64, 0usize..12), 0..80),
        q in (0.0..100.0f64, 0.0..100.0f64),
        m in 0.0..60.0f64,
    ) {
        let mut db = GeoContextDb::new();
        for &(x, y, d) in &entries {
            db.insert(Point2D::new(x, y), BeamConfig::new(5, d));
        }
        let p = Point2D::new(q.0, q.1);
        let got = db.query(p, m);
        let set: HashSet<BeamConfig> = got.iter().copied().collect();
        prop_assert_eq!(set.len(), got.len());
        // nearest in-range entry per config, ascending
        let nearest: Vec<f64> = got
            .iter()
            .map(|c| {
                db.entries()
                    .iter()
                    .filter(|e| e.config == *c)
                    .map(|e| e.nominal_pos.distance(p))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        prop_assert!(nearest.iter().all(|&d| d <= m));
        prop_assert!(nearest.windows(2).all(|w| w[0] <= w[1]));
        if m == 0.0 {
            prop_assert!(got.is_empty());
        }
    }

    #[test]
    fn mt_pmf_spreads_each_step(p in prop::collection::vec(0.0..1.0f64, 1..20), m in 1usize..16) {
        let out = mt_pmf(&p, m);
        prop_assert_eq!(out.len(), p.len() * m);
        for (n, v) in out.iter().enumerate() {
            prop_assert_eq!(*v, p[n / m] / m as f64);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residuals_are_disjoint_with_bounded_mass(nominal in point(), n in 1usize..9, sigma in 1.0..60.0f64) {
        let cb = Codebook::default();
        let approx = SectorApprox::new(&cb, &LinkBudget::default(), TAU / 12.0, BS);
        let seq = seq_edp(&cb, approx.ranges(), nominal, BS, n).unwrap();
        let regions = residual_regions(&approx.footprints(&seq));
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                prop_assert!(regions[i].overlap_area(&regions[j]) < 1e-6);
            }
        }
        let total: f64 = regions.iter().map(|r| normal_mass_with_tol(r, nominal, sigma, BS, 1e-4)).sum();
        prop_assert!(total <= 1.0 + 1e-6);
    }

    #[test]
    fn pmf_is_rotation_invariant(nominal in point(), turns in 1u32..8, sigma in 2.0..50.0f64) {
        let cb = Codebook::default();
        let approx = SectorApprox::new(&cb, &LinkBudget::default(), TAU / 12.0, BS);
        let seq = seq_dsls(&cb, approx.ranges(), nominal, BS);
        let fps = approx.footprints(&seq);
        // rotate by whole 45 degree steps so every footprint stays on the grid
        let angle = turns as f64 * PI / 4.0;
        let rotated: Vec<_> = fps.iter().map(|f| f.rotated(angle)).collect();
        let rel = nominal - BS;
        let turned = BS + Point2D::new(
            rel.x * angle.cos() - rel.y * angle.sin(),
            rel.x * angle.sin() + rel.y * angle.cos(),
        );
        let a = pmf_for_footprints(&fps, nominal, sigma, BS, 1e-6);
        let b = pmf_for_footprints(&rotated, turned, sigma, BS, 1e-6);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-5, "{x} vs {y}");
        }
    }

    #[test]
    fn quadrature_refinement_converges(nominal in point(), sigma in 1.0..60.0f64) {
        let cb = Codebook::default();
        let approx = SectorApprox::new(&cb, &LinkBudget::default(), TAU / 12.0, BS);
        let seq = seq_edp(&cb, approx.ranges(), nominal, BS, 4).unwrap();
        let fps = approx.footprints(&seq);
        let coarse = pmf_for_footprints(&fps, nominal, sigma, BS, 1e-4);
        let fine = pmf_for_footprints(&fps, nominal, sigma, BS, 1e-7);
        for (x, y) in coarse.iter().zip(&fine) {
            prop_assert!((x - y).abs() < 1e-3);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn campaigns_are_seed_deterministic(seed in 0u64..1000, obstacles in 0usize..12, sectors in 1usize..6) {
        let cfg = ScenarioConfig {
            users: 120,
            obstacles,
            location_error_m: 40.0,
            algorithm: Algorithm::Edp { sectors },
            ..ScenarioConfig::default()
        };
        let cb = Codebook::default();
        let (e1, u1) = prepare(&cfg, seed).unwrap();
        let (e2, u2) = prepare(&cfg, seed).unwrap();
        prop_assert_eq!(&e1, &e2);
        let a = simulate_users(&cfg, &e1, &u1, seed, None).unwrap();
        let b = simulate_users(&cfg, &e2, &u2, seed, None).unwrap();
        prop_assert_eq!(users_csv(&a, &cb), users_csv(&b, &cb));
    }
}
