use monoeq::classw::{classify, ROOT};
use monoeq::corpus::{classes_by_root, Corpus};
use monoeq::measures::{df_leq, dist_fn, mu_ab, stoch_leq_by_up_sets};
use monoeq::poset::Poset;
use monoeq::oracle::{
    count_monotone_maps, enumerate_monotone_maps, is_monotone_map, strassen_pair, DEFAULT_MAP_CAP,
};
use monoeq::rational::{self, ratio};
use monoeq::realize::{realize, verify_realization};
use monoeq::rsb::{build_rsb, compose, compose_step, invert, PiecewiseTranslation};
use monoeq::sync::{
    interlaced_graph, is_synchronizable, product_graph, theta_cap, theta_set, Direction,
};
use monoeq::system::MonotoneSystem;
use monoeq::transforms::{pushforward, Interval};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn rational_text_roundtrip(n in -1000i64..1000, d in 1i64..1000) {
        let r = ratio(n, d);
        prop_assert_eq!(rational::parse(&rational::format(&r)).unwrap(), r);
    }

    #[test]
    fn order_tests_agree(seed in any::<u64>()) {
        let mut c = Corpus::new(seed);
        let s = c.class_w_poset(7);
        let rpt = classify(&s).rpt.unwrap();
        let (p, q) = c.measure_pair(&s, 10);
        let by_sets = stoch_leq_by_up_sets(&p, &q, &s, 20).unwrap();
        let by_df = df_leq(&dist_fn(&p, &rpt).unwrap(), &dist_fn(&q, &rpt).unwrap(), &rpt).unwrap();
        let by_flow = strassen_pair(&p, &q, &s).unwrap().is_some();
        prop_assert_eq!(by_sets, by_df);
        prop_assert_eq!(by_sets, by_flow);
        prop_assert!(stoch_leq_by_up_sets(&p, &p, &s, 20).unwrap());
    }

    #[test]
    fn monotone_maps_match_brute_force(seed in any::<u64>()) {
        let mut c = Corpus::new(seed);
        let a = c.connected_poset(4);
        let s = c.class_w_poset(4);
        let listed = enumerate_monotone_maps(&a, &s, DEFAULT_MAP_CAP).unwrap();
        let total = (0..a.len()).fold(1usize, |acc, _| acc * s.len());
        let brute = (0..total)
            .filter(|&code| {
                let m: Vec<usize> = (0..a.len())
                    .map(|i| code / s.len().pow(i as u32) % s.len())
                    .collect();
                is_monotone_map(&a, &s, &m)
            })
            .count();
        prop_assert_eq!(listed.len(), brute);
        prop_assert_eq!(count_monotone_maps(&a, &s), brute as u64);
        prop_assert!(listed.iter().all(|m| is_monotone_map(&a, &s, m)));
    }

    #[test]
    fn realizations_verify(seed in any::<u64>()) {
        let mut c = Corpus::new(seed);
        let (sys, case) = c.realizable_instance(6, 6, 10, DEFAULT_MAP_CAP).unwrap();
        let r = realize(&sys).unwrap();
        prop_assert_eq!(r.case, case);
        prop_assert!(verify_realization(&sys, &r.maps).pass);
        for (m, x) in sys.measures.iter().zip(&r.maps) {
            prop_assert_eq!(&pushforward(x, sys.s.len()), m);
        }
    }

    #[test]
    fn bijections_invert_and_compose(seed in any::<u64>()) {
        let a = Poset::from_labels(
            &["a", "b", "g", "c", "d"],
            &[("a", "g"), ("b", "g"), ("g", "c"), ("g", "d")],
        )
        .unwrap();
        let mut c = Corpus::new(seed);
        let s = c.class_w_poset(6);
        let sys = c.monotone_system(&a, &s, 8, DEFAULT_MAP_CAP).unwrap();
        let rpt = classify(&s).rpt.unwrap();
        let f: Vec<_> = sys.measures.iter().map(|m| dist_fn(m, &rpt).unwrap()).collect();
        let mu = mu_ab(&f[0], &f[3], &rpt).unwrap();
        let nu = mu_ab(&f[1], &f[4], &rpt).unwrap();
        let phi = build_rsb(&mu, &nu, &rpt, ROOT).unwrap();
        prop_assert_eq!(invert(&invert(&phi)), phi.clone());
        prop_assert!(compose(&phi, &invert(&phi)).unwrap().is_identity());
        let id = PiecewiseTranslation::identity(Interval::new(rational::zero(), rational::one()));
        prop_assert_eq!(compose(&id, &phi).unwrap(), phi.clone());
        prop_assert_eq!(compose(&phi, &id).unwrap(), phi);
    }

    #[test]
    fn classification_ignores_root(seed in any::<u64>(), n in 1usize..=9) {
        let mut c = Corpus::new(seed);
        let s = c.tree_poset(n, "s");
        let classes = classes_by_root(&s).unwrap();
        prop_assert!(classes.windows(2).all(|w| w[0] == w[1]));
        prop_assert_eq!(classes[0], classify(&s).class);
    }

    #[test]
    fn theta_forms_agree(seed in any::<u64>(), dual in any::<bool>()) {
        let mut c = Corpus::new(seed);
        let a = c.connected_poset(8);
        let a = if dual { a.dual() } else { a };
        let g = interlaced_graph(&a);
        for &e in &g.edges {
            prop_assert_eq!(theta_set(&a, e), theta_cap(&a, e));
        }
    }

    #[test]
    fn synchronizable_posets_have_connected_product(seed in any::<u64>()) {
        let mut c = Corpus::new(seed);
        let a = c.connected_poset(8);
        let lo = is_synchronizable(&a, Direction::Minimal);
        let hi = is_synchronizable(&a, Direction::Maximal);
        if let (true, true, Some(t), Some(ts)) = (lo.synchronizable, hi.synchronizable, &lo.mst, &hi.mst) {
            prop_assert!(product_graph(t, ts, &a).is_ok());
        }
    }

    #[test]
    fn system_json_roundtrip(seed in any::<u64>()) {
        let mut c = Corpus::new(seed);
        let (sys, _) = c.realizable_instance(5, 5, 9, DEFAULT_MAP_CAP).unwrap();
        let back = MonotoneSystem::parse(&sys.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), sys.to_json());
    }
}

#[test]
fn composed_step_keeps_law() {
    let mut c = Corpus::new(7);
    for _ in 0..50 {
        let (sys, _) = c.realizable_instance(4, 5, 8, DEFAULT_MAP_CAP).unwrap();
        let r = realize(&sys).unwrap();
        let rpt = classify(&sys.s).rpt.unwrap();
        let f: Vec<_> = sys.measures.iter().map(|m| dist_fn(m, &rpt).unwrap()).collect();
        let mu = mu_ab(&f[0], &f[0], &rpt).unwrap();
        let phi = build_rsb(&mu, &mu, &rpt, ROOT).unwrap();
        let moved = compose_step(&r.maps[0], &phi).unwrap();
        assert_eq!(pushforward(&moved, sys.s.len()), sys.measures[0]);
    }
}
