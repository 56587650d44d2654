//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;
use std::time::Instant;

use monoeq::classw::{classify, WClass, ROOT};
use monoeq::corpus::{classes_by_root, figures, oriented_trees, Corpus};
use monoeq::counterexample::{self, Z_INDEX};
use monoeq::measures::{df_leq, dist_fn, mu_ab, stoch_leq_by_up_sets, Measure};
use monoeq::oracle::{self, strassen_pair, DEFAULT_MAP_CAP};
use monoeq::poset::Poset;
use monoeq::rational::ratio;
use monoeq::realize::{product_sync, realize, verify_realization, Case};
use monoeq::rsb::{build_rsb, build_rsb_for_f, compose, compose_step, invert};
use monoeq::sync::{
    all_spanning_trees, descend, interlaced_graph, is_locally_connected, is_synchronizable,
    kruskal, lengths, weight, Direction,
};
use monoeq::system::MonotoneSystem;
use monoeq::transforms::build_inverse_transform;

type Outcome = Result<String, String>;

const SEED: u64 = 20_240_601;
const FENCE_CAP: usize = 10_000;
const UPSET_CAP: usize = 20;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let cases = [
        ("Y", figures::y_poset(), WClass::NotClassW),
        ("upper legs", figures::w_upper(), WClass::WStarUpper),
        ("lower legs", figures::w_lower(), WClass::WStarLower),
    ];
    for (name, s, want) in cases {
        let got = classify(&s).class;
        ensure(got == want, || format!("{name}: got {got:?}, want {want:?}"))?;
    }
    Ok("Y -> NotClassW, upper -> WStarUpper, lower -> WStarLower".into())
}

fn criterion_2() -> Outcome {
    let a = figures::sync_example();
    let r = is_synchronizable(&a, Direction::Minimal);
    ensure(r.synchronizable, || "synchronizable example rejected".into())?;
    let t = r.mst.ok_or("no tree")?;
    let l = |x: &str| a.index_of(x).unwrap();
    let want = vec![(l("b0"), l("b1")), (l("b1"), l("b2"))];
    ensure(t.edges == want, || format!("witness tree {:?}", t.edges))?;
    ensure(is_locally_connected(&t, &a), || "witness not locally connected".into())?;
    let g = interlaced_graph(&a);
    let lc: Vec<_> = all_spanning_trees(&g, 1000)
        .map_err(err)?
        .into_iter()
        .filter(|x| is_locally_connected(x, &a))
        .collect();
    ensure(lc == vec![t.clone()], || format!("locally connected trees {lc:?}"))?;

    let b = figures::crown6();
    ensure(!is_synchronizable(&b, Direction::Minimal).synchronizable, || {
        "crown reported synchronizable".into()
    })?;
    let trees = all_spanning_trees(&interlaced_graph(&b), 1000).map_err(err)?;
    ensure(trees.iter().all(|x| !is_locally_connected(x, &b)), || {
        "crown has a locally connected tree".into()
    })?;
    Ok(format!(
        "witness {{(b0,b1),(b1,b2)}}; brute force: 1 locally connected tree vs 0 of {}",
        trees.len()
    ))
}

fn criterion_3() -> Outcome {
    let a = figures::standard_example();
    let (b, cert) = counterexample::counterexample(&a, FENCE_CAP, UPSET_CAP, DEFAULT_MAP_CAP)
        .map_err(err)?;
    ensure(b.weight == 6, || format!("MST weight {}", b.weight))?;
    let seqs: Vec<Vec<&str>> = b
        .gamma0
        .iter()
        .map(|f| f.sequence().into_iter().map(|x| a.label(x)).collect())
        .collect();
    let want = vec![
        vec!["b0", "a1(1)", "b1", "a2", "b*1"],
        vec!["b0", "a1(2)", "b1", "a2", "b*2"],
    ];
    ensure(seqs == want, || format!("fences {seqs:?}"))?;
    let s = &b.s;
    let third = |xs: &[(&str, i64)]| {
        Measure::from_labels(
            s,
            &xs.iter().map(|&(l, k)| (l, ratio(k, 3))).collect::<Vec<_>>(),
        )
        .unwrap()
    };
    let expected: BTreeMap<&str, Measure> = [
        ("a0", third(&[("y0", 1), ("z", 2)])),
        ("b0", third(&[("y0", 1), ("y1", 1), ("y2", 1)])),
        ("a1(1)", third(&[("y1", 1), ("z", 2)])),
        ("a1(2)", third(&[("y2", 1), ("z", 2)])),
        ("b1", third(&[("y*", 1), ("y1", 1), ("y2", 1)])),
        ("a2", third(&[("y*", 1), ("z", 2)])),
        ("b*1", third(&[("y*", 1), ("y0", 1), ("y2", 1)])),
        ("b*2", third(&[("y*", 1), ("y0", 1), ("y1", 1)])),
    ]
    .into();
    for (l, m) in &expected {
        let got = &b.system.measures[a.index_of(l).unwrap()];
        ensure(got == m, || format!("measure at {l}: {:?}", got.masses()))?;
    }
    ensure(s.label(Z_INDEX) == "z", || "target labelling".into())?;
    ensure(cert.monotone(), || "system not stochastically monotone".into())?;
    ensure(cert.lp_infeasible(), || "LP did not certify infeasibility".into())?;
    ensure(cert.events.pairwise_disjoint && cert.events.mass == ratio(4, 3), || {
        format!("event mass {}", cert.events.mass)
    })?;
    Ok(format!(
        "weight 6, 2 fences, 8 measures exact, LP infeasible over {} maps, event mass 4/3",
        cert.verdict.map_count
    ))
}

/// Realizable instances shared by criteria 4 and 5.
fn corpus_systems() -> Vec<(MonotoneSystem, Case)> {
    let mut c = Corpus::new(SEED);
    (0..200)
        .map(|_| c.realizable_instance(8, 7, 12, DEFAULT_MAP_CAP).unwrap())
        .collect()
}

fn criterion_4(corpus: &[(MonotoneSystem, Case)]) -> Outcome {
    let mut by_case: BTreeMap<String, usize> = BTreeMap::new();
    for (i, (sys, case)) in corpus.iter().enumerate() {
        ensure(sys.is_monotone(), || format!("instance {i} not monotone"))?;
        let r = realize(sys).map_err(|e| format!("instance {i}: {e}\n{}", sys.to_json()))?;
        ensure(r.case == *case, || format!("instance {i}: case {:?} vs {case:?}", r.case))?;
        let v = verify_realization(sys, &r.maps);
        ensure(v.pass, || {
            format!("instance {i}: {}\n{}", v.to_json(sys), sys.to_json())
        })?;
        *by_case.entry(format!("{case:?}")).or_default() += 1;
    }
    Ok(format!("{} systems, 100% verified; cases {by_case:?}", corpus.len()))
}

fn criterion_5(corpus: &[(MonotoneSystem, Case)]) -> Outcome {
    let mut pairs = 0;
    let mut ordered = 0;
    for (i, (sys, _)) in corpus.iter().enumerate() {
        let rpt = classify(&sys.s).rpt.ok_or("class W target without tree")?;
        let fs: Vec<_> = sys
            .measures
            .iter()
            .map(|m| dist_fn(m, &rpt))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        for x in sys.a.elements() {
            for y in sys.a.elements() {
                let (p, q) = (&sys.measures[x], &sys.measures[y]);
                let s1 = stoch_leq_by_up_sets(p, q, &sys.s, UPSET_CAP).map_err(err)?;
                let s2 = df_leq(&fs[x], &fs[y], &rpt).map_err(err)?;
                let s3 = strassen_pair(p, q, &sys.s).map_err(err)?;
                if let Some(c) = &s3 {
                    ensure(oracle::check_coupling(c, p, q, &sys.s), || {
                        format!("instance {i}: bad coupling")
                    })?;
                }
                ensure(s1 == s2 && s2 == s3.is_some(), || {
                    format!("instance {i}: ({x},{y}) up-sets {s1}, df {s2}, flow {}", s3.is_some())
                })?;
                pairs += 1;
                ordered += s1 as usize;
            }
        }
        let v = oracle::realizably_monotone(sys, DEFAULT_MAP_CAP).map_err(err)?;
        ensure(v.feasible, || format!("instance {i}: LP infeasible"))?;
        ensure(oracle::check_verdict(sys, &v, DEFAULT_MAP_CAP).map_err(err)?, || {
            format!("instance {i}: LP witness failed replay")
        })?;
        let r = realize(sys).map_err(err)?;
        let w = oracle::realization_to_witness(sys, &r.maps).map_err(err)?;
        let wv = oracle::FeasibilityVerdict {
            feasible: true,
            witness: w,
            certificate: None,
            map_count: 0,
        };
        ensure(oracle::check_verdict(sys, &wv, DEFAULT_MAP_CAP).map_err(err)?, || {
            format!("instance {i}: realization witness failed replay")
        })?;
    }
    let mut c = Corpus::new(SEED ^ 0x5eed);
    let mut bundles = 0;
    let mut ns = BTreeMap::new();
    while bundles < 20 {
        let a = c
            .non_synchronizable_poset(8, 100_000)
            .ok_or("no non-synchronizable poset generated")?;
        let (b, cert) = counterexample::counterexample(&a, FENCE_CAP, UPSET_CAP, DEFAULT_MAP_CAP)
            .map_err(|e| format!("{e}\n{}", monoeq::poset::poset_to_json(&a)))?;
        ensure(cert.monotone() && cert.lp_infeasible() && cert.events_ok(b.labels.n), || {
            format!("bundle failed: {}", cert.summary(&b))
        })?;
        *ns.entry(b.labels.n).or_insert(0) += 1;
        bundles += 1;
    }
    Ok(format!(
        "{pairs} measure pairs agree ({ordered} ordered); {} systems LP-feasible; 20 bundles certified, n counts {ns:?}",
        corpus.len()
    ))
}

/// `a, b < g < c, d` with a random Class W target.
fn rsb_instances(count: usize) -> Vec<MonotoneSystem> {
    let a = Poset::from_labels(
        &["a", "b", "g", "c", "d"],
        &[("a", "g"), ("b", "g"), ("g", "c"), ("g", "d")],
    )
    .unwrap();
    let mut c = Corpus::new(SEED + 6);
    (0..count)
        .map(|_| {
            let s = c.class_w_poset(7);
            c.monotone_system(&a, &s, 12, DEFAULT_MAP_CAP).unwrap()
        })
        .collect()
}

fn criterion_6(corpus: &[(MonotoneSystem, Case)]) -> Outcome {
    let instances = rsb_instances(100);
    for (i, sys) in instances.iter().enumerate() {
        let rpt = classify(&sys.s).rpt.ok_or("target without tree")?;
        let f: Vec<_> = sys.measures.iter().map(|m| dist_fn(m, &rpt).unwrap()).collect();
        let (a, b, g, c, d) = (0, 1, 2, 3, 4);
        let mu = |x: usize, y: usize| mu_ab(&f[x], &f[y], &rpt).map_err(err);
        let (ac, ad, bc, bd) = (mu(a, c)?, mu(a, d)?, mu(b, c)?, mu(b, d)?);
        let rsb = |x, y| build_rsb(x, y, &rpt, ROOT).map_err(err);
        let direct = rsb(&ac, &bd)?;
        ensure(invert(&direct) == rsb(&bd, &ac)?, || format!("instance {i}: inverse"))?;
        let via_c = compose(&rsb(&ac, &bc)?, &rsb(&bc, &bd)?).map_err(err)?;
        let via_d = compose(&rsb(&ac, &ad)?, &rsb(&ad, &bd)?).map_err(err)?;
        ensure(direct == via_c && direct == via_d, || {
            format!("instance {i}: four-corner identity\n{}", sys.to_json())
        })?;
        let x_mu = build_inverse_transform(&ac, &f[g], &rpt, ROOT).map_err(err)?;
        let x_nu = build_inverse_transform(&bd, &f[g], &rpt, ROOT).map_err(err)?;
        let phi = build_rsb_for_f(&ac, &bd, &f[g], &rpt, ROOT).map_err(err)?;
        ensure(compose_step(&x_nu, &phi).map_err(err)? == x_mu, || {
            format!("instance {i}: inverse transform factorization")
        })?;
    }
    let mut multi = 0;
    let both = corpus.iter().filter(|(_, c)| *c == Case::SyncBoth).map(|(s, _)| s);
    for sys in both.chain(instances.iter()) {
        let Ok(ps) = product_sync(sys, None) else {
            continue;
        };
        for &v in &ps.graph.vertices {
            let paths = ps.graph.all_min_paths(ps.base, v, 64);
            if paths.len() < 2 {
                continue;
            }
            multi += 1;
            let first = ps.phi_along(&paths[0]).map_err(err)?;
            for p in &paths[1..] {
                ensure(ps.phi_along(p).map_err(err)? == first, || {
                    format!("path dependence at {v:?}\n{}", sys.to_json())
                })?;
            }
        }
    }
    ensure(multi > 0, || "no instance with two minimum paths".into())?;
    Ok(format!(
        "{} instances: inverse, four-corner, factorization exact; {multi} multi-path targets path-independent",
        instances.len()
    ))
}

fn criterion_7() -> Outcome {
    let mut c = Corpus::new(SEED + 7);
    let mut posets: Vec<Poset> = (0..150).map(|_| c.connected_poset(8)).collect();
    posets.extend((0..30).filter_map(|_| c.non_synchronizable_poset(8, 10_000)));
    posets.extend([figures::sync_example(), figures::crown6(), figures::standard_example()]);
    let (mut graphs, mut trees, mut sync, mut descents) = (0, 0usize, 0, 0usize);
    for a in &posets {
        for dir in [Direction::Minimal, Direction::Maximal] {
            let p = dir.orient(a);
            let g = interlaced_graph(&p);
            if g.vertices.len() > 7 || !g.is_connected() {
                continue;
            }
            graphs += 1;
            let len = lengths(&p, &g);
            let all = all_spanning_trees(&g, 100_000).map_err(err)?;
            trees += all.len();
            let ws: Vec<usize> = all.iter().map(|t| weight(t, &len)).collect();
            let lc: Vec<bool> = all.iter().map(|t| is_locally_connected(t, &p)).collect();
            let min = *ws.iter().min().unwrap();
            let synchronizable = lc.iter().any(|&x| x);
            ensure(synchronizable == is_synchronizable(a, dir).synchronizable, || {
                "synchronizability disagrees with enumeration".into()
            })?;
            if synchronizable {
                sync += 1;
                for i in 0..all.len() {
                    ensure(lc[i] == (ws[i] == min), || {
                        format!("tree {:?}: locally connected {} weight {} min {min}", all[i].edges, lc[i], ws[i])
                    })?;
                }
                // θ(T') <= θ(T) with T locally connected forces equality and local connectivity.
                let lc_max = (0..all.len()).filter(|&i| lc[i]).map(|i| ws[i]).max().unwrap();
                for i in 0..all.len() {
                    if ws[i] <= lc_max {
                        ensure(ws[i] == lc_max && lc[i], || "weight comparison lemma".into())?;
                    }
                }
            }
            let targets: Vec<_> = (0..all.len()).filter(|&i| ws[i] == min).collect();
            let mst = kruskal(&g, &len).map_err(err)?;
            ensure(weight(&mst, &len) == min, || "Kruskal not minimal".into())?;
            for (i, t0) in all.iter().enumerate().step_by((all.len() / 200).max(1)) {
                for &k in targets.iter().take(3) {
                    let swaps = descend(&g, &len, t0, &all[k]).map_err(err)?;
                    let mut w = ws[i];
                    for s in &swaps {
                        ensure(s.weight <= w, || "descent increased weight".into())?;
                        w = s.weight;
                    }
                    ensure(w == min, || "descent ended above minimum".into())?;
                    descents += 1;
                }
            }
        }
    }
    Ok(format!(
        "{graphs} graphs, {trees} spanning trees enumerated, {sync} synchronizable; {descents} descents monotone to target"
    ))
}

fn criterion_8() -> Outcome {
    let mut total = 0;
    let mut tally: HashMap<WClass, usize> = HashMap::new();
    for n in 1..=8 {
        for s in oriented_trees(n) {
            let classes = classes_by_root(&s).map_err(err)?;
            let want = classify(&s).class;
            ensure(classes.iter().all(|&c| c == want), || {
                format!("root dependence on {}: {classes:?}", monoeq::poset::poset_to_json(&s))
            })?;
            *tally.entry(want).or_default() += 1;
            total += 1;
        }
    }
    let mut t: Vec<_> = tally.into_iter().map(|(k, v)| format!("{k:?}={v}")).collect();
    t.sort();
    Ok(format!("{total} oriented trees, every root leaf agrees ({})", t.join(", ")))
}

fn main() -> ExitCode {
    let names = [
        "classification of the three named trees",
        "synchronizability of the six-element examples",
        "standard-example counterexample pipeline",
        "realization soundness on random systems",
        "oracle cross-validation",
        "synchronizing bijection algebra",
        "spanning-tree theory",
        "root independence of classification",
    ];
    let corpus = corpus_systems();
    let runs: [Box<dyn Fn() -> Outcome>; 8] = [
        Box::new(criterion_1),
        Box::new(criterion_2),
        Box::new(criterion_3),
        Box::new(|| criterion_4(&corpus)),
        Box::new(|| criterion_5(&corpus)),
        Box::new(|| criterion_6(&corpus)),
        Box::new(criterion_7),
        Box::new(criterion_8),
    ];
    let mut failed = 0;
    for (i, run) in runs.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS criterion {}: {} [{detail}] ({secs:.1}s)", i + 1, names[i]),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {} [{why}] ({secs:.1}s)", i + 1, names[i]);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
