use super::*;
use crate::iteration::RunStatus;
use crate::ultrametric::{check_axioms, FiniteUltrametricSpace};

fn corpus(name: &str) -> SppInstance {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus/routing")
        .join(name);
    SppInstance::load(&path).unwrap()
}

fn set(inst: &SppInstance, paths: &[&[&str]]) -> PathSet {
    let mut x = PathSet::EMPTY;
    for p in paths {
        x.insert(inst.path_id(p).unwrap_or_else(|| panic!("no path {p:?}")));
    }
    x
}

#[test]
fn path_universes() {
    let only_dest = SppInstance::from_json_str(
        r#"{"nodes":["d"],"dest":"d","arcs":[],"preference":{"kind":"hop-count"}}"#,
    )
    .unwrap();
    assert_eq!(enumerate_paths(&only_dest), vec!["ε"]);
    assert_eq!(
        enumerate_paths(&corpus("ring3.json")),
        vec!["ε", "(1 d)", "(2 d)", "(1 2 d)", "(2 1 d)"]
    );
    assert_eq!(
        enumerate_paths(&corpus("multi2.json")),
        vec!["ε", "(1 d)", "(2 d)", "(3 1 d)", "(3 2 d)"]
    );
}

#[test]
fn heights() {
    assert_eq!(corpus("ring3.json").path_height(), vec![5, 4, 4, 2, 2]);
    assert_eq!(corpus("single-arc.json").path_height(), vec![2, 1]);
    assert_eq!(corpus("disagree.json").path_height(), vec![1, 1, 1, 2, 2]);
    // Strictly preferred paths are strictly higher.
    for name in [
        "ring3.json",
        "multi2.json",
        "disagree.json",
        "single-arc-inverted.json",
    ] {
        let inst = corpus(name);
        let h = inst.path_height();
        for p in 0..inst.path_count() {
            for q in 0..inst.path_count() {
                if inst.strictly_preferred(p, q) {
                    assert!(h[p] > h[q], "{name}: {p} {q}");
                }
            }
        }
    }
}

#[test]
fn inflation_checks() {
    assert!(corpus("ring3.json").check_strictly_inflationary().is_ok());
    assert!(corpus("multi2.json").check_strictly_inflationary().is_ok());
    assert!(corpus("single-arc.json")
        .check_strictly_inflationary()
        .is_ok());

    let dis = corpus("disagree.json");
    let failure = dis.check_strictly_inflationary().unwrap_err();
    let cycle: Vec<String> = failure
        .cycle
        .unwrap()
        .into_iter()
        .map(|p| dis.format_path(p))
        .collect();
    assert_eq!(cycle, vec!["(1 d)", "(2 1 d)", "(2 d)", "(1 2 d)", "(1 d)"]);

    let inv = corpus("single-arc-inverted.json");
    let failure = inv.check_strictly_inflationary().unwrap_err();
    assert_eq!(failure.path, inv.epsilon());
    assert_eq!(failure.cycle.map(|c| c.len()), Some(3));
}

#[test]
fn sigma_examples() {
    let ring = corpus("ring3.json");
    assert_eq!(sigma_step(&ring, PathSet::EMPTY), set(&ring, &[&["d"]]));
    let x = set(&ring, &[&["d"], &["2", "d"]]);
    let y = sigma_step(&ring, x);
    assert_eq!(
        y.intersection(ring.permitted_at(1)),
        set(&ring, &[&["1", "d"]])
    );

    let multi = corpus("multi2.json");
    let x = set(&multi, &[&["d"], &["1", "d"], &["2", "d"]]);
    let y = sigma_step(&multi, x);
    assert_eq!(
        y.intersection(multi.permitted_at(3)),
        set(&multi, &[&["3", "1", "d"], &["3", "2", "d"]])
    );
}

#[test]
fn distance_examples() {
    let ring = corpus("ring3.json");
    let h = ring.path_height();
    let fixed = set(&ring, &[&["d"], &["1", "d"], &["2", "d"]]);
    assert_eq!(state_distance(&h, fixed, fixed), 0);
    assert_eq!(state_distance(&h, PathSet::EMPTY, fixed), 5);
    let with = fixed.union(set(&ring, &[&["1", "2", "d"]]));
    assert_eq!(state_distance(&h, fixed, with), 2);
}

#[test]
fn state_metric_is_ultrametric() {
    for name in ["ring3.json", "multi2.json", "disagree.json"] {
        let inst = corpus(name);
        let h = inst.path_height();
        let space = FiniteUltrametricSpace::from_fn(state_space(&inst).unwrap(), 0u64, |a, b| {
            state_distance(&h, *a, *b)
        })
        .unwrap();
        assert!(check_axioms(&space).pass(), "{name}");
    }
}

#[test]
fn strict_contraction() {
    for name in ["ring3.json", "multi2.json", "single-arc.json"] {
        let r = verify_strict_contraction(&corpus(name)).unwrap();
        assert!(r.pass, "{name}: {:?}", r.counterexample);
    }
    let r = verify_strict_contraction(&corpus("single-arc.json")).unwrap();
    assert_eq!(r.pairs_checked, 6);

    let inv = corpus("single-arc-inverted.json");
    let r = verify_strict_contraction(&inv).unwrap();
    assert_eq!(
        r.counterexample,
        Some((PathSet::EMPTY, set(&inv, &[&["d"]])))
    );
    assert!(
        !verify_strict_contraction(&corpus("disagree.json"))
            .unwrap()
            .pass
    );
}

#[test]
fn decompositions_agree_with_sigma() {
    let ring = corpus("ring3.json");
    assert_eq!(decompose(&ring, Granularity::PerNode).groups.len(), 3);
    assert_eq!(decompose(&ring, Granularity::PerPath).groups.len(), 5);
    assert_eq!(decompose(&ring, Granularity::PerNextHop).groups.len(), 5);
    assert_eq!(
        decompose(&corpus("multi2.json"), Granularity::PerNextHop)
            .groups
            .len(),
        5
    );
    for name in ["ring3.json", "multi2.json", "disagree.json"] {
        let inst = corpus(name);
        for g in Granularity::ALL {
            let r = decompose(&inst, g);
            assert_eq!(
                RoutingOperator::join(&r.split(inst.permitted())),
                inst.permitted()
            );
            for x in state_space(&inst).unwrap() {
                let img = r.operator.apply(&r.split(x));
                assert_eq!(
                    RoutingOperator::join(&img),
                    sigma_step(&inst, x),
                    "{name} {g}"
                );
            }
        }
    }
    assert!(matches!(
        "per-router".parse::<Granularity>(),
        Err(RoutingError::UnknownGranularity(_))
    ));
    assert_eq!(
        "per-nexthop".parse::<Granularity>().unwrap(),
        Granularity::PerNextHop
    );
}

#[test]
fn solve_ring3_and_multi2() {
    let ring = corpus("ring3.json");
    let r = solve(&ring, &SolveOptions::default()).unwrap();
    assert_eq!(
        r.fixed_point,
        Some(set(&ring, &[&["d"], &["1", "d"], &["2", "d"]]))
    );
    assert!(r.stable);
    assert!(matches!(r.sync_status(), RunStatus::Converged { at } if at <= 3));

    let multi = corpus("multi2.json");
    let r = solve(&multi, &SolveOptions::default()).unwrap();
    let fp = r.fixed_point.unwrap();
    assert_eq!(
        fp.intersection(multi.permitted_at(3)),
        set(&multi, &[&["3", "1", "d"], &["3", "2", "d"]])
    );

    let opts = SolveOptions {
        mode: SolveMode::Async,
        seed: 7,
        runs: 5,
        ..SolveOptions::default()
    };
    let r = solve(&ring, &opts).unwrap();
    assert_eq!(r.async_agreements(), 5);
}

#[test]
fn disagree_oscillates_when_forced() {
    let dis = corpus("disagree.json");
    assert!(matches!(
        solve(&dis, &SolveOptions::default()),
        Err(RoutingError::NotInflationary(_))
    ));
    let a = set(&dis, &[&["d"], &["1", "d"], &["2", "d"]]);
    let b = set(&dis, &[&["d"], &["1", "2", "d"], &["2", "1", "d"]]);
    let opts = SolveOptions {
        force: true,
        start: Some(a),
        ..SolveOptions::default()
    };
    let r = solve(&dis, &opts).unwrap();
    assert_eq!(
        r.sync_status(),
        RunStatus::Cycle {
            start: 0,
            period: 2
        }
    );
    assert_eq!(RoutingOperator::join(r.sync.state(1)), b);
    assert_eq!(RoutingOperator::join(r.sync.state(2)), a);
    assert_eq!(r.fixed_point, None);
    assert!(!r.stable);
}

#[test]
fn destination_anchored_after_first_tick() {
    let ring = corpus("ring3.json");
    for x in state_space(&ring).unwrap() {
        assert!(
            sigma_step(&ring, x).intersection(ring.permitted_at(ring.dest()))
                == PathSet::singleton(ring.epsilon())
        );
    }
}

#[test]
fn malformed_instances() {
    let bad_node = r#"{"nodes":["d"],"dest":"x","arcs":[],"preference":{"kind":"hop-count"}}"#;
    assert!(matches!(
        SppInstance::from_json_str(bad_node),
        Err(RoutingError::UnknownNode(_))
    ));
    let bad_path = r#"{"nodes":["d","1"],"dest":"d","arcs":[["1","d"]],
        "preference":{"kind":"explicit","pairs":[[["d","1"],["d"]]]}}"#;
    assert!(matches!(
        SppInstance::from_json_str(bad_path),
        Err(RoutingError::UnknownPath(_))
    ));
    let no_eps = r#"{"nodes":["d","1"],"dest":"d","arcs":[["1","d"]],"permitted":{"d":[]},
        "preference":{"kind":"hop-count"}}"#;
    assert!(matches!(
        SppInstance::from_json_str(no_eps),
        Err(RoutingError::Invalid(_))
    ));
    assert!(SppInstance::from_json_str("{").is_err());
}

#[test]
fn permitted_restriction() {
    let text = r#"{"nodes":["d","1","2"],"dest":"d","arcs":[["1","d"],["2","d"],["1","2"],["2","1"]],
        "permitted":{"1":[["1","d"]]},"preference":{"kind":"hop-count"}}"#;
    let inst = SppInstance::from_json_str(text).unwrap();
    assert_eq!(inst.permitted().len(), 4);
    let one_two_d = inst.path_id(&["1", "2", "d"]).unwrap();
    assert!(!inst.permitted().contains(one_two_d));
    let x = inst.permitted();
    assert!(!sigma_step(&inst, x).contains(one_two_d));
}

#[test]
fn set_text_round_trip() {
    let ring = corpus("ring3.json");
    let x = set(&ring, &[&["d"], &["1", "2", "d"]]);
    assert_eq!(ring.format_set(x), "{ε, (1 2 d)}");
    assert_eq!(ring.parse_set("{ε, (1 2 d)}").unwrap(), x);
    assert_eq!(ring.parse_set("{}").unwrap(), PathSet::EMPTY);
}

#[test]
fn subsets_enumeration() {
    let s = PathSet::from_bits(0b1011);
    let subs: Vec<u64> = s.subsets().map(PathSet::bits).collect();
    assert_eq!(subs, vec![0, 1, 2, 3, 8, 9, 10, 11]);
}
