use std::path::PathBuf;

use super::*;
use crate::dyadic::Dyadic;
use crate::ultrametric::{check_axioms, ContractionClass, ContractionWitness};

fn three() -> GroundProgram {
    GroundProgram::parse("q.\np :- not q.\nr :- p.\n").unwrap()
}

fn corpus_programs() -> Vec<(String, GroundProgram)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus/logic");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "pl"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                GroundProgram::load(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn parse_and_print() {
    let p = three();
    assert_eq!(p.atoms(), ["q", "p", "r"]);
    assert_eq!(p.clauses().len(), 3);
    assert_eq!(p.to_string(), "q.\np :- not q.\nr :- p.\n");
    assert_eq!(GroundProgram::parse(&p.to_string()).unwrap(), p);
    assert!(matches!(
        GroundProgram::parse("p :- q"),
        Err(LogicError::Syntax { line: 1, .. })
    ));
    assert!(matches!(
        GroundProgram::parse("a.\np(X) :- q."),
        Err(LogicError::Syntax { line: 2, .. })
    ));
    let wide: String = (0..65).map(|k| format!("a{k}.\n")).collect();
    assert!(matches!(
        GroundProgram::parse(&wide),
        Err(LogicError::TooManyAtoms(65))
    ));
}

#[test]
fn minimal_stratifications() {
    assert_eq!(find_stratification(&three()).unwrap().levels(), [0, 1, 1]);
    let facts = GroundProgram::parse("a.\nb.\n").unwrap();
    assert_eq!(find_stratification(&facts).unwrap().levels(), [0, 0]);
    let ladder = GroundProgram::parse("a.\nb :- not a.\nc :- b.\nd :- not c, a.\n").unwrap();
    assert_eq!(find_stratification(&ladder).unwrap().levels(), [0, 1, 1, 2]);
}

#[test]
fn negative_cycles_rejected() {
    let liar = GroundProgram::parse("p :- not p.").unwrap();
    assert_eq!(find_stratification(&liar).unwrap_err().atoms, vec![0, 0]);
    assert!(
        matches!(compute_perfect_model(&liar), Err(LogicError::NotStratified(c)) if c == "p -> p")
    );
    assert!(matches!(
        classify_tp_contraction(&liar),
        Err(LogicError::NotStratified(_))
    ));

    let odd = GroundProgram::parse("p :- not q.\nq :- not r.\nr :- p.\n").unwrap();
    let cycle = find_stratification(&odd).unwrap_err().atoms;
    assert_eq!(cycle.first(), cycle.last());
    assert_eq!(cycle.len(), 4);
}

#[test]
fn declared_strata() {
    let p = GroundProgram::parse("% strata: {a: 0, b: 2, c: 3}\na.\nb :- not a.\nc :- not b.\n")
        .unwrap();
    assert_eq!(stratification(&p).unwrap().levels(), [0, 2, 3]);
    let bad = GroundProgram::parse("% strata: {a: 1, b: 1}\na.\nb :- not a.\n").unwrap();
    assert!(matches!(
        stratification(&bad),
        Err(LogicError::BadStrata(_))
    ));
    assert!(GroundProgram::parse("% strata: {a: 0}\na.\nb.\n").is_err());
    assert!(GroundProgram::parse("% strata: {z: 0}\na.\n").is_err());
}

#[test]
fn immediate_consequence_examples() {
    let p = three();
    let i = |names: &[&str]| p.interpretation(names).unwrap();
    assert_eq!(immediate_consequence(&p, i(&[])), i(&["q", "p"]));
    assert_eq!(immediate_consequence(&p, i(&["q"])), i(&["q"]));
    let facts = GroundProgram::parse("a.\nb.\n").unwrap();
    for x in Interpretation::full(2).subsets() {
        assert_eq!(immediate_consequence(&facts, x), Interpretation::full(2));
    }
    assert!(matches!(
        p.interpretation(&["z"]),
        Err(LogicError::UnknownAtom(_))
    ));
}

#[test]
fn distance_examples() {
    let p = three();
    let s = find_stratification(&p).unwrap();
    let i = |names: &[&str]| p.interpretation(names).unwrap();
    assert_eq!(
        interpretation_distance(&s, i(&["q"]), i(&["q"])),
        Dyadic::Zero
    );
    assert_eq!(
        interpretation_distance(&s, i(&["q"]), i(&["q", "p"])),
        Dyadic::InvPow2(1)
    );
    assert_eq!(
        interpretation_distance(&s, i(&[]), i(&["q"])),
        Dyadic::InvPow2(0)
    );
    // The unrepaired reading cannot tell {} from {q}.
    assert_eq!(literal_interpretation_distance(&s, i(&[]), i(&["q"])), 0);
    assert_eq!(
        literal_interpretation_distance(&s, i(&["q"]), i(&["q", "p"])),
        1
    );
}

#[test]
fn perfect_model_examples() {
    let p = three();
    let pm = compute_perfect_model(&p).unwrap();
    let shown: Vec<String> = pm.trajectory.iter().map(|&x| p.format(x)).collect();
    assert_eq!(shown, ["{}", "{q, p}", "{q, r}", "{q}", "{q}"]);
    assert_eq!(pm.steps(), 3);

    let facts = GroundProgram::parse("a.\nb.\n").unwrap();
    let pm = compute_perfect_model(&facts).unwrap();
    assert_eq!(pm.model, Interpretation::full(2));
    assert_eq!(pm.steps(), 1);

    let negq = GroundProgram::parse("p :- not q.").unwrap();
    assert_eq!(
        negq.format(compute_perfect_model(&negq).unwrap().model),
        "{p}"
    );
}

#[test]
fn iteration_can_keep_an_unsupported_atom() {
    // p is true after one step because q is not yet known, then p :- p keeps it.
    let p = GroundProgram::parse("p :- p.\np :- not q.\nq.\n").unwrap();
    match compute_perfect_model(&p) {
        Err(LogicError::OracleMismatch {
            iterated,
            stratified,
        }) => {
            assert_eq!(iterated, "{p, q}");
            assert_eq!(stratified, "{q}");
        }
        other => panic!("{other:?}"),
    }
    let c = classify_tp_contraction(&p).unwrap();
    assert_eq!(c.fixed_points.len(), 2);
    assert_eq!(c.class, ContractionClass::StrictOnOrbits);
}

#[test]
fn corpus_models_match_oracle() {
    let progs = corpus_programs();
    assert!(progs.len() >= 10);
    for (name, p) in &progs {
        assert!(p.atom_count() <= MAX_EXHAUSTIVE_ATOMS, "{name}");
        let pm = compute_perfect_model(p).unwrap();
        assert_eq!(immediate_consequence(p, pm.model), pm.model, "{name}");
        assert_eq!(stratified_model(p, &pm.stratification), pm.model, "{name}");
        let bound = (pm.stratification.max_level() as usize + 2) * p.atom_count();
        assert!(pm.steps() <= bound, "{name}: {} > {bound}", pm.steps());
    }
}

#[test]
fn contraction_verdicts() {
    let facts = GroundProgram::parse("a.\nb.\n").unwrap();
    assert_eq!(
        classify_tp_contraction(&facts).unwrap().class,
        ContractionClass::StrictContraction
    );

    // r :- p shares p's stratum, so the orbit {q,p} -> {q,r} -> {q} stays at 2^-1.
    let c = classify_tp_contraction(&three()).unwrap();
    assert_eq!(c.class, ContractionClass::Contraction);
    assert!(matches!(
        c.witness,
        Some(ContractionWitness::OrbitNotStrict { .. })
    ));
    assert_eq!(c.fixed_points.len(), 1);

    let expected = [
        ("birds.pl", ContractionClass::Contraction),
        ("chain.pl", ContractionClass::Contraction),
        ("facts.pl", ContractionClass::StrictContraction),
        ("game.pl", ContractionClass::StrictContraction),
        ("ladder.pl", ContractionClass::StrictContraction),
        ("mutual.pl", ContractionClass::Contraction),
        ("negq.pl", ContractionClass::StrictContraction),
        ("pragma.pl", ContractionClass::StrictContraction),
        ("reach.pl", ContractionClass::Contraction),
        ("selfloop.pl", ContractionClass::StrictOnOrbits),
        ("three.pl", ContractionClass::Contraction),
        ("twelve.pl", ContractionClass::Contraction),
    ];
    let progs = corpus_programs();
    assert_eq!(progs.len(), expected.len());
    for ((name, p), (want_name, want)) in progs.iter().zip(expected) {
        assert_eq!(name, want_name);
        assert_eq!(classify_tp_contraction(p).unwrap().class, want, "{name}");
    }
}

#[test]
fn interpretation_metric_axioms() {
    for (name, p) in corpus_programs()
        .iter()
        .filter(|(_, p)| p.atom_count() <= 8)
    {
        let s = stratification(p).unwrap();
        let space = interpretation_space(p, &s).unwrap();
        assert!(check_axioms(&space).pass(), "{name}");
    }
    let wide: String = (0..13).map(|k| format!("a{k}.\n")).collect();
    let p = GroundProgram::parse(&wide).unwrap();
    assert!(matches!(
        classify_tp_contraction(&p),
        Err(LogicError::TooLarge {
            atoms: 13,
            limit: 12
        })
    ));
}

#[test]
fn per_atom_operator_matches() {
    for (name, p) in corpus_programs()
        .iter()
        .filter(|(_, p)| p.atom_count() <= 8)
    {
        let op = tp_operator(p);
        assert_eq!(op.processor_count(), p.atom_count());
        for x in Interpretation::full(p.atom_count()).subsets() {
            let bools = x.to_bools(p.atom_count());
            assert_eq!(
                Interpretation::from_bools(&op.apply(&bools)),
                immediate_consequence(p, x),
                "{name}"
            );
        }
    }
}
