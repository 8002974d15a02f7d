use proptest::prelude::*;
use proptest::strategy::ValueTree;

use super::*;
use crate::formula::{Formula, enumerate_sentences, evaluate_sentence, Fragment, FragmentTag};
use crate::structure::{OrderedStructure, Signature, Structure};

fn ordered_set(n: usize) -> OrderedStructure {
    OrderedStructure::identity(Structure::pure_set(n))
}

const COUNT: fn(usize) -> Mode = |threshold| Mode::Counting { threshold };

#[test]
fn pure_sets_three_and_four() {
    let (a, b) = (Structure::pure_set(3), Structure::pure_set(4));
    for k in 0..=10 {
        let t = solve(&a, &b, k, Mode::Plain).unwrap();
        assert!(t.duplicator_wins() && t.sentence_equivalent(k), "k = {k}");
    }
}

#[test]
fn ordered_sets_two_and_three() {
    let t = solve(&ordered_set(2), &ordered_set(3), 3, Mode::Plain).unwrap();
    assert!(!t.duplicator_wins());
    assert!(!t.sentence_equivalent(3));
    // ∃x (∃y y<x ∧ ∃y x<y) already separates them at rank 2.
    assert!(!t.sentence_equivalent(2) && t.sentence_equivalent(1));
    let phi = distinguishing_formula(&ordered_set(2), &ordered_set(3), 3, Mode::Plain).unwrap().unwrap();
    assert!(phi.quantifier_rank() <= 3);
    assert_ne!(evaluate_sentence(&phi, &ordered_set(2)).unwrap(), evaluate_sentence(&phi, &ordered_set(3)).unwrap());
}

#[test]
fn ordered_sets_three_and_four() {
    let t = solve(&ordered_set(3), &ordered_set(4), 2, Mode::Plain).unwrap();
    assert!(t.duplicator_wins() && t.sentence_equivalent(2));
}

#[test]
fn counting_three_against_four() {
    let (a, b) = (Structure::pure_set(3), Structure::pure_set(4));
    let t = solve(&a, &b, 1, COUNT(4)).unwrap();
    assert!(!t.duplicator_wins() && !t.sentence_equivalent(1));
    let phi = distinguishing_formula(&a, &b, 1, COUNT(4)).unwrap().unwrap();
    assert_eq!(phi.to_string(), Formula::not(Formula::count_exists(4, "x", Formula::True)).to_string());
    // Threshold 3 hides the difference for one round only: a second round
    // expresses ∃x ∃^{≥3}y ¬x=y.
    assert!(solve(&a, &b, 1, COUNT(3)).unwrap().sentence_equivalent(1));
    assert!(!solve(&a, &b, 2, COUNT(3)).unwrap().sentence_equivalent(2));
    for k in 0..=6 {
        assert!(solve(&a, &b, k, COUNT(2)).unwrap().sentence_equivalent(k));
    }
}

#[test]
fn duplicator_wins_yields_no_formula() {
    let (a, b) = (Structure::pure_set(3), Structure::pure_set(4));
    assert_eq!(distinguishing_formula(&a, &b, 5, Mode::Plain).unwrap(), None);
}

#[test]
fn rejects_mismatched_inputs() {
    let g = Structure::graph(2, &[(0, 1)], true).unwrap();
    assert_eq!(solve(&g, &Structure::pure_set(2), 1, Mode::Plain).unwrap_err(), GameError::SignatureMismatch);
    assert_eq!(solve(&g, &g, 1, COUNT(0)).unwrap_err(), GameError::ZeroThreshold);
    assert_eq!(
        solve(&Structure::pure_set(0), &Structure::pure_set(1), 1, Mode::Plain).unwrap_err(),
        GameError::EmptyDomain(0)
    );
}

fn random_structure(n: usize, edges: &[(usize, usize)], unary: &[usize]) -> Structure {
    let sig = Signature::new([("E", 2), ("P", 1)], vec![]).unwrap();
    let e: Vec<Vec<usize>> = edges.iter().filter(|(a, b)| *a < n && *b < n).map(|&(a, b)| vec![a, b]).collect();
    let p: Vec<Vec<usize>> = unary.iter().filter(|&&a| a < n).map(|&a| vec![a]).collect();
    Structure::new(sig, n, vec![e, p], vec![]).unwrap()
}

fn arb_structure(max: usize) -> impl Strategy<Value = Structure> {
    (1..=max).prop_flat_map(|n| {
        (prop::collection::vec((0..n, 0..n), 0..2 * n), prop::collection::vec(0..n, 0..n))
            .prop_map(move |(e, u)| random_structure(n, &e, &u))
    })
}

fn configs(n0: usize, n1: usize) -> impl Iterator<Item = Pebbles> {
    (0..n0 * n0 * n1 * n1).map(move |i| Pebbles {
        p0x: i / (n0 * n1 * n1),
        p0y: i / (n1 * n1) % n0,
        p1x: i / n1 % n1,
        p1y: i % n1,
    })
}

fn agree<M: Model>(a: &M, b: &M, k: usize, mode: Mode) {
    let t = solve(a, b, k, mode).unwrap();
    let e = solve_explicit(a, b, k, mode).unwrap();
    for r in 0..=k {
        for p in configs(a.structure().size(), b.structure().size()) {
            let cfg = GameConfiguration { pebbles: p, rounds_left: r, mode };
            assert_eq!(t.contains(r, &cfg).unwrap(), e.contains(r, [p.pair(0), p.pair(1)]), "r = {r}, {p:?}");
        }
        assert_eq!(t.sentence_equivalent(r), e.sentence_equivalent(r), "sentence level, r = {r}");
    }
    assert_eq!(t.duplicator_wins(), e.duplicator_wins());
}

fn check_extraction<M: Model>(a: &M, b: &M, k: usize, mode: Mode) {
    let t = solve(a, b, k, mode).unwrap();
    match extract::from_table(&t) {
        None => assert!(t.sentence_equivalent(k)),
        Some(phi) => {
            assert!(!t.sentence_equivalent(k));
            assert!(phi.is_sentence());
            assert!(phi.quantifier_rank() <= k, "{phi}");
            assert!(phi.counting_index() <= mode.threshold().max(1), "{phi}");
            assert!(phi.variables().iter().all(|v| v == "x" || v == "y"));
            assert!(evaluate_sentence(&phi, a).unwrap(), "{phi}");
            assert!(!evaluate_sentence(&phi, b).unwrap(), "{phi}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refinement_matches_enumeration(a in arb_structure(4), b in arb_structure(4), k in 0usize..3, c in 1usize..4) {
        let mode = if c == 1 { Mode::Plain } else { COUNT(c) };
        agree(&a, &b, k, mode);
        let (oa, ob) = (OrderedStructure::identity(a.clone()), OrderedStructure::identity(b.clone()));
        agree(&oa, &ob, k, mode);
    }

    #[test]
    fn extraction_is_sound(a in arb_structure(5), b in arb_structure(5), k in 0usize..4, c in 1usize..4) {
        let mode = if c == 1 { Mode::Plain } else { COUNT(c) };
        check_extraction(&a, &b, k, mode);
        check_extraction(&OrderedStructure::identity(a), &OrderedStructure::identity(b), k, mode);
    }

    #[test]
    fn solve_is_symmetric(a in arb_structure(5), b in arb_structure(5), k in 0usize..3) {
        let (t, u) = (solve(&a, &b, k, Mode::Plain).unwrap(), solve(&b, &a, k, Mode::Plain).unwrap());
        prop_assert_eq!(t.duplicator_wins(), u.duplicator_wins());
        for r in 0..=k {
            prop_assert_eq!(t.sentence_equivalent(r), u.sentence_equivalent(r));
        }
    }
}

#[test]
fn sentence_level_matches_enumerated_sentences() {
    let sig = Signature::graph("E");
    let rank2 = enumerate_sentences(&sig, FragmentTag::new(Fragment::Fo2, false), 2, 1, DEFAULT_CAP).unwrap();
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let graph = (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..=n * n)
            .prop_map(move |e| Structure::graph(n, &e, false).unwrap())
    });
    for _ in 0..60 {
        let a = graph.new_tree(&mut runner).unwrap().current();
        let b = graph.new_tree(&mut runner).unwrap().current();
        let agree_all = rank2.iter().all(|f| evaluate_sentence(f, &a).unwrap() == evaluate_sentence(f, &b).unwrap());
        assert_eq!(fo2_equivalent(&a, &b, 2, Mode::Plain).unwrap(), agree_all, "{a:?} vs {b:?}");
    }
}

const DEFAULT_CAP: usize = crate::formula::DEFAULT_ENUMERATION_CAP;
