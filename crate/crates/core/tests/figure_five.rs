use fomet::corpus::figure_five_pair;
use fomet::formula::{evaluate_sentence, parse_formula_in};
use fomet::game::{distinguishing_formula, play_match, solve, Engine, Mode, RandomSpoiler};
use fomet::Fragment;

#[test]
fn counting_two_rounds_cannot_see_the_triangle() {
    let (a, b) = figure_five_pair(5002).unwrap();
    let mode = Mode::Counting { threshold: 2 };
    let table = solve(&a, &b, 2, mode).unwrap();
    assert!(table.duplicator_wins());
    assert!(table.sentence_equivalent(2));
    assert_eq!(distinguishing_formula(&a, &b, 2, mode).unwrap(), None);
}

#[test]
fn three_variables_do_see_the_triangle() {
    let (a, b) = figure_five_pair(5002).unwrap();
    let phi = parse_formula_in("Ex. Ey. Ez. (E(x,y) & E(y,z) & E(x,z))", a.base().signature(), Fragment::Fo).unwrap();
    assert!(!evaluate_sentence(&phi, a.base()).unwrap());
    assert!(evaluate_sentence(&phi, b.base()).unwrap());
}

#[test]
fn more_rounds_eventually_separate_the_small_drawing() {
    let (a, b) = figure_five_pair(16).unwrap();
    let mode = Mode::Counting { threshold: 2 };
    let k = (1..=8).find(|&k| !solve(&a, &b, k, mode).unwrap().sentence_equivalent(k));
    let k = k.expect("16 elements are too few to hide the triangle");
    let phi = distinguishing_formula(&a, &b, k, mode).unwrap().unwrap();
    assert!(phi.quantifier_rank() <= k && phi.counting_index() <= 2);
    assert_ne!(evaluate_sentence(&phi, &a).unwrap(), evaluate_sentence(&phi, &b).unwrap());
}

#[test]
fn optimal_duplicator_survives_random_spoilers() {
    let (a, b) = figure_five_pair(5002).unwrap();
    let mode = Mode::Counting { threshold: 2 };
    let table = solve(&a, &b, 2, mode).unwrap();
    for seed in 0..1000 {
        let t = play_match(Engine::Optimal(&table), &mut RandomSpoiler::new(seed), mode).unwrap();
        assert!(t.duplicator_won, "seed {seed}: {t:?}");
    }
}
