use std::collections::BTreeSet;

use super::*;
use crate::frequency::{classify, default_parameters};
use crate::neighborhood::census;
use crate::order::{build_order_pair, DEFAULT_TRANSFER_BUDGET};
use crate::structure::Structure;

fn cycle(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Structure::graph(n, &edges, true).unwrap()
}

fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Structure::graph(n, &edges, true).unwrap()
}

fn context(s0: &Structure, s1: &Structure, k: usize, counting: bool) -> StrategyContext {
    let params = default_parameters(k, s0.degree(), &census(s0, k).unwrap(), counting).unwrap();
    let cls = classify(s0, k, &params).unwrap();
    StrategyContext::new(build_order_pair(s0, s1, &cls, DEFAULT_TRANSFER_BUDGET).unwrap())
}

#[test]
fn zero_rounds_only_checks_the_start() {
    let ctx = context(&cycle(5000), &cycle(5001), 0, false);
    let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(1), Mode::Plain).unwrap();
    assert!(t.rounds.is_empty());
    assert!(t.invariants_held() && t.duplicator_won);
    assert_eq!(t.initial.p0x, ctx.ordered(0).minimum().unwrap());
}

#[test]
fn adjacent_attack_uses_the_environment_isomorphism() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    let cfg = ctx.initial(Mode::Plain);
    let w = cfg.pebbles.p0x;
    let e = ctx.ordered(0).base().neighbors(w)[0];
    let mv = SpoilerMove { structure: 0, pebble: Pebble::Y, elements: vec![e] };
    let replies = duplicator_reply(&ctx, &cfg, &mv).unwrap();
    // The minimum sits in the rare-free start of the order, so a neighbor
    // of it lies in Segment^0 only if it was placed there.
    let expected = if ctx.pair.decompositions[0].in_segment(e, 0) { StrategyCase::I } else { StrategyCase::II };
    assert_eq!(replies[0].case, Some(expected));
    assert!(ctx.ordered(1).base().gaifman().has_edge(replies[0].reply, cfg.pebbles.p1x));
}

#[test]
fn far_attack_is_answered_by_a_pin() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    let cfg = ctx.initial(Mode::Plain);
    let o = ctx.ordered(0);
    // Something late in the Middle segment, well away from the start.
    let e = *ctx.pair.decompositions[0].middle.last().unwrap();
    assert!(o.less(cfg.pebbles.p0x, e));
    let mv = SpoilerMove { structure: 0, pebble: Pebble::Y, elements: vec![e] };
    let item = &duplicator_reply(&ctx, &cfg, &mv).unwrap()[0];
    assert!(matches!(item.case, Some(StrategyCase::V | StrategyCase::VI)));
    let mut next = cfg;
    next.pebbles.p0y = e;
    next.pebbles.p1y = item.reply;
    next.rounds_left = 0;
    assert!(ctx.invariants(&next).holds());
}

#[test]
fn illegal_moves_are_rejected() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    let cfg = ctx.initial(Mode::Plain);
    let bad = |structure, elements: Vec<usize>| SpoilerMove { structure, pebble: Pebble::X, elements };
    for mv in [bad(0, vec![]), bad(0, vec![1, 2]), bad(2, vec![1]), bad(0, vec![5000])] {
        assert!(matches!(duplicator_reply(&ctx, &cfg, &mv), Err(StrategyError::IllegalMove(_))), "{mv:?}");
    }
    let done = GameConfiguration { rounds_left: 0, ..cfg };
    assert_eq!(duplicator_reply(&ctx, &done, &bad(0, vec![1])), Err(StrategyError::GameOver));
}

#[test]
fn broken_precondition_is_reported() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    let mut cfg = ctx.initial(Mode::Plain);
    cfg.pebbles.p0y = ctx.ordered(0).base().neighbors(cfg.pebbles.p0x)[0];
    let mv = SpoilerMove { structure: 0, pebble: Pebble::X, elements: vec![7] };
    match duplicator_reply(&ctx, &cfg, &mv) {
        Err(StrategyError::Precondition { report, .. }) => assert!(!report.r),
        other => panic!("{other:?}"),
    }
}

#[test]
fn random_spoilers_never_break_the_invariants_on_cycles() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    for seed in 0..1000 {
        let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(seed), Mode::Plain).unwrap();
        assert!(t.invariants_held() && t.duplicator_won, "seed {seed}: {t:?}");
    }
}

#[test]
fn random_spoilers_never_break_the_invariants_on_paths() {
    let ctx = context(&path(2000), &path(2001), 1, false);
    for seed in 0..300 {
        let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(seed), Mode::Plain).unwrap();
        assert!(t.invariants_held() && t.duplicator_won, "seed {seed}: {t:?}");
    }
}

#[test]
fn transcript_round_trips_through_json() {
    let ctx = context(&cycle(5000), &cycle(5001), 1, false);
    let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(7), Mode::Plain).unwrap();
    let json = serde_json::to_string(&t).unwrap();
    assert!(json.contains("\"S\":true"));
    assert_eq!(serde_json::from_str::<Transcript>(&json).unwrap(), t);
}

#[test]
fn counting_sets_get_distinct_replies() {
    let s0 = cycle(5000);
    let mut params = default_parameters(1, 2, &census(&s0, 1).unwrap(), false).unwrap();
    params.c2_multiplier = 2;
    params.m *= 2;
    let cls = classify(&s0, 1, &params).unwrap();
    let ctx = StrategyContext::new(build_order_pair(&s0, &cycle(5001), &cls, DEFAULT_TRANSFER_BUDGET).unwrap());
    let mode = Mode::Counting { threshold: 2 };
    for seed in 0..500 {
        let t = play_match(Engine::Strategy(&ctx), &mut RandomSpoiler::new(seed), mode).unwrap();
        assert!(t.invariants_held(), "seed {seed}: {t:?}");
        for round in &t.rounds {
            let replies: BTreeSet<_> = round.replies.iter().map(|r| r.reply).collect();
            assert_eq!(replies.len(), round.replies.len());
        }
    }
}
