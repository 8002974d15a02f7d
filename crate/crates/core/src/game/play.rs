use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::strategy::{
    duplicator_reply, optimal_reply, InvariantReport, ReplyItem, SpoilerMove, StrategyContext, StrategyError,
};
use super::{GameConfiguration, Mode, Pebble, Pebbles, WinningTable};
use crate::structure::{Element, Structure};

/// What a spoiler sees: both structures and, per structure, a region it
/// likes to attack (the segments near the endpoints for the strategy).
pub struct Arena<'a> {
    pub structures: [&'a Structure; 2],
    pub hot: [Vec<Element>; 2],
}

/// A spoiler for [`play_match`]: names a move, then picks one of the
/// duplicator's answers (only relevant in counting mode).
pub trait Spoiler {
    fn choose(&mut self, arena: &Arena<'_>, cfg: &GameConfiguration) -> SpoilerMove;

    fn pick(&mut self, replies: &[ReplyItem]) -> usize {
        let _ = replies;
        0
    }
}

/// Seeded random spoiler. A third of its choices go next to the other
/// pebble, a third into the hot region and the rest anywhere.
#[derive(Debug, Clone)]
pub struct RandomSpoiler {
    rng: ChaCha8Rng,
}

impl RandomSpoiler {
    pub fn new(seed: u64) -> Self {
        RandomSpoiler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn element(&mut self, arena: &Arena<'_>, i: usize, w: Element) -> Element {
        let s = arena.structures[i];
        match self.rng.gen_range(0..3) {
            0 if !s.neighbors(w).is_empty() => *s.neighbors(w).choose(&mut self.rng).unwrap(),
            0 => w,
            1 if !arena.hot[i].is_empty() => *arena.hot[i].choose(&mut self.rng).unwrap(),
            _ => self.rng.gen_range(0..s.size()),
        }
    }
}

impl Spoiler for RandomSpoiler {
    fn choose(&mut self, arena: &Arena<'_>, cfg: &GameConfiguration) -> SpoilerMove {
        let structure = self.rng.gen_range(0..2);
        let pebble = if self.rng.gen_bool(0.5) { Pebble::X } else { Pebble::Y };
        let w = cfg.pebbles.get(structure, pebble.other());
        let n = arena.structures[structure].size();
        let want = self.rng.gen_range(1..=cfg.mode.threshold().min(n));
        let mut chosen = BTreeSet::new();
        // Biased draws may repeat; fall back to uniform ones to fill the set.
        for attempt in 0.. {
            if chosen.len() == want {
                break;
            }
            let e = if attempt < 4 * want { self.element(arena, structure, w) } else { self.rng.gen_range(0..n) };
            chosen.insert(e);
        }
        let mut elements: Vec<Element> = chosen.into_iter().collect();
        elements.shuffle(&mut self.rng);
        SpoilerMove { structure, pebble, elements }
    }

    fn pick(&mut self, replies: &[ReplyItem]) -> usize {
        self.rng.gen_range(0..replies.len())
    }
}

/// Plays the given moves in order, always picking the first answer.
#[derive(Debug, Clone)]
pub struct ScriptedSpoiler {
    moves: std::vec::IntoIter<SpoilerMove>,
}

impl ScriptedSpoiler {
    pub fn new(moves: Vec<SpoilerMove>) -> Self {
        ScriptedSpoiler { moves: moves.into_iter() }
    }
}

impl Spoiler for ScriptedSpoiler {
    fn choose(&mut self, _: &Arena<'_>, _: &GameConfiguration) -> SpoilerMove {
        self.moves.next().expect("script shorter than the game")
    }
}

/// The duplicator engine: the six-case strategy over a built order pair,
/// or replies read off the winning table.
#[derive(Debug, Clone, Copy)]
pub enum Engine<'a> {
    Strategy(&'a StrategyContext),
    Optimal(&'a WinningTable),
}

impl Engine<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Strategy(_) => "strategy",
            Engine::Optimal(_) => "optimal",
        }
    }

    pub fn rounds(&self) -> usize {
        match self {
            Engine::Strategy(ctx) => ctx.k,
            Engine::Optimal(t) => t.rounds(),
        }
    }

    pub fn arena(&self) -> Arena<'_> {
        match self {
            Engine::Strategy(ctx) => Arena {
                structures: [ctx.ordered(0).base(), ctx.ordered(1).base()],
                hot: [0, 1].map(|i| ctx.pair.decompositions[i].segment_up_to(2 * ctx.k)),
            },
            Engine::Optimal(t) => Arena { structures: [&t.boards[0].structure, &t.boards[1].structure], hot: [vec![], vec![]] },
        }
    }

    /// Both pebbles on the minimal elements. Unordered boards for the
    /// optimal engine start on the first pair of elements whose doubled
    /// configuration lies in `W_k`.
    pub fn initial(&self, mode: Mode) -> GameConfiguration {
        match self {
            Engine::Strategy(ctx) => ctx.initial(mode),
            Engine::Optimal(t) => {
                let k = t.rounds();
                let at = |a, c| GameConfiguration { pebbles: Pebbles { p0x: a, p0y: a, p1x: c, p1y: c }, rounds_left: k, mode };
                let first = at(t.boards[0].minimum(), t.boards[1].minimum());
                if t.contains(k, &first).unwrap_or(false) {
                    return first;
                }
                (0..t.boards[0].size())
                    .flat_map(|a| (0..t.boards[1].size()).map(move |c| (a, c)))
                    .map(|(a, c)| at(a, c))
                    .find(|cfg| t.contains(k, cfg).unwrap_or(false))
                    .unwrap_or(first)
            }
        }
    }

    pub fn reply(&self, cfg: &GameConfiguration, mv: &SpoilerMove) -> Result<Vec<ReplyItem>, StrategyError> {
        match self {
            Engine::Strategy(ctx) => duplicator_reply(ctx, cfg, mv),
            Engine::Optimal(t) => optimal_reply(t, cfg, mv),
        }
    }

    /// `(S_r)`, `(E_r)`, `(R_r)`; only the strategy maintains them.
    pub fn invariants(&self, cfg: &GameConfiguration) -> Option<InvariantReport> {
        match self {
            Engine::Strategy(ctx) => Some(ctx.invariants(cfg)),
            Engine::Optimal(_) => None,
        }
    }

    pub fn same_atomic_type(&self, cfg: &GameConfiguration) -> bool {
        let (a, b) = cfg.pebbles.pair(0);
        let (c, d) = cfg.pebbles.pair(1);
        match self {
            Engine::Strategy(ctx) => ctx.ordered(0).pair_atomic_type(a, b).ok() == ctx.ordered(1).pair_atomic_type(c, d).ok(),
            Engine::Optimal(t) => t.boards[0].atom(a, b) == t.boards[1].atom(c, d),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub rounds_left: usize,
    #[serde(rename = "move")]
    pub spoiler_move: SpoilerMove,
    pub replies: Vec<ReplyItem>,
    /// The answer the spoiler kept.
    pub picked: ReplyItem,
    pub pebbles: Pebbles,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub invariants: Option<InvariantReport>,
    pub same_atomic_type: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub engine: String,
    pub k: usize,
    pub mode: Mode,
    pub initial: Pebbles,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub initial_invariants: Option<InvariantReport>,
    pub rounds: Vec<Round>,
    /// The atomic types of the pebbled pairs agreed after every round.
    pub duplicator_won: bool,
}

impl Transcript {
    /// Every recorded invariant report holds (vacuous for the optimal engine).
    pub fn invariants_held(&self) -> bool {
        self.initial_invariants.is_none_or(|r| r.holds()) && self.rounds.iter().all(|r| r.invariants.is_none_or(|i| i.holds()))
    }
}

/// Plays all rounds of `engine` against `spoiler`, checking the invariants
/// after every round.
pub fn play_match(engine: Engine<'_>, spoiler: &mut dyn Spoiler, mode: Mode) -> Result<Transcript, StrategyError> {
    let arena = engine.arena();
    let mut cfg = engine.initial(mode);
    let initial_invariants = engine.invariants(&cfg);
    let mut transcript = Transcript {
        engine: engine.name().into(),
        k: engine.rounds(),
        mode,
        initial: cfg.pebbles,
        initial_invariants,
        rounds: Vec::with_capacity(engine.rounds()),
        duplicator_won: engine.same_atomic_type(&cfg),
    };
    while cfg.rounds_left > 0 {
        let mv = spoiler.choose(&arena, &cfg);
        let replies = engine.reply(&cfg, &mv)?;
        let picked = replies[spoiler.pick(&replies).min(replies.len() - 1)].clone();
        cfg.pebbles.set(mv.structure, mv.pebble, picked.element);
        cfg.pebbles.set(1 - mv.structure, mv.pebble, picked.reply);
        cfg.rounds_left -= 1;
        let same = engine.same_atomic_type(&cfg);
        transcript.duplicator_won &= same;
        transcript.rounds.push(Round {
            rounds_left: cfg.rounds_left,
            spoiler_move: mv,
            replies,
            picked,
            pebbles: cfg.pebbles,
            invariants: engine.invariants(&cfg),
            same_atomic_type: same,
        });
    }
    Ok(transcript)
}
