use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GameConfiguration, Mode, Pebble, Pebbles, WinningTable};
use crate::neighborhood::{ball, environment, environment_type, EnvironmentType};
use crate::order::{OrderPair, Side};
use crate::structure::{Element, OrderedStructure};

/// The six cases of the duplicator's strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyCase {
    /// Near the endpoints: copy through the transfer map.
    I,
    /// On or next to the other pebble: follow the environment isomorphism.
    II,
    /// Left of the other pebble, far from it: answer with a left pin.
    III,
    /// Left of the other pebble while that one sits in `L_{r+1}`.
    IV,
    /// Right of the other pebble, far from it: answer with a right pin.
    V,
    /// Right of the other pebble while that one sits in `R_{r+1}`.
    VI,
}

impl StrategyCase {
    pub fn label(self) -> &'static str {
        match self {
            StrategyCase::I => "Case I",
            StrategyCase::II => "Case II",
            StrategyCase::III => "Case III",
            StrategyCase::IV => "Case IV",
            StrategyCase::V => "Case V",
            StrategyCase::VI => "Case VI",
        }
    }
}

/// Status of `(S_r)`, `(E_r)` and `(R_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantReport {
    #[serde(rename = "S")]
    pub s: bool,
    #[serde(rename = "E")]
    pub e: bool,
    #[serde(rename = "R")]
    pub r: bool,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.s && self.e && self.r
    }

    pub fn broken(&self) -> Vec<&'static str> {
        [(self.s, "S"), (self.e, "E"), (self.r, "R")].into_iter().filter(|(ok, _)| !ok).map(|(_, n)| n).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("invariants ({}) fail with {rounds_left} rounds left", .report.broken().join(", "))]
    Precondition { rounds_left: usize, report: InvariantReport },
    #[error("no rounds left")]
    GameOver,
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("no unused pin of side {side:?}, slot {slot} realizes the environment type of {element}")]
    PinMissing { side: Side, slot: usize, element: Element },
    #[error("transfer map undefined on {0}")]
    OutsideTransfer(Element),
}

/// A spoiler move: a pebble, a structure and the chosen elements (one in
/// plain mode, up to the threshold in counting mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpoilerMove {
    pub structure: usize,
    pub pebble: Pebble,
    pub elements: Vec<Element>,
}

/// The duplicator's answer to each chosen element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyItem {
    pub element: Element,
    pub reply: Element,
    pub case: Option<StrategyCase>,
}

/// Everything the strategy consults: the pair of ordered structures, both
/// decompositions and the transfer map.
#[derive(Debug, Clone)]
pub struct StrategyContext {
    pub pair: OrderPair,
    pub k: usize,
}

impl StrategyContext {
    pub fn new(pair: OrderPair) -> Self {
        let k = pair.decompositions[0].k;
        StrategyContext { pair, k }
    }

    pub fn ordered(&self, i: usize) -> &OrderedStructure {
        &self.pair.ordered[i]
    }

    fn env_type(&self, i: usize, a: Element, r: usize) -> EnvironmentType {
        environment_type(&environment(&self.pair.ordered[i], a, r).expect("element in range"))
    }

    /// Starting position: all pebbles on the minimal elements.
    pub fn initial(&self, mode: Mode) -> GameConfiguration {
        let m0 = self.pair.ordered[0].minimum().expect("nonempty");
        let m1 = self.pair.ordered[1].minimum().expect("nonempty");
        GameConfiguration { pebbles: Pebbles { p0x: m0, p0y: m0, p1x: m1, p1y: m1 }, rounds_left: self.k, mode }
    }

    /// Checks `(S_r)`, `(E_r)`, `(R_r)` for `r = cfg.rounds_left`.
    pub fn invariants(&self, cfg: &GameConfiguration) -> InvariantReport {
        let r = cfg.rounds_left;
        let p = &cfg.pebbles;
        let mut s = true;
        for i in 0..2 {
            for q in [Pebble::X, Pebble::Y] {
                let a = p.get(i, q);
                if self.pair.decompositions[i].in_segment(a, r) && self.pair.transfer_from(i, a) != Some(p.get(1 - i, q)) {
                    s = false;
                }
            }
        }
        let e = [Pebble::X, Pebble::Y].into_iter().all(|q| self.env_type(0, p.get(0, q), r) == self.env_type(1, p.get(1, q), r));
        let (a, b) = p.pair(0);
        let (c, d) = p.pair(1);
        let rel = self.pair.ordered[0].pair_atomic_type(a, b).ok() == self.pair.ordered[1].pair_atomic_type(c, d).ok();
        InvariantReport { s, e, r: rel }
    }

    /// The case that applies to moving `pebble` to `e` in structure `i`
    /// with `r` rounds left after the move.
    pub fn case_of(&self, i: usize, pebble: Pebble, e: Element, pebbles: &Pebbles, r: usize) -> StrategyCase {
        let dec = &self.pair.decompositions[i];
        let o = &self.pair.ordered[i];
        let w = pebbles.get(i, pebble.other());
        if dec.in_segment(e, r) {
            StrategyCase::I
        } else if e == w || o.base().gaifman().has_edge(e, w) {
            StrategyCase::II
        } else if o.less(e, w) {
            if dec.in_layer(Side::L, r + 1, w) {
                StrategyCase::IV
            } else {
                StrategyCase::III
            }
        } else if dec.in_layer(Side::R, r + 1, w) {
            StrategyCase::VI
        } else {
            StrategyCase::V
        }
    }

    fn transfer(&self, i: usize, a: Element) -> Result<Element, StrategyError> {
        self.pair.transfer_from(i, a).ok_or(StrategyError::OutsideTransfer(a))
    }

    /// `ψ(e)` for the unique isomorphism between the `(r+1)`-environments of
    /// the other pebble in both structures.
    fn environment_image(&self, i: usize, w: Element, w1: Element, e: Element, r: usize) -> Element {
        let rank_sorted = |j: usize, c: Element| -> Vec<Element> {
            let mut v: Vec<Element> = ball(self.pair.ordered[j].base(), c, r + 1).expect("in range").into_iter().collect();
            v.sort_by_key(|&a| self.pair.ordered[j].position(a));
            v
        };
        let (src, dst) = (rank_sorted(i, w), rank_sorted(1 - i, w1));
        dst[src.iter().position(|&a| a == e).expect("e lies in the ball")]
    }

    fn pin(&self, i: usize, side: Side, slot: usize, e: Element, used: &BTreeSet<Element>) -> Result<Element, StrategyError> {
        let target = self.env_type(i, e, self.k);
        self.pair.decompositions[1 - i]
            .pins
            .iter()
            .filter(|p| p.side == side && p.slot == slot && p.environment == target)
            .map(|p| p.element)
            .find(|a| !used.contains(a))
            .ok_or(StrategyError::PinMissing { side, slot, element: e })
    }
}

/// The strategy's answer to `mv` from `cfg`: one distinct reply per chosen
/// element, with the case that produced it.
pub fn duplicator_reply(
    ctx: &StrategyContext,
    cfg: &GameConfiguration,
    mv: &SpoilerMove,
) -> Result<Vec<ReplyItem>, StrategyError> {
    if cfg.rounds_left == 0 {
        return Err(StrategyError::GameOver);
    }
    check_move([ctx.pair.ordered[0].base().size(), ctx.pair.ordered[1].base().size()], cfg.mode, mv)?;
    let report = ctx.invariants(cfg);
    if !report.holds() {
        return Err(StrategyError::Precondition { rounds_left: cfg.rounds_left, report });
    }
    let r = cfg.rounds_left - 1;
    let i = mv.structure;
    let w = cfg.pebbles.get(i, mv.pebble.other());
    let w1 = cfg.pebbles.get(1 - i, mv.pebble.other());
    let mut used = BTreeSet::new();
    let mut out = Vec::with_capacity(mv.elements.len());
    for &e in &mv.elements {
        let case = ctx.case_of(i, mv.pebble, e, &cfg.pebbles, r);
        let reply = match case {
            StrategyCase::I | StrategyCase::IV | StrategyCase::VI => ctx.transfer(i, e)?,
            StrategyCase::II => ctx.environment_image(i, w, w1, e, r),
            StrategyCase::III => ctx.pin(i, Side::L, r + 1, e, &used)?,
            StrategyCase::V => ctx.pin(i, Side::R, r + 1, e, &used)?,
        };
        used.insert(reply);
        out.push(ReplyItem { element: e, reply, case: Some(case) });
    }
    Ok(out)
}

pub(crate) fn check_move(sizes: [usize; 2], mode: Mode, mv: &SpoilerMove) -> Result<(), StrategyError> {
    if mv.structure > 1 {
        return Err(StrategyError::IllegalMove(format!("structure index {} is not 0 or 1", mv.structure)));
    }
    let size = sizes[mv.structure];
    let distinct: BTreeSet<_> = mv.elements.iter().collect();
    if mv.elements.is_empty() || distinct.len() != mv.elements.len() || mv.elements.len() > mode.threshold() {
        return Err(StrategyError::IllegalMove(format!(
            "expected between 1 and {} distinct elements, got {:?}",
            mode.threshold(),
            mv.elements
        )));
    }
    if let Some(&e) = mv.elements.iter().find(|&&e| e >= size) {
        return Err(StrategyError::IllegalMove(format!("element {e} is out of range (domain size {size})")));
    }
    Ok(())
}

/// Replies chosen from the winning table: each element is answered by an
/// unused element that keeps the configuration in `W_r` when possible, and
/// otherwise by one with the same atomic type.
pub fn optimal_reply(
    table: &WinningTable,
    cfg: &GameConfiguration,
    mv: &SpoilerMove,
) -> Result<Vec<ReplyItem>, StrategyError> {
    if cfg.rounds_left == 0 {
        return Err(StrategyError::GameOver);
    }
    check_move([table.boards[0].size(), table.boards[1].size()], cfg.mode, mv)?;
    let r = (cfg.rounds_left - 1).min(table.rounds());
    let i = mv.structure;
    let n = table.boards[1 - i].size();
    let mut used = BTreeSet::new();
    let mut out = Vec::new();
    for &e in &mv.elements {
        let candidate = |c: Element, need_win: bool| -> bool {
            let mut p = cfg.pebbles;
            p.set(i, mv.pebble, e);
            p.set(1 - i, mv.pebble, c);
            let next = GameConfiguration { pebbles: p, rounds_left: r, mode: cfg.mode };
            if need_win {
                table.contains(r, &next).unwrap_or(false)
            } else {
                table.contains(0, &next).unwrap_or(false)
            }
        };
        let reply = (0..n)
            .find(|&c| !used.contains(&c) && candidate(c, true))
            .or_else(|| (0..n).find(|&c| !used.contains(&c) && candidate(c, false)))
            .or_else(|| (0..n).find(|c| !used.contains(c)))
            .ok_or_else(|| StrategyError::IllegalMove("set larger than the other domain".into()))?;
        used.insert(reply);
        out.push(ReplyItem { element: e, reply, case: None });
    }
    Ok(out)
}
