//! Two-pebble Ehrenfeucht-Fraïssé games, plain and counting.

mod explicit;
mod extract;
mod play;
mod solve;
mod strategy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Model;
use crate::structure::{Element, OrderRelation, PairAtomicType, Structure};

pub use explicit::{solve_explicit, ExplicitTable, EXPLICIT_BOUND};
pub use extract::distinguishing_formula;
#[cfg(test)]
mod tests;
#[cfg(test)]
mod strategy_tests;

pub use play::{play_match, Arena, Engine, RandomSpoiler, Round, ScriptedSpoiler, Spoiler, Transcript};
pub use solve::{fo2_equivalent, solve, WinningTable};
pub use strategy::{
    duplicator_reply, optimal_reply, InvariantReport, ReplyItem, SpoilerMove, StrategyCase, StrategyContext, StrategyError,
};

/// Plain moves place one pebble; counting moves name a set of up to
/// `threshold` elements first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Mode {
    Plain,
    Counting { threshold: usize },
}

impl Mode {
    /// Largest set a spoiler may name; 1 in plain mode.
    pub fn threshold(&self) -> usize {
        match *self {
            Mode::Plain => 1,
            Mode::Counting { threshold } => threshold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pebble {
    X,
    Y,
}

impl Pebble {
    pub fn index(self) -> usize {
        match self {
            Pebble::X => 0,
            Pebble::Y => 1,
        }
    }

    pub fn other(self) -> Pebble {
        match self {
            Pebble::X => Pebble::Y,
            Pebble::Y => Pebble::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pebble::X => "x",
            Pebble::Y => "y",
        }
    }
}

/// Pebble positions; `p0x` is pebble x in structure 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pebbles {
    pub p0x: Element,
    pub p0y: Element,
    pub p1x: Element,
    pub p1y: Element,
}

impl Pebbles {
    pub fn get(&self, structure: usize, pebble: Pebble) -> Element {
        match (structure, pebble) {
            (0, Pebble::X) => self.p0x,
            (0, Pebble::Y) => self.p0y,
            (_, Pebble::X) => self.p1x,
            (_, Pebble::Y) => self.p1y,
        }
    }

    pub fn set(&mut self, structure: usize, pebble: Pebble, a: Element) {
        match (structure, pebble) {
            (0, Pebble::X) => self.p0x = a,
            (0, Pebble::Y) => self.p0y = a,
            (_, Pebble::X) => self.p1x = a,
            (_, Pebble::Y) => self.p1y = a,
        }
    }

    /// `(x, y)` in one structure.
    pub fn pair(&self, structure: usize) -> (Element, Element) {
        (self.get(structure, Pebble::X), self.get(structure, Pebble::Y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfiguration {
    pub pebbles: Pebbles,
    pub rounds_left: usize,
    pub mode: Mode,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("structure {0} has an empty domain")]
    EmptyDomain(usize),
    #[error("counting threshold must be at least 1")]
    ZeroThreshold,
    #[error("the structures have different signatures")]
    SignatureMismatch,
    #[error("one structure is ordered and the other is not")]
    KindMismatch,
    #[error("element {element} is out of range for structure {structure}")]
    ElementOutOfRange { structure: usize, element: Element },
    #[error("explicit solver is limited to {bound} elements, got {size}")]
    BoundExceeded { size: usize, bound: usize },
    #[error("illegal move: {0}")]
    IllegalMove(String),
}

/// One side of a game: the structure with its order, if any.
#[derive(Debug, Clone)]
pub(crate) struct Board {
    pub(crate) structure: Structure,
    pub(crate) positions: Option<Vec<usize>>,
}

impl Board {
    pub(crate) fn new<M: Model>(m: &M) -> Self {
        Board { structure: m.structure().clone(), positions: m.order().map(<[usize]>::to_vec) }
    }

    pub(crate) fn size(&self) -> usize {
        self.structure.size()
    }

    pub(crate) fn position(&self, a: Element) -> usize {
        self.positions.as_ref().map_or(a, |p| p[a])
    }

    /// The `<`-least element, or 0 without an order.
    pub(crate) fn minimum(&self) -> Element {
        self.positions.as_ref().and_then(|p| p.iter().position(|&q| q == 0)).unwrap_or(0)
    }

    pub(crate) fn order(&self, a: Element, b: Element) -> Option<OrderRelation> {
        self.positions.as_ref().map(|p| OrderRelation::between(p[a], p[b]))
    }

    pub(crate) fn atom(&self, a: Element, b: Element) -> PairAtomicType {
        let mut t = self.structure.pair_atomic_type(a, b).expect("element in range");
        t.order = self.order(a, b);
        t
    }
}

pub(crate) fn boards<M: Model>(m0: &M, m1: &M, mode: Mode) -> Result<[Board; 2], GameError> {
    if mode.threshold() == 0 {
        return Err(GameError::ZeroThreshold);
    }
    if m0.structure().signature() != m1.structure().signature() {
        return Err(GameError::SignatureMismatch);
    }
    if m0.order().is_some() != m1.order().is_some() {
        return Err(GameError::KindMismatch);
    }
    for (i, m) in [m0.structure(), m1.structure()].into_iter().enumerate() {
        if m.size() == 0 {
            return Err(GameError::EmptyDomain(i));
        }
    }
    Ok([Board::new(m0), Board::new(m1)])
}
