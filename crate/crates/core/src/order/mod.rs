//! Segment decompositions and the pair of linear orders built from them.
//!
//! The domain is cut into `Rare · L_0 ⋯ L_2k · Middle · R_2k ⋯ R_0` with
//! `L_j = NL_j · UL_j` and `R_j = UR_j · NR_j`. The universal segments
//! `UL_j`, `UR_j` (for `j ≤ k`) hold pinned `k`-balls ordered to realize every
//! environment type of every frequent neighborhood type; the `N` segments
//! collect the neighbors of the previous layer.

mod build;
mod transfer;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon;
use crate::frequency::FrequencyError;
use crate::neighborhood::{Certificate, EnvironmentType, NeighborhoodError};
use crate::structure::{Element, OrderedStructure, Structure, StructureError};

pub use build::{build_decomposition, pin_separation};
pub use transfer::{find_transfer, transfer_decomposition, DEFAULT_TRANSFER_BUDGET};
pub use verify::{check_decomposition, check_pin_separation, verify_lemma_envpres, verify_lemma_tppres, LemmaReport};

pub const DEFAULT_ISOMORPHISM_BOUND: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("no frequent types: the structures are small enough to compare up to isomorphism")]
    NoFrequentTypes,
    #[error("type {certificate} needs {needed} pins but only {found} could be placed")]
    PinShortage { certificate: String, needed: usize, found: usize },
    #[error("element {element} would be placed in {segment} but already belongs to another segment")]
    SegmentOverlap { segment: String, element: Element },
    #[error("precondition of Theorem 1 pipeline not met: {0}")]
    NoEmbedding(String),
    #[error("transfer map is undefined on element {0}")]
    NotTotal(Element),
    #[error("isomorphism test needs a structure of at most {bound} elements, got {size}")]
    BoundExceeded { size: usize, bound: usize },
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
    #[error(transparent)]
    Frequency(#[from] FrequencyError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

/// Names of the `2(2k+1)+2` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentName {
    Rare,
    NL(usize),
    UL(usize),
    Middle,
    UR(usize),
    NR(usize),
}

impl fmt::Display for SegmentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentName::Rare => write!(f, "Rare"),
            SegmentName::NL(j) => write!(f, "NL_{j}"),
            SegmentName::UL(j) => write!(f, "UL_{j}"),
            SegmentName::Middle => write!(f, "Middle"),
            SegmentName::UR(j) => write!(f, "UR_{j}"),
            SegmentName::NR(j) => write!(f, "NR_{j}"),
        }
    }
}

impl Serialize for SegmentName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One pinned element: its ball realizes environment type `env_index` of
/// the neighborhood type `neighborhood`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pin {
    pub neighborhood: Certificate,
    pub env_index: usize,
    pub environment: EnvironmentType,
    pub side: Side,
    pub slot: usize,
    pub copy: usize,
    pub element: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentDecomposition {
    pub k: usize,
    pub rare: Vec<Element>,
    pub nl: Vec<Vec<Element>>,
    pub ul: Vec<Vec<Element>>,
    pub middle: Vec<Element>,
    pub ur: Vec<Vec<Element>>,
    pub nr: Vec<Vec<Element>>,
    pub pins: Vec<Pin>,
    /// Block of each element.
    block: Vec<SegmentName>,
}

impl SegmentDecomposition {
    pub(crate) fn new(
        k: usize,
        size: usize,
        rare: Vec<Element>,
        nl: Vec<Vec<Element>>,
        ul: Vec<Vec<Element>>,
        middle: Vec<Element>,
        ur: Vec<Vec<Element>>,
        nr: Vec<Vec<Element>>,
        pins: Vec<Pin>,
    ) -> Self {
        let mut d = SegmentDecomposition { k, rare, nl, ul, middle, ur, nr, pins, block: Vec::new() };
        let mut block = vec![SegmentName::Middle; size];
        for (name, elems) in d.segments() {
            for &a in elems {
                block[a] = name;
            }
        }
        d.block = block;
        d
    }

    /// All blocks in concatenation order.
    pub fn segments(&self) -> Vec<(SegmentName, &[Element])> {
        let mut out = vec![(SegmentName::Rare, self.rare.as_slice())];
        for j in 0..=2 * self.k {
            out.push((SegmentName::NL(j), self.nl[j].as_slice()));
            out.push((SegmentName::UL(j), self.ul[j].as_slice()));
        }
        out.push((SegmentName::Middle, self.middle.as_slice()));
        for j in (0..=2 * self.k).rev() {
            out.push((SegmentName::UR(j), self.ur[j].as_slice()));
            out.push((SegmentName::NR(j), self.nr[j].as_slice()));
        }
        out
    }

    /// The order as a sequence, smallest first.
    pub fn sequence(&self) -> Vec<Element> {
        self.segments().into_iter().flat_map(|(_, e)| e.iter().copied()).collect()
    }

    pub fn size(&self) -> usize {
        self.block.len()
    }

    /// Least `r` with `a ∈ Segment^r`, or `None` if `a` lies in Middle.
    pub fn level(&self, a: Element) -> Option<usize> {
        match self.block[a] {
            SegmentName::Rare => Some(0),
            SegmentName::NL(j) | SegmentName::UL(j) | SegmentName::UR(j) | SegmentName::NR(j) => Some(j),
            SegmentName::Middle => None,
        }
    }

    /// Whether `a ∈ Segment^r`.
    pub fn in_segment(&self, a: Element, r: usize) -> bool {
        self.level(a).is_some_and(|l| l <= r)
    }

    /// Whether `a ∈ L_j = NL_j · UL_j` (or `R_j` for the right side).
    pub fn in_layer(&self, side: Side, j: usize, a: Element) -> bool {
        match (side, self.block[a]) {
            (Side::L, SegmentName::NL(i) | SegmentName::UL(i)) | (Side::R, SegmentName::NR(i) | SegmentName::UR(i)) => i == j,
            _ => false,
        }
    }

    /// Elements of `Segment^r`, ascending.
    pub fn segment_up_to(&self, r: usize) -> Vec<Element> {
        (0..self.size()).filter(|&a| self.in_segment(a, r)).collect()
    }

    pub fn segment_of(&self, a: Element) -> SegmentName {
        self.block[a]
    }

    pub fn middle_is_empty(&self) -> bool {
        self.middle.is_empty()
    }

    /// The universal segment `UL_j` or `UR_j`.
    pub fn universal(&self, side: Side, j: usize) -> &[Element] {
        match side {
            Side::L => &self.ul[j],
            Side::R => &self.ur[j],
        }
    }
}

#[derive(Serialize)]
struct DecompositionJson<'a> {
    k: usize,
    segments: BTreeMap<String, &'a [Element]>,
    pins: &'a [Pin],
    middle_empty: bool,
}

impl Serialize for SegmentDecomposition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DecompositionJson {
            k: self.k,
            segments: self.segments().into_iter().map(|(n, e)| (n.to_string(), e)).collect(),
            pins: &self.pins,
            middle_empty: self.middle_is_empty(),
        }
        .serialize(s)
    }
}

/// Partial injective map from `Segment^{2k}` of the first structure into
/// the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferMap {
    forward: BTreeMap<Element, Element>,
    backward: BTreeMap<Element, Element>,
}

impl TransferMap {
    pub fn new(pairs: impl IntoIterator<Item = (Element, Element)>) -> Self {
        let forward: BTreeMap<_, _> = pairs.into_iter().collect();
        let backward = forward.iter().map(|(&a, &b)| (b, a)).collect();
        TransferMap { forward, backward }
    }

    pub fn apply(&self, a: Element) -> Option<Element> {
        self.forward.get(&a).copied()
    }

    pub fn inverse(&self, b: Element) -> Option<Element> {
        self.backward.get(&b).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.forward.iter().map(|(&a, &b)| (a, b))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn without(&self, a: Element) -> Self {
        TransferMap::new(self.pairs().filter(|&(x, _)| x != a))
    }
}

impl Serialize for TransferMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.pairs().map(|(a, b)| [a, b]))
    }
}

/// Both ordered structures with their decompositions and the transfer map.
#[derive(Debug, Clone)]
pub struct OrderPair {
    pub ordered: [OrderedStructure; 2],
    pub decompositions: [SegmentDecomposition; 2],
    pub transfer: TransferMap,
}

impl OrderPair {
    pub fn structure(&self, i: usize) -> &Structure {
        self.ordered[i].base()
    }

    /// `ρ` for `i = 0`, `ρ⁻¹` for `i = 1`.
    pub fn transfer_from(&self, i: usize, a: Element) -> Option<Element> {
        if i == 0 {
            self.transfer.apply(a)
        } else {
            self.transfer.inverse(a)
        }
    }
}

/// Builds the pair of orders for `s0`, `s1` from a classification of `s0`.
pub fn build_order_pair(
    s0: &Structure,
    s1: &Structure,
    cls: &crate::frequency::FrequencyClassification,
    budget: usize,
) -> Result<OrderPair, OrderError> {
    let (dec0, o0) = build_decomposition(s0, cls.params.k, cls, &cls.params)?;
    let rho = find_transfer(s0, &dec0, s1, budget)?;
    let (dec1, o1) = transfer_decomposition(&dec0, &rho, s1)?;
    Ok(OrderPair { ordered: [o0, o1], decompositions: [dec0, dec1], transfer: rho })
}

/// Whether `s0 ≅ s1`.
pub fn isomorphic(s0: &Structure, s1: &Structure, bound: usize) -> Result<bool, OrderError> {
    let size = s0.size().min(s1.size());
    if size > bound {
        return Err(OrderError::BoundExceeded { size, bound });
    }
    if s0.size() != s1.size() {
        return Ok(false);
    }
    Ok(canon::isomorphism(s0, s1, &[], &[]).is_some())
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn cycle(n: usize) -> Structure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Structure::graph(n, &edges, true).unwrap()
    }

    fn path(n: usize) -> Structure {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Structure::graph(n, &edges, true).unwrap()
    }

    #[test]
    fn isomorphism_examples() {
        assert!(isomorphic(&cycle(4), &cycle(4), 64).unwrap());
        assert!(!isomorphic(&cycle(4), &path(4), 64).unwrap());
        assert!(!isomorphic(&cycle(4), &cycle(5), 64).unwrap());
        assert!(matches!(isomorphic(&cycle(80), &cycle(80), 64), Err(OrderError::BoundExceeded { .. })));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(1..12);
            let edges: Vec<_> = (0..n * 2).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
            let s = Structure::graph(n, &edges, false).unwrap();
            let mut perm: Vec<Element> = (0..n).collect();
            perm.shuffle(&mut rng);
            assert!(isomorphic(&s, &s.relabel(&perm).unwrap(), 64).unwrap());
        }
    }

    #[test]
    fn transfer_map() {
        let t = TransferMap::new([(0, 5), (1, 7)]);
        assert_eq!(t.apply(1), Some(7));
        assert_eq!(t.inverse(5), Some(0));
        assert_eq!(t.without(0).apply(0), None);
        assert_eq!(serde_json::to_string(&t).unwrap(), "[[0,5],[1,7]]");
    }
}
