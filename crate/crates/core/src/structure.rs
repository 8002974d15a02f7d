//! Finite relational structures, their Gaifman graphs and atomic types.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element of a structure's universe. Universes are always `0..n`.
pub type Element = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("duplicate symbol `{0}` in signature")]
    DuplicateSymbol(String),
    #[error("relation `{0}` must have arity at least 1")]
    ZeroArity(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("relation `{relation}` has arity {expected}, got a tuple of length {found}")]
    ArityMismatch { relation: String, expected: usize, found: usize },
    #[error("element id out of range: {element} (domain size {size})")]
    ElementOutOfRange { element: Element, size: usize },
    #[error("expected {expected} relations and {found} were given")]
    RelationCount { expected: usize, found: usize },
    #[error("constant `{0}` is not interpreted")]
    MissingConstant(String),
    #[error("constant `{0}` lies outside the induced set")]
    ConstantOutsideSubset(String),
    #[error("order is not a permutation of the domain")]
    NotAPermutation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// A finite relational signature with constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Signature {
    relations: Vec<RelationSymbol>,
    constants: Vec<String>,
}

impl Signature {
    pub fn new<R, N>(relations: R, constants: Vec<String>) -> Result<Self, StructureError>
    where
        R: IntoIterator<Item = (N, usize)>,
        N: Into<String>,
    {
        let relations: Vec<RelationSymbol> = relations
            .into_iter()
            .map(|(name, arity)| RelationSymbol { name: name.into(), arity })
            .collect();
        let mut seen = HashSet::new();
        for r in &relations {
            if r.arity == 0 {
                return Err(StructureError::ZeroArity(r.name.clone()));
            }
            if !seen.insert(r.name.as_str()) {
                return Err(StructureError::DuplicateSymbol(r.name.clone()));
            }
        }
        for c in &constants {
            if !seen.insert(c.as_str()) {
                return Err(StructureError::DuplicateSymbol(c.clone()));
            }
        }
        Ok(Signature { relations, constants })
    }

    /// The empty signature.
    pub fn empty() -> Self {
        Signature::default()
    }

    /// A single binary relation named `name`.
    pub fn graph(name: &str) -> Self {
        Signature { relations: vec![RelationSymbol { name: name.to_string(), arity: 2 }], constants: vec![] }
    }

    pub fn relations(&self) -> &[RelationSymbol] {
        &self.relations
    }

    pub fn constants(&self) -> &[String] {
        &self.constants
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn constant_index(&self, name: &str) -> Option<usize> {
        self.constants.iter().position(|c| c == name)
    }

    /// The same relations without constants.
    pub fn without_constants(&self) -> Self {
        Signature { relations: self.relations.clone(), constants: vec![] }
    }
}

/// Symmetric, irreflexive adjacency of a structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaifmanGraph {
    adjacency: Vec<Vec<Element>>,
}

impl GaifmanGraph {
    pub fn size(&self) -> usize {
        self.adjacency.len()
    }

    /// Sorted neighbors of `a`.
    pub fn neighbors(&self, a: Element) -> &[Element] {
        &self.adjacency[a]
    }

    pub fn has_edge(&self, a: Element, b: Element) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn degree_of(&self, a: Element) -> usize {
        self.adjacency[a].len()
    }

    /// Edges `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (Element, Element)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }
}

#[derive(Debug)]
struct Relation {
    tuples: Vec<Box<[Element]>>,
    index: HashSet<Box<[Element]>>,
}

#[derive(Debug)]
struct Inner {
    signature: Arc<Signature>,
    size: usize,
    relations: Vec<Relation>,
    constants: Vec<Element>,
    gaifman: GaifmanGraph,
}

/// A finite relational structure over dense element ids `0..n`.
///
/// Cloning is cheap; the data is shared.
#[derive(Clone)]
pub struct Structure(Arc<Inner>);

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Structure")
            .field("size", &self.size())
            .field("signature", self.signature())
            .finish_non_exhaustive()
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.0.signature == other.0.signature
            && self.0.size == other.0.size
            && self.0.constants == other.0.constants
            && self.0.relations.iter().zip(&other.0.relations).all(|(a, b)| a.tuples == b.tuples)
    }
}

impl Eq for Structure {}

impl Structure {
    /// Builds a structure. `relations[i]` holds the tuples of the `i`-th relation
    /// symbol and `constants[i]` the interpretation of the `i`-th constant.
    pub fn new(
        signature: Signature,
        size: usize,
        relations: Vec<Vec<Vec<Element>>>,
        constants: Vec<Element>,
    ) -> Result<Self, StructureError> {
        if relations.len() != signature.relations.len() {
            return Err(StructureError::RelationCount {
                expected: signature.relations.len(),
                found: relations.len(),
            });
        }
        if constants.len() != signature.constants.len() {
            let missing = signature.constants[constants.len().min(signature.constants.len())..]
                .first()
                .cloned()
                .unwrap_or_default();
            return Err(StructureError::MissingConstant(missing));
        }
        for &c in &constants {
            if c >= size {
                return Err(StructureError::ElementOutOfRange { element: c, size });
            }
        }
        let mut rels = Vec::with_capacity(relations.len());
        let mut adj_sets: Vec<Vec<Element>> = vec![Vec::new(); size];
        for (sym, tuples) in signature.relations.iter().zip(relations) {
            let mut set: BTreeSet<Box<[Element]>> = BTreeSet::new();
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(StructureError::ArityMismatch {
                        relation: sym.name.clone(),
                        expected: sym.arity,
                        found: t.len(),
                    });
                }
                if let Some(&e) = t.iter().find(|&&e| e >= size) {
                    return Err(StructureError::ElementOutOfRange { element: e, size });
                }
                set.insert(t.into_boxed_slice());
            }
            for t in &set {
                for (i, &a) in t.iter().enumerate() {
                    for &b in &t[i + 1..] {
                        if a != b {
                            adj_sets[a].push(b);
                            adj_sets[b].push(a);
                        }
                    }
                }
            }
            let tuples: Vec<Box<[Element]>> = set.into_iter().collect();
            let index = tuples.iter().cloned().collect();
            rels.push(Relation { tuples, index });
        }
        for ns in &mut adj_sets {
            ns.sort_unstable();
            ns.dedup();
        }
        Ok(Structure(Arc::new(Inner {
            signature: Arc::new(signature),
            size,
            relations: rels,
            constants,
            gaifman: GaifmanGraph { adjacency: adj_sets },
        })))
    }

    /// A structure over a single binary relation `E`. With `symmetric`, every
    /// edge is stored in both directions.
    pub fn graph(size: usize, edges: &[(Element, Element)], symmetric: bool) -> Result<Self, StructureError> {
        let mut tuples = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            tuples.push(vec![a, b]);
            if symmetric {
                tuples.push(vec![b, a]);
            }
        }
        Structure::new(Signature::graph("E"), size, vec![tuples], vec![])
    }

    /// A structure over the empty signature.
    pub fn pure_set(size: usize) -> Self {
        Structure::new(Signature::empty(), size, vec![], vec![]).expect("pure set is well formed")
    }

    pub fn signature(&self) -> &Signature {
        &self.0.signature
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.0.size
    }

    /// Sorted tuples of relation `rel`.
    pub fn tuples(&self, rel: usize) -> &[Box<[Element]>] {
        &self.0.relations[rel].tuples
    }

    pub fn holds(&self, rel: usize, tuple: &[Element]) -> bool {
        self.0.relations[rel].index.contains(tuple)
    }

    pub fn constants(&self) -> &[Element] {
        &self.0.constants
    }

    pub fn gaifman(&self) -> &GaifmanGraph {
        &self.0.gaifman
    }

    pub fn neighbors(&self, a: Element) -> &[Element] {
        self.0.gaifman.neighbors(a)
    }

    pub fn check_element(&self, a: Element) -> Result<(), StructureError> {
        if a < self.size() {
            Ok(())
        } else {
            Err(StructureError::ElementOutOfRange { element: a, size: self.size() })
        }
    }

    /// Maximal Gaifman degree, 0 for an edgeless structure.
    pub fn degree(&self) -> usize {
        self.0.gaifman.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Gaifman distance; `None` stands for infinity.
    pub fn distance(&self, a: Element, b: Element) -> Result<Option<usize>, StructureError> {
        self.check_element(a)?;
        self.check_element(b)?;
        if a == b {
            return Ok(Some(0));
        }
        let mut dist = vec![usize::MAX; self.size()];
        let mut queue = VecDeque::from([a]);
        dist[a] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    if v == b {
                        return Ok(Some(dist[v]));
                    }
                    queue.push_back(v);
                }
            }
        }
        Ok(None)
    }

    /// Elements at distance at most `radius` from some source, with their distance,
    /// in breadth-first order.
    pub fn bfs_within(&self, sources: &[Element], radius: usize) -> Vec<(Element, usize)> {
        let mut seen = HashSet::with_capacity(sources.len() * 4);
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for &s in sources {
            if seen.insert(s) {
                out.push((s, 0));
                queue.push_back((s, 0));
            }
        }
        while let Some((u, d)) = queue.pop_front() {
            if d == radius {
                continue;
            }
            for &v in self.neighbors(u) {
                if seen.insert(v) {
                    out.push((v, d + 1));
                    queue.push_back((v, d + 1));
                }
            }
        }
        out
    }

    /// Elements at distance exactly 1 from `set`.
    pub fn neighbors_of_set(&self, set: &BTreeSet<Element>) -> Result<BTreeSet<Element>, StructureError> {
        for &a in set {
            self.check_element(a)?;
        }
        Ok(set
            .iter()
            .flat_map(|&a| self.neighbors(a).iter().copied())
            .filter(|b| !set.contains(b))
            .collect())
    }

    /// Atomic type of `(a, b)` over the signature (no order component).
    pub fn pair_atomic_type(&self, a: Element, b: Element) -> Result<PairAtomicType, StructureError> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(PairAtomicType { sigma: self.sigma_facts(a, b), order: None })
    }

    pub(crate) fn sigma_facts(&self, a: Element, b: Element) -> FactSet {
        let mut facts = FactSet::default();
        if a == b {
            facts.insert(0);
        }
        let mut bit = 1;
        let mut buf = Vec::new();
        for (ri, sym) in self.signature().relations.iter().enumerate() {
            let count = 1usize << sym.arity;
            let adjacent = a == b || self.gaifman().has_edge(a, b);
            for mask in 0..count {
                // bit i of mask set: position i holds y
                let mixed = mask != 0 && mask != count - 1;
                if !mixed || adjacent {
                    buf.clear();
                    buf.extend((0..sym.arity).map(|i| if mask >> i & 1 == 1 { b } else { a }));
                    if self.holds(ri, &buf) {
                        facts.insert(bit + mask);
                    }
                }
            }
            bit += count;
        }
        facts
    }

    /// Induced substructure on `set`, with the table mapping new ids (ascending
    /// order of the old ids) back to old ids. Constants outside `set` are an
    /// error unless `drop_constants` is set, in which case all constants are
    /// removed from the signature.
    pub fn induced_substructure(
        &self,
        set: &BTreeSet<Element>,
        drop_constants: bool,
    ) -> Result<(Structure, Vec<Element>), StructureError> {
        for &a in set {
            self.check_element(a)?;
        }
        let remap: Vec<Element> = set.iter().copied().collect();
        let mut local = std::collections::HashMap::with_capacity(remap.len());
        for (i, &g) in remap.iter().enumerate() {
            local.insert(g, i);
        }
        let (signature, constants) = if drop_constants {
            (self.signature().without_constants(), vec![])
        } else {
            let mut cs = Vec::new();
            for (ci, &c) in self.constants().iter().enumerate() {
                match local.get(&c) {
                    Some(&l) => cs.push(l),
                    None => return Err(StructureError::ConstantOutsideSubset(self.signature().constants[ci].clone())),
                }
            }
            (self.signature().clone(), cs)
        };
        let relations = (0..self.signature().relations.len())
            .map(|ri| {
                // Tuples inside the set are found from incident elements only.
                let mut ts = BTreeSet::new();
                for &g in &remap {
                    self.for_each_incident_tuple(ri, g, |t| {
                        if let Some(lt) = t.iter().map(|e| local.get(e).copied()).collect::<Option<Vec<_>>>() {
                            ts.insert(lt);
                        }
                    });
                }
                ts.into_iter().collect()
            })
            .collect();
        Ok((Structure::new(signature, remap.len(), relations, constants)?, remap))
    }

    /// Calls `f` on every tuple of `rel` that contains `a`. Relies on the fact
    /// that every other entry of such a tuple is `a` or a Gaifman neighbor of `a`.
    pub(crate) fn for_each_incident_tuple(&self, rel: usize, a: Element, mut f: impl FnMut(&[Element])) {
        let arity = self.signature().relations[rel].arity;
        let ns = self.neighbors(a);
        let choices: Vec<Element> = std::iter::once(a).chain(ns.iter().copied()).collect();
        if arity <= 3 || choices.len().pow(arity as u32) <= 4096 {
            let mut buf = vec![0; arity];
            let mut idx = vec![0usize; arity];
            loop {
                for i in 0..arity {
                    buf[i] = choices[idx[i]];
                }
                if buf.contains(&a) && self.holds(rel, &buf) {
                    f(&buf);
                }
                let mut i = 0;
                loop {
                    if i == arity {
                        return;
                    }
                    idx[i] += 1;
                    if idx[i] < choices.len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
            }
        } else {
            for t in self.tuples(rel) {
                if t.contains(&a) {
                    f(t);
                }
            }
        }
    }

    /// Applies a permutation to the element ids: element `a` becomes `perm[a]`.
    pub fn relabel(&self, perm: &[Element]) -> Result<Structure, StructureError> {
        check_permutation(perm, self.size())?;
        let relations = (0..self.signature().relations.len())
            .map(|ri| self.tuples(ri).iter().map(|t| t.iter().map(|&e| perm[e]).collect()).collect())
            .collect();
        let constants = self.constants().iter().map(|&c| perm[c]).collect();
        Structure::new(self.signature().clone(), self.size(), relations, constants)
    }

    /// Disjoint union; elements of `other` are shifted by `self.size()`.
    /// Both sides must share the signature and have no constants.
    pub fn disjoint_union(&self, other: &Structure) -> Result<Structure, StructureError> {
        if self.signature() != other.signature() {
            return Err(StructureError::UnknownRelation("signature mismatch in disjoint union".into()));
        }
        if !self.constants().is_empty() {
            return Err(StructureError::MissingConstant(self.signature().constants[0].clone()));
        }
        let shift = self.size();
        let relations = (0..self.signature().relations.len())
            .map(|ri| {
                self.tuples(ri)
                    .iter()
                    .map(|t| t.to_vec())
                    .chain(other.tuples(ri).iter().map(|t| t.iter().map(|&e| e + shift).collect()))
                    .collect()
            })
            .collect();
        Structure::new(self.signature().clone(), self.size() + other.size(), relations, vec![])
    }
}

pub(crate) fn check_permutation(perm: &[Element], n: usize) -> Result<(), StructureError> {
    if perm.len() != n {
        return Err(StructureError::NotAPermutation);
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(StructureError::NotAPermutation);
        }
    }
    Ok(())
}

/// A structure together with a strict linear order on its universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderedStructure {
    base: Structure,
    position: Arc<[usize]>,
    sequence: Arc<[Element]>,
}

impl OrderedStructure {
    /// `position[a]` is the rank of `a` in the order.
    pub fn new(base: Structure, position: Vec<usize>) -> Result<Self, StructureError> {
        check_permutation(&position, base.size())?;
        let mut sequence = vec![0; position.len()];
        for (a, &p) in position.iter().enumerate() {
            sequence[p] = a;
        }
        Ok(OrderedStructure { base, position: position.into(), sequence: sequence.into() })
    }

    /// Orders the elements as listed in `sequence` (smallest first).
    pub fn from_sequence(base: Structure, sequence: Vec<Element>) -> Result<Self, StructureError> {
        check_permutation(&sequence, base.size())?;
        let mut position = vec![0; sequence.len()];
        for (p, &a) in sequence.iter().enumerate() {
            position[a] = p;
        }
        Ok(OrderedStructure { base, position: position.into(), sequence: sequence.into() })
    }

    /// The order by ascending element id.
    pub fn identity(base: Structure) -> Self {
        let n = base.size();
        OrderedStructure::from_sequence(base, (0..n).collect()).expect("identity is a permutation")
    }

    pub fn base(&self) -> &Structure {
        &self.base
    }

    pub fn position(&self, a: Element) -> usize {
        self.position[a]
    }

    pub fn positions(&self) -> &[usize] {
        &self.position
    }

    /// Elements from smallest to largest.
    pub fn sequence(&self) -> &[Element] {
        &self.sequence
    }

    pub fn less(&self, a: Element, b: Element) -> bool {
        self.position[a] < self.position[b]
    }

    pub fn minimum(&self) -> Option<Element> {
        self.sequence.first().copied()
    }

    pub fn pair_atomic_type(&self, a: Element, b: Element) -> Result<PairAtomicType, StructureError> {
        let mut t = self.base.pair_atomic_type(a, b)?;
        t.order = Some(OrderRelation::between(self.position[a], self.position[b]));
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrderRelation {
    #[serde(rename = "x<y")]
    Less,
    #[serde(rename = "x=y")]
    Equal,
    #[serde(rename = "x>y")]
    Greater,
}

impl OrderRelation {
    pub fn between(pa: usize, pb: usize) -> Self {
        match pa.cmp(&pb) {
            std::cmp::Ordering::Less => OrderRelation::Less,
            std::cmp::Ordering::Equal => OrderRelation::Equal,
            std::cmp::Ordering::Greater => OrderRelation::Greater,
        }
    }
}

/// Small bitset of atomic facts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct FactSet(Vec<u64>);

impl FactSet {
    pub(crate) fn insert(&mut self, bit: usize) {
        let w = bit / 64;
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (bit % 64);
    }

    pub(crate) fn contains(&self, bit: usize) -> bool {
        self.0.get(bit / 64).is_some_and(|w| w >> (bit % 64) & 1 == 1)
    }
}

/// Atomic type of a pair: the σ-facts satisfied under `x ↦ a, y ↦ b`, and
/// the order relation for ordered structures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairAtomicType {
    pub(crate) sigma: FactSet,
    pub order: Option<OrderRelation>,
}

/// One atomic σ-fact over the variables `x`, `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomicFact {
    /// `x = y`
    Equal,
    /// Relation index and its argument list; `false` is `x`, `true` is `y`.
    Relation(usize, Vec<bool>),
}

impl PairAtomicType {
    /// Atomic type of `(a, b)` for distinct elements that share no tuple,
    /// from the types of `(a, a)` and `(b, b)`.
    pub(crate) fn detached(sig: &Signature, ua: &PairAtomicType, ub: &PairAtomicType, order: Option<OrderRelation>) -> Self {
        let mut sigma = FactSet::default();
        let mut bit = 1;
        for sym in &sig.relations {
            let count = 1usize << sym.arity;
            if ua.sigma.contains(bit) {
                sigma.insert(bit);
            }
            if ub.sigma.contains(bit) {
                sigma.insert(bit + count - 1);
            }
            bit += count;
        }
        PairAtomicType { sigma, order }
    }

    /// The same facts with the roles of `x` and `y` exchanged.
    pub fn swapped(&self, sig: &Signature) -> Self {
        let mut sigma = FactSet::default();
        if self.sigma.contains(0) {
            sigma.insert(0);
        }
        let mut bit = 1;
        for sym in &sig.relations {
            let count = 1usize << sym.arity;
            for mask in 0..count {
                if self.sigma.contains(bit + mask) {
                    sigma.insert(bit + (count - 1 - mask));
                }
            }
            bit += count;
        }
        let order = self.order.map(|o| match o {
            OrderRelation::Less => OrderRelation::Greater,
            OrderRelation::Greater => OrderRelation::Less,
            OrderRelation::Equal => OrderRelation::Equal,
        });
        PairAtomicType { sigma, order }
    }

    /// Enumerates the σ-facts, decoding the bit layout against `sig`.
    pub fn sigma_facts(&self, sig: &Signature) -> Vec<AtomicFact> {
        let mut out = Vec::new();
        if self.sigma.contains(0) {
            out.push(AtomicFact::Equal);
        }
        let mut bit = 1;
        for (ri, sym) in sig.relations.iter().enumerate() {
            let count = 1usize << sym.arity;
            for mask in 0..count {
                if self.sigma.contains(bit + mask) {
                    out.push(AtomicFact::Relation(ri, (0..sym.arity).map(|i| mask >> i & 1 == 1).collect()));
                }
            }
            bit += count;
        }
        out
    }

    pub fn render(&self, sig: &Signature) -> Vec<String> {
        let mut out: Vec<String> = self
            .sigma_facts(sig)
            .into_iter()
            .map(|f| match f {
                AtomicFact::Equal => "x=y".to_string(),
                AtomicFact::Relation(ri, args) => {
                    let args: Vec<&str> = args.iter().map(|&y| if y { "y" } else { "x" }).collect();
                    format!("{}({})", sig.relations[ri].name, args.join(","))
                }
            })
            .collect();
        if let Some(o) = self.order {
            out.push(match o {
                OrderRelation::Less => "x<y",
                OrderRelation::Equal => "x=y (order)",
                OrderRelation::Greater => "x>y",
            }
            .to_string());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(n: usize) -> Structure {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Structure::graph(n, &edges, false).unwrap()
    }

    fn cycle(n: usize) -> Structure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Structure::graph(n, &edges, true).unwrap()
    }

    #[test]
    fn gaifman_examples() {
        let s = Structure::graph(2, &[(0, 1)], false).unwrap();
        assert_eq!(s.gaifman().edges().collect::<Vec<_>>(), vec![(0, 1)]);

        let sig = Signature::new([("R", 3)], vec![]).unwrap();
        let s = Structure::new(sig, 3, vec![vec![vec![0, 1, 2]]], vec![]).unwrap();
        assert_eq!(s.gaifman().edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2), (1, 2)]);

        let s = Structure::graph(1, &[(0, 0)], false).unwrap();
        assert_eq!(s.gaifman().edges().count(), 0);
    }

    #[test]
    fn distances() {
        let p = path(3);
        assert_eq!(p.distance(0, 2).unwrap(), Some(2));
        assert_eq!(p.distance(1, 1).unwrap(), Some(0));
        assert_eq!(Structure::pure_set(2).distance(0, 1).unwrap(), None);
        assert!(p.distance(0, 7).is_err());
    }

    #[test]
    fn neighbor_sets() {
        let p = path(4);
        let b: BTreeSet<_> = [1, 2].into();
        assert_eq!(p.neighbors_of_set(&b).unwrap(), [0, 3].into());
        assert!(p.neighbors_of_set(&BTreeSet::new()).unwrap().is_empty());
        assert_eq!(cycle(4).neighbors_of_set(&[0].into()).unwrap(), [1, 3].into());
    }

    #[test]
    fn degrees() {
        assert_eq!(cycle(5).degree(), 2);
        assert_eq!(Structure::pure_set(3).degree(), 0);
        let star = Structure::graph(4, &[(0, 1), (0, 2), (0, 3)], false).unwrap();
        assert_eq!(star.degree(), 3);
    }

    #[test]
    fn atomic_types() {
        let s = Structure::pure_set(2);
        let t = s.pair_atomic_type(1, 1).unwrap();
        assert_eq!(t.render(s.signature()), vec!["x=y"]);

        let os = OrderedStructure::identity(Structure::pure_set(3));
        assert_eq!(os.pair_atomic_type(0, 2).unwrap().order, Some(OrderRelation::Less));
        assert_eq!(os.pair_atomic_type(1, 1).unwrap().order, Some(OrderRelation::Equal));

        let e = Structure::graph(2, &[(0, 1)], false).unwrap();
        let facts = e.pair_atomic_type(0, 1).unwrap().render(e.signature());
        assert!(facts.contains(&"E(x,y)".to_string()));
        assert!(!facts.contains(&"E(y,x)".to_string()));
    }

    #[test]
    fn induced() {
        let (sub, remap) = path(3).induced_substructure(&[0, 1].into(), false).unwrap();
        assert_eq!(sub, Structure::graph(2, &[(0, 1)], false).unwrap());
        assert_eq!(remap, vec![0, 1]);
        let (empty, _) = Structure::pure_set(3).induced_substructure(&BTreeSet::new(), false).unwrap();
        assert_eq!(empty.size(), 0);
        let c = cycle(5);
        let (full, _) = c.induced_substructure(&c.elements().collect(), false).unwrap();
        assert_eq!(full, c);

        let sig = Signature::new([("E", 2)], vec!["c".into()]).unwrap();
        let s = Structure::new(sig, 2, vec![vec![]], vec![1]).unwrap();
        assert!(matches!(
            s.induced_substructure(&[0].into(), false),
            Err(StructureError::ConstantOutsideSubset(_))
        ));
        assert!(s.induced_substructure(&[0].into(), true).is_ok());
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new([("E", 2), ("E", 1)], vec![]).is_err());
        assert!(Signature::new([("E", 0)], vec![]).is_err());
        assert!(Signature::new([("E", 2)], vec!["E".into()]).is_err());
    }

    fn arb_structure() -> impl Strategy<Value = Structure> {
        (1usize..=12).prop_flat_map(|n| {
            let pair = (0..n, 0..n);
            let triple = (0..n, 0..n, 0..n);
            (Just(n), prop::collection::vec(pair, 0..20), prop::collection::vec(triple, 0..4)).prop_map(
                |(n, es, ts)| {
                    let sig = Signature::new([("E", 2), ("T", 3)], vec![]).unwrap();
                    let e = es.into_iter().map(|(a, b)| vec![a, b]).collect();
                    let t = ts.into_iter().map(|(a, b, c)| vec![a, b, c]).collect();
                    Structure::new(sig, n, vec![e, t], vec![]).unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn gaifman_symmetric_irreflexive(s in arb_structure()) {
            let g = s.gaifman();
            for a in s.elements() {
                prop_assert!(!g.has_edge(a, a));
                for &b in g.neighbors(a) {
                    prop_assert!(g.has_edge(b, a));
                }
            }
        }

        #[test]
        fn neighbors_disjoint(s in arb_structure(), mask in any::<u16>()) {
            let b: BTreeSet<_> = s.elements().filter(|&a| mask >> a & 1 == 1).collect();
            let n = s.neighbors_of_set(&b).unwrap();
            prop_assert!(n.is_disjoint(&b));
        }

        #[test]
        fn distance_metric(s in arb_structure()) {
            let n = s.size();
            let d = |a, b| s.distance(a, b).unwrap().unwrap_or(usize::MAX / 4);
            for a in 0..n {
                for b in 0..n {
                    prop_assert_eq!(d(a, b) == 1, s.gaifman().has_edge(a, b));
                    for c in 0..n {
                        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
                    }
                }
            }
        }

        #[test]
        fn diagonal_order_component(s in arb_structure()) {
            let os = OrderedStructure::identity(s.clone());
            for a in s.elements() {
                prop_assert_eq!(os.pair_atomic_type(a, a).unwrap().order, Some(OrderRelation::Equal));
            }
        }
    }
}
