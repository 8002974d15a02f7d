//! Balls, pointed neighborhoods, their isomorphism types, and ordered
//! environment types.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::canon;
use crate::structure::{Element, OrderedStructure, Structure, StructureError};

pub const DEFAULT_CANONICAL_BOUND: usize = 24;
pub const DEFAULT_ENVIRONMENT_CAP: usize = 5040;

const ENVIRONMENT_VERSION: u8 = 2;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NeighborhoodError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("neighborhood has {size} elements, canonicalization bound is {bound}")]
    BoundExceeded { size: usize, bound: usize },
    #[error("{count} environment types exceed the cap of {cap}")]
    CapExceeded { count: u128, cap: usize },
    #[error("census radii differ: {0} vs {1}")]
    RadiusMismatch(usize, usize),
}

/// Opaque canonical byte string; equal iff the encoded objects are isomorphic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate(Arc<[u8]>);

impl Certificate {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, hex::FromHexError> {
        Ok(Certificate(hex::decode(s)?.into()))
    }
}

impl fmt::Debug for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Certificate({})", self.to_hex())
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Certificate::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// Isomorphism type of a pointed structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NeighborhoodType {
    pub certificate: Certificate,
    pub size: usize,
}

/// Isomorphism type of an ordered pointed structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EnvironmentType {
    pub certificate: Certificate,
    pub size: usize,
}

/// A structure with a distinguished center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointedStructure {
    pub carrier: Structure,
    pub center: Element,
}

/// An ordered structure with a distinguished center.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderedPointedStructure {
    pub carrier: OrderedStructure,
    pub center: Element,
}

impl OrderedPointedStructure {
    pub fn forget_order(&self) -> PointedStructure {
        PointedStructure { carrier: self.carrier.base().clone(), center: self.center }
    }
}

/// Elements at Gaifman distance at most `k` from `a`.
pub fn ball(s: &Structure, a: Element, k: usize) -> Result<BTreeSet<Element>, StructureError> {
    s.check_element(a)?;
    Ok(s.bfs_within(&[a], k).into_iter().map(|(b, _)| b).collect())
}

/// The substructure induced on the `k`-ball of `a`, pointed at `a`.
/// Constants are dropped; the center takes their place.
pub fn neighborhood(s: &Structure, a: Element, k: usize) -> Result<PointedStructure, StructureError> {
    let b = ball(s, a, k)?;
    let (carrier, remap) = s.induced_substructure(&b, true)?;
    let center = remap.binary_search(&a).expect("center lies in its ball");
    Ok(PointedStructure { carrier, center })
}

pub fn canonical_type(p: &PointedStructure) -> Result<NeighborhoodType, NeighborhoodError> {
    canonical_type_bounded(p, DEFAULT_CANONICAL_BOUND)
}

pub fn canonical_type_bounded(p: &PointedStructure, bound: usize) -> Result<NeighborhoodType, NeighborhoodError> {
    Ok(canonical_labeling(p, bound)?.0)
}

/// The type together with a labeling `labels[a]` that carries `p` onto the
/// canonical representative of its class.
pub fn canonical_labeling(
    p: &PointedStructure,
    bound: usize,
) -> Result<(NeighborhoodType, Vec<Element>), NeighborhoodError> {
    let size = p.carrier.size();
    if size > bound {
        return Err(NeighborhoodError::BoundExceeded { size, bound });
    }
    p.carrier.check_element(p.center)?;
    let (code, labels) = canon::canonical_labeling(&p.carrier, p.center);
    Ok((NeighborhoodType { certificate: Certificate(code.into()), size }, labels))
}

/// A center-preserving isomorphism from `p` to `q`, if any.
pub fn pointed_isomorphism(p: &PointedStructure, q: &PointedStructure) -> Option<Vec<Element>> {
    canon::isomorphism(&p.carrier, &q.carrier, &[p.center], &[q.center])
}

/// The `k`-type of every element.
pub fn type_map(s: &Structure, k: usize) -> Result<Vec<NeighborhoodType>, NeighborhoodError> {
    // Balls with equal encodings under their breadth-first labeling are
    // isomorphic through it, so only the first of them is canonicalized.
    let mut seen: HashMap<Vec<u8>, NeighborhoodType> = HashMap::new();
    s.elements()
        .map(|a| {
            let key = bfs_key(s, a, k);
            if let Some(t) = seen.get(&key) {
                return Ok(t.clone());
            }
            let t = canonical_type(&neighborhood(s, a, k)?)?;
            seen.insert(key, t.clone());
            Ok(t)
        })
        .collect()
}

/// The ball of `a` encoded with elements numbered in breadth-first order.
fn bfs_key(s: &Structure, a: Element, k: usize) -> Vec<u8> {
    let order: Vec<Element> = s.bfs_within(&[a], k).into_iter().map(|(b, _)| b).collect();
    let local: HashMap<Element, usize> = order.iter().enumerate().map(|(i, &b)| (b, i)).collect();
    let mut out = Vec::new();
    canon::write_varint(&mut out, order.len());
    for ri in 0..s.signature().relations().len() {
        let mut ts: Vec<Vec<usize>> = Vec::new();
        for &g in &order {
            s.for_each_incident_tuple(ri, g, |t| {
                // Each tuple is reported once, from its first entry.
                if t[0] == g {
                    if let Some(lt) = t.iter().map(|e| local.get(e).copied()).collect::<Option<Vec<_>>>() {
                        ts.push(lt);
                    }
                }
            });
        }
        ts.sort_unstable();
        ts.dedup();
        canon::write_varint(&mut out, ts.len());
        for e in ts.into_iter().flatten() {
            canon::write_varint(&mut out, e);
        }
    }
    out
}

/// Occurrence counts of `k`-neighborhood types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCensus {
    pub k: usize,
    pub counts: BTreeMap<NeighborhoodType, usize>,
}

impl TypeCensus {
    pub fn from_types(k: usize, types: &[NeighborhoodType]) -> Self {
        let mut counts = BTreeMap::new();
        for t in types {
            *counts.entry(t.clone()).or_insert(0) += 1;
        }
        TypeCensus { k, counts }
    }

    pub fn count(&self, t: &NeighborhoodType) -> usize {
        self.counts.get(t).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct CensusEntry {
    certificate: Certificate,
    count: usize,
    ball_size: usize,
}

#[derive(Serialize, Deserialize)]
struct CensusJson {
    k: usize,
    types: Vec<CensusEntry>,
}

impl Serialize for TypeCensus {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let types = self
            .counts
            .iter()
            .map(|(t, &count)| CensusEntry { certificate: t.certificate.clone(), count, ball_size: t.size })
            .collect();
        CensusJson { k: self.k, types }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TypeCensus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = CensusJson::deserialize(d)?;
        let counts = j
            .types
            .into_iter()
            .map(|e| (NeighborhoodType { certificate: e.certificate, size: e.ball_size }, e.count))
            .collect();
        Ok(TypeCensus { k: j.k, counts })
    }
}

pub fn census(s: &Structure, k: usize) -> Result<TypeCensus, NeighborhoodError> {
    Ok(TypeCensus::from_types(k, &type_map(s, k)?))
}

/// For every type, the counts are equal or both at least `t`.
pub fn threshold_equivalent(c0: &TypeCensus, c1: &TypeCensus, t: usize) -> Result<bool, NeighborhoodError> {
    if c0.k != c1.k {
        return Err(NeighborhoodError::RadiusMismatch(c0.k, c1.k));
    }
    let keys: BTreeSet<&NeighborhoodType> = c0.counts.keys().chain(c1.counts.keys()).collect();
    Ok(keys.into_iter().all(|ty| {
        let (a, b) = (c0.count(ty), c1.count(ty));
        a == b || (a >= t && b >= t)
    }))
}

/// The `k`-ball of `a` (by Gaifman distance) with the inherited order.
pub fn environment(os: &OrderedStructure, a: Element, k: usize) -> Result<OrderedPointedStructure, StructureError> {
    let p = neighborhood(os.base(), a, k)?;
    let b = ball(os.base(), a, k)?;
    let mut by_position: Vec<(usize, Element)> = b.iter().enumerate().map(|(i, &g)| (os.position(g), i)).collect();
    by_position.sort_unstable();
    let sequence = by_position.into_iter().map(|(_, i)| i).collect();
    Ok(OrderedPointedStructure { carrier: OrderedStructure::from_sequence(p.carrier, sequence)?, center: p.center })
}

/// Ordered structures are rigid, so labeling by rank is canonical.
pub fn environment_type(ep: &OrderedPointedStructure) -> EnvironmentType {
    let code = canon::encode(ep.carrier.base(), ep.carrier.positions(), ENVIRONMENT_VERSION, ep.center);
    EnvironmentType { certificate: Certificate(code.into()), size: ep.carrier.base().size() }
}

/// An environment type with an ordering of the input realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentClass {
    pub ty: EnvironmentType,
    pub representative: OrderedPointedStructure,
}

fn factorial(n: usize) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, i| acc.checked_mul(i))
}

/// Number of environment types over `p`: `|p|! / |Aut(p)|`.
pub fn environment_type_count(p: &PointedStructure) -> Option<u128> {
    let aut = canon::automorphism_count(&p.carrier, p.center);
    factorial(p.carrier.size()).map(|f| f / aut)
}

/// All linear orderings of `p` up to center- and order-preserving
/// isomorphism, listed in a canonical order.
pub fn enumerate_environment_types(
    p: &PointedStructure,
    cap: usize,
) -> Result<Vec<EnvironmentClass>, NeighborhoodError> {
    let (_, labels) = canonical_labeling(p, DEFAULT_CANONICAL_BOUND.max(p.carrier.size()))?;
    let canonical = p.carrier.relabel(&labels)?;
    let center = labels[p.center];
    let n = canonical.size();
    let aut = canon::automorphism_count(&canonical, center);
    let total = match factorial(n) {
        Some(f) => f / aut,
        None => return Err(NeighborhoodError::CapExceeded { count: u128::MAX, cap }),
    };
    if total > cap as u128 {
        return Err(NeighborhoodError::CapExceeded { count: total, cap });
    }
    let mut unlabel = vec![0; n];
    for (a, &l) in labels.iter().enumerate() {
        unlabel[l] = a;
    }
    // Swapping twins is an automorphism, so only orderings listing each
    // twin class in ascending order need to be visited.
    let mut predecessor: Vec<Option<Element>> = vec![None; n];
    for class in canon::twin_classes(&canonical) {
        let class: Vec<Element> = class.into_iter().filter(|&v| v != center).collect();
        for w in class.windows(2) {
            predecessor[w[1]] = Some(w[0]);
        }
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut seq = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut visit = |seq: &[Element]| -> Result<bool, NeighborhoodError> {
        let original: Vec<Element> = seq.iter().map(|&l| unlabel[l]).collect();
        let ordered = OrderedStructure::from_sequence(p.carrier.clone(), original)?;
        let ep = OrderedPointedStructure { carrier: ordered, center: p.center };
        let ty = environment_type(&ep);
        if seen.insert(ty.clone()) {
            out.push(EnvironmentClass { ty, representative: ep });
        }
        Ok(out.len() as u128 == total)
    };
    orderings(&mut seq, &mut used, &predecessor, &mut visit)?;
    Ok(out)
}

fn orderings(
    seq: &mut Vec<Element>,
    used: &mut [bool],
    predecessor: &[Option<Element>],
    visit: &mut impl FnMut(&[Element]) -> Result<bool, NeighborhoodError>,
) -> Result<bool, NeighborhoodError> {
    if seq.len() == used.len() {
        return visit(seq);
    }
    for v in 0..used.len() {
        if used[v] || predecessor[v].is_some_and(|u| !used[u]) {
            continue;
        }
        used[v] = true;
        seq.push(v);
        let done = orderings(seq, used, predecessor, visit)?;
        seq.pop();
        used[v] = false;
        if done {
            return Ok(true);
        }
    }
    Ok(false)
}
