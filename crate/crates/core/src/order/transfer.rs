use std::collections::{BTreeSet, HashMap};

use super::{OrderError, Pin, SegmentDecomposition, TransferMap};
use crate::neighborhood::{canonical_type, neighborhood, NeighborhoodType};
use crate::structure::{Element, OrderedStructure, Structure};

/// Node budget of the embedding search.
pub const DEFAULT_TRANSFER_BUDGET: usize = 5_000_000;

struct Search<'a> {
    s0: &'a Structure,
    s1: &'a Structure,
    k: usize,
    forward: Vec<Option<Element>>,
    backward: Vec<Option<Element>>,
    types0: HashMap<Element, NeighborhoodType>,
    types1: HashMap<Element, NeighborhoodType>,
}

impl Search<'_> {
    fn type1(&mut self, c: Element) -> Result<NeighborhoodType, OrderError> {
        if let Some(t) = self.types1.get(&c) {
            return Ok(t.clone());
        }
        let t = canonical_type(&neighborhood(self.s1, c, self.k)?)?;
        self.types1.insert(c, t.clone());
        Ok(t)
    }

    /// Whether mapping `v ↦ c` keeps the partial map an isomorphism between
    /// the induced substructures on its domain and image.
    fn consistent(&self, v: Element, c: Element) -> bool {
        let sig = self.s0.signature();
        let mut ok = true;
        let mut buf = Vec::new();
        for ri in 0..sig.relations().len() {
            self.s0.for_each_incident_tuple(ri, v, |t| {
                if !ok {
                    return;
                }
                buf.clear();
                for &e in t {
                    match if e == v { Some(c) } else { self.forward[e] } {
                        Some(x) => buf.push(x),
                        None => return,
                    }
                }
                ok = self.s1.holds(ri, &buf);
            });
            self.s1.for_each_incident_tuple(ri, c, |t| {
                if !ok {
                    return;
                }
                buf.clear();
                for &e in t {
                    match if e == c { Some(v) } else { self.backward[e] } {
                        Some(x) => buf.push(x),
                        None => return,
                    }
                }
                ok = self.s0.holds(ri, &buf);
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Vertices of the region in BFS order per component, with BFS parents.
fn search_order(s: &Structure, region: &BTreeSet<Element>) -> Vec<(Element, Option<Element>)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(region.len());
    for &root in region {
        if !seen.insert(root) {
            continue;
        }
        let start = out.len();
        out.push((root, None));
        let mut i = start;
        while i < out.len() {
            let (v, _) = out[i];
            for &u in s.neighbors(v) {
                if region.contains(&u) && seen.insert(u) {
                    out.push((u, Some(v)));
                }
            }
            i += 1;
        }
    }
    out
}

/// Embeds the substructure on `Segment^{2k} ∪ 𝒩(Segment^{2k})` of `s0`
/// into `s1` and returns its restriction to `Segment^{2k}`. Elements of
/// `Segment^{2k}` keep their degree and elements of `Segment^k` keep their
/// `k`-type, so neighborhoods carry over exactly.
pub fn find_transfer(
    s0: &Structure,
    dec: &SegmentDecomposition,
    s1: &Structure,
    budget: usize,
) -> Result<TransferMap, OrderError> {
    let k = dec.k;
    let seg2k: Vec<Element> = dec.segment_up_to(2 * k);
    let mut region: BTreeSet<Element> = seg2k.iter().copied().collect();
    for &a in &seg2k {
        region.extend(s0.neighbors(a).iter().copied());
    }
    if s0.signature() != s1.signature() {
        return Err(OrderError::NoEmbedding("signatures differ".into()));
    }
    if region.len() > s1.size() {
        return Err(OrderError::NoEmbedding(format!(
            "the segment region has {} elements, the second structure only {}",
            region.len(),
            s1.size()
        )));
    }
    let order = search_order(s0, &region);
    let mut types0 = HashMap::new();
    for &a in &seg2k {
        if dec.in_segment(a, k) {
            types0.insert(a, canonical_type(&neighborhood(s0, a, k)?)?);
        }
    }
    let mut st = Search {
        s0,
        s1,
        k,
        forward: vec![None; s0.size()],
        backward: vec![None; s1.size()],
        types0,
        types1: HashMap::new(),
    };
    // Per level, the candidates (`None`: every element) and the index of
    // the next one to try.
    let mut frames: Vec<(Option<Vec<Element>>, usize)> = Vec::with_capacity(order.len());
    let mut nodes = 0usize;
    let candidates = |st: &Search, i: usize| -> Option<Vec<Element>> {
        order[i].1.map(|p| {
            let fp = st.forward[p].expect("parent mapped first");
            s1.neighbors(fp).to_vec()
        })
    };
    if !order.is_empty() {
        frames.push((candidates(&st, 0), 0));
    }
    while !frames.is_empty() {
        let i = frames.len() - 1;
        let (cands, next) = &mut frames[i];
        let v = order[i].0;
        if let Some(prev) = st.forward[v].take() {
            st.backward[prev] = None;
        }
        let len = cands.as_ref().map_or(s1.size(), Vec::len);
        let mut chosen = None;
        while *next < len {
            let c = cands.as_ref().map_or(*next, |cs| cs[*next]);
            *next += 1;
            if st.backward[c].is_some() {
                continue;
            }
            nodes += 1;
            if nodes > budget {
                return Err(OrderError::NoEmbedding(format!("embedding search exceeded its budget of {budget} nodes")));
            }
            if dec.in_segment(v, 2 * k) && s1.neighbors(c).len() != s0.neighbors(v).len() {
                continue;
            }
            if !st.consistent(v, c) {
                continue;
            }
            if let Some(t0) = st.types0.get(&v).cloned() {
                if st.type1(c)? != t0 {
                    continue;
                }
            }
            chosen = Some(c);
            break;
        }
        match chosen {
            Some(c) => {
                st.forward[v] = Some(c);
                st.backward[c] = Some(v);
                if i + 1 == order.len() {
                    let pairs = seg2k.iter().map(|&a| (a, st.forward[a].expect("all mapped")));
                    return Ok(TransferMap::new(pairs));
                }
                frames.push((candidates(&st, i + 1), 0));
            }
            None => {
                frames.pop();
            }
        }
    }
    if order.is_empty() {
        return Ok(TransferMap::new([]));
    }
    Err(OrderError::NoEmbedding(format!(
        "the substructure on the {} elements of the segment region does not embed into the second structure",
        region.len()
    )))
}

/// Carries segments, their orders and the pin table along `rho`; Middle
/// of the second structure is everything else, ascending.
pub fn transfer_decomposition(
    dec: &SegmentDecomposition,
    rho: &TransferMap,
    s1: &Structure,
) -> Result<(SegmentDecomposition, OrderedStructure), OrderError> {
    let map = |xs: &[Element]| -> Result<Vec<Element>, OrderError> {
        xs.iter().map(|&a| rho.apply(a).ok_or(OrderError::NotTotal(a))).collect()
    };
    let map_all = |xss: &[Vec<Element>]| -> Result<Vec<Vec<Element>>, OrderError> { xss.iter().map(|x| map(x)).collect() };
    let rare = map(&dec.rare)?;
    let (nl, ul, ur, nr) = (map_all(&dec.nl)?, map_all(&dec.ul)?, map_all(&dec.ur)?, map_all(&dec.nr)?);
    let mut used = vec![false; s1.size()];
    for &b in rare.iter().chain(nl.iter().flatten()).chain(ul.iter().flatten()).chain(ur.iter().flatten()).chain(nr.iter().flatten()) {
        if b >= s1.size() || std::mem::replace(&mut used[b], true) {
            return Err(OrderError::NoEmbedding(format!("transfer map is not injective at {b}")));
        }
    }
    let middle = (0..s1.size()).filter(|&b| !used[b]).collect();
    let pins = dec
        .pins
        .iter()
        .map(|p| Ok(Pin { element: rho.apply(p.element).ok_or(OrderError::NotTotal(p.element))?, ..p.clone() }))
        .collect::<Result<_, OrderError>>()?;
    let out = SegmentDecomposition::new(dec.k, s1.size(), rare, nl, ul, middle, ur, nr, pins);
    let order = OrderedStructure::from_sequence(s1.clone(), out.sequence())?;
    Ok((out, order))
}
