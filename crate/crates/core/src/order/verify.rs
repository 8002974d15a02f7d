use serde::Serialize;

use super::{OrderPair, SegmentDecomposition};
use crate::neighborhood::{ball, environment, environment_type};
use crate::structure::{Element, OrderedStructure};

/// Outcome of a lemma check; `counterexample` holds the offending element
/// or pair of the first structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub holds: bool,
    pub checked: usize,
    pub counterexample: Option<Vec<Element>>,
}

impl LemmaReport {
    fn ok(checked: usize) -> Self {
        LemmaReport { holds: true, checked, counterexample: None }
    }

    fn fail(checked: usize, witness: Vec<Element>) -> Self {
        LemmaReport { holds: false, checked, counterexample: Some(witness) }
    }
}

/// Every `a ∈ Segment^k` has the same environment type as `ρ(a)`.
pub fn verify_lemma_envpres(op: &OrderPair) -> LemmaReport {
    let dec = &op.decompositions[0];
    let k = dec.k;
    let seg = dec.segment_up_to(k);
    for (i, &a) in seg.iter().enumerate() {
        let Some(b) = op.transfer.apply(a) else { return LemmaReport::fail(i, vec![a]) };
        let (e0, e1) = (environment(&op.ordered[0], a, k), environment(&op.ordered[1], b, k));
        match (e0, e1) {
            (Ok(e0), Ok(e1)) if environment_type(&e0) == environment_type(&e1) => {}
            _ => return LemmaReport::fail(i + 1, vec![a]),
        }
    }
    LemmaReport::ok(seg.len())
}

/// Every pair in `Segment^k` has the same atomic type (with order) as its
/// image under `ρ`.
pub fn verify_lemma_tppres(op: &OrderPair) -> LemmaReport {
    let dec = &op.decompositions[0];
    let seg = dec.segment_up_to(dec.k);
    let mut checked = 0;
    let images: Vec<Option<Element>> = seg.iter().map(|&a| op.transfer.apply(a)).collect();
    for (i, &a) in seg.iter().enumerate() {
        let Some(fa) = images[i] else { return LemmaReport::fail(checked, vec![a]) };
        for (j, &b) in seg.iter().enumerate() {
            let Some(fb) = images[j] else { return LemmaReport::fail(checked, vec![b]) };
            checked += 1;
            let t0 = op.ordered[0].pair_atomic_type(a, b);
            let t1 = op.ordered[1].pair_atomic_type(fa, fb);
            if t0.is_err() || t0 != t1 {
                return LemmaReport::fail(checked, vec![a, b]);
            }
        }
    }
    LemmaReport::ok(checked)
}

/// Structural invariants of a decomposition with its order: the segments
/// partition the domain in concatenation order, neighbors of `Segment^r`
/// lie in `Segment^{r+1}` for `r < 2k`, `k`-balls of `Segment^k` stay in
/// `Segment^{2k}`, and every pin realizes its environment type.
pub fn check_decomposition(dec: &SegmentDecomposition, order: &OrderedStructure) -> Result<(), String> {
    let s = order.base();
    let k = dec.k;
    if dec.sequence() != order.sequence() {
        return Err("order is not the concatenation of the segments".into());
    }
    let mut seen = vec![false; s.size()];
    for (name, elems) in dec.segments() {
        for &a in elems {
            if a >= s.size() || std::mem::replace(&mut seen[a], true) {
                return Err(format!("element {a} repeated or out of range in {name}"));
            }
        }
    }
    if let Some(a) = seen.iter().position(|x| !x) {
        return Err(format!("element {a} lies in no segment"));
    }
    // 2(2k+1)+2 segments, each L_j and R_j split into two named blocks.
    if dec.segments().len() != 4 * (2 * k + 1) + 2 {
        return Err("wrong number of segments".into());
    }
    if !dec.nr[0].is_empty() || (k + 1..=2 * k).any(|j| !dec.ul[j].is_empty() || !dec.ur[j].is_empty()) {
        return Err("segments that must be empty are not".into());
    }
    for a in s.elements() {
        if let Some(r) = dec.level(a).filter(|&r| r < 2 * k) {
            if let Some(&b) = s.neighbors(a).iter().find(|&&b| !dec.in_segment(b, r + 1)) {
                return Err(format!("neighbor {b} of {a} in Segment^{r} lies outside Segment^{}", r + 1));
            }
        }
        if dec.in_segment(a, k) {
            let b = ball(s, a, k).map_err(|e| e.to_string())?;
            if let Some(&c) = b.iter().find(|&&c| !dec.in_segment(c, 2 * k)) {
                return Err(format!("{c} in the {k}-ball of {a} lies outside Segment^{}", 2 * k));
            }
        }
    }
    for p in &dec.pins {
        let e = environment(order, p.element, k).map_err(|e| e.to_string())?;
        if environment_type(&e) != p.environment {
            return Err(format!("pin {} does not realize its environment type", p.element));
        }
        if !dec.universal(p.side, p.slot).contains(&p.element) {
            return Err(format!("pin {} is not in its universal segment", p.element));
        }
    }
    Ok(())
}

/// Pins lie pairwise further apart than [`pin_separation`](super::pin_separation)
/// and away from the rare region. Holds for the constructed side only; the
/// transfer preserves the segment region, not distances inside the rest.
pub fn check_pin_separation(dec: &SegmentDecomposition, s: &crate::structure::Structure) -> Result<(), String> {
    let k = dec.k;
    let sep = super::pin_separation(k);
    let pinned: std::collections::HashSet<Element> = dec.pins.iter().map(|p| p.element).collect();
    let rare: std::collections::HashSet<Element> = dec.rare.iter().copied().collect();
    for p in &dec.pins {
        for (b, dist) in s.bfs_within(&[p.element], sep) {
            if b != p.element && pinned.contains(&b) {
                return Err(format!("pins {} and {b} are at distance {dist}", p.element));
            }
            if dist + k <= sep && rare.contains(&b) {
                return Err(format!("pin {} is too close to the rare region", p.element));
            }
        }
    }
    Ok(())
}
