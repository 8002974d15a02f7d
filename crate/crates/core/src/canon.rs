//! Canonical labeling and isomorphism search for small structures by
//! individualization and refinement.

use std::collections::{BTreeSet, HashMap};

use crate::structure::{Element, FactSet, Structure};

/// Per-element data used by refinement.
struct Prepared<'a> {
    s: &'a Structure,
    unary: Vec<FactSet>,
    /// Neighbors with the facts of the pair `(v, u)`.
    nbrs: Vec<Vec<(Element, FactSet)>>,
}

impl<'a> Prepared<'a> {
    fn new(s: &'a Structure) -> Self {
        let unary = s.elements().map(|a| s.sigma_facts(a, a)).collect();
        let nbrs = s.elements().map(|a| s.neighbors(a).iter().map(|&b| (b, s.sigma_facts(a, b))).collect()).collect();
        Prepared { s, unary, nbrs }
    }
}

type Key = (u32, Vec<(u32, u32)>);

/// Refines the colorings of several structures jointly, so colors are
/// comparable across them. Element `ind[i]` starts in a singleton class
/// labelled by `i`.
fn refine(parts: &[(&Prepared, &[Element])]) -> Vec<Vec<u32>> {
    let facts: BTreeSet<&FactSet> =
        parts.iter().flat_map(|(p, _)| p.unary.iter().chain(p.nbrs.iter().flatten().map(|(_, f)| f))).collect();
    let fact_id: HashMap<&FactSet, u32> = facts.into_iter().enumerate().map(|(i, f)| (f, i as u32)).collect();

    let initial: Vec<Vec<(usize, u32, usize)>> = parts
        .iter()
        .map(|(p, ind)| {
            (0..p.s.size())
                .map(|v| {
                    let pos = ind.iter().position(|&w| w == v).unwrap_or(usize::MAX);
                    (pos, fact_id[&p.unary[v]], p.nbrs[v].len())
                })
                .collect()
        })
        .collect();
    let (mut colors, mut classes) = rank(&initial);
    loop {
        let keys: Vec<Vec<Key>> = parts
            .iter()
            .zip(&colors)
            .map(|((p, _), col)| {
                (0..p.s.size())
                    .map(|v| {
                        let mut sig: Vec<(u32, u32)> = p.nbrs[v].iter().map(|(u, f)| (col[*u], fact_id[f])).collect();
                        sig.sort_unstable();
                        (col[v], sig)
                    })
                    .collect()
            })
            .collect();
        let (next, count) = rank(&keys);
        colors = next;
        if count == classes {
            return colors;
        }
        classes = count;
    }
}

fn rank<K: Ord + Clone>(keys: &[Vec<K>]) -> (Vec<Vec<u32>>, usize) {
    let distinct: BTreeSet<&K> = keys.iter().flatten().collect();
    let ids: Vec<&K> = distinct.into_iter().collect();
    let colors = keys
        .iter()
        .map(|ks| ks.iter().map(|k| ids.binary_search(&k).unwrap() as u32).collect())
        .collect();
    (colors, ids.len())
}

/// The smallest color with at least two members, and those members.
fn target_cell(colors: &[u32]) -> Option<Vec<Element>> {
    let mut counts = vec![0usize; colors.len()];
    for &c in colors {
        counts[c as usize] += 1;
    }
    let c = counts.iter().position(|&n| n > 1)? as u32;
    Some((0..colors.len()).filter(|&v| colors[v] == c).collect())
}

/// Whether swapping `u` and `v` is an automorphism.
fn twins(s: &Structure, u: Element, v: Element) -> bool {
    let swap = |e: Element| {
        if e == u {
            v
        } else if e == v {
            u
        } else {
            e
        }
    };
    let mut ok = true;
    let mut buf = Vec::new();
    for ri in 0..s.signature().relations().len() {
        for a in [u, v] {
            s.for_each_incident_tuple(ri, a, |t| {
                if ok {
                    buf.clear();
                    buf.extend(t.iter().map(|&e| swap(e)));
                    ok = s.holds(ri, &buf);
                }
            });
        }
    }
    ok
}

pub(crate) fn write_varint(out: &mut Vec<u8>, mut n: usize) {
    loop {
        let byte = (n & 0x7f) as u8;
        n >>= 7;
        if n == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Encodes `s` relabelled by `labels`, with the given version byte and
/// distinguished element.
pub(crate) fn encode(s: &Structure, labels: &[Element], version: u8, center: Element) -> Vec<u8> {
    let mut out = vec![version];
    write_varint(&mut out, s.size());
    write_varint(&mut out, labels[center]);
    for ri in 0..s.signature().relations().len() {
        let mut ts: Vec<Vec<Element>> = s.tuples(ri).iter().map(|t| t.iter().map(|&e| labels[e]).collect()).collect();
        ts.sort_unstable();
        write_varint(&mut out, ts.len());
        for t in ts {
            for e in t {
                write_varint(&mut out, e);
            }
        }
    }
    out
}

pub(crate) const NEIGHBORHOOD_VERSION: u8 = 1;

/// Canonical encoding of `(s, center)` and the labeling attaining it.
pub(crate) fn canonical_labeling(s: &Structure, center: Element) -> (Vec<u8>, Vec<Element>) {
    let p = Prepared::new(s);
    let mut best = None;
    search(&p, &mut vec![center], center, &mut best);
    best.expect("search visits at least one leaf")
}

fn search(p: &Prepared, ind: &mut Vec<Element>, center: Element, best: &mut Option<(Vec<u8>, Vec<Element>)>) {
    let colors = refine(&[(p, ind)]).pop().unwrap();
    let Some(cell) = target_cell(&colors) else {
        let labels: Vec<Element> = colors.iter().map(|&c| c as Element).collect();
        let code = encode(p.s, &labels, NEIGHBORHOOD_VERSION, center);
        if best.as_ref().is_none_or(|(b, _)| code < *b) {
            *best = Some((code, labels));
        }
        return;
    };
    let mut explored: Vec<Element> = Vec::new();
    for &v in &cell {
        // A transposition automorphism maps the subtree below `u` onto the one below `v`.
        if explored.iter().any(|&u| twins(p.s, u, v)) {
            continue;
        }
        ind.push(v);
        search(p, ind, center, best);
        ind.pop();
        explored.push(v);
    }
}

/// An isomorphism from `a` to `b` mapping `ia[i]` to `ib[i]`, as a table
/// indexed by elements of `a`.
pub(crate) fn isomorphism(a: &Structure, b: &Structure, ia: &[Element], ib: &[Element]) -> Option<Vec<Element>> {
    if a.size() != b.size() || a.signature() != b.signature() || ia.len() != ib.len() {
        return None;
    }
    if (0..a.signature().relations().len()).any(|ri| a.tuples(ri).len() != b.tuples(ri).len()) {
        return None;
    }
    let (pa, pb) = (Prepared::new(a), Prepared::new(b));
    iso_search(&pa, &pb, &mut ia.to_vec(), &mut ib.to_vec())
}

fn iso_search(a: &Prepared, b: &Prepared, ia: &mut Vec<Element>, ib: &mut Vec<Element>) -> Option<Vec<Element>> {
    let mut cols = refine(&[(a, ia), (b, ib)]);
    let cb = cols.pop().unwrap();
    let ca = cols.pop().unwrap();
    let (mut sa, mut sb) = (ca.clone(), cb.clone());
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }
    let Some(cell) = target_cell(&ca) else {
        let mut by_color = vec![0; cb.len()];
        for (u, &c) in cb.iter().enumerate() {
            by_color[c as usize] = u;
        }
        let map: Vec<Element> = ca.iter().map(|&c| by_color[c as usize]).collect();
        return preserves(a.s, b.s, &map).then_some(map);
    };
    let v = cell[0];
    let color = ca[v];
    for u in (0..cb.len()).filter(|&u| cb[u] == color) {
        ia.push(v);
        ib.push(u);
        let found = iso_search(a, b, ia, ib);
        ia.pop();
        ib.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Whether the bijection `map` carries every tuple of `a` into `b`; with
/// equal tuple counts this makes it an isomorphism.
fn preserves(a: &Structure, b: &Structure, map: &[Element]) -> bool {
    let mut buf = Vec::new();
    (0..a.signature().relations().len()).all(|ri| {
        a.tuples(ri).iter().all(|t| {
            buf.clear();
            buf.extend(t.iter().map(|&e| map[e]));
            b.holds(ri, &buf)
        })
    })
}

/// Size of the group of automorphisms fixing `center`, by the
/// orbit-stabilizer theorem along a chain of individualized points.
pub(crate) fn automorphism_count(s: &Structure, center: Element) -> u128 {
    let p = Prepared::new(s);
    let mut fixed = vec![center];
    let mut total: u128 = 1;
    loop {
        let colors = refine(&[(&p, &fixed)]).pop().unwrap();
        let Some(cell) = target_cell(&colors) else { return total };
        let v = cell[0];
        let mut orbit = 1;
        for &u in &cell[1..] {
            let mut ia = fixed.clone();
            ia.push(v);
            let mut ib = fixed.clone();
            ib.push(u);
            if twins(s, u, v) || iso_search(&p, &p, &mut ia, &mut ib).is_some() {
                orbit += 1;
            }
        }
        total *= orbit;
        fixed.push(v);
    }
}

/// Transposition-automorphism classes, each sorted; used to skip orderings
/// that differ only by swapping interchangeable elements.
pub(crate) fn twin_classes(s: &Structure) -> Vec<Vec<Element>> {
    let mut classes: Vec<Vec<Element>> = Vec::new();
    for v in s.elements() {
        let found = classes.iter().position(|c| twins(s, c[0], v));
        match found {
            Some(i) => classes[i].push(v),
            None => classes.push(vec![v]),
        }
    }
    classes
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_iso(a: &Structure, b: &Structure, ca: Element, cb: Element) -> bool {
        let counts_match = a.size() == b.size()
            && (0..a.signature().relations().len()).all(|ri| a.tuples(ri).len() == b.tuples(ri).len());
        let mut found = false;
        if counts_match {
            for_each_perm(a.size(), &mut |p| found |= p[ca] == cb && preserves(a, b, p));
        }
        found
    }

    fn for_each_perm(n: usize, f: &mut impl FnMut(&[Element])) {
        let mut p: Vec<Element> = (0..n).collect();
        loop {
            f(&p);
            let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return };
            let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
            p.swap(i - 1, j);
            p[i..].reverse();
        }
    }

    #[test]
    fn star_automorphisms() {
        let star = Structure::graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], true).unwrap();
        assert_eq!(automorphism_count(&star, 0), 120);
        assert_eq!(automorphism_count(&star, 1), 24);
        let c6 = Structure::graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], true).unwrap();
        assert_eq!(automorphism_count(&c6, 0), 2);
    }

    #[test]
    fn labeling_matches_brute_force() {
        let path = Structure::graph(4, &[(0, 1), (1, 2), (2, 3)], true).unwrap();
        let (c1, _) = canonical_labeling(&path, 1);
        let (c2, _) = canonical_labeling(&path, 2);
        let (c0, _) = canonical_labeling(&path, 0);
        assert_eq!(c1, c2);
        assert_ne!(c0, c1);
        assert!(brute_force_iso(&path, &path, 1, 2));
        assert!(!brute_force_iso(&path, &path, 0, 1));
    }
}
