//! Rare/frequent marking of neighborhood types and scattered selection of
//! representatives.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::neighborhood::{census, NeighborhoodError, NeighborhoodType, TypeCensus};
use crate::structure::{Element, Structure, StructureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrequencyError {
    #[error("scatter bound overflows for m={m}, delta={delta}, s={s}, n={n}, d={d}")]
    Overflow { m: usize, delta: usize, s: usize, n: usize, d: usize },
    #[error("{max_ball}! overflows when computing m; try a smaller k")]
    FactorialOverflow { max_ball: usize },
    #[error("set {set} exhausted after choosing {chosen} of {needed} elements (size {size}, bound {bound})")]
    SetExhausted { set: usize, chosen: usize, needed: usize, size: usize, bound: usize },
    #[error("structure has degree {found}, parameters assume at most {bound}")]
    DegreeExceeded { found: usize, bound: usize },
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
    #[error(transparent)]
    Structure(#[from] StructureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub delta: usize,
    #[serde(rename = "M")]
    pub max_ball: usize,
    pub c2_multiplier: usize,
}

/// Size bound `Σ_{i≤δ} d^i` of a radius-`δ` ball in a degree-`d` graph.
fn ball_bound(delta: usize, d: usize) -> Option<usize> {
    let mut total: usize = 0;
    let mut power: usize = 1;
    for i in 0..=delta {
        total = total.checked_add(power)?;
        if i < delta {
            power = power.checked_mul(d)?;
        }
    }
    Some(total)
}

/// `(s + n·m)·β(δ) + 1`: enough candidates for greedy selection of `m`
/// elements in each of `n` sets, pairwise more than `δ` apart and more than
/// `δ` from a forbidden set of size `s`.
pub fn scatter_bound(m: usize, delta: usize, s: usize, n: usize, d: usize) -> Result<usize, FrequencyError> {
    if m == 0 {
        return Ok(1);
    }
    let overflow = || FrequencyError::Overflow { m, delta, s, n, d };
    let beta = ball_bound(delta, d).ok_or_else(overflow)?;
    n.checked_mul(m)
        .and_then(|nm| nm.checked_add(s))
        .and_then(|x| x.checked_mul(beta))
        .and_then(|x| x.checked_add(1))
        .ok_or_else(overflow)
}

fn factorial(n: usize) -> Option<usize> {
    (1..=n).try_fold(1usize, |acc, i| acc.checked_mul(i))
}

/// `m = c·2(k+1)·M!` and `δ = 4k`, where `M` is the largest ball in the
/// census and `c` is `k` in counting mode, 1 otherwise.
pub fn default_parameters(k: usize, d: usize, census: &TypeCensus, c2: bool) -> Result<Parameters, FrequencyError> {
    let max_ball = census.counts.keys().map(|t| t.size).max().unwrap_or(1);
    let c2_multiplier = if c2 { k.max(1) } else { 1 };
    let m = factorial(max_ball)
        .and_then(|f| f.checked_mul(2 * (k + 1)))
        .and_then(|x| x.checked_mul(c2_multiplier))
        .ok_or(FrequencyError::FactorialOverflow { max_ball })?;
    Ok(Parameters { k, d, m, delta: 4 * k, max_ball, c2_multiplier })
}

/// For each requested set, `m` chosen elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScatterSelection {
    pub chosen: Vec<Vec<Element>>,
}

/// Greedy selection by ascending id: each chosen or forbidden element rules
/// out its `δ`-ball.
pub fn select_scattered(
    s: &Structure,
    sets: &[Vec<Element>],
    forbidden: &[Element],
    m: usize,
    delta: usize,
) -> Result<ScatterSelection, FrequencyError> {
    let demands: Vec<(&[Element], usize)> = sets.iter().map(|set| (set.as_slice(), m)).collect();
    select_scattered_counts(s, &demands, forbidden, delta)
}

/// As [`select_scattered`], with a separate demand for each set.
pub fn select_scattered_counts(
    s: &Structure,
    sets: &[(&[Element], usize)],
    forbidden: &[Element],
    delta: usize,
) -> Result<ScatterSelection, FrequencyError> {
    for &b in forbidden {
        s.check_element(b)?;
    }
    let mut blocked = vec![false; s.size()];
    for (b, _) in s.bfs_within(forbidden, delta) {
        blocked[b] = true;
    }
    let mut chosen = Vec::with_capacity(sets.len());
    for (j, &(set, m)) in sets.iter().enumerate() {
        let mut candidates = set.to_vec();
        candidates.sort_unstable();
        candidates.dedup();
        let mut picked = Vec::with_capacity(m);
        for &c in &candidates {
            if picked.len() == m {
                break;
            }
            s.check_element(c)?;
            if blocked[c] {
                continue;
            }
            picked.push(c);
            for (b, _) in s.bfs_within(&[c], delta) {
                blocked[b] = true;
            }
        }
        if picked.len() < m {
            let total: usize = sets.iter().map(|x| x.1).sum();
            let bound = scatter_bound(1, delta, forbidden.len(), total, s.degree()).unwrap_or(usize::MAX);
            return Err(FrequencyError::SetExhausted {
                set: j,
                chosen: picked.len(),
                needed: m,
                size: candidates.len(),
                bound,
            });
        }
        chosen.push(picked);
    }
    Ok(ScatterSelection { chosen })
}

fn certificates<S: Serializer>(types: &BTreeSet<NeighborhoodType>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(types.iter().map(|t| t.certificate.to_hex()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyClassification {
    pub t: usize,
    #[serde(serialize_with = "certificates")]
    pub frequent: BTreeSet<NeighborhoodType>,
    #[serde(serialize_with = "certificates")]
    pub rare: BTreeSet<NeighborhoodType>,
    pub rare_occurrence_total: usize,
    pub params: Parameters,
}

pub fn classify(s: &Structure, k: usize, params: &Parameters) -> Result<FrequencyClassification, FrequencyError> {
    if s.degree() > params.d {
        return Err(FrequencyError::DegreeExceeded { found: s.degree(), bound: params.d });
    }
    classify_census(&census(s, k)?, params)
}

/// Demotes least-frequent types (ties by certificate) until the least
/// frequent remaining one reaches the scatter bound for the current rare
/// total and frequent count.
pub fn classify_census(c: &TypeCensus, params: &Parameters) -> Result<FrequencyClassification, FrequencyError> {
    let mut order: Vec<(usize, &NeighborhoodType)> = c.counts.iter().map(|(t, &n)| (n, t)).collect();
    order.sort();
    let mut rare = BTreeSet::new();
    let mut s = 0usize;
    let mut t = None;
    for (i, &(n, ty)) in order.iter().enumerate() {
        let bound = scatter_bound(params.m, params.delta, s, order.len() - i, params.d)?;
        if n >= bound {
            t = Some(bound);
            break;
        }
        rare.insert(ty.clone());
        s += n;
    }
    let t = match t {
        Some(t) => t,
        None => scatter_bound(params.m, params.delta, s, 0, params.d)?.max(s + 1),
    };
    let frequent = order.iter().map(|(_, ty)| (*ty).clone()).filter(|ty| !rare.contains(ty)).collect();
    Ok(FrequencyClassification { t, frequent, rare, rare_occurrence_total: s, params: *params })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cycle(n: usize) -> Structure {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Structure::graph(n, &edges, true).unwrap()
    }

    fn path(n: usize) -> Structure {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Structure::graph(n, &edges, true).unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(scatter_bound(1, 4, 0, 1, 2).unwrap(), 32);
        assert_eq!(scatter_bound(0, 4, 10, 3, 2).unwrap(), 1);
        assert_eq!(scatter_bound(3, 4, 5, 2, 0).unwrap(), 5 + 6 + 1);
        assert_eq!(scatter_bound(720, 8, 0, 1, 2).unwrap(), 367_921);
        assert!(matches!(scatter_bound(usize::MAX, 4, 0, 2, 2), Err(FrequencyError::Overflow { .. })));
    }

    #[test]
    fn parameters() {
        let pure = census(&Structure::pure_set(5), 1).unwrap();
        let p = default_parameters(1, 2, &pure, false).unwrap();
        assert_eq!((p.m, p.delta, p.max_ball), (4, 4, 1));
        let c = census(&cycle(10), 1).unwrap();
        assert_eq!(default_parameters(1, 2, &c, false).unwrap().m, 24);
        let c2 = census(&cycle(10), 2).unwrap();
        assert_eq!(default_parameters(2, 2, &c2, false).unwrap().m, 720);
        assert_eq!(default_parameters(2, 2, &c2, true).unwrap().m, 1440);
        let big = census(&Structure::graph(30, &(1..30).map(|i| (0, i)).collect::<Vec<_>>(), true).unwrap(), 0).unwrap();
        let mut fake = big.clone();
        fake.counts = fake
            .counts
            .into_iter()
            .map(|(mut t, n)| {
                t.size = 40;
                (t, n)
            })
            .collect();
        assert_eq!(default_parameters(1, 29, &fake, false), Err(FrequencyError::FactorialOverflow { max_ball: 40 }));
    }

    fn check_selection(s: &Structure, sel: &ScatterSelection, forbidden: &[Element], delta: usize) {
        let all: Vec<Element> = sel.chosen.iter().flatten().copied().collect();
        for (i, &a) in all.iter().enumerate() {
            for &b in &all[i + 1..] {
                assert!(s.distance(a, b).unwrap().is_none_or(|d| d > delta));
            }
            for &b in forbidden {
                assert!(s.distance(a, b).unwrap().is_none_or(|d| d > delta));
            }
        }
    }

    #[test]
    fn scattered() {
        let c = cycle(300);
        let all: Vec<Element> = c.elements().collect();
        let sel = select_scattered(&c, &[all], &[], 3, 4).unwrap();
        assert_eq!(sel.chosen[0], vec![0, 5, 10]);
        check_selection(&c, &sel, &[], 4);

        let pure = Structure::pure_set(6);
        let sel = select_scattered(&pure, &[vec![5, 1, 3, 2]], &[], 3, 4).unwrap();
        assert_eq!(sel.chosen[0], vec![1, 2, 3]);

        let p = path(5);
        let err = select_scattered(&p, &[vec![0, 1, 2, 3, 4]], &[2], 1, 2).unwrap_err();
        assert!(matches!(err, FrequencyError::SetExhausted { set: 0, chosen: 0, .. }));
    }

    #[test]
    fn classifications() {
        let c = cycle(2000);
        let cen = census(&c, 1).unwrap();
        let p = default_parameters(1, 2, &cen, false).unwrap();
        let r = classify(&c, 1, &p).unwrap();
        assert_eq!((r.frequent.len(), r.rare.len(), r.rare_occurrence_total), (1, 0, 0));
        assert_eq!(r.t, 745);

        let pa = path(2000);
        let cen = census(&pa, 1).unwrap();
        let p = default_parameters(1, 2, &cen, false).unwrap();
        let r = classify(&pa, 1, &p).unwrap();
        assert_eq!((r.frequent.len(), r.rare.len(), r.rare_occurrence_total), (1, 1, 2));
        let rare = r.rare.iter().next().unwrap();
        assert_eq!(rare.size, 2);

        // at k = 0 the bound is 3 and the single type survives
        for k in 1..4 {
            let small = path(3);
            let cen = census(&small, k).unwrap();
            let p = default_parameters(k, 2, &cen, false).unwrap();
            let r = classify(&small, k, &p).unwrap();
            assert!(r.frequent.is_empty());
            assert!(r.rare.iter().all(|t| cen.count(t) < r.t));
        }
        let json = serde_json::to_value(classify(&c, 1, &default_parameters(1, 2, &census(&c, 1).unwrap(), false).unwrap()).unwrap()).unwrap();
        assert_eq!(json["t"], 745);
        assert_eq!(json["params"]["M"], 3);
        assert!(json["frequent"][0].is_string());
    }

    #[test]
    fn degree_checked() {
        let c = cycle(10);
        let p = Parameters { k: 1, d: 1, m: 1, delta: 4, max_ball: 3, c2_multiplier: 1 };
        assert_eq!(classify(&c, 1, &p), Err(FrequencyError::DegreeExceeded { found: 2, bound: 1 }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lemma_inequalities(lengths in proptest::collection::vec(1usize..400, 1..5), m in 1usize..4, delta in 0usize..4) {
            // disjoint union of paths of the given lengths
            let mut edges = vec![];
            let mut base = 0;
            for &l in &lengths {
                edges.extend((1..l).map(|i| (base + i - 1, base + i)));
                base += l;
            }
            let s = Structure::graph(base, &edges, true).unwrap();
            let p = Parameters { k: 1, d: 2, m, delta, max_ball: 3, c2_multiplier: 1 };
            let cen = census(&s, 1).unwrap();
            let r = classify_census(&cen, &p).unwrap();
            for t in &r.rare {
                prop_assert!(cen.count(t) < r.t);
            }
            for t in &r.frequent {
                prop_assert!(cen.count(t) >= r.t);
            }
            let rare_total: usize = r.rare.iter().map(|t| cen.count(t)).sum();
            prop_assert_eq!(rare_total, r.rare_occurrence_total);
            prop_assert!(r.t >= scatter_bound(m, delta, rare_total, r.frequent.len(), 2).unwrap());

            // scattered pins exist for every frequent type, away from rare occurrences
            let types = crate::neighborhood::type_map(&s, 1).unwrap();
            let forbidden: Vec<Element> = s.elements().filter(|&a| r.rare.contains(&types[a])).collect();
            let sets: Vec<Vec<Element>> =
                r.frequent.iter().map(|t| s.elements().filter(|&a| types[a] == *t).collect()).collect();
            let sel = select_scattered(&s, &sets, &forbidden, m, delta).unwrap();
            check_selection(&s, &sel, &forbidden, delta);
        }

        #[test]
        fn relabel_invariant(n in 3usize..60, seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let s = path(n);
            let mut perm: Vec<Element> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let t = s.relabel(&perm).unwrap();
            let p = Parameters { k: 1, d: 2, m: 1, delta: 2, max_ball: 3, c2_multiplier: 1 };
            prop_assert_eq!(classify(&s, 1, &p).unwrap(), classify(&t, 1, &p).unwrap());
        }
    }
}
