//! Named structures and pairs used by the tests, the command line and the
//! game service.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::structure::{Element, OrderedStructure, Structure};

/// The undirected cycle on `0..n`, `n ≥ 3`.
pub fn cycle(n: usize) -> Structure {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Structure::graph(n, &edges, true).expect("valid edges")
}

/// The undirected path `0 - 1 - ... - (n-1)`.
pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Structure::graph(n, &edges, true).expect("valid edges")
}

/// `C_{n-3}` plus a disjoint triangle, as an unordered structure.
pub fn cycle_with_triangle(n: usize) -> Structure {
    cycle(n - 3).disjoint_union(&triangle()).expect("same signature")
}

pub fn triangle() -> Structure {
    Structure::graph(3, &[(0, 1), (1, 2), (0, 2)], true).expect("valid edges")
}

/// Edges of the cycle on positions `0..n` (`n = 3q+1`) threaded through
/// triples: `0, 2, 1, 3, 5, 4, 6, ...`. Every position other than the
/// endpoints has both neighbors on one side or one on each.
fn threaded_cycle_edges(n: usize) -> Vec<(Element, Element)> {
    let q = (n - 1) / 3;
    let mut edges = vec![(0, 2), (n - 1, 0)];
    for b in 0..q {
        edges.push((3 * b + 2, 3 * b + 1));
        edges.push((3 * b + 1, 3 * b + 3));
        if b + 1 < q {
            edges.push((3 * b + 3, 3 * b + 5));
        }
    }
    edges
}

/// The two ordered graphs of the cycle-versus-triangle picture, on `n`
/// elements each, ordered by element id.
///
/// The first is a cycle threaded through consecutive triples. The second
/// cuts the triple `3c, 3c+1, 3c+2` out of that cycle (for a middle block
/// `c`), closes the gap with the edge `(3c-2, 3c+3)` and turns the three
/// cut elements into a triangle. Both orders show the same three kinds of
/// elements: two neighbors to the left, two to the right, or one each.
///
/// Requires `n ≡ 1 (mod 3)` and `n ≥ 10`.
pub fn figure_five_pair(n: usize) -> Option<(OrderedStructure, OrderedStructure)> {
    if n < 10 || n % 3 != 1 {
        return None;
    }
    let q = (n - 1) / 3;
    let c = q / 2;
    let left = threaded_cycle_edges(n);
    let cut = [3 * c, 3 * c + 1, 3 * c + 2];
    let mut right: Vec<_> = left.iter().copied().filter(|(a, b)| !cut.contains(a) && !cut.contains(b)).collect();
    right.push((3 * c - 2, 3 * c + 3));
    right.extend([(cut[0], cut[1]), (cut[1], cut[2]), (cut[0], cut[2])]);
    let ordered = |edges: &[(Element, Element)]| OrderedStructure::identity(Structure::graph(n, edges, true).expect("valid edges"));
    Some((ordered(&left), ordered(&right)))
}

/// A seeded random graph with maximum degree at most `d`.
pub fn random_bounded_degree(n: usize, d: usize, attempts: usize, seed: u64) -> Structure {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    for _ in 0..attempts {
        if n < 2 {
            break;
        }
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b && degree[a] < d && degree[b] < d && edges.insert((a.min(b), a.max(b))) {
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Structure::graph(n, &edges, true).expect("valid edges")
}

/// A named pair of (possibly ordered) structures.
#[derive(Debug, Clone)]
pub struct CorpusPair {
    pub name: String,
    pub description: String,
    pub structures: [Structure; 2],
    pub orders: Option<[OrderedStructure; 2]>,
}

/// What the service lists for a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub description: String,
    pub sizes: [usize; 2],
    pub ordered: bool,
}

impl CorpusPair {
    pub fn entry(&self) -> CorpusEntry {
        CorpusEntry {
            name: self.name.clone(),
            description: self.description.clone(),
            sizes: [self.structures[0].size(), self.structures[1].size()],
            ordered: self.orders.is_some(),
        }
    }
}

fn unordered(name: &str, description: &str, a: Structure, b: Structure) -> CorpusPair {
    CorpusPair { name: name.into(), description: description.into(), structures: [a, b], orders: None }
}

/// The built-in pairs, by name.
pub fn builtin_pairs() -> Vec<CorpusPair> {
    let (f0, f1) = figure_five_pair(5002).expect("5002 = 3·1667 + 1");
    let (s0, s1) = figure_five_pair(16).expect("16 = 3·5 + 1");
    vec![
        CorpusPair {
            name: "fig5".into(),
            description: "Threaded cycle vs. cycle plus triangle, 5002 elements, ordered".into(),
            structures: [f0.base().clone(), f1.base().clone()],
            orders: Some([f0, f1]),
        },
        CorpusPair {
            name: "fig5-small".into(),
            description: "The 16-element cycle vs. 13-cycle plus triangle as drawn".into(),
            structures: [s0.base().clone(), s1.base().clone()],
            orders: Some([s0, s1]),
        },
        unordered("c5000-c5001", "Cycles of length 5000 and 5001", cycle(5000), cycle(5001)),
        unordered("c5000-c5003", "Cycles of length 5000 and 5003", cycle(5000), cycle(5003)),
        unordered("p2000-p2001", "Paths on 2000 and 2001 elements", path(2000), path(2001)),
        unordered("set3-set4", "Pure sets of sizes 3 and 4", Structure::pure_set(3), Structure::pure_set(4)),
        CorpusPair {
            name: "ordered-set2-set3".into(),
            description: "Ordered pure sets of sizes 2 and 3".into(),
            structures: [Structure::pure_set(2), Structure::pure_set(3)],
            orders: Some([
                OrderedStructure::identity(Structure::pure_set(2)),
                OrderedStructure::identity(Structure::pure_set(3)),
            ]),
        },
    ]
}

pub fn builtin_pair(name: &str) -> Option<CorpusPair> {
    builtin_pairs().into_iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edges(s: &Structure) -> Vec<(Element, Element)> {
        s.gaifman().edges().collect()
    }

    fn components(s: &Structure) -> usize {
        let mut seen = vec![false; s.size()];
        let mut count = 0;
        for a in s.elements() {
            if !seen[a] {
                count += 1;
                for (b, _) in s.bfs_within(&[a], s.size()) {
                    seen[b] = true;
                }
            }
        }
        count
    }

    #[test]
    fn figure_five_matches_the_drawing() {
        let (a, b) = figure_five_pair(16).unwrap();
        let (a, b) = (a.base(), b.base());
        let mut left: Vec<_> = edges(a);
        left.sort();
        let expected_left = [
            (0, 2), (0, 15), (1, 2), (1, 3), (3, 5), (4, 5), (4, 6), (6, 8), (7, 8), (7, 9),
            (9, 11), (10, 11), (10, 12), (12, 14), (13, 14), (13, 15),
        ];
        assert_eq!(left, expected_left);
        let mut right = edges(b);
        right.sort();
        let expected_right = [
            (0, 2), (0, 15), (1, 2), (1, 3), (3, 5), (4, 5), (4, 9), (6, 7), (6, 8), (7, 8),
            (9, 11), (10, 11), (10, 12), (12, 14), (13, 14), (13, 15),
        ];
        assert_eq!(right, expected_right);
    }

    #[test]
    fn figure_five_has_the_right_shape() {
        let (a, b) = figure_five_pair(5002).unwrap();
        assert!(a.base().elements().all(|e| a.base().neighbors(e).len() == 2));
        assert!(b.base().elements().all(|e| b.base().neighbors(e).len() == 2));
        assert_eq!(components(a.base()), 1);
        assert_eq!(components(b.base()), 2);
        assert!(figure_five_pair(5000).is_none());
    }

    #[test]
    fn random_graphs_respect_the_degree_bound() {
        let s = random_bounded_degree(200, 3, 1000, 9);
        assert!(s.degree() <= 3);
        assert_eq!(s, random_bounded_degree(200, 3, 1000, 9));
    }

    #[test]
    fn builtin_names_are_unique() {
        let pairs = builtin_pairs();
        let names: std::collections::BTreeSet<_> = pairs.iter().map(|p| &p.name).collect();
        assert_eq!(names.len(), pairs.len());
        assert!(builtin_pair("fig5").is_some_and(|p| p.orders.is_some()));
    }
}
