use std::collections::{BTreeMap, BTreeSet};

use super::{OrderError, Pin, SegmentDecomposition, SegmentName, Side};
use crate::frequency::{select_scattered_counts, FrequencyClassification, FrequencyError, Parameters};
use crate::neighborhood::{
    ball, enumerate_environment_types, neighborhood, pointed_isomorphism, type_map, EnvironmentClass,
    NeighborhoodType, DEFAULT_ENVIRONMENT_CAP,
};
use crate::structure::{Element, OrderedStructure, Structure};

/// Minimum distance (exclusive) between pins and from pins to rare
/// occurrences. `4k` keeps pinned balls clear of earlier segments on one
/// side; keeping the right-hand layers with index below `2k` from touching
/// the completed left-hand side needs `6k + 1`.
pub fn pin_separation(k: usize) -> usize {
    (4 * k).max(6 * k + 2)
}

struct Placement {
    owner: Vec<bool>,
}

impl Placement {
    fn take(&mut self, name: SegmentName, elems: &[Element]) -> Result<(), OrderError> {
        for &a in elems {
            if std::mem::replace(&mut self.owner[a], true) {
                return Err(OrderError::SegmentOverlap { segment: name.to_string(), element: a });
            }
        }
        Ok(())
    }

    /// Unplaced neighbors of `layer`, ascending.
    fn fresh_neighbors(&self, s: &Structure, layer: &[Element]) -> Vec<Element> {
        let set: BTreeSet<Element> =
            layer.iter().flat_map(|&a| s.neighbors(a).iter().copied()).filter(|&b| !self.owner[b]).collect();
        set.into_iter().collect()
    }
}

/// The elements of `ball(p, k)` listed so that the environment type of `p`
/// is the one represented by `class`.
fn ordered_ball(s: &Structure, p: Element, k: usize, class: &EnvironmentClass) -> Vec<Element> {
    let actual = neighborhood(s, p, k).expect("pin in domain");
    let members: Vec<Element> = ball(s, p, k).expect("pin in domain").into_iter().collect();
    let rep = &class.representative;
    let iso = pointed_isomorphism(&rep.forget_order(), &actual).expect("pin has the represented type");
    rep.carrier.sequence().iter().map(|&r| members[iso[r]]).collect()
}

/// Builds the decomposition of `s0` and its order `<₀`.
pub fn build_decomposition(
    s0: &Structure,
    k: usize,
    cls: &FrequencyClassification,
    params: &Parameters,
) -> Result<(SegmentDecomposition, OrderedStructure), OrderError> {
    if cls.frequent.is_empty() {
        return Err(OrderError::NoFrequentTypes);
    }
    if s0.degree() > params.d {
        return Err(FrequencyError::DegreeExceeded { found: s0.degree(), bound: params.d }.into());
    }
    let types = type_map(s0, k)?;
    let mut occurrences: BTreeMap<&NeighborhoodType, Vec<Element>> = BTreeMap::new();
    for (a, t) in types.iter().enumerate() {
        occurrences.entry(t).or_default().push(a);
    }
    let rare_occ: Vec<Element> = s0.elements().filter(|&a| cls.rare.contains(&types[a])).collect();

    // Environment types of each frequent type, then one scattered selection
    // for every pin.
    let copies = params.c2_multiplier.max(1);
    let mut ords: Vec<(&NeighborhoodType, Vec<EnvironmentClass>)> = Vec::new();
    for ty in &cls.frequent {
        let occ = occurrences.get(ty).map(Vec::as_slice).unwrap_or(&[]);
        let Some(&first) = occ.first() else {
            return Err(OrderError::PinShortage { certificate: ty.certificate.to_hex(), needed: 1, found: 0 });
        };
        ords.push((ty, enumerate_environment_types(&neighborhood(s0, first, k)?, DEFAULT_ENVIRONMENT_CAP)?));
    }
    let demands: Vec<(&[Element], usize)> = ords
        .iter()
        .map(|(ty, envs)| (occurrences[ty].as_slice(), 2 * (k + 1) * envs.len() * copies))
        .collect();
    let selection = match select_scattered_counts(s0, &demands, &rare_occ, pin_separation(k)) {
        Ok(sel) => sel,
        Err(FrequencyError::SetExhausted { set, chosen, needed, .. }) => {
            return Err(OrderError::PinShortage {
                certificate: ords[set].0.certificate.to_hex(),
                needed,
                found: chosen,
            })
        }
        Err(e) => return Err(e.into()),
    };

    let mut pins = Vec::new();
    for ((ty, envs), chosen) in ords.iter().zip(&selection.chosen) {
        let mut it = chosen.iter().copied();
        for side in [Side::L, Side::R] {
            for slot in 0..=k {
                for (l, class) in envs.iter().enumerate() {
                    for copy in 0..copies {
                        pins.push(Pin {
                            neighborhood: ty.certificate.clone(),
                            env_index: l,
                            environment: class.ty.clone(),
                            side,
                            slot,
                            copy,
                            element: it.next().expect("selection has the demanded size"),
                        });
                    }
                }
            }
        }
    }
    let classes: BTreeMap<(&[u8], usize), &EnvironmentClass> = ords
        .iter()
        .flat_map(|(ty, envs)| envs.iter().enumerate().map(move |(l, c)| ((ty.certificate.as_bytes(), l), c)))
        .collect();
    let universal = |side: Side, slot: usize| -> Vec<Element> {
        pins.iter()
            .filter(|p| p.side == side && p.slot == slot)
            .flat_map(|p| ordered_ball(s0, p.element, k, classes[&(p.neighborhood.as_bytes(), p.env_index)]))
            .collect()
    };

    let n = s0.size();
    let mut placed = Placement { owner: vec![false; n] };
    let mut rare_set = BTreeSet::new();
    for &a in &rare_occ {
        rare_set.extend(ball(s0, a, k)?);
    }
    let rare: Vec<Element> = rare_set.into_iter().collect();
    placed.take(SegmentName::Rare, &rare)?;

    let layers = 2 * k + 1;
    let mut nl = vec![Vec::new(); layers];
    let mut ul = vec![Vec::new(); layers];
    for j in 0..layers {
        nl[j] = if j == 0 {
            placed.fresh_neighbors(s0, &rare)
        } else {
            let prev: Vec<Element> = nl[j - 1].iter().chain(&ul[j - 1]).copied().collect();
            placed.fresh_neighbors(s0, &prev)
        };
        placed.take(SegmentName::NL(j), &nl[j])?;
        if j <= k {
            ul[j] = universal(Side::L, j);
            placed.take(SegmentName::UL(j), &ul[j])?;
        }
    }
    let mut ur = vec![Vec::new(); layers];
    let mut nr = vec![Vec::new(); layers];
    for j in 0..layers {
        if j > 0 {
            let prev: Vec<Element> = ur[j - 1].iter().chain(&nr[j - 1]).copied().collect();
            nr[j] = placed.fresh_neighbors(s0, &prev);
            placed.take(SegmentName::NR(j), &nr[j])?;
        }
        if j <= k {
            ur[j] = universal(Side::R, j);
            placed.take(SegmentName::UR(j), &ur[j])?;
        }
    }
    let middle: Vec<Element> = (0..n).filter(|&a| !placed.owner[a]).collect();
    let dec = SegmentDecomposition::new(k, n, rare, nl, ul, middle, ur, nr, pins);
    let order = OrderedStructure::from_sequence(s0.clone(), dec.sequence())?;
    Ok((dec, order))
}
