use std::collections::{BTreeMap, HashMap, HashSet};

use super::{boards, Board, GameConfiguration, GameError, Mode};
use crate::formula::Model;
use crate::structure::{Element, OrderRelation, PairAtomicType};

/// Colour of a single pebble position. `Base` is the atomic type of
/// `(a, a)`; `Refined` adds the clamped counts of
/// `(atomic type of the pair, colour of the other pebble)` over all moves of
/// the other pebble.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum ColorKey {
    Base(u32),
    Refined { prev: u32, moves: Vec<(u32, u32, u32)> },
}

#[derive(Debug, Default)]
pub(crate) struct Palette {
    ids: HashMap<ColorKey, u32>,
    pub(crate) keys: Vec<ColorKey>,
    /// Atom id of `(a, a)` for each colour.
    pub(crate) unary: Vec<u32>,
}

impl Palette {
    fn intern(&mut self, key: ColorKey, unary: u32) -> u32 {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.keys.len() as u32;
        self.ids.insert(key.clone(), id);
        self.keys.push(key);
        self.unary.push(unary);
        id
    }
}

/// Which pebble a single-position colour describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Role {
    /// Colour of `x = a`; refined over moves of `y`.
    X,
    /// Colour of `y = b`; refined over moves of `x`.
    Y,
}

/// Winning regions `W_0 ⊇ W_1 ⊇ … ⊇ W_k`.
///
/// Configuration `(a, b)` against `(c, d)` lies in `W_r` iff the pair atomic
/// types agree, `x`-colours of `a` and `c` agree at round `r` and
/// `y`-colours of `b` and `d` agree at round `r`.
#[derive(Debug)]
pub struct WinningTable {
    pub(crate) k: usize,
    pub(crate) mode: Mode,
    pub(crate) boards: [Board; 2],
    pub(crate) atoms: Vec<PairAtomicType>,
    atom_ids: HashMap<PairAtomicType, u32>,
    /// `colors[role][r][s][a]`.
    pub(crate) colors: [Vec<[Vec<u32>; 2]>; 2],
    pub(crate) palettes: [Vec<Palette>; 2],
    sentence: Vec<bool>,
    placed: bool,
}

fn role_index(role: Role) -> usize {
    match role {
        Role::X => 0,
        Role::Y => 1,
    }
}

impl WinningTable {
    pub fn rounds(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn atom_id(&mut self, t: PairAtomicType) -> u32 {
        if let Some(&id) = self.atom_ids.get(&t) {
            return id;
        }
        let id = self.atoms.len() as u32;
        self.atom_ids.insert(t.clone(), id);
        self.atoms.push(t);
        id
    }

    pub(crate) fn color(&self, role: Role, r: usize, s: usize, a: Element) -> u32 {
        self.colors[role_index(role)][r][s][a]
    }

    pub(crate) fn palette(&self, role: Role, r: usize) -> &Palette {
        &self.palettes[role_index(role)][r]
    }

    /// Whether the duplicator survives `r` more rounds from `cfg`.
    pub fn contains(&self, r: usize, cfg: &GameConfiguration) -> Result<bool, GameError> {
        assert!(r <= self.k, "round {r} beyond the table");
        let p = &cfg.pebbles;
        for (s, (x, y)) in [p.pair(0), p.pair(1)].into_iter().enumerate() {
            for e in [x, y] {
                if e >= self.boards[s].size() {
                    return Err(GameError::ElementOutOfRange { structure: s, element: e });
                }
            }
        }
        let (a, b) = p.pair(0);
        let (c, d) = p.pair(1);
        Ok(self.boards[0].atom(a, b) == self.boards[1].atom(c, d)
            && self.color(Role::X, r, 0, a) == self.color(Role::X, r, 1, c)
            && self.color(Role::Y, r, 0, b) == self.color(Role::Y, r, 1, d))
    }

    /// Largest `r ≤ k` with `cfg ∈ W_r`, or `None` if the atomic types differ.
    pub fn survival(&self, cfg: &GameConfiguration) -> Result<Option<usize>, GameError> {
        let mut best = None;
        for r in 0..=self.k {
            if !self.contains(r, cfg)? {
                break;
            }
            best = Some(r);
        }
        Ok(best)
    }

    /// Top-level verdict: the duplicator chooses all four starting positions
    /// and then survives `k` rounds.
    pub fn duplicator_wins(&self) -> bool {
        self.placed
    }

    /// Verdict of the game that starts with no pebble on the board: the
    /// structures agree on every sentence of rank `≤ r` (with counting index
    /// `≤` threshold in counting mode).
    pub fn sentence_equivalent(&self, r: usize) -> bool {
        self.sentence[r]
    }

    /// Clamped counts of `x`-colours at round `r` in structure `s`.
    pub(crate) fn census(&self, r: usize, s: usize) -> BTreeMap<u32, usize> {
        let c = self.mode.threshold();
        let mut out = BTreeMap::new();
        for &e in &self.colors[0][r][s] {
            let n = out.entry(e).or_insert(0);
            *n = (*n + 1).min(c);
        }
        out
    }

    fn refine(&mut self, role: Role, r: usize) {
        let ri = role_index(role);
        let other = 1 - ri;
        let c = self.mode.threshold() as u32;
        let mut next: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        let mut palette = Palette::default();
        let mut detached: HashMap<(u32, u32, Option<OrderRelation>), u32> = HashMap::new();
        for s in 0..2 {
            let n = self.boards[s].size();
            let ordered = self.boards[s].positions.is_some();
            let other_colors = self.colors[other][r][s].clone();
            let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
            for (o, &f) in other_colors.iter().enumerate() {
                by_class.entry(f).or_default().push(self.boards[s].position(o));
            }
            for list in by_class.values_mut() {
                list.sort_unstable();
            }
            let mut out = Vec::with_capacity(n);
            let mut nb_counts: HashMap<(u32, Option<OrderRelation>), u32> = HashMap::new();
            for e in 0..n {
                let mut items: BTreeMap<(u32, u32), u32> = BTreeMap::new();
                let pair = |o: Element| if role == Role::X { (e, o) } else { (o, e) };
                let (x, y) = pair(e);
                let self_atom = self.atom_id(self.boards[s].atom(x, y));
                *items.entry((self_atom, other_colors[e])).or_default() += 1;
                nb_counts.clear();
                let neighbors: Vec<Element> = self.boards[s].structure.neighbors(e).to_vec();
                for o in neighbors {
                    let (x, y) = pair(o);
                    let t = self.boards[s].atom(x, y);
                    let dir = t.order;
                    let id = self.atom_id(t);
                    *items.entry((id, other_colors[o])).or_default() += 1;
                    *nb_counts.entry((other_colors[o], dir)).or_default() += 1;
                }
                let pe = self.boards[s].position(e);
                let ue = self.palettes[ri][r].unary[self.colors[ri][r][s][e] as usize];
                for (&f, list) in &by_class {
                    let uf = self.palettes[other][r].unary[f as usize];
                    let mut put = |count: u32, dir: Option<OrderRelation>, this: &mut Self| {
                        if count == 0 {
                            return;
                        }
                        let key = if role == Role::X { (ue, uf, dir) } else { (uf, ue, dir) };
                        let id = match detached.get(&key) {
                            Some(&id) => id,
                            None => {
                                let sig = this.boards[0].structure.signature();
                                let t = PairAtomicType::detached(
                                    sig,
                                    &this.atoms[key.0 as usize],
                                    &this.atoms[key.1 as usize],
                                    dir,
                                );
                                let id = this.atom_id(t);
                                detached.insert(key, id);
                                id
                            }
                        };
                        *items.entry((id, f)).or_default() += count;
                    };
                    if ordered {
                        let below = list.partition_point(|&p| p < pe) as u32;
                        let above = (list.len() - list.partition_point(|&p| p <= pe)) as u32;
                        // `o` below `e`: x = e > y = o for the x-colour.
                        let (d_below, d_above) = if role == Role::X {
                            (OrderRelation::Greater, OrderRelation::Less)
                        } else {
                            (OrderRelation::Less, OrderRelation::Greater)
                        };
                        let nb_below = nb_counts.get(&(f, Some(d_below))).copied().unwrap_or(0);
                        let nb_above = nb_counts.get(&(f, Some(d_above))).copied().unwrap_or(0);
                        put(below - nb_below, Some(d_below), self);
                        put(above - nb_above, Some(d_above), self);
                    } else {
                        let own = u32::from(other_colors[e] == f);
                        let nb = nb_counts.get(&(f, None)).copied().unwrap_or(0);
                        put(list.len() as u32 - own - nb, None, self);
                    }
                }
                let moves: Vec<(u32, u32, u32)> = items.into_iter().map(|((t, f), n)| (t, f, n.min(c))).collect();
                let prev = self.colors[ri][r][s][e];
                out.push(palette.intern(ColorKey::Refined { prev, moves }, ue));
            }
            next[s] = out;
        }
        self.colors[ri].push(next);
        self.palettes[ri].push(palette);
    }

    /// Whether the two structures share a configuration in `W_k`.
    fn shared_configuration(&mut self) -> bool {
        let k = self.k;
        let mut sets: [HashSet<(u32, u32, u32)>; 2] = [HashSet::new(), HashSet::new()];
        for s in 0..2 {
            let n = self.boards[s].size();
            let eta = self.colors[0][k][s].clone();
            let xi = self.colors[1][k][s].clone();
            // Pairs sharing no tuple, counted by (x-colour, y-colour, order).
            let mut pairs: HashMap<(u32, u32, Option<OrderRelation>), i64> = HashMap::new();
            match self.boards[s].positions.clone() {
                Some(pos) => {
                    let mut seq: Vec<Element> = (0..n).collect();
                    seq.sort_by_key(|&a| pos[a]);
                    for (dir, iter) in [
                        (OrderRelation::Less, Box::new(seq.iter()) as Box<dyn Iterator<Item = &Element>>),
                        (OrderRelation::Greater, Box::new(seq.iter().rev())),
                    ] {
                        let mut seen: BTreeMap<u32, i64> = BTreeMap::new();
                        for &b in iter {
                            for (&e, &cnt) in &seen {
                                *pairs.entry((e, xi[b], Some(dir))).or_default() += cnt;
                            }
                            *seen.entry(eta[b]).or_default() += 1;
                        }
                    }
                }
                None => {
                    let mut ce: BTreeMap<u32, i64> = BTreeMap::new();
                    let mut cf: BTreeMap<u32, i64> = BTreeMap::new();
                    for a in 0..n {
                        *ce.entry(eta[a]).or_default() += 1;
                        *cf.entry(xi[a]).or_default() += 1;
                    }
                    for (&e, &n1) in &ce {
                        for (&f, &n2) in &cf {
                            pairs.insert((e, f, None), n1 * n2);
                        }
                    }
                    for a in 0..n {
                        *pairs.get_mut(&(eta[a], xi[a], None)).expect("counted") -= 1;
                    }
                }
            }
            for a in 0..n {
                let t = self.boards[s].atom(a, a);
                let id = self.atom_id(t);
                sets[s].insert((id, eta[a], xi[a]));
                let neighbors: Vec<Element> = self.boards[s].structure.neighbors(a).to_vec();
                for b in neighbors {
                    let t = self.boards[s].atom(a, b);
                    let dir = t.order;
                    let id = self.atom_id(t);
                    sets[s].insert((id, eta[a], xi[b]));
                    *pairs.get_mut(&(eta[a], xi[b], dir)).expect("counted") -= 1;
                }
            }
            for ((e, f, dir), cnt) in pairs {
                if cnt > 0 {
                    let ue = self.palettes[0][k].unary[e as usize];
                    let uf = self.palettes[1][k].unary[f as usize];
                    let sig = self.boards[0].structure.signature().clone();
                    let t = PairAtomicType::detached(&sig, &self.atoms[ue as usize], &self.atoms[uf as usize], dir);
                    let id = self.atom_id(t);
                    sets[s].insert((id, e, f));
                }
            }
        }
        sets[0].intersection(&sets[1]).next().is_some()
    }
}

/// Solves the `k`-round game between `m0` and `m1` by colour refinement.
pub fn solve<M: Model>(m0: &M, m1: &M, k: usize, mode: Mode) -> Result<WinningTable, GameError> {
    let boards = boards(m0, m1, mode)?;
    let mut table = WinningTable {
        k,
        mode,
        boards,
        atoms: Vec::new(),
        atom_ids: HashMap::new(),
        colors: [Vec::new(), Vec::new()],
        palettes: [Vec::new(), Vec::new()],
        sentence: Vec::new(),
        placed: false,
    };
    for ri in 0..2 {
        let mut palette = Palette::default();
        let mut base: [Vec<u32>; 2] = [Vec::new(), Vec::new()];
        for s in 0..2 {
            for a in 0..table.boards[s].size() {
                let t = table.boards[s].atom(a, a);
                let id = table.atom_id(t);
                base[s].push(palette.intern(ColorKey::Base(id), id));
            }
        }
        table.colors[ri].push(base);
        table.palettes[ri].push(palette);
    }
    for r in 0..k {
        table.refine(Role::X, r);
        table.refine(Role::Y, r);
    }
    let nullary = |b: &Board| -> Vec<bool> {
        let sig = b.structure.signature();
        (0..sig.relations().len()).filter(|&ri| sig.relations()[ri].arity == 0).map(|ri| b.structure.holds(ri, &[])).collect()
    };
    let base = nullary(&table.boards[0]) == nullary(&table.boards[1]);
    table.sentence.push(base);
    for r in 1..=k {
        let ok = table.sentence[r - 1] && table.census(r - 1, 0) == table.census(r - 1, 1);
        table.sentence.push(ok);
    }
    table.placed = table.shared_configuration();
    for r in 0..k {
        assert!(!table.sentence[r + 1] || table.sentence[r], "sentence verdicts must be monotone");
    }
    Ok(table)
}

/// `≡^{FO²}_k` (or `≡^{C²}_{k,c}` in counting mode) at the sentence level.
pub fn fo2_equivalent<M: Model>(m0: &M, m1: &M, k: usize, mode: Mode) -> Result<bool, GameError> {
    Ok(solve(m0, m1, k, mode)?.sentence_equivalent(k))
}
