//! Ideal triangulations: gluing tables, validation, edge and cusp orbits,
//! the curvature predicate and the unique-common-simplex check.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::unionfind::UnionFind;

use crate::perm::Perm;

/// The six edges of a tetrahedron, indexed 0..6.
pub const EDGES: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index of the edge `{a, b}` in [`EDGES`].
pub fn edge_index(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not an edge: {a}{b}"),
    }
}

/// The three vertices of face `f` (the face opposite vertex `f`).
pub fn face_vertices(f: u8) -> [u8; 3] {
    let mut out = [0u8; 3];
    let mut k = 0;
    for v in 0..4u8 {
        if v != f {
            out[k] = v;
            k += 1;
        }
    }
    out
}

/// The vertex not in `{a, b, c}`.
pub fn fourth(a: u8, b: u8, c: u8) -> u8 {
    6 - a - b - c
}

/// Target of a face gluing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gluing {
    pub tet: usize,
    pub perm: Perm,
}

/// A face slot `(tet, face)`.
pub type FaceSlot = (usize, u8);

/// A tetrahedral complex given by face gluings. Faces without a gluing are
/// boundary faces; a closed triangulation has none.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triangulation {
    gluings: Vec<[Option<Gluing>; 4]>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClass {
    /// `(tet, edge index)` slots, sorted.
    pub members: Vec<(usize, usize)>,
    pub index: usize,
}

impl EdgeClass {
    /// Angle sum around the edge in units of π/3.
    pub fn angle_sum_thirds(&self) -> usize {
        self.index
    }

    pub fn angle_sum(&self) -> f64 {
        self.index as f64 * std::f64::consts::PI / 3.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CuspClass {
    /// `(tet, vertex)` corners, sorted.
    pub corners: Vec<(usize, u8)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// `(tet, face)` maps somewhere whose entry does not map back.
    Involution { tet: usize, face: u8 },
    SelfGluing { tet: usize, face: u8 },
    Boundary { tet: usize, face: u8 },
    TargetOutOfRange { tet: usize, face: u8, target: usize },
    Disconnected { unreachable_tet: usize },
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub orientable: bool,
    pub violations: Vec<Violation>,
}

impl Triangulation {
    /// `n` tetrahedra with every face on the boundary.
    pub fn with_tets(n: usize) -> Self {
        Triangulation { gluings: vec![[None; 4]; n] }
    }

    pub fn n(&self) -> usize {
        self.gluings.len()
    }

    pub fn gluing(&self, tet: usize, face: u8) -> Option<Gluing> {
        self.gluings[tet][face as usize]
    }

    /// Sets one directed entry without touching the inverse entry.
    pub fn set_entry(&mut self, tet: usize, face: u8, g: Option<Gluing>) {
        self.gluings[tet][face as usize] = g;
    }

    /// Glues face `face` of `tet` to `other` via `perm`, writing both entries.
    pub fn glue(&mut self, tet: usize, face: u8, other: usize, perm: Perm) {
        self.gluings[tet][face as usize] = Some(Gluing { tet: other, perm });
        self.gluings[other][perm.apply(face) as usize] = Some(Gluing { tet, perm: perm.inverse() });
    }

    /// Removes the gluing at `(tet, face)` and its partner.
    pub fn unglue(&mut self, tet: usize, face: u8) {
        if let Some(g) = self.gluings[tet][face as usize].take() {
            self.gluings[g.tet][g.perm.apply(face) as usize] = None;
        }
    }

    pub fn is_closed(&self) -> bool {
        self.gluings.iter().all(|fs| fs.iter().all(|g| g.is_some()))
    }

    /// Each gluing once, from the smaller face slot: `((t, f), (t', f'), σ)`.
    pub fn face_pairs(&self) -> Vec<(FaceSlot, FaceSlot, Perm)> {
        let mut out = Vec::new();
        for t in 0..self.n() {
            for f in 0..4u8 {
                if let Some(g) = self.gluing(t, f) {
                    let other = (g.tet, g.perm.apply(f));
                    if (t, f) < other {
                        out.push(((t, f), other, g.perm));
                    }
                }
            }
        }
        out
    }

    pub fn boundary_faces(&self) -> Vec<FaceSlot> {
        let mut out = Vec::new();
        for t in 0..self.n() {
            for f in 0..4u8 {
                if self.gluing(t, f).is_none() {
                    out.push((t, f));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.n();
        if n == 0 {
            violations.push(Violation::Empty);
        }
        for t in 0..n {
            for f in 0..4u8 {
                match self.gluing(t, f) {
                    None => violations.push(Violation::Boundary { tet: t, face: f }),
                    Some(g) => {
                        if g.tet >= n {
                            violations.push(Violation::TargetOutOfRange { tet: t, face: f, target: g.tet });
                            continue;
                        }
                        if g.tet == t {
                            violations.push(Violation::SelfGluing { tet: t, face: f });
                        }
                        let back = self.gluing(g.tet, g.perm.apply(f));
                        if back != Some(Gluing { tet: t, perm: g.perm.inverse() }) {
                            violations.push(Violation::Involution { tet: t, face: f });
                        }
                    }
                }
            }
        }
        if n > 0 {
            let reach = self.reachable_from(0);
            for (t, r) in reach.iter().enumerate() {
                if !r {
                    violations.push(Violation::Disconnected { unreachable_tet: t });
                    break;
                }
            }
        }
        let orientable = violations.is_empty() && self.orientation().is_some();
        ValidationReport { ok: violations.is_empty(), orientable, violations }
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(t) = queue.pop_front() {
            for f in 0..4u8 {
                if let Some(g) = self.gluing(t, f) {
                    if g.tet < self.n() && !seen[g.tet] {
                        seen[g.tet] = true;
                        queue.push_back(g.tet);
                    }
                }
            }
        }
        seen
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.reachable_from(0).iter().all(|&r| r)
    }

    /// Signs ε(t) with ε(t)·ε(t′)·sign(σ) = −1 across every gluing, if any
    /// exist. Tet 0 of each dual component gets +1.
    pub fn orientation(&self) -> Option<Vec<i8>> {
        let n = self.n();
        let mut sign = vec![0i8; n];
        for root in 0..n {
            if sign[root] != 0 {
                continue;
            }
            sign[root] = 1;
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                for f in 0..4u8 {
                    let Some(g) = self.gluing(t, f) else { continue };
                    if g.tet >= n {
                        continue;
                    }
                    let perm_sign: i8 = if g.perm.is_odd() { -1 } else { 1 };
                    let want = -sign[t] * perm_sign;
                    if sign[g.tet] == 0 {
                        sign[g.tet] = want;
                        queue.push_back(g.tet);
                    } else if sign[g.tet] != want {
                        return None;
                    }
                }
            }
        }
        Some(sign)
    }

    /// Union-find over `(tet, edge)` slots, unioned across glued faces.
    fn edge_union_find(&self) -> UnionFind<usize> {
        let mut uf = UnionFind::new(6 * self.n());
        for ((t, f), (t2, _), perm) in self.face_pairs() {
            let [a, b, c] = face_vertices(f);
            for (x, y) in [(a, b), (a, c), (b, c)] {
                let e1 = edge_index(x, y);
                let e2 = edge_index(perm.apply(x), perm.apply(y));
                uf.union(6 * t + e1, 6 * t2 + e2);
            }
        }
        uf
    }

    /// Edge classes numbered by their smallest slot.
    pub fn edge_classes(&self) -> Vec<EdgeClass> {
        let uf = self.edge_union_find();
        let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for slot in 0..6 * self.n() {
            groups.entry(uf.find(slot)).or_default().push((slot / 6, slot % 6));
        }
        let mut classes: Vec<EdgeClass> = groups
            .into_values()
            .map(|members| EdgeClass { index: members.len(), members })
            .collect();
        classes.sort_by_key(|c| c.members[0]);
        classes
    }

    /// `class_of[t][e]` = position in [`Triangulation::edge_classes`].
    pub fn edge_class_table(&self) -> (Vec<EdgeClass>, Vec<[usize; 6]>) {
        let classes = self.edge_classes();
        let mut table = vec![[usize::MAX; 6]; self.n()];
        for (i, c) in classes.iter().enumerate() {
            for &(t, e) in &c.members {
                table[t][e] = i;
            }
        }
        (classes, table)
    }

    pub fn cusp_classes(&self) -> Vec<CuspClass> {
        let mut uf = UnionFind::new(4 * self.n());
        for ((t, f), (t2, _), perm) in self.face_pairs() {
            for v in face_vertices(f) {
                uf.union(4 * t + v as usize, 4 * t2 + perm.apply(v) as usize);
            }
        }
        let mut groups: BTreeMap<usize, Vec<(usize, u8)>> = BTreeMap::new();
        for slot in 0..4 * self.n() {
            groups.entry(uf.find(slot)).or_default().push((slot / 4, (slot % 4) as u8));
        }
        let mut cusps: Vec<CuspClass> = groups.into_values().map(|corners| CuspClass { corners }).collect();
        cusps.sort_by_key(|c| c.corners[0]);
        cusps
    }

    /// True iff every edge has index at least 6; also lists the singular
    /// edges (index above 6).
    pub fn is_negatively_curved(&self) -> (bool, Vec<EdgeClass>) {
        let classes = self.edge_classes();
        let ok = classes.iter().all(|c| c.index >= 6);
        let singular = classes.into_iter().filter(|c| c.index > 6).collect();
        (ok, singular)
    }

    /// Checks that any two distinct tetrahedra share nothing, exactly one
    /// edge class, or exactly one face (whose own edges may be shared).
    /// Returns the first offending pair in `(t, t′)` order.
    pub fn unique_common_simplex(&self) -> (bool, Option<(usize, usize)>) {
        let (classes, table) = self.edge_class_table();
        let mut faces: BTreeMap<(usize, usize), Vec<BTreeSet<usize>>> = BTreeMap::new();
        for ((t, f), (t2, _), _) in self.face_pairs() {
            if t == t2 {
                continue;
            }
            let [a, b, c] = face_vertices(f);
            let set: BTreeSet<usize> =
                [(a, b), (a, c), (b, c)].iter().map(|&(x, y)| table[t][edge_index(x, y)]).collect();
            faces.entry((t.min(t2), t.max(t2))).or_default().push(set);
        }
        let mut shared: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
        for (id, class) in classes.iter().enumerate() {
            let tets: BTreeSet<usize> = class.members.iter().map(|&(t, _)| t).collect();
            let tets: Vec<usize> = tets.into_iter().collect();
            for i in 0..tets.len() {
                for j in i + 1..tets.len() {
                    shared.entry((tets[i], tets[j])).or_default().insert(id);
                }
            }
        }
        let mut pairs: BTreeSet<(usize, usize)> = faces.keys().copied().collect();
        pairs.extend(shared.keys().copied());
        for pair in pairs {
            let common = shared.get(&pair).cloned().unwrap_or_default();
            let ok = match faces.get(&pair).map(|v| v.as_slice()).unwrap_or(&[]) {
                [] => common.len() <= 1,
                [face] => common.is_subset(face),
                _ => false,
            };
            if !ok {
                return (false, Some(pair));
            }
        }
        (true, None)
    }

    /// Dual graph edges, one per gluing: `((t, f), (t′, f′), σ)`.
    pub fn dual_graph(&self) -> Vec<(FaceSlot, FaceSlot, Perm)> {
        self.face_pairs()
    }

    /// Same gluing table with tetrahedra renamed by `new_id[old]`.
    pub fn relabel(&self, new_id: &[usize]) -> Triangulation {
        let mut out = Triangulation::with_tets(self.n());
        for t in 0..self.n() {
            for f in 0..4u8 {
                if let Some(g) = self.gluing(t, f) {
                    out.set_entry(new_id[t], f, Some(Gluing { tet: new_id[g.tet], perm: g.perm }));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_table_round_trip() {
        for (i, &(a, b)) in EDGES.iter().enumerate() {
            assert_eq!(edge_index(a, b), i);
            assert_eq!(edge_index(b, a), i);
        }
        assert_eq!(face_vertices(2), [0, 1, 3]);
        assert_eq!(fourth(0, 2, 3), 1);
    }

    #[test]
    fn glue_writes_both_sides() {
        let mut t = Triangulation::with_tets(2);
        let p = Perm::parse("1302").unwrap();
        t.glue(0, 0, 1, p);
        assert_eq!(t.gluing(1, 1), Some(Gluing { tet: 0, perm: p.inverse() }));
        t.unglue(1, 1);
        assert!(t.gluing(0, 0).is_none());
    }
}
