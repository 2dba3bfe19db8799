//! Unfolding a closed triangulation into a tree of tetrahedra whose
//! boundary faces are glued in pairs.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::triangulation::{edge_index, fourth, FaceSlot, Triangulation};

/// Two boundary faces of the ball that are glued in the base. `perm` maps
/// vertices of `a`'s tet to vertices of `b`'s tet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryPair {
    pub a: FaceSlot,
    pub b: FaceSlot,
    pub perm: Perm,
}

/// A boundary face together with an edge of it, as tet-local vertices.
pub type FaceEdge = (FaceSlot, (u8, u8));

fn sorted(a: u8, b: u8) -> (u8, u8) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub base: Triangulation,
    /// Ball tets with only the tree gluings present.
    pub tri: Triangulation,
    pub pairs: Vec<BoundaryPair>,
    /// Base tet of each ball tet.
    pub copy_of: Vec<usize>,
}

impl Ball {
    pub fn n(&self) -> usize {
        self.tri.n()
    }

    /// Interior gluings, each once from the smaller slot.
    pub fn tree(&self) -> Vec<(FaceSlot, FaceSlot, Perm)> {
        self.tri.face_pairs()
    }

    pub fn is_tree_face(&self, slot: FaceSlot) -> bool {
        self.tri.gluing(slot.0, slot.1).is_some()
    }

    /// Partner of a boundary face and the map of its tet's vertices.
    pub fn partner(&self, slot: FaceSlot) -> Option<(FaceSlot, Perm)> {
        self.pairs.iter().find_map(|p| {
            if p.a == slot {
                Some((p.b, p.perm))
            } else if p.b == slot {
                Some((p.a, p.perm.inverse()))
            } else {
                None
            }
        })
    }

    /// The ball reglued along all boundary pairs; isomorphic to the base.
    pub fn glued(&self) -> Triangulation {
        let mut t = self.tri.clone();
        for p in &self.pairs {
            t.glue(p.a.0, p.a.1, p.b.0, p.perm);
        }
        t
    }

    /// Walks inside the ball around the edge `{a, b}` of boundary face
    /// `slot`, returning the boundary face at the other end of the wedge
    /// chain and the number of wedges passed.
    pub fn walk_edge(&self, slot: FaceSlot, edge: (u8, u8)) -> (FaceEdge, usize) {
        let ((end, (a, b)), wedges) = self.walk_edge_oriented(slot, edge);
        ((end, sorted(a, b)), wedges)
    }

    /// As [`Ball::walk_edge`], but the returned edge keeps the order of the
    /// endpoints it was given.
    pub fn walk_edge_oriented(&self, slot: FaceSlot, edge: (u8, u8)) -> (FaceEdge, usize) {
        let (mut t, mut f) = slot;
        let (mut a, mut b) = edge;
        let mut wedges = 1;
        loop {
            let other = fourth(a, b, f);
            match self.tri.gluing(t, other) {
                None => return (((t, other), (a, b)), wedges),
                Some(g) => {
                    t = g.tet;
                    f = g.perm.apply(other);
                    a = g.perm.apply(a);
                    b = g.perm.apply(b);
                    wedges += 1;
                }
            }
        }
    }

    fn cross(&self, fe: FaceEdge) -> FaceEdge {
        let (slot, (a, b)) = fe;
        let (other, perm) = self.partner(slot).expect("boundary face has a partner");
        (other, sorted(perm.apply(a), perm.apply(b)))
    }

    /// Number of faces G₁, G₂, … met when walking from the image of `f2`
    /// around the base edge until the image of `f1` is reached. `f1` and
    /// `f2` must be the two ends of one wedge chain of edge `edge` (given
    /// in `f1`'s tet).
    pub fn face_distance(&self, f1: FaceSlot, f2: FaceSlot, edge: (u8, u8)) -> Result<usize> {
        let start = (f1, sorted(edge.0, edge.1));
        let (end, _) = self.walk_edge(f1, edge);
        if end.0 != f2 {
            return Err(Error::Precondition(format!("faces {f1:?} and {f2:?} do not share edge {edge:?}")));
        }
        let target = self.cross(start);
        let mut x = self.walk_edge(self.cross(end).0, self.cross(end).1).0;
        let cap = 4 * self.n() + 1;
        for count in 0..cap {
            if x == target {
                return Ok(count);
            }
            let y = self.cross(x);
            x = self.walk_edge(y.0, y.1).0;
        }
        Err(Error::ChainOpen)
    }

    /// Wedge chains of the ball as `(end, end, wedges, base edge class)`,
    /// one per ball edge class.
    pub fn segments(&self) -> Vec<(FaceEdge, FaceEdge, usize, usize)> {
        let (_, base_table) = self.base.edge_class_table();
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        for (t, f) in self.tri.boundary_faces() {
            let [x, y, z] = crate::triangulation::face_vertices(f);
            for (a, b) in [(x, y), (x, z), (y, z)] {
                let start = ((t, f), (a, b));
                if seen.contains(&start) {
                    continue;
                }
                let (end, wedges) = self.walk_edge((t, f), (a, b));
                seen.insert(start);
                seen.insert(end);
                let class = base_table[self.copy_of[t]][edge_index(a, b)];
                out.push((start, end, wedges, class));
            }
        }
        out
    }

    /// `m_e` for each base edge class: the number of wedge chains of the
    /// ball lying over it.
    pub fn boundary_weights(&self) -> Vec<usize> {
        let classes = self.base.edge_classes();
        let mut m = vec![0; classes.len()];
        for (_, _, _, class) in self.segments() {
            m[class] += 1;
        }
        m
    }

    /// Checks the tree, face accounting, exterior-edge and
    /// unique-common-simplex properties.
    pub fn check(&self) -> Result<()> {
        let n = self.n();
        let tree = self.tree();
        if tree.len() + 1 != n || !self.tri.is_connected() {
            return Err(Error::BallMove("interior gluings are not a spanning tree".into()));
        }
        if 2 * tree.len() + 2 * self.pairs.len() != 4 * n {
            return Err(Error::BallMove("face accounting fails".into()));
        }
        let mut used = std::collections::BTreeSet::new();
        for p in &self.pairs {
            if self.is_tree_face(p.a) || self.is_tree_face(p.b) || !used.insert(p.a) || !used.insert(p.b) {
                return Err(Error::BallMove(format!("bad boundary pair {p:?}")));
            }
        }
        if used.len() != self.tri.boundary_faces().len() {
            return Err(Error::BallMove("unpaired boundary face".into()));
        }
        for class in self.tri.edge_classes() {
            let exterior = class.members.iter().any(|&(t, e)| {
                // The faces containing edge {a, b} are the faces opposite the
                // other two vertices.
                let (a, b) = crate::triangulation::EDGES[e];
                let (c, d) = crate::triangulation::EDGES[5 - edge_index(a, b)];
                !self.is_tree_face((t, c)) || !self.is_tree_face((t, d))
            });
            if !exterior {
                return Err(Error::BallMove(format!("interior edge class at {:?}", class.members[0])));
            }
        }
        if !self.tri.unique_common_simplex().0 {
            return Err(Error::BallMove("ball lacks the unique common simplex property".into()));
        }
        Ok(())
    }

    /// Removes the interior face `r` and makes the boundary pair containing
    /// `g` interior.
    pub fn cut_and_reglue(&self, r: FaceSlot, g: FaceSlot) -> Result<Ball> {
        let Some(rg) = self.tri.gluing(r.0, r.1) else {
            return Err(Error::BallMove(format!("{r:?} is not an interior face")));
        };
        let Some(index) = self.pairs.iter().position(|p| p.a == g || p.b == g) else {
            return Err(Error::BallMove(format!("{g:?} is not a boundary face")));
        };
        let pair = self.pairs[index];
        let mut tri = self.tri.clone();
        tri.unglue(r.0, r.1);
        let side = reachable(&tri, r.0);
        if side[pair.a.0] == side[pair.b.0] {
            return Err(Error::BallMove(format!("gluing {g:?} does not reconnect the two sides of {r:?}")));
        }
        tri.glue(pair.a.0, pair.a.1, pair.b.0, pair.perm);
        let mut pairs = self.pairs.clone();
        pairs.remove(index);
        let r_other = (rg.tet, rg.perm.apply(r.1));
        let new_pair = if r < r_other {
            BoundaryPair { a: r, b: r_other, perm: rg.perm }
        } else {
            BoundaryPair { a: r_other, b: r, perm: rg.perm.inverse() }
        };
        pairs.push(new_pair);
        pairs.sort();
        let ball = Ball { base: self.base.clone(), tri, pairs, copy_of: self.copy_of.clone() };
        ball.check()?;
        Ok(ball)
    }
}

fn reachable(tri: &Triangulation, start: usize) -> Vec<bool> {
    let mut seen = vec![false; tri.n()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for f in 0..4u8 {
            if let Some(g) = tri.gluing(t, f) {
                if !seen[g.tet] {
                    seen[g.tet] = true;
                    queue.push_back(g.tet);
                }
            }
        }
    }
    seen
}

fn unfold_from(base: &Triangulation, root: usize) -> Ball {
    let n = base.n();
    let mut order = vec![root];
    let mut new_id = vec![usize::MAX; n];
    new_id[root] = 0;
    let mut tree_edges = Vec::new();
    let mut queue = VecDeque::from([root]);
    while let Some(t) = queue.pop_front() {
        for f in 0..4u8 {
            let g = base.gluing(t, f).expect("closed base");
            if new_id[g.tet] == usize::MAX {
                new_id[g.tet] = order.len();
                order.push(g.tet);
                queue.push_back(g.tet);
                tree_edges.push((t, f, g));
            }
        }
    }
    let mut tri = Triangulation::with_tets(n);
    for &(t, f, g) in &tree_edges {
        tri.glue(new_id[t], f, new_id[g.tet], g.perm);
    }
    let mut pairs = Vec::new();
    for ((t, f), _, perm) in base.face_pairs() {
        let (u, g) = (new_id[t], base.gluing(t, f).unwrap());
        if tri.gluing(u, f).is_some() {
            continue;
        }
        let a = (u, f);
        let b = (new_id[g.tet], perm.apply(f));
        pairs.push(if a < b {
            BoundaryPair { a, b, perm }
        } else {
            BoundaryPair { a: b, b: a, perm: perm.inverse() }
        });
    }
    pairs.sort();
    Ball { base: base.clone(), tri, pairs, copy_of: order }
}

/// Breadth-first unfolding from tet 0, lowest face first; other roots are
/// tried if the result fails a ball property.
pub fn unfold(base: &Triangulation) -> Result<Ball> {
    let report = base.validate();
    if !report.ok {
        return Err(Error::Invalid(format!("{:?}", report.violations)));
    }
    if base.n() < 2 {
        return Err(Error::TooSmall);
    }
    for root in 0..base.n() {
        let ball = unfold_from(base, root);
        if ball.check().is_ok() {
            return Ok(ball);
        }
    }
    Err(Error::UnfoldExhausted)
}

/// Per-base-edge-class sums of wedge counts over its chains.
pub fn wedge_sums(ball: &Ball) -> BTreeMap<usize, usize> {
    let mut out = BTreeMap::new();
    for (_, _, wedges, class) in ball.segments() {
        *out.entry(class).or_insert(0) += wedges;
    }
    out
}
