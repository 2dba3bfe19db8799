//! Building a closed normal surface that is not a vertex link: extend a quad
//! to a disc in the ball, carry its boundary across the face pairing, close
//! it up on the far side and resolve the crossings of the two halves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::ball::{unfold, Ball};
use crate::error::{Error, Result};
use crate::normal::{
    components, matching_matrix, quad_partner, reconstruct, search_solutions, DiscType, Flow,
    NormalCoords, QUADS,
};
use crate::triangulation::{edge_index, face_vertices, fourth, FaceSlot, Triangulation};

/// Node budget of the closing search, summed over its deepening rounds.
pub const CLOSURE_NODE_BUDGET: usize = 200_000;

/// Node budget of each bounded enumeration in the fallback search.
pub const FALLBACK_NODE_BUDGET: usize = 2_000_000;

/// An arc of a curve on the ball boundary: the face and the vertex it cuts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CurveArc {
    pub face: FaceSlot,
    pub cut: u8,
}

/// A disc in the ball with at most one normal disc per tetrahedron.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialDisc {
    pub ball: Ball,
    /// Ball tet to disc kind.
    pub discs: BTreeMap<usize, DiscType>,
    /// Arcs on boundary faces of the ball, sorted.
    pub frontier: Vec<CurveArc>,
}

impl PartialDisc {
    /// Discs placed in the tetrahedra of the glued-up triangulation.
    pub fn placed(&self) -> Vec<(usize, DiscType)> {
        self.discs.iter().map(|(&t, &k)| (self.ball.copy_of[t], k)).collect()
    }

    pub fn coords(&self) -> NormalCoords {
        let mut x = NormalCoords::zero(self.ball.n());
        for (t, k) in self.placed() {
            x.add(t, k, 1);
        }
        x
    }

    pub fn quad(&self) -> Option<(usize, DiscType)> {
        self.discs.iter().find(|(_, k)| k.is_quad()).map(|(&t, &k)| (t, k))
    }

    /// True if some disc meets face `slot` (interior or boundary).
    pub fn meets(&self, slot: FaceSlot) -> bool {
        self.discs.get(&slot.0).is_some_and(|k| k.arc_in(slot.1).is_some())
    }
}

/// Extends the quad of family `family` in ball tet `t0` across interior
/// faces by triangles until every free arc lies on the boundary.
pub fn extend_quad(ball: &Ball, t0: usize, family: usize) -> Result<PartialDisc> {
    if t0 >= ball.n() || family > 2 {
        return Err(Error::Range(format!("no quad family {family} in ball tet {t0}")));
    }
    let mut discs = BTreeMap::new();
    discs.insert(t0, DiscType::Quad(family as u8));
    let mut queue = VecDeque::from([t0]);
    let mut frontier = Vec::new();
    while let Some(t) = queue.pop_front() {
        let kind = discs[&t];
        for (f, v) in kind.arcs() {
            let Some(g) = ball.tri.gluing(t, f) else {
                frontier.push(CurveArc { face: (t, f), cut: v });
                continue;
            };
            let want = DiscType::Triangle(g.perm.apply(v));
            match discs.get(&g.tet) {
                None => {
                    discs.insert(g.tet, want);
                    queue.push_back(g.tet);
                }
                Some(&have) if have.arc_in(g.perm.apply(f)) == Some(g.perm.apply(v)) => {}
                Some(_) => return Err(Error::ConflictingDisc { tet: g.tet }),
            }
        }
    }
    frontier.sort();
    Ok(PartialDisc { ball: ball.clone(), discs, frontier })
}

/// The boundary arcs of `pd` in cyclic order, starting from the smallest.
/// Fails unless they form one closed curve.
pub fn order_curve(pd: &PartialDisc) -> Result<Vec<CurveArc>> {
    let Some(&start) = pd.frontier.first() else {
        return Err(Error::Construction("disc has no boundary".into()));
    };
    let on_face: BTreeMap<FaceSlot, u8> = pd.frontier.iter().map(|a| (a.face, a.cut)).collect();
    if on_face.len() != pd.frontier.len() {
        return Err(Error::Construction("two boundary arcs on one face".into()));
    }
    let mut curve = vec![start];
    let mut arc = start;
    // Each arc is left through the edge joining its cut vertex to `exit`.
    let mut exit = face_vertices(start.face.1).into_iter().filter(|&x| x != start.cut).max().unwrap();
    loop {
        let ((next, (p, q)), _) = pd.ball.walk_edge_oriented(arc.face, (arc.cut, exit));
        let cut = match on_face.get(&next) {
            Some(&c) if c == p || c == q => c,
            _ => return Err(Error::ChainOpen),
        };
        arc = CurveArc { face: next, cut };
        exit = fourth(p, q, next.1);
        if arc == start {
            break;
        }
        if curve.len() > pd.frontier.len() {
            return Err(Error::ChainOpen);
        }
        curve.push(arc);
    }
    if curve.len() != pd.frontier.len() {
        return Err(Error::Construction(format!(
            "boundary splits into several curves ({} of {} arcs on the first)",
            curve.len(),
            pd.frontier.len()
        )));
    }
    Ok(curve)
}

/// Edge shared by consecutive arcs `a` then `b` of a curve, in `a`'s tet.
fn shared_edge(ball: &Ball, a: CurveArc, b: CurveArc) -> Option<(u8, u8)> {
    let [x, y, z] = face_vertices(a.face.1);
    [(x, y), (x, z), (y, z)].into_iter().filter(|&(p, q)| p == a.cut || q == a.cut).find(|&e| {
        let ((end, (p, q)), _) = ball.walk_edge_oriented(a.face, e);
        end == b.face && (p == b.cut || q == b.cut)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transport {
    /// Image of each arc of the curve under its face pairing.
    pub images: Vec<CurveArc>,
    /// Face distance between arc `i` and arc `i + 1` (cyclically).
    pub distances: Vec<usize>,
    /// Maximal runs of images joined with distance zero.
    pub pieces: Vec<Vec<CurveArc>>,
    /// Images landing on a face that the curve itself crosses.
    pub overlaps: usize,
}

impl Transport {
    pub fn measure(&self) -> usize {
        self.distances.iter().sum()
    }

    pub fn is_connected(&self) -> bool {
        self.distances.iter().all(|&d| d == 0)
    }
}

/// Maps each arc of `curve` through the pairing of its face.
pub fn transport_boundary(ball: &Ball, curve: &[CurveArc]) -> Result<Transport> {
    let mut images = Vec::with_capacity(curve.len());
    for a in curve {
        let (face, perm) =
            ball.partner(a.face).ok_or_else(|| Error::Construction(format!("{:?} is not a boundary face", a.face)))?;
        images.push(CurveArc { face, cut: perm.apply(a.cut) });
    }
    let k = curve.len();
    let mut distances = Vec::with_capacity(k);
    for i in 0..k {
        let (a, b) = (curve[i], curve[(i + 1) % k]);
        let e = shared_edge(ball, a, b).ok_or(Error::ChainOpen)?;
        distances.push(ball.face_distance(a.face, b.face, e)?);
    }
    let mut pieces = Vec::new();
    // Start a piece right after a break, so no piece wraps around.
    let first = distances.iter().position(|&d| d > 0).map_or(0, |i| (i + 1) % k);
    let mut current = Vec::new();
    for step in 0..k {
        let i = (first + step) % k;
        current.push(images[i]);
        if distances[i] > 0 || step + 1 == k {
            pieces.push(std::mem::take(&mut current));
        }
    }
    let own: BTreeSet<FaceSlot> = curve.iter().map(|a| a.face).collect();
    let overlaps = images.iter().filter(|a| own.contains(&a.face)).count();
    Ok(Transport { images, distances, pieces, overlaps })
}

/// One accepted regluing step of the reconnection loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconnectMove {
    pub cut: FaceSlot,
    pub reglued: FaceSlot,
    pub measure_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reconnection {
    pub ball: Ball,
    pub moves: Vec<ReconnectMove>,
    /// Measure before the first move and after each move.
    pub trace: Vec<usize>,
    pub transport: Transport,
    /// True if no admissible move lowered the measure.
    pub stalled: bool,
}

/// Interior faces met while walking around `edge` from boundary face `slot`.
fn chain_faces(ball: &Ball, slot: FaceSlot, edge: (u8, u8)) -> Vec<FaceSlot> {
    let (mut t, mut f) = slot;
    let (mut a, mut b) = edge;
    let mut out = Vec::new();
    loop {
        let other = fourth(a, b, f);
        match ball.tri.gluing(t, other) {
            None => return out,
            Some(g) => {
                out.push((t, other));
                t = g.tet;
                f = g.perm.apply(other);
                a = g.perm.apply(a);
                b = g.perm.apply(b);
            }
        }
    }
}

/// Candidate `(R, G)` moves for a break between image arcs `i` and `i + 1`:
/// the face at the break first, then the other faces along the same edge
/// chain.
fn candidate_moves(ball: &Ball, tr: &Transport, curve: &[CurveArc], i: usize) -> Vec<(FaceSlot, FaceSlot)> {
    let k = curve.len();
    let img = tr.images[i];
    let Some(e) = shared_edge(ball, curve[i], curve[(i + 1) % k]) else {
        return Vec::new();
    };
    let Some((_, perm)) = ball.partner(curve[i].face) else {
        return Vec::new();
    };
    let e_img = (perm.apply(e.0), perm.apply(e.1));
    let mut rs = chain_faces(ball, img.face, e_img);
    let mut gs = Vec::new();
    let mut at = (img.face, e_img);
    for _ in 0..=tr.distances[i] {
        let ((g, ge), _) = ball.walk_edge_oriented(at.0, at.1);
        gs.push(g);
        rs.extend(chain_faces(ball, g, ge));
        let Some((g2, p)) = ball.partner(g) else { break };
        at = (g2, (p.apply(ge.0), p.apply(ge.1)));
    }
    let mut out = Vec::new();
    for &g in &gs {
        for &r in &rs {
            if !out.contains(&(r, g)) {
                out.push((r, g));
            }
        }
    }
    out
}

/// Regluing loop: while the transported curve is broken, cut an interior
/// face and glue a boundary pair so that the summed face distance drops.
/// Each move must keep the disc off the cut face and keep both curves off
/// the reglued pair.
pub fn reconnect(pd: &PartialDisc, t0: usize, family: usize) -> Result<Reconnection> {
    const MAX_CANDIDATES: usize = 24;
    // Each evaluation re-checks the whole ball, so large balls stop early.
    const MAX_EVALUATIONS: usize = 32;
    let mut ball = pd.ball.clone();
    let mut disc = pd.clone();
    let mut curve = order_curve(&disc)?;
    let mut tr = transport_boundary(&ball, &curve)?;
    let mut trace = vec![tr.measure()];
    let mut moves = Vec::new();
    let cap = 6 * ball.n() * ball.pairs.len();
    while !tr.is_connected() {
        if moves.len() >= cap {
            return Err(Error::Construction(format!("reconnection exceeded {cap} moves")));
        }
        let mut accepted = None;
        let mut evaluations = 0;
        'search: for i in (0..curve.len()).filter(|&i| tr.distances[i] > 0) {
            for (r, g) in candidate_moves(&ball, &tr, &curve, i).into_iter().take(MAX_CANDIDATES) {
                let Some(rg) = ball.tri.gluing(r.0, r.1) else { continue };
                let r_other = (rg.tet, rg.perm.apply(r.1));
                if disc.meets(r) || disc.meets(r_other) {
                    continue;
                }
                let Some((g_other, _)) = ball.partner(g) else { continue };
                let touched = curve.iter().chain(&tr.images).any(|a| a.face == g || a.face == g_other);
                if touched {
                    continue;
                }
                if evaluations == MAX_EVALUATIONS {
                    break 'search;
                }
                evaluations += 1;
                let Ok(next) = ball.cut_and_reglue(r, g) else { continue };
                let Ok(next_disc) = extend_quad(&next, t0, family) else { continue };
                if next_disc.discs != disc.discs {
                    continue;
                }
                let Ok(next_curve) = order_curve(&next_disc) else { continue };
                let Ok(next_tr) = transport_boundary(&next, &next_curve) else { continue };
                if next_tr.measure() < tr.measure() {
                    accepted = Some((r, g, next, next_disc, next_curve, next_tr));
                    break 'search;
                }
            }
        }
        let Some((r, g, next, next_disc, next_curve, next_tr)) = accepted else {
            return Ok(Reconnection { ball, moves, trace, transport: tr, stalled: true });
        };
        moves.push(ReconnectMove { cut: r, reglued: g, measure_after: next_tr.measure() });
        trace.push(next_tr.measure());
        ball = next;
        disc = next_disc;
        curve = next_curve;
        tr = next_tr;
    }
    Ok(Reconnection { ball, moves, trace, transport: tr, stalled: false })
}

/// A disc in `ball` with one normal disc per tet at most whose boundary
/// arcs are exactly `boundary`. In the tet `keep.0` of the glued-up
/// triangulation only quads of family `keep.1` are allowed. Chooses empty
/// tets and low disc columns first.
pub fn disc_with_boundary(
    ball: &Ball,
    boundary: &[CurveArc],
    keep: (usize, usize),
) -> Option<BTreeMap<usize, DiscType>> {
    let n = ball.n();
    let mut required: BTreeMap<FaceSlot, u8> = BTreeMap::new();
    for a in boundary {
        if required.insert(a.face, a.cut).is_some() {
            return None;
        }
    }
    let option = |o: usize| if o == 0 { None } else { Some(DiscType::from_column(o - 1)) };
    let arc = |o: usize, f: u8| option(o).and_then(|k| k.arc_in(f));
    let mut order = vec![0];
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let t = order[i];
        i += 1;
        for f in 0..4u8 {
            if let Some(g) = ball.tri.gluing(t, f) {
                if !seen[g.tet] {
                    seen[g.tet] = true;
                    parent[g.tet] = Some((t, f));
                    order.push(g.tet);
                }
            }
        }
    }
    let local_ok = |t: usize, o: usize| {
        if let Some(DiscType::Quad(q)) = option(o) {
            if ball.copy_of[t] == keep.0 && q as usize != keep.1 {
                return false;
            }
        }
        (0..4u8).all(|f| ball.tri.gluing(t, f).is_some() || arc(o, f) == required.get(&(t, f)).copied())
    };
    let compatible = |t: usize, o: usize, f: u8, oc: usize| {
        let g = ball.tri.gluing(t, f).unwrap();
        arc(o, f).map(|v| g.perm.apply(v)) == arc(oc, g.perm.apply(f))
    };
    let mut feasible = vec![[false; 8]; n];
    for &t in order.iter().rev() {
        for o in 0..8 {
            feasible[t][o] = local_ok(t, o)
                && (0..4u8).all(|f| match ball.tri.gluing(t, f) {
                    Some(g) if parent[g.tet] == Some((t, f)) => {
                        (0..8).any(|oc| feasible[g.tet][oc] && compatible(t, o, f, oc))
                    }
                    _ => true,
                });
        }
    }
    let root = (0..8).find(|&o| feasible[0][o])?;
    let mut choice = vec![0; n];
    choice[0] = root;
    for &t in &order[1..] {
        let (p, f) = parent[t].unwrap();
        choice[t] = (0..8).find(|&o| feasible[t][o] && compatible(p, choice[p], f, o))?;
    }
    let discs: BTreeMap<usize, DiscType> =
        (0..n).filter(|&t| choice[t] > 0).map(|t| (t, DiscType::from_column(choice[t] - 1))).collect();
    if discs.is_empty() {
        None
    } else {
        Some(discs)
    }
}

/// Adds discs to `start` until it solves the matching equations, keeping
/// it admissible. Iterative deepening on the number of added discs; each
/// step fixes the first unbalanced equation from its deficient side.
pub fn close_up(tri: &Triangulation, start: &NormalCoords, budget: usize) -> Result<Vec<(usize, DiscType)>> {
    let b = matching_matrix(tri);
    let mut col_rows = vec![Vec::new(); b.ncols];
    for (r, row) in b.rows.iter().enumerate() {
        for &(c, v) in &row.entries {
            col_rows[c].push((r, v));
        }
    }
    let sums: Vec<i64> = b.apply(start);
    let unbalanced: BTreeSet<usize> = (0..sums.len()).filter(|&r| sums[r] != 0).collect();
    let total: i64 = sums.iter().map(|s| s.abs()).sum();
    let mut s = Closure {
        rows: &b.rows,
        col_rows,
        sums,
        unbalanced,
        total,
        x: start.clone(),
        added: Vec::new(),
        nodes: 0,
        budget,
        next_limit: usize::MAX,
    };
    let mut limit = s.heuristic();
    loop {
        s.next_limit = usize::MAX;
        if s.dfs(limit) {
            return Ok(s.added);
        }
        if s.nodes >= budget {
            return Err(Error::Construction(format!("closing search exhausted {budget} nodes")));
        }
        if s.next_limit == usize::MAX {
            return Err(Error::Construction("no admissible closing exists".into()));
        }
        limit = s.next_limit;
    }
}

struct Closure<'a> {
    rows: &'a [crate::normal::MatchRow],
    col_rows: Vec<Vec<(usize, i32)>>,
    sums: Vec<i64>,
    unbalanced: BTreeSet<usize>,
    total: i64,
    x: NormalCoords,
    added: Vec<(usize, DiscType)>,
    nodes: usize,
    budget: usize,
    next_limit: usize,
}

impl Closure<'_> {
    fn heuristic(&self) -> usize {
        ((self.total + 3) / 4) as usize
    }

    fn bump(&mut self, col: usize, delta: i64) {
        for i in 0..self.col_rows[col].len() {
            let (r, v) = self.col_rows[col][i];
            let old = self.sums[r];
            let new = old + v as i64 * delta;
            self.total += new.abs() - old.abs();
            self.sums[r] = new;
            if new == 0 {
                self.unbalanced.remove(&r);
            } else {
                self.unbalanced.insert(r);
            }
        }
        self.x.0[col] = (self.x.0[col] as i64 + delta) as u32;
    }

    fn allowed(&self, col: usize) -> bool {
        let t = col / 7;
        col % 7 < 4 || (4..7).all(|k| 7 * t + k == col || self.x.0[7 * t + k] == 0)
    }

    fn dfs(&mut self, limit: usize) -> bool {
        if self.total == 0 {
            return true;
        }
        let f = self.added.len() + self.heuristic();
        if f > limit {
            self.next_limit = self.next_limit.min(f);
            return false;
        }
        self.nodes += 1;
        if self.nodes >= self.budget {
            return false;
        }
        let r = *self.unbalanced.iter().next().unwrap();
        let sign = if self.sums[r] > 0 { -1 } else { 1 };
        let cols: Vec<usize> = self.rows[r].entries.iter().filter(|&&(_, v)| v == sign).map(|&(c, _)| c).collect();
        for col in cols {
            if !self.allowed(col) {
                continue;
            }
            self.bump(col, 1);
            self.added.push((col / 7, DiscType::from_column(col % 7)));
            if self.dfs(limit) {
                return true;
            }
            self.added.pop();
            self.bump(col, -1);
            if self.nodes >= self.budget {
                return false;
            }
        }
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CrossingKind {
    TriTri,
    TriQuad,
    QuadQuad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Crossing {
    pub tet: usize,
    /// Index into the first half's discs, then into the second's.
    pub first: usize,
    pub second: usize,
    pub kind: CrossingKind,
}

/// Two disc families placed in the same triangulation, each embedded on
/// its own, together with the pairs that may cross.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingularSurface {
    pub n_tets: usize,
    pub first: Vec<(usize, DiscType)>,
    pub second: Vec<(usize, DiscType)>,
    pub crossings: Vec<Crossing>,
}

impl SingularSurface {
    pub fn coords(&self) -> NormalCoords {
        let mut x = NormalCoords::zero(self.n_tets);
        for &(t, k) in self.first.iter().chain(&self.second) {
            x.add(t, k, 1);
        }
        x
    }
}

fn crossing_kind(a: DiscType, b: DiscType) -> Option<CrossingKind> {
    match (a, b) {
        (DiscType::Triangle(v), DiscType::Triangle(w)) => (v == w).then_some(CrossingKind::TriTri),
        (DiscType::Quad(p), DiscType::Quad(q)) => (p != q).then_some(CrossingKind::QuadQuad),
        _ => Some(CrossingKind::TriQuad),
    }
}

/// Unions the two halves and records every pair of discs, one from each
/// half, sharing a tet and able to cross.
pub fn pair(n_tets: usize, first: &[(usize, DiscType)], second: &[(usize, DiscType)]) -> SingularSurface {
    let mut by_tet: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, &(u, _)) in second.iter().enumerate() {
        by_tet.entry(u).or_default().push(j);
    }
    let mut crossings = Vec::new();
    for (i, &(t, a)) in first.iter().enumerate() {
        for &j in by_tet.get(&t).map(|v| v.as_slice()).unwrap_or(&[]) {
            if let Some(kind) = crossing_kind(a, second[j].1) {
                crossings.push(Crossing { tet: t, first: i, second: j, kind });
            }
        }
    }
    crossings.sort();
    SingularSurface { n_tets, first: first.to_vec(), second: second.to_vec(), crossings }
}

/// Shape of an arc inside one face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArcShape {
    /// Separates this vertex from the other two.
    Cut(u8),
    /// Leaves and returns to the same edge.
    Return(u8, u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GArc {
    pub face: u8,
    pub shape: ArcShape,
}

impl GArc {
    /// Edge indices of the two endpoints.
    pub fn endpoints(self) -> [usize; 2] {
        match self.shape {
            ArcShape::Cut(v) => {
                let mut others = face_vertices(self.face).into_iter().filter(|&x| x != v);
                let (x, y) = (others.next().unwrap(), others.next().unwrap());
                [edge_index(v, x), edge_index(v, y)]
            }
            ArcShape::Return(a, b) => [edge_index(a, b); 2],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GKind {
    Normal(DiscType),
    PseudoTriangular,
    Tunnel,
}

impl fmt::Display for GKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GKind::Normal(d) => write!(f, "{d}"),
            GKind::PseudoTriangular => write!(f, "pseudo"),
            GKind::Tunnel => write!(f, "tunnel"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GDisc {
    pub tet: usize,
    pub kind: GKind,
    /// Sorted.
    pub arcs: Vec<GArc>,
}

impl GDisc {
    pub fn normal(tet: usize, kind: DiscType) -> GDisc {
        let arcs = kind.arcs().into_iter().map(|(face, v)| GArc { face, shape: ArcShape::Cut(v) }).collect();
        GDisc { tet, kind: GKind::Normal(kind), arcs }
    }

    /// Classifies a disc by its boundary arcs.
    pub fn from_arcs(tet: usize, mut arcs: Vec<GArc>) -> GDisc {
        arcs.sort();
        let kind = if arcs.iter().any(|a| matches!(a.shape, ArcShape::Return(..))) {
            GKind::Tunnel
        } else {
            (0..7)
                .map(DiscType::from_column)
                .find(|d| GDisc::normal(tet, *d).arcs == arcs)
                .map_or(GKind::PseudoTriangular, GKind::Normal)
        };
        GDisc { tet, kind, arcs }
    }

    pub fn return_arcs(&self) -> Vec<(u8, (u8, u8))> {
        self.arcs
            .iter()
            .filter_map(|a| match a.shape {
                ArcShape::Return(x, y) => Some((a.face, (x, y))),
                ArcShape::Cut(_) => None,
            })
            .collect()
    }
}

/// Per-face multiset of arc endpoints (as edge indices), faces 0..4.
pub fn endpoint_multisets(discs: &[GDisc]) -> [Vec<usize>; 4] {
    let mut out: [Vec<usize>; 4] = Default::default();
    for d in discs {
        for a in &d.arcs {
            out[a.face as usize].extend(a.endpoints());
        }
    }
    for v in &mut out {
        v.sort();
    }
    out
}

/// Per-face multiset of arcs, faces 0..4.
pub fn arc_multisets(discs: &[GDisc]) -> [Vec<GArc>; 4] {
    let mut out: [Vec<GArc>; 4] = Default::default();
    for d in discs {
        for a in &d.arcs {
            out[a.face as usize].push(*a);
        }
    }
    for v in &mut out {
        v.sort();
    }
    out
}

/// Short digest of the per-face endpoint multisets.
pub fn arc_checksum(discs: &[GDisc]) -> String {
    let mut h = Sha256::new();
    for (f, ends) in endpoint_multisets(discs).iter().enumerate() {
        h.update(format!("{f}:{ends:?};"));
    }
    hex::encode(&h.finalize()[..8])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    B,
    C,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::B => "b",
            Branch::C => "c",
        })
    }
}

/// Boundary cycle of a quad as arcs between consecutive corners, with the
/// corner edge at the start of each arc.
fn quad_cycle(q: usize) -> Vec<(usize, GArc)> {
    let ((a, b), (c, d)) = QUADS[q];
    let corners = [(a, c), (a, d), (b, d), (b, c)];
    (0..4)
        .map(|i| {
            let (p, x) = corners[i];
            let (p2, y) = corners[(i + 1) % 4];
            let shared = if p == p2 { p } else { x };
            let (u, w) = if p == p2 { (x, y) } else { (p, p2) };
            let face = fourth(shared, u, w);
            (edge_index(p, x), GArc { face, shape: ArcShape::Cut(shared) })
        })
        .collect()
}

/// Splits a quad's cycle at corners on `cut_edges`, returning the half with
/// the smallest arc first.
fn quad_halves(q: usize, cut_edges: &[usize; 2]) -> [Vec<GArc>; 2] {
    let cycle = quad_cycle(q);
    let start = cycle.iter().position(|(e, _)| *e == cut_edges[0]).unwrap();
    let mut halves = [Vec::new(), Vec::new()];
    let mut side = 0;
    for k in 0..4 {
        let (e, arc) = cycle[(start + k) % 4];
        if k > 0 && cut_edges.contains(&e) {
            side = 1;
        }
        halves[side].push(arc);
    }
    let min0 = halves[0].iter().min().copied();
    let min1 = halves[1].iter().min().copied();
    if min1 < min0 {
        halves.swap(0, 1);
    }
    halves
}

/// Cuts two crossing quads along their common edges and reassembles the
/// halves: branch b joins like halves, branch c swaps them.
pub fn quadrilateral_surgery(tet: usize, q1: DiscType, q2: DiscType, branch: Branch) -> Result<[GDisc; 2]> {
    let (DiscType::Quad(a), DiscType::Quad(b)) = (q1, q2) else {
        return Err(Error::Surgery(format!("{q1} and {q2} are not both quads")));
    };
    if a == b {
        return Err(Error::Surgery(format!("{q1} and {q2} are parallel")));
    }
    let ea: BTreeSet<usize> = q1.corners().into_iter().collect();
    let common: Vec<usize> = q2.corners().into_iter().filter(|e| ea.contains(e)).collect();
    let cut = [common[0], common[1]];
    let h1 = quad_halves(a as usize, &cut);
    let h2 = quad_halves(b as usize, &cut);
    let join = |x: &Vec<GArc>, y: &Vec<GArc>| GDisc::from_arcs(tet, x.iter().chain(y).copied().collect());
    Ok(match branch {
        Branch::B => [join(&h1[0], &h2[0]), join(&h1[1], &h2[1])],
        Branch::C => [join(&h1[0], &h2[1]), join(&h1[1], &h2[0])],
    })
}

/// Triangle `T_v` against quad `Q(va|bc)`. The essential surgery returns
/// the two discs pulled apart; the other one returns `T_a` and a tunnel
/// disc with return arcs on faces `b` and `c`.
pub fn triangular_surgery(tet: usize, p: DiscType, q: DiscType, essential: bool) -> Result<Vec<GDisc>> {
    let (DiscType::Triangle(v), DiscType::Quad(family)) = (p, q) else {
        return Err(Error::Surgery(format!("{p} and {q} are not a triangle and a quad")));
    };
    if essential {
        return Ok(vec![GDisc::normal(tet, p), GDisc::normal(tet, q)]);
    }
    let a = quad_partner(family as usize, v);
    let mut rest = (0..4u8).filter(|&x| x != v && x != a);
    let (b, c) = (rest.next().unwrap(), rest.next().unwrap());
    let tunnel = GDisc::from_arcs(
        tet,
        vec![
            GArc { face: a, shape: ArcShape::Cut(v) },
            GArc { face: a, shape: ArcShape::Cut(v) },
            GArc { face: b, shape: ArcShape::Return(v.min(c), v.max(c)) },
            GArc { face: c, shape: ArcShape::Return(v.min(b), v.max(b)) },
        ],
    );
    Ok(vec![GDisc::normal(tet, DiscType::Triangle(a)), tunnel])
}

/// Faces of `tet` holding the return arcs of a tunnel from
/// [`triangular_surgery`].
pub fn tunnel_faces(p: DiscType, q: DiscType) -> Option<[u8; 2]> {
    let (DiscType::Triangle(v), DiscType::Quad(family)) = (p, q) else {
        return None;
    };
    let a = quad_partner(family as usize, v);
    let mut rest = (0..4u8).filter(|&x| x != v && x != a);
    Some([rest.next().unwrap(), rest.next().unwrap()])
}

/// Nesting order of two triangles in one tet, innermost first. Triangles
/// at different vertices are disjoint already and keep their order.
pub fn trivial_isotopy(_tet: usize, p1: DiscType, p2: DiscType) -> Result<[DiscType; 2]> {
    if p1.is_quad() || p2.is_quad() {
        return Err(Error::Surgery(format!("{p1} and {p2} are not both triangles")));
    }
    Ok([p1, p2])
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeneralizedSurface {
    pub discs: Vec<GDisc>,
}

impl GeneralizedSurface {
    pub fn from_normal(discs: &[(usize, DiscType)]) -> Self {
        GeneralizedSurface { discs: discs.iter().map(|&(t, k)| GDisc::normal(t, k)).collect() }
    }

    pub fn in_tet(&self, tet: usize) -> Vec<GDisc> {
        self.discs.iter().filter(|d| d.tet == tet).cloned().collect()
    }

    pub fn count(&self, kind: GKind) -> usize {
        self.discs.iter().filter(|d| d.kind == kind).count()
    }

    pub fn is_normal(&self) -> bool {
        self.discs.iter().all(|d| matches!(d.kind, GKind::Normal(_)))
    }

    pub fn coords(&self, n_tets: usize) -> Option<NormalCoords> {
        let mut x = NormalCoords::zero(n_tets);
        for d in &self.discs {
            let GKind::Normal(k) = d.kind else { return None };
            x.add(d.tet, k, 1);
        }
        Some(x)
    }
}

/// Tunnel discs linked through their tunnel faces. A link joins a return
/// arc to a return arc on the glued face along the image edge. Returns the
/// first chain, in disc order, in which every tunnel has both links.
pub fn detect_cyclic_tunnel(tri: &Triangulation, s: &GeneralizedSurface) -> Option<Vec<usize>> {
    let tunnels: Vec<usize> = (0..s.discs.len()).filter(|&i| s.discs[i].kind == GKind::Tunnel).collect();
    let mut free: BTreeMap<(usize, u8, (u8, u8)), Vec<(usize, usize)>> = BTreeMap::new();
    for &i in &tunnels {
        for (k, (f, e)) in s.discs[i].return_arcs().into_iter().enumerate() {
            free.entry((s.discs[i].tet, f, e)).or_default().push((i, k));
        }
    }
    let mut links: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut used = BTreeSet::new();
    for &i in &tunnels {
        for (k, (f, (x, y))) in s.discs[i].return_arcs().into_iter().enumerate() {
            if used.contains(&(i, k)) {
                continue;
            }
            let Some(g) = tri.gluing(s.discs[i].tet, f) else { continue };
            let (px, py) = (g.perm.apply(x), g.perm.apply(y));
            let key = (g.tet, g.perm.apply(f), (px.min(py), px.max(py)));
            let found =
                free.get(&key).and_then(|c| c.iter().copied().find(|&slot| slot != (i, k) && !used.contains(&slot)));
            if let Some((j, kj)) = found {
                used.insert((i, k));
                used.insert((j, kj));
                links.entry(i).or_default().push(j);
                links.entry(j).or_default().push(i);
            }
        }
    }
    let mut seen = BTreeSet::new();
    for &i in &tunnels {
        if seen.contains(&i) {
            continue;
        }
        let mut chain = vec![i];
        seen.insert(i);
        let mut k = 0;
        while k < chain.len() {
            for &j in links.get(&chain[k]).map(|v| v.as_slice()).unwrap_or(&[]) {
                if seen.insert(j) {
                    chain.push(j);
                }
            }
            k += 1;
        }
        let closed = chain.iter().all(|d| links.get(d).map_or(0, |v| v.len()) == 2);
        if closed {
            chain.sort();
            return Some(chain);
        }
    }
    None
}

/// One logged isotopy or surgery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub step: usize,
    pub tet: usize,
    pub op: &'static str,
    pub inputs: String,
    pub outputs: String,
    pub branch: String,
    pub before: String,
    pub after: String,
    pub intact: bool,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\ttet={}\t{}\t{} -> {}\tbranch={}\tchecksum={}->{}\t{}",
            self.step,
            self.tet,
            self.op,
            self.inputs,
            self.outputs,
            self.branch,
            self.before,
            self.after,
            if self.intact { "intact" } else { "BROKEN" }
        )
    }
}

fn names(discs: &[GDisc]) -> String {
    discs.iter().map(|d| d.kind.to_string()).collect::<Vec<_>>().join("+")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub surface: GeneralizedSurface,
    pub coords: NormalCoords,
    pub log: Vec<LogEntry>,
    /// Tets of the cyclic tunnel chain that was re-resolved, if any.
    pub cyclic_tunnel: Option<Vec<usize>>,
    pub max_pseudo: usize,
}

struct Resolver {
    tets: BTreeMap<usize, Vec<GDisc>>,
    log: Vec<LogEntry>,
    cap: usize,
    pseudo: usize,
    max_pseudo: usize,
}

impl Resolver {
    /// Replaces the discs `remove` of `tet` with `add`, logging it.
    fn replace(&mut self, tet: usize, op: &'static str, branch: &str, remove: &[GDisc], add: Vec<GDisc>) -> Result<()> {
        if self.log.len() >= self.cap {
            return Err(Error::Construction(format!("resolution exceeded {} steps", self.cap)));
        }
        let (before, after) = (arc_checksum(remove), arc_checksum(&add));
        let entry = LogEntry {
            step: self.log.len(),
            tet,
            op,
            inputs: names(remove),
            outputs: names(&add),
            branch: branch.to_string(),
            intact: before == after,
            before,
            after,
        };
        self.log.push(entry);
        let bucket = self.tets.entry(tet).or_default();
        for d in remove {
            let i = bucket.iter().position(|x| x == d).expect("disc present");
            bucket.remove(i);
        }
        let is_pseudo = |d: &GDisc| d.kind == GKind::PseudoTriangular;
        self.pseudo -= remove.iter().filter(|d| is_pseudo(d)).count();
        self.pseudo += add.iter().filter(|d| is_pseudo(d)).count();
        bucket.extend(add);
        bucket.sort();
        self.max_pseudo = self.max_pseudo.max(self.pseudo);
        if self.max_pseudo > 1 {
            return Err(Error::Construction("more than one pseudo-triangular disc".into()));
        }
        Ok(())
    }

    fn surface(&self) -> GeneralizedSurface {
        GeneralizedSurface { discs: self.tets.values().flatten().cloned().collect() }
    }
}

/// Resolves the crossings of `s`: nests crossing triangles, runs the
/// non-essential triangular surgery at the first triangle/quad crossing
/// and along the tunnel chain it starts, redoes that chain essentially
/// when it closes up or fails to continue, and pulls every other
/// triangle/quad crossing apart. Quad/quad crossings are cut but leave
/// pseudo-triangles, which is reported as an error.
pub fn resolve(tri: &Triangulation, s: &SingularSurface) -> Result<Resolution> {
    let discs = s.first.len() + s.second.len();
    let mut r = Resolver { tets: BTreeMap::new(), log: Vec::new(), cap: (4 * discs * discs).max(1), pseudo: 0, max_pseudo: 0 };
    for &(t, k) in s.first.iter().chain(&s.second) {
        r.tets.entry(t).or_default().push(GDisc::normal(t, k));
    }
    for bucket in r.tets.values_mut() {
        bucket.sort();
    }
    let normal = |t: usize, a: DiscType, b: DiscType| [GDisc::normal(t, a), GDisc::normal(t, b)];
    for c in s.crossings.iter().filter(|c| c.kind == CrossingKind::TriTri) {
        let (a, b) = (s.first[c.first].1, s.second[c.second].1);
        let order = trivial_isotopy(c.tet, a, b)?;
        let out = order.iter().map(|&k| GDisc::normal(c.tet, k)).collect();
        r.replace(c.tet, "isotopy", "-", &normal(c.tet, a, b), out)?;
    }
    for c in s.crossings.iter().filter(|c| c.kind == CrossingKind::QuadQuad) {
        let (a, b) = (s.first[c.first].1, s.second[c.second].1);
        let pick = [Branch::B, Branch::C]
            .into_iter()
            .find(|&br| {
                quadrilateral_surgery(c.tet, a, b, br)
                    .map(|o| o.iter().all(|d| d.kind != GKind::PseudoTriangular))
                    .unwrap_or(false)
            })
            .unwrap_or(Branch::B);
        let out = quadrilateral_surgery(c.tet, a, b, pick)?;
        r.replace(c.tet, "quadrilateral", &pick.to_string(), &normal(c.tet, a, b), out.to_vec())?;
    }
    if r.pseudo > 0 {
        return Err(Error::Surgery("quad/quad crossing leaves a pseudo-triangular disc".into()));
    }
    // Triangle/quad crossings as (triangle, quad), by tet.
    let mut pending: BTreeMap<usize, VecDeque<(DiscType, DiscType)>> = BTreeMap::new();
    for c in s.crossings.iter().filter(|c| c.kind == CrossingKind::TriQuad) {
        let (a, b) = (s.first[c.first].1, s.second[c.second].1);
        pending.entry(c.tet).or_default().push_back(if a.is_quad() { (b, a) } else { (a, b) });
    }
    let mut cyclic = None;
    let first = pending.iter_mut().next().map(|(&t, q)| (t, q.pop_front().unwrap()));
    if let Some((t0, (p0, q0))) = first {
        let mut chain = vec![(t0, p0, q0)];
        let mut queue = VecDeque::from([(t0, p0, q0)]);
        let cut = |r: &mut Resolver, t: usize, p: DiscType, q: DiscType| -> Result<()> {
            let out = triangular_surgery(t, p, q, false)?;
            r.replace(t, "triangular", "non-essential", &normal(t, p, q), out)
        };
        cut(&mut r, t0, p0, q0)?;
        while let Some((t, p, q)) = queue.pop_front() {
            let tunnel = triangular_surgery(t, p, q, false)?.pop().unwrap();
            for (f, (x, y)) in tunnel.return_arcs() {
                let Some(g) = tri.gluing(t, f) else { continue };
                let (px, py) = (g.perm.apply(x), g.perm.apply(y));
                let want = (g.perm.apply(f), (px.min(py), px.max(py)));
                let Some(here) = pending.get_mut(&g.tet) else { continue };
                let hit = here.iter().position(|&(pu, qu)| {
                    triangular_surgery(g.tet, pu, qu, false).map(|o| o[1].return_arcs().contains(&want)).unwrap_or(false)
                });
                if let Some(k) = hit {
                    let (pu, qu) = here.remove(k).unwrap();
                    cut(&mut r, g.tet, pu, qu)?;
                    chain.push((g.tet, pu, qu));
                    queue.push_back((g.tet, pu, qu));
                }
            }
        }
        let gs = r.surface();
        cyclic = detect_cyclic_tunnel(tri, &gs).map(|c| c.iter().map(|&i| gs.discs[i].tet).collect());
        let op = if cyclic.is_some() { "cyclic-chain-essential" } else { "open-chain-essential" };
        for (t, p, q) in chain {
            let non = triangular_surgery(t, p, q, false)?;
            let ess = triangular_surgery(t, p, q, true)?;
            r.replace(t, op, "essential", &non, ess.clone())?;
            // The two variants must agree off the tunnel faces.
            let faces = tunnel_faces(p, q).unwrap();
            let (an, ae) = (arc_multisets(&non), arc_multisets(&ess));
            let same = (0..4u8).filter(|f| !faces.contains(f)).all(|f| an[f as usize] == ae[f as usize]);
            r.log.last_mut().unwrap().intact &= same;
        }
    }
    for (t, here) in pending {
        for (p, q) in here {
            let out = triangular_surgery(t, p, q, true)?;
            r.replace(t, "triangular", "essential", &normal(t, p, q), out)?;
        }
    }
    let surface = r.surface();
    let coords = surface.coords(s.n_tets).ok_or_else(|| Error::Surgery("resolution left generalized discs".into()))?;
    Ok(Resolution { surface, coords, log: r.log, cyclic_tunnel: cyclic, max_pseudo: r.max_pseudo })
}

/// How the far side of the starting disc was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Closing {
    /// A single disc in the reglued ball bounding the transported curve.
    Disc,
    /// The bounded search for discs balancing the matching equations.
    Search,
    /// An edge-linking surface plus the links of the start tet's cusps,
    /// less the starting disc.
    LinkSum,
    /// Not built constructively.
    None,
}

impl fmt::Display for Closing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Closing::Disc => "disc",
            Closing::Search => "search",
            Closing::LinkSum => "edge-link",
            Closing::None => "none",
        })
    }
}

/// Discs completing `c1` to a closed admissible surface: the edge-linking
/// surface of an edge of the start quad plus the links of the cusps at the
/// start tet's corners, minus `c1`.
pub fn link_sum_closure(tri: &Triangulation, c1: &NormalCoords, start: usize, family: usize) -> Option<Vec<(usize, DiscType)>> {
    let (classes, table) = tri.edge_class_table();
    let cusps = tri.cusp_classes();
    let mut links = NormalCoords::zero(tri.n());
    let mut used = BTreeSet::new();
    for v in 0..4u8 {
        let c = cusps.iter().position(|c| c.corners.binary_search(&(start, v)).is_ok()).unwrap();
        if used.insert(c) {
            for &(t, w) in &cusps[c].corners {
                links.add(t, DiscType::Triangle(w), 1);
            }
        }
    }
    let ((a, b), (c, d)) = QUADS[family];
    for (x, y) in [(a, b), (c, d)] {
        let Some(s) = crate::normal::edge_link_surface(tri, &classes[table[start][edge_index(x, y)]]) else { continue };
        let total: Vec<u32> = s.0.iter().zip(&links.0).map(|(p, q)| p + q).collect();
        if total.iter().zip(&c1.0).any(|(t, k)| t < k) || !NormalCoords(total.clone()).is_admissible() {
            continue;
        }
        let mut out = Vec::new();
        for (i, (t, k)) in total.iter().zip(&c1.0).enumerate() {
            for _ in 0..t - k {
                out.push((i / 7, DiscType::from_column(i % 7)));
            }
        }
        return Some(out);
    }
    None
}

/// Outcome of the surface construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Construction {
    pub coords: NormalCoords,
    pub fallback: bool,
    /// Quad family of the starting disc and its tet in the input.
    pub family: Option<usize>,
    pub start_tet: Option<usize>,
    pub curve_arcs: usize,
    pub pieces: usize,
    pub overlaps: usize,
    pub reconnect_trace: Vec<usize>,
    pub closing: Closing,
    pub log: Vec<LogEntry>,
    pub notes: Vec<String>,
}

impl Construction {
    pub fn checksums_intact(&self) -> bool {
        self.log.iter().all(|e| e.intact)
    }

    pub fn log_text(&self) -> String {
        let mut out = String::new();
        for note in &self.notes {
            out.push_str(&format!("# {note}\n"));
        }
        for e in &self.log {
            out.push_str(&format!("{e}\n"));
        }
        out
    }
}

/// Component of `x` holding a quad, preferring a quad of family `family`
/// in tet `tet`.
fn quad_component(tri: &Triangulation, x: &NormalCoords, prefer: Option<(usize, usize)>) -> Result<NormalCoords> {
    let whole = reconstruct(tri, x)?;
    let comps = components(tri, &whole);
    let has = |c: &crate::normal::DiscComplex, want: Option<(usize, usize)>| {
        c.discs.iter().any(|d| match (d.kind, want) {
            (DiscType::Quad(q), Some((t, fam))) => d.tet == t && q as usize == fam,
            (DiscType::Quad(_), None) => true,
            _ => false,
        })
    };
    let pick = comps
        .iter()
        .find(|c| prefer.is_some() && has(c, prefer))
        .or_else(|| comps.iter().find(|c| has(c, None)))
        .ok_or_else(|| Error::Construction("no component carries a quad".into()))?;
    Ok(pick.coords())
}

fn check_output(tri: &Triangulation, x: &NormalCoords) -> Result<()> {
    let b = matching_matrix(tri);
    if !crate::normal::is_solution(&b, x) || !x.is_admissible() || x.quad_count() == 0 {
        return Err(Error::Construction("output fails the matching, admissibility or quad check".into()));
    }
    Ok(())
}

struct Attempt {
    coords: NormalCoords,
    curve_arcs: usize,
    pieces: usize,
    overlaps: usize,
    trace: Vec<usize>,
    closing: Closing,
    log: Vec<LogEntry>,
    notes: Vec<String>,
}

fn attempt(tri: &Triangulation, ball: &Ball, family: usize) -> Result<Option<Attempt>> {
    let c1 = extend_quad(ball, 0, family)?;
    let curve = order_curve(&c1)?;
    let tr = transport_boundary(ball, &curve)?;
    let rec = reconnect(&c1, 0, family)?;
    let start = ball.copy_of[0];
    let mut notes = vec![format!(
        "family {} at tet {start}: {} discs, {} boundary arcs, {} image pieces, {} images on own faces",
        QUADS_NAME[family],
        c1.discs.len(),
        curve.len(),
        tr.pieces.len(),
        tr.overlaps
    )];
    notes.push(format!("reconnection measures {:?}, stalled={}", rec.trace, rec.stalled));
    let mut second = None;
    if !rec.stalled {
        if let Some(discs) = disc_with_boundary(&rec.ball, &rec.transport.images, (start, family)) {
            let far = PartialDisc { ball: rec.ball.clone(), discs, frontier: Vec::new() };
            let others: Vec<NormalCoords> = (0..3)
                .filter(|&q| q != family)
                .filter_map(|q| extend_quad(ball, 0, q).ok())
                .map(|d| d.coords())
                .collect();
            if others.contains(&far.coords()) {
                notes.push("far disc coincides with another quad's extension; moving on".into());
                return Ok(None);
            }
            second = Some(far.placed());
        } else {
            notes.push("no single disc bounds the transported curve".into());
        }
    }
    let (closing, second) = match second {
        Some(s) => (Closing::Disc, s),
        None => match close_up(tri, &c1.coords(), CLOSURE_NODE_BUDGET) {
            Ok(added) => {
                notes.push(format!("closing search added {} discs", added.len()));
                (Closing::Search, added)
            }
            Err(e) => {
                notes.push(format!("{e}"));
                let added = link_sum_closure(tri, &c1.coords(), start, family)
                    .ok_or_else(|| Error::Construction("no edge-linking closure contains the partial disc".into()))?;
                notes.push(format!("edge-linking closure added {} discs", added.len()));
                (Closing::LinkSum, added)
            }
        },
    };
    let s1 = pair(tri.n(), &c1.placed(), &second);
    notes.push(format!("{} crossings", s1.crossings.len()));
    let res = resolve(tri, &s1)?;
    let coords = quad_component(tri, &res.coords, Some((start, family)))?;
    check_output(tri, &coords)?;
    Ok(Some(Attempt {
        coords,
        curve_arcs: curve.len(),
        pieces: tr.pieces.len(),
        overlaps: tr.overlaps,
        trace: rec.trace,
        closing,
        log: res.log,
        notes,
    }))
}

const QUADS_NAME: [&str; 3] = crate::normal::QUAD_NAMES;

/// Bounded search for an admissible solution with a quad whose quad
/// component is returned.
pub fn fallback_surface(tri: &Triangulation) -> Result<NormalCoords> {
    for bound in 1..=3 {
        let mut found = None;
        search_solutions(tri, bound, Some(FALLBACK_NODE_BUDGET), &mut |x| {
            if x.quad_count() > 0 {
                found = Some(x.clone());
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        if let Some(x) = found {
            let c = quad_component(tri, &x, None)?;
            check_output(tri, &c)?;
            return Ok(c);
        }
    }
    Err(Error::Construction("fallback search found no surface with a quad".into()))
}

/// Builds a closed embedded normal surface with a quad. Requires the
/// unique common simplex property. Tries the three quad families of ball
/// tet 0 in order and falls back to a bounded search if all fail.
pub fn construct_nonlinking_surface(tri: &Triangulation) -> Result<Construction> {
    let (ucs, witness) = tri.unique_common_simplex();
    if !ucs {
        return Err(Error::Precondition(format!(
            "triangulation lacks the unique common simplex property (tets {:?})",
            witness.unwrap_or_default()
        )));
    }
    let ball = unfold(tri)?;
    let mut notes = Vec::new();
    for family in 0..3 {
        match attempt(tri, &ball, family) {
            Ok(Some(a)) => {
                notes.extend(a.notes);
                return Ok(Construction {
                    coords: a.coords,
                    fallback: false,
                    family: Some(family),
                    start_tet: Some(ball.copy_of[0]),
                    curve_arcs: a.curve_arcs,
                    pieces: a.pieces,
                    overlaps: a.overlaps,
                    reconnect_trace: a.trace,
                    closing: a.closing,
                    log: a.log,
                    notes,
                });
            }
            Ok(None) => notes.push(format!("family {} skipped", QUADS_NAME[family])),
            Err(e) => notes.push(format!("family {} failed: {e}", QUADS_NAME[family])),
        }
    }
    let coords = fallback_surface(tri)?;
    notes.push("constructive path failed; bounded search used".into());
    Ok(Construction {
        coords,
        fallback: true,
        family: None,
        start_tet: None,
        curve_arcs: 0,
        pieces: 0,
        overlaps: 0,
        reconnect_trace: Vec::new(),
        closing: Closing::None,
        log: Vec::new(),
        notes,
    })
}
