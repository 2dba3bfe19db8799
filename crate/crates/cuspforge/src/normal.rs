//! Normal coordinates, the matching equations, bounded enumeration of
//! admissible solutions, explicit reconstruction and the surface checks.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::triangulation::{edge_index, face_vertices, CuspClass, EdgeClass, Triangulation, EDGES};

/// Vertex pairs of the three quad families; the first pair holds vertex 0.
pub const QUADS: [((u8, u8), (u8, u8)); 3] = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];

pub const QUAD_NAMES: [&str; 3] = ["01|23", "02|13", "03|12"];

/// The quad family pairing `a` with `b`.
pub fn quad_family(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    QUADS.iter().position(|&(p, q)| p == (a, b) || q == (a, b)).expect("distinct vertices")
}

/// Vertex paired with `v` by quad family `q`.
pub fn quad_partner(q: usize, v: u8) -> u8 {
    let ((a, b), (c, d)) = QUADS[q];
    match v {
        _ if v == a => b,
        _ if v == b => a,
        _ if v == c => d,
        _ => c,
    }
}

/// Disc types of one tetrahedron: columns 0..4 are triangles, 4..7 quads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiscType {
    Triangle(u8),
    Quad(u8),
}

impl DiscType {
    pub fn column(self) -> usize {
        match self {
            DiscType::Triangle(v) => v as usize,
            DiscType::Quad(q) => 4 + q as usize,
        }
    }

    pub fn from_column(k: usize) -> DiscType {
        if k < 4 {
            DiscType::Triangle(k as u8)
        } else {
            DiscType::Quad((k - 4) as u8)
        }
    }

    /// Normal arcs as `(face, vertex cut off)`, by face.
    pub fn arcs(self) -> Vec<(u8, u8)> {
        match self {
            DiscType::Triangle(v) => face_vertices(v).iter().map(|&f| (f, v)).collect(),
            DiscType::Quad(q) => (0..4u8).map(|f| (f, quad_partner(q as usize, f))).collect(),
        }
    }

    /// Arc cut off in face `f`, if the disc meets that face.
    pub fn arc_in(self, f: u8) -> Option<u8> {
        match self {
            DiscType::Triangle(v) if v == f => None,
            DiscType::Triangle(v) => Some(v),
            DiscType::Quad(q) => Some(quad_partner(q as usize, f)),
        }
    }

    /// Tet edges crossed by the disc, as edge indices.
    pub fn corners(self) -> Vec<usize> {
        match self {
            DiscType::Triangle(v) => (0..4u8).filter(|&x| x != v).map(|x| edge_index(v, x)).collect(),
            DiscType::Quad(q) => {
                let ((a, b), (c, d)) = QUADS[q as usize];
                vec![edge_index(a, c), edge_index(a, d), edge_index(b, c), edge_index(b, d)]
            }
        }
    }

    pub fn is_quad(self) -> bool {
        matches!(self, DiscType::Quad(_))
    }
}

impl std::fmt::Display for DiscType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiscType::Triangle(v) => write!(f, "T{v}"),
            DiscType::Quad(q) => write!(f, "Q{}", QUAD_NAMES[*q as usize]),
        }
    }
}

/// Seven coordinates per tetrahedron: `T0..T3, Q01|23, Q02|13, Q03|12`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalCoords(pub Vec<u32>);

impl NormalCoords {
    pub fn zero(n: usize) -> Self {
        NormalCoords(vec![0; 7 * n])
    }

    pub fn n(&self) -> usize {
        self.0.len() / 7
    }

    pub fn get(&self, t: usize, d: DiscType) -> u32 {
        self.0[7 * t + d.column()]
    }

    pub fn add(&mut self, t: usize, d: DiscType, k: u32) {
        self.0[7 * t + d.column()] += k;
    }

    pub fn scaled(&self, k: u32) -> NormalCoords {
        NormalCoords(self.0.iter().map(|&x| x * k).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// At most one quad family present in each tetrahedron.
    pub fn is_admissible(&self) -> bool {
        (0..self.n()).all(|t| (4..7).filter(|&k| self.0[7 * t + k] > 0).count() <= 1)
    }

    pub fn quad_count(&self) -> u32 {
        (0..self.n()).map(|t| self.0[7 * t + 4] + self.0[7 * t + 5] + self.0[7 * t + 6]).sum()
    }
}

/// One matching equation: arcs cutting `left.2` in face `left.1` of tet
/// `left.0` equal arcs cutting `right.2` in the glued face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchRow {
    pub left: (usize, u8, u8),
    pub right: (usize, u8, u8),
    pub entries: Vec<(usize, i32)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingMatrix {
    pub rows: Vec<MatchRow>,
    pub ncols: usize,
}

impl MatchingMatrix {
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn dense(&self) -> Vec<Vec<i32>> {
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![0; self.ncols];
                for &(c, v) in &r.entries {
                    row[c] += v;
                }
                row
            })
            .collect()
    }

    pub fn apply(&self, x: &NormalCoords) -> Vec<i64> {
        self.rows.iter().map(|r| r.entries.iter().map(|&(c, v)| v as i64 * x.0[c] as i64).sum()).collect()
    }
}

/// One row per face class and arc type; the left side is the smaller face
/// slot.
pub fn matching_matrix(tri: &Triangulation) -> MatchingMatrix {
    let mut rows = Vec::new();
    for ((t, f), (t2, f2), perm) in tri.face_pairs() {
        for v in face_vertices(f) {
            let w = perm.apply(v);
            let mut acc: BTreeMap<usize, i32> = BTreeMap::new();
            for k in 0..7 {
                let d = DiscType::from_column(k);
                if d.arc_in(f) == Some(v) {
                    *acc.entry(7 * t + k).or_insert(0) += 1;
                }
                if d.arc_in(f2) == Some(w) {
                    *acc.entry(7 * t2 + k).or_insert(0) -= 1;
                }
            }
            let entries = acc.into_iter().filter(|&(_, v)| v != 0).collect();
            rows.push(MatchRow { left: (t, f, v), right: (t2, f2, w), entries });
        }
    }
    MatchingMatrix { rows, ncols: 7 * tri.n() }
}

pub fn vertex_link(tri: &Triangulation, cusp: &CuspClass) -> NormalCoords {
    let mut x = NormalCoords::zero(tri.n());
    for &(t, v) in &cusp.corners {
        x.add(t, DiscType::Triangle(v), 1);
    }
    x
}

/// The thin surface around an edge class: the links of the cusps at its
/// ends, with the two corner triangles at every wedge traded for the quad
/// separating the edge from its opposite edge. `None` when a corner is
/// used twice or a tet would carry two quad families.
pub fn edge_link_surface(tri: &Triangulation, class: &EdgeClass) -> Option<NormalCoords> {
    let cusps = tri.cusp_classes();
    let cusp_of = |t: usize, v: u8| cusps.iter().position(|c| c.corners.binary_search(&(t, v)).is_ok()).unwrap();
    let (t, e) = class.members[0];
    let (a, b) = EDGES[e];
    let mut x: Vec<i64> = vec![0; 7 * tri.n()];
    for c in [cusp_of(t, a), cusp_of(t, b)] {
        for &(u, v) in &cusps[c].corners {
            x[7 * u + v as usize] += 1;
        }
    }
    for &(u, k) in &class.members {
        let (p, q) = EDGES[k];
        x[7 * u + p as usize] -= 1;
        x[7 * u + q as usize] -= 1;
        x[7 * u + 4 + quad_family(p, q)] += 1;
    }
    if x.iter().any(|&v| v < 0) {
        return None;
    }
    let x = NormalCoords(x.into_iter().map(|v| v as u32).collect());
    (x.is_admissible() && is_solution(&matching_matrix(tri), &x)).then_some(x)
}

pub fn is_solution(b: &MatchingMatrix, x: &NormalCoords) -> bool {
    x.0.len() == b.ncols && b.apply(x).iter().all(|&r| r == 0)
}

/// Result of a bounded search callback.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

struct Search<'a> {
    b: &'a MatchingMatrix,
    bound: u32,
    col_rows: Vec<Vec<(usize, i32)>>,
    /// Per row, per entry position: (# positive, # negative) entries after it.
    tail: Vec<Vec<(i64, i64)>>,
    entry_pos: Vec<Vec<(usize, usize)>>,
    sums: Vec<i64>,
    x: NormalCoords,
    nodes: usize,
    limit: Option<usize>,
    stopped: bool,
}

impl<'a> Search<'a> {
    fn new(b: &'a MatchingMatrix, bound: u32, limit: Option<usize>) -> Self {
        let mut col_rows = vec![Vec::new(); b.ncols];
        let mut entry_pos = vec![Vec::new(); b.ncols];
        let mut tail = Vec::with_capacity(b.nrows());
        for (r, row) in b.rows.iter().enumerate() {
            let mut t = vec![(0i64, 0i64); row.entries.len()];
            let (mut p, mut q) = (0, 0);
            for i in (0..row.entries.len()).rev() {
                t[i] = (p, q);
                if row.entries[i].1 > 0 {
                    p += 1;
                } else {
                    q += 1;
                }
            }
            tail.push(t);
            for (i, &(c, v)) in row.entries.iter().enumerate() {
                col_rows[c].push((r, v));
                entry_pos[c].push((r, i));
            }
        }
        Search {
            b,
            bound,
            col_rows,
            tail,
            entry_pos,
            sums: vec![0; b.nrows()],
            x: NormalCoords::zero(b.ncols / 7),
            nodes: 0,
            limit,
            stopped: false,
        }
    }

    fn feasible(&self, col: usize) -> bool {
        let bound = self.bound as i64;
        self.entry_pos[col].iter().all(|&(r, i)| {
            let (p, q) = self.tail[r][i];
            let s = self.sums[r];
            s - q * bound <= 0 && 0 <= s + p * bound
        })
    }

    fn run(&mut self, col: usize, visit: &mut dyn FnMut(&NormalCoords) -> Flow) {
        if self.stopped {
            return;
        }
        self.nodes += 1;
        if let Some(limit) = self.limit {
            if self.nodes > limit {
                self.stopped = true;
                return;
            }
        }
        if col == self.b.ncols {
            if !self.x.is_zero() && visit(&self.x) == Flow::Stop {
                self.stopped = true;
            }
            return;
        }
        let t = col / 7;
        let quad_taken = col % 7 >= 4 && (7 * t + 4..col).any(|c| self.x.0[c] > 0);
        let top = if quad_taken { 0 } else { self.bound };
        for value in 0..=top {
            for &(r, v) in &self.col_rows[col] {
                self.sums[r] += v as i64 * value as i64;
            }
            self.x.0[col] = value;
            if self.feasible(col) {
                self.run(col + 1, visit);
            }
            for &(r, v) in &self.col_rows[col] {
                self.sums[r] -= v as i64 * value as i64;
            }
            self.x.0[col] = 0;
            if self.stopped {
                return;
            }
        }
    }
}

/// Depth-first search over admissible nonzero solutions with all
/// coordinates at most `bound`, columns in index order, values ascending.
/// Returns `false` if the node `limit` cut the search short.
pub fn search_solutions(
    tri: &Triangulation,
    bound: u32,
    limit: Option<usize>,
    visit: &mut dyn FnMut(&NormalCoords) -> Flow,
) -> bool {
    let b = matching_matrix(tri);
    let mut s = Search::new(&b, bound, limit);
    s.run(0, visit);
    !(s.stopped && limit.is_some_and(|l| s.nodes > l))
}

pub fn enumerate_solutions(tri: &Triangulation, bound: u32) -> Vec<NormalCoords> {
    let mut out = Vec::new();
    search_solutions(tri, bound, None, &mut |x| {
        out.push(x.clone());
        Flow::Continue
    });
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disc {
    pub tet: usize,
    pub kind: DiscType,
    /// Rank among parallel copies of this kind in the tet.
    pub pos: usize,
}

/// An embedded surface built from normal discs with its arc gluings and
/// vertex classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscComplex {
    pub n_tets: usize,
    pub discs: Vec<Disc>,
    /// `((disc, face), (disc, face))` with the first slot smaller.
    pub arc_gluings: Vec<((usize, u8), (usize, u8))>,
    /// Unmatched arcs `(disc, face)`.
    pub free_arcs: Vec<(usize, u8)>,
    /// Surface vertices as lists of `(disc, tet edge index)` corners.
    pub vertices: Vec<Vec<(usize, usize)>>,
}

impl DiscComplex {
    pub fn is_closed(&self) -> bool {
        self.free_arcs.is_empty()
    }

    pub fn coords(&self) -> NormalCoords {
        let mut x = NormalCoords::zero(self.n_tets);
        for d in &self.discs {
            x.add(d.tet, d.kind, 1);
        }
        x
    }

    pub fn quad_count(&self) -> usize {
        self.discs.iter().filter(|d| d.kind.is_quad()).count()
    }
}

fn arc_rank(x: &NormalCoords, d: &Disc, v: u8) -> usize {
    match d.kind {
        DiscType::Triangle(_) => d.pos,
        DiscType::Quad(q) => {
            let k = x.get(d.tet, d.kind) as usize;
            let before = x.get(d.tet, DiscType::Triangle(v)) as usize;
            let ((a, b), _) = QUADS[q as usize];
            if v == a || v == b {
                before + d.pos
            } else {
                before + (k - 1 - d.pos)
            }
        }
    }
}

fn build_complex(
    tri: &Triangulation,
    n_tets: usize,
    discs: Vec<Disc>,
    arc_gluings: Vec<((usize, u8), (usize, u8))>,
    free_arcs: Vec<(usize, u8)>,
) -> DiscComplex {
    // Node ids for (disc, corner edge).
    let mut node: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, d) in discs.iter().enumerate() {
        for e in d.kind.corners() {
            let id = node.len();
            node.insert((i, e), id);
        }
    }
    let mut uf = UnionFind::new(node.len());
    for &((d1, f1), (d2, _)) in &arc_gluings {
        let (t1, k1) = (discs[d1].tet, discs[d1].kind);
        let t2 = discs[d2].tet;
        let g = tri.gluing(t1, f1).expect("glued face");
        debug_assert_eq!(g.tet, t2);
        let v = k1.arc_in(f1).unwrap();
        for x in face_vertices(f1) {
            if x == v {
                continue;
            }
            let a = node[&(d1, edge_index(v, x))];
            let b = node[&(d2, edge_index(g.perm.apply(v), g.perm.apply(x)))];
            uf.union(a, b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (&key, &id) in &node {
        groups.entry(uf.find(id)).or_default().push(key);
    }
    let mut vertices: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    vertices.sort();
    let _ = tri;
    DiscComplex { n_tets, discs, arc_gluings, free_arcs, vertices }
}

/// Builds the embedded surface with coordinates `x`. Parallel copies nest
/// toward their vertex (triangles) or from the vertex-0 side (quads); arcs
/// are matched by rank from the cut-off vertex.
pub fn reconstruct(tri: &Triangulation, x: &NormalCoords) -> Result<DiscComplex> {
    if x.n() != tri.n() {
        return Err(Error::Precondition("coordinate length does not match the triangulation".into()));
    }
    if !x.is_admissible() {
        return Err(Error::Precondition("coordinates are not admissible".into()));
    }
    let mut discs = Vec::new();
    for t in 0..tri.n() {
        for k in 0..7 {
            let kind = DiscType::from_column(k);
            for pos in 0..x.get(t, kind) as usize {
                discs.push(Disc { tet: t, kind, pos });
            }
        }
    }
    let mut slot: BTreeMap<(usize, u8, u8, usize), usize> = BTreeMap::new();
    for (i, d) in discs.iter().enumerate() {
        for (f, v) in d.kind.arcs() {
            slot.insert((d.tet, f, v, arc_rank(x, d, v)), i);
        }
    }
    let mut arc_gluings = Vec::new();
    let mut matched = std::collections::BTreeSet::new();
    for (&(t, f, v, r), &i) in &slot {
        if matched.contains(&(i, f)) {
            continue;
        }
        let Some(g) = tri.gluing(t, f) else { continue };
        let key = (g.tet, g.perm.apply(f), g.perm.apply(v), r);
        if let Some(&j) = slot.get(&key) {
            matched.insert((i, f));
            matched.insert((j, key.1));
            arc_gluings.push(((i, f), (j, key.1)));
        }
    }
    let free_arcs: Vec<(usize, u8)> = slot
        .iter()
        .map(|(&(_, f, _, _), &i)| (i, f))
        .filter(|a| !matched.contains(a))
        .collect();
    if tri.is_closed() && !free_arcs.is_empty() {
        return Err(Error::NotClosed(format!("{} arcs unmatched; coordinates do not solve the matching equations", free_arcs.len())));
    }
    Ok(build_complex(tri, tri.n(), discs, arc_gluings, free_arcs))
}

/// Connected components under arc adjacency, in order of first disc.
pub fn components(tri: &Triangulation, d: &DiscComplex) -> Vec<DiscComplex> {
    let mut uf = UnionFind::new(d.discs.len());
    for &((a, _), (b, _)) in &d.arc_gluings {
        uf.union(a, b);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..d.discs.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort();
    groups
        .into_iter()
        .map(|members| {
            let index: BTreeMap<usize, usize> = members.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let discs = members.iter().map(|&i| d.discs[i].clone()).collect();
            let arc_gluings = d
                .arc_gluings
                .iter()
                .filter(|((a, _), _)| index.contains_key(a))
                .map(|&((a, fa), (b, fb))| ((index[&a], fa), (index[&b], fb)))
                .collect();
            let free_arcs =
                d.free_arcs.iter().filter(|(a, _)| index.contains_key(a)).map(|&(a, f)| (index[&a], f)).collect();
            build_complex(tri, d.n_tets, discs, arc_gluings, free_arcs)
        })
        .collect()
}

/// Corner angle of a quad in the regular ideal tetrahedron.
pub fn quad_corner_angle() -> f64 {
    (0.2f64).acos()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EulerReport {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub chi: i64,
    pub chi_gauss_bonnet: f64,
}

/// `V − E + F`, cross-checked against the Gauss–Bonnet sum with triangle
/// corners π/3 and quad corners arccos(1/5).
pub fn euler_characteristic(d: &DiscComplex) -> Result<EulerReport> {
    if !d.is_closed() {
        return Err(Error::NotClosed(format!("{} free arcs", d.free_arcs.len())));
    }
    let (v, e, f) = (d.vertices.len(), d.arc_gluings.len(), d.discs.len());
    let chi = v as i64 - e as i64 + f as i64;
    let alpha = quad_corner_angle();
    let mut curvature = 0.0;
    for vertex in &d.vertices {
        let angle: f64 =
            vertex.iter().map(|&(i, _)| if d.discs[i].kind.is_quad() { alpha } else { PI / 3.0 }).sum();
        curvature += 2.0 * PI - angle;
    }
    curvature -= (2.0 * PI - 4.0 * alpha) * d.quad_count() as f64;
    let chi_gb = curvature / (2.0 * PI);
    if (chi_gb - chi as f64).abs() >= 1e-6 {
        return Err(Error::Construction(format!("Gauss-Bonnet {chi_gb} disagrees with V-E+F {chi}")));
    }
    Ok(EulerReport { vertices: v, edges: e, faces: f, chi, chi_gauss_bonnet: chi_gb })
}

/// All discs are triangles.
pub fn is_linking(d: &DiscComplex) -> bool {
    d.discs.iter().all(|disc| !disc.kind.is_quad())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexFinding {
    pub vertex: usize,
    pub edge_class: usize,
    pub degree: usize,
    pub edge_index: usize,
    pub angle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureReport {
    pub ok: bool,
    pub degree_mismatches: Vec<VertexFinding>,
    pub angle_deficits: Vec<VertexFinding>,
}

/// Every surface vertex has degree equal to the index of its edge and
/// angle sum at least 2π.
pub fn surface_curvature_check(tri: &Triangulation, d: &DiscComplex) -> CurvatureReport {
    let (classes, table) = tri.edge_class_table();
    let alpha = quad_corner_angle();
    let mut degree_mismatches = Vec::new();
    let mut angle_deficits = Vec::new();
    for (i, vertex) in d.vertices.iter().enumerate() {
        let (disc, e) = vertex[0];
        let class = table[d.discs[disc].tet][e];
        let angle: f64 =
            vertex.iter().map(|&(j, _)| if d.discs[j].kind.is_quad() { alpha } else { PI / 3.0 }).sum();
        let finding = VertexFinding { vertex: i, edge_class: class, degree: vertex.len(), edge_index: classes[class].index, angle };
        if finding.degree != finding.edge_index {
            degree_mismatches.push(finding.clone());
        }
        if angle < 2.0 * PI - 1e-9 {
            angle_deficits.push(finding);
        }
    }
    CurvatureReport { ok: degree_mismatches.is_empty() && angle_deficits.is_empty(), degree_mismatches, angle_deficits }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_partners_are_involutions() {
        for q in 0..3 {
            for v in 0..4u8 {
                assert_eq!(quad_partner(q, quad_partner(q, v)), v);
                assert_ne!(quad_partner(q, v), v);
                assert_eq!(quad_family(v, quad_partner(q, v)), q);
            }
        }
    }

    #[test]
    fn column_support_sizes() {
        for k in 0..7 {
            let d = DiscType::from_column(k);
            assert_eq!(d.column(), k);
            assert_eq!(d.arcs().len(), if k < 4 { 3 } else { 4 });
            assert_eq!(d.corners().len(), if k < 4 { 3 } else { 4 });
        }
    }
}
