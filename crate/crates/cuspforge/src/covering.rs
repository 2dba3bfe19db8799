//! Finite covers by iterated doubling of the unfolded ball, branched covers
//! raising edge indices, and independent verifiers for both.

use std::collections::{BTreeMap, BTreeSet};

use crate::ball::{unfold, Ball};
use crate::error::{Error, Result};
use crate::triangulation::Triangulation;

/// Doubling rounds allowed before refusing (degree `2^rounds`).
pub const MAX_DOUBLING_ROUNDS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringMap {
    pub total: Triangulation,
    pub base: Triangulation,
    pub tet_map: Vec<usize>,
    pub sheet_label: Vec<String>,
    pub degree: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchedCoveringMap {
    pub cover: CoveringMap,
    /// Base edge classes whose lifts wrap more than once.
    pub branch_locus: Vec<usize>,
    /// Number of ball copies used.
    pub copies: usize,
    /// Shift applied across each boundary pair, in ball pair order.
    pub shifts: Vec<usize>,
    /// Boundary weights `m_e` of the ball.
    pub weights: Vec<usize>,
    /// The copy count `k·m₀` the cyclic construction would use.
    pub cyclic_bound: usize,
}

/// Lift data of one covering edge class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLift {
    pub total_class: usize,
    pub base_class: usize,
    pub wrap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverReport {
    pub ok: bool,
    pub failures: Vec<String>,
    pub lifts: Vec<EdgeLift>,
    /// Largest wrap number; 1 means no edge is branched.
    pub max_wrap: usize,
}

/// Doubles the ball once per boundary pair. Sheet `s` is a bit string; pair
/// `i` glues the `a` face of sheet `s` to the `b` face of sheet `s ^ 2^i`.
pub fn finite_cover(base: &Triangulation) -> Result<CoveringMap> {
    let ball = unfold(base)?;
    doubling_cover(&ball)
}

pub fn doubling_cover(ball: &Ball) -> Result<CoveringMap> {
    let m = ball.pairs.len();
    if m > MAX_DOUBLING_ROUNDS {
        return Err(Error::TooLarge(format!("{m} doubling rounds give degree 2^{m}")));
    }
    let n = ball.n();
    let degree = 1usize << m;
    let mut total = Triangulation::with_tets(n * degree);
    for s in 0..degree {
        for ((t, f), (t2, _), perm) in ball.tree() {
            total.glue(s * n + t, f, s * n + t2, perm);
        }
        for (i, p) in ball.pairs.iter().enumerate() {
            let other = s ^ (1 << i);
            total.glue(s * n + p.a.0, p.a.1, other * n + p.b.0, p.perm);
        }
    }
    let mut tet_map = Vec::with_capacity(n * degree);
    let mut sheet_label = Vec::with_capacity(n * degree);
    for s in 0..degree {
        let label: String = (0..m).map(|i| if s >> i & 1 == 1 { '1' } else { '0' }).collect();
        for t in 0..n {
            tet_map.push(ball.copy_of[t]);
            sheet_label.push(label.clone());
        }
    }
    Ok(CoveringMap { total, base: ball.base.clone(), tet_map, sheet_label, degree })
}

/// Checks the simplicial projection, preimage counts, connectivity and edge
/// lifting of a covering map.
pub fn verify_covering(c: &CoveringMap) -> CoverReport {
    let mut failures = Vec::new();
    let report = c.total.validate();
    if !report.ok {
        failures.push(format!("total triangulation invalid: {:?}", report.violations));
    }
    if c.tet_map.len() != c.total.n() {
        failures.push("tet map length differs from tet count".into());
        return CoverReport { ok: false, failures, lifts: Vec::new(), max_wrap: 0 };
    }
    let mut counts = vec![0usize; c.base.n()];
    for &b in &c.tet_map {
        if b >= c.base.n() {
            failures.push(format!("tet maps to missing base tet {b}"));
            return CoverReport { ok: false, failures, lifts: Vec::new(), max_wrap: 0 };
        }
        counts[b] += 1;
    }
    for (b, &k) in counts.iter().enumerate() {
        if k != c.degree {
            failures.push(format!("base tet {b} has {k} preimages, expected {}", c.degree));
        }
    }
    for t in 0..c.total.n() {
        for f in 0..4u8 {
            let Some(g) = c.total.gluing(t, f) else { continue };
            let down = c.base.gluing(c.tet_map[t], f);
            let expected = down.map(|d| (d.tet, d.perm));
            if expected != Some((c.tet_map[g.tet], g.perm)) {
                failures.push(format!("gluing at ({t},{f}) does not project to a base gluing"));
            }
        }
    }
    if !c.total.is_connected() {
        failures.push("total space is disconnected".into());
    }
    let (lifts, lift_failures) = edge_lifts(c);
    failures.extend(lift_failures);
    let max_wrap = lifts.iter().map(|l| l.wrap).max().unwrap_or(0);
    CoverReport { ok: failures.is_empty(), failures, lifts, max_wrap }
}

fn edge_lifts(c: &CoveringMap) -> (Vec<EdgeLift>, Vec<String>) {
    let mut failures = Vec::new();
    let (base_classes, base_table) = c.base.edge_class_table();
    let mut lifts = Vec::new();
    let mut sums: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, class) in c.total.edge_classes().iter().enumerate() {
        let below: BTreeSet<usize> = class.members.iter().map(|&(t, e)| base_table[c.tet_map[t]][e]).collect();
        if below.len() != 1 {
            failures.push(format!("covering edge class {i} projects onto {} base classes", below.len()));
            continue;
        }
        let b = *below.iter().next().unwrap();
        let base_index = base_classes[b].index;
        if class.index % base_index != 0 {
            failures.push(format!("covering edge class {i} has index {} not a multiple of {base_index}", class.index));
            continue;
        }
        let wrap = class.index / base_index;
        *sums.entry(b).or_insert(0) += wrap;
        lifts.push(EdgeLift { total_class: i, base_class: b, wrap });
    }
    for (b, _) in base_classes.iter().enumerate() {
        let s = sums.get(&b).copied().unwrap_or(0);
        if s != c.degree {
            failures.push(format!("wraps over base edge class {b} sum to {s}, expected {}", c.degree));
        }
    }
    (lifts, failures)
}

/// Copies of the ball stacked cyclically: copy `j`'s `a` face of pair `p`
/// is glued to copy `j + shift[p] (mod K)`'s `b` face.
fn shifted_cover(ball: &Ball, copies: usize, shifts: &[usize]) -> CoveringMap {
    let n = ball.n();
    let mut total = Triangulation::with_tets(n * copies);
    for j in 0..copies {
        for ((t, f), (t2, _), perm) in ball.tree() {
            total.glue(j * n + t, f, j * n + t2, perm);
        }
        for (p, pair) in ball.pairs.iter().enumerate() {
            let other = (j + shifts[p]) % copies;
            total.glue(j * n + pair.a.0, pair.a.1, other * n + pair.b.0, pair.perm);
        }
    }
    let mut tet_map = Vec::new();
    let mut sheet_label = Vec::new();
    for j in 0..copies {
        for t in 0..n {
            tet_map.push(ball.copy_of[t]);
            sheet_label.push(j.to_string());
        }
    }
    CoveringMap { total, base: ball.base.clone(), tet_map, sheet_label, degree: copies }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Signed crossings of boundary pairs around each base edge class:
/// `(pair index, +1 from a to b / -1 from b to a)` in cycle order.
fn edge_crossings(ball: &Ball) -> BTreeMap<usize, Vec<(usize, i64)>> {
    let mut out: BTreeMap<usize, Vec<(usize, i64)>> = BTreeMap::new();
    let mut done = BTreeSet::new();
    for (start, _, _, class) in ball.segments() {
        if !done.insert(class) {
            continue;
        }
        // Follow the cycle: leave each chain through its far end.
        let mut at = start;
        let mut crossings = Vec::new();
        loop {
            let (end, _) = ball.walk_edge(at.0, at.1);
            let (p, sign) = ball
                .pairs
                .iter()
                .enumerate()
                .find_map(|(i, p)| {
                    if p.a == end.0 {
                        Some((i, 1))
                    } else if p.b == end.0 {
                        Some((i, -1))
                    } else {
                        None
                    }
                })
                .expect("boundary face is paired");
            crossings.push((p, sign));
            let (other, perm) = ball.partner(end.0).unwrap();
            let (a, b) = end.1;
            let next = (other, {
                let (x, y) = (perm.apply(a), perm.apply(b));
                if x < y {
                    (x, y)
                } else {
                    (y, x)
                }
            });
            if next == start {
                break;
            }
            at = next;
        }
        out.insert(class, crossings);
    }
    out
}

/// Index each base edge class would lift to under `shifts` with `copies`
/// ball copies, and whether the copies are connected.
fn predicted_indices(
    base_index: &[usize],
    crossings: &BTreeMap<usize, Vec<(usize, i64)>>,
    copies: usize,
    shifts: &[usize],
) -> (Vec<usize>, bool) {
    let k = copies as i64;
    let mut out = vec![0; base_index.len()];
    for (&class, cs) in crossings {
        let s: i64 = cs.iter().map(|&(p, sign)| sign * shifts[p] as i64).sum();
        let s = s.rem_euclid(k) as usize;
        out[class] = base_index[class] * copies / gcd(copies, s);
    }
    let g = shifts.iter().fold(copies, |acc, &s| gcd(acc, s));
    (out, g == 1)
}

/// Largest copy count tried by [`branched_cover`].
pub const MAX_BRANCH_COPIES: usize = 24;
const MAX_SHIFT_CANDIDATES: usize = 200_000;

/// Stacks `K` copies of the ball with per-pair shifts so that every edge
/// index is at least `target`. `K` runs over 1, 2, 3, … and shifts over
/// `{0..K}^pairs` in lexicographic order; the first success is returned.
pub fn branched_cover(base: &Triangulation, target: usize) -> Result<BranchedCoveringMap> {
    let ball = unfold(base)?;
    let classes = base.edge_classes();
    let base_index: Vec<usize> = classes.iter().map(|c| c.index).collect();
    let crossings = edge_crossings(&ball);
    let weights = ball.boundary_weights();
    let m0: usize = weights.iter().product();
    let min_weight = weights.iter().copied().min().unwrap_or(1).max(1);
    let cyclic_bound = target.div_ceil(min_weight) * m0;
    let m = ball.pairs.len();
    for copies in 1..=MAX_BRANCH_COPIES {
        let mut shifts = vec![0usize; m];
        let mut tried = 0;
        loop {
            let (indices, connected) = predicted_indices(&base_index, &crossings, copies, &shifts);
            if connected && indices.iter().all(|&i| i >= target) {
                let cover = shifted_cover(&ball, copies, &shifts);
                let branch_locus = (0..classes.len()).filter(|&c| indices[c] > base_index[c]).collect();
                let out = BranchedCoveringMap {
                    cover,
                    branch_locus,
                    copies,
                    shifts: shifts.clone(),
                    weights: weights.clone(),
                    cyclic_bound,
                };
                if verify_branched_cover(&out, target).ok {
                    return Ok(out);
                }
            }
            tried += 1;
            if tried >= MAX_SHIFT_CANDIDATES || !next_shift(&mut shifts, copies) {
                break;
            }
        }
    }
    Err(Error::BranchSearch { target, max_copies: MAX_BRANCH_COPIES })
}

fn next_shift(shifts: &mut [usize], copies: usize) -> bool {
    for i in (0..shifts.len()).rev() {
        if shifts[i] + 1 < copies {
            shifts[i] += 1;
            for s in shifts.iter_mut().skip(i + 1) {
                *s = 0;
            }
            return true;
        }
    }
    false
}

/// Projection, connectivity, integral wraps and the index bound.
pub fn verify_branched_cover(b: &BranchedCoveringMap, target: usize) -> CoverReport {
    let mut report = verify_covering(&b.cover);
    let classes = b.cover.total.edge_classes();
    for lift in &report.lifts {
        let index = classes[lift.total_class].index;
        if index < target {
            report.failures.push(format!("edge class {} has index {index} < {target}", lift.total_class));
        }
        if lift.wrap > 1 && !b.branch_locus.contains(&lift.base_class) {
            report.failures.push(format!("edge class {} wraps but base class {} is not in the branch locus", lift.total_class, lift.base_class));
        }
    }
    report.ok = report.failures.is_empty();
    report
}
