//! Brute-force oracles that read `.itri` text directly and walk around
//! edges and vertices without the library's union-find.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

/// `gluings[t][f] = (target tet, σ)` from the text.
pub type Raw = Vec<[(usize, [u8; 4]); 4]>;

pub fn raw(text: &str) -> Raw {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap().trim();
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.first() != Some(&"tet") {
            continue;
        }
        let mut row = [(0, [0u8; 4]); 4];
        for f in 0..4 {
            let parts: Vec<&str> = toks[2 + f].split(':').collect();
            let perm: Vec<u8> = parts[2].bytes().map(|b| b - b'0').collect();
            row[f] = (parts[0].parse().unwrap(), [perm[0], perm[1], perm[2], perm[3]]);
        }
        out.push(row);
    }
    out
}

/// Raw data from a library triangulation, via its serialisation.
pub fn raw_of(tri: &cuspforge::triangulation::Triangulation) -> Raw {
    raw(&cuspforge::io::write_itri(tri))
}

fn other_two(a: u8, b: u8) -> (u8, u8) {
    let rest: Vec<u8> = (0..4).filter(|&x| x != a && x != b).collect();
    (rest[0], rest[1])
}

/// Walks the wedges around edge `{a, b}` of `t`, returning every visited
/// `(tet, min, max)` slot in order until the starting state recurs.
pub fn walk_edge(g: &Raw, t: usize, a: u8, b: u8) -> Vec<(usize, u8, u8)> {
    let (c, _) = other_two(a, b);
    // Leave through the face opposite `exit`; the next exit is the other
    // face of the new tet containing the edge.
    let (mut t, mut a, mut b, mut exit) = (t, a, b, c);
    let start = (t, a.min(b), a.max(b), exit);
    let mut out = Vec::new();
    loop {
        out.push((t, a.min(b), a.max(b)));
        let (t2, p) = g[t][exit as usize];
        let entered = p[exit as usize];
        let (a2, b2) = (p[a as usize], p[b as usize]);
        let (x, y) = other_two(a2, b2);
        t = t2;
        a = a2;
        b = b2;
        exit = if x == entered { y } else { x };
        if (t, a.min(b), a.max(b), exit) == start || out.len() > 6 * g.len() {
            return out;
        }
    }
}

/// Edge classes as sorted slot lists, sorted.
pub fn edge_classes(g: &Raw) -> Vec<Vec<(usize, u8, u8)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for t in 0..g.len() {
        for a in 0..4u8 {
            for b in a + 1..4 {
                if seen.contains(&(t, a, b)) {
                    continue;
                }
                let cycle = walk_edge(g, t, a, b);
                let mut class: Vec<_> = cycle.clone();
                class.sort();
                class.dedup();
                seen.extend(class.iter().copied());
                out.push(cycle);
            }
        }
    }
    out
}

/// Edge indices (cycle lengths), sorted.
pub fn edge_indices(g: &Raw) -> Vec<usize> {
    let mut v: Vec<usize> = edge_classes(g).iter().map(|c| c.len()).collect();
    v.sort();
    v
}

/// Number of cusps, by flood fill over corners through faces.
pub fn cusp_count(g: &Raw) -> usize {
    let mut seen = BTreeSet::new();
    let mut count = 0;
    for t in 0..g.len() {
        for v in 0..4u8 {
            if !seen.insert((t, v)) {
                continue;
            }
            count += 1;
            let mut stack = vec![(t, v)];
            while let Some((u, w)) = stack.pop() {
                for f in (0..4u8).filter(|&f| f != w) {
                    let (u2, p) = g[u][f as usize];
                    let next = (u2, p[w as usize]);
                    if seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
        }
    }
    count
}
