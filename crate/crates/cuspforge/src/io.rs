//! Text formats: `.itri` triangulations, `.ncrd` coordinates, `map.tsv`
//! covering maps and DOT dual graphs.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::ParseError;
use crate::normal::NormalCoords;
use crate::perm::Perm;
use crate::triangulation::{Gluing, Triangulation};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }
}

/// Yields `(line number, column of first token, tokens)` for content lines.
impl<'a> Iterator for Lines<'a> {
    type Item = (usize, Vec<(usize, &'a str)>);

    fn next(&mut self) -> Option<Self::Item> {
        for (i, raw) in self.inner.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut col = 0;
            for piece in content.split(|c: char| c == ' ' || c == '\t') {
                if !piece.is_empty() {
                    tokens.push((col + 1, piece));
                }
                col += piece.len() + 1;
            }
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, col, msg: msg.into() }
}

fn expect_header<'a>(lines: &mut Lines<'a>, magic: &str) -> Result<usize, ParseError> {
    let (ln, toks) = lines.next().ok_or_else(|| syntax(1, 1, "empty input"))?;
    if toks.len() != 2 || toks[0].1 != magic || toks[1].1 != "1" {
        return Err(syntax(ln, 1, format!("expected `{magic} 1`")));
    }
    let (ln, toks) = lines.next().ok_or_else(|| syntax(ln + 1, 1, "missing `ntet` line"))?;
    if toks.len() != 2 || toks[0].1 != "ntet" {
        return Err(syntax(ln, 1, "expected `ntet <n>`"));
    }
    toks[1].1.parse::<usize>().map_err(|_| syntax(ln, toks[1].0, "bad tet count"))
}

fn parse_tet_id(ln: usize, toks: &[(usize, &str)], n: usize, seen: &mut BTreeSet<usize>) -> Result<usize, ParseError> {
    if toks[0].1 != "tet" {
        return Err(syntax(ln, toks[0].0, "expected `tet`"));
    }
    let (col, s) = *toks.get(1).ok_or_else(|| syntax(ln, toks[0].0, "missing tet id"))?;
    let t: usize = s.parse().map_err(|_| syntax(ln, col, "bad tet id"))?;
    if t >= n {
        return Err(syntax(ln, col, format!("tet id {t} out of range")));
    }
    if !seen.insert(t) {
        return Err(ParseError::DuplicateTet { line: ln, tet: t });
    }
    Ok(t)
}

/// Parses `.itri` text. Checks syntax only; gluing consistency is left to
/// [`Triangulation::validate`].
pub fn parse_itri(text: &str) -> Result<Triangulation, ParseError> {
    let mut lines = Lines::new(text);
    let n = expect_header(&mut lines, "itri")?;
    let mut tri = Triangulation::with_tets(n);
    let mut seen = BTreeSet::new();
    for (ln, toks) in lines {
        let t = parse_tet_id(ln, &toks, n, &mut seen)?;
        if toks.len() != 6 {
            return Err(syntax(ln, toks[0].0, "expected four face entries"));
        }
        for j in 0..4u8 {
            let (col, entry) = toks[2 + j as usize];
            if entry == "-" {
                continue;
            }
            let parts: Vec<&str> = entry.split(':').collect();
            if parts.len() != 3 {
                return Err(syntax(ln, col, "expected `<tet>:<face>:<perm>` or `-`"));
            }
            let target: usize = parts[0].parse().map_err(|_| syntax(ln, col, "bad target tet"))?;
            let face: u8 = match parts[1] {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                "3" => 3,
                _ => return Err(syntax(ln, col, "bad target face")),
            };
            let perm = Perm::parse(parts[2]).ok_or_else(|| ParseError::BadPermutation {
                line: ln,
                col,
                text: parts[2].to_string(),
            })?;
            if perm.apply(j) != face {
                return Err(syntax(ln, col, format!("target face {face} differs from σ({j}) = {}", perm.apply(j))));
            }
            tri.set_entry(t, j, Some(Gluing { tet: target, perm }));
        }
    }
    if let Some(missing) = (0..n).find(|t| !seen.contains(t)) {
        return Err(ParseError::MissingTet(missing));
    }
    Ok(tri)
}

pub fn write_itri(tri: &Triangulation) -> String {
    let mut out = String::new();
    writeln!(out, "itri 1").unwrap();
    writeln!(out, "ntet {}", tri.n()).unwrap();
    for t in 0..tri.n() {
        write!(out, "tet {t}").unwrap();
        for f in 0..4u8 {
            match tri.gluing(t, f) {
                Some(g) => write!(out, " {}:{}:{}", g.tet, g.perm.apply(f), g.perm).unwrap(),
                None => write!(out, " -").unwrap(),
            }
        }
        out.push('\n');
    }
    out
}

pub fn parse_ncrd(text: &str) -> Result<NormalCoords, ParseError> {
    let mut lines = Lines::new(text);
    let n = expect_header(&mut lines, "ncrd")?;
    let mut values = vec![0u32; 7 * n];
    let mut seen = BTreeSet::new();
    for (ln, toks) in lines {
        let t = parse_tet_id(ln, &toks, n, &mut seen)?;
        if toks.len() != 9 {
            return Err(syntax(ln, toks[0].0, "expected seven coordinates"));
        }
        for k in 0..7 {
            let (col, s) = toks[2 + k];
            values[7 * t + k] = s.parse().map_err(|_| syntax(ln, col, "bad coordinate"))?;
        }
    }
    if let Some(missing) = (0..n).find(|t| !seen.contains(t)) {
        return Err(ParseError::MissingTet(missing));
    }
    Ok(NormalCoords(values))
}

pub fn write_ncrd(x: &NormalCoords) -> String {
    let mut out = String::new();
    writeln!(out, "ncrd 1").unwrap();
    writeln!(out, "ntet {}", x.n()).unwrap();
    for t in 0..x.n() {
        write!(out, "tet {t}").unwrap();
        for k in 0..7 {
            write!(out, " {}", x.0[7 * t + k]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// `totalTet baseTet sheetLabel` per line.
pub fn write_map_tsv(tet_map: &[usize], sheets: &[String]) -> String {
    let mut out = String::new();
    for (t, (&b, s)) in tet_map.iter().zip(sheets).enumerate() {
        writeln!(out, "{t}\t{b}\t{s}").unwrap();
    }
    out
}

/// DOT text: one node per tet, one undirected edge per gluing labelled
/// with its faces and permutation.
pub fn dual_graph_dot(tri: &Triangulation) -> String {
    let mut out = String::from("graph dual {\n");
    for t in 0..tri.n() {
        writeln!(out, "  t{t};").unwrap();
    }
    for ((t, f), (t2, f2), perm) in tri.dual_graph() {
        writeln!(out, "  t{t} -- t{t2} [label=\"{f}:{f2}:{perm}\"];").unwrap();
    }
    out.push_str("}\n");
    out
}
