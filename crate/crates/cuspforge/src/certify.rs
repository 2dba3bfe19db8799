//! Hypothesis-checked incompressibility certificates and the end-to-end
//! pipeline: cover, build a surface with a quad, certify it.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use crate::covering::{branched_cover, finite_cover, CoveringMap};
use crate::error::{Error, Result};
use crate::io::{write_itri, write_ncrd};
use crate::normal::{is_linking, is_solution, matching_matrix, reconstruct, surface_curvature_check, NormalCoords};
use crate::surface::{construct_nonlinking_surface, Construction};
use crate::triangulation::Triangulation;

pub const HYPOTHESES: [&str; 5] = [
    "all_edge_indices_at_least_6",
    "surface_is_normal",
    "surface_embedded_admissible",
    "surface_not_linking",
    "curvature_check_passed",
];

/// Target index for `--force-curvature`.
pub const FORCED_INDEX: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    RefutedHypothesis,
    /// The surface is a cusp link; those are incompressible for a separate
    /// reason and are not what the pipeline is after.
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Certified => "certified",
            Verdict::RefutedHypothesis => "refuted-hypothesis",
            Verdict::NotApplicable => "not-applicable",
        }
    }

    pub fn parse(s: &str) -> Option<Verdict> {
        [Verdict::Certified, Verdict::RefutedHypothesis, Verdict::NotApplicable].into_iter().find(|v| v.as_str() == s)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    /// sha256 of the triangulation's `.itri` text.
    pub triangulation_hash: String,
    /// sha256 of the surface's `.ncrd` text.
    pub surface_hash: String,
    /// In the order of [`HYPOTHESES`]; checks after the first failure are
    /// still run and recorded.
    pub hypotheses: Vec<(String, bool)>,
    pub verdict: Verdict,
    pub provenance: BTreeMap<String, String>,
}

fn sha(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Runs the checks in order: edge indices, matching equations and
/// admissibility, closed reconstruction, not a link, vertex curvature.
pub fn certify(tri: &Triangulation, x: &NormalCoords) -> Certificate {
    let curved = tri.is_negatively_curved().0;
    let normal = x.n() == tri.n() && is_solution(&matching_matrix(tri), x) && !x.is_zero();
    let complex = if normal && x.is_admissible() { reconstruct(tri, x).ok().filter(|d| d.is_closed()) } else { None };
    let embedded = complex.is_some();
    let not_linking = complex.as_ref().is_some_and(|d| !is_linking(d));
    let curvature = complex.as_ref().is_some_and(|d| surface_curvature_check(tri, d).ok);
    let checks = [curved, normal, embedded, not_linking, curvature];
    let verdict = if checks.iter().all(|&c| c) {
        Verdict::Certified
    } else if curved && normal && embedded && !not_linking {
        Verdict::NotApplicable
    } else {
        Verdict::RefutedHypothesis
    };
    let mut provenance = BTreeMap::new();
    provenance.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    provenance.insert(
        "claim".into(),
        match verdict {
            Verdict::Certified => "incompressible: every edge index is at least 6 and the surface is normal and not a cusp link",
            Verdict::NotApplicable => "the surface is a cusp link; cusp links are incompressible on their own",
            Verdict::RefutedHypothesis => "no claim",
        }
        .into(),
    );
    provenance.insert(
        "isotopy".into(),
        "not linking means a quad is present, so the surface is not normally isotopic to a cusp link; ambient isotopy is not checked"
            .into(),
    );
    Certificate {
        triangulation_hash: sha(&write_itri(tri)),
        surface_hash: sha(&write_ncrd(x)),
        hypotheses: HYPOTHESES.iter().map(|h| h.to_string()).zip(checks).collect(),
        verdict,
        provenance,
    }
}

impl Certificate {
    pub fn hypothesis(&self, name: &str) -> Option<bool> {
        self.hypotheses.iter().find(|(h, _)| h == name).map(|&(_, v)| v)
    }

    fn entries(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        out.insert("hash.surface".to_string(), self.surface_hash.clone());
        out.insert("hash.triangulation".to_string(), self.triangulation_hash.clone());
        for (h, v) in &self.hypotheses {
            out.insert(format!("hypothesis.{h}"), v.to_string());
        }
        for (k, v) in &self.provenance {
            out.insert(format!("provenance.{k}"), v.clone());
        }
        out.insert("verdict".to_string(), self.verdict.to_string());
        out
    }

    /// `key=value` lines sorted by key.
    pub fn to_text(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn from_text(text: &str) -> Result<Certificate> {
        let bad = |m: String| Error::Invalid(format!("certificate: {m}"));
        let mut map = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("no '=' in {line:?}")))?;
            map.insert(k.to_string(), v.to_string());
        }
        let mut take = |k: &str| map.remove(k).ok_or_else(|| bad(format!("missing {k}")));
        let triangulation_hash = take("hash.triangulation")?;
        let surface_hash = take("hash.surface")?;
        let verdict = take("verdict")?;
        let verdict = Verdict::parse(&verdict).ok_or_else(|| bad(format!("unknown verdict {verdict}")))?;
        let mut hypotheses = Vec::new();
        for h in HYPOTHESES {
            let v = take(&format!("hypothesis.{h}"))?;
            hypotheses.push((h.to_string(), v.parse().map_err(|_| bad(format!("{h} is not a boolean")))?));
        }
        let mut provenance = BTreeMap::new();
        for (k, v) in map {
            let key = k.strip_prefix("provenance.").ok_or_else(|| bad(format!("unknown key {k}")))?;
            provenance.insert(key.to_string(), v);
        }
        Ok(Certificate { triangulation_hash, surface_hash, hypotheses, verdict, provenance })
    }

    /// Re-runs every check on the given inputs and compares hashes,
    /// hypotheses and verdict. Provenance is not compared.
    pub fn replay(&self, tri: &Triangulation, x: &NormalCoords) -> Result<()> {
        let again = certify(tri, x);
        if again.triangulation_hash != self.triangulation_hash || again.surface_hash != self.surface_hash {
            return Err(Error::Precondition("certificate refers to other inputs".into()));
        }
        if again.hypotheses != self.hypotheses || again.verdict != self.verdict {
            return Err(Error::Precondition(format!(
                "replay disagrees: recorded {} {:?}, recomputed {} {:?}",
                self.verdict, self.hypotheses, again.verdict, again.hypotheses
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSummary {
    pub base_tets: usize,
    pub degree: usize,
    pub tets: usize,
    /// Distinct sheet labels.
    pub sheets: usize,
    /// Copies used by the branched cover when curvature was forced.
    pub branched_copies: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PipelineResult {
    pub summary: CoverSummary,
    pub cover: CoveringMap,
    pub construction: Construction,
    pub certificate: Certificate,
    pub fallback: bool,
    pub timings: Vec<(&'static str, Duration)>,
}

impl PipelineResult {
    pub fn coords(&self) -> &NormalCoords {
        &self.construction.coords
    }

    /// 0 certified, 2 refuted hypothesis, 3 certified after the fallback,
    /// 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match (self.certificate.verdict, self.fallback) {
            (Verdict::Certified, false) => 0,
            (Verdict::Certified, true) => 3,
            (Verdict::RefutedHypothesis, _) => 2,
            (Verdict::NotApplicable, _) => 4,
        }
    }
}

/// Validates, checks edge indices (or raises them with a branched cover
/// when `force_curvature` is set), takes the finite cover, builds a
/// surface with a quad in it and certifies it on the cover.
pub fn run_main_pipeline(tri: &Triangulation, force_curvature: bool) -> Result<PipelineResult> {
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };
    let report = tri.validate();
    if !report.ok {
        return Err(Error::Invalid(format!("{:?}", report.violations)));
    }
    let mut ops = vec!["validate".to_string()];
    let mut base = tri.clone();
    let mut branched_copies = None;
    if !base.is_negatively_curved().0 {
        if !force_curvature {
            let low: Vec<usize> = base.edge_classes().iter().map(|c| c.index).filter(|&i| i < 6).collect();
            return Err(Error::Hypothesis(format!("edge indices {low:?} are below 6")));
        }
        let b = branched_cover(&base, FORCED_INDEX)?;
        ops.push(format!("branched_cover(target={FORCED_INDEX},copies={})", b.copies));
        branched_copies = Some(b.copies);
        base = b.cover.total;
    }
    lap("curvature", &mut timings);
    let cover = finite_cover(&base)?;
    ops.push(format!("finite_cover(degree={})", cover.degree));
    lap("cover", &mut timings);
    let construction = construct_nonlinking_surface(&cover.total)?;
    ops.push(format!(
        "construct(closing={},fallback={})",
        construction.closing, construction.fallback
    ));
    lap("construct", &mut timings);
    let mut certificate = certify(&cover.total, &construction.coords);
    ops.push("certify".into());
    lap("certify", &mut timings);
    certificate.provenance.insert("ops".into(), ops.join(","));
    certificate.provenance.insert("base_hash".into(), sha(&write_itri(tri)));
    let mut sheets: Vec<&String> = cover.sheet_label.iter().collect();
    sheets.sort();
    sheets.dedup();
    let summary = CoverSummary {
        base_tets: tri.n(),
        degree: cover.degree,
        tets: cover.total.n(),
        sheets: sheets.len(),
        branched_copies,
    };
    Ok(PipelineResult {
        summary,
        fallback: construction.fallback,
        cover,
        construction,
        certificate,
        timings,
    })
}

/// Exit code for a pipeline error: 2 when a hypothesis fails, else 4.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) => 2,
        _ => 4,
    }
}
