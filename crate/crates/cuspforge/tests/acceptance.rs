//! One PASS/FAIL line per acceptance criterion.
//!
//! Exits 0 so that a red criterion does not hide the other test targets.
//! Set `ACCEPTANCE_STRICT=1` to exit 1 when anything fails.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cuspforge::covering::{branched_cover, finite_cover, verify_branched_cover, verify_covering};
use cuspforge::hyperbolic::{build_quad, constants_h0_l0};
use cuspforge::io::parse_itri;
use cuspforge::normal::*;
use cuspforge::surface::*;
use cuspforge::triangulation::Triangulation;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn load(name: &str) -> Triangulation {
    parse_itri(&common::fixture(name)).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspforge")).args(args).output().expect("spawn cuspforge")
}

fn fx(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn p(path: &Path) -> String {
    path.display().to_string()
}

fn c1_edge_classes() -> Check {
    for (name, classes, index, cusps) in [("FIG8.itri", 2, 6, 1), ("DBL.itri", 6, 2, 4)] {
        let t = load(name);
        let g = common::raw(&common::fixture(name));
        let lib: Vec<usize> = t.edge_classes().iter().map(|c| c.index).collect();
        let mut sorted = lib.clone();
        sorted.sort();
        ensure!(sorted == common::edge_indices(&g), "{name}: library {sorted:?} vs oracle");
        ensure!(lib.len() == classes && lib.iter().all(|&i| i == index), "{name}: indices {lib:?}");
        ensure!(t.cusp_classes().len() == cusps && common::cusp_count(&g) == cusps, "{name}: cusps");
    }
    Ok("FIG8 2x6 1 cusp, DBL 6x2 4 cusps, oracle agrees".into())
}

fn c2_curvature() -> Check {
    let (f, _) = load("FIG8.itri").is_negatively_curved();
    let dbl = load("DBL.itri");
    let (d, _) = dbl.is_negatively_curved();
    ensure!(f && !d, "FIG8 {f}, DBL {d}");
    let low = dbl.edge_classes().iter().filter(|c| c.index < 6).count();
    Ok(format!("FIG8 true, DBL false with {low} classes below 6"))
}

fn c3_geometry() -> Check {
    let (h0, l0) = constants_h0_l0();
    ensure!(h0 == 2.0, "h0 = {h0}");
    ensure!((l0 - 1.5f64.acosh()).abs() < 1e-9 && (l0 - 0.962423650119).abs() < 1e-9, "l0 = {l0}");
    ensure!(l0 < 3f64.ln() && 3f64.ln() < h0, "ordering");
    let corner = 0.2f64.acos();
    for pair in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let q = build_quad(pair).map_err(|e| e.to_string())?;
        for i in 0..4 {
            ensure!((q.sides[i] - l0).abs() < 1e-9, "{pair:?} side {}", q.sides[i]);
            ensure!((q.corners[i] - corner).abs() < 1e-9, "{pair:?} corner {}", q.corners[i]);
            ensure!(q.corners[i] >= PI / 3.0, "corner below pi/3");
        }
        ensure!((corner - 1.369438406).abs() < 1e-9, "arccos(1/5)");
    }
    Ok(format!("h0={h0} l0={l0:.12} corner={corner:.12}"))
}

fn c4_matching() -> Check {
    let mut counts = Vec::new();
    for name in ["FIG8.itri", "DBL.itri"] {
        let t = load(name);
        let b = matching_matrix(&t);
        ensure!((b.nrows(), b.ncols) == (12, 14), "{name}: {}x{}", b.nrows(), b.ncols);
        for cusp in t.cusp_classes() {
            ensure!(is_solution(&b, &vertex_link(&t, &cusp)), "{name}: link fails");
        }
        let two = enumerate_solutions(&t, 2);
        for x in &two {
            ensure!(is_solution(&b, x) && x.is_admissible(), "{name}: {x:?} does not re-verify");
        }
        let one = enumerate_solutions(&t, 1);
        for x in &one {
            ensure!(two.contains(&x.scaled(2)), "{name}: 2x missing for {x:?}");
        }
        counts.push(format!("{name} {}/{}", one.len(), two.len()));
    }
    Ok(format!("12x14, solutions at bound 1/2: {}", counts.join(", ")))
}

fn c5_euler() -> Check {
    let mut worst = 0.0f64;
    for name in ["FIG8.itri", "DBL.itri"] {
        let t = load(name);
        let mut surfaces = enumerate_solutions(&t, 2);
        surfaces.extend(t.cusp_classes().iter().map(|c| vertex_link(&t, c)));
        for x in surfaces {
            let d = reconstruct(&t, &x).map_err(|e| e.to_string())?;
            let e = euler_characteristic(&d).map_err(|e| e.to_string())?;
            worst = worst.max((e.chi_gauss_bonnet - e.chi as f64).abs());
        }
    }
    ensure!(worst < 1e-6, "max |chiGB - chi| = {worst:e}");
    let link_chi = |name: &str| -> Vec<i64> {
        let t = load(name);
        t.cusp_classes()
            .iter()
            .map(|c| euler_characteristic(&reconstruct(&t, &vertex_link(&t, c)).unwrap()).unwrap().chi)
            .collect()
    };
    let (f, d) = (link_chi("FIG8.itri"), link_chi("DBL.itri"));
    ensure!(f.iter().all(|&c| c == 0), "FIG8 link chi {f:?}");
    ensure!(d.iter().all(|&c| c == 2), "DBL link chi {d:?}");
    Ok(format!("max |chiGB - chi| = {worst:.1e}, links 0 and 2"))
}

fn c6_finite_cover() -> Check {
    let mut failures = Vec::new();
    for name in ["FIG8.itri", "DBL.itri"] {
        let c = finite_cover(&load(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure!(c.degree == 8, "{name}: degree {}", c.degree);
        let r = verify_covering(&c);
        ensure!(r.ok, "{name}: {:?}", r.failures);
        let base = c.base.edge_classes();
        let total = c.total.edge_classes();
        let mut per_base = vec![0; base.len()];
        for l in &r.lifts {
            let (i, bi) = (total[l.total_class].index, base[l.base_class].index);
            ensure!(i % bi == 0 && i == l.wrap * bi, "{name}: lifted index {i} over {bi}");
            per_base[l.base_class] += l.wrap;
        }
        ensure!(per_base.iter().all(|&s| s == c.degree), "{name}: wraps {per_base:?}");
        let (ucs, pair) = c.total.unique_common_simplex();
        if !ucs {
            failures.push(format!("{name}: cover has no unique common simplices, tets {pair:?} share more than a face"));
        }
    }
    if failures.is_empty() {
        Ok("degree 8, verified, wraps sum to 8, UCS on both".into())
    } else {
        Err(failures.join("; "))
    }
}

fn c7_branched() -> Check {
    let mut out = Vec::new();
    for name in ["DBL.itri", "FIG8.itri"] {
        let b = branched_cover(&load(name), 6).map_err(|e| format!("{name}: {e}"))?;
        let r = verify_branched_cover(&b, 6);
        ensure!(r.ok, "{name}: {:?}", r.failures);
        let min = b.cover.total.edge_classes().iter().map(|c| c.index).min().unwrap_or(0);
        ensure!(min >= 6, "{name}: min index {min}");
        out.push(format!("{name} {} copies min index {min}", b.copies));
    }
    Ok(out.join(", "))
}

fn c8_construction() -> Check {
    let c = finite_cover(&load("FIG8.itri")).map_err(|e| e.to_string())?;
    let out = construct_nonlinking_surface(&c.total).map_err(|e| format!("FIG8 cover: {e}"))?;
    let t = &c.total;
    ensure!(is_solution(&matching_matrix(t), &out.coords) && out.coords.is_admissible(), "not admissible");
    ensure!(out.coords.quad_count() >= 1, "no quad");
    let d = reconstruct(t, &out.coords).map_err(|e| e.to_string())?;
    ensure!(!is_linking(&d), "linking");
    ensure!(out.checksums_intact(), "checksums broken");
    let chi = euler_characteristic(&d).map_err(|e| e.to_string())?.chi;
    ensure!(chi <= 0, "chi = {chi}");
    ensure!(!out.fallback, "fallback used");
    Ok(format!("{} quads, chi {chi}, closing {}", out.coords.quad_count(), out.closing))
}

fn c9_surgery() -> Check {
    let q = DiscType::Quad;
    let t = DiscType::Triangle;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for branch in [Branch::B, Branch::C] {
            let out = quadrilateral_surgery(0, q(a), q(b), branch).map_err(|e| e.to_string())?;
            let before = [GDisc::normal(0, q(a)), GDisc::normal(0, q(b))];
            ensure!(arc_multisets(&out) == arc_multisets(&before), "quad {a}/{b} {branch}");
        }
    }
    for v in 0..4 {
        for fam in 0..3 {
            let non = arc_multisets(&triangular_surgery(0, t(v), q(fam), false).map_err(|e| e.to_string())?);
            let ess = arc_multisets(&triangular_surgery(0, t(v), q(fam), true).map_err(|e| e.to_string())?);
            let faces = tunnel_faces(t(v), q(fam)).ok_or("no tunnel faces")?;
            for f in (0..4u8).filter(|f| !faces.contains(f)) {
                ensure!(non[f as usize] == ess[f as usize], "T{v} Q{fam} differ on face {f}");
            }
        }
    }
    let tri = load("DBL.itri");
    let mut discs = triangular_surgery(0, t(0), q(0), false).unwrap();
    discs.extend(triangular_surgery(1, t(0), q(0), false).unwrap());
    let planted = GeneralizedSurface { discs };
    let chain = detect_cyclic_tunnel(&tri, &planted).ok_or("planted chain missed")?;
    ensure!(chain.len() == 2, "chain {chain:?}");
    let plain = GeneralizedSurface::from_normal(&[(0, t(0)), (0, q(0)), (1, t(1)), (1, q(2))]);
    ensure!(detect_cyclic_tunnel(&tri, &plain).is_none(), "chain found without tunnels");
    Ok("6 quad cases, 12 triangular cases, planted 2-chain found".into())
}

fn c10_pipelines() -> Check {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let code = |o: &Output| o.status.code().unwrap_or(-1);
    let replays = |dir: &Path| -> Result<(), String> {
        let cert = std::fs::read_to_string(dir.join("certificate.txt")).map_err(|e| e.to_string())?;
        ensure!(cert.contains("verdict=certified"), "certificate not certified");
        let again = cli(&["certify", &p(&dir.join("cover.itri")), &p(&dir.join("surface.ncrd"))]);
        ensure!(code(&again) == 0, "re-certify exited {}", code(&again));
        // Provenance records how the pipeline got there; the rest must match.
        let core = |t: &str| t.lines().filter(|l| !l.starts_with("provenance.")).map(String::from).collect::<Vec<_>>();
        ensure!(core(&String::from_utf8_lossy(&again.stdout)) == core(&cert), "re-certified text differs");
        Ok(())
    };

    let dir = scratch("fig8");
    let o = cli(&["pipeline", &fx("FIG8.itri"), "-o", &p(&dir)]);
    if code(&o) == 0 {
        match replays(&dir) {
            Ok(()) => notes.push("FIG8 0 replays".to_string()),
            Err(e) => failures.push(format!("FIG8: {e}")),
        }
    } else {
        let err = String::from_utf8_lossy(&o.stderr);
        failures.push(format!("FIG8 exited {} ({})", code(&o), err.lines().next().unwrap_or("").trim()));
    }

    let o = cli(&["pipeline", &fx("DBL.itri")]);
    if code(&o) == 2 {
        notes.push("DBL 2".into());
    } else {
        failures.push(format!("DBL exited {}", code(&o)));
    }

    let dir = scratch("dbl-forced");
    let o = cli(&["pipeline", &fx("DBL.itri"), "--force-curvature", "-o", &p(&dir)]);
    if code(&o) == 0 {
        match replays(&dir) {
            Ok(()) => notes.push("DBL forced 0 replays".to_string()),
            Err(e) => failures.push(format!("DBL forced: {e}")),
        }
    } else {
        failures.push(format!("DBL forced exited {}", code(&o)));
    }
    if failures.is_empty() {
        Ok(notes.join(", "))
    } else {
        Err(format!("{}; passing: {}", failures.join("; "), notes.join(", ")))
    }
}

/// Every command twice; stdout, exit code and written files must match.
fn c11_determinism() -> Check {
    let run = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let dir = scratch(tag);
        let d = |f: &str| p(&dir.join(f));
        let mut out = Vec::new();
        let mut record = |label: String, o: Output| {
            out.push((format!("{label} exit"), o.status.code().unwrap_or(-1).to_string().into_bytes()));
            out.push((format!("{label} stdout"), o.stdout));
        };
        for name in ["FIG8.itri", "DBL.itri"] {
            let f = fx(name);
            record(format!("validate {name}"), cli(&["validate", &f]));
            record(format!("edges {name}"), cli(&["edges", &f]));
            record(format!("unfold {name}"), cli(&["unfold", &f, "--emit-itri", &d(&format!("{name}.ball"))]));
            record(
                format!("cover {name}"),
                cli(&["cover", &f, "-o", &d(&format!("{name}.cover")), "--map", &d(&format!("{name}.map"))]),
            );
            record(
                format!("branch-cover {name}"),
                cli(&["branch-cover", &f, "-o", &d(&format!("{name}.bc")), "--map", &d(&format!("{name}.bcmap"))]),
            );
            record(format!("matrix {name}"), cli(&["normal", "matrix", &f]));
            record(format!("enumerate {name}"), cli(&["normal", "enumerate", &f, "--bound", "2"]));
            record(format!("dual-graph {name}"), cli(&["export", "dual-graph", &f]));
            record(format!("pipeline {name}"), cli(&["pipeline", &f, "-o", &d(&format!("{name}.pipe"))]));
        }
        let dbl_cover = d("DBL.itri.cover");
        record(
            "construct".into(),
            cli(&["surface", "construct", &dbl_cover, "-o", &d("s.ncrd"), "--log", &d("s.log")]),
        );
        for sub in ["reconstruct", "check"] {
            record(format!("{sub}"), cli(&["normal", sub, &dbl_cover, &d("s.ncrd")]));
        }
        record("certify".into(), cli(&["certify", &dbl_cover, &d("s.ncrd")]));
        record("geom".into(), cli(&["geom", "constants"]));
        record(
            "pipeline forced".into(),
            cli(&["pipeline", &fx("DBL.itri"), "--force-curvature", "-o", &d("forced")]),
        );
        let mut files: Vec<PathBuf> = Vec::new();
        let mut stack = vec![dir.clone()];
        while let Some(x) = stack.pop() {
            for e in std::fs::read_dir(&x).unwrap() {
                let path = e.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    files.push(path);
                }
            }
        }
        files.sort();
        for f in files {
            let rel = f.strip_prefix(&dir).unwrap().display().to_string();
            out.push((rel, std::fs::read(&f).unwrap()));
        }
        out
    };
    let (a, b) = (run("det-a"), run("det-b"));
    ensure!(a.len() == b.len(), "{} vs {} outputs", a.len(), b.len());
    for ((la, xa), (lb, xb)) in a.iter().zip(&b) {
        ensure!(la == lb && xa == xb, "{la} differs");
    }
    Ok(format!("{} outputs identical across two runs", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("edge classes and cusps", c1_edge_classes),
        ("curvature predicate", c2_curvature),
        ("geometry constants", c3_geometry),
        ("matching system", c4_matching),
        ("Euler characteristic", c5_euler),
        ("finite cover", c6_finite_cover),
        ("branched cover", c7_branched),
        ("non-linking surface on the FIG8 cover", c8_construction),
        ("surgery local invariants", c9_surgery),
        ("pipelines", c10_pipelines),
        ("determinism", c11_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
