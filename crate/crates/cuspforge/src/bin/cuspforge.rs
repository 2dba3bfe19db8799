use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use cuspforge::ball::{unfold, wedge_sums};
use cuspforge::certify::{certify, error_exit_code, run_main_pipeline, Certificate, Verdict};
use cuspforge::covering::{branched_cover, finite_cover, verify_branched_cover, verify_covering};
use cuspforge::hyperbolic::{build_quad, constants_h0_l0};
use cuspforge::io::{dual_graph_dot, parse_itri, parse_ncrd, write_itri, write_map_tsv, write_ncrd};
use cuspforge::normal::{
    components, enumerate_solutions, euler_characteristic, is_linking, is_solution, matching_matrix, reconstruct,
    surface_curvature_check, NormalCoords,
};
use cuspforge::surface::construct_nonlinking_surface;
use cuspforge::triangulation::{Triangulation, EDGES};

#[derive(Parser)]
#[command(name = "cuspforge", version, about = "Ideal triangulations, covers and normal surfaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check gluing consistency and orientability.
    Validate { input: PathBuf },
    /// Edge classes with their indices, and cusps.
    Edges { input: PathBuf },
    /// Unfold into a ball and print its tree, boundary pairs and weights.
    Unfold {
        input: PathBuf,
        /// Write the ball with boundary faces as `-`.
        #[arg(long)]
        emit_itri: Option<PathBuf>,
    },
    /// Finite cover by repeated doubling of the ball.
    Cover {
        input: PathBuf,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Branched cover raising every edge index to the target.
    BranchCover {
        input: PathBuf,
        #[arg(long, default_value_t = 6)]
        target_index: usize,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
    },
    #[command(subcommand)]
    Normal(NormalCmd),
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Check the incompressibility hypotheses for a surface.
    Certify {
        input: PathBuf,
        surface: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Cover, construct and certify.
    Pipeline {
        input: PathBuf,
        /// Raise edge indices with a branched cover first.
        #[arg(long)]
        force_curvature: bool,
        /// Directory for cover.itri, map.tsv, surface.ncrd, resolution.log
        /// and certificate.txt.
        #[arg(short)]
        o: Option<PathBuf>,
    },
    #[command(subcommand)]
    Geom(GeomCmd),
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Subcommand)]
enum NormalCmd {
    /// Matching equations, one row per line.
    Matrix { input: PathBuf },
    /// Admissible solutions with every coordinate at most the bound.
    Enumerate {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        bound: u32,
    },
    /// Build the surface and print its cell counts and components.
    Reconstruct { input: PathBuf, surface: PathBuf },
    /// Matching, admissibility, Euler characteristic, linking and curvature.
    Check { input: PathBuf, surface: PathBuf },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Build a closed normal surface with a quad.
    Construct {
        input: PathBuf,
        #[arg(short)]
        o: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GeomCmd {
    /// h0, l0 and the quad's side and corner.
    Constants,
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Dual graph in DOT format.
    DualGraph {
        input: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
}

fn read_tri(path: &Path) -> Result<Triangulation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_itri(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_coords(path: &Path, tri: &Triangulation) -> Result<NormalCoords> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let x = parse_ncrd(&text).with_context(|| format!("parsing {}", path.display()))?;
    if x.n() != tri.n() {
        bail!("{} has {} tets, triangulation has {}", path.display(), x.n(), tri.n());
    }
    Ok(x)
}

/// Writes through a temporary file in the same directory.
fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, text).with_context(|| format!("writing {}", path.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn validate(input: &Path) -> Result<i32> {
    let tri = read_tri(input)?;
    let r = tri.validate();
    println!("ok={}", r.ok);
    println!("orientable={}", r.orientable);
    println!("tets={}", tri.n());
    for v in &r.violations {
        println!("violation={v:?}");
    }
    Ok(if r.ok { 0 } else { 4 })
}

fn edges(input: &Path) -> Result<i32> {
    let tri = read_tri(input)?;
    let classes = tri.edge_classes();
    for (i, c) in classes.iter().enumerate() {
        let members: Vec<String> = c
            .members
            .iter()
            .map(|&(t, e)| format!("{t}:{}{}", EDGES[e].0, EDGES[e].1))
            .collect();
        println!("edge {i} index {} members {}", c.index, members.join(" "));
    }
    for (i, c) in tri.cusp_classes().iter().enumerate() {
        let corners: Vec<String> = c.corners.iter().map(|(t, v)| format!("{t}:{v}")).collect();
        println!("cusp {i} corners {}", corners.join(" "));
    }
    let (curved, singular) = tri.is_negatively_curved();
    println!("negatively_curved={curved}");
    println!("singular_edges={}", singular.len());
    let (ucs, witness) = tri.unique_common_simplex();
    match witness {
        Some((a, b)) => println!("unique_common_simplex={ucs} witness={a},{b}"),
        None => println!("unique_common_simplex={ucs}"),
    }
    Ok(0)
}

fn unfold_cmd(input: &Path, emit_itri: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let ball = unfold(&tri)?;
    println!("tets {}", ball.n());
    let copy: Vec<String> = ball.copy_of.iter().map(|t| t.to_string()).collect();
    println!("copy_of {}", copy.join(" "));
    for ((t, f), (t2, f2), p) in ball.tree() {
        println!("tree {t}:{f} {t2}:{f2} {p}");
    }
    for p in &ball.pairs {
        println!("pair {}:{} {}:{} {}", p.a.0, p.a.1, p.b.0, p.b.1, p.perm);
    }
    for (class, m) in ball.boundary_weights().iter().enumerate() {
        println!("weight edge {class} m {m}");
    }
    for (class, w) in wedge_sums(&ball) {
        println!("wedges edge {class} sum {w}");
    }
    if let Some(path) = emit_itri {
        write_atomic(path, &write_itri(&ball.tri))?;
    }
    Ok(0)
}

fn cover_cmd(input: &Path, out: &Path, map: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let c = finite_cover(&tri)?;
    let report = verify_covering(&c);
    write_atomic(out, &write_itri(&c.total))?;
    if let Some(m) = map {
        write_atomic(m, &write_map_tsv(&c.tet_map, &c.sheet_label))?;
    }
    println!("degree={}", c.degree);
    println!("tets={}", c.total.n());
    println!("verified={}", report.ok);
    println!("unique_common_simplex={}", c.total.unique_common_simplex().0);
    for f in &report.failures {
        println!("failure={f}");
    }
    Ok(if report.ok { 0 } else { 4 })
}

fn branch_cover_cmd(input: &Path, target: usize, out: &Path, map: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let b = branched_cover(&tri, target)?;
    let report = verify_branched_cover(&b, target);
    write_atomic(out, &write_itri(&b.cover.total))?;
    if let Some(m) = map {
        write_atomic(m, &write_map_tsv(&b.cover.tet_map, &b.cover.sheet_label))?;
    }
    println!("copies={}", b.copies);
    println!("tets={}", b.cover.total.n());
    let min = b.cover.total.edge_classes().iter().map(|c| c.index).min().unwrap_or(0);
    println!("min_index={min}");
    println!("verified={}", report.ok);
    for f in &report.failures {
        println!("failure={f}");
    }
    Ok(if report.ok { 0 } else { 4 })
}

fn normal_cmd(cmd: &NormalCmd) -> Result<i32> {
    match cmd {
        NormalCmd::Matrix { input } => {
            let tri = read_tri(input)?;
            let b = matching_matrix(&tri);
            println!("rows {} cols {}", b.nrows(), b.ncols);
            for row in b.dense() {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                println!("{}", cells.join(" "));
            }
            Ok(0)
        }
        NormalCmd::Enumerate { input, bound } => {
            let tri = read_tri(input)?;
            let sols = enumerate_solutions(&tri, *bound);
            println!("solutions {}", sols.len());
            for x in sols {
                let cells: Vec<String> = x.0.iter().map(|v| v.to_string()).collect();
                println!("{}", cells.join(" "));
            }
            Ok(0)
        }
        NormalCmd::Reconstruct { input, surface } => {
            let tri = read_tri(input)?;
            let x = read_coords(surface, &tri)?;
            let d = reconstruct(&tri, &x)?;
            println!("discs={}", d.discs.len());
            println!("closed={}", d.is_closed());
            println!("surface_vertices={}", d.vertices.len());
            for (i, c) in components(&tri, &d).iter().enumerate() {
                let chi = euler_characteristic(c).map(|e| e.chi.to_string()).unwrap_or_else(|e| e.to_string());
                println!("component {i} discs {} quads {} chi {chi}", c.discs.len(), c.quad_count());
            }
            Ok(0)
        }
        NormalCmd::Check { input, surface } => {
            let tri = read_tri(input)?;
            let x = read_coords(surface, &tri)?;
            let solution = is_solution(&matching_matrix(&tri), &x);
            println!("solution={solution}");
            println!("admissible={}", x.is_admissible());
            println!("quads={}", x.quad_count());
            if !(solution && x.is_admissible()) {
                return Ok(4);
            }
            let d = reconstruct(&tri, &x)?;
            println!("closed={}", d.is_closed());
            let e = euler_characteristic(&d)?;
            println!("chi={}", e.chi);
            println!("chi_gauss_bonnet={:.9}", e.chi_gauss_bonnet);
            println!("linking={}", is_linking(&d));
            println!("curvature_ok={}", surface_curvature_check(&tri, &d).ok);
            Ok(0)
        }
    }
}

fn construct_cmd(input: &Path, out: &Path, log: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let c = construct_nonlinking_surface(&tri)?;
    write_atomic(out, &write_ncrd(&c.coords))?;
    if let Some(l) = log {
        write_atomic(l, &c.log_text())?;
    }
    println!("fallback={}", c.fallback);
    println!("closing={}", c.closing);
    println!("quads={}", c.coords.quad_count());
    println!("checksums_intact={}", c.checksums_intact());
    Ok(if c.fallback { 3 } else { 0 })
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Certified => 0,
        Verdict::RefutedHypothesis => 2,
        Verdict::NotApplicable => 4,
    }
}

fn certify_cmd(input: &Path, surface: &Path, out: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let x = read_coords(surface, &tri)?;
    let cert = certify(&tri, &x);
    emit(out, &cert.to_text())?;
    Ok(verdict_code(cert.verdict))
}

fn pipeline_cmd(input: &Path, force: bool, out: Option<&Path>) -> Result<i32> {
    let tri = read_tri(input)?;
    let r = match run_main_pipeline(&tri, force) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(error_exit_code(&e));
        }
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_atomic(&dir.join("cover.itri"), &write_itri(&r.cover.total))?;
        write_atomic(&dir.join("map.tsv"), &write_map_tsv(&r.cover.tet_map, &r.cover.sheet_label))?;
        write_atomic(&dir.join("surface.ncrd"), &write_ncrd(r.coords()))?;
        write_atomic(&dir.join("resolution.log"), &r.construction.log_text())?;
        write_atomic(&dir.join("certificate.txt"), &r.certificate.to_text())?;
    }
    // The replay is part of the run: a certificate that does not replay is a
    // failure whatever it says.
    let check = Certificate::from_text(&r.certificate.to_text())?;
    if let Err(e) = check.replay(&r.cover.total, r.coords()) {
        eprintln!("error: {e}");
        return Ok(4);
    }
    print!("{}", r.certificate.to_text());
    eprintln!(
        "degree={} tets={} sheets={} fallback={}",
        r.summary.degree, r.summary.tets, r.summary.sheets, r.fallback
    );
    for (stage, t) in &r.timings {
        eprintln!("time.{stage}={:.3}s", t.as_secs_f64());
    }
    Ok(r.exit_code())
}

fn geom_constants() -> Result<i32> {
    let (h0, l0) = constants_h0_l0();
    let q = build_quad((0, 1))?;
    println!("h0={h0:.12}");
    println!("l0={l0:.12}");
    println!("quad_side={:.12}", q.side_length);
    println!("quad_corner={:.12}", q.corner_angle);
    Ok(0)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Validate { input } => validate(&input),
        Cmd::Edges { input } => edges(&input),
        Cmd::Unfold { input, emit_itri } => unfold_cmd(&input, emit_itri.as_deref()),
        Cmd::Cover { input, o, map } => cover_cmd(&input, &o, map.as_deref()),
        Cmd::BranchCover { input, target_index, o, map } => branch_cover_cmd(&input, target_index, &o, map.as_deref()),
        Cmd::Normal(cmd) => normal_cmd(&cmd),
        Cmd::Surface(SurfaceCmd::Construct { input, o, log }) => construct_cmd(&input, &o, log.as_deref()),
        Cmd::Certify { input, surface, o } => certify_cmd(&input, &surface, o.as_deref()),
        Cmd::Pipeline { input, force_curvature, o } => pipeline_cmd(&input, force_curvature, o.as_deref()),
        Cmd::Geom(GeomCmd::Constants) => geom_constants(),
        Cmd::Export(ExportCmd::DualGraph { input, o }) => {
            let tri = read_tri(&input)?;
            emit(o.as_deref(), &dual_graph_dot(&tri))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(4)
        }
    }
}
