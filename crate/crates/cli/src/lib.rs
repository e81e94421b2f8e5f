//! Library half of the `hdt` binary: configuration, the individual command
//! implementations, and the end-to-end pipeline. The binary is a thin
//! argument parser over these functions, which keeps them testable.

pub mod config;
pub mod pipeline;

use std::fs;
use std::path::Path;

use harmonic_delaunay::geometry::{
    assumption_diagnostics, build_delaunay, cells_csv, edges_csv,
};
use harmonic_delaunay::pointprocess::{load_points, sample_poisson, save_points};
use harmonic_delaunay::randomwalk::{environment_check, moment_check, walk, walk_csv, ClockMode};
use harmonic_delaunay::solver::{deform, deformed_csv, solve_harmonic, Method};
use harmonic_delaunay::{fields, harness, Error, Result};
use harmonic_delaunay::{DelaunayGraph, PointSet, Surface};

/// Exit code mapping: 0 success, 2 configuration error, 3 numerical
/// non-convergence, 4 I/O or malformed data.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NotConverged { .. } => 3,
        Error::Io(_)
        | Error::MalformedRow { .. }
        | Error::Metadata(_)
        | Error::OutOfBox { .. }
        | Error::DuplicatePoint { .. }
        | Error::MissingOrigin { .. } => 4,
        _ => 2,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn graph_from_points(path: &Path) -> Result<DelaunayGraph> {
    let points: PointSet = load_points(path)?;
    build_delaunay(points)
}

pub fn cmd_sample(
    dim: usize,
    len: f64,
    lambda: f64,
    seed: u64,
    palm: bool,
    out: &Path,
) -> Result<()> {
    let set = sample_poisson::<f64>(dim, len, lambda, seed, palm)?;
    ensure_dir(out)?;
    save_points(&set, &out.join("points.csv"))?;
    Ok(())
}

pub fn cmd_triangulate(points: &Path, out: &Path) -> Result<()> {
    let graph = graph_from_points(points)?;
    ensure_dir(out)?;
    fs::write(out.join("edges.csv"), edges_csv(&graph))?;
    if graph.is_periodic() {
        fs::write(out.join("cells.csv"), cells_csv(&graph))?;
    }
    Ok(())
}

pub fn cmd_solve(
    points: &Path,
    tilt: [f64; 2],
    tol: f64,
    max_iter: u64,
    method: Method,
    out: &Path,
) -> Result<()> {
    let graph = graph_from_points(points)?;
    let (h, report) = solve_harmonic(&graph, tilt, tol, max_iter, method)?;
    ensure_dir(out)?;
    fs::write(out.join("surface.csv"), fields::surface_csv(&graph, &h))?;
    fs::write(out.join("solve_report.txt"), report.to_kv())?;
    fs::write(
        out.join("solve_report.json"),
        serde_json::to_string_pretty(&report).map_err(|e| Error::Metadata(e.to_string()))?,
    )?;
    Ok(())
}

pub fn cmd_harness(
    points: &Path,
    tilt: [f64; 2],
    t_max: f64,
    seed: u64,
    trace_every: u64,
    out: &Path,
) -> Result<()> {
    let graph = graph_from_points(points)?;
    let gamma = Surface::affine(tilt, graph.n());
    let mut opts = harness::HarnessOpts::new(t_max, seed);
    opts.checkpoint_every = trace_every.max(1);
    opts.trace_every = 0;
    let state = harness::harness_run(&graph, &gamma, &opts)?;
    ensure_dir(out)?;
    fs::write(out.join("trace.csv"), harness::trace_csv(&graph, &state))?;
    fs::write(
        out.join("harness_surface.csv"),
        fields::surface_csv(&graph, &state.surface),
    )?;
    Ok(())
}

pub fn cmd_deform(
    points: &Path,
    tol: f64,
    max_iter: u64,
    method: Method,
    out: &Path,
) -> Result<()> {
    let graph = graph_from_points(points)?;
    let deformed = deform(&graph, tol, max_iter, method)?;
    ensure_dir(out)?;
    fs::write(out.join("deformed.csv"), deformed_csv(&graph, &deformed))?;
    let bary = harmonic_delaunay::solver::barycenter_residual(&graph, &deformed);
    let mut report = String::new();
    for r in &deformed.reports {
        report.push_str(&r.to_kv());
        report.push('\n');
    }
    use std::fmt::Write as _;
    let _ = writeln!(report, "barycenter_residual={bary:e}");
    fs::write(out.join("deform_report.txt"), report)?;
    let json = serde_json::json!({
        "reports": deformed.reports,
        "barycenter_residual": bary,
    });
    fs::write(
        out.join("deform_report.json"),
        serde_json::to_string_pretty(&json).map_err(|e| Error::Metadata(e.to_string()))?,
    )?;
    Ok(())
}

pub fn cmd_walk(
    points: &Path,
    start: usize,
    t_max: f64,
    seed: u64,
    clock: ClockMode,
    out: &Path,
) -> Result<()> {
    let graph = graph_from_points(points)?;
    let trace = walk(&graph, start, t_max, seed, clock)?;
    ensure_dir(out)?;
    fs::write(out.join("walk.csv"), walk_csv(&graph, &trace))?;
    Ok(())
}

pub fn cmd_diagnostics(
    points: &Path,
    beta: f64,
    r: f64,
    n_steps: usize,
    n_walks: usize,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let graph = graph_from_points(points)?;
    let mut text = String::new();
    use std::fmt::Write as _;

    let a = assumption_diagnostics(&graph, beta, r);
    let _ = writeln!(text, "[assumptions]");
    let _ = writeln!(text, "beta={}", a.beta);
    let _ = writeln!(text, "r={}", a.r);
    let _ = writeln!(text, "exp_degree_mean={}", a.exp_degree_mean);
    let _ = writeln!(text, "exp_degree_se={}", a.exp_degree_se);
    let _ = writeln!(text, "perimeter_sq_mean={}", a.perimeter_sq_mean);
    let _ = writeln!(text, "perimeter_sq_se={}", a.perimeter_sq_se);
    let _ = writeln!(text, "reach_moment_mean={}", a.reach_moment_mean);
    let _ = writeln!(text, "reach_moment_se={}", a.reach_moment_se);

    let f: Vec<f64> = (0..graph.n()).map(|v| graph.degree(v) as f64).collect();
    let env = environment_check(&graph, &f, n_steps, seed)?;
    let _ = writeln!(text, "\n[environment]");
    let _ = writeln!(text, "functional=degree");
    let _ = writeln!(text, "time_average={}", env.time_average);
    let _ = writeln!(text, "spatial_average={}", env.spatial_average);
    let _ = writeln!(text, "difference={}", env.difference);
    let _ = writeln!(text, "stderr={}", env.stderr);

    let gamma = Surface::affine([1.0, 0.0], graph.n());
    let moments = moment_check(&graph, &gamma, 2, &[1.0, 2.0, 5.0], n_walks, seed)?;
    let _ = writeln!(text, "\n[moments]");
    let _ = writeln!(text, "r={}", moments.r);
    let _ = writeln!(text, "gradient_moment={}", moments.gradient_moment);
    for row in &moments.rows {
        let _ = writeln!(
            text,
            "t={} empirical={} stderr={} bound={} within_bound={}",
            row.t, row.empirical, row.stderr, row.bound, row.within_bound
        );
    }

    ensure_dir(out)?;
    fs::write(out.join("diagnostics.txt"), text)?;
    Ok(())
}

/// Rendering kinds available from a pipeline artifact directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderKind {
    Triangulation,
    Voronoi,
    LevelCurves,
    Overlay,
}

impl std::str::FromStr for RenderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangulation" => Ok(RenderKind::Triangulation),
            "voronoi" => Ok(RenderKind::Voronoi),
            "level-curves" => Ok(RenderKind::LevelCurves),
            "overlay" => Ok(RenderKind::Overlay),
            other => Err(Error::InvalidParameter(format!(
                "unknown render kind '{other}'"
            ))),
        }
    }
}

pub fn cmd_render(dir: &Path, kind: RenderKind, out: Option<&Path>) -> Result<()> {
    let graph = graph_from_points(&dir.join("points.csv"))?;
    let (name, svg) = match kind {
        RenderKind::Triangulation => {
            let opts = pipeline::star_options(&graph);
            (
                "triangulation.svg",
                harmonic_delaunay::render::render_triangulation(&graph, &opts),
            )
        }
        RenderKind::Voronoi => (
            "voronoi.svg",
            harmonic_delaunay::render::render_voronoi(
                &graph,
                &harmonic_delaunay::render::RenderOptions::default(),
            ),
        ),
        RenderKind::LevelCurves => {
            let values = pipeline::load_surface_deviation(&graph, &dir.join("surface.csv"))?;
            (
                "level_curves.svg",
                harmonic_delaunay::render::render_level_curves(
                    &graph,
                    &values,
                    12,
                    &harmonic_delaunay::render::RenderOptions::default(),
                ),
            )
        }
        RenderKind::Overlay => {
            let (svg, _) = pipeline::overlay_from_artifacts(&graph, &dir.join("deformed.csv"))?;
            ("overlay.svg", svg)
        }
    };
    let target = out
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| dir.join(name));
    fs::write(target, svg)?;
    Ok(())
}
