//! End-to-end pipeline: sample, triangulate, solve (optionally relax with
//! the harness), deform, and render. Every output lands in one directory
//! together with a `run.meta` sidecar from which the run can be replayed
//! bit for bit. On failure the partially written directory is removed.

use std::fs;
use std::path::{Path, PathBuf};

use harmonic_delaunay::geometry::{build_delaunay, cells_csv, edges_csv, wrap_coord};
use harmonic_delaunay::pointprocess::{sample_poisson, save_points, BoxMode};
use harmonic_delaunay::render::{
    render_level_curves, render_overlay, render_positions, render_triangulation, render_voronoi,
    RenderOptions,
};
use harmonic_delaunay::solver::{barycenter_residual, deform, deformed_csv, solve_harmonic};
use harmonic_delaunay::{fields, harness, Error, Result};
use harmonic_delaunay::{DelaunayGraph, PointSet, Surface};

use crate::config::{RunConfig, RunMeta};

/// Summary of a finished pipeline run.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub out_dir: PathBuf,
    pub n_points: usize,
    pub n_edges: usize,
    pub non_shared_edges: usize,
    pub solve_residual: f64,
    pub barycenter_residual: f64,
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<PipelineArtifacts> {
    config.validate()?;
    if out_dir.exists() && fs::read_dir(out_dir)?.next().is_some() {
        return Err(Error::InvalidParameter(format!(
            "output directory {} is not empty",
            out_dir.display()
        )));
    }
    let created = !out_dir.exists();
    fs::create_dir_all(out_dir)?;
    match run_steps(config, out_dir) {
        Ok(artifacts) => Ok(artifacts),
        Err(e) => {
            // no partial outputs on failure
            if created {
                let _ = fs::remove_dir_all(out_dir);
            } else if let Ok(entries) = fs::read_dir(out_dir) {
                for entry in entries.flatten() {
                    let _ = fs::remove_file(entry.path());
                }
            }
            Err(e)
        }
    }
}

fn run_steps(config: &RunConfig, out: &Path) -> Result<PipelineArtifacts> {
    let s = &config.sample;
    let points = sample_poisson::<f64>(s.dim, s.len, s.lambda, s.seed, s.palm)?;
    save_points(&points, &out.join("points.csv"))?;

    let graph = build_delaunay(points)?;
    fs::write(out.join("edges.csv"), edges_csv(&graph))?;
    fs::write(out.join("cells.csv"), cells_csv(&graph))?;

    let method = config.solve.method.parse()?;
    let (h, solve_report) = solve_harmonic(
        &graph,
        config.solve.tilt,
        config.solve.tol,
        config.solve.max_iter,
        method,
    )?;
    fs::write(out.join("surface.csv"), fields::surface_csv(&graph, &h))?;
    fs::write(out.join("solve_report.txt"), solve_report.to_kv())?;
    fs::write(
        out.join("solve_report.json"),
        serde_json::to_string_pretty(&solve_report).map_err(|e| Error::Metadata(e.to_string()))?,
    )?;

    if config.harness.enabled {
        let gamma = Surface::affine(config.solve.tilt, graph.n());
        let mut opts = harness::HarnessOpts::new(config.harness.t_max, config.harness.seed);
        opts.checkpoint_every = config.harness.trace_every.max(1);
        opts.trace_every = 0;
        let state = harness::harness_run(&graph, &gamma, &opts)?;
        fs::write(out.join("trace.csv"), harness::trace_csv(&graph, &state))?;
        fs::write(
            out.join("harness_surface.csv"),
            fields::surface_csv(&graph, &state.surface),
        )?;
    }

    let deformed = deform(&graph, config.solve.tol, config.solve.max_iter, method)?;
    fs::write(out.join("deformed.csv"), deformed_csv(&graph, &deformed))?;
    let bary = barycenter_residual(&graph, &deformed);

    // renders
    let star = star_options(&graph);
    fs::write(
        out.join("triangulation.svg"),
        render_triangulation(&graph, &star),
    )?;
    fs::write(
        out.join("deformed.svg"),
        render_positions(&graph, &deformed.positions, &star),
    )?;
    fs::write(
        out.join("voronoi.svg"),
        render_voronoi(&graph, &RenderOptions::default()),
    )?;
    // level curves of gamma - h: the harmonic surface's periodic part, negated
    let deviation: Vec<f64> = h.heights.iter().map(|c| -c).collect();
    fs::write(
        out.join("level_curves.svg"),
        render_level_curves(&graph, &deviation, config.render.levels, &RenderOptions::default()),
    )?;
    let (overlay_svg, non_shared) = overlay_of(&graph, &deformed.positions)?;
    fs::write(out.join("overlay.svg"), overlay_svg)?;

    let meta = RunMeta::new(config.clone());
    fs::write(
        out.join("run.meta"),
        serde_json::to_string_pretty(&meta).map_err(|e| Error::Metadata(e.to_string()))?,
    )?;

    let report = format!(
        "n_points={}\nn_edges={}\nsolve_residual_inf={:e}\nsolve_energy={}\nbarycenter_residual={:e}\nnon_shared_edges={}\n",
        graph.n(),
        graph.edges.len(),
        solve_report.residual_inf,
        solve_report.energy,
        bary,
        non_shared
    );
    fs::write(out.join("pipeline_report.txt"), report)?;

    Ok(PipelineArtifacts {
        out_dir: out.to_path_buf(),
        n_points: graph.n(),
        n_edges: graph.edges.len(),
        non_shared_edges: non_shared,
        solve_residual: solve_report.residual_inf,
        barycenter_residual: bary,
    })
}

/// Star the origin vertex when the sample is a Palm configuration.
pub fn star_options(graph: &DelaunayGraph) -> RenderOptions {
    RenderOptions {
        star_vertex: if graph.points.palm { Some(0) } else { None },
        ..Default::default()
    }
}

/// Delaunay triangulation of the deformed points (wrapped back into the
/// box), overlaid with the harmonic graph.
pub fn overlay_of(graph: &DelaunayGraph, positions: &[[f64; 2]]) -> Result<(String, usize)> {
    let len = graph.len();
    let wrapped: Vec<[f64; 2]> = positions
        .iter()
        .map(|p| [wrap_coord(p[0], len), wrap_coord(p[1], len)])
        .collect();
    let new_points = PointSet::from_points(2, len, BoxMode::Periodic, false, wrapped)?;
    let new_graph = build_delaunay(new_points)?;
    Ok(render_overlay(graph, positions, &new_graph))
}

/// Read back `deformed.csv` and produce the overlay.
pub fn overlay_from_artifacts(graph: &DelaunayGraph, path: &Path) -> Result<(String, usize)> {
    let text = fs::read_to_string(path)?;
    let mut positions = vec![[0.0f64; 2]; graph.n()];
    for (n, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("expected 7 columns, got {}", cols.len()),
            });
        }
        let v: usize = cols[0].parse().map_err(|e| Error::MalformedRow {
            line: n + 1,
            reason: format!("vertex: {e}"),
        })?;
        if v >= positions.len() {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("vertex {v} out of range"),
            });
        }
        for (k, col) in cols[3..5].iter().enumerate() {
            positions[v][k] = col.parse().map_err(|e| Error::MalformedRow {
                line: n + 1,
                reason: format!("coordinate: {e}"),
            })?;
        }
    }
    overlay_of(graph, &positions)
}

/// Read back `surface.csv` as the deviation `gamma - h` (negated periodic
/// part), for the level-curve renderer.
pub fn load_surface_deviation(graph: &DelaunayGraph, path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = vec![0.0f64; graph.n()];
    for (n, line) in text.lines().enumerate().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("expected 3 columns, got {}", cols.len()),
            });
        }
        let v: usize = cols[0].parse().map_err(|e| Error::MalformedRow {
            line: n + 1,
            reason: format!("vertex: {e}"),
        })?;
        if v >= values.len() {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("vertex {v} out of range"),
            });
        }
        let psi: f64 = cols[1].parse().map_err(|e| Error::MalformedRow {
            line: n + 1,
            reason: format!("psi: {e}"),
        })?;
        values[v] = -psi;
    }
    Ok(values)
}
