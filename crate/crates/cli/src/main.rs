use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use harmonic_delaunay::randomwalk::ClockMode;
use harmonic_delaunay::solver::Method;
use hdt::config::{load_config, load_meta, RunConfig};
use hdt::{cmd_deform, cmd_diagnostics, cmd_harness, cmd_render, cmd_sample, cmd_solve,
          cmd_triangulate, cmd_walk, exit_code, pipeline, RenderKind};

#[derive(Parser)]
#[command(

    name = "hdt",
    about = "Harmonic deformation of Delaunay triangulations: sampling, relaxation, solving, walks and figures",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_tilt(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.is_empty() || parts.len() > 2 {
        return Err("tilt must be 'cx[,cy]'".into());
    }
    let mut tilt = [0.0f64; 2];
    for (k, p) in parts.iter().enumerate() {
        tilt[k] = p.trim().parse().map_err(|e| format!("tilt: {e}"))?;
    }
    Ok(tilt)
}

#[derive(Subcommand)]
enum Command {
    /// Sample a Poisson point configuration on a periodic box.
    Sample {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Box side length.
        #[arg(long = "box", default_value_t = 24.0)]
        len: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Pin a point at the origin (Palm convention).
        #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
        palm: bool,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Build the Delaunay graph and export edges and cells.
    Triangulate {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve for the harmonic surface with a prescribed tilt.
    Solve {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_parser = parse_tilt, default_value = "1,0")]
        tilt: [f64; 2],
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: u64,
        #[arg(long, default_value = "cg")]
        method: Method,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Relax a tilted surface with the zero-temperature harness process.
    Harness {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, value_parser = parse_tilt, default_value = "1,0")]
        tilt: [f64; 2],
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Trace checkpoint cadence in events.
        #[arg(long, default_value_t = 200)]
        trace_every: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Solve both coordinate surfaces and export the deformed positions.
    Deform {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_iter: u64,
        #[arg(long, default_value = "cg")]
        method: Method,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Simulate one random walk and export its trace.
    Walk {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
        #[arg(long, default_value_t = 13)]
        seed: u64,
        /// `jump-rate` or `uniformized`.
        #[arg(long, default_value = "jump-rate")]
        clock: ClockMode,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Moment, environment and assumption diagnostics.
    Diagnostics {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        beta: f64,
        #[arg(long, default_value_t = 4.5)]
        r: f64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 10_000)]
        walks: usize,
        #[arg(long, default_value_t = 17)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Render a figure from a pipeline artifact directory.
    Render {
        #[arg(long)]
        dir: PathBuf,
        /// triangulation | voronoi | level-curves | overlay
        #[arg(long)]
        kind: RenderKind,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline from a configuration file.
    Pipeline {
        /// TOML configuration.
        #[arg(long, conflicts_with = "replay")]
        config: Option<PathBuf>,
        /// Replay a previous run from its `run.meta` sidecar.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Output directory (must be empty or absent).
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> harmonic_delaunay::Result<()> {
    match cli.command {
        Command::Sample {
            dim,
            len,
            lambda,
            seed,
            palm,
            out,
        } => cmd_sample(dim, len, lambda, seed, palm, &out),
        Command::Triangulate { points, out } => cmd_triangulate(&points, &out),
        Command::Solve {
            points,
            tilt,
            tol,
            max_iter,
            method,
            out,
        } => cmd_solve(&points, tilt, tol, max_iter, method, &out),
        Command::Harness {
            points,
            tilt,
            t_max,
            seed,
            trace_every,
            out,
        } => cmd_harness(&points, tilt, t_max, seed, trace_every, &out),
        Command::Deform {
            points,
            tol,
            max_iter,
            method,
            out,
        } => cmd_deform(&points, tol, max_iter, method, &out),
        Command::Walk {
            points,
            start,
            t_max,
            seed,
            clock,
            out,
        } => cmd_walk(&points, start, t_max, seed, clock, &out),
        Command::Diagnostics {
            points,
            beta,
            r,
            steps,
            walks,
            seed,
            out,
        } => cmd_diagnostics(&points, beta, r, steps, walks, seed, &out),
        Command::Render { dir, kind, out } => cmd_render(&dir, kind, out.as_deref()),
        Command::Pipeline {
            config,
            replay,
            out,
        } => {
            let cfg: RunConfig = match (config, replay) {
                (Some(path), None) => load_config(&path)?,
                (None, Some(path)) => load_meta(&path)?.config,
                (None, None) => RunConfig::default(),
                _ => unreachable!("clap forbids both"),
            };
            pipeline::run(&cfg, &out).map(|artifacts| {
                println!(
                    "pipeline done: {} points, {} edges, {} non-shared overlay edges -> {}",
                    artifacts.n_points,
                    artifacts.n_edges,
                    artifacts.non_shared_edges,
                    artifacts.out_dir.display()
                );
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
