//! Zero-temperature harness process: at rate one, each vertex resets its
//! height to the average of its neighbors' heights.
//!
//! The run is an event-driven simulation over a priority queue of per-vertex
//! exponential clocks (the superposition of independent rate-1 Poisson
//! clocks). The tilt part of the surface never changes; the update rewrites
//! the periodic part at one vertex, which keeps `surface - initial` a
//! zero-tilt surface at all times. Energy `C(|grad eta|^2)` is maintained
//! incrementally (only edges at the updated vertex change) and refreshed by
//! a full recomputation every 10^4 events to bound drift.
//!
//! The backward-walk estimator realizes the duality with the rate-1
//! uniform-neighbor walk: the height at `s` after time `t`, averaged over
//! clock randomness, equals the expected initial height seen by a walk run
//! for time `t` from `s`. The walk kernel here is the single transition
//! implementation that the random-walk diagnostics reuse.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{Error, Result};
use crate::fields::{gradient, max_abs_laplacian, tilt, Surface};
use crate::geometry::{DelaunayGraph, Incidence};
use crate::rng::{self, Stream};
use crate::scalar::Scalar;

/// Energy of a surface: squared Campbell norm of its gradient.
pub fn energy<S: Scalar>(graph: &DelaunayGraph<S>, surface: &Surface<S>) -> S {
    let grad = gradient(graph, surface);
    crate::fields::campbell_norm2(graph, &grad)
}

/// Replace the height at `v` by the average of its neighbors' heights (seen
/// through wrapped increments). Returns the change of the periodic part.
pub fn relax_vertex<S: Scalar>(
    graph: &DelaunayGraph<S>,
    surface: &mut Surface<S>,
    v: usize,
) -> Result<S> {
    let deg = graph.degree(v);
    if deg == 0 {
        return Err(Error::InvalidParameter(format!("vertex {v} is isolated")));
    }
    let mut acc = S::zero();
    for &inc in &graph.adjacency[v] {
        let d = graph.delta(inc);
        let w = graph.neighbor(inc);
        acc += surface.heights[w] + surface.tilt[0] * d[0] + surface.tilt[1] * d[1];
    }
    let new = acc / S::from_usize(deg).expect("degree fits scalar");
    let delta = new - surface.heights[v];
    surface.heights[v] = new;
    Ok(delta)
}

/// Per-event energy sample.
#[derive(Debug, Clone, Copy)]
pub struct TracePoint<S: Scalar> {
    pub event: u64,
    pub time: f64,
    pub energy: S,
}

/// Periodic checkpoint with the more expensive observables.
#[derive(Debug, Clone, Copy)]
pub struct Checkpoint<S: Scalar> {
    pub event: u64,
    pub time: f64,
    pub energy: S,
    pub max_laplacian: S,
    pub tilt: [S; 2],
}

/// Run options. `t_max` is always honored; with `converge_tol` set the run
/// may stop earlier, once every vertex has fired since the last check and
/// the Laplacian sup-norm fell below the tolerance.
#[derive(Debug, Clone)]
pub struct HarnessOpts {
    pub t_max: f64,
    pub seed: u64,
    /// Record an energy trace point every this many events (0 disables).
    pub trace_every: u64,
    /// Record a full checkpoint every this many events (0 disables).
    pub checkpoint_every: u64,
    pub converge_tol: Option<f64>,
}

impl HarnessOpts {
    pub fn new(t_max: f64, seed: u64) -> Self {
        HarnessOpts {
            t_max,
            seed,
            trace_every: 1,
            checkpoint_every: 0,
            converge_tol: None,
        }
    }
}

/// Final state of a harness run.
#[derive(Debug, Clone)]
pub struct HarnessState<S: Scalar> {
    pub surface: Surface<S>,
    pub time: f64,
    pub events: u64,
    pub energy: S,
    pub trace: Vec<TracePoint<S>>,
    pub checkpoints: Vec<Checkpoint<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    vertex: usize,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we need earliest-first
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const ENERGY_REFRESH_EVERY: u64 = 10_000;

/// Simulate the harness process from `initial` up to `t_max`.
pub fn harness_run<S: Scalar>(
    graph: &DelaunayGraph<S>,
    initial: &Surface<S>,
    opts: &HarnessOpts,
) -> Result<HarnessState<S>> {
    if opts.t_max <= 0.0 {
        return Err(Error::InvalidParameter("t_max must be positive".into()));
    }
    let n = graph.n();
    if initial.heights.len() != n {
        return Err(Error::InvalidParameter(
            "surface does not match graph".into(),
        ));
    }
    let mut surface = initial.clone();
    let mut rng = rng::substream(opts.seed, Stream::Clocks);
    let mut queue = BinaryHeap::with_capacity(n);
    for v in 0..n {
        let dt: f64 = Exp1.sample(&mut rng);
        queue.push(Event { time: dt, vertex: v });
    }

    // Unnormalized energy sum over stored edges.
    let mut energy_sum = energy_sum_full(graph, &surface);
    let volume = graph.box_volume();
    let mut trace = Vec::new();
    let mut checkpoints = Vec::new();
    let mut events = 0u64;
    let mut time = 0.0f64;
    if opts.trace_every > 0 {
        trace.push(TracePoint {
            event: 0,
            time: 0.0,
            energy: energy_sum / volume,
        });
    }
    if opts.checkpoint_every > 0 {
        checkpoints.push(checkpoint(graph, &surface, 0, 0.0, energy_sum / volume)?);
    }

    let mut fired = vec![false; n];
    let mut fired_count = 0usize;

    while let Some(ev) = queue.pop() {
        if ev.time > opts.t_max {
            break;
        }
        time = ev.time;
        let v = ev.vertex;

        let local_before = local_energy(graph, &surface, v);
        relax_vertex(graph, &mut surface, v)?;
        let local_after = local_energy(graph, &surface, v);
        energy_sum += local_after - local_before;
        events += 1;

        if events % ENERGY_REFRESH_EVERY == 0 {
            let full = energy_sum_full(graph, &surface);
            let rel = (full - energy_sum).abs().as_f64()
                / full.as_f64().abs().max(1.0);
            assert!(
                rel <= 1e-9,
                "incremental energy drifted by {rel:e} after {events} events"
            );
            energy_sum = full;
        }

        if opts.trace_every > 0 && events % opts.trace_every == 0 {
            trace.push(TracePoint {
                event: events,
                time,
                energy: energy_sum / volume,
            });
        }
        if opts.checkpoint_every > 0 && events % opts.checkpoint_every == 0 {
            checkpoints.push(checkpoint(graph, &surface, events, time, energy_sum / volume)?);
        }

        if let Some(tol) = opts.converge_tol {
            if !fired[v] {
                fired[v] = true;
                fired_count += 1;
            }
            if fired_count == n {
                let resid = max_abs_laplacian(graph, &surface).as_f64();
                if resid < tol {
                    break;
                }
                fired.iter_mut().for_each(|f| *f = false);
                fired_count = 0;
            }
        }

        let dt: f64 = Exp1.sample(&mut rng);
        queue.push(Event {
            time: ev.time + dt,
            vertex: v,
        });
    }

    Ok(HarnessState {
        time: time.min(opts.t_max),
        events,
        energy: energy_sum / volume,
        surface,
        trace,
        checkpoints,
    })
}

fn checkpoint<S: Scalar>(
    graph: &DelaunayGraph<S>,
    surface: &Surface<S>,
    event: u64,
    time: f64,
    energy: S,
) -> Result<Checkpoint<S>> {
    let mut tilts = [S::zero(); 2];
    if graph.is_periodic() {
        for axis in 0..graph.dim() {
            tilts[axis] = tilt(graph, surface, axis)?;
        }
    }
    Ok(Checkpoint {
        event,
        time,
        energy,
        max_laplacian: max_abs_laplacian(graph, surface),
        tilt: tilts,
    })
}

fn energy_sum_full<S: Scalar>(graph: &DelaunayGraph<S>, surface: &Surface<S>) -> S {
    let mut acc = S::zero();
    for e in 0..graph.edges.len() {
        let inc = surface.edge_increment(graph, e);
        acc += inc * inc;
    }
    acc
}

fn local_energy<S: Scalar>(graph: &DelaunayGraph<S>, surface: &Surface<S>, v: usize) -> S {
    let mut acc = S::zero();
    for &inc in &graph.adjacency[v] {
        let g = surface.increment(graph, v, inc);
        acc += g * g;
    }
    acc
}

/// Trace CSV: `event,t,energy,max_laplacian_abs,tilt_u1[,tilt_u2]` from the
/// checkpoint stream.
pub fn trace_csv<S: Scalar>(graph: &DelaunayGraph<S>, state: &HarnessState<S>) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    if graph.dim() == 1 {
        out.push_str("event,t,energy,max_laplacian_abs,tilt_u1\n");
    } else {
        out.push_str("event,t,energy,max_laplacian_abs,tilt_u1,tilt_u2\n");
    }
    for c in &state.checkpoints {
        if graph.dim() == 1 {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                c.event, c.time, c.energy, c.max_laplacian, c.tilt[0]
            );
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.event, c.time, c.energy, c.max_laplacian, c.tilt[0], c.tilt[1]
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Walk kernel and the backward-walk duality estimator
// ---------------------------------------------------------------------------

/// Uniform neighbor choice: the single transition used by every walk in the
/// crate (backward duality walks, forward diagnostics, embedded chains).
pub fn uniform_step<S: Scalar>(
    graph: &DelaunayGraph<S>,
    v: usize,
    rng: &mut ChaCha8Rng,
) -> Incidence {
    let deg = graph.degree(v);
    debug_assert!(deg > 0);
    graph.adjacency[v][rng.random_range(0..deg)]
}

/// Monte Carlo estimate of the expected height at `start` after running the
/// harness for time `t`, via duality: average `gamma` at the endpoint of
/// rate-1 uniform-neighbor walks of duration `t`, evaluating heights
/// covariantly along the walked edges. Returns `(mean, standard error)`.
pub fn backward_walk_estimate<S: Scalar>(
    graph: &DelaunayGraph<S>,
    gamma: &Surface<S>,
    start: usize,
    t: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(S, S)> {
    if t < 0.0 {
        return Err(Error::InvalidParameter("t must be nonnegative".into()));
    }
    if n_samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let base = gamma.total_height(graph, start).as_f64();
    for k in 0..n_samples {
        let mut rng = rng::substream_indexed(seed, Stream::Walks, k as u64);
        let mut v = start;
        let mut clock = 0.0f64;
        let mut height = S::zero();
        loop {
            let dt: f64 = Exp1.sample(&mut rng);
            clock += dt;
            if clock > t {
                break;
            }
            let inc = uniform_step(graph, v, &mut rng);
            height += gamma.increment(graph, v, inc);
            v = graph.neighbor(inc);
        }
        // running mean/variance (Welford)
        let x = base + height.as_f64();
        let delta = x - mean;
        mean += delta / (k as f64 + 1.0);
        m2 += delta * (x - mean);
    }
    let stderr = if n_samples > 1 {
        (m2 / (n_samples as f64 - 1.0) / n_samples as f64).sqrt()
    } else {
        0.0
    };
    Ok((S::of_f64(mean), S::of_f64(stderr)))
}
