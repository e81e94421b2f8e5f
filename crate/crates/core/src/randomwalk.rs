//! Random walks on the Delaunay graph and its harmonic deformation.
//!
//! Two clock conventions share one transition kernel (uniform neighbor
//! choice): `JumpRate` holds at a vertex for an exponential time with rate
//! equal to its degree, which is the walk that jumps along each edge at rate
//! one; `Uniformized` jumps at the epochs of a rate-1 Poisson clock. The
//! diagnostics check the martingale property of the deformed walk, mean
//! squared displacement linearity, stationarity of the environment chain
//! under the degree-biased law, and the Poisson moment bound for height
//! increments along uniformized walks.

use rand::RngExt;
use rand_distr::{Distribution, Exp, Exp1};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::{gradient, Surface};
use crate::geometry::{mean_se, DelaunayGraph};
use crate::harness::uniform_step;
use crate::rng::{self, Stream};
use crate::scalar::Scalar;
use crate::solver::DeformedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockMode {
    /// Total jump rate equals the degree (edge rate one).
    JumpRate,
    /// Rate-1 Poisson jumps, uniform neighbor choice.
    Uniformized,
}

impl std::str::FromStr for ClockMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jump-rate" | "jumprate" => Ok(ClockMode::JumpRate),
            "uniformized" => Ok(ClockMode::Uniformized),
            other => Err(Error::InvalidParameter(format!("unknown clock '{other}'"))),
        }
    }
}

/// A simulated trajectory. `vertices[0]` is the start; `times[k]` is the
/// k-th jump epoch (`times[0] = 0`). Positions unwrap across the torus:
/// `unwrapped[k]` accumulates the per-jump displacements.
#[derive(Debug, Clone)]
pub struct WalkTrace<S: Scalar> {
    pub start: usize,
    pub seed: u64,
    pub t_max: f64,
    pub clock: ClockMode,
    pub times: Vec<f64>,
    pub vertices: Vec<usize>,
    pub unwrapped: Vec<[S; 2]>,
}

/// Simulate one walk for duration `t_max`.
pub fn walk<S: Scalar>(
    graph: &DelaunayGraph<S>,
    start: usize,
    t_max: f64,
    seed: u64,
    clock: ClockMode,
) -> Result<WalkTrace<S>> {
    walk_indexed(graph, start, t_max, seed, 0, clock)
}

/// Like [`walk`], with a replica index for parallel fan-out under one seed.
pub fn walk_indexed<S: Scalar>(
    graph: &DelaunayGraph<S>,
    start: usize,
    t_max: f64,
    seed: u64,
    replica: u64,
    clock: ClockMode,
) -> Result<WalkTrace<S>> {
    if t_max <= 0.0 {
        return Err(Error::InvalidParameter("t_max must be positive".into()));
    }
    if start >= graph.n() {
        return Err(Error::InvalidParameter(format!(
            "start vertex {start} out of range"
        )));
    }
    let mut rng = rng::substream_indexed(seed, Stream::Walks, replica);
    let mut trace = WalkTrace {
        start,
        seed,
        t_max,
        clock,
        times: vec![0.0],
        vertices: vec![start],
        unwrapped: vec![[S::zero(), S::zero()]],
    };
    let mut v = start;
    let mut t = 0.0f64;
    let mut pos = [S::zero(), S::zero()];
    loop {
        let dt = match clock {
            ClockMode::Uniformized => Exp1.sample(&mut rng),
            ClockMode::JumpRate => {
                let rate = graph.degree(v) as f64;
                Exp::new(rate)
                    .expect("positive rate")
                    .sample(&mut rng)
            }
        };
        t += dt;
        if t > t_max {
            break;
        }
        let inc = uniform_step(graph, v, &mut rng);
        let d = graph.delta(inc);
        pos = [pos[0] + d[0], pos[1] + d[1]];
        v = graph.neighbor(inc);
        trace.times.push(t);
        trace.vertices.push(v);
        trace.unwrapped.push(pos);
    }
    Ok(trace)
}

/// `t,vertex,x_unwrapped[,y_unwrapped]` rows.
pub fn walk_csv<S: Scalar>(graph: &DelaunayGraph<S>, trace: &WalkTrace<S>) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    if graph.dim() == 1 {
        out.push_str("t,vertex,x_unwrapped\n");
    } else {
        out.push_str("t,vertex,x_unwrapped,y_unwrapped\n");
    }
    let origin = graph.pos(trace.start);
    for k in 0..trace.times.len() {
        let p = trace.unwrapped[k];
        if graph.dim() == 1 {
            let _ = writeln!(out, "{},{},{}", trace.times[k], trace.vertices[k], origin[0] + p[0]);
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                trace.times[k],
                trace.vertices[k],
                origin[0] + p[0],
                origin[1] + p[1]
            );
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Martingale and MSD diagnostics on the deformed graph
// ---------------------------------------------------------------------------

/// Exact one-step drift of the deformed walk: max over vertices of
/// `| sum_j a(s,j) (H(j) - H(s)) |`, the Euclidean norm of the coordinate
/// Laplacians. Zero exactly when the deformation is harmonic.
pub fn martingale_residual<S: Scalar>(
    graph: &DelaunayGraph<S>,
    positions: &[[S; 2]],
) -> f64 {
    let mut worst = 0.0f64;
    for v in 0..graph.n() {
        let mut acc = [S::zero(), S::zero()];
        for &inc in &graph.adjacency[v] {
            let w = graph.neighbor(inc);
            let d = graph.delta(inc);
            let p = graph.pos(v);
            let q = graph.pos(w);
            // image displacement: delta plus the corrector increment,
            // reconstructed from absolute images and the wrap
            for k in 0..graph.dim() {
                let chi_w = positions[w][k] - q[k];
                let chi_v = positions[v][k] - p[k];
                acc[k] += d[k] + chi_w - chi_v;
            }
        }
        let norm = (acc[0] * acc[0] + acc[1] * acc[1]).as_f64().sqrt();
        worst = worst.max(norm);
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct MsdReport {
    pub t_grid: Vec<f64>,
    pub msd: Vec<f64>,
    pub msd_se: Vec<f64>,
    /// Per-component mean displacement at the final time with its standard
    /// error.
    pub mean_disp: [f64; 2],
    pub mean_disp_se: [f64; 2],
    pub slope: f64,
    pub r2: f64,
    pub n_walks: usize,
}

/// Mean squared displacement of `H(Y_t)` over jump-rate walks from uniform
/// start vertices, with a through-origin linear fit.
pub fn msd_diagnostic<S: Scalar>(
    graph: &DelaunayGraph<S>,
    deformed: &DeformedGraph<S>,
    n_walks: usize,
    t_max: f64,
    n_times: usize,
    seed: u64,
) -> Result<MsdReport> {
    if n_walks == 0 {
        return Err(Error::InvalidParameter("need walks".into()));
    }
    let t_grid: Vec<f64> = (0..=n_times)
        .map(|k| t_max * k as f64 / n_times.max(1) as f64)
        .collect();
    let mut sums = vec![0.0f64; t_grid.len()];
    let mut sums2 = vec![0.0f64; t_grid.len()];
    let mut disp_sum = [0.0f64; 2];
    let mut disp_sum2 = [0.0f64; 2];
    let mut start_rng = rng::substream(seed, Stream::Aux);
    for w in 0..n_walks {
        let start = start_rng.random_range(0..graph.n());
        let trace = walk_indexed(graph, start, t_max, seed, w as u64, ClockMode::JumpRate)?;
        // image displacement along the walk: unwrapped displacement plus
        // corrector difference
        let mut k_idx = 0usize;
        for (ti, &t) in t_grid.iter().enumerate() {
            while k_idx + 1 < trace.times.len() && trace.times[k_idx + 1] <= t {
                k_idx += 1;
            }
            let d = image_displacement(deformed, &trace, k_idx);
            let r2 = (d[0] * d[0] + d[1] * d[1]).as_f64();
            sums[ti] += r2;
            sums2[ti] += r2 * r2;
            if ti == t_grid.len() - 1 {
                for c in 0..2 {
                    let x = d[c].as_f64();
                    disp_sum[c] += x;
                    disp_sum2[c] += x * x;
                }
            }
        }
    }
    let nf = n_walks as f64;
    let msd: Vec<f64> = sums.iter().map(|s| s / nf).collect();
    let msd_se: Vec<f64> = sums
        .iter()
        .zip(&sums2)
        .map(|(s, s2)| {
            let m = s / nf;
            ((s2 / nf - m * m).max(0.0) / nf).sqrt()
        })
        .collect();
    // least squares through the origin: slope = sum(t*y) / sum(t^2)
    let st2: f64 = t_grid.iter().map(|t| t * t).sum();
    let sty: f64 = t_grid.iter().zip(&msd).map(|(t, y)| t * y).sum();
    let slope = if st2 > 0.0 { sty / st2 } else { 0.0 };
    let y_mean = msd.iter().sum::<f64>() / msd.len() as f64;
    let ss_tot: f64 = msd.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let ss_res: f64 = t_grid
        .iter()
        .zip(&msd)
        .map(|(t, y)| {
            let e = y - slope * t;
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let mean_disp = [disp_sum[0] / nf, disp_sum[1] / nf];
    let mean_disp_se = [
        ((disp_sum2[0] / nf - mean_disp[0] * mean_disp[0]).max(0.0) / nf).sqrt(),
        ((disp_sum2[1] / nf - mean_disp[1] * mean_disp[1]).max(0.0) / nf).sqrt(),
    ];
    Ok(MsdReport {
        t_grid,
        msd,
        msd_se,
        mean_disp,
        mean_disp_se,
        slope,
        r2,
        n_walks,
    })
}

fn image_displacement<S: Scalar>(
    deformed: &DeformedGraph<S>,
    trace: &WalkTrace<S>,
    k: usize,
) -> [S; 2] {
    let v0 = trace.vertices[0];
    let vk = trace.vertices[k];
    let d = trace.unwrapped[k];
    [
        d[0] + deformed.chi[vk][0] - deformed.chi[v0][0],
        d[1] + deformed.chi[vk][1] - deformed.chi[v0][1],
    ]
}

// ---------------------------------------------------------------------------
// Environment chain and moment bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct EnvironmentReport {
    pub time_average: f64,
    pub spatial_average: f64,
    pub difference: f64,
    pub stderr: f64,
    pub n_steps: usize,
}

/// Stationarity of the environment chain: the time average of a per-vertex
/// functional along the embedded uniform-step chain against the
/// degree-biased spatial average. The standard error comes from batch means
/// (100 batches) since the chain is correlated.
pub fn environment_check<S: Scalar>(
    graph: &DelaunayGraph<S>,
    f: &[f64],
    n_steps: usize,
    seed: u64,
) -> Result<EnvironmentReport> {
    if f.len() != graph.n() {
        return Err(Error::InvalidParameter(
            "functional does not match graph".into(),
        ));
    }
    if n_steps == 0 {
        return Err(Error::InvalidParameter("need steps".into()));
    }
    let mut rng = rng::substream(seed, Stream::Walks);
    // degree-biased start
    let mut v = sample_degree_biased(graph, &mut rng);
    let n_batches = 100.min(n_steps);
    let batch = n_steps / n_batches;
    let mut batch_means = Vec::with_capacity(n_batches);
    let mut total = 0.0f64;
    for _ in 0..n_batches {
        let mut acc = 0.0f64;
        for _ in 0..batch {
            acc += f[v];
            let inc = uniform_step(graph, v, &mut rng);
            v = graph.neighbor(inc);
        }
        batch_means.push(acc / batch as f64);
        total += acc;
    }
    let time_average = total / (batch * n_batches) as f64;
    let (_, stderr) = mean_se(&batch_means);
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for u in 0..graph.n() {
        let a = graph.degree(u) as f64;
        num += a * f[u];
        den += a;
    }
    let spatial_average = num / den;
    Ok(EnvironmentReport {
        time_average,
        spatial_average,
        difference: time_average - spatial_average,
        stderr,
        n_steps: batch * n_batches,
    })
}

fn sample_degree_biased<S: Scalar>(
    graph: &DelaunayGraph<S>,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> usize {
    let total: usize = (0..graph.n()).map(|v| graph.degree(v)).sum();
    let mut pick = rng.random_range(0..total);
    for v in 0..graph.n() {
        let d = graph.degree(v);
        if pick < d {
            return v;
        }
        pick -= d;
    }
    graph.n() - 1
}

/// Exact r-th moment of a Poisson(t) variable via Stirling numbers of the
/// second kind: `m^r(t) = sum_k S(r,k) t^k`.
pub fn poisson_moment(r: usize, t: f64) -> f64 {
    let s = stirling2_row(r);
    let mut acc = 0.0f64;
    let mut tk = 1.0f64;
    for k in 0..=r {
        if k > 0 {
            tk *= t;
        }
        acc += s[k] * tk;
    }
    acc
}

/// Row r of the Stirling-second-kind triangle, as integer-valued floats.
fn stirling2_row(r: usize) -> Vec<f64> {
    let mut row = vec![0.0f64; r + 1];
    row[0] = 1.0;
    for n in 1..=r {
        let mut next = vec![0.0f64; r + 1];
        for k in 1..=n {
            next[k] = k as f64 * row[k] + row[k - 1];
        }
        row = next;
    }
    row
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub t: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub ratio_to_t: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub r: usize,
    pub gradient_moment: f64,
    pub rows: Vec<MomentRow>,
}

/// Empirical `E |gamma(X_t) - gamma(X_0)|^r` over uniformized walks from
/// degree-biased starts, against the bound `2 C(|grad gamma|^r) m^r(t)`
/// (plus four standard errors, asserted by callers). Also reports the
/// second-moment-per-time ratio exhibiting its boundedness.
pub fn moment_check<S: Scalar>(
    graph: &DelaunayGraph<S>,
    gamma: &Surface<S>,
    r: usize,
    ts: &[f64],
    n_walks: usize,
    seed: u64,
) -> Result<MomentReport> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    if n_walks == 0 {
        return Err(Error::InvalidParameter("need walks".into()));
    }
    // C(|grad gamma|^r): volume-normalized directed mean of |increment|^r.
    let grad = gradient(graph, gamma);
    let mut acc = S::zero();
    for v in &grad.values {
        acc += S::of_f64(v.abs().as_f64().powi(r as i32));
    }
    let grad_moment = (acc / graph.box_volume()).as_f64();

    let mut rows = Vec::new();
    let mut start_rng = rng::substream(seed, Stream::Aux);
    for (ti, &t) in ts.iter().enumerate() {
        let mut vals = Vec::with_capacity(n_walks);
        for w in 0..n_walks {
            let start = sample_degree_biased(graph, &mut start_rng);
            let replica = (ti * n_walks + w) as u64;
            let mut rng = rng::substream_indexed(seed, Stream::Walks, replica);
            let mut v = start;
            let mut clock = 0.0f64;
            let mut height = S::zero();
            if t > 0.0 {
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
            }
            vals.push(height.abs().as_f64().powi(r as i32));
        }
        let (mean, se) = mean_se(&vals);
        let bound = 2.0 * grad_moment * poisson_moment(r, t);
        rows.push(MomentRow {
            t,
            empirical: mean,
            stderr: se,
            bound,
            ratio_to_t: if t > 0.0 { mean / t } else { 0.0 },
            within_bound: mean <= bound + 4.0 * se,
        });
    }
    Ok(MomentReport {
        r,
        gradient_moment: grad_moment,
        rows,
    })
}
