//! Shared fixtures for unit tests.

use rand::RngExt;

use crate::fields::Surface;
use crate::geometry::{build_delaunay, DelaunayGraph};
use crate::pointprocess::{sample_poisson, BoxMode, PointSet};
use crate::rng::{substream, Stream};

/// Four points on a circle of circumference 4: `{0, 0.5, 1.5, 3}`.
pub(crate) fn circle_fixture() -> DelaunayGraph<f64> {
    let set = PointSet::from_points(
        1,
        4.0,
        BoxMode::Periodic,
        true,
        vec![[0.0, 0.0], [0.5, 0.0], [1.5, 0.0], [3.0, 0.0]],
    )
    .unwrap();
    build_delaunay(set).unwrap()
}

/// Exact m x m unit grid on a torus of side `len` (requires `len = m`).
pub(crate) fn grid_fixture(m: usize, len: f64) -> DelaunayGraph<f64> {
    let step = len / m as f64;
    let mut pts = Vec::new();
    for i in 0..m {
        for j in 0..m {
            pts.push([i as f64 * step, j as f64 * step]);
        }
    }
    let set = PointSet::from_points(2, len, BoxMode::Periodic, false, pts).unwrap();
    build_delaunay(set).unwrap()
}

/// Periodic Poisson graph at intensity one.
pub(crate) fn poisson_graph(len: f64, seed: u64) -> DelaunayGraph<f64> {
    let set = sample_poisson::<f64>(2, len, 1.0, seed, true).unwrap();
    build_delaunay(set).unwrap()
}

/// Surface with the given tilt and iid uniform heights in `[-amp, amp]`.
pub(crate) fn random_surface(
    graph: &DelaunayGraph<f64>,
    tilt: [f64; 2],
    amp: f64,
    seed: u64,
) -> Surface<f64> {
    let mut rng = substream(seed, Stream::Aux);
    let heights = (0..graph.n())
        .map(|_| rng.random_range(-amp..amp))
        .collect();
    Surface { tilt, heights }
}
