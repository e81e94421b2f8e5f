//! Triangle-orientation fields and the regularization functional.
//!
//! Every directed edge of a two-dimensional triangulation is flanked by two
//! triangles; the apex reached first when sweeping clockwise from the edge
//! direction is `alpha_plus`, the other `alpha_minus` (so reversing the edge
//! swaps them). The orientation convention is pinned by the cross product:
//! `alpha_plus(s, s')` has `cross(s' - s, alpha - s) < 0`. The associated
//! per-directed-edge fields take the height gradient toward the flanking
//! apexes; they are not antisymmetric and satisfy exact row identities: the
//! outgoing sums reproduce the Laplacian, the incoming sums telescope to
//! zero around vertex links. Consequences, exact on the finite torus: for a
//! zero-tilt surface, projecting against a flank field halves the gradient
//! inner product, and the functional built from them changes along harness
//! trajectories by exactly half the energy change per event.

use crate::error::{Error, Result};
use crate::fields::{gradient, Surface};
use crate::geometry::{DelaunayGraph, Flank, Incidence};
use crate::scalar::Scalar;

/// Flanking apexes per edge in its canonical `a -> b` orientation; apex
/// wraps are relative to `a`'s representative. For the reversed direction
/// the roles swap.
#[derive(Debug, Clone)]
pub struct EdgeFlanks {
    pub plus: Vec<Flank>,
    pub minus: Vec<Flank>,
}

/// Classify the stored triangle apexes of every edge, verifying that each
/// apex is a graph neighbor of both endpoints. An edge with a single common
/// neighbor (a lone triangle, planar fixtures) uses it for both roles; an
/// edge with none is rejected.
pub fn orient_flanks<S: Scalar>(graph: &DelaunayGraph<S>) -> Result<EdgeFlanks> {
    if graph.dim() != 2 {
        return Err(Error::InvalidParameter(
            "triangle orientation requires d=2".into(),
        ));
    }
    // directed adjacency with wraps, for validating apex edges
    let mut directed = std::collections::HashSet::new();
    for e in &graph.edges {
        directed.insert((e.a, e.b, e.wrap));
        directed.insert((e.b, e.a, [-e.wrap[0], -e.wrap[1]]));
    }
    let len = graph.len().as_f64();
    let mut plus = Vec::with_capacity(graph.edges.len());
    let mut minus = Vec::with_capacity(graph.edges.len());
    for e in &graph.edges {
        let mut valid: Vec<Flank> = Vec::new();
        for apex in [e.left, e.right].into_iter().flatten() {
            let from_a = (e.a, apex.vertex, apex.wrap);
            let from_b = (
                e.b,
                apex.vertex,
                [apex.wrap[0] - e.wrap[0], apex.wrap[1] - e.wrap[1]],
            );
            if directed.contains(&from_a) && directed.contains(&from_b) {
                valid.push(apex);
            }
        }
        match valid.len() {
            0 => return Err(Error::MissingFlank { a: e.a, b: e.b }),
            1 => {
                plus.push(valid[0]);
                minus.push(valid[0]);
            }
            _ => {
                let cross = |apex: &Flank| -> f64 {
                    let pa = graph.pos(e.a);
                    let ax = graph.pos(apex.vertex)[0].as_f64() + apex.wrap[0] as f64 * len
                        - pa[0].as_f64();
                    let ay = graph.pos(apex.vertex)[1].as_f64() + apex.wrap[1] as f64 * len
                        - pa[1].as_f64();
                    e.delta[0].as_f64() * ay - e.delta[1].as_f64() * ax
                };
                let (c0, c1) = (cross(&valid[0]), cross(&valid[1]));
                if c0 == 0.0 || c1 == 0.0 || (c0 < 0.0) == (c1 < 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "degenerate flanks on edge {}-{}",
                        e.a, e.b
                    )));
                }
                if c0 < 0.0 {
                    plus.push(valid[0]);
                    minus.push(valid[1]);
                } else {
                    plus.push(valid[1]);
                    minus.push(valid[0]);
                }
            }
        }
    }
    Ok(EdgeFlanks { plus, minus })
}

/// Values on directed edges without an antisymmetry constraint.
#[derive(Debug, Clone)]
pub struct DirectedValues<S: Scalar> {
    pub fwd: Vec<S>,
    pub bwd: Vec<S>,
}

impl<S: Scalar> DirectedValues<S> {
    pub fn along(&self, inc: Incidence) -> S {
        if inc.forward {
            self.fwd[inc.edge]
        } else {
            self.bwd[inc.edge]
        }
    }
}

/// The pair of flank-gradient fields of a surface: on the directed edge
/// `(s, s')`, the height gradient from `s` toward `alpha_plus(s, s')`
/// (resp. `alpha_minus`).
pub fn flank_gradient_fields<S: Scalar>(
    graph: &DelaunayGraph<S>,
    surface: &Surface<S>,
    flanks: &EdgeFlanks,
) -> (DirectedValues<S>, DirectedValues<S>) {
    let n_edges = graph.edges.len();
    let mut plus = DirectedValues {
        fwd: Vec::with_capacity(n_edges),
        bwd: Vec::with_capacity(n_edges),
    };
    let mut minus = DirectedValues {
        fwd: Vec::with_capacity(n_edges),
        bwd: Vec::with_capacity(n_edges),
    };
    let len = graph.len();
    for (e_idx, e) in graph.edges.iter().enumerate() {
        let p = flanks.plus[e_idx];
        let m = flanks.minus[e_idx];
        // gradient from a vertex image toward an apex image, frames relative
        // to the edge's `a` representative
        let grad_from = |v: usize, v_wrap: [i8; 2], apex: Flank| -> S {
            let pv = graph.pos(v);
            let pa = graph.pos(apex.vertex);
            let mut acc = surface.heights[apex.vertex] - surface.heights[v];
            for k in 0..2 {
                let d = pa[k] + S::of_f64((apex.wrap[k] - v_wrap[k]) as f64) * len - pv[k];
                acc += surface.tilt[k] * d;
            }
            acc
        };
        // alpha_plus(a -> b) = p; alpha_plus(b -> a) = alpha_minus(a -> b) = m
        plus.fwd.push(grad_from(e.a, [0, 0], p));
        plus.bwd.push(grad_from(e.b, e.wrap, m));
        minus.fwd.push(grad_from(e.a, [0, 0], m));
        minus.bwd.push(grad_from(e.b, e.wrap, p));
    }
    (plus, minus)
}

/// Campbell inner product of two directed-edge value maps:
/// `(1 / 2L^d) sum` over directed edges of the product.
pub fn campbell_inner_directed<S: Scalar, F, G>(graph: &DelaunayGraph<S>, f: F, g: G) -> S
where
    F: Fn(Incidence) -> S,
    G: Fn(Incidence) -> S,
{
    let mut acc = S::zero();
    for v in 0..graph.n() {
        for &inc in &graph.adjacency[v] {
            acc += f(inc) * g(inc);
        }
    }
    acc / (S::of_f64(2.0) * graph.box_volume())
}

/// Row sums of a flank field at one vertex: outgoing and incoming.
pub fn flank_row_sums<S: Scalar>(
    graph: &DelaunayGraph<S>,
    values: &DirectedValues<S>,
    v: usize,
) -> (S, S) {
    let mut out = S::zero();
    let mut inc_sum = S::zero();
    for &inc in &graph.adjacency[v] {
        out += values.along(inc);
        inc_sum += values.along(Incidence {
            edge: inc.edge,
            forward: !inc.forward,
        });
    }
    (out, inc_sum)
}

/// The regularization functional `C(grad eta . zeta_plus^eta)`. Along a
/// harness trajectory its per-event change equals half the per-event change
/// of the energy, and it is stationary exactly at harmonic surfaces.
pub fn regularization_functional<S: Scalar>(
    graph: &DelaunayGraph<S>,
    surface: &Surface<S>,
    flanks: &EdgeFlanks,
) -> S {
    let grad = gradient(graph, surface);
    let (plus, _) = flank_gradient_fields(graph, surface, flanks);
    campbell_inner_directed(graph, |inc| grad.along(inc), |inc| plus.along(inc))
}

/// The barycenter of a point cycle: the argmin of the sum of scalar
/// products of consecutive offsets `sum_k (s_k - x) . (s_{k+1} - x)`.
pub fn barycenter<S: Scalar>(points: &[[S; 2]]) -> [S; 2] {
    let n = S::from_usize(points.len().max(1)).unwrap();
    let mut acc = [S::zero(), S::zero()];
    for p in points {
        acc[0] += p[0];
        acc[1] += p[1];
    }
    [acc[0] / n, acc[1] / n]
}

/// The objective the barycenter minimizes, for verification paths.
pub fn cyclic_product_sum<S: Scalar>(points: &[[S; 2]], x: [S; 2]) -> S {
    let n = points.len();
    let mut acc = S::zero();
    for k in 0..n {
        let p = points[k];
        let q = points[(k + 1) % n];
        acc += (p[0] - x[0]) * (q[0] - x[0]) + (p[1] - x[1]) * (q[1] - x[1]);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::campbell_inner;
    use crate::geometry::build_delaunay;
    use crate::harness::{energy, relax_vertex};
    use crate::pointprocess::{BoxMode, PointSet};
    use crate::solver::{solve_harmonic, Method};
    use crate::testutil::{grid_fixture, poisson_graph, random_surface};

    #[test]
    fn single_triangle_uses_third_vertex() {
        let set = PointSet::from_points(
            2,
            10.0,
            BoxMode::Planar,
            false,
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]],
        )
        .unwrap();
        let g = build_delaunay(set).unwrap();
        let flanks = orient_flanks(&g).unwrap();
        for (e_idx, e) in g.edges.iter().enumerate() {
            let third = (0..3).find(|v| *v != e.a && *v != e.b).unwrap();
            assert_eq!(flanks.plus[e_idx].vertex, third);
            assert_eq!(flanks.minus[e_idx].vertex, third);
        }
        // zeta(s, s') = eta(third) - eta(s)
        let s = Surface {
            tilt: [0.0, 0.0],
            heights: vec![1.0, 5.0, -2.0],
        };
        let (plus, minus) = flank_gradient_fields(&g, &s, &flanks);
        for (e_idx, e) in g.edges.iter().enumerate() {
            let third = (0..3).find(|v| *v != e.a && *v != e.b).unwrap();
            assert_eq!(plus.fwd[e_idx], s.heights[third] - s.heights[e.a]);
            assert_eq!(minus.bwd[e_idx], s.heights[third] - s.heights[e.b]);
        }
    }

    #[test]
    fn constant_surface_gives_zero_fields() {
        let g = poisson_graph(8.0, 61);
        let flanks = orient_flanks(&g).unwrap();
        let mut s = Surface::flat(g.n());
        for h in &mut s.heights {
            *h = 7.0;
        }
        let (plus, minus) = flank_gradient_fields(&g, &s, &flanks);
        assert!(plus.fwd.iter().all(|&v| v == 0.0));
        assert!(plus.bwd.iter().all(|&v| v == 0.0));
        assert!(minus.fwd.iter().all(|&v| v == 0.0));
        assert!(minus.bwd.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn orientation_swap_invariant() {
        // alpha_plus(s,s') = alpha_minus(s',s) holds by construction of the
        // directed value lookup; check the cross-product signs directly.
        let g = poisson_graph(8.0, 62);
        let flanks = orient_flanks(&g).unwrap();
        let len = g.len();
        for (e_idx, e) in g.edges.iter().enumerate() {
            let apex = flanks.plus[e_idx];
            let pa = g.pos(e.a);
            let ax = g.pos(apex.vertex)[0] + apex.wrap[0] as f64 * len - pa[0];
            let ay = g.pos(apex.vertex)[1] + apex.wrap[1] as f64 * len - pa[1];
            let cross = e.delta[0] * ay - e.delta[1] * ax;
            assert!(cross < 0.0, "alpha_plus must lie clockwise of the edge");
        }
    }

    #[test]
    fn row_identities_on_torus() {
        let g = poisson_graph(10.0, 63);
        let flanks = orient_flanks(&g).unwrap();
        let s = random_surface(&g, [0.7, -0.4], 1.0, 64);
        let (plus, minus) = flank_gradient_fields(&g, &s, &flanks);
        for v in 0..g.n() {
            let lap = crate::fields::laplacian_at(&g, &s, v);
            for values in [&plus, &minus] {
                let (out, incoming) = flank_row_sums(&g, values, v);
                assert!((out - lap).abs() < 1e-10, "row sum {out} vs laplacian {lap}");
                assert!(incoming.abs() < 1e-10, "incoming sum {incoming}");
            }
        }
    }

    #[test]
    fn swap_identity() {
        let g = poisson_graph(10.0, 65);
        let flanks = orient_flanks(&g).unwrap();
        let eta = random_surface(&g, [1.0, 0.0], 1.0, 66);
        let phi = random_surface(&g, [0.0, 1.0], 1.0, 67);
        let grad_eta = gradient(&g, &eta);
        let grad_phi = gradient(&g, &phi);
        let (plus_phi, _) = flank_gradient_fields(&g, &phi, &flanks);
        let (_, minus_eta) = flank_gradient_fields(&g, &eta, &flanks);
        let lhs = campbell_inner_directed(&g, |i| grad_eta.along(i), |i| plus_phi.along(i));
        let rhs = campbell_inner_directed(&g, |i| minus_eta.along(i), |i| grad_phi.along(i));
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn zero_tilt_projection_identity() {
        // For translation-invariant phi the row identities force
        // C(grad phi . zeta_pm^eta) = 1/2 C(grad phi . grad eta): the
        // incoming rows vanish, so only one of the two gradient terms
        // survives. Derivable from the row sums and exact here.
        let g = poisson_graph(10.0, 68);
        let flanks = orient_flanks(&g).unwrap();
        let phi = random_surface(&g, [0.0, 0.0], 1.0, 69);
        let eta = random_surface(&g, [0.8, 0.3], 1.0, 70);
        let grad_phi = gradient(&g, &phi);
        let grad_eta = gradient(&g, &eta);
        let (plus, minus) = flank_gradient_fields(&g, &eta, &flanks);
        let target = 0.5 * campbell_inner(&g, &grad_phi, &grad_eta);
        for values in [&plus, &minus] {
            let got = campbell_inner_directed(&g, |i| grad_phi.along(i), |i| values.along(i));
            assert!((got - target).abs() < 1e-10, "{got} vs {target}");
        }
    }

    #[test]
    fn functional_tracks_half_the_energy_per_event() {
        // The event-difference identity: the functional and half the energy
        // move together, so `functional - energy / 2` is event-invariant.
        let g = poisson_graph(10.0, 71);
        let flanks = orient_flanks(&g).unwrap();
        let mut s = random_surface(&g, [1.0, 0.0], 1.0, 72);
        for v in 0..g.n().min(40) {
            let f_before = regularization_functional(&g, &s, &flanks);
            let e_before = energy(&g, &s);
            relax_vertex(&g, &mut s, v).unwrap();
            let f_after = regularization_functional(&g, &s, &flanks);
            let e_after = energy(&g, &s);
            let df = f_after - f_before;
            let de = e_after - e_before;
            assert!(
                (df - 0.5 * de).abs() < 1e-10,
                "vertex {v}: df {df} vs de/2 {}",
                0.5 * de
            );
            assert!(df <= 1e-12, "functional must not increase");
        }
    }

    #[test]
    fn functional_stationary_at_harmonic() {
        let g = poisson_graph(10.0, 73);
        let flanks = orient_flanks(&g).unwrap();
        let (h, _) = solve_harmonic(&g, [1.0, 0.0], 1e-12, 1_000_000, Method::ConjugateGradient)
            .unwrap();
        let f0 = regularization_functional(&g, &h, &flanks);
        let e0 = energy(&g, &h);
        let mut s = h.clone();
        relax_vertex(&g, &mut s, 3).unwrap();
        let f1 = regularization_functional(&g, &s, &flanks);
        let e1 = energy(&g, &s);
        assert!((f1 - f0).abs() < 1e-12);
        assert!((e1 - e0).abs() < 1e-12);
    }

    #[test]
    fn exact_grid_flanks_are_rejected() {
        // the grid graph drops its diagonals, so no edge has common
        // neighbors in the conductance graph
        let g = grid_fixture(6, 6.0);
        assert!(matches!(
            orient_flanks(&g),
            Err(Error::MissingFlank { .. })
        ));
    }

    #[test]
    fn barycenter_examples() {
        let pts: [[f64; 2]; 3] = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
        let b = barycenter(&pts);
        assert!((b[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b[1] - 2.0 / 3.0).abs() < 1e-15);
        let single: [[f64; 2]; 1] = [[4.5, -1.0]];
        assert_eq!(barycenter(&single), [4.5, -1.0]);
    }

    #[test]
    fn barycenter_minimizes_on_grid_search() {
        use rand::RngExt;
        let mut rng = crate::rng::substream(74, crate::rng::Stream::Aux);
        let pts: Vec<[f64; 2]> = (0..6)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let b = barycenter(&pts);
        let f_at_b = cyclic_product_sum(&pts, b);
        let step = 1e-3;
        let mut best = (f_at_b, b);
        let mut gx = -1.0;
        while gx <= 1.0 {
            let mut gy = -1.0;
            while gy <= 1.0 {
                let x = [b[0] + gx, b[1] + gy];
                let f = cyclic_product_sum(&pts, x);
                if f < best.0 {
                    best = (f, x);
                }
                gy += step;
            }
            gx += step;
        }
        assert!(
            (best.1[0] - b[0]).abs() <= step && (best.1[1] - b[1]).abs() <= step,
            "grid argmin {:?} vs barycenter {:?}",
            best.1,
            b
        );
    }
}
