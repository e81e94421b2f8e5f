//! Delaunay graphs with Voronoi facet data, on a periodic box or the plane.
//!
//! Periodic construction tiles the fundamental domain 3^d times, triangulates
//! the tiling, and takes the quotient: one edge per pair of Voronoi-neighbor
//! points together with the wrapped displacement between them. Edges carry
//! the (d-1)-measure of the shared Voronoi facet and its projections onto
//! the coordinate hyperplanes; an edge whose facet degenerates to measure
//! zero (cocircular quadruples; exact grids) carries no conductance and is
//! dropped. Planar mode keeps only triangulation adjacency and is meant for
//! fixtures: unbounded facets have no finite measure.
//!
//! In dimension two the adjacency list of every vertex is ordered
//! counterclockwise and aligned with its Voronoi cell polygon, which the
//! line-crossing tilt estimator and the renderers rely on.

use std::collections::HashMap;
use std::fmt::Write as _;

use spade::handles::FixedVertexHandle;
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::fields::EdgeField;
use crate::pointprocess::{BoxMode, PointSet};
use crate::scalar::{sign_of, Scalar};

/// Relative facet measures below this factor of the box length are treated
/// as degenerate (circumcenters of cocircular triangles coincide up to
/// rounding) and the edge is dropped.
const FACET_DROP_REL: f64 = 1e-12;

/// Third vertex of a triangle flanking an edge, with its wrap relative to
/// the edge's `a` endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flank {
    pub vertex: usize,
    pub wrap: [i8; 2],
}

/// Undirected edge stored with a canonical orientation `a -> b`.
#[derive(Debug, Clone)]
pub struct Edge<S: Scalar> {
    pub a: usize,
    pub b: usize,
    /// Integer copy offset of `b`'s image relative to `a`'s representative.
    pub wrap: [i8; 2],
    /// `pos(b) + wrap * L - pos(a)`, the displacement along the edge.
    pub delta: [S; 2],
    /// `(d-1)`-measure of the shared Voronoi facet; 1 (counting measure) in d=1.
    pub facet: S,
    /// Facet projected onto the hyperplane orthogonal to `e1` resp. `e2`.
    pub facet_proj: [S; 2],
    /// Triangle apex left of `a -> b` (d=2).
    pub left: Option<Flank>,
    /// Triangle apex right of `a -> b` (d=2).
    pub right: Option<Flank>,
}

/// Reference from a vertex to an incident edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub edge: usize,
    /// True when the vertex is the edge's `a` endpoint.
    pub forward: bool,
}

/// Voronoi cell of a vertex (periodic mode only). The polygon is stored
/// relative to the site; in d=1 it is empty and `volume` is the interval
/// length.
#[derive(Debug, Clone, Default)]
pub struct Cell<S: Scalar> {
    pub poly: Vec<[S; 2]>,
    pub volume: S,
    pub perimeter: S,
}

/// Quotient triangle (d=2): vertex ids with wraps placing each image next
/// to the others; the minimal vertex lies in the fundamental domain.
#[derive(Debug, Clone, Copy)]
pub struct TriangleRef {
    pub v: [usize; 3],
    pub wrap: [[i8; 2]; 3],
}

/// Delaunay graph over a point set, with conductance-one edges.
#[derive(Debug, Clone)]
pub struct DelaunayGraph<S: Scalar> {
    pub points: PointSet<S>,
    pub edges: Vec<Edge<S>>,
    /// Per-vertex incident edges; CCW-ordered and aligned with `cells[v].poly`
    /// in periodic d=2 (facet of `adjacency[v][i]` joins `poly[i-1]` to `poly[i]`).
    pub adjacency: Vec<Vec<Incidence>>,
    /// Periodic mode only; empty in planar mode.
    pub cells: Vec<Cell<S>>,
    /// d=2 only.
    pub triangles: Vec<TriangleRef>,
}

impl<S: Scalar> DelaunayGraph<S> {
    pub fn n(&self) -> usize {
        self.points.n()
    }

    pub fn dim(&self) -> usize {
        self.points.dim
    }

    pub fn len(&self) -> S {
        self.points.len
    }

    pub fn is_periodic(&self) -> bool {
        self.points.is_periodic()
    }

    pub fn box_volume(&self) -> S {
        self.points.box_volume()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Neighbor reached through an incidence.
    pub fn neighbor(&self, inc: Incidence) -> usize {
        let e = &self.edges[inc.edge];
        if inc.forward {
            e.b
        } else {
            e.a
        }
    }

    /// Signed displacement along an incidence, pointing away from the vertex.
    pub fn delta(&self, inc: Incidence) -> [S; 2] {
        let e = &self.edges[inc.edge];
        if inc.forward {
            e.delta
        } else {
            [-e.delta[0], -e.delta[1]]
        }
    }

    /// Position of a vertex.
    pub fn pos(&self, v: usize) -> [S; 2] {
        self.points.points[v]
    }

    /// True if the edge set is connected.
    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &inc in &self.adjacency[v] {
                let w = self.neighbor(inc);
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n()
    }
}

/// Build the Delaunay graph of a point set.
pub fn build_delaunay<S: Scalar>(points: PointSet<S>) -> Result<DelaunayGraph<S>> {
    match (points.dim, points.mode) {
        (1, _) => build_d1(points),
        (2, BoxMode::Planar) => build_d2_planar(points),
        (2, BoxMode::Periodic) => build_d2_periodic(points),
        _ => Err(Error::InvalidParameter("unsupported dimension".into())),
    }
}

/// Recompute facet measures and their axis projections from the stored cell
/// geometry. Periodic mode only; planar facets are unbounded.
pub fn facet_measures<S: Scalar>(graph: &mut DelaunayGraph<S>) -> Result<()> {
    if !graph.is_periodic() {
        return Err(Error::PlanarFacets);
    }
    if graph.dim() == 1 {
        for e in &mut graph.edges {
            e.facet = S::one();
            e.facet_proj = [S::one(), S::zero()];
        }
        return Ok(());
    }
    for v in 0..graph.n() {
        let k = graph.adjacency[v].len();
        for i in 0..k {
            let inc = graph.adjacency[v][i];
            if !inc.forward {
                continue; // attributes belong to the `a` endpoint's cell
            }
            let prev = graph.cells[v].poly[(i + k - 1) % k];
            let cur = graph.cells[v].poly[i];
            let dx = (cur[0] - prev[0]).abs();
            let dy = (cur[1] - prev[1]).abs();
            let e = &mut graph.edges[inc.edge];
            e.facet = (dx * dx + dy * dy).sqrt();
            e.facet_proj = [dy, dx];
        }
    }
    Ok(())
}

/// Signed projected facet measures for one axis: on the edge `s -> s'` the
/// value is `sign(delta . u)` times the facet measure projected onto the
/// hyperplane orthogonal to `u`. Divergence-free at every vertex.
pub fn facet_flux<S: Scalar>(graph: &DelaunayGraph<S>, axis: usize) -> Result<EdgeField<S>> {
    if axis >= graph.dim() {
        return Err(Error::AxisOutOfRange {
            axis,
            dim: graph.dim(),
        });
    }
    if !graph.is_periodic() {
        return Err(Error::PlanarFacets);
    }
    let values = graph
        .edges
        .iter()
        .map(|e| sign_of(e.delta[axis]) * e.facet_proj[axis])
        .collect();
    Ok(EdgeField { values })
}

// ---------------------------------------------------------------------------
// d = 1: sorted circle / path
// ---------------------------------------------------------------------------

fn build_d1<S: Scalar>(points: PointSet<S>) -> Result<DelaunayGraph<S>> {
    let n = points.n();
    let periodic = points.is_periodic();
    if n < 2 {
        return Err(Error::TooFewPoints { dim: 1, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        points.points[i][0]
            .partial_cmp(&points.points[j][0])
            .expect("finite coordinates")
    });

    let mut edges: Vec<Edge<S>> = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    let push_edge = |edges: &mut Vec<Edge<S>>,
                         adjacency: &mut Vec<Vec<Incidence>>,
                         i: usize,
                         j: usize,
                         wrap: i8| {
        let delta = points.points[j][0] + S::of_f64(wrap as f64) * points.len
            - points.points[i][0];
        let (a, b, wrap, delta) = if i <= j {
            (i, j, wrap, delta)
        } else {
            (j, i, -wrap, -delta)
        };
        let id = edges.len();
        edges.push(Edge {
            a,
            b,
            wrap: [wrap, 0],
            delta: [delta, S::zero()],
            facet: S::one(),
            facet_proj: [S::one(), S::zero()],
            left: None,
            right: None,
        });
        adjacency[a].push(Incidence {
            edge: id,
            forward: true,
        });
        if b != a {
            adjacency[b].push(Incidence {
                edge: id,
                forward: false,
            });
        }
    };

    let links = if periodic { n } else { n - 1 };
    for k in 0..links {
        let i = order[k];
        let j = order[(k + 1) % n];
        let wrap = if k + 1 == n { 1 } else { 0 };
        if i == j {
            return Err(Error::BoxTooSmall { vertex: i });
        }
        push_edge(&mut edges, &mut adjacency, i, j, wrap);
    }

    let mut cells = Vec::new();
    if periodic {
        cells = vec![Cell::default(); n];
        let len = points.len;
        for k in 0..n {
            let v = order[k];
            let prev = order[(k + n - 1) % n];
            let next = order[(k + 1) % n];
            let x = points.points[v][0];
            let mut dl = x - points.points[prev][0];
            if k == 0 {
                dl += len;
            }
            let mut dr = points.points[next][0] - x;
            if k + 1 == n {
                dr += len;
            }
            cells[v] = Cell {
                poly: Vec::new(),
                volume: (dl + dr) / S::of_f64(2.0),
                perimeter: S::of_f64(2.0),
            };
        }
        let total: S = cells.iter().fold(S::zero(), |acc, c| acc + c.volume);
        let rel = ((total - len) / len).abs().as_f64();
        debug_assert!(rel < 1e-9, "d=1 cell lengths sum to L (rel err {rel})");
    }

    Ok(DelaunayGraph {
        points,
        edges,
        adjacency,
        cells,
        triangles: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// d = 2, planar: direct triangulation, adjacency only
// ---------------------------------------------------------------------------

fn build_d2_planar<S: Scalar>(points: PointSet<S>) -> Result<DelaunayGraph<S>> {
    let n = points.n();
    if n < 3 {
        return Err(Error::TooFewPoints { dim: 2, got: n });
    }
    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for (i, p) in points.points.iter().enumerate() {
        let h = tri
            .insert(Point2::new(p[0].as_f64(), p[1].as_f64()))
            .map_err(|e| Error::InvalidParameter(format!("triangulation: {e:?}")))?;
        if h.index() != i {
            return Err(Error::DuplicatePoint {
                first: h.index(),
                second: i,
            });
        }
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::TooFewPoints { dim: 2, got: n });
    }

    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); n];
    for e in tri.undirected_edges() {
        let [va, vb] = e.vertices();
        let (mut a, mut b) = (va.index(), vb.index());
        let directed = e.as_directed();
        let mut left = directed
            .face()
            .as_inner()
            .map(|f| apex_index(f.vertices().map(|v| v.index()), a, b));
        let mut right = directed
            .rev()
            .face()
            .as_inner()
            .map(|f| apex_index(f.vertices().map(|v| v.index()), a, b));
        if a > b {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut left, &mut right);
        }
        let pa = points.points[a];
        let pb = points.points[b];
        let id = edges.len();
        edges.push(Edge {
            a,
            b,
            wrap: [0, 0],
            delta: [pb[0] - pa[0], pb[1] - pa[1]],
            facet: S::zero(),
            facet_proj: [S::zero(), S::zero()],
            left: left.map(|v| Flank { vertex: v, wrap: [0, 0] }),
            right: right.map(|v| Flank { vertex: v, wrap: [0, 0] }),
        });
        adjacency[a].push(Incidence {
            edge: id,
            forward: true,
        });
        adjacency[b].push(Incidence {
            edge: id,
            forward: false,
        });
    }

    let triangles = tri
        .inner_faces()
        .map(|f| {
            let [u, v, w] = f.vertices();
            TriangleRef {
                v: [u.index(), v.index(), w.index()],
                wrap: [[0, 0]; 3],
            }
        })
        .collect();

    Ok(DelaunayGraph {
        points,
        edges,
        adjacency,
        cells: Vec::new(),
        triangles,
    })
}

fn apex_index(vs: [usize; 3], a: usize, b: usize) -> usize {
    vs.into_iter()
        .find(|&v| v != a && v != b)
        .expect("triangle has a third vertex")
}

// ---------------------------------------------------------------------------
// d = 2, periodic: 3x3 tiling and quotient
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct TiledVertex {
    base: usize,
    off: [i8; 2],
}

fn build_d2_periodic<S: Scalar>(points: PointSet<S>) -> Result<DelaunayGraph<S>> {
    let n = points.n();
    if n < 3 {
        return Err(Error::TooFewPoints { dim: 2, got: n });
    }
    let len = points.len.as_f64();

    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut tiled: Vec<TiledVertex> = Vec::with_capacity(9 * n);
    // Fundamental domain first so base vertex k has tiled handle k.
    let offsets: [[i8; 2]; 9] = [
        [0, 0],
        [1, 0],
        [-1, 0],
        [0, 1],
        [0, -1],
        [1, 1],
        [1, -1],
        [-1, 1],
        [-1, -1],
    ];
    for off in offsets {
        for (k, p) in points.points.iter().enumerate() {
            let x = p[0].as_f64() + off[0] as f64 * len;
            let y = p[1].as_f64() + off[1] as f64 * len;
            let h = tri
                .insert(Point2::new(x, y))
                .map_err(|e| Error::InvalidParameter(format!("triangulation: {e:?}")))?;
            if h.index() != tiled.len() {
                return Err(Error::InvalidParameter(
                    "tiled copies collide; box degenerate".into(),
                ));
            }
            tiled.push(TiledVertex { base: k, off });
        }
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::TooFewPoints { dim: 2, got: n });
    }

    // Star of every fundamental-domain vertex: CCW neighbors with the left
    // face circumcenter per outgoing edge.
    struct StarEntry {
        to: TiledVertex,
        left_cc: [f64; 2],
        left_apex: TiledVertex,
    }
    let mut stars: Vec<Vec<StarEntry>> = Vec::with_capacity(n);
    for k in 0..n {
        let handle = FixedVertexHandle::from_index(k);
        let v = tri.vertex(handle);
        let mut star = Vec::new();
        for oe in v.out_edges() {
            let face = oe.face();
            let inner = face.as_inner().ok_or(Error::BoxTooSmall { vertex: k })?;
            let cc = inner.circumcenter();
            let [fa, fb, fc] = inner.vertices().map(|h| h.index());
            let apex = [fa, fb, fc]
                .into_iter()
                .find(|&i| i != k && i != oe.to().index())
                .expect("inner face has an apex");
            star.push(StarEntry {
                to: tiled[oe.to().index()],
                left_cc: [cc.x, cc.y],
                left_apex: tiled[apex],
            });
        }
        if star.len() < 3 {
            return Err(Error::BoxTooSmall { vertex: k });
        }
        stars.push(star);
    }

    // Quotient edges, canonicalized on (min endpoint, max endpoint, wrap).
    type Key = (usize, usize, [i8; 2]);
    let drop_tol = FACET_DROP_REL * len;
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut edges: Vec<Edge<S>> = Vec::new();
    let mut observed: Vec<u8> = Vec::new();
    let mut adjacency: Vec<Vec<Incidence>> = vec![Vec::new(); n];
    let mut cells: Vec<Cell<S>> = vec![Cell::default(); n];

    for (k, star) in stars.iter().enumerate() {
        let deg = star.len();
        let mut poly: Vec<[S; 2]> = Vec::new();
        let pk = [points.points[k][0].as_f64(), points.points[k][1].as_f64()];
        for (i, entry) in star.iter().enumerate() {
            // Work in coordinates relative to the site, matching the stored
            // cell polygon bit for bit so `facet_measures` is idempotent.
            let prev_cc = star[(i + deg - 1) % deg].left_cc;
            let cur_cc = entry.left_cc;
            let prev_rel = [prev_cc[0] - pk[0], prev_cc[1] - pk[1]];
            let cur_rel = [cur_cc[0] - pk[0], cur_cc[1] - pk[1]];
            let fdx = cur_rel[0] - prev_rel[0];
            let fdy = cur_rel[1] - prev_rel[1];
            let facet = (fdx * fdx + fdy * fdy).sqrt();
            if facet <= drop_tol {
                continue; // cocircular: zero-measure facet, no conductance
            }
            let j = entry.to.base;
            if j == k && entry.to.off != [0, 0] {
                return Err(Error::BoxTooSmall { vertex: k });
            }
            let off = entry.to.off;
            let (key, forward): (Key, bool) = if (k, [0i8, 0i8]) <= (j, off) {
                ((k, j, off), true)
            } else {
                ((j, k, [-off[0], -off[1]]), false)
            };
            let edge_id = match index.get(&key) {
                Some(&id) => {
                    observed[id] += 1;
                    let stored = edges[id].facet.as_f64();
                    if (stored - facet).abs() > 1e-9 * (len + stored.abs()) {
                        return Err(Error::BoxTooSmall { vertex: k });
                    }
                    id
                }
                None => {
                    let id = edges.len();
                    let (a, b, wrap) = key;
                    let delta = [
                        S::of_f64(
                            points.points[b][0].as_f64() + wrap[0] as f64 * len
                                - points.points[a][0].as_f64(),
                        ),
                        S::of_f64(
                            points.points[b][1].as_f64() + wrap[1] as f64 * len
                                - points.points[a][1].as_f64(),
                        ),
                    ];
                    edges.push(Edge {
                        a,
                        b,
                        wrap,
                        delta,
                        facet: S::of_f64(facet),
                        facet_proj: [S::of_f64(fdy.abs()), S::of_f64(fdx.abs())],
                        left: None,
                        right: None,
                    });
                    observed.push(1);
                    index.insert(key, id);
                    id
                }
            };
            // The left face of the outgoing edge k -> j supplies its apex.
            // In the canonical direction a -> b this is the left flank when k
            // is the `a` endpoint, the right flank otherwise; apex wraps are
            // stored relative to `a`'s representative.
            {
                let e = &mut edges[edge_id];
                let apex = star[i].left_apex;
                let flank = if forward {
                    Flank {
                        vertex: apex.base,
                        wrap: apex.off,
                    }
                } else {
                    Flank {
                        vertex: apex.base,
                        wrap: [apex.off[0] - off[0], apex.off[1] - off[1]],
                    }
                };
                if forward && e.left.is_none() {
                    e.left = Some(flank);
                }
                if !forward && e.right.is_none() {
                    e.right = Some(flank);
                }
            }
            adjacency[k].push(Incidence {
                edge: edge_id,
                forward,
            });
            poly.push([S::of_f64(cur_rel[0]), S::of_f64(cur_rel[1])]);
        }
        if poly.len() < 3 {
            return Err(Error::BoxTooSmall { vertex: k });
        }
        let volume = shoelace(&poly);
        if volume <= S::zero() {
            return Err(Error::InvalidParameter(format!(
                "cell of vertex {k} is not positively oriented"
            )));
        }
        let perimeter = perimeter_of(&poly);
        cells[k] = Cell {
            poly,
            volume,
            perimeter,
        };
    }

    // Every edge must have been seen from both endpoints.
    for (id, &count) in observed.iter().enumerate() {
        if count != 2 {
            return Err(Error::BoxTooSmall {
                vertex: edges[id].a,
            });
        }
    }
    for v in 0..n {
        if adjacency[v].len() < 3 {
            return Err(Error::BoxTooSmall { vertex: v });
        }
    }
    let total: f64 = cells.iter().map(|c| c.volume.as_f64()).sum();
    let expect = len * len;
    if ((total - expect) / expect).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "cell volumes sum to {total}, expected {expect}"
        )));
    }

    // Quotient triangles, one representative each: the face copy whose
    // minimal-index vertex sits in the fundamental domain.
    let mut triangles = Vec::new();
    for k in 0..n {
        let handle = FixedVertexHandle::from_index(k);
        for oe in tri.vertex(handle).out_edges() {
            let Some(face) = oe.face().as_inner() else {
                continue;
            };
            let vs = face.vertices().map(|h| tiled[h.index()]);
            let min = vs
                .iter()
                .min_by_key(|t| (t.base, t.off))
                .expect("face has vertices");
            if min.base == k && min.off == [0, 0] {
                triangles.push(TriangleRef {
                    v: [vs[0].base, vs[1].base, vs[2].base],
                    wrap: [vs[0].off, vs[1].off, vs[2].off],
                });
            }
        }
    }

    Ok(DelaunayGraph {
        points,
        edges,
        adjacency,
        cells,
        triangles,
    })
}

fn shoelace<S: Scalar>(poly: &[[S; 2]]) -> S {
    let mut acc = S::zero();
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    acc / S::of_f64(2.0)
}

fn perimeter_of<S: Scalar>(poly: &[[S; 2]]) -> S {
    let mut acc = S::zero();
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        acc += (dx * dx + dy * dy).sqrt();
    }
    acc
}

// ---------------------------------------------------------------------------
// Nearest-site queries
// ---------------------------------------------------------------------------

/// Bucket-grid index answering "which Voronoi cell contains x" queries under
/// the periodic metric, with lexicographic tie-breaking.
pub struct VoronoiLocator<S: Scalar> {
    dim: usize,
    len: f64,
    periodic: bool,
    points: Vec<[f64; 2]>,
    m: usize,
    buckets: Vec<Vec<u32>>,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> VoronoiLocator<S> {
    pub fn new(points: &PointSet<S>) -> Self {
        let n = points.n().max(1);
        let len = points.len.as_f64();
        let dim = points.dim;
        let m = if dim == 1 {
            n.min(4096)
        } else {
            ((n as f64).sqrt().ceil() as usize).clamp(1, 2048)
        };
        let cols = if dim == 1 { m } else { m * m };
        let mut buckets = vec![Vec::new(); cols];
        let pts: Vec<[f64; 2]> = points
            .points
            .iter()
            .map(|p| [p[0].as_f64(), p[1].as_f64()])
            .collect();
        for (i, p) in pts.iter().enumerate() {
            let bx = bucket_of(p[0], len, m);
            let by = if dim == 2 { bucket_of(p[1], len, m) } else { 0 };
            buckets[by * m + bx].push(i as u32);
        }
        VoronoiLocator {
            dim,
            len,
            periodic: points.is_periodic(),
            points: pts,
            m,
            buckets,
            _marker: std::marker::PhantomData,
        }
    }

    /// Nearest point to `x` (wrapped into the box first in periodic mode).
    pub fn locate(&self, x: [S; 2]) -> usize {
        let mut q = [x[0].as_f64(), x[1].as_f64()];
        if self.periodic {
            q[0] = wrap_coord(q[0], self.len);
            if self.dim == 2 {
                q[1] = wrap_coord(q[1], self.len);
            }
        }
        let w = self.len / self.m as f64;
        let bx = bucket_of(q[0], self.len, self.m) as isize;
        let by = if self.dim == 2 {
            bucket_of(q[1], self.len, self.m) as isize
        } else {
            0
        };
        let mut best: Option<(f64, [f64; 2], usize)> = None;
        let max_ring = self.m as isize; // beyond m/2 rings wrap to full cover
        for ring in 0..=max_ring {
            if let Some((bd, _, _)) = best {
                let bound = (ring - 1).max(0) as f64 * w;
                if bound * bound > bd {
                    break;
                }
            }
            if ring > (self.m as isize) / 2 + 1 && best.is_some() {
                // All buckets already covered by wrapped rings.
                break;
            }
            self.scan_ring(bx, by, ring, q, &mut best);
        }
        match best {
            Some((_, _, i)) => i,
            None => 0,
        }
    }

    fn scan_ring(
        &self,
        bx: isize,
        by: isize,
        ring: isize,
        q: [f64; 2],
        best: &mut Option<(f64, [f64; 2], usize)>,
    ) {
        let m = self.m as isize;
        let mut visit = |ix: isize, iy: isize| {
            let ix = ix.rem_euclid(m) as usize;
            let iy = if self.dim == 2 {
                iy.rem_euclid(m) as usize
            } else {
                0
            };
            for &i in &self.buckets[iy * self.m + ix] {
                let p = self.points[i as usize];
                let d = self.dist2(q, p);
                let cand = (d, p, i as usize);
                let better = match *best {
                    None => true,
                    Some((bd, bp, _)) => {
                        d < bd || (d == bd && (p[0], p[1]) < (bp[0], bp[1]))
                    }
                };
                if better {
                    *best = Some(cand);
                }
            }
        };
        if self.dim == 1 {
            if ring == 0 {
                visit(bx, 0);
            } else {
                visit(bx - ring, 0);
                visit(bx + ring, 0);
            }
            return;
        }
        if ring == 0 {
            visit(bx, by);
            return;
        }
        for dx in -ring..=ring {
            visit(bx + dx, by - ring);
            visit(bx + dx, by + ring);
        }
        for dy in (-ring + 1)..ring {
            visit(bx - ring, by + dy);
            visit(bx + ring, by + dy);
        }
    }

    fn dist2(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.dim {
            let mut d = (a[k] - b[k]).abs();
            if self.periodic && d > self.len / 2.0 {
                d = self.len - d;
            }
            acc += d * d;
        }
        acc
    }
}

fn bucket_of(x: f64, len: f64, m: usize) -> usize {
    (((x / len) * m as f64) as usize).min(m - 1)
}

/// Wrap a coordinate into `[0, len)`.
pub fn wrap_coord(x: f64, len: f64) -> f64 {
    let mut y = x % len;
    if y < 0.0 {
        y += len;
    }
    if y >= len {
        y = 0.0;
    }
    y
}

// ---------------------------------------------------------------------------
// Assumption diagnostics
// ---------------------------------------------------------------------------

/// Empirical finite-sample analogues of the moment assumptions: exponential
/// moment of the degree, second moment of the cell perimeter, and the
/// weighted reach moment `sum_j a(s,j) |delta|^r`. Reported as vertex
/// averages with standard errors; the assumptions concern the infinite
/// process, so no pass/fail is attached.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AssumptionReport {
    pub beta: f64,
    pub r: f64,
    pub exp_degree_mean: f64,
    pub exp_degree_se: f64,
    pub perimeter_sq_mean: f64,
    pub perimeter_sq_se: f64,
    pub reach_moment_mean: f64,
    pub reach_moment_se: f64,
}

pub fn assumption_diagnostics<S: Scalar>(
    graph: &DelaunayGraph<S>,
    beta: f64,
    r: f64,
) -> AssumptionReport {
    let n = graph.n();
    let mut exp_deg = Vec::with_capacity(n);
    let mut perim_sq = Vec::with_capacity(n);
    let mut reach = Vec::with_capacity(n);
    for v in 0..n {
        exp_deg.push((beta * graph.degree(v) as f64).exp());
        let p = graph
            .cells
            .get(v)
            .map(|c| c.perimeter.as_f64())
            .unwrap_or(0.0);
        perim_sq.push(p * p);
        let mut acc = 0.0;
        for &inc in &graph.adjacency[v] {
            let d = graph.delta(inc);
            let norm = (d[0] * d[0] + d[1] * d[1]).as_f64().sqrt();
            acc += norm.powf(r);
        }
        reach.push(acc);
    }
    let (em, es) = mean_se(&exp_deg);
    let (pm, ps) = mean_se(&perim_sq);
    let (rm, rs) = mean_se(&reach);
    AssumptionReport {
        beta,
        r,
        exp_degree_mean: em,
        exp_degree_se: es,
        perimeter_sq_mean: pm,
        perimeter_sq_se: ps,
        reach_moment_mean: rm,
        reach_moment_se: rs,
    }
}

pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

/// `edges.csv`: `i,j,dx[,dy],facet,facet_u1[,facet_u2]`.
pub fn edges_csv<S: Scalar>(graph: &DelaunayGraph<S>) -> String {
    let mut out = String::new();
    if graph.dim() == 1 {
        out.push_str("i,j,dx,facet,facet_u1\n");
        for e in &graph.edges {
            let _ = writeln!(out, "{},{},{},{},{}", e.a, e.b, e.delta[0], e.facet, e.facet_proj[0]);
        }
    } else {
        out.push_str("i,j,dx,dy,facet,facet_u1,facet_u2\n");
        for e in &graph.edges {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                e.a, e.b, e.delta[0], e.delta[1], e.facet, e.facet_proj[0], e.facet_proj[1]
            );
        }
    }
    out
}

/// `cells.csv`: vertex id, cell volume, perimeter, polygon vertex list
/// (d=2; absolute coordinates, `;`-separated `x y` pairs). Periodic graphs
/// only; a planar graph has no cells and yields just the header.
pub fn cells_csv<S: Scalar>(graph: &DelaunayGraph<S>) -> String {
    let mut out = String::from("vertex,volume,perimeter,polygon\n");
    for (v, cell) in graph.cells.iter().enumerate() {
        let mut poly = String::new();
        let p = graph.pos(v);
        for (i, q) in cell.poly.iter().enumerate() {
            if i > 0 {
                poly.push(';');
            }
            let _ = write!(poly, "{} {}", p[0] + q[0], p[1] + q[1]);
        }
        let _ = writeln!(out, "{},{},{},{}", v, cell.volume, cell.perimeter, poly);
    }
    out
}
