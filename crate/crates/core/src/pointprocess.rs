//! Point configurations on a periodic box (or the plane, for test fixtures).
//!
//! Samples Poisson configurations with an optional point pinned at the
//! origin (the Palm convention), and reads/writes the point CSV format with
//! its metadata sidecar. All sampling is a pure function of `(parameters,
//! seed)`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::RngExt;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream, GENERATOR_ID};
use crate::scalar::Scalar;

/// Whether coordinates wrap around the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxMode {
    Periodic,
    Planar,
}

/// A point configuration. Coordinates are stored as `[x, y]` with `y = 0`
/// in dimension one.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<S: Scalar> {
    pub dim: usize,
    /// Box side length; bounding hint only in planar mode.
    pub len: S,
    /// Nominal intensity (points per unit volume), informational.
    pub intensity: f64,
    pub seed: u64,
    pub mode: BoxMode,
    /// Palm convention: point 0 is exactly the origin.
    pub palm: bool,
    pub points: Vec<[S; 2]>,
}

/// Sidecar content for a persisted point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSetMeta {
    pub dim: usize,
    pub len: f64,
    pub intensity: f64,
    pub seed: u64,
    pub mode: BoxMode,
    pub palm: bool,
    pub generator: String,
}

impl<S: Scalar> PointSet<S> {
    /// Assemble a set from explicit coordinates, validating the invariants.
    pub fn from_points(
        dim: usize,
        len: S,
        mode: BoxMode,
        palm: bool,
        points: Vec<[S; 2]>,
    ) -> Result<Self> {
        check_dim(dim)?;
        if len <= S::zero() {
            return Err(Error::InvalidParameter("box length must be positive".into()));
        }
        let set = PointSet {
            dim,
            len,
            intensity: points.len() as f64 / len.as_f64().powi(dim as i32),
            seed: 0,
            mode,
            palm,
            points,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_periodic(&self) -> bool {
        self.mode == BoxMode::Periodic
    }

    /// Volume of the fundamental domain, `L^d`.
    pub fn box_volume(&self) -> S {
        if self.dim == 1 {
            self.len
        } else {
            self.len * self.len
        }
    }

    fn validate(&self) -> Result<()> {
        if self.mode == BoxMode::Periodic {
            for (i, p) in self.points.iter().enumerate() {
                for k in 0..self.dim {
                    if p[k] < S::zero() || p[k] >= self.len {
                        return Err(Error::OutOfBox {
                            index: i,
                            coords: format_point(p, self.dim),
                            len: self.len.as_f64(),
                        });
                    }
                }
            }
        }
        let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            if seen.replace(point_key(p)).is_some() {
                let first = self
                    .points
                    .iter()
                    .position(|q| point_key(q) == point_key(p))
                    .unwrap();
                return Err(Error::DuplicatePoint { first, second: i });
            }
        }
        if self.palm {
            let origin_ok = self
                .points
                .first()
                .map(|p| {
                    (0..self.dim).all(|k| p[k].as_f64().abs() <= PALM_ORIGIN_TOL)
                })
                .unwrap_or(false);
            if !origin_ok {
                return Err(Error::MissingOrigin {
                    tol: PALM_ORIGIN_TOL,
                });
            }
        }
        Ok(())
    }
}

/// Tolerance for recognizing the origin point when loading a Palm-mode set.
pub const PALM_ORIGIN_TOL: f64 = 1e-12;

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "unsupported dimension {dim} (expected 1 or 2)"
        )))
    }
}

fn point_key<S: Scalar>(p: &[S; 2]) -> (u64, u64) {
    (p[0].as_f64().to_bits(), p[1].as_f64().to_bits())
}

fn format_point<S: Scalar>(p: &[S; 2], dim: usize) -> String {
    if dim == 1 {
        format!("({})", p[0])
    } else {
        format!("({}, {})", p[0], p[1])
    }
}

/// Sample a Poisson configuration of intensity `lambda` on `[0,L)^d`.
///
/// With `palm` set, the origin is inserted at index 0 (the Palm version of a
/// Poisson process is the process plus a point at the origin). Colliding
/// coordinates (possible in floats, never in exact reals) are resampled from
/// a dedicated repair stream so the seed contract stays intact.
pub fn sample_poisson<S: Scalar>(
    dim: usize,
    len: S,
    lambda: f64,
    seed: u64,
    palm: bool,
) -> Result<PointSet<S>> {
    check_dim(dim)?;
    if len <= S::zero() {
        return Err(Error::InvalidParameter("box length must be positive".into()));
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidParameter("intensity must be positive".into()));
    }
    let volume = len.as_f64().powi(dim as i32);
    let mut rng = rng::substream(seed, Stream::Sample);
    let count = Poisson::new(lambda * volume)
        .map_err(|e| Error::InvalidParameter(format!("poisson mean: {e}")))?
        .sample(&mut rng) as usize;

    let mut points: Vec<[S; 2]> = Vec::with_capacity(count + palm as usize);
    let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(count + 1);
    if palm {
        let origin = [S::zero(), S::zero()];
        seen.insert(point_key(&origin));
        points.push(origin);
    }
    let mut repair = rng::substream(seed, Stream::Repair);
    for _ in 0..count {
        let mut p = draw_point(&mut rng, dim, len);
        while !seen.insert(point_key(&p)) {
            p = draw_point(&mut repair, dim, len);
        }
        points.push(p);
    }

    Ok(PointSet {
        dim,
        len,
        intensity: lambda,
        seed,
        mode: BoxMode::Periodic,
        palm,
        points,
    })
}

fn draw_point<S: Scalar>(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, len: S) -> [S; 2] {
    let x = rng.random_range(S::zero()..len);
    let y = if dim == 2 {
        rng.random_range(S::zero()..len)
    } else {
        S::zero()
    };
    [x, y]
}

/// Write `points.csv` (header `x[,y]`, shortest round-trip decimals) and the
/// `.meta` sidecar next to it.
pub fn save_points<S: Scalar>(set: &PointSet<S>, path: &Path) -> Result<()> {
    let mut body = String::new();
    body.push_str(if set.dim == 1 { "x\n" } else { "x,y\n" });
    for p in &set.points {
        if set.dim == 1 {
            let _ = writeln!(body, "{}", p[0]);
        } else {
            let _ = writeln!(body, "{},{}", p[0], p[1]);
        }
    }
    fs::write(path, body)?;
    let meta = PointSetMeta {
        dim: set.dim,
        len: set.len.as_f64(),
        intensity: set.intensity,
        seed: set.seed,
        mode: set.mode,
        palm: set.palm,
        generator: GENERATOR_ID.to_string(),
    };
    let meta_json = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Metadata(e.to_string()))?;
    fs::write(meta_path(path), meta_json)?;
    Ok(())
}

/// Sidecar path: same stem, `.meta` suffix appended.
pub fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta");
    p.into()
}

/// Load a point CSV with its sidecar, re-validating all invariants.
pub fn load_points<S: Scalar>(path: &Path) -> Result<PointSet<S>> {
    let meta_text = fs::read_to_string(meta_path(path))?;
    let meta: PointSetMeta =
        serde_json::from_str(&meta_text).map_err(|e| Error::Metadata(e.to_string()))?;
    check_dim(meta.dim)?;

    let body = fs::read_to_string(path)?;
    let mut lines = body.lines().enumerate();
    let expected_header = if meta.dim == 1 { "x" } else { "x,y" };
    match lines.next() {
        Some((_, h)) if h.trim() == expected_header => {}
        Some((n, h)) => {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("expected header '{expected_header}', got '{h}'"),
            })
        }
        None => {} // empty file: no header, no points
    }

    let mut points = Vec::new();
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != meta.dim {
            return Err(Error::MalformedRow {
                line: n + 1,
                reason: format!("expected {} columns, got {}", meta.dim, cols.len()),
            });
        }
        let mut p = [S::zero(), S::zero()];
        for (k, col) in cols.iter().enumerate() {
            p[k] = col.trim().parse::<S>().map_err(|e| Error::MalformedRow {
                line: n + 1,
                reason: format!("bad number '{col}': {e}"),
            })?;
        }
        points.push(p);
    }

    let set = PointSet {
        dim: meta.dim,
        len: S::of_f64(meta.len),
        intensity: meta.intensity,
        seed: meta.seed,
        mode: meta.mode,
        palm: meta.palm,
        points,
    };
    set.validate()?;
    Ok(set)
}
