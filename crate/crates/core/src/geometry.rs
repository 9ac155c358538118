//! Compact set values in R^n and the Hausdorff distance between them.
//!
//! A [`SetValue`] is one of three finite representations: a single point, an
//! axis-aligned box, or a finite point cloud. Distances are exact whenever
//! the target set is convex (singleton or box) and in every one-dimensional
//! case. The only approximated case is the directed distance from a box to a
//! point cloud in two or more dimensions, where the box is densified on a
//! regular grid ([`DEFAULT_BOX_RESOLUTION`] points per axis).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Grid points per axis used when a box in R^n (n > 1) has to be densified.
pub const DEFAULT_BOX_RESOLUTION: usize = 17;

/// Vertex enumeration is used for box-to-convex distances up to this dimension.
const MAX_VERTEX_DIM: usize = 16;

/// A nonempty compact subset of R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetValue {
    Singleton { v: Vec<f64> },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    PointCloud { points: Vec<Vec<f64>> },
}

impl SetValue {
    pub fn point(v: impl Into<Vec<f64>>) -> Self {
        SetValue::Singleton { v: v.into() }
    }

    pub fn scalar(v: f64) -> Self {
        SetValue::Singleton { v: vec![v] }
    }

    /// Closed interval `[lo, hi]` in R.
    pub fn interval(lo: f64, hi: f64) -> Self {
        SetValue::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn boxed(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Self {
        SetValue::Box {
            lo: lo.into(),
            hi: hi.into(),
        }
    }

    pub fn cloud(points: Vec<Vec<f64>>) -> Self {
        SetValue::PointCloud { points }
    }

    /// Ambient dimension. Zero for an (invalid) empty cloud.
    pub fn dim(&self) -> usize {
        match self {
            SetValue::Singleton { v } => v.len(),
            SetValue::Box { lo, .. } => lo.len(),
            SetValue::PointCloud { points } => points.first().map_or(0, Vec::len),
        }
    }

    /// Checks nonemptiness, finiteness, consistent dimensions and `lo <= hi`.
    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            SetValue::Singleton { v } => {
                if v.is_empty() {
                    return domain("singleton in R^0");
                }
                if !finite(v) {
                    return domain("non-finite singleton");
                }
            }
            SetValue::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    return domain(format!(
                        "box bounds have dimensions {} and {}",
                        lo.len(),
                        hi.len()
                    ));
                }
                if !finite(lo) || !finite(hi) {
                    return domain("non-finite box bound");
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return domain("box with lo > hi");
                }
            }
            SetValue::PointCloud { points } => {
                let Some(first) = points.first() else {
                    return domain("empty point cloud");
                };
                if first.is_empty() {
                    return domain("point cloud in R^0");
                }
                for p in points {
                    if p.len() != first.len() {
                        return domain("point cloud with mixed dimensions");
                    }
                    if !finite(p) {
                        return domain("non-finite point in cloud");
                    }
                }
            }
        }
        Ok(())
    }

    /// Finite sample of the set: the point, the cloud, or a regular grid over the box.
    pub fn sample_points(&self, resolution: usize) -> Vec<Vec<f64>> {
        match self {
            SetValue::Singleton { v } => vec![v.clone()],
            SetValue::PointCloud { points } => points.clone(),
            SetValue::Box { lo, hi } => box_grid(lo, hi, resolution.max(2)),
        }
    }

    /// Sup of the Euclidean norm over the set.
    pub fn max_norm(&self) -> f64 {
        match self {
            SetValue::Singleton { v } => norm(v),
            SetValue::PointCloud { points } => points.iter().map(|p| norm(p)).fold(0.0, f64::max),
            SetValue::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }

    /// Bounds of the set along each axis.
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            SetValue::Singleton { v } => (v.clone(), v.clone()),
            SetValue::Box { lo, hi } => (lo.clone(), hi.clone()),
            SetValue::PointCloud { points } => {
                let n = points[0].len();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for p in points {
                    for k in 0..n {
                        lo[k] = lo[k].min(p[k]);
                        hi[k] = hi[k].max(p[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    fn is_convex_repr(&self) -> bool {
        !matches!(self, SetValue::PointCloud { .. })
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dist_to_box(p: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    p.iter()
        .zip(lo.iter().zip(hi))
        .map(|(x, (l, h))| {
            let e = if x < l {
                l - x
            } else if x > h {
                x - h
            } else {
                0.0
            };
            e * e
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from a point to a set.
pub fn point_distance(p: &[f64], set: &SetValue) -> f64 {
    match set {
        SetValue::Singleton { v } => dist(p, v),
        SetValue::Box { lo, hi } => dist_to_box(p, lo, hi),
        SetValue::PointCloud { points } => points
            .iter()
            .map(|q| dist(p, q))
            .fold(f64::INFINITY, f64::min),
    }
}

fn box_grid(lo: &[f64], hi: &[f64], per_axis: usize) -> Vec<Vec<f64>> {
    let n = lo.len();
    let axis = |k: usize, i: usize| {
        if hi[k] == lo[k] {
            lo[k]
        } else {
            lo[k] + (hi[k] - lo[k]) * i as f64 / (per_axis - 1) as f64
        }
    };
    let count = per_axis.pow(n as u32);
    (0..count)
        .map(|mut idx| {
            (0..n)
                .map(|k| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    axis(k, i)
                })
                .collect()
        })
        .collect()
}

fn box_vertices(lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
                .collect()
        })
        .collect()
}

fn check_pair(a: &SetValue, b: &SetValue) -> Result<()> {
    a.validate()?;
    b.validate()?;
    if a.dim() != b.dim() {
        return domain(format!(
            "sets live in R^{} and R^{}",
            a.dim(),
            b.dim()
        ));
    }
    Ok(())
}

/// `sup_{a in A} dist(a, B)`.
pub fn directed_distance(a: &SetValue, b: &SetValue) -> Result<f64> {
    directed_distance_with(a, b, DEFAULT_BOX_RESOLUTION)
}

/// [`directed_distance`] with an explicit densification resolution for the
/// box-to-cloud case in R^n, n > 1.
pub fn directed_distance_with(a: &SetValue, b: &SetValue, box_resolution: usize) -> Result<f64> {
    check_pair(a, b)?;
    Ok(directed_unchecked(a, b, box_resolution))
}

fn directed_unchecked(a: &SetValue, b: &SetValue, box_resolution: usize) -> f64 {
    if a.dim() == 1 {
        return directed_1d(a, b);
    }
    // dist(., B) is convex when B is convex, so its sup over a box sits at a vertex.
    match (a, b) {
        (SetValue::Singleton { v }, _) => point_distance(v, b),
        (SetValue::PointCloud { points }, _) => points
            .iter()
            .map(|p| point_distance(p, b))
            .fold(0.0, f64::max),
        (SetValue::Box { lo, hi }, _) if b.is_convex_repr() && lo.len() <= MAX_VERTEX_DIM => {
            box_vertices(lo, hi)
                .iter()
                .map(|p| point_distance(p, b))
                .fold(0.0, f64::max)
        }
        (SetValue::Box { lo, hi }, _) => box_grid(lo, hi, box_resolution.max(2))
            .iter()
            .map(|p| point_distance(p, b))
            .fold(0.0, f64::max),
    }
}

fn directed_1d(a: &SetValue, b: &SetValue) -> f64 {
    let d = |x: f64| point_distance(&[x], b);
    match (a, b) {
        (SetValue::PointCloud { points }, _) => points.iter().map(|p| d(p[0])).fold(0.0, f64::max),
        (_, SetValue::PointCloud { points }) => {
            // sup over an interval of the distance to finitely many points:
            // attained at the interval ends or at midpoints between neighbours.
            let (lo, hi) = a.bounds();
            let (lo, hi) = (lo[0], hi[0]);
            let mut pts: Vec<f64> = points.iter().map(|p| p[0]).collect();
            pts.sort_by(f64::total_cmp);
            let mut best = d(lo).max(d(hi));
            for w in pts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                if mid > lo && mid < hi {
                    best = best.max(d(mid));
                }
            }
            best
        }
        _ => {
            let (lo, hi) = a.bounds();
            d(lo[0]).max(d(hi[0]))
        }
    }
}

/// Hausdorff distance: the larger of the two directed distances.
pub fn hausdorff_distance(a: &SetValue, b: &SetValue) -> Result<f64> {
    hausdorff_distance_with(a, b, DEFAULT_BOX_RESOLUTION)
}

pub fn hausdorff_distance_with(a: &SetValue, b: &SetValue, box_resolution: usize) -> Result<f64> {
    check_pair(a, b)?;
    if let (SetValue::Singleton { v }, SetValue::Singleton { v: w }) = (a, b) {
        return Ok(dist(v, w));
    }
    Ok(directed_unchecked(a, b, box_resolution).max(directed_unchecked(b, a, box_resolution)))
}

/// Hausdorff distance for sets already known to be valid and of equal dimension.
pub(crate) fn hausdorff_fast(a: &SetValue, b: &SetValue) -> f64 {
    if let (SetValue::Singleton { v }, SetValue::Singleton { v: w }) = (a, b) {
        return dist(v, w);
    }
    directed_unchecked(a, b, DEFAULT_BOX_RESOLUTION)
        .max(directed_unchecked(b, a, DEFAULT_BOX_RESOLUTION))
}
