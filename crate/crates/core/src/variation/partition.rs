use serde::Serialize;

use crate::error::{domain, Result};

/// Ordered grid `t_0 < t_1 < ... < t_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    grid: Vec<f64>,
}

impl Partition {
    pub fn new(grid: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return domain("a partition needs at least two points");
        }
        if grid.iter().any(|t| !t.is_finite()) {
            return domain("non-finite partition point");
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return domain("partition points must be strictly increasing");
        }
        Ok(Partition { grid })
    }

    /// `n` equal cells on `[s, t]`.
    pub fn uniform(s: f64, t: f64, n: usize) -> Result<Self> {
        if n == 0 || !(s < t) {
            return domain("uniform partition needs s < t and n > 0");
        }
        Self::new((0..=n).map(|i| node(s, t, i, n)).collect())
    }

    /// `2^level` equal cells on `[s, t]`, merged with every extra point that
    /// falls strictly inside.
    pub fn dyadic(s: f64, t: f64, level: u32, extra: &[f64]) -> Result<Self> {
        let n = 1usize << level;
        if !(s < t) {
            return domain("dyadic partition needs s < t");
        }
        let mut grid: Vec<f64> = (0..=n).map(|i| node(s, t, i, n)).collect();
        grid.extend(extra.iter().copied().filter(|&e| e > s && e < t));
        Ok(Self::from_unsorted(grid))
    }

    /// Sorts and removes duplicates; panics on fewer than two distinct points.
    pub(crate) fn from_unsorted(mut grid: Vec<f64>) -> Self {
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        assert!(grid.len() >= 2, "degenerate partition");
        Partition { grid }
    }

    pub fn points(&self) -> &[f64] {
        &self.grid
    }

    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn len_cells(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Mesh size: the largest gap.
    pub fn diam(&self) -> f64 {
        self.cells().map(|(a, b)| b - a).fold(0.0, f64::max)
    }

    pub fn contains_point(&self, t: f64) -> bool {
        self.grid.binary_search_by(|p| p.total_cmp(&t)).is_ok()
    }

    /// Union of both grids.
    pub fn merge(&self, other: &Partition) -> Partition {
        let mut g = self.grid.clone();
        g.extend_from_slice(&other.grid);
        Self::from_unsorted(g)
    }

    /// Restriction to `[start, t]`; `t` is added if absent.
    pub fn truncate(&self, t: f64) -> Result<Partition> {
        let mut g: Vec<f64> = self.grid.iter().copied().filter(|&p| p < t).collect();
        g.push(t);
        Partition::new(g)
    }
}

/// `s + (t - s) i / n`, exact at both ends.
pub(crate) fn node(s: f64, t: f64, i: usize, n: usize) -> f64 {
    if i == n {
        t
    } else {
        s + (t - s) * (i as f64 / n as f64)
    }
}
