use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Uniform grid of `n` interior nodes strictly inside `(-L, L)`, with
/// spacing `2L/(n+1)`. Node `i` sits at `(2i + 1 - n)·Δx/2`, so the node set is
/// exactly symmetric and grids with the same spacing share node coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_width: f64,
    n_interior: usize,
    spacing: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, n_interior: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(domain(format!("grid half-width must be positive, got {half_width}")));
        }
        if n_interior == 0 {
            return Err(domain("grid needs at least one interior node"));
        }
        Ok(Self { half_width, n_interior, spacing: 2.0 * half_width / (n_interior + 1) as f64 })
    }

    /// Grid on `(-L, L)` with the given spacing; `2L/Δx` must be an integer.
    pub fn with_spacing(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(domain(format!("grid spacing must be positive, got {spacing}")));
        }
        let cells = 2.0 * half_width / spacing;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * rounded.max(1.0) || rounded < 2.0 {
            return Err(domain(format!(
                "half-width {half_width} is not a multiple of spacing {spacing}/2"
            )));
        }
        Self::new(half_width, rounded as usize - 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_interior
    }

    pub fn is_empty(&self) -> bool {
        self.n_interior == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn node(&self, i: usize) -> f64 {
        (2.0 * i as f64 + 1.0 - self.n_interior as f64) * 0.5 * self.spacing
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.node(i)).collect()
    }

    /// Index of the node closest to `x`, if `x` is inside the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if x.abs() >= self.half_width {
            return None;
        }
        let k = (x / self.spacing + 0.5 * (self.n_interior as f64 - 1.0)).round();
        Some(k.clamp(0.0, (self.n_interior - 1) as f64) as usize)
    }

    /// Indices of nodes with `|x| ≤ radius`.
    pub fn window(&self, radius: f64) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_interior).filter(move |&i| self.node(i).abs() <= radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_symmetric_and_interior() {
        let g = Grid1D::new(3.0, 10).unwrap();
        for i in 0..10 {
            assert_eq!(g.node(i), -g.node(9 - i));
            assert!(g.node(i).abs() < 3.0);
        }
        assert!((g.node(0) + 3.0 - g.spacing()).abs() < 1e-14);
    }

    #[test]
    fn nested_grids_share_nodes() {
        let coarse = Grid1D::with_spacing(10.0, 0.1).unwrap();
        let fine = Grid1D::with_spacing(20.0, 0.1).unwrap();
        assert_eq!(coarse.len(), 199);
        assert_eq!(fine.len(), 399);
        let offset = (fine.len() - coarse.len()) / 2;
        for i in 0..coarse.len() {
            assert_eq!(coarse.node(i), fine.node(i + offset));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Grid1D::new(0.0, 5).is_err());
        assert!(Grid1D::new(1.0, 0).is_err());
        assert!(Grid1D::with_spacing(1.0, 0.3).is_err());
    }

    #[test]
    fn nearest_and_window() {
        let g = Grid1D::with_spacing(5.0, 0.5).unwrap();
        assert_eq!(g.node(g.nearest(0.0).unwrap()), 0.0);
        assert_eq!(g.node(g.nearest(1.1).unwrap()), 1.0);
        assert!(g.nearest(5.0).is_none());
        assert_eq!(g.window(1.0).count(), 5);
    }
}
