//! Spatial and vertical grids.
//!
//! Spatial grids are uniform, either a periodic torus or a truncated slab of
//! the line/plane. Vertical grids discretize the extension half-axis and are
//! graded toward 0, where the solutions of the weighted equation behave like
//! `y^{1-a}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order::FracOrder;
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridMode<T> {
    /// Periodic torus of period `period` per axis.
    Torus { period: T },
    /// Truncated symmetric interval `[-extent, extent]` per axis.
    Line { extent: T },
}

/// Uniform spatial grid in 1 or 2 dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid<T> {
    dim: usize,
    mode: GridMode<T>,
    /// Samples per axis.
    n: usize,
}

impl<T: Real> SpatialGrid<T> {
    pub fn torus(dim: usize, period: T, n: usize) -> Result<Self> {
        Self::check(dim, n)?;
        if !(period > T::zero()) {
            return Err(Error::Grid(format!("period must be positive, got {period}")));
        }
        Ok(Self {
            dim,
            mode: GridMode::Torus { period },
            n,
        })
    }

    pub fn line(dim: usize, extent: T, n: usize) -> Result<Self> {
        Self::check(dim, n)?;
        if !(extent > T::zero()) {
            return Err(Error::Grid(format!("extent must be positive, got {extent}")));
        }
        Ok(Self {
            dim,
            mode: GridMode::Line { extent },
            n,
        })
    }

    fn check(dim: usize, n: usize) -> Result<()> {
        if dim != 1 && dim != 2 {
            return Err(Error::Grid(format!("dim must be 1 or 2, got {dim}")));
        }
        if n < 8 {
            return Err(Error::Grid(format!("need at least 8 samples per axis, got {n}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> GridMode<T> {
        self.mode
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.mode, GridMode::Torus { .. })
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            GridMode::Torus { .. } => "torus",
            GridMode::Line { .. } => "line",
        }
    }

    /// Samples per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points (`n^dim`).
    pub fn num_points(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Grid spacing: `L/N` on the torus, `2X/(N-1)` on the line.
    pub fn spacing(&self) -> T {
        match self.mode {
            GridMode::Torus { period } => period / T::of_usize(self.n),
            GridMode::Line { extent } => {
                T::of(2.0) * extent / T::of_usize(self.n - 1)
            }
        }
    }

    /// Coordinate of sample `i` along one axis.
    pub fn coord(&self, i: usize) -> T {
        let h = self.spacing();
        match self.mode {
            GridMode::Torus { .. } => T::of_usize(i) * h,
            GridMode::Line { extent } => T::of_usize(i) * h - extent,
        }
    }

    /// Full coordinates of the flattened point index (row-major, first axis
    /// outermost).
    pub fn point(&self, flat: usize) -> Vec<T> {
        match self.dim {
            1 => vec![self.coord(flat)],
            2 => vec![self.coord(flat / self.n), self.coord(flat % self.n)],
            _ => unreachable!(),
        }
    }

    /// Midpoint of the domain (`L/2` per axis on the torus, the origin on
    /// the line).
    pub fn center(&self) -> Vec<T> {
        let c = match self.mode {
            GridMode::Torus { period } => period / T::of(2.0),
            GridMode::Line { .. } => T::zero(),
        };
        vec![c; self.dim]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerticalCoord {
    Y,
    Z,
}

/// Grid on the vertical half-axis, starting at 0, strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerticalGrid<T> {
    coordinate: VerticalCoord,
    nodes: Vec<T>,
    /// Grading parameter: the geometric step ratio used to build the grid
    /// (1 means uniform).
    grading: T,
}

impl<T: Real> VerticalGrid<T> {
    /// Uniform grid with `levels` nodes (including 0) up to `height`.
    pub fn uniform(coordinate: VerticalCoord, height: T, levels: usize) -> Result<Self> {
        Self::validate_counts(height, levels)?;
        let step = height / T::of_usize(levels - 1);
        let nodes = (0..levels).map(|j| T::of_usize(j) * step).collect();
        Self::new(coordinate, nodes, T::one())
    }

    /// Geometrically graded grid: steps grow by `ratio` away from 0 and the
    /// node set ends exactly at `height`.
    pub fn geometric(coordinate: VerticalCoord, height: T, levels: usize, ratio: T) -> Result<Self> {
        Self::validate_counts(height, levels)?;
        if !(ratio > T::one()) {
            return Err(Error::Grid(format!("geometric ratio must exceed 1, got {ratio}")));
        }
        let m = levels - 1;
        // first step chosen so the geometric sum of m steps equals height
        let first = height * (ratio - T::one()) / (ratio.powi(m as i32) - T::one());
        let mut nodes = Vec::with_capacity(levels);
        let mut y = T::zero();
        let mut step = first;
        nodes.push(y);
        for _ in 0..m {
            y = y + step;
            nodes.push(y);
            step = step * ratio;
        }
        // snap the top node to the exact height
        *nodes.last_mut().unwrap() = height;
        Self::new(coordinate, nodes, ratio)
    }

    /// Graded grid whose steps grow geometrically from `first_step` by
    /// `ratio` but never beyond `max_step`; the node count follows from the
    /// target height. Useful when the field must stay resolved far from the
    /// boundary (half-ball quadratures, tall domains).
    pub fn geometric_capped(
        coordinate: VerticalCoord,
        height: T,
        first_step: T,
        ratio: T,
        max_step: T,
    ) -> Result<Self> {
        if !(height > T::zero()) || !(first_step > T::zero()) || !(max_step >= first_step) {
            return Err(Error::Grid("need 0 < first_step <= max_step and height > 0".into()));
        }
        if !(ratio > T::one()) {
            return Err(Error::Grid(format!("geometric ratio must exceed 1, got {ratio}")));
        }
        let mut nodes = vec![T::zero()];
        let mut y = T::zero();
        let mut step = first_step;
        while y < height {
            y = (y + step).min(height);
            nodes.push(y);
            step = (step * ratio).min(max_step);
        }
        Self::new(coordinate, nodes, ratio)
    }

    /// Build from explicit nodes.
    pub fn from_nodes(coordinate: VerticalCoord, nodes: Vec<T>, grading: T) -> Result<Self> {
        Self::new(coordinate, nodes, grading)
    }

    fn validate_counts(height: T, levels: usize) -> Result<()> {
        if levels < 16 {
            return Err(Error::Grid(format!("need at least 16 vertical nodes, got {levels}")));
        }
        if !(height > T::zero()) {
            return Err(Error::Grid(format!("height must be positive, got {height}")));
        }
        Ok(())
    }

    fn new(coordinate: VerticalCoord, nodes: Vec<T>, grading: T) -> Result<Self> {
        if nodes.len() < 16 {
            return Err(Error::Grid(format!("need at least 16 vertical nodes, got {}", nodes.len())));
        }
        if nodes[0] != T::zero() {
            return Err(Error::Grid("vertical grid must start at 0".into()));
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Grid("vertical nodes must be strictly increasing and finite".into()));
            }
        }
        Ok(Self {
            coordinate,
            nodes,
            grading,
        })
    }

    pub fn coordinate(&self) -> VerticalCoord {
        self.coordinate
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn levels(&self) -> usize {
        self.nodes.len()
    }

    pub fn height(&self) -> T {
        *self.nodes.last().unwrap()
    }

    pub fn grading(&self) -> T {
        self.grading
    }

    /// The same nodes expressed in the `z` coordinate.
    pub fn nodes_in_z(&self, order: &FracOrder<T>) -> Result<Vec<T>> {
        match self.coordinate {
            VerticalCoord::Z => Ok(self.nodes.clone()),
            VerticalCoord::Y => self.nodes.iter().map(|&y| order.y_to_z(y)).collect(),
        }
    }

    /// The same nodes expressed in the `y` coordinate.
    pub fn nodes_in_y(&self, order: &FracOrder<T>) -> Result<Vec<T>> {
        match self.coordinate {
            VerticalCoord::Y => Ok(self.nodes.clone()),
            VerticalCoord::Z => self.nodes.iter().map(|&z| order.z_to_y(z)).collect(),
        }
    }
}
