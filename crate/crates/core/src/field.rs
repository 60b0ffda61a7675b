//! Sampled functions on spatial grids and extension fields on the half-plane.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VerticalCoord, VerticalGrid};
use crate::order::FracOrder;
use crate::real::Real;

/// Values of a scalar function on a [`SpatialGrid`], flattened row-major
/// (first axis outermost).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    grid: SpatialGrid<T>,
    values: Array1<T>,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(grid: SpatialGrid<T>, values: Array1<T>) -> Result<Self> {
        if values.len() != grid.num_points() {
            return Err(Error::Grid(format!(
                "value count {} does not match grid point count {}",
                values.len(),
                grid.num_points()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sampled values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let values = (0..grid.num_points())
            .map(|k| f(&grid.point(k)))
            .collect::<Array1<T>>();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn values(&self) -> &Array1<T> {
        &self.values
    }

    pub fn into_values(self) -> Array1<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest absolute value.
    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.grid, self.values.mapv(|v| f(v)))
    }

    /// Pointwise linear combination `alpha * self + beta * other` on a shared grid.
    pub fn linear_combination(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::Grid("grids must match for linear combination".into()));
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&u, &v)| alpha * u + beta * v)
            .collect::<Array1<T>>();
        Self::new(self.grid, values)
    }
}

/// Extension field on (x-grid) x (vertical grid). Row `i` of `values` holds
/// the vertical profile over the `i`-th spatial point; column 0 is the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPlaneField<T> {
    xgrid: SpatialGrid<T>,
    vgrid: VerticalGrid<T>,
    values: Array2<T>,
    order: FracOrder<T>,
}

impl<T: Real> HalfPlaneField<T> {
    pub fn new(
        xgrid: SpatialGrid<T>,
        vgrid: VerticalGrid<T>,
        order: FracOrder<T>,
        values: Array2<T>,
    ) -> Result<Self> {
        if values.nrows() != xgrid.num_points() || values.ncols() != vgrid.levels() {
            return Err(Error::Grid(format!(
                "field shape {:?} does not match {} x {}",
                values.dim(),
                xgrid.num_points(),
                vgrid.levels()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field values must be finite".into()));
        }
        Ok(Self {
            xgrid,
            vgrid,
            values,
            order,
        })
    }

    pub fn from_fn(
        xgrid: SpatialGrid<T>,
        vgrid: VerticalGrid<T>,
        order: FracOrder<T>,
        f: impl Fn(&[T], T) -> T,
    ) -> Result<Self> {
        let mut values = Array2::zeros((xgrid.num_points(), vgrid.levels()));
        for i in 0..xgrid.num_points() {
            let p = xgrid.point(i);
            for (j, &v) in vgrid.nodes().iter().enumerate() {
                values[(i, j)] = f(&p, v);
            }
        }
        Self::new(xgrid, vgrid, order, values)
    }

    pub fn xgrid(&self) -> &SpatialGrid<T> {
        &self.xgrid
    }

    pub fn vgrid(&self) -> &VerticalGrid<T> {
        &self.vgrid
    }

    pub fn order(&self) -> FracOrder<T> {
        self.order
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    /// The bottom row `u(., 0)`.
    pub fn trace(&self) -> SampledFunction<T> {
        let values = self.values.column(0).to_owned();
        SampledFunction::new(self.xgrid, values).expect("trace inherits field invariants")
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

/// Even reflection of a half-plane field across the boundary: vertical nodes
/// run symmetrically through 0.
#[derive(Clone, Debug, PartialEq)]
pub struct FullPlaneField<T> {
    xgrid: SpatialGrid<T>,
    vnodes: Vec<T>,
    values: Array2<T>,
    order: FracOrder<T>,
    coordinate: VerticalCoord,
}

impl<T: Real> FullPlaneField<T> {
    pub(crate) fn from_parts(
        xgrid: SpatialGrid<T>,
        vnodes: Vec<T>,
        values: Array2<T>,
        order: FracOrder<T>,
        coordinate: VerticalCoord,
    ) -> Self {
        debug_assert_eq!(values.nrows(), xgrid.num_points());
        debug_assert_eq!(values.ncols(), vnodes.len());
        Self {
            xgrid,
            vnodes,
            values,
            order,
            coordinate,
        }
    }

    pub fn xgrid(&self) -> &SpatialGrid<T> {
        &self.xgrid
    }

    /// Symmetric vertical nodes, increasing, containing 0.
    pub fn vnodes(&self) -> &[T] {
        &self.vnodes
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn order(&self) -> FracOrder<T> {
        self.order
    }

    pub fn coordinate(&self) -> VerticalCoord {
        self.coordinate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn value_count_must_match() {
        let grid = SpatialGrid::torus(1, 1.0f64, 8).unwrap();
        assert!(SampledFunction::new(grid, Array1::zeros(7)).is_err());
        assert!(SampledFunction::new(grid, Array1::zeros(8)).is_ok());
    }

    #[test]
    fn non_finite_rejected() {
        let grid = SpatialGrid::torus(1, 1.0f64, 8).unwrap();
        let vals = array![0.0, 1.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert!(SampledFunction::new(grid, vals).is_err());
    }

    #[test]
    fn trace_is_bottom_row() {
        let xgrid = SpatialGrid::torus(1, 2.0f64, 8).unwrap();
        let vgrid = VerticalGrid::uniform(VerticalCoord::Y, 1.0, 16).unwrap();
        let order = FracOrder::from_s(0.5).unwrap();
        let u = HalfPlaneField::from_fn(xgrid, vgrid, order, |x, y| x[0] + y).unwrap();
        let trace = u.trace();
        for i in 0..8 {
            assert_eq!(trace.values()[i], xgrid.coord(i));
        }
    }
}
