use nalgebra::{DVector, DVectorView};

use super::CoreError;

/// A point of the product space, stored as the flat vector `z = (x, y)`
/// together with the split index `m` separating the min block `x ∈ ℝ^m`
/// from the max block `y ∈ ℝ^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    values: DVector<f64>,
    split: usize,
}

impl Point {
    /// Builds a point, enforcing `split ≤ len`, `len ≥ 2`, and finiteness.
    pub fn new(values: DVector<f64>, split: usize) -> Result<Self, CoreError> {
        if values.len() < 2 {
            return Err(CoreError::DimensionMismatch(format!(
                "point needs at least 2 entries, got {}",
                values.len()
            )));
        }
        if split > values.len() {
            return Err(CoreError::DimensionMismatch(format!(
                "split {} exceeds length {}",
                split,
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(CoreError::NonFinite("point coordinates".into()));
        }
        Ok(Self { values, split })
    }

    /// Concatenates the two blocks into a point with `split = x.len()`.
    pub fn from_parts(x: &[f64], y: &[f64]) -> Result<Self, CoreError> {
        let mut values = Vec::with_capacity(x.len() + y.len());
        values.extend_from_slice(x);
        values.extend_from_slice(y);
        Self::new(DVector::from_vec(values), x.len())
    }

    /// The origin of `ℝ^{m+n}`.
    pub fn zeros(dim_x: usize, dim_y: usize) -> Self {
        Self {
            values: DVector::zeros(dim_x + dim_y),
            split: dim_x,
        }
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// View of the min block `x`.
    pub fn x(&self) -> DVectorView<'_, f64> {
        self.values.rows(0, self.split)
    }

    /// View of the max block `y`.
    pub fn y(&self) -> DVectorView<'_, f64> {
        self.values.rows(self.split, self.values.len() - self.split)
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    /// Euclidean distance `‖self − other‖` over the flat vectors.
    pub fn distance(&self, other: &Point) -> f64 {
        (&self.values - &other.values).norm()
    }

    /// Replaces the coordinates, keeping the split. Used by solver loops to
    /// advance an iterate without re-validating the split each step.
    pub(crate) fn with_values(&self, values: DVector<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            split: self.split,
        }
    }
}
