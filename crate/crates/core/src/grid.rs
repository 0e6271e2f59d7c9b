//! Rectangular two-parameter grids with row-major cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: impl Into<String>, min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self {
            name: name.into(),
            min,
            max,
            count,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidParams(format!(
                "axis {}: need finite min <= max, got {}..{}",
                self.name, self.min, self.max
            )));
        }
        if self.count == 0 {
            return Err(Error::InvalidParams(format!(
                "axis {}: count must be at least 1",
                self.name
            )));
        }
        Ok(())
    }

    /// Node `i`; a single-node axis sits at `min`.
    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

/// Cells indexed `(i, j)` with `i` along `rows` and `j` along `cols`;
/// storage is row-major, `cells[i * cols.count + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid<C> {
    pub rows: Axis,
    pub cols: Axis,
    pub cells: Vec<C>,
}

impl<C> ScanGrid<C> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> &C {
        &self.cells[i * self.cols.count + j]
    }

    /// `(i, j, row value, col value, cell)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64, f64, &C)> + '_ {
        let ncols = self.cols.count;
        self.cells.iter().enumerate().map(move |(k, cell)| {
            let (i, j) = (k / ncols, k % ncols);
            (i, j, self.rows.value(i), self.cols.value(j), cell)
        })
    }

    /// Evaluates `f(row value, col value)` on every node, in parallel, keeping
    /// row-major order regardless of scheduling.
    pub fn fill<F>(rows: Axis, cols: Axis, f: F) -> Self
    where
        C: Send,
        F: Fn(f64, f64) -> C + Sync,
    {
        Self::fill_indexed(rows, cols, |_, r, c| f(r, c))
    }

    /// Like [`ScanGrid::fill`], also passing the row-major cell index.
    pub fn fill_indexed<F>(rows: Axis, cols: Axis, f: F) -> Self
    where
        C: Send,
        F: Fn(usize, f64, f64) -> C + Sync,
    {
        use rayon::prelude::*;
        let ncols = cols.count;
        let cells = (0..rows.count * ncols)
            .into_par_iter()
            .map(|k| f(k, rows.value(k / ncols), cols.value(k % ncols)))
            .collect();
        Self { rows, cols, cells }
    }
}
