use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform periodic-style grid `X_i = -L + i * 2L / n`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
}

impl Grid {
    pub const MIN_POINTS: usize = 256;

    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width {half_width} must be positive"
            )));
        }
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "{n} points; need a power of two >= {}",
                Self::MIN_POINTS
            )));
        }
        Ok(Grid { half_width, n })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Index of the node at X = 0.
    pub fn origin(&self) -> usize {
        self.n / 2
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= -self.half_width && x <= self.half_width
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: vec![0.0; grid.n],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid,
            values: (0..grid.n).map(|i| f(grid.x(i))).collect(),
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a {}-point grid",
                values.len(),
                grid.n
            )));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    /// Larger of the magnitudes at the two ends of the grid.
    pub fn edge_magnitude(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a.abs().max(b.abs()),
            _ => 0.0,
        }
    }

    /// Discrete L2 norm, `sqrt(h sum f_i^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.step() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        Ok(GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Value at an arbitrary point by linear interpolation.
    pub fn at(&self, x: f64) -> Result<f64> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfDomain {
                point: x,
                half_width: self.grid.half_width,
            });
        }
        let h = self.grid.step();
        let s = (x + self.grid.half_width) / h;
        let i = (s.floor() as usize).min(self.len() - 1);
        let w = s - i as f64;
        let next = self.values.get(i + 1).copied().unwrap_or(0.0);
        Ok(self.values[i] * (1.0 - w) + next * w)
    }
}

pub(crate) fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Centred differences inside, one-sided at the ends.
pub(crate) fn derivative_fd(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| match i {
            0 => (v[1] - v[0]) / h,
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / h,
            _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
        })
        .collect()
}
