//! Uniform square grids on `[-L, L)^2` and the fields sampled on them.
//!
//! Values are stored node-major, row then column: the value at node `(i, j)`
//! (`i` along `x1`, `j` along `x2`) lives at `values[j * n + i]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    half_width: f64,
    n: usize,
}

impl Grid2D {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::input(format!("half width must be positive, got {half_width}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::input(format!("points per side must be a power of two >= 2, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Coordinate of node index `i` along either axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn point(&self, i: usize, j: usize) -> [f64; 2] {
        [self.coord(i), self.coord(j)]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Node `(i, j)` for a flat index.
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    /// Spacing of the discrete frequency lattice, `1 / (2L)`.
    pub fn frequency_spacing(&self) -> f64 {
        1.0 / (2.0 * self.half_width)
    }

    /// Largest frequency magnitude along one axis, `1 / (2h)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing()
    }

    /// Signed frequency of FFT bin `m`.
    pub fn frequency(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 { m as isize } else { m as isize - self.n as isize };
        signed as f64 * self.frequency_spacing()
    }

    pub fn frequency_point(&self, mi: usize, mj: usize) -> [f64; 2] {
        [self.frequency(mi), self.frequency(mj)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::input(format!(
                "expected {} values for an {}x{} grid, got {}",
                grid.len(),
                grid.n(),
                grid.n(),
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite value at flat index {pos}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid2D, f: impl Fn([f64; 2]) -> f64 + Sync) -> Result<Self> {
        use rayon::prelude::*;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = grid.node(idx);
                f(grid.point(i, j))
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Self::new(self.grid, self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect())
    }

    /// Cyclic translation by `(di, dj)` nodes.
    pub fn roll(&self, di: usize, dj: usize) -> Self {
        let n = self.grid.n();
        let mut values = vec![0.0; self.values.len()];
        for j in 0..n {
            for i in 0..n {
                values[self.grid.index((i + di) % n, (j + dj) % n)] = self.at(i, j);
            }
        }
        Self { grid: self.grid, values }
    }

    /// Centered second-order differences, one-sided second-order on the boundary frame.
    pub fn partial(&self, axis: usize) -> Self {
        let n = self.grid.n();
        let h = self.grid.spacing();
        let mut values = vec![0.0; self.values.len()];
        let get = |a: usize, other: usize| {
            if axis == 0 {
                self.at(a, other)
            } else {
                self.at(other, a)
            }
        };
        for other in 0..n {
            for a in 0..n {
                let d = if a == 0 {
                    (-3.0 * get(0, other) + 4.0 * get(1, other) - get(2, other)) / (2.0 * h)
                } else if a == n - 1 {
                    (3.0 * get(n - 1, other) - 4.0 * get(n - 2, other) + get(n - 3, other)) / (2.0 * h)
                } else {
                    (get(a + 1, other) - get(a - 1, other)) / (2.0 * h)
                };
                let idx = if axis == 0 { self.grid.index(a, other) } else { self.grid.index(other, a) };
                values[idx] = d;
            }
        }
        Self { grid: self.grid, values }
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::input("fields live on different grids"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField2D {
    components: [ScalarField2D; 2],
}

impl VectorField2D {
    pub fn new(first: ScalarField2D, second: ScalarField2D) -> Result<Self> {
        first.check_same_grid(&second)?;
        Ok(Self { components: [first, second] })
    }

    pub fn grid(&self) -> &Grid2D {
        self.components[0].grid()
    }

    pub fn component(&self, c: usize) -> &ScalarField2D {
        &self.components[c]
    }

    pub fn components(&self) -> &[ScalarField2D; 2] {
        &self.components
    }

    /// `∂1 u2 − ∂2 u1` by centered differences.
    pub fn curl(&self) -> Result<ScalarField2D> {
        self.components[1].partial(0).sub(&self.components[0].partial(1))
    }

    pub fn divergence(&self) -> Result<ScalarField2D> {
        self.components[0].partial(0).add(&self.components[1].partial(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(Grid2D::new(1.0, 100).is_err());
        assert!(Grid2D::new(0.0, 64).is_err());
    }

    #[test]
    fn coordinates_and_frequencies() {
        let g = Grid2D::new(8.0, 256).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.coord(0), -8.0);
        assert_eq!(g.coord(128), 0.0);
        assert_eq!(g.frequency(1), 1.0 / 16.0);
        assert_eq!(g.frequency(255), -1.0 / 16.0);
        assert_eq!(g.frequency(128), -8.0);
        assert_eq!(g.nyquist(), 8.0);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid2D::new(1.0, 4).unwrap();
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(ScalarField2D::new(g, v).is_err());
    }

    #[test]
    fn partial_is_exact_on_quadratics() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let f = ScalarField2D::from_fn(g, |x| x[0] * x[0] + 3.0 * x[1]).unwrap();
        let d1 = f.partial(0);
        let d2 = f.partial(1);
        for j in 0..16 {
            for i in 0..16 {
                let x = g.point(i, j);
                assert!((d1.at(i, j) - 2.0 * x[0]).abs() < 1e-12);
                assert!((d2.at(i, j) - 3.0).abs() < 1e-12);
            }
        }
    }
}
