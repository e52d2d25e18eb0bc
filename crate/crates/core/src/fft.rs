//! Two-dimensional discrete Fourier transforms on a [`Grid2D`].
//!
//! The continuous convention is `f̂(ξ) = ∫ f(x) e^{-2πi⟨x,ξ⟩} dx`; bin `(mi, mj)`
//! corresponds to the frequency returned by [`Grid2D::frequency_point`].

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::grid::{Grid2D, ScalarField2D};

pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        fft.process(data);
        transpose(data, n);
        fft.process(data);
        transpose(data, n);
    }

    /// Unnormalized forward DFT of real samples.
    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse DFT including the `1/n²` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in (j + 1)..n {
            data.swap(j * n + i, i * n + j);
        }
    }
}

/// Spectrum of a field, kept so several multipliers can reuse one forward transform.
pub struct Spectrum {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
    plan: Fft2,
}

impl Spectrum {
    pub fn of(field: &ScalarField2D) -> Self {
        let grid = *field.grid();
        let plan = Fft2::new(grid.n());
        let coeffs = plan.forward_real(field.values());
        Self { grid, coeffs, plan }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Applies a real multiplier given per bin index and returns the real part of the result.
    pub fn filter_indexed(&self, multiplier: impl Fn(usize) -> f64) -> Result<ScalarField2D> {
        let mut data: Vec<Complex64> =
            self.coeffs.iter().enumerate().map(|(idx, c)| c * multiplier(idx)).collect();
        self.plan.inverse(&mut data);
        ScalarField2D::new(self.grid, data.into_iter().map(|c| c.re).collect())
    }

    /// Applies a multiplier `m(ξ)` (complex allowed) and returns the real part.
    pub fn filter_complex(&self, multiplier: impl Fn([f64; 2]) -> Complex64) -> Result<ScalarField2D> {
        let g = self.grid;
        let n = g.n();
        let mut data: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| c * multiplier(g.frequency_point(idx % n, idx / n)))
            .collect();
        self.plan.inverse(&mut data);
        ScalarField2D::new(g, data.into_iter().map(|c| c.re).collect())
    }

    pub fn filter(&self, multiplier: impl Fn([f64; 2]) -> f64) -> Result<ScalarField2D> {
        let g = self.grid;
        let n = g.n();
        self.filter_indexed(|idx| multiplier(g.frequency_point(idx % n, idx / n)))
    }

    /// Approximation of the continuous transform `f̂(ξ)` at each bin: `h²` scaling and the
    /// phase from the grid origin sitting at `(-L, -L)`.
    pub fn continuous(&self) -> Vec<Complex64> {
        let g = self.grid;
        let n = g.n();
        let h2 = g.spacing() * g.spacing();
        let l = g.half_width();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let xi = g.frequency_point(idx % n, idx / n);
                let phase = 2.0 * PI * l * (xi[0] + xi[1]);
                c * Complex64::from_polar(h2, phase)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_identity() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let f = ScalarField2D::from_fn(g, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let back = Spectrum::of(&f).filter(|_| 1.0).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_wave_lands_in_its_bin() {
        let g = Grid2D::new(2.0, 32).unwrap();
        let xi = [3.0 * g.frequency_spacing(), -2.0 * g.frequency_spacing()];
        let f = ScalarField2D::from_fn(g, |x| (2.0 * PI * (xi[0] * x[0] + xi[1] * x[1])).cos()).unwrap();
        let s = Spectrum::of(&f);
        let peak = s.coeffs()[g.index(3, 32 - 2)].norm();
        assert!((peak - 0.5 * 32.0 * 32.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_continuous_transform() {
        // e^{-π|x|²} is its own transform.
        let g = Grid2D::new(4.0, 64).unwrap();
        let f = ScalarField2D::from_fn(g, |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let c = Spectrum::of(&f).continuous();
        for (idx, v) in c.iter().enumerate() {
            let xi = g.frequency_point(idx % 64, idx / 64);
            let exact = (-PI * (xi[0] * xi[0] + xi[1] * xi[1])).exp();
            assert!((v.re - exact).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
    }
}
