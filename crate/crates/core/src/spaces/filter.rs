//! Littlewood–Paley multipliers `ψ_l(ξ) = ψ_0(2^{-l} ξ)` on the discrete frequency grid.
//!
//! `ψ_0(ξ) = χ(|ξ|) - χ(2|ξ|)` where `χ` is a smooth radial cutoff equal to 1 on `[0, 1]`
//! and 0 on `[2, ∞)`. The sum over `a ≤ l ≤ b` telescopes to `χ(2^{-b}|ξ|) - χ(2^{1-a}|ξ|)`,
//! which is exactly 1 on the annulus `2^a ≤ |ξ| ≤ 2^b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid2D;

fn flat_exp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth non-increasing cutoff: 1 for `r ≤ 1`, 0 for `r ≥ 2`.
pub fn smooth_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let t = 2.0 - r;
    let a = flat_exp(t);
    let b = flat_exp(1.0 - t);
    a / (a + b)
}

/// Mother multiplier, supported in `1/2 ≤ |ξ| ≤ 2`.
pub fn mother(radius: f64) -> f64 {
    smooth_cutoff(radius) - smooth_cutoff(2.0 * radius)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicFilterBank {
    grid: Grid2D,
    l_min: i32,
    l_max: i32,
    #[serde(skip)]
    radii: Vec<f64>,
}

/// `l_min = -4`; `l_max` is the smallest band whose covered annulus reaches the grid's
/// corner frequency `√2 · nyquist`.
pub fn default_band(grid: &Grid2D) -> (i32, i32) {
    let corner = std::f64::consts::SQRT_2 * grid.nyquist();
    (-4, corner.log2().ceil() as i32)
}

pub fn build_filter_bank(grid: &Grid2D, l_min: i32, l_max: i32) -> Result<DyadicFilterBank> {
    if l_min > l_max {
        return Err(Error::InvalidBand(format!("l_min {l_min} exceeds l_max {l_max}")));
    }
    let corner = std::f64::consts::SQRT_2 * grid.nyquist();
    if 2f64.powi(l_max - 1) >= corner {
        return Err(Error::InvalidBand(format!(
            "band {l_max} starts at |ξ| = {} beyond the largest grid frequency {corner}",
            2f64.powi(l_max - 1)
        )));
    }
    let n = grid.n();
    let radii = (0..grid.len())
        .map(|idx| {
            let xi = grid.frequency_point(idx % n, idx / n);
            xi[0].hypot(xi[1])
        })
        .collect();
    Ok(DyadicFilterBank { grid: *grid, l_min, l_max, radii })
}

impl DyadicFilterBank {
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn l_min(&self) -> i32 {
        self.l_min
    }

    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.l_min..=self.l_max
    }

    /// `ψ_l` at an arbitrary frequency magnitude.
    pub fn psi(l: i32, radius: f64) -> f64 {
        mother(radius * 2f64.powi(-l))
    }

    /// `ψ_l` at FFT bin `idx`.
    pub fn multiplier(&self, l: i32, idx: usize) -> f64 {
        Self::psi(l, self.radii[idx])
    }

    pub fn radius(&self, idx: usize) -> f64 {
        self.radii[idx]
    }

    /// `Σ_l ψ_l` over the bank at bin `idx`.
    pub fn partition_sum(&self, idx: usize) -> f64 {
        let r = self.radii[idx];
        smooth_cutoff(r * 2f64.powi(-self.l_max)) - smooth_cutoff(r * 2f64.powi(1 - self.l_min))
    }

    pub fn covers(&self, radius: f64) -> bool {
        radius >= 2f64.powi(self.l_min) && radius <= 2f64.powi(self.l_max)
    }

    /// Largest `|Σψ_l - 1|` over bins inside `2^{l_min} ≤ |ξ| ≤ 2^{l_max - 1}`, summing the
    /// individual multipliers band by band.
    pub fn partition_residual(&self) -> f64 {
        let lo = 2f64.powi(self.l_min);
        let hi = 2f64.powi(self.l_max - 1);
        (0..self.radii.len())
            .filter(|&idx| self.radii[idx] >= lo && self.radii[idx] <= hi)
            .map(|idx| {
                let s: f64 = self.bands().map(|l| self.multiplier(l, idx)).sum();
                (s - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_shape() {
        assert_eq!(smooth_cutoff(0.3), 1.0);
        assert_eq!(smooth_cutoff(2.5), 0.0);
        assert!((smooth_cutoff(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=1000 {
            let v = smooth_cutoff(1.0 + k as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn mother_support_and_range() {
        for k in 0..4000 {
            let r = k as f64 / 1000.0;
            let v = mother(r);
            assert!((0.0..=1.0).contains(&v));
            if !(0.5..=2.0).contains(&r) {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn band_validation() {
        let g = Grid2D::new(8.0, 256).unwrap();
        assert!(build_filter_bank(&g, 2, 1).is_err());
        let (lo, hi) = default_band(&g);
        assert_eq!((lo, hi), (-4, 4));
        assert!(build_filter_bank(&g, lo, hi).is_ok());
        assert!(build_filter_bank(&g, lo, hi + 1).is_err());
    }

    #[test]
    fn support_and_scaling() {
        let g = Grid2D::new(8.0, 256).unwrap();
        let bank = build_filter_bank(&g, -4, 4).unwrap();
        for idx in 0..g.len() {
            let r = bank.radius(idx);
            for l in bank.bands() {
                let v = bank.multiplier(l, idx);
                let lo = 2f64.powi(l - 1);
                let hi = 2f64.powi(l + 1);
                if r < lo || r > hi {
                    assert_eq!(v, 0.0);
                }
                assert!((v - mother(r / 2f64.powi(l))).abs() < 1e-6);
            }
        }
    }
}
