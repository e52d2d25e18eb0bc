//! High-frequency localized perturbation `β` and its closed-form Fourier transform.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::quad::GaussLegendre;

/// Radius beyond which `χ` is treated as zero (it is below `1e-10` there).
pub const CHI_CUTOFF: f64 = 60.0;
const CHI_STEP: f64 = 0.002;
const CHI_NODES: usize = 400;

fn flat_bump(s2: f64) -> f64 {
    if s2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s2)).exp()
    }
}

fn chi_hat_normalization() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| {
        let gl = GaussLegendre::new(200);
        1.0 / (2.0 * PI * gl.integrate(0.0, 1.0, |s| flat_bump(s * s) * s))
    })
}

/// `χ̂(ξ) = c exp(-1/(1 - |ξ|^2))` on the unit disc, normalized so `χ(0) = 1`.
pub fn chi_hat(xi: [f64; 2]) -> f64 {
    chi_hat_normalization() * flat_bump(xi[0] * xi[0] + xi[1] * xi[1])
}

struct ChiTable {
    value: Vec<f64>,
    slope: Vec<f64>,
}

fn chi_table() -> &'static ChiTable {
    static TABLE: OnceLock<ChiTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let gl = GaussLegendre::new(CHI_NODES);
        let c = chi_hat_normalization();
        let samples: Vec<(f64, f64)> = gl.nodes().iter().zip(gl.weights()).map(|(&t, &w)| {
            // Nodes mapped from [-1, 1] to [0, 1].
            let s = 0.5 * (t + 1.0);
            (s, 0.5 * w * c * flat_bump(s * s))
        }).collect();
        let count = (CHI_CUTOFF / CHI_STEP).round() as usize + 3;
        let pairs: Vec<(f64, f64)> = (0..count)
            .into_par_iter()
            .map(|i| {
                let r = i as f64 * CHI_STEP;
                let (mut v, mut d) = (0.0, 0.0);
                for &(s, w) in &samples {
                    let a = 2.0 * PI * r * s;
                    v += w * libm::j0(a) * s;
                    d -= w * libm::j1(a) * s * s;
                }
                (2.0 * PI * v, 4.0 * PI * PI * d)
            })
            .collect();
        ChiTable { value: pairs.iter().map(|p| p.0).collect(), slope: pairs.iter().map(|p| p.1).collect() }
    })
}

fn cubic_lookup(table: &[f64], r: f64) -> f64 {
    let t = r / CHI_STEP;
    let i = (t.floor() as usize).clamp(1, table.len() - 3);
    let u = t - i as f64;
    let (a, b, c, d) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
    // Four-point Lagrange through nodes -1, 0, 1, 2.
    -u * (u - 1.0) * (u - 2.0) / 6.0 * a + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * b
        - (u + 1.0) * u * (u - 2.0) / 2.0 * c
        + (u + 1.0) * u * (u - 1.0) / 6.0 * d
}

/// Radial profile `χ(|x|)` of the inverse transform of `χ̂`.
pub fn chi(r: f64) -> f64 {
    if r >= CHI_CUTOFF {
        0.0
    } else {
        cubic_lookup(&chi_table().value, r)
    }
}

/// `dχ/dr`.
pub fn chi_slope(r: f64) -> f64 {
    if r >= CHI_CUTOFF {
        0.0
    } else {
        cubic_lookup(&chi_table().slope, r)
    }
}

const XI0: f64 = 2.0;

/// `ρ(x) = 2 cos(4π x1) χ(|x|)`, whose transform `χ̂(ξ - ξ0) + χ̂(ξ + ξ0)` with `ξ0 = (2, 0)`
/// vanishes near the origin.
pub fn rho(x: [f64; 2]) -> f64 {
    2.0 * (2.0 * PI * XI0 * x[0]).cos() * chi(x[0].hypot(x[1]))
}

pub fn rho_gradient(x: [f64; 2]) -> [f64; 2] {
    let r = x[0].hypot(x[1]);
    let (s, c) = (2.0 * PI * XI0 * x[0]).sin_cos();
    let radial = if r > 0.0 { 2.0 * c * chi_slope(r) / r } else { 0.0 };
    [-4.0 * PI * XI0 * s * chi(r) + radial * x[0], radial * x[1]]
}

pub fn rho_hat(xi: [f64; 2]) -> f64 {
    chi_hat([xi[0] - XI0, xi[1]]) + chi_hat([xi[0] + XI0, xi[1]])
}

/// Largest `|ξ|` in the support of `ρ̂`.
pub const RHO_BANDWIDTH: f64 = XI0 + 1.0;

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];

/// `β(x) = λ^{-1+2/r} k^{-1/2} Σ_ε ε1 ε2 ρ(λ(x - x*_ε)) sin(k x1)` with `x*_ε = (ε1 x*_1, ε2 x*_2)`.
/// Even in `x1` and odd in `x2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub lambda: f64,
    pub k: f64,
    pub r: f64,
    pub x_star: [f64; 2],
}

impl Perturbation {
    pub fn new(lambda: f64, k: f64, r: f64, x_star: [f64; 2]) -> Result<Self> {
        if !(lambda > 0.0 && k > 0.0 && r > 1.0 && r.is_finite()) {
            return Err(Error::input("perturbation needs lambda > 0, k > 0 and 1 < r < inf"));
        }
        if !(x_star[0] > 0.0 && x_star[1] > 0.0) {
            return Err(Error::input("x* must lie in the open first quadrant"));
        }
        Ok(Self { lambda, k, r, x_star })
    }

    /// Standard choice `λ = 3n`, `k = λ^2`.
    pub fn for_index(n: usize, r: f64, x_star: [f64; 2]) -> Result<Self> {
        let lambda = 3.0 * n as f64;
        Self::new(lambda, lambda * lambda, r, x_star)
    }

    pub fn amplitude(&self) -> f64 {
        self.lambda.powf(-1.0 + 2.0 / self.r) / self.k.sqrt()
    }

    /// Largest frequency magnitude carried by `β`.
    pub fn bandwidth(&self) -> f64 {
        self.k / (2.0 * PI) + RHO_BANDWIDTH * self.lambda
    }

    fn centre(&self, e1: f64, e2: f64) -> [f64; 2] {
        [e1 * self.x_star[0], e2 * self.x_star[1]]
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let mut sum = 0.0;
        for (e1, e2) in SIGNS {
            let c = self.centre(e1, e2);
            let z = [self.lambda * (x[0] - c[0]), self.lambda * (x[1] - c[1])];
            if z[0].hypot(z[1]) < CHI_CUTOFF {
                sum += e1 * e2 * rho(z);
            }
        }
        self.amplitude() * sum * (self.k * x[0]).sin()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let (s, c) = (self.k * x[0]).sin_cos();
        let mut g = [0.0, 0.0];
        for (e1, e2) in SIGNS {
            let ctr = self.centre(e1, e2);
            let z = [self.lambda * (x[0] - ctr[0]), self.lambda * (x[1] - ctr[1])];
            if z[0].hypot(z[1]) >= CHI_CUTOFF {
                continue;
            }
            let sign = e1 * e2;
            let dr = rho_gradient(z);
            g[0] += sign * (self.lambda * dr[0] * s + rho(z) * self.k * c);
            g[1] += sign * self.lambda * dr[1] * s;
        }
        let a = self.amplitude();
        [a * g[0], a * g[1]]
    }

    /// `β̂(ξ) = (2i)^{-1} k^{-1/2} λ^{-3+2/r} Σ_ε Σ_{m=1,2} (-1)^{m+1} ε1 ε2 ρ̂(ξ_m/λ) e^{-2πi<x*_ε, ξ_m>}`
    /// with `ξ_m = (ξ1 + (-1)^m k/(2π), ξ2)`.
    pub fn hat(&self, xi: [f64; 2]) -> Complex64 {
        let kappa = self.k / (2.0 * PI);
        let mut sum = Complex64::new(0.0, 0.0);
        for (m, sm) in [(1, -1.0), (2, 1.0)] {
            let xm = [xi[0] + sm * kappa, xi[1]];
            let amp = rho_hat([xm[0] / self.lambda, xm[1] / self.lambda]);
            if amp == 0.0 {
                continue;
            }
            let sign_m = if m == 1 { 1.0 } else { -1.0 };
            for (e1, e2) in SIGNS {
                let c = self.centre(e1, e2);
                let phase = -2.0 * PI * (c[0] * xm[0] + c[1] * xm[1]);
                sum += Complex64::from_polar(sign_m * e1 * e2 * amp, phase);
            }
        }
        let pre = self.k.powf(-0.5) * self.lambda.powf(-3.0 + 2.0 / self.r);
        sum * Complex64::new(0.0, -0.5 * pre)
    }
}

/// Samples `β` on `grid`. The full band of `β̂` must lie below the grid's Nyquist frequency.
pub fn perturbation_beta(beta: &Perturbation, grid: &Grid2D) -> Result<ScalarField2D> {
    if beta.bandwidth() >= grid.nyquist() {
        return Err(Error::resolution(format!(
            "perturbation band reaches |ξ| = {:.1}, above the grid Nyquist frequency {:.1}",
            beta.bandwidth(),
            grid.nyquist()
        )));
    }
    let values = (0..grid.len()).into_par_iter().map(|idx| beta.value(grid.point(idx % grid.n(), idx / grid.n()))).collect();
    ScalarField2D::new(*grid, values)
}
