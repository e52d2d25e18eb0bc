//! Norm scans for the initial vorticity family and for the perturbation.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectrum;
use crate::grid::{Grid2D, ScalarField2D};
use crate::spaces::{besov_norm, build_filter_bank, default_band, lp_norm, BesovParams};

use super::bump::{quadruple, quadruple_gradient};
use super::{initial_vorticity, omega0_gradient, InflationParams, Perturbation};

/// Least-squares slope and prefactor of `log y` against `log x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("power-law fit needs at least two paired samples"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::input("power-law fit needs positive samples"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// Dyadic block profile of the quadruple `φ_0`: `G_j = 2^j ||Δ_j φ_0||_r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleProfile {
    pub r: f64,
    pub l_min: i32,
    pub blocks: Vec<f64>,
    pub lr_norm: f64,
    pub gradient_norm: f64,
}

impl QuadrupleProfile {
    /// Computed on `[-4, 4)^2` with spacing `1/128`.
    pub fn new(r: f64) -> Result<Self> {
        let grid = Grid2D::new(4.0, 1024)?;
        let field = ScalarField2D::from_fn(grid, quadruple)?;
        let grad = ScalarField2D::from_fn(grid, |x| {
            let g = quadruple_gradient(x);
            g[0].hypot(g[1])
        })?;
        let (l_min, l_max) = default_band(&grid);
        let bank = build_filter_bank(&grid, l_min, l_max)?;
        let spectrum = Spectrum::of(&field);
        let blocks = bank
            .bands()
            .map(|l| Ok(2f64.powi(l) * lp_norm(&spectrum.filter_indexed(|idx| bank.multiplier(l, idx))?, r)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r, l_min, blocks, lr_norm: lp_norm(&field, r)?, gradient_norm: lp_norm(&grad, r)? })
    }

    fn block(&self, j: i32) -> f64 {
        let i = j - self.l_min;
        if i < 0 || i as usize >= self.blocks.len() {
            0.0
        } else {
            self.blocks[i as usize]
        }
    }
}

/// Norms of `ω_0` for one `(M, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VorticityNorms {
    pub n_scales: usize,
    pub lr: f64,
    pub gradient_lr: f64,
    pub w1r: f64,
    pub besov: f64,
}

/// Norms of `ω_0` from the block profile of `φ_0`. The scales of `ω_0` have disjoint
/// supports, so `||Δ_l ω_0||_r^r ≈ Σ_k ||Δ_l (scale k)||_r^r`, and the dilation identity
/// `Δ_l[f(2^k ·)] = (Δ_{l-k} f)(2^k ·)` turns every block into a rescaled block of `φ_0`.
/// The `L^r` and gradient terms are exact.
pub fn multiscale_norms(params: &InflationParams, profile: &QuadrupleProfile, q: f64) -> VorticityNorms {
    let r = profile.r;
    let a = params.prefactor();
    let n = params.n_scales as i32;
    let decay: f64 = (0..=n).map(|k| 2f64.powf(-r * k as f64)).sum();
    let lr = a * decay.powf(1.0 / r) * profile.lr_norm;
    let gradient_lr = a * ((n + 1) as f64).powf(1.0 / r) * profile.gradient_norm;
    let l_hi = profile.l_min + profile.blocks.len() as i32 - 1 + n;
    let mut sum = 0.0;
    for l in -4..=l_hi {
        let inner: f64 = (0..=n).map(|k| profile.block(l - k).powf(r)).sum();
        sum += inner.powf(q / r);
    }
    VorticityNorms {
        n_scales: params.n_scales,
        lr,
        gradient_lr,
        w1r: lr + gradient_lr,
        besov: lr + a * sum.powf(1.0 / q),
    }
}

/// Same norms computed directly on a grid resolving the finest scale with 16 nodes per radius.
pub fn direct_norms(params: &InflationParams) -> Result<VorticityNorms> {
    let n = 1usize << (params.n_scales + 7);
    if n > 4096 {
        return Err(Error::resolution("direct evaluation limited to N <= 5"));
    }
    let grid = Grid2D::new(2.0, n)?;
    let field = initial_vorticity(params, &grid)?;
    let grad = ScalarField2D::from_fn(grid, |x| {
        let g = omega0_gradient(params, x);
        g[0].hypot(g[1])
    })?;
    let (_, l_max) = default_band(&grid);
    let bank = build_filter_bank(&grid, -4, l_max)?;
    let besov = besov_norm(&field, &BesovParams::new(1.0, params.r, params.q)?, &bank)?.value;
    let lr = lp_norm(&field, params.r)?;
    let gradient_lr = lp_norm(&grad, params.r)?;
    Ok(VorticityNorms { n_scales: params.n_scales, lr, gradient_lr, w1r: lr + gradient_lr, besov })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Scan {
    pub m: f64,
    pub r: f64,
    pub q: f64,
    pub rows: Vec<VorticityNorms>,
    /// `max/min` of each norm over the scan.
    pub w1r_spread: f64,
    pub besov_spread: f64,
    /// Besov norm at `M` divided by the norm at `2M` for the largest `N`.
    pub m_doubling_ratio: f64,
}

fn spread(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::MIN, f64::max);
    let min = values.fold(f64::MAX, f64::min);
    max / min
}

pub fn lemma51_scan(m: f64, r: f64, q: f64, scales: &[usize]) -> Result<Lemma51Scan> {
    if scales.is_empty() {
        return Err(Error::input("empty scale list"));
    }
    if q > r {
        return Err(Error::exponent(format!("the scan requires q <= r, got q = {q}, r = {r}")));
    }
    let profile = QuadrupleProfile::new(r)?;
    let base = InflationParams { m, r, q, ..InflationParams::default() };
    base.validate()?;
    let rows: Vec<VorticityNorms> = scales
        .iter()
        .map(|&n| multiscale_norms(&InflationParams { n_scales: n, ..base }, &profile, q))
        .collect();
    let last = InflationParams { n_scales: *scales.last().unwrap(), ..base };
    let doubled = InflationParams { m: 2.0 * m, ..last };
    let m_doubling_ratio = multiscale_norms(&last, &profile, q).besov / multiscale_norms(&doubled, &profile, q).besov;
    Ok(Lemma51Scan {
        m,
        r,
        q,
        w1r_spread: spread(rows.iter().map(|v| v.w1r)),
        besov_spread: spread(rows.iter().map(|v| v.besov)),
        rows,
        m_doubling_ratio,
    })
}

/// The three perturbation norms and their predicted sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationNorms {
    pub k: f64,
    pub lambda: f64,
    /// `||β||_{B^1_{r,q}}`, predicted `k^{1/2} λ^{-1}`.
    pub besov: f64,
    /// `||D^{1+σ} ∂_1 Δ^{-1} β||_p`, predicted `k^{-1/2} λ^{-1+2/r-2/p} (λ^σ + k^σ)`.
    pub smoothed: f64,
    /// `||∂_1 Δ^{-1} β||_p`, predicted `k^{-1/2} λ^{-2+2/r-2/p}`.
    pub potential: f64,
    pub predicted_besov: f64,
    pub predicted_smoothed: f64,
    pub predicted_potential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationScanParams {
    pub r: f64,
    pub q: f64,
    pub p: f64,
    pub sigma: f64,
    pub grid_n: usize,
    /// Frequencies `k/(2π)` of the `k` series.
    pub frequencies: Vec<f64>,
    pub k_series_lambda: f64,
    pub lambdas: Vec<f64>,
    /// Frequency `k/(2π)` of the `λ` series.
    pub lambda_series_frequency: f64,
}

impl Default for PerturbationScanParams {
    fn default() -> Self {
        // Three samples per octave: the dyadic blocks make the norms log-periodic in k, and
        // whole octaves keep that ripple out of the fitted slope.
        Self {
            r: 2.05,
            q: 1.5,
            p: 2.0,
            sigma: 0.1,
            grid_n: 2048,
            frequencies: (0..=9).map(|j| 8.0 * 2f64.powf(j as f64 / 3.0)).collect(),
            k_series_lambda: 1.0,
            lambdas: (0..=6).map(|j| 0.5 * 2f64.powf(j as f64 / 3.0)).collect(),
            lambda_series_frequency: 32.0,
        }
    }
}

/// Norms of `β` with `x* = (3/λ, 3/λ)` on `[-6/λ, 6/λ)^2`.
pub fn perturbation_norms(k: f64, lambda: f64, s: &PerturbationScanParams) -> Result<PerturbationNorms> {
    let x = 3.0 / lambda;
    let beta = Perturbation::new(lambda, k, s.r, [x, x])?;
    let grid = Grid2D::new(6.0 / lambda, s.grid_n)?;
    let field = super::perturbation_beta(&beta, &grid)?;
    let (_, l_max) = default_band(&grid);
    let bank = build_filter_bank(&grid, -4, l_max)?;
    let besov = besov_norm(&field, &BesovParams::new(1.0, s.r, s.q)?, &bank)?.value;
    let spectrum = Spectrum::of(&field);
    // ∂_1 Δ^{-1} has symbol -i ξ1 / (2π |ξ|^2).
    let potential_symbol = |xi: [f64; 2]| {
        let r2 = xi[0] * xi[0] + xi[1] * xi[1];
        if r2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi[0] / (2.0 * PI * r2))
        }
    };
    let potential = lp_norm(&spectrum.filter_complex(potential_symbol)?, s.p)?;
    let smoothed = lp_norm(
        &spectrum.filter_complex(|xi| potential_symbol(xi) * (2.0 * PI * xi[0].hypot(xi[1])).powf(1.0 + s.sigma))?,
        s.p,
    )?;
    let e = -1.0 + 2.0 / s.r - 2.0 / s.p;
    Ok(PerturbationNorms {
        k,
        lambda,
        besov,
        smoothed,
        potential,
        predicted_besov: k.sqrt() / lambda,
        predicted_smoothed: k.powf(-0.5) * lambda.powf(e) * (lambda.powf(s.sigma) + k.powf(s.sigma)),
        predicted_potential: k.powf(-0.5) * lambda.powf(e - 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma53Scan {
    pub params: PerturbationScanParams,
    /// Fixed `λ`, varying `k`.
    pub k_series: Vec<PerturbationNorms>,
    /// Fixed `k`, varying `λ`.
    pub lambda_series: Vec<PerturbationNorms>,
    pub besov_k_exponent: f64,
    pub besov_lambda_exponent: f64,
    pub potential_k_exponent: f64,
    /// Measured and predicted ratios of the smoothed norm when `λ` doubles at fixed `k`.
    pub smoothed_doubling: (f64, f64),
}

pub fn lemma53_scan(s: &PerturbationScanParams) -> Result<Lemma53Scan> {
    if s.frequencies.len() < 2 || s.lambdas.len() < 2 {
        return Err(Error::input("each scan series needs at least two samples"));
    }
    let k_series = s
        .frequencies
        .iter()
        .map(|f| perturbation_norms(2.0 * PI * f, s.k_series_lambda, s))
        .collect::<Result<Vec<_>>>()?;
    let k_fixed = 2.0 * PI * s.lambda_series_frequency;
    let lambda_series = s.lambdas.iter().map(|&l| perturbation_norms(k_fixed, l, s)).collect::<Result<Vec<_>>>()?;
    let ks: Vec<f64> = k_series.iter().map(|v| v.k).collect();
    let ls: Vec<f64> = lambda_series.iter().map(|v| v.lambda).collect();
    let (besov_k_exponent, _) = fit_power_law(&ks, &k_series.iter().map(|v| v.besov).collect::<Vec<_>>())?;
    let (potential_k_exponent, _) = fit_power_law(&ks, &k_series.iter().map(|v| v.potential).collect::<Vec<_>>())?;
    let (besov_lambda_exponent, _) =
        fit_power_law(&ls, &lambda_series.iter().map(|v| v.besov).collect::<Vec<_>>())?;
    let l0 = s.lambdas[0];
    let a = perturbation_norms(k_fixed, l0, s)?;
    let b = perturbation_norms(k_fixed, 2.0 * l0, s)?;
    Ok(Lemma53Scan {
        params: s.clone(),
        k_series,
        lambda_series,
        besov_k_exponent,
        besov_lambda_exponent,
        potential_k_exponent,
        smoothed_doubling: (b.smoothed / a.smoothed, b.predicted_smoothed / a.predicted_smoothed),
    })
}

/// `||∇^⊥ Δ^{-1} β||_{W^{1+σ,p}}` against the perturbation index `n`, with `λ = 3n`, `k = λ^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocitySmallness {
    pub ns: Vec<usize>,
    pub norms: Vec<f64>,
    pub exponent: f64,
    /// `2(-1 + 1/r - 1/p + σ)`.
    pub predicted_exponent: f64,
}

pub fn velocity_smallness(ns: &[usize], s: &PerturbationScanParams) -> Result<VelocitySmallness> {
    let norms = ns
        .iter()
        .map(|&n| {
            let lambda = 3.0 * n as f64;
            let x = 3.0 / lambda;
            let beta = Perturbation::new(lambda, lambda * lambda, s.r, [x, x])?;
            let grid = Grid2D::new(6.0 / lambda, s.grid_n)?;
            let spectrum = Spectrum::of(&super::perturbation_beta(&beta, &grid)?);
            // ∇^⊥ Δ^{-1} has symbol (i ξ2, -i ξ1) / (2π |ξ|^2).
            let mut total = 0.0;
            for c in 0..2 {
                let symbol = |xi: [f64; 2]| {
                    let r2 = xi[0] * xi[0] + xi[1] * xi[1];
                    if r2 == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let v = if c == 0 { xi[1] } else { -xi[0] };
                    Complex64::new(0.0, v / (2.0 * PI * r2))
                };
                total += lp_norm(&spectrum.filter_complex(symbol)?, s.p)?;
                total += lp_norm(
                    &spectrum.filter_complex(|xi| symbol(xi) * (2.0 * PI * xi[0].hypot(xi[1])).powf(1.0 + s.sigma))?,
                    s.p,
                )?;
            }
            Ok(total)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (exponent, _) = fit_power_law(&xs, &norms)?;
    Ok(VelocitySmallness {
        ns: ns.to_vec(),
        norms,
        exponent,
        predicted_exponent: 2.0 * (-1.0 + 1.0 / s.r - 1.0 / s.p + s.sigma),
    })
}
