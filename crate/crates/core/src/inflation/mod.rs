//! Norm inflation experiment: multiscale initial vorticity, its localized perturbation,
//! and the diagnostics that compare perturbed and unperturbed Lagrangian runs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod beta;
pub mod bump;
pub mod experiment;
pub mod scans;

pub use experiment::{
    axis_tracers, run_deformation, run_inflation, select_x_star, stretching_scan, DeformationRun, DeformationSample, InflationReport,
    SolverSettings, StretchingScan,
};
pub use beta::{chi, chi_hat, perturbation_beta, rho, rho_hat, Perturbation};
pub use scans::{
    fit_power_law, lemma51_scan, lemma53_scan, velocity_smallness, Lemma51Scan, Lemma53Scan, PerturbationScanParams,
    VelocitySmallness,
};
pub use bump::{
    bump_centers, bump_radius, initial_vorticity, mother_bump, omega0, omega0_gradient, quadruple, scale_amplitude,
    seed_initial_vorticity,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InflationParams {
    /// Amplitude parameter `M`; the vorticity carries `M^{-2}` and the default horizon is `M^{-3}`.
    pub m: f64,
    /// Finest scale index `N`.
    pub n_scales: usize,
    pub r: f64,
    pub q: f64,
    /// Perturbation index `n`, with `λ = 3n` and `k = λ^2`.
    pub n: usize,
    pub horizon: Option<f64>,
}

impl Default for InflationParams {
    fn default() -> Self {
        Self { m: 10.0, n_scales: 8, r: 2.05, q: 2.05, n: 8, horizon: None }
    }
}

impl InflationParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(Error::input("M must be positive"));
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(Error::exponent(format!("r = {} must satisfy 1 < r < inf", self.r)));
        }
        if !(self.q > 1.0 && self.q.is_finite()) {
            return Err(Error::exponent(format!("q = {} must satisfy 1 < q < inf", self.q)));
        }
        if self.n_scales > 40 {
            return Err(Error::input("more than 40 scales exceeds double precision geometry"));
        }
        if self.n == 0 {
            return Err(Error::input("perturbation index n must be at least 1"));
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::input("horizon must be positive"));
            }
        }
        Ok(())
    }

    /// `M^{-2} N^{-1/q}`, with the `N` factor dropped for `N = 0`.
    pub fn prefactor(&self) -> f64 {
        let scales = if self.n_scales == 0 { 1.0 } else { (self.n_scales as f64).powf(-1.0 / self.q) };
        self.m.powi(-2) * scales
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or_else(|| self.m.powi(-3))
    }

    pub fn lambda(&self) -> f64 {
        3.0 * self.n as f64
    }

    pub fn k(&self) -> f64 {
        self.lambda() * self.lambda()
    }
}
