use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fft::Spectrum;
use crate::grid::ScalarField2D;

use super::{lp_norm, NormDetail, NormReport, Resolution};

/// `D^s = (-Δ)^{s/2}` as the multiplier `|2πξ|^s`.
pub fn fractional_laplacian(field: &ScalarField2D, s: f64) -> Result<ScalarField2D> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::exponent(format!("fractional order must be non-negative, got {s}")));
    }
    if s == 0.0 {
        return Ok(field.clone());
    }
    Spectrum::of(field).filter(|xi| (2.0 * PI * xi[0].hypot(xi[1])).powf(s))
}

/// `‖f‖_p + ‖D^s f‖_p`.
pub fn sobolev_norm(field: &ScalarField2D, s: f64, p: f64) -> Result<NormReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::exponent(format!("Sobolev exponent must satisfy 1 < p < inf, got {p}")));
    }
    let base = lp_norm(field, p)?;
    let top = lp_norm(&fractional_laplacian(field, s)?, p)?;
    Ok(NormReport {
        value: base + top,
        method: format!("sobolev(s={s}, p={p})"),
        resolution: Resolution::from(field.grid()),
        detail: NormDetail::Sum { parts: vec![("lp".into(), base), ("fractional".into(), top)] },
    })
}
