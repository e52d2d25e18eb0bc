use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectrum;
use crate::grid::ScalarField2D;

use super::{check_exponent, lp_norm, DyadicFilterBank, NormDetail, NormReport, Resolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::exponent(format!("Besov regularity must be positive, got {s}")));
        }
        check_exponent(p)?;
        check_exponent(q)?;
        Ok(Self { s, p, q })
    }
}

/// Inhomogeneous `B^s_{p,q}` norm: `‖f‖_p` plus the `ℓ^q` sum of `2^{sl} ‖Δ_l f‖_p` over the
/// bank's bands. Frequencies below `2^{l_min}` are carried by the `L^p` term only; spectral
/// mass above the covered annulus is reported as `uncaptured_fraction`.
pub fn besov_norm(field: &ScalarField2D, params: &BesovParams, bank: &DyadicFilterBank) -> Result<NormReport> {
    if bank.grid() != field.grid() {
        return Err(Error::input("filter bank was built for a different grid"));
    }
    let spectrum = Spectrum::of(field);
    let base = lp_norm(field, params.p)?;

    let mut block_norms = Vec::new();
    for l in bank.bands() {
        let block = spectrum.filter_indexed(|idx| bank.multiplier(l, idx))?;
        block_norms.push(2f64.powf(params.s * l as f64) * lp_norm(&block, params.p)?);
    }
    let homogeneous = if params.q.is_infinite() {
        block_norms.iter().cloned().fold(0.0, f64::max)
    } else {
        block_norms.iter().map(|b| b.powf(params.q)).sum::<f64>().powf(1.0 / params.q)
    };

    let top = 2f64.powi(bank.l_max());
    let (mut total, mut outside) = (0.0, 0.0);
    for (idx, c) in spectrum.coeffs().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if bank.radius(idx) > top {
            outside += e;
        }
    }
    let uncaptured_fraction = if total > 0.0 { outside / total } else { 0.0 };

    Ok(NormReport {
        value: base + homogeneous,
        method: format!("besov(s={}, p={}, q={}) littlewood-paley", params.s, params.p, params.q),
        resolution: Resolution::from(field.grid()),
        detail: NormDetail::Band {
            l_min: bank.l_min(),
            l_max: bank.l_max(),
            block_norms,
            uncaptured_fraction,
            warning: uncaptured_fraction > 0.01,
        },
    })
}
