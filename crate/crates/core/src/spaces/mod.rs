//! Norm estimators: sup, `L^p`, Hölder and little-Hölder moduli, Besov norms through a
//! Littlewood–Paley filter bank, and fractional Sobolev norms.

mod besov;
mod filter;
mod holder;
mod norms;
mod sobolev;

use serde::{Deserialize, Serialize};

use crate::grid::Grid2D;

pub use besov::{besov_norm, BesovParams};
pub use filter::{build_filter_bank, default_band, smooth_cutoff, DyadicFilterBank};
pub use holder::{
    holder_norm_c1alpha, holder_seminorm, little_holder_modulus, LittleHolderProfile, PairBin,
    PairSampling,
};
pub use norms::{lp_norm, sup_norm};
pub use sobolev::{fractional_laplacian, sobolev_norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub half_width: f64,
    pub n: usize,
    pub spacing: f64,
}

impl From<&Grid2D> for Resolution {
    fn from(g: &Grid2D) -> Self {
        Self { half_width: g.half_width(), n: g.n(), spacing: g.spacing() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormDetail {
    None,
    Pairs {
        bins: Vec<PairBin>,
        extra_pairs: usize,
    },
    Band {
        l_min: i32,
        l_max: i32,
        block_norms: Vec<f64>,
        uncaptured_fraction: f64,
        warning: bool,
    },
    Sum {
        parts: Vec<(String, f64)>,
    },
}

/// A measured norm together with how it was measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub method: String,
    pub resolution: Resolution,
    pub detail: NormDetail,
}

impl NormReport {
    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) fn check_exponent(p: f64) -> crate::error::Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(crate::error::Error::exponent(format!("need 1 <= p <= inf, got {p}")));
    }
    Ok(())
}

pub(crate) fn check_alpha(alpha: f64) -> crate::error::Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(crate::error::Error::exponent(format!("Hölder exponent must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}
