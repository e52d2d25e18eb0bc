//! Multiscale odd-odd initial vorticity built from a radial bump.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::lagrangian::VortexDiscretization;

use super::InflationParams;

/// Support radius of the mother bump.
pub const BUMP_RADIUS: f64 = 0.25;

/// `φ(x) = exp(1 - 1/(1 - (4|x|)^2))` on `|x| < 1/4`, zero elsewhere; `φ(0) = 1`.
pub fn mother_bump(x: [f64; 2]) -> f64 {
    let s = 16.0 * (x[0] * x[0] + x[1] * x[1]);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

pub fn mother_bump_gradient(x: [f64; 2]) -> [f64; 2] {
    let s = 16.0 * (x[0] * x[0] + x[1] * x[1]);
    if s >= 1.0 {
        return [0.0, 0.0];
    }
    let u = 1.0 - s;
    let c = -(1.0 - 1.0 / u).exp() * 32.0 / (u * u);
    [c * x[0], c * x[1]]
}

const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];

/// `φ_0(x) = Σ ε1 ε2 φ(x - (ε1, ε2))`, odd in each coordinate.
pub fn quadruple(x: [f64; 2]) -> f64 {
    // Supports are disjoint, so only the quadrant of x contributes.
    let (e1, e2) = (x[0].signum(), x[1].signum());
    e1 * e2 * mother_bump([x[0] - e1, x[1] - e2])
}

pub fn quadruple_gradient(x: [f64; 2]) -> [f64; 2] {
    let (e1, e2) = (x[0].signum(), x[1].signum());
    let g = mother_bump_gradient([x[0] - e1, x[1] - e2]);
    [e1 * e2 * g[0], e1 * e2 * g[1]]
}

/// Centres of the four bumps of scale `k`.
pub fn bump_centers(k: usize) -> [[f64; 2]; 4] {
    let c = 2f64.powi(-(k as i32));
    SIGNS.map(|(e1, e2)| [e1 * c, e2 * c])
}

pub fn bump_radius(k: usize) -> f64 {
    BUMP_RADIUS * 2f64.powi(-(k as i32))
}

/// `2^{(-1 + 2/r) k}`.
pub fn scale_amplitude(params: &InflationParams, k: usize) -> f64 {
    2f64.powf((-1.0 + 2.0 / params.r) * k as f64)
}

/// Scale `k` whose bump support can contain `x`, if any.
fn scale_of(params: &InflationParams, x: [f64; 2]) -> Option<usize> {
    let a = x[0].abs().max(x[1].abs());
    if a == 0.0 {
        return None;
    }
    let k = (-a.log2()).round();
    if k < 0.0 || k > params.n_scales as f64 {
        return None;
    }
    Some(k as usize)
}

/// `ω_0(x) = M^{-2} N^{-1/q} Σ_{k=0}^{N} 2^{(-1+2/r)k} φ_0(2^k x)`.
pub fn omega0(params: &InflationParams, x: [f64; 2]) -> f64 {
    match scale_of(params, x) {
        Some(k) => {
            let s = 2f64.powi(k as i32);
            params.prefactor() * scale_amplitude(params, k) * quadruple([s * x[0], s * x[1]])
        }
        None => 0.0,
    }
}

pub fn omega0_gradient(params: &InflationParams, x: [f64; 2]) -> [f64; 2] {
    match scale_of(params, x) {
        Some(k) => {
            let s = 2f64.powi(k as i32);
            let c = params.prefactor() * scale_amplitude(params, k) * s;
            let g = quadruple_gradient([s * x[0], s * x[1]]);
            [c * g[0], c * g[1]]
        }
        None => [0.0, 0.0],
    }
}

/// Requires at least 8 nodes per finest bump radius.
pub fn check_resolves_finest_scale(params: &InflationParams, grid: &Grid2D) -> Result<()> {
    let r = bump_radius(params.n_scales);
    if r < 8.0 * grid.spacing() {
        return Err(Error::resolution(format!(
            "finest bump radius {r} spans fewer than 8 nodes of spacing {}",
            grid.spacing()
        )));
    }
    if grid.half_width() < 1.0 + BUMP_RADIUS {
        return Err(Error::resolution("grid does not contain the outermost bumps"));
    }
    Ok(())
}

pub fn initial_vorticity(params: &InflationParams, grid: &Grid2D) -> Result<ScalarField2D> {
    params.validate()?;
    check_resolves_finest_scale(params, grid)?;
    ScalarField2D::from_fn(*grid, |x| omega0(params, x))
}

/// Particles on an `m x m` cell-centred lattice over each bump's bounding box. The `(+, +)`
/// bump is sampled and mirrored with signs `ε1 ε2`, so positions are exactly symmetric and
/// the circulations cancel exactly. Blob radius is `delta_factor` times the local spacing.
pub fn seed_initial_vorticity(
    params: &InflationParams,
    seeds_per_bump: usize,
    delta_factor: f64,
) -> Result<VortexDiscretization> {
    params.validate()?;
    if seeds_per_bump < 2 || !(delta_factor > 0.0) {
        return Err(Error::input("need at least 2 seeds per bump and a positive blob factor"));
    }
    let (mut seeds, mut weights, mut deltas) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=params.n_scales {
        let c = 2f64.powi(-(k as i32));
        let rad = bump_radius(k);
        let h = 2.0 * rad / seeds_per_bump as f64;
        let mut quadrant = Vec::new();
        for j in 0..seeds_per_bump {
            for i in 0..seeds_per_bump {
                let p = [c - rad + (i as f64 + 0.5) * h, c - rad + (j as f64 + 0.5) * h];
                let v = omega0(params, p);
                if v.abs() >= 1e-14 * params.prefactor() {
                    quadrant.push((p, v * h * h));
                }
            }
        }
        for (e1, e2) in SIGNS {
            for &(p, w) in &quadrant {
                seeds.push([e1 * p[0], e2 * p[1]]);
                weights.push(e1 * e2 * w);
                deltas.push(delta_factor * h);
            }
        }
    }
    VortexDiscretization::new(seeds, weights, deltas)
}
