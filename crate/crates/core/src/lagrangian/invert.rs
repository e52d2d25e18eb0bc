//! Flow-map interpolation from a tracer lattice, inversion by Newton iteration, and
//! composition of grid fields with sampled maps.

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D, VectorField2D};

use super::{Bicubic, Lattice, Mat2, VortexState};

/// Interpolated forward map `η` built from the displacement `η - e` at lattice tracers.
#[derive(Debug, Clone)]
pub struct LatticeMap {
    lattice: Lattice,
    disp: [Vec<f64>; 2],
}

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-8;

impl LatticeMap {
    pub fn new(state: &VortexState) -> Result<Self> {
        let lattice = state.disc.lattice.ok_or_else(|| Error::input("state carries no tracer lattice"))?;
        let mut disp = [Vec::with_capacity(lattice.len()), Vec::with_capacity(lattice.len())];
        for j in 0..lattice.nj {
            for i in 0..lattice.ni {
                let k = lattice.particle(i, j);
                for (c, d) in disp.iter_mut().enumerate() {
                    d.push(state.positions[k][c] - state.disc.seeds[k][c]);
                }
            }
        }
        Ok(Self { lattice, disp })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    fn interpolant(&self, c: usize) -> Bicubic<'_> {
        let l = &self.lattice;
        Bicubic::new(l.origin, l.spacing, l.ni, l.nj, &self.disp[c])
    }

    /// `η(x)` and its interpolated Jacobian, `None` outside the lattice.
    pub fn forward(&self, x: [f64; 2]) -> Option<([f64; 2], Mat2)> {
        let (d1, g1) = self.interpolant(0).eval_with_gradient(x)?;
        let (d2, g2) = self.interpolant(1).eval_with_gradient(x)?;
        Some(([x[0] + d1, x[1] + d2], [[1.0 + g1[0], g1[1]], [g2[0], 1.0 + g2[1]]]))
    }

    /// Solves `η(x) = y`, starting from `y - (η - e)(y)`.
    pub fn invert(&self, y: [f64; 2]) -> Option<[f64; 2]> {
        let start = match self.forward(y) {
            Some((eta, _)) => [2.0 * y[0] - eta[0], 2.0 * y[1] - eta[1]],
            None => self.nearest_preimage(y),
        };
        self.newton(y, start).or_else(|| self.newton(y, self.nearest_preimage(y)))
    }

    fn newton(&self, y: [f64; 2], start: [f64; 2]) -> Option<[f64; 2]> {
        let scale = 1e-13 * (1.0 + y[0].abs() + y[1].abs());
        let mut x = start;
        for _ in 0..NEWTON_MAX_ITER {
            let (eta, jac) = self.forward(x)?;
            let r = [eta[0] - y[0], eta[1] - y[1]];
            let rn = r[0].hypot(r[1]);
            if rn <= scale {
                return Some(x);
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if det == 0.0 {
                return None;
            }
            let dx = [(jac[1][1] * r[0] - jac[0][1] * r[1]) / det, (-jac[1][0] * r[0] + jac[0][0] * r[1]) / det];
            x = [x[0] - dx[0], x[1] - dx[1]];
            if dx[0].hypot(dx[1]) <= scale {
                let (eta, _) = self.forward(x)?;
                return ((eta[0] - y[0]).hypot(eta[1] - y[1]) < NEWTON_TOL).then_some(x);
            }
        }
        let (eta, _) = self.forward(x)?;
        ((eta[0] - y[0]).hypot(eta[1] - y[1]) < NEWTON_TOL).then_some(x)
    }

    /// Lattice seed whose forward image is closest to `y`.
    fn nearest_preimage(&self, y: [f64; 2]) -> [f64; 2] {
        let l = &self.lattice;
        let mut best = (f64::INFINITY, l.origin);
        for j in 0..l.nj {
            for i in 0..l.ni {
                let k = j * l.ni + i;
                let s = l.node(i, j);
                let d = (s[0] + self.disp[0][k] - y[0]).hypot(s[1] + self.disp[1][k] - y[1]);
                if d < best.0 {
                    best = (d, s);
                }
            }
        }
        best.1
    }
}

/// Preimages `η^{-1}(y)` of arbitrary points.
pub fn invert_points(state: &VortexState, targets: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
    use rayon::prelude::*;
    let map = LatticeMap::new(state)?;
    let found: Vec<Option<[f64; 2]>> = targets.par_iter().map(|&y| map.invert(y)).collect();
    let failed: Vec<usize> = found.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(k, _)| k).collect();
    if !failed.is_empty() {
        return Err(Error::InversionFailure { nodes: failed });
    }
    Ok(found.into_iter().map(Option::unwrap).collect())
}

/// `η^{-1}(y) - y` at every node of `target`.
pub fn invert_flow(state: &VortexState, target: &Grid2D) -> Result<VectorField2D> {
    let nodes: Vec<[f64; 2]> = (0..target.len())
        .map(|idx| {
            let (i, j) = target.node(idx);
            target.point(i, j)
        })
        .collect();
    let pre = invert_points(state, &nodes)?;
    VectorField2D::new(
        ScalarField2D::new(*target, pre.iter().zip(&nodes).map(|(x, y)| x[0] - y[0]).collect())?,
        ScalarField2D::new(*target, pre.iter().zip(&nodes).map(|(x, y)| x[1] - y[1]).collect())?,
    )
}

#[derive(Debug, Clone)]
pub struct Composition {
    pub field: ScalarField2D,
    /// Nodes whose mapped point fell outside `ψ`'s grid and were set to zero.
    pub outside: usize,
}

/// `ψ(y + d(y))` at every node `y`, with `d` the displacement samples on `ψ`'s grid.
pub fn compose_field(psi: &ScalarField2D, displacement: &VectorField2D) -> Result<Composition> {
    let grid = *psi.grid();
    if *displacement.grid() != grid {
        return Err(Error::input("map samples live on a different grid than the field"));
    }
    let interp = Bicubic::from_field(psi);
    let mut outside = 0;
    let values = (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.node(idx);
            let y = grid.point(i, j);
            let x = [y[0] + displacement.component(0).values()[idx], y[1] + displacement.component(1).values()[idx]];
            interp.eval(x).unwrap_or_else(|| {
                outside += 1;
                0.0
            })
        })
        .collect();
    Ok(Composition { field: ScalarField2D::new(grid, values)?, outside })
}
