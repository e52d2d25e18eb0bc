//! Vortex-blob solver for the two-dimensional Euler equations in trajectory form.
//!
//! Each particle carries a circulation `w_i` (vorticity times cell area) that is conserved
//! along its trajectory, so the velocity at any point is the regularized Biot–Savart sum
//! `u(q) = Σ_i K^{δ_i}(q - η_i) w_i`. Particles with zero circulation are passive tracers.
//! The deformation gradient `Dη_i` is advanced with the variational equation
//! `d(Dη_i)/dt = ∇u(η_i) Dη_i` inside the same Runge–Kutta stages as the positions.

mod interp;
mod invert;
mod kernel;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D, VectorField2D};

pub use interp::Bicubic;
pub use invert::{compose_field, invert_flow, invert_points, Composition, LatticeMap};
pub use kernel::{blob_kernel, blob_kernel_with_gradient, blob_stream, kernel_k2};

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

/// Regular block of particles `origin + (i, j) * spacing`, stored row by row (`i` fastest)
/// starting at particle `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: [f64; 2],
    pub spacing: f64,
    pub ni: usize,
    pub nj: usize,
    pub offset: usize,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.ni * self.nj
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }

    pub fn particle(&self, i: usize, j: usize) -> usize {
        self.offset + j * self.ni + i
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexDiscretization {
    pub seeds: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Blob radius used when the particle acts as a source.
    pub deltas: Vec<f64>,
    /// Tracer lattice used for flow-map interpolation, if any.
    pub lattice: Option<Lattice>,
}

impl VortexDiscretization {
    pub fn new(seeds: Vec<[f64; 2]>, weights: Vec<f64>, deltas: Vec<f64>) -> Result<Self> {
        if seeds.len() != weights.len() || seeds.len() != deltas.len() {
            return Err(Error::input("seeds, weights and blob radii differ in length"));
        }
        if let Some(k) = deltas.iter().position(|&d| !(d > 0.0 && d.is_finite())) {
            return Err(Error::input(format!("blob radius of particle {k} must be positive")));
        }
        if seeds.iter().flatten().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::input("non-finite seed or circulation"));
        }
        Ok(Self { seeds, weights, deltas, lattice: None })
    }

    /// Samples `omega` at the centres of the cells of `grid` that meet its support, with
    /// `w = ω h^2` and blob radius `delta_factor * h`.
    pub fn from_grid(grid: &Grid2D, omega: impl Fn([f64; 2]) -> f64, delta_factor: f64) -> Result<Self> {
        let h = grid.spacing();
        let mut seeds = Vec::new();
        let mut weights = Vec::new();
        for j in 0..grid.n() {
            for i in 0..grid.n() {
                let p = grid.point(i, j);
                let c = [p[0] + 0.5 * h, p[1] + 0.5 * h];
                let v = omega(c);
                if v.abs() >= 1e-14 {
                    seeds.push(c);
                    weights.push(v * h * h);
                }
            }
        }
        let deltas = vec![delta_factor * h; seeds.len()];
        Self::new(seeds, weights, deltas)
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn total_circulation(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Appends another discretization; its lattice offset is shifted accordingly.
    pub fn extend(&mut self, other: &VortexDiscretization) -> Result<()> {
        let base = self.len();
        if let Some(l) = other.lattice {
            if self.lattice.is_some() {
                return Err(Error::input("both discretizations carry a tracer lattice"));
            }
            self.lattice = Some(Lattice { offset: l.offset + base, ..l });
        }
        self.seeds.extend_from_slice(&other.seeds);
        self.weights.extend_from_slice(&other.weights);
        self.deltas.extend_from_slice(&other.deltas);
        Ok(())
    }

    /// Appends a lattice of passive tracers.
    pub fn add_tracer_lattice(&mut self, origin: [f64; 2], spacing: f64, ni: usize, nj: usize) -> Result<Lattice> {
        if self.lattice.is_some() {
            return Err(Error::input("discretization already carries a tracer lattice"));
        }
        if !(spacing > 0.0) || ni < 4 || nj < 4 {
            return Err(Error::input("tracer lattice needs positive spacing and at least 4x4 nodes"));
        }
        let lattice = Lattice { origin, spacing, ni, nj, offset: self.len() };
        for j in 0..nj {
            for i in 0..ni {
                self.seeds.push(lattice.node(i, j));
                self.weights.push(0.0);
                self.deltas.push(spacing);
            }
        }
        self.lattice = Some(lattice);
        Ok(lattice)
    }

    /// Appends passive tracers at arbitrary points and returns the index of the first.
    pub fn add_tracers(&mut self, points: &[[f64; 2]]) -> usize {
        let first = self.len();
        for &p in points {
            self.seeds.push(p);
            self.weights.push(0.0);
            self.deltas.push(1.0);
        }
        first
    }
}

/// Active sources in structure-of-arrays form.
struct Sources {
    pos: Vec<[f64; 2]>,
    w: Vec<f64>,
    d2: Vec<f64>,
}

impl Sources {
    fn collect(disc: &VortexDiscretization, positions: &[[f64; 2]]) -> Self {
        let mut s = Sources { pos: Vec::new(), w: Vec::new(), d2: Vec::new() };
        for k in 0..positions.len() {
            if disc.weights[k] != 0.0 {
                s.pos.push(positions[k]);
                s.w.push(disc.weights[k]);
                s.d2.push(disc.deltas[k] * disc.deltas[k]);
            }
        }
        s
    }

    fn velocity(&self, q: [f64; 2]) -> [f64; 2] {
        let mut u = [0.0, 0.0];
        for k in 0..self.w.len() {
            let k2 = blob_kernel([q[0] - self.pos[k][0], q[1] - self.pos[k][1]], self.d2[k]);
            u[0] += k2[0] * self.w[k];
            u[1] += k2[1] * self.w[k];
        }
        u
    }

    fn velocity_and_gradient(&self, q: [f64; 2]) -> ([f64; 2], Mat2) {
        let mut u = [0.0, 0.0];
        let mut g = [[0.0; 2]; 2];
        for k in 0..self.w.len() {
            let (kv, kg) = blob_kernel_with_gradient([q[0] - self.pos[k][0], q[1] - self.pos[k][1]], self.d2[k]);
            let w = self.w[k];
            u[0] += kv[0] * w;
            u[1] += kv[1] * w;
            g[0][0] += kg[0][0] * w;
            g[0][1] += kg[0][1] * w;
            g[1][0] += kg[1][0] * w;
            g[1][1] += kg[1][1] * w;
        }
        (u, g)
    }
}

/// Regularized Biot–Savart velocity at each query, sources taken from `positions`.
pub fn biot_savart_velocity(disc: &VortexDiscretization, positions: &[[f64; 2]], queries: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let sources = Sources::collect(disc, positions);
    queries.par_iter().map(|&q| sources.velocity(q)).collect()
}

/// Velocity and velocity gradient `J[i][j] = ∂_j u_i` at each query.
pub fn biot_savart_gradient(
    disc: &VortexDiscretization,
    positions: &[[f64; 2]],
    queries: &[[f64; 2]],
) -> Vec<([f64; 2], Mat2)> {
    let sources = Sources::collect(disc, positions);
    queries.par_iter().map(|&q| sources.velocity_and_gradient(q)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct VortexState {
    pub time: f64,
    pub positions: Vec<[f64; 2]>,
    pub deformation: Vec<Mat2>,
    pub disc: Arc<VortexDiscretization>,
}

impl VortexState {
    pub fn initial(disc: VortexDiscretization) -> Self {
        let disc = Arc::new(disc);
        Self { time: 0.0, positions: disc.seeds.clone(), deformation: vec![IDENTITY; disc.len()], disc }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn velocity_at(&self, queries: &[[f64; 2]]) -> Vec<[f64; 2]> {
        biot_savart_velocity(&self.disc, &self.positions, queries)
    }

    pub fn gradient_at(&self, queries: &[[f64; 2]]) -> Vec<([f64; 2], Mat2)> {
        biot_savart_gradient(&self.disc, &self.positions, queries)
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Largest singular value.
pub fn operator_norm(a: &Mat2) -> f64 {
    let p = a[0][0] * a[0][0] + a[1][0] * a[1][0];
    let q = a[0][1] * a[0][1] + a[1][1] * a[1][1];
    let r = a[0][0] * a[0][1] + a[1][0] * a[1][1];
    let half = 0.5 * (p + q);
    (half + (0.25 * (p - q) * (p - q) + r * r).sqrt()).sqrt()
}

pub fn entry_max(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Right-hand side of the coupled trajectory and variational system.
fn rhs(disc: &VortexDiscretization, pos: &[[f64; 2]], def: &[Mat2]) -> (Vec<[f64; 2]>, Vec<Mat2>) {
    let sources = Sources::collect(disc, pos);
    pos.par_iter()
        .zip(def.par_iter())
        .map(|(&q, f)| {
            let (u, g) = sources.velocity_and_gradient(q);
            (u, mat_mul(&g, f))
        })
        .unzip()
}

fn axpy(base: &[[f64; 2]], k: &[[f64; 2]], c: f64) -> Vec<[f64; 2]> {
    base.iter().zip(k).map(|(b, v)| [b[0] + c * v[0], b[1] + c * v[1]]).collect()
}

fn axpy_mat(base: &[Mat2], k: &[Mat2], c: f64) -> Vec<Mat2> {
    base.iter()
        .zip(k)
        .map(|(b, v)| [[b[0][0] + c * v[0][0], b[0][1] + c * v[0][1]], [b[1][0] + c * v[1][0], b[1][1] + c * v[1][1]]])
        .collect()
}

/// One classical Runge–Kutta step of positions and deformation gradients.
pub fn step_rk4(state: &VortexState, dt: f64) -> Result<VortexState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::input(format!("time step must be positive, got {dt}")));
    }
    let disc = &state.disc;
    let (x0, f0) = (&state.positions, &state.deformation);
    let (k1x, k1f) = rhs(disc, x0, f0);
    let (k2x, k2f) = rhs(disc, &axpy(x0, &k1x, 0.5 * dt), &axpy_mat(f0, &k1f, 0.5 * dt));
    let (k3x, k3f) = rhs(disc, &axpy(x0, &k2x, 0.5 * dt), &axpy_mat(f0, &k2f, 0.5 * dt));
    let (k4x, k4f) = rhs(disc, &axpy(x0, &k3x, dt), &axpy_mat(f0, &k3f, dt));
    let c = dt / 6.0;
    let positions: Vec<[f64; 2]> = (0..x0.len())
        .map(|k| {
            std::array::from_fn(|d| x0[k][d] + c * (k1x[k][d] + 2.0 * k2x[k][d] + 2.0 * k3x[k][d] + k4x[k][d]))
        })
        .collect();
    let deformation: Vec<Mat2> = (0..f0.len())
        .map(|k| {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    f0[k][i][j] + c * (k1f[k][i][j] + 2.0 * k2f[k][i][j] + 2.0 * k3f[k][i][j] + k4f[k][i][j])
                })
            })
        })
        .collect();
    let time = state.time + dt;
    let finite = positions.iter().flatten().chain(deformation.iter().flatten().flatten()).all(|v| v.is_finite());
    if !finite {
        return Err(Error::Blowup { time, last_valid: Box::new(state.clone()) });
    }
    Ok(VortexState { time, positions, deformation, disc: Arc::clone(disc) })
}

/// Largest `|∇u|` (operator norm) over the particles.
pub fn max_velocity_gradient(state: &VortexState) -> f64 {
    state.gradient_at(&state.positions).iter().map(|(_, g)| operator_norm(g)).fold(0.0, f64::max)
}

/// Step satisfying `dt * max|∇u| ≤ cfl`, capped at `dt_max`.
pub fn cfl_dt(state: &VortexState, cfl: f64, dt_max: f64) -> f64 {
    let g = max_velocity_gradient(state);
    if g > 0.0 {
        dt_max.min(cfl / g)
    } else {
        dt_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    /// Upper bound on the step.
    pub dt_max: f64,
    /// Bound on `dt * max|∇u|`.
    pub cfl: f64,
    /// Steps between re-evaluations of the CFL bound.
    pub recheck_every: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt_max: 1e-2, cfl: 0.1, recheck_every: 10 }
    }
}

/// Advances to `t_end`, calling `observe` after every step; the last step lands on `t_end`.
pub fn integrate(
    state: VortexState,
    t_end: f64,
    control: &StepControl,
    mut observe: impl FnMut(&VortexState, usize) -> Result<()>,
) -> Result<VortexState> {
    if !(control.cfl > 0.0 && control.dt_max > 0.0 && control.recheck_every > 0) {
        return Err(Error::input("step control needs positive cfl, dt_max and recheck cadence"));
    }
    let mut state = state;
    let mut dt = control.dt_max;
    let mut steps = 0usize;
    while state.time < t_end {
        if steps % control.recheck_every == 0 {
            dt = cfl_dt(&state, control.cfl, control.dt_max);
        }
        let remaining = t_end - state.time;
        let last = remaining <= dt * (1.0 + 1e-9);
        state = step_rk4(&state, if last { remaining } else { dt })?;
        if last {
            state.time = t_end;
        }
        steps += 1;
        observe(&state, steps)?;
    }
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationStats {
    /// `max_i max_{ab} |Dη_i[a][b]|`.
    pub entry_max: f64,
    /// `max_i ‖Dη_i‖_op`.
    pub operator_max: f64,
    /// Particle attaining `entry_max`.
    pub argmax: usize,
    /// `max_i |det Dη_i - 1|`.
    pub det_drift: f64,
}

pub fn max_deformation(state: &VortexState) -> DeformationStats {
    let mut stats = DeformationStats { entry_max: 0.0, operator_max: 0.0, argmax: 0, det_drift: 0.0 };
    for (k, f) in state.deformation.iter().enumerate() {
        let e = entry_max(f);
        if e > stats.entry_max {
            stats.entry_max = e;
            stats.argmax = k;
        }
        stats.operator_max = stats.operator_max.max(operator_norm(f));
        stats.det_drift = stats.det_drift.max((det(f) - 1.0).abs());
    }
    stats
}

/// Velocity sampled at every node of `grid`.
pub fn velocity_on_grid(state: &VortexState, grid: &Grid2D) -> Result<VectorField2D> {
    let nodes: Vec<[f64; 2]> = (0..grid.len()).map(|idx| {
        let (i, j) = grid.node(idx);
        grid.point(i, j)
    }).collect();
    let u = state.velocity_at(&nodes);
    VectorField2D::new(
        ScalarField2D::new(*grid, u.iter().map(|v| v[0]).collect())?,
        ScalarField2D::new(*grid, u.iter().map(|v| v[1]).collect())?,
    )
}

/// Kinetic energy `-(1/2) Σ_i Σ_j w_i w_j ψ^{δ_j}(η_i - η_j)`, finite for zero total circulation.
pub fn energy(state: &VortexState) -> f64 {
    let sources = Sources::collect(&state.disc, &state.positions);
    let n = sources.w.len();
    let per: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = sources.pos[i];
            let mut acc = 0.0;
            for j in 0..n {
                acc += sources.w[j] * blob_stream([xi[0] - sources.pos[j][0], xi[1] - sources.pos[j][1]], sources.d2[j]);
            }
            sources.w[i] * acc
        })
        .collect();
    -0.5 * per.iter().sum::<f64>()
}
