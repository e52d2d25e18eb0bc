//! Lagrangian runs of the multiscale data with and without the perturbation.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::lagrangian::{
    integrate, max_deformation, Bicubic, LatticeMap, Mat2, StepControl,
    VortexDiscretization, VortexState,
};
use crate::spaces::{besov_norm, build_filter_bank, default_band, BesovParams};

use super::bump::bump_radius;
use super::scans::fit_power_law;
use super::{omega0, omega0_gradient, seed_initial_vorticity, InflationParams, Perturbation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Cell-centred particles per side of each bump's bounding box.
    pub seeds_per_bump: usize,
    /// Blob radius in units of the local particle spacing.
    pub delta_factor: f64,
    /// Steps to the horizon; the CFL bound may shorten them further.
    pub steps: usize,
    /// Steps between recorded samples.
    pub sample_every: usize,
    pub cfl: f64,
    /// Nodes per side of the tracer lattice used for flow-map interpolation; 0 disables it.
    pub lattice_nodes: usize,
    /// Half-width of the grid on which evolved vorticity is measured.
    pub field_half_width: f64,
    pub field_grid_n: usize,
    /// Upper bound on the number of particles carrying the perturbation.
    pub beta_particle_cap: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            seeds_per_bump: 8,
            delta_factor: 2.0,
            steps: 100,
            sample_every: 10,
            cfl: 0.1,
            lattice_nodes: 0,
            field_half_width: 1.5,
            field_grid_n: 1024,
            beta_particle_cap: 6000,
        }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.sample_every == 0 || !(self.cfl > 0.0) {
            return Err(Error::input("steps, sample cadence and cfl must be positive"));
        }
        if self.lattice_nodes != 0 && self.lattice_nodes < 8 {
            return Err(Error::input("tracer lattice needs at least 8 nodes per side"));
        }
        Ok(())
    }

    fn control(&self, horizon: f64) -> StepControl {
        StepControl { dt_max: horizon / self.steps as f64, cfl: self.cfl, recheck_every: 10 }
    }
}

/// Passive tracers on both axes between consecutive bump scales and near the origin.
pub fn axis_tracers(n_scales: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::new();
    for j in 0..=n_scales + 3 {
        let a = 0.75 * 2f64.powi(-(j as i32));
        pts.extend_from_slice(&[[a, 0.0], [-a, 0.0], [0.0, a], [0.0, -a]]);
    }
    pts.push([0.0, 0.0]);
    pts
}

/// Seeds the multiscale data plus axis tracers and, if requested, a tracer lattice that
/// covers the measurement grid with a two-cell margin.
pub fn unperturbed_discretization(params: &InflationParams, s: &SolverSettings) -> Result<VortexDiscretization> {
    s.validate()?;
    let mut disc = seed_initial_vorticity(params, s.seeds_per_bump, s.delta_factor)?;
    disc.add_tracers(&axis_tracers(params.n_scales));
    if s.lattice_nodes > 0 {
        let spacing = 2.0 * s.field_half_width / (s.lattice_nodes - 5) as f64;
        let o = -(s.field_half_width + 2.0 * spacing);
        disc.add_tracer_lattice([o, o], spacing, s.lattice_nodes, s.lattice_nodes)?;
    }
    Ok(disc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformationSample {
    pub time: f64,
    pub step: usize,
    /// `max |Dη_ab|` over all particles.
    pub entry_max: f64,
    pub operator_max: f64,
    pub det_drift: f64,
    /// Largest `|∂η²/∂x2|` over first-quadrant particles and the seed attaining it.
    pub stretch_max: f64,
    pub stretch_seed: [f64; 2],
}

fn sample(state: &VortexState, step: usize) -> DeformationSample {
    let stats = max_deformation(state);
    let (mut stretch_max, mut stretch_seed) = (0.0, [0.0, 0.0]);
    for (k, f) in state.deformation.iter().enumerate() {
        let x = state.disc.seeds[k];
        if x[0] > 0.0 && x[1] > 0.0 && f[1][1].abs() > stretch_max {
            stretch_max = f[1][1].abs();
            stretch_seed = x;
        }
    }
    DeformationSample {
        time: state.time,
        step,
        entry_max: stats.entry_max,
        operator_max: stats.operator_max,
        det_drift: stats.det_drift,
        stretch_max,
        stretch_seed,
    }
}

#[derive(Debug, Clone)]
pub struct DeformationRun {
    pub samples: Vec<DeformationSample>,
    /// States at the sampled times, starting with the initial state.
    pub checkpoints: Vec<VortexState>,
}

impl DeformationRun {
    pub fn final_entry_max(&self) -> f64 {
        self.samples.last().map_or(1.0, |s| s.entry_max)
    }

    /// Index of the checkpoint with the largest `entry_max`, earliest on ties.
    pub fn argmax_checkpoint(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.samples.iter().enumerate() {
            if s.entry_max > self.samples[best].entry_max {
                best = i;
            }
        }
        best
    }
}

/// Integrates `disc` to the horizon, sampling every `sample_every` steps and at the end.
pub fn run_discretization(disc: VortexDiscretization, horizon: f64, s: &SolverSettings) -> Result<DeformationRun> {
    s.validate()?;
    let state = VortexState::initial(disc);
    let mut samples = vec![sample(&state, 0)];
    let mut checkpoints = vec![state.clone()];
    let end = integrate(state, horizon, &s.control(horizon), |st, step| {
        if step % s.sample_every == 0 {
            samples.push(sample(st, step));
            checkpoints.push(st.clone());
        }
        Ok(())
    })?;
    if checkpoints.last().map(|c| c.time) != Some(end.time) {
        let steps = samples.last().map_or(0, |x| x.step) + 1;
        samples.push(sample(&end, steps));
        checkpoints.push(end);
    }
    Ok(DeformationRun { samples, checkpoints })
}

/// `||Dη(t)||_∞` on `[0, T]` for the unperturbed multiscale data.
pub fn run_deformation(params: &InflationParams, s: &SolverSettings) -> Result<DeformationRun> {
    params.validate()?;
    run_discretization(unperturbed_discretization(params, s)?, params.horizon(), s)
}

/// First-quadrant particle seed maximizing `|∂η²/∂x2|`, restricted to seeds at least
/// `6/λ` from both axes so the four mirrored perturbation blobs stay apart. Ties go to
/// the lexicographically smallest seed.
pub fn select_x_star(state: &VortexState, lambda: f64) -> Result<[f64; 2]> {
    let floor = 6.0 / lambda;
    let mut best: Option<(f64, [f64; 2])> = None;
    for (k, f) in state.deformation.iter().enumerate() {
        let x = state.disc.seeds[k];
        if x[0] < floor || x[1] < floor {
            continue;
        }
        let v = f[1][1].abs();
        let better = match best {
            None => true,
            Some((bv, bx)) => v > bv || (v == bv && (x[0], x[1]) < (bx[0], bx[1])),
        };
        if better {
            best = Some((v, x));
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::input("no particle seed lies far enough from the axes"))
}

/// Particles carrying `β` on cell centres around the four blob centres, coarsened by
/// factors of two until at most `cap` cells have `|β| > 1e-8`.
pub fn beta_particles(beta: &Perturbation, cap: usize, delta_factor: f64) -> Result<VortexDiscretization> {
    let half = 6.0 / beta.lambda;
    let mut h = 2.0 * PI / beta.k / 4.0;
    loop {
        let m = (2.0 * half / h).ceil() as usize;
        let mut quadrant = Vec::new();
        for j in 0..m {
            for i in 0..m {
                let c = [beta.x_star[0] - half + (i as f64 + 0.5) * h, beta.x_star[1] - half + (j as f64 + 0.5) * h];
                if c[0] <= 0.0 || c[1] <= 0.0 {
                    continue;
                }
                let v = beta.value(c);
                if v.abs() > 1e-8 {
                    quadrant.push((c, v * h * h));
                }
            }
        }
        if 4 * quadrant.len() <= cap {
            // β is even in x1 and odd in x2.
            let (mut seeds, mut weights) = (Vec::new(), Vec::new());
            for (e1, e2) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                for &(c, w) in &quadrant {
                    seeds.push([e1 * c[0], e2 * c[1]]);
                    weights.push(e2 * w);
                }
            }
            let deltas = vec![delta_factor * h; seeds.len()];
            return VortexDiscretization::new(seeds, weights, deltas);
        }
        h *= 2.0;
    }
}

fn patch_spacing(beta: &Perturbation) -> f64 {
    (2.0 * PI / beta.k / 8.0).min(1.0 / (8.0 * beta.lambda))
}

/// `∫_{R^2} f` for integrands sharing the symmetry of `|∇β|`, as four times the midpoint
/// sum over the first-quadrant part of the square of half-width `6/λ` around `x*`.
fn patch_integral(beta: &Perturbation, f: impl Fn([f64; 2]) -> f64 + Sync) -> f64 {
    let half = 6.0 / beta.lambda;
    let h = patch_spacing(beta);
    let m = (2.0 * half / h).ceil() as usize;
    let rows: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|j| {
            let x2 = beta.x_star[1] - half + (j as f64 + 0.5) * h;
            if x2 <= 0.0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for i in 0..m {
                let x1 = beta.x_star[0] - half + (i as f64 + 0.5) * h;
                if x1 > 0.0 {
                    acc += f([x1, x2]);
                }
            }
            acc
        })
        .collect();
    4.0 * h * h * rows.iter().sum::<f64>()
}

/// Bicubic interpolation of the deformation gradient carried by the lattice tracers.
pub struct DeformationField {
    lattice: crate::lagrangian::Lattice,
    entries: [Vec<f64>; 4],
}

impl DeformationField {
    pub fn new(state: &VortexState) -> Result<Self> {
        let l = state.disc.lattice.ok_or_else(|| Error::input("state carries no tracer lattice"))?;
        let mut entries: [Vec<f64>; 4] = Default::default();
        for j in 0..l.nj {
            for i in 0..l.ni {
                let f = state.deformation[l.particle(i, j)];
                entries[0].push(f[0][0]);
                entries[1].push(f[0][1]);
                entries[2].push(f[1][0]);
                entries[3].push(f[1][1]);
            }
        }
        Ok(Self { lattice: l, entries })
    }

    /// `Dη(x)`, identity outside the lattice.
    pub fn at(&self, x: [f64; 2]) -> Mat2 {
        let l = &self.lattice;
        let v: Vec<Option<f64>> =
            self.entries.iter().map(|e| Bicubic::new(l.origin, l.spacing, l.ni, l.nj, e).eval(x)).collect();
        match (v[0], v[1], v[2], v[3]) {
            (Some(a), Some(b), Some(c), Some(d)) => [[a, b], [c, d]],
            _ => crate::lagrangian::IDENTITY,
        }
    }
}

/// The two products of the stretching term, `||∂1β ∂2η²||_r` and `||∂2β ∂1η²||_r`, and the
/// full `||∇β · ∇^⊥η²||_r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchingTerms {
    pub n: usize,
    pub along: f64,
    pub across: f64,
    pub full: f64,
}

pub fn stretching_terms(beta: &Perturbation, n: usize, deformation: &DeformationField) -> StretchingTerms {
    let r = beta.r;
    let parts = |x: [f64; 2]| {
        let g = beta.gradient(x);
        let f = deformation.at(x);
        (g[0] * f[1][1], g[1] * f[1][0])
    };
    let along = patch_integral(beta, |x| parts(x).0.abs().powf(r)).powf(1.0 / r);
    let across = patch_integral(beta, |x| parts(x).1.abs().powf(r)).powf(1.0 / r);
    let full = patch_integral(beta, |x| {
        let (a, b) = parts(x);
        (b - a).abs().powf(r)
    })
    .powf(1.0 / r);
    StretchingTerms { n, along, across, full }
}

/// Samples `ω_0 + β` at the preimages of the grid nodes under the run's flow map; nodes
/// whose preimage cannot be located on the lattice are reported as an error.
fn transported_field(
    params: &InflationParams,
    beta: Option<&Perturbation>,
    state: &VortexState,
    grid: &Grid2D,
) -> Result<ScalarField2D> {
    let map = LatticeMap::new(state)?;
    let n = grid.n();
    let at_identity = state.time == 0.0;
    let values: Vec<Option<f64>> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let y = grid.point(idx % n, idx / n);
            let x = if at_identity { Some(y) } else { map.invert(y) }?;
            Some(omega0(params, x) + beta.map_or(0.0, |b| b.value(x)))
        })
        .collect();
    let failed = values.iter().filter(|v| v.is_none()).count();
    if failed > 0 {
        return Err(Error::InversionFailure { nodes: (0..values.len()).filter(|&i| values[i].is_none()).collect() });
    }
    ScalarField2D::new(*grid, values.into_iter().map(|v| v.unwrap()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InflationCheckpoint {
    pub time: f64,
    pub entry_max: f64,
    pub besov_unperturbed: f64,
    pub besov_perturbed: f64,
    /// Perturbed norm relative to its value at `t = 0`.
    pub inflation_ratio: f64,
    /// `max |η^n - η| + max |Dη^n - Dη|` over shared particles at this time.
    pub flow_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationReport {
    pub params: InflationParams,
    pub settings: SolverSettings,
    pub x_star: [f64; 2],
    pub lambda: f64,
    pub k: f64,
    pub beta_particles: usize,
    pub checkpoints: Vec<InflationCheckpoint>,
    /// Checkpoint of largest unperturbed deformation.
    pub t_star: f64,
    /// `||∇β · ∇^⊥η²(t*)||_r`.
    pub stretching_term: f64,
    /// `||∇ω_0 · ∇^⊥η²(t*)||_r`.
    pub background_term: f64,
    /// `θ_n (||∇ω_0||_r + ||∇β||_r)`.
    pub stability_term: f64,
    pub theta: f64,
    pub grad_omega0_lr: f64,
    pub grad_beta_lr: f64,
    pub lemma_terms: StretchingTerms,
    /// `min(stretching/background, stretching/stability)`.
    pub dominance: f64,
    /// Inflation ratio at `t*`.
    pub growth: f64,
    /// Whether the measurement grid resolves the finest bump with 8 nodes per radius.
    pub grid_resolves_bumps: bool,
}

fn flow_gap(a: &VortexState, b: &VortexState, shared: usize) -> f64 {
    let (mut pos, mut def) = (0.0f64, 0.0f64);
    for k in 0..shared {
        pos = pos.max((a.positions[k][0] - b.positions[k][0]).abs().max((a.positions[k][1] - b.positions[k][1]).abs()));
        for i in 0..2 {
            for j in 0..2 {
                def = def.max((a.deformation[k][i][j] - b.deformation[k][i][j]).abs());
            }
        }
    }
    pos + def
}

/// `||∇ω_0 · ∇^⊥η²||_r` and `||∇ω_0||_r` by midpoint quadrature over the bump particles.
fn background_terms(params: &InflationParams, state: &VortexState, s: &SolverSettings) -> (f64, f64) {
    let r = params.r;
    let (mut prod, mut grad) = (0.0, 0.0);
    for k in 0..state.len() {
        if state.disc.weights[k] == 0.0 {
            continue;
        }
        let x = state.disc.seeds[k];
        let area = (state.disc.deltas[k] / s.delta_factor).powi(2);
        let g = omega0_gradient(params, x);
        let f = state.deformation[k];
        prod += area * (g[1] * f[1][0] - g[0] * f[1][1]).abs().powf(r);
        grad += area * g[0].hypot(g[1]).powf(r);
    }
    (prod.powf(1.0 / r), grad.powf(1.0 / r))
}

/// Runs the unperturbed and perturbed flows with identical settings and measures the
/// terms of the lower bound for the perturbed Besov norm at the checkpoint of largest
/// deformation.
pub fn run_inflation(params: &InflationParams, s: &SolverSettings) -> Result<InflationReport> {
    params.validate()?;
    if s.lattice_nodes == 0 {
        return Err(Error::input("inflation runs need a tracer lattice"));
    }
    let base = unperturbed_discretization(params, s)?;
    let shared = base.len();
    let unperturbed = run_discretization(base.clone(), params.horizon(), s)?;
    let star = unperturbed.argmax_checkpoint();
    let state_star = &unperturbed.checkpoints[star];
    let x_star = select_x_star(state_star, params.lambda())?;
    let beta = Perturbation::for_index(params.n, params.r, x_star)?;

    let extra = beta_particles(&beta, s.beta_particle_cap, s.delta_factor)?;
    let mut perturbed_disc = base;
    perturbed_disc.extend(&extra)?;
    let perturbed = run_discretization(perturbed_disc, params.horizon(), s)?;
    if perturbed.checkpoints.len() != unperturbed.checkpoints.len() {
        return Err(Error::input("perturbed and unperturbed runs sampled different checkpoints"));
    }

    let grid = Grid2D::new(s.field_half_width, s.field_grid_n)?;
    if beta.bandwidth() >= grid.nyquist() {
        return Err(Error::resolution("measurement grid does not resolve the perturbation frequency"));
    }
    let (_, l_max) = default_band(&grid);
    let bank = build_filter_bank(&grid, -4, l_max)?;
    let bp = BesovParams::new(1.0, params.r, params.q)?;
    let mut checkpoints = Vec::new();
    let mut theta = 0.0f64;
    let mut initial = f64::NAN;
    for (i, (u, p)) in unperturbed.checkpoints.iter().zip(&perturbed.checkpoints).enumerate() {
        let bu = besov_norm(&transported_field(params, None, u, &grid)?, &bp, &bank)?.value;
        let bpn = besov_norm(&transported_field(params, Some(&beta), p, &grid)?, &bp, &bank)?.value;
        if i == 0 {
            initial = bpn;
        }
        let gap = flow_gap(u, p, shared);
        theta = theta.max(gap);
        checkpoints.push(InflationCheckpoint {
            time: u.time,
            entry_max: unperturbed.samples[i].entry_max,
            besov_unperturbed: bu,
            besov_perturbed: bpn,
            inflation_ratio: bpn / initial,
            flow_gap: gap,
        });
    }

    let deformation = DeformationField::new(state_star)?;
    let terms = stretching_terms(&beta, params.n, &deformation);
    let (background_term, grad_omega0_lr) = background_terms(params, state_star, s);
    let grad_beta_lr = patch_integral(&beta, |x| {
        let g = beta.gradient(x);
        g[0].hypot(g[1]).powf(params.r)
    })
    .powf(1.0 / params.r);
    let stability_term = theta * (grad_omega0_lr + grad_beta_lr);
    let dominance = (terms.full / background_term).min(terms.full / stability_term);
    Ok(InflationReport {
        params: *params,
        settings: *s,
        x_star,
        lambda: beta.lambda,
        k: beta.k,
        beta_particles: extra.len(),
        t_star: state_star.time,
        stretching_term: terms.full,
        background_term,
        stability_term,
        theta,
        grad_omega0_lr,
        grad_beta_lr,
        lemma_terms: terms,
        dominance,
        growth: checkpoints[star].inflation_ratio,
        checkpoints,
        grid_resolves_bumps: bump_radius(params.n_scales) >= 8.0 * grid.spacing(),
    })
}

/// Stretching terms at `t*` for several perturbation indices, sharing one unperturbed run
/// and the `x*` selected for the smallest index; `across_exponent` fits `||∂2β ∂1η²||_r ~ n^e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchingScan {
    pub x_star: [f64; 2],
    pub t_star: f64,
    pub terms: Vec<StretchingTerms>,
    pub across_exponent: f64,
}

pub fn stretching_scan(params: &InflationParams, s: &SolverSettings, ns: &[usize]) -> Result<StretchingScan> {
    params.validate()?;
    if s.lattice_nodes == 0 {
        return Err(Error::input("stretching scan needs a tracer lattice"));
    }
    let n_min = *ns.iter().min().ok_or_else(|| Error::input("empty perturbation index list"))?;
    if n_min == 0 {
        return Err(Error::input("perturbation indices must be positive"));
    }
    let run = run_deformation(params, s)?;
    let state = &run.checkpoints[run.argmax_checkpoint()];
    let x_star = select_x_star(state, 3.0 * n_min as f64)?;
    let deformation = DeformationField::new(state)?;
    let terms = ns
        .iter()
        .map(|&n| Ok(stretching_terms(&Perturbation::for_index(n, params.r, x_star)?, n, &deformation)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let (across_exponent, _) = fit_power_law(&xs, &terms.iter().map(|t| t.across).collect::<Vec<_>>())?;
    Ok(StretchingScan { x_star, t_star: state.time, terms, across_exponent })
}
