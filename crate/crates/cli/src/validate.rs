//! Static checks of a configuration: nothing is integrated or transformed.

use eulerlab::inflation::{
    axis_tracers, bump_radius, seed_initial_vorticity, InflationParams, Perturbation, SolverSettings,
};
use eulerlab::lagrangian::{max_velocity_gradient, VortexDiscretization, VortexState};
use eulerlab::Grid2D;
use serde::Serialize;

use crate::config::{
    DeformScanConfig, ExperimentConfig, FlowSimConfig, InflateConfig, InitialData, Lemma51Config, Lemma53Config,
    NormsConfig, ShearFlowConfig,
};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warning,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub command: String,
    pub checks: Vec<Check>,
    /// Rough wall-clock estimate on one core.
    pub estimated_runtime_s: f64,
    pub estimated_memory_bytes: f64,
}

/// Seconds per pairwise Biot–Savart interaction with gradient, on one core.
const PAIR_COST_S: f64 = 2e-8;
/// Seconds per grid node per FFT-based norm, on one core.
const NODE_COST_S: f64 = 2e-7;
/// Bytes held per particle (seed, position, deformation, weight, radius, RK4 stages).
const PARTICLE_BYTES: f64 = 400.0;
/// Complex and real work arrays per grid node.
const NODE_BYTES: f64 = 96.0;

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    fn check(&mut self, name: &str, ok: bool, message: String) {
        let status = if ok { Status::Pass } else { Status::Warning };
        self.checks.push(Check { name: name.into(), status, message });
    }
}

fn grid_checks(b: &mut Builder, params: &InflationParams, grid: &Grid2D) {
    let radius = bump_radius(params.n_scales);
    b.check(
        "finest scale resolution",
        radius >= 8.0 * grid.spacing(),
        format!(
            "finest bump radius {radius:.3e} spans {:.2} nodes of spacing {:.3e}; at least 8 are required",
            radius / grid.spacing(),
            grid.spacing()
        ),
    );
}

fn nyquist_check(b: &mut Builder, beta: &Perturbation, grid: &Grid2D) {
    b.check(
        "perturbation bandwidth",
        beta.bandwidth() < grid.nyquist(),
        format!(
            "perturbation band k/2π + 3λ = {:.2} against grid Nyquist frequency {:.2}",
            beta.bandwidth(),
            grid.nyquist()
        ),
    );
}

fn cfl_check(b: &mut Builder, disc: VortexDiscretization, dt: f64, cfl: f64) {
    let grad = max_velocity_gradient(&VortexState::initial(disc));
    let bound = if grad > 0.0 { cfl / grad } else { f64::INFINITY };
    b.check(
        "cfl",
        dt <= bound,
        if dt <= bound {
            format!("dt {dt:.3e} satisfies dt·max|∇u| ≤ {cfl} (max|∇u| = {grad:.3e})")
        } else {
            format!("dt {dt:.3e} exceeds the CFL cap; suggested dt ≤ {bound:.3e} (max|∇u| = {grad:.3e})")
        },
    );
}

fn particle_cost(particles: f64, steps: f64) -> (f64, f64) {
    (4.0 * steps * particles * particles * PAIR_COST_S, particles * PARTICLE_BYTES)
}

fn grid_cost(grid: &Grid2D, transforms: f64) -> (f64, f64) {
    let nodes = grid.len() as f64;
    (transforms * nodes * NODE_COST_S, nodes * NODE_BYTES)
}

fn solver_checks(
    b: &mut Builder,
    params: &InflationParams,
    s: &SolverSettings,
) -> Result<(f64, f64), CliError> {
    params.validate()?;
    let grid = Grid2D::new(s.field_half_width, s.field_grid_n)?;
    grid_checks(b, params, &grid);
    let mut disc = seed_initial_vorticity(params, s.seeds_per_bump, s.delta_factor)?;
    disc.add_tracers(&axis_tracers(params.n_scales));
    let particles = disc.len() as f64 + (s.lattice_nodes * s.lattice_nodes) as f64;
    cfl_check(b, disc, params.horizon() / s.steps as f64, s.cfl);
    Ok(particle_cost(particles, s.steps as f64))
}

fn inflate(b: &mut Builder, c: &InflateConfig) -> Result<(f64, f64), CliError> {
    let (t0, m0) = solver_checks(b, &c.inflation, &c.solver)?;
    let grid = Grid2D::new(c.solver.field_half_width, c.solver.field_grid_n)?;
    // x* only fixes the location; the bandwidth depends on n alone.
    let beta = Perturbation::for_index(c.inflation.n, c.inflation.r, [1.0, 1.0])?;
    nyquist_check(b, &beta, &grid);
    b.check(
        "tracer lattice",
        c.solver.lattice_nodes >= 8,
        format!("{} lattice nodes per side; the inflation run needs at least 8", c.solver.lattice_nodes),
    );
    let beta_particles = c.solver.beta_particle_cap as f64;
    let (t1, m1) = particle_cost(beta_particles, c.solver.steps as f64);
    let checkpoints = (c.solver.steps / c.solver.sample_every.max(1) + 1) as f64;
    let (t2, m2) = grid_cost(&grid, 4.0 * checkpoints);
    Ok((2.0 * t0 + t1 + t2, m0 + m1 + m2))
}

fn flow_sim(b: &mut Builder, c: &FlowSimConfig) -> Result<(f64, f64), CliError> {
    let disc = match c.initial {
        InitialData::Pair => {
            let d = c.separation / 2.0;
            VortexDiscretization::new(vec![[-d, 0.0], [d, 0.0]], vec![c.circulation; 2], vec![c.delta; 2])?
        }
        InitialData::Multiscale => {
            let mut disc = seed_initial_vorticity(&c.inflation, c.seeds_per_bump, c.delta_factor)?;
            disc.add_tracers(&axis_tracers(c.inflation.n_scales));
            disc
        }
    };
    let particles = disc.len() as f64;
    cfl_check(b, disc, c.dt, c.cfl);
    Ok(particle_cost(particles, (c.t_end / c.dt).ceil()))
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Diagnostics, CliError> {
    let mut b = Builder { checks: Vec::new() };
    let (runtime, memory) = match cfg.command.as_str() {
        "inflate" => inflate(&mut b, &cfg.block::<InflateConfig>()?)?,
        "flow-sim" => flow_sim(&mut b, &cfg.block::<FlowSimConfig>()?)?,
        "deform-scan" => {
            let c: DeformScanConfig = cfg.block()?;
            let (mut t, mut m) = (0.0, 0.0f64);
            for &n_scales in &c.scales {
                let params = InflationParams { n_scales, ..c.inflation.clone() };
                let (ti, mi) = solver_checks(&mut b, &params, &c.solver)?;
                t += ti;
                m = m.max(mi);
            }
            (t, m)
        }
        "lemma51-scan" => {
            let c: Lemma51Config = cfg.block()?;
            b.check("exponent order", c.q <= c.r, format!("q = {} and r = {}; the block evaluator needs q ≤ r", c.q, c.r));
            grid_cost(&Grid2D::new(4.0, 1024)?, 40.0)
        }
        "lemma53-scan" => {
            let c: Lemma53Config = cfg.block()?;
            let mut t = 0.0;
            let mut m = 0.0;
            let runs: Vec<(f64, f64)> = c
                .frequencies
                .iter()
                .map(|&f| (f, c.k_series_lambda))
                .chain(c.lambdas.iter().map(|&l| (c.lambda_series_frequency, l)))
                .collect();
            for (freq, lambda) in runs {
                let grid = Grid2D::new(6.0 / lambda, c.grid_n)?;
                let beta = Perturbation::new(lambda, std::f64::consts::TAU * freq, c.r, [3.0 / lambda; 2])?;
                nyquist_check(&mut b, &beta, &grid);
                let (ti, mi) = grid_cost(&grid, 30.0);
                t += ti;
                m = mi;
            }
            (t, m)
        }
        "shear-flow" => {
            let c: ShearFlowConfig = cfg.block()?;
            b.check(
                "parameters",
                c.alpha > 0.0 && c.alpha < 1.0 && c.eps > 0.0 && c.eps <= 1.0,
                format!("alpha = {} must lie in (0, 1) and eps = {} in (0, 1]", c.alpha, c.eps),
            );
            (0.5 * c.times.len() as f64, 64.0 * 64.0 * NODE_BYTES)
        }
        "norms" => {
            let c: NormsConfig = cfg.block()?;
            let exists = c.field.as_ref().is_some_and(|p| p.is_file());
            b.check("field file", exists, format!("field file {:?}", c.field));
            (1.0, 0.0)
        }
        other => return Err(CliError::Config(format!("cannot validate unknown command `{other}`"))),
    };
    Ok(Diagnostics {
        command: cfg.command.clone(),
        checks: b.checks,
        estimated_runtime_s: runtime,
        estimated_memory_bytes: memory,
    })
}
