//! One function per experiment; each returns the artifacts of a finished run.

use eulerlab::inflation::{
    axis_tracers, lemma51_scan, lemma53_scan, perturbation_beta, run_deformation, run_inflation,
    seed_initial_vorticity, InflationParams, Perturbation,
};
use eulerlab::lagrangian::{energy, integrate, max_deformation, StepControl, VortexDiscretization, VortexState};
use eulerlab::shear_flow::{
    discontinuity_quotient, euler_residual, initial_gap, make_counterexample, measured_gap, random_samples, Branch,
};
use eulerlab::spaces::{
    besov_norm, build_filter_bank, default_band, holder_seminorm, little_holder_modulus, lp_norm, sobolev_norm,
    sup_norm, BesovParams, NormDetail, NormReport, PairSampling, Resolution,
};
use eulerlab::{Grid2D, ScalarField2D};
use serde_json::json;

use crate::cells;
use crate::config::{
    DeformScanConfig, FlowSimConfig, InflateConfig, InitialData, Lemma51Config, Lemma53Config, NormKind, NormsConfig,
    ShearFlowConfig,
};
use crate::error::CliError;
use crate::output::{Artifacts, Csv};

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value, CliError> {
    Ok(serde_json::to_value(v).map_err(eulerlab::Error::from)?)
}

/// Half-width of the cube the residual samples are drawn from.
const RESIDUAL_HALF_WIDTH: f64 = 4.0;

pub fn shear_flow(c: &ShearFlowConfig) -> Result<Artifacts, CliError> {
    let spec = make_counterexample(c.alpha, c.eps)?;
    let initial = initial_gap(&spec)?;
    let mut series = Csv::new(&["time", "quotient", "measured_gap"]);
    let mut rows = Vec::new();
    for &t in &c.times {
        let quotient = discontinuity_quotient(&spec, t, 0.0)?;
        let gap = measured_gap(&spec, t, t * c.eps / 4.0)?.value;
        series.row(&cells![t, quotient, gap]);
        rows.push(json!({ "time": t, "quotient": quotient, "measured_gap": gap }));
    }
    let samples = random_samples(c.residual_samples, c.seed, RESIDUAL_HALF_WIDTH);
    let mut residual = serde_json::Map::new();
    for (name, branch) in [("u", Branch::U), ("v", Branch::V)] {
        let r = euler_residual(&spec, branch, 1.0, &samples)?;
        residual.insert(
            name.into(),
            json!({ "max_residual": r.max_residual, "evaluated": r.evaluated, "rejected": r.rejected.len() }),
        );
    }
    let summary = json!({
        "alpha": c.alpha,
        "eps": c.eps,
        "initial_gap": initial.value,
        "initial_gap_within_eps": initial.value <= c.eps,
        "times": rows,
        "residual_time": 1.0,
        "residual": residual,
    });
    Ok(Artifacts { summary, series: Some(series), ..Artifacts::default() })
}

fn flow_sim_discretization(c: &FlowSimConfig) -> Result<VortexDiscretization, CliError> {
    Ok(match c.initial {
        InitialData::Pair => {
            let d = c.separation / 2.0;
            VortexDiscretization::new(vec![[-d, 0.0], [d, 0.0]], vec![c.circulation; 2], vec![c.delta; 2])?
        }
        InitialData::Multiscale => {
            let mut disc = seed_initial_vorticity(&c.inflation, c.seeds_per_bump, c.delta_factor)?;
            disc.add_tracers(&axis_tracers(c.inflation.n_scales));
            disc
        }
    })
}

fn pair_angle(s: &VortexState) -> f64 {
    let (a, b) = (s.positions[0], s.positions[1]);
    (b[1] - a[1]).atan2(b[0] - a[0])
}

pub fn flow_sim(c: &FlowSimConfig, write_fields: bool) -> Result<Artifacts, CliError> {
    if c.checkpoint_every == 0 || !(c.t_end > 0.0) {
        return Err(CliError::Config("checkpoint_every and t_end must be positive".into()));
    }
    let state = VortexState::initial(flow_sim_discretization(c)?);
    let energy0 = energy(&state);
    let mut series = Csv::new(&["step", "time", "energy", "entry_max", "operator_max", "det_drift"]);
    let mut checkpoints = Vec::new();
    let mut record = |s: &VortexState, step: usize, series: &mut Csv| {
        let d = max_deformation(s);
        series.row(&cells![step, s.time, energy(s), d.entry_max, d.operator_max, d.det_drift]);
        if write_fields {
            checkpoints.push((format!("checkpoint_{step:06}.csv"), s.clone()));
        }
    };
    record(&state, 0, &mut series);
    let pair = c.initial == InitialData::Pair;
    let (mut angle, mut last_angle) = (0.0, if pair { pair_angle(&state) } else { 0.0 });
    let mut steps = 0;
    let control = StepControl { dt_max: c.dt, cfl: c.cfl, recheck_every: 10 };
    let last = integrate(state, c.t_end, &control, |s, step| {
        steps = step;
        if pair {
            let a = pair_angle(s);
            let mut d = a - last_angle;
            d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
            angle += d;
            last_angle = a;
        }
        if step % c.checkpoint_every == 0 {
            record(s, step, &mut series);
        }
        Ok(())
    })?;
    if steps % c.checkpoint_every != 0 {
        record(&last, steps, &mut series);
    }
    let stats = max_deformation(&last);
    let energy1 = energy(&last);
    let mut summary = json!({
        "initial": c.initial,
        "particles": last.len(),
        "steps": steps,
        "final_time": last.time,
        "total_circulation": last.disc.total_circulation(),
        "energy_initial": energy0,
        "energy_final": energy1,
        "energy_relative_drift": if energy0 != 0.0 { ((energy1 - energy0) / energy0).abs() } else { (energy1 - energy0).abs() },
        "final_deformation": stats,
    });
    if pair {
        let point_vortex_period =
            2.0 * std::f64::consts::PI.powi(2) * c.separation * c.separation / c.circulation.abs();
        summary["rotation_angle"] = json!(angle);
        summary["measured_period"] = json!(std::f64::consts::TAU * last.time / angle.abs());
        summary["point_vortex_period"] = json!(point_vortex_period);
    }
    Ok(Artifacts { summary, series: Some(series), checkpoints, ..Artifacts::default() })
}

pub fn inflate(c: &InflateConfig, write_fields: bool) -> Result<Artifacts, CliError> {
    let report = run_inflation(&c.inflation, &c.solver)?;
    let mut series = Csv::new(&["time", "entry_max", "besov_unperturbed", "besov_perturbed", "inflation_ratio", "flow_gap"]);
    for cp in &report.checkpoints {
        series.row(&cells![cp.time, cp.entry_max, cp.besov_unperturbed, cp.besov_perturbed, cp.inflation_ratio, cp.flow_gap]);
    }
    let mut fields = Vec::new();
    if write_fields {
        let grid = Grid2D::new(c.solver.field_half_width, c.solver.field_grid_n)?;
        let beta = Perturbation::for_index(c.inflation.n, c.inflation.r, report.x_star)?;
        fields.push(("beta_initial.csv".to_string(), perturbation_beta(&beta, &grid)?));
    }
    Ok(Artifacts { summary: to_value(&report)?, series: Some(series), fields, ..Artifacts::default() })
}

pub fn deform_scan(c: &DeformScanConfig, write_fields: bool) -> Result<Artifacts, CliError> {
    if c.scales.is_empty() {
        return Err(CliError::Config("deform-scan needs at least one scale count".into()));
    }
    let mut series = Csv::new(&["n_scales", "step", "time", "entry_max", "operator_max", "det_drift", "stretch_max"]);
    let mut runs = Vec::new();
    let mut checkpoints = Vec::new();
    for &n_scales in &c.scales {
        let params = InflationParams { n_scales, ..c.inflation.clone() };
        let run = run_deformation(&params, &c.solver)?;
        for s in &run.samples {
            series.row(&cells![n_scales, s.step, s.time, s.entry_max, s.operator_max, s.det_drift, s.stretch_max]);
        }
        let increasing = run.samples.windows(2).all(|w| w[1].entry_max > w[0].entry_max);
        runs.push(json!({
            "n_scales": n_scales,
            "final_entry_max": run.final_entry_max(),
            "strictly_increasing": increasing,
            "samples": run.samples.len(),
        }));
        if write_fields {
            if let Some(last) = run.checkpoints.last() {
                checkpoints.push((format!("deformation_N{n_scales}.csv"), last.clone()));
            }
        }
    }
    let mut by_scale: Vec<(usize, f64)> =
        runs.iter().map(|r| (r["n_scales"].as_u64().unwrap() as usize, r["final_entry_max"].as_f64().unwrap())).collect();
    by_scale.sort_by_key(|p| p.0);
    let ordered = by_scale.windows(2).all(|w| w[1].1 > w[0].1);
    let summary = json!({
        "m": c.inflation.m,
        "horizon": c.inflation.horizon(),
        "runs": runs,
        "final_value_increases_with_scales": ordered,
    });
    Ok(Artifacts { summary, series: Some(series), checkpoints, ..Artifacts::default() })
}

pub fn lemma51(c: &Lemma51Config) -> Result<Artifacts, CliError> {
    let scan = lemma51_scan(c.m, c.r, c.q, &c.scales)?;
    let mut series = Csv::new(&["n_scales", "lr", "gradient_lr", "w1r", "besov"]);
    for row in &scan.rows {
        series.row(&cells![row.n_scales, row.lr, row.gradient_lr, row.w1r, row.besov]);
    }
    Ok(Artifacts { summary: to_value(&scan)?, series: Some(series), ..Artifacts::default() })
}

pub fn lemma53(c: &Lemma53Config) -> Result<Artifacts, CliError> {
    let scan = lemma53_scan(c)?;
    let mut series = Csv::new(&[
        "series",
        "k",
        "lambda",
        "besov",
        "smoothed",
        "potential",
        "predicted_besov",
        "predicted_smoothed",
        "predicted_potential",
    ]);
    for (name, rows) in [("k", &scan.k_series), ("lambda", &scan.lambda_series)] {
        for r in rows {
            series.row(&cells![
                name,
                r.k,
                r.lambda,
                r.besov,
                r.smoothed,
                r.potential,
                r.predicted_besov,
                r.predicted_smoothed,
                r.predicted_potential
            ]);
        }
    }
    Ok(Artifacts { summary: to_value(&scan)?, series: Some(series), ..Artifacts::default() })
}

fn plain_report(value: f64, method: &str, field: &ScalarField2D) -> NormReport {
    NormReport { value, method: method.into(), resolution: Resolution::from(field.grid()), detail: NormDetail::None }
}

/// Dyadic separations from a quarter of the box down to the smallest one above four nodes.
fn little_holder_separations(grid: &Grid2D) -> Vec<f64> {
    let mut s = grid.half_width() / 2.0;
    let mut out = Vec::new();
    while s > 4.0 * grid.spacing() {
        out.push(s);
        s /= 2.0;
    }
    out
}

pub fn norms(c: &NormsConfig) -> Result<Artifacts, CliError> {
    let path = c.field.as_ref().ok_or_else(|| CliError::Config("norms needs a field file (`--field`)".into()))?;
    let field = eulerlab::io::read_field(path)?;
    let sampling = PairSampling::with_budget(c.budget);
    let report = match c.kind {
        NormKind::Sup => to_value(&plain_report(sup_norm(&field), "sup", &field))?,
        NormKind::Lp => to_value(&plain_report(lp_norm(&field, c.p)?, &format!("lp(p={})", c.p), &field))?,
        NormKind::Sobolev => to_value(&sobolev_norm(&field, c.s, c.p)?)?,
        NormKind::Besov => {
            let (lo, hi) = default_band(field.grid());
            let bank = build_filter_bank(field.grid(), c.l_min.unwrap_or(lo), c.l_max.unwrap_or(hi))?;
            to_value(&besov_norm(&field, &BesovParams::new(c.s, c.p, c.q)?, &bank)?)?
        }
        NormKind::Holder => to_value(&holder_seminorm(&field, c.alpha, &sampling)?)?,
        NormKind::LittleHolder => {
            let seps = little_holder_separations(field.grid());
            to_value(&little_holder_modulus(&field, c.alpha, &seps, &sampling)?)?
        }
    };
    let summary = json!({ "field": path, "kind": c.kind, "report": report });
    Ok(Artifacts { summary, ..Artifacts::default() })
}
