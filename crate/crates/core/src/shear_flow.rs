//! Closed-form three-dimensional shear flows `u = (f(x2), 0, h(x1 - t f(x2)))`.
//!
//! Two such flows with nearby `f`, `g` and a common `h` whose derivative has a cusp
//! `|x1|^α` separate instantly in `C^{1,α}`: the x1-derivative of the third component
//! difference has Hölder quotient exactly 2 between the points `t g(c)` and `t f(c)`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid2D, ScalarField2D};
use crate::quad::GaussLegendre;
use crate::spaces::{check_alpha, holder_seminorm, sup_norm, NormDetail, NormReport, PairSampling, Resolution};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Half-width of the plateau on which `f != g`.
pub const PLATEAU_HALF_WIDTH: f64 = 1.0;
/// Width of the plateau's smooth transition to zero.
const PLATEAU_RAMP: f64 = 8.0;

/// Kink margin in the argument `x1 - t f(x2)`.
pub fn kink_margin() -> f64 {
    10.0 * f64::EPSILON.sqrt()
}

/// Bounded real function of one variable with its exact derivative.
#[derive(Clone)]
pub struct Profile1D {
    value: RealFn,
    derivative: RealFn,
    /// Upper bound on `sup |p|`.
    pub sup_bound: f64,
    /// Upper bound on the α-Hölder seminorm of `p'`.
    pub holder_bound: f64,
    pub label: String,
}

impl Profile1D {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        sup_bound: f64,
        holder_bound: f64,
        label: impl Into<String>,
    ) -> Self {
        Self { value: Arc::new(value), derivative: Arc::new(derivative), sup_bound, holder_bound, label: label.into() }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile1D")
            .field("label", &self.label)
            .field("sup_bound", &self.sup_bound)
            .field("holder_bound", &self.holder_bound)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct ShearFlowSpec {
    pub f: Profile1D,
    pub g: Profile1D,
    pub h: Profile1D,
    pub alpha: f64,
    /// `max(‖f‖_∞, ‖g‖_∞)`.
    pub a: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    U,
    V,
}

impl ShearFlowSpec {
    pub fn profile(&self, branch: Branch) -> &Profile1D {
        match branch {
            Branch::U => &self.f,
            Branch::V => &self.g,
        }
    }

    /// Analytic bound on `‖f - g‖_{1,α}` as `sup + sup|·'| + [·']_α`.
    pub fn initial_gap_bound(&self) -> f64 {
        let (s1, s2) = step_bounds();
        0.5 * self.epsilon * (1.0 + s1 / PLATEAU_RAMP + plateau_holder_bound(self.alpha, s1, s2))
    }
}

/// Smooth step on `[0, 1]` with its first two derivatives; flat to all orders at both ends.
fn step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let u = 1.0 - t;
    let phi = 1.0 / u - 1.0 / t;
    let s = 1.0 / (1.0 + (-phi).exp());
    let w = s * (1.0 - s);
    if w == 0.0 {
        return (s, 0.0, 0.0);
    }
    let d1 = 1.0 / (u * u) + 1.0 / (t * t);
    let d2 = 2.0 / (u * u * u) - 2.0 / (t * t * t);
    (s, w * d1, w * ((1.0 - 2.0 * s) * d1 * d1 + d2))
}

/// Upper bounds on `sup |step'|` and `sup |step''|` from dense sampling with a 1% margin.
fn step_bounds() -> (f64, f64) {
    static BOUNDS: OnceLock<(f64, f64)> = OnceLock::new();
    *BOUNDS.get_or_init(|| {
        let m = 200_000;
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for k in 1..m {
            let (_, d1, d2) = step(k as f64 / m as f64);
            s1 = s1.max(d1.abs());
            s2 = s2.max(d2.abs());
        }
        (1.01 * s1, 1.01 * s2)
    })
}

/// `[w']_α ≤ osc(w')^{1-α} · sup|w''|^α` for the unit plateau.
fn plateau_holder_bound(alpha: f64, s1: f64, s2: f64) -> f64 {
    (2.0 * s1 / PLATEAU_RAMP).powf(1.0 - alpha) * (s2 / (PLATEAU_RAMP * PLATEAU_RAMP)).powf(alpha)
}

fn plateau(x: f64) -> f64 {
    let r = x.abs();
    if r <= PLATEAU_HALF_WIDTH {
        1.0
    } else {
        1.0 - step((r - PLATEAU_HALF_WIDTH) / PLATEAU_RAMP).0
    }
}

fn plateau_derivative(x: f64) -> f64 {
    let r = x.abs();
    if r <= PLATEAU_HALF_WIDTH {
        0.0
    } else {
        -x.signum() * step((r - PLATEAU_HALF_WIDTH) / PLATEAU_RAMP).1 / PLATEAU_RAMP
    }
}

/// `h'(x) = |x|^α` on `[-2a, 2a]`, cut off to zero over one further unit.
fn cusp_derivative(x: f64, alpha: f64, a: f64) -> f64 {
    let r = x.abs();
    let core = r.powf(alpha);
    if r <= 2.0 * a {
        core
    } else {
        core * (1.0 - step(r - 2.0 * a).0)
    }
}

fn cusp(alpha: f64, a: f64) -> (impl Fn(f64) -> f64 + Send + Sync + 'static, f64) {
    let rule = GaussLegendre::new(20);
    let inner = 2.0 * a;
    let core_end = inner.powf(1.0 + alpha) / (1.0 + alpha);
    let tail = move |r: f64| core_end + rule.integrate_composite(inner, r, 4, |s| cusp_derivative(s, alpha, a));
    let plateau_value = tail(inner + 1.0);
    let h = move |x: f64| {
        let r = x.abs();
        let mag = if r <= inner {
            r.powf(1.0 + alpha) / (1.0 + alpha)
        } else if r >= inner + 1.0 {
            plateau_value
        } else {
            tail(r)
        };
        x.signum() * mag
    };
    (h, plateau_value)
}

/// Canonical pair of shear flows: `f ≡ 1 - ε/2`, `g = f + (ε/2) w` with `w` a plateau equal
/// to 1 on `[-1, 1]`, and `a = 1`.
pub fn make_counterexample(alpha: f64, epsilon: f64) -> Result<ShearFlowSpec> {
    check_alpha(alpha)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::input(format!("epsilon must be positive, got {epsilon}")));
    }
    if epsilon > 1.0 {
        return Err(Error::input(format!("epsilon {epsilon} exceeds 1; the construction fixes a = 1")));
    }
    let a = 1.0;
    let c0 = 1.0 - 0.5 * epsilon;
    let half = 0.5 * epsilon;
    let (s1, s2) = step_bounds();

    let f = Profile1D::new(move |_| c0, |_| 0.0, c0, 0.0, format!("constant {c0}"));
    let g = Profile1D::new(
        move |x| c0 + half * plateau(x),
        move |x| half * plateau_derivative(x),
        1.0,
        half * plateau_holder_bound(alpha, s1, s2),
        format!("{c0} + {half} * plateau"),
    );
    let (h_value, h_sup) = cusp(alpha, a);
    let h = Profile1D::new(
        h_value,
        move |x| cusp_derivative(x, alpha, a),
        h_sup,
        1.0 + (3.0 * a).powf(alpha) * s1.powf(alpha),
        format!("antiderivative of |x|^{alpha} with cutoff"),
    );
    let spec = ShearFlowSpec { f, g, h, alpha, a, epsilon };
    if spec.initial_gap_bound() >= epsilon {
        return Err(Error::input("difference budget cannot be met"));
    }
    Ok(spec)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::input(format!("time must be non-negative, got {t}")));
    }
    Ok(())
}

pub fn eval_velocity(spec: &ShearFlowSpec, branch: Branch, t: f64, x: [f64; 3]) -> Result<[f64; 3]> {
    check_time(t)?;
    let p = spec.profile(branch).value(x[1]);
    Ok([p, 0.0, spec.h.value(x[0] - t * p)])
}

/// `J[i][j] = ∂_j u_i`.
pub fn velocity_jacobian(spec: &ShearFlowSpec, branch: Branch, t: f64, x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    check_time(t)?;
    let prof = spec.profile(branch);
    let p = prof.value(x[1]);
    let dp = prof.derivative(x[1]);
    let dh = spec.h.derivative(x[0] - t * p);
    Ok([[0.0, dp, 0.0], [0.0; 3], [dh, -t * dp * dh, 0.0]])
}

pub fn velocity_time_derivative(spec: &ShearFlowSpec, branch: Branch, t: f64, x: [f64; 3]) -> Result<[f64; 3]> {
    check_time(t)?;
    let p = spec.profile(branch).value(x[1]);
    Ok([0.0, 0.0, -p * spec.h.derivative(x[0] - t * p)])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub evaluated: usize,
    /// Indices of samples within the kink margin.
    pub rejected: Vec<usize>,
}

/// `max |∂_t u + (u·∇)u|` over the samples, pressure zero.
pub fn euler_residual(spec: &ShearFlowSpec, branch: Branch, t: f64, samples: &[[f64; 3]]) -> Result<ResidualReport> {
    check_time(t)?;
    let margin = kink_margin();
    let mut report = ResidualReport { max_residual: 0.0, evaluated: 0, rejected: Vec::new() };
    for (k, &x) in samples.iter().enumerate() {
        let p = spec.profile(branch).value(x[1]);
        if (x[0] - t * p).abs() < margin {
            report.rejected.push(k);
            continue;
        }
        let u = eval_velocity(spec, branch, t, x)?;
        let jac = velocity_jacobian(spec, branch, t, x)?;
        let ut = velocity_time_derivative(spec, branch, t, x)?;
        for i in 0..3 {
            let r = ut[i] + (0..3).map(|j| jac[i][j] * u[j]).sum::<f64>();
            report.max_residual = report.max_residual.max(r.abs());
        }
        report.evaluated += 1;
    }
    Ok(report)
}

/// Uniform samples in `[-half_width, half_width]^3` from a seeded ChaCha stream.
pub fn random_samples(count: usize, seed: u64, half_width: f64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| std::array::from_fn(|_| rng.gen_range(-half_width..=half_width)))
        .collect()
}

fn check_designated(spec: &ShearFlowSpec, t: f64, c: f64) -> Result<(f64, f64)> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::input(format!("time must lie in (0, 1], got {t}")));
    }
    if !(c.abs() < spec.a) {
        return Err(Error::input(format!("c = {c} lies outside (-a, a)")));
    }
    let tf = t * spec.f.value(c);
    let tg = t * spec.g.value(c);
    let w = 2.0 * spec.a;
    if tf.abs() > w || tg.abs() > w || (tg - tf).abs() > w {
        return Err(Error::input(format!("designated points for t = {t}, c = {c} leave the cusp window")));
    }
    if tf == tg {
        return Err(Error::input(format!("f and g agree at c = {c}")));
    }
    Ok((tf, tg))
}

/// Hölder quotient of `x1 ↦ h'(x1 - t f(c)) - h'(x1 - t g(c))` between `t g(c)` and `t f(c)`.
pub fn discontinuity_quotient(spec: &ShearFlowSpec, t: f64, c: f64) -> Result<f64> {
    let (tf, tg) = check_designated(spec, t, c)?;
    let field = |x1: f64| spec.h.derivative(x1 - tf) - spec.h.derivative(x1 - tg);
    Ok((field(tg) - field(tf)).abs() / (tg - tf).abs().powf(spec.alpha))
}

/// Measured `‖f - g‖_{1,α}` as `sup + sup|·'| + [·']_α` on a grid of x2-only samples.
pub fn initial_gap(spec: &ShearFlowSpec) -> Result<NormReport> {
    let grid = Grid2D::new(16.0, 256)?;
    let diff = ScalarField2D::from_fn(grid, |x| spec.f.value(x[1]) - spec.g.value(x[1]))?;
    let deriv = diff.partial(1);
    let semi = holder_seminorm(&deriv, spec.alpha, &PairSampling::with_budget(1 << 18))?.value;
    let parts = vec![("sup".to_string(), sup_norm(&diff)), ("sup derivative".to_string(), sup_norm(&deriv)), ("holder derivative".to_string(), semi)];
    Ok(NormReport {
        value: parts.iter().map(|p| p.1).sum(),
        method: format!("initial shear difference c1alpha(alpha={})", spec.alpha),
        resolution: Resolution::from(&grid),
        detail: NormDetail::Sum { parts },
    })
}

const GAP_WINDOW: usize = 64;
const GAP_WINDOW_MAX: usize = 4096;

/// Lower bound on `‖u(t) - v(t)‖_{1,α}`: the Hölder seminorm of `∂1(u3 - v3)` on a local
/// `x1 × x2` window through the designated points at `c = 0`, plus the measured initial
/// difference carried unchanged by the first component.
///
/// The window spacing is `(t g(0) - t f(0)) / k` with `k` the smallest integer giving a
/// spacing no larger than `spacing`, so both designated points are nodes.
pub fn measured_gap(spec: &ShearFlowSpec, t: f64, spacing: f64) -> Result<NormReport> {
    check_time(t)?;
    let initial = initial_gap(spec)?;
    if t == 0.0 {
        return Ok(initial);
    }
    if !(spacing > 0.0) || spacing > t * spec.epsilon / 4.0 {
        return Err(Error::resolution(format!(
            "spacing {spacing} cannot resolve the separation t*eps = {}",
            t * spec.epsilon
        )));
    }
    let c = 0.0;
    let (tf, tg) = check_designated(spec, t, c)?;
    let d = tg - tf;
    let k = (d.abs() / spacing).ceil().max(2.0) as usize;
    let n = (4 * k).next_power_of_two().max(GAP_WINDOW);
    if n > GAP_WINDOW_MAX {
        return Err(Error::resolution(format!("window of {n} nodes per side exceeds {GAP_WINDOW_MAX}")));
    }
    let hs = d.abs() / k as f64;
    let grid = Grid2D::new(0.5 * n as f64 * hs, n)?;
    let i0 = n / 2 - k / 2;
    let j0 = n / 2;
    let x1_at = |i: usize| {
        let off = (i as f64 - i0 as f64) * hs;
        if d > 0.0 {
            tf + off
        } else {
            tf - off
        }
    };
    let values = (0..grid.len())
        .map(|idx| {
            let (i, j) = grid.node(idx);
            let x1 = x1_at(i);
            let x2 = c + (j as f64 - j0 as f64) * hs;
            let pf = t * spec.f.value(x2);
            let pg = t * spec.g.value(x2);
            spec.h.derivative(x1 - pf) - spec.h.derivative(x1 - pg)
        })
        .collect();
    let field = ScalarField2D::new(grid, values)?;
    let sampling = PairSampling::default().with_extra_pairs(vec![(grid.index(i0, j0), grid.index(i0 + k, j0))]);
    let window = holder_seminorm(&field, spec.alpha, &sampling)?;
    let parts = vec![("holder d1(u3 - v3)".to_string(), window.value), ("initial difference".to_string(), initial.value)];
    Ok(NormReport {
        value: window.value + initial.value,
        method: format!("shear gap lower bound(alpha={}, t={t})", spec.alpha),
        resolution: Resolution::from(&grid),
        detail: NormDetail::Sum { parts },
    })
}
