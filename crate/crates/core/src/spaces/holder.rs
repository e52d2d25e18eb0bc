//! Pair-sampled Hölder seminorms.
//!
//! Node pairs are grouped by Chebyshev offset length into dyadic bins `[2^j, 2^{j+1})`.
//! Each bin is scanned exhaustively on the subgrid of nodes whose indices are multiples of a
//! decimation factor `m` (offsets are multiples of `m` too), with `m` the smallest power of
//! two that keeps the bin within the pair budget. Axis-aligned offsets are scanned at every
//! integer length, and the four nearest-neighbour offsets over the full grid. Decimated
//! subgrids are nested, so a larger budget only ever adds pairs and the estimate, which is a
//! lower bound on the true seminorm, never decreases.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField2D, VectorField2D};

use super::{check_alpha, sup_norm, NormDetail, NormReport, Resolution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampling {
    /// Upper bound on the number of pairs evaluated per separation bin.
    pub budget: usize,
    /// Only pairs with `|x - y| < max_separation` are considered.
    pub max_separation: Option<f64>,
    /// Additional node pairs (flat indices) always evaluated.
    pub extra_pairs: Vec<(usize, usize)>,
}

impl Default for PairSampling {
    fn default() -> Self {
        Self { budget: 1 << 24, max_separation: None, extra_pairs: Vec::new() }
    }
}

impl PairSampling {
    pub fn with_budget(budget: usize) -> Self {
        Self { budget, ..Self::default() }
    }

    pub fn with_extra_pairs(mut self, pairs: Vec<(usize, usize)>) -> Self {
        self.extra_pairs = pairs;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairBin {
    pub bin: u32,
    /// Chebyshev offset range `[min_offset, max_offset)` in nodes.
    pub min_offset: usize,
    pub max_offset: usize,
    pub decimation: usize,
    pub axis_decimation: usize,
    pub pairs: u64,
    pub max_quotient: f64,
}

struct ScanResult {
    value: f64,
    bins: Vec<PairBin>,
}

fn max_abs_diff(values: &[f64], n: usize, a: isize, b: isize, stride: usize) -> (f64, u64) {
    let (i0, i1) = if a >= 0 { (0, n - a as usize) } else { ((-a) as usize, n) };
    let (j0, j1) = if b >= 0 { (0, n - b as usize) } else { ((-b) as usize, n) };
    let first = |lo: usize| lo.div_ceil(stride) * stride;
    let mut best = 0.0_f64;
    let mut count = 0u64;
    let mut j = first(j0);
    while j < j1 {
        let row = j * n;
        let row2 = ((j as isize + b) as usize) * n;
        let mut i = first(i0);
        while i < i1 {
            let d = (values[row + i] - values[row2 + (i as isize + a) as usize]).abs();
            if d > best {
                best = d;
            }
            count += 1;
            i += stride;
        }
        j += stride;
    }
    (best, count)
}

fn bin_offsets(lo: usize, hi: usize, m: usize, max_len2: Option<f64>) -> Vec<(isize, isize)> {
    let r = (hi - 1) / m * m;
    let mut out = Vec::new();
    let mut b = 0isize;
    while b <= r as isize {
        let mut a = -(r as isize);
        while a <= r as isize {
            let cheb = a.unsigned_abs().max(b.unsigned_abs());
            let half_plane = b > 0 || (b == 0 && a > 0);
            let within = max_len2.is_none_or(|l2| ((a * a + b * b) as f64) < l2);
            if half_plane && cheb >= lo && cheb < hi && within {
                out.push((a, b));
            }
            a += m as isize;
        }
        b += m as isize;
    }
    out
}

fn scan(field: &ScalarField2D, alpha: f64, policy: &PairSampling) -> Result<ScanResult> {
    let grid = field.grid();
    let n = grid.n();
    let h = grid.spacing();
    let values = field.values();
    let max_len2 = policy.max_separation.map(|s| (s / h) * (s / h));
    let budget = policy.budget.max(1) as f64;

    let mut bins = Vec::new();
    let mut value = 0.0_f64;
    let mut j = 0u32;
    loop {
        let lo = 1usize << j;
        if lo >= n {
            break;
        }
        if let Some(l2) = max_len2 {
            if (lo * lo) as f64 >= l2 {
                break;
            }
        }
        let hi = (lo << 1).min(n);

        let mut m = 1usize;
        let mut offsets = bin_offsets(lo, hi, m, max_len2);
        while m < lo {
            let base = (n / m) as f64 * (n / m) as f64;
            if base * offsets.len() as f64 <= budget {
                break;
            }
            m <<= 1;
            offsets = bin_offsets(lo, hi, m, max_len2);
        }

        let mut axis_m = 1usize;
        let axis_len = (lo..hi).filter(|&a| max_len2.is_none_or(|l2| ((a * a) as f64) < l2)).count();
        while axis_m < n && (n / axis_m) as f64 * (n / axis_m) as f64 * 2.0 * axis_len as f64 > budget {
            axis_m <<= 1;
        }
        let mut axis_offsets = Vec::with_capacity(2 * axis_len);
        for a in (lo..hi).filter(|&a| max_len2.is_none_or(|l2| ((a * a) as f64) < l2)) {
            axis_offsets.push((a as isize, 0isize));
            axis_offsets.push((0isize, a as isize));
        }

        let quotient = |a: isize, b: isize, stride: usize| {
            let (d, count) = max_abs_diff(values, n, a, b, stride);
            let dist = h * ((a * a + b * b) as f64).sqrt();
            (d / dist.powf(alpha), count)
        };
        let mut results: Vec<(f64, u64)> = offsets.par_iter().map(|&(a, b)| quotient(a, b, m)).collect();
        results.extend(axis_offsets.par_iter().map(|&(a, b)| quotient(a, b, axis_m)).collect::<Vec<_>>());
        if lo == 1 {
            // nearest neighbours on the full grid
            results.extend([(1, 0), (0, 1), (1, 1), (-1, 1)].iter().map(|&(a, b)| quotient(a, b, 1)));
        }
        let (bin_max, pairs) = results.iter().fold((0.0_f64, 0u64), |(mx, c), &(q, k)| (mx.max(q), c + k));
        value = value.max(bin_max);
        bins.push(PairBin {
            bin: j,
            min_offset: lo,
            max_offset: hi,
            decimation: m,
            axis_decimation: axis_m,
            pairs,
            max_quotient: bin_max,
        });
        j += 1;
    }

    for &(p, q) in &policy.extra_pairs {
        if p >= values.len() || q >= values.len() {
            return Err(Error::input(format!("extra pair ({p}, {q}) outside the grid")));
        }
        if p == q {
            continue;
        }
        let (pi, pj) = grid.node(p);
        let (qi, qj) = grid.node(q);
        let x = grid.point(pi, pj);
        let y = grid.point(qi, qj);
        let dist = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        if policy.max_separation.is_some_and(|s| dist >= s) {
            continue;
        }
        value = value.max((values[p] - values[q]).abs() / dist.powf(alpha));
    }

    Ok(ScanResult { value, bins })
}

/// Lower bound on `sup_{x≠y} |f(x) - f(y)| / |x - y|^α` over the sampled node pairs.
pub fn holder_seminorm(field: &ScalarField2D, alpha: f64, sampling: &PairSampling) -> Result<NormReport> {
    check_alpha(alpha)?;
    let res = scan(field, alpha, sampling)?;
    Ok(NormReport {
        value: res.value,
        method: format!("holder_seminorm(alpha={alpha}) pair-sampled lower bound"),
        resolution: Resolution::from(field.grid()),
        detail: NormDetail::Pairs { bins: res.bins, extra_pairs: sampling.extra_pairs.len() },
    })
}

/// `‖u‖_{C^1} + Σ [∂_k u_c]_α` with finite-difference partials.
pub fn holder_norm_c1alpha(field: &VectorField2D, alpha: f64, sampling: &PairSampling) -> Result<NormReport> {
    check_alpha(alpha)?;
    let mut parts = Vec::new();
    let mut total = 0.0;
    for (c, comp) in field.components().iter().enumerate() {
        let s = sup_norm(comp);
        parts.push((format!("sup u{}", c + 1), s));
        total += s;
    }
    for (c, comp) in field.components().iter().enumerate() {
        for k in 0..2 {
            let d = comp.partial(k);
            let s = sup_norm(&d);
            let semi = scan(&d, alpha, sampling)?.value;
            parts.push((format!("sup d{}u{}", k + 1, c + 1), s));
            parts.push((format!("holder d{}u{}", k + 1, c + 1), semi));
            total += s + semi;
        }
    }
    Ok(NormReport {
        value: total,
        method: format!("holder_norm_c1alpha(alpha={alpha})"),
        resolution: Resolution::from(field.grid()),
        detail: NormDetail::Sum { parts },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittleHolderProfile {
    pub alpha: f64,
    pub separations: Vec<f64>,
    pub profile: Vec<f64>,
    /// Least-squares slope of `log profile` against `log separation`.
    pub slope: Option<f64>,
    pub vanishing: bool,
}

/// Smallest log-log decay rate of the modulus counted as vanishing; slower decay cannot be
/// told apart from a flat profile over the one or two decades a grid resolves.
pub const VANISHING_SLOPE: f64 = 0.1;

/// Hölder modulus restricted to separations below each entry of `separations`.
pub fn little_holder_modulus(
    field: &ScalarField2D,
    alpha: f64,
    separations: &[f64],
    sampling: &PairSampling,
) -> Result<LittleHolderProfile> {
    check_alpha(alpha)?;
    let h = field.grid().spacing();
    if separations.is_empty() {
        return Err(Error::input("no separation bins given"));
    }
    if separations.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::input("separation bins must be strictly decreasing"));
    }
    if let Some(s) = separations.iter().find(|&&s| s <= 2.0 * h) {
        return Err(Error::resolution(format!("separation {s} is not above twice the grid spacing {h}")));
    }
    let mut profile = Vec::with_capacity(separations.len());
    for &s in separations {
        let policy = PairSampling { max_separation: Some(s), ..sampling.clone() };
        profile.push(scan(field, alpha, &policy)?.value);
    }

    let slope = log_log_slope(separations, &profile);
    let first = profile[0];
    let last = *profile.last().unwrap();
    let vanishing = if profile.iter().all(|&v| v == 0.0) {
        true
    } else {
        slope.is_some_and(|s| s >= VANISHING_SLOPE) && last < first
    };
    Ok(LittleHolderProfile { alpha, separations: separations.to_vec(), profile, slope, vanishing })
}

fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(_, &v)| v > 0.0).map(|(&a, &b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn brute_force(field: &ScalarField2D, alpha: f64) -> f64 {
        let g = field.grid();
        let v = field.values();
        let mut best = 0.0_f64;
        for p in 0..v.len() {
            let x = g.point(p % g.n(), p / g.n());
            for q in (p + 1)..v.len() {
                let y = g.point(q % g.n(), q / g.n());
                let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
                best = best.max((v[p] - v[q]).abs() / d.powf(alpha));
            }
        }
        best
    }

    #[test]
    fn constant_field_has_zero_seminorm() {
        let f = ScalarField2D::from_fn(Grid2D::new(1.0, 32).unwrap(), |_| 3.5).unwrap();
        assert_eq!(holder_seminorm(&f, 0.5, &PairSampling::default()).unwrap().value, 0.0);
    }

    #[test]
    fn kink_quotient_is_one() {
        let f = ScalarField2D::from_fn(Grid2D::new(1.0, 128).unwrap(), |x| x[0].abs().sqrt()).unwrap();
        let v = holder_seminorm(&f, 0.5, &PairSampling::default()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn exhaustive_on_small_grid_matches_brute_force() {
        let f = ScalarField2D::from_fn(Grid2D::new(2.0, 16).unwrap(), |x| (x[0] * 1.3).sin() * x[1].cos())
            .unwrap();
        let v = holder_seminorm(&f, 0.3, &PairSampling::default()).unwrap().value;
        assert!((v - brute_force(&f, 0.3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_alpha() {
        let f = ScalarField2D::zeros(Grid2D::new(1.0, 8).unwrap());
        assert!(holder_seminorm(&f, 1.0, &PairSampling::default()).is_err());
        assert!(holder_seminorm(&f, 0.0, &PairSampling::default()).is_err());
    }

    #[test]
    fn modulus_rejects_unresolved_bins() {
        let f = ScalarField2D::zeros(Grid2D::new(1.0, 16).unwrap());
        assert!(little_holder_modulus(&f, 0.5, &[0.5, 0.1], &PairSampling::default()).is_err());
        assert!(little_holder_modulus(&f, 0.5, &[0.5, 0.6], &PairSampling::default()).is_err());
    }

    #[test]
    fn cusp_is_flat_and_smooth_field_vanishes() {
        let cusp = ScalarField2D::from_fn(Grid2D::new(1.0, 128).unwrap(), |x| x[0].abs().sqrt()).unwrap();
        let p = little_holder_modulus(&cusp, 0.5, &[0.5, 0.25, 0.125, 0.0625], &PairSampling::default()).unwrap();
        assert!(!p.vanishing);
        let smooth = ScalarField2D::from_fn(Grid2D::new(1.0, 128).unwrap(), |x| (2.0 * x[0]).sin()).unwrap();
        let p = little_holder_modulus(&smooth, 0.5, &[0.5, 0.25, 0.125, 0.0625], &PairSampling::default()).unwrap();
        assert!(p.vanishing, "{:?}", p.slope);
    }

    #[test]
    fn zero_field_profile_vanishes() {
        let f = ScalarField2D::zeros(Grid2D::new(1.0, 64).unwrap());
        let p = little_holder_modulus(&f, 0.5, &[0.5, 0.25, 0.125], &PairSampling::default()).unwrap();
        assert!(p.vanishing);
        assert!(p.profile.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_plateau_field_derivative_part() {
        // u = (x2, -x1) times a plateau that is 1 on the whole grid: each of the two
        // nonzero partials contributes exactly 1 to the C^1 part and 0 to the seminorm.
        let g = Grid2D::new(1.0, 32).unwrap();
        let u1 = ScalarField2D::from_fn(g, |x| x[1]).unwrap();
        let u2 = ScalarField2D::from_fn(g, |x| -x[0]).unwrap();
        let report = holder_norm_c1alpha(&VectorField2D::new(u1, u2).unwrap(), 0.5, &PairSampling::default())
            .unwrap();
        let NormDetail::Sum { parts } = report.detail else { panic!() };
        let derivative: f64 = parts.iter().filter(|(k, _)| k.starts_with("sup d")).map(|(_, v)| v).sum();
        let semi: f64 = parts.iter().filter(|(k, _)| k.starts_with("holder")).map(|(_, v)| v).sum();
        assert!((derivative - 2.0).abs() < 1e-12);
        assert!(semi < 1e-10);
    }

    #[test]
    fn zero_vector_field() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let z = VectorField2D::new(ScalarField2D::zeros(g), ScalarField2D::zeros(g)).unwrap();
        assert_eq!(holder_norm_c1alpha(&z, 0.5, &PairSampling::default()).unwrap().value, 0.0);
    }
}
