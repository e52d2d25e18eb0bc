use crate::error::Result;
use crate::grid::ScalarField2D;

use super::check_exponent;

pub fn sup_norm(field: &ScalarField2D) -> f64 {
    field.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Riemann sum `(Σ |f|^p h²)^{1/p}`; `p = ∞` is the sup norm.
pub fn lp_norm(field: &ScalarField2D, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(sup_norm(field));
    }
    let h = field.grid().spacing();
    let sum: f64 = if p == 1.0 {
        field.values().iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        field.values().iter().map(|v| v * v).sum()
    } else {
        field.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((sum * h * h).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn gaussian(l: f64, n: usize) -> ScalarField2D {
        ScalarField2D::from_fn(Grid2D::new(l, n).unwrap(), |x| (-(x[0] * x[0] + x[1] * x[1])).exp()).unwrap()
    }

    #[test]
    fn zero_field() {
        let f = ScalarField2D::zeros(Grid2D::new(1.0, 8).unwrap());
        assert_eq!(sup_norm(&f), 0.0);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm(&f, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn sup_of_gaussian_is_one() {
        assert_eq!(sup_norm(&gaussian(8.0, 256)), 1.0);
    }

    #[test]
    fn sup_of_root_abs_on_unit_square() {
        let f = ScalarField2D::from_fn(Grid2D::new(1.0, 64).unwrap(), |x| x[0].abs().sqrt()).unwrap();
        assert_eq!(sup_norm(&f), 1.0);
    }

    #[test]
    fn counting_measure_for_indicator() {
        let g = Grid2D::new(1.0, 16).unwrap();
        let mut v = vec![0.0; g.len()];
        for idx in [3, 17, 40, 41, 200] {
            v[idx] = 1.0;
        }
        let f = ScalarField2D::new(g, v).unwrap();
        let h = g.spacing();
        assert!((lp_norm(&f, 1.0).unwrap() - 5.0 * h * h).abs() < 1e-15);
    }

    #[test]
    fn gaussian_l2_matches_closed_form() {
        // ∫ e^{-2|x|²} = π/2
        let v = lp_norm(&gaussian(8.0, 256), 2.0).unwrap();
        assert!((v - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-6);
    }

    #[test]
    fn rejects_small_exponent() {
        assert!(lp_norm(&gaussian(1.0, 8), 0.5).is_err());
    }
}
