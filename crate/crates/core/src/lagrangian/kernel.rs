//! Two-dimensional Biot–Savart kernel and its Krasny-regularized form.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const INV_2PI: f64 = 0.5 / PI;

/// `K(x) = (1/2π)(-x2, x1) / |x|^2`.
pub fn kernel_k2(x: [f64; 2]) -> Result<[f64; 2]> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    if r2 == 0.0 {
        return Err(Error::Singularity);
    }
    Ok([-INV_2PI * x[1] / r2, INV_2PI * x[0] / r2])
}

/// `K^δ(x) = (1/2π)(-x2, x1) / (|x|^2 + δ^2)`.
#[inline]
pub fn blob_kernel(x: [f64; 2], delta2: f64) -> [f64; 2] {
    let s = x[0] * x[0] + x[1] * x[1] + delta2;
    if s == 0.0 {
        return [0.0, 0.0];
    }
    [-INV_2PI * x[1] / s, INV_2PI * x[0] / s]
}

/// `K^δ(x)` and `J[i][j] = ∂_j K^δ_i(x)`.
#[inline]
pub fn blob_kernel_with_gradient(x: [f64; 2], delta2: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let s = x[0] * x[0] + x[1] * x[1] + delta2;
    if s == 0.0 {
        return ([0.0, 0.0], [[0.0; 2]; 2]);
    }
    let inv = INV_2PI / s;
    let inv2 = 2.0 * inv / s;
    let xy = x[0] * x[1] * inv2;
    (
        [-x[1] * inv, x[0] * inv],
        [[xy, -inv + x[1] * x[1] * inv2], [inv - x[0] * x[0] * inv2, -xy]],
    )
}

/// Stream function of a unit blob, `(1/4π) ln(|x|^2 + δ^2)`.
pub fn blob_stream(x: [f64; 2], delta2: f64) -> f64 {
    0.5 * INV_2PI * (x[0] * x[0] + x[1] * x[1] + delta2).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values() {
        let a = kernel_k2([1.0, 0.0]).unwrap();
        assert_eq!(a, [0.0, INV_2PI]);
        let b = kernel_k2([0.0, 1.0]).unwrap();
        assert_eq!(b, [-INV_2PI, 0.0]);
        assert!(matches!(kernel_k2([0.0, 0.0]), Err(Error::Singularity)));
    }

    #[test]
    fn magnitude_identity() {
        for &(x, y) in &[(0.3, -1.2), (5.0, 2.0), (-1e-3, 4e-3)] {
            let k = kernel_k2([x, y]).unwrap();
            let r = f64::hypot(x, y);
            assert!((k[0].hypot(k[1]) - INV_2PI / r).abs() < 1e-12 * INV_2PI / r);
        }
    }

    #[test]
    fn blob_converges_to_singular_kernel() {
        let x = [0.7, -0.4];
        let k = kernel_k2(x).unwrap();
        let b = blob_kernel(x, 1e-12);
        assert!((k[0] - b[0]).abs() < 1e-11 && (k[1] - b[1]).abs() < 1e-11);
    }

    #[test]
    fn gradient_matches_differences() {
        let d2 = 0.04;
        let e = 1e-6;
        for &x in &[[0.3, -0.2], [1.0, 2.0], [-0.05, 0.01]] {
            let (_, g) = blob_kernel_with_gradient(x, d2);
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += e;
                xm[j] -= e;
                let kp = blob_kernel(xp, d2);
                let km = blob_kernel(xm, d2);
                for i in 0..2 {
                    let fd = (kp[i] - km[i]) / (2.0 * e);
                    assert!((g[i][j] - fd).abs() < 1e-6, "{i}{j}");
                }
            }
            assert!((g[0][0] + g[1][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn stream_function_generates_kernel() {
        // K^δ = ∇^⊥ψ = (-∂2ψ, ∂1ψ)
        let d2 = 0.01;
        let e = 1e-6;
        let x = [0.4, 0.9];
        let d1 = (blob_stream([x[0] + e, x[1]], d2) - blob_stream([x[0] - e, x[1]], d2)) / (2.0 * e);
        let d2v = (blob_stream([x[0], x[1] + e], d2) - blob_stream([x[0], x[1] - e], d2)) / (2.0 * e);
        let k = blob_kernel(x, d2);
        assert!((k[0] + d2v).abs() < 1e-8 && (k[1] - d1).abs() < 1e-8);
    }
}
