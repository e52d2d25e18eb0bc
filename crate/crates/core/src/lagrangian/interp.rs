//! Cubic-convolution (Keys, `a = -1/2`) interpolation on a regular lattice.

use crate::grid::ScalarField2D;

#[derive(Debug, Clone, Copy)]
pub struct Bicubic<'a> {
    origin: [f64; 2],
    spacing: f64,
    ni: usize,
    nj: usize,
    values: &'a [f64],
}

fn weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ],
        [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ],
    )
}

impl<'a> Bicubic<'a> {
    /// `values[j * ni + i]` sampled at `origin + (i, j) * spacing`.
    pub fn new(origin: [f64; 2], spacing: f64, ni: usize, nj: usize, values: &'a [f64]) -> Self {
        assert_eq!(values.len(), ni * nj, "lattice size mismatch");
        assert!(ni >= 2 && nj >= 2, "lattice needs at least 2x2 nodes");
        Self { origin, spacing, ni, nj, values }
    }

    pub fn from_field(field: &'a ScalarField2D) -> Self {
        let g = field.grid();
        let l = g.half_width();
        Self::new([-l, -l], g.spacing(), g.n(), g.n(), field.values())
    }

    fn locate(&self, x: f64, axis: usize, len: usize) -> Option<(usize, f64)> {
        let s = (x - self.origin[axis]) / self.spacing;
        let top = (len - 1) as f64;
        if !(s >= 0.0 && s <= top) {
            return None;
        }
        let cell = (s.floor() as usize).min(len - 2);
        Some((cell, s - cell as f64))
    }

    fn at(&self, i: isize, j: isize) -> f64 {
        let i = i.clamp(0, self.ni as isize - 1) as usize;
        let j = j.clamp(0, self.nj as isize - 1) as usize;
        self.values[j * self.ni + i]
    }

    /// Interpolated value and gradient, `None` outside the lattice.
    pub fn eval_with_gradient(&self, x: [f64; 2]) -> Option<(f64, [f64; 2])> {
        let (ci, ti) = self.locate(x[0], 0, self.ni)?;
        let (cj, tj) = self.locate(x[1], 1, self.nj)?;
        let (wi, dwi) = weights(ti);
        let (wj, dwj) = weights(tj);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for b in 0..4 {
            let mut row = 0.0;
            let mut drow = 0.0;
            for a in 0..4 {
                let f = self.at(ci as isize + a as isize - 1, cj as isize + b as isize - 1);
                row += wi[a] * f;
                drow += dwi[a] * f;
            }
            v += wj[b] * row;
            gx += wj[b] * drow;
            gy += dwj[b] * row;
        }
        Some((v, [gx / self.spacing, gy / self.spacing]))
    }

    pub fn eval(&self, x: [f64; 2]) -> Option<f64> {
        self.eval_with_gradient(x).map(|(v, _)| v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    #[test]
    fn reproduces_nodes_and_quadratics() {
        let g = Grid2D::new(1.0, 32).unwrap();
        let f = ScalarField2D::from_fn(g, |x| 1.0 + 2.0 * x[0] - x[1] + x[0] * x[1] + 0.5 * x[0] * x[0]).unwrap();
        let b = Bicubic::from_field(&f);
        assert_eq!(b.eval(g.point(7, 9)).unwrap(), f.at(7, 9));
        let x = [0.1234, -0.4321];
        let (v, grad) = b.eval_with_gradient(x).unwrap();
        let exact = 1.0 + 2.0 * x[0] - x[1] + x[0] * x[1] + 0.5 * x[0] * x[0];
        assert!((v - exact).abs() < 1e-12);
        assert!((grad[0] - (2.0 + x[1] + x[0])).abs() < 1e-10);
        assert!((grad[1] - (-1.0 + x[0])).abs() < 1e-10);
    }

    #[test]
    fn outside_is_none() {
        let g = Grid2D::new(1.0, 8).unwrap();
        let f = ScalarField2D::zeros(g);
        let b = Bicubic::from_field(&f);
        assert!(b.eval([1.5, 0.0]).is_none());
        assert!(b.eval([0.0, -1.0]).is_some());
    }

    #[test]
    fn smooth_function_converges() {
        let err = |n: usize| {
            let g = Grid2D::new(2.0, n).unwrap();
            let exact = |x: [f64; 2]| (x[0] * 1.3).sin() * (x[1] * 0.7).cos();
            let f = ScalarField2D::from_fn(g, exact).unwrap();
            let b = Bicubic::from_field(&f);
            (0..200)
                .map(|k| {
                    let x = [-1.0 + 0.0101 * k as f64, 0.9 - 0.0093 * k as f64];
                    (b.eval(x).unwrap() - exact(x)).abs()
                })
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(32), err(64));
        assert!(a / b > 6.0, "{a} {b}");
    }
}
