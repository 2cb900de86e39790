use std::f64::consts::PI;

use serde::Serialize;

/// Real Fourier basis of L^2(0, P), orthonormal in the plain L^2 product:
/// 1/sqrt(P), sqrt(2/P) cos(2 pi m x / P), sqrt(2/P) sin(2 pi m x / P) for
/// m = 1..modes, in that order (constant first, then cos/sin pairs).
/// With `mean_zero` the constant is dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralBasis {
    pub period: f64,
    pub modes: usize,
    pub mean_zero: bool,
}

impl SpectralBasis {
    pub fn new(period: f64, modes: usize, mean_zero: bool) -> Self {
        Self { period, modes, mean_zero }
    }

    pub fn dim(&self) -> usize {
        2 * self.modes + usize::from(!self.mean_zero)
    }

    /// Index into the full basis.
    #[inline]
    pub fn full_index(&self, k: usize) -> usize {
        k + usize::from(self.mean_zero)
    }

    /// Mode number m of basis function k (0 for the constant).
    pub fn mode_number(&self, k: usize) -> usize {
        self.full_index(k).div_ceil(2)
    }

    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * PI * self.mode_number(k) as f64 / self.period
    }

    /// All full-basis functions at x, written into `out` (length 2 modes + 1).
    pub fn eval_full(&self, x: f64, out: &mut [f64]) {
        let c0 = 1.0 / self.period.sqrt();
        let c1 = (2.0 / self.period).sqrt();
        out[0] = c0;
        let (s1, k1) = (2.0 * PI * x / self.period).sin_cos();
        let (mut s, mut c) = (s1, k1);
        for m in 1..=self.modes {
            out[2 * m - 1] = c1 * c;
            out[2 * m] = c1 * s;
            (c, s) = (c * k1 - s * s1, s * k1 + c * s1);
        }
    }

    pub fn eval(&self, k: usize, x: f64) -> f64 {
        let j = self.full_index(k);
        if j == 0 {
            return 1.0 / self.period.sqrt();
        }
        let arg = 2.0 * PI * j.div_ceil(2) as f64 * x / self.period;
        let c1 = (2.0 / self.period).sqrt();
        if j % 2 == 1 {
            c1 * arg.cos()
        } else {
            c1 * arg.sin()
        }
    }

    /// Second derivative is -wavenumber^2 times the function.
    pub fn laplacian_eigenvalue(&self, k: usize) -> f64 {
        self.wavenumber(k).powi(2)
    }

    /// Coefficients of samples on the uniform grid x_i = i P / n.
    pub fn project(&self, samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        let h = self.period / n as f64;
        let mut row = vec![0.0; 2 * self.modes + 1];
        let mut out = vec![0.0; 2 * self.modes + 1];
        for (i, &f) in samples.iter().enumerate() {
            self.eval_full(i as f64 * h, &mut row);
            for (o, r) in out.iter_mut().zip(&row) {
                *o += h * f * r;
            }
        }
        if self.mean_zero {
            out.remove(0);
        }
        out
    }

    pub fn synthesize(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| c * self.eval(k, x)).sum()
    }

    pub fn synthesize_derivative(&self, coeffs: &[f64], x: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let j = self.full_index(k);
                if j == 0 {
                    return 0.0;
                }
                let kw = self.wavenumber(k);
                let arg = kw * x;
                let c1 = (2.0 / self.period).sqrt();
                if j % 2 == 1 {
                    -c * c1 * kw * arg.sin()
                } else {
                    c * c1 * kw * arg.cos()
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ordering_and_orthonormality() {
        let b = SpectralBasis::new(3.0, 4, false);
        assert_eq!(b.dim(), 9);
        assert_eq!(b.mode_number(0), 0);
        assert_eq!(b.mode_number(1), 1);
        assert_eq!(b.mode_number(2), 1);
        assert_eq!(b.mode_number(8), 4);
        let z = SpectralBasis::new(3.0, 4, true);
        assert_eq!(z.dim(), 8);
        assert_eq!(z.mode_number(0), 1);
        let n = 32;
        for j in 0..9 {
            let col: Vec<f64> = (0..n).map(|i| b.eval(j, i as f64 * 3.0 / n as f64)).collect();
            let c = b.project(&col);
            for (k, v) in c.iter().enumerate() {
                assert_relative_eq!(*v, if k == j { 1.0 } else { 0.0 }, epsilon = 1e-13);
            }
        }
        let mut row = vec![0.0; 9];
        b.eval_full(0.77, &mut row);
        for (j, r) in row.iter().enumerate() {
            assert_relative_eq!(*r, b.eval(j, 0.77), epsilon = 1e-13);
        }
    }
}
