//! Real trigonometric series on a periodic grid: interpolation, spectral
//! derivatives and the periodic Poisson inverse.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// f(x) = a[0] + sum_k a[k] cos(k w x) + b[k] sin(k w x), w = 2 pi / period.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSeries {
    pub period: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn forward(samples: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn inverse(mut spec: Vec<Complex<f64>>) -> Vec<f64> {
    let n = spec.len();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wavenumber index of FFT bin `k` for length `n`.
#[inline]
fn signed(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

impl TrigSeries {
    /// Interpolant through uniform samples x_i = i * period / n.
    pub fn from_samples(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        let spec = forward(samples);
        let kmax = n / 2;
        let mut a = vec![0.0; kmax + 1];
        let mut b = vec![0.0; kmax + 1];
        a[0] = spec[0].re / n as f64;
        for k in 1..=kmax {
            if 2 * k == n {
                a[k] = spec[k].re / n as f64;
            } else {
                a[k] = 2.0 * spec[k].re / n as f64;
                b[k] = -2.0 * spec[k].im / n as f64;
            }
        }
        // drop trailing roundoff so evaluation along orbits stays cheap
        let scale = a.iter().chain(&b).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut keep = kmax;
        while keep > 0 && a[keep].abs().max(b[keep].abs()) <= 1e-17 * scale.max(f64::MIN_POSITIVE) {
            keep -= 1;
        }
        a.truncate(keep + 1);
        b.truncate(keep + 1);
        Self { period, a, b }
    }

    pub fn zero(period: f64) -> Self {
        Self { period, a: vec![0.0], b: vec![0.0] }
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().chain(&self.b).all(|v| *v == 0.0)
    }

    /// Value and first derivative at x.
    #[inline]
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let w = 2.0 * PI / self.period;
        let theta = w * x;
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut f = self.a[0];
        let mut df = 0.0;
        for k in 1..self.a.len() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            let kw = k as f64 * w;
            f += self.a[k] * c + self.b[k] * s;
            df += kw * (self.b[k] * c - self.a[k] * s);
        }
        (f, df)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let w = 2.0 * PI / self.period;
        let theta = w * x;
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut f = self.a[0];
        for k in 1..self.a.len() {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            f += self.a[k] * c + self.b[k] * s;
        }
        f
    }

    pub fn mean(&self) -> f64 {
        self.a[0]
    }
}

/// Spectral derivative of uniform periodic samples. The Nyquist bin is
/// zeroed for odd orders.
pub fn spectral_derivative(samples: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = samples.len();
    let mut spec = forward(samples);
    let w = 2.0 * PI / period;
    for (k, c) in spec.iter_mut().enumerate() {
        let kk = signed(k, n) * w;
        if 2 * k == n && order % 2 == 1 {
            *c = Complex::new(0.0, 0.0);
            continue;
        }
        let factor = Complex::new(0.0, kk).powu(order);
        *c *= factor;
    }
    inverse(spec)
}

/// Solves -u'' = rhs - mean(rhs) with mean(u) = 0. Returns (u, mean(rhs)).
pub fn periodic_poisson(rhs: &[f64], period: f64) -> (Vec<f64>, f64) {
    let n = rhs.len();
    let mut spec = forward(rhs);
    let mean = spec[0].re / n as f64;
    let w = 2.0 * PI / period;
    spec[0] = Complex::new(0.0, 0.0);
    for k in 1..n {
        let kk = signed(k, n) * w;
        spec[k] /= kk * kk;
    }
    (inverse(spec), mean)
}

/// Solves -u'' + kappa u = rhs for the nonconstant modes; the constant mode
/// of u is set to zero.
pub fn screened_poisson(rhs: &[f64], kappa: f64, period: f64) -> Vec<f64> {
    let n = rhs.len();
    let mut spec = forward(rhs);
    let w = 2.0 * PI / period;
    spec[0] = Complex::new(0.0, 0.0);
    for k in 1..n {
        let kk = signed(k, n) * w;
        spec[k] /= kk * kk + kappa;
    }
    inverse(spec)
}

/// Uniform nodes i * period / n.
pub fn uniform_nodes(n: usize, period: f64) -> Vec<f64> {
    (0..n).map(|i| i as f64 * period / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample(n: usize, p: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
        uniform_nodes(n, p).into_iter().map(f).collect()
    }

    #[test]
    fn interpolates_band_limited_function() {
        let p = 3.0;
        let w = 2.0 * PI / p;
        let f = |x: f64| 0.3 + (w * x).cos() - 0.5 * (3.0 * w * x).sin() + 0.1 * (5.0 * w * x).cos();
        let s = TrigSeries::from_samples(&sample(16, p, f), p);
        for x in [0.0, 0.123, 1.7, 2.99, -4.2, 10.0] {
            let (v, d) = s.eval_with_derivative(x);
            assert_relative_eq!(v, f(x), epsilon = 1e-13);
            let df = -w * (w * x).sin() - 1.5 * w * (3.0 * w * x).cos() - 0.5 * w * (5.0 * w * x).sin();
            assert_relative_eq!(d, df, epsilon = 1e-12);
            assert_relative_eq!(s.eval(x), v, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_and_poisson_invert() {
        let p = 2.5;
        let w = 2.0 * PI / p;
        let u: Vec<f64> = sample(32, p, |x| (w * x).sin() + 0.2 * (2.0 * w * x).cos());
        let d2 = spectral_derivative(&u, p, 2);
        let rhs: Vec<f64> = d2.iter().map(|v| -v + 7.0).collect();
        let (back, mean) = periodic_poisson(&rhs, p);
        assert_relative_eq!(mean, 7.0, epsilon = 1e-12);
        for (a, b) in back.iter().zip(&u) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        let d1 = spectral_derivative(&u, p, 1);
        for (i, x) in uniform_nodes(32, p).iter().enumerate() {
            let exact = w * (w * x).cos() - 0.4 * w * (2.0 * w * x).sin();
            assert_relative_eq!(d1[i], exact, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_series() {
        let s = TrigSeries::from_samples(&[0.0; 8], 1.0);
        assert!(s.is_zero());
        assert_eq!(s.eval(0.3), 0.0);
    }
}
