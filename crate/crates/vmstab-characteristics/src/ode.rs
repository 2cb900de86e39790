//! Dormand-Prince 5(4) with the standard continuous extension, for
//! autonomous systems.

use crate::CharacteristicsError;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Step control for the characteristic integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step magnitude; 0 picks one from the right-hand side.
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Take steps of exactly this magnitude without error control.
    pub fixed_step: Option<f64>,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 0.0, h_min: 1e-12, h_max: 1.0, max_steps: 200_000, fixed_step: None }
    }
}

/// Continuous extension over one accepted step.
#[derive(Clone, Copy, Debug)]
pub struct Segment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.r[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = self.r[0];
        for i in 0..N {
            y[i] += self.r[1][i];
        }
        y
    }

    /// State at time t inside the step.
    #[inline]
    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrates y' = f(y) from t0 toward t_end (either direction). `visit` sees
/// every accepted step and may stop the integration by returning false.
pub fn integrate<const N: usize, F, V>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    opts: &StepOptions,
    mut visit: V,
) -> Result<[f64; N], CharacteristicsError>
where
    F: Fn(&[f64; N]) -> [f64; N],
    V: FnMut(&Segment<N>) -> bool,
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let span = (t_end - t0).abs();
    if span == 0.0 {
        return Ok(y0);
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = match opts.fixed_step {
        Some(h) => h.abs(),
        None if opts.h_init > 0.0 => opts.h_init,
        None => initial_step(&y, &k1, opts),
    }
    .min(opts.h_max)
    .min(span);
    let mut steps = 0usize;
    let mut last_reject = false;
    loop {
        let remaining = (t_end - t).abs();
        if remaining <= 1e-14 * span.max(1.0) {
            return Ok(y);
        }
        if steps >= opts.max_steps {
            return Err(CharacteristicsError::StepFailure { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        let hh = dir * h.min(remaining);
        let k2 = f(&axpy(&y, hh, &[(A21, &k1)]));
        let k3 = f(&axpy(&y, hh, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(&y, hh, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(&y, hh, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(&y, hh, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = axpy(&y, hh, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y1);
        steps += 1;

        let err = if opts.fixed_step.is_some() {
            0.0
        } else {
            let mut acc = 0.0;
            for i in 0..N {
                let e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y1[i].abs());
                acc += (e / sc) * (e / sc);
            }
            (acc / N as f64).sqrt()
        };
        if !err.is_finite() {
            return Err(CharacteristicsError::StepFailure { t, reason: "non-finite state".into() });
        }
        if err <= 1.0 {
            let mut r = [[0.0; N]; 5];
            for i in 0..N {
                let dy = y1[i] - y[i];
                let bspl = hh * k1[i] - dy;
                r[0][i] = y[i];
                r[1][i] = dy;
                r[2][i] = bspl;
                r[3][i] = dy - hh * k7[i] - bspl;
                r[4][i] = hh * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let seg = Segment { t0: t, h: hh, r };
            t += hh;
            y = y1;
            k1 = k7;
            if !visit(&seg) {
                return Ok(y);
            }
            if opts.fixed_step.is_none() {
                let mut fac = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                fac = fac.clamp(0.2, 5.0);
                if last_reject {
                    fac = fac.min(1.0);
                }
                h = (h * fac).min(opts.h_max);
            }
            last_reject = false;
        } else {
            let fac = (0.9 * err.powf(-0.2)).max(0.2);
            h *= fac;
            last_reject = true;
            if h < opts.h_min {
                return Err(CharacteristicsError::StepFailure { t, reason: format!("step size {h:.3e} below minimum") });
            }
        }
    }
}

fn initial_step<const N: usize>(y: &[f64; N], f0: &[f64; N], opts: &StepOptions) -> f64 {
    let (mut d0, mut d1) = (0.0, 0.0);
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f0[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.max(opts.h_min)
}
