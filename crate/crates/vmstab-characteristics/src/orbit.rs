//! One-period samples of a characteristic. With fixed (e, p) the orbit is a
//! closed curve in (x mod P, v): it either winds once around x (passing) or
//! bounces between two turning points (trapped).

use vmstab_equilibrium::{lorentz, EquilibriumFields};

use crate::ode::{self, Segment, StepOptions};
use crate::{characteristic_rhs, CharacteristicsError, PhasePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrbitKind {
    /// Fixed point of the flow (e.g. v1 = 0 with zero fields).
    Stationary,
    Passing,
    Trapped,
    /// No return found within the horizon; the samples cover [-horizon, 0].
    Unclosed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// Equispaced samples per period.
    pub samples: usize,
    /// Longest period searched for, in units of s.
    pub horizon: f64,
    pub step: StepOptions,
    /// Integrate even when the fields vanish (otherwise straight lines).
    pub force_integration: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            samples: 64,
            horizon: 2000.0,
            step: StepOptions { rtol: 1e-10, atol: 1e-12, ..StepOptions::default() },
            force_integration: false,
        }
    }
}

/// Orbit states at s_q = -q T / N, q = 0..N. `x` is not reduced mod P.
/// Stationary orbits carry a single sample and an infinite period.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSamples {
    pub kind: OrbitKind,
    pub period: f64,
    pub x: Vec<f64>,
    pub v1hat: Vec<f64>,
    pub v2hat: Vec<f64>,
}

impl OrbitSamples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    fn stationary(x: f64, v1: f64, v2: f64) -> Self {
        let g = lorentz(v1, v2);
        Self { kind: OrbitKind::Stationary, period: f64::INFINITY, x: vec![x], v1hat: vec![v1 / g], v2hat: vec![v2 / g] }
    }
}

pub fn trace_orbit(
    fields: &EquilibriumFields,
    start: PhasePoint,
    opts: &OrbitOptions,
) -> Result<OrbitSamples, CharacteristicsError> {
    if opts.samples == 0 {
        return Err(CharacteristicsError::InvalidInput("orbit needs at least one sample".into()));
    }
    let n = opts.samples;
    let period_x = fields.period;
    let (x0, v1, v2) = (start.x, start.v1, start.v2);
    let sign = start.species.sign();
    let g = lorentz(v1, v2);

    if fields.is_zero() && !opts.force_integration {
        if v1 == 0.0 {
            return Ok(OrbitSamples::stationary(x0, v1, v2));
        }
        let dir = v1.signum();
        let x = (0..n).map(|q| x0 - dir * q as f64 * period_x / n as f64).collect();
        return Ok(OrbitSamples {
            kind: OrbitKind::Passing,
            period: period_x * g / v1.abs(),
            x,
            v1hat: vec![v1 / g; n],
            v2hat: vec![v2 / g; n],
        });
    }

    let y0 = [x0, v1, v2];
    let f0 = characteristic_rhs(fields, sign, &y0);
    if f0.iter().all(|v| *v == 0.0) {
        return Ok(OrbitSamples::stationary(x0, v1, v2));
    }

    // Return section: x - x0 = j P crossed with the starting sign of v1, or
    // for a start on a turning point, v1 = 0 crossed at x = x0 mod P.
    let on_turning_point = v1 == 0.0;
    let section = |y: &[f64; 3], j: f64| -> f64 {
        if on_turning_point {
            y[1]
        } else {
            y[0] - x0 - j * period_x
        }
    };
    let rhs = |y: &[f64; 3]| characteristic_rhs(fields, sign, y);

    let mut segments: Vec<Segment<3>> = Vec::new();
    let mut found: Option<(f64, bool)> = None;
    let result = ode::integrate(rhs, 0.0, y0, -opts.horizon, &opts.step, |seg| {
        segments.push(*seg);
        if let Some(hit) = find_return(seg, x0, period_x, v1, on_turning_point, &section) {
            found = Some(hit);
            return false;
        }
        true
    });
    match result {
        // a step failure after some progress leaves an unclosed sample
        Err(CharacteristicsError::StepFailure { .. }) if !segments.is_empty() => {}
        Err(e) => return Err(e),
        Ok(_) => {}
    }

    let (period, kind) = match found {
        Some((t, winds)) => (-t, if winds { OrbitKind::Passing } else { OrbitKind::Trapped }),
        None => (-segments.last().map(|s| s.t1()).unwrap_or(0.0), OrbitKind::Unclosed),
    };
    let mut out = OrbitSamples { kind, period, x: Vec::with_capacity(n), v1hat: Vec::with_capacity(n), v2hat: Vec::with_capacity(n) };
    let mut k = 0;
    for q in 0..n {
        let s = -(q as f64) * period / n as f64;
        while k + 1 < segments.len() && s < segments[k].t1() {
            k += 1;
        }
        let y = if q == 0 { y0 } else { segments[k].eval(s) };
        let g = lorentz(y[1], y[2]);
        out.x.push(y[0]);
        out.v1hat.push(y[1] / g);
        out.v2hat.push(y[2] / g);
    }
    Ok(out)
}

/// Looks for the first return to the section inside one step; returns the
/// crossing time and whether the orbit wound around x.
fn find_return(
    seg: &Segment<3>,
    x0: f64,
    period_x: f64,
    v1_start: f64,
    on_turning_point: bool,
    section: &dyn Fn(&[f64; 3], f64) -> f64,
) -> Option<(f64, bool)> {
    const SUB: usize = 4;
    let first = seg.t0 == 0.0;
    let mut ta = seg.t0;
    let mut ya = seg.start();
    for k in 1..=SUB {
        let tb = seg.t0 + seg.h * k as f64 / SUB as f64;
        let yb = seg.eval(tb);
        if on_turning_point {
            let (fa, fb) = (ya[1], yb[1]);
            let skip_start = first && ta == seg.t0;
            if !skip_start && fa * fb <= 0.0 && fa != fb {
                let t = bisect(seg, ta, tb, &|y| section(y, 0.0));
                let y = seg.eval(t);
                let off = (y[0] - x0) / period_x;
                if (off - off.round()).abs() < 1e-6 {
                    return Some((t, off.round() != 0.0));
                }
            }
        } else {
            let (ca, cb) = ((ya[0] - x0) / period_x, (yb[0] - x0) / period_x);
            let (lo, hi) = (ca.min(cb), ca.max(cb));
            let mut j = lo.ceil();
            while j <= hi {
                let skip_start = first && ta == seg.t0 && j == 0.0 && ca == 0.0;
                if !skip_start {
                    let fa = section(&ya, j);
                    let fb = section(&yb, j);
                    if fa * fb <= 0.0 && fa != fb {
                        let t = bisect(seg, ta, tb, &|y| section(y, j));
                        let y = seg.eval(t);
                        if y[1].signum() == v1_start.signum() && t < 0.0 {
                            return Some((t, j != 0.0));
                        }
                    }
                }
                j += 1.0;
            }
        }
        ta = tb;
        ya = yb;
    }
    None
}

fn bisect(seg: &Segment<3>, mut a: f64, mut b: f64, f: &dyn Fn(&[f64; 3]) -> f64) -> f64 {
    let mut fa = f(&seg.eval(a));
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(&seg.eval(m));
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
