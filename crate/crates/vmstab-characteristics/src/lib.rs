//! Characteristics of the equilibrium transport: backward particle orbits
//! in the equilibrium fields, the invariants (e, p) and one-period orbit
//! samples used by the orbit-integral operators.

pub mod ode;
mod orbit;

use std::io::Write;

use thiserror::Error;
use vmstab_equilibrium::{lorentz, EquilibriumFields, Species};

pub use ode::StepOptions;
pub use orbit::{trace_orbit, OrbitKind, OrbitOptions, OrbitSamples};

#[derive(Debug, Error)]
pub enum CharacteristicsError {
    #[error("integration failed at s = {t:.6e}: {reason}")]
    StepFailure { t: f64, reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("trajectory output: {0}")]
    Io(String),
}

/// A point (x, v1, v2) of phase space for one species, x reduced to [0, P).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub v1: f64,
    pub v2: f64,
    pub species: Species,
}

impl PhasePoint {
    pub fn new(x: f64, v1: f64, v2: f64, species: Species, period: f64) -> Self {
        Self { x: x.rem_euclid(period), v1, v2, species }
    }
}

/// Right-hand side of the characteristic system in s for state (x, v1, v2).
#[inline]
pub fn characteristic_rhs(fields: &EquilibriumFields, sign: f64, y: &[f64; 3]) -> [f64; 3] {
    let g = lorentz(y[1], y[2]);
    let (v1h, v2h) = (y[1] / g, y[2] / g);
    let (e1, b) = fields.e1_b(y[0]);
    [v1h, sign * (e1 + v2h * b), -sign * v1h * b]
}

/// (e, p) = (<v> + s phi0(x), v2 + s psi0(x)) with s the species sign.
pub fn invariants_of(point: &PhasePoint, fields: &EquilibriumFields) -> (f64, f64) {
    let s = point.species.sign();
    (lorentz(point.v1, point.v2) + s * fields.phi(point.x), point.v2 + s * fields.psi(point.x))
}

/// Sampled backward trajectory. `x_unwrapped` keeps the winding.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub s_nodes: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub x_unwrapped: Vec<f64>,
    pub e: Vec<f64>,
    pub p: Vec<f64>,
    pub e_drift: f64,
    pub p_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.states.last().expect("trajectory has at least the start point")
    }

    /// Writes `s,x,v1,v2,e,p` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CharacteristicsError> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| CharacteristicsError::Io(e.to_string());
        w.write_record(["s", "x", "v1", "v2", "e", "p"]).map_err(io)?;
        for (i, st) in self.states.iter().enumerate() {
            let row = [self.s_nodes[i], st.x, st.v1, st.v2, self.e[i], self.p[i]];
            w.write_record(row.iter().map(|v| format!("{v:.17e}"))).map_err(io)?;
        }
        w.flush().map_err(|e| CharacteristicsError::Io(e.to_string()))
    }
}

/// Integrates the characteristic through `start` from s = 0 down to
/// `s_end < 0`, recording every accepted step.
pub fn integrate_trajectory(
    fields: &EquilibriumFields,
    start: PhasePoint,
    s_end: f64,
    opts: &StepOptions,
) -> Result<Trajectory, CharacteristicsError> {
    if !(s_end < 0.0 && s_end.is_finite()) {
        return Err(CharacteristicsError::InvalidInput(format!("s_end must be negative, got {s_end}")));
    }
    let sign = start.species.sign();
    let period = fields.period;
    let (e0, p0) = invariants_of(&start, fields);
    let mut tr = Trajectory {
        s_nodes: vec![0.0],
        states: vec![start],
        x_unwrapped: vec![start.x],
        e: vec![e0],
        p: vec![p0],
        e_drift: 0.0,
        p_drift: 0.0,
    };
    let rhs = |y: &[f64; 3]| characteristic_rhs(fields, sign, y);
    ode::integrate(rhs, 0.0, [start.x, start.v1, start.v2], s_end, opts, |seg| {
        let y = seg.end();
        let pt = PhasePoint::new(y[0], y[1], y[2], start.species, period);
        let (e, p) = invariants_of(&pt, fields);
        tr.s_nodes.push(seg.t1());
        tr.states.push(pt);
        tr.x_unwrapped.push(y[0]);
        tr.e_drift = tr.e_drift.max((e - e0).abs());
        tr.p_drift = tr.p_drift.max((p - p0).abs());
        tr.e.push(e);
        tr.p.push(p);
        true
    })?;
    // the final step may land within roundoff of s_end; pin it
    if let Some(last) = tr.s_nodes.last_mut() {
        *last = s_end;
    }
    Ok(tr)
}
