//! Tabulated mu(e, p) read from CSV with header `e,p,mu_plus,mu_minus`.

use std::io::Read;

use serde::Deserialize;

use crate::profile::Density;
use crate::{EquilibriumError, Species};

#[derive(Deserialize)]
struct Row {
    e: f64,
    p: f64,
    mu_plus: f64,
    mu_minus: f64,
}

/// Rectangular (e, p) table; bilinear inside, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedProfile {
    e: Vec<f64>,
    p: Vec<f64>,
    /// [species][ie * np + ip]
    values: [Vec<f64>; 2],
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

impl TabulatedProfile {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, EquilibriumError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| EquilibriumError::Table(e.to_string()))?.clone();
        let expected = ["e", "p", "mu_plus", "mu_minus"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(EquilibriumError::Table(format!(
                "header must be `e,p,mu_plus,mu_minus`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.deserialize::<Row>().enumerate() {
            let r = rec.map_err(|e| EquilibriumError::Table(format!("row {}: {e}", line + 2)))?;
            if ![r.e, r.p, r.mu_plus, r.mu_minus].iter().all(|v| v.is_finite()) {
                return Err(EquilibriumError::Table(format!("row {}: non-finite value", line + 2)));
            }
            rows.push(r);
        }
        let e = sorted_unique(rows.iter().map(|r| r.e).collect());
        let p = sorted_unique(rows.iter().map(|r| r.p).collect());
        if e.len() < 2 || p.len() < 2 {
            return Err(EquilibriumError::Table("table needs at least two e and two p values".into()));
        }
        if rows.len() != e.len() * p.len() {
            return Err(EquilibriumError::Table(format!(
                "table is not rectangular: {} rows for {} x {} grid",
                rows.len(),
                e.len(),
                p.len()
            )));
        }
        let np = p.len();
        let mut values = [vec![f64::NAN; e.len() * np], vec![f64::NAN; e.len() * np]];
        for r in &rows {
            let ie = e.binary_search_by(|v| v.total_cmp(&r.e)).unwrap();
            let ip = p.binary_search_by(|v| v.total_cmp(&r.p)).unwrap();
            if !values[0][ie * np + ip].is_nan() {
                return Err(EquilibriumError::Table(format!("duplicate node e={}, p={}", r.e, r.p)));
            }
            values[0][ie * np + ip] = r.mu_plus;
            values[1][ie * np + ip] = r.mu_minus;
        }
        Ok(Self { e, p, values })
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, EquilibriumError> {
        let f = std::fs::File::open(path).map_err(|e| EquilibriumError::Table(format!("{}: {e}", path.display())))?;
        Self::from_reader(f)
    }

    fn cell(nodes: &[f64], x: f64) -> Option<(usize, f64, f64)> {
        if x < nodes[0] || x > nodes[nodes.len() - 1] {
            return None;
        }
        let i = match nodes.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => i.min(nodes.len() - 2),
            Err(i) => i - 1,
        };
        let h = nodes[i + 1] - nodes[i];
        Some((i, (x - nodes[i]) / h, h))
    }

    pub fn eval(&self, species: Species, e: f64, p: f64) -> Density {
        let (Some((ie, t, he)), Some((ip, u, hp))) = (Self::cell(&self.e, e), Self::cell(&self.p, p)) else {
            return Density::default();
        };
        let np = self.p.len();
        let v = &self.values[species.index()];
        let f00 = v[ie * np + ip];
        let f01 = v[ie * np + ip + 1];
        let f10 = v[(ie + 1) * np + ip];
        let f11 = v[(ie + 1) * np + ip + 1];
        Density {
            mu: (1.0 - t) * (1.0 - u) * f00 + (1.0 - t) * u * f01 + t * (1.0 - u) * f10 + t * u * f11,
            mu_e: ((1.0 - u) * (f10 - f00) + u * (f11 - f01)) / he,
            mu_p: ((1.0 - t) * (f01 - f00) + t * (f11 - f10)) / hp,
        }
    }
}
