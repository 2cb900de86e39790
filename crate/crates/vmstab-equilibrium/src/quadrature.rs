//! Gauss–Legendre rules and the tensor velocity grid.

use std::f64::consts::PI;

use crate::EquilibriumError;

/// Gauss–Legendre nodes and weights on [-1, 1], ascending.
///
/// Newton iteration on P_n from the Tricomi initial guess; converges to
/// machine precision in a handful of steps for every n used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Tensor Gauss–Legendre grid on [-v_max, v_max]^2.
///
/// Flat index `j = j1 * n + j2` with `j1` the v1 index.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityGrid {
    pub v_max: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(n: usize, v_max: f64) -> Result<Self, EquilibriumError> {
        if n < 2 {
            return Err(EquilibriumError::InvalidGrid(format!("velocity grid needs n >= 2, got {n}")));
        }
        if !(v_max.is_finite() && v_max > 0.0) {
            return Err(EquilibriumError::InvalidGrid(format!("v_max must be positive, got {v_max}")));
        }
        let (x, w) = gauss_legendre(n);
        Ok(Self {
            v_max,
            nodes: x.iter().map(|t| t * v_max).collect(),
            weights: w.iter().map(|t| t * v_max).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn len(&self) -> usize {
        self.nodes.len() * self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn velocity(&self, j: usize) -> (f64, f64) {
        let n = self.nodes.len();
        (self.nodes[j / n], self.nodes[j % n])
    }

    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        let n = self.nodes.len();
        self.weights[j / n] * self.weights[j % n]
    }

    /// Nodes in the outer tenth of the box along either axis.
    pub fn is_shell(&self, j: usize) -> bool {
        let (v1, v2) = self.velocity(j);
        v1.abs().max(v2.abs()) > 0.9 * self.v_max
    }

    /// Index of the node mirrored in v1 (v1 -> -v1).
    pub fn mirror_v1(&self, j: usize) -> usize {
        let n = self.nodes.len();
        (n - 1 - j / n) * n + j % n
    }

    /// Index of the node mirrored in v2.
    pub fn mirror_v2(&self, j: usize) -> usize {
        let n = self.nodes.len();
        (j / n) * n + (n - 1 - j % n)
    }
}

/// Relativistic factor sqrt(1 + |v|^2).
#[inline]
pub fn lorentz(v1: f64, v2: f64) -> f64 {
    (1.0 + v1 * v1 + v2 * v2).sqrt()
}
