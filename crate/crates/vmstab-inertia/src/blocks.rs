use nalgebra::DMatrix;

use crate::count::sorted_eigen;
use crate::InertiaError;

/// Symmetric matrix partitioned into 3x3 blocks of sizes `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    pub matrix: DMatrix<f64>,
    pub dims: [usize; 3],
}

impl BlockMatrix {
    /// [[a1, b, c], [b^T, a2, d], [c^T, d^T, a3]].
    pub fn from_blocks(
        a1: &DMatrix<f64>,
        a2: &DMatrix<f64>,
        a3: &DMatrix<f64>,
        b: &DMatrix<f64>,
        c: &DMatrix<f64>,
        d: &DMatrix<f64>,
    ) -> Result<Self, InertiaError> {
        let dims = [a1.nrows(), a2.nrows(), a3.nrows()];
        check_shapes(dims, a1, a2, a3, b, c, d)?;
        let [d1, d2, d3] = dims;
        let mut m = DMatrix::zeros(d1 + d2 + d3, d1 + d2 + d3);
        let o = [0, d1, d1 + d2];
        let mut put = |i: usize, j: usize, blk: &DMatrix<f64>| {
            m.view_mut((o[i], o[j]), (dims[i], dims[j])).copy_from(blk);
            if i != j {
                m.view_mut((o[j], o[i]), (dims[j], dims[i]))
                    .copy_from(&blk.transpose());
            }
        };
        put(0, 0, a1);
        put(1, 1, a2);
        put(2, 2, a3);
        put(0, 1, b);
        put(0, 2, c);
        put(1, 2, d);
        Ok(Self { matrix: m, dims })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn offset(&self, i: usize) -> usize {
        self.dims[..i].iter().sum()
    }

    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.matrix
            .view(
                (self.offset(i), self.offset(j)),
                (self.dims[i], self.dims[j]),
            )
            .clone_owned()
    }
}

fn check_shapes(
    [d1, d2, d3]: [usize; 3],
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    a3: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<(), InertiaError> {
    let want = [
        (a1, d1, d1, "A1"),
        (a2, d2, d2, "A2"),
        (a3, d3, d3, "A3"),
        (b, d1, d2, "B"),
        (c, d1, d3, "C"),
        (d, d2, d3, "D"),
    ];
    for (m, r, cc, name) in want {
        if m.shape() != (r, cc) {
            return Err(InertiaError::DimensionMismatch(format!(
                "{name} is {:?}, expected ({r}, {cc})",
                m.shape()
            )));
        }
    }
    Ok(())
}

/// J = [[I, 0, 0], [J1, I, 0], [J2, J3, I]] with J^T M J = diag(delta).
#[derive(Clone, Debug)]
pub struct BlockDiagonalization {
    pub j1: DMatrix<f64>,
    pub j2: DMatrix<f64>,
    pub j3: DMatrix<f64>,
    pub delta: [DMatrix<f64>; 3],
}

impl BlockDiagonalization {
    pub fn j_matrix(&self) -> DMatrix<f64> {
        let (d1, d2, d3) = (
            self.delta[0].nrows(),
            self.delta[1].nrows(),
            self.delta[2].nrows(),
        );
        let mut j = DMatrix::identity(d1 + d2 + d3, d1 + d2 + d3);
        j.view_mut((d1, 0), (d2, d1)).copy_from(&self.j1);
        j.view_mut((d1 + d2, 0), (d3, d1)).copy_from(&self.j2);
        j.view_mut((d1 + d2, d1), (d3, d2)).copy_from(&self.j3);
        j
    }

    pub fn delta_matrix(&self) -> DMatrix<f64> {
        let n: usize = self.delta.iter().map(|d| d.nrows()).sum();
        let mut out = DMatrix::zeros(n, n);
        let mut o = 0;
        for d in &self.delta {
            out.view_mut((o, o), d.shape()).copy_from(d);
            o += d.nrows();
        }
        out
    }
}

/// Condition number of a symmetric matrix, infinite when singular.
fn sym_condition(m: &DMatrix<f64>) -> Result<f64, InertiaError> {
    let (e, _) = sorted_eigen(m)?;
    let max = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = e.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    Ok(if min > 0.0 { max / min } else { f64::INFINITY })
}

fn solve(
    pivot: &DMatrix<f64>,
    rhs: &DMatrix<f64>,
    which: &'static str,
) -> Result<DMatrix<f64>, InertiaError> {
    pivot
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(InertiaError::SingularPivot {
            which,
            cond: f64::INFINITY,
        })
}

/// Eliminates the coupling of M = [[A1, B, C], [B^T, A2, D], [C^T, D^T, A3]]
/// from the bottom: pivots A3, then S = A2 - D A3^-1 D^T.
pub fn block_diagonalize(
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    a3: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
    cond_tol: f64,
) -> Result<BlockDiagonalization, InertiaError> {
    check_shapes([a1.nrows(), a2.nrows(), a3.nrows()], a1, a2, a3, b, c, d)?;
    let cond3 = sym_condition(a3)?;
    if cond3 > cond_tol {
        return Err(InertiaError::SingularPivot {
            which: "A3",
            cond: cond3,
        });
    }
    let a3_dt = solve(a3, &d.transpose(), "A3")?;
    let a3_ct = solve(a3, &c.transpose(), "A3")?;
    let s = a2 - d * &a3_dt;
    let s = 0.5 * (&s + s.transpose());
    let cond_s = sym_condition(&s)?;
    if cond_s > cond_tol {
        return Err(InertiaError::SingularPivot {
            which: "A2 - D A3^-1 D^T",
            cond: cond_s,
        });
    }
    // coupling left after the first elimination: B - C A3^-1 D^T
    let bt_red = b.transpose() - d * &a3_ct;
    let j1 = -solve(&s, &bt_red, "A2 - D A3^-1 D^T")?;
    let j2 = -(&a3_dt * &j1) - &a3_ct;
    let j3 = -a3_dt;
    let delta1 = a1 + bt_red.transpose() * &j1 - c * &a3_ct;
    let delta1 = 0.5 * (&delta1 + delta1.transpose());
    Ok(BlockDiagonalization {
        j1,
        j2,
        j3,
        delta: [delta1, s, a3.clone()],
    })
}

/// K = A2 + B^T A1^-1 B by column solves against A1. Fails when A1 has an
/// eigenvalue below `singular_tol` times its norm in magnitude.
pub fn k1_operator(
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    b: &DMatrix<f64>,
    singular_tol: f64,
) -> Result<DMatrix<f64>, InertiaError> {
    if !a1.is_square() || !a2.is_square() || b.shape() != (a1.nrows(), a2.nrows()) {
        return Err(InertiaError::DimensionMismatch(format!(
            "A1 {:?}, A2 {:?}, B {:?}",
            a1.shape(),
            a2.shape(),
            b.shape()
        )));
    }
    let (e, _) = sorted_eigen(a1)?;
    let max = e.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min_abs = e.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
    if min_abs <= singular_tol * max {
        return Err(InertiaError::HypothesisFailure { min_abs });
    }
    let x = a1
        .clone()
        .lu()
        .solve(b)
        .ok_or(InertiaError::HypothesisFailure { min_abs })?;
    let k = a2 + b.transpose() * x;
    Ok(0.5 * (&k + k.transpose()))
}
