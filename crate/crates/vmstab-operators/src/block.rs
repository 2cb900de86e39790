use vmstab_inertia::{BlockMatrix, DMatrix, DVector};

use crate::assemble::OperatorSet;
use crate::OperatorError;

/// [[-A1, B, C], [B^T, A2, -D], [C^T, -D^T, -P (lambda^2 - l)]] on the
/// mean-zero phi slot.
pub fn assemble_m(ops: &OperatorSet) -> Result<BlockMatrix, OperatorError> {
    if !(ops.lambda > 0.0) {
        return Err(OperatorError::InvalidRate(ops.lambda));
    }
    let corner = DMatrix::from_element(1, 1, -ops.period * (ops.lambda * ops.lambda - ops.l));
    let c = DMatrix::from_column_slice(ops.c.len(), 1, ops.c.as_slice());
    let d = DMatrix::from_column_slice(ops.d.len(), 1, ops.d.as_slice());
    Ok(BlockMatrix::from_blocks(&(-&ops.a1), &ops.a2, &corner, &ops.b, &c, &(-d))?)
}

/// [[-A1, B, 0], [B^T, A2, 0], [0, 0, P l]] from operators at lambda = 0.
pub fn assemble_m0(ops: &OperatorSet) -> Result<BlockMatrix, OperatorError> {
    if ops.lambda != 0.0 {
        return Err(OperatorError::InvalidRate(ops.lambda));
    }
    let corner = DMatrix::from_element(1, 1, ops.period * ops.l);
    let (n1, n2) = (ops.a1.nrows(), ops.a2.nrows());
    Ok(BlockMatrix::from_blocks(&(-&ops.a1), &ops.a2, &corner, &ops.b, &DMatrix::zeros(n1, 1), &DMatrix::zeros(n2, 1))?)
}

/// The operator M^lambda as assembled, on the full phi basis and without
/// symmetrization: each block from its own formula (B and B* separately).
pub fn assemble_m_raw(ops: &OperatorSet) -> DMatrix<f64> {
    let r = &ops.raw;
    let f = r.a1.nrows();
    let mut m = DMatrix::zeros(2 * f + 1, 2 * f + 1);
    m.view_mut((0, 0), (f, f)).copy_from(&(-&r.a1));
    m.view_mut((0, f), (f, f)).copy_from(&r.b);
    m.view_mut((f, 0), (f, f)).copy_from(&r.b_adjoint);
    m.view_mut((f, f), (f, f)).copy_from(&r.a2);
    for j in 0..f {
        m[(j, 2 * f)] = r.c[j];
        m[(2 * f, j)] = r.c[j];
        m[(f + j, 2 * f)] = -r.d[j];
        m[(2 * f, f + j)] = -r.d[j];
    }
    m[(2 * f, 2 * f)] = -ops.period * (ops.lambda * ops.lambda - ops.l);
    m
}

/// (phi, psi, b) = (1, 0, 0) in the coordinates of `assemble_m_raw`.
pub fn trivial_vector(ops: &OperatorSet) -> DVector<f64> {
    let f = ops.raw.a1.nrows();
    let mut u = DVector::zeros(2 * f + 1);
    u[0] = ops.period.sqrt();
    u
}
